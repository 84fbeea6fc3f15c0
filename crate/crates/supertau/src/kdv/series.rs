//! Generating series c(λ), b(μ) and the identities they satisfy. The odd
//! densities Φ^n_k are read off the b(μ)c(λ)′ antiderivative.

use std::collections::BTreeMap;

use crate::jet::gen::{gamma_half_quot, gamma_half_ratio, q, qi};
use crate::jet::{DiffPoly, LaurentJet, Ring, Series2};
use crate::report::Check;
use crate::Error;

use super::{kdv_r, Kdv};

/// c(λ) = −Σ_{j≤J} σ_j λ^{−j−1}.
pub fn c_series(jmax: usize) -> LaurentJet {
    c_tail(0, jmax)
}

/// C_m = (λ^m c)_− = −Σ_{i≥0} σ_{m+i} λ^{−i−1}, known while m + i ≤ J.
pub fn c_tail(m: usize, jmax: usize) -> LaurentJet {
    let mut s = LaurentJet::zero(false);
    for i in 0..=(jmax - m) {
        s.set(-2 * i as i64 - 2, -DiffPoly::sigma(0, m + i));
    }
    s.truncated(-2 * (jmax - m) as i64 - 2)
}

/// b(μ) = Σ_{n≤D} Γ(n+½)/Γ(½) R_n μ^{−n−½}.
pub fn b_series(dmax: usize) -> LaurentJet {
    let mut s = LaurentJet::zero(true);
    for n in 0..=dmax {
        s.set(-2 * n as i64 - 1, kdv_r(n).scale(&gamma_half_ratio(n as i64)));
    }
    s.truncated(-2 * dmax as i64 - 1)
}

/// B_n = Σ_{i=0}^n Γ(n+½−i)/Γ(n+3/2) R_{n−i} λ^i.
pub fn b_poly(n: usize) -> LaurentJet {
    let mut s = LaurentJet::zero(false);
    for i in 0..=n {
        s.set(2 * i as i64, kdv_r(n - i).scale(&gamma_half_quot((n - i) as i64, n as i64 + 1)));
    }
    s
}

fn lj_dx(ring: &Ring, s: &LaurentJet) -> LaurentJet {
    s.map(|p| ring.dx(p))
}

fn s2_dx(ring: &Ring, s: &Series2) -> Series2 {
    s.map(|p| ring.dx(p))
}

fn eps2() -> DiffPoly {
    DiffPoly::eps_pow(2)
}

/// Every known coefficient vanishes and at least `need` coefficients below
/// the top `from` were actually known.
fn lj_zero(s: &LaurentJet, from: i64, need: i64) -> Result<Option<String>, Error> {
    let vm = s.valid_min.unwrap_or(i64::MIN);
    if vm > from - 2 * (need - 1) {
        return Err(Error::TruncationTooSmall(format!("window reaches only {}", vm)));
    }
    Ok(s.coeffs.iter().next_back().map(|(e, p)| format!("coefficient of lambda^({}/2): {}", e, p)))
}

fn s2_zero(s: &Series2, a: (i64, i64), b: (i64, i64), need: usize) -> Result<Option<String>, Error> {
    let k = s.count_known(a.0, a.1, b.0, b.1);
    if k < need {
        return Err(Error::TruncationTooSmall(format!("{} known coefficients, need {}", k, need)));
    }
    Ok(s.coeffs.iter().next().map(|((x, y), p)| format!("coefficient ({}, {}): {}", x, y, p)))
}

/// Φ^n_k for n ≤ nmax, k ≤ kmax.
pub fn phi_table(ring: &Ring, nmax: usize, kmax: usize) -> Result<BTreeMap<(usize, usize), DiffPoly>, Error> {
    let jmax = nmax + kmax + 4;
    let dmax = kmax + 3;
    let c = c_series(jmax);
    let b = b_series(dmax);
    let q_ser = q_series(ring, &c, &b, dmax)?;
    let mut out = BTreeMap::new();
    for n in 0..=nmax {
        for k in 0..=kmax {
            let (a, m) = (-2 * n as i64 - 2, -2 * k as i64 - 3);
            if !q_ser.known(a, m) {
                return Err(Error::TruncationTooSmall(format!("Phi^{}_{}", n, k)));
            }
            let p = (-q_ser.coeff(a, m)).scale(&(qi(1) / gamma_half_ratio(k as i64 + 1)));
            out.insert((k, n), p);
        }
    }
    Ok(out)
}

/// Direct extraction of single Φ^n_k coefficients. c(λ) enters linearly, so
/// the λ^{−j−1} part of W = c/b − ε²/8 b(b(c/b)′)′ is a fixed operator W_m
/// (μ-exponent ½ − m) applied to −σ_j, and
/// Φ^n_k = −1/(2ĝ_{k+1}) Σ_{i≤k} [−2 Σ_{i′<m} W_{m−1−i′}(σ_{n+i+i′}) + b_{m−1}σ_{n+i}], m = k+1−i.
pub struct PhiBuilder {
    b: Vec<DiffPoly>,
    beta: Vec<DiffPoly>,
    w: std::sync::RwLock<BTreeMap<(usize, usize), DiffPoly>>,
}

impl PhiBuilder {
    pub fn new(depth: usize) -> PhiBuilder {
        let bs = b_series(depth + 1);
        let inv = bs.invert(depth as i64 + 1).expect("b is invertible");
        PhiBuilder {
            b: (0..=depth + 1).map(|n| bs.coeff(-2 * n as i64 - 1)).collect(),
            beta: (0..=depth + 1).map(|m| inv.coeff(1 - 2 * m as i64)).collect(),
            w: Default::default(),
        }
    }

    pub fn depth(&self) -> usize {
        self.b.len() - 2
    }

    /// W_m(σ_j).
    fn w(&self, ring: &Ring, m: usize, j: usize) -> DiffPoly {
        if let Some(p) = self.w.read().unwrap().get(&(m, j)) {
            return p.clone();
        }
        let x = DiffPoly::sigma(0, j);
        let mut out = &x * &self.beta[m];
        if m >= 1 {
            // M4_{m−1} = Σ_{n2+t=m−1} b_{n2} (Σ_{n1+m1=t} b_{n1} (xβ_{m1})′)′
            let mut m4 = DiffPoly::zero();
            for t in 0..m {
                let mut m2 = DiffPoly::zero();
                for m1 in 0..=t {
                    m2 += &(&self.b[t - m1] * &ring.dx(&(&x * &self.beta[m1])));
                }
                m4 += &(&self.b[m - 1 - t] * &ring.dx(&m2));
            }
            out -= &(&DiffPoly::eps_pow(2) * &m4).scale(&q(1, 8));
        }
        self.w.write().unwrap().insert((m, j), out.clone());
        out
    }

    pub fn phi(&self, ring: &Ring, k: usize, n: usize) -> DiffPoly {
        assert!(k <= self.depth(), "Phi builder depth {} below {}", self.depth(), k);
        let mut acc = DiffPoly::zero();
        for i in 0..=k {
            let (j, m) = (n + i, k + 1 - i);
            for ip in 0..m {
                acc -= &self.w(ring, m - 1 - ip, j + ip).scale_i(2);
            }
            acc += &(&self.b[m - 1] * &DiffPoly::sigma(0, j));
        }
        acc.scale(&(q(-1, 2) / gamma_half_ratio(k as i64 + 1)))
    }
}

/// The antiderivative P of b(μ)c(λ)′ from the closed form.
fn p_series(ring: &Ring, c: &LaurentJet, b: &LaurentJet, depth: usize) -> Result<Series2, Error> {
    let binv = b.invert(depth as i64)?;
    let cb = Series2::from_lambda(c).mul(&Series2::from_mu(&binv));
    let bm = Series2::from_mu(b);
    let inner = bm.mul(&s2_dx(ring, &bm.mul(&s2_dx(ring, &cb))));
    let w = cb.sub(&inner.map(|p| &eps2() * p).scale(&q(1, 8)));
    Ok(w.div_mu_minus_lambda_neg())
}

/// Q with Q′ = −∂b(μ)/∂τ(λ): Q = ½[(2P − b(μ)c(λ))/(μ−λ)]_−.
fn q_series(ring: &Ring, c: &LaurentJet, b: &LaurentJet, depth: usize) -> Result<Series2, Error> {
    let p = p_series(ring, c, b, depth)?;
    let bc = Series2::from_mu(b).mul(&Series2::from_lambda(c));
    Ok(p.scale(&qi(2)).sub(&bc).div_mu_minus_lambda_neg().scale(&q(1, 2)))
}

/// Generating-function identities of the super KdV hierarchy.
pub fn check_identities(k: &Kdv) -> Vec<Check> {
    let ring = &*k.ring;
    let nlev = k.level;
    let jmax = nlev + 6;
    let mut out = Vec::new();

    out.push(Check::timed("kdv/series/c-equation", || {
        // 𝒫_λ c = 𝒫₁c − λc′ = σ₀′
        let c = c_series(jmax);
        let lhs = c.map(|p| super::p1(ring, p)).sub(&lj_dx(ring, &c).shift(2));
        let r = lhs.sub(&LaurentJet::constant(ring.sigma_jet(0, 0, 1)));
        lj_zero(&r, 0, 4)
    }));

    out.push(Check::timed("kdv/series/tau0-on-c", || {
        let c = c_series(jmax);
        let t0 = k.tau_flow(0);
        let lhs = c.map(|p| t0.apply(p));
        let rhs = c.mul(&lj_dx(ring, &c)).scale(&q(1, 2));
        lj_zero(&lhs.sub(&rhs), -2, 4)
    }));

    out.push(Check::timed("kdv/series/tau-on-sigma0", || {
        // ∂σ₀/∂τ(λ) = ½c c′
        let c = c_series(jmax);
        let cc = c.mul(&lj_dx(ring, &c)).scale(&q(1, 2));
        let mut lhs = LaurentJet::zero(false);
        for n in 0..=jmax {
            lhs.set(-2 * n as i64 - 2, k.tau_flow(n).apply(&DiffPoly::sigma(0, 0)));
        }
        let lhs = lhs.truncated(-2 * jmax as i64 - 2);
        lj_zero(&lhs.sub(&cc), -2, 4)
    }));

    out.push(Check::timed("kdv/series/tau-n-on-c", || {
        let c = c_series(jmax);
        let c1 = lj_dx(ring, &c);
        for n in 0..=nlev + 1 {
            let cn = c.shift(2 * n as i64).minus();
            let lhs = c.map(|p| k.tau_flow(n).apply(p));
            let rhs = cn
                .mul(&c1)
                .add(&c.mul(&lj_dx(ring, &cn)))
                .sub(&c.mul(&c1).shift(2 * n as i64).minus())
                .scale(&q(1, 2));
            if let Some(w) = lj_zero(&lhs.sub(&rhs), -2, 4)? {
                return Ok(Some(format!("n = {}: {}", n, w)));
            }
        }
        Ok(None)
    }));

    out.push(Check::timed("kdv/series/tau-on-c", || {
        // ∂c(λ)/∂τ(μ) = ½ D (c(λ)′ − c(μ)′), D = (c(λ) − c(μ))/(μ − λ)
        let jm = nlev + 5;
        let c = c_series(jm);
        let mut lhs = Series2::zero();
        for n in 0..=jm {
            let img = c.map(|p| k.tau_flow(n).apply(p));
            lhs = lhs.add(&Series2::from_lambda(&img).shift(0, -2 * n as i64 - 2));
        }
        lhs.m = Some(-2 * jm as i64 - 2);
        lhs.l = Some(-2 * jm as i64 - 2);
        let mut d = Series2::zero();
        for n in 0..=jm {
            for i in 0..=n {
                let e = (-2 - 2 * i as i64, 2 * i as i64 - 2 * n as i64 - 2);
                *d.coeffs.entry(e).or_default() -= &DiffPoly::sigma(0, n);
            }
        }
        d.s = Some(-2 * jm as i64 - 4);
        let c1 = lj_dx(ring, &c);
        let rhs = d.mul(&Series2::from_lambda(&c1).sub(&Series2::from_mu(&c1))).scale(&q(1, 2));
        s2_zero(&lhs.sub(&rhs), (-12, -2), (-12, -2), 16)
    }));

    out.push(Check::timed("kdv/series/t-on-c", || {
        // ∂c(λ)/∂t(μ) = [(b(μ)c(λ)′ − c(λ)b(μ)′)/(2(μ−λ))]_−
        let (jm, dm) = (nlev + 5, nlev + 4);
        let c = c_series(jm);
        let b = b_series(dm);
        let mut lhs = Series2::zero();
        for n in 0..=dm {
            let img = c.map(|p| k.t_flow(n).apply(p)).scale(&gamma_half_ratio(n as i64 + 1));
            lhs = lhs.add(&Series2::from_lambda(&img).shift(0, -2 * n as i64 - 3));
        }
        lhs.l = Some(-2 * jm as i64 - 2);
        lhs.m = Some(-2 * dm as i64 - 3);
        let (bs, cs) = (Series2::from_mu(&b), Series2::from_lambda(&c));
        let y = bs.mul(&s2_dx(ring, &cs)).sub(&cs.mul(&s2_dx(ring, &bs)));
        let rhs = y.div_mu_minus_lambda_neg().scale(&q(1, 2));
        s2_zero(&lhs.sub(&rhs), (-12, -2), (-11, -3), 16)
    }));

    out.push(Check::timed("kdv/series/b-equation", || {
        // (u − λ)b² + ε²/8 (2bb″ − b′²) = −1
        let b = b_series(nlev + 5);
        let b1 = lj_dx(ring, &b);
        let b2 = lj_dx(ring, &b1);
        let u = LaurentJet::constant(DiffPoly::jet(0, 0)).sub(&LaurentJet::monomial(2, DiffPoly::one()));
        let lhs = u
            .mul(&b.mul(&b))
            .add(&b.mul(&b2).scale(&qi(2)).sub(&b1.mul(&b1)).map(|p| &eps2() * p).scale(&q(1, 8)));
        lj_zero(&lhs.add(&LaurentJet::constant(DiffPoly::one())), 0, 4)
    }));

    out.push(Check::timed("kdv/series/phi-generating", || {
        let (jm, dm) = (nlev + 4, nlev + 3);
        let c = c_series(jm);
        let b = b_series(dm);
        let (bs, cs) = (Series2::from_mu(&b), Series2::from_lambda(&c));
        let lhs = bs.mul(&s2_dx(ring, &cs));
        let y = bs.mul(&s2_dx(ring, &cs)).sub(&cs.mul(&s2_dx(ring, &bs)));
        let (b1, y1) = (s2_dx(ring, &bs), s2_dx(ring, &y));
        let b2 = s2_dx(ring, &b1);
        let bb = bs.mul(&bs);
        let dy = bb
            .mul(&s2_dx(ring, &y1))
            .sub(&bs.mul(&b1).mul(&y1))
            .add(&b1.mul(&b1).sub(&bs.mul(&b2)).mul(&y));
        let inv2 = Series2::from_mu(&b.mul(&b).invert(dm as i64)?);
        let rhs = y.sub(&dy.map(|p| &eps2() * p).scale(&q(1, 8))).mul(&inv2).div_mu_minus_lambda_neg();
        s2_zero(&lhs.sub(&rhs), (-12, -2), (-9, -1), 16)
    }));

    out.push(Check::timed("kdv/series/p-derivative", || {
        // P′ = b(μ)c(λ)′
        let (jm, dm) = (nlev + 4, nlev + 3);
        let c = c_series(jm);
        let b = b_series(dm);
        let p = p_series(ring, &c, &b, dm)?;
        let lhs = Series2::from_mu(&b).mul(&Series2::from_lambda(&lj_dx(ring, &c)));
        s2_zero(&s2_dx(ring, &p).sub(&lhs), (-12, -2), (-9, -1), 16)
    }));

    out.push(Check::timed("kdv/series/phi-two-variable", || {
        // the full (λ, μ) expansion reproduces the single-coefficient extraction
        let top = nlev.min(2);
        for ((kk, n), p) in phi_table(ring, top, top)? {
            let d = &p - &k.phi(kk, n);
            if !d.is_zero() {
                return Ok(Some(format!("Phi^{}_{}: {}", n, kk, d)));
            }
        }
        Ok(None)
    }));

    out.push(Check::timed("kdv/series/B_n", || {
        // B_n = (λ^n λ^{1/2} b(λ))_+ / Γ(n+3/2)·Γ(½)
        let b = b_series(nlev + 4);
        for n in 0..=nlev + 2 {
            let bp = b.shift(2 * n as i64 + 1).plus().scale(&(qi(1) / gamma_half_ratio(n as i64 + 1)));
            let d = bp.sub(&b_poly(n));
            if !d.is_zero() {
                return Ok(Some(format!("n = {}: {:?}", n, d.coeffs.iter().next())));
            }
        }
        Ok(None)
    }));

    out.push(check_zero_curvature(k, nlev + 1, nlev + 1));
    out.push(check_residue(k, nlev + 1, nlev + 1));
    out
}

/// ∂c_m/∂t_n − ∂B_n/∂τ_m = ½(B_n c_m′ − c_m B_n′) for m ≤ mmax, n ≤ nmax.
pub fn check_zero_curvature(k: &Kdv, mmax: usize, nmax: usize) -> Check {
    let ring = &*k.ring;
    Check::timed("kdv/series/zero-curvature", || {
        for m in 0..=mmax {
            for n in 0..=nmax {
                let cm = c_tail(m, m + 4);
                let bn = b_poly(n);
                let lhs = cm.map(|p| k.t_flow(n).apply(p)).sub(&bn.map(|p| k.tau_flow(m).apply(p)));
                let rhs = bn.mul(&lj_dx(ring, &cm)).sub(&cm.mul(&lj_dx(ring, &bn))).scale(&q(1, 2));
                if let Some(w) = lj_zero(&lhs.sub(&rhs), 2 * n as i64 - 2, 4)? {
                    return Ok(Some(format!("(m, n) = ({}, {}): {}", m, n, w)));
                }
            }
        }
        Ok(None)
    })
}

/// ∂σ_m/∂t_n read off as the λ⁻¹ residue of the zero-curvature right side.
pub fn check_residue(k: &Kdv, mmax: usize, nmax: usize) -> Check {
    let ring = &*k.ring;
    Check::timed("kdv/series/residue", || {
        for m in 0..=mmax {
            for n in 0..=nmax {
                let cm = c_tail(m, m + n + 4);
                let bn = b_poly(n);
                let r = bn.mul(&lj_dx(ring, &cm)).sub(&cm.mul(&lj_dx(ring, &bn))).res().scale(&q(-1, 2));
                let d = &k.t_flow(n).apply(&DiffPoly::sigma(0, m)) - &r;
                if !d.is_zero() {
                    return Ok(Some(format!("(m, n) = ({}, {}): {}", m, n, d)));
                }
            }
        }
        Ok(None)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold() {
        let k = Kdv::new(2);
        let bad: Vec<_> = check_identities(&k).into_iter().filter(|c| !c.passed()).collect();
        assert!(bad.is_empty(), "{:#?}", bad);
    }
}
