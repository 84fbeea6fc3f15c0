use std::collections::BTreeMap;
use std::sync::RwLock;

use num_traits::Zero;

use super::spec::FrobeniusSpec;
use crate::jet::{integrate_field, DiffPoly, Q};
use crate::Error;

/// h_{α,p} for p ≤ pmax, stored as `h[α][p]`.
#[derive(Clone, Debug)]
pub struct HTable {
    pub h: Vec<Vec<DiffPoly>>,
    /// Integration constants left undetermined by the conditions and set to zero.
    pub gauge: Vec<String>,
}

impl HTable {
    pub fn pmax(&self) -> usize {
        self.h.iter().map(|r| r.len()).min().unwrap_or(0).saturating_sub(1)
    }

    pub fn get(&self, a: usize, p: usize) -> &DiffPoly {
        self.h[a].get(p).unwrap_or_else(|| panic!("truncation too small: h_{{{},{}}} was not computed", a + 1, p))
    }
}

/// A potential φ with ∂_β φ = m[β] and no constant term.
pub fn potential_of(m: &[DiffPoly]) -> Result<DiffPoly, Error> {
    let mut phi = DiffPoly::zero();
    for (b, mb) in m.iter().enumerate() {
        let r = mb - &phi.d_field(b);
        if let Some(j) = (0..b).find(|&j| !r.d_field(j).is_zero()) {
            return Err(Error::Solve(format!("one-form is not closed in directions {} and {}", j + 1, b + 1)));
        }
        phi += &integrate_field(&r, b);
    }
    Ok(phi.without_constant())
}

fn q_int(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Solve the recursion, initial, homogeneity and normalisation conditions level
/// by level; a spec carrying an h-table is verified instead.
pub fn compute_h(spec: &FrobeniusSpec, pmax: usize) -> Result<HTable, Error> {
    if let Some(t) = &spec.h_table {
        if t.iter().all(|r| r.len() > pmax) {
            let table = HTable { h: t.iter().map(|r| r[..=pmax].to_vec()).collect(), gauge: vec![] };
            if let Some((name, res)) = verify_h(spec, &table).into_iter().find_map(|(n, r)| r.map(|r| (n, r))) {
                return Err(Error::Validation(format!("supplied h-table violates {}: {}", name, res)));
            }
            return Ok(table);
        }
    }
    let n = spec.n;
    let mut h: Vec<Vec<DiffPoly>> = (0..n)
        .map(|a| vec![(0..n).fold(DiffPoly::zero(), |acc, g| &acc + &DiffPoly::jet(g, 0).scale(&spec.eta[a][g]))])
        .collect();
    let mut gauge = Vec::new();
    for lvl in 1..=pmax {
        for a in 0..n {
            let prev = h[a][lvl - 1].clone();
            let grad: Vec<DiffPoly> = (0..n).map(|l| prev.d_field(l)).collect();
            let mut y = Vec::with_capacity(n);
            for b in 0..n {
                if b == 0 {
                    y.push(prev.clone());
                    continue;
                }
                let m: Vec<DiffPoly> = (0..n)
                    .map(|g| (0..n).fold(DiffPoly::zero(), |acc, l| &acc + &(&spec.c_up[l][g][b] * &grad[l])))
                    .collect();
                let y0 = potential_of(&m)?;
                let k = q_int(lvl as i64) + &spec.mu[a] + &spec.mu[b];
                let mut res = &spec.euler_apply(&y0) - &y0.scale(&k);
                for (j, rj) in spec.r.iter().enumerate().take(lvl) {
                    for (g, row) in rj.iter().enumerate() {
                        if !row[a].is_zero() {
                            res -= &h[g][lvl - 1 - j].d_field(b).scale(&row[a]);
                        }
                    }
                }
                let r = res
                    .as_constant()
                    .ok_or_else(|| Error::Solve(format!("homogeneity of d_{} h_{{{},{}}} leaves {}", b + 1, a + 1, lvl, res)))?;
                let c = if k.is_zero() {
                    if !r.is_zero() {
                        return Err(Error::Solve(format!("inconsistent homogeneity for d_{} h_{{{},{}}}", b + 1, a + 1, lvl)));
                    }
                    gauge.push(format!("d_{} h_{{{},{}}}: constant set to zero", b + 1, a + 1, lvl));
                    Q::zero()
                } else {
                    r / &k
                };
                y.push(&y0 + &DiffPoly::constant(c));
            }
            let hp = potential_of(&y)?;
            h[a].push(hp);
        }
    }
    let table = HTable { h, gauge };
    if let Some((name, res)) = verify_h(spec, &table).into_iter().find_map(|(n, r)| r.map(|r| (n, r))) {
        return Err(Error::Solve(format!("solution violates {}: {}", name, res)));
    }
    Ok(table)
}

fn inner(spec: &FrobeniusSpec, x: &[DiffPoly], y: &[DiffPoly]) -> DiffPoly {
    let mut s = DiffPoly::zero();
    for (g, xg) in x.iter().enumerate() {
        for (d, yd) in y.iter().enumerate() {
            let e = &spec.eta_inv[g][d];
            if !e.is_zero() && !xg.is_zero() && !yd.is_zero() {
                s += &(xg * yd).scale(e);
            }
        }
    }
    s
}

fn grad(spec: &FrobeniusSpec, p: &DiffPoly) -> Vec<DiffPoly> {
    (0..spec.n).map(|a| p.d_field(a)).collect()
}

/// The defining conditions of the h-table, each with its first residue.
pub fn verify_h(spec: &FrobeniusSpec, t: &HTable) -> Vec<(String, Option<String>)> {
    let n = spec.n;
    let pmax = t.pmax();
    let mut out = Vec::new();
    let mut ini = None;
    for a in 0..n {
        let want = (0..n).fold(DiffPoly::zero(), |acc, g| &acc + &DiffPoly::jet(g, 0).scale(&spec.eta[a][g]));
        if t.h[a][0] != want {
            ini = Some(format!("h_{{{},0}} = {}", a + 1, t.h[a][0]));
        }
        for p in 0..pmax {
            if ini.is_none() && t.h[a][p + 1].d_field(0) != t.h[a][p] {
                ini = Some(format!("d_1 h_{{{},{}}} != h_{{{},{}}}", a + 1, p + 1, a + 1, p));
            }
        }
    }
    out.push(("hamil-ini".to_string(), ini));
    let mut rec = None;
    'rec: for g in 0..n {
        for p in 0..pmax {
            let gr = grad(spec, &t.h[g][p]);
            for a in 0..n {
                for b in 0..n {
                    let lhs = t.h[g][p + 1].d_field(a).d_field(b);
                    let rhs = (0..n).fold(DiffPoly::zero(), |acc, l| &acc + &(&spec.c_up[l][a][b] * &gr[l]));
                    if lhs != rhs {
                        rec = Some(format!("({},{}) at h_{{{},{}}}: {}", a + 1, b + 1, g + 1, p + 1, &lhs - &rhs));
                        break 'rec;
                    }
                }
            }
        }
    }
    out.push(("hamil-rec".to_string(), rec));
    let mut hom = None;
    'hom: for a in 0..n {
        for p in 0..=pmax {
            for b in 0..n {
                let d = t.h[a][p].d_field(b);
                let mut r = &spec.euler_apply(&d) - &d.scale(&(q_int(p as i64) + &spec.mu[a] + &spec.mu[b]));
                for (k, rk) in spec.r.iter().enumerate().take(p) {
                    for (g, row) in rk.iter().enumerate() {
                        if !row[a].is_zero() {
                            r -= &t.h[g][p - 1 - k].d_field(b).scale(&row[a]);
                        }
                    }
                }
                if !r.is_zero() {
                    hom = Some(format!("d_{} h_{{{},{}}}: {}", b + 1, a + 1, p, r));
                    break 'hom;
                }
            }
        }
    }
    out.push(("homog".to_string(), hom));
    let mut norm = None;
    'norm: for a in 0..n {
        for b in 0..n {
            for big in 1..=pmax {
                let mut s = DiffPoly::zero();
                for p in 0..=big {
                    let term = inner(spec, &grad(spec, &t.h[a][p]), &grad(spec, &t.h[b][big - p]));
                    if (big - p) % 2 == 1 {
                        s -= &term;
                    } else {
                        s += &term;
                    }
                }
                if !s.is_zero() {
                    norm = Some(format!("({},{}) at order {}: {}", a + 1, b + 1, big, s));
                    break 'norm;
                }
            }
        }
    }
    out.push(("norm".to_string(), norm));
    out
}

/// Two-point functions Ω_{α,p;β,q}, computed on demand from the h-table.
pub struct OmegaTable {
    cache: RwLock<BTreeMap<(usize, usize, usize, usize), DiffPoly>>,
}

impl Default for OmegaTable {
    fn default() -> Self {
        OmegaTable { cache: RwLock::new(BTreeMap::new()) }
    }
}

impl OmegaTable {
    /// ⟨∇h_{α,p}, ∇h_{β,q}⟩ − δ_{p0}δ_{q0}η_{αβ}
    fn numer(spec: &FrobeniusSpec, h: &HTable, a: usize, p: usize, b: usize, q: usize) -> DiffPoly {
        let mut s = inner(spec, &grad(spec, h.get(a, p)), &grad(spec, h.get(b, q)));
        if p == 0 && q == 0 {
            s -= &DiffPoly::constant(spec.eta[a][b].clone());
        }
        s
    }

    pub fn get(&self, spec: &FrobeniusSpec, h: &HTable, a: usize, p: usize, b: usize, q: usize) -> DiffPoly {
        if let Some(x) = self.cache.read().unwrap().get(&(a, p, b, q)) {
            return x.clone();
        }
        let mut s = DiffPoly::zero();
        for j in 0..=q {
            let t = OmegaTable::numer(spec, h, a, p + 1 + j, b, q - j);
            if j % 2 == 1 {
                s -= &t;
            } else {
                s += &t;
            }
        }
        self.cache.write().unwrap().insert((a, p, b, q), s.clone());
        s
    }

    /// Exact divisibility of the generating numerator by z₁ + z₂ up to total order `top`.
    pub fn check_divisible(spec: &FrobeniusSpec, h: &HTable, top: usize) -> Result<(), Error> {
        for a in 0..spec.n {
            for b in 0..spec.n {
                for big in 0..=top {
                    let mut s = DiffPoly::zero();
                    for i in 0..=big {
                        let t = OmegaTable::numer(spec, h, a, i, b, big - i);
                        if i % 2 == 1 {
                            s -= &t;
                        } else {
                            s += &t;
                        }
                    }
                    if !s.is_zero() {
                        return Err(Error::Divisibility(format!("({},{}) at order {}: {}", a + 1, b + 1, big, s)));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::spec::builtin;
    use crate::jet::gen::factorial as factorial_q;
    use num_traits::One;

    fn one() -> Q {
        Q::one()
    }

    #[test]
    fn onedim_h_is_exponential_series() {
        let s = builtin("onedim").unwrap();
        let t = compute_h(&s, 5).unwrap();
        for p in 0..=5 {
            let want = DiffPoly::jet(0, 0).pow(p as u32 + 1).scale(&(one() / factorial_q(p as u64 + 1)));
            assert_eq!(t.h[0][p], want);
        }
        let om = OmegaTable::default();
        assert_eq!(om.get(&s, &t, 0, 0, 0, 0), DiffPoly::jet(0, 0));
        // Ω_{k,n} = u^{k+n+1}/((k+n+1) k! n!)
        let w = om.get(&s, &t, 0, 1, 0, 2);
        assert_eq!(w, DiffPoly::jet(0, 0).pow(4).scale(&(one() / (q_int(4) * q_int(2)))));
        OmegaTable::check_divisible(&s, &t, 4).unwrap();
    }
}

#[cfg(test)]
mod cp1 {
    use super::*;
    use crate::frobenius::spec::builtin;
    use crate::jet::fmt::from_json;

    #[test]
    fn solver_reproduces_printed_table() {
        let s = builtin("cp1").unwrap();
        let t = compute_h(&s, 4).unwrap();
        let gold: serde_json::Value = serde_json::from_str(include_str!("../../tests/golden/cp1_h.json")).unwrap();
        for e in gold.as_array().unwrap() {
            let a = e["alpha"].as_u64().unwrap() as usize - 1;
            let p = e["p"].as_u64().unwrap() as usize;
            assert_eq!(t.h[a][p], from_json(&e["h"]).unwrap(), "h_{{{},{}}}", a + 1, p);
        }
        assert!(verify_h(&s, &t).iter().all(|(_, r)| r.is_none()));
        OmegaTable::check_divisible(&s, &t, 4).unwrap();
        let om = OmegaTable::default();
        for (a, b) in [(0, 0), (0, 1), (1, 1)] {
            for p in 0..2 {
                for q in 0..2 {
                    assert_eq!(om.get(&s, &t, a, p, b, q), om.get(&s, &t, b, q, a, p));
                }
            }
        }
        assert_eq!(om.get(&s, &t, 1, 2, 0, 0), t.h[1][2]);
    }
}
