use std::sync::Arc;

use num_traits::{One, Zero};

use super::gen::{q_from_exp, qi, Gen, Q};
use super::mono::Mono;
use super::poly::DiffPoly;
use super::ring::apply_derivation;
use crate::JetError;

/// x-derivative on the free subalgebra (jets, θ-jets, exponentials); every
/// other generator is treated as a constant.
pub fn dx_free(p: &DiffPoly) -> DiffPoly {
    apply_derivation(p, false, &|g| match g.raised() {
        Some(h) => Arc::new(DiffPoly::gen(h)),
        None => Arc::new(DiffPoly::zero()),
    })
}

/// ∫ A dv^a: a polynomial Ã with ∂Ã/∂v^a = A, where the exponential factors
/// exp(q·v^a) are integrated together with the powers of v^a.
pub fn integrate_field(p: &DiffPoly, a: usize) -> DiffPoly {
    integrate_var(p, &Gen::jet(a, 0), Some(a))
}

fn integrate_var(p: &DiffPoly, y: &Gen, exp_field: Option<usize>) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for (m, c) in &p.terms {
        let j = m.power_of(y);
        let q = exp_field.and_then(|a| m.exp_of(a as u8));
        let mut base = m.clone();
        base.even.retain(|(g, _)| g != y);
        match q {
            None => {
                base.times_even(*y, j + 1);
                out.add_term(base, c / qi(j as i64 + 1));
            }
            Some(e) => {
                // ∫ y^j e^{qy} dy = e^{qy} Σ_i (-1)^i j!/(j-i)! y^{j-i} / q^{i+1}
                let qq = q_from_exp(e);
                let mut fall = Q::one();
                let mut qpow = qq.clone();
                for i in 0..=j {
                    let mut n = base.clone();
                    n.times_even(*y, j - i);
                    let sign = if i % 2 == 0 { Q::one() } else { -Q::one() };
                    out.add_term(n, c * &sign * &fall / &qpow);
                    fall *= qi((j - i) as i64);
                    qpow *= &qq;
                }
            }
        }
    }
    out
}

fn jet_order(g: &Gen) -> Option<usize> {
    g.order()
}

/// Inverse of the total x-derivative on the free subalgebra, with zero
/// integration constant.
pub fn antiderivative(p: &DiffPoly) -> Result<DiffPoly, JetError> {
    if p.contains_gen(|g| !(g.is_free_jet() || g.is_x_constant())) {
        return Err(JetError::Unsupported(format!("{}", p)));
    }
    // the reduction below need not terminate on inexact input
    let nf = p.gens().filter_map(|g| g.max_field()).max().map_or(0, |a| a + 1);
    let inexact = (0..nf).any(|a| !euler(p, Gen::jet(a, 0)).is_zero() || !euler(p, Gen::theta(a, 0)).is_zero());
    if inexact || !p.constant_term().is_zero() {
        return Err(JetError::NotATotalDerivative(format!("{}", p)));
    }
    let mut rest = p.clone();
    let mut acc = DiffPoly::zero();
    while !rest.is_zero() {
        let top = rest
            .gens()
            .filter(|g| jet_order(g).is_some_and(|s| s > 0))
            .max_by_key(|g| (jet_order(g).unwrap(), *g));
        let w = match top {
            Some(w) => w,
            None => return Err(JetError::NotATotalDerivative(format!("{}", rest))),
        };
        let k = jet_order(&w).unwrap();
        let y = w.lowered().unwrap();
        // rest = w·A + B with A the (left) derivative by w
        let coeff = rest.partial(&w);
        if coeff.contains_gen(|g| jet_order(g) == Some(k)) {
            return Err(JetError::NotATotalDerivative(format!("{}", rest)));
        }
        let piece = if w.is_odd() {
            if coeff.contains_gen(|g| *g == y) {
                return Err(JetError::NotATotalDerivative(format!("{}", rest)));
            }
            &DiffPoly::gen(y) * &coeff
        } else {
            let ef = if k == 1 { match y { Gen::Jet { a, .. } => Some(a as usize), _ => None } } else { None };
            integrate_var(&coeff, &y, ef)
        };
        let d = dx_free(&piece);
        rest -= &d;
        acc += piece;
        debug_assert!(!rest.contains_gen(|g| *g == w));
    }
    Ok(acc)
}

/// Σ_s (−∂)^s ∂p/∂g^{(s)} for the jet family starting at `g0`.
pub fn euler(p: &DiffPoly, g0: Gen) -> DiffPoly {
    let top = p.gens().filter(|g| g.max_field() == g0.max_field() && g.is_odd() == g0.is_odd()).filter_map(|g| g.order()).max();
    let top = match top {
        Some(t) => t,
        None => {
            // only the exponential chain rule can contribute
            return if g0.is_odd() { DiffPoly::zero() } else { p.partial(&g0) };
        }
    };
    let mut out = DiffPoly::zero();
    let mut g = g0;
    for s in 0..=top {
        let mut d = p.partial(&g);
        for _ in 0..s {
            d = dx_free(&d);
        }
        if s % 2 == 1 {
            out -= &d;
        } else {
            out += &d;
        }
        g = g.raised().unwrap();
    }
    out
}

/// Membership test for the image of the x-derivative, with a witness.
pub fn is_total_derivative(p: &DiffPoly) -> Option<DiffPoly> {
    antiderivative(p).ok()
}

/// The polynomial without its generator-free part.
pub fn drop_constant(p: &DiffPoly) -> DiffPoly {
    let mut q = p.clone();
    q.terms.remove(&Mono::one());
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::gen::{q, ExpQ};

    fn u(s: usize) -> DiffPoly {
        DiffPoly::jet(0, s)
    }

    #[test]
    fn simple_antiderivatives() {
        let p = &u(0) * &u(1);
        assert_eq!(antiderivative(&p).unwrap(), (&u(0) * &u(0)).scale(&q(1, 2)));
        assert!(matches!(antiderivative(&u(0)), Err(JetError::NotATotalDerivative(_))));
        let t = |s| DiffPoly::theta(0, s);
        let w = antiderivative(&(&t(0) * &t(2))).unwrap();
        assert_eq!(w, &t(0) * &t(1));
        assert!(antiderivative(&(&t(1) * &t(2))).is_err());
    }

    #[test]
    fn exp_integration() {
        let e = DiffPoly::exp(0, ExpQ::new(1, 1));
        let v = DiffPoly::jet(0, 0);
        let p = &(&v * &v) * &e;
        let i = integrate_field(&p, 0);
        assert_eq!(i.d_field(0), p);
        let tot = &(&p * &u(1)) + &DiffPoly::zero();
        let a = antiderivative(&tot).unwrap();
        assert_eq!(dx_free(&a), tot);
    }
}
