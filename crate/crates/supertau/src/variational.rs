//! Local functionals, variational derivatives, the Schouten bracket and the
//! flows D_P of multivector functionals.

use std::sync::Arc;

use num_traits::One;

pub use crate::jet::euler;
use crate::jet::{antiderivative, dx_free, DiffPoly, Flow, Gen, Q, Ring};
use crate::report::Check;
use crate::Error;

/// A local functional ∫f of uniform odd degree.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFunctional {
    pub density: DiffPoly,
    pub degree: usize,
    /// Number of fields.
    pub n: usize,
}

fn check_free(p: &DiffPoly) -> Result<(), Error> {
    if let Some(g) = p.gens().find(|g| !g.is_free_jet()) {
        return Err(Error::Unsupported(format!("generator {:?} outside the free jet algebra", g)));
    }
    Ok(())
}

impl LocalFunctional {
    pub fn new(density: DiffPoly, n: usize) -> Result<LocalFunctional, Error> {
        check_free(&density)?;
        let degs = density.odd_degrees();
        if degs.len() > 1 {
            return Err(Error::Validation(format!("density mixes odd degrees {:?}", degs)));
        }
        let degree = degs.first().copied().unwrap_or(0);
        Ok(LocalFunctional { density, degree, n })
    }

    /// A functional of prescribed degree; the zero density is accepted at any degree.
    pub fn with_degree(density: DiffPoly, n: usize, degree: usize) -> Result<LocalFunctional, Error> {
        let mut f = LocalFunctional::new(density, n)?;
        if !f.density.is_zero() && f.degree != degree {
            return Err(Error::Validation(format!("expected odd degree {}, found {}", degree, f.degree)));
        }
        f.degree = degree;
        Ok(f)
    }

    pub fn delta_u(&self, a: usize) -> DiffPoly {
        euler(&self.density, Gen::jet(a, 0))
    }

    pub fn delta_theta(&self, a: usize) -> DiffPoly {
        euler(&self.density, Gen::theta(a, 0))
    }

    /// Equality of functionals: every variational derivative of the difference
    /// vanishes and no generator-free term survives.
    pub fn equals(&self, o: &LocalFunctional) -> bool {
        let d = &self.density - &o.density;
        is_trivial(&d, self.n.max(o.n))
    }

    pub fn is_zero(&self) -> bool {
        is_trivial(&self.density, self.n)
    }
}

fn is_trivial(d: &DiffPoly, n: usize) -> bool {
    d.constant_term() == Q::from_integer(0.into())
        && (0..n).all(|a| euler(d, Gen::jet(a, 0)).is_zero() && euler(d, Gen::theta(a, 0)).is_zero())
}

/// Variational derivative by u^a (even) or θ_a (odd).
pub fn variational_derivative(f: &LocalFunctional, odd: bool, a: usize) -> Result<DiffPoly, Error> {
    check_free(&f.density)?;
    Ok(if odd { f.delta_theta(a) } else { f.delta_u(a) })
}

/// Membership in the image of ∂, with a witness.
pub fn is_total_derivative(p: &DiffPoly) -> Result<Option<DiffPoly>, Error> {
    check_free(p)?;
    Ok(antiderivative(p).ok())
}

/// [P, Q] = ∫(δP/δθ_α δQ/δu^α + (−1)^p δP/δu^α δQ/δθ_α).
pub fn schouten_bracket(p: &LocalFunctional, q: &LocalFunctional) -> Result<LocalFunctional, Error> {
    check_free(&p.density)?;
    check_free(&q.density)?;
    let n = p.n.max(q.n);
    let mut d = DiffPoly::zero();
    for a in 0..n {
        d += &(&p.delta_theta(a) * &q.delta_u(a));
        let t = &p.delta_u(a) * &q.delta_theta(a);
        if p.degree % 2 == 1 {
            d -= &t;
        } else {
            d += &t;
        }
    }
    let degree = (p.degree + q.degree).saturating_sub(1);
    LocalFunctional::with_degree(d, n, degree)
}

/// The vector field D_P: ∂u^α/∂t_P = δP/δθ_α, ∂θ_α/∂t_P = (−1)^p δP/δu^α.
pub fn dp_flow(p: &LocalFunctional, name: &str) -> Result<Flow, Error> {
    check_free(&p.density)?;
    if p.degree == 0 {
        return Err(Error::Validation("D_P needs a functional of positive odd degree".into()));
    }
    let n = p.n;
    let du: Vec<DiffPoly> = (0..n).map(|a| p.delta_u(a)).collect();
    let dt: Vec<DiffPoly> = (0..n).map(|a| p.delta_theta(a)).collect();
    let sign = if p.degree % 2 == 1 { -Q::one() } else { Q::one() };
    let ring = Arc::new(Ring::free(n));
    Ok(Flow::new(name, p.degree.is_multiple_of(2), ring, move |g| match *g {
        Gen::Jet { a, s: 0 } => Some(dt[a as usize].clone()),
        Gen::Sigma { k: 0, a, s: 0 } => Some(du[a as usize].scale(&sign)),
        _ => None,
    }))
}

/// An n×n matrix differential operator with entries Σ_s A_s ∂^s.
#[derive(Clone, Debug)]
pub struct DiffOperator {
    pub entries: Vec<Vec<Vec<DiffPoly>>>,
}

impl DiffOperator {
    pub fn scalar(coeffs: Vec<DiffPoly>) -> DiffOperator {
        DiffOperator { entries: vec![vec![coeffs]] }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }
}

pub fn apply_operator(d: &DiffOperator, w: &[DiffPoly]) -> Result<Vec<DiffPoly>, Error> {
    if d.entries.iter().any(|r| r.len() != w.len()) || d.dim() != w.len() {
        return Err(Error::Validation(format!("operator of size {} applied to a vector of length {}", d.dim(), w.len())));
    }
    let mut out = vec![DiffPoly::zero(); w.len()];
    for (a, row) in d.entries.iter().enumerate() {
        for (b, coeffs) in row.iter().enumerate() {
            let mut wd = w[b].clone();
            for (s, c) in coeffs.iter().enumerate() {
                if s > 0 {
                    wd = dx_free(&wd);
                }
                if !c.is_zero() {
                    out[a] += &(c * &wd);
                }
            }
        }
    }
    Ok(out)
}

/// Check a bracket result against zero, recording the density of any residue.
fn bracket_check(id: &str, p: &LocalFunctional, q: &LocalFunctional) -> Check {
    Check::timed(id, || {
        let b = schouten_bracket(p, q)?;
        if b.is_zero() {
            Ok(None)
        } else {
            Ok(Some(crate::jet::fmt::to_text(&b.density)))
        }
    })
}

/// [P₀,P₀], [P₀,P₁], [P₁,P₁] all vanish.
pub fn check_poisson_pair(prefix: &str, p0: &LocalFunctional, p1: &LocalFunctional) -> Vec<Check> {
    vec![
        bracket_check(&format!("{}/[P0,P0]", prefix), p0, p0),
        bracket_check(&format!("{}/[P0,P1]", prefix), p0, p1),
        bracket_check(&format!("{}/[P1,P1]", prefix), p1, p1),
    ]
}

/// P₀ = ½∫θθ¹ and P₁ = ½∫(uθθ¹ + ε²/8 θθ³) of the KdV hierarchy.
pub fn kdv_pair() -> (LocalFunctional, LocalFunctional) {
    let th = |s| DiffPoly::theta(0, s);
    let half = crate::jet::q(1, 2);
    let p0 = (&th(0) * &th(1)).scale(&half);
    let p1 = &(&DiffPoly::jet(0, 0) * &(&th(0) * &th(1))) + &(&DiffPoly::eps_pow(2) * &(&th(0) * &th(3))).scale(&crate::jet::q(1, 8));
    (LocalFunctional::new(p0, 1).unwrap(), LocalFunctional::new(p1.scale(&half), 1).unwrap())
}

/// The KdV Hamiltonian operators 𝒫₀ = ∂ and 𝒫₁ = u∂ + ½u′ + ε²/8 ∂³.
pub fn kdv_operators() -> (DiffOperator, DiffOperator) {
    let p0 = DiffOperator::scalar(vec![DiffPoly::zero(), DiffPoly::one()]);
    let p1 = DiffOperator::scalar(vec![
        DiffPoly::jet(0, 1).scale(&crate::jet::q(1, 2)),
        DiffPoly::jet(0, 0),
        DiffPoly::zero(),
        DiffPoly::eps_pow(2).scale(&crate::jet::q(1, 8)),
    ]);
    (p0, p1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::{q, qi};

    fn u(s: usize) -> DiffPoly {
        DiffPoly::jet(0, s)
    }
    fn th(s: usize) -> DiffPoly {
        DiffPoly::theta(0, s)
    }

    #[test]
    fn euler_operator_examples() {
        // δ/δu ∫(½u² + ε²/12 u_xx) = u
        let h0 = &(&u(0) * &u(0)).scale(&q(1, 2)) + &(&DiffPoly::eps_pow(2) * &u(2)).scale(&q(1, 12));
        let f = LocalFunctional::new(h0, 1).unwrap();
        assert_eq!(f.delta_u(0), u(0));
        let g = LocalFunctional::new(&u(0) * &u(2), 1).unwrap();
        assert_eq!(g.delta_u(0), u(2).scale_i(2));
        let p0 = LocalFunctional::new((&th(0) * &th(1)).scale(&q(1, 2)), 1).unwrap();
        assert_eq!(p0.delta_theta(0), th(1));
        let tot = LocalFunctional::new(dx_free(&u(0).pow(3)), 1).unwrap();
        assert!(tot.delta_u(0).is_zero());
    }

    #[test]
    fn kdv_operators_apply() {
        let (p0, p1) = kdv_operators();
        assert_eq!(apply_operator(&p0, &[u(0)]).unwrap()[0], u(1));
        assert_eq!(apply_operator(&p1, &[DiffPoly::one()]).unwrap()[0], u(1).scale(&q(1, 2)));
        let want = &(&u(0) * &u(1)).scale(&q(3, 2)) + &(&DiffPoly::eps_pow(2) * &u(3)).scale(&q(1, 8));
        assert_eq!(apply_operator(&p1, &[u(0)]).unwrap()[0], want);
        assert!(apply_operator(&p1, &[u(0), u(1)]).is_err());
    }

    #[test]
    fn kdv_pair_is_poisson() {
        let (p0, p1) = kdv_pair();
        for c in check_poisson_pair("kdv", &p0, &p1) {
            assert!(c.passed(), "{:?}", c);
        }
        // D_{P1}(θ) = ½θθ¹ at ε = 0 and D_{P0}(θ) = 0
        let f1 = dp_flow(&p1, "P1").unwrap();
        assert_eq!(f1.apply_gen(Gen::theta(0, 0)), (&th(0) * &th(1)).scale(&q(1, 2)).scale(&qi(1)));
        let f0 = dp_flow(&p0, "P0").unwrap();
        assert!(f0.apply_gen(Gen::theta(0, 0)).is_zero());
        assert_eq!(f0.apply_gen(Gen::jet(0, 0)), th(1));
        assert!(LocalFunctional::new(&th(0) + &(&th(0) * &th(1)), 1).is_err());
    }

    #[test]
    fn total_derivative_membership() {
        assert_eq!(is_total_derivative(&(&u(0) * &u(1))).unwrap(), Some((&u(0) * &u(0)).scale(&q(1, 2))));
        assert_eq!(is_total_derivative(&u(0)).unwrap(), None);
        assert_eq!(is_total_derivative(&(&th(0) * &th(2))).unwrap(), Some(&th(0) * &th(1)));
    }
}
