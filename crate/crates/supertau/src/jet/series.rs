use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::gen::Q;
use super::poly::DiffPoly;
use crate::JetError;

/// A truncated Laurent series Σ a_e λ^{e/2} with differential-polynomial
/// coefficients.
///
/// Exponents are stored doubled so that series carrying an overall λ^{-1/2}
/// (the `half` flag) live on odd keys. `valid_min` is the smallest doubled
/// exponent whose coefficient is known; `None` means the series is exact.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentJet {
    pub coeffs: BTreeMap<i64, DiffPoly>,
    pub half: bool,
    pub valid_min: Option<i64>,
}

fn vmax(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

impl LaurentJet {
    pub fn zero(half: bool) -> LaurentJet {
        LaurentJet { coeffs: BTreeMap::new(), half, valid_min: None }
    }

    /// The exact series p·λ^{e/2}.
    pub fn monomial(e: i64, p: DiffPoly) -> LaurentJet {
        let mut s = LaurentJet::zero(e.rem_euclid(2) == 1);
        s.set(e, p);
        s
    }

    pub fn constant(p: DiffPoly) -> LaurentJet {
        LaurentJet::monomial(0, p)
    }

    pub fn truncated(mut self, valid_min: i64) -> LaurentJet {
        self.valid_min = vmax(self.valid_min, Some(valid_min));
        self.trim();
        self
    }

    pub fn set(&mut self, e: i64, p: DiffPoly) {
        assert_eq!(e.rem_euclid(2) == 1, self.half, "exponent parity does not match the half shift");
        if p.is_zero() {
            self.coeffs.remove(&e);
        } else {
            self.coeffs.insert(e, p);
        }
    }

    fn trim(&mut self) {
        if let Some(v) = self.valid_min {
            self.coeffs.retain(|e, p| *e >= v && !p.is_zero());
        } else {
            self.coeffs.retain(|_, p| !p.is_zero());
        }
    }

    pub fn top(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    /// Coefficient of λ^{e/2}; panics when e lies below the truncation.
    pub fn coeff(&self, e: i64) -> DiffPoly {
        if let Some(v) = self.valid_min {
            assert!(e >= v, "coefficient {} requested below the truncation {}", e, v);
        }
        self.coeffs.get(&e).cloned().unwrap_or_default()
    }

    pub fn window(&self) -> (Option<i64>, Option<i64>) {
        (self.valid_min, self.top())
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> LaurentJet {
        let mut s = LaurentJet { coeffs: BTreeMap::new(), half: self.half, valid_min: self.valid_min };
        for (e, p) in &self.coeffs {
            s.set(*e, f(p));
        }
        s
    }

    pub fn scale(&self, c: &Q) -> LaurentJet {
        self.map(|p| p.scale(c))
    }

    /// Multiply by λ^{k/2}.
    pub fn shift(&self, k: i64) -> LaurentJet {
        LaurentJet {
            coeffs: self.coeffs.iter().map(|(e, p)| (e + k, p.clone())).collect(),
            half: self.half ^ (k.rem_euclid(2) == 1),
            valid_min: self.valid_min.map(|v| v + k),
        }
    }

    pub fn add(&self, o: &LaurentJet) -> LaurentJet {
        assert_eq!(self.half, o.half, "adding series with different half shifts");
        let mut s = self.clone();
        s.valid_min = vmax(self.valid_min, o.valid_min);
        for (e, p) in &o.coeffs {
            let mut c = s.coeffs.remove(e).unwrap_or_default();
            c += p;
            s.coeffs.insert(*e, c);
        }
        s.trim();
        s
    }

    pub fn sub(&self, o: &LaurentJet) -> LaurentJet {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn mul(&self, o: &LaurentJet) -> LaurentJet {
        let valid = match (self.top(), o.top()) {
            (Some(ta), Some(tb)) => vmax(self.valid_min.map(|v| v + tb), o.valid_min.map(|v| v + ta)),
            _ => vmax(self.valid_min, o.valid_min),
        };
        let mut s = LaurentJet { coeffs: BTreeMap::new(), half: self.half ^ o.half, valid_min: valid };
        for (ea, pa) in &self.coeffs {
            for (eb, pb) in &o.coeffs {
                let e = ea + eb;
                if valid.is_none_or(|v| e >= v) {
                    let c = s.coeffs.entry(e).or_default();
                    *c += &(pa * pb);
                }
            }
        }
        s.trim();
        s
    }

    /// Non-negative part: exponents λ^{e/2} with e ≥ 0.
    pub fn plus(&self) -> LaurentJet {
        let mut s = self.clone();
        s.coeffs.retain(|e, _| *e >= 0);
        if s.valid_min.is_some_and(|v| v <= 0) {
            s.valid_min = None;
        }
        s
    }

    /// Negative part: exponents e < 0.
    pub fn minus(&self) -> LaurentJet {
        let mut s = self.clone();
        s.coeffs.retain(|e, _| *e < 0);
        s
    }

    /// (plus, minus) with plus + minus = self.
    pub fn split(&self) -> (LaurentJet, LaurentJet) {
        (self.plus(), self.minus())
    }

    /// Coefficient of λ^{-1}.
    pub fn res(&self) -> DiffPoly {
        assert!(!self.half, "residue of a half-shifted series");
        self.coeff(-2)
    }

    /// Multiplicative inverse, expanded `depth` steps below the leading term.
    pub fn invert(&self, depth: i64) -> Result<LaurentJet, JetError> {
        let t = self.top().ok_or_else(|| JetError::NotInvertible("zero series".into()))?;
        let lead = self.coeffs[&t].clone();
        let c = match lead.as_constant() {
            Some(c) if !c.is_zero() => c,
            _ => return Err(JetError::NotInvertible(format!("leading coefficient {}", lead))),
        };
        let mut depth = depth;
        if let Some(v) = self.valid_min {
            depth = depth.min((t - v) / 2);
        }
        let inv_c = Q::one() / c;
        let mut out = LaurentJet::zero(self.half);
        let mut b: Vec<DiffPoly> = vec![DiffPoly::constant(inv_c.clone())];
        for i in 1..=depth {
            let mut acc = DiffPoly::zero();
            for j in 1..=i {
                if let Some(a) = self.coeffs.get(&(t - 2 * j)) {
                    acc += &(a * &b[(i - j) as usize]);
                }
            }
            b.push(acc.scale(&-inv_c.clone()));
        }
        for (i, p) in b.into_iter().enumerate() {
            out.set(-t - 2 * i as i64, p);
        }
        out.valid_min = Some(-t - 2 * depth);
        Ok(out)
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|p| p.is_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::gen::qi;

    #[test]
    fn split_and_geometric_inverse() {
        let l = |e, c| LaurentJet::monomial(e, DiffPoly::int(c));
        let s = l(2, 1).add(&l(-2, 1));
        let (p, m) = s.split();
        assert_eq!(p, l(2, 1));
        assert_eq!(m, l(-2, 1));
        let u = DiffPoly::jet(0, 0);
        let x = l(0, 1).sub(&LaurentJet::monomial(-2, u.clone()));
        let inv = x.invert(3).unwrap();
        assert_eq!(inv.coeff(-6), u.pow(3));
        let prod = x.mul(&inv);
        assert_eq!(prod.coeff(0), DiffPoly::one());
        assert!(prod.coeffs.keys().all(|e| *e == 0));
        let bad = LaurentJet::monomial(0, u).add(&l(-2, 1));
        assert!(bad.invert(2).is_err());
        assert_eq!(l(0, 2).scale(&qi(2)).coeff(0), DiffPoly::int(4));
    }
}
