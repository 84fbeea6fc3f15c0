use std::collections::BTreeMap;

use num_traits::One;

use super::gen::Q;
use super::poly::DiffPoly;
use super::series::LaurentJet;

/// A truncated Laurent series in two spectral variables (λ, μ), exponents
/// doubled as in [`LaurentJet`].
///
/// A coefficient at (a, b) is known when a ≥ L, b ≥ M and a + b ≥ S, each
/// bound being absent when the series is exact in that direction.
#[derive(Clone, Debug, PartialEq)]
pub struct Series2 {
    pub coeffs: BTreeMap<(i64, i64), DiffPoly>,
    pub l: Option<i64>,
    pub m: Option<i64>,
    pub s: Option<i64>,
}

fn vmax(a: Option<i64>, b: Option<i64>) -> Option<i64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

fn add_opt(a: Option<i64>, t: Option<i64>) -> Option<i64> {
    match (a, t) {
        (Some(x), Some(y)) => Some(x + y),
        _ => None,
    }
}

impl Series2 {
    pub fn zero() -> Series2 {
        Series2 { coeffs: BTreeMap::new(), l: None, m: None, s: None }
    }

    /// Embed a series in λ.
    pub fn from_lambda(x: &LaurentJet) -> Series2 {
        Series2 {
            coeffs: x.coeffs.iter().map(|(e, p)| ((*e, 0), p.clone())).collect(),
            l: x.valid_min,
            m: None,
            s: None,
        }
    }

    /// Embed a series in μ.
    pub fn from_mu(x: &LaurentJet) -> Series2 {
        Series2 {
            coeffs: x.coeffs.iter().map(|(e, p)| ((0, *e), p.clone())).collect(),
            l: None,
            m: x.valid_min,
            s: None,
        }
    }

    pub fn known(&self, a: i64, b: i64) -> bool {
        self.l.is_none_or(|v| a >= v) && self.m.is_none_or(|v| b >= v) && self.s.is_none_or(|v| a + b >= v)
    }

    fn trim(&mut self) {
        let (l, m, s) = (self.l, self.m, self.s);
        self.coeffs.retain(|(a, b), p| {
            !p.is_zero() && l.is_none_or(|v| *a >= v) && m.is_none_or(|v| *b >= v) && s.is_none_or(|v| a + b >= v)
        });
    }

    fn tops(&self) -> (Option<i64>, Option<i64>, Option<i64>) {
        let t = self.coeffs.keys().map(|k| k.0).max();
        let u = self.coeffs.keys().map(|k| k.1).max();
        let v = self.coeffs.keys().map(|k| k.0 + k.1).max();
        (t, u, v)
    }

    pub fn map(&self, f: impl Fn(&DiffPoly) -> DiffPoly) -> Series2 {
        let mut r = self.clone();
        r.coeffs = self.coeffs.iter().map(|(k, p)| (*k, f(p))).collect();
        r.trim();
        r
    }

    pub fn scale(&self, c: &Q) -> Series2 {
        self.map(|p| p.scale(c))
    }

    /// Multiply by λ^{i/2} μ^{j/2}.
    pub fn shift(&self, i: i64, j: i64) -> Series2 {
        Series2 {
            coeffs: self.coeffs.iter().map(|((a, b), p)| ((a + i, b + j), p.clone())).collect(),
            l: self.l.map(|v| v + i),
            m: self.m.map(|v| v + j),
            s: self.s.map(|v| v + i + j),
        }
    }

    pub fn add(&self, o: &Series2) -> Series2 {
        let mut r = self.clone();
        r.l = vmax(self.l, o.l);
        r.m = vmax(self.m, o.m);
        r.s = vmax(self.s, o.s);
        for (k, p) in &o.coeffs {
            *r.coeffs.entry(*k).or_default() += p;
        }
        r.trim();
        r
    }

    pub fn sub(&self, o: &Series2) -> Series2 {
        self.add(&o.scale(&-Q::one()))
    }

    pub fn mul(&self, o: &Series2) -> Series2 {
        let (ta, ua, va) = self.tops();
        let (tb, ub, vb) = o.tops();
        let mut r = Series2 {
            coeffs: BTreeMap::new(),
            l: vmax(add_opt(self.l, tb), add_opt(o.l, ta)),
            m: vmax(add_opt(self.m, ub), add_opt(o.m, ua)),
            s: vmax(add_opt(self.s, vb), add_opt(o.s, va)),
        };
        if ta.is_none() || tb.is_none() {
            r.l = vmax(self.l, o.l);
            r.m = vmax(self.m, o.m);
            r.s = vmax(self.s, o.s);
            return r;
        }
        for ((a1, b1), p) in &self.coeffs {
            for ((a2, b2), q) in &o.coeffs {
                let (a, b) = (a1 + a2, b1 + b2);
                if r.known(a, b) {
                    *r.coeffs.entry((a, b)).or_default() += &(p * q);
                }
            }
        }
        r.trim();
        r
    }

    /// [X/(μ−λ)]: expand 1/(μ−λ) = Σ_i λ^i μ^{-i-1} and keep the negative λ part.
    pub fn div_mu_minus_lambda_neg(&self) -> Series2 {
        let (_, u, _) = self.tops();
        let u = match u {
            Some(u) => u,
            None => return Series2 { coeffs: BTreeMap::new(), l: None, m: self.m.map(|v| v - 2), s: None },
        };
        let m = self.m.map(|v| v - 2);
        let s = vmax(self.s.map(|v| v - 2), self.l.map(|l| u + l - 2));
        let mut r = Series2 { coeffs: BTreeMap::new(), l: None, m, s };
        for ((a, b), p) in &self.coeffs {
            // X_{a,b} contributes to (a + 2i, b - 2i - 2), i ≥ 0
            let mut i = 0;
            loop {
                let (na, nb) = (a + 2 * i, b - 2 * i - 2);
                if na >= 0 || !r.s.is_none_or(|v| na + nb >= v) {
                    break;
                }
                if r.known(na, nb) {
                    *r.coeffs.entry((na, nb)).or_default() += p;
                }
                i += 1;
            }
        }
        r.trim();
        r
    }

    /// True when every known coefficient vanishes.
    pub fn is_zero(&self) -> bool {
        self.coeffs.values().all(|p| p.is_zero())
    }

    pub fn coeff(&self, a: i64, b: i64) -> DiffPoly {
        assert!(self.known(a, b), "coefficient ({}, {}) lies outside the truncation", a, b);
        self.coeffs.get(&(a, b)).cloned().unwrap_or_default()
    }

    /// Known coefficient positions with a in [amin, amax] and b in [bmin, bmax].
    pub fn count_known(&self, amin: i64, amax: i64, bmin: i64, bmax: i64) -> usize {
        let mut n = 0;
        let mut a = amin;
        while a <= amax {
            let mut b = bmin;
            while b <= bmax {
                if self.known(a, b) {
                    n += 1;
                }
                b += 1;
            }
            a += 1;
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_expansion() {
        // X = μ^{-1}: X/(μ-λ) = Σ λ^i μ^{-i-2}, whose negative λ part is empty.
        let x = Series2::from_mu(&LaurentJet::monomial(-2, DiffPoly::one()).truncated(-2)).add(&Series2 {
            coeffs: BTreeMap::new(),
            l: Some(-6),
            m: None,
            s: None,
        });
        let e = x.div_mu_minus_lambda_neg();
        assert!(e.is_zero());
        // X = λ^{-3}: contributes λ^{-3+i} μ^{-i-1} for i = 0, 1, 2.
        let y = Series2::from_lambda(&LaurentJet::monomial(-6, DiffPoly::one()).truncated(-6)).add(&Series2 {
            coeffs: BTreeMap::new(),
            l: None,
            m: Some(-8),
            s: None,
        });
        let e = y.div_mu_minus_lambda_neg();
        assert_eq!(e.coeff(-6, -2), DiffPoly::one());
        assert_eq!(e.coeff(-4, -4), DiffPoly::one());
        assert_eq!(e.coeff(-2, -6), DiffPoly::one());
    }
}
