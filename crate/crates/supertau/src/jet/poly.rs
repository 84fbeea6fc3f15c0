use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_traits::{One, Zero};

use super::gen::{q_from_exp, ExpQ, Gen, Q};
use super::mono::{mul_mono, Mono};

/// A differential polynomial with exact rational coefficients.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DiffPoly {
    pub terms: BTreeMap<Mono, Q>,
}

impl fmt::Debug for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::fmt::to_text(self))
    }
}

impl fmt::Display for DiffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::fmt::to_text(self))
    }
}

impl DiffPoly {
    pub fn zero() -> DiffPoly {
        DiffPoly::default()
    }

    pub fn one() -> DiffPoly {
        DiffPoly::constant(Q::one())
    }

    pub fn constant(c: Q) -> DiffPoly {
        DiffPoly::term(Mono::one(), c)
    }

    pub fn int(n: i64) -> DiffPoly {
        DiffPoly::constant(super::gen::qi(n))
    }

    pub fn term(m: Mono, c: Q) -> DiffPoly {
        let mut p = DiffPoly::zero();
        p.add_term(m, c);
        p
    }

    pub fn gen(g: Gen) -> DiffPoly {
        DiffPoly::term(Mono::gen(g), Q::one())
    }

    pub fn jet(a: usize, s: usize) -> DiffPoly {
        DiffPoly::gen(Gen::jet(a, s))
    }

    pub fn theta(a: usize, s: usize) -> DiffPoly {
        DiffPoly::gen(Gen::theta(a, s))
    }

    pub fn sigma(a: usize, k: usize) -> DiffPoly {
        DiffPoly::gen(Gen::sigma(a, k))
    }

    pub fn eps_pow(e: i32) -> DiffPoly {
        DiffPoly::term(Mono::eps(e), Q::one())
    }

    /// exp(q·v^a)
    pub fn exp(a: usize, q: ExpQ) -> DiffPoly {
        let mut m = Mono::one();
        if !q.is_zero() {
            m.exp.push((a as u8, q));
        }
        DiffPoly::term(m, Q::one())
    }

    pub fn c0() -> DiffPoly {
        DiffPoly::gen(Gen::C0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, m: Mono, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_scaled(&mut self, other: &DiffPoly, c: &Q) {
        if c.is_zero() {
            return;
        }
        for (m, d) in &other.terms {
            self.add_term(m.clone(), d * c);
        }
    }

    pub fn scale(&self, c: &Q) -> DiffPoly {
        if c.is_zero() {
            return DiffPoly::zero();
        }
        DiffPoly { terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect() }
    }

    pub fn scale_i(&self, n: i64) -> DiffPoly {
        self.scale(&super::gen::qi(n))
    }

    /// Multiply every term by a monomial on the left.
    pub fn mul_mono_left(&self, m: &Mono, c: &Q) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (n, d) in &self.terms {
            if let Some((p, neg)) = mul_mono(m, n) {
                let v = d * c;
                out.add_term(p, if neg { -v } else { v });
            }
        }
        out
    }

    pub fn mul_mono_right(&self, m: &Mono, c: &Q) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (n, d) in &self.terms {
            if let Some((p, neg)) = mul_mono(n, m) {
                let v = d * c;
                out.add_term(p, if neg { -v } else { v });
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> DiffPoly {
        let mut r = DiffPoly::one();
        for _ in 0..k {
            r = &r * self;
        }
        r
    }

    /// The coefficient of the empty monomial.
    pub fn constant_term(&self) -> Q {
        self.terms.get(&Mono::one()).cloned().unwrap_or_else(Q::zero)
    }

    pub fn without_constant(&self) -> DiffPoly {
        let mut p = self.clone();
        p.terms.remove(&Mono::one());
        p
    }

    pub fn as_constant(&self) -> Option<Q> {
        if self.is_zero() {
            return Some(Q::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Mono::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> + '_ {
        self.terms.keys().flat_map(|m| m.gens())
    }

    pub fn contains_gen(&self, pred: impl Fn(&Gen) -> bool) -> bool {
        self.terms.keys().any(|m| m.gens().any(|g| pred(&g)))
    }

    pub fn has_exp(&self) -> bool {
        self.terms.keys().any(|m| !m.exp.is_empty())
    }

    /// Odd degrees occurring in the terms.
    pub fn odd_degrees(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.terms.keys().map(|m| m.odd.len()).collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn map_terms(&self, f: impl Fn(&Mono, &Q) -> Option<(Mono, Q)>) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            if let Some((n, d)) = f(m, c) {
                out.add_term(n, d);
            }
        }
        out
    }

    /// Keep the terms with the given power of ε.
    pub fn eps_part(&self, e: i32) -> DiffPoly {
        self.map_terms(|m, c| (m.eps == e).then(|| (m.clone(), c.clone())))
    }

    /// Set ε = 0. Panics on negative powers of ε.
    pub fn eps_zero(&self) -> DiffPoly {
        assert!(self.terms.keys().all(|m| m.eps >= 0), "negative power of eps at eps = 0");
        self.eps_part(0)
    }

    /// Substitute a rational value for c₀.
    pub fn subst_c0(&self, v: &Q) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let k = m.power_of(&Gen::C0);
            if k == 0 {
                out.add_term(m.clone(), c.clone());
            } else {
                let mut n = m.clone();
                n.even.retain(|(g, _)| *g != Gen::C0);
                let mut f = c.clone();
                for _ in 0..k {
                    f *= v;
                }
                out.add_term(n, f);
            }
        }
        out
    }

    /// Ordinary partial derivative by an even generator (with the exponential
    /// chain rule for `Jet{s: 0}`), or the left Grassmann derivative by an odd one.
    pub fn partial(&self, g: &Gen) -> DiffPoly {
        let mut out = DiffPoly::zero();
        if g.is_odd() {
            for (m, c) in &self.terms {
                if let Ok(i) = m.odd.binary_search(g) {
                    let mut n = m.clone();
                    n.odd.remove(i);
                    out.add_term(n, if i % 2 == 1 { -c.clone() } else { c.clone() });
                }
            }
            return out;
        }
        let exp_field = match *g {
            Gen::Jet { a, s: 0 } => Some(a),
            _ => None,
        };
        for (m, c) in &self.terms {
            let k = m.power_of(g);
            if k > 0 {
                out.add_term(m.without_one(g), c * super::gen::qi(k as i64));
            }
            if let Some(a) = exp_field {
                if let Some(e) = m.exp_of(a) {
                    out.add_term(m.clone(), c * q_from_exp(e));
                }
            }
        }
        out
    }

    /// ∂/∂v^a on functions of undifferentiated fields.
    pub fn d_field(&self, a: usize) -> DiffPoly {
        self.partial(&Gen::jet(a, 0))
    }

    /// Substitute generators by polynomials; the map must send odd to odd and even to even.
    pub fn substitute(&self, f: &dyn Fn(&Gen) -> Option<DiffPoly>) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for (m, c) in &self.terms {
            let mut acc = DiffPoly::term(
                Mono { even: Default::default(), odd: Default::default(), exp: m.exp.clone(), eps: m.eps },
                c.clone(),
            );
            for (g, k) in &m.even {
                let img = f(g).unwrap_or_else(|| DiffPoly::gen(*g));
                acc = &acc * &img.pow(*k);
            }
            for g in &m.odd {
                let img = f(g).unwrap_or_else(|| DiffPoly::gen(*g));
                acc = &acc * &img;
            }
            out += &acc;
        }
        out
    }

    /// Largest derivative order of a jet generator appearing.
    pub fn max_order(&self) -> Option<usize> {
        self.gens().filter_map(|g| g.order()).max()
    }
}

impl From<Gen> for DiffPoly {
    fn from(g: Gen) -> Self {
        DiffPoly::gen(g)
    }
}

impl<'a> Mul<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = DiffPoly::zero();
        if self.is_zero() || rhs.is_zero() {
            return out;
        }
        for (a, c) in &self.terms {
            for (b, d) in &rhs.terms {
                if let Some((m, neg)) = mul_mono(a, b) {
                    let v = c * d;
                    out.add_term(m, if neg { -v } else { v });
                }
            }
        }
        out
    }
}

impl Mul for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: DiffPoly) -> DiffPoly {
        &self * &rhs
    }
}

impl<'a> Mul<&'a Q> for &'a DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: &Q) -> DiffPoly {
        self.scale(rhs)
    }
}

impl Mul<Q> for DiffPoly {
    type Output = DiffPoly;
    fn mul(self, rhs: Q) -> DiffPoly {
        self.scale(&rhs)
    }
}

impl AddAssign<&DiffPoly> for DiffPoly {
    fn add_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl AddAssign for DiffPoly {
    fn add_assign(&mut self, rhs: DiffPoly) {
        if self.terms.len() < rhs.terms.len() {
            let lhs = std::mem::replace(self, rhs);
            for (m, c) in lhs.terms {
                self.add_term(m, c);
            }
        } else {
            for (m, c) in rhs.terms {
                self.add_term(m, c);
            }
        }
    }
}

impl SubAssign<&DiffPoly> for DiffPoly {
    fn sub_assign(&mut self, rhs: &DiffPoly) {
        for (m, c) in &rhs.terms {
            self.add_term(m.clone(), -c.clone());
        }
    }
}

impl SubAssign for DiffPoly {
    fn sub_assign(&mut self, rhs: DiffPoly) {
        for (m, c) in rhs.terms {
            self.add_term(m, -c);
        }
    }
}

impl<'a> Add<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn add(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for DiffPoly {
    type Output = DiffPoly;
    fn add(mut self, rhs: DiffPoly) -> DiffPoly {
        self += rhs;
        self
    }
}

impl<'a> Sub<&'a DiffPoly> for &'a DiffPoly {
    type Output = DiffPoly;
    fn sub(self, rhs: &DiffPoly) -> DiffPoly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for DiffPoly {
    type Output = DiffPoly;
    fn sub(mut self, rhs: DiffPoly) -> DiffPoly {
        self -= rhs;
        self
    }
}

impl Neg for DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        DiffPoly { terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect() }
    }
}

impl Neg for &DiffPoly {
    type Output = DiffPoly;
    fn neg(self) -> DiffPoly {
        -self.clone()
    }
}

impl std::iter::Sum for DiffPoly {
    fn sum<I: Iterator<Item = DiffPoly>>(iter: I) -> DiffPoly {
        let mut out = DiffPoly::zero();
        for p in iter {
            out += p;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::gen::q;

    #[test]
    fn odd_products() {
        let t0 = DiffPoly::theta(0, 0);
        let t1 = DiffPoly::theta(0, 1);
        assert!((&t0 * &t0).is_zero());
        assert_eq!(&t1 * &t0, -(&t0 * &t1));
    }

    #[test]
    fn even_product() {
        let u = DiffPoly::jet(0, 0);
        let e2 = DiffPoly::eps_pow(2);
        let a = &u + &(&e2 * &(&u * &u));
        let want = &(&u * &u) + &(&e2 * &u.pow(3));
        assert_eq!(&a * &u, want);
    }

    #[test]
    fn left_derivative() {
        let u = DiffPoly::jet(0, 0);
        let p = &DiffPoly::theta(0, 0) * &DiffPoly::theta(0, 1);
        assert_eq!(p.partial(&Gen::theta(0, 1)), -DiffPoly::theta(0, 0));
        let pu = &u * &p;
        assert_eq!(pu.partial(&Gen::theta(0, 0)), &u * &DiffPoly::theta(0, 1));
        assert_eq!((&u * &u).partial(&Gen::jet(0, 0)), u.scale_i(2));
    }

    #[test]
    fn exp_chain_rule() {
        let e = DiffPoly::exp(0, ExpQ::new(2, 1));
        let v = DiffPoly::jet(0, 0);
        let p = &v * &e;
        let want = &e + &(&v * &e).scale(&q(2, 1));
        assert_eq!(p.d_field(0), want);
        assert_eq!((&e * &DiffPoly::exp(0, ExpQ::new(-2, 1))), DiffPoly::one());
    }
}
