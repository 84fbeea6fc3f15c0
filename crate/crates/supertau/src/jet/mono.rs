use smallvec::SmallVec;

use super::gen::{ExpQ, Gen};

pub type EvenPart = SmallVec<[(Gen, u32); 4]>;
pub type OddPart = SmallVec<[Gen; 4]>;
pub type ExpPart = SmallVec<[(u8, ExpQ); 1]>;

/// A monomial: even generators with powers, a sorted duplicate-free odd word,
/// a formal exponential exp(Σ q_α v^α) and a power of ε.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mono {
    pub even: EvenPart,
    pub odd: OddPart,
    pub exp: ExpPart,
    pub eps: i32,
}

impl Mono {
    pub fn one() -> Mono {
        Mono::default()
    }

    pub fn is_one(&self) -> bool {
        self.even.is_empty() && self.odd.is_empty() && self.exp.is_empty() && self.eps == 0
    }

    pub fn gen(g: Gen) -> Mono {
        let mut m = Mono::default();
        if g.is_odd() {
            m.odd.push(g);
        } else {
            m.even.push((g, 1));
        }
        m
    }

    pub fn eps(e: i32) -> Mono {
        Mono { eps: e, ..Mono::default() }
    }

    pub fn odd_degree(&self) -> usize {
        self.odd.len()
    }

    /// True when the monomial carries no generator at all (ε and c₀ count as constants).
    pub fn is_constant(&self) -> bool {
        self.odd.is_empty()
            && self.exp.is_empty()
            && self.even.iter().all(|(g, _)| matches!(g, Gen::C0))
    }

    pub fn power_of(&self, g: &Gen) -> u32 {
        match self.even.binary_search_by(|(h, _)| h.cmp(g)) {
            Ok(i) => self.even[i].1,
            Err(_) => 0,
        }
    }

    pub fn contains(&self, g: &Gen) -> bool {
        if g.is_odd() {
            self.odd.binary_search(g).is_ok()
        } else {
            self.power_of(g) > 0
        }
    }

    pub fn exp_of(&self, a: u8) -> Option<ExpQ> {
        self.exp.iter().find(|(b, _)| *b == a).map(|(_, e)| *e)
    }

    pub fn gens(&self) -> impl Iterator<Item = Gen> + '_ {
        self.even.iter().map(|(g, _)| *g).chain(self.odd.iter().copied())
    }

    /// Lower the power of an even generator by one.
    pub fn without_one(&self, g: &Gen) -> Mono {
        let mut m = self.clone();
        if let Ok(i) = m.even.binary_search_by(|(h, _)| h.cmp(g)) {
            if m.even[i].1 == 1 {
                m.even.remove(i);
            } else {
                m.even[i].1 -= 1;
            }
        }
        m
    }

    /// Multiply by an even generator power.
    pub fn times_even(&mut self, g: Gen, k: u32) {
        if k == 0 {
            return;
        }
        match self.even.binary_search_by(|(h, _)| h.cmp(&g)) {
            Ok(i) => self.even[i].1 += k,
            Err(i) => self.even.insert(i, (g, k)),
        }
    }
}

/// Product of two monomials: `None` when an odd generator repeats, otherwise
/// the product and whether the sign flips.
pub fn mul_mono(a: &Mono, b: &Mono) -> Option<(Mono, bool)> {
    let mut odd = OddPart::new();
    let mut neg = false;
    let (mut i, mut j) = (0, 0);
    while i < a.odd.len() && j < b.odd.len() {
        match a.odd[i].cmp(&b.odd[j]) {
            std::cmp::Ordering::Less => {
                odd.push(a.odd[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                odd.push(b.odd[j]);
                if (a.odd.len() - i) % 2 == 1 {
                    neg = !neg;
                }
                j += 1;
            }
            std::cmp::Ordering::Equal => return None,
        }
    }
    odd.extend_from_slice(&a.odd[i..]);
    odd.extend_from_slice(&b.odd[j..]);

    Some((
        Mono {
            even: merge_even(&a.even, &b.even),
            odd,
            exp: merge_exp(&a.exp, &b.exp),
            eps: a.eps + b.eps,
        },
        neg,
    ))
}

/// Product of three monomials in the given order (used by odd derivations).
pub fn mul_mono3(a: &Mono, b: &Mono, c: &Mono) -> Option<(Mono, bool)> {
    let (ab, s1) = mul_mono(a, b)?;
    let (abc, s2) = mul_mono(&ab, c)?;
    Some((abc, s1 ^ s2))
}

fn merge_even(a: &EvenPart, b: &EvenPart) -> EvenPart {
    if b.is_empty() {
        return a.clone();
    }
    if a.is_empty() {
        return b.clone();
    }
    let mut out = EvenPart::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

fn merge_exp(a: &ExpPart, b: &ExpPart) -> ExpPart {
    if b.is_empty() {
        return a.clone();
    }
    if a.is_empty() {
        return b.clone();
    }
    let mut out = ExpPart::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                let s = a[i].1 + b[j].1;
                if !super::gen::exp_is_zero(&s) {
                    out.push((a[i].0, s));
                }
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Sort an odd word, returning `None` on a repeated generator and otherwise
/// whether the permutation was odd.
pub fn sort_odd(v: &mut OddPart) -> Option<bool> {
    let mut neg = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            neg = !neg;
            j -= 1;
        }
        if j > 0 && v[j - 1] == v[j] {
            return None;
        }
        if j + 1 < v.len() && j < i && v[j + 1] == v[j] {
            return None;
        }
    }
    for w in v.windows(2) {
        if w[0] == w[1] {
            return None;
        }
    }
    Some(neg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_merge_sign() {
        let a = Mono::gen(Gen::theta(0, 1));
        let b = Mono::gen(Gen::theta(0, 0));
        let (m, neg) = mul_mono(&a, &b).unwrap();
        assert!(neg);
        assert_eq!(m.odd.as_slice(), &[Gen::theta(0, 0), Gen::theta(0, 1)]);
        assert!(mul_mono(&b, &b).is_none());
    }

    #[test]
    fn sort_counts_transpositions() {
        let mut v: OddPart = [Gen::tau(0), Gen::sigma(0, 2), Gen::theta(0, 3)].into_iter().collect();
        assert_eq!(sort_odd(&mut v), Some(true));
        assert_eq!(v.as_slice(), &[Gen::theta(0, 3), Gen::sigma(0, 2), Gen::tau(0)]);
        let mut w: OddPart = [Gen::tau(1), Gen::theta(0, 0), Gen::tau(1)].into_iter().collect();
        assert_eq!(sort_odd(&mut w), None);
    }
}
