use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Signed, Zero};

/// Exact rational coefficients.
pub type Q = BigRational;

/// Exponent of a formal exponential generator.
pub type ExpQ = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_from_exp(e: ExpQ) -> Q {
    q(*e.numer(), *e.denom())
}

/// Γ(n + 1/2) / Γ(1/2) = (2n-1)!!/2^n, valid for negative n as well.
pub fn gamma_half_ratio(n: i64) -> Q {
    let mut r = Q::one();
    if n >= 0 {
        for j in 0..n {
            r *= q(2 * j + 1, 2);
        }
    } else {
        for j in n..0 {
            r /= q(2 * j + 1, 2);
        }
    }
    r
}

/// Γ(a + 1/2) / Γ(b + 1/2) for integers a, b.
pub fn gamma_half_quot(a: i64, b: i64) -> Q {
    gamma_half_ratio(a) / gamma_half_ratio(b)
}

pub fn factorial(n: u64) -> Q {
    let mut r = BigInt::one();
    for j in 2..=n {
        r *= BigInt::from(j);
    }
    Q::from_integer(r)
}

pub fn q_to_string(c: &Q) -> String {
    if c.denom().is_one() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().ok()?;
        let d: BigInt = b.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        Some(Q::new(n, d))
    } else {
        let n: BigInt = s.parse().ok()?;
        Some(Q::from_integer(n))
    }
}

pub fn q_is_int(c: &Q) -> bool {
    c.denom().is_one()
}

pub fn q_abs(c: &Q) -> Q {
    c.abs()
}

/// A free generator of the graded jet algebra.
///
/// Field indices are stored 0-based; every user-facing rendering is 1-based.
/// The derived order is the canonical order: restricted to odd generators it
/// sorts by (level, field, derivative) with `Phi` after every `Sigma` and
/// `OddTime` last.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Gen {
    /// u^{α,s}
    Jet { a: u8, s: u16 },
    /// σ^s_{α,k}; level 0 is θ^s_α
    Sigma { k: u16, a: u8, s: u16 },
    /// f_{α,p}
    OnePoint { a: u8, p: u16 },
    /// Φ^n_{α,p}
    Phi { n: u16, a: u8, p: u16 },
    /// t^{α,p}
    EvenTime { a: u8, p: u16 },
    /// τ_k
    OddTime { k: u16 },
    /// the Virasoro constant c₀
    C0,
}

impl Gen {
    pub fn jet(a: usize, s: usize) -> Gen {
        Gen::Jet { a: a as u8, s: s as u16 }
    }
    pub fn theta(a: usize, s: usize) -> Gen {
        Gen::Sigma { k: 0, a: a as u8, s: s as u16 }
    }
    pub fn sigma(a: usize, k: usize) -> Gen {
        Gen::Sigma { k: k as u16, a: a as u8, s: 0 }
    }
    pub fn onepoint(a: usize, p: usize) -> Gen {
        Gen::OnePoint { a: a as u8, p: p as u16 }
    }
    pub fn phi(a: usize, p: usize, n: usize) -> Gen {
        Gen::Phi { n: n as u16, a: a as u8, p: p as u16 }
    }
    pub fn t(a: usize, p: usize) -> Gen {
        Gen::EvenTime { a: a as u8, p: p as u16 }
    }
    pub fn tau(k: usize) -> Gen {
        Gen::OddTime { k: k as u16 }
    }

    pub fn is_odd(&self) -> bool {
        matches!(self, Gen::Sigma { .. } | Gen::Phi { .. } | Gen::OddTime { .. })
    }

    /// Generators with an x-derivative in the free subalgebra: even jets and θ-jets.
    pub fn is_free_jet(&self) -> bool {
        matches!(self, Gen::Jet { .. } | Gen::Sigma { k: 0, .. })
    }

    /// Constants for the x-derivative.
    pub fn is_x_constant(&self) -> bool {
        matches!(self, Gen::EvenTime { .. } | Gen::OddTime { .. } | Gen::C0)
    }

    /// Derivative order for jet-type generators.
    pub fn order(&self) -> Option<usize> {
        match *self {
            Gen::Jet { s, .. } => Some(s as usize),
            Gen::Sigma { k: 0, s, .. } => Some(s as usize),
            _ => None,
        }
    }

    /// The same jet generator one derivative higher.
    pub fn raised(&self) -> Option<Gen> {
        match *self {
            Gen::Jet { a, s } => Some(Gen::Jet { a, s: s + 1 }),
            Gen::Sigma { k: 0, a, s } => Some(Gen::Sigma { k: 0, a, s: s + 1 }),
            _ => None,
        }
    }

    pub fn lowered(&self) -> Option<Gen> {
        match *self {
            Gen::Jet { a, s } if s > 0 => Some(Gen::Jet { a, s: s - 1 }),
            Gen::Sigma { k: 0, a, s } if s > 0 => Some(Gen::Sigma { k: 0, a, s: s - 1 }),
            _ => None,
        }
    }

    /// Normal forms never contain σ^s_{α,k} with k ≥ 1 and s ≥ 1.
    pub fn is_normal(&self) -> bool {
        !matches!(self, Gen::Sigma { k, s, .. } if *k >= 1 && *s >= 1)
    }

    pub fn max_field(&self) -> Option<usize> {
        match *self {
            Gen::Jet { a, .. }
            | Gen::Sigma { a, .. }
            | Gen::OnePoint { a, .. }
            | Gen::Phi { a, .. }
            | Gen::EvenTime { a, .. } => Some(a as usize),
            _ => None,
        }
    }
}

pub(crate) fn exp_is_zero(e: &ExpQ) -> bool {
    e.is_zero()
}
