use std::sync::{Arc, RwLock};

use rustc_hash::FxHashMap;

use super::gen::{q_from_exp, Gen};
use super::mono::{mul_mono, Mono};
use super::poly::DiffPoly;

/// Rewrite rules fixing the x-derivatives of the nonlocal generators.
pub trait Rules: Send + Sync {
    /// Normal form of σ^1_{a,k}, k ≥ 1.
    fn sigma_prime(&self, ring: &Ring, a: usize, k: usize) -> DiffPoly;
    /// Normal form of f'_{a,p}.
    fn onepoint_prime(&self, ring: &Ring, a: usize, p: usize) -> DiffPoly;
    /// Normal form of (Φ^n_{a,p})'.
    fn phi_prime(&self, ring: &Ring, a: usize, p: usize, n: usize) -> DiffPoly;
}

/// Rules for the free jet algebra: no nonlocal generators may be differentiated.
pub struct FreeRules;

impl Rules for FreeRules {
    fn sigma_prime(&self, _: &Ring, a: usize, k: usize) -> DiffPoly {
        panic!("no rewrite rule for sigma_{{{},{}}}", a + 1, k)
    }
    fn onepoint_prime(&self, _: &Ring, a: usize, p: usize) -> DiffPoly {
        panic!("no rewrite rule for f_{{{},{}}}", a + 1, p)
    }
    fn phi_prime(&self, _: &Ring, a: usize, p: usize, n: usize) -> DiffPoly {
        panic!("no rewrite rule for Phi^{}_{{{},{}}}", n, a + 1, p)
    }
}

/// The differential ring: field count, the unit field (whose zeroth time is x)
/// and the rewrite system.
pub struct Ring {
    pub n: usize,
    pub unit: usize,
    rules: Arc<dyn Rules>,
    cache: RwLock<FxHashMap<Gen, Arc<DiffPoly>>>,
}

impl Ring {
    pub fn new(n: usize, unit: usize, rules: Arc<dyn Rules>) -> Ring {
        Ring { n, unit, rules, cache: RwLock::new(FxHashMap::default()) }
    }

    pub fn free(n: usize) -> Ring {
        Ring::new(n, 0, Arc::new(FreeRules))
    }

    /// x-derivative of one generator, in normal form.
    pub fn dx_gen(&self, g: &Gen) -> Arc<DiffPoly> {
        match *g {
            Gen::Jet { .. } | Gen::Sigma { k: 0, .. } => Arc::new(DiffPoly::gen(g.raised().unwrap())),
            Gen::EvenTime { .. } | Gen::OddTime { .. } | Gen::C0 => Arc::new(DiffPoly::zero()),
            Gen::Sigma { s, .. } if s > 0 => panic!("non-normal generator {:?}", g),
            _ => {
                if let Some(p) = self.cache.read().unwrap().get(g) {
                    return p.clone();
                }
                let img = match *g {
                    Gen::Sigma { k, a, .. } => self.rules.sigma_prime(self, a as usize, k as usize),
                    Gen::OnePoint { a, p } => self.rules.onepoint_prime(self, a as usize, p as usize),
                    Gen::Phi { n, a, p } => self.rules.phi_prime(self, a as usize, p as usize, n as usize),
                    _ => unreachable!(),
                };
                debug_assert!(rank_decreases(g, &img), "rewrite of {:?} does not lower the rank", g);
                let img = Arc::new(img);
                self.cache.write().unwrap().insert(*g, img.clone());
                img
            }
        }
    }

    /// The total x-derivative.
    pub fn dx(&self, p: &DiffPoly) -> DiffPoly {
        apply_derivation(p, false, &|g| self.dx_gen(g))
    }

    pub fn dx_n(&self, p: &DiffPoly, k: usize) -> DiffPoly {
        let mut r = p.clone();
        for _ in 0..k {
            r = self.dx(&r);
        }
        r
    }

    /// x-derivative treating the time t^{unit,0} as x itself.
    pub fn dx_total(&self, p: &DiffPoly) -> DiffPoly {
        let x = Gen::t(self.unit, 0);
        let one = Arc::new(DiffPoly::one());
        apply_derivation(p, false, &|g| if *g == x { one.clone() } else { self.dx_gen(g) })
    }

    /// σ^s_{a,k} in normal form.
    pub fn sigma_jet(&self, a: usize, k: usize, s: usize) -> DiffPoly {
        if k == 0 {
            return DiffPoly::theta(a, s);
        }
        self.dx_n(&DiffPoly::sigma(a, k), s)
    }
}

/// Termination check for a rewrite: the image is normal and strictly lower in
/// (σ-level, f, Φ) than the rewritten generator.
fn rank_decreases(g: &Gen, img: &DiffPoly) -> bool {
    img.gens().all(|h| {
        h.is_normal()
            && match (*g, h) {
                (Gen::Sigma { k, .. }, Gen::Sigma { k: j, .. }) => j < k,
                (Gen::Sigma { .. }, Gen::OnePoint { .. } | Gen::Phi { .. }) => false,
                (Gen::OnePoint { .. }, Gen::OnePoint { .. } | Gen::Phi { .. }) => false,
                (Gen::Phi { .. }, Gen::Phi { .. } | Gen::OnePoint { .. }) => false,
                _ => true,
            }
    })
}

/// Apply a derivation of the given parity, described by its generator images.
pub fn apply_derivation(p: &DiffPoly, odd: bool, img: &dyn Fn(&Gen) -> Arc<DiffPoly>) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for (m, c) in &p.terms {
        for (g, k) in &m.even {
            let d = img(g);
            if d.is_zero() {
                continue;
            }
            let rest = m.without_one(g);
            let f = c * super::gen::qi(*k as i64);
            for (dm, dc) in &d.terms {
                if let Some((prod, neg)) = mul_mono(dm, &rest) {
                    let v = dc * &f;
                    out.add_term(prod, if neg { -v } else { v });
                }
            }
        }
        for (a, e) in &m.exp {
            let d = img(&Gen::jet(*a as usize, 0));
            if d.is_zero() {
                continue;
            }
            let f = c * q_from_exp(*e);
            for (dm, dc) in &d.terms {
                if let Some((prod, neg)) = mul_mono(dm, m) {
                    let v = dc * &f;
                    out.add_term(prod, if neg { -v } else { v });
                }
            }
        }
        for i in 0..m.odd.len() {
            let d = img(&m.odd[i]);
            if d.is_zero() {
                continue;
            }
            let mut prefix = m.clone();
            prefix.odd.truncate(i);
            let suffix = Mono { odd: m.odd[i + 1..].iter().copied().collect(), ..Mono::one() };
            let sign_flip = odd && i % 2 == 1;
            for (dm, dc) in &d.terms {
                if let Some((pd, n1)) = mul_mono(&prefix, dm) {
                    if let Some((prod, n2)) = mul_mono(&pd, &suffix) {
                        let v = dc * c;
                        out.add_term(prod, if n1 ^ n2 ^ sign_flip { -v } else { v });
                    }
                }
            }
        }
    }
    out
}

/// A derivation of the ring given by the images of base generators
/// (undifferentiated jets, σ_{a,k}, f, Φ, times); images of x-derivatives of
/// jets follow from commuting with the total x-derivative.
pub struct Flow {
    pub name: String,
    pub odd: bool,
    ring: Arc<Ring>,
    base: Box<dyn Fn(&Gen) -> Option<DiffPoly> + Send + Sync>,
    cache: RwLock<FxHashMap<Gen, Arc<DiffPoly>>>,
}

impl Flow {
    pub fn new(
        name: impl Into<String>,
        odd: bool,
        ring: Arc<Ring>,
        base: impl Fn(&Gen) -> Option<DiffPoly> + Send + Sync + 'static,
    ) -> Flow {
        Flow { name: name.into(), odd, ring, base: Box::new(base), cache: RwLock::new(FxHashMap::default()) }
    }

    pub fn ring(&self) -> &Arc<Ring> {
        &self.ring
    }

    /// Image of a single generator.
    pub fn image(&self, g: &Gen) -> Arc<DiffPoly> {
        if let Some(p) = self.cache.read().unwrap().get(g) {
            return p.clone();
        }
        let img = match g.lowered() {
            Some(h) => self.ring.dx_total(&self.image(&h)),
            None => (self.base)(g).unwrap_or_default(),
        };
        let img = Arc::new(img);
        self.cache.write().unwrap().insert(*g, img.clone());
        img
    }

    pub fn apply(&self, p: &DiffPoly) -> DiffPoly {
        apply_derivation(p, self.odd, &|g| self.image(g))
    }

    pub fn apply_gen(&self, g: Gen) -> DiffPoly {
        (*self.image(&g)).clone()
    }
}

/// Graded commutator [A, B] evaluated on a polynomial.
pub fn commutator(a: &Flow, b: &Flow, p: &DiffPoly) -> DiffPoly {
    let ab = a.apply(&b.apply(p));
    let ba = b.apply(&a.apply(p));
    if a.odd && b.odd {
        ab + ba
    } else {
        ab - ba
    }
}
