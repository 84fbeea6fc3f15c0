//! The super tau-cover of the KdV hierarchy from its super Lax pair:
//! Gelfand–Dickey polynomials, even and odd flows, Ω/Φ densities.

pub mod series;

use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::frobenius::Cover;
use crate::jet::gen::{factorial, gamma_half_quot, q, qi};
use crate::variational::{dp_flow, kdv_pair};
use crate::jet::{antiderivative, commutator, dx_free, DiffPoly, Flow, Gen, Ring, Rules};
use crate::report::Check;

/// 𝒫₁X = uX′ + ½u′X + (ε²/8)X‴ on the free jet algebra.
pub fn p1_free(x: &DiffPoly) -> DiffPoly {
    let x1 = dx_free(x);
    let x3 = dx_free(&dx_free(&x1));
    &(&(&DiffPoly::jet(0, 0) * &x1) + &(&DiffPoly::jet(0, 1) * x).scale(&q(1, 2)))
        + &(&DiffPoly::eps_pow(2) * &x3).scale(&q(1, 8))
}

/// 𝒫₁ in a ring with nonlocal generators.
pub fn p1(ring: &Ring, x: &DiffPoly) -> DiffPoly {
    let x1 = ring.dx(x);
    let x3 = ring.dx_n(&x1, 2);
    &(&(&DiffPoly::jet(0, 0) * &x1) + &(&DiffPoly::jet(0, 1) * x).scale(&q(1, 2)))
        + &(&DiffPoly::eps_pow(2) * &x3).scale(&q(1, 8))
}

/// Gelfand–Dickey polynomials R_n: (n+½)R′_{n+1} = 𝒫₁R_n, R₀ = 1, zero constants.
#[derive(Default)]
pub struct RTable {
    r: RwLock<Vec<DiffPoly>>,
}

impl RTable {
    pub fn get(&self, n: usize) -> DiffPoly {
        if let Some(p) = self.r.read().unwrap().get(n) {
            return p.clone();
        }
        let mut w = self.r.write().unwrap();
        if w.is_empty() {
            w.push(DiffPoly::one());
        }
        while w.len() <= n {
            let k = w.len() - 1;
            let rhs = p1_free(&w[k]);
            let next = antiderivative(&rhs).expect("P1 R_n is a total derivative").scale(&q(2, 2 * k as i64 + 1));
            w.push(next);
        }
        w[n].clone()
    }
}

pub fn kdv_r(n: usize) -> DiffPoly {
    static TABLE: std::sync::OnceLock<RTable> = std::sync::OnceLock::new();
    TABLE.get_or_init(RTable::default).get(n)
}

struct KdvRules;

impl Rules for KdvRules {
    fn sigma_prime(&self, ring: &Ring, _: usize, k: usize) -> DiffPoly {
        // 𝒫₀σ_{k} = 𝒫₁σ_{k−1}
        p1(ring, &DiffPoly::sigma(0, k - 1))
    }
    fn onepoint_prime(&self, _: &Ring, _: usize, p: usize) -> DiffPoly {
        kdv_r(p + 1)
    }
    fn phi_prime(&self, _: &Ring, _: usize, p: usize, n: usize) -> DiffPoly {
        panic!("KdV has no Phi generators (Phi^{}_{})", n, p)
    }
}

/// The KdV super tau-cover truncated at `level`.
pub struct Kdv {
    pub ring: Arc<Ring>,
    pub level: usize,
    omega: Arc<RwLock<BTreeMap<(usize, usize), DiffPoly>>>,
    phi: Arc<RwLock<Option<Arc<series::PhiBuilder>>>>,
    t_flows: Vec<Arc<Flow>>,
    tau_flows: Vec<Arc<Flow>>,
}

/// ∂σ_k/∂τ_m for k ≤ m: ½Σ_{i=0}^{m−k−1} σ_{i+k}σ′_{m−i−1}.
fn seg_tau(ring: &Ring, k: usize, m: usize) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for i in 0..m.saturating_sub(k) {
        out += &(&DiffPoly::sigma(0, i + k) * &ring.sigma_jet(0, m - i - 1, 1));
    }
    out.scale(&q(1, 2))
}

/// ∂σ_k/∂t_n = ½Σ_{i=0}^n Γ(n+½−i)/Γ(n+3/2) (R_{n−i}σ′_{k+i} − R′_{n−i}σ_{k+i}).
pub fn seg_t(ring: &Ring, k: usize, n: usize) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for i in 0..=n {
        let c = gamma_half_quot((n - i) as i64, n as i64 + 1);
        let r = kdv_r(n - i);
        let term = &(&r * &ring.sigma_jet(0, k + i, 1)) - &(&dx_free(&r) * &DiffPoly::sigma(0, k + i));
        out += &term.scale(&c);
    }
    out.scale(&q(1, 2))
}

impl Kdv {
    pub fn new(level: usize) -> Kdv {
        let ring = Arc::new(Ring::new(1, 0, Arc::new(KdvRules)));
        let mut k = Kdv {
            ring,
            level,
            omega: Arc::new(RwLock::new(BTreeMap::new())),
            phi: Arc::new(RwLock::new(None)),
            t_flows: Vec::new(),
            tau_flows: Vec::new(),
        };
        k.t_flows = (0..=level).map(|n| Arc::new(k.make_t_flow(n))).collect();
        k.tau_flows = (0..=level).map(|n| Arc::new(k.make_tau_flow(n))).collect();
        k
    }

    pub fn t_flow(&self, n: usize) -> Arc<Flow> {
        self.t_flows.get(n).cloned().unwrap_or_else(|| Arc::new(self.make_t_flow(n)))
    }

    pub fn tau_flow(&self, n: usize) -> Arc<Flow> {
        self.tau_flows.get(n).cloned().unwrap_or_else(|| Arc::new(self.make_tau_flow(n)))
    }

    /// Ω_{k,n}: the antiderivative of ∂R_{k+1}/∂t_n with zero constant term.
    pub fn omega(&self, k: usize, n: usize) -> DiffPoly {
        omega_cached(&self.omega, k, n)
    }

    /// Φ^n_k with (Φ^n_k)′ = ∂R_{k+1}/∂τ_n, read off the b·c′ closed form.
    pub fn phi(&self, k: usize, n: usize) -> DiffPoly {
        phi_cached(&self.phi, &self.ring, k, n)
    }

    fn make_t_flow(&self, n: usize) -> Flow {
        let ring = self.ring.clone();
        let omega = self.omega.clone();
        Flow::new(format!("t{}", n), false, self.ring.clone(), move |g| match *g {
            Gen::Jet { s: 0, .. } => Some(dx_free(&kdv_r(n + 1))),
            Gen::Sigma { k, s: 0, .. } => Some(seg_t(&ring, k as usize, n)),
            Gen::OnePoint { p, .. } => Some(omega_cached(&omega, p as usize, n)),
            Gen::EvenTime { p, .. } if p as usize == n => Some(DiffPoly::one()),
            _ => None,
        })
    }

    fn make_tau_flow(&self, n: usize) -> Flow {
        let ring = self.ring.clone();
        let phi = self.phi.clone();
        Flow::new(format!("tau{}", n), true, self.ring.clone(), move |g| match *g {
            Gen::Jet { s: 0, .. } => Some(ring.sigma_jet(0, n, 1)),
            Gen::Sigma { k, s: 0, .. } => {
                let k = k as usize;
                Some(if k <= n { seg_tau(&ring, k, n) } else { -seg_tau(&ring, n, k) })
            }
            Gen::OnePoint { p, .. } => Some(phi_cached(&phi, &ring, p as usize, n)),
            Gen::OddTime { k } if k as usize == n => Some(DiffPoly::one()),
            _ => None,
        })
    }

    pub fn targets(&self) -> Vec<Gen> {
        let mut v = vec![Gen::jet(0, 0)];
        v.extend((0..=self.level).map(|k| Gen::sigma(0, k)));
        v.extend((0..=self.level).map(|k| Gen::onepoint(0, k)));
        v
    }

    pub fn all_flows(&self) -> Vec<Arc<Flow>> {
        self.t_flows.iter().chain(self.tau_flows.iter()).cloned().collect()
    }

    /// (n+½)R′_{n+1} = 𝒫₁R_n for n ≤ nmax.
    pub fn check_r_recursion(nmax: usize) -> Check {
        Check::timed("kdv/R-recursion", || {
            for n in 0..=nmax {
                let l = dx_free(&kdv_r(n + 1)).scale(&q(2 * n as i64 + 1, 2));
                let r = p1_free(&kdv_r(n));
                if l != r {
                    return Ok(Some(format!("n = {}: {}", n, &l - &r)));
                }
            }
            Ok(None)
        })
    }

    pub fn check_commutativity(&self) -> Vec<Check> {
        let flows = self.all_flows();
        let mut pairs = Vec::new();
        for i in 0..flows.len() {
            for j in i..flows.len() {
                if i != j || flows[i].odd {
                    pairs.push((flows[i].clone(), flows[j].clone()));
                }
            }
        }
        let targets = self.targets();
        pairs
            .par_iter()
            .map(|(a, b)| {
                Check::timed(format!("kdv/commute/[{},{}]", a.name, b.name), || {
                    for g in &targets {
                        let r = commutator(a, b, &DiffPoly::gen(*g));
                        if !r.is_zero() {
                            return Ok(Some(format!("on {:?}: {}", g, r)));
                        }
                    }
                    Ok(None)
                })
            })
            .collect()
    }

    pub fn check_compatibility(&self) -> Vec<Check> {
        let gens: Vec<Gen> = self.targets().into_iter().filter(|g| !g.is_free_jet()).collect();
        self.all_flows()
            .par_iter()
            .map(|f| {
                Check::timed(format!("kdv/compatible/{}", f.name), || {
                    for g in &gens {
                        let lhs = f.apply(&self.ring.dx(&DiffPoly::gen(*g)));
                        let rhs = self.ring.dx_total(&f.image(g));
                        if lhs != rhs {
                            return Ok(Some(format!("on {:?}: {}", g, &lhs - &rhs)));
                        }
                    }
                    Ok(None)
                })
            })
            .collect()
    }

    /// Ω symmetric, dx(Ω_{k,n}) = ∂R_{k+1}/∂t_n, dx(Φ^n_k) = ∂R_{k+1}/∂τ_n.
    pub fn check_densities(&self) -> Vec<Check> {
        let lv = self.level;
        vec![
            Check::timed("kdv/omega", || {
                for k in 0..=lv {
                    for n in 0..=lv {
                        let o = self.omega(k, n);
                        if o != self.omega(n, k) {
                            return Ok(Some(format!("Omega_{{{},{}}} asymmetric", k, n)));
                        }
                        let d = &dx_free(&o) - &self.t_flow(n).apply(&kdv_r(k + 1));
                        if !d.is_zero() {
                            return Ok(Some(format!("Omega_{{{},{}}}: {}", k, n, d)));
                        }
                    }
                }
                Ok(None)
            }),
            Check::timed("kdv/phi", || {
                for k in 0..=lv {
                    for n in 0..=lv {
                        let d = &self.ring.dx(&self.phi(k, n)) - &self.tau_flow(n).apply(&kdv_r(k + 1));
                        if !d.is_zero() {
                            return Ok(Some(format!("Phi^{}_{}: {}", n, k, d)));
                        }
                    }
                }
                Ok(None)
            }),
        ]
    }

    /// At ε = 0 every rule of the cover coincides with the super tau-cover of
    /// the one-dimensional Frobenius manifold.
    pub fn check_dispersionless(&self, onedim: &Cover) -> Vec<Check> {
        let lv = self.level.min(onedim.level);
        let mut out = vec![Check::timed("limit/R", || {
            for n in 0..=2 * lv + 2 {
                let d = &kdv_r(n).eps_zero() - &DiffPoly::jet(0, 0).pow(n as u32).scale(&(qi(1) / factorial(n as u64)));
                if !d.is_zero() {
                    return Ok(Some(format!("R_{}: {}", n, d)));
                }
            }
            Ok(None)
        })];
        let mut gens = vec![Gen::jet(0, 0)];
        gens.extend((0..=lv).map(|k| Gen::sigma(0, k)));
        gens.extend((0..=lv).map(|k| Gen::onepoint(0, k)));
        let pairs: Vec<(Arc<Flow>, Arc<Flow>)> = (0..=lv)
            .flat_map(|n| [(self.t_flow(n), onedim.t_flow(0, n)), (self.tau_flow(n), onedim.tau_flow(n))])
            .collect();
        out.extend(pairs.par_iter().map(|(a, b)| {
            Check::timed(format!("limit/{}", a.name), || {
                for g in &gens {
                    let d = &a.image(g).eps_zero() - &*b.image(g);
                    if !d.is_zero() {
                        return Ok(Some(format!("on {:?}: {}", g, d)));
                    }
                }
                Ok(None)
            })
        }).collect::<Vec<_>>());
        out
    }

    /// τ₀ and τ₁ restricted to (u, θ = σ₀) are the vector fields D_{P₀}, D_{P₁}.
    pub fn check_bihamiltonian(&self) -> Vec<Check> {
        let (p0, p1) = kdv_pair();
        [(0usize, p0), (1, p1)]
            .into_iter()
            .map(|(n, p)| {
                Check::timed(format!("kdv/bihamiltonian/tau{}", n), || {
                    let d = dp_flow(&p, "D_P")?;
                    let f = self.tau_flow(n);
                    for g in [Gen::jet(0, 0), Gen::jet(0, 1), Gen::sigma(0, 0), Gen::theta(0, 1)] {
                        let x = DiffPoly::gen(g);
                        let r = &f.apply(&x) - &d.apply(&x);
                        if !r.is_zero() {
                            return Ok(Some(format!("on {:?}: {}", g, r)));
                        }
                    }
                    Ok(None)
                })
            })
            .collect()
    }

    pub fn verify_all(&self) -> Vec<Check> {
        let mut v = vec![Kdv::check_r_recursion(2 * self.level + 2)];
        v.extend(self.check_densities());
        v.extend(self.check_compatibility());
        v.extend(self.check_commutativity());
        v.extend(self.check_bihamiltonian());
        v.extend(series::check_identities(self));
        v
    }
}

fn omega_cached(cache: &RwLock<BTreeMap<(usize, usize), DiffPoly>>, k: usize, n: usize) -> DiffPoly {
    let key = (k.min(n), k.max(n));
    if let Some(p) = cache.read().unwrap().get(&key) {
        return p.clone();
    }
    // ∂R_{k+1}/∂t_n with ∂u/∂t_n = R′_{n+1}: a derivation on u-jets.
    let (a, b) = key;
    let un = dx_free(&kdv_r(b + 1));
    let img = |g: &Gen| match *g {
        Gen::Jet { s, .. } => {
            let mut p = un.clone();
            for _ in 0..s {
                p = dx_free(&p);
            }
            Arc::new(p)
        }
        _ => Arc::new(DiffPoly::zero()),
    };
    let d = crate::jet::apply_derivation(&kdv_r(a + 1), false, &img);
    let o = antiderivative(&d).expect("dR/dt is a total derivative");
    cache.write().unwrap().insert(key, o.clone());
    o
}

fn phi_cached(cache: &RwLock<Option<Arc<series::PhiBuilder>>>, ring: &Ring, k: usize, n: usize) -> DiffPoly {
    let pb = {
        let r = cache.read().unwrap();
        match &*r {
            Some(pb) if pb.depth() >= k => Some(pb.clone()),
            _ => None,
        }
    };
    let pb = pb.unwrap_or_else(|| {
        let pb = Arc::new(series::PhiBuilder::new(k.max(4)));
        *cache.write().unwrap() = Some(pb.clone());
        pb
    });
    pb.phi(ring, k, n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::builtin;

    fn u(s: usize) -> DiffPoly {
        DiffPoly::jet(0, s)
    }

    #[test]
    fn first_gelfand_dickey_polynomials() {
        assert_eq!(kdv_r(1), u(0));
        let e2 = DiffPoly::eps_pow(2);
        let r2 = &u(0).pow(2).scale(&q(1, 2)) + &(&e2 * &u(2)).scale(&q(1, 12));
        assert_eq!(kdv_r(2), r2);
        let e4 = DiffPoly::eps_pow(4);
        let r3 = &(&u(0).pow(3).scale(&q(1, 6)) + &(&e2 * &(&(&u(0) * &u(2)).scale(&q(1, 12)) + &u(1).pow(2).scale(&q(1, 24)))))
            + &(&e4 * &u(4)).scale(&q(1, 240));
        assert_eq!(kdv_r(3), r3);
    }

    #[test]
    fn dispersionless_limit_is_onedim_cover() {
        let k = Kdv::new(2);
        let c = Cover::new(builtin("onedim").unwrap(), 2).unwrap();
        let bad: Vec<_> = k.check_dispersionless(&c).into_iter().filter(|c| !c.passed()).collect();
        assert!(bad.is_empty(), "{:#?}", bad);
    }

    #[test]
    fn flows_commute_to_level_2() {
        let k = Kdv::new(2);
        let bad: Vec<_> = k.verify_all().into_iter().filter(|c| !c.passed()).collect();
        assert!(bad.is_empty(), "{:#?}", bad);
        assert_eq!(k.omega(0, 0), u(0));
        assert_eq!(k.phi(1, 0).eps_zero(), &DiffPoly::sigma(0, 1).scale(&qi(2)) - &(&u(0) * &DiffPoly::sigma(0, 0)));
    }
}
