use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use num_traits::{One, Zero};
use rayon::prelude::*;

use super::spec::FrobeniusSpec;
use super::tables::{compute_h, verify_h, HTable, OmegaTable};
use crate::jet::{antiderivative, commutator, euler, DiffPoly, Mono, Flow, Gen, Ring, Rules, Q};
use crate::report::Check;
use crate::Error;

/// Immutable tables shared by the rewrite rules and the flows.
pub struct FrobData {
    pub spec: FrobeniusSpec,
    pub h: HTable,
    pub omega: OmegaTable,
    phi: RwLock<BTreeMap<(usize, usize, usize), DiffPoly>>,
}

impl FrobData {
    pub fn omega(&self, a: usize, p: usize, b: usize, q: usize) -> DiffPoly {
        self.omega.get(&self.spec, &self.h, a, p, b, q)
    }

    /// Φ^n_{α,p}: the closed form from the recursion, or the generator itself at
    /// a resonant pair.
    pub fn phi(&self, a: usize, p: usize, n: usize) -> DiffPoly {
        if p == 0 {
            return DiffPoly::sigma(a, n);
        }
        if self.spec.is_resonant(a, p) {
            return DiffPoly::gen(Gen::phi(a, p, n));
        }
        if let Some(x) = self.phi.read().unwrap().get(&(a, p, n)) {
            return x.clone();
        }
        let s = &self.spec;
        let half = Q::new(1.into(), 2.into());
        let h = self.h.get(a, p);
        let mut rhs = DiffPoly::zero();
        for l in 0..s.n {
            let dh = h.d_field(l);
            if dh.is_zero() {
                continue;
            }
            for e in 0..s.n {
                let c = &(&half + &s.mu[l]) * &s.eta_inv[l][e];
                if !c.is_zero() {
                    rhs += &(&dh * &DiffPoly::sigma(e, n)).scale(&c);
                }
            }
        }
        for (k, rk) in s.r.iter().enumerate().take(p) {
            for (x, row) in rk.iter().enumerate() {
                if !row[a].is_zero() {
                    rhs += &self.phi(x, p - 1 - k, n).scale(&row[a]);
                }
            }
        }
        rhs -= &self.phi(a, p - 1, n + 1);
        let div = -(Q::from_integer((2 * p as i64 - 1).into()) * &half + &s.mu[a]);
        let out = rhs.scale(&(Q::one() / div));
        self.phi.write().unwrap().insert((a, p, n), out.clone());
        out
    }
}

/// σ¹_{γ,k} in normal form.
fn sigma1(ring: &Ring, g: usize, k: usize) -> DiffPoly {
    ring.sigma_jet(g, k, 1)
}

struct FrobRules {
    data: Arc<FrobData>,
}

impl Rules for FrobRules {
    fn sigma_prime(&self, ring: &Ring, a: usize, k: usize) -> DiffPoly {
        let s = &self.data.spec;
        let mut inner = vec![DiffPoly::zero(); s.n];
        for (d, acc) in inner.iter_mut().enumerate() {
            for b in 0..s.n {
                if !s.g[d][b].is_zero() {
                    *acc += &(&s.g[d][b] * &sigma1(ring, b, k - 1));
                }
                for g in 0..s.n {
                    if !s.gam[d][b][g].is_zero() {
                        *acc += &(&(&s.gam[d][b][g] * &DiffPoly::jet(g, 1)) * &DiffPoly::sigma(b, k - 1));
                    }
                }
            }
        }
        (0..s.n).fold(DiffPoly::zero(), |acc, d| &acc + &inner[d].scale(&s.eta[a][d]))
    }

    fn onepoint_prime(&self, _: &Ring, a: usize, p: usize) -> DiffPoly {
        self.data.h.get(a, p).clone()
    }

    fn phi_prime(&self, ring: &Ring, a: usize, p: usize, n: usize) -> DiffPoly {
        tau_of_function(&self.data.spec, ring, self.data.h.get(a, p), n)
    }
}

/// Linear relations among σ_{α,k} (k ≥ 1) and the resonant Φ^n_{α,p}, levels
/// ≤ top: combinations Σ c_g g whose x-derivative is exact in the free
/// variables differ from a local polynomial by an odd x-constant, so they
/// equal it. Each relation is solved for its highest generator.
fn find_local(s: &FrobeniusSpec, ring: &Ring, top: usize) -> BTreeMap<Gen, DiffPoly> {
    let mut gens: Vec<Gen> = (1..=top).flat_map(|k| (0..s.n).map(move |a| Gen::sigma(a, k))).collect();
    for (a, p) in s.resonances(top) {
        gens.extend((0..=top).map(|n| Gen::phi(a, p, n)));
    }
    gens.sort_unstable_by(|a, b| b.cmp(a));
    let mut out: BTreeMap<Gen, DiffPoly> = BTreeMap::new();
    // substituting one round of relations can expose the next
    loop {
        gens.retain(|g| !out.contains_key(g));
        let found = local_relations(s, ring, &gens, &out);
        if found.is_empty() {
            return out;
        }
        let mut found: BTreeMap<Gen, DiffPoly> = found.into_iter().collect();
        for _ in 0..found.len() {
            let next: BTreeMap<Gen, DiffPoly> =
                found.iter().map(|(g, v)| (*g, v.substitute(&|h| found.get(h).cloned()))).collect();
            if next == found {
                break;
            }
            found = next;
        }
        for v in out.values_mut() {
            *v = v.substitute(&|h| found.get(h).cloned());
        }
        out.extend(found);
    }
}

fn is_nonlocal(g: &Gen) -> bool {
    !(g.is_free_jet() || g.is_x_constant())
}

/// Split an odd d (one odd generator per monomial) as dx(A) + R by integrating
/// c·h by parts whenever the non-constant part of c has a local antiderivative.
fn strip(ring: &Ring, d: DiffPoly, known: &BTreeMap<Gen, DiffPoly>) -> (DiffPoly, DiffPoly) {
    let sub = |p: &DiffPoly| p.substitute(&|h| known.get(h).cloned());
    let (mut a, mut r, mut d) = (DiffPoly::zero(), DiffPoly::zero(), d);
    while let Some(h) = d.gens().filter(is_nonlocal).max() {
        let hp = DiffPoly::gen(h);
        let c = d.partial(&h).without_constant();
        if let Ok(cc) = antiderivative(&c) {
            let piece = &cc * &hp;
            d -= &sub(&ring.dx(&piece));
            a += piece;
        }
        let rest = &hp * &d.partial(&h);
        d -= &rest;
        r += rest;
    }
    (a, &r + &d)
}

fn local_relations(s: &FrobeniusSpec, ring: &Ring, gens: &[Gen], known: &BTreeMap<Gen, DiffPoly>) -> Vec<(Gen, DiffPoly)> {
    let nonlocal = is_nonlocal;
    let mut local_parts = Vec::with_capacity(gens.len());
    let mut stripped = Vec::with_capacity(gens.len());
    let mut rows: BTreeMap<(u8, usize, Mono), Vec<Q>> = BTreeMap::new();
    let ng = gens.len();
    for (i, g) in gens.iter().enumerate() {
        let (sa, d) = strip(ring, ring.dx(&DiffPoly::gen(*g)).substitute(&|h| known.get(h).cloned()), known);
        stripped.push(sa);
        let mut loc = DiffPoly::zero();
        for (m, c) in &d.terms {
            if m.gens().any(|h| nonlocal(&h)) {
                rows.entry((0, 0, m.clone())).or_insert_with(|| vec![Q::zero(); ng])[i] += c;
            } else {
                loc.add_term(m.clone(), c.clone());
            }
        }
        for a in 0..s.n {
            for (tag, g0) in [(1, Gen::jet(a, 0)), (2, Gen::theta(a, 0))] {
                for (m, c) in &euler(&loc, g0).terms {
                    rows.entry((tag, a, m.clone())).or_insert_with(|| vec![Q::zero(); ng])[i] += c;
                }
            }
        }
        local_parts.push(loc);
    }
    let mut a: Vec<Vec<Q>> = rows.into_values().collect();
    let pivots = rref(&mut a);
    // kernel basis, then echelon form so each relation has its own leading generator
    let mut ker: Vec<Vec<Q>> = Vec::new();
    for f in (0..ng).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Q::zero(); ng];
        v[f] = Q::one();
        for (r, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[r][f].clone();
        }
        ker.push(v);
    }
    let lead = rref(&mut ker);
    let mut out = Vec::new();
    for (v, &l) in ker.iter().zip(&lead) {
        let mut loc = DiffPoly::zero();
        let mut rest = DiffPoly::zero();
        for (i, c) in v.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            loc.add_scaled(&local_parts[i], c);
            rest.add_scaled(&stripped[i], &-c);
            if i != l {
                rest.add_scaled(&DiffPoly::gen(gens[i]), c);
            }
        }
        let x = antiderivative(&loc).expect("Euler-closed local part is exact");
        out.push((gens[l], &x - &rest));
    }
    out
}

/// Reduced row echelon form in place; returns the pivot columns.
fn rref(a: &mut Vec<Vec<Q>>) -> Vec<usize> {
    let cols = a.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = Q::one() / &a[r][c];
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..a.len() {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                let row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&row) {
                    *x -= &f * y;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    a.truncate(r);
    pivots
}

/// ∂F/∂τ_n for a function F of the flat coordinates: ∂_γF η^{γδ} σ¹_{δ,n}.
fn tau_of_function(s: &FrobeniusSpec, ring: &Ring, f: &DiffPoly, n: usize) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for g in 0..s.n {
        let d = f.d_field(g);
        if d.is_zero() {
            continue;
        }
        for e in 0..s.n {
            if !s.eta_inv[g][e].is_zero() {
                out += &(&d * &sigma1(ring, e, n)).scale(&s.eta_inv[g][e]);
            }
        }
    }
    out
}

/// Σ_{i=0}^{m−k−1} Γ^{γβ}_a σ_{β,k+i} σ¹_{γ,m−i−1}, for k ≤ m.
fn gamma_sum(s: &FrobeniusSpec, ring: &Ring, a: usize, k: usize, m: usize) -> DiffPoly {
    let mut out = DiffPoly::zero();
    for i in 0..m.saturating_sub(k) {
        for g in 0..s.n {
            for b in 0..s.n {
                let c = &s.gam[g][b][a];
                if !c.is_zero() {
                    out += &(&(c * &DiffPoly::sigma(b, k + i)) * &sigma1(ring, g, m - i - 1));
                }
            }
        }
    }
    out
}

/// The super tau-cover of the principal hierarchy, truncated at `level`: flows
/// t^{β,q} and τ_m with q, m ≤ level act on targets of index ≤ level.
pub struct Cover {
    pub data: Arc<FrobData>,
    pub ring: Arc<Ring>,
    pub level: usize,
    /// Nonlocal odd generators that turn out to be local; see [`Cover::reduce`].
    pub local: BTreeMap<Gen, DiffPoly>,
    t_flows: Vec<Vec<Arc<Flow>>>,
    tau_flows: Vec<Arc<Flow>>,
}

impl Cover {
    pub fn new(spec: FrobeniusSpec, level: usize) -> Result<Cover, Error> {
        spec.validate()?;
        let h = compute_h(&spec, 2 * level + 2)?;
        let data = Arc::new(FrobData { spec, h, omega: OmegaTable::default(), phi: RwLock::new(BTreeMap::new()) });
        let ring = Arc::new(Ring::new(data.spec.n, 0, Arc::new(FrobRules { data: data.clone() })));
        let local = find_local(&data.spec, &ring, 2 * level + 2);
        let mut c = Cover { data, ring, level, local, t_flows: Vec::new(), tau_flows: Vec::new() };
        c.t_flows = (0..c.data.spec.n).map(|b| (0..=level).map(|q| Arc::new(c.make_t_flow(b, q))).collect()).collect();
        c.tau_flows = (0..=level).map(|m| Arc::new(c.make_tau_flow(m))).collect();
        Ok(c)
    }

    pub fn spec(&self) -> &FrobeniusSpec {
        &self.data.spec
    }

    /// Replace σ_{α,k} and Φ generators that are local by their closed forms.
    /// Their difference is an odd x-constant, and the ring has none but zero.
    pub fn reduce(&self, p: &DiffPoly) -> DiffPoly {
        if self.local.is_empty() {
            return p.clone();
        }
        p.substitute(&|g| self.local.get(g).cloned())
    }

    pub fn t_flow(&self, b: usize, q: usize) -> Arc<Flow> {
        match self.t_flows.get(b).and_then(|r| r.get(q)) {
            Some(f) => f.clone(),
            None => Arc::new(self.make_t_flow(b, q)),
        }
    }

    pub fn tau_flow(&self, m: usize) -> Arc<Flow> {
        match self.tau_flows.get(m) {
            Some(f) => f.clone(),
            None => Arc::new(self.make_tau_flow(m)),
        }
    }

    fn make_t_flow(&self, b: usize, q: usize) -> Flow {
        let data = self.data.clone();
        let ring = self.ring.clone();
        Flow::new(format!("t({},{})", b + 1, q), false, self.ring.clone(), move |g| {
            let s = &data.spec;
            let hb = data.h.get(b, q + 1);
            match *g {
                Gen::Jet { a, s: 0 } => {
                    let a = a as usize;
                    let mut out = DiffPoly::zero();
                    for c in 0..s.n {
                        if s.eta_inv[a][c].is_zero() {
                            continue;
                        }
                        let d = hb.d_field(c);
                        for l in 0..s.n {
                            out += &(&d.d_field(l) * &DiffPoly::jet(l, 1)).scale(&s.eta_inv[a][c]);
                        }
                    }
                    Some(out)
                }
                Gen::Sigma { k, a, s: 0 } => {
                    let d = hb.d_field(a as usize);
                    let mut out = DiffPoly::zero();
                    for c in 0..s.n {
                        for e in 0..s.n {
                            if !s.eta_inv[c][e].is_zero() {
                                out += &(&d.d_field(e) * &sigma1(&ring, c, k as usize)).scale(&s.eta_inv[c][e]);
                            }
                        }
                    }
                    Some(out)
                }
                Gen::OnePoint { a, p } => Some(data.omega(a as usize, p as usize, b, q)),
                Gen::Phi { n, a, p } => {
                    Some(tau_of_function(s, &ring, &data.omega(a as usize, p as usize, b, q), n as usize))
                }
                Gen::EvenTime { a, p } if a as usize == b && p as usize == q => Some(DiffPoly::one()),
                _ => None,
            }
        })
    }

    fn make_tau_flow(&self, m: usize) -> Flow {
        let data = self.data.clone();
        let ring = self.ring.clone();
        Flow::new(format!("tau({})", m), true, self.ring.clone(), move |g| {
            let s = &data.spec;
            match *g {
                Gen::Jet { a, s: 0 } => {
                    let a = a as usize;
                    Some((0..s.n).fold(DiffPoly::zero(), |acc, b| {
                        if s.eta_inv[a][b].is_zero() {
                            acc
                        } else {
                            &acc + &sigma1(&ring, b, m).scale(&s.eta_inv[a][b])
                        }
                    }))
                }
                Gen::Sigma { k, a, s: 0 } => {
                    let k = k as usize;
                    Some(if k <= m {
                        gamma_sum(s, &ring, a as usize, k, m)
                    } else {
                        -gamma_sum(s, &ring, a as usize, m, k)
                    })
                }
                Gen::OnePoint { a, p } => Some(data.phi(a as usize, p as usize, m)),
                Gen::Phi { n, a, p } => Some(delta(&data, &ring, a as usize, p as usize, m, n as usize)),
                Gen::OddTime { k } if k as usize == m => Some(DiffPoly::one()),
                _ => None,
            }
        })
    }

    pub fn phi(&self, a: usize, p: usize, n: usize) -> DiffPoly {
        self.data.phi(a, p, n)
    }

    pub fn delta(&self, a: usize, p: usize, k: usize, n: usize) -> DiffPoly {
        delta(&self.data, &self.ring, a, p, k, n)
    }

    pub fn omega(&self, a: usize, p: usize, b: usize, q: usize) -> DiffPoly {
        self.data.omega(a, p, b, q)
    }

    /// Generators on which flow identities are tested.
    pub fn targets(&self) -> Vec<Gen> {
        let n = self.data.spec.n;
        let mut v = Vec::new();
        for a in 0..n {
            v.push(Gen::jet(a, 0));
        }
        for a in 0..n {
            for k in 0..=self.level {
                v.push(Gen::sigma(a, k));
            }
        }
        for a in 0..n {
            for p in 0..=self.level {
                v.push(Gen::onepoint(a, p));
            }
        }
        for (a, p) in self.data.spec.resonances(self.level) {
            for k in 0..=self.level {
                v.push(Gen::phi(a, p, k));
            }
        }
        v
    }

    /// Nonlocal generators carrying a rewrite rule.
    fn rewritten(&self) -> Vec<Gen> {
        self.targets().into_iter().filter(|g| !matches!(g, Gen::Jet { .. } | Gen::Sigma { k: 0, .. })).collect()
    }

    pub fn all_flows(&self) -> Vec<Arc<Flow>> {
        let mut v: Vec<Arc<Flow>> = self.t_flows.iter().flatten().cloned().collect();
        v.extend(self.tau_flows.iter().cloned());
        v
    }

    /// Pairwise graded commutators of all flows on all targets.
    pub fn check_commutativity(&self, prefix: &str) -> Vec<Check> {
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
                Check::timed(format!("{}/commute/[{},{}]", prefix, a.name, b.name), || {
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

    /// Every flow commutes with ∂_x on the rewritten generators.
    pub fn check_compatibility(&self, prefix: &str) -> Vec<Check> {
        let gens = self.rewritten();
        self.all_flows()
            .par_iter()
            .map(|f| {
                Check::timed(format!("{}/compatible/{}", prefix, f.name), || {
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

    /// ∂h_{α,p}/∂t^{β,q} = ∂h_{β,q}/∂t^{α,p} for p + q ≤ top.
    pub fn check_tau_symmetry(&self, prefix: &str, top: usize) -> Check {
        Check::timed(format!("{}/tau-symmetry", prefix), || {
            let n = self.data.spec.n;
            for a in 0..n {
                for b in 0..n {
                    for p in 0..=top {
                        for q in 0..=top - p {
                            let l = self.t_flow(b, q).apply(self.data.h.get(a, p));
                            let r = self.t_flow(a, p).apply(self.data.h.get(b, q));
                            if l != r {
                                return Ok(Some(format!("({},{};{},{}): {}", a + 1, p, b + 1, q, &l - &r)));
                            }
                        }
                    }
                }
            }
            Ok(None)
        })
    }

    /// dx(Φ^n_{α,p}) = ∂h_{α,p}/∂τ_n and dx(Δ^{k,n}_{α,p}) = ∂²h_{α,p}/∂τ_k∂τ_n.
    pub fn check_phi_delta(&self, prefix: &str) -> Vec<Check> {
        let n = self.data.spec.n;
        let lv = self.level;
        let phi = Check::timed(format!("{}/phi-derivative", prefix), || {
            for a in 0..n {
                for p in 0..=lv {
                    for m in 0..=lv {
                        let l = self.ring.dx(&self.phi(a, p, m));
                        let r = self.tau_flow(m).apply(self.data.h.get(a, p));
                        if l != r {
                            return Ok(Some(format!("Phi^{}_({},{}): {}", m, a + 1, p, &l - &r)));
                        }
                    }
                }
            }
            Ok(None)
        });
        let del = Check::timed(format!("{}/delta-derivative", prefix), || {
            for a in 0..n {
                for p in 0..=lv {
                    for k in 0..=lv {
                        for m in 0..=lv {
                            let l = self.ring.dx(&self.delta(a, p, k, m));
                            let r = self.tau_flow(k).apply(&self.tau_flow(m).apply(self.data.h.get(a, p)));
                            if l != r {
                                return Ok(Some(format!("Delta^({},{})_({},{}): {}", k, m, a + 1, p, &l - &r)));
                            }
                        }
                    }
                }
            }
            Ok(None)
        });
        vec![phi, del]
    }

    /// Everything: table conditions, Ω, commutativity, compatibility, tau symmetry, Φ/Δ.
    pub fn verify_all(&self, prefix: &str) -> Vec<Check> {
        let mut out = Vec::new();
        for (name, res) in self.data.spec.identity_checks() {
            out.push(Check::timed(format!("{}/spec/{}", prefix, name), || Ok(res)));
        }
        for (name, res) in verify_h(&self.data.spec, &self.data.h) {
            let mut c = Check::timed(format!("{}/h/{}", prefix, name), || Ok(res));
            if name == "homog" && !self.data.h.gauge.is_empty() {
                c = c.with_note(format!("gauge: {}", self.data.h.gauge.join("; ")));
            }
            out.push(c);
        }
        out.push(Check::timed(format!("{}/omega/divisible", prefix), || {
            OmegaTable::check_divisible(&self.data.spec, &self.data.h, 2 * self.level + 1).map(|_| None)
        }));
        out.push(Check::timed(format!("{}/omega/symmetric-and-initial", prefix), || {
            let n = self.data.spec.n;
            for a in 0..n {
                for b in 0..n {
                    for p in 0..=self.level {
                        for q in 0..=self.level {
                            if self.omega(a, p, b, q) != self.omega(b, q, a, p) {
                                return Ok(Some(format!("asymmetric at ({},{};{},{})", a + 1, p, b + 1, q)));
                            }
                        }
                    }
                }
                for p in 0..=self.level {
                    if self.omega(a, p, 0, 0) != *self.data.h.get(a, p) {
                        return Ok(Some(format!("Omega_({},{};1,0) != h", a + 1, p)));
                    }
                }
            }
            Ok(None)
        }));
        out.push(Check::timed(format!("{}/unit-flow-is-x", prefix), || {
            let f = self.t_flow(0, 0);
            for g in self.targets() {
                let l = f.apply(&DiffPoly::gen(g));
                let r = self.ring.dx(&DiffPoly::gen(g));
                if l != r {
                    return Ok(Some(format!("on {:?}: {}", g, &l - &r)));
                }
            }
            Ok(None)
        }));
        out.push(self.check_tau_symmetry(prefix, 2 * self.level.min(2)));
        out.extend(self.check_phi_delta(prefix));
        out.extend(self.check_compatibility(prefix));
        out.extend(self.check_commutativity(prefix));
        out
    }
}

/// Δ^{k,n}_{α,p} = η^{γλ}∂_λh_{α,p} Γ^{δμ}_γ Σ_{i=0}^{k−n−1} σ_{μ,n+i}σ¹_{δ,k−i−1},
/// extended to k < n by antisymmetry.
fn delta(data: &FrobData, ring: &Ring, a: usize, p: usize, k: usize, n: usize) -> DiffPoly {
    if k < n {
        return -delta(data, ring, a, p, n, k);
    }
    let s = &data.spec;
    let h = data.h.get(a, p);
    let mut out = DiffPoly::zero();
    for g in 0..s.n {
        let mut w = DiffPoly::zero();
        for l in 0..s.n {
            if !s.eta_inv[g][l].is_zero() {
                w += &h.d_field(l).scale(&s.eta_inv[g][l]);
            }
        }
        if w.is_zero() {
            continue;
        }
        out += &(&w * &gamma_sum(s, ring, g, n, k));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frobenius::spec::builtin;
    use crate::jet::gen::gamma_half_quot;
    use crate::jet::qi;

    #[test]
    fn onedim_phi_matches_gamma_closed_form() {
        let c = Cover::new(builtin("onedim").unwrap(), 3).unwrap();
        let v = DiffPoly::jet(0, 0);
        for k in 0..=4usize {
            for n in 0..=2usize {
                let mut want = DiffPoly::sigma(0, n + k).scale(&gamma_half_quot(0, k as i64));
                for m in 0..k {
                    let c = gamma_half_quot(m as i64, k as i64) / crate::jet::gen::factorial(m as u64 + 1) / qi(2);
                    want -= &(&v.pow(m as u32 + 1) * &DiffPoly::sigma(0, n + k - m - 1)).scale(&c);
                }
                assert_eq!(c.phi(0, k, n), want, "Phi^{}_{}", n, k);
            }
        }
    }

    #[test]
    fn cp1_resonant_rule_and_flows() {
        let c = Cover::new(builtin("cp1").unwrap(), 2).unwrap();
        let (v, u) = (DiffPoly::jet(0, 0), DiffPoly::jet(1, 0));
        for n in 0..3 {
            let want = &(&v * &c.ring.sigma_jet(0, n, 1)) + &(&u * &c.ring.sigma_jet(1, n, 1));
            assert_eq!(c.ring.dx(&DiffPoly::gen(Gen::phi(0, 1, n))), want);
        }
        let eu = DiffPoly::exp(1, 1.into());
        let f = c.t_flow(1, 0);
        assert_eq!(f.apply(&v), &eu * &DiffPoly::jet(1, 1));
        assert_eq!(f.apply(&u), DiffPoly::jet(0, 1));
        // ∂σ_{2,n}/∂τ_k = e^u Σ σ_{1,n+i}σ¹_{1,k−i−1}
        let (n, k) = (0, 2);
        let mut want = DiffPoly::zero();
        for i in 0..k - n {
            want += &(&(&eu * &DiffPoly::sigma(0, n + i)) * &c.ring.sigma_jet(0, k - i - 1, 1));
        }
        assert_eq!(c.tau_flow(k).apply(&DiffPoly::sigma(1, n)), want);
    }

    #[test]
    fn onedim_cover_verifies() {
        let c = Cover::new(builtin("onedim").unwrap(), 2).unwrap();
        let bad: Vec<_> = c.verify_all("onedim").into_iter().filter(|c| !c.passed()).collect();
        assert!(bad.is_empty(), "{:#?}", bad);
    }
}
