use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::jet::gen::{parse_q, q_to_string};
use crate::jet::{q, DiffPoly, ExpQ, Gen, Mono, Q};
use crate::Error;

pub type Matrix = Vec<Vec<Q>>;

/// Raw JSON shape of a spec document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpecDoc {
    pub n: usize,
    pub d: Value,
    #[serde(default)]
    pub names: Option<Vec<String>>,
    /// terms [coeff, exponent-vector, exp-vector]
    pub potential: Vec<(Value, Vec<u32>, Vec<Value>)>,
    pub euler: EulerDoc,
    pub mu: Vec<Value>,
    #[serde(rename = "R", default)]
    pub r: Vec<Vec<Vec<Value>>>,
    #[serde(default)]
    pub h_table: Option<Vec<HEntry>>,
    #[serde(default)]
    pub virasoro_coefficients: Option<Value>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EulerDoc {
    pub linear: Vec<Value>,
    pub constants: Vec<Value>,
}

/// One stored h_{α,p}; `alpha` is 1-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HEntry {
    pub alpha: usize,
    pub p: usize,
    pub h: Value,
}

fn rat(v: &Value) -> Result<Q, Error> {
    match v {
        Value::String(s) => parse_q(s).ok_or_else(|| Error::Validation(format!("bad rational {:?}", s))),
        Value::Number(n) => n
            .as_i64()
            .map(|i| Q::from_integer(i.into()))
            .ok_or_else(|| Error::Validation(format!("non-integer number {}; write rationals as strings", n))),
        _ => Err(Error::Validation(format!("expected a rational, found {}", v))),
    }
}

fn exp_rat(v: &Value) -> Result<ExpQ, Error> {
    let x = rat(v)?;
    let n: i64 = x.numer().try_into().map_err(|_| Error::Validation("exponent too large".into()))?;
    let d: i64 = x.denom().try_into().map_err(|_| Error::Validation("exponent too large".into()))?;
    Ok(ExpQ::new(n, d))
}

/// Frobenius manifold data with its derived tensors.
///
/// Field 0 is the unit direction. R-matrices are stored as `r[k][γ][α]`
/// = (R_{k+1})^γ_α.
#[derive(Debug)]
pub struct FrobeniusSpec {
    pub name: String,
    pub n: usize,
    pub d: Q,
    pub names: Vec<String>,
    pub potential: DiffPoly,
    pub euler_linear: Vec<Q>,
    pub euler_const: Vec<Q>,
    pub mu: Vec<Q>,
    pub r: Vec<Matrix>,
    pub h_table: Option<Vec<Vec<DiffPoly>>>,
    pub virasoro_doc: Option<Value>,
    pub eta: Matrix,
    pub eta_inv: Matrix,
    /// ∂_α∂_β∂_γF
    pub c3: Vec<Vec<Vec<DiffPoly>>>,
    /// c^γ_{αβ} as `c_up[γ][α][β]`
    pub c_up: Vec<Vec<Vec<DiffPoly>>>,
    /// c^{αβ}_ε as `c_uu[α][β][ε]`
    pub c_uu: Vec<Vec<Vec<DiffPoly>>>,
    /// E^α
    pub euler: Vec<DiffPoly>,
    /// g^{αβ}
    pub g: Vec<Vec<DiffPoly>>,
    /// Γ^{αβ}_γ as `gam[α][β][γ]`
    pub gam: Vec<Vec<Vec<DiffPoly>>>,
}

pub fn invert(m: &Matrix) -> Option<Matrix> {
    let n = m.len();
    let mut a: Vec<Vec<Q>> = m.clone();
    let mut inv: Matrix = (0..n).map(|i| (0..n).map(|j| if i == j { Q::one() } else { Q::zero() }).collect()).collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let f = Q::one() / &a[col][col];
        for j in 0..n {
            a[col][j] = &a[col][j] * &f;
            inv[col][j] = &inv[col][j] * &f;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let k = a[r][col].clone();
                for j in 0..n {
                    let x = &a[col][j] * &k;
                    a[r][j] -= x;
                    let y = &inv[col][j] * &k;
                    inv[r][j] -= y;
                }
            }
        }
    }
    Some(inv)
}

impl FrobeniusSpec {
    pub fn from_json(text: &str, name: &str) -> Result<FrobeniusSpec, Error> {
        let doc: SpecDoc = serde_json::from_str(text).map_err(|e| Error::Validation(format!("malformed spec: {}", e)))?;
        FrobeniusSpec::from_doc(&doc, name)
    }

    pub fn from_doc(doc: &SpecDoc, name: &str) -> Result<FrobeniusSpec, Error> {
        let n = doc.n;
        if n == 0 || n > 200 {
            return Err(Error::Validation(format!("dimension {} out of range", n)));
        }
        let len_ok = doc.mu.len() == n && doc.euler.linear.len() == n && doc.euler.constants.len() == n;
        if !len_ok {
            return Err(Error::Validation("mu and euler vectors must have length n".into()));
        }
        let mut potential = DiffPoly::zero();
        for (c, ex, ee) in &doc.potential {
            if ex.len() != n || (!ee.is_empty() && ee.len() != n) {
                return Err(Error::Validation("potential exponent vectors must have length n".into()));
            }
            let mut m = Mono::one();
            for (a, k) in ex.iter().enumerate() {
                if *k > 0 {
                    m.times_even(Gen::jet(a, 0), *k);
                }
            }
            let mut term = DiffPoly::term(m, rat(c)?);
            for (a, e) in ee.iter().enumerate() {
                let e = exp_rat(e)?;
                if !e.is_zero() {
                    term = &term * &DiffPoly::exp(a, e);
                }
            }
            potential += &term;
        }
        let names = doc.names.clone().unwrap_or_else(|| crate::jet::fmt::Names::default_for(n).fields);
        if names.len() != n {
            return Err(Error::Validation("names must have length n".into()));
        }
        let mat = |m: &Vec<Vec<Value>>| -> Result<Matrix, Error> {
            if m.len() != n || m.iter().any(|r| r.len() != n) {
                return Err(Error::Validation("R matrices must be n×n".into()));
            }
            m.iter().map(|r| r.iter().map(rat).collect()).collect()
        };
        let r = doc.r.iter().map(mat).collect::<Result<Vec<_>, _>>()?;
        let h_table = match &doc.h_table {
            None => None,
            Some(entries) => {
                let pmax = entries.iter().map(|e| e.p).max().unwrap_or(0);
                let mut t = vec![vec![None; pmax + 1]; n];
                for e in entries {
                    if e.alpha == 0 || e.alpha > n {
                        return Err(Error::Validation(format!("h_table index {} out of range", e.alpha)));
                    }
                    let p = crate::jet::fmt::from_json(&e.h).ok_or_else(|| Error::Validation("malformed h_table entry".into()))?;
                    t[e.alpha - 1][e.p] = Some(p);
                }
                let mut out = Vec::new();
                for row in t {
                    // keep the contiguous prefix of levels
                    out.push(row.into_iter().map_while(|x| x).collect::<Vec<_>>());
                }
                Some(out)
            }
        };
        let mut spec = FrobeniusSpec {
            name: name.to_string(),
            n,
            d: rat(&doc.d)?,
            names,
            potential,
            euler_linear: doc.euler.linear.iter().map(rat).collect::<Result<_, _>>()?,
            euler_const: doc.euler.constants.iter().map(rat).collect::<Result<_, _>>()?,
            mu: doc.mu.iter().map(rat).collect::<Result<_, _>>()?,
            r,
            h_table,
            virasoro_doc: doc.virasoro_coefficients.clone(),
            eta: vec![],
            eta_inv: vec![],
            c3: vec![],
            c_up: vec![],
            c_uu: vec![],
            euler: vec![],
            g: vec![],
            gam: vec![],
        };
        spec.derive()?;
        spec.validate()?;
        Ok(spec)
    }

    fn derive(&mut self) -> Result<(), Error> {
        let n = self.n;
        let d1: Vec<DiffPoly> = (0..n).map(|a| self.potential.d_field(a)).collect();
        let d2: Vec<Vec<DiffPoly>> = (0..n).map(|a| (0..n).map(|b| d1[a].d_field(b)).collect()).collect();
        self.c3 = (0..n).map(|a| (0..n).map(|b| (0..n).map(|c| d2[a][b].d_field(c)).collect()).collect()).collect();
        let mut eta = vec![vec![Q::zero(); n]; n];
        for a in 0..n {
            for b in 0..n {
                eta[a][b] = self.c3[0][a][b]
                    .as_constant()
                    .ok_or_else(|| Error::Validation(format!("eta[{}][{}] = {} is not constant", a + 1, b + 1, self.c3[0][a][b])))?;
            }
        }
        self.eta_inv = invert(&eta).ok_or_else(|| Error::Validation("eta is degenerate".into()))?;
        self.eta = eta;
        let ei = &self.eta_inv;
        self.c_up = (0..n)
            .map(|g| {
                (0..n)
                    .map(|a| {
                        (0..n).map(|b| (0..n).fold(DiffPoly::zero(), |acc, z| &acc + &self.c3[z][a][b].scale(&ei[g][z]))).collect()
                    })
                    .collect()
            })
            .collect();
        self.c_uu = (0..n)
            .map(|a| {
                (0..n)
                    .map(|b| (0..n).map(|e| (0..n).fold(DiffPoly::zero(), |acc, z| &acc + &self.c_up[b][z][e].scale(&ei[a][z]))).collect())
                    .collect()
            })
            .collect();
        self.euler = (0..n)
            .map(|a| &DiffPoly::jet(a, 0).scale(&self.euler_linear[a]) + &DiffPoly::constant(self.euler_const[a].clone()))
            .collect();
        self.g = (0..n)
            .map(|a| (0..n).map(|b| (0..n).fold(DiffPoly::zero(), |acc, e| &acc + &(&self.euler[e] * &self.c_uu[a][b][e]))).collect())
            .collect();
        let half = q(1, 2);
        self.gam = (0..n)
            .map(|a| (0..n).map(|b| (0..n).map(|c| self.c_uu[a][b][c].scale(&(&half - &self.mu[b]))).collect()).collect())
            .collect();
        Ok(())
    }

    /// E(p) = Σ E^α ∂_α p on functions of the flat coordinates.
    pub fn euler_apply(&self, p: &DiffPoly) -> DiffPoly {
        (0..self.n).fold(DiffPoly::zero(), |acc, a| &acc + &(&self.euler[a] * &p.d_field(a)))
    }

    /// Components of the Frobenius power E^{k}; E^0 is the unit field.
    pub fn euler_power(&self, k: usize) -> Vec<DiffPoly> {
        let n = self.n;
        let mut v: Vec<DiffPoly> = (0..n).map(|a| if a == 0 { DiffPoly::one() } else { DiffPoly::zero() }).collect();
        for _ in 0..k {
            v = (0..n)
                .map(|g| {
                    let mut s = DiffPoly::zero();
                    for a in 0..n {
                        for b in 0..n {
                            if !self.c_up[g][a][b].is_zero() {
                                s += &(&(&v[a] * &self.euler[b]) * &self.c_up[g][a][b]);
                            }
                        }
                    }
                    s
                })
                .collect();
        }
        v
    }

    pub fn vector_apply(v: &[DiffPoly], p: &DiffPoly) -> DiffPoly {
        v.iter().enumerate().fold(DiffPoly::zero(), |acc, (a, x)| if x.is_zero() { acc } else { &acc + &(x * &p.d_field(a)) })
    }

    /// Validation of the defining identities; returns the first violation.
    pub fn validate(&self) -> Result<(), Error> {
        for (name, ok) in self.identity_checks() {
            if let Some(res) = ok {
                return Err(Error::Validation(format!("{}: {}", name, res)));
            }
        }
        Ok(())
    }

    /// Every defining identity with its residue (None when it holds).
    pub fn identity_checks(&self) -> Vec<(String, Option<String>)> {
        let n = self.n;
        let mut out = Vec::new();
        let mut first = |name: &str, items: &mut dyn Iterator<Item = Option<String>>| {
            out.push((name.to_string(), (&mut *items).flatten().next()));
        };
        let half_d = &self.d / Q::from_integer(2.into());
        first(
            "mu1 = -d/2",
            &mut std::iter::once((self.mu[0] != -half_d.clone()).then(|| format!("mu1 = {}", q_to_string(&self.mu[0])))),
        );
        first(
            "euler linear part",
            &mut (0..n).map(|a| {
                let want = Q::one() - &half_d - &self.mu[a];
                (self.euler_linear[a] != want).then(|| format!("coefficient {} should be {}", a + 1, q_to_string(&want)))
            }),
        );
        first(
            "WDVV",
            &mut iproduct(n, 4).map(|ix| {
                let (a, b, c, l) = (ix[0], ix[1], ix[2], ix[3]);
                let mut lhs = DiffPoly::zero();
                for e in 0..n {
                    lhs += &(&self.c_up[e][a][b] * &self.c_up[l][e][c]);
                    lhs -= &(&self.c_up[e][b][c] * &self.c_up[l][e][a]);
                }
                (!lhs.is_zero()).then(|| format!("({},{},{},{}): {}", a + 1, b + 1, c + 1, l + 1, lhs))
            }),
        );
        first(
            "mu-eta",
            &mut iproduct(n, 2).map(|ix| {
                let v = (&self.mu[ix[0]] + &self.mu[ix[1]]) * &self.eta[ix[0]][ix[1]];
                (!v.is_zero()).then(|| format!("({},{})", ix[0] + 1, ix[1] + 1))
            }),
        );
        first(
            "c-hom",
            &mut iproduct(n, 3).map(|ix| {
                let (a, b, g) = (ix[0], ix[1], ix[2]);
                let c = &self.c_up[g][a][b];
                let k = &(&self.mu[a] + &self.mu[b]) - &(&self.mu[g] + &self.mu[0]);
                let r = &self.euler_apply(c) - &c.scale(&k);
                (!r.is_zero()).then(|| format!("({},{},{}): {}", a + 1, b + 1, g + 1, r))
            }),
        );
        first(
            "g-gam",
            &mut iproduct(n, 3).map(|ix| {
                let (a, b, g) = (ix[0], ix[1], ix[2]);
                let r = &(&self.g[a][b].d_field(g) - &self.gam[a][b][g]) - &self.gam[b][a][g];
                (!r.is_zero()).then(|| format!("({},{},{}): {}", a + 1, b + 1, g + 1, r))
            }),
        );
        out
    }

    /// Resonant pairs (α, p), 1 ≤ p ≤ pmax: 1 − 2p − 2μ_α = 0. Level 0 never
    /// counts since Φ^n_{α,0} = σ_{α,n} is fixed.
    pub fn resonances(&self, pmax: usize) -> Vec<(usize, usize)> {
        let mut v = Vec::new();
        for a in 0..self.n {
            for p in 0..=pmax {
                if self.is_resonant(a, p) {
                    v.push((a, p));
                }
            }
        }
        v
    }

    pub fn is_resonant(&self, a: usize, p: usize) -> bool {
        p >= 1 && (Q::one() - Q::from_integer((2 * p as i64).into()) - &self.mu[a] * Q::from_integer(2.into())).is_zero()
    }

    pub fn names(&self) -> crate::jet::fmt::Names {
        crate::jet::fmt::Names { fields: self.names.clone() }
    }
}

/// All index tuples in 0..n of length k.
pub fn iproduct(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let total = n.pow(k as u32);
    (0..total).map(move |mut i| {
        let mut v = vec![0; k];
        for j in (0..k).rev() {
            v[j] = i % n;
            i /= n;
        }
        v
    })
}

pub const ONEDIM_JSON: &str = include_str!("../../assets/onedim.json");
pub const CP1_JSON: &str = include_str!("../../assets/cp1.json");

pub fn builtin(name: &str) -> Option<FrobeniusSpec> {
    match name {
        "onedim" => Some(FrobeniusSpec::from_json(ONEDIM_JSON, "onedim").expect("built-in spec")),
        "cp1" => Some(FrobeniusSpec::from_json(CP1_JSON, "cp1").expect("built-in spec")),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_load() {
        let s = builtin("onedim").unwrap();
        assert_eq!(s.eta, vec![vec![Q::one()]]);
        assert_eq!(s.g[0][0], DiffPoly::jet(0, 0));
        assert_eq!(s.gam[0][0][0], DiffPoly::constant(q(1, 2)));
        let c = builtin("cp1").unwrap();
        assert_eq!(c.mu, vec![q(-1, 2), q(1, 2)]);
        assert_eq!(c.r[0][1][0], Q::from_integer(2.into()));
        assert_eq!(c.resonances(4), vec![(0, 1)]);
    }

    #[test]
    fn broken_wdvv_rejected() {
        // n = 3: f(v2, v3) = v2²v3² breaks f_333 = f_223² − f_222 f_233
        let doc = r#"{"n":3,"d":"0","potential":[["1/2",[2,0,1],[]],["1/2",[1,2,0],[]],["1",[0,2,2],[]]],
            "euler":{"linear":["1","1","1"],"constants":["0","0","0"]},"mu":["0","0","0"],"R":[]}"#;
        let e = FrobeniusSpec::from_json(doc, "bad").unwrap_err();
        assert!(matches!(e, Error::Validation(_)));
    }
}
