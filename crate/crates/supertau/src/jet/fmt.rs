//! Text, LaTeX and JSON renderings of differential polynomials.

use num_traits::{One, Signed};
use serde_json::{json, Value};

use super::gen::{parse_q, q_to_string, ExpQ, Gen, Q};
use super::mono::{sort_odd, Mono, OddPart};
use super::poly::DiffPoly;

/// Display names of the fields. A single field is called `u`; larger
/// systems default to `v1, v2, ...`.
#[derive(Clone, Debug)]
pub struct Names {
    pub fields: Vec<String>,
}

impl Names {
    pub fn new(fields: &[&str]) -> Names {
        Names { fields: fields.iter().map(|s| s.to_string()).collect() }
    }

    pub fn infer(p: &DiffPoly) -> Names {
        let n = p.gens().filter_map(|g| g.max_field()).chain(p.terms.keys().flat_map(|m| m.exp.iter().map(|e| e.0 as usize))).max().unwrap_or(0) + 1;
        Names::default_for(n)
    }

    pub fn default_for(n: usize) -> Names {
        if n <= 1 {
            Names::new(&["u"])
        } else {
            Names { fields: (1..=n).map(|i| format!("v{}", i)).collect() }
        }
    }

    fn field(&self, a: u8) -> String {
        self.fields.get(a as usize).cloned().unwrap_or_else(|| format!("v{}", a + 1))
    }

    fn single(&self) -> bool {
        self.fields.len() <= 1
    }
}

fn xs(s: u16) -> String {
    match s {
        0 => String::new(),
        1..=3 => format!("_{}", "x".repeat(s as usize)),
        _ => format!("_({}x)", s),
    }
}

fn gen_text(g: &Gen, nm: &Names) -> String {
    match *g {
        Gen::Jet { a, s } => format!("{}{}", nm.field(a), xs(s)),
        Gen::Sigma { k: 0, a, s } => {
            if nm.single() {
                format!("theta{}", xs(s))
            } else {
                format!("theta{}{}", a + 1, xs(s))
            }
        }
        Gen::Sigma { k, a, s } => {
            if nm.single() {
                format!("sigma{}{}", k, xs(s))
            } else {
                format!("sigma({},{}){}", a + 1, k, xs(s))
            }
        }
        Gen::OnePoint { a, p } => {
            if nm.single() {
                format!("f{}", p)
            } else {
                format!("f({},{})", a + 1, p)
            }
        }
        Gen::Phi { n, a, p } => {
            if nm.single() {
                format!("Phi^{}_{}", n, p)
            } else {
                format!("Phi^{}({},{})", n, a + 1, p)
            }
        }
        Gen::EvenTime { a, p } => {
            if nm.single() {
                format!("t{}", p)
            } else {
                format!("t({},{})", a + 1, p)
            }
        }
        Gen::OddTime { k } => format!("tau{}", k),
        Gen::C0 => "c0".to_string(),
    }
}

fn exp_text(a: u8, e: &ExpQ, nm: &Names) -> String {
    if e.is_one() {
        format!("exp({})", nm.field(a))
    } else {
        format!("exp({}*{})", e, nm.field(a))
    }
}

fn mono_factors_text(m: &Mono, nm: &Names) -> Vec<String> {
    let mut f = Vec::new();
    if m.eps != 0 {
        f.push(if m.eps == 1 { "eps".to_string() } else { format!("eps^{}", m.eps) });
    }
    for (g, k) in &m.even {
        let s = gen_text(g, nm);
        f.push(if *k == 1 { s } else { format!("{}^{}", s, k) });
    }
    for (a, e) in &m.exp {
        f.push(exp_text(*a, e, nm));
    }
    for g in &m.odd {
        f.push(gen_text(g, nm));
    }
    f
}

pub fn to_text(p: &DiffPoly) -> String {
    to_text_with(p, &Names::infer(p))
}

pub fn to_text_with(p: &DiffPoly, nm: &Names) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let factors = mono_factors_text(m, nm);
        if factors.is_empty() {
            out.push_str(&q_to_string(&a));
        } else {
            if !a.is_one() {
                out.push_str(&q_to_string(&a));
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

fn primes(base: String, s: u16) -> String {
    match s {
        0 => base,
        1..=3 => format!("{}{}", base, "'".repeat(s as usize)),
        _ => format!("{}^{{({})}}", base, s),
    }
}

fn gen_latex(g: &Gen, nm: &Names) -> String {
    match *g {
        Gen::Jet { a, s } => primes(nm.field(a), s),
        Gen::Sigma { k: 0, a, s } => {
            let base = if nm.single() { "\\theta".to_string() } else { format!("\\theta_{{{}}}", a + 1) };
            match s {
                0 => base,
                _ => format!("{}^{{{}}}", base, s),
            }
        }
        Gen::Sigma { k, a, s } => {
            let idx = if nm.single() { format!("{}", k) } else { format!("{},{}", a + 1, k) };
            if s == 0 {
                format!("\\sigma_{{{}}}", idx)
            } else {
                format!("\\sigma^{{{}}}_{{{}}}", s, idx)
            }
        }
        Gen::OnePoint { a, p } => {
            if nm.single() {
                format!("f_{{{}}}", p)
            } else {
                format!("f_{{{},{}}}", a + 1, p)
            }
        }
        Gen::Phi { n, a, p } => {
            if nm.single() {
                format!("\\Phi^{{{}}}_{{{}}}", n, p)
            } else {
                format!("\\Phi^{{{}}}_{{{},{}}}", n, a + 1, p)
            }
        }
        Gen::EvenTime { a, p } => {
            if nm.single() {
                format!("t_{{{}}}", p)
            } else {
                format!("t^{{{},{}}}", a + 1, p)
            }
        }
        Gen::OddTime { k } => format!("\\tau_{{{}}}", k),
        Gen::C0 => "c_0".to_string(),
    }
}

fn pow_latex(base: String, k: u32) -> String {
    if k == 1 {
        return base;
    }
    let b = if base.contains('\'') || base.contains('^') { format!("({})", base) } else { base };
    if k < 10 {
        format!("{}^{}", b, k)
    } else {
        format!("{}^{{{}}}", b, k)
    }
}

fn mono_latex(m: &Mono, nm: &Names) -> String {
    let mut f = Vec::new();
    if m.eps != 0 {
        f.push(pow_latex("\\varepsilon".into(), 1).replace("\\varepsilon", &if m.eps == 1 { "\\varepsilon".to_string() } else { format!("\\varepsilon^{{{}}}", m.eps) }));
    }
    for (g, k) in &m.even {
        f.push(pow_latex(gen_latex(g, nm), *k));
    }
    for (a, e) in &m.exp {
        let arg = if e.is_one() { nm.field(*a) } else { format!("{}{}", e, nm.field(*a)) };
        f.push(format!("e^{{{}}}", arg));
    }
    for g in &m.odd {
        f.push(gen_latex(g, nm));
    }
    f.join(" ")
}

pub fn to_latex(p: &DiffPoly) -> String {
    to_latex_with(p, &Names::infer(p))
}

pub fn to_latex_with(p: &DiffPoly, nm: &Names) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms.iter().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let body = mono_latex(m, nm);
        let num = a.numer().to_string();
        let den = a.denom().to_string();
        let top = match (body.is_empty(), a.numer().is_one()) {
            (true, _) => num,
            (false, true) => body,
            (false, false) => format!("{} {}", num, body),
        };
        if a.denom().is_one() {
            out.push_str(&top);
        } else {
            out.push_str(&format!("\\frac{{{}}}{{{}}}", top, den));
        }
    }
    out
}

pub fn gen_json(g: &Gen) -> Value {
    match *g {
        Gen::Jet { a, s } => json!({"u": [a + 1, s]}),
        Gen::Sigma { k, a, s } => json!({"sigma": [a + 1, k, s]}),
        Gen::OnePoint { a, p } => json!({"f": [a + 1, p]}),
        Gen::Phi { n, a, p } => json!({"Phi": [n, a + 1, p]}),
        Gen::EvenTime { a, p } => json!({"t": [a + 1, p]}),
        Gen::OddTime { k } => json!({"tau": [k]}),
        Gen::C0 => json!({"c0": []}),
    }
}

fn idx(v: &Value, i: usize) -> Option<u64> {
    v.get(i)?.as_u64()
}

pub fn gen_from_json(v: &Value) -> Option<Gen> {
    let obj = v.as_object()?;
    let (k, a) = obj.iter().next()?;
    let a1 = |i: usize| idx(a, i).and_then(|x| x.checked_sub(1));
    Some(match k.as_str() {
        "u" => Gen::Jet { a: a1(0)? as u8, s: idx(a, 1)? as u16 },
        "sigma" => Gen::Sigma { a: a1(0)? as u8, k: idx(a, 1)? as u16, s: idx(a, 2)? as u16 },
        "f" => Gen::OnePoint { a: a1(0)? as u8, p: idx(a, 1)? as u16 },
        "Phi" => Gen::Phi { n: idx(a, 0)? as u16, a: a1(1)? as u8, p: idx(a, 2)? as u16 },
        "t" => Gen::EvenTime { a: a1(0)? as u8, p: idx(a, 1)? as u16 },
        "tau" => Gen::OddTime { k: idx(a, 0)? as u16 },
        "c0" => Gen::C0,
        _ => return None,
    })
}

/// JSON terms `[coeff, even, odd, eps]`; exponentials appear in the even part
/// as `[{"exp": [field, "q"]}, 1]`.
pub fn to_json(p: &DiffPoly) -> Value {
    Value::Array(
        p.terms
            .iter()
            .map(|(m, c)| {
                let mut even: Vec<Value> = m.even.iter().map(|(g, k)| json!([gen_json(g), k])).collect();
                for (a, e) in &m.exp {
                    even.push(json!([{"exp": [a + 1, e.to_string()]}, 1]));
                }
                let odd: Vec<Value> = m.odd.iter().map(gen_json).collect();
                json!([q_to_string(c), even, odd, m.eps])
            })
            .collect(),
    )
}

fn parse_exp(s: &str) -> Option<ExpQ> {
    let q = parse_q(s)?;
    let n: i64 = q.numer().try_into().ok()?;
    let d: i64 = q.denom().try_into().ok()?;
    Some(ExpQ::new(n, d))
}

pub fn from_json(v: &Value) -> Option<DiffPoly> {
    let mut p = DiffPoly::zero();
    for t in v.as_array()? {
        let c: Q = match t.get(0)? {
            Value::String(s) => parse_q(s)?,
            Value::Number(n) => Q::from_integer(n.as_i64()?.into()),
            _ => return None,
        };
        let mut m = Mono::one();
        for e in t.get(1)?.as_array()? {
            let g = e.get(0)?;
            let k = e.get(1)?.as_u64()? as u32;
            if let Some(x) = g.get("exp") {
                let a = x.get(0)?.as_u64()?.checked_sub(1)? as u8;
                let q = match x.get(1)? {
                    Value::String(s) => parse_exp(s)?,
                    Value::Number(n) => ExpQ::from_integer(n.as_i64()?),
                    _ => return None,
                };
                for _ in 0..k {
                    let mut one = Mono::one();
                    one.exp.push((a, q));
                    m = super::mono::mul_mono(&m, &one)?.0;
                }
            } else {
                m.times_even(gen_from_json(g)?, k);
            }
        }
        let mut odd: OddPart = t.get(2)?.as_array()?.iter().map(gen_from_json).collect::<Option<_>>()?;
        let sign = match sort_odd(&mut odd) {
            Some(s) => s,
            None => continue,
        };
        m.odd = odd;
        m.eps = t.get(3).and_then(|e| e.as_i64()).unwrap_or(0) as i32;
        p.add_term(m, if sign { -c } else { c });
    }
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::gen::q;

    #[test]
    fn renderings() {
        let u = DiffPoly::jet(0, 0);
        let r2 = &(&u * &u).scale(&q(1, 2)) + &(&DiffPoly::eps_pow(2) * &DiffPoly::jet(0, 2)).scale(&q(1, 12));
        assert_eq!(to_text(&r2), "1/2*u^2 + 1/12*eps^2*u_xx");
        let l = to_latex(&r2);
        assert!(l.contains("\\frac{u^2}{2}"), "{}", l);
        assert!(l.contains("\\frac{\\varepsilon^{2} u''}{12}"), "{}", l);
        assert_eq!(to_text(&DiffPoly::jet(0, 4)), "u_(4x)");
        let p = &(&DiffPoly::theta(0, 0) * &DiffPoly::sigma(0, 3)) * &DiffPoly::exp(0, ExpQ::new(1, 1));
        assert_eq!(from_json(&to_json(&p)).unwrap(), p);
        assert_eq!(from_json(&to_json(&r2)).unwrap(), r2);
    }
}
