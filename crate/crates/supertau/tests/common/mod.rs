//! Random differential polynomials and the property checks shared by the
//! property suite and the acceptance run.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;
use supertau::jet::{antiderivative, dx_free, q, DiffPoly, Flow, Gen, Ring};
use supertau::variational::{dp_flow, kdv_pair, variational_derivative, LocalFunctional};

pub const FIELDS: usize = 2;

fn even_gen() -> impl Strategy<Value = Gen> {
    (0..FIELDS, 0..4usize).prop_map(|(a, s)| Gen::jet(a, s))
}

fn odd_gen() -> impl Strategy<Value = Gen> {
    (0..FIELDS, 0..4usize).prop_map(|(a, s)| Gen::theta(a, s))
}

fn product(gs: &[Gen]) -> DiffPoly {
    gs.iter().fold(DiffPoly::one(), |acc, g| &acc * &DiffPoly::gen(*g))
}

/// A term with exactly `odd` odd factors.
fn term(odd: usize) -> impl Strategy<Value = DiffPoly> {
    (
        -6i64..=6,
        1i64..=4,
        0i32..=2,
        prop::collection::vec(even_gen(), 0..=3),
        prop::collection::vec(odd_gen(), odd..=odd),
    )
        .prop_map(|(n, d, e, ev, od)| {
            let p = &product(&ev) * &product(&od);
            (&p * &DiffPoly::eps_pow(2 * e)).scale(&q(n, d))
        })
}

/// A polynomial homogeneous of odd degree `odd`.
pub fn poly(odd: usize) -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec(term(odd), 1..=4).prop_map(|ts| ts.iter().fold(DiffPoly::zero(), |a, t| &a + t))
}

/// A list of generators, mixed parity.
pub fn factors() -> impl Strategy<Value = Vec<Gen>> {
    prop::collection::vec(prop_oneof![even_gen(), odd_gen()], 1..=6)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), TestCaseError> {
    if ok {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg()))
    }
}

fn sign(odd_a: usize, odd_b: usize) -> i64 {
    if odd_a * odd_b % 2 == 1 {
        -1
    } else {
        1
    }
}

/// D(pq) = D(p)q + (−1)^{|D||p|} p D(q).
pub fn leibniz(d: &Flow, p: &DiffPoly, p_odd: usize, r: &DiffPoly) -> Result<(), TestCaseError> {
    let lhs = d.apply(&(p * r));
    let s = sign(if d.odd { 1 } else { 0 }, p_odd);
    let rhs = &(&d.apply(p) * r) + &(p * &d.apply(r)).scale_i(s);
    check(lhs == rhs, || format!("D = {}, p = {}, q = {}", d.name, p, r))
}

pub fn dx_flow() -> Flow {
    let ring = std::sync::Arc::new(Ring::free(FIELDS));
    let r = ring.clone();
    Flow::new("dx", false, ring, move |g| Some(r.dx(&DiffPoly::gen(*g))))
}

/// D_{P₁} of the KdV pair: an odd derivation of the one-field jet ring.
pub fn odd_flow() -> Flow {
    dp_flow(&kdv_pair().1, "D_P1").expect("D_P1")
}

/// Restrict a two-field polynomial to field 0.
pub fn one_field(p: &DiffPoly) -> DiffPoly {
    p.substitute(&|g| match *g {
        Gen::Jet { a: 1, .. } | Gen::Sigma { a: 1, .. } => Some(DiffPoly::zero()),
        _ => None,
    })
}

/// ∫ dx(p) = p − p(0).
pub fn antiderivative_inverts_dx(p: &DiffPoly) -> Result<(), TestCaseError> {
    let d = dx_free(p);
    let back = antiderivative(&d).map_err(|e| TestCaseError::fail(format!("{}: {}", p, e)))?;
    check(back == p.without_constant(), || format!("p = {}, got {}", p, back))
}

/// δ/δu and δ/δθ do not see total derivatives.
pub fn lift_independent(p: &DiffPoly, r: &DiffPoly) -> Result<(), TestCaseError> {
    let lifted = p + &dx_free(r);
    let (f, g) = (LocalFunctional::new(p.clone(), FIELDS), LocalFunctional::new(lifted, FIELDS));
    let (f, g) = match (f, g) {
        (Ok(f), Ok(g)) => (f, g),
        (a, b) => return Err(TestCaseError::fail(format!("{:?} {:?}", a.err(), b.err()))),
    };
    for a in 0..FIELDS {
        for odd in [false, true] {
            let x = variational_derivative(&f, odd, a).map_err(|e| TestCaseError::fail(e.to_string()))?;
            let y = variational_derivative(&g, odd, a).map_err(|e| TestCaseError::fail(e.to_string()))?;
            check(x == y, || format!("delta_{}{} differs for p = {}, q = {}", if odd { "theta" } else { "u" }, a, p, r))?;
        }
    }
    Ok(())
}

/// Any order of multiplication reaches the same normal form, up to the sign
/// of the permutation of odd factors; products associate.
pub fn confluent(gs: &[Gen], a: &DiffPoly, b: &DiffPoly, c: &DiffPoly) -> Result<(), TestCaseError> {
    let fwd = product(gs);
    let rev: Vec<Gen> = gs.iter().rev().copied().collect();
    let k = gs.iter().filter(|g| g.is_odd()).count();
    let s = if (k * k.saturating_sub(1) / 2) % 2 == 1 { -1 } else { 1 };
    check(fwd == product(&rev).scale_i(s), || format!("reversal of {:?}", gs))?;
    let nested = gs.iter().rev().fold(DiffPoly::one(), |acc, g| &DiffPoly::gen(*g) * &acc);
    check(fwd == nested, || format!("bracketing of {:?}", gs))?;
    check(&(a * b) * c == a * &(b * c), || format!("associativity on {}, {}, {}", a, b, c))
}
