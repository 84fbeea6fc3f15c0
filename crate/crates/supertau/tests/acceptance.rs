//! Acceptance run: one line per criterion, failing checks listed under it.

mod common;

use std::sync::Arc;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestRunner};
use supertau::frobenius::{builtin, compute_h, Cover};
use supertau::jet::{dx_free, q, qi, DiffPoly, ExpQ, Gen, Q};
use supertau::kdv::{kdv_r, series, Kdv};
use supertau::report::Check;
use supertau::variational::{check_poisson_pair, kdv_pair};
use supertau::virasoro::{
    a_equals_b, general_table, kdv_coefficients, test_monomials, verify_symmetry_commutation,
    verify_virasoro_algebra, Symmetries,
};
use supertau::Error;

const P: usize = 4;
const K: usize = 4;

fn pins() -> Vec<Q> {
    vec![qi(0), qi(1)]
}

fn ok(id: &str, f: impl FnOnce() -> Result<Option<String>, Error>) -> Check {
    Check::timed(id, f)
}

fn diff(id: &str, got: &DiffPoly, want: &DiffPoly) -> Check {
    ok(id, || Ok(if got == want { None } else { Some(format!("got {}, want {}", got, want)) }))
}

fn c1() -> Vec<Check> {
    let (p0, p1) = kdv_pair();
    check_poisson_pair("kdv", &p0, &p1)
}

fn u(s: usize) -> DiffPoly {
    DiffPoly::jet(0, s)
}

fn e(k: i32) -> DiffPoly {
    DiffPoly::eps_pow(k)
}

fn coeff(p: &DiffPoly, m: &DiffPoly) -> Q {
    let key = m.terms.keys().next().expect("monomial");
    p.terms.get(key).cloned().unwrap_or_default()
}

/// R₃ from (5/2)R₃′ = 𝒫₁R₂ by an ansatz in the four weight-six monomials.
fn r3_brute_force(r2: &DiffPoly) -> DiffPoly {
    let p1 = |f: &DiffPoly| {
        &(&(&u(0) * &dx_free(f)) + &(&u(1) * f).scale(&q(1, 2)))
            + &(&e(2) * &dx_free(&dx_free(&dx_free(f)))).scale(&q(1, 8))
    };
    let rhs = p1(r2).scale(&q(2, 5));
    let a = coeff(&rhs, &(&u(0).pow(2) * &u(1))) / qi(3);
    let b = coeff(&rhs, &(&e(2) * &(&u(0) * &u(3))));
    let c = (coeff(&rhs, &(&e(2) * &(&u(1) * &u(2)))) - &b) / qi(2);
    let d = coeff(&rhs, &(&e(4) * &u(5)));
    let r3 = &(&u(0).pow(3).scale(&a) + &(&e(2) * &(&u(0) * &u(2))).scale(&b))
        + &(&(&e(2) * &u(1).pow(2)).scale(&c) + &(&e(4) * &u(4)).scale(&d));
    assert_eq!(dx_free(&r3), rhs, "ansatz does not close");
    r3
}

fn c2() -> Vec<Check> {
    let r2 = &u(0).pow(2).scale(&q(1, 2)) + &(&e(2) * &u(2)).scale(&q(1, 12));
    vec![
        diff("R1", &kdv_r(1), &u(0)),
        diff("R2", &kdv_r(2), &r2),
        diff("R3", &kdv_r(3), &r3_brute_force(&r2)),
    ]
}

fn c3() -> Vec<Check> {
    let mut out = Vec::new();
    for name in ["onedim", "cp1"] {
        match Cover::new(builtin(name).unwrap(), 3) {
            Ok(c) => out.extend(c.check_commutativity(name)),
            Err(e) => out.push(ok(name, || Err(e))),
        }
    }
    out.extend(Kdv::new(3).check_commutativity());
    out
}

fn c4() -> Vec<Check> {
    let k = Kdv::new(2);
    series::check_identities(&k)
        .into_iter()
        .filter(|c| !c.id.ends_with("zero-curvature") && !c.id.ends_with("residue"))
        .collect()
}

fn c5() -> Vec<Check> {
    let k = Kdv::new(3);
    vec![series::check_zero_curvature(&k, 3, 3), series::check_residue(&k, 3, 3)]
}

fn c6() -> Vec<Check> {
    let spec = builtin("cp1").unwrap();
    let (v, uu) = (DiffPoly::jet(0, 0), DiffPoly::jet(1, 0));
    let eu = DiffPoly::exp(1, ExpQ::from_integer(1));
    let printed = [
        ((0, 0), uu.clone()),
        ((1, 0), v.clone()),
        ((0, 1), &uu * &v),
        ((1, 1), &v.pow(2).scale(&q(1, 2)) + &eu),
        ((0, 2), &(&(&v.pow(2) * &uu).scale(&q(1, 2)) + &(&uu * &eu)) - &eu.scale(&qi(2))),
        ((1, 2), &v.pow(3).scale(&q(1, 6)) + &(&v * &eu)),
    ];
    let mut out = vec![ok("cp1/h", || {
        let h = compute_h(&spec, 2)?;
        for ((a, p), want) in &printed {
            if h.get(*a, *p) != want {
                return Ok(Some(format!("h_{{{},{}}} = {}, want {}", a + 1, p, h.get(*a, *p), want)));
            }
        }
        Ok(None)
    })];
    out.push(ok("cp1/resonances", || {
        let r: Vec<(usize, usize)> = spec.resonances(6).into_iter().map(|(a, p)| (a + 1, p)).collect();
        Ok(if r == vec![(1, 1)] { None } else { Some(format!("{:?}", r)) })
    }));
    out.push(ok("cp1/resonant-phi-rule", || {
        let c = Cover::new(builtin("cp1").unwrap(), 3)?;
        for n in 0..=3 {
            let want = &(&v * &c.ring.sigma_jet(0, n, 1)) + &(&uu * &c.ring.sigma_jet(1, n, 1));
            let got = c.ring.dx(&DiffPoly::gen(Gen::phi(0, 1, n)));
            if got != want {
                return Ok(Some(format!("n = {}: {}", n, &got - &want)));
            }
        }
        Ok(None)
    }));
    out
}

fn c7() -> Vec<Check> {
    ["onedim", "cp1"]
        .iter()
        .map(|name| match Cover::new(builtin(name).unwrap(), 2) {
            Ok(c) => c.check_tau_symmetry(name, 4),
            Err(e) => ok(name, || Err(e)),
        })
        .collect()
}

fn c8() -> Vec<Check> {
    let mut out = Vec::new();
    for name in ["onedim", "cp1"] {
        let cover = Cover::new(builtin(name).unwrap(), P + 2).unwrap();
        let table = |m: i64| general_table(&cover, m, P + 2);
        let mons = test_monomials(cover.spec().n, P, K);
        out.extend(verify_virasoro_algebra(name, &[-1, 0, 1], &table, &mons, None, &pins()));
    }
    let table = |m: i64| Ok(kdv_coefficients(m, P + 2));
    out.extend(verify_virasoro_algebra("kdv", &[-1, 0, 1, 2], &table, &test_monomials(1, P, K), None, &pins()));
    out
}

fn c9() -> Vec<Check> {
    let mut out = Vec::new();
    for name in ["onedim", "cp1"] {
        let cover = Arc::new(Cover::new(builtin(name).unwrap(), P + 2).unwrap());
        let cv = cover.clone();
        let table = move |m: i64| general_table(&cv, m, P + 2);
        for m in -1..=1 {
            match table(m) {
                Ok(t) => out.push(a_equals_b(&cover, &t, &format!("{}/A=B/m={}", name, m))),
                Err(e) => out.push(ok(name, || Err(e))),
            }
        }
        let sym = Symmetries::new(cover, P, K);
        out.extend(verify_symmetry_commutation(name, &sym, &[-1, 0, 1], &table, 2, &pins()));
    }
    let kdv = Arc::new(Kdv::new(P + 2));
    let table = |m: i64| Ok(kdv_coefficients(m, P + 2));
    let sym = Symmetries::new(kdv, P, K);
    out.extend(verify_symmetry_commutation("kdv", &sym, &[-1, 0, 1, 2], &table, 2, &pins()));
    out
}

fn c10() -> Vec<Check> {
    let k = Kdv::new(3);
    let onedim = Cover::new(builtin("onedim").unwrap(), 3).unwrap();
    let mut out = k.check_dispersionless(&onedim);
    out.extend(k.check_bihamiltonian());
    out
}

fn c11() -> Vec<Check> {
    use common::*;
    let run = |id: &str, f: &dyn Fn(&mut TestRunner) -> Result<(), String>| {
        ok(id, || {
            let mut r = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
            Ok(f(&mut r).err())
        })
    };
    let st = |e: proptest::test_runner::TestError<_>| format!("{}", e);
    vec![
        run("leibniz/dx", &|r| r.run(&(poly(1), poly(2)), |(p, s)| leibniz(&dx_flow(), &p, 1, &s)).map_err(st)),
        run("leibniz/odd", &|r| {
            r.run(&(poly(1), poly(0)), |(p, s)| leibniz(&odd_flow(), &one_field(&p), 1, &one_field(&s)))
                .map_err(|e| format!("{}", e))
        }),
        run("antiderivative-dx", &|r| r.run(&poly(1), |p| antiderivative_inverts_dx(&p)).map_err(|e| format!("{}", e))),
        run("lift-independence", &|r| {
            r.run(&(poly(2), poly(2)), |(p, s)| lift_independent(&p, &s)).map_err(|e| format!("{}", e))
        }),
        run("confluence", &|r| {
            r.run(&(factors(), poly(1), poly(0), poly(1)), |(g, a, b, c)| confluent(&g, &a, &b, &c))
                .map_err(|e| format!("{}", e))
        }),
    ]
}

type Criterion = (usize, &'static str, u64, fn() -> Vec<Check>);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "KdV bihamiltonian pair: Schouten brackets vanish", 5, c1),
        (2, "Gelfand-Dickey table R1, R2, R3", 1, c2),
        (3, "flow commutativity, indices <= 3 (onedim, CP1, KdV)", 120, c3),
        (4, "KdV generating-series identities", 60, c4),
        (5, "zero curvature and residue consistency, n, m <= 3", 60, c5),
        (6, "CP1 golden h-table, resonance, resonant Phi rule", 10, c6),
        (7, "tau symmetry of h, p + q <= 4", 30, c7),
        (8, "Virasoro algebra, symbolic c0", 60, c8),
        (9, "Virasoro symmetry commutation at (P,K) = (4,4), A = B", 300, c9),
        (10, "dispersionless limit and bihamiltonian odd flows", 30, c10),
        (11, "property suites, 1000 cases each", 120, c11),
    ];
    let filter: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (n, what, budget, run) in criteria {
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let t = Instant::now();
        let checks = run();
        let dt = t.elapsed();
        let bad: Vec<&Check> = checks.iter().filter(|c| !c.passed()).collect();
        let slow = dt > Duration::from_secs(budget);
        let pass = bad.is_empty() && !slow && !checks.is_empty();
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:2}: {} {} ({} checks, {:.1}s of {}s){}",
            n,
            if pass { "PASS" } else { "FAIL" },
            what,
            checks.len(),
            dt.as_secs_f64(),
            budget,
            if slow { " over time budget" } else { "" }
        );
        for c in bad {
            let res: String = c.residue.as_deref().unwrap_or("").chars().take(160).collect();
            println!("    {:?} {}: {}", c.status, c.id, res);
            if let Some(note) = &c.note {
                println!("      {}", note);
            }
        }
    }
    if failed > 0 {
        println!("{} criteria failed", failed);
        std::process::exit(1);
    }
}
