//! Command line: `supertau <verb> <target> [options]`.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage error,
//! 3 invalid input (spec file, option values).

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, ValueEnum};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::frobenius::spec::{CP1_JSON, ONEDIM_JSON};
use crate::frobenius::{compute_h, verify_h, Cover, FrobeniusSpec};
use crate::jet::fmt::{self, Names};
use crate::jet::gen::{parse_q, q_to_string};
use crate::jet::{qi, DiffPoly, Gen, Q};
use crate::kdv::{kdv_r, series, Kdv};
use crate::report::{Check, Report};
use crate::variational::{check_poisson_pair, kdv_pair};
use crate::virasoro::{
    a_equals_b, general_table, kdv_coefficients, test_monomials, verify_euler_omega_identity,
    verify_symmetry_commutation, verify_virasoro_algebra, Idx, Symmetries, VirasoroCoefficients,
};
use crate::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Verb {
    /// Check the input data (spec identities, supplied tables).
    Validate,
    /// Compute a table and print it.
    Compute,
    /// Run verification suites.
    Verify,
    /// Dispersionless limit checks (KdV against the one-dimensional cover).
    Limit,
    /// Like compute, JSON by default.
    Export,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Target {
    Spec,
    H,
    Omega,
    Phi,
    Delta,
    Flows,
    Kdv,
    Virasoro,
    TauCover,
}

impl Target {
    pub fn name(&self) -> String {
        self.to_possible_value().map(|v| v.get_name().to_string()).unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Latex,
}

#[derive(Debug, Parser)]
#[command(name = "supertau", version, about = "Super tau-covers of bihamiltonian hierarchies, computed and verified exactly")]
pub struct Command {
    #[arg(value_enum)]
    pub verb: Verb,
    #[arg(value_enum)]
    pub target: Target,
    /// Spec file, or a built-in name: onedim, cp1 (and kdv for virasoro).
    #[arg(long, default_value = "onedim")]
    pub spec: String,
    /// Highest level p of h, Ω, Φ and of the t-flows.
    #[arg(long, default_value_t = 3)]
    pub pmax: usize,
    /// Highest odd index k.
    #[arg(long, default_value_t = 3)]
    pub kmax: usize,
    /// Virasoro truncation in the even times.
    #[arg(long = "P", default_value_t = 4)]
    pub p_trunc: usize,
    /// Virasoro truncation in the odd times.
    #[arg(long = "K", default_value_t = 4)]
    pub k_trunc: usize,
    /// Highest flow index in the Virasoro symmetry checks.
    #[arg(long, default_value_t = 2)]
    pub level: usize,
    /// Virasoro indices m.
    #[arg(long = "m", num_args = 1.., allow_negative_numbers = true)]
    pub ms: Vec<i64>,
    /// Zero-curvature ranges.
    #[arg(long, default_value_t = 3)]
    pub nmax: usize,
    #[arg(long, default_value_t = 3)]
    pub mmax: usize,
    /// "symbolic" or a rational value for c0.
    #[arg(long, default_value = "symbolic")]
    pub c0: String,
    /// Suite name for verify, "all", or "list".
    #[arg(long, default_value = "all")]
    pub suite: String,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Omit the timestamp and per-check runtimes, making reports reproducible.
    #[arg(long)]
    pub no_timestamp: bool,
}

/// What a command produced.
pub enum Output {
    Report(Report),
    Table(Table),
    Text(String),
}

pub struct Outcome {
    pub output: Output,
    pub code: i32,
}

/// A computed table: labelled polynomials or scalars.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub name: String,
    pub rows: Vec<Row>,
    pub json: Option<Value>,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub label: String,
    pub latex: String,
    pub value: Cell,
}

#[derive(Clone, Debug)]
pub enum Cell {
    Poly(DiffPoly),
    Scalar(Q),
}

impl Table {
    fn new(name: &str) -> Table {
        Table { name: name.into(), ..Table::default() }
    }

    fn poly(&mut self, label: String, latex: String, p: DiffPoly) {
        self.rows.push(Row { label, latex, value: Cell::Poly(p) });
    }

    pub fn to_text(&self, nm: &Names) -> String {
        let mut s = String::new();
        for r in &self.rows {
            let v = match &r.value {
                Cell::Poly(p) => fmt::to_text_with(p, nm),
                Cell::Scalar(c) => q_to_string(c),
            };
            s.push_str(&format!("{} = {}\n", r.label, v));
        }
        s
    }

    pub fn to_latex(&self, nm: &Names) -> String {
        if self.rows.is_empty() {
            return String::new();
        }
        let lines: Vec<String> = self
            .rows
            .iter()
            .map(|r| {
                let v = match &r.value {
                    Cell::Poly(p) => fmt::to_latex_with(p, nm),
                    Cell::Scalar(c) => latex_q(c),
                };
                format!("&{} = {}", r.latex, v)
            })
            .collect();
        format!("\\begin{{align*}}\n{}\n\\end{{align*}}\n", lines.join(",\\\\\n"))
    }

    pub fn to_json(&self) -> Value {
        if let Some(v) = &self.json {
            return v.clone();
        }
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let v = match &r.value {
                    Cell::Poly(p) => fmt::to_json(p),
                    Cell::Scalar(c) => json!(q_to_string(c)),
                };
                json!({"label": r.label, "value": v})
            })
            .collect();
        json!({"table": self.name, "entries": rows})
    }
}

fn latex_q(c: &Q) -> String {
    if c.is_integer() {
        c.to_string()
    } else {
        let sign = if *c < Q::from_integer(0.into()) { "-" } else { "" };
        format!("{}\\frac{{{}}}{{{}}}", sign, c.numer().magnitude(), c.denom())
    }
}

/// The source of hierarchy data named by `--spec`.
enum Source {
    Frobenius(FrobeniusSpec, String),
    Kdv,
}

impl Command {
    fn source(&self) -> Result<Source, Error> {
        let name = self.spec.trim_end_matches(".json");
        let stem = std::path::Path::new(name).file_name().and_then(|s| s.to_str()).unwrap_or(name);
        let path = std::path::Path::new(&self.spec);
        let text = if path.is_file() {
            std::fs::read_to_string(path).map_err(|e| Error::Validation(format!("{}: {}", self.spec, e)))?
        } else {
            match stem {
                "onedim" => ONEDIM_JSON.to_string(),
                "cp1" => CP1_JSON.to_string(),
                "kdv" => return Ok(Source::Kdv),
                _ => return Err(Error::Validation(format!("no spec file or built-in named {:?}", self.spec))),
            }
        };
        let hash = hex(&Sha256::digest(text.as_bytes()));
        Ok(Source::Frobenius(FrobeniusSpec::from_json(&text, stem)?, hash))
    }

    fn frobenius(&self) -> Result<(FrobeniusSpec, String), Error> {
        match self.source()? {
            Source::Frobenius(s, h) => Ok((s, h)),
            Source::Kdv => Err(Error::Validation("this target needs a Frobenius spec, not kdv".into())),
        }
    }

    fn c0(&self) -> Result<Option<Q>, Error> {
        if self.c0 == "symbolic" {
            Ok(None)
        } else {
            parse_q(&self.c0).map(Some).ok_or_else(|| Error::Validation(format!("--c0 expects \"symbolic\" or a rational, got {:?}", self.c0)))
        }
    }

    fn format(&self) -> Format {
        self.format.unwrap_or(if self.verb == Verb::Export { Format::Json } else { Format::Text })
    }
}

fn hex(b: &[u8]) -> String {
    b.iter().map(|x| format!("{:02x}", x)).collect()
}

/// Shared state for suites.
pub struct Ctx<'a> {
    pub cmd: &'a Command,
    spec: Option<(FrobeniusSpec, String)>,
    kdv: bool,
}

impl<'a> Ctx<'a> {
    fn spec(&self) -> Result<&FrobeniusSpec, Error> {
        self.spec.as_ref().map(|s| &s.0).ok_or_else(|| Error::Validation("this suite needs a Frobenius spec".into()))
    }

    fn cover(&self, level: usize) -> Result<Cover, Error> {
        self.spec()?;
        Cover::new(self.cmd.frobenius()?.0, level)
    }

    fn name(&self) -> String {
        if self.kdv {
            "kdv".into()
        } else {
            self.spec.as_ref().map(|s| s.0.name.clone()).unwrap_or_default()
        }
    }

    fn pins(&self) -> Result<(Option<Q>, Vec<Q>), Error> {
        Ok(match self.cmd.c0()? {
            Some(v) => (Some(v), Vec::new()),
            None => (None, vec![qi(0), qi(1)]),
        })
    }
}

type SuiteFn = fn(&Ctx) -> Result<Vec<Check>, Error>;

/// One entry of the suite catalog.
pub struct Suite {
    pub target: Target,
    pub name: &'static str,
    pub about: &'static str,
    /// Runs on the KdV hierarchy rather than a Frobenius spec.
    pub kdv: bool,
    pub run: SuiteFn,
}

fn only(checks: Vec<Check>, key: &str) -> Vec<Check> {
    checks.into_iter().filter(|c| c.id.contains(key)).collect()
}

pub const SUITES: &[Suite] = &[
    Suite { target: Target::Spec, name: "identities", about: "WDVV, homogeneity and metric identities", kdv: false, run: |c| {
        let s = c.spec()?;
        Ok(s.identity_checks().into_iter().map(|(id, r)| Check::timed(format!("{}/spec/{}", s.name, id), || Ok(r))).collect())
    } },
    Suite { target: Target::H, name: "conditions", about: "h_{a,p} satisfy recursion, flatness, homogeneity, normalisation", kdv: false, run: |c| {
        let s = c.spec()?;
        let t = compute_h(s, c.cmd.pmax)?;
        Ok(verify_h(s, &t).into_iter().map(|(id, r)| Check::timed(format!("{}/h/{}", s.name, id), || Ok(r))).collect())
    } },
    Suite { target: Target::Omega, name: "two-point", about: "Omega divisible, symmetric, with the right initial row", kdv: false, run: |c| {
        Ok(only(c.cover(c.cmd.pmax)?.verify_all(&c.name()), "/omega/"))
    } },
    Suite { target: Target::Phi, name: "derivative", about: "dx Phi = dh/dtau", kdv: false, run: |c| {
        Ok(only(c.cover(c.cmd.pmax)?.check_phi_delta(&c.name()), "phi"))
    } },
    Suite { target: Target::Delta, name: "derivative", about: "dx Delta = d2h/dtau dtau", kdv: false, run: |c| {
        Ok(only(c.cover(c.cmd.pmax)?.check_phi_delta(&c.name()), "delta"))
    } },
    Suite { target: Target::Flows, name: "commute", about: "all t- and tau-flows commute", kdv: false, run: |c| {
        Ok(c.cover(c.cmd.pmax)?.check_commutativity(&c.name()))
    } },
    Suite { target: Target::Flows, name: "compatible", about: "flows commute with dx", kdv: false, run: |c| {
        Ok(c.cover(c.cmd.pmax)?.check_compatibility(&c.name()))
    } },
    Suite { target: Target::Flows, name: "tau-symmetry", about: "dh_{a,p}/dt^{b,q} symmetric, p + q <= pmax + 1", kdv: false, run: |c| {
        Ok(vec![c.cover(c.cmd.pmax)?.check_tau_symmetry(&c.name(), c.cmd.pmax + 1)])
    } },
    Suite { target: Target::TauCover, name: "cover", about: "the full super tau-cover suite", kdv: false, run: |c| {
        Ok(c.cover(c.cmd.pmax)?.verify_all(&c.name()))
    } },
    Suite { target: Target::Kdv, name: "bihamiltonian", about: "Schouten brackets of P0, P1; tau0, tau1 are D_P0, D_P1", kdv: true, run: |c| {
        let (p0, p1) = kdv_pair();
        let mut v = check_poisson_pair("kdv", &p0, &p1);
        v.extend(Kdv::new(c.cmd.pmax).check_bihamiltonian());
        Ok(v)
    } },
    Suite { target: Target::Kdv, name: "r-recursion", about: "Gelfand-Dickey recursion", kdv: true, run: |c| {
        Ok(vec![Kdv::check_r_recursion(2 * c.cmd.pmax + 2)])
    } },
    Suite { target: Target::Kdv, name: "densities", about: "Omega and Phi", kdv: true, run: |c| Ok(Kdv::new(c.cmd.pmax).check_densities()) },
    Suite { target: Target::Kdv, name: "commute", about: "all t- and tau-flows commute", kdv: true, run: |c| {
        Ok(Kdv::new(c.cmd.pmax).check_commutativity())
    } },
    Suite { target: Target::Kdv, name: "compatible", about: "flows commute with dx", kdv: true, run: |c| {
        Ok(Kdv::new(c.cmd.pmax).check_compatibility())
    } },
    Suite { target: Target::Kdv, name: "series", about: "generating-series identities", kdv: true, run: |c| {
        let k = Kdv::new(c.cmd.pmax.min(2));
        Ok(series::check_identities(&k).into_iter().filter(|c| !c.id.ends_with("zero-curvature") && !c.id.ends_with("residue")).collect())
    } },
    Suite { target: Target::Kdv, name: "zero-curvature", about: "zero curvature and residue consistency for m <= mmax, n <= nmax", kdv: true, run: |c| {
        let k = Kdv::new(c.cmd.nmax.max(c.cmd.mmax));
        Ok(vec![series::check_zero_curvature(&k, c.cmd.mmax, c.cmd.nmax), series::check_residue(&k, c.cmd.mmax, c.cmd.nmax)])
    } },
    Suite { target: Target::Virasoro, name: "euler-identity", about: "the tables satisfy the Euler identity for Omega", kdv: false, run: |c| {
        let (cmd, pmax) = (c.cmd, c.cmd.p_trunc + 2);
        let cover = c.cover(c.cmd.p_trunc + 2)?;
        let om = |x: Idx, y: Idx| cover.omega(x.0, x.1, y.0, y.1);
        ms(cmd, false)
            .into_iter()
            .map(|m| {
                let t = general_table(&cover, m, pmax)?;
                Ok(verify_euler_omega_identity(cover.spec(), &om, &t, pmax, &format!("{}/euler/L{}", c.name(), m)))
            })
            .collect()
    } },
    Suite { target: Target::Virasoro, name: "algebra", about: "[L_m, L_n] = (m - n) L_{m+n} on the truncated times", kdv: false, run: |c| {
        let (c0, pins) = c.pins()?;
        let cover = c.cover(c.cmd.p_trunc + 2)?;
        let pmax = c.cmd.p_trunc + 2;
        let table = |m: i64| general_table(&cover, m, pmax);
        let mons = test_monomials(cover.spec().n, c.cmd.p_trunc, c.cmd.k_trunc);
        Ok(verify_virasoro_algebra(&c.name(), &ms(c.cmd, false), &table, &mons, c0.as_ref(), &pins))
    } },
    Suite { target: Target::Virasoro, name: "algebra", about: "closed-form KdV operators", kdv: true, run: |c| {
        let (c0, pins) = c.pins()?;
        let pmax = c.cmd.p_trunc + 2;
        let table = |m: i64| Ok(kdv_coefficients(m, pmax));
        let mons = test_monomials(1, c.cmd.p_trunc, c.cmd.k_trunc);
        Ok(verify_virasoro_algebra("kdv", &ms(c.cmd, true), &table, &mons, c0.as_ref(), &pins))
    } },
    Suite { target: Target::Virasoro, name: "a-equals-b", about: "the A = B identities for m in {-1, 0, 1}", kdv: false, run: |c| {
        let cover = c.cover(c.cmd.p_trunc + 2)?;
        let mut out = Vec::new();
        for m in ms(c.cmd, false).into_iter().filter(|m| (-1..=1).contains(m)) {
            let t = general_table(&cover, m, c.cmd.p_trunc + 2)?;
            out.push(a_equals_b(&cover, &t, &format!("{}/A=B/m={}", c.name(), m)));
        }
        Ok(out)
    } },
    Suite { target: Target::Virasoro, name: "symmetries", about: "s_m commute with t, tau and close on themselves", kdv: false, run: |c| {
        let (c0, pins) = c.pins()?;
        let cover = Arc::new(c.cover(c.cmd.p_trunc + 2)?);
        let pmax = c.cmd.p_trunc + 2;
        let cv = cover.clone();
        let table = move |m: i64| general_table(&cv, m, pmax);
        let mut sym = Symmetries::new(cover, c.cmd.p_trunc, c.cmd.k_trunc);
        sym.c0 = c0;
        Ok(verify_symmetry_commutation(&c.name(), &sym, &ms(c.cmd, false), &table, c.cmd.level, &pins))
    } },
    Suite { target: Target::Virasoro, name: "symmetries", about: "KdV s_m commute with t, tau and close on themselves", kdv: true, run: |c| {
        let (c0, pins) = c.pins()?;
        let pmax = c.cmd.p_trunc + 2;
        let table = move |m: i64| Ok(kdv_coefficients(m, pmax));
        let mut sym = Symmetries::new(Arc::new(Kdv::new(pmax)), c.cmd.p_trunc, c.cmd.k_trunc);
        sym.c0 = c0;
        Ok(verify_symmetry_commutation("kdv", &sym, &ms(c.cmd, true), &table, c.cmd.level, &pins))
    } },
];

fn ms(cmd: &Command, kdv: bool) -> Vec<i64> {
    if !cmd.ms.is_empty() {
        let mut v = cmd.ms.clone();
        v.sort();
        v.dedup();
        v
    } else if kdv {
        vec![-1, 0, 1, 2]
    } else {
        vec![-1, 0, 1]
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn main_with_args(args: impl IntoIterator<Item = String>) -> i32 {
    let cmd = match Command::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    if let Some(n) = std::env::var("SUPERTAU_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match run(&cmd) {
        Ok(o) => match emit(&cmd, &o.output) {
            Ok(()) => o.code,
            Err(e) => {
                eprintln!("error: {}", e);
                3
            }
        },
        Err(e) => {
            eprintln!("error: {}", e);
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Unsupported(_) => 2,
        Error::Validation(_) | Error::Io(_) => 3,
        _ => 1,
    }
}

fn emit(cmd: &Command, o: &Output) -> Result<(), Error> {
    let nm = match cmd.source() {
        Ok(Source::Frobenius(s, _)) => s.names(),
        _ => Names::default_for(1),
    };
    let text = match (o, cmd.format()) {
        (Output::Text(s), _) => s.clone(),
        (Output::Report(r), Format::Json) => serde_json::to_string_pretty(r).expect("report serializes") + "\n",
        (Output::Report(r), _) => r.to_text(),
        (Output::Table(t), Format::Json) => {
            if t.rows.is_empty() && t.json.is_none() {
                String::new()
            } else {
                serde_json::to_string_pretty(&t.to_json()).expect("table serializes") + "\n"
            }
        }
        (Output::Table(t), Format::Latex) => t.to_latex(&nm),
        (Output::Table(t), Format::Text) => t.to_text(&nm),
    };
    match &cmd.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {}", p.display(), e))),
        None => {
            print!("{}", text);
            Ok(())
        }
    }
}

pub fn run(cmd: &Command) -> Result<Outcome, Error> {
    cmd.c0()?;
    match cmd.verb {
        Verb::Compute | Verb::Export => Ok(Outcome { output: Output::Table(compute(cmd)?), code: 0 }),
        Verb::Validate => {
            let target = match cmd.target {
                Target::H => Target::H,
                Target::Virasoro => Target::Virasoro,
                _ => Target::Spec,
            };
            let suite = match target {
                Target::Virasoro => "euler-identity",
                _ => "all",
            };
            report(cmd, target, suite)
        }
        Verb::Verify => {
            if cmd.suite == "list" {
                return Ok(Outcome { output: Output::Text(catalog()), code: 0 });
            }
            report(cmd, cmd.target, &cmd.suite)
        }
        Verb::Limit => {
            if cmd.target != Target::Kdv {
                return Err(Error::Unsupported("limit applies to the kdv target".into()));
            }
            let k = Kdv::new(cmd.pmax);
            let onedim = Cover::new(crate::frobenius::builtin("onedim").expect("built-in"), cmd.pmax)?;
            let mut r = Report::new("limit/kdv").env("pmax", cmd.pmax);
            r.extend(k.check_dispersionless(&onedim));
            Ok(finish(cmd, r))
        }
    }
}

fn catalog() -> String {
    let mut s = String::new();
    for x in SUITES {
        let t = x.target.name();
        s.push_str(&format!("{:10} {:15} {}{}\n", t, x.name, x.about, if x.kdv { " [kdv]" } else { "" }));
    }
    s
}

fn report(cmd: &Command, target: Target, suite: &str) -> Result<Outcome, Error> {
    let (spec, kdv) = match (target, cmd.source()?) {
        (Target::Kdv, _) => (None, true),
        (_, Source::Kdv) => (None, true),
        (_, Source::Frobenius(s, h)) => (Some((s, h)), false),
    };
    let hash = spec.as_ref().map(|s| s.1.clone());
    let ctx = Ctx { cmd, spec, kdv };
    let chosen: Vec<&Suite> =
        SUITES.iter().filter(|s| s.target == target && s.kdv == kdv && (suite == "all" || s.name == suite)).collect();
    if chosen.is_empty() {
        return Err(Error::Unsupported(format!("no suite {:?} for this target; try --suite list", suite)));
    }
    let mut r = Report::new(format!("{}/{}", target.name(), suite))
        .env("spec", ctx.name())
        .env("pmax", cmd.pmax)
        .env("kmax", cmd.kmax)
        .env("P", cmd.p_trunc)
        .env("K", cmd.k_trunc)
        .env("c0", &cmd.c0);
    if let Some(h) = hash {
        r = r.env("spec_sha256", h);
    }
    if target == Target::Virasoro {
        r = r.env("m", ms(cmd, kdv)).env("level", cmd.level);
    }
    if target == Target::Kdv {
        r = r.env("nmax", cmd.nmax).env("mmax", cmd.mmax);
    }
    for s in chosen {
        let checks = (s.run)(&ctx)?;
        r.extend(checks);
    }
    Ok(finish(cmd, r))
}

fn finish(cmd: &Command, mut r: Report) -> Outcome {
    r.sort();
    let code = if r.all_passed() { 0 } else { 1 };
    if cmd.no_timestamp {
        r = r.without_runtimes();
    } else {
        r.stamp();
    }
    Outcome { output: Output::Report(r), code }
}

fn gen_label(g: &Gen, nm: &Names) -> (String, String) {
    let p = DiffPoly::gen(*g);
    (fmt::to_text_with(&p, nm), fmt::to_latex_with(&p, nm))
}

fn flows_table(t: &mut Table, targets: &[Gen], flows: Vec<Arc<crate::jet::Flow>>, nm: &Names) {
    for f in flows {
        for g in targets.iter().copied() {
            let (l, x) = gen_label(&g, nm);
            t.poly(format!("d {} / d {}", l, f.name), format!("\\frac{{\\partial {}}}{{\\partial {}}}", x, f.name), f.apply_gen(g));
        }
    }
}

fn compute(cmd: &Command) -> Result<Table, Error> {
    let (pmax, kmax) = (cmd.pmax, cmd.kmax);
    let src = cmd.source()?;
    if let (Source::Kdv, t) = (&src, cmd.target) {
        if !matches!(t, Target::Kdv | Target::Virasoro | Target::Flows | Target::Omega | Target::Phi | Target::TauCover) {
            return Err(Error::Unsupported(format!("{:?} needs a Frobenius spec", t)));
        }
    }
    let kdv_mode = matches!(src, Source::Kdv) || cmd.target == Target::Kdv;
    let nm = match &src {
        Source::Frobenius(s, _) if !kdv_mode => s.names(),
        _ => Names::default_for(1),
    };
    let mut t = Table::new(&cmd.target.name());
    if kdv_mode {
        let k = Kdv::new(pmax.max(kmax));
        match cmd.target {
            Target::Kdv => {
                for n in 0..=pmax + 2 {
                    t.poly(format!("R_{}", n), format!("R_{{{}}}", n), kdv_r(n));
                }
            }
            Target::Omega => {
                for a in 0..=pmax {
                    for b in a..=pmax {
                        t.poly(format!("Omega_{{{},{}}}", a, b), format!("\\Omega_{{{},{}}}", a, b), k.omega(a, b));
                    }
                }
            }
            Target::Phi => {
                for a in 0..=pmax {
                    for n in 0..=kmax {
                        t.poly(format!("Phi^{}_{}", n, a), format!("\\Phi^{{{}}}_{{{}}}", n, a), k.phi(a, n));
                    }
                }
            }
            Target::Virasoro => virasoro_table(&mut t, cmd, &|m| Ok(kdv_coefficients(m, cmd.p_trunc + 2)), true)?,
            _ => {
                let mut fl: Vec<_> = (0..=pmax).map(|n| k.t_flow(n)).collect();
                fl.extend((0..=kmax).map(|n| k.tau_flow(n)));
                flows_table(&mut t, &k.targets(), fl, &nm);
            }
        }
        return Ok(t);
    }
    let (spec, _) = match src {
        Source::Frobenius(s, h) => (s, h),
        Source::Kdv => unreachable!(),
    };
    let n = spec.n;
    match cmd.target {
        Target::Spec => {
            let mut rows = Vec::new();
            rows.push(("F".to_string(), "F".to_string(), spec.potential.clone()));
            for a in 0..n {
                rows.push((format!("E^{}", a + 1), format!("E^{{{}}}", a + 1), spec.euler[a].clone()));
            }
            for a in 0..n {
                for b in 0..n {
                    rows.push((format!("g^{{{}{}}}", a + 1, b + 1), format!("g^{{{}{}}}", a + 1, b + 1), spec.g[a][b].clone()));
                }
            }
            for (l, x, p) in rows {
                t.poly(l, x, p);
            }
            for a in 0..n {
                t.rows.push(Row { label: format!("mu_{}", a + 1), latex: format!("\\mu_{{{}}}", a + 1), value: Cell::Scalar(spec.mu[a].clone()) });
            }
        }
        Target::H => {
            let h = compute_h(&spec, pmax)?;
            for p in 0..=pmax {
                for a in 0..n {
                    t.poly(format!("h_{{{},{}}}", a + 1, p), format!("h_{{{},{}}}", a + 1, p), h.get(a, p).clone());
                }
            }
        }
        Target::Omega => {
            let c = Cover::new(spec, pmax)?;
            for (a, p) in crate::virasoro::indices(n, pmax) {
                for (b, q) in crate::virasoro::indices(n, pmax) {
                    if (b, q) >= (a, p) {
                        let l = format!("{},{};{},{}", a + 1, p, b + 1, q);
                        t.poly(format!("Omega_{{{}}}", l), format!("\\Omega_{{{}}}", l), c.omega(a, p, b, q));
                    }
                }
            }
        }
        Target::Phi | Target::Delta => {
            let c = Cover::new(spec, pmax.max(kmax))?;
            for (a, p) in crate::virasoro::indices(n, pmax) {
                for m in 0..=kmax {
                    if cmd.target == Target::Phi {
                        let l = format!("{},{}", a + 1, p);
                        t.poly(format!("Phi^{}_{{{}}}", m, l), format!("\\Phi^{{{}}}_{{{}}}", m, l), c.phi(a, p, m));
                    } else {
                        for k in 0..=kmax {
                            let l = format!("{},{}", a + 1, p);
                            t.poly(format!("Delta^{{{},{}}}_{{{}}}", k, m, l), format!("\\Delta^{{{},{}}}_{{{}}}", k, m, l), c.delta(a, p, k, m));
                        }
                    }
                }
            }
        }
        Target::Flows | Target::TauCover => {
            let c = Cover::new(spec, pmax.max(kmax))?;
            let mut fl = Vec::new();
            for a in 0..n {
                fl.extend((0..=pmax).map(|q| c.t_flow(a, q)));
            }
            fl.extend((0..=kmax).map(|k| c.tau_flow(k)));
            flows_table(&mut t, &c.targets(), fl, &nm);
            if cmd.target == Target::TauCover {
                for (g, p) in &c.local {
                    let (l, x) = gen_label(g, &nm);
                    t.poly(l, x, p.clone());
                }
            }
        }
        Target::Virasoro => {
            let c = Cover::new(spec, cmd.p_trunc + 2)?;
            virasoro_table(&mut t, cmd, &|m| general_table(&c, m, cmd.p_trunc + 2), false)?;
        }
        Target::Kdv => unreachable!(),
    }
    Ok(t)
}

fn virasoro_table(
    t: &mut Table,
    cmd: &Command,
    table: &dyn Fn(i64) -> Result<VirasoroCoefficients, Error>,
    kdv: bool,
) -> Result<(), Error> {
    let mut docs = Vec::new();
    for m in ms(cmd, kdv) {
        let c = table(m)?;
        let idx = |i: &Idx| format!("{},{}", i.0 + 1, i.1);
        for (key, map) in [("a", &c.a), ("b", &c.b), ("c", &c.c)] {
            for ((x, y), v) in map {
                let l = format!("L{} {}[{};{}]", m, key, idx(x), idx(y));
                let x = format!("L_{{{}}}\\colon {}_{{{};{}}}", m, key, idx(x), idx(y));
                t.rows.push(Row { label: l, latex: x, value: Cell::Scalar(v.clone()) });
            }
        }
        t.rows.push(Row { label: format!("L{} const", m), latex: format!("L_{{{}}}\\colon \\text{{const}}", m), value: Cell::Scalar(c.constant.clone()) });
        docs.push(c.to_json());
    }
    t.json = Some(Value::Array(docs));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_m_and_truncations_parse() {
        let c = Command::try_parse_from(["supertau", "verify", "virasoro", "--m", "-1", "0", "1", "--P", "3", "--K", "2"]).unwrap();
        assert_eq!(c.ms, vec![-1, 0, 1]);
        assert_eq!((c.p_trunc, c.k_trunc), (3, 2));
        assert_eq!(c.format(), Format::Text);
    }

    #[test]
    fn empty_table_is_an_empty_document() {
        let t = Table::new("empty");
        let nm = Names::default_for(1);
        assert_eq!(t.to_text(&nm), "");
        assert_eq!(t.to_latex(&nm), "");
    }

    #[test]
    fn every_target_has_a_suite() {
        for t in Target::value_variants() {
            assert!(SUITES.iter().any(|s| s.target == *t), "{:?}", t);
        }
    }
}
