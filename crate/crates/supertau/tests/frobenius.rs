use std::time::Instant;

use supertau::frobenius::{builtin, Cover};

fn run(name: &str, level: usize) {
    let t = Instant::now();
    let c = Cover::new(builtin(name).unwrap(), level).unwrap();
    let checks = c.verify_all(name);
    let bad: Vec<_> = checks.iter().filter(|c| !c.passed()).collect();
    eprintln!("{}: {} checks in {:?}", name, checks.len(), t.elapsed());
    assert!(bad.is_empty(), "{:#?}", bad);
}

#[test]
fn onedim_cover_to_level_3() {
    run("onedim", 3);
}

#[test]
fn cp1_cover_to_level_3() {
    run("cp1", 3);
}
