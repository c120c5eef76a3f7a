#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

use rlv::model::{Model, Selection};
use rlv_core::one::InvariantCertificate;
use rlv_core::{ReachFormula, StatePredicate, TransitionSystem};

pub const SUM_LOOP_FORMULA: &str = "(c = c1 && i = 0 && s = 0) =>> (c = c1 && i = m && s = i*(i+1) div 2)";
pub const SUM_LOOP_Q: &str = "c = c1 && i < m && s = i*(i+1) div 2";
pub const SUM_GOAL: &str = "(c = c0) =>> (c = c2 && s = m*(m+1) div 2)";
pub const GCD_GOAL: &str = "(c = c0 && x0 > 0 && y0 > 0) =>> (c = c2 && x = y && x = gcd(x0,y0))";

pub fn model_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("models").join(name)
}

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

pub fn rlv() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rlv"))
}

pub fn sum_loop_selection() -> Selection {
    Selection {
        arrows: vec![1],
        nodes: vec!["c1".into()],
    }
}

pub fn sum_loop() -> Model {
    Model::load(&model_path("sum.rlm"), &sum_loop_selection(), None).unwrap()
}

pub fn sum_loop_cert(m: &Model) -> InvariantCertificate {
    let e = m.efsm().unwrap();
    InvariantCertificate {
        q: e.pred(SUM_LOOP_Q).unwrap(),
        target: e.formula(SUM_LOOP_FORMULA).unwrap(),
    }
}

/// Names formulas by the roles their sides play in an invariant proof.
pub fn role_namer<'a>(
    sys: &'a TransitionSystem,
    cert: &'a InvariantCertificate,
) -> impl FnMut(&ReachFormula) -> String + 'a {
    let (l, r, q) = (cert.target.lhs(), cert.target.rhs(), &cert.q);
    let roles: Vec<(StatePredicate, &str)> = vec![
        (l.clone(), "l"),
        (q.clone(), "q"),
        (r.clone(), "r"),
        (q.join(r).unwrap(), "q ⊔ r"),
        (sys.post(q).unwrap(), "∂q"),
    ];
    move |f: &ReachFormula| {
        let name = |p: &StatePredicate| {
            roles
                .iter()
                .find(|(x, _)| x == p)
                .map_or_else(|| format!("{{{} states}}", p.count()), |(_, n)| n.to_string())
        };
        format!("{} =>> {}", name(f.lhs()), name(f.rhs()))
    }
}

/// Compares `actual` with a golden file; `UPDATE_GOLDEN=1` rewrites it.
pub fn golden(name: &str, actual: &str) {
    let p = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&p, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    assert_eq!(actual, expected, "golden file {} differs", p.display());
}
