//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::*;
use rlv::cmd::{self, ModelOpts};
use rlv::fuzz::{run_corpus, Corpus, FuzzOpts, NegativeClass};
use rlv::model::Selection;
use rlv::report::{Status, Witness};
use rlv_core::one::certify_invariant;
use rlv_core::three::{check_tree, tactic_redtoinv3, TreeRule};
use rlv_core::two::{check_script, gen_redtoinv2_script, Rule};

struct Outcome {
    pass: bool,
    detail: String,
}

fn criterion(n: usize, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    if let Some(b) = budget {
        if took > b {
            o.pass = false;
            o.detail = format!("{}; over budget of {b:?}", o.detail);
        }
    }
    let tag = if o.pass { "PASS" } else { "FAIL" };
    println!("{tag} {n}. {title}: {} ({:.2?})", o.detail, took);
    o.pass
}

fn opts(name: &str, sel: Selection) -> ModelOpts {
    ModelOpts {
        path: model_path(name),
        selection: sel,
        max_states: None,
    }
}

/// One seeded corpus of systems with at most 8 states, shared by the
/// property criteria.
fn corpus() -> &'static Corpus {
    static C: OnceLock<Corpus> = OnceLock::new();
    C.get_or_init(|| {
        run_corpus(&FuzzOpts {
            count: 1000,
            max_states: 8,
            seed: 2024,
            ..FuzzOpts::default()
        })
    })
}

fn sum_machine() -> Outcome {
    let r = cmd::check_valid(&opts("sum.rlm", Selection::default()), SUM_GOAL);
    Outcome {
        pass: r.status == Status::Valid,
        detail: format!("check-valid {:?} over {} states", r.status, r.stats["states"]),
    }
}

fn sum_certificate() -> Outcome {
    let o = opts("sum.rlm", sum_loop_selection());
    let good = cmd::certify(&o, SUM_LOOP_FORMULA, SUM_LOOP_Q, None, None);
    let bad = cmd::certify(&o, SUM_LOOP_FORMULA, &SUM_LOOP_Q.replace("i < m", "i <= m"), None, None);
    let witness = bad.details.iter().find_map(|d| match &d.witness {
        Some(Witness::State(s)) => Some(format!("{} at {s}", d.location)),
        _ => None,
    });
    Outcome {
        pass: good.status == Status::Accepted && bad.status == Status::Rejected && witness.is_some(),
        detail: format!(
            "q {:?}; i <= m variant {:?}, witness {}",
            good.status,
            bad.status,
            witness.as_deref().unwrap_or("none")
        ),
    }
}

fn redtoinv2() -> Outcome {
    let m = sum_loop();
    let cert = sum_loop_cert(&m);
    let s = gen_redtoinv2_script(m.system(), &cert).unwrap();
    let accepted = check_script(m.system(), &s).unwrap().accepted();
    let heads = s.headline_rules();
    use Rule::*;
    let expected = [Str, Spl, Trv, Stp, Str, Spl, Trv, Stp];
    // headline_rules covers the justified phases only; X8 must be empty
    let shape = heads == expected.map(Some) && s.phases.len() == 9 && s.phases[8].entries.is_empty();
    let expected_text = std::fs::read_to_string(golden_path("redtoinv2_sum_loop.txt")).unwrap();
    let golden = s.outline() == expected_text;
    let names: Vec<&str> = heads.iter().flatten().map(|r| r.name()).collect();
    Outcome {
        pass: accepted && shape && golden,
        detail: format!(
            "X0..X7 {} then X8 = ∅; accepted {accepted}; golden match {golden}",
            names.join(",")
        ),
    }
}

fn redtoinv3() -> Outcome {
    let m = sum_loop();
    let cert = sum_loop_cert(&m);
    let t = tactic_redtoinv3(m.system(), &cert).unwrap();
    let accepted = check_tree(m.system(), &t).accepted();
    let nodes: Vec<(String, TreeRule)> = t
        .walk()
        .into_iter()
        .map(|(_, n)| (n.label.clone().unwrap_or_default(), n.rule))
        .collect();
    use TreeRule::*;
    let expected = [
        ("N_0", Str),
        ("N_1", Spl),
        ("N_2,1", Cof),
        ("N_3", Stp),
        ("N_4", Str),
        ("N_4′", Spl),
        ("N_5,1", Hyp),
        ("N_5,2", Trv),
        ("N_2,2", Trv),
    ];
    let shape = nodes.len() == expected.len() && nodes.iter().zip(expected).all(|(a, b)| a.0 == b.0 && a.1 == b.1);
    let expected_text = std::fs::read_to_string(golden_path("redtoinv3_sum_loop.txt")).unwrap();
    let golden = t.outline(&mut role_namer(m.system(), &cert)) == expected_text;
    Outcome {
        pass: accepted && shape && golden,
        detail: format!(
            "{} nodes N_0 .. N_5,2 with the expected rules {shape}; accepted {accepted}; golden match {golden}",
            nodes.len()
        ),
    }
}

fn gcd_end_to_end() -> Outcome {
    let b = cmd::check_tree_cmd(&opts("gcd.rlm", Selection::default()), &model_path("gcd_bundle.json"));
    let v = cmd::check_valid(&opts("gcd.rlm", Selection::default()), GCD_GOAL);
    let claims = b.details.iter().filter(|d| d.location.starts_with("compose")).count();
    Outcome {
        pass: b.status == Status::Accepted && claims == 2 && v.status == Status::Valid,
        detail: format!(
            "bundle {:?} with {claims} composed claims; check-valid {:?}",
            b.status, v.status
        ),
    }
}

fn decision_coherence() -> Outcome {
    let c = corpus();
    let t = &c.tally;
    Outcome {
        pass: t.instances >= 500 && t.disagreements == 0 && t.synth_disagreements == 0,
        detail: format!(
            "{} systems (≤ 8 states), {} valid; autoprove disagreements {}, synth_q disagreements {}",
            t.instances, t.valid, t.disagreements, t.synth_disagreements
        ),
    }
}

fn empirical_soundness() -> Outcome {
    let c = corpus();
    let t = &c.tally;
    Outcome {
        pass: t.soundness_violations == 0 && t.scripts_accepted == t.valid && t.trees_accepted == t.valid,
        detail: format!(
            "{} scripts and {} trees accepted for {} valid targets; {} accepted mutants; {} soundness violations",
            t.scripts_accepted, t.trees_accepted, t.valid, t.mutants_accepted, t.soundness_violations
        ),
    }
}

fn negative_suite() -> Outcome {
    let c = corpus();
    let mut pass = true;
    let mut parts = Vec::new();
    for k in NegativeClass::ALL {
        let (tried, rejected) = c.tally.negative(k);
        pass &= tried > 0 && tried == rejected;
        parts.push(format!("{} {rejected}/{tried}", k.name()));
    }
    // the sum loop certificate itself, with the step knot moved out of X0
    let m = sum_loop();
    let cert = sum_loop_cert(&m);
    let mut s = gen_redtoinv2_script(m.system(), &cert).unwrap();
    for p in &mut s.phases {
        for e in &mut p.entries {
            if let Some(rlv_core::two::PremiseRef::Origin(i)) = e.premises.first().copied() {
                e.premises[0] = rlv_core::two::PremiseRef::Next(i);
            }
        }
    }
    let knot = !check_script(m.system(), &s).unwrap().accepted();
    pass &= knot && certify_invariant(m.system(), &cert).unwrap().accepted();
    parts.push(format!("sum loop knot moved rejected {knot}"));
    Outcome {
        pass,
        detail: parts.join(", "),
    }
}

fn component_theorem() -> Outcome {
    let c = corpus();
    let t = &c.tally;
    let [lit, etf] = t.components;
    Outcome {
        pass: lit.2 == 0 && etf.2 == 0 && t.lift_violations == 0 && lit.1 > 0 && etf.1 > 0,
        detail: format!(
            "literal: {} components, {} valid on the component, {} violations; exit-through-finals: {} / {} / {}; {} lifts, {} incoherent",
            lit.0, lit.1, lit.2, etf.0, etf.1, etf.2, t.lifts, t.lift_violations
        ),
    }
}

#[test]
fn acceptance() {
    let s = |n| Some(Duration::from_secs(n));
    let results = [
        criterion(1, "sum machine validity", s(2), sum_machine),
        criterion(2, "sum loop invariant certificate", s(1), sum_certificate),
        criterion(3, "redtoinv2 phase script", None, redtoinv2),
        criterion(4, "redtoinv3 proof tree", None, redtoinv3),
        criterion(5, "gcd end to end", s(30), gcd_end_to_end),
        criterion(6, "decision coherence", s(60), decision_coherence),
        criterion(7, "empirical soundness of scripts and trees", None, empirical_soundness),
        criterion(8, "negative suite", None, negative_suite),
        criterion(9, "component theorem", None, component_theorem),
    ];
    let failed: Vec<usize> = (1..=9).filter(|&i| !results[i - 1]).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
