mod common;

use common::*;
use rlv::cmd::{self, ModelOpts};
use rlv::model::Selection;
use rlv_core::three::tactic_redtoinv3;
use rlv_core::two::gen_redtoinv2_script;

fn opts(name: &str, sel: Selection) -> ModelOpts {
    ModelOpts {
        path: model_path(name),
        selection: sel,
        max_states: None,
    }
}

#[test]
fn redtoinv2_outline_for_the_sum_loop() {
    let m = sum_loop();
    let s = gen_redtoinv2_script(m.system(), &sum_loop_cert(&m)).unwrap();
    golden("redtoinv2_sum_loop.txt", &s.outline());
}

#[test]
fn redtoinv3_outline_for_the_sum_loop() {
    let m = sum_loop();
    let cert = sum_loop_cert(&m);
    let t = tactic_redtoinv3(m.system(), &cert).unwrap();
    golden("redtoinv3_sum_loop.txt", &t.outline(&mut role_namer(m.system(), &cert)));
}

#[test]
fn check_valid_reports() {
    let r = cmd::check_valid(&opts("sum.rlm", Selection::default()), SUM_GOAL);
    golden("check_valid_sum.json", &r.to_stable_json());
    let r = cmd::check_valid(&opts("gcd.rlm", Selection::default()), GCD_GOAL);
    golden("check_valid_gcd.json", &r.to_stable_json());
    let r = cmd::check_valid(
        &opts("sum.rlm", Selection::default()),
        "(c = c0) =>> (c = c2 && s = m*m)",
    );
    golden("check_valid_sum_wrong.json", &r.to_stable_json());
}

#[test]
fn certify_reports() {
    let o = opts("sum.rlm", sum_loop_selection());
    let r = cmd::certify(&o, SUM_LOOP_FORMULA, SUM_LOOP_Q, None, None);
    golden("certify_sum_loop.json", &r.to_stable_json());
    let r = cmd::certify(&o, SUM_LOOP_FORMULA, &SUM_LOOP_Q.replace("i < m", "i <= m"), None, None);
    golden("certify_sum_loop_mutated.json", &r.to_stable_json());
}

#[test]
fn gcd_bundle_report() {
    let r = cmd::check_tree_cmd(&opts("gcd.rlm", Selection::default()), &model_path("gcd_bundle.json"));
    golden("gcd_bundle.json", &r.to_stable_json());
}

#[test]
fn component_reports() {
    let sel = Selection {
        arrows: vec![1, 3],
        nodes: vec!["c1".into(), "c2".into()],
    };
    let o = opts("gcd.rlm", sel);
    let r = cmd::component_cmd(&o, rlv_core::ComponentReading::ExitThroughFinals);
    golden("component_gcd_upper.json", &r.to_stable_json());
    let r = cmd::component_cmd(&o, rlv_core::ComponentReading::Literal);
    golden("component_gcd_upper_literal.json", &r.to_stable_json());
}
