//! Differential fuzzing: random small systems, every decision procedure,
//! and targeted mutations of the generated proofs.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rlv_core::one::{autoprove, certify_invariant, synth_q, Autoproof, InvariantCertificate};
use rlv_core::three::{
    check_node, check_tree, check_tree_with, lift_component, tactic_redtoinv3, ProofTree, Sequent, Tag, TaggedFormula,
    TreeParams, TreeRule,
};
use rlv_core::two::{
    check_rule_app, check_script, gen_redtoinv2_script, PhaseScript, PremiseRef, Rule, RuleApp, RuleParams,
    TraDischarge,
};
use rlv_core::{
    holds_valid, is_component, ComponentReading, ReachFormula, State, StateId, StatePredicate, TransitionSystem,
};
use serde::{Deserialize, Serialize};

use crate::cmd::guarded;
use crate::report::{Report, Status};

/// Deliberate bugs, used to check that the harness notices them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Negate the outcome of `autoprove`.
    FlipAutoprove,
}

#[derive(Debug, Clone)]
pub struct FuzzOpts {
    pub count: u64,
    pub max_states: usize,
    pub seed: u64,
    pub dump_dir: Option<PathBuf>,
    pub fault: Option<Fault>,
}

impl Default for FuzzOpts {
    fn default() -> Self {
        FuzzOpts {
            count: 500,
            max_states: 8,
            seed: 0,
            dump_dir: None,
            fault: None,
        }
    }
}

/// A random system with a formula and a candidate component. States are
/// `s000, s001, …` so that ids coincide with indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub states: usize,
    pub edges: Vec<(usize, usize)>,
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
    pub sub_states: Vec<usize>,
    pub sub_edges: Vec<(usize, usize)>,
    /// Seeds the random proof mutations.
    pub mutation_seed: u64,
}

/// A dumped failure; `rlv fuzz --replay` re-runs it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceData {
    pub seed: u64,
    pub index: u64,
    #[serde(default)]
    pub fault: Option<Fault>,
    pub instance: Instance,
    pub violations: Vec<String>,
}

fn name(i: usize) -> String {
    format!("s{i:03}")
}

impl Instance {
    pub fn generate(seed: u64, index: u64, max_states: usize) -> Instance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let n = rng.random_range(1..=max_states.max(1));
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if rng.random_bool(0.3) {
                    edges.push((a, b));
                }
            }
        }
        let subset = |rng: &mut ChaCha8Rng| (0..n).filter(|_| rng.random_bool(0.5)).collect::<Vec<_>>();
        let lhs = subset(&mut rng);
        let rhs = subset(&mut rng);
        let sub_states = subset(&mut rng);
        let keep = if rng.random_bool(0.5) { 1.0 } else { 0.8 };
        let sub_edges = edges
            .iter()
            .copied()
            .filter(|(a, b)| sub_states.contains(a) && sub_states.contains(b))
            .filter(|_| rng.random_bool(keep))
            .collect();
        Instance {
            states: n,
            edges,
            lhs,
            rhs,
            sub_states,
            sub_edges,
            mutation_seed: rng.random(),
        }
    }

    pub fn system(&self) -> TransitionSystem {
        let st = |i: usize| State::opaque(name(i));
        TransitionSystem::new(
            vec![],
            (0..self.states).map(st).collect(),
            self.edges.iter().map(|&(a, b)| (st(a), st(b))),
        )
        .expect("instance states are distinct")
    }

    pub fn subsystem(&self) -> TransitionSystem {
        let st = |i: usize| State::opaque(name(i));
        TransitionSystem::new(
            vec![],
            self.sub_states.iter().map(|&i| st(i)).collect(),
            self.sub_edges.iter().map(|&(a, b)| (st(a), st(b))),
        )
        .expect("instance states are distinct")
    }

    pub fn formula(&self, sys: &TransitionSystem) -> ReachFormula {
        let p = |v: &[usize]| sys.predicate(v.iter().map(|&i| StateId(i)));
        ReachFormula::new(p(&self.lhs), p(&self.rhs)).expect("same system")
    }
}

/// Mutation classes that must always be rejected.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum NegativeClass {
    /// `[Str]` with `l ⋢ l′`.
    StrNotStronger,
    /// `[Stp]` with a final state in `l`.
    StpFinal,
    /// A phase-script `[Stp]` whose premise is outside `X_0`.
    KnotOutsideOrigin,
    /// `[Cof]` closed by `[Hyp]` with no `[Stp]` in between.
    CofHyp,
    /// Phase-script `[Tra]` with the midpoint premise not discharged.
    TraUndischarged,
}

impl NegativeClass {
    pub const ALL: [NegativeClass; 5] = [
        NegativeClass::StrNotStronger,
        NegativeClass::StpFinal,
        NegativeClass::KnotOutsideOrigin,
        NegativeClass::CofHyp,
        NegativeClass::TraUndischarged,
    ];

    pub fn name(self) -> &'static str {
        match self {
            NegativeClass::StrNotStronger => "str_not_stronger",
            NegativeClass::StpFinal => "stp_final",
            NegativeClass::KnotOutsideOrigin => "knot_outside_origin",
            NegativeClass::CofHyp => "cof_hyp",
            NegativeClass::TraUndischarged => "tra_undischarged",
        }
    }
}

/// Counters accumulated over a corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Tally {
    pub instances: u64,
    pub valid: u64,
    /// `autoprove` disagrees with the oracle.
    pub disagreements: u64,
    /// `synth_q` certificate verdict disagrees with the oracle.
    pub synth_disagreements: u64,
    pub scripts_accepted: u64,
    pub trees_accepted: u64,
    /// Accepted mutants of generated proofs.
    pub mutants_accepted: u64,
    pub mutants_rejected: u64,
    /// Accepted scripts or trees whose conclusion the oracle refutes.
    pub soundness_violations: u64,
    /// Per [`NegativeClass`]: attempts and rejections.
    pub negatives: [(u64, u64); 5],
    /// Per reading (literal, exit-through-finals): component passes,
    /// passes with a formula valid on the component, theorem violations.
    pub components: [(u64, u64, u64); 2],
    /// Lifted claims checked against the component verdict and the oracle.
    pub lifts: u64,
    pub lift_violations: u64,
    pub violations: u64,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.instances += o.instances;
        self.valid += o.valid;
        self.disagreements += o.disagreements;
        self.synth_disagreements += o.synth_disagreements;
        self.scripts_accepted += o.scripts_accepted;
        self.trees_accepted += o.trees_accepted;
        self.mutants_accepted += o.mutants_accepted;
        self.mutants_rejected += o.mutants_rejected;
        self.soundness_violations += o.soundness_violations;
        for i in 0..5 {
            self.negatives[i].0 += o.negatives[i].0;
            self.negatives[i].1 += o.negatives[i].1;
        }
        for i in 0..2 {
            self.components[i].0 += o.components[i].0;
            self.components[i].1 += o.components[i].1;
            self.components[i].2 += o.components[i].2;
        }
        self.lifts += o.lifts;
        self.lift_violations += o.lift_violations;
        self.violations += o.violations;
    }

    pub fn negative(&self, c: NegativeClass) -> (u64, u64) {
        self.negatives[c as usize]
    }

    fn stats(&self, r: &mut Report) {
        r.stat("instances", self.instances);
        r.stat("valid", self.valid);
        r.stat("disagreements", self.disagreements);
        r.stat("synth_disagreements", self.synth_disagreements);
        r.stat("scripts_accepted", self.scripts_accepted);
        r.stat("trees_accepted", self.trees_accepted);
        r.stat("mutants_accepted", self.mutants_accepted);
        r.stat("mutants_rejected", self.mutants_rejected);
        r.stat("soundness_violations", self.soundness_violations);
        for c in NegativeClass::ALL {
            let (a, k) = self.negative(c);
            r.stat(&format!("negative_{}", c.name()), format!("{k}/{a}"));
        }
        for (i, rd) in ["literal", "exit_through_finals"].iter().enumerate() {
            let (p, v, bad) = self.components[i];
            r.stat(
                &format!("component_{rd}"),
                format!("{p} components, {v} valid on component, {bad} violations"),
            );
        }
        r.stat("lifts", self.lifts);
        r.stat("lift_violations", self.lift_violations);
        r.stat("violations", self.violations);
    }
}

/// Outcome of one instance.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tally: Tally,
    pub violations: Vec<String>,
}

impl Outcome {
    fn violate(&mut self, msg: impl Into<String>) {
        self.tally.violations += 1;
        self.violations.push(msg.into());
    }

    fn negative(&mut self, c: NegativeClass, rejected: bool, what: &str) {
        let slot = &mut self.tally.negatives[c as usize];
        slot.0 += 1;
        if rejected {
            slot.1 += 1;
        } else {
            self.violate(format!("{} mutant accepted: {what}", c.name()));
        }
    }
}

fn valid(sys: &TransitionSystem, phi: &ReachFormula) -> bool {
    holds_valid(sys, phi).expect("formula belongs to the system").is_valid()
}

fn toggle(sys: &TransitionSystem, p: &StatePredicate, s: StateId) -> StatePredicate {
    if p.contains(s) {
        sys.predicate(p.iter().filter(|&x| x != s))
    } else {
        sys.predicate(p.iter().chain([s]))
    }
}

fn formula(l: &StatePredicate, r: &StatePredicate) -> ReachFormula {
    ReachFormula::new(l.clone(), r.clone()).expect("same system")
}

/// Runs every check on one instance.
pub fn run_instance(inst: &Instance, fault: Option<Fault>) -> Outcome {
    let mut out = Outcome::default();
    out.tally.instances = 1;
    let sys = inst.system();
    let phi = inst.formula(&sys);
    let is_valid = valid(&sys, &phi);
    if is_valid {
        out.tally.valid = 1;
    }

    // autoprove against the oracle
    let ap = autoprove(&sys, &phi).expect("same system");
    let proved = ap.is_proved() ^ (fault == Some(Fault::FlipAutoprove));
    if proved != is_valid {
        out.tally.disagreements += 1;
        out.violate(format!("autoprove says proved={proved}, oracle says valid={is_valid}"));
    }
    match &ap {
        Autoproof::Proved(p) => {
            if let Err(e) = p.replay(&sys) {
                out.violate(format!("cyclic proof does not replay: {e}"));
            }
        }
        Autoproof::Refuted { counterexample, .. } => {
            let st = counterexample.states();
            let ok = phi.lhs().contains(st[0])
                && st.iter().all(|&s| !phi.rhs().contains(s))
                && counterexample.is_maximal(&sys);
            if !ok {
                out.violate("autoprove counterexample is not a maximal r-avoiding path from l");
            }
        }
    }

    // canonical certificate
    let q = synth_q(&sys, phi.rhs()).expect("same system");
    let cert = InvariantCertificate { q, target: phi.clone() };
    let cert_ok = certify_invariant(&sys, &cert).expect("same system").accepted();
    if cert_ok != is_valid {
        out.tally.synth_disagreements += 1;
        out.violate(format!(
            "synth_q certificate accepted={cert_ok}, oracle says valid={is_valid}"
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(inst.mutation_seed);
    if cert_ok {
        proofs_and_mutants(&mut out, &sys, &phi, &cert, &mut rng);
    }
    negatives(&mut out, &sys, &phi, &mut rng);
    components(&mut out, inst, &sys);
    out
}

fn script_sound(sys: &TransitionSystem, s: &PhaseScript) -> bool {
    if !s.hypotheses.iter().all(|h| valid(sys, h)) {
        return true;
    }
    s.phases.first().is_none_or(|p| p.formulas().all(|f| valid(sys, f)))
}

fn tree_sound(sys: &TransitionSystem, t: &ProofTree) -> bool {
    let s = &t.sequent;
    if !s.hyps.iter().all(|h| h.tag == Tag::F && valid(sys, &h.formula)) {
        return true;
    }
    valid(sys, &s.goal.formula)
}

fn node_mut<'a>(t: &'a mut ProofTree, path: &[usize]) -> &'a mut ProofTree {
    match path.split_first() {
        None => t,
        Some((&i, rest)) => node_mut(&mut t.children[i], rest),
    }
}

fn random_state(sys: &TransitionSystem, rng: &mut ChaCha8Rng) -> StateId {
    StateId(rng.random_range(0..sys.len()))
}

fn mutate_script(sys: &TransitionSystem, s: &mut PhaseScript, rng: &mut ChaCha8Rng) {
    let phases: Vec<usize> = (0..s.phases.len())
        .filter(|&i| !s.phases[i].entries.is_empty())
        .collect();
    let p = phases[rng.random_range(0..phases.len())];
    let n = s.phases[p].entries.len();
    let e = &mut s.phases[p].entries[rng.random_range(0..n)];
    let st = random_state(sys, rng);
    match rng.random_range(0..4) {
        0 => e.conclusion = formula(&toggle(sys, e.conclusion.lhs(), st), e.conclusion.rhs()),
        1 => e.conclusion = formula(e.conclusion.lhs(), &toggle(sys, e.conclusion.rhs(), st)),
        2 => e.rule = Rule::ALL[rng.random_range(0..Rule::ALL.len())],
        _ => match &mut e.params {
            RuleParams::Str(l2) => *l2 = toggle(sys, l2, st),
            _ => e.conclusion = formula(&toggle(sys, e.conclusion.lhs(), st), e.conclusion.rhs()),
        },
    }
}

fn mutate_tree(sys: &TransitionSystem, t: &mut ProofTree, rng: &mut ChaCha8Rng) {
    let paths: Vec<Vec<usize>> = t.walk().into_iter().map(|(p, _)| p).collect();
    let node = node_mut(t, &paths[rng.random_range(0..paths.len())]);
    let st = random_state(sys, rng);
    let g = &mut node.sequent.goal;
    match rng.random_range(0..5) {
        0 => g.formula = formula(&toggle(sys, g.formula.lhs(), st), g.formula.rhs()),
        1 => g.formula = formula(g.formula.lhs(), &toggle(sys, g.formula.rhs(), st)),
        2 => {
            g.tag = match g.tag {
                Tag::F => Tag::T,
                Tag::T => Tag::F,
            }
        }
        3 => {
            if node.sequent.hyps.pop().is_none() {
                node.sequent
                    .hyps
                    .push(TaggedFormula::f(node.sequent.goal.formula.clone()));
            }
        }
        _ => {
            if let TreeParams::Str(l2) = &mut node.params {
                *l2 = toggle(sys, l2, st);
            } else {
                node.rule = TreeRule::Trv;
                node.children.clear();
            }
        }
    }
}

const MUTANTS: usize = 4;

fn proofs_and_mutants(
    out: &mut Outcome,
    sys: &TransitionSystem,
    phi: &ReachFormula,
    cert: &InvariantCertificate,
    rng: &mut ChaCha8Rng,
) {
    let script = gen_redtoinv2_script(sys, cert).expect("certificate accepted");
    if check_script(sys, &script).expect("same system").accepted() {
        out.tally.scripts_accepted += 1;
        if !valid(sys, phi) {
            out.tally.soundness_violations += 1;
            out.violate("generated script accepted for an invalid target");
        }
    } else {
        out.violate("generated script rejected for a valid target");
    }
    let tree = tactic_redtoinv3(sys, cert).expect("certificate accepted");
    if check_tree(sys, &tree).accepted() {
        out.tally.trees_accepted += 1;
        if !tree_sound(sys, &tree) {
            out.tally.soundness_violations += 1;
            out.violate("generated tree accepted for an invalid conclusion");
        }
    } else {
        out.violate("generated tree rejected for a valid target");
    }

    for _ in 0..MUTANTS {
        let mut s = script.clone();
        mutate_script(sys, &mut s, rng);
        if check_script(sys, &s).expect("same system").accepted() {
            out.tally.mutants_accepted += 1;
            if !script_sound(sys, &s) {
                out.tally.soundness_violations += 1;
                out.violate(format!(
                    "mutated script accepted with an invalid X0 formula:\n{}",
                    s.outline()
                ));
            }
        } else {
            out.tally.mutants_rejected += 1;
        }
        let mut t = tree.clone();
        mutate_tree(sys, &mut t, rng);
        if check_tree(sys, &t).accepted() {
            out.tally.mutants_accepted += 1;
            if !tree_sound(sys, &t) {
                out.tally.soundness_violations += 1;
                out.violate("mutated tree accepted with an invalid conclusion");
            }
        } else {
            out.tally.mutants_rejected += 1;
        }
    }

    // whole-proof variants of the negative classes
    if let Some((pi, ei)) = find_entry(&script, Rule::Stp) {
        let mut s = script.clone();
        let e = &mut s.phases[pi].entries[ei];
        if let PremiseRef::Origin(k) = e.premises[0] {
            e.premises[0] = PremiseRef::Next(k);
        }
        let ok = check_script(sys, &s).expect("same system").accepted();
        out.negative(
            NegativeClass::KnotOutsideOrigin,
            !ok,
            "redtoinv2 script with a Next knot",
        );
    }
    if let Some(path) = tree
        .walk()
        .iter()
        .find(|(_, n)| n.rule == TreeRule::Stp)
        .map(|(p, _)| p.clone())
    {
        let mut t = tree.clone();
        let n = node_mut(&mut t, &path);
        n.rule = TreeRule::Hyp;
        n.params = TreeParams::None;
        n.children.clear();
        let ok = check_tree(sys, &t).accepted();
        out.negative(NegativeClass::CofHyp, !ok, "redtoinv3 tree with Stp replaced by Hyp");
    }
}

fn find_entry(s: &PhaseScript, rule: Rule) -> Option<(usize, usize)> {
    s.phases
        .iter()
        .enumerate()
        .find_map(|(p, ph)| ph.entries.iter().position(|e| e.rule == rule).map(|e| (p, e)))
}

fn app(rule: Rule, conclusion: ReachFormula, premises: Vec<PremiseRef>, params: RuleParams) -> RuleApp {
    RuleApp {
        rule,
        conclusion,
        premises,
        params,
        label: None,
    }
}

fn leaf(seq: Sequent) -> ProofTree {
    ProofTree::new(seq, TreeRule::Trv, TreeParams::None, vec![])
}

/// Single-rule instances of each negative class built from the instance.
fn negatives(out: &mut Outcome, sys: &TransitionSystem, phi: &ReachFormula, rng: &mut ChaCha8Rng) {
    let (l, r) = (phi.lhs(), phi.rhs());

    // [Str] with l ⋢ l′: drop one l-state from the weakening
    if let Some(s) = l.iter().nth(rng.random_range(0..l.count().max(1))) {
        let l2 = sys.predicate(sys.top().iter().filter(|&x| x != s));
        let next = [formula(&l2, r)];
        let a = app(
            Rule::Str,
            phi.clone(),
            vec![PremiseRef::Next(0)],
            RuleParams::Str(l2.clone()),
        );
        let rej = check_rule_app(sys, &[], &[], &a, &next).is_err();
        out.negative(NegativeClass::StrNotStronger, rej, "phase-script Str");
        let seq = Sequent::new(vec![], TaggedFormula::f(phi.clone()));
        let t = ProofTree::new(
            seq.clone(),
            TreeRule::Str,
            TreeParams::Str(l2.clone()),
            vec![leaf(seq.with_goal(TaggedFormula::f(formula(&l2, r))))],
        );
        out.negative(
            NegativeClass::StrNotStronger,
            check_node(sys, &t, &[]).is_err(),
            "tree Str",
        );
    }

    // [Stp] with a final state in l
    if let Some(f) = sys.finals().first() {
        let lf = sys.predicate(l.iter().chain([f]));
        let post = sys.post(&lf).expect("same system");
        let target = formula(&lf, r);
        let x0 = [formula(&post, r)];
        let a = app(Rule::Stp, target.clone(), vec![PremiseRef::Origin(0)], RuleParams::None);
        out.negative(
            NegativeClass::StpFinal,
            check_rule_app(sys, &[], &x0, &a, &[]).is_err(),
            "phase-script Stp",
        );
        for tag in [Tag::F, Tag::T] {
            let seq = Sequent::new(vec![], TaggedFormula::new(tag, target.clone()));
            let t = ProofTree::new(
                seq.clone(),
                TreeRule::Stp,
                TreeParams::None,
                vec![leaf(seq.with_goal(TaggedFormula::t(formula(&post, r))))],
            );
            out.negative(NegativeClass::StpFinal, check_node(sys, &t, &[]).is_err(), "tree Stp");
        }
    }

    // phase-script [Stp] whose premise is in the next phase
    let nf = sys.predicate(l.iter().filter(|&s| !sys.is_final(s)));
    let post = sys.post(&nf).expect("same system");
    let a = app(Rule::Stp, formula(&nf, r), vec![PremiseRef::Next(0)], RuleParams::None);
    let next = [formula(&post, r)];
    out.negative(
        NegativeClass::KnotOutsideOrigin,
        check_rule_app(sys, &[], &next, &a, &next).is_err(),
        "phase-script Stp with a Next premise",
    );

    // [Cof] immediately closed by [Hyp]
    let fphi = TaggedFormula::f(phi.clone());
    for goal in [fphi.clone(), TaggedFormula::t(phi.clone())] {
        let seq = Sequent::new(vec![], goal);
        let inner = seq.adding(fphi.clone(), fphi.clone());
        let t = ProofTree::new(
            seq,
            TreeRule::Cof,
            TreeParams::None,
            vec![ProofTree::new(inner, TreeRule::Hyp, TreeParams::None, vec![])],
        );
        out.negative(NegativeClass::CofHyp, !check_tree(sys, &t).accepted(), "Cof then Hyp");
    }

    // phase-script [Tra] without a semantic discharge of l =>> m
    let m = sys.predicate((0..sys.len()).map(StateId).filter(|_| rng.random_bool(0.5)));
    let next = [formula(&m, r)];
    let lm = formula(l, &m);
    for discharge in [None, Some(TraDischarge::Hypothesis)] {
        let a = app(
            Rule::Tra,
            phi.clone(),
            vec![PremiseRef::Next(0)],
            RuleParams::Tra {
                mid: m.clone(),
                discharge,
            },
        );
        let hyps = std::slice::from_ref(&lm);
        out.negative(
            NegativeClass::TraUndischarged,
            check_rule_app(sys, hyps, &[], &a, &next).is_err(),
            "phase-script Tra",
        );
    }
}

fn components(out: &mut Outcome, inst: &Instance, sys: &TransitionSystem) {
    let sub = inst.subsystem();
    let phi_sub = {
        let p = |v: &[usize]| sub.predicate(v.iter().filter_map(|&i| sub.find(&State::opaque(name(i)))));
        formula(&p(&inst.lhs), &p(&inst.rhs))
    };
    let sub_valid = valid(&sub, &phi_sub);
    let lifted = phi_sub.inject(&sub, sys).expect("sub states exist in the system");
    let tree = if sub_valid {
        let cert = InvariantCertificate {
            q: synth_q(&sub, phi_sub.rhs()).expect("same system"),
            target: phi_sub.clone(),
        };
        Some(tactic_redtoinv3(&sub, &cert).expect("valid formulas have certificates"))
    } else {
        None
    };
    for (i, reading) in [ComponentReading::Literal, ComponentReading::ExitThroughFinals]
        .into_iter()
        .enumerate()
    {
        let is_comp = is_component(&sub, sys, reading).is_component();
        if !is_comp {
            continue;
        }
        out.tally.components[i].0 += 1;
        if !sub_valid {
            continue;
        }
        out.tally.components[i].1 += 1;
        if !valid(sys, &lifted) {
            out.tally.components[i].2 += 1;
            out.violate(format!("valid on a component ({reading:?}) but not on the system"));
        }
    }
    if let Some(tree) = tree {
        for reading in [ComponentReading::Literal, ComponentReading::ExitThroughFinals] {
            out.tally.lifts += 1;
            let is_comp = is_component(&sub, sys, reading).is_component();
            match lift_component(sys, &sub, reading, &tree) {
                Ok(claim) => {
                    let leaf = claim.leaf("lifted");
                    let coherent = is_comp
                        && claim.claim().goal.formula == lifted
                        && check_tree_with(sys, &leaf, &[&claim]).accepted()
                        && valid(sys, &claim.claim().goal.formula);
                    if !coherent {
                        out.tally.lift_violations += 1;
                        out.violate(format!("lifted claim incoherent ({reading:?})"));
                    }
                }
                Err(_) if !is_comp => {}
                Err(e) => {
                    out.tally.lift_violations += 1;
                    out.violate(format!("lifting refused on a component ({reading:?}): {e}"));
                }
            }
        }
    }
}

/// A corpus run: totals plus the failing instances.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub tally: Tally,
    pub failures: Vec<InstanceData>,
}

/// Runs `opts.count` instances, spread over the available cores. Results
/// do not depend on the number of workers.
pub fn run_corpus(opts: &FuzzOpts) -> Corpus {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8) as u64;
    let parts: Vec<Corpus> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                s.spawn(move || {
                    let mut c = Corpus::default();
                    let mut i = w;
                    while i < opts.count {
                        let inst = Instance::generate(opts.seed, i, opts.max_states);
                        let o = run_instance(&inst, opts.fault);
                        c.tally.merge(&o.tally);
                        if !o.violations.is_empty() {
                            c.failures.push(InstanceData {
                                seed: opts.seed,
                                index: i,
                                fault: opts.fault,
                                instance: inst,
                                violations: o.violations,
                            });
                        }
                        i += workers;
                    }
                    c
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("fuzz worker")).collect()
    });
    let mut all = Corpus::default();
    for p in parts {
        all.tally.merge(&p.tally);
        all.failures.extend(p.failures);
    }
    all.failures.sort_by_key(|f| f.index);
    all
}

fn dump(dir: &Path, f: &InstanceData) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(format!("fuzz-{}-{}.json", f.seed, f.index));
    let text = serde_json::to_string_pretty(f)?;
    std::fs::write(&p, text + "\n").with_context(|| format!("writing {}", p.display()))?;
    Ok(p)
}

const SHOWN: usize = 20;

pub fn fuzz_cmd(opts: &FuzzOpts) -> Report {
    guarded("fuzz", |r| {
        let c = run_corpus(opts);
        c.tally.stats(r);
        r.stat("seed", opts.seed);
        for f in c.failures.iter().take(SHOWN) {
            let mut loc = format!("instance {}", f.index);
            if let Some(dir) = &opts.dump_dir {
                loc = format!("{loc} ({})", dump(dir, f)?.display());
            }
            for v in &f.violations {
                r.fail(loc.clone(), v.clone(), None);
            }
        }
        if let Some(dir) = &opts.dump_dir {
            for f in c.failures.iter().skip(SHOWN) {
                dump(dir, f)?;
            }
        }
        r.status = if c.failures.is_empty() {
            Status::Accepted
        } else {
            Status::Rejected
        };
        Ok(())
    })
}

/// Re-runs a dumped instance. The fault recorded in the file applies unless
/// one is given on the command line.
pub fn replay_cmd(path: &Path, opts: &FuzzOpts) -> Report {
    guarded("fuzz", |r| {
        let text = crate::read(path)?;
        let data: InstanceData = serde_json::from_str(&text).map_err(|e| crate::Error::json(path, e))?;
        let o = run_instance(&data.instance, opts.fault.or(data.fault));
        o.tally.stats(r);
        for v in &o.violations {
            r.fail(format!("instance {}", data.index), v.clone(), None);
        }
        r.status = if o.violations.is_empty() {
            Status::Accepted
        } else {
            Status::Rejected
        };
        Ok(())
    })
}
