//! Command implementations. Each returns a [`Report`]; input problems become
//! reports with status `error`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rlv_core::efsm::parse_model;
use rlv_core::one::{autoprove, certify_invariant, synth_q, Autoproof, InvariantCertificate};
use rlv_core::three::{
    check_tree, check_tree_with, tactic_compose_components, tactic_redtoinv3, ComponentProof, ComposeError,
    LiftedClaim, NodeFailure, TaggedFormula,
};
use rlv_core::two::{check_script, gen_redtoinv2_script};
use rlv_core::{holds_valid, is_component, ComponentReading, FinitePath, ReachFormula, StateId, Verdict};

use crate::format::{
    script_from_spec, script_to_spec, tree_from_spec, tree_to_spec, BundleSpec, Defs, FormulaSpec, PredSpec,
    ScriptSpec, TreeDoc,
};
use crate::model::{states_of, Model, Selection};
use crate::report::{Report, Status, Witness};

#[derive(Debug, Clone, Default)]
pub struct ModelOpts {
    pub path: PathBuf,
    pub selection: Selection,
    pub max_states: Option<usize>,
}

impl ModelOpts {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        ModelOpts {
            path: path.into(),
            ..Default::default()
        }
    }

    pub fn load(&self) -> Result<Model> {
        Ok(Model::load(&self.path, &self.selection, self.max_states)?)
    }
}

/// Runs `f`, turning errors into an error report and recording wall time.
pub fn guarded(command: &str, f: impl FnOnce(&mut Report) -> Result<()>) -> Report {
    let start = Instant::now();
    let mut r = Report::new(command);
    let mut r = match f(&mut r) {
        Ok(()) => r,
        Err(e) => Report::error(command, &e),
    };
    r.stat("wall_ms", start.elapsed().as_millis() as u64);
    r
}

/// A formula argument: `l =>> r` text, or JSON when it starts with `{`.
pub fn formula_arg(text: &str) -> Result<FormulaSpec> {
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).context("formula JSON");
    }
    Ok(FormulaSpec::Text(text.into()))
}

/// A predicate argument: expression text, JSON, or `@file` holding JSON.
pub fn pred_arg(text: &str) -> Result<PredSpec> {
    if let Some(path) = text.strip_prefix('@') {
        let t = crate::read(Path::new(path))?;
        return serde_json::from_str(&t).with_context(|| format!("predicate in {path}"));
    }
    if text.trim_start().starts_with('{') {
        return serde_json::from_str(text).context("predicate JSON");
    }
    Ok(PredSpec::Expr(text.into()))
}

fn path_witness(m: &Model, p: &FinitePath) -> Witness {
    Witness::Path(p.states().iter().map(|&s| m.show_state(s)).collect())
}

fn state_witness(m: &Model, s: StateId) -> Witness {
    Witness::State(m.show_state(s))
}

fn size_stats(r: &mut Report, m: &Model) {
    r.stat("states", m.system().len() as u64);
    r.stat("transitions", m.system().transition_count() as u64);
    if let Some(e) = m.efsm() {
        r.stat("range_warnings", e.warnings().len() as u64);
    }
}

fn write_json(path: &Path, v: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(v)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn load_formula(m: &Model, formula: &str) -> Result<ReachFormula> {
    let defs = Defs::new();
    Ok(m.resolver(&defs).formula(&formula_arg(formula)?)?)
}

pub fn check_valid(opts: &ModelOpts, formula: &str) -> Report {
    guarded("check-valid", |r| {
        let m = opts.load()?;
        let phi = load_formula(&m, formula)?;
        size_stats(r, &m);
        if let Some(e) = m.efsm() {
            let w = e.warnings_reachable_from(phi.lhs()).len();
            if w > 0 {
                r.note(
                    "model",
                    format!("{w} transition instance(s) reachable from l leave a variable range and were dropped"),
                );
            }
        }
        match holds_valid(m.system(), &phi)? {
            Verdict::Valid => r.status = Status::Valid,
            Verdict::Invalid { counterexample } => {
                r.status = Status::Invalid;
                r.fail(
                    "formula",
                    "a maximal path from l reaches a final state without meeting r",
                    Some(path_witness(&m, &counterexample)),
                );
            }
        }
        Ok(())
    })
}

pub fn certify(
    opts: &ModelOpts,
    formula: &str,
    invariant: &str,
    emit_script: Option<&Path>,
    emit_tree: Option<&Path>,
) -> Report {
    guarded("certify", |r| {
        let m = opts.load()?;
        let defs = Defs::new();
        let res = m.resolver(&defs);
        let cert = InvariantCertificate {
            q: res.pred(&pred_arg(invariant)?)?,
            target: res.formula(&formula_arg(formula)?)?,
        };
        size_stats(r, &m);
        r.stat("q_states", cert.q.count() as u64);
        certificate_details(r, &m, &cert)?;
        if r.status == Status::Accepted {
            if let Some(p) = emit_script {
                let s = gen_redtoinv2_script(m.system(), &cert)?;
                write_json(p, &script_to_spec(&s))?;
                r.note("emit", format!("phase script written to {}", p.display()));
            }
            if let Some(p) = emit_tree {
                let t = tactic_redtoinv3(m.system(), &cert)?;
                write_json(p, &tree_to_spec(&t))?;
                r.note("emit", format!("proof tree written to {}", p.display()));
            }
        }
        Ok(())
    })
}

fn certificate_details(r: &mut Report, m: &Model, cert: &InvariantCertificate) -> Result<()> {
    let rep = certify_invariant(m.system(), cert)?;
    for (cond, w) in rep.checks {
        match w {
            None => r.note(cond.symbol(), "holds"),
            Some(s) => {
                r.status = Status::Rejected;
                r.fail(cond.symbol(), "fails", Some(state_witness(m, s)));
            }
        }
    }
    Ok(())
}

pub fn synth(opts: &ModelOpts, formula: &str, emit: Option<&Path>) -> Report {
    guarded("synth-q", |r| {
        let m = opts.load()?;
        let phi = load_formula(&m, formula)?;
        let q = synth_q(m.system(), phi.rhs())?;
        size_stats(r, &m);
        r.stat("q_states", q.count() as u64);
        if let Some(p) = emit {
            write_json(p, &states_of(&q))?;
            r.note("emit", format!("invariant written to {}", p.display()));
        }
        certificate_details(r, &m, &InvariantCertificate { q, target: phi })
    })
}

pub fn autoprove_cmd(opts: &ModelOpts, formula: &str) -> Report {
    guarded("autoprove", |r| {
        let m = opts.load()?;
        let phi = load_formula(&m, formula)?;
        size_stats(r, &m);
        match autoprove(m.system(), &phi)? {
            Autoproof::Proved(p) => {
                for (i, l) in p.trace.iter().enumerate() {
                    r.note(format!("l_{i}"), format!("{} state(s)", l.count()));
                }
                r.stat("trace_len", p.trace.len() as u64);
                r.stat("cycle", p.cycle as u64);
                if let Err(e) = p.replay(m.system()) {
                    bail!("internal: cyclic proof does not replay: {e}");
                }
            }
            Autoproof::Refuted {
                witness,
                index,
                trace,
                counterexample,
            } => {
                r.status = Status::Rejected;
                for (i, l) in trace.iter().enumerate() {
                    r.note(format!("l_{i}"), format!("{} state(s)", l.count()));
                }
                r.fail(
                    format!("l_{index}"),
                    format!("final state outside r: {}", m.show_state(witness)),
                    Some(path_witness(&m, &counterexample)),
                );
            }
        }
        Ok(())
    })
}

pub fn check_script_cmd(opts: &ModelOpts, script: &Path) -> Report {
    guarded("check-script", |r| {
        let m = opts.load()?;
        let text = crate::read(script)?;
        let spec: ScriptSpec = serde_json::from_str(&text).map_err(|e| crate::Error::json(script, e))?;
        let s = script_from_spec(&m.resolver(&spec.defs), &spec)?;
        size_stats(r, &m);
        r.stat("phases", s.phases.len() as u64);
        r.stat(
            "entries",
            s.phases.iter().map(|p| p.entries.len()).sum::<usize>() as u64,
        );
        let rep = check_script(m.system(), &s)?;
        for p in &rep.phases {
            for (e, err) in &p.failures {
                let label = s.phases[p.index].entries[*e].label.as_deref().unwrap_or("");
                r.fail(
                    format!("phase {} entry {e} {label}", p.index).trim_end().to_string(),
                    err.to_string(),
                    err.witness().map(|w| state_witness(&m, w)),
                );
            }
        }
        if !rep.target_in_origin {
            r.fail("target", "the target is not in X0", None);
        }
        if !rep.ends_empty {
            r.fail("phases", "the last phase must be empty", None);
        }
        r.status = if rep.accepted() {
            Status::Accepted
        } else {
            Status::Rejected
        };
        Ok(())
    })
}

/// Adds one detail per failed node; true when there were none.
fn tree_failures(r: &mut Report, m: &Model, prefix: &str, failures: &[NodeFailure]) -> bool {
    for f in failures {
        r.fail(
            format!("{prefix}{}", f.location()),
            format!("[{}] {}", f.rule, f.error),
            f.error.witness().map(|w| state_witness(m, w)),
        );
    }
    failures.is_empty()
}

pub fn check_tree_cmd(opts: &ModelOpts, tree: &Path) -> Report {
    guarded("check-tree", |r| {
        let text = crate::read(tree)?;
        match TreeDoc::parse(&text, &tree.display().to_string())? {
            TreeDoc::Tree(file) => {
                let m = opts.load()?;
                let t = tree_from_spec(&m.resolver(&file.defs), &file.tree)?;
                size_stats(r, &m);
                let rep = check_tree(m.system(), &t);
                r.stat("nodes", rep.nodes as u64);
                let _ = tree_failures(r, &m, "", &rep.failures);
                r.status = if rep.accepted() {
                    Status::Accepted
                } else {
                    Status::Rejected
                };
            }
            TreeDoc::Bundle(b) => check_bundle(r, opts, &b)?,
        }
        Ok(())
    })
}

/// Checks a component bundle: both component proofs, their composition into
/// claims about the whole system, and the main tree citing those claims.
pub fn check_bundle(r: &mut Report, opts: &ModelOpts, b: &BundleSpec) -> Result<()> {
    if !opts.selection.is_empty() {
        bail!("a bundle selects its own components; drop --select-arrows/--select-nodes");
    }
    let text = crate::read(&opts.path)?;
    let efsm = parse_model(&text).map_err(|e| crate::Error::Parse {
        path: opts.path.display().to_string(),
        source: e,
    })?;
    let full = Model::from_efsm(&efsm, &Selection::default(), opts.max_states)?;
    size_stats(r, &full);
    let mut ok = true;
    let mut subs = Vec::new();
    let mut trees = Vec::new();
    for c in &b.components {
        let sel = Selection {
            arrows: c.select_arrows.clone(),
            nodes: c.select_nodes.clone(),
        };
        let sub = Model::from_efsm(&efsm, &sel, opts.max_states).with_context(|| format!("component {}", c.name))?;
        let t = tree_from_spec(&sub.resolver(&b.defs), &c.tree).with_context(|| format!("component {}", c.name))?;
        let rep = check_tree(sub.system(), &t);
        if rep.accepted() {
            r.note(
                format!("component {}", c.name),
                format!("proof accepted ({} nodes)", rep.nodes),
            );
        }
        ok &= tree_failures(r, &sub, &format!("component {}: ", c.name), &rep.failures);
        subs.push(sub);
        trees.push(t);
    }
    let res = full.resolver(&b.defs);
    let hyps = b
        .compose
        .hyps
        .iter()
        .map(|h| {
            let tag = match h.tag.as_str() {
                "T" => rlv_core::three::Tag::T,
                "F" => rlv_core::three::Tag::F,
                other => bail!("tag must be T or F, found `{other}`"),
            };
            Ok(TaggedFormula::new(tag, res.formula(&h.formula)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let phis = [res.formula(&b.compose.phis[0])?, res.formula(&b.compose.phis[1])?];
    let parts = [0, 1].map(|i| ComponentProof {
        system: subs[i].system(),
        reading: ComponentReading::from(b.components[i].reading),
        tree: &trees[i],
    });
    let claims: Vec<LiftedClaim> = match tactic_compose_components(full.system(), parts, &hyps, [&phis[0], &phis[1]]) {
        Ok(c) => c.into(),
        Err(e) => {
            let name = |i: usize| b.components[i].name.clone();
            match e {
                ComposeError::NotComponent { index, verdict } => {
                    for v in &verdict.violations {
                        r.fail(
                            format!("component {}: condition ({})", name(index), v.condition.label()),
                            violation_text(&full, v),
                            None,
                        );
                    }
                }
                ComposeError::Rejected { index, failure } => {
                    let _ = tree_failures(r, &subs[index], &format!("component {}: ", name(index)), &[failure]);
                }
                other => r.fail("compose", other.to_string(), None),
            }
            r.status = Status::Rejected;
            return Ok(());
        }
    };
    for (i, c) in claims.iter().enumerate() {
        r.note(
            format!("compose φ{i}"),
            format!(
                "claimed on the whole system by {} from component {}",
                c.lemma().name(),
                b.components[i].name
            ),
        );
    }
    let main = tree_from_spec(&res, &b.tree).context("main tree")?;
    let refs: Vec<&LiftedClaim> = claims.iter().collect();
    let rep = check_tree_with(full.system(), &main, &refs);
    r.stat("nodes", rep.nodes as u64);
    if rep.accepted() {
        r.note("main", format!("proof accepted ({} nodes)", rep.nodes));
    }
    ok &= tree_failures(r, &full, "main: ", &rep.failures);
    r.status = if ok { Status::Accepted } else { Status::Rejected };
    Ok(())
}

pub fn component_cmd(opts: &ModelOpts, reading: ComponentReading) -> Report {
    guarded("component", |r| {
        if opts.selection.is_empty() {
            bail!("component needs --select-arrows and/or --select-nodes");
        }
        let text = crate::read(&opts.path)?;
        let efsm = parse_model(&text).map_err(|e| crate::Error::Parse {
            path: opts.path.display().to_string(),
            source: e,
        })?;
        let full = Model::from_efsm(&efsm, &Selection::default(), opts.max_states)?;
        let sub = Model::from_efsm(&efsm, &opts.selection, opts.max_states)?;
        r.stat("states", full.system().len() as u64);
        r.stat("component_states", sub.system().len() as u64);
        let v = is_component(sub.system(), full.system(), reading);
        let other = match reading {
            ComponentReading::Literal => ComponentReading::ExitThroughFinals,
            ComponentReading::ExitThroughFinals => ComponentReading::Literal,
        };
        r.stat("reading", reading_name(reading));
        r.stat(
            &format!("component_under_{}", reading_name(other)),
            is_component(sub.system(), full.system(), other).is_component(),
        );
        use rlv_core::component::Condition;
        for c in [Condition::Inclusion, Condition::Full, Condition::Exit] {
            let n = v.counts[c as usize];
            if n == 0 {
                r.note(format!("condition ({})", c.label()), "holds");
            } else {
                r.fail(format!("condition ({})", c.label()), format!("{n} violation(s)"), None);
                for w in v.violations.iter().filter(|w| w.condition == c) {
                    r.fail(format!("condition ({})", c.label()), violation_text(&full, w), None);
                }
            }
        }
        r.status = if v.is_component() {
            Status::Accepted
        } else {
            Status::Rejected
        };
        Ok(())
    })
}

fn violation_text(m: &Model, v: &rlv_core::component::ComponentViolation) -> String {
    match &v.to {
        Some(to) => format!("transition {} -> {}", m.show(&v.from), m.show(to)),
        None => format!("state {}", m.show(&v.from)),
    }
}

pub fn reading_name(r: ComponentReading) -> &'static str {
    match r {
        ComponentReading::Literal => "literal",
        ComponentReading::ExitThroughFinals => "exit-through-finals",
    }
}

pub fn expand_cmd(opts: &ModelOpts) -> Report {
    guarded("expand", |r| {
        let m = opts.load()?;
        size_stats(r, &m);
        r.stat("finals", m.system().finals().count() as u64);
        if let Some(e) = m.efsm() {
            for w in e.warnings().iter().take(8) {
                r.note(
                    format!("arrow {}", w.arrow),
                    format!(
                        "from {}: {} := {} leaves its range; instance dropped",
                        w.source, w.var, w.value
                    ),
                );
            }
        }
        Ok(())
    })
}
