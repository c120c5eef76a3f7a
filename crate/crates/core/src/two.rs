//! The mixed inductive/coinductive proof system `⊩`.
//!
//! An infinite derivation is represented by a phase script: sets
//! `X_0, …, X_n = ∅` where every formula of `X_i` is concluded by one rule
//! whose premises lie in `X_{i+1}`. The coinductive `[Stp]` is the exception:
//! its premise must lie in `X_0`, which ties the knot `Y = X_0`. Formulas are
//! compared extensionally.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use crate::formula::ReachFormula;
use crate::one::{certify_invariant, InvariantCertificate, OneError, SideCondition};
use crate::path::FinitePath;
use crate::pred::{Mismatch, StatePredicate};
use crate::semantics::holds_valid_unchecked;
use crate::semantics::Verdict;
use crate::system::{StateId, TransitionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    Hyp,
    Trv,
    Str,
    Spl,
    Tra,
    Stp,
}

impl Rule {
    pub const ALL: [Rule; 6] = [Rule::Hyp, Rule::Trv, Rule::Str, Rule::Spl, Rule::Tra, Rule::Stp];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Hyp => "Hyp",
            Rule::Trv => "Trv",
            Rule::Str => "Str",
            Rule::Spl => "Spl",
            Rule::Tra => "Tra",
            Rule::Stp => "Stp",
        }
    }

    pub fn from_name(s: &str) -> Option<Rule> {
        Rule::ALL.into_iter().find(|r| r.name() == s)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where a premise lives: the next phase, or `X_0` for `[Stp]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PremiseRef {
    Next(usize),
    Origin(usize),
}

impl fmt::Display for PremiseRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PremiseRef::Next(i) => write!(f, "{i}"),
            PremiseRef::Origin(i) => write!(f, "X0:{i}"),
        }
    }
}

/// How the semantic premise `S ⊨ l =>> m` of `[Tra]` is established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraDischarge {
    /// Decided by the validity oracle.
    Oracle,
    /// An invariant certificate for `l =>> m`; sound because `⊢` is.
    Certificate(StatePredicate),
    /// Membership of `l =>> m` in the hypotheses. Never sufficient: the
    /// premise is semantic, not a derivation under `H`.
    Hypothesis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleParams {
    None,
    /// The strengthened left-hand side `l′`.
    Str(StatePredicate),
    Tra {
        mid: StatePredicate,
        discharge: Option<TraDischarge>,
    },
}

/// One justified formula of a phase.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RuleApp {
    pub rule: Rule,
    pub conclusion: ReachFormula,
    pub premises: Vec<PremiseRef>,
    pub params: RuleParams,
    /// Free-form name used in outlines, e.g. `q =>> r`.
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Phase {
    pub entries: Vec<RuleApp>,
}

impl Phase {
    pub fn formulas(&self) -> impl Iterator<Item = &ReachFormula> {
        self.entries.iter().map(|e| &e.conclusion)
    }
}

/// `phases` lists `X_0, …, X_n`; an empty list stands for `X_0 = ∅`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseScript {
    pub hypotheses: Vec<ReachFormula>,
    pub target: Option<ReachFormula>,
    pub phases: Vec<Phase>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Mismatch(#[from] Mismatch),
    #[error("{rule} takes {expected} premise(s), found {found}")]
    PremiseCount { rule: Rule, expected: usize, found: usize },
    #[error("the premise of Stp must be in X0, found {0}")]
    KnotOutsideOrigin(PremiseRef),
    #[error("only Stp may refer back to X0, found {0}")]
    OriginInInductive(PremiseRef),
    #[error("premise {0} does not exist")]
    PremiseRange(PremiseRef),
    #[error("premise {premise} is not of the form required by {rule}")]
    PremiseShape { rule: Rule, premise: PremiseRef },
    #[error("{rule} is missing its parameters")]
    MissingParams { rule: Rule },
    #[error("conclusion is not a hypothesis")]
    NotHypothesis,
    #[error("Trv needs identical sides; state #{} differs", witness.0)]
    NotTrivial { witness: StateId },
    #[error("Str needs l ⊑ l′; state #{} is in l only", witness.0)]
    NotStronger { witness: StateId },
    #[error("Spl premises do not join to the conclusion; state #{} differs", witness.0)]
    NotSplit { witness: StateId },
    #[error("Stp needs l ⊓ • ⊑ ⊥; state #{} is final", witness.0)]
    FinalInLhs { witness: StateId },
    #[error("Tra has no discharge for its semantic premise")]
    MissingDischarge,
    #[error("Tra's semantic premise cannot be discharged by a hypothesis")]
    HypothesisDischarge,
    #[error("Tra's semantic premise l =>> m is invalid")]
    DischargeInvalid { counterexample: FinitePath },
    #[error("Tra's certificate fails `{condition}` at state #{}", witness.0)]
    CertificateRejected { condition: SideCondition, witness: StateId },
}

impl AppError {
    /// A state demonstrating the failure, if the failure has one.
    pub fn witness(&self) -> Option<StateId> {
        match self {
            AppError::NotTrivial { witness }
            | AppError::NotStronger { witness }
            | AppError::NotSplit { witness }
            | AppError::FinalInLhs { witness }
            | AppError::CertificateRejected { witness, .. } => Some(*witness),
            AppError::DischargeInvalid { counterexample } => Some(counterexample.last()),
            _ => None,
        }
    }
}

fn diff(a: &StatePredicate, b: &StatePredicate) -> Option<StateId> {
    a.first_outside(b).or_else(|| b.first_outside(a))
}

fn fetch<'a>(
    r: PremiseRef,
    x0: &'a [ReachFormula],
    next: &'a [ReachFormula],
    rule: Rule,
) -> Result<&'a ReachFormula, AppError> {
    match (r, rule) {
        (PremiseRef::Next(_), Rule::Stp) => Err(AppError::KnotOutsideOrigin(r)),
        (PremiseRef::Origin(_), rule) if rule != Rule::Stp => Err(AppError::OriginInInductive(r)),
        (PremiseRef::Next(i), _) => next.get(i).ok_or(AppError::PremiseRange(r)),
        (PremiseRef::Origin(i), _) => x0.get(i).ok_or(AppError::PremiseRange(r)),
    }
}

/// Checks one rule application against the hypotheses `H`, the origin
/// phase `X_0` and the next phase.
pub fn check_rule_app(
    sys: &TransitionSystem,
    hyps: &[ReachFormula],
    x0: &[ReachFormula],
    app: &RuleApp,
    next: &[ReachFormula],
) -> Result<(), AppError> {
    let (l, r) = (app.conclusion.lhs(), app.conclusion.rhs());
    sys.owns(l)?;
    sys.owns(r)?;
    for f in hyps.iter().chain(x0).chain(next) {
        sys.owns(f.lhs())?;
    }
    let expected = match app.rule {
        Rule::Hyp | Rule::Trv => 0,
        Rule::Str | Rule::Tra | Rule::Stp => 1,
        Rule::Spl => 2,
    };
    if app.premises.len() != expected {
        return Err(AppError::PremiseCount {
            rule: app.rule,
            expected,
            found: app.premises.len(),
        });
    }
    let prem = app
        .premises
        .iter()
        .map(|&p| fetch(p, x0, next, app.rule))
        .collect::<Result<Vec<_>, _>>()?;
    let shape = |i: usize| AppError::PremiseShape {
        rule: app.rule,
        premise: app.premises[i],
    };
    match app.rule {
        Rule::Hyp => {
            if !hyps.contains(&app.conclusion) {
                return Err(AppError::NotHypothesis);
            }
        }
        Rule::Trv => {
            if let Some(w) = diff(l, r) {
                return Err(AppError::NotTrivial { witness: w });
            }
        }
        Rule::Str => {
            let RuleParams::Str(l2) = &app.params else {
                return Err(AppError::MissingParams { rule: Rule::Str });
            };
            sys.owns(l2)?;
            if prem[0].lhs() != l2 || prem[0].rhs() != r {
                return Err(shape(0));
            }
            if let Some(w) = l.first_outside(l2) {
                return Err(AppError::NotStronger { witness: w });
            }
        }
        Rule::Spl => {
            if prem[0].rhs() != r {
                return Err(shape(0));
            }
            if prem[1].rhs() != r {
                return Err(shape(1));
            }
            if let Some(w) = diff(&prem[0].lhs().union(prem[1].lhs()), l) {
                return Err(AppError::NotSplit { witness: w });
            }
        }
        Rule::Tra => {
            let RuleParams::Tra { mid, discharge } = &app.params else {
                return Err(AppError::MissingParams { rule: Rule::Tra });
            };
            sys.owns(mid)?;
            if prem[0].lhs() != mid || prem[0].rhs() != r {
                return Err(shape(0));
            }
            discharge_tra(sys, l, mid, discharge.as_ref())?;
        }
        Rule::Stp => {
            if let Some(w) = l.intersect(sys.finals()).first() {
                return Err(AppError::FinalInLhs { witness: w });
            }
            if prem[0].lhs() != &sys.post_unchecked(l) || prem[0].rhs() != r {
                return Err(shape(0));
            }
        }
    }
    Ok(())
}

fn discharge_tra(
    sys: &TransitionSystem,
    l: &StatePredicate,
    mid: &StatePredicate,
    discharge: Option<&TraDischarge>,
) -> Result<(), AppError> {
    match discharge {
        None => Err(AppError::MissingDischarge),
        Some(TraDischarge::Hypothesis) => Err(AppError::HypothesisDischarge),
        Some(TraDischarge::Oracle) => match holds_valid_unchecked(sys, l, mid) {
            Verdict::Valid => Ok(()),
            Verdict::Invalid { counterexample } => Err(AppError::DischargeInvalid { counterexample }),
        },
        Some(TraDischarge::Certificate(q)) => {
            let cert = InvariantCertificate {
                q: q.clone(),
                target: ReachFormula::new(l.clone(), mid.clone())?,
            };
            match certify_invariant(sys, &cert)?.into_result() {
                Ok(()) => Ok(()),
                Err(OneError::Side { condition, witness }) => Err(AppError::CertificateRejected { condition, witness }),
                Err(OneError::Mismatch(m)) => Err(m.into()),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseOutcome {
    pub index: usize,
    /// `(entry index, error)` for every rejected entry.
    pub failures: Vec<(usize, AppError)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptReport {
    pub phases: Vec<PhaseOutcome>,
    /// False when a target is given and absent from `X_0`.
    pub target_in_origin: bool,
    /// False when the last phase is nonempty.
    pub ends_empty: bool,
}

impl ScriptReport {
    pub fn accepted(&self) -> bool {
        self.target_in_origin && self.ends_empty && self.phases.iter().all(|p| p.failures.is_empty())
    }

    /// First failing `(phase, entry, error)`.
    pub fn first_failure(&self) -> Option<(usize, usize, &AppError)> {
        self.phases
            .iter()
            .find_map(|p| p.failures.first().map(|(e, err)| (p.index, *e, err)))
    }
}

/// Checks a whole script. Accepted scripts conclude every formula of `X_0`
/// (in particular the target) under the script's hypotheses.
pub fn check_script(sys: &TransitionSystem, script: &PhaseScript) -> Result<ScriptReport, Mismatch> {
    for h in &script.hypotheses {
        sys.owns(h.lhs())?;
    }
    let sets: Vec<Vec<ReachFormula>> = script.phases.iter().map(|p| p.formulas().cloned().collect()).collect();
    let empty = Vec::new();
    let x0 = sets.first().unwrap_or(&empty);
    let mut phases = Vec::new();
    for (i, phase) in script.phases.iter().enumerate() {
        let next = sets.get(i + 1).unwrap_or(&empty);
        let failures = phase
            .entries
            .iter()
            .enumerate()
            .filter_map(|(e, app)| {
                check_rule_app(sys, &script.hypotheses, x0, app, next)
                    .err()
                    .map(|err| (e, err))
            })
            .collect();
        phases.push(PhaseOutcome { index: i, failures });
    }
    let target_in_origin = match &script.target {
        None => true,
        Some(t) => x0.contains(t),
    };
    Ok(ScriptReport {
        phases,
        target_in_origin,
        ends_empty: script.phases.last().is_none_or(|p| p.entries.is_empty()),
    })
}

/// A formula of the generated script together with its role name.
#[derive(Clone)]
struct Item {
    formula: ReachFormula,
    label: &'static str,
}

enum Plan {
    /// `[Str]` to the given next-phase item (a carry-over when equal).
    Str(Item),
    Spl(Item, Item),
    Trv,
    /// `[Stp]` whose premise is the given origin item.
    Stp(Item),
}

/// The script of the redtoinv2 derivation: eight justified phases with
/// headline rules Str, Spl, Trv, Stp, Str, Spl, Trv, Stp, then `X_8 = ∅`.
/// Every other formula of a phase is carried over by `[Str]` with `l′ = l`.
/// Extensionally equal formulas are merged.
pub fn gen_redtoinv2_script(sys: &TransitionSystem, cert: &InvariantCertificate) -> Result<PhaseScript, OneError> {
    certify_invariant(sys, cert)?.into_result()?;
    let (l, r, q) = (cert.target.lhs(), cert.target.rhs(), &cert.q);
    let dq = sys.post_unchecked(q);
    let qr = q.union(r);
    let it = |p: &StatePredicate, label| Item {
        formula: ReachFormula::pair(p.clone(), r.clone()),
        label,
    };
    let (il, iq, idq, iqr, ir) = (
        it(l, "l =>> r"),
        it(q, "q =>> r"),
        it(&dq, "∂q =>> r"),
        it(&qr, "(q ⊔ r) =>> r"),
        it(r, "r =>> r"),
    );
    let carry = |i: &Item| (i.clone(), Plan::Str(i.clone()));
    let plans: Vec<Vec<(Item, Plan)>> = vec![
        vec![(il.clone(), Plan::Str(iqr.clone())), carry(&iq), carry(&idq)],
        vec![
            (iqr.clone(), Plan::Spl(iq.clone(), ir.clone())),
            carry(&iq),
            carry(&idq),
        ],
        vec![carry(&iq), (ir.clone(), Plan::Trv), carry(&idq)],
        vec![(iq.clone(), Plan::Stp(idq.clone())), carry(&idq)],
        vec![(idq.clone(), Plan::Str(iqr.clone()))],
        vec![(iqr.clone(), Plan::Spl(iq.clone(), ir.clone()))],
        vec![carry(&iq), (ir.clone(), Plan::Trv)],
        vec![(iq.clone(), Plan::Stp(idq.clone()))],
    ];

    // Merge extensionally equal formulas, keeping the first plan.
    let sets: Vec<Vec<&(Item, Plan)>> = plans
        .iter()
        .map(|phase| {
            let mut out: Vec<&(Item, Plan)> = Vec::new();
            for entry in phase {
                if !out.iter().any(|e| e.0.formula == entry.0.formula) {
                    out.push(entry);
                }
            }
            out
        })
        .collect();
    let index_in = |set: &[&(Item, Plan)], f: &ReachFormula| {
        set.iter()
            .position(|e| &e.0.formula == f)
            .expect("planned premise present in the next phase")
    };

    let mut phases = Vec::new();
    for (i, set) in sets.iter().enumerate() {
        let empty = Vec::new();
        let next = sets.get(i + 1).unwrap_or(&empty);
        let entries = set
            .iter()
            .map(|(item, plan)| {
                let (rule, premises, params) = match plan {
                    Plan::Str(p) => (
                        Rule::Str,
                        vec![PremiseRef::Next(index_in(next, &p.formula))],
                        RuleParams::Str(p.formula.lhs().clone()),
                    ),
                    Plan::Spl(a, b) => (
                        Rule::Spl,
                        vec![
                            PremiseRef::Next(index_in(next, &a.formula)),
                            PremiseRef::Next(index_in(next, &b.formula)),
                        ],
                        RuleParams::None,
                    ),
                    Plan::Trv => (Rule::Trv, vec![], RuleParams::None),
                    Plan::Stp(p) => (
                        Rule::Stp,
                        vec![PremiseRef::Origin(index_in(&sets[0], &p.formula))],
                        RuleParams::None,
                    ),
                };
                RuleApp {
                    rule,
                    conclusion: item.formula.clone(),
                    premises,
                    params,
                    label: Some(item.label.into()),
                }
            })
            .collect();
        phases.push(Phase { entries });
    }
    phases.push(Phase::default());
    Ok(PhaseScript {
        hypotheses: Vec::new(),
        target: Some(cert.target.clone()),
        phases,
    })
}

/// A `[Tra]` step splitting `goal` at `mid`. Its premise `mid =>> rhs` is
/// expected at `premise` in the next phase and is returned for placement.
pub fn prove_seq_tra(
    sys: &TransitionSystem,
    goal: &ReachFormula,
    mid: &StatePredicate,
    discharge: TraDischarge,
    premise: usize,
) -> Result<(RuleApp, ReachFormula), AppError> {
    sys.owns(goal.lhs())?;
    sys.owns(mid)?;
    discharge_tra(sys, goal.lhs(), mid, Some(&discharge))?;
    let app = RuleApp {
        rule: Rule::Tra,
        conclusion: goal.clone(),
        premises: vec![PremiseRef::Next(premise)],
        params: RuleParams::Tra {
            mid: mid.clone(),
            discharge: Some(discharge),
        },
        label: None,
    };
    Ok((app, goal.with_lhs(mid.clone())))
}

impl PhaseScript {
    /// One line per phase: headline rule (the non-carry rule, if unique)
    /// and `label:rule[premises]` per entry. Used for golden comparisons.
    pub fn outline(&self) -> String {
        let mut s = String::new();
        for (i, p) in self.phases.iter().enumerate() {
            let heads: Vec<Rule> = p.entries.iter().filter(|e| !is_carry(e)).map(|e| e.rule).collect();
            let head = match heads.as_slice() {
                [] if p.entries.is_empty() => "∅".into(),
                [] => "Str".into(),
                [one] => format!("{one}"),
                many => many.iter().map(|r| r.name()).collect::<Vec<_>>().join("+"),
            };
            let _ = write!(s, "X{i} [{head}]");
            for e in &p.entries {
                let prem: Vec<String> = e.premises.iter().map(|p| format!("{p}")).collect();
                let _ = write!(
                    s,
                    " | {} :{}[{}]",
                    e.label.as_deref().unwrap_or("?"),
                    e.rule,
                    prem.join(",")
                );
            }
            s.push('\n');
        }
        s
    }

    /// The headline rule of each justified phase.
    pub fn headline_rules(&self) -> Vec<Option<Rule>> {
        self.phases
            .iter()
            .filter(|p| !p.entries.is_empty())
            .map(|p| {
                let mut heads = p.entries.iter().filter(|e| !is_carry(e)).map(|e| e.rule);
                match (heads.next(), heads.next()) {
                    (Some(r), None) => Some(r),
                    (None, _) => Some(Rule::Str),
                    _ => None,
                }
            })
            .collect()
    }
}

/// `[Str]` with `l′ = l`.
fn is_carry(e: &RuleApp) -> bool {
    e.rule == Rule::Str && matches!(&e.params, RuleParams::Str(l2) if l2 == e.conclusion.lhs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::efsm::{expand, parse_model, select_component, Expansion};
    use crate::one::synth_q;
    use crate::semantics::holds_valid;
    use crate::system::tests::{chain, from_edges, random_formula};
    use proptest::prelude::*;

    const SUM: &str = "system sum { nodes c0 c1 c2 ;
        var i : 0..11 ; var s : 0..66 ; var m : 0..10 ;
        trans c0 -> c1 { i := 0 ; s := 0 ; }
        trans c1 -> c1 when i < m { i := i + 1 ; s := s + i + 1 ; }
        trans c1 -> c2 when i >= m { } }";

    fn sum() -> Expansion {
        expand(&parse_model(SUM).unwrap()).unwrap()
    }

    fn sum_loop_cert() -> (Expansion, InvariantCertificate) {
        let m = parse_model(SUM).unwrap();
        let e = expand(&select_component(&m, &[1], &["c1"]).unwrap()).unwrap();
        let target = e
            .formula("c = c1 && i = 0 && s = 0 =>> c = c1 && i = m && s = i*(i+1) div 2")
            .unwrap();
        let q = e.pred("c = c1 && i < m && s = i*(i+1) div 2").unwrap();
        (e, InvariantCertificate { q, target })
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

    #[test]
    fn trv_and_hyp() {
        let sys = chain(2);
        let b = sys.singleton(StateId(1));
        let bb = ReachFormula::new(b.clone(), b.clone()).unwrap();
        assert_eq!(
            check_rule_app(
                &sys,
                &[],
                &[],
                &app(Rule::Trv, bb.clone(), vec![], RuleParams::None),
                &[]
            ),
            Ok(())
        );
        let ab = ReachFormula::new(sys.singleton(StateId(0)), b).unwrap();
        assert!(matches!(
            check_rule_app(
                &sys,
                &[],
                &[],
                &app(Rule::Trv, ab.clone(), vec![], RuleParams::None),
                &[]
            ),
            Err(AppError::NotTrivial { .. })
        ));
        let hyp = app(Rule::Hyp, ab.clone(), vec![], RuleParams::None);
        assert_eq!(check_rule_app(&sys, core::slice::from_ref(&ab), &[], &hyp, &[]), Ok(()));
        assert_eq!(
            check_rule_app(&sys, &[bb], &[], &hyp, &[]),
            Err(AppError::NotHypothesis)
        );
    }

    #[test]
    fn generated_script_matches_derivation() {
        let (e, cert) = sum_loop_cert();
        let script = gen_redtoinv2_script(e.system(), &cert).unwrap();
        assert_eq!(script.phases.len(), 9);
        assert!(script.phases[8].entries.is_empty());
        use Rule::*;
        let heads: Vec<_> = script.headline_rules().into_iter().map(Option::unwrap).collect();
        assert_eq!(heads, [Str, Spl, Trv, Stp, Str, Spl, Trv, Stp]);
        let q = &cert.q;
        let r = cert.target.rhs();
        // X5 = {(q ⊔ r) =>> r}
        let x5: Vec<_> = script.phases[5].formulas().cloned().collect();
        assert_eq!(x5, [ReachFormula::new(q.join(r).unwrap(), r.clone()).unwrap()]);
        let rep = check_script(e.system(), &script).unwrap();
        assert!(rep.accepted(), "{rep:?}");
    }

    #[test]
    fn degenerate_script() {
        let sys = chain(3);
        let r = sys.predicate([StateId(1), StateId(2)]);
        let cert = InvariantCertificate {
            q: sys.bot(),
            target: ReachFormula::new(sys.singleton(StateId(1)), r).unwrap(),
        };
        let script = gen_redtoinv2_script(&sys, &cert).unwrap();
        assert!(check_script(&sys, &script).unwrap().accepted());
    }

    #[test]
    fn generation_refused_for_non_closed_q() {
        // s0 → s1 → s2 with q = {s0}, r = ∅: ∂q = {s1} escapes
        let sys = chain(3);
        let cert = InvariantCertificate {
            q: sys.singleton(StateId(0)),
            target: ReachFormula::new(sys.singleton(StateId(0)), sys.bot()).unwrap(),
        };
        assert_eq!(
            gen_redtoinv2_script(&sys, &cert),
            Err(OneError::Side {
                condition: SideCondition::Closed,
                witness: StateId(1)
            })
        );
    }

    #[test]
    fn empty_scripts() {
        let sys = chain(2);
        let mut s = PhaseScript {
            hypotheses: vec![],
            target: None,
            phases: vec![Phase::default()],
        };
        assert!(check_script(&sys, &s).unwrap().accepted());
        s.phases.clear();
        assert!(check_script(&sys, &s).unwrap().accepted());
        s.target = Some(ReachFormula::new(sys.top(), sys.top()).unwrap());
        assert!(!check_script(&sys, &s).unwrap().accepted());
    }

    #[test]
    fn stp_knot_must_close_at_origin() {
        let (e, cert) = sum_loop_cert();
        let mut script = gen_redtoinv2_script(e.system(), &cert).unwrap();
        let stp = script.phases[3]
            .entries
            .iter_mut()
            .find(|a| a.rule == Rule::Stp)
            .unwrap();
        stp.premises = vec![PremiseRef::Next(0)];
        let rep = check_script(e.system(), &script).unwrap();
        assert!(matches!(
            rep.first_failure(),
            Some((3, _, AppError::KnotOutsideOrigin(_)))
        ));
    }

    #[test]
    fn mutation_classes_are_rejected() {
        let (e, cert) = sum_loop_cert();
        let sys = e.system();
        let base = gen_redtoinv2_script(sys, &cert).unwrap();

        // Str with l ⋢ l′
        let mut s = base.clone();
        s.phases[0].entries[0].params = RuleParams::Str(cert.q.clone());
        assert!(!check_script(sys, &s).unwrap().accepted());

        // Stp with a final state in l
        let mut s = base.clone();
        let top = ReachFormula::new(sys.top(), cert.target.rhs().clone()).unwrap();
        s.phases[7].entries[0].conclusion = top;
        let rep = check_script(sys, &s).unwrap();
        assert!(matches!(
            rep.phases[7].failures.as_slice(),
            [(0, AppError::FinalInLhs { .. })]
        ));

        // wrong premise set: Spl pointing twice at the same formula
        let mut s = base.clone();
        s.phases[5].entries[0].premises = vec![PremiseRef::Next(0), PremiseRef::Next(0)];
        assert!(!check_script(sys, &s).unwrap().accepted());

        // premise out of range
        let mut s = base;
        s.phases[4].entries[0].premises = vec![PremiseRef::Next(9)];
        assert!(!check_script(sys, &s).unwrap().accepted());
    }

    #[test]
    fn tra_discharges() {
        let e = sum();
        let sys = e.system();
        let goal = e.formula("c = c0 =>> c = c2 && s = m*(m+1) div 2").unwrap();
        let mid = e.pred("c = c1 && i = 0 && s = 0").unwrap();
        // the first stage is certified by the invariant ∂(c = c0) ⊓ … : q = c0
        let q = e.pred("c = c0").unwrap();
        let (tra, prem) = prove_seq_tra(sys, &goal, &mid, TraDischarge::Certificate(q), 0).unwrap();
        assert_eq!(prem.lhs(), &mid);
        assert_eq!(
            check_rule_app(sys, &[], &[], &tra, core::slice::from_ref(&prem)),
            Ok(())
        );
        assert!(prove_seq_tra(sys, &goal, &mid, TraDischarge::Oracle, 0).is_ok());

        // identity split
        let (_, p) = prove_seq_tra(sys, &goal, &goal.lhs().clone(), TraDischarge::Oracle, 0).unwrap();
        assert_eq!(&p, &goal);

        // unreachable midpoint
        let sys3 = chain(3);
        let g = ReachFormula::new(sys3.singleton(StateId(1)), sys3.singleton(StateId(2))).unwrap();
        let err = prove_seq_tra(&sys3, &g, &sys3.singleton(StateId(0)), TraDischarge::Oracle, 0).unwrap_err();
        assert!(matches!(err, AppError::DischargeInvalid { .. }));
        assert_eq!(err.witness(), Some(StateId(2)));
    }

    #[test]
    fn tra_with_hypothesis_gets_stuck() {
        // H = {(c = c0) =>> (c = c1 ∧ i = 0 ∧ s = 0)}; split the goal at that
        // midpoint, hoping to use H for the first half
        let e = sum();
        let sys = e.system();
        let h = e.formula("c = c0 =>> c = c1 && i = 0 && s = 0").unwrap();
        let goal = e.formula("c = c0 =>> c = c2 && s = m*(m+1) div 2").unwrap();
        let mid = h.rhs().clone();
        let rest = goal.with_lhs(mid.clone());
        let tra = app(
            Rule::Tra,
            goal.clone(),
            vec![PremiseRef::Next(0)],
            RuleParams::Tra {
                mid: mid.clone(),
                discharge: Some(TraDischarge::Hypothesis),
            },
        );
        assert_eq!(
            check_rule_app(sys, core::slice::from_ref(&h), &[], &tra, core::slice::from_ref(&rest)),
            Err(AppError::HypothesisDischarge)
        );
        let mut none = tra.clone();
        none.params = RuleParams::Tra { mid, discharge: None };
        assert_eq!(
            check_rule_app(sys, &[h], &[], &none, &[rest]),
            Err(AppError::MissingDischarge)
        );
    }

    #[test]
    fn outline_is_stable() {
        let (e, cert) = sum_loop_cert();
        let script = gen_redtoinv2_script(e.system(), &cert).unwrap();
        let o = script.outline();
        assert!(
            o.starts_with("X0 [Str] | l =>> r :Str[0] | q =>> r :Str[1] | ∂q =>> r :Str[2]\n"),
            "{o}"
        );
        assert!(o.contains("X3 [Stp] | q =>> r :Stp[X0:2] | ∂q =>> r :Str[0]\n"), "{o}");
        assert!(o.ends_with("X8 [∅]\n"));
    }

    #[test]
    fn premises_into_wrong_system() {
        let a = chain(2);
        let b = from_edges(2, &[]);
        let f = ReachFormula::new(b.top(), b.top()).unwrap();
        let x = app(Rule::Trv, f, vec![], RuleParams::None);
        assert!(matches!(
            check_rule_app(&a, &[], &[], &x, &[]),
            Err(AppError::Mismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn generated_scripts_are_sound_and_accepted((sys, phi) in random_formula()) {
            let q = synth_q(&sys, phi.rhs()).unwrap();
            let cert = InvariantCertificate { q, target: phi.clone() };
            match gen_redtoinv2_script(&sys, &cert) {
                Ok(script) => {
                    prop_assert!(check_script(&sys, &script).unwrap().accepted());
                    prop_assert!(holds_valid(&sys, &phi).unwrap().is_valid());
                }
                Err(_) => prop_assert!(!holds_valid(&sys, &phi).unwrap().is_valid()),
            }
        }
    }
}
