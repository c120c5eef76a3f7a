//! The tagged inductive proof system `⊨⊨`.
//!
//! Proofs are finite trees of sequents `S, H ⊨⊨ (b, φ)`. Coinduction is
//! emulated by `[Cof]`, which copies the goal into the hypotheses with tag
//! `F`; `[Hyp]` only closes goals tagged `T`, and only `[Stp]` turns a goal
//! into a `T` goal. A `Lem` leaf closes a goal with an externally established
//! claim, such as one lifted from a component.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::component::{is_component, ComponentReading, ComponentVerdict};
use crate::formula::ReachFormula;
use crate::one::{certify_invariant, InvariantCertificate, OneError};
use crate::pred::{Mismatch, StatePredicate};
use crate::system::{InjectError, StateId, SystemId, TransitionSystem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tag {
    /// No `[Stp]` since the last `[Cof]`.
    F,
    T,
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tag::F => "F",
            Tag::T => "T",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedFormula {
    pub tag: Tag,
    pub formula: ReachFormula,
}

impl TaggedFormula {
    pub fn new(tag: Tag, formula: ReachFormula) -> Self {
        TaggedFormula { tag, formula }
    }

    pub fn f(formula: ReachFormula) -> Self {
        TaggedFormula::new(Tag::F, formula)
    }

    pub fn t(formula: ReachFormula) -> Self {
        TaggedFormula::new(Tag::T, formula)
    }
}

/// `H ⊨⊨ goal`. Hypotheses are a set: order and duplicates are irrelevant.
#[derive(Debug, Clone)]
pub struct Sequent {
    pub hyps: Vec<TaggedFormula>,
    pub goal: TaggedFormula,
}

impl Sequent {
    pub fn new(hyps: Vec<TaggedFormula>, goal: TaggedFormula) -> Self {
        Sequent { hyps, goal }
    }

    /// The same hypotheses with a different goal.
    pub fn with_goal(&self, goal: TaggedFormula) -> Sequent {
        Sequent::new(self.hyps.clone(), goal)
    }

    /// `H ∪ {h} ⊨⊨ goal`.
    pub fn adding(&self, h: TaggedFormula, goal: TaggedFormula) -> Sequent {
        let mut hyps = self.hyps.clone();
        if !hyps.contains(&h) {
            hyps.push(h);
        }
        Sequent::new(hyps, goal)
    }

    pub fn lhs(&self) -> &StatePredicate {
        self.goal.formula.lhs()
    }

    pub fn rhs(&self) -> &StatePredicate {
        self.goal.formula.rhs()
    }
}

fn set_eq(a: &[TaggedFormula], b: &[TaggedFormula]) -> bool {
    a.iter().all(|x| b.contains(x)) && b.iter().all(|x| a.contains(x))
}

impl PartialEq for Sequent {
    fn eq(&self, other: &Self) -> bool {
        self.goal == other.goal && set_eq(&self.hyps, &other.hyps)
    }
}

impl Eq for Sequent {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TreeRule {
    Hyp,
    Trv,
    Str,
    Spl,
    Tra,
    Stp,
    Cut,
    Cof,
    Clr,
    /// Closed by an external claim.
    Lem,
}

impl TreeRule {
    pub const ALL: [TreeRule; 10] = [
        TreeRule::Hyp,
        TreeRule::Trv,
        TreeRule::Str,
        TreeRule::Spl,
        TreeRule::Tra,
        TreeRule::Stp,
        TreeRule::Cut,
        TreeRule::Cof,
        TreeRule::Clr,
        TreeRule::Lem,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TreeRule::Hyp => "Hyp",
            TreeRule::Trv => "Trv",
            TreeRule::Str => "Str",
            TreeRule::Spl => "Spl",
            TreeRule::Tra => "Tra",
            TreeRule::Stp => "Stp",
            TreeRule::Cut => "Cut",
            TreeRule::Cof => "Cof",
            TreeRule::Clr => "Clr",
            TreeRule::Lem => "Lem",
        }
    }

    pub fn from_name(s: &str) -> Option<TreeRule> {
        TreeRule::ALL.into_iter().find(|r| r.name() == s)
    }

    fn arity(self) -> usize {
        match self {
            TreeRule::Hyp | TreeRule::Trv | TreeRule::Lem => 0,
            TreeRule::Str | TreeRule::Stp | TreeRule::Cof | TreeRule::Clr => 1,
            TreeRule::Spl | TreeRule::Tra | TreeRule::Cut => 2,
        }
    }
}

impl fmt::Display for TreeRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeParams {
    None,
    /// `l′`.
    Str(StatePredicate),
    /// The midpoint `m`.
    Tra(StatePredicate),
    /// The cut formula `φ′`.
    Cut(ReachFormula),
    /// The removed hypothesis.
    Clr(TaggedFormula),
    /// Name of the cited claim, for display only.
    Lem(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProofTree {
    pub sequent: Sequent,
    pub rule: TreeRule,
    pub params: TreeParams,
    pub children: Vec<ProofTree>,
    pub label: Option<String>,
}

impl ProofTree {
    pub fn new(sequent: Sequent, rule: TreeRule, params: TreeParams, children: Vec<ProofTree>) -> Self {
        ProofTree {
            sequent,
            rule,
            params,
            children,
            label: None,
        }
    }

    pub fn labelled(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(ProofTree::node_count).sum::<usize>()
    }

    /// Pre-order walk with paths.
    pub fn walk(&self) -> Vec<(Vec<usize>, &ProofTree)> {
        let mut out = Vec::new();
        let mut stack = vec![(Vec::new(), self)];
        while let Some((path, t)) = stack.pop() {
            for (i, c) in t.children.iter().enumerate().rev() {
                let mut p = path.clone();
                p.push(i);
                stack.push((p, c));
            }
            out.push((path, t));
        }
        out
    }

    /// Indented `label: rule  H ⊨⊨ (b, φ)` lines, with `φ` and `H` rendered by
    /// the caller. Used for golden comparisons.
    pub fn outline(&self, show: &mut dyn FnMut(&ReachFormula) -> String) -> String {
        let mut s = String::new();
        for (path, t) in self.walk() {
            let hyps: Vec<String> = t
                .sequent
                .hyps
                .iter()
                .map(|h| format!("({}, {})", h.tag, show(&h.formula)))
                .collect();
            s.push_str(&format!(
                "{:indent$}{}: [{}] {{{}}} ⊨⊨ ({}, {})\n",
                "",
                t.label.as_deref().unwrap_or("-"),
                t.rule,
                hyps.join(", "),
                t.sequent.goal.tag,
                show(&t.sequent.goal.formula),
                indent = 2 * path.len()
            ));
        }
        s
    }
}

/// A violated rule clause at one node.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TreeError {
    #[error(transparent)]
    Mismatch(#[from] Mismatch),
    #[error("{rule} takes {expected} premise(s), found {found}")]
    ChildCount {
        rule: TreeRule,
        expected: usize,
        found: usize,
    },
    #[error("{rule} has parameters of the wrong kind")]
    Params { rule: TreeRule },
    #[error("Hyp concludes (T, φ) only")]
    HypTag,
    #[error("Hyp needs (F, φ) ∈ H")]
    HypMissing,
    #[error("Trv needs identical sides; state #{} differs", witness.0)]
    NotTrivial { witness: StateId },
    #[error("Str needs l ⊑ l′; state #{} is in l only", witness.0)]
    NotStronger { witness: StateId },
    #[error("Spl needs l1 ⊔ l2 = l; state #{} differs", witness.0)]
    NotSplit { witness: StateId },
    #[error("Stp needs l ⊓ • ⊑ ⊥; state #{} is final", witness.0)]
    FinalInLhs { witness: StateId },
    #[error("premise {child}: {clause}")]
    Premise { child: usize, clause: &'static str },
    #[error("Clr needs the removed hypothesis in H")]
    ClrMissing,
    #[error("no supplied claim proves this sequent")]
    UnknownLemma,
}

impl TreeError {
    pub fn witness(&self) -> Option<StateId> {
        match self {
            TreeError::NotTrivial { witness }
            | TreeError::NotStronger { witness }
            | TreeError::NotSplit { witness }
            | TreeError::FinalInLhs { witness } => Some(*witness),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeFailure {
    pub path: Vec<usize>,
    pub label: Option<String>,
    pub rule: TreeRule,
    pub error: TreeError,
}

impl NodeFailure {
    /// `root.0.1`, followed by the label when present.
    pub fn location(&self) -> String {
        let mut s = String::from("root");
        for i in &self.path {
            s.push_str(&format!(".{i}"));
        }
        if let Some(l) = &self.label {
            s.push_str(&format!(" ({l})"));
        }
        s
    }
}

impl fmt::Display for NodeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.location(), self.rule, self.error)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeReport {
    pub nodes: usize,
    /// In pre-order.
    pub failures: Vec<NodeFailure>,
}

impl TreeReport {
    pub fn accepted(&self) -> bool {
        self.failures.is_empty()
    }
}

fn diff(a: &StatePredicate, b: &StatePredicate) -> Option<StateId> {
    a.first_outside(b).or_else(|| b.first_outside(a))
}

/// Checks one node against its rule schema. `claims` are sequents that
/// `Lem` leaves may cite.
pub fn check_node(sys: &TransitionSystem, t: &ProofTree, claims: &[&Sequent]) -> Result<(), TreeError> {
    let s = &t.sequent;
    for f in s.hyps.iter().chain([&s.goal]).map(|h| &h.formula) {
        sys.owns(f.lhs())?;
    }
    for c in &t.children {
        for f in c.sequent.hyps.iter().chain([&c.sequent.goal]).map(|h| &h.formula) {
            sys.owns(f.lhs())?;
        }
    }
    if t.children.len() != t.rule.arity() {
        return Err(TreeError::ChildCount {
            rule: t.rule,
            expected: t.rule.arity(),
            found: t.children.len(),
        });
    }
    let (b, l, r) = (s.goal.tag, s.lhs(), s.rhs());
    let kid = |i: usize| &t.children[i].sequent;
    let premise = |child: usize, clause: &'static str| Err(TreeError::Premise { child, clause });
    let params = || TreeError::Params { rule: t.rule };
    // hypotheses and tag are passed on unchanged by the structural rules
    let same_context = |i: usize, tag: Tag| -> Result<(), TreeError> {
        if !set_eq(&kid(i).hyps, &s.hyps) {
            return premise(i, "hypotheses must equal H");
        }
        if kid(i).goal.tag != tag {
            return premise(
                i,
                if tag == Tag::T {
                    "tag must be T"
                } else {
                    "tag must be b"
                },
            );
        }
        Ok(())
    };
    match t.rule {
        TreeRule::Hyp => {
            if b != Tag::T {
                return Err(TreeError::HypTag);
            }
            if !s.hyps.contains(&TaggedFormula::f(s.goal.formula.clone())) {
                return Err(TreeError::HypMissing);
            }
        }
        TreeRule::Trv => {
            if let Some(w) = diff(l, r) {
                return Err(TreeError::NotTrivial { witness: w });
            }
        }
        TreeRule::Str => {
            let TreeParams::Str(l2) = &t.params else {
                return Err(params());
            };
            same_context(0, b)?;
            if kid(0).lhs() != l2 || kid(0).rhs() != r {
                return premise(0, "must be (b, l′ =>> r)");
            }
            if let Some(w) = l.first_outside(l2) {
                return Err(TreeError::NotStronger { witness: w });
            }
        }
        TreeRule::Spl => {
            same_context(0, b)?;
            same_context(1, b)?;
            for i in 0..2 {
                if kid(i).rhs() != r {
                    return premise(i, "right-hand side must be r");
                }
            }
            if let Some(w) = diff(&kid(0).lhs().union(kid(1).lhs()), l) {
                return Err(TreeError::NotSplit { witness: w });
            }
        }
        TreeRule::Tra => {
            let TreeParams::Tra(m) = &t.params else {
                return Err(params());
            };
            same_context(0, b)?;
            same_context(1, b)?;
            if kid(0).lhs() != l || kid(0).rhs() != m {
                return premise(0, "must be (b, l =>> m)");
            }
            if kid(1).lhs() != m || kid(1).rhs() != r {
                return premise(1, "must be (b, m =>> r)");
            }
        }
        TreeRule::Stp => {
            if let Some(w) = l.intersect(sys.finals()).first() {
                return Err(TreeError::FinalInLhs { witness: w });
            }
            same_context(0, Tag::T)?;
            if kid(0).lhs() != &sys.post_unchecked(l) || kid(0).rhs() != r {
                return premise(0, "must be (T, ∂l =>> r)");
            }
        }
        TreeRule::Cut => {
            let TreeParams::Cut(phi2) = &t.params else {
                return Err(params());
            };
            if !set_eq(&kid(0).hyps, &s.hyps) {
                return premise(0, "hypotheses must equal H");
            }
            if kid(0).goal != TaggedFormula::f(phi2.clone()) {
                return premise(0, "must be (F, φ′)");
            }
            if *kid(1) != s.adding(TaggedFormula::f(phi2.clone()), s.goal.clone()) {
                return premise(1, "must be H ∪ {(F, φ′)} ⊨⊨ (b, φ)");
            }
        }
        TreeRule::Cof => {
            let copy = TaggedFormula::f(s.goal.formula.clone());
            if *kid(0) != s.adding(copy.clone(), copy) {
                return premise(0, "must be H ∪ {(F, φ)} ⊨⊨ (F, φ)");
            }
        }
        TreeRule::Clr => {
            let TreeParams::Clr(gone) = &t.params else {
                return Err(params());
            };
            if !s.hyps.contains(gone) {
                return Err(TreeError::ClrMissing);
            }
            if kid(0).goal != s.goal {
                return premise(0, "goal must be (b, φ)");
            }
            let mut h = kid(0).hyps.clone();
            h.push(gone.clone());
            if !set_eq(&h, &s.hyps) {
                return premise(0, "hypotheses must be H without the removed one");
            }
        }
        TreeRule::Lem => {
            if !claims.contains(&s) {
                return Err(TreeError::UnknownLemma);
            }
        }
    }
    Ok(())
}

/// Checks every node of a tree that may cite no claims.
pub fn check_tree(sys: &TransitionSystem, t: &ProofTree) -> TreeReport {
    check_tree_with(sys, t, &[])
}

/// Checks every node; `Lem` leaves may cite the given claims, which must be
/// about `sys`.
pub fn check_tree_with(sys: &TransitionSystem, t: &ProofTree, claims: &[&LiftedClaim]) -> TreeReport {
    let seqs: Vec<&Sequent> = claims
        .iter()
        .filter(|c| c.system == sys.id())
        .map(|c| &c.claim)
        .collect();
    let mut failures = Vec::new();
    let walk = t.walk();
    for (path, node) in &walk {
        if let Err(error) = check_node(sys, node, &seqs) {
            failures.push(NodeFailure {
                path: path.clone(),
                label: node.label.clone(),
                rule: node.rule,
                error,
            });
        }
    }
    TreeReport {
        nodes: walk.len(),
        failures,
    }
}

/// Structural cross-check of the tag discipline: paths to `[Hyp]` leaves
/// that cite a hypothesis installed by an ancestor `[Cof]` with no `[Stp]`
/// in between.
pub fn progress_violations(t: &ProofTree) -> Vec<Vec<usize>> {
    // (formula installed by Cof, whether a Stp followed)
    fn go(t: &ProofTree, path: &mut Vec<usize>, open: &mut Vec<(ReachFormula, bool)>, out: &mut Vec<Vec<usize>>) {
        if t.rule == TreeRule::Hyp {
            let phi = &t.sequent.goal.formula;
            if let Some((_, stepped)) = open.iter().rev().find(|(f, _)| f == phi) {
                if !stepped {
                    out.push(path.clone());
                }
            }
        }
        let pushed = match t.rule {
            TreeRule::Cof => {
                open.push((t.sequent.goal.formula.clone(), false));
                None
            }
            TreeRule::Stp => Some(open.iter().map(|o| o.1).collect::<Vec<_>>()),
            _ => None,
        };
        if pushed.is_some() {
            for o in open.iter_mut() {
                o.1 = true;
            }
        }
        for (i, c) in t.children.iter().enumerate() {
            path.push(i);
            go(c, path, open, out);
            path.pop();
        }
        if let Some(saved) = pushed {
            for (o, s) in open.iter_mut().zip(saved) {
                o.1 = s;
            }
        }
        if t.rule == TreeRule::Cof {
            open.pop();
        }
    }
    let mut out = Vec::new();
    go(t, &mut Vec::new(), &mut Vec::new(), &mut out);
    out
}

/// The redtoinv3 tree for `l =>> r` with invariant `q`, under no hypotheses.
pub fn tactic_redtoinv3(sys: &TransitionSystem, cert: &InvariantCertificate) -> Result<ProofTree, OneError> {
    tactic_redtoinv3_under(sys, &[], cert)
}

/// The redtoinv3 tree under hypotheses `H` (which it neither needs nor uses).
///
/// ```text
/// N_0    [Str]  (F, l =>> r)
/// N_1    [Spl]  (F, q ⊔ r =>> r)
/// N_2,1  [Cof]  (F, q =>> r)
/// N_3    [Stp]  (F, q =>> r)        with (F, q =>> r) added to H
/// N_4    [Str]  (T, ∂q =>> r)
/// N_4′   [Spl]  (T, q ⊔ r =>> r)
/// N_5,1  [Hyp]  (T, q =>> r)
/// N_5,2  [Trv]  (T, r =>> r)
/// N_2,2  [Trv]  (F, r =>> r)
/// ```
pub fn tactic_redtoinv3_under(
    sys: &TransitionSystem,
    hyps: &[TaggedFormula],
    cert: &InvariantCertificate,
) -> Result<ProofTree, OneError> {
    for h in hyps {
        sys.owns(h.formula.lhs())?;
    }
    certify_invariant(sys, cert)?.into_result()?;
    let (l, r, q) = (cert.target.lhs(), cert.target.rhs(), &cert.q);
    let qr = q.union(r);
    let phi = |p: &StatePredicate| ReachFormula::pair(p.clone(), r.clone());
    let outer = Sequent::new(hyps.to_vec(), TaggedFormula::f(phi(l)));
    let inner = outer.adding(TaggedFormula::f(phi(q)), TaggedFormula::f(phi(q)));
    let at = |s: &Sequent, tag, p: &StatePredicate| s.with_goal(TaggedFormula::new(tag, phi(p)));
    let leaf = |s: Sequent, rule| ProofTree::new(s, rule, TreeParams::None, vec![]);

    let n4p = ProofTree::new(
        at(&inner, Tag::T, &qr),
        TreeRule::Spl,
        TreeParams::None,
        vec![
            leaf(at(&inner, Tag::T, q), TreeRule::Hyp).labelled("N_5,1"),
            leaf(at(&inner, Tag::T, r), TreeRule::Trv).labelled("N_5,2"),
        ],
    )
    .labelled("N_4′");
    let n4 = ProofTree::new(
        at(&inner, Tag::T, &sys.post_unchecked(q)),
        TreeRule::Str,
        TreeParams::Str(qr.clone()),
        vec![n4p],
    )
    .labelled("N_4");
    let n3 = ProofTree::new(inner.clone(), TreeRule::Stp, TreeParams::None, vec![n4]).labelled("N_3");
    let n21 = ProofTree::new(at(&outer, Tag::F, q), TreeRule::Cof, TreeParams::None, vec![n3]).labelled("N_2,1");
    let n22 = leaf(at(&outer, Tag::F, r), TreeRule::Trv).labelled("N_2,2");
    let n1 = ProofTree::new(at(&outer, Tag::F, &qr), TreeRule::Spl, TreeParams::None, vec![n21, n22]).labelled("N_1");
    Ok(ProofTree::new(outer, TreeRule::Str, TreeParams::Str(qr), vec![n1]).labelled("N_0"))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComposeError {
    #[error(transparent)]
    Mismatch(#[from] Mismatch),
    #[error("sub-proof {index} must conclude (F, φ{concl}) from H ∪ {{(F, φ{hyp})}}")]
    RootSequent { index: usize, concl: usize, hyp: usize },
    #[error("sub-proof {index} is rejected: {failure}")]
    Rejected { index: usize, failure: NodeFailure },
    #[error("component {index} is not a component of the system")]
    NotComponent { index: usize, verdict: ComponentVerdict },
    #[error("component {index}: {source}")]
    Inject { index: usize, source: InjectError },
}

/// Proves `(F, φ1)` and `(F, φ2)` under `H` from sub-proofs of
/// `H ∪ {(F, φ1)} ⊨⊨ (F, φ2)` (`t12`) and `H ∪ {(F, φ2)} ⊨⊨ (F, φ1)` (`t21`).
/// The sub-proofs are only matched against their expected root sequents;
/// they may be `Lem` leaves. Each result is `Cof`, then `Cut` on the other
/// formula, with the other branch reached through `Clr`.
pub fn tactic_sym_compose(
    hyps: &[TaggedFormula],
    phi1: &ReachFormula,
    phi2: &ReachFormula,
    t12: &ProofTree,
    t21: &ProofTree,
) -> Result<(ProofTree, ProofTree), ComposeError> {
    phi1.lhs().same_system(phi2.lhs())?;
    let base = Sequent::new(hyps.to_vec(), TaggedFormula::f(phi1.clone()));
    let want12 = base.adding(TaggedFormula::f(phi1.clone()), TaggedFormula::f(phi2.clone()));
    let want21 = base.adding(TaggedFormula::f(phi2.clone()), TaggedFormula::f(phi1.clone()));
    if t12.sequent != want12 {
        return Err(ComposeError::RootSequent {
            index: 0,
            concl: 2,
            hyp: 1,
        });
    }
    if t21.sequent != want21 {
        return Err(ComposeError::RootSequent {
            index: 1,
            concl: 1,
            hyp: 2,
        });
    }
    let build = |a: &ReachFormula, b: &ReachFormula, tab: &ProofTree, tba: &ProofTree| {
        let (fa, fb) = (TaggedFormula::f(a.clone()), TaggedFormula::f(b.clone()));
        let root = Sequent::new(hyps.to_vec(), fa.clone());
        let n1 = root.adding(fa.clone(), fa.clone());
        let n22 = n1.adding(fb.clone(), fa.clone());
        let clr = ProofTree::new(n22, TreeRule::Clr, TreeParams::Clr(fa.clone()), vec![tba.clone()]).labelled("N_2,2");
        let cut = ProofTree::new(n1, TreeRule::Cut, TreeParams::Cut(b.clone()), vec![tab.clone(), clr]).labelled("N_1");
        ProofTree::new(root, TreeRule::Cof, TreeParams::None, vec![cut]).labelled("N_0")
    };
    Ok((build(phi1, phi2, t12, t21), build(phi2, phi1, t21, t12)))
}

/// Which result justifies a [`LiftedClaim`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LemmaKind {
    /// A proof on a component carries over to the whole system.
    Compts,
    /// Symmetric composition of two component proofs.
    Compps3,
}

impl LemmaKind {
    pub fn name(self) -> &'static str {
        match self {
            LemmaKind::Compts => "compts",
            LemmaKind::Compps3 => "compps3",
        }
    }
}

/// A sequent about `system` established by a lemma rather than by a tree
/// over `system`. Only constructed by the lifting tactics, after checking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedClaim {
    system: SystemId,
    component: Option<SystemId>,
    claim: Sequent,
    lemma: LemmaKind,
    tree: ProofTree,
    uses: Vec<LiftedClaim>,
}

impl LiftedClaim {
    pub fn system(&self) -> SystemId {
        self.system
    }

    /// The component the tree is about (`compts` only).
    pub fn component(&self) -> Option<SystemId> {
        self.component
    }

    pub fn claim(&self) -> &Sequent {
        &self.claim
    }

    pub fn lemma(&self) -> LemmaKind {
        self.lemma
    }

    /// Over the component for `compts`; over the system, citing
    /// [`LiftedClaim::uses`], for `compps3`.
    pub fn tree(&self) -> &ProofTree {
        &self.tree
    }

    pub fn uses(&self) -> &[LiftedClaim] {
        &self.uses
    }

    /// A `Lem` leaf citing this claim.
    pub fn leaf(&self, name: impl Into<String>) -> ProofTree {
        ProofTree::new(self.claim.clone(), TreeRule::Lem, TreeParams::Lem(name.into()), vec![])
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LiftError {
    #[error("not a component")]
    NotComponent(ComponentVerdict),
    #[error("the component proof is rejected")]
    Tree(TreeReport),
    #[error(transparent)]
    Inject(#[from] InjectError),
}

fn inject_tagged(
    sup: &TransitionSystem,
    sub: &TransitionSystem,
    h: &TaggedFormula,
) -> Result<TaggedFormula, InjectError> {
    Ok(TaggedFormula::new(h.tag, h.formula.inject(sub, sup)?))
}

/// Lifts a checked proof on the component `sub` to a claim about `sup`.
/// Predicates are carried over by state value.
pub fn lift_component(
    sup: &TransitionSystem,
    sub: &TransitionSystem,
    reading: ComponentReading,
    tree: &ProofTree,
) -> Result<LiftedClaim, LiftError> {
    let verdict = is_component(sub, sup, reading);
    if !verdict.is_component() {
        return Err(LiftError::NotComponent(verdict));
    }
    let report = check_tree(sub, tree);
    if !report.accepted() {
        return Err(LiftError::Tree(report));
    }
    let s = &tree.sequent;
    let hyps = s
        .hyps
        .iter()
        .map(|h| inject_tagged(sup, sub, h))
        .collect::<Result<Vec<_>, _>>()?;
    let goal = inject_tagged(sup, sub, &s.goal)?;
    Ok(LiftedClaim {
        system: sup.id(),
        component: Some(sub.id()),
        claim: Sequent::new(hyps, goal),
        lemma: LemmaKind::Compts,
        tree: tree.clone(),
        uses: vec![],
    })
}

/// One component with its proof, for [`tactic_compose_components`].
pub struct ComponentProof<'a> {
    pub system: &'a TransitionSystem,
    pub reading: ComponentReading,
    pub tree: &'a ProofTree,
}

/// From proofs of `S_i, H ∪ {(F, φ_{1−i})} ⊨⊨ (F, φ_i)` on components
/// `S_i`, derives `S, H ⊨⊨ (F, φ_i)` for both `i`. `H` and `φ_i` are given
/// over `sup`.
pub fn tactic_compose_components(
    sup: &TransitionSystem,
    parts: [ComponentProof<'_>; 2],
    hyps: &[TaggedFormula],
    phis: [&ReachFormula; 2],
) -> Result<[LiftedClaim; 2], ComposeError> {
    for h in hyps {
        sup.owns(h.formula.lhs())?;
    }
    sup.owns(phis[0].lhs())?;
    sup.owns(phis[1].lhs())?;
    let mut lifted = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let c = match lift_component(sup, p.system, p.reading, p.tree) {
            Ok(c) => c,
            Err(LiftError::NotComponent(verdict)) => return Err(ComposeError::NotComponent { index: i, verdict }),
            Err(LiftError::Tree(rep)) => {
                return Err(ComposeError::Rejected {
                    index: i,
                    failure: rep.failures[0].clone(),
                })
            }
            Err(LiftError::Inject(source)) => return Err(ComposeError::Inject { index: i, source }),
        };
        let want = Sequent::new(hyps.to_vec(), TaggedFormula::f(phis[1 - i].clone()))
            .adding(TaggedFormula::f(phis[1 - i].clone()), TaggedFormula::f(phis[i].clone()));
        if c.claim != want {
            return Err(ComposeError::RootSequent {
                index: i,
                concl: i,
                hyp: 1 - i,
            });
        }
        lifted.push(c);
    }
    let (l0, l1) = (lifted[0].clone(), lifted[1].clone());
    // t12 proves φ1 from φ0, t21 proves φ0 from φ1
    let (t0, t1) = tactic_sym_compose(hyps, phis[0], phis[1], &l1.leaf("compts:1"), &l0.leaf("compts:0"))?;
    let mut out = Vec::new();
    for (i, t) in [t0, t1].into_iter().enumerate() {
        let rep = check_tree_with(sup, &t, &[&l0, &l1]);
        if let Some(f) = rep.failures.first() {
            return Err(ComposeError::Rejected {
                index: i,
                failure: f.clone(),
            });
        }
        out.push(LiftedClaim {
            system: sup.id(),
            component: None,
            claim: t.sequent.clone(),
            lemma: LemmaKind::Compps3,
            tree: t,
            uses: vec![l0.clone(), l1.clone()],
        });
    }
    let b = out.pop().expect("two claims");
    let a = out.pop().expect("two claims");
    Ok([a, b])
}
