//! JSON file formats for formulas, phase scripts, proof trees and bundles.
//!
//! Predicates are written as expressions over the model's variables
//! (`"c = c1 && i < m"`), as explicit state ids (`{"states": [0, 4]}`), or as
//! the post-image of another predicate (`{"post": "c = c0"}`). Formulas are
//! `"l =>> r"` strings or `{"lhs": .., "rhs": ..}`. Any expression may use
//! `$name` to refer to an entry of the file's `defs`.

use std::collections::BTreeMap;

use rlv_core::three::{ProofTree, Sequent, Tag, TaggedFormula, TreeParams, TreeRule};
use rlv_core::two::{Phase, PhaseScript, PremiseRef, Rule, RuleApp, RuleParams, TraDischarge};
use rlv_core::ComponentReading;
use serde::{Deserialize, Serialize};

use crate::model::{formula_states, states_of, Resolver};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PredSpec {
    Expr(String),
    States { states: Vec<usize> },
    Post { post: Box<PredSpec> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FormulaSpec {
    Text(String),
    Pair { lhs: PredSpec, rhs: PredSpec },
}

pub type Defs = BTreeMap<String, String>;

/// Parameters of a rule application; only the fields the rule needs are set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    /// `l′` of Str.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<PredSpec>,
    /// Midpoint of Tra.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mid: Option<PredSpec>,
    /// `"oracle"`, `"hypothesis"` or `{"certificate": q}` (phase scripts).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discharge: Option<DischargeSpec>,
    /// Cut formula.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<FormulaSpec>,
    /// Hypothesis removed by Clr.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hyp: Option<TaggedSpec>,
    /// Name shown for a Lem leaf.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
}

impl ParamsSpec {
    fn is_empty(&self) -> bool {
        *self == ParamsSpec::default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DischargeSpec {
    Named(String),
    Certificate { certificate: PredSpec },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PremiseSpec {
    Next(usize),
    /// `"X0:<index>"`.
    Origin(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub formula: FormulaSpec,
    pub rule: String,
    #[serde(default, skip_serializing_if = "ParamsSpec::is_empty")]
    pub params: ParamsSpec,
    #[serde(default)]
    pub premises: Vec<PremiseSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub formulas: Vec<EntrySpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptSpec {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub defs: Defs,
    #[serde(default)]
    pub hypotheses: Vec<FormulaSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<FormulaSpec>,
    pub phases: Vec<PhaseSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaggedSpec {
    pub tag: String,
    pub formula: FormulaSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub hyps: Vec<TaggedSpec>,
    pub goal: TaggedSpec,
    pub rule: String,
    #[serde(default, skip_serializing_if = "ParamsSpec::is_empty")]
    pub params: ParamsSpec,
    #[serde(default)]
    pub children: Vec<TreeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeFile {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub defs: Defs,
    pub tree: TreeSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReadingSpec {
    #[default]
    Literal,
    ExitThroughFinals,
}

impl From<ReadingSpec> for ComponentReading {
    fn from(r: ReadingSpec) -> Self {
        match r {
            ReadingSpec::Literal => ComponentReading::Literal,
            ReadingSpec::ExitThroughFinals => ComponentReading::ExitThroughFinals,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    pub name: String,
    pub select_arrows: Vec<usize>,
    pub select_nodes: Vec<String>,
    #[serde(default)]
    pub reading: ReadingSpec,
    /// Proof over the component.
    pub tree: TreeSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComposeSpec {
    #[serde(default)]
    pub hyps: Vec<TaggedSpec>,
    /// `φ0`, `φ1`, over the whole system. Component `i` proves `φi`.
    pub phis: [FormulaSpec; 2],
}

/// Two component proofs, their symmetric composition, and a proof over the
/// whole system whose `Lem` leaves cite the composed claims.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub defs: Defs,
    pub components: [ComponentSpec; 2],
    pub compose: ComposeSpec,
    pub tree: TreeSpec,
}

#[allow(clippy::large_enum_variant)]
pub enum TreeDoc {
    Bundle(BundleSpec),
    Tree(TreeFile),
}

impl TreeDoc {
    /// Accepts a bundle, a `{"defs", "tree"}` file, or a bare tree.
    pub fn parse(text: &str, origin: &str) -> Result<TreeDoc, Error> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::json(origin, e))?;
        let has = |k: &str| v.get(k).is_some();
        if has("components") {
            serde_json::from_value(v).map(TreeDoc::Bundle)
        } else if has("tree") {
            serde_json::from_value(v).map(TreeDoc::Tree)
        } else {
            serde_json::from_value(v).map(|tree| {
                TreeDoc::Tree(TreeFile {
                    defs: Defs::new(),
                    tree,
                })
            })
        }
        .map_err(|e| Error::json(origin, e))
    }
}

fn at(location: String) -> impl FnOnce(Error) -> Error {
    move |e| Error::At {
        location,
        source: Box::new(e),
    }
}

fn parse_tag(s: &str) -> Result<Tag, Error> {
    match s {
        "T" | "t" => Ok(Tag::T),
        "F" | "f" => Ok(Tag::F),
        _ => Err(Error::BadTag(s.into())),
    }
}

fn tagged(res: &Resolver<'_>, t: &TaggedSpec) -> Result<TaggedFormula, Error> {
    Ok(TaggedFormula::new(parse_tag(&t.tag)?, res.formula(&t.formula)?))
}

fn tagged_spec(t: &TaggedFormula) -> TaggedSpec {
    TaggedSpec {
        tag: t.tag.to_string(),
        formula: formula_states(&t.formula),
    }
}

fn premise(p: &PremiseSpec) -> Result<PremiseRef, Error> {
    match p {
        PremiseSpec::Next(i) => Ok(PremiseRef::Next(*i)),
        PremiseSpec::Origin(s) => s
            .strip_prefix("X0:")
            .and_then(|i| i.trim().parse().ok())
            .map(PremiseRef::Origin)
            .ok_or_else(|| Error::BadPremise(s.clone())),
    }
}

fn discharge(res: &Resolver<'_>, d: &DischargeSpec) -> Result<TraDischarge, Error> {
    match d {
        DischargeSpec::Named(n) if n == "oracle" => Ok(TraDischarge::Oracle),
        DischargeSpec::Named(n) if n == "hypothesis" => Ok(TraDischarge::Hypothesis),
        DischargeSpec::Named(n) => Err(Error::BadDischarge(n.clone())),
        DischargeSpec::Certificate { certificate } => Ok(TraDischarge::Certificate(res.pred(certificate)?)),
    }
}

fn need<T: Clone>(v: &Option<T>, rule: &str, field: &'static str) -> Result<T, Error> {
    v.clone().ok_or_else(|| Error::MissingParam {
        rule: rule.into(),
        field,
    })
}

pub fn script_from_spec(res: &Resolver<'_>, spec: &ScriptSpec) -> Result<PhaseScript, Error> {
    let hypotheses = spec
        .hypotheses
        .iter()
        .enumerate()
        .map(|(i, f)| res.formula(f).map_err(at(format!("hypothesis {i}"))))
        .collect::<Result<_, _>>()?;
    let target = match &spec.target {
        Some(t) => Some(res.formula(t).map_err(at("target".into()))?),
        None => None,
    };
    let mut phases = Vec::new();
    for (pi, p) in spec.phases.iter().enumerate() {
        let mut entries = Vec::new();
        for (ei, e) in p.formulas.iter().enumerate() {
            let app = entry(res, e).map_err(at(format!("phase {pi} entry {ei}")))?;
            entries.push(app);
        }
        phases.push(Phase { entries });
    }
    Ok(PhaseScript {
        hypotheses,
        target,
        phases,
    })
}

fn entry(res: &Resolver<'_>, e: &EntrySpec) -> Result<RuleApp, Error> {
    let rule = Rule::from_name(&e.rule).ok_or_else(|| Error::BadRule(e.rule.clone()))?;
    let params = match rule {
        Rule::Str => RuleParams::Str(res.pred(&need(&e.params.lhs, &e.rule, "lhs")?)?),
        Rule::Tra => RuleParams::Tra {
            mid: res.pred(&need(&e.params.mid, &e.rule, "mid")?)?,
            discharge: e.params.discharge.as_ref().map(|d| discharge(res, d)).transpose()?,
        },
        _ => RuleParams::None,
    };
    Ok(RuleApp {
        rule,
        conclusion: res.formula(&e.formula)?,
        premises: e.premises.iter().map(premise).collect::<Result<_, _>>()?,
        params,
        label: e.label.clone(),
    })
}

pub fn script_to_spec(s: &PhaseScript) -> ScriptSpec {
    let phases = s
        .phases
        .iter()
        .map(|p| PhaseSpec {
            formulas: p
                .entries
                .iter()
                .map(|e| {
                    let mut params = ParamsSpec::default();
                    match &e.params {
                        RuleParams::None => {}
                        RuleParams::Str(l) => params.lhs = Some(states_of(l)),
                        RuleParams::Tra { mid, discharge } => {
                            params.mid = Some(states_of(mid));
                            params.discharge = discharge.as_ref().map(|d| match d {
                                TraDischarge::Oracle => DischargeSpec::Named("oracle".into()),
                                TraDischarge::Hypothesis => DischargeSpec::Named("hypothesis".into()),
                                TraDischarge::Certificate(q) => DischargeSpec::Certificate {
                                    certificate: states_of(q),
                                },
                            });
                        }
                    }
                    EntrySpec {
                        formula: formula_states(&e.conclusion),
                        rule: e.rule.name().into(),
                        params,
                        premises: e
                            .premises
                            .iter()
                            .map(|p| match p {
                                PremiseRef::Next(i) => PremiseSpec::Next(*i),
                                PremiseRef::Origin(i) => PremiseSpec::Origin(format!("X0:{i}")),
                            })
                            .collect(),
                        label: e.label.clone(),
                    }
                })
                .collect(),
        })
        .collect();
    ScriptSpec {
        defs: Defs::new(),
        hypotheses: s.hypotheses.iter().map(formula_states).collect(),
        target: s.target.as_ref().map(formula_states),
        phases,
    }
}

pub fn tree_from_spec(res: &Resolver<'_>, spec: &TreeSpec) -> Result<ProofTree, Error> {
    fn go(res: &Resolver<'_>, t: &TreeSpec, path: &mut Vec<usize>) -> Result<ProofTree, Error> {
        let node = || -> Result<_, Error> {
            let rule = TreeRule::from_name(&t.rule).ok_or_else(|| Error::BadRule(t.rule.clone()))?;
            let p = &t.params;
            let params = match rule {
                TreeRule::Str => TreeParams::Str(res.pred(&need(&p.lhs, &t.rule, "lhs")?)?),
                TreeRule::Tra => TreeParams::Tra(res.pred(&need(&p.mid, &t.rule, "mid")?)?),
                TreeRule::Cut => TreeParams::Cut(res.formula(&need(&p.formula, &t.rule, "formula")?)?),
                TreeRule::Clr => TreeParams::Clr(tagged(res, &need(&p.hyp, &t.rule, "hyp")?)?),
                TreeRule::Lem => TreeParams::Lem(p.lemma.clone().unwrap_or_default()),
                _ => TreeParams::None,
            };
            let hyps = t.hyps.iter().map(|h| tagged(res, h)).collect::<Result<_, _>>()?;
            Ok((rule, params, Sequent::new(hyps, tagged(res, &t.goal)?)))
        };
        let (rule, params, sequent) = node().map_err(at(location(path, t.label.as_deref())))?;
        let mut children = Vec::new();
        for (i, c) in t.children.iter().enumerate() {
            path.push(i);
            children.push(go(res, c, path)?);
            path.pop();
        }
        let mut tree = ProofTree::new(sequent, rule, params, children);
        tree.label = t.label.clone();
        Ok(tree)
    }
    go(res, spec, &mut Vec::new())
}

fn location(path: &[usize], label: Option<&str>) -> String {
    let mut s = String::from("root");
    for i in path {
        s.push_str(&format!(".{i}"));
    }
    if let Some(l) = label {
        s.push_str(&format!(" ({l})"));
    }
    s
}

pub fn tree_to_spec(t: &ProofTree) -> TreeSpec {
    let mut params = ParamsSpec::default();
    match &t.params {
        TreeParams::None => {}
        TreeParams::Str(l) => params.lhs = Some(states_of(l)),
        TreeParams::Tra(m) => params.mid = Some(states_of(m)),
        TreeParams::Cut(f) => params.formula = Some(formula_states(f)),
        TreeParams::Clr(h) => params.hyp = Some(tagged_spec(h)),
        TreeParams::Lem(n) => params.lemma = Some(n.clone()),
    }
    TreeSpec {
        label: t.label.clone(),
        hyps: t.sequent.hyps.iter().map(tagged_spec).collect(),
        goal: tagged_spec(&t.sequent.goal),
        rule: t.rule.name().into(),
        params,
        children: t.children.iter().map(tree_to_spec).collect(),
    }
}
