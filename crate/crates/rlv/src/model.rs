//! Loading systems: guarded-command models (`.rlm`) or explicit JSON systems.

use std::collections::BTreeMap;
use std::path::Path;

use rlv_core::efsm::{expand_with_limit, parse_model, select_component, EfsmModel, Expansion, DEFAULT_STATE_LIMIT};
use rlv_core::{ReachFormula, State, StateId, StatePredicate, TransitionSystem};
use serde::{Deserialize, Serialize};

use crate::format::{FormulaSpec, PredSpec};
use crate::Error;

/// An explicit system: opaque state names and transitions between them.
/// State ids in predicates refer to the names' sorted order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplicitSystem {
    pub states: Vec<String>,
    pub edges: Vec<(String, String)>,
}

impl ExplicitSystem {
    pub fn build(&self) -> Result<TransitionSystem, Error> {
        let st = |n: &String| State::opaque(n.clone());
        Ok(TransitionSystem::new(
            vec![],
            self.states.iter().map(st).collect(),
            self.edges.iter().map(|(a, b)| (st(a), st(b))),
        )?)
    }

    pub fn of(sys: &TransitionSystem) -> Self {
        let name = |i: StateId| sys.state(i).node.clone();
        ExplicitSystem {
            states: sys.states().iter().map(|s| s.node.clone()).collect(),
            edges: sys.transitions().map(|(a, b)| (name(a), name(b))).collect(),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Selection {
    pub arrows: Vec<usize>,
    pub nodes: Vec<String>,
}

impl Selection {
    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty() && self.nodes.is_empty()
    }
}

pub enum Model {
    Efsm(Expansion),
    Explicit(TransitionSystem),
}

impl Model {
    /// Reads a model file. JSON files are explicit systems; anything else is
    /// parsed as a guarded-command model, optionally restricted to a
    /// selection of arrows and nodes.
    pub fn load(path: &Path, sel: &Selection, limit: Option<usize>) -> Result<Model, Error> {
        let text = crate::read(path)?;
        if path.extension().is_some_and(|e| e == "json") {
            if !sel.is_empty() {
                return Err(Error::SelectionOnExplicit);
            }
            let e: ExplicitSystem = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
            return Ok(Model::Explicit(e.build()?));
        }
        let m = parse_model(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            source: e,
        })?;
        Model::from_efsm(&m, sel, limit)
    }

    pub fn from_efsm(m: &EfsmModel, sel: &Selection, limit: Option<usize>) -> Result<Model, Error> {
        let m = if sel.is_empty() {
            m.clone()
        } else {
            let nodes: Vec<&str> = sel.nodes.iter().map(String::as_str).collect();
            select_component(m, &sel.arrows, &nodes)?
        };
        Ok(Model::Efsm(expand_with_limit(
            &m,
            limit.unwrap_or(DEFAULT_STATE_LIMIT),
        )?))
    }

    pub fn system(&self) -> &TransitionSystem {
        match self {
            Model::Efsm(e) => e.system(),
            Model::Explicit(s) => s,
        }
    }

    pub fn efsm(&self) -> Option<&Expansion> {
        match self {
            Model::Efsm(e) => Some(e),
            Model::Explicit(_) => None,
        }
    }

    pub fn resolver<'a>(&'a self, defs: &'a BTreeMap<String, String>) -> Resolver<'a> {
        Resolver { model: self, defs }
    }

    pub fn show_state(&self, id: StateId) -> String {
        self.show(self.system().state(id))
    }

    /// `node[v=1,w=2]` for model states, the bare name for explicit ones.
    pub fn show(&self, st: &State) -> String {
        let sys = self.system();
        match self {
            Model::Explicit(_) => st.node.clone(),
            Model::Efsm(_) => {
                let vals: Vec<String> = sys
                    .var_names()
                    .iter()
                    .zip(&st.vals)
                    .map(|(n, v)| format!("{n}={v}"))
                    .collect();
                format!("{}[{}]", st.node, vals.join(","))
            }
        }
    }
}

/// Turns specs into predicates, expanding `$name` definitions.
pub struct Resolver<'a> {
    model: &'a Model,
    defs: &'a BTreeMap<String, String>,
}

impl Resolver<'_> {
    pub fn system(&self) -> &TransitionSystem {
        self.model.system()
    }

    /// Replaces each `$name` by its definition, parenthesised unless the
    /// definition is a whole formula.
    pub fn expand_text(&self, text: &str) -> Result<String, Error> {
        self.expand_at(text, 0)
    }

    fn expand_at(&self, text: &str, depth: usize) -> Result<String, Error> {
        let mut out = String::new();
        let mut rest = text;
        while let Some(i) = rest.find('$') {
            out.push_str(&rest[..i]);
            let tail = &rest[i + 1..];
            let end = tail
                .find(|c: char| !(c.is_alphanumeric() || c == '_'))
                .unwrap_or(tail.len());
            let name = &tail[..end];
            let def = self.defs.get(name).ok_or_else(|| Error::UnknownDef(name.into()))?;
            if depth > 32 {
                return Err(Error::UnknownDef(format!("{name} (recursive)")));
            }
            let body = self.expand_at(def, depth + 1)?;
            if body.contains("=>>") || body.contains('⇒') {
                out.push_str(&body);
            } else {
                out.push('(');
                out.push_str(&body);
                out.push(')');
            }
            rest = &tail[end..];
        }
        out.push_str(rest);
        Ok(out)
    }

    pub fn pred(&self, p: &PredSpec) -> Result<StatePredicate, Error> {
        let sys = self.system();
        match p {
            PredSpec::Expr(text) => {
                let text = self.expand_text(text)?;
                match self.model {
                    Model::Efsm(e) => Ok(e.pred(&text)?),
                    Model::Explicit(_) => match text.trim() {
                        "true" => Ok(sys.top()),
                        "false" => Ok(sys.bot()),
                        _ => Err(Error::ExprOnExplicit(text)),
                    },
                }
            }
            PredSpec::States { states } => {
                if let Some(&bad) = states.iter().find(|&&i| i >= sys.len()) {
                    return Err(Error::StateRange {
                        id: bad,
                        len: sys.len(),
                    });
                }
                Ok(sys.predicate(states.iter().map(|&i| StateId(i))))
            }
            PredSpec::Post { post } => Ok(sys.post(&self.pred(post)?)?),
        }
    }

    pub fn formula(&self, f: &FormulaSpec) -> Result<ReachFormula, Error> {
        match f {
            FormulaSpec::Pair { lhs, rhs } => Ok(ReachFormula::new(self.pred(lhs)?, self.pred(rhs)?)?),
            FormulaSpec::Text(text) => {
                let text = self.expand_text(text)?;
                match self.model {
                    Model::Efsm(e) => Ok(e.formula(&text)?),
                    Model::Explicit(_) => Err(Error::ExprOnExplicit(text)),
                }
            }
        }
    }
}

/// Explicit state-list form of a predicate.
pub fn states_of(p: &StatePredicate) -> PredSpec {
    PredSpec::States {
        states: p.iter().map(StateId::index).collect(),
    }
}

pub fn formula_states(f: &ReachFormula) -> FormulaSpec {
    FormulaSpec::Pair {
        lhs: states_of(f.lhs()),
        rhs: states_of(f.rhs()),
    }
}
