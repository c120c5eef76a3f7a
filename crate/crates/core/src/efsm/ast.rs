use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntOp {
    Add,
    /// Natural subtraction, truncated at zero.
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum IntExpr {
    Lit(u64),
    Var { name: String, pos: Pos },
    Bin(IntOp, Box<IntExpr>, Box<IntExpr>),
    Gcd(Box<IntExpr>, Box<IntExpr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BoolExpr {
    Const(bool),
    Cmp(CmpOp, IntExpr, IntExpr),
    /// `c = node` (or `c != node` when negated).
    AtNode {
        node: String,
        negated: bool,
        pos: Pos,
    },
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub lo: u64,
    pub hi: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub src: String,
    pub dst: String,
    pub guard: Option<BoolExpr>,
    pub updates: Vec<(String, IntExpr)>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfsmModel {
    pub name: String,
    pub nodes: Vec<String>,
    pub vars: Vec<VarDecl>,
    pub arrows: Vec<Arrow>,
}

impl EfsmModel {
    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    pub fn has_node(&self, name: &str) -> bool {
        self.nodes.iter().any(|n| n == name)
    }
}

impl IntExpr {
    fn prec(&self) -> u8 {
        match self {
            IntExpr::Bin(IntOp::Add | IntOp::Sub, ..) => 1,
            IntExpr::Bin(IntOp::Mul | IntOp::Div, ..) => 2,
            _ => 3,
        }
    }
}

fn operand(f: &mut fmt::Formatter<'_>, e: &IntExpr, min: u8) -> fmt::Result {
    if e.prec() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntExpr::Lit(v) => write!(f, "{v}"),
            IntExpr::Var { name, .. } => f.write_str(name),
            IntExpr::Gcd(a, b) => write!(f, "gcd({a}, {b})"),
            IntExpr::Bin(op, a, b) => {
                let (sym, p) = match op {
                    IntOp::Add => ("+", 1),
                    IntOp::Sub => ("-", 1),
                    IntOp::Mul => ("*", 2),
                    IntOp::Div => ("div", 2),
                };
                operand(f, a, p)?;
                write!(f, " {sym} ")?;
                // left-associative: the right operand needs strictly higher precedence
                operand(f, b, p + 1)
            }
        }
    }
}

impl fmt::Display for CmpOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        })
    }
}

impl BoolExpr {
    fn prec(&self) -> u8 {
        match self {
            BoolExpr::Or(..) => 1,
            BoolExpr::And(..) => 2,
            _ => 3,
        }
    }

    pub fn and(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: BoolExpr, b: BoolExpr) -> BoolExpr {
        BoolExpr::Or(Box::new(a), Box::new(b))
    }

    pub fn negate(a: BoolExpr) -> BoolExpr {
        BoolExpr::Not(Box::new(a))
    }
}

fn bool_operand(f: &mut fmt::Formatter<'_>, e: &BoolExpr, min: u8) -> fmt::Result {
    if e.prec() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Const(b) => write!(f, "{b}"),
            BoolExpr::Cmp(op, a, b) => write!(f, "{a} {op} {b}"),
            BoolExpr::AtNode { node, negated, .. } => {
                write!(f, "c {} {node}", if *negated { "!=" } else { "=" })
            }
            BoolExpr::Not(e) => {
                f.write_str("!")?;
                if matches!(**e, BoolExpr::Const(_)) {
                    write!(f, "{e}")
                } else {
                    write!(f, "({e})")
                }
            }
            BoolExpr::And(a, b) => {
                bool_operand(f, a, 2)?;
                f.write_str(" && ")?;
                bool_operand(f, b, 3)
            }
            BoolExpr::Or(a, b) => {
                bool_operand(f, a, 1)?;
                f.write_str(" || ")?;
                bool_operand(f, b, 2)
            }
        }
    }
}

impl fmt::Display for EfsmModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "system {} {{", self.name)?;
        write!(f, "  nodes")?;
        for n in &self.nodes {
            write!(f, " {n}")?;
        }
        writeln!(f, " ;")?;
        for v in &self.vars {
            writeln!(f, "  var {} : {}..{} ;", v.name, v.lo, v.hi)?;
        }
        for a in &self.arrows {
            write!(f, "  trans {} -> {}", a.src, a.dst)?;
            if let Some(g) = &a.guard {
                write!(f, " when {g}")?;
            }
            write!(f, " {{")?;
            for (v, e) in &a.updates {
                write!(f, " {v} := {e} ;")?;
            }
            writeln!(f, " }}")?;
        }
        writeln!(f, "}}")
    }
}
