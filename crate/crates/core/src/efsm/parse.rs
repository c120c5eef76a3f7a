use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::ast::{Arrow, BoolExpr, CmpOp, EfsmModel, IntExpr, IntOp, Pos, VarDecl};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    DuplicateNode(String),
    DuplicateVar(String),
    UndeclaredVar(String),
    UndeclaredNode(String),
    DuplicateAssignment(String),
    LiteralRange(String),
    EmptyRange { var: String, lo: u64, hi: u64 },
    Reserved(String),
    DivisionByZero,
    NodeTestOutsideFormula,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => f.write_str(m),
            ParseErrorKind::DuplicateNode(n) => write!(f, "duplicate node `{n}`"),
            ParseErrorKind::DuplicateVar(n) => write!(f, "duplicate variable `{n}`"),
            ParseErrorKind::UndeclaredVar(n) => write!(f, "undeclared variable `{n}`"),
            ParseErrorKind::UndeclaredNode(n) => write!(f, "undeclared node `{n}`"),
            ParseErrorKind::DuplicateAssignment(n) => write!(f, "variable `{n}` assigned twice in one arrow"),
            ParseErrorKind::LiteralRange(t) => write!(f, "literal `{t}` does not fit in 64 bits"),
            ParseErrorKind::EmptyRange { var, lo, hi } => write!(f, "empty range {lo}..{hi} for `{var}`"),
            ParseErrorKind::Reserved(n) => write!(f, "`{n}` is reserved"),
            ParseErrorKind::DivisionByZero => f.write_str("division by the literal 0"),
            ParseErrorKind::NodeTestOutsideFormula => f.write_str("node tests are only allowed in state predicates"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
}

impl ParseError {
    fn new(kind: ParseErrorKind, pos: Pos) -> Self {
        ParseError { kind, pos }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Num(String),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) | Tok::Num(s) => write!(f, "`{s}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

const KEYWORDS: &[&str] = &[
    "system", "nodes", "var", "trans", "when", "true", "false", "div", "gcd", "c",
];

// Longest first so that prefixes never shadow longer symbols.
const SYMBOLS: &[(&str, &str)] = &[
    ("=>>", "=>>"),
    ("⇒◇", "=>>"),
    ("&&", "&&"),
    ("||", "||"),
    ("!=", "!="),
    ("<=", "<="),
    (">=", ">="),
    (":=", ":="),
    ("->", "->"),
    ("..", ".."),
    ("∧", "&&"),
    ("∨", "||"),
    ("¬", "!"),
    ("≠", "!="),
    ("≤", "<="),
    ("≥", ">="),
    ("×", "*"),
    ("−", "-"),
    ("→", "->"),
    ("!", "!"),
    ("=", "="),
    ("<", "<"),
    (">", ">"),
    ("+", "+"),
    ("-", "-"),
    ("*", "*"),
    ("(", "("),
    (")", ")"),
    ("{", "{"),
    ("}", "}"),
    (";", ";"),
    (":", ":"),
    (",", ","),
];

fn lex(text: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1;
    let mut col = 1;
    let mut rest = text;
    'outer: while let Some(ch) = rest.chars().next() {
        let pos = Pos { line, col };
        if ch == '\n' {
            line += 1;
            col = 1;
            rest = &rest[1..];
            continue;
        }
        if ch.is_whitespace() {
            col += 1;
            rest = &rest[ch.len_utf8()..];
            continue;
        }
        if rest.starts_with("//") || ch == '#' {
            let end = rest.find('\n').unwrap_or(rest.len());
            rest = &rest[end..];
            continue;
        }
        if ch.is_ascii_digit() {
            let end = rest.find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len());
            out.push((Tok::Num(rest[..end].to_string()), pos));
            col += end;
            rest = &rest[end..];
            continue;
        }
        if ch.is_alphabetic() || ch == '_' {
            let end = rest
                .find(|c: char| !(c.is_alphanumeric() || c == '_' || c == '\''))
                .unwrap_or(rest.len());
            out.push((Tok::Ident(rest[..end].to_string()), pos));
            col += rest[..end].chars().count();
            rest = &rest[end..];
            continue;
        }
        for &(src, canon) in SYMBOLS {
            if rest.starts_with(src) {
                out.push((Tok::Sym(canon), pos));
                col += src.chars().count();
                rest = &rest[src.len()..];
                continue 'outer;
            }
        }
        return Err(ParseError::new(
            ParseErrorKind::Syntax(format!("unexpected character `{ch}`")),
            pos,
        ));
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn new(text: &str) -> PResult<Self> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn unexpected<T>(&self, wanted: &str) -> PResult<T> {
        Err(ParseError::new(
            ParseErrorKind::Syntax(format!("expected {wanted}, found {}", self.peek())),
            self.pos(),
        ))
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.is_sym(s) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{s}`"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> PResult<()> {
        if self.is_kw(k) {
            self.bump();
            Ok(())
        } else {
            self.unexpected(&format!("`{k}`"))
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => {
                Err(ParseError::new(ParseErrorKind::Reserved(s), self.pos()))
            }
            Tok::Ident(s) => {
                let p = self.bump().1;
                Ok((s, p))
            }
            _ => self.unexpected(what),
        }
    }

    /// Any identifier; system and node names may coincide with keywords.
    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                let p = self.bump().1;
                Ok((s, p))
            }
            _ => self.unexpected(what),
        }
    }

    fn number(&mut self) -> PResult<u64> {
        match self.peek().clone() {
            Tok::Num(s) => {
                let p = self.bump().1;
                s.parse::<u64>()
                    .map_err(|_| ParseError::new(ParseErrorKind::LiteralRange(s), p))
            }
            _ => self.unexpected("a number"),
        }
    }

    fn eof(&self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    // ---- expressions ----

    fn int_expr(&mut self) -> PResult<IntExpr> {
        let mut lhs = self.int_term()?;
        loop {
            let op = if self.is_sym("+") {
                IntOp::Add
            } else if self.is_sym("-") {
                IntOp::Sub
            } else {
                return Ok(lhs);
            };
            self.bump();
            let rhs = self.int_term()?;
            lhs = IntExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn int_term(&mut self) -> PResult<IntExpr> {
        let mut lhs = self.int_atom()?;
        loop {
            let op = if self.is_sym("*") {
                IntOp::Mul
            } else if self.is_kw("div") {
                IntOp::Div
            } else {
                return Ok(lhs);
            };
            self.bump();
            let at = self.pos();
            let rhs = self.int_atom()?;
            if op == IntOp::Div && rhs == IntExpr::Lit(0) {
                return Err(ParseError::new(ParseErrorKind::DivisionByZero, at));
            }
            lhs = IntExpr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn int_atom(&mut self) -> PResult<IntExpr> {
        match self.peek().clone() {
            Tok::Num(_) => Ok(IntExpr::Lit(self.number()?)),
            Tok::Sym("(") => {
                self.bump();
                let e = self.int_expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "gcd" => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.int_expr()?;
                self.expect_sym(",")?;
                let b = self.int_expr()?;
                self.expect_sym(")")?;
                Ok(IntExpr::Gcd(Box::new(a), Box::new(b)))
            }
            Tok::Ident(_) => {
                let (name, pos) = self.name("an integer expression")?;
                Ok(IntExpr::Var { name, pos })
            }
            _ => self.unexpected("an integer expression"),
        }
    }

    fn cmp_op(&mut self) -> Option<CmpOp> {
        let op = match self.peek() {
            Tok::Sym("=") => CmpOp::Eq,
            Tok::Sym("!=") => CmpOp::Ne,
            Tok::Sym("<") => CmpOp::Lt,
            Tok::Sym("<=") => CmpOp::Le,
            Tok::Sym(">") => CmpOp::Gt,
            Tok::Sym(">=") => CmpOp::Ge,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn bool_expr(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.bool_conj()?;
        while self.is_sym("||") {
            self.bump();
            let rhs = self.bool_conj()?;
            lhs = BoolExpr::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn bool_conj(&mut self) -> PResult<BoolExpr> {
        let mut lhs = self.bool_unary()?;
        while self.is_sym("&&") {
            self.bump();
            let rhs = self.bool_unary()?;
            lhs = BoolExpr::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn bool_unary(&mut self) -> PResult<BoolExpr> {
        if self.is_sym("!") {
            self.bump();
            return Ok(BoolExpr::negate(self.bool_unary()?));
        }
        if self.is_kw("true") || self.is_kw("false") {
            let b = self.is_kw("true");
            self.bump();
            return Ok(BoolExpr::Const(b));
        }
        if self.is_kw("c") {
            let pos = self.pos();
            self.bump();
            let negated = if self.is_sym("=") {
                false
            } else if self.is_sym("!=") {
                true
            } else {
                return self.unexpected("`=` or `!=` after the node variable `c`");
            };
            self.bump();
            let (node, _) = self.ident("a node name")?;
            return Ok(BoolExpr::AtNode { node, negated, pos });
        }
        if self.is_sym("(") {
            // Either a parenthesised formula or the start of an arithmetic
            // comparison such as `(x + 1) * 2 < y`: try the comparison first.
            let save = self.at;
            match self.comparison() {
                Ok(e) => return Ok(e),
                Err(_) => self.at = save,
            }
            self.bump();
            let e = self.bool_expr()?;
            self.expect_sym(")")?;
            return Ok(e);
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<BoolExpr> {
        let a = self.int_expr()?;
        let Some(op) = self.cmp_op() else {
            return self.unexpected("a comparison operator");
        };
        let b = self.int_expr()?;
        Ok(BoolExpr::Cmp(op, a, b))
    }

    // ---- model ----

    fn model(&mut self) -> PResult<EfsmModel> {
        self.expect_kw("system")?;
        let (name, _) = self.ident("a system name")?;
        self.expect_sym("{")?;
        let mut m = EfsmModel {
            name,
            nodes: Vec::new(),
            vars: Vec::new(),
            arrows: Vec::new(),
        };
        let mut pending = Vec::new();
        loop {
            if self.is_sym("}") {
                self.bump();
                break;
            }
            if self.is_kw("nodes") {
                self.bump();
                while !self.is_sym(";") {
                    let (n, p) = self.ident("a node name or `;`")?;
                    if m.has_node(&n) {
                        return Err(ParseError::new(ParseErrorKind::DuplicateNode(n), p));
                    }
                    m.nodes.push(n);
                }
                self.bump();
            } else if self.is_kw("var") {
                self.bump();
                let (v, p) = self.name("a variable name")?;
                if m.var_index(&v).is_some() {
                    return Err(ParseError::new(ParseErrorKind::DuplicateVar(v), p));
                }
                self.expect_sym(":")?;
                let lo = self.number()?;
                self.expect_sym("..")?;
                let hi = self.number()?;
                if lo > hi {
                    return Err(ParseError::new(ParseErrorKind::EmptyRange { var: v, lo, hi }, p));
                }
                self.expect_sym(";")?;
                m.vars.push(VarDecl { name: v, lo, hi });
            } else if self.is_kw("trans") {
                let pos = self.pos();
                self.bump();
                let (src, sp) = self.ident("a source node")?;
                self.expect_sym("->")?;
                let (dst, dp) = self.ident("a target node")?;
                let guard = if self.is_kw("when") {
                    self.bump();
                    Some(self.bool_expr()?)
                } else {
                    None
                };
                self.expect_sym("{")?;
                let mut updates: Vec<(String, IntExpr)> = Vec::new();
                let mut upos = Vec::new();
                while !self.is_sym("}") {
                    let (v, vp) = self.name("a variable or `}`")?;
                    if updates.iter().any(|(w, _)| *w == v) {
                        return Err(ParseError::new(ParseErrorKind::DuplicateAssignment(v), vp));
                    }
                    self.expect_sym(":=")?;
                    let e = self.int_expr()?;
                    self.expect_sym(";")?;
                    updates.push((v, e));
                    upos.push(vp);
                }
                self.bump();
                if self.is_sym(";") {
                    self.bump();
                }
                pending.push((sp, dp, upos));
                m.arrows.push(Arrow {
                    src,
                    dst,
                    guard,
                    updates,
                    pos,
                });
            } else {
                return self.unexpected("`nodes`, `var`, `trans` or `}`");
            }
        }
        self.eof()?;

        // Name resolution happens after all declarations are known.
        for (a, (sp, dp, upos)) in m.arrows.iter().zip(pending) {
            if !m.has_node(&a.src) {
                return Err(ParseError::new(ParseErrorKind::UndeclaredNode(a.src.clone()), sp));
            }
            if !m.has_node(&a.dst) {
                return Err(ParseError::new(ParseErrorKind::UndeclaredNode(a.dst.clone()), dp));
            }
            if let Some(g) = &a.guard {
                check_bool(g, &m, false)?;
            }
            for ((v, e), vp) in a.updates.iter().zip(upos) {
                if m.var_index(v).is_none() {
                    return Err(ParseError::new(ParseErrorKind::UndeclaredVar(v.clone()), vp));
                }
                check_int(e, &m)?;
            }
        }
        Ok(m)
    }
}

fn check_int(e: &IntExpr, m: &EfsmModel) -> PResult<()> {
    match e {
        IntExpr::Lit(_) => Ok(()),
        IntExpr::Var { name, pos } => {
            if m.var_index(name).is_some() {
                Ok(())
            } else {
                Err(ParseError::new(ParseErrorKind::UndeclaredVar(name.clone()), *pos))
            }
        }
        IntExpr::Bin(_, a, b) | IntExpr::Gcd(a, b) => {
            check_int(a, m)?;
            check_int(b, m)
        }
    }
}

/// Resolves names in `e` against `m`. Node tests are only legal when
/// `allow_nodes` is set (state predicates, not guards).
pub(crate) fn check_bool(e: &BoolExpr, m: &EfsmModel, allow_nodes: bool) -> PResult<()> {
    match e {
        BoolExpr::Const(_) => Ok(()),
        BoolExpr::Cmp(_, a, b) => {
            check_int(a, m)?;
            check_int(b, m)
        }
        BoolExpr::AtNode { node, pos, .. } => {
            if !allow_nodes {
                Err(ParseError::new(ParseErrorKind::NodeTestOutsideFormula, *pos))
            } else if !m.has_node(node) {
                Err(ParseError::new(ParseErrorKind::UndeclaredNode(node.clone()), *pos))
            } else {
                Ok(())
            }
        }
        BoolExpr::Not(a) => check_bool(a, m, allow_nodes),
        BoolExpr::And(a, b) | BoolExpr::Or(a, b) => {
            check_bool(a, m, allow_nodes)?;
            check_bool(b, m, allow_nodes)
        }
    }
}

/// Parses and validates a model.
pub fn parse_model(text: &str) -> Result<EfsmModel, ParseError> {
    Parser::new(text)?.model()
}

/// Parses a boolean expression without resolving names.
pub fn parse_bool_expr(text: &str) -> Result<BoolExpr, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.bool_expr()?;
    p.eof()?;
    Ok(e)
}

/// Parses `A =>> B`.
pub fn parse_formula(text: &str) -> Result<(BoolExpr, BoolExpr), ParseError> {
    let mut p = Parser::new(text)?;
    let l = p.bool_expr()?;
    p.expect_sym("=>>")?;
    let r = p.bool_expr()?;
    p.eof()?;
    Ok((l, r))
}
