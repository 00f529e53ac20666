//! Frontend for the probabilistic mini-language: lexer, parser, and
//! translation to a PTS.
//!
//! Concrete syntax (brace delimited, LL(1)):
//!
//! ```text
//! x := 40; y := 0;
//! while (x <= 99 && y <= 99) @inv(x <= 100, y <= 101) {
//!     if prob(0.5) { x, y := x + 1, y + 2; } else { x := x + 1; }
//! }
//! assert(x >= 100);
//! ```
//!
//! Statements: simultaneous assignment `x, y := e1, e2;`, `while`,
//! `if prob(p) {..} else {..}`, `switch { prob(p1): {..} prob(p2): {..} }`,
//! `if (cond) {..} else {..}`, `assert(cond);`, `exit;`, `skip;`.
//! Right-hand sides are affine; each textual occurrence of `unif(a, b)` or
//! `discrete(v1: p1, ...)` is an independent fresh draw. Conditions are
//! conjunctions of affine comparisons (`<=`, `>=`, `<`, `>`, `==`).
//!
//! Translation produces one location per while head, branch dispatch, and
//! assertion; deterministic straight-line assignments are folded into the
//! affine update on the incoming edge. When every constant in the program is
//! an integer and no continuous distribution appears, strict comparisons
//! and guard complements tighten by one (`¬(a·v ≤ b)` becomes
//! `a·v ≥ b + 1`), which is exact on the integer lattice; otherwise
//! complements are closed and share their boundary.
//!
//! Location invariants come from an annotation set: an adjacent `.inv`
//! file keyed by the location labels printed by `--dump-pts`, or inline
//! `@inv(...)` after a `while` condition or `assert` condition.

use crate::polyhedra::Polyhedron;
use crate::pts::{self, CheckConfig, Distribution, Fork, Pts, Transition, UpdateFn};
use std::collections::HashMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrontError {
    #[error("line {line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("{0}")]
    Translate(String),
    #[error("annotation: {0}")]
    Annotation(String),
}

fn syn<T>(pos: (usize, usize), msg: impl Into<String>) -> Result<T, FrontError> {
    Err(FrontError::Syntax { line: pos.0, col: pos.1, msg: msg.into() })
}

// ---------------------------------------------------------------------------
// AST

/// Affine expression over program variables and sampling occurrences.
#[derive(Clone, Debug)]
pub struct Expr {
    pub var_coeffs: Vec<(usize, f64)>,
    pub rvar_coeffs: Vec<(usize, f64)>,
    pub constant: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CmpOp {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
}

/// One comparison `lhs op rhs`, kept unresolved until translation (strict
/// operators tighten differently on integral programs).
#[derive(Clone, Debug)]
pub struct Cmp {
    pub lhs: Expr,
    pub op: CmpOp,
    pub rhs: Expr,
}

/// Conjunction of comparisons; `None` comparisons list means `false`.
#[derive(Clone, Debug)]
pub enum Cond {
    True,
    False,
    Conj(Vec<Cmp>),
}

#[derive(Clone, Debug)]
pub enum Stmt {
    /// Simultaneous assignment `⟨x,..⟩ := ⟨e,..⟩`.
    Assign(Vec<usize>, Vec<Expr>),
    While(Cond, Option<Vec<Cmp>>, Vec<Stmt>),
    IfProb(f64, Option<Vec<Cmp>>, Vec<Stmt>, Vec<Stmt>),
    Switch(Option<Vec<Cmp>>, Vec<(f64, Vec<Stmt>)>),
    IfCond(Cond, Option<Vec<Cmp>>, Vec<Stmt>, Vec<Stmt>),
    Assert(Cond, Option<Vec<Cmp>>),
    Exit,
    Skip,
}

#[derive(Clone, Debug)]
pub struct Program {
    pub vars: Vec<String>,
    /// One entry per textual sampling occurrence (fresh independent draw).
    pub dists: Vec<Distribution>,
    pub body: Vec<Stmt>,
}

/// User-supplied invariants keyed by final location label, plus flags.
#[derive(Clone, Debug, Default)]
pub struct AnnotationSet {
    pub invariants: Vec<(String, String)>,
    pub assume_ast: bool,
    pub trust_complete: bool,
}

impl AnnotationSet {
    /// Parses a `.inv` file: `assume_ast` / `trust_complete` flag lines and
    /// `inv LABEL: row, row, ...` lines; `#` starts a comment.
    pub fn parse(src: &str) -> Result<AnnotationSet, FrontError> {
        let mut ann = AnnotationSet::default();
        for (lineno, raw) in src.lines().enumerate() {
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if s == "assume_ast" {
                ann.assume_ast = true;
            } else if s == "trust_complete" {
                ann.trust_complete = true;
            } else if let Some(rest) = s.strip_prefix("inv ") {
                let (label, rows) = rest.split_once(':').ok_or_else(|| {
                    FrontError::Annotation(format!("line {}: expected `inv LABEL: rows`", lineno + 1))
                })?;
                ann.invariants.push((label.trim().to_string(), rows.trim().to_string()));
            } else {
                return Err(FrontError::Annotation(format!(
                    "line {}: unknown directive `{s}`",
                    lineno + 1
                )));
            }
        }
        Ok(ann)
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct SpannedTok {
    tok: Tok,
    pos: (usize, usize),
}

fn lex(src: &str) -> Result<Vec<SpannedTok>, FrontError> {
    let mut toks = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let bytes = src.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let pos = (line, col);
        let step = |i: &mut usize, col: &mut usize, n: usize| {
            *i += n;
            *col += n;
        };
        match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
            }
            ' ' | '\t' | '\r' => step(&mut i, &mut col, 1),
            '#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            '/' if i + 1 < bytes.len() && bytes[i + 1] == b'/' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    step(&mut i, &mut col, 1);
                }
                toks.push(SpannedTok {
                    tok: Tok::Ident(src[start..i].to_string()),
                    pos,
                });
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_digit()
                        || bytes[i] == b'.'
                        || bytes[i] == b'e'
                        || bytes[i] == b'E'
                        || ((bytes[i] == b'+' || bytes[i] == b'-')
                            && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                {
                    step(&mut i, &mut col, 1);
                }
                let n: f64 = src[start..i]
                    .parse()
                    .map_err(|_| FrontError::Syntax {
                        line: pos.0,
                        col: pos.1,
                        msg: format!("bad number `{}`", &src[start..i]),
                    })?;
                toks.push(SpannedTok { tok: Tok::Num(n), pos });
            }
            _ => {
                let two = if i + 1 < bytes.len() { &src[i..i + 2] } else { "" };
                let sym: &'static str = match two {
                    ":=" => ":=",
                    "<=" => "<=",
                    ">=" => ">=",
                    "==" => "==",
                    "&&" => "&&",
                    _ => match c {
                        '<' => "<",
                        '>' => ">",
                        '(' => "(",
                        ')' => ")",
                        '{' => "{",
                        '}' => "}",
                        ';' => ";",
                        ',' => ",",
                        ':' => ":",
                        '+' => "+",
                        '-' => "-",
                        '*' => "*",
                        '@' => "@",
                        _ => return syn(pos, format!("unexpected character `{c}`")),
                    },
                };
                step(&mut i, &mut col, sym.len());
                toks.push(SpannedTok { tok: Tok::Sym(sym), pos });
            }
        }
    }
    Ok(toks)
}

// ---------------------------------------------------------------------------
// Parser

struct Parser {
    toks: Vec<SpannedTok>,
    at: usize,
    vars: Vec<String>,
    dists: Vec<Distribution>,
}

impl Parser {
    fn pos(&self) -> (usize, usize) {
        self.toks.get(self.at).map_or((0, 0), |t| t.pos)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.at + 1).map(|t| &t.tok)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|t| t.tok.clone());
        self.at += 1;
        t
    }

    fn eat_sym(&mut self, s: &str) -> Result<(), FrontError> {
        match self.peek() {
            Some(Tok::Sym(t)) if *t == s => {
                self.at += 1;
                Ok(())
            }
            other => syn(self.pos(), format!("expected `{s}`, found {other:?}")),
        }
    }

    fn eat_kw(&mut self, kw: &str) -> Result<(), FrontError> {
        match self.peek() {
            Some(Tok::Ident(id)) if id == kw => {
                self.at += 1;
                Ok(())
            }
            other => syn(self.pos(), format!("expected `{kw}`, found {other:?}")),
        }
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Tok::Ident(id)) if id == kw)
    }

    fn num(&mut self) -> Result<f64, FrontError> {
        match self.bump() {
            Some(Tok::Num(n)) => Ok(n),
            other => syn(self.pos(), format!("expected number, found {other:?}")),
        }
    }

    fn var_id(&mut self, name: &str) -> usize {
        match self.vars.iter().position(|v| v == name) {
            Some(i) => i,
            None => {
                self.vars.push(name.to_string());
                self.vars.len() - 1
            }
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, FrontError> {
        self.eat_sym("{")?;
        let mut stmts = Vec::new();
        while !matches!(self.peek(), Some(Tok::Sym("}"))) {
            if self.peek().is_none() {
                return syn(self.pos(), "unterminated block");
            }
            stmts.push(self.stmt()?);
        }
        self.eat_sym("}")?;
        Ok(stmts)
    }

    fn opt_inv(&mut self) -> Result<Option<Vec<Cmp>>, FrontError> {
        if matches!(self.peek(), Some(Tok::Sym("@"))) {
            self.eat_sym("@")?;
            self.eat_kw("inv")?;
            self.eat_sym("(")?;
            let mut cmps = vec![self.cmp()?];
            while matches!(self.peek(), Some(Tok::Sym(","))) {
                self.at += 1;
                cmps.push(self.cmp()?);
            }
            self.eat_sym(")")?;
            Ok(Some(cmps))
        } else {
            Ok(None)
        }
    }

    fn stmt(&mut self) -> Result<Stmt, FrontError> {
        let pos = self.pos();
        match self.peek() {
            Some(Tok::Ident(id)) => match id.as_str() {
                "while" => {
                    self.at += 1;
                    self.eat_sym("(")?;
                    let cond = self.cond()?;
                    self.eat_sym(")")?;
                    let inv = self.opt_inv()?;
                    let body = self.block()?;
                    Ok(Stmt::While(cond, inv, body))
                }
                "if" => {
                    self.at += 1;
                    if self.at_kw("prob") {
                        self.at += 1;
                        self.eat_sym("(")?;
                        let p = self.num()?;
                        self.eat_sym(")")?;
                        let inv = self.opt_inv()?;
                        let then = self.block()?;
                        let els = if self.at_kw("else") {
                            self.at += 1;
                            self.block()?
                        } else {
                            Vec::new()
                        };
                        Ok(Stmt::IfProb(p, inv, then, els))
                    } else {
                        self.eat_sym("(")?;
                        let cond = self.cond()?;
                        self.eat_sym(")")?;
                        let inv = self.opt_inv()?;
                        let then = self.block()?;
                        let els = if self.at_kw("else") {
                            self.at += 1;
                            self.block()?
                        } else {
                            Vec::new()
                        };
                        Ok(Stmt::IfCond(cond, inv, then, els))
                    }
                }
                "switch" => {
                    self.at += 1;
                    let inv = self.opt_inv()?;
                    self.eat_sym("{")?;
                    let mut branches = Vec::new();
                    while self.at_kw("prob") {
                        self.at += 1;
                        self.eat_sym("(")?;
                        let p = self.num()?;
                        self.eat_sym(")")?;
                        self.eat_sym(":")?;
                        branches.push((p, self.block()?));
                    }
                    self.eat_sym("}")?;
                    let total: f64 = branches.iter().map(|(p, _)| p).sum();
                    if (total - 1.0).abs() > 1e-12 {
                        return syn(pos, format!("switch probabilities sum to {total}"));
                    }
                    Ok(Stmt::Switch(inv, branches))
                }
                "assert" => {
                    self.at += 1;
                    self.eat_sym("(")?;
                    let cond = self.cond()?;
                    self.eat_sym(")")?;
                    let inv = self.opt_inv()?;
                    self.eat_sym(";")?;
                    Ok(Stmt::Assert(cond, inv))
                }
                "exit" => {
                    self.at += 1;
                    self.eat_sym(";")?;
                    Ok(Stmt::Exit)
                }
                "skip" => {
                    self.at += 1;
                    self.eat_sym(";")?;
                    Ok(Stmt::Skip)
                }
                _ => {
                    // Simultaneous assignment.
                    let mut targets = Vec::new();
                    loop {
                        match self.bump() {
                            Some(Tok::Ident(name)) => targets.push(self.var_id(&name)),
                            other => {
                                return syn(pos, format!("expected variable, found {other:?}"))
                            }
                        }
                        match self.peek() {
                            Some(Tok::Sym(",")) => {
                                self.at += 1;
                            }
                            _ => break,
                        }
                    }
                    self.eat_sym(":=")?;
                    let mut exprs = vec![self.expr()?];
                    while matches!(self.peek(), Some(Tok::Sym(","))) {
                        self.at += 1;
                        exprs.push(self.expr()?);
                    }
                    self.eat_sym(";")?;
                    if exprs.len() != targets.len() {
                        return syn(
                            pos,
                            format!("{} targets but {} expressions", targets.len(), exprs.len()),
                        );
                    }
                    let mut seen = targets.clone();
                    seen.sort_unstable();
                    seen.dedup();
                    if seen.len() != targets.len() {
                        return syn(pos, "duplicate assignment target");
                    }
                    Ok(Stmt::Assign(targets, exprs))
                }
            },
            other => syn(pos, format!("expected statement, found {other:?}")),
        }
    }

    fn cond(&mut self) -> Result<Cond, FrontError> {
        if self.at_kw("true") {
            self.at += 1;
            return Ok(Cond::True);
        }
        if self.at_kw("false") {
            self.at += 1;
            return Ok(Cond::False);
        }
        let mut cmps = vec![self.cmp()?];
        while matches!(self.peek(), Some(Tok::Sym("&&")))
            || matches!(self.peek(), Some(Tok::Ident(id)) if id == "and")
        {
            self.at += 1;
            cmps.push(self.cmp()?);
        }
        Ok(Cond::Conj(cmps))
    }

    fn cmp(&mut self) -> Result<Cmp, FrontError> {
        let lhs = self.expr()?;
        let op = match self.bump() {
            Some(Tok::Sym("<=")) => CmpOp::Le,
            Some(Tok::Sym(">=")) => CmpOp::Ge,
            Some(Tok::Sym("<")) => CmpOp::Lt,
            Some(Tok::Sym(">")) => CmpOp::Gt,
            Some(Tok::Sym("==")) => CmpOp::Eq,
            other => return syn(self.pos(), format!("expected comparison, found {other:?}")),
        };
        let rhs = self.expr()?;
        if !lhs.rvar_coeffs.is_empty() || !rhs.rvar_coeffs.is_empty() {
            return syn(self.pos(), "sampling expressions are not allowed in conditions");
        }
        Ok(Cmp { lhs, op, rhs })
    }

    fn expr(&mut self) -> Result<Expr, FrontError> {
        let mut acc = self.product()?;
        loop {
            match self.peek() {
                Some(Tok::Sym(s @ ("+" | "-"))) => {
                    let sign = if *s == "+" { 1.0 } else { -1.0 };
                    self.at += 1;
                    let rhs = self.product()?;
                    acc = add_expr(&acc, &rhs, sign);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn product(&mut self) -> Result<Expr, FrontError> {
        let pos = self.pos();
        let mut acc = self.atom()?;
        while matches!(self.peek(), Some(Tok::Sym("*"))) {
            self.at += 1;
            let rhs = self.atom()?;
            let lc = acc.var_coeffs.is_empty() && acc.rvar_coeffs.is_empty();
            let rc = rhs.var_coeffs.is_empty() && rhs.rvar_coeffs.is_empty();
            if !lc && !rc {
                return syn(pos, "nonlinear product of variables");
            }
            let (mut e, k) = if lc { (rhs, acc.constant) } else { (acc, rhs.constant) };
            for (_, c) in e.var_coeffs.iter_mut() {
                *c *= k;
            }
            for (_, c) in e.rvar_coeffs.iter_mut() {
                *c *= k;
            }
            e.constant *= k;
            acc = e;
        }
        Ok(acc)
    }

    fn atom(&mut self) -> Result<Expr, FrontError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Num(n)) => Ok(Expr { var_coeffs: vec![], rvar_coeffs: vec![], constant: n }),
            Some(Tok::Sym("-")) => {
                let mut e = self.atom()?;
                for (_, c) in e.var_coeffs.iter_mut() {
                    *c = -*c;
                }
                for (_, c) in e.rvar_coeffs.iter_mut() {
                    *c = -*c;
                }
                e.constant = -e.constant;
                Ok(e)
            }
            Some(Tok::Sym("(")) => {
                let e = self.expr()?;
                self.eat_sym(")")?;
                Ok(e)
            }
            Some(Tok::Ident(id)) if id == "unif" => {
                self.eat_sym("(")?;
                let lo = self.signed_num()?;
                self.eat_sym(",")?;
                let hi = self.signed_num()?;
                self.eat_sym(")")?;
                if hi <= lo {
                    return syn(pos, "empty uniform support");
                }
                self.dists.push(Distribution::Uniform(lo, hi));
                Ok(Expr {
                    var_coeffs: vec![],
                    rvar_coeffs: vec![(self.dists.len() - 1, 1.0)],
                    constant: 0.0,
                })
            }
            Some(Tok::Ident(id)) if id == "discrete" => {
                self.eat_sym("(")?;
                let mut atoms = Vec::new();
                loop {
                    let v = self.signed_num()?;
                    self.eat_sym(":")?;
                    let p = self.num()?;
                    atoms.push((v, p));
                    match self.peek() {
                        Some(Tok::Sym(",")) => {
                            self.at += 1;
                        }
                        _ => break,
                    }
                }
                self.eat_sym(")")?;
                let total: f64 = atoms.iter().map(|(_, p)| p).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return syn(pos, format!("discrete probabilities sum to {total}"));
                }
                self.dists.push(Distribution::Discrete(atoms));
                Ok(Expr {
                    var_coeffs: vec![],
                    rvar_coeffs: vec![(self.dists.len() - 1, 1.0)],
                    constant: 0.0,
                })
            }
            Some(Tok::Ident(name)) => {
                let id = self.var_id(&name);
                Ok(Expr { var_coeffs: vec![(id, 1.0)], rvar_coeffs: vec![], constant: 0.0 })
            }
            other => syn(pos, format!("unexpected token {other:?} in expression")),
        }
    }

    fn signed_num(&mut self) -> Result<f64, FrontError> {
        if matches!(self.peek(), Some(Tok::Sym("-"))) {
            self.at += 1;
            Ok(-self.num()?)
        } else {
            self.num()
        }
    }
}

fn add_expr(a: &Expr, b: &Expr, sign: f64) -> Expr {
    let merge = |xs: &[(usize, f64)], ys: &[(usize, f64)]| {
        let mut out: Vec<(usize, f64)> = xs.to_vec();
        for &(i, c) in ys {
            match out.iter_mut().find(|(j, _)| *j == i) {
                Some((_, acc)) => *acc += sign * c,
                None => out.push((i, sign * c)),
            }
        }
        out.retain(|&(_, c)| c != 0.0);
        out
    };
    Expr {
        var_coeffs: merge(&a.var_coeffs, &b.var_coeffs),
        rvar_coeffs: merge(&a.rvar_coeffs, &b.rvar_coeffs),
        constant: a.constant + sign * b.constant,
    }
}

/// Parses program source into an AST. Variables are registered in order of
/// first appearance.
pub fn parse(src: &str) -> Result<Program, FrontError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, vars: Vec::new(), dists: Vec::new() };
    let mut body = Vec::new();
    while p.peek().is_some() {
        body.push(p.stmt()?);
    }
    // Reject IfProb probabilities outside [0,1].
    fn check_probs(stmts: &[Stmt]) -> Result<(), FrontError> {
        for s in stmts {
            match s {
                Stmt::IfProb(p, _, a, b) => {
                    if !(0.0..=1.0).contains(p) {
                        return Err(FrontError::Translate(format!("probability {p} out of range")));
                    }
                    check_probs(a)?;
                    check_probs(b)?;
                }
                Stmt::Switch(_, bs) => {
                    for (p, b) in bs {
                        if !(0.0..=1.0).contains(p) {
                            return Err(FrontError::Translate(format!(
                                "probability {p} out of range"
                            )));
                        }
                        check_probs(b)?;
                    }
                }
                Stmt::While(_, _, b) => check_probs(b)?,
                Stmt::IfCond(_, _, a, b) => {
                    check_probs(a)?;
                    check_probs(b)?;
                }
                _ => {}
            }
        }
        Ok(())
    }
    check_probs(&body)?;
    Ok(Program { vars: p.vars, dists: p.dists, body })
}

// ---------------------------------------------------------------------------
// Translation

/// A normalized linear row `a·v ≤ b`.
type Row = (Vec<f64>, f64);

struct Builder<'a> {
    prog: &'a Program,
    integral: bool,
    loc_count: usize,
    term: usize,
    fail: usize,
    transitions: Vec<Transition>,
    inline_invs: HashMap<usize, Vec<Row>>,
    /// Locations that only evaluate a deterministic condition (`if`/`assert`
    /// checks); these are spliced into their predecessors after compilation.
    guard_locs: Vec<usize>,
}

/// Entry point of a compiled fragment: jump to `loc` after applying `upd`.
#[derive(Clone)]
struct Entry {
    loc: usize,
    upd: UpdateFn,
}

impl Builder<'_> {
    fn nv(&self) -> usize {
        self.prog.vars.len()
    }

    fn nr(&self) -> usize {
        self.prog.dists.len()
    }

    fn fresh_loc(&mut self) -> usize {
        self.loc_count += 1;
        self.loc_count - 1
    }

    fn expr_update(&self, targets: &[usize], exprs: &[Expr]) -> UpdateFn {
        let mut u = UpdateFn::identity(self.nv(), self.nr());
        for (&t, e) in targets.iter().zip(exprs) {
            u.q[t] = vec![0.0; self.nv()];
            for &(i, c) in &e.var_coeffs {
                u.q[t][i] = c;
            }
            for &(i, c) in &e.rvar_coeffs {
                u.r[t][i] = c;
            }
            u.e[t] = e.constant;
        }
        u
    }

    /// Normalizes a comparison into rows `a·v ≤ b`. Strict operators shift
    /// by one on integral programs and close to non-strict otherwise.
    fn cmp_rows(&self, cmp: &Cmp) -> Vec<Row> {
        let mut coeffs = vec![0.0; self.nv()];
        for &(i, c) in &cmp.lhs.var_coeffs {
            coeffs[i] += c;
        }
        for &(i, c) in &cmp.rhs.var_coeffs {
            coeffs[i] -= c;
        }
        let bound = cmp.rhs.constant - cmp.lhs.constant;
        let tight = if self.integral { 1.0 } else { 0.0 };
        let neg = |coeffs: &[f64]| coeffs.iter().map(|c| -c).collect::<Vec<_>>();
        match cmp.op {
            CmpOp::Le => vec![(coeffs, bound)],
            CmpOp::Lt => vec![(coeffs.clone(), bound - tight)],
            CmpOp::Ge => vec![(neg(&coeffs), -bound)],
            CmpOp::Gt => vec![(neg(&coeffs), -bound - tight)],
            CmpOp::Eq => vec![(coeffs.clone(), bound), (neg(&coeffs), -bound)],
        }
    }

    fn cond_rows(&self, cond: &Cond) -> Option<Vec<Row>> {
        match cond {
            Cond::True => Some(Vec::new()),
            Cond::False => None,
            Cond::Conj(cmps) => Some(cmps.iter().flat_map(|c| self.cmp_rows(c)).collect()),
        }
    }

    /// Complements `rows[0] ∧ … ∧ rows[k]` into disjoint cells:
    /// rows[..i] ∧ ¬rows[i] for each i, with the complement tightened by one
    /// on integral programs.
    fn complement_cells(&self, rows: &[Row]) -> Vec<Vec<Row>> {
        let shift = if self.integral { 1.0 } else { 0.0 };
        let mut cells = Vec::new();
        for i in 0..rows.len() {
            let mut cell: Vec<Row> = rows[..i].to_vec();
            let (a, b) = &rows[i];
            cell.push((a.iter().map(|c| -c).collect(), -b - shift));
            cells.push(cell);
        }
        cells
    }

    fn guard(&self, rows: Vec<Row>) -> Polyhedron {
        Polyhedron { dim: self.nv(), rows }
    }

    fn push_trans(&mut self, src: usize, rows: Vec<Row>, forks: Vec<Fork>) {
        self.transitions.push(Transition { src, guard: self.guard(rows), forks });
    }

    /// Compiles a statement sequence against continuation `cont`, returning
    /// the fragment's entry. Trailing-first traversal lets straight-line
    /// assignments fold into the entry update of whatever follows them.
    fn seq(&mut self, stmts: &[Stmt], cont: Entry) -> Result<Entry, FrontError> {
        let mut entry = cont;
        for stmt in stmts.iter().rev() {
            entry = self.one(stmt, entry)?;
        }
        Ok(entry)
    }

    fn one(&mut self, stmt: &Stmt, cont: Entry) -> Result<Entry, FrontError> {
        match stmt {
            Stmt::Skip => Ok(cont),
            Stmt::Exit => Ok(Entry { loc: self.term, upd: UpdateFn::identity(self.nv(), self.nr()) }),
            Stmt::Assign(targets, exprs) => {
                let u = self.expr_update(targets, exprs);
                Ok(Entry { loc: cont.loc, upd: cont.upd.compose(&u) })
            }
            Stmt::Assert(cond, inv) => match cond {
                Cond::True => Ok(cont),
                Cond::False => {
                    Ok(Entry { loc: self.fail, upd: UpdateFn::identity(self.nv(), self.nr()) })
                }
                Cond::Conj(cmps) => {
                    let rows: Vec<Row> = cmps.iter().flat_map(|c| self.cmp_rows(c)).collect();
                    let loc = self.fresh_loc();
                    self.guard_locs.push(loc);
                    if let Some(cmps) = inv {
                        let inv_rows = cmps.iter().flat_map(|c| self.cmp_rows(c)).collect();
                        self.inline_invs.insert(loc, inv_rows);
                    }
                    let id = UpdateFn::identity(self.nv(), self.nr());
                    self.push_trans(
                        loc,
                        rows.clone(),
                        vec![Fork { prob: 1.0, dst: cont.loc, update: cont.upd }],
                    );
                    for cell in self.complement_cells(&rows) {
                        self.push_trans(
                            loc,
                            cell,
                            vec![Fork { prob: 1.0, dst: self.fail, update: id.clone() }],
                        );
                    }
                    Ok(Entry { loc, upd: id })
                }
            },
            Stmt::While(cond, inv, body) => {
                let loc = self.fresh_loc();
                if let Some(cmps) = inv {
                    let inv_rows = cmps.iter().flat_map(|c| self.cmp_rows(c)).collect();
                    self.inline_invs.insert(loc, inv_rows);
                }
                let id = UpdateFn::identity(self.nv(), self.nr());
                let head = Entry { loc, upd: id.clone() };
                match self.cond_rows(cond) {
                    None => {
                        // while(false): the loop is a no-op.
                        self.push_trans(
                            loc,
                            Vec::new(),
                            vec![Fork { prob: 1.0, dst: cont.loc, update: cont.upd }],
                        );
                    }
                    Some(rows) => {
                        let body_entry = self.seq(body, head)?;
                        self.push_trans(
                            loc,
                            rows.clone(),
                            vec![Fork { prob: 1.0, dst: body_entry.loc, update: body_entry.upd }],
                        );
                        if rows.is_empty() {
                            // while(true): no exit transitions.
                        } else {
                            for cell in self.complement_cells(&rows) {
                                self.push_trans(
                                    loc,
                                    cell,
                                    vec![Fork {
                                        prob: 1.0,
                                        dst: cont.loc,
                                        update: cont.upd.clone(),
                                    }],
                                );
                            }
                        }
                    }
                }
                Ok(Entry { loc, upd: id })
            }
            Stmt::IfCond(cond, inv, then, els) => {
                let then_e = self.seq(then, cont.clone())?;
                let else_e = self.seq(els, cont)?;
                match self.cond_rows(cond) {
                    None => Ok(else_e),
                    Some(rows) if rows.is_empty() => Ok(then_e),
                    Some(rows) => {
                        let loc = self.fresh_loc();
                        self.guard_locs.push(loc);
                        if let Some(cmps) = inv {
                            let inv_rows =
                                cmps.iter().flat_map(|c| self.cmp_rows(c)).collect();
                            self.inline_invs.insert(loc, inv_rows);
                        }
                        self.push_trans(
                            loc,
                            rows.clone(),
                            vec![Fork { prob: 1.0, dst: then_e.loc, update: then_e.upd }],
                        );
                        for cell in self.complement_cells(&rows) {
                            self.push_trans(
                                loc,
                                cell,
                                vec![Fork {
                                    prob: 1.0,
                                    dst: else_e.loc,
                                    update: else_e.upd.clone(),
                                }],
                            );
                        }
                        Ok(Entry { loc, upd: UpdateFn::identity(self.nv(), self.nr()) })
                    }
                }
            }
            Stmt::IfProb(p, inv, then, els) => self.dispatch(
                &[(*p, then.as_slice()), (1.0 - *p, els.as_slice())],
                inv.as_deref(),
                cont,
            ),
            Stmt::Switch(inv, branches) => {
                let refs: Vec<(f64, &[Stmt])> =
                    branches.iter().map(|(p, b)| (*p, b.as_slice())).collect();
                self.dispatch(&refs, inv.as_deref(), cont)
            }
        }
    }

    /// Emits a probabilistic dispatch location: one always-enabled transition
    /// whose forks enter the branch fragments.
    fn dispatch(
        &mut self,
        branches: &[(f64, &[Stmt])],
        inv: Option<&[Cmp]>,
        cont: Entry,
    ) -> Result<Entry, FrontError> {
        let mut forks = Vec::new();
        let mut compiled: Vec<(f64, Entry)> = Vec::new();
        for &(p, body) in branches {
            if p == 0.0 {
                continue;
            }
            compiled.push((p, self.seq(body, cont.clone())?));
        }
        if compiled.len() == 1 {
            return Ok(compiled.pop().unwrap().1);
        }
        let loc = self.fresh_loc();
        if let Some(cmps) = inv {
            let inv_rows = cmps.iter().flat_map(|c| self.cmp_rows(c)).collect();
            self.inline_invs.insert(loc, inv_rows);
        }
        for (p, e) in compiled {
            forks.push(Fork { prob: p, dst: e.loc, update: e.upd });
        }
        self.push_trans(loc, Vec::new(), forks);
        Ok(Entry { loc, upd: UpdateFn::identity(self.nv(), self.nr()) })
    }
}

fn is_integral_program(prog: &Program) -> bool {
    fn int(x: f64) -> bool {
        x.fract() == 0.0 && x.abs() < 1e15
    }
    fn expr_ok(e: &Expr) -> bool {
        int(e.constant)
            && e.var_coeffs.iter().all(|&(_, c)| int(c))
            && e.rvar_coeffs.iter().all(|&(_, c)| int(c))
    }
    fn cmp_ok(c: &Cmp) -> bool {
        expr_ok(&c.lhs) && expr_ok(&c.rhs)
    }
    fn cond_ok(c: &Cond) -> bool {
        match c {
            Cond::Conj(cmps) => cmps.iter().all(cmp_ok),
            _ => true,
        }
    }
    fn stmts_ok(stmts: &[Stmt]) -> bool {
        stmts.iter().all(|s| match s {
            Stmt::Assign(_, exprs) => exprs.iter().all(expr_ok),
            Stmt::While(c, _, b) => cond_ok(c) && stmts_ok(b),
            Stmt::IfProb(_, _, a, b) => stmts_ok(a) && stmts_ok(b),
            Stmt::Switch(_, bs) => bs.iter().all(|(_, b)| stmts_ok(b)),
            Stmt::IfCond(c, _, a, b) => cond_ok(c) && stmts_ok(a) && stmts_ok(b),
            Stmt::Assert(c, _) => cond_ok(c),
            Stmt::Exit | Stmt::Skip => true,
        })
    }
    let dists_ok = prog.dists.iter().all(|d| match d {
        Distribution::Discrete(atoms) => atoms.iter().all(|&(v, _)| int(v)),
        Distribution::Uniform(..) => false,
    });
    dists_ok && stmts_ok(&prog.body)
}

/// Translates a parsed program plus annotations into a PTS and the matching
/// well-formedness configuration.
pub fn translate(prog: &Program, ann: &AnnotationSet) -> Result<(Pts, CheckConfig), FrontError> {
    let integral = is_integral_program(prog);
    let nv = prog.vars.len();
    let nr = prog.dists.len();
    let mut b = Builder {
        prog,
        integral,
        loc_count: 2,
        term: 0,
        fail: 1,
        transitions: Vec::new(),
        inline_invs: HashMap::new(),
        guard_locs: Vec::new(),
    };
    let term_entry = Entry { loc: b.term, upd: UpdateFn::identity(nv, nr) };
    let entry = b.seq(&prog.body, term_entry)?;

    // Resolve the initial state. A random entry update needs a dedicated
    // dispatch location; a deterministic one folds into the initial values.
    let (init_loc, init_val, extra_init) = if entry.upd.is_deterministic() {
        (entry.loc, entry.upd.apply(&vec![0.0; nv], &[]), None)
    } else {
        let loc = b.fresh_loc();
        b.push_trans(loc, Vec::new(), vec![Fork { prob: 1.0, dst: entry.loc, update: entry.upd }]);
        (loc, vec![0.0; nv], Some(loc))
    };
    let _ = extra_init;

    // Splice guard-only locations into their predecessors. An `if` or
    // `assert` check routes deterministically on the post-update state, so
    // modelling it as a location would charge a probabilistic step for a
    // branch decision. Instead, each fork that lands on such a location is
    // split by the location's outgoing guards (pulled back through the
    // fork's update), so conditionals refine transition guards and every
    // remaining transition corresponds to one probabilistic step.
    let fusible: std::collections::HashSet<usize> =
        b.guard_locs.iter().copied().filter(|&l| l != init_loc).collect();
    let pullback = |rows: &[Row], u: &UpdateFn| -> Vec<Row> {
        rows.iter()
            .map(|(a, c)| {
                let mut na = vec![0.0; nv];
                let mut nc = *c;
                for (i, &ai) in a.iter().enumerate() {
                    if ai != 0.0 {
                        for j in 0..nv {
                            na[j] += ai * u.q[i][j];
                        }
                        nc -= ai * u.e[i];
                    }
                }
                (na, nc)
            })
            .collect()
    };
    for _round in 0..10_000 {
        let target = b.transitions.iter().position(|t| {
            !fusible.contains(&t.src)
                && t.forks
                    .iter()
                    .any(|f| fusible.contains(&f.dst) && f.update.is_deterministic())
        });
        let Some(ti) = target else { break };
        let t = b.transitions[ti].clone();
        let fi = t
            .forks
            .iter()
            .position(|f| fusible.contains(&f.dst) && f.update.is_deterministic())
            .unwrap();
        let gl = t.forks[fi].dst;
        let u = t.forks[fi].update.clone();
        let outs: Vec<Transition> =
            b.transitions.iter().filter(|o| o.src == gl).cloned().collect();
        let mut replacements = Vec::with_capacity(outs.len());
        for o in &outs {
            let mut rows = t.guard.rows.clone();
            for row in pullback(&o.guard.rows, &u) {
                if !rows.contains(&row) {
                    rows.push(row);
                }
            }
            let guard = Polyhedron { dim: nv, rows };
            if crate::polyhedra::is_empty(&guard).unwrap_or(false) {
                continue;
            }
            let mut forks = t.forks.clone();
            let of = &o.forks[0];
            forks[fi] =
                Fork { prob: t.forks[fi].prob, dst: of.dst, update: of.update.compose(&u) };
            replacements.push(Transition { src: t.src, guard, forks });
        }
        b.transitions.splice(ti..=ti, replacements);
    }

    // Relabel reachable locations in BFS order from the initial location for
    // stable, readable names; terminal and failure locations come last.
    let n = b.loc_count;
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[init_loc] = true;
    queue.push_back(init_loc);
    while let Some(l) = queue.pop_front() {
        if l == b.term || l == b.fail {
            continue;
        }
        order.push(l);
        for t in b.transitions.iter().filter(|t| t.src == l) {
            for f in &t.forks {
                if !seen[f.dst] {
                    seen[f.dst] = true;
                    queue.push_back(f.dst);
                }
            }
        }
    }
    order.push(b.term);
    order.push(b.fail);
    seen[b.term] = true;
    seen[b.fail] = true;
    let mut remap = vec![usize::MAX; n];
    for (new, &old) in order.iter().enumerate() {
        remap[old] = new;
    }

    let num_locs = order.len();
    let mut loc_names: Vec<String> = (0..num_locs - 2).map(|i| format!("l{i}")).collect();
    loc_names.push("lt".to_string());
    loc_names.push("lf".to_string());

    let mut transitions: Vec<Transition> =
        b.transitions.into_iter().filter(|t| seen[t.src]).collect();
    for t in transitions.iter_mut() {
        t.src = remap[t.src];
        for f in t.forks.iter_mut() {
            f.dst = remap[f.dst];
        }
    }
    transitions.sort_by_key(|t| t.src);

    let mut invariants = vec![Polyhedron::universe(nv); num_locs];
    for (old, rows) in b.inline_invs {
        if seen[old] {
            invariants[remap[old]].rows.extend(rows);
        }
    }
    for (label, rows_text) in &ann.invariants {
        let id = loc_names
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| FrontError::Annotation(format!("unknown location label `{label}`")))?;
        let parsed = pts::parse_rows(rows_text, &prog.vars, 0)
            .map_err(|e| FrontError::Annotation(e.to_string()))?;
        invariants[id].rows.extend(parsed);
    }

    let pts = Pts {
        var_names: prog.vars.clone(),
        rvar_names: (0..nr).map(|i| format!("r{i}")).collect(),
        dists: prog.dists.clone(),
        loc_names,
        init_loc: remap[init_loc],
        term_loc: remap[b.term],
        fail_loc: remap[b.fail],
        init_val,
        transitions,
        invariants,
    };
    let config = CheckConfig { trust_complete: ann.trust_complete, integral };
    Ok((pts, config))
}

/// Debug rendering of the AST for `--dump-ast`.
pub fn dump_ast(prog: &Program) -> String {
    format!("{prog:#?}\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pts::{check_well_formed, print_pts, Severity};

    const RACE: &str = "
x := 40; y := 0;
while (x <= 99 && y <= 99) @inv(x <= 100, y <= 101) {
    if prob(0.5) { x, y := x + 1, y + 2; } else { x := x + 1; }
}
assert(x >= 100) @inv(x <= 100, y <= 101);
";

    #[test]
    fn race_translates_to_expected_shape() {
        let prog = parse(RACE).unwrap();
        assert_eq!(prog.vars, vec!["x", "y"]);
        let (pts, cfg) = translate(&prog, &AnnotationSet::default()).unwrap();
        assert!(cfg.integral);
        // while head, coin dispatch, ℓ_t, ℓ_f; the assert check folds into
        // the loop-exit guards.
        assert_eq!(pts.num_locs(), 4);
        assert_eq!(pts.init_val, vec![40.0, 0.0]);
        let head = pts.init_loc;
        let loop_t = pts
            .transitions
            .iter()
            .find(|t| t.forks.len() == 2)
            .expect("probabilistic dispatch transition");
        let dispatch = loop_t.src;
        assert!(loop_t.forks.iter().all(|f| f.dst == head));
        assert_eq!(loop_t.forks[0].prob, 0.5);
        assert_eq!(loop_t.forks[0].update.e, vec![1.0, 2.0]);
        assert_eq!(loop_t.forks[1].update.e, vec![1.0, 0.0]);
        // The loop body is entered under the full loop guard.
        let entry = pts
            .transitions_from(head)
            .find(|t| t.forks[0].dst == dispatch)
            .expect("loop entry transition");
        assert_eq!(entry.guard.rows.len(), 2);
        // Integral complement: ¬(x ≤ 99) is x ≥ 100; the assert splits the
        // exits between ℓ_t and ℓ_f.
        let exits: Vec<_> = pts
            .transitions_from(head)
            .filter(|t| t.forks[0].dst != dispatch)
            .collect();
        assert_eq!(exits.len(), 2);
        assert_eq!(exits[0].guard.rows, vec![(vec![-1.0, 0.0], -100.0)]);
        assert_eq!(exits[0].forks[0].dst, pts.term_loc);
        assert_eq!(
            exits[1].guard.rows,
            vec![(vec![1.0, 0.0], 99.0), (vec![0.0, -1.0], -100.0)]
        );
        assert_eq!(exits[1].forks[0].dst, pts.fail_loc);
        let diags = check_well_formed(&pts, cfg);
        assert!(diags.iter().all(|d| d.severity != Severity::Error), "{diags:?}");
    }

    #[test]
    fn assert_false_goes_straight_to_fail() {
        let prog = parse("x := 0; assert(false);").unwrap();
        let (pts, _) = translate(&prog, &AnnotationSet::default()).unwrap();
        assert_eq!(pts.init_loc, pts.fail_loc);
    }

    #[test]
    fn exit_and_switch_compile() {
        let src = "
x := 0;
while (x <= 10) {
    switch {
        prob(0.5): { x := x + 1; }
        prob(0.3): { x := x - 1; }
        prob(0.2): { exit; }
    }
}
assert(x >= 11);
";
        let prog = parse(src).unwrap();
        let (pts, cfg) = translate(&prog, &AnnotationSet::default()).unwrap();
        let dispatch = pts
            .transitions
            .iter()
            .find(|t| t.forks.len() == 3)
            .expect("switch dispatch");
        assert_eq!(dispatch.forks[2].dst, pts.term_loc);
        let diags = check_well_formed(&pts, cfg);
        assert!(diags.iter().all(|d| d.severity != Severity::Error), "{diags:?}");
    }

    #[test]
    fn sampling_occurrences_are_fresh_draws() {
        let src = "
x := 0;
while (x <= 5) {
    x := x + discrete(1: 0.75, -1: 0.25) + discrete(1: 0.5, 0: 0.5);
}
";
        let prog = parse(src).unwrap();
        assert_eq!(prog.dists.len(), 2);
        let (pts, _) = translate(&prog, &AnnotationSet::default()).unwrap();
        let loop_t = &pts.transitions_from(pts.init_loc).next().unwrap();
        assert_eq!(loop_t.forks[0].update.r[0], vec![1.0, 1.0]);
    }

    #[test]
    fn roundtrips_through_textual_format() {
        let prog = parse(RACE).unwrap();
        let (pts, _) = translate(&prog, &AnnotationSet::default()).unwrap();
        let text = print_pts(&pts);
        let re = crate::pts::parse_pts(&text).unwrap();
        assert_eq!(re.transitions.len(), pts.transitions.len());
        for (a, b) in re.transitions.iter().zip(&pts.transitions) {
            assert_eq!(a.guard, b.guard);
            for (fa, fb) in a.forks.iter().zip(&b.forks) {
                assert_eq!(fa.update, fb.update);
            }
        }
        assert_eq!(re.invariants, pts.invariants);
    }

    #[test]
    fn annotation_file_parses_and_applies() {
        let ann = AnnotationSet::parse(
            "# invariants\nassume_ast\ninv l0: x <= 100, y <= 101\ninv l1: x <= 100\n",
        )
        .unwrap();
        assert!(ann.assume_ast);
        let prog = parse(RACE).unwrap();
        let (pts, _) = translate(&prog, &ann).unwrap();
        // Inline @inv plus file rows both land on l0; l1 is the coin
        // dispatch and only carries the file row.
        assert_eq!(pts.invariants[0].rows.len(), 4);
        assert_eq!(pts.invariants[1].rows.len(), 1);
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("x := ;").unwrap_err();
        assert!(matches!(err, FrontError::Syntax { line: 1, .. }));
        let err = parse("switch { prob(0.5): { skip; } }").unwrap_err();
        assert!(err.to_string().contains("sum to"));
    }

    #[test]
    fn non_integral_programs_use_closed_complements() {
        let src = "x := 0; while (x <= 9.5) { x := x + 0.5; } assert(x >= 10);";
        let prog = parse(src).unwrap();
        let (pts, cfg) = translate(&prog, &AnnotationSet::default()).unwrap();
        assert!(!cfg.integral);
        let exit = pts
            .transitions_from(pts.init_loc)
            .find(|t| t.guard.rows.first() == Some(&(vec![-1.0], -9.5)))
            .is_some();
        assert!(exit, "closed complement x ≥ 9.5 expected");
    }
}
