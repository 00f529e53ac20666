//! Human-readable textual format for a PTS, used by `--dump-pts` and
//! accepted back as input. The format is line based:
//!
//! ```text
//! # qava pts v1
//! vars x y
//! rvar r = discrete(-1: 0.25, 1: 0.75)
//! loc l0
//! term lt
//! fail lf
//! init l0 (40, 0)
//! inv l0: x <= 100, y <= 101
//! trans l0: x <= 99, y <= 99
//! fork 0.5 -> l0: x := x + 1, y := y + 2
//! fork 0.5 -> l0: x := x + 1
//! ```
//!
//! Printing and re-parsing round-trips the system exactly (up to float
//! formatting, which Rust prints shortest-exact).

use super::{Distribution, Fork, Pts, Transition, UpdateFn};
use crate::polyhedra::Polyhedron;
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TextError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, TextError> {
    Err(TextError::Parse { line, msg: msg.into() })
}

/// An affine combination over program and sampling variables.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Affine {
    pub var_coeffs: Vec<f64>,
    pub rvar_coeffs: Vec<f64>,
    pub constant: f64,
}

struct Tok<'a> {
    rest: &'a str,
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

impl<'a> Tok<'a> {
    fn new(s: &'a str) -> Self {
        Tok { rest: s }
    }

    fn peek(&mut self) -> Option<Token> {
        let save = self.rest;
        let t = self.next();
        self.rest = save;
        t
    }

    fn next(&mut self) -> Option<Token> {
        self.rest = self.rest.trim_start();
        let mut chars = self.rest.chars();
        let c = chars.next()?;
        if c.is_ascii_digit() || c == '.' {
            let mut len = 0;
            let bytes = self.rest.as_bytes();
            while len < bytes.len()
                && (bytes[len].is_ascii_digit()
                    || bytes[len] == b'.'
                    || bytes[len] == b'e'
                    || bytes[len] == b'E'
                    || ((bytes[len] == b'+' || bytes[len] == b'-')
                        && len > 0
                        && (bytes[len - 1] == b'e' || bytes[len - 1] == b'E')))
            {
                len += 1;
            }
            let (num, rest) = self.rest.split_at(len);
            self.rest = rest;
            return num.parse().ok().map(Token::Num);
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let len = self
                .rest
                .find(|ch: char| !(ch.is_ascii_alphanumeric() || ch == '_'))
                .unwrap_or(self.rest.len());
            let (id, rest) = self.rest.split_at(len);
            self.rest = rest;
            return Some(Token::Ident(id.to_string()));
        }
        self.rest = chars.as_str();
        Some(Token::Op(c))
    }

    fn done(&mut self) -> bool {
        self.peek().is_none()
    }
}

/// Parses an affine expression such as `2*x - 0.5*y + 3` or `-(x + 1)`.
/// Products are only allowed when one side is constant.
pub fn parse_affine(
    s: &str,
    vars: &[String],
    rvars: &[String],
    line: usize,
) -> Result<Affine, TextError> {
    let mut tok = Tok::new(s);
    let a = parse_sum(&mut tok, vars, rvars, line)?;
    if !tok.done() {
        return err(line, format!("trailing input in expression `{s}`"));
    }
    Ok(a)
}

fn zero(vars: &[String], rvars: &[String]) -> Affine {
    Affine {
        var_coeffs: vec![0.0; vars.len()],
        rvar_coeffs: vec![0.0; rvars.len()],
        constant: 0.0,
    }
}

fn parse_sum(
    tok: &mut Tok,
    vars: &[String],
    rvars: &[String],
    line: usize,
) -> Result<Affine, TextError> {
    let mut acc = parse_product(tok, vars, rvars, line)?;
    loop {
        match tok.peek() {
            Some(Token::Op(c @ ('+' | '-'))) => {
                tok.next();
                let rhs = parse_product(tok, vars, rvars, line)?;
                let sign = if c == '+' { 1.0 } else { -1.0 };
                for (a, b) in acc.var_coeffs.iter_mut().zip(&rhs.var_coeffs) {
                    *a += sign * b;
                }
                for (a, b) in acc.rvar_coeffs.iter_mut().zip(&rhs.rvar_coeffs) {
                    *a += sign * b;
                }
                acc.constant += sign * rhs.constant;
            }
            _ => return Ok(acc),
        }
    }
}

fn parse_product(
    tok: &mut Tok,
    vars: &[String],
    rvars: &[String],
    line: usize,
) -> Result<Affine, TextError> {
    let mut acc = parse_atom(tok, vars, rvars, line)?;
    while let Some(Token::Op('*')) = tok.peek() {
        tok.next();
        let rhs = parse_atom(tok, vars, rvars, line)?;
        let lhs_const = acc.var_coeffs.iter().all(|&c| c == 0.0)
            && acc.rvar_coeffs.iter().all(|&c| c == 0.0);
        let rhs_const = rhs.var_coeffs.iter().all(|&c| c == 0.0)
            && rhs.rvar_coeffs.iter().all(|&c| c == 0.0);
        if !lhs_const && !rhs_const {
            return err(line, "nonlinear product of variables");
        }
        let (mut var_part, scalar) = if lhs_const { (rhs, acc.constant) } else { (acc, rhs.constant) };
        for c in var_part.var_coeffs.iter_mut() {
            *c *= scalar;
        }
        for c in var_part.rvar_coeffs.iter_mut() {
            *c *= scalar;
        }
        var_part.constant *= scalar;
        acc = var_part;
    }
    Ok(acc)
}

fn parse_atom(
    tok: &mut Tok,
    vars: &[String],
    rvars: &[String],
    line: usize,
) -> Result<Affine, TextError> {
    match tok.next() {
        Some(Token::Num(n)) => {
            let mut a = zero(vars, rvars);
            a.constant = n;
            Ok(a)
        }
        Some(Token::Ident(id)) => {
            let mut a = zero(vars, rvars);
            if let Some(i) = vars.iter().position(|v| *v == id) {
                a.var_coeffs[i] = 1.0;
            } else if let Some(i) = rvars.iter().position(|v| *v == id) {
                a.rvar_coeffs[i] = 1.0;
            } else {
                return err(line, format!("unknown variable `{id}`"));
            }
            Ok(a)
        }
        Some(Token::Op('-')) => {
            let mut a = parse_atom(tok, vars, rvars, line)?;
            for c in a.var_coeffs.iter_mut() {
                *c = -*c;
            }
            for c in a.rvar_coeffs.iter_mut() {
                *c = -*c;
            }
            a.constant = -a.constant;
            Ok(a)
        }
        Some(Token::Op('(')) => {
            let a = parse_sum(tok, vars, rvars, line)?;
            match tok.next() {
                Some(Token::Op(')')) => Ok(a),
                _ => err(line, "expected `)`"),
            }
        }
        other => err(line, format!("unexpected token {other:?} in expression")),
    }
}

/// Parses one comparison `lhs <= rhs` / `lhs >= rhs` into a normalized row
/// `coeffs·v ≤ bound` (no sampling variables allowed).
pub fn parse_row(
    s: &str,
    vars: &[String],
    line: usize,
) -> Result<(Vec<f64>, f64), TextError> {
    let (lhs, rhs, flip) = if let Some((l, r)) = s.split_once("<=") {
        (l, r, false)
    } else if let Some((l, r)) = s.split_once(">=") {
        (l, r, true)
    } else {
        return err(line, format!("expected `<=` or `>=` in `{s}`"));
    };
    let no_rvars: Vec<String> = Vec::new();
    let l = parse_affine(lhs, vars, &no_rvars, line)?;
    let r = parse_affine(rhs, vars, &no_rvars, line)?;
    let mut coeffs: Vec<f64> = l
        .var_coeffs
        .iter()
        .zip(&r.var_coeffs)
        .map(|(a, b)| a - b)
        .collect();
    let mut bound = r.constant - l.constant;
    if flip {
        for c in coeffs.iter_mut() {
            *c = -*c;
        }
        bound = -bound;
    }
    Ok((coeffs, bound))
}

/// Parses a comma-separated conjunction of comparisons into normalized rows.
pub fn parse_rows(s: &str, vars: &[String], line: usize) -> Result<Vec<(Vec<f64>, f64)>, TextError> {
    let s = s.trim();
    if s.is_empty() || s == "true" {
        return Ok(Vec::new());
    }
    if s == "false" {
        return Ok(vec![(vec![0.0; vars.len()], -1.0)]);
    }
    s.split(',').map(|part| parse_row(part, vars, line)).collect()
}

/// Parses the textual PTS format.
pub fn parse_pts(input: &str) -> Result<Pts, TextError> {
    let mut vars: Vec<String> = Vec::new();
    let mut rvars: Vec<String> = Vec::new();
    let mut dists: Vec<Distribution> = Vec::new();
    let mut loc_names: Vec<String> = Vec::new();
    let mut loc_ids: HashMap<String, usize> = HashMap::new();
    let mut term_loc = None;
    let mut fail_loc = None;
    let mut init: Option<(String, Vec<f64>)> = None;
    let mut invs: Vec<(String, Vec<(Vec<f64>, f64)>, usize)> = Vec::new();
    // (src, guard rows, forks) with forks as (prob, dst, assignments)
    type RawFork = (f64, String, Vec<(String, Affine)>);
    let mut trans: Vec<(String, Vec<(Vec<f64>, f64)>, Vec<RawFork>, usize)> = Vec::new();

    for (lineno, raw) in input.lines().enumerate() {
        let line = lineno + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        let (kw, rest) = s.split_once(char::is_whitespace).unwrap_or((s, ""));
        let rest = rest.trim();
        match kw {
            "vars" => {
                vars = rest.split_whitespace().map(str::to_string).collect();
            }
            "rvar" => {
                let (name, spec) = rest
                    .split_once('=')
                    .ok_or(TextError::Parse { line, msg: "expected `rvar name = dist`".into() })?;
                rvars.push(name.trim().to_string());
                dists.push(parse_dist(spec.trim(), line)?);
            }
            "loc" | "term" | "fail" => {
                let name = rest.to_string();
                if loc_ids.contains_key(&name) {
                    return err(line, format!("duplicate location `{name}`"));
                }
                loc_ids.insert(name.clone(), loc_names.len());
                if kw == "term" {
                    term_loc = Some(loc_names.len());
                } else if kw == "fail" {
                    fail_loc = Some(loc_names.len());
                }
                loc_names.push(name);
            }
            "init" => {
                let (name, vals) = rest
                    .split_once('(')
                    .ok_or(TextError::Parse { line, msg: "expected `init loc (v, ...)`".into() })?;
                let vals = vals.trim_end_matches(')');
                let parsed: Result<Vec<f64>, _> =
                    vals.split(',').map(|v| v.trim().parse::<f64>()).collect();
                match parsed {
                    Ok(v) => init = Some((name.trim().to_string(), v)),
                    Err(_) => return err(line, "bad initial valuation"),
                }
            }
            "inv" => {
                let (name, rows) = rest
                    .split_once(':')
                    .ok_or(TextError::Parse { line, msg: "expected `inv loc: rows`".into() })?;
                invs.push((name.trim().to_string(), parse_rows(rows, &vars, line)?, line));
            }
            "trans" => {
                let (name, rows) = rest
                    .split_once(':')
                    .ok_or(TextError::Parse { line, msg: "expected `trans loc: guard`".into() })?;
                trans.push((name.trim().to_string(), parse_rows(rows, &vars, line)?, Vec::new(), line));
            }
            "fork" => {
                let t = trans
                    .last_mut()
                    .ok_or(TextError::Parse { line, msg: "fork before any trans".into() })?;
                // `P -> dst[: x := e, ...]`
                let (p_str, rest2) = rest
                    .split_once("->")
                    .ok_or(TextError::Parse { line, msg: "expected `fork p -> dst`".into() })?;
                let prob: f64 = p_str
                    .trim()
                    .parse()
                    .map_err(|_| TextError::Parse { line, msg: "bad fork probability".into() })?;
                let (dst, assigns) = match rest2.split_once(':') {
                    Some((d, a)) => (d.trim().to_string(), a.trim()),
                    None => (rest2.trim().to_string(), ""),
                };
                let mut parsed_assigns = Vec::new();
                if !assigns.is_empty() && assigns != "id" {
                    for part in assigns.split(',') {
                        let (lhs, rhs) = part.split_once(":=").ok_or(TextError::Parse {
                            line,
                            msg: format!("expected `var := expr` in `{part}`"),
                        })?;
                        let target = lhs.trim().to_string();
                        if !vars.contains(&target) {
                            return err(line, format!("unknown variable `{target}`"));
                        }
                        parsed_assigns.push((target, parse_affine(rhs, &vars, &rvars, line)?));
                    }
                }
                t.2.push((prob, dst, parsed_assigns));
            }
            other => return err(line, format!("unknown directive `{other}`")),
        }
    }

    let term_loc = term_loc.ok_or(TextError::Parse { line: 0, msg: "missing `term`".into() })?;
    let fail_loc = fail_loc.ok_or(TextError::Parse { line: 0, msg: "missing `fail`".into() })?;
    let (init_name, init_val) =
        init.ok_or(TextError::Parse { line: 0, msg: "missing `init`".into() })?;
    let lookup = |name: &str, line: usize| -> Result<usize, TextError> {
        loc_ids
            .get(name)
            .copied()
            .ok_or(TextError::Parse { line, msg: format!("unknown location `{name}`") })
    };
    let init_loc = lookup(&init_name, 0)?;

    let mut invariants = vec![Polyhedron::universe(vars.len()); loc_names.len()];
    for (name, rows, line) in invs {
        let id = lookup(&name, line)?;
        invariants[id].rows.extend(rows);
    }

    let mut transitions = Vec::new();
    for (name, guard_rows, forks, tline) in trans {
        let src = lookup(&name, tline)?;
        let mut out_forks = Vec::new();
        for (prob, dst, assigns) in forks {
            let dst = lookup(&dst, tline)?;
            let mut update = UpdateFn::identity(vars.len(), rvars.len());
            for (target, aff) in assigns {
                let i = vars.iter().position(|v| *v == target).unwrap();
                update.q[i] = aff.var_coeffs;
                update.r[i] = aff.rvar_coeffs;
                update.e[i] = aff.constant;
            }
            out_forks.push(Fork { prob, dst, update });
        }
        transitions.push(Transition {
            src,
            guard: Polyhedron { dim: vars.len(), rows: guard_rows },
            forks: out_forks,
        });
    }

    Ok(Pts {
        var_names: vars,
        rvar_names: rvars,
        dists,
        loc_names,
        init_loc,
        term_loc,
        fail_loc,
        init_val,
        transitions,
        invariants,
    })
}

fn parse_dist(s: &str, line: usize) -> Result<Distribution, TextError> {
    if let Some(body) = s.strip_prefix("discrete(").and_then(|b| b.strip_suffix(')')) {
        let mut atoms = Vec::new();
        for part in body.split(',') {
            let (v, p) = part
                .split_once(':')
                .ok_or(TextError::Parse { line, msg: "expected `value: prob`".into() })?;
            let v: f64 = v.trim().parse().map_err(|_| TextError::Parse {
                line,
                msg: format!("bad atom value `{v}`"),
            })?;
            let p: f64 = p.trim().parse().map_err(|_| TextError::Parse {
                line,
                msg: format!("bad atom probability `{p}`"),
            })?;
            atoms.push((v, p));
        }
        return Ok(Distribution::Discrete(atoms));
    }
    if let Some(body) = s.strip_prefix("uniform(").and_then(|b| b.strip_suffix(')')) {
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() == 2 {
            if let (Ok(lo), Ok(hi)) = (parts[0].trim().parse(), parts[1].trim().parse()) {
                return Ok(Distribution::Uniform(lo, hi));
            }
        }
    }
    err(line, format!("unknown distribution `{s}`"))
}

fn fmt_row(coeffs: &[f64], bound: f64, vars: &[String]) -> String {
    let mut s = String::new();
    let mut first = true;
    for (c, v) in coeffs.iter().zip(vars) {
        if *c == 0.0 {
            continue;
        }
        if first {
            if *c == 1.0 {
                let _ = write!(s, "{v}");
            } else if *c == -1.0 {
                let _ = write!(s, "-{v}");
            } else {
                let _ = write!(s, "{c}*{v}");
            }
            first = false;
        } else if *c > 0.0 {
            if *c == 1.0 {
                let _ = write!(s, " + {v}");
            } else {
                let _ = write!(s, " + {c}*{v}");
            }
        } else if *c == -1.0 {
            let _ = write!(s, " - {v}");
        } else {
            let _ = write!(s, " - {}*{v}", -c);
        }
    }
    if first {
        s.push('0');
    }
    let _ = write!(s, " <= {bound}");
    s
}

fn fmt_affine(aff_q: &[f64], aff_r: &[f64], constant: f64, vars: &[String], rvars: &[String]) -> String {
    let mut s = String::new();
    let mut push = |c: f64, name: &str, s: &mut String| {
        if c == 0.0 {
            return;
        }
        if s.is_empty() {
            if c == 1.0 {
                let _ = write!(s, "{name}");
            } else if c == -1.0 {
                let _ = write!(s, "-{name}");
            } else {
                let _ = write!(s, "{c}*{name}");
            }
        } else if c > 0.0 {
            if c == 1.0 {
                let _ = write!(s, " + {name}");
            } else {
                let _ = write!(s, " + {c}*{name}");
            }
        } else if c == -1.0 {
            let _ = write!(s, " - {name}");
        } else {
            let _ = write!(s, " - {}*{name}", -c);
        }
    };
    for (c, v) in aff_q.iter().zip(vars) {
        push(*c, v, &mut s);
    }
    for (c, v) in aff_r.iter().zip(rvars) {
        push(*c, v, &mut s);
    }
    if constant != 0.0 || s.is_empty() {
        if s.is_empty() {
            let _ = write!(s, "{constant}");
        } else if constant > 0.0 {
            let _ = write!(s, " + {constant}");
        } else {
            let _ = write!(s, " - {}", -constant);
        }
    }
    s
}

/// Prints a PTS in the textual format accepted by [`parse_pts`].
pub fn print_pts(pts: &Pts) -> String {
    let mut out = String::from("# qava pts v1\n");
    let _ = writeln!(out, "vars {}", pts.var_names.join(" "));
    for (name, dist) in pts.rvar_names.iter().zip(&pts.dists) {
        let spec = match dist {
            Distribution::Discrete(atoms) => {
                let body: Vec<String> =
                    atoms.iter().map(|(v, p)| format!("{v}: {p}")).collect();
                format!("discrete({})", body.join(", "))
            }
            Distribution::Uniform(lo, hi) => format!("uniform({lo}, {hi})"),
        };
        let _ = writeln!(out, "rvar {name} = {spec}");
    }
    for (id, name) in pts.loc_names.iter().enumerate() {
        let kw = if id == pts.term_loc {
            "term"
        } else if id == pts.fail_loc {
            "fail"
        } else {
            "loc"
        };
        let _ = writeln!(out, "{kw} {name}");
    }
    let vals: Vec<String> = pts.init_val.iter().map(|v| format!("{v}")).collect();
    let _ = writeln!(out, "init {} ({})", pts.loc_names[pts.init_loc], vals.join(", "));
    for (id, inv) in pts.invariants.iter().enumerate() {
        if inv.rows.is_empty() {
            continue;
        }
        let rows: Vec<String> =
            inv.rows.iter().map(|(a, b)| fmt_row(a, *b, &pts.var_names)).collect();
        let _ = writeln!(out, "inv {}: {}", pts.loc_names[id], rows.join(", "));
    }
    for t in &pts.transitions {
        let guard = if t.guard.rows.is_empty() {
            "true".to_string()
        } else {
            let rows: Vec<String> =
                t.guard.rows.iter().map(|(a, b)| fmt_row(a, *b, &pts.var_names)).collect();
            rows.join(", ")
        };
        let _ = writeln!(out, "trans {}: {}", pts.loc_names[t.src], guard);
        for f in &t.forks {
            let mut assigns = Vec::new();
            for (i, var) in pts.var_names.iter().enumerate() {
                let mut ident_row = vec![0.0; pts.num_vars()];
                ident_row[i] = 1.0;
                let is_ident = f.update.q[i] == ident_row
                    && f.update.r[i].iter().all(|&c| c == 0.0)
                    && f.update.e[i] == 0.0;
                if !is_ident {
                    assigns.push(format!(
                        "{var} := {}",
                        fmt_affine(
                            &f.update.q[i],
                            &f.update.r[i],
                            f.update.e[i],
                            &pts.var_names,
                            &pts.rvar_names
                        )
                    ));
                }
            }
            if assigns.is_empty() {
                let _ = writeln!(out, "fork {} -> {}", f.prob, pts.loc_names[f.dst]);
            } else {
                let _ =
                    writeln!(out, "fork {} -> {}: {}", f.prob, pts.loc_names[f.dst], assigns.join(", "));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const RACE: &str = "\
# tortoise and hare
vars x y
loc l0
loc la
term lt
fail lf
init l0 (40, 0)
inv l0: x <= 100, y <= 101
inv la: x <= 100, y <= 101
trans l0: x <= 99, y <= 99
fork 0.5 -> l0: x := x + 1, y := y + 2
fork 0.5 -> l0: x := x + 1
trans l0: x >= 100
fork 1 -> la
trans l0: x <= 99, y >= 100
fork 1 -> la
trans la: x >= 100
fork 1 -> lt
trans la: x <= 99
fork 1 -> lf
";

    #[test]
    fn parses_race_and_roundtrips() {
        let pts = parse_pts(RACE).unwrap();
        assert_eq!(pts.var_names, vec!["x", "y"]);
        assert_eq!(pts.num_locs(), 4);
        assert_eq!(pts.init_val, vec![40.0, 0.0]);
        assert_eq!(pts.transitions.len(), 5);
        let t0 = &pts.transitions[0];
        assert_eq!(t0.forks.len(), 2);
        assert_eq!(t0.forks[0].update.e, vec![1.0, 2.0]);
        assert_eq!(t0.forks[1].update.e, vec![1.0, 0.0]);
        // y >= 100 normalizes to −y ≤ −100.
        assert_eq!(pts.transitions[2].guard.rows[1], (vec![0.0, -1.0], -100.0));

        let printed = print_pts(&pts);
        let reparsed = parse_pts(&printed).unwrap();
        assert_eq!(reparsed.var_names, pts.var_names);
        assert_eq!(reparsed.init_val, pts.init_val);
        assert_eq!(reparsed.transitions.len(), pts.transitions.len());
        for (a, b) in reparsed.transitions.iter().zip(&pts.transitions) {
            assert_eq!(a.guard, b.guard);
            assert_eq!(a.forks.len(), b.forks.len());
            for (fa, fb) in a.forks.iter().zip(&b.forks) {
                assert_eq!(fa.prob, fb.prob);
                assert_eq!(fa.dst, fb.dst);
                assert_eq!(fa.update, fb.update);
            }
        }
        assert_eq!(reparsed.invariants, pts.invariants);
    }

    #[test]
    fn affine_parser_handles_products_and_parens() {
        let vars = vec!["x".to_string(), "y".to_string()];
        let a = parse_affine("2*(x + 1) - 0.5*y - 3", &vars, &[], 1).unwrap();
        assert_eq!(a.var_coeffs, vec![2.0, -0.5]);
        assert_eq!(a.constant, -1.0);
        assert!(parse_affine("x*y", &vars, &[], 1).is_err());
    }

    #[test]
    fn rvar_roundtrip() {
        let src = "\
vars x
rvar r = discrete(-1: 0.25, 1: 0.75)
rvar u = uniform(0, 1)
loc l0
term lt
fail lf
init l0 (0)
trans l0: x <= 10
fork 1 -> l0: x := x + r + u
trans l0: x >= 11
fork 1 -> lt
";
        let pts = parse_pts(src).unwrap();
        assert_eq!(pts.dists.len(), 2);
        assert_eq!(pts.transitions[0].forks[0].update.r[0], vec![1.0, 1.0]);
        let printed = print_pts(&pts);
        let re = parse_pts(&printed).unwrap();
        assert_eq!(re.dists, pts.dists);
        assert_eq!(re.transitions[0].forks[0].update, pts.transitions[0].forks[0].update);
    }
}
