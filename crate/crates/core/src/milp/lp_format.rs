//! Writer and reader for the human-readable LP text format.
//!
//! The writer produces a deterministic document: sections in a fixed order,
//! variables and rows in declaration order, numbers rendered with Rust's
//! shortest round-trip float formatting (exponent form below 1e-5 and above
//! 1e16). Identical models therefore emit byte-identical text on every
//! platform.
//!
//! # Name mangling
//!
//! LP readers accept a restricted character set and treat a handful of words
//! as section keywords, so every variable and row name is mangled into
//! `[A-Za-z0-9_.]`:
//!
//! * ASCII letters, digits and `_` are copied unchanged;
//! * every other byte of the UTF-8 encoding, including `.`, becomes `.HH`
//!   (two upper-case hex digits);
//! * a name whose first character is not a letter, or is `e`/`E` (readers may
//!   take it for an exponent), or whose mangled form is a reserved word, has
//!   its first byte written as `_.HH` instead.
//!
//! The mapping is injective and [`demangle`] inverts it. Mangled names longer
//! than 255 bytes are truncated; if two names then coincide emission fails
//! with [`LpError::NameCollisionAfterMangling`].

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::model::{MilpError, MilpModel, RowSense, VarKind};

/// Longest name most LP readers accept.
pub const MAX_NAME_LEN: usize = 255;

const TERMS_PER_LINE: usize = 8;

const RESERVED: &[&str] = &[
    "max", "maximize", "maximise", "maximum", "min", "minimize", "minimise", "minimum", "st",
    "subject", "such", "bound", "bounds", "free", "inf", "infinity", "bin", "binary", "binaries",
    "gen", "general", "generals", "integer", "integers", "semi", "semis", "sos", "sos1", "sos2",
    "end",
];

#[derive(Debug, Error, PartialEq)]
pub enum LpError {
    #[error("names {first:?} and {second:?} both mangle to {mangled:?}")]
    NameCollisionAfterMangling {
        first: String,
        second: String,
        mangled: String,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid model: {0}")]
    Model(#[from] MilpError),
}

fn parse_err(line: usize, msg: impl Into<String>) -> LpError {
    LpError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Maps an arbitrary name onto the LP character set.
pub fn mangle(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let bytes = name.as_bytes();
    let mut rest = bytes;
    if let Some(&first) = bytes.first() {
        let plain_start = first.is_ascii_alphabetic() && first != b'e' && first != b'E';
        if !plain_start {
            let _ = write!(out, "_.{first:02X}");
            rest = &bytes[1..];
        }
    }
    for &b in rest {
        if b.is_ascii_alphanumeric() || b == b'_' {
            out.push(b as char);
        } else {
            let _ = write!(out, ".{b:02X}");
        }
    }
    if RESERVED.iter().any(|w| w.eq_ignore_ascii_case(&out)) {
        let first = bytes[0];
        let tail: String = out.chars().skip(1).collect();
        out = format!("_.{first:02X}{tail}");
    }
    out
}

/// Inverse of [`mangle`]; `None` if `mangled` is not a valid mangled name.
pub fn demangle(mangled: &str) -> Option<String> {
    let bytes = mangled.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    if bytes.starts_with(b"_.") {
        out.push(hex_byte(bytes.get(2..4)?)?);
        i = 4;
    }
    while i < bytes.len() {
        match bytes[i] {
            b'.' => {
                out.push(hex_byte(bytes.get(i + 1..i + 3)?)?);
                i += 3;
            }
            b if b.is_ascii_alphanumeric() || b == b'_' => {
                out.push(b);
                i += 1;
            }
            _ => return None,
        }
    }
    String::from_utf8(out).ok()
}

fn hex_byte(pair: &[u8]) -> Option<u8> {
    let s = std::str::from_utf8(pair).ok()?;
    if s.bytes()
        .all(|c| c.is_ascii_digit() || (b'A'..=b'F').contains(&c))
    {
        u8::from_str_radix(s, 16).ok()
    } else {
        None
    }
}

fn mangle_all<'a>(names: impl Iterator<Item = &'a str>) -> Result<Vec<String>, LpError> {
    let mut seen: HashMap<String, &str> = HashMap::new();
    let mut out = Vec::new();
    for name in names {
        let mut m = mangle(name);
        m.truncate(MAX_NAME_LEN);
        if let Some(prev) = seen.insert(m.clone(), name) {
            return Err(LpError::NameCollisionAfterMangling {
                first: prev.to_string(),
                second: name.to_string(),
                mangled: m,
            });
        }
        out.push(m);
    }
    Ok(out)
}

/// Renders a coefficient or bound.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let a = v.abs();
    if !(1e-5..1e16).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

fn write_terms(out: &mut String, terms: &[(usize, f64)], names: &[String]) {
    for (k, &(var, coef)) in terms.iter().enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n  ");
        }
        let sign = if coef < 0.0 { '-' } else { '+' };
        if k == 0 && sign == '+' {
            let _ = write!(out, " {} {}", format_number(coef), names[var]);
        } else {
            let _ = write!(out, " {sign} {} {}", format_number(coef.abs()), names[var]);
        }
    }
}

/// Emits `model` as an LP document.
pub fn emit_lp(model: &MilpModel) -> Result<String, LpError> {
    let vars = mangle_all(model.variables().iter().map(|v| v.name.as_str()))?;
    let rows = mangle_all(model.constraints().iter().map(|c| c.name.as_str()))?;

    let mut out = String::new();
    let _ = writeln!(
        out,
        "\\ {} variables ({} binary), {} constraints",
        model.variables().len(),
        model.num_binaries(),
        model.constraints().len()
    );
    out.push_str("Maximize\n obj:");
    let objective = model.objective();
    let terms: Vec<(usize, f64)> = objective
        .terms
        .iter()
        .map(|&(v, c)| (v.index(), c))
        .collect();
    write_terms(&mut out, &terms, &vars);
    if objective.constant != 0.0 {
        let sign = if objective.constant < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {}", format_number(objective.constant.abs()));
    } else if terms.is_empty() {
        out.push_str(" 0");
    }
    out.push('\n');

    out.push_str("Subject To\n");
    for (row, name) in model.constraints().iter().zip(&rows) {
        let _ = write!(out, " {name}:");
        let terms: Vec<(usize, f64)> = row.terms.iter().map(|&(v, c)| (v.index(), c)).collect();
        write_terms(&mut out, &terms, &vars);
        let _ = writeln!(out, " {} {}", row.sense.symbol(), format_number(row.rhs));
    }

    out.push_str("Bounds\n");
    for (v, name) in model.variables().iter().zip(&vars) {
        if v.kind == VarKind::Binary {
            continue;
        }
        let (lo, hi) = (v.lower, v.upper);
        match (lo == 0.0, lo == f64::NEG_INFINITY, hi == f64::INFINITY) {
            (true, _, true) => {}
            (_, true, true) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, _, false) => {
                let _ = writeln!(out, " {name} <= {}", format_number(hi));
            }
            (false, false, true) => {
                let _ = writeln!(out, " {name} >= {}", format_number(lo));
            }
            _ => {
                let _ = writeln!(
                    out,
                    " {} <= {name} <= {}",
                    format_number(lo),
                    format_number(hi)
                );
            }
        }
    }

    let binaries: Vec<&String> = model
        .variables()
        .iter()
        .zip(&vars)
        .filter(|(v, _)| v.kind == VarKind::Binary)
        .map(|(_, n)| n)
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for chunk in binaries.chunks(TERMS_PER_LINE) {
            let line: Vec<&str> = chunk.iter().map(|s| s.as_str()).collect();
            let _ = writeln!(out, " {}", line.join(" "));
        }
    }
    out.push_str("End\n");
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Objective,
    Constraints,
    Bounds,
    Binaries,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Label(String),
    Name(String),
    Num(f64),
    Plus,
    Minus,
    Rel(RowSense),
}

fn section_header(line: &str) -> Option<Result<Option<Section>, String>> {
    let lower = line.trim().to_ascii_lowercase();
    let words: Vec<&str> = lower.split_whitespace().collect();
    let sec = match words.as_slice() {
        ["maximize" | "maximise" | "maximum" | "max"] => Ok(Some(Section::Objective)),
        ["minimize" | "minimise" | "minimum" | "min"] => {
            Err("minimisation documents are not supported".to_string())
        }
        ["subject", "to"] | ["such", "that"] | ["st"] | ["s.t."] => Ok(Some(Section::Constraints)),
        ["bounds" | "bound"] => Ok(Some(Section::Bounds)),
        ["binaries" | "binary" | "bin"] => Ok(Some(Section::Binaries)),
        ["generals" | "general" | "gen" | "integers"]
        | ["semi-continuous" | "semis" | "semi" | "sos"] => {
            Err(format!("unsupported section {lower:?}"))
        }
        ["end"] => Ok(None),
        _ => return None,
    };
    Some(sec)
}

fn tokenize(line_no: usize, line: &str, out: &mut Vec<(usize, Tok)>) -> Result<(), LpError> {
    let mut words: Vec<String> = Vec::new();
    for w in line.split_whitespace() {
        // Split a trailing label colon and relational operators glued to values.
        if let Some(stripped) = w.strip_suffix(':') {
            if !stripped.is_empty() {
                words.push(format!("{stripped}:"));
                continue;
            }
        }
        words.push(w.to_string());
    }
    for w in words {
        let tok = match w.as_str() {
            "+" => Tok::Plus,
            "-" => Tok::Minus,
            "<=" | "=<" | "<" => Tok::Rel(RowSense::Le),
            ">=" | "=>" | ">" => Tok::Rel(RowSense::Ge),
            "=" => Tok::Rel(RowSense::Eq),
            ":" => match out.pop() {
                Some((_, Tok::Name(n))) => Tok::Label(n),
                _ => return Err(parse_err(line_no, "stray ':'")),
            },
            s if s.ends_with(':') => Tok::Label(s[..s.len() - 1].to_string()),
            s => match parse_value(s) {
                Some(v) => Tok::Num(v),
                None => Tok::Name(s.to_string()),
            },
        };
        out.push((line_no, tok));
    }
    Ok(())
}

fn parse_value(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        l if l.starts_with(|c: char| c.is_ascii_digit() || c == '.' || c == '-' || c == '+') => {
            l.parse().ok()
        }
        _ => None,
    }
}

struct Expr {
    terms: Vec<(String, f64)>,
    constant: f64,
}

/// Reads `[sign] [coef] name` terms and bare constants until a relation,
/// a label or the end of input.
fn parse_expr(toks: &[(usize, Tok)], pos: &mut usize) -> Result<Expr, LpError> {
    let mut expr = Expr {
        terms: Vec::new(),
        constant: 0.0,
    };
    loop {
        let mut sign = 1.0;
        let mut saw_sign = false;
        while let Some((_, t @ (Tok::Plus | Tok::Minus))) = toks.get(*pos) {
            if *t == Tok::Minus {
                sign = -sign;
            }
            saw_sign = true;
            *pos += 1;
        }
        let coef = match toks.get(*pos) {
            Some((_, Tok::Num(v))) => {
                *pos += 1;
                Some(*v)
            }
            _ => None,
        };
        match toks.get(*pos) {
            Some((_, Tok::Name(n))) => {
                *pos += 1;
                expr.terms.push((n.clone(), sign * coef.unwrap_or(1.0)));
            }
            _ => {
                if let Some(c) = coef {
                    expr.constant += sign * c;
                } else if saw_sign {
                    let line = toks.get(*pos).or(toks.last()).map_or(0, |t| t.0);
                    return Err(parse_err(line, "dangling sign"));
                } else {
                    return Ok(expr);
                }
            }
        }
    }
}

/// A parsed constraint: name, terms by variable index, sense, right-hand side.
type DraftRow = (String, Vec<(usize, f64)>, RowSense, f64);

struct Draft {
    order: Vec<String>,
    index: HashMap<String, usize>,
    bounds: Vec<(f64, f64)>,
    binary: Vec<bool>,
}

impl Draft {
    fn var(&mut self, mangled: &str, line: usize) -> Result<usize, LpError> {
        let raw = demangle(mangled)
            .ok_or_else(|| parse_err(line, format!("invalid name {mangled:?}")))?;
        if let Some(&i) = self.index.get(&raw) {
            return Ok(i);
        }
        let i = self.order.len();
        self.index.insert(raw.clone(), i);
        self.order.push(raw);
        self.bounds.push((0.0, f64::INFINITY));
        self.binary.push(false);
        Ok(i)
    }
}

/// Reads an LP document in the dialect produced by [`emit_lp`].
///
/// Supports a maximisation objective (with optional constant), labelled or
/// unlabelled rows, the usual bound forms and a binaries section. Names are
/// demangled back to their original form.
pub fn parse_lp(text: &str) -> Result<MilpModel, LpError> {
    let mut sections: Vec<(Section, Vec<(usize, Tok)>)> = Vec::new();
    let mut bound_lines: Vec<(usize, Vec<(usize, Tok)>)> = Vec::new();
    let mut current: Option<Section> = None;
    let mut ended = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('\\').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        if ended {
            return Err(parse_err(line_no, "content after End"));
        }
        if let Some(header) = section_header(line) {
            match header.map_err(|m| parse_err(line_no, m))? {
                Some(sec) => {
                    current = Some(sec);
                    sections.push((sec, Vec::new()));
                }
                None => ended = true,
            }
            continue;
        }
        let Some(sec) = current else {
            return Err(parse_err(line_no, "text before the objective section"));
        };
        if sec == Section::Bounds {
            let mut toks = Vec::new();
            tokenize(line_no, line, &mut toks)?;
            bound_lines.push((line_no, toks));
        } else if let Some((_, toks)) = sections.last_mut() {
            tokenize(line_no, line, toks)?;
        }
    }
    if !ended {
        return Err(parse_err(text.lines().count(), "missing End"));
    }

    let mut draft = Draft {
        order: Vec::new(),
        index: HashMap::new(),
        bounds: Vec::new(),
        binary: Vec::new(),
    };
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut constant = 0.0;
    let mut rows: Vec<DraftRow> = Vec::new();

    for (sec, toks) in &sections {
        match sec {
            Section::Objective => {
                let mut pos = 0;
                if let Some((_, Tok::Label(_))) = toks.first() {
                    pos = 1;
                }
                let expr = parse_expr(toks, &mut pos)?;
                if let Some((line, _)) = toks.get(pos) {
                    return Err(parse_err(*line, "unexpected token in objective"));
                }
                for (name, c) in expr.terms {
                    let line = toks.first().map_or(0, |t| t.0);
                    objective.push((draft.var(&name, line)?, c));
                }
                constant += expr.constant;
            }
            Section::Constraints => {
                let mut pos = 0;
                while pos < toks.len() {
                    let line = toks[pos].0;
                    let name = match &toks[pos].1 {
                        Tok::Label(l) => {
                            pos += 1;
                            demangle(l)
                                .ok_or_else(|| parse_err(line, format!("invalid row name {l:?}")))?
                        }
                        _ => format!("R{}", rows.len() + 1),
                    };
                    let expr = parse_expr(toks, &mut pos)?;
                    let sense = match toks.get(pos) {
                        Some((_, Tok::Rel(s))) => *s,
                        _ => return Err(parse_err(line, format!("row {name:?} lacks a relation"))),
                    };
                    pos += 1;
                    let rhs_expr = parse_expr(toks, &mut pos)?;
                    if !rhs_expr.terms.is_empty() {
                        return Err(parse_err(line, "variables on the right-hand side"));
                    }
                    let mut terms = Vec::with_capacity(expr.terms.len());
                    for (n, c) in expr.terms {
                        terms.push((draft.var(&n, line)?, c));
                    }
                    rows.push((name, terms, sense, rhs_expr.constant - expr.constant));
                }
            }
            Section::Binaries => {
                for (line, tok) in toks {
                    match tok {
                        Tok::Name(n) => {
                            let i = draft.var(n, *line)?;
                            draft.binary[i] = true;
                            draft.bounds[i] = (0.0, 1.0);
                        }
                        _ => return Err(parse_err(*line, "expected a variable name")),
                    }
                }
            }
            Section::Bounds => {}
        }
    }
    for (line, toks) in bound_lines {
        apply_bound(&mut draft, line, &toks)?;
    }

    let mut model = MilpModel::new();
    let mut ids = Vec::with_capacity(draft.order.len());
    for (i, name) in draft.order.iter().enumerate() {
        let id = if draft.binary[i] {
            model.add_binary(name.clone())?
        } else {
            let (lo, hi) = draft.bounds[i];
            model.add_continuous(name.clone(), lo, hi)?
        };
        ids.push(id);
    }
    for (v, c) in objective {
        model.add_objective_term(ids[v], c)?;
    }
    model.set_objective_constant(constant);
    for (name, terms, sense, rhs) in rows {
        let terms: Vec<_> = terms.into_iter().map(|(v, c)| (ids[v], c)).collect();
        model.add_constraint(name, &terms, sense, rhs)?;
    }
    Ok(model)
}

fn apply_bound(draft: &mut Draft, line: usize, toks: &[(usize, Tok)]) -> Result<(), LpError> {
    let num = |t: &Tok, neg: bool| match t {
        Tok::Num(v) => Some(if neg { -v } else { *v }),
        _ => None,
    };
    // Fold a leading sign into the number that follows it.
    let mut flat: Vec<Tok> = Vec::new();
    let mut neg = false;
    for (_, t) in toks {
        match t {
            Tok::Minus => neg = !neg,
            Tok::Plus => {}
            other => {
                flat.push(match num(other, neg) {
                    Some(v) => Tok::Num(v),
                    None => other.clone(),
                });
                neg = false;
            }
        }
    }
    let bad = || parse_err(line, "unrecognised bound");
    match flat.as_slice() {
        [Tok::Name(n), Tok::Name(kw)] if kw.eq_ignore_ascii_case("free") => {
            let i = draft.var(n, line)?;
            draft.bounds[i] = (f64::NEG_INFINITY, f64::INFINITY);
        }
        [Tok::Name(n), Tok::Rel(s), Tok::Num(v)] => {
            let i = draft.var(n, line)?;
            match s {
                RowSense::Le => draft.bounds[i].1 = *v,
                RowSense::Ge => draft.bounds[i].0 = *v,
                RowSense::Eq => draft.bounds[i] = (*v, *v),
            }
        }
        [Tok::Num(v), Tok::Rel(s), Tok::Name(n)] => {
            let i = draft.var(n, line)?;
            match s {
                RowSense::Le => draft.bounds[i].0 = *v,
                RowSense::Ge => draft.bounds[i].1 = *v,
                RowSense::Eq => draft.bounds[i] = (*v, *v),
            }
        }
        [Tok::Num(lo), Tok::Rel(RowSense::Le), Tok::Name(n), Tok::Rel(RowSense::Le), Tok::Num(hi)] =>
        {
            let i = draft.var(n, line)?;
            draft.bounds[i] = (*lo, *hi);
        }
        _ => return Err(bad()),
    }
    Ok(())
}
