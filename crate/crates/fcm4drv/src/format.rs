//! The plain-text model format: parsing and rendering.
//!
//! A model document is line oriented. `#` starts a comment anywhere on a
//! line; blank lines are ignored. Four section headers group the entries:
//!
//! ```text
//! [concepts]
//! Funds              # one identifier per line
//!
//! [edges]
//! Funds ++ Staff     # source, weight, target
//! Staff -0.25 Funds  # numeric weights accepted verbatim
//! Funds pmf(0.3: 0.5, 0.9: 0.5) Staff
//!
//! [init]
//! Funds = singleton(1)
//! Staff = uniform(-1, 1, 100)
//!
//! [clamps]
//! Funds              # reset to its initial distribution every iteration
//! ```
//!
//! The linguistic weight tokens map to ---, --, -, +, ++, +++ =
//! -1, -0.66, -0.33, 0.33, 0.66, 1. Concepts must be declared before they
//! are referenced. Unlisted edges are absent (weight zero), unlisted
//! initial values default to singleton(0), and a clamp entry may carry an
//! explicit `= distribution` to clamp to something other than the
//! concept's initial value.

use std::fmt::Write as _;

use crate::drv::Drv;
use crate::engine::FcmModel;
use crate::error::{DrvError, ParseError, ParseErrorKind};

const LINGUISTIC: [(&str, f64); 6] = [
    ("---", -1.0),
    ("--", -0.66),
    ("-", -0.33),
    ("+", 0.33),
    ("++", 0.66),
    ("+++", 1.0),
];

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Concepts,
    Edges,
    Init,
    Clamps,
}

fn fail(line: usize, kind: ParseErrorKind) -> ParseError {
    ParseError::new(line, kind)
}

fn is_valid_name(token: &str) -> bool {
    let mut chars = token.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_real(what: &'static str, token: &str, line: usize) -> Result<f64, ParseError> {
    let value: f64 = token
        .trim()
        .parse()
        .map_err(|_| fail(line, ParseErrorKind::Malformed { what, token: token.trim().into() }))?;
    if !value.is_finite() {
        return Err(fail(line, ParseErrorKind::Malformed { what, token: token.trim().into() }));
    }
    Ok(value)
}

/// The text between `prefix(` and a trailing `)`, if the token has that
/// shape.
fn call_body<'a>(token: &'a str, prefix: &str) -> Option<&'a str> {
    token
        .strip_prefix(prefix)?
        .strip_prefix('(')
        .and_then(|rest| rest.strip_suffix(')'))
}

fn parse_pmf(body: &str, line: usize) -> Result<Drv, ParseError> {
    let mut pairs = Vec::new();
    for entry in body.split(',') {
        let (v, p) = entry.split_once(':').ok_or_else(|| {
            fail(line, ParseErrorKind::Malformed { what: "pmf entry", token: entry.trim().into() })
        })?;
        pairs.push((parse_real("pmf value", v, line)?, parse_real("pmf probability", p, line)?));
    }
    Drv::new(pairs).map_err(|e| match e {
        DrvError::MassNotNormalized { sum, .. } => fail(line, ParseErrorKind::PmfNotNormalized(sum)),
        other => fail(line, ParseErrorKind::BadDistribution(other)),
    })
}

/// A distribution expression: `singleton(c)`, `uniform(min, max, count)` or
/// `pmf(v: p, ...)`.
fn parse_distribution(token: &str, line: usize) -> Result<Drv, ParseError> {
    if let Some(body) = call_body(token, "singleton") {
        let c = parse_real("singleton value", body, line)?;
        return Drv::singleton(c).map_err(|e| fail(line, ParseErrorKind::BadDistribution(e)));
    }
    if let Some(body) = call_body(token, "uniform") {
        let parts: Vec<&str> = body.split(',').collect();
        if parts.len() != 3 {
            return Err(fail(
                line,
                ParseErrorKind::Malformed { what: "uniform distribution", token: token.into() },
            ));
        }
        let min = parse_real("uniform minimum", parts[0], line)?;
        let max = parse_real("uniform maximum", parts[1], line)?;
        let count: usize = parts[2].trim().parse().map_err(|_| {
            fail(
                line,
                ParseErrorKind::Malformed { what: "uniform count", token: parts[2].trim().into() },
            )
        })?;
        return Drv::uniform_grid(min, max, count)
            .map_err(|e| fail(line, ParseErrorKind::BadDistribution(e)));
    }
    if let Some(body) = call_body(token, "pmf") {
        return parse_pmf(body, line);
    }
    Err(fail(line, ParseErrorKind::Malformed { what: "distribution", token: token.into() }))
}

fn parse_weight(token: &str, line: usize) -> Result<Drv, ParseError> {
    if let Some(&(_, w)) = LINGUISTIC.iter().find(|(tok, _)| *tok == token) {
        return Drv::singleton(w).map_err(|e| fail(line, ParseErrorKind::BadDistribution(e)));
    }
    if token.starts_with("pmf") {
        let body = call_body(token, "pmf").ok_or_else(|| {
            fail(line, ParseErrorKind::Malformed { what: "weight", token: token.into() })
        })?;
        let drv = parse_pmf(body, line)?;
        if drv.min() < -1.0 || drv.max() > 1.0 {
            let value = if drv.min() < -1.0 { drv.min() } else { drv.max() };
            return Err(fail(line, ParseErrorKind::WeightOutOfRange(value)));
        }
        return Ok(drv);
    }
    let scalar: f64 = token.parse().map_err(|_| {
        fail(line, ParseErrorKind::Malformed { what: "weight", token: token.into() })
    })?;
    if !(-1.0..=1.0).contains(&scalar) {
        return Err(fail(line, ParseErrorKind::WeightOutOfRange(scalar)));
    }
    Drv::singleton(scalar).map_err(|e| fail(line, ParseErrorKind::BadDistribution(e)))
}

/// Parses a model document. Errors carry the 1-based source line.
pub fn parse_model(text: &str) -> Result<FcmModel, ParseError> {
    let mut section: Option<Section> = None;
    let mut concepts: Vec<String> = Vec::new();
    let mut edges: Vec<(usize, usize, Drv)> = Vec::new();
    let mut inits: Vec<(usize, Drv)> = Vec::new();
    let mut clamps: Vec<(usize, Option<Drv>, usize)> = Vec::new();

    let index_of = |concepts: &[String], name: &str, line: usize| {
        concepts
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| fail(line, ParseErrorKind::UnknownConcept(name.into())))
    };

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            section = Some(match name {
                "concepts" => Section::Concepts,
                "edges" => Section::Edges,
                "init" => Section::Init,
                "clamps" => Section::Clamps,
                other => return Err(fail(line, ParseErrorKind::UnknownSection(other.into()))),
            });
            continue;
        }
        match section.ok_or_else(|| fail(line, ParseErrorKind::EntryOutsideSection))? {
            Section::Concepts => {
                if !is_valid_name(content) {
                    return Err(fail(
                        line,
                        ParseErrorKind::Malformed { what: "concept name", token: content.into() },
                    ));
                }
                if concepts.iter().any(|c| c == content) {
                    return Err(fail(line, ParseErrorKind::DuplicateConcept(content.into())));
                }
                concepts.push(content.to_string());
            }
            Section::Edges => {
                let tokens: Vec<&str> = content.split_whitespace().collect();
                if tokens.len() < 3 {
                    return Err(fail(
                        line,
                        ParseErrorKind::Malformed { what: "edge", token: content.into() },
                    ));
                }
                let source = index_of(&concepts, tokens[0], line)?;
                let target = index_of(&concepts, tokens[tokens.len() - 1], line)?;
                let weight = parse_weight(&tokens[1..tokens.len() - 1].join(" "), line)?;
                if edges.iter().any(|&(s, t, _)| s == source && t == target) {
                    return Err(fail(
                        line,
                        ParseErrorKind::DuplicateEdge {
                            from: tokens[0].into(),
                            to: tokens[tokens.len() - 1].into(),
                        },
                    ));
                }
                edges.push((source, target, weight));
            }
            Section::Init => {
                let (name, dist) = content.split_once('=').ok_or_else(|| {
                    fail(line, ParseErrorKind::Malformed { what: "init entry", token: content.into() })
                })?;
                let index = index_of(&concepts, name.trim(), line)?;
                if inits.iter().any(|&(i, _)| i == index) {
                    return Err(fail(line, ParseErrorKind::DuplicateInit(name.trim().into())));
                }
                inits.push((index, parse_distribution(dist.trim(), line)?));
            }
            Section::Clamps => {
                let (name, dist) = match content.split_once('=') {
                    Some((name, dist)) => (name.trim(), Some(parse_distribution(dist.trim(), line)?)),
                    None => (content, None),
                };
                let index = index_of(&concepts, name, line)?;
                if clamps.iter().any(|&(i, _, _)| i == index) {
                    return Err(fail(line, ParseErrorKind::DuplicateClamp(name.into())));
                }
                clamps.push((index, dist, line));
            }
        }
    }

    let n = concepts.len();
    let zero = Drv::singleton(0.0).expect("zero is finite");
    let mut weights = vec![vec![zero.clone(); n]; n];
    for (source, target, drv) in edges {
        weights[target][source] = drv;
    }
    let mut initial_state = vec![zero; n];
    for (index, drv) in inits {
        initial_state[index] = drv;
    }
    // A bare clamp entry binds to the concept's initial distribution, which
    // may be declared after the clamp, so resolution happens last.
    let clamps = clamps
        .into_iter()
        .map(|(index, dist, _)| (index, dist.unwrap_or_else(|| initial_state[index].clone())))
        .collect();
    FcmModel::new(concepts, weights, initial_state, clamps)
        .map_err(|e| fail(1, ParseErrorKind::BadModel(e)))
}

/// Shortest decimal that parses back to exactly the same f64.
fn real(v: f64) -> String {
    format!("{v:?}")
}

fn render_distribution(drv: &Drv, out: &mut String) {
    if drv.is_singleton() {
        let _ = write!(out, "singleton({})", real(drv.values()[0]));
        return;
    }
    let _ = write!(out, "pmf(");
    for (i, (v, p)) in drv.iter().enumerate() {
        if i > 0 {
            let _ = write!(out, ", ");
        }
        let _ = write!(out, "{}: {}", real(v), real(p));
    }
    let _ = write!(out, ")");
}

/// Renders a model back into the text format so that parsing the result
/// reconstructs the model exactly.
pub fn render_model(model: &FcmModel) -> String {
    let mut out = String::new();
    out.push_str("[concepts]\n");
    for name in model.concepts() {
        out.push_str(name);
        out.push('\n');
    }

    out.push_str("\n[edges]\n");
    let n = model.concept_count();
    for target in 0..n {
        for source in 0..n {
            let w = model.weight(target, source);
            if w.is_singleton_at(0.0) {
                continue;
            }
            let _ = write!(out, "{} ", model.concepts()[source]);
            let token = LINGUISTIC
                .iter()
                .find(|&&(_, v)| w.is_singleton_at(v))
                .map(|&(tok, _)| tok.to_string());
            match token {
                Some(tok) => out.push_str(&tok),
                None if w.is_singleton() => out.push_str(&real(w.values()[0])),
                None => render_distribution(w, &mut out),
            }
            let _ = writeln!(out, " {}", model.concepts()[target]);
        }
    }

    out.push_str("\n[init]\n");
    for (index, drv) in model.initial_state().iter().enumerate() {
        if drv.is_singleton_at(0.0) {
            continue;
        }
        let _ = write!(out, "{} = ", model.concepts()[index]);
        render_distribution(drv, &mut out);
        out.push('\n');
    }

    out.push_str("\n[clamps]\n");
    for (index, drv) in model.clamps() {
        out.push_str(&model.concepts()[*index]);
        if drv != &model.initial_state()[*index] {
            out.push_str(" = ");
            render_distribution(drv, &mut out);
        }
        out.push('\n');
    }
    out
}
