//! The manifest text format.
//!
//! ```text
//! # comment
//! [chart]
//! coords = x1, x2, x3, x4, x5
//! box = -1, 1
//! box.x5 = 0, 2
//! pairs = (x1, x2), (x3, x4)
//!
//! [scalars]
//! f = x3^2 + x5
//!
//! [Lambda]
//! (1, 2) = exp(f)
//! (x3, x4) = exp(g)
//!
//! [generator dz1]
//! (1) = 1
//! (2) = i
//! ```
//!
//! Component indices are 1-based or coordinate names and must be strictly
//! ascending. Field sections: `Lambda` (2-vector), `phi` (3-form), `theta`,
//! `vartheta`, `omega` (1-forms), `Z` (1-vector), `eta` (2-form) and any
//! number of `generator <name>` 1-forms. Named lists: `scalars`,
//! `sections`, `probe_sections`, `observables`, `non_observables`,
//! `witnesses`. Keyed blocks: `chart`, `quadrature`, `derivative`,
//! `hermiticity`.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use atwist_core::symexpr::{parse_with, Chart, Expr, ParseErrorKind, ParseFailure};
use atwist_core::tensorcalc::{GradedField, Variance};
use atwist_core::{Form, MultiVector};

const MAX_SCALAR_NESTING: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ManifestErrorKind {
    #[error("syntax error: {0}")]
    SyntaxError(String),
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("bad component tuple: {0}")]
    DuplicateComponent(String),
    #[error("index out of range for dimension {dim}")]
    IndexOutOfRange { dim: usize },
    #[error("cyclic scalar definition {}", .0.join(" -> "))]
    CyclicScalarDefinition(Vec<String>),
}

/// A parse failure with its 1-based location and the offending token.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {kind} (at `{token}`)")]
pub struct ManifestError {
    pub kind: ManifestErrorKind,
    pub line: usize,
    pub column: usize,
    pub token: String,
}

impl ManifestError {
    fn new(kind: ManifestErrorKind, line: usize, column: usize, token: &str) -> Self {
        ManifestError { kind, line, column, token: token.to_string() }
    }

    fn syntax(msg: &str, line: usize, column: usize, token: &str) -> Self {
        Self::new(ManifestErrorKind::SyntaxError(msg.to_string()), line, column, token)
    }
}

/// An expression together with the text it was read from.
#[derive(Clone, Debug, PartialEq)]
pub struct Source {
    pub text: String,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Named {
    pub name: String,
    pub value: Source,
}

/// One component line of a field block; `indices` are 0-based.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub indices: Vec<usize>,
    pub value: Source,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldBlock<V: Variance> {
    pub components: Vec<Component>,
    pub field: GradedField<V>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub name: String,
    pub block: FieldBlock<Form>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DerivativeKind {
    /// `ω = 0`, `Z = 0`.
    #[default]
    Flat,
    /// Built from `Z` and the potential `vartheta`.
    Certificate,
    /// `omega` and `Z` as given (either may be absent).
    Explicit,
}

impl DerivativeKind {
    fn keyword(self) -> &'static str {
        match self {
            DerivativeKind::Flat => "flat",
            DerivativeKind::Certificate => "certificate",
            DerivativeKind::Explicit => "explicit",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Hermiticity {
    pub observable: Source,
    pub u1: Source,
    pub u2: Source,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub chart: Chart,
    pub scalars: Vec<Named>,
    pub lambda: Option<FieldBlock<MultiVector>>,
    pub phi: Option<FieldBlock<Form>>,
    pub theta: Option<FieldBlock<Form>>,
    pub z: Option<FieldBlock<MultiVector>>,
    pub eta: Option<FieldBlock<Form>>,
    pub vartheta: Option<FieldBlock<Form>>,
    pub omega: Option<FieldBlock<Form>>,
    pub generators: Vec<Generator>,
    pub sections: Vec<Named>,
    pub probe_sections: Vec<Named>,
    pub observables: Vec<Named>,
    pub non_observables: Vec<Named>,
    pub witnesses: Vec<Named>,
    pub grid: Option<usize>,
    pub derivative: Option<DerivativeKind>,
    pub hermiticity: Option<Hermiticity>,
}

impl Manifest {
    pub fn derivative_kind(&self) -> DerivativeKind {
        self.derivative.unwrap_or_default()
    }

    /// Canonical text; parsing it gives back an equal manifest.
    pub fn to_text(&self) -> String {
        self.to_string()
    }
}

struct Entry {
    line: usize,
    key: String,
    key_col: usize,
    value: String,
    value_col: usize,
}

struct Section {
    name: String,
    arg: Option<String>,
    line: usize,
    col: usize,
    entries: Vec<Entry>,
}

fn col_of(line: &str, byte: usize) -> usize {
    line[..byte].chars().count() + 1
}

fn split_sections(text: &str) -> Result<Vec<Section>, ManifestError> {
    let mut out: Vec<Section> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let body = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let start = body.len() - body.trim_start().len();
        let col = col_of(raw, start);
        if trimmed.starts_with('[') {
            let Some(inner) = trimmed.strip_prefix('[').and_then(|t| t.strip_suffix(']')) else {
                return Err(ManifestError::syntax("unterminated section header", line_no, col, trimmed));
            };
            let mut words = inner.split_whitespace();
            let Some(name) = words.next() else {
                return Err(ManifestError::syntax("empty section header", line_no, col, trimmed));
            };
            let arg = words.next().map(str::to_string);
            if words.next().is_some() {
                return Err(ManifestError::syntax("too many words in section header", line_no, col, trimmed));
            }
            out.push(Section { name: name.to_string(), arg, line: line_no, col, entries: Vec::new() });
            continue;
        }
        let Some(eq) = body.find('=') else {
            return Err(ManifestError::syntax("expected `key = value`", line_no, col, trimmed));
        };
        let key = body[..eq].trim();
        let rest = &body[eq + 1..];
        let value = rest.trim();
        if key.is_empty() || value.is_empty() {
            return Err(ManifestError::syntax("expected `key = value`", line_no, col, trimmed));
        }
        let vstart = eq + 1 + (rest.len() - rest.trim_start().len());
        let Some(section) = out.last_mut() else {
            return Err(ManifestError::syntax("entry before any section", line_no, col, key));
        };
        section.entries.push(Entry {
            line: line_no,
            key: key.to_string(),
            key_col: col,
            value: value.to_string(),
            value_col: col_of(raw, vstart),
        });
    }
    Ok(out)
}

fn parse_number(e: &Entry, text: &str) -> Result<f64, ManifestError> {
    match text.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(ManifestError::syntax("expected a finite number", e.line, e.value_col, text.trim())),
    }
}

fn parse_interval(e: &Entry) -> Result<(f64, f64), ManifestError> {
    let parts: Vec<&str> = e.value.split(',').collect();
    if parts.len() != 2 {
        return Err(ManifestError::syntax("expected `lo, hi`", e.line, e.value_col, &e.value));
    }
    Ok((parse_number(e, parts[0])?, parse_number(e, parts[1])?))
}

fn coordinate(chart_names: &[String], name: &str, e: &Entry) -> Result<usize, ManifestError> {
    chart_names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| ManifestError::new(ManifestErrorKind::UnknownIdentifier(name.to_string()), e.line, e.value_col, name))
}

fn parse_chart(s: &Section) -> Result<Chart, ManifestError> {
    let mut names: Option<Vec<String>> = None;
    let mut uniform: Option<(f64, f64, &Entry)> = None;
    let mut boxes: Vec<(&Entry, &str, (f64, f64))> = Vec::new();
    let mut pairs: Option<&Entry> = None;
    let mut guard: Option<(f64, &Entry)> = None;
    let mut seen: Vec<&str> = Vec::new();
    for e in &s.entries {
        if seen.contains(&e.key.as_str()) {
            return Err(ManifestError::syntax("key given twice", e.line, e.key_col, &e.key));
        }
        seen.push(&e.key);
        match e.key.as_str() {
            "coords" => {
                names = Some(e.value.split(',').map(|n| n.trim().to_string()).collect());
            }
            "dim" => {
                let n: usize = e
                    .value
                    .parse()
                    .ok()
                    .filter(|&n| (1..=atwist_core::tensorcalc::MAX_DIM).contains(&n))
                    .ok_or_else(|| ManifestError::syntax("expected a dimension", e.line, e.value_col, &e.value))?;
                names = Some((1..=n).map(|i| format!("x{i}")).collect());
            }
            "box" => {
                let (lo, hi) = parse_interval(e)?;
                uniform = Some((lo, hi, e));
            }
            "pairs" => pairs = Some(e),
            "guard" => guard = Some((parse_number(e, &e.value)?, e)),
            k if k.starts_with("box.") => boxes.push((e, &k[4..], parse_interval(e)?)),
            _ => return Err(ManifestError::syntax("unknown chart key", e.line, e.key_col, &e.key)),
        }
    }
    if seen.contains(&"coords") && seen.contains(&"dim") {
        return Err(ManifestError::syntax("give either `coords` or `dim`", s.line, s.col, "chart"));
    }
    let Some(names) = names else {
        return Err(ManifestError::syntax("chart needs `coords` or `dim`", s.line, s.col, "chart"));
    };
    if names.len() > atwist_core::tensorcalc::MAX_DIM {
        return Err(ManifestError::syntax("too many coordinates", s.line, s.col, "coords"));
    }
    let chart_err = |e: &Entry, err: atwist_core::symexpr::ChartError| {
        ManifestError::syntax(&err.to_string(), e.line, e.value_col, &e.value)
    };
    let coords_entry = s.entries.iter().find(|e| e.key == "coords" || e.key == "dim").expect("present");
    let mut chart = Chart::new(&names).map_err(|err| chart_err(coords_entry, err))?;
    if let Some((lo, hi, e)) = uniform {
        chart = chart.with_uniform_box(lo, hi).map_err(|err| chart_err(e, err))?;
    }
    for (e, name, (lo, hi)) in boxes {
        let axis = chart
            .index_of(name)
            .ok_or_else(|| ManifestError::new(ManifestErrorKind::UnknownIdentifier(name.to_string()), e.line, e.key_col, name))?;
        chart = chart.with_bounds(axis, lo, hi).map_err(|err| chart_err(e, err))?;
    }
    if let Some(e) = pairs {
        for (re, im) in parse_pairs(chart.names(), e)? {
            chart = chart.with_pair(re, im).map_err(|err| chart_err(e, err))?;
        }
    }
    if let Some((eps, e)) = guard {
        chart = chart.with_guard(eps).map_err(|err| chart_err(e, err))?;
    }
    Ok(chart)
}

fn parse_pairs(names: &[String], e: &Entry) -> Result<Vec<(usize, usize)>, ManifestError> {
    let bad = || ManifestError::syntax("expected `(re, im), ...`", e.line, e.value_col, &e.value);
    let mut out = Vec::new();
    let mut rest = e.value.trim();
    loop {
        let inner_end = rest.find(')').ok_or_else(bad)?;
        let inner = rest[..inner_end].trim().strip_prefix('(').ok_or_else(bad)?;
        let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(bad());
        }
        out.push((coordinate(names, parts[0], e)?, coordinate(names, parts[1], e)?));
        rest = rest[inner_end + 1..].trim();
        if rest.is_empty() {
            return Ok(out);
        }
        rest = rest.strip_prefix(',').ok_or_else(bad)?.trim();
    }
}

fn expr_at(
    text: &str,
    line: usize,
    col: usize,
    chart: &Chart,
    resolve: &mut dyn FnMut(&str, usize) -> Result<Option<Expr>, ManifestError>,
) -> Result<Expr, ManifestError> {
    let mut r = |id: &str, pos: usize| resolve(id, pos);
    parse_with(text, chart, &mut r).map_err(|f| match f {
        ParseFailure::Resolve(e) => e,
        ParseFailure::Parse(p) => {
            let c = col + text.get(..p.pos).map_or(p.pos, |s| s.chars().count());
            let kind = match p.kind {
                ParseErrorKind::Syntax(m) => ManifestErrorKind::SyntaxError(m),
                ParseErrorKind::UnknownIdentifier(n) => ManifestErrorKind::UnknownIdentifier(n),
            };
            ManifestError { kind, line, column: c, token: p.token }
        }
    })
}

struct Scalars<'a> {
    chart: &'a Chart,
    raw: BTreeMap<&'a str, &'a Entry>,
    done: BTreeMap<String, Expr>,
}

impl Scalars<'_> {
    fn resolve(&mut self, name: &str, stack: &mut Vec<String>) -> Result<Expr, ManifestError> {
        if let Some(e) = self.done.get(name) {
            return Ok(e.clone());
        }
        let entry = self.raw[name];
        if stack.len() >= MAX_SCALAR_NESTING {
            return Err(ManifestError::syntax("scalar definitions nested too deeply", entry.line, entry.key_col, name));
        }
        stack.push(name.to_string());
        let chart = self.chart;
        let e = expr_at(&entry.value, entry.line, entry.value_col, chart, &mut |id, pos| {
            if !self.raw.contains_key(id) {
                return Ok(None);
            }
            if let Some(start) = stack.iter().position(|s| s == id) {
                let mut cycle = stack[start..].to_vec();
                cycle.push(id.to_string());
                let c = entry.value_col + entry.value[..pos].chars().count();
                return Err(ManifestError::new(ManifestErrorKind::CyclicScalarDefinition(cycle), entry.line, c, id));
            }
            self.resolve(id, stack).map(Some)
        })?;
        stack.pop();
        self.done.insert(name.to_string(), e.clone());
        Ok(e)
    }

    fn lookup(&self) -> impl FnMut(&str, usize) -> Result<Option<Expr>, ManifestError> + '_ {
        |id, _| Ok(self.done.get(id).cloned())
    }
}

fn source(e: &Entry, chart: &Chart, scalars: &Scalars) -> Result<Source, ManifestError> {
    let expr = expr_at(&e.value, e.line, e.value_col, chart, &mut scalars.lookup())?;
    Ok(Source { text: e.value.clone(), expr })
}

fn is_name(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_') && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

fn named_list(s: &Section, chart: &Chart, scalars: &Scalars) -> Result<Vec<Named>, ManifestError> {
    let mut out: Vec<Named> = Vec::new();
    for e in &s.entries {
        if !is_name(&e.key) {
            return Err(ManifestError::syntax("expected a name", e.line, e.key_col, &e.key));
        }
        if out.iter().any(|n| n.name == e.key) {
            return Err(ManifestError::syntax("name defined twice", e.line, e.key_col, &e.key));
        }
        out.push(Named { name: e.key.clone(), value: source(e, chart, scalars)? });
    }
    Ok(out)
}

fn parse_tuple(e: &Entry, chart: &Chart, grade: usize) -> Result<Vec<usize>, ManifestError> {
    let key = e.key.as_str();
    let Some(inner) = key.strip_prefix('(').and_then(|k| k.strip_suffix(')')) else {
        return Err(ManifestError::syntax("expected a component tuple `(i, j, ...)`", e.line, e.key_col, key));
    };
    let dim = chart.dim();
    let mut idx = Vec::new();
    for item in inner.split(',').map(str::trim) {
        if item.is_empty() {
            return Err(ManifestError::syntax("empty index", e.line, e.key_col, key));
        }
        let k = if item.bytes().all(|b| b.is_ascii_digit()) {
            match item.parse::<usize>() {
                Ok(n) if (1..=dim).contains(&n) => n - 1,
                _ => return Err(ManifestError::new(ManifestErrorKind::IndexOutOfRange { dim }, e.line, e.key_col, item)),
            }
        } else {
            chart.index_of(item).ok_or_else(|| {
                ManifestError::new(ManifestErrorKind::UnknownIdentifier(item.to_string()), e.line, e.key_col, item)
            })?
        };
        idx.push(k);
    }
    if idx.len() != grade {
        return Err(ManifestError::syntax(&format!("expected {grade} indices"), e.line, e.key_col, key));
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        let msg = "indices must be strictly ascending".to_string();
        return Err(ManifestError::new(ManifestErrorKind::DuplicateComponent(msg), e.line, e.key_col, key));
    }
    Ok(idx)
}

fn field_block<V: Variance>(s: &Section, grade: usize, chart: &Chart, scalars: &Scalars) -> Result<FieldBlock<V>, ManifestError> {
    let mut components: Vec<Component> = Vec::new();
    let mut field = GradedField::zero(chart.dim(), grade);
    for e in &s.entries {
        let indices = parse_tuple(e, chart, grade)?;
        if components.iter().any(|c| c.indices == indices) {
            let msg = "component given twice".to_string();
            return Err(ManifestError::new(ManifestErrorKind::DuplicateComponent(msg), e.line, e.key_col, &e.key));
        }
        let value = source(e, chart, scalars)?;
        field.add_component(&indices, value.expr.clone()).expect("checked tuple");
        components.push(Component { indices, value });
    }
    Ok(FieldBlock { components, field })
}

fn keyed<'a>(s: &'a Section, allowed: &[&str]) -> Result<BTreeMap<&'a str, &'a Entry>, ManifestError> {
    let mut out = BTreeMap::new();
    for e in &s.entries {
        if !allowed.contains(&e.key.as_str()) {
            return Err(ManifestError::syntax(&format!("unknown key in [{}]", s.name), e.line, e.key_col, &e.key));
        }
        if out.insert(e.key.as_str(), e).is_some() {
            return Err(ManifestError::syntax("key given twice", e.line, e.key_col, &e.key));
        }
    }
    Ok(out)
}

const FIELD_SECTIONS: [&str; 7] = ["Lambda", "phi", "theta", "Z", "eta", "vartheta", "omega"];
const LIST_SECTIONS: [&str; 6] = ["scalars", "sections", "probe_sections", "observables", "non_observables", "witnesses"];
const KEYED_SECTIONS: [&str; 4] = ["chart", "quadrature", "derivative", "hermiticity"];

pub fn parse_manifest(text: &str) -> Result<Manifest, ManifestError> {
    let sections = split_sections(text)?;
    let mut seen: Vec<(String, Option<String>)> = Vec::new();
    for s in &sections {
        let known = s.name == "generator" || FIELD_SECTIONS.contains(&s.name.as_str())
            || LIST_SECTIONS.contains(&s.name.as_str())
            || KEYED_SECTIONS.contains(&s.name.as_str());
        if !known {
            return Err(ManifestError::syntax("unknown section", s.line, s.col, &s.name));
        }
        match (&s.arg, s.name == "generator") {
            (None, true) => return Err(ManifestError::syntax("generator needs a name", s.line, s.col, &s.name)),
            (Some(a), false) => return Err(ManifestError::syntax("unexpected section argument", s.line, s.col, a)),
            (Some(a), true) if !is_name(a) => return Err(ManifestError::syntax("expected a name", s.line, s.col, a)),
            _ => {}
        }
        let id = (s.name.clone(), s.arg.clone());
        if seen.contains(&id) {
            return Err(ManifestError::syntax("section declared twice", s.line, s.col, &s.name));
        }
        seen.push(id);
    }
    let find = |name: &str| sections.iter().find(|s| s.name == name);

    let Some(chart_section) = find("chart") else {
        return Err(ManifestError::syntax("missing [chart] section", 1, 1, ""));
    };
    let chart = parse_chart(chart_section)?;

    let mut scalars = Scalars { chart: &chart, raw: BTreeMap::new(), done: BTreeMap::new() };
    let mut scalar_order: Vec<&Entry> = Vec::new();
    if let Some(s) = find("scalars") {
        for e in &s.entries {
            if !is_name(&e.key) {
                return Err(ManifestError::syntax("expected a name", e.line, e.key_col, &e.key));
            }
            if chart.index_of(&e.key).is_some() {
                return Err(ManifestError::syntax("scalar shadows a coordinate", e.line, e.key_col, &e.key));
            }
            if scalars.raw.insert(e.key.as_str(), e).is_some() {
                return Err(ManifestError::syntax("name defined twice", e.line, e.key_col, &e.key));
            }
            scalar_order.push(e);
        }
    }
    for e in &scalar_order {
        scalars.resolve(&e.key, &mut Vec::new())?;
    }
    let scalar_list = scalar_order
        .iter()
        .map(|e| Named { name: e.key.clone(), value: Source { text: e.value.clone(), expr: scalars.done[&e.key].clone() } })
        .collect();

    let form = |name: &str, grade: usize| -> Result<Option<FieldBlock<Form>>, ManifestError> {
        find(name).map(|s| field_block(s, grade, &chart, &scalars)).transpose()
    };
    let vector = |name: &str, grade: usize| -> Result<Option<FieldBlock<MultiVector>>, ManifestError> {
        find(name).map(|s| field_block(s, grade, &chart, &scalars)).transpose()
    };
    let list = |name: &str| -> Result<Vec<Named>, ManifestError> {
        Ok(match find(name) {
            Some(s) => named_list(s, &chart, &scalars)?,
            None => Vec::new(),
        })
    };

    let mut generators = Vec::new();
    for s in sections.iter().filter(|s| s.name == "generator") {
        let name = s.arg.clone().expect("checked above");
        generators.push(Generator { name, block: field_block(s, 1, &chart, &scalars)? });
    }

    let mut grid = None;
    if let Some(s) = find("quadrature") {
        let k = keyed(s, &["grid"])?;
        if let Some(e) = k.get("grid") {
            let n = e.value.parse::<usize>().ok().filter(|&n| n > 0);
            grid = Some(n.ok_or_else(|| ManifestError::syntax("expected a positive integer", e.line, e.value_col, &e.value))?);
        }
    }

    let mut derivative = None;
    if let Some(s) = find("derivative") {
        let k = keyed(s, &["kind"])?;
        if let Some(e) = k.get("kind") {
            derivative = Some(match e.value.as_str() {
                "flat" => DerivativeKind::Flat,
                "certificate" => DerivativeKind::Certificate,
                "explicit" => DerivativeKind::Explicit,
                other => return Err(ManifestError::syntax("expected flat, certificate or explicit", e.line, e.value_col, other)),
            });
        }
    }

    let mut hermiticity = None;
    if let Some(s) = find("hermiticity") {
        let k = keyed(s, &["observable", "u1", "u2"])?;
        let get = |key: &str| -> Result<Source, ManifestError> {
            let e = k.get(key).ok_or_else(|| ManifestError::syntax(&format!("missing key `{key}`"), s.line, s.col, &s.name))?;
            source(e, &chart, &scalars)
        };
        hermiticity = Some(Hermiticity { observable: get("observable")?, u1: get("u1")?, u2: get("u2")? });
    }

    Ok(Manifest {
        lambda: vector("Lambda", 2)?,
        phi: form("phi", 3)?,
        theta: form("theta", 1)?,
        z: vector("Z", 1)?,
        eta: form("eta", 2)?,
        vartheta: form("vartheta", 1)?,
        omega: form("omega", 1)?,
        generators,
        sections: list("sections")?,
        probe_sections: list("probe_sections")?,
        observables: list("observables")?,
        non_observables: list("non_observables")?,
        witnesses: list("witnesses")?,
        grid,
        derivative,
        hermiticity,
        scalars: scalar_list,
        chart,
    })
}

fn write_block<V: Variance>(out: &mut String, header: &str, b: &FieldBlock<V>) {
    let _ = writeln!(out, "\n[{header}]");
    for c in &b.components {
        let idx: Vec<String> = c.indices.iter().map(|i| (i + 1).to_string()).collect();
        let _ = writeln!(out, "({}) = {}", idx.join(", "), c.value.text);
    }
}

fn write_list(out: &mut String, header: &str, items: &[Named]) {
    if items.is_empty() {
        return;
    }
    let _ = writeln!(out, "\n[{header}]");
    for n in items {
        let _ = writeln!(out, "{} = {}", n.name, n.value.text);
    }
}

impl fmt::Display for Manifest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.chart;
        let mut out = String::new();
        let _ = writeln!(out, "[chart]\ncoords = {}", c.names().join(", "));
        for (name, (lo, hi)) in c.names().iter().zip(c.bounds()) {
            let _ = writeln!(out, "box.{name} = {lo:?}, {hi:?}");
        }
        if !c.pairs().is_empty() {
            let p: Vec<String> = c.pairs().iter().map(|&(a, b)| format!("({}, {})", c.name(a), c.name(b))).collect();
            let _ = writeln!(out, "pairs = {}", p.join(", "));
        }
        let _ = writeln!(out, "guard = {:?}", c.guard_eps());
        write_list(&mut out, "scalars", &self.scalars);
        if let Some(b) = &self.lambda {
            write_block(&mut out, "Lambda", b);
        }
        let forms = [("phi", &self.phi), ("theta", &self.theta), ("eta", &self.eta), ("vartheta", &self.vartheta), ("omega", &self.omega)];
        for (name, b) in forms {
            if let Some(b) = b {
                write_block(&mut out, name, b);
            }
        }
        if let Some(b) = &self.z {
            write_block(&mut out, "Z", b);
        }
        for g in &self.generators {
            write_block(&mut out, &format!("generator {}", g.name), &g.block);
        }
        write_list(&mut out, "sections", &self.sections);
        write_list(&mut out, "probe_sections", &self.probe_sections);
        write_list(&mut out, "observables", &self.observables);
        write_list(&mut out, "non_observables", &self.non_observables);
        write_list(&mut out, "witnesses", &self.witnesses);
        if let Some(g) = self.grid {
            let _ = writeln!(out, "\n[quadrature]\ngrid = {g}");
        }
        if let Some(k) = self.derivative {
            let _ = writeln!(out, "\n[derivative]\nkind = {}", k.keyword());
        }
        if let Some(h) = &self.hermiticity {
            let _ = writeln!(out, "\n[hermiticity]\nobservable = {}\nu1 = {}\nu2 = {}", h.observable.text, h.u1.text, h.u2.text);
        }
        f.write_str(&out)
    }
}
