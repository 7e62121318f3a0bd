use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

/// A single coordinate chart: coordinate names, a sampling box and an
/// optional pairing of coordinates into complex coordinates
/// `z = x_a + i x_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Chart {
    names: Vec<String>,
    bounds: Vec<(f64, f64)>,
    pairs: Vec<(usize, usize)>,
    guard_eps: f64,
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ChartError {
    #[error("a chart needs at least one coordinate")]
    Empty,
    #[error("invalid coordinate name `{0}`")]
    BadName(String),
    #[error("coordinate `{0}` declared twice")]
    DuplicateName(String),
    #[error("coordinate index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("coordinate {0} used in more than one complex pair")]
    PairOverlap(usize),
    #[error("invalid interval [{0}, {1}]")]
    BadInterval(f64, f64),
    #[error("guard epsilon must be positive")]
    BadGuard,
}

pub(crate) fn is_reserved(name: &str) -> bool {
    matches!(name, "i" | "exp" | "ln" | "sin" | "cos" | "conj")
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Chart {
    /// A chart with the given coordinate names, box `[-1, 1]` on every axis
    /// and no complex pairs.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Self, ChartError> {
        if names.is_empty() {
            return Err(ChartError::Empty);
        }
        let mut out: Vec<String> = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            if !valid_identifier(n) || is_reserved(n) {
                return Err(ChartError::BadName(n.to_string()));
            }
            if out.iter().any(|m| m == n) {
                return Err(ChartError::DuplicateName(n.to_string()));
            }
            out.push(n.to_string());
        }
        let dim = out.len();
        Ok(Chart {
            names: out,
            bounds: vec![(-1.0, 1.0); dim],
            pairs: Vec::new(),
            guard_eps: 1e-12,
        })
    }

    /// Coordinates `x1, ..., x{dim}`.
    pub fn standard(dim: usize) -> Self {
        let names: Vec<String> = (1..=dim).map(|i| alloc::format!("x{i}")).collect();
        Chart::new(&names).expect("standard names are valid")
    }

    pub fn with_bounds(mut self, axis: usize, lo: f64, hi: f64) -> Result<Self, ChartError> {
        if axis >= self.dim() {
            return Err(ChartError::IndexOutOfRange(axis));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ChartError::BadInterval(lo, hi));
        }
        self.bounds[axis] = (lo, hi);
        Ok(self)
    }

    pub fn with_uniform_box(mut self, lo: f64, hi: f64) -> Result<Self, ChartError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(ChartError::BadInterval(lo, hi));
        }
        for b in &mut self.bounds {
            *b = (lo, hi);
        }
        Ok(self)
    }

    /// Declare `z = x_re + i x_im`. Indices are zero-based.
    pub fn with_pair(mut self, re: usize, im: usize) -> Result<Self, ChartError> {
        for idx in [re, im] {
            if idx >= self.dim() {
                return Err(ChartError::IndexOutOfRange(idx));
            }
            if self.pairs.iter().any(|&(a, b)| a == idx || b == idx) {
                return Err(ChartError::PairOverlap(idx));
            }
        }
        if re == im {
            return Err(ChartError::PairOverlap(re));
        }
        self.pairs.push((re, im));
        Ok(self)
    }

    pub fn with_guard(mut self, eps: f64) -> Result<Self, ChartError> {
        if !(eps > 0.0) {
            return Err(ChartError::BadGuard);
        }
        self.guard_eps = eps;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn pair(&self, k: usize) -> Option<(usize, usize)> {
        self.pairs.get(k).copied()
    }

    pub fn guard_eps(&self) -> f64 {
        self.guard_eps
    }

    /// Product of the box side lengths.
    pub fn box_volume(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| b - a).product()
    }
}
