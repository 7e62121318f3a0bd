use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::chart::Chart;
use super::expr::{Expr, C64};
use super::tape::{EvalError, Tape};

/// Randomized identity checker settings.
///
/// The point sequence of every check is derived from `(seed, check name)`,
/// so two checks never share RNG state and a replay with the same seed is
/// bit-identical.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampler {
    pub seed: u64,
    pub n_samples: usize,
    pub tol: f64,
    pub resample_limit: usize,
}

impl Default for Sampler {
    fn default() -> Self {
        Sampler { seed: 0, n_samples: 64, tol: 1e-9, resample_limit: 100 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("resample limit exhausted after {0} singular points")]
    TooManySingularPoints(usize),
    #[error("evaluation failed: {0}")]
    Eval(EvalError),
}

/// Outcome of comparing expression pairs at sampled points.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EquivReport {
    pub pass: bool,
    /// Largest `|a − b| / (1 + max(|a|, |b|))` seen.
    pub max_residual: f64,
    /// Largest `|a − b|` seen.
    pub max_abs: f64,
    pub points: usize,
    pub resamples: usize,
}

impl EquivReport {
    /// A report for a comparison with nothing to compare.
    pub fn vacuous() -> Self {
        EquivReport { pass: true, max_residual: 0.0, max_abs: 0.0, points: 0, resamples: 0 }
    }

    /// Combine two reports (both must pass for the merge to pass).
    pub fn merge(self, other: EquivReport) -> EquivReport {
        EquivReport {
            pass: self.pass && other.pass,
            max_residual: self.max_residual.max(other.max_residual),
            max_abs: self.max_abs.max(other.max_abs),
            points: self.points.max(other.points),
            resamples: self.resamples + other.resamples,
        }
    }
}

/// A labelled [`EquivReport`].
#[derive(Clone, Debug, PartialEq)]
pub struct NamedCheck {
    pub name: alloc::string::String,
    pub report: EquivReport,
}

impl NamedCheck {
    pub fn new(name: &str, report: EquivReport) -> Self {
        NamedCheck { name: name.into(), report }
    }
}

fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic stream of uniform points in a chart's box.
pub struct PointStream<'a> {
    rng: ChaCha8Rng,
    chart: &'a Chart,
}

impl PointStream<'_> {
    pub fn next_point(&mut self) -> Vec<f64> {
        self.chart.bounds().iter().map(|&(lo, hi)| self.rng.gen_range(lo..=hi)).collect()
    }

    /// Access to the underlying generator, for auxiliary random data.
    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

fn scaled(a: C64, b: C64) -> (f64, f64) {
    let abs = (a - b).norm();
    let scale = 1.0 + a.norm().max(b.norm());
    let r = abs / scale;
    // non-finite values never pass
    if r.is_nan() {
        (f64::INFINITY, f64::INFINITY)
    } else {
        (r, abs)
    }
}

impl Sampler {
    pub fn with_seed(seed: u64) -> Self {
        Sampler { seed, ..Sampler::default() }
    }

    pub fn stream<'a>(&self, chart: &'a Chart, name: &str) -> PointStream<'a> {
        let seed = splitmix(self.seed ^ splitmix(fnv1a(name)));
        PointStream { rng: ChaCha8Rng::seed_from_u64(seed), chart }
    }

    /// Evaluate `exprs` at `n_samples` non-singular points of the named
    /// stream, calling `visit(point, values)` for each.
    pub fn for_each_point<F>(&self, chart: &Chart, name: &str, exprs: &[Expr], mut visit: F) -> Result<usize, SampleError>
    where
        F: FnMut(&[f64], &[C64]),
    {
        let tape = Tape::compile(chart.dim(), exprs);
        let mut stream = self.stream(chart, name);
        let mut scratch = Vec::new();
        let mut values = Vec::new();
        let mut resamples = 0;
        let mut done = 0;
        while done < self.n_samples {
            let p = stream.next_point();
            match tape.eval_into(&p, chart.guard_eps(), &mut scratch, &mut values) {
                Ok(()) => {
                    visit(&p, &values);
                    done += 1;
                }
                Err(EvalError::DivisionNearZero) | Err(EvalError::LnOfZero) => {
                    resamples += 1;
                    if resamples > self.resample_limit {
                        return Err(SampleError::TooManySingularPoints(resamples));
                    }
                }
                Err(e) => return Err(SampleError::Eval(e)),
            }
        }
        Ok(resamples)
    }

    /// Compare each `(lhs, rhs)` pair at shared sample points.
    pub fn check_pairs(&self, chart: &Chart, name: &str, pairs: &[(Expr, Expr)]) -> Result<EquivReport, SampleError> {
        if pairs.is_empty() {
            return Ok(EquivReport::vacuous());
        }
        let exprs: Vec<Expr> = pairs.iter().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        let mut max_residual: f64 = 0.0;
        let mut max_abs: f64 = 0.0;
        let resamples = self.for_each_point(chart, name, &exprs, |_, vals| {
            for pair in vals.chunks_exact(2) {
                let (r, a) = scaled(pair[0], pair[1]);
                max_residual = max_residual.max(r);
                max_abs = max_abs.max(a);
            }
        })?;
        Ok(EquivReport {
            pass: max_residual <= self.tol,
            max_residual,
            max_abs,
            points: self.n_samples,
            resamples,
        })
    }

    /// Check that every expression vanishes identically.
    pub fn check_zero(&self, chart: &Chart, name: &str, exprs: &[Expr]) -> Result<EquivReport, SampleError> {
        let pairs: Vec<(Expr, Expr)> = exprs.iter().map(|e| (e.clone(), Expr::zero())).collect();
        self.check_pairs(chart, name, &pairs)
    }

    /// Randomized equivalence of two expressions.
    pub fn equiv(&self, chart: &Chart, a: &Expr, b: &Expr) -> Result<EquivReport, SampleError> {
        self.check_pairs(chart, "equiv", &[(a.clone(), b.clone())])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_name_dependent() {
        let chart = Chart::standard(3);
        let s = Sampler::with_seed(7);
        let a: Vec<_> = (0..4).map({
            let mut st = s.stream(&chart, "alpha");
            move |_| st.next_point()
        }).collect();
        let b: Vec<_> = (0..4).map({
            let mut st = s.stream(&chart, "alpha");
            move |_| st.next_point()
        }).collect();
        let c = s.stream(&chart, "beta").next_point();
        assert_eq!(a, b);
        assert_ne!(a[0], c);
        assert!(a.iter().flatten().all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn singular_points_are_resampled_then_rejected() {
        let chart = Chart::standard(1).with_guard(0.5).unwrap();
        let x = Expr::coord(0);
        // |x| < 0.5 on half the box: resampling handles it
        let r = Sampler::default().equiv(&chart, &(Expr::one() / x.clone()), &x.powi(-1)).unwrap();
        assert!(r.pass);
        assert!(r.resamples > 0);
        // always singular
        let bad = Expr::one() / (x.clone() * Expr::real(1e-9));
        assert!(matches!(
            Sampler::default().equiv(&chart, &bad, &Expr::zero()),
            Err(SampleError::TooManySingularPoints(_))
        ));
    }
}
