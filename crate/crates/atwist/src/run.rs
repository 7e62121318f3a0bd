//! Subcommand dispatch: turns a manifest into a list of check reports.

use std::time::Instant;

use atwist_core::polarize::{
    anti_hermitian_defect, extended_hat, h0_residuals, in_p, in_q, isotropy_check, lie_closure, Membership, Polarization,
    QuadratureGrid,
};
use atwist_core::prequantum::{
    build_derivative, check_certificate, curvature_law_pairs, ContravariantD, PrequantCertificate,
};
use atwist_core::random::{PolySpec, RandomData};
use atwist_core::symexpr::{EquivReport, Expr, Sampler};
use atwist_core::tensorcalc::{FormField, MultiVectorField};
use atwist_core::AtpStructure;

use crate::manifest::{DerivativeKind, Manifest};
use crate::report::{CheckReport, Residual, Status};

/// Random objects drawn per randomized check.
pub const RANDOM_DRAWS: usize = 4;
pub const DEFAULT_GRID: usize = 17;
/// Relative bound for the anti-Hermiticity defect.
pub const ANTI_HERMITIAN_TOL: f64 = 1e-2;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subcommand {
    Validate,
    Prequant,
    Polarize,
    Hilbert,
    Report,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Options {
    pub samples: usize,
    pub tol: f64,
    pub seed: u64,
    pub grid: Option<usize>,
    pub timing: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { samples: 64, tol: 1e-9, seed: 0, grid: None, timing: true }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("manifest has no [{0}] block")]
    MissingBlock(&'static str),
    #[error("{0}")]
    Input(String),
}

/// Reports in declaration order, plus diagnostics for checks that could
/// not be evaluated (those are reported as failures).
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    pub reports: Vec<CheckReport>,
    pub notes: Vec<String>,
}

impl RunOutput {
    pub fn exit_code(&self) -> u8 {
        if self.reports.iter().any(|r| r.status == Status::Fail) {
            1
        } else {
            0
        }
    }
}

struct Outcome {
    check: String,
    status: Status,
    residual: f64,
    samples: usize,
    note: Option<String>,
}

impl Outcome {
    fn new(check: impl Into<String>, status: Status, residual: f64, samples: usize) -> Self {
        Outcome { check: check.into(), status, residual, samples, note: None }
    }

    fn equiv(check: impl Into<String>, r: &EquivReport) -> Self {
        let status = if r.pass { Status::Pass } else { Status::Fail };
        Outcome::new(check, status, r.max_residual, r.points)
    }

    fn error(check: impl Into<String>, e: impl std::fmt::Display) -> Self {
        let check = check.into();
        let note = Some(format!("{check}: {e}"));
        Outcome { check, status: Status::Fail, residual: f64::INFINITY, samples: 0, note }
    }

    fn membership(check: impl Into<String>, m: &Membership, expect: bool) -> Self {
        let status = if m.member == expect { Status::Pass } else { Status::Fail };
        Outcome::new(check, status, m.max_distance, m.points)
    }
}

type Job<'a> = Box<dyn Fn() -> Vec<Outcome> + Send + Sync + 'a>;

fn sub_seed(seed: u64, tag: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0100_0000_01b3);
    }
    seed ^ h
}

fn zero_check(name: &str, sampler: &Sampler, s: &AtpStructure, exprs: &[Expr]) -> Outcome {
    match sampler.check_zero(s.chart(), name, exprs) {
        Ok(r) => Outcome::equiv(name, &r),
        Err(e) => Outcome::error(name, e),
    }
}

pub fn structure(m: &Manifest) -> Result<AtpStructure, RunError> {
    let lambda = m.lambda.as_ref().ok_or(RunError::MissingBlock("Lambda"))?.field.clone();
    let dim = m.chart.dim();
    let phi = m.phi.as_ref().map_or_else(|| FormField::zero(dim, 3), |b| b.field.clone());
    let theta = m.theta.as_ref().map_or_else(|| FormField::zero(dim, 1), |b| b.field.clone());
    AtpStructure::new(m.chart.clone(), lambda, phi, theta).map_err(|e| RunError::Input(e.to_string()))
}

pub fn polarization(m: &Manifest) -> Result<Polarization, RunError> {
    if m.generators.is_empty() {
        return Err(RunError::MissingBlock("generator"));
    }
    Polarization::new(m.generators.iter().map(|g| g.block.field.clone()).collect()).map_err(|e| RunError::Input(e.to_string()))
}

fn certificate(m: &Manifest) -> Result<PrequantCertificate, RunError> {
    let z = m.z.as_ref().ok_or(RunError::MissingBlock("Z"))?.field.clone();
    let eta = m.eta.as_ref().ok_or(RunError::MissingBlock("eta"))?.field.clone();
    let mut c = PrequantCertificate::new(z, eta);
    if let Some(t) = &m.vartheta {
        c = c.with_potential(t.field.clone());
    }
    Ok(c)
}

/// The derivative selected by the manifest's `[derivative]` block.
pub fn derivative(m: &Manifest, s: &AtpStructure) -> Result<ContravariantD, RunError> {
    let dim = s.dim();
    match m.derivative_kind() {
        DerivativeKind::Flat => Ok(ContravariantD::flat(s.clone())),
        DerivativeKind::Certificate => {
            if m.vartheta.is_none() {
                return Err(RunError::MissingBlock("vartheta"));
            }
            build_derivative(s, &certificate(m)?).map_err(|e| RunError::Input(e.to_string()))
        }
        DerivativeKind::Explicit => {
            let omega = m.omega.as_ref().map_or_else(|| FormField::zero(dim, 1), |b| b.field.clone());
            let z = m.z.as_ref().map_or_else(|| MultiVectorField::zero(dim, 1), |b| b.field.clone());
            ContravariantD::new(s.clone(), omega, z).map_err(|e| RunError::Input(e.to_string()))
        }
    }
}

fn validate_jobs<'a>(s: &'a AtpStructure, sampler: &'a Sampler, jobs: &mut Vec<Job<'a>>) {
    let dim = s.dim();
    jobs.push(Box::new(move || match s.validate(sampler) {
        Ok(v) => v.checks.iter().map(|c| Outcome::equiv(format!("axiom.{}", c.name), &c.report)).collect(),
        Err(e) => vec![Outcome::error("axiom", e)],
    }));
    for grade in 0..=2 {
        jobs.push(Box::new(move || {
            let name = format!("cochain.grade{grade}");
            let mut rd = RandomData::new(sub_seed(sampler.seed, &name), dim);
            let mut exprs = Vec::new();
            for _ in 0..RANDOM_DRAWS {
                let v: MultiVectorField = rd.field(grade);
                match s.coboundary_field(&v).and_then(|dv| s.coboundary_field(&dv)) {
                    Ok(ddv) => exprs.extend(ddv.coefficients()),
                    Err(e) => return vec![Outcome::error(name, e)],
                }
            }
            vec![zero_check(&name, sampler, s, &exprs)]
        }));
    }
    for grade in 1..=2 {
        jobs.push(Box::new(move || {
            let name = format!("chain_map.grade{grade}");
            let mut rd = RandomData::new(sub_seed(sampler.seed, &name), dim);
            let mut exprs = Vec::new();
            for _ in 0..RANDOM_DRAWS {
                let mu: FormField = rd.field(grade);
                match s.chain_map_residual(&mu) {
                    Ok(r) => exprs.extend(r.coefficients()),
                    Err(e) => return vec![Outcome::error(name, e)],
                }
            }
            vec![zero_check(&name, sampler, s, &exprs)]
        }));
    }
    jobs.push(Box::new(move || {
        let mut rd = RandomData::new(sub_seed(sampler.seed, "jacobiator"), dim);
        let exprs: Vec<Expr> = (0..RANDOM_DRAWS)
            .map(|_| {
                let (f, g, h) = (rd.poly(), rd.poly(), rd.poly());
                s.jacobiator_residual(&f, &g, &h)
            })
            .collect();
        vec![zero_check("jacobiator", sampler, s, &exprs)]
    }));
    jobs.push(Box::new(move || {
        let mut rd = RandomData::new(sub_seed(sampler.seed, "bracket_jacobi"), dim);
        let mut exprs = Vec::new();
        for _ in 0..2 {
            let (a, b, c): (FormField, FormField, FormField) = (rd.field(1), rd.field(1), rd.field(1));
            exprs.extend(s.bracket_jacobiator(&a, &b, &c).coefficients());
        }
        vec![zero_check("bracket_jacobi", sampler, s, &exprs)]
    }));
}

fn curvature_outcome(name: &str, d: &ContravariantD, sampler: &Sampler, mismatch: Status) -> Outcome {
    let p = match d.curvature_bivector(sampler) {
        Ok(p) => p,
        Err(e) => return Outcome::error(name, e),
    };
    match sampler.check_pairs(d.chart(), name, &curvature_law_pairs(d, &p)) {
        Ok(r) => {
            let mut o = Outcome::equiv(name, &r);
            if !r.pass {
                o.status = mismatch;
            }
            o
        }
        Err(e) => Outcome::error(name, e),
    }
}

fn prequant_jobs<'a>(s: &'a AtpStructure, c: &'a PrequantCertificate, d: &'a ContravariantD, sampler: &'a Sampler, jobs: &mut Vec<Job<'a>>) {
    let dim = s.dim();
    let complex = PolySpec { complex: true, ..PolySpec::default() };
    jobs.push(Box::new(move || match check_certificate(s, c, sampler) {
        Ok(r) => r.checks.iter().map(|k| Outcome::equiv(format!("certificate.{}", k.name), &k.report)).collect(),
        Err(e) => vec![Outcome::error("certificate", e)],
    }));
    jobs.push(Box::new(move || vec![curvature_outcome("curvature_law", d, sampler, Status::Fail)]));
    jobs.push(Box::new(move || {
        let mut real = RandomData::new(sub_seed(sampler.seed, "hermitian.alpha"), dim);
        let mut cx = RandomData::new(sub_seed(sampler.seed, "hermitian.u"), dim).with_spec(complex);
        let exprs: Vec<Expr> = (0..RANDOM_DRAWS)
            .map(|_| {
                let a: FormField = real.field(1);
                let (u1, u2) = (cx.poly(), cx.poly());
                d.hermitian_residual(&a, &u1, &u2)
            })
            .collect();
        vec![zero_check("hermitian", sampler, s, &exprs)]
    }));
    jobs.push(Box::new(move || {
        let mut real = RandomData::new(sub_seed(sampler.seed, "homomorphism.fg"), dim);
        let mut cx = RandomData::new(sub_seed(sampler.seed, "homomorphism.u"), dim).with_spec(complex);
        let exprs: Vec<Expr> = (0..RANDOM_DRAWS)
            .map(|_| {
                let (f, g, u) = (real.poly(), real.poly(), cx.poly());
                d.homomorphism_residual(&f, &g, &u)
            })
            .collect();
        vec![zero_check("homomorphism", sampler, s, &exprs)]
    }));
}

fn polarize_jobs<'a>(m: &'a Manifest, s: &'a AtpStructure, p: &'a Polarization, sampler: &'a Sampler, jobs: &mut Vec<Job<'a>>) {
    jobs.push(Box::new(move || match isotropy_check(s, p, sampler) {
        Ok(r) => vec![Outcome::equiv("isotropy", &r)],
        Err(e) => vec![Outcome::error("isotropy", e)],
    }));
    jobs.push(Box::new(move || match lie_closure(s, p, sampler) {
        Ok(r) => vec![Outcome::membership("lie_closure", &r, true)],
        Err(e) => vec![Outcome::error("lie_closure", e)],
    }));
    let witnesses: Vec<Expr> = m.witnesses.iter().map(|w| w.value.expr.clone()).collect();
    for o in &m.observables {
        let witnesses = witnesses.clone();
        jobs.push(Box::new(move || {
            let name = format!("in_q.{}", o.name);
            match in_q(s, p, &o.value.expr, &witnesses, sampler) {
                Ok(v) => {
                    let status = if v.member { Status::Pass } else { Status::Fail };
                    vec![Outcome::new(name, status, v.max_distance, v.in_p.points)]
                }
                Err(e) => vec![Outcome::error(name, e)],
            }
        }));
    }
    for o in &m.non_observables {
        jobs.push(Box::new(move || {
            let name = format!("not_in_p.{}", o.name);
            match in_p(s, p, &o.value.expr, sampler) {
                Ok(r) => vec![Outcome::membership(name, &r, false)],
                Err(e) => vec![Outcome::error(name, e)],
            }
        }));
    }
}

fn hilbert_jobs<'a>(
    m: &'a Manifest,
    d: &'a ContravariantD,
    p: &'a Polarization,
    sampler: &'a Sampler,
    grid: usize,
    jobs: &mut Vec<Job<'a>>,
) {
    let s = d.structure();
    for (list, prefix, mismatch) in [(&m.sections, "h0", Status::Fail), (&m.probe_sections, "h0_probe", Status::Warn)] {
        for sec in list {
            jobs.push(Box::new(move || {
                let name = format!("{prefix}.{}", sec.name);
                let mut o = zero_check(&name, sampler, s, &h0_residuals(d, p, &sec.value.expr));
                if o.status == Status::Fail && o.note.is_none() {
                    o.status = mismatch;
                }
                vec![o]
            }));
        }
    }
    for obs in &m.observables {
        for sec in &m.sections {
            jobs.push(Box::new(move || {
                let name = format!("hat_invariance.{}.{}", obs.name, sec.name);
                let image = extended_hat(d, &obs.value.expr, &sec.value.expr);
                vec![zero_check(&name, sampler, s, &h0_residuals(d, p, &image))]
            }));
        }
    }
    if let Some(h) = &m.hermiticity {
        jobs.push(Box::new(move || {
            let q = QuadratureGrid::new(d.chart(), grid);
            match anti_hermitian_defect(d, &h.observable.expr, &h.u1.expr, &h.u2.expr, &q) {
                Ok((defect, scale, leak)) => {
                    let rel = if scale > 0.0 { defect / scale } else { f64::INFINITY };
                    let status = match (rel <= ANTI_HERMITIAN_TOL, leak) {
                        (false, _) => Status::Fail,
                        (true, Some(_)) => Status::Warn,
                        (true, None) => Status::Pass,
                    };
                    let mut o = Outcome::new("anti_hermitian", status, rel, q.total_points());
                    o.note = leak.map(|l| format!("anti_hermitian: sections reach the box boundary (relative leak {l:.3e})"));
                    vec![o]
                }
                Err(e) => vec![Outcome::error("anti_hermitian", e)],
            }
        }));
    }
    jobs.push(Box::new(move || vec![curvature_outcome("curvature_law", d, sampler, Status::Warn)]));
}

fn grid_size(m: &Manifest, opts: &Options) -> Result<usize, RunError> {
    let g = opts.grid.or(m.grid).unwrap_or(DEFAULT_GRID);
    let fits = g > 0 && g.checked_pow(m.chart.dim() as u32).is_some_and(|n| n <= 1 << 32);
    if !fits {
        return Err(RunError::Input(format!("grid {g} is not usable in dimension {}", m.chart.dim())));
    }
    Ok(g)
}

#[cfg(feature = "parallel")]
fn execute(jobs: &[Job<'_>], timing: bool) -> Vec<(Vec<Outcome>, u64)> {
    use rayon::prelude::*;
    jobs.par_iter().map(|j| timed(j, timing)).collect()
}

#[cfg(not(feature = "parallel"))]
fn execute(jobs: &[Job<'_>], timing: bool) -> Vec<(Vec<Outcome>, u64)> {
    jobs.iter().map(|j| timed(j, timing)).collect()
}

fn timed(job: &Job<'_>, timing: bool) -> (Vec<Outcome>, u64) {
    let t = Instant::now();
    let out = job();
    let ms = if timing { t.elapsed().as_millis() as u64 } else { 0 };
    (out, ms)
}

pub fn run(cmd: Subcommand, m: &Manifest, opts: &Options) -> Result<RunOutput, RunError> {
    if opts.samples == 0 {
        return Err(RunError::Input("--samples must be positive".into()));
    }
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(RunError::Input("--tol must be a positive number".into()));
    }
    let sampler = Sampler { seed: opts.seed, n_samples: opts.samples, tol: opts.tol, ..Sampler::default() };
    let s = structure(m)?;
    let wants = |c: Subcommand| cmd == c || cmd == Subcommand::Report;

    // Blocks required by explicitly requested subcommands must be present;
    // `report` silently skips groups whose blocks are absent.
    let strict = cmd != Subcommand::Report;
    fn lenient<T>(strict: bool, r: Result<T, RunError>) -> Result<Option<T>, RunError> {
        match r {
            Err(e) if strict => Err(e),
            Err(_) => Ok(None),
            Ok(v) => Ok(Some(v)),
        }
    }
    let prequant = if wants(Subcommand::Prequant) {
        lenient(strict, certificate(m).and_then(|c| {
            if c.potential.is_none() {
                return Err(RunError::MissingBlock("vartheta"));
            }
            let d = build_derivative(&s, &c).map_err(|e| RunError::Input(e.to_string()))?;
            Ok((c, d))
        }))?
    } else {
        None
    };
    let pol = if wants(Subcommand::Polarize) || wants(Subcommand::Hilbert) { lenient(strict, polarization(m))? } else { None };
    let hilbert = if wants(Subcommand::Hilbert) {
        let need = || -> Result<(ContravariantD, usize), RunError> {
            if pol.is_none() {
                return Err(RunError::MissingBlock("generator"));
            }
            if m.sections.is_empty() {
                return Err(RunError::MissingBlock("sections"));
            }
            Ok((derivative(m, &s)?, grid_size(m, opts)?))
        };
        lenient(strict, need())?
    } else {
        None
    };

    let mut jobs: Vec<Job<'_>> = Vec::new();
    if wants(Subcommand::Validate) {
        validate_jobs(&s, &sampler, &mut jobs);
    }
    if let Some((c, d)) = &prequant {
        prequant_jobs(&s, c, d, &sampler, &mut jobs);
    }
    if let (true, Some(p)) = (wants(Subcommand::Polarize), &pol) {
        polarize_jobs(m, &s, p, &sampler, &mut jobs);
    }
    if let (Some((d, grid)), Some(p)) = (&hilbert, &pol) {
        hilbert_jobs(m, d, p, &sampler, *grid, &mut jobs);
    }

    let mut out = RunOutput { reports: Vec::new(), notes: Vec::new() };
    for (outcomes, ms) in execute(&jobs, opts.timing) {
        for o in outcomes {
            out.notes.extend(o.note);
            out.reports.push(CheckReport {
                check: o.check,
                status: o.status,
                max_residual: Residual(o.residual),
                samples: o.samples,
                seed: opts.seed,
                wall_ms: ms,
            });
        }
    }
    Ok(out)
}
