//! Manifest files, check orchestration and JSON reports on top of
//! [`atwist_core`].
//!
//! A manifest describes a chart, a structure `(Λ, φ, θ)` and optionally a
//! prequantization certificate, a polarization, sections and observables.
//! [`run::run`] executes one subcommand and returns its reports.

pub mod manifest;
pub mod report;
pub mod run;

pub use manifest::{parse_manifest, Manifest, ManifestError, ManifestErrorKind};
pub use report::{CheckReport, Status};
pub use run::{run, Options, RunError, RunOutput, Subcommand};
