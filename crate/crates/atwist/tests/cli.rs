use std::path::PathBuf;
use std::process::Command;

use atwist::report::{from_json, to_json};
use atwist::{parse_manifest, run, Options, RunError, Status, Subcommand};

fn golden_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("manifests").join(format!("{name}.atw"))
}

fn golden(name: &str) -> atwist::Manifest {
    parse_manifest(&std::fs::read_to_string(golden_path(name)).unwrap()).unwrap()
}

fn atwist(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_atwist")).args(args).output().unwrap()
}

fn quick() -> Options {
    Options { samples: 16, timing: false, ..Options::default() }
}

#[test]
fn validate_example() {
    let out = run(Subcommand::Validate, &golden("twisted_five"), &quick()).unwrap();
    assert!(out.reports.iter().all(|r| r.status == Status::Pass), "{:?}", out.reports);
    assert_eq!(out.exit_code(), 0);
    assert_eq!(out.reports[0].check, "axiom.d_phi");
}

#[test]
fn prequant_certified() {
    let out = run(Subcommand::Prequant, &golden("prequantizable"), &quick()).unwrap();
    assert!(out.reports.iter().all(|r| r.status == Status::Pass), "{:?}", out.reports);
    let bad = run(Subcommand::Prequant, &golden("prequantizable_eta_x2"), &quick()).unwrap();
    assert_eq!(bad.exit_code(), 1);
    let eq = bad.reports.iter().find(|r| r.check == "certificate.certificate_equation").unwrap();
    assert_eq!(eq.status, Status::Fail);
}

#[test]
fn missing_blocks() {
    let m = golden("twisted_five");
    for cmd in [Subcommand::Prequant, Subcommand::Polarize, Subcommand::Hilbert] {
        assert!(matches!(run(cmd, &m, &quick()), Err(RunError::MissingBlock(_))));
    }
    match run(Subcommand::Prequant, &m, &quick()) {
        Err(RunError::MissingBlock(name)) => assert_eq!(name, "Z"),
        other => panic!("{other:?}"),
    }
    // report skips what it cannot run
    assert!(run(Subcommand::Report, &m, &quick()).is_ok());
}

#[test]
fn polarize_polarized() {
    let out = run(Subcommand::Polarize, &golden("polarized"), &quick()).unwrap();
    assert_eq!(out.exit_code(), 0);
    let names: Vec<&str> = out.reports.iter().map(|r| r.check.as_str()).collect();
    assert_eq!(&names[..3], &["isotropy", "lie_closure", "in_q.t"]);
    assert!(names.contains(&"not_in_p.zbar1"));
}

#[test]
fn exit_codes() {
    let ok = atwist(&["validate", golden_path("twisted_five").to_str().unwrap(), "--samples", "16"]);
    assert_eq!(ok.status.code(), Some(0));
    let fail = atwist(&["validate", golden_path("non_poisson").to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(1));
    let fail = atwist(&["prequant", golden_path("prequantizable_eta_x2").to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(1));
    let missing = atwist(&["validate", "/nonexistent/manifest.atw"]);
    assert_eq!(missing.status.code(), Some(2));
    let block = atwist(&["hilbert", golden_path("prequantizable").to_str().unwrap()]);
    assert_eq!(block.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&block.stderr).contains("[generator]"));
}

#[test]
fn malformed_manifest_is_an_input_error() {
    let dir = std::env::temp_dir().join(format!("atwist-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("bad.atw");
    std::fs::write(&p, "[chart]\ndim = 2\n[Lambda]\n(2,1) = 1\n").unwrap();
    let out = atwist(&["validate", p.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("(2,1)"), "{err}");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identical_seeds_give_identical_json() {
    let path = golden_path("polarized");
    let args = ["polarize", path.to_str().unwrap(), "--seed", "7", "--samples", "16", "--no-timing", "--json", "-"];
    let a = atwist(&args);
    let b = atwist(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let reports = from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert!(reports.iter().all(|r| r.seed == 7 && r.wall_ms == 0));
    assert_eq!(to_json(&reports).as_bytes(), &a.stdout[..]);
    let other = atwist(&["polarize", path.to_str().unwrap(), "--seed", "8", "--samples", "16", "--no-timing", "--json", "-"]);
    assert_ne!(other.stdout, a.stdout);
}

#[test]
fn flags() {
    let m = golden("twisted_five");
    let o = Options { samples: 5, seed: 3, ..quick() };
    let out = run(Subcommand::Validate, &m, &o).unwrap();
    let sampled = out.reports.iter().find(|r| r.check == "jacobiator").unwrap();
    assert_eq!((sampled.samples, sampled.seed), (5, 3));
    assert!(run(Subcommand::Validate, &m, &Options { samples: 0, ..quick() }).is_err());
    assert!(run(Subcommand::Validate, &m, &Options { tol: -1.0, ..quick() }).is_err());
    let h = golden("polarized");
    assert!(run(Subcommand::Hilbert, &h, &Options { grid: Some(0), ..quick() }).is_err());
    let small = run(Subcommand::Hilbert, &h, &Options { grid: Some(5), ..quick() }).unwrap();
    let ah = small.reports.iter().find(|r| r.check == "anti_hermitian").unwrap();
    assert_eq!(ah.samples, 5usize.pow(5));
}
