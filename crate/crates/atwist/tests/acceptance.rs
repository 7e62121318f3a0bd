//! Acceptance criteria 1 to 12, one line each. Run with
//! `cargo test -p atwist --test acceptance` (add `--release` for speed).

use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use atwist::report::to_json;
use atwist::{parse_manifest, run, ManifestErrorKind, Options, Subcommand};
use atwist_core::catalog;
use atwist_core::polarize::*;
use atwist_core::prequantum::*;
use atwist_core::random::{PolySpec, RandomData};
use atwist_core::symexpr::{parse, Chart, EquivReport, Expr, Sampler, C64};
use atwist_core::tensorcalc::*;
use atwist_core::AtpStructure;
use rand::Rng;

type Verdict = Result<String, String>;

fn sampler() -> Sampler {
    Sampler { n_samples: 64, tol: 1e-9, ..Sampler::default() }
}

fn zero(chart: &Chart, name: &str, exprs: &[Expr]) -> Result<EquivReport, String> {
    sampler().check_zero(chart, name, exprs).map_err(|e| e.to_string())
}

fn pairs(chart: &Chart, name: &str, p: &[(Expr, Expr)]) -> Result<EquivReport, String> {
    sampler().check_pairs(chart, name, p).map_err(|e| e.to_string())
}

fn require(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn example() -> AtpStructure {
    let (x1, x2, x3, x5) = (Expr::coord(0), Expr::coord(1), Expr::coord(2), Expr::coord(4));
    catalog::twisted_five(Chart::standard(5), &(x3.powi(2) + &x5), &(x1 * x2 + x5))
}

fn prequantizable() -> (AtpStructure, PrequantCertificate) {
    let (x1, x3) = (Expr::coord(0), Expr::coord(2));
    let s = catalog::prequantizable_five(Chart::standard(5), &x1, &x3);
    let c = PrequantCertificate::new(MultiVectorField::basis(5, 4), catalog::block_eta(&x1, &x3))
        .with_potential(catalog::block_potential());
    (s, c)
}

fn certified() -> ContravariantD {
    let (s, c) = prequantizable();
    build_derivative(&s, &c).expect("potential supplied")
}

fn complex_data(seed: u64) -> RandomData {
    RandomData::new(seed, 5).with_spec(PolySpec { complex: true, ..PolySpec::default() })
}

fn c1() -> Verdict {
    let t = Instant::now();
    let r = example().validate(&sampler()).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    let worst = r.checks.iter().map(|c| c.report.max_residual).fold(0.0, f64::max);
    require(r.pass() && r.checks.len() == 4 && secs < 10.0, format!("4 axioms, max residual {worst:.1e}, {secs:.2} s"))
}

fn c2() -> Verdict {
    let s = example();
    let mut rd = RandomData::new(2, 5);
    let mut exprs = Vec::new();
    for n in 0..20 {
        let v: MultiVectorField = rd.field(n % 3);
        let dd = s.coboundary_field(&s.coboundary_field(&v).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        exprs.extend(dd.coefficients());
    }
    let r = zero(s.chart(), "c2", &exprs)?;
    require(r.pass, format!("20 fields of grades 0-2, max residual {:.1e}", r.max_residual))
}

fn c3() -> Verdict {
    let s = example();
    let mut rd = RandomData::new(3, 5);
    let mut exprs = Vec::new();
    for n in 0..20 {
        let mu: FormField = rd.field(1 + n % 2);
        exprs.extend(s.chain_map_residual(&mu).map_err(|e| e.to_string())?.coefficients());
    }
    let r = zero(s.chart(), "c3", &exprs)?;
    let bad = catalog::non_poisson();
    let mut rd = RandomData::new(31, 4);
    let mut worst: f64 = 0.0;
    for n in 0..20 {
        let mu: FormField = rd.field(1 + n % 2);
        let res = bad.chain_map_residual(&mu).map_err(|e| e.to_string())?;
        worst = worst.max(zero(bad.chart(), "c3.bad", &res.coefficients())?.max_residual);
    }
    require(
        r.pass && worst > 1e-3,
        format!("20 forms, max residual {:.1e}; counterexample residual {worst:.2}", r.max_residual),
    )
}

fn c4() -> Verdict {
    let s = example();
    let mut rd = RandomData::new(4, 5);
    let exprs: Vec<Expr> = (0..10)
        .map(|_| {
            let (f, g, h) = (rd.poly(), rd.poly(), rd.poly());
            s.jacobiator_residual(&f, &g, &h)
        })
        .collect();
    let r = zero(s.chart(), "c4", &exprs)?;
    let bad = catalog::non_poisson();
    let j = bad.jacobiator_residual(&Expr::coord(1), &Expr::coord(2), &Expr::coord(3));
    let sm = sampler();
    let mut stream = sm.stream(bad.chart(), "c4.bad");
    let mut dev: f64 = 0.0;
    for _ in 0..sm.n_samples {
        let v = j.eval(bad.chart(), &stream.next_point()).map_err(|e| e.to_string())?;
        dev = dev.max((v - C64::new(-1.0, 0.0)).norm());
    }
    require(
        r.pass && dev <= 1e-9,
        format!("10 triples, max residual {:.1e}; J(x2,x3,x4)+1 at most {dev:.1e}", r.max_residual),
    )
}

fn c5() -> Verdict {
    let (s, c) = prequantizable();
    let ok = check_certificate(&s, &c, &sampler()).map_err(|e| e.to_string())?;
    let mut scaled = c.clone();
    scaled.eta = scaled.eta.scale_const(C64::new(1.01, 0.0));
    let bad = check_certificate(&s, &scaled, &sampler()).map_err(|e| e.to_string())?;
    let eq = bad.get("certificate_equation").expect("always reported");
    require(
        ok.pass() && !bad.pass() && eq.max_residual > 1e-3,
        format!("certificate passes; 1.01 eta residual {:.1e}", eq.max_residual),
    )
}

fn c6() -> Verdict {
    let d = certified();
    let p = d.curvature_bivector(&sampler()).map_err(|e| e.to_string())?;
    let law = pairs(d.chart(), "c6", &curvature_law_pairs(&d, &p))?;
    let s = d.structure().clone();
    let mut rd = complex_data(6);
    let mut worst: f64 = 0.0;
    let mut all = true;
    for _ in 0..5 {
        let omega: FormField = rd.field(1);
        let dz = ContravariantD::new(s.clone(), omega.clone(), MultiVectorField::zero(5, 1)).map_err(|e| e.to_string())?;
        let pz = dz.curvature_bivector(&sampler()).map_err(|e| e.to_string())?;
        let r = pairs(dz.chart(), "c6.omega", &pz.difference_pairs(&s.anchor_k(&exterior_d(&omega))))?;
        all &= r.pass;
        worst = worst.max(r.max_residual);
    }
    require(
        law.pass && all,
        format!("P + 2 pi i Lambda residual {:.1e}; 5 random omega, max residual {worst:.1e}", law.max_residual),
    )
}

fn c7() -> Verdict {
    let d = certified();
    let mut rd = RandomData::new(7, 5);
    let mut cx = complex_data(70);
    let exprs: Vec<Expr> = (0..10)
        .map(|_| {
            let (f, g, u) = (rd.poly(), rd.poly(), cx.poly());
            d.homomorphism_residual(&f, &g, &u)
        })
        .collect();
    let r = zero(d.chart(), "c7", &exprs)?;
    let flat = ContravariantD::flat(d.structure().clone());
    let u = Expr::coord(2) + Expr::i() * Expr::coord(3);
    let bad = zero(d.chart(), "c7.flat", &[flat.homomorphism_residual(&Expr::coord(0), &Expr::coord(1), &u)])?;
    require(
        r.pass && !bad.pass,
        format!("10 pairs, max residual {:.1e}; flat derivative residual {:.2}", r.max_residual, bad.max_residual),
    )
}

fn c8() -> Verdict {
    let d = certified();
    let mut real = RandomData::new(8, 5);
    let mut cx = complex_data(80);
    let exprs: Vec<Expr> = (0..10)
        .map(|_| {
            let a: FormField = real.field(1);
            let (u1, u2) = (cx.poly(), cx.poly());
            d.hermitian_residual(&a, &u1, &u2)
        })
        .collect();
    let r = zero(d.chart(), "c8", &exprs)?;
    require(r.pass, format!("10 triples, max residual {:.1e}", r.max_residual))
}

fn polarized() -> (AtpStructure, Polarization, Chart) {
    let c = catalog::complex_chart();
    let f = parse("x1^2*x2 + x1", &c).expect("fixed text");
    let g = parse("x3 + x4^2", &c).expect("fixed text");
    let p = Polarization::holomorphic(&c);
    (catalog::prequantizable_five(c.clone(), &f, &g), p, c)
}

/// A polynomial in `z1, z2, t`, or in all real coordinates.
fn random_function(seed: u64, holomorphic: bool) -> Expr {
    let mut r = RandomData::new(seed, 5);
    if !holomorphic {
        return r.poly();
    }
    let z = [Expr::coord(0) + Expr::i() * Expr::coord(1), Expr::coord(2) + Expr::i() * Expr::coord(3), Expr::coord(4)];
    let terms: Vec<Expr> = (0..r.rng().gen_range(1..=3))
        .map(|_| {
            let rng = r.rng();
            let c = Expr::real(rng.gen_range(-4..=4) as f64 / 2.0);
            let deg: Vec<i32> = (0..3).map(|_| rng.gen_range(0..=2)).collect();
            Expr::product(std::iter::once(c).chain(z.iter().zip(&deg).map(|(b, &n)| b.powi(n))))
        })
        .collect();
    Expr::sum(terms)
}

fn c9() -> Verdict {
    let (s, p, c) = polarized();
    let iso = isotropy_check(&s, &p, &sampler()).map_err(|e| e.to_string())?;
    let mut agree = 0;
    let mut members = 0;
    for k in 0..10 {
        let f = random_function(900 + k, k % 2 == 0);
        let m = in_p(&s, &p, &f, &sampler()).map_err(|e| e.to_string())?;
        let dbar = [f.wirtinger(&c, 0, true).expect("pair"), f.wirtinger(&c, 1, true).expect("pair")];
        let oracle = zero(&c, "c9.nb4", &dbar)?.pass;
        agree += usize::from(m.member == oracle);
        members += usize::from(m.member);
    }
    let d = ContravariantD::flat(s);
    let u = parse("exp(-(x1^2*x2 + x1 + x3 + x4^2)/2 + t)", &c).expect("fixed text");
    let h0 = zero(&c, "c9.h0", &h0_residuals(&d, &p, &u))?;
    let v = parse("exp(-(x1^2*x2 + x1)/2 + t)", &c).expect("fixed text");
    let rv = h0_residuals(&d, &p, &v);
    let k1 = zero(&c, "c9.k1", &rv[..1])?;
    let k2 = zero(&c, "c9.k2", &rv[1..])?;
    require(
        iso.pass && agree == 10 && h0.pass && k1.pass && !k2.pass,
        format!(
            "isotropy ok, Wirtinger agreement {agree}/10 ({members} members), h0 residual {:.1e}, e^(-f/2+t) k=2 residual {:.2}",
            h0.max_residual, k2.max_residual
        ),
    )
}

fn c10() -> Verdict {
    let (s, p, c) = polarized();
    let d = ContravariantD::flat(s);
    let u = parse("exp(-(x1^2*x2 + x1 + x3 + x4^2)/2 + t)", &c).expect("fixed text");
    let t = Expr::coord(4);
    let image = extended_hat(&d, &t, &u);
    let inv = zero(&c, "c10.h0", &h0_residuals(&d, &p, &image))?;
    let want = (&t * &u).scale(C64::new(0.0, 2.0 * PI));
    let eq = sampler().equiv(&c, &image, &want).map_err(|e| e.to_string())?;
    require(
        inv.pass && eq.pass,
        format!("image in H0 (residual {:.1e}), equals 2 pi i t u (residual {:.1e})", inv.max_residual, eq.max_residual),
    )
}

fn c11() -> Verdict {
    let t = Instant::now();
    let c = catalog::complex_chart();
    let s = catalog::prequantizable_five(c.clone(), &Expr::coord(0), &Expr::coord(2));
    let div = divergence(&s.anchor(&FormField::basis(5, 0)));
    let d = ContravariantD::flat(s);
    let bump = |k: usize| (Expr::one() / (Expr::coord(k).powi(2) - Expr::one())).exp();
    let u1 = Expr::product((0..5).map(bump));
    let u2 = &u1 * (Expr::i() * Expr::coord(1)).exp();
    let grid = QuadratureGrid::new(&c, 17);
    let (defect, scale, leak) = anti_hermitian_defect(&d, &Expr::coord(0), &u1, &u2, &grid).map_err(|e| e.to_string())?;
    let secs = t.elapsed().as_secs_f64();
    require(
        div.is_zero() && defect <= 1e-2 * scale && secs < 180.0,
        format!(
            "defect {defect:.1e} vs bound {:.1e}, leak {}, {secs:.1} s",
            1e-2 * scale,
            leak.map_or("none".to_string(), |l| format!("{l:.1e}"))
        ),
    )
}

fn golden(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("manifests").join(format!("{name}.atw"));
    std::fs::read_to_string(p).expect("golden manifest present")
}

fn c12() -> Verdict {
    let names = ["twisted_five", "prequantizable", "prequantizable_eta_x2", "polarized", "non_poisson"];
    for n in names {
        let m = parse_manifest(&golden(n)).map_err(|e| format!("{n}: {e}"))?;
        if parse_manifest(&m.to_text()).map_err(|e| e.to_string())? != m {
            return Err(format!("{n} does not round-trip"));
        }
    }
    let cases: [(&str, usize, fn(&ManifestErrorKind) -> bool); 3] = [
        ("[chart]\ndim = 2\n[Lambda]\n(2,1) = 1\n", 4, |k| matches!(k, ManifestErrorKind::DuplicateComponent(_))),
        ("[chart]\ndim = 2\n[scalars]\nf = g\ng = f\n", 5, |k| matches!(k, ManifestErrorKind::CyclicScalarDefinition(_))),
        ("[chart]\ndim = 2\n[sections]\nu = x1 + y\n", 4, |k| matches!(k, ManifestErrorKind::UnknownIdentifier(_))),
    ];
    for (text, line, want) in cases {
        match parse_manifest(text) {
            Err(e) if want(&e.kind) && e.line == line => {}
            other => return Err(format!("unexpected result {other:?}")),
        }
    }
    let opts = Options { timing: false, seed: 12, samples: 32, ..Options::default() };
    for (n, cmd) in [("twisted_five", Subcommand::Validate), ("prequantizable", Subcommand::Prequant), ("polarized", Subcommand::Polarize)] {
        let m = parse_manifest(&golden(n)).map_err(|e| e.to_string())?;
        let a = to_json(&run(cmd, &m, &opts).map_err(|e| e.to_string())?.reports);
        let b = to_json(&run(cmd, &m, &opts).map_err(|e| e.to_string())?.reports);
        if a != b {
            return Err(format!("{n}: reports differ between identical runs"));
        }
    }
    Ok("5 golden manifests round-trip, 3 malformed inputs rejected, reports reproducible".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("structure validation", c1),
        ("cochain property", c2),
        ("chain map", c3),
        ("Jacobiator identity", c4),
        ("prequantization certificate", c5),
        ("curvature law", c6),
        ("homomorphism", c7),
        ("Hermitian compatibility", c8),
        ("polarization suite", c9),
        ("operator invariance", c10),
        ("anti-Hermiticity", c11),
        ("parser and reports", c12),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if only.is_some_and(|k| k != i + 1) {
            continue;
        }
        let (tag, detail) = match check() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag}  {name}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
