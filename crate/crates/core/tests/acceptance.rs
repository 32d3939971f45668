//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the binary exits non-zero if any fails.

use std::f64::consts::PI;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use polyspec_core::bounds::{
    classical_average_bound, gamma_constant_ratio, melas_average, theorem1_average, BoundInputs,
};
use polyspec_core::eigen::{
    reference_spectrum, richardson_extrapolate, smallest_eigenvalues, GridDomain, ReferenceShape,
    Spectrum,
};
use polyspec_core::geometry::{inertia_floor, measure, unit_ball_volume, DomainSpec, MaskDomain, Resolution};
use polyspec_core::harness::{run_report, RunConfig};
use polyspec_core::lemma::{f_profile_scan, lemma1_fuzz, physical_eta, FuzzConfig};
use polyspec_core::rearrange::{rearrange, slope_bound_check, GriddedFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn solve(domain: &DomainSpec, l: usize, h: f64, count: usize) -> Spectrum {
    let grid = GridDomain::from_domain(domain, h).unwrap();
    smallest_eigenvalues(&grid, l, count, false).unwrap()
}

fn extrapolated(domain: &DomainSpec, l: usize, h: f64, count: usize, order: f64) -> Spectrum {
    let coarse = solve(domain, l, h, count);
    let fine = solve(domain, l, h / 2.0, count);
    richardson_extrapolate(&coarse, &fine, order).unwrap()
}

fn membrane_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let n = rng.gen_range(1..=10);
        let volume = rng.gen_range(0.1..10.0);
        let inertia = inertia_floor(n, volume).unwrap() * rng.gen_range(1.0..4.0);
        let x = BoundInputs::new(n, 1, volume, inertia, rng.gen_range(1..=1000)).unwrap();
        let t = theorem1_average(&x).unwrap().value;
        let m = melas_average(&x).unwrap().value;
        worst = worst.max(rel(t, m));
    }
    ensure!(worst <= 1e-12, "max relative gap {worst:e}");
    Ok(format!("max relative gap {worst:.1e} over 10^4 inputs"))
}

fn lemma1_campaign() -> Outcome {
    let report = lemma1_fuzz(&FuzzConfig::default()).map_err(|e| e.to_string())?;
    ensure!(report.cases == 20_000, "{} cases", report.cases);
    ensure!(report.passed(), "{} violations, first {:?}", report.violations.len(), report.violations[0]);
    let tight = report.tightest.as_ref().map_or(f64::NAN, |c| c.ratio());
    Ok(format!("{} cases, 0 violations, tightest A_l/rhs {tight:.6}", report.cases))
}

fn interval_oracle() -> Outcome {
    let domain = DomainSpec::Interval { length: PI };
    let s = extrapolated(&domain, 1, PI / 200.0, 20, 2.0);
    let mut worst: f64 = 0.0;
    for k in 1..=20 {
        worst = worst.max(rel(s.values[k - 1], (k * k) as f64));
    }
    ensure!(worst <= 5e-4, "max relative error {worst:e}");
    let x = BoundInputs::new(1, 1, PI, PI.powi(3) / 12.0, 1).unwrap();
    let bound = theorem1_average(&x).unwrap().value;
    let expected = 1.0 / 3.0 + 1.0 / (6.0 * PI * PI);
    ensure!(rel(bound, expected) <= 1e-12, "bound {bound} vs {expected}");
    let margin = s.values[0] / bound;
    ensure!(rel(margin, 2.855) <= 5e-3, "margin {margin}");
    Ok(format!("max rel error {worst:.1e} for k<=20, margin {margin:.4}"))
}

fn beam_oracle() -> Outcome {
    let domain = DomainSpec::Interval { length: 1.0 };
    let s = extrapolated(&domain, 2, 1.0 / 200.0, 25, 1.0);
    let exact = reference_spectrum(ReferenceShape::Beam { length: 1.0 }, 2, 1).unwrap().values[0];
    ensure!(rel(exact, 500.564) <= 1e-5, "root-found value {exact}");
    let lambda1 = s.values[0];
    ensure!(rel(lambda1, 500.564) <= 0.01, "lambda_1 = {lambda1}");
    ensure!(lambda1 >= 319.63, "lambda_1 = {lambda1} below 319.63");
    let x = BoundInputs::new(1, 2, 1.0, 1.0 / 12.0, 1).unwrap();
    let t1 = theorem1_average(&x).unwrap().value;
    let closed = (PI.powi(4) + PI.powi(2) + 1.0 / 12.0) / 5.0;
    ensure!(rel(t1, closed) <= 1e-12, "k=1 bound {t1} vs {closed}");
    ensure!(lambda1 >= t1, "lambda_1 below the k=1 bound");
    for k in 1..=25 {
        let x = x.with_k(k);
        let t = theorem1_average(&x).unwrap().value;
        let c = classical_average_bound(&x).unwrap().value;
        ensure!(t > c, "k={k}: {t} <= {c}");
        ensure!(s.mean_of_first(k) >= t, "k={k}: mean {} below {t}", s.mean_of_first(k));
    }
    Ok(format!("lambda_1 {lambda1:.3} (exact {exact:.3}), k=1 bound {t1:.4}, strict gain k=1..25"))
}

fn disk_oracle() -> Outcome {
    let domain = DomainSpec::Ball { radius: 1.0, dim: 2 };
    let s = extrapolated(&domain, 1, 1.0 / 32.0, 10, 1.0);
    let v = &s.values;
    ensure!(rel(v[0], 5.7832) <= 0.01, "lambda_1 = {}", v[0]);
    ensure!(rel(v[1], 14.682) <= 0.015 && rel(v[2], 14.682) <= 0.015, "lambda_2,3 = {}, {}", v[1], v[2]);
    ensure!(rel(v[1], v[2]) <= 1e-6, "pair split: {} vs {}", v[1], v[2]);
    ensure!(rel(v[3], v[2]) > 0.05, "pair not isolated");
    let g = measure(&domain, Resolution::Analytic).unwrap();
    for k in 1..=10 {
        let x = BoundInputs::new(2, 1, g.volume, g.inertia, k).unwrap();
        let mean = s.mean_of_first(k);
        let li_yau = classical_average_bound(&x).unwrap().value;
        let melas = melas_average(&x).unwrap().value;
        let t1 = theorem1_average(&x).unwrap().value;
        ensure!(mean >= li_yau && mean >= melas && mean >= t1, "k={k}: mean {mean} vs {t1}");
    }
    Ok(format!("lambda_1 {:.4}, lambda_2,3 {:.4} {:.4}", v[0], v[1], v[2]))
}

fn random_mask(rng: &mut ChaCha8Rng) -> MaskDomain {
    let (w, h) = (rng.gen_range(4..24), rng.gen_range(4..24));
    let p = rng.gen_range(0.2..0.9);
    let mut cells: Vec<bool> = (0..w * h).map(|_| rng.gen_bool(p)).collect();
    cells[0] = true;
    MaskDomain::new(w, h, cells, rng.gen_range(0.01..0.5)).unwrap()
}

fn geometry_inequality() -> Outcome {
    let analytic = [
        DomainSpec::Interval { length: 2.5 },
        DomainSpec::Box { lengths: vec![1.0, 3.0] },
        DomainSpec::Box { lengths: vec![1.0, 2.0, 0.5] },
        DomainSpec::Ball { radius: 1.0, dim: 2 },
        DomainSpec::Ball { radius: 0.7, dim: 3 },
    ];
    for d in &analytic {
        let g = measure(d, Resolution::Analytic).unwrap();
        let slack = g.inertia_slack();
        // the interval is the 1-d ball
        if matches!(d, DomainSpec::Ball { .. } | DomainSpec::Interval { .. }) {
            ensure!(slack.abs() <= 1e-10 * g.inertia, "{}: ball slack {slack}", d.label());
        } else {
            ensure!(slack > 0.0, "{}: slack {slack}", d.label());
        }
    }
    let disk = DomainSpec::Ball { radius: 1.0, dim: 2 };
    let g = measure(&disk, Resolution::Cell(1.0 / 64.0)).unwrap();
    ensure!(g.inertia_slack().abs() <= g.tol_quad, "quadrature disk slack {}", g.inertia_slack());
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut min_rel = f64::INFINITY;
    for _ in 0..20 {
        let m = DomainSpec::Mask(random_mask(&mut rng));
        let cell = match &m {
            DomainSpec::Mask(mask) => mask.cell,
            _ => unreachable!(),
        };
        let g = measure(&m, Resolution::Cell(cell)).unwrap();
        ensure!(g.inertia_slack() >= -1e-12 * g.inertia, "mask slack {}", g.inertia_slack());
        min_rel = min_rel.min(g.inertia_slack() / g.inertia);
    }
    Ok(format!("5 analytic domains, quadrature disk, 20 masks (min relative slack {min_rel:.3})"))
}

fn gamma_constant() -> Outcome {
    let mut worst: f64 = 0.0;
    for n in 1..=50 {
        let b = unit_ball_volume(n).unwrap();
        let lhs = b.powf(4.0 / n as f64);
        ensure!(lhs < 2.0 * PI * PI, "n={n}: {lhs}");
        let r = gamma_constant_ratio(n).unwrap();
        ensure!(r < 0.5, "n={n}: ratio {r}");
        worst = worst.max(r);
    }
    Ok(format!("largest B_n^(4/n)/(2 pi)^2 = {worst:.6} < 1/2"))
}

fn f_monotone() -> Outcome {
    let mut scans = 0;
    for n in 1..=3 {
        let shapes = [
            DomainSpec::Ball { radius: 1.0, dim: n },
            DomainSpec::Box { lengths: (0..n).map(|i| 1.0 + i as f64).collect() },
        ];
        for d in &shapes {
            let d = match (n, d) {
                (1, DomainSpec::Box { .. }) => DomainSpec::Interval { length: 2.0 },
                _ => d.clone(),
            };
            let g = measure(&d, Resolution::Analytic).unwrap();
            let eta = physical_eta(n, g.volume, g.inertia);
            for l in 1..=3 {
                for k in [1, 10, 100] {
                    let v = f_profile_scan(n, l, k, g.volume, eta, 1000).unwrap();
                    ensure!(
                        v.strictly_decreasing,
                        "{} l={l} k={k}: rises at {:?}",
                        d.label(),
                        v.first_violation
                    );
                    scans += 1;
                }
            }
        }
    }
    Ok(format!("{scans} scans of 1000 points, all strictly decreasing"))
}

fn fourier_chain() -> Outcome {
    let text = r#"{
        "domain": {"kind": "interval", "length": 3.141592653589793},
        "l": 1, "k_max": 3,
        "levels": [0.006283185307179587, 0.0031415926535897933],
        "checks": ["fourier"],
        "fourier": {"k": 3, "z_max": 60, "dz": 0.05, "z_samples": 200, "z_range": 40},
        "seed": 9
    }"#;
    let config = RunConfig::from_json_str(text, Path::new(".")).map_err(|e| e.to_string())?;
    let rec = run_report(&config).map_err(|e| e.to_string())?;
    let pointwise: Vec<_> = rec.checks.iter().filter(|c| c.name.contains("z=")).collect();
    ensure!(pointwise.len() == 400, "{} pointwise checks", pointwise.len());
    let bad = pointwise.iter().filter(|c| !c.passed).count();
    ensure!(bad == 0, "{bad} pointwise violations");
    let find = |name: &str| rec.checks.iter().find(|c| c.name == name).unwrap();
    let mass = find("parseval").lhs;
    ensure!((0.97 * 3.0..=3.0 + find("parseval").tolerance).contains(&mass), "truncated integral {mass}");
    let chain = find("lemma1_chain");
    let lambda_sum: f64 = rec.best.values.iter().sum();
    ensure!(chain.passed && chain.lhs <= lambda_sum, "chain {} vs {lambda_sum}", chain.lhs);
    let failed: Vec<_> = rec.checks.iter().filter(|c| !c.passed && !c.advisory).map(|c| &c.name).collect();
    ensure!(failed.is_empty(), "failed: {failed:?}");
    Ok(format!(
        "400 pointwise checks clean, int f = {mass:.5}, chain {:.4} <= {lambda_sum:.4}",
        chain.lhs
    ))
}

fn rearrangement_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let interval = GridDomain::from_domain(&DomainSpec::Interval { length: 2.0 }, 0.02).unwrap();
    let disk = GridDomain::from_domain(&DomainSpec::Ball { radius: 1.0, dim: 2 }, 0.05).unwrap();
    let mut worst_mass: f64 = 0.0;
    for trial in 0..100 {
        let grid = if trial % 2 == 0 { &interval } else { &disk };
        let l = rng.gen_range(1..=3);
        let values: Vec<f64> = (0..grid.len()).map(|_| rng.gen_range(0.0..5.0)).collect();
        let f = GriddedFunction::new(grid, values).unwrap();
        let r = rearrange(&f, l).unwrap();
        worst_mass = worst_mass.max(rel(r.mass, f.mass()));
        ensure!(rel(r.mass, f.mass()) <= 1e-13, "mass {} vs {}", r.mass, f.mass());
        let reach = (0..grid.len()).map(|k| grid.coords(k)[0].hypot(grid.coords(k)[1])).fold(0.0, f64::max);
        let raw = f.moment_about_origin(2.0 * l as f64);
        ensure!(
            r.radial_moment_2l <= raw + r.rebin_tolerance(reach),
            "trial {trial}: {} > {raw}",
            r.radial_moment_2l
        );
    }
    let mut ratios = Vec::new();
    for h in [1.0 / 32.0, 1.0 / 64.0, 1.0 / 128.0, 1.0 / 256.0] {
        let g = GridDomain::from_domain(&DomainSpec::Ball { radius: 1.0, dim: 2 }, h).unwrap();
        let f = GriddedFunction::from_fn(&g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            (1.0 - r2).max(0.0).powi(2)
        })
        .unwrap();
        ratios.push(slope_bound_check(&f).unwrap().worst_ratio);
    }
    let gaps: Vec<f64> = ratios.iter().map(|r| (r - 1.0).abs()).collect();
    ensure!(gaps.windows(2).all(|w| w[1] < w[0]), "slope ratios {ratios:?}");
    ensure!(gaps[3] <= 0.005, "finest slope ratio {}", ratios[3]);
    Ok(format!("100 random f, worst mass error {worst_mass:.1e}, slope ratios {ratios:.3?}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome, u64); 10] = [
        ("theorem1 = Melas for l=1", membrane_identity, 1),
        ("radial moment fuzz", lemma1_campaign, 30),
        ("interval oracle", interval_oracle, 10),
        ("clamped beam oracle", beam_oracle, 30),
        ("disk oracle", disk_oracle, 120),
        ("geometry inequality", geometry_inequality, 10),
        ("gamma constant", gamma_constant, 1),
        ("F monotonicity", f_monotone, 5),
        ("Fourier proof chain", fourier_chain, 60),
        ("rearrangement suite", rearrangement_suite, 60),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|p| {
                let msg = p
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                Err(format!("panicked: {msg}"))
            })
            .and_then(|detail| {
                let t = start.elapsed();
                if t > Duration::from_secs(*budget) {
                    Err(format!("{detail}; took {t:.1?}, budget {budget} s"))
                } else {
                    Ok(detail)
                }
            });
        let t = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({t:.2} s): {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name} ({t:.2} s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
