//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Oracles are independent of the library (closed forms,
//! nalgebra decompositions, Simpson quadrature).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use wpl_cli::config::{Command, RunConfig};
use wpl_cli::run::{replay, run_and_emit};
use wpl_core::fisher::{
    effective_step_ratio, project_to_retained, spectral_pinv, step_size_bounds, woodbury_pinv,
    LowRankCorrection, PseudoInverseConfig,
};
use wpl_core::geometry::{
    extract_contractions, orbifold_area, scalar_curvature, svd_regularize, wpl_metric, Branch,
    Convention, GeometryConfig, WplParams,
};
use wpl_core::linalg::Mat;
use wpl_core::quantum::{
    channel_to_bloch_map, exact_ground_energy, make_channel, ChannelKind, NoiseModel,
};
use wpl_core::rng::SeedStream;
use wpl_core::stats::{log_log_slope, median};
use wpl_core::tomography::{
    bootstrap_wpl, fit_affine_map, noise_matched_delta, probe_pairs, run_tomography,
    ChannelUnderTest, PipelineConfig, ProbeSet,
};
use wpl_core::vqe::problem::REPORTED_GROUND_ENERGY;
use wpl_core::vqe::{
    reference_wpl, run_ablation, run_vqe, AblationKind, OptimizerConfig, OptimizerKind, VqeProblem,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn to_na(m: &Mat) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)])
}

fn from_na(m: &DMatrix<f64>) -> Mat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn random_orthogonal(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0)).qr().q()
}

fn idle(kind: ChannelKind) -> ChannelUnderTest {
    ChannelUnderTest::idle(1, NoiseModel::IdleOnly(make_channel(kind).unwrap()))
}

// ------------------------------------------------------------------ 1

fn ground_energy() -> Outcome {
    let p = VqeProblem::reference_instance();
    let e = exact_ground_energy(&p.hamiltonian).unwrap();
    // Closed form: H splits into parity blocks {00,11} and {01,10}.
    let (zi, iz, zz, xx, yy): (f64, f64, f64, f64, f64) = (0.32, -0.77, 1.10, 0.85, -0.40);
    let even = zz - ((zi + iz).powi(2) + (xx - yy).powi(2)).sqrt();
    let odd = -zz - ((zi - iz).powi(2) + (xx + yy).powi(2)).sqrt();
    let oracle = even.min(odd);
    let diff = (e - REPORTED_GROUND_ENERGY).abs();
    outcome(
        diff <= 1e-9,
        format!(
            "computed {e:.13} (closed form {oracle:.13}), stated {REPORTED_GROUND_ENERGY:.13}, |diff| = {diff:.3e}"
        ),
    )
}

// ------------------------------------------------------------------ 2

fn curvature_constant() -> Outcome {
    let r09 = scalar_curvature(0.9).unwrap();
    let r1 = scalar_curvature(1.0).unwrap();
    outcome(
        (r09 - 2.4691358).abs() <= 1e-6 && r1 == 2.0,
        format!("R(0.9) = {r09:.10}, R(1) = {r1}"),
    )
}

// ------------------------------------------------------------------ 3

fn channel_oracles() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..=20 {
        let x = i as f64 / 20.0;
        for kind in [
            ChannelKind::Dephasing(0.5 * x),
            ChannelKind::Depolarizing(x),
            ChannelKind::AmplitudeDamping(x),
        ] {
            // Closed-form maps written out here, not taken from the library.
            let (d, c) = match kind {
                ChannelKind::Dephasing(p) => ([1.0 - 2.0 * p, 1.0 - 2.0 * p, 1.0], [0.0; 3]),
                ChannelKind::Depolarizing(p) => ([1.0 - p; 3], [0.0; 3]),
                ChannelKind::AmplitudeDamping(g) => {
                    ([(1.0 - g).sqrt(), (1.0 - g).sqrt(), 1.0 - g], [0.0, 0.0, g])
                }
                ChannelKind::Identity => unreachable!(),
            };
            let m = channel_to_bloch_map(&make_channel(kind).unwrap()).unwrap();
            let a = kind.analytic_bloch_map();
            for r in 0..3 {
                for s in 0..3 {
                    let want = if r == s { d[r] } else { 0.0 };
                    worst = worst.max((m.t[r][s] - want).abs()).max((a.t[r][s] - want).abs());
                }
                worst = worst.max((m.c[r] - c[r]).abs()).max((a.c[r] - c[r]).abs());
            }
        }
    }
    let ad = channel_to_bloch_map(&make_channel(ChannelKind::AmplitudeDamping(0.2)).unwrap()).unwrap();
    let ad_ok = (ad.t[0][0] - 0.894427).abs() < 1e-6
        && (ad.t[1][1] - 0.894427).abs() < 1e-6
        && (ad.t[2][2] - 0.8).abs() < 1e-12
        && (ad.c[2] - 0.2).abs() < 1e-12
        && ad.c[0].abs() < 1e-12
        && ad.c[1].abs() < 1e-12;
    outcome(
        worst <= 1e-12 && ad_ok,
        format!(
            "max deviation {worst:.2e} over 63 channels; AD(0.2) T = diag({:.6}, {:.6}, {:.6}), c = ({:.1e}, {:.1e}, {:.6})",
            ad.t[0][0], ad.t[1][1], ad.t[2][2], ad.c[0], ad.c[1], ad.c[2]
        ),
    )
}

// ------------------------------------------------------------------ 4

fn tomography_recovery() -> Outcome {
    let channels = [
        ChannelKind::Identity,
        ChannelKind::Dephasing(0.1),
        ChannelKind::Depolarizing(0.2),
        ChannelKind::AmplitudeDamping(0.2),
    ];
    let mut worst_exact = 0.0f64;
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        for kind in [
            ChannelKind::Identity,
            ChannelKind::Dephasing(0.5 * x),
            ChannelKind::Depolarizing(x),
            ChannelKind::AmplitudeDamping(x),
        ] {
            let rec = run_tomography(&idle(kind), &ProbeSet::minimal(), None, &SeedStream::new(0)).unwrap();
            let (a, b) = probe_pairs(&rec).unwrap();
            let fit = fit_affine_map(&a, &b).unwrap();
            worst_exact = worst_exact.max(fit.map.max_abs_diff(&kind.analytic_bloch_map()));
        }
    }
    let ns = [1_000u64, 4_000, 16_000, 64_000];
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let mut pass = worst_exact <= 1e-10;
    let mut parts = vec![format!("exact max error {worst_exact:.1e}")];
    for kind in channels {
        let truth = kind.analytic_bloch_map();
        let med = |n: u64| {
            let e: Vec<f64> = (0..50u64)
                .map(|s| {
                    let rec = run_tomography(&idle(kind), &ProbeSet::minimal(), Some(n), &SeedStream::new(s)).unwrap();
                    let (a, b) = probe_pairs(&rec).unwrap();
                    fit_affine_map(&a, &b).unwrap().map.t_frobenius_distance(&truth)
                })
                .collect();
            median(&e)
        };
        let m4096 = med(4096);
        let meds: Vec<f64> = ns.iter().map(|&n| med(n)).collect();
        let slope = log_log_slope(&x, &meds);
        pass &= m4096 < 0.05 && (slope + 0.5).abs() <= 0.15;
        parts.push(format!("{kind}: median {m4096:.4}, slope {slope:.3}"));
    }
    outcome(pass, parts.join("; "))
}

// ------------------------------------------------------------------ 5

fn pseudoinverse_axioms() -> Outcome {
    let tau = 1e-3;
    let cfg = PseudoInverseConfig::new(tau).unwrap();
    let mut rng = SeedStream::new(5).rng();
    let (mut worst, mut miscounted) = (0.0f64, 0);
    for _ in 0..100 {
        let n = rng.random_range(1..=8);
        let q = random_orthogonal(n, &mut rng);
        // Eigenvalues a decade away from τ on either side, some exactly 0.
        let lam: Vec<f64> = (0..n)
            .map(|_| match rng.random_range(0..3) {
                0 => 0.0,
                1 => rng.random_range(0.0..tau / 10.0),
                _ => rng.random_range(10.0 * tau..10.0),
            })
            .collect();
        let f = &q * DMatrix::from_diagonal(&DVector::from_vec(lam.clone())) * q.transpose();
        let f = 0.5 * (&f + f.transpose());
        let sp = spectral_pinv(&from_na(&f), &cfg).unwrap();
        let clipped = sp.retained.iter().filter(|&&r| !r).count();
        if clipped != lam.iter().filter(|&&l| l < tau).count() {
            miscounted += 1;
        }
        let p = to_na(&sp.pinv);
        let proj = to_na(&sp.retained_projector());
        worst = worst.max((&f * &p * &f - &proj * &f * &proj).abs().max());
        // Oracle: nalgebra eigendecomposition, thresholded by hand.
        let eig = SymmetricEigen::new(f.clone());
        let inv = eig.eigenvalues.map(|l| if l >= tau { 1.0 / l } else { 0.0 });
        let oracle = &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose();
        worst = worst.max((&p - &oracle).abs().max() * tau);
    }
    outcome(
        worst <= 1e-10 && miscounted == 0,
        format!("max ‖FF⁺F − PFP‖ = {worst:.2e}; clip-count mismatches {miscounted}/100"),
    )
}

// ------------------------------------------------------------------ 6

fn woodbury_equivalence() -> Outcome {
    let mut rng = SeedStream::new(6).rng();
    let (mut worst, mut done) = (0.0f64, 0);
    while done < 50 {
        let n = rng.random_range(2..=8);
        let k = rng.random_range(1..=2);
        let q = random_orthogonal(n, &mut rng);
        let lam = DVector::from_fn(n, |_, _| rng.random_range(0.5..2.0));
        let f = &q * DMatrix::from_diagonal(&lam) * q.transpose();
        let u = DMatrix::from_fn(n, k, |_, _| rng.random_range(-0.4..0.4));
        let v = DMatrix::from_fn(n, k, |_, _| rng.random_range(-0.4..0.4));
        let full = &f + &u * v.transpose();
        let Some(oracle) = full.clone().try_inverse() else { continue };
        if oracle.norm() * full.norm() > 1e6 {
            continue;
        }
        let f_inv = from_na(&f.clone().try_inverse().unwrap());
        let corr = LowRankCorrection::new(from_na(&u), from_na(&v)).unwrap();
        let w = woodbury_pinv(&f_inv, &corr).unwrap();
        worst = worst.max((to_na(&w) - oracle).abs().max());
        done += 1;
    }
    outcome(worst <= 1e-8, format!("max deviation from dense inverse {worst:.2e} over 50 instances"))
}

// ------------------------------------------------------------------ 7

fn step_bounds() -> Outcome {
    let (eta, tau, c) = (0.05, 1e-3, 1.0);
    let mut rng = SeedStream::new(7).rng();
    let (mut violations, mut checked, mut out_of_range) = (0, 0, 0);
    for _ in 0..50 {
        let w = WplParams::from_ratio(rng.random_range(0.2..1.4), rng.random_range(0.3..1.0), Convention::Sec5).unwrap();
        let theta = rng.random_range(0.0..PI);
        let block = wpl_metric(theta, &w).as_mat();
        let bounds = step_size_bounds(&block, eta, tau, c, w.r).unwrap();
        if !bounds.holds() {
            out_of_range += 1;
        }
        let sp = spectral_pinv(&block, &PseudoInverseConfig::new(tau).unwrap()).unwrap();
        if !sp.retained.iter().any(|&r| r) {
            continue;
        }
        for _ in 0..100 {
            let g: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g = project_to_retained(&sp, &g);
            if g.iter().all(|x| *x == 0.0) {
                continue;
            }
            checked += 1;
            let ratio = effective_step_ratio(&sp.pinv, eta, &g);
            if !(ratio >= eta / (c * w.r) * (1.0 - 1e-12) && ratio <= eta / tau * (1.0 + 1e-12)) {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0 && checked >= 4000,
        format!("{violations} violations in {checked} retained-span gradients; {out_of_range} blocks with eigenvalues above C·R"),
    )
}

// ------------------------------------------------------------------ 8

fn orbifold_area_check() -> Outcome {
    let area = orbifold_area(1.0, 1.0).unwrap();
    let sphere = WplParams::sphere(Convention::Sec5);
    let k = scalar_curvature(sphere.b).unwrap() / 2.0;
    // Composite Simpson in θ; the integrand is φ-independent, so the φ
    // integral is an exact factor 2π.
    let n = 2000;
    let h = PI / n as f64;
    let integrand = |t: f64| {
        let g = wpl_metric(t, &sphere).g;
        k * (g[0][0] * g[1][1] - g[0][1] * g[1][0]).max(0.0).sqrt()
    };
    let mut s = integrand(0.0) + integrand(PI);
    for i in 1..n {
        s += integrand(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let quad = 2.0 * PI * s * h / 3.0;
    outcome(
        (area - 4.0 * PI).abs() <= 1e-12 && (quad - area).abs() <= 1e-6,
        format!("area(1,1) = {area:.14}, ∫K dA = {quad:.10}"),
    )
}

// ------------------------------------------------------------------ 9

fn coverage(delta: f64, trials: u64) -> u64 {
    let shots = 4096;
    let mut geometry = GeometryConfig::new(Convention::Sec5);
    geometry.delta = delta;
    let cfg = PipelineConfig::new(geometry);
    let mut covered = 0;
    for t in 0..trials {
        let p = 0.1 + 0.25 * t as f64 / (trials - 1) as f64;
        let rec = run_tomography(&idle(ChannelKind::Dephasing(p)), &ProbeSet::minimal(), Some(shots), &SeedStream::new(9_000 + t)).unwrap();
        let rep = bootstrap_wpl(&rec, 500, &cfg, &SeedStream::new(19_000 + t)).unwrap();
        if rep.ci.b.contains(1.0 - 2.0 * p) {
            covered += 1;
        }
    }
    covered
}

fn bootstrap_coverage() -> Outcome {
    let delta = noise_matched_delta(4096);
    let covered = coverage(delta, 100);
    outcome(
        covered >= 88,
        format!("{covered}/100 intervals contain b = 1 − 2p (p ∈ [0.1, 0.35], δ = {delta:.4}, B = 500)"),
    )
}

// ----------------------------------------------------------------- 10

fn vqe_convergence() -> (Outcome, String) {
    let problem = VqeProblem::reference_instance();
    let wpl = reference_wpl(Convention::Sec5);
    let exact = OptimizerConfig {
        shots: None,
        seed: 1337,
        ..OptimizerConfig::default()
    };
    let mut parts = Vec::new();
    let mut a = true;
    for kind in OptimizerKind::ALL {
        let t = run_vqe(&problem, &exact.with_kind(kind), &wpl, None).unwrap();
        let (i, f) = (t.initial_abs_error().unwrap(), t.final_abs_error().unwrap());
        a &= f < i && t.rows.len() == 81;
        parts.push(format!("{kind} {i:.4}→{f:.4}"));
    }
    let ratio_of = |base: &OptimizerConfig| {
        let runs = run_ablation(AblationKind::NaiveInverse, &problem, base, &wpl).unwrap();
        let get = |l: &str| runs.iter().find(|r| r.label == l).unwrap().trace.max_step_norm();
        get("naive") / get("thresholded")
    };
    let ratio = ratio_of(&exact);
    let b = ratio >= 10.0;
    let iso = run_ablation(AblationKind::Isotropic, &problem, &exact, &wpl).unwrap();
    let iso_trace = &iso.iter().find(|r| r.label == "isotropic").unwrap().trace;
    let c = iso_trace.all_finite() && iso_trace.aborted.is_none() && iso_trace.rows.len() == 81;
    let euclid = &iso.iter().find(|r| r.label == "euclid").unwrap().trace;
    let shot_ratio = ratio_of(&OptimizerConfig::default());
    let info = format!(
        "shot mode (S = 4096) naive/thresholded step ratio {shot_ratio:.0}×; isotropic final error {:.4} vs euclid {:.4} (recorded, not asserted)",
        iso_trace.final_abs_error().unwrap(),
        euclid.final_abs_error().unwrap()
    );
    (
        outcome(
            a && b && c,
            format!(
                "(a) {} [{}]; (b) {} naive/thresholded max step ratio {ratio:.2}× (need ≥ 10×); (c) {} isotropic trace finite",
                if a { "ok" } else { "FAIL" },
                parts.join(", "),
                if b { "ok" } else { "FAIL" },
                if c { "ok" } else { "FAIL" },
            ),
        ),
        info,
    )
}

// ----------------------------------------------------------------- 11

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let pairs = |s: &[(&str, &str)]| s.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect::<Vec<_>>();
    let commands = [
        (Command::Tomo, pairs(&[("channel", "amplitude_damping:0.1")])),
        (Command::Drift, pairs(&[("channel", "dephasing:0.05")])),
        (Command::Vqe, pairs(&[("drift", "on")])),
        (Command::Ablate, pairs(&[])),
    ];
    let mut mismatches = Vec::new();
    let mut files = 0;
    for (cmd, layer) in commands {
        let cfg = RunConfig::resolve(cmd, &[layer]).unwrap();
        let first = tmp.path().join(format!("{cmd}-first"));
        let again = tmp.path().join(format!("{cmd}-again"));
        run_and_emit(&cfg, &first).unwrap();
        replay(&first.join("manifest.json"), &again).unwrap();
        let (a, b) = (dir_bytes(&first), dir_bytes(&again));
        files += a.len();
        if a != b {
            mismatches.push(cmd.to_string());
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("tomo, drift, vqe, ablate replayed from manifests: {files} files byte-identical")
        } else {
            format!("replay differs for {}", mismatches.join(", "))
        },
    )
}

// ----------------------------------------------------------------- 12

fn degeneracy_rule() -> Outcome {
    let classify = |s: [f64; 3]| {
        let reg = svd_regularize(&Mat::from_diag(&s), 1e-4).unwrap();
        extract_contractions(&reg, 0.01)
    };
    let b2 = classify([0.99, 0.5, 0.5]);
    let b1 = classify([0.9, 0.9, 0.9]);
    let npc = classify([0.9, 0.6, 0.3]);
    let ok = b2.branch == Branch::TrailingPair
        && (b2.lambda_perp - 0.5).abs() < 1e-12
        && (b2.lambda_par - 0.99).abs() < 1e-12
        && b1.branch == Branch::LeadingPair
        && (b1.lambda_perp - 0.9).abs() < 1e-12
        && (b1.lambda_par - 0.9).abs() < 1e-12
        && !npc.phase_covariant
        && npc.branch == Branch::NonPhaseCovariant;
    outcome(
        ok,
        format!(
            "(0.99,0.5,0.5) → branch {} λ⊥={} λ∥={}; (0.9,0.9,0.9) → branch {}; (0.9,0.6,0.3) → phase_covariant={}",
            b2.branch.number(),
            b2.lambda_perp,
            b2.lambda_par,
            b1.branch.number(),
            npc.phase_covariant
        ),
    )
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut report = |n: u32, name: &str, limit: Option<Duration>, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let mut o = f();
        let took = start.elapsed();
        if let Some(l) = limit {
            if took > l {
                o.pass = false;
                o.detail.push_str(&format!(" [runtime {took:.2?} exceeds {l:?}]"));
            }
        }
        if !o.pass {
            failures += 1;
        }
        println!(
            "criterion {n:>2} {} {name} — {} ({took:.2?})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    };
    report(1, "ground energy", Some(Duration::from_secs(1)), &ground_energy);
    report(2, "curvature constant", None, &curvature_constant);
    report(3, "channel oracles", None, &channel_oracles);
    report(4, "tomography recovery", Some(Duration::from_secs(30)), &tomography_recovery);
    report(5, "pseudoinverse axioms", None, &pseudoinverse_axioms);
    report(6, "woodbury equivalence", None, &woodbury_equivalence);
    report(7, "step-size bounds", None, &step_bounds);
    report(8, "orbifold area", None, &orbifold_area_check);
    report(9, "bootstrap coverage", Some(Duration::from_secs(120)), &bootstrap_coverage);
    let info = std::cell::RefCell::new(String::new());
    report(10, "vqe convergence", Some(Duration::from_secs(300)), &|| {
        let (o, i) = vqe_convergence();
        *info.borrow_mut() = i;
        o
    });
    println!("             info: {}", info.borrow());
    report(11, "determinism", None, &determinism);
    report(12, "degeneracy rule", None, &degeneracy_rule);
    println!(
        "             info: bootstrap coverage at the default δ = 0.01 is {}/100",
        coverage(0.01, 100)
    );
    if failures == 0 {
        println!("acceptance: all 12 criteria PASS");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} of 12 criteria FAIL");
        ExitCode::FAILURE
    }
}
