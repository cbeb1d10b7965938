//! Statistical properties of the sampling, tomography and bootstrap layers.
//! Every check uses fixed seeds, so the outcomes are reproducible.

use wpl_core::geometry::{Convention, GeometryConfig};
use wpl_core::quantum::{
    bloch_to_density, channel_to_bloch_map, make_channel, sample_counts, Basis, BlochVector,
    ChannelKind, NoiseModel,
};
use wpl_core::rng::SeedStream;
use wpl_core::stats::{log_log_slope, mean, median};
use wpl_core::tomography::{
    bootstrap_wpl, fit_affine_map, noise_matched_delta, probe_pairs, run_tomography,
    ChannelUnderTest, PipelineConfig, ProbeSet, TomographyRecord,
};
use wpl_core::vqe::{drift_experiment, Evaluator, VqeProblem};

fn idle(kind: ChannelKind) -> ChannelUnderTest {
    ChannelUnderTest::idle(1, NoiseModel::IdleOnly(make_channel(kind).unwrap()))
}

#[test]
fn sample_mean_error_shrinks_like_inverse_root_n() {
    let r = BlochVector::new(0.0, 0.0, 0.3);
    let rho = bloch_to_density(&r).unwrap();
    let ns = [1_000u64, 3_000, 10_000, 30_000, 100_000];
    let errs: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let e: Vec<f64> = (0..200u64)
                .map(|s| {
                    let mut rng = SeedStream::new(s).child(&[n]).rng();
                    (sample_counts(&rho, Basis::Z, n, &mut rng).unwrap().expectation() - 0.3).abs()
                })
                .collect();
            mean(&e)
        })
        .collect();
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&x, &errs);
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}, errors {errs:?}");
}

#[test]
fn tomography_error_shrinks_like_inverse_root_n() {
    let kind = ChannelKind::AmplitudeDamping(0.2);
    let truth = channel_to_bloch_map(&make_channel(kind).unwrap()).unwrap();
    let ch = idle(kind);
    let ns = [1_000u64, 4_000, 16_000, 64_000];
    let meds: Vec<f64> = ns
        .iter()
        .map(|&n| {
            let e: Vec<f64> = (0..50u64)
                .map(|s| {
                    let rec = run_tomography(&ch, &ProbeSet::minimal(), Some(n), &SeedStream::new(s)).unwrap();
                    let (i, o) = probe_pairs(&rec).unwrap();
                    fit_affine_map(&i, &o).unwrap().map.t_frobenius_distance(&truth)
                })
                .collect();
            median(&e)
        })
        .collect();
    let x: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&x, &meds);
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}, medians {meds:?}");
    assert!(meds[1] < 0.05);
}

fn subset(rec: &TomographyRecord, labels: &[&str]) -> TomographyRecord {
    TomographyRecord {
        probes: rec.probes.iter().filter(|e| labels.contains(&e.label.as_str())).cloned().collect(),
        ..rec.clone()
    }
}

#[test]
fn overcomplete_design_is_at_least_as_accurate_in_most_seeds() {
    let kinds = [
        ChannelKind::Dephasing(0.1),
        ChannelKind::Depolarizing(0.2),
        ChannelKind::AmplitudeDamping(0.2),
    ];
    let mut wins = 0;
    let mut total = 0;
    for kind in kinds {
        let truth = channel_to_bloch_map(&make_channel(kind).unwrap()).unwrap();
        let ch = idle(kind);
        for s in 0..100u64 {
            let rec = run_tomography(&ch, &ProbeSet::overcomplete(), Some(4096), &SeedStream::new(s)).unwrap();
            let err = |r: &TomographyRecord| {
                let (i, o) = probe_pairs(r).unwrap();
                let m = fit_affine_map(&i, &o).unwrap().map;
                let dc: f64 = m.c.iter().zip(&truth.c).map(|(a, b)| (a - b).powi(2)).sum();
                (m.t_frobenius_distance(&truth).powi(2) + dc).sqrt()
            };
            let six = err(&rec);
            let four = err(&subset(&rec, &["0", "1", "+", "+y"]));
            total += 1;
            if six <= four {
                wins += 1;
            }
        }
    }
    assert!(wins as f64 >= 0.9 * total as f64, "{wins}/{total}");
}

#[test]
fn bootstrap_intervals_cover_the_true_contraction() {
    let shots = 4096;
    let mut geometry = GeometryConfig::new(Convention::Sec5);
    geometry.delta = noise_matched_delta(shots);
    let cfg = PipelineConfig::new(geometry);
    let mut covered = 0;
    let trials = 40;
    for t in 0..trials {
        let p = 0.1 + 0.25 * t as f64 / (trials - 1) as f64;
        let rec = run_tomography(&idle(ChannelKind::Dephasing(p)), &ProbeSet::minimal(), Some(shots), &SeedStream::new(t)).unwrap();
        let rep = bootstrap_wpl(&rec, 200, &cfg, &SeedStream::new(1000 + t)).unwrap();
        if rep.ci.b.contains(1.0 - 2.0 * p) {
            covered += 1;
        }
    }
    assert!(covered as f64 >= 0.85 * trials as f64, "{covered}/{trials}");
}

#[test]
fn static_drift_spread_matches_bootstrap_error() {
    // Depolarizing keeps all singular values together, away from the
    // degeneracy-rule boundary where the estimate of b jumps and the
    // bootstrap spread is dominated by branch changes.
    let ch = ChannelUnderTest::idle(5, NoiseModel::IdleOnly(make_channel(ChannelKind::Depolarizing(0.02)).unwrap()));
    let mut geometry = GeometryConfig::new(Convention::Sec5);
    geometry.delta = noise_matched_delta(4096);
    let cfg = PipelineConfig::new(geometry);
    let drift = drift_experiment(&ch, 40, Some(4096), 0.2, &cfg, &SeedStream::new(3)).unwrap();
    let rec = run_tomography(&ch, &ProbeSet::minimal(), Some(4096), &SeedStream::new(4)).unwrap();
    let boot = bootstrap_wpl(&rec, 400, &cfg, &SeedStream::new(5)).unwrap();
    let ratio = drift.std_b / boot.samples_summary.std.b;
    assert!((0.5..2.0).contains(&ratio), "drift std {} vs bootstrap se {}", drift.std_b, boot.samples_summary.std.b);
}

#[test]
fn shot_energy_variance_matches_binomial_prediction() {
    let problem = VqeProblem::reference_instance();
    let shots = 1024;
    let noisy = Evaluator::new(&problem, Some(ChannelKind::Dephasing(0.05)), Some(shots)).unwrap();
    let exact = Evaluator::new(&problem, Some(ChannelKind::Dephasing(0.05)), None).unwrap();
    let theta = problem.theta0.clone();
    let terms = exact.term_expectations(&theta).unwrap();
    let predicted: f64 = problem
        .hamiltonian
        .terms()
        .iter()
        .zip(&terms)
        .map(|(t, v)| t.coeff * t.coeff * (1.0 - v * v) / shots as f64)
        .sum();
    let samples: Vec<f64> = (0..600u64)
        .map(|s| noisy.energy(&theta, &SeedStream::new(s)).unwrap())
        .collect();
    let m = mean(&samples);
    let var = samples.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (samples.len() - 1) as f64;
    assert!((var / predicted - 1.0).abs() < 0.2, "variance {var} vs predicted {predicted}");
    let e0 = exact.exact_energy(&theta).unwrap();
    assert!((m - e0).abs() < 4.0 * (predicted / samples.len() as f64).sqrt());
}
