//! Browser bindings for the demo page in `www/`.
//!
//! Every export takes plain numbers/strings and returns a JSON string, so
//! the page needs no generated TypeScript types. Errors surface as a thrown
//! JS string.

use serde::Serialize;
use std::f64::consts::PI;
use wasm_bindgen::prelude::*;

use wpl_core::geometry::{
    contractions_from_singular_values, orbifold_area, wpl_from_contractions, wpl_metric, Convention,
    GeometryConfig, WplParams, WplReport,
};
use wpl_core::quantum::{make_channel, ChannelKind, NoiseModel};
use wpl_core::rng::SeedStream;
use wpl_core::tomography::{
    bootstrap_wpl, estimate_wpl, noise_matched_delta, run_tomography, BootstrapReport,
    ChannelUnderTest, PipelineConfig, ProbeSet,
};
use wpl_core::vqe::{reference_wpl, run_vqe, OptimizerConfig, OptimizerKind, VqeProblem};

fn js_err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn to_json(v: &impl Serialize) -> Result<String, JsValue> {
    serde_json::to_string(v).map_err(js_err)
}

#[derive(Serialize)]
struct ProfilePoint {
    theta: f64,
    /// Radius of the circle of latitude, `√g_φφ`.
    rho: f64,
    /// Height along the axis of the embedded surface of revolution; `None`
    /// where the metric cannot be embedded isometrically in ℝ³.
    z: Option<f64>,
    g_theta_theta: f64,
    g_phi_phi: f64,
}

#[derive(Serialize)]
struct GeometryView {
    wpl: WplParams,
    branch: u8,
    area: f64,
    profile: Vec<ProfilePoint>,
}

/// Geometry explorer: WPL parameters, area and an embedded profile for a
/// phase-covariant channel with contractions `(λ⊥, λ∥)`.
#[wasm_bindgen]
pub fn explore_geometry(lambda_perp: f64, lambda_par: f64, convention: &str) -> Result<String, JsValue> {
    let convention: Convention = convention.parse().map_err(js_err)?;
    let mut s = [lambda_par, lambda_perp, lambda_perp];
    s.sort_by(|a, b| b.total_cmp(a));
    let c = contractions_from_singular_values(s, GeometryConfig::new(convention).delta);
    let wpl = wpl_from_contractions(&c, convention).map_err(js_err)?;
    let area = orbifold_area(wpl.a_over_b * wpl.b, wpl.b).map_err(js_err)?;

    let n = 180;
    let h = PI / n as f64;
    let mut profile = Vec::with_capacity(n + 1);
    let mut z = Some(0.0);
    let mut prev_rho = 0.0;
    for i in 0..=n {
        let theta = i as f64 * h;
        let g = wpl_metric(theta, &wpl).g;
        let rho = g[1][1].sqrt();
        if i > 0 {
            // dz² = g_θθ dθ² − dρ²; embedding fails once dρ outruns ds.
            let ds2 = g[0][0] * h * h;
            let dr = rho - prev_rho;
            z = match z {
                Some(z) if ds2 >= dr * dr => Some(z + (ds2 - dr * dr).sqrt()),
                _ => None,
            };
        }
        prev_rho = rho;
        profile.push(ProfilePoint {
            theta,
            rho,
            z,
            g_theta_theta: g[0][0],
            g_phi_phi: g[1][1],
        });
    }
    to_json(&GeometryView {
        wpl,
        branch: c.branch.number(),
        area,
        profile,
    })
}

#[derive(Serialize)]
struct TomographyView {
    t: [[f64; 3]; 3],
    c: [f64; 3],
    truth_t: [[f64; 3]; 3],
    truth_c: [f64; 3],
    report: WplReport,
    bootstrap: Option<BootstrapReport>,
    /// Bootstrap replicates of `b`, for the histogram.
    samples_b: Vec<f64>,
}

/// Four-probe tomography of a single-qubit channel, e.g.
/// `"amplitude_damping:0.2"`. `shots = 0` is exact mode (no bootstrap).
#[wasm_bindgen]
pub fn run_tomography_demo(channel: &str, shots: u32, replicates: u32, seed: u64) -> Result<String, JsValue> {
    let kind: ChannelKind = channel.parse().map_err(js_err)?;
    let ch = ChannelUnderTest::idle(1, NoiseModel::IdleOnly(make_channel(kind).map_err(js_err)?));
    let shots = (shots > 0).then_some(shots as u64);
    let mut geometry = GeometryConfig::new(Convention::Sec5);
    if let Some(n) = shots {
        geometry.delta = noise_matched_delta(n);
    }
    let cfg = PipelineConfig::new(geometry);
    let root = SeedStream::new(seed);
    let rec = run_tomography(&ch, &ProbeSet::minimal(), shots, &root.named("tomo")).map_err(js_err)?;
    let est = estimate_wpl(&rec, &cfg).map_err(js_err)?;
    let report = wpl_core::geometry::wpl_report(&est.fit.map.t_mat(), &geometry).map_err(js_err)?;
    let bootstrap = match shots {
        Some(_) if replicates >= 2 => {
            Some(bootstrap_wpl(&rec, replicates as usize, &cfg, &root.named("bootstrap")).map_err(js_err)?)
        }
        _ => None,
    };
    let samples_b = bootstrap
        .as_ref()
        .map(|b| b.samples.iter().map(|s| s.b).collect())
        .unwrap_or_default();
    let truth = kind.analytic_bloch_map();
    to_json(&TomographyView {
        t: est.fit.map.t,
        c: est.fit.map.c,
        truth_t: truth.t,
        truth_c: truth.c,
        report,
        bootstrap,
        samples_b,
    })
}

#[derive(Serialize)]
struct VqeSeries {
    optimizer: &'static str,
    abs_error: Vec<f64>,
    step_norm: Vec<f64>,
    aborted: Option<String>,
}

/// VQE on the two-qubit instance with all three optimizers.
/// `shots = 0` is exact mode.
#[wasm_bindgen]
pub fn run_vqe_demo(eta: f64, iterations: u32, shots: u32, seed: u64) -> Result<String, JsValue> {
    let problem = VqeProblem::reference_instance();
    let base = OptimizerConfig {
        eta,
        t_max: iterations as usize,
        shots: (shots > 0).then_some(shots as u64),
        seed,
        ..OptimizerConfig::default()
    };
    let wpl = reference_wpl(base.convention);
    let series = OptimizerKind::ALL
        .iter()
        .map(|&kind| {
            let t = run_vqe(&problem, &base.with_kind(kind), &wpl, None).map_err(js_err)?;
            Ok(VqeSeries {
                optimizer: kind.name(),
                abs_error: t.rows.iter().map(|r| r.abs_error).collect(),
                step_norm: t.rows.iter().map(|r| r.step_norm).collect(),
                aborted: t.aborted,
            })
        })
        .collect::<Result<Vec<_>, JsValue>>()?;
    to_json(&series)
}
