//! Executes one scenario end to end: distribution, the three CGF routes,
//! bound families, sampling checks, the explicit battery construction and
//! the resource-theoretic bounds; then writes machine-readable outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::battery::{
    battery_tpm, build_conditional_shift, cgf_battery_identity, tilde_rho, transition_map,
    BatteryLadder,
};
use crate::bridge::{
    eps_deterministic_work, evaluate_bridge, irr_entropy_bound_family, tail_bound_check,
};
use crate::divergences::renyi;
use crate::dynamics::{build_unitary, evolve};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{gibbs, ThermoPotentials};
use crate::resource::{
    alpha_free_energy_curve, det_work_bound, formation_work_estimate, pure_battery_renyi_check,
};
use crate::workstats::tpm_distribution;

use super::config::{OutputFormat, ScenarioConfig};
use super::models::build_protocol;
use super::report::{
    echo_config, BatteryReport, ResourceReport, RunReport, SamplingReport, TailCheckRow,
};

/// One hard contract: `value` compared against `threshold`.
#[derive(Debug, Clone)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    /// `"max"`: pass iff `value <= threshold`; `"min"`: pass iff
    /// `value >= threshold`.
    pub kind: &'static str,
    pub pass: bool,
}

impl Check {
    fn max(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.to_owned(),
            value,
            threshold,
            kind: "max",
            pass: value <= threshold,
        }
    }

    fn min(name: &str, value: f64, threshold: f64) -> Check {
        Check {
            name: name.to_owned(),
            value,
            threshold,
            kind: "min",
            pass: value >= threshold,
        }
    }
}

/// Eta factors (in units of beta) swept by the battery CGF identity check.
const BATTERY_ETA_FACTORS: [f64; 8] = [-1.5, -0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 1.5];

/// `k` values for the Chebyshev tail checks.
const TAIL_KS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(text) = std::env::var("QWORK_THREADS") {
        if let Ok(n) = text.trim().parse::<usize>() {
            if n > 0 {
                builder = builder.num_threads(n);
            }
        }
    }
    builder
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

/// Runs the scenario and writes its outputs under the configured directory.
///
/// Partial results are flushed with a `failed` marker if a stage errors. The
/// returned report's [`RunReport::passed`] decides the process exit status:
/// zero iff every hard residual contract holds.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunReport> {
    let mut report = RunReport::new(&cfg.name, echo_config(cfg));
    let started = Instant::now();
    let pool = worker_pool()?;
    let outcome = pool.install(|| run_stages(cfg, &mut report));

    report.meta.total_ms = started.elapsed().as_millis() as u64;
    report.meta.unix_time_s = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    if let Err(err) = outcome {
        report.failed = Some(err.to_string());
        write_outputs(cfg, &report)?;
        return Err(err.in_scenario(&cfg.name, "pipeline"));
    }
    write_outputs(cfg, &report)?;
    Ok(report)
}

fn run_stages(cfg: &ScenarioConfig, report: &mut RunReport) -> Result<()> {
    let beta = cfg.beta;
    let protocol = build_protocol(cfg)?;
    let g0 = gibbs(protocol.h0(), beta)?;
    let g_tau = gibbs(protocol.htau(), beta)?;
    let pots = ThermoPotentials::from_endpoints(beta, &g0, &g_tau)?;
    let rho0 = g0.state.clone();
    let u = build_unitary(&protocol)?;
    let rho_tau = evolve(&rho0, &u)?;
    let distribution = tpm_distribution(&rho0, &protocol, None)?;
    report.distribution = Some(distribution.clone());

    // Bridge sweep.
    let bridge_started = Instant::now();
    let bridge = evaluate_bridge(&rho0, &protocol, beta, &cfg.eta_grid)?;
    report.meta.bridge_ms = bridge_started.elapsed().as_millis() as u64;

    let mut checks = Vec::new();
    {
        let r = &bridge.residuals;
        checks.push(Check::max("cgf_fcs_agreement", r.cgf_fcs_max, 1e-8));
        checks.push(Check::max("cgf_renyi_agreement", r.cgf_renyi_max, 1e-8));
        checks.push(Check::max("jarzynski_endpoint", r.jarzynski, 1e-9));
        checks.push(Check::max(
            "irr_entropy_identity",
            r.irr_entropy_identity,
            1e-9,
        ));
        checks.push(Check::max(
            "variance_relative_entropy",
            r.variance_relative_entropy,
            1e-8,
        ));
        checks.push(Check::max(
            "variance_derivative",
            r.variance_derivative,
            1e-4,
        ));
        checks.push(Check::min(
            "lower_bounds_valid",
            r.lower_bound_min_slack,
            -1e-9,
        ));
        checks.push(Check::min(
            "upper_bounds_valid",
            r.upper_bound_min_slack,
            -1e-9,
        ));
        checks.push(Check::min(
            "irr_bound_family_valid",
            r.irr_bound_min_slack,
            -1e-9,
        ));
        checks.push(Check::min(
            "renyi_upper_regime",
            r.renyi_upper_regime_min_slack,
            -1e-9,
        ));
        checks.push(Check::min("second_law", r.second_law_slack, -1e-10));
    }

    // Sampling stage.
    if let Some(sampling_cfg) = &cfg.sampling {
        let sampling_started = Instant::now();
        let samples = distribution.sample(sampling_cfg.n_samples, sampling_cfg.seed)?;

        let mut tail_checks = Vec::new();
        let mut worst_tail_excess = f64::NEG_INFINITY;
        let mut any_zero_variance = false;
        for k in TAIL_KS {
            let t = tail_bound_check(&distribution, k, Some(&samples))?;
            any_zero_variance |= t.zero_variance;
            if !t.zero_variance {
                worst_tail_excess = worst_tail_excess.max(t.exact_tail - t.bound);
            }
            tail_checks.push(TailCheckRow {
                k,
                threshold: t.threshold,
                bound: t.bound,
                exact_tail: t.exact_tail,
                empirical_tail: t.empirical_tail.unwrap_or(0.0),
                zero_variance: t.zero_variance,
            });
        }
        if !any_zero_variance {
            checks.push(Check::max("tail_bounds", worst_tail_excess, 1e-12));
        }

        let eps = sampling_cfg.eps;
        let n_copies = sampling_cfg.n_copies;
        let trials = sampling_cfg.trials;
        let eps_work = eps_deterministic_work(&distribution, n_copies, eps)?;
        let draws = distribution.sample(n_copies * trials, sampling_cfg.seed.wrapping_add(1))?;
        let exceed = draws
            .samples()
            .chunks(n_copies)
            .filter(|chunk| chunk.iter().sum::<f64>() > eps_work)
            .count() as f64
            / trials as f64;
        let exceed_threshold = eps + 3.0 * (eps / trials as f64).sqrt();
        checks.push(Check::max(
            "eps_work_exceed_frequency",
            exceed - exceed_threshold,
            0.0,
        ));

        let formation_work =
            formation_work_estimate(&rho_tau, protocol.htau(), beta, n_copies, eps, None)?;

        report.sampling = Some(SamplingReport {
            n_samples: sampling_cfg.n_samples,
            seed: sampling_cfg.seed,
            empirical_mean: samples.mean(),
            tail_checks,
            eps,
            n_copies,
            trials,
            eps_work,
            exceed_frequency: exceed,
            exceed_threshold,
            formation_work,
        });
        report.meta.sampling_ms = sampling_started.elapsed().as_millis() as u64;
    }

    // Battery stage.
    if let Some(battery_cfg) = &cfg.battery {
        let battery_started = Instant::now();
        let ladder = BatteryLadder::new(battery_cfg.dim_b, battery_cfg.delta)?;
        let v = transition_map(&protocol)?;
        let shift_unitary = build_conditional_shift(&v, protocol.h0(), protocol.htau(), &ladder)?;
        let constraints = shift_unitary.verify(battery_cfg.margin)?;

        let battery_distribution = battery_tpm(&rho0, battery_cfg.j0, &shift_unitary, None)?;
        let (tpm_work_residual, tpm_prob_residual) =
            distribution_match(&distribution, &battery_distribution);

        let mut cgf_identity = Vec::new();
        let mut cgf_identity_max = 0.0_f64;
        for factor in BATTERY_ETA_FACTORS {
            let eta = factor * beta;
            let id = cgf_battery_identity(&rho0, battery_cfg.j0, &shift_unitary, &pots, eta)?;
            cgf_identity_max = cgf_identity_max.max(id.residual);
            cgf_identity.push((eta, id.residual, id.tilde_trace));
        }

        // Product test of the evolved joint state, and the tilde reduction
        // when it is one.
        let joint0 = rho0
            .entries()
            .kronecker(&rung_projector(battery_cfg.dim_b, battery_cfg.j0));
        let joint_tau = shift_unitary.unitary().entries()
            * joint0
            * shift_unitary.unitary().entries().adjoint();
        let reduced_s = linalg::partial_trace_b(&joint_tau, rho0.dim(), battery_cfg.dim_b);
        let reduced_b = partial_trace_system(&joint_tau, rho0.dim(), battery_cfg.dim_b);
        let product = reduced_s.kronecker(&reduced_b);
        let product_deviation = linalg::max_abs_diff(&joint_tau, &product);
        let product_final_state = product_deviation < 1e-10;
        let tilde_reduction_residual = if product_final_state {
            let mut worst = 0.0_f64;
            for factor in BATTERY_ETA_FACTORS {
                let gamma = 1.0 - factor;
                let tilde = tilde_rho(&rho0, battery_cfg.j0, &shift_unitary, gamma)?;
                worst = worst.max(linalg::max_abs_diff(tilde.entries(), &reduced_s));
            }
            Some(worst)
        } else {
            None
        };

        let pure_battery = pure_battery_renyi_check(
            battery_cfg.j0 as f64 * battery_cfg.delta,
            &ladder.hamiltonian(),
            beta,
            &cfg.alpha_grid,
        )?;
        let pure_battery_residual_max =
            pure_battery.iter().map(|&(_, r)| r).fold(0.0_f64, f64::max);

        checks.push(Check::max(
            "battery_unitarity",
            constraints.unitarity,
            1e-10,
        ));
        checks.push(Check::max(
            "battery_energy_conservation",
            constraints.energy_conservation,
            1e-9,
        ));
        checks.push(Check::max(
            "battery_displacement_covariance",
            constraints.displacement_covariance,
            1e-10,
        ));
        checks.push(Check::max(
            "battery_tpm_work_match",
            tpm_work_residual,
            1e-9,
        ));
        checks.push(Check::max(
            "battery_tpm_prob_match",
            tpm_prob_residual,
            1e-10,
        ));
        checks.push(Check::max("battery_cgf_identity", cgf_identity_max, 1e-8));
        if let Some(residual) = tilde_reduction_residual {
            checks.push(Check::max("tilde_product_reduction", residual, 1e-9));
        }
        checks.push(Check::max(
            "pure_battery_formula",
            pure_battery_residual_max,
            1e-10,
        ));

        report.battery = Some(BatteryReport {
            dim_b: battery_cfg.dim_b,
            delta: battery_cfg.delta,
            j0: battery_cfg.j0,
            margin: battery_cfg.margin,
            unitarity: constraints.unitarity,
            energy_conservation: constraints.energy_conservation,
            displacement_covariance: constraints.displacement_covariance,
            tpm_work_residual,
            tpm_prob_residual,
            cgf_identity,
            cgf_identity_max,
            product_final_state,
            tilde_reduction_residual,
            pure_battery_residual_max,
        });
        report.meta.battery_ms = battery_started.elapsed().as_millis() as u64;
    }

    // Resource stage.
    let resource_started = Instant::now();
    let curve = alpha_free_energy_curve(&rho_tau, protocol.htau(), beta, &cfg.alpha_grid)?;
    let s_alpha: Vec<f64> = cfg
        .alpha_grid
        .iter()
        .map(|&alpha| renyi(&rho_tau, &g_tau.state, alpha))
        .collect::<Result<Vec<_>>>()?;
    let det = det_work_bound(
        &rho0,
        &rho_tau,
        protocol.h0(),
        protocol.htau(),
        beta,
        &cfg.alpha_grid,
    )?;

    // Same divergence through the stochastic bound family at matched orders.
    let mut bound_family_match_max = 0.0_f64;
    for (k, alpha) in cfg.alpha_grid.iter().enumerate() {
        let a = alpha.value();
        if a > 0.0 && a < 1.0 {
            let eta = beta * (1.0 - a);
            let stochastic =
                irr_entropy_bound_family(&rho_tau, protocol.htau(), beta, &[eta])?[0].1;
            bound_family_match_max = bound_family_match_max.max((stochastic - s_alpha[k]).abs());
        }
    }

    // Monotonicity applies along finite Petz orders; the order-infinity
    // value is the max-relative entropy, which finite orders may overshoot.
    let f_alpha_monotonicity_min_step = cfg
        .alpha_grid
        .windows(2)
        .zip(curve.values.windows(2))
        .filter(|(orders, values)| {
            !orders[1].is_infinite() && values[0].is_finite() && values[1].is_finite()
        })
        .map(|(_, values)| values[1] - values[0])
        .fold(f64::INFINITY, f64::min);
    // A grid with fewer than two finite orders has nothing to compare.
    let monotonicity_check_value = if f_alpha_monotonicity_min_step.is_finite() {
        f_alpha_monotonicity_min_step
    } else {
        0.0
    };

    let det_vs_stochastic_slack = det.s_irr_det_bound - bridge.s_irr;
    checks.push(Check::max(
        "bound_family_match",
        bound_family_match_max,
        1e-10,
    ));
    checks.push(Check::min(
        "det_bound_dominates",
        det_vs_stochastic_slack,
        -1e-9,
    ));
    checks.push(Check::min(
        "alpha_free_energy_monotone",
        monotonicity_check_value,
        -1e-9,
    ));

    report.resource = Some(ResourceReport {
        alpha_grid: cfg.alpha_grid.clone(),
        s_alpha,
        f_alpha: curve.values.clone(),
        w_det_bound: det.w_det_bound,
        s_irr_det_bound: det.s_irr_det_bound,
        alpha_star: det.alpha_star,
        bound_family_match_max,
        det_vs_stochastic_slack,
        f_alpha_monotonicity_min_step,
    });
    report.meta.resource_ms = resource_started.elapsed().as_millis() as u64;

    report.bridge = Some(bridge);
    report.checks = checks;
    Ok(())
}

fn rung_projector(dim_b: usize, j0: usize) -> linalg::CMat {
    let mut m = linalg::CMat::zeros(dim_b, dim_b);
    m[(j0, j0)] = num_complex::Complex64::new(1.0, 0.0);
    m
}

/// Partial trace over the first (system) factor.
fn partial_trace_system(m: &linalg::CMat, dim_s: usize, dim_b: usize) -> linalg::CMat {
    let mut out = linalg::CMat::zeros(dim_b, dim_b);
    for j in 0..dim_b {
        for k in 0..dim_b {
            let mut acc = num_complex::Complex64::new(0.0, 0.0);
            for s in 0..dim_s {
                acc += m[(s * dim_b + j, s * dim_b + k)];
            }
            out[(j, k)] = acc;
        }
    }
    out
}

/// Worst atom-for-atom deviation (work values, probabilities) between two
/// distributions; infinite if the atom counts differ.
fn distribution_match(
    a: &crate::workstats::WorkDistribution,
    b: &crate::workstats::WorkDistribution,
) -> (f64, f64) {
    if a.atoms().len() != b.atoms().len() {
        return (f64::INFINITY, f64::INFINITY);
    }
    let mut dw = 0.0_f64;
    let mut dp = 0.0_f64;
    for (x, y) in a.atoms().iter().zip(b.atoms()) {
        dw = dw.max((x.work - y.work).abs());
        dp = dp.max((x.probability - y.probability).abs());
    }
    (dw, dp)
}

fn sanitize(name: &str) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect();
    if cleaned.is_empty() {
        "scenario".to_owned()
    } else {
        cleaned
    }
}

/// Output file paths for a scenario under `dir`.
pub(crate) fn output_paths(cfg: &ScenarioConfig, dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let stem = sanitize(&cfg.name);
    (
        dir.join(format!("{stem}_report.json")),
        dir.join(format!("{stem}_cgf.csv")),
        dir.join(format!("{stem}_alpha.csv")),
    )
}

fn write_outputs(cfg: &ScenarioConfig, report: &RunReport) -> Result<()> {
    let dir = PathBuf::from(&cfg.output.path);
    std::fs::create_dir_all(&dir)?;
    let (json_path, cgf_path, alpha_path) = output_paths(cfg, &dir);
    std::fs::write(&json_path, report.to_json())?;
    if cfg.output.format == OutputFormat::Csv {
        if let Some(csv) = report.cgf_csv() {
            std::fs::write(&cgf_path, csv)?;
        }
        if let Some(csv) = report.alpha_csv() {
            std::fs::write(&alpha_path, csv)?;
        }
    }
    Ok(())
}
