//! Identities and bounds connecting stochastic work statistics to Renyi
//! divergences.
//!
//! For a protocol started in the thermal state, the cumulant generating
//! function of work can be written three ways: directly over the atom list,
//! through the tilted-evolution trace, and as
//! `Phi(eta) = -(eta/beta) S_{1-eta/beta}(rho_tau || G_tau) - eta dF`.
//! Convexity of `Phi` then yields one-parameter bound families for the mean
//! work and the irreversible entropy, the second derivative at zero happens
//! at the relative entropy variance, and a Chebyshev-type tail estimate turns
//! the first two cumulants into a multi-copy near-deterministic work value.

use rayon::prelude::*;

use crate::divergences::{
    relative_entropy_psd, renyi_alpha_derivative_stabilized, renyi_order_psd,
};
use crate::dynamics::{build_unitary, evolve, Protocol};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::{gibbs, DensityMatrix, HermitianOperator, ThermoPotentials};
use crate::workstats::{cgf_fcs, tpm_distribution, SampleSet, WorkDistribution};

/// Grid magnitudes (in units of beta) for the default eta grid; both signs
/// are used, `0` and `beta` are excluded by construction.
pub const DEFAULT_ETA_FACTORS: [f64; 12] = [
    0.05, 0.1, 0.2, 0.35, 0.5, 0.75, 0.9, 1.1, 1.5, 1.75, 2.0, 2.5,
];

/// 24-point default grid `+-{factors} * beta`, ascending.
pub fn default_eta_grid(beta: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = DEFAULT_ETA_FACTORS
        .iter()
        .flat_map(|&f| [-f * beta, f * beta])
        .collect();
    grid.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
    grid
}

/// Default finite-difference step for the variance-via-derivative route.
pub const DEFAULT_ALPHA_STEP: f64 = 1e-4;

/// Tolerance for the thermal-initial-state check.
const THERMAL_TOL: f64 = 1e-8;

/// Cumulant generating function through the divergence identity:
/// `-(eta/beta) S_{1-eta/beta}(rho_tau || G(H_tau)) - eta dF`.
///
/// `eta = 0` and `eta = beta` are the two orders where the identity
/// degenerates; callers should use `Phi(0) = 0` and the fluctuation-theorem
/// value `-beta dF` there, and this function refuses them explicitly.
pub fn cgf_via_renyi(
    rho_tau: &DensityMatrix,
    h_tau: &HermitianOperator,
    pots: &ThermoPotentials,
    eta: f64,
) -> Result<f64> {
    let beta = pots.beta;
    if eta == 0.0 || eta == beta {
        return Err(Error::LimitPoint { eta, beta });
    }
    let g_tau = gibbs(h_tau, beta)?;
    let alpha = 1.0 - eta / beta;
    let s = renyi_order_psd(rho_tau.operator(), g_tau.state.operator(), alpha)?;
    Ok(-(eta / beta) * s - eta * pots.delta_f)
}

/// Bound families on `beta <W>` from convexity of the CGF.
///
/// Every `eta > 0` yields the lower bound `-(beta/eta) Phi(eta)` and every
/// `eta < 0` the upper bound `(beta/|eta|) Phi(eta)`; values are in the
/// dimensionless `beta <W>` normalization.
#[derive(Debug, Clone)]
pub struct MeanWorkBounds {
    pub lower: Vec<(f64, f64)>,
    pub upper: Vec<(f64, f64)>,
}

pub fn mean_work_bounds(
    phi: impl Fn(f64) -> f64,
    beta: f64,
    eta_grid: &[f64],
) -> Result<MeanWorkBounds> {
    if beta <= 0.0 || beta.is_nan() {
        return Err(Error::InvalidBeta { beta });
    }
    if eta_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for &eta in eta_grid {
        if eta == 0.0 {
            return Err(Error::EtaZeroInGrid);
        }
        let value = -(beta / eta) * phi(eta);
        if eta > 0.0 {
            lower.push((eta, value));
        } else {
            upper.push((eta, value));
        }
    }
    Ok(MeanWorkBounds { lower, upper })
}

/// Irreversible (dissipated) entropy `beta (<W> - dF)`.
pub fn irr_entropy(mean_work: f64, pots: &ThermoPotentials) -> f64 {
    pots.beta * (mean_work - pots.delta_f)
}

/// Lower-bound family on the irreversible entropy:
/// `S_{1-eta/beta}(rho_tau || G(H_tau))` for `eta` strictly inside
/// `(0, beta)`.
pub fn irr_entropy_bound_family(
    rho_tau: &DensityMatrix,
    h_tau: &HermitianOperator,
    beta: f64,
    eta_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if eta_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let g_tau = gibbs(h_tau, beta)?;
    eta_grid
        .iter()
        .map(|&eta| {
            if !(eta > 0.0 && eta < beta) {
                return Err(Error::EtaOutsideInterval { eta, beta });
            }
            let s = renyi_order_psd(rho_tau.operator(), g_tau.state.operator(), 1.0 - eta / beta)?;
            Ok((eta, s))
        })
        .collect()
}

/// The three routes to the work variance and their mutual residuals.
#[derive(Debug, Clone, Copy)]
pub struct VarianceBridge {
    /// Second cumulant of the work distribution.
    pub var_direct: f64,
    /// `(2/beta^2) dS_alpha/dalpha` at `alpha = 1` by bias-cancelled
    /// central differences.
    pub var_renyi_derivative: f64,
    /// `V(rho_tau || G_tau)/beta^2`.
    pub var_relative_entropy: f64,
    pub residual_derivative: f64,
    pub residual_relative_entropy: f64,
}

pub fn variance_bridge(
    distribution: &WorkDistribution,
    rho_tau: &DensityMatrix,
    h_tau: &HermitianOperator,
    beta: f64,
) -> Result<VarianceBridge> {
    let g_tau = gibbs(h_tau, beta)?;
    let var_direct = distribution.cumulants(2)?[1];
    let derivative = renyi_alpha_derivative_stabilized(rho_tau, &g_tau.state, DEFAULT_ALPHA_STEP)?;
    let var_renyi_derivative = 2.0 / (beta * beta) * derivative;
    let v = crate::divergences::relative_entropy_variance(rho_tau, &g_tau.state)?;
    let var_relative_entropy = v / (beta * beta);
    Ok(VarianceBridge {
        var_direct,
        var_renyi_derivative,
        var_relative_entropy,
        residual_derivative: (var_direct - var_renyi_derivative).abs(),
        residual_relative_entropy: (var_direct - var_relative_entropy).abs(),
    })
}

/// Chebyshev-type tail estimate `Pr[W >= <W> + k sigma_W] <= 1/k^2`
/// evaluated exactly over the atoms, optionally alongside an empirical
/// frequency from a sample set.
#[derive(Debug, Clone, Copy)]
pub struct TailBound {
    pub k: f64,
    pub threshold: f64,
    pub bound: f64,
    pub exact_tail: f64,
    pub empirical_tail: Option<f64>,
    /// Degenerate case: zero variance makes the threshold sit on the mean,
    /// so the tail is the full mass and the estimate carries no content.
    pub zero_variance: bool,
}

pub fn tail_bound_check(
    distribution: &WorkDistribution,
    k: f64,
    samples: Option<&SampleSet>,
) -> Result<TailBound> {
    if k <= 0.0 || !k.is_finite() {
        return Err(Error::InvalidEpsilon { eps: k });
    }
    let mean = distribution.mean();
    let var = distribution.variance().max(0.0);
    let sigma = var.sqrt();
    let zero_variance = sigma == 0.0;
    let threshold = mean + k * sigma;
    let exact_tail: f64 = distribution
        .atoms()
        .iter()
        .filter(|a| a.work >= threshold)
        .map(|a| a.probability)
        .sum();
    let empirical_tail = samples
        .map(|s| s.samples().iter().filter(|&&w| w >= threshold).count() as f64 / s.len() as f64);
    Ok(TailBound {
        k,
        threshold,
        bound: 1.0 / (k * k),
        exact_tail,
        empirical_tail,
        zero_variance,
    })
}

/// Work value exceeded with probability at most `eps` by the accumulated work
/// of `n` independent copies: `n (<W> + sqrt(Var(W)/(eps n)))`.
pub fn eps_deterministic_work(distribution: &WorkDistribution, n: usize, eps: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidCopies);
    }
    if eps.is_nan() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::InvalidEpsilon { eps });
    }
    let mean = distribution.mean();
    let var = distribution.variance().max(0.0);
    Ok(n as f64 * (mean + (var / (eps * n as f64)).sqrt()))
}

/// Residual summary of every identity and bound family checked by
/// [`evaluate_bridge`]. Residuals are absolute deviations; slacks are signed,
/// nonnegative when the corresponding inequality holds.
#[derive(Debug, Clone, Copy)]
pub struct BridgeResiduals {
    pub cgf_fcs_max: f64,
    pub cgf_renyi_max: f64,
    pub jarzynski: f64,
    pub irr_entropy_identity: f64,
    pub variance_relative_entropy: f64,
    pub variance_derivative: f64,
    pub lower_bound_min_slack: f64,
    pub upper_bound_min_slack: f64,
    pub irr_bound_min_slack: f64,
    pub renyi_upper_regime_min_slack: f64,
    pub second_law_slack: f64,
}

/// Everything the eta-grid sweep produces for one thermal-initial scenario.
#[derive(Debug, Clone)]
pub struct BridgeReport {
    pub eta_grid: Vec<f64>,
    pub phi_direct: Vec<f64>,
    pub phi_fcs: Vec<f64>,
    pub phi_renyi: Vec<f64>,
    /// `S_{1-eta/beta}(rho_tau || G_tau)` aligned with the grid.
    pub renyi_values: Vec<f64>,
    pub mean_work: f64,
    pub var_work: f64,
    pub s_irr: f64,
    pub pots: ThermoPotentials,
    /// Lower bounds on `beta <W>` (eta > 0 points).
    pub lower_bounds: Vec<(f64, f64)>,
    /// Upper bounds on `beta <W>` (eta < 0 points).
    pub upper_bounds: Vec<(f64, f64)>,
    /// Irreversible-entropy bounds over the grid points inside `(0, beta)`.
    pub irr_bounds: Vec<(f64, f64)>,
    pub variance: VarianceBridge,
    pub residuals: BridgeResiduals,
}

/// Runs the full identity/bound sweep for a protocol started in the thermal
/// state of its initial Hamiltonian. Grid points are evaluated in parallel.
pub fn evaluate_bridge(
    rho0: &DensityMatrix,
    protocol: &Protocol,
    beta: f64,
    eta_grid: &[f64],
) -> Result<BridgeReport> {
    if eta_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let g0 = gibbs(protocol.h0(), beta)?;
    let deviation = linalg::max_abs_diff(rho0.entries(), g0.state.entries());
    if deviation > THERMAL_TOL {
        return Err(Error::NotThermal { deviation });
    }
    let g_tau = gibbs(protocol.htau(), beta)?;
    let pots = ThermoPotentials::from_endpoints(beta, &g0, &g_tau)?;

    let distribution = tpm_distribution(rho0, protocol, None)?;
    let u = build_unitary(protocol)?;
    let rho_tau = evolve(rho0, &u)?;

    let rows: Vec<(f64, f64, f64, f64)> = eta_grid
        .par_iter()
        .map(|&eta| -> Result<(f64, f64, f64, f64)> {
            let direct = distribution.cgf(eta);
            let fcs = cgf_fcs(rho0, protocol, eta)?;
            let via_renyi = cgf_via_renyi(&rho_tau, protocol.htau(), &pots, eta)?;
            let s_value =
                renyi_order_psd(rho_tau.operator(), g_tau.state.operator(), 1.0 - eta / beta)?;
            Ok((direct, fcs, via_renyi, s_value))
        })
        .collect::<Result<Vec<_>>>()?;

    let phi_direct: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let phi_fcs: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let phi_renyi: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let renyi_values: Vec<f64> = rows.iter().map(|r| r.3).collect();

    let mean_work = distribution.mean();
    let s_irr = irr_entropy(mean_work, &pots);

    let bounds = mean_work_bounds(|eta| distribution.cgf(eta), beta, eta_grid)?;
    let inner: Vec<f64> = eta_grid
        .iter()
        .copied()
        .filter(|&eta| eta > 0.0 && eta < beta)
        .collect();
    let irr_bounds = irr_entropy_bound_family(&rho_tau, protocol.htau(), beta, &inner)?;
    let variance = variance_bridge(&distribution, &rho_tau, protocol.htau(), beta)?;

    let max_abs_diff_of = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0_f64, f64::max)
    };
    let jarzynski = (distribution.cgf(beta) + beta * pots.delta_f).abs();
    let d_check = relative_entropy_psd(rho_tau.operator(), g_tau.state.operator())?;
    let min_slack = |it: &mut dyn Iterator<Item = f64>| it.fold(f64::INFINITY, f64::min);

    let residuals = BridgeResiduals {
        cgf_fcs_max: max_abs_diff_of(&phi_direct, &phi_fcs),
        cgf_renyi_max: max_abs_diff_of(&phi_direct, &phi_renyi),
        jarzynski,
        irr_entropy_identity: (s_irr - d_check).abs(),
        variance_relative_entropy: variance.residual_relative_entropy,
        variance_derivative: variance.residual_derivative,
        lower_bound_min_slack: min_slack(
            &mut bounds.lower.iter().map(|&(_, b)| beta * mean_work - b),
        ),
        upper_bound_min_slack: min_slack(
            &mut bounds.upper.iter().map(|&(_, b)| b - beta * mean_work),
        ),
        irr_bound_min_slack: min_slack(&mut irr_bounds.iter().map(|&(_, b)| s_irr - b)),
        renyi_upper_regime_min_slack: min_slack(
            &mut eta_grid
                .iter()
                .zip(&renyi_values)
                .filter(|(&eta, _)| eta < 0.0)
                .map(|(_, &s)| s - s_irr),
        ),
        second_law_slack: mean_work - pots.delta_f,
    };

    Ok(BridgeReport {
        eta_grid: eta_grid.to_vec(),
        phi_direct,
        phi_fcs,
        phi_renyi,
        renyi_values,
        mean_work,
        var_work: variance.var_direct,
        s_irr,
        pots,
        lower_bounds: bounds.lower,
        upper_bounds: bounds.upper,
        irr_bounds,
        variance,
        residuals,
    })
}
