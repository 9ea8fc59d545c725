//! Resource-theoretic free energies and deterministic-work bounds.
//!
//! The alpha-free energy `F_a(rho, G) = -(ln Z - S_a(rho||G))/beta` turns the
//! Renyi family into a family of generalized second laws: every order bounds
//! the deterministic work of a state transition, the supremum over orders
//! (attained at `alpha = infinity` for thermal-to-nonequilibrium transitions)
//! being the tightest. A pure battery eigenstate makes each of these bounds
//! collapse to `beta E + ln Z_B`, which is the consistency check wiring the
//! explicit ladder into the same family.

use crate::divergences::{relative_entropy, relative_entropy_variance, renyi, AlphaValue};
use crate::error::{Error, Result};
use crate::operators::{gibbs, DensityMatrix, HermitianOperator};

/// `F_a(rho, G(H)) = -(1/beta)[ln Z - S_a(rho || G(H))]`.
///
/// Reduces to the equilibrium free energy `-ln(Z)/beta` at `rho = G` for
/// every order; support violations surface as `+infinity`.
pub fn alpha_free_energy(
    rho: &DensityMatrix,
    h: &HermitianOperator,
    beta: f64,
    alpha: AlphaValue,
) -> Result<f64> {
    let g = gibbs(h, beta)?;
    let s = renyi(rho, &g.state, alpha)?;
    Ok(-(g.partition.ln() - s) / beta)
}

/// Alpha-free-energy values over a grid, with the largest finite value.
#[derive(Debug, Clone)]
pub struct AlphaFreeEnergyCurve {
    pub alpha_grid: Vec<AlphaValue>,
    pub values: Vec<f64>,
    pub supremum_bound: f64,
}

pub fn alpha_free_energy_curve(
    rho: &DensityMatrix,
    h: &HermitianOperator,
    beta: f64,
    alpha_grid: &[AlphaValue],
) -> Result<AlphaFreeEnergyCurve> {
    if alpha_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut values = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        values.push(alpha_free_energy(rho, h, beta, alpha)?);
    }
    let supremum_bound = values
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(AlphaFreeEnergyCurve {
        alpha_grid: alpha_grid.to_vec(),
        values,
        supremum_bound,
    })
}

/// Deterministic-work bound over an alpha grid.
#[derive(Debug, Clone)]
pub struct DetWorkReport {
    /// `sup_a [F_a(rho_tau, G_tau) - F_a(rho_0, G_0)]`.
    pub w_det_bound: f64,
    /// `beta (w_det_bound - dF)`; equals `sup_a S_a(rho_tau || G_tau)` for a
    /// thermal initial state.
    pub s_irr_det_bound: f64,
    /// Order attaining the supremum on the grid.
    pub alpha_star: AlphaValue,
    /// Orders excluded because a support violation made them infinite.
    pub excluded: Vec<AlphaValue>,
}

/// Orders that every grid must contain.
const REQUIRED_ALPHAS: [(f64, &str); 5] = [
    (0.0, "0"),
    (0.5, "0.5"),
    (1.0, "1"),
    (2.0, "2"),
    (f64::INFINITY, "inf"),
];

pub fn det_work_bound(
    rho0: &DensityMatrix,
    rho_tau: &DensityMatrix,
    h0: &HermitianOperator,
    htau: &HermitianOperator,
    beta: f64,
    alpha_grid: &[AlphaValue],
) -> Result<DetWorkReport> {
    for (required, name) in REQUIRED_ALPHAS {
        let present = alpha_grid.iter().any(|a| {
            if required.is_infinite() {
                a.is_infinite()
            } else {
                (a.value() - required).abs() < 1e-12
            }
        });
        if !present {
            return Err(Error::AlphaGridIncomplete { missing: name });
        }
    }
    let g0 = gibbs(h0, beta)?;
    let g_tau = gibbs(htau, beta)?;
    let delta_f = g_tau.free_energy - g0.free_energy;

    let mut best: Option<(AlphaValue, f64)> = None;
    let mut excluded = Vec::new();
    for &alpha in alpha_grid {
        let initial = alpha_free_energy(rho0, h0, beta, alpha)?;
        let fin = alpha_free_energy(rho_tau, htau, beta, alpha)?;
        let diff = fin - initial;
        if !diff.is_finite() {
            excluded.push(alpha);
            continue;
        }
        match best {
            Some((_, current)) if current >= diff => {}
            _ => best = Some((alpha, diff)),
        }
    }
    let (alpha_star, w_det_bound) = best.ok_or(Error::AllAlphaExcluded)?;
    Ok(DetWorkReport {
        w_det_bound,
        s_irr_det_bound: beta * (w_det_bound - delta_f),
        alpha_star,
        excluded,
    })
}

/// Residuals of `S_a(|E><E| || G_B) = beta E + ln Z_B` over the alpha grid.
///
/// For a ladder eigenstate against the full-rank ladder Gibbs state the
/// formula holds at every order, including the 0, 1 and infinity limits.
pub fn pure_battery_renyi_check(
    energy: f64,
    h_b: &HermitianOperator,
    beta: f64,
    alpha_grid: &[AlphaValue],
) -> Result<Vec<(AlphaValue, f64)>> {
    if alpha_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let dec = h_b.spectral();
    let radius = dec.eigenvalues.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    let tol = 1e-9 * (radius + 1.0);
    let column = dec
        .column_eigenvalues()
        .iter()
        .position(|&e| (e - energy).abs() <= tol)
        .ok_or(Error::EigenvalueNotInSpectrum { value: energy })?;
    let ket: Vec<_> = (0..h_b.dim()).map(|i| dec.basis()[(i, column)]).collect();
    let state = DensityMatrix::pure(&ket)?;

    let g = gibbs(h_b, beta)?;
    let expected = beta * energy + g.partition.ln();
    alpha_grid
        .iter()
        .map(|&alpha| {
            let s = renyi(&state, &g.state, alpha)?;
            Ok((alpha, (s - expected).abs()))
        })
        .collect()
}

/// Standard-normal quantile (Acklam's rational approximation, relative error
/// below 1.2e-9).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile argument must be in (0,1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.38357751867269e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Plug-in estimate of the work of forming `n` copies of `rho` against the
/// thermal background of `H`:
/// `(n D(rho||G) + sqrt(n V(rho||G)) f(eps)) / beta`.
///
/// `f` defaults to the `(1-eps)`-quantile of the standard normal; any
/// positive-valued override can be supplied.
pub fn formation_work_estimate(
    rho: &DensityMatrix,
    h: &HermitianOperator,
    beta: f64,
    n: usize,
    eps: f64,
    f: Option<&dyn Fn(f64) -> f64>,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidCopies);
    }
    if eps.is_nan() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::InvalidEpsilon { eps });
    }
    let g = gibbs(h, beta)?;
    let d = relative_entropy(rho, &g.state)?;
    let v = relative_entropy_variance(rho, &g.state)?;
    let quantile = match f {
        Some(func) => func(eps),
        None => normal_quantile(1.0 - eps),
    };
    Ok((n as f64 * d + (n as f64 * v).sqrt() * quantile) / beta)
}
