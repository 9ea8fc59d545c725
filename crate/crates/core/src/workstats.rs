//! Two-point-measurement work statistics.
//!
//! The work distribution is the finite atom list
//! `p(W) = sum_{n,m} P[m,n] delta(W - (E_m - E_n))` with joint probabilities
//! `P[m,n] = Tr[P_m U P_n rho_0 P_n U† P_m]` over grouped eigenspaces of the
//! endpoint Hamiltonians. The first measurement dephases a general initial
//! state in the initial energy eigenbasis; thermal states commute and are
//! unaffected.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::dynamics::{build_unitary, Protocol};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operators::DensityMatrix;

/// Highest supported raw moment.
pub const MOMENT_CAP: usize = 8;

/// Sum-of-probabilities tolerance.
pub const NORMALIZATION_TOL: f64 = 1e-10;

/// Initial-state/initial-Hamiltonian commutator tolerance for the operator
/// form of the cumulant generating function.
pub const COMMUTATION_TOL: f64 = 1e-8;

/// One point mass of a work distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkAtom {
    pub work: f64,
    pub probability: f64,
}

/// Finite list of `(work, probability)` atoms, distinct after merging.
#[derive(Debug, Clone)]
pub struct WorkDistribution {
    atoms: Vec<WorkAtom>,
    merge_tol: f64,
}

impl WorkDistribution {
    /// Builds a distribution from raw atoms: clamps probability rounding
    /// noise, sorts by work value, merges values closer than `merge_tol`
    /// (probability-weighted mean) and checks normalization.
    ///
    /// `None` selects the default tolerance `1e-9 * (max|w| + 1)`.
    pub fn from_atoms(raw: Vec<(f64, f64)>, merge_tol: Option<f64>) -> Result<Self> {
        let mut cleaned: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (w, p) in raw {
            if p < -1e-12 {
                return Err(Error::NegativeProbability { probability: p });
            }
            if p > 0.0 {
                cleaned.push((w, p));
            }
        }
        if cleaned.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        cleaned.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite work values"));
        let w_max = cleaned.iter().fold(0.0_f64, |m, (w, _)| m.max(w.abs()));
        let tol = merge_tol.unwrap_or(1e-9 * (w_max + 1.0));

        let mut atoms: Vec<WorkAtom> = Vec::new();
        let mut cluster_w = cleaned[0].0 * cleaned[0].1;
        let mut cluster_p = cleaned[0].1;
        let mut last_w = cleaned[0].0;
        for &(w, p) in &cleaned[1..] {
            if w - last_w > tol {
                atoms.push(WorkAtom {
                    work: cluster_w / cluster_p,
                    probability: cluster_p,
                });
                cluster_w = 0.0;
                cluster_p = 0.0;
            }
            cluster_w += w * p;
            cluster_p += p;
            last_w = w;
        }
        atoms.push(WorkAtom {
            work: cluster_w / cluster_p,
            probability: cluster_p,
        });

        let total: f64 = atoms.iter().map(|a| a.probability).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized {
                total,
                tol: NORMALIZATION_TOL,
            });
        }
        Ok(WorkDistribution {
            atoms,
            merge_tol: tol,
        })
    }

    /// Deterministic work: a single atom carrying all probability.
    pub fn point_mass(work: f64) -> Self {
        WorkDistribution {
            atoms: vec![WorkAtom {
                work,
                probability: 1.0,
            }],
            merge_tol: 1e-9 * (work.abs() + 1.0),
        }
    }

    pub fn atoms(&self) -> &[WorkAtom] {
        &self.atoms
    }

    pub fn merge_tol(&self) -> f64 {
        self.merge_tol
    }

    /// `sum p w^k`; `k` is capped at [`MOMENT_CAP`].
    pub fn moment(&self, k: usize) -> Result<f64> {
        if k > MOMENT_CAP {
            return Err(Error::MomentOrder {
                order: k,
                cap: MOMENT_CAP,
            });
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| a.probability * a.work.powi(k as i32))
            .sum())
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.probability * a.work).sum()
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.atoms
            .iter()
            .map(|a| a.probability * (a.work - mean).powi(2))
            .sum()
    }

    /// First `up_to` cumulants (`1..=4`), computed from central moments.
    pub fn cumulants(&self, up_to: usize) -> Result<Vec<f64>> {
        if !(1..=4).contains(&up_to) {
            return Err(Error::CumulantOrder { order: up_to });
        }
        let mean = self.mean();
        let central = |k: i32| -> f64 {
            self.atoms
                .iter()
                .map(|a| a.probability * (a.work - mean).powi(k))
                .sum()
        };
        let mut out = vec![mean];
        if up_to >= 2 {
            out.push(central(2));
        }
        if up_to >= 3 {
            out.push(central(3));
        }
        if up_to >= 4 {
            out.push(central(4) - 3.0 * central(2).powi(2));
        }
        Ok(out)
    }

    /// Cumulant generating function `Phi(eta) = ln sum p exp(-eta w)`,
    /// evaluated with a max-shift so large `|eta|` cannot overflow.
    /// `Phi(0) = 0` exactly.
    pub fn cgf(&self, eta: f64) -> f64 {
        if eta == 0.0 {
            return 0.0;
        }
        let shift = self
            .atoms
            .iter()
            .map(|a| -eta * a.work)
            .fold(f64::NEG_INFINITY, f64::max);
        let total: f64 = self
            .atoms
            .iter()
            .map(|a| a.probability * (-eta * a.work - shift).exp())
            .sum();
        shift + total.ln()
    }

    /// Characteristic function `Theta(eta) = sum p exp(i eta w)`.
    pub fn characteristic(&self, eta: f64) -> Complex64 {
        self.atoms
            .iter()
            .map(|a| Complex64::from_polar(a.probability, eta * a.work))
            .sum()
    }

    /// `n` i.i.d. draws through the inverse CDF on a ChaCha stream keyed on
    /// `seed`; identical inputs give identical output.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SampleSet> {
        if n == 0 {
            return Err(Error::EmptySample);
        }
        let mut cdf = Vec::with_capacity(self.atoms.len());
        let mut acc = 0.0;
        for a in &self.atoms {
            acc += a.probability;
            cdf.push(acc);
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|_| {
                let u: f64 = rng.gen();
                let idx = cdf.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
                self.atoms[idx].work
            })
            .collect();
        Ok(SampleSet {
            samples,
            seed,
            source: format!(
                "{} atoms, merge_tol {:.3e}",
                self.atoms.len(),
                self.merge_tol
            ),
        })
    }
}

/// Seeded empirical draw from a [`WorkDistribution`].
#[derive(Debug, Clone)]
pub struct SampleSet {
    samples: Vec<f64>,
    seed: u64,
    source: String,
}

impl SampleSet {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// Two-point-measurement work distribution of a protocol started in `rho0`.
pub fn tpm_distribution(
    rho0: &DensityMatrix,
    protocol: &Protocol,
    merge_tol: Option<f64>,
) -> Result<WorkDistribution> {
    if rho0.dim() != protocol.dim() {
        return Err(Error::DimensionMismatch {
            left: rho0.dim(),
            right: protocol.dim(),
        });
    }
    let dec0 = protocol.h0().spectral();
    let dectau = protocol.htau().spectral();
    let u = build_unitary(protocol)?;

    // Everything in the two energy eigenbases: u_t[i,j] = <i_tau|U|j_0>.
    let u_t = dectau.basis().adjoint() * u.entries() * dec0.basis();
    let rho_t = dec0.basis().adjoint() * rho0.entries() * dec0.basis();

    let mut raw = Vec::with_capacity(dec0.eigenvalues.len() * dectau.eigenvalues.len());
    for (gn, range_n) in dec0.groups().iter().enumerate() {
        for (gm, range_m) in dectau.groups().iter().enumerate() {
            let mut p = 0.0;
            for i in range_m.clone() {
                for j in range_n.clone() {
                    for jp in range_n.clone() {
                        p += (u_t[(i, j)] * rho_t[(j, jp)] * u_t[(i, jp)].conj()).re;
                    }
                }
            }
            raw.push((dectau.eigenvalues[gm] - dec0.eigenvalues[gn], p));
        }
    }
    WorkDistribution::from_atoms(raw, merge_tol)
}

/// Cumulant generating function in the operator (full-counting-statistics)
/// form: the evolution is dressed with half-sided exponential tilts of the
/// endpoint Hamiltonians and the trace taken,
/// `Phi(eta) = ln Tr[ e^{-eta H_tau/2} U e^{eta H_0/2} rho_0 e^{eta H_0/2} U† e^{-eta H_tau/2} ]`.
///
/// Requires the initial state to commute with the initial Hamiltonian (the
/// dephasing of the first projective measurement is then a no-op).
pub fn cgf_fcs(rho0: &DensityMatrix, protocol: &Protocol, eta: f64) -> Result<f64> {
    if rho0.dim() != protocol.dim() {
        return Err(Error::DimensionMismatch {
            left: rho0.dim(),
            right: protocol.dim(),
        });
    }
    let h0 = protocol.h0();
    let comm = rho0.entries() * h0.entries() - h0.entries() * rho0.entries();
    let residual = linalg::max_abs(&comm);
    if residual > COMMUTATION_TOL {
        return Err(Error::NonCommutingInitialState { residual });
    }
    let tilt0 = h0.apply(|e| (0.5 * eta * e).exp())?;
    let tilttau = protocol.htau().apply(|e| (-0.5 * eta * e).exp())?;
    let u = build_unitary(protocol)?;

    let inner = tilt0.entries() * rho0.entries() * tilt0.entries();
    let dressed =
        tilttau.entries() * u.entries() * inner * u.entries().adjoint() * tilttau.entries();
    Ok(linalg::trace_re(&dressed).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Drive, UnitaryOperator};
    use crate::linalg::CMat;
    use crate::operators::{gibbs, HermitianOperator};
    use crate::random;

    pub(crate) fn flip_protocol() -> Protocol {
        let h = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let sx = UnitaryOperator::new(CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        ))
        .unwrap();
        Protocol::new(h.clone(), h, Drive::Explicit(sx)).unwrap()
    }

    pub(crate) fn flip_distribution() -> WorkDistribution {
        let g = gibbs(flip_protocol().h0(), 1.0).unwrap();
        tpm_distribution(&g.state, &flip_protocol(), None).unwrap()
    }

    /// Ground population of the two-level Gibbs state at beta = 1, gap 1.
    fn p_ground() -> f64 {
        1.0 / (1.0 + (-1.0_f64).exp())
    }

    #[test]
    fn flip_atoms_match_two_level_oracle() {
        // Oracle: p_n |<m|U|n>|^2 for the closed-form two-level case.
        let d = flip_distribution();
        let atoms = d.atoms();
        assert_eq!(atoms.len(), 2);
        assert!((atoms[0].work - (-1.0)).abs() < 1e-12);
        assert!((atoms[0].probability - (1.0 - p_ground())).abs() < 1e-12);
        assert!((atoms[1].work - 1.0).abs() < 1e-12);
        assert!((atoms[1].probability - p_ground()).abs() < 1e-12);
    }

    #[test]
    fn trivial_quench_is_a_point_mass_at_zero() {
        let h = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let p = Protocol::new(h.clone(), h, Drive::SuddenQuench).unwrap();
        let rho = random::density_matrix(2, 4).unwrap();
        let d = tpm_distribution(&rho, &p, None).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert!((d.atoms()[0].work).abs() < 1e-12);
        assert!((d.atoms()[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_shift_merges_to_single_atom() {
        // All transitions carry the same gap change 0.5.
        let h0 = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let htau = h0.shifted(0.5);
        let p = Protocol::new(h0.clone(), htau, Drive::SuddenQuench).unwrap();
        let g = gibbs(&h0, 1.0).unwrap();
        let d = tpm_distribution(&g.state, &p, None).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert!((d.atoms()[0].work - 0.5).abs() < 1e-12);
        assert!((d.atoms()[0].probability - 1.0).abs() < 1e-12);
    }

    #[test]
    fn moments_of_flip_distribution() {
        let d = flip_distribution();
        let mean_oracle = 2.0 * p_ground() - 1.0; // (p+ - p-) * 1
        assert!((d.moment(1).unwrap() - mean_oracle).abs() < 1e-12);
        assert!((d.moment(0).unwrap() - 1.0).abs() < 1e-12);
        assert!((d.moment(2).unwrap() - 1.0).abs() < 1e-12); // w^2 = 1 on both atoms
        assert!(matches!(d.moment(9), Err(Error::MomentOrder { .. })));
    }

    #[test]
    fn cumulants_flip_and_point_mass() {
        let d = flip_distribution();
        let mean = 2.0 * p_ground() - 1.0;
        let k = d.cumulants(4).unwrap();
        assert!((k[0] - mean).abs() < 1e-12);
        assert!((k[1] - (1.0 - mean * mean)).abs() < 1e-12);

        let pm = WorkDistribution::point_mass(0.5);
        let kp = pm.cumulants(2).unwrap();
        assert!((kp[0] - 0.5).abs() < 1e-15);
        assert!(kp[1].abs() < 1e-15);

        let sym = WorkDistribution::from_atoms(vec![(-1.0, 0.5), (1.0, 0.5)], None).unwrap();
        let ks = sym.cumulants(2).unwrap();
        assert!(ks[0].abs() < 1e-15);
        assert!((ks[1] - 1.0).abs() < 1e-15);

        assert!(matches!(d.cumulants(5), Err(Error::CumulantOrder { .. })));
        assert!(matches!(d.cumulants(0), Err(Error::CumulantOrder { .. })));
    }

    #[test]
    fn cumulants_match_cgf_derivatives() {
        // Cross-check: (-1)^n d^n Phi / d eta^n at 0 by central differences.
        let d = flip_distribution();
        let k = d.cumulants(4).unwrap();
        let h = 1e-4;
        let d1 = (d.cgf(h) - d.cgf(-h)) / (2.0 * h);
        let d2 = (d.cgf(h) - 2.0 * d.cgf(0.0) + d.cgf(-h)) / (h * h);
        assert!((k[0] + d1).abs() < 1e-5);
        assert!((k[1] - d2).abs() < 1e-5);
        // Wider stencils for the third and fourth derivatives; the step
        // balances the O(h^2) truncation term against roundoff in the
        // sixfold cancellation.
        let h = 2e-3;
        let d3 = (d.cgf(2.0 * h) - 2.0 * d.cgf(h) + 2.0 * d.cgf(-h) - d.cgf(-2.0 * h))
            / (2.0 * h * h * h);
        let d4 = (d.cgf(2.0 * h) - 4.0 * d.cgf(h) + 6.0 * d.cgf(0.0) - 4.0 * d.cgf(-h)
            + d.cgf(-2.0 * h))
            / (h * h * h * h);
        assert!((k[2] + d3).abs() < 1e-5);
        assert!((k[3] - d4).abs() < 1e-5);
    }

    #[test]
    fn higher_cumulants_scalar_oracle() {
        // Symmetric two-atom distribution at +-1: central moments are
        // mu2 = mu4 = 1, mu3 = 0, so k3 = 0 and k4 = 1 - 3 = -2.
        let sym = WorkDistribution::from_atoms(vec![(-1.0, 0.5), (1.0, 0.5)], None).unwrap();
        let k = sym.cumulants(4).unwrap();
        assert!(k[2].abs() < 1e-15);
        assert!((k[3] + 2.0).abs() < 1e-15);

        // Asymmetric pair, oracle evaluated by explicit sums.
        let d = WorkDistribution::from_atoms(vec![(0.0, 0.25), (2.0, 0.75)], None).unwrap();
        let mean = 1.5_f64;
        let mu = |p: i32| 0.25 * (0.0_f64 - mean).powi(p) + 0.75 * (2.0_f64 - mean).powi(p);
        let k = d.cumulants(4).unwrap();
        assert!((k[0] - mean).abs() < 1e-15);
        assert!((k[1] - mu(2)).abs() < 1e-15);
        assert!((k[2] - mu(3)).abs() < 1e-15);
        assert!((k[3] - (mu(4) - 3.0 * mu(2) * mu(2))).abs() < 1e-15);
    }

    #[test]
    fn cgf_direct_flip_values() {
        let d = flip_distribution();
        // Jarzynski point: dF = 0 for the flip, so Phi(beta) = 0.
        assert!(d.cgf(1.0).abs() < 1e-12);
        assert_eq!(d.cgf(0.0), 0.0);
        // Oracle: ln(p+ e^{-1/2} + p- e^{1/2}) = ln 2 - 1/2 - ln(1 + e^{-1}).
        let oracle = 2.0_f64.ln() - 0.5 - (1.0 + (-1.0_f64).exp()).ln();
        assert!((d.cgf(0.5) - oracle).abs() < 1e-12);
        assert!((oracle - (-0.120_114_506_958_277_5)).abs() < 1e-12);
    }

    #[test]
    fn cgf_is_convex_on_eta_grid() {
        let d = flip_distribution();
        let beta = 1.0;
        let pts: Vec<f64> = (0..61).map(|i| -3.0 * beta + 0.1 * i as f64).collect();
        for w in pts.windows(3) {
            let second = d.cgf(w[2]) - 2.0 * d.cgf(w[1]) + d.cgf(w[0]);
            assert!(second >= -1e-8);
        }
    }

    #[test]
    fn characteristic_function_values() {
        let d = flip_distribution();
        assert!((d.characteristic(0.0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        // Both atoms sit at w = +-1: Theta(pi) = -1.
        let theta = d.characteristic(std::f64::consts::PI);
        assert!((theta - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
        // Real work values: Theta(-eta) = conj(Theta(eta)).
        let r = random::density_matrix(3, 8).unwrap();
        let p = random::commensurate_protocol(3, 0.5, 6, 3).unwrap();
        let dr = tpm_distribution(&r, &p, None).unwrap();
        for eta in [0.3, 1.7] {
            let fwd = dr.characteristic(eta);
            let bwd = dr.characteristic(-eta);
            assert!((bwd - fwd.conj()).norm() < 1e-12);
        }
    }

    #[test]
    fn fcs_form_matches_direct_form() {
        let p = flip_protocol();
        let g = gibbs(p.h0(), 1.0).unwrap();
        let d = flip_distribution();
        for eta in [-2.0, -1.0, -0.5, 0.25, 0.5, 1.0, 2.0] {
            let fcs = cgf_fcs(&g.state, &p, eta).unwrap();
            assert!((fcs - d.cgf(eta)).abs() < 1e-9, "eta = {eta}");
        }
        // eta = 0 is trace preservation.
        assert!(cgf_fcs(&g.state, &p, 0.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn fcs_uniform_shift_is_linear_in_eta() {
        let h0 = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let htau = h0.shifted(0.5);
        let p = Protocol::new(h0.clone(), htau, Drive::SuddenQuench).unwrap();
        let g = gibbs(&h0, 1.0).unwrap();
        let phi = cgf_fcs(&g.state, &p, 2.0).unwrap();
        assert!((phi - (-1.0)).abs() < 1e-12);
    }

    #[test]
    fn fcs_agrees_for_random_thermal_protocols() {
        let beta = 0.8;
        for (dim, seed) in [(2usize, 10u64), (3, 11), (4, 12)] {
            let p = random::commensurate_protocol(dim, 0.5, 8, seed).unwrap();
            let g = gibbs(p.h0(), beta).unwrap();
            let d = tpm_distribution(&g.state, &p, None).unwrap();
            for factor in [-2.0, -1.0, -0.5, 0.25, 0.5, 1.0, 2.0] {
                let eta = factor * beta;
                let fcs = cgf_fcs(&g.state, &p, eta).unwrap();
                assert!(
                    (fcs - d.cgf(eta)).abs() < 1e-9,
                    "dim {dim} seed {seed} eta {eta}"
                );
            }
        }
    }

    #[test]
    fn fcs_rejects_noncommuting_initial_state() {
        let p = flip_protocol();
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5, 0.0),
                Complex64::new(0.3, 0.1),
                Complex64::new(0.3, -0.1),
                Complex64::new(0.5, 0.0),
            ],
        );
        let rho = DensityMatrix::new(m).unwrap();
        assert!(matches!(
            cgf_fcs(&rho, &p, 0.5),
            Err(Error::NonCommutingInitialState { .. })
        ));
    }

    #[test]
    fn jarzynski_holds_for_thermal_scenarios() {
        let beta = 1.4;
        for seed in [5, 6, 7] {
            let p = random::commensurate_protocol(3, 0.25, 10, seed).unwrap();
            let g0 = gibbs(p.h0(), beta).unwrap();
            let gtau = gibbs(p.htau(), beta).unwrap();
            let d = tpm_distribution(&g0.state, &p, None).unwrap();
            let delta_f = gtau.free_energy - g0.free_energy;
            assert!((d.cgf(beta) + beta * delta_f).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_matches_cgf_slope() {
        let d = flip_distribution();
        let h = 1e-5;
        let slope = (d.cgf(h) - d.cgf(-h)) / (2.0 * h);
        assert!((d.moment(1).unwrap() + slope).abs() < 1e-6);
    }

    #[test]
    fn sampling_is_deterministic_and_supported_on_atoms() {
        let d = flip_distribution();
        let a = d.sample(1000, 42).unwrap();
        let b = d.sample(1000, 42).unwrap();
        assert_eq!(a.samples(), b.samples());
        for &w in a.samples() {
            assert!(d.atoms().iter().any(|atom| (atom.work - w).abs() < 1e-15));
        }

        let pm = WorkDistribution::point_mass(0.5);
        let s = pm.sample(10, 7).unwrap();
        assert!(s.samples().iter().all(|&w| w == 0.5));
    }

    #[test]
    fn sample_mean_approaches_distribution_mean() {
        let d = flip_distribution();
        let s = d.sample(100_000, 42).unwrap();
        assert!((s.mean() - d.mean()).abs() < 0.01);
    }

    #[test]
    fn merge_tolerance_keeps_atoms_separated() {
        let d =
            WorkDistribution::from_atoms(vec![(0.0, 0.25), (1e-12, 0.25), (1.0, 0.5)], Some(1e-9))
                .unwrap();
        assert_eq!(d.atoms().len(), 2);
        for w in d.atoms().windows(2) {
            assert!(w[1].work - w[0].work > d.merge_tol());
        }
    }

    #[test]
    fn distribution_rejects_bad_input() {
        assert!(matches!(
            WorkDistribution::from_atoms(vec![(0.0, -0.5), (1.0, 1.5)], None),
            Err(Error::NegativeProbability { .. })
        ));
        assert!(matches!(
            WorkDistribution::from_atoms(vec![(0.0, 0.4)], None),
            Err(Error::NotNormalized { .. })
        ));
    }
}
