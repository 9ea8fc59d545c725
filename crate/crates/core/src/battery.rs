//! Explicit system-battery-switch realization of a driving protocol.
//!
//! A finite uniform ladder with cyclic shift operators stands in for the
//! continuous-position battery: the construction only needs shift covariance
//! and a definite initial rung, and staying inside a non-wrapping window
//! keeps the energy bookkeeping exact. A two-level switch register selects
//! which endpoint Hamiltonian governs the system, and a conditional-shift
//! unitary moves the ladder by exactly the system's energy change, so the
//! global picture is time-independent and energy-preserving. Work is read off
//! the battery: `W = -(E_B^final - E_B^initial)`, which reproduces the
//! system-side two-point-measurement statistics atom for atom.

use num_complex::Complex64;

use crate::divergences::renyi_order_psd;
use crate::dynamics::UnitaryOperator;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::{gibbs, DensityMatrix, HermitianOperator, ThermoPotentials};
use crate::workstats::WorkDistribution;

/// Relative tolerance for the spectral-gap commensurability check.
const COMMENSURABILITY_TOL: f64 = 1e-9;

/// Transition-map entries below this do not contribute a ladder shift.
const AMPLITUDE_TOL: f64 = 1e-14;

/// Max-entry tolerance for the thermal-initial-state precondition of the
/// battery CGF identity.
const THERMAL_TOL: f64 = 1e-8;

/// Finite uniform energy ladder `H_B = diag(j delta)` with cyclic shifts.
#[derive(Debug, Clone)]
pub struct BatteryLadder {
    dim_b: usize,
    delta: f64,
}

impl BatteryLadder {
    pub fn new(dim_b: usize, delta: f64) -> Result<Self> {
        if dim_b == 0 {
            return Err(Error::EmptyDimension);
        }
        if delta <= 0.0 || !delta.is_finite() {
            return Err(Error::InvalidDuration { duration: delta });
        }
        Ok(BatteryLadder { dim_b, delta })
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn hamiltonian(&self) -> HermitianOperator {
        let values: Vec<f64> = (0..self.dim_b).map(|j| j as f64 * self.delta).collect();
        HermitianOperator::from_diagonal(&values).expect("ladder diagonal is Hermitian")
    }

    /// Cyclic shift by `s` rungs: `|j> -> |(j+s) mod dim_b>`.
    pub fn shift(&self, s: i64) -> UnitaryOperator {
        UnitaryOperator::new(self.shift_matrix(s)).expect("cyclic shifts are unitary")
    }

    fn shift_matrix(&self, s: i64) -> CMat {
        let d = self.dim_b as i64;
        let mut m = CMat::zeros(self.dim_b, self.dim_b);
        for j in 0..d {
            let target = (j + s).rem_euclid(d);
            m[(target as usize, j as usize)] = Complex64::new(1.0, 0.0);
        }
        m
    }
}

/// Two-level control register with one rank-1 projector per protocol
/// endpoint.
#[derive(Debug, Clone)]
pub struct SwitchModel {
    labels: (String, String),
    basis: [Vec<Complex64>; 2],
}

impl SwitchModel {
    /// Computational-basis switch: the initial label sits on `|0>`, the final
    /// one on `|1>`.
    pub fn computational(initial: &str, fin: &str) -> Self {
        SwitchModel {
            labels: (initial.to_owned(), fin.to_owned()),
            basis: [
                vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
                vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
            ],
        }
    }

    pub fn labels(&self) -> (&str, &str) {
        (&self.labels.0, &self.labels.1)
    }

    pub fn projector(&self, which: usize) -> CMat {
        let v = &self.basis[which];
        CMat::from_fn(2, 2, |i, j| v[i] * v[j].conj())
    }

    fn ketbra(&self, ket: usize, bra: usize) -> CMat {
        let k = &self.basis[ket];
        let b = &self.basis[bra];
        CMat::from_fn(2, 2, |i, j| k[i] * b[j].conj())
    }
}

/// `H_S(l0) (x) P_{l0,C} + H_S(ltau) (x) P_{ltau,C} + H_B`, everything lifted
/// with identities on the ordering `(S (x) B) (x) C`.
pub fn build_total_hamiltonian(
    h0: &HermitianOperator,
    htau: &HermitianOperator,
    ladder: &BatteryLadder,
    switch: &SwitchModel,
) -> Result<HermitianOperator> {
    if h0.dim() != htau.dim() {
        return Err(Error::DimensionMismatch {
            left: h0.dim(),
            right: htau.dim(),
        });
    }
    let id_b = linalg::identity(ladder.dim_b());
    let id_s = linalg::identity(h0.dim());
    let id_c = linalg::identity(2);
    let total = h0
        .entries()
        .kronecker(&id_b)
        .kronecker(&switch.projector(0))
        + htau
            .entries()
            .kronecker(&id_b)
            .kronecker(&switch.projector(1))
        + id_s
            .kronecker(ladder.hamiltonian().entries())
            .kronecker(&id_c);
    HermitianOperator::from_nearly_hermitian(&total)
}

/// Joint system-battery unitary built from a transition map `V` between the
/// two energy eigenbases, moving the ladder by exactly the energy each
/// transition releases:
/// `U_SB = sum_{m,n} V_{mn} |m_tau><n_0| (x) shift((E_n^0 - E_m^tau)/delta)`.
#[derive(Debug)]
pub struct ConditionalShiftUnitary {
    u_sb: UnitaryOperator,
    shifts: Vec<Vec<i64>>,
    transition: CMat,
    max_shift: i64,
    h0: HermitianOperator,
    htau: HermitianOperator,
    ladder: BatteryLadder,
}

/// Transition map of a protocol: its evolution unitary expressed between the
/// two energy eigenbases, `V_{mn} = <m_tau|U|n_0>`.
pub fn transition_map(protocol: &crate::dynamics::Protocol) -> Result<CMat> {
    let u = crate::dynamics::build_unitary(protocol)?;
    Ok(protocol.htau().spectral().basis().adjoint()
        * u.entries()
        * protocol.h0().spectral().basis())
}

pub fn build_conditional_shift(
    transition: &CMat,
    h0: &HermitianOperator,
    htau: &HermitianOperator,
    ladder: &BatteryLadder,
) -> Result<ConditionalShiftUnitary> {
    let dim_s = h0.dim();
    if htau.dim() != dim_s {
        return Err(Error::DimensionMismatch {
            left: dim_s,
            right: htau.dim(),
        });
    }
    if transition.nrows() != dim_s || transition.ncols() != dim_s {
        return Err(Error::DimensionMismatch {
            left: dim_s,
            right: transition.nrows(),
        });
    }
    // V must itself be unitary for U_SB to be.
    let gram = transition.adjoint() * transition;
    let residual = linalg::max_abs_diff(&gram, &linalg::identity(dim_s));
    if residual > crate::dynamics::UNITARITY_TOL {
        return Err(Error::NotUnitary { residual });
    }

    let e0 = h0.spectral().column_eigenvalues();
    let etau = htau.spectral().column_eigenvalues();
    let delta = ladder.delta();

    let mut shifts = vec![vec![0i64; dim_s]; dim_s];
    let mut max_shift = 0i64;
    for m in 0..dim_s {
        for n in 0..dim_s {
            let gap = e0[n] - etau[m];
            let quanta = (gap / delta).round();
            if (gap - quanta * delta).abs() > COMMENSURABILITY_TOL * delta {
                return Err(Error::IncommensurateGap { gap, delta, m, n });
            }
            let s = quanta as i64;
            shifts[m][n] = s;
            if transition[(m, n)].norm() > AMPLITUDE_TOL {
                max_shift = max_shift.max(s.abs());
            }
        }
    }

    let dim_b = ladder.dim_b();
    let basis0 = h0.spectral().basis().clone();
    let basistau = htau.spectral().basis().clone();
    let mut joint = CMat::zeros(dim_s * dim_b, dim_s * dim_b);
    for m in 0..dim_s {
        let ket = basistau.column(m);
        for n in 0..dim_s {
            let amp = transition[(m, n)];
            if amp.norm() <= AMPLITUDE_TOL {
                continue;
            }
            let bra = basis0.column(n);
            let outer = (ket * bra.adjoint()) * amp;
            joint += outer.kronecker(&ladder.shift_matrix(shifts[m][n]));
        }
    }
    let u_sb = UnitaryOperator::new(joint)?;

    Ok(ConditionalShiftUnitary {
        u_sb,
        shifts,
        transition: transition.clone(),
        max_shift,
        h0: h0.clone(),
        htau: htau.clone(),
        ladder: ladder.clone(),
    })
}

/// Residuals of the defining constraints, restricted to the non-wrapping
/// ladder window `[margin, dim_b - margin)`.
#[derive(Debug, Clone, Copy)]
pub struct ConstraintReport {
    /// `max |U†U - I|`.
    pub unitarity: f64,
    /// `max |(U (H_0 + H_B) - (H_tau + H_B) U) P_window|`: global energy
    /// conservation on the window.
    pub energy_conservation: f64,
    /// `max |[shift(1), U] P_window|`: invariance under ladder displacements.
    pub displacement_covariance: f64,
}

impl ConditionalShiftUnitary {
    pub fn unitary(&self) -> &UnitaryOperator {
        &self.u_sb
    }

    pub fn shifts(&self) -> &[Vec<i64>] {
        &self.shifts
    }

    pub fn transition(&self) -> &CMat {
        &self.transition
    }

    pub fn max_shift(&self) -> i64 {
        self.max_shift
    }

    pub fn ladder(&self) -> &BatteryLadder {
        &self.ladder
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn htau(&self) -> &HermitianOperator {
        &self.htau
    }

    /// Full three-body unitary `U_SB (x) |ltau><l0| + U_SB† (x) |l0><ltau|`;
    /// the reverse branch is the adjoint, which keeps the whole operator
    /// unitary.
    pub fn three_body(&self, switch: &SwitchModel) -> Result<UnitaryOperator> {
        let fwd = self.u_sb.entries().kronecker(&switch.ketbra(1, 0));
        let bwd = self
            .u_sb
            .entries()
            .adjoint()
            .kronecker(&switch.ketbra(0, 1));
        UnitaryOperator::new(fwd + bwd)
    }

    /// Checks unitarity, energy conservation and displacement covariance on
    /// the non-wrapping window. `margin` must dominate the largest shift.
    pub fn verify(&self, margin: usize) -> Result<ConstraintReport> {
        if (margin as i64) < self.max_shift {
            return Err(Error::MarginTooSmall {
                margin,
                required: self.max_shift as usize,
            });
        }
        let dim_b = self.ladder.dim_b();
        if 2 * margin >= dim_b {
            return Err(Error::EmptyWindow { margin, dim_b });
        }
        let dim_s = self.h0.dim();
        let id_s = linalg::identity(dim_s);
        let id_b = linalg::identity(dim_b);
        let window: Vec<f64> = (0..dim_b)
            .map(|j| {
                if j >= margin && j < dim_b - margin {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let projector = id_s.kronecker(&linalg::real_diag(&window));

        let hb = self.ladder.hamiltonian();
        let before = self.h0.entries().kronecker(&id_b) + id_s.kronecker(hb.entries());
        let after = self.htau.entries().kronecker(&id_b) + id_s.kronecker(hb.entries());
        let u = self.u_sb.entries();
        let energy_conservation = linalg::max_abs(&((u * before - after * u) * &projector));

        let displacement = id_s.kronecker(&self.ladder.shift_matrix(1));
        let displacement_covariance =
            linalg::max_abs(&((&displacement * u - u * &displacement) * &projector));

        Ok(ConstraintReport {
            unitarity: self.u_sb.unitarity_residual(),
            energy_conservation,
            displacement_covariance,
        })
    }

    #[cfg(test)]
    pub(crate) fn with_tampered_shifts(&self, extra: i64) -> ConditionalShiftUnitary {
        let dim_s = self.h0.dim();
        let basis0 = self.h0.spectral().basis().clone();
        let basistau = self.htau.spectral().basis().clone();
        let mut joint = CMat::zeros(dim_s * self.ladder.dim_b(), dim_s * self.ladder.dim_b());
        for m in 0..dim_s {
            let ket = basistau.column(m);
            for n in 0..dim_s {
                let amp = self.transition[(m, n)];
                if amp.norm() <= AMPLITUDE_TOL {
                    continue;
                }
                let bra = basis0.column(n);
                let outer = (ket * bra.adjoint()) * amp;
                joint += outer.kronecker(&self.ladder.shift_matrix(self.shifts[m][n] + extra));
            }
        }
        ConditionalShiftUnitary {
            u_sb: UnitaryOperator::new(joint).expect("shifted construction stays unitary"),
            shifts: self.shifts.clone(),
            transition: self.transition.clone(),
            max_shift: self.max_shift + extra.abs(),
            h0: self.h0.clone(),
            htau: self.htau.clone(),
            ladder: self.ladder.clone(),
        }
    }
}

fn check_rung(u: &ConditionalShiftUnitary, j0: usize) -> Result<()> {
    let dim_b = u.ladder.dim_b();
    if j0 >= dim_b {
        return Err(Error::RungOutOfMargin {
            j0,
            shift: 0,
            dim_b,
        });
    }
    let dim_s = u.h0.dim();
    for m in 0..dim_s {
        for n in 0..dim_s {
            if u.transition[(m, n)].norm() <= AMPLITUDE_TOL {
                continue;
            }
            let target = j0 as i64 + u.shifts[m][n];
            if target < 0 || target >= dim_b as i64 {
                return Err(Error::RungOutOfMargin {
                    j0,
                    shift: u.shifts[m][n],
                    dim_b,
                });
            }
        }
    }
    Ok(())
}

/// Joint initial state `rho_S (x) |j0><j0|`.
fn joint_initial(u: &ConditionalShiftUnitary, rho_s0: &DensityMatrix, j0: usize) -> CMat {
    let dim_b = u.ladder.dim_b();
    let mut rung = CMat::zeros(dim_b, dim_b);
    rung[(j0, j0)] = Complex64::new(1.0, 0.0);
    rho_s0.entries().kronecker(&rung)
}

/// Two-point measurement of the battery energy around the conditional-shift
/// evolution, starting from the definite rung `j0`. Work is
/// `-(E_B^final - E_B^initial)`, so a battery that drops a rung registers
/// positive work done on the system.
pub fn battery_tpm(
    rho_s0: &DensityMatrix,
    j0: usize,
    u: &ConditionalShiftUnitary,
    merge_tol: Option<f64>,
) -> Result<WorkDistribution> {
    if rho_s0.dim() != u.h0.dim() {
        return Err(Error::DimensionMismatch {
            left: rho_s0.dim(),
            right: u.h0.dim(),
        });
    }
    check_rung(u, j0)?;
    let dim_s = u.h0.dim();
    let dim_b = u.ladder.dim_b();
    let joint = joint_initial(u, rho_s0, j0);
    let final_state = u.u_sb.entries() * joint * u.u_sb.entries().adjoint();

    let delta = u.ladder.delta();
    let mut raw = Vec::with_capacity(dim_b);
    for j in 0..dim_b {
        let mut p = 0.0;
        for s in 0..dim_s {
            p += final_state[(s * dim_b + j, s * dim_b + j)].re;
        }
        let work = (j0 as f64 - j as f64) * delta;
        raw.push((work, p));
    }
    WorkDistribution::from_atoms(raw, merge_tol)
}

/// The tilted reduced state entering the battery-side CGF identity:
/// `( Tr_B[ U (rho_S^gamma (x) |j0><j0|) U† ] )^{1/gamma}` with
/// `gamma = 1 - eta/beta`.
///
/// Taken exactly as defined: the result is Hermitian and positive
/// semidefinite but in general *not* trace-normalized when the evolved joint
/// state carries system-battery correlations, so it is returned as an
/// operator with its trace left for the caller to inspect.
pub fn tilde_rho(
    rho_s0: &DensityMatrix,
    j0: usize,
    u: &ConditionalShiftUnitary,
    gamma: f64,
) -> Result<HermitianOperator> {
    if gamma == 0.0 || !gamma.is_finite() {
        return Err(Error::ZeroGamma);
    }
    if rho_s0.dim() != u.h0.dim() {
        return Err(Error::DimensionMismatch {
            left: rho_s0.dim(),
            right: u.h0.dim(),
        });
    }
    check_rung(u, j0)?;
    let powered = rho_s0.operator().psd_power(gamma)?;
    let dim_b = u.ladder.dim_b();
    let mut rung = CMat::zeros(dim_b, dim_b);
    rung[(j0, j0)] = Complex64::new(1.0, 0.0);
    let joint = powered.entries().kronecker(&rung);
    let evolved = u.u_sb.entries() * joint * u.u_sb.entries().adjoint();
    let reduced = linalg::partial_trace_b(&evolved, rho_s0.dim(), dim_b);
    let reduced_op = HermitianOperator::from_nearly_hermitian(&reduced)?;
    reduced_op.psd_power(1.0 / gamma)
}

/// Both sides of the battery-side CGF identity and their residual.
#[derive(Debug, Clone, Copy)]
pub struct BatteryCgfIdentity {
    pub phi_battery: f64,
    pub phi_renyi_tilde: f64,
    pub residual: f64,
    /// Trace of the tilted reduced state; 1 exactly when the evolved joint
    /// state is a product.
    pub tilde_trace: f64,
}

/// Evaluates `Phi_battery(eta)` from the battery TPM atoms against
/// `-(eta/beta) S_{1-eta/beta}(tilde rho || G(H_tau)) - eta dF`.
///
/// Requires a thermal initial system state and a definite battery rung far
/// enough from the ladder edges.
pub fn cgf_battery_identity(
    rho_s0: &DensityMatrix,
    j0: usize,
    u: &ConditionalShiftUnitary,
    pots: &ThermoPotentials,
    eta: f64,
) -> Result<BatteryCgfIdentity> {
    let beta = pots.beta;
    if eta == 0.0 || eta == beta {
        return Err(Error::LimitPoint { eta, beta });
    }
    let g0 = gibbs(&u.h0, beta)?;
    let deviation = linalg::max_abs_diff(rho_s0.entries(), g0.state.entries());
    if deviation > THERMAL_TOL {
        return Err(Error::NotThermal { deviation });
    }

    let distribution = battery_tpm(rho_s0, j0, u, None)?;
    let phi_battery = distribution.cgf(eta);

    let gamma = 1.0 - eta / beta;
    let tilde = tilde_rho(rho_s0, j0, u, gamma)?;
    let g_tau = gibbs(&u.htau, beta)?;
    let s = renyi_order_psd(&tilde, g_tau.state.operator(), gamma)?;
    let phi_renyi_tilde = -(eta / beta) * s - eta * pots.delta_f;

    Ok(BatteryCgfIdentity {
        phi_battery,
        phi_renyi_tilde,
        residual: (phi_battery - phi_renyi_tilde).abs(),
        tilde_trace: tilde.trace(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Drive, Protocol};
    use crate::linalg::max_abs_diff;
    use crate::operators::gibbs;
    use crate::random;
    use crate::workstats::tpm_distribution;

    fn flip_protocol() -> Protocol {
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

    fn shift_protocol() -> Protocol {
        let h0 = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        Protocol::new(h0.clone(), h0.shifted(0.5), Drive::SuddenQuench).unwrap()
    }

    fn flip_battery() -> ConditionalShiftUnitary {
        let p = flip_protocol();
        let ladder = BatteryLadder::new(7, 1.0).unwrap();
        let v = transition_map(&p).unwrap();
        build_conditional_shift(&v, p.h0(), p.htau(), &ladder).unwrap()
    }

    fn shift_battery() -> ConditionalShiftUnitary {
        let p = shift_protocol();
        let ladder = BatteryLadder::new(9, 0.5).unwrap();
        let v = transition_map(&p).unwrap();
        build_conditional_shift(&v, p.h0(), p.htau(), &ladder).unwrap()
    }

    #[test]
    fn ladder_shift_group_laws() {
        let ladder = BatteryLadder::new(5, 0.5).unwrap();
        let a = ladder.shift(2);
        let b = ladder.shift(-2);
        let prod = a.compose(&b).unwrap();
        assert!(max_abs_diff(prod.entries(), &linalg::identity(5)) < 1e-12);
        let c = ladder.shift(3).compose(&ladder.shift(4)).unwrap();
        let direct = ladder.shift((3 + 4) % 5);
        assert!(max_abs_diff(c.entries(), direct.entries()) < 1e-12);
        let hb = ladder.hamiltonian();
        for j in 0..5 {
            assert!((hb.entries()[(j, j)].re - j as f64 * 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn total_hamiltonian_spectrum_is_the_sum_multiset() {
        // Oracle: direct enumeration of E_n^lambda + j delta.
        let p = flip_protocol();
        let ladder = BatteryLadder::new(7, 1.0).unwrap();
        let switch = SwitchModel::computational("lambda_0", "lambda_tau");
        let total = build_total_hamiltonian(p.h0(), p.htau(), &ladder, &switch).unwrap();
        assert_eq!(total.dim(), 28);

        let mut expected: Vec<f64> = Vec::new();
        for &e in &[0.0, 1.0] {
            for j in 0..7 {
                // Once per switch branch; both endpoints share the spectrum
                // here.
                expected.push(e + j as f64);
                expected.push(e + j as f64);
            }
        }
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let computed = total.spectral().column_eigenvalues();
        for (c, e) in computed.iter().zip(expected.iter()) {
            assert!((c - e).abs() < 1e-10);
        }

        // Trace linearity: dim_B * (Tr H0 + Tr Htau) + 2 dim_S Tr H_B.
        let trace_expected =
            7.0 * (p.h0().trace() + p.htau().trace()) + 2.0 * 2.0 * ladder.hamiltonian().trace();
        assert!((total.trace() - trace_expected).abs() < 1e-10);
    }

    #[test]
    fn equal_endpoints_collapse_the_switch_term() {
        let h = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let ladder = BatteryLadder::new(3, 1.0).unwrap();
        let switch = SwitchModel::computational("a", "b");
        let total = build_total_hamiltonian(&h, &h, &ladder, &switch).unwrap();
        let id_b = linalg::identity(3);
        let id_c = linalg::identity(2);
        let expected = h.entries().kronecker(&id_b).kronecker(&id_c)
            + linalg::identity(2)
                .kronecker(ladder.hamiltonian().entries())
                .kronecker(&id_c);
        assert!(max_abs_diff(total.entries(), &expected) < 1e-12);
    }

    #[test]
    fn flip_conditional_shift_structure() {
        let u = flip_battery();
        // Oracle: four transitions, s = (E_n^0 - E_m^tau)/delta.
        assert_eq!(u.shifts()[0][1], 1);
        assert_eq!(u.shifts()[1][0], -1);
        assert_eq!(u.shifts()[0][0], 0);
        assert_eq!(u.max_shift(), 1);
        assert!(u.unitary().unitarity_residual() < 1e-12);
    }

    #[test]
    fn identity_transition_on_equal_endpoints_is_identity() {
        let h = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let ladder = BatteryLadder::new(5, 1.0).unwrap();
        let v = linalg::identity(2);
        let u = build_conditional_shift(&v, &h, &h, &ladder).unwrap();
        assert!(max_abs_diff(u.unitary().entries(), &linalg::identity(10)) < 1e-12);
    }

    #[test]
    fn uniform_shift_moves_every_rung_down() {
        let u = shift_battery();
        for n in 0..2 {
            assert_eq!(u.shifts()[n][n], -1);
        }
        let expected = linalg::identity(2).kronecker(&u.ladder().shift_matrix(-1));
        assert!(max_abs_diff(u.unitary().entries(), &expected) < 1e-12);
    }

    #[test]
    fn incommensurate_spectra_are_rejected() {
        let h0 = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let htau = HermitianOperator::from_diagonal(&[0.0, 1.0 + 0.3]).unwrap();
        let ladder = BatteryLadder::new(7, 1.0).unwrap();
        match build_conditional_shift(&linalg::identity(2), &h0, &htau, &ladder) {
            Err(Error::IncommensurateGap { gap, .. }) => {
                assert!((gap.abs() - 1.3).abs() < 1e-12 || (gap.abs() - 0.3).abs() < 1e-12)
            }
            other => panic!("expected IncommensurateGap, got {other:?}"),
        }
    }

    #[test]
    fn constraints_hold_on_the_window() {
        let u = flip_battery();
        let report = u.verify(1).unwrap();
        assert!(report.unitarity < 1e-10);
        assert!(report.energy_conservation < 1e-10);
        assert!(report.displacement_covariance < 1e-10);

        let id = build_conditional_shift(
            &linalg::identity(2),
            u.h0(),
            u.h0(),
            &BatteryLadder::new(5, 1.0).unwrap(),
        )
        .unwrap();
        let r = id.verify(0).unwrap();
        assert_eq!(r.energy_conservation, 0.0);
        assert_eq!(r.displacement_covariance, 0.0);
    }

    #[test]
    fn wrong_shift_breaks_energy_conservation() {
        let u = flip_battery().with_tampered_shifts(1);
        let report = u.verify(2).unwrap();
        assert!(report.energy_conservation > 0.5); // delta/2 = 0.5
        assert!(report.displacement_covariance < 1e-12);
    }

    #[test]
    fn margin_validation() {
        let u = flip_battery();
        assert!(matches!(u.verify(0), Err(Error::MarginTooSmall { .. })));
        assert!(matches!(u.verify(4), Err(Error::EmptyWindow { .. })));
    }

    #[test]
    fn three_body_operator_is_unitary_and_energy_preserving() {
        let u = flip_battery();
        let switch = SwitchModel::computational("lambda_0", "lambda_tau");
        let three = u.three_body(&switch).unwrap();
        assert!(three.unitarity_residual() < 1e-12);

        let total = build_total_hamiltonian(u.h0(), u.htau(), u.ladder(), &switch).unwrap();
        // Commutator restricted to window rungs on both switch branches.
        let dim_b = u.ladder().dim_b();
        let window: Vec<f64> = (0..dim_b)
            .map(|j| {
                if (1..dim_b - 1).contains(&j) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        let proj = linalg::identity(2)
            .kronecker(&linalg::real_diag(&window))
            .kronecker(&linalg::identity(2));
        let comm = (three.entries() * total.entries() - total.entries() * three.entries()) * proj;
        assert!(linalg::max_abs(&comm) < 1e-10);
    }

    #[test]
    fn battery_tpm_matches_system_tpm_for_flip() {
        let p = flip_protocol();
        let g = gibbs(p.h0(), 1.0).unwrap();
        let system = tpm_distribution(&g.state, &p, None).unwrap();
        let u = flip_battery();
        let battery = battery_tpm(&g.state, 3, &u, None).unwrap();
        assert_eq!(system.atoms().len(), battery.atoms().len());
        for (a, b) in system.atoms().iter().zip(battery.atoms()) {
            assert!((a.work - b.work).abs() < 1e-10);
            assert!((a.probability - b.probability).abs() < 1e-10);
        }
    }

    #[test]
    fn battery_tpm_point_masses() {
        let h = HermitianOperator::from_diagonal(&[0.0, 1.0]).unwrap();
        let ladder = BatteryLadder::new(5, 1.0).unwrap();
        let id = build_conditional_shift(&linalg::identity(2), &h, &h, &ladder).unwrap();
        let rho = DensityMatrix::from_populations(&[0.4, 0.6]).unwrap();
        let d = battery_tpm(&rho, 2, &id, None).unwrap();
        assert_eq!(d.atoms().len(), 1);
        assert!(d.atoms()[0].work.abs() < 1e-12);

        let g = gibbs(&h, 1.0).unwrap();
        let shift = shift_battery();
        let d2 = battery_tpm(&g.state, 4, &shift, None).unwrap();
        assert_eq!(d2.atoms().len(), 1);
        assert!((d2.atoms()[0].work - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rung_margin_is_enforced() {
        let u = flip_battery();
        let g = gibbs(u.h0(), 1.0).unwrap();
        assert!(matches!(
            battery_tpm(&g.state, 0, &u, None),
            Err(Error::RungOutOfMargin { .. })
        ));
        assert!(matches!(
            battery_tpm(&g.state, 6, &u, None),
            Err(Error::RungOutOfMargin { .. })
        ));
        assert!(battery_tpm(&g.state, 1, &u, None).is_ok());
    }

    #[test]
    fn tilde_rho_at_gamma_one_is_the_reduced_final_state() {
        let u = flip_battery();
        let g = gibbs(u.h0(), 1.0).unwrap();
        let tilde = tilde_rho(&g.state, 3, &u, 1.0).unwrap();
        let joint = joint_initial(&u, &g.state, 3);
        let evolved = u.unitary().entries() * joint * u.unitary().entries().adjoint();
        let reduced = linalg::partial_trace_b(&evolved, 2, 7);
        assert!(max_abs_diff(tilde.entries(), &reduced) < 1e-12);
        assert!((tilde.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tilde_rho_reduces_to_final_state_for_product_scenarios() {
        // The uniform shift leaves system and battery uncorrelated.
        let u = shift_battery();
        let g = gibbs(u.h0(), 1.0).unwrap();
        let rho_tau = g.state.clone(); // system state untouched by shift(-1)
        for gamma in [0.5, 0.25, -0.5] {
            let tilde = tilde_rho(&g.state, 4, &u, gamma).unwrap();
            assert!(
                max_abs_diff(tilde.entries(), rho_tau.entries()) < 1e-9,
                "gamma {gamma}"
            );
            assert!((tilde.trace() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn tilde_rho_flip_is_psd() {
        let u = flip_battery();
        let g = gibbs(u.h0(), 1.0).unwrap();
        let tilde = tilde_rho(&g.state, 3, &u, 0.5).unwrap();
        let min = tilde.spectral().eigenvalues[0];
        assert!(min > -1e-12);
        // The flip's branches stay orthogonal on the system, so the trace
        // comes back out at one even though the joint state is correlated.
        assert!((tilde.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tilde_rho_generic_transitions_lose_normalization() {
        // Haar transition map: non-orthogonal branches, trace != 1.
        let p = random::commensurate_protocol(3, 0.5, 5, 63).unwrap();
        let g = gibbs(p.h0(), 0.8).unwrap();
        let ladder = BatteryLadder::new(16, 0.5).unwrap();
        let v = transition_map(&p).unwrap();
        let u = build_conditional_shift(&v, p.h0(), p.htau(), &ladder).unwrap();
        let tilde = tilde_rho(&g.state, 8, &u, 0.5).unwrap();
        assert!(tilde.spectral().eigenvalues[0] > -1e-12);
        assert!((tilde.trace() - 1.0).abs() > 1e-3);
    }

    #[test]
    fn tilde_rho_domain_errors() {
        let u = flip_battery();
        let g = gibbs(u.h0(), 1.0).unwrap();
        assert!(matches!(
            tilde_rho(&g.state, 3, &u, 0.0),
            Err(Error::ZeroGamma)
        ));
        let singular = DensityMatrix::basis_state(2, 0).unwrap();
        assert!(matches!(
            tilde_rho(&singular, 3, &u, -0.5),
            Err(Error::SingularPower { .. })
        ));
    }

    #[test]
    fn unitary_conjugation_commutes_with_powers() {
        // U rho^g U† = (U rho U†)^g on the joint space.
        let u = flip_battery();
        let g = gibbs(u.h0(), 1.0).unwrap();
        let joint = joint_initial(&u, &g.state, 3);
        let joint_op = HermitianOperator::from_nearly_hermitian(&joint).unwrap();
        for gamma in [0.5, 2.0] {
            let powered_then_evolved = u.unitary().entries()
                * joint_op.psd_power(gamma).unwrap().entries()
                * u.unitary().entries().adjoint();
            let evolved = u.unitary().entries() * &joint * u.unitary().entries().adjoint();
            let evolved_then_powered = HermitianOperator::from_nearly_hermitian(&evolved)
                .unwrap()
                .psd_power(gamma)
                .unwrap();
            assert!(
                max_abs_diff(&powered_then_evolved, evolved_then_powered.entries()) < 1e-10,
                "gamma {gamma}"
            );
        }
    }

    #[test]
    fn battery_cgf_identity_flip_and_shift() {
        let flip = flip_battery();
        let g = gibbs(flip.h0(), 1.0).unwrap();
        let gtau = gibbs(flip.htau(), 1.0).unwrap();
        let pots = ThermoPotentials::from_endpoints(1.0, &g, &gtau).unwrap();
        let id = cgf_battery_identity(&g.state, 3, &flip, &pots, 0.5).unwrap();
        assert!(id.residual < 1e-9);
        assert!((id.phi_battery - (-0.120_114_506_958_277_5)).abs() < 1e-10);

        let shift = shift_battery();
        let g0 = gibbs(shift.h0(), 1.0).unwrap();
        let gt = gibbs(shift.htau(), 1.0).unwrap();
        let pots_shift = ThermoPotentials::from_endpoints(1.0, &g0, &gt).unwrap();
        let id2 = cgf_battery_identity(&g0.state, 4, &shift, &pots_shift, 2.0).unwrap();
        assert!((id2.phi_battery - (-1.0)).abs() < 1e-10);
        assert!((id2.phi_renyi_tilde - (-1.0)).abs() < 1e-10);
    }

    #[test]
    fn battery_cgf_identity_eta_sweep() {
        let flip = flip_battery();
        let beta = 1.0;
        let g = gibbs(flip.h0(), beta).unwrap();
        let gtau = gibbs(flip.htau(), beta).unwrap();
        let pots = ThermoPotentials::from_endpoints(beta, &g, &gtau).unwrap();
        for factor in [-1.5, -0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 1.5] {
            let id = cgf_battery_identity(&g.state, 3, &flip, &pots, factor * beta).unwrap();
            assert!(id.residual < 1e-8, "eta factor {factor}: {}", id.residual);
        }
    }

    #[test]
    fn battery_cgf_identity_jarzynski_limit() {
        let flip = flip_battery();
        let g = gibbs(flip.h0(), 1.0).unwrap();
        let gtau = gibbs(flip.htau(), 1.0).unwrap();
        let pots = ThermoPotentials::from_endpoints(1.0, &g, &gtau).unwrap();
        let eta = 1.0 - 1e-6;
        let id = cgf_battery_identity(&g.state, 3, &flip, &pots, eta).unwrap();
        let target = -pots.beta * pots.delta_f;
        assert!((id.phi_battery - target).abs() < 1e-5);
        assert!((id.phi_renyi_tilde - target).abs() < 1e-5);
    }

    #[test]
    fn battery_cgf_identity_preconditions() {
        let flip = flip_battery();
        let g = gibbs(flip.h0(), 1.0).unwrap();
        let gtau = gibbs(flip.htau(), 1.0).unwrap();
        let pots = ThermoPotentials::from_endpoints(1.0, &g, &gtau).unwrap();
        assert!(matches!(
            cgf_battery_identity(&g.state, 3, &flip, &pots, 0.0),
            Err(Error::LimitPoint { .. })
        ));
        let mixed = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(matches!(
            cgf_battery_identity(&mixed, 3, &flip, &pots, 0.5),
            Err(Error::NotThermal { .. })
        ));
    }

    #[test]
    fn random_commensurate_scenarios_match_system_statistics() {
        let beta = 0.8;
        for seed in [61, 62, 63] {
            let p = random::commensurate_protocol(3, 0.5, 5, seed).unwrap();
            let g = gibbs(p.h0(), beta).unwrap();
            let system = tpm_distribution(&g.state, &p, None).unwrap();

            let ladder = BatteryLadder::new(16, 0.5).unwrap();
            let v = transition_map(&p).unwrap();
            let u = build_conditional_shift(&v, p.h0(), p.htau(), &ladder).unwrap();
            let j0 = 8;
            let battery = battery_tpm(&g.state, j0, &u, None).unwrap();

            assert_eq!(system.atoms().len(), battery.atoms().len(), "seed {seed}");
            for (a, b) in system.atoms().iter().zip(battery.atoms()) {
                assert!((a.work - b.work).abs() < 1e-9);
                assert!((a.probability - b.probability).abs() < 1e-10);
            }

            let gtau = gibbs(p.htau(), beta).unwrap();
            let pots = ThermoPotentials::from_endpoints(beta, &g, &gtau).unwrap();
            for factor in [-0.75, 0.25, 0.5, 1.5] {
                let id = cgf_battery_identity(&g.state, j0, &u, &pots, factor * beta).unwrap();
                assert!(id.residual < 1e-8, "seed {seed} factor {factor}");
            }
        }
    }

    #[test]
    fn degenerate_spectra_match_system_statistics() {
        // Degenerate endpoint levels: the eigensolver's basis choice inside
        // each eigenspace is arbitrary, but grouped energies fix the shifts,
        // so the battery statistics must still match the system side.
        let h0 = HermitianOperator::from_diagonal(&[0.0, 1.0, 1.0]).unwrap();
        let htau = HermitianOperator::from_diagonal(&[0.0, 0.0, 1.0]).unwrap();
        let mixer = random::unitary(3, 99).unwrap();
        let p = Protocol::new(h0.clone(), htau.clone(), Drive::Explicit(mixer)).unwrap();
        let beta = 1.0;
        let g = gibbs(&h0, beta).unwrap();
        let system = tpm_distribution(&g.state, &p, None).unwrap();

        let ladder = BatteryLadder::new(9, 1.0).unwrap();
        let v = transition_map(&p).unwrap();
        let u = build_conditional_shift(&v, &h0, &htau, &ladder).unwrap();
        let report = u.verify(1).unwrap();
        assert!(report.energy_conservation < 1e-10);

        let battery = battery_tpm(&g.state, 4, &u, None).unwrap();
        assert_eq!(system.atoms().len(), battery.atoms().len());
        for (a, b) in system.atoms().iter().zip(battery.atoms()) {
            assert!((a.work - b.work).abs() < 1e-10);
            assert!((a.probability - b.probability).abs() < 1e-10);
        }

        let gtau = gibbs(&htau, beta).unwrap();
        let pots = ThermoPotentials::from_endpoints(beta, &g, &gtau).unwrap();
        for eta in [-0.5, 0.5, 1.5] {
            let id = cgf_battery_identity(&g.state, 4, &u, &pots, eta).unwrap();
            assert!(id.residual < 1e-8, "eta {eta}: {}", id.residual);
        }
    }
}
