//! Hermitian spectral calculus: eigendecompositions with degeneracy grouping,
//! operator functions through the spectral route, Gibbs states and free
//! energies.
//!
//! Everything here is dense and exact-by-construction: operator functions are
//! evaluated eigenvalue-by-eigenvalue in a common eigenbasis, never by series
//! expansion, so algebraic identities between downstream quantities hold to
//! machine precision.

use std::ops::Range;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};

/// Dense decompositions only; anything larger than this is rejected.
pub const DIM_CAP: usize = 256;

/// Max-entry tolerance for Hermiticity validation.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Tolerance for the unit-trace check of density matrices.
pub const TRACE_TOL: f64 = 1e-10;

/// Eigenvalues of states below this are treated as exact zeros when deciding
/// supports and taking fractional powers.
pub const SUPPORT_ZERO_TOL: f64 = 1e-14;

fn check_square(entries: &CMat) -> Result<usize> {
    let (rows, cols) = entries.shape();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Err(Error::EmptyDimension);
    }
    if rows > DIM_CAP {
        return Err(Error::DimensionCap {
            dim: rows,
            cap: DIM_CAP,
        });
    }
    Ok(rows)
}

/// Dense complex self-adjoint operator with a lazily cached spectral
/// decomposition (default grouping tolerance) and, for Hamiltonians, the
/// Gibbs state of the one inverse temperature a run works at.
#[derive(Debug)]
pub struct HermitianOperator {
    entries: CMat,
    spectral: OnceLock<Arc<SpectralDecomposition>>,
    gibbs: OnceLock<Box<(u64, GibbsState)>>,
}

impl Clone for HermitianOperator {
    fn clone(&self) -> Self {
        let spectral = OnceLock::new();
        if let Some(dec) = self.spectral.get() {
            let _ = spectral.set(Arc::clone(dec));
        }
        let gibbs = OnceLock::new();
        if let Some(cached) = self.gibbs.get() {
            let _ = gibbs.set(cached.clone());
        }
        HermitianOperator {
            entries: self.entries.clone(),
            spectral,
            gibbs,
        }
    }
}

impl HermitianOperator {
    /// Validates squareness, the dimension cap and Hermiticity
    /// (max-entry norm, tolerance [`HERMITICITY_TOL`]).
    pub fn new(entries: CMat) -> Result<Self> {
        check_square(&entries)?;
        let (max_asymmetry, row, col) = linalg::asymmetry(&entries);
        if max_asymmetry > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                max_asymmetry,
                row,
                col,
            });
        }
        Ok(HermitianOperator {
            entries,
            spectral: OnceLock::new(),
            gibbs: OnceLock::new(),
        })
    }

    /// Symmetrizes `(M + M†)/2` first; for matrices that are Hermitian up to
    /// rounding noise from products of exact pieces.
    pub(crate) fn from_nearly_hermitian(entries: &CMat) -> Result<Self> {
        HermitianOperator::new(linalg::hermitize(entries))
    }

    /// Wraps entries whose eigensystem is already known by construction,
    /// installing it in the cache instead of re-solving.
    pub(crate) fn with_precomputed_spectral(
        entries: CMat,
        decomposition: SpectralDecomposition,
    ) -> Result<Self> {
        let op = HermitianOperator::new(entries)?;
        let _ = op.spectral.set(Arc::new(decomposition));
        Ok(op)
    }

    pub fn from_diagonal(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyDimension);
        }
        HermitianOperator::new(linalg::real_diag(values))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        HermitianOperator::new(linalg::identity(dim))
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        linalg::trace_re(&self.entries)
    }

    /// `H + c I`.
    pub fn shifted(&self, c: f64) -> Self {
        let mut entries = self.entries.clone();
        for i in 0..self.dim() {
            entries[(i, i)] += Complex64::new(c, 0.0);
        }
        HermitianOperator {
            entries,
            spectral: OnceLock::new(),
            gibbs: OnceLock::new(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(HermitianOperator {
            entries: &self.entries + &other.entries,
            spectral: OnceLock::new(),
            gibbs: OnceLock::new(),
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        HermitianOperator {
            entries: self.entries.scale(factor),
            spectral: OnceLock::new(),
            gibbs: OnceLock::new(),
        }
    }

    /// Kronecker product, left factor major.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let entries = self.entries.kronecker(&other.entries);
        check_square(&entries)?;
        Ok(HermitianOperator {
            entries,
            spectral: OnceLock::new(),
            gibbs: OnceLock::new(),
        })
    }

    /// Spectral decomposition at the default grouping tolerance
    /// `1e-10 * (spectral radius + 1)`, cached on first use.
    pub fn spectral(&self) -> &SpectralDecomposition {
        self.spectral
            .get_or_init(|| Arc::new(SpectralDecomposition::compute(&self.entries, None)))
    }

    /// Spectral decomposition at an explicit grouping tolerance (uncached).
    pub fn spectral_with_tol(&self, grouping_tol: f64) -> SpectralDecomposition {
        SpectralDecomposition::compute(&self.entries, Some(grouping_tol))
    }

    /// `f(H) = sum_k f(E_k) P_k` over grouped eigenspaces.
    ///
    /// Fails if `f` produces a non-finite value on any eigenvalue.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
        let dec = self.spectral();
        let transformed = dec.map_eigenvalues(&f)?;
        HermitianOperator::from_nearly_hermitian(&transformed)
    }

    /// `H^gamma` with support-aware handling of zero eigenvalues: eigenvalues
    /// below [`SUPPORT_ZERO_TOL`] count as exact zeros, `0^gamma = 0` for
    /// `gamma > 0`, and negative or fractional powers of a singular operator
    /// are domain errors. Requires positive semidefiniteness.
    pub fn psd_power(&self, gamma: f64) -> Result<HermitianOperator> {
        let dec = self.spectral();
        let min = dec.raw_column_eigenvalues()[0];
        if min < -1e-12 {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let singular = dec
            .raw_column_eigenvalues()
            .iter()
            .any(|&e| e <= SUPPORT_ZERO_TOL);
        if singular && gamma < 0.0 {
            return Err(Error::SingularPower {
                min_eigenvalue: min,
            });
        }
        let transformed = dec.map_eigenvalues(|e| {
            if e <= SUPPORT_ZERO_TOL {
                0.0
            } else {
                e.powf(gamma)
            }
        })?;
        HermitianOperator::from_nearly_hermitian(&transformed)
    }
}

/// Grouped eigendecomposition of a Hermitian operator.
///
/// Eigenvalues within `grouping_tol` of each other are merged into a single
/// eigenspace with one orthogonal projector; two-point-measurement
/// probabilities and support projectors are built on these subspaces.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    /// One value per eigenspace, strictly ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthogonal projectors onto the eigenspaces, aligned with `eigenvalues`.
    pub projectors: Vec<CMat>,
    /// Tolerance used when merging near-degenerate eigenvalues.
    pub grouping_tol: f64,
    basis: CMat,
    groups: Vec<Range<usize>>,
    raw: Vec<f64>,
}

impl SpectralDecomposition {
    fn compute(entries: &CMat, grouping_tol: Option<f64>) -> Self {
        let n = entries.nrows();
        let (values, vectors) = linalg::jacobi_hermitian(entries);
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            values[a]
                .partial_cmp(&values[b])
                .expect("Hermitian eigenvalues are finite")
        });
        let raw: Vec<f64> = order.iter().map(|&k| values[k]).collect();
        let basis = CMat::from_fn(n, n, |i, k| vectors[(i, order[k])]);
        SpectralDecomposition::from_basis_and_raw(basis, raw, grouping_tol)
    }

    /// Assembles the grouped structure around a known eigensystem. `raw`
    /// must be ascending and aligned with the columns of `basis`.
    pub(crate) fn from_basis_and_raw(
        basis: CMat,
        raw: Vec<f64>,
        grouping_tol: Option<f64>,
    ) -> Self {
        let n = basis.nrows();
        let radius = raw.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        let tol = grouping_tol.unwrap_or(1e-10 * (radius + 1.0));

        let mut groups: Vec<Range<usize>> = Vec::new();
        let mut start = 0usize;
        for k in 1..n {
            if raw[k] - raw[k - 1] > tol {
                groups.push(start..k);
                start = k;
            }
        }
        groups.push(start..n);

        let eigenvalues: Vec<f64> = groups
            .iter()
            .map(|g| raw[g.clone()].iter().sum::<f64>() / g.len() as f64)
            .collect();

        let projectors: Vec<CMat> = groups
            .iter()
            .map(|g| {
                let mut p = CMat::zeros(n, n);
                for k in g.clone() {
                    let col = basis.column(k);
                    p += col * col.adjoint();
                }
                linalg::hermitize(&p)
            })
            .collect();

        SpectralDecomposition {
            eigenvalues,
            projectors,
            grouping_tol: tol,
            basis,
            groups,
            raw,
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Orthonormal eigenbasis, columns sorted by ascending eigenvalue.
    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// Column index ranges of the eigenspaces, aligned with `eigenvalues`.
    pub fn groups(&self) -> &[Range<usize>] {
        &self.groups
    }

    /// Grouped eigenvalue attached to basis column `col`.
    pub fn column_eigenvalue(&self, col: usize) -> f64 {
        let g = self
            .groups
            .iter()
            .position(|r| r.contains(&col))
            .expect("column inside some group");
        self.eigenvalues[g]
    }

    /// Grouped eigenvalue per basis column.
    pub fn column_eigenvalues(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (g, range) in self.groups.iter().enumerate() {
            for k in range.clone() {
                out[k] = self.eigenvalues[g];
            }
        }
        out
    }

    /// Ungrouped eigenvalue per basis column, ascending.
    ///
    /// Grouping only matters where subspace structure does (measurement
    /// projectors, gap quantization); scalar spectral functions evaluate on
    /// the raw values, whose merged counterparts can be relatively far off
    /// for eigenvalues much smaller than the spectral radius.
    pub fn raw_column_eigenvalues(&self) -> &[f64] {
        &self.raw
    }

    /// `sum_k E_k P_k`.
    pub fn reconstruct(&self) -> CMat {
        self.rebuild_with(&self.raw)
    }

    /// `sum_k f(E_k) P_k` as a raw matrix; non-finite `f` values are domain
    /// errors.
    pub fn map_eigenvalues(&self, f: impl Fn(f64) -> f64) -> Result<CMat> {
        let mut vals = Vec::with_capacity(self.dim());
        for &e in &self.raw {
            let y = f(e);
            if !y.is_finite() {
                return Err(Error::FunctionDomain {
                    eigenvalue: e,
                    value: y,
                });
            }
            vals.push(y);
        }
        Ok(self.rebuild_with(&vals))
    }

    /// `sum_k g(E_k) P_k` for complex-valued `g` (for unitary propagators).
    pub(crate) fn map_eigenvalues_complex(&self, g: impl Fn(f64) -> Complex64) -> CMat {
        let n = self.dim();
        let mut scaled = self.basis.clone();
        for k in 0..n {
            let phase = g(self.raw[k]);
            for i in 0..n {
                scaled[(i, k)] *= phase;
            }
        }
        &scaled * self.basis.adjoint()
    }

    fn rebuild_with(&self, column_values: &[f64]) -> CMat {
        let n = self.dim();
        let mut scaled = self.basis.clone();
        for k in 0..n {
            let v = Complex64::new(column_values[k], 0.0);
            for i in 0..n {
                scaled[(i, k)] *= v;
            }
        }
        &scaled * self.basis.adjoint()
    }
}

/// Standalone form of [`HermitianOperator::spectral_with_tol`].
pub fn spectral(h: &HermitianOperator, grouping_tol: f64) -> SpectralDecomposition {
    h.spectral_with_tol(grouping_tol)
}

/// Standalone form of [`HermitianOperator::apply`].
pub fn apply_function(h: &HermitianOperator, f: impl Fn(f64) -> f64) -> Result<HermitianOperator> {
    h.apply(f)
}

/// Positive semidefinite unit-trace operator.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    op: HermitianOperator,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace (within [`TRACE_TOL`]) and positive
    /// semidefiniteness (min eigenvalue >= -1e-12).
    pub fn new(entries: CMat) -> Result<Self> {
        DensityMatrix::from_operator(HermitianOperator::new(entries)?)
    }

    pub(crate) fn from_nearly_hermitian(entries: &CMat) -> Result<Self> {
        DensityMatrix::new(linalg::hermitize(entries))
    }

    fn from_operator(op: HermitianOperator) -> Result<Self> {
        let trace = op.trace();
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidTrace {
                trace,
                tol: TRACE_TOL,
            });
        }
        let min = op.spectral().raw_column_eigenvalues()[0];
        if min < -1e-12 {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        Ok(DensityMatrix { op })
    }

    /// Pure state `|psi><psi|` from an (unnormalized) ket.
    pub fn pure(ket: &[Complex64]) -> Result<Self> {
        let n = ket.len();
        if n == 0 {
            return Err(Error::EmptyDimension);
        }
        let norm2: f64 = ket.iter().map(|z| z.norm_sqr()).sum();
        if norm2 <= 0.0 {
            return Err(Error::InvalidTrace {
                trace: 0.0,
                tol: TRACE_TOL,
            });
        }
        let entries = CMat::from_fn(n, n, |i, j| ket[i] * ket[j].conj() / norm2);
        DensityMatrix::new(entries)
    }

    /// `|k><k|` in the computational basis.
    pub fn basis_state(dim: usize, k: usize) -> Result<Self> {
        let mut ket = vec![Complex64::new(0.0, 0.0); dim];
        ket[k] = Complex64::new(1.0, 0.0);
        DensityMatrix::pure(&ket)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        DensityMatrix::new(linalg::identity(dim).scale(1.0 / dim as f64))
    }

    pub fn from_populations(populations: &[f64]) -> Result<Self> {
        DensityMatrix::new(linalg::real_diag(populations))
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn entries(&self) -> &CMat {
        self.op.entries()
    }

    /// Underlying Hermitian view (shares the cached decomposition).
    pub fn operator(&self) -> &HermitianOperator {
        &self.op
    }

    pub fn trace(&self) -> f64 {
        self.op.trace()
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>()
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let entries = self.entries().kronecker(other.entries());
        check_square(&entries)?;
        DensityMatrix::new(entries)
    }
}

/// Canonical Gibbs state together with its partition function and free
/// energy.
#[derive(Debug, Clone)]
pub struct GibbsState {
    pub state: DensityMatrix,
    pub partition: f64,
    pub free_energy: f64,
}

/// `G = exp(-beta H)/Z`, `Z = Tr exp(-beta H)`, `F = -ln(Z)/beta`.
///
/// Boltzmann weights are shifted by the ground energy before exponentiation
/// so that `Z` never overflows. The state's eigensystem is the Hamiltonian's
/// with exponentiated values, so it is installed directly rather than
/// re-solved, and the whole bundle is cached on the operator for the one
/// inverse temperature a run works at.
pub fn gibbs(h: &HermitianOperator, beta: f64) -> Result<GibbsState> {
    if beta <= 0.0 || !beta.is_finite() {
        return Err(Error::InvalidBeta { beta });
    }
    if let Some(cached) = h.gibbs.get() {
        if cached.0 == beta.to_bits() {
            return Ok(cached.1.clone());
        }
    }
    let dec = h.spectral();
    let n = dec.dim();
    let raw = dec.raw_column_eigenvalues();
    let e0 = raw[0];
    let shifted_sum: f64 = raw.iter().map(|&e| (-beta * (e - e0)).exp()).sum();
    let free_energy = e0 - shifted_sum.ln() / beta;
    let partition = (-beta * e0).exp() * shifted_sum;

    let weights: Vec<f64> = raw
        .iter()
        .map(|&e| (-beta * (e - e0)).exp() / shifted_sum)
        .collect();
    let entries = dec.map_eigenvalues(|e| (-beta * (e - e0)).exp() / shifted_sum)?;
    // Ascending weights run against ascending energies.
    let state_basis = CMat::from_fn(n, n, |i, k| dec.basis()[(i, n - 1 - k)]);
    let state_raw: Vec<f64> = (0..n).map(|k| weights[n - 1 - k]).collect();
    let state_dec = SpectralDecomposition::from_basis_and_raw(state_basis, state_raw, None);
    let op = HermitianOperator::with_precomputed_spectral(linalg::hermitize(&entries), state_dec)?;
    let state = DensityMatrix::from_operator(op)?;

    let result = GibbsState {
        state,
        partition,
        free_energy,
    };
    let _ = h.gibbs.set(Box::new((beta.to_bits(), result.clone())));
    Ok(result)
}

/// Equilibrium thermodynamic bundle for a protocol's two endpoints.
#[derive(Debug, Clone, Copy)]
pub struct ThermoPotentials {
    pub beta: f64,
    pub z0: f64,
    pub ztau: f64,
    pub f0: f64,
    pub ftau: f64,
    pub delta_f: f64,
}

impl ThermoPotentials {
    pub fn new(beta: f64, z0: f64, ztau: f64) -> Result<Self> {
        if beta <= 0.0 || !beta.is_finite() {
            return Err(Error::InvalidBeta { beta });
        }
        for &z in &[z0, ztau] {
            if z <= 0.0 || !z.is_finite() {
                return Err(Error::InvalidPartition { z });
            }
        }
        let f0 = -z0.ln() / beta;
        let ftau = -ztau.ln() / beta;
        Ok(ThermoPotentials {
            beta,
            z0,
            ztau,
            f0,
            ftau,
            delta_f: ftau - f0,
        })
    }

    /// Free energies taken directly from the two Gibbs endpoints, which keeps
    /// `F = -ln(Z)/beta` exact even when `Z` itself is extreme.
    pub fn from_endpoints(beta: f64, initial: &GibbsState, fin: &GibbsState) -> Result<Self> {
        if beta <= 0.0 || !beta.is_finite() {
            return Err(Error::InvalidBeta { beta });
        }
        Ok(ThermoPotentials {
            beta,
            z0: initial.partition,
            ztau: fin.partition,
            f0: initial.free_energy,
            ftau: fin.free_energy,
            delta_f: fin.free_energy - initial.free_energy,
        })
    }
}
