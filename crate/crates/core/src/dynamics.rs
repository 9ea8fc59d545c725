//! Driving protocols and the evolution unitaries they generate.
//!
//! The endpoint Hamiltonians fix the two measured observables; the drive only
//! matters through the unitary it produces at the final time. Piecewise
//! constant segments are propagated exactly through the spectral route, so no
//! integrator error enters any downstream identity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::operators::{DensityMatrix, HermitianOperator};

/// Max-entry tolerance for the `U†U = I` check.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Max-entry tolerance for matching piecewise segments to the protocol
/// endpoints.
pub const ENDPOINT_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct UnitaryOperator {
    entries: CMat,
}

impl UnitaryOperator {
    pub fn new(entries: CMat) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(Error::EmptyDimension);
        }
        let gram = entries.adjoint() * &entries;
        let residual = linalg::max_abs_diff(&gram, &linalg::identity(rows));
        if residual > UNITARITY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(UnitaryOperator { entries })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::EmptyDimension);
        }
        Ok(UnitaryOperator {
            entries: linalg::identity(dim),
        })
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }

    pub fn adjoint(&self) -> UnitaryOperator {
        UnitaryOperator {
            entries: self.entries.adjoint(),
        }
    }

    /// `self * rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &UnitaryOperator) -> Result<UnitaryOperator> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Ok(UnitaryOperator {
            entries: &self.entries * &rhs.entries,
        })
    }

    /// Residual of the unitarity invariant, for reporting.
    pub fn unitarity_residual(&self) -> f64 {
        let gram = self.entries.adjoint() * &self.entries;
        linalg::max_abs_diff(&gram, &linalg::identity(self.dim()))
    }
}

/// One piecewise-constant segment of a drive.
#[derive(Debug, Clone)]
pub struct Segment {
    pub hamiltonian: HermitianOperator,
    pub duration: f64,
}

/// How the work parameter is driven between the two endpoints.
#[derive(Debug, Clone)]
pub enum Drive {
    /// The final-time unitary is given directly.
    Explicit(UnitaryOperator),
    /// Ordered piecewise-constant segments; the first must equal the initial
    /// Hamiltonian and the last the final one.
    Piecewise(Vec<Segment>),
    /// Sudden quench: the state has no time to evolve, `U = I`.
    SuddenQuench,
}

/// Initial and final Hamiltonians plus the rule producing the evolution
/// unitary.
#[derive(Debug, Clone)]
pub struct Protocol {
    h0: HermitianOperator,
    htau: HermitianOperator,
    drive: Drive,
}

impl Protocol {
    pub fn new(h0: HermitianOperator, htau: HermitianOperator, drive: Drive) -> Result<Self> {
        let dim = h0.dim();
        if htau.dim() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: htau.dim(),
            });
        }
        match &drive {
            Drive::Explicit(u) => {
                if u.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        left: dim,
                        right: u.dim(),
                    });
                }
            }
            Drive::Piecewise(segments) => {
                if segments.is_empty() {
                    return Err(Error::EmptyDrive);
                }
                for seg in segments {
                    if seg.hamiltonian.dim() != dim {
                        return Err(Error::DimensionMismatch {
                            left: dim,
                            right: seg.hamiltonian.dim(),
                        });
                    }
                    if !seg.duration.is_finite() || seg.duration < 0.0 {
                        return Err(Error::InvalidDuration {
                            duration: seg.duration,
                        });
                    }
                }
                let first = linalg::max_abs_diff(segments[0].hamiltonian.entries(), h0.entries());
                if first > ENDPOINT_TOL {
                    return Err(Error::SegmentEndpointMismatch {
                        index: 0,
                        endpoint: "H(lambda_0)",
                        deviation: first,
                    });
                }
                let last_idx = segments.len() - 1;
                let last =
                    linalg::max_abs_diff(segments[last_idx].hamiltonian.entries(), htau.entries());
                if last > ENDPOINT_TOL {
                    return Err(Error::SegmentEndpointMismatch {
                        index: last_idx,
                        endpoint: "H(lambda_tau)",
                        deviation: last,
                    });
                }
            }
            Drive::SuddenQuench => {}
        }
        Ok(Protocol { h0, htau, drive })
    }

    pub fn dim(&self) -> usize {
        self.h0.dim()
    }

    pub fn h0(&self) -> &HermitianOperator {
        &self.h0
    }

    pub fn htau(&self) -> &HermitianOperator {
        &self.htau
    }

    pub fn drive(&self) -> &Drive {
        &self.drive
    }
}

/// `exp(-i H t)` through the spectral route.
pub fn propagator(h: &HermitianOperator, t: f64) -> Result<UnitaryOperator> {
    let m = h
        .spectral()
        .map_eigenvalues_complex(|e| Complex64::from_polar(1.0, -e * t));
    UnitaryOperator::new(m)
}

/// Evolution unitary at the final time.
///
/// Explicit drives are returned as given, a quench yields the identity, and
/// piecewise segments compose in time order:
/// `U = exp(-i H_K dt_K) ... exp(-i H_1 dt_1)`.
pub fn build_unitary(p: &Protocol) -> Result<UnitaryOperator> {
    match p.drive() {
        Drive::Explicit(u) => Ok(u.clone()),
        Drive::SuddenQuench => UnitaryOperator::identity(p.dim()),
        Drive::Piecewise(segments) => {
            let mut u = UnitaryOperator::identity(p.dim())?;
            for seg in segments {
                u = propagator(&seg.hamiltonian, seg.duration)?.compose(&u)?;
            }
            Ok(u)
        }
    }
}

/// `U rho U†`.
pub fn evolve(rho: &DensityMatrix, u: &UnitaryOperator) -> Result<DensityMatrix> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: u.dim(),
        });
    }
    let out = u.entries() * rho.entries() * u.entries().adjoint();
    DensityMatrix::from_nearly_hermitian(&out)
}
