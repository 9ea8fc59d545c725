//! Named system models shipped with fixed conventions, so reports are
//! reproducible without entering matrices by hand.

use num_complex::Complex64;

use crate::dynamics::{Drive, Protocol, Segment, UnitaryOperator};
use crate::error::Result;
use crate::linalg::CMat;
use crate::operators::HermitianOperator;

use super::config::{BatteryConfig, ScenarioConfig, SystemModel};

pub(crate) fn sigma_x() -> CMat {
    CMat::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(0.0, 0.0),
        ],
    )
}

/// Open-boundary transverse-field Ising chain
/// `H = -J sum sigma^z_i sigma^z_{i+1} - g sum sigma^x_i` on `n` sites.
pub fn ising_hamiltonian(n_sites: usize, coupling: f64, field: f64) -> Result<HermitianOperator> {
    let dim = 1usize << n_sites;
    let mut m = CMat::zeros(dim, dim);
    for state in 0..dim {
        let mut diag = 0.0;
        for site in 0..n_sites.saturating_sub(1) {
            let z_a = if state >> site & 1 == 1 { -1.0 } else { 1.0 };
            let z_b = if state >> (site + 1) & 1 == 1 {
                -1.0
            } else {
                1.0
            };
            diag -= coupling * z_a * z_b;
        }
        m[(state, state)] = Complex64::new(diag, 0.0);
        for site in 0..n_sites {
            let flipped = state ^ (1 << site);
            m[(flipped, state)] += Complex64::new(-field, 0.0);
        }
    }
    HermitianOperator::new(m)
}

/// Protocol realizing a scenario's system model.
pub fn build_protocol(cfg: &ScenarioConfig) -> Result<Protocol> {
    match &cfg.system {
        SystemModel::QubitFlip { gap } => {
            let h = HermitianOperator::from_diagonal(&[0.0, *gap])?;
            let u = UnitaryOperator::new(sigma_x())?;
            Protocol::new(h.clone(), h, Drive::Explicit(u))
        }
        SystemModel::QubitDrive {
            gap,
            amplitude,
            duration,
        } => {
            let h = HermitianOperator::from_diagonal(&[0.0, *gap])?;
            let pulse = h.add(&HermitianOperator::new(sigma_x().scale(*amplitude))?)?;
            Protocol::new(
                h.clone(),
                h.clone(),
                Drive::Piecewise(vec![
                    Segment {
                        hamiltonian: h.clone(),
                        duration: 0.25,
                    },
                    Segment {
                        hamiltonian: pulse,
                        duration: *duration,
                    },
                    Segment {
                        hamiltonian: h,
                        duration: 0.25,
                    },
                ]),
            )
        }
        SystemModel::UniformShift { levels, shift } => {
            let h0 = HermitianOperator::from_diagonal(levels)?;
            let htau = h0.shifted(*shift);
            Protocol::new(h0, htau, Drive::SuddenQuench)
        }
        SystemModel::IsingQuench {
            n_sites,
            coupling,
            field_initial,
            field_final,
        } => {
            let h0 = ising_hamiltonian(*n_sites, *coupling, *field_initial)?;
            let htau = ising_hamiltonian(*n_sites, *coupling, *field_final)?;
            Protocol::new(h0, htau, Drive::SuddenQuench)
        }
        SystemModel::Custom { h0, htau, drive } => {
            Protocol::new(h0.clone(), htau.clone(), drive.clone())
        }
    }
}

/// Battery settings a model carries by default; `None` when the spectra are
/// not commensurate with any natural ladder spacing.
pub(crate) fn default_battery(model: &SystemModel) -> Option<BatteryConfig> {
    match model {
        SystemModel::QubitFlip { gap } if *gap > 0.0 => Some(BatteryConfig {
            dim_b: 7,
            delta: *gap,
            j0: 3,
            margin: 1,
        }),
        SystemModel::QubitDrive { gap, .. } if *gap > 0.0 => Some(BatteryConfig {
            dim_b: 9,
            delta: *gap,
            j0: 4,
            margin: 1,
        }),
        SystemModel::UniformShift { levels, shift } if *shift != 0.0 => {
            let delta = shift.abs();
            let commensurate = levels.iter().all(|&e| {
                let q = e / delta;
                (q - q.round()).abs() < 1e-9
            });
            if commensurate {
                Some(BatteryConfig {
                    dim_b: 9,
                    delta,
                    j0: 4,
                    margin: 2,
                })
            } else {
                None
            }
        }
        _ => None,
    }
}

/// Description of one named model, for `list-scenarios`.
#[derive(Debug, Clone)]
pub struct ModelInfo {
    pub name: &'static str,
    pub summary: &'static str,
    pub parameters: &'static str,
}

pub fn list_models() -> Vec<ModelInfo> {
    vec![
        ModelInfo {
            name: "qubit-flip",
            summary: "two-level system, equal endpoint Hamiltonians, bit-flip unitary",
            parameters: "gap (default 1.0)",
        },
        ModelInfo {
            name: "qubit-drive",
            summary: "two-level system driven by a transverse pulse between idle segments",
            parameters: "gap (default 1.0); [protocol] amplitude (1.5), duration (0.7)",
        },
        ModelInfo {
            name: "uniform-shift",
            summary: "diagonal spectrum rigidly shifted, sudden quench: deterministic work",
            parameters: "levels (default 0,1), shift (default 0.5)",
        },
        ModelInfo {
            name: "ising-quench",
            summary: "open-boundary transverse-field Ising chain, sudden field quench",
            parameters: "n_sites (4), coupling (1.0), field_initial (1.0), field_final (0.5)",
        },
        ModelInfo {
            name: "custom",
            summary: "explicit Hermitian endpoint matrices and drive",
            parameters: "h0, htau; [protocol] drive = explicit|piecewise|quench, u, segment_k_h/dt",
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ising_dimensions_and_hermiticity() {
        let h = ising_hamiltonian(4, 1.0, 0.5).unwrap();
        assert_eq!(h.dim(), 16);
        // Zero field: classical diagonal spectrum with ground energy -3J.
        let classical = ising_hamiltonian(4, 1.0, 0.0).unwrap();
        let ground = classical.spectral().eigenvalues[0];
        assert!((ground + 3.0).abs() < 1e-12);
    }

    #[test]
    fn ising_single_site_is_pure_field() {
        let h = ising_hamiltonian(1, 1.0, 0.7).unwrap();
        let eigs = &h.spectral().eigenvalues;
        assert!((eigs[0] + 0.7).abs() < 1e-12);
        assert!((eigs[1] - 0.7).abs() < 1e-12);
    }
}
