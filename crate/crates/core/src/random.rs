//! Seeded generators for random operators, states and protocols.
//!
//! All draws go through a counter-based ChaCha stream keyed on the caller's
//! seed, so every generated object is reproducible across runs and platforms.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::dynamics::{Drive, Protocol, UnitaryOperator};
use crate::error::Result;
use crate::linalg::CMat;
use crate::operators::{DensityMatrix, HermitianOperator};

fn rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

fn standard_normal(r: &mut ChaCha12Rng) -> f64 {
    // Box-Muller on two uniform draws; avoids a rand_distr dependency.
    let u1: f64 = r.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = r.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn ginibre(dim: usize, r: &mut ChaCha12Rng) -> CMat {
    CMat::from_fn(dim, dim, |_, _| {
        Complex64::new(standard_normal(r), standard_normal(r))
    })
}

/// Random Hermitian operator, `(G + G†)/2` with Ginibre `G`.
pub fn hermitian(dim: usize, seed: u64) -> Result<HermitianOperator> {
    let g = ginibre(dim, &mut rng(seed));
    HermitianOperator::from_nearly_hermitian(&g)
}

/// Haar-random unitary via the phase-fixed QR of a Ginibre matrix.
pub fn unitary(dim: usize, seed: u64) -> Result<UnitaryOperator> {
    let g = ginibre(dim, &mut rng(seed));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    UnitaryOperator::new(q)
}

/// Random full-rank density matrix from the Hilbert-Schmidt ensemble.
pub fn density_matrix(dim: usize, seed: u64) -> Result<DensityMatrix> {
    let g = ginibre(dim, &mut rng(seed));
    let m = &g * g.adjoint();
    let trace = m.trace().re;
    DensityMatrix::from_nearly_hermitian(&m.scale(1.0 / trace))
}

/// Random diagonal (classical) full-rank density matrix.
pub fn diagonal_density(dim: usize, seed: u64) -> Result<DensityMatrix> {
    let mut r = rng(seed);
    let mut p: Vec<f64> = (0..dim).map(|_| r.gen_range(0.05..1.0)).collect();
    let total: f64 = p.iter().sum();
    for x in &mut p {
        *x /= total;
    }
    DensityMatrix::from_populations(&p)
}

/// Random protocol whose endpoint spectra are integer multiples of `delta`,
/// with Haar-random eigenbases and a Haar-random evolution unitary.
///
/// Commensurate spectra are exactly what a finite battery ladder with spacing
/// `delta` can absorb.
pub fn commensurate_protocol(
    dim: usize,
    delta: f64,
    max_quanta: u32,
    seed: u64,
) -> Result<Protocol> {
    let mut r = rng(seed);
    let levels = |r: &mut ChaCha12Rng| -> Vec<f64> {
        let mut picks: Vec<u32> = Vec::with_capacity(dim);
        while picks.len() < dim {
            let q = r.gen_range(0..=max_quanta);
            if !picks.contains(&q) {
                picks.push(q);
            }
        }
        picks.sort_unstable();
        picks.into_iter().map(|q| q as f64 * delta).collect()
    };
    let e0 = levels(&mut r);
    let etau = levels(&mut r);

    let basis0 = unitary(dim, r.gen())?;
    let basistau = unitary(dim, r.gen())?;
    let u = unitary(dim, r.gen())?;

    let h0 = basis0.entries() * crate::linalg::real_diag(&e0) * basis0.entries().adjoint();
    let htau = basistau.entries() * crate::linalg::real_diag(&etau) * basistau.entries().adjoint();
    Protocol::new(
        HermitianOperator::from_nearly_hermitian(&h0)?,
        HermitianOperator::from_nearly_hermitian(&htau)?,
        Drive::Explicit(u),
    )
}
