//! Small dense complex-matrix helpers shared across the crate.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub(crate) type CMat = DMatrix<Complex64>;

/// Largest entry magnitude.
pub(crate) fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry magnitude of the difference.
pub(crate) fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// (M + M†)/2. Exactly Hermitian in floating point.
pub(crate) fn hermitize(m: &CMat) -> CMat {
    let n = m.nrows();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        out[(i, i)] = Complex64::new(m[(i, i)].re, 0.0);
        for j in (i + 1)..n {
            let z = (m[(i, j)] + m[(j, i)].conj()) * Complex64::new(0.5, 0.0);
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
        }
    }
    out
}

pub(crate) fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Max asymmetry |M - M†| together with the offending entry.
pub(crate) fn asymmetry(m: &CMat) -> (f64, usize, usize) {
    let n = m.nrows();
    let mut worst = (0.0_f64, 0, 0);
    for i in 0..n {
        for j in 0..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst.0 {
                worst = (d, i, j);
            }
        }
    }
    worst
}

/// Partial trace over the second (B) factor of an operator on S (x) B.
pub(crate) fn partial_trace_b(m: &CMat, dim_s: usize, dim_b: usize) -> CMat {
    debug_assert_eq!(m.nrows(), dim_s * dim_b);
    let mut out = CMat::zeros(dim_s, dim_s);
    for s in 0..dim_s {
        for t in 0..dim_s {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..dim_b {
                acc += m[(s * dim_b + j, t * dim_b + j)];
            }
            out[(s, t)] = acc;
        }
    }
    out
}

/// Real part of the trace.
pub(crate) fn trace_re(m: &CMat) -> f64 {
    m.trace().re
}

pub(crate) fn real_diag(values: &[f64]) -> CMat {
    let n = values.len();
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(values[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, basis)` with the k-th column of `basis` the
/// eigenvector of the k-th eigenvalue (unsorted). Jacobi is quadratically
/// convergent and unconditionally backward stable, and for positive
/// semidefinite matrices it resolves small eigenvalues with high *relative*
/// accuracy; both properties are load-bearing for the spectral identities
/// built on top of this.
pub(crate) fn jacobi_hermitian(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut a = hermitize(m);
    let mut basis = identity(n);
    if n == 1 {
        return (vec![a[(0, 0)].re], basis);
    }
    let scale = max_abs(&a) + f64::MIN_POSITIVE;
    const MAX_SWEEPS: usize = 60;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0_f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-18 * scale {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sigma = t * c;
                let phase = apq / Complex64::new(mag, 0.0);
                let s = phase * sigma;

                // 2x2 core, zeroed exactly.
                a[(p, p)] = Complex64::new(app - t * mag, 0.0);
                a[(q, q)] = Complex64::new(aqq + t * mag, 0.0);
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);

                // Remaining rows/columns of A.
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    let new_p = akp * c - akq * s.conj();
                    let new_q = akp * s + akq * c;
                    a[(k, p)] = new_p;
                    a[(p, k)] = new_p.conj();
                    a[(k, q)] = new_q;
                    a[(q, k)] = new_q.conj();
                }

                // Accumulate the eigenbasis.
                for k in 0..n {
                    let vkp = basis[(k, p)];
                    let vkq = basis[(k, q)];
                    basis[(k, p)] = vkp * c - vkq * s.conj();
                    basis[(k, q)] = vkp * s + vkq * c;
                }
            }
        }
    }
    let values = (0..n).map(|k| a[(k, k)].re).collect();
    (values, basis)
}

/// Neumaier-compensated accumulator; keeps long nonnegative sums accurate to
/// a few ulps instead of `O(n)` ulps, which the divergence trace functionals
/// need because their logarithms sit right next to cancellation points.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}
