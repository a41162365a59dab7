//! Spatial correlation across the fluid antenna's ports.
//!
//! N ports are spread uniformly over a linear aperture of W wavelengths.
//! Under Jakes' isotropic scattering model the correlation between ports m
//! and n is J₀(2πW|m-n|/(N-1)). The symmetric Toeplitz matrix this builds
//! is eigendecomposed so that port selection over correlated branches can
//! be rewritten as selection over independent branches weighted by the
//! eigenvalues; only eigenvalues above a rank tolerance carry mass that
//! matters, and their count `n_eff` is the effective branch number used by
//! every closed-form expression downstream.

use crate::scalar::Real;
use crate::special::bessel_j0;
use crate::{Error, Result};

/// Maximum number of ports the eigensolver accepts.
pub const MAX_PORTS: usize = 64;

const MAX_JACOBI_SWEEPS: usize = 100;

/// Port count and aperture of the fluid antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FasGeometry<F> {
    /// Number of selectable ports, N ≥ 1.
    pub n_ports: u32,
    /// Aperture in carrier wavelengths, W > 0.
    pub aperture: F,
}

/// Jakes correlation matrix together with its spectral decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel<F> {
    /// Number of ports N.
    pub n_ports: usize,
    /// Row-major N×N correlation matrix.
    pub matrix: Vec<F>,
    /// Eigenvalues sorted in descending order; negatives arising from
    /// roundoff are clamped to zero.
    pub eigenvalues: Vec<F>,
    /// Row-major N×N orthonormal eigenvectors; column j pairs with
    /// `eigenvalues[j]`.
    pub eigenvectors: Vec<F>,
    /// Count of eigenvalues above `rank_tol` times the largest one.
    pub n_eff: usize,
    /// Mass of the effective spectrum: Σ of the first `n_eff` eigenvalues.
    pub lambda_sum: F,
}

/// Row-major Jakes correlation matrix for the given geometry.
///
/// Entry (m, n) is J₀(2πW|m-n|/(N-1)); a single port degenerates to the
/// 1×1 identity. The matrix is exactly symmetric by construction.
pub fn build_jakes<F: Real>(geom: &FasGeometry<F>) -> Result<Vec<F>> {
    let n = geom.n_ports as usize;
    if n == 0 {
        return Err(Error::InvalidInput("the antenna needs at least one port".into()));
    }
    if !(geom.aperture > F::zero()) {
        return Err(Error::InvalidInput("the aperture must be positive".into()));
    }
    if n == 1 {
        return Ok(vec![F::one()]);
    }
    let scale = F::of(2.0) * F::PI() * geom.aperture / F::of_usize(n - 1);
    let by_offset: Vec<F> = (0..n)
        .map(|k| bessel_j0(scale * F::of_usize(k)))
        .collect();
    let mut matrix = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            matrix[i * n + j] = by_offset[i.abs_diff(j)];
        }
    }
    Ok(matrix)
}

/// Spectral model of a symmetric correlation matrix.
///
/// `matrix` is row-major N×N with N inferred from its length. Eigenvalues
/// come back sorted descending with roundoff negatives clamped to zero;
/// `n_eff` counts those above `rank_tol`·λ₁ and `lambda_sum` adds exactly
/// those. Fails with [`Error::EigenNotConverged`] if the Jacobi sweeps do
/// not reduce the off-diagonal mass, which does not happen for finite
/// symmetric inputs within the supported size.
pub fn eigen_model<F: Real>(matrix: Vec<F>, rank_tol: F) -> Result<CorrelationModel<F>> {
    let len = matrix.len();
    let n = (len as f64).sqrt().round() as usize;
    if n == 0 || n * n != len {
        return Err(Error::InvalidInput(format!(
            "correlation matrix length {len} is not a perfect square"
        )));
    }
    if n > MAX_PORTS {
        return Err(Error::InvalidInput(format!(
            "{n} ports exceed the supported maximum of {MAX_PORTS}"
        )));
    }
    if !(rank_tol > F::zero() && rank_tol < F::one()) {
        return Err(Error::InvalidInput("rank tolerance must lie in (0, 1)".into()));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (matrix[i * n + j] - matrix[j * n + i]).abs();
            if diff > F::of(1e-12) {
                return Err(Error::InvalidInput(format!(
                    "correlation matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }

    if n == 1 {
        return Ok(CorrelationModel {
            n_ports: 1,
            matrix,
            eigenvalues: vec![F::one()],
            eigenvectors: vec![F::one()],
            n_eff: 1,
            lambda_sum: F::one(),
        });
    }

    let mut work = matrix.clone();
    let mut vectors = identity(n);
    jacobi_sweeps(n, &mut work, &mut vectors)?;

    let mut order: Vec<usize> = (0..n).collect();
    let raw: Vec<F> = (0..n).map(|i| work[i * n + i]).collect();
    order.sort_by(|&a, &b| raw[b].partial_cmp(&raw[a]).expect("eigenvalues are finite"));
    let eigenvalues: Vec<F> = order.iter().map(|&i| raw[i].max(F::zero())).collect();
    let mut eigenvectors = vec![F::zero(); n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[row * n + new_col] = vectors[row * n + old_col];
        }
    }

    let lead = eigenvalues[0];
    if !(lead > F::zero()) {
        return Err(Error::InvalidInput(
            "correlation matrix has no positive eigenvalue".into(),
        ));
    }
    let cut = rank_tol * lead;
    let n_eff = eigenvalues.iter().take_while(|&&ev| ev > cut).count();
    let lambda_sum = crate::quadrature::pairwise_sum(&eigenvalues[..n_eff]);

    Ok(CorrelationModel {
        n_ports: n,
        matrix,
        eigenvalues,
        eigenvectors,
        n_eff,
        lambda_sum,
    })
}

impl<F: Real> CorrelationModel<F> {
    /// Builds the Jakes matrix for `geom` and eigendecomposes it.
    pub fn from_geometry(geom: &FasGeometry<F>, rank_tol: F) -> Result<Self> {
        eigen_model(build_jakes(geom)?, rank_tol)
    }
}

fn identity<F: Real>(n: usize) -> Vec<F> {
    let mut m = vec![F::zero(); n * n];
    for i in 0..n {
        m[i * n + i] = F::one();
    }
    m
}

/// Cyclic Jacobi iteration: rotate away every off-diagonal pair until the
/// off-diagonal Frobenius mass falls below 1e-14 of the total.
fn jacobi_sweeps<F: Real>(n: usize, a: &mut [F], v: &mut [F]) -> Result<()> {
    let total: F = crate::quadrature::pairwise_sum(
        &a.iter().map(|&x| x * x).collect::<Vec<F>>(),
    )
    .sqrt();
    let target = total * F::of(1e-14);
    for _ in 0..MAX_JACOBI_SWEEPS {
        let mut off = F::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a[p * n + q] * a[p * n + q];
            }
        }
        if (off + off).sqrt() <= target {
            return Ok(());
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(n, a, v, p, q);
            }
        }
    }
    Err(Error::EigenNotConverged { sweeps: MAX_JACOBI_SWEEPS })
}

/// One Givens rotation zeroing a[p][q], applied symmetrically and
/// accumulated into the eigenvector matrix.
fn rotate<F: Real>(n: usize, a: &mut [F], v: &mut [F], p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == F::zero() {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let tau = (aqq - app) / (F::of(2.0) * apq);
    // Smaller-magnitude root of t² + 2τt - 1 = 0 keeps the rotation angle
    // below 45° for stability.
    let t = if tau >= F::zero() {
        F::one() / (tau + (F::one() + tau * tau).sqrt())
    } else {
        -F::one() / (-tau + (F::one() + tau * tau).sqrt())
    };
    let c = F::one() / (F::one() + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}
