use nalgebra::linalg::{Schur, SVD};
use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::{inf_norm, SolveError};
use crate::model::PhysicalParams;
use crate::moments::{DriftMatrix, DriftSystem, C64, DIM};

const MAX_SCHUR_SWEEPS: usize = 10_000;
const MAX_SVD_SWEEPS: usize = 10_000;
/// Eigenvector matrices conditioned worse than this are not used for propagation.
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Sorted by descending real part, then descending imaginary part.
    pub eigenvalues: Vec<C64>,
    pub max_real_part: f64,
    pub stable: bool,
}

fn spectrum(a: &DriftMatrix) -> Result<Vec<C64>, SolveError> {
    let fail = SolveError::EigenFailure {
        max_iterations: MAX_SCHUR_SWEEPS,
    };
    let schur = Schur::try_new(*a, f64::EPSILON, MAX_SCHUR_SWEEPS).ok_or(fail.clone())?;
    let vals = schur.eigenvalues().ok_or(fail)?;
    let mut vals: Vec<C64> = vals.iter().copied().collect();
    vals.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    Ok(vals)
}

/// Spectrum of the drift matrix; stable when every eigenvalue has a
/// strictly negative real part.
pub fn stability(system: &DriftSystem) -> Result<StabilityReport, SolveError> {
    let eigenvalues = spectrum(&system.a)?;
    let max_real_part = eigenvalues
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(StabilityReport {
        eigenvalues,
        max_real_part,
        stable: max_real_part < 0.0,
    })
}

/// Drift of the first moments `(a, a^dag, b, b^dag)`. Without the
/// counter-rotating terms only the beam-splitter couplings remain.
pub fn first_moment_drift(p: &PhysicalParams, rwa: bool) -> Matrix4<C64> {
    let i = C64::new(0.0, 1.0);
    let ig = i * p.g;
    let counter = if rwa { C64::new(0.0, 0.0) } else { ig };
    let z = C64::new(0.0, 0.0);
    Matrix4::new(
        i * p.delta - 0.5 * p.kappa, z, ig, counter,
        z, -i * p.delta - 0.5 * p.kappa, -counter, -ig,
        ig, counter, -i * p.omega_m - 0.5 * p.gamma_m, z,
        -counter, -ig, z, i * p.omega_m - 0.5 * p.gamma_m,
    )
}

/// Largest real part of the moment drift spectrum, obtained from the
/// first-moment drift: every second-moment eigenvalue is a sum of two
/// first-moment eigenvalues, so the maximum is twice the first-moment one.
pub fn first_moment_max_real_part(p: &PhysicalParams, rwa: bool) -> Result<f64, SolveError> {
    let m = first_moment_drift(p, rwa);
    let schur = Schur::try_new(m, f64::EPSILON, MAX_SCHUR_SWEEPS).ok_or(SolveError::EigenFailure {
        max_iterations: MAX_SCHUR_SWEEPS,
    })?;
    let vals = schur.eigenvalues().ok_or(SolveError::EigenFailure {
        max_iterations: MAX_SCHUR_SWEEPS,
    })?;
    Ok(2.0 * vals.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max))
}

/// `A = V diag(values) V^-1`.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub values: [C64; DIM],
    pub vectors: DriftMatrix,
    pub inverse: DriftMatrix,
    /// 2-norm condition number of `vectors`.
    pub condition: f64,
}

fn sorted_svd(m: DriftMatrix) -> Option<(Vec<f64>, DriftMatrix)> {
    let svd = SVD::try_new(m, false, true, f64::EPSILON, MAX_SVD_SWEEPS)?;
    let v_t = svd.v_t?;
    let mut order: Vec<usize> = (0..DIM).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let sigma = order.iter().map(|&i| svd.singular_values[i]).collect();
    // Columns of V are the adjoints of the rows of V^H, smallest singular value first.
    let mut v = DriftMatrix::zeros();
    for (col, &i) in order.iter().enumerate() {
        for r in 0..DIM {
            v[(r, col)] = v_t[(i, r)].conj();
        }
    }
    Some((sigma, v))
}

/// Eigendecomposition of `a`, or `Ok(None)` when `a` is defective or its
/// eigenvector matrix is too ill-conditioned to propagate with.
///
/// Eigenvalues closer than `1e-9 (1 + |A|)` are grouped and the eigenvectors
/// of a group are taken as the numerical null space of `A - lambda I`, which
/// keeps semisimple repeated eigenvalues well resolved.
pub fn eigendecompose(a: &DriftMatrix) -> Result<Option<EigenDecomposition>, SolveError> {
    let norm = inf_norm(a);
    let cluster_tol = 1e-9 * (1.0 + norm);
    let vals = spectrum(a)?;

    let mut clusters: Vec<Vec<C64>> = Vec::new();
    let mut used = [false; DIM];
    for i in 0..DIM {
        if used[i] {
            continue;
        }
        let mut group = vec![vals[i]];
        used[i] = true;
        for j in i + 1..DIM {
            if !used[j] && (vals[j] - vals[i]).norm() <= cluster_tol {
                group.push(vals[j]);
                used[j] = true;
            }
        }
        clusters.push(group);
    }

    let mut values = [C64::new(0.0, 0.0); DIM];
    let mut vectors = DriftMatrix::zeros();
    let mut col = 0;
    for group in &clusters {
        let centre = group.iter().sum::<C64>() / group.len() as f64;
        let shifted = a - DriftMatrix::from_diagonal_element(centre);
        let Some((_, v)) = sorted_svd(shifted) else {
            return Err(SolveError::EigenFailure {
                max_iterations: MAX_SVD_SWEEPS,
            });
        };
        for k in 0..group.len() {
            values[col] = centre;
            vectors.set_column(col, &v.column(k));
            col += 1;
        }
    }

    let Some((sigma, _)) = sorted_svd(vectors) else {
        return Ok(None);
    };
    let condition = if sigma[0] > 0.0 { sigma[DIM - 1] / sigma[0] } else { f64::INFINITY };
    if !(condition <= MAX_EIGENVECTOR_CONDITION) {
        return Ok(None);
    }
    let lambda = DriftMatrix::from_diagonal(&nalgebra::SVector::from_column_slice(&values));
    let defect = inf_norm(&(a * vectors - vectors * lambda));
    if defect > 1e-10 * (1.0 + norm) {
        return Ok(None);
    }
    let Some(inverse) = vectors.try_inverse() else {
        return Ok(None);
    };
    Ok(Some(EigenDecomposition {
        values,
        vectors,
        inverse,
        condition,
    }))
}
