use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use super::KernelSpec;
use crate::error::{domain, KarlinError, Result};
use crate::urn::PathGrid;

/// Largest grid accepted for dense covariance work.
pub const MAX_GRID_POINTS: usize = 200;

const JITTER_START: f64 = 1e-12;
const JITTER_CAP: f64 = 1e-8;
/// Off-diagonal entries of a zero-variance row up to this fraction of the
/// largest variance are treated as rounding.
const PIN_TOL: f64 = 1e-12;

/// Covariance matrix on a grid, optionally with a lower-triangular factor.
///
/// Rows with zero variance (the `t = 0` point) are kept and pinned to zero
/// in the factor.
#[derive(Clone, Debug, PartialEq)]
pub struct CovMatrix {
    times: Vec<f64>,
    entries: DMatrix<f64>,
    factor: Option<DMatrix<f64>>,
    jitter_used: f64,
}

impl CovMatrix {
    /// Wrap an explicit symmetric matrix.
    pub fn from_entries(times: Vec<f64>, entries: DMatrix<f64>) -> Result<Self> {
        let d = times.len();
        if entries.nrows() != d || entries.ncols() != d {
            return Err(KarlinError::LengthMismatch { expected: d, found: entries.nrows() });
        }
        if d > MAX_GRID_POINTS {
            return domain(format!("grid has {d} points; at most {MAX_GRID_POINTS} supported"));
        }
        for i in 0..d {
            for j in 0..i {
                if entries[(i, j)] != entries[(j, i)] {
                    return domain("covariance entries must be symmetric");
                }
            }
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return domain("covariance entries must be finite");
        }
        Ok(CovMatrix { times, entries, factor: None, jitter_used: 0.0 })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.times.len()
    }

    pub fn factor(&self) -> Option<&DMatrix<f64>> {
        self.factor.as_ref()
    }

    /// Diagonal shift that made the factorization succeed (0 when none was needed).
    pub fn jitter_used(&self) -> f64 {
        self.jitter_used
    }

    pub fn max_diagonal(&self) -> f64 {
        self.entries.diagonal().iter().fold(0.0, |m: f64, &x| m.max(x))
    }
}

/// Kernel matrix on the grid times (including `t = 0`).
pub fn cov_matrix(spec: &KernelSpec, grid: &PathGrid) -> Result<CovMatrix> {
    cov_matrix_at(spec, grid.times())
}

/// Kernel matrix at arbitrary nonnegative times.
pub fn cov_matrix_at(spec: &KernelSpec, t: &[f64]) -> Result<CovMatrix> {
    spec.validate()?;
    if t.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return domain("times must be finite and >= 0");
    }
    let d = t.len();
    if d > MAX_GRID_POINTS {
        return domain(format!("grid has {d} points; at most {MAX_GRID_POINTS} supported"));
    }
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..=i {
            let v = spec.eval(t[i], t[j]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    CovMatrix::from_entries(t.to_vec(), m)
}

/// Smallest eigenvalue of the symmetric matrix.
pub fn min_eig(cov: &CovMatrix) -> f64 {
    if cov.dim() == 0 {
        return 0.0;
    }
    SymmetricEigen::new(cov.entries.clone()).eigenvalues.iter().fold(f64::INFINITY, |m, &x| m.min(x))
}

/// Cholesky factor with the jitter policy; rows of zero variance are pinned.
pub fn chol_psd(cov: &CovMatrix) -> Result<CovMatrix> {
    let d = cov.dim();
    let diag = cov.entries.diagonal();
    let active: Vec<usize> = (0..d).filter(|&i| diag[i] != 0.0).collect();
    let pin_tol = PIN_TOL * cov.max_diagonal();
    for i in (0..d).filter(|&i| diag[i] == 0.0) {
        if (0..d).any(|j| cov.entries[(i, j)].abs() > pin_tol) {
            return Err(KarlinError::NotPsd { jitter_cap: JITTER_CAP, min_eig: min_eig(cov) });
        }
    }
    if diag.iter().any(|&x| x < 0.0) {
        return Err(KarlinError::NotPsd { jitter_cap: JITTER_CAP, min_eig: min_eig(cov) });
    }
    let sub = DMatrix::from_fn(active.len(), active.len(), |i, j| cov.entries[(active[i], active[j])]);
    let max_diag = cov.max_diagonal();
    let mut jitter = 0.0;
    let l = loop {
        let mut a = sub.clone();
        for i in 0..active.len() {
            a[(i, i)] += jitter;
        }
        if let Some(ch) = a.cholesky() {
            break ch.l();
        }
        jitter = if jitter == 0.0 { JITTER_START * max_diag } else { 2.0 * jitter };
        if jitter > JITTER_CAP * max_diag {
            return Err(KarlinError::NotPsd { jitter_cap: JITTER_CAP, min_eig: min_eig(cov) });
        }
    };
    let mut full = DMatrix::zeros(d, d);
    for (a, &i) in active.iter().enumerate() {
        for (b, &j) in active.iter().enumerate().take(a + 1) {
            full[(i, j)] = l[(a, b)];
        }
    }
    Ok(CovMatrix { times: cov.times.clone(), entries: cov.entries.clone(), factor: Some(full), jitter_used: jitter })
}

/// One Gaussian path `L g` from a factored matrix.
pub fn sample_gp<R: Rng + ?Sized>(cov: &CovMatrix, rng: &mut R) -> Result<Vec<f64>> {
    let l = match &cov.factor {
        Some(l) => l,
        None => return domain("covariance matrix has not been factored"),
    };
    let g = DVector::from_fn(cov.dim(), |_, _| rng.sample::<f64, _>(StandardNormal));
    Ok((l * g).iter().copied().collect())
}
