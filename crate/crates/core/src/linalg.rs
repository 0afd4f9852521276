//! Thin SVD wrapper with a fixed sign convention.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::SVD;

use crate::error::{Error, Result};

/// Full SVD returning the singular values (non-increasing) and the complete
/// right singular basis V (p x p, columns orthonormal, spanning the whole
/// column space including null directions).
///
/// Sign convention: the largest-magnitude entry of each column of V is made
/// positive, so repeated runs and platforms agree on orientation.
pub fn svd_full_v(x: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let (_, s, vt) = x
        .svd(false, true)
        .map_err(|e| Error::Backend(e.to_string()))?;
    let vt = vt.ok_or_else(|| Error::Backend("SVD did not return V^T".into()))?;
    let mut v = vt.reversed_axes().as_standard_layout().to_owned();
    fix_column_signs(&mut v);
    debug_assert!(s.windows(2).into_iter().all(|w| w[0] >= w[1] - 1e-12));
    Ok((s, v))
}

/// Flips columns so the largest-magnitude entry of each is positive.
pub fn fix_column_signs(v: &mut Array2<f64>) {
    for mut col in v.columns_mut() {
        let mut best = 0usize;
        let mut best_abs = -1.0;
        for (i, &x) in col.iter().enumerate() {
            if x.abs() > best_abs {
                best_abs = x.abs();
                best = i;
            }
        }
        if col[best] < 0.0 {
            col.mapv_inplace(|x| -x);
        }
    }
}

/// Max absolute entry of `V^T V - I`; used by orthonormality checks.
pub fn orthonormality_defect(v: &Array2<f64>) -> f64 {
    let g = v.t().dot(v);
    let mut worst = 0.0f64;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[[i, j]] - target).abs());
        }
    }
    worst
}
