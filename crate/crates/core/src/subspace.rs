//! Small subspace utilities: orthonormalization, random orthonormal frames,
//! principal angles.

use crate::error::{Error, Result};
use crate::scalar::Real;
use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;

/// Modified Gram–Schmidt with one reorthogonalization pass. Columns whose
/// residual drops below `rtol` times their original norm are dependent;
/// they are dropped when `drop_dependent` is set, otherwise they error.
fn mgs<T: Real>(m: &Array2<T>, drop_dependent: bool) -> Result<Array2<T>> {
    let (rows, cols) = m.dim();
    if rows < cols && !drop_dependent {
        return Err(Error::InvalidArgument(format!(
            "cannot orthonormalize {cols} columns in dimension {rows}"
        )));
    }
    let rtol = T::c(1e-12);
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(cols);
    for c in 0..cols {
        let mut v: Vec<T> = (0..rows).map(|r| m[(r, c)]).collect();
        let orig = norm(&v);
        for _pass in 0..2 {
            for q in &basis {
                let proj = dot(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi = *vi - proj * *qi;
                }
            }
        }
        let nrm = norm(&v);
        if nrm <= rtol * orig.max(T::one()) {
            if drop_dependent {
                continue;
            }
            return Err(Error::SingularSystem {
                hint: ": rank-deficient columns in orthonormalization",
            });
        }
        let inv = T::one() / nrm;
        for vi in v.iter_mut() {
            *vi = *vi * inv;
        }
        basis.push(v);
    }
    let rank = basis.len();
    let mut q = Array2::zeros((rows, rank));
    for (c, col) in basis.iter().enumerate() {
        for r in 0..rows {
            q[(r, c)] = col[r];
        }
    }
    Ok(q)
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// Orthonormalize the columns of `m`; errors on rank deficiency.
pub fn orthonormalize_columns<T: Real>(m: &Array2<T>) -> Result<Array2<T>> {
    mgs(m, false)
}

/// Orthonormal basis of the column span of `m`: dependent columns are
/// dropped, so the result has `rank(m)` columns.
pub fn orthonormal_basis<T: Real>(m: &Array2<T>) -> Result<Array2<T>> {
    let q = mgs(m, true)?;
    if q.ncols() == 0 {
        return Err(Error::SingularSystem {
            hint: ": matrix has rank zero",
        });
    }
    Ok(q)
}

/// Seeded Gaussian matrix with orthonormalized columns.
pub fn random_orthonormal<T: Real>(
    rows: usize,
    cols: usize,
    rng: &mut impl Rng,
) -> Result<Array2<T>> {
    let g = Array2::from_shape_fn((rows, cols), |_| T::c(rng.sample::<f64, _>(StandardNormal)));
    orthonormalize_columns(&g)
}

/// Principal angles (radians, ascending) between the column spans of `a`
/// and `b` (full column rank each).
///
/// Sine-based route: the singular values of `Q_b − Q_a(Q_aᵀQ_b)` are the
/// sines of the principal angles, which keeps small angles at full
/// precision. The singular values come from the eigenvalues of the small
/// `d × d` Gram matrix.
pub fn principal_angles<T: Real>(a: &Array2<T>, b: &Array2<T>) -> Result<Vec<T>> {
    if a.nrows() != b.nrows() {
        return Err(Error::ShapeMismatch {
            op: "principal_angles",
            left: vec![a.nrows(), a.ncols()],
            right: vec![b.nrows(), b.ncols()],
        });
    }
    let qa = orthonormalize_columns(a)?;
    let qb = orthonormalize_columns(b)?;
    let s = &qb - &qa.dot(&qa.t().dot(&qb));
    let gram = s.t().dot(&s);
    let d = gram.nrows();
    let mut buf: Vec<T> = gram.iter().cloned().collect();
    let mut w = vec![T::zero(); d];
    T::syevd_values(d, &mut buf, &mut w)?;
    let mut angles: Vec<T> = w
        .iter()
        .map(|&lambda| {
            let sine = lambda.max(T::zero()).sqrt().min(T::one());
            sine.asin()
        })
        .collect();
    angles.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(angles)
}

/// Largest principal angle between two spans.
pub fn max_principal_angle<T: Real>(a: &Array2<T>, b: &Array2<T>) -> Result<T> {
    let angles = principal_angles(a, b)?;
    Ok(angles.last().copied().unwrap_or_else(T::zero))
}
