//! Scalar abstraction for the numeric core.
//!
//! Everything upstream of the I/O layer is generic over [`Real`], which is
//! `f32` or `f64`. Besides the usual float bounds the trait carries the
//! divide-and-conquer symmetric eigensolver (`?syevd`), the one LAPACK
//! routine the whole spectral layer is built on.

use crate::error::{Error, Result};
use ndarray::NdFloat;
use num_traits::{FromPrimitive, ToPrimitive};

pub trait Real: NdFloat + FromPrimitive + ToPrimitive + Default {
    /// Symmetric eigendecomposition of an `n × n` matrix stored contiguously
    /// in `a` (both triangles filled). On success `w` holds the eigenvalues
    /// in ascending order and row `k` of `a` (in the caller's row-major view)
    /// holds the eigenvector for `w[k]`.
    fn syevd(n: usize, a: &mut [Self], w: &mut [Self]) -> Result<()>;

    /// Eigenvalues only, ascending. `a` is clobbered.
    fn syevd_values(n: usize, a: &mut [Self], w: &mut [Self]) -> Result<()>;

    /// Shorthand for converting an `f64` constant (tolerances, literals).
    fn c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant representable")
    }

    /// Lossy view as `f64` for diagnostics and error payloads.
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

// LAPACK is column-major, but a symmetric input matrix reads the same either
// way, and the eigenvectors come back as columns of a column-major output,
// i.e. rows of the row-major view. The wrappers below rely on both facts.
macro_rules! impl_real {
    ($t:ty, $f:path) => {
        impl Real for $t {
            fn syevd(n: usize, a: &mut [Self], w: &mut [Self]) -> Result<()> {
                syevd_driver::<$t>($f, b'V', n, a, w)
            }
            fn syevd_values(n: usize, a: &mut [Self], w: &mut [Self]) -> Result<()> {
                syevd_driver::<$t>($f, b'N', n, a, w)
            }
        }
    };
}

type SyevdFn<T> = unsafe extern "C" fn(
    *const i8,
    *const i8,
    *const i32,
    *mut T,
    *const i32,
    *mut T,
    *mut T,
    *const i32,
    *mut i32,
    *const i32,
    *mut i32,
);

fn syevd_driver<T: Copy + Default + num_traits::ToPrimitive>(
    f: SyevdFn<T>,
    jobz: u8,
    n: usize,
    a: &mut [T],
    w: &mut [T],
) -> Result<()> {
    assert_eq!(a.len(), n * n);
    assert_eq!(w.len(), n);
    if n == 0 {
        return Ok(());
    }
    let n_i = i32::try_from(n).map_err(|_| Error::InvalidArgument(format!("matrix too large: {n}")))?;
    let jobz = jobz as i8;
    let uplo = b'L' as i8;
    let mut info = 0i32;

    // Workspace query.
    let mut work_opt = T::default();
    let mut iwork_opt = 0i32;
    let neg = -1i32;
    unsafe {
        f(
            &jobz, &uplo, &n_i, a.as_mut_ptr(), &n_i, w.as_mut_ptr(),
            &mut work_opt, &neg, &mut iwork_opt, &neg, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Backend { routine: "syevd (workspace query)", info });
    }
    let lwork = work_opt.to_f64().unwrap_or(0.0) as i32;
    let liwork = iwork_opt;
    let mut work = vec![T::default(); lwork.max(1) as usize];
    let mut iwork = vec![0i32; liwork.max(1) as usize];
    unsafe {
        f(
            &jobz, &uplo, &n_i, a.as_mut_ptr(), &n_i, w.as_mut_ptr(),
            work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &liwork, &mut info,
        );
    }
    if info != 0 {
        return Err(Error::Backend { routine: "syevd", info });
    }
    Ok(())
}

impl_real!(f64, lapack_sys::dsyevd_);
impl_real!(f32, lapack_sys::ssyevd_);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn syevd_diagonal() {
        let n = 3;
        let mut a = vec![0.0f64; 9];
        a[0] = 5.0;
        a[4] = 2.0;
        a[8] = -1.0;
        let mut w = vec![0.0; 3];
        f64::syevd(n, &mut a, &mut w).unwrap();
        assert_eq!(w, vec![-1.0, 2.0, 5.0]);
        // Eigenvector for w[2] = 5.0 is e_0, stored as row 2 of the row-major view.
        assert!((a[6].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn syevd_matches_dsyev_oracle() {
        use ndarray::Array2;
        use ndarray_linalg::{Eigh, UPLO};
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 5, 17] {
            let mut m = Array2::<f64>::zeros((n, n));
            for i in 0..n {
                for j in 0..=i {
                    let v: f64 = rng.gen::<f64>() - 0.5;
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                }
            }
            let (oracle_vals, _) = m.eigh(UPLO::Lower).unwrap();
            let mut flat: Vec<f64> = m.iter().cloned().collect();
            let mut w = vec![0.0; n];
            f64::syevd(n, &mut flat, &mut w).unwrap();
            for k in 0..n {
                assert!((w[k] - oracle_vals[k]).abs() < 1e-12 * (1.0 + w[k].abs()));
                // Residual check: A v = w v.
                let v: Vec<f64> = (0..n).map(|j| flat[k * n + j]).collect();
                for i in 0..n {
                    let av: f64 = (0..n).map(|j| m[(i, j)] * v[j]).sum();
                    assert!((av - w[k] * v[i]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn syevd_values_only() {
        let mut a = vec![2.0f64, 1.0, 1.0, 2.0];
        let mut w = vec![0.0; 2];
        f64::syevd_values(2, &mut a, &mut w).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn f32_path() {
        let mut a = vec![0.0f32, 1.0, 1.0, 0.0];
        let mut w = vec![0.0f32; 2];
        f32::syevd(2, &mut a, &mut w).unwrap();
        assert!((w[0] + 1.0).abs() < 1e-6 && (w[1] - 1.0).abs() < 1e-6);
    }
}
