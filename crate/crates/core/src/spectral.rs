//! Eigendecomposition of symmetric square even tensors, generalized
//! eigenproblems for tensor pairs, definiteness tests, and the pencil
//! `g(ρ) = A − ρB`.
//!
//! The computation route is fixed: flatten through the group isomorphism,
//! run a dense symmetric (or symmetric-definite generalized) eigensolver,
//! and unflatten the eigenvectors into eigen-tensors. Eigenvalues are
//! reported in descending order; eigenvector signs are fixed by making the
//! largest-magnitude entry positive, and ties keep the backend's order.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{DenseTensor, SquareEvenTensor};
use ndarray::Array2;

/// Default relative tolerance for definiteness verdicts, scaled by `‖A‖_F`.
pub const DEFINITENESS_RTOL: f64 = 1e-10;

/// Spectrum of a symmetric square even tensor (or a symmetric-definite
/// pair), eigenvalues descending.
///
/// Eigen-tensors are stored stacked along a trailing mode, one order-M
/// tensor per eigenvalue. For [`eig_sym`] they are orthonormal under the
/// tensor inner product; for [`gevp`] they are B-orthonormal.
#[derive(Debug, Clone)]
pub struct EigenSystem<T> {
    values: Vec<T>,
    basis: DenseTensor<T>,
}

impl<T: Real> EigenSystem<T> {
    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The stacked eigen-tensors (shape: group shape ++ [k]).
    pub fn basis(&self) -> &DenseTensor<T> {
        &self.basis
    }

    /// Eigen-tensor for the i-th eigenvalue (descending order).
    pub fn eigen_tensor(&self, i: usize) -> Result<DenseTensor<T>> {
        self.basis.frontal_slice(i)
    }

    /// Flattened eigenvector matrix, one column per eigenvalue.
    pub fn basis_matrix(&self) -> Array2<T> {
        let k = self.values.len();
        let n = self.basis.len() / k;
        let mut m = Array2::zeros((n, k));
        for f in 0..n {
            for c in 0..k {
                m[(f, c)] = self.basis.data()[f * k + c];
            }
        }
        m
    }

    /// Keep the `d` leading eigenpairs.
    pub fn truncate(mut self, d: usize) -> Result<Self> {
        if d == 0 || d > self.values.len() {
            return Err(Error::InvalidArgument(format!(
                "d = {d} out of range 1..={}",
                self.values.len()
            )));
        }
        let k = self.values.len();
        let n = self.basis.len() / k;
        let group = self.basis.shape()[..self.basis.order() - 1].to_vec();
        let mut data = vec![T::zero(); n * d];
        for f in 0..n {
            for c in 0..d {
                data[f * d + c] = self.basis.data()[f * k + c];
            }
        }
        let mut shape = group;
        shape.push(d);
        self.values.truncate(d);
        self.basis = DenseTensor::from_vec(shape, data)?;
        Ok(self)
    }
}

/// Make the largest-magnitude entry of each column positive (first maximal
/// entry wins ties), for deterministic eigenvector representatives.
fn fix_column_signs<T: Real>(m: &mut Array2<T>) {
    let (n, k) = m.dim();
    for c in 0..k {
        let mut best = 0usize;
        let mut best_abs = T::zero();
        for r in 0..n {
            let a = m[(r, c)].abs();
            if a > best_abs {
                best_abs = a;
                best = r;
            }
        }
        if m[(best, c)] < T::zero() {
            for r in 0..n {
                m[(r, c)] = -m[(r, c)];
            }
        }
    }
}

/// Symmetric eigensolve of the flattened matrix; returns (values desc,
/// vectors as columns, sign-fixed).
fn eigh_desc<T: Real>(flat: &Array2<T>) -> Result<(Vec<T>, Array2<T>)> {
    let n = flat.nrows();
    // Exact symmetrization so the triangle the backend reads is unambiguous.
    let mut buf = vec![T::zero(); n * n];
    let half = T::c(0.5);
    for i in 0..n {
        for j in 0..n {
            buf[i * n + j] = (flat[(i, j)] + flat[(j, i)]) * half;
        }
    }
    let mut w = vec![T::zero(); n];
    T::syevd(n, &mut buf, &mut w)?;
    // Ascending from the backend; row k of the row-major view is the k-th
    // eigenvector. Reverse to descending, columns of the output.
    let mut vecs = Array2::zeros((n, n));
    let mut vals = Vec::with_capacity(n);
    for (out_c, k) in (0..n).rev().enumerate() {
        vals.push(w[k]);
        for r in 0..n {
            vecs[(r, out_c)] = buf[k * n + r];
        }
    }
    fix_column_signs(&mut vecs);
    Ok((vals, vecs))
}

fn stack_from_columns<T: Real>(
    group: &[usize],
    vecs: &Array2<T>,
) -> Result<DenseTensor<T>> {
    let (n, k) = vecs.dim();
    let mut shape = group.to_vec();
    shape.push(k);
    let mut data = vec![T::zero(); n * k];
    for f in 0..n {
        for c in 0..k {
            data[f * k + c] = vecs[(f, c)];
        }
    }
    DenseTensor::from_vec(shape, data)
}

fn require_square_symmetric<T: Real>(a: &SquareEvenTensor<T>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::shape_mismatch(
            "eig_sym",
            a.left_shape(),
            a.right_shape(),
        ));
    }
    a.require_symmetric(None)
}

/// Full spectrum of a symmetric square even tensor, descending.
pub fn eig_sym<T: Real>(a: &SquareEvenTensor<T>) -> Result<EigenSystem<T>> {
    require_square_symmetric(a)?;
    let (values, vecs) = eigh_desc(&a.flatten())?;
    let basis = stack_from_columns(a.left_shape(), &vecs)?;
    Ok(EigenSystem { values, basis })
}

/// The `d` largest eigenpairs. Delegates to the full decomposition and
/// truncates; an iterative partial solver would sit behind the same
/// contract.
pub fn top_d_eig<T: Real>(a: &SquareEvenTensor<T>, d: usize) -> Result<EigenSystem<T>> {
    eig_sym(a)?.truncate(d)
}

/// `f(M)` for a symmetric matrix given its spectrum: `V·diag(f(λ))·Vᵀ`.
pub(crate) fn symmetric_function_matrix<T: Real>(
    vals: &[T],
    vecs: &Array2<T>,
    f: impl Fn(T) -> T,
) -> Array2<T> {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (k, &v) in vals.iter().enumerate() {
        let fv = f(v);
        for r in 0..n {
            scaled[(r, k)] = scaled[(r, k)] * fv;
        }
    }
    scaled.dot(&vecs.t())
}

/// Generalized eigenproblem `A z = λ B z` for symmetric `A` and symmetric
/// positive definite `B`; eigenvalues descending, eigen-tensors
/// B-orthonormal.
///
/// Reduction route: eigendecompose `B`, form `B^{-1/2} A B^{-1/2}`, solve
/// the standard problem and map eigenvectors back through `B^{-1/2}`.
pub fn gevp<T: Real>(
    a: &SquareEvenTensor<T>,
    b: &SquareEvenTensor<T>,
) -> Result<EigenSystem<T>> {
    require_square_symmetric(a)?;
    require_square_symmetric(b)?;
    if a.left_shape() != b.left_shape() {
        return Err(Error::shape_mismatch("gevp", a.left_shape(), b.left_shape()));
    }
    let bf = b.flatten();
    let (b_vals, b_vecs) = eigh_desc(&bf)?;
    let n = bf.nrows();
    let pd_tol =
        T::c(DEFINITENESS_RTOL) * b.as_dense().frobenius_norm().max(T::one());
    if b_vals[n - 1] <= pd_tol {
        return Err(Error::NotPositiveDefinite {
            min_eig: b_vals[n - 1].as_f64(),
            hint: "; consider regularizing B",
        });
    }
    let inv_sqrt = symmetric_function_matrix(&b_vals, &b_vecs, |v| T::one() / v.sqrt());
    let m = inv_sqrt.dot(&a.flatten()).dot(&inv_sqrt);
    let m = (&m + &m.t()) * T::c(0.5);
    let (values, u) = eigh_desc(&m)?;
    let mut z = inv_sqrt.dot(&u);
    fix_column_signs(&mut z);
    let basis = stack_from_columns(a.left_shape(), &z)?;
    Ok(EigenSystem { values, basis })
}

/// Smallest eigenvalue (and the full ascending spectrum) of a symmetric
/// square even tensor; values only, no eigenvectors.
fn min_eigenvalue<T: Real>(a: &SquareEvenTensor<T>) -> Result<(T, Vec<T>)> {
    let n = a.dim();
    let flat = a.flat_view();
    let mut buf = vec![T::zero(); n * n];
    let half = T::c(0.5);
    for i in 0..n {
        for j in 0..n {
            buf[i * n + j] = (flat[(i, j)] + flat[(j, i)]) * half;
        }
    }
    let mut w = vec![T::zero(); n];
    T::syevd_values(n, &mut buf, &mut w)?;
    Ok((w[0], w))
}

/// Positive-definiteness verdict from the smallest eigenvalue against
/// `tol` (default `1e-10 · ‖A‖_F`). Returns `(is_pd, min_eig)`.
pub fn is_positive_definite<T: Real>(
    a: &SquareEvenTensor<T>,
    tol: Option<T>,
) -> Result<(bool, T)> {
    require_square_symmetric(a)?;
    let tol = tol.unwrap_or_else(|| T::c(DEFINITENESS_RTOL) * a.as_dense().frobenius_norm().max(T::one()));
    let (min_eig, _) = min_eigenvalue(a)?;
    Ok((min_eig > tol, min_eig))
}

/// Positive-semidefiniteness verdict: smallest eigenvalue above `−tol`.
pub fn is_psd<T: Real>(a: &SquareEvenTensor<T>, tol: Option<T>) -> Result<(bool, T)> {
    require_square_symmetric(a)?;
    let tol = tol.unwrap_or_else(|| T::c(DEFINITENESS_RTOL) * a.as_dense().frobenius_norm().max(T::one()));
    let (min_eig, _) = min_eigenvalue(a)?;
    Ok((min_eig > -tol, min_eig))
}

/// The pencil `g(ρ) = A − ρB` over a symmetric pair.
#[derive(Debug, Clone)]
pub struct Pencil<T> {
    pub a: SquareEvenTensor<T>,
    pub b: SquareEvenTensor<T>,
    pub rho: T,
}

impl<T: Real> Pencil<T> {
    pub fn new(a: SquareEvenTensor<T>, b: SquareEvenTensor<T>, rho: T) -> Result<Self> {
        if a.as_dense().shape() != b.as_dense().shape() {
            return Err(Error::shape_mismatch(
                "pencil",
                a.as_dense().shape(),
                b.as_dense().shape(),
            ));
        }
        Ok(Pencil { a, b, rho })
    }

    /// Materialize `A − ρB`.
    pub fn eval(&self) -> SquareEvenTensor<T> {
        self.a
            .add(&self.b.scale(-self.rho))
            .expect("shapes validated at construction")
    }
}

/// Convenience wrapper used by tests: spectrum of `A − ρB`.
pub fn pencil_eval<T: Real>(p: &Pencil<T>) -> SquareEvenTensor<T> {
    p.eval()
}

pub(crate) fn eigh_desc_matrix<T: Real>(flat: &Array2<T>) -> Result<(Vec<T>, Array2<T>)> {
    eigh_desc(flat)
}

pub(crate) fn min_eig_matrix<T: Real>(flat: &Array2<T>) -> Result<T> {
    let n = flat.nrows();
    let mut buf = vec![T::zero(); n * n];
    let half = T::c(0.5);
    for i in 0..n {
        for j in 0..n {
            buf[i * n + j] = (flat[(i, j)] + flat[(j, i)]) * half;
        }
    }
    let mut w = vec![T::zero(); n];
    T::syevd_values(n, &mut buf, &mut w)?;
    Ok(w[0])
}
