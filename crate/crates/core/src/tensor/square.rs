use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::tensor::{DenseTensor, GroupSplit};
use ndarray::Array2;

/// Order-2M tensor viewed as an operator between two M-mode index groups.
///
/// "Even" means the two groups have the same mode count; "square" that they
/// also match extent by extent. Symmetry is checked against the relative
/// tolerance `1e-10 · ‖A‖_F` unless a caller supplies its own.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareEvenTensor<T> {
    inner: DenseTensor<T>,
    modes_per_group: usize,
}

pub(crate) const SYMMETRY_RTOL: f64 = 1e-10;

impl<T: Real> SquareEvenTensor<T> {
    pub fn new(inner: DenseTensor<T>, modes_per_group: usize) -> Result<Self> {
        if modes_per_group == 0 || inner.order() != 2 * modes_per_group {
            return Err(Error::OddOrder {
                order: inner.order(),
            });
        }
        Ok(SquareEvenTensor {
            inner,
            modes_per_group,
        })
    }

    /// Identity tensor over a group shape: entries 1 exactly on repeated
    /// multi-indices, 0 elsewhere. Flattens to an identity matrix.
    pub fn identity(group: &[usize]) -> Result<Self> {
        let n: usize = group.iter().product();
        if group.is_empty() || n == 0 {
            return Err(Error::InvalidArgument(format!(
                "identity group shape must be non-empty and positive, got {group:?}"
            )));
        }
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        let mut shape = group.to_vec();
        shape.extend_from_slice(group);
        Ok(SquareEvenTensor {
            inner: DenseTensor::from_vec(shape, data)?,
            modes_per_group: group.len(),
        })
    }

    /// Diagonal tensor over a square group shape with the given diagonal
    /// entries (in group-linearized order).
    pub fn diagonal(group: &[usize], values: &[T]) -> Result<Self> {
        let n: usize = group.iter().product();
        if values.len() != n {
            return Err(Error::InvalidArgument(format!(
                "diagonal needs {n} values for group {group:?}, got {}",
                values.len()
            )));
        }
        let mut id = Self::identity(group)?;
        for i in 0..n {
            id.inner.data_mut()[i * n + i] = values[i];
        }
        Ok(id)
    }

    pub fn from_flat(m: &Array2<T>, left: &[usize], right: &[usize]) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::ShapeMismatch {
                op: "SquareEvenTensor::from_flat",
                left: left.to_vec(),
                right: right.to_vec(),
            });
        }
        let inner = DenseTensor::group_unflatten(m, left, right)?;
        SquareEvenTensor::new(inner, left.len())
    }

    pub fn as_dense(&self) -> &DenseTensor<T> {
        &self.inner
    }

    pub fn into_dense(self) -> DenseTensor<T> {
        self.inner
    }

    pub fn modes_per_group(&self) -> usize {
        self.modes_per_group
    }

    pub fn split(&self) -> GroupSplit {
        GroupSplit {
            left: self.modes_per_group,
            right: self.modes_per_group,
        }
    }

    pub fn left_shape(&self) -> &[usize] {
        &self.inner.shape()[..self.modes_per_group]
    }

    pub fn right_shape(&self) -> &[usize] {
        &self.inner.shape()[self.modes_per_group..]
    }

    pub fn is_square(&self) -> bool {
        self.left_shape() == self.right_shape()
    }

    /// Flattened (group-linearized) side length; only meaningful when square.
    pub fn dim(&self) -> usize {
        self.left_shape().iter().product()
    }

    pub fn flatten(&self) -> Array2<T> {
        self.inner.group_flatten(self.split()).expect("split matches order")
    }

    pub fn flat_view(&self) -> ndarray::ArrayView2<'_, T> {
        self.inner.flat_view(self.split()).expect("split matches order")
    }

    pub fn transpose(&self) -> Self {
        SquareEvenTensor {
            inner: self
                .inner
                .tensor_transpose(self.split())
                .expect("even order"),
            modes_per_group: self.modes_per_group,
        }
    }

    /// Symmetric part `½(A + A^T)`.
    pub fn sym(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::shape_mismatch(
                "sym",
                self.left_shape(),
                self.right_shape(),
            ));
        }
        let half = T::c(0.5);
        Ok(SquareEvenTensor {
            inner: self
                .inner
                .add(&self.transpose().inner)?
                .scale(half),
            modes_per_group: self.modes_per_group,
        })
    }

    /// Deviation from symmetry, `‖A − A^T‖_F`.
    pub fn asymmetry(&self) -> T {
        self.inner
            .sub(&self.transpose().inner)
            .map(|d| d.frobenius_norm())
            .unwrap_or_else(|_| T::infinity())
    }

    /// Symmetry within `tol · ‖A‖_F` (default tolerance 1e-10).
    pub fn is_symmetric(&self, rtol: Option<T>) -> bool {
        if !self.is_square() {
            return false;
        }
        let rtol = rtol.unwrap_or_else(|| T::c(SYMMETRY_RTOL));
        let scale = self.inner.frobenius_norm().max(T::one());
        self.asymmetry() <= rtol * scale
    }

    pub(crate) fn require_symmetric(&self, rtol: Option<T>) -> Result<()> {
        let rtol = rtol.unwrap_or_else(|| T::c(SYMMETRY_RTOL));
        let scale = self.inner.frobenius_norm().max(T::one());
        let dev = self.asymmetry();
        if !self.is_square() || dev > rtol * scale {
            return Err(Error::NotSymmetric {
                deviation: (dev / scale).as_f64(),
                tolerance: rtol.as_f64(),
            });
        }
        Ok(())
    }

    /// Sum of diagonal entries (entries at repeated multi-indices).
    pub fn trace(&self) -> T {
        let n = self.dim();
        let d = self.inner.data();
        (0..n).fold(T::zero(), |acc, i| acc + d[i * n + i])
    }

    /// Einstein product with another square even tensor over the full right
    /// group.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let prod = self
            .inner
            .einstein_product(other.as_dense(), self.modes_per_group)?;
        SquareEvenTensor::new(prod, self.modes_per_group)
    }

    /// `A + s·I` on a square tensor.
    pub fn add_scaled_identity(&self, s: T) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::shape_mismatch(
                "add_scaled_identity",
                self.left_shape(),
                self.right_shape(),
            ));
        }
        let n = self.dim();
        let mut inner = self.inner.clone();
        for i in 0..n {
            let v = inner.data()[i * n + i];
            inner.data_mut()[i * n + i] = v + s;
        }
        Ok(SquareEvenTensor {
            inner,
            modes_per_group: self.modes_per_group,
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        Ok(SquareEvenTensor {
            inner: self.inner.add(other.as_dense())?,
            modes_per_group: self.modes_per_group,
        })
    }

    pub fn scale(&self, s: T) -> Self {
        SquareEvenTensor {
            inner: self.inner.scale(s),
            modes_per_group: self.modes_per_group,
        }
    }
}
