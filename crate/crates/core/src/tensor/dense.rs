use crate::error::{Error, Result};
use crate::scalar::Real;
use ndarray::{Array2, ArrayView2};

/// Split of a tensor's modes into a left group of `left` modes and a right
/// group of `right` modes, for flattening, transposition and the Einstein
/// product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GroupSplit {
    pub left: usize,
    pub right: usize,
}

impl GroupSplit {
    pub fn new(left: usize, right: usize) -> Result<Self> {
        if left == 0 || right == 0 {
            return Err(Error::InvalidArgument(format!(
                "group split needs at least one mode per group, got ({left}, {right})"
            )));
        }
        Ok(GroupSplit { left, right })
    }

    pub fn order(&self) -> usize {
        self.left + self.right
    }

    /// The balanced split of an even-order tensor.
    pub fn even(order: usize) -> Result<Self> {
        if order == 0 || order % 2 != 0 {
            return Err(Error::OddOrder { order });
        }
        GroupSplit::new(order / 2, order / 2)
    }

    fn check(&self, shape: &[usize], op: &'static str) -> Result<()> {
        if self.order() != shape.len() {
            return Err(Error::ShapeMismatch {
                op,
                left: vec![self.left, self.right],
                right: shape.to_vec(),
            });
        }
        Ok(())
    }
}

/// Dense N-way real tensor with explicit shape.
///
/// `data.len() == shape.iter().product()` and every extent is at least 1.
/// An empty shape is the degenerate order-0 (scalar) tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<T> {
    shape: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> DenseTensor<T> {
    pub fn from_vec(shape: Vec<usize>, data: Vec<T>) -> Result<Self> {
        if shape.iter().any(|&e| e == 0) {
            return Err(Error::InvalidArgument(format!(
                "extents must be positive, got {shape:?}"
            )));
        }
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "data length {} does not match shape {:?} (expected {})",
                data.len(),
                shape,
                expected
            )));
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        let n: usize = shape.iter().product();
        Self::from_vec(shape.to_vec(), vec![T::zero(); n])
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> T) -> Result<Self> {
        let mut t = Self::zeros(shape)?;
        let mut idx = vec![0usize; shape.len()];
        for lin in 0..t.len() {
            t.data[lin] = f(&idx);
            // Advance the multi-index, last mode fastest.
            for m in (0..shape.len()).rev() {
                idx[m] += 1;
                if idx[m] < shape[m] {
                    break;
                }
                idx[m] = 0;
            }
        }
        Ok(t)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Linear offset of a multi-index (row-major, last index fastest).
    pub fn linear_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.order() {
            return Err(Error::shape_mismatch("linear_index", index, &self.shape));
        }
        let mut lin = 0usize;
        for (m, (&i, &e)) in index.iter().zip(&self.shape).enumerate() {
            if i >= e {
                return Err(Error::IndexOutOfRange { index: i, extent: e });
            }
            debug_assert!(m < self.order());
            lin = lin * e + i;
        }
        Ok(lin)
    }

    pub fn get(&self, index: &[usize]) -> Result<T> {
        Ok(self.data[self.linear_index(index)?])
    }

    pub fn set(&mut self, index: &[usize], value: T) -> Result<()> {
        let lin = self.linear_index(index)?;
        self.data[lin] = value;
        Ok(())
    }

    /// Einstein product `self *_n other`: contracts the trailing `n_contracted`
    /// modes of `self` against the leading `n_contracted` modes of `other`.
    /// With `n_contracted = 0` this is the outer product.
    ///
    /// Computed as the definition sum over the shared index group, on the
    /// linearized buffers (the contracted group is contiguous on both sides).
    pub fn einstein_product(&self, other: &Self, n_contracted: usize) -> Result<Self> {
        if n_contracted > self.order() || n_contracted > other.order() {
            return Err(Error::shape_mismatch(
                "einstein_product",
                &self.shape,
                &other.shape,
            ));
        }
        let m = self.order() - n_contracted;
        let contracted_a = &self.shape[m..];
        let contracted_b = &other.shape[..n_contracted];
        if contracted_a != contracted_b {
            return Err(Error::shape_mismatch(
                "einstein_product (contracted group)",
                &self.shape,
                &other.shape,
            ));
        }
        let rows: usize = self.shape[..m].iter().product();
        let k: usize = contracted_a.iter().product();
        let cols: usize = other.shape[n_contracted..].iter().product();

        let mut out = vec![T::zero(); rows * cols];
        for r in 0..rows {
            let a_row = &self.data[r * k..(r + 1) * k];
            let out_row = &mut out[r * cols..(r + 1) * cols];
            for (kk, &a) in a_row.iter().enumerate() {
                let b_row = &other.data[kk * cols..(kk + 1) * cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o = *o + a * b;
                }
            }
        }

        let mut shape = self.shape[..m].to_vec();
        shape.extend_from_slice(&other.shape[n_contracted..]);
        DenseTensor::from_vec(shape, out)
    }

    /// m-mode product with a matrix `z` of shape `J × I_mode`: replaces the
    /// extent of `mode` (0-based) by `J`.
    pub fn m_mode_product(&self, z: &Array2<T>, mode: usize) -> Result<Self> {
        if mode >= self.order() {
            return Err(Error::ModeOutOfRange {
                mode,
                order: self.order(),
            });
        }
        let (j_ext, i_ext) = z.dim();
        if i_ext != self.shape[mode] {
            return Err(Error::ShapeMismatch {
                op: "m_mode_product",
                left: self.shape.clone(),
                right: vec![j_ext, i_ext],
            });
        }
        let outer: usize = self.shape[..mode].iter().product();
        let inner: usize = self.shape[mode + 1..].iter().product();

        let mut shape = self.shape.clone();
        shape[mode] = j_ext;
        let mut out = vec![T::zero(); outer * j_ext * inner];
        for o in 0..outer {
            for jj in 0..j_ext {
                let dst = &mut out[(o * j_ext + jj) * inner..(o * j_ext + jj + 1) * inner];
                for ii in 0..i_ext {
                    let w = z[(jj, ii)];
                    let src = &self.data[(o * i_ext + ii) * inner..(o * i_ext + ii + 1) * inner];
                    for (d, &s) in dst.iter_mut().zip(src) {
                        *d = *d + w * s;
                    }
                }
            }
        }
        DenseTensor::from_vec(shape, out)
    }

    /// Transpose over a balanced group split: swaps the two index groups.
    /// Errors on odd order.
    pub fn tensor_transpose(&self, split: GroupSplit) -> Result<Self> {
        if split.left != split.right {
            return Err(Error::InvalidArgument(format!(
                "tensor_transpose needs a balanced split, got ({}, {})",
                split.left, split.right
            )));
        }
        if self.order() % 2 != 0 {
            return Err(Error::OddOrder { order: self.order() });
        }
        self.swap_groups(split)
    }

    /// Swap the two index groups of any split (the transpose generalized to
    /// uneven groups, as used for projection tensors).
    pub fn swap_groups(&self, split: GroupSplit) -> Result<Self> {
        split.check(&self.shape, "swap_groups")?;
        let rows: usize = self.shape[..split.left].iter().product();
        let cols: usize = self.shape[split.left..].iter().product();
        let mut out = vec![T::zero(); rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                out[c * rows + r] = self.data[r * cols + c];
            }
        }
        let mut shape = self.shape[split.left..].to_vec();
        shape.extend_from_slice(&self.shape[..split.left]);
        DenseTensor::from_vec(shape, out)
    }

    /// Inner product `⟨A, B⟩`, the sum of entrywise products.
    pub fn inner_product(&self, other: &Self) -> Result<T> {
        if self.shape != other.shape {
            return Err(Error::shape_mismatch(
                "inner_product",
                &self.shape,
                &other.shape,
            ));
        }
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + a * b))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &a| acc + a * a)
            .sqrt()
    }

    /// Flatten over a split into a `(∏ left extents) × (∏ right extents)`
    /// matrix. A reshape: storage and flattening share one linearization.
    pub fn group_flatten(&self, split: GroupSplit) -> Result<Array2<T>> {
        split.check(&self.shape, "group_flatten")?;
        let rows: usize = self.shape[..split.left].iter().product();
        let cols: usize = self.shape[split.left..].iter().product();
        Ok(Array2::from_shape_vec((rows, cols), self.data.clone())
            .expect("row-major reshape"))
    }

    /// Zero-copy flattened view over a split.
    pub fn flat_view(&self, split: GroupSplit) -> Result<ArrayView2<'_, T>> {
        split.check(&self.shape, "flat_view")?;
        let rows: usize = self.shape[..split.left].iter().product();
        let cols: usize = self.shape[split.left..].iter().product();
        Ok(ArrayView2::from_shape((rows, cols), &self.data).expect("row-major reshape"))
    }

    /// Inverse of [`group_flatten`]: reinterpret a matrix as a tensor whose
    /// left index group linearizes the rows and right group the columns.
    pub fn group_unflatten(m: &Array2<T>, left: &[usize], right: &[usize]) -> Result<Self> {
        let rows: usize = left.iter().product();
        let cols: usize = right.iter().product();
        if m.dim() != (rows, cols) {
            return Err(Error::ShapeMismatch {
                op: "group_unflatten",
                left: vec![m.nrows(), m.ncols()],
                right: vec![rows, cols],
            });
        }
        let mut shape = left.to_vec();
        shape.extend_from_slice(right);
        let data: Vec<T> = m.iter().cloned().collect();
        DenseTensor::from_vec(shape, data)
    }

    /// Frontal slice: fix the last index to `i`, dropping one order.
    pub fn frontal_slice(&self, i: usize) -> Result<Self> {
        if self.order() == 0 {
            return Err(Error::ModeOutOfRange { mode: 0, order: 0 });
        }
        let last = *self.shape.last().unwrap();
        if i >= last {
            return Err(Error::IndexOutOfRange {
                index: i,
                extent: last,
            });
        }
        let lead: usize = self.shape[..self.order() - 1].iter().product();
        let mut data = Vec::with_capacity(lead);
        for f in 0..lead {
            data.push(self.data[f * last + i]);
        }
        DenseTensor::from_vec(self.shape[..self.order() - 1].to_vec(), data)
    }

    /// All frontal slices, in order.
    pub fn frontal_slices(&self) -> Result<Vec<Self>> {
        let last = *self
            .shape
            .last()
            .ok_or(Error::ModeOutOfRange { mode: 0, order: 0 })?;
        (0..last).map(|i| self.frontal_slice(i)).collect()
    }

    pub fn scale(&self, s: T) -> Self {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::shape_mismatch("add", &self.shape, &other.shape));
        }
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(-T::one()))
    }
}

/// Stack order-M tensors of identical shape along a new trailing mode;
/// inverts [`DenseTensor::frontal_slices`].
pub fn stack_slices<T: Real>(slices: &[DenseTensor<T>]) -> Result<DenseTensor<T>> {
    let first = slices
        .first()
        .ok_or_else(|| Error::InvalidArgument("cannot stack zero slices".into()))?;
    let lead = first.len();
    let k = slices.len();
    let mut data = vec![T::zero(); lead * k];
    for (i, s) in slices.iter().enumerate() {
        if s.shape() != first.shape() {
            return Err(Error::shape_mismatch("stack_slices", first.shape(), s.shape()));
        }
        for f in 0..lead {
            data[f * k + i] = s.data()[f];
        }
    }
    let mut shape = first.shape().to_vec();
    shape.push(k);
    DenseTensor::from_vec(shape, data)
}
