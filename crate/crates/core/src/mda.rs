//! Multilinear discriminant analysis via the Einstein product: scatter
//! tensors over the feature modes, the TR/RT/LS solver front-ends, range
//! restriction, and data projection.
//!
//! The default trace-ratio denominator is the total scatter `S_t` (which
//! bounds the objective by 1); a flag selects `S_w`. Regularization is a
//! shift `ε·I` on the denominator, ε = 0.01 by default, because the number
//! of classes is usually far below the feature dimension and the scatter is
//! singular.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{eig_sym, eigh_desc_matrix, gevp, symmetric_function_matrix};
use crate::subspace::orthonormal_basis;
use crate::tensor::{DenseTensor, GroupSplit, SquareEvenTensor};
use crate::trace_ratio::{
    regularize, solve_rt_gevp, solve_tr_newton, ProjectionTensor, SolverOptions, TRSolution,
};
use ndarray::{Array1, Array2};

/// Data tensor with samples along the last mode plus integer class labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset<T> {
    x: DenseTensor<T>,
    labels: Vec<usize>,
    class_counts: Vec<usize>,
}

impl<T: Real> LabeledDataset<T> {
    pub fn new(x: DenseTensor<T>, labels: Vec<usize>) -> Result<Self> {
        if x.order() < 2 {
            return Err(Error::InvalidArgument(
                "data tensor needs at least one feature mode plus the sample mode".into(),
            ));
        }
        let n = *x.shape().last().unwrap();
        if labels.len() != n {
            return Err(Error::InvalidLabels(format!(
                "{} labels for {} samples",
                labels.len(),
                n
            )));
        }
        let c = labels.iter().max().map_or(0, |&m| m + 1);
        if c == 0 {
            return Err(Error::InvalidLabels("empty dataset".into()));
        }
        let mut class_counts = vec![0usize; c];
        for &l in &labels {
            class_counts[l] += 1;
        }
        if let Some(empty) = class_counts.iter().position(|&k| k == 0) {
            return Err(Error::EmptyClass { class: empty });
        }
        Ok(LabeledDataset {
            x,
            labels,
            class_counts,
        })
    }

    pub fn x(&self) -> &DenseTensor<T> {
        &self.x
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        *self.x.shape().last().unwrap()
    }

    pub fn n_classes(&self) -> usize {
        self.class_counts.len()
    }

    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn feature_shape(&self) -> &[usize] {
        &self.x.shape()[..self.x.order() - 1]
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_shape().iter().product()
    }

    /// Flattened data matrix, features × samples.
    pub fn data_matrix(&self) -> Array2<T> {
        let split = GroupSplit::new(self.x.order() - 1, 1).unwrap();
        self.x.group_flatten(split).unwrap()
    }

    pub fn class_indices(&self, class: usize) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, &l)| (l == class).then_some(i))
            .collect()
    }

    /// Gather a subset of samples (indices in the given order).
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let n = self.n();
        let nn = indices.len();
        if nn == 0 {
            return Err(Error::InvalidArgument("empty subset".into()));
        }
        let lead = self.feature_dim();
        let mut data = vec![T::zero(); lead * nn];
        for (j, &old) in indices.iter().enumerate() {
            if old >= n {
                return Err(Error::IndexOutOfRange {
                    index: old,
                    extent: n,
                });
            }
            for f in 0..lead {
                data[f * nn + j] = self.x.data()[f * n + old];
            }
        }
        let mut shape = self.feature_shape().to_vec();
        shape.push(nn);
        let x = DenseTensor::from_vec(shape, data)?;
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        LabeledDataset::new(x, labels)
    }
}

/// Center samples: `X̄ = X ×_{M+1} H` with the centering matrix
/// `H = I − (1/n)𝟙𝟙ᵀ`, computed as a per-feature mean subtraction.
pub fn center_data<T: Real>(x: &DenseTensor<T>) -> Result<DenseTensor<T>> {
    if x.order() < 2 {
        return Err(Error::InvalidArgument(
            "centering needs a sample mode".into(),
        ));
    }
    let n = *x.shape().last().unwrap();
    let lead = x.len() / n;
    let inv_n = T::one() / T::from_usize(n).unwrap();
    let mut data = x.data().to_vec();
    for f in 0..lead {
        let row = &mut data[f * n..(f + 1) * n];
        let mean = row.iter().fold(T::zero(), |acc, &v| acc + v) * inv_n;
        for v in row.iter_mut() {
            *v = *v - mean;
        }
    }
    DenseTensor::from_vec(x.shape().to_vec(), data)
}

fn scatter_from_matrix<T: Real>(
    m: &Array2<T>,
    feature_shape: &[usize],
) -> Result<SquareEvenTensor<T>> {
    let s = m.dot(&m.t());
    let sym = (&s + &s.t()) * T::c(0.5);
    SquareEvenTensor::from_flat(&sym, feature_shape, feature_shape)
}

/// Per-class means (features × classes) and the global mean.
fn class_means<T: Real>(ds: &LabeledDataset<T>) -> (Array2<T>, Array1<T>) {
    let xf = ds.data_matrix();
    let (dim, n) = xf.dim();
    let c = ds.n_classes();
    let mut means = Array2::<T>::zeros((dim, c));
    for (j, &l) in ds.labels().iter().enumerate() {
        for f in 0..dim {
            means[(f, l)] = means[(f, l)] + xf[(f, j)];
        }
    }
    for (l, &count) in ds.class_counts().iter().enumerate() {
        let inv = T::one() / T::from_usize(count).unwrap();
        for f in 0..dim {
            means[(f, l)] = means[(f, l)] * inv;
        }
    }
    let inv_n = T::one() / T::from_usize(n).unwrap();
    let mut global = Array1::<T>::zeros(dim);
    for f in 0..dim {
        let s = (0..n).fold(T::zero(), |acc, j| acc + xf[(f, j)]);
        global[f] = s * inv_n;
    }
    (means, global)
}

/// Within-class scatter `Σ_i Σ_{j∈C_i} (X⁽ʲ⁾−ξ_i) *_1 (X⁽ʲ⁾−ξ_i)ᵀ`.
pub fn scatter_within<T: Real>(ds: &LabeledDataset<T>) -> Result<SquareEvenTensor<T>> {
    let (means, _) = class_means(ds);
    let mut xc = ds.data_matrix();
    for (j, &l) in ds.labels().iter().enumerate() {
        for f in 0..xc.nrows() {
            xc[(f, j)] = xc[(f, j)] - means[(f, l)];
        }
    }
    scatter_from_matrix(&xc, ds.feature_shape())
}

/// Between-class scatter `Σ_i n_i (ξ_i−ξ) *_1 (ξ_i−ξ)ᵀ`, by the explicit
/// sum over classes.
pub fn scatter_between<T: Real>(ds: &LabeledDataset<T>) -> Result<SquareEvenTensor<T>> {
    let (means, global) = class_means(ds);
    let dim = means.nrows();
    let c = ds.n_classes();
    let mut weighted = Array2::<T>::zeros((dim, c));
    for (l, &count) in ds.class_counts().iter().enumerate() {
        let w = T::from_usize(count).unwrap().sqrt();
        for f in 0..dim {
            weighted[(f, l)] = (means[(f, l)] - global[f]) * w;
        }
    }
    scatter_from_matrix(&weighted, ds.feature_shape())
}

/// Total scatter `X̄ *_1 X̄ᵀ` of a data tensor (no labels involved).
pub fn scatter_total<T: Real>(x: &DenseTensor<T>) -> Result<SquareEvenTensor<T>> {
    let centered = center_data(x)?;
    let split = GroupSplit::new(x.order() - 1, 1).unwrap();
    let xf = centered.group_flatten(split)?;
    let feature_shape = &x.shape()[..x.order() - 1];
    scatter_from_matrix(&xf, feature_shape)
}

/// The within/between/total scatter tensors with the class and global means.
#[derive(Debug, Clone)]
pub struct ScatterSet<T> {
    pub s_w: SquareEvenTensor<T>,
    pub s_b: SquareEvenTensor<T>,
    pub s_t: SquareEvenTensor<T>,
    feature_shape: Vec<usize>,
    class_means: Array2<T>,
    global_mean: Array1<T>,
}

impl<T: Real> ScatterSet<T> {
    pub fn compute(ds: &LabeledDataset<T>) -> Result<Self> {
        let (means, global) = class_means(ds);
        Ok(ScatterSet {
            s_w: scatter_within(ds)?,
            s_b: scatter_between(ds)?,
            s_t: scatter_total(ds.x())?,
            feature_shape: ds.feature_shape().to_vec(),
            class_means: means,
            global_mean: global,
        })
    }

    pub fn feature_shape(&self) -> &[usize] {
        &self.feature_shape
    }

    /// Class mean ξ_i as an order-M tensor.
    pub fn class_mean(&self, class: usize) -> Result<DenseTensor<T>> {
        if class >= self.class_means.ncols() {
            return Err(Error::IndexOutOfRange {
                index: class,
                extent: self.class_means.ncols(),
            });
        }
        let col: Vec<T> = self.class_means.column(class).to_vec();
        DenseTensor::from_vec(self.feature_shape.clone(), col)
    }

    pub fn global_mean(&self) -> Result<DenseTensor<T>> {
        DenseTensor::from_vec(self.feature_shape.clone(), self.global_mean.to_vec())
    }

    pub fn denominator(&self, which: Denominator) -> &SquareEvenTensor<T> {
        match which {
            Denominator::Total => &self.s_t,
            Denominator::Within => &self.s_w,
        }
    }
}

/// Which scatter sits in the trace-ratio denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Denominator {
    /// Total scatter `S_t` (bounds the objective by 1).
    #[default]
    Total,
    /// Within-class scatter `S_w`.
    Within,
}

impl std::str::FromStr for Denominator {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "st" | "total" => Ok(Denominator::Total),
            "sw" | "within" => Ok(Denominator::Within),
            other => Err(Error::Config(format!(
                "unknown denominator {other:?} (expected st or sw)"
            ))),
        }
    }
}

/// Options for the MDA front-ends: denominator choice plus solver options
/// (tolerances, cap, seed, regularization).
#[derive(Debug, Clone)]
pub struct MdaOptions<T> {
    pub denominator: Denominator,
    pub solver: SolverOptions<T>,
}

impl<T: Real> Default for MdaOptions<T> {
    fn default() -> Self {
        MdaOptions {
            denominator: Denominator::default(),
            solver: SolverOptions::default(),
        }
    }
}

/// Centered indicator coding: `√(n/n_j) − √(n_j/n)` for samples of class j,
/// `−√(n_j/n)` elsewhere. Columns sum to zero.
#[derive(Debug, Clone)]
pub struct ResponseMatrix<T> {
    matrix: Array2<T>,
}

impl<T: Real> ResponseMatrix<T> {
    pub fn matrix(&self) -> &Array2<T> {
        &self.matrix
    }
}

pub fn label_response_matrix<T: Real>(labels: &[usize]) -> Result<ResponseMatrix<T>> {
    if labels.is_empty() {
        return Err(Error::InvalidLabels("no labels".into()));
    }
    let n = labels.len();
    let c = labels.iter().max().unwrap() + 1;
    let mut counts = vec![0usize; c];
    for &l in labels {
        counts[l] += 1;
    }
    if let Some(empty) = counts.iter().position(|&k| k == 0) {
        return Err(Error::EmptyClass { class: empty });
    }
    let n_t = T::from_usize(n).unwrap();
    let mut matrix = Array2::<T>::zeros((n, c));
    for j in 0..c {
        let nj = T::from_usize(counts[j]).unwrap();
        let in_class = (n_t / nj).sqrt() - (nj / n_t).sqrt();
        let out_class = -(nj / n_t).sqrt();
        for (i, &l) in labels.iter().enumerate() {
            matrix[(i, j)] = if l == j { in_class } else { out_class };
        }
    }
    Ok(ResponseMatrix { matrix })
}

/// Trace-ratio MDA on precomputed scatters: `A = S_b`, `B` = the chosen
/// denominator (regularized inside the solver).
pub fn tr_from_scatters<T: Real>(
    scatters: &ScatterSet<T>,
    d: usize,
    opts: &MdaOptions<T>,
) -> Result<TRSolution<T>> {
    solve_tr_newton(
        &scatters.s_b,
        scatters.denominator(opts.denominator),
        d,
        &opts.solver,
    )
}

/// Ratio-trace MDA on precomputed scatters: GEVP of `{S_b, B + reg}`.
pub fn rt_from_scatters<T: Real>(
    scatters: &ScatterSet<T>,
    d: usize,
    opts: &MdaOptions<T>,
) -> Result<ProjectionTensor<T>> {
    let b = regularize(
        scatters.denominator(opts.denominator),
        opts.solver.regularization,
    )?;
    solve_rt_gevp(&scatters.s_b, &b, d)
}

/// Trace-ratio MDA: Newton iteration with `A = S_b` and the configured
/// denominator scatter.
pub fn mda_tr<T: Real>(
    ds: &LabeledDataset<T>,
    d: usize,
    opts: &MdaOptions<T>,
) -> Result<TRSolution<T>> {
    tr_from_scatters(&ScatterSet::compute(ds)?, d, opts)
}

/// Ratio-trace MDA: generalized eigendecomposition.
pub fn mda_rt<T: Real>(
    ds: &LabeledDataset<T>,
    d: usize,
    opts: &MdaOptions<T>,
) -> Result<ProjectionTensor<T>> {
    rt_from_scatters(&ScatterSet::compute(ds)?, d, opts)
}

/// Least-squares MDA (two stages).
///
/// Stage 1 solves the ridge system `(X̄ *_1 X̄ᵀ + εI) P₁ = X̄ ×_{M+1} B` for
/// the response coding `B`; stage 2 orthonormalizes `P₁` (QR, rank-revealing
/// truncation) and solves the reduced GEVP
/// `(Qᵀ S_b Q) P₂ = Λ (Qᵀ S_t Q + εI) P₂`, returning `Q ×_{M+1} P₂`
/// truncated to `d`.
pub fn mda_ls<T: Real>(
    ds: &LabeledDataset<T>,
    d: usize,
    eps: T,
) -> Result<ProjectionTensor<T>> {
    if eps < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "ε must be nonnegative, got {}",
            eps.as_f64()
        )));
    }
    let response = label_response_matrix::<T>(ds.labels())?;
    let p1 = ls_stage1(ds, response.matrix(), eps)?;

    // Orthonormal basis of the stage-1 span. The coding makes the response
    // rank-deficient by one, so dependent columns get dropped here.
    let q = orthonormal_basis(&p1)?;
    let rank = q.ncols();
    if d > rank {
        return Err(Error::InvalidArgument(format!(
            "d = {d} exceeds the stage-1 rank {rank}"
        )));
    }

    let scatters = ScatterSet::compute(ds)?;
    let sb_red = q.t().dot(&scatters.s_b.flat_view()).dot(&q);
    let st_red = q.t().dot(&scatters.s_t.flat_view()).dot(&q) + Array2::<T>::eye(rank) * eps;
    let group = [rank];
    let sb_red = SquareEvenTensor::from_flat(&((&sb_red + &sb_red.t()) * T::c(0.5)), &group, &group)?;
    let st_red = SquareEvenTensor::from_flat(&((&st_red + &st_red.t()) * T::c(0.5)), &group, &group)?;
    let sys = gevp(&sb_red, &st_red)?.truncate(d)?;
    let p2 = sys.basis_matrix();
    let p = q.dot(&p2);
    ProjectionTensor::from_matrix(&p, ds.feature_shape())
}

/// Stage-1 ridge solution `(X̄X̄ᵀ + εI)⁻¹ X̄ B` (flattened, features × c).
fn ls_stage1<T: Real>(
    ds: &LabeledDataset<T>,
    response: &Array2<T>,
    eps: T,
) -> Result<Array2<T>> {
    let centered = center_data(ds.x())?;
    let split = GroupSplit::new(ds.x().order() - 1, 1).unwrap();
    let xf = centered.group_flatten(split)?;
    let dim = xf.nrows();
    let g = xf.dot(response);
    let m = xf.dot(&xf.t()) + Array2::<T>::eye(dim) * eps;
    let (vals, vecs) = eigh_desc_matrix(&m)?;
    if vals[dim - 1] <= T::c(1e-13) * vals[0].max(T::one()) {
        return Err(Error::SingularSystem {
            hint: ": the stage-1 normal system is singular, set ε > 0",
        });
    }
    let inv = symmetric_function_matrix(&vals, &vecs, |v| T::one() / v);
    Ok(inv.dot(&g))
}

/// Restriction of the discriminant problem to `range(S_t)`, where the
/// objective value lives.
#[derive(Debug, Clone)]
pub struct RangeRestriction<T> {
    pub s_b_reduced: SquareEvenTensor<T>,
    pub s_t_reduced: SquareEvenTensor<T>,
    /// Orthonormal basis of `range(S_t)`, stacked feature_shape × r.
    pub basis: DenseTensor<T>,
}

impl<T: Real> RangeRestriction<T> {
    pub fn rank(&self) -> usize {
        *self.basis.shape().last().unwrap()
    }

    /// Lift a projection of the reduced problem back to the feature modes.
    pub fn lift(&self, p_reduced: &ProjectionTensor<T>) -> Result<ProjectionTensor<T>> {
        let split = GroupSplit::new(self.basis.order() - 1, 1).unwrap();
        let z = self.basis.group_flatten(split)?;
        let lifted = z.dot(&p_reduced.to_matrix());
        let feature_shape = &self.basis.shape()[..self.basis.order() - 1];
        ProjectionTensor::from_matrix(&lifted, feature_shape)
    }
}

/// Project out the null space of `S_t`: returns reduced `S_b`, reduced
/// `S_t` and the orthonormal basis `Z₂` of `range(S_t)`.
pub fn restrict_to_range<T: Real>(scatters: &ScatterSet<T>) -> Result<RangeRestriction<T>> {
    let es = eig_sym(&scatters.s_t)?;
    let vmax = es.values().first().copied().unwrap_or_else(T::zero);
    if vmax <= T::zero() {
        return Err(Error::InvalidArgument(
            "total scatter is zero; nothing to restrict to".into(),
        ));
    }
    let tol = T::c(1e-10) * vmax;
    let rank = es.values().iter().take_while(|&&v| v > tol).count();
    let z = es.basis_matrix();
    let z2 = z.slice(ndarray::s![.., ..rank]).to_owned();
    let group = [rank];
    let reduce = |s: &SquareEvenTensor<T>| -> Result<SquareEvenTensor<T>> {
        let red = z2.t().dot(&s.flat_view()).dot(&z2);
        SquareEvenTensor::from_flat(&((&red + &red.t()) * T::c(0.5)), &group, &group)
    };
    let mut shape = scatters.feature_shape().to_vec();
    shape.push(rank);
    let mut data = vec![T::zero(); z2.nrows() * rank];
    for f in 0..z2.nrows() {
        for c in 0..rank {
            data[f * rank + c] = z2[(f, c)];
        }
    }
    Ok(RangeRestriction {
        s_b_reduced: reduce(&scatters.s_b)?,
        s_t_reduced: reduce(&scatters.s_t)?,
        basis: DenseTensor::from_vec(shape, data)?,
    })
}

/// Per-sample projection `Pᵀ *_M X⁽ʲ⁾`, stacked as a `d × n` tensor.
pub fn project<T: Real>(x: &DenseTensor<T>, p: &ProjectionTensor<T>) -> Result<DenseTensor<T>> {
    if x.order() < 2 || &x.shape()[..x.order() - 1] != p.feature_shape() {
        return Err(Error::shape_mismatch(
            "project",
            x.shape(),
            p.as_dense().shape(),
        ));
    }
    let split = GroupSplit::new(x.order() - 1, 1).unwrap();
    let xf = x.flat_view(split)?;
    let out = p.to_matrix().t().dot(&xf);
    DenseTensor::group_unflatten(&out, &[p.d()], &[xf.ncols()])
}
