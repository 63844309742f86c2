//! The trace-ratio problem and its solvers.
//!
//! `solve_tr_newton` maximizes `Tr(Pᵀ *_M A *_M P) / Tr(Pᵀ *_M B *_M P)`
//! over unitary projection tensors `P` by Newton iteration on
//! `f(ρ) = max_P Tr(Pᵀ (A − ρB) P)`, the sum of the `d` largest eigenvalues
//! of the pencil. `f` is strictly decreasing and convex with `f(ρ*) = 0`, so
//! the iteration `ρ_{k+1} = ρ_k − f(ρ_k)/f'(ρ_k)` — equivalently
//! `ρ_{k+1} = J_tr(P(ρ_k))` — increases monotonically to the optimum.
//!
//! `solve_rt_gevp` solves the non-equivalent ratio-trace surrogate exactly
//! through a generalized eigendecomposition of `{A, B}`; its output is
//! B-orthonormal rather than unitary.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectral::{self, eigh_desc_matrix, gevp};
use crate::subspace;
use crate::tensor::{DenseTensor, GroupSplit, SquareEvenTensor};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Order-(M+1) tensor whose `d` frontal slices span the projection subspace.
///
/// Solutions of the TR problem are unitary (`Pᵀ *_M P = I_d`); ratio-trace
/// solutions are B-orthonormal instead, so unitarity is asserted where the
/// constraint demands it rather than at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionTensor<T> {
    inner: DenseTensor<T>,
}

impl<T: Real> ProjectionTensor<T> {
    pub fn new(inner: DenseTensor<T>) -> Result<Self> {
        if inner.order() < 2 {
            return Err(Error::InvalidArgument(
                "projection tensor needs at least one feature mode plus the slice mode".into(),
            ));
        }
        Ok(ProjectionTensor { inner })
    }

    /// Orthonormalization of a seeded Gaussian tensor (QR on the flattened
    /// form).
    pub fn random_orthonormal(feature_shape: &[usize], d: usize, seed: u64) -> Result<Self> {
        let n: usize = feature_shape.iter().product();
        if d == 0 || d > n {
            return Err(Error::InvalidArgument(format!(
                "d = {d} out of range 1..={n}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = subspace::random_orthonormal::<T>(n, d, &mut rng)?;
        Self::from_matrix(&q, feature_shape)
    }

    pub fn from_matrix(m: &Array2<T>, feature_shape: &[usize]) -> Result<Self> {
        let d = m.ncols();
        let inner = DenseTensor::group_unflatten(m, feature_shape, &[d])?;
        ProjectionTensor::new(inner)
    }

    pub fn as_dense(&self) -> &DenseTensor<T> {
        &self.inner
    }

    pub fn into_dense(self) -> DenseTensor<T> {
        self.inner
    }

    /// Target dimension (extent of the trailing slice mode).
    pub fn d(&self) -> usize {
        *self.inner.shape().last().unwrap()
    }

    pub fn feature_shape(&self) -> &[usize] {
        &self.inner.shape()[..self.inner.order() - 1]
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_shape().iter().product()
    }

    /// Flattened form, features × d.
    pub fn to_matrix(&self) -> Array2<T> {
        let split = GroupSplit::new(self.inner.order() - 1, 1).unwrap();
        self.inner.group_flatten(split).unwrap()
    }

    /// `Pᵀ *_M P = I_d` within `tol` (default 1e-10).
    pub fn is_unitary(&self, tol: Option<T>) -> bool {
        let tol = tol.unwrap_or_else(|| T::c(1e-10));
        let p = self.to_matrix();
        let gram = p.t().dot(&p);
        let d = self.d();
        let mut worst = T::zero();
        for i in 0..d {
            for j in 0..d {
                let want = if i == j { T::one() } else { T::zero() };
                worst = worst.max((gram[(i, j)] - want).abs());
            }
        }
        worst <= tol
    }

    /// Rotate the slice mode: `P ×_{M+1} Q` for a `d × d` matrix `Q`.
    pub fn rotate(&self, q: &Array2<T>) -> Result<Self> {
        let rotated = self.inner.m_mode_product(q, self.inner.order() - 1)?;
        ProjectionTensor::new(rotated)
    }
}

/// Regularization applied to the denominator tensor.
///
/// `Shift`: `B + εI`; `Convex`: `αB + (1−α)I`. A zero shift leaves `B`
/// untouched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regularization<T> {
    Shift { eps: T },
    Convex { alpha: T },
}

impl<T: Real> Regularization<T> {
    pub fn none() -> Self {
        Regularization::Shift { eps: T::zero() }
    }
}

/// Regularize a square even tensor per the chosen mode. For a PSD input and
/// ε > 0 (or α < 1) the result is symmetric positive definite.
pub fn regularize<T: Real>(
    b: &SquareEvenTensor<T>,
    reg: Regularization<T>,
) -> Result<SquareEvenTensor<T>> {
    match reg {
        Regularization::Shift { eps } => {
            if eps < T::zero() {
                return Err(Error::InvalidArgument(format!(
                    "regularization ε must be nonnegative, got {}",
                    eps.as_f64()
                )));
            }
            if eps == T::zero() {
                Ok(b.clone())
            } else {
                b.add_scaled_identity(eps)
            }
        }
        Regularization::Convex { alpha } => {
            if alpha < T::zero() || alpha > T::one() {
                return Err(Error::InvalidArgument(format!(
                    "convex regularization needs 0 ≤ α ≤ 1, got {}",
                    alpha.as_f64()
                )));
            }
            b.scale(alpha).add_scaled_identity(T::one() - alpha)
        }
    }
}

/// Initial projection for the Newton solver.
#[derive(Debug, Clone)]
pub enum Init<T> {
    /// Orthonormalized seeded Gaussian tensor.
    RandomOrthonormal,
    /// Caller-supplied unitary start.
    Supplied(ProjectionTensor<T>),
}

/// Options for [`solve_tr_newton`].
#[derive(Debug, Clone)]
pub struct SolverOptions<T> {
    pub max_iter: usize,
    pub tol: T,
    pub seed: u64,
    pub init: Init<T>,
    /// Applied to `B` unconditionally when nonzero, so that the solved
    /// problem does not depend on a data-driven definiteness verdict.
    pub regularization: Regularization<T>,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        SolverOptions {
            max_iter: 100,
            tol: T::c(1e-9),
            seed: 0,
            init: Init::RandomOrthonormal,
            regularization: Regularization::Shift { eps: T::c(0.01) },
        }
    }
}

impl<T: Real> SolverOptions<T> {
    /// Options solving the unmodified problem (ε = 0).
    pub fn exact() -> Self {
        SolverOptions {
            regularization: Regularization::none(),
            ..Default::default()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be ≥ 1".into()));
        }
        if !(self.tol > T::zero()) {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        Ok(())
    }
}

/// One Newton step record: `(ρ_k, f(ρ_k), f'(ρ_k))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonStep<T> {
    pub rho: T,
    pub f: T,
    pub f_prime: T,
}

/// Converged (or capped) output of the Newton solver.
#[derive(Debug, Clone)]
pub struct TRSolution<T> {
    pub rho_star: T,
    pub p: ProjectionTensor<T>,
    pub iterations: usize,
    pub history: Vec<NewtonStep<T>>,
    pub converged: bool,
    /// Set when the eigenvalue gap at the cut `d` was numerically tied, in
    /// which case the optimizer subspace is not unique.
    pub tie_at_cut: bool,
}

/// Evaluation of `f(ρ)` with its derivative and maximizing projection.
#[derive(Debug, Clone)]
pub struct FEval<T> {
    pub f: T,
    pub f_prime: T,
    pub p: ProjectionTensor<T>,
}

fn check_pair<T: Real>(
    a: &SquareEvenTensor<T>,
    b: &SquareEvenTensor<T>,
) -> Result<()> {
    a.require_symmetric(None)?;
    b.require_symmetric(None)?;
    if a.as_dense().shape() != b.as_dense().shape() {
        return Err(Error::shape_mismatch(
            "trace_ratio pair",
            a.as_dense().shape(),
            b.as_dense().shape(),
        ));
    }
    Ok(())
}

/// Quadratic-form traces `(Tr(PᵀAP), Tr(PᵀBP))` on flattened operands.
fn form_traces<T: Real>(
    p: &Array2<T>,
    af: &Array2<T>,
    bf: &Array2<T>,
) -> (T, T) {
    let ap = af.dot(p);
    let bp = bf.dot(p);
    let mut num = T::zero();
    let mut den = T::zero();
    for c in 0..p.ncols() {
        for r in 0..p.nrows() {
            num = num + p[(r, c)] * ap[(r, c)];
            den = den + p[(r, c)] * bp[(r, c)];
        }
    }
    (num, den)
}

fn denominator_floor<T: Real>(bf: &Array2<T>, p: &Array2<T>) -> T {
    let bn = bf.iter().fold(T::zero(), |acc, &v| acc + v * v).sqrt();
    let pn = p.iter().fold(T::zero(), |acc, &v| acc + v * v);
    (bn * pn * T::c(1e-14)).max(T::min_positive_value())
}

/// The trace-ratio objective `J_tr(P) = Tr(PᵀAP) / Tr(PᵀBP)`.
///
/// Defined for any conformable `P`; the unitary constraint belongs to the
/// optimization problem, not the formula. A denominator at or below the
/// rounding floor is a degenerate-denominator error.
pub fn trace_ratio_objective<T: Real>(
    p: &ProjectionTensor<T>,
    a: &SquareEvenTensor<T>,
    b: &SquareEvenTensor<T>,
) -> Result<T> {
    check_pair(a, b)?;
    if p.feature_shape() != a.left_shape() {
        return Err(Error::shape_mismatch(
            "trace_ratio_objective",
            p.as_dense().shape(),
            a.as_dense().shape(),
        ));
    }
    let pf = p.to_matrix();
    let af = a.flatten();
    let bf = b.flatten();
    let (num, den) = form_traces(&pf, &af, &bf);
    if den <= denominator_floor(&bf, &pf) {
        return Err(Error::DegenerateDenominator { value: den.as_f64() });
    }
    Ok(num / den)
}

/// Matrix-level core of `f(ρ)`: top-`d` eigenpairs of `A − ρB`, the sum of
/// those eigenvalues, `Tr(PᵀBP)`, and whether the spectrum was tied at the
/// cut.
fn pencil_top_d<T: Real>(
    af: &Array2<T>,
    bf: &Array2<T>,
    rho: T,
    d: usize,
) -> Result<(T, T, Array2<T>, bool)> {
    let n = af.nrows();
    let g = af - &(bf * rho);
    let (vals, vecs) = eigh_desc_matrix(&g)?;
    let f = vals[..d].iter().fold(T::zero(), |acc, &v| acc + v);
    let spread = (vals[0] - vals[n - 1]).abs().max(T::one());
    let tied = d < n && (vals[d - 1] - vals[d]).abs() <= T::c(1e-10) * spread;
    let p = vecs.slice(ndarray::s![.., ..d]).to_owned();
    let bp = bf.dot(&p);
    let mut tr_b = T::zero();
    for c in 0..d {
        for r in 0..n {
            tr_b = tr_b + p[(r, c)] * bp[(r, c)];
        }
    }
    Ok((f, tr_b, p, tied))
}

/// Evaluate `f(ρ) = Σ_{i≤d} λ_i(A − ρB)`, its derivative
/// `f'(ρ) = −Tr(PᵀBP)`, and the maximizing projection.
///
/// `B` must be symmetric PSD with `dim N(B) < d` (or regularized), which
/// makes `f' < 0`.
pub fn f_eval<T: Real>(
    a: &SquareEvenTensor<T>,
    b: &SquareEvenTensor<T>,
    rho: T,
    d: usize,
) -> Result<FEval<T>> {
    check_pair(a, b)?;
    let n = a.dim();
    if d == 0 || d > n {
        return Err(Error::InvalidArgument(format!(
            "d = {d} out of range 1..={n}"
        )));
    }
    let af = a.flatten();
    let bf = b.flatten();
    let (f, tr_b, p, _) = pencil_top_d(&af, &bf, rho, d)?;
    let proj = ProjectionTensor::from_matrix(&p, a.left_shape())?;
    Ok(FEval {
        f,
        f_prime: -tr_b,
        p: proj,
    })
}

/// Newton iteration for the trace-ratio problem (maximization).
///
/// Stops when `|f(ρ_k)| ≤ tol·max(1, |ρ_k|)` or the update falls below
/// `tol`, capping at `max_iter`; a capped run returns `converged = false`
/// with its history instead of an error. The reported `rho_star` is the
/// final refined update `J_tr(P(ρ_k))`, so `|f(rho_star)|` is one Newton
/// step tighter than the stopping test.
pub fn solve_tr_newton<T: Real>(
    a: &SquareEvenTensor<T>,
    b: &SquareEvenTensor<T>,
    d: usize,
    opts: &SolverOptions<T>,
) -> Result<TRSolution<T>> {
    opts.validate()?;
    check_pair(a, b)?;
    let n = a.dim();
    if d == 0 || d > n {
        return Err(Error::InvalidArgument(format!(
            "d = {d} out of range 1..={n}"
        )));
    }
    let b_used = regularize(b, opts.regularization)?;
    let bf = b_used.flatten();
    let min_eig = spectral::min_eig_matrix(&bf)?;
    let pd_tol = T::c(spectral::DEFINITENESS_RTOL)
        * b_used.as_dense().frobenius_norm().max(T::one());
    if min_eig <= pd_tol {
        let unregularized = matches!(opts.regularization, Regularization::Shift { eps } if eps == T::zero());
        return Err(Error::NotPositiveDefinite {
            min_eig: min_eig.as_f64(),
            hint: if unregularized {
                "; B needs regularization (ε > 0)"
            } else {
                "; B is indefinite even after regularization"
            },
        });
    }
    let af = a.flatten();

    let p0 = match &opts.init {
        Init::RandomOrthonormal => {
            ProjectionTensor::random_orthonormal(a.left_shape(), d, opts.seed)?
        }
        Init::Supplied(p) => {
            if p.feature_shape() != a.left_shape() || p.d() != d {
                return Err(Error::shape_mismatch(
                    "solve_tr_newton (init)",
                    p.as_dense().shape(),
                    a.as_dense().shape(),
                ));
            }
            if !p.is_unitary(Some(T::c(1e-8))) {
                return Err(Error::InvalidArgument(
                    "supplied initial projection is not unitary".into(),
                ));
            }
            p.clone()
        }
    };
    let p0f = p0.to_matrix();
    let (num0, den0) = form_traces(&p0f, &af, &bf);
    if den0 <= denominator_floor(&bf, &p0f) {
        return Err(Error::DegenerateDenominator { value: den0.as_f64() });
    }
    let mut rho = num0 / den0;

    let mut history: Vec<NewtonStep<T>> = Vec::new();
    let mut converged = false;
    let mut tie_at_cut = false;
    let mut p_star: Option<Array2<T>> = None;
    let mut rho_star = rho;

    for _ in 0..opts.max_iter {
        let (f, tr_b, p, tied) = pencil_top_d(&af, &bf, rho, d)?;
        if tr_b <= denominator_floor(&bf, &p) {
            return Err(Error::DegenerateDenominator { value: tr_b.as_f64() });
        }
        history.push(NewtonStep {
            rho,
            f,
            f_prime: -tr_b,
        });
        let rho_next = rho + f / tr_b;
        tie_at_cut = tied;
        p_star = Some(p);
        rho_star = rho_next;
        if f.abs() <= opts.tol * T::one().max(rho.abs())
            || (rho_next - rho).abs() <= opts.tol
        {
            converged = true;
            break;
        }
        rho = rho_next;
    }

    let p = ProjectionTensor::from_matrix(&p_star.expect("max_iter ≥ 1"), a.left_shape())?;
    Ok(TRSolution {
        rho_star,
        p,
        iterations: history.len(),
        history,
        converged,
        tie_at_cut,
    })
}

/// Exact solution of the ratio-trace surrogate: the `d` largest
/// eigen-tensors of the pair `{A, B}` (B-orthonormal).
pub fn solve_rt_gevp<T: Real>(
    a: &SquareEvenTensor<T>,
    b: &SquareEvenTensor<T>,
    d: usize,
) -> Result<ProjectionTensor<T>> {
    check_pair(a, b)?;
    let n = a.dim();
    if d == 0 || d > n {
        return Err(Error::InvalidArgument(format!(
            "d = {d} out of range 1..={n}"
        )));
    }
    let sys = gevp(a, b)?.truncate(d)?;
    ProjectionTensor::new(sys.basis().clone())
}

/// Constraint whitening: transforms the C-orthonormal problem into the
/// plain unitary one.
///
/// The returned factor `F = C^{1/2}` satisfies `Fᵀ *_M F = C`; the whitened
/// operands are `Â = F⁻¹ A F⁻ᵀ` and `B̂ = F⁻¹ B F⁻ᵀ`, and a unitary solution
/// `P̂` of the whitened problem maps back to the C-orthonormal
/// `P = F⁻¹ *_M P̂` with the same objective value.
#[derive(Debug, Clone)]
pub struct WhitenedProblem<T> {
    pub a_hat: SquareEvenTensor<T>,
    pub b_hat: SquareEvenTensor<T>,
    factor: SquareEvenTensor<T>,
    inv_factor: SquareEvenTensor<T>,
}

impl<T: Real> WhitenedProblem<T> {
    /// The factor `F` with `Fᵀ *_M F = C`.
    pub fn factor(&self) -> &SquareEvenTensor<T> {
        &self.factor
    }

    /// Map a solution of the whitened problem back to the original
    /// constraint: `P = F⁻¹ *_M P̂`.
    pub fn map_back(&self, p_hat: &ProjectionTensor<T>) -> Result<ProjectionTensor<T>> {
        let mapped = self
            .inv_factor
            .as_dense()
            .einstein_product(p_hat.as_dense(), self.inv_factor.modes_per_group())?;
        ProjectionTensor::new(mapped)
    }
}

pub fn whiten_constraint<T: Real>(
    a: &SquareEvenTensor<T>,
    b: &SquareEvenTensor<T>,
    c: &SquareEvenTensor<T>,
) -> Result<WhitenedProblem<T>> {
    check_pair(a, b)?;
    c.require_symmetric(None)?;
    if c.as_dense().shape() != a.as_dense().shape() {
        return Err(Error::shape_mismatch(
            "whiten_constraint",
            c.as_dense().shape(),
            a.as_dense().shape(),
        ));
    }
    let cf = c.flatten();
    let (vals, vecs) = eigh_desc_matrix(&cf)?;
    let n = cf.nrows();
    let pd_tol = T::c(spectral::DEFINITENESS_RTOL) * c.as_dense().frobenius_norm().max(T::one());
    if vals[n - 1] <= pd_tol {
        return Err(Error::NotPositiveDefinite {
            min_eig: vals[n - 1].as_f64(),
            hint: "; the constraint tensor C must be positive definite",
        });
    }
    // F = Q √D Qᵀ and F⁻¹ = Q D^{-1/2} Qᵀ — both symmetric.
    let sqrt_m = spectral::symmetric_function_matrix(&vals, &vecs, |v| v.sqrt());
    let inv_sqrt_m = spectral::symmetric_function_matrix(&vals, &vecs, |v| T::one() / v.sqrt());
    let group = c.left_shape().to_vec();
    let factor = SquareEvenTensor::from_flat(&sqrt_m, &group, &group)?;
    let inv_factor = SquareEvenTensor::from_flat(&inv_sqrt_m, &group, &group)?;
    let whiten = |m: &Array2<T>| -> Result<SquareEvenTensor<T>> {
        let w = inv_sqrt_m.dot(m).dot(&inv_sqrt_m);
        let sym = (&w + &w.t()) * T::c(0.5);
        SquareEvenTensor::from_flat(&sym, &group, &group)
    };
    Ok(WhitenedProblem {
        a_hat: whiten(&a.flatten())?,
        b_hat: whiten(&b.flatten())?,
        factor,
        inv_factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn diag2(a: f64, b: f64) -> SquareEvenTensor<f64> {
        SquareEvenTensor::diagonal(&[2], &[a, b]).unwrap()
    }

    fn random_symmetric(group: &[usize], rng: &mut impl Rng) -> SquareEvenTensor<f64> {
        let n: usize = group.iter().product();
        let m = Array2::from_shape_fn((n, n), |_| rng.gen::<f64>() - 0.5);
        SquareEvenTensor::from_flat(&((&m + &m.t()) * 0.5), group, group).unwrap()
    }

    fn random_spd(group: &[usize], rng: &mut impl Rng) -> SquareEvenTensor<f64> {
        let n: usize = group.iter().product();
        let m = Array2::from_shape_fn((n, n), |_| rng.gen::<f64>() - 0.5);
        SquareEvenTensor::from_flat(&(m.t().dot(&m) + Array2::<f64>::eye(n) * 0.3), group, group)
            .unwrap()
    }

    fn basis_projection(n: usize, cols: &[usize]) -> ProjectionTensor<f64> {
        let mut m = Array2::<f64>::zeros((n, cols.len()));
        for (c, &r) in cols.iter().enumerate() {
            m[(r, c)] = 1.0;
        }
        ProjectionTensor::from_matrix(&m, &[n]).unwrap()
    }

    #[test]
    fn objective_proportional_pair() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let b = random_spd(&[2, 2], &mut rng);
        let a = b.scale(3.5);
        let p = ProjectionTensor::random_orthonormal(&[2, 2], 2, 7).unwrap();
        let j = trace_ratio_objective(&p, &a, &b).unwrap();
        assert!((j - 3.5).abs() < 1e-12);
    }

    #[test]
    fn objective_full_dimension_and_selector() {
        let a = diag2(2.0, 1.0);
        let b = SquareEvenTensor::identity(&[2]).unwrap();
        let p_full = basis_projection(2, &[0, 1]);
        assert!((trace_ratio_objective(&p_full, &a, &b).unwrap() - 1.5).abs() < 1e-15);
        let e1 = basis_projection(2, &[0]);
        assert!((trace_ratio_objective(&e1, &a, &b).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn objective_degenerate_denominator() {
        let a = diag2(1.0, 1.0);
        let b = diag2(0.0, 0.0);
        let p = basis_projection(2, &[0]);
        assert!(matches!(
            trace_ratio_objective(&p, &a, &b),
            Err(Error::DegenerateDenominator { .. })
        ));
    }

    #[test]
    fn f_eval_hand_cases() {
        // Pencil diag(0, −5) at ρ = 3: f = 0, maximizer e₁, f' = −1.
        let a = diag2(3.0, 1.0);
        let b = diag2(1.0, 2.0);
        let fe = f_eval(&a, &b, 3.0, 1).unwrap();
        assert!(fe.f.abs() < 1e-14);
        assert!((fe.f_prime + 1.0).abs() < 1e-12);
        let p = fe.p.to_matrix();
        assert!((p[(0, 0)].abs() - 1.0).abs() < 1e-12 && p[(1, 0)].abs() < 1e-12);

        // ρ = 0 reduces to the top-d eigenvalue sum of A.
        let fe0 = f_eval(&a, &b, 0.0, 1).unwrap();
        assert!((fe0.f - 3.0).abs() < 1e-14);

        // A = B = I, d = 1: f(ρ) = 1 − ρ, f' = −1.
        let i2 = SquareEvenTensor::<f64>::identity(&[2]).unwrap();
        for rho in [0.0, 0.5, 2.0] {
            let fe = f_eval(&i2, &i2, rho, 1).unwrap();
            assert!((fe.f - (1.0 - rho)).abs() < 1e-14);
            assert!((fe.f_prime + 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn newton_proportional_pair_converges_fast() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let b = random_spd(&[2, 2], &mut rng);
        let a = b.scale(2.0);
        let opts = SolverOptions::exact().with_seed(5);
        let sol = solve_tr_newton(&a, &b, 2, &opts).unwrap();
        assert!(sol.converged);
        assert!(sol.iterations <= 2, "iterations {}", sol.iterations);
        assert!((sol.rho_star - 2.0).abs() < 1e-12);
    }

    #[test]
    fn newton_diagonal_instance() {
        let a = diag2(3.0, 1.0);
        let b = diag2(1.0, 2.0);
        let opts = SolverOptions::exact().with_seed(3);
        let sol = solve_tr_newton(&a, &b, 1, &opts).unwrap();
        assert!(sol.converged);
        assert!((sol.rho_star - 3.0).abs() < 1e-9);
        let p = sol.p.to_matrix();
        assert!((p[(0, 0)].abs() - 1.0).abs() < 1e-8);
        assert!(sol.p.is_unitary(None));
        // ρ_k nondecreasing and approaches from below.
        for w in sol.history.windows(2) {
            assert!(w[1].rho >= w[0].rho - 1e-12);
        }
        for s in &sol.history {
            assert!(s.f >= -1e-9);
        }
    }

    #[test]
    fn newton_monte_carlo_dominance_small() {
        // I = (4), d = 2: exhaustive sampling of unitary P cannot beat ρ*.
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let a = random_symmetric(&[4], &mut rng);
        let b = random_spd(&[4], &mut rng);
        let opts = SolverOptions::exact().with_seed(1);
        let sol = solve_tr_newton(&a, &b, 2, &opts).unwrap();
        assert!(sol.converged);
        let af = a.flatten();
        let bf = b.flatten();
        let mut best = f64::NEG_INFINITY;
        for _ in 0..1_000_000 {
            let g = Array2::from_shape_fn((4, 2), |_| {
                rng.sample::<f64, _>(rand_distr::StandardNormal)
            });
            let q = crate::subspace::orthonormalize_columns(&g).unwrap();
            let (num, den) = form_traces(&q, &af, &bf);
            best = best.max(num / den);
        }
        assert!(
            sol.rho_star >= best - 1e-3,
            "rho* {} vs sampled max {best}",
            sol.rho_star
        );
        assert!(sol.rho_star >= best - 1e-9 || (sol.rho_star - best).abs() < 1e-3);
    }

    #[test]
    fn newton_requires_pd_denominator_without_regularization() {
        let a = diag2(1.0, 2.0);
        let b = diag2(1.0, 0.0);
        let err = solve_tr_newton(&a, &b, 1, &SolverOptions::exact()).unwrap_err();
        match err {
            Error::NotPositiveDefinite { hint, .. } => {
                assert!(hint.contains("regularization"));
            }
            other => panic!("unexpected error {other:?}"),
        }
        // With a shift it solves fine.
        let opts = SolverOptions {
            regularization: Regularization::Shift { eps: 0.5 },
            ..SolverOptions::default()
        };
        let sol = solve_tr_newton(&a, &b, 1, &opts).unwrap();
        assert!(sol.converged);
        // B + 0.5I = diag(1.5, 0.5): optimum is max(1/1.5, 2/0.5) = 4 at e₂.
        assert!((sol.rho_star - 4.0).abs() < 1e-9);
    }

    #[test]
    fn newton_non_convergence_is_flagged_not_an_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let a = random_symmetric(&[2, 3], &mut rng);
        let b = random_spd(&[2, 3], &mut rng);
        let opts = SolverOptions {
            max_iter: 1,
            tol: 1e-15,
            ..SolverOptions::exact()
        };
        let sol = solve_tr_newton(&a, &b, 2, &opts).unwrap();
        assert!(!sol.converged);
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.history.len(), 1);
    }

    #[test]
    fn newton_rho_star_at_least_initial_objective() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let a = random_symmetric(&[3], &mut rng);
        let b = random_spd(&[3], &mut rng);
        let p0 = ProjectionTensor::random_orthonormal(&[3], 1, 9).unwrap();
        let j0 = trace_ratio_objective(&p0, &a, &b).unwrap();
        let opts = SolverOptions {
            init: Init::Supplied(p0),
            ..SolverOptions::exact()
        };
        let sol = solve_tr_newton(&a, &b, 1, &opts).unwrap();
        assert!(sol.rho_star >= j0 - 1e-12);
    }

    #[test]
    fn f_is_decreasing_convex_and_derivative_matches_fd() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let a = random_symmetric(&[2, 2], &mut rng);
        let b = random_spd(&[2, 2], &mut rng);
        let d = 2;
        let sol = solve_tr_newton(&a, &b, d, &SolverOptions::exact()).unwrap();
        let hi = 2.0 * sol.rho_star.abs().max(0.5);
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * hi / 49.0).collect();
        let fs: Vec<f64> = grid.iter().map(|&r| f_eval(&a, &b, r, d).unwrap().f).collect();
        for w in fs.windows(2) {
            assert!(w[0] > w[1], "f must strictly decrease");
        }
        for i in 0..grid.len() - 2 {
            let mid = f_eval(&a, &b, (grid[i] + grid[i + 2]) / 2.0, d).unwrap().f;
            assert!(mid <= (fs[i] + fs[i + 2]) / 2.0 + 1e-12);
        }
        for &r in &[grid[5], grid[20], grid[40]] {
            let fe = f_eval(&a, &b, r, d).unwrap();
            let h = 1e-6 * (1.0 + r.abs());
            let fp = (f_eval(&a, &b, r + h, d).unwrap().f
                - f_eval(&a, &b, r - h, d).unwrap().f)
                / (2.0 * h);
            assert!(
                (fe.f_prime - fp).abs() <= 1e-5 * fp.abs().max(1e-3),
                "f' {} vs fd {fp}",
                fe.f_prime
            );
        }
    }

    #[test]
    fn objective_invariant_under_slice_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let a = random_symmetric(&[2, 2], &mut rng);
        let b = random_spd(&[2, 2], &mut rng);
        let p = ProjectionTensor::random_orthonormal(&[2, 2], 2, 4).unwrap();
        let q = crate::subspace::random_orthonormal::<f64>(2, 2, &mut rng).unwrap();
        let rotated = p.rotate(&q).unwrap();
        assert!(rotated.is_unitary(None));
        let j1 = trace_ratio_objective(&p, &a, &b).unwrap();
        let j2 = trace_ratio_objective(&rotated, &a, &b).unwrap();
        assert!((j1 - j2).abs() < 1e-12);
    }

    #[test]
    fn newton_subspace_unique_up_to_rotation() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let a = random_symmetric(&[4], &mut rng);
        let b = random_spd(&[4], &mut rng);
        let s1 = solve_tr_newton(&a, &b, 2, &SolverOptions::exact().with_seed(17)).unwrap();
        let s2 = solve_tr_newton(&a, &b, 2, &SolverOptions::exact().with_seed(99)).unwrap();
        // Only meaningful when the pencil gap at the cut is clean.
        if !s1.tie_at_cut && !s2.tie_at_cut {
            let ang = crate::subspace::max_principal_angle(&s1.p.to_matrix(), &s2.p.to_matrix())
                .unwrap();
            assert!(ang < 1e-6, "principal angle {ang}");
        }
        assert!((s1.rho_star - s2.rho_star).abs() < 1e-8);
    }

    #[test]
    fn rt_identity_b_is_top_d() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let a = random_symmetric(&[2, 2], &mut rng);
        let id = SquareEvenTensor::identity(&[2, 2]).unwrap();
        let p = solve_rt_gevp(&a, &id, 2).unwrap();
        let top = crate::spectral::top_d_eig(&a, 2).unwrap();
        let ang =
            crate::subspace::max_principal_angle(&p.to_matrix(), &top.basis_matrix()).unwrap();
        assert!(ang < 1e-10);
    }

    #[test]
    fn rt_diagonal_pair_direction() {
        let a = diag2(2.0, 12.0);
        let b = diag2(1.0, 4.0);
        let p = solve_rt_gevp(&a, &b, 1).unwrap();
        let m = p.to_matrix();
        assert!(m[(0, 0)].abs() < 1e-12, "direction should be e₂");
    }

    #[test]
    fn rt_and_tr_agree_at_d1() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        for _ in 0..10 {
            let a = random_symmetric(&[3], &mut rng);
            let b = random_spd(&[3], &mut rng);
            let tr = solve_tr_newton(&a, &b, 1, &SolverOptions::exact()).unwrap();
            let sys = gevp(&a, &b).unwrap();
            assert!(
                (tr.rho_star - sys.values()[0]).abs() <= 1e-8 * (1.0 + sys.values()[0].abs()),
                "{} vs {}",
                tr.rho_star,
                sys.values()[0]
            );
        }
    }

    #[test]
    fn rt_rejects_singular_b() {
        let a = diag2(1.0, 1.0);
        let b = diag2(1.0, 0.0);
        match solve_rt_gevp(&a, &b, 1) {
            Err(Error::NotPositiveDefinite { hint, .. }) => {
                assert!(hint.contains("regulariz"), "{hint}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn regularize_modes() {
        let b0 = diag2(0.0, 0.0);
        let same = regularize(&b0, Regularization::Shift { eps: 0.0 }).unwrap();
        assert_eq!(same, b0);
        let shifted = regularize(&b0, Regularization::Shift { eps: 0.01 }).unwrap();
        assert_eq!(shifted.flatten(), Array2::<f64>::eye(2) * 0.01);
        // Rank-1 PSD: min eigenvalue of B + εI is ε.
        let rank1 = SquareEvenTensor::<f64>::from_flat(
            &ndarray::array![[1.0, 1.0], [1.0, 1.0]],
            &[2],
            &[2],
        )
        .unwrap();
        let r = regularize(&rank1, Regularization::Shift { eps: 0.25 }).unwrap();
        let (_, min_eig) = crate::spectral::is_positive_definite(&r, None).unwrap();
        assert!((min_eig - 0.25).abs() < 1e-12);
        // Convex mode: αB + (1−α)I.
        let c = regularize(&rank1, Regularization::Convex { alpha: 0.5 }).unwrap();
        assert_eq!(c.flatten(), ndarray::array![[1.0, 0.5], [0.5, 1.0]]);
        assert!(regularize(&rank1, Regularization::Shift { eps: -1.0 }).is_err());
        assert!(regularize(&rank1, Regularization::Convex { alpha: 1.5 }).is_err());
    }

    #[test]
    fn whiten_identity_and_scalar_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let a = random_symmetric(&[2], &mut rng);
        let b = random_spd(&[2], &mut rng);
        let id = SquareEvenTensor::identity(&[2]).unwrap();
        let w = whiten_constraint(&a, &b, &id).unwrap();
        for (x, y) in w.a_hat.as_dense().data().iter().zip(a.as_dense().data()) {
            assert!((x - y).abs() < 1e-12);
        }
        // C = 4I: factor 2I, whitened operand A/4.
        let c4 = id.scale(4.0);
        let w4 = whiten_constraint(&a, &b, &c4).unwrap();
        for (x, y) in w4.a_hat.as_dense().data().iter().zip(a.as_dense().data()) {
            assert!((x - y / 4.0).abs() < 1e-12);
        }
        assert!((w4.factor().flatten()[(0, 0)] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn whiten_factor_reconstructs_c() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let a = random_symmetric(&[2, 2], &mut rng);
        let b = random_spd(&[2, 2], &mut rng);
        let c = random_spd(&[2, 2], &mut rng);
        let w = whiten_constraint(&a, &b, &c).unwrap();
        let rec = w.factor().transpose().compose(w.factor()).unwrap();
        let diff = rec.as_dense().sub(c.as_dense()).unwrap().frobenius_norm();
        assert!(diff <= 1e-10 * c.as_dense().frobenius_norm());
    }

    #[test]
    fn whiten_solution_maps_back_c_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let a = random_symmetric(&[3], &mut rng);
        let b = random_spd(&[3], &mut rng);
        let c = random_spd(&[3], &mut rng);
        let w = whiten_constraint(&a, &b, &c).unwrap();
        let sol = solve_tr_newton(&w.a_hat, &w.b_hat, 1, &SolverOptions::exact()).unwrap();
        let p = w.map_back(&sol.p).unwrap();
        // Pᵀ C P = I.
        let pf = p.to_matrix();
        let gram = pf.t().dot(&c.flatten()).dot(&pf);
        assert!((gram[(0, 0)] - 1.0).abs() < 1e-9);
        // Objective value preserved by the mapping.
        let j = trace_ratio_objective(&p, &a, &b).unwrap();
        assert!((j - sol.rho_star).abs() < 1e-8);
    }

    #[test]
    fn whiten_rejects_indefinite_c() {
        let a = diag2(1.0, 1.0);
        let c = diag2(1.0, -1.0);
        assert!(matches!(
            whiten_constraint(&a, &a, &c),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn supplied_init_must_be_unitary() {
        let a = diag2(2.0, 1.0);
        let b = SquareEvenTensor::identity(&[2]).unwrap();
        let bad = ProjectionTensor::from_matrix(&ndarray::array![[2.0], [0.0]], &[2]).unwrap();
        let opts = SolverOptions {
            init: Init::Supplied(bad),
            ..SolverOptions::exact()
        };
        assert!(solve_tr_newton(&a, &b, 1, &opts).is_err());
    }
}
