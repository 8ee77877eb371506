//! Pure-state representations and the Schmidt decomposition.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerance};

pub type CMatrix = DMatrix<Complex64>;

/// Squared Schmidt coefficients, sorted non-increasing and summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtVector<S> {
    probs: Vec<S>,
}

impl<S: Scalar> SchmidtVector<S> {
    /// Validates and sorts (stably) a vector of squared Schmidt coefficients.
    ///
    /// Float entries within `tol` below zero are clamped to zero; anything more
    /// negative is rejected, as is a total that misses one by more than `tol`.
    pub fn new(probs: Vec<S>, tol: Tolerance) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Empty);
        }
        let mut checked = Vec::with_capacity(probs.len());
        for (index, p) in probs.into_iter().enumerate() {
            let x = p.to_f64();
            if x.is_nan() {
                return Err(Error::Parse("NaN".into()));
            }
            if p < S::zero() {
                if !p.is_zero_within(tol) {
                    return Err(Error::Negative { index, value: x });
                }
                checked.push(S::zero());
            } else {
                checked.push(p);
            }
        }
        let total = checked.iter().cloned().fold(S::zero(), |a, b| a + b);
        if !total.eq_within(&S::one(), tol) {
            return Err(Error::NotNormalized { total: total.to_f64(), tolerance: tol.0 });
        }
        sort_descending(&mut checked);
        Ok(SchmidtVector { probs: checked })
    }

    /// Normalizes non-negative weights by their total.
    pub fn from_weights(weights: Vec<S>, tol: Tolerance) -> Result<Self> {
        let total = weights.iter().cloned().fold(S::zero(), |a, b| a + b);
        if total.is_zero_within(tol) || total < S::zero() {
            return Err(Error::NotNormalized { total: total.to_f64(), tolerance: tol.0 });
        }
        let probs = weights.into_iter().map(|w| w / total.clone()).collect();
        Self::new(probs, tol)
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    pub fn into_probs(self) -> Vec<S> {
        self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Number of nonzero coefficients (the Schmidt rank).
    pub fn support(&self, tol: Tolerance) -> usize {
        self.probs.iter().filter(|p| !p.is_zero_within(tol)).count()
    }

    /// Zero-padded copy of length `max(n, len)`.
    pub fn padded(&self, n: usize) -> Self {
        let mut probs = self.probs.clone();
        probs.resize(n.max(probs.len()), S::zero());
        SchmidtVector { probs }
    }

    /// Drops trailing entries within `tol` of zero (always keeps one entry).
    pub fn trimmed(&self, tol: Tolerance) -> Self {
        let keep = self.support(tol).max(1);
        SchmidtVector { probs: self.probs[..keep].to_vec() }
    }

    /// Tail sum `Σ_{i≥k} p_i` for 1-based `k`; zero past the end.
    pub fn tail(&self, k: usize) -> S {
        let start = k.saturating_sub(1);
        self.probs.iter().skip(start).cloned().fold(S::zero(), |a, b| a + b)
    }

    /// All tail sums, `tails[i] = Σ_{j≥i} p_j` (0-based), with a trailing zero.
    pub fn tails(&self) -> Vec<S> {
        suffix_sums(&self.probs)
    }

    pub fn to_f64(&self) -> SchmidtVector<f64> {
        SchmidtVector { probs: self.probs.iter().map(|p| p.to_f64()).collect() }
    }

    /// Converts a float vector into this mode. Exact mode replaces each entry by the simplest
    /// fraction within `1e-12` (absorbing decomposition round-off), then renormalizes by the
    /// exact total so the result sums to one exactly.
    pub fn from_float(sv: &SchmidtVector<f64>, tol: Tolerance) -> Result<Self> {
        let converted = sv
            .probs
            .iter()
            .map(|&p| S::from_f64(p.max(0.0)).map(|x| x.snapped(1e-12)).ok_or_else(|| Error::Parse(p.to_string())))
            .collect::<Result<Vec<S>>>()?;
        if S::EXACT {
            Self::from_weights(converted, tol)
        } else {
            Self::new(converted, tol)
        }
    }
}

pub(crate) fn sort_descending<S: Scalar>(v: &mut [S]) {
    v.sort_by(|a, b| b.partial_cmp(a).expect("NaN in Schmidt vector"));
}

pub(crate) fn suffix_sums<S: Scalar>(v: &[S]) -> Vec<S> {
    let mut out = vec![S::zero(); v.len() + 1];
    for i in (0..v.len()).rev() {
        out[i] = out[i + 1].clone() + v[i].clone();
    }
    out
}

/// A pure state on `C^{n_A} ⊗ C^{n_B}`; entry `(i, j)` is the amplitude on `|i_A j_B⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    amplitudes: CMatrix,
}

impl BipartiteState {
    pub fn new(amplitudes: CMatrix, tol: Tolerance) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::Empty);
        }
        let norm_sq = amplitudes.norm_squared();
        if (norm_sq - 1.0).abs() > tol.0 {
            return Err(Error::NotNormalized { total: norm_sq, tolerance: tol.0 });
        }
        Ok(BipartiteState { amplitudes })
    }

    /// Rescales to unit norm. Fails on the zero matrix.
    pub fn normalized(amplitudes: CMatrix) -> Result<Self> {
        let norm = amplitudes.norm();
        if amplitudes.is_empty() || norm == 0.0 || !norm.is_finite() {
            return Err(Error::NotNormalized { total: norm * norm, tolerance: 0.0 });
        }
        Ok(BipartiteState { amplitudes: amplitudes / Complex64::new(norm, 0.0) })
    }

    pub(crate) fn from_matrix_unchecked(amplitudes: CMatrix) -> Self {
        BipartiteState { amplitudes }
    }

    pub fn amplitudes(&self) -> &CMatrix {
        &self.amplitudes
    }

    pub fn dim_a(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.amplitudes.ncols()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.norm_squared()
    }
}

/// Hermitian, positive semidefinite, unit-trace operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(matrix: CMatrix, tol: Tolerance) -> Result<Self> {
        if !matrix.is_square() || matrix.is_empty() {
            return Err(Error::Dimension { expected: matrix.nrows(), got: matrix.ncols() });
        }
        if (&matrix - matrix.adjoint()).camax() > tol.0 {
            return Err(Error::NotHermitian);
        }
        let trace = matrix.trace();
        if (trace.re - 1.0).abs() > tol.0 || trace.im.abs() > tol.0 {
            return Err(Error::NotNormalized { total: trace.re, tolerance: tol.0 });
        }
        let eig = SymmetricEigen::new(matrix.clone());
        if let Some(&min) = eig.eigenvalues.iter().min_by(|a, b| a.total_cmp(b)) {
            if min < -tol.0 {
                return Err(Error::NotPositive(min));
            }
        }
        Ok(DensityOperator { matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in ascending order, clamped to `[0, 1]`.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.matrix.clone())
            .eigenvalues
            .iter()
            .map(|x| x.clamp(0.0, 1.0))
            .collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// `λ ρ + (1 − λ) σ`.
    pub fn mix(&self, other: &DensityOperator, lambda: f64) -> Result<DensityOperator> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension { expected: self.dim(), got: other.dim() });
        }
        let l = Complex64::new(lambda, 0.0);
        let m = Complex64::new(1.0 - lambda, 0.0);
        Ok(DensityOperator { matrix: &self.matrix * l + &other.matrix * m })
    }

    /// `U ρ U†`.
    pub fn conjugated(&self, unitary: &CMatrix) -> DensityOperator {
        DensityOperator { matrix: unitary * &self.matrix * unitary.adjoint() }
    }
}

/// Squared singular values of the amplitude matrix, sorted non-increasing.
///
/// The result has length `min(n_A, n_B)` unless `trim` is set, in which case entries
/// below `tol` are dropped (one entry is always kept).
pub fn schmidt_decompose(
    state: &BipartiteState,
    tol: Tolerance,
    trim: bool,
) -> Result<SchmidtVector<f64>> {
    let norm_sq = state.norm_squared();
    if (norm_sq - 1.0).abs() > tol.0 {
        return Err(Error::NotNormalized { total: norm_sq, tolerance: tol.0 });
    }
    let mut probs = monomial_weights(&state.amplitudes).unwrap_or_else(|| {
        state.amplitudes.clone().singular_values().iter().map(|s| s * s).collect()
    });
    sort_descending(&mut probs);
    let total: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= total;
    }
    let sv = SchmidtVector { probs };
    Ok(if trim { sv.trimmed(tol) } else { sv })
}

/// Squared moduli, padded to `min(n_A, n_B)`, when every row and every column holds at most one
/// nonzero entry. Such a matrix is a diagonal one up to permutations and phases, so these are
/// its squared singular values.
fn monomial_weights(m: &CMatrix) -> Option<Vec<f64>> {
    let mut col_used = vec![false; m.ncols()];
    let mut out = Vec::with_capacity(m.nrows().min(m.ncols()));
    for i in 0..m.nrows() {
        let mut row_hit = false;
        for j in 0..m.ncols() {
            let w = m[(i, j)].norm_sqr();
            if w == 0.0 {
                continue;
            }
            if row_hit || col_used[j] {
                return None;
            }
            row_hit = true;
            col_used[j] = true;
            out.push(w);
        }
    }
    out.resize(m.nrows().min(m.ncols()), 0.0);
    Some(out)
}

/// `Σ_i √α_i |i_A i_B⟩` as a diagonal amplitude matrix.
pub fn state_from_schmidt<S: Scalar>(sv: &SchmidtVector<S>) -> BipartiteState {
    let n = sv.len();
    let diag = nalgebra::DVector::from_iterator(
        n,
        sv.probs.iter().map(|p| Complex64::new(p.to_f64().max(0.0).sqrt(), 0.0)),
    );
    BipartiteState { amplitudes: CMatrix::from_diagonal(&diag) }
}

/// Sorted vector of all `count`-fold products of entries; length `len^count`.
pub fn tensor_power<S: Scalar>(sv: &SchmidtVector<S>, count: usize) -> Result<SchmidtVector<S>> {
    if count == 0 {
        return Err(Error::ZeroPower);
    }
    let mut probs = vec![S::one()];
    for _ in 0..count {
        probs = probs
            .iter()
            .flat_map(|a| sv.probs.iter().map(move |b| a.clone() * b.clone()))
            .collect();
    }
    sort_descending(&mut probs);
    Ok(SchmidtVector { probs })
}

/// `Tr_A |Ψ⟩⟨Ψ|`, an `n_B × n_B` operator.
pub fn reduced_density(state: &BipartiteState, tol: Tolerance) -> Result<DensityOperator> {
    let norm_sq = state.norm_squared();
    if (norm_sq - 1.0).abs() > tol.0 {
        return Err(Error::NotNormalized { total: norm_sq, tolerance: tol.0 });
    }
    let psi = &state.amplitudes;
    Ok(DensityOperator { matrix: psi.transpose() * psi.conjugate() })
}

/// True when `y` majorizes `x`: every head sum of `y` is at least the matching head sum of `x`.
/// The shorter vector is zero-padded.
pub fn majorizes<S: Scalar>(x: &SchmidtVector<S>, y: &SchmidtVector<S>, tol: Tolerance) -> bool {
    let n = x.len().max(y.len());
    let (mut hx, mut hy) = (S::zero(), S::zero());
    for i in 0..n {
        hx = hx + x.probs.get(i).cloned().unwrap_or_else(S::zero);
        hy = hy + y.probs.get(i).cloned().unwrap_or_else(S::zero);
        if hy.lt_beyond(&hx, tol) {
            return false;
        }
    }
    true
}
