//! Optimal single-copy conversion between pure states.
//!
//! The optimal probability is the smallest tail ratio `E_l(α)/E_l(β)`. The protocol that
//! attains it first moves `α` deterministically to an intermediate vector `γ` that
//! majorizes `α`, then filters `γ` into `β` with a two-outcome local measurement whose
//! success outcome has probability `r_1`.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerance};
use crate::schmidt::{majorizes, tensor_power, CMatrix, SchmidtVector};

/// Segment boundaries `l_0 > l_1 > … > l_k` (1-based, `l_0 = n + 1`, `l_k = 1`) and the
/// strictly increasing ratio levels `r_1 < … < r_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakpoints<S> {
    boundaries: Vec<usize>,
    ratios: Vec<S>,
}

impl<S: Scalar> Breakpoints<S> {
    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    pub fn ratios(&self) -> &[S] {
        &self.ratios
    }

    /// Dimension `n` the breakpoints were computed for.
    pub fn dim(&self) -> usize {
        self.boundaries[0] - 1
    }

    /// `(r_j, 0-based index range)` for each segment `j = 1..k`.
    pub fn segments(&self) -> impl Iterator<Item = (&S, std::ops::Range<usize>)> + '_ {
        self.ratios
            .iter()
            .zip(self.boundaries.windows(2))
            .map(|(r, w)| (r, (w[1] - 1)..(w[0] - 1)))
    }

    /// Reassembles breakpoints from serialized parts, checking their shape.
    pub fn from_parts(boundaries: Vec<usize>, ratios: Vec<S>) -> Result<Self> {
        let shape_ok = boundaries.len() >= 2
            && boundaries.len() == ratios.len() + 1
            && boundaries.last() == Some(&1)
            && boundaries.windows(2).all(|w| w[0] > w[1]);
        if !shape_ok {
            return Err(Error::Invariant("malformed breakpoint boundaries".into()));
        }
        Ok(Breakpoints { boundaries, ratios })
    }
}

/// A diagonal local operator stored through its squared entries, which stay exact in
/// rational mode.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalOperator<S> {
    squared: Vec<S>,
}

impl<S: Scalar> DiagonalOperator<S> {
    pub fn from_squared(squared: Vec<S>) -> Self {
        DiagonalOperator { squared }
    }

    pub fn squared(&self) -> &[S] {
        &self.squared
    }

    pub fn amplitudes(&self) -> Vec<f64> {
        self.squared.iter().map(|s| s.to_f64().max(0.0).sqrt()).collect()
    }

    pub fn to_matrix(&self) -> CMatrix {
        let d = DVector::from_iterator(
            self.squared.len(),
            self.amplitudes().into_iter().map(|a| Complex64::new(a, 0.0)),
        );
        CMatrix::from_diagonal(&d)
    }
}

/// The non-degenerate part of a plan.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction<S> {
    pub breakpoints: Breakpoints<S>,
    pub intermediate: SchmidtVector<S>,
    pub success: DiagonalOperator<S>,
    pub failure: DiagonalOperator<S>,
}

impl<S: Scalar> Construction<S> {
    /// Unnormalized weights of the failure branch, `γ_i · N_ii²`.
    pub fn failure_weights(&self) -> Vec<S> {
        self.intermediate
            .probs()
            .iter()
            .zip(self.failure.squared())
            .map(|(g, f)| g.clone() * f.clone())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionPlan<S> {
    pub source: SchmidtVector<S>,
    pub target: SchmidtVector<S>,
    pub probability: S,
    /// Smallest minimizing index `l_1`; `None` for a degenerate plan.
    pub minimizer: Option<usize>,
    /// `None` when the conversion is impossible (probability zero).
    pub construction: Option<Construction<S>>,
}

impl<S: Scalar> ConversionPlan<S> {
    pub fn is_degenerate(&self) -> bool {
        self.construction.is_none()
    }

    /// Common (padded) dimension of source, target and operators.
    pub fn dim(&self) -> usize {
        self.source.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanOptions {
    pub tol: Tolerance,
    /// Re-sort `γ` instead of failing when it comes out of order.
    pub resort_intermediate: bool,
}

fn pad_pair<S: Scalar>(
    alpha: &SchmidtVector<S>,
    beta: &SchmidtVector<S>,
) -> (SchmidtVector<S>, SchmidtVector<S>) {
    let n = alpha.len().max(beta.len());
    (alpha.padded(n), beta.padded(n))
}

/// Optimal conversion probability with the smallest minimizing index `l` (1-based).
///
/// Tail ratios with a zero denominator impose no constraint and are skipped. When the
/// source has fewer nonzero coefficients than the target the result is zero.
pub fn optimal_probability_with_minimizer<S: Scalar>(
    alpha: &SchmidtVector<S>,
    beta: &SchmidtVector<S>,
    tol: Tolerance,
) -> Result<(S, Option<usize>)> {
    if alpha.is_empty() || beta.is_empty() {
        return Err(Error::Empty);
    }
    let (a, b) = pad_pair(alpha, beta);
    if a.support(tol) < b.support(tol) {
        return Ok((S::zero(), None));
    }
    let (ta, tb) = (a.tails(), b.tails());
    let mut best: Option<(S, usize)> = None;
    for l in 0..a.len() {
        if tb[l].is_zero_within(tol) {
            continue;
        }
        let ratio = ta[l].clone() / tb[l].clone();
        if best.as_ref().is_none_or(|(r, _)| ratio < *r) {
            best = Some((ratio, l + 1));
        }
    }
    let (p, l) = best.expect("first tail ratio always has a positive denominator");
    Ok((p.clamp_unit(), Some(l)))
}

pub fn optimal_probability<S: Scalar>(
    alpha: &SchmidtVector<S>,
    beta: &SchmidtVector<S>,
    tol: Tolerance,
) -> Result<S> {
    optimal_probability_with_minimizer(alpha, beta, tol).map(|(p, _)| p)
}

/// Segment-ratio recursion over prefix sums: `l_1` is the smallest minimizer over
/// `[1, n]`, then the search restarts on `[1, l_1 − 1]` until it reaches `1`.
pub fn breakpoints<S: Scalar>(
    alpha: &SchmidtVector<S>,
    beta: &SchmidtVector<S>,
    tol: Tolerance,
) -> Result<Breakpoints<S>> {
    let (a, b) = pad_pair(alpha, beta);
    let (sa, sb) = (a.support(tol), b.support(tol));
    if sa < sb {
        return Err(Error::Infeasible { source_rank: sa, target_rank: sb });
    }
    let n = a.len();
    let prefix = |v: &[S]| {
        let mut out = Vec::with_capacity(v.len() + 1);
        out.push(S::zero());
        for x in v {
            let last = out.last().cloned().unwrap();
            out.push(last + x.clone());
        }
        out
    };
    let (pa, pb) = (prefix(a.probs()), prefix(b.probs()));

    let mut boundaries = vec![n + 1];
    let mut ratios: Vec<S> = Vec::new();
    // `upper` is l_{j-1} - 1, the 1-based last index of the segment being searched.
    let mut upper = n;
    while upper >= 1 {
        let mut candidates: Vec<(usize, S)> = Vec::with_capacity(upper);
        for l in 1..=upper {
            let den = pb[upper].clone() - pb[l - 1].clone();
            if den.is_zero_within(tol) {
                continue;
            }
            let num = pa[upper].clone() - pa[l - 1].clone();
            candidates.push((l, num / den));
        }
        let min = candidates
            .iter()
            .map(|(_, r)| r)
            .fold(None::<&S>, |m, r| match m {
                Some(m) if m <= r => Some(m),
                _ => Some(r),
            })
            .cloned()
            .ok_or_else(|| Error::Invariant("segment with zero target weight".into()))?;
        let (l, r) = candidates
            .into_iter()
            .find(|(_, r)| r.le_within(&min, tol))
            .expect("minimum is attained");
        boundaries.push(l);
        ratios.push(r);
        upper = l - 1;
    }
    Ok(Breakpoints { boundaries, ratios })
}

/// `γ_i = r_j β_i` on segment `j`.
///
/// `γ` is non-increasing whenever the ratios increase toward the head; a violation is
/// reported as an error unless `resort` is set.
pub fn intermediate_state<S: Scalar>(
    bp: &Breakpoints<S>,
    beta: &SchmidtVector<S>,
    tol: Tolerance,
    resort: bool,
) -> Result<SchmidtVector<S>> {
    if bp.dim() != beta.len() {
        return Err(Error::Dimension { expected: bp.dim(), got: beta.len() });
    }
    let mut gamma = vec![S::zero(); beta.len()];
    for (r, range) in bp.segments() {
        for i in range {
            gamma[i] = r.clone() * beta.probs()[i].clone();
        }
    }
    if let Some(i) = (1..gamma.len()).find(|&i| gamma[i - 1].lt_beyond(&gamma[i], tol)) {
        if !resort {
            return Err(Error::Invariant(format!(
                "intermediate vector increases at index {}: {} < {}",
                i + 1,
                gamma[i - 1].render(),
                gamma[i].render()
            )));
        }
        log::warn!("intermediate vector out of order at index {}; re-sorting", i + 1);
    }
    SchmidtVector::new(gamma, tol)
}

/// Success operator `M` (block `j` equal to `√(r_1/r_j)·I`) and its complement
/// `N = √(I − M²)`, both as squared diagonals.
pub fn measurement_operators<S: Scalar>(
    bp: &Breakpoints<S>,
) -> (DiagonalOperator<S>, DiagonalOperator<S>) {
    let r1 = bp.ratios[0].clone();
    let mut success = vec![S::one(); bp.dim()];
    for (r, range) in bp.segments() {
        for i in range {
            success[i] = r1.clone() / r.clone();
        }
    }
    let failure = success.iter().map(|s| S::one() - s.clone()).collect();
    (DiagonalOperator { squared: success }, DiagonalOperator { squared: failure })
}

/// Assembles breakpoints, `γ` and the filter, checking the plan's identities:
/// `r_1` matches the closed form, `γ` majorizes `α`, and `γ_i M_ii² = r_1 β_i`.
pub fn build_plan<S: Scalar>(
    alpha: &SchmidtVector<S>,
    beta: &SchmidtVector<S>,
    opts: &PlanOptions,
) -> Result<ConversionPlan<S>> {
    let tol = opts.tol;
    let (a, b) = pad_pair(alpha, beta);
    let closed_form = optimal_probability(&a, &b, tol)?;
    let bp = match breakpoints(&a, &b, tol) {
        Ok(bp) => bp,
        Err(Error::Infeasible { .. }) => {
            return Ok(ConversionPlan {
                source: a,
                target: b,
                probability: S::zero(),
                minimizer: None,
                construction: None,
            })
        }
        Err(e) => return Err(e),
    };
    let r1 = bp.ratios[0].clone();
    if !r1.eq_within(&closed_form, tol) {
        return Err(Error::Invariant(format!(
            "segment recursion gives r_1 = {} but the closed form gives {}",
            r1.render(),
            closed_form.render()
        )));
    }
    let gamma = intermediate_state(&bp, &b, tol, opts.resort_intermediate)?;
    if !majorizes(&a, &gamma, tol) {
        return Err(Error::Invariant("intermediate vector does not majorize the source".into()));
    }
    let (success, failure) = measurement_operators(&bp);
    for (i, (g, s)) in gamma.probs().iter().zip(success.squared()).enumerate() {
        let lhs = g.clone() * s.clone();
        let rhs = r1.clone() * b.probs()[i].clone();
        if !lhs.eq_within(&rhs, tol) {
            return Err(Error::Invariant(format!("filter identity fails at index {}", i + 1)));
        }
    }
    let minimizer = Some(bp.boundaries[1]);
    Ok(ConversionPlan {
        source: a,
        target: b,
        probability: r1,
        minimizer,
        construction: Some(Construction { breakpoints: bp, intermediate: gamma, success, failure }),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CopyRegime {
    /// `n_Ψ < n_Φ²`: no two copies are reachable, so the expected number of copies equals
    /// the single-copy probability.
    SingleCopyOptimal,
    /// Several copies may be reachable; the single-copy probability is only a lower bound.
    MultiCopyPossible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiCopyBound<S> {
    pub m_max: S,
    pub regime: CopyRegime,
    pub source_rank: usize,
    pub target_rank: usize,
}

pub fn multi_copy_bound<S: Scalar>(
    alpha: &SchmidtVector<S>,
    beta: &SchmidtVector<S>,
    tol: Tolerance,
) -> Result<MultiCopyBound<S>> {
    let source_rank = alpha.support(tol);
    let target_rank = beta.support(tol);
    let regime = if source_rank < target_rank * target_rank {
        CopyRegime::SingleCopyOptimal
    } else {
        CopyRegime::MultiCopyPossible
    };
    Ok(MultiCopyBound {
        m_max: optimal_probability(alpha, beta, tol)?,
        regime,
        source_rank,
        target_rank,
    })
}

/// Optimal probability between `count`-fold tensor powers.
pub fn tensor_conversion_probability<S: Scalar>(
    alpha: &SchmidtVector<S>,
    beta: &SchmidtVector<S>,
    count: usize,
    tol: Tolerance,
) -> Result<S> {
    optimal_probability(&tensor_power(alpha, count)?, &tensor_power(beta, count)?, tol)
}
