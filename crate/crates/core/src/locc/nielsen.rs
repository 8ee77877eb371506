//! Deterministic conversion along a majorization chain, and the full two-stage protocol.

use crate::conversion::ConversionPlan;
use crate::error::{Error, Result};
use crate::scalar::{abs, Scalar, Tolerance};
use crate::schmidt::{majorizes, SchmidtVector};

use super::protocol::{Condition, Gate, Kraus, LoccProtocol, LoccStep, Outcome, Party, SuccessPredicate};

/// `y ↦ t·y + (1 − t)·Q y`, where `Q` swaps positions `i < j` (0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct TTransform<S> {
    pub i: usize,
    pub j: usize,
    pub t: S,
}

impl<S: Scalar> TTransform<S> {
    pub fn apply(&self, y: &[S]) -> Vec<S> {
        let mut out = y.to_vec();
        let one_minus = S::one() - self.t.clone();
        out[self.i] = self.t.clone() * y[self.i].clone() + one_minus.clone() * y[self.j].clone();
        out[self.j] = self.t.clone() * y[self.j].clone() + one_minus * y[self.i].clone();
        out
    }
}

/// Chain of T-transforms carrying `y` to `x`, for `x` majorized by `y`.
///
/// Returns the transforms together with the visited vectors `v_0 = y, …, v_m = x`, where
/// `v_{s+1} = T_s v_s`. Each step equalizes at least one coordinate, so `m ≤ n − 1`.
pub fn t_transform_chain<S: Scalar>(
    x: &SchmidtVector<S>,
    y: &SchmidtVector<S>,
    tol: Tolerance,
) -> Result<(Vec<TTransform<S>>, Vec<Vec<S>>)> {
    let n = x.len().max(y.len());
    let (x, y) = (x.padded(n), y.padded(n));
    if !majorizes(&x, &y, tol) {
        return Err(Error::NotMajorized);
    }
    let target = x.probs();
    let mut current = y.probs().to_vec();
    let mut transforms = Vec::new();
    let mut visited = vec![current.clone()];
    for _ in 0..n {
        // first position where the current vector falls short of the target
        let Some(k) = (0..n).find(|&k| current[k].lt_beyond(&target[k], tol)) else {
            break;
        };
        let Some(j) = (0..k).rev().find(|&j| target[j].lt_beyond(&current[j], tol)) else {
            return Err(Error::Invariant("majorization chain has no donor level".into()));
        };
        let excess = current[j].clone() - target[j].clone();
        let deficit = target[k].clone() - current[k].clone();
        let mut next = current.clone();
        if excess.le_within(&deficit, tol) {
            next[j] = target[j].clone();
            next[k] = if excess.eq_within(&deficit, tol) {
                target[k].clone()
            } else {
                current[k].clone() + excess
            };
        } else {
            next[k] = target[k].clone();
            next[j] = current[j].clone() - deficit;
        }
        let t = (next[j].clone() - current[k].clone()) / (current[j].clone() - current[k].clone());
        transforms.push(TTransform { i: j, j: k, t });
        visited.push(next.clone());
        current = next;
    }
    let residual = current
        .iter()
        .zip(target)
        .map(|(c, t)| abs(c.clone() - t.clone()))
        .fold(S::zero(), |a, b| if b > a { b } else { a });
    if !residual.is_zero_within(tol) {
        return Err(Error::Invariant(format!(
            "majorization chain did not converge (residual {})",
            residual.render()
        )));
    }
    *visited.last_mut().unwrap() = target.to_vec();
    Ok((transforms, visited))
}

/// Squared diagonal of `√t·√(to/from)` style operators; levels where `from` vanishes get
/// `scale` so completeness still holds.
fn ratio_operator<S: Scalar>(scale: &S, to: &[S], from: &[S], tol: Tolerance) -> Vec<S> {
    to.iter()
        .zip(from)
        .map(|(t, f)| {
            if f.is_zero_within(tol) {
                scale.clone()
            } else {
                scale.clone() * t.clone() / f.clone()
            }
        })
        .collect()
}

/// A protocol taking `Σ √α_i |ii⟩` to `Σ √γ_i |ii⟩` with certainty, for `α` majorized by `γ`.
///
/// Each T-transform `v_{s+1} = T v_s` of the chain from `γ` to `α` is undone, in reverse
/// order, by a two-outcome measurement on A with squared diagonals
/// `t·v_s/v_{s+1}` and `(1 − t)·Q v_s / v_{s+1}`; the second outcome leaves the two levels
/// swapped, which both parties undo with the same transposition after A announces it.
pub fn deterministic_protocol<S: Scalar>(
    alpha: &SchmidtVector<S>,
    gamma: &SchmidtVector<S>,
    tol: Tolerance,
) -> Result<LoccProtocol<S>> {
    let n = alpha.len().max(gamma.len());
    let (transforms, visited) = t_transform_chain(alpha, gamma, tol)?;
    let mut steps = Vec::with_capacity(4 * transforms.len());
    for s in (0..transforms.len()).rev() {
        let tr = &transforms[s];
        let (before, after) = (&visited[s + 1], &visited[s]);
        let mut swapped = after.clone();
        swapped.swap(tr.i, tr.j);
        let keep = ratio_operator(&tr.t, after, before, tol);
        let flip = ratio_operator(&(S::one() - tr.t.clone()), &swapped, before, tol);
        let m = steps.len();
        steps.push(LoccStep::Measure {
            party: Party::A,
            operators: vec![Kraus::Diagonal(keep), Kraus::Diagonal(flip)],
        });
        steps.push(LoccStep::Announce { step: m });
        let cond = Condition::On(Outcome { step: m, outcome: 1 });
        for party in [Party::A, Party::B] {
            steps.push(LoccStep::Unitary { party, gate: Gate::swap(n, tr.i, tr.j), condition: cond });
        }
    }
    Ok(LoccProtocol::new(steps, SuccessPredicate::Always, tol)?.with_predicted(S::one()))
}

/// Deterministic stage `α → γ` followed by the filter `{M, N}` on A; success is the `M`
/// outcome.
pub fn build_full_protocol<S: Scalar>(
    plan: &ConversionPlan<S>,
    tol: Tolerance,
) -> Result<LoccProtocol<S>> {
    let c = plan.construction.as_ref().ok_or(Error::DegeneratePlan)?;
    let stage_one = deterministic_protocol(&plan.source, &c.intermediate, tol)?;
    let filter = LoccProtocol::new(
        vec![
            LoccStep::Measure {
                party: Party::A,
                operators: vec![
                    Kraus::Diagonal(c.success.squared().to_vec()),
                    Kraus::Diagonal(c.failure.squared().to_vec()),
                ],
            },
            LoccStep::Announce { step: 0 },
        ],
        SuccessPredicate::AllOf(vec![Outcome { step: 0, outcome: 0 }]),
        tol,
    )?;
    Ok(stage_one.then(filter).with_predicted(plan.probability.clone()))
}
