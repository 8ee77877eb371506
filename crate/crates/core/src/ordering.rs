//! Comparing states by directed conversion probability.
//!
//! Declaring `Ψ₁` more entangled than `Ψ₂` when `P(Ψ₁→Ψ₂) > P(Ψ₂→Ψ₁)` does not give an
//! order: the relation can cycle. This module evaluates the relation, finds such cycles and
//! searches for two-copy non-additivity. It is a demonstration, not an ordering API.

use crate::conversion::{optimal_probability, tensor_conversion_probability};
use crate::error::Result;
use crate::exec::{map_range, map_slice, Execution};
use crate::scalar::{Scalar, Tolerance};
use crate::schmidt::SchmidtVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// `P(Ψ₁→Ψ₂) > P(Ψ₂→Ψ₁)`: the first state is "more entangled".
    FirstGreater,
    SecondGreater,
    Equal,
    /// Both directions are certain, which forces the two vectors to coincide.
    BothUnit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonResult<S> {
    pub p_forward: S,
    pub p_backward: S,
    pub verdict: Verdict,
}

pub fn compare<S: Scalar>(
    first: &SchmidtVector<S>,
    second: &SchmidtVector<S>,
    tol: Tolerance,
) -> Result<ComparisonResult<S>> {
    let p_forward = optimal_probability(first, second, tol)?;
    let p_backward = optimal_probability(second, first, tol)?;
    let one = S::one();
    let verdict = if p_forward.eq_within(&one, tol) && p_backward.eq_within(&one, tol) {
        Verdict::BothUnit
    } else if p_backward.lt_beyond(&p_forward, tol) {
        Verdict::FirstGreater
    } else if p_forward.lt_beyond(&p_backward, tol) {
        Verdict::SecondGreater
    } else {
        Verdict::Equal
    };
    Ok(ComparisonResult { p_forward, p_backward, verdict })
}

/// All ordered pairs `(i, j)`, `i < j`, compared.
pub fn pairwise<S: Scalar>(
    states: &[SchmidtVector<S>],
    tol: Tolerance,
    exec: Execution,
) -> Result<Vec<((usize, usize), ComparisonResult<S>)>> {
    let pairs: Vec<(usize, usize)> =
        (0..states.len()).flat_map(|i| (i + 1..states.len()).map(move |j| (i, j))).collect();
    map_slice(&pairs, exec, |&(i, j)| compare(&states[i], &states[j], tol).map(|c| ((i, j), c)))
        .into_iter()
        .collect()
}

/// A directed cycle in the "strictly less entangled than" relation, as indices with the
/// start repeated at the end, e.g. `[0, 1, 2, 0]`. Returns `None` if the relation is acyclic.
///
/// Edge `a → b` means `P(b→a) > P(a→b)`. The search starts from the lowest index and visits
/// neighbours in index order, so the answer is deterministic.
pub fn find_cycle<S: Scalar>(
    states: &[SchmidtVector<S>],
    tol: Tolerance,
    exec: Execution,
) -> Result<Option<Vec<usize>>> {
    let n = states.len();
    let mut adj = vec![Vec::new(); n];
    for ((i, j), c) in pairwise(states, tol, exec)? {
        match c.verdict {
            Verdict::SecondGreater => adj[i].push(j),
            Verdict::FirstGreater => adj[j].push(i),
            _ => {}
        }
    }
    for a in &mut adj {
        a.sort_unstable();
    }

    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Open,
        Done,
    }
    fn dfs(v: usize, adj: &[Vec<usize>], mark: &mut [Mark], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        mark[v] = Mark::Open;
        stack.push(v);
        for &w in &adj[v] {
            match mark[w] {
                Mark::Open => {
                    let start = stack.iter().position(|&x| x == w).unwrap();
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(w);
                    return Some(cycle);
                }
                Mark::New => {
                    if let Some(c) = dfs(w, adj, mark, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        mark[v] = Mark::Done;
        None
    }

    let mut mark = vec![Mark::New; n];
    for v in 0..n {
        if mark[v] == Mark::New {
            if let Some(c) = dfs(v, &adj, &mut mark, &mut Vec::new()) {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

/// A pair whose two-copy conversion beats the square of the single-copy probability.
#[derive(Debug, Clone, PartialEq)]
pub struct NonAdditiveInstance<S> {
    pub index: usize,
    pub single: S,
    pub single_squared: S,
    pub two_copy: S,
}

/// Reports every pair with `P(Ψ⊗Ψ → Φ⊗Φ) > P(Ψ→Φ)²` by more than the tolerance.
pub fn nonadditivity_search<S: Scalar>(
    pairs: &[(SchmidtVector<S>, SchmidtVector<S>)],
    tol: Tolerance,
    exec: Execution,
) -> Result<Vec<NonAdditiveInstance<S>>> {
    let found = map_range(pairs.len(), exec, |index| -> Result<Option<NonAdditiveInstance<S>>> {
        let (a, b) = &pairs[index];
        let single = optimal_probability(a, b, tol)?;
        let single_squared = single.clone() * single.clone();
        let two_copy = tensor_conversion_probability(a, b, 2, tol)?;
        Ok(single_squared
            .lt_beyond(&two_copy, tol)
            .then_some(NonAdditiveInstance { index, single, single_squared, two_copy }))
    });
    let mut out = Vec::new();
    for f in found {
        if let Some(x) = f? {
            out.push(x);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;

    const TOL: Tolerance = Tolerance(1e-9);

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn qv(v: &[(i64, i64)]) -> SchmidtVector<Rational> {
        SchmidtVector::new(v.iter().map(|&(n, d)| q(n, d)).collect(), TOL).unwrap()
    }

    fn over144(v: [i64; 4]) -> SchmidtVector<Rational> {
        qv(&v.map(|x| (x, 144)))
    }

    fn cycle_states() -> Vec<SchmidtVector<Rational>> {
        vec![over144([108, 12, 12, 12]), over144([66, 66, 6, 6]), over144([47, 47, 47, 3])]
    }

    #[test]
    fn compare_examples() {
        let s = cycle_states();
        let same = compare(&s[0], &s[0], TOL).unwrap();
        assert_eq!(same.verdict, Verdict::BothUnit);

        let c12 = compare(&s[0], &s[1], TOL).unwrap();
        assert_eq!((c12.p_forward.clone(), c12.p_backward.clone()), (q(6, 13), q(1, 2)));
        assert_eq!(c12.verdict, Verdict::SecondGreater);

        let c31 = compare(&s[2], &s[0], TOL).unwrap();
        assert_eq!((c31.p_forward.clone(), c31.p_backward.clone()), (q(1, 4), q(36, 97)));
        assert_eq!(c31.verdict, Verdict::SecondGreater);

        let c21 = compare(&s[1], &s[0], TOL).unwrap();
        assert_eq!(c21.verdict, Verdict::FirstGreater);
    }

    #[test]
    fn equal_and_one_sided_verdicts() {
        // Bell pair vs product state: 1 one way, 0 the other
        let c = compare(&qv(&[(1, 2), (1, 2)]), &qv(&[(1, 1), (0, 1)]), TOL).unwrap();
        assert_eq!(c.verdict, Verdict::FirstGreater);
        let c = compare(&qv(&[(3, 5), (7, 20), (1, 20)]), &qv(&[(4, 5), (1, 10), (1, 10)]), TOL).unwrap();
        assert_eq!((c.p_forward.clone(), c.p_backward.clone()), (q(1, 2), q(1, 2)));
        assert_eq!(c.verdict, Verdict::Equal);
        let a = SchmidtVector::new(vec![0.5, 0.5], TOL).unwrap();
        assert_eq!(compare(&a, &a, TOL).unwrap().verdict, Verdict::BothUnit);
    }

    #[test]
    fn finds_the_three_state_cycle() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(find_cycle(&cycle_states(), TOL, exec).unwrap(), Some(vec![0, 1, 2, 0]));
        }
    }

    #[test]
    fn no_cycle_for_identical_or_ordered_states() {
        let same = vec![qv(&[(1, 2), (1, 2)]); 3];
        assert_eq!(find_cycle(&same, TOL, Execution::Sequential).unwrap(), None);
        // a chain ordered by majorization plus their common majorant
        let chain = vec![qv(&[(1, 2), (1, 2)]), qv(&[(3, 4), (1, 4)]), qv(&[(1, 1), (0, 1)])];
        assert_eq!(find_cycle(&chain, TOL, Execution::Sequential).unwrap(), None);
    }

    #[test]
    fn nonadditivity_examples() {
        let a = qv(&[(1, 2), (1, 4), (1, 4)]);
        let b = qv(&[(2, 5), (2, 5), (1, 5)]);
        let pairs = vec![
            (a.clone(), a.clone()),
            (a, b),
            (qv(&[(4, 5), (1, 5)]), qv(&[(1, 2), (1, 2)])),
        ];
        let found = nonadditivity_search(&pairs, TOL, Execution::Parallel).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].index, 1);
        assert_eq!(found[0].two_copy, q(25, 28));
        assert_eq!(found[0].single_squared, q(25, 36));
    }
}
