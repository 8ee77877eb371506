//! Exhaustive branch enumeration and the per-step monotone audit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::monotones::monotone_e;
use crate::scalar::{Scalar, Tolerance};
use crate::schmidt::{schmidt_decompose, sort_descending, state_from_schmidt, suffix_sums, BipartiteState, SchmidtVector};

use super::protocol::{apply_gate, apply_kraus, Gate, Kraus, LoccProtocol, LoccStep, Outcome, Party, PRUNE_THRESHOLD};

pub const DEFAULT_BRANCH_CAP: usize = 100_000;

/// Exact bookkeeping for monomial states: entry `e` carries unnormalized weight `weights[e]`
/// at amplitude position `(rows[e], cols[e])`. Diagonal operators and permutations keep a
/// state monomial; anything dense drops the bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactWeights<S> {
    weights: Vec<S>,
    rows: Vec<usize>,
    cols: Vec<usize>,
}

impl<S: Scalar> ExactWeights<S> {
    fn from_schmidt(sv: &SchmidtVector<S>) -> Self {
        let n = sv.len();
        ExactWeights { weights: sv.probs().to_vec(), rows: (0..n).collect(), cols: (0..n).collect() }
    }

    /// Total weight, i.e. the branch probability.
    pub fn total(&self) -> S {
        self.weights.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    /// Sorted unnormalized weights.
    pub fn sorted_weights(&self) -> Vec<S> {
        let mut w = self.weights.clone();
        sort_descending(&mut w);
        w
    }

    fn apply_diagonal(&self, party: Party, squared: &[S]) -> Self {
        let pos = match party {
            Party::A => &self.rows,
            Party::B => &self.cols,
        };
        let weights = self
            .weights
            .iter()
            .zip(pos)
            .map(|(w, &p)| w.clone() * squared[p].clone())
            .collect();
        ExactWeights { weights, rows: self.rows.clone(), cols: self.cols.clone() }
    }

    fn apply_permutation(&self, party: Party, perm: &[usize]) -> Self {
        let mut out = self.clone();
        let pos = match party {
            Party::A => &mut out.rows,
            Party::B => &mut out.cols,
        };
        for p in pos.iter_mut() {
            *p = perm[*p];
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch<S> {
    pub history: Vec<Outcome>,
    /// Branch probability from amplitude-level arithmetic.
    pub probability: f64,
    /// Normalized state on this branch.
    pub state: BipartiteState,
    pub exact: Option<ExactWeights<S>>,
}

impl<S: Scalar> Branch<S> {
    /// Exact branch probability when bookkeeping survived, else the float value.
    pub fn probability_in_mode(&self) -> S {
        match &self.exact {
            Some(e) => e.total(),
            None => S::from_f64(self.probability).unwrap_or_else(S::zero),
        }
    }

    /// Schmidt vector of the branch state (exact when bookkeeping survived).
    pub fn schmidt(&self, tol: Tolerance) -> Result<SchmidtVector<S>> {
        match &self.exact {
            Some(e) => SchmidtVector::from_weights(e.sorted_weights(), tol),
            None => SchmidtVector::from_float(&schmidt_decompose(&self.state, Tolerance(1e-6), false)?, tol),
        }
    }
}

/// Every live branch after every step; `levels[0]` is the initial state.
#[derive(Debug, Clone)]
pub struct Enumeration<S> {
    pub levels: Vec<Vec<Branch<S>>>,
    success: super::protocol::SuccessPredicate,
}

impl<S: Scalar> Enumeration<S> {
    pub fn final_branches(&self) -> &[Branch<S>] {
        self.levels.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn succeeded(&self, branch: &Branch<S>) -> bool {
        self.success.holds(&branch.history)
    }

    pub fn success_probability(&self) -> f64 {
        self.final_branches().iter().filter(|b| self.succeeded(b)).map(|b| b.probability).sum()
    }

    /// Success probability from exact bookkeeping, if every successful branch kept it.
    pub fn success_probability_exact(&self) -> Option<S> {
        self.final_branches()
            .iter()
            .filter(|b| self.succeeded(b))
            .try_fold(S::zero(), |acc, b| Some(acc + b.exact.as_ref()?.total()))
    }

    pub fn is_exact(&self) -> bool {
        self.final_branches().iter().all(|b| b.exact.is_some())
    }

    pub fn total_probability(&self) -> f64 {
        self.final_branches().iter().map(|b| b.probability).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub branch_cap: usize,
    pub tol: Tolerance,
    pub execution: Execution,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { branch_cap: DEFAULT_BRANCH_CAP, tol: Tolerance::default(), execution: Execution::default() }
    }
}

/// Enumerates every branch of `protocol` from an arbitrary amplitude state.
pub fn exhaustive_run<S: Scalar>(
    protocol: &LoccProtocol<S>,
    initial: &BipartiteState,
    opts: &RunOptions,
) -> Result<Enumeration<S>> {
    let root = Branch { history: Vec::new(), probability: 1.0, state: initial.clone(), exact: None };
    enumerate(protocol, root, opts)
}

/// As [`exhaustive_run`], starting from `Σ √α_i |ii⟩` with exact probability bookkeeping.
pub fn exhaustive_run_from_schmidt<S: Scalar>(
    protocol: &LoccProtocol<S>,
    initial: &SchmidtVector<S>,
    opts: &RunOptions,
) -> Result<Enumeration<S>> {
    let root = Branch {
        history: Vec::new(),
        probability: 1.0,
        state: state_from_schmidt(initial),
        exact: Some(ExactWeights::from_schmidt(initial)),
    };
    enumerate(protocol, root, opts)
}

fn enumerate<S: Scalar>(
    protocol: &LoccProtocol<S>,
    root: Branch<S>,
    opts: &RunOptions,
) -> Result<Enumeration<S>> {
    let norm = root.state.norm_squared();
    if (norm - 1.0).abs() > opts.tol.0 {
        return Err(Error::NotNormalized { total: norm, tolerance: opts.tol.0 });
    }
    let mut levels = vec![vec![root]];
    for (index, step) in protocol.steps().iter().enumerate() {
        let current = levels.last().unwrap();
        let expanded: Vec<Vec<Branch<S>>> = map_slice(current, opts.execution, |b| advance(b, index, step));
        let next: Vec<Branch<S>> = expanded.into_iter().flatten().collect();
        if next.len() > opts.branch_cap {
            return Err(Error::BranchCapExceeded(opts.branch_cap));
        }
        levels.push(next);
    }
    Ok(Enumeration { levels, success: protocol.success().clone() })
}

/// Children of one branch after one step.
pub(crate) fn advance<S: Scalar>(b: &Branch<S>, index: usize, step: &LoccStep<S>) -> Vec<Branch<S>> {
    match step {
        LoccStep::Measure { party, operators } => operators
            .iter()
            .enumerate()
            .filter_map(|(m, k)| {
                let out = apply_kraus(b.state.amplitudes(), *party, k);
                let conditional = out.norm_squared();
                let exact = match (k, &b.exact) {
                    (Kraus::Diagonal(d), Some(e)) => Some(e.apply_diagonal(*party, d)),
                    _ => None,
                };
                let impossible = match &exact {
                    Some(e) if S::EXACT => e.total().is_zero_within(Tolerance(0.0)),
                    _ => conditional < PRUNE_THRESHOLD,
                };
                if impossible || conditional == 0.0 {
                    return None;
                }
                let mut history = b.history.clone();
                history.push(Outcome { step: index, outcome: m });
                Some(Branch {
                    history,
                    probability: b.probability * conditional,
                    state: BipartiteState::from_matrix_unchecked(out / Complex64::new(conditional.sqrt(), 0.0)),
                    exact,
                })
            })
            .collect(),
        LoccStep::Unitary { party, gate, condition } => {
            if !condition.holds(&b.history) {
                return vec![b.clone()];
            }
            let exact = match (gate, &b.exact) {
                (Gate::Permutation(p), Some(e)) => Some(e.apply_permutation(*party, p)),
                _ => None,
            };
            vec![Branch {
                history: b.history.clone(),
                probability: b.probability,
                state: BipartiteState::from_matrix_unchecked(apply_gate(b.state.amplitudes(), *party, gate)),
                exact,
            }]
        }
        LoccStep::Announce { .. } => vec![b.clone()],
    }
}

/// Probability-weighted average of `E_k` after each step.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneAudit<S> {
    pub k: usize,
    /// `values[s]` is the average after step `s` (`values[0]` is the initial state).
    pub values: Vec<S>,
    /// First step at which the average rose by more than the tolerance.
    pub first_increase: Option<usize>,
}

impl<S: Scalar> MonotoneAudit<S> {
    pub fn non_increasing(&self) -> bool {
        self.first_increase.is_none()
    }

    /// Turns a detected increase into an error.
    pub fn check(&self) -> Result<()> {
        match self.first_increase {
            None => Ok(()),
            Some(s) => Err(Error::Invariant(format!(
                "average E_{} increased at step {s}: {} -> {}",
                self.k,
                self.values[s - 1].render(),
                self.values[s].render()
            ))),
        }
    }
}

/// Averages `E_k` over the live branches of each level. Levels whose branches all kept exact
/// bookkeeping are averaged exactly as the tail sum of unnormalized weights.
pub fn monotone_audit<S: Scalar>(en: &Enumeration<S>, k: usize, tol: Tolerance) -> Result<MonotoneAudit<S>> {
    let mut values = Vec::with_capacity(en.levels.len());
    for level in &en.levels {
        let mut avg = S::zero();
        for b in level {
            let term = match &b.exact {
                Some(e) => {
                    let w = e.sorted_weights();
                    if k == 0 || k > w.len() {
                        return Err(Error::IndexOutOfRange { k, n: w.len() });
                    }
                    suffix_sums(&w)[k - 1].clone()
                }
                None => {
                    let sv = schmidt_decompose(&b.state, Tolerance(1e-6), false)?;
                    let e = monotone_e(&sv, k)?;
                    S::from_f64(b.probability * e).unwrap_or_else(S::zero)
                }
            };
            avg = avg + term;
        }
        values.push(avg);
    }
    let first_increase = (1..values.len()).find(|&s| values[s - 1].lt_beyond(&values[s], tol));
    Ok(MonotoneAudit { k, values, first_increase })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conversion::{build_plan, PlanOptions};
    use crate::locc::nielsen::{build_full_protocol, deterministic_protocol};
    use crate::scalar::Rational;

    const TOL: Tolerance = Tolerance(1e-9);

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn qv(v: &[(i64, i64)]) -> SchmidtVector<Rational> {
        SchmidtVector::new(v.iter().map(|&(n, d)| q(n, d)).collect(), TOL).unwrap()
    }

    #[test]
    fn empty_protocol_has_one_branch() {
        let p = LoccProtocol::<Rational>::empty();
        let en = exhaustive_run_from_schmidt(&p, &qv(&[(1, 2), (1, 2)]), &RunOptions::default()).unwrap();
        assert_eq!(en.final_branches().len(), 1);
        assert_eq!(en.success_probability_exact(), Some(q(1, 1)));
        let audit = monotone_audit(&en, 2, TOL).unwrap();
        assert_eq!(audit.values, vec![q(1, 2)]);
        assert!(audit.non_increasing());
    }

    #[test]
    fn lo_popescu_protocol_succeeds_with_two_fifths() {
        let plan = build_plan(&qv(&[(4, 5), (1, 5)]), &qv(&[(1, 2), (1, 2)]), &PlanOptions::default()).unwrap();
        let p = build_full_protocol(&plan, TOL).unwrap();
        let en = exhaustive_run_from_schmidt(&p, &plan.source, &RunOptions::default()).unwrap();
        assert_eq!(en.success_probability_exact(), Some(q(2, 5)));
        assert!((en.success_probability() - 0.4).abs() < 1e-12);
        let win = en.final_branches().iter().find(|b| en.succeeded(b)).unwrap();
        let sv = schmidt_decompose(&win.state, TOL, false).unwrap();
        assert!((sv.probs()[0] - 0.5).abs() < 1e-12 && (sv.probs()[1] - 0.5).abs() < 1e-12);
        assert_eq!(win.schmidt(TOL).unwrap(), qv(&[(1, 2), (1, 2)]));
    }

    #[test]
    fn five_sixths_case_and_audit() {
        let a = qv(&[(1, 2), (3, 10), (1, 5)]);
        let b = qv(&[(2, 5), (2, 5), (1, 5)]);
        let plan = build_plan(&a, &b, &PlanOptions::default()).unwrap();
        let gamma = plan.construction.as_ref().unwrap().intermediate.clone();

        // deterministic stage alone: E_3 goes 1/5 -> 1/6 and every branch lands on γ
        let stage = deterministic_protocol(&a, &gamma, TOL).unwrap();
        let en = exhaustive_run_from_schmidt(&stage, &a, &RunOptions::default()).unwrap();
        for br in en.final_branches() {
            assert_eq!(br.schmidt(TOL).unwrap(), gamma);
            let sv = schmidt_decompose(&br.state, TOL, false).unwrap();
            for (x, y) in sv.probs().iter().zip(gamma.to_f64().probs()) {
                assert!((x - y).abs() < 1e-9);
            }
        }
        let e3 = monotone_audit(&en, 3, TOL).unwrap();
        assert_eq!(e3.values.first(), Some(&q(1, 5)));
        assert_eq!(e3.values.last(), Some(&q(1, 6)));
        assert!(e3.non_increasing());

        let full = build_full_protocol(&plan, TOL).unwrap();
        let en = exhaustive_run_from_schmidt(&full, &a, &RunOptions::default()).unwrap();
        assert_eq!(en.success_probability_exact(), Some(q(5, 6)));
        assert!((en.total_probability() - 1.0).abs() < 1e-12);
        let e2 = monotone_audit(&en, 2, TOL).unwrap();
        // before the filter E_2(γ) = 1/2; after: 5/6·E_2(β) + 1/6·E_2(failure) = 5/6·3/5 + 0
        let n = e2.values.len();
        assert_eq!(e2.values[n - 3], q(1, 2));
        assert_eq!(e2.values[n - 1], q(1, 2));
        assert!(e2.check().is_ok());
    }

    #[test]
    fn float_and_exact_runs_agree() {
        let a = qv(&[(1, 2), (3, 10), (1, 5)]);
        let b = qv(&[(2, 5), (2, 5), (1, 5)]);
        let plan = build_plan(&a, &b, &PlanOptions::default()).unwrap();
        let p = build_full_protocol(&plan, TOL).unwrap();
        let exact = exhaustive_run_from_schmidt(&p, &a, &RunOptions::default()).unwrap();
        let float = exhaustive_run(&p, &state_from_schmidt(&a), &RunOptions::default()).unwrap();
        assert!(!float.is_exact());
        assert!((exact.success_probability() - float.success_probability()).abs() < 1e-12);
    }

    #[test]
    fn branch_cap_is_enforced() {
        let a = qv(&[(1, 4), (1, 4), (1, 4), (1, 4)]);
        let g = qv(&[(1, 1), (0, 1), (0, 1), (0, 1)]);
        let p = deterministic_protocol(&a, &g, TOL).unwrap();
        let opts = RunOptions { branch_cap: 1, ..Default::default() };
        assert_eq!(exhaustive_run_from_schmidt(&p, &a, &opts).unwrap_err(), Error::BranchCapExceeded(1));
    }

    #[test]
    fn audit_flags_increase() {
        let audit = MonotoneAudit { k: 2, values: vec![0.2, 0.3], first_increase: Some(1) };
        assert!(audit.check().is_err());
    }
}
