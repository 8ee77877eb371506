use std::collections::HashSet;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerance};
use crate::schmidt::{BipartiteState, CMatrix};

/// Probabilities below this are treated as impossible outcomes and pruned.
pub const PRUNE_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Party {
    A,
    B,
}

/// `(step index, outcome index)` of one measurement result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Outcome {
    pub step: usize,
    pub outcome: usize,
}

/// A measurement operator. Diagonal operators keep their squared entries in the protocol's
/// scalar mode so probabilities can be tracked exactly.
#[derive(Debug, Clone, PartialEq)]
pub enum Kraus<S> {
    Diagonal(Vec<S>),
    Dense(CMatrix),
}

impl<S: Scalar> Kraus<S> {
    pub fn dim(&self) -> usize {
        match self {
            Kraus::Diagonal(d) => d.len(),
            Kraus::Dense(m) => m.nrows(),
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        match self {
            Kraus::Diagonal(d) => CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                d.len(),
                d.iter().map(|s| Complex64::new(s.to_f64().max(0.0).sqrt(), 0.0)),
            )),
            Kraus::Dense(m) => m.clone(),
        }
    }
}

/// A local unitary. `Permutation(p)` sends basis vector `i` to `p[i]`.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    Permutation(Vec<usize>),
    Dense(CMatrix),
}

impl Gate {
    pub fn dim(&self) -> usize {
        match self {
            Gate::Permutation(p) => p.len(),
            Gate::Dense(m) => m.nrows(),
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        match self {
            Gate::Permutation(p) => {
                let mut m = CMatrix::zeros(p.len(), p.len());
                for (i, &j) in p.iter().enumerate() {
                    m[(j, i)] = Complex64::new(1.0, 0.0);
                }
                m
            }
            Gate::Dense(m) => m.clone(),
        }
    }

    /// Transposition of `i` and `j` on `n` levels.
    pub fn swap(n: usize, i: usize, j: usize) -> Gate {
        let mut p: Vec<usize> = (0..n).collect();
        p.swap(i, j);
        Gate::Permutation(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Always,
    /// Apply only on branches whose history contains this outcome.
    On(Outcome),
}

impl Condition {
    pub fn holds(&self, history: &[Outcome]) -> bool {
        match self {
            Condition::Always => true,
            Condition::On(o) => history.contains(o),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LoccStep<S> {
    Measure { party: Party, operators: Vec<Kraus<S>> },
    Unitary { party: Party, gate: Gate, condition: Condition },
    /// Broadcast of the result of the measurement at `step` to the other party.
    Announce { step: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum SuccessPredicate {
    Always,
    AllOf(Vec<Outcome>),
}

impl SuccessPredicate {
    pub fn holds(&self, history: &[Outcome]) -> bool {
        match self {
            SuccessPredicate::Always => true,
            SuccessPredicate::AllOf(req) => req.iter().all(|o| history.contains(o)),
        }
    }
}

/// An ordered list of local steps plus the predicate deciding which branches succeed.
#[derive(Debug, Clone, PartialEq)]
pub struct LoccProtocol<S> {
    steps: Vec<LoccStep<S>>,
    success: SuccessPredicate,
    predicted: Option<S>,
}

impl<S: Scalar> LoccProtocol<S> {
    /// Validates completeness and unitarity of every step, and that a party only conditions
    /// on the other party's outcomes after they have been announced.
    pub fn new(steps: Vec<LoccStep<S>>, success: SuccessPredicate, tol: Tolerance) -> Result<Self> {
        let mut measured: Vec<Option<(Party, usize)>> = Vec::with_capacity(steps.len());
        let mut announced: HashSet<usize> = HashSet::new();
        let mut dims: [Option<usize>; 2] = [None, None];
        let mut check_dim = |party: Party, d: usize| -> Result<()> {
            let slot = &mut dims[party as usize];
            match *slot {
                Some(e) if e != d => Err(Error::Dimension { expected: e, got: d }),
                _ => {
                    *slot = Some(d);
                    Ok(())
                }
            }
        };
        let check_ref = |o: &Outcome, measured: &[Option<(Party, usize)>]| -> Result<Party> {
            match measured.get(o.step) {
                Some(Some((p, count))) if o.outcome < *count => Ok(*p),
                _ => Err(Error::Protocol(format!(
                    "reference to outcome {} of step {} which is not an earlier measurement",
                    o.outcome, o.step
                ))),
            }
        };
        for (index, step) in steps.iter().enumerate() {
            match step {
                LoccStep::Measure { party, operators } => {
                    if operators.is_empty() {
                        return Err(Error::NoOperators);
                    }
                    let d = operators[0].dim();
                    for k in operators {
                        check_dim(*party, k.dim())?;
                        if k.dim() != d {
                            return Err(Error::Dimension { expected: d, got: k.dim() });
                        }
                    }
                    check_completeness(operators, tol)?;
                    measured.push(Some((*party, operators.len())));
                }
                LoccStep::Unitary { party, gate, condition } => {
                    check_dim(*party, gate.dim())?;
                    check_gate(gate, tol)?;
                    if let Condition::On(o) = condition {
                        let by = check_ref(o, &measured)?;
                        if by != *party && !announced.contains(&o.step) {
                            return Err(Error::Protocol(format!(
                                "step {index} conditions on step {} before it is announced",
                                o.step
                            )));
                        }
                    }
                    measured.push(None);
                }
                LoccStep::Announce { step } => {
                    check_ref(&Outcome { step: *step, outcome: 0 }, &measured)?;
                    announced.insert(*step);
                    measured.push(None);
                }
            }
        }
        if let SuccessPredicate::AllOf(req) = &success {
            for o in req {
                check_ref(o, &measured)?;
            }
        }
        Ok(LoccProtocol { steps, success, predicted: None })
    }

    pub fn empty() -> Self {
        LoccProtocol { steps: Vec::new(), success: SuccessPredicate::Always, predicted: None }
    }

    /// Attaches the success probability the protocol is expected to achieve.
    pub fn with_predicted(mut self, p: S) -> Self {
        self.predicted = Some(p);
        self
    }

    pub fn steps(&self) -> &[LoccStep<S>] {
        &self.steps
    }

    pub fn success(&self) -> &SuccessPredicate {
        &self.success
    }

    pub fn predicted(&self) -> Option<&S> {
        self.predicted.as_ref()
    }

    pub fn measurement_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, LoccStep::Measure { .. })).count()
    }

    /// Appends `other`, shifting its step references.
    pub fn then(mut self, other: LoccProtocol<S>) -> Self {
        let offset = self.steps.len();
        let shift = |o: Outcome| Outcome { step: o.step + offset, outcome: o.outcome };
        for step in other.steps {
            self.steps.push(match step {
                LoccStep::Unitary { party, gate, condition: Condition::On(o) } => {
                    LoccStep::Unitary { party, gate, condition: Condition::On(shift(o)) }
                }
                LoccStep::Announce { step } => LoccStep::Announce { step: step + offset },
                s => s,
            });
        }
        self.success = match (self.success, other.success) {
            (SuccessPredicate::Always, SuccessPredicate::Always) => SuccessPredicate::Always,
            (a, b) => {
                let mut req = match a {
                    SuccessPredicate::AllOf(v) => v,
                    SuccessPredicate::Always => Vec::new(),
                };
                if let SuccessPredicate::AllOf(v) = b {
                    req.extend(v.into_iter().map(shift));
                }
                SuccessPredicate::AllOf(req)
            }
        };
        self.predicted = None;
        self
    }
}

fn check_completeness<S: Scalar>(operators: &[Kraus<S>], tol: Tolerance) -> Result<()> {
    if operators.iter().all(|k| matches!(k, Kraus::Diagonal(_))) {
        let d = operators[0].dim();
        for i in 0..d {
            let mut total = S::zero();
            for k in operators {
                if let Kraus::Diagonal(v) = k {
                    if v[i] < S::zero() {
                        return Err(Error::Negative { index: i, value: v[i].to_f64() });
                    }
                    total = total + v[i].clone();
                }
            }
            if !total.eq_within(&S::one(), tol) {
                return Err(Error::Incomplete((total.to_f64() - 1.0).abs()));
            }
        }
        return Ok(());
    }
    let d = operators[0].dim();
    let mut sum = CMatrix::zeros(d, d);
    for k in operators {
        let m = k.to_matrix();
        sum += m.adjoint() * m;
    }
    let dev = (sum - CMatrix::identity(d, d)).camax();
    if dev > tol.0 {
        return Err(Error::Incomplete(dev));
    }
    Ok(())
}

fn check_gate(gate: &Gate, tol: Tolerance) -> Result<()> {
    match gate {
        Gate::Permutation(p) => {
            let mut seen = vec![false; p.len()];
            for &j in p {
                if j >= p.len() || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::NotUnitary);
                }
            }
            Ok(())
        }
        Gate::Dense(m) => {
            if !m.is_square() {
                return Err(Error::NotUnitary);
            }
            let d = m.nrows();
            if (m.adjoint() * m - CMatrix::identity(d, d)).camax() > tol.0 {
                return Err(Error::NotUnitary);
            }
            Ok(())
        }
    }
}

/// `(K ⊗ I)ψ` for party A, `(I ⊗ K)ψ` for party B, on the amplitude matrix.
pub(crate) fn act(amplitudes: &CMatrix, party: Party, op: &CMatrix) -> CMatrix {
    match party {
        Party::A => op * amplitudes,
        Party::B => amplitudes * op.transpose(),
    }
}

/// Applies a permutation without a matrix product.
pub(crate) fn permute(amplitudes: &CMatrix, party: Party, perm: &[usize]) -> CMatrix {
    let mut out = CMatrix::zeros(amplitudes.nrows(), amplitudes.ncols());
    for i in 0..amplitudes.nrows() {
        for j in 0..amplitudes.ncols() {
            let (ti, tj) = match party {
                Party::A => (perm[i], j),
                Party::B => (i, perm[j]),
            };
            out[(ti, tj)] = amplitudes[(i, j)];
        }
    }
    out
}

pub(crate) fn apply_kraus<S: Scalar>(amplitudes: &CMatrix, party: Party, k: &Kraus<S>) -> CMatrix {
    match k {
        Kraus::Diagonal(d) => {
            let mut out = amplitudes.clone();
            let amps: Vec<f64> = d.iter().map(|s| s.to_f64().max(0.0).sqrt()).collect();
            for i in 0..out.nrows() {
                for j in 0..out.ncols() {
                    out[(i, j)] *= match party {
                        Party::A => amps[i],
                        Party::B => amps[j],
                    };
                }
            }
            out
        }
        Kraus::Dense(m) => act(amplitudes, party, m),
    }
}

pub(crate) fn apply_gate(amplitudes: &CMatrix, party: Party, gate: &Gate) -> CMatrix {
    match gate {
        Gate::Permutation(p) => permute(amplitudes, party, p),
        Gate::Dense(u) => act(amplitudes, party, u),
    }
}

fn party_dim(state: &BipartiteState, party: Party) -> usize {
    match party {
        Party::A => state.dim_a(),
        Party::B => state.dim_b(),
    }
}

/// One outcome of a local measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub index: usize,
    pub probability: f64,
    /// Normalized post-measurement state; `None` when the outcome is (numerically) impossible.
    pub state: Option<BipartiteState>,
}

/// Outcome probabilities `‖(K_m ⊗ I)ψ‖²` and normalized post-states for a local measurement.
pub fn apply_measurement(
    state: &BipartiteState,
    party: Party,
    operators: &[CMatrix],
    tol: Tolerance,
) -> Result<Vec<MeasurementOutcome>> {
    if operators.is_empty() {
        return Err(Error::NoOperators);
    }
    let d = party_dim(state, party);
    for op in operators {
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::Dimension { expected: d, got: op.nrows() });
        }
    }
    let dense: Vec<Kraus<f64>> = operators.iter().cloned().map(Kraus::Dense).collect();
    check_completeness(&dense, tol)?;
    Ok(operators
        .iter()
        .enumerate()
        .map(|(index, op)| {
            let out = act(state.amplitudes(), party, op);
            let probability = out.norm_squared();
            let state = (probability >= PRUNE_THRESHOLD)
                .then(|| BipartiteState::from_matrix_unchecked(out / Complex64::new(probability.sqrt(), 0.0)));
            MeasurementOutcome { index, probability, state }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::schmidt::{schmidt_decompose, state_from_schmidt, SchmidtVector};

    const TOL: Tolerance = Tolerance(1e-9);

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn bell() -> BipartiteState {
        state_from_schmidt(&SchmidtVector::new(vec![0.5, 0.5], TOL).unwrap())
    }

    #[test]
    fn identity_measurement_is_trivial() {
        let s = bell();
        let out = apply_measurement(&s, Party::A, &[CMatrix::identity(2, 2)], TOL).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].probability - 1.0).abs() < 1e-15);
        assert!((out[0].state.as_ref().unwrap().amplitudes() - s.amplitudes()).camax() < 1e-15);
    }

    #[test]
    fn projective_measurement_on_bell_pair() {
        let p0 = nalgebra::dmatrix![c(1.0), c(0.0); c(0.0), c(0.0)];
        let p1 = nalgebra::dmatrix![c(0.0), c(0.0); c(0.0), c(1.0)];
        for party in [Party::A, Party::B] {
            let out = apply_measurement(&bell(), party, &[p0.clone(), p1.clone()], TOL).unwrap();
            for o in &out {
                assert!((o.probability - 0.5).abs() < 1e-15);
                let sv = schmidt_decompose(o.state.as_ref().unwrap(), TOL, false).unwrap();
                assert!((sv.probs()[0] - 1.0).abs() < 1e-12, "post-state must be a product state");
            }
        }
    }

    #[test]
    fn filter_on_intermediate_state_yields_target() {
        let gamma = SchmidtVector::new(vec![0.5, 1.0 / 3.0, 1.0 / 6.0], TOL).unwrap();
        let m: Kraus<Rational> = Kraus::Diagonal(vec![
            Rational::from_ratio(2, 3),
            Rational::from_ratio(1, 1),
            Rational::from_ratio(1, 1),
        ]);
        let n: Kraus<Rational> = Kraus::Diagonal(vec![
            Rational::from_ratio(1, 3),
            Rational::from_ratio(0, 1),
            Rational::from_ratio(0, 1),
        ]);
        let out = apply_measurement(&state_from_schmidt(&gamma), Party::A, &[m.to_matrix(), n.to_matrix()], TOL)
            .unwrap();
        assert!((out[0].probability - 5.0 / 6.0).abs() < 1e-12);
        let sv = schmidt_decompose(out[0].state.as_ref().unwrap(), TOL, false).unwrap();
        for (got, want) in sv.probs().iter().zip([0.4, 0.4, 0.2]) {
            assert!((got - want).abs() < 1e-12);
        }
        assert!((out[1].probability - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_outcome_has_no_state() {
        let p0 = nalgebra::dmatrix![c(1.0), c(0.0); c(0.0), c(0.0)];
        let p1 = nalgebra::dmatrix![c(0.0), c(0.0); c(0.0), c(1.0)];
        let product = state_from_schmidt(&SchmidtVector::new(vec![1.0, 0.0], TOL).unwrap());
        let out = apply_measurement(&product, Party::A, &[p0, p1], TOL).unwrap();
        assert!(out[1].state.is_none());
        assert_eq!(out[1].probability, 0.0);
    }

    #[test]
    fn incomplete_measurement_is_rejected() {
        let half = CMatrix::identity(2, 2) * c(0.5);
        assert!(matches!(apply_measurement(&bell(), Party::A, &[half], TOL), Err(Error::Incomplete(_))));
        assert_eq!(apply_measurement(&bell(), Party::A, &[], TOL), Err(Error::NoOperators));
    }

    #[test]
    fn protocol_validation() {
        let ok: Vec<LoccStep<f64>> = vec![
            LoccStep::Measure { party: Party::A, operators: vec![Kraus::Diagonal(vec![0.5, 0.5]), Kraus::Diagonal(vec![0.5, 0.5])] },
            LoccStep::Announce { step: 0 },
            LoccStep::Unitary {
                party: Party::B,
                gate: Gate::swap(2, 0, 1),
                condition: Condition::On(Outcome { step: 0, outcome: 1 }),
            },
        ];
        assert!(LoccProtocol::new(ok.clone(), SuccessPredicate::Always, TOL).is_ok());

        let mut unannounced = ok.clone();
        unannounced.remove(1);
        assert!(matches!(
            LoccProtocol::new(unannounced, SuccessPredicate::Always, TOL),
            Err(Error::Protocol(_))
        ));

        let bad_gate = vec![LoccStep::<f64>::Unitary {
            party: Party::A,
            gate: Gate::Dense(CMatrix::identity(2, 2) * c(2.0)),
            condition: Condition::Always,
        }];
        assert_eq!(LoccProtocol::new(bad_gate, SuccessPredicate::Always, TOL), Err(Error::NotUnitary));

        let empty = vec![LoccStep::<f64>::Measure { party: Party::A, operators: vec![] }];
        assert_eq!(LoccProtocol::new(empty, SuccessPredicate::Always, TOL), Err(Error::NoOperators));

        let dangling = SuccessPredicate::AllOf(vec![Outcome { step: 0, outcome: 5 }]);
        assert!(LoccProtocol::new(ok, dangling, TOL).is_err());
    }

    #[test]
    fn permutation_gate_matches_matrix() {
        let m = CMatrix::from_fn(3, 3, |i, j| c((3 * i + j) as f64));
        let g = Gate::Permutation(vec![2, 0, 1]);
        for party in [Party::A, Party::B] {
            let fast = apply_gate(&m, party, &g);
            let slow = act(&m, party, &g.to_matrix());
            assert_eq!(fast, slow);
        }
    }
}
