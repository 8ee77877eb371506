//! The tail-sum monotone family `E_k`, its spectral form `f_k`, ensemble averages
//! and the entropy of entanglement.

use crate::error::{Error, Result};
use crate::scalar::{Scalar, Tolerance};
use crate::schmidt::{DensityOperator, SchmidtVector};

/// `E_1 … E_n` for one state.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneVector<S> {
    values: Vec<S>,
}

impl<S: Scalar> MonotoneVector<S> {
    pub fn values(&self) -> &[S] {
        &self.values
    }

    /// `E_k` for 1-based `k`.
    pub fn get(&self, k: usize) -> Option<&S> {
        k.checked_sub(1).and_then(|i| self.values.get(i))
    }
}

/// `E_k(Ψ) = Σ_{i≥k} α_i`.
pub fn monotone_e<S: Scalar>(sv: &SchmidtVector<S>, k: usize) -> Result<S> {
    let n = sv.len();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { k, n });
    }
    // E_1 is the total weight, one by the vector's invariant.
    if k == 1 {
        return Ok(S::one());
    }
    Ok(sv.tail(k))
}

pub fn monotone_profile<S: Scalar>(sv: &SchmidtVector<S>) -> MonotoneVector<S> {
    let mut values = sv.tails();
    values.pop();
    values[0] = S::one();
    MonotoneVector { values }
}

/// Sum of the `n − k + 1` smallest eigenvalues of `sigma`.
pub fn f_k(sigma: &DensityOperator, k: usize) -> Result<f64> {
    let n = sigma.dim();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { k, n });
    }
    let ev = sigma.eigenvalues();
    Ok(ev[..n - k + 1].iter().sum::<f64>().clamp(0.0, 1.0))
}

/// A pure-state decomposition `{p_j, ψ_j}` of some mixed state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble<S> {
    members: Vec<(S, SchmidtVector<S>)>,
}

impl<S: Scalar> Ensemble<S> {
    pub fn new(members: Vec<(S, SchmidtVector<S>)>, tol: Tolerance) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::Empty);
        }
        for (index, (w, _)) in members.iter().enumerate() {
            if w < &S::zero() && !w.is_zero_within(tol) {
                return Err(Error::Negative { index, value: w.to_f64() });
            }
        }
        let total = members.iter().fold(S::zero(), |acc, (w, _)| acc + w.clone());
        if !total.eq_within(&S::one(), tol) {
            return Err(Error::NotNormalized { total: total.to_f64(), tolerance: tol.0 });
        }
        Ok(Ensemble { members })
    }

    pub fn members(&self) -> &[(S, SchmidtVector<S>)] {
        &self.members
    }
}

/// `Σ_j p_j E_k(ψ_j)` for one particular ensemble.
///
/// The convex-roof value of `E_k` on the ensemble's mixed state is the minimum of this over
/// all decompositions, so any single ensemble gives an upper bound on it.
pub fn ensemble_average_e<S: Scalar>(ens: &Ensemble<S>, k: usize) -> Result<S> {
    ens.members.iter().try_fold(S::zero(), |acc, (w, sv)| {
        Ok(acc + w.clone() * monotone_e(sv, k)?)
    })
}

/// `−Σ α_i log₂ α_i` in ebits.
pub fn entropy_of_entanglement<S: Scalar>(sv: &SchmidtVector<S>) -> f64 {
    sv.probs()
        .iter()
        .map(|p| p.to_f64())
        .filter(|&p| p > 0.0)
        .map(|p| -p * p.log2())
        .sum::<f64>()
        .max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use crate::schmidt::CMatrix;
    use num_complex::Complex64;

    const TOL: Tolerance = Tolerance(1e-9);

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_ratio(n, d)
    }

    fn qv(v: &[(i64, i64)]) -> SchmidtVector<Rational> {
        SchmidtVector::new(v.iter().map(|&(n, d)| q(n, d)).collect(), TOL).unwrap()
    }

    fn fv(v: &[f64]) -> SchmidtVector<f64> {
        SchmidtVector::new(v.to_vec(), TOL).unwrap()
    }

    fn diag(v: &[f64]) -> DensityOperator {
        let d = nalgebra::DVector::from_iterator(v.len(), v.iter().map(|&x| Complex64::new(x, 0.0)));
        DensityOperator::new(CMatrix::from_diagonal(&d), TOL).unwrap()
    }

    #[test]
    fn e_k_examples() {
        assert_eq!(monotone_e(&fv(&[0.3, 0.7]), 1).unwrap(), 1.0);
        assert_eq!(monotone_e(&qv(&[(4, 5), (1, 5)]), 2).unwrap(), q(1, 5));
        let psi1 = qv(&[(108, 144), (12, 144), (12, 144), (12, 144)]);
        assert_eq!(monotone_e(&psi1, 2).unwrap(), q(36, 144));
        assert_eq!(monotone_e(&psi1, 0), Err(Error::IndexOutOfRange { k: 0, n: 4 }));
        assert_eq!(monotone_e(&psi1, 5), Err(Error::IndexOutOfRange { k: 5, n: 4 }));
    }

    #[test]
    fn profile_examples() {
        assert_eq!(monotone_profile(&fv(&[1.0])).values(), &[1.0]);
        assert_eq!(monotone_profile(&fv(&[0.5, 0.5])).values(), &[1.0, 0.5]);
        let p = monotone_profile(&qv(&[(1, 2), (3, 10), (1, 5)]));
        assert_eq!(p.values(), &[q(1, 1), q(1, 2), q(1, 5)]);
        assert_eq!(p.get(3), Some(&q(1, 5)));
        assert_eq!(p.get(0), None);
    }

    #[test]
    fn f_k_examples() {
        let half = diag(&[0.5, 0.5]);
        assert!((f_k(&half, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!((f_k(&diag(&[0.8, 0.2]), 2).unwrap() - 0.2).abs() < 1e-15);
        assert!((f_k(&diag(&[0.1, 0.6, 0.3]), 1).unwrap() - 1.0).abs() < 1e-12);
        assert!((f_k(&diag(&[0.1, 0.6, 0.3]), 2).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(f_k(&half, 3), Err(Error::IndexOutOfRange { k: 3, n: 2 }));
    }

    #[test]
    fn ensemble_examples() {
        let single = Ensemble::new(vec![(q(1, 1), qv(&[(4, 5), (1, 5)]))], TOL).unwrap();
        assert_eq!(ensemble_average_e(&single, 2).unwrap(), q(1, 5));

        let ens = Ensemble::new(
            vec![(q(1, 2), qv(&[(1, 2), (1, 2)])), (q(1, 2), qv(&[(1, 1), (0, 1)]))],
            TOL,
        )
        .unwrap();
        assert_eq!(ensemble_average_e(&ens, 2).unwrap(), q(1, 4));

        let ens = Ensemble::new(vec![(0.3, fv(&[0.8, 0.2])), (0.7, fv(&[0.6, 0.4]))], TOL).unwrap();
        assert!((ensemble_average_e(&ens, 2).unwrap() - 0.34).abs() < 1e-15);

        let ragged = Ensemble::new(vec![(0.5, fv(&[1.0])), (0.5, fv(&[0.5, 0.5]))], TOL).unwrap();
        assert!(matches!(ensemble_average_e(&ragged, 2), Err(Error::IndexOutOfRange { .. })));
        assert!(Ensemble::new(vec![(0.4, fv(&[1.0]))], TOL).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy_of_entanglement(&fv(&[1.0])), 0.0);
        assert!((entropy_of_entanglement(&fv(&[0.5, 0.5])) - 1.0).abs() < 1e-15);
        let expected = -0.8 * 0.8f64.log2() - 0.2 * 0.2f64.log2();
        assert!((entropy_of_entanglement(&fv(&[0.8, 0.2])) - expected).abs() < 1e-15);
        assert!((expected - 0.721928).abs() < 1e-6);
        assert_eq!(entropy_of_entanglement(&fv(&[1.0, 0.0])), 0.0);
    }
}
