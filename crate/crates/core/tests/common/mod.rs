#![allow(dead_code)]

use locc_core::{Rational, Scalar, SchmidtVector, Tolerance};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use proptest::prelude::*;

pub const TOL: Tolerance = Tolerance(1e-9);

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn qv(v: &[(i64, i64)]) -> SchmidtVector<Rational> {
    SchmidtVector::new(v.iter().map(|&(n, d)| q(n, d)).collect(), TOL).unwrap()
}

/// Integer weights normalized to an exact Schmidt vector.
pub fn from_weights(w: &[i64]) -> SchmidtVector<Rational> {
    SchmidtVector::from_weights(w.iter().map(|&x| q(x, 1)).collect(), TOL).unwrap()
}

/// Exact Schmidt vectors with up to `max_len` levels and at least one positive weight.
pub fn schmidt_strategy(max_len: usize) -> impl Strategy<Value = SchmidtVector<Rational>> {
    prop::collection::vec(0i64..=20, 1..=max_len)
        .prop_filter("positive total", |w| w.iter().any(|&x| x > 0))
        .prop_map(|w| from_weights(&w))
}

/// Brute-force reference: sorts the raw weights itself, forms every tail sum by direct
/// summation and takes the minimum ratio over tails with positive denominators.
pub mod oracle {
    use super::*;

    fn sorted(v: &[Rational], n: usize) -> Vec<Rational> {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.cmp(a));
        s.resize(n, Rational::zero());
        s
    }

    pub fn tail(v: &[Rational], k: usize) -> Rational {
        let mut t = Rational::zero();
        for x in &v[k - 1..] {
            t += x;
        }
        t
    }

    pub fn probability(alpha: &[Rational], beta: &[Rational]) -> Rational {
        let n = alpha.len().max(beta.len());
        let (a, b) = (sorted(alpha, n), sorted(beta, n));
        let nz = |v: &[Rational]| v.iter().filter(|x| !x.is_zero()).count();
        if nz(&a) < nz(&b) {
            return Rational::zero();
        }
        let mut best = Rational::one();
        for k in 1..=n {
            let tb = tail(&b, k);
            if tb.is_zero() {
                continue;
            }
            let r = tail(&a, k) / tb;
            if r < best {
                best = r;
            }
        }
        best
    }

    /// `y` majorizes `x`: every head sum of `y` is at least that of `x`.
    pub fn majorized_by(x: &[Rational], y: &[Rational]) -> bool {
        let n = x.len().max(y.len());
        let (x, y) = (sorted(x, n), sorted(y, n));
        let (mut hx, mut hy) = (Rational::zero(), Rational::zero());
        for i in 0..n {
            hx += &x[i];
            hy += &y[i];
            if hx > hy {
                return false;
            }
        }
        true
    }
}

pub fn to_f64_vec(v: &[Rational]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64).collect()
}
