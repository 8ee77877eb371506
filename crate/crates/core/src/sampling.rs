//! Random states, operators and measurements for property tests, sweeps and benchmarks.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::scalar::{Rational, Scalar, Tolerance};
use crate::schmidt::{sort_descending, BipartiteState, CMatrix, DensityOperator, SchmidtVector};

const TOL: Tolerance = Tolerance(1e-9);

/// Complex Ginibre matrix with i.i.d. standard normal real and imaginary parts.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with the phases of `R` divided out).
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> CMatrix {
    let qr = ginibre(rng, n, n).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_state<R: Rng + ?Sized>(rng: &mut R, dim_a: usize, dim_b: usize) -> BipartiteState {
    BipartiteState::normalized(ginibre(rng, dim_a, dim_b)).expect("Ginibre matrix is nonzero")
}

/// `G G† / tr(G G†)` for a Ginibre `G` of the given rank.
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, n: usize, rank: usize) -> DensityOperator {
    let g = ginibre(rng, n, rank.max(1));
    let m = &g * g.adjoint();
    let tr = m.trace();
    let mut rho = m / tr;
    // exact Hermitian symmetry
    rho = (&rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    DensityOperator::new(rho, TOL).expect("Wishart matrix is a density operator")
}

/// Float Schmidt vector of length `n`; each entry is zero with probability `zero_prob`
/// (at least one entry stays positive).
pub fn random_schmidt_f64<R: Rng + ?Sized>(rng: &mut R, n: usize, zero_prob: f64) -> SchmidtVector<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.random::<f64>() < zero_prob { 0.0 } else { rng.random::<f64>() + 1e-3 })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    SchmidtVector::from_weights(w, TOL).expect("positive total")
}

/// Exact Schmidt vector from integer weights in `0..=max_weight` (at least one positive).
pub fn random_schmidt_rational<R: Rng + ?Sized>(rng: &mut R, n: usize, max_weight: i64) -> SchmidtVector<Rational> {
    let mut w: Vec<i64> = (0..n).map(|_| rng.random_range(0..=max_weight)).collect();
    if w.iter().all(|&x| x == 0) {
        w[0] = 1;
    }
    let weights = w.into_iter().map(|x| Rational::from_ratio(x, 1)).collect();
    SchmidtVector::from_weights(weights, TOL).expect("positive total")
}

/// A vector majorized by `y`, obtained by applying a few random T-transforms with rational
/// mixing weights.
pub fn random_majorized<R: Rng + ?Sized>(rng: &mut R, y: &SchmidtVector<Rational>, steps: usize) -> SchmidtVector<Rational> {
    let n = y.len();
    let mut v = y.probs().to_vec();
    if n < 2 {
        return y.clone();
    }
    for _ in 0..steps {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let t = Rational::from_ratio(rng.random_range(0..=8), 8);
        let one_minus = Rational::from_ratio(1, 1) - t.clone();
        let (vi, vj) = (v[i].clone(), v[j].clone());
        v[i] = t.clone() * vi.clone() + one_minus.clone() * vj.clone();
        v[j] = t * vj + one_minus * vi;
    }
    sort_descending(&mut v);
    SchmidtVector::new(v, TOL).expect("T-transforms preserve normalization")
}

/// `(Σ_m G_m† G_m)^{-1/2}` via the Hermitian eigendecomposition.
fn inverse_sqrt(m: &CMatrix) -> CMatrix {
    let eig = SymmetricEigen::new(m.clone());
    let d = nalgebra::DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| Complex64::new(1.0 / l.max(1e-300).sqrt(), 0.0)),
    );
    &eig.eigenvectors * CMatrix::from_diagonal(&d) * eig.eigenvectors.adjoint()
}

/// Random generalized measurement with `outcomes` Kraus operators on `n` levels,
/// `K_m = G_m S^{-1/2}` with `S = Σ G_m† G_m`.
pub fn random_measurement<R: Rng + ?Sized>(rng: &mut R, n: usize, outcomes: usize) -> Vec<CMatrix> {
    let gs: Vec<CMatrix> = (0..outcomes).map(|_| ginibre(rng, n, n)).collect();
    let s = gs.iter().fold(CMatrix::zeros(n, n), |acc, g| acc + g.adjoint() * g);
    let s = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
    let w = inverse_sqrt(&s);
    gs.into_iter().map(|g| g * &w).collect()
}
