//! Symmetric generalized eigensolvers: a dense reference path and a sparse
//! shift-invert Lanczos path, plus the constrained saddle-point variant.

pub mod dense;
pub mod ldlt;
pub mod lanczos;
pub mod ordering;
pub mod saddle;

use thiserror::Error;

pub use dense::{solve_dense_sym_generalized, DENSE_DIM_LIMIT};
pub use lanczos::{gershgorin_lower, solve_shift_invert_lanczos, LanczosOptions, DEFAULT_SEED, DEFAULT_TOL};
pub use ldlt::{DenseBk, FactorError, Ldlt, OrderingChoice};
pub use saddle::{augmented_pencil, solve_saddle_point_eig};

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("mass matrix not positive definite: Cholesky failed at pivot {pivot_index}")]
    MassNotPositiveDefinite { pivot_index: usize },
    #[error("shifted matrix singular near sigma = {sigma} after retries")]
    SingularShift { sigma: f64 },
    #[error("dimension {dim} exceeds dense-path limit {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("factorization failed: {0}")]
    Factorization(String),
    #[error("{0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    Dense,
    Lanczos,
}

/// Eigensolver output: ascending eigenvalues, optional M-orthonormal
/// eigenvectors, raw residuals ‖A x − λ M x‖₂ / ‖x‖_M and per-pair
/// convergence flags (false entries mark a partial, non-converged result).
#[derive(Debug, Clone)]
pub struct EigResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub residual_norms: Vec<f64>,
    pub iterations: usize,
    pub method: SolveMethod,
    pub converged: Vec<bool>,
}

impl EigResult {
    pub fn empty(method: SolveMethod) -> Self {
        EigResult {
            eigenvalues: Vec::new(),
            eigenvectors: None,
            residual_norms: Vec::new(),
            iterations: 0,
            method,
            converged: Vec::new(),
        }
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    /// Groups eigenvalues whose successive relative gaps stay below `rel_tol`.
    /// Returns (representative value, multiplicity) per group.
    pub fn multiplicity_groups(&self, rel_tol: f64) -> Vec<(f64, usize)> {
        group_multiplicities(&self.eigenvalues, rel_tol)
    }
}

/// Chains eigenvalues within `rel_tol` relative of each other into groups.
pub fn group_multiplicities(eigenvalues: &[f64], rel_tol: f64) -> Vec<(f64, usize)> {
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for &v in eigenvalues {
        match groups.last_mut() {
            Some((rep, count))
                if (v - *rep).abs() <= rel_tol * rep.abs().max(v.abs()).max(1e-300) =>
            {
                // running representative: mean of the group
                *rep = (*rep * *count as f64 + v) / (*count as f64 + 1.0);
                *count += 1;
            }
            _ => groups.push((v, 1)),
        }
    }
    groups
}

/// Counts numerically-zero leading eigenvalues with the scale-free threshold
/// |λ| <= rel · λ_first_nonzero.
pub fn count_zero_modes(eigenvalues: &[f64], rel: f64) -> usize {
    let max_mag = eigenvalues
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let first_nonzero = eigenvalues
        .iter()
        .copied()
        .find(|v| v.abs() > rel * max_mag)
        .unwrap_or(max_mag);
    eigenvalues
        .iter()
        .filter(|v| v.abs() <= rel * first_nonzero.abs())
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{SparseSymMatrix, SymTriplets};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn dense_and_lanczos_agree_on_random_spd_pencil() {
        let n = 50;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut at = SymTriplets::new(n);
        let mut mt = SymTriplets::new(n);
        for i in 0..n {
            at.add(i, i, 5.0 + rng.gen_range(0.0..2.0));
            mt.add(i, i, 1.0 + rng.gen_range(0.0..0.5));
            if i > 0 {
                at.add(i, i - 1, rng.gen_range(-1.0..1.0));
                mt.add(i, i - 1, rng.gen_range(-0.2..0.2));
            }
        }
        let a = at.build();
        let m = mt.build();
        let rd = solve_dense_sym_generalized(&a, &m, 6).unwrap();
        let rl = solve_shift_invert_lanczos(&a, &m, 0.0, 6, &LanczosOptions::default()).unwrap();
        for (u, v) in rd.eigenvalues.iter().zip(&rl.eigenvalues) {
            assert_relative_eq!(u, v, max_relative = 1e-9);
        }
    }

    #[test]
    fn zero_mode_counting() {
        let vals = vec![1e-12, 3e-12, 2.5, 3.0, 9.0];
        assert_eq!(count_zero_modes(&vals, 1e-8), 2);
        let vals2 = vec![0.5, 1.0];
        assert_eq!(count_zero_modes(&vals2, 1e-8), 0);
    }

    #[test]
    fn multiplicity_grouping() {
        let vals = vec![1.0, 1.0 + 1e-8, 2.0, 2.0, 3.5];
        let g = group_multiplicities(&vals, 1e-6);
        assert_eq!(g.len(), 3);
        assert_eq!(g[0].1, 2);
        assert_eq!(g[1].1, 2);
        assert_eq!(g[2].1, 1);
    }

    #[test]
    fn residual_invariant_on_returned_pairs() {
        // ‖A x − λ M x‖₂ ≤ tol · ‖x‖_M · (1 + |λ|)
        let n = 80;
        let mut t = SymTriplets::new(n);
        for i in 0..n {
            t.add(i, i, 4.0);
            if i > 0 {
                t.add(i, i - 1, -1.9);
            }
        }
        let a = t.build();
        let m = SparseSymMatrix::identity(n);
        let tol = 1e-9;
        let r = solve_shift_invert_lanczos(
            &a,
            &m,
            0.0,
            5,
            &LanczosOptions {
                tol,
                ..Default::default()
            },
        )
        .unwrap();
        let xs = r.eigenvectors.as_ref().unwrap();
        for ((lam, x), conv) in r.eigenvalues.iter().zip(xs).zip(&r.converged) {
            assert!(conv);
            let ax = a.matvec_alloc(x);
            let mx = m.matvec_alloc(x);
            let rn: f64 = ax
                .iter()
                .zip(&mx)
                .map(|(u, v)| (u - lam * v).powi(2))
                .sum::<f64>()
                .sqrt();
            let xm: f64 = x.iter().zip(&mx).map(|(u, v)| u * v).sum::<f64>().sqrt();
            assert!(rn <= tol * xm * (1.0 + lam.abs()));
        }
    }
}
