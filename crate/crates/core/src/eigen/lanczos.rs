//! Shift-invert Lanczos in the M-inner product with full reorthogonalization,
//! deflation locking and an LDLᵀ-inertia completeness certificate.
//!
//! The operator is (A − σM)⁻¹ M; Ritz values θ map back through λ = σ + 1/θ,
//! so the eigenvalues nearest σ are the largest |θ|. A single Krylov sequence
//! cannot see more than one copy of a multiple eigenvalue, so after a round
//! converges the solver counts the true number of eigenvalues in the spanned
//! interval by the factorization inertia (Sylvester's law; for augmented
//! saddle pencils the constraint block contributes a fixed negative offset)
//! and, when copies are missing, locks the converged pairs and restarts the
//! iteration M-orthogonally to them.
//!
//! With a semidefinite M (augmented saddle-point pencils) the iteration lives
//! in range((A − σM)⁻¹M), which the purified start vector enforces; spurious
//! θ ≈ 0 Ritz values correspond to the infinite eigenvalues of the pencil and
//! are filtered.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::residuals;
use super::ldlt::{FactorError, Ldlt, OrderingChoice};
use super::{EigResult, SolveError, SolveMethod};
use crate::sparse::SparseSymMatrix;

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 42;
const MAX_SHIFT_RETRIES: usize = 3;
const MAX_DEFLATION_ROUNDS: usize = 6;

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    pub tol: f64,
    pub seed: u64,
    pub max_iterations: Option<usize>,
    /// Drop Ritz values with |θ| below this fraction of max |θ| (infinite
    /// pencil modes of semidefinite M).
    pub theta_floor: f64,
    /// Guard mask forwarded to the fill-reducing ordering (saddle blocks).
    pub guarded: Option<Vec<bool>>,
    /// Negative-inertia offset of the pencil: the number of constraint rows
    /// of an augmented saddle system (0 for definite mass matrices).
    pub inertia_offset: usize,
    /// Skip the inertia completeness certificate (diagnostics only).
    pub skip_inertia_check: bool,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
            max_iterations: None,
            theta_floor: 1e-10,
            guarded: None,
            inertia_offset: 0,
            skip_inertia_check: false,
        }
    }
}

/// Default shift of the catalog: half the lowest Gershgorin-style estimate of
/// the pencil for Dirichlet problems.
pub fn gershgorin_lower(a: &SparseSymMatrix, m: &SparseSymMatrix) -> f64 {
    let ad = a.diagonal();
    let ar = a.offdiag_abs_row_sums();
    let md = m.diagonal();
    let mut lo = f64::INFINITY;
    for i in 0..a.dim() {
        let denom = md[i].max(1e-300);
        lo = lo.min((ad[i] - ar[i]) / denom);
    }
    lo
}

fn factor_with_retries(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    sigma: f64,
    guarded: Option<&[bool]>,
) -> Result<(Ldlt, f64), SolveError> {
    let mut s = sigma;
    for _ in 0..=MAX_SHIFT_RETRIES {
        let shifted = a
            .linear_combination(1.0, m, -s)
            .map_err(|e| SolveError::Internal(e.to_string()))?;
        match Ldlt::factor(&shifted, OrderingChoice::MinDegree, guarded) {
            Ok(f) => return Ok((f, s)),
            Err(FactorError::SingularPivot { .. }) => {
                s = s * (1.0 + 1e-3) + 1e-8;
            }
            Err(e) => return Err(SolveError::Factorization(e.to_string())),
        }
    }
    Err(SolveError::SingularShift { sigma })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// A converged, locked eigenpair used for deflation.
struct Locked {
    value: f64,
    vector: Vec<f64>,
    mvector: Vec<f64>,
    residual: f64,
}

struct Round {
    /// (value, vector, residual, converged), unsorted.
    pairs: Vec<(f64, Vec<f64>, f64, bool)>,
    iterations: usize,
}

/// One deflated Lanczos round: builds a Krylov basis M-orthogonal to the
/// locked set and extracts up to `want` Ritz pairs nearest σ.
#[allow(clippy::too_many_arguments)]
fn lanczos_round(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    factor: &Ldlt,
    sigma: f64,
    want: usize,
    opts: &LanczosOptions,
    locked: &[Locked],
    rng: &mut ChaCha8Rng,
) -> Round {
    let n = a.dim();
    let max_iter = opts
        .max_iterations
        .unwrap_or_else(|| (10 * want + 140).min(n.saturating_sub(locked.len()).max(1)));

    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut mv: Vec<Vec<f64>> = Vec::new();
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut mbuf = vec![0.0; n];

    let mdot = |x: &[f64], buf: &mut Vec<f64>| -> Vec<f64> {
        m.matvec(x, buf);
        buf.clone()
    };

    let orthogonalize = |w: &mut Vec<f64>,
                         basis: &[Vec<f64>],
                         mv: &[Vec<f64>],
                         locked: &[Locked]| {
        for _ in 0..2 {
            for l in locked {
                let c = dot(w, &l.mvector);
                axpy(w, -c, &l.vector);
            }
            for (vi, mvi) in basis.iter().zip(mv.iter()) {
                let c = dot(w, mvi);
                axpy(w, -c, vi);
            }
        }
    };

    // purified start vector, deflated against the locked set
    let mut v0: Option<Vec<f64>> = None;
    for _ in 0..6 {
        let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut w = factor.solve(&mdot(&r, &mut mbuf));
        orthogonalize(&mut w, &basis, &mv, locked);
        let norm = dot(&w, &mdot(&w, &mut mbuf)).max(0.0).sqrt();
        if norm > 1e-12 {
            v0 = Some(w.iter().map(|x| x / norm).collect());
            break;
        }
    }
    let Some(mut v0) = v0 else {
        return Round {
            pairs: Vec::new(),
            iterations: 0,
        };
    };

    let breakdown_floor = 1e-13;
    let mut iterations;

    let extract = |alphas: &[f64],
                   betas: &[f64],
                   basis: &[Vec<f64>],
                   beta_last: f64|
     -> (Vec<(f64, Vec<f64>, f64)>, bool) {
        // Ritz pairs nearest σ with error estimates
        let (theta, s) = tridiag_eigen(alphas, betas);
        let mut order: Vec<usize> = (0..theta.len()).collect();
        order.sort_by(|&i, &l| theta[l].abs().partial_cmp(&theta[i].abs()).unwrap());
        let theta_max = theta[order[0]].abs().max(f64::MIN_POSITIVE);
        let chosen: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&i| theta[i].abs() > opts.theta_floor * theta_max)
            .take(want)
            .collect();
        let mut estimates_ok = chosen.len() == want;
        let mut out = Vec::with_capacity(chosen.len());
        for &i in &chosen {
            let lam = sigma + 1.0 / theta[i];
            let est = beta_last * s[(alphas.len() - 1, i)].abs() / (theta[i] * theta[i]);
            if est > 0.1 * opts.tol * (1.0 + lam.abs()) {
                estimates_ok = false;
            }
            let mut x = vec![0.0; basis[0].len()];
            for (jj, v) in basis.iter().enumerate() {
                axpy(&mut x, s[(jj, i)], v);
            }
            out.push((lam, x, est));
        }
        (out, estimates_ok)
    };

    loop {
        let vj = v0.clone();
        let mvj = mdot(&vj, &mut mbuf);
        basis.push(vj);
        mv.push(mvj);
        let j = basis.len() - 1;

        let mut w = factor.solve(&mv[j]);
        if j > 0 {
            axpy(&mut w, -betas[j - 1], &basis[j - 1]);
        }
        let alpha = dot(&w, &mv[j]);
        alphas.push(alpha);
        axpy(&mut w, -alpha, &basis[j]);
        orthogonalize(&mut w, &basis, &mv, locked);
        let beta = dot(&w, &mdot(&w, &mut mbuf)).max(0.0).sqrt();
        iterations = j + 1;

        let subspace_exhausted = beta <= breakdown_floor;
        let budget_spent = basis.len() >= max_iter;
        let check_now = budget_spent
            || subspace_exhausted
            || (basis.len() >= want + 2 && basis.len() % 5 == 0);

        if check_now {
            let (candidates, estimates_ok) = extract(&alphas, &betas, &basis, beta);
            if (estimates_ok && candidates.len() == want) || budget_spent {
                let values: Vec<f64> = candidates.iter().map(|c| c.0).collect();
                let vectors: Vec<Vec<f64>> = candidates.iter().map(|c| c.1.clone()).collect();
                let (res, conv) = residuals(a, m, &values, &vectors, opts.tol);
                if conv.iter().all(|&c| c) || budget_spent {
                    let pairs = values
                        .into_iter()
                        .zip(vectors)
                        .zip(res.into_iter().zip(conv))
                        .map(|((lam, x), (r, c))| (lam, x, r, c))
                        .collect();
                    return Round { pairs, iterations };
                }
            }
        }

        if subspace_exhausted {
            // invariant subspace: restart in a fresh M-orthogonal direction
            let mut fresh = None;
            for _ in 0..5 {
                let r: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mut w2 = factor.solve(&mdot(&r, &mut mbuf));
                orthogonalize(&mut w2, &basis, &mv, locked);
                let norm = dot(&w2, &mdot(&w2, &mut mbuf)).max(0.0).sqrt();
                if norm > 1e-12 {
                    fresh = Some(w2.iter().map(|x| x / norm).collect::<Vec<f64>>());
                    break;
                }
            }
            match fresh {
                Some(w2) if basis.len() + locked.len() < n => {
                    betas.push(0.0);
                    v0 = w2;
                }
                _ => {
                    // space exhausted: return whatever converged
                    let (candidates, _) = extract(&alphas, &betas, &basis, beta);
                    let values: Vec<f64> = candidates.iter().map(|c| c.0).collect();
                    let vectors: Vec<Vec<f64>> = candidates.iter().map(|c| c.1.clone()).collect();
                    let (res, conv) = residuals(a, m, &values, &vectors, opts.tol);
                    let pairs = values
                        .into_iter()
                        .zip(vectors)
                        .zip(res.into_iter().zip(conv))
                        .map(|((lam, x), (r, c))| (lam, x, r, c))
                        .collect();
                    return Round { pairs, iterations };
                }
            }
        } else {
            betas.push(beta);
            v0 = w.iter().map(|x| x / beta).collect();
        }
    }
}

/// Number of pencil eigenvalues strictly below `s`, from the factorization
/// inertia (minus the fixed saddle offset). `None` when no factorization
/// succeeds near `s`.
fn eigencount_below(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    s: f64,
    opts: &LanczosOptions,
) -> Option<usize> {
    let mut shift = s;
    for _ in 0..3 {
        let shifted = a.linear_combination(1.0, m, -shift).ok()?;
        match Ldlt::factor(&shifted, OrderingChoice::MinDegree, opts.guarded.as_deref()) {
            Ok(f) => {
                return Some(f.negative_pivots.saturating_sub(opts.inertia_offset));
            }
            Err(_) => {
                shift = shift * (1.0 + 1e-9) + 1e-13;
            }
        }
    }
    None
}

/// k eigenvalues of A x = λ M x nearest σ.
pub fn solve_shift_invert_lanczos(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    sigma: f64,
    k: usize,
    opts: &LanczosOptions,
) -> Result<EigResult, SolveError> {
    let n = a.dim();
    if m.dim() != n {
        return Err(SolveError::DimensionMismatch(n, m.dim()));
    }
    if k == 0 || n == 0 {
        return Ok(EigResult::empty(SolveMethod::Lanczos));
    }
    let (factor, sigma) = factor_with_retries(a, m, sigma, opts.guarded.as_deref())?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let mut locked: Vec<Locked> = Vec::new();
    let mut mbuf = vec![0.0; n];
    let mut iterations_total = 0usize;

    for _round in 0..MAX_DEFLATION_ROUNDS {
        let want = k.saturating_sub(locked.len()).max(1);
        let round = lanczos_round(a, m, &factor, sigma, want, opts, &locked, &mut rng);
        iterations_total += round.iterations;

        // merge locked and fresh pairs
        let mut all: Vec<(f64, Vec<f64>, f64, bool)> = locked
            .iter()
            .map(|l| (l.value, l.vector.clone(), l.residual, true))
            .collect();
        all.extend(round.pairs);
        // nearest σ first, cap at k
        all.sort_by(|x, y| {
            let dx = (x.0 - sigma).abs();
            let dy = (y.0 - sigma).abs();
            dx.partial_cmp(&dy).unwrap()
        });
        all.truncate(k);
        all.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());

        let all_converged = all.iter().all(|p| p.3) && all.len() == k;

        // completeness certificate: every pencil eigenvalue strictly inside
        // (λ̂_min − pad, λ̂_max − pad) must be present, multiple copies
        // included. Copies tied with the last returned value are equivalent
        // answers and not counted.
        let mut complete = true;
        if all_converged && !opts.skip_inertia_check {
            let lo = all.first().map(|p| p.0).unwrap();
            let hi = all.last().map(|p| p.0).unwrap();
            let scale = lo.abs().max(hi.abs()).max(1e-300);
            let pad = 1e-7 * scale;
            let s_lo = lo - pad;
            let s_hi = hi - pad;
            if s_hi > s_lo {
                if let (Some(below_lo), Some(below_hi)) = (
                    eigencount_below(a, m, s_lo, opts),
                    eigencount_below(a, m, s_hi, opts),
                ) {
                    let expected = below_hi.saturating_sub(below_lo);
                    let have = all.iter().filter(|p| p.0 > s_lo && p.0 < s_hi).count();
                    complete = have >= expected;
                }
            }
        }

        if (all_converged && complete) || _round + 1 == MAX_DEFLATION_ROUNDS {
            let flag_incomplete = !complete;
            let eigenvalues: Vec<f64> = all.iter().map(|p| p.0).collect();
            let vectors: Vec<Vec<f64>> = all.iter().map(|p| p.1.clone()).collect();
            let residual_norms: Vec<f64> = all.iter().map(|p| p.2).collect();
            let converged: Vec<bool> = all
                .iter()
                .map(|p| p.3 && !flag_incomplete)
                .collect();
            return Ok(EigResult {
                eigenvalues,
                eigenvectors: Some(vectors),
                residual_norms,
                iterations: iterations_total,
                method: SolveMethod::Lanczos,
                converged,
            });
        }

        // lock everything converged so far and hunt for the missing copies
        locked.clear();
        for (lam, x, r, c) in all {
            if c {
                m.matvec(&x, &mut mbuf);
                locked.push(Locked {
                    value: lam,
                    vector: x,
                    mvector: mbuf.clone(),
                    residual: r,
                });
            }
        }
    }
    unreachable!("deflation loop always returns");
}

/// Eigendecomposition of the symmetric tridiagonal (alphas, betas); betas may
/// contain restart zeros. Returns (values, column eigenvectors).
fn tridiag_eigen(alphas: &[f64], betas: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let j = alphas.len();
    let mut t = DMatrix::<f64>::zeros(j, j);
    for i in 0..j {
        t[(i, i)] = alphas[i];
        if i + 1 < j {
            let b = betas.get(i).copied().unwrap_or(0.0);
            t[(i, i + 1)] = b;
            t[(i + 1, i)] = b;
        }
    }
    let se = t.symmetric_eigen();
    (se.eigenvalues.as_slice().to_vec(), se.eigenvectors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SymTriplets;
    use approx::assert_relative_eq;

    /// 1D Dirichlet Laplacian: tridiagonal (2, -1)/h² with n interior points,
    /// h = 1/(n+1); eigenvalues (2/h²)(1 − cos(jπh)).
    fn laplacian_1d(n: usize) -> SparseSymMatrix {
        let h = 1.0 / (n as f64 + 1.0);
        let mut t = SymTriplets::new(n);
        for i in 0..n {
            t.add(i, i, 2.0 / (h * h));
            if i > 0 {
                t.add(i, i - 1, -1.0 / (h * h));
            }
        }
        t.build()
    }

    #[test]
    fn tridiagonal_dirichlet_laplacian_closed_form() {
        let n = 100;
        let h = 1.0 / (n as f64 + 1.0);
        let a = laplacian_1d(n);
        let m = SparseSymMatrix::identity(n);
        let r = solve_shift_invert_lanczos(&a, &m, 0.0, 3, &LanczosOptions::default()).unwrap();
        for j in 1..=3 {
            let exact = (2.0 / (h * h)) * (1.0 - (j as f64 * std::f64::consts::PI * h).cos());
            assert_relative_eq!(r.eigenvalues[j - 1], exact, max_relative = 1e-9);
        }
        assert!(r.converged.iter().all(|&c| c));
    }

    #[test]
    fn k_zero_returns_empty_without_factorization() {
        // a singular matrix would fail to factor; k = 0 must not try
        let a = SparseSymMatrix::zeros(5);
        let m = SparseSymMatrix::identity(5);
        let r = solve_shift_invert_lanczos(&a, &m, 0.0, 0, &LanczosOptions::default()).unwrap();
        assert!(r.eigenvalues.is_empty());
    }

    #[test]
    fn shift_retry_on_exact_eigenvalue() {
        // σ exactly at an eigenvalue of diag(1, 2, 3)
        let mut t = SymTriplets::new(3);
        for (i, v) in [1.0, 2.0, 3.0].iter().enumerate() {
            t.add(i, i, *v);
        }
        let a = t.build();
        let m = SparseSymMatrix::identity(3);
        let r = solve_shift_invert_lanczos(&a, &m, 2.0, 3, &LanczosOptions::default()).unwrap();
        let mut vals = r.eigenvalues.clone();
        vals.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (v, e) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert_relative_eq!(*v, e, max_relative = 1e-9);
        }
    }

    #[test]
    fn multiple_eigenvalue_recovered_with_shift_between() {
        // double eigenvalue at 2: diag(1, 2, 2, 5); σ between 1.9 and 2.1
        let mut t = SymTriplets::new(4);
        for (i, v) in [1.0, 2.0, 2.0, 5.0].iter().enumerate() {
            t.add(i, i, *v);
        }
        let a = t.build();
        let m = SparseSymMatrix::identity(4);
        let r = solve_shift_invert_lanczos(&a, &m, 1.95, 3, &LanczosOptions::default()).unwrap();
        let close: Vec<f64> = r
            .eigenvalues
            .iter()
            .copied()
            .filter(|v| (v - 2.0).abs() < 1e-8)
            .collect();
        assert_eq!(close.len(), 2, "double eigenvalue must appear twice: {:?}", r.eigenvalues);
    }

    #[test]
    fn high_multiplicity_found_by_deflation() {
        // diag(1 x4, 3, 4, ...): the quadruple eigenvalue needs restarts
        let n = 40;
        let mut t = SymTriplets::new(n);
        for i in 0..n {
            let v = if i < 4 { 1.0 } else { (i - 2) as f64 };
            t.add(i, i, v);
        }
        let a = t.build();
        let m = SparseSymMatrix::identity(n);
        let r = solve_shift_invert_lanczos(&a, &m, 0.0, 6, &LanczosOptions::default()).unwrap();
        let ones = r
            .eigenvalues
            .iter()
            .filter(|v| (*v - 1.0).abs() < 1e-8)
            .count();
        assert_eq!(ones, 4, "quadruple eigenvalue: {:?}", r.eigenvalues);
        assert!(r.converged.iter().all(|&c| c));
    }

    #[test]
    fn seeded_runs_are_bitwise_deterministic() {
        let a = laplacian_1d(60);
        let m = SparseSymMatrix::identity(60);
        let r1 = solve_shift_invert_lanczos(&a, &m, 0.0, 4, &LanczosOptions::default()).unwrap();
        let r2 = solve_shift_invert_lanczos(&a, &m, 0.0, 4, &LanczosOptions::default()).unwrap();
        assert_eq!(r1.eigenvalues, r2.eigenvalues);
    }

    #[test]
    fn generalized_mass_scaling_invariance() {
        let a = laplacian_1d(40);
        let mut mt = SymTriplets::new(40);
        for i in 0..40 {
            mt.add(i, i, 1.0 + 0.01 * i as f64);
        }
        let m = mt.build();
        let c = 7.3;
        let r1 = solve_shift_invert_lanczos(&a, &m, 0.0, 4, &LanczosOptions::default()).unwrap();
        let r2 = solve_shift_invert_lanczos(&a.scaled(c), &m.scaled(c), 0.0, 4, &LanczosOptions::default())
            .unwrap();
        for (u, v) in r1.eigenvalues.iter().zip(&r2.eigenvalues) {
            assert_relative_eq!(u, v, max_relative = 1e-9);
        }
        // A → cA scales eigenvalues by c
        let r3 = solve_shift_invert_lanczos(&a.scaled(c), &m, 0.0, 4, &LanczosOptions::default())
            .unwrap();
        for (u, v) in r1.eigenvalues.iter().zip(&r3.eigenvalues) {
            assert_relative_eq!(c * u, *v, max_relative = 1e-9);
        }
    }

    #[test]
    fn identity_pencil_multiplicity() {
        // A = M: every eigenvalue is 1 with full multiplicity
        let mut t = SymTriplets::new(6);
        for i in 0..6 {
            t.add(i, i, 2.0 + i as f64 * 0.5);
        }
        let a = t.build();
        let r = solve_shift_invert_lanczos(&a, &a, 0.0, 3, &LanczosOptions::default()).unwrap();
        assert_eq!(r.eigenvalues.len(), 3);
        for v in &r.eigenvalues {
            assert_relative_eq!(*v, 1.0, max_relative = 1e-10);
        }
    }
}
