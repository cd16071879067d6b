//! Dense reference path: A x = λ M x by Cholesky reduction of M and a full
//! symmetric eigendecomposition.

use nalgebra::DMatrix;

use super::{EigResult, SolveError, SolveMethod};
use crate::sparse::SparseSymMatrix;

pub const DENSE_DIM_LIMIT: usize = 4000;

/// Lower Cholesky with an explicit failing-pivot report.
pub fn cholesky_lower(m: &DMatrix<f64>) -> Result<DMatrix<f64>, usize> {
    let n = m.nrows();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(j);
        }
        let dj = d.sqrt();
        l[(j, j)] = dj;
        for i in (j + 1)..n {
            let mut v = m[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = v / dj;
        }
    }
    Ok(l)
}

fn forward_substitute_into(l: &DMatrix<f64>, b: &mut DMatrix<f64>) {
    let n = l.nrows();
    for col in 0..b.ncols() {
        for i in 0..n {
            let mut v = b[(i, col)];
            for k in 0..i {
                v -= l[(i, k)] * b[(k, col)];
            }
            b[(i, col)] = v / l[(i, i)];
        }
    }
}

fn back_substitute_transpose_into(l: &DMatrix<f64>, b: &mut DMatrix<f64>) {
    // solves Lᵀ x = b
    let n = l.nrows();
    for col in 0..b.ncols() {
        for i in (0..n).rev() {
            let mut v = b[(i, col)];
            for k in (i + 1)..n {
                v -= l[(k, i)] * b[(k, col)];
            }
            b[(i, col)] = v / l[(i, i)];
        }
    }
}

/// First `k` eigenpairs of the symmetric pencil (A, M), M positive definite.
/// Eigenvectors are M-orthonormal.
pub fn solve_dense_sym_generalized(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    k: usize,
) -> Result<EigResult, SolveError> {
    let n = a.dim();
    if m.dim() != n {
        return Err(SolveError::DimensionMismatch(n, m.dim()));
    }
    if n > DENSE_DIM_LIMIT {
        return Err(SolveError::DimensionTooLarge {
            dim: n,
            max: DENSE_DIM_LIMIT,
        });
    }
    if k == 0 || n == 0 {
        return Ok(EigResult::empty(SolveMethod::Dense));
    }
    let ad = a.to_dense();
    let md = m.to_dense();
    let l = cholesky_lower(&md)
        .map_err(|pivot_index| SolveError::MassNotPositiveDefinite { pivot_index })?;

    // C = L⁻¹ A L⁻ᵀ
    let mut y = ad.clone();
    forward_substitute_into(&l, &mut y); // Y = L⁻¹ A
    let mut yt = y.transpose();
    forward_substitute_into(&l, &mut yt); // Z = L⁻¹ Aᵀ L⁻ᵀ... (L⁻¹ Yᵀ)
    let c = {
        let ct = yt.transpose();
        (&ct + &ct.transpose()) * 0.5
    };

    let se = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[i]
            .partial_cmp(&se.eigenvalues[j])
            .expect("finite eigenvalues")
    });
    let k = k.min(n);

    let mut eigenvalues = Vec::with_capacity(k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        eigenvalues.push(se.eigenvalues[idx]);
        let mut col = DMatrix::from_column_slice(n, 1, se.eigenvectors.column(idx).as_slice());
        back_substitute_transpose_into(&l, &mut col); // x = L⁻ᵀ y
        vectors.push(col.as_slice().to_vec());
    }

    let (residual_norms, converged) = residuals(a, m, &eigenvalues, &vectors, 1e-8);
    Ok(EigResult {
        eigenvalues,
        eigenvectors: Some(vectors),
        residual_norms,
        iterations: 1,
        method: SolveMethod::Dense,
        converged,
    })
}

/// Raw residuals ‖A x − λ M x‖₂ / ‖x‖_M and a convergence flag against
/// tol·(1 + |λ|).
pub fn residuals(
    a: &SparseSymMatrix,
    m: &SparseSymMatrix,
    eigenvalues: &[f64],
    vectors: &[Vec<f64>],
    tol: f64,
) -> (Vec<f64>, Vec<bool>) {
    let mut res = Vec::with_capacity(eigenvalues.len());
    let mut conv = Vec::with_capacity(eigenvalues.len());
    for (lam, x) in eigenvalues.iter().zip(vectors) {
        let ax = a.matvec_alloc(x);
        let mx = m.matvec_alloc(x);
        let mnorm = x
            .iter()
            .zip(&mx)
            .map(|(u, v)| u * v)
            .sum::<f64>()
            .max(0.0)
            .sqrt();
        let rnorm = ax
            .iter()
            .zip(&mx)
            .map(|(u, v)| (u - lam * v).powi(2))
            .sum::<f64>()
            .sqrt();
        let r = if mnorm > 0.0 { rnorm / mnorm } else { rnorm };
        res.push(r);
        conv.push(r <= tol * (1.0 + lam.abs()));
    }
    (res, conv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SymTriplets;
    use approx::assert_relative_eq;

    #[test]
    fn diagonal_pencil() {
        let mut at = SymTriplets::new(2);
        at.add(0, 0, 2.0);
        at.add(1, 1, 3.0);
        let a = at.build();
        let m = SparseSymMatrix::identity(2);
        let r = solve_dense_sym_generalized(&a, &m, 2).unwrap();
        assert_relative_eq!(r.eigenvalues[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(r.eigenvalues[1], 3.0, epsilon = 1e-12);
    }

    #[test]
    fn identity_pencil_a_equals_m() {
        // any SPD A with M = A has spectrum all ones
        let mut t = SymTriplets::new(5);
        for i in 0..5 {
            t.add(i, i, 2.0 + i as f64);
            if i > 0 {
                t.add(i, i - 1, 0.5);
            }
        }
        let a = t.build();
        let r = solve_dense_sym_generalized(&a, &a, 3).unwrap();
        for v in &r.eigenvalues {
            assert_relative_eq!(*v, 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn mass_not_spd_reports_pivot() {
        let mut t = SymTriplets::new(3);
        t.add(0, 0, 1.0);
        t.add(1, 1, -1.0);
        t.add(2, 2, 1.0);
        let m = t.build();
        let a = SparseSymMatrix::identity(3);
        match solve_dense_sym_generalized(&a, &m, 1) {
            Err(SolveError::MassNotPositiveDefinite { pivot_index }) => {
                assert_eq!(pivot_index, 1)
            }
            other => panic!("expected mass pivot failure, got {other:?}"),
        }
    }

    #[test]
    fn k_zero_is_empty() {
        let a = SparseSymMatrix::identity(4);
        let r = solve_dense_sym_generalized(&a, &a, 0).unwrap();
        assert!(r.eigenvalues.is_empty());
    }

    #[test]
    fn m_orthonormal_eigenvectors() {
        let mut t = SymTriplets::new(6);
        for i in 0..6 {
            t.add(i, i, 1.0 + 0.3 * i as f64);
            if i > 0 {
                t.add(i, i - 1, 0.2);
            }
        }
        let m = t.build();
        let mut s = SymTriplets::new(6);
        for i in 0..6 {
            s.add(i, i, (i as f64 + 1.0).powi(2));
            if i > 1 {
                s.add(i, i - 2, -0.7);
            }
        }
        let a = s.build();
        let r = solve_dense_sym_generalized(&a, &m, 6).unwrap();
        let vs = r.eigenvectors.as_ref().unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let mi = m.matvec_alloc(&vs[j]);
                let dot: f64 = vs[i].iter().zip(&mi).map(|(u, v)| u * v).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() <= 1e-8, "M-orthonormality {i},{j}: {dot}");
            }
        }
    }
}
