//! Dense brute-force reference solves of assembled pencils, including the
//! null-space-projected treatment of divergence constraints (dense QR of the
//! constraint block). Oracle for the sparse shift-invert paths.

use nalgebra::DMatrix;

use crate::eigen::dense::{cholesky_lower, DENSE_DIM_LIMIT};
use crate::eigen::{EigResult, SolveError, SolveMethod};
use crate::lab::{build_pencil, mesh_for, LabError, Pencil, ProblemSpec, SolveOptions};
use crate::sparse::{SparseRect, SparseSymMatrix};

/// Dense generalized symmetric solve on explicit matrices; eigenvectors are
/// M-orthonormal and residuals are measured in the given pencil.
fn dense_generalized(
    a: &DMatrix<f64>,
    m: &DMatrix<f64>,
    k: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), SolveError> {
    let n = a.nrows();
    let l = cholesky_lower(m).map_err(|pivot_index| SolveError::MassNotPositiveDefinite {
        pivot_index,
    })?;
    // C = L⁻¹ A L⁻ᵀ via two triangular solves
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| SolveError::Internal("triangular inverse failed".into()))?;
    let c = &linv * a * linv.transpose();
    let c = (&c + &c.transpose()) * 0.5;
    let se = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].partial_cmp(&se.eigenvalues[j]).unwrap());
    let k = k.min(n);
    let mut vals = Vec::with_capacity(k);
    let mut vecs = Vec::with_capacity(k);
    let lt_inv = linv.transpose();
    for &idx in order.iter().take(k) {
        vals.push(se.eigenvalues[idx]);
        let y = se.eigenvectors.column(idx);
        let x = &lt_inv * y;
        vecs.push(x.as_slice().to_vec());
    }
    Ok((vals, vecs))
}

/// Orthonormal basis of the null space of `g` by projecting out the range of
/// gᵀ (thin QR) and orthonormalizing the projected coordinate directions.
fn null_space_basis(g: &DMatrix<f64>) -> DMatrix<f64> {
    let (np, nu) = (g.nrows(), g.ncols());
    if np == 0 {
        return DMatrix::identity(nu, nu);
    }
    let qr = g.transpose().qr();
    let q = qr.q(); // nu × np
    let target = nu - np;
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(target);
    let project = |z: &mut Vec<f64>, basis: &[Vec<f64>]| {
        for _ in 0..2 {
            for c in 0..np {
                let col = q.column(c);
                let d: f64 = z.iter().zip(col.iter()).map(|(u, v)| u * v).sum();
                for (zv, qv) in z.iter_mut().zip(col.iter()) {
                    *zv -= d * qv;
                }
            }
            for b in basis {
                let d: f64 = z.iter().zip(b).map(|(u, v)| u * v).sum();
                for (zv, bv) in z.iter_mut().zip(b) {
                    *zv -= d * bv;
                }
            }
        }
    };
    for i in 0..nu {
        if basis.len() == target {
            break;
        }
        let mut z = vec![0.0; nu];
        z[i] = 1.0;
        project(&mut z, &basis);
        let norm: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-4 {
            for zv in &mut z {
                *zv /= norm;
            }
            // one cleanup pass after normalization removes the residue the
            // normalization amplified
            project(&mut z, &basis);
            let n2: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
            for zv in &mut z {
                *zv /= n2;
            }
            basis.push(z);
        }
    }
    let mut zmat = DMatrix::zeros(nu, basis.len());
    for (c, b) in basis.iter().enumerate() {
        for (r, v) in b.iter().enumerate() {
            zmat[(r, c)] = *v;
        }
    }
    zmat
}

/// Dense reference for the constrained pencil: the divergence constraint is
/// removed by null-space projection; a penalty block is eliminated exactly.
pub fn dense_constrained_reference(
    a: &SparseSymMatrix,
    g: &SparseRect,
    m: &SparseSymMatrix,
    c_block: Option<&SparseSymMatrix>,
    k: usize,
) -> Result<EigResult, SolveError> {
    let nu = a.dim();
    let dim = nu + g.nrows();
    if dim > DENSE_DIM_LIMIT {
        return Err(SolveError::DimensionTooLarge {
            dim,
            max: DENSE_DIM_LIMIT,
        });
    }
    let ad = a.to_dense();
    let md = m.to_dense();
    let gd = g.to_dense();

    // residuals are measured in the pencil that was actually solved
    let pencil_residuals = |ra: &DMatrix<f64>, rm: &DMatrix<f64>, vals: &[f64], ys: &[Vec<f64>]| {
        vals.iter()
            .zip(ys)
            .map(|(lam, y)| {
                let yv = DMatrix::from_column_slice(y.len(), 1, y);
                let res = ra * &yv - (rm * &yv) * *lam;
                let mnorm = (yv.transpose() * rm * &yv)[(0, 0)].max(0.0).sqrt();
                res.norm() / mnorm.max(1e-300)
            })
            .collect::<Vec<f64>>()
    };

    let (vals, vecs_u, residual_norms): (Vec<f64>, Vec<Vec<f64>>, Vec<f64>) = match c_block {
        Some(c) => {
            // eliminate the pressure block: K = A − Gᵀ C⁻¹ G with C
            // negative definite, i.e. K = A + Gᵀ (−C)⁻¹ G
            let neg_c = c.to_dense() * -1.0;
            let l = cholesky_lower(&neg_c)
                .map_err(|pivot_index| SolveError::MassNotPositiveDefinite { pivot_index })?;
            let linv = l
                .try_inverse()
                .ok_or_else(|| SolveError::Internal("inverse failed".into()))?;
            let w = &linv * &gd; // (−C)^{-1/2} G
            let kmat = &ad + w.transpose() * &w;
            let kmat = (&kmat + &kmat.transpose()) * 0.5;
            let (vals, vecs) = dense_generalized(&kmat, &md, k)?;
            let res = pencil_residuals(&kmat, &md, &vals, &vecs);
            (vals, vecs, res)
        }
        None => {
            let z = null_space_basis(&gd);
            let az = z.transpose() * &ad * &z;
            let az = (&az + &az.transpose()) * 0.5;
            let mz = z.transpose() * &md * &z;
            let mz = (&mz + &mz.transpose()) * 0.5;
            let (vals, ys) = dense_generalized(&az, &mz, k)?;
            let res = pencil_residuals(&az, &mz, &vals, &ys);
            let vecs: Vec<Vec<f64>> = ys
                .iter()
                .map(|y| {
                    let yv = DMatrix::from_column_slice(y.len(), 1, y);
                    (&z * yv).as_slice().to_vec()
                })
                .collect();
            (vals, vecs, res)
        }
    };
    let converged = vec![true; vals.len()];

    // pad eigenvectors with zero pressure components (augmented layout)
    let vectors: Vec<Vec<f64>> = vecs_u
        .into_iter()
        .map(|mut u| {
            u.resize(dim, 0.0);
            u
        })
        .collect();

    Ok(EigResult {
        eigenvalues: vals,
        eigenvectors: Some(vectors),
        residual_norms,
        iterations: 1,
        method: SolveMethod::Dense,
        converged,
    })
}

/// Full dense solve of the assembled pencil of a catalog problem at a coarse
/// refinement level; the oracle for the Lanczos paths. A `count` larger than
/// the reduced dimension yields a truncated result.
pub fn brute_force_dense_check(
    spec: &ProblemSpec,
    opts: &SolveOptions,
) -> Result<EigResult, LabError> {
    let mesh = mesh_for(&spec.domain, spec.refinement_level)?;
    let (pencil, _sigma, take_sqrt) = build_pencil(spec, &mesh, opts)?;
    let mut result = match &pencil {
        Pencil::Standard { a, m } => {
            crate::eigen::solve_dense_sym_generalized(a, m, spec.count)?
        }
        Pencil::Saddle { a, g, m, c_block } => {
            dense_constrained_reference(a, g, m, c_block.as_ref(), spec.count)?
        }
    };
    if take_sqrt {
        for v in &mut result.eigenvalues {
            *v = v.max(0.0).sqrt();
        }
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    #[test]
    fn null_space_of_simple_constraint() {
        // g = [1 1 0] → null space is 2-dimensional, orthogonal to (1,1,0)
        let g = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let z = null_space_basis(&g);
        assert_eq!(z.ncols(), 2);
        for c in 0..2 {
            let col = z.column(c);
            assert!((col[0] + col[1]).abs() < 1e-12);
        }
        // orthonormal
        let gram = z.transpose() * &z;
        assert_relative_eq!(gram[(0, 0)], 1.0, epsilon = 1e-12);
        assert_relative_eq!(gram[(1, 1)], 1.0, epsilon = 1e-12);
        assert!(gram[(0, 1)].abs() < 1e-12);
    }
}
