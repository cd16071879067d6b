//! Sparse LDLᵀ factorization (up-looking, static pivot order) and a dense
//! Bunch-Kaufman fallback for symmetric indefinite systems that defeat the
//! static ordering.

use nalgebra::DMatrix;
use thiserror::Error;

use super::ordering::min_degree_ordering;
use crate::sparse::SparseSymMatrix;

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("zero or tiny pivot at reduced index {index} (|d| = {pivot:.3e})")]
    SingularPivot { index: usize, pivot: f64 },
    #[error("matrix is empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingChoice {
    Natural,
    MinDegree,
}

/// LDLᵀ factor of P A Pᵀ with unit lower-triangular L and diagonal D.
#[derive(Debug, Clone)]
pub struct Ldlt {
    n: usize,
    perm: Vec<usize>,     // perm[new] = old
    inv_perm: Vec<usize>, // inv_perm[old] = new
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    pub negative_pivots: usize,
}

impl Ldlt {
    /// Factorizes with an optional guard mask (see `min_degree_ordering`).
    /// A pivot with |d| <= rel_tol * scale aborts with `SingularPivot`.
    pub fn factor(
        a: &SparseSymMatrix,
        ordering: OrderingChoice,
        guarded: Option<&[bool]>,
    ) -> Result<Self, FactorError> {
        let n = a.dim();
        if n == 0 {
            return Err(FactorError::Empty);
        }
        let perm = match ordering {
            OrderingChoice::Natural => (0..n).collect::<Vec<_>>(),
            OrderingChoice::MinDegree => min_degree_ordering(&a.adjacency(), guarded),
        };
        let mut inv_perm = vec![0usize; n];
        for (k, &old) in perm.iter().enumerate() {
            inv_perm[old] = k;
        }

        // permuted upper-triangular CSC (row <= col)
        let mut counts = vec![0usize; n + 1];
        for (r, c, _) in a.iter_lower() {
            let (i, j) = (inv_perm[r], inv_perm[c]);
            let col = i.max(j);
            counts[col + 1] += 1;
        }
        for c in 0..n {
            counts[c + 1] += counts[c];
        }
        let nnz = counts[n];
        let mut up_ptr = counts.clone();
        let mut up_row = vec![0usize; nnz];
        let mut up_val = vec![0.0f64; nnz];
        for (r, c, v) in a.iter_lower() {
            let (i, j) = (inv_perm[r], inv_perm[c]);
            let (row, col) = (i.min(j), i.max(j));
            let slot = up_ptr[col];
            up_ptr[col] += 1;
            up_row[slot] = row;
            up_val[slot] = v;
        }
        let up_ptr = counts;

        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        let pivot_floor = scale * 1e-300_f64.max(1e-20);

        // elimination tree
        let mut parent = vec![usize::MAX; n];
        let mut ancestor = vec![usize::MAX; n];
        for k in 0..n {
            for p in up_ptr[k]..up_ptr[k + 1] {
                let mut i = up_row[p];
                while i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == usize::MAX {
                        parent[i] = k;
                        break;
                    }
                    if next == k {
                        break;
                    }
                    i = next;
                }
            }
        }

        // numeric factorization (Davis-style up-looking)
        let mut lp = vec![0usize; n + 1];
        let mut lnz = vec![0usize; n];
        let mut li: Vec<Vec<usize>> = vec![Vec::new(); n];
        let mut lx: Vec<Vec<f64>> = vec![Vec::new(); n];
        let mut d = vec![0.0f64; n];
        let mut y = vec![0.0f64; n];
        let mut pattern = vec![0usize; n];
        let mut flag = vec![usize::MAX; n];
        let mut negative_pivots = 0usize;

        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let mut dk = 0.0;
            for p in up_ptr[k]..up_ptr[k + 1] {
                let i = up_row[p];
                if i == k {
                    dk += up_val[p];
                    continue;
                }
                y[i] += up_val[p];
                // walk up the etree collecting the row pattern
                let mut len = 0usize;
                let mut ii = i;
                while flag[ii] != k {
                    pattern[len] = ii;
                    len += 1;
                    flag[ii] = k;
                    ii = parent[ii];
                }
                // push in reverse (topological) order
                for q in (0..len).rev() {
                    top -= 1;
                    pattern[top] = pattern[q];
                }
            }
            d[k] = dk;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = 0.0;
                for (li_p, lx_p) in li[i].iter().zip(lx[i].iter()) {
                    y[*li_p] -= lx_p * yi;
                }
                let lki = yi / d[i];
                d[k] -= lki * yi;
                li[i].push(k);
                lx[i].push(lki);
                lnz[i] += 1;
            }
            if d[k].abs() <= pivot_floor || !d[k].is_finite() {
                return Err(FactorError::SingularPivot {
                    index: k,
                    pivot: d[k],
                });
            }
            if d[k] < 0.0 {
                negative_pivots += 1;
            }
        }

        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        let li_flat: Vec<usize> = li.into_iter().flatten().collect();
        let lx_flat: Vec<f64> = lx.into_iter().flatten().collect();

        Ok(Ldlt {
            n,
            perm,
            inv_perm,
            lp,
            li: li_flat,
            lx: lx_flat,
            d,
            negative_pivots,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_positive_definite(&self) -> bool {
        self.negative_pivots == 0 && self.d.iter().all(|&x| x > 0.0)
    }

    /// max |d| / min |d|; reported as the factorization conditioning estimate.
    pub fn pivot_ratio(&self) -> f64 {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for &x in &self.d {
            lo = lo.min(x.abs());
            hi = hi.max(x.abs());
        }
        if lo == 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut z: Vec<f64> = (0..self.n).map(|k| b[self.perm[k]]).collect();
        // L z' = z (unit lower, stored by columns)
        for k in 0..self.n {
            let zk = z[k];
            if zk != 0.0 {
                for p in self.lp[k]..self.lp[k + 1] {
                    z[self.li[p]] -= self.lx[p] * zk;
                }
            }
        }
        for k in 0..self.n {
            z[k] /= self.d[k];
        }
        // Lᵀ out = z
        for k in (0..self.n).rev() {
            let mut acc = z[k];
            for p in self.lp[k]..self.lp[k + 1] {
                acc -= self.lx[p] * z[self.li[p]];
            }
            z[k] = acc;
        }
        let mut out = vec![0.0; self.n];
        for k in 0..self.n {
            out[self.perm[k]] = z[k];
        }
        let _ = &self.inv_perm;
        out
    }
}

/// Dense Bunch-Kaufman LDLᵀ with partial pivoting (1x1 and 2x2 pivots).
#[derive(Debug, Clone)]
pub struct DenseBk {
    n: usize,
    a: DMatrix<f64>,      // factored in place: L below, D blocks on diagonal
    ipiv: Vec<isize>,     // LAPACK-style pivot encoding
}

impl DenseBk {
    pub fn factor(mut a: DMatrix<f64>) -> Result<Self, FactorError> {
        let n = a.nrows();
        if n == 0 {
            return Err(FactorError::Empty);
        }
        let alpha = (1.0 + 17.0_f64.sqrt()) / 8.0;
        let scale = a.amax().max(f64::MIN_POSITIVE);
        let floor = scale * 1e-20;
        let mut ipiv: Vec<isize> = vec![0; n];
        let mut k = 0usize;
        while k < n {
            let mut lambda = 0.0f64;
            let mut r = k;
            for i in (k + 1)..n {
                if a[(i, k)].abs() > lambda {
                    lambda = a[(i, k)].abs();
                    r = i;
                }
            }
            let akk = a[(k, k)].abs();
            let mut use_two = false;
            let mut swap_with: Option<usize> = None;
            if !(lambda == 0.0 || akk >= alpha * lambda) {
                // magnitude of the largest off-diagonal in row/column r of the
                // trailing submatrix
                let mut sigma = 0.0f64;
                for i in k..n {
                    if i != r {
                        sigma = sigma.max(a[(i.max(r), i.min(r))].abs());
                    }
                }
                if akk * sigma >= alpha * lambda * lambda {
                    // keep the 1x1 pivot at k
                } else if a[(r, r)].abs() >= alpha * sigma {
                    swap_with = Some(r);
                } else {
                    use_two = true;
                    if r != k + 1 {
                        swap_trailing(&mut a, k, k + 1, r);
                    }
                }
            }
            if let Some(rr) = swap_with {
                if rr != k {
                    swap_trailing(&mut a, k, k, rr);
                }
            }
            if !use_two {
                let d = a[(k, k)];
                if d.abs() <= floor {
                    return Err(FactorError::SingularPivot { index: k, pivot: d });
                }
                let w: Vec<f64> = ((k + 1)..n).map(|i| a[(i, k)]).collect();
                for i in (k + 1)..n {
                    let l = w[i - k - 1] / d;
                    for j in (k + 1)..=i {
                        a[(i, j)] -= l * w[j - k - 1];
                    }
                    a[(i, k)] = l;
                }
                ipiv[k] = swap_with.unwrap_or(k) as isize;
                k += 1;
            } else {
                let d11 = a[(k, k)];
                let d21 = a[(k + 1, k)];
                let d22 = a[(k + 1, k + 1)];
                let det = d11 * d22 - d21 * d21;
                if det.abs() <= floor * floor {
                    return Err(FactorError::SingularPivot {
                        index: k,
                        pivot: det,
                    });
                }
                let w1: Vec<f64> = ((k + 2)..n).map(|i| a[(i, k)]).collect();
                let w2: Vec<f64> = ((k + 2)..n).map(|i| a[(i, k + 1)]).collect();
                for i in (k + 2)..n {
                    let b1 = w1[i - k - 2];
                    let b2 = w2[i - k - 2];
                    let l1 = (d22 * b1 - d21 * b2) / det;
                    let l2 = (d11 * b2 - d21 * b1) / det;
                    for j in (k + 2)..=i {
                        a[(i, j)] -= l1 * w1[j - k - 2] + l2 * w2[j - k - 2];
                    }
                    a[(i, k)] = l1;
                    a[(i, k + 1)] = l2;
                }
                ipiv[k] = -((r as isize) + 1);
                ipiv[k + 1] = -((r as isize) + 1);
                k += 2;
            }
        }
        Ok(DenseBk { n, a, ipiv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x = b.to_vec();
        // forward: interleave interchanges with the column eliminations
        let mut k = 0usize;
        while k < n {
            if self.ipiv[k] >= 0 {
                let r = self.ipiv[k] as usize;
                if r != k {
                    x.swap(k, r);
                }
                for i in (k + 1)..n {
                    x[i] -= self.a[(i, k)] * x[k];
                }
                k += 1;
            } else {
                let r = (-self.ipiv[k] - 1) as usize;
                if r != k + 1 {
                    x.swap(k + 1, r);
                }
                for i in (k + 2)..n {
                    x[i] -= self.a[(i, k)] * x[k] + self.a[(i, k + 1)] * x[k + 1];
                }
                k += 2;
            }
        }
        // block-diagonal solve
        k = 0;
        while k < n {
            if self.ipiv[k] >= 0 {
                x[k] /= self.a[(k, k)];
                k += 1;
            } else {
                let d11 = self.a[(k, k)];
                let d21 = self.a[(k + 1, k)];
                let d22 = self.a[(k + 1, k + 1)];
                let det = d11 * d22 - d21 * d21;
                let (b1, b2) = (x[k], x[k + 1]);
                x[k] = (d22 * b1 - d21 * b2) / det;
                x[k + 1] = (d11 * b2 - d21 * b1) / det;
                k += 2;
            }
        }
        // backward: Lᵀ then undo the interchange, in reverse block order
        let mut blocks: Vec<usize> = Vec::new();
        k = 0;
        while k < n {
            blocks.push(k);
            k += if self.ipiv[k] >= 0 { 1 } else { 2 };
        }
        for &kb in blocks.iter().rev() {
            if self.ipiv[kb] >= 0 {
                let mut acc = x[kb];
                for i in (kb + 1)..n {
                    acc -= self.a[(i, kb)] * x[i];
                }
                x[kb] = acc;
                let r = self.ipiv[kb] as usize;
                if r != kb {
                    x.swap(kb, r);
                }
            } else {
                let mut acc1 = x[kb];
                let mut acc2 = x[kb + 1];
                for i in (kb + 2)..n {
                    acc1 -= self.a[(i, kb)] * x[i];
                    acc2 -= self.a[(i, kb + 1)] * x[i];
                }
                x[kb] = acc1;
                x[kb + 1] = acc2;
                let r = (-self.ipiv[kb] - 1) as usize;
                if r != kb + 1 {
                    x.swap(kb + 1, r);
                }
            }
        }
        x
    }
}

/// Symmetric row/column interchange of `i` and `j` restricted to the trailing
/// submatrix that starts at `k0` (lower-triangle storage).
fn swap_trailing(a: &mut DMatrix<f64>, k0: usize, i: usize, j: usize) {
    let n = a.nrows();
    let (i, j) = (i.min(j), i.max(j));
    if i == j {
        return;
    }
    for c in k0..i {
        let t = a[(i, c)];
        a[(i, c)] = a[(j, c)];
        a[(j, c)] = t;
    }
    for m in (i + 1)..j {
        let t = a[(m, i)];
        a[(m, i)] = a[(j, m)];
        a[(j, m)] = t;
    }
    for r in (j + 1)..n {
        let t = a[(r, i)];
        a[(r, i)] = a[(r, j)];
        a[(r, j)] = t;
    }
    let t = a[(i, i)];
    a[(i, i)] = a[(j, j)];
    a[(j, j)] = t;
}

/// Cholesky-style SPD check: LDLᵀ succeeds with strictly positive pivots.
pub fn is_positive_definite(a: &SparseSymMatrix) -> bool {
    match Ldlt::factor(a, OrderingChoice::MinDegree, None) {
        Ok(f) => f.is_positive_definite(),
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::SymTriplets;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    fn random_spd(n: usize, seed: u64) -> SparseSymMatrix {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut t = SymTriplets::new(n);
        for i in 0..n {
            t.add(i, i, 4.0 + rng.gen_range(0.0..1.0));
            if i + 1 < n {
                t.add(i + 1, i, rng.gen_range(-1.0..1.0));
            }
            if i + 7 < n {
                t.add(i + 7, i, rng.gen_range(-0.5..0.5));
            }
        }
        t.build()
    }

    #[test]
    fn solves_spd_system() {
        let a = random_spd(200, 3);
        let f = Ldlt::factor(&a, OrderingChoice::MinDegree, None).unwrap();
        assert!(f.is_positive_definite());
        let xs: Vec<f64> = (0..200).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.matvec_alloc(&xs);
        let x = f.solve(&b);
        for (u, v) in x.iter().zip(&xs) {
            assert_relative_eq!(u, v, epsilon = 1e-9);
        }
    }

    #[test]
    fn natural_and_min_degree_agree() {
        let a = random_spd(80, 11);
        let f1 = Ldlt::factor(&a, OrderingChoice::Natural, None).unwrap();
        let f2 = Ldlt::factor(&a, OrderingChoice::MinDegree, None).unwrap();
        let b: Vec<f64> = (0..80).map(|i| (i as f64).cos()).collect();
        let x1 = f1.solve(&b);
        let x2 = f2.solve(&b);
        for (u, v) in x1.iter().zip(&x2) {
            assert_relative_eq!(u, v, epsilon = 1e-10);
        }
    }

    #[test]
    fn reports_inertia_of_indefinite_matrix() {
        // diag(1, -2, 3, -4) permuted through the pipeline
        let mut t = SymTriplets::new(4);
        for (i, v) in [1.0, -2.0, 3.0, -4.0].iter().enumerate() {
            t.add(i, i, *v);
        }
        let a = t.build();
        let f = Ldlt::factor(&a, OrderingChoice::MinDegree, None).unwrap();
        assert_eq!(f.negative_pivots, 2);
        assert!(!f.is_positive_definite());
    }

    #[test]
    fn singular_pivot_detected() {
        let mut t = SymTriplets::new(2);
        t.add(0, 0, 1.0);
        t.add(1, 0, 2.0);
        t.add(1, 1, 4.0); // second pivot exactly 0
        let a = t.build();
        match Ldlt::factor(&a, OrderingChoice::Natural, None) {
            Err(FactorError::SingularPivot { .. }) => {}
            other => panic!("expected singular pivot, got {other:?}"),
        }
    }

    #[test]
    fn saddle_system_with_guarded_ordering() {
        // [[I, Bᵀ],[B, 0]] with B = [1 1]
        let mut t = SymTriplets::new(3);
        t.add(0, 0, 1.0);
        t.add(1, 1, 1.0);
        t.add(2, 0, 1.0);
        t.add(2, 1, 1.0);
        let a = t.build();
        let guarded = vec![false, false, true];
        let f = Ldlt::factor(&a, OrderingChoice::MinDegree, Some(&guarded)).unwrap();
        assert_eq!(f.negative_pivots, 1);
        // solve [I Bᵀ; B 0] x = [1, 1, 0]: u1 + u2 = 0 and u_i = 1 − p
        // force u = 0, p = 1
        let x = f.solve(&[1.0, 1.0, 0.0]);
        assert_relative_eq!(x[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(x[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(x[2], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn dense_bk_solves_indefinite() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let n = 60;
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = rng.gen_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        // make it clearly indefinite but nonsingular
        for i in 0..n {
            a[(i, i)] += if i % 2 == 0 { 3.0 } else { -3.0 };
        }
        let xs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.11).cos()).collect();
        let b = &a * DMatrix::from_column_slice(n, 1, &xs);
        let f = DenseBk::factor(a.clone()).unwrap();
        let x = f.solve(b.as_slice());
        for (u, v) in x.iter().zip(&xs) {
            assert_relative_eq!(u, v, epsilon = 1e-8);
        }
    }
}
