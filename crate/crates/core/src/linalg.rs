//! Small sparse-matrix toolbox: triplet accumulation, CSR matvec, and a
//! Jacobi-preconditioned conjugate gradient solver. Enough for the desk-scale
//! eigenproblems handled here; dense work goes through nalgebra.

use nalgebra::{DMatrix, DVector};

/// Triplet (coordinate) accumulator. Duplicate entries are summed on
/// conversion to CSR, so element-loop assembly can push freely.
#[derive(Debug, Clone)]
pub struct Triplets {
    pub nrows: usize,
    pub ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.nrows && j < self.ncols);
        self.entries.push((i, j, v));
    }

    pub fn to_csr(&self) -> Csr {
        let mut sorted = self.entries.clone();
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut col_idx: Vec<usize> = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut rows: Vec<usize> = Vec::with_capacity(sorted.len());
        for &(i, j, v) in &sorted {
            if rows.last() == Some(&i) && col_idx.last() == Some(&j) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(i);
                col_idx.push(j);
                values.push(v);
            }
        }
        let mut row_ptr = vec![0usize; self.nrows + 1];
        for &i in &rows {
            row_ptr[i + 1] += 1;
        }
        for i in 0..self.nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        Csr {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    pub fn identity(n: usize) -> Self {
        Csr {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_diag(d: &DVector<f64>) -> Self {
        let n = d.len();
        Csr {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: d.iter().copied().collect(),
        }
    }

    /// Column indices and values of row i.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.col_idx[r.clone()], &self.values[r])
    }

    pub fn mul_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        let mut y = DVector::zeros(self.nrows);
        for i in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        y
    }

    /// y = A^T x
    pub fn mul_transpose_vec(&self, x: &DVector<f64>) -> DVector<f64> {
        debug_assert_eq!(x.len(), self.nrows);
        let mut y = DVector::zeros(self.ncols);
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * x[i];
            }
        }
        y
    }

    pub fn diag(&self) -> DVector<f64> {
        let mut d = DVector::zeros(self.nrows.min(self.ncols));
        for i in 0..d.len() {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] += self.values[k];
                }
            }
        }
        d
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[k])] += self.values[k];
            }
        }
        m
    }

    /// self + alpha * other (patterns may differ).
    pub fn add_scaled(&self, other: &Csr, alpha: f64) -> Csr {
        let mut t = Triplets::new(self.nrows, self.ncols);
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                t.push(i, self.col_idx[k], self.values[k]);
            }
        }
        for i in 0..other.nrows {
            for k in other.row_ptr[i]..other.row_ptr[i + 1] {
                t.push(i, other.col_idx[k], alpha * other.values[k]);
            }
        }
        t.to_csr()
    }

    pub fn max_abs_asymmetry(&self) -> f64 {
        let d = self.to_dense();
        let mut worst = 0.0f64;
        for i in 0..d.nrows() {
            for j in (i + 1)..d.ncols() {
                worst = worst.max((d[(i, j)] - d[(j, i)]).abs());
            }
        }
        worst
    }
}

/// Jacobi-preconditioned CG for SPD systems. Returns the solution and the
/// achieved relative residual.
pub fn pcg(
    a: &Csr,
    b: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> (DVector<f64>, f64) {
    let n = b.len();
    let diag = a.diag();
    let minv = diag.map(|d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 });
    let bnorm = b.norm().max(f64::MIN_POSITIVE);
    let mut x = DVector::zeros(n);
    let mut r = b.clone();
    let mut z = r.component_mul(&minv);
    let mut p = z.clone();
    let mut rz = r.dot(&z);
    let mut rel = r.norm() / bnorm;
    for _ in 0..max_iter {
        if rel < tol {
            break;
        }
        let ap = a.mul_vec(&p);
        let alpha = rz / p.dot(&ap);
        x += alpha * &p;
        r -= alpha * &ap;
        rel = r.norm() / bnorm;
        z = r.component_mul(&minv);
        let rz_new = r.dot(&z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = &z + beta * &p;
    }
    (x, rel)
}

/// Gram-Schmidt a set of vectors against a symmetric positive inner product
/// given by `dot`. Vectors that collapse below `tol` are dropped.
pub fn orthonormalize_by<F>(vecs: &mut Vec<DVector<f64>>, dot: F, tol: f64)
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64,
{
    let mut out: Vec<DVector<f64>> = Vec::new();
    for v in vecs.drain(..) {
        let mut w = v;
        for _ in 0..2 {
            for u in &out {
                let c = dot(u, &w);
                w -= c * u;
            }
        }
        let n = dot(&w, &w).sqrt();
        if n > tol {
            out.push(w / n);
        }
    }
    *vecs = out;
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplets_merge_duplicates() {
        let mut t = Triplets::new(3, 3);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.0);
        t.push(2, 1, 5.0);
        t.push(1, 2, -1.0);
        let a = t.to_csr();
        let d = a.to_dense();
        assert_eq!(d[(0, 0)], 3.0);
        assert_eq!(d[(2, 1)], 5.0);
        assert_eq!(d[(1, 2)], -1.0);
        assert_eq!(d[(1, 1)], 0.0);
    }

    #[test]
    fn csr_matvec_matches_dense() {
        let mut t = Triplets::new(4, 4);
        for i in 0..4 {
            t.push(i, i, 4.0);
            if i + 1 < 4 {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        let a = t.to_csr();
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0, 4.0]);
        let y = a.mul_vec(&x);
        let yd = a.to_dense() * &x;
        assert!((y - yd).norm() < 1e-14);
    }

    #[test]
    fn pcg_solves_spd() {
        let mut t = Triplets::new(50, 50);
        for i in 0..50 {
            t.push(i, i, 3.0);
            if i + 1 < 50 {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        let a = t.to_csr();
        let b = DVector::from_element(50, 1.0);
        let (x, rel) = pcg(&a, &b, 1e-13, 500);
        assert!(rel < 1e-13);
        assert!((a.mul_vec(&x) - b).norm() < 1e-11);
    }
}
