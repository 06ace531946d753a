//! Minimal dense linear algebra: a row-major matrix and an LU solver.
//!
//! Everything in this crate runs at desk scale (tens of rows and columns),
//! so a dense representation with partial-pivot LU is the right tool.

use crate::error::{Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    /// Build from a slice of rows; every row must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != c {
                return Err(Error::Schema(format!(
                    "row {} has length {}, expected {}",
                    i,
                    row.len(),
                    c
                )));
            }
            data.extend_from_slice(row);
        }
        Ok(Mat { rows: r, cols: c, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    /// A * x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// A^T * y.
    pub fn transpose_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let yi = y[i];
            if yi == 0.0 {
                continue;
            }
            for (j, o) in out.iter_mut().enumerate() {
                *o += self.get(i, j) * yi;
            }
        }
        out
    }

    /// l1 norm of row i.
    pub fn row_l1(&self, i: usize) -> f64 {
        self.row(i).iter().map(|a| a.abs()).sum()
    }

    /// Max row l1 norm (the matrix infinity norm).
    pub fn inf_norm(&self) -> f64 {
        (0..self.rows).map(|i| self.row_l1(i)).fold(0.0, f64::max)
    }
}

/// LU factorization with partial pivoting of a square matrix.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

const PIVOT_EPS: f64 = 1e-11;

impl Lu {
    /// Factor a square matrix given column-by-column. Fails if singular.
    pub fn factor(n: usize, columns: &[Vec<f64>]) -> Result<Self> {
        assert_eq!(columns.len(), n);
        let mut lu = vec![0.0; n * n];
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), n);
            for i in 0..n {
                lu[i * n + j] = col[i];
            }
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            // Partial pivot: largest magnitude in column k at or below the diagonal.
            let mut p = k;
            let mut best = lu[perm[k] * n + k].abs();
            for r in k + 1..n {
                let v = lu[perm[r] * n + k].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if best <= PIVOT_EPS {
                return Err(Error::DegenerateMatrix(format!(
                    "singular at elimination step {k} (pivot {best:.3e})"
                )));
            }
            perm.swap(k, p);
            let pk = perm[k];
            let diag = lu[pk * n + k];
            for r in k + 1..n {
                let pr = perm[r];
                let m = lu[pr * n + k] / diag;
                lu[pr * n + k] = m;
                for j in k + 1..n {
                    lu[pr * n + j] -= m * lu[pk * n + j];
                }
            }
        }
        Ok(Lu { n, lu, perm })
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut v = b[self.perm[i]];
            for j in 0..i {
                v -= self.lu[self.perm[i] * n + j] * y[j];
            }
            y[i] = v;
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in i + 1..n {
                v -= self.lu[self.perm[i] * n + j] * x[j];
            }
            x[i] = v / self.lu[self.perm[i] * n + i];
        }
        x
    }

    /// Solve A^T x = b.
    pub fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        // A = P^T L U  =>  A^T = U^T L^T P. Solve U^T z = b, L^T w = z, x = P^T w.
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut v = b[i];
            for j in 0..i {
                v -= self.lu[self.perm[j] * n + i] * z[j];
            }
            z[i] = v / self.lu[self.perm[i] * n + i];
        }
        let mut w = vec![0.0; n];
        for i in (0..n).rev() {
            let mut v = z[i];
            for j in i + 1..n {
                v -= self.lu[self.perm[j] * n + i] * w[j];
            }
            w[i] = v;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = w[i];
        }
        x
    }
}

/// True when the given columns of `a` are linearly independent.
pub fn independent_columns(a: &Mat, cols: &[usize]) -> bool {
    if cols.len() > a.rows() {
        return false;
    }
    match complete_basis_inner(a, cols, &[]) {
        Completion::Dependent => false,
        Completion::Partial | Completion::Full(_) => true,
    }
}

/// Greedily extend `chosen` column indices of `a` to a full row-rank basis,
/// drawing candidates from `candidates` in order. Returns the basis column
/// indices (length = rows of `a`), or None when the chosen columns are
/// dependent or no completion exists.
pub fn complete_basis(a: &Mat, chosen: &[usize], candidates: &[usize]) -> Option<Vec<usize>> {
    match complete_basis_inner(a, chosen, candidates) {
        Completion::Full(basis) => Some(basis),
        _ => None,
    }
}

enum Completion {
    /// The chosen columns themselves are dependent.
    Dependent,
    /// Chosen columns independent but the basis could not be filled.
    Partial,
    Full(Vec<usize>),
}

fn complete_basis_inner(a: &Mat, chosen: &[usize], candidates: &[usize]) -> Completion {
    let m = a.rows();
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    // Incremental elimination; each stored vector keeps the pivot coordinate
    // chosen at insertion and is already zero at all earlier pivots.
    let mut scratch: Vec<(usize, Vec<f64>)> = Vec::with_capacity(m);
    let try_add = |basis: &mut Vec<usize>, scratch: &mut Vec<(usize, Vec<f64>)>, j: usize| -> bool {
        if basis.len() == m {
            return false;
        }
        let mut v = a.col(j);
        for (p, w) in scratch.iter() {
            let f = v[*p] / w[*p];
            if f != 0.0 {
                for (vi, wi) in v.iter_mut().zip(w.iter()) {
                    *vi -= f * wi;
                }
            }
        }
        let (pivot, norm) = v
            .iter()
            .enumerate()
            .map(|(i, x)| (i, x.abs()))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap();
        if norm > 1e-9 {
            basis.push(j);
            scratch.push((pivot, v));
            true
        } else {
            false
        }
    };
    for &j in chosen {
        if !try_add(&mut basis, &mut scratch, j) {
            return Completion::Dependent;
        }
    }
    for &j in candidates {
        if basis.len() == m {
            break;
        }
        try_add(&mut basis, &mut scratch, j);
    }
    if basis.len() == m {
        Completion::Full(basis)
    } else {
        Completion::Partial
    }
}
