use super::scalar::{Field, Scalar};

/// A dense matrix over the base field, with the exact linear algebra the
/// higher layers lean on: echelon forms, rank, kernels, solving and
/// inverses. Row-major storage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KMat {
    pub field: Field,
    rows: usize,
    cols: usize,
    entries: Vec<Scalar>,
}

impl KMat {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        KMat { field, rows, cols, entries: vec![field.zero(); rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        KMat { field, rows: r, cols: c, entries: rows.into_concat() }
    }

    pub fn from_columns(field: Field, rows: usize, cols: Vec<Vec<Scalar>>) -> Self {
        let c = cols.len();
        assert!(cols.iter().all(|col| col.len() == rows), "ragged columns");
        let mut m = Self::zeros(field, rows, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    pub fn from_int_rows(field: Field, rows: &[&[i64]]) -> Self {
        Self::from_rows(
            field,
            rows.iter().map(|r| r.iter().map(|v| field.from_i64(*v)).collect()).collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &Scalar {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Scalar) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let f = self.field;
        let mut out = Self::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for t in 0..self.cols {
                let a = self.at(i, t);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = f.mul(a, other.at(t, j));
                    let cur = f.add(out.at(i, j), &prod);
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[Scalar]) -> Vec<Scalar> {
        assert_eq!(self.cols, v.len());
        let f = self.field;
        (0..self.rows)
            .map(|i| {
                let mut acc = f.zero();
                for t in 0..self.cols {
                    if !self.at(i, t).is_zero() && !v[t].is_zero() {
                        acc = f.add(&acc, &f.mul(self.at(i, t), &v[t]));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let f = self.field;
        let mut out = self.clone();
        for i in 0..self.rows * self.cols {
            out.entries[i] = f.add(&out.entries[i], &other.entries[i]);
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let f = self.field;
        KMat {
            field: f,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| f.mul(e, c)).collect(),
        }
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        let mut m = Self::zeros(self.field, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.at(i, j).clone());
            }
            for j in 0..other.cols {
                m.set(i, self.cols + j, other.at(i, j).clone());
            }
        }
        m
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut m = Self::zeros(self.field, self.rows + other.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.at(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..self.cols {
                m.set(self.rows + i, j, other.at(i, j).clone());
            }
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.field, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.at(i, j).clone());
            }
        }
        m
    }

    /// Kronecker product with index `(i1 * r2 + i2, j1 * c2 + j2)`.
    pub fn kronecker(&self, other: &Self) -> Self {
        let f = self.field;
        let mut m = Self::zeros(f, self.rows * other.rows, self.cols * other.cols);
        for i1 in 0..self.rows {
            for j1 in 0..self.cols {
                let a = self.at(i1, j1);
                if a.is_zero() {
                    continue;
                }
                for i2 in 0..other.rows {
                    for j2 in 0..other.cols {
                        m.set(
                            i1 * other.rows + i2,
                            j1 * other.cols + j2,
                            f.mul(a, other.at(i2, j2)),
                        );
                    }
                }
            }
        }
        m
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let f = self.field;
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(pr) = (row..self.rows).find(|r| !self.at(*r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, pr);
            let inv = f.inv(self.at(row, col)).unwrap();
            for j in col..self.cols {
                let v = f.mul(self.at(row, j), &inv);
                self.set(row, j, v);
            }
            for r in 0..self.rows {
                if r != row && !self.at(r, col).is_zero() {
                    let factor = self.at(r, col).clone();
                    for j in col..self.cols {
                        let v = f.sub(self.at(r, j), &f.mul(&factor, self.at(row, j)));
                        self.set(r, j, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right kernel.
    pub fn kernel_basis(&self) -> Vec<Vec<Scalar>> {
        let f = self.field;
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set.contains(&free) {
                continue;
            }
            let mut v = vec![f.zero(); self.cols];
            v[free] = f.one();
            for (r, pc) in pivots.iter().enumerate() {
                v[*pc] = f.neg(m.at(r, free));
            }
            basis.push(v);
        }
        basis
    }

    /// One solution of `self * x = b`, if any.
    pub fn solve(&self, b: &[Scalar]) -> Option<Vec<Scalar>> {
        assert_eq!(b.len(), self.rows);
        let f = self.field;
        let rhs = KMat::from_columns(f, self.rows, vec![b.to_vec()]);
        let mut aug = self.hstack(&rhs);
        let pivots = aug.rref();
        if pivots.last().is_some_and(|p| *p == self.cols) {
            return None; // pivot in the constants column
        }
        let mut x = vec![f.zero(); self.cols];
        for (r, pc) in pivots.iter().enumerate() {
            x[*pc] = aug.at(r, self.cols).clone();
        }
        Some(x)
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let mut aug = self.hstack(&Self::identity(self.field, n));
        let pivots = aug.rref();
        if pivots.len() != n {
            return None;
        }
        let mut inv = Self::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                inv.set(i, j, aug.at(i, n + j).clone());
            }
        }
        Some(inv)
    }

    pub fn det(&self) -> Scalar {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let f = self.field;
        let n = self.rows;
        let mut m = self.clone();
        let mut det = f.one();
        for col in 0..n {
            let Some(pr) = (col..n).find(|r| !m.at(*r, col).is_zero()) else {
                return f.zero();
            };
            if pr != col {
                m.swap_rows(col, pr);
                det = f.neg(&det);
            }
            det = f.mul(&det, m.at(col, col));
            let inv = f.inv(m.at(col, col)).unwrap();
            for r in col + 1..n {
                if m.at(r, col).is_zero() {
                    continue;
                }
                let factor = f.mul(m.at(r, col), &inv);
                for j in col..n {
                    let v = f.sub(m.at(r, j), &f.mul(&factor, m.at(col, j)));
                    m.set(r, j, v);
                }
            }
        }
        det
    }

    /// Dimension of the intersection of the column span with the coordinate
    /// subspace spanned by `coords`.
    pub fn column_span_meet_coords(&self, coords: &[usize]) -> usize {
        // dim(S ∩ C) = dim S + dim C - dim(S + C)
        let f = self.field;
        let mut coord_mat = Self::zeros(f, self.rows, coords.len());
        for (j, c) in coords.iter().enumerate() {
            coord_mat.set(*c, j, f.one());
        }
        let s = self.rank();
        let joint = self.hstack(&coord_mat).rank();
        s + coords.len() - joint
    }
}

trait Concat {
    fn into_concat(self) -> Vec<Scalar>;
}

impl Concat for Vec<Vec<Scalar>> {
    fn into_concat(self) -> Vec<Scalar> {
        self.into_iter().flatten().collect()
    }
}
