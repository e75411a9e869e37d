use super::poly::{Ring, RingElem};
use super::scalar::Scalar;
use crate::error::{Error, Result};
use std::fmt;

/// A dense matrix over one of the coordinate rings. All entries share the
/// declared ring.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMat {
    pub ring: Ring,
    rows: usize,
    cols: usize,
    entries: Vec<RingElem>,
}

impl RingMat {
    pub fn zeros(ring: Ring, rows: usize, cols: usize) -> Self {
        RingMat { ring, rows, cols, entries: vec![RingElem::zero(ring); rows * cols] }
    }

    pub fn identity(ring: Ring, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            *m.at_mut(i, i) = RingElem::one(ring);
        }
        m
    }

    pub fn from_fn(
        ring: Ring,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> RingElem,
    ) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let e = f(i, j);
                assert_eq!(e.ring, ring, "entry ring mismatch");
                entries.push(e);
            }
        }
        RingMat { ring, rows, cols, entries }
    }

    pub fn from_rows(ring: Ring, rows: Vec<Vec<RingElem>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self::from_fn(ring, r, c, |i, j| rows[i][j].clone())
    }

    /// Dense integer constructor, handy in tests.
    pub fn from_int_rows(ring: Ring, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(ring, r, c, |i, j| {
            RingElem::constant(ring, ring.field.from_i64(rows[i][j]))
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, i: usize, j: usize) -> &RingElem {
        &self.entries[i * self.cols + j]
    }

    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut RingElem {
        &mut self.entries[i * self.cols + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn column(&self, j: usize) -> Vec<RingElem> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn from_columns(ring: Ring, rows: usize, cols: Vec<Vec<RingElem>>) -> Self {
        let c = cols.len();
        assert!(cols.iter().all(|col| col.len() == rows), "ragged columns");
        Self::from_fn(ring, rows, c, |i, j| cols[j][i].clone())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.ring, self.cols, self.rows, |i, j| self.at(j, i).clone())
    }

    pub fn map(&self, f: impl Fn(&RingElem) -> RingElem) -> Self {
        let ring = f(&RingElem::zero(self.ring)).ring;
        RingMat {
            ring,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self::from_fn(self.ring, self.rows, self.cols, |i, j| self.at(i, j).add(other.at(i, j)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Self::from_fn(self.ring, self.rows, self.cols, |i, j| self.at(i, j).sub(other.at(i, j)))
    }

    pub fn neg(&self) -> Self {
        self.map(|e| e.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "shape mismatch in product");
        assert_eq!(self.ring, other.ring, "ring mismatch in product");
        Self::from_fn(self.ring, self.rows, other.cols, |i, j| {
            let mut acc = RingElem::zero(self.ring);
            for t in 0..self.cols {
                acc = acc.add(&self.at(i, t).mul(other.at(t, j)));
            }
            acc
        })
    }

    pub fn mul_vec(&self, v: &[RingElem]) -> Vec<RingElem> {
        assert_eq!(self.cols, v.len(), "shape mismatch in matrix-vector product");
        (0..self.rows)
            .map(|i| {
                let mut acc = RingElem::zero(self.ring);
                for t in 0..self.cols {
                    acc = acc.add(&self.at(i, t).mul(&v[t]));
                }
                acc
            })
            .collect()
    }

    pub fn scale(&self, c: &RingElem) -> Self {
        self.map(|e| e.mul(c))
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows, "row mismatch in hstack");
        Self::from_fn(self.ring, self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols { self.at(i, j).clone() } else { other.at(i, j - self.cols).clone() }
        })
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "column mismatch in vstack");
        Self::from_fn(self.ring, self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows { self.at(i, j).clone() } else { other.at(i - self.rows, j).clone() }
        })
    }

    /// Block diagonal sum.
    pub fn block_diag(&self, other: &Self) -> Self {
        Self::from_fn(self.ring, self.rows + other.rows, self.cols + other.cols, |i, j| {
            if i < self.rows && j < self.cols {
                self.at(i, j).clone()
            } else if i >= self.rows && j >= self.cols {
                other.at(i - self.rows, j - self.cols).clone()
            } else {
                RingElem::zero(self.ring)
            }
        })
    }

    /// Kronecker product with row/column index `(i1 * r2 + i2, j1 * c2 + j2)`.
    pub fn kronecker(&self, other: &Self) -> Self {
        Self::from_fn(self.ring, self.rows * other.rows, self.cols * other.cols, |i, j| {
            let (i1, i2) = (i / other.rows, i % other.rows);
            let (j1, j2) = (j / other.cols, j % other.cols);
            self.at(i1, j1).mul(other.at(i2, j2))
        })
    }

    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        Self::from_fn(self.ring, row_idx.len(), col_idx.len(), |i, j| {
            self.at(row_idx[i], col_idx[j]).clone()
        })
    }

    /// Reinterprets every entry in `ring`; exponents are preserved.
    pub fn cast(&self, ring: Ring) -> Self {
        RingMat {
            ring,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.cast(ring)).collect(),
        }
    }

    /// Entry-wise `var -> var^-1` substitution into the Laurent ring.
    pub fn substitute_inverse(&self, laurent: Ring) -> Self {
        RingMat {
            ring: laurent,
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.substitute_inverse(laurent)).collect(),
        }
    }

    /// Largest absolute exponent over all entries.
    pub fn max_degree_span(&self) -> i64 {
        self.entries.iter().map(|e| e.degree_span()).max().unwrap_or(0)
    }

    /// Determinant by cofactor expansion; intended for the small matrices
    /// appearing in unimodularity checks and test oracles.
    pub fn det(&self) -> Result<RingElem> {
        if self.rows != self.cols {
            return Err(Error::ShapeMismatch("determinant of a non-square matrix".into()));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(RingElem::one(self.ring));
        }
        if n == 1 {
            return Ok(self.at(0, 0).clone());
        }
        let mut acc = RingElem::zero(self.ring);
        let rest_rows: Vec<usize> = (1..n).collect();
        for j in 0..n {
            if self.at(0, j).is_zero() {
                continue;
            }
            let cols: Vec<usize> = (0..n).filter(|c| *c != j).collect();
            let minor = self.submatrix(&rest_rows, &cols).det()?;
            let term = self.at(0, j).mul(&minor);
            acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        Ok(acc)
    }

    /// Scalar constant matrix from field elements.
    pub fn from_scalars(ring: Ring, rows: usize, cols: usize, vals: &[Scalar]) -> Self {
        assert_eq!(vals.len(), rows * cols);
        Self::from_fn(ring, rows, cols, |i, j| {
            RingElem::constant(ring, vals[i * cols + j].clone())
        })
    }
}

impl fmt::Display for RingMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactlinear::Field;

    #[test]
    fn product_and_det() {
        let r = Ring::poly_u(Field::Rationals);
        let x = RingElem::variable(r);
        let m = RingMat::from_rows(
            r,
            vec![
                vec![x.clone(), RingElem::one(r)],
                vec![RingElem::zero(r), x.clone()],
            ],
        );
        let sq = m.mul(&m);
        assert_eq!(*sq.at(0, 0), x.pow(2));
        assert_eq!(m.det().unwrap(), x.pow(2));
    }

    #[test]
    fn kronecker_shape() {
        let r = Ring::poly_u(Field::Prime(5));
        let a = RingMat::identity(r, 2);
        let b = RingMat::zeros(r, 3, 1);
        let k = a.kronecker(&b);
        assert_eq!((k.rows(), k.cols()), (6, 2));
    }
}
