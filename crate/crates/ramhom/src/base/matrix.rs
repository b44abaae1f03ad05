use super::{BaseError, BaseRing, Rat, Scalar};
use num::{One, Zero};
use std::fmt;

/// Dense matrix over one of the base rings, row-major.
///
/// Degreewise pieces of graded maps are tiny (at most a few hundred rows),
/// so exact dense arithmetic is the right trade-off.
#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    pub ring: BaseRing,
    pub rows: usize,
    pub cols: usize,
    data: Vec<Rat>,
}

impl Matrix {
    pub fn zero(ring: BaseRing, rows: usize, cols: usize) -> Self {
        Matrix {
            ring,
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(ring: BaseRing, n: usize) -> Self {
        let mut m = Matrix::zero(ring, n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_rows(ring: BaseRing, rows: Vec<Vec<Rat>>) -> Result<Self, BaseError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in &rows {
            if row.len() != c {
                return Err(BaseError::Shape(format!(
                    "ragged rows: {} vs {}",
                    row.len(),
                    c
                )));
            }
            for v in row {
                if !ring.contains(v) {
                    return Err(BaseError::NotInRing(v.to_string(), ring));
                }
                data.push(ring.normalize(v.clone()));
            }
        }
        Ok(Matrix {
            ring,
            rows: r,
            cols: c,
            data,
        })
    }

    pub fn from_i64_rows(ring: BaseRing, rows: &[&[i64]]) -> Self {
        let rows = rows
            .iter()
            .map(|r| r.iter().map(|&n| super::rat(n)).collect())
            .collect();
        Matrix::from_rows(ring, rows).expect("integer rows are in every base ring")
    }

    /// Builds a matrix from ring-tagged scalars, rejecting mixed rings.
    pub fn from_scalars(rows: Vec<Vec<Scalar>>) -> Result<Self, BaseError> {
        let mut ring = None;
        for row in &rows {
            for s in row {
                match ring {
                    None => ring = Some(s.ring),
                    Some(r) if r != s.ring => return Err(BaseError::MixedRings(r, s.ring)),
                    _ => {}
                }
            }
        }
        let ring = ring.ok_or_else(|| BaseError::Shape("empty scalar matrix".into()))?;
        Matrix::from_rows(
            ring,
            rows.into_iter()
                .map(|row| row.into_iter().map(|s| s.value).collect())
                .collect(),
        )
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = self.ring.normalize(v);
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn from_columns(ring: BaseRing, rows: usize, cols: Vec<Vec<Rat>>) -> Self {
        let ncols = cols.len();
        let mut m = Matrix::zero(ring, rows, ncols);
        for (j, col) in cols.into_iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, v) in col.into_iter().enumerate() {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.ring, other.ring, "ring mismatch in matrix product");
        assert_eq!(self.cols, other.rows, "shape mismatch in matrix product");
        let mut out = Matrix::zero(self.ring, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j) + a * b;
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = Rat::zero();
                for j in 0..self.cols {
                    acc += self.get(i, j) * &v[j];
                }
                self.ring.normalize(acc)
            })
            .collect()
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j) + other.get(i, j));
            }
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Matrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = out.ring.normalize(std::mem::take(v) * c);
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.ring, other.ring);
        let mut out = Matrix::zero(self.ring, self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
            for j in 0..other.cols {
                out.set(i, self.cols + j, other.get(i, j).clone());
            }
        }
        out
    }

    /// Vertical concatenation.
    pub fn vstack(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols);
        assert_eq!(self.ring, other.ring);
        let mut out = Matrix::zero(self.ring, self.rows + other.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(i, j, self.get(i, j).clone());
            }
        }
        for i in 0..other.rows {
            for j in 0..self.cols {
                out.set(self.rows + i, j, other.get(i, j).clone());
            }
        }
        out
    }

    pub fn block_diag(ring: BaseRing, blocks: &[&Matrix]) -> Matrix {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut out = Matrix::zero(ring, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            assert_eq!(b.ring, ring);
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.set(r0 + i, c0 + j, b.get(i, j).clone());
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    pub fn transpose(&self) -> Matrix {
        let mut out = Matrix::zero(self.ring, self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j).clone());
            }
        }
        out
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[a] += c * row[b]
    pub(crate) fn row_axpy(&mut self, a: usize, b: usize, c: &Rat) {
        for j in 0..self.cols {
            let v = self.get(a, j) + c * self.get(b, j);
            self.set(a, j, v);
        }
    }

    /// col[a] += c * col[b]
    pub(crate) fn col_axpy(&mut self, a: usize, b: usize, c: &Rat) {
        for i in 0..self.rows {
            let v = self.get(i, a) + c * self.get(i, b);
            self.set(i, a, v);
        }
    }

    pub(crate) fn scale_row(&mut self, a: usize, c: &Rat) {
        for j in 0..self.cols {
            let v = self.get(a, j) * c;
            self.set(a, j, v);
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} over {}", self.rows, self.cols, self.ring)?;
        for i in 0..self.rows {
            write!(f, "  [")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}
