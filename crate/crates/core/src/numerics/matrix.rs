use super::{Complex, LinAlgError};

/// Dense complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex::new(1.0, 0.0);
        }
        m
    }

    /// Build from row-major data; panics if the length does not match.
    pub fn from_data(rows: usize, cols: usize, data: Vec<Complex>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "data length {} does not match {}x{}",
            data.len(),
            rows,
            cols
        );
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Complex>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend_from_slice(row);
        }
        Self { rows: r, cols: c, data }
    }

    /// Column vector from a slice.
    pub fn column(v: &[Complex]) -> Self {
        Self::from_data(v.len(), 1, v.to_vec())
    }

    /// Diagonal matrix from its diagonal entries.
    pub fn diag(d: &[Complex]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &x) in d.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex] {
        &self.data
    }

    pub fn row_slice(&self, i: usize) -> &[Complex] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col_vec(&self, j: usize) -> Vec<Complex> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinAlgError> {
        if self.cols != rhs.rows {
            return Err(LinAlgError::DimensionMismatch {
                lhs_rows: self.rows,
                lhs_cols: self.cols,
                rhs_rows: rhs.rows,
                rhs_cols: rhs.cols,
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                let rrow = rhs.row_slice(k);
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(rrow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn hermitian(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    /// The matrices inverted here are at most ~8x8 regularized Gram matrices.
    pub fn inverse(&self) -> Result<ComplexMatrix, LinAlgError> {
        if self.rows != self.cols {
            return Err(LinAlgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = ComplexMatrix::identity(n);
        for col in 0..n {
            // partial pivot on magnitude
            let (pivot_row, pivot_mag) = (col..n)
                .map(|r| (r, a[(r, col)].norm()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pivot_mag < 1e-12 {
                return Err(LinAlgError::Singular {
                    pivot: pivot_mag.max(0.0),
                    col,
                });
            }
            if pivot_row != col {
                a.swap_rows(pivot_row, col);
                inv.swap_rows(pivot_row, col);
            }
            let pivot = a[(col, col)];
            for j in 0..n {
                a[(col, j)] /= pivot;
                inv[(col, j)] /= pivot;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = a[(r, col)];
                if factor.norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..n {
                    let ac = a[(col, j)];
                    let ic = inv[(col, j)];
                    a[(r, j)] -= factor * ac;
                    inv[(r, j)] -= factor * ic;
                }
            }
        }
        Ok(inv)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex) -> ComplexMatrix {
        let data = self.data.iter().map(|&z| z * s).collect();
        ComplexMatrix::from_data(self.rows, self.cols, data)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinAlgError> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(LinAlgError::DimensionMismatch {
                lhs_rows: self.rows,
                lhs_cols: self.cols,
                rhs_rows: rhs.rows,
                rhs_cols: rhs.cols,
            });
        }
        let data = self
            .data
            .iter()
            .zip(&rhs.data)
            .map(|(&a, &b)| a + b)
            .collect();
        Ok(ComplexMatrix::from_data(self.rows, self.cols, data))
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix, LinAlgError> {
        self.add(&rhs.scale(Complex::new(-1.0, 0.0)))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex;
    fn index(&self, (i, j): (usize, usize)) -> &Complex {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product of two vectors: entry (i*len(b)+j) = a[i]*b[j].
pub fn kron_vec(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &x in a {
        for &y in b {
            out.push(x * y);
        }
    }
    out
}
