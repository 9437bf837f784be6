use rand::Rng;

use super::{Fe, Field};
use crate::error::{Error, Result};

/// A row vector over a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeVec {
    field: Field,
    data: Vec<Fe>,
}

impl FeVec {
    pub fn new(field: &Field, data: Vec<Fe>) -> Result<Self> {
        if let Some(bad) = data.iter().find(|x| x.0 >= field.order()) {
            return Err(Error::usage(format!("{bad} is not an element of GF({})", field.order())));
        }
        Ok(FeVec {
            field: field.clone(),
            data,
        })
    }

    pub fn from_values(field: &Field, values: &[u32]) -> Result<Self> {
        FeVec::new(field, values.iter().map(|&v| Fe(v)).collect())
    }

    pub fn zeros(field: &Field, len: usize) -> Self {
        FeVec {
            field: field.clone(),
            data: vec![Fe::ZERO; len],
        }
    }

    pub(crate) fn from_raw(field: &Field, data: Vec<Fe>) -> Self {
        debug_assert!(data.iter().all(|x| x.0 < field.order()));
        FeVec {
            field: field.clone(),
            data,
        }
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[Fe] {
        &self.data
    }

    pub fn into_inner(self) -> Vec<Fe> {
        self.data
    }

    pub fn values(&self) -> Vec<u32> {
        self.data.iter().map(|x| x.0).collect()
    }

    fn check_compatible(&self, other: &FeVec) -> Result<()> {
        if self.field != other.field {
            return Err(Error::usage(format!(
                "field mismatch: {:?} vs {:?}",
                self.field, other.field
            )));
        }
        if self.len() != other.len() {
            return Err(Error::usage(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// Symbol-wise sum.
    pub fn add(&self, other: &FeVec) -> Result<FeVec> {
        self.check_compatible(other)?;
        let f = &self.field;
        Ok(FeVec::from_raw(
            f,
            self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect(),
        ))
    }

    /// Symbol-wise difference.
    pub fn sub(&self, other: &FeVec) -> Result<FeVec> {
        self.check_compatible(other)?;
        let f = &self.field;
        Ok(FeVec::from_raw(
            f,
            self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect(),
        ))
    }

    /// Vector-matrix product `self ⊙ g`.
    pub fn mul_mat(&self, g: &FeMatrix) -> Result<FeVec> {
        if self.field != g.field {
            return Err(Error::usage("field mismatch in vector-matrix product"));
        }
        if self.len() != g.rows {
            return Err(Error::usage(format!(
                "vector of length {} cannot multiply a {}x{} matrix",
                self.len(),
                g.rows,
                g.cols
            )));
        }
        let f = &self.field;
        let mut out = vec![Fe::ZERO; g.cols];
        for (i, &u) in self.data.iter().enumerate() {
            if u.is_zero() {
                continue;
            }
            for (o, &gij) in out.iter_mut().zip(g.row(i)) {
                *o = f.add(*o, f.mul(u, gij));
            }
        }
        Ok(FeVec::from_raw(f, out))
    }
}

/// A dense row-major matrix over a field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeMatrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

/// Outcome of [`FeMatrix::solve`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Solution {
    Unique(FeVec),
    Inconsistent,
    Underdetermined,
}

impl FeMatrix {
    pub fn new(field: &Field, rows: usize, cols: usize, data: Vec<Fe>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::usage(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|x| x.0 >= field.order()) {
            return Err(Error::usage(format!("{bad} is not an element of GF({})", field.order())));
        }
        Ok(FeMatrix {
            field: field.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn from_rows(field: &Field, rows: &[Vec<u32>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::usage("ragged matrix rows"));
        }
        let data = rows.iter().flatten().map(|&v| Fe(v)).collect();
        FeMatrix::new(field, rows.len(), cols, data)
    }

    pub fn zeros(field: &Field, rows: usize, cols: usize) -> Self {
        FeMatrix {
            field: field.clone(),
            rows,
            cols,
            data: vec![Fe::ZERO; rows * cols],
        }
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        let mut m = FeMatrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        assert!(v.0 < self.field.order());
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    /// Multiplies row `r` by `s`.
    pub fn scale_row(&mut self, r: usize, s: Fe) {
        let f = self.field.clone();
        for x in &mut self.data[r * self.cols..(r + 1) * self.cols] {
            *x = f.mul(*x, s);
        }
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    /// Only the first `limit_cols` columns are used as pivots.
    fn rref(&mut self, limit_cols: usize) -> Vec<usize> {
        let f = self.field.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..limit_cols {
            if row == self.rows {
                break;
            }
            let Some(p) = (row..self.rows).find(|&r| !self.get(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = f.inv(self.get(row, col)).expect("pivot is nonzero");
            self.scale_row(row, inv);
            for r in 0..self.rows {
                if r == row {
                    continue;
                }
                let factor = self.get(r, col);
                if factor.is_zero() {
                    continue;
                }
                for c in 0..self.cols {
                    let v = f.sub(self.get(r, c), f.mul(factor, self.get(row, c)));
                    self.data[r * self.cols + c] = v;
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    /// Row rank over the field.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        let cols = m.cols;
        m.rref(cols).len()
    }

    /// Solves `self · x = b` for a column unknown `x` by Gaussian
    /// elimination.
    pub fn solve(&self, b: &FeVec) -> Result<Solution> {
        if self.field != *b.field() {
            return Err(Error::usage("field mismatch in linear solve"));
        }
        if b.len() != self.rows {
            return Err(Error::usage(format!(
                "right-hand side of length {} for a system with {} equations",
                b.len(),
                self.rows
            )));
        }
        let n = self.cols;
        let mut aug = FeMatrix::zeros(&self.field, self.rows, n + 1);
        for r in 0..self.rows {
            for c in 0..n {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, n, b.as_slice()[r]);
        }
        let pivots = aug.rref(n);
        let rank = pivots.len();
        if (rank..self.rows).any(|r| !aug.get(r, n).is_zero()) {
            return Ok(Solution::Inconsistent);
        }
        if rank < n {
            return Ok(Solution::Underdetermined);
        }
        let x = (0..n).map(|r| aug.get(r, n)).collect();
        Ok(Solution::Unique(FeVec::from_raw(&self.field, x)))
    }
}

/// Matrix with i.i.d. uniform entries.
pub fn random_matrix<R: Rng + ?Sized>(field: &Field, rows: usize, cols: usize, rng: &mut R) -> FeMatrix {
    let q = field.order();
    let data = (0..rows * cols).map(|_| Fe(rng.random_range(0..q))).collect();
    FeMatrix {
        field: field.clone(),
        rows,
        cols,
        data,
    }
}

/// Vector with i.i.d. uniform entries.
pub fn random_vec<R: Rng + ?Sized>(field: &Field, len: usize, rng: &mut R) -> FeVec {
    let q = field.order();
    FeVec::from_raw(field, (0..len).map(|_| Fe(rng.random_range(0..q))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    fn gf(q: u32) -> Field {
        Field::gf(q).unwrap()
    }

    #[test]
    fn vector_matrix_products() {
        let f = gf(2);
        let id = FeMatrix::identity(&f, 2);
        let u = FeVec::from_values(&f, &[1, 0]).unwrap();
        assert_eq!(u.mul_mat(&id).unwrap(), u);

        let g = FeMatrix::from_rows(&f, &[vec![1, 0, 1], vec![0, 1, 1]]).unwrap();
        let u = FeVec::from_values(&f, &[1, 1]).unwrap();
        assert_eq!(u.mul_mat(&g).unwrap().values(), vec![1, 1, 0]);

        let z = FeVec::zeros(&f, 2);
        assert_eq!(z.mul_mat(&g).unwrap(), FeVec::zeros(&f, 3));
    }

    #[test]
    fn dimension_and_field_mismatch_are_usage_errors() {
        let f = gf(2);
        let g = FeMatrix::identity(&f, 3);
        let u = FeVec::zeros(&f, 2);
        assert!(matches!(u.mul_mat(&g), Err(Error::Usage(_))));
        let v = FeVec::zeros(&gf(3), 2);
        assert!(matches!(u.add(&v), Err(Error::Usage(_))));
    }

    #[test]
    fn solve_examples() {
        let f = gf(2);
        let id = FeMatrix::identity(&f, 3);
        let b = FeVec::from_values(&f, &[1, 0, 1]).unwrap();
        assert_eq!(id.solve(&b).unwrap(), Solution::Unique(b.clone()));

        // x0 + x1 = 0, x1 = 1  =>  (1, 1)
        let a = FeMatrix::from_rows(&f, &[vec![1, 1], vec![0, 1]]).unwrap();
        let b = FeVec::from_values(&f, &[0, 1]).unwrap();
        assert_eq!(
            a.solve(&b).unwrap(),
            Solution::Unique(FeVec::from_values(&f, &[1, 1]).unwrap())
        );

        let zero = FeMatrix::zeros(&f, 2, 2);
        let b = FeVec::from_values(&f, &[1, 0]).unwrap();
        assert_eq!(zero.solve(&b).unwrap(), Solution::Inconsistent);
        assert_eq!(zero.solve(&FeVec::zeros(&f, 2)).unwrap(), Solution::Underdetermined);
    }

    #[test]
    fn rank_examples() {
        let f = gf(2);
        assert_eq!(FeMatrix::identity(&f, 4).rank(), 4);
        assert_eq!(FeMatrix::zeros(&f, 3, 5).rank(), 0);
        assert_eq!(FeMatrix::from_rows(&f, &[vec![1, 1], vec![1, 1]]).unwrap().rank(), 1);
    }

    #[test]
    fn random_matrix_is_deterministic() {
        let f = gf(4);
        let s = Stream::new(11);
        let a = random_matrix(&f, 5, 7, &mut s.rng());
        let b = random_matrix(&f, 5, 7, &mut s.rng());
        assert_eq!(a, b);
        let e = random_matrix(&f, 0, 0, &mut s.rng());
        assert_eq!((e.rows(), e.cols()), (0, 0));
    }

    #[test]
    fn random_symbols_are_uniform() {
        // multinomial check: each count within 4 sigma of n/F
        let f = gf(5);
        let n = 100_000usize;
        let v = random_vec(&f, n, &mut Stream::new(3).rng());
        let mut counts = [0usize; 5];
        for x in v.as_slice() {
            counts[x.value() as usize] += 1;
        }
        let p = 0.2;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 * p).abs() < 4.0 * sigma, "{counts:?}");
        }
    }
}
