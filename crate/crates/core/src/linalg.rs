//! Exact dense linear algebra and the subspace lattice.
//!
//! Over the rationals, row reduction clears denominators and runs Bareiss
//! fraction-free elimination on integers; other fields use Gauss–Jordan.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde_json::Value;

use crate::scalars::{Coeff, Field, Rat, RatFunc, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("bilinear form is not symmetric")]
    NotSymmetric,
}

/// Fields with a reduced-row-echelon routine.
pub trait Eliminate: Field {
    /// Reduce `rows` in place to RREF (zero rows dropped); returns pivot columns.
    fn rref_rows(rows: &mut Vec<Vec<Self>>) -> Vec<usize> {
        gauss_jordan(rows)
    }
}

impl Eliminate for RatFunc {}
impl Eliminate for Scalar {}

impl Eliminate for Rat {
    fn rref_rows(rows: &mut Vec<Vec<Self>>) -> Vec<usize> {
        bareiss_rref(rows)
    }
}

fn gauss_jordan<F: Field>(rows: &mut Vec<Vec<F>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].inv().expect("nonzero pivot");
        for v in rows[r].iter_mut().skip(c) {
            *v = v.times(&inv);
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for (j, v) in row.iter_mut().enumerate().skip(c) {
                if !pivot_row[j].is_zero() {
                    *v = v.minus(&f.times(&pivot_row[j]));
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

fn bareiss_rref(rows: &mut Vec<Vec<Rat>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
            row.iter().map(|c| (c * Rat::from_integer(l.clone())).to_integer()).collect()
        })
        .filter(|row: &Vec<BigInt>| row.iter().any(|c| !c.is_zero()))
        .collect();
    let mut pivots = Vec::new();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..ncols {
        if r == m.len() {
            break;
        }
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let (top, rest) = m.split_at_mut(r + 1);
        let prow = &top[r];
        for row in rest.iter_mut() {
            for j in c + 1..ncols {
                let v = &prow[c] * &row[j] - &row[c] * &prow[j];
                row[j] = v / &prev;
            }
            row[c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
    }
    m.truncate(r);
    // Back substitution in exact rationals on the (short) echelon form.
    let mut out: Vec<Vec<Rat>> = m
        .into_iter()
        .map(|row| {
            let g = row.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
            row.into_iter().map(|c| Rat::from_integer(c / &g)).collect()
        })
        .collect();
    for k in (0..out.len()).rev() {
        let c = pivots[k];
        let inv = out[k][c].recip();
        for v in out[k].iter_mut().skip(c) {
            *v *= &inv;
        }
        let prow = out[k].clone();
        for row in out.iter_mut().take(k) {
            if Coeff::is_zero(&row[c]) {
                continue;
            }
            let f = row[c].clone();
            for j in c..ncols {
                if !Coeff::is_zero(&prow[j]) {
                    row[j] -= &f * &prow[j];
                }
            }
        }
    }
    *rows = out;
    pivots
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Eliminate> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, F::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<F>>, cols: usize) -> Result<Self, LinalgError> {
        if rows.iter().any(|r| r.len() != cols) {
            return Err(LinalgError::Dimension("ragged rows".into()));
        }
        let n = rows.len();
        Ok(Matrix { rows: n, cols, data: rows.into_iter().flatten().collect() })
    }

    pub fn from_columns(cols: &[Vec<F>], rows: usize) -> Result<Self, LinalgError> {
        if cols.iter().any(|c| c.len() != rows) {
            return Err(LinalgError::Dimension("ragged columns".into()));
        }
        let mut m = Matrix::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &F {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: F) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[F] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<F> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(F::is_zero)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j).clone());
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn mul(&self, o: &Matrix<F>) -> Result<Self, LinalgError> {
        if self.cols != o.rows {
            return Err(LinalgError::Dimension(format!("{}x{} * {}x{}", self.rows, self.cols, o.rows, o.cols)));
        }
        let mut out: Matrix<F> = Matrix::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let v = out.get(i, j).plus(&a.times(b));
                        out.set(i, j, v);
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[F]) -> Result<Vec<F>, LinalgError> {
        if v.len() != self.cols {
            return Err(LinalgError::Dimension(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i).iter().zip(v).fold(F::zero(), |acc, (a, b)| {
                    if a.is_zero() || b.is_zero() {
                        acc
                    } else {
                        acc.plus(&a.times(b))
                    }
                })
            })
            .collect())
    }

    /// Stack `self` on top of `o`.
    pub fn vstack(&self, o: &Matrix<F>) -> Result<Self, LinalgError> {
        if self.cols != o.cols {
            return Err(LinalgError::Dimension("column counts differ".into()));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&o.data);
        Ok(Matrix { rows: self.rows + o.rows, cols: self.cols, data })
    }

    /// Two-sided inverse via Gauss–Jordan on `[A | I]`.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.rows;
        if n != self.cols {
            return None;
        }
        let mut rows: Vec<Vec<F>> = (0..n)
            .map(|i| {
                let mut r = self.row(i).to_vec();
                r.extend((0..n).map(|j| if i == j { F::one() } else { F::zero() }));
                r
            })
            .collect();
        let piv = F::rref_rows(&mut rows);
        if piv.len() != n || piv.iter().enumerate().any(|(i, &p)| i != p) {
            return None;
        }
        Matrix::from_rows(rows.into_iter().map(|r| r[n..].to_vec()).collect(), n).ok()
    }

    /// RREF rows (zero rows removed) and pivot columns.
    pub fn rref(&self) -> (Vec<Vec<F>>, Vec<usize>) {
        let mut rows = self.row_vecs();
        rows.retain(|r| r.iter().any(|v| !v.is_zero()));
        let piv = F::rref_rows(&mut rows);
        (rows, piv)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn kernel(&self) -> Subspace<F> {
        let (rows, piv) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !piv.contains(c)).collect();
        let basis = free
            .iter()
            .map(|&f| {
                let mut v = vec![F::zero(); self.cols];
                v[f] = F::one();
                for (r, &p) in piv.iter().enumerate() {
                    v[p] = rows[r][f].negate();
                }
                v
            })
            .collect();
        Subspace::span(self.cols, basis)
    }

    /// Column space.
    pub fn image(&self) -> Subspace<F> {
        Subspace::span(self.rows, self.transpose().row_vecs())
    }

    /// `{v : M v ∈ W}`.
    pub fn preimage_subspace(&self, w: &Subspace<F>) -> Result<Subspace<F>, LinalgError> {
        if w.ambient != self.rows {
            return Err(LinalgError::Dimension(format!("subspace of F^{} for a map into F^{}", w.ambient, self.rows)));
        }
        let ann = w.annihilator();
        if ann.is_empty() {
            return Ok(Subspace::full(self.cols));
        }
        let n = Matrix::from_rows(ann, self.rows)?;
        Ok(n.mul(self)?.kernel())
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array(self.row(i).iter().map(|v| Value::String(v.render(&[]))).collect()))
                .collect(),
        )
    }
}

/// A subspace of `F^ambient`, held as a canonical RREF basis so that equality
/// of subspaces is equality of values.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace<F> {
    ambient: usize,
    basis: Vec<Vec<F>>,
    pivots: Vec<usize>,
}

impl<F: Eliminate> Subspace<F> {
    pub fn span(ambient: usize, mut vectors: Vec<Vec<F>>) -> Self {
        vectors.retain(|r| r.iter().any(|v| !v.is_zero()));
        debug_assert!(vectors.iter().all(|v| v.len() == ambient));
        let pivots = F::rref_rows(&mut vectors);
        Subspace { ambient, basis: vectors, pivots }
    }

    pub fn zero(ambient: usize) -> Self {
        Subspace { ambient, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(ambient: usize) -> Self {
        Matrix::<F>::identity(ambient).image()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<F>] {
        &self.basis
    }

    /// Normal form of `v` modulo the subspace (zero iff `v` lies in it).
    pub fn reduce(&self, v: &[F]) -> Vec<F> {
        let mut out = v.to_vec();
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if out[p].is_zero() {
                continue;
            }
            let f = out[p].clone();
            for (o, r) in out.iter_mut().zip(row) {
                if !r.is_zero() {
                    *o = o.minus(&f.times(r));
                }
            }
        }
        out
    }

    pub fn contains(&self, v: &[F]) -> bool {
        v.len() == self.ambient && self.reduce(v).iter().all(F::is_zero)
    }

    /// Coordinates of `v` in the RREF basis, if `v` lies in the subspace.
    pub fn coordinates(&self, v: &[F]) -> Option<Vec<F>> {
        if !self.contains(v) {
            return None;
        }
        Some(self.pivots.iter().map(|&p| v[p].clone()).collect())
    }

    pub fn is_subspace_of(&self, o: &Subspace<F>) -> bool {
        self.ambient == o.ambient && self.basis.iter().all(|b| o.contains(b))
    }

    pub fn sum(&self, o: &Subspace<F>) -> Self {
        let mut v = self.basis.clone();
        v.extend(o.basis.iter().cloned());
        Subspace::span(self.ambient, v)
    }

    pub fn intersection(&self, o: &Subspace<F>) -> Self {
        if self.dim() == 0 || o.dim() == 0 {
            return Subspace::zero(self.ambient);
        }
        // Solve Σ x_i a_i = Σ y_j b_j.
        let mut cols: Vec<Vec<F>> = self.basis.clone();
        cols.extend(o.basis.iter().map(|b| b.iter().map(F::negate).collect()));
        let m = Matrix::from_columns(&cols, self.ambient).expect("consistent ambient");
        let k = m.kernel();
        let vs = k
            .basis()
            .iter()
            .map(|x| {
                let mut v = vec![F::zero(); self.ambient];
                for (i, a) in self.basis.iter().enumerate() {
                    if x[i].is_zero() {
                        continue;
                    }
                    for (vv, aa) in v.iter_mut().zip(a) {
                        *vv = vv.plus(&x[i].times(aa));
                    }
                }
                v
            })
            .collect();
        Subspace::span(self.ambient, vs)
    }

    /// Linear functionals (as row vectors) vanishing exactly on the subspace.
    pub fn annihilator(&self) -> Vec<Vec<F>> {
        if self.dim() == 0 {
            return Matrix::<F>::identity(self.ambient).row_vecs();
        }
        let m = Matrix::from_rows(self.basis.clone(), self.ambient).expect("consistent ambient");
        m.kernel().basis
    }

    /// `{v : B(s, v) = 0 for all s}`.
    pub fn perp(&self, b: &Matrix<F>) -> Result<Self, LinalgError> {
        if b.rows() != self.ambient || b.cols() != self.ambient {
            return Err(LinalgError::Dimension("form size differs from ambient dimension".into()));
        }
        if !b.is_symmetric() {
            return Err(LinalgError::NotSymmetric);
        }
        if self.dim() == 0 {
            return Ok(Subspace::full(self.ambient));
        }
        let s = Matrix::from_rows(self.basis.clone(), self.ambient)?;
        Ok(s.mul(b)?.kernel())
    }

    pub fn is_nondegenerate_on(&self, b: &Matrix<F>) -> Result<bool, LinalgError> {
        Ok(self.intersection(&self.perp(b)?).dim() == 0)
    }

    pub fn to_json(&self) -> Value {
        Value::Array(
            self.basis
                .iter()
                .map(|r| Value::Array(r.iter().map(|v| Value::String(v.render(&[]))).collect()))
                .collect(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::int;

    fn m(rows: &[&[i64]]) -> Matrix<Rat> {
        let cols = rows[0].len();
        Matrix::from_rows(rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect(), cols).unwrap()
    }

    #[test]
    fn kernel_of_zero_is_everything() {
        assert_eq!(Matrix::<Rat>::zeros(3, 3).kernel().dim(), 3);
        assert_eq!(Matrix::<Rat>::identity(5).rank(), 5);
    }

    #[test]
    fn bareiss_matches_gauss_jordan() {
        let a = m(&[&[2, 4, 1, 3], &[1, 2, 0, 1], &[3, 6, 1, 4], &[0, 0, 5, 5]]);
        let (r1, p1) = a.rref();
        let mut rows = a.row_vecs();
        let p2 = gauss_jordan(&mut rows);
        assert_eq!(p1, p2);
        assert_eq!(r1, rows);
        assert_eq!(a.rank() + a.kernel().dim(), 4);
    }

    #[test]
    fn preimage_edges() {
        let a = m(&[&[1, 0, 0], &[0, 1, 0]]);
        assert_eq!(a.preimage_subspace(&Subspace::full(2)).unwrap(), Subspace::full(3));
        assert_eq!(a.preimage_subspace(&Subspace::zero(2)).unwrap(), a.kernel());
        assert!(a.preimage_subspace(&Subspace::zero(3)).is_err());
    }

    #[test]
    fn intersection_and_sum() {
        let s = Subspace::span(3, vec![vec![int(1), int(0), int(0)], vec![int(0), int(1), int(0)]]);
        let t = Subspace::span(3, vec![vec![int(0), int(1), int(0)], vec![int(0), int(0), int(1)]]);
        assert_eq!(s.intersection(&t), Subspace::span(3, vec![vec![int(0), int(1), int(0)]]));
        assert_eq!(s.sum(&t), Subspace::full(3));
    }

    #[test]
    fn perp_with_identity_and_isotropic_line() {
        let id = Matrix::<Rat>::identity(3);
        assert_eq!(Subspace::<Rat>::full(3).perp(&id).unwrap().dim(), 0);
        let eta = m(&[&[0, 1], &[1, 0]]);
        let null = Subspace::span(2, vec![vec![int(1), int(0)]]);
        assert_eq!(null.perp(&eta).unwrap(), null);
        assert!(!null.is_nondegenerate_on(&eta).unwrap());
        assert_eq!(null.perp(&m(&[&[0, 1], &[2, 0]])), Err(LinalgError::NotSymmetric));
    }

    #[test]
    fn inverse_of_cw_frame_metric() {
        let g = m(&[&[0, 0, 1], &[0, 1, 0], &[1, 0, 0]]);
        assert_eq!(g.inverse().unwrap(), g);
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
        let a = m(&[&[2, 1], &[1, 1]]);
        assert_eq!(a.mul(&a.inverse().unwrap()).unwrap(), Matrix::identity(2));
    }

    #[test]
    fn reduce_gives_normal_form() {
        let s = Subspace::span(2, vec![vec![int(1), int(1)]]);
        assert_eq!(s.reduce(&[int(3), int(1)]), vec![int(0), int(-2)]);
        assert_eq!(s.coordinates(&[int(2), int(2)]), Some(vec![int(2)]));
    }
}
