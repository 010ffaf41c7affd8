//! Dense complex Gaussian elimination.
//!
//! Rank decisions rest on a pivot tolerance that is relative to the largest
//! row infinity-norm of the input matrix. There is no SVD here; a pivot whose
//! modulus falls below `tol * row_scale` is treated as zero.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidInput(format!(
                "{} entries cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from equally long rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidInput("ragged rows".into()));
        }
        Self::from_vec(rows.len(), cols, rows.concat())
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    /// Top-left `rows x cols` block.
    pub fn submatrix(&self, rows: usize, cols: usize) -> Matrix {
        let mut s = Matrix::zeros(rows, cols);
        for i in 0..rows {
            s.data[i * cols..(i + 1) * cols].copy_from_slice(&self.row(i)[..cols]);
        }
        s
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Largest row infinity-norm.
    pub fn row_scale(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|c| c.norm()).fold(0.0, f64::max))
            .fold(0.0, f64::max)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone)]
pub struct RrefResult {
    pub reduced: Matrix,
    pub rank: usize,
    pub pivot_cols: Vec<usize>,
    /// Largest row infinity-norm of the input.
    pub row_scale: f64,
    /// Modulus of each accepted pivot before normalization.
    pub pivot_magnitudes: Vec<f64>,
}

/// Gauss-Jordan elimination with partial pivoting on maximum modulus.
pub fn rref(m: &Matrix, tol: f64) -> RrefResult {
    assert!(tol > 0.0, "tolerance must be positive");
    let row_scale = m.row_scale();
    let threshold = tol * row_scale;
    let mut r = m.clone();
    let mut pivot_cols = Vec::new();
    let mut pivot_magnitudes = Vec::new();
    let mut prow = 0;

    for col in 0..r.cols {
        if prow == r.rows {
            break;
        }
        let (best, best_mag) = (prow..r.rows)
            .map(|i| (i, r[(i, col)].norm()))
            .fold((prow, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_mag < threshold || best_mag == 0.0 {
            for i in prow..r.rows {
                r[(i, col)] = ZERO;
            }
            continue;
        }
        r.swap_rows(prow, best);
        let inv = ONE / r[(prow, col)];
        for j in col..r.cols {
            r[(prow, j)] *= inv;
        }
        r[(prow, col)] = ONE;
        for i in 0..r.rows {
            if i == prow {
                continue;
            }
            let factor = r[(i, col)];
            if factor == ZERO {
                continue;
            }
            for j in col..r.cols {
                let delta = factor * r[(prow, j)];
                r[(i, j)] -= delta;
            }
            r[(i, col)] = ZERO;
        }
        pivot_cols.push(col);
        pivot_magnitudes.push(best_mag);
        prow += 1;
    }

    RrefResult {
        reduced: r,
        rank: pivot_cols.len(),
        pivot_cols,
        row_scale,
        pivot_magnitudes,
    }
}

/// Nullspace basis from the reduced row-echelon form.
///
/// Each vector sets one free variable to 1 and the rest to 0. Vectors are
/// listed by decreasing free column, so the one whose free variable is the
/// last column comes first.
pub fn nullspace(m: &Matrix, tol: f64) -> Vec<Vec<Complex64>> {
    nullspace_from_rref(&rref(m, tol))
}

pub fn nullspace_from_rref(res: &RrefResult) -> Vec<Vec<Complex64>> {
    let cols = res.reduced.cols();
    let mut is_pivot = vec![false; cols];
    for &p in &res.pivot_cols {
        is_pivot[p] = true;
    }
    (0..cols)
        .rev()
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut v = vec![ZERO; cols];
            v[free] = ONE;
            for (row, &p) in res.pivot_cols.iter().enumerate() {
                v[p] = -res.reduced[(row, free)];
            }
            v
        })
        .collect()
}

pub fn rank(m: &Matrix, tol: f64) -> usize {
    rref(m, tol).rank
}

/// Determinant by LU elimination with partial pivoting.
pub fn determinant(m: &Matrix) -> Result<Complex64> {
    if m.rows() != m.cols() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut det = ONE;
    for col in 0..n {
        let (best, best_mag) = (col..n)
            .map(|i| (i, a[(i, col)].norm()))
            .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best_mag == 0.0 {
            return Ok(ZERO);
        }
        if best != col {
            a.swap_rows(best, col);
            det = -det;
        }
        let pivot = a[(col, col)];
        det *= pivot;
        for i in col + 1..n {
            let factor = a[(i, col)] / pivot;
            if factor == ZERO {
                continue;
            }
            for j in col..n {
                let delta = factor * a[(col, j)];
                a[(i, j)] -= delta;
            }
        }
    }
    Ok(det)
}

/// Inverse through row reduction of `[m | I]`.
pub fn inverse(m: &Matrix, tol: f64) -> Result<Matrix> {
    if m.rows() != m.cols() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut aug = Matrix::zeros(n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)];
        }
        aug[(i, n + i)] = ONE;
    }
    let res = rref(&aug, tol);
    if res.pivot_cols.iter().copied().take(n).ne(0..n) || res.rank < n {
        return Err(Error::InvalidInput("matrix is singular".into()));
    }
    let mut inv = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            inv[(i, j)] = res.reduced[(i, n + j)];
        }
    }
    Ok(inv)
}

/// Whether two families of vectors span the same subspace, judged by ranks
/// of the families and of their union.
pub fn same_span(a: &[Vec<Complex64>], b: &[Vec<Complex64>], tol: f64) -> bool {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return true,
        (true, false) | (false, true) => return false,
        _ => {}
    }
    let ra = rank(&Matrix::from_rows(a).expect("equal lengths"), tol);
    let rb = rank(&Matrix::from_rows(b).expect("equal lengths"), tol);
    let union: Vec<Vec<Complex64>> = a.iter().chain(b).cloned().collect();
    let ru = rank(&Matrix::from_rows(&union).expect("equal lengths"), tol);
    ra == rb && ru == ra
}

/// Solves the square system `m x = rhs` by row reduction of `[m | rhs]`.
pub fn solve(m: &Matrix, rhs: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    if m.rows() != m.cols() {
        return Err(Error::NonSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    let mut aug = Matrix::zeros(n, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = m[(i, j)];
        }
        aug[(i, n)] = rhs[i];
    }
    let res = rref(&aug, tol);
    if res.pivot_cols.iter().copied().ne(0..n) {
        return Err(Error::InvalidInput("matrix is singular".into()));
    }
    Ok((0..n).map(|i| res.reduced[(i, n)]).collect())
}

/// Double-word accumulator for dot products.
#[derive(Default)]
struct Compensated {
    hi: f64,
    lo: f64,
}

impl Compensated {
    fn add(&mut self, x: f64) {
        let s = self.hi + x;
        let bb = s - self.hi;
        self.lo += (self.hi - (s - bb)) + (x - bb);
        self.hi = s;
    }

    fn add_prod(&mut self, a: f64, b: f64) {
        let p = a * b;
        self.add(p);
        self.lo += a.mul_add(b, -p);
    }

    fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

/// `m v` with every entry accumulated in double-word precision.
pub fn mul_vec_compensated(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    assert_eq!(m.cols(), v.len(), "dimension mismatch");
    (0..m.rows())
        .map(|i| {
            let (mut re, mut im) = (Compensated::default(), Compensated::default());
            for (a, b) in m.row(i).iter().zip(v) {
                re.add_prod(a.re, b.re);
                re.add_prod(-a.im, b.im);
                im.add_prod(a.re, b.im);
                im.add_prod(a.im, b.re);
            }
            Complex64::new(re.value(), im.value())
        })
        .collect()
}

/// `||m v||_inf`.
pub fn residual_inf(m: &Matrix, v: &[Complex64]) -> f64 {
    m.mul_vec(v).iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
        let data = (0..rows * cols)
            .map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Matrix::from_vec(rows, cols, data).unwrap()
    }

    #[test]
    fn identity_rref() {
        let r = rref(&Matrix::identity(2), 1e-10);
        assert_eq!(r.rank, 2);
        assert_eq!(r.pivot_cols, vec![0, 1]);
    }

    #[test]
    fn normalized_two_cycle_matrix_has_rank_three() {
        let b = Matrix::from_real_rows(&[
            &[-1.0, -1.0, 0.0, 0.0],
            &[-1.0, 0.0, 1.0, 2.0],
            &[0.0, 0.0, 2.0, 0.0],
        ])
        .unwrap();
        assert_eq!(rref(&b, 1e-10).rank, 3);
        let ns = nullspace(&b, 1e-10);
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        // proportional to <2, -2, 0, 1>
        let s = v[3];
        let expected = [2.0, -2.0, 0.0, 1.0];
        for (x, e) in v.iter().zip(expected) {
            assert!((x - s * e).norm() < 1e-14);
        }
    }

    #[test]
    fn duplicated_row_drops_rank() {
        let m = Matrix::from_real_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[1.0, 2.0, 3.0]])
            .unwrap();
        assert!(rank(&m, 1e-10) < 3);
    }

    #[test]
    fn nullspace_edge_cases() {
        assert!(nullspace(&Matrix::identity(4), 1e-10).is_empty());
        let z = Matrix::zeros(1, 3);
        let ns = nullspace(&z, 1e-10);
        assert_eq!(ns.len(), 3);
        // last free column first
        assert_eq!(ns[0][2], ONE);
        assert_eq!(ns[2][0], ONE);
    }

    #[test]
    fn determinant_examples() {
        let (a, b) = (c(0.3, 1.0), c(-2.0, 0.5));
        let m = Matrix::from_rows(&[vec![ONE, ONE], vec![a, b]]).unwrap();
        assert!((determinant(&m).unwrap() - (b - a)).norm() < 1e-15);
        assert_eq!(determinant(&Matrix::identity(5)).unwrap(), ONE);
        assert!(matches!(
            determinant(&Matrix::zeros(2, 3)),
            Err(Error::NonSquare { .. })
        ));
    }

    #[test]
    fn vandermonde_cube_roots_of_unity() {
        let zeta = Complex64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        let xs: Vec<Complex64> = (1..=3).map(|i| zeta.powi(i)).collect();
        let rows: Vec<Vec<Complex64>> = xs
            .iter()
            .map(|x| (0..3).map(|j| x.powi(j)).collect())
            .collect();
        let v = Matrix::from_rows(&rows).unwrap();
        let mut product = ONE;
        for i in 0..3 {
            for j in 0..i {
                product *= xs[i] - xs[j];
            }
        }
        assert!((determinant(&v).unwrap() - product).norm() < 1e-10);
    }

    #[test]
    fn nullspace_residual_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let tol = 1e-10;
        for _ in 0..50 {
            let rows = rng.gen_range(1..6);
            let cols = rng.gen_range(rows + 1..9);
            let m = random_matrix(&mut rng, rows, cols);
            let res = rref(&m, tol);
            let ns = nullspace_from_rref(&res);
            assert_eq!(ns.len(), cols - res.rank);
            for v in &ns {
                assert!(residual_inf(&m, v) < 10.0 * tol * res.row_scale * inf_norm(v));
            }
            if ns.len() > 1 {
                let basis = Matrix::from_rows(&ns).unwrap();
                assert_eq!(rank(&basis, tol), ns.len());
            }
        }
    }

    #[test]
    fn determinant_times_inverse_determinant_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..8 {
            for _ in 0..10 {
                let m = random_matrix(&mut rng, n, n);
                let inv = inverse(&m, 1e-12).unwrap();
                let prod = determinant(&m).unwrap() * determinant(&inv).unwrap();
                assert!((prod - ONE).norm() < 1e-8, "n={n}: {prod}");
                let id = m.mul(&inv);
                for i in 0..n {
                    for j in 0..n {
                        let e = if i == j { ONE } else { ZERO };
                        assert!((id[(i, j)] - e).norm() < 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn rank_equals_rank_of_transpose() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let rows = rng.gen_range(1..7);
            let cols = rng.gen_range(1..7);
            let k = rng.gen_range(1..=rows.min(cols));
            // product of random factors has rank k generically
            let m = random_matrix(&mut rng, rows, k).mul(&random_matrix(&mut rng, k, cols));
            let r = rank(&m, 1e-10);
            assert_eq!(r, k);
            assert_eq!(r, rank(&m.transpose(), 1e-10));
        }
    }

    #[test]
    fn same_span_detects_scaling_and_difference() {
        let a = vec![vec![c(1.0, 0.0), c(2.0, 1.0)]];
        let b = vec![vec![c(0.0, 3.0), c(-3.0, 6.0)]];
        assert!(same_span(&a, &b, 1e-10));
        let d = vec![vec![c(1.0, 0.0), c(2.0, 1.5)]];
        assert!(!same_span(&a, &d, 1e-10));
    }

    #[test]
    fn solve_matches_product() {
        let m = Matrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let x = solve(&m, &[c(3.0, 0.0), c(5.0, 1.0)], 1e-12).unwrap();
        let back = m.mul_vec(&x);
        assert!((back[0] - c(3.0, 0.0)).norm() < 1e-14);
        assert!((back[1] - c(5.0, 1.0)).norm() < 1e-14);
        let singular = Matrix::from_real_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(solve(&singular, &[ONE, ONE], 1e-12).is_err());
    }

    #[test]
    fn compensated_product_recovers_cancellation() {
        let m = Matrix::from_real_rows(&[&[1e16, 1.0, -1e16]]).unwrap();
        let v = [ONE, ONE, ONE];
        assert_eq!(m.mul_vec(&v)[0], ZERO);
        assert_eq!(mul_vec_compensated(&m, &v)[0], ONE);
        let z = c(0.1, 0.3);
        let m = Matrix::from_rows(&[vec![z, -z]]).unwrap();
        assert_eq!(
            mul_vec_compensated(&m, &[c(0.7, -0.2), c(0.7, -0.2)])[0],
            ZERO
        );
    }
}
