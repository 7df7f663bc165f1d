//! Small dense real and complex matrices.
//!
//! Everything here is sized for covariance matrices (2N × 2N with N ≤ 6) and
//! truncated Fock operators (a few hundred rows at most), so the algorithms
//! are the plain textbook ones: partial-pivot LU for inverses and
//! determinants, cyclic Jacobi for Hermitian spectra.

use std::fmt;
use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pivots below this magnitude make a matrix singular.
pub const SINGULAR_PIVOT: f64 = 1e-13;

/// Maximum deviation from Hermiticity accepted by the eigenvalue routines.
pub const HERMITIAN_TOL: f64 = 1e-10;

pub type ComplexVector = Vec<Complex64>;

/// Field element usable in [`Matrix`].
pub trait Scalar:
    Copy
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn from_f64(x: f64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
    fn from_f64(x: f64) -> Self {
        Complex64::new(x, 0.0)
    }
}

/// Row-major dense matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex64>;

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_diag(diag: &[T]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// Builds a matrix from row-major data.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(nrows * ncols);
        for row in rows {
            if row.len() != ncols {
                return Err(Error::DimensionMismatch {
                    expected: ncols,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| x * factor).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: other.rows,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let start = i * out.cols;
                for (o, &b) in out.data[start..start + other.cols].iter_mut().zip(orow) {
                    *o = *o + a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if self.cols != v.len() {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: v.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Self, f: impl Fn(T, T) -> T) -> Result<Self> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.rows * self.cols,
                got: other.rows * other.cols,
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        Self::from_fn(self.rows * other.rows, self.cols * other.cols, |i, j| {
            self[(i / other.rows, j / other.cols)] * other[(i % other.rows, j % other.cols)]
        })
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.modulus()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|x| x.modulus().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn trace(&self) -> T {
        (0..self.rows.min(self.cols)).fold(T::zero(), |acc, i| acc + self[(i, i)])
    }

    /// Max entry modulus of `self - self†`.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).modulus());
            }
        }
        worst
    }

    /// Returns `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::from_f64(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * half
        })
    }

    /// Top-left `rows × cols` block.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    fn lu(&self) -> Result<Lu<T>> {
        if !self.is_square() {
            return Err(Error::NotSquare(self.rows, self.cols));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = T::one();
        let mut min_pivot = f64::INFINITY;
        for k in 0..n {
            let (p, pmag) = (k..n)
                .map(|i| (i, a[(i, k)].modulus()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            min_pivot = min_pivot.min(pmag);
            if pmag < SINGULAR_PIVOT {
                return Ok(Lu {
                    a,
                    perm,
                    sign,
                    min_pivot,
                    singular: true,
                });
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = a[(k, k)];
            for i in k + 1..n {
                let factor = a[(i, k)] / pivot;
                a[(i, k)] = factor;
                if factor == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let v = a[(k, j)];
                    a[(i, j)] = a[(i, j)] - factor * v;
                }
            }
        }
        Ok(Lu {
            a,
            perm,
            sign,
            min_pivot,
            singular: false,
        })
    }

    /// Inverse by partial-pivot LU.
    pub fn invert(&self) -> Result<Self> {
        let lu = self.lu()?;
        if lu.singular {
            return Err(Error::SingularMatrix {
                pivot: lu.min_pivot,
                threshold: SINGULAR_PIVOT,
            });
        }
        let n = self.rows;
        let mut inv = Self::zeros(n, n);
        for col in 0..n {
            let mut e = vec![T::zero(); n];
            e[col] = T::one();
            let x = lu.solve(&e);
            for (i, v) in x.into_iter().enumerate() {
                inv[(i, col)] = v;
            }
        }
        Ok(inv)
    }

    /// Solves `self · x = b`.
    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        if b.len() != self.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                got: b.len(),
            });
        }
        let lu = self.lu()?;
        if lu.singular {
            return Err(Error::SingularMatrix {
                pivot: lu.min_pivot,
                threshold: SINGULAR_PIVOT,
            });
        }
        Ok(lu.solve(b))
    }

    /// Determinant via pivoted elimination. Singular input yields zero.
    pub fn determinant(&self) -> Result<T> {
        let lu = self.lu()?;
        if lu.singular {
            return Ok(T::zero());
        }
        Ok((0..self.rows).fold(lu.sign, |acc, i| acc * lu.a[(i, i)]))
    }
}

struct Lu<T> {
    a: Matrix<T>,
    perm: Vec<usize>,
    sign: T,
    min_pivot: f64,
    singular: bool,
}

impl<T: Scalar> Lu<T> {
    fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.a.rows;
        let mut y: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut acc = y[i];
            for j in 0..i {
                acc = acc - self.a[(i, j)] * y[j];
            }
            y[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for j in i + 1..n {
                acc = acc - self.a[(i, j)] * y[j];
            }
            y[i] = acc / self.a[(i, i)];
        }
        y
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl RealMatrix {
    pub fn to_complex(&self) -> ComplexMatrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }
}

/// Real symmetric matrix. Construction symmetrizes, so `m[(i,j)] == m[(j,i)]`
/// holds bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSymMatrix(RealMatrix);

impl RealSymMatrix {
    pub fn new(m: RealMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare(m.rows(), m.cols()));
        }
        let sym = RealMatrix::from_fn(m.rows(), m.cols(), |i, j| {
            if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)])
            }
        });
        Ok(Self(sym))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(RealMatrix::from_rows(rows)?)
    }

    pub fn identity(dim: usize) -> Self {
        Self(RealMatrix::identity(dim))
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        Self(RealMatrix::from_diag(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &RealMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> RealMatrix {
        self.0
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim()).map(|i| self.0.row(i).to_vec()).collect()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.scale(factor))
    }

    pub fn add_identity(&self, factor: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..self.dim() {
            m[(i, i)] += factor;
        }
        Self(m)
    }

    pub fn invert(&self) -> Result<Self> {
        Self::new(self.0.invert()?)
    }

    pub fn determinant(&self) -> f64 {
        // square by construction
        self.0.determinant().unwrap_or(0.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0.to_complex()).expect("symmetric by construction")
    }
}

impl Index<(usize, usize)> for RealSymMatrix {
    type Output = f64;
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: ComplexMatrix,
}

/// Ascending eigenvalues of a Hermitian matrix.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(m)?.values)
}

/// Cyclic complex Jacobi. Each rotation first removes the phase of the
/// pivot element, then applies the real symmetric rotation to the pair.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<HermitianEigen> {
    if !m.is_square() {
        return Err(Error::NotSquare(m.rows(), m.cols()));
    }
    let residual = m.hermiticity_residual();
    if residual > HERMITIAN_TOL {
        return Err(Error::NotHermitian(residual));
    }
    let n = m.rows();
    let mut a = m.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 || mag <= 1e-18 * scale {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let theta = (aqq - app) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // J = diag(1, conj(phase)) * [[c, s], [-s, c]]
                let jpp = Complex64::new(c, 0.0);
                let jpq = Complex64::new(s, 0.0);
                let jqp = -phase.conj() * s;
                let jqq = phase.conj() * c;
                // A <- A J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // A <- J^† A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = Complex64::new(0.0, 0.0);
                a[(q, p)] = Complex64::new(0.0, 0.0);
                a[(p, p)].im = 0.0;
                a[(q, q)].im = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_real(rng: &mut ChaCha8Rng, n: usize) -> RealMatrix {
        RealMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0))
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        let a = ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        a.hermitian_part()
    }

    #[test]
    fn identity_inverts_to_identity() {
        let id = RealMatrix::identity(4);
        assert_eq!(id.invert().unwrap(), id);
    }

    #[test]
    fn diagonal_inverse() {
        let m = RealMatrix::from_diag(&[2.0, 2.0]);
        assert_eq!(m.invert().unwrap(), RealMatrix::from_diag(&[0.5, 0.5]));
    }

    #[test]
    fn random_inverse_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let m = random_real(&mut rng, 6).add(&RealMatrix::identity(6).scale(3.0)).unwrap();
            let inv = m.invert().unwrap();
            let resid = m.matmul(&inv).unwrap().sub(&RealMatrix::identity(6)).unwrap();
            assert!(resid.max_abs() <= 1e-10);
            let back = inv.invert().unwrap().sub(&m).unwrap();
            assert!(back.max_abs() <= 1e-9);
        }
    }

    #[test]
    fn complex_inverse_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let m = ComplexMatrix::from_fn(5, 5, |i, j| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                + if i == j { c(4.0, 0.0) } else { c(0.0, 0.0) }
        });
        let resid = m
            .matmul(&m.invert().unwrap())
            .unwrap()
            .sub(&ComplexMatrix::identity(5))
            .unwrap();
        assert!(resid.max_abs() <= 1e-10);
    }

    #[test]
    fn singular_matrix_is_rejected() {
        let m = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert!(matches!(m.invert(), Err(Error::SingularMatrix { .. })));
        assert_eq!(m.determinant().unwrap(), 0.0);
        // pure-state boundary: E - 2σ with σ = E/2
        let boundary = RealMatrix::identity(2).sub(&RealMatrix::identity(2)).unwrap();
        assert!(matches!(boundary.invert(), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn determinants() {
        assert_eq!(RealMatrix::identity(3).determinant().unwrap(), 1.0);
        assert_eq!(RealMatrix::from_diag(&[0.5, 0.5]).determinant().unwrap(), 0.25);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let (a, b, d): (f64, f64, f64) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let m = RealMatrix::from_rows(&[vec![a, b], vec![b, d]]).unwrap();
            let exact = a * d - b * b;
            let got = m.determinant().unwrap();
            assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1e-3), "{got} vs {exact}");
        }
    }

    #[test]
    fn non_square_is_rejected() {
        let m = RealMatrix::zeros(2, 3);
        assert!(matches!(m.invert(), Err(Error::NotSquare(2, 3))));
    }

    #[test]
    fn diagonal_spectrum() {
        let m = RealMatrix::from_diag(&[3.0, 1.0, 2.0]).to_complex();
        assert_eq!(hermitian_eigenvalues(&m).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn pauli_y_spectrum() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let ev = hermitian_eigenvalues(&m).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn projector_spectrum() {
        let mut m = ComplexMatrix::zeros(4, 4);
        m[(0, 0)] = c(1.0, 0.0);
        let ev = hermitian_eigenvalues(&m).unwrap();
        assert_eq!(ev, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn non_hermitian_is_rejected() {
        let m = ComplexMatrix::from_rows(&[
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(hermitian_eigenvalues(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigenpairs_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [2, 5, 9, 20] {
            let m = random_hermitian(&mut rng, n);
            let eig = hermitian_eigen(&m).unwrap();
            let norm = m.frobenius_norm();
            for k in 0..n {
                let v: Vec<Complex64> = (0..n).map(|i| eig.vectors[(i, k)]).collect();
                let mv = m.mul_vec(&v).unwrap();
                let resid: f64 = mv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * eig.values[k]).norm_sqr())
                    .sum::<f64>()
                    .sqrt();
                assert!(resid <= 1e-8 * norm, "n={n} k={k} resid={resid}");
            }
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn determinant_matches_eigenvalue_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let m = random_hermitian(&mut rng, 6);
            let det = m.determinant().unwrap();
            assert!(det.im.abs() <= 1e-10 * det.norm().max(1.0));
            let prod: f64 = hermitian_eigenvalues(&m).unwrap().iter().product();
            assert!((det.re - prod).abs() <= 1e-8 * prod.abs().max(1e-12), "{det} vs {prod}");
        }
    }

    #[test]
    fn spd_spectrum_is_nonnegative() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let a = random_real(&mut rng, 6);
            let spd = a.matmul(&a.transpose()).unwrap();
            let ev = RealSymMatrix::new(spd).unwrap().eigenvalues();
            assert!(ev.iter().all(|&x| x >= -1e-12));
        }
    }

    #[test]
    fn symmetrization_is_exact() {
        let m = RealMatrix::from_rows(&[vec![1.0, 0.3], vec![0.1, 2.0]]).unwrap();
        let s = RealSymMatrix::new(m).unwrap();
        assert_eq!(s[(0, 1)].to_bits(), s[(1, 0)].to_bits());
        assert_eq!(s[(0, 1)], 0.2);
    }

    #[test]
    fn kron_shapes() {
        let a = RealMatrix::from_diag(&[1.0, 2.0]);
        let b = RealMatrix::from_diag(&[1.0, 10.0, 100.0]);
        let k = a.kron(&b);
        assert_eq!(k.rows(), 6);
        assert_eq!(k[(4, 4)], 20.0);
    }
}
