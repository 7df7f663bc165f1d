//! Hermite polynomials of several variables.
//!
//! `H^{R}_n(y)` is defined by the generating function
//!
//! ```text
//! exp(-½ xᵀR x + yᵀR x) = Σ_n  x^n / n!  H^{R}_n(y)
//! ```
//!
//! Differentiating gives the recurrence
//! `H_{n+e_j} = z_j H_n − Σ_k R_jk n_k H_{n−e_k}` with `z = R y`. Only `R`
//! and `z` enter, so the parameters store `z` directly. That keeps the
//! coherent-state limit finite, where `R → 0` while `y` diverges.
//!
//! Internally the table holds `G_n = H_n / √(n!)` (with `n! = Π n_k!`), which
//! never overflows for the degrees used in tomography and is exactly the
//! quantity a tomogram needs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;

/// Default cap on the total degree of a Hermite multi-index.
pub const DEFAULT_DEGREE_CAP: usize = 128;

/// Highest total degree accepted by [`hermite_series_oracle`].
pub const ORACLE_DEGREE_CAP: usize = 6;

/// Vector of nonnegative integers, one per variable (or per mode).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(entries: Vec<usize>) -> Self {
        Self(entries)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total_degree(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// `(n₁…n_N, n₁…n_N)`, the index a tomogram feeds to the Hermite polynomial.
    pub fn doubled(&self) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&self.0);
        Self(v)
    }

    /// All indices with `0 ≤ m_k ≤ max_k`, lexicographic order.
    pub fn lattice(max: &[usize]) -> Vec<MultiIndex> {
        let total: usize = max.iter().map(|m| m + 1).product();
        let mut out = Vec::with_capacity(total);
        let mut cur = vec![0usize; max.len()];
        for _ in 0..total {
            out.push(MultiIndex(cur.clone()));
            for k in (0..max.len()).rev() {
                if cur[k] < max[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = 0;
            }
        }
        out
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(v: Vec<usize>) -> Self {
        Self(v)
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = usize;
    fn index(&self, k: usize) -> &usize {
        &self.0[k]
    }
}

/// `R` (complex symmetric) and `z = R·y`.
#[derive(Debug, Clone)]
pub struct HermiteParams {
    r: ComplexMatrix,
    z: Vec<Complex64>,
    degree_cap: usize,
}

impl HermiteParams {
    pub fn new(r: ComplexMatrix, z: Vec<Complex64>) -> Result<Self> {
        if !r.is_square() {
            return Err(Error::NotSquare(r.rows(), r.cols()));
        }
        if z.len() != r.rows() {
            return Err(Error::DimensionMismatch {
                expected: r.rows(),
                got: z.len(),
            });
        }
        let half = Complex64::new(0.5, 0.0);
        let r = ComplexMatrix::from_fn(r.rows(), r.cols(), |i, j| {
            if i == j {
                r[(i, i)]
            } else {
                (r[(i, j)] + r[(j, i)]) * half
            }
        });
        Ok(Self {
            r,
            z,
            degree_cap: DEFAULT_DEGREE_CAP,
        })
    }

    /// Parameters from the generating-function argument `y`.
    pub fn from_y(r: ComplexMatrix, y: &[Complex64]) -> Result<Self> {
        let z = r.mul_vec(y)?;
        Self::new(r, z)
    }

    pub fn with_degree_cap(mut self, cap: usize) -> Self {
        self.degree_cap = cap;
        self
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    pub fn r(&self) -> &ComplexMatrix {
        &self.r
    }

    pub fn z(&self) -> &[Complex64] {
        &self.z
    }

    pub fn degree_cap(&self) -> usize {
        self.degree_cap
    }

    fn check(&self, n: &[usize]) -> Result<()> {
        if n.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: n.len(),
            });
        }
        let degree: usize = n.iter().sum();
        if degree > self.degree_cap {
            return Err(Error::DegreeCapExceeded {
                degree,
                cap: self.degree_cap,
            });
        }
        Ok(())
    }
}

/// Scaled values `H_m / √(m!)` for every `m ≤ max` (componentwise).
#[derive(Debug, Clone)]
pub struct HermiteTable {
    max: Vec<usize>,
    strides: Vec<usize>,
    values: Vec<Complex64>,
}

impl HermiteTable {
    pub fn build(params: &HermiteParams, max: &MultiIndex) -> Result<Self> {
        params.check(max.as_slice())?;
        let dim = params.dim();
        let max = max.as_slice().to_vec();
        let mut strides = vec![1usize; dim];
        for k in (0..dim.saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * (max[k + 1] + 1);
        }
        let total: usize = max.iter().map(|m| m + 1).product();
        let mut values = vec![Complex64::new(0.0, 0.0); total];
        values[0] = Complex64::new(1.0, 0.0);

        let sqrt: Vec<f64> = (0..=max.iter().copied().max().unwrap_or(0) + 1)
            .map(|k| (k as f64).sqrt())
            .collect();
        let mut cur = vec![0usize; dim];
        for flat in 1..total {
            // advance the lexicographic counter
            for k in (0..dim).rev() {
                if cur[k] < max[k] {
                    cur[k] += 1;
                    break;
                }
                cur[k] = 0;
            }
            // lower the last nonzero coordinate
            let j = (0..dim).rev().find(|&k| cur[k] > 0).expect("nonzero index");
            let base = flat - strides[j];
            let nj = cur[j] - 1;
            let mut acc = params.z[j] * values[base];
            for k in 0..dim {
                let nk = if k == j { nj } else { cur[k] };
                if nk == 0 {
                    continue;
                }
                let rjk = params.r[(j, k)];
                if rjk.re == 0.0 && rjk.im == 0.0 {
                    continue;
                }
                acc -= rjk * sqrt[nk] * values[base - strides[k]];
            }
            values[flat] = acc / sqrt[nj + 1];
        }
        Ok(Self {
            max,
            strides,
            values,
        })
    }

    pub fn max(&self) -> &[usize] {
        &self.max
    }

    fn offset(&self, n: &[usize]) -> usize {
        assert_eq!(n.len(), self.max.len(), "index length");
        n.iter()
            .zip(&self.max)
            .zip(&self.strides)
            .map(|((&nk, &mk), &s)| {
                assert!(nk <= mk, "index {nk} outside table bound {mk}");
                nk * s
            })
            .sum()
    }

    /// `H_n / √(n!)`.
    pub fn scaled(&self, n: &[usize]) -> Complex64 {
        self.values[self.offset(n)]
    }

    /// `H_n` itself.
    pub fn value(&self, n: &[usize]) -> Complex64 {
        let scale: f64 = n.iter().map(|&k| factorial(k).sqrt()).product();
        self.scaled(n) * scale
    }
}

/// `H^{R}_n(y)` from the recurrence.
pub fn hermite_eval(params: &HermiteParams, n: &MultiIndex) -> Result<Complex64> {
    let table = HermiteTable::build(params, n)?;
    Ok(table.value(n.as_slice()))
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Physicists' Hermite polynomial `H_n(x)` of one complex variable.
pub fn physicists_hermite(n: usize, x: Complex64) -> Complex64 {
    let mut prev = Complex64::new(1.0, 0.0);
    if n == 0 {
        return prev;
    }
    let mut cur = x * 2.0;
    for k in 1..n {
        let next = x * cur * 2.0 - prev * (2.0 * k as f64);
        prev = cur;
        cur = next;
    }
    cur
}

/// Number of ring samples per variable in the series oracle.
const RING_NODES: usize = 16;

/// Taylor coefficients of the generating function sampled on a polytorus
/// `|x_k| = radius`, `K = 16` nodes per variable, separable DFT.
#[derive(Debug, Clone)]
pub struct SeriesOracle {
    dim: usize,
    radius: f64,
    coeffs: Vec<Complex64>,
}

impl SeriesOracle {
    pub fn new(r: &ComplexMatrix, y: &[Complex64], radius: f64) -> Result<Self> {
        let dim = y.len();
        if r.rows() != dim || r.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: r.rows(),
            });
        }
        let k = RING_NODES;
        let total = k.pow(dim as u32);
        let ry = r.transpose().mul_vec(y)?;
        let roots: Vec<Complex64> = (0..k)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / k as f64))
            .collect();
        let mut samples = Vec::with_capacity(total);
        let mut idx = vec![0usize; dim];
        let mut x = vec![Complex64::new(0.0, 0.0); dim];
        for flat in 0..total {
            let mut rem = flat;
            for d in (0..dim).rev() {
                idx[d] = rem % k;
                rem /= k;
            }
            for d in 0..dim {
                x[d] = roots[idx[d]] * radius;
            }
            let mut quad = Complex64::new(0.0, 0.0);
            for i in 0..dim {
                for j in 0..dim {
                    quad += x[i] * r[(i, j)] * x[j];
                }
            }
            let lin: Complex64 = ry.iter().zip(&x).map(|(a, b)| a * b).sum();
            samples.push((lin - quad * 0.5).exp());
        }
        // forward DFT along each axis
        let mut stride = 1;
        for _ in 0..dim {
            let block = stride * k;
            let mut out = samples.clone();
            for start in (0..total).step_by(block) {
                for off in 0..stride {
                    for m in 0..k {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for j in 0..k {
                            acc += samples[start + off + j * stride] * roots[(m * j) % k].conj();
                        }
                        out[start + off + m * stride] = acc / k as f64;
                    }
                }
            }
            samples = out;
            stride = block;
        }
        Ok(Self {
            dim,
            radius,
            coeffs: samples,
        })
    }

    /// `H_n` estimated as `n!` times the extracted Taylor coefficient.
    pub fn hermite(&self, n: &MultiIndex) -> Result<Complex64> {
        if n.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: n.len(),
            });
        }
        let degree = n.total_degree();
        if degree > ORACLE_DEGREE_CAP {
            return Err(Error::DegreeCapExceeded {
                degree,
                cap: ORACLE_DEGREE_CAP,
            });
        }
        // last axis varies fastest
        let flat = n
            .as_slice()
            .iter()
            .fold(0usize, |acc, &nk| acc * RING_NODES + nk);
        let fact: f64 = n.as_slice().iter().map(|&k| factorial(k)).product();
        Ok(self.coeffs[flat] * fact / self.radius.powi(degree as i32))
    }
}

/// Extracts `H^{R}_n(y)` directly from the generating function by sampling it
/// on a ring of radius `h` in every variable. Test oracle only.
pub fn hermite_series_oracle(
    r: &ComplexMatrix,
    y: &[Complex64],
    n: &MultiIndex,
    h: f64,
) -> Result<Complex64> {
    let degree = n.total_degree();
    if degree > ORACLE_DEGREE_CAP {
        return Err(Error::DegreeCapExceeded {
            degree,
            cap: ORACLE_DEGREE_CAP,
        });
    }
    SeriesOracle::new(r, y, h)?.hermite(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    }

    fn random_params(rng: &mut ChaCha8Rng, dim: usize) -> (ComplexMatrix, Vec<Complex64>) {
        let a = ComplexMatrix::from_fn(dim, dim, |_, _| rand_c(rng));
        let r = a.add(&a.transpose()).unwrap().scale(c(0.5, 0.0));
        let y = (0..dim).map(|_| rand_c(rng)).collect();
        (r, y)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-12)
    }

    #[test]
    fn zero_index_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (r, y) = random_params(&mut rng, 3);
        let p = HermiteParams::from_y(r, &y).unwrap();
        assert_eq!(hermite_eval(&p, &MultiIndex::zeros(3)).unwrap(), c(1.0, 0.0));
    }

    #[test]
    fn unit_index_is_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (r, y) = random_params(&mut rng, 4);
        let p = HermiteParams::from_y(r, &y).unwrap();
        for j in 0..4 {
            let mut n = vec![0; 4];
            n[j] = 1;
            let h = hermite_eval(&p, &MultiIndex::new(n)).unwrap();
            assert!(rel(h, p.z()[j]) < 1e-14);
        }
    }

    #[test]
    fn off_diagonal_second_order() {
        // n = (1,1): z1 z2 - r; oracle by central differences of the
        // generating function at x = 0
        let rr = c(0.3, -0.2);
        let r = ComplexMatrix::from_rows(&[vec![c(0.0, 0.0), rr], vec![rr, c(0.0, 0.0)]]).unwrap();
        let y = vec![c(0.7, 0.1), c(-0.4, 0.5)];
        let gen = |x1: f64, x2: f64| {
            let x = [c(x1, 0.0), c(x2, 0.0)];
            let ry = r.mul_vec(&y).unwrap();
            let quad = x[0] * rr * x[1] * 2.0;
            (ry[0] * x[0] + ry[1] * x[1] - quad * 0.5).exp()
        };
        let h = 1e-3;
        let fd = (gen(h, h) - gen(h, -h) - gen(-h, h) + gen(-h, -h)) / (4.0 * h * h);
        let p = HermiteParams::from_y(r.clone(), &y).unwrap();
        let z = p.z().to_vec();
        let got = hermite_eval(&p, &MultiIndex::new(vec![1, 1])).unwrap();
        assert!(rel(got, z[0] * z[1] - rr) < 1e-14);
        assert!(rel(got, fd) < 1e-5, "{got} vs {fd}");
    }

    #[test]
    fn one_variable_matches_oracle_at_two_radii() {
        let r = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0)]]).unwrap();
        let y = vec![c(2.0, 0.0)];
        let n = MultiIndex::new(vec![2]);
        let p = HermiteParams::from_y(r.clone(), &y).unwrap();
        let exact = hermite_eval(&p, &n).unwrap();
        // R = 1: H_2 = z^2 - 1 = 3
        assert!(rel(exact, c(3.0, 0.0)) < 1e-14);
        let a = hermite_series_oracle(&r, &y, &n, 0.5).unwrap();
        let b = hermite_series_oracle(&r, &y, &n, 0.25).unwrap();
        assert!(rel(a, exact) < 1e-6 && rel(b, exact) < 1e-6);
        assert!(rel(a, b) < 1e-6);
    }

    #[test]
    fn random_two_variable_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (r, y) = random_params(&mut rng, 2);
        let p = HermiteParams::from_y(r.clone(), &y).unwrap();
        let n = MultiIndex::new(vec![2, 1]);
        let got = hermite_eval(&p, &n).unwrap();
        let want = hermite_series_oracle(&r, &y, &n, 0.5).unwrap();
        assert!(rel(got, want) < 1e-6);
        assert_eq!(
            hermite_series_oracle(&r, &y, &MultiIndex::zeros(2), 0.5).unwrap().re.round(),
            1.0
        );
    }

    #[test]
    fn oracle_degree_cap() {
        let r = ComplexMatrix::identity(1);
        let err = hermite_series_oracle(&r, &[c(1.0, 0.0)], &MultiIndex::new(vec![7]), 0.5);
        assert!(matches!(err, Err(Error::DegreeCapExceeded { degree: 7, cap: 6 })));
    }

    #[test]
    fn eval_errors() {
        let p = HermiteParams::new(ComplexMatrix::identity(2), vec![c(1.0, 0.0); 2]).unwrap();
        assert!(matches!(
            hermite_eval(&p, &MultiIndex::new(vec![1])),
            Err(Error::DimensionMismatch { .. })
        ));
        let p = p.with_degree_cap(10);
        assert!(matches!(
            hermite_eval(&p, &MultiIndex::new(vec![6, 5])),
            Err(Error::DegreeCapExceeded { degree: 11, cap: 10 })
        ));
    }

    #[test]
    fn diagonal_r_factorizes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let diag: Vec<Complex64> = (0..3).map(|_| rand_c(&mut rng)).collect();
        let z: Vec<Complex64> = (0..3).map(|_| rand_c(&mut rng)).collect();
        let p = HermiteParams::new(ComplexMatrix::from_diag(&diag), z.clone()).unwrap();
        let n = MultiIndex::new(vec![4, 2, 5]);
        let got = hermite_eval(&p, &n).unwrap();
        let mut want = c(1.0, 0.0);
        for k in 0..3 {
            // one-variable recurrence h_{m+1} = z h_m - R m h_{m-1}
            let (mut prev, mut cur) = (c(0.0, 0.0), c(1.0, 0.0));
            for m in 0..n[k] {
                let next = z[k] * cur - diag[k] * m as f64 * prev;
                prev = cur;
                cur = next;
            }
            want *= cur;
        }
        assert!(rel(got, want) < 1e-10);
    }

    #[test]
    fn lattice_is_lexicographic() {
        let l = MultiIndex::lattice(&[1, 2]);
        let raw: Vec<Vec<usize>> = l.iter().map(|m| m.as_slice().to_vec()).collect();
        assert_eq!(
            raw,
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]
        );
    }

    #[test]
    fn physicists_hermite_low_orders() {
        let x = c(0.3, -0.7);
        assert_eq!(physicists_hermite(0, x), c(1.0, 0.0));
        assert_eq!(physicists_hermite(1, x), x * 2.0);
        let h3 = x * x * x * 8.0 - x * 12.0;
        assert!(rel(physicists_hermite(3, x), h3) < 1e-14);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn permutation_invariance(seed in 0u64..1000, n0 in 0usize..4, n1 in 0usize..4, n2 in 0usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (r, y) = random_params(&mut rng, 3);
            let p = HermiteParams::from_y(r.clone(), &y).unwrap();
            let perm = [2usize, 0, 1];
            let rp = ComplexMatrix::from_fn(3, 3, |i, j| r[(perm[i], perm[j])]);
            let zp: Vec<Complex64> = perm.iter().map(|&i| p.z()[i]).collect();
            let pp = HermiteParams::new(rp, zp).unwrap();
            let n = [n0, n1, n2];
            let np: Vec<usize> = perm.iter().map(|&i| n[i]).collect();
            let a = hermite_eval(&p, &MultiIndex::new(n.to_vec())).unwrap();
            let b = hermite_eval(&pp, &MultiIndex::new(np)).unwrap();
            prop_assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
        }

        #[test]
        fn recurrence_matches_series(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (r, y) = random_params(&mut rng, 2);
            let p = HermiteParams::from_y(r.clone(), &y).unwrap();
            let oracle = SeriesOracle::new(&r, &y, 0.5).unwrap();
            for n in MultiIndex::lattice(&[5, 5]) {
                if n.total_degree() > 5 { continue; }
                let a = hermite_eval(&p, &n).unwrap();
                let b = oracle.hermite(&n).unwrap();
                prop_assert!((a - b).norm() <= 1e-6 * a.norm().max(1e-3), "{:?}: {} vs {}", n, a, b);
            }
        }
    }
}
