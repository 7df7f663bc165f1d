//! Photon-number tomograms `ω(n, α) = ⟨n| D(α) ρ D†(α) |n⟩` of Gaussian states.
//!
//! The general path builds the kernel
//!
//! ```text
//! R  = U† (E − 2σ)(E + 2σ)⁻¹ U*
//! z  = 2 U† (E + 2σ)⁻¹ (u, v)ᵀ          (= R·y)
//! P₀ = det(σ + E/2)^{-1/2} exp[−(u, v)(2σ + E)⁻¹(u, v)ᵀ]
//! ```
//!
//! with `u_k = ⟨p_k⟩ + √2 Im α_k`, `v_k = ⟨q_k⟩ + √2 Re α_k`, and evaluates
//! `ω = P₀ H_{nn}(y, y*) / n!`. Writing `z` without `(E − 2σ)⁻¹` keeps pure
//! states (σ = E/2, where `E − 2σ` is singular) on the same code path.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{p_index, q_index, DisplacementVector, GaussianState};
use crate::hermite::{physicists_hermite, HermiteParams, HermiteTable, MultiIndex};
use crate::linalg::{ComplexMatrix, RealMatrix};

/// Cap on the total photon number `|n|` of a tomogram query.
pub const PHOTON_DEGREE_CAP: usize = 64;

/// Hermite variables come in blocks `(y₁…y_N, y₁*…y_N*)` when true,
/// interleaved `(y₁, y₁*, y₂, y₂*, …)` otherwise.
pub const PAIRED_BLOCKS: bool = true;

/// Raw values in `(−CLAMP_TOL, 0)` are reported as zero.
pub const CLAMP_TOL: f64 = 1e-12;

/// Position of `y_k` (or `y_k*` when `conjugate`) among the Hermite variables.
#[inline]
pub fn hermite_position(modes: usize, k: usize, conjugate: bool) -> usize {
    match (PAIRED_BLOCKS, conjugate) {
        (true, false) => k,
        (true, true) => modes + k,
        (false, c) => 2 * k + c as usize,
    }
}

/// The doubled Hermite index carrying `n_k` at both positions of mode `k`.
pub fn hermite_index(n: &MultiIndex) -> MultiIndex {
    let modes = n.len();
    let mut idx = vec![0; 2 * modes];
    for k in 0..modes {
        idx[hermite_position(modes, k, false)] = n[k];
        idx[hermite_position(modes, k, true)] = n[k];
    }
    MultiIndex::new(idx)
}

/// `U`, rows in covariance order, columns in Hermite-variable order.
pub fn u_matrix(modes: usize) -> ComplexMatrix {
    let mut u = ComplexMatrix::zeros(2 * modes, 2 * modes);
    let s = FRAC_1_SQRT_2;
    for k in 0..modes {
        let (p, q) = (p_index(modes, k), q_index(modes, k));
        let (a, b) = (
            hermite_position(modes, k, false),
            hermite_position(modes, k, true),
        );
        u[(p, a)] = Complex64::new(0.0, -s);
        u[(p, b)] = Complex64::new(0.0, s);
        u[(q, a)] = Complex64::new(s, 0.0);
        u[(q, b)] = Complex64::new(s, 0.0);
    }
    u
}

/// One-mode scalars: trace, determinant and `L = 1 + 2T + 4d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OneModeScalars {
    pub trace: f64,
    pub det: f64,
    pub l: f64,
}

#[derive(Debug, Clone)]
pub struct TomogramKernel {
    pub r: ComplexMatrix,
    pub z: Vec<Complex64>,
    pub p0: f64,
    pub one_mode: Option<OneModeScalars>,
}

impl TomogramKernel {
    pub fn hermite_params(&self) -> Result<HermiteParams> {
        HermiteParams::new(self.r.clone(), self.z.clone())
    }

    /// Max deviation from the paired block form `[[A, B], [Bᵀ, A*]]` with
    /// `A = Aᵀ` (checked in Hermite-variable order).
    pub fn pairing_residual(&self) -> f64 {
        let modes = self.z.len() / 2;
        let mut worst: f64 = 0.0;
        for i in 0..modes {
            for j in 0..modes {
                let (ai, aj) = (hermite_position(modes, i, false), hermite_position(modes, j, false));
                let (ci, cj) = (hermite_position(modes, i, true), hermite_position(modes, j, true));
                let a = self.r[(ai, aj)];
                worst = worst.max((a - self.r[(aj, ai)]).norm());
                worst = worst.max((a.conj() - self.r[(ci, cj)]).norm());
                worst = worst.max((self.r[(ai, cj)] - self.r[(cj, ai)]).norm());
            }
            let zi = self.z[hermite_position(modes, i, false)];
            worst = worst.max((zi.conj() - self.z[hermite_position(modes, i, true)]).norm());
        }
        worst
    }
}

/// `(u, v)` stacked in covariance order.
fn shifted_means(state: &GaussianState, alpha: &DisplacementVector) -> Result<Vec<f64>> {
    let modes = state.modes();
    if alpha.len() != modes {
        return Err(Error::DimensionMismatch {
            expected: modes,
            got: alpha.len(),
        });
    }
    let mut w = vec![0.0; 2 * modes];
    for (k, a) in alpha.as_slice().iter().enumerate() {
        w[p_index(modes, k)] = state.mean_p()[k] + SQRT_2 * a.im;
        w[q_index(modes, k)] = state.mean_q()[k] + SQRT_2 * a.re;
    }
    Ok(w)
}

pub fn build_kernel(state: &GaussianState, alpha: &DisplacementVector) -> Result<TomogramKernel> {
    let modes = state.modes();
    let dim = 2 * modes;
    let w = shifted_means(state, alpha)?;
    let sigma = state.sigma().matrix();
    let id = RealMatrix::identity(dim);
    let two_sigma = sigma.scale(2.0);
    let plus = id.add(&two_sigma)?;
    let minus = id.sub(&two_sigma)?;
    let plus_inv = plus.invert()?;

    let u = u_matrix(modes);
    let r = u
        .adjoint()
        .matmul(&minus.matmul(&plus_inv)?.to_complex())?
        .matmul(&u.conj())?;
    let pw = plus_inv.mul_vec(&w)?;
    let pw_c: Vec<Complex64> = pw.iter().map(|&x| Complex64::new(2.0 * x, 0.0)).collect();
    let z = u.adjoint().mul_vec(&pw_c)?;

    let quad: f64 = w.iter().zip(&pw).map(|(a, b)| a * b).sum();
    // det(σ + E/2) = det(E + 2σ) / 2^{2N}
    let det_half = plus.determinant()? / 4f64.powi(modes as i32);
    if !(det_half > 0.0) {
        return Err(Error::InvalidState(format!(
            "det(sigma + E/2) = {det_half} is not positive"
        )));
    }
    let p0 = (-quad).exp() / det_half.sqrt();

    let one_mode = (modes == 1).then(|| {
        let (spp, spq, sqq) = state.mode_block(0);
        let trace = spp + sqq;
        let det = spp * sqq - spq * spq;
        OneModeScalars {
            trace,
            det,
            l: 1.0 + 2.0 * trace + 4.0 * det,
        }
    });

    Ok(TomogramKernel {
        r: ComplexMatrix::from_fn(dim, dim, |i, j| {
            if i == j {
                r[(i, i)]
            } else {
                (r[(i, j)] + r[(j, i)]) * 0.5
            }
        }),
        z,
        p0,
        one_mode,
    })
}

fn check_photon_cap(degree: usize) -> Result<()> {
    if degree > PHOTON_DEGREE_CAP {
        return Err(Error::DegreeCapExceeded {
            degree,
            cap: PHOTON_DEGREE_CAP,
        });
    }
    Ok(())
}

/// Every `ω(n, α)` with `n_k ≤ cutoff_k`, from a single Hermite table.
#[derive(Debug, Clone)]
pub struct TomogramBlock {
    cutoff: Vec<usize>,
    kernel: TomogramKernel,
    table: HermiteTable,
}

impl TomogramBlock {
    pub fn new(state: &GaussianState, alpha: &DisplacementVector, cutoff: &[usize]) -> Result<Self> {
        if cutoff.len() != state.modes() {
            return Err(Error::DimensionMismatch {
                expected: state.modes(),
                got: cutoff.len(),
            });
        }
        check_photon_cap(cutoff.iter().sum())?;
        let kernel = build_kernel(state, alpha)?;
        let max = hermite_index(&MultiIndex::new(cutoff.to_vec()));
        let table = HermiteTable::build(&kernel.hermite_params()?, &max)?;
        Ok(Self {
            cutoff: cutoff.to_vec(),
            kernel,
            table,
        })
    }

    pub fn cutoff(&self) -> &[usize] {
        &self.cutoff
    }

    pub fn kernel(&self) -> &TomogramKernel {
        &self.kernel
    }

    /// `P₀ H_{nn} / n!` before the imaginary part is dropped.
    pub fn complex(&self, n: &MultiIndex) -> Complex64 {
        self.table.scaled(hermite_index(n).as_slice()) * self.kernel.p0
    }

    /// Unclamped real value.
    pub fn raw(&self, n: &MultiIndex) -> f64 {
        let v = self.complex(n);
        debug_assert!(
            v.im.abs() <= 1e-9 * v.re.abs() + 1e-14,
            "tomogram value {v} is not real"
        );
        v.re
    }

    /// Value with roundoff negatives in `(−1e-12, 0)` reported as zero.
    pub fn value(&self, n: &MultiIndex) -> f64 {
        clamp(self.raw(n))
    }

    /// `(n, raw ω)` for every index in the block, lexicographic order.
    pub fn entries(&self) -> Vec<(MultiIndex, f64)> {
        MultiIndex::lattice(&self.cutoff)
            .into_iter()
            .map(|n| {
                let v = self.raw(&n);
                (n, v)
            })
            .collect()
    }
}

fn clamp(v: f64) -> f64 {
    if v < 0.0 && v > -CLAMP_TOL {
        0.0
    } else {
        v
    }
}

/// `P₀ H_{nn}(y, y*) / n!` as a complex number (imaginary part is roundoff).
pub fn tomogram_complex(
    state: &GaussianState,
    n: &MultiIndex,
    alpha: &DisplacementVector,
) -> Result<Complex64> {
    if n.len() != state.modes() {
        return Err(Error::DimensionMismatch {
            expected: state.modes(),
            got: n.len(),
        });
    }
    check_photon_cap(n.total_degree())?;
    let kernel = build_kernel(state, alpha)?;
    let idx = hermite_index(n);
    let table = HermiteTable::build(&kernel.hermite_params()?, &idx)?;
    Ok(table.scaled(idx.as_slice()) * kernel.p0)
}

/// Unclamped tomogram value; negative for non-positive operators.
pub fn tomogram_raw(state: &GaussianState, n: &MultiIndex, alpha: &DisplacementVector) -> Result<f64> {
    Ok(tomogram_complex(state, n, alpha)?.re)
}

/// `ω(n, α)`, tiny roundoff negatives clamped to zero.
pub fn tomogram_value(state: &GaussianState, n: &MultiIndex, alpha: &DisplacementVector) -> Result<f64> {
    tomogram_raw(state, n, alpha).map(clamp)
}

/// Result of summing a tomogram over photon numbers at fixed `α`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizationSum {
    pub sum: f64,
    /// Largest total photon number included.
    pub cutoff: usize,
    pub tail_estimate: f64,
    pub converged: bool,
}

/// Sums `ω(n, α)` over shells of total photon number until a geometric tail
/// estimate drops below `tail_tol`.
pub fn normalization_sum(
    state: &GaussianState,
    alpha: &DisplacementVector,
    tail_tol: f64,
) -> Result<NormalizationSum> {
    let modes = state.modes();
    let shifted = state.displace(alpha)?;
    let mean: f64 = shifted.mean_photons().iter().sum();
    let max_cutoff = PHOTON_DEGREE_CAP / modes;
    let mut cutoff = ((2.0 * mean.max(0.0)).ceil() as usize + 8).min(max_cutoff);
    loop {
        let block = TomogramBlock::new(state, alpha, &vec![cutoff; modes])?;
        let mut shells = vec![0.0; cutoff + 1];
        for (n, v) in block.entries() {
            let deg = n.total_degree();
            if deg <= cutoff {
                shells[deg] += v;
            }
        }
        let sum: f64 = shells.iter().sum();
        // Pairs of shells, so parity-selective states (zero odd shells) are handled.
        let last = shells[cutoff] + shells[cutoff - 1];
        let prev = shells[cutoff - 2] + shells[cutoff - 3];
        let tail = if last <= 0.0 {
            0.0
        } else if prev > 0.0 && last < prev {
            let ratio = last / prev;
            last * ratio / (1.0 - ratio)
        } else {
            f64::INFINITY
        };
        let converged = tail < tail_tol;
        if converged || cutoff >= max_cutoff {
            return Ok(NormalizationSum {
                sum,
                cutoff,
                tail_estimate: tail,
                converged,
            });
        }
        cutoff = (cutoff + 8).min(max_cutoff);
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Closed form for coherent states, mode by mode:
/// `|γ+α|^{2n} e^{−|γ+α|²} / n!`.
pub fn coherent_tomogram(gamma: &[Complex64], n: &MultiIndex, alpha: &DisplacementVector) -> f64 {
    assert_eq!(gamma.len(), n.len(), "gamma and n lengths differ");
    assert_eq!(gamma.len(), alpha.len(), "gamma and alpha lengths differ");
    gamma
        .iter()
        .zip(alpha.as_slice())
        .zip(n.as_slice())
        .map(|((g, a), &nk)| {
            let mag2 = (g + a).norm_sqr();
            if nk == 0 {
                (-mag2).exp()
            } else if mag2 == 0.0 {
                0.0
            } else {
                (nk as f64 * mag2.ln() - mag2 - ln_factorial(nk)).exp()
            }
        })
        .product()
}

/// Squeeze parameters of a one-mode covariance: `cosh 2r = T`,
/// `sin θ = 2σ_pq / √(T² − 1)`, `cos θ = (σ_pp − σ_qq) / √(T² − 1)`.
pub fn squeeze_params_from_sigma(spp: f64, spq: f64, sqq: f64) -> Result<(f64, f64)> {
    let t = spp + sqq;
    if t < 1.0 - 1e-12 {
        return Err(Error::InvalidSqueezeParams(format!(
            "trace {t} < 1 has no real squeeze parameter"
        )));
    }
    let root = (t * t - 1.0).max(0.0).sqrt();
    if root == 0.0 {
        return Ok((0.0, 0.0));
    }
    let sin = 2.0 * spq / root;
    if sin.abs() > 1.0 + 1e-12 {
        return Err(Error::InvalidSqueezeParams(format!("|sin theta| = {}", sin.abs())));
    }
    let cos = (spp - sqq) / root;
    Ok((0.5 * t.max(1.0).acosh(), sin.atan2(cos)))
}

/// Closed form for one-mode squeezed (correlated) states, `r > 0`; `r = 0`
/// falls back to the coherent formula.
pub fn squeezed_tomogram(
    r: f64,
    theta: f64,
    mean_q: f64,
    mean_p: f64,
    n: usize,
    alpha: Complex64,
) -> Result<f64> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidSqueezeParams(format!("r = {r} must be >= 0")));
    }
    if r == 0.0 {
        let gamma = Complex64::new(mean_q, mean_p) * FRAC_1_SQRT_2;
        return Ok(coherent_tomogram(
            &[gamma],
            &MultiIndex::new(vec![n]),
            &DisplacementVector::single(alpha),
        ));
    }
    let p = mean_p + SQRT_2 * alpha.im;
    let q = mean_q + SQRT_2 * alpha.re;
    let th = r.tanh();
    let ln_pref = n as f64 * (th / 2.0).ln() - ln_factorial(n) - r.cosh().ln();
    let expo = th * theta.sin() * p * q
        - 0.5 * p * p * (1.0 - theta.cos() * th)
        - 0.5 * q * q * (1.0 + theta.cos() * th);
    let a = Complex64::new(mean_q, -mean_p) + alpha.conj() * SQRT_2;
    let b = Complex64::new(mean_q, mean_p) + alpha * SQRT_2;
    let arg = Complex64::from_polar(0.5 * th.sqrt(), -theta / 2.0)
        * (a + Complex64::from_polar(1.0 / th, theta) * b);
    let h = physicists_hermite(n, arg);
    Ok((ln_pref + expo).exp() * h.norm_sqr())
}

/// The one-mode formulas written out in scalar form (`R` after the Hermite
/// representation, `y` with denominator `2T − 4d − 1`, and `P₀` with
/// `L = 1 + 2T + 4d`). Reference path for tests; production code goes through
/// [`build_kernel`].
pub mod one_mode_literal {
    use super::*;

    fn scalars(state: &GaussianState) -> (f64, f64, f64, f64, f64, f64) {
        assert_eq!(state.modes(), 1, "one-mode formulas");
        let (spp, spq, sqq) = state.mode_block(0);
        let t = spp + sqq;
        let d = spp * sqq - spq * spq;
        (spp, spq, sqq, t, d, 1.0 + 2.0 * t + 4.0 * d)
    }

    pub fn r_matrix(state: &GaussianState) -> ComplexMatrix {
        let (spp, spq, sqq, _, d, l) = scalars(state);
        let diag = |sign: f64| Complex64::new(2.0 * (spp - sqq), sign * 4.0 * spq) / l;
        let off = Complex64::new((1.0 - 4.0 * d) / l, 0.0);
        let (a, b) = (hermite_position(1, 0, false), hermite_position(1, 0, true));
        let mut r = ComplexMatrix::zeros(2, 2);
        r[(a, a)] = diag(-1.0);
        r[(b, b)] = diag(1.0);
        r[(a, b)] = off;
        r[(b, a)] = off;
        r
    }

    /// `(y₁, y₂ = y₁*)` in Hermite-variable order. Singular for pure states.
    pub fn y_args(state: &GaussianState, alpha: Complex64) -> Vec<Complex64> {
        let (spp, spq, sqq, t, d, _) = scalars(state);
        let (mq, mp) = (state.mean_q()[0], state.mean_p()[0]);
        let first = Complex64::new(mq, -mp) + alpha.conj() * SQRT_2;
        let second = Complex64::new(mq, mp) + alpha * SQRT_2;
        let y1 = (first * (t - 1.0) + Complex64::new(spp - sqq, 2.0 * spq) * second) * SQRT_2
            / (2.0 * t - 4.0 * d - 1.0);
        let mut y = vec![Complex64::new(0.0, 0.0); 2];
        y[hermite_position(1, 0, false)] = y1;
        y[hermite_position(1, 0, true)] = y1.conj();
        y
    }

    pub fn p0(state: &GaussianState, alpha: Complex64) -> f64 {
        let (spp, spq, sqq, _, _, l) = scalars(state);
        let p = state.mean_p()[0] + SQRT_2 * alpha.im;
        let q = state.mean_q()[0] + SQRT_2 * alpha.re;
        2.0 / l.sqrt()
            * (-((2.0 * sqq + 1.0) * p * p + (2.0 * spp + 1.0) * q * q) / l).exp()
            * (4.0 * spq / l * p * q).exp()
    }

    /// `y` from the matrix form `2Uᵀ(E − 2σ)⁻¹(u, v)ᵀ`.
    pub fn y_matrix_form(state: &GaussianState, alpha: &DisplacementVector) -> Result<Vec<Complex64>> {
        let modes = state.modes();
        let w = shifted_means(state, alpha)?;
        let minus = RealMatrix::identity(2 * modes).sub(&state.sigma().matrix().scale(2.0))?;
        let mw: Vec<Complex64> = minus
            .invert()?
            .mul_vec(&w)?
            .into_iter()
            .map(|x| Complex64::new(2.0 * x, 0.0))
            .collect();
        u_matrix(modes).transpose().mul_vec(&mw)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one(n: usize) -> MultiIndex {
        MultiIndex::new(vec![n])
    }

    fn random_valid_one_mode(rng: &mut ChaCha8Rng) -> GaussianState {
        GaussianState::squeezed_thermal(
            rng.gen_range(0.0..1.5),
            rng.gen_range(0.0..0.8),
            rng.gen_range(-3.1..3.1),
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        )
        .unwrap()
    }

    #[test]
    fn vacuum_kernel_is_trivial() {
        let k = build_kernel(&GaussianState::vacuum(1), &DisplacementVector::zeros(1)).unwrap();
        assert!(k.r.max_abs() < 1e-15);
        assert!(k.z.iter().all(|z| z.norm() < 1e-15));
        assert!((k.p0 - 1.0).abs() < 1e-15);
        assert_eq!(k.one_mode.unwrap().l, 4.0);
    }

    #[test]
    fn vacuum_p0_is_gaussian_in_alpha() {
        let a = c(0.7, -1.1);
        let k = build_kernel(&GaussianState::vacuum(1), &DisplacementVector::single(a)).unwrap();
        assert!((k.p0 - (-a.norm_sqr()).exp()).abs() < 1e-15);
    }

    #[test]
    fn vacuum_values() {
        let v = GaussianState::vacuum(1);
        assert_eq!(tomogram_value(&v, &one(0), &DisplacementVector::zeros(1)).unwrap(), 1.0);
        let w = tomogram_value(&v, &one(1), &DisplacementVector::single(c(1.0, 0.0))).unwrap();
        assert!((w - 0.367_879_441_171_442_3).abs() < 1e-14);
    }

    #[test]
    fn thermal_geometric_law() {
        let s = GaussianState::thermal(1.0).unwrap();
        let zero = DisplacementVector::zeros(1);
        assert!((tomogram_value(&s, &one(1), &zero).unwrap() - 0.25).abs() < 1e-14);
        for n in 0..30 {
            let w = tomogram_value(&s, &one(n), &zero).unwrap();
            assert!((w - 0.5f64.powi(n as i32 + 1)).abs() < 1e-14);
        }
    }

    #[test]
    fn coherent_closed_form_examples() {
        let n0 = one(0);
        assert_eq!(coherent_tomogram(&[c(0.0, 0.0)], &n0, &DisplacementVector::zeros(1)), 1.0);
        let v = coherent_tomogram(&[c(0.0, 0.0)], &one(2), &DisplacementVector::single(c(0.0, 1.0)));
        assert!((v - 0.183_939_720_585_721_2).abs() < 1e-14);
        for n in 0..6 {
            let v = coherent_tomogram(&[c(1.0, 0.0)], &one(n), &DisplacementVector::single(c(-1.0, 0.0)));
            assert_eq!(v, if n == 0 { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn squeezed_vacuum_examples() {
        let v0 = squeezed_tomogram(0.5, 0.0, 0.0, 0.0, 0, c(0.0, 0.0)).unwrap();
        assert!((v0 - 1.0 / 0.5f64.cosh()).abs() < 1e-14);
        assert!((v0 - 0.886_818_883_970_074).abs() < 1e-12);
        for n in [1, 3, 5, 7] {
            assert_eq!(squeezed_tomogram(0.5, 0.0, 0.0, 0.0, n, c(0.0, 0.0)).unwrap(), 0.0);
        }
        assert!(squeezed_tomogram(-0.1, 0.0, 0.0, 0.0, 0, c(0.0, 0.0)).is_err());
    }

    #[test]
    fn squeezed_closed_form_matches_general_path() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let (r, theta) = (rng.gen_range(0.05..0.9), rng.gen_range(-3.0..3.0));
            let gamma = c(rng.gen_range(-0.7..0.7), rng.gen_range(-0.7..0.7));
            let s = GaussianState::squeezed_thermal(0.0, r, theta, gamma).unwrap();
            let (spp, spq, sqq) = s.mode_block(0);
            let (r2, th2) = squeeze_params_from_sigma(spp, spq, sqq).unwrap();
            assert!((r2 - r).abs() < 1e-9);
            assert!(((th2 - theta + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-9);
            let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            for n in 0..=10 {
                let closed = squeezed_tomogram(r, theta, s.mean_q()[0], s.mean_p()[0], n, a).unwrap();
                let general = tomogram_value(&s, &one(n), &DisplacementVector::single(a)).unwrap();
                assert!((closed - general).abs() <= 1e-8 * general.max(1e-12), "n={n}: {closed} vs {general}");
            }
        }
    }

    #[test]
    fn squeeze_params_reject_unphysical_correlation() {
        assert!(matches!(
            squeeze_params_from_sigma(0.55, 0.5, 0.55),
            Err(Error::InvalidSqueezeParams(_))
        ));
        assert_eq!(squeeze_params_from_sigma(0.5, 0.0, 0.5).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn literal_one_mode_forms_agree_with_matrix_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..20 {
            let s = random_valid_one_mode(&mut rng);
            let a = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let alpha = DisplacementVector::single(a);
            let k = build_kernel(&s, &alpha).unwrap();
            let rl = one_mode_literal::r_matrix(&s);
            assert!(k.r.sub(&rl).unwrap().max_abs() < 1e-10);
            let p0 = one_mode_literal::p0(&s, a);
            assert!((p0 - k.p0).abs() < 1e-12);
            let sc = k.one_mode.unwrap();
            assert!((s.sigma().add_identity(0.5).determinant() - sc.l / 4.0).abs() < 1e-12);
            // y only exists off the pure-state boundary
            if (sc.det - 0.25).abs() > 1e-3 {
                let y = one_mode_literal::y_args(&s, a);
                let ym = one_mode_literal::y_matrix_form(&s, &alpha).unwrap();
                for (u, v) in y.iter().zip(&ym) {
                    assert!((u - v).norm() <= 1e-9 * v.norm().max(1.0));
                }
                let ry = k.r.mul_vec(&ym).unwrap();
                for (u, v) in ry.iter().zip(&k.z) {
                    assert!((u - v).norm() <= 1e-9 * v.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn kernel_pairing_and_realness() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let two = GaussianState::product(&[random_valid_one_mode(&mut rng), random_valid_one_mode(&mut rng)]).unwrap();
        let alpha = DisplacementVector(vec![c(0.3, -0.2), c(-0.5, 0.4)]);
        let k = build_kernel(&two, &alpha).unwrap();
        assert!(k.pairing_residual() < 1e-10);
        let block = TomogramBlock::new(&two, &alpha, &[4, 4]).unwrap();
        for n in MultiIndex::lattice(&[4, 4]) {
            let v = block.complex(&n);
            assert!(v.im.abs() / (v.re.abs() + 1e-300) <= 1e-9, "{n:?}: {v}");
            assert!((tomogram_value(&two, &n, &alpha).unwrap() - block.value(&n)).abs() < 1e-15);
        }
    }

    #[test]
    fn degree_cap_is_enforced() {
        let v = GaussianState::vacuum(1);
        assert!(matches!(
            tomogram_value(&v, &one(65), &DisplacementVector::zeros(1)),
            Err(Error::DegreeCapExceeded { degree: 65, cap: 64 })
        ));
        assert!(tomogram_value(&v, &one(64), &DisplacementVector::zeros(1)).is_ok());
    }

    #[test]
    fn displacement_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let s = random_valid_one_mode(&mut rng);
            let alpha = DisplacementVector::single(c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)));
            let d = s.displace(&alpha).unwrap();
            for n in 0..8 {
                let a = tomogram_value(&s, &one(n), &alpha).unwrap();
                let b = tomogram_value(&d, &one(n), &DisplacementVector::zeros(1)).unwrap();
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn one_mode_normalization() {
        let states = [
            GaussianState::thermal(1.0).unwrap(),
            GaussianState::squeezed_thermal(0.0, 0.5, 0.7, c(0.0, 0.0)).unwrap(),
            GaussianState::squeezed_thermal(0.3, 0.2, 1.0, c(0.5, -0.4)).unwrap(),
        ];
        for s in &states {
            for a in [c(0.0, 0.0), c(0.5, 0.3), c(-1.0, 0.0)] {
                let sum = normalization_sum(s, &DisplacementVector::single(a), 1e-10).unwrap();
                assert!(sum.converged);
                assert!((sum.sum - 1.0).abs() <= 1e-8, "{sum:?}");
            }
        }
    }

    #[test]
    fn coherent_limit_through_general_path() {
        let gamma = [c(0.8, -0.3)];
        let s = GaussianState::coherent(&gamma);
        let alpha = DisplacementVector::single(c(-0.2, 0.9));
        let block = TomogramBlock::new(&s, &alpha, &[20]).unwrap();
        for n in 0..=20 {
            let want = coherent_tomogram(&gamma, &one(n), &alpha);
            assert!((block.value(&one(n)) - want).abs() < 1e-10);
        }
    }
}
