//! N-mode Gaussian states: quadrature means plus a 2N × 2N covariance.
//!
//! Quadratures are dimensionless with ħ = 1, so the vacuum has σ = E/2. The
//! covariance is ordered `(p₁…p_N, q₁…q_N)`; [`P_BLOCK_FIRST`] is the one
//! switch that decides this layout.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{RealMatrix, RealSymMatrix};

/// Covariance layout: all p quadratures first, then all q quadratures.
pub const P_BLOCK_FIRST: bool = true;

/// Tolerance applied to the uncertainty thresholds in [`GaussianState::validate`].
pub const VALIDITY_TOL: f64 = 1e-12;

/// Row of `p_k` in the covariance matrix.
#[inline]
pub fn p_index(modes: usize, k: usize) -> usize {
    if P_BLOCK_FIRST {
        k
    } else {
        modes + k
    }
}

/// Row of `q_k` in the covariance matrix.
#[inline]
pub fn q_index(modes: usize, k: usize) -> usize {
    if P_BLOCK_FIRST {
        modes + k
    } else {
        k
    }
}

/// Complex amplitudes `α_k` of a tomographic scan point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DisplacementVector(pub Vec<Complex64>);

impl DisplacementVector {
    pub fn zeros(modes: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); modes])
    }

    pub fn single(alpha: Complex64) -> Self {
        Self(vec![alpha])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }
}

impl From<Vec<Complex64>> for DisplacementVector {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    modes: usize,
    mean_p: Vec<f64>,
    mean_q: Vec<f64>,
    sigma: RealSymMatrix,
}

impl GaussianState {
    pub fn new(mean_q: Vec<f64>, mean_p: Vec<f64>, sigma: RealSymMatrix) -> Result<Self> {
        let modes = mean_q.len();
        if modes == 0 {
            return Err(Error::InvalidState("at least one mode is required".into()));
        }
        if mean_p.len() != modes {
            return Err(Error::DimensionMismatch {
                expected: modes,
                got: mean_p.len(),
            });
        }
        if sigma.dim() != 2 * modes {
            return Err(Error::DimensionMismatch {
                expected: 2 * modes,
                got: sigma.dim(),
            });
        }
        for i in 0..sigma.dim() {
            if !(sigma[(i, i)] > 0.0) {
                return Err(Error::InvalidState(format!(
                    "sigma diagonal entry {i} must be positive, got {}",
                    sigma[(i, i)]
                )));
            }
        }
        if mean_q
            .iter()
            .chain(&mean_p)
            .chain(sigma.matrix().as_slice())
            .any(|x| !x.is_finite())
        {
            return Err(Error::InvalidState("non-finite entry".into()));
        }
        Ok(Self {
            modes,
            mean_p,
            mean_q,
            sigma,
        })
    }

    pub fn vacuum(modes: usize) -> Self {
        Self::new(
            vec![0.0; modes],
            vec![0.0; modes],
            RealSymMatrix::identity(2 * modes).scale(0.5),
        )
        .expect("vacuum is well formed")
    }

    /// Coherent state `|γ₁…γ_N⟩`: σ = E/2, ⟨q⟩ = √2 Re γ, ⟨p⟩ = √2 Im γ.
    pub fn coherent(gamma: &[Complex64]) -> Self {
        Self::new(
            gamma.iter().map(|g| SQRT_2 * g.re).collect(),
            gamma.iter().map(|g| SQRT_2 * g.im).collect(),
            RealSymMatrix::identity(2 * gamma.len()).scale(0.5),
        )
        .expect("coherent state is well formed")
    }

    /// One-mode thermal state with mean photon number `nbar`.
    pub fn thermal(nbar: f64) -> Result<Self> {
        Self::squeezed_thermal(nbar, 0.0, 0.0, Complex64::new(0.0, 0.0))
    }

    /// One-mode displaced squeezed thermal state `D(γ) S(r e^{iθ}) ρ_th S† D†`:
    ///
    /// ```text
    /// σ_pp = (n̄+½)(cosh 2r + sinh 2r cos θ)
    /// σ_qq = (n̄+½)(cosh 2r − sinh 2r cos θ)
    /// σ_pq = (n̄+½) sinh 2r sin θ
    /// ```
    pub fn squeezed_thermal(nbar: f64, r: f64, theta: f64, gamma: Complex64) -> Result<Self> {
        let nu = nbar + 0.5;
        let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
        let spp = nu * (ch + sh * theta.cos());
        let sqq = nu * (ch - sh * theta.cos());
        let spq = nu * sh * theta.sin();
        let mut m = RealMatrix::zeros(2, 2);
        m[(p_index(1, 0), p_index(1, 0))] = spp;
        m[(q_index(1, 0), q_index(1, 0))] = sqq;
        m[(0, 1)] = spq;
        m[(1, 0)] = spq;
        Self::new(
            vec![SQRT_2 * gamma.re],
            vec![SQRT_2 * gamma.im],
            RealSymMatrix::new(m)?,
        )
    }

    /// One-mode state from its covariance entries.
    pub fn one_mode(mean_q: f64, mean_p: f64, spp: f64, spq: f64, sqq: f64) -> Result<Self> {
        let mut m = RealMatrix::zeros(2, 2);
        m[(p_index(1, 0), p_index(1, 0))] = spp;
        m[(q_index(1, 0), q_index(1, 0))] = sqq;
        m[(0, 1)] = spq;
        m[(1, 0)] = spq;
        Self::new(vec![mean_q], vec![mean_p], RealSymMatrix::new(m)?)
    }

    /// Tensor product of independent modes (block-diagonal covariance).
    pub fn product(parts: &[GaussianState]) -> Result<Self> {
        let modes: usize = parts.iter().map(|s| s.modes).sum();
        let mut sigma = RealMatrix::zeros(2 * modes, 2 * modes);
        let (mut mean_q, mut mean_p) = (Vec::new(), Vec::new());
        let mut offset = 0;
        for part in parts {
            for a in 0..part.modes {
                for b in 0..part.modes {
                    for (ia, ja) in [(true, true), (true, false), (false, true), (false, false)] {
                        let src_i = if ia { part.p_row(a) } else { part.q_row(a) };
                        let src_j = if ja { part.p_row(b) } else { part.q_row(b) };
                        let dst_i = if ia {
                            p_index(modes, offset + a)
                        } else {
                            q_index(modes, offset + a)
                        };
                        let dst_j = if ja {
                            p_index(modes, offset + b)
                        } else {
                            q_index(modes, offset + b)
                        };
                        sigma[(dst_i, dst_j)] = part.sigma[(src_i, src_j)];
                    }
                }
            }
            mean_q.extend_from_slice(&part.mean_q);
            mean_p.extend_from_slice(&part.mean_p);
            offset += part.modes;
        }
        Self::new(mean_q, mean_p, RealSymMatrix::new(sigma)?)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn mean_q(&self) -> &[f64] {
        &self.mean_q
    }

    pub fn mean_p(&self) -> &[f64] {
        &self.mean_p
    }

    pub fn sigma(&self) -> &RealSymMatrix {
        &self.sigma
    }

    fn p_row(&self, k: usize) -> usize {
        p_index(self.modes, k)
    }

    fn q_row(&self, k: usize) -> usize {
        q_index(self.modes, k)
    }

    /// Means stacked in covariance order.
    pub fn mean_vector(&self) -> Vec<f64> {
        let mut v = vec![0.0; 2 * self.modes];
        for k in 0..self.modes {
            v[self.p_row(k)] = self.mean_p[k];
            v[self.q_row(k)] = self.mean_q[k];
        }
        v
    }

    /// `(σ_pp, σ_pq, σ_qq)` of mode `k`.
    pub fn mode_block(&self, k: usize) -> (f64, f64, f64) {
        let (p, q) = (self.p_row(k), self.q_row(k));
        (self.sigma[(p, p)], self.sigma[(p, q)], self.sigma[(q, q)])
    }

    /// The reduced state of mode `k`.
    pub fn mode(&self, k: usize) -> Self {
        let (spp, spq, sqq) = self.mode_block(k);
        Self::one_mode(self.mean_q[k], self.mean_p[k], spp, spq, sqq)
            .expect("sub-block of a valid covariance")
    }

    /// True when every cross-mode covariance entry is below `tol`.
    pub fn is_block_diagonal(&self, tol: f64) -> bool {
        for a in 0..self.modes {
            for b in 0..self.modes {
                if a == b {
                    continue;
                }
                for i in [self.p_row(a), self.q_row(a)] {
                    for j in [self.p_row(b), self.q_row(b)] {
                        if self.sigma[(i, j)].abs() > tol {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Mean photon number per mode, `(σ_pp + σ_qq + ⟨p⟩² + ⟨q⟩² − 1)/2`.
    pub fn mean_photons(&self) -> Vec<f64> {
        (0..self.modes)
            .map(|k| {
                let (spp, _, sqq) = self.mode_block(k);
                0.5 * (spp + sqq + self.mean_p[k].powi(2) + self.mean_q[k].powi(2) - 1.0)
            })
            .collect()
    }

    /// Shifts `⟨q_k⟩` by `√2 Re α_k` and `⟨p_k⟩` by `√2 Im α_k`.
    pub fn displace(&self, alpha: &DisplacementVector) -> Result<Self> {
        if alpha.len() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                got: alpha.len(),
            });
        }
        let mut out = self.clone();
        for (k, a) in alpha.as_slice().iter().enumerate() {
            out.mean_q[k] += SQRT_2 * a.re;
            out.mean_p[k] += SQRT_2 * a.im;
        }
        Ok(out)
    }

    pub fn wigner(&self) -> Result<WignerFunction> {
        WignerFunction::new(self)
    }

    /// `W(q, p) = det(σ)^{-1/2} exp(−½ Q′σ⁻¹Q′ᵀ)`, normalized so that
    /// `∫ W dq dp / (2π)^N = 1`.
    pub fn wigner_eval(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        if q.len() != self.modes || p.len() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                got: q.len().min(p.len()),
            });
        }
        Ok(self.wigner()?.eval(q, p))
    }

    pub fn validate(&self) -> ValidityReport {
        let per_mode_det: Vec<f64> = (0..self.modes)
            .map(|k| {
                let (spp, spq, sqq) = self.mode_block(k);
                spp * sqq - spq * spq
            })
            .collect();
        let full_det = self.sigma.determinant();
        let passes_per_mode: Vec<bool> = per_mode_det
            .iter()
            .map(|&d| d >= 0.25 - VALIDITY_TOL)
            .collect();
        let passes_full = full_det >= 0.25f64.powi(self.modes as i32) - VALIDITY_TOL;
        let verdict = if passes_full && passes_per_mode.iter().all(|&b| b) {
            Validity::Valid
        } else {
            Validity::NecessaryFailed
        };
        ValidityReport {
            per_mode_det,
            full_det,
            passes_per_mode,
            passes_full,
            verdict,
        }
    }
}

/// Precomputed Gaussian Wigner function for repeated evaluation.
#[derive(Debug, Clone)]
pub struct WignerFunction {
    modes: usize,
    mean: Vec<f64>,
    precision: RealMatrix,
    prefactor: f64,
}

impl WignerFunction {
    pub fn new(state: &GaussianState) -> Result<Self> {
        let precision = state.sigma.invert()?.into_matrix();
        let det = state.sigma.determinant();
        if det <= 0.0 {
            return Err(Error::InvalidState(format!(
                "covariance determinant {det} is not positive"
            )));
        }
        Ok(Self {
            modes: state.modes,
            mean: state.mean_vector(),
            precision,
            prefactor: 1.0 / det.sqrt(),
        })
    }

    /// Evaluates at a phase-space point given in covariance order.
    pub fn eval_point(&self, x: &[f64]) -> f64 {
        let dim = 2 * self.modes;
        let mut quad = 0.0;
        for i in 0..dim {
            let di = x[i] - self.mean[i];
            let row = self.precision.row(i);
            let mut acc = 0.0;
            for j in 0..dim {
                acc += row[j] * (x[j] - self.mean[j]);
            }
            quad += di * acc;
        }
        self.prefactor * (-0.5 * quad).exp()
    }

    pub fn eval(&self, q: &[f64], p: &[f64]) -> f64 {
        let mut x = vec![0.0; 2 * self.modes];
        for k in 0..self.modes {
            x[p_index(self.modes, k)] = p[k];
            x[q_index(self.modes, k)] = q[k];
        }
        self.eval_point(&x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Validity {
    Valid,
    NecessaryFailed,
}

/// Uncertainty-relation checks on a covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidityReport {
    pub per_mode_det: Vec<f64>,
    pub full_det: f64,
    pub passes_per_mode: Vec<bool>,
    pub passes_full: bool,
    pub verdict: Validity,
}

/// JSON form of a state:
/// `{"modes": N, "mean_q": [...], "mean_p": [...], "sigma": [[...]], "label": "..."}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    pub modes: usize,
    pub mean_q: Vec<f64>,
    pub mean_p: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl StateSpec {
    /// Strict shape validation; messages name the offending field.
    pub fn to_state(&self) -> Result<GaussianState> {
        let n = self.modes;
        if n == 0 {
            return Err(Error::InvalidState("modes must be at least 1".into()));
        }
        if self.mean_q.len() != n {
            return Err(Error::InvalidState(format!(
                "mean_q must have {n} entries, got {}",
                self.mean_q.len()
            )));
        }
        if self.mean_p.len() != n {
            return Err(Error::InvalidState(format!(
                "mean_p must have {n} entries, got {}",
                self.mean_p.len()
            )));
        }
        if self.sigma.len() != 2 * n || self.sigma.iter().any(|row| row.len() != 2 * n) {
            return Err(Error::InvalidState(format!(
                "sigma must be 2N×2N ({0}×{0} for {n} modes)",
                2 * n
            )));
        }
        for i in 0..2 * n {
            for j in 0..i {
                let (a, b) = (self.sigma[i][j], self.sigma[j][i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(Error::InvalidState(format!(
                        "sigma must be symmetric: sigma[{i}][{j}] = {a} but sigma[{j}][{i}] = {b}"
                    )));
                }
            }
        }
        GaussianState::new(
            self.mean_q.clone(),
            self.mean_p.clone(),
            RealSymMatrix::from_rows(&self.sigma)?,
        )
        .map_err(|e| match e {
            Error::InvalidState(msg) => Error::InvalidState(format!("sigma: {msg}")),
            other => other,
        })
    }

    pub fn from_state(state: &GaussianState, label: Option<String>) -> Self {
        Self {
            modes: state.modes(),
            mean_q: state.mean_q().to_vec(),
            mean_p: state.mean_p().to_vec(),
            sigma: state.sigma().to_rows(),
            label,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn vacuum_wigner_at_origin() {
        let v = GaussianState::vacuum(1);
        assert_eq!(v.wigner_eval(&[0.0], &[0.0]).unwrap(), 2.0);
    }

    #[test]
    fn shifted_vacuum_wigner() {
        let s = GaussianState::new(vec![1.0], vec![0.0], RealSymMatrix::identity(2).scale(0.5)).unwrap();
        let w = s.wigner_eval(&[0.0], &[0.0]).unwrap();
        assert!((w - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn wigner_at_mean_is_prefactor() {
        let s = GaussianState::one_mode(0.3, -0.7, 1.2, 0.4, 0.8).unwrap();
        let w = s.wigner_eval(&[0.3], &[-0.7]).unwrap();
        let det: f64 = 1.2 * 0.8 - 0.16;
        assert!((w - 1.0 / det.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn displacement_rules() {
        let v = GaussianState::vacuum(1);
        assert_eq!(v.displace(&DisplacementVector::zeros(1)).unwrap(), v);
        let d = v.displace(&DisplacementVector::single(c(1.0, 0.0))).unwrap();
        assert_eq!(d.mean_q(), &[SQRT_2]);
        assert_eq!(d.mean_p(), &[0.0]);
        assert!(matches!(
            v.displace(&DisplacementVector::zeros(2)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn validity_examples() {
        let r = GaussianState::vacuum(1).validate();
        assert_eq!(r.per_mode_det, vec![0.25]);
        assert_eq!(r.verdict, Validity::Valid);

        let s = GaussianState::one_mode(0.0, 0.0, 0.4, 0.0, 0.4).unwrap();
        let r = s.validate();
        assert!((r.per_mode_det[0] - 0.16).abs() < 1e-15);
        assert_eq!(r.verdict, Validity::NecessaryFailed);

        let r = GaussianState::vacuum(2).validate();
        assert!((r.full_det - 0.0625).abs() < 1e-15);
        assert_eq!(r.verdict, Validity::Valid);
    }

    #[test]
    fn product_layout() {
        let a = GaussianState::one_mode(1.0, 2.0, 0.5, 0.1, 0.7).unwrap();
        let b = GaussianState::one_mode(-1.0, 0.0, 0.9, -0.2, 0.6).unwrap();
        let s = GaussianState::product(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(s.mode_block(0), a.mode_block(0));
        assert_eq!(s.mode_block(1), b.mode_block(0));
        assert!(s.is_block_diagonal(0.0));
        assert_eq!(s.mean_q(), &[1.0, -1.0]);
        assert_eq!(s.mode(1), b);
    }

    #[test]
    fn squeezed_covariance_is_pure() {
        let s = GaussianState::squeezed_thermal(0.0, 0.5, 0.7, c(0.0, 0.0)).unwrap();
        assert!((s.validate().per_mode_det[0] - 0.25).abs() < 1e-14);
        let s = GaussianState::thermal(1.0).unwrap();
        assert_eq!(s.mode_block(0), (1.5, 0.0, 1.5));
        assert_eq!(s.mean_photons(), vec![1.0]);
    }

    #[test]
    fn spec_shape_errors_name_fields() {
        let spec = StateSpec {
            modes: 1,
            mean_q: vec![0.0],
            mean_p: vec![0.0],
            sigma: vec![vec![0.5, 0.0, 0.0]; 3],
            label: None,
        };
        let msg = spec.to_state().unwrap_err().to_string();
        assert!(msg.contains("sigma must be 2N×2N"), "{msg}");
        let spec = StateSpec {
            mean_p: vec![],
            sigma: vec![vec![0.5, 0.0], vec![0.0, 0.5]],
            ..spec
        };
        assert!(spec.to_state().unwrap_err().to_string().contains("mean_p"));
    }

    fn trapezoid_norm(state: &GaussianState, h: f64) -> f64 {
        let w = state.wigner().unwrap();
        let n = state.modes();
        let half = 6.0 * (0..2 * n).map(|i| state.sigma()[(i, i)].sqrt()).fold(0.0, f64::max);
        let pts = (2.0 * half / h).round() as usize + 1;
        let total = pts.pow(2 * n as u32);
        let mut sum = 0.0;
        let mut x = vec![0.0; 2 * n];
        let mean = state.mean_vector();
        for flat in 0..total {
            let mut rem = flat;
            for d in 0..2 * n {
                x[d] = mean[d] - half + (rem % pts) as f64 * h;
                rem /= pts;
            }
            sum += w.eval_point(&x);
        }
        sum * h.powi(2 * n as i32) / (2.0 * PI).powi(n as i32)
    }

    #[test]
    fn wigner_normalization_one_and_two_modes() {
        let s = GaussianState::one_mode(0.4, -0.2, 1.1, 0.3, 0.6).unwrap();
        assert!((trapezoid_norm(&s, 0.05) - 1.0).abs() < 1e-4);
        let two = GaussianState::product(&[
            GaussianState::vacuum(1),
            GaussianState::thermal(0.5).unwrap(),
        ])
        .unwrap();
        assert!((trapezoid_norm(&two, 0.25) - 1.0).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn displaced_wigner_is_shifted(
            ar in -2.0f64..2.0, ai in -2.0f64..2.0, q in -3.0f64..3.0, p in -3.0f64..3.0,
            spp in 0.3f64..2.0, sqq in 0.3f64..2.0, spq in -0.25f64..0.25,
        ) {
            let s = GaussianState::one_mode(0.2, -0.1, spp, spq, sqq).unwrap();
            let alpha = DisplacementVector::single(c(ar, ai));
            let d = s.displace(&alpha).unwrap();
            let lhs = d.wigner_eval(&[q + SQRT_2 * ar], &[p + SQRT_2 * ai]).unwrap();
            let rhs = s.wigner_eval(&[q], &[p]).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1e-300));
        }

        #[test]
        fn validity_is_displacement_invariant(
            ar in -2.0f64..2.0, ai in -2.0f64..2.0,
            spp in 0.2f64..2.0, sqq in 0.2f64..2.0, spq in -0.2f64..0.2,
        ) {
            let s = GaussianState::one_mode(0.0, 0.0, spp, spq, sqq).unwrap();
            let d = s.displace(&DisplacementVector::single(c(ar, ai))).unwrap();
            prop_assert_eq!(s.validate(), d.validate());
        }
    }
}
