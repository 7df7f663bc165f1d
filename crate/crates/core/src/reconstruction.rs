//! Density-matrix reconstruction from photon-number tomograms:
//!
//! ```text
//! ρ = ∫ Π_k d²α_k/π  Σ_n Π_k [2/(1−s_k)] ((s_k+1)/(s_k−1))^{n_k}  ω(n, α)  T(α)
//! T(α) = Π_k [2/(1+s_k)] D⁻¹(α_k) t_k^{a†a} D(α_k),   t_k = (s_k−1)/(s_k+1)
//! ```
//!
//! `T` does not depend on `n`, so each quadrature node contributes a scalar
//! `Σ_n w(n) ω(n, α)` times a fixed operator.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{tomogram_from_fock, FockMatrix};
use crate::gaussian::{DisplacementVector, GaussianState};
use crate::hermite::MultiIndex;
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix};
use crate::tomogram::TomogramBlock;

pub const DEFAULT_S: f64 = -0.5;
pub const DEFAULT_CUTOFF: usize = 12;
pub const DEFAULT_N_MAX: usize = 20;

/// Gauss–Legendre in `|α − centre|`, trapezoid in angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGrid {
    pub radial: usize,
    pub angular: usize,
    pub max_radius: f64,
}

impl Default for PolarGrid {
    fn default() -> Self {
        Self {
            radial: 40,
            angular: 40,
            max_radius: 4.0,
        }
    }
}

impl PolarGrid {
    /// `(α offset, weight)` pairs; weights include the `1/π` of the measure.
    pub fn nodes(&self) -> Vec<(Complex64, f64)> {
        let (x, w) = gauss_legendre(self.radial);
        let half = 0.5 * self.max_radius;
        let dphi = 2.0 * PI / self.angular as f64;
        let mut out = Vec::with_capacity(self.radial * self.angular);
        for (xi, wi) in x.iter().zip(&w) {
            let r = half * (xi + 1.0);
            let radial_weight = half * wi * r * dphi / PI;
            for j in 0..self.angular {
                let phi = dphi * j as f64;
                out.push((Complex64::from_polar(r, phi), radial_weight));
            }
        }
        out
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionConfig {
    pub s: Vec<f64>,
    pub cutoff: usize,
    pub grid: PolarGrid,
    pub n_max: usize,
    /// Grid centre per mode; `None` centres on `−(⟨q⟩ + i⟨p⟩)/√2` for a
    /// Gaussian source and on the origin otherwise.
    pub center: Option<Vec<[f64; 2]>>,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        Self {
            s: vec![DEFAULT_S],
            cutoff: DEFAULT_CUTOFF,
            grid: PolarGrid::default(),
            n_max: DEFAULT_N_MAX,
            center: None,
        }
    }
}

impl ReconstructionConfig {
    pub fn for_modes(modes: usize) -> Self {
        if modes <= 1 {
            return Self::default();
        }
        Self {
            s: vec![DEFAULT_S; modes],
            cutoff: 4,
            grid: PolarGrid {
                radial: 12,
                angular: 12,
                max_radius: 3.5,
            },
            n_max: 8,
            center: None,
        }
    }

    pub fn modes(&self) -> usize {
        self.s.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.s.is_empty() {
            return Err(Error::ConfigInvalid("s must list one value per mode".into()));
        }
        for &s in &self.s {
            if !(s > -1.0 && s <= 0.0) {
                return Err(Error::ConfigInvalid(format!("s = {s} outside (-1, 0]")));
            }
        }
        if self.cutoff == 0 || self.n_max == 0 {
            return Err(Error::ConfigInvalid("cutoff and n_max must be positive".into()));
        }
        let g = &self.grid;
        if g.radial == 0 || g.angular == 0 || !(g.max_radius > 0.0) || !g.max_radius.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "grid needs positive node counts and radius, got {}x{} radius {}",
                g.radial, g.angular, g.max_radius
            )));
        }
        if let Some(c) = &self.center {
            if c.len() != self.modes() {
                return Err(Error::ConfigInvalid(format!(
                    "center has {} entries for {} modes",
                    c.len(),
                    self.modes()
                )));
            }
        }
        Ok(())
    }

    /// The radius must reach 2 beyond the largest coherent amplitude.
    pub fn validate_for(&self, state: &GaussianState) -> Result<()> {
        self.validate()?;
        if state.modes() != self.modes() {
            return Err(Error::ConfigInvalid(format!(
                "s has {} entries for a {}-mode state",
                self.modes(),
                state.modes()
            )));
        }
        let amp = (0..state.modes())
            .map(|k| state.mean_q()[k].hypot(state.mean_p()[k]) / SQRT_2)
            .fold(0.0, f64::max);
        if self.grid.max_radius < 2.0 + amp {
            return Err(Error::ConfigInvalid(format!(
                "grid radius {} below 2 + max|mean|/sqrt2 = {}",
                self.grid.max_radius,
                2.0 + amp
            )));
        }
        Ok(())
    }
}

/// Anything that yields `ω(n, α)` for all `n_k ≤ n_max` at one `α`, in
/// lexicographic order of `n`.
pub trait TomogramSource: Sync {
    fn modes(&self) -> usize;
    fn block(&self, alpha: &DisplacementVector, n_max: usize) -> Result<Vec<f64>>;
    fn default_center(&self) -> Vec<Complex64> {
        vec![Complex64::new(0.0, 0.0); self.modes()]
    }
}

impl TomogramSource for GaussianState {
    fn modes(&self) -> usize {
        GaussianState::modes(self)
    }

    fn block(&self, alpha: &DisplacementVector, n_max: usize) -> Result<Vec<f64>> {
        let block = TomogramBlock::new(self, alpha, &vec![n_max; self.modes()])?;
        Ok(block.entries().into_iter().map(|(_, v)| v).collect())
    }

    fn default_center(&self) -> Vec<Complex64> {
        self.mean_q()
            .iter()
            .zip(self.mean_p())
            .map(|(&q, &p)| -Complex64::new(q, p) / SQRT_2)
            .collect()
    }
}

/// Adapts a pointwise function `(n, α) → ω`.
pub struct FnSource<F> {
    pub modes: usize,
    pub f: F,
}

impl<F> TomogramSource for FnSource<F>
where
    F: Fn(&MultiIndex, &DisplacementVector) -> f64 + Sync,
{
    fn modes(&self) -> usize {
        self.modes
    }

    fn block(&self, alpha: &DisplacementVector, n_max: usize) -> Result<Vec<f64>> {
        Ok(MultiIndex::lattice(&vec![n_max; self.modes])
            .iter()
            .map(|n| (self.f)(n, alpha))
            .collect())
    }
}

/// Tomogram values looked up from a table keyed by `(n, α)`; `α` is matched
/// after rounding to `1e-9`.
/// Largest per-component gap at which two tabulated `α` are the same point.
pub const ALPHA_MATCH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Default)]
pub struct TabulatedSource {
    modes: usize,
    points: Vec<(Vec<Complex64>, HashMap<Vec<usize>, f64>)>,
}

fn same_alpha(a: &[Complex64], b: &[Complex64]) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x.re - y.re).abs() <= ALPHA_MATCH_TOL && (x.im - y.im).abs() <= ALPHA_MATCH_TOL)
}

impl TabulatedSource {
    pub fn new(modes: usize) -> Self {
        Self {
            modes,
            points: Vec::new(),
        }
    }

    pub fn insert(&mut self, n: &MultiIndex, alpha: &DisplacementVector, value: f64) -> Result<()> {
        if n.len() != self.modes || alpha.len() != self.modes {
            return Err(Error::DimensionMismatch {
                expected: self.modes,
                got: n.len(),
            });
        }
        let a = alpha.as_slice();
        let slot = match self.points.iter().position(|(p, _)| same_alpha(p, a)) {
            Some(i) => i,
            None => {
                self.points.push((a.to_vec(), HashMap::new()));
                self.points.len() - 1
            }
        };
        self.points[slot].1.insert(n.as_slice().to_vec(), value);
        Ok(())
    }

    /// Number of `(n, α)` entries.
    pub fn len(&self) -> usize {
        self.points.iter().map(|(_, v)| v.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl TomogramSource for TabulatedSource {
    fn modes(&self) -> usize {
        self.modes
    }

    fn block(&self, alpha: &DisplacementVector, n_max: usize) -> Result<Vec<f64>> {
        let row = self
            .points
            .iter()
            .find(|(p, _)| same_alpha(p, alpha.as_slice()))
            .map(|(_, v)| v);
        MultiIndex::lattice(&vec![n_max; self.modes])
            .into_iter()
            .map(|n| {
                row.and_then(|v| v.get(n.as_slice()))
                    .copied()
                    .ok_or_else(|| {
                        Error::ConfigInvalid(format!(
                            "tomogram table has no entry for n = {:?}, alpha = {:?}",
                            n.as_slice(),
                            alpha.as_slice()
                        ))
                    })
            })
            .collect()
    }
}

/// Every `(α, weight)` node of the product polar grid, first mode slowest.
pub fn grid_nodes(config: &ReconstructionConfig, center: &[Complex64]) -> Vec<(DisplacementVector, f64)> {
    let one = config.grid.nodes();
    let mut out: Vec<(Vec<Complex64>, f64)> = vec![(Vec::new(), 1.0)];
    for c in center {
        out = out
            .into_iter()
            .flat_map(|(a, w)| {
                one.iter().map(move |(off, wk)| {
                    let mut a2 = a.clone();
                    a2.push(c + off);
                    (a2, w * wk)
                })
            })
            .collect();
    }
    out.into_iter().map(|(a, w)| (DisplacementVector(a), w)).collect()
}

/// `[2/(1+s)] D(−α) t^{a†a} D(α)` on `|0⟩ … |M⟩` from its normal-ordered
/// form `:exp((t−1)(a†−α*)(a−α)):`, which avoids the cancellation in the
/// truncated matrix product.
pub fn t_operator(alpha: Complex64, s: f64, cutoff: usize) -> ComplexMatrix {
    let t = (s - 1.0) / (s + 1.0);
    let c = t - 1.0;
    let pre = 2.0 / (1.0 + s) * (c * alpha.norm_sqr()).exp();
    let mut fact = vec![1.0f64; cutoff + 1];
    for k in 1..=cutoff {
        fact[k] = fact[k - 1] * k as f64;
    }
    let ca = alpha * c;
    let cac = alpha.conj() * c;
    let pa: Vec<Complex64> = (0..=cutoff).map(|k| ca.powu(k as u32)).collect();
    let pac: Vec<Complex64> = (0..=cutoff).map(|k| cac.powu(k as u32)).collect();
    ComplexMatrix::from_fn(cutoff + 1, cutoff + 1, |m, n| {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..=m.min(n) {
            let coef = (fact[m] * fact[n]).sqrt() / (fact[j] * fact[m - j] * fact[n - j]) * t.powi(j as i32);
            acc += pa[m - j] * pac[n - j] * coef;
        }
        acc * pre
    })
}

/// `Π_k [2/(1−s_k)] ((s_k+1)/(s_k−1))^{n_k}` over the lattice.
fn sum_weights(s: &[f64], n_max: usize) -> Vec<f64> {
    MultiIndex::lattice(&vec![n_max; s.len()])
        .iter()
        .map(|n| {
            s.iter()
                .zip(n.as_slice())
                .map(|(&sk, &nk)| 2.0 / (1.0 - sk) * ((sk + 1.0) / (sk - 1.0)).powi(nk as i32))
                .product::<f64>()
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    pub trace: f64,
    pub hermiticity_residual: f64,
    pub min_eigenvalue: f64,
    pub nodes: usize,
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub rho: FockMatrix,
    pub raw: ComplexMatrix,
    pub diagnostics: Diagnostics,
}

pub fn reconstruct_density(source: &dyn TomogramSource, config: &ReconstructionConfig) -> Result<Reconstruction> {
    config.validate()?;
    let modes = source.modes();
    if modes != config.modes() {
        return Err(Error::ConfigInvalid(format!(
            "s has {} entries for a {modes}-mode source",
            config.modes()
        )));
    }
    let center: Vec<Complex64> = match &config.center {
        Some(c) => c.iter().map(|z| Complex64::new(z[0], z[1])).collect(),
        None => source.default_center(),
    };
    let nodes = grid_nodes(config, &center);
    let weights = sum_weights(&config.s, config.n_max);
    let dim = (config.cutoff + 1).pow(modes as u32);
    let per_outer = config.grid.radial * config.grid.angular;
    let inner = nodes.len() / per_outer;

    // One partial sum per node of the first mode, combined in node order.
    let partials: Vec<Result<ComplexMatrix>> = nodes
        .par_chunks(inner)
        .map(|chunk| {
            let mut acc = ComplexMatrix::zeros(dim, dim);
            for (alpha, w) in chunk {
                let omega = source.block(alpha, config.n_max)?;
                let f: f64 = omega.iter().zip(&weights).map(|(o, wn)| o * wn).sum();
                let op = alpha
                    .as_slice()
                    .iter()
                    .zip(&config.s)
                    .map(|(a, &s)| t_operator(*a, s, config.cutoff))
                    .reduce(|a, b| a.kron(&b))
                    .expect("at least one mode");
                acc = acc.add(&op.scale(Complex64::new(w * f, 0.0)))?;
            }
            Ok(acc)
        })
        .collect();
    let mut raw = ComplexMatrix::zeros(dim, dim);
    for p in partials {
        raw = raw.add(&p?)?;
    }

    let hermitian = raw.hermitian_part();
    let diagnostics = Diagnostics {
        trace: raw.trace().re,
        hermiticity_residual: raw.hermiticity_residual(),
        min_eigenvalue: hermitian_eigenvalues(&hermitian)?[0],
        nodes: nodes.len(),
    };
    Ok(Reconstruction {
        rho: FockMatrix::from_raw(modes, config.cutoff, hermitian),
        raw,
        diagnostics,
    })
}

/// Probe displacements relative to the grid centre.
const PROBE_OFFSETS: [(f64, f64); 4] = [(0.0, 0.0), (0.5, 0.3), (-0.5, 0.0), (0.0, -0.4)];

/// Max `|ω_reconstructed − ω|` over `n_k ≤ min(6, M/2)` and a few `α` near
/// the state's centre.
pub fn roundtrip_residual(state: &GaussianState, config: &ReconstructionConfig) -> Result<f64> {
    config.validate_for(state)?;
    let rec = reconstruct_density(state, config)?;
    probe_residual(state, &rec.rho)
}

/// The probe comparison of `roundtrip_residual` for an existing `ρ`.
pub fn probe_residual(state: &GaussianState, rho: &FockMatrix) -> Result<f64> {
    let center = state.default_center();
    let n_probe = 6.min(rho.cutoff() / 2);
    let mut worst: f64 = 0.0;
    for (dr, di) in PROBE_OFFSETS {
        let alpha = DisplacementVector(center.iter().map(|c| c + Complex64::new(dr, di)).collect());
        let block = TomogramBlock::new(state, &alpha, &vec![n_probe; state.modes()])?;
        for (n, exact) in block.entries() {
            let got = tomogram_from_fock(rho, &n, &alpha)?;
            worst = worst.max((got - exact).abs());
        }
    }
    Ok(worst)
}
