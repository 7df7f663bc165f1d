//! Brute-force machinery in a truncated Fock basis, used as independent
//! oracles for the Hermite-polynomial tomogram.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::{DisplacementVector, GaussianState};
use crate::hermite::MultiIndex;
use crate::linalg::{hermitian_eigenvalues, ComplexMatrix, HERMITIAN_TOL};

pub const DEFAULT_CUTOFF: usize = 16;
pub const LAGUERRE_MAX_DEGREE: usize = 512;
/// Two grid refinements may differ by at most this much.
pub const REFINEMENT_TOL: f64 = 1e-6;

const AMPLITUDE_FLOOR: f64 = 1e-18;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `L_n(x)` by `(k+1) L_{k+1} = (2k+1−x) L_k − k L_{k−1}`.
pub fn laguerre_eval(n: usize, x: f64) -> f64 {
    assoc_laguerre(n, 0.0, x)
}

/// Generalized Laguerre polynomial `L_n^{(a)}(x)`.
pub fn assoc_laguerre(n: usize, a: f64, x: f64) -> f64 {
    assert!(n <= LAGUERRE_MAX_DEGREE, "Laguerre degree {n} above {LAGUERRE_MAX_DEGREE}");
    if n == 0 {
        return 1.0;
    }
    let (mut prev, mut cur) = (1.0, 1.0 + a - x);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// All of `L_0(x) … L_n(x)`.
pub fn laguerre_all(n: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    if n >= 1 {
        out.push(1.0 - x);
    }
    for k in 1..n {
        let kf = k as f64;
        out.push(((2.0 * kf + 1.0 - x) * out[k] - kf * out[k - 1]) / (kf + 1.0));
    }
    out
}

/// `⟨m|D(α)|n⟩` from the associated-Laguerre closed form.
pub fn displacement_element(alpha: Complex64, m: usize, n: usize) -> Complex64 {
    let x = alpha.norm_sqr();
    let envelope = (-0.5 * x).exp();
    let (lo, hi, base) = if m >= n {
        (n, m, alpha)
    } else {
        (m, n, -alpha.conj())
    };
    // √(lo!/hi!) base^{hi−lo}, accumulated factor by factor
    let mut ratio = c(1.0, 0.0);
    for k in lo + 1..=hi {
        ratio *= base / (k as f64).sqrt();
    }
    ratio * envelope * assoc_laguerre(lo, (hi - lo) as f64, x)
}

/// Rows `0..rows`, columns `0..cols` of `D(α)`, no truncation guard.
pub fn displacement_block(alpha: Complex64, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |m, n| displacement_element(alpha, m, n))
}

fn truncation_guard(alpha: Complex64, cutoff: usize) -> Result<()> {
    let alpha_sq = alpha.norm_sqr();
    let limit = cutoff as f64 / 4.0;
    if alpha_sq > limit {
        return Err(Error::TruncationRisk { alpha_sq, limit });
    }
    Ok(())
}

/// `D(α)` on `|0⟩ … |M⟩`.
pub fn displacement_matrix(alpha: Complex64, cutoff: usize) -> Result<ComplexMatrix> {
    truncation_guard(alpha, cutoff)?;
    Ok(displacement_block(alpha, cutoff + 1, cutoff + 1))
}

/// Truncated density operator of `N` modes, basis ordered lexicographically
/// by `(n₁, …, n_N)` with each `n_k ≤ cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockMatrix {
    modes: usize,
    cutoff: usize,
    matrix: ComplexMatrix,
}

impl FockMatrix {
    pub fn new(modes: usize, cutoff: usize, matrix: ComplexMatrix) -> Result<Self> {
        let dim = (cutoff + 1).pow(modes as u32);
        if matrix.rows() != dim || matrix.cols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: matrix.rows(),
            });
        }
        let residual = matrix.hermiticity_residual();
        if residual > HERMITIAN_TOL {
            return Err(Error::NotHermitian(residual));
        }
        Ok(Self {
            modes,
            cutoff,
            matrix,
        })
    }

    /// Skips the Hermiticity check (raw reconstruction output).
    pub fn from_raw(modes: usize, cutoff: usize, matrix: ComplexMatrix) -> Self {
        assert_eq!(matrix.rows(), (cutoff + 1).pow(modes as u32));
        Self {
            modes,
            cutoff,
            matrix,
        }
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn basis_index(&self, n: &MultiIndex) -> usize {
        n.as_slice().iter().fold(0, |acc, &k| acc * (self.cutoff + 1) + k)
    }

    pub fn element(&self, m: &MultiIndex, n: &MultiIndex) -> Complex64 {
        self.matrix[(self.basis_index(m), self.basis_index(n))]
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    pub fn trace_deficit(&self) -> f64 {
        1.0 - self.trace()
    }

    pub fn tensor(&self, other: &FockMatrix) -> Result<FockMatrix> {
        if self.cutoff != other.cutoff {
            return Err(Error::DimensionMismatch {
                expected: self.cutoff,
                got: other.cutoff,
            });
        }
        Ok(Self {
            modes: self.modes + other.modes,
            cutoff: self.cutoff,
            matrix: self.matrix.kron(&other.matrix),
        })
    }

    pub fn to_pairs(&self) -> Vec<Vec<[f64; 2]>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReferenceKind {
    Coherent { gamma: [f64; 2] },
    Thermal { nbar: f64 },
    DisplacedSqueezed { r: f64, theta: f64, gamma: [f64; 2] },
    SqueezedThermal { nbar: f64, r: f64, theta: f64, gamma: [f64; 2] },
}

fn pair(z: [f64; 2]) -> Complex64 {
    c(z[0], z[1])
}

/// One-mode analytic density matrix on `|0⟩ … |M⟩`.
pub fn reference_density(kind: ReferenceKind, cutoff: usize) -> Result<FockMatrix> {
    let m = match kind {
        ReferenceKind::Coherent { gamma } => {
            let g = pair(gamma);
            truncation_guard(g, cutoff)?;
            let col: Vec<Complex64> = (0..=cutoff).map(|k| displacement_element(g, k, 0)).collect();
            outer(&col, 1.0)
        }
        ReferenceKind::Thermal { nbar } => {
            check_nbar(nbar)?;
            let diag: Vec<Complex64> = (0..=cutoff)
                .map(|k| c(thermal_weight(nbar, k), 0.0))
                .collect();
            ComplexMatrix::from_diag(&diag)
        }
        ReferenceKind::DisplacedSqueezed { r, theta, gamma } => {
            squeezed_thermal_matrix(0.0, r, theta, pair(gamma), cutoff)?
        }
        ReferenceKind::SqueezedThermal {
            nbar,
            r,
            theta,
            gamma,
        } => squeezed_thermal_matrix(nbar, r, theta, pair(gamma), cutoff)?,
    };
    FockMatrix::new(1, cutoff, m)
}

fn check_nbar(nbar: f64) -> Result<()> {
    if !(nbar > -0.5) || !nbar.is_finite() {
        return Err(Error::InvalidState(format!(
            "thermal weight needs nbar > -1/2, got {nbar}"
        )));
    }
    Ok(())
}

/// `n̄ⁿ/(n̄+1)ⁿ⁺¹`; alternates in sign for `n̄ ∈ (−½, 0)`.
pub fn thermal_weight(nbar: f64, n: usize) -> f64 {
    (nbar / (nbar + 1.0)).powi(n as i32) / (nbar + 1.0)
}

fn outer(v: &[Complex64], weight: f64) -> ComplexMatrix {
    ComplexMatrix::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj() * weight)
}

/// Terms needed before `|ratio|^k` drops below `AMPLITUDE_FLOOR`.
fn decay_length(ratio: f64) -> usize {
    if ratio <= 0.0 {
        return 0;
    }
    (AMPLITUDE_FLOOR.ln() / ratio.ln()).ceil() as usize
}

/// `D(γ) S(ξ) ρ_th S†(ξ) D†(γ)` with `S(ξ) = exp(½(ξ* a² − ξ a†²))` and
/// `ξ = r e^{−iθ}`, so that `σ_pq = (n̄+½) sinh 2r sin θ`. Built in a padded
/// basis and then truncated.
fn squeezed_thermal_matrix(
    nbar: f64,
    r: f64,
    theta: f64,
    gamma: Complex64,
    cutoff: usize,
) -> Result<ComplexMatrix> {
    check_nbar(nbar)?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidSqueezeParams(format!("r must be >= 0, got {r}")));
    }
    truncation_guard(gamma, cutoff)?;
    let thermal_terms = decay_length((nbar / (nbar + 1.0)).abs()) + 1;
    let squeeze_pad = if r > 0.0 { 2 * decay_length(r.tanh()) } else { 0 };
    let dim = cutoff + thermal_terms + squeeze_pad + 40 + 8 * gamma.norm_sqr().ceil() as usize;

    let (ch, sh) = (r.cosh(), r.sinh());
    let phase = c(theta.cos(), -theta.sin());
    // S|0⟩
    let mut col = vec![c(0.0, 0.0); dim];
    col[0] = c(1.0 / ch.sqrt(), 0.0);
    let step = -phase * r.tanh();
    let mut k = 0;
    while k + 2 < dim {
        col[k + 2] = col[k] * step * (((k + 1) as f64) / ((k + 2) as f64)).sqrt();
        k += 2;
    }

    let disp = displacement_block(gamma, cutoff + 1, dim);
    let mut out = ComplexMatrix::zeros(cutoff + 1, cutoff + 1);
    let lower = c(sh, 0.0) * phase.conj();
    for n in 0..thermal_terms {
        if n > 0 {
            // S|n⟩ = (cosh r a† + e^{−iθ} sinh r a) S|n−1⟩ / √n
            let mut next = vec![c(0.0, 0.0); dim];
            for j in 0..dim {
                let mut v = c(0.0, 0.0);
                if j > 0 {
                    v += col[j - 1] * (ch * (j as f64).sqrt());
                }
                if j + 1 < dim {
                    v += col[j + 1] * lower * ((j + 1) as f64).sqrt();
                }
                next[j] = v / (n as f64).sqrt();
            }
            col = next;
        }
        let w = disp.mul_vec(&col)?;
        let weight = thermal_weight(nbar, n);
        for i in 0..=cutoff {
            for j in 0..=cutoff {
                out[(i, j)] += w[i] * w[j].conj() * weight;
            }
        }
    }
    Ok(out.hermitian_part())
}

/// Fock representation of a one-mode or mode-separable Gaussian state.
pub fn density_from_gaussian(state: &GaussianState, cutoff: usize) -> Result<FockMatrix> {
    if !state.is_block_diagonal(1e-14) {
        return Err(Error::InvalidState(
            "Fock construction needs a covariance without inter-mode correlations".into(),
        ));
    }
    let mut rho: Option<FockMatrix> = None;
    for k in 0..state.modes() {
        let kind = one_mode_kind(&state.mode(k))?;
        let part = reference_density(kind, cutoff)?;
        rho = Some(match rho {
            None => part,
            Some(acc) => acc.tensor(&part)?,
        });
    }
    Ok(rho.expect("at least one mode"))
}

/// Williamson form of a one-mode covariance: `n̄ + ½ = √det σ`.
pub fn one_mode_kind(state: &GaussianState) -> Result<ReferenceKind> {
    let (spp, spq, sqq) = state.mode_block(0);
    let det = spp * sqq - spq * spq;
    if !(det > 0.0) {
        return Err(Error::InvalidState(format!("det sigma = {det} is not positive")));
    }
    let nu = det.sqrt();
    let mut cosh2r = (spp + sqq) / (2.0 * nu);
    if cosh2r < 1.0 {
        if cosh2r < 1.0 - 1e-12 {
            return Err(Error::InvalidSqueezeParams(format!("cosh 2r = {cosh2r} < 1")));
        }
        cosh2r = 1.0;
    }
    let r = 0.5 * cosh2r.acosh();
    let theta = if r > 0.0 {
        (spq / nu).atan2((spp - sqq) / (2.0 * nu))
    } else {
        0.0
    };
    let gamma = [state.mean_q()[0] / SQRT_2, state.mean_p()[0] / SQRT_2];
    Ok(ReferenceKind::SqueezedThermal {
        nbar: nu - 0.5,
        r,
        theta,
        gamma,
    })
}

/// `⟨n| D(α) ρ D†(α) |n⟩` with `D` applied mode by mode.
pub fn tomogram_from_fock(rho: &FockMatrix, n: &MultiIndex, alpha: &DisplacementVector) -> Result<f64> {
    if n.len() != rho.modes() || alpha.len() != rho.modes() {
        return Err(Error::DimensionMismatch {
            expected: rho.modes(),
            got: n.len().max(alpha.len()),
        });
    }
    for a in alpha.as_slice() {
        truncation_guard(*a, rho.cutoff())?;
    }
    let width = rho.cutoff() + 1;
    let mut v = vec![c(1.0, 0.0)];
    for (a, &nk) in alpha.as_slice().iter().zip(n.as_slice()) {
        let row: Vec<Complex64> = (0..width).map(|j| displacement_element(*a, nk, j)).collect();
        v = v
            .iter()
            .flat_map(|x| row.iter().map(move |y| x * y))
            .collect();
    }
    let rv = rho.matrix().mul_vec(&v.iter().map(|z| z.conj()).collect::<Vec<_>>())?;
    Ok(v.iter().zip(&rv).map(|(a, b)| a * b).sum::<Complex64>().re)
}

pub fn min_eigenvalue(rho: &FockMatrix) -> Result<f64> {
    Ok(hermitian_eigenvalues(rho.matrix())?[0])
}

/// Cartesian tensor grid for the phase-space oracle. The box is centred on
/// the displaced means and extends `half_width` standard deviations (of the
/// widest quadrature) along every axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureGrid {
    pub spacing: f64,
    pub half_width: f64,
}

impl QuadratureGrid {
    pub fn new(spacing: f64, half_width: f64) -> Result<Self> {
        if !(spacing > 0.0) || !(half_width >= 6.0) || !spacing.is_finite() || !half_width.is_finite() {
            return Err(Error::ConfigInvalid(format!(
                "grid needs spacing > 0 and half-width >= 6, got {spacing}, {half_width}"
            )));
        }
        Ok(Self {
            spacing,
            half_width,
        })
    }

    pub fn one_mode() -> Self {
        Self {
            spacing: 0.05,
            half_width: 8.0,
        }
    }

    pub fn two_mode() -> Self {
        Self {
            spacing: 0.2,
            half_width: 8.0,
        }
    }

    pub fn for_modes(modes: usize) -> Self {
        if modes <= 1 {
            Self::one_mode()
        } else {
            Self::two_mode()
        }
    }

    /// Nodes per axis (always odd) for a box of `extent` natural units.
    fn nodes(&self, extent: f64) -> usize {
        2 * (extent / self.spacing).ceil() as usize + 1
    }
}

/// Quadrature tomogram for every `n ≤ cutoff` at one `α`, at spacing `h` and
/// on the even-node subgrid (spacing `2h`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuadratureTable {
    cutoff: Vec<usize>,
    fine: Vec<f64>,
    coarse: Vec<f64>,
    pub refinement_gap: f64,
    pub nodes_per_axis: usize,
}

impl QuadratureTable {
    fn offset(&self, n: &MultiIndex) -> usize {
        n.as_slice()
            .iter()
            .zip(&self.cutoff)
            .fold(0, |acc, (&k, &m)| {
                assert!(k <= m, "index {k} beyond cutoff {m}");
                acc * (m + 1) + k
            })
    }

    pub fn value(&self, n: &MultiIndex) -> f64 {
        self.fine[self.offset(n)]
    }

    pub fn coarse_value(&self, n: &MultiIndex) -> f64 {
        self.coarse[self.offset(n)]
    }

    pub fn cutoff(&self) -> &[usize] {
        &self.cutoff
    }

    pub fn entries(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        MultiIndex::lattice(&self.cutoff)
            .into_iter()
            .map(|n| {
                let v = self.value(&n);
                (n, v)
            })
    }
}

/// `ω(n, α) = ∫ W_α(q, p) Π_k 2(−1)^{n_k} e^{−r_k²} L_{n_k}(2r_k²) dq_k dp_k/(2π)`,
/// `r_k² = q_k² + p_k²`, with `W_α` the Wigner function of the state displaced
/// by `α`.
pub fn tomogram_quadrature_table(
    state: &GaussianState,
    alpha: &DisplacementVector,
    cutoff: &[usize],
    grid: &QuadratureGrid,
) -> Result<QuadratureTable> {
    let modes = state.modes();
    if cutoff.len() != modes {
        return Err(Error::DimensionMismatch {
            expected: modes,
            got: cutoff.len(),
        });
    }
    let shifted = state.displace(alpha)?;
    let wigner = shifted.wigner()?;
    let sigma = shifted.sigma();
    let widest = (0..2 * modes).map(|i| sigma[(i, i)]).fold(0.0, f64::max).sqrt();
    let nodes = grid.nodes(grid.half_width * widest);
    let h = grid.spacing;
    let mid = (nodes / 2) as f64;
    let axis = |center: f64| -> Vec<f64> { (0..nodes).map(|i| center + (i as f64 - mid) * h).collect() };
    let q_axes: Vec<Vec<f64>> = shifted.mean_q().iter().map(|&m| axis(m)).collect();
    let p_axes: Vec<Vec<f64>> = shifted.mean_p().iter().map(|&m| axis(m)).collect();

    // kernels[k][(iq·nodes + ip)·(M_k+1) + n] = 2(−1)ⁿ e^{−r²} L_n(2r²)
    let kernels: Vec<Vec<f64>> = (0..modes)
        .map(|k| {
            let m = cutoff[k];
            let mut table = Vec::with_capacity(nodes * nodes * (m + 1));
            for &q in &q_axes[k] {
                for &p in &p_axes[k] {
                    let r2 = q * q + p * p;
                    let env = 2.0 * (-r2).exp();
                    for (n, l) in laguerre_all(m, 2.0 * r2).into_iter().enumerate() {
                        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                        table.push(sign * env * l);
                    }
                }
            }
            table
        })
        .collect();

    let lattice = MultiIndex::lattice(cutoff);
    let count = lattice.len();
    let stride = |k: usize| cutoff[k] + 1;
    let inner_nodes = nodes.pow((2 * modes - 1) as u32);

    // Outer axis is q₁; per-slice partial sums are combined in slice order so
    // the result does not depend on the thread count.
    let partials: Vec<(Vec<f64>, Vec<f64>)> = (0..nodes)
        .into_par_iter()
        .map(|i0| {
            let mut fine = vec![0.0; count];
            let mut coarse = vec![0.0; count];
            let mut idx = vec![0usize; 2 * modes];
            let mut q = vec![0.0; modes];
            let mut p = vec![0.0; modes];
            let mut ker = vec![0.0; count];
            for inner in 0..inner_nodes {
                idx[0] = i0;
                let mut rest = inner;
                for a in (1..2 * modes).rev() {
                    idx[a] = rest % nodes;
                    rest /= nodes;
                }
                for k in 0..modes {
                    q[k] = q_axes[k][idx[2 * k]];
                    p[k] = p_axes[k][idx[2 * k + 1]];
                }
                let w = wigner.eval(&q, &p);
                if w == 0.0 {
                    continue;
                }
                kernel_products(&kernels, &idx, nodes, cutoff, &stride, &mut ker);
                let even = idx.iter().all(|i| i % 2 == 0);
                for (j, kv) in ker.iter().enumerate() {
                    let v = w * kv;
                    fine[j] += v;
                    if even {
                        coarse[j] += v;
                    }
                }
            }
            (fine, coarse)
        })
        .collect();

    let mut fine = vec![0.0; count];
    let mut coarse = vec![0.0; count];
    for (f, c2) in &partials {
        for j in 0..count {
            fine[j] += f[j];
            coarse[j] += c2[j];
        }
    }
    let cell = h.powi(2 * modes as i32) / (2.0 * PI).powi(modes as i32);
    let coarse_cell = cell * 4f64.powi(modes as i32);
    fine.iter_mut().for_each(|v| *v *= cell);
    coarse.iter_mut().for_each(|v| *v *= coarse_cell);
    let gap = fine
        .iter()
        .zip(&coarse)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    if gap > REFINEMENT_TOL {
        return Err(Error::GridTooCoarse(gap));
    }
    Ok(QuadratureTable {
        cutoff: cutoff.to_vec(),
        fine,
        coarse,
        refinement_gap: gap,
        nodes_per_axis: nodes,
    })
}

/// `Π_k kernel_k[n_k]` at one node for every `n` in the lattice.
fn kernel_products(
    kernels: &[Vec<f64>],
    idx: &[usize],
    nodes: usize,
    cutoff: &[usize],
    stride: &impl Fn(usize) -> usize,
    out: &mut [f64],
) {
    let modes = kernels.len();
    out[0] = 1.0;
    let mut len = 1;
    for k in 0..modes {
        let base = (idx[2 * k] * nodes + idx[2 * k + 1]) * stride(k);
        let row = &kernels[k][base..base + cutoff[k] + 1];
        // expand in place, last mode fastest
        for j in (0..len).rev() {
            let v = out[j];
            for (n, kv) in row.iter().enumerate() {
                out[j * row.len() + n] = v * kv;
            }
        }
        len *= row.len();
    }
}

pub fn tomogram_by_quadrature(
    state: &GaussianState,
    n: &MultiIndex,
    alpha: &DisplacementVector,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let table = tomogram_quadrature_table(state, alpha, n.as_slice(), grid)?;
    Ok(table.value(n))
}
