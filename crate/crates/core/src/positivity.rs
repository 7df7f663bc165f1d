//! Positivity tests for Gaussian Hermitian operators: uncertainty-relation
//! checks on σ plus scans for negative tomogram values.
//!
//! A scan is a semi-decision procedure. `PassedAllScans` means no witness
//! was found on the scanned grid, nothing more.

use std::cmp::Ordering;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{tomogram_quadrature_table, QuadratureGrid};
use crate::gaussian::{DisplacementVector, GaussianState, Validity, ValidityReport};
use crate::hermite::MultiIndex;
use crate::tomogram::{TomogramBlock, PHOTON_DEGREE_CAP};

pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Square grid of `points × points` values of `α_k` on `[−half_box, half_box]²`
/// for every mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub points: usize,
    pub half_box: f64,
}

impl AlphaGrid {
    pub fn axis(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![0.0];
        }
        let step = 2.0 * self.half_box / (self.points - 1) as f64;
        (0..self.points).map(|i| -self.half_box + step * i as f64).collect()
    }

    pub fn points_for(&self, modes: usize) -> Vec<DisplacementVector> {
        let axis = self.axis();
        let one: Vec<Complex64> = axis
            .iter()
            .flat_map(|&re| axis.iter().map(move |&im| Complex64::new(re, im)))
            .collect();
        let mut out: Vec<Vec<Complex64>> = vec![Vec::new()];
        for _ in 0..modes {
            out = out
                .into_iter()
                .flat_map(|a| {
                    one.iter().map(move |z| {
                        let mut b = a.clone();
                        b.push(*z);
                        b
                    })
                })
                .collect();
        }
        out.into_iter().map(DisplacementVector).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSpec {
    pub n_max: usize,
    pub grid: AlphaGrid,
    pub tolerance: f64,
}

impl Default for ScanSpec {
    fn default() -> Self {
        Self {
            n_max: 15,
            grid: AlphaGrid {
                points: 9,
                half_box: 3.0,
            },
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl ScanSpec {
    fn validate(&self, modes: usize) -> Result<()> {
        if self.grid.points == 0 || !(self.grid.half_box >= 0.0) || !(self.tolerance >= 0.0) {
            return Err(Error::ConfigInvalid(format!("invalid scan spec {self:?}")));
        }
        if self.n_max * modes > PHOTON_DEGREE_CAP {
            return Err(Error::DegreeCapExceeded {
                degree: self.n_max * modes,
                cap: PHOTON_DEGREE_CAP,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: MultiIndex,
    pub alpha: DisplacementVector,
    pub omega: f64,
}

/// Photon numbers first, then distance of `α` from the origin, then `α`.
fn witness_order(a: &Witness, b: &Witness) -> Ordering {
    let key = |w: &Witness| -> (Vec<usize>, Vec<f64>) {
        let mut rest = vec![w.alpha.as_slice().iter().map(|z| z.norm_sqr()).sum()];
        rest.extend(w.alpha.as_slice().iter().flat_map(|z| [z.re, z.im]));
        (w.n.as_slice().to_vec(), rest)
    };
    let (na, ra) = key(a);
    let (nb, rb) = key(b);
    na.cmp(&nb).then_with(|| {
        ra.iter()
            .zip(&rb)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    PassedAllScans,
    NegativeWitnessFound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanPath {
    Hermite,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositivityReport {
    pub uncertainty_checks: ValidityReport,
    pub negative_witnesses: Vec<Witness>,
    pub scan_spec: ScanSpec,
    pub scan_path: ScanPath,
    pub verdict: Verdict,
    /// Failed checks in the order they were evaluated.
    pub failed_checks: Vec<String>,
    pub points_scanned: usize,
}

impl PositivityReport {
    pub fn passed(&self) -> bool {
        self.failed_checks.is_empty()
    }

    pub fn first_witness(&self) -> Option<&Witness> {
        self.negative_witnesses.first()
    }

    fn finish(
        state: &GaussianState,
        spec: ScanSpec,
        path: ScanPath,
        mut witnesses: Vec<Witness>,
        points_scanned: usize,
    ) -> Self {
        witnesses.sort_by(witness_order);
        let checks = state.validate();
        let mut failed = Vec::new();
        for (k, ok) in checks.passes_per_mode.iter().enumerate() {
            if !ok {
                failed.push(format!("per-mode uncertainty relation, mode {}", k + 1));
            }
        }
        if !checks.passes_full {
            failed.push("full covariance determinant".to_string());
        }
        let verdict = if witnesses.is_empty() {
            Verdict::PassedAllScans
        } else {
            failed.push("tomogram negativity".to_string());
            Verdict::NegativeWitnessFound
        };
        debug_assert_eq!(
            checks.verdict == Validity::Valid,
            checks.passes_full && checks.passes_per_mode.iter().all(|&b| b)
        );
        Self {
            uncertainty_checks: checks,
            negative_witnesses: witnesses,
            scan_spec: spec,
            scan_path: path,
            verdict,
            failed_checks: failed,
            points_scanned,
        }
    }
}

fn in_scan(n: &MultiIndex, n_max: usize) -> bool {
    n.total_degree() <= n_max
}

/// Raw (unclamped) Hermite-path tomogram on `{|n| ≤ n_max} × grid`.
pub fn scan_tomogram_negativity(state: &GaussianState, spec: &ScanSpec) -> Result<PositivityReport> {
    spec.validate(state.modes())?;
    let points = spec.grid.points_for(state.modes());
    let cutoff = vec![spec.n_max; state.modes()];
    let per_point: Vec<Result<(Vec<Witness>, usize)>> = points
        .par_iter()
        .map(|alpha| {
            let block = TomogramBlock::new(state, alpha, &cutoff)?;
            let mut found = Vec::new();
            let mut count = 0;
            for (n, omega) in block.entries() {
                if !in_scan(&n, spec.n_max) {
                    continue;
                }
                count += 1;
                if omega < -spec.tolerance {
                    found.push(Witness {
                        n,
                        alpha: alpha.clone(),
                        omega,
                    });
                }
            }
            Ok((found, count))
        })
        .collect();
    collect(state, *spec, ScanPath::Hermite, per_point)
}

fn collect(
    state: &GaussianState,
    spec: ScanSpec,
    path: ScanPath,
    per_point: Vec<Result<(Vec<Witness>, usize)>>,
) -> Result<PositivityReport> {
    let mut witnesses = Vec::new();
    let mut scanned = 0;
    for r in per_point {
        let (w, c) = r?;
        witnesses.extend(w);
        scanned += c;
    }
    Ok(PositivityReport::finish(state, spec, path, witnesses, scanned))
}

/// Uncertainty relations together with the Hermite-path scan.
pub fn gaussian_positivity_report(state: &GaussianState, spec: &ScanSpec) -> Result<PositivityReport> {
    scan_tomogram_negativity(state, spec)
}

/// The same scan with tomogram values from the phase-space quadrature of
/// the Wigner function.
pub fn wigner_admissibility_check(
    state: &GaussianState,
    spec: &ScanSpec,
    grid: &QuadratureGrid,
) -> Result<PositivityReport> {
    if state.modes() > 2 {
        return Err(Error::ConfigInvalid(
            "quadrature scans support at most two modes".into(),
        ));
    }
    spec.validate(state.modes())?;
    let points = spec.grid.points_for(state.modes());
    let cutoff = vec![spec.n_max; state.modes()];
    // The quadrature table is itself parallel, so points run in sequence.
    let per_point: Vec<Result<(Vec<Witness>, usize)>> = points
        .iter()
        .map(|alpha| {
            let table = tomogram_quadrature_table(state, alpha, &cutoff, grid)?;
            let mut found = Vec::new();
            let mut count = 0;
            for (n, omega) in table.entries() {
                if !in_scan(&n, spec.n_max) {
                    continue;
                }
                count += 1;
                if omega < -spec.tolerance {
                    found.push(Witness {
                        n,
                        alpha: alpha.clone(),
                        omega,
                    });
                }
            }
            Ok((found, count))
        })
        .collect();
    collect(state, *spec, ScanPath::Quadrature, per_point)
}
