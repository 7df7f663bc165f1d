use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use tomo_core::error::Error;
use tomo_core::fock::{
    density_from_gaussian, tomogram_from_fock, tomogram_quadrature_table, FockMatrix,
    QuadratureGrid,
};
use tomo_core::gaussian::{DisplacementVector, GaussianState, StateSpec, Validity};
use tomo_core::hermite::MultiIndex;
use tomo_core::positivity::{
    gaussian_positivity_report, wigner_admissibility_check, AlphaGrid, ScanSpec, Verdict,
};
use tomo_core::reconstruction::{
    probe_residual, reconstruct_density, ReconstructionConfig, TabulatedSource, TomogramSource,
};
use tomo_core::tomogram::{build_kernel, tomogram_value, TomogramBlock, PHOTON_DEGREE_CAP};

use crate::output::{csv_string, emit, fmt_sig, json_document, sidecar_path, Manifest};
use crate::parse;
use crate::{
    CompareWith, Format, Oracle, OracleCompareArgs, OracleOptions, P0Args, PositivityArgs,
    ReconstructArgs, ScanPathArg, TomogramArgs,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_REJECTED: u8 = 2;
pub const EXIT_WITNESS: u8 = 3;

#[derive(Debug)]
pub enum Failure {
    Input(String),
    Rejected(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => EXIT_INPUT,
            Failure::Rejected(_) => EXIT_REJECTED,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Rejected(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Rejected(e.to_string())
    }
}

fn input(e: impl Display) -> Failure {
    Failure::Input(e.to_string())
}

fn io_failure(path: &Path, e: impl Display) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

type CmdResult = Result<u8, Failure>;

fn load_state(path: &Path) -> Result<(StateSpec, GaussianState), Failure> {
    let text = fs::read_to_string(path).map_err(|e| io_failure(path, e))?;
    let spec: StateSpec = serde_json::from_str(&text).map_err(|e| io_failure(path, e))?;
    let state = spec.to_state().map_err(|e| io_failure(path, e))?;
    Ok((spec, state))
}

fn alphas_or_origin(
    spec: &Option<String>,
    modes: usize,
) -> Result<Vec<DisplacementVector>, Failure> {
    match spec {
        Some(s) => parse::alpha_points(s, modes).map_err(Failure::Input),
        None => Ok(vec![DisplacementVector::zeros(modes)]),
    }
}

fn pairs(alpha: &DisplacementVector) -> Vec<[f64; 2]> {
    alpha.as_slice().iter().map(|z| [z.re, z.im]).collect()
}

fn stamp(manifest: &mut Manifest, timing: Option<Instant>) {
    manifest.wall_time_ms = timing.map(|t| t.elapsed().as_secs_f64() * 1e3);
}

fn write_json(path: Option<&Path>, manifest: &Manifest, body: Value) -> Result<(), Failure> {
    emit(path, &json_document(manifest, body))
        .map_err(|e| input(format!("cannot write output: {e}")))
}

fn quadrature_grid(opts: &OracleOptions, modes: usize) -> Result<QuadratureGrid, Failure> {
    let default = QuadratureGrid::for_modes(modes);
    Ok(QuadratureGrid::new(
        opts.spacing.unwrap_or(default.spacing),
        opts.half_width,
    )?)
}

fn check_degrees(ns: &[MultiIndex]) -> Result<(), Failure> {
    for n in ns {
        if n.total_degree() > PHOTON_DEGREE_CAP {
            return Err(Failure::Rejected(format!(
                "n = {:?} has total photon number {} above the cap {PHOTON_DEGREE_CAP}",
                n.as_slice(),
                n.total_degree()
            )));
        }
    }
    Ok(())
}

fn per_mode_max(ns: &[MultiIndex], modes: usize) -> Vec<usize> {
    (0..modes)
        .map(|k| ns.iter().map(|n| n[k]).max().unwrap_or(0))
        .collect()
}

/// Clamped tomogram values for every `n` at one `α`.
fn hermite_values(
    state: &GaussianState,
    ns: &[MultiIndex],
    alpha: &DisplacementVector,
) -> Result<Vec<f64>, Error> {
    let cutoff = per_mode_max(ns, state.modes());
    if cutoff.iter().sum::<usize>() <= PHOTON_DEGREE_CAP {
        let block = TomogramBlock::new(state, alpha, &cutoff)?;
        Ok(ns.iter().map(|n| block.value(n)).collect())
    } else {
        ns.iter().map(|n| tomogram_value(state, n, alpha)).collect()
    }
}

pub fn validate(path: &Path, timing: Option<Instant>) -> CmdResult {
    let (spec, state) = load_state(path)?;
    let report = state.validate();
    let mut manifest = Manifest::new("validate", json!({ "state": spec }));
    stamp(&mut manifest, timing);
    write_json(None, &manifest, json!({ "report": report }))?;
    Ok(match report.verdict {
        Validity::Valid => EXIT_OK,
        Validity::NecessaryFailed => EXIT_REJECTED,
    })
}

#[derive(Debug, Serialize)]
struct Row {
    n: Vec<usize>,
    alpha: Vec<[f64; 2]>,
    omega: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    omega_oracle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_delta: Option<f64>,
}

fn csv_header(modes: usize, with_oracle: bool) -> Vec<String> {
    let mut h = Vec::new();
    if modes == 1 {
        h.extend(["n", "re_alpha", "im_alpha"].map(String::from));
    } else {
        h.extend((1..=modes).map(|k| format!("n{k}")));
        for k in 1..=modes {
            h.push(format!("re_alpha{k}"));
            h.push(format!("im_alpha{k}"));
        }
    }
    h.push("omega".into());
    if with_oracle {
        h.push("omega_oracle".into());
        h.push("abs_delta".into());
    }
    h
}

fn csv_row(r: &Row) -> Vec<String> {
    let mut v: Vec<String> = r.n.iter().map(|k| k.to_string()).collect();
    for a in &r.alpha {
        v.push(fmt_sig(a[0]));
        v.push(fmt_sig(a[1]));
    }
    v.push(fmt_sig(r.omega));
    if let (Some(o), Some(d)) = (r.omega_oracle, r.abs_delta) {
        v.push(fmt_sig(o));
        v.push(fmt_sig(d));
    }
    v
}

pub fn tomogram(a: &TomogramArgs, timing: Option<Instant>) -> CmdResult {
    let (spec, state) = load_state(&a.state)?;
    let modes = state.modes();
    let ns = parse::photon_indices(&a.n, modes).map_err(Failure::Input)?;
    let alphas = alphas_or_origin(&a.alpha, modes)?;
    check_degrees(&ns)?;

    let mut params = json!({
        "state": spec,
        "n": ns.iter().map(|n| n.as_slice().to_vec()).collect::<Vec<_>>(),
        "alpha": alphas.iter().map(pairs).collect::<Vec<_>>(),
        "format": format!("{:?}", a.format).to_lowercase(),
        "oracle": format!("{:?}", a.oracle).to_lowercase(),
    });
    let mut warnings = Vec::new();
    let cutoff = per_mode_max(&ns, modes);
    let fock = match a.oracle {
        Oracle::Fock => {
            let rho = density_from_gaussian(&state, a.oracle_options.fock_cutoff)?;
            params["fock_cutoff"] = json!(a.oracle_options.fock_cutoff);
            if rho.trace_deficit().abs() > 1e-10 {
                warnings.push(format!(
                    "Fock oracle trace deficit {:.3e}",
                    rho.trace_deficit()
                ));
            }
            Some(rho)
        }
        _ => None,
    };
    let grid = match a.oracle {
        Oracle::Quadrature => {
            if modes > 2 {
                return Err(Failure::Rejected(
                    "the quadrature oracle supports at most two modes".into(),
                ));
            }
            let g = quadrature_grid(&a.oracle_options, modes)?;
            params["quadrature"] = json!(g);
            Some(g)
        }
        _ => None,
    };

    let per_alpha: Vec<Result<Vec<Row>, Error>> = alphas
        .par_iter()
        .map(|alpha| {
            let values = hermite_values(&state, &ns, alpha)?;
            let oracle: Option<Vec<f64>> = match (&fock, &grid) {
                (Some(rho), _) => Some(
                    ns.iter()
                        .map(|n| tomogram_from_fock(rho, n, alpha))
                        .collect::<Result<_, _>>()?,
                ),
                (None, Some(g)) => {
                    let table = tomogram_quadrature_table(&state, alpha, &cutoff, g)?;
                    Some(ns.iter().map(|n| table.value(n)).collect())
                }
                _ => None,
            };
            Ok(ns
                .iter()
                .enumerate()
                .map(|(i, n)| {
                    let o = oracle.as_ref().map(|o| o[i]);
                    Row {
                        n: n.as_slice().to_vec(),
                        alpha: pairs(alpha),
                        omega: values[i],
                        omega_oracle: o,
                        abs_delta: o.map(|o| (o - values[i]).abs()),
                    }
                })
                .collect())
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_alpha {
        rows.extend(r?);
    }
    let max_delta = rows
        .iter()
        .filter_map(|r| r.abs_delta)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));

    let mut manifest = Manifest::new("tomogram", params);
    manifest.warnings = warnings;
    stamp(&mut manifest, timing);
    let out = a.output.as_deref();
    match a.format {
        Format::Json => write_json(
            out,
            &manifest,
            json!({ "rows": rows, "max_abs_delta": max_delta }),
        )?,
        Format::Csv => {
            let header = csv_header(modes, a.oracle != Oracle::None);
            let body: Vec<Vec<String>> = rows.iter().map(csv_row).collect();
            let text = csv_string(&header, &body).map_err(input)?;
            emit(out, &text).map_err(input)?;
            if let Some(p) = out {
                emit(Some(&sidecar_path(p)), &json_document(&manifest, json!({})))
                    .map_err(input)?;
            }
        }
    }
    Ok(EXIT_OK)
}

fn complex_rows(m: &tomo_core::linalg::ComplexMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

pub fn p0(a: &P0Args, timing: Option<Instant>) -> CmdResult {
    let (spec, state) = load_state(&a.state)?;
    let alphas = alphas_or_origin(&a.alpha, state.modes())?;
    let mut entries = Vec::new();
    for alpha in &alphas {
        let k = build_kernel(&state, alpha)?;
        entries.push(json!({
            "alpha": pairs(alpha),
            "p0": k.p0,
            "r": complex_rows(&k.r),
            "z": k.z.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            "one_mode": k.one_mode,
        }));
    }
    let mut manifest = Manifest::new(
        "p0",
        json!({ "state": spec, "alpha": alphas.iter().map(pairs).collect::<Vec<_>>() }),
    );
    stamp(&mut manifest, timing);
    write_json(
        a.output.as_deref(),
        &manifest,
        json!({ "kernels": entries }),
    )?;
    Ok(EXIT_OK)
}

/// Reads a table written by `tomo tomogram --format csv`.
fn read_tomogram_csv(path: &Path) -> Result<TabulatedSource, Failure> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_failure(path, e))?;
    let headers = reader.headers().map_err(|e| io_failure(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let modes = if col("n").is_some() {
        1
    } else {
        (1..)
            .take_while(|k| col(&format!("n{k}")).is_some())
            .count()
    };
    if modes == 0 {
        return Err(io_failure(
            path,
            "missing photon-number column 'n' (or 'n1', 'n2', …)",
        ));
    }
    let name = |base: &str, k: usize| {
        if modes == 1 {
            base.to_string()
        } else {
            format!("{base}{}", k + 1)
        }
    };
    let find = |h: String| col(&h).ok_or_else(|| io_failure(path, format!("missing column '{h}'")));
    let n_cols: Vec<usize> = (0..modes)
        .map(|k| find(name("n", k)))
        .collect::<Result<_, _>>()?;
    let re_cols: Vec<usize> = (0..modes)
        .map(|k| find(name("re_alpha", k)))
        .collect::<Result<_, _>>()?;
    let im_cols: Vec<usize> = (0..modes)
        .map(|k| find(name("im_alpha", k)))
        .collect::<Result<_, _>>()?;
    let omega_col = find("omega".into())?;

    let mut table = TabulatedSource::new(modes);
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| io_failure(path, e))?;
        let field = |i: usize| record.get(i).unwrap_or("");
        let bad = |what: &str, v: &str| {
            io_failure(path, format!("row {}: invalid {what} '{v}'", line + 2))
        };
        let n: Vec<usize> = n_cols
            .iter()
            .map(|&i| field(i).parse().map_err(|_| bad("photon number", field(i))))
            .collect::<Result<_, _>>()?;
        let mut alpha = Vec::with_capacity(modes);
        for k in 0..modes {
            let re: f64 = field(re_cols[k])
                .parse()
                .map_err(|_| bad("re_alpha", field(re_cols[k])))?;
            let im: f64 = field(im_cols[k])
                .parse()
                .map_err(|_| bad("im_alpha", field(im_cols[k])))?;
            alpha.push(num_complex::Complex64::new(re, im));
        }
        let omega: f64 = field(omega_col)
            .parse()
            .map_err(|_| bad("omega", field(omega_col)))?;
        table
            .insert(&MultiIndex::new(n), &DisplacementVector(alpha), omega)
            .map_err(input)?;
    }
    Ok(table)
}

pub fn reconstruct(a: &ReconstructArgs, timing: Option<Instant>) -> CmdResult {
    let (state, table, source_param) = match (&a.state, &a.tomogram_csv) {
        (Some(p), None) => {
            let (spec, state) = load_state(p)?;
            (Some(state), None, json!({ "state": spec }))
        }
        (None, Some(p)) => {
            let table = read_tomogram_csv(p)?;
            (
                None,
                Some(table),
                json!({ "tomogram_csv": p.display().to_string() }),
            )
        }
        _ => {
            return Err(Failure::Input(
                "give either a state file or --tomogram-csv".into(),
            ))
        }
    };
    let source: &dyn TomogramSource = match (&state, &table) {
        (Some(s), _) => s,
        (None, Some(t)) => t,
        _ => unreachable!("one source is present"),
    };
    let modes = source.modes();

    let mut config = ReconstructionConfig::for_modes(modes);
    if let Some(s) = &a.s {
        config.s = parse::per_mode_reals(s, modes, "--s").map_err(Failure::Input)?;
    }
    if let Some(m) = a.cutoff {
        config.cutoff = m;
    }
    if let Some(g) = &a.grid {
        config.grid = parse::grid_triple(g).map_err(Failure::Input)?;
    }
    if let Some(n) = a.n_max {
        config.n_max = n;
    }
    if let Some(c) = &a.center {
        config.center = Some(parse::complex_per_mode(c, modes).map_err(Failure::Input)?);
    }
    match &state {
        Some(s) => config.validate_for(s)?,
        None => config.validate()?,
    }

    let rec = reconstruct_density(source, &config)?;
    let mut warnings = Vec::new();
    let mut extra = serde_json::Map::new();
    if let Some(s) = &state {
        if s.is_block_diagonal(1e-14) {
            let reference: FockMatrix = density_from_gaussian(s, config.cutoff)?;
            let d = rec.rho.matrix().sub(reference.matrix())?.frobenius_norm();
            extra.insert("frobenius_vs_reference".into(), json!(d));
        }
        match probe_residual(s, &rec.rho) {
            Ok(r) => {
                extra.insert("roundtrip_residual".into(), json!(r));
            }
            Err(e) => warnings.push(format!("round-trip probe skipped: {e}")),
        }
    }
    let mut body = json!({
        "config": config,
        "rho": rec.rho.to_pairs(),
        "trace": rec.diagnostics.trace,
        "min_eigenvalue": rec.diagnostics.min_eigenvalue,
        "hermiticity_residual": rec.diagnostics.hermiticity_residual,
        "nodes": rec.diagnostics.nodes,
    });
    if let Value::Object(b) = &mut body {
        b.extend(extra);
    }
    let mut manifest = Manifest::new(
        "reconstruct",
        json!({ "source": source_param, "config": config }),
    );
    manifest.warnings = warnings;
    stamp(&mut manifest, timing);
    write_json(a.output.as_deref(), &manifest, body)?;
    Ok(EXIT_OK)
}

pub fn positivity(a: &PositivityArgs, timing: Option<Instant>) -> CmdResult {
    let (spec, state) = load_state(&a.state)?;
    if a.resolution == 0 || !(a.alpha_box >= 0.0) || !(a.tolerance >= 0.0) {
        return Err(Failure::Input(
            "--resolution must be positive; --alpha-box and --tolerance non-negative".into(),
        ));
    }
    let scan = ScanSpec {
        n_max: a.n_max,
        grid: AlphaGrid {
            points: a.resolution,
            half_box: a.alpha_box,
        },
        tolerance: a.tolerance,
    };
    let mut params =
        json!({ "state": spec, "scan": scan, "path": format!("{:?}", a.path).to_lowercase() });
    let report = match a.path {
        ScanPathArg::Hermite => gaussian_positivity_report(&state, &scan)?,
        ScanPathArg::Quadrature => {
            let g = quadrature_grid(&a.oracle_options, state.modes())?;
            params["quadrature"] = json!(g);
            wigner_admissibility_check(&state, &scan, &g)?
        }
    };
    let mut manifest = Manifest::new("positivity", params);
    if report.verdict == Verdict::PassedAllScans {
        manifest
            .warnings
            .push("no witness on the scanned grid; this does not certify positivity".into());
    }
    stamp(&mut manifest, timing);
    write_json(a.output.as_deref(), &manifest, json!({ "report": report }))?;
    Ok(match report.verdict {
        Verdict::PassedAllScans => EXIT_OK,
        Verdict::NegativeWitnessFound => EXIT_WITNESS,
    })
}

#[derive(Debug, Serialize)]
struct CompareRow {
    n: Vec<usize>,
    alpha: Vec<[f64; 2]>,
    hermite: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fock: Option<f64>,
}

pub fn oracle_compare(a: &OracleCompareArgs, timing: Option<Instant>) -> CmdResult {
    let (spec, state) = load_state(&a.state)?;
    let modes = state.modes();
    let ns = parse::photon_indices(&a.n, modes).map_err(Failure::Input)?;
    let alphas = alphas_or_origin(&a.alpha, modes)?;
    check_degrees(&ns)?;
    let cutoff = per_mode_max(&ns, modes);

    let mut warnings = Vec::new();
    let mut params = json!({
        "state": spec,
        "n": ns.iter().map(|n| n.as_slice().to_vec()).collect::<Vec<_>>(),
        "alpha": alphas.iter().map(pairs).collect::<Vec<_>>(),
        "tolerance": a.tolerance,
    });
    let want_quad = matches!(a.oracle, CompareWith::Quadrature | CompareWith::Both);
    let want_fock = matches!(a.oracle, CompareWith::Fock | CompareWith::Both);
    let grid = if want_quad {
        if modes > 2 {
            return Err(Failure::Rejected(
                "the quadrature oracle supports at most two modes".into(),
            ));
        }
        let g = quadrature_grid(&a.oracle_options, modes)?;
        params["quadrature"] = json!(g);
        Some(g)
    } else {
        None
    };
    let fock = if want_fock {
        match density_from_gaussian(&state, a.oracle_options.fock_cutoff) {
            Ok(rho) => {
                params["fock_cutoff"] = json!(a.oracle_options.fock_cutoff);
                Some(rho)
            }
            Err(e) if a.oracle == CompareWith::Both => {
                warnings.push(format!("Fock oracle skipped: {e}"));
                None
            }
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };

    let mut rows = Vec::new();
    for alpha in &alphas {
        let values = hermite_values(&state, &ns, alpha)?;
        let quad = match &grid {
            Some(g) => Some(tomogram_quadrature_table(&state, alpha, &cutoff, g)?),
            None => None,
        };
        for (i, n) in ns.iter().enumerate() {
            rows.push(CompareRow {
                n: n.as_slice().to_vec(),
                alpha: pairs(alpha),
                hermite: values[i],
                quadrature: quad.as_ref().map(|t| t.value(n)),
                fock: match &fock {
                    Some(rho) => Some(tomogram_from_fock(rho, n, alpha)?),
                    None => None,
                },
            });
        }
    }
    let max_of = |f: &dyn Fn(&CompareRow) -> Option<f64>| -> Option<f64> {
        rows.iter()
            .filter_map(f)
            .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))))
    };
    let dq = max_of(&|r| r.quadrature.map(|q| (q - r.hermite).abs()));
    let df = max_of(&|r| r.fock.map(|f| (f - r.hermite).abs()));
    let dqf = max_of(&|r| r.quadrature.zip(r.fock).map(|(q, f)| (q - f).abs()));
    let within = [dq, df, dqf].iter().flatten().all(|&d| d <= a.tolerance);

    let mut manifest = Manifest::new("oracle-compare", params);
    manifest.warnings = warnings;
    stamp(&mut manifest, timing);
    let body = json!({
        "rows": rows,
        "max_abs_delta_quadrature": dq,
        "max_abs_delta_fock": df,
        "max_abs_delta_between_oracles": dqf,
        "within_tolerance": within,
    });
    write_json(a.output.as_deref(), &manifest, body)?;
    Ok(if within { EXIT_OK } else { EXIT_REJECTED })
}
