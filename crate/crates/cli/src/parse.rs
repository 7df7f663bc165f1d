//! Parsers for photon-number and displacement arguments.

use num_complex::Complex64;
use tomo_core::gaussian::DisplacementVector;
use tomo_core::hermite::MultiIndex;
use tomo_core::reconstruction::{grid_nodes, PolarGrid, ReconstructionConfig};

/// `"a..b"` (inclusive), `"a..=b"`, `"a,b,c"` or a single integer.
pub fn photon_list(spec: &str) -> Result<Vec<usize>, String> {
    let spec = spec.trim();
    let int = |s: &str| -> Result<usize, String> {
        s.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid photon number '{s}' in '{spec}'"))
    };
    if let Some((a, b)) = spec.split_once("..") {
        let b = b.strip_prefix('=').unwrap_or(b);
        let (lo, hi) = (int(a)?, int(b)?);
        if lo > hi {
            return Err(format!("empty photon range '{spec}'"));
        }
        return Ok((lo..=hi).collect());
    }
    spec.split(',').map(int).collect()
}

/// One spec applies to every mode; otherwise one spec per mode.
pub fn photon_indices(specs: &[String], modes: usize) -> Result<Vec<MultiIndex>, String> {
    let lists: Vec<Vec<usize>> = match specs.len() {
        1 => vec![photon_list(&specs[0])?; modes],
        k if k == modes => specs
            .iter()
            .map(|s| photon_list(s))
            .collect::<Result<_, _>>()?,
        k => return Err(format!("--n given {k} times for a {modes}-mode state")),
    };
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    for list in &lists {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                list.iter().map(move |&n| {
                    let mut v = prefix.clone();
                    v.push(n);
                    v
                })
            })
            .collect();
    }
    Ok(out.into_iter().map(MultiIndex::new).collect())
}

fn reals(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| format!("invalid number '{}'", x.trim()))
        })
        .collect()
}

/// Displacement points:
///
/// * `re,im;re,im;…`: each point lists `2N` reals (`re₁,im₁,re₂,im₂,…`);
/// * `grid:HALF:POINTS`: square grid on `[−HALF, HALF]²` per mode;
/// * `polar:RADIAL:ANGULAR:RADIUS[:RE:IM]`: the reconstruction grid.
pub fn alpha_points(spec: &str, modes: usize) -> Result<Vec<DisplacementVector>, String> {
    let spec = spec.trim();
    if let Some(rest) = spec.strip_prefix("grid:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 2 {
            return Err(format!("expected grid:HALF:POINTS, got '{spec}'"));
        }
        let half: f64 = parts[0]
            .parse()
            .map_err(|_| format!("invalid grid half-width '{}'", parts[0]))?;
        let points: usize = parts[1]
            .parse()
            .map_err(|_| format!("invalid grid point count '{}'", parts[1]))?;
        if points == 0 {
            return Err("grid needs at least one point".into());
        }
        let grid = tomo_core::positivity::AlphaGrid {
            points,
            half_box: half,
        };
        return Ok(grid.points_for(modes));
    }
    if let Some(rest) = spec.strip_prefix("polar:") {
        let parts = reals(&rest.replace(':', ","))?;
        if parts.len() != 3 && parts.len() != 5 {
            return Err(format!(
                "expected polar:RADIAL:ANGULAR:RADIUS[:RE:IM], got '{spec}'"
            ));
        }
        let config = ReconstructionConfig {
            s: vec![-0.5; modes],
            grid: polar_grid(parts[0], parts[1], parts[2])?,
            ..ReconstructionConfig::default()
        };
        let center = if parts.len() == 5 {
            Complex64::new(parts[3], parts[4])
        } else {
            Complex64::new(0.0, 0.0)
        };
        return Ok(grid_nodes(&config, &vec![center; modes])
            .into_iter()
            .map(|(a, _)| a)
            .collect());
    }
    spec.split(';')
        .map(|point| {
            let v = reals(point)?;
            if v.len() != 2 * modes {
                return Err(format!(
                    "alpha point '{point}' has {} numbers; expected {} (re,im per mode)",
                    v.len(),
                    2 * modes
                ));
            }
            Ok(DisplacementVector(
                v.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect(),
            ))
        })
        .collect()
}

pub fn polar_grid(radial: f64, angular: f64, radius: f64) -> Result<PolarGrid, String> {
    if radial < 1.0 || angular < 1.0 || radial.fract() != 0.0 || angular.fract() != 0.0 {
        return Err(format!(
            "node counts must be positive integers, got {radial}, {angular}"
        ));
    }
    Ok(PolarGrid {
        radial: radial as usize,
        angular: angular as usize,
        max_radius: radius,
    })
}

/// `"RADIAL,ANGULAR,RADIUS"`.
pub fn grid_triple(spec: &str) -> Result<PolarGrid, String> {
    let v = reals(spec)?;
    if v.len() != 3 {
        return Err(format!("expected RADIAL,ANGULAR,RADIUS, got '{spec}'"));
    }
    polar_grid(v[0], v[1], v[2])
}

/// A comma list of reals, replicated when a single value is given.
pub fn per_mode_reals(spec: &str, modes: usize, what: &str) -> Result<Vec<f64>, String> {
    let v = reals(spec)?;
    match v.len() {
        1 => Ok(vec![v[0]; modes]),
        k if k == modes => Ok(v),
        k => Err(format!("{what} has {k} values for {modes} modes")),
    }
}

/// `re,im` per mode.
pub fn complex_per_mode(spec: &str, modes: usize) -> Result<Vec<[f64; 2]>, String> {
    let v = reals(spec)?;
    if v.len() != 2 * modes {
        return Err(format!(
            "expected {} numbers (re,im per mode), got '{spec}'",
            2 * modes
        ));
    }
    Ok(v.chunks(2).map(|p| [p[0], p[1]]).collect())
}
