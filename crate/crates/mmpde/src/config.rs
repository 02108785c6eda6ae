//! Plain-text `key = value` run configuration: geometry selection, metric
//! choice, energy parameters, flow controls, and output settings.

use std::path::PathBuf;

use crate::energy::EnergyParams;
use crate::error::{Error, Result};
use crate::flow::{BoundaryPolicy, FlowConfig, MetricSelect};
use crate::shapes::{GeometryKind, GeometrySpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MetricKind {
    Identity,
    Curvature,
}

/// Parsed configuration with defaults filled in. `warnings` collects
/// non-fatal diagnostics (currently only the coercivity note).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub geometry: GeometrySpec,
    pub metric_kind: MetricKind,
    pub metric_floor_eps: Option<f64>,
    pub params: EnergyParams,
    pub flow: FlowConfig,
    pub output_dir: PathBuf,
    pub output_every: usize,
    pub warnings: Vec<String>,
}

impl RunConfig {
    pub fn metric_select(&self) -> MetricSelect {
        match self.metric_kind {
            MetricKind::Identity => MetricSelect::Identity,
            MetricKind::Curvature => {
                MetricSelect::Curvature { floor_eps: self.metric_floor_eps, n_smooth: None }
            }
        }
    }
}

fn bad(line: usize, message: String) -> Error {
    Error::Parse { line, message }
}

fn parse_f64(line: usize, key: &str, value: &str) -> Result<f64> {
    value.parse().map_err(|_| bad(line, format!("{key}: expected a number, got {value:?}")))
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize> {
    value.parse().map_err(|_| bad(line, format!("{key}: expected an integer, got {value:?}")))
}

fn parse_u64(line: usize, key: &str, value: &str) -> Result<u64> {
    value.parse().map_err(|_| bad(line, format!("{key}: expected an integer, got {value:?}")))
}

fn parse_bool(line: usize, key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" => Ok(true),
        "false" | "off" | "0" => Ok(false),
        _ => Err(bad(line, format!("{key}: expected true or false, got {value:?}"))),
    }
}

/// Parse a configuration from text. Unknown keys and malformed lines are
/// errors carrying the line number; absent keys fall back to defaults.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut kind_name: Option<(usize, String)> = None;
    let mut r = None;
    let mut c = None;
    let mut n = 100usize;
    let mut n_s = None;
    let mut n_zeta = None;
    let mut seed = 0u64;
    let mut perturb = 0.3;
    let mut metric_kind = MetricKind::Identity;
    let mut metric_floor_eps = None;
    let mut params = EnergyParams::default();
    let mut flow = FlowConfig::default();
    let mut output_dir = PathBuf::from("out");
    let mut output_every = 10usize;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(bad(lineno, format!("expected key = value, got {line:?}")));
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "geometry.kind" => kind_name = Some((lineno, value.to_string())),
            "geometry.r" => r = Some(parse_f64(lineno, key, value)?),
            "geometry.c" => c = Some(parse_f64(lineno, key, value)?),
            "geometry.n" => n = parse_usize(lineno, key, value)?,
            "geometry.n_s" => n_s = Some(parse_usize(lineno, key, value)?),
            "geometry.n_zeta" => n_zeta = Some(parse_usize(lineno, key, value)?),
            "geometry.seed" => seed = parse_u64(lineno, key, value)?,
            "geometry.perturb" => perturb = parse_f64(lineno, key, value)?,
            "metric.kind" => {
                metric_kind = match value {
                    "identity" => MetricKind::Identity,
                    "curvature" => MetricKind::Curvature,
                    _ => {
                        return Err(bad(
                            lineno,
                            format!("metric.kind must be identity or curvature, got {value:?}"),
                        ))
                    }
                }
            }
            "metric.floor_eps" => metric_floor_eps = Some(parse_f64(lineno, key, value)?),
            "energy.p" => params.p = parse_f64(lineno, key, value)?,
            "energy.theta" => params.theta = parse_f64(lineno, key, value)?,
            "flow.tau" => flow.tau = parse_f64(lineno, key, value)?,
            "flow.dt_init" => flow.dt_init = parse_f64(lineno, key, value)?,
            "flow.max_steps" => flow.max_steps = parse_usize(lineno, key, value)?,
            "flow.tol" => flow.tol = parse_f64(lineno, key, value)?,
            "flow.reproject" => flow.reproject = parse_bool(lineno, key, value)?,
            "boundary.policy" => {
                flow.boundary_policy = match value {
                    "free" => BoundaryPolicy::Free,
                    "fixed" => BoundaryPolicy::Fixed,
                    "slide" => BoundaryPolicy::Slide,
                    _ => {
                        return Err(bad(
                            lineno,
                            format!("boundary.policy must be free, fixed or slide, got {value:?}"),
                        ))
                    }
                }
            }
            "output.dir" => output_dir = PathBuf::from(value),
            "output.every" => output_every = parse_usize(lineno, key, value)?,
            _ => return Err(bad(lineno, format!("unknown key {key:?}"))),
        }
    }

    let Some((kind_line, name)) = kind_name else {
        return Err(Error::Config("missing mandatory key geometry.kind".into()));
    };
    let kind = match name.as_str() {
        "circle" => GeometryKind::Circle { r: r.unwrap_or(1.0) },
        "ellipse" => GeometryKind::Ellipse { r: r.unwrap_or(6.0) },
        "lemniscate" => GeometryKind::Lemniscate,
        "cardioid" => GeometryKind::Cardioid,
        "rose" => {
            let r = r.ok_or_else(|| bad(kind_line, "rose requires geometry.r".into()))?;
            let c = c.ok_or_else(|| bad(kind_line, "rose requires geometry.c".into()))?;
            GeometryKind::Rose { r, c }
        }
        "mexican_cap" => GeometryKind::MexicanCap,
        "torus_curve" => GeometryKind::TorusCurve,
        "hyperboloid" => GeometryKind::Hyperboloid,
        "cavatappi" => GeometryKind::Cavatappi,
        _ => return Err(bad(kind_line, format!("unknown geometry kind {name:?}"))),
    };
    let geometry = if kind.param_dim() == 2 {
        let (def_s, def_z) = match kind {
            GeometryKind::Cavatappi => (70, 150),
            _ => (44, 44),
        };
        GeometrySpec::surface(kind, n_s.unwrap_or(def_s), n_zeta.unwrap_or(def_z), seed, perturb)
    } else {
        GeometrySpec::curve(kind, n, seed, perturb)
    };

    params.validate()?;
    flow.validate()?;
    if output_every == 0 {
        return Err(Error::Config("output.every must be positive".into()));
    }
    let mut warnings = Vec::new();
    if !params.coercive() {
        warnings.push("coercivity condition not guaranteed (theta > 0.5)".to_string());
    }
    Ok(RunConfig {
        geometry,
        metric_kind,
        metric_floor_eps,
        params,
        flow,
        output_dir,
        output_every,
        warnings,
    })
}

pub fn read_config(path: &std::path::Path) -> Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
