use std::fmt;

use floquet_pt::ModelConfig;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::CliError;

const MODEL_KEYS: &[&str] = &[
    "n_sites", "a", "b", "j_hop", "amplitude", "omega", "m0", "gamma", "co_driven", "theta",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisName {
    #[serde(rename = "m0")]
    M0,
    #[serde(rename = "A_over_omega")]
    AOverOmega,
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "gamma")]
    Gamma,
    /// Initial time in units of the period.
    #[serde(rename = "tau")]
    Tau,
}

impl fmt::Display for AxisName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AxisName::M0 => "m0",
            AxisName::AOverOmega => "A_over_omega",
            AxisName::Omega => "omega",
            AxisName::Gamma => "gamma",
            AxisName::Tau => "tau",
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSpec {
    pub name: AxisName,
    pub values: Option<Vec<f64>>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Axis {
    pub name: AxisName,
    pub values: Vec<f64>,
}

impl AxisSpec {
    fn resolve(&self) -> Result<Axis, CliError> {
        let values = match (&self.values, self.min, self.max, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(n)) => {
                if n == 0 {
                    return Err(CliError::Schema(format!("axis {}: count must be at least 1", self.name)));
                }
                if n == 1 {
                    vec![lo]
                } else {
                    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
                }
            }
            _ => {
                return Err(CliError::Schema(format!(
                    "axis {}: give either `values` or all of `min`, `max`, `count`",
                    self.name
                )))
            }
        };
        if values.is_empty() {
            return Err(CliError::Schema(format!("axis {} has no values", self.name)));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Schema(format!("axis {} has a non-finite value", self.name)));
        }
        Ok(Axis {
            name: self.name,
            values,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    GammaC,
    Winding,
    GammaTotal,
    SigmaZMax,
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantity::GammaC => "gamma_c",
            Quantity::Winding => "winding",
            Quantity::GammaTotal => "gamma_total",
            Quantity::SigmaZMax => "sigma_z_max",
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub x_axis: AxisSpec,
    pub y_axis: Option<AxisSpec>,
    pub quantity: Option<Quantity>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub x: Axis,
    pub y: Option<Axis>,
    pub quantity: Option<Quantity>,
}

impl Grid {
    pub fn len(&self) -> usize {
        self.x.values.len() * self.y.as_ref().map_or(1, |y| y.values.len())
    }

    /// Axis assignments of point `index`, y outer and x inner.
    pub fn point(&self, index: usize) -> Vec<(AxisName, f64)> {
        let nx = self.x.values.len();
        let mut out = vec![(self.x.name, self.x.values[index % nx])];
        if let Some(y) = &self.y {
            out.push((y.name, y.values[index / nx]));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSpec {
    pub qe_tol: f64,
    pub cutoff: f64,
    pub coarse_step: f64,
    pub refine_tol: f64,
    pub gamma_max: f64,
    pub n_k: usize,
    /// Initial time in units of the period.
    pub tau: f64,
    pub n_samples: usize,
    pub max_steps: Option<usize>,
}

impl Default for EngineSpec {
    fn default() -> Self {
        Self {
            qe_tol: 1e-10,
            cutoff: 1e-7,
            coarse_step: 0.02,
            refine_tol: 1e-3,
            gamma_max: 2.0,
            n_k: 128,
            tau: 0.0,
            n_samples: 65,
            max_steps: None,
        }
    }
}

/// A parsed job file: the base model, the drive ratio kept fixed when ω is
/// swept, an optional grid and the engine settings.
#[derive(Clone, Debug)]
pub struct JobConfig {
    pub base: ModelConfig,
    pub ratio: f64,
    pub grid: Option<Grid>,
    pub engine: EngineSpec,
    pub resolution: &'static str,
}

fn schema<E: fmt::Display>(e: E) -> CliError {
    CliError::Schema(e.to_string())
}

impl JobConfig {
    pub fn parse(text: &str, full: bool) -> Result<Self, CliError> {
        let value: Value = serde_json::from_str(text).map_err(schema)?;
        let Value::Object(mut obj) = value else {
            return Err(CliError::Schema("top level must be a JSON object".into()));
        };
        let sweep = obj.remove("sweep");
        let sweep_full = obj.remove("sweep_full");
        let engine = obj.remove("engine");
        let ratio_key = obj.remove("A_over_omega");

        for key in obj.keys() {
            if !MODEL_KEYS.contains(&key.as_str()) {
                return Err(CliError::Schema(format!("unknown key `{key}`")));
            }
        }
        let ratio = match (ratio_key, obj.contains_key("amplitude")) {
            (Some(_), true) => return Err(CliError::Schema("give `amplitude` or `A_over_omega`, not both".into())),
            (Some(r), false) => {
                let r = r.as_f64().ok_or_else(|| CliError::Schema("`A_over_omega` must be a number".into()))?;
                let omega = obj
                    .get("omega")
                    .and_then(Value::as_f64)
                    .ok_or_else(|| CliError::Schema("`omega` must be a number".into()))?;
                obj.insert("amplitude".into(), Value::from(r * omega));
                Some(r)
            }
            (None, _) => None,
        };
        let base: ModelConfig = serde_json::from_value(Value::Object(obj)).map_err(schema)?;
        base.validate()?;
        let ratio = ratio.unwrap_or(base.drive.amplitude / base.drive.omega);

        let (chosen, resolution) = match (full, sweep_full) {
            (true, Some(s)) => (Some(s), "full"),
            (true, None) => (sweep, "as_configured"),
            (false, s) => {
                let res = if s.is_some() { "reduced" } else { "as_configured" };
                (sweep, res)
            }
        };
        let grid = chosen
            .map(|s| -> Result<Grid, CliError> {
                let spec: SweepSpec = serde_json::from_value(s).map_err(schema)?;
                let x = spec.x_axis.resolve()?;
                let y = spec.y_axis.as_ref().map(AxisSpec::resolve).transpose()?;
                if y.as_ref().is_some_and(|y| y.name == x.name) {
                    return Err(CliError::Schema("axis names must be distinct".into()));
                }
                Ok(Grid {
                    x,
                    y,
                    quantity: spec.quantity,
                })
            })
            .transpose()?;
        let engine: EngineSpec = engine
            .map(serde_json::from_value)
            .transpose()
            .map_err(schema)?
            .unwrap_or_default();
        if engine.n_k < 64 {
            return Err(CliError::Schema("engine.n_k must be at least 64".into()));
        }
        if engine.n_samples < 16 {
            return Err(CliError::Schema("engine.n_samples must be at least 16".into()));
        }
        if !(engine.qe_tol > 0.0) {
            return Err(CliError::Schema("engine.qe_tol must be positive".into()));
        }
        let job = Self {
            base,
            ratio,
            grid,
            engine,
            resolution,
        };
        if let Some(grid) = &job.grid {
            for i in 0..grid.len() {
                job.model_at(&grid.point(i))?;
            }
        }
        Ok(job)
    }

    /// Model and initial time (in units of T) at a set of axis assignments.
    pub fn model_at(&self, assign: &[(AxisName, f64)]) -> Result<(ModelConfig, f64), CliError> {
        let mut m = self.base;
        let mut ratio = self.ratio;
        let mut tau = self.engine.tau;
        for &(name, v) in assign {
            match name {
                AxisName::M0 => {
                    let half = m.n_sites().div_ceil(2);
                    if v.fract() != 0.0 || v < 1.0 || v > half as f64 {
                        return Err(CliError::Schema(format!("m0 = {v} is not an integer in [1, {half}]")));
                    }
                    m.defect.m0 = v as usize;
                }
                AxisName::AOverOmega => ratio = v,
                AxisName::Omega => m.drive.omega = v,
                AxisName::Gamma => m.defect.gamma = v,
                AxisName::Tau => tau = v,
            }
        }
        m.drive.amplitude = ratio * m.drive.omega;
        m.validate()?;
        Ok((m, tau))
    }

    /// Canonical JSON of everything that determines the numerical results.
    pub fn fingerprint_value(&self, subcommand: &str) -> Value {
        let mut map = Map::new();
        map.insert("subcommand".into(), Value::from(subcommand));
        map.insert("version".into(), Value::from(env!("CARGO_PKG_VERSION")));
        map.insert("model".into(), serde_json::to_value(self.base).expect("model serializes"));
        map.insert("A_over_omega".into(), Value::from(self.ratio));
        map.insert("grid".into(), serde_json::to_value(&self.grid).expect("grid serializes"));
        map.insert("engine".into(), serde_json::to_value(self.engine).expect("engine serializes"));
        Value::Object(map)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#""n_sites": 20, "a": 1, "b": 2, "j_hop": 1, "omega": 20, "m0": 1"#;

    fn parse(extra: &str) -> Result<JobConfig, CliError> {
        JobConfig::parse(&format!("{{{BASE}, {extra}}}"), false)
    }

    #[test]
    fn ratio_sets_amplitude() {
        let job = parse(r#""A_over_omega": 2"#).unwrap();
        assert_eq!(job.base.drive.amplitude, 40.0);
        let (m, _) = job.model_at(&[(AxisName::Omega, 1.0)]).unwrap();
        assert_eq!(m.drive.amplitude, 2.0);
    }

    #[test]
    fn linear_axis() {
        let job = parse(r#""amplitude": 1, "sweep": {"x_axis": {"name": "gamma", "min": 0, "max": 1, "count": 5}}"#).unwrap();
        assert_eq!(job.grid.unwrap().x.values, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn grid_order_is_y_outer() {
        let job = parse(
            r#""amplitude": 1, "sweep": {"x_axis": {"name": "gamma", "values": [0, 1, 2]}, "y_axis": {"name": "m0", "values": [1, 2]}}"#,
        )
        .unwrap();
        let g = job.grid.unwrap();
        assert_eq!(g.point(4), vec![(AxisName::Gamma, 1.0), (AxisName::M0, 2.0)]);
    }

    #[test]
    fn schema_violations() {
        for extra in [
            r#""amplitude": 1, "bogus": 3"#,
            r#""amplitude": 1, "A_over_omega": 2"#,
            r#""amplitude": 1, "engine": {"n_k": 10}"#,
            r#""amplitude": 1, "engine": {"qe_tol": 1e-9, "speed": 2}"#,
            r#""amplitude": 1, "sweep": {"x_axis": {"name": "m0", "values": [1.5]}}"#,
            r#""amplitude": 1, "sweep": {"x_axis": {"name": "m0", "values": [11]}}"#,
            r#""amplitude": 1, "sweep": {"x_axis": {"name": "gamma", "min": 0, "max": 1, "count": 0}}"#,
            r#""amplitude": 1, "sweep": {"x_axis": {"name": "gamma", "values": [0]}, "y_axis": {"name": "gamma", "values": [1]}}"#,
            r#""amplitude": 1, "sweep": {"x_axis": {"name": "kappa", "values": [0]}}"#,
        ] {
            assert!(matches!(parse(extra), Err(CliError::Schema(_))), "{extra}");
        }
    }

    #[test]
    fn full_flag_selects_full_sweep() {
        let text = format!(
            r#"{{{BASE}, "amplitude": 1, "sweep": {{"x_axis": {{"name": "gamma", "values": [0]}}}}, "sweep_full": {{"x_axis": {{"name": "gamma", "values": [0, 1]}}}}}}"#
        );
        assert_eq!(JobConfig::parse(&text, false).unwrap().grid.unwrap().len(), 1);
        let full = JobConfig::parse(&text, true).unwrap();
        assert_eq!(full.grid.unwrap().len(), 2);
        assert_eq!(full.resolution, "full");
    }

    #[test]
    fn shipped_recipes_parse() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            let text = std::fs::read_to_string(&path).unwrap();
            for full in [false, true] {
                if let Err(e) = JobConfig::parse(&text, full) {
                    panic!("{}: {e}", path.display());
                }
            }
            seen += 1;
        }
        assert!(seen >= 10);
    }
}
