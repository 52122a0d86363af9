//! JSON run configuration and its translation into core types.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use hetero_bi::potentials::{self, compact_truncate, PotentialFlags};
use hetero_bi::solver::{SolverConfig, VerifyOptions};
use hetero_bi::weights::{self, WeightFlags};
use hetero_bi::{Potential, Weight};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    SolveOdd,
    Quadrature,
    Verify,
    Rearrange,
    Gibbons2d,
    Sweep,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialSpec {
    /// `allen_cahn` or `exact_example`.
    pub builtin: Option<String>,
    /// Formula in the variable `s`.
    pub expr: Option<String>,
    pub name: Option<String>,
    /// Advertised hypotheses of an expression potential.
    pub flags: Option<PotentialFlags>,
    /// Zero the potential outside `(-1, 1)`.
    pub compact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Constant {
        value: f64,
    },
    PeriodicSin {
        mean: f64,
        amplitude: f64,
        period: f64,
    },
    AsymptoticallyConstant {
        limit: f64,
        bump: f64,
    },
    MonotoneEven {
        rate: f64,
    },
    MonotoneEvenShifted {
        rate: f64,
        threshold: f64,
    },
    Expr {
        /// Formula in the variable `t`.
        source: String,
        #[serde(default)]
        flags: Option<WeightFlags>,
        #[serde(default)]
        bounds: Option<(f64, f64)>,
        #[serde(default)]
        period: Option<f64>,
        #[serde(default)]
        positivity_threshold: Option<f64>,
    },
}

impl Default for WeightSpec {
    fn default() -> Self {
        WeightSpec::Constant { value: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StripSpec {
    pub nx: usize,
    pub ny: usize,
    pub width: f64,
    /// Amplitude of the transverse wiggle `x + A sin(2πy/width)`.
    pub amplitude: f64,
}

impl Default for StripSpec {
    fn default() -> Self {
        StripSpec {
            nx: 400,
            ny: 40,
            width: 1.0,
            amplitude: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<Command>,
    pub potential: PotentialSpec,
    pub weight: WeightSpec,
    pub solver: SolverConfig,
    pub verify: VerifyOptions,
    /// Time step of the quadrature profile.
    pub quadrature_step: f64,
    /// Input profile CSV for `verify` and `rearrange`, relative to the config file.
    pub profile: Option<PathBuf>,
    pub strip: StripSpec,
    pub out: Option<PathBuf>,
    pub format: Format,
    /// Sweep only: defaults merged under every row.
    pub base: Option<Value>,
    /// Sweep only: one partial config per row.
    pub runs: Vec<Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: None,
            potential: PotentialSpec::default(),
            weight: WeightSpec::default(),
            solver: SolverConfig::default(),
            verify: VerifyOptions::default(),
            quadrature_step: 1e-3,
            profile: None,
            strip: StripSpec::default(),
            out: None,
            format: Format::Csv,
            base: None,
            runs: Vec::new(),
        }
    }
}

/// Prefixes a deserialization error with the path of the offending field.
fn path_err(e: serde_path_to_error::Error<serde_json::Error>) -> CliError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    if path == "." {
        CliError::Config(format!("config: {inner}"))
    } else {
        CliError::Config(format!("{path}: {inner}"))
    }
}

fn config_err(field: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {detail}"))
}

/// Recursively overlays `top` onto `base`; objects merge, anything else replaces.
pub fn merge(base: &Value, top: &Value) -> Value {
    match (base, top) {
        (Value::Object(b), Value::Object(t)) => {
            let mut out = b.clone();
            for (k, v) in t {
                let merged = match out.get(k) {
                    Some(old) => merge(old, v),
                    None => v.clone(),
                };
                out.insert(k.clone(), merged);
            }
            Value::Object(out)
        }
        (_, t) => t.clone(),
    }
}

impl RunConfig {
    pub fn from_value(v: Value) -> Result<Self, CliError> {
        serde_path_to_error::deserialize(v).map_err(path_err)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config: cannot read {}: {e}", path.display())))?;
        let mut de = serde_json::Deserializer::from_str(&text);
        let mut cfg: RunConfig = serde_path_to_error::deserialize(&mut de).map_err(path_err)?;
        if let (Some(p), Some(dir)) = (&cfg.profile, path.parent()) {
            if p.is_relative() {
                cfg.profile = Some(dir.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn command(&self) -> Result<Command, CliError> {
        self.command.ok_or_else(|| config_err("command", "missing"))
    }

    /// Checks everything that can be checked without running a solve.
    pub fn validate(&self) -> Result<(), CliError> {
        let cmd = self.command()?;
        if cmd != Command::Sweep {
            self.solver
                .validate()
                .map_err(|e| CliError::Config(format!("solver.{e}")))?;
            self.potential()?;
            self.weight()?;
        }
        if !(self.quadrature_step > 0.0 && self.quadrature_step.is_finite()) {
            return Err(config_err(
                "quadrature_step",
                format!("must be positive, got {}", self.quadrature_step),
            ));
        }
        if cmd == Command::Quadrature && self.solver.boundary_tol <= 0.0 {
            return Err(config_err(
                "solver.boundary_tol",
                "quadrature needs a positive boundary tolerance",
            ));
        }
        if matches!(cmd, Command::Verify | Command::Rearrange) && self.profile.is_none() {
            return Err(config_err("profile", format!("required by {cmd:?}")));
        }
        if cmd == Command::Gibbons2d {
            let s = &self.strip;
            if s.nx < 16 || s.ny < 1 || !(s.width >= 0.0) || !s.amplitude.is_finite() {
                return Err(config_err(
                    "strip",
                    format!("needs nx >= 16, ny >= 1, width >= 0 (got {s:?})"),
                ));
            }
        }
        if !self.verify.thetas.iter().all(|&t| t > 0.0 && t < 1.0) {
            return Err(config_err("verify.thetas", "every theta must lie in (0, 1)"));
        }
        if cmd != Command::Sweep && !self.runs.is_empty() {
            return Err(config_err("runs", "only a sweep takes runs"));
        }
        Ok(())
    }

    pub fn potential(&self) -> Result<Potential, CliError> {
        let spec = &self.potential;
        let base = match (&spec.builtin, &spec.expr) {
            (Some(_), Some(_)) => return Err(config_err("potential", "give either builtin or expr, not both")),
            (None, None) | (Some(_), None) if spec.flags.is_some() => {
                return Err(config_err(
                    "potential.flags",
                    "flags apply to expression potentials only",
                ))
            }
            (None, None) => potentials::allen_cahn(),
            (Some(b), None) => match b.as_str() {
                "allen_cahn" => potentials::allen_cahn(),
                "exact_example" => potentials::exact_example(),
                other => return Err(config_err("potential.builtin", format!("unknown potential '{other}'"))),
            },
            (None, Some(src)) => {
                let name = spec.name.clone().unwrap_or_else(|| src.clone());
                let w = Potential::from_expr(name, src, spec.flags.unwrap_or_default())
                    .map_err(|e| config_err("potential.expr", e))?;
                w.validate(10_000).map_err(|e| config_err("potential.flags", e))?;
                w
            }
        };
        Ok(if spec.compact { compact_truncate(&base) } else { base })
    }

    pub fn weight(&self) -> Result<Weight, CliError> {
        let bad = |e: hetero_bi::Error| config_err("weight", e);
        match &self.weight {
            WeightSpec::Constant { value } => weights::constant(*value).map_err(bad),
            WeightSpec::PeriodicSin {
                mean,
                amplitude,
                period,
            } => weights::periodic_sin(*mean, *amplitude, *period).map_err(bad),
            WeightSpec::AsymptoticallyConstant { limit, bump } => {
                weights::asymptotically_constant(*limit, *bump).map_err(bad)
            }
            WeightSpec::MonotoneEven { rate } => weights::monotone_even(*rate).map_err(bad),
            WeightSpec::MonotoneEvenShifted { rate, threshold } => {
                weights::monotone_even_shifted(*rate, *threshold).map_err(bad)
            }
            WeightSpec::Expr {
                source,
                flags,
                bounds,
                period,
                positivity_threshold,
            } => {
                let mut a = Weight::from_expr(source.clone(), source).map_err(|e| config_err("weight.source", e))?;
                if let Some(f) = flags {
                    a = a.with_flags(*f);
                }
                if let Some((lo, hi)) = bounds {
                    a = a.with_bounds(*lo, *hi);
                }
                if let Some(p) = period {
                    a = a.with_period(*p);
                }
                if let Some(t) = positivity_threshold {
                    a = a.with_positivity_threshold(*t);
                }
                a.validate(10_000, 100.0).map_err(|e| config_err("weight.flags", e))?;
                Ok(a)
            }
        }
    }
}
