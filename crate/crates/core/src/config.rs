//! Scenario configuration: a sectioned `key = value` text format.
//!
//! ```text
//! # comment
//! [ecology]
//! K = 100
//! r_J = 3, 3            # compliant, non-compliant
//! F_A.activation = 0.05, 40
//! [jumps]
//! marks = -1:0.5, 1:0.5  # mark:probability
//! g_A = 0, 0.4           # intercept, slope
//! ```
//!
//! Parsing starts from the default scenario and applies every line in
//! order, so a file only needs the keys it changes. Writing emits every
//! key; floats use the shortest representation that parses back exactly.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::{Gain, MarkAtom, MarkDist, ModelParams, PriceKind, RateFamily, StateVec};
use crate::noise::{Component, SeedSpec};
use crate::presets;
use crate::scheme::{GridSpec, SchemeTag, SimOptions};

/// Initial condition of the ensemble paths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitSpec {
    Fixed { j: f64, a: f64, e: f64 },
    /// Independent uniform draws on each interval.
    Uniform { j: (f64, f64), a: (f64, f64), e: (f64, f64) },
}

impl InitSpec {
    /// Deterministic initial state for path `seed`.
    pub fn sample(&self, seed: SeedSpec, p0: f64) -> StateVec {
        match *self {
            InitSpec::Fixed { j, a, e } => StateVec::new(j, a, e, p0),
            InitSpec::Uniform { j, a, e } => {
                let mut s = seed.stream(Component::Init);
                let mut draw = |(lo, hi): (f64, f64)| lo + (hi - lo) * s.uniform();
                let (jv, av, ev) = (draw(j), draw(a), draw(e));
                StateVec::new(jv, av, ev, p0)
            }
        }
    }

    /// The fixed state, or the midpoint of the ranges.
    pub fn nominal(&self, p0: f64) -> StateVec {
        match *self {
            InitSpec::Fixed { j, a, e } => StateVec::new(j, a, e, p0),
            InitSpec::Uniform { j, a, e } => StateVec::new(0.5 * (j.0 + j.1), 0.5 * (a.0 + a.1), 0.5 * (e.0 + e.1), p0),
        }
    }
}

/// Ensemble run settings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub t_end: f64,
    pub n_steps: usize,
    pub paths: usize,
    pub seed: u64,
    /// Years with extraction switched off at the start of every path.
    pub burn_in: f64,
    pub init: InitSpec,
    pub scheme: SchemeTag,
    pub truncation: f64,
    pub record_stride: usize,
    /// Absolute extinction threshold; `None` means `1e-6 K`.
    pub threshold: Option<f64>,
    /// Number of individual paths written to disk per scenario point.
    pub sample_paths: usize,
    pub bins: usize,
}

/// A named parameter swept over a list of values.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    /// `section.key`, e.g. `compliance.s`.
    pub axis: String,
    pub values: Vec<f64>,
}

/// Settings of the individual-based mean-field harness.
#[derive(Debug, Clone, PartialEq)]
pub struct IbmSettings {
    pub n_list: Vec<usize>,
    pub gamma: f64,
    pub replicas: usize,
    pub t_end: f64,
    pub report_points: usize,
    pub time_rescale: bool,
    pub event_limit: u64,
    pub limit_paths: usize,
    pub limit_steps: usize,
    /// Initial scaled state `(j, a, e)`.
    pub x0: (f64, f64, f64),
}

/// Settings of the strong-error harness.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergeSettings {
    pub levels: usize,
    pub base_steps: usize,
    pub paths: usize,
    pub t_end: f64,
}

/// Everything needed to run one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub params: ModelParams,
    pub run: RunConfig,
    pub sweep: Option<SweepAxis>,
    pub ibm: IbmSettings,
    pub converge: ConvergeSettings,
}

impl ScenarioConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.run.t_end, self.run.n_steps)
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            scheme: self.run.scheme,
            truncation: self.run.truncation,
            burn_in: self.run.burn_in,
            record_stride: self.run.record_stride,
        }
    }

    pub fn initial_state(&self) -> StateVec {
        self.run.init.nominal(self.params.price.p0)
    }

    pub fn threshold(&self) -> f64 {
        self.run.threshold.unwrap_or(1e-6 * self.params.eco.k)
    }

    /// Parse a configuration text on top of the default scenario.
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_over(presets::default_scenario(), text)
    }

    /// Parse a configuration text on top of `base`.
    pub fn parse_over(base: ScenarioConfig, text: &str) -> Result<Self> {
        let mut cfg = base;
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line_no, format!("unterminated section header `{line}`")))?;
                section = name.trim().to_string();
                if !SECTIONS.contains(&section.as_str()) {
                    return Err(parse_err(line_no, format!("unknown section `{section}`")));
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(line_no, format!("expected `key = value`, got `{line}`")))?;
            if section.is_empty() && key.trim() == "name" {
                cfg.name = value.trim().to_string();
                continue;
            }
            if section.is_empty() {
                return Err(parse_err(line_no, format!("key `{}` outside any section", key.trim())));
            }
            cfg.set(&section, key.trim(), value.trim())
                .map_err(|e| parse_err(line_no, e.to_string()))?;
        }
        Ok(cfg)
    }

    /// Apply a `section.key=value` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (path, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Parameter(format!("override `{assignment}` is not `section.key=value`")))?;
        self.set_path(path.trim(), value.trim())
    }

    /// Set `section.key` to `value`.
    pub fn set_path(&mut self, path: &str, value: &str) -> Result<()> {
        let (section, key) = path
            .split_once('.')
            .ok_or_else(|| Error::Parameter(format!("parameter path `{path}` is not `section.key`")))?;
        self.set(section, key, value)
    }

    /// Set one key of one section.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let unknown = || Error::Parameter(format!("unknown key `{section}.{key}`"));
        match section {
            "ecology" => {
                let eco = &mut self.params.eco;
                match key {
                    "K" => eco.k = num(value)?,
                    "rho_A" => eco.rho_a = num(value)?,
                    "m_J" => eco.m_j = num(value)?,
                    "m_A" => eco.m_a = num(value)?,
                    "sigma_J" => eco.sigma_j = num(value)?,
                    "sigma_A" => eco.sigma_a = num(value)?,
                    _ => {
                        let (name, attr) = key.split_once('.').unwrap_or((key, ""));
                        let family = match name {
                            "r_J" => &mut eco.r_j,
                            "F_J" => &mut eco.f_j,
                            "F_A" => &mut eco.f_a,
                            _ => return Err(unknown()),
                        };
                        set_family(family, attr, value).map_err(|e| match e {
                            Error::Parameter(m) if m.is_empty() => unknown(),
                            other => other,
                        })?;
                    }
                }
            }
            "compliance" => {
                let c = &mut self.params.compliance;
                let v = num(value)?;
                match key {
                    "beta0_bar" => c.beta0_bar = v,
                    "beta1_bar" => c.beta1_bar = v,
                    "tau_U" => c.tau_u = v,
                    "sigma_E" => c.sigma_e = v,
                    "eta" => c.eta_sig = v,
                    "P_min" => c.p_min = v,
                    "P_max" => c.p_max = v,
                    "s" => c.subsidy = v,
                    _ => return Err(unknown()),
                }
            }
            "jumps" => {
                let jp = &mut self.params.jumps;
                match key {
                    "lambda" => jp.lambda = num(value)?,
                    "marks" => jp.marks = parse_marks(value)?,
                    "g_J" => jp.gain_j = parse_gain(value)?,
                    "g_A" => jp.gain_a = parse_gain(value)?,
                    "eps1" => jp.eps1 = num(value)?,
                    "eps2" => jp.eps2 = num(value)?,
                    "cap" => jp.cap = num(value)?,
                    _ => return Err(unknown()),
                }
            }
            "price" => {
                let pp = &mut self.params.price;
                match key {
                    "kind" => {
                        pp.kind = PriceKind::parse(value)
                            .ok_or_else(|| Error::Parameter(format!("unknown price kind `{value}`")))?
                    }
                    "mu" => pp.mu = num(value)?,
                    "sigma_P" => pp.sigma_p = num(value)?,
                    "theta" => pp.theta = num(value)?,
                    "kappa_P" => pp.kappa_p = num(value)?,
                    "P0" => pp.p0 = num(value)?,
                    _ => return Err(unknown()),
                }
            }
            "run" => {
                let r = &mut self.run;
                match key {
                    "T" => r.t_end = num(value)?,
                    "N" => r.n_steps = int(value)?,
                    "paths" => r.paths = int(value)?,
                    "seed" => r.seed = int(value)?,
                    "burn_in" => r.burn_in = num(value)?,
                    "scheme" => {
                        r.scheme = SchemeTag::parse(value)
                            .filter(|t| *t != SchemeTag::Ibm)
                            .ok_or_else(|| Error::Parameter(format!("unknown scheme `{value}`")))?
                    }
                    "truncation" => r.truncation = num(value)?,
                    "record_stride" => r.record_stride = int(value)?,
                    "threshold" => {
                        r.threshold = if value == "auto" { None } else { Some(num(value)?) };
                    }
                    "sample_paths" => r.sample_paths = int(value)?,
                    "bins" => r.bins = int(value)?,
                    "init" => {
                        let nominal = r.init.nominal(0.0);
                        r.init = match value {
                            "fixed" => InitSpec::Fixed {
                                j: nominal.j,
                                a: nominal.a,
                                e: nominal.e,
                            },
                            "uniform" => InitSpec::Uniform {
                                j: (nominal.j, nominal.j),
                                a: (nominal.a, nominal.a),
                                e: (nominal.e, nominal.e),
                            },
                            _ => return Err(Error::Parameter(format!("unknown init kind `{value}`"))),
                        };
                    }
                    "J0" | "A0" | "E0" => set_init(&mut r.init, key, value)?,
                    _ => return Err(unknown()),
                }
            }
            "sweep" => match key {
                "axis" => {
                    let values = self.sweep.take().map(|s| s.values).unwrap_or_default();
                    self.sweep = if value == "none" {
                        None
                    } else {
                        Some(SweepAxis {
                            axis: value.to_string(),
                            values,
                        })
                    };
                }
                "values" => {
                    let values = nums(value)?;
                    match &mut self.sweep {
                        Some(s) => s.values = values,
                        None => {
                            self.sweep = Some(SweepAxis {
                                axis: String::new(),
                                values,
                            })
                        }
                    }
                }
                _ => return Err(unknown()),
            },
            "ibm" => {
                let s = &mut self.ibm;
                match key {
                    "n" => s.n_list = nums(value)?.into_iter().map(|v| v as usize).collect(),
                    "gamma" => s.gamma = num(value)?,
                    "replicas" => s.replicas = int(value)?,
                    "T" => s.t_end = num(value)?,
                    "report_points" => s.report_points = int(value)?,
                    "time_rescale" => s.time_rescale = boolean(value)?,
                    "event_limit" => s.event_limit = int(value)?,
                    "limit_paths" => s.limit_paths = int(value)?,
                    "limit_steps" => s.limit_steps = int(value)?,
                    "j0" => s.x0.0 = num(value)?,
                    "a0" => s.x0.1 = num(value)?,
                    "e0" => s.x0.2 = num(value)?,
                    _ => return Err(unknown()),
                }
            }
            "converge" => {
                let c = &mut self.converge;
                match key {
                    "levels" => c.levels = int(value)?,
                    "base_N" => c.base_steps = int(value)?,
                    "paths" => c.paths = int(value)?,
                    "T" => c.t_end = num(value)?,
                    _ => return Err(unknown()),
                }
            }
            _ => return Err(Error::Parameter(format!("unknown section `{section}`"))),
        }
        Ok(())
    }

    /// Canonical text of the model parameters only.
    pub fn params_text(&self) -> String {
        let mut out = String::new();
        write_params(&mut out, &self.params);
        out
    }

    /// Short digest of the model parameters.
    pub fn params_hash(&self) -> String {
        params_hash(&self.params)
    }

    /// Full canonical text; parses back to an equal configuration.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "name = {}", self.name);
        write_params(&mut out, &self.params);

        let r = &self.run;
        let _ = writeln!(out, "\n[run]");
        let _ = writeln!(out, "T = {}", r.t_end);
        let _ = writeln!(out, "N = {}", r.n_steps);
        let _ = writeln!(out, "paths = {}", r.paths);
        let _ = writeln!(out, "seed = {}", r.seed);
        let _ = writeln!(out, "burn_in = {}", r.burn_in);
        match r.init {
            InitSpec::Fixed { j, a, e } => {
                let _ = writeln!(out, "init = fixed\nJ0 = {j}\nA0 = {a}\nE0 = {e}");
            }
            InitSpec::Uniform { j, a, e } => {
                let _ = writeln!(
                    out,
                    "init = uniform\nJ0 = {}, {}\nA0 = {}, {}\nE0 = {}, {}",
                    j.0, j.1, a.0, a.1, e.0, e.1
                );
            }
        }
        let _ = writeln!(out, "scheme = {}", r.scheme);
        let _ = writeln!(out, "truncation = {}", r.truncation);
        let _ = writeln!(out, "record_stride = {}", r.record_stride);
        match r.threshold {
            Some(t) => {
                let _ = writeln!(out, "threshold = {t}");
            }
            None => {
                let _ = writeln!(out, "threshold = auto");
            }
        }
        let _ = writeln!(out, "sample_paths = {}", r.sample_paths);
        let _ = writeln!(out, "bins = {}", r.bins);

        let _ = writeln!(out, "\n[sweep]");
        match &self.sweep {
            Some(s) => {
                let _ = writeln!(out, "axis = {}", s.axis);
                let _ = writeln!(out, "values = {}", join(&s.values));
            }
            None => {
                let _ = writeln!(out, "axis = none");
            }
        }

        let s = &self.ibm;
        let _ = writeln!(out, "\n[ibm]");
        let n: Vec<f64> = s.n_list.iter().map(|&v| v as f64).collect();
        let _ = writeln!(out, "n = {}", join(&n));
        let _ = writeln!(out, "gamma = {}", s.gamma);
        let _ = writeln!(out, "replicas = {}", s.replicas);
        let _ = writeln!(out, "T = {}", s.t_end);
        let _ = writeln!(out, "report_points = {}", s.report_points);
        let _ = writeln!(out, "time_rescale = {}", s.time_rescale);
        let _ = writeln!(out, "event_limit = {}", s.event_limit);
        let _ = writeln!(out, "limit_paths = {}", s.limit_paths);
        let _ = writeln!(out, "limit_steps = {}", s.limit_steps);
        let _ = writeln!(out, "j0 = {}\na0 = {}\ne0 = {}", s.x0.0, s.x0.1, s.x0.2);

        let c = &self.converge;
        let _ = writeln!(out, "\n[converge]");
        let _ = writeln!(out, "levels = {}", c.levels);
        let _ = writeln!(out, "base_N = {}", c.base_steps);
        let _ = writeln!(out, "paths = {}", c.paths);
        let _ = writeln!(out, "T = {}", c.t_end);
        out
    }

    /// The configurations of every sweep point, or just `self` without a sweep.
    pub fn sweep_points(&self) -> Result<Vec<(String, ScenarioConfig)>> {
        let Some(sweep) = &self.sweep else {
            return Ok(vec![(self.name.clone(), self.clone())]);
        };
        if sweep.values.is_empty() {
            return Err(Error::Parameter("sweep has no values".into()));
        }
        sweep
            .values
            .iter()
            .map(|v| {
                let mut point = self.clone();
                point.sweep = None;
                point
                    .set_path(&sweep.axis, &v.to_string())
                    .map_err(|e| Error::Parameter(format!("invalid sweep axis `{}`: {e}", sweep.axis)))?;
                let label = format!("{}={}", sweep.axis, v);
                point.name = format!("{}[{label}]", self.name);
                Ok((label, point))
            })
            .collect()
    }
}

const SECTIONS: [&str; 8] = ["ecology", "compliance", "jumps", "price", "run", "sweep", "ibm", "converge"];

/// First 16 hex digits of the SHA-256 of the canonical parameter text.
pub fn params_hash(params: &ModelParams) -> String {
    let mut text = String::new();
    write_params(&mut text, params);
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(digest)[..16].to_string()
}

fn write_family(out: &mut String, name: &str, f: &RateFamily) {
    let _ = writeln!(out, "{name} = {}, {}", f.compliant, f.noncompliant);
    match f.activation {
        Some(a) => {
            let _ = writeln!(out, "{name}.activation = {}, {}", a.eta, a.p_low);
        }
        None => {
            let _ = writeln!(out, "{name}.activation = none");
        }
    }
}

fn write_params(out: &mut String, p: &ModelParams) {
    let e = &p.eco;
    let _ = writeln!(out, "\n[ecology]");
    let _ = writeln!(out, "K = {}", e.k);
    write_family(out, "r_J", &e.r_j);
    let _ = writeln!(out, "rho_A = {}", e.rho_a);
    let _ = writeln!(out, "m_J = {}", e.m_j);
    let _ = writeln!(out, "m_A = {}", e.m_a);
    write_family(out, "F_J", &e.f_j);
    write_family(out, "F_A", &e.f_a);
    let _ = writeln!(out, "sigma_J = {}", e.sigma_j);
    let _ = writeln!(out, "sigma_A = {}", e.sigma_a);

    let c = &p.compliance;
    let _ = writeln!(out, "\n[compliance]");
    let _ = writeln!(out, "beta0_bar = {}", c.beta0_bar);
    let _ = writeln!(out, "beta1_bar = {}", c.beta1_bar);
    let _ = writeln!(out, "tau_U = {}", c.tau_u);
    let _ = writeln!(out, "sigma_E = {}", c.sigma_e);
    let _ = writeln!(out, "eta = {}", c.eta_sig);
    let _ = writeln!(out, "P_min = {}", c.p_min);
    let _ = writeln!(out, "P_max = {}", c.p_max);
    let _ = writeln!(out, "s = {}", c.subsidy);

    let j = &p.jumps;
    let _ = writeln!(out, "\n[jumps]");
    let _ = writeln!(out, "lambda = {}", j.lambda);
    let marks: Vec<String> = j.marks.atoms().iter().map(|a| format!("{}:{}", a.z, a.p)).collect();
    let _ = writeln!(out, "marks = {}", marks.join(", "));
    let _ = writeln!(out, "g_J = {}, {}", j.gain_j.intercept, j.gain_j.slope);
    let _ = writeln!(out, "g_A = {}, {}", j.gain_a.intercept, j.gain_a.slope);
    let _ = writeln!(out, "eps1 = {}", j.eps1);
    let _ = writeln!(out, "eps2 = {}", j.eps2);
    let _ = writeln!(out, "cap = {}", j.cap);

    let pr = &p.price;
    let _ = writeln!(out, "\n[price]");
    let _ = writeln!(out, "kind = {}", pr.kind.as_str());
    let _ = writeln!(out, "mu = {}", pr.mu);
    let _ = writeln!(out, "sigma_P = {}", pr.sigma_p);
    let _ = writeln!(out, "theta = {}", pr.theta);
    let _ = writeln!(out, "kappa_P = {}", pr.kappa_p);
    let _ = writeln!(out, "P0 = {}", pr.p0);
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
}

fn parse_err(line: usize, msg: String) -> Error {
    Error::Parse { line, msg }
}

fn num(value: &str) -> Result<f64> {
    value
        .trim()
        .parse::<f64>()
        .map_err(|_| Error::Parameter(format!("`{value}` is not a number")))
}

fn int<T: std::str::FromStr>(value: &str) -> Result<T> {
    value
        .trim()
        .parse::<T>()
        .map_err(|_| Error::Parameter(format!("`{value}` is not a non-negative integer")))
}

fn boolean(value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Parameter(format!("`{value}` is not a boolean"))),
    }
}

fn nums(value: &str) -> Result<Vec<f64>> {
    value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(num)
        .collect()
}

fn pair(value: &str) -> Result<(f64, f64)> {
    match nums(value)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        [a] => Ok((*a, *a)),
        _ => Err(Error::Parameter(format!("expected one or two numbers, got `{value}`"))),
    }
}

fn set_family(f: &mut RateFamily, attr: &str, value: &str) -> Result<()> {
    match attr {
        "" => {
            let (c, nc) = pair(value)?;
            f.compliant = c;
            f.noncompliant = nc;
        }
        "activation" => {
            if value == "none" {
                f.activation = None;
            } else {
                let (eta, p_low) = match nums(value)?.as_slice() {
                    [a, b] => (*a, *b),
                    _ => return Err(Error::Parameter(format!("activation needs `eta, P_low`, got `{value}`"))),
                };
                *f = f.with_activation(eta, p_low);
            }
        }
        _ => return Err(Error::Parameter(String::new())),
    }
    Ok(())
}

fn parse_gain(value: &str) -> Result<Gain> {
    match nums(value)?.as_slice() {
        [a, b] => Ok(Gain {
            intercept: *a,
            slope: *b,
        }),
        _ => Err(Error::Parameter(format!("gain needs `intercept, slope`, got `{value}`"))),
    }
}

fn parse_marks(value: &str) -> Result<MarkDist> {
    let atoms = value
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (z, p) = item
                .split_once(':')
                .ok_or_else(|| Error::Parameter(format!("mark `{item}` is not `z:p`")))?;
            Ok(MarkAtom { z: num(z)?, p: num(p)? })
        })
        .collect::<Result<Vec<_>>>()?;
    MarkDist::discrete(atoms)
}

fn set_init(init: &mut InitSpec, key: &str, value: &str) -> Result<()> {
    match init {
        InitSpec::Fixed { j, a, e } => {
            let v = num(value)?;
            match key {
                "J0" => *j = v,
                "A0" => *a = v,
                _ => *e = v,
            }
        }
        InitSpec::Uniform { j, a, e } => {
            let v = pair(value)?;
            match key {
                "J0" => *j = v,
                "A0" => *a = v,
                _ => *e = v,
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_preset() {
        for cfg in presets::all() {
            let text = cfg.to_text();
            let back = ScenarioConfig::parse(&text).unwrap();
            assert_eq!(back, cfg, "{}", cfg.name);
            assert_eq!(back.params_hash(), cfg.params_hash());
            assert_eq!(back.to_text(), text);
        }
    }

    #[test]
    fn partial_file_overrides_defaults() {
        let cfg = ScenarioConfig::parse("[compliance]\ns = 150\n[run]\npaths = 7 # few\n").unwrap();
        assert_eq!(cfg.params.compliance.subsidy, 150.0);
        assert_eq!(cfg.run.paths, 7);
        assert_eq!(cfg.params.eco, presets::default_scenario().params.eco);
    }

    #[test]
    fn hash_tracks_parameters() {
        let a = presets::default_scenario();
        let mut b = a.clone();
        b.run.paths += 1;
        assert_eq!(a.params_hash(), b.params_hash());
        b.params.compliance.subsidy += 1.0;
        assert_ne!(a.params_hash(), b.params_hash());
        assert_eq!(a.params_hash().len(), 16);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = ScenarioConfig::parse("[ecology]\nK = 1\nbogus = 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        assert!(ScenarioConfig::parse("[nowhere]\n").is_err());
        assert!(ScenarioConfig::parse("[ecology]\nK 1\n").is_err());
        assert!(ScenarioConfig::parse("[jumps]\nmarks = 1:0.3\n").is_err());
    }

    #[test]
    fn overrides_and_sweeps() {
        let mut cfg = presets::default_scenario();
        cfg.apply_override("price.sigma_P=0.2").unwrap();
        assert_eq!(cfg.params.price.sigma_p, 0.2);
        assert!(cfg.apply_override("price.nothing=1").is_err());
        cfg.apply_override("ecology.F_A.activation=0.1, 50").unwrap();
        assert!(cfg.params.eco.f_a.activation.is_some());

        let sweep = presets::subsidy_sweep();
        let points = sweep.sweep_points().unwrap();
        let s: Vec<f64> = points.iter().map(|(_, c)| c.params.compliance.subsidy).collect();
        assert_eq!(s, vec![0.0, 150.0, 300.0]);

        let mut bad = sweep.clone();
        bad.sweep.as_mut().unwrap().axis = "compliance.nope".into();
        assert!(bad.sweep_points().is_err());
    }

    #[test]
    fn uniform_init_is_seeded() {
        let init = InitSpec::Uniform {
            j: (1.0, 2.0),
            a: (3.0, 4.0),
            e: (0.2, 0.8),
        };
        let x = init.sample(SeedSpec::new(1, 2), 5.0);
        assert_eq!(x, init.sample(SeedSpec::new(1, 2), 5.0));
        assert!((1.0..2.0).contains(&x.j) && (3.0..4.0).contains(&x.a) && (0.2..0.8).contains(&x.e));
        assert_eq!(x.p, 5.0);
    }
}
