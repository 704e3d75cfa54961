//! Run configuration: a flat, commented `key = value unit` document.
//!
//! ```text
//! # Table defaults are filled in for every key left out.
//! radio.uav_tx_power = 20 dBW
//! radio.noise_power  = -120 dBm
//! geometry.cn_density = 5 per_km2
//! compute.model   = deterministic
//! compute.latency = 2 ms
//! sweep.geometry.altitude = linspace(50, 800, 16) m
//! sweep.compute.latency   = 0.2, 2 ms
//! sweep.outputs = analytic, monte_carlo
//! ```
//!
//! All keys live in one registry that drives parsing, serialization and sweep
//! assignment, so the three can never disagree about a key's unit.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use sha2::{Digest, Sha256};
use uavcpn::compute::ComputeDistribution;
use uavcpn::optimizer::BayesConfig;
use uavcpn::{
    ChannelMode, ComputeModel, EnvironmentParams, HoverTimePolicy, OptimizerConfig, Problem,
    SimConfig,
};

use crate::quantity::{
    format_number, format_quantities, parse_number, parse_quantities, parse_quantity, Kind,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    /// Key the error refers to; empty for document-level problems.
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if !self.path.is_empty() {
            write!(f, "`{}`: ", self.path)?;
        }
        f.write_str(&self.message)
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    fn new(line: Option<usize>, path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            line,
            path: path.into(),
            message: message.into(),
        }
    }
}

/// Quantities a sweep computes at every point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Output {
    Analytic,
    MonteCarlo,
    Feasibility,
    Joint,
    Baselines,
    Bayesian,
    Grid,
}

impl Output {
    pub const ALL: [Output; 7] = [
        Output::Analytic,
        Output::MonteCarlo,
        Output::Feasibility,
        Output::Joint,
        Output::Baselines,
        Output::Bayesian,
        Output::Grid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Output::Analytic => "analytic",
            Output::MonteCarlo => "monte_carlo",
            Output::Feasibility => "feasibility",
            Output::Joint => "joint",
            Output::Baselines => "baselines",
            Output::Bayesian => "bayesian",
            Output::Grid => "grid",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|o| o.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AxisSpec {
    /// `n` evenly spaced values, both ends included.
    Linspace {
        start: f64,
        stop: f64,
        n: usize,
    },
    /// `n` geometrically spaced values, both ends included.
    Logspace {
        start: f64,
        stop: f64,
        n: usize,
    },
    Values(Vec<f64>),
}

/// One swept key. Values are in the key's canonical unit.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub path: String,
    pub spec: AxisSpec,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match self.spec {
            AxisSpec::Linspace { start, stop, n } => {
                spaced(start, stop, n, |a, b, t| a + (b - a) * t)
            }
            AxisSpec::Logspace { start, stop, n } => {
                spaced(start, stop, n, |a, b, t| a * (b / a).powf(t))
            }
            AxisSpec::Values(ref v) => v.clone(),
        }
    }

    /// Column header, e.g. `geometry.altitude [m]`.
    pub fn column(&self) -> String {
        match key(&self.path)
            .and_then(|k| k.ty.kind())
            .and_then(Kind::canonical_unit)
        {
            Some(u) => format!("{} [{u}]", self.path),
            None => self.path.clone(),
        }
    }
}

fn spaced(a: f64, b: f64, n: usize, f: impl Fn(f64, f64, f64) -> f64) -> Vec<f64> {
    if n == 1 {
        return vec![a];
    }
    // Pin the end points so `stop` is hit exactly.
    (0..n)
        .map(|i| match i {
            0 => a,
            i if i == n - 1 => b,
            i => f(a, b, i as f64 / (n - 1) as f64),
        })
        .collect()
}

/// Fully resolved configuration, every value in SI units.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: String,
    pub seed: u64,
    pub output_dir: String,
    pub problem: Problem,
    pub optimizer: OptimizerConfig,
    pub bayes: BayesConfig,
    pub sim: SimConfig,
    /// Per-axis resolution of the grid oracle.
    pub oracle_altitude_points: usize,
    pub oracle_power_points: usize,
    /// Budget-grid resolution of the strategy figures, per axis.
    pub figure_budget_points: usize,
    pub figure_altitude_points: usize,
    pub outputs: Vec<Output>,
    pub sweep: Vec<Axis>,
}

const DEFAULT_SEED: u64 = 0x5eed;

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: "default".into(),
            seed: DEFAULT_SEED,
            output_dir: "results".into(),
            problem: Problem::default(),
            optimizer: OptimizerConfig::default(),
            bayes: BayesConfig {
                seed: DEFAULT_SEED,
                ..BayesConfig::default()
            },
            sim: SimConfig {
                seed: DEFAULT_SEED,
                ..SimConfig::default()
            },
            oracle_altitude_points: 50,
            oracle_power_points: 50,
            figure_budget_points: 10,
            figure_altitude_points: 16,
            outputs: vec![Output::Analytic],
            sweep: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.sim.seed = seed;
        self.bayes.seed = seed;
    }

    /// Assigns a numeric key, `value` in the key's canonical unit.
    pub fn set_path(&mut self, path: &str, value: f64) -> Result<(), ConfigError> {
        let k = key(path).ok_or_else(|| ConfigError::new(None, path, "unknown key"))?;
        if !k.ty.sweepable() {
            return Err(ConfigError::new(None, path, "not a numeric key"));
        }
        (k.set)(self, Value::Num(value)).map_err(|m| ConfigError::new(None, path, m))
    }

    /// Normalized document: every key in canonical units, registry order.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# normalized uavcpn configuration\n");
        let mut section = "";
        for k in registry() {
            let Some(v) = (k.get)(self) else { continue };
            let head = k.name.split('.').next().unwrap_or("");
            if head != section && k.name.contains('.') {
                out.push('\n');
                section = head;
            }
            out.push_str(&format!("{} = {}\n", k.name, k.ty.format(&v)));
        }
        out.push('\n');
        let names: Vec<&str> = self.outputs.iter().map(|o| o.name()).collect();
        out.push_str(&format!("sweep.outputs = {}\n", names.join(", ")));
        for axis in &self.sweep {
            let kind = key(&axis.path)
                .and_then(|k| k.ty.kind())
                .unwrap_or(Kind::Scalar);
            let unit = kind
                .canonical_unit()
                .map(|u| format!(" {u}"))
                .unwrap_or_default();
            let spec = match &axis.spec {
                AxisSpec::Linspace { start, stop, n } => {
                    format!(
                        "linspace({}, {}, {n}){unit}",
                        format_number(*start),
                        format_number(*stop)
                    )
                }
                AxisSpec::Logspace { start, stop, n } => {
                    format!(
                        "logspace({}, {}, {n}){unit}",
                        format_number(*start),
                        format_number(*stop)
                    )
                }
                AxisSpec::Values(v) => format_quantities(v, kind),
            };
            out.push_str(&format!("sweep.{} = {spec}\n", axis.path));
        }
        out
    }

    /// SHA-256 of the normalized document, lowercase hex.
    pub fn hash(&self) -> String {
        format!("{:x}", Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let check = || -> uavcpn::Result<()> {
            self.problem.validate()?;
            self.optimizer.validate(&self.problem.bounds)?;
            self.bayes.validate()?;
            self.sim.validate()
        };
        check().map_err(|e| match e {
            uavcpn::Error::InvalidParameter { name, reason } => {
                ConfigError::new(None, config_path(name), reason)
            }
            other => ConfigError::new(None, "", other.to_string()),
        })?;
        for (name, n) in [
            ("oracle.altitude_points", self.oracle_altitude_points),
            ("oracle.power_points", self.oracle_power_points),
            ("figures.budget_points", self.figure_budget_points),
            ("figures.altitude_points", self.figure_altitude_points),
        ] {
            if n < 2 {
                return Err(ConfigError::new(None, name, "must be >= 2"));
            }
        }
        Ok(())
    }
}

/// Maps a core parameter name onto the config key that sets it.
fn config_path(name: &str) -> String {
    let registry = registry();
    if registry.iter().any(|k| k.name == name) {
        return name.to_string();
    }
    registry
        .iter()
        .find(|k| k.name.starts_with(name))
        .map(|k| k.name.to_string())
        .unwrap_or_else(|| name.to_string())
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, &[])
}

/// Parses `text`, then applies `overrides` (`key`, `raw value`) on top;
/// an override replaces a key already present in the document.
pub fn parse_config_with(
    text: &str,
    overrides: &[(String, String)],
) -> Result<RunConfig, ConfigError> {
    let mut entries: BTreeMap<String, (Option<usize>, String)> = BTreeMap::new();
    let mut axis_order: Vec<String> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| {
            ConfigError::new(
                Some(line),
                "",
                format!("expected `key = value`, found `{content}`"),
            )
        })?;
        let k = k.trim().to_string();
        if k.is_empty() {
            return Err(ConfigError::new(Some(line), "", "empty key"));
        }
        if let Some((prev, _)) = entries.get(&k) {
            let prev = prev
                .map(|l| format!(" (first set on line {l})"))
                .unwrap_or_default();
            return Err(ConfigError::new(
                Some(line),
                k,
                format!("duplicate key{prev}"),
            ));
        }
        if is_axis(&k) {
            axis_order.push(k.clone());
        }
        entries.insert(k, (Some(line), v.trim().to_string()));
    }
    for (k, v) in overrides {
        let k = k.trim().to_string();
        if is_axis(&k) && !entries.contains_key(&k) {
            axis_order.push(k.clone());
        }
        entries.insert(k, (None, v.trim().to_string()));
    }

    let registry = registry();
    for (k, (line, _)) in &entries {
        let known =
            registry.iter().any(|r| r.name == k.as_str()) || k == "sweep.outputs" || is_axis(k);
        if !known {
            return Err(ConfigError::new(*line, k.as_str(), "unknown key"));
        }
    }

    let mut cfg = RunConfig::default();
    for k in &registry {
        let Some((line, raw)) = entries.get(k.name) else {
            continue;
        };
        let err = |m: String| ConfigError::new(*line, k.name, m);
        let value = k.ty.parse(raw).map_err(err)?;
        (k.set)(&mut cfg, value).map_err(err)?;
    }
    if let ComputeDistribution::Empirical { .. } = cfg.problem.analysis.compute.distribution {
        if !entries.contains_key("compute.samples") {
            return Err(ConfigError::new(
                entries.get("compute.model").and_then(|e| e.0),
                "compute.samples",
                "the empirical model needs samples",
            ));
        }
    }
    if let Some((line, raw)) = entries.get("sweep.outputs") {
        cfg.outputs =
            parse_outputs(raw).map_err(|m| ConfigError::new(*line, "sweep.outputs", m))?;
    }
    for k in axis_order {
        let (line, raw) = &entries[&k];
        let path = &k["sweep.".len()..];
        let axis = parse_axis(path, raw).map_err(|m| ConfigError::new(*line, k.as_str(), m))?;
        cfg.sweep.push(axis);
    }

    cfg.validate().map_err(|mut e| {
        e.line = entries.get(&e.path).and_then(|x| x.0);
        e
    })?;
    Ok(cfg)
}

fn is_axis(k: &str) -> bool {
    k.starts_with("sweep.") && k != "sweep.outputs"
}

fn parse_outputs(raw: &str) -> Result<Vec<Output>, String> {
    let mut out = Vec::new();
    for name in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let o = Output::from_name(name).ok_or_else(|| {
            let all: Vec<&str> = Output::ALL.iter().map(|o| o.name()).collect();
            format!("unknown output `{name}` (one of {})", all.join(", "))
        })?;
        if !out.contains(&o) {
            out.push(o);
        }
    }
    Ok(out)
}

fn parse_axis(path: &str, raw: &str) -> Result<Axis, String> {
    let k = key(path).ok_or_else(|| format!("`{path}` is not a known key"))?;
    let kind =
        k.ty.kind()
            .filter(|_| k.ty.sweepable())
            .ok_or_else(|| format!("`{path}` is not numeric"))?;
    let raw = raw.trim();
    let spec = if let Some(rest) = raw
        .strip_prefix("linspace(")
        .or_else(|| raw.strip_prefix("logspace("))
    {
        let log = raw.starts_with("logspace");
        let (args, unit) = rest.split_once(')').ok_or("missing `)`")?;
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        let [a, b, n] = args.as_slice() else {
            return Err("expected (start, stop, count)".into());
        };
        let unit = unit.trim();
        let with_unit = |x: &str| parse_quantity(&format!("{x} {unit}"), kind);
        let (start, stop) = (with_unit(a)?, with_unit(b)?);
        let n: usize = n
            .parse()
            .map_err(|_| format!("count `{n}` is not a positive integer"))?;
        if n == 0 {
            return Err("count must be >= 1".into());
        }
        if log {
            if !(start > 0.0 && stop > 0.0) {
                return Err("logspace needs positive end points".into());
            }
            AxisSpec::Logspace { start, stop, n }
        } else {
            AxisSpec::Linspace { start, stop, n }
        }
    } else {
        let v = parse_quantities(raw, kind)?;
        AxisSpec::Values(v)
    };
    Ok(Axis {
        path: path.to_string(),
        spec,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    /// The key's keyword (`none`, `auto`, `same`, `unlimited`).
    Keyword,
    List(Vec<f64>),
    Int(u64),
    Flag(bool),
    Text(String),
}

impl Value {
    fn num(self) -> Result<f64, String> {
        match self {
            Value::Num(x) => Ok(x),
            _ => Err("expected a number".into()),
        }
    }

    fn opt(self) -> Result<Option<f64>, String> {
        match self {
            Value::Num(x) => Ok(Some(x)),
            Value::Keyword => Ok(None),
            _ => Err("expected a number".into()),
        }
    }

    fn int(self) -> Result<u64, String> {
        match self {
            Value::Int(x) => Ok(x),
            _ => Err("expected an integer".into()),
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Ty {
    Num(Kind),
    OptNum(Kind, &'static str),
    List(Kind),
    Int,
    Flag,
    Text,
    Choice(&'static [&'static str]),
}

impl Ty {
    fn kind(self) -> Option<Kind> {
        match self {
            Ty::Num(k) | Ty::OptNum(k, _) | Ty::List(k) => Some(k),
            _ => None,
        }
    }

    fn sweepable(self) -> bool {
        matches!(self, Ty::Num(_) | Ty::OptNum(..))
    }

    fn parse(self, raw: &str) -> Result<Value, String> {
        let raw = raw.trim();
        match self {
            Ty::Num(k) => parse_quantity(raw, k).map(Value::Num),
            Ty::OptNum(_, kw) if raw == kw => Ok(Value::Keyword),
            Ty::OptNum(k, kw) => parse_quantity(raw, k)
                .map(Value::Num)
                .map_err(|e| format!("{e}; or `{kw}`")),
            Ty::List(k) => parse_quantities(raw, k).map(Value::List),
            Ty::Int => raw
                .parse()
                .map(Value::Int)
                .map_err(|_| format!("`{raw}` is not a non-negative integer")),
            Ty::Flag => match raw {
                "true" => Ok(Value::Flag(true)),
                "false" => Ok(Value::Flag(false)),
                _ => Err(format!("`{raw}` is not `true` or `false`")),
            },
            Ty::Text if raw.is_empty() => Err("empty value".into()),
            Ty::Text => Ok(Value::Text(raw.to_string())),
            Ty::Choice(options) if options.contains(&raw) => Ok(Value::Text(raw.to_string())),
            Ty::Choice(options) => Err(format!("`{raw}` is not one of {}", options.join(", "))),
        }
    }

    fn format(self, v: &Value) -> String {
        match (self, v) {
            (Ty::OptNum(_, kw), Value::Keyword) => kw.to_string(),
            (Ty::Num(k) | Ty::OptNum(k, _), Value::Num(x)) => format_quantities(&[*x], k),
            (Ty::List(k), Value::List(xs)) => format_quantities(xs, k),
            (_, Value::Int(n)) => n.to_string(),
            (_, Value::Flag(b)) => b.to_string(),
            (_, Value::Text(s)) => s.clone(),
            (_, other) => unreachable!("value {other:?} does not match its key type"),
        }
    }
}

type Getter = fn(&RunConfig) -> Option<Value>;
type Setter = fn(&mut RunConfig, Value) -> Result<(), String>;

struct Key {
    name: &'static str,
    ty: Ty,
    /// `None` when the key does not apply to the current configuration.
    get: Getter,
    set: Setter,
}

fn key(name: &str) -> Option<Key> {
    registry().into_iter().find(|k| k.name == name)
}

macro_rules! num {
    ($name:literal, $kind:ident, $($f:ident).+) => {
        Key {
            name: $name,
            ty: Ty::Num(Kind::$kind),
            get: |c| Some(Value::Num(c.$($f).+)),
            set: |c, v| {
                c.$($f).+ = v.num()?;
                Ok(())
            },
        }
    };
}

macro_rules! int {
    ($name:literal, $($f:ident).+) => {
        Key {
            name: $name,
            ty: Ty::Int,
            get: |c| Some(Value::Int(c.$($f).+ as u64)),
            set: |c, v| {
                c.$($f).+ = v.int()?.try_into().map_err(|_| "value too large".to_string())?;
                Ok(())
            },
        }
    };
}

macro_rules! flag {
    ($name:literal, $($f:ident).+) => {
        Key {
            name: $name,
            ty: Ty::Flag,
            get: |c| Some(Value::Flag(c.$($f).+)),
            set: |c, v| match v {
                Value::Flag(b) => {
                    c.$($f).+ = b;
                    Ok(())
                }
                _ => Err("expected a flag".into()),
            },
        }
    };
}

macro_rules! downlink {
    ($name:literal, $kind:ident, $field:ident) => {
        Key {
            name: $name,
            ty: Ty::OptNum(Kind::$kind, "same"),
            get: |c| {
                Some(match &c.problem.analysis.downlink_env {
                    Some(env) => Value::Num(env.$field),
                    None => Value::Keyword,
                })
            },
            set: |c, v| {
                if let Some(x) = v.opt()? {
                    let a = &mut c.problem.analysis;
                    let mut env: EnvironmentParams = a.downlink_env.unwrap_or(a.env);
                    env.$field = x;
                    a.downlink_env = Some(env);
                }
                Ok(())
            },
        }
    };
}

macro_rules! budget {
    ($name:literal, $field:ident) => {
        Key {
            name: $name,
            ty: Ty::OptNum(Kind::Energy, "unlimited"),
            get: |c| {
                let b = c.problem.budgets.$field;
                Some(if b.is_infinite() {
                    Value::Keyword
                } else {
                    Value::Num(b)
                })
            },
            set: |c, v| {
                c.problem.budgets.$field = v.opt()?.unwrap_or(f64::INFINITY);
                Ok(())
            },
        }
    };
}

const COMPUTE_MODELS: &[&str] = &[
    "deterministic",
    "exponential",
    "shifted_exponential",
    "empirical",
];

fn compute_model_name(m: &ComputeModel) -> &'static str {
    match m.distribution {
        ComputeDistribution::Deterministic { .. } => "deterministic",
        ComputeDistribution::Exponential { .. } => "exponential",
        ComputeDistribution::ShiftedExponential { .. } => "shifted_exponential",
        ComputeDistribution::Empirical { .. } => "empirical",
    }
}

fn registry() -> Vec<Key> {
    vec![
        Key {
            name: "scenario",
            ty: Ty::Text,
            get: |c| Some(Value::Text(c.scenario.clone())),
            set: |c, v| match v {
                Value::Text(s) => {
                    c.scenario = s;
                    Ok(())
                }
                _ => Err("expected text".into()),
            },
        },
        Key {
            name: "seed",
            ty: Ty::Int,
            get: |c| Some(Value::Int(c.seed)),
            set: |c, v| {
                c.set_seed(v.int()?);
                Ok(())
            },
        },
        Key {
            name: "output_dir",
            ty: Ty::Text,
            get: |c| Some(Value::Text(c.output_dir.clone())),
            set: |c, v| match v {
                Value::Text(s) => {
                    c.output_dir = s;
                    Ok(())
                }
                _ => Err("expected text".into()),
            },
        },
        Key {
            name: "channel_mode",
            ty: Ty::Choice(&["mean_power", "bernoulli"]),
            get: |c| Some(Value::Text(c.sim.channel_mode.to_string())),
            set: |c, v| match v {
                Value::Text(s) => {
                    c.sim.channel_mode = s.parse::<ChannelMode>()?;
                    Ok(())
                }
                _ => Err("expected a name".into()),
            },
        },
        Key {
            name: "hover_time_policy",
            ty: Ty::Choice(&["worst_case", "expected"]),
            get: |c| Some(Value::Text(c.problem.energy.hover_time_policy.to_string())),
            set: |c, v| match v {
                Value::Text(s) => {
                    c.problem.energy.hover_time_policy = s.parse::<HoverTimePolicy>()?;
                    Ok(())
                }
                _ => Err("expected a name".into()),
            },
        },
        num!("env.b_slope", Scalar, problem.analysis.env.b_slope),
        num!("env.c_offset", Scalar, problem.analysis.env.c_offset),
        num!(
            "env.nlos_attenuation",
            Attenuation,
            problem.analysis.env.nlos_attenuation
        ),
        num!("env.pathloss_up", Scalar, problem.analysis.env.pathloss_up),
        num!(
            "env.pathloss_down",
            Scalar,
            problem.analysis.env.pathloss_down
        ),
        downlink!("downlink.b_slope", Scalar, b_slope),
        downlink!("downlink.c_offset", Scalar, c_offset),
        downlink!("downlink.nlos_attenuation", Attenuation, nlos_attenuation),
        num!(
            "radio.gu_tx_power",
            Power,
            problem.analysis.radio.gu_tx_power
        ),
        num!(
            "radio.uav_tx_power",
            Power,
            problem.analysis.radio.uav_tx_power
        ),
        num!(
            "radio.bandwidth",
            Frequency,
            problem.analysis.radio.bandwidth
        ),
        num!(
            "radio.noise_power",
            Power,
            problem.analysis.radio.noise_power
        ),
        num!("task.data_size", Data, problem.analysis.task.data_size),
        num!("task.max_latency", Time, problem.analysis.task.max_latency),
        num!(
            "geometry.altitude",
            Length,
            problem.analysis.geometry.altitude
        ),
        num!(
            "geometry.request_radius",
            Length,
            problem.analysis.geometry.request_radius
        ),
        num!(
            "geometry.service_window_radius",
            Length,
            problem.analysis.geometry.service_window_radius
        ),
        num!(
            "geometry.cn_density",
            Density,
            problem.analysis.geometry.cn_density
        ),
        num!(
            "geometry.gu_density",
            Density,
            problem.analysis.geometry.gu_density
        ),
        Key {
            name: "geometry.service_cap",
            ty: Ty::OptNum(Kind::Length, "none"),
            get: |c| {
                Some(match c.problem.analysis.geometry.service_cap {
                    Some(x) => Value::Num(x),
                    None => Value::Keyword,
                })
            },
            set: |c, v| {
                c.problem.analysis.geometry.service_cap = v.opt()?;
                Ok(())
            },
        },
        Key {
            name: "compute.model",
            ty: Ty::Choice(COMPUTE_MODELS),
            get: |c| {
                Some(Value::Text(
                    compute_model_name(&c.problem.analysis.compute).into(),
                ))
            },
            set: |c, v| {
                let Value::Text(s) = v else {
                    return Err("expected a name".into());
                };
                c.problem.analysis.compute.distribution = match s.as_str() {
                    "deterministic" => ComputeDistribution::Deterministic { latency: 2e-3 },
                    "exponential" => ComputeDistribution::Exponential { mean: 2e-3 },
                    "shifted_exponential" => ComputeDistribution::ShiftedExponential {
                        shift: 1e-3,
                        mean: 1e-3,
                    },
                    _ => ComputeDistribution::Empirical {
                        samples: Arc::from(vec![2e-3]),
                    },
                };
                Ok(())
            },
        },
        Key {
            name: "compute.latency",
            ty: Ty::Num(Kind::Time),
            get: |c| match c.problem.analysis.compute.distribution {
                ComputeDistribution::Deterministic { latency } => Some(Value::Num(latency)),
                _ => None,
            },
            set: |c, v| match &mut c.problem.analysis.compute.distribution {
                ComputeDistribution::Deterministic { latency } => {
                    *latency = v.num()?;
                    Ok(())
                }
                _ => Err("only applies to the deterministic model".into()),
            },
        },
        Key {
            name: "compute.shift",
            ty: Ty::Num(Kind::Time),
            get: |c| match c.problem.analysis.compute.distribution {
                ComputeDistribution::ShiftedExponential { shift, .. } => Some(Value::Num(shift)),
                _ => None,
            },
            set: |c, v| match &mut c.problem.analysis.compute.distribution {
                ComputeDistribution::ShiftedExponential { shift, .. } => {
                    *shift = v.num()?;
                    Ok(())
                }
                _ => Err("only applies to the shifted_exponential model".into()),
            },
        },
        Key {
            name: "compute.mean",
            ty: Ty::Num(Kind::Time),
            get: |c| match c.problem.analysis.compute.distribution {
                ComputeDistribution::Exponential { mean }
                | ComputeDistribution::ShiftedExponential { mean, .. } => Some(Value::Num(mean)),
                _ => None,
            },
            set: |c, v| match &mut c.problem.analysis.compute.distribution {
                ComputeDistribution::Exponential { mean }
                | ComputeDistribution::ShiftedExponential { mean, .. } => {
                    *mean = v.num()?;
                    Ok(())
                }
                _ => Err("only applies to the exponential models".into()),
            },
        },
        Key {
            name: "compute.samples",
            ty: Ty::List(Kind::Time),
            get: |c| match &c.problem.analysis.compute.distribution {
                ComputeDistribution::Empirical { samples } => Some(Value::List(samples.to_vec())),
                _ => None,
            },
            set: |c, v| {
                let Value::List(xs) = v else {
                    return Err("expected a list".into());
                };
                let m = &mut c.problem.analysis.compute;
                if !matches!(m.distribution, ComputeDistribution::Empirical { .. }) {
                    return Err("only applies to the empirical model".into());
                }
                m.distribution = ComputeModel::empirical(xs).distribution;
                Ok(())
            },
        },
        flag!(
            "compute.workload_scaling",
            problem.analysis.compute.workload_scaling
        ),
        num!(
            "compute.reference_data_size",
            Data,
            problem.analysis.compute.reference_data_size
        ),
        num!(
            "analysis.rel_tol",
            Scalar,
            problem.analysis.quadrature_rel_tol
        ),
        num!("solver.tol", Time, problem.analysis.solver.tol),
        int!("solver.max_iter", problem.analysis.solver.max_iter),
        num!(
            "energy.correction_factor",
            Scalar,
            problem.energy.correction_factor
        ),
        num!("energy.takeoff_mass", Mass, problem.energy.takeoff_mass),
        num!("energy.gravity", Acceleration, problem.energy.gravity),
        num!(
            "energy.air_density",
            MassDensity,
            problem.energy.air_density
        ),
        num!(
            "energy.rotor_disc_area",
            Area,
            problem.energy.rotor_disc_area
        ),
        num!(
            "energy.profile_drag_coeff",
            Scalar,
            problem.energy.profile_drag_coeff
        ),
        num!("energy.blade_area", Area, problem.energy.blade_area),
        num!("energy.tip_speed", Speed, problem.energy.tip_speed),
        num!(
            "energy.initial_altitude",
            Length,
            problem.energy.initial_altitude
        ),
        flag!("energy.descent_credit", problem.energy.descent_credit),
        Key {
            name: "energy.tasks_per_mission",
            ty: Ty::OptNum(Kind::Scalar, "auto"),
            get: |c| {
                Some(match c.problem.energy.tasks_per_mission {
                    Some(x) => Value::Num(x),
                    None => Value::Keyword,
                })
            },
            set: |c, v| {
                c.problem.energy.tasks_per_mission = v.opt()?;
                Ok(())
            },
        },
        budget!("budgets.battery", battery),
        budget!("budgets.fuel", fuel),
        num!("bounds.power_min", Power, problem.bounds.power_min),
        num!("bounds.power_max", Power, problem.bounds.power_max),
        num!("bounds.altitude_min", Length, problem.bounds.altitude_min),
        num!("bounds.altitude_max", Length, problem.bounds.altitude_max),
        int!("optimizer.max_iter", optimizer.max_iter),
        num!("optimizer.epsilon", Scalar, optimizer.epsilon),
        int!("optimizer.window", optimizer.window),
        num!(
            "optimizer.initial_altitude",
            Length,
            optimizer.initial_altitude
        ),
        num!(
            "optimizer.initial_power",
            PowerDbw,
            optimizer.initial_power_dbw
        ),
        num!(
            "optimizer.fallback_altitude",
            Length,
            optimizer.fallback_altitude
        ),
        num!(
            "optimizer.fallback_power",
            PowerDbw,
            optimizer.fallback_power_dbw
        ),
        num!("optimizer.altitude_tol", Length, optimizer.altitude_tol),
        int!("optimizer.golden_max_probes", optimizer.golden_max_probes),
        Key {
            name: "optimizer.escape_offsets_db",
            ty: Ty::List(Kind::Decibel),
            get: |c| Some(Value::List(c.optimizer.escape_offsets_db.clone())),
            set: |c, v| match v {
                Value::List(xs) => {
                    c.optimizer.escape_offsets_db = xs;
                    Ok(())
                }
                _ => Err("expected a list".into()),
            },
        },
        num!(
            "quasi_newton.fd_step_rel",
            Scalar,
            optimizer.quasi_newton.fd_step_rel
        ),
        num!(
            "quasi_newton.hessian_floor",
            Scalar,
            optimizer.quasi_newton.hessian_floor
        ),
        num!(
            "quasi_newton.lr_init",
            Scalar,
            optimizer.quasi_newton.lr_init
        ),
        num!(
            "quasi_newton.lr_decay",
            Scalar,
            optimizer.quasi_newton.lr_decay
        ),
        num!(
            "quasi_newton.step_tol",
            Decibel,
            optimizer.quasi_newton.step_tol
        ),
        num!(
            "quasi_newton.max_step_rel",
            Scalar,
            optimizer.quasi_newton.max_step_rel
        ),
        int!("quasi_newton.max_probes", optimizer.quasi_newton.max_probes),
        int!("bayes.eval_budget", bayes.eval_budget),
        int!("bayes.initial_points", bayes.initial_points),
        int!("bayes.grid", bayes.grid),
        Key {
            name: "bayes.length_scales",
            ty: Ty::List(Kind::Scalar),
            get: |c| Some(Value::List(c.bayes.length_scales.clone())),
            set: |c, v| match v {
                Value::List(xs) => {
                    c.bayes.length_scales = xs;
                    Ok(())
                }
                _ => Err("expected a list".into()),
            },
        },
        num!("bayes.xi", Scalar, bayes.xi),
        num!("bayes.noise", Scalar, bayes.noise),
        int!("oracle.altitude_points", oracle_altitude_points),
        int!("oracle.power_points", oracle_power_points),
        int!("sim.trials", sim.trials),
        int!("sim.gu_samples", sim.gu_samples),
        Key {
            name: "sim.window_radius",
            ty: Ty::OptNum(Kind::Length, "auto"),
            get: |c| {
                Some(match c.sim.window_radius {
                    Some(x) => Value::Num(x),
                    None => Value::Keyword,
                })
            },
            set: |c, v| {
                c.sim.window_radius = v.opt()?;
                Ok(())
            },
        },
        int!("figures.budget_points", figure_budget_points),
        int!("figures.altitude_points", figure_altitude_points),
    ]
}

/// Every key with its canonical unit, for `--help`-style listings.
pub fn key_listing() -> Vec<(String, String)> {
    registry()
        .into_iter()
        .map(|k| {
            let desc = match k.ty {
                Ty::Num(kind) | Ty::List(kind) => kind.units().join("|"),
                Ty::OptNum(kind, kw) => format!("{}|{kw}", kind.units().join("|")),
                Ty::Int => "integer".into(),
                Ty::Flag => "true|false".into(),
                Ty::Text => "text".into(),
                Ty::Choice(c) => c.join("|"),
            };
            (k.name.to_string(), desc)
        })
        .collect()
}

/// Parses a bare number for command-line flags that take no unit.
pub fn parse_plain(raw: &str) -> Result<f64, String> {
    parse_number(raw.trim())
}
