//! Pipeline configuration: defaults, `key=value` config files, and the
//! worker-count environment variable.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::error::Error;
use crate::exec::ExecutionSettings;
use crate::gila::{choose_k, LayoutParams};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "MULTIGILA_WORKERS";

/// Force-directed layout settings shared by every level.
#[derive(Clone, Debug, PartialEq)]
pub struct LayoutConfig {
    pub ideal_length: f64,
    pub repulsion_constant: f64,
    pub initial_max_displacement: f64,
    pub cooling_exponent: f64,
    pub mass_repulsion: bool,
    pub coarsest_iterations: usize,
    pub refine_iterations: usize,
    pub reflood_period: usize,
    /// Fixed neighborhood radius; by default it follows the level's edge count.
    pub k: Option<usize>,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        let p = LayoutParams::default();
        LayoutConfig {
            ideal_length: p.ideal_length,
            repulsion_constant: p.repulsion_constant,
            initial_max_displacement: p.initial_max_displacement,
            cooling_exponent: p.cooling_exponent,
            mass_repulsion: p.mass_repulsion,
            coarsest_iterations: 300,
            refine_iterations: 50,
            reflood_period: p.reflood_period,
            k: None,
        }
    }
}

impl LayoutConfig {
    /// Parameters for a level with `m` edges.
    pub fn params(&self, m: usize, coarsest: bool) -> LayoutParams {
        LayoutParams {
            k: self.k.unwrap_or_else(|| choose_k(m)),
            iterations: if coarsest { self.coarsest_iterations } else { self.refine_iterations },
            ideal_length: self.ideal_length,
            repulsion_constant: self.repulsion_constant,
            initial_max_displacement: self.initial_max_displacement,
            cooling_exponent: self.cooling_exponent,
            mass_repulsion: self.mass_repulsion,
            reflood_period: self.reflood_period,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub input: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub coords: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub dump_levels: Option<PathBuf>,
    pub workers: usize,
    pub partitions: Option<usize>,
    pub seed: u64,
    pub sun_probability: f64,
    pub coarsen_threshold: usize,
    pub prune_iterations: usize,
    pub balance_epsilon: f64,
    pub partition_rounds: usize,
    pub repartition_per_level: bool,
    /// Check every hierarchy invariant after coarsening (slow on big graphs).
    pub verify: bool,
    pub verbose: bool,
    pub layout: LayoutConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let exec = ExecutionSettings::default();
        PipelineConfig {
            input: None,
            svg: None,
            coords: None,
            report: None,
            dump_levels: None,
            workers: exec.workers,
            partitions: None,
            seed: 0,
            sun_probability: 0.2,
            coarsen_threshold: 30,
            prune_iterations: 1,
            balance_epsilon: exec.balance_epsilon,
            partition_rounds: exec.partition_rounds,
            repartition_per_level: exec.repartition_per_level,
            verify: false,
            verbose: false,
            layout: LayoutConfig::default(),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for {key}")))
}

pub fn parse_switch(key: &str, value: &str) -> Result<bool, Error> {
    match value {
        "on" | "true" | "yes" | "1" => Ok(true),
        "off" | "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid value {value:?} for {key}, expected on or off"))),
    }
}

fn optional_path(value: &str) -> Option<PathBuf> {
    (!value.is_empty()).then(|| PathBuf::from(value))
}

impl PipelineConfig {
    /// Defaults with the worker count taken from the environment, if set.
    pub fn from_env() -> Result<Self, Error> {
        let mut cfg = PipelineConfig::default();
        if let Ok(value) = std::env::var(WORKERS_ENV) {
            cfg.set("workers", value.trim())?;
        }
        Ok(cfg)
    }

    pub fn execution(&self) -> ExecutionSettings {
        ExecutionSettings {
            workers: self.workers,
            partitions: self.partitions,
            balance_epsilon: self.balance_epsilon,
            partition_rounds: self.partition_rounds,
            repartition_per_level: self.repartition_per_level,
            ..ExecutionSettings::default()
        }
    }

    /// Sets one key. Layout keys may be written with or without the
    /// `layout.` prefix.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), Error> {
        let key = key.trim();
        let value = value.trim();
        let bare = key.strip_prefix("layout.").unwrap_or(key);
        let l = &mut self.layout;
        match bare {
            "input" => self.input = optional_path(value),
            "svg" => self.svg = optional_path(value),
            "coords" => self.coords = optional_path(value),
            "report" => self.report = optional_path(value),
            "dump_levels" => self.dump_levels = optional_path(value),
            "workers" => self.workers = parse(key, value)?,
            "partitions" => self.partitions = if value == "auto" { None } else { Some(parse(key, value)?) },
            "seed" => self.seed = parse(key, value)?,
            "sun_probability" => self.sun_probability = parse(key, value)?,
            "coarsen_threshold" => self.coarsen_threshold = parse(key, value)?,
            "prune_iterations" => self.prune_iterations = parse(key, value)?,
            "balance_epsilon" => self.balance_epsilon = parse(key, value)?,
            "partition_rounds" => self.partition_rounds = parse(key, value)?,
            "repartition_per_level" => self.repartition_per_level = parse_switch(key, value)?,
            "verify" => self.verify = parse_switch(key, value)?,
            "verbose" => self.verbose = parse_switch(key, value)?,
            "ideal_length" => l.ideal_length = parse(key, value)?,
            "repulsion_constant" => l.repulsion_constant = parse(key, value)?,
            "initial_max_displacement" => l.initial_max_displacement = parse(key, value)?,
            "cooling_exponent" => l.cooling_exponent = parse(key, value)?,
            "mass_repulsion" => l.mass_repulsion = parse_switch(key, value)?,
            "coarsest_iterations" => l.coarsest_iterations = parse(key, value)?,
            "refine_iterations" => l.refine_iterations = parse(key, value)?,
            "reflood_period" => l.reflood_period = parse(key, value)?,
            "k" => l.k = if value == "auto" { None } else { Some(parse(key, value)?) },
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a `key=value` file. Blank lines and `#` comments are
    /// skipped; a `[layout]` header prefixes the keys that follow.
    pub fn apply_file_contents(&mut self, text: &str) -> Result<(), Error> {
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            let key = key.trim();
            let full = if section.is_empty() { key.to_string() } else { format!("{section}.{key}") };
            self.set(&full, value).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.partitions == Some(0) {
            return Err(Error::Config("partitions must be at least 1".into()));
        }
        if !(self.sun_probability > 0.0 && self.sun_probability <= 1.0) {
            return Err(Error::Config(format!("sun_probability must be in (0, 1], got {}", self.sun_probability)));
        }
        if self.coarsen_threshold < 2 {
            return Err(Error::Config("coarsen_threshold must be at least 2".into()));
        }
        if self.balance_epsilon <= 0.0 || !self.balance_epsilon.is_finite() {
            return Err(Error::Config("balance_epsilon must be positive".into()));
        }
        if self.layout.coarsest_iterations == 0 || self.layout.refine_iterations == 0 {
            return Err(Error::Config("iteration counts must be positive".into()));
        }
        self.layout.params(0, true).validate().map_err(Error::Config)
    }

    /// The effective configuration in the file format.
    pub fn to_config_string(&self) -> String {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let switch = |b: bool| if b { "on" } else { "off" };
        let l = &self.layout;
        let mut out = String::new();
        let _ = writeln!(out, "input = {}", path(&self.input));
        let _ = writeln!(out, "svg = {}", path(&self.svg));
        let _ = writeln!(out, "coords = {}", path(&self.coords));
        let _ = writeln!(out, "report = {}", path(&self.report));
        let _ = writeln!(out, "dump_levels = {}", path(&self.dump_levels));
        let _ = writeln!(out, "workers = {}", self.workers);
        let _ = writeln!(out, "partitions = {}", self.partitions.map_or("auto".into(), |p| p.to_string()));
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "sun_probability = {}", self.sun_probability);
        let _ = writeln!(out, "coarsen_threshold = {}", self.coarsen_threshold);
        let _ = writeln!(out, "prune_iterations = {}", self.prune_iterations);
        let _ = writeln!(out, "balance_epsilon = {}", self.balance_epsilon);
        let _ = writeln!(out, "partition_rounds = {}", self.partition_rounds);
        let _ = writeln!(out, "repartition_per_level = {}", switch(self.repartition_per_level));
        let _ = writeln!(out, "verify = {}", switch(self.verify));
        let _ = writeln!(out, "verbose = {}", switch(self.verbose));
        let _ = writeln!(out, "\n[layout]");
        let _ = writeln!(out, "ideal_length = {}", l.ideal_length);
        let _ = writeln!(out, "repulsion_constant = {}", l.repulsion_constant);
        let _ = writeln!(out, "initial_max_displacement = {}", l.initial_max_displacement);
        let _ = writeln!(out, "cooling_exponent = {}", l.cooling_exponent);
        let _ = writeln!(out, "mass_repulsion = {}", switch(l.mass_repulsion));
        let _ = writeln!(out, "coarsest_iterations = {}", l.coarsest_iterations);
        let _ = writeln!(out, "refine_iterations = {}", l.refine_iterations);
        let _ = writeln!(out, "reflood_period = {}", l.reflood_period);
        let _ = writeln!(out, "k = {}", l.k.map_or("auto".into(), |k| k.to_string()));
        out
    }
}
