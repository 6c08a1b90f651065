//! Flat `key = value` run configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use qheat::evolution::RunSettings;
use qheat::models::{EngineParams, LoadWindow, ModelKind};
use qheat::sweep::{self, Spacing, SweepAxis};

/// Bad syntax, unknown keys or unusable values; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

pub const FIG2: &str = "\
# engine models against g/p at beta1 E1 = 3, beta2 E2 = 1
model = 2qe-reset,2qe-local,3qe-effective
e1 = 1
e2 = 2
beta1 = 3
beta2 = 0.5
p = 1
sweep.axis = g_over_p
sweep.start = 0.01
sweep.stop = 10
sweep.count = 40
sweep.spacing = log
out = fig2.csv
";

pub const FIG5: &str = "\
# flywheel TUR ratios against the bias at fixed idle probability
model = flywheel
p0 = 0.6
sweep.axis = chi
sweep.start = 0.1
sweep.stop = 10
sweep.count = 100
sweep.spacing = linear
out = fig5.csv
";

pub fn preset(name: &str) -> anyhow::Result<&'static str> {
    match name {
        "fig2" => Ok(FIG2),
        "fig5" => Ok(FIG5),
        _ => Err(bad(format!("unknown preset '{name}' (fig2|fig5)"))),
    }
}

const ENGINE_KEYS: [&str; 8] = ["e1", "e2", "beta1", "beta2", "p", "g", "k", "p_prime"];
const OTHER_KEYS: [&str; 23] = [
    "model",
    "g_over_p",
    "chi",
    "p0",
    "d",
    "cycles",
    "trials",
    "checkpoints",
    "fock_n_max",
    "sweep.axis",
    "sweep.start",
    "sweep.stop",
    "sweep.count",
    "sweep.spacing",
    "window.n_min",
    "window.n_max",
    "horizon",
    "courant_fraction",
    "samples",
    "check_positivity",
    "out",
    "seed",
    "jobs",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSel {
    Engine(ModelKind),
    Flywheel,
}

impl fmt::Display for ModelSel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSel::Engine(k) => write!(f, "{k}"),
            ModelSel::Flywheel => f.write_str("flywheel"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlywheelConfig {
    pub chi: f64,
    pub p0: f64,
    pub d: f64,
    pub cycles: u64,
    pub trials: u64,
    pub checkpoints: Vec<u64>,
    pub fock_n_max: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub models: Vec<ModelSel>,
    pub engine: EngineParams,
    pub flywheel: FlywheelConfig,
    pub axis: Option<SweepAxis>,
    pub window: LoadWindow,
    pub settings: RunSettings,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub jobs: Option<usize>,
}

/// Key/value assignments; later sources override earlier ones.
#[derive(Debug, Clone, Default)]
pub struct Assignments(BTreeMap<String, String>);

impl Assignments {
    pub fn parse_text(&mut self, text: &str, origin: &str) -> anyhow::Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("{origin}:{}: expected key = value", i + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn parse_file(&mut self, path: &Path) -> anyhow::Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        self.parse_text(&text, &path.display().to_string())
    }

    /// One `key=value` override from the command line.
    pub fn parse_override(&mut self, arg: &str) -> anyhow::Result<()> {
        let (k, v) = arg.split_once('=').ok_or_else(|| bad(format!("--set expects key=value, got '{arg}'")))?;
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> anyhow::Result<()> {
        if !ENGINE_KEYS.contains(&key) && !OTHER_KEYS.contains(&key) {
            return Err(bad(format!("unknown key '{key}'")));
        }
        self.0.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn num<T: std::str::FromStr>(&self, key: &str) -> anyhow::Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| bad(format!("'{key}': cannot parse '{v}'"))))
            .transpose()
    }

    pub fn build(&self) -> anyhow::Result<RunConfig> {
        let models = match self.get("model") {
            None => vec![ModelSel::Engine(ModelKind::TwoQubitReset)],
            Some(list) => list
                .split(',')
                .map(|m| match m.trim() {
                    "flywheel" => Ok(ModelSel::Flywheel),
                    other => other.parse::<ModelKind>().map(ModelSel::Engine).map_err(|_| {
                        bad(format!("unknown model '{other}' (2qe-reset|2qe-local|3qe-effective|3qe-full|flywheel)"))
                    }),
                })
                .collect::<anyhow::Result<Vec<_>>>()?,
        };

        // plain parameters first, then the ones defined relative to them
        let mut engine = EngineParams::default();
        for key in ENGINE_KEYS.iter().chain(["g_over_p"].iter()) {
            if let Some(v) = self.num::<f64>(key)? {
                sweep::set_engine_param(&mut engine, key, v).map_err(|e| bad(e.to_string()))?;
            }
        }
        let flywheel_only = models.iter().all(|m| *m == ModelSel::Flywheel);
        let chi = self.num::<f64>("chi")?;
        if let (Some(v), false) = (chi, flywheel_only) {
            sweep::set_engine_param(&mut engine, "chi", v).map_err(|e| bad(e.to_string()))?;
        }

        let cycles = self.num::<u64>("cycles")?.unwrap_or(1000);
        let checkpoints = match self.get("checkpoints") {
            None => vec![cycles],
            Some(list) => list
                .split(',')
                .map(|c| c.trim().parse::<u64>().map_err(|_| bad(format!("bad checkpoint '{c}'"))))
                .collect::<anyhow::Result<Vec<_>>>()?,
        };
        let flywheel = FlywheelConfig {
            chi: chi.unwrap_or(2.0),
            p0: self.num("p0")?.unwrap_or(0.6),
            d: self.num("d")?.unwrap_or(0.1),
            cycles,
            trials: self.num("trials")?.unwrap_or(100_000),
            checkpoints,
            fock_n_max: self.num("fock_n_max")?,
        };

        let axis = match self.get("sweep.axis") {
            None => None,
            Some(name) => {
                let known = if flywheel_only { name == "chi" } else { sweep::ENGINE_PARAM_NAMES.contains(&name) };
                if !known {
                    return Err(bad(format!("cannot sweep '{name}' for this model")));
                }
                let need = |k: &str| -> anyhow::Result<f64> {
                    self.num::<f64>(k)?.ok_or_else(|| bad(format!("'{k}' is required with sweep.axis")))
                };
                let spacing = match self.get("sweep.spacing") {
                    None => Spacing::Linear,
                    Some(s) => s.parse::<Spacing>().map_err(|e| bad(e.to_string()))?,
                };
                let count = self.num::<usize>("sweep.count")?.unwrap_or(1);
                Some(SweepAxis::new(name, need("sweep.start")?, need("sweep.stop")?, count, spacing).map_err(|e| bad(e.to_string()))?)
            }
        };

        let default_window = LoadWindow::default();
        let window = LoadWindow::new(
            self.num("window.n_min")?.unwrap_or(default_window.n_min),
            self.num("window.n_max")?.unwrap_or(default_window.n_max),
        );
        let defaults = RunSettings::default();
        let settings = RunSettings {
            horizon: self.num("horizon")?,
            courant_fraction: self.num("courant_fraction")?.unwrap_or(defaults.courant_fraction),
            samples: self.num("samples")?.unwrap_or(defaults.samples),
            check_positivity: self.num("check_positivity")?.unwrap_or(defaults.check_positivity),
        };
        if !(settings.courant_fraction > 0.0 && settings.courant_fraction <= 1.0) {
            return Err(bad("courant_fraction must lie in (0, 1]"));
        }

        Ok(RunConfig {
            models,
            engine,
            flywheel,
            axis,
            window,
            settings,
            out: self.get("out").map(PathBuf::from),
            seed: self.num("seed")?.unwrap_or(1),
            jobs: self.num("jobs")?,
        })
    }
}
