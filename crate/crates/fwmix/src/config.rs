//! Flat key-value configuration files: `key = value` lines, `#` comments.
//! Unknown keys are errors (with line numbers) so typos surface instead of
//! silently using defaults.

use crate::error::{Error, Result};
use crate::experiments::{figure_preset, ExperimentConfig, OraclePolicy, ReducedCurveSpec};
use crate::propagation::Convention;
use std::collections::BTreeMap;

/// Parsed key-value file with line provenance.
#[derive(Debug, Clone, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, (usize, String)>,
}

/// Keys understood by the experiment loader.
const KNOWN_KEYS: &[&str] = &[
    "preset",
    "convention",
    "oracle",
    "grid.nz",
    "grid.ntau",
    "grid.zmax",
    "grid.tau_lo",
    "grid.tau_hi",
    "pump.peak",
    "pump.center",
    "pump.width",
    "idler.peak",
    "idler.center",
    "idler.width",
    "stark.peak",
    "stark.center",
    "stark.width",
    "delta20",
    "omega10m_t1",
    "reduced.b1",
    "reduced.b2",
    "reduced.ratio",
    "reduced.s",
];

impl ConfigMap {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let stripped = raw.split('#').next().unwrap_or("").trim();
            if stripped.is_empty() {
                continue;
            }
            let (key, value) = stripped.split_once('=').ok_or(Error::Config {
                line,
                msg: format!("expected 'key = value', got '{stripped}'"),
            })?;
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Config { line, msg: "empty key".into() });
            }
            entries.insert(key, (line, value.trim().to_string()));
        }
        Ok(ConfigMap { entries })
    }

    pub fn get_str(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<f64>().map(Some).map_err(|_| Error::Config {
                line: *line,
                msg: format!("field '{key}': '{v}' is not a number"),
            }),
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse::<usize>().map(Some).map_err(|_| Error::Config {
                line: *line,
                msg: format!("field '{key}': '{v}' is not a positive integer"),
            }),
        }
    }

    fn reject_unknown(&self) -> Result<()> {
        for (k, (line, _)) in &self.entries {
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::Config { line: *line, msg: format!("unknown key '{k}'") });
            }
        }
        Ok(())
    }

    /// Builds an experiment configuration: preset first (default fig4),
    /// explicit keys override preset fields.
    pub fn to_experiment(&self) -> Result<ExperimentConfig> {
        self.reject_unknown()?;
        let preset = self.get_str("preset").unwrap_or("fig4");
        let mut cfg = figure_preset(preset)?;
        if let Some(v) = self.get_str("convention") {
            cfg.convention = parse_convention(v, self.line_of("convention"))?;
        }
        if let Some(v) = self.get_str("oracle") {
            cfg.oracle = parse_oracle(v, self.line_of("oracle"))?;
        }
        if let Some(v) = self.get_usize("grid.nz")? {
            cfg.grid.nz = v;
        }
        if let Some(v) = self.get_usize("grid.ntau")? {
            cfg.grid.ntau = v;
        }
        if let Some(v) = self.get_f64("grid.zmax")? {
            cfg.grid.zmax_kap0 = v;
        }
        if let Some(v) = self.get_f64("grid.tau_lo")? {
            cfg.grid.tau_lo = v;
        }
        if let Some(v) = self.get_f64("grid.tau_hi")? {
            cfg.grid.tau_hi = v;
        }
        for (key, field) in [
            ("pump", 0usize),
            ("idler", 1),
            ("stark", 2),
        ] {
            let pulse = match field {
                0 => &mut cfg.pulses.pump,
                1 => &mut cfg.pulses.idler,
                _ => &mut cfg.pulses.stark,
            };
            if let Some(v) = self.get_f64(&format!("{key}.peak"))? {
                pulse.peak = v;
            }
            if let Some(v) = self.get_f64(&format!("{key}.center"))? {
                pulse.center = v;
            }
            if let Some(v) = self.get_f64(&format!("{key}.width"))? {
                pulse.width = v;
            }
        }
        if let Some(v) = self.get_f64("delta20")? {
            cfg.pulses.delta20 = v;
        }
        if let Some(v) = self.get_f64("omega10m_t1")? {
            cfg.pulses.omega10m_t1 = v;
        }
        // reduced-curve overrides
        let rb1 = self.get_f64("reduced.b1")?;
        let rb2 = self.get_f64("reduced.b2")?;
        if rb1.is_some() || rb2.is_some() {
            let prev = cfg.reduced.unwrap_or(ReducedCurveSpec {
                b1: 0.1,
                b2: 0.5,
                ratio: 0.01,
                s: 1.0,
            });
            cfg.reduced = Some(ReducedCurveSpec {
                b1: rb1.unwrap_or(prev.b1),
                b2: rb2.unwrap_or(prev.b2),
                ratio: self.get_f64("reduced.ratio")?.unwrap_or(prev.ratio),
                s: self.get_f64("reduced.s")?.unwrap_or(prev.s),
            });
        } else if let Some(spec) = cfg.reduced.as_mut() {
            if let Some(v) = self.get_f64("reduced.ratio")? {
                spec.ratio = v;
            }
            if let Some(v) = self.get_f64("reduced.s")? {
                spec.s = v;
            }
        }
        validate_pulses(&cfg)?;
        Ok(cfg)
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map(|(l, _)| *l).unwrap_or(0)
    }
}

fn validate_pulses(cfg: &ExperimentConfig) -> Result<()> {
    for (name, p) in [
        ("pump", &cfg.pulses.pump),
        ("idler", &cfg.pulses.idler),
        ("stark", &cfg.pulses.stark),
    ] {
        if p.width <= 0.0 {
            return Err(Error::Config { line: 0, msg: format!("{name}.width must be positive") });
        }
        if p.peak < 0.0 {
            return Err(Error::Config {
                line: 0,
                msg: format!("{name}.peak must be non-negative"),
            });
        }
    }
    Ok(())
}

pub fn parse_convention(v: &str, line: usize) -> Result<Convention> {
    match v {
        "as-printed" => Ok(Convention::AsPrinted),
        "manley-rowe" => Ok(Convention::ManleyRowe),
        other => Err(Error::Config {
            line,
            msg: format!("convention '{other}' (expected as-printed | manley-rowe)"),
        }),
    }
}

pub fn parse_oracle(v: &str, line: usize) -> Result<OraclePolicy> {
    match v {
        "none" => Ok(OraclePolicy::None),
        "quad" => Ok(OraclePolicy::Quad),
        "ode" => Ok(OraclePolicy::Ode),
        other => Err(Error::Config {
            line,
            msg: format!("oracle '{other}' (expected none | quad | ode)"),
        }),
    }
}
