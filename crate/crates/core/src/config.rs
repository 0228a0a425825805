//! Physical parameters, initial states and the `key = value` run-file format.
//!
//! Every frequency is dimensionless, measured in units of the band-edge
//! coupling frequency β; times are in units of 1/β.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance on `omega1c - omega2c == omega12`.
pub const DETUNING_TOLERANCE: f64 = 1e-9;
/// Tolerance on the unit norm of the initial amplitudes.
pub const NORM_TOLERANCE: f64 = 1e-12;

/// Parameters of the two-atom system, all in units of β.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// RDDI strength between the |a1 a6> and |a3 a4> pair.
    pub gamma1: f64,
    /// RDDI strength between the |a2 a6> and |a3 a5> pair.
    pub gamma2: f64,
    /// Upper-level splitting ω13 − ω23.
    pub omega12: f64,
    /// Detuning of the upper level |a1> from the band edge (negative: inside the gap).
    pub omega1c: f64,
    /// Detuning of the upper level |a2> from the band edge.
    pub omega2c: f64,
    /// Angle between the two transition dipoles, radians.
    pub eta: f64,
    /// Normalization frequency. Always 1 for the presets.
    pub beta: f64,
}

impl SystemConfig {
    /// Identical RDDI strengths, ω12 derived from the two detunings, β = 1.
    pub fn symmetric(gamma: f64, eta: f64, omega1c: f64, omega2c: f64) -> Self {
        SystemConfig {
            gamma1: gamma,
            gamma2: gamma,
            omega12: omega1c - omega2c,
            omega1c,
            omega2c,
            eta,
            beta: 1.0,
        }
    }

    pub fn cos_eta(&self) -> f64 {
        self.eta.cos()
    }

    pub fn sin_eta(&self) -> f64 {
        self.eta.sin()
    }

    /// β^{3/2}, the prefactor of every kernel value.
    pub fn beta_three_halves(&self) -> f64 {
        self.beta * self.beta.sqrt()
    }

    /// Largest frequency scale of the problem; sets search boxes and step sizes.
    pub fn frequency_scale(&self) -> f64 {
        [
            self.gamma1,
            self.gamma2,
            self.omega1c.abs(),
            self.omega2c.abs(),
            self.omega12.abs(),
            self.beta,
        ]
        .into_iter()
        .fold(1.0, f64::max)
    }

    pub fn check(&self) -> Result<()> {
        let finite = [
            self.gamma1,
            self.gamma2,
            self.omega12,
            self.omega1c,
            self.omega2c,
            self.eta,
            self.beta,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::Domain("parameters must be finite".into()));
        }
        if self.gamma1 < 0.0 || self.gamma2 < 0.0 {
            return Err(Error::Domain(format!(
                "RDDI strengths must be non-negative (gamma1 = {}, gamma2 = {})",
                self.gamma1, self.gamma2
            )));
        }
        if !(0.0..=PI).contains(&self.eta) {
            return Err(Error::Domain(format!("eta = {} outside [0, pi]", self.eta)));
        }
        if self.beta <= 0.0 {
            return Err(Error::Domain(format!("beta = {} must be positive", self.beta)));
        }
        let difference = self.omega1c - self.omega2c;
        if (difference - self.omega12).abs() > DETUNING_TOLERANCE {
            return Err(Error::InconsistentDetunings {
                difference,
                omega12: self.omega12,
            });
        }
        Ok(())
    }
}

/// Zero-photon amplitudes of |a1a6>, |a2a6>, |a3a4>, |a3a5> at t = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub amplitudes: [Complex64; 4],
}

impl InitialState {
    pub fn new(amplitudes: [Complex64; 4]) -> Self {
        InitialState { amplitudes }
    }

    pub fn real(a: [f64; 4]) -> Self {
        InitialState {
            amplitudes: a.map(|v| Complex64::new(v, 0.0)),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn check(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Normalization { norm });
        }
        Ok(())
    }
}

/// Checks both records and hands them back unchanged.
pub fn validate(config: SystemConfig, init: InitialState) -> Result<(SystemConfig, InitialState)> {
    config.check()?;
    init.check()?;
    Ok((config, init))
}

/// `unentangled` is |a1 a6>; `bright` is (|a1 a6> + |a3 a4>)/√2.
pub fn preset_initial(name: &str) -> Result<InitialState> {
    match name {
        "unentangled" => Ok(InitialState::real([1.0, 0.0, 0.0, 0.0])),
        "bright" => Ok(InitialState::real([FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0])),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Which time-domain engine a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Analytic,
    Oracle,
    Both,
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(Engine::Analytic),
            "oracle" => Ok(Engine::Oracle),
            "both" => Ok(Engine::Both),
            other => Err(Error::Domain(format!(
                "engine must be analytic, oracle or both (got `{other}`)"
            ))),
        }
    }
}

impl Engine {
    pub fn as_str(&self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Oracle => "oracle",
            Engine::Both => "both",
        }
    }
}

/// How the initial state was specified in a run file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialKind {
    Unentangled,
    Bright,
    Custom,
}

/// Everything a run file specifies.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub initial_kind: InitialKind,
    pub initial: InitialState,
    pub t_max: f64,
    pub dt_out: f64,
    pub engine: Option<Engine>,
    pub modes: Option<usize>,
}

pub const DEFAULT_DT_OUT: f64 = 0.5;
pub const DEFAULT_T_MAX: f64 = 100.0;

const KNOWN_KEYS: &[&str] = &[
    "gamma1",
    "gamma2",
    "omega12",
    "omega1c",
    "omega2c",
    "eta_degrees",
    "initial",
    "a1_re",
    "a1_im",
    "a2_re",
    "a2_im",
    "a3_re",
    "a3_im",
    "a4_re",
    "a4_im",
    "t_max",
    "dt_out",
    "engine",
    "modes",
];

impl RunConfig {
    /// Parses the `key = value` run-file format. Blank lines and `#` comments
    /// are skipped; unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries: Vec<(&str, &str, usize)> = Vec::new();
        for (index, raw) in text.lines().enumerate() {
            let line_no = index + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `key = value`, found `{}`", raw.trim()),
            })?;
            let key = key.trim();
            let value = value.trim();
            if key.is_empty() || value.is_empty() || value.contains('=') {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("malformed assignment `{}`", raw.trim()),
                });
            }
            if !KNOWN_KEYS.contains(&key) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unknown key `{key}`"),
                });
            }
            if entries.iter().any(|(k, _, _)| *k == key) {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entries.push((key, value, line_no));
        }

        let lookup = |key: &str| entries.iter().find(|(k, _, _)| *k == key).copied();
        let number = |key: &str| -> Result<Option<f64>> {
            match lookup(key) {
                None => Ok(None),
                Some((_, value, line)) => value.parse::<f64>().map(Some).map_err(|_| Error::Parse {
                    line,
                    message: format!("`{key}` expects a number, found `{value}`"),
                }),
            }
        };
        let required = |key: &str| -> Result<f64> {
            number(key)?.ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing required key `{key}`"),
            })
        };

        let eta_degrees = required("eta_degrees")?;
        let system = SystemConfig {
            gamma1: required("gamma1")?,
            gamma2: required("gamma2")?,
            omega12: required("omega12")?,
            omega1c: required("omega1c")?,
            omega2c: required("omega2c")?,
            eta: eta_degrees.to_radians(),
            beta: 1.0,
        };

        let (initial_kind, initial) = match lookup("initial") {
            None => {
                return Err(Error::Parse {
                    line: 0,
                    message: "missing required key `initial`".into(),
                })
            }
            Some((_, "unentangled", _)) => (InitialKind::Unentangled, preset_initial("unentangled")?),
            Some((_, "bright", _)) => (InitialKind::Bright, preset_initial("bright")?),
            Some((_, "custom", _)) => {
                let mut amplitudes = [Complex64::new(0.0, 0.0); 4];
                for (i, amplitude) in amplitudes.iter_mut().enumerate() {
                    let re = number(&format!("a{}_re", i + 1))?.unwrap_or(0.0);
                    let im = number(&format!("a{}_im", i + 1))?.unwrap_or(0.0);
                    *amplitude = Complex64::new(re, im);
                }
                (InitialKind::Custom, InitialState::new(amplitudes))
            }
            Some((_, other, line)) => {
                return Err(Error::Parse {
                    line,
                    message: format!("`initial` must be unentangled, bright or custom, found `{other}`"),
                })
            }
        };
        if initial_kind != InitialKind::Custom {
            if let Some((key, _, line)) = entries.iter().find(|(k, _, _)| k.starts_with('a') && k.contains('_')) {
                return Err(Error::Parse {
                    line: *line,
                    message: format!("`{key}` is only allowed with initial = custom"),
                });
            }
        }

        let engine = match lookup("engine") {
            None => None,
            Some((_, value, line)) => Some(value.parse::<Engine>().map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?),
        };
        let modes = match lookup("modes") {
            None => None,
            Some((_, value, line)) => Some(value.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("`modes` expects a positive integer, found `{value}`"),
            })?),
        };

        let t_max = number("t_max")?.unwrap_or(DEFAULT_T_MAX);
        let dt_out = number("dt_out")?.unwrap_or(DEFAULT_DT_OUT);
        if !(t_max > 0.0 && t_max.is_finite()) || !(dt_out > 0.0 && dt_out.is_finite()) {
            return Err(Error::Domain(format!(
                "t_max and dt_out must be positive (t_max = {t_max}, dt_out = {dt_out})"
            )));
        }

        let (system, initial) = validate(system, initial)?;
        Ok(RunConfig {
            system,
            initial_kind,
            initial,
            t_max,
            dt_out,
            engine,
            modes,
        })
    }

    /// Renders the run file that [`RunConfig::parse`] reads back.
    pub fn to_config_text(&self) -> String {
        let s = &self.system;
        let mut out = String::new();
        let _ = writeln!(out, "gamma1 = {}", s.gamma1);
        let _ = writeln!(out, "gamma2 = {}", s.gamma2);
        let _ = writeln!(out, "omega12 = {}", s.omega12);
        let _ = writeln!(out, "omega1c = {}", s.omega1c);
        let _ = writeln!(out, "omega2c = {}", s.omega2c);
        let _ = writeln!(out, "eta_degrees = {}", s.eta.to_degrees());
        match self.initial_kind {
            InitialKind::Unentangled => out.push_str("initial = unentangled\n"),
            InitialKind::Bright => out.push_str("initial = bright\n"),
            InitialKind::Custom => {
                out.push_str("initial = custom\n");
                for (i, a) in self.initial.amplitudes.iter().enumerate() {
                    let _ = writeln!(out, "a{}_re = {}", i + 1, a.re);
                    let _ = writeln!(out, "a{}_im = {}", i + 1, a.im);
                }
            }
        }
        let _ = writeln!(out, "t_max = {}", self.t_max);
        let _ = writeln!(out, "dt_out = {}", self.dt_out);
        if let Some(engine) = self.engine {
            let _ = writeln!(out, "engine = {}", engine.as_str());
        }
        if let Some(modes) = self.modes {
            let _ = writeln!(out, "modes = {modes}");
        }
        out
    }

    /// Output grid 0, dt_out, 2 dt_out, … up to t_max inclusive.
    pub fn time_grid(&self) -> Vec<f64> {
        time_grid(self.t_max, self.dt_out)
    }
}

/// Uniform output grid starting at zero; the last point is the largest
/// multiple of `dt` not exceeding `t_max` (with a small slack for rounding).
pub fn time_grid(t_max: f64, dt: f64) -> Vec<f64> {
    let steps = (t_max / dt + 1e-9).floor() as usize;
    (0..=steps).map(|k| k as f64 * dt).collect()
}
