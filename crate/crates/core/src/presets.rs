//! Named configurations for every figure panel and dressed-state table.

use std::f64::consts::PI;

use crate::config::{preset_initial, Engine, InitialKind, InitialState, RunConfig, SystemConfig, DEFAULT_DT_OUT};
use crate::error::{Error, Result};

/// Whether a preset produces an entanglement series or a pole table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PresetKind {
    Dynamics,
    Poles,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub name: &'static str,
    pub kind: PresetKind,
    pub config: SystemConfig,
    pub initial_kind: InitialKind,
    pub init: InitialState,
    pub t_max: f64,
    pub dt_out: f64,
    pub engine: Engine,
}

impl FigurePreset {
    /// The run file equivalent of this preset.
    pub fn run_config(&self) -> RunConfig {
        RunConfig {
            system: self.config,
            initial_kind: self.initial_kind,
            initial: self.init,
            t_max: self.t_max,
            dt_out: self.dt_out,
            engine: Some(self.engine),
            modes: None,
        }
    }
}

struct Row {
    name: &'static str,
    kind: PresetKind,
    gamma: f64,
    eta: f64,
    omega1c: f64,
    omega2c: f64,
    bright: bool,
    t_max: f64,
}

const fn dynamics(name: &'static str, gamma: f64, eta: f64, w: (f64, f64), bright: bool, t_max: f64) -> Row {
    Row {
        name,
        kind: PresetKind::Dynamics,
        gamma,
        eta,
        omega1c: w.0,
        omega2c: w.1,
        bright,
        t_max,
    }
}

const fn poles(name: &'static str, gamma: f64, eta: f64, w: (f64, f64), bright: bool) -> Row {
    Row {
        name,
        kind: PresetKind::Poles,
        gamma,
        eta,
        omega1c: w.0,
        omega2c: w.1,
        bright,
        t_max: 0.0,
    }
}

const ABOVE: (f64, f64) = (0.6, 0.2);
const GAP: (f64, f64) = (-0.6, -1.0);

const TABLE: &[Row] = &[
    dynamics("fig2a", 1.5, PI, ABOVE, false, 200.0),
    dynamics("fig2b", 6.0, PI, ABOVE, false, 1000.0),
    dynamics("fig2c", 10.0, PI, ABOVE, false, 5000.0),
    dynamics("fig4a", 1.5, PI, GAP, true, 100.0),
    dynamics("fig4b", 6.0, PI, GAP, true, 1000.0),
    dynamics("fig4c", 10.0, PI, GAP, true, 3000.0),
    dynamics("fig5a", 1.5, PI / 2.0, GAP, true, 100.0),
    dynamics("fig5b", 6.0, PI / 2.0, GAP, true, 1000.0),
    dynamics("fig5c", 10.0, PI / 2.0, GAP, true, 5000.0),
    dynamics("fig7a", 5.0, PI / 2.0, ABOVE, true, 500.0),
    dynamics("fig7b", 5.0, PI / 2.0, (0.6, -0.4), true, 500.0),
    dynamics("fig7c", 5.0, PI / 2.0, GAP, true, 500.0),
    dynamics("fig7d", 5.0, PI / 2.0, (-1.6, -2.6), true, 500.0),
    poles("poles3a", 6.0, PI / 2.0, ABOVE, false),
    poles("poles3b", 6.0, PI, ABOVE, false),
    poles("poles6a", 6.0, PI / 2.0, GAP, true),
    poles("poles6b", 6.0, PI, GAP, true),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    TABLE.iter().map(|r| r.name)
}

pub fn preset(name: &str) -> Result<FigurePreset> {
    let row = TABLE
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
    let (initial_kind, init) = if row.bright {
        (InitialKind::Bright, preset_initial("bright")?)
    } else {
        (InitialKind::Unentangled, preset_initial("unentangled")?)
    };
    Ok(FigurePreset {
        name: row.name,
        kind: row.kind,
        config: SystemConfig::symmetric(row.gamma, row.eta, row.omega1c, row.omega2c),
        initial_kind,
        init,
        t_max: row.t_max,
        dt_out: DEFAULT_DT_OUT,
        engine: Engine::Analytic,
    })
}
