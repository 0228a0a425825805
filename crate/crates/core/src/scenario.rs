//! End-to-end pipelines behind the command-line verbs: run files and presets
//! to entanglement series, pole reports, parameter sweeps and their CSV forms.

use std::fmt::Write as _;
use std::str::FromStr;

use rayon::prelude::*;

use crate::bath::{build_bath, default_step, integrate, DEFAULT_CUTOFF, DEFAULT_MODES};
use crate::config::{Engine, InitialState, RunConfig, SystemConfig};
use crate::entanglement::{entanglement_series, EntanglementSeries};
use crate::error::{Error, Result};
use crate::laplace::{find_poles, inversion_poles, table_residues, InversionPlan, PoleSet};
use crate::trajectory::AmplitudeTrajectory;

/// Upper end of the window over which sweep summaries integrate E_N.
pub const INTEGRATION_WINDOW: f64 = 500.0;

/// Options the command line can override on top of a run file.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    pub engine: Option<Engine>,
    pub t_max: Option<f64>,
    pub dt_out: Option<f64>,
    pub modes: Option<usize>,
}

impl RunOptions {
    /// Applies the overrides; the run file's own `engine` and `modes` are
    /// used where no override is given.
    pub fn apply(&self, run: &RunConfig) -> Result<RunConfig> {
        let mut out = run.clone();
        if let Some(t) = self.t_max {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::Domain(format!("t_max must be finite and non-negative (got {t})")));
            }
            out.t_max = t;
        }
        if let Some(dt) = self.dt_out {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Domain(format!("dt_out must be positive (got {dt})")));
            }
            out.dt_out = dt;
        }
        if self.engine.is_some() {
            out.engine = self.engine;
        }
        if self.modes.is_some() {
            out.modes = self.modes;
        }
        Ok(out)
    }
}

/// Oracle comparison attached to an `engine = both` run.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    /// Last output time covered by the oracle.
    pub horizon: f64,
    pub max_deviation: f64,
    pub max_norm_drift: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub trajectory: AmplitudeTrajectory,
    pub series: EntanglementSeries,
    pub oracle: Option<OracleCheck>,
}

fn oracle_trajectory(
    config: &SystemConfig,
    init: &InitialState,
    times: &[f64],
    modes: usize,
) -> Result<(AmplitudeTrajectory, f64)> {
    let bath = build_bath(config, modes, DEFAULT_CUTOFF)?;
    let run = integrate(config, init, &bath, times, default_step(config, &bath), false)?;
    Ok((run.trajectory, run.max_norm_drift))
}

/// validate → poles → trajectory → entanglement series. With `Both` the
/// analytic trajectory is reported and the oracle is run up to its recurrence
/// horizon for comparison.
pub fn run_pipeline(run: &RunConfig) -> Result<RunOutcome> {
    let config = run.system;
    let init = run.initial;
    let times = run.time_grid();
    let modes = run.modes.unwrap_or(DEFAULT_MODES);
    let (trajectory, oracle) = match run.engine.unwrap_or_default() {
        Engine::Analytic => (InversionPlan::new(&config, &init)?.trajectory(&times)?, None),
        Engine::Oracle => (oracle_trajectory(&config, &init, &times, modes)?.0, None),
        Engine::Both => {
            let analytic = InversionPlan::new(&config, &init)?.trajectory(&times)?;
            let bath = build_bath(&config, modes, DEFAULT_CUTOFF)?;
            let recurrence = bath.recurrence_time(&config);
            let covered: Vec<f64> = times.iter().copied().filter(|&t| t < recurrence).collect();
            let oracle = integrate(&config, &init, &bath, &covered, default_step(&config, &bath), false)?;
            let head = AmplitudeTrajectory::from_amplitudes(
                covered.clone(),
                analytic.amps[..covered.len()].to_vec(),
            );
            let check = OracleCheck {
                horizon: covered.last().copied().unwrap_or(0.0),
                max_deviation: head.max_deviation(&oracle.trajectory),
                max_norm_drift: oracle.max_norm_drift,
            };
            (analytic, Some(check))
        }
    };
    let series = entanglement_series(&trajectory, &config)?;
    Ok(RunOutcome {
        trajectory,
        series,
        oracle,
    })
}

fn num(v: f64) -> String {
    // Adding zero folds -0.0 into 0.0.
    format!("{:.11e}", v + 0.0)
}

/// Columns t, N, E_N, field_prob, |A1|..|A4|.
pub fn entanglement_csv(outcome: &RunOutcome) -> String {
    let mut out = String::from("t,N,E_N,field_prob,abs_a1,abs_a2,abs_a3,abs_a4\n");
    let traj = &outcome.trajectory;
    for k in 0..traj.len() {
        let a = traj.amps[k];
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(traj.times[k]),
            num(outcome.series.negativity[k]),
            num(outcome.series.log_negativity[k]),
            num(traj.field_prob[k]),
            num(a[0].norm()),
            num(a[1].norm()),
            num(a[2].norm()),
            num(a[3].norm()),
        );
    }
    out
}

/// The dressed-state table (G and H roots with their tabulated-numerator
/// residues) followed by the poles used by the inverse transform (tag D,
/// A1 residue).
pub fn pole_report(config: &SystemConfig, init: &InitialState) -> Result<PoleSet> {
    let mut table = find_poles(config)?;
    table_residues(&mut table, config, init)?;
    let inversion = inversion_poles(config, init)?;
    table.poles.extend(inversion.poles);
    Ok(table)
}

/// Columns function_tag, re_x, im_x, class, residue_re, residue_im.
pub fn pole_csv(set: &PoleSet) -> String {
    let mut out = String::from("function_tag,re_x,im_x,class,residue_re,residue_im\n");
    for p in &set.poles {
        let w = p.weight();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.tag,
            num(p.location.re),
            num(p.location.im),
            p.class,
            num(w.re),
            num(w.im)
        );
    }
    out
}

/// First output time after the E_N peak at which E_N has fallen to half the
/// peak, or `None` if it never does within the series.
pub fn half_life(series: &EntanglementSeries) -> Option<f64> {
    let e = &series.log_negativity;
    let (peak_at, peak) = e
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    if !(peak > 0.0) {
        return Some(0.0);
    }
    (peak_at..e.len()).find(|&k| e[k] <= 0.5 * peak).map(|k| series.times[k])
}

/// Trapezoidal ∫ E_N dt over the part of the series inside [0, t_end].
pub fn integrated_log_negativity(series: &EntanglementSeries, t_end: f64) -> f64 {
    let t = &series.times;
    let e = &series.log_negativity;
    (1..t.len())
        .take_while(|&k| t[k] <= t_end * (1.0 + 1e-12))
        .map(|k| 0.5 * (e[k] + e[k - 1]) * (t[k] - t[k - 1]))
        .sum()
}

/// Largest E_N within `half_width` of `t`.
pub fn envelope(series: &EntanglementSeries, t: f64, half_width: f64) -> f64 {
    series
        .times
        .iter()
        .zip(&series.log_negativity)
        .filter(|(s, _)| (**s - t).abs() <= half_width)
        .fold(0.0, |m, (_, &v)| m.max(v))
}

/// The parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// γ1 = γ2.
    Gamma,
    /// η in degrees.
    Eta,
    /// `w1c:w2c` pairs; ω12 follows as their difference.
    DetuningPair,
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gamma" => Ok(SweepParam::Gamma),
            "eta" => Ok(SweepParam::Eta),
            "omega1c_omega2c_pair" => Ok(SweepParam::DetuningPair),
            other => Err(Error::Domain(format!(
                "sweep parameter must be gamma, eta or omega1c_omega2c_pair (got `{other}`)"
            ))),
        }
    }
}

impl SweepParam {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepParam::Gamma => "gamma",
            SweepParam::Eta => "eta",
            SweepParam::DetuningPair => "omega1c_omega2c_pair",
        }
    }

    fn number(value: &str) -> Result<f64> {
        value
            .trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Domain(format!("sweep value `{value}` is not a number")))
    }

    /// The template with this parameter set to `value`.
    pub fn apply(&self, template: &RunConfig, value: &str) -> Result<RunConfig> {
        let mut run = template.clone();
        let s = &mut run.system;
        match self {
            SweepParam::Gamma => {
                let g = Self::number(value)?;
                s.gamma1 = g;
                s.gamma2 = g;
            }
            SweepParam::Eta => s.eta = Self::number(value)?.to_radians(),
            SweepParam::DetuningPair => {
                let (a, b) = value
                    .split_once(':')
                    .ok_or_else(|| Error::Domain(format!("detuning pair `{value}` must be written w1c:w2c")))?;
                s.omega1c = Self::number(a)?;
                s.omega2c = Self::number(b)?;
                s.omega12 = s.omega1c - s.omega2c;
            }
        }
        s.check()?;
        Ok(run)
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: String,
    pub outcome: RunOutcome,
    pub half_life: Option<f64>,
    pub integrated: f64,
}

/// Runs the template once per value, in parallel. Results keep the order of
/// `values`.
pub fn sweep(template: &RunConfig, param: SweepParam, values: &[String]) -> Result<Vec<SweepPoint>> {
    let runs = values
        .iter()
        .map(|v| param.apply(template, v))
        .collect::<Result<Vec<_>>>()?;
    runs.par_iter()
        .zip(values.par_iter())
        .map(|(run, value)| {
            let outcome = run_pipeline(run)?;
            Ok(SweepPoint {
                value: value.clone(),
                half_life: half_life(&outcome.series),
                integrated: integrated_log_negativity(&outcome.series, INTEGRATION_WINDOW),
                outcome,
            })
        })
        .collect()
}

/// Columns value, half_life, integrated_E_N; a half-life that is never
/// reached is written `inf`.
pub fn sweep_summary_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("value,half_life,integrated_E_N\n");
    for p in points {
        let h = p.half_life.map_or_else(|| "inf".to_string(), num);
        let _ = writeln!(out, "{},{},{}", p.value, h, num(p.integrated));
    }
    out
}

/// File name for one sweep value, e.g. `gamma_1.5.csv` or
/// `omega1c_omega2c_pair_-0.6_-1.csv`.
pub fn sweep_file_name(param: SweepParam, value: &str) -> String {
    let label: String = value
        .trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '+' { c } else { '_' })
        .collect();
    format!("{}_{label}.csv", param.as_str())
}
