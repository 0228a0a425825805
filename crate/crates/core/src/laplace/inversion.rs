use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use super::poles::{inversion_poles, PoleSet};
use super::transform::solve_decoupled;
use crate::config::{validate, InitialState, SystemConfig};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::trajectory::AmplitudeTrajectory;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// e^{−v²t} drops below 1e-14 at v²t = ln(1e14).
const CUT_EXPONENT: f64 = 32.236_191_301_916_64;
const CUT_TOLERANCE: Tolerance = Tolerance {
    abs: 1e-10,
    rel: 1e-12,
    max_panels: 4000,
};

/// Σ over poles of residue·e^{x t}, in the x′ frame for A2 and A4.
pub fn residue_sum(t: f64, poles: &PoleSet) -> [Complex64; 4] {
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for p in &poles.poles {
        let e = (p.location * t).exp();
        for k in 0..4 {
            out[k] += p.residues[k] * e;
        }
    }
    out
}

/// Jump of the transform across the cut at x = iω1c − v², times 2v
/// (the Jacobian of u = v²).
fn cut_integrand(v: f64, config: &SystemConfig, init: &InitialState) -> [Complex64; 4] {
    if v == 0.0 {
        return [Complex64::new(0.0, 0.0); 4];
    }
    let x = Complex64::new(-v * v, config.omega1c);
    // Above the cut √(−ix − ω1c) = v e^{iπ/4}; below it is the negative.
    let w = Complex64::new(v * FRAC_1_SQRT_2, v * FRAC_1_SQRT_2);
    let gamma_above = config.beta_three_halves() / (I * w);
    let above = solve_decoupled(x, config, gamma_above, init);
    let below = solve_decoupled(x, config, -gamma_above, init);
    let mut out = [Complex64::new(0.0, 0.0); 4];
    for k in 0..4 {
        out[k] = (below[k] - above[k]) * (2.0 * v);
    }
    out
}

/// The continuum contribution
/// (1/2πi) e^{iω1c t} ∫_0^∞ [A(iω1c − u − i0) − A(iω1c − u + i0)] e^{−ut} du,
/// in the x′ frame for A2 and A4. Substituting u = v² removes the edge
/// singularity; for t > 0 the range is cut where e^{−v²t} < 1e-14, at t = 0
/// the half line is mapped onto [0, 1).
pub fn branch_cut_integral(t: f64, config: &SystemConfig, init: &InitialState) -> Result<[Complex64; 4]> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("branch-cut integral needs t >= 0 (got {t})")));
    }
    let value = if t > 0.0 {
        let v_max = (CUT_EXPONENT / t).sqrt();
        integrate(
            |v: f64| {
                let f = cut_integrand(v, config, init);
                let damp = (-v * v * t).exp();
                f.map(|z| z * damp)
            },
            0.0,
            v_max,
            CUT_TOLERANCE,
        )?
        .value
    } else {
        integrate(
            |s: f64| {
                let v = s / (1.0 - s);
                let jac = 1.0 / ((1.0 - s) * (1.0 - s));
                cut_integrand(v, config, init).map(|z| z * jac)
            },
            0.0,
            1.0,
            CUT_TOLERANCE,
        )?
        .value
    };
    let prefactor = Complex64::from_polar(1.0, config.omega1c * t) / (2.0 * PI * I);
    Ok(value.map(|z| z * prefactor))
}

/// Poles and residues for one configuration and initial state, reused across
/// every time point.
#[derive(Debug, Clone)]
pub struct InversionPlan {
    pub config: SystemConfig,
    pub init: InitialState,
    pub poles: PoleSet,
}

impl InversionPlan {
    pub fn new(config: &SystemConfig, init: &InitialState) -> Result<Self> {
        let (config, init) = validate(*config, *init)?;
        let poles = inversion_poles(&config, &init)?;
        Ok(InversionPlan { config, init, poles })
    }

    /// A1..A4 at time t in the frame of the amplitude equations. The x′ frame
    /// factor e^{iω12 t} is removed from A2 and A4. At t = 0 the initial
    /// amplitudes are returned unchanged.
    pub fn amplitudes_at(&self, t: f64) -> Result<[Complex64; 4]> {
        if t == 0.0 {
            return Ok(self.init.amplitudes);
        }
        let r = residue_sum(t, &self.poles);
        let c = branch_cut_integral(t, &self.config, &self.init)?;
        let back = Complex64::from_polar(1.0, -self.config.omega12 * t);
        Ok([r[0] + c[0], (r[1] + c[1]) * back, r[2] + c[2], (r[3] + c[3]) * back])
    }

    pub fn trajectory(&self, times: &[f64]) -> Result<AmplitudeTrajectory> {
        check_times(times)?;
        let amps = times
            .par_iter()
            .map(|&t| self.amplitudes_at(t))
            .collect::<Result<Vec<_>>>()?;
        Ok(AmplitudeTrajectory::from_amplitudes(times.to_vec(), amps))
    }
}

pub fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
        return Err(Error::Domain("times must be finite and non-negative".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("times must be strictly increasing".into()));
    }
    Ok(())
}

/// Analytic amplitudes on a time grid; time points are evaluated in parallel.
pub fn amplitudes_analytic(times: &[f64], config: &SystemConfig, init: &InitialState) -> Result<AmplitudeTrajectory> {
    InversionPlan::new(config, init)?.trajectory(times)
}
