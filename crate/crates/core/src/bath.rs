//! Discretized-reservoir oracle: the amplitude equations integrated directly
//! with a finite set of band modes.
//!
//! Modes sit at ω − ω_c = u² on a uniform midpoint grid in u up to the cutoff
//! U². The continuum above the cutoff is far detuned from every atomic
//! frequency. Its kernel contribution, expanded in powers of (x − iω1c)/U²,
//! is matched through second order by one pseudomode at (5/3)U² plus a static
//! Hermitian shift among the atomic amplitudes. Transition 1 couples to family a with
//! g_n; transition 2 couples to family a with g_n cos η and to family b with
//! g_n sin η, which reproduces Γ11 = Γ22 and Γ12 = Γ11 cos η.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::config::{validate, InitialState, SystemConfig};
use crate::error::{Error, Result};
use crate::kernel::{kernel, Sheet};
use crate::trajectory::AmplitudeTrajectory;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub const DEFAULT_MODES: usize = 4000;
/// Default cutoff, measured from the band edge.
pub const DEFAULT_CUTOFF: f64 = 100.0;
/// Largest allowed resolvent mismatch at the check points.
pub const RESOLVENT_TOLERANCE: f64 = 1e-3;
/// Drift of the total norm allowed per unit time.
pub const NORM_DRIFT_RATE: f64 = 1e-8;
/// Step-size bounds, as a fraction of 1/max(γ1, γ2, |ω12|, 1).
pub const MAX_STEP_FRACTION: f64 = 0.05;
pub const DEFAULT_STEP_FRACTION: f64 = 0.02;
/// Bounds on dt times the largest mode detuning.
pub const MAX_PHASE_STEP: f64 = 0.5;
pub const DEFAULT_PHASE_STEP: f64 = 0.125;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBath {
    /// Mode frequencies measured from the band edge, ω_n − ω_c.
    pub mode_freqs: Vec<f64>,
    /// Base couplings g_n, with g_n² = J(ω_n) Δω_n.
    pub couplings: Vec<f64>,
    /// Couplings of transition 2 to family a (g_n cos η) and family b (g_n sin η).
    pub couplings_a: Vec<f64>,
    pub couplings_b: Vec<f64>,
    /// Mode detunings from the upper level |a1>, ω_n − ω13.
    pub detunings: Vec<f64>,
    pub du: f64,
    pub cutoff: f64,
    /// Static part δ of the eliminated continuum, which adds −iδ to every kernel value.
    pub tail_shift: f64,
}

impl DiscreteBath {
    pub fn len(&self) -> usize {
        self.mode_freqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mode_freqs.is_empty()
    }

    /// Σ_n g_n² / (x + i(ω_n − ω13)) − iδ, the bath's estimate of Γ11(x).
    pub fn resolvent(&self, x: Complex64) -> Complex64 {
        self.couplings
            .iter()
            .zip(&self.detunings)
            .map(|(g, d)| g * g / (x + I * d))
            .sum::<Complex64>()
            - I * self.tail_shift
    }

    /// Largest |resolvent − Γ11| over fixed check points with Re x ≥ 0.5.
    pub fn resolvent_error(&self, config: &SystemConfig) -> f64 {
        RESOLVENT_CHECKS
            .iter()
            .map(|&(re, im)| {
                let x = Complex64::new(re, im);
                let exact = kernel(x, config.omega1c, config.beta, Sheet::Principal).unwrap_or_default();
                (self.resolvent(x) - exact).norm()
            })
            .fold(0.0, f64::max)
    }

    /// Time after which the uniform grid revives: 2π over the level spacing at
    /// the highest frequency the atoms explore.
    pub fn max_detuning(&self) -> f64 {
        self.detunings.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    pub fn recurrence_time(&self, config: &SystemConfig) -> f64 {
        let spread = 2.0
            * [
                config.gamma1,
                (config.gamma2 - config.omega12).abs(),
                config.gamma2 + config.omega12,
                config.beta,
            ]
            .into_iter()
            .fold(0.0, f64::max);
        let u_rel = (spread + config.omega1c.abs()).sqrt();
        2.0 * PI / (2.0 * u_rel * self.du)
    }
}

const RESOLVENT_CHECKS: [(f64, f64); 5] = [(1.0, 0.0), (0.5, 0.0), (0.5, 2.0), (0.5, -3.0), (2.0, 6.0)];

/// Builds the two-family mode set with `n_modes` uniform-grid modes up to
/// `omega_max` above the band edge.
pub fn build_bath(config: &SystemConfig, n_modes: usize, omega_max: f64) -> Result<DiscreteBath> {
    config.check()?;
    if n_modes < 100 {
        return Err(Error::Domain(format!("bath needs at least 100 modes (got {n_modes})")));
    }
    if !(omega_max > 20.0 * config.beta) || !omega_max.is_finite() {
        return Err(Error::Domain(format!(
            "bath cutoff must exceed 20 beta above the band edge (got {omega_max})"
        )));
    }
    let bath = discretize(config, n_modes, omega_max);
    let err = bath.resolvent_error(config);
    if !(err <= RESOLVENT_TOLERANCE) {
        return Err(Error::Discretization(format!(
            "resolvent mismatch {err:e} exceeds {RESOLVENT_TOLERANCE:e}"
        )));
    }
    Ok(bath)
}

fn discretize(config: &SystemConfig, n_modes: usize, omega_max: f64) -> DiscreteBath {
    let b32 = config.beta_three_halves();
    let u_max = omega_max.sqrt();
    let du = u_max / n_modes as f64;
    let mut u: Vec<f64> = (0..n_modes).map(|k| (k as f64 + 0.5) * du).collect();
    // J(u²)·2u du = (2/π) β^{3/2} du
    let mut couplings = vec![(2.0 / PI * b32 * du).sqrt(); n_modes];
    // (2/π)β^{3/2} ∫_U^∞ du/(y + iu²) = (2/π)β^{3/2} Σ_k (−y)^k / ((2k+1) i^{k+1} U^{2k+1});
    // g²/(y + iD) − iS reproduces k = 0, 1, 2 with D = 5U²/3, g² = (25/27)(2/π)β^{3/2}U.
    u.push((5.0f64 / 3.0).sqrt() * u_max);
    couplings.push((25.0 / 27.0 * 2.0 / PI * b32 * u_max).sqrt());
    let (c, sn) = (config.cos_eta(), config.sin_eta());
    DiscreteBath {
        mode_freqs: u.iter().map(|v| v * v).collect(),
        couplings_a: couplings.iter().map(|g| g * c).collect(),
        couplings_b: couplings.iter().map(|g| g * sn).collect(),
        detunings: u.iter().map(|v| v * v - config.omega1c).collect(),
        couplings,
        du,
        cutoff: omega_max,
        tail_shift: 4.0 / 9.0 * 2.0 / PI * b32 / u_max,
    }
}

/// Largest step accepted by [`integrate`].
pub fn max_step(config: &SystemConfig, bath: &DiscreteBath) -> f64 {
    (MAX_STEP_FRACTION / step_scale(config)).min(MAX_PHASE_STEP / bath.max_detuning().max(1.0))
}

pub fn default_step(config: &SystemConfig, bath: &DiscreteBath) -> f64 {
    (DEFAULT_STEP_FRACTION / step_scale(config)).min(DEFAULT_PHASE_STEP / bath.max_detuning().max(1.0))
}

fn step_scale(config: &SystemConfig) -> f64 {
    [config.gamma1, config.gamma2, config.omega12.abs(), 1.0]
        .into_iter()
        .fold(0.0, f64::max)
}

/// φ1, φ2, φ3 at z, by Taylor series near zero and the recurrence elsewhere.
fn phi(z: Complex64) -> [Complex64; 3] {
    if z.norm() < 1.0 {
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            // Σ_j z^j / (j + k + 1)!
            let mut term = Complex64::new(1.0, 0.0);
            for m in 2..=k + 1 {
                term /= m as f64;
            }
            let mut sum = term;
            for j in 1..30 {
                term = term * z / (j + k + 1) as f64;
                sum += term;
            }
            *slot = sum;
        }
        out
    } else {
        let p1 = (z.exp() - 1.0) / z;
        let p2 = (p1 - 1.0) / z;
        let p3 = (p2 - 0.5) / z;
        [p1, p2, p3]
    }
}

/// Exponential Runge–Kutta coefficients for one diagonal entry of the linear part.
#[derive(Debug, Clone, Copy)]
struct Etd {
    e: Complex64,
    e2: Complex64,
    q: Complex64,
    f1: Complex64,
    f2: Complex64,
    f3: Complex64,
}

impl Etd {
    fn new(l: Complex64, h: f64) -> Self {
        let z = l * h;
        let [p1, p2, p3] = phi(z);
        let [h1, _, _] = phi(z * 0.5);
        Etd {
            e: z.exp(),
            e2: (z * 0.5).exp(),
            q: h1 * (0.5 * h),
            f1: (p1 - 3.0 * p2 + 4.0 * p3) * h,
            f2: (p2 - 2.0 * p3) * (2.0 * h),
            f3: (4.0 * p3 - p2) * h,
        }
    }
}

/// State of the amplitude equations in the frame rotating with ω13:
/// atoms (A1, Ã2, A3, Ã4) with Ã = A e^{iω12 t}, then family a and family b.
#[derive(Clone)]
struct State {
    atoms: [Complex64; 4],
    a: Vec<Complex64>,
    b: Vec<Complex64>,
}

impl State {
    fn norm(&self) -> f64 {
        self.atoms.iter().map(|z| z.norm_sqr()).sum::<f64>() + self.field()
    }

    fn field(&self) -> f64 {
        self.a.iter().chain(&self.b).map(|z| z.norm_sqr()).sum()
    }
}

struct Stepper<'a> {
    config: &'a SystemConfig,
    bath: &'a DiscreteBath,
    atom_etd: [Etd; 4],
    mode_etd: Vec<Etd>,
}

impl<'a> Stepper<'a> {
    fn new(config: &'a SystemConfig, bath: &'a DiscreteBath, h: f64) -> Self {
        let zero = Etd::new(Complex64::new(0.0, 0.0), h);
        let shifted = Etd::new(I * config.omega12, h);
        Stepper {
            config,
            bath,
            atom_etd: [zero, shifted, zero, shifted],
            mode_etd: bath.detunings.iter().map(|d| Etd::new(-I * d, h)).collect(),
        }
    }

    /// Coupling terms: everything except the diagonal free evolution.
    fn coupling(&self, s: &State, out: &mut State) {
        let cfg = self.config;
        let bath = self.bath;
        let mut sum_a = Complex64::new(0.0, 0.0);
        let mut sum_2 = Complex64::new(0.0, 0.0);
        for n in 0..bath.len() {
            sum_a += s.a[n] * bath.couplings[n];
            sum_2 += s.a[n] * bath.couplings_a[n] + s.b[n] * bath.couplings_b[n];
        }
        let [a1, a2, a3, a4] = s.atoms;
        let first = a1 + a3;
        let second = a2 + a4;
        let c = cfg.cos_eta();
        let d = bath.tail_shift;
        let shift1 = I * d * (first + c * second);
        let shift2 = I * d * (c * first + second);
        out.atoms = [
            -I * (a3 * cfg.gamma1 + sum_a) + shift1,
            -I * (a4 * cfg.gamma2 + sum_2) + shift2,
            -I * (a1 * cfg.gamma1 + sum_a) + shift1,
            -I * (a2 * cfg.gamma2 + sum_2) + shift2,
        ];
        for n in 0..bath.len() {
            out.a[n] = -I * (first * bath.couplings[n] + second * bath.couplings_a[n]);
            out.b[n] = -I * (second * bath.couplings_b[n]);
        }
    }

    fn step(&self, u: &mut State, scratch: &mut [State; 5]) {
        let [nu, na, nb, nc, tmp] = scratch;
        self.coupling(u, nu);
        // a = e^{Lh/2} u + Q N(u)
        let stage = |out: &mut State, base: &State, n: &State, atom: &[Etd; 4], modes: &[Etd]| {
            for k in 0..4 {
                out.atoms[k] = atom[k].e2 * base.atoms[k] + atom[k].q * n.atoms[k];
            }
            for m in 0..modes.len() {
                out.a[m] = modes[m].e2 * base.a[m] + modes[m].q * n.a[m];
                out.b[m] = modes[m].e2 * base.b[m] + modes[m].q * n.b[m];
            }
        };
        stage(tmp, u, nu, &self.atom_etd, &self.mode_etd);
        self.coupling(tmp, na);
        let mut b_state = tmp.clone();
        stage(&mut b_state, u, na, &self.atom_etd, &self.mode_etd);
        self.coupling(&b_state, nb);
        // c = e^{Lh/2} a + Q (2N(b) − N(u))
        let a_state = tmp.clone();
        for k in 0..4 {
            let e = &self.atom_etd[k];
            tmp.atoms[k] = e.e2 * a_state.atoms[k] + e.q * (2.0 * nb.atoms[k] - nu.atoms[k]);
        }
        for m in 0..self.mode_etd.len() {
            let e = &self.mode_etd[m];
            tmp.a[m] = e.e2 * a_state.a[m] + e.q * (2.0 * nb.a[m] - nu.a[m]);
            tmp.b[m] = e.e2 * a_state.b[m] + e.q * (2.0 * nb.b[m] - nu.b[m]);
        }
        self.coupling(tmp, nc);
        for k in 0..4 {
            let e = &self.atom_etd[k];
            u.atoms[k] =
                e.e * u.atoms[k] + e.f1 * nu.atoms[k] + e.f2 * (na.atoms[k] + nb.atoms[k]) + e.f3 * nc.atoms[k];
        }
        for m in 0..self.mode_etd.len() {
            let e = &self.mode_etd[m];
            u.a[m] = e.e * u.a[m] + e.f1 * nu.a[m] + e.f2 * (na.a[m] + nb.a[m]) + e.f3 * nc.a[m];
            u.b[m] = e.e * u.b[m] + e.f1 * nu.b[m] + e.f2 * (na.b[m] + nb.b[m]) + e.f3 * nc.b[m];
        }
    }
}

/// Oracle output: amplitudes at the requested times and, optionally, the
/// per-mode populations at each of them.
#[derive(Debug, Clone)]
pub struct OracleRun {
    pub trajectory: AmplitudeTrajectory,
    /// Σ_n |B_n|² from the explicit mode amplitudes.
    pub mode_field: Vec<f64>,
    /// |B_n|² for family a followed by family b, when requested.
    pub mode_populations: Option<Vec<Vec<f64>>>,
    pub max_norm_drift: f64,
}

/// Integrates the amplitude equations on the given output times with steps no
/// longer than `dt`. A2 and A4 are reported without the e^{iω12 t} frame factor.
pub fn integrate(
    config: &SystemConfig,
    init: &InitialState,
    bath: &DiscreteBath,
    times: &[f64],
    dt: f64,
    keep_modes: bool,
) -> Result<OracleRun> {
    let (config, init) = validate(*config, *init)?;
    crate::laplace::check_times_public(times)?;
    let limit = max_step(&config, bath);
    if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::StepSize(format!("dt = {dt} must lie in (0, {limit}]")));
    }
    let t_max = times.last().copied().unwrap_or(0.0);
    let recurrence = bath.recurrence_time(&config);
    if t_max > recurrence {
        return Err(Error::RecurrenceHorizonExceeded { t_max, recurrence });
    }

    let n = bath.len();
    let zero = Complex64::new(0.0, 0.0);
    let blank = State {
        atoms: [zero; 4],
        a: vec![zero; n],
        b: vec![zero; n],
    };
    let mut state = State {
        atoms: init.amplitudes,
        ..blank.clone()
    };
    let mut scratch = [blank.clone(), blank.clone(), blank.clone(), blank.clone(), blank];
    let norm0 = state.norm();

    let mut amps = Vec::with_capacity(times.len());
    let mut mode_field = Vec::with_capacity(times.len());
    let mut populations = keep_modes.then(Vec::new);
    let mut max_drift: f64 = 0.0;
    let mut stepper: Option<(f64, Stepper)> = None;
    let mut t = 0.0;

    for &target in times {
        let span = target - t;
        if span > 0.0 {
            let steps = (span / dt - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            let rebuild = match &stepper {
                Some((h0, _)) => (h0 - h).abs() > 1e-14 * h,
                None => true,
            };
            if rebuild {
                stepper = Some((h, Stepper::new(&config, bath, h)));
            }
            let (_, st) = stepper.as_ref().expect("stepper built above");
            for _ in 0..steps {
                st.step(&mut state, &mut scratch);
            }
            t = target;
        }
        let drift = (state.norm() - norm0).abs();
        max_drift = max_drift.max(drift);
        if drift > NORM_DRIFT_RATE * t.max(1.0) {
            return Err(Error::StepSize(format!(
                "norm drift {drift:e} at t = {t} exceeds {NORM_DRIFT_RATE:e} per unit time"
            )));
        }
        let back = Complex64::from_polar(1.0, -config.omega12 * t);
        let [a1, a2, a3, a4] = state.atoms;
        amps.push([a1, a2 * back, a3, a4 * back]);
        mode_field.push(state.field());
        if let Some(p) = populations.as_mut() {
            p.push(state.a.iter().chain(&state.b).map(|z| z.norm_sqr()).collect());
        }
    }

    Ok(OracleRun {
        trajectory: AmplitudeTrajectory::from_amplitudes(times.to_vec(), amps),
        mode_field,
        mode_populations: populations,
        max_norm_drift: max_drift,
    })
}

/// (ω_n − ω_c, |B_n(t)|²) for every mode, family a first. Empty when the run
/// did not keep mode populations or `t` is not one of its output times.
pub fn mode_spectrum(run: &OracleRun, bath: &DiscreteBath, t: f64) -> Vec<(f64, f64)> {
    let Some(pops) = &run.mode_populations else {
        return Vec::new();
    };
    let Some(k) = run.trajectory.times.iter().position(|&s| (s - t).abs() <= 1e-9 * t.abs().max(1.0)) else {
        return Vec::new();
    };
    bath.mode_freqs
        .iter()
        .chain(&bath.mode_freqs)
        .copied()
        .zip(pops[k].iter().copied())
        .collect()
}
