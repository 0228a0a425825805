use std::fmt;

use num_complex::Complex64;

use super::transform::{adjugate, matrix_with_kernel, solve_with_kernel, symmetric_factor, symmetric_factor_derivative};
use crate::config::{InitialState, SystemConfig};
use crate::error::{Error, Result};
use crate::kernel::{kernel, kernel_derivative, Sheet};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Roots closer than this are the same root; distinct roots closer than this
/// are reported as degenerate.
pub const POLE_MERGE_TOLERANCE: f64 = 1e-8;
/// A pole counts as pure imaginary when |Re x| is below this.
pub const IMAGINARY_TOLERANCE: f64 = 1e-9;

const GRID: usize = 40;
const AXIS_SAMPLES: usize = 4000;
const DIFF_STEP: f64 = 1e-6;
const CONTOUR_RADIUS: f64 = 1e-5;
const CONTOUR_POINTS: usize = 64;
const RESIDUE_AGREEMENT: f64 = 1e-8;

/// Which denominator a root belongs to. `D` marks roots of the determinant of
/// the transform-domain system, used by the inverse transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FunctionTag {
    G1,
    G2,
    H1,
    H2,
    D,
}

impl fmt::Display for FunctionTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FunctionTag::G1 => "G1",
            FunctionTag::G2 => "G2",
            FunctionTag::H1 => "H1",
            FunctionTag::H2 => "H2",
            FunctionTag::D => "D",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PoleClass {
    /// Pure imaginary, above the branch point: a non-decaying bound state.
    Localized,
    /// Negative real part, below the branch point.
    Propagating,
    /// Pure imaginary at or below the branch point.
    Bandpass,
    /// Anything else. Not expected for physical parameters.
    Other,
}

impl fmt::Display for PoleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PoleClass::Localized => "localized",
            PoleClass::Propagating => "propagating",
            PoleClass::Bandpass => "bandpass",
            PoleClass::Other => "other",
        };
        f.write_str(s)
    }
}

pub fn classify(x: Complex64, omega1c: f64) -> PoleClass {
    let imaginary = x.re.abs() <= IMAGINARY_TOLERANCE * x.norm().max(1.0);
    if imaginary && x.im > omega1c {
        PoleClass::Localized
    } else if imaginary {
        PoleClass::Bandpass
    } else if x.re < 0.0 && x.im < omega1c {
        PoleClass::Propagating
    } else {
        PoleClass::Other
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pole {
    pub tag: FunctionTag,
    pub location: Complex64,
    pub class: PoleClass,
    /// Residues of the four transform-domain amplitudes (A2, A4 in the x′ frame).
    /// Zero where a function does not contribute to an amplitude.
    pub residues: [Complex64; 4],
}

impl Pole {
    /// The single weight reported in pole tables: the A2 residue for H
    /// functions, the A1 residue otherwise.
    pub fn weight(&self) -> Complex64 {
        match self.tag {
            FunctionTag::H1 | FunctionTag::H2 => self.residues[1],
            _ => self.residues[0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PoleSet {
    pub poles: Vec<Pole>,
}

impl PoleSet {
    pub fn of_class(&self, class: PoleClass) -> impl Iterator<Item = &Pole> {
        self.poles.iter().filter(move |p| p.class == class)
    }

    pub fn localized(&self) -> impl Iterator<Item = &Pole> {
        self.of_class(PoleClass::Localized)
    }

    pub fn propagating(&self) -> impl Iterator<Item = &Pole> {
        self.of_class(PoleClass::Propagating)
    }

    pub fn bandpass(&self) -> impl Iterator<Item = &Pole> {
        self.of_class(PoleClass::Bandpass)
    }

    /// (localized, propagating, bandpass, other)
    pub fn counts(&self) -> [usize; 4] {
        let mut n = [0; 4];
        for p in &self.poles {
            n[p.class as usize] += 1;
        }
        n
    }

    pub fn locations(&self) -> Vec<Complex64> {
        self.poles.iter().map(|p| p.location).collect()
    }

    pub(crate) fn sort(&mut self) {
        self.poles.sort_by(|a, b| {
            a.tag
                .cmp(&b.tag)
                .then(a.class.cmp(&b.class))
                .then(b.location.im.total_cmp(&a.location.im))
                .then(a.location.re.total_cmp(&b.location.re))
        });
    }
}

/// Half-width of the search box: 5·max(γ, |ω1c|, |ω2c|, 1).
pub(crate) fn search_extent(config: &SystemConfig) -> f64 {
    5.0 * [config.gamma1, config.gamma2, config.omega1c.abs(), config.omega2c.abs(), 1.0]
        .into_iter()
        .fold(0.0, f64::max)
}

/// Bisects a sign change of `f` on `[a, b]` down to adjacent floating-point values.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a.min(b) || m >= a.max(b) {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Sign changes of `f` on consecutive samples, refined by bisection.
pub(crate) fn bracket_roots(f: impl Fn(f64) -> f64, samples: &[f64]) -> Vec<f64> {
    let values: Vec<f64> = samples.iter().map(|&s| f(s)).collect();
    let mut roots = Vec::new();
    for k in 0..samples.len().saturating_sub(1) {
        let (fa, fb) = (values[k], values[k + 1]);
        if !fa.is_finite() || !fb.is_finite() {
            continue;
        }
        if fa == 0.0 {
            roots.push(samples[k]);
        } else if (fa < 0.0) != (fb < 0.0) && fb != 0.0 {
            roots.push(bisect(&f, samples[k], samples[k + 1]));
        }
    }
    if let (Some(&last), Some(&fl)) = (samples.last(), values.last()) {
        if fl == 0.0 {
            roots.push(last);
        }
    }
    roots
}

/// Outcome of one damped Newton run.
enum Newton {
    Root(Complex64),
    Stalled { x: Complex64, residual: f64 },
    Failed,
}

/// Damped Newton iteration on an analytic function given as value, derivative
/// and a magnitude scale for the residual test.
fn damped_newton(eval: &impl Fn(Complex64) -> Option<(Complex64, Complex64, f64)>, seed: Complex64) -> Newton {
    let Some((mut f, mut df, mut scale)) = eval(seed) else {
        return Newton::Failed;
    };
    let mut x = seed;
    for _ in 0..100 {
        if df.norm() == 0.0 || !df.is_finite() {
            break;
        }
        let step = f / df;
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda > 1e-6 {
            let xn = x - step * lambda;
            if let Some((fn_, dfn, sn)) = eval(xn) {
                if fn_.norm() < f.norm() || lambda <= 1e-5 {
                    accepted = Some((xn, fn_, dfn, sn));
                    break;
                }
            }
            lambda *= 0.5;
        }
        let Some((xn, fn_, dfn, sn)) = accepted else {
            break;
        };
        let moved = (xn - x).norm();
        x = xn;
        f = fn_;
        df = dfn;
        scale = sn;
        if moved <= 1e-14 * x.norm().max(1.0) || f.norm() == 0.0 {
            return Newton::Root(x);
        }
    }
    if f.norm() <= 1e-12 * scale.max(1.0) {
        return Newton::Root(x);
    }
    Newton::Stalled {
        x,
        residual: f.norm() / scale.max(1.0),
    }
}

/// Runs damped Newton from every seed of the 40×40 grid over the lower-left
/// region and returns the distinct converged roots.
pub(crate) fn newton_roots(
    config: &SystemConfig,
    operation: &'static str,
    eval: impl Fn(Complex64) -> Option<(Complex64, Complex64, f64)>,
) -> Result<Vec<Complex64>> {
    let y = search_extent(config);
    let top = config.omega1c;
    let mut roots: Vec<Complex64> = Vec::new();
    for i in 0..GRID {
        let re = -y + i as f64 * y / GRID as f64;
        for j in 0..GRID {
            let im = -y + (j + 1) as f64 * (top + y) / (GRID + 1) as f64;
            match damped_newton(&eval, Complex64::new(re, im)) {
                Newton::Root(x) => {
                    if !x.is_finite() || (x - I * config.omega1c).norm() < 1e-8 {
                        continue;
                    }
                    if !roots.iter().any(|r| (r - x).norm() <= POLE_MERGE_TOLERANCE * x.norm().max(1.0)) {
                        roots.push(x);
                    }
                }
                Newton::Stalled { x, residual } => {
                    // A near-zero residual without convergence means a root the
                    // iteration could not pin down.
                    if residual < 1e-9 {
                        return Err(Error::Convergence {
                            operation,
                            detail: format!("Newton stagnated near x = {x} with residual {residual:e}"),
                        });
                    }
                }
                Newton::Failed => {}
            }
        }
    }
    Ok(roots)
}

fn symmetric_eval(config: &SystemConfig) -> impl Fn(Complex64) -> Option<(Complex64, Complex64, f64)> + '_ {
    move |x| {
        let g = kernel(x, config.omega1c, config.beta, Sheet::Continuum).ok()?;
        let dg = kernel_derivative(x, config.omega1c, g);
        let s = symmetric_factor(x, config, g);
        let ds = symmetric_factor_derivative(x, config, g, dg);
        let xp = x - I * config.omega12;
        let scale = (x + I * config.gamma1 + 2.0 * g).norm() * (xp + I * config.gamma2 + 2.0 * g).norm()
            + 4.0 * g.norm_sqr();
        (s.is_finite() && ds.is_finite()).then_some((s, ds, scale))
    }
}

/// Roots of the symmetric factor on the imaginary axis above the branch point,
/// where it is real.
fn localized_symmetric_roots(config: &SystemConfig) -> Vec<Complex64> {
    let y = search_extent(config);
    let s_max = (2.0 * y + config.omega1c.abs()).sqrt();
    let s_min = s_max * 1e-6;
    let samples: Vec<f64> = (0..=AXIS_SAMPLES)
        .map(|k| s_min + (s_max - s_min) * k as f64 / AXIS_SAMPLES as f64)
        .collect();
    let f = |s: f64| {
        let x = Complex64::new(0.0, config.omega1c + s * s);
        match kernel(x, config.omega1c, config.beta, Sheet::Continuum) {
            Ok(g) => s * s * symmetric_factor(x, config, g).re,
            Err(_) => f64::NAN,
        }
    };
    bracket_roots(f, &samples)
        .into_iter()
        .map(|s| Complex64::new(0.0, config.omega1c + s * s))
        .collect()
}

fn det_at(x: Complex64, config: &SystemConfig) -> Result<Complex64> {
    let g = kernel(x, config.omega1c, config.beta, Sheet::Continuum)?;
    Ok(matrix_with_kernel(x, config, g).determinant())
}

/// Distance from `x0` to the nearest other singularity: the branch point or
/// another pole. Difference steps and contour radii stay well inside it.
fn local_scale(x0: Complex64, config: &SystemConfig, others: &[Complex64]) -> f64 {
    others
        .iter()
        .filter(|&&o| o != x0)
        .map(|o| (o - x0).norm())
        .fold((x0 - Complex64::new(0.0, config.omega1c)).norm(), f64::min)
}

/// det M′(x0) by central differences with one Richardson step.
fn det_derivative(x0: Complex64, config: &SystemConfig, scale: f64) -> Result<Complex64> {
    let central = |h: f64| -> Result<Complex64> {
        Ok((det_at(x0 + h, config)? - det_at(x0 - h, config)?) / (2.0 * h))
    };
    let h = DIFF_STEP.min(1e-3 * scale);
    let d1 = central(h)?;
    let d2 = central(h / 2.0)?;
    Ok((d2 * 4.0 - d1) / 3.0)
}

/// Residue vector adj(M(x0))·A(0) / det M′(x0).
pub(crate) fn residue_by_adjugate(
    x0: Complex64,
    config: &SystemConfig,
    init: &InitialState,
    scale: f64,
) -> Result<[Complex64; 4]> {
    let g = kernel(x0, config.omega1c, config.beta, Sheet::Continuum)?;
    let adj = adjugate(&matrix_with_kernel(x0, config, g));
    let b = nalgebra::Vector4::from_column_slice(&init.amplitudes);
    let num = adj * b;
    let d = det_derivative(x0, config, scale)?;
    if d.norm() == 0.0 {
        return Err(Error::SingularSystem { x: x0 });
    }
    Ok([num[0] / d, num[1] / d, num[2] / d, num[3] / d])
}

/// Residue vector as the mean of (x − x0)·A(x) over a small circle around x0.
pub(crate) fn residue_by_contour(
    x0: Complex64,
    config: &SystemConfig,
    init: &InitialState,
    scale: f64,
) -> Result<[Complex64; 4]> {
    let r = (CONTOUR_RADIUS * x0.norm().max(1.0)).min(0.25 * scale);
    let mut acc = [Complex64::new(0.0, 0.0); 4];
    for k in 0..CONTOUR_POINTS {
        let dx = Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / CONTOUR_POINTS as f64);
        let x = x0 + dx;
        let g = kernel(x, config.omega1c, config.beta, Sheet::Continuum)?;
        let a = solve_with_kernel(x, config, g, init)?.a;
        for i in 0..4 {
            acc[i] += a[i] * dx;
        }
    }
    Ok(acc.map(|v| v / CONTOUR_POINTS as f64))
}

fn residue_checked(x0: Complex64, config: &SystemConfig, init: &InitialState, others: &[Complex64]) -> Result<[Complex64; 4]> {
    let local = local_scale(x0, config, others);
    let a = residue_by_adjugate(x0, config, init, local)?;
    let b = residue_by_contour(x0, config, init, local)?;
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let gap = a.iter().zip(&b).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
    if gap > RESIDUE_AGREEMENT * scale {
        return Err(Error::Convergence {
            operation: "residue",
            detail: format!("derivative and contour residues differ by {gap:e} at x = {x0}"),
        });
    }
    Ok(a)
}

/// Poles of the transform-domain amplitudes on the sheet used by the inverse
/// transform, with their residue vectors for the given initial state.
///
/// The determinant factors as (x − iγ1)(x′ − iγ2)·S(x); the first two roots are
/// exact and the roots of S are found by bracketing along the imaginary axis
/// above the branch point plus damped Newton from the lower-left grid.
pub fn inversion_poles(config: &SystemConfig, init: &InitialState) -> Result<PoleSet> {
    let mut roots = localized_symmetric_roots(config);
    for x in newton_roots(config, "inversion_poles", symmetric_eval(config))? {
        let x = if x.re.abs() <= IMAGINARY_TOLERANCE * x.norm().max(1.0) {
            Complex64::new(0.0, x.im)
        } else {
            x
        };
        if !roots.iter().any(|r| (r - x).norm() <= POLE_MERGE_TOLERANCE * x.norm().max(1.0)) {
            roots.push(x);
        }
    }
    let antisymmetric = [
        Complex64::new(0.0, config.gamma1),
        Complex64::new(0.0, config.gamma2 + config.omega12),
    ];
    let mut all: Vec<Complex64> = antisymmetric.to_vec();
    all.extend(roots);
    for (i, a) in all.iter().enumerate() {
        for b in &all[i + 1..] {
            if (a - b).norm() <= POLE_MERGE_TOLERANCE * a.norm().max(1.0) {
                return Err(Error::DegeneratePole {
                    first: *a,
                    second: *b,
                    tolerance: POLE_MERGE_TOLERANCE,
                });
            }
        }
    }
    let mut set = PoleSet::default();
    for &x in &all {
        set.poles.push(Pole {
            tag: FunctionTag::D,
            location: x,
            class: classify(x, config.omega1c),
            residues: residue_checked(x, config, init, &all)?,
        });
    }
    set.sort();
    Ok(set)
}
