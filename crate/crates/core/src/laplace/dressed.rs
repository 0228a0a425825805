//! The dressed-state functions G1, G2, H1, H2 and numerators f1..f8 in their
//! closed form, evaluated with the principal-sheet β′. They produce the
//! dressed-state table; the inverse transform does not use them.

use num_complex::Complex64;

use super::poles::{
    bracket_roots, classify, newton_roots, search_extent, FunctionTag, Pole, PoleSet, IMAGINARY_TOLERANCE,
    POLE_MERGE_TOLERANCE,
};
use crate::config::{InitialState, SystemConfig};
use crate::error::{Error, Result};
use crate::kernel::{kernel, kernel_derivative, Sheet};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const AXIS_SAMPLES: usize = 4000;
const DIFF_STEP: f64 = 1e-6;

fn beta_p(x: Complex64, config: &SystemConfig) -> Result<Complex64> {
    kernel(x, config.omega1c, config.beta, Sheet::Principal)
}

/// The common bracket (ix − γ1)(ix + ω12 − γ2)(1 ± 2β′) − 4β′² sin²η.
fn bracket(x: Complex64, bp: Complex64, config: &SystemConfig, sign: f64) -> Complex64 {
    let s = config.sin_eta();
    (I * x - config.gamma1) * (I * x + config.omega12 - config.gamma2) * (1.0 + 2.0 * sign * bp) - 4.0 * bp * bp * s * s
}

fn bracket_derivative(x: Complex64, bp: Complex64, dbp: Complex64, config: &SystemConfig, sign: f64) -> Complex64 {
    let s = config.sin_eta();
    let p = I * x - config.gamma1;
    let q = I * x + config.omega12 - config.gamma2;
    let r = 1.0 + 2.0 * sign * bp;
    I * q * r + p * I * r + p * q * (2.0 * sign * dbp) - 8.0 * bp * dbp * s * s
}

fn g_prefactor(x: Complex64, config: &SystemConfig) -> Complex64 {
    I * x + config.gamma1
}

fn h_prefactor(x: Complex64, config: &SystemConfig) -> Complex64 {
    I * x + config.omega12 + config.gamma2
}

/// (G1, G2, H1, H2) at `x`.
pub fn spectral_functions(x: Complex64, config: &SystemConfig) -> Result<[Complex64; 4]> {
    let bp = beta_p(x, config)?;
    let plus = bracket(x, bp, config, 1.0);
    let minus = bracket(x, bp, config, -1.0);
    let g = g_prefactor(x, config);
    let h = h_prefactor(x, config);
    Ok([I * g * plus, -I * g * minus, I * h * plus, -I * h * minus])
}

fn tag_value(tag: FunctionTag, x: Complex64, config: &SystemConfig) -> Result<Complex64> {
    let v = spectral_functions(x, config)?;
    Ok(match tag {
        FunctionTag::G1 => v[0],
        FunctionTag::G2 => v[1],
        FunctionTag::H1 => v[2],
        FunctionTag::H2 | FunctionTag::D => v[3],
    })
}

/// The tabulated numerators f1..f8, including the `2β cos η` term.
pub fn tabulated_numerators(x: Complex64, config: &SystemConfig, init: &InitialState) -> Result<[Complex64; 8]> {
    let bp = beta_p(x, config)?;
    let [a1, a2, a3, a4] = init.amplitudes;
    let c = config.cos_eta();
    let beta = config.beta;
    let (g1, g2, w12) = (config.gamma1, config.gamma2, config.omega12);
    let mut f = [Complex64::new(0.0, 0.0); 8];
    for (k, sign) in [1.0, -1.0].into_iter().enumerate() {
        f[k] = -I * (I * x + w12 - g2 + 2.0 * I * bp) * ((x + bp) * a1 - I * (g1 - I * bp) * a3)
            + sign * bp * c * (2.0 * beta * c * (a3 - a1) + sign * I * (I * x + g1) * (a2 + a4));
        f[2 + k] = -I * (I * x - g1 + 2.0 * I * bp) * ((x + bp) * a2 - I * (g2 - I * bp) * a4)
            + sign * bp * c * (2.0 * beta * c * (a2 - a4) + sign * I * (I * x + w12 + g2) * (a3 + a1));
        f[4 + k] = -I * (I * x + w12 - g2 + 2.0 * I * bp) * ((x + bp) * a3 - I * (g1 - I * bp) * a1)
            + sign * bp * c * (2.0 * beta * c * (a1 - a3) + sign * I * (I * x + g1) * (a2 + a4));
        f[6 + k] = -I * (I * x - g1 + 2.0 * I * bp) * ((x + bp) * a4 - I * (g2 - I * bp) * a2)
            + sign * bp * c * (2.0 * beta * c * (a4 - a2) + sign * I * (I * x + w12 + g2) * (a1 + a3));
    }
    Ok(f)
}

fn on_axis(x: Complex64) -> bool {
    x.re.abs() <= IMAGINARY_TOLERANCE * x.norm().max(1.0)
}

/// Derivative of one function by central differences with a Richardson step.
/// On the imaginary axis the step runs along the axis so that it never
/// crosses the principal-sheet cut.
fn tag_derivative(tag: FunctionTag, x0: Complex64, config: &SystemConfig) -> Result<Complex64> {
    let dir = if on_axis(x0) { I } else { Complex64::new(1.0, 0.0) };
    let x0 = if on_axis(x0) { Complex64::new(0.0, x0.im) } else { x0 };
    let central = |h: f64| -> Result<Complex64> {
        let d = dir * h;
        Ok((tag_value(tag, x0 + d, config)? - tag_value(tag, x0 - d, config)?) / (2.0 * d))
    };
    let d1 = central(DIFF_STEP)?;
    let d2 = central(DIFF_STEP / 2.0)?;
    Ok((d2 * 4.0 - d1) / 3.0)
}

/// Roots of the bracket (sign ±1) on the imaginary axis, by sign changes of its
/// real part on a grid uniform in √|y − ω1c| on both sides of the branch point,
/// kept when the full complex residual vanishes.
fn axis_bracket_roots(config: &SystemConfig, sign: f64) -> Vec<Complex64> {
    let y = search_extent(config);
    let w1c = config.omega1c;
    let mut out = Vec::new();
    for side in [-1.0, 1.0] {
        let span = if side > 0.0 { y - w1c } else { y + w1c };
        if span <= 0.0 {
            continue;
        }
        let s_max = span.sqrt();
        let s_min = s_max * 1e-6;
        let samples: Vec<f64> = (0..=AXIS_SAMPLES)
            .map(|k| s_min + (s_max - s_min) * k as f64 / AXIS_SAMPLES as f64)
            .collect();
        let at = |s: f64| Complex64::new(0.0, w1c + side * s * s);
        let value = |s: f64| -> Option<Complex64> {
            let x = at(s);
            let bp = beta_p(x, config).ok()?;
            Some(bracket(x, bp, config, sign))
        };
        for s in bracket_roots(|s| value(s).map_or(f64::NAN, |v| v.re), &samples) {
            let x = at(s);
            let Some(v) = value(s) else { continue };
            let Ok(bp) = beta_p(x, config) else { continue };
            let scale = ((I * x - config.gamma1) * (I * x + config.omega12 - config.gamma2)).norm()
                * (1.0 + 2.0 * bp.norm())
                + 4.0 * bp.norm_sqr();
            if v.norm() <= 1e-8 * scale.max(1.0) {
                out.push(x);
            }
        }
    }
    out
}

fn bracket_eval(config: &SystemConfig, sign: f64) -> impl Fn(Complex64) -> Option<(Complex64, Complex64, f64)> + '_ {
    move |x| {
        let bp = beta_p(x, config).ok()?;
        let dbp = kernel_derivative(x, config.omega1c, bp);
        let v = bracket(x, bp, config, sign);
        let dv = bracket_derivative(x, bp, dbp, config, sign);
        let scale = ((I * x - config.gamma1) * (I * x + config.omega12 - config.gamma2)).norm()
            * (1.0 + 2.0 * bp.norm())
            + 4.0 * bp.norm_sqr();
        (v.is_finite() && dv.is_finite()).then_some((v, dv, scale))
    }
}

fn push_unique(roots: &mut Vec<Complex64>, x: Complex64) {
    if !roots.iter().any(|r| (r - x).norm() <= POLE_MERGE_TOLERANCE * x.norm().max(1.0)) {
        roots.push(x);
    }
}

fn function_roots(config: &SystemConfig) -> Result<Vec<(FunctionTag, Complex64)>> {
    let mut bracket_sets = Vec::new();
    for sign in [1.0, -1.0] {
        let mut roots = axis_bracket_roots(config, sign);
        for x in newton_roots(config, "find_poles", bracket_eval(config, sign))? {
            let x = if on_axis(x) { Complex64::new(0.0, x.im) } else { x };
            push_unique(&mut roots, x);
        }
        bracket_sets.push(roots);
    }
    let g_root = Complex64::new(0.0, config.gamma1);
    let h_root = Complex64::new(0.0, config.omega12 + config.gamma2);
    let mut out = Vec::new();
    for (tag, prefactor_root, set) in [
        (FunctionTag::G1, g_root, &bracket_sets[0]),
        (FunctionTag::G2, g_root, &bracket_sets[1]),
        (FunctionTag::H1, h_root, &bracket_sets[0]),
        (FunctionTag::H2, h_root, &bracket_sets[1]),
    ] {
        if (prefactor_root - I * config.omega1c).norm() > 0.0 {
            if let Some(b) = set
                .iter()
                .find(|b| (*b - prefactor_root).norm() <= POLE_MERGE_TOLERANCE * b.norm().max(1.0))
            {
                return Err(Error::DegeneratePole {
                    first: prefactor_root,
                    second: *b,
                    tolerance: POLE_MERGE_TOLERANCE,
                });
            }
            out.push((tag, prefactor_root));
        }
        for &x in set {
            out.push((tag, x));
        }
    }
    Ok(out)
}

/// Roots of G1, G2, H1 and H2 on the principal sheet, classified. Residue
/// vectors are left at zero; see [`table_residues`].
pub fn find_poles(config: &SystemConfig) -> Result<PoleSet> {
    config.check()?;
    let mut set = PoleSet::default();
    for (tag, x) in function_roots(config)? {
        set.poles.push(Pole {
            tag,
            location: x,
            class: classify(x, config.omega1c),
            residues: [Complex64::new(0.0, 0.0); 4],
        });
    }
    set.sort();
    Ok(set)
}

/// Fills each table pole with f/F′ from the tabulated numerators: G poles carry
/// A1 (f1, f2) and A3 (f5, f6), H poles carry A2 (f3, f4) and A4 (f7, f8).
pub fn table_residues(set: &mut PoleSet, config: &SystemConfig, init: &InitialState) -> Result<()> {
    for pole in &mut set.poles {
        let x = pole.location;
        let f = tabulated_numerators(x, config, init)?;
        let d = tag_derivative(pole.tag, x, config)?;
        if d.norm() == 0.0 || !d.is_finite() {
            return Err(Error::DegeneratePole {
                first: x,
                second: x,
                tolerance: POLE_MERGE_TOLERANCE,
            });
        }
        let zero = Complex64::new(0.0, 0.0);
        pole.residues = match pole.tag {
            FunctionTag::G1 => [f[0] / d, zero, f[4] / d, zero],
            FunctionTag::G2 => [f[1] / d, zero, f[5] / d, zero],
            FunctionTag::H1 => [zero, f[2] / d, zero, f[6] / d],
            FunctionTag::H2 | FunctionTag::D => [zero, f[3] / d, zero, f[7] / d],
        };
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn has_root(set: &PoleSet, tag: FunctionTag, x: Complex64, tol: f64) -> bool {
        set.poles.iter().any(|p| p.tag == tag && (p.location - x).norm() < tol)
    }

    #[test]
    fn prefactor_root_of_g() {
        let cfg = SystemConfig::symmetric(6.0, PI, 0.6, 0.2);
        let v = spectral_functions(Complex64::new(0.0, 6.0), &cfg).unwrap();
        assert!(v[0].norm() < 1e-12 && v[1].norm() < 1e-12);
    }

    #[test]
    fn bracket_vanishes_at_quoted_points() {
        let cfg = SystemConfig::symmetric(6.0, PI, 0.6, 0.2);
        for y in [-5.6, -3.4] {
            let v = spectral_functions(Complex64::new(0.0, y), &cfg).unwrap();
            assert!(v[0].norm() < 1e-12, "{y}: {}", v[0]);
        }
    }

    #[test]
    fn pole_table_above_band_edge() {
        let cfg = SystemConfig::symmetric(6.0, PI, 0.6, 0.2);
        let set = find_poles(&cfg).unwrap();
        for y in [6.0, -6.0, -5.6, -3.4] {
            assert!(has_root(&set, FunctionTag::G1, Complex64::new(0.0, y), 1e-9), "G1 {y}");
        }
        for y in [-6.0, -5.6, -3.4] {
            assert!(has_root(&set, FunctionTag::H1, Complex64::new(0.0, y), 1e-9), "H1 {y}");
        }
        assert!(!has_root(&set, FunctionTag::G2, Complex64::new(0.0, -3.4), 1e-3));
    }

    #[test]
    fn pole_table_inside_gap() {
        let cfg = SystemConfig::symmetric(6.0, PI, -0.6, -1.0);
        let set = find_poles(&cfg).unwrap();
        for y in [-4.6, -6.0, -5.6] {
            assert!(has_root(&set, FunctionTag::H1, Complex64::new(0.0, y), 1e-9), "H1 {y}");
        }
        assert!(has_root(&set, FunctionTag::G1, Complex64::new(0.0, 6.0), 1e-12));
    }

    #[test]
    fn residues_are_finite() {
        let cfg = SystemConfig::symmetric(6.0, PI, 0.6, 0.2);
        let init = crate::config::preset_initial("unentangled").unwrap();
        let mut set = find_poles(&cfg).unwrap();
        table_residues(&mut set, &cfg, &init).unwrap();
        for p in &set.poles {
            assert!(p.weight().is_finite());
        }
    }
}
