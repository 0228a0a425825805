//! Self- and cross-damping kernels of the band-edge reservoir.
//!
//! All functions take the transform variable `x` in units of β. The kernel
//! carries a square-root branch point at `x = iω1c`; two sheets are exposed:
//!
//! * [`Sheet::Principal`] takes the principal root of `−ix − ω1c`, so its cut
//!   runs down the imaginary axis from the branch point.
//! * [`Sheet::Continuum`] rotates the cut onto the horizontal ray
//!   `x = iω1c − u`, `u > 0`, along which the inverse transform is deformed.
//!
//! The two agree for `Re x > 0` and on the imaginary axis above the branch point.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Which continuation of √(−ix − ω1c) to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sheet {
    Principal,
    Continuum,
}

/// Γ11, Γ22 and Γ12 at one transform-domain point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub gamma11: Complex64,
    pub gamma22: Complex64,
    pub gamma12: Complex64,
}

/// Principal square root with the sign of a zero imaginary part ignored, so that
/// a negative real argument always maps onto the positive imaginary axis.
pub fn principal_sqrt(z: Complex64) -> Complex64 {
    let z = if z.im == 0.0 { Complex64::new(z.re, 0.0) } else { z };
    z.sqrt()
}

/// Square root of `z = −ix − ω1c` with the cut rotated onto the horizontal ray.
fn continuum_sqrt(z: Complex64) -> Complex64 {
    Complex64::new(FRAC_1_SQRT_2, -FRAC_1_SQRT_2) * principal_sqrt(I * z)
}

/// β^{3/2} / (i √(−ix − ω1c)) on the requested sheet.
pub fn kernel(x: Complex64, omega1c: f64, beta: f64, sheet: Sheet) -> Result<Complex64> {
    let z = -I * x - omega1c;
    if z == Complex64::new(0.0, 0.0) || !z.is_finite() {
        return Err(Error::BranchPoint { x });
    }
    let root = match sheet {
        Sheet::Principal => principal_sqrt(z),
        Sheet::Continuum => continuum_sqrt(z),
    };
    Ok(beta * beta.sqrt() / (I * root))
}

/// β′(x) for β = 1 on the principal sheet.
pub fn beta_prime(x: Complex64, omega1c: f64) -> Result<Complex64> {
    kernel(x, omega1c, 1.0, Sheet::Principal)
}

/// Derivative of the kernel with respect to `x`, given its value `gamma`.
///
/// With w² = −ix − ω1c the derivative is iΓ / (2w²) on either sheet.
pub fn kernel_derivative(x: Complex64, omega1c: f64, gamma: Complex64) -> Complex64 {
    let z = -I * x - omega1c;
    I * gamma / (2.0 * z)
}

pub fn kernel_values_on(x: Complex64, config: &SystemConfig, sheet: Sheet) -> Result<KernelValue> {
    let g = kernel(x, config.omega1c, config.beta, sheet)?;
    Ok(KernelValue {
        gamma11: g,
        gamma22: g,
        gamma12: g * config.cos_eta(),
    })
}

/// Kernel triple on the principal sheet.
pub fn kernel_values(x: Complex64, config: &SystemConfig) -> Result<KernelValue> {
    kernel_values_on(x, config, Sheet::Principal)
}

/// Band-edge density of states J as a function of the mode detuning from the
/// band edge, `nu = ω − ω_c`. Zero inside the gap.
pub fn spectral_density(nu: f64, config: &SystemConfig) -> f64 {
    if nu <= 0.0 {
        0.0
    } else {
        config.beta_three_halves() / (PI * nu.sqrt())
    }
}

/// Time-domain memory kernel K(τ) = ∫ J(ω) e^{−i(ω−ω13)τ} dω.
///
/// Closed form β^{3/2} e^{−iπ/4} e^{iω1c τ} / √(πτ).
pub fn memory_kernel(tau: f64, config: &SystemConfig) -> Result<Complex64> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::Domain(format!("memory kernel needs tau > 0 (got {tau})")));
    }
    let phase = Complex64::from_polar(1.0, config.omega1c * tau - PI / 4.0);
    Ok(phase * (config.beta_three_halves() / (PI * tau).sqrt()))
}
