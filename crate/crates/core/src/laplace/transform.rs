use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::config::{InitialState, SystemConfig};
use crate::error::{Error, Result};
use crate::kernel::{kernel, Sheet};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Transform-domain amplitudes A1(x), A2(x′), A3(x), A4(x′) with x′ = x − iω12,
/// and the determinant of the linear system they solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformAmplitudes {
    pub a: [Complex64; 4],
    pub denom: Complex64,
}

/// The 4×4 system M(x)·A = A(0) for the unknowns (A1(x), A2(x′), A3(x), A4(x′)),
/// with the kernel Γ supplied by the caller.
pub(crate) fn matrix_with_kernel(x: Complex64, config: &SystemConfig, gamma: Complex64) -> Matrix4<Complex64> {
    let xp = x - I * config.omega12;
    let cg = gamma * config.cos_eta();
    let r1 = I * config.gamma1 + gamma;
    let r2 = I * config.gamma2 + gamma;
    Matrix4::new(
        x + gamma, cg, r1, cg, //
        cg, xp + gamma, cg, r2, //
        r1, cg, x + gamma, cg, //
        cg, r2, cg, xp + gamma,
    )
}

pub fn system_matrix(x: Complex64, config: &SystemConfig, sheet: Sheet) -> Result<Matrix4<Complex64>> {
    let gamma = kernel(x, config.omega1c, config.beta, sheet)?;
    Ok(matrix_with_kernel(x, config, gamma))
}

pub(crate) fn solve_with_kernel(
    x: Complex64,
    config: &SystemConfig,
    gamma: Complex64,
    init: &InitialState,
) -> Result<TransformAmplitudes> {
    let m = matrix_with_kernel(x, config, gamma);
    let lu = m.lu();
    let denom = lu.determinant();
    let scale: f64 = m.row_iter().map(|r| r.iter().map(|z| z.norm()).sum::<f64>()).product();
    if !denom.is_finite() || denom.norm() <= 1e-14 * scale {
        return Err(Error::SingularSystem { x });
    }
    let b = nalgebra::Vector4::from_column_slice(&init.amplitudes);
    let sol = lu.solve(&b).ok_or(Error::SingularSystem { x })?;
    Ok(TransformAmplitudes {
        a: [sol[0], sol[1], sol[2], sol[3]],
        denom,
    })
}

/// Solves the transform-domain system on the requested kernel sheet.
pub fn transform_amplitudes_on(
    x: Complex64,
    config: &SystemConfig,
    init: &InitialState,
    sheet: Sheet,
) -> Result<TransformAmplitudes> {
    let gamma = kernel(x, config.omega1c, config.beta, sheet)?;
    solve_with_kernel(x, config, gamma, init)
}

/// Transform-domain amplitudes on the sheet used by the inverse transform.
/// Both sheets coincide for Re x > 0.
pub fn transform_amplitudes(x: Complex64, config: &SystemConfig, init: &InitialState) -> Result<TransformAmplitudes> {
    transform_amplitudes_on(x, config, init, Sheet::Continuum)
}

/// The factor of det M(x) that couples the symmetric combinations
/// A1 + A3 and A2 + A4:
/// (x + iγ1 + 2Γ)(x′ + iγ2 + 2Γ) − 4cos²η Γ².
/// The remaining factors are (x − iγ1)(x′ − iγ2).
pub fn symmetric_factor(x: Complex64, config: &SystemConfig, gamma: Complex64) -> Complex64 {
    let xp = x - I * config.omega12;
    let c = config.cos_eta();
    (x + I * config.gamma1 + 2.0 * gamma) * (xp + I * config.gamma2 + 2.0 * gamma) - 4.0 * c * c * gamma * gamma
}

/// dS/dx given Γ and dΓ/dx.
pub(crate) fn symmetric_factor_derivative(
    x: Complex64,
    config: &SystemConfig,
    gamma: Complex64,
    dgamma: Complex64,
) -> Complex64 {
    let xp = x - I * config.omega12;
    let c = config.cos_eta();
    let p = x + I * config.gamma1 + 2.0 * gamma;
    let q = xp + I * config.gamma2 + 2.0 * gamma;
    let dp = 1.0 + 2.0 * dgamma;
    dp * q + p * dp - 8.0 * c * c * gamma * dgamma
}

/// Solution of the transform-domain system through its decoupled form:
/// antisymmetric scalars A1 − A3, A2 − A4 and a 2×2 block for the sums, with
/// the block determinant kept in expanded form. Stays accurate as |Γ| grows
/// near the branch point, where the 4×4 elimination loses precision.
pub(crate) fn solve_decoupled(
    x: Complex64,
    config: &SystemConfig,
    gamma: Complex64,
    init: &InitialState,
) -> [Complex64; 4] {
    let [b1, b2, b3, b4] = init.amplitudes;
    let xp = x - I * config.omega12;
    let c = config.cos_eta();
    let p = (b1 - b3) / (x - I * config.gamma1);
    let q = (b2 - b4) / (xp - I * config.gamma2);
    let e1 = x + I * config.gamma1;
    let e2 = xp + I * config.gamma2;
    let s = e1 * e2 + 2.0 * gamma * (e1 + e2) + 4.0 * (1.0 - c * c) * gamma * gamma;
    let m11 = e1 + 2.0 * gamma;
    let m22 = e2 + 2.0 * gamma;
    let m12 = 2.0 * c * gamma;
    let u0 = b1 + b3;
    let v0 = b2 + b4;
    let u = (m22 * u0 - m12 * v0) / s;
    let v = (m11 * v0 - m12 * u0) / s;
    [(u + p) * 0.5, (v + q) * 0.5, (u - p) * 0.5, (v - q) * 0.5]
}

fn det3(m: &[[Complex64; 3]; 3]) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Classical adjugate by cofactor expansion; finite at the poles of M⁻¹.
pub fn adjugate(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    let mut adj = Matrix4::from_element(zero);
    for i in 0..4 {
        for j in 0..4 {
            let mut minor = [[zero; 3]; 3];
            let mut r = 0;
            for row in 0..4 {
                if row == i {
                    continue;
                }
                let mut c = 0;
                for col in 0..4 {
                    if col == j {
                        continue;
                    }
                    minor[r][c] = m[(row, col)];
                    c += 1;
                }
                r += 1;
            }
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            adj[(j, i)] = det3(&minor) * sign;
        }
    }
    adj
}
