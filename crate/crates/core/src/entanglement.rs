//! Two-atom reduced density matrix, partial transpose and (logarithmic) negativity.
//!
//! Basis ordering is |iA jB> ↦ 3i + j with A ∈ {a1, a2, a3}, B ∈ {a4, a5, a6}.

use nalgebra::{SMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::trajectory::AmplitudeTrajectory;

pub type Matrix9 = SMatrix<Complex64, 9, 9>;

/// Basis indices of |a1a6>, |a2a6>, |a3a4>, |a3a5> and the ground pair |a3a6>.
pub const A1A6: usize = 2;
pub const A2A6: usize = 5;
pub const A3A4: usize = 6;
pub const A3A5: usize = 7;
pub const A3A6: usize = 8;
const AMPLITUDE_SLOTS: [usize; 4] = [A1A6, A2A6, A3A4, A3A5];

/// Eigenvalues of the partial transpose above this are treated as zero.
pub const NEGATIVE_CLAMP: f64 = -1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AtomDensityMatrix(pub Matrix9);

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementSeries {
    pub times: Vec<f64>,
    pub negativity: Vec<f64>,
    pub log_negativity: Vec<f64>,
}

/// ρ = |φ><φ| + P_f |a3a6><a3a6|, with A2 and A4 carrying the relative
/// free-evolution phase e^{−iω12 t}.
pub fn reduced_density_matrix(amps: &[Complex64; 4], t: f64, config: &SystemConfig) -> Result<AtomDensityMatrix> {
    let phase = Complex64::from_polar(1.0, -config.omega12 * t);
    let phased = [amps[0], amps[1] * phase, amps[2], amps[3] * phase];
    density_from_state(&phased)
}

/// Same as [`reduced_density_matrix`] with the amplitudes taken as given.
pub fn density_from_state(amps: &[Complex64; 4]) -> Result<AtomDensityMatrix> {
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if !norm.is_finite() || norm > 1.0 + 1e-9 {
        return Err(Error::Norm { norm });
    }
    let mut rho = Matrix9::zeros();
    for (i, &si) in AMPLITUDE_SLOTS.iter().enumerate() {
        for (j, &sj) in AMPLITUDE_SLOTS.iter().enumerate() {
            rho[(si, sj)] = amps[i] * amps[j].conj();
        }
    }
    rho[(A3A6, A3A6)] = Complex64::new((1.0 - norm).max(0.0), 0.0);
    Ok(AtomDensityMatrix(rho))
}

/// <iA jB|ρ^Γ|kA lB> = <iA lB|ρ|kA jB>.
pub fn partial_transpose_b(rho: &Matrix9) -> Matrix9 {
    let mut out = Matrix9::zeros();
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    out[(3 * i + j, 3 * k + l)] = rho[(3 * i + l, 3 * k + j)];
                }
            }
        }
    }
    out
}

/// Ascending eigenvalues of a Hermitian 9×9 matrix.
pub fn hermitian_eigenvalues(m: &Matrix9) -> [f64; 9] {
    let eig = SymmetricEigen::new(*m);
    let mut v: [f64; 9] = std::array::from_fn(|k| eig.eigenvalues[k]);
    v.sort_by(f64::total_cmp);
    v
}

/// (N, E_N) with N the magnitude sum of the negative eigenvalues of ρ^Γ.
pub fn log_negativity(rho: &AtomDensityMatrix) -> (f64, f64) {
    let pt = partial_transpose_b(&rho.0);
    let n: f64 = hermitian_eigenvalues(&pt)
        .iter()
        .filter(|&&l| l < NEGATIVE_CLAMP)
        .map(|l| -l)
        .sum();
    (n, (1.0 + 2.0 * n).log2())
}

/// Trace, smallest eigenvalue and Hermiticity defect of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hygiene {
    pub trace: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_defect: f64,
}

pub fn hygiene(rho: &AtomDensityMatrix) -> Hygiene {
    let m = &rho.0;
    let trace = m.trace().re;
    let hermiticity_defect = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Hygiene {
        trace,
        min_eigenvalue: hermitian_eigenvalues(m)[0],
        hermiticity_defect,
    }
}

/// N and E_N at every time of the trajectory, computed in parallel.
pub fn entanglement_series(traj: &AmplitudeTrajectory, config: &SystemConfig) -> Result<EntanglementSeries> {
    let values = traj
        .times
        .par_iter()
        .zip(traj.amps.par_iter())
        .map(|(&t, a)| reduced_density_matrix(a, t, config).map(|rho| log_negativity(&rho)))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntanglementSeries {
        times: traj.times.clone(),
        negativity: values.iter().map(|v| v.0).collect(),
        log_negativity: values.iter().map(|v| v.1).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cfg() -> SystemConfig {
        SystemConfig::symmetric(6.0, PI, 0.6, 0.2)
    }

    #[test]
    fn bright_state_is_a_rank_one_projector() {
        let rho = reduced_density_matrix(&[c(FRAC_1_SQRT_2), c(0.0), c(FRAC_1_SQRT_2), c(0.0)], 0.0, &cfg()).unwrap();
        assert!((rho.0.trace().re - 1.0).abs() < 1e-15);
        let ev = hermitian_eigenvalues(&rho.0);
        assert!((ev[8] - 1.0).abs() < 1e-12);
        assert!(ev[..8].iter().all(|l| l.abs() < 1e-12));
        let (n, en) = log_negativity(&rho);
        assert!((n - 0.5).abs() < 1e-12);
        assert!((en - 1.0).abs() < 1e-12);
        let pt = hermitian_eigenvalues(&partial_transpose_b(&rho.0));
        assert!((pt[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn fully_decayed_state() {
        let rho = density_from_state(&[c(0.0); 4]).unwrap();
        let mut e = Matrix9::zeros();
        e[(A3A6, A3A6)] = c(1.0);
        assert_eq!(rho.0, e);
        assert_eq!(log_negativity(&rho), (0.0, 0.0));
    }

    #[test]
    fn partially_decayed_entries() {
        let a = [c(0.35f64.sqrt()), c(0.0), c(0.15f64.sqrt()), c(0.0)];
        let rho = density_from_state(&a).unwrap().0;
        assert!((rho[(A1A6, A1A6)].re - 0.35).abs() < 1e-15);
        assert!((rho[(A3A4, A3A4)].re - 0.15).abs() < 1e-15);
        assert!((rho[(A3A6, A3A6)].re - 0.5).abs() < 1e-15);
        assert!((rho[(A1A6, A3A4)].re - (0.35f64 * 0.15).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn half_decayed_bell_state() {
        let h = 0.5f64.sqrt() * FRAC_1_SQRT_2;
        let rho = density_from_state(&[c(h), c(0.0), c(h), c(0.0)]).unwrap();
        let (n, en) = log_negativity(&rho);
        // Closed-form 2×2 block: diag(0, 0.5) with off-diagonal 0.25.
        let expected = -(0.5 - 0.5f64.sqrt()) / 2.0;
        assert!((n - expected).abs() < 1e-12, "{n}");
        assert!((en - (1.0 + 2.0 * expected).log2()).abs() < 1e-12);
        assert!((en - 0.2716).abs() < 1e-4);
    }

    #[test]
    fn product_state_has_no_negativity() {
        let rho = density_from_state(&[c(1.0), c(0.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(log_negativity(&rho), (0.0, 0.0));
    }

    #[test]
    fn diagonal_matrices_are_invariant_under_partial_transpose() {
        let mut d = Matrix9::zeros();
        for k in 0..9 {
            d[(k, k)] = c(k as f64);
        }
        assert_eq!(partial_transpose_b(&d), d);
    }

    #[test]
    fn over_normalized_amplitudes_are_rejected() {
        assert!(matches!(density_from_state(&[c(1.0), c(0.1), c(0.0), c(0.0)]), Err(Error::Norm { .. })));
    }

    /// Full atoms ⊗ two-mode field state traced over the field by brute force.
    #[test]
    fn field_trace_drops_cross_sector_terms() {
        let a = [
            Complex64::new(0.4, 0.1),
            Complex64::new(0.0, 0.3),
            Complex64::new(-0.2, 0.2),
            Complex64::new(0.1, 0.0),
        ];
        let rest: f64 = 1.0 - a.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let b = [Complex64::new(0.6, 0.0) * rest.sqrt(), Complex64::new(0.0, 0.8) * rest.sqrt()];
        // Field index 0 = vacuum, 1 and 2 one photon in mode 1 or 2.
        let mut psi = vec![Complex64::new(0.0, 0.0); 27];
        for (k, &slot) in AMPLITUDE_SLOTS.iter().enumerate() {
            psi[slot * 3] = a[k];
        }
        psi[A3A6 * 3 + 1] = b[0];
        psi[A3A6 * 3 + 2] = b[1];
        let mut traced = Matrix9::zeros();
        for i in 0..9 {
            for j in 0..9 {
                for f in 0..3 {
                    traced[(i, j)] += psi[i * 3 + f] * psi[j * 3 + f].conj();
                }
            }
        }
        let rho = density_from_state(&a).unwrap().0;
        assert!((traced - rho).iter().all(|z| z.norm() < 1e-15));
    }
}
