use std::f64::consts::PI;

use nalgebra::DMatrix;
use pbgent::bath::{build_bath, default_step, integrate, DEFAULT_CUTOFF};
use pbgent::entanglement::{
    density_from_state, hermitian_eigenvalues, hygiene, log_negativity, reduced_density_matrix, AtomDensityMatrix,
    Matrix9, A1A6, A2A6, A3A4, A3A5, A3A6,
};
use pbgent::kernel::{kernel, kernel_values_on};
use pbgent::laplace::{branch_cut_integral, residue_sum, transform_amplitudes, InversionPlan, PoleClass};
use pbgent::{Complex64, Error, InitialState, Sheet, SystemConfig};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn system() -> impl Strategy<Value = SystemConfig> {
    (0.5f64..10.0, 0.0f64..PI, -2.0f64..1.5, 0.1f64..1.2)
        .prop_map(|(g, eta, w1c, w12)| SystemConfig::symmetric(g, eta, w1c, w1c - w12))
}

fn amplitudes() -> impl Strategy<Value = [Complex64; 4]> {
    prop::array::uniform4((-1.0f64..1.0, -1.0f64..1.0)).prop_filter_map("zero vector", |v| {
        let a = v.map(|(re, im)| c(re, im));
        let n: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        (n > 1e-3).then(|| a.map(|z| z / n))
    })
}

/// Normalized amplitudes scaled down by a random survival probability.
fn decayed_amplitudes() -> impl Strategy<Value = [Complex64; 4]> {
    (amplitudes(), 0.0f64..=1.0).prop_map(|(a, p)| a.map(|z| z * p.sqrt()))
}

fn random_hermitian() -> impl Strategy<Value = Matrix9> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 81).prop_map(|v| {
        let m = Matrix9::from_fn(|i, j| c(v[9 * i + j].0, v[9 * i + j].1));
        (m + m.adjoint()) * c(0.5, 0.0)
    })
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix, ascending.
fn jacobi_eigenvalues(mut a: DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    for _ in 0..100 {
        let off: f64 = (0..n).flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j))).map(|(i, j)| a[(i, j)].powi(2)).sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * a[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = cs * akp - sn * akq;
                    a[(k, q)] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = cs * apk - sn * aqk;
                    a[(q, k)] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut e: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    e.sort_by(f64::total_cmp);
    e
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn normalized_states_pass_and_scaled_ones_fail(a in amplitudes(), scale in 1.01f64..2.0) {
        prop_assert!(InitialState::new(a).check().is_ok());
        let scaled = InitialState::new(a.map(|z| z * scale));
        let is_normalization = matches!(scaled.check(), Err(Error::Normalization { .. }));
        prop_assert!(is_normalization);
    }

    #[test]
    fn kernel_channels(cfg in system(), re in 0.01f64..5.0, im in -8.0f64..8.0) {
        let x = c(re, im);
        let k = kernel_values_on(x, &cfg, Sheet::Principal).unwrap();
        prop_assert_eq!(k.gamma11, k.gamma22);
        prop_assert_eq!(k.gamma12, k.gamma11 * cfg.cos_eta());
        let mut mirrored = cfg;
        mirrored.eta = PI - cfg.eta;
        let m = kernel_values_on(x, &mirrored, Sheet::Principal).unwrap();
        prop_assert!((m.gamma12 + k.gamma12).norm() <= 1e-15 * k.gamma11.norm());
    }

    #[test]
    fn principal_branch_cut_lies_on_the_lower_axis(w1c in -2.0f64..2.0, y in 0.01f64..8.0, eps in 1e-9f64..1e-6) {
        let above = c(0.0, w1c + y);
        let no_cut = kernel(above + eps, w1c, 1.0, Sheet::Principal).unwrap()
            - kernel(above - eps, w1c, 1.0, Sheet::Principal).unwrap();
        prop_assert!(no_cut.norm() < 1e-3);
        let below = c(0.0, w1c - y);
        let jump = kernel(below + eps, w1c, 1.0, Sheet::Principal).unwrap()
            - kernel(below - eps, w1c, 1.0, Sheet::Principal).unwrap();
        prop_assert!(jump.norm() > 1.0 / y.sqrt());
    }

    #[test]
    fn continuum_branch_cut_lies_on_the_horizontal_ray(w1c in -2.0f64..2.0, u in 0.01f64..8.0, eps in 1e-9f64..1e-6) {
        let on_cut = c(-u, w1c);
        let up = kernel(on_cut + c(0.0, eps), w1c, 1.0, Sheet::Continuum).unwrap();
        let down = kernel(on_cut - c(0.0, eps), w1c, 1.0, Sheet::Continuum).unwrap();
        prop_assert!((up - down).norm() > 1.0 / u.sqrt());
        // Away from the ray the two sheets agree on the right half-plane.
        let x = c(u, w1c - u);
        let diff = kernel(x, w1c, 1.0, Sheet::Continuum).unwrap() - kernel(x, w1c, 1.0, Sheet::Principal).unwrap();
        prop_assert!(diff.norm() < 1e-12);
    }

    #[test]
    fn swapping_initial_data_swaps_transforms(cfg in system(), a in amplitudes(), re in 0.1f64..4.0, im in -6.0f64..6.0) {
        let x = c(re, im);
        let swapped = [a[2], a[3], a[0], a[1]];
        let p = transform_amplitudes(x, &cfg, &InitialState::new(a)).unwrap().a;
        let q = transform_amplitudes(x, &cfg, &InitialState::new(swapped)).unwrap().a;
        for (i, j) in [(0, 2), (1, 3), (2, 0), (3, 1)] {
            prop_assert!((p[i] - q[j]).norm() <= 1e-12 * (1.0 + p[i].norm()));
        }
    }

    #[test]
    fn local_phases_do_not_change_negativity(a in decayed_amplitudes(), t in 0.0f64..500.0, cfg in system()) {
        let with = log_negativity(&reduced_density_matrix(&a, t, &cfg).unwrap());
        let without = log_negativity(&density_from_state(&a).unwrap());
        prop_assert!((with.1 - without.1).abs() <= 1e-10);
    }

    #[test]
    fn negativity_bounds(a in decayed_amplitudes()) {
        let rho = density_from_state(&a).unwrap();
        let (n, e) = log_negativity(&rho);
        prop_assert!(n >= 0.0);
        prop_assert!((e - (1.0 + 2.0 * n).log2()).abs() <= 1e-12);
        prop_assert!(e <= 3f64.log2() + 1e-12);
        let h = hygiene(&rho);
        prop_assert!((h.trace - 1.0).abs() <= 1e-10);
        prop_assert!(h.min_eigenvalue >= -1e-10);
        prop_assert!(h.hermiticity_defect <= 1e-12);
        let support = [A1A6, A2A6, A3A4, A3A5, A3A6];
        for i in 0..9 {
            for j in 0..9 {
                if !(support.contains(&i) && support.contains(&j)) {
                    prop_assert_eq!(rho.0[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn separable_diagonal_mixtures_have_zero_negativity(w in prop::array::uniform5(0.0f64..1.0)) {
        let total: f64 = w.iter().sum();
        prop_assume!(total > 1e-6);
        let mut rho = Matrix9::zeros();
        for (slot, p) in [A1A6, A2A6, A3A4, A3A5, A3A6].iter().zip(w) {
            rho[(*slot, *slot)] = c(p / total, 0.0);
        }
        let (n, e) = log_negativity(&AtomDensityMatrix(rho));
        prop_assert_eq!(n, 0.0);
        prop_assert_eq!(e, 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn eigenvalues_match_an_independent_real_embedding(m in random_hermitian()) {
        let ours = hermitian_eigenvalues(&m);
        let trace = m.trace().re;
        prop_assert!((ours.iter().sum::<f64>() - trace).abs() <= 1e-10);
        // [[Re, −Im], [Im, Re]] has every eigenvalue of m twice.
        let big = DMatrix::from_fn(18, 18, |i, j| {
            let z = m[(i % 9, j % 9)];
            match (i < 9, j < 9) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let theirs = jacobi_eigenvalues(big);
        for (k, l) in ours.iter().enumerate() {
            prop_assert!((l - theirs[2 * k]).abs() <= 1e-10, "{} vs {}", l, theirs[2 * k]);
            prop_assert!((l - theirs[2 * k + 1]).abs() <= 1e-10);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn inversion_is_complete_at_zero(cfg in system(), a in amplitudes()) {
        let init = InitialState::new(a);
        let plan = InversionPlan::new(&cfg, &init).unwrap();
        let r = residue_sum(0.0, &plan.poles);
        let cut = branch_cut_integral(0.0, &cfg, &init).unwrap();
        for k in 0..4 {
            prop_assert!((r[k] + cut[k] - a[k]).norm() <= 1e-6, "{:?}", cfg);
        }
    }

    #[test]
    fn pole_classes_and_localized_envelopes(cfg in system(), a in amplitudes()) {
        let plan = InversionPlan::new(&cfg, &InitialState::new(a)).unwrap();
        for p in &plan.poles.poles {
            match p.class {
                PoleClass::Localized => {
                    prop_assert!(p.location.re.abs() <= 1e-9 * p.location.norm().max(1.0));
                    prop_assert!(p.location.im > cfg.omega1c);
                    // |r e^{xt}| is flat over a long window.
                    let w = p.residues[0].norm();
                    let later = (p.residues[0] * (p.location * 1000.0).exp()).norm();
                    prop_assert!((later - w).abs() <= 1e-5 * w.max(1e-300));
                }
                PoleClass::Propagating => {
                    prop_assert!(p.location.re < 0.0 && p.location.im < cfg.omega1c);
                }
                _ => {}
            }
        }
    }

    #[test]
    fn exchanging_the_atoms_exchanges_amplitudes(cfg in system()) {
        let times: Vec<f64> = (0..=40).map(|k| k as f64 * 0.5).collect();
        let one = InitialState::real([1.0, 0.0, 0.0, 0.0]);
        let three = InitialState::real([0.0, 0.0, 1.0, 0.0]);
        let p = InversionPlan::new(&cfg, &one).unwrap().trajectory(&times).unwrap();
        let q = InversionPlan::new(&cfg, &three).unwrap().trajectory(&times).unwrap();
        for (a, b) in p.amps.iter().zip(&q.amps) {
            prop_assert!((a[0] - b[2]).norm() <= 1e-9 && (a[2] - b[0]).norm() <= 1e-9);
            prop_assert!((a[1] - b[3]).norm() <= 1e-9 && (a[3] - b[1]).norm() <= 1e-9);
        }
    }

    #[test]
    fn field_probability_stays_in_range(cfg in system(), a in amplitudes()) {
        let times: Vec<f64> = (0..=200).map(|k| k as f64 * 0.5).collect();
        let traj = InversionPlan::new(&cfg, &InitialState::new(a)).unwrap().trajectory(&times).unwrap();
        prop_assert!(traj.field_prob[0].abs() <= 1e-12);
        for p in &traj.field_prob {
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(p));
        }
    }

    #[test]
    fn bath_channels_and_norm(cfg in system(), a in amplitudes()) {
        let bath = build_bath(&cfg, 400, DEFAULT_CUTOFF).unwrap();
        for k in 0..bath.len() {
            let g = bath.couplings[k];
            prop_assert!((bath.couplings_a[k] - g * cfg.cos_eta()).abs() <= 1e-15 * g);
            prop_assert!((bath.couplings_b[k] - g * cfg.sin_eta()).abs() <= 1e-15 * g);
        }
        let times = [0.0, 1.0, 2.0, 3.0];
        let run = integrate(&cfg, &InitialState::new(a), &bath, &times, default_step(&cfg, &bath), false).unwrap();
        prop_assert!(run.max_norm_drift <= 1e-8 * 3.0);
    }
}

#[test]
fn halving_the_mode_spacing_barely_moves_the_oracle() {
    let cfg = SystemConfig::symmetric(1.5, PI, 0.6, 0.2);
    let init = InitialState::real([1.0, 0.0, 0.0, 0.0]);
    let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.5).collect();
    let run = |n| {
        let bath = build_bath(&cfg, n, DEFAULT_CUTOFF).unwrap();
        integrate(&cfg, &init, &bath, &times, default_step(&cfg, &bath), false).unwrap().trajectory
    };
    let coarse = run(2000);
    let fine = run(4000);
    assert!(coarse.max_deviation(&fine) < 1e-3, "{}", coarse.max_deviation(&fine));
}
