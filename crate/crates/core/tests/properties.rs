use nullwave_core::biorth::{sinc_limit_family, stacked_norm_ceiling, stacked_norm_ratio};
use nullwave_core::config::{validate_config, ProblemConfig, ProfileRule, Purpose};
use nullwave_core::modal::{h0_norm_sq, project_profile, ControlSignal, ModalState, ModeData};
use nullwave_core::moment::{exp_integral, ingham_infimum, ingham_ratio, ingham_ratio_quadrature};
use nullwave_core::pde::{energy, simulate, ModeDynamics, System};
use nullwave_core::spectrum::{lambda, lambda_bar};
use nullwave_core::C64;
use proptest::prelude::*;

fn cplx() -> impl Strategy<Value = C64> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| C64::new(a, b))
}

fn data(vals: &[(C64, C64)]) -> ModalState {
    let n = vals.len() as u32;
    let modes = vals
        .iter()
        .zip(1..)
        .map(|(&(u0, u1), k)| ModeData { n: k, u0, u1 })
        .collect();
    ModalState::new(modes, project_profile(&ProfileRule::Inverse, n).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn spectrum_is_conjugate_symmetric(n in 1i64..200, eps in 0.0f64..1.0, alpha in 0.0f64..1.0) {
        prop_assert_eq!(lambda(-n, eps, alpha), lambda_bar(n, eps, alpha));
        prop_assert_eq!(lambda(n, eps, alpha).conj(), lambda_bar(n, eps, alpha));
        prop_assert!(lambda(n, eps, alpha).re >= 0.0);
    }

    #[test]
    fn h0_norm_is_quadratic(vals in prop::collection::vec((cplx(), cplx()), 1..8), c in cplx()) {
        let d = data(&vals);
        let scaled: Vec<(C64, C64)> = vals.iter().map(|&(a, b)| (a * c, b * c)).collect();
        let base = h0_norm_sq(&d).unwrap();
        let s = h0_norm_sq(&d.with_coefficients(&scaled)).unwrap();
        prop_assert!((s - c.norm_sqr() * base).abs() <= 1e-12 * (1.0 + s));
    }

    #[test]
    fn validation_is_idempotent(alpha in 0.0f64..0.99, eps in 0.0f64..0.99, t in 0.5f64..20.0, n in 1u32..40) {
        let cfg = ProblemConfig { alpha, epsilon: eps, horizon_t: t, n_modes: n, ..ProblemConfig::default() };
        if let Ok(v) = validate_config(&cfg, Purpose::Diagnostic) {
            prop_assert_eq!(validate_config(&v, Purpose::Diagnostic).unwrap(), v);
        }
    }

    #[test]
    fn propagator_composes(n in 1u32..30, eps in 0.0f64..0.9, alpha in 0.05f64..0.95, a in 0.0f64..2.0, b in 0.0f64..2.0, sys in 0usize..3) {
        let system = [System::Damped, System::Viscous, System::Conservative][sys];
        let d = ModeDynamics::new(system, n, eps, alpha, C64::new(1.0, 0.0)).unwrap();
        let (pa, pb, pab) = (d.propagator(a), d.propagator(b), d.propagator(a + b));
        let prod = [
            pa[0] * pb[0] + pa[1] * pb[2],
            pa[0] * pb[1] + pa[1] * pb[3],
            pa[2] * pb[0] + pa[3] * pb[2],
            pa[2] * pb[1] + pa[3] * pb[3],
        ];
        let scale = pab.iter().fold(1.0f64, |m, x| m.max(x.norm()));
        for k in 0..4 {
            prop_assert!((prod[k] - pab[k]).norm() <= 1e-10 * scale, "{:?} {:?}", prod, pab);
        }
    }

    #[test]
    fn free_energy_never_grows(vals in prop::collection::vec((cplx(), cplx()), 1..10), eps in 0.0f64..0.5, alpha in 0.05f64..0.95) {
        let d = data(&vals);
        let n = vals.len() as u32;
        let v = ControlSignal::zero(0.0, 3.0, 300);
        let tr = simulate(System::Damped, &d, n, eps, alpha, &v, 1).unwrap();
        for w in tr.energy.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        prop_assert!((tr.energy[0] - energy(System::Damped, &tr.initial, eps, alpha)).abs() <= 1e-14 * tr.energy[0]);
    }

    #[test]
    fn ingham_ratio_properties(
        coeffs in prop::collection::btree_map(prop_oneof![-12i64..=-1, 1i64..=12], cplx(), 1..6),
        c in cplx(),
        eps in 0.0f64..0.2,
        alpha in prop_oneof![Just(0.25), Just(0.75)],
    ) {
        prop_assume!(coeffs.values().any(|b| b.norm() > 1e-3) && c.norm() > 1e-3);
        let co: Vec<(i64, C64)> = coeffs.into_iter().collect();
        let t = 3.0 * core::f64::consts::PI;
        let g = ingham_ratio(&co, eps, alpha, t, 1.0).unwrap();
        let q = ingham_ratio_quadrature(&co, eps, alpha, t, 1.0, 240).unwrap();
        prop_assert!((g - q).abs() <= 1e-10 * g, "{} {}", g, q);
        let scaled: Vec<(i64, C64)> = co.iter().map(|&(n, b)| (n, b * c)).collect();
        prop_assert!((ingham_ratio(&scaled, eps, alpha, t, 1.0).unwrap() - g).abs() <= 1e-10 * g);
        let idx: Vec<i64> = co.iter().map(|p| p.0).collect();
        prop_assert!(ingham_infimum(&idx, eps, alpha, t, 1.0).unwrap() <= g * (1.0 + 1e-10));
    }

    #[test]
    fn exp_integral_is_continuous(re in -1e-3f64..1e-3, im in -1e-3f64..1e-3, h in 0.5f64..4.0) {
        let s = C64::new(re, im);
        let near = exp_integral(s, h);
        let direct = ((s * h).exp() - (-s * h).exp()) / s;
        if s.norm() > 1e-6 {
            prop_assert!((near - direct).norm() <= 1e-9 * near.norm());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn stacked_norm_respects_ceiling(coeffs in prop::collection::vec(cplx(), 8), beta in 0.0f64..2.0) {
        let ms: Vec<i64> = (-4..=4).filter(|&m| m != 0).collect();
        let fam = sinc_limit_family(&ms, core::f64::consts::PI / 256.0, 0.0).unwrap();
        let co: Vec<(i64, C64)> = ms.iter().copied().zip(coeffs).collect();
        prop_assume!(co.iter().any(|p| p.1.norm() > 1e-3));
        let r = stacked_norm_ratio(&fam, &co, beta).unwrap();
        prop_assert!(r <= stacked_norm_ceiling(&fam, &ms, beta).unwrap() * (1.0 + 1e-12));
    }
}
