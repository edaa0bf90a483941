use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;
use spikes_core::models::bloch::{bloch_model, state_from_angle};
use spikes_core::models::general::{example_chi, example_cos, example_exp};
use spikes_core::models::unitary::angle_drift;
use spikes_core::models::*;
use spikes_core::numerics::roots;
use spikes_core::pdmp::{simulate_exact, PdmpModel};
use spikes_core::rng::RngStream;
use spikes_core::Error;

fn rk4(f: impl Fn(f64) -> f64, x0: f64, t: f64, steps: usize) -> f64 {
    let h = t / steps as f64;
    let mut x = x0;
    for _ in 0..steps {
        let k1 = f(x);
        let k2 = f(x + 0.5 * h * k1);
        let k3 = f(x + 0.5 * h * k2);
        let k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    x
}

fn thermal_p() -> ThermalParams {
    ThermalParams::resetting(0.77, 0.23, 1e3, 1.0)
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn thermal_flow_matches_rk4_at_one_millisecond() {
    let m = collapse_thermal(&thermal_p()).unwrap();
    let reference = rk4(|q| (m.drift)(q), 0.0, 1e-3, 20_000);
    assert!((m.flow(0.0, 1e-3).unwrap() - reference).abs() < 1e-8);
}

#[test]
fn numeric_flow_of_general_examples_matches_rk4() {
    for p in [example_cos(1e3), example_exp(1e3)] {
        let m = general_resetting(&p).unwrap();
        for &q0 in &[0.0, 0.2, 0.6, 0.95] {
            for &t in &[1e-4, 1e-3, 5e-3] {
                let reference = rk4(|q| (m.drift)(q), q0, t, 20_000);
                let got = m.flow(q0, t).unwrap();
                assert!((got - reference).abs() < 1e-8, "{}: q0={q0} t={t}: {got} vs {reference}", m.name);
            }
        }
    }
}

#[test]
fn unitary_reaches_zero_at_tau() {
    let p = UnitaryParams::new(1.0, 1e4);
    let m = collapse_unitary(&p).unwrap();
    assert_eq!(m.flow(PI, 0.0).unwrap(), PI);
    assert!(m.flow(PI, p.tau()).unwrap().abs() < 1e-8);
    assert!((m.time_to_level(0.0).unwrap() - p.tau()).abs() < 1e-12 * p.tau());
    assert!((p.theta_star() + (4.0 * (1.0f64 / 1e4).sqrt()).asin()).abs() < 1e-15);
}

#[test]
fn unitary_jump_map_resets_to_pi() {
    let m = collapse_unitary(&UnitaryParams::new(1.0, 1e4)).unwrap();
    for i in 0..20 {
        let th = m.domain.lo + m.domain.width() * i as f64 / 19.0;
        assert_eq!(m.channels[0].jump_map.apply(th), PI);
    }
}

#[test]
fn zeno_rotation_without_measurement() {
    let k = 3.0;
    let f = angle_drift(k, 0.0);
    for i in 0..50 {
        let th = -PI + 2.0 * PI * i as f64 / 49.0;
        assert_eq!(f(th), -2.0 * k);
    }
    // uniform rotation: RK4 of the drift is exact up to round-off
    assert!((rk4(&f, 1.0, 0.2, 100) - (1.0 - 2.0 * k * 0.2)).abs() < 1e-13);
}

fn level_self_consistency(m: &PdmpModel, lo: f64, hi: f64) {
    for i in 0..20 {
        let c = lo + (hi - lo) * (i as f64 + 0.5) / 20.0;
        let t = m.time_to_level(c).unwrap();
        let x = m.flow(m.pointers.unwrap().spiking, t).unwrap();
        assert!((x - c).abs() < 1e-8, "{}: level {c}: flow {x}", m.name);
    }
}

#[test]
fn level_times_land_on_the_level() {
    let up = UnitaryParams::new(1.0, 1e4);
    level_self_consistency(&collapse_unitary(&up).unwrap(), 0.0, PI - 1e-3);
    level_self_consistency(&collapse_thermal(&ThermalParams::resetting(0.77, 0.23, 1e6, 1.0)).unwrap(), 1e-4, 0.99);
    level_self_consistency(&collapse_measurement(&MeasurementParams::emission(1e4, 1.0, 1.0, 0.7)).unwrap(), 1e-3, 0.99);
    let gp = example_cos(1e4);
    level_self_consistency(&general_resetting(&gp).unwrap(), 1e-3, 0.9);
}

#[test]
fn thermal_level_time_matches_bisection_on_the_flow() {
    let m = collapse_thermal(&ThermalParams::resetting(0.77, 0.23, 1e6, 1.0)).unwrap();
    let closed = m.time_to_level(0.5).unwrap();
    let bisected = roots::bisect(|t| m.flow(0.0, t).unwrap() - 0.5, 0.0, 1e-2, 1e-16).unwrap();
    assert!(((closed - bisected) / bisected).abs() < 1e-10, "{closed} vs {bisected}");
}

#[test]
fn unreachable_level_is_a_domain_error() {
    let m = collapse_thermal(&thermal_p()).unwrap();
    assert!(matches!(m.time_to_level(1.0), Err(Error::Domain(_))));
}

#[test]
fn measurement_lower_root_and_absorbing_top() {
    let p = MeasurementParams::emission(1e4, 1.0, 1.0, 0.7);
    let qm = p.q_minus();
    assert!((qm - 1.0 * (0.7 - 1.0) / (0.7 + 1e4)).abs() < 1e-18);
    assert!(p.omega(qm).abs() < 1e-10);
    let m = collapse_measurement(&p).unwrap();
    for ch in &m.channels {
        assert_eq!((ch.rate)(1.0), 0.0);
    }
    assert!((p.f_general(0.0) - 1.0 * (1.0 - 0.7)).abs() < 1e-15);
}

#[test]
fn thermal_classification_examples() {
    assert_eq!(classify_resetting(c(0.0, 0.0), c(1.0, 0.0)).unwrap(), ResetKind::ResetToMinus);
    assert_eq!(classify_resetting(c(1.0, 0.0), c(0.0, 0.0)).unwrap(), ResetKind::ResetToPlus);
    assert_eq!(classify_resetting(c(0.3, 0.0), c(0.0, 0.9)).unwrap(), ResetKind::NotResetting);
    assert!(matches!(classify_resetting(c(0.0, 0.0), c(0.0, 0.0)), Err(Error::Argument(_))));
}

fn logs_identical(a: &PdmpModel, b: &PdmpModel, x0: f64, t_end: f64, seeds: u64) {
    for i in 0..seeds {
        let la = simulate_exact(a, x0, t_end, RngStream::new(9, i)).unwrap();
        let lb = simulate_exact(b, x0, t_end, RngStream::new(9, i)).unwrap();
        assert_eq!(la, lb, "{} vs {} seed {i}", a.name, b.name);
    }
}

#[test]
fn general_variants_reduce_to_the_resetting_ones() {
    let tp = ThermalParams::resetting(0.77, 0.23, 1e4, 1.0);
    let tg = ThermalParams { n_plus: c(0.0, 0.0), n_minus: c(0.0, 1.0), ..tp };
    logs_identical(&collapse_thermal(&tp).unwrap(), &collapse_thermal_general(&tg).unwrap(), 0.0, 0.5, 20);

    let mp = MeasurementParams::emission(1e4, 0.5, 1.0, 0.6);
    let mg = MeasurementParams { n_a: c(0.0, 1.0), n_b: c(0.0, 0.0), ..mp };
    logs_identical(&collapse_measurement(&mp).unwrap(), &collapse_measurement_general(&mg).unwrap(), 0.0, 0.5, 20);
}

#[test]
fn riccati_forms_approach_the_resetting_ones() {
    let tp = ThermalParams::resetting(0.77, 0.23, 1e4, 1.0);
    let tg = ThermalParams { n_plus: c(1e-7, 0.0), ..tp };
    let (a, b) = (collapse_thermal(&tp).unwrap(), collapse_thermal_general(&tg).unwrap());
    for q in [0.0, 0.3, 0.9] {
        for t in [1e-4, 1e-2, 1.0] {
            let q = q * a.domain.hi;
            assert!((a.flow(q, t).unwrap() - b.flow(q, t).unwrap()).abs() < 1e-8);
            assert!((a.log_survival(q, t).unwrap() - b.log_survival(q, t).unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn balanced_thermal_entries_are_deterministic() {
    let p = ThermalParams { n_plus: c(0.5, 0.0), n_minus: c(0.0, 0.5), ..thermal_p() };
    let m = collapse_thermal_general(&p).unwrap();
    for i in 0..=10 {
        let q = i as f64 / 10.0;
        assert!((m.channels[0].jump_map.apply(q) - q).abs() < 1e-15);
    }
    let log = simulate_exact(&m, 0.0, 0.2, RngStream::new(1, 0)).unwrap();
    assert!(log.clicks.iter().all(|ev| (ev.pre_state - ev.post_state).abs() < 1e-15));
    let want = m.flow(0.0, 0.2).unwrap();
    assert!((log.final_state - want).abs() < 1e-9, "{} vs {want}", log.final_state);
}

#[test]
fn zero_drift_general_model_never_leaves_zero() {
    let p = GeneralParams::new("F=0", |_| 0.0, example_chi, 1e4);
    let m = general_resetting(&p).unwrap();
    let log = simulate_exact(&m, 0.0, 0.1, RngStream::new(2, 0)).unwrap();
    assert!(!log.clicks.is_empty());
    assert!(log.clicks.iter().all(|ev| ev.pre_state == 0.0 && ev.post_state == 0.0));
    assert_eq!(log.final_state, 0.0);
}

#[test]
fn bloch_purity_is_kept() {
    let dt = 1e-5;
    for eta in [1.0, 0.7, 0.33] {
        let m = collapse_unitary_bloch_full(&UnitaryParams { omega: 1.0, gamma: 1e3, eta }).unwrap();
        for seed in 0..4 {
            let mut rng = RngStream::new(seed, 0).generator();
            let mut worst_hi = 0.0f64;
            let mut worst_lo = 0.0f64;
            m.run_euler(state_from_angle(PI), dt, 1.0, &mut rng, |_, s| {
                let r2 = purity(s);
                worst_hi = worst_hi.max(r2 - 1.0);
                worst_lo = worst_lo.max(1.0 - r2);
            }, |_| {})
            .unwrap();
            assert!(worst_hi <= 10.0 * dt, "eta={eta}: r^2 - 1 reached {worst_hi}");
            if eta == 1.0 {
                assert!(worst_lo <= 10.0 * dt, "pure state lost purity by {worst_lo}");
            }
        }
    }
}

#[test]
fn bloch_q_is_a_martingale_without_drive() {
    let m = bloch_model(0.0, 10.0, 0.6);
    let q0 = 0.4;
    let n = 10_000u64;
    let checkpoints = [0.25, 0.5, 1.0];
    let mut sums = [0.0f64; 3];
    let mut sq = [0.0f64; 3];
    for i in 0..n {
        let mut rng = RngStream::new(77, i).generator();
        let mut k = 0;
        let dt = 1e-3;
        m.run_euler([q0, 0.0, 0.0], dt, 1.0, &mut rng, |t, s| {
            if k < 3 && (t + dt - checkpoints[k]).abs() < 0.5 * dt {
                sums[k] += s[0];
                sq[k] += s[0] * s[0];
                k += 1;
            }
        }, |_| {})
        .unwrap();
        assert_eq!(k, 3);
    }
    for k in 0..3 {
        let mean = sums[k] / n as f64;
        let sem = ((sq[k] / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - q0).abs() <= 3.0 * sem + 1e-3, "t={}: mean {mean} sem {sem}", checkpoints[k]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn thermal_roots_are_fixed_points(wmp in 0.0f64..5.0, wpm in 0.0f64..5.0, lge in 0.0f64..7.0, eta in 0.05f64..1.0) {
        prop_assume!(wmp + wpm > 0.0);
        let p = ThermalParams::resetting(wmp, wpm, 10f64.powf(lge) / eta, eta);
        let (qm, qp) = p.q_roots();
        prop_assert!(p.omega(qm).abs() < 1e-10 * (1.0 + p.gamma_eta()), "omega(q-) = {}", p.omega(qm));
        prop_assert!(p.omega(qp).abs() < 1e-10 * (1.0 + p.gamma_eta()), "omega(q+) = {}", p.omega(qp));
    }

    #[test]
    fn measurement_root_is_a_fixed_point(lg in 0.0f64..7.0, eta1 in 0.05f64..1.0, g2 in 0.0f64..5.0, eta2 in 0.0f64..1.0) {
        let p = MeasurementParams::emission(10f64.powf(lg), eta1, g2, eta2);
        prop_assert!(p.omega(p.q_minus()).abs() < 1e-10 * (1.0 + p.gamma1));
    }

    #[test]
    fn survival_is_a_nonincreasing_probability(which in 0usize..4, x in 0.0f64..1.0, t1 in 0.0f64..0.05, dt in 0.0f64..0.05) {
        let m = match which {
            0 => collapse_unitary(&UnitaryParams::new(1.0, 1e4)).unwrap(),
            1 => collapse_thermal(&thermal_p()).unwrap(),
            2 => collapse_measurement(&MeasurementParams::emission(1e3, 0.33, 1.0, 0.33)).unwrap(),
            _ => collapse_thermal_general(&ThermalParams { n_plus: c(0.2f64.sqrt(), 0.0), n_minus: c(0.4f64.sqrt(), 0.0), ..thermal_p() }).unwrap(),
        };
        let x0 = m.domain.lo + x * m.domain.width();
        let s1 = m.survival(x0, t1).unwrap();
        let s2 = m.survival(x0, t1 + dt).unwrap();
        prop_assert!((0.0..=1.0).contains(&s1) && (0.0..=1.0).contains(&s2));
        prop_assert!(s2 <= s1 + 1e-15, "{s2} > {s1}");
        prop_assert_eq!(m.survival(x0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn flows_stay_in_the_domain(which in 0usize..3, x in 0.0f64..1.0, t in 0.0f64..10.0) {
        let m = match which {
            0 => collapse_unitary(&UnitaryParams::new(1.0, 1e4)).unwrap(),
            1 => collapse_thermal(&thermal_p()).unwrap(),
            _ => collapse_measurement(&MeasurementParams::emission(1e3, 0.33, 1.0, 0.33)).unwrap(),
        };
        let y = m.flow(m.domain.lo + x * m.domain.width(), t).unwrap();
        prop_assert!(m.domain.contains(y), "{y} outside");
    }
}

#[test]
fn rates_are_non_negative_on_the_domain() {
    let models = [
        collapse_unitary(&UnitaryParams::new(1.0, 1e4)).unwrap(),
        collapse_thermal(&thermal_p()).unwrap(),
        collapse_measurement(&MeasurementParams::emission(1e3, 0.33, 1.0, 0.33)).unwrap(),
        collapse_measurement_general(&MeasurementParams { n_a: c(0.6, 0.0), n_b: c(0.0, 0.8), ..MeasurementParams::emission(1e3, 0.33, 1.0, 0.33) }).unwrap(),
        general_resetting(&example_cos(1e3)).unwrap(),
    ];
    let mut rng = RngStream::new(0, 0).generator();
    for m in &models {
        for _ in 0..1000 {
            let x = m.domain.lo + m.domain.width() * rng.random::<f64>();
            for ch in &m.channels {
                assert!((ch.rate)(x) >= 0.0, "{} {} at {x}", m.name, ch.label);
                assert!(m.domain.contains(ch.jump_map.apply(x)), "{} jump image of {x}", m.name);
            }
        }
    }
}
