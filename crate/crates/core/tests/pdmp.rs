use std::ops::ControlFlow;
use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;
use spikes_core::models::*;
use spikes_core::numerics::gof::ks_one_sample;
use spikes_core::pdmp::*;
use spikes_core::rng::RngStream;
use spikes_core::stats::{first_passage_stats, OutcomeBuilder, StopRule, TipFilter, TipRule};
use spikes_core::Error;

fn toy(c: f64) -> PdmpModel {
    let ch = PoissonChannel { label: "N".into(), rate: state_fn(move |_| c), jump_map: JumpMap::Reset(0.0) };
    PdmpModel::new("toy", state_fn(|_| 0.0), vec![ch], Domain { lo: -1.0, hi: 1.0 })
}

fn thermal(g: f64) -> PdmpModel {
    collapse_thermal(&ThermalParams::resetting(0.77, 0.23, g, 1.0)).unwrap()
}

fn zoo() -> Vec<PdmpModel> {
    let tg = ThermalParams {
        n_plus: Complex64::new(0.2f64.sqrt(), 0.0),
        n_minus: Complex64::new(0.4f64.sqrt(), 0.0),
        ..ThermalParams::resetting(0.77, 0.23, 1e4, 1.0)
    };
    let mp = MeasurementParams::emission(1e4, 0.33, 1.0, 0.33);
    vec![
        collapse_unitary(&UnitaryParams::new(1.0, 1e4)).unwrap(),
        thermal(1e4),
        collapse_thermal_general(&tg).unwrap(),
        collapse_measurement(&mp).unwrap(),
        collapse_measurement_general(&MeasurementParams { n_a: Complex64::new(0.6, 0.0), n_b: Complex64::new(0.0, 0.8), ..mp })
            .unwrap(),
        general_resetting(&spikes_core::models::general::example_exp(1e4)).unwrap(),
    ]
}

#[test]
fn constant_rate_survival_and_inverse() {
    let m = toy(3.0);
    assert_eq!(m.survival(0.2, 0.0).unwrap(), 1.0);
    for t in [0.1, 0.5, 2.0] {
        assert!((m.survival(0.2, t).unwrap() - (-3.0 * t).exp()).abs() < 1e-12);
    }
    let t = m.sample_click_time(0.2, (-1.0f64).exp()).unwrap();
    assert!((t - 1.0 / 3.0).abs() < 1e-10, "{t}");
    let t_small = m.sample_click_time(0.2, 1.0 - 1e-12).unwrap();
    assert!(t_small >= 0.0 && t_small < 1e-11);
    for u in [0.0, 1.0, -0.5, 2.0] {
        assert!(matches!(m.sample_click_time(0.2, u), Err(Error::Argument(_))));
    }
}

#[test]
fn argument_and_domain_errors() {
    let m = thermal(1e3);
    assert!(matches!(m.flow(0.1, -1.0), Err(Error::Argument(_))));
    assert!(matches!(m.flow(1.5, 0.1), Err(Error::Domain(_))));
    assert!(matches!(m.survival(-0.5, 0.1), Err(Error::Domain(_))));
}

#[test]
fn click_times_follow_the_survival_law() {
    let m = thermal(1e3);
    let mut rng = RngStream::new(3, 0).generator();
    use rand::Rng;
    for x0 in [0.0, 0.3, 0.9] {
        let samples: Vec<f64> =
            (0..100_000).map(|_| m.sample_click_time(x0, rng.random_range(1e-300..1.0)).unwrap()).collect();
        let ks = ks_one_sample(&samples, |t| 1.0 - m.survival(x0, t).unwrap());
        assert!(ks.p_value > 0.01, "x0={x0}: KS p = {}", ks.p_value);
    }
}

#[test]
fn zero_rate_euler_follows_the_flow() {
    let m = {
        let ch = PoissonChannel { label: "N".into(), rate: state_fn(|_| 0.0), jump_map: JumpMap::Reset(0.0) };
        PdmpModel::new("decay", state_fn(|x| -x), vec![ch], Domain { lo: 0.0, hi: 1.0 })
    };
    let dt = 1e-4;
    let log = simulate_euler(&m, 1.0, dt, 1.0, RngStream::new(0, 0)).unwrap();
    assert!(log.clicks.is_empty());
    assert!((log.final_state - (-1.0f64).exp()).abs() < dt);
    let log = simulate_exact(&m, 1.0, 1.0, RngStream::new(0, 0)).unwrap();
    assert!(log.clicks.is_empty() && (log.final_state - (-1.0f64).exp()).abs() < 1e-9);
}

#[test]
fn euler_rejects_oversized_steps() {
    let m = thermal(1e4);
    assert!(matches!(simulate_euler(&m, 0.0, 1e-3, 0.01, RngStream::new(0, 0)), Err(Error::StepSize(_))));
    assert!(matches!(simulate_euler(&m, 0.0, 0.0, 0.01, RngStream::new(0, 0)), Err(Error::Argument(_))));
}

#[test]
fn euler_and_exact_click_means_agree() {
    let m = thermal(1e3);
    let n = 4000u64;
    let t_end = 0.2;
    let counts = |euler: bool| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let s = RngStream::new(if euler { 11 } else { 12 }, i);
                let log = if euler { simulate_euler(&m, 0.0, 1e-5, t_end, s) } else { simulate_exact(&m, 0.0, t_end, s) };
                log.unwrap().clicks.len() as f64
            })
            .collect()
    };
    let stats = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
        (mean, (var / v.len() as f64).sqrt())
    };
    let (me, se) = stats(&counts(true));
    let (mx, sx) = stats(&counts(false));
    assert!((me - mx).abs() <= 3.0 * (se * se + sx * sx).sqrt(), "euler {me}±{se} exact {mx}±{sx}");
}

#[test]
fn unitary_first_passage_is_a_quarter() {
    let m = collapse_unitary(&UnitaryParams::new(1.0, 1e5)).unwrap();
    let outcomes: Vec<_> = (0..4000u64)
        .map(|i| {
            let mut rng = RngStream::new(21, i).generator();
            let filter = TipFilter { lo: 1.0, hi: 0.0, t_max: 0.0 };
            let mut b = OutcomeBuilder::new(&m, std::f64::consts::PI, TipRule::Reset { channel: 0 }, 1e-2, filter, StopRule::JumpAfter(0.0)).unwrap();
            run_exact(&m, std::f64::consts::PI, 50.0, &mut rng, &mut b).unwrap();
            b.finish().unwrap()
        })
        .collect();
    let s = first_passage_stats(&outcomes).unwrap();
    assert!((s.mean_jump_time - 0.25).abs() <= 3.0 * s.sem, "{} ± {}", s.mean_jump_time, s.sem);
    assert!(s.exp_fit_pvalue > 0.01);
}

#[test]
fn event_log_reconstructs_the_path() {
    for m in zoo() {
        let x0 = m.pointers.map_or(m.domain.lo, |p| p.spiking);
        let log = simulate_exact(&m, x0, 0.05, RngStream::new(5, 1)).unwrap();
        let mut prev = (0.0, x0);
        for ev in &log.clicks {
            let pre = m.flow(prev.1, ev.time - prev.0).unwrap();
            assert!((pre - ev.pre_state).abs() < 1e-9, "{}: {pre} vs {}", m.name, ev.pre_state);
            assert_eq!(log.state_at(&m, ev.time).unwrap(), m.flow(ev.post_state, 0.0).unwrap());
            prev = (ev.time, ev.post_state);
        }
        assert!((log.state_at(&m, log.t_end).unwrap() - log.final_state).abs() < 1e-9);
    }
}

#[test]
fn observer_can_stop_a_run() {
    let m = thermal(1e4);
    let mut seen = 0;
    let end = run_exact(&m, 0.0, 1.0, &mut RngStream::new(1, 1).generator(), &mut |_: &ClickEvent| {
        seen += 1;
        if seen == 3 {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })
    .unwrap();
    assert!(end.stopped_early);
    assert_eq!(end.clicks, 3);
}

#[test]
fn same_stream_same_log() {
    let m = thermal(1e4);
    let a = simulate_exact(&m, 0.0, 0.1, RngStream::new(8, 3)).unwrap();
    let b = simulate_exact(&m, 0.0, 0.1, RngStream::new(8, 3)).unwrap();
    let c = simulate_exact(&m, 0.0, 0.1, RngStream::new(8, 4)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.method, Method::Exact);
}

#[test]
fn channels_fire_in_proportion_to_their_rates() {
    // two constant channels: the split of clicks is binomial with p = 1/4
    let chans = vec![
        PoissonChannel { label: "a".into(), rate: state_fn(|_| 1.0), jump_map: JumpMap::Reset(0.0) },
        PoissonChannel { label: "b".into(), rate: state_fn(|_| 3.0), jump_map: JumpMap::Map(Arc::new(|x| x)) },
    ];
    let m = PdmpModel::new("pair", state_fn(|_| 0.0), chans, Domain { lo: -1.0, hi: 1.0 });
    let log = simulate_exact(&m, 0.0, 10_000.0, RngStream::new(4, 0)).unwrap();
    let n = log.clicks.len() as f64;
    let na = log.clicks.iter().filter(|c| c.channel == 0).count() as f64;
    assert!((n - 40_000.0).abs() < 4.0 * 200.0, "total {n}");
    assert!((na / n - 0.25).abs() < 4.0 * (0.25 * 0.75 / n).sqrt(), "fraction {}", na / n);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_runs_are_confined_and_clicks_valid(which in 0usize..6, seed in any::<u64>(), x in 0.0f64..1.0) {
        let m = &zoo()[which];
        let x0 = m.domain.lo + x * m.domain.width();
        let log = simulate_exact(m, x0, 0.02, RngStream::new(seed, 0)).unwrap();
        let mut last = 0.0;
        for ev in &log.clicks {
            prop_assert!(ev.time > last || (last == 0.0 && ev.time >= 0.0));
            prop_assert!(ev.time <= 0.02);
            last = ev.time;
            prop_assert!(m.domain.contains(ev.pre_state) && m.domain.contains(ev.post_state));
            prop_assert_eq!(ev.post_state.to_bits(), m.channels[ev.channel].jump_map.apply(ev.pre_state).to_bits());
        }
        prop_assert!(m.domain.contains(log.final_state));
    }

    #[test]
    fn euler_runs_stay_near_the_domain(which in 0usize..6, seed in any::<u64>()) {
        let m = &zoo()[which];
        let dt = (0.01 / sim::max_step_probability(m, 1.0)).min(1e-5);
        let x0 = m.pointers.map_or(m.domain.lo, |p| p.spiking);
        let log = simulate_euler(m, x0, dt, 0.01, RngStream::new(seed, 0)).unwrap();
        let sup_drift = (0..=256)
            .map(|i| (m.drift)(m.domain.lo + m.domain.width() * i as f64 / 256.0).abs())
            .fold(0.0, f64::max);
        let slack = 2.0 * sup_drift * dt;
        for ev in &log.clicks {
            prop_assert_eq!(ev.post_state.to_bits(), m.channels[ev.channel].jump_map.apply(ev.pre_state).to_bits());
            prop_assert!(ev.pre_state >= m.domain.lo - slack && ev.pre_state <= m.domain.hi + slack);
        }
        prop_assert!(log.final_state >= m.domain.lo - slack && log.final_state <= m.domain.hi + slack);
        prop_assert_eq!(log.method, Method::Euler);
    }
}
