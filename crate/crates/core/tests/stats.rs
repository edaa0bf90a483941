use std::f64::consts::PI;

use proptest::prelude::*;
use spikes_core::models::*;
use spikes_core::numerics::gof::{chi_square, ks_two_sample};
use spikes_core::pdmp::{run_exact, simulate_exact, ClickEvent, EventLog, Method, PdmpModel};
use spikes_core::rng::RngStream;
use spikes_core::stats::outcome::outcome_from_log;
use spikes_core::stats::*;
use spikes_core::Error;
use statrs::distribution::{DiscreteCDF, Poisson};

fn thermal(g: f64) -> PdmpModel {
    collapse_thermal(&ThermalParams::resetting(0.77, 0.23, g, 1.0)).unwrap()
}

fn log_with(pre: &[f64], x0: f64, t_end: f64) -> EventLog {
    let clicks = pre
        .iter()
        .enumerate()
        .map(|(i, &x)| ClickEvent { time: (i + 1) as f64 * t_end / (pre.len() + 1) as f64, channel: 0, pre_state: x, post_state: 0.0 })
        .collect();
    EventLog { initial_state: x0, t_end, clicks, method: Method::Exact, final_state: 0.0 }
}

fn outcome(tips: &[(f64, f64)], jump: Option<f64>) -> TrajectoryOutcome {
    TrajectoryOutcome {
        tips: tips.iter().map(|&(time, state)| Tip { time, state, side: Side::Spiking }).collect(),
        jump_time: jump,
        t_end: 1.0,
        initial_state: 0.0,
        clicks: tips.len() as u64,
    }
}

#[test]
fn prespike_extraction() {
    let m = thermal(1e3);
    assert!(extract_prespikes(&log_with(&[], 0.0, 1.0), &m, "N").unwrap().is_empty());
    let tips = extract_prespikes(&log_with(&[0.03, 0.4, 0.9], 0.0, 1.0), &m, "N").unwrap();
    assert_eq!(tips.iter().map(|t| t.1).collect::<Vec<_>>(), vec![0.03, 0.4, 0.9]);
    assert!(tips.windows(2).all(|w| w[0].0 < w[1].0));
    assert!(matches!(extract_prespikes(&log_with(&[0.1], 0.0, 1.0), &m, "N7"), Err(Error::Argument(_))));
}

#[test]
fn unitary_jump_detection() {
    let p = UnitaryParams::new(1.0, 1e4);
    let m = collapse_unitary(&p).unwrap();
    let tau = p.tau();
    let short = |gaps: &[f64]| {
        let mut t = 0.0;
        let clicks = gaps
            .iter()
            .map(|g| {
                t += g;
                ClickEvent { time: t, channel: 0, pre_state: m.flow(PI, *g).unwrap(), post_state: PI }
            })
            .collect();
        EventLog { initial_state: PI, t_end: t + 0.5 * tau, clicks, method: Method::Exact, final_state: PI }
    };
    assert_eq!(detect_jump(&short(&[0.5 * tau, 0.9 * tau, 0.1 * tau]), &m, 1e-2).unwrap(), None);
    let long = short(&[0.5 * tau, 3.0 * tau, 0.1 * tau]);
    let tj = detect_jump(&long, &m, 1e-2).unwrap().unwrap();
    assert!((tj - 1.5 * tau).abs() < 1e-12, "{tj} vs {}", 1.5 * tau);
    assert!(matches!(detect_jump(&long, &m, 0.0), Err(Error::Argument(_))));
}

#[test]
fn thermal_jump_detection_is_robust_to_eps() {
    let m = thermal(1e6);
    let n = 2000;
    let mut agree = 0;
    for i in 0..n {
        let log = simulate_exact(&m, 0.0, 0.5, RngStream::new(31, i)).unwrap();
        let a = detect_jump(&log, &m, 1e-2).unwrap();
        let b = detect_jump(&log, &m, 1e-3).unwrap();
        let same = match (a, b) {
            (None, None) => true,
            (Some(x), Some(y)) => (x - y).abs() < 1e-3,
            _ => false,
        };
        agree += same as u64;
    }
    assert!(agree as f64 >= 0.99 * n as f64, "{agree} of {n}");
}

#[test]
fn streamed_outcome_matches_the_log() {
    let m = thermal(1e4);
    for i in 0..50 {
        let log = simulate_exact(&m, 0.0, 0.3, RngStream::new(6, i)).unwrap();
        let from_log = outcome_from_log(&log, &m, TipRule::Reset { channel: 0 }, 1e-2).unwrap();
        let mut b = OutcomeBuilder::new(&m, 0.0, TipRule::Reset { channel: 0 }, 1e-2, TipFilter::ALL, StopRule::Never).unwrap();
        run_exact(&m, 0.0, 0.3, &mut RngStream::new(6, i).generator(), &mut b).unwrap();
        let streamed = b.finish().unwrap();
        assert_eq!(streamed.tips, from_log.tips);
        assert_eq!(streamed.jump_time, from_log.jump_time);
        assert_eq!(streamed.jump_time, detect_jump(&log, &m, 1e-2).unwrap());
    }
}

#[test]
fn conditioning_excludes_exactly_the_jumping_trajectories() {
    let m = thermal(1e4);
    let bx = SpaceTimeBox::new(0.0, 0.5, 0.01, 0.5).unwrap();
    let mut logs = Vec::new();
    let mut outs = Vec::new();
    for i in 0..300 {
        let log = simulate_exact(&m, 0.0, 0.5, RngStream::new(7, i)).unwrap();
        outs.push(outcome_from_log(&log, &m, TipRule::Reset { channel: 0 }, 1e-2).unwrap());
        logs.push(log);
    }
    let mut kept = 0;
    for (log, o) in logs.iter().zip(&outs) {
        let jumped = detect_jump(log, &m, 1e-2).unwrap().is_some_and(|t| t > bx.t0 && t < bx.t1);
        assert_eq!(bx.admits(o), !jumped);
        kept += bx.admits(o) as u64;
    }
    let s = conditioned_box_stats(&outs, &bx).unwrap();
    assert_eq!(s.n_traj_conditioned, kept);
    assert_eq!(s.n_traj_total, 300);
    assert!(kept > 0 && kept < 300);
}

#[test]
fn empty_box_and_empty_ensemble() {
    let o = outcome(&[(0.1, 0.2), (0.2, 0.3)], None);
    let empty = SpaceTimeBox::new(0.0, 1.0, 0.25, 0.25).unwrap();
    let s = conditioned_box_stats(&[o.clone(), o.clone()], &empty).unwrap();
    assert_eq!((s.mean, s.variance), (0.0, 0.0));
    let bx = SpaceTimeBox::new(0.0, 1.0, 0.0, 1.0).unwrap();
    let jumped = outcome(&[], Some(0.5));
    assert!(matches!(conditioned_box_stats(&[jumped], &bx), Err(Error::Statistics(_))));
    assert!(SpaceTimeBox::new(1.0, 1.0, 0.0, 1.0).is_err());
    assert!(SpaceTimeBox::new(0.0, 1.0, 0.5, 0.4).is_err());
}

#[test]
fn count_moments_against_direct_formulas() {
    let counts = [0u64, 1, 1, 2, 3, 5, 8, 0, 2, 2];
    let s = CountStats::from_counts(12, &counts).unwrap();
    let n = counts.len() as f64;
    let xs: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    assert!((s.mean - mean).abs() < 1e-12);
    assert!((s.variance - var).abs() < 1e-12);
    assert!((s.sem_mean - (var / n).sqrt()).abs() < 1e-12);
    assert!((s.dispersion - var / mean).abs() < 1e-12);
    assert_eq!((s.n_traj_total, s.n_traj_conditioned), (12, 10));
    assert!(s.sem_variance > 0.0 && s.sem_dispersion > 0.0);
    let (m, sm, v, sv) = s.per_time(0.5);
    assert_eq!((m, sm, v, sv), (2.0 * s.mean, 2.0 * s.sem_mean, 2.0 * s.variance, 2.0 * s.sem_variance));
}

#[test]
fn too_few_passages() {
    assert!(matches!(passage_stats(&[1.0; 99]), Err(Error::Statistics(_))));
    let times: Vec<f64> = (1..=200).map(|i| -(1.0 - i as f64 / 201.0f64).ln()).collect();
    let s = passage_stats(&times).unwrap();
    assert!((s.mean_jump_time - 1.0).abs() < 0.1);
    assert!(s.exp_fit_pvalue > 0.5);
}

#[test]
fn tip_heights_follow_the_inverse_square_density() {
    let m = thermal(1e5);
    let (a, b) = (0.01, 0.9);
    let mut heights = Vec::new();
    for i in 0..400 {
        let mut o = OutcomeBuilder::new(&m, 0.0, TipRule::Reset { channel: 0 }, 1e-2, TipFilter { lo: a, hi: b, t_max: 0.2 }, StopRule::JumpAfter(0.0)).unwrap();
        run_exact(&m, 0.0, 0.2, &mut RngStream::new(13, i).generator(), &mut o).unwrap();
        heights.extend(o.finish().unwrap().tips.iter().map(|t| t.state));
    }
    // equal-probability bins of the density ∝ 1/x² on (a, b)
    let k = 10;
    let inv = |u: f64| 1.0 / (1.0 / a - u * (1.0 / a - 1.0 / b));
    let edges: Vec<f64> = (0..=k).map(|i| inv(i as f64 / k as f64)).collect();
    let mut observed = vec![0.0; k];
    for h in &heights {
        let j = edges.partition_point(|e| e <= h).clamp(1, k) - 1;
        observed[j] += 1.0;
    }
    let expected = vec![heights.len() as f64 / k as f64; k];
    let (_, p) = chi_square(&observed, &expected, k - 1);
    assert!(heights.len() > 1000, "{} tips", heights.len());
    assert!(p > 0.01, "chi-square p = {p}, bins {observed:?}");
}

fn thermal_limit(a_min: f64) -> LimitSampler {
    LimitSampler::new(LimitSpec {
        jump_rate_01: 0.77,
        jump_rate_10: 0.23,
        intensity0: |x: f64| 0.77 / (x * x),
        intensity1: |x: f64| 0.23 / ((1.0 - x) * (1.0 - x)),
        a_min,
    })
    .unwrap()
}

#[test]
fn limit_sampler_rejects_a_zero_floor() {
    let r = LimitSampler::new(LimitSpec {
        jump_rate_01: 1.0,
        jump_rate_10: 1.0,
        intensity0: |x: f64| 1.0 / (x * x),
        intensity1: |x: f64| 1.0 / ((1.0 - x) * (1.0 - x)),
        a_min: 0.0,
    });
    assert!(matches!(r, Err(Error::Argument(_))));
}

#[test]
fn limit_sampler_without_spikes_is_a_telegraph_chain() {
    let s = LimitSampler::new(LimitSpec { jump_rate_01: 2.0, jump_rate_10: 1.0, intensity0: |_| 0.0, intensity1: |_| 0.0, a_min: 1e-3 })
        .unwrap();
    let sample = s.sample(5000.0, false, RngStream::new(1, 0));
    assert!(sample.spikes.is_empty());
    // alternating dwells: mean 1/2 at 0, mean 1 at 1
    let mut dwell = [Vec::new(), Vec::new()];
    let mut last = 0.0;
    for (i, &t) in sample.jump_times.iter().enumerate() {
        dwell[i % 2].push(t - last);
        last = t;
    }
    for (k, want) in [(0, 0.5), (1, 1.0)] {
        let v = &dwell[k];
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - want).abs() < 4.0 * want / (v.len() as f64).sqrt(), "state {k}: {mean}");
    }
    assert!(!sample.chain_state(0.0));
    assert!(sample.chain_state(sample.jump_times[0] + 1e-12));
}

#[test]
fn limit_box_counts_are_poisson() {
    let s = thermal_limit(1e-3);
    let (a, b, t) = (0.01, 0.1, 0.1);
    let lambda = 0.77 * (1.0 / a - 1.0 / b) * t;
    let mut counts = Vec::new();
    let mut i = 0;
    while counts.len() < 10_000 {
        let sm = s.sample(t, false, RngStream::new(41, i));
        i += 1;
        if sm.jump_times.is_empty() {
            counts.push(sm.spikes.iter().filter(|p| p.side == Side::Spiking && p.height > a && p.height < b).count() as u64);
        }
    }
    let pois = Poisson::new(lambda).unwrap();
    let lo = pois.inverse_cdf(0.005);
    let hi = pois.inverse_cdf(0.995);
    let mut observed = Vec::new();
    let mut expected = Vec::new();
    let n = counts.len() as f64;
    observed.push(counts.iter().filter(|&&c| c <= lo).count() as f64);
    expected.push(n * pois.cdf(lo));
    for k in lo + 1..hi {
        observed.push(counts.iter().filter(|&&c| c == k).count() as f64);
        expected.push(n * (pois.cdf(k) - pois.cdf(k - 1)));
    }
    observed.push(counts.iter().filter(|&&c| c >= hi).count() as f64);
    expected.push(n * (1.0 - pois.cdf(hi - 1)));
    let (_, p) = chi_square(&observed, &expected, observed.len() - 1);
    assert!(p > 0.01, "chi-square p = {p}");
}

#[test]
fn finite_gamma_counts_match_the_limit_process() {
    let m = thermal(1e6);
    let (a, b, t) = (0.01, 0.1, 0.1);
    let bx = SpaceTimeBox::new(0.0, t, a, b).unwrap();
    let mut sim = Vec::new();
    for i in 0..2000 {
        let mut o = OutcomeBuilder::new(&m, 0.0, TipRule::Reset { channel: 0 }, 1e-2, TipFilter { lo: a, hi: b, t_max: t }, StopRule::JumpAfter(0.0)).unwrap();
        run_exact(&m, 0.0, t, &mut RngStream::new(55, i).generator(), &mut o).unwrap();
        let o = o.finish().unwrap();
        if bx.admits(&o) {
            sim.push(box_count(&o, &bx, Side::Spiking) as f64);
        }
    }
    let s = thermal_limit(1e-3);
    let mut lim = Vec::new();
    let mut i = 0;
    while lim.len() < 5000 {
        let sm = s.sample(t, false, RngStream::new(56, i));
        i += 1;
        if sm.jump_times.is_empty() {
            lim.push(sm.spikes.iter().filter(|p| p.side == Side::Spiking && p.height > a && p.height < b).count() as f64);
        }
    }
    let ks = ks_two_sample(&sim, &lim);
    assert!(ks.p_value > 0.01, "KS D = {}, p = {}", ks.statistic, ks.p_value);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn box_counts_add_over_disjoint_edges(tips in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..60),
                                          a in 0.0f64..0.3, w1 in 0.01f64..0.3, w2 in 0.01f64..0.3) {
        let o = outcome(&tips, None);
        let m = a + w1;
        let b = m + w2;
        let whole = box_count(&o, &SpaceTimeBox::new(0.0, 1.0, a, b).unwrap(), Side::Spiking);
        let left = box_count(&o, &SpaceTimeBox::new(0.0, 1.0, a, m).unwrap(), Side::Spiking);
        let right = box_count(&o, &SpaceTimeBox::new(0.0, 1.0, m, b).unwrap(), Side::Spiking);
        let on_edge = tips.iter().filter(|t| t.1 == m).count() as u64;
        prop_assert_eq!(whole, left + right + on_edge);
    }

    #[test]
    fn mean_count_grows_with_the_upper_edge(ens in prop::collection::vec(prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 0..20), 1..20),
                                           a in 0.0f64..0.5, b1 in 0.0f64..0.5, db in 0.0f64..0.5) {
        let outs: Vec<_> = ens.iter().map(|t| outcome(t, None)).collect();
        let lo = conditioned_box_stats(&outs, &SpaceTimeBox::new(0.0, 1.0, a, a + b1).unwrap()).unwrap();
        let hi = conditioned_box_stats(&outs, &SpaceTimeBox::new(0.0, 1.0, a, a + b1 + db).unwrap()).unwrap();
        prop_assert!(hi.mean >= lo.mean);
        prop_assert!(lo.mean >= 0.0 && lo.n_traj_conditioned <= lo.n_traj_total);
    }
}
