use super::*;
use crate::rng::trial_rng;

fn inert(params: ReactionChannelParams) -> ReactionChannelParams {
    ReactionChannelParams {
        k_f: 0.0,
        k_b: 0.0,
        k_d: 0.0,
        ..params
    }
}

fn config(
    params: ReactionChannelParams,
    release: ReleaseMode,
    source: Vec3,
    horizon: f64,
) -> SimConfig {
    SimConfig {
        dt: 5e-8,
        horizon,
        seed: 11,
        release,
        release_start: 0.0,
        source,
        receiver: Receiver {
            center: [0.0; 3],
            params,
        },
        sample_times: vec![0.0, horizon / 2.0, horizon],
    }
}

#[test]
fn same_seed_same_series() {
    let cfg =
        SimConfig::sensor_validation(ReactionChannelParams::table1_ns(), 3e7, vec![2e-5, 5e-5]);
    assert_eq!(run_trial(&cfg).unwrap(), run_trial(&cfg).unwrap());
    let sim = Simulator::new(cfg).unwrap();
    assert_ne!(sim.run_trial(0).unwrap(), sim.run_trial(1).unwrap());
}

#[test]
fn no_secretion_no_signal() {
    let cfg =
        SimConfig::sensor_validation(ReactionChannelParams::table1_ns(), 0.0, vec![1e-5, 5e-5]);
    let sim = Simulator::new(cfg).unwrap();
    for i in 0..5 {
        assert!(sim.run_trial(i).unwrap().counts.iter().all(|&c| c == 0));
        assert!(sim.run_trial_reference(i).counts.iter().all(|&c| c == 0));
    }
}

#[test]
fn fast_degradation_empties_the_population() {
    let p = ReactionChannelParams {
        k_d: 1e12,
        ..ReactionChannelParams::table1_ns()
    };
    let sim = Simulator::new(config(
        p,
        ReleaseMode::Impulsive { count: 1000 },
        [5.0, 0.0, 0.0],
        1e-6,
    ))
    .unwrap();
    let mut rng = trial_rng(3, 0);
    let mut pop = sim.initial_population();
    for _ in 0..3 {
        sim.step(&mut pop, &mut rng);
    }
    assert!(pop.free.is_empty());
}

#[test]
fn step_conserves_molecules() {
    let mut cfg = config(
        ReactionChannelParams::table1_ns(),
        ReleaseMode::Continuous { rate: 1e9 },
        [0.7, 0.0, 0.0],
        1e-4,
    );
    cfg.seed = 5;
    let sim = Simulator::new(cfg).unwrap();
    let mut rng = trial_rng(5, 0);
    let mut pop = sim.initial_population();
    let mut total_bound = 0;
    for _ in 0..600 {
        let (free, bound) = (pop.free.len(), pop.bound_count());
        let c = sim.step(&mut pop, &mut rng);
        assert_eq!(
            pop.free.len() + c.degraded + c.bound,
            free + c.released + c.injected
        );
        assert_eq!(pop.bound_count() + c.released, bound + c.bound);
        total_bound += c.bound;
        let a = sim.config.receiver.params.receiver_radius;
        assert!(pop.free.iter().all(|x| norm(x) >= a));
    }
    assert!(total_bound > 0);
}

#[test]
fn bound_count_never_exceeds_capacity() {
    // 20 receptors covering 20 % of a sphere of radius 0.5
    let p = ReactionChannelParams {
        receptors: 20,
        receptor_radius: (0.2 * 4.0 * 0.25 / 20.0f64).sqrt(),
        k_b: 1e3,
        k_d: 0.0,
        ..ReactionChannelParams::table1_ns()
    };
    let sim = Simulator::new(config(
        p,
        ReleaseMode::Impulsive { count: 3000 },
        [0.55, 0.0, 0.0],
        2e-5,
    ))
    .unwrap();
    let mut rng = trial_rng(9, 0);
    let mut pop = sim.initial_population();
    let mut saturated = false;
    for _ in 0..400 {
        sim.step(&mut pop, &mut rng);
        assert!(pop.bound_count() <= 20);
        saturated |= pop.bound_count() == 20;
    }
    assert!(saturated);
    assert!(matches!(
        sim.run_trial(0),
        Err(SimError::CapacityExceeded { capacity: 20, .. })
    ));
}

#[test]
fn free_diffusion_variance() {
    let p = inert(ReactionChannelParams::table1_ns());
    let n = 50;
    let count = 4000;
    let start = [100.0, 0.0, 0.0];
    let sim = Simulator::new(config(p, ReleaseMode::Impulsive { count }, start, 1e-5)).unwrap();
    let mut rng = trial_rng(1, 0);
    let mut pop = sim.initial_population();
    for _ in 0..n {
        sim.step(&mut pop, &mut rng);
    }
    let disp: Vec<f64> = pop
        .free
        .iter()
        .flat_map(|x| [x[0] - start[0], x[1], x[2]])
        .collect();
    let m = disp.len() as f64;
    let var = disp.iter().map(|d| d * d).sum::<f64>() / m;
    let want = 2.0 * p.diffusion * n as f64 * 5e-8;
    let se = want * (2.0 / m).sqrt();
    assert!((var - want).abs() < 3.0 * se, "{var} vs {want}");
}

#[test]
fn degradation_is_exponential() {
    let p = ReactionChannelParams {
        k_d: 1e5,
        k_f: 0.0,
        ..ReactionChannelParams::table1_ns()
    };
    let count = 20000;
    let sim = Simulator::new(config(
        p,
        ReleaseMode::Impulsive { count },
        [50.0, 0.0, 0.0],
        1e-5,
    ))
    .unwrap();
    let mut rng = trial_rng(2, 0);
    let mut pop = sim.initial_population();
    for _ in 0..100 {
        sim.step(&mut pop, &mut rng);
    }
    let frac = pop.free.len() as f64 / count as f64;
    let want = (-1e5 * 100.0 * 5e-8f64).exp();
    let se = (want * (1.0 - want) / count as f64).sqrt();
    assert!((frac - want).abs() < 3.0 * se, "{frac} vs {want}");
}

#[test]
fn engines_agree_statistically() {
    let mut cfg = config(
        ReactionChannelParams::table1_ns(),
        ReleaseMode::Impulsive { count: 1500 },
        [0.7, 0.0, 0.0],
        2e-5,
    );
    cfg.sample_times = vec![5e-6, 2e-5];
    let sim = Simulator::new(cfg).unwrap();
    let trials = 60;
    for j in 0..2 {
        let fast: Vec<f64> = (0..trials)
            .map(|i| sim.run_trial(i).unwrap().counts[j] as f64)
            .collect();
        let slow: Vec<f64> = (0..trials)
            .map(|i| sim.run_trial_reference(1000 + i).counts[j] as f64)
            .collect();
        let stats = |v: &[f64]| {
            let m = v.iter().sum::<f64>() / v.len() as f64;
            let s2 = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64;
            (m, s2 / v.len() as f64)
        };
        let (mf, vf) = stats(&fast);
        let (ms, vs) = stats(&slow);
        assert!(mf > 5.0, "sample {j}: mean {mf}");
        assert!(
            (mf - ms).abs() < 3.5 * (vf + vs).sqrt(),
            "sample {j}: {mf} vs {ms}"
        );
    }
}

#[test]
fn oversized_step_is_rejected() {
    let mut cfg = SimConfig::sensor_validation(ReactionChannelParams::table1_ns(), 1.0, vec![1.0]);
    cfg.dt = 0.1;
    assert!(matches!(
        Simulator::new(cfg),
        Err(SimError::InvalidConfig(_))
    ));
}

#[test]
fn config_problems_are_all_listed() {
    let mut cfg =
        SimConfig::sensor_validation(ReactionChannelParams::table1_ns(), -1.0, vec![2e-4, 1e-4]);
    cfg.source = [1.2, 0.0, 0.0];
    assert_eq!(cfg.violations().len(), 3, "{:?}", cfg.violations());
}

#[test]
fn histogram_of_silent_ensemble_is_a_point_mass() {
    let cfg = SimConfig::sensor_validation(ReactionChannelParams::table1_ns(), 0.0, vec![1e-5]);
    let h = ensemble_histogram(&cfg, 100, 1e-5).unwrap();
    assert_eq!(h.pmf, vec![1.0]);
    assert_eq!(h.tv_distance(|k| if k == 0 { 1.0 } else { 0.0 }), 0.0);
    assert!(ensemble_histogram(&cfg, 99, 1e-5).is_err());
}

#[test]
fn histogram_mass_and_tv() {
    let h = Histogram::from_counts(&[0, 1, 1, 3]);
    assert_eq!(h.pmf, vec![0.25, 0.5, 0.0, 0.25]);
    assert!((h.pmf.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    assert_eq!(h.mean(), 1.25);
    // model puts everything on 1
    let tv = h.tv_distance(|k| if k == 1 { 1.0 } else { 0.0 });
    assert!((tv - 0.5).abs() < 1e-15);
}

#[test]
fn peak_counts_overlap() {
    let mut ev = vec![(0, 1), (5, -1), (5, 1), (3, 1), (9, -1), (9, -1)];
    assert_eq!(peak_occupancy(&mut ev), 3);
}
