//! Statistical and structural checks of sensing, lifecycle and experiment.

use boidplaus::experiment::{run_single, sweep, Simulation};
use boidplaus::lifecycle::{FlockManager, LifecycleConfig, StepParams};
use boidplaus::scenario::{build_default_scenario, Lane, RoadModel, ScenarioConfig, VehicleSpec};
use boidplaus::seed::{self, Stream};
use boidplaus::sensing::{schedule_events, NoiseModel, TrackedObject, Tracker};
use boidplaus::{RunConfig, Vec2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vehicle(id: u32, lane: Lane, speed: f64, offset: f64) -> VehicleSpec {
    VehicleSpec {
        id,
        lane,
        speed,
        initial_offset: offset,
        lateral_offset: 0.0,
    }
}

/// Two targets side by side at equal speed, so their pair is gated for the
/// whole run.
fn always_gated() -> ScenarioConfig {
    ScenarioConfig {
        duration: 60.0,
        road: RoadModel::all_straight(),
        ego: vehicle(0, Lane::Ego, 25.0, 0.0),
        targets: vec![vehicle(1, Lane::Ego, 25.0, 30.0), vehicle(2, Lane::Right, 25.0, 30.0)],
    }
}

#[test]
fn bias_episode_count_matches_rate() {
    let model = NoiseModel {
        bias_event_rate: 0.1,
        ..NoiseModel::default()
    };
    let sc = always_gated();
    let total: usize = (0..1000u64)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            schedule_events(&model, &sc, 0.08, &mut rng).count_bias()
        })
        .sum();
    let mean = total as f64 / 1000.0;
    assert!((5.5..=6.5).contains(&mean), "mean bias episodes {mean}");
}

fn lateral_errors(model: NoiseModel, cycles: u64) -> Vec<f64> {
    let mut sc = always_gated();
    sc.targets.truncate(1);
    let mut tracker = Tracker::new(model, Default::default(), ChaCha8Rng::seed_from_u64(9));
    (0..cycles)
        .map(|c| {
            let truth = sc.frame(c, 0.08);
            let t = tracker.observe(&truth, 0.08);
            t[0].position.y - truth.vehicles[0].pose.position.y
        })
        .collect()
}

fn mean_and_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[test]
fn white_noise_is_unbiased_with_configured_sigma() {
    let model = NoiseModel {
        bias_event_rate: 0.0,
        ..NoiseModel::default()
    };
    let errs = lateral_errors(model, 20_000);
    let (mean, std) = mean_and_std(&errs);
    let se = std / (errs.len() as f64).sqrt();
    assert!(mean.abs() <= 3.0 * se, "mean {mean}, standard error {se}");
    assert!((std - 0.35).abs() < 0.01, "std {std}");
}

#[test]
fn correlated_noise_keeps_its_stationary_sigma() {
    let model = NoiseModel {
        bias_event_rate: 0.0,
        correlation_time: 0.5,
        ..NoiseModel::default()
    };
    let errs = lateral_errors(model, 200_000);
    let (mean, std) = mean_and_std(&errs);
    assert!(mean.abs() < 0.02, "mean {mean}");
    assert!((std - 0.35).abs() < 0.02, "std {std}");
    // Lag-one autocorrelation of a first-order Gauss-Markov process.
    let lag1 = errs.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / errs.len() as f64 / (std * std);
    assert!((lag1 - (-0.08f64 / 0.5).exp()).abs() < 0.02, "lag-1 autocorrelation {lag1}");
}

#[test]
fn update_order_does_not_change_the_result() {
    let cfg = RunConfig::default();
    let lc = LifecycleConfig {
        spawn_interval: 0.0,
        ..cfg.lifecycle
    };
    let tracked: Vec<TrackedObject> = [(1, 0.0, 3.5), (2, 2.0, 0.0), (3, -1.0, -3.7)]
        .iter()
        .map(|&(id, x, y)| TrackedObject {
            id,
            position: Vec2::new(30.0 + x, y),
            velocity: Vec2::new(25.0, 0.0),
        })
        .collect();
    let mut m = FlockManager::new(seed::derive(&[7]));
    for _ in 0..lc.target_flock_size {
        m.sync_flocks(&tracked);
        m.spawn_boids(&lc);
    }
    let params = StepParams {
        weights: &cfg.weights,
        ellipse: &cfg.fov,
        policy: &cfg.reachability,
        lifecycle: &lc,
    };
    let mut forward = Vec::new();
    let mut backward = Vec::new();
    let ids = m.flock_ids();
    for &id in &ids {
        for i in 0..m.flock(id).unwrap().len() {
            forward.push(m.propose(id, i, &params));
        }
    }
    for &id in ids.iter().rev() {
        for i in (0..m.flock(id).unwrap().len()).rev() {
            backward.push(m.propose(id, i, &params));
        }
    }
    backward.reverse();
    assert_eq!(forward, backward);

    let mut stepped = m.clone();
    stepped.step_cycle(&params);
    let after: Vec<_> = ids
        .iter()
        .flat_map(|&id| stepped.flock(id).unwrap().boids.iter().map(|b| (b.position, b.velocity)))
        .collect();
    let expect: Vec<_> = forward.iter().map(|u| (u.position, u.velocity)).collect();
    assert_eq!(after, expect);
}

#[test]
fn flocks_never_exceed_their_size_and_never_outlive_leads() {
    let mut cfg = RunConfig::default();
    cfg.scenario.duration = 30.0;
    cfg.noise.merge_probability_per_cycle = 0.02;
    let mut sim = Simulation::new(&cfg, seed::run_seed(1, 0));
    let nb = cfg.lifecycle.target_flock_size;
    while !sim.is_finished() {
        sim.step(|state| {
            let live: Vec<u32> = state.tracked.iter().map(|t| t.id).collect();
            assert_eq!(state.manager.flock_ids(), live);
            assert!(state.manager.flocks().all(|f| f.len() <= nb));
        });
    }
    assert!(sim.timeline().count_merge() > 0);
}

#[test]
fn event_streams_do_not_depend_on_swarm_size() {
    let cfg = RunConfig::default();
    let sc = build_default_scenario();
    let run_seed = seed::run_seed(cfg.experiment.master_seed, 3);
    let timeline = |_: usize| {
        let mut rng = seed::stream(run_seed, Stream::Events, &[]);
        schedule_events(&cfg.noise, &sc, cfg.lifecycle.cycle_duration, &mut rng)
    };
    assert_eq!(timeline(3), timeline(14));
    let mut small = cfg.clone();
    small.scenario.duration = 5.0;
    small.lifecycle.target_flock_size = 3;
    let mut large = small.clone();
    large.lifecycle.target_flock_size = 14;
    let a = run_single(&small, 3);
    let b = run_single(&large, 3);
    assert_eq!(a.bias_events, b.bias_events);
}

#[test]
fn sweep_files_are_reproducible() {
    let mut cfg = RunConfig::default();
    cfg.experiment.runs = 3;
    cfg.experiment.sweep_nb = vec![2, 4];
    cfg.scenario.duration = 6.0;
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    sweep(&cfg, a.path()).unwrap();
    sweep(&cfg, b.path()).unwrap();
    let mut names: Vec<_> = std::fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names.len() >= 6, "{names:?}");
    for n in names {
        let x = std::fs::read(a.path().join(&n)).unwrap();
        let y = std::fs::read(b.path().join(&n)).unwrap();
        assert_eq!(x, y, "{n:?} differs");
    }
}
