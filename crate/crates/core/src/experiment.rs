//! Scenario runs: one simulation per seed, Monte-Carlo batches and N_b sweeps.

use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::flocking::Flock;
use crate::geometry::{Pose, RigidTransform};
use crate::lifecycle::{FilterStats, FlockManager, StepParams};
use crate::metrics::{self, CycleView, Pair, SeparationSample, Source, SummaryRow};
use crate::scenario::GroundTruthFrame;
use crate::seed::{self, Stream};
use crate::sensing::{schedule_events, EventTimeline, TrackedObject, Tracker};

/// What a cycle looks like after sensing and spawning, before the boids move.
pub struct CycleState<'a> {
    pub truth: &'a GroundTruthFrame,
    pub tracked: &'a [TrackedObject],
    pub manager: &'a FlockManager,
}

/// A single scenario run driven cycle by cycle.
pub struct Simulation<'a> {
    cfg: &'a RunConfig,
    run_seed: u64,
    tracker: Tracker<ChaCha8Rng>,
    manager: FlockManager,
    prev_ego: Option<Pose>,
    cycle: u64,
    cycles: u64,
}

impl<'a> Simulation<'a> {
    pub fn new(cfg: &'a RunConfig, run_seed: u64) -> Self {
        let dt = cfg.lifecycle.cycle_duration;
        let mut events_rng = seed::stream(run_seed, Stream::Events, &[]);
        let timeline = schedule_events(&cfg.noise, &cfg.scenario, dt, &mut events_rng);
        Self {
            cfg,
            run_seed,
            tracker: Tracker::new(cfg.noise, timeline, seed::stream(run_seed, Stream::Sensing, &[])),
            manager: FlockManager::new(run_seed),
            prev_ego: None,
            cycle: 0,
            cycles: cfg.scenario.cycles(dt),
        }
    }

    pub fn run_seed(&self) -> u64 {
        self.run_seed
    }

    pub fn timeline(&self) -> &EventTimeline {
        self.tracker.timeline()
    }

    pub fn manager(&self) -> &FlockManager {
        &self.manager
    }

    pub fn is_finished(&self) -> bool {
        self.cycle >= self.cycles
    }

    /// Advances one cycle. `inspect` sees the state between spawning and the
    /// boid update, which is when separations are sampled.
    pub fn step(&mut self, mut inspect: impl FnMut(&CycleState<'_>)) {
        let cfg = self.cfg;
        let dt = cfg.lifecycle.cycle_duration;
        let truth = cfg.scenario.frame(self.cycle, dt);
        let tracked = self.tracker.observe(&truth, dt);
        if let Some(prev) = self.prev_ego {
            self.manager
                .apply_ego_motion(&RigidTransform::between(prev, truth.ego_pose));
        }
        self.prev_ego = Some(truth.ego_pose);
        self.manager.sync_flocks(&tracked);
        self.manager.spawn_boids(&cfg.lifecycle);
        inspect(&CycleState {
            truth: &truth,
            tracked: &tracked,
            manager: &self.manager,
        });
        self.manager.step_cycle(&StepParams {
            weights: &cfg.weights,
            ellipse: &cfg.fov,
            policy: &cfg.reachability,
            lifecycle: &cfg.lifecycle,
        });
        self.cycle += 1;
    }
}

/// Separation samples of one cycle for every pair and source.
pub fn cycle_samples(state: &CycleState<'_>, cfg: &RunConfig, run_seed: u64, out: &mut Vec<SeparationSample>) {
    let flocks: Vec<&Flock> = state.manager.flocks().collect();
    let view = CycleView {
        truth: state.truth,
        tracked: state.tracked,
        flocks: &flocks,
    };
    for pair in Pair::ALL {
        for source in Source::ALL {
            if let Some(value) = metrics::sample_separation(&view, pair, source, &cfg.metrics) {
                out.push(SeparationSample {
                    run_seed,
                    cycle: state.truth.cycle,
                    pair,
                    source,
                    value,
                });
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub run_index: u64,
    pub run_seed: u64,
    pub samples: Vec<SeparationSample>,
    pub filter_stats: FilterStats,
    pub bias_events: usize,
    pub merge_events: usize,
}

pub fn run_single(cfg: &RunConfig, run_index: u64) -> RunOutput {
    let run_seed = seed::run_seed(cfg.experiment.master_seed, run_index);
    let mut sim = Simulation::new(cfg, run_seed);
    let mut samples = Vec::new();
    while !sim.is_finished() {
        sim.step(|state| cycle_samples(state, cfg, run_seed, &mut samples));
    }
    RunOutput {
        run_index,
        run_seed,
        samples,
        filter_stats: sim.manager().filter_stats(),
        bias_events: sim.timeline().count_bias(),
        merge_events: sim.timeline().count_merge(),
    }
}

/// Ground-truth and tracked samples of one run without simulating any boids.
/// Used to calibrate the noise model, whose output does not depend on the
/// swarm.
pub fn run_tracker_only(cfg: &RunConfig, run_index: u64) -> Vec<SeparationSample> {
    let run_seed = seed::run_seed(cfg.experiment.master_seed, run_index);
    let dt = cfg.lifecycle.cycle_duration;
    let mut events_rng = seed::stream(run_seed, Stream::Events, &[]);
    let timeline = schedule_events(&cfg.noise, &cfg.scenario, dt, &mut events_rng);
    let mut tracker = Tracker::new(cfg.noise, timeline, seed::stream(run_seed, Stream::Sensing, &[]));
    let mut out = Vec::new();
    for cycle in 0..cfg.scenario.cycles(dt) {
        let truth = cfg.scenario.frame(cycle, dt);
        let tracked = tracker.observe(&truth, dt);
        let view = CycleView {
            truth: &truth,
            tracked: &tracked,
            flocks: &[],
        };
        for pair in Pair::ALL {
            for source in [Source::Tracked, Source::GroundTruth] {
                if let Some(value) = metrics::sample_separation(&view, pair, source, &cfg.metrics) {
                    out.push(SeparationSample {
                        run_seed,
                        cycle,
                        pair,
                        source,
                        value,
                    });
                }
            }
        }
    }
    out
}

/// All runs of one configuration, in run-index order regardless of which
/// thread finished first.
pub fn run_monte_carlo(cfg: &RunConfig) -> Vec<RunOutput> {
    (0..cfg.experiment.runs as u64)
        .into_par_iter()
        .map(|i| run_single(cfg, i))
        .collect()
}

#[derive(Clone, Debug)]
pub struct BatchResult {
    pub nb: usize,
    pub rows: Vec<SummaryRow>,
    pub warnings: Vec<String>,
    pub filter_stats: FilterStats,
}

impl BatchResult {
    pub fn row(&self, pair: Pair, source: Source) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.pair == pair && r.source == source)
    }
}

fn pooled(runs: &[RunOutput]) -> (Vec<SeparationSample>, FilterStats) {
    let mut stats = FilterStats::default();
    let mut samples = Vec::new();
    for r in runs {
        samples.extend_from_slice(&r.samples);
        stats.accepted += r.filter_stats.accepted;
        stats.adjusted += r.filter_stats.adjusted;
        stats.kept_previous += r.filter_stats.kept_previous;
    }
    (samples, stats)
}

/// Runs the Monte-Carlo batch for the configured N_b and summarizes it
/// without writing anything.
pub fn evaluate(cfg: &RunConfig) -> BatchResult {
    let runs = run_monte_carlo(cfg);
    let (samples, filter_stats) = pooled(&runs);
    let nb = cfg.lifecycle.target_flock_size;
    let (rows, warnings) = metrics::summarize_pooled(&samples, nb);
    BatchResult {
        nb,
        rows,
        warnings,
        filter_stats,
    }
}

/// Runs the batch and writes samples, summaries and the effective config
/// into `out_dir`.
pub fn simulate(cfg: &RunConfig, out_dir: &Path) -> Result<BatchResult> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    cfg.write(&out_dir.join("config.toml"))?;
    let runs = run_monte_carlo(cfg);
    let (samples, filter_stats) = pooled(&runs);
    let nb = cfg.lifecycle.target_flock_size;
    let (rows, warnings) = metrics::export(out_dir, nb, &samples)?;
    Ok(BatchResult {
        nb,
        rows,
        warnings,
        filter_stats,
    })
}

/// One batch per N_b in `cfg.experiment.sweep_nb`, all sharing the master
/// seed so that the tracker sees identical noise in every batch.
pub fn sweep(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<BatchResult>> {
    cfg.validate()?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    cfg.write(&out_dir.join("config.toml"))?;
    let mut results = Vec::new();
    for &nb in &cfg.experiment.sweep_nb {
        let mut c = cfg.clone();
        c.lifecycle.target_flock_size = nb;
        let runs = run_monte_carlo(&c);
        let (samples, filter_stats) = pooled(&runs);
        let (rows, warnings) = metrics::export(out_dir, nb, &samples)?;
        results.push(BatchResult {
            nb,
            rows,
            warnings,
            filter_stats,
        });
    }
    let all: Vec<SummaryRow> = results.iter().flat_map(|r| r.rows.iter().cloned()).collect();
    metrics::write_summary_csv(&out_dir.join("comparison.csv"), &comparison_order(&all))?;
    Ok(results)
}

/// Rows grouped by pair and source, N_b ascending within a group.
pub fn comparison_order(rows: &[SummaryRow]) -> Vec<SummaryRow> {
    let mut v = rows.to_vec();
    v.sort_by_key(|r| (r.pair, r.source, r.nb));
    v
}
