//! Tracker surrogate: turns ground truth into noisy tracked objects.
//!
//! Besides white position noise, targets with similar speeds that are close
//! longitudinally are ambiguous for the radar. For such pairs two episode
//! kinds are scheduled: lateral bias (one object is drawn toward its
//! neighbor) and merge (both are reported as one object).

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flocking::FlockId;
use crate::geometry::Vec2;
use crate::scenario::{GroundTruthFrame, ScenarioConfig};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackedObject {
    pub id: FlockId,
    /// Ego frame, meters.
    pub position: Vec2,
    /// m/s, over ground, in ego axes.
    pub velocity: Vec2,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Standard deviation of the lateral position error (meters).
    pub lateral_sigma: f64,
    /// Standard deviation of the longitudinal position error (meters).
    pub longitudinal_sigma: f64,
    /// Correlation time of the position error (seconds). Zero gives white
    /// noise; otherwise the error is a first-order Gauss-Markov process with
    /// the sigmas above as its stationary standard deviations.
    pub correlation_time: f64,
    /// Bias episodes per second per ambiguous pair.
    pub bias_event_rate: f64,
    /// Meters the biased object is drawn toward its neighbor.
    pub bias_magnitude: f64,
    /// Seconds.
    pub bias_duration: f64,
    /// Probability per cycle that an ambiguous pair starts a merge.
    pub merge_probability_per_cycle: f64,
    /// Seconds.
    pub merge_duration: f64,
    /// Pairs whose speeds differ by more than this are never ambiguous (m/s).
    pub merge_speed_gate: f64,
    /// Pairs farther apart longitudinally than this are never ambiguous (m).
    pub merge_range_gate: f64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            lateral_sigma: 0.35,
            longitudinal_sigma: 0.5,
            correlation_time: 0.0,
            bias_event_rate: 0.8,
            bias_magnitude: 1.2,
            bias_duration: 2.0,
            merge_probability_per_cycle: 0.0,
            merge_duration: 1.0,
            merge_speed_gate: 2.5,
            merge_range_gate: 50.0,
        }
    }
}

impl NoiseModel {
    /// Ground truth passes through unchanged.
    pub fn noiseless() -> Self {
        Self {
            lateral_sigma: 0.0,
            longitudinal_sigma: 0.0,
            bias_event_rate: 0.0,
            bias_magnitude: 0.0,
            merge_probability_per_cycle: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("noise.lateral_sigma", self.lateral_sigma),
            ("noise.longitudinal_sigma", self.longitudinal_sigma),
            ("noise.correlation_time", self.correlation_time),
            ("noise.bias_event_rate", self.bias_event_rate),
            ("noise.bias_magnitude", self.bias_magnitude),
            ("noise.bias_duration", self.bias_duration),
            ("noise.merge_duration", self.merge_duration),
            ("noise.merge_speed_gate", self.merge_speed_gate),
            ("noise.merge_range_gate", self.merge_range_gate),
        ];
        for (field, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(field, "must be finite and non-negative"));
            }
        }
        if !(0.0..=1.0).contains(&self.merge_probability_per_cycle) {
            return Err(Error::invalid(
                "noise.merge_probability_per_cycle",
                "probability must lie in [0, 1]",
            ));
        }
        Ok(())
    }

    /// Whether two vehicles are close enough in speed and range to be confused.
    pub fn gated(&self, speed_a: f64, speed_b: f64, longitudinal_gap: f64) -> bool {
        (speed_a - speed_b).abs() <= self.merge_speed_gate
            && longitudinal_gap.abs() <= self.merge_range_gate
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EventKind {
    /// `shifted` is drawn laterally toward `toward`.
    Bias { shifted: FlockId, toward: FlockId },
    /// Both are reported as one object carrying `keep` (the lower id).
    Merge { keep: FlockId, absorbed: FlockId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SensorEvent {
    pub kind: EventKind,
    pub start_cycle: u64,
    pub duration_cycles: u64,
}

impl SensorEvent {
    pub fn active_at(&self, cycle: u64) -> bool {
        cycle >= self.start_cycle && cycle < self.start_cycle + self.duration_cycles
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EventTimeline {
    pub events: Vec<SensorEvent>,
}

impl EventTimeline {
    pub fn active_at(&self, cycle: u64) -> impl Iterator<Item = &SensorEvent> {
        self.events.iter().filter(move |e| e.active_at(cycle))
    }

    pub fn count_bias(&self) -> usize {
        self.events
            .iter()
            .filter(|e| matches!(e.kind, EventKind::Bias { .. }))
            .count()
    }

    pub fn count_merge(&self) -> usize {
        self.events.len() - self.count_bias()
    }
}

/// Draws bias and merge episodes cycle by cycle. An episode can only start
/// while its pair passes the speed and range gates; a pair has at most one
/// merge active at a time.
pub fn schedule_events<R: Rng + ?Sized>(
    model: &NoiseModel,
    scenario: &ScenarioConfig,
    cycle_duration: f64,
    rng: &mut R,
) -> EventTimeline {
    let cycles = scenario.cycles(cycle_duration);
    let bias_p = (model.bias_event_rate * cycle_duration).min(1.0);
    let bias_len = (model.bias_duration / cycle_duration).round().max(1.0) as u64;
    let merge_len = (model.merge_duration / cycle_duration).round().max(1.0) as u64;
    let mut events = Vec::new();
    if bias_p <= 0.0 && model.merge_probability_per_cycle <= 0.0 {
        return EventTimeline { events };
    }
    let targets = &scenario.targets;
    let mut merge_busy_until = vec![0u64; targets.len() * targets.len()];
    for cycle in 0..cycles {
        let t = cycle as f64 * cycle_duration;
        for i in 0..targets.len() {
            for j in (i + 1)..targets.len() {
                let (a, b) = (&targets[i], &targets[j]);
                let gap = scenario.station(a, t) - scenario.station(b, t);
                if !model.gated(a.speed, b.speed, gap) {
                    continue;
                }
                if rng.random::<f64>() < bias_p {
                    let (shifted, toward) = if rng.random::<bool>() { (a.id, b.id) } else { (b.id, a.id) };
                    events.push(SensorEvent {
                        kind: EventKind::Bias { shifted, toward },
                        start_cycle: cycle,
                        duration_cycles: bias_len,
                    });
                }
                let slot = i * targets.len() + j;
                if cycle >= merge_busy_until[slot] && rng.random::<f64>() < model.merge_probability_per_cycle {
                    events.push(SensorEvent {
                        kind: EventKind::Merge {
                            keep: a.id.min(b.id),
                            absorbed: a.id.max(b.id),
                        },
                        start_cycle: cycle,
                        duration_cycles: merge_len,
                    });
                    merge_busy_until[slot] = cycle + merge_len;
                }
            }
        }
    }
    EventTimeline { events }
}

fn normal(sigma: f64) -> Option<Normal<f64>> {
    (sigma > 0.0).then(|| Normal::new(0.0, sigma).expect("sigma is finite and positive"))
}

/// Turns ground-truth frames into tracked objects, one frame per cycle.
#[derive(Clone, Debug)]
pub struct Tracker<R> {
    model: NoiseModel,
    timeline: EventTimeline,
    /// Per-vehicle position error carried between cycles.
    errors: BTreeMap<FlockId, Vec2>,
    rng: R,
}

impl<R: Rng> Tracker<R> {
    pub fn new(model: NoiseModel, timeline: EventTimeline, rng: R) -> Self {
        Self {
            model,
            timeline,
            errors: BTreeMap::new(),
            rng,
        }
    }

    pub fn timeline(&self) -> &EventTimeline {
        &self.timeline
    }

    fn next_error(&mut self, id: FlockId, cycle_duration: f64) -> Vec2 {
        let m = &self.model;
        let (lon, lat) = (normal(m.longitudinal_sigma), normal(m.lateral_sigma));
        let mut draw = |d: &Option<Normal<f64>>| d.as_ref().map_or(0.0, |d| d.sample(&mut self.rng));
        let fresh = Vec2::new(draw(&lon), draw(&lat));
        let decay = if m.correlation_time > 0.0 {
            (-cycle_duration / m.correlation_time).exp()
        } else {
            0.0
        };
        let e = match self.errors.get(&id) {
            Some(&prev) => prev * decay + fresh * (1.0 - decay * decay).sqrt(),
            None => fresh,
        };
        self.errors.insert(id, e);
        e
    }

    /// Tracked objects for one frame, in ascending id order.
    pub fn observe(&mut self, frame: &GroundTruthFrame, cycle_duration: f64) -> Vec<TrackedObject> {
        let mut out = Vec::with_capacity(frame.vehicles.len());
        for v in &frame.vehicles {
            let mut p = v.pose.position + self.next_error(v.id, cycle_duration);
            let mut partners: Vec<FlockId> = self
                .timeline
                .active_at(frame.cycle)
                .filter_map(|e| match e.kind {
                    EventKind::Bias { shifted, toward } if shifted == v.id => Some(toward),
                    _ => None,
                })
                .collect();
            partners.sort_unstable();
            partners.dedup();
            for other in partners {
                if let Some(o) = frame.vehicle(other) {
                    let side = (o.pose.position.y - v.pose.position.y).signum();
                    p.y += side * self.model.bias_magnitude;
                }
            }
            out.push(TrackedObject {
                id: v.id,
                position: p,
                velocity: v.velocity,
            });
        }
        for e in self.timeline.active_at(frame.cycle) {
            if let EventKind::Merge { keep, absorbed } = e.kind {
                let a = out.iter().position(|t| t.id == keep);
                let b = out.iter().position(|t| t.id == absorbed);
                if let (Some(a), Some(b)) = (a, b) {
                    out[a].position = (out[a].position + out[b].position) * 0.5;
                    out[a].velocity = (out[a].velocity + out[b].velocity) * 0.5;
                    out.remove(b);
                }
            }
        }
        out.sort_by_key(|t| t.id);
        out
    }
}

/// Writes a tracked-object stream as `cycle,id,x,y,vx,vy`.
pub fn write_tracked_csv(path: &Path, stream: &[(u64, Vec<TrackedObject>)]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(out, "cycle,id,x,y,vx,vy").map_err(io)?;
    for (cycle, objects) in stream {
        for t in objects {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6}",
                cycle, t.id, t.position.x, t.position.y, t.velocity.x, t.velocity.y
            )
            .map_err(io)?;
        }
    }
    out.flush().map_err(io)
}
