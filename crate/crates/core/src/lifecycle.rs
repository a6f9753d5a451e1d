//! Flock bookkeeping: one flock per tracked object, boid spawning and
//! retirement, and the per-cycle update that ties rules and reachability
//! together.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dubins::{constrain_update, AdjustOutcome, ConstrainedUpdate, ReachabilityPolicy};
use crate::error::{Error, Result};
use crate::flocking::{
    evaluate_rules, velocity_update, Boid, BoidId, Flock, FlockId, LeadState, RuleWeights,
};
use crate::geometry::{FovEllipse, RigidTransform, Vec2};
use crate::seed::{self, Stream};
use crate::sensing::TrackedObject;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LifecycleConfig {
    /// Seconds per update cycle.
    pub cycle_duration: f64,
    /// Seconds between two spawns of the same flock.
    pub spawn_interval: f64,
    /// N_b
    pub target_flock_size: usize,
    /// Boids older than this many cycles are retired.
    pub max_boid_age: u32,
    /// Half-width of the uniform spawn jitter, per axis (meters).
    pub spawn_jitter: f64,
    pub velocity_unit: VelocityUnit,
}

/// Unit in which boid velocities are stored and steered.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VelocityUnit {
    /// Position update `p' = p + v'`.
    MetersPerCycle,
    /// Position update `p' = p + v'·Δt` with the cycle duration `Δt`.
    MetersPerSecond,
}

impl Default for LifecycleConfig {
    fn default() -> Self {
        Self {
            cycle_duration: 0.08,
            spawn_interval: 0.1,
            target_flock_size: 7,
            max_boid_age: 300,
            spawn_jitter: 0.2,
            velocity_unit: VelocityUnit::MetersPerSecond,
        }
    }
}

impl LifecycleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cycle_duration.is_finite() && self.cycle_duration > 0.0) {
            return Err(Error::invalid("lifecycle.cycle_duration", "must be positive"));
        }
        if !(self.spawn_interval.is_finite() && self.spawn_interval >= 0.0) {
            return Err(Error::invalid("lifecycle.spawn_interval", "must be non-negative"));
        }
        if self.target_flock_size < 1 {
            return Err(Error::invalid("lifecycle.target_flock_size", "N_b must be at least 1"));
        }
        if !(self.spawn_jitter.is_finite() && self.spawn_jitter >= 0.0) {
            return Err(Error::invalid("lifecycle.spawn_jitter", "must be non-negative"));
        }
        Ok(())
    }

    /// Seconds represented by one unit of stored velocity times one cycle,
    /// i.e. the factor turning a boid velocity into a per-cycle displacement.
    pub fn displacement_factor(&self) -> f64 {
        match self.velocity_unit {
            VelocityUnit::MetersPerCycle => 1.0,
            VelocityUnit::MetersPerSecond => self.cycle_duration,
        }
    }

    /// Cycle indices (relative to flock creation) at which a flock that is
    /// never depleted receives its boids.
    pub fn spawn_schedule(&self) -> Vec<u64> {
        let mut out = Vec::with_capacity(self.target_flock_size);
        let mut last: Option<u64> = None;
        let mut cycle = 0u64;
        while out.len() < self.target_flock_size {
            if spawn_due(last, cycle, self) {
                out.push(cycle);
                last = Some(cycle);
            }
            cycle += 1;
        }
        out
    }
}

fn spawn_due(last_spawn: Option<u64>, cycle: u64, cfg: &LifecycleConfig) -> bool {
    match last_spawn {
        None => true,
        Some(last) => (cycle - last) as f64 * cfg.cycle_duration >= cfg.spawn_interval - 1e-9,
    }
}

#[derive(Clone, Debug)]
struct FlockSlot {
    flock: Flock,
    lead: LeadState,
    last_spawn_cycle: Option<u64>,
    /// The flock was created this cycle and has no previous lead state yet.
    fresh: bool,
}

/// Counters of how the reachability filter treated proposals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FilterStats {
    pub accepted: u64,
    pub adjusted: u64,
    pub kept_previous: u64,
}

impl FilterStats {
    fn record(&mut self, outcome: AdjustOutcome) {
        match outcome {
            AdjustOutcome::Accepted => self.accepted += 1,
            AdjustOutcome::Adjusted => self.adjusted += 1,
            AdjustOutcome::KeptPrevious => self.kept_previous += 1,
        }
    }
}

/// Parameters consumed by [`FlockManager::step_cycle`].
#[derive(Clone, Copy, Debug)]
pub struct StepParams<'a> {
    pub weights: &'a RuleWeights,
    pub ellipse: &'a FovEllipse,
    pub policy: &'a ReachabilityPolicy,
    pub lifecycle: &'a LifecycleConfig,
}

#[derive(Clone, Debug)]
pub struct FlockManager {
    flocks: BTreeMap<FlockId, FlockSlot>,
    cycle: u64,
    next_boid_id: BoidId,
    seed: u64,
    stats: FilterStats,
}

impl FlockManager {
    /// `seed` keys every random draw made by this manager.
    pub fn new(seed: u64) -> Self {
        Self {
            flocks: BTreeMap::new(),
            cycle: 0,
            next_boid_id: 0,
            seed,
            stats: FilterStats::default(),
        }
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn filter_stats(&self) -> FilterStats {
        self.stats
    }

    pub fn flock(&self, id: FlockId) -> Option<&Flock> {
        self.flocks.get(&id).map(|s| &s.flock)
    }

    /// Flocks in ascending id order.
    pub fn flocks(&self) -> impl Iterator<Item = &Flock> {
        self.flocks.values().map(|s| &s.flock)
    }

    pub fn flock_ids(&self) -> Vec<FlockId> {
        self.flocks.keys().copied().collect()
    }

    pub fn lead(&self, id: FlockId) -> Option<LeadState> {
        self.flocks.get(&id).map(|s| s.lead)
    }

    pub fn total_boids(&self) -> usize {
        self.flocks.values().map(|s| s.flock.len()).sum()
    }

    /// Re-expresses all stored state in a new ego frame.
    pub fn apply_ego_motion(&mut self, transform: &RigidTransform) {
        let map_lead = |l: LeadState| LeadState {
            position: transform.apply_point(l.position),
            velocity: transform.apply_vector(l.velocity),
        };
        for slot in self.flocks.values_mut() {
            for b in &mut slot.flock.boids {
                b.position = transform.apply_point(b.position);
                b.velocity = transform.apply_vector(b.velocity);
            }
            slot.lead = map_lead(slot.lead);
            slot.flock.lead_snapshot = map_lead(slot.flock.lead_snapshot);
        }
    }

    /// Creates flocks for new tracks, drops flocks whose lead vanished and
    /// rolls the lead snapshot of surviving flocks.
    pub fn sync_flocks(&mut self, tracked: &[TrackedObject]) {
        self.flocks
            .retain(|id, _| tracked.iter().any(|t| t.id == *id));
        for t in tracked {
            let lead = LeadState {
                position: t.position,
                velocity: t.velocity,
            };
            match self.flocks.get_mut(&t.id) {
                Some(slot) => {
                    slot.flock.lead_snapshot = slot.lead;
                    slot.lead = lead;
                    slot.fresh = false;
                }
                None => {
                    self.flocks.insert(
                        t.id,
                        FlockSlot {
                            flock: Flock::new(t.id, lead),
                            lead,
                            last_spawn_cycle: None,
                            fresh: true,
                        },
                    );
                }
            }
        }
    }

    /// Adds at most one boid per flock, initialized from the previous-cycle
    /// lead state: velocity converted to m/cycle, position advanced by that
    /// velocity to the current cycle, plus jitter.
    pub fn spawn_boids(&mut self, cfg: &LifecycleConfig) {
        let cycle = self.cycle;
        for slot in self.flocks.values_mut() {
            if slot.flock.len() >= cfg.target_flock_size
                || !spawn_due(slot.last_spawn_cycle, cycle, cfg)
            {
                continue;
            }
            let id = self.next_boid_id;
            self.next_boid_id += 1;
            let mut rng = seed::stream(self.seed, Stream::Spawn, &[slot.flock.flock_id as u64, id]);
            let j = cfg.spawn_jitter;
            let jitter = if j > 0.0 {
                Vec2::new(rng.random_range(-j..=j), rng.random_range(-j..=j))
            } else {
                Vec2::ZERO
            };
            let lead = slot.flock.lead_snapshot;
            let h = cfg.displacement_factor();
            let velocity = lead.velocity * (cfg.cycle_duration / h);
            let position = if slot.fresh {
                lead.position
            } else {
                lead.position + velocity * h
            };
            slot.flock.boids.push(Boid::new(id, position + jitter, velocity));
            slot.last_spawn_cycle = Some(cycle);
        }
    }

    /// Proposed and filtered update of one boid, computed from the current
    /// state without modifying it.
    pub fn propose(&self, flock_id: FlockId, boid_index: usize, p: &StepParams<'_>) -> ConstrainedUpdate {
        let slot = &self.flocks[&flock_id];
        let boid = &slot.flock.boids[boid_index];
        let foreign = self
            .flocks
            .iter()
            .filter(|(id, _)| **id != flock_id)
            .map(|(_, s)| &s.flock);
        // The filter works on per-cycle displacements.
        let h = p.lifecycle.displacement_factor();
        let lead = LeadState {
            position: slot.lead.position,
            velocity: slot.lead.velocity * (p.lifecycle.cycle_duration / h),
        };
        let rules = evaluate_rules(boid, &slot.flock.boids, &lead, foreign, p.ellipse, p.weights);
        let proposed = velocity_update(boid, &rules, p.weights);
        let speed = boid.velocity.x.max(0.0) * h / p.lifecycle.cycle_duration;
        let radius = p.policy.turn_radius(speed);
        let mut rng = seed::stream(
            self.seed,
            Stream::Boid,
            &[flock_id as u64, boid.id, self.cycle],
        );
        let mut update = constrain_update(
            boid.position,
            boid.velocity * h,
            proposed * h,
            radius,
            p.policy,
            &mut rng,
        );
        update.velocity = update.velocity / h;
        update
    }

    /// One update of every boid against the frozen start-of-cycle state,
    /// followed by aging and retirement. Advances the cycle counter.
    pub fn step_cycle(&mut self, p: &StepParams<'_>) {
        let updates: Vec<(FlockId, Vec<ConstrainedUpdate>)> = self
            .flocks
            .iter()
            .map(|(&id, slot)| {
                let ups = (0..slot.flock.len()).map(|i| self.propose(id, i, p)).collect();
                (id, ups)
            })
            .collect();
        for (id, ups) in updates {
            let slot = self.flocks.get_mut(&id).expect("flock exists");
            for (b, u) in slot.flock.boids.iter_mut().zip(ups) {
                self.stats.record(u.outcome);
                b.position = u.position;
                b.velocity = u.velocity;
                b.age_cycles += 1;
            }
            slot.flock
                .boids
                .retain(|b| b.age_cycles <= p.lifecycle.max_boid_age);
        }
        self.cycle += 1;
    }
}
