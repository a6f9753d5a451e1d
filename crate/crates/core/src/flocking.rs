//! Boid and flock state together with the steering rules.
//!
//! Boid velocities are stored in meters per cycle so that a position update is
//! a plain vector addition. Every rule is evaluated in the ISO 8855 frame of the
//! ego vehicle; the per-axis weights therefore act longitudinally (`x`) and
//! laterally (`y`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ellipse_contains, heading_of, FovEllipse, Vec2};

pub type BoidId = u64;
pub type FlockId = u32;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Boid {
    pub id: BoidId,
    pub position: Vec2,
    /// Meters per cycle.
    pub velocity: Vec2,
    pub age_cycles: u32,
}

impl Boid {
    pub fn new(id: BoidId, position: Vec2, velocity: Vec2) -> Self {
        Self {
            id,
            position,
            velocity,
            age_cycles: 0,
        }
    }

    pub fn heading(&self) -> f64 {
        heading_of(self.velocity)
    }
}

/// Lead vehicle state as reported by the tracker (velocity in m/s).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LeadState {
    pub position: Vec2,
    pub velocity: Vec2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Flock {
    /// Equal to the id of the tracked object leading this flock.
    pub flock_id: FlockId,
    pub boids: Vec<Boid>,
    /// Lead state of the previous cycle.
    pub lead_snapshot: LeadState,
}

impl Flock {
    pub fn new(flock_id: FlockId, lead: LeadState) -> Self {
        Self {
            flock_id,
            boids: Vec::new(),
            lead_snapshot: lead,
        }
    }

    pub fn len(&self) -> usize {
        self.boids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boids.is_empty()
    }

    /// Mean boid position, `None` for an empty flock.
    pub fn center(&self) -> Option<Vec2> {
        Vec2::mean(self.boids.iter().map(|b| b.position))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RuleWeights {
    /// w_sep
    pub separation: Vec2,
    /// w_coh
    pub cohesion: Vec2,
    /// w_cohl
    pub leader_cohesion: Vec2,
    /// w_ali
    pub alignment: Vec2,
    /// g_rep, meters.
    pub repulsion_gain: f64,
    /// Counts the lead as one more visible member when averaging velocities
    /// for the alignment rule. Without it nothing damps the flock's lateral
    /// oscillation about its lead.
    pub align_with_lead: bool,
    pub repulsion_distance: RepulsionDistance,
}

/// Distance fed into the repulsion exponential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RepulsionDistance {
    /// Full planar distance to the foreign center. Repulsion fades as soon as
    /// the flocks are a few meters apart longitudinally.
    Euclidean,
    /// Lateral distance only, so flocks keep pushing apart for as long as they
    /// see each other.
    #[default]
    Lateral,
}

impl Default for RuleWeights {
    fn default() -> Self {
        Self {
            separation: Vec2::new(0.15, 0.07),
            cohesion: Vec2::new(0.4, 0.4),
            leader_cohesion: Vec2::new(0.4, 0.2),
            alignment: Vec2::new(0.3, 0.3),
            repulsion_gain: 1.5,
            align_with_lead: true,
            repulsion_distance: RepulsionDistance::default(),
        }
    }
}

impl RuleWeights {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("weights.separation", self.separation),
            ("weights.cohesion", self.cohesion),
            ("weights.leader_cohesion", self.leader_cohesion),
            ("weights.alignment", self.alignment),
        ];
        for (field, w) in named {
            if !(w.is_finite() && w.x >= 0.0 && w.y >= 0.0) {
                return Err(Error::invalid(field, "weights must be finite and non-negative"));
            }
        }
        if !(self.repulsion_gain.is_finite() && self.repulsion_gain > 0.0) {
            return Err(Error::invalid(
                "weights.repulsion_gain",
                "g_rep must be finite and positive",
            ));
        }
        Ok(())
    }
}

/// Perceived centers of the foreign flocks visible to one boid, one per flock.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct NeighborFlockCenters {
    pub centers: Vec<Vec2>,
}

impl NeighborFlockCenters {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Raw (unweighted) rule outputs for one boid; `repulsion` is already weighted.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RuleOutputs {
    pub cohesion: Vec2,
    pub leader_cohesion: Vec2,
    pub alignment: Vec2,
    pub separation: Vec2,
    pub repulsion: Vec2,
}

/// Peers of `observer` inside its field of view. The observer itself is
/// excluded by id.
pub fn visible_set(observer: &Boid, own_flock: &[Boid], ellipse: &FovEllipse) -> Vec<Boid> {
    let heading = observer.heading();
    own_flock
        .iter()
        .filter(|b| b.id != observer.id)
        .filter(|b| ellipse_contains(observer.position, heading, ellipse, b.position))
        .copied()
        .collect()
}

/// Σ (p_i − p_j): points away from the visible neighbors.
pub fn rule_separation(observer: &Boid, visible: &[Boid]) -> Vec2 {
    visible
        .iter()
        .fold(Vec2::ZERO, |acc, b| acc + (observer.position - b.position))
}

pub fn rule_cohesion(observer: &Boid, visible: &[Boid]) -> Vec2 {
    match Vec2::mean(visible.iter().map(|b| b.position)) {
        Some(center) => center - observer.position,
        None => Vec2::ZERO,
    }
}

pub fn rule_leader_cohesion(observer: &Boid, lead_position: Vec2) -> Vec2 {
    lead_position - observer.position
}

pub fn rule_alignment(observer: &Boid, visible: &[Boid]) -> Vec2 {
    match Vec2::mean(visible.iter().map(|b| b.velocity)) {
        Some(mean) => mean - observer.velocity,
        None => Vec2::ZERO,
    }
}

/// Alignment where the lead's velocity is averaged in as one more member, so
/// a lone boid still aligns with its lead.
pub fn rule_alignment_with_lead(observer: &Boid, visible: &[Boid], lead_velocity: Vec2) -> Vec2 {
    let sum = visible.iter().fold(lead_velocity, |acc, b| acc + b.velocity);
    sum / (visible.len() + 1) as f64 - observer.velocity
}

/// For every foreign flock with at least one member inside the observer's
/// field of view, the mean position of those visible members.
pub fn neighbor_flock_centers<'a, I>(
    observer: &Boid,
    foreign_flocks: I,
    ellipse: &FovEllipse,
) -> NeighborFlockCenters
where
    I: IntoIterator<Item = &'a Flock>,
{
    let heading = observer.heading();
    let centers = foreign_flocks
        .into_iter()
        .filter_map(|flock| {
            Vec2::mean(
                flock
                    .boids
                    .iter()
                    .map(|b| b.position)
                    .filter(|&p| ellipse_contains(observer.position, heading, ellipse, p)),
            )
        })
        .collect();
    NeighborFlockCenters { centers }
}

fn sgn(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Lateral push away from each perceived foreign center with magnitude
/// `exp(g_rep − d)`, `d` measured per `metric`; the longitudinal component is
/// always zero.
pub fn rule_flock_repulsion(
    observer: &Boid,
    centers: &NeighborFlockCenters,
    g_rep: f64,
    metric: RepulsionDistance,
) -> Vec2 {
    let lateral: f64 = centers
        .centers
        .iter()
        .map(|&c| {
            let side = sgn(observer.position.y - c.y);
            let d = match metric {
                RepulsionDistance::Euclidean => observer.position.distance(c),
                RepulsionDistance::Lateral => (observer.position.y - c.y).abs(),
            };
            side * (g_rep - d).exp()
        })
        .sum();
    Vec2::new(0.0, lateral)
}

/// v′ = v + w_coh⊙R_coh + w_cohl⊙R_cohl + w_ali⊙R_ali + w_sep⊙R_sep + R_rep.
pub fn velocity_update(observer: &Boid, rules: &RuleOutputs, weights: &RuleWeights) -> Vec2 {
    observer.velocity
        + weights.cohesion.hadamard(rules.cohesion)
        + weights.leader_cohesion.hadamard(rules.leader_cohesion)
        + weights.alignment.hadamard(rules.alignment)
        + weights.separation.hadamard(rules.separation)
        + rules.repulsion
}

pub fn position_update(observer: &Boid, new_velocity: Vec2) -> Vec2 {
    observer.position + new_velocity
}

/// Evaluates all five rules for one boid against a frozen snapshot.
pub fn evaluate_rules<'a, I>(
    observer: &Boid,
    own_flock: &[Boid],
    lead: &LeadState,
    foreign_flocks: I,
    ellipse: &FovEllipse,
    weights: &RuleWeights,
) -> RuleOutputs
where
    I: IntoIterator<Item = &'a Flock>,
{
    let visible = visible_set(observer, own_flock, ellipse);
    let centers = neighbor_flock_centers(observer, foreign_flocks, ellipse);
    RuleOutputs {
        cohesion: rule_cohesion(observer, &visible),
        leader_cohesion: rule_leader_cohesion(observer, lead.position),
        alignment: if weights.align_with_lead {
            rule_alignment_with_lead(observer, &visible, lead.velocity)
        } else {
            rule_alignment(observer, &visible)
        },
        separation: rule_separation(observer, &visible),
        repulsion: rule_flock_repulsion(observer, &centers, weights.repulsion_gain, weights.repulsion_distance),
    }
}
