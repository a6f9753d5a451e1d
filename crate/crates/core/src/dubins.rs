//! Dubins shortest paths and the reachability filter applied to boid updates.
//!
//! Word solutions follow the usual normalized formulation: positions are
//! scaled by the turn radius, the start is rotated so that the target lies on
//! the `+x` axis, and each word is solved in closed form.

use std::f64::consts::TAU;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Pose, Vec2};

/// Angles within this distance of a full turn are treated as no turn at all.
const ANGLE_SNAP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DubinsWord {
    LSL,
    RSR,
    LSR,
    RSL,
    RLR,
    LRL,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SegmentKind {
    Left,
    Straight,
    Right,
}

impl DubinsWord {
    /// Fixed evaluation order, also used to break ties.
    pub const ALL: [DubinsWord; 6] = [
        DubinsWord::LSL,
        DubinsWord::RSR,
        DubinsWord::LSR,
        DubinsWord::RSL,
        DubinsWord::RLR,
        DubinsWord::LRL,
    ];

    pub fn segments(self) -> [SegmentKind; 3] {
        use SegmentKind::*;
        match self {
            DubinsWord::LSL => [Left, Straight, Left],
            DubinsWord::RSR => [Right, Straight, Right],
            DubinsWord::LSR => [Left, Straight, Right],
            DubinsWord::RSL => [Right, Straight, Left],
            DubinsWord::RLR => [Right, Left, Right],
            DubinsWord::LRL => [Left, Right, Left],
        }
    }
}

impl fmt::Display for DubinsWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DubinsPath {
    pub start: Pose,
    pub word: DubinsWord,
    /// Length of each segment in meters.
    pub segment_lengths: [f64; 3],
    pub radius: f64,
    pub total_length: f64,
}

fn mod2pi(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    if a >= TAU - ANGLE_SNAP {
        0.0
    } else {
        a
    }
}

/// Normalized problem: start at the origin with heading `alpha`, target at
/// `(d, 0)` with heading `beta`, unit radius.
struct Normalized {
    alpha: f64,
    beta: f64,
    d: f64,
    sa: f64,
    sb: f64,
    ca: f64,
    cb: f64,
    c_ab: f64,
}

impl Normalized {
    fn new(start: Pose, target: Pose, radius: f64) -> Self {
        let delta = target.position - start.position;
        let d = delta.norm() / radius;
        let theta = if d > 0.0 { mod2pi(delta.y.atan2(delta.x)) } else { 0.0 };
        let alpha = mod2pi(start.heading - theta);
        let beta = mod2pi(target.heading - theta);
        Self {
            alpha,
            beta,
            d,
            sa: alpha.sin(),
            sb: beta.sin(),
            ca: alpha.cos(),
            cb: beta.cos(),
            c_ab: (alpha - beta).cos(),
        }
    }

    /// Normalized segment parameters `(t, p, q)` of one word, if it exists.
    fn solve(&self, word: DubinsWord) -> Option<[f64; 3]> {
        let Normalized {
            alpha,
            beta,
            d,
            sa,
            sb,
            ca,
            cb,
            c_ab,
        } = *self;
        let d_sq = d * d;
        match word {
            DubinsWord::LSL => {
                let p_sq = 2.0 + d_sq - 2.0 * c_ab + 2.0 * d * (sa - sb);
                if p_sq < 0.0 {
                    return None;
                }
                let tmp = (cb - ca).atan2(d + sa - sb);
                Some([mod2pi(tmp - alpha), p_sq.sqrt(), mod2pi(beta - tmp)])
            }
            DubinsWord::RSR => {
                let p_sq = 2.0 + d_sq - 2.0 * c_ab + 2.0 * d * (sb - sa);
                if p_sq < 0.0 {
                    return None;
                }
                let tmp = (ca - cb).atan2(d - sa + sb);
                Some([mod2pi(alpha - tmp), p_sq.sqrt(), mod2pi(tmp - beta)])
            }
            DubinsWord::LSR => {
                let p_sq = -2.0 + d_sq + 2.0 * c_ab + 2.0 * d * (sa + sb);
                if p_sq < 0.0 {
                    return None;
                }
                let p = p_sq.sqrt();
                let tmp = (-ca - cb).atan2(d + sa + sb) - (-2.0f64).atan2(p);
                Some([mod2pi(tmp - alpha), p, mod2pi(tmp - beta)])
            }
            DubinsWord::RSL => {
                let p_sq = -2.0 + d_sq + 2.0 * c_ab - 2.0 * d * (sa + sb);
                if p_sq < 0.0 {
                    return None;
                }
                let p = p_sq.sqrt();
                let tmp = (ca + cb).atan2(d - sa - sb) - 2.0f64.atan2(p);
                Some([mod2pi(alpha - tmp), p, mod2pi(beta - tmp)])
            }
            DubinsWord::RLR => {
                let tmp = (6.0 - d_sq + 2.0 * c_ab + 2.0 * d * (sa - sb)) / 8.0;
                if tmp.abs() > 1.0 {
                    return None;
                }
                let phi = (ca - cb).atan2(d - sa + sb);
                let p = mod2pi(TAU - tmp.acos());
                let t = mod2pi(alpha - phi + mod2pi(p / 2.0));
                Some([t, p, mod2pi(alpha - beta - t + p)])
            }
            DubinsWord::LRL => {
                let tmp = (6.0 - d_sq + 2.0 * c_ab + 2.0 * d * (sb - sa)) / 8.0;
                if tmp.abs() > 1.0 {
                    return None;
                }
                let phi = (ca - cb).atan2(d + sa - sb);
                let p = mod2pi(TAU - tmp.acos());
                let t = mod2pi(-alpha - phi + p / 2.0);
                Some([t, p, mod2pi(beta - alpha - t + p)])
            }
        }
    }
}

impl DubinsPath {
    /// Path of the given word, or `None` when the word has no solution.
    pub fn for_word(start: Pose, target: Pose, radius: f64, word: DubinsWord) -> Option<Self> {
        let params = Normalized::new(start, target, radius).solve(word)?;
        let segment_lengths = params.map(|v| v * radius);
        Some(Self {
            start,
            word,
            segment_lengths,
            radius,
            total_length: segment_lengths.iter().sum(),
        })
    }

    /// Pose reached after travelling `distance` meters along the path
    /// (clamped to the path).
    pub fn sample(&self, distance: f64) -> Pose {
        let mut remaining = distance.clamp(0.0, self.total_length);
        let mut pos = self.start.position;
        let mut heading = self.start.heading;
        for (kind, &len) in self.word.segments().iter().zip(&self.segment_lengths) {
            let step = remaining.min(len);
            (pos, heading) = advance(pos, heading, *kind, step, self.radius);
            remaining -= step;
            if remaining <= 0.0 {
                break;
            }
        }
        Pose::from_parts(pos, heading)
    }

    pub fn endpoint(&self) -> Pose {
        self.sample(self.total_length)
    }

    /// Poses spaced at most `step` meters apart, including both endpoints.
    pub fn sample_many(&self, step: f64) -> Vec<Pose> {
        let step = if step > 0.0 { step } else { self.total_length.max(1.0) };
        let n = (self.total_length / step).ceil() as usize;
        let mut out: Vec<Pose> = (0..n).map(|i| self.sample(i as f64 * step)).collect();
        out.push(self.endpoint());
        out
    }
}

fn advance(pos: Vec2, heading: f64, kind: SegmentKind, len: f64, radius: f64) -> (Vec2, f64) {
    match kind {
        SegmentKind::Straight => (pos + Vec2::from_heading(heading) * len, heading),
        SegmentKind::Left | SegmentKind::Right => {
            let side = if kind == SegmentKind::Left { 1.0 } else { -1.0 };
            let center = pos + Vec2::from_heading(heading).rotated(side * std::f64::consts::FRAC_PI_2) * radius;
            let turn = side * len / radius;
            let new_pos = center + (pos - center).rotated(turn);
            (new_pos, heading + turn)
        }
    }
}

/// Every word that has a solution, in the fixed word order.
pub fn candidate_paths(start: Pose, target: Pose, radius: f64) -> Vec<DubinsPath> {
    DubinsWord::ALL
        .iter()
        .filter_map(|&w| DubinsPath::for_word(start, target, radius, w))
        .collect()
}

/// Minimum-length Dubins path; ties keep the earlier word in
/// [`DubinsWord::ALL`]. Coincident poses give a zero-length path.
pub fn shortest_dubins_path(start: Pose, target: Pose, radius: f64) -> DubinsPath {
    debug_assert!(radius > 0.0);
    let coincident = start.position.distance(target.position) <= 1e-12 * radius
        && normalize_angle(target.heading - start.heading).abs() <= ANGLE_SNAP;
    if coincident {
        return DubinsPath {
            start,
            word: DubinsWord::LSL,
            segment_lengths: [0.0; 3],
            radius,
            total_length: 0.0,
        };
    }
    let mut best: Option<DubinsPath> = None;
    for path in candidate_paths(start, target, radius) {
        if best.is_none_or(|b| path.total_length < b.total_length) {
            best = Some(path);
        }
    }
    // LSL and RSR always have a solution for distinct poses.
    best.expect("at least one Dubins word is feasible")
}

/// `r_min = v² / a_lat,max`, floored at `radius_floor`.
pub fn min_turn_radius(speed: f64, max_lateral_accel: f64, radius_floor: f64) -> Result<f64> {
    if !(max_lateral_accel.is_finite() && max_lateral_accel > 0.0) {
        return Err(Error::invalid(
            "reachability.max_lateral_accel",
            "maximum lateral acceleration must be positive",
        ));
    }
    if !(speed.is_finite() && speed >= 0.0) {
        return Err(Error::invalid("speed", "speed must be finite and non-negative"));
    }
    Ok((speed * speed / max_lateral_accel).max(radius_floor))
}

/// How a rejected target pose is perturbed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PerturbationMode {
    /// Position drawn from a disc around the proposed position, heading
    /// offset drawn independently.
    Pose,
    /// The proposed velocity is offset by a vector drawn from a disc, so
    /// position and heading move together. The heading offset bound still
    /// applies to the resulting heading change.
    Velocity,
    /// Bisection on the blend `v + λ·(v′ − v)` between the previous and the
    /// proposed velocity, keeping the largest reachable λ. The previous
    /// velocity itself is always reachable, so the perturbation radius and
    /// heading bound are not used.
    Blend,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReachabilityPolicy {
    /// κ: a target is reachable when the path is at most κ times the chord.
    pub detour_factor: f64,
    pub max_iterations: u32,
    /// Radius of the disc the target position is perturbed within (meters).
    pub position_perturbation_radius: f64,
    /// Half-width of the uniform heading perturbation (radians).
    pub heading_perturbation: f64,
    /// ε_len: lower bound on the chord used in the detour test (meters).
    pub min_chord: f64,
    /// a_lat,max in m/s².
    pub max_lateral_accel: f64,
    pub perturbation: PerturbationMode,
    /// Turn radius used when `v²/a_lat,max` falls below it (meters).
    pub radius_floor: f64,
}

impl Default for ReachabilityPolicy {
    fn default() -> Self {
        Self {
            detour_factor: 1.2,
            max_iterations: 10,
            position_perturbation_radius: 0.5,
            heading_perturbation: 0.2,
            min_chord: 0.1,
            max_lateral_accel: 9.0,
            radius_floor: 1.0,
            perturbation: PerturbationMode::Blend,
        }
    }
}

impl ReachabilityPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.detour_factor.is_finite() && self.detour_factor > 1.0) {
            return Err(Error::invalid("reachability.detour_factor", "κ must be greater than 1"));
        }
        if self.max_iterations < 1 {
            return Err(Error::invalid("reachability.max_iterations", "must be at least 1"));
        }
        let positive = [
            ("reachability.position_perturbation_radius", self.position_perturbation_radius),
            ("reachability.heading_perturbation", self.heading_perturbation),
            ("reachability.min_chord", self.min_chord),
            ("reachability.max_lateral_accel", self.max_lateral_accel),
            ("reachability.radius_floor", self.radius_floor),
        ];
        for (field, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(field, "must be finite and positive"));
            }
        }
        Ok(())
    }

    /// Turn radius for a given longitudinal speed in m/s.
    pub fn turn_radius(&self, speed: f64) -> f64 {
        (speed * speed / self.max_lateral_accel).max(self.radius_floor)
    }
}

/// True when the shortest path needs no detour: `L ≤ κ·max(‖Δp‖, ε_len)`.
pub fn is_reachable(start: Pose, target: Pose, radius: f64, policy: &ReachabilityPolicy) -> bool {
    let chord = start.position.distance(target.position).max(policy.min_chord);
    shortest_dubins_path(start, target, radius).total_length <= policy.detour_factor * chord
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AdjustOutcome {
    Accepted,
    Adjusted,
    KeptPrevious,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstrainedUpdate {
    pub position: Vec2,
    /// Meters per cycle; always `position − previous position`.
    pub velocity: Vec2,
    pub outcome: AdjustOutcome,
}

/// Filters a proposed boid update through the reachability test.
///
/// The start pose is `(position, heading_of(velocity))` and the proposed pose
/// is `(position + proposed_velocity, heading_of(proposed_velocity))`. When
/// the proposal needs a detour, up to `max_iterations` targets are drawn
/// uniformly from a disc around the proposed position with a uniform heading
/// offset; the first reachable one wins. If none is, the boid dead-reckons
/// with its previous velocity.
pub fn constrain_update<R: Rng + ?Sized>(
    position: Vec2,
    velocity: Vec2,
    proposed_velocity: Vec2,
    radius: f64,
    policy: &ReachabilityPolicy,
    rng: &mut R,
) -> ConstrainedUpdate {
    let start = Pose::from_motion(position, velocity);
    let proposed = Pose::from_motion(position + proposed_velocity, proposed_velocity);
    if is_reachable(start, proposed, radius, policy) {
        return ConstrainedUpdate {
            position: proposed.position,
            velocity: proposed_velocity,
            outcome: AdjustOutcome::Accepted,
        };
    }
    match policy.perturbation {
        PerturbationMode::Blend => blend_search(position, velocity, proposed_velocity, start, radius, policy),
        mode => random_search(mode, position, velocity, proposed, start, radius, policy, rng),
    }
}

#[allow(clippy::too_many_arguments)]
fn random_search<R: Rng + ?Sized>(
    mode: PerturbationMode,
    position: Vec2,
    velocity: Vec2,
    proposed: Pose,
    start: Pose,
    radius: f64,
    policy: &ReachabilityPolicy,
    rng: &mut R,
) -> ConstrainedUpdate {
    let proposed_velocity = proposed.position - position;
    for _ in 0..policy.max_iterations {
        let r = policy.position_perturbation_radius * rng.random::<f64>().sqrt();
        let offset = Vec2::from_heading(rng.random_range(0.0..TAU)) * r;
        let candidate = if mode == PerturbationMode::Pose {
            let dh = rng.random_range(-policy.heading_perturbation..=policy.heading_perturbation);
            Pose::from_parts(proposed.position + offset, proposed.heading + dh)
        } else {
            let v = proposed_velocity + offset;
            let candidate = Pose::from_motion(position + v, v);
            if normalize_angle(candidate.heading - proposed.heading).abs() > policy.heading_perturbation {
                continue;
            }
            candidate
        };
        if is_reachable(start, candidate, radius, policy) {
            return ConstrainedUpdate {
                position: candidate.position,
                velocity: candidate.position - position,
                outcome: AdjustOutcome::Adjusted,
            };
        }
    }
    ConstrainedUpdate {
        position: position + velocity,
        velocity,
        outcome: AdjustOutcome::KeptPrevious,
    }
}

fn blend_search(
    position: Vec2,
    velocity: Vec2,
    proposed_velocity: Vec2,
    start: Pose,
    radius: f64,
    policy: &ReachabilityPolicy,
) -> ConstrainedUpdate {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..policy.max_iterations {
        let mid = 0.5 * (lo + hi);
        let v = velocity + (proposed_velocity - velocity) * mid;
        if is_reachable(start, Pose::from_motion(position + v, v), radius, policy) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo == 0.0 {
        return ConstrainedUpdate {
            position: position + velocity,
            velocity,
            outcome: AdjustOutcome::KeptPrevious,
        };
    }
    let v = velocity + (proposed_velocity - velocity) * lo;
    ConstrainedUpdate {
        position: position + v,
        velocity: v,
        outcome: AdjustOutcome::Adjusted,
    }
}
