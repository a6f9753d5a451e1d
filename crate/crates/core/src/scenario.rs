//! Ground-truth highway: a three-lane road built from straight and circular
//! segments, and constant-speed vehicles that follow their lanes.
//!
//! Vehicles are parameterized by their station `s` (arc length along the road
//! centerline). The ego vehicle defines the ISO 8855 frame in which every
//! other quantity is reported.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flocking::FlockId;
use crate::geometry::{Pose, Vec2};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadSegment {
    /// Meters along the centerline.
    pub length: f64,
    /// 1/m, positive turns left, 0 for a straight.
    pub curvature: f64,
}

impl RoadSegment {
    pub fn straight(length: f64) -> Self {
        Self {
            length,
            curvature: 0.0,
        }
    }

    pub fn arc(length: f64, radius: f64) -> Self {
        Self {
            length,
            curvature: 1.0 / radius,
        }
    }

    fn end_pose(&self, start: Pose, l: f64) -> Pose {
        let k = self.curvature;
        if k == 0.0 {
            return Pose::from_parts(start.position + Vec2::from_heading(start.heading) * l, start.heading);
        }
        let local = Vec2::new((k * l).sin() / k, (1.0 - (k * l).cos()) / k);
        Pose::from_parts(start.to_world(local), start.heading + k * l)
    }
}

/// Minimum radius of a "gentle" curve.
pub const MIN_GENTLE_RADIUS: f64 = 250.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RoadModel {
    pub lane_width: f64,
    pub segments: Vec<RoadSegment>,
}

impl Default for RoadModel {
    fn default() -> Self {
        let mut segments = Vec::new();
        for _ in 0..4 {
            segments.push(RoadSegment::straight(500.0));
            segments.push(RoadSegment::arc(400.0, 1000.0));
            segments.push(RoadSegment::straight(500.0));
            segments.push(RoadSegment::arc(400.0, -1000.0));
        }
        Self {
            lane_width: 3.5,
            segments,
        }
    }
}

impl RoadModel {
    pub fn all_straight() -> Self {
        Self {
            lane_width: 3.5,
            segments: vec![RoadSegment::straight(10_000.0)],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lane_width.is_finite() && self.lane_width > 0.0) {
            return Err(Error::invalid("scenario.road.lane_width", "must be positive"));
        }
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.length.is_finite() && s.length > 0.0) {
                return Err(Error::invalid(
                    format!("scenario.road.segments[{i}].length"),
                    "segment length must be positive",
                ));
            }
            if !s.curvature.is_finite() || s.curvature.abs() * MIN_GENTLE_RADIUS > 1.0 {
                return Err(Error::invalid(
                    format!("scenario.road.segments[{i}].curvature"),
                    format!("curve radius must be at least {MIN_GENTLE_RADIUS} m"),
                ));
            }
        }
        Ok(())
    }

    /// Centerline pose at station `s`. The road continues straight before
    /// its start and after its last segment.
    pub fn centerline(&self, s: f64) -> Pose {
        let mut start = Pose::new(0.0, 0.0, 0.0);
        if s <= 0.0 {
            return RoadSegment::straight(0.0).end_pose(start, s);
        }
        let mut remaining = s;
        for seg in &self.segments {
            if remaining <= seg.length {
                return seg.end_pose(start, remaining);
            }
            start = seg.end_pose(start, seg.length);
            remaining -= seg.length;
        }
        RoadSegment::straight(0.0).end_pose(start, remaining)
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for seg in &self.segments {
            acc += seg.length;
            if s <= acc {
                return seg.curvature;
            }
        }
        0.0
    }

    /// World pose of a point at station `s` and signed lateral offset.
    pub fn pose_at(&self, s: f64, lateral: f64) -> Pose {
        let c = self.centerline(s);
        Pose::from_parts(c.to_world(Vec2::new(0.0, lateral)), c.heading)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Lane {
    Left,
    Ego,
    Right,
}

impl Lane {
    /// Lane-center offset in lane widths, left positive.
    pub fn index(self) -> f64 {
        match self {
            Lane::Left => 1.0,
            Lane::Ego => 0.0,
            Lane::Right => -1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub id: FlockId,
    pub lane: Lane,
    /// m/s
    pub speed: f64,
    /// Initial station relative to the ego vehicle (meters).
    pub initial_offset: f64,
    /// Offset from the lane center, left positive (meters).
    pub lateral_offset: f64,
}

impl VehicleSpec {
    pub fn lateral(&self, lane_width: f64) -> f64 {
        self.lane.index() * lane_width + self.lateral_offset
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Seconds simulated per run.
    pub duration: f64,
    pub road: RoadModel,
    pub ego: VehicleSpec,
    pub targets: Vec<VehicleSpec>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        build_default_scenario()
    }
}

/// Ego at 25 m/s in the center lane; ID:1 (33 m/s, left lane) approaching from
/// behind, ID:2 (25 m/s) 30 m ahead in the ego lane, ID:3 (23 m/s) in the right
/// lane. Lateral separations are 3.2 m (ID:1–ID:2) and 3.7 m (ID:2–ID:3).
pub fn build_default_scenario() -> ScenarioConfig {
    ScenarioConfig {
        duration: 60.0,
        road: RoadModel::default(),
        ego: VehicleSpec {
            id: 0,
            lane: Lane::Ego,
            speed: 25.0,
            initial_offset: 0.0,
            lateral_offset: 0.0,
        },
        targets: vec![
            VehicleSpec {
                id: 1,
                lane: Lane::Left,
                speed: 33.0,
                initial_offset: -60.0,
                lateral_offset: -0.3,
            },
            VehicleSpec {
                id: 2,
                lane: Lane::Ego,
                speed: 25.0,
                initial_offset: 30.0,
                lateral_offset: 0.0,
            },
            VehicleSpec {
                id: 3,
                lane: Lane::Right,
                speed: 23.0,
                initial_offset: 20.0,
                lateral_offset: -0.2,
            },
        ],
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::invalid("scenario.duration", "must be positive"));
        }
        self.road.validate()?;
        for (i, v) in std::iter::once(&self.ego).chain(&self.targets).enumerate() {
            if !(v.speed.is_finite() && v.speed > 0.0) {
                let field = if i == 0 {
                    "scenario.ego.speed".to_string()
                } else {
                    format!("scenario.targets[{}].speed", i - 1)
                };
                return Err(Error::invalid(field, "speed must be positive"));
            }
        }
        let mut ids: Vec<FlockId> = self.targets.iter().map(|t| t.id).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != self.targets.len() || ids.contains(&self.ego.id) {
            return Err(Error::invalid("scenario.targets", "vehicle ids must be unique"));
        }
        Ok(())
    }

    pub fn cycles(&self, cycle_duration: f64) -> u64 {
        (self.duration / cycle_duration).round() as u64
    }

    pub fn target(&self, id: FlockId) -> Option<&VehicleSpec> {
        self.targets.iter().find(|t| t.id == id)
    }

    /// Station of a vehicle at time `t` seconds.
    pub fn station(&self, spec: &VehicleSpec, t: f64) -> f64 {
        spec.initial_offset + spec.speed * t
    }

    /// Ground truth at a given cycle.
    pub fn frame(&self, cycle: u64, cycle_duration: f64) -> GroundTruthFrame {
        let t = cycle as f64 * cycle_duration;
        let w = self.road.lane_width;
        let ego_pose = self.road.pose_at(self.station(&self.ego, t), self.ego.lateral(w));
        let vehicles = self
            .targets
            .iter()
            .map(|spec| {
                let world = self.road.pose_at(self.station(spec, t), spec.lateral(w));
                let velocity = Vec2::from_heading(world.heading) * spec.speed;
                VehicleState {
                    id: spec.id,
                    pose: ego_pose.pose_to_local(world),
                    velocity: velocity.rotated(-ego_pose.heading),
                    speed: spec.speed,
                    station: self.station(spec, t),
                }
            })
            .collect();
        GroundTruthFrame {
            cycle,
            time: t,
            ego_pose,
            vehicles,
        }
    }
}

/// One target vehicle in the ego frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleState {
    pub id: FlockId,
    pub pose: Pose,
    /// m/s, over ground, expressed in ego axes.
    pub velocity: Vec2,
    pub speed: f64,
    pub station: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthFrame {
    pub cycle: u64,
    pub time: f64,
    /// Ego pose in the world frame; the ego sits at the origin of its own frame.
    pub ego_pose: Pose,
    pub vehicles: Vec<VehicleState>,
}

impl GroundTruthFrame {
    pub fn vehicle(&self, id: FlockId) -> Option<&VehicleState> {
        self.vehicles.iter().find(|v| v.id == id)
    }
}

/// Iterates ground-truth frames cycle by cycle.
#[derive(Clone, Debug)]
pub struct ScenarioState<'a> {
    config: &'a ScenarioConfig,
    cycle: u64,
}

impl<'a> ScenarioState<'a> {
    pub fn new(config: &'a ScenarioConfig) -> Self {
        Self { config, cycle: 0 }
    }

    pub fn cycle(&self) -> u64 {
        self.cycle
    }

    pub fn frame(&self, cycle_duration: f64) -> GroundTruthFrame {
        self.config.frame(self.cycle, cycle_duration)
    }

    /// Moves every vehicle `v·Δt` along its lane.
    pub fn advance(&mut self) {
        self.cycle += 1;
    }
}

/// Writes ground-truth frames as `cycle,id,x,y,heading,vx,vy`.
pub fn write_ground_truth_csv(path: &Path, frames: &[GroundTruthFrame]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    writeln!(out, "cycle,id,x,y,heading,vx,vy").map_err(io)?;
    for f in frames {
        for v in &f.vehicles {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6}",
                f.cycle, v.id, v.pose.position.x, v.pose.position.y, v.pose.heading, v.velocity.x, v.velocity.y
            )
            .map_err(io)?;
        }
    }
    out.flush().map_err(io)
}
