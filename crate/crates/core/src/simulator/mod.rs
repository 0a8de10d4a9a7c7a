//! Deterministic waypoint-following vessel simulator.
//!
//! Each leg `k` runs LOS guidance from waypoint `k` to `k + 1` through a PD
//! autopilot into the vessel dynamics. A leg completes when the vessel enters
//! the acceptance radius of its target; it is marked missing after its sample
//! cap, and the vessel then continues with the next leg.

mod dynamics;
mod guidance;

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

pub use dynamics::{
    heading_autopilot, pitch_autopilot, step_surface, step_underwater, wrap_angle, Actuator,
    Dynamics, Nomoto, PdGains, PitchChannel, RollModel,
};
pub use guidance::{leg_frame, los_guidance, LegFrame, LosCommand};

use crate::domain::{
    euclidean_distance, validate_waypoint_set, VesselConfig, VesselKind, Waypoint, WaypointSet,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VesselState {
    pub x: f64,
    pub y: f64,
    /// Depth, m (0 for surface vessels).
    pub z: f64,
    pub heading: f64,
    pub yaw_rate: f64,
    pub speed: f64,
    pub pitch: f64,
    pub pitch_rate: f64,
    pub roll: f64,
    pub roll_rate: f64,
    /// Actual rudder angle, rad.
    pub rudder: f64,
    /// Actual stern-plane angle, rad.
    pub stern_plane: f64,
}

impl VesselState {
    /// At rest on the first waypoint, heading along the first leg, at cruise speed.
    pub fn at_start(cfg: &VesselConfig, wps: &WaypointSet) -> Self {
        let a = wps.waypoints()[0];
        let b = wps.waypoints()[1];
        Self {
            x: a.x,
            y: a.y,
            z: a.z.unwrap_or(0.0),
            heading: (b.y - a.y).atan2(b.x - a.x),
            speed: cfg.dynamics.speed,
            ..Self::default()
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.x,
            self.y,
            self.z,
            self.heading,
            self.yaw_rate,
            self.speed,
            self.pitch,
            self.pitch_rate,
            self.roll,
            self.roll_rate,
            self.rudder,
            self.stern_plane,
        ]
        .iter()
        .all(|v| v.is_finite())
    }

    fn position(&self, dim: usize) -> Waypoint {
        if dim == 3 {
            Waypoint::new_3d(self.x, self.y, self.z)
        } else {
            Waypoint::new_2d(self.x, self.y)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LegStatus {
    Completed,
    Missing,
}

impl LegStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            LegStatus::Completed => "completed",
            LegStatus::Missing => "missing",
        }
    }
}

/// One sample: time since start of simulation, position and attitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub roll: f64,
    pub pitch: f64,
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubPath {
    /// 1-based leg index (leg `i` runs from waypoint `i` to `i + 1`).
    pub leg: usize,
    pub samples: Vec<Sample>,
    pub status: LegStatus,
}

impl SubPath {
    pub fn roll(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.roll).collect()
    }

    pub fn pitch(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.pitch).collect()
    }

    pub fn yaw(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.yaw).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub dim: usize,
    pub subpaths: Vec<SubPath>,
    pub reached_all: bool,
}

impl SimulationResult {
    pub fn new(dim: usize, subpaths: Vec<SubPath>) -> Self {
        let reached_all = subpaths.iter().all(|s| s.status == LegStatus::Completed);
        Self {
            dim,
            subpaths,
            reached_all,
        }
    }

    /// Concatenated sample positions of every sub-path.
    pub fn full_path(&self) -> Vec<Waypoint> {
        self.subpaths
            .iter()
            .flat_map(|sp| sp.samples.iter())
            .map(|s| {
                if self.dim == 3 {
                    Waypoint::new_3d(s.x, s.y, s.z)
                } else {
                    Waypoint::new_2d(s.x, s.y)
                }
            })
            .collect()
    }

    pub fn total_samples(&self) -> usize {
        self.subpaths.iter().map(|s| s.samples.len()).sum()
    }

    /// Writes `leg,t,x,y[,z],roll,pitch,yaw,status`.
    pub fn write_trace_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        if self.dim == 3 {
            w.write_record(["leg", "t", "x", "y", "z", "roll", "pitch", "yaw", "status"])?;
        } else {
            w.write_record(["leg", "t", "x", "y", "roll", "pitch", "yaw", "status"])?;
        }
        for sp in &self.subpaths {
            for s in &sp.samples {
                let mut row = vec![
                    sp.leg.to_string(),
                    s.t.to_string(),
                    s.x.to_string(),
                    s.y.to_string(),
                ];
                if self.dim == 3 {
                    row.push(s.z.to_string());
                }
                row.extend([
                    s.roll.to_string(),
                    s.pitch.to_string(),
                    s.yaw.to_string(),
                    sp.status.as_str().to_string(),
                ]);
                w.write_record(&row)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Parses a trace written by [`SimulationResult::write_trace_csv`].
    pub fn read_trace_csv<R: Read>(reader: R) -> Result<Self> {
        let bad = |message: String| Error::Format {
            path: "<trace>".into(),
            message,
        };
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers()?.clone();
        let dim = match headers.len() {
            8 => 2,
            9 => 3,
            n => return Err(bad(format!("expected 8 or 9 trace columns, got {n}"))),
        };
        let num = |s: &str| {
            s.parse::<f64>()
                .map_err(|e| bad(format!("bad number {s:?}: {e}")))
        };
        let mut subpaths: Vec<SubPath> = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let leg: usize = rec[0]
                .parse()
                .map_err(|e| bad(format!("bad leg {:?}: {e}", &rec[0])))?;
            let off = if dim == 3 { 1 } else { 0 };
            let sample = Sample {
                t: num(&rec[1])?,
                x: num(&rec[2])?,
                y: num(&rec[3])?,
                z: if dim == 3 { num(&rec[4])? } else { 0.0 },
                roll: num(&rec[4 + off])?,
                pitch: num(&rec[5 + off])?,
                yaw: num(&rec[6 + off])?,
            };
            let status = match &rec[7 + off] {
                "completed" => LegStatus::Completed,
                "missing" => LegStatus::Missing,
                other => return Err(bad(format!("unknown status {other:?}"))),
            };
            match subpaths.last_mut() {
                Some(sp) if sp.leg == leg => sp.samples.push(sample),
                _ => subpaths.push(SubPath {
                    leg,
                    samples: vec![sample],
                    status,
                }),
            }
        }
        Ok(Self::new(dim, subpaths))
    }
}

/// Simulates `wps` with a uniform per-leg cap of `cfg.max_leg_samples`.
pub fn simulate(
    cfg: &VesselConfig,
    wps: &WaypointSet,
    initial: &VesselState,
) -> Result<SimulationResult> {
    let caps = vec![cfg.max_leg_samples; wps.len() - 1];
    simulate_with_caps(cfg, wps, initial, &caps)
}

/// Simulates `wps` with an explicit sample cap per leg.
pub fn simulate_with_caps(
    cfg: &VesselConfig,
    wps: &WaypointSet,
    initial: &VesselState,
    caps: &[usize],
) -> Result<SimulationResult> {
    cfg.validate()?;
    let dim = cfg.dim();
    if wps.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: wps.dim(),
        });
    }
    if caps.len() != wps.len() - 1 {
        return Err(Error::LengthMismatch {
            expected: wps.len() - 1,
            got: caps.len(),
        });
    }
    if !validate_waypoint_set(wps, cfg.min_wp_dist) {
        return Err(Error::InvalidWaypoints(format!(
            "consecutive waypoints closer than {} m",
            cfg.min_wp_dist
        )));
    }
    if !initial.is_finite() {
        return Err(Error::InvalidParameter(
            "initial state is not finite".into(),
        ));
    }

    let dyn_ = &cfg.dynamics;
    let mut state = *initial;
    let mut elapsed = 0usize;
    let mut subpaths = Vec::with_capacity(wps.len() - 1);
    for (leg, pair) in wps.waypoints().windows(2).enumerate() {
        let (from, to) = (&pair[0], &pair[1]);
        let cap = caps[leg].min(cfg.max_leg_samples).max(1);
        let mut samples = Vec::with_capacity(cap.min(4096));
        let mut status = LegStatus::Missing;
        while samples.len() < cap {
            let cmd = los_guidance(&state, from, to, dyn_.lookahead)?;
            let rudder = heading_autopilot(&state, cmd.heading, &dyn_.heading_autopilot);
            state = match cfg.kind {
                VesselKind::Surface => step_surface(&state, rudder, dyn_, cfg.dt),
                VesselKind::Underwater => {
                    let pitch = dyn_.pitch.as_ref().expect("validated");
                    let desired = cmd
                        .pitch
                        .unwrap_or(0.0)
                        .clamp(-pitch.max_pitch, pitch.max_pitch);
                    let plane = pitch_autopilot(&state, desired, &pitch.autopilot);
                    step_underwater(&state, rudder, plane, dyn_, cfg.dt)?
                }
            };
            elapsed += 1;
            if !state.is_finite() {
                return Err(Error::DynamicsDiverged {
                    leg: leg + 1,
                    sample: samples.len(),
                });
            }
            samples.push(Sample {
                t: elapsed as f64 * cfg.dt,
                x: state.x,
                y: state.y,
                z: state.z,
                roll: state.roll,
                pitch: state.pitch,
                yaw: state.heading,
            });
            if euclidean_distance(&state.position(dim), to)? <= cfg.acceptance_radius {
                status = LegStatus::Completed;
                break;
            }
        }
        subpaths.push(SubPath {
            leg: leg + 1,
            samples,
            status,
        });
    }
    Ok(SimulationResult::new(dim, subpaths))
}
