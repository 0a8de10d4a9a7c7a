//! Lookahead-based line-of-sight guidance.

use super::VesselState;
use crate::domain::Waypoint;
use crate::error::{Error, Result};

/// Desired attitude from the guidance law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosCommand {
    pub heading: f64,
    /// Present only for 3D legs.
    pub pitch: Option<f64>,
}

/// Cross-track geometry of a position relative to a horizontal leg.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegFrame {
    /// Leg bearing, rad (0 = North, positive towards East).
    pub bearing: f64,
    pub along_track: f64,
    /// Positive to starboard of the leg.
    pub cross_track: f64,
    pub horizontal_length: f64,
}

pub fn leg_frame(x: f64, y: f64, from: &Waypoint, to: &Waypoint) -> LegFrame {
    let dx = to.x - from.x;
    let dy = to.y - from.y;
    let bearing = dy.atan2(dx);
    let (s, c) = bearing.sin_cos();
    let px = x - from.x;
    let py = y - from.y;
    LegFrame {
        bearing,
        along_track: px * c + py * s,
        cross_track: -px * s + py * c,
        horizontal_length: dx.hypot(dy),
    }
}

/// Steers towards a point `lookahead` meters ahead on the leg `from -> to`.
///
/// Horizontal: `heading = bearing + atan(-e / lookahead)` with cross-track error `e`.
/// For 3D legs the pitch command follows the same law in the vertical plane,
/// around the leg's flight-path angle.
pub fn los_guidance(
    state: &VesselState,
    from: &Waypoint,
    to: &Waypoint,
    lookahead: f64,
) -> Result<LosCommand> {
    if from == to {
        return Err(Error::DegenerateLeg);
    }
    let frame = leg_frame(state.x, state.y, from, to);
    let heading = if frame.horizontal_length > 0.0 {
        frame.bearing + (-frame.cross_track / lookahead).atan()
    } else {
        // purely vertical leg: keep course
        state.heading
    };
    let pitch = match (from.z, to.z) {
        (Some(z0), Some(z1)) => {
            let dz = z1 - z0;
            let h = frame.horizontal_length;
            let path_angle = (-dz).atan2(h);
            let progress = if h > 0.0 { frame.along_track / h } else { 1.0 };
            let depth_error = state.z - (z0 + progress * dz);
            Some(path_angle + (depth_error / lookahead).atan())
        }
        _ => None,
    };
    Ok(LosCommand { heading, pitch })
}
