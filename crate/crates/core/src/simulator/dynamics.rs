//! Reduced-order vessel dynamics.
//!
//! Steering follows a first-order Nomoto model `T r' + r = K delta`, integrated
//! exactly over each step for a piecewise-constant rudder angle. Roll is a
//! damped oscillator driven by yaw rate, so that hard or alternating turns show
//! up as oscillatory roll. Underwater profiles add a Nomoto-style pitch channel
//! driven by the stern plane, with depth rate `-U sin(theta)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::VesselState;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Nomoto {
    /// Steady-state rate per unit actuator angle, 1/s.
    pub gain: f64,
    /// Time constant, s.
    pub time_constant: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Actuator {
    /// Saturation, rad.
    pub max_angle: f64,
    /// Rate limit, rad/s.
    pub max_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdGains {
    pub kp: f64,
    pub kd: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RollModel {
    /// rad/s
    pub natural_frequency: f64,
    pub damping_ratio: f64,
    /// Steady heel per unit yaw rate, s.
    pub yaw_rate_gain: f64,
    /// Steady heel per unit rudder angle (rudder-induced roll moment).
    #[serde(default)]
    pub rudder_gain: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PitchChannel {
    pub nomoto: Nomoto,
    pub plane: Actuator,
    pub autopilot: PdGains,
    /// Vertical line-of-sight lookahead, m.
    pub lookahead: f64,
    /// Pitch command saturation, rad.
    pub max_pitch: f64,
    /// Allowed overshoot of a commanded depth change under the default gains, m.
    pub max_depth_overshoot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dynamics {
    /// Constant surge speed, m/s.
    pub speed: f64,
    /// Hull length, m.
    pub length: f64,
    pub yaw: Nomoto,
    pub rudder: Actuator,
    pub heading_autopilot: PdGains,
    /// Horizontal line-of-sight lookahead, m.
    pub lookahead: f64,
    pub roll: RollModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pitch: Option<PitchChannel>,
}

impl Dynamics {
    pub fn validate(&self) -> Result<()> {
        let mut checks = vec![
            ("speed", self.speed),
            ("length", self.length),
            ("yaw.time_constant", self.yaw.time_constant),
            ("rudder.max_angle", self.rudder.max_angle),
            ("rudder.max_rate", self.rudder.max_rate),
            ("lookahead", self.lookahead),
            ("roll.natural_frequency", self.roll.natural_frequency),
            ("roll.damping_ratio", self.roll.damping_ratio),
        ];
        if let Some(p) = &self.pitch {
            checks.extend([
                ("pitch.nomoto.time_constant", p.nomoto.time_constant),
                ("pitch.plane.max_angle", p.plane.max_angle),
                ("pitch.plane.max_rate", p.plane.max_rate),
                ("pitch.lookahead", p.lookahead),
                ("pitch.max_pitch", p.max_pitch),
            ]);
        }
        for (name, v) in checks {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Steady turning radius at full rudder, m.
    pub fn min_turning_radius(&self) -> f64 {
        self.speed / (self.yaw.gain.abs() * self.rudder.max_angle)
    }
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

/// PD heading autopilot returning a rudder command.
pub fn heading_autopilot(state: &VesselState, desired_heading: f64, gains: &PdGains) -> f64 {
    gains.kp * wrap_angle(desired_heading - state.heading) - gains.kd * state.yaw_rate
}

/// PD pitch autopilot returning a stern-plane command.
pub fn pitch_autopilot(state: &VesselState, desired_pitch: f64, gains: &PdGains) -> f64 {
    gains.kp * (desired_pitch - state.pitch) - gains.kd * state.pitch_rate
}

fn actuate(current: f64, command: f64, limits: &Actuator, dt: f64) -> f64 {
    let target = command.clamp(-limits.max_angle, limits.max_angle);
    let max_move = limits.max_rate * dt;
    current + (target - current).clamp(-max_move, max_move)
}

/// Exact step of `tau x' + x = target`; returns the new value and its integral over the step.
fn first_order(value: f64, target: f64, tau: f64, dt: f64) -> (f64, f64) {
    let decay = (-dt / tau).exp();
    let next = target + (value - target) * decay;
    let integral = target * dt + (value - target) * tau * (1.0 - decay);
    (next, integral)
}

/// RK4 step of `phi'' + 2 zeta w phi' + w^2 phi = w^2 heel` with the static heel held constant.
fn oscillator(angle: f64, rate: f64, heel: f64, model: &RollModel, dt: f64) -> (f64, f64) {
    let w = model.natural_frequency;
    let accel = |a: f64, r: f64| w * w * (heel - a) - 2.0 * model.damping_ratio * w * r;
    let (k1a, k1r) = (rate, accel(angle, rate));
    let (k2a, k2r) = (
        rate + 0.5 * dt * k1r,
        accel(angle + 0.5 * dt * k1a, rate + 0.5 * dt * k1r),
    );
    let (k3a, k3r) = (
        rate + 0.5 * dt * k2r,
        accel(angle + 0.5 * dt * k2a, rate + 0.5 * dt * k2r),
    );
    let (k4a, k4r) = (rate + dt * k3r, accel(angle + dt * k3a, rate + dt * k3r));
    (
        angle + dt / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a),
        rate + dt / 6.0 * (k1r + 2.0 * k2r + 2.0 * k3r + k4r),
    )
}

fn step_horizontal(
    state: &VesselState,
    rudder_command: f64,
    dyn_: &Dynamics,
    dt: f64,
) -> VesselState {
    let mut next = *state;
    next.rudder = actuate(state.rudder, rudder_command, &dyn_.rudder, dt);
    let target_rate = dyn_.yaw.gain * next.rudder;
    let (yaw_rate, turned) = first_order(state.yaw_rate, target_rate, dyn_.yaw.time_constant, dt);
    next.yaw_rate = yaw_rate;
    let mid_heading = state.heading + 0.5 * turned;
    next.heading = wrap_angle(state.heading + turned);
    let heel = dyn_.roll.yaw_rate_gain * 0.5 * (state.yaw_rate + yaw_rate)
        + dyn_.roll.rudder_gain * 0.5 * (state.rudder + next.rudder);
    let (roll, roll_rate) = oscillator(state.roll, state.roll_rate, heel, &dyn_.roll, dt);
    next.roll = roll;
    next.roll_rate = roll_rate;
    next.speed = dyn_.speed;
    let horizontal = next.speed * dt * state.pitch.cos();
    next.x = state.x + horizontal * mid_heading.cos();
    next.y = state.y + horizontal * mid_heading.sin();
    next
}

/// Advances a surface vessel by `dt` under a rudder command (rad).
pub fn step_surface(
    state: &VesselState,
    rudder_command: f64,
    dyn_: &Dynamics,
    dt: f64,
) -> VesselState {
    step_horizontal(state, rudder_command, dyn_, dt)
}

/// Advances an underwater vessel by `dt` under rudder and stern-plane commands (rad).
pub fn step_underwater(
    state: &VesselState,
    rudder_command: f64,
    stern_plane_command: f64,
    dyn_: &Dynamics,
    dt: f64,
) -> Result<VesselState> {
    let pitch = dyn_.pitch.as_ref().ok_or_else(|| {
        Error::InvalidParameter("underwater step requires a pitch channel".into())
    })?;
    // horizontal motion uses the pitch at the start of the step
    let mut next = step_horizontal(state, rudder_command, dyn_, dt);
    next.stern_plane = actuate(state.stern_plane, stern_plane_command, &pitch.plane, dt);
    let target = pitch.nomoto.gain * next.stern_plane;
    let (pitch_rate, pitched) =
        first_order(state.pitch_rate, target, pitch.nomoto.time_constant, dt);
    next.pitch_rate = pitch_rate;
    let mid_pitch = state.pitch + 0.5 * pitched;
    next.pitch = wrap_angle(state.pitch + pitched);
    let mid_heading = state.heading + 0.5 * (wrap_angle(next.heading - state.heading));
    let travel = dyn_.speed * dt;
    next.x = state.x + travel * mid_pitch.cos() * mid_heading.cos();
    next.y = state.y + travel * mid_pitch.cos() * mid_heading.sin();
    next.z = state.z - travel * mid_pitch.sin();
    Ok(next)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn surface() -> Dynamics {
        Dynamics {
            speed: 5.0,
            length: 100.0,
            yaw: Nomoto {
                gain: 0.05,
                time_constant: 30.0,
            },
            rudder: Actuator {
                max_angle: 0.6,
                max_rate: 0.05,
            },
            heading_autopilot: PdGains { kp: 1.0, kd: 20.0 },
            lookahead: 300.0,
            roll: RollModel {
                natural_frequency: 0.3,
                damping_ratio: 0.3,
                yaw_rate_gain: 3.0,
                rudder_gain: 0.1,
            },
            pitch: None,
        }
    }

    fn underwater() -> Dynamics {
        Dynamics {
            pitch: Some(PitchChannel {
                nomoto: Nomoto {
                    gain: 0.3,
                    time_constant: 1.0,
                },
                plane: Actuator {
                    max_angle: 0.4,
                    max_rate: 0.3,
                },
                autopilot: PdGains { kp: 1.0, kd: 1.0 },
                lookahead: 20.0,
                max_pitch: 0.5,
                max_depth_overshoot: 1.0,
            }),
            ..surface()
        }
    }

    fn zero_state() -> VesselState {
        VesselState {
            speed: 5.0,
            ..VesselState::default()
        }
    }

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(wrap_angle(0.25), 0.25);
    }

    #[test]
    fn straight_advance_without_rudder() {
        let d = surface();
        let s = VesselState {
            heading: 0.3,
            ..zero_state()
        };
        let n = step_surface(&s, 0.0, &d, 0.5);
        assert_eq!(n.heading, 0.3);
        let moved = ((n.x - s.x).powi(2) + (n.y - s.y).powi(2)).sqrt();
        assert!((moved - 2.5).abs() < 1e-12);
        assert_eq!(n.roll, 0.0);
    }

    #[test]
    fn yaw_rate_converges_to_nomoto_steady_state() {
        let d = surface();
        let mut s = zero_state();
        let delta = 0.2;
        // t >> T
        for _ in 0..2000 {
            s = step_surface(&s, delta, &d, 0.5);
        }
        assert!((s.rudder - delta).abs() < 1e-12);
        assert!((s.yaw_rate - d.yaw.gain * delta).abs() < 1e-10);
    }

    #[test]
    fn first_order_step_matches_closed_form() {
        let d = surface();
        let mut s = VesselState {
            rudder: 0.2,
            ..zero_state()
        };
        let dt = 0.5;
        for k in 1..=100 {
            s = step_surface(&s, 0.2, &d, dt);
            let t = k as f64 * dt;
            let expected = d.yaw.gain * 0.2 * (1.0 - (-t / d.yaw.time_constant).exp());
            assert!((s.yaw_rate - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn roll_free_decay_matches_analytic_solution() {
        let d = surface();
        let RollModel {
            natural_frequency: w,
            damping_ratio: z,
            ..
        } = d.roll;
        let wd = w * (1.0 - z * z).sqrt();
        let phi0 = 0.1;
        let mut s = VesselState {
            roll: phi0,
            ..zero_state()
        };
        let dt = 0.5;
        let energy = |s: &VesselState| 0.5 * s.roll_rate.powi(2) + 0.5 * w * w * s.roll.powi(2);
        let e0 = energy(&s);
        for k in 1..=2000 {
            s = step_surface(&s, 0.0, &d, dt);
            let t = k as f64 * dt;
            let analytic = phi0
                * (-z * w * t).exp()
                * ((wd * t).cos() + z / (1.0 - z * z).sqrt() * (wd * t).sin());
            assert!((s.roll - analytic).abs() < 1e-4, "t={t}");
        }
        assert!(energy(&s) < 1e-12 * e0);
    }

    #[test]
    fn level_underwater_holds_depth() {
        let d = underwater();
        let mut s = VesselState {
            z: 30.0,
            ..zero_state()
        };
        for _ in 0..1000 {
            s = step_underwater(&s, 0.0, 0.0, &d, 0.1).unwrap();
        }
        assert_eq!(s.z, 30.0);
        assert_eq!(s.pitch, 0.0);
    }

    #[test]
    fn constant_plane_gives_steady_pitch_rate() {
        let d = underwater();
        let mut s = zero_state();
        let ds = 0.1;
        for _ in 0..500 {
            s = step_underwater(&s, 0.0, ds, &d, 0.1).unwrap();
        }
        let k = d.pitch.unwrap().nomoto.gain;
        assert!((s.pitch_rate - k * ds).abs() < 1e-10);
    }

    #[test]
    fn surface_step_rejects_nothing_and_underwater_needs_pitch() {
        assert!(step_underwater(&zero_state(), 0.0, 0.0, &surface(), 0.1).is_err());
    }

    #[test]
    fn rudder_saturates_and_rate_limits() {
        let d = surface();
        let s = step_surface(&zero_state(), 10.0, &d, 0.5);
        assert!((s.rudder - 0.025).abs() < 1e-15);
        let mut s = zero_state();
        for _ in 0..200 {
            s = step_surface(&s, 10.0, &d, 0.5);
        }
        assert_eq!(s.rudder, 0.6);
    }
}
