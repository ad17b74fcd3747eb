//! Classical force-control baseline: close with position control until each
//! finger senses contact, then regulate both raw forces to the goal with
//! independent per-finger PI loops.
//!
//! During the closing phase a finger that senses a raw force above its noise
//! threshold stops and waits until the opposing finger has acquired contact
//! too; this avoids pushing the object around during acquisition. Contact is
//! latched so noise near the threshold cannot un-stop a finger. Once both
//! fingers are latched the controller switches to force control (exactly once
//! per episode) and never reverts.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{EnvError, GripperEnv, TraceRecord};
use crate::sim::{LEFT, RIGHT};

#[derive(Debug, Error)]
pub enum PiError {
    #[error("the PI baseline drives two finger joints, env has {0}")]
    RequiresTwoFingers(usize),
    #[error("invalid gains: {0}")]
    InvalidGains(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// PI gains and closing speed.
///
/// The defaults are tuned against the default object so that both forces
/// settle within a few percent of the goal well inside a 300-step episode.
/// Note the loop gain seen by the controller is `scale * stiffness` sensor
/// units per meter, so the position loop only tolerates small `kp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PiGains {
    /// Closing velocity per unit force error (m/s per sensor unit).
    pub kp: f64,
    /// Closing velocity per unit force-error integral (m/s per sensor-unit-second).
    pub ki: f64,
    /// Anti-windup clamp on the per-finger error integral.
    pub integral_limit: f64,
    /// Closing speed during acquisition (m/s), > 0.
    pub v_close: f64,
}

impl Default for PiGains {
    fn default() -> Self {
        Self { kp: 5e-3, ki: 5e-2, integral_limit: 2.0, v_close: 0.01 }
    }
}

impl PiGains {
    pub fn validate(&self) -> Result<(), PiError> {
        if !(self.kp >= 0.0) || !(self.ki >= 0.0) {
            return Err(PiError::InvalidGains("kp and ki must be >= 0".into()));
        }
        if !(self.integral_limit > 0.0) {
            return Err(PiError::InvalidGains("integral_limit must be > 0".into()));
        }
        if !(self.v_close > 0.0) {
            return Err(PiError::InvalidGains("v_close must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Closing,
    ForceControl,
}

/// Controller state machine over the two fingers.
#[derive(Debug, Clone)]
pub struct PiController {
    gains: PiGains,
    f_thresh: [f64; 2],
    f_goal: f64,
    dt: f64,
    phase: Phase,
    finger_contact: [bool; 2],
    integral: [f64; 2],
}

impl PiController {
    pub fn new(gains: PiGains, f_thresh: [f64; 2], f_goal: f64, dt: f64) -> Result<Self, PiError> {
        gains.validate()?;
        Ok(Self {
            gains,
            f_thresh,
            f_goal,
            dt,
            phase: Phase::Closing,
            finger_contact: [false; 2],
            integral: [0.0; 2],
        })
    }

    /// Controller matching an environment's sensor, goal and step duration.
    pub fn for_env(env: &GripperEnv, gains: PiGains) -> Result<Self, PiError> {
        let n = env.action_dim();
        if n != 2 {
            return Err(PiError::RequiresTwoFingers(n));
        }
        let config = env.config();
        Self::new(gains, config.sensor.f_thresh, config.f_goal, config.sim.dt_control)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn finger_contact(&self) -> [bool; 2] {
        self.finger_contact
    }

    pub fn integral(&self) -> [f64; 2] {
        self.integral
    }

    /// One controller step on the latest raw forces; returns the commanded
    /// finger velocities `[RIGHT, LEFT]` (negative = closing).
    ///
    /// On the step where the second finger latches, the commanded action is
    /// still the closing-phase one (both fingers stopped); force regulation
    /// begins on the following step.
    pub fn step(&mut self, f_raw: [f64; 2]) -> [f64; 2] {
        let mut action = [0.0; 2];
        match self.phase {
            Phase::Closing => {
                for i in [RIGHT, LEFT] {
                    if !self.finger_contact[i] && f_raw[i] > self.f_thresh[i] {
                        self.finger_contact[i] = true;
                    }
                    // A latched finger stops and waits; the other keeps closing.
                    action[i] = if self.finger_contact[i] { 0.0 } else { -self.gains.v_close };
                }
                if self.finger_contact[RIGHT] && self.finger_contact[LEFT] {
                    self.phase = Phase::ForceControl;
                    self.integral = [0.0; 2];
                }
            }
            Phase::ForceControl => {
                for i in [RIGHT, LEFT] {
                    let e = self.f_goal - f_raw[i];
                    let limit = self.gains.integral_limit;
                    self.integral[i] = (self.integral[i] + e * self.dt).clamp(-limit, limit);
                    // Positive error means too little force: close further
                    // (closing direction is negative).
                    action[i] = -(self.gains.kp * e + self.gains.ki * self.integral[i]);
                }
            }
        }
        action
    }
}

/// One full baseline episode with diagnostics.
#[derive(Debug, Clone)]
pub struct BaselineRun {
    pub trace: Vec<TraceRecord>,
    pub episode_return: f64,
    /// Step index (1-based) at which the controller entered force control.
    pub switch_step: Option<u32>,
    /// Object center position after each step.
    pub object_x: Vec<f64>,
    /// Object center position at reset.
    pub object_x0: f64,
}

impl BaselineRun {
    /// Largest object displacement from its reset position observed up to and
    /// including the phase switch (the acquisition window).
    pub fn acquisition_displacement(&self) -> f64 {
        let end = match self.switch_step {
            Some(s) => s as usize,
            None => self.object_x.len(),
        };
        self.object_x[..end]
            .iter()
            .map(|x| (x - self.object_x0).abs())
            .fold(0.0, f64::max)
    }
}

/// Reset the environment and run the PI baseline for one episode.
pub fn run_baseline(env: &mut GripperEnv, gains: PiGains) -> Result<BaselineRun, PiError> {
    let mut controller = PiController::for_env(env, gains)?;
    env.reset();
    let x0 = env.object_x();

    let mut switch_step = None;
    let mut object_x = Vec::with_capacity(env.config().episode_length as usize);
    // The controller consumes the raw forces read after the previous step
    // (at reset: the initial no-contact reading).
    let mut f_raw = env.last_reading().f_raw;
    let mut trace = Vec::with_capacity(env.config().episode_length as usize);
    let mut total = 0.0;
    loop {
        let was_closing = controller.phase() == Phase::Closing;
        let action = controller.step(f_raw);
        let result = env.step(&action)?;
        if was_closing && controller.phase() == Phase::ForceControl && switch_step.is_none() {
            switch_step = Some(result.info.step);
        }
        total += result.reward;
        f_raw = result.info.f_raw;
        object_x.push(result.info.object_x);
        let n = env.action_dim();
        trace.push(TraceRecord {
            t: env.time(),
            q: result.obs.values[..n].to_vec(),
            qdot: result.obs.values[n..2 * n].to_vec(),
            f_contact: result.info.f_contact,
            f_raw: result.info.f_raw,
            action: action.to_vec(),
            reward: result.reward,
        });
        if result.done {
            break;
        }
    }

    Ok(BaselineRun { trace, episode_return: total, switch_step, object_x, object_x0: x0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::EnvConfig;

    fn controller() -> PiController {
        PiController::new(PiGains::default(), [0.0231, 0.0231], 1.0, 0.02).unwrap()
    }

    #[test]
    fn closing_starts_with_both_fingers_moving() {
        let mut c = controller();
        let a = c.step([0.0, 0.0]);
        assert_eq!(a, [-0.01, -0.01]);
        assert_eq!(c.phase(), Phase::Closing);
    }

    #[test]
    fn contacted_finger_stops_and_waits() {
        let mut c = controller();
        let a = c.step([0.1, 0.0]);
        assert_eq!(a[RIGHT], 0.0);
        assert_eq!(a[LEFT], -0.01);
        assert_eq!(c.finger_contact(), [true, false]);
        // Latched even if the force falls back under the threshold.
        let a = c.step([0.0, 0.0]);
        assert_eq!(a[RIGHT], 0.0);
        assert_eq!(a[LEFT], -0.01);
        assert_eq!(c.phase(), Phase::Closing);
    }

    #[test]
    fn both_contacts_switch_to_force_control_once() {
        let mut c = controller();
        c.step([0.1, 0.0]);
        c.step([0.0, 0.1]);
        assert_eq!(c.phase(), Phase::ForceControl);
        assert_eq!(c.integral(), [0.0, 0.0]);
        // Never reverts, even on zero forces.
        c.step([0.0, 0.0]);
        assert_eq!(c.phase(), Phase::ForceControl);
    }

    #[test]
    fn zero_error_is_a_fixed_point() {
        let mut c = controller();
        c.step([0.1, 0.1]);
        let a = c.step([1.0, 1.0]);
        assert_eq!(a, [0.0, 0.0]);
        assert_eq!(c.integral(), [0.0, 0.0]);
    }

    #[test]
    fn integral_respects_anti_windup_clamp() {
        let gains = PiGains { integral_limit: 0.5, ..PiGains::default() };
        let mut c = PiController::new(gains, [0.0231; 2], 1.0, 0.02).unwrap();
        c.step([0.1, 0.1]);
        // Large persistent error in both directions.
        for _ in 0..10_000 {
            c.step([50.0, -50.0]);
            for v in c.integral() {
                assert!(v.abs() <= 0.5);
            }
        }
    }

    #[test]
    fn rejects_non_two_finger_envs() {
        let env = GripperEnv::new(EnvConfig::for_kind(crate::envs::EnvKind::TiagoTactile)).unwrap();
        assert!(matches!(
            PiController::for_env(&env, PiGains::default()),
            Err(PiError::RequiresTwoFingers(10))
        ));
    }

    #[test]
    fn baseline_converges_on_default_scenario() {
        let mut config = EnvConfig::gripper();
        config.sensor.noise_enabled = false;
        let mut env = GripperEnv::new(config).unwrap();
        let run = run_baseline(&mut env, PiGains::default()).unwrap();
        assert!(run.switch_step.is_some());
        let goal = 1.0;
        for record in &run.trace[200..] {
            for f in record.f_raw {
                assert!(
                    (f - goal).abs() <= 0.05 * goal,
                    "force {f} off goal at t={}",
                    record.t
                );
            }
        }
    }

    #[test]
    fn baseline_stop_and_wait_limits_object_motion() {
        let mut config = EnvConfig::gripper();
        config.sensor.noise_enabled = false;
        config.sim.object_init.x = 0.005;
        let mut env = GripperEnv::new(config).unwrap();
        let run = run_baseline(&mut env, PiGains::default()).unwrap();
        assert!(run.switch_step.is_some());
        assert!(
            run.acquisition_displacement() < 0.002,
            "object moved {} m during acquisition",
            run.acquisition_displacement()
        );
    }

    #[test]
    fn baseline_phase_switches_exactly_once() {
        let mut env = GripperEnv::new(EnvConfig::gripper()).unwrap();
        let run = run_baseline(&mut env, PiGains::default()).unwrap();
        let s = run.switch_step.unwrap() as usize;
        // Before the switch at least one finger is still closing; afterwards
        // the trace must never show both fingers commanded at -v_close again.
        for record in &run.trace[s..] {
            assert!(record.action != vec![-0.01, -0.01]);
        }
    }
}
