//! Deterministic fixed-timestep simulation of a parallel gripper and a
//! compliant object on a single lateral axis.
//!
//! # Geometry
//!
//! Everything lives on one lateral axis through the gripper centerline.
//! A finger joint value `q` is the distance of that finger's contact surface
//! from the centerline: the right finger surface sits at `+q_right`, the left
//! finger surface at `-q_left`. Closing a finger means decreasing `q`.
//! The object is a block with center `x` and half-width `w`, so its surfaces
//! sit at `x - w` and `x + w`. Penetration depths are
//!
//! ```text
//! pen_right = ( x + w) - q_right
//! pen_left  = (-x + w) - q_left
//! ```
//!
//! clamped at zero. A penetration is only a contact while the finger surface
//! actually lies between the object's two surfaces (`pen < 2w`); an object
//! that has fully passed a finger is free. The two expressions are exact
//! mirror images, which makes the left/right relabeling invariance hold
//! bit-for-bit in f64.
//!
//! # Contact law
//!
//! Per finger, a linear spring-damper on penetration depth:
//!
//! ```text
//! f = max(0, stiffness * pen + damping * d(pen)/dt)      if pen > 0
//! f = 0                                                  otherwise
//! ```
//!
//! Arm and torso joints (in the full-chain configuration) integrate and clamp
//! exactly like finger joints but never participate in contact.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of the right finger in two-element per-finger arrays.
pub const RIGHT: usize = 0;
/// Index of the left finger in two-element per-finger arrays.
pub const LEFT: usize = 1;

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
}

/// Limits of a single joint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub name: String,
    /// Lower position limit (m or rad).
    pub q_min: f64,
    /// Upper position limit (m or rad).
    pub q_max: f64,
    /// Symmetric velocity limit (m/s or rad/s), > 0.
    pub v_max: f64,
}

impl JointSpec {
    pub fn new(name: &str, q_min: f64, q_max: f64, v_max: f64) -> Self {
        Self { name: name.to_string(), q_min, q_max, v_max }
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(self.q_min < self.q_max) {
            return Err(SimError::InvalidConfig(format!(
                "joint {}: q_min {} must be < q_max {}",
                self.name, self.q_min, self.q_max
            )));
        }
        if !(self.v_max > 0.0) {
            return Err(SimError::InvalidConfig(format!(
                "joint {}: v_max {} must be > 0",
                self.name, self.v_max
            )));
        }
        Ok(())
    }
}

/// Joint positions and velocities of the simulated kinematic chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainState {
    pub q: Vec<f64>,
    pub qdot: Vec<f64>,
    /// Simulation time (s).
    pub t: f64,
}

impl ChainState {
    pub fn n_joints(&self) -> usize {
        self.q.len()
    }
}

/// Lateral state and compliance parameters of the grasped object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ObjectState {
    /// Lateral center position (m).
    pub x: f64,
    /// Lateral velocity (m/s).
    pub v: f64,
    /// Half-width (m), > 0.
    pub half_width: f64,
    /// Mass (kg), > 0.
    pub mass: f64,
    /// Contact stiffness (N/m), > 0.
    pub stiffness: f64,
    /// Contact damping (N·s/m), >= 0.
    pub damping: f64,
}

impl ObjectState {
    fn validate(&self) -> Result<(), SimError> {
        if !(self.half_width > 0.0) {
            return Err(SimError::InvalidConfig("object half_width must be > 0".into()));
        }
        if !(self.mass > 0.0) {
            return Err(SimError::InvalidConfig("object mass must be > 0".into()));
        }
        if !(self.stiffness > 0.0) {
            return Err(SimError::InvalidConfig("object stiffness must be > 0".into()));
        }
        if !(self.damping >= 0.0) {
            return Err(SimError::InvalidConfig("object damping must be >= 0".into()));
        }
        Ok(())
    }
}

impl Default for ObjectState {
    /// A slightly compliant block, centered. The compliance values are
    /// config defaults, not measurements; at the default sensor scale they
    /// put the goal-force grip at a fraction of a millimeter of penetration
    /// while keeping per-step force changes at full closing speed within a
    /// few sensor units.
    fn default() -> Self {
        Self {
            x: 0.0,
            v: 0.0,
            half_width: 0.025,
            mass: 0.1,
            stiffness: 20.0,
            damping: 0.5,
        }
    }
}

/// Per-finger penetration depths and contact forces, `[RIGHT, LEFT]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactResult {
    /// Penetration depth (m), >= 0.
    pub penetration: [f64; 2],
    /// Normal contact force (N), >= 0, zero whenever penetration is zero.
    pub f_contact: [f64; 2],
}

impl ContactResult {
    pub fn none() -> Self {
        Self { penetration: [0.0; 2], f_contact: [0.0; 2] }
    }
}

/// Static configuration of one simulation instance.
///
/// Deserializing fills missing fields from the gripper-only defaults, so a
/// config file can override single values (`n_substeps`, the object's
/// stiffness, ...) without restating the whole section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    /// Duration of one control step (s).
    pub dt_control: f64,
    /// Inner integration substeps per control step.
    pub n_substeps: u32,
    /// One spec per joint; fingers included.
    pub joint_specs: Vec<JointSpec>,
    /// Initial joint positions (the pre-grasp pose).
    pub q_init: Vec<f64>,
    /// Indices of the (right, left) finger joints in the chain.
    pub finger_joint_indices: (usize, usize),
    /// Object template used at reset; `x` is the nominal center position.
    pub object_init: ObjectState,
    /// Reset offsets are drawn uniformly from `±object_offset_range` (m).
    pub object_offset_range: f64,
    /// Linear damping on free object motion (N·s/m). Stands in for the
    /// resistance of the supporting surface; negligible once the object is
    /// held, since its velocity is then near zero.
    pub ambient_damping: f64,
}

/// Finger travel limits shared by both gripper joints (m).
const FINGER_Q_MIN: f64 = 0.0;
const FINGER_Q_MAX: f64 = 0.045;
/// Finger velocity limit (m/s).
const FINGER_V_MAX: f64 = 0.05;
/// Default finger opening at reset (m).
const FINGER_OPEN: f64 = 0.045;

fn finger_specs() -> [JointSpec; 2] {
    [
        JointSpec::new("gripper_right_finger", FINGER_Q_MIN, FINGER_Q_MAX, FINGER_V_MAX),
        JointSpec::new("gripper_left_finger", FINGER_Q_MIN, FINGER_Q_MAX, FINGER_V_MAX),
    ]
}

impl Default for SimConfig {
    fn default() -> Self {
        Self::gripper_only()
    }
}

impl SimConfig {
    /// Two actuated finger joints and nothing else.
    pub fn gripper_only() -> Self {
        Self {
            dt_control: 0.02,
            n_substeps: 5,
            joint_specs: finger_specs().to_vec(),
            q_init: vec![FINGER_OPEN, FINGER_OPEN],
            finger_joint_indices: (0, 1),
            object_init: ObjectState::default(),
            object_offset_range: 0.0,
            ambient_damping: 1.0,
        }
    }

    /// Full 10-joint chain: torso lift, seven arm joints, two fingers.
    ///
    /// The torso/arm limits are nominal values for a mobile manipulator of
    /// this class and the pre-grasp posture is a placeholder; none of these
    /// joints affect contact. All are config-overridable.
    pub fn full_chain() -> Self {
        let mut specs = vec![
            JointSpec::new("torso_lift", 0.0, 0.35, 0.07),
            JointSpec::new("arm_1", 0.0, 2.74, 1.95),
            JointSpec::new("arm_2", -1.57, 1.09, 1.95),
            JointSpec::new("arm_3", -3.53, 1.57, 2.35),
            JointSpec::new("arm_4", -0.39, 2.36, 2.35),
            JointSpec::new("arm_5", -2.09, 2.09, 1.95),
            JointSpec::new("arm_6", -1.39, 1.39, 1.76),
            JointSpec::new("arm_7", -2.09, 2.09, 1.76),
        ];
        specs.extend(finger_specs());
        let mut q_init = vec![0.20, 0.20, -1.34, -0.20, 1.94, -1.57, 1.37, 0.0];
        q_init.extend([FINGER_OPEN, FINGER_OPEN]);
        Self {
            dt_control: 0.02,
            n_substeps: 5,
            joint_specs: specs,
            q_init,
            finger_joint_indices: (8, 9),
            object_init: ObjectState::default(),
            object_offset_range: 0.005,
            ambient_damping: 1.0,
        }
    }

    pub fn n_joints(&self) -> usize {
        self.joint_specs.len()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.dt_control > 0.0) {
            return Err(SimError::InvalidConfig("dt_control must be > 0".into()));
        }
        if self.n_substeps < 1 {
            return Err(SimError::InvalidConfig("n_substeps must be >= 1".into()));
        }
        for spec in &self.joint_specs {
            spec.validate()?;
        }
        let n = self.n_joints();
        if self.q_init.len() != n {
            return Err(SimError::InvalidConfig(format!(
                "q_init has {} entries for {} joints",
                self.q_init.len(),
                n
            )));
        }
        for (j, (&q, spec)) in self.q_init.iter().zip(&self.joint_specs).enumerate() {
            if q < spec.q_min || q > spec.q_max {
                return Err(SimError::InvalidConfig(format!(
                    "q_init[{j}] = {q} outside [{}, {}]",
                    spec.q_min, spec.q_max
                )));
            }
        }
        let (r, l) = self.finger_joint_indices;
        if r == l || r >= n || l >= n {
            return Err(SimError::InvalidConfig(format!(
                "finger_joint_indices ({r}, {l}) must be distinct and < {n}"
            )));
        }
        self.object_init.validate()?;
        if !(self.object_offset_range >= 0.0) {
            return Err(SimError::InvalidConfig("object_offset_range must be >= 0".into()));
        }
        if !(self.ambient_damping >= 0.0) {
            return Err(SimError::InvalidConfig("ambient_damping must be >= 0".into()));
        }
        // The pre-grasp pose must leave the object free of the fingers even at
        // the largest reset offset, otherwise "closing acquires contact" does
        // not describe the scenario.
        let reach = self.object_init.half_width + self.object_offset_range;
        for idx in [r, l] {
            if self.q_init[idx] <= reach {
                return Err(SimError::InvalidConfig(format!(
                    "finger {} starts at {} which is inside the object's possible span {}",
                    self.joint_specs[idx].name, self.q_init[idx], reach
                )));
            }
        }
        Ok(())
    }

    /// Chain state at the pre-grasp pose, at rest, at t = 0.
    pub fn initial_chain(&self) -> ChainState {
        ChainState { q: self.q_init.clone(), qdot: vec![0.0; self.n_joints()], t: 0.0 }
    }
}

/// Advance all joints by one step of duration `dt` under commanded velocities.
///
/// Velocities clamp to `±v_max`; positions clamp to `[q_min, q_max]`, and a
/// joint whose position clamp engages has its stored velocity zeroed.
pub fn integrate_joints(
    state: &ChainState,
    v_des: &[f64],
    dt: f64,
    specs: &[JointSpec],
) -> Result<ChainState, SimError> {
    let n = state.n_joints();
    if v_des.len() != n {
        return Err(SimError::DimensionMismatch { expected: n, got: v_des.len() });
    }
    debug_assert_eq!(specs.len(), n);
    let mut q = Vec::with_capacity(n);
    let mut qdot = Vec::with_capacity(n);
    for j in 0..n {
        let spec = &specs[j];
        let mut v = v_des[j].clamp(-spec.v_max, spec.v_max);
        let mut pos = state.q[j] + v * dt;
        if pos < spec.q_min {
            pos = spec.q_min;
            v = 0.0;
        } else if pos > spec.q_max {
            pos = spec.q_max;
            v = 0.0;
        }
        q.push(pos);
        qdot.push(v);
    }
    Ok(ChainState { q, qdot, t: state.t + dt })
}

/// Spring-damper contact forces between the two fingers and the object.
///
/// `fingers` are the (right, left) joint indices.
pub fn compute_contact(
    chain: &ChainState,
    obj: &ObjectState,
    fingers: (usize, usize),
) -> ContactResult {
    let (ri, li) = fingers;
    // Mirror-symmetric penetration expressions; see module docs.
    let pen_r = (obj.x + obj.half_width) - chain.q[ri];
    let pen_l = (-obj.x + obj.half_width) - chain.q[li];
    let rate_r = obj.v - chain.qdot[ri];
    let rate_l = -obj.v - chain.qdot[li];

    let span = 2.0 * obj.half_width;
    let mut result = ContactResult::none();
    for (slot, (pen, rate)) in [(pen_r, rate_r), (pen_l, rate_l)].into_iter().enumerate() {
        if pen > 0.0 && pen < span {
            result.penetration[slot] = pen;
            result.f_contact[slot] = (obj.stiffness * pen + obj.damping * rate).max(0.0);
        }
    }
    result
}

/// Advance the object by one step of duration `dt` under the given contact
/// forces, with semi-implicit Euler and linear ambient damping.
pub fn step_object(
    obj: &ObjectState,
    contact: &ContactResult,
    ambient_damping: f64,
    dt: f64,
) -> ObjectState {
    // The right finger pushes the object toward -x, the left toward +x.
    let f_net = contact.f_contact[LEFT] - contact.f_contact[RIGHT];
    let f_total = f_net - ambient_damping * obj.v;
    let v = obj.v + (f_total / obj.mass) * dt;
    let x = obj.x + v * dt;
    ObjectState { x, v, ..*obj }
}

/// Run one control step: `n_substeps` inner steps of
/// `integrate_joints -> compute_contact -> step_object`, each of duration
/// `dt_control / n_substeps`. Returns the final states and the contact result
/// of the last substep.
pub fn sim_step(
    chain: &ChainState,
    obj: &ObjectState,
    v_des: &[f64],
    config: &SimConfig,
) -> Result<(ChainState, ObjectState, ContactResult), SimError> {
    let dt = config.dt_control / config.n_substeps as f64;
    let mut chain = chain.clone();
    let mut obj = obj.clone();
    let mut contact = ContactResult::none();
    for _ in 0..config.n_substeps {
        chain = integrate_joints(&chain, v_des, dt, &config.joint_specs)?;
        contact = compute_contact(&chain, &obj, config.finger_joint_indices);
        obj = step_object(&obj, &contact, config.ambient_damping, dt);
    }
    Ok((chain, obj, contact))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec_0_to_0045() -> Vec<JointSpec> {
        vec![JointSpec::new("f", 0.0, 0.045, 0.05)]
    }

    #[test]
    fn integrate_within_limits() {
        let state = ChainState { q: vec![0.04], qdot: vec![0.0], t: 0.0 };
        let out = integrate_joints(&state, &[-0.02], 0.1, &spec_0_to_0045()).unwrap();
        assert!((out.q[0] - 0.038).abs() < 1e-15);
        assert_eq!(out.qdot[0], -0.02);
        assert_eq!(out.t, 0.1);
    }

    #[test]
    fn integrate_velocity_clamp() {
        let state = ChainState { q: vec![0.04], qdot: vec![0.0], t: 0.0 };
        let out = integrate_joints(&state, &[-0.2], 0.1, &spec_0_to_0045()).unwrap();
        assert_eq!(out.qdot[0], -0.05);
        assert!((out.q[0] - 0.035).abs() < 1e-15);
    }

    #[test]
    fn integrate_position_clamp_zeroes_velocity() {
        let state = ChainState { q: vec![0.001], qdot: vec![0.0], t: 0.0 };
        let out = integrate_joints(&state, &[-0.05], 0.1, &spec_0_to_0045()).unwrap();
        assert_eq!(out.q[0], 0.0);
        assert_eq!(out.qdot[0], 0.0);
    }

    #[test]
    fn integrate_rejects_dimension_mismatch() {
        let state = ChainState { q: vec![0.0], qdot: vec![0.0], t: 0.0 };
        let err = integrate_joints(&state, &[0.0, 0.0], 0.1, &spec_0_to_0045()).unwrap_err();
        assert_eq!(err, SimError::DimensionMismatch { expected: 1, got: 2 });
    }

    fn contact_chain(q_r: f64, q_l: f64, v_r: f64, v_l: f64) -> ChainState {
        ChainState { q: vec![q_r, q_l], qdot: vec![v_r, v_l], t: 0.0 }
    }

    fn obj_k1000() -> ObjectState {
        ObjectState { stiffness: 1000.0, damping: 0.0, ..ObjectState::default() }
    }

    #[test]
    fn contact_linear_spring() {
        // Right finger 1 mm inside the object surface, no relative motion:
        // 1000 N/m * 0.001 m = 1.0 N.
        let chain = contact_chain(0.024, 0.045, 0.0, 0.0);
        let c = compute_contact(&chain, &obj_k1000(), (0, 1));
        assert!((c.penetration[RIGHT] - 0.001).abs() < 1e-12);
        assert!((c.f_contact[RIGHT] - 1.0).abs() < 1e-9);
        assert_eq!(c.f_contact[LEFT], 0.0);
        assert_eq!(c.penetration[LEFT], 0.0);
    }

    #[test]
    fn contact_free_space() {
        let chain = contact_chain(0.045, 0.045, 0.0, 0.0);
        let c = compute_contact(&chain, &ObjectState::default(), (0, 1));
        assert_eq!(c, ContactResult::none());
    }

    #[test]
    fn contact_receding_finger_clamps_to_zero() {
        // Hand computation of the spring-damper law: pen = 0.001 m at
        // k = 1000 N/m gives 1.0 N; a finger receding at 0.2 m/s with
        // c = 10 N·s/m contributes -2.0 N; the clamp must win.
        let obj = ObjectState { stiffness: 1000.0, damping: 10.0, ..ObjectState::default() };
        let chain = contact_chain(0.024, 0.045, 0.2, 0.0);
        let c = compute_contact(&chain, &obj, (0, 1));
        assert!(c.penetration[RIGHT] > 0.0);
        assert_eq!(c.f_contact[RIGHT], 0.0);
    }

    #[test]
    fn object_no_contact_only_damps() {
        let obj = ObjectState { v: 0.3, ..ObjectState::default() };
        let out = step_object(&obj, &ContactResult::none(), 1.0, 0.004);
        assert!(out.v.abs() < obj.v.abs());
        assert_eq!(out.x, obj.x + out.v * 0.004);
    }

    #[test]
    fn object_equal_forces_cancel() {
        let obj = ObjectState::default();
        let contact =
            ContactResult { penetration: [0.001, 0.001], f_contact: [1.0, 1.0] };
        let out = step_object(&obj, &contact, 1.0, 0.004);
        assert_eq!(out.v, 0.0);
        assert_eq!(out.x, 0.0);
    }

    #[test]
    fn object_single_sided_push() {
        // F = ma: 1.0 N on 0.1 kg over 4 ms gives |dv| = 0.04 m/s.
        let obj = ObjectState::default();
        let contact = ContactResult { penetration: [0.001, 0.0], f_contact: [1.0, 0.0] };
        let out = step_object(&obj, &contact, 0.0, 0.004);
        assert!((out.v - (-0.04)).abs() < 1e-15);
    }

    #[test]
    fn sim_step_idle_is_inert() {
        let config = SimConfig::gripper_only();
        let chain = config.initial_chain();
        let obj = config.object_init.clone();
        let (chain2, obj2, contact) = sim_step(&chain, &obj, &[0.0, 0.0], &config).unwrap();
        assert_eq!(chain2.q, chain.q);
        assert_eq!(chain2.qdot, chain.qdot);
        assert_eq!(contact, ContactResult::none());
        assert_eq!(obj2.x, 0.0);
        assert_eq!(obj2.v, 0.0);
    }

    #[test]
    fn sim_step_symmetric_close_keeps_object_centered() {
        let config = SimConfig::gripper_only();
        let mut chain = config.initial_chain();
        let mut obj = config.object_init.clone();
        let mut saw_force = false;
        for _ in 0..120 {
            let (c, o, contact) = sim_step(&chain, &obj, &[-0.05, -0.05], &config).unwrap();
            chain = c;
            obj = o;
            if contact.f_contact[RIGHT] > 0.0 || contact.f_contact[LEFT] > 0.0 {
                // Symmetry forces identical signs and magnitudes.
                assert_eq!(contact.f_contact[RIGHT], contact.f_contact[LEFT]);
                assert!(contact.f_contact[RIGHT] >= 0.0);
                saw_force = true;
            }
            assert!(obj.x.abs() <= 1e-4, "object drifted to {}", obj.x);
        }
        assert!(saw_force, "fingers never reached the object");
    }

    #[test]
    fn sim_step_is_deterministic() {
        let config = SimConfig::gripper_only();
        let run = || {
            let mut chain = config.initial_chain();
            let mut obj = config.object_init.clone();
            let mut log = Vec::new();
            for i in 0..200 {
                let v = if i % 3 == 0 { [-0.05, -0.02] } else { [0.01, -0.04] };
                let (c, o, contact) = sim_step(&chain, &obj, &v, &config).unwrap();
                chain = c;
                obj = o;
                log.push((chain.clone(), obj.clone(), contact));
            }
            log
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn mirror_symmetry_is_bit_exact() {
        // Mirroring the object offset and swapping fingers mirrors the
        // trajectories exactly.
        let config = SimConfig::gripper_only();
        let actions: Vec<[f64; 2]> = (0..150)
            .map(|i| [-0.05 + 0.001 * (i % 7) as f64, -0.03 - 0.002 * (i % 5) as f64])
            .collect();

        let run = |x0: f64, swap: bool| {
            let mut chain = config.initial_chain();
            let mut obj = ObjectState { x: x0, ..config.object_init.clone() };
            let mut forces = Vec::new();
            for a in &actions {
                let v = if swap { [a[1], a[0]] } else { *a };
                let (c, o, contact) = sim_step(&chain, &obj, &v, &config).unwrap();
                chain = c;
                obj = o;
                forces.push(contact.f_contact);
            }
            (forces, obj.x)
        };

        let (f_orig, x_orig) = run(0.004, false);
        let (f_mirr, x_mirr) = run(-0.004, true);
        assert_eq!(x_mirr, -x_orig);
        for (a, b) in f_orig.iter().zip(&f_mirr) {
            assert_eq!(a[RIGHT], b[LEFT]);
            assert_eq!(a[LEFT], b[RIGHT]);
        }
    }

    #[test]
    fn free_object_kinetic_energy_non_increasing() {
        let config = SimConfig::gripper_only();
        let mut obj = ObjectState { v: 0.5, x: -0.2, ..config.object_init.clone() };
        let mut chain = config.initial_chain();
        let mut ke = 0.5 * obj.mass * obj.v * obj.v;
        for _ in 0..500 {
            let (c, o, contact) = sim_step(&chain, &obj, &[0.0, 0.0], &config).unwrap();
            assert_eq!(contact, ContactResult::none());
            chain = c;
            obj = o;
            let ke_next = 0.5 * obj.mass * obj.v * obj.v;
            assert!(ke_next <= ke + 1e-18);
            ke = ke_next;
        }
    }

    #[test]
    fn config_validation_catches_bad_fields() {
        let mut config = SimConfig::gripper_only();
        config.n_substeps = 0;
        assert!(config.validate().is_err());

        let mut config = SimConfig::gripper_only();
        config.joint_specs[0].v_max = 0.0;
        assert!(config.validate().is_err());

        let mut config = SimConfig::gripper_only();
        config.finger_joint_indices = (0, 0);
        assert!(config.validate().is_err());

        let mut config = SimConfig::gripper_only();
        config.object_offset_range = 0.03;
        assert!(config.validate().is_err(), "object span may touch fingers at reset");

        assert!(SimConfig::gripper_only().validate().is_ok());
        assert!(SimConfig::full_chain().validate().is_ok());
    }

    proptest! {
        #[test]
        fn joint_limits_never_violated(
            seed_actions in proptest::collection::vec(
                proptest::collection::vec(-0.3f64..0.3, 2), 1..60),
        ) {
            let config = SimConfig::gripper_only();
            let mut chain = config.initial_chain();
            let mut obj = config.object_init.clone();
            for a in &seed_actions {
                let (c, o, _) = sim_step(&chain, &obj, a, &config).unwrap();
                chain = c;
                obj = o;
                for (j, spec) in config.joint_specs.iter().enumerate() {
                    prop_assert!(chain.q[j] >= spec.q_min && chain.q[j] <= spec.q_max);
                    prop_assert!(chain.qdot[j].abs() <= spec.v_max);
                }
            }
        }

        #[test]
        fn contact_complementarity(
            q_r in 0.0f64..0.045,
            q_l in 0.0f64..0.045,
            x in -0.02f64..0.02,
            v in -0.5f64..0.5,
        ) {
            let chain = ChainState { q: vec![q_r, q_l], qdot: vec![v, -v], t: 0.0 };
            let obj = ObjectState { x, v: -v, ..ObjectState::default() };
            let c = compute_contact(&chain, &obj, (0, 1));
            for i in 0..2 {
                prop_assert!(c.f_contact[i] >= 0.0);
                prop_assert!(c.penetration[i] >= 0.0);
                if c.penetration[i] == 0.0 {
                    prop_assert_eq!(c.f_contact[i], 0.0);
                }
            }
        }
    }
}
