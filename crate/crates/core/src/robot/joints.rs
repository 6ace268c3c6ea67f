use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

/// Neck pitch and yaw limit.
pub const NECK_LIMIT_RAD: f64 = FRAC_PI_2;
/// Limit applied to every arm axis.
pub const ARM_LIMIT_RAD: f64 = PI;

/// Arm axis order: pitch, roll, yaw, pitch, yaw, roll (shoulder to wrist).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmAngles(pub [f64; 6]);

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NeckAngles {
    pub pitch_rad: f64,
    pub yaw_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointState {
    pub neck: NeckAngles,
    pub arm_left: ArmAngles,
    pub arm_right: ArmAngles,
}

impl JointState {
    pub fn within_limits(&self) -> bool {
        let neck_ok = [self.neck.pitch_rad, self.neck.yaw_rad]
            .iter()
            .all(|a| a.is_finite() && a.abs() <= NECK_LIMIT_RAD);
        let arms_ok = self
            .arm_left
            .0
            .iter()
            .chain(self.arm_right.0.iter())
            .all(|a| a.is_finite() && a.abs() <= ARM_LIMIT_RAD);
        neck_ok && arms_ok
    }

    pub(crate) fn lerp(&self, to: &JointState, f: f64) -> JointState {
        let l = |a: f64, b: f64| a + (b - a) * f;
        let mut out = *self;
        out.neck.pitch_rad = l(self.neck.pitch_rad, to.neck.pitch_rad);
        out.neck.yaw_rad = l(self.neck.yaw_rad, to.neck.yaw_rad);
        for i in 0..6 {
            out.arm_left.0[i] = l(self.arm_left.0[i], to.arm_left.0[i]);
            out.arm_right.0[i] = l(self.arm_right.0[i], to.arm_right.0[i]);
        }
        out
    }
}
