//! Avatar-robot cafe: robots, world simulation, session workflow,
//! teleoperation protocol and work telemetry.

pub mod protocol;
pub mod robot;
pub mod scenario;
pub mod session;
pub mod telemetry;
pub mod world;

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RobotId(pub u32);

impl fmt::Display for RobotId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "R{}", self.0)
    }
}
