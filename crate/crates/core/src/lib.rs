//! Time bounds on quantum superpositions of gravitating and charged bodies.

pub mod bounds;
pub mod causality;
pub mod config;
pub mod echo;
pub mod error;
pub mod interference;
pub mod oracle;
pub mod quad;
pub mod radiation;
pub mod run;
pub mod table;
pub mod units;
pub mod vacuum;

pub use error::{Error, Result};
pub use units::{PhysicalConstants, PlanckScales};
