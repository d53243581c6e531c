//! Built-in approximate flows.

mod additive;
mod connection;
mod euler;
mod signal;
mod young;

pub use additive::AdditiveModel;
pub use connection::{segment_distance_to_origin, FlatConnection, RuleVariant, MIDPOINT_CONSTANT};
pub use euler::EulerModel;
pub use signal::Signal;
pub use young::YoungModel;
