pub mod asymptotics;
pub mod diagnostics;
pub mod elliptic;
pub mod error;
pub mod field;
pub mod geometry;
pub mod kernels;
pub mod scenarios;
pub mod transport;
pub mod vec2;
pub mod velocity;

pub use error::{LakeError, Result};
pub use field::{ScalarField, VelocityField};
pub use vec2::Vec2;
