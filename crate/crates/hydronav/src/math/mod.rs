//! Small fixed-size linear algebra (3-vectors, 3×3 matrices, SO(3) helpers),
//! deterministic seedable random streams, and the Ornstein-Uhlenbeck process.

mod ou;
mod rng;
mod rotation;
mod vec3;

pub use ou::{OuProcess, OuProcess3};
pub use rng::{Rng, Stream};
pub use rotation::{exp_so3, hat, vee, Mat3, Rotation};
pub use vec3::Vec3;
