//! Spin spaces: the circle, SU(2), SO(3), and the spheres `S^2`, `S^3`.

pub mod sampling;
pub mod so3;
mod space;
pub mod su2;

pub use space::{isoclinic_act, phi_inverse, phi_map, Side, SpinSpace, SpinValue};
pub use su2::Su2;
