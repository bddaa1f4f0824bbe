pub mod geodesic;
pub mod transform;
pub mod transition;
