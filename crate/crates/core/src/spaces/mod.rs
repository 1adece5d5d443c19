//! Concrete metric spaces and the fixture fields that live on them.

pub mod euclidean;
pub mod fixtures;
pub mod grid;
pub mod hausdorff;

pub use euclidean::{point, Euclidean, EuclideanPoint};
pub use grid::{GridFunction, GridSpec, L2Grid};
pub use hausdorff::{hausdorff_distance, CompactSet, Hausdorff};
