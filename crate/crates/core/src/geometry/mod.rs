//! Domains, grids and depth profiles.

mod bathymetry;
mod domain;
mod grid;

pub use bathymetry::{eval_bathymetry, Bathymetry, DepthSample};
pub use domain::{distance_to_boundary, DomainSpec};
pub use grid::{build_grid, Edge, Grid, Layout, NodeTag, Stencil, MIN_RESOLUTION};
