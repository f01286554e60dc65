//! Constructive machinery for fixed-point-free annulus dynamics at desk
//! scale: brick decompositions of the truncated strip, transition digraphs,
//! Brouwer lines, fixed-point and partial indices, crescents, petals and the
//! local-dynamics pipelines built on top of them.

pub mod bricks;
pub mod chart;
pub mod crescents;
pub mod dynsys;
pub mod error;
pub mod flowgraph;
pub mod geom;
pub mod grid;
pub mod index;
pub mod partial;
pub mod pipelines;

pub use error::{Error, Result};
