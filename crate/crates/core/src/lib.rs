//! Difference matrices, labelled projective planes and the local structure of
//! the triangle buildings they define.
//!
//! The crate builds the labelled planes attached to perfect difference sets,
//! computes the label permutation groups that their point stabilizers induce,
//! and uses them to certify that the building of a difference matrix is not
//! 2-Moufang (hence exotic). It also glues the radius-2 ball of that building
//! and extracts the level-1 and level-2 Hjelmslev planes at its centre.

pub mod arith;
pub mod ball;
pub mod diffsets;
pub mod error;
pub mod exec;
pub mod exotic;
pub mod permgrp;
pub mod plane;
pub mod unionfind;

pub use error::{Error, Result};
pub use exec::Exec;
