//! Perceptual pattern analysis for SVG charts.

pub mod advisor;
pub mod annotations;
pub mod chart;
pub mod color;
pub mod effects;
pub mod evaluation;
pub mod model;
pub mod patterns;
pub mod pipeline;
