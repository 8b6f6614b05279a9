//! The mdbook guide's chapters, included as doc comments so that every
//! code block in the book runs under `cargo test --doc`.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/mdps-and-fixed-points.md")]
pub mod mdps_and_fixed_points {}

#[doc = include_str!("../../../book/src/the-correction-family.md")]
pub mod the_correction_family {}

#[doc = include_str!("../../../book/src/convergence-analysis.md")]
pub mod convergence_analysis {}

#[doc = include_str!("../../../book/src/running-experiments.md")]
pub mod running_experiments {}
