//! Compiles the book's code snippets as doc-tests so the guide stays in
//! sync with the library. mdBook itself cannot run Rust snippets against
//! a local crate, so each chapter is included here as module
//! documentation and `cargo test --doc` does the work.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/ingestion.md")]
pub mod ingestion {}
#[doc = include_str!("../../../book/src/solar_geometry.md")]
pub mod solar_geometry {}
#[doc = include_str!("../../../book/src/stationarization.md")]
pub mod stationarization {}
#[doc = include_str!("../../../book/src/stage1_narnn.md")]
pub mod stage1_narnn {}
#[doc = include_str!("../../../book/src/stage2_armax.md")]
pub mod stage2_armax {}
#[doc = include_str!("../../../book/src/evaluation.md")]
pub mod evaluation {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
