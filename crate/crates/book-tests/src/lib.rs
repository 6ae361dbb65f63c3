//! The chapters of the guide, compiled as documentation so that
//! `cargo test` runs every code sample in them.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/kernels.md")]
pub mod kernels {}

#[doc = include_str!("../../../book/src/semigroups.md")]
pub mod semigroups {}

#[doc = include_str!("../../../book/src/eigenpair.md")]
pub mod eigenpair {}

#[doc = include_str!("../../../book/src/gibbs.md")]
pub mod gibbs {}

#[doc = include_str!("../../../book/src/pressure.md")]
pub mod pressure {}

#[doc = include_str!("../../../book/src/entropy-production.md")]
pub mod entropy_production {}

#[doc = include_str!("../../../book/src/paths.md")]
pub mod paths {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}

#[doc = include_str!("../../../README.md")]
pub mod readme {}
