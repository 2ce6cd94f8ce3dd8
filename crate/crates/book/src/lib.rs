//! The chapters of `book/`, included so that `cargo test` runs their code
//! blocks.

#![doc = include_str!("../../../book/src/introduction.md")]

#[doc = include_str!("../../../book/src/units.md")]
pub mod units {}

#[doc = include_str!("../../../book/src/materials.md")]
pub mod materials {}

#[doc = include_str!("../../../book/src/free-energy.md")]
pub mod free_energy {}

#[doc = include_str!("../../../book/src/regimes.md")]
pub mod regimes {}

#[doc = include_str!("../../../book/src/asymptotics.md")]
pub mod asymptotics {}

#[doc = include_str!("../../../book/src/entropy.md")]
pub mod entropy {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
