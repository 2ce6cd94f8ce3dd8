//! Thermal Casimir free energy and entropy between two metal plates under
//! the Drude and plasma permittivity models.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod error;
pub mod lifshitz;
mod lsq;
pub mod materials;
mod quadrature;
pub mod quantities;
mod summation;
pub mod thermo;

pub use error::{Error, Result};
pub use lifshitz::{NumericControls, PlateSystem, TailMethod};
pub use materials::{PermittivityModel, RelaxationModel};
pub use quadrature::QuadratureError;
