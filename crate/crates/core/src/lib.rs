//! Design and simulation of anisotropic acousto-optic deflectors in optically active crystals.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bandshape;
pub mod bragg;
pub mod cascade;
pub mod config;
pub mod design;
pub mod error;
pub mod export;
pub mod fom;
pub mod materials;
pub mod numeric;
pub mod optics;
pub mod transducer;

pub use error::{Error, Result};
