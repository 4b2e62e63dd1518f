//! Band and loop words, canonical matrix factorizations of xyz, and the
//! Macaulayfication pipeline behind them, with exact symbolic arithmetic.

pub mod convert;
pub mod error;
pub mod freegroup;
pub mod mfcore;
pub mod modres;
pub mod ring;
pub mod strips;
pub mod t32;
pub mod words;

pub use error::{Error, Result};
