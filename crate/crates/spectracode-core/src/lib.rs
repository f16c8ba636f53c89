//! Spectral analysis of pseudorandom matrices built from linear block codes.
//!
//! The crate builds `N x n` matrices whose rows are additive-character images
//! of randomly drawn codewords, forms Gram matrices of products of two such
//! matrices, and compares their empirical spectral distributions and moments
//! against the Marchenko-Pastur law and its free multiplicative convolution.
//!
//! The crate is `no_std` + `alloc`; everything with IO lives in the companion
//! `spectracode` crate.

#![no_std]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod codes;
pub mod ensemble;
pub mod error;
pub mod galois;
pub mod moments;
pub mod reference;
pub mod spectra;

pub use error::{Error, Result};
