#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod integrators;
pub mod linalg;
pub mod model;
pub mod scalar;
pub mod segmentation;
pub mod averaging;
pub mod toggle;
