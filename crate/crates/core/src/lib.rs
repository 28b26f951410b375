#![cfg_attr(not(feature = "std"), no_std)]
extern crate alloc;

pub mod fatpoints;
pub mod ffrank;
pub mod heights;
pub mod hochschild;
pub mod picard;
pub mod vanishing;
