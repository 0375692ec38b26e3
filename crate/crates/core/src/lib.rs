#![no_std]
extern crate alloc;

pub mod quantale;
pub mod rational;
pub mod vcat;
pub mod lp;
pub mod systems;
pub mod closure;
pub mod engine;
pub mod instances;
pub mod random;
