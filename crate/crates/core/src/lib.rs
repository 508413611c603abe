//! Amortised resource analysis for typed constructor term rewrite systems.
//!
//! The crate is `no_std` (it needs `alloc`) and carries every algorithmic
//! piece of the toolchain:
//!
//! * [`terms`]: types, signatures, terms, substitutions and structural checks;
//! * [`annot`]: the resource-annotation algebra and constructor schemes;
//! * [`engine`]: innermost rewriting, big-step and small-step semantics;
//! * [`potential`]: potentials of values, ground terms and substitutions;
//! * [`constraints`]: linear constraints and an exact rational simplex;
//! * [`typecheck`]: the annotated type system, checking and inference;
//! * [`interp`]: typed polynomial interpretations and bound reports;
//! * [`syntax`]: the textual `.trs` / `.sig` formats.
//!
//! All arithmetic is exact over [`Rational`].
#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod annot;
pub mod constraints;
pub mod engine;
pub mod interp;
pub mod potential;
pub mod rational;
pub mod syntax;
pub mod terms;
pub mod typecheck;

pub use rational::Rational;
