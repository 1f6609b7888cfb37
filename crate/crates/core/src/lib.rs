//! Random walks on dihedral groups D_n: the group law, walk simulation through
//! the auxiliary process, exact evolution of the walk's law, entropy tooling
//! and an experiment harness for cutoff measurements.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod entropy;
pub mod error;
pub mod exact;
pub mod group;
pub mod harness;
pub mod rng;
pub mod stats;
pub mod walk;

pub use error::{Error, Result};
pub use group::{DihedralElement, Generator, GeneratorSet, GroupParams};
