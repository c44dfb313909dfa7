//! Parallel loops over unstructured meshes, with a small finite element
//! layer on top.
//!
//! The crate is layered:
//!
//! * [`topology`]: sets, constant-arity maps, conflict colouring, RCM.
//! * [`data`]: Dats, sparse Mats, Globals and access descriptors.
//! * [`kernel_ir`]: kernel ASTs, the reference interpreter and optimization
//!   passes.
//! * [`parloop`]: the execution engine that stages data through maps and
//!   runs kernels in coloured, deterministic parallel sweeps.
//! * [`mesh`], [`fem`], [`solver`]: simplicial meshes, Lagrange elements,
//!   form assembly, boundary conditions and CG.
//! * [`bench`]: the Poisson, wave and mixed-system experiments.

pub mod error;
pub mod topology;
pub mod data;
pub mod kernel_ir;
pub mod parloop;
pub mod mesh;
pub mod fem;
pub mod solver;
pub mod bench;

pub use error::{Error, Result};
