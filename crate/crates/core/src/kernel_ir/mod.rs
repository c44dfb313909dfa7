//! Kernel representation and optimization.
//!
//! Kernels are small structured ASTs ([`KernelAst`]) whose semantics are
//! defined by the reference interpreter ([`interpret`]). The optimization
//! passes ([`hoist_invariants`], [`fold_constants`], [`unroll`],
//! [`pad_extents`]) are AST-to-AST rewrites that must agree with the
//! interpreter on every input.

mod ast;
mod emit;
mod fold;
mod hoist;
mod interp;
mod kernel;
mod pad;
mod unroll;

pub use ast::{Decl, Expr, Index, Init, KernelAst, Loop, Param, Place, Stmt};
pub use emit::emit_source;
pub use fold::fold_constants;
pub use hoist::hoist_invariants;
pub use interp::{interpret, Program, Scratch};
pub use kernel::{HostFn, Kernel};
pub use pad::pad_extents;
pub use unroll::unroll;
