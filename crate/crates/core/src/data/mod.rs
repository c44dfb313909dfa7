//! Mutable state: per-entity vectors ([`Dat`]), CSR sparse matrices ([`Mat`])
//! and reduction targets ([`Global`]), plus the access descriptors that
//! declare how a kernel touches each of them.

mod access;
mod dat;
mod global;
mod mat;
mod sparsity;

pub use access::Access;
pub use dat::Dat;
pub use global::{global_reduce, Global};
pub use mat::{mat_spmv, Mat};
pub use sparsity::{build_sparsity, Sparsity};
