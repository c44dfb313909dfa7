//! Lagrange elements, function spaces, a small catalogue of forms compiled to
//! local kernels, and strong Dirichlet conditions.

mod assemble;
mod custom;
mod element;
mod form;
mod mixed;
mod pointwise;
mod quadrature;
mod space;

pub use assemble::{
    apply_dirichlet, assemble, assemble_matrix, assemble_vector, assemble_vector_into, Assembled, BcValue,
    DirichletBC,
};
pub use custom::{custom_parloop, l2_error, perturbation_kernel, CustomArg, Iterate};
pub use element::{tabulate, Element, Tabulation};
pub use form::{compile_local_kernel, coord, local_kernel, Coefficient, Form, FormKind};
pub use mixed::{assemble_mixed, assemble_monolithic, split_mixed, FormTable, MixedForm, MixedSpace};
pub use pointwise::{pointwise, AssignOp, PExpr};
pub use quadrature::{Cell, QuadratureRule};
pub use space::{Function, FunctionSpace};
