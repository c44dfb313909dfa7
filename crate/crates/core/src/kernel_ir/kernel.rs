use std::fmt;
use std::sync::Arc;

use super::ast::KernelAst;
use super::interp::{Program, Scratch};
use crate::error::{Error, Result};

/// Signature of a host-language kernel: the iteration entity and one staged
/// buffer per argument.
pub type HostFn = dyn Fn(usize, &mut [&mut [f64]]) + Send + Sync;

/// The per-entity computation of a parallel loop.
///
/// A kernel is either an AST (executed by the interpreter), a host closure,
/// or both. When both are present the host closure is the fast path and the
/// AST documents and cross-checks it.
#[derive(Clone)]
pub struct Kernel {
    name: String,
    ast: Option<KernelAst>,
    program: Option<Arc<Program>>,
    host: Option<Arc<HostFn>>,
    param_lens: Option<Vec<usize>>,
}

impl Kernel {
    pub fn from_ast(ast: KernelAst) -> Result<Kernel> {
        let program = Program::compile(&ast)?;
        Ok(Kernel {
            name: ast.name.clone(),
            param_lens: Some(program.param_lens()),
            program: Some(Arc::new(program)),
            ast: Some(ast),
            host: None,
        })
    }

    /// A host kernel. `param_lens`, when given, is checked against the staged
    /// buffer sizes before execution.
    pub fn from_host(
        name: impl Into<String>,
        param_lens: Option<Vec<usize>>,
        f: impl Fn(usize, &mut [&mut [f64]]) + Send + Sync + 'static,
    ) -> Kernel {
        Kernel {
            name: name.into(),
            ast: None,
            program: None,
            host: Some(Arc::new(f)),
            param_lens,
        }
    }

    /// Attaches a host implementation to an AST kernel.
    pub fn with_host(mut self, f: impl Fn(usize, &mut [&mut [f64]]) + Send + Sync + 'static) -> Kernel {
        self.host = Some(Arc::new(f));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn ast(&self) -> Option<&KernelAst> {
        self.ast.as_ref()
    }

    pub fn param_lens(&self) -> Option<&[usize]> {
        self.param_lens.as_deref()
    }

    pub fn has_host(&self) -> bool {
        self.host.is_some()
    }

    pub fn check_args(&self, lens: &[usize]) -> Result<()> {
        if let Some(expected) = &self.param_lens {
            if expected.len() != lens.len() {
                return Err(Error::ShapeMismatch(format!(
                    "kernel `{}` takes {} arguments, loop supplies {}",
                    self.name,
                    expected.len(),
                    lens.len()
                )));
            }
            for (k, (e, g)) in expected.iter().zip(lens).enumerate() {
                if e != g {
                    return Err(Error::ShapeMismatch(format!(
                        "kernel `{}` argument {k}: parameter holds {e} values, staged buffer has {g}",
                        self.name
                    )));
                }
            }
        }
        Ok(())
    }

    /// Runs the kernel for `entity`, preferring the host implementation.
    pub fn invoke(&self, scratch: &mut Scratch, entity: usize, args: &mut [&mut [f64]]) -> Result<()> {
        match (&self.host, &self.program) {
            (Some(f), _) => {
                f(entity, args);
                Ok(())
            }
            (None, Some(p)) => p.run_with(scratch, args),
            (None, None) => unreachable!("kernel without implementation"),
        }
    }

    /// Runs the AST through the interpreter regardless of any host closure.
    pub fn invoke_ast(&self, args: &mut [&mut [f64]]) -> Result<()> {
        match &self.program {
            Some(p) => p.run(args),
            None => Err(Error::InvalidKernel(format!("kernel `{}` has no AST", self.name))),
        }
    }

    pub fn invoke_host(&self, entity: usize, args: &mut [&mut [f64]]) -> Result<()> {
        match &self.host {
            Some(f) => {
                f(entity, args);
                Ok(())
            }
            None => Err(Error::InvalidKernel(format!(
                "kernel `{}` has no host implementation",
                self.name
            ))),
        }
    }
}

impl fmt::Debug for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("name", &self.name)
            .field("ast", &self.ast.is_some())
            .field("host", &self.host.is_some())
            .finish()
    }
}
