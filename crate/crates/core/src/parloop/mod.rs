//! The parallel loop engine.
//!
//! A [`Parloop`] applies a [`Kernel`] once per entity of an iteration set.
//! Each argument names a Dat, Mat or Global together with an access
//! descriptor and, for indirect arguments, the map(s) through which the
//! kernel sees it. The kernel only ever receives small staged buffers:
//!
//! * `READ` and `RW` Dat values are gathered through the map before the call;
//!   `WRITE` and `INC` stages start at zero.
//! * after the call `WRITE`/`RW` stages are scattered back, `INC` stages are
//!   added, Mat blocks are inserted and Global partials are reduced.
//!
//! The reference semantics is a single sweep in ascending entity order. With
//! more than one thread the set is coloured so that no two entities of one
//! colour share an `INC`/`RW`/`WRITE` target, colours run in ascending
//! order, and each colour is split into contiguous chunks across workers.
//! Kernel outputs are held per entity and applied afterwards in ascending
//! entity order, Global partials included, so every result ends bitwise
//! identical to the single-threaded sweep regardless of the thread count.
//!
//! `RW` through a map that is not injective is order dependent by nature;
//! such loops always run in place, in ascending order.

mod exec;

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::data::{Access, Dat, Global, Mat};
use crate::error::{Error, Result};
use crate::kernel_ir::Kernel;
use crate::topology::{Map, Set};

pub use exec::{cached_coloring, Schedule};

static DEFAULT_THREADS: AtomicUsize = AtomicUsize::new(1);

/// Sets the worker count used by [`Parloop::run`].
pub fn set_default_threads(threads: usize) {
    DEFAULT_THREADS.store(threads.max(1), Ordering::Relaxed);
}

pub fn default_threads() -> usize {
    DEFAULT_THREADS.load(Ordering::Relaxed)
}

/// A Dat borrowed either for reading only or for modification.
#[derive(Debug)]
pub enum DatRef<'a> {
    Shared(&'a Dat),
    Exclusive(&'a mut Dat),
}

impl DatRef<'_> {
    pub fn get(&self) -> &Dat {
        match self {
            DatRef::Shared(d) => d,
            DatRef::Exclusive(d) => d,
        }
    }
}

#[derive(Debug)]
pub enum GlobalRef<'a> {
    Shared(&'a Global),
    Exclusive(&'a mut Global),
}

impl GlobalRef<'_> {
    pub fn get(&self) -> &Global {
        match self {
            GlobalRef::Shared(g) => g,
            GlobalRef::Exclusive(g) => g,
        }
    }
}

#[derive(Debug)]
pub enum Target<'a> {
    Dat(DatRef<'a>),
    Mat(&'a mut Mat),
    Global(GlobalRef<'a>),
}

/// One kernel argument: a data target, its access descriptor and the maps
/// through which it is reached.
#[derive(Debug)]
pub struct Arg<'a> {
    target: Target<'a>,
    access: Access,
    maps: Vec<Map>,
}

impl<'a> Arg<'a> {
    /// A Dat the kernel only reads.
    pub fn read(dat: &'a Dat) -> Self {
        Arg {
            target: Target::Dat(DatRef::Shared(dat)),
            access: Access::Read,
            maps: vec![],
        }
    }

    /// A Dat with an arbitrary access descriptor.
    pub fn dat(dat: &'a mut Dat, access: Access) -> Self {
        Arg {
            target: Target::Dat(DatRef::Exclusive(dat)),
            access,
            maps: vec![],
        }
    }

    /// A Dat passed by shared reference with an arbitrary descriptor. Only
    /// `READ` validates; anything else is rejected by [`Parloop::validate`].
    pub fn dat_shared(dat: &'a Dat, access: Access) -> Self {
        Arg {
            target: Target::Dat(DatRef::Shared(dat)),
            access,
            maps: vec![],
        }
    }

    pub fn mat(mat: &'a mut Mat, access: Access, rows: &Map, cols: &Map) -> Self {
        Arg {
            target: Target::Mat(mat),
            access,
            maps: vec![rows.clone(), cols.clone()],
        }
    }

    pub fn global(global: &'a mut Global, access: Access) -> Self {
        Arg {
            target: Target::Global(GlobalRef::Exclusive(global)),
            access,
            maps: vec![],
        }
    }

    pub fn global_read(global: &'a Global) -> Self {
        Arg {
            target: Target::Global(GlobalRef::Shared(global)),
            access: Access::Read,
            maps: vec![],
        }
    }

    /// Reaches the target indirectly through `map`.
    pub fn via(mut self, map: &Map) -> Self {
        self.maps.push(map.clone());
        self
    }

    pub fn access(&self) -> Access {
        self.access
    }

    pub fn maps(&self) -> &[Map] {
        &self.maps
    }

    pub fn target(&self) -> &Target<'a> {
        &self.target
    }
}

/// A kernel applied over an iteration set.
#[derive(Debug)]
pub struct Parloop<'a> {
    kernel: &'a Kernel,
    iterset: Set,
    args: Vec<Arg<'a>>,
}

impl<'a> Parloop<'a> {
    pub fn new(kernel: &'a Kernel, iterset: &Set, args: Vec<Arg<'a>>) -> Self {
        Parloop {
            kernel,
            iterset: iterset.clone(),
            args,
        }
    }

    pub fn iterset(&self) -> &Set {
        &self.iterset
    }

    pub fn args(&self) -> &[Arg<'a>] {
        &self.args
    }

    /// Length of the staged buffer handed to the kernel for each argument.
    pub fn staged_lens(&self) -> Result<Vec<usize>> {
        self.args.iter().map(staged_len).collect()
    }

    /// Checks every argument and the kernel signature without touching data.
    pub fn validate(&self) -> Result<()> {
        for (k, arg) in self.args.iter().enumerate() {
            validate_arg(k, arg, &self.iterset)?;
        }
        self.kernel.check_args(&self.staged_lens()?)
    }

    /// Executes with the process-wide default worker count.
    pub fn run(self) -> Result<()> {
        self.execute(default_threads())
    }

    /// Executes with `threads` workers. All Dat and Mat results are bitwise
    /// identical for every `threads >= 1`.
    pub fn execute(mut self, threads: usize) -> Result<()> {
        self.validate()?;
        exec::execute(&mut self, threads.max(1))
    }

    /// Executes sequentially, visiting entities in the given order. The
    /// iteration set is unordered, so any permutation is a legal schedule.
    pub fn execute_in_order(mut self, order: &[usize]) -> Result<()> {
        self.validate()?;
        let n = self.iterset.size();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&e| e >= n || std::mem::replace(&mut seen[e], true)) {
            return Err(Error::ShapeMismatch(
                "iteration order is not a permutation of the iteration set".into(),
            ));
        }
        exec::execute_sequential(&mut self, order)
    }
}

fn mat_block_dims(mat: &Mat, rows: &Map, cols: &Map) -> Result<(usize, usize)> {
    let dim_of = |space: Option<&(Set, usize)>, n: usize, map: &Map, what: &str| -> Result<usize> {
        match space {
            Some((set, dim)) => {
                if set != map.target() {
                    return Err(Error::MapSourceMismatch(format!(
                        "Mat {what} are indexed by `{}` but map `{}` targets `{}`",
                        set.name(),
                        map.name(),
                        map.target().name()
                    )));
                }
                Ok(*dim)
            }
            None => {
                let t = map.target().size();
                if t == 0 || n % t != 0 {
                    return Err(Error::ShapeMismatch(format!(
                        "Mat has {n} {what}, not a multiple of map target size {t}"
                    )));
                }
                Ok(n / t)
            }
        }
    };
    let rd = dim_of(mat.sparsity().row_space(), mat.nrows(), rows, "rows")?;
    let cd = dim_of(mat.sparsity().col_space(), mat.ncols(), cols, "columns")?;
    Ok((rd, cd))
}

fn staged_len(arg: &Arg<'_>) -> Result<usize> {
    Ok(match &arg.target {
        Target::Dat(d) => d.get().dim() * arg.maps.first().map_or(1, Map::arity),
        Target::Global(g) => g.get().dim(),
        Target::Mat(m) => {
            if arg.maps.len() != 2 {
                return Err(Error::IllegalAccess(format!(
                    "Mat arguments need exactly two maps, got {}",
                    arg.maps.len()
                )));
            }
            let (rd, cd) = mat_block_dims(m, &arg.maps[0], &arg.maps[1])?;
            arg.maps[0].arity() * rd * arg.maps[1].arity() * cd
        }
    })
}

fn validate_arg(k: usize, arg: &Arg<'_>, iterset: &Set) -> Result<()> {
    let access = arg.access;
    for m in &arg.maps {
        if m.source() != iterset {
            return Err(Error::MapSourceMismatch(format!(
                "argument {k}: map `{}` has source `{}`, loop iterates over `{}`",
                m.name(),
                m.source().name(),
                iterset.name()
            )));
        }
    }
    match &arg.target {
        Target::Dat(d) => {
            if !matches!(access, Access::Read | Access::Write | Access::Rw | Access::Inc) {
                return Err(Error::IllegalAccess(format!(
                    "argument {k}: {access} is not a Dat access descriptor"
                )));
            }
            if access.modifies() && matches!(d, DatRef::Shared(_)) {
                return Err(Error::IllegalAccess(format!(
                    "argument {k}: Dat `{}` is borrowed read-only but accessed as {access}",
                    d.get().name()
                )));
            }
            match arg.maps.as_slice() {
                [] if d.get().set() != iterset => Err(Error::MapSourceMismatch(format!(
                    "argument {k}: direct Dat `{}` lives on `{}`, loop iterates over `{}`",
                    d.get().name(),
                    d.get().set().name(),
                    iterset.name()
                ))),
                [] => Ok(()),
                [m] if m.target() != d.get().set() => Err(Error::MapSourceMismatch(format!(
                    "argument {k}: map `{}` targets `{}` but Dat `{}` lives on `{}`",
                    m.name(),
                    m.target().name(),
                    d.get().name(),
                    d.get().set().name()
                ))),
                [_] => Ok(()),
                _ => Err(Error::IllegalAccess(format!(
                    "argument {k}: Dat arguments take at most one map"
                ))),
            }
        }
        Target::Mat(m) => {
            if !matches!(access, Access::Write | Access::Inc) {
                return Err(Error::IllegalAccess(format!(
                    "argument {k}: Mats are write-only; only WRITE and INC are permitted, got {access}"
                )));
            }
            if arg.maps.len() != 2 {
                return Err(Error::IllegalAccess(format!(
                    "argument {k}: Mat arguments need exactly two maps, got {}",
                    arg.maps.len()
                )));
            }
            mat_block_dims(m, &arg.maps[0], &arg.maps[1]).map(|_| ())
        }
        Target::Global(g) => {
            if !matches!(access, Access::Read | Access::Sum | Access::Min | Access::Max) {
                return Err(Error::IllegalAccess(format!(
                    "argument {k}: {access} is not permitted for Globals (READ, SUM, MIN, MAX)"
                )));
            }
            if access.is_reduction() && matches!(g, GlobalRef::Shared(_)) {
                return Err(Error::IllegalAccess(format!(
                    "argument {k}: Global `{}` is borrowed read-only but reduced with {access}",
                    g.get().name()
                )));
            }
            if !arg.maps.is_empty() {
                return Err(Error::IllegalAccess(format!(
                    "argument {k}: Globals are not accessed through maps"
                )));
            }
            Ok(())
        }
    }
}
