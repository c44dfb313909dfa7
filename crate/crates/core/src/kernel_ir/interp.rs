//! Reference semantics for kernels.
//!
//! A [`KernelAst`] is resolved once into a [`Program`]: identifiers become
//! offsets into a flat workspace, subscripts become affine offset
//! expressions, and every subscript is checked against its extents over the
//! full range of the enclosing loops. Execution is then a plain tree walk that
//! evaluates operands left to right, loops ascending.

use std::collections::{HashMap, HashSet};

use super::ast::{Decl, Expr, Index, Init, KernelAst, Place, Stmt};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
struct Slot {
    base: usize,
    extents: Vec<usize>,
    storage: Vec<usize>,
    /// Storage offset of each logical element, when the layout is padded.
    scatter: Option<Vec<usize>>,
}

impl Slot {
    fn new(base: usize, extents: &[usize], storage: &[usize]) -> Result<Slot> {
        if extents.len() != storage.len() || extents.iter().zip(storage).any(|(e, s)| s < e) {
            return Err(Error::InvalidKernel(format!(
                "storage {storage:?} cannot hold extents {extents:?}"
            )));
        }
        let scatter = (extents != storage).then(|| logical_offsets(extents, storage));
        Ok(Slot {
            base,
            extents: extents.to_vec(),
            storage: storage.to_vec(),
            scatter,
        })
    }

    fn storage_len(&self) -> usize {
        self.storage.iter().product()
    }

    fn logical_len(&self) -> usize {
        self.extents.iter().product()
    }

    fn strides(&self) -> Vec<i64> {
        let mut strides = vec![1i64; self.storage.len()];
        for d in (0..self.storage.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * self.storage[d + 1] as i64;
        }
        strides
    }
}

/// Storage offsets of every logical element, row-major.
pub(crate) fn logical_offsets(extents: &[usize], storage: &[usize]) -> Vec<usize> {
    let total: usize = extents.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; extents.len()];
    for _ in 0..total {
        let mut off = 0;
        for d in 0..extents.len() {
            off = off * storage[d] + idx[d];
        }
        out.push(off);
        for d in (0..extents.len()).rev() {
            idx[d] += 1;
            if idx[d] < extents[d] {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

#[derive(Debug, Clone)]
struct Offset {
    constant: i64,
    terms: Vec<(usize, i64)>,
}

impl Offset {
    #[inline]
    fn eval(&self, vars: &[i64]) -> usize {
        let mut o = self.constant;
        for &(v, c) in &self.terms {
            o += c * vars[v];
        }
        o as usize
    }
}

#[derive(Debug, Clone)]
enum Op {
    Lit(f64),
    Load(Offset),
    Add(Box<Op>, Box<Op>),
    Sub(Box<Op>, Box<Op>),
    Mul(Box<Op>, Box<Op>),
    Div(Box<Op>, Box<Op>),
    Neg(Box<Op>),
    Sqrt(Box<Op>),
    Sin(Box<Op>),
    Cos(Box<Op>),
}

impl Op {
    #[inline]
    fn eval(&self, ws: &[f64], vars: &[i64]) -> f64 {
        match self {
            Op::Lit(v) => *v,
            Op::Load(o) => ws[o.eval(vars)],
            Op::Add(a, b) => {
                let x = a.eval(ws, vars);
                x + b.eval(ws, vars)
            }
            Op::Sub(a, b) => {
                let x = a.eval(ws, vars);
                x - b.eval(ws, vars)
            }
            Op::Mul(a, b) => {
                let x = a.eval(ws, vars);
                x * b.eval(ws, vars)
            }
            Op::Div(a, b) => {
                let x = a.eval(ws, vars);
                x / b.eval(ws, vars)
            }
            Op::Neg(a) => -a.eval(ws, vars),
            Op::Sqrt(a) => a.eval(ws, vars).sqrt(),
            Op::Sin(a) => a.eval(ws, vars).sin(),
            Op::Cos(a) => a.eval(ws, vars).cos(),
        }
    }
}

#[derive(Debug, Clone)]
enum Instr {
    For {
        var: usize,
        lo: i64,
        hi: i64,
        body: Vec<Instr>,
    },
    Store {
        at: Offset,
        value: Op,
        accumulate: bool,
    },
    Zero {
        base: usize,
        len: usize,
    },
    Fill {
        base: usize,
        values: Vec<f64>,
    },
}

/// A resolved kernel ready for repeated execution.
#[derive(Debug, Clone)]
pub struct Program {
    workspace_len: usize,
    num_vars: usize,
    params: Vec<Slot>,
    body: Vec<Instr>,
}

#[derive(Clone)]
enum Binding {
    Array(Slot),
    Var { slot: usize, lo: i64, hi: i64 },
}

struct Compiler {
    scopes: Vec<HashMap<String, Binding>>,
    declared: HashSet<String>,
    workspace_len: usize,
    num_vars: usize,
    live_vars: usize,
    /// False while compiling inside a loop with no iterations.
    reachable: bool,
}

impl Compiler {
    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn alloc(&mut self, extents: &[usize], storage: &[usize]) -> Result<Slot> {
        let slot = Slot::new(self.workspace_len, extents, storage)?;
        self.workspace_len += slot.storage_len();
        Ok(slot)
    }

    fn declare(&mut self, name: &str, binding: Binding) -> Result<()> {
        if self.lookup(name).is_some() || !self.declared.insert(name.to_string()) {
            return Err(Error::InvalidKernel(format!("`{name}` declared twice")));
        }
        self.scopes.last_mut().unwrap().insert(name.to_string(), binding);
        Ok(())
    }

    fn offset(&self, place: &Place) -> Result<Offset> {
        let slot = match self.lookup(&place.name) {
            Some(Binding::Array(s)) => s.clone(),
            Some(Binding::Var { .. }) => {
                return Err(Error::InvalidKernel(format!(
                    "loop variable `{}` used as a value",
                    place.name
                )))
            }
            None => return Err(Error::UnboundIdentifier(place.name.clone())),
        };
        if place.index.len() != slot.extents.len() {
            return Err(Error::ShapeMismatch(format!(
                "`{}` has rank {} but is subscripted with {} indices",
                place.name,
                slot.extents.len(),
                place.index.len()
            )));
        }
        let strides = slot.strides();
        let mut off = Offset {
            constant: slot.base as i64,
            terms: Vec::new(),
        };
        for (d, idx) in place.index.iter().enumerate() {
            let (min, max) = self.index_range(idx)?;
            if self.reachable && (min < 0 || max >= slot.extents[d] as i64) {
                return Err(Error::ShapeMismatch(format!(
                    "subscript {d} of `{}` spans [{min}, {max}] outside extent {}",
                    place.name, slot.extents[d]
                )));
            }
            off.constant += strides[d] * idx.offset;
            for (v, c) in &idx.terms {
                let var = match self.lookup(v) {
                    Some(Binding::Var { slot, .. }) => *slot,
                    _ => return Err(Error::UnboundIdentifier(v.clone())),
                };
                off.terms.push((var, strides[d] * c));
            }
        }
        Ok(off)
    }

    fn index_range(&self, idx: &Index) -> Result<(i64, i64)> {
        let (mut min, mut max) = (idx.offset, idx.offset);
        for (v, c) in &idx.terms {
            let (lo, hi) = match self.lookup(v) {
                Some(Binding::Var { lo, hi, .. }) => (*lo, *hi - 1),
                _ => return Err(Error::UnboundIdentifier(v.clone())),
            };
            if *c >= 0 {
                min += c * lo;
                max += c * hi;
            } else {
                min += c * hi;
                max += c * lo;
            }
        }
        Ok((min, max))
    }

    fn expr(&self, e: &Expr) -> Result<Op> {
        let b = |x: &Expr| self.expr(x).map(Box::new);
        Ok(match e {
            Expr::Lit(v) => Op::Lit(*v),
            Expr::Load(p) => Op::Load(self.offset(p)?),
            Expr::Add(x, y) => Op::Add(b(x)?, b(y)?),
            Expr::Sub(x, y) => Op::Sub(b(x)?, b(y)?),
            Expr::Mul(x, y) => Op::Mul(b(x)?, b(y)?),
            Expr::Div(x, y) => Op::Div(b(x)?, b(y)?),
            Expr::Neg(x) => Op::Neg(b(x)?),
            Expr::Sqrt(x) => Op::Sqrt(b(x)?),
            Expr::Sin(x) => Op::Sin(b(x)?),
            Expr::Cos(x) => Op::Cos(b(x)?),
        })
    }

    fn decl(&mut self, d: &Decl, out: &mut Vec<Instr>) -> Result<()> {
        let slot = self.alloc(&d.extents, &d.storage)?;
        match &d.init {
            Init::Zero => out.push(Instr::Zero {
                base: slot.base,
                len: slot.storage_len(),
            }),
            Init::Expr(e) => {
                if !d.extents.is_empty() {
                    return Err(Error::InvalidKernel(format!(
                        "array `{}` cannot be initialised from a scalar expression",
                        d.name
                    )));
                }
                // the initialiser cannot see the name being declared
                let value = self.expr(e)?;
                out.push(Instr::Store {
                    at: Offset {
                        constant: slot.base as i64,
                        terms: vec![],
                    },
                    value,
                    accumulate: false,
                });
            }
            Init::Table(values) => {
                if values.len() != slot.logical_len() {
                    return Err(Error::ShapeMismatch(format!(
                        "table `{}` has {} values for extents {:?}",
                        d.name,
                        values.len(),
                        d.extents
                    )));
                }
                let mut padded = vec![0.0; slot.storage_len()];
                match &slot.scatter {
                    Some(map) => {
                        for (k, &v) in values.iter().enumerate() {
                            padded[map[k]] = v;
                        }
                    }
                    None => padded.copy_from_slice(values),
                }
                out.push(Instr::Fill {
                    base: slot.base,
                    values: padded,
                });
            }
        }
        self.declare(&d.name, Binding::Array(slot))
    }

    fn block(&mut self, stmts: &[Stmt]) -> Result<Vec<Instr>> {
        let mut out = Vec::new();
        for s in stmts {
            match s {
                Stmt::Decl(d) => self.decl(d, &mut out)?,
                Stmt::For(l) => {
                    let var = self.live_vars;
                    self.live_vars += 1;
                    self.num_vars = self.num_vars.max(self.live_vars);
                    self.scopes.push(HashMap::new());
                    if self.lookup(&l.var).is_some() || self.declared.contains(&l.var) {
                        return Err(Error::InvalidKernel(format!(
                            "loop variable `{}` shadows another identifier",
                            l.var
                        )));
                    }
                    self.scopes.last_mut().unwrap().insert(
                        l.var.clone(),
                        Binding::Var {
                            slot: var,
                            lo: l.lo,
                            hi: l.hi,
                        },
                    );
                    let was_reachable = self.reachable;
                    self.reachable &= l.hi > l.lo;
                    let body = self.block(&l.body)?;
                    self.reachable = was_reachable;
                    self.scopes.pop();
                    self.live_vars -= 1;
                    out.push(Instr::For {
                        var,
                        lo: l.lo,
                        hi: l.hi,
                        body,
                    });
                }
                Stmt::Assign { target, value } | Stmt::AddAssign { target, value } => {
                    let value = self.expr(value)?;
                    let at = self.offset(target)?;
                    out.push(Instr::Store {
                        at,
                        value,
                        accumulate: matches!(s, Stmt::AddAssign { .. }),
                    });
                }
            }
        }
        Ok(out)
    }
}

fn exec(instrs: &[Instr], ws: &mut [f64], vars: &mut [i64]) {
    for ins in instrs {
        match ins {
            Instr::For { var, lo, hi, body } => {
                for i in *lo..*hi {
                    vars[*var] = i;
                    exec(body, ws, vars);
                }
            }
            Instr::Store {
                at,
                value,
                accumulate,
            } => {
                let v = value.eval(ws, vars);
                let k = at.eval(vars);
                if *accumulate {
                    ws[k] += v;
                } else {
                    ws[k] = v;
                }
            }
            Instr::Zero { base, len } => ws[*base..*base + *len].fill(0.0),
            Instr::Fill { base, values } => ws[*base..*base + values.len()].copy_from_slice(values),
        }
    }
}

impl Program {
    pub fn compile(ast: &KernelAst) -> Result<Program> {
        let mut c = Compiler {
            scopes: vec![HashMap::new()],
            declared: HashSet::new(),
            workspace_len: 0,
            num_vars: 0,
            live_vars: 0,
            reachable: true,
        };
        let mut params = Vec::new();
        for p in &ast.params {
            let slot = c.alloc(&p.extents, &p.storage)?;
            c.declare(&p.name, Binding::Array(slot.clone()))?;
            params.push(slot);
        }
        let body = c.block(&ast.body)?;
        Ok(Program {
            workspace_len: c.workspace_len,
            num_vars: c.num_vars,
            params,
            body,
        })
    }

    pub fn param_lens(&self) -> Vec<usize> {
        self.params.iter().map(Slot::logical_len).collect()
    }

    pub fn workspace_len(&self) -> usize {
        self.workspace_len
    }

    fn check_args(&self, args: &[&mut [f64]]) -> Result<()> {
        if args.len() != self.params.len() {
            return Err(Error::ShapeMismatch(format!(
                "kernel takes {} arguments, got {}",
                self.params.len(),
                args.len()
            )));
        }
        for (k, (slot, a)) in self.params.iter().zip(args.iter()).enumerate() {
            if a.len() != slot.logical_len() {
                return Err(Error::ShapeMismatch(format!(
                    "argument {k} has {} values, parameter expects {}",
                    a.len(),
                    slot.logical_len()
                )));
            }
        }
        Ok(())
    }

    /// Runs the kernel on `args`, allocating a fresh workspace.
    pub fn run(&self, args: &mut [&mut [f64]]) -> Result<()> {
        let mut scratch = Scratch::default();
        self.run_with(&mut scratch, args)
    }

    /// Runs the kernel reusing `scratch` between calls.
    pub fn run_with(&self, scratch: &mut Scratch, args: &mut [&mut [f64]]) -> Result<()> {
        self.check_args(args)?;
        scratch.ws.clear();
        scratch.ws.resize(self.workspace_len, 0.0);
        scratch.vars.clear();
        scratch.vars.resize(self.num_vars, 0);
        let ws = &mut scratch.ws;
        for (slot, a) in self.params.iter().zip(args.iter()) {
            match &slot.scatter {
                None => ws[slot.base..slot.base + a.len()].copy_from_slice(a),
                Some(map) => {
                    for (k, &v) in a.iter().enumerate() {
                        ws[slot.base + map[k]] = v;
                    }
                }
            }
        }
        exec(&self.body, ws, &mut scratch.vars);
        for (slot, a) in self.params.iter().zip(args.iter_mut()) {
            match &slot.scatter {
                None => a.copy_from_slice(&ws[slot.base..slot.base + a.len()]),
                Some(map) => {
                    for (k, v) in a.iter_mut().enumerate() {
                        *v = ws[slot.base + map[k]];
                    }
                }
            }
        }
        Ok(())
    }
}

/// Reusable interpreter workspace.
#[derive(Debug, Default, Clone)]
pub struct Scratch {
    ws: Vec<f64>,
    vars: Vec<i64>,
}

/// Executes `ast` on `args` in place.
pub fn interpret(ast: &KernelAst, args: &mut [&mut [f64]]) -> Result<()> {
    Program::compile(ast)?.run(args)
}
