use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::{mat_block_dims, Arg, DatRef, GlobalRef, Parloop, Target};
use crate::data::Access;
use crate::error::{Error, Result};
use crate::kernel_ir::{Kernel, Scratch};
use crate::topology::{color_iteration, Coloring, Map, Set};

type ColoringKey = (u64, Vec<u64>);

/// A colouring together with its colour-major entity order.
#[derive(Debug)]
pub struct Schedule {
    pub coloring: Coloring,
    pub order: Vec<usize>,
    pub offsets: Vec<usize>,
}

/// Colours `iterset` against `maps`, memoised on the identities of the set
/// and the maps.
pub fn cached_coloring(iterset: &Set, maps: &[Map]) -> Result<Arc<Schedule>> {
    static CACHE: OnceLock<Mutex<HashMap<ColoringKey, Arc<Schedule>>>> = OnceLock::new();
    let mut ids: Vec<u64> = maps.iter().map(Map::id).collect();
    ids.sort_unstable();
    ids.dedup();
    let key = (iterset.id(), ids);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(s) = cache.lock().unwrap().get(&key) {
        return Ok(s.clone());
    }
    let coloring = color_iteration(iterset, maps)?;
    let (order, offsets) = coloring.color_major_order();
    let s = Arc::new(Schedule {
        coloring,
        order,
        offsets,
    });
    cache.lock().unwrap().insert(key, s.clone());
    Ok(s)
}

fn pool(threads: usize) -> Result<Arc<rayon::ThreadPool>> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS.get_or_init(Default::default).lock().unwrap();
    if let Some(p) = pools.get(&threads) {
        return Ok(p.clone());
    }
    let p = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Arc::new)
        .map_err(|e| Error::InvalidKernel(format!("cannot start worker pool: {e}")))?;
    pools.insert(threads, p.clone());
    Ok(p)
}

/// Arguments whose staged buffer outlives the kernel call.
fn is_output(arg: &Arg<'_>) -> bool {
    match arg.target {
        Target::Dat(_) => arg.access.modifies(),
        Target::Mat(_) => true,
        Target::Global(_) => arg.access.is_reduction(),
    }
}

struct Layout {
    lens: Vec<usize>,
    stride: usize,
    input_len: usize,
}

impl Layout {
    fn new(args: &[Arg<'_>], lens: Vec<usize>) -> Layout {
        let mut stride = 0;
        let mut input_len = 0;
        for (a, &l) in args.iter().zip(&lens) {
            if is_output(a) {
                stride += l;
            } else {
                input_len += l;
            }
        }
        Layout {
            lens,
            stride,
            input_len,
        }
    }
}

fn gather(data: &[f64], dim: usize, map: Option<&Map>, e: usize, buf: &mut [f64]) {
    match map {
        None => buf.copy_from_slice(&data[e * dim..(e + 1) * dim]),
        Some(m) => {
            for (k, &t) in m.row(e).iter().enumerate() {
                buf[k * dim..(k + 1) * dim].copy_from_slice(&data[t * dim..(t + 1) * dim]);
            }
        }
    }
}

/// Stages every argument for entity `e`, runs the kernel and leaves the
/// output stages in `out`.
fn compute_entity(
    kernel: &Kernel,
    args: &[Arg<'_>],
    layout: &Layout,
    e: usize,
    out: &mut [f64],
    inputs: &mut [f64],
    scratch: &mut Scratch,
) -> Result<()> {
    let mut o = 0;
    let mut i = 0;
    for (arg, &len) in args.iter().zip(&layout.lens) {
        if is_output(arg) {
            let buf = &mut out[o..o + len];
            o += len;
            match (&arg.target, arg.access) {
                (Target::Dat(d), Access::Rw) => {
                    let d = d.get();
                    gather(d.data(), d.dim(), arg.maps.first(), e, buf)
                }
                (Target::Global(_), mode) => buf.fill(mode.identity()),
                _ => buf.fill(0.0),
            }
        } else {
            let buf = &mut inputs[i..i + len];
            i += len;
            match &arg.target {
                Target::Dat(d) => {
                    let d = d.get();
                    gather(d.data(), d.dim(), arg.maps.first(), e, buf)
                }
                Target::Global(g) => buf.copy_from_slice(g.get().value()),
                Target::Mat(_) => unreachable!("Mats are always outputs"),
            }
        }
    }

    let mut out_rest: &mut [f64] = out;
    let mut in_rest: &mut [f64] = inputs;
    let mut bufs: Vec<&mut [f64]> = Vec::with_capacity(args.len());
    for (arg, &len) in args.iter().zip(&layout.lens) {
        let rest = if is_output(arg) {
            &mut out_rest
        } else {
            &mut in_rest
        };
        let (head, tail) = std::mem::take(rest).split_at_mut(len);
        *rest = tail;
        bufs.push(head);
    }
    kernel.invoke(scratch, e, &mut bufs)
}

/// Global row and column indices of the block produced by entity `e`.
fn block_indices(m: &Map, dim: usize, e: usize, out: &mut Vec<usize>) {
    out.clear();
    for &t in m.row(e) {
        out.extend(t * dim..(t + 1) * dim);
    }
}

/// Applies one entity's outputs in place. Global partials are folded only
/// when `globals` is set.
fn scatter_entity(
    args: &mut [Arg<'_>],
    layout: &Layout,
    e: usize,
    slot: &[f64],
    globals: bool,
) -> Result<()> {
    let mut o = 0;
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for (arg, &len) in args.iter_mut().zip(&layout.lens) {
        if !is_output(arg) {
            continue;
        }
        let stage = &slot[o..o + len];
        o += len;
        let access = arg.access;
        match &mut arg.target {
            Target::Dat(DatRef::Exclusive(d)) => {
                let dim = d.dim();
                let data = d.data_mut();
                scatter_dat(data, dim, arg.maps.first(), e, stage, access);
            }
            Target::Mat(m) => {
                let (rd, cd) = mat_block_dims(m, &arg.maps[0], &arg.maps[1])?;
                block_indices(&arg.maps[0], rd, e, &mut rows);
                block_indices(&arg.maps[1], cd, e, &mut cols);
                m.addto(&rows, &cols, stage, access)?;
            }
            Target::Global(GlobalRef::Exclusive(g)) => {
                if !globals {
                    continue;
                }
                for (v, &p) in g.value_mut().iter_mut().zip(stage) {
                    *v = access.combine(*v, p);
                }
            }
            _ => unreachable!("validated: outputs are exclusive"),
        }
    }
    Ok(())
}

fn fold_globals(args: &mut [Arg<'_>], layout: &Layout, slot: &[f64]) {
    let mut o = 0;
    for (arg, &len) in args.iter_mut().zip(&layout.lens) {
        if !is_output(arg) {
            continue;
        }
        if let Target::Global(GlobalRef::Exclusive(g)) = &mut arg.target {
            for (v, &p) in g.value_mut().iter_mut().zip(&slot[o..o + len]) {
                *v = arg.access.combine(*v, p);
            }
        }
        o += len;
    }
}

fn scatter_dat(data: &mut [f64], dim: usize, map: Option<&Map>, e: usize, stage: &[f64], access: Access) {
    let targets: &[usize] = match map {
        Some(m) => m.row(e),
        None => std::slice::from_ref(&e),
    };
    for (k, &t) in targets.iter().enumerate() {
        let dst = &mut data[t * dim..(t + 1) * dim];
        let src = &stage[k * dim..(k + 1) * dim];
        if access == Access::Inc {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        } else {
            dst.copy_from_slice(src);
        }
    }
}

/// RW through a map that hits some target twice makes later entities read
/// values written by earlier ones, so those loops must run in place.
fn needs_in_place(args: &[Arg<'_>]) -> bool {
    args.iter().any(|a| {
        matches!(a.target, Target::Dat(_))
            && a.access == Access::Rw
            && a.maps.first().is_some_and(|m| !m.is_injective())
    })
}

fn conflict_maps(args: &[Arg<'_>]) -> Vec<Map> {
    let mut maps = Vec::new();
    for a in args {
        match a.target {
            Target::Dat(_) if a.access == Access::Inc => maps.extend(a.maps.first().cloned()),
            Target::Mat(_) if a.access == Access::Inc => maps.push(a.maps[0].clone()),
            _ => {}
        }
    }
    maps
}

pub(super) fn execute_sequential(pl: &mut Parloop<'_>, order: &[usize]) -> Result<()> {
    let layout = Layout::new(&pl.args, pl.staged_lens()?);
    let mut slot = vec![0.0; layout.stride];
    let mut inputs = vec![0.0; layout.input_len];
    let mut scratch = Scratch::default();
    for &e in order {
        compute_entity(pl.kernel, &pl.args, &layout, e, &mut slot, &mut inputs, &mut scratch)?;
        scatter_entity(&mut pl.args, &layout, e, &slot, true)?;
    }
    Ok(())
}

pub(super) fn execute(pl: &mut Parloop<'_>, threads: usize) -> Result<()> {
    let n = pl.iterset.size();
    if needs_in_place(&pl.args) {
        let order: Vec<usize> = (0..n).collect();
        return execute_sequential(pl, &order);
    }
    let layout = Layout::new(&pl.args, pl.staged_lens()?);
    let schedule = cached_coloring(&pl.iterset, &conflict_maps(&pl.args))?;
    // every entity gets a slot; a zero stride still needs distinct chunks
    let stride = layout.stride.max(1);
    let mut arena = vec![0.0; n * stride];

    {
        let kernel = pl.kernel;
        let args = &pl.args;
        let layout = &layout;
        let run_chunk = |ents: &[usize], slab: &mut [f64]| -> Result<()> {
            let mut inputs = vec![0.0; layout.input_len];
            let mut scratch = Scratch::default();
            for (k, &e) in ents.iter().enumerate() {
                let out = &mut slab[k * stride..k * stride + layout.stride];
                compute_entity(kernel, args, layout, e, out, &mut inputs, &mut scratch)?;
            }
            Ok(())
        };
        let workers = if threads > 1 { Some(pool(threads)?) } else { None };
        let offs = &schedule.offsets;
        for c in 0..offs.len() - 1 {
            let ents = &schedule.order[offs[c]..offs[c + 1]];
            let slab = &mut arena[offs[c] * stride..offs[c + 1] * stride];
            match &workers {
                Some(p) if ents.len() > 1 => {
                    let chunk = ents.len().div_ceil(threads);
                    p.install(|| {
                        ents.par_chunks(chunk)
                            .zip(slab.par_chunks_mut(chunk * stride))
                            .try_for_each(|(es, sl)| run_chunk(es, sl))
                    })?;
                }
                _ => run_chunk(ents, slab)?,
            }
        }
    }

    // Nothing has been modified yet; check Mat blocks up front so a bad
    // pattern leaves every target untouched.
    let mut rows = Vec::new();
    let mut cols = Vec::new();
    for arg in pl.args.iter() {
        if let Target::Mat(m) = &arg.target {
            let (rd, cd) = mat_block_dims(m, &arg.maps[0], &arg.maps[1])?;
            for e in 0..n {
                block_indices(&arg.maps[0], rd, e, &mut rows);
                block_indices(&arg.maps[1], cd, e, &mut cols);
                for &r in &rows {
                    for &c in &cols {
                        if m.sparsity().position(r, c).is_none() {
                            return Err(Error::OutsideSparsity { row: r, col: c });
                        }
                    }
                }
            }
        }
    }

    let mut slot_of = vec![0; n];
    for (k, &e) in schedule.order.iter().enumerate() {
        slot_of[e] = k;
    }
    for (e, &k) in slot_of.iter().enumerate() {
        let slot = &arena[k * stride..k * stride + layout.stride];
        scatter_entity(&mut pl.args, &layout, e, slot, false)?;
    }
    // Global partials fold colour-major, entity-ascending within a colour
    if pl.args.iter().any(|a| matches!(a.target, Target::Global(_)) && is_output(a)) {
        for k in 0..n {
            let slot = &arena[k * stride..k * stride + layout.stride];
            fold_globals(&mut pl.args, &layout, slot);
        }
    }
    Ok(())
}
