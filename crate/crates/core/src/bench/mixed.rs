use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{seconds_since, Check, PhaseTimes, RunReport};
use crate::error::Result;
use crate::fem::{assemble_mixed, assemble_monolithic, FormKind, FunctionSpace, MixedForm, MixedSpace};
use crate::mesh::unit_square_mesh;
use crate::solver::block_spmv;

/// Outcome of comparing blockwise and monolithic assembly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedCheck {
    /// Largest entrywise difference of the two matrices.
    pub max_discrepancy: f64,
    /// Whether the nested and monolithic products agree bit for bit.
    pub spmv_bitwise: bool,
}

/// Assembles a P1 x P2 mass system (diagonal blocks only) on
/// `unit_square_mesh(n)` both blockwise and monolithically and compares the
/// matrices and their products with a seeded random vector.
pub fn run_mixed_check(n: usize) -> Result<(RunReport, MixedCheck)> {
    let start = Instant::now();
    let mesh = Arc::new(unit_square_mesh(n)?);
    let v = FunctionSpace::new(&mesh, 1)?;
    let q = FunctionSpace::new(&mesh, 2)?;
    let w = MixedSpace::new(&v, &q)?;
    let form = MixedForm::new(&w, &w).with_block(0, 0, FormKind::Mass).with_block(1, 1, FormKind::Mass);

    let t = Instant::now();
    let nested = assemble_mixed(&form)?;
    let assemble_lhs = seconds_since(t);
    let mono = assemble_monolithic(&form)?;

    let (a, b) = (nested.to_dense(), mono.to_dense());
    let max_discrepancy = a
        .iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));

    let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
    let x: Vec<f64> = (0..w.num_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let (x0, x1) = w.split(&x);
    let (y0, y1) = block_spmv(&nested, (x0, x1))?;
    let y = mono.spmv(&x)?;
    let spmv_bitwise = y0.iter().chain(&y1).zip(&y).all(|(u, v)| u.to_bits() == v.to_bits());

    let check = MixedCheck {
        max_discrepancy,
        spmv_bitwise,
    };
    let report = RunReport {
        case: "mixed".into(),
        n,
        dofs: w.num_nodes(),
        degree: 2,
        threads: crate::parloop::default_threads(),
        times: PhaseTimes {
            assemble_lhs,
            total: seconds_since(start),
            ..Default::default()
        },
        checks: vec![
            Check::within("max_discrepancy", max_discrepancy, 0.0, 1e-12),
            Check::flag("spmv_bitwise", spmv_bitwise),
        ],
        ..Default::default()
    };
    Ok((report, check))
}
