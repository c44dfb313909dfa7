//! Manufactured Poisson problem `-lap u = 2 pi^2 sin(pi x) sin(pi y)` on the
//! unit square, solved with P1 and P2 elements on a sequence of meshes.
//!
//! Run with `cargo run --release --example poisson`.

use opfem::bench::solve_poisson;

fn main() -> opfem::Result<()> {
    for degree in [1, 2] {
        println!("P{degree}");
        let mut prev: Option<(usize, f64)> = None;
        for n in [8, 16, 32] {
            let sol = solve_poisson(2, degree, n)?;
            let rate = prev.map(|(n0, e0)| (e0 / sol.l2_error).ln() / (n as f64 / n0 as f64).ln());
            println!(
                "  n={n:<3} dofs={:<5} cg its={:<4} l2 error={:.3e} {}",
                sol.space.num_nodes(),
                sol.solve.iterations,
                sol.l2_error,
                rate.map(|r| format!("rate={r:.2}")).unwrap_or_default()
            );
            prev = Some((n, sol.l2_error));
        }
    }
    Ok(())
}
