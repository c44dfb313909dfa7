//! Sets, maps and the parallel loop engine on a hand-built mesh graph:
//! an indirect increment, a Global reduction, and bitwise equal results for
//! every thread count.

use opfem::data::{Access, Dat, Global};
use opfem::kernel_ir::Kernel;
use opfem::parloop::{cached_coloring, Arg, Parloop};
use opfem::topology::{Map, Set};

fn main() -> opfem::Result<()> {
    // a ring of 12 edges over 12 nodes
    let nodes = Set::new("nodes", 12);
    let edges = Set::new("edges", 12);
    let e2n = Map::new("edge_nodes", &edges, &nodes, 2, (0..12).flat_map(|e| [e, (e + 1) % 12]).collect())?;
    let x = Dat::from_vec("x", &nodes, 1, (0..12).map(|i| (i as f64).sqrt()).collect())?;

    // each edge sends its length to both ends and the longest edge wins
    let k = Kernel::from_host("edge", Some(vec![2, 1, 2]), |_, a| {
        let len = (a[2][1] - a[2][0]).abs();
        a[0][0] += 0.5 * len;
        a[0][1] += 0.5 * len;
        a[1][0] = a[1][0].max(len);
    });
    let schedule = cached_coloring(&edges, std::slice::from_ref(&e2n))?;
    println!("{} colours", schedule.coloring.num_colors());

    let mut results = Vec::new();
    for threads in [1, 2, 4, 8] {
        let mut w = Dat::zeros("w", &nodes, 1);
        let mut longest = Global::scalar("longest", f64::NEG_INFINITY);
        Parloop::new(
            &k,
            &edges,
            vec![
                Arg::dat(&mut w, Access::Inc).via(&e2n),
                Arg::global(&mut longest, Access::Max),
                Arg::read(&x).via(&e2n),
            ],
        )
        .execute(threads)?;
        results.push((w.into_vec(), longest.get()));
    }
    let same = results.iter().all(|r| r.0.iter().zip(&results[0].0).all(|(a, b)| a.to_bits() == b.to_bits()));
    println!("w = {:?}", results[0].0);
    println!("longest edge {}; identical for 1, 2, 4, 8 threads: {same}", results[0].1);
    Ok(())
}
