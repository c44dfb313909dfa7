//! Mesh text round trip and reverse Cuthill-McKee renumbering.

use std::sync::Arc;

use opfem::fem::FunctionSpace;
use opfem::mesh::{parse_mesh, rectangle_mesh, Mesh};

fn csr_bandwidth(mesh: Mesh) -> opfem::Result<usize> {
    Ok(FunctionSpace::new(&Arc::new(mesh), 1)?.sparsity()?.bandwidth())
}

fn main() -> opfem::Result<()> {
    // a tall strip numbered along its long side has a wide band
    let mesh = rectangle_mesh(3, 40, 3.0, 40.0)?;
    let text = mesh.to_text();
    let back = parse_mesh(&text)?;
    println!(
        "{} vertices, {} cells, {} exterior facets; text round trip {} bytes",
        back.vertices().size(),
        back.cells().size(),
        back.exterior_facets().size(),
        text.len()
    );

    let (re, order) = back.reorder()?;
    println!("first vertices in RCM order: {:?}", &order[..8]);
    println!("vertex bandwidth {} -> {}", back.vertex_bandwidth(), re.vertex_bandwidth());
    println!("CSR bandwidth    {} -> {}", csr_bandwidth(back)?, csr_bandwidth(re)?);
    Ok(())
}
