//! Lattice and Cayley boxes: sizes, edge lengths and ball volumes.
use qgraph::graph::{build_cayley_graph, build_lattice_graph, estimate_growth};

fn main() -> qgraph::Result<()> {
    let z2 = build_lattice_graph(2, 10, 1.0)?;
    println!("Z^2 box: {} vertices, {} edges, max degree {}", z2.n_vertices(), z2.n_edges(), z2.max_degree());
    let o = z2.vertex_at(&[0, 0]).unwrap();
    for r in [1.0, 2.0, 4.0, 8.0] {
        println!("  |E(0, {r})| = {}", z2.ball_edge_set(o, r)?.len());
    }
    let radii: Vec<f64> = (1..=8).map(f64::from).collect();
    let est = estimate_growth(&z2, &[o], &radii)?;
    println!("  growth: c_P = {:.3}, d = {:.3}", est.c_p, est.d);

    // two generator lengths, so u < U
    let cay = build_cayley_graph(&[(vec![1, 0], 1.0), (vec![0, 1], 1.5)], 8)?;
    println!("Cayley box: {} edges, u = {}, U = {}", cay.n_edges(), cay.u(), cay.big_u());
    Ok(())
}
