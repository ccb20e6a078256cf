//! Maximal packing V_{R,r} of a ball in Z^2, its covering check, the
//! cardinality bounds and the container radii.
use qgraph::covering::{cardinality_bounds, container_radii, maximal_packing, verify_covering, verify_packing};
use qgraph::graph::{build_lattice_graph, estimate_growth};

fn main() -> qgraph::Result<()> {
    let g = build_lattice_graph(2, 40, 1.0)?;
    let o = g.vertex_at(&[0, 0]).unwrap();
    let growth = estimate_growth(&g, &[o], &(1..=30).map(f64::from).collect::<Vec<_>>())?;
    for (big_r, r) in [(30.0, 3.0), (30.0, 6.0)] {
        let p = maximal_packing(&g, o, big_r, r)?;
        let (lo, hi) = cardinality_bounds(big_r, r, g.big_u(), growth.c_p, growth.d);
        println!(
            "R = {big_r}, r = {r}: {} centers in [{lo:.2}, {hi:.1}], packing ok {}, covers {}",
            p.len(),
            verify_packing(&g, &p).ok(),
            verify_covering(&g, o, big_r, r, &p).ok
        );
    }
    println!("container radii at r = 24: {:?}", container_radii(24.0, 1.0));
    Ok(())
}
