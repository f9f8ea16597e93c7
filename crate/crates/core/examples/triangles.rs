//! Incremental triangle bookkeeping on a churning graph, checked against a
//! full recount after every batch of changes.

use netabc::graph::Graph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> netabc::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut g = Graph::complete(5);
    println!("K5: {} triangles", g.triangle_count());

    for round in 0..5 {
        for _ in 0..200 {
            let n = g.node_count();
            match rng.random_range(0..3) {
                0 => {
                    let picks: Vec<usize> = (0..n).filter(|_| rng.random_bool(0.1)).collect();
                    g.add_node_with_edges(&picks)?;
                }
                1 => {
                    let (u, v) = (rng.random_range(0..n), rng.random_range(0..n));
                    if u != v && !g.has_edge(u, v) {
                        g.add_edge(u, v)?;
                    }
                }
                _ => {
                    let edges = g.edges();
                    if !edges.is_empty() {
                        let (u, v) = edges[rng.random_range(0..edges.len())];
                        g.remove_edge(u, v)?;
                    }
                }
            }
        }
        println!(
            "round {round}: nodes={} edges={} maintained={} recount={}",
            g.node_count(),
            g.edge_count(),
            g.triangle_count(),
            g.count_triangles()
        );
        assert_eq!(g.triangle_count(), g.count_triangles());
    }
    Ok(())
}
