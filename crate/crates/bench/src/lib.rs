//! Fixtures shared by the criterion benches.

use depbalance::{AssetType, CreationalEdge, CreationalGraph, DependencyValue, DependencyValueMatrix};

/// A layered DAG of `layers * width` assets where every asset feeds the two
/// nearest assets of the next layer.
pub fn layered_graph(layers: usize, width: usize) -> CreationalGraph {
    let id = |l: usize, w: usize| format!("L{l}W{w}");
    let assets = (0..layers)
        .flat_map(|l| (0..width).map(move |w| (l, w)))
        .map(|(l, w)| AssetType::new(id(l, w), id(l, w)))
        .collect();
    let mut edges = Vec::new();
    for l in 0..layers.saturating_sub(1) {
        for w in 0..width {
            edges.push(CreationalEdge::new(id(l, w), id(l + 1, w), 1));
            if w + 1 < width {
                edges.push(CreationalEdge::new(id(l, w), id(l + 1, w + 1), 1));
            }
        }
    }
    CreationalGraph::new(assets, edges)
}

/// Value 1 on every reachable pair.
pub fn full_matrix(graph: &CreationalGraph) -> DependencyValueMatrix {
    let mut cells = Vec::new();
    for a in graph.assets() {
        for d in graph.descendants(a.id.as_str()).expect("asset from graph") {
            cells.push(DependencyValue::new(a.id.clone(), d, 1));
        }
    }
    DependencyValueMatrix::new(graph, cells).expect("reachable pairs only")
}
