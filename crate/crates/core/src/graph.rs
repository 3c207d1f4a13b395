//! Weighted undirected graphs and shortest paths.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Compressed adjacency for an undirected graph with positive edge lengths.
#[derive(Debug, Clone)]
pub struct Csr {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    lengths: Vec<f64>,
}

impl Csr {
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Self {
        let mut degree = vec![0usize; n];
        for &(a, b, _) in edges {
            degree[a] += 1;
            degree[b] += 1;
        }
        let mut offsets = vec![0usize; n + 1];
        for i in 0..n {
            offsets[i + 1] = offsets[i] + degree[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; offsets[n]];
        let mut lengths = vec![0.0; offsets[n]];
        for &(a, b, w) in edges {
            targets[fill[a]] = b;
            lengths[fill[a]] = w;
            fill[a] += 1;
            targets[fill[b]] = a;
            lengths[fill[b]] = w;
            fill[b] += 1;
        }
        Csr {
            offsets,
            targets,
            lengths,
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.lengths[range].iter().copied())
    }

    /// Single-source shortest path lengths; unreachable nodes get `∞`.
    pub fn dijkstra(&self, source: usize) -> Vec<f64> {
        self.dijkstra_until(source, None)
    }

    /// Shortest path length between two nodes, stopping once `target` settles.
    pub fn distance(&self, source: usize, target: usize) -> f64 {
        self.dijkstra_until(source, Some(target))[target]
    }

    fn dijkstra_until(&self, source: usize, target: Option<usize>) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.node_count()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(State {
            cost: 0.0,
            node: source,
        });
        while let Some(State { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            if Some(node) == target {
                break;
            }
            for (next, w) in self.neighbors(node) {
                let c = cost + w;
                if c < dist[next] {
                    dist[next] = c;
                    heap.push(State { cost: c, node: next });
                }
            }
        }
        dist
    }

    /// Nodes reachable from `source`.
    pub fn component_of(&self, source: usize) -> Vec<bool> {
        let mut seen = vec![false; self.node_count()];
        let mut stack = vec![source];
        seen[source] = true;
        while let Some(v) = stack.pop() {
            for (w, _) in self.neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen
    }
}

#[derive(Clone, Copy, PartialEq)]
struct State {
    cost: f64,
    node: usize,
}

impl Eq for State {}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| self.node.cmp(&other.node))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// In-place Floyd–Warshall closure of a dense row-major `n × n` matrix.
pub fn floyd_warshall(n: usize, m: &mut [f64]) {
    for k in 0..n {
        let row_k: Vec<f64> = m[k * n..(k + 1) * n].to_vec();
        for i in 0..n {
            let dik = m[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            let row_i = &mut m[i * n..(i + 1) * n];
            for (dij, &dkj) in row_i.iter_mut().zip(&row_k) {
                let via = dik + dkj;
                if via < *dij {
                    *dij = via;
                }
            }
        }
    }
}
