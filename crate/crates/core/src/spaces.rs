//! Finite metric measure carriers.
//!
//! A [`CarrierSpace`] is stored extensionally: a symmetric distance matrix,
//! a strictly positive measure per point and a sparse "carrier adjacency"
//! whose shortest-path metric reproduces the matrix. The adjacency supplies
//! the horizontal edges of filling graphs and the Y-shortest chains used by
//! horizontal path segments.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Csr;

const METRIC_TOL: f64 = 1e-12;
const MAX_REPORTED: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct CarrierSpace {
    n: usize,
    dist: Vec<f64>,
    measure: Vec<f64>,
    labels: Option<Vec<String>>,
    adjacency: Vec<Vec<usize>>,
}

/// On-disk JSON form.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceFile {
    pub n: usize,
    pub dist: Vec<Vec<f64>>,
    pub measure: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// Result of the approximate-midpoint surrogate for the length-space property.
#[derive(Debug, Clone, Serialize)]
pub struct LengthReport {
    pub eps: f64,
    pub pass: bool,
    pub pairs_checked: usize,
    /// Largest `min_k max(d(i,k), d(k,j)) − d(i,j)/2` over checked pairs.
    pub worst_excess: f64,
    pub worst_pair: Option<(usize, usize)>,
}

fn tol(d: f64) -> f64 {
    METRIC_TOL * d.abs().max(1.0)
}

impl CarrierSpace {
    /// Validates a dense matrix and builds the carrier.
    pub fn from_matrix(matrix: Vec<Vec<f64>>, measure: Vec<f64>) -> Result<Self> {
        let n = matrix.len();
        let mut problems = Vec::new();
        if n == 0 {
            return Err(Error::Validation(vec!["empty distance matrix".into()]));
        }
        if let Some((i, row)) = matrix.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(Error::Validation(vec![format!(
                "matrix is not square: row {i} has {} entries, expected {n}",
                row.len()
            )]));
        }
        if measure.len() != n {
            return Err(Error::Validation(vec![format!(
                "measure has {} entries, expected {n}",
                measure.len()
            )]));
        }
        for (i, &m) in measure.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                problems.push(format!("measure of point {i} is {m}, must be finite and > 0"));
            }
        }
        for i in 0..n {
            if matrix[i][i] != 0.0 {
                problems.push(format!("nonzero diagonal at ({i},{i}): {}", matrix[i][i]));
            }
            for j in 0..n {
                let d = matrix[i][j];
                if !d.is_finite() || d < 0.0 {
                    problems.push(format!("negative or non-finite entry at ({i},{j}): {d}"));
                }
                if j > i && (d - matrix[j][i]).abs() > tol(d) {
                    problems.push(format!(
                        "asymmetry at ({i},{j}): {d} vs {}",
                        matrix[j][i]
                    ));
                }
                if i != j && d == 0.0 && j > i {
                    problems.push(format!("distinct points ({i},{j}) at distance 0"));
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        let dist: Vec<f64> = matrix.into_iter().flatten().collect();
        let mut triangle = Vec::new();
        let mut count = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = dist[i * n + j];
                for k in 0..n {
                    let via = dist[i * n + k] + dist[k * n + j];
                    if dij > via + tol(dij) {
                        count += 1;
                        if triangle.len() < MAX_REPORTED {
                            triangle.push(format!(
                                "triangle violation ({i},{j}) via {k}: {dij} > {}",
                                via
                            ));
                        }
                    }
                }
            }
        }
        if count > 0 {
            if count > triangle.len() {
                triangle.push(format!("{} further triangle violations", count - triangle.len()));
            }
            return Err(Error::Validation(triangle));
        }
        let adjacency = minimal_adjacency(n, &dist);
        Ok(CarrierSpace {
            n,
            dist,
            measure,
            labels: None,
            adjacency,
        })
    }

    /// Shortest-path metric of a connected graph with positive edge lengths.
    /// `measure` defaults to 1 per node.
    pub fn from_graph(n: usize, edges: &[(usize, usize, f64)], measure: Option<Vec<f64>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Validation(vec!["graph has no nodes".into()]));
        }
        for &(a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::Validation(vec![format!("edge ({a},{b}) references a missing node")]));
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::Validation(vec![format!(
                    "edge ({a},{b}) has non-positive length {w}"
                )]));
            }
        }
        let measure = measure.unwrap_or_else(|| vec![1.0; n]);
        if measure.len() != n || measure.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::Validation(vec!["measure must have one positive entry per node".into()]));
        }
        let g = Csr::from_edges(n, edges);
        let reach = g.component_of(0);
        if let Some(node) = reach.iter().position(|r| !r) {
            let stranded = g.component_of(node).iter().filter(|&&r| r).count();
            return Err(Error::Disconnected {
                node,
                component_size: stranded,
            });
        }
        let mut dist = Vec::with_capacity(n * n);
        for s in 0..n {
            dist.extend(g.dijkstra(s));
        }
        // Symmetrize against rounding in path sums.
        for i in 0..n {
            for j in (i + 1)..n {
                let d = dist[i * n + j].min(dist[j * n + i]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b, w) in edges {
            if a != b && w <= dist[a * n + b] + tol(w) && !adjacency[a].contains(&b) {
                adjacency[a].push(b);
                adjacency[b].push(a);
            }
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(CarrierSpace {
            n,
            dist,
            measure,
            labels: None,
            adjacency,
        })
    }

    /// `n` equally spaced points on a circle with arc-length distance and
    /// measure `circumference / n` per point.
    pub fn circle(n: usize, circumference: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::domain(format!("circle needs n ≥ 3 points, got {n}")));
        }
        if !(circumference > 0.0) || !circumference.is_finite() {
            return Err(Error::domain("circle circumference must be finite and > 0"));
        }
        let spacing = circumference / n as f64;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i.abs_diff(j);
                dist[i * n + j] = k.min(n - k) as f64 * spacing;
            }
        }
        let adjacency = (0..n)
            .map(|i| {
                let mut v = vec![(i + n - 1) % n, (i + 1) % n];
                v.sort_unstable();
                v
            })
            .collect();
        Ok(CarrierSpace {
            n,
            dist,
            measure: vec![spacing; n],
            labels: None,
            adjacency,
        })
    }

    /// The unit circle of circumference `2π`.
    pub fn unit_circle(n: usize) -> Result<Self> {
        CarrierSpace::circle(n, 2.0 * PI)
    }

    /// A single point of measure 1 (the product with it is the half-line).
    pub fn point() -> Self {
        CarrierSpace {
            n: 1,
            dist: vec![0.0],
            measure: vec![1.0],
            labels: None,
            adjacency: vec![Vec::new()],
        }
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::Validation(vec![format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )]));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn with_measure(mut self, measure: Vec<f64>) -> Result<Self> {
        if measure.len() != self.n || measure.iter().any(|m| !(*m > 0.0) || !m.is_finite()) {
            return Err(Error::Validation(vec!["measure must have one positive entry per point".into()]));
        }
        self.measure = measure;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn total_measure(&self) -> f64 {
        self.measure.iter().sum()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// Carrier neighbours of `i`.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    /// Each adjacent pair once, `j < k`.
    pub fn adjacent_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(j, list)| list.iter().filter(move |&&k| k > j).map(move |&k| (j, k)))
    }

    /// Points of a Y-shortest chain from `a` to `b` along carrier adjacency.
    pub fn geodesic_chain(&self, a: usize, b: usize) -> Vec<usize> {
        let mut chain = vec![a];
        let mut cur = a;
        while cur != b {
            let remaining = self.dist(cur, b);
            let next = self.adjacency[cur]
                .iter()
                .copied()
                .filter(|&k| {
                    let through = self.dist(cur, k) + self.dist(k, b);
                    through <= remaining + 1e-9 * remaining.max(1.0)
                })
                .min_by(|&x, &y| self.dist(x, b).total_cmp(&self.dist(y, b)))
                .expect("carrier adjacency reproduces the metric");
            chain.push(next);
            cur = next;
        }
        chain
    }

    /// Discrete surrogate for the length-space hypothesis: every pair at
    /// distance `> eps` must have an `eps`-midpoint `k`, i.e.
    /// `max(d(i,k), d(k,j)) ≤ d(i,j)/2 + eps`.
    pub fn approx_length_check(&self, eps: f64) -> LengthReport {
        let n = self.n;
        let mut worst = f64::NEG_INFINITY;
        let mut worst_pair = None;
        let mut checked = 0usize;
        for i in 0..n {
            let mut hint = i;
            for j in (i + 1)..n {
                let dij = self.dist(i, j);
                if dij <= eps {
                    continue;
                }
                checked += 1;
                let excess_at = |k: usize| self.dist(i, k).max(self.dist(k, j)) - 0.5 * dij;
                // Try the previous pair's midpoint and its neighbours first; a
                // full scan is only needed when they cannot beat the current worst.
                let mut best = excess_at(hint);
                let mut best_k = hint;
                for &k in &self.adjacency[hint] {
                    let e = excess_at(k);
                    if e < best {
                        best = e;
                        best_k = k;
                    }
                }
                if best > worst {
                    for k in 0..n {
                        let e = excess_at(k);
                        if e < best {
                            best = e;
                            best_k = k;
                            if best <= worst {
                                break;
                            }
                        }
                    }
                }
                hint = best_k;
                if best > worst {
                    worst = best;
                    worst_pair = Some((i, j));
                }
            }
        }
        if checked == 0 {
            worst = 0.0;
        }
        LengthReport {
            eps,
            pass: worst <= eps + tol(eps),
            pairs_checked: checked,
            worst_excess: worst,
            worst_pair,
        }
    }

    pub fn to_file(&self) -> SpaceFile {
        SpaceFile {
            n: self.n,
            dist: (0..self.n).map(|i| self.row(i).to_vec()).collect(),
            measure: self.measure.clone(),
            labels: self.labels.clone(),
        }
    }

    pub fn from_file(file: SpaceFile) -> Result<Self> {
        if file.dist.len() != file.n {
            return Err(Error::Schema(format!(
                "space declares n = {} but has {} rows",
                file.n,
                file.dist.len()
            )));
        }
        let space = CarrierSpace::from_matrix(file.dist, file.measure)?;
        match file.labels {
            Some(l) => space.with_labels(l),
            None => Ok(space),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("space serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpaceFile =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("space JSON: {e}")))?;
        CarrierSpace::from_file(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|_| Error::FileNotFound(path.display().to_string()))?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => CarrierSpace::from_csv(&text),
            _ => CarrierSpace::from_json(&text),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    /// CSV import: one row per point, `n` distances followed by the measure.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut matrix = Vec::new();
        let mut measure = Vec::new();
        for (r, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Schema(format!("space CSV row {r}: {e}")))?;
            let mut values = Vec::with_capacity(record.len());
            for field in record.iter() {
                values.push(
                    field
                        .parse::<f64>()
                        .map_err(|_| Error::Schema(format!("space CSV row {r}: '{field}' is not a number")))?,
                );
            }
            let m = values
                .pop()
                .ok_or_else(|| Error::Schema(format!("space CSV row {r} is empty")))?;
            measure.push(m);
            matrix.push(values);
        }
        CarrierSpace::from_matrix(matrix, measure)
    }
}

// Pairs (i, j) that no third point splits: d(i,k) + d(k,j) > d(i,j) for all k.
fn minimal_adjacency(n: usize, dist: &[f64]) -> Vec<Vec<usize>> {
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = dist[i * n + j];
            let split = (0..n).any(|k| {
                k != i && k != j && dist[i * n + k] + dist[k * n + j] <= dij + tol(dij)
            });
            if !split {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    adjacency
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_matrix_is_valid() {
        let s = CarrierSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dist(0, 1), 1.0);
        assert_eq!(s.neighbors(0), &[1]);
    }

    #[test]
    fn asymmetry_is_reported() {
        let err = CarrierSpace::from_matrix(vec![vec![0.0, 1.0], vec![2.0, 0.0]], vec![1.0, 1.0]).unwrap_err();
        match err {
            Error::Validation(v) => assert!(v[0].contains("asymmetry at (0,1)")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn triangle_violation_names_indices() {
        let m = vec![vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0], vec![3.0, 1.0, 0.0]];
        match CarrierSpace::from_matrix(m, vec![1.0; 3]).unwrap_err() {
            Error::Validation(v) => {
                assert_eq!(v.len(), 1);
                assert!(v[0].contains("(0,2) via 1"), "{v:?}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_measure_rejected() {
        assert!(CarrierSpace::from_matrix(vec![vec![0.0]], vec![0.0]).is_err());
        assert!(CarrierSpace::from_matrix(vec![vec![0.0]], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn path_graph() {
        let s = CarrierSpace::from_graph(3, &[(0, 1, 1.0), (1, 2, 1.0)], None).unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
        assert_eq!(s.measure(), &[1.0, 1.0, 1.0]);
        assert_eq!(s.geodesic_chain(0, 2), vec![0, 1, 2]);
    }

    #[test]
    fn long_edge_is_relaxed() {
        let s = CarrierSpace::from_graph(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 10.0)], None).unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
        // The slack edge is not a carrier adjacency.
        assert!(!s.neighbors(0).contains(&2));
    }

    #[test]
    fn single_node_graph() {
        let s = CarrierSpace::from_graph(1, &[], None).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.dist(0, 0), 0.0);
    }

    #[test]
    fn disconnected_graph_names_component() {
        match CarrierSpace::from_graph(4, &[(0, 1, 1.0), (2, 3, 1.0)], None).unwrap_err() {
            Error::Disconnected { node, component_size } => {
                assert_eq!(node, 2);
                assert_eq!(component_size, 2);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn circle_distances() {
        let c = CarrierSpace::circle(4, 4.0).unwrap();
        assert_eq!(c.dist(0, 2), 2.0);
        assert_eq!(c.dist(0, 1), 1.0);
        assert_eq!(c.dist(0, 3), 1.0);
        assert_eq!(c.diameter(), 2.0);
        assert_eq!(c.measure(), &[1.0; 4]);
        assert!(CarrierSpace::circle(2, 1.0).is_err());

        let c = CarrierSpace::unit_circle(2048).unwrap();
        let max_adjacent = (0..2048)
            .map(|i| c.dist(i, (i + 1) % 2048))
            .fold(0.0, f64::max);
        assert!((max_adjacent - 2.0 * PI / 2048.0).abs() < 1e-15);
    }

    #[test]
    fn circle_matrix_adjacency_recovers_ring() {
        let c = CarrierSpace::circle(9, 3.0).unwrap();
        let rebuilt = CarrierSpace::from_file(c.to_file()).unwrap();
        assert_eq!(rebuilt, c);
    }

    #[test]
    fn geodesic_chain_on_circle() {
        let c = CarrierSpace::circle(10, 10.0).unwrap();
        assert_eq!(c.geodesic_chain(1, 4), vec![1, 2, 3, 4]);
        assert_eq!(c.geodesic_chain(1, 8), vec![1, 0, 9, 8]);
    }

    #[test]
    fn length_check_examples() {
        let c = CarrierSpace::unit_circle(2048).unwrap();
        let r = c.approx_length_check(0.01);
        assert!(r.pass, "{r:?}");

        let two = CarrierSpace::from_matrix(vec![vec![0.0, 1.0], vec![1.0, 0.0]], vec![1.0, 1.0]).unwrap();
        let r = two.approx_length_check(0.01);
        assert!(!r.pass);
        assert_eq!(r.worst_pair, Some((0, 1)));

        let edges: Vec<_> = (0..200).map(|i| (i, i + 1, 0.005)).collect();
        let path = CarrierSpace::from_graph(201, &edges, None).unwrap();
        assert!(path.approx_length_check(0.01).pass);
    }

    #[test]
    fn csv_import() {
        let s = CarrierSpace::from_csv("0,1,2,0.5\n1,0,1,0.5\n2,1,0,1.0\n").unwrap();
        assert_eq!(s.dist(0, 2), 2.0);
        assert_eq!(s.measure(), &[0.5, 0.5, 1.0]);
        assert!(matches!(CarrierSpace::from_csv("0,x,1\n"), Err(Error::Schema(_))));
    }

    #[test]
    fn json_schema_errors() {
        assert!(matches!(CarrierSpace::from_json("{\"n\": 2}"), Err(Error::Schema(_))));
        assert!(matches!(
            CarrierSpace::from_json("{\"n\": 3, \"dist\": [[0]], \"measure\": [1]}"),
            Err(Error::Schema(_))
        ));
    }
}
