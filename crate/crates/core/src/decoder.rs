//! Minimum-weight perfect-matching decoder over a detector graph, plus an
//! exact maximum-likelihood oracle for small models.
//!
//! Graph text format: an optional `# n_detectors N` header, then one edge
//! per line as `u v weight flag`. Nodes `0..N` are detectors and node `N`
//! is the boundary. `flag` is `1` if the edge flips the logical observable.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::frame_sim::DetectorErrorModel;
use crate::matching::min_weight_perfect_matching;

const P_MIN: f64 = 1e-12;
const P_MAX: f64 = 0.5 - 1e-12;
/// Fixed-point scale for integer path lengths.
const SCALE: f64 = 1e6;
const INF: i64 = i64::MAX / 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphEdge {
    pub u: usize,
    pub v: usize,
    pub weight: f64,
    pub flag: bool,
}

/// Log-likelihood weight of an edge with flip probability `p`.
pub fn edge_weight(p: f64) -> f64 {
    let p = p.clamp(P_MIN, P_MAX);
    -(p / (1.0 - p)).ln()
}

#[derive(Clone, Debug)]
pub struct DetectorGraph {
    pub n_detectors: usize,
    pub edges: Vec<GraphEdge>,
    dist: Vec<i64>,
    parity: Vec<bool>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeOutcome {
    pub predicted_logical_flip: bool,
    /// Matched pairs; the boundary appears as `n_detectors`.
    pub matched_edges: Vec<(usize, usize)>,
    pub weight: f64,
}

impl DetectorGraph {
    pub fn boundary(&self) -> usize {
        self.n_detectors
    }

    pub fn from_edges(n_detectors: usize, edges: Vec<GraphEdge>) -> Result<Self> {
        let n = n_detectors + 1;
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::GraphConstruction(format!(
                    "edge {}-{} references a node outside 0..={n_detectors}",
                    e.u, e.v
                )));
            }
            if !e.weight.is_finite() {
                return Err(Error::GraphConstruction("non-finite edge weight".into()));
            }
        }
        let mut dist = vec![INF; n * n];
        let mut parity = vec![false; n * n];
        for i in 0..n {
            dist[i * n + i] = 0;
        }
        for e in &edges {
            if e.u == e.v {
                continue;
            }
            let w = (e.weight.max(0.0) * SCALE).round() as i64;
            for (a, b) in [(e.u, e.v), (e.v, e.u)] {
                if w < dist[a * n + b] {
                    dist[a * n + b] = w;
                    parity[a * n + b] = e.flag;
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = dist[i * n + k];
                if dik >= INF {
                    continue;
                }
                for j in 0..n {
                    let c = dik + dist[k * n + j];
                    if c < dist[i * n + j] {
                        dist[i * n + j] = c;
                        parity[i * n + j] = parity[i * n + k] ^ parity[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n_detectors, edges, dist, parity })
    }

    /// Shortest-path length between two nodes, or `None` if disconnected.
    pub fn distance(&self, a: usize, b: usize) -> Option<f64> {
        let d = self.dist[a * (self.n_detectors + 1) + b];
        (d < INF).then(|| d as f64 / SCALE)
    }

    fn d(&self, a: usize, b: usize) -> i64 {
        self.dist[a * (self.n_detectors + 1) + b]
    }

    fn par(&self, a: usize, b: usize) -> bool {
        self.parity[a * (self.n_detectors + 1) + b]
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# n_detectors {}\n", self.n_detectors);
        for e in &self.edges {
            let _ = writeln!(out, "{} {} {} {}", e.u, e.v, e.weight, u8::from(e.flag));
        }
        out
    }

    /// Parses the text format. Without a header the boundary is taken to be
    /// the largest node index.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut n_detectors = None;
        let mut edges = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("n_detectors") {
                    let v = it.next().and_then(|s| s.parse().ok());
                    n_detectors = Some(v.ok_or_else(|| {
                        Error::Parse(format!("line {}: bad n_detectors header", lineno + 1))
                    })?);
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::Parse(format!("line {}: expected `u v weight flag`", lineno + 1));
            if f.len() != 4 {
                return Err(bad());
            }
            let flag = match f[3] {
                "0" => false,
                "1" => true,
                _ => return Err(bad()),
            };
            edges.push(GraphEdge {
                u: f[0].parse().map_err(|_| bad())?,
                v: f[1].parse().map_err(|_| bad())?,
                weight: f[2].parse().map_err(|_| bad())?,
                flag,
            });
        }
        let n_detectors = match n_detectors {
            Some(n) => n,
            None => edges.iter().map(|e| e.u.max(e.v)).max().unwrap_or(0),
        };
        Self::from_edges(n_detectors, edges)
    }
}

/// One edge per detector pair (or detector and boundary). When two
/// signatures differ only in the logical flag, the more likely one wins.
pub fn build_graph(dem: &DetectorErrorModel) -> Result<DetectorGraph> {
    if dem.faults.is_empty() {
        return Err(Error::GraphConstruction("empty error model".into()));
    }
    let b = dem.n_detectors;
    let mut best: HashMap<(usize, usize), (f64, bool)> = HashMap::new();
    let mut order = Vec::new();
    for f in &dem.faults {
        let key = match f.detectors[..] {
            [] => continue,
            [a] => (a, b),
            [a, c] => (a.min(c), a.max(c)),
            _ => {
                return Err(Error::GraphConstruction(format!(
                    "fault flips {} detectors {:?}",
                    f.detectors.len(),
                    f.detectors
                )))
            }
        };
        match best.get_mut(&key) {
            Some(slot) => {
                if f.probability > slot.0 {
                    *slot = (f.probability, f.logical);
                }
            }
            None => {
                best.insert(key, (f.probability, f.logical));
                order.push(key);
            }
        }
    }
    let edges = order
        .into_iter()
        .map(|k| {
            let (p, flag) = best[&k];
            GraphEdge { u: k.0, v: k.1, weight: edge_weight(p), flag }
        })
        .collect();
    DetectorGraph::from_edges(dem.n_detectors, edges)
}

pub fn decode(graph: &DetectorGraph, detectors: &[bool]) -> Result<DecodeOutcome> {
    if detectors.len() != graph.n_detectors {
        return Err(invalid(format!(
            "expected {} detectors, got {}",
            graph.n_detectors,
            detectors.len()
        )));
    }
    let defects: Vec<usize> = (0..detectors.len()).filter(|&i| detectors[i]).collect();
    let b = graph.boundary();
    let k = defects.len();
    let pairs: Vec<(usize, usize)> = match k {
        0 => Vec::new(),
        1 => vec![(defects[0], b)],
        2 => {
            let (x, y) = (defects[0], defects[1]);
            if graph.d(x, y) <= graph.d(x, b).saturating_add(graph.d(y, b)) {
                vec![(x, y)]
            } else {
                vec![(x, b), (y, b)]
            }
        }
        _ => {
            // defects 0..k, boundary copies k..2k joined to each other at 0
            let mut edges = Vec::with_capacity(k * k + k);
            for i in 0..k {
                for j in i + 1..k {
                    let w = graph.d(defects[i], defects[j]);
                    if w < INF {
                        edges.push((i, j, w));
                    }
                }
                let w = graph.d(defects[i], b);
                if w < INF {
                    edges.push((i, k + i, w));
                }
                for j in i + 1..k {
                    edges.push((k + i, k + j, 0));
                }
            }
            match min_weight_perfect_matching(2 * k, &edges) {
                Some(mate) => (0..k)
                    .filter_map(|i| {
                        let m = mate[i];
                        if m >= k {
                            Some((defects[i], b))
                        } else {
                            (i < m).then(|| (defects[i], defects[m]))
                        }
                    })
                    .collect(),
                None => Vec::new(),
            }
        }
    };
    let mut flip = false;
    let mut total = 0i64;
    for &(x, y) in &pairs {
        flip ^= graph.par(x, y);
        total = total.saturating_add(graph.d(x, y));
    }
    Ok(DecodeOutcome {
        predicted_logical_flip: flip,
        matched_edges: pairs,
        weight: total as f64 / SCALE,
    })
}

/// Decodes many shots in parallel; output order follows input order.
pub fn decode_batch(graph: &DetectorGraph, shots: &[Vec<bool>]) -> Result<Vec<bool>> {
    shots
        .par_iter()
        .map(|s| decode(graph, s).map(|o| o.predicted_logical_flip))
        .collect()
}

/// Largest detector count the maximum-likelihood oracle accepts.
pub const ML_MAX_DETECTORS: usize = 20;

/// Exact maximum-likelihood logical prediction: dynamic programming over
/// `(syndrome, logical)` states, one fault at a time. Ties resolve to 0.
pub fn decode_ml_bruteforce(dem: &DetectorErrorModel, detectors: &[bool]) -> Result<bool> {
    let dist = ml_distribution(dem)?;
    if detectors.len() != dem.n_detectors {
        return Err(invalid(format!(
            "expected {} detectors, got {}",
            dem.n_detectors,
            detectors.len()
        )));
    }
    let s = pack(detectors);
    Ok(dist[2 * s + 1] > dist[2 * s])
}

/// Joint distribution of `(syndrome, logical)`, indexed `2 * syndrome + flip`.
pub fn ml_distribution(dem: &DetectorErrorModel) -> Result<Vec<f64>> {
    if dem.n_detectors > ML_MAX_DETECTORS {
        return Err(Error::Capacity(format!(
            "{} detectors exceed the ML oracle limit of {ML_MAX_DETECTORS}",
            dem.n_detectors
        )));
    }
    let states = 1usize << (dem.n_detectors + 1);
    let mut prob = vec![0.0; states];
    prob[0] = 1.0;
    for f in &dem.faults {
        let mask = (f.detectors.iter().fold(0usize, |m, &d| m ^ (1 << d)) << 1) | usize::from(f.logical);
        let p = f.probability;
        let mut next = vec![0.0; states];
        for (s, &q) in prob.iter().enumerate() {
            if q != 0.0 {
                next[s] += q * (1.0 - p);
                next[s ^ mask] += q * p;
            }
        }
        prob = next;
    }
    Ok(prob)
}

fn pack(bits: &[bool]) -> usize {
    bits.iter().enumerate().fold(0, |m, (i, &b)| m | (usize::from(b) << i))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame_sim::DemFault;

    fn dem(n: usize, faults: &[(&[usize], bool, f64)]) -> DetectorErrorModel {
        DetectorErrorModel {
            n_detectors: n,
            faults: faults
                .iter()
                .map(|&(d, l, p)| DemFault { detectors: d.to_vec(), logical: l, probability: p })
                .collect(),
        }
    }

    #[test]
    fn weight_formula() {
        let g = build_graph(&dem(2, &[(&[0, 1], false, 0.01)])).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert!((g.edges[0].weight - (-(0.01f64 / 0.99).ln())).abs() < 1e-15);
    }

    #[test]
    fn rejects_hyperedges_and_empty() {
        assert!(matches!(
            build_graph(&dem(3, &[(&[0, 1, 2], false, 0.01)])),
            Err(Error::GraphConstruction(_))
        ));
        assert!(build_graph(&dem(3, &[])).is_err());
    }

    #[test]
    fn opposite_flags_keep_more_likely() {
        let g = build_graph(&dem(1, &[(&[0], false, 0.01), (&[0], true, 0.02)])).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert!(g.edges[0].flag);
    }

    #[test]
    fn trivial_decodes() {
        // chain: B - 0 - 1 - 2 - B with the logical on the left boundary edge
        let g = build_graph(&dem(
            3,
            &[(&[0], true, 0.01), (&[0, 1], false, 0.01), (&[1, 2], false, 0.01), (&[2], false, 0.001)],
        ))
        .unwrap();
        let out = decode(&g, &[false; 3]).unwrap();
        assert!(!out.predicted_logical_flip && out.matched_edges.is_empty());
        let out = decode(&g, &[true, false, false]).unwrap();
        assert_eq!(out.matched_edges, vec![(0, 3)]);
        assert!(out.predicted_logical_flip);
        let out = decode(&g, &[false, false, true]).unwrap();
        assert!(!out.predicted_logical_flip);
        let out = decode(&g, &[true, true, false]).unwrap();
        assert_eq!(out.matched_edges, vec![(0, 1)]);
        // three defects: 1-2 pair plus 0 to the boundary
        let out = decode(&g, &[true, true, true]).unwrap();
        assert!(out.predicted_logical_flip);
        assert!(decode(&g, &[true]).is_err());
    }

    #[test]
    fn text_round_trip() {
        let g = build_graph(&dem(3, &[(&[0], true, 0.013), (&[0, 2], false, 0.2), (&[1], false, 1e-5)])).unwrap();
        let h = DetectorGraph::from_text(&g.to_text()).unwrap();
        assert_eq!(g.edges, h.edges);
        assert_eq!(h.n_detectors, 3);
        assert!(DetectorGraph::from_text("0 1 2.0").is_err());
        assert!(DetectorGraph::from_text("0 1 2.0 x").is_err());
        assert!(DetectorGraph::from_text("# n_detectors 1\n0 5 1.0 0").is_err());
    }

    #[test]
    fn ml_oracle() {
        let m = dem(2, &[(&[0], true, 1e-3), (&[0, 1], false, 1e-3), (&[1], false, 1e-3)]);
        assert!(!decode_ml_bruteforce(&m, &[false, false]).unwrap());
        assert!(decode_ml_bruteforce(&m, &[true, false]).unwrap());
        let big = DetectorErrorModel { n_detectors: 21, faults: vec![] };
        assert!(matches!(decode_ml_bruteforce(&big, &[false; 21]), Err(Error::Capacity(_))));
        let total: f64 = ml_distribution(&m).unwrap().iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
