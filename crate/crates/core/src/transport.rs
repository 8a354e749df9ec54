//! Exact optimal transport between finite measures by successive shortest
//! augmenting paths on the bipartite support graph.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::info::ProbMeasure;
use crate::spaces::DistMatrix;

const FLOW_EPS: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub plan: Vec<Vec<f64>>,
    pub cost: f64,
}

impl TransportPlan {
    pub fn row_sums(&self) -> Vec<f64> {
        self.plan.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let m = self.plan.first().map_or(0, Vec::len);
        (0..m).map(|j| self.plan.iter().map(|r| r[j]).sum()).collect()
    }

    /// Mass placed off the diagonal (square plans).
    pub fn off_diagonal_mass(&self) -> f64 {
        self.plan.iter().enumerate().map(|(i, r)| r.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, v)| v).sum::<f64>()).sum()
    }
}

struct Edge {
    to: usize,
    cap: f64,
    cost: f64,
}

struct Network {
    edges: Vec<Edge>,
    adj: Vec<Vec<usize>>,
}

impl Network {
    fn new(n: usize) -> Self {
        Self { edges: Vec::new(), adj: vec![Vec::new(); n] }
    }

    fn add(&mut self, from: usize, to: usize, cap: f64, cost: f64) -> usize {
        let id = self.edges.len();
        self.edges.push(Edge { to, cap, cost });
        self.adj[from].push(id);
        self.edges.push(Edge { to: from, cap: 0.0, cost: -cost });
        self.adj[to].push(id + 1);
        id
    }

    /// Bellman-Ford shortest path tree over edges with residual capacity.
    fn shortest_paths(&self, source: usize) -> (Vec<f64>, Vec<Option<usize>>) {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![None; n];
        dist[source] = 0.0;
        for _ in 0..n {
            let mut changed = false;
            for u in 0..n {
                if dist[u] == f64::INFINITY {
                    continue;
                }
                for &e in &self.adj[u] {
                    let edge = &self.edges[e];
                    if edge.cap > FLOW_EPS && dist[u] + edge.cost < dist[edge.to] - 1e-15 {
                        dist[edge.to] = dist[u] + edge.cost;
                        via[edge.to] = Some(e);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (dist, via)
    }
}

/// Minimum-cost coupling of `p` and `q` under `cost[a][b] >= 0`.
pub fn optimal_coupling(p: &ProbMeasure, q: &ProbMeasure, cost: &[Vec<f64>]) -> Result<TransportPlan> {
    let (n, m) = (p.len(), q.len());
    if cost.len() != n || cost.iter().any(|r| r.len() != m) {
        return invalid("cost matrix shape does not match the marginals");
    }
    if cost.iter().flatten().any(|c| !(c.is_finite() && *c >= 0.0)) {
        return invalid("costs must be finite and nonnegative");
    }
    let source = n + m;
    let sink = n + m + 1;
    let mut net = Network::new(n + m + 2);
    for i in 0..n {
        if p.get(i) > 0.0 {
            net.add(source, i, p.get(i), 0.0);
        }
    }
    for j in 0..m {
        if q.get(j) > 0.0 {
            net.add(n + j, sink, q.get(j), 0.0);
        }
    }
    let mut arcs = Vec::new();
    for (i, row) in cost.iter().enumerate().take(n) {
        for (j, &c) in row.iter().enumerate().take(m) {
            if p.get(i) > 0.0 && q.get(j) > 0.0 {
                arcs.push((i, j, net.add(i, n + j, f64::INFINITY, c)));
            }
        }
    }
    loop {
        let (dist, via) = net.shortest_paths(source);
        if dist[sink] == f64::INFINITY {
            break;
        }
        let mut push = f64::INFINITY;
        let mut v = sink;
        while let Some(e) = via[v] {
            push = push.min(net.edges[e].cap);
            v = net.edges[e ^ 1].to;
        }
        if push <= FLOW_EPS {
            break;
        }
        let mut v = sink;
        while let Some(e) = via[v] {
            net.edges[e].cap -= push;
            net.edges[e ^ 1].cap += push;
            v = net.edges[e ^ 1].to;
        }
    }
    let mut plan = vec![vec![0.0; m]; n];
    for (i, j, e) in arcs {
        plan[i][j] = net.edges[e ^ 1].cap;
    }
    let total: f64 = cost.iter().zip(&plan).flat_map(|(c, r)| c.iter().zip(r).map(|(a, b)| a * b)).sum();
    Ok(TransportPlan { plan, cost: total })
}

/// Wasserstein-1 distance between two measures on the same finite metric space.
pub fn wasserstein1(p: &ProbMeasure, q: &ProbMeasure, metric: &DistMatrix) -> Result<f64> {
    Ok(optimal_coupling(p, q, &metric.to_rows())?.cost)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_marginals_cost_nothing() {
        let p = ProbMeasure::new(vec![0.2, 0.5, 0.3]).unwrap();
        let c = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let t = optimal_coupling(&p, &p, &c).unwrap();
        assert!(t.cost.abs() < 1e-15);
        assert!(t.off_diagonal_mass() < 1e-15);
    }

    #[test]
    fn forced_swap() {
        let p = ProbMeasure::new(vec![1.0, 0.0]).unwrap();
        let q = ProbMeasure::new(vec![0.0, 1.0]).unwrap();
        let t = optimal_coupling(&p, &q, &[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_eq!(t.cost, 1.0);
        assert_eq!(t.plan[0][1], 1.0);
    }

    #[test]
    fn line_transport_matches_cdf_formula() {
        // On the line W1 is the integral of |F_p - F_q|.
        let pos: [f64; 4] = [0.0, 0.3, 0.7, 1.0];
        let p = ProbMeasure::new(vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let q = ProbMeasure::new(vec![0.1, 0.4, 0.4, 0.1]).unwrap();
        let metric = DistMatrix::from_fn(4, |i, j| (pos[i] - pos[j]).abs());
        let mut oracle = 0.0;
        let (mut fp, mut fq) = (0.0, 0.0);
        for k in 0..3 {
            fp += p.get(k);
            fq += q.get(k);
            oracle += (fp - fq).abs() * (pos[k + 1] - pos[k]);
        }
        assert!((wasserstein1(&p, &q, &metric).unwrap() - oracle).abs() < 1e-12);
    }
}
