//! Threshold graphs `{d(x,y) < eps}` and their cliques.
//!
//! A set has diameter `< eps` exactly when it is a clique of the threshold
//! graph, so clique enumeration is the source of every candidate cover.

use crate::error::{Error, Result};
use crate::spaces::DistMatrix;

/// Fixed-capacity bit set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn new(capacity: usize) -> Self {
        Self { words: vec![0; capacity.div_ceil(64)] }
    }

    pub fn full(capacity: usize) -> Self {
        let mut s = Self::new(capacity);
        for i in 0..capacity {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / 64] &= !(1 << (i % 64));
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn intersection(&self, other: &Self) -> Self {
        Self { words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect() }
    }

    pub fn intersection_count(&self, other: &Self) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + b)
            })
        })
    }
}

/// Adjacency of the strict threshold graph `d(x,y) < eps`, `x != y`.
pub struct ThresholdGraph {
    adj: Vec<BitSet>,
}

impl ThresholdGraph {
    pub fn new(metric: &DistMatrix, eps: f64) -> Self {
        let n = metric.len();
        let mut adj = vec![BitSet::new(n); n];
        for (i, row) in adj.iter_mut().enumerate() {
            for j in 0..n {
                if i != j && metric.get(i, j) < eps {
                    row.insert(j);
                }
            }
        }
        Self { adj }
    }

    pub fn len(&self) -> usize {
        self.adj.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adj.is_empty()
    }

    pub fn neighbors(&self, i: usize) -> &BitSet {
        &self.adj[i]
    }

    pub fn is_edgeless(&self) -> bool {
        self.adj.iter().all(BitSet::is_empty)
    }

    /// Connected components, each sorted, ordered by smallest element.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut k = 0;
            while k < members.len() {
                let v = members[k];
                k += 1;
                for u in self.adj[v].iter() {
                    if comp[u] == usize::MAX {
                        comp[u] = id;
                        members.push(u);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Maximal cliques restricted to `vertices` (Bron-Kerbosch with pivoting).
    pub fn maximal_cliques(&self, vertices: &[usize], budget: usize) -> Result<Vec<Vec<usize>>> {
        let mut p = BitSet::new(self.len());
        for &v in vertices {
            p.insert(v);
        }
        let mut out = Vec::new();
        let mut r = Vec::new();
        self.bron_kerbosch(&mut r, p, BitSet::new(self.len()), &mut out, budget)?;
        for c in &mut out {
            c.sort_unstable();
        }
        out.sort();
        Ok(out)
    }

    fn bron_kerbosch(
        &self,
        r: &mut Vec<usize>,
        mut p: BitSet,
        mut x: BitSet,
        out: &mut Vec<Vec<usize>>,
        budget: usize,
    ) -> Result<()> {
        if p.is_empty() {
            if x.is_empty() {
                if out.len() >= budget {
                    return Err(Error::BudgetExceeded { what: "maximal clique enumeration", needed: budget + 1, budget });
                }
                out.push(r.clone());
            }
            return Ok(());
        }
        let pivot = p
            .iter()
            .chain(x.iter())
            .max_by_key(|&u| p.intersection_count(&self.adj[u]))
            .expect("p is nonempty");
        let candidates: Vec<usize> = p.iter().filter(|&v| !self.adj[pivot].contains(v)).collect();
        for v in candidates {
            r.push(v);
            self.bron_kerbosch(r, p.intersection(&self.adj[v]), x.intersection(&self.adj[v]), out, budget)?;
            r.pop();
            p.remove(v);
            x.insert(v);
        }
        Ok(())
    }

    /// Every nonempty clique within `vertices`, each sorted.
    pub fn all_cliques(&self, vertices: &[usize], budget: usize) -> Result<Vec<Vec<usize>>> {
        let mut out = Vec::new();
        let mut stack = Vec::new();
        let mut sorted = vertices.to_vec();
        sorted.sort_unstable();
        self.extend_cliques(&sorted, &mut stack, &mut out, budget)?;
        Ok(out)
    }

    fn extend_cliques(
        &self,
        candidates: &[usize],
        stack: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        budget: usize,
    ) -> Result<()> {
        for (k, &v) in candidates.iter().enumerate() {
            if out.len() >= budget {
                return Err(Error::BudgetExceeded { what: "clique family", needed: budget + 1, budget });
            }
            stack.push(v);
            out.push(stack.clone());
            let next: Vec<usize> = candidates[k + 1..].iter().copied().filter(|&u| self.adj[v].contains(u)).collect();
            self.extend_cliques(&next, stack, out, budget)?;
            stack.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(pos: &[f64]) -> DistMatrix {
        DistMatrix::from_fn(pos.len(), |i, j| (pos[i] - pos[j]).abs())
    }

    #[test]
    fn collinear_maximal_cliques() {
        let g = ThresholdGraph::new(&line(&[0.0, 0.6, 1.2]), 0.7);
        assert_eq!(g.maximal_cliques(&[0, 1, 2], 100).unwrap(), vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(g.components(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn strict_threshold_excludes_ties() {
        let g = ThresholdGraph::new(&line(&[0.0, 0.5]), 0.5);
        assert!(g.is_edgeless());
        assert_eq!(g.components().len(), 2);
    }

    #[test]
    fn all_cliques_of_triangle() {
        let g = ThresholdGraph::new(&line(&[0.0, 0.1, 0.2]), 1.0);
        assert_eq!(g.all_cliques(&[0, 1, 2], 100).unwrap().len(), 7);
        assert!(g.all_cliques(&[0, 1, 2], 3).is_err());
    }

    #[test]
    fn bitset_iteration() {
        let mut s = BitSet::new(130);
        for i in [0, 63, 64, 129] {
            s.insert(i);
        }
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![0, 63, 64, 129]);
        assert_eq!(s.count(), 4);
        s.remove(63);
        assert!(!s.contains(63));
    }
}
