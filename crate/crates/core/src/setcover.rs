//! Weighted set cover: exact branch and bound on word masks, and the
//! weight-ratio greedy.

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// Indices into the instance's set list, ascending.
    pub chosen: Vec<usize>,
    pub cost: f64,
}

/// Greedy cover of `0..universe`; each round picks the set minimizing
/// weight per newly covered element.
pub fn greedy(universe: usize, sets: &[Vec<usize>], weights: &[f64]) -> Result<Solution> {
    let mut covered = vec![false; universe];
    let mut left = universe;
    let mut chosen = Vec::new();
    let mut cost = 0.0;
    while left > 0 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (k, s) in sets.iter().enumerate() {
            let fresh = s.iter().filter(|&&e| !covered[e]).count();
            if fresh == 0 {
                continue;
            }
            let ratio = weights[k] / fresh as f64;
            let better = match best {
                None => true,
                Some((r, f, _)) => ratio < r || (ratio == r && fresh > f),
            };
            if better {
                best = Some((ratio, fresh, k));
            }
        }
        let Some((_, fresh, k)) = best else {
            return invalid("set family does not cover the universe");
        };
        for &e in &sets[k] {
            covered[e] = true;
        }
        left -= fresh;
        cost += weights[k];
        chosen.push(k);
    }
    chosen.sort_unstable();
    Ok(Solution { chosen, cost })
}

/// Minimum-weight cover of a universe of at most 64 elements.
pub fn exact(universe: usize, sets: &[u64], weights: &[f64]) -> Result<Solution> {
    if universe > 64 {
        return invalid("exact set cover supports at most 64 elements");
    }
    let full = if universe == 64 { u64::MAX } else { (1u64 << universe) - 1 };
    let reach = sets.iter().fold(0u64, |a, &s| a | s);
    if reach & full != full {
        return invalid("set family does not cover the universe");
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return invalid("set weights must be finite and nonnegative");
    }

    let kept = undominated(sets, weights, full);
    let mut sets_of: Vec<Vec<usize>> = vec![Vec::new(); universe];
    for &k in &kept {
        for (e, list) in sets_of.iter_mut().enumerate() {
            if sets[k] >> e & 1 == 1 {
                list.push(k);
            }
        }
    }

    let greedy_lists: Vec<Vec<usize>> = kept
        .iter()
        .map(|&k| (0..universe).filter(|&e| sets[k] >> e & 1 == 1).collect())
        .collect();
    let kept_weights: Vec<f64> = kept.iter().map(|&k| weights[k]).collect();
    let start = greedy(universe, &greedy_lists, &kept_weights)?;
    let mut search = Search {
        sets,
        weights,
        sets_of: &sets_of,
        best_cost: start.cost,
        best: start.chosen.iter().map(|&i| kept[i]).collect(),
        stack: Vec::new(),
    };
    search.descend(full, 0.0);
    let mut chosen = search.best;
    chosen.sort_unstable();
    let cost = chosen.iter().map(|&k| weights[k]).sum();
    Ok(Solution { chosen, cost })
}

/// Drops sets contained in a no-heavier set; among identical candidates keeps the first.
fn undominated(sets: &[u64], weights: &[f64], full: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..sets.len()).filter(|&k| sets[k] & full != 0).collect();
    order.sort_by(|&a, &b| {
        weights[a]
            .total_cmp(&weights[b])
            .then(sets[b].count_ones().cmp(&sets[a].count_ones()))
            .then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = Vec::new();
    for k in order {
        if !kept.iter().any(|&j| sets[k] & !sets[j] == 0) {
            kept.push(k);
        }
    }
    kept
}

struct Search<'a> {
    sets: &'a [u64],
    weights: &'a [f64],
    sets_of: &'a [Vec<usize>],
    best_cost: f64,
    best: Vec<usize>,
    stack: Vec<usize>,
}

impl Search<'_> {
    /// Fractional lower bound: each uncovered element pays its cheapest per-element share.
    fn lower_bound(&self, uncovered: u64) -> f64 {
        let mut lb = 0.0;
        let mut rest = uncovered;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let share = self.sets_of[e]
                .iter()
                .map(|&k| self.weights[k] / (self.sets[k] & uncovered).count_ones() as f64)
                .fold(f64::INFINITY, f64::min);
            lb += share;
        }
        lb
    }

    fn descend(&mut self, uncovered: u64, cost: f64) {
        if uncovered == 0 {
            if cost < self.best_cost {
                self.best_cost = cost;
                self.best = self.stack.clone();
            }
            return;
        }
        if cost + self.lower_bound(uncovered) * (1.0 - 1e-12) >= self.best_cost {
            return;
        }
        let mut rest = uncovered;
        let mut pick = usize::MAX;
        let mut fewest = usize::MAX;
        while rest != 0 {
            let e = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            if self.sets_of[e].len() < fewest {
                fewest = self.sets_of[e].len();
                pick = e;
            }
        }
        let mut branches: Vec<(f64, usize)> = self.sets_of[pick]
            .iter()
            .map(|&k| (self.weights[k] / (self.sets[k] & uncovered).count_ones() as f64, k))
            .collect();
        branches.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (_, k) in branches {
            self.stack.push(k);
            self.descend(uncovered & !self.sets[k], cost + self.weights[k]);
            self.stack.pop();
        }
    }
}
