//! Measures on finite systems: products, pushforwards, empirical averages,
//! Frostman measures by LP duality, and JSON weight maps.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cliques::ThresholdGraph;
use crate::error::{invalid, Error, Result};
use crate::hausdorff::grained_power;
use crate::info::{neumaier_sum, ProbMeasure};
use crate::lp;
use crate::spaces::{DistMatrix, FiniteSystem, Potential, SymbolicModel};

pub use crate::transport::{optimal_coupling, wasserstein1, TransportPlan};

/// Largest space accepted by the all-subsets Frostman family.
pub const SUBSET_FAMILY_LIMIT: usize = 15;

/// Product measure on period-`p` words: the weight of a word is the product
/// of its symbol weights.
pub fn product_measure(model: &SymbolicModel, symbol_weights: &ProbMeasure) -> Result<ProbMeasure> {
    model.validate()?;
    if symbol_weights.len() != model.num_symbols() {
        return invalid(format!("{} symbol weights for {} symbols", symbol_weights.len(), model.num_symbols()));
    }
    let n = model.num_points().ok_or_else(|| Error::InvalidInput("model too large".into()))?;
    let weights = (0..n).map(|i| model.word(i).iter().map(|&s| symbol_weights.get(s)).product()).collect();
    ProbMeasure::normalized(weights)
}

/// Quantization of `nu_k(A) = k Leb(A ∩ [1 - 1/k, 1])`: each symbol receives
/// the mass of its nearest-value cell in `[0,1]`.
pub fn top_uniform_weights(alphabet: &[f64], k: usize) -> Result<ProbMeasure> {
    if k == 0 {
        return invalid("k must be positive");
    }
    let mut order: Vec<usize> = (0..alphabet.len()).collect();
    order.sort_by(|&a, &b| alphabet[a].total_cmp(&alphabet[b]));
    let lo = 1.0 - 1.0 / k as f64;
    let mut weights = vec![0.0; alphabet.len()];
    for (r, &i) in order.iter().enumerate() {
        let left = if r == 0 { 0.0 } else { 0.5 * (alphabet[order[r - 1]] + alphabet[i]) };
        let right = if r + 1 == order.len() { 1.0 } else { 0.5 * (alphabet[i] + alphabet[order[r + 1]]) };
        weights[i] = k as f64 * (right.min(1.0) - left.max(lo)).max(0.0);
    }
    ProbMeasure::normalized(weights)
}

/// `sum phi(x) mu(x)`
pub fn integrate(phi: &Potential, mu: &ProbMeasure) -> Result<f64> {
    if phi.len() != mu.len() {
        return invalid("potential and measure have different lengths");
    }
    Ok(neumaier_sum((0..mu.len()).map(|i| phi.get(i) * mu.get(i))))
}

/// `T_* mu`, i.e. `(T_* mu)(T x) = mu(x)`.
pub fn pushforward(sys: &FiniteSystem, mu: &ProbMeasure) -> Result<ProbMeasure> {
    if mu.len() != sys.len() {
        return invalid("measure length differs from the number of points");
    }
    let mut w = vec![0.0; sys.len()];
    for (i, &t) in sys.time_map().iter().enumerate() {
        w[t] = mu.get(i);
    }
    Ok(ProbMeasure::from_raw(w))
}

pub fn is_invariant(sys: &FiniteSystem, mu: &ProbMeasure, tol: f64) -> Result<bool> {
    let pushed = pushforward(sys, mu)?;
    Ok(pushed.weights().iter().zip(mu.weights()).all(|(a, b)| (a - b).abs() <= tol))
}

/// `(1/n) sum_{m<n} T^m_* nu`.
pub fn empirical_average(sys: &FiniteSystem, nu: &ProbMeasure, n: usize) -> Result<ProbMeasure> {
    if n == 0 {
        return invalid("averaging length must be positive");
    }
    if nu.len() != sys.len() {
        return invalid("measure length differs from the number of points");
    }
    let mut acc = vec![0.0; sys.len()];
    let mut cur: Vec<usize> = (0..sys.len()).collect();
    for _ in 0..n {
        for (x, &tx) in cur.iter().enumerate() {
            acc[tx] += nu.get(x);
        }
        for v in cur.iter_mut() {
            *v = sys.step(*v);
        }
    }
    ProbMeasure::normalized(acc.into_iter().map(|v| v / n as f64).collect())
}

/// Measure as a map from point id to weight.
pub fn measure_to_json(sys: &FiniteSystem, mu: &ProbMeasure) -> Result<serde_json::Value> {
    if mu.len() != sys.len() {
        return invalid("measure length differs from the number of points");
    }
    let map: BTreeMap<&str, f64> = sys.ids().iter().map(String::as_str).zip(mu.weights().iter().copied()).collect();
    Ok(serde_json::to_value(map)?)
}

/// Inverse of [`measure_to_json`]; missing ids get weight 0.
pub fn measure_from_json(sys: &FiniteSystem, value: &serde_json::Value) -> Result<ProbMeasure> {
    let map: BTreeMap<String, f64> = serde_json::from_value(value.clone())?;
    let mut w = vec![0.0; sys.len()];
    for (id, v) in map {
        let i = sys.index_of(&id).ok_or_else(|| Error::InvalidInput(format!("unknown point id {id:?}")))?;
        w[i] = v;
    }
    ProbMeasure::new(w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrostmanFamily {
    /// Closed balls with radii from the distance set.
    Balls,
    /// Every subset of diameter below the scale.
    Subsets,
}

impl std::str::FromStr for FrostmanFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "balls" => Ok(Self::Balls),
            "subsets" | "all-small-subsets" => Ok(Self::Subsets),
            _ => invalid(format!("unknown constraint family {s:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrostmanResult {
    pub s: f64,
    pub delta: f64,
    pub grain: f64,
    pub family: FrostmanFamily,
    /// Optimal unnormalized weights.
    pub mass: Vec<f64>,
    /// `mass / sum(mass)` when the optimum is at least 1.
    pub measure: Option<ProbMeasure>,
    pub normalizable: bool,
    pub lp_value: f64,
    pub dual_cover_value: f64,
    /// Optimal fractional cover, one weight per constraint set.
    pub cover_weights: Vec<f64>,
    pub constraint_sets: Vec<Vec<usize>>,
    /// `max_E (mass(E) - bound(E))` over the family.
    pub max_violation: f64,
}

impl FrostmanResult {
    pub fn duality_gap(&self) -> f64 {
        (self.lp_value - self.dual_cover_value).abs()
    }
}

/// Constraint sets of diameter `< delta`.
pub fn frostman_family(metric: &DistMatrix, delta: f64, family: FrostmanFamily) -> Result<Vec<Vec<usize>>> {
    let n = metric.len();
    let mut sets = match family {
        FrostmanFamily::Subsets => {
            if n > SUBSET_FAMILY_LIMIT {
                return Err(Error::BudgetExceeded { what: "all-subsets Frostman family", needed: n, budget: SUBSET_FAMILY_LIMIT });
            }
            ThresholdGraph::new(metric, delta).all_cliques(&(0..n).collect::<Vec<_>>(), 1 << SUBSET_FAMILY_LIMIT)?
        }
        FrostmanFamily::Balls => {
            let mut radii: Vec<f64> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| metric.get(i, j)).collect();
            radii.sort_by(f64::total_cmp);
            radii.dedup();
            let mut out = Vec::new();
            for c in 0..n {
                for &r in &radii {
                    let ball: Vec<usize> = (0..n).filter(|&j| metric.get(c, j) <= r).collect();
                    if metric.diameter(&ball) < delta {
                        out.push(ball);
                    }
                }
            }
            out
        }
    };
    sets.sort();
    sets.dedup();
    Ok(sets)
}

/// Maximal mass subject to `mu(E) <= (tau + diam E)^s` on the family, and the
/// matching minimum fractional cover.
pub fn frostman_measure(metric: &DistMatrix, s: f64, delta: f64, tau: f64, family: FrostmanFamily) -> Result<FrostmanResult> {
    if !(s >= 0.0) || !(delta > 0.0) || !(tau >= 0.0) {
        return invalid("need s >= 0, delta > 0 and tau >= 0");
    }
    let n = metric.len();
    let sets = frostman_family(metric, delta, family)?;
    let bounds: Vec<f64> = sets.iter().map(|e| grained_power(tau + metric.diameter(e), s)).collect();
    let load = |mass: &[f64], e: &[usize]| e.iter().map(|&x| mass[x]).sum::<f64>();

    // Packing side by constraint generation, seeded with the singletons.
    let mut active: Vec<usize> = (0..sets.len()).filter(|&k| sets[k].len() == 1).collect();
    let mut mass = vec![0.0; n];
    let mut lp_value = 0.0;
    for _ in 0..10_000 {
        let rows: Vec<Vec<f64>> = active
            .iter()
            .map(|&k| {
                let mut r = vec![0.0; n];
                sets[k].iter().for_each(|&x| r[x] = 1.0);
                r
            })
            .collect();
        let rhs: Vec<f64> = active.iter().map(|&k| bounds[k]).collect();
        let sol = lp::maximize_packing(&vec![1.0; n], &rows, &rhs)?;
        mass = sol.x;
        lp_value = sol.value;
        let mut violated: Vec<(f64, usize)> = (0..sets.len())
            .map(|k| (load(&mass, &sets[k]) - bounds[k], k))
            .filter(|&(v, k)| v > 1e-12 * (1.0 + bounds[k]))
            .collect();
        if violated.is_empty() {
            break;
        }
        violated.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        active.extend(violated.iter().take(64).map(|&(_, k)| k));
        active.sort_unstable();
        active.dedup();
    }

    // Covering side solved directly over the whole family.
    let cover_rows: Vec<Vec<f64>> =
        (0..n).map(|x| sets.iter().map(|e| if e.contains(&x) { 1.0 } else { 0.0 }).collect()).collect();
    let cover = lp::minimize_covering(&bounds, &cover_rows, &vec![1.0; n])?;

    let max_violation = (0..sets.len()).map(|k| load(&mass, &sets[k]) - bounds[k]).fold(f64::NEG_INFINITY, f64::max);
    let normalizable = lp_value >= 1.0;
    let measure = if normalizable { Some(ProbMeasure::normalized(mass.clone())?) } else { None };
    Ok(FrostmanResult {
        s,
        delta,
        grain: tau,
        family,
        mass,
        measure,
        normalizable,
        lp_value,
        dual_cover_value: cover.value,
        cover_weights: cover.x,
        constraint_sets: sets,
        max_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::build_symbolic;

    #[test]
    fn uniform_product_weights() {
        let model = SymbolicModel::new(vec![0.0, 1.0], 2, 4).unwrap();
        let mu = product_measure(&model, &ProbMeasure::uniform(2).unwrap()).unwrap();
        assert!(mu.weights().iter().all(|&w| (w - 0.25).abs() < 1e-15));
        let sys = build_symbolic(&model, 16).unwrap();
        assert!(is_invariant(&sys, &mu, 0.0).unwrap());
    }

    #[test]
    fn top_uniform_integral_on_midpoint_grid() {
        let m = 16;
        let alphabet: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) / m as f64).collect();
        for k in [1usize, 2, 4] {
            let w = top_uniform_weights(&alphabet, k).unwrap();
            let mean: f64 = alphabet.iter().zip(w.weights()).map(|(a, p)| a * p).sum();
            assert!((mean - (1.0 - 0.5 / k as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn averaging_point_mass_on_two_cycle() {
        let model = SymbolicModel::new(vec![0.0, 1.0], 2, 4).unwrap();
        let sys = build_symbolic(&model, 16).unwrap();
        let x = model.index_of(&[0, 1]);
        let avg = empirical_average(&sys, &ProbMeasure::point_mass(4, x).unwrap(), 2).unwrap();
        assert_eq!(avg.get(x), 0.5);
        assert_eq!(avg.get(model.index_of(&[1, 0])), 0.5);
    }

    #[test]
    fn constant_and_point_mass_integrals() {
        let phi = Potential::new(vec![0.3, 0.9, 0.1], "t").unwrap();
        assert_eq!(integrate(&phi, &ProbMeasure::point_mass(3, 1).unwrap()).unwrap(), 0.9);
        let c = Potential::constant(3, 2.5).unwrap();
        assert!((integrate(&c, &ProbMeasure::new(vec![0.2, 0.3, 0.5]).unwrap()).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn single_point_has_no_mass_without_grain() {
        let m = DistMatrix::from_fn(1, |_, _| 0.0);
        let r = frostman_measure(&m, 1.0, 0.5, 0.0, FrostmanFamily::Subsets).unwrap();
        assert_eq!(r.lp_value, 0.0);
        assert!(!r.normalizable && r.measure.is_none());
    }

    #[test]
    fn four_equidistant_points_with_grain() {
        let m = DistMatrix::from_fn(4, |_, _| 0.5);
        let r = frostman_measure(&m, 2.0, 0.6, 0.25, FrostmanFamily::Subsets).unwrap();
        assert!((r.lp_value - 0.25).abs() < 1e-12);
        assert!(r.duality_gap() < 1e-9);
        assert!(r.max_violation <= 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let sys = FiniteSystem::cycle(3).unwrap();
        let mu = ProbMeasure::new(vec![0.5, 0.25, 0.25]).unwrap();
        let v = measure_to_json(&sys, &mu).unwrap();
        assert_eq!(measure_from_json(&sys, &v).unwrap(), mu);
    }
}
