//! Covering numbers with potential, pressure profiles and metric mean
//! dimension estimates.
//!
//! `#(X, d, phi, eps) = min sum_i (1/eps)^{sup_{U_i} phi}` over covers by sets
//! of diameter `< eps`. Candidate sets are the maximal cliques of the
//! threshold graph truncated at every potential level, `M ∩ {phi <= t}`: any
//! admissible set sits inside such a truncation with the same supremum, so
//! the family is complete for every `eps`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cliques::ThresholdGraph;
use crate::error::{invalid, Error, Result};
use crate::setcover;
use crate::spaces::{birkhoff_sum, bowen_metric, DistMatrix, FiniteSystem, Potential};

pub const DEFAULT_EXACT_BUDGET: usize = 20;
pub const DEFAULT_CLIQUE_BUDGET: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exact,
    Greedy,
}

impl std::str::FromStr for SearchMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Self::Exact),
            "greedy" => Ok(Self::Greedy),
            _ => invalid(format!("unknown search mode {s:?}")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CoverOptions {
    pub mode: SearchMode,
    /// Largest connected component of the threshold graph solved exactly.
    pub exact_budget: usize,
    pub clique_budget: usize,
}

impl Default for CoverOptions {
    fn default() -> Self {
        Self { mode: SearchMode::Exact, exact_budget: DEFAULT_EXACT_BUDGET, clique_budget: DEFAULT_CLIQUE_BUDGET }
    }
}

impl CoverOptions {
    pub fn greedy() -> Self {
        Self { mode: SearchMode::Greedy, ..Self::default() }
    }
}

/// A family of point sets with their diameters and potential suprema.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cover {
    pub sets: Vec<Vec<usize>>,
    pub diameters: Vec<f64>,
    pub sups: Vec<f64>,
}

impl Cover {
    /// Builds a cover, rejecting empty sets and families that miss a point.
    pub fn new(sets: Vec<Vec<usize>>, metric: &DistMatrix, phi: &Potential) -> Result<Self> {
        let n = metric.len();
        phi.check_len(n)?;
        let mut seen = vec![false; n];
        for (k, s) in sets.iter().enumerate() {
            if s.is_empty() {
                return invalid(format!("cover set {k} is empty"));
            }
            for &i in s {
                if i >= n {
                    return invalid(format!("cover set {k} names point {i} outside the space"));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return invalid(format!("point {i} is not covered"));
        }
        let diameters = sets.iter().map(|s| metric.diameter(s)).collect();
        let sups = sets.iter().map(|s| phi.sup_over(s)).collect();
        Ok(Self { sets, diameters, sups })
    }

    pub fn singletons(metric: &DistMatrix, phi: &Potential) -> Result<Self> {
        Self::new((0..metric.len()).map(|i| vec![i]).collect(), metric, phi)
    }

    pub fn len(&self) -> usize {
        self.sets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }

    pub fn mesh(&self) -> f64 {
        self.diameters.iter().copied().fold(0.0, f64::max)
    }

    /// `sum (1/eps)^{sup_U phi}`
    pub fn weight(&self, eps: f64) -> f64 {
        self.sups.iter().map(|&s| (1.0 / eps).powf(s)).sum()
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoveringResult {
    pub value: f64,
    pub log2_value: f64,
    pub cover: Cover,
    /// True when every component was solved to optimality.
    pub exact: bool,
}

/// Candidate sets `M ∩ {phi <= t}` for maximal cliques `M` inside `component`.
pub(crate) fn truncated_cliques(
    graph: &ThresholdGraph,
    component: &[usize],
    phi: &Potential,
    budget: usize,
) -> Result<Vec<Vec<usize>>> {
    let mut family = Vec::new();
    for clique in graph.maximal_cliques(component, budget)? {
        let mut levels: Vec<f64> = clique.iter().map(|&i| phi.get(i)).collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        for t in levels {
            family.push(clique.iter().copied().filter(|&i| phi.get(i) <= t).collect::<Vec<_>>());
        }
    }
    family.sort();
    family.dedup();
    Ok(family)
}

/// Minimum (exact) or greedy upper bound of the covering number with potential.
///
/// Nonincreasing in `eps` only when `phi >= 0`; `log2` of it is subadditive
/// along `(d_N, S_N phi)` only for `eps <= 1`.
pub fn covering_number(metric: &DistMatrix, phi: &Potential, eps: f64, opts: &CoverOptions) -> Result<CoveringResult> {
    if !(eps > 0.0) {
        return invalid(format!("scale must be positive, got {eps}"));
    }
    phi.check_len(metric.len())?;
    let graph = ThresholdGraph::new(metric, eps);
    let base = 1.0 / eps;
    let mut sets = Vec::new();
    for comp in graph.components() {
        if comp.len() == 1 {
            sets.push(comp);
            continue;
        }
        if opts.mode == SearchMode::Exact && comp.len() > opts.exact_budget.min(64) {
            return Err(Error::BudgetExceeded {
                what: "exact covering search (component size)",
                needed: comp.len(),
                budget: opts.exact_budget.min(64),
            });
        }
        let family = truncated_cliques(&graph, &comp, phi, opts.clique_budget)?;
        let weights: Vec<f64> = family.iter().map(|s| base.powf(phi.sup_over(s))).collect();
        let local = |i: usize| comp.binary_search(&i).expect("member of component");
        let chosen = match opts.mode {
            SearchMode::Exact => {
                let masks: Vec<u64> = family.iter().map(|s| s.iter().fold(0u64, |m, &i| m | 1 << local(i))).collect();
                setcover::exact(comp.len(), &masks, &weights)?.chosen
            }
            SearchMode::Greedy => {
                let lists: Vec<Vec<usize>> = family.iter().map(|s| s.iter().map(|&i| local(i)).collect()).collect();
                setcover::greedy(comp.len(), &lists, &weights)?.chosen
            }
        };
        sets.extend(chosen.into_iter().map(|k| family[k].clone()));
    }
    let cover = Cover::new(sets, metric, phi)?;
    let value = cover.weight(eps);
    Ok(CoveringResult { value, log2_value: value.log2(), cover, exact: opts.mode == SearchMode::Exact })
}

/// Covering number with potential by brute force over all admissible subset
/// covers; for testing on at most 10 points.
pub fn covering_number_brute_force(metric: &DistMatrix, phi: &Potential, eps: f64) -> Result<f64> {
    let n = metric.len();
    if n > 10 {
        return invalid("brute force covering is limited to 10 points");
    }
    let full = (1usize << n) - 1;
    let members = |mask: usize| (0..n).filter(|&i| mask >> i & 1 == 1).collect::<Vec<_>>();
    let weight: Vec<Option<f64>> = (0..=full)
        .map(|mask| {
            let s = members(mask);
            (mask != 0 && metric.diameter(&s) < eps).then(|| (1.0 / eps).powf(phi.sup_over(&s)))
        })
        .collect();
    // best[mask] = cheapest cover of exactly the points in mask by admissible sets
    let mut best = vec![f64::INFINITY; full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let mut sub = mask;
        while sub != 0 {
            if sub & low != 0 {
                if let Some(w) = weight[sub] {
                    best[mask] = best[mask].min(w + best[mask & !sub]);
                }
            }
            sub = (sub - 1) & mask;
        }
    }
    Ok(best[full])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PressureRow {
    pub n: usize,
    pub eps: f64,
    pub log_cov: f64,
    pub rate: f64,
    /// Every pair is at `d_N`-distance `>= eps`, so the cover is forced to be singletons.
    pub singletons_forced: bool,
    pub exact: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PressureProfile {
    pub rows: Vec<PressureRow>,
}

impl PressureProfile {
    pub fn eps_values(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.rows.iter().map(|r| r.eps).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v.dedup();
        v
    }

    fn rows_at(&self, eps: f64) -> impl Iterator<Item = &PressureRow> {
        self.rows.iter().filter(move |r| r.eps == eps)
    }

    /// `inf_N log #/N`, an upper bound for the pressure at `eps`.
    pub fn inf_rate(&self, eps: f64) -> Option<f64> {
        self.rows_at(eps).map(|r| r.rate).min_by(f64::total_cmp)
    }

    /// Rate at the largest computed `N`.
    pub fn last_rate(&self, eps: f64) -> Option<f64> {
        self.rows_at(eps).max_by_key(|r| r.n).map(|r| r.rate)
    }

    pub fn log_cov(&self, n: usize, eps: f64) -> Option<f64> {
        self.rows_at(eps).find(|r| r.n == n).map(|r| r.log_cov)
    }

    pub fn saturated(&self, eps: f64) -> bool {
        self.rows_at(eps).all(|r| r.singletons_forced)
    }
}

/// Covering numbers on `(d_N, S_N phi)` for `1 <= N <= n_max` and every scale.
pub fn pressure_profile(
    sys: &FiniteSystem,
    phi: &Potential,
    eps_grid: &[f64],
    n_max: usize,
    opts: &CoverOptions,
) -> Result<PressureProfile> {
    pressure_profile_for(sys, phi, eps_grid, &(1..=n_max).collect::<Vec<_>>(), opts)
}

/// As [`pressure_profile`] for an explicit list of block lengths.
pub fn pressure_profile_for(
    sys: &FiniteSystem,
    phi: &Potential,
    eps_grid: &[f64],
    ns: &[usize],
    opts: &CoverOptions,
) -> Result<PressureProfile> {
    if ns.is_empty() || ns.contains(&0) {
        return invalid("block lengths must be positive and nonempty");
    }
    if eps_grid.is_empty() || eps_grid.iter().any(|e| !(*e > 0.0)) {
        return invalid("scales must be positive and nonempty");
    }
    let layers: Vec<(usize, DistMatrix, Potential)> = ns
        .iter()
        .map(|&n| Ok((n, bowen_metric(sys, n)?, birkhoff_sum(sys, phi, n)?)))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, f64)> =
        (0..layers.len()).flat_map(|l| eps_grid.iter().map(move |&e| (l, e))).collect();
    let rows = cells
        .par_iter()
        .map(|&(l, eps)| {
            let (n, metric, sn) = &layers[l];
            let res = covering_number(metric, sn, eps, opts)?;
            let forced = metric.min_positive().is_none_or(|m| m >= eps);
            Ok(PressureRow {
                n: *n,
                eps,
                log_cov: res.log2_value,
                rate: res.log2_value / *n as f64,
                singletons_forced: forced,
                exact: res.exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PressureProfile { rows })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeEstimate {
    pub upper: f64,
    pub lower: f64,
    pub fit_slope: f64,
    /// Largest scale at which every block length already sees only singletons.
    pub saturation_eps: Option<f64>,
    /// `(eps, P_est(eps), P_est(eps)/log2(1/eps))` over the resolvable range.
    pub points: Vec<(f64, f64, f64)>,
}

/// Least-squares slope of `ys` against `xs`.
pub fn lsq_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Ratio and slope statistics of `values(eps)` against `log2(1/eps)` for `eps < 1`.
pub fn slope_statistics(pairs: &[(f64, f64)], saturation_eps: Option<f64>) -> Result<SlopeEstimate> {
    let usable: Vec<(f64, f64)> = pairs.iter().copied().filter(|(e, _)| *e < 1.0).collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientGrid { needed: 3, got: usable.len() });
    }
    let points: Vec<(f64, f64, f64)> = usable.iter().map(|&(e, p)| (e, p, p / crate::log_inv(e))).collect();
    let upper = points.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    let lower = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = points.iter().map(|p| crate::log_inv(p.0)).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    Ok(SlopeEstimate { upper, lower, fit_slope: lsq_slope(&xs, &ys), saturation_eps, points })
}

/// Upper/lower ratio `P_est(eps)/log2(1/eps)` and the least-squares slope of
/// `P_est` against `log2(1/eps)`, with `P_est = inf_N` rate.
pub fn mdim_m_estimate(profile: &PressureProfile) -> Result<SlopeEstimate> {
    let eps = profile.eps_values();
    let pairs: Vec<(f64, f64)> = eps.iter().map(|&e| (e, profile.inf_rate(e).expect("row exists"))).collect();
    let saturation = eps.iter().copied().filter(|&e| profile.saturated(e)).fold(None, |m: Option<f64>, e| {
        Some(m.map_or(e, |m| m.max(e)))
    });
    slope_statistics(&pairs, saturation)
}

/// Metric `d'(x,y) = sum_k 2^{-k} |d(x,x_k) - d(y,x_k)|` with anchors `x_1, x_2, ...`
/// taken in sorted point-id order. `d' <= d` by the reverse triangle inequality.
pub fn tame_metric_transform(sys: &FiniteSystem) -> Result<FiniteSystem> {
    let mut anchors: Vec<usize> = (0..sys.len()).collect();
    anchors.sort_by(|&a, &b| sys.ids()[a].cmp(&sys.ids()[b]));
    let d = sys.dist();
    let dist = DistMatrix::from_fn(sys.len(), |i, j| {
        anchors
            .iter()
            .enumerate()
            .map(|(k, &a)| 0.5f64.powi(k as i32 + 1) * (d.get(i, a) - d.get(j, a)).abs())
            .sum()
    });
    sys.with_metric_trusted(dist, format!("tame({})", sys.label()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TameRow {
    pub eps: f64,
    pub delta: f64,
    pub log_cov: f64,
    pub value: f64,
}

/// Table of `eps^delta * log2 #(X, d, eps)` with `phi = 0`.
pub fn tame_growth_report(sys: &FiniteSystem, deltas: &[f64], eps_grid: &[f64], opts: &CoverOptions) -> Result<Vec<TameRow>> {
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return invalid("tame-growth exponents must be positive");
    }
    let zero = Potential::zero(sys.len());
    let mut rows = Vec::new();
    for &eps in eps_grid {
        let log_cov = covering_number(sys.dist(), &zero, eps, opts)?.log2_value;
        for &delta in deltas {
            rows.push(TameRow { eps, delta, log_cov, value: eps.powf(delta) * log_cov });
        }
    }
    Ok(rows)
}
