//! Hausdorff content with potential and its scale-dependent dimension.
//!
//! `H^s_eps = min sum_i base(E_i)^{s - sup_{E_i} phi}` over covers by sets of
//! diameter `< eps`, where `base(E) = max(diam E, tau)` (or `tau + diam E`)
//! for a grain `tau >= 0`, with `0^0 = 1` and `0^t = 0` for `t > 0`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cliques::ThresholdGraph;
use crate::covering::{truncated_cliques, Cover, SearchMode, DEFAULT_CLIQUE_BUDGET, DEFAULT_EXACT_BUDGET};
use crate::error::{invalid, Error, Result};
use crate::setcover;
use crate::spaces::{average_metric, birkhoff_sum, bowen_metric, DistMatrix, FiniteSystem, Potential};

pub const DEFAULT_FAMILY_BUDGET: usize = 1 << 16;
pub const BISECTION_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Max,
    Average,
}

impl std::str::FromStr for MetricKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Self::Max),
            "avg" | "average" => Ok(Self::Average),
            _ => invalid(format!("unknown metric kind {s:?}")),
        }
    }
}

/// How the grain enters the base of a set's cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GrainRule {
    /// `max(diam, tau)`; `tau = 0` is the grain-free content.
    Max,
    /// `tau + diam`
    Additive,
}

impl GrainRule {
    #[inline]
    pub fn base(self, diam: f64, tau: f64) -> f64 {
        match self {
            Self::Max => diam.max(tau),
            Self::Additive => diam + tau,
        }
    }
}

/// `base^exponent` with `0^0 = 1` and `0^t = 0` for `t > 0`.
#[inline]
pub fn grained_power(base: f64, exponent: f64) -> f64 {
    if exponent == 0.0 {
        1.0
    } else if base == 0.0 {
        0.0
    } else {
        base.powf(exponent)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffQuery {
    pub s: f64,
    pub eps: f64,
    pub grain: f64,
    pub rule: GrainRule,
}

impl HausdorffQuery {
    pub fn new(s: f64, eps: f64, grain: f64) -> Self {
        Self { s, eps, grain, rule: GrainRule::Max }
    }
}

#[derive(Clone, Debug)]
pub struct ContentOptions {
    pub mode: SearchMode,
    pub exact_budget: usize,
    /// Largest number of candidate sets per component in exact mode.
    pub family_budget: usize,
}

impl Default for ContentOptions {
    fn default() -> Self {
        Self { mode: SearchMode::Exact, exact_budget: DEFAULT_EXACT_BUDGET, family_budget: DEFAULT_FAMILY_BUDGET }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContentResult {
    pub value: f64,
    pub cover: Cover,
    pub exact: bool,
}

/// Precomputed candidate family per threshold-graph component; reused across exponents.
struct ContentFamily {
    components: Vec<ComponentFamily>,
}

struct ComponentFamily {
    points: Vec<usize>,
    sets: Vec<Vec<usize>>,
    masks: Vec<u64>,
    diameters: Vec<f64>,
    sups: Vec<f64>,
}

impl ContentFamily {
    fn build(metric: &DistMatrix, phi: &Potential, eps: f64, opts: &ContentOptions) -> Result<Self> {
        let graph = ThresholdGraph::new(metric, eps);
        let mut components = Vec::new();
        for comp in graph.components() {
            let sets = if comp.len() == 1 {
                vec![comp.clone()]
            } else {
                match opts.mode {
                    SearchMode::Exact => {
                        if comp.len() > opts.exact_budget.min(64) {
                            return Err(Error::BudgetExceeded {
                                what: "exact content search (component size)",
                                needed: comp.len(),
                                budget: opts.exact_budget.min(64),
                            });
                        }
                        graph.all_cliques(&comp, opts.family_budget)?
                    }
                    SearchMode::Greedy => {
                        let mut f = truncated_cliques(&graph, &comp, phi, DEFAULT_CLIQUE_BUDGET)?;
                        f.extend(comp.iter().map(|&i| vec![i]));
                        f.sort();
                        f.dedup();
                        f
                    }
                }
            };
            let masks = if opts.mode == SearchMode::Exact {
                sets.iter()
                    .map(|s| s.iter().fold(0u64, |m, &i| m | 1 << comp.binary_search(&i).expect("member")))
                    .collect()
            } else {
                Vec::new()
            };
            let diameters = sets.iter().map(|s| metric.diameter(s)).collect();
            let sups = sets.iter().map(|s| phi.sup_over(s)).collect();
            components.push(ComponentFamily { points: comp, sets, masks, diameters, sups });
        }
        Ok(Self { components })
    }

    fn max_base(&self, q: &HausdorffQuery) -> f64 {
        self.components
            .iter()
            .flat_map(|c| c.diameters.iter())
            .map(|&d| q.rule.base(d, q.grain))
            .fold(0.0, f64::max)
    }

    fn evaluate(&self, q: &HausdorffQuery, mode: SearchMode) -> Result<(f64, Vec<Vec<usize>>)> {
        let mut total = 0.0;
        let mut chosen_sets = Vec::new();
        for c in &self.components {
            let weights: Vec<f64> = c
                .diameters
                .iter()
                .zip(&c.sups)
                .map(|(&d, &sup)| grained_power(q.rule.base(d, q.grain), q.s - sup))
                .collect();
            let chosen = match mode {
                SearchMode::Exact if c.points.len() > 1 => setcover::exact(c.points.len(), &c.masks, &weights)?.chosen,
                _ if c.points.len() == 1 => vec![0],
                _ => {
                    let lists: Vec<Vec<usize>> = c
                        .sets
                        .iter()
                        .map(|s| s.iter().map(|i| c.points.binary_search(i).expect("member")).collect())
                        .collect();
                    setcover::greedy(c.points.len(), &lists, &weights)?.chosen
                }
            };
            for k in chosen {
                total += weights[k];
                chosen_sets.push(c.sets[k].clone());
            }
        }
        Ok((total, chosen_sets))
    }
}

fn check_query(phi: &Potential, q: &HausdorffQuery) -> Result<()> {
    if !(q.eps > 0.0) {
        return Err(Error::InvalidQuery(format!("scale must be positive, got {}", q.eps)));
    }
    if !(q.grain >= 0.0) {
        return Err(Error::InvalidQuery(format!("grain must be nonnegative, got {}", q.grain)));
    }
    if q.s < phi.max() {
        return Err(Error::InvalidQuery(format!("exponent {} is below max potential {}", q.s, phi.max())));
    }
    Ok(())
}

/// Minimum (exact) or greedy upper bound of the grained content.
pub fn hausdorff_content(
    metric: &DistMatrix,
    phi: &Potential,
    q: &HausdorffQuery,
    opts: &ContentOptions,
) -> Result<ContentResult> {
    phi.check_len(metric.len())?;
    check_query(phi, q)?;
    let family = ContentFamily::build(metric, phi, q.eps, opts)?;
    let (value, sets) = family.evaluate(q, opts.mode)?;
    Ok(ContentResult { value, cover: Cover::new(sets, metric, phi)?, exact: opts.mode == SearchMode::Exact })
}

/// Brute-force content over all admissible subset covers; at most 10 points.
pub fn hausdorff_content_brute_force(metric: &DistMatrix, phi: &Potential, q: &HausdorffQuery) -> Result<f64> {
    let n = metric.len();
    if n > 10 {
        return invalid("brute force content is limited to 10 points");
    }
    let full = (1usize << n) - 1;
    let cost: Vec<Option<f64>> = (0..=full)
        .map(|mask| {
            let s: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).collect();
            let d = metric.diameter(&s);
            (mask != 0 && d < q.eps).then(|| grained_power(q.rule.base(d, q.grain), q.s - phi.sup_over(&s)))
        })
        .collect();
    let mut best = vec![f64::INFINITY; full + 1];
    best[0] = 0.0;
    for mask in 1..=full {
        let low = mask & mask.wrapping_neg();
        let mut sub = mask;
        while sub != 0 {
            if sub & low != 0 {
                if let Some(c) = cost[sub] {
                    best[mask] = best[mask].min(c + best[mask & !sub]);
                }
            }
            sub = (sub - 1) & mask;
        }
    }
    Ok(best[full])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimResult {
    pub dim: f64,
    pub exact: bool,
    pub bracket: (f64, f64),
}

/// Largest `s >= max phi` with content `>= 1`, by bisection to `1e-6`.
///
/// Requires every effective base to be at most 1 so the content is
/// nonincreasing in `s`.
pub fn dim_at_scale(
    metric: &DistMatrix,
    phi: &Potential,
    eps: f64,
    grain: f64,
    rule: GrainRule,
    opts: &ContentOptions,
) -> Result<DimResult> {
    phi.check_len(metric.len())?;
    let lo0 = phi.max();
    let probe = HausdorffQuery { s: lo0, eps, grain, rule };
    check_query(phi, &probe)?;
    let family = ContentFamily::build(metric, phi, eps, opts)?;
    let max_base = family.max_base(&probe);
    if max_base > 1.0 {
        return Err(Error::NonmonotoneContent(format!(
            "effective set size {max_base} exceeds 1 at scale {eps} with grain {grain}"
        )));
    }
    let n = metric.len() as f64;
    let mut hi = lo0 + 1.0;
    if grain > 0.0 && grain < 1.0 && n > 1.0 {
        hi += n.log2() / crate::log_inv(grain);
    }
    let content = |s: f64| family.evaluate(&HausdorffQuery { s, eps, grain, rule }, opts.mode).map(|r| r.0);
    let mut lo = lo0;
    if content(hi)? >= 1.0 {
        // Unit-size sets at grain 1 keep the content at or above 1 for every exponent.
        return Ok(DimResult { dim: hi, exact: opts.mode == SearchMode::Exact, bracket: (lo0, hi) });
    }
    let top = hi;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        if content(mid)? >= 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(DimResult { dim: lo, exact: opts.mode == SearchMode::Exact, bracket: (lo0, top) })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HausdorffRow {
    pub n: usize,
    pub eps: f64,
    pub metric: MetricKind,
    pub grain: f64,
    pub dim: f64,
    pub rate: f64,
    pub exact: bool,
}

/// `dim_at_scale(d_N or dbar_N, S_N phi, eps)/N` for `1 <= N <= n_max`.
///
/// `grain = None` uses the smallest positive base distance.
pub fn mean_hausdorff_profile(
    sys: &FiniteSystem,
    phi: &Potential,
    eps_grid: &[f64],
    n_max: usize,
    kind: MetricKind,
    grain: Option<f64>,
    opts: &ContentOptions,
) -> Result<Vec<HausdorffRow>> {
    if n_max == 0 {
        return invalid("N must be at least 1");
    }
    let tau = grain.unwrap_or_else(|| sys.dist().min_positive().unwrap_or(0.0));
    let layers: Vec<(usize, DistMatrix, Potential)> = (1..=n_max)
        .map(|n| {
            let m = match kind {
                MetricKind::Max => bowen_metric(sys, n)?,
                MetricKind::Average => average_metric(sys, n)?,
            };
            Ok((n, m, birkhoff_sum(sys, phi, n)?))
        })
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, f64)> = (0..layers.len()).flat_map(|l| eps_grid.iter().map(move |&e| (l, e))).collect();
    cells
        .par_iter()
        .map(|&(l, eps)| {
            let (n, m, sn) = &layers[l];
            let r = dim_at_scale(m, sn, eps, tau, GrainRule::Max, opts)?;
            Ok(HausdorffRow { n: *n, eps, metric: kind, grain: tau, dim: r.dim, rate: r.dim / *n as f64, exact: r.exact })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equilateral(n: usize, d: f64) -> DistMatrix {
        DistMatrix::from_fn(n, |_, _| d)
    }

    #[test]
    fn single_point_conventions() {
        let m = DistMatrix::from_fn(1, |_, _| 0.0);
        let phi = Potential::constant(1, 0.4).unwrap();
        let o = ContentOptions::default();
        assert_eq!(hausdorff_content(&m, &phi, &HausdorffQuery::new(0.4, 0.5, 0.0), &o).unwrap().value, 1.0);
        assert_eq!(hausdorff_content(&m, &phi, &HausdorffQuery::new(0.9, 0.5, 0.0), &o).unwrap().value, 0.0);
        let d = dim_at_scale(&m, &phi, 0.5, 0.0, GrainRule::Max, &o).unwrap();
        assert!((d.dim - 0.4).abs() < 1e-6);
    }

    #[test]
    fn four_equidistant_points_with_grain() {
        let m = equilateral(4, 0.5);
        let phi = Potential::zero(4);
        let q = HausdorffQuery::new(2.0, 0.4, 0.5);
        let o = ContentOptions::default();
        let v = hausdorff_content(&m, &phi, &q, &o).unwrap().value;
        assert!((v - 1.0).abs() < 1e-12);
        assert!((hausdorff_content_brute_force(&m, &phi, &q).unwrap() - 1.0).abs() < 1e-12);
        let d = dim_at_scale(&m, &phi, 0.4, 0.5, GrainRule::Max, &o).unwrap();
        assert!((d.dim - 2.0).abs() < 2e-6);
    }

    #[test]
    fn two_points_without_grain_have_dimension_zero() {
        let m = equilateral(2, 0.5);
        let d = dim_at_scale(&m, &Potential::zero(2), 0.3, 0.0, GrainRule::Max, &ContentOptions::default()).unwrap();
        assert!(d.dim.abs() < 1e-6);
    }

    #[test]
    fn rejects_low_exponent_and_large_sets() {
        let m = equilateral(2, 1.5);
        let phi = Potential::constant(2, 1.0).unwrap();
        let o = ContentOptions::default();
        let err = hausdorff_content(&m, &phi, &HausdorffQuery::new(0.5, 0.4, 0.0), &o);
        assert!(matches!(err, Err(Error::InvalidQuery(_))));
        let err = dim_at_scale(&m, &phi, 2.0, 0.0, GrainRule::Max, &o);
        assert!(matches!(err, Err(Error::NonmonotoneContent(_))));
    }

    #[test]
    fn exact_matches_brute_force_with_potential() {
        let pos: [f64; 6] = [0.0, 0.1, 0.15, 0.4, 0.42, 0.7];
        let m = DistMatrix::from_fn(6, |i, j| (pos[i] - pos[j]).abs());
        let phi = Potential::new(vec![0.1, 0.5, 0.0, 0.3, 0.3, 0.9], "p").unwrap();
        for (s, eps, tau) in [(0.9, 0.2, 0.05), (1.4, 0.35, 0.0), (2.0, 0.5, 0.1)] {
            for rule in [GrainRule::Max, GrainRule::Additive] {
                let q = HausdorffQuery { s, eps, grain: tau, rule };
                let v = hausdorff_content(&m, &phi, &q, &ContentOptions::default()).unwrap().value;
                let b = hausdorff_content_brute_force(&m, &phi, &q).unwrap();
                assert!((v - b).abs() < 1e-12, "{v} vs {b}");
                let g = hausdorff_content(&m, &phi, &q, &ContentOptions { mode: SearchMode::Greedy, ..Default::default() })
                    .unwrap()
                    .value;
                assert!(g >= b - 1e-12);
            }
        }
    }

    #[test]
    fn single_point_profile_is_constant() {
        let sys = FiniteSystem::cycle(1).unwrap();
        let phi = Potential::constant(1, 0.3).unwrap();
        let rows =
            mean_hausdorff_profile(&sys, &phi, &[0.5, 0.1], 3, MetricKind::Max, None, &ContentOptions::default()).unwrap();
        for r in rows {
            assert!((r.rate - 0.3).abs() < 1e-6);
        }
    }
}
