//! Nerves of covers and width-dimension upper bounds.
//!
//! For a cover `U` of mesh `< eps`, the barycentric map sending `x` to the
//! barycenter of its carrier `sigma(x) = {i : x in U_i}` is an
//! `eps`-embedding into the nerve. Its local dimensions are
//! `|sigma(x)| - 1` (small variant) and `max |M| - 1` over maximal carriers
//! `M ⊇ sigma(x)` (standard variant), so every cover yields upper bounds.

use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cliques::ThresholdGraph;
use crate::covering::{Cover, DEFAULT_CLIQUE_BUDGET};
use crate::error::{invalid, Error, Result};
use crate::spaces::{birkhoff_sum, bowen_metric, DistMatrix, FiniteSystem, Potential};

/// Candidate families with at most this many sets are searched exhaustively.
pub const DEFAULT_EXHAUSTIVE_SETS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverStrategy {
    Cliques,
    Balls,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WidimVariant {
    Standard,
    Small,
}

impl std::str::FromStr for WidimVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(Self::Standard),
            "small" => Ok(Self::Small),
            _ => invalid(format!("unknown widim variant {s:?}")),
        }
    }
}

/// Radius factor keeping closed balls strictly below the scale in diameter.
const BALL_SHRINK: f64 = 1.0 - 1.0 / (1u64 << 20) as f64;

/// Point sets of diameter `< eps` covering the space.
pub fn build_cover_for_scale(metric: &DistMatrix, eps: f64, strategy: CoverStrategy) -> Result<Vec<Vec<usize>>> {
    if !(eps > 0.0) {
        return invalid(format!("scale must be positive, got {eps}"));
    }
    let n = metric.len();
    let mut sets = match strategy {
        CoverStrategy::Cliques => {
            let g = ThresholdGraph::new(metric, eps);
            g.maximal_cliques(&(0..n).collect::<Vec<_>>(), DEFAULT_CLIQUE_BUDGET)?
        }
        CoverStrategy::Balls => {
            let r = 0.5 * eps * BALL_SHRINK;
            (0..n).map(|c| (0..n).filter(|&j| metric.get(c, j) <= r).collect()).collect()
        }
    };
    sets.sort();
    sets.dedup();
    Ok(sets)
}

/// Nerve of a finite cover, stored through its carriers.
#[derive(Clone, Debug)]
pub struct NerveComplex {
    carriers: Vec<Vec<usize>>,
    maximal: Vec<Vec<usize>>,
    vertex_count: usize,
}

impl NerveComplex {
    /// Empty sets are dropped, which makes the canonical map essential.
    pub fn new(sets: &[Vec<usize>], num_points: usize) -> Result<Self> {
        let sets: Vec<&Vec<usize>> = sets.iter().filter(|s| !s.is_empty()).collect();
        let mut carriers = vec![Vec::new(); num_points];
        for (k, s) in sets.iter().enumerate() {
            for &x in s.iter() {
                if x >= num_points {
                    return invalid(format!("cover names point {x} outside the space"));
                }
                if carriers[x].last() != Some(&k) {
                    carriers[x].push(k);
                }
            }
        }
        if let Some(x) = carriers.iter().position(Vec::is_empty) {
            return invalid(format!("point {x} is not covered"));
        }
        let mut distinct = carriers.clone();
        distinct.sort();
        distinct.dedup();
        let maximal = distinct
            .iter()
            .filter(|c| !distinct.iter().any(|d| d.len() > c.len() && is_subset(c, d)))
            .cloned()
            .collect();
        Ok(Self { carriers, maximal, vertex_count: sets.len() })
    }

    pub fn of_cover(cover: &Cover, num_points: usize) -> Result<Self> {
        Self::new(&cover.sets, num_points)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Sorted vertex indices of the sets containing `x`.
    pub fn carrier(&self, x: usize) -> &[usize] {
        &self.carriers[x]
    }

    pub fn maximal_simplexes(&self) -> &[Vec<usize>] {
        &self.maximal
    }

    /// A point lying in every set of the subfamily.
    pub fn witness(&self, simplex: &[usize]) -> Option<usize> {
        self.carriers.iter().position(|c| is_subset(simplex, c))
    }

    pub fn contains(&self, simplex: &[usize]) -> bool {
        !simplex.is_empty() && self.maximal.iter().any(|m| is_subset(simplex, m))
    }

    /// Every simplex, as sorted vertex lists; fails past `budget` simplexes.
    pub fn simplexes(&self, budget: usize) -> Result<Vec<Vec<usize>>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for m in &self.maximal {
            if m.len() >= usize::BITS as usize - 1 || (1usize << m.len()) > budget {
                return Err(Error::BudgetExceeded { what: "simplex enumeration", needed: usize::MAX, budget });
            }
            for mask in 1usize..(1 << m.len()) {
                out.push((0..m.len()).filter(|&b| mask >> b & 1 == 1).map(|b| m[b]).collect());
            }
            if out.len() > budget * 2 {
                out.sort();
                out.dedup();
            }
        }
        out.sort();
        out.dedup();
        if out.len() > budget {
            return Err(Error::BudgetExceeded { what: "simplex enumeration", needed: out.len(), budget });
        }
        Ok(out)
    }

    /// Number of 1-simplexes.
    pub fn edge_count(&self) -> usize {
        self.simplexes(1 << 20).map(|s| s.iter().filter(|v| v.len() == 2).count()).unwrap_or(0)
    }

    /// Dimension of the smallest simplex containing the image of `x`.
    pub fn small_local_dim(&self, x: usize) -> usize {
        self.carriers[x].len() - 1
    }

    /// Dimension of the largest simplex containing the image of `x`.
    pub fn local_dim(&self, x: usize) -> usize {
        let c = &self.carriers[x];
        self.maximal.iter().filter(|m| is_subset(c, m)).map(|m| m.len() - 1).max().expect("carrier lies in a maximal simplex")
    }

    pub fn objective(&self, phi: &Potential, variant: WidimVariant) -> f64 {
        (0..self.carriers.len())
            .map(|x| {
                let d = match variant {
                    WidimVariant::Small => self.small_local_dim(x),
                    WidimVariant::Standard => self.local_dim(x),
                };
                d as f64 + phi.get(x)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// [`Self::objective`] with the maximum taken in exact arithmetic.
    pub fn objective_exact(&self, phi: &Potential, variant: WidimVariant) -> ExactTerm {
        let mut best: Option<(BigRational, ExactTerm)> = None;
        for x in 0..self.carriers.len() {
            let dim = match variant {
                WidimVariant::Small => self.small_local_dim(x),
                WidimVariant::Standard => self.local_dim(x),
            };
            let term = ExactTerm { dim, phi: phi.get(x) };
            let q = term.to_rational();
            if best.as_ref().is_none_or(|(b, _)| q > *b) {
                best = Some((q, term));
            }
        }
        best.expect("nonempty space").1
    }
}

/// The real number `dim + phi`, kept unrounded.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactTerm {
    pub dim: usize,
    pub phi: f64,
}

impl ExactTerm {
    /// Nearest float.
    pub fn value(&self) -> f64 {
        self.dim as f64 + self.phi
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::from_integer(self.dim.into()) + exact(self.phi)
    }
}

/// Exact value of a finite float.
pub fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite value")
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            return false;
        }
    }
    true
}

/// `max_x (D(x) + phi(x))` for the nerve of `sets`.
pub fn cover_objective(sets: &[Vec<usize>], phi: &Potential, variant: WidimVariant) -> Result<f64> {
    Ok(NerveComplex::new(sets, phi.len())?.objective(phi, variant))
}

/// `var_eps(phi) = max |phi(x) - phi(y)|` over pairs with `d(x,y) < eps`.
pub fn variation(phi: &Potential, metric: &DistMatrix, eps: f64) -> f64 {
    let n = metric.len();
    let mut v: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            if metric.get(i, j) < eps {
                v = v.max((phi.get(i) - phi.get(j)).abs());
            }
        }
    }
    v
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WidimResult {
    pub value: f64,
    pub cover: Vec<Vec<usize>>,
    pub covers_examined: usize,
}

/// Candidate covers: clique cover, ball cover, singletons, and either every
/// covering subfamily of the combined set family (when it has at most
/// `exhaustive_sets` members) or a set-removal descent from each base cover.
fn candidate_covers(metric: &DistMatrix, eps: f64, exhaustive_sets: usize) -> Result<Vec<Vec<Vec<usize>>>> {
    let n = metric.len();
    let cliques = build_cover_for_scale(metric, eps, CoverStrategy::Cliques)?;
    let balls = build_cover_for_scale(metric, eps, CoverStrategy::Balls)?;
    let singletons: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut family: Vec<Vec<usize>> = cliques.iter().chain(&balls).chain(&singletons).cloned().collect();
    family.sort();
    family.dedup();
    let mut covers = vec![cliques, balls, singletons];
    if family.len() <= exhaustive_sets {
        for mask in 1u32..(1 << family.len()) {
            let pick: Vec<Vec<usize>> =
                (0..family.len()).filter(|&k| mask >> k & 1 == 1).map(|k| family[k].clone()).collect();
            let mut seen = vec![false; n];
            pick.iter().flatten().for_each(|&x| seen[x] = true);
            if seen.iter().all(|&s| s) {
                covers.push(pick);
            }
        }
    } else {
        let bases = covers.clone();
        for base in bases {
            covers.push(prune_redundant(base, n));
        }
    }
    Ok(covers)
}

/// Drops sets whose points are all covered by the rest, largest overlap first.
fn prune_redundant(mut sets: Vec<Vec<usize>>, n: usize) -> Vec<Vec<usize>> {
    loop {
        let mut count = vec![0usize; n];
        sets.iter().flatten().for_each(|&x| count[x] += 1);
        let removable = (0..sets.len()).filter(|&k| sets[k].iter().all(|&x| count[x] > 1)).max_by_key(|&k| sets[k].len());
        match removable {
            Some(k) => {
                sets.remove(k);
            }
            None => return sets,
        }
    }
}

/// Nerve-based upper bound on `widim_eps` (standard) or `widim'_eps` (small).
pub fn widim_upper(
    metric: &DistMatrix,
    phi: &Potential,
    eps: f64,
    variant: WidimVariant,
    exhaustive_sets: usize,
) -> Result<WidimResult> {
    phi.check_len(metric.len())?;
    let covers = candidate_covers(metric, eps, exhaustive_sets)?;
    let floor = phi.max();
    let mut best: Option<(f64, Vec<Vec<usize>>)> = None;
    let mut examined = 0;
    for cover in covers {
        examined += 1;
        let v = cover_objective(&cover, phi, variant)?;
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            best = Some((v, cover));
        }
        if best.as_ref().is_some_and(|(b, _)| *b <= floor) {
            break;
        }
    }
    let (value, cover) = best.expect("singleton cover is always a candidate");
    Ok(WidimResult { value, cover, covers_examined: examined })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WidimChain {
    pub small: f64,
    pub standard: f64,
    pub variation: f64,
    pub small_term: ExactTerm,
    pub standard_term: ExactTerm,
    /// `(phi(x), phi(y))` attaining the variation; `(0, 0)` when no pair is close.
    pub variation_pair: (f64, f64),
    /// The chain on the minima, compared exactly.
    pub holds: bool,
    /// Every candidate cover satisfies `small <= standard <= small + var` on its own.
    pub holds_per_cover: bool,
}

impl WidimChain {
    pub fn variation_exact(&self) -> BigRational {
        exact(self.variation_pair.0) - exact(self.variation_pair.1)
    }
}

/// Close pair with the largest exact potential gap, as `(larger, smaller)` values.
fn variation_pair(phi: &Potential, metric: &DistMatrix, eps: f64) -> (f64, f64) {
    let n = metric.len();
    let q: Vec<BigRational> = (0..n).map(|i| exact(phi.get(i))).collect();
    let mut best: Option<(BigRational, usize, usize)> = None;
    for i in 0..n {
        for j in 0..n {
            if i != j && metric.get(i, j) < eps && q[i] >= q[j] {
                let gap = &q[i] - &q[j];
                if best.as_ref().is_none_or(|(b, _, _)| gap > *b) {
                    best = Some((gap, i, j));
                }
            }
        }
    }
    best.map_or((0.0, 0.0), |(_, i, j)| (phi.get(i), phi.get(j)))
}

/// Both variants minimized over the same candidate family, with the lemma
/// chain `small <= standard <= small + var_eps` checked in exact arithmetic.
pub fn widim_chain(metric: &DistMatrix, phi: &Potential, eps: f64, exhaustive_sets: usize) -> Result<WidimChain> {
    phi.check_len(metric.len())?;
    let pair = variation_pair(phi, metric, eps);
    let var = exact(pair.0) - exact(pair.1);
    let mut small: Option<(BigRational, ExactTerm)> = None;
    let mut standard: Option<(BigRational, ExactTerm)> = None;
    let mut per_cover = true;
    for cover in candidate_covers(metric, eps, exhaustive_sets)? {
        let nerve = NerveComplex::new(&cover, metric.len())?;
        let a = nerve.objective_exact(phi, WidimVariant::Small);
        let b = nerve.objective_exact(phi, WidimVariant::Standard);
        let (aq, bq) = (a.to_rational(), b.to_rational());
        per_cover &= aq <= bq && bq <= &aq + &var;
        if small.as_ref().is_none_or(|(m, _)| aq < *m) {
            small = Some((aq, a));
        }
        if standard.as_ref().is_none_or(|(m, _)| bq < *m) {
            standard = Some((bq, b));
        }
    }
    let (sq, st) = small.expect("singleton cover is always a candidate");
    let (tq, tt) = standard.expect("singleton cover is always a candidate");
    Ok(WidimChain {
        small: st.value(),
        standard: tt.value(),
        variation: pair.0 - pair.1,
        small_term: st,
        standard_term: tt,
        variation_pair: pair,
        holds: sq <= tq && tq <= &sq + &var,
        holds_per_cover: per_cover,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MdimRow {
    pub n: usize,
    pub eps: f64,
    pub small: f64,
    pub standard: f64,
    pub small_rate: f64,
    pub standard_rate: f64,
}

/// Width-dimension upper bounds on `(d_N, S_N phi)` divided by `N`.
pub fn mdim_profile(
    sys: &FiniteSystem,
    phi: &Potential,
    eps_grid: &[f64],
    n_max: usize,
    exhaustive_sets: usize,
) -> Result<Vec<MdimRow>> {
    if n_max == 0 {
        return invalid("N must be at least 1");
    }
    let layers: Vec<(usize, DistMatrix, Potential)> = (1..=n_max)
        .map(|n| Ok((n, bowen_metric(sys, n)?, birkhoff_sum(sys, phi, n)?)))
        .collect::<Result<_>>()?;
    let cells: Vec<(usize, f64)> = (0..layers.len()).flat_map(|l| eps_grid.iter().map(move |&e| (l, e))).collect();
    cells
        .par_iter()
        .map(|&(l, eps)| {
            let (n, m, sn) = &layers[l];
            let small = widim_upper(m, sn, eps, WidimVariant::Small, exhaustive_sets)?.value;
            let standard = widim_upper(m, sn, eps, WidimVariant::Standard, exhaustive_sets)?.value;
            Ok(MdimRow { n: *n, eps, small, standard, small_rate: small / *n as f64, standard_rate: standard / *n as f64 })
        })
        .collect()
}

/// Running infimum over `N` of the per-`N` rates at each scale, for both variants.
pub fn mdim_inf_rates(rows: &[MdimRow]) -> Vec<(f64, f64, f64)> {
    let mut eps: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    eps.into_iter()
        .map(|e| {
            let at = rows.iter().filter(|r| r.eps == e);
            let small = at.clone().map(|r| r.small_rate).fold(f64::INFINITY, f64::min);
            let standard = at.map(|r| r.standard_rate).fold(f64::INFINITY, f64::min);
            (e, small, standard)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn collinear(pos: &[f64]) -> DistMatrix {
        DistMatrix::from_fn(pos.len(), |i, j| (pos[i] - pos[j]).abs())
    }

    #[test]
    fn clique_cover_of_collinear_points() {
        let m = collinear(&[0.0, 0.6, 1.2]);
        let c = build_cover_for_scale(&m, 0.7, CoverStrategy::Cliques).unwrap();
        assert_eq!(c, vec![vec![0, 1], vec![1, 2]]);
        let nerve = NerveComplex::new(&c, 3).unwrap();
        assert_eq!(nerve.edge_count(), 1);
        assert_eq!(nerve.witness(&[0, 1]), Some(1));
        assert_eq!(nerve.carrier(0), &[0]);
        assert_eq!(nerve.local_dim(0), 1);
        assert_eq!(nerve.small_local_dim(0), 0);
    }

    #[test]
    fn large_scale_gives_single_vertex() {
        let m = collinear(&[0.0, 0.6, 1.2]);
        for s in [CoverStrategy::Cliques, CoverStrategy::Balls] {
            assert_eq!(build_cover_for_scale(&m, 5.0, s).unwrap()[0], vec![0, 1, 2]);
        }
        let phi = Potential::new(vec![0.2, 0.9, 0.1], "p").unwrap();
        let r = widim_upper(&m, &phi, 5.0, WidimVariant::Standard, 12).unwrap();
        assert_eq!(r.value, 0.9);
    }

    #[test]
    fn disjoint_cover_has_no_edges() {
        let nerve = NerveComplex::new(&[vec![0], vec![1, 2]], 3).unwrap();
        assert_eq!(nerve.edge_count(), 0);
        assert_eq!(nerve.simplexes(100).unwrap().len(), 2);
    }

    #[test]
    fn singleton_cover_is_optimal() {
        let m = collinear(&[0.0, 0.6, 1.2]);
        let r = widim_upper(&m, &Potential::zero(3), 0.7, WidimVariant::Small, 12).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn variation_examples() {
        let m = collinear(&[0.0, 0.5, 1.0]);
        let phi = Potential::new(vec![0.0, 1.0, 0.0], "bump").unwrap();
        assert_eq!(variation(&phi, &m, 0.6), 1.0);
        assert_eq!(variation(&phi, &m, 0.5), 0.0);
        assert_eq!(variation(&Potential::constant(3, 2.0).unwrap(), &m, 10.0), 0.0);
    }

    #[test]
    fn chain_on_overlapping_cover() {
        let m = collinear(&[0.0, 0.3, 0.6, 0.9]);
        let phi = Potential::new(vec![0.0, 0.5, 0.1, 0.7], "p").unwrap();
        let c = widim_chain(&m, &phi, 0.65, 12).unwrap();
        assert!(c.holds && c.holds_per_cover);
    }
}
