//! Rate-distortion curves by Blahut-Arimoto alternating minimization.
//!
//! For a slope `beta >= 0` the iteration minimizes `I(X;Y) + beta E[D]` (nats)
//! over channels into a finite codebook. Each target distortion is reached by
//! bisection on `beta` followed by time sharing between the two bracketing
//! channels, so every reported rate is the information of an explicit channel
//! whose expected distortion does not exceed the target.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{mutual_information_unchecked, neumaier_sum, ProbMeasure};
use crate::covering::{slope_statistics, SlopeEstimate};
use crate::error::{invalid, Error, Result};
use crate::spaces::{average_metric, FiniteSystem};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaOptions {
    pub max_iter: usize,
    /// Stopping tolerance (bits) on the gap between the objective and its dual bound.
    pub tol: f64,
    /// Targets are `eps (1 - strict_margin)` to honour the strict distortion constraint.
    pub strict_margin: f64,
    pub codebook_budget: usize,
}

impl Default for BaOptions {
    fn default() -> Self {
        Self { max_iter: 5000, tol: 1e-6, strict_margin: 1e-6, codebook_budget: 4096 }
    }
}

/// One converged (or capped) Blahut-Arimoto run at a fixed slope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaPoint {
    pub beta: f64,
    /// `I(X;Y)` in bits.
    pub information: f64,
    pub distortion: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The Lagrangian never increased between iterations.
    pub monotone: bool,
    pub channel: Vec<Vec<f64>>,
    pub output: Vec<f64>,
}

fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

fn information_and_distortion(source: &[f64], dist: &[Vec<f64>], channel: &[Vec<f64>]) -> (f64, f64) {
    let joint: Vec<Vec<f64>> = channel.iter().zip(source).map(|(row, p)| row.iter().map(|w| p * w).collect()).collect();
    let d = neumaier_sum(joint.iter().zip(dist).flat_map(|(j, d)| j.iter().zip(d).map(|(a, b)| a * b)));
    (mutual_information_unchecked(&joint), d)
}

/// Alternating minimization at slope `beta` from the output law `init` (uniform if `None`).
pub fn blahut_arimoto(source: &[f64], dist: &[Vec<f64>], beta: f64, init: Option<&[f64]>, opts: &BaOptions) -> BaPoint {
    let k = dist.first().map_or(0, Vec::len);
    let mut q: Vec<f64> = init.map_or_else(|| vec![1.0 / k as f64; k], <[f64]>::to_vec);
    let mut channel = vec![vec![0.0; k]; source.len()];
    let mut prev_objective = f64::INFINITY;
    let mut monotone = true;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let log_q: Vec<f64> = q.iter().map(|v| if *v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
        let mut objective = 0.0;
        let mut next = vec![0.0; k];
        for (x, &p) in source.iter().enumerate() {
            let terms = (0..k).map(|y| log_q[y] - beta * dist[x][y]);
            let z = log_sum_exp(terms.clone());
            objective -= p * z;
            for (y, a) in terms.enumerate() {
                let w = (a - z).exp();
                channel[x][y] = w;
                next[y] += p * w;
            }
        }
        if objective > prev_objective + 1e-12 * (1.0 + prev_objective.abs()) {
            monotone = false;
        }
        prev_objective = objective;
        // Dual gap: log max_y q_next(y)/q(y) bounds the excess of the objective.
        let gap = (0..k)
            .filter(|&y| q[y] > 0.0)
            .map(|y| (next[y] / q[y]).ln())
            .fold(f64::NEG_INFINITY, f64::max)
            .max(0.0)
            / std::f64::consts::LN_2;
        let total: f64 = next.iter().sum();
        q = next.into_iter().map(|v| v / total).collect();
        if gap <= opts.tol {
            converged = true;
            break;
        }
    }
    let (information, distortion) = information_and_distortion(source, dist, &channel);
    BaPoint { beta, information, distortion, iterations, converged, monotone, channel, output: q }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RDRow {
    pub eps: f64,
    /// `I(X;Y)/N` in bits (`inf` when the target is below the least achievable distortion).
    pub rate: f64,
    pub distortion: f64,
    pub slope_param: f64,
    pub iterations: usize,
    pub converged: bool,
    pub monotone: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RDCurve {
    pub block: usize,
    /// Sorted by increasing `eps`.
    pub rows: Vec<RDRow>,
}

impl RDCurve {
    pub fn rate_at(&self, eps: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.eps == eps).map(|r| r.rate)
    }

    /// Rows with `lo < eps < hi`.
    pub fn restrict(&self, lo: f64, hi: f64) -> RDCurve {
        RDCurve { block: self.block, rows: self.rows.iter().filter(|r| r.eps > lo && r.eps < hi).cloned().collect() }
    }

    pub fn all_converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

/// Rate-distortion curve of a finite source under an explicit distortion
/// matrix `dist[x][y]`; rates are divided by `block`.
pub fn rate_distortion_matrix(
    source: &ProbMeasure,
    dist: &[Vec<f64>],
    eps_list: &[f64],
    block: usize,
    opts: &BaOptions,
) -> Result<RDCurve> {
    if block == 0 {
        return invalid("block length must be positive");
    }
    if dist.len() != source.len() || dist.is_empty() {
        return invalid("distortion matrix must have one row per source symbol");
    }
    let k = dist[0].len();
    if k == 0 || dist.iter().any(|r| r.len() != k || r.iter().any(|v| !(v.is_finite() && *v >= 0.0))) {
        return invalid("distortion matrix must be rectangular, finite and nonnegative");
    }
    if eps_list.iter().any(|e| !(*e > 0.0)) {
        return invalid("distortion levels must be positive");
    }
    let support = source.support();
    let p: Vec<f64> = support.iter().map(|&x| source.get(x)).collect();
    let d: Vec<Vec<f64>> = support.iter().map(|&x| dist[x].clone()).collect();

    let mut eps: Vec<f64> = eps_list.to_vec();
    eps.sort_by(f64::total_cmp);
    eps.dedup();
    let mut rows: Vec<RDRow> =
        eps.par_iter().map(|&e| solve_target(&p, &d, e, e * (1.0 - opts.strict_margin), block, opts)).collect();
    // A channel meeting a smaller target also meets every larger one.
    for i in 1..rows.len() {
        if rows[i].rate > rows[i - 1].rate {
            let (rate, distortion) = (rows[i - 1].rate, rows[i - 1].distortion);
            rows[i].rate = rate;
            rows[i].distortion = distortion;
        }
    }
    Ok(RDCurve { block, rows })
}

fn solve_target(p: &[f64], d: &[Vec<f64>], eps: f64, target: f64, block: usize, opts: &BaOptions) -> RDRow {
    let k = d[0].len();
    let d_max = (0..k).map(|y| neumaier_sum(p.iter().zip(d).map(|(px, row)| px * row[y]))).fold(f64::INFINITY, f64::min);
    let d_min = neumaier_sum(p.iter().zip(d).map(|(px, row)| px * row.iter().copied().fold(f64::INFINITY, f64::min)));
    let row = |rate: f64, distortion: f64, beta: f64, iterations: usize, converged: bool, monotone: bool| RDRow {
        eps,
        rate,
        distortion,
        slope_param: beta,
        iterations,
        converged,
        monotone,
    };
    if target >= d_max {
        return row(0.0, d_max, 0.0, 0, true, true);
    }
    if target < d_min {
        return row(f64::INFINITY, d_min, f64::INFINITY, 0, false, true);
    }

    let mut iterations = 0;
    let mut monotone = true;
    let mut converged = true;
    let mut run = |beta: f64, init: Option<&[f64]>| {
        let pt = blahut_arimoto(p, d, beta, init, opts);
        iterations += pt.iterations;
        monotone &= pt.monotone;
        converged &= pt.converged;
        pt
    };

    // Nearest-codeword channel: distortion d_min <= target.
    let nearest: Vec<Vec<f64>> = d
        .iter()
        .map(|r| {
            let best = (0..k).min_by(|&a, &b| r[a].total_cmp(&r[b])).expect("nonempty codebook");
            (0..k).map(|y| if y == best { 1.0 } else { 0.0 }).collect()
        })
        .collect();
    let (i_near, d_near) = information_and_distortion(p, d, &nearest);
    let near = BaPoint {
        beta: f64::INFINITY,
        information: i_near,
        distortion: d_near,
        iterations: 0,
        converged: true,
        monotone: true,
        channel: nearest,
        output: Vec::new(),
    };

    let mut lo = run(0.0, None);
    let mut hi: Option<BaPoint> = None;
    let mut beta = 1.0 / target.max(1e-12);
    for _ in 0..60 {
        let pt = run(beta, Some(&lo.output));
        if pt.distortion <= target {
            hi = Some(pt);
            break;
        }
        lo = pt;
        beta *= 2.0;
    }
    let mut hi = hi.unwrap_or(near);
    if hi.beta.is_finite() {
        for _ in 0..60 {
            if lo.distortion - hi.distortion <= 1e-10 * (1.0 + target) {
                break;
            }
            let mid = if lo.beta > 0.0 { (lo.beta * hi.beta).sqrt() } else { 0.5 * hi.beta };
            if mid <= lo.beta || mid >= hi.beta {
                break;
            }
            let pt = run(mid, Some(&hi.output));
            if pt.distortion <= target {
                hi = pt;
            } else {
                lo = pt;
            }
        }
    }
    // Time sharing: mixed channel has distortion exactly the target.
    let (channel, beta) = if lo.distortion > hi.distortion {
        let lambda = ((lo.distortion - target) / (lo.distortion - hi.distortion)).clamp(0.0, 1.0);
        let mixed: Vec<Vec<f64>> = lo
            .channel
            .iter()
            .zip(&hi.channel)
            .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (1.0 - lambda) * u + lambda * v).collect())
            .collect();
        (mixed, hi.beta)
    } else {
        (hi.channel.clone(), hi.beta)
    };
    let (mut info, mut distortion) = information_and_distortion(p, d, &channel);
    if distortion > target {
        info = hi.information;
        distortion = hi.distortion;
    }
    row(info / block as f64, distortion, beta, iterations, converged, monotone)
}

/// Reproduction family for block codes of length `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Codebook {
    /// Orbit blocks `(z, Tz, ..., T^{N-1} z)` for every point `z`.
    Orbit,
    /// Every `N`-tuple of points.
    Full,
    /// Explicit `N`-tuples of point indices.
    Explicit(Vec<Vec<usize>>),
}

/// `min I(X;Y)/N` subject to `E (1/N) sum_n d(T^n X, Y_n) < eps`, over the codebook.
pub fn rate_distortion(
    sys: &FiniteSystem,
    mu: &ProbMeasure,
    n: usize,
    eps_list: &[f64],
    codebook: &Codebook,
    opts: &BaOptions,
) -> Result<RDCurve> {
    if n == 0 {
        return invalid("block length must be positive");
    }
    if mu.len() != sys.len() {
        return invalid("measure length differs from the number of points");
    }
    let dist = match codebook {
        Codebook::Orbit => average_metric(sys, n)?.to_rows(),
        Codebook::Full => {
            let size = sys.len().checked_pow(n as u32).filter(|&s| s <= opts.codebook_budget).ok_or(
                Error::BudgetExceeded { what: "full codebook", needed: usize::MAX, budget: opts.codebook_budget },
            )?;
            let tuples: Vec<Vec<usize>> = (0..size)
                .map(|mut c| {
                    (0..n)
                        .map(|_| {
                            let v = c % sys.len();
                            c /= sys.len();
                            v
                        })
                        .collect()
                })
                .collect();
            block_distortion(sys, n, &tuples)
        }
        Codebook::Explicit(tuples) => {
            if tuples.is_empty() {
                return invalid("codebook is empty");
            }
            if tuples.iter().any(|t| t.len() != n || t.iter().any(|&i| i >= sys.len())) {
                return invalid(format!("codebook entries must be {n}-tuples of point indices"));
            }
            block_distortion(sys, n, tuples)
        }
    };
    rate_distortion_matrix(mu, &dist, eps_list, n, opts)
}

fn block_distortion(sys: &FiniteSystem, n: usize, tuples: &[Vec<usize>]) -> Vec<Vec<f64>> {
    let orbit = sys.orbit_table(n);
    (0..sys.len())
        .map(|x| {
            tuples
                .iter()
                .map(|t| (0..n).map(|k| sys.dist().get(orbit[k][x], t[k])).sum::<f64>() / n as f64)
                .collect()
        })
        .collect()
}

/// Single-letter curve of a source on `alphabet` with distortion `scale |a - b|`.
pub fn product_source_rate_distortion(
    alphabet: &[f64],
    weights: &ProbMeasure,
    scale: f64,
    eps_list: &[f64],
    opts: &BaOptions,
) -> Result<RDCurve> {
    if alphabet.len() != weights.len() {
        return invalid("alphabet and weights differ in length");
    }
    let dist: Vec<Vec<f64>> = alphabet.iter().map(|a| alphabet.iter().map(|b| scale * (a - b).abs()).collect()).collect();
    rate_distortion_matrix(weights, &dist, eps_list, 1, opts)
}

/// Ratio and least-squares statistics of `R(eps)` against `log2(1/eps)`.
///
/// Rows with infinite rate are skipped; the saturation scale is the largest
/// `eps` at which the rate already equals its maximum over the curve.
pub fn rdim_estimate(curve: &RDCurve) -> Result<SlopeEstimate> {
    let pairs: Vec<(f64, f64)> = curve.rows.iter().filter(|r| r.rate.is_finite()).map(|r| (r.eps, r.rate)).collect();
    let top = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let saturation = pairs.iter().filter(|p| p.1 >= top - 1e-9 && top > 0.0).map(|p| p.0).fold(None, |m: Option<f64>, e| {
        Some(m.map_or(e, |m| m.max(e)))
    });
    slope_statistics(&pairs, saturation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::info::{binary_entropy, entropy};

    #[test]
    fn binary_source_matches_closed_form() {
        let mu = ProbMeasure::uniform(2).unwrap();
        let dist = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        let levels = [0.05, 0.11, 0.25, 0.45];
        let curve = rate_distortion_matrix(&mu, &dist, &levels, 1, &BaOptions::default()).unwrap();
        for r in &curve.rows {
            let oracle = 1.0 - binary_entropy(r.eps);
            assert!((r.rate - oracle).abs() <= 1e-3, "D={} rate={} oracle={oracle}", r.eps, r.rate);
            assert!(r.distortion < r.eps);
        }
    }

    #[test]
    fn large_distortion_gives_zero_rate() {
        let mu = ProbMeasure::new(vec![0.2, 0.3, 0.5]).unwrap();
        let dist = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let curve = rate_distortion_matrix(&mu, &dist, &[10.0], 1, &BaOptions::default()).unwrap();
        assert_eq!(curve.rows[0].rate, 0.0);
    }

    #[test]
    fn zero_distortion_limit_is_entropy() {
        let w = vec![0.1, 0.2, 0.3, 0.4];
        let mu = ProbMeasure::new(w.clone()).unwrap();
        let dist: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 0.0 } else { 1.0 }).collect()).collect();
        let curve = rate_distortion_matrix(&mu, &dist, &[1e-7], 1, &BaOptions::default()).unwrap();
        assert!((curve.rows[0].rate - entropy(&w)).abs() < 1e-4);
    }

    #[test]
    fn ba_objective_is_monotone() {
        let mu = [0.1, 0.2, 0.3, 0.4];
        let dist: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| (i as f64 - j as f64).abs() / 3.0).collect()).collect();
        for beta in [0.5, 2.0, 8.0, 40.0] {
            let pt = blahut_arimoto(&mu, &dist, beta, None, &BaOptions::default());
            assert!(pt.monotone && pt.converged);
        }
    }

    #[test]
    fn rates_are_nonincreasing() {
        let mu = ProbMeasure::uniform(5).unwrap();
        let dist: Vec<Vec<f64>> = (0..5).map(|i| (0..5).map(|j| (i as f64 - j as f64).abs() / 4.0).collect()).collect();
        let eps: Vec<f64> = (1..20).map(|k| k as f64 * 0.02).collect();
        let curve = rate_distortion_matrix(&mu, &dist, &eps, 1, &BaOptions::default()).unwrap();
        for w in curve.rows.windows(2) {
            assert!(w[1].rate <= w[0].rate);
        }
    }

    #[test]
    fn zero_curve_has_zero_slope() {
        let mu = ProbMeasure::uniform(2).unwrap();
        let dist = vec![vec![0.0, 0.1], vec![0.1, 0.0]];
        let curve = rate_distortion_matrix(&mu, &dist, &[0.5, 0.3, 0.2], 1, &BaOptions::default()).unwrap();
        let est = rdim_estimate(&curve).unwrap();
        assert_eq!((est.upper, est.lower, est.fit_slope), (0.0, 0.0, 0.0));
    }
}
