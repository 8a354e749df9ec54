//! Quantized Hilbert cube with the coordinate potential `phi(x) = x_0`.
//!
//! At block length `N = p` the averaged metric is `c_W` times the per-letter
//! mean of `|x_j - y_j|`, and every `mu_k` is an i.i.d. product, so the block
//! rate-distortion function equals the single-letter one under distortion
//! `c_W |a - b|`. The Birkhoff sum `S_p phi(x)` is the letter sum, so when
//! singletons are forced the covering number factors over letters.

use serde::{Deserialize, Serialize};

use crate::covering::SlopeEstimate;
use crate::error::{invalid, Result};
use crate::info::{log2_sum_exp2, product_source_rate_distortion, rdim_estimate, BaOptions, RDCurve};
use crate::log_inv;
use crate::measures::top_uniform_weights;
use crate::spaces::SymbolicModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertRow {
    pub k: usize,
    pub integral: f64,
    /// `1 - 1/(2k)`.
    pub expected_integral: f64,
    pub bias: f64,
    pub within_bias: bool,
    pub curve: RDCurve,
    pub rdim: SlopeEstimate,
    /// Fitted slope plus the integral.
    pub sum: f64,
    /// `2 - 1/(2k)`.
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertPressure {
    pub eps: f64,
    pub singletons_forced: bool,
    /// `log2 #(X, d_p, S_p phi, eps) / p`.
    pub log_cov_per_step: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HilbertReport {
    pub levels: usize,
    pub period: usize,
    pub window: usize,
    pub total_weight: f64,
    pub eps_grid: Vec<f64>,
    pub rows: Vec<HilbertRow>,
    pub pressure: HilbertPressure,
}

/// `count` geometric scales strictly inside `(1/levels, 0.2)`.
pub fn hilbert_eps_grid(levels: usize, count: usize) -> Vec<f64> {
    let (lo, hi) = (1.0 / levels as f64, 0.2f64);
    (1..=count).map(|i| lo * (hi / lo).powf(i as f64 / (count + 1) as f64)).collect()
}

/// Runs the example for each `k` in `ks` on the model with `levels` midpoints.
pub fn example_hilbert(
    levels: usize,
    period: usize,
    window: usize,
    ks: &[usize],
    eps_grid: &[f64],
    opts: &BaOptions,
) -> Result<HilbertReport> {
    if levels < 2 {
        return invalid("the example needs at least two levels");
    }
    let model = SymbolicModel::midpoint_grid(levels, period, window)?;
    let c = model.total_weight();
    let m = levels as f64;
    let rows = ks
        .iter()
        .map(|&k| {
            let w = top_uniform_weights(&model.alphabet, k)?;
            let integral: f64 = model.alphabet.iter().zip(w.weights()).map(|(a, p)| a * p).sum();
            let expected = 1.0 - 1.0 / (2.0 * k as f64);
            let curve = product_source_rate_distortion(&model.alphabet, &w, c, eps_grid, opts)?;
            let rdim = rdim_estimate(&curve)?;
            Ok(HilbertRow {
                k,
                integral,
                expected_integral: expected,
                bias: integral - expected,
                within_bias: (integral - expected).abs() <= 1.0 / m,
                sum: rdim.fit_slope + integral,
                target: 2.0 - 1.0 / (2.0 * k as f64),
                curve,
                rdim,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let eps = 1.0 / m;
    let separation = model.min_separation(period).unwrap_or(0.0);
    let singletons_forced = separation >= eps;
    if !singletons_forced {
        return invalid(format!("minimum separation {separation} is below the scale {eps}"));
    }
    let l = log_inv(eps);
    let per_letter: Vec<f64> = model.alphabet.iter().map(|a| a * l).collect();
    let log_cov_per_step = log2_sum_exp2(&per_letter);
    Ok(HilbertReport {
        levels,
        period,
        window,
        total_weight: c,
        eps_grid: eps_grid.to_vec(),
        rows,
        pressure: HilbertPressure { eps, singletons_forced, log_cov_per_step, ratio: log_cov_per_step / l },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrals_follow_the_quantized_law() {
        let r = example_hilbert(8, 2, 6, &[1, 2], &hilbert_eps_grid(8, 4), &BaOptions::default()).unwrap();
        assert!((r.rows[0].integral - 0.5).abs() < 1e-12);
        assert!(r.rows.iter().all(|row| row.within_bias));
    }

    #[test]
    fn grid_is_strictly_inside() {
        let g = hilbert_eps_grid(16, 6);
        assert!(g.iter().all(|&e| e > 1.0 / 16.0 && e < 0.2));
    }
}
