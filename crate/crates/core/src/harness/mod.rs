//! Inequality-chain verification, the quantized Hilbert-cube example, a
//! corpus of small test spaces and a quick self-test.
//!
//! Each check compares an estimator that may only err upwards against one
//! that may only err downwards, or two exact values. A negative defect on a
//! pair whose estimators are all exact is a failure; otherwise it is slack.

mod corpus;
mod hilbert;
mod selftest;

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use corpus::{corpus, random_system, CorpusEntry};
pub use hilbert::{example_hilbert, hilbert_eps_grid, HilbertPressure, HilbertReport, HilbertRow};
pub use selftest::{selftest, SelftestItem};

use crate::config::{Module, ResolvedScenario};
use crate::covering::{covering_number, CoverOptions, CoveringResult, SearchMode, SlopeEstimate};
use crate::error::{invalid, Error, Result};
use crate::hausdorff::{dim_at_scale, ContentOptions, DimResult, GrainRule};
use crate::info::{rate_distortion, rdim_estimate, BaOptions, Codebook, ProbMeasure, RDCurve};
use crate::measures::{empirical_average, integrate, is_invariant};
use crate::nerve::{widim_chain, DEFAULT_EXHAUSTIVE_SETS};
use crate::spaces::{birkhoff_sum, bowen_metric, DistMatrix, FiniteSystem, Potential, DEFAULT_POINT_BUDGET};
use crate::log_inv;

/// Allowed shortfall of the rate-distortion side, in bits per step.
pub const RATE_BOUND_TOLERANCE: f64 = 1e-2;
/// Allowed shortfall between exact quantities (floating-point sums).
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct HarnessOptions {
    pub cover: CoverOptions,
    pub content: ContentOptions,
    pub ba: BaOptions,
    pub exhaustive_sets: usize,
    pub point_budget: usize,
    /// Hausdorff grain; 0 gives the plain content.
    pub grain: f64,
}

impl Default for HarnessOptions {
    fn default() -> Self {
        Self {
            cover: CoverOptions::default(),
            content: ContentOptions::default(),
            ba: BaOptions::default(),
            exhaustive_sets: DEFAULT_EXHAUSTIVE_SETS,
            point_budget: DEFAULT_POINT_BUDGET,
            grain: 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Slack,
    Failure,
}

/// `lhs <= rhs` with `defect = rhs - lhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub defect: f64,
    pub tolerance: f64,
    /// Whether the inequality holds for the computed values, not only in the limit.
    pub guaranteed: bool,
    pub status: CheckStatus,
    pub repro: String,
}

impl InequalityCheck {
    pub fn new(name: &str, lhs: f64, rhs: f64, tolerance: f64, guaranteed: bool, repro: String) -> Self {
        let defect = rhs - lhs;
        let status = if defect >= 0.0 {
            CheckStatus::Pass
        } else if defect >= -tolerance || !guaranteed {
            CheckStatus::Slack
        } else {
            CheckStatus::Failure
        };
        Self { name: name.into(), lhs, rhs, defect, tolerance, guaranteed, status, repro }
    }

    /// A check decided in exact arithmetic; `lhs` and `rhs` are for display.
    pub fn decided(name: &str, lhs: f64, rhs: f64, holds: bool, repro: String) -> Self {
        let status = if holds { CheckStatus::Pass } else { CheckStatus::Failure };
        Self { name: name.into(), lhs, rhs, defect: rhs - lhs, tolerance: 0.0, guaranteed: true, status, repro }
    }
}

/// Exact covering number, or the greedy one when a component exceeds the exact budget.
pub fn covering_with_fallback(metric: &DistMatrix, phi: &Potential, eps: f64, opts: &CoverOptions) -> Result<CoveringResult> {
    match covering_number(metric, phi, eps, opts) {
        Err(Error::BudgetExceeded { .. }) if opts.mode == SearchMode::Exact => {
            covering_number(metric, phi, eps, &CoverOptions { mode: SearchMode::Greedy, ..opts.clone() })
        }
        r => r,
    }
}

/// Exact dimension at scale, or the greedy one (an upper bound) when the exact search exceeds its budget.
pub fn dim_with_fallback(metric: &DistMatrix, phi: &Potential, eps: f64, grain: f64, opts: &ContentOptions) -> Result<DimResult> {
    match dim_at_scale(metric, phi, eps, grain, GrainRule::Max, opts) {
        Err(Error::BudgetExceeded { .. }) if opts.mode == SearchMode::Exact => {
            dim_at_scale(metric, phi, eps, grain, GrainRule::Max, &ContentOptions { mode: SearchMode::Greedy, ..opts.clone() })
        }
        r => r,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateBoundCell {
    pub eps: f64,
    pub n: usize,
    /// `R_N(eps)/N` from the orbit codebook, bits.
    pub rate: f64,
    pub integral: f64,
    pub lhs: f64,
    /// `log2 #(X, d_N, S_N phi, eps) / N`.
    pub rhs: f64,
    pub covering_exact: bool,
    pub iterations: usize,
    pub check: InequalityCheck,
}

impl RateBoundCell {
    pub fn defect(&self) -> f64 {
        self.check.defect
    }
}

/// The invariant measure used for `mu`: itself, or its average along one period.
pub fn invariant_version(sys: &FiniteSystem, mu: &ProbMeasure) -> Result<ProbMeasure> {
    if is_invariant(sys, mu, 1e-12)? {
        Ok(mu.clone())
    } else {
        empirical_average(sys, mu, sys.period())
    }
}

/// `R_N(eps)/N + log2(1/eps) ∫phi dmu <= log2 #(X, d_N, S_N phi, eps)/N` for each `eps <= 1`.
pub fn verify_rate_bound_cells(
    sys: &FiniteSystem,
    mu: &ProbMeasure,
    phi: &Potential,
    eps_list: &[f64],
    n: usize,
    opts: &HarnessOptions,
    repro: &(dyn Fn(f64) -> String + Sync),
) -> Result<Vec<RateBoundCell>> {
    if let Some(e) = eps_list.iter().find(|e| !(**e > 0.0 && **e <= 1.0)) {
        return invalid(format!("scale {e} outside (0, 1]"));
    }
    phi.check_len(sys.len())?;
    let mu = invariant_version(sys, mu)?;
    let integral = integrate(phi, &mu)?;
    let curve = rate_distortion(sys, &mu, n, eps_list, &Codebook::Orbit, &opts.ba)?;
    if let Some(r) = curve.rows.iter().find(|r| !r.converged) {
        return Err(Error::Nonconvergence(format!("rate-distortion at eps {} did not converge", r.eps)));
    }
    let metric = bowen_metric(sys, n)?;
    let sums = birkhoff_sum(sys, phi, n)?;
    curve
        .rows
        .par_iter()
        .map(|row| {
            let cov = covering_with_fallback(&metric, &sums, row.eps, &opts.cover)?;
            let lhs = row.rate + log_inv(row.eps) * integral;
            let rhs = cov.log2_value / n as f64;
            let check = InequalityCheck::new("rate_bound", lhs, rhs, RATE_BOUND_TOLERANCE, cov.exact, repro(row.eps));
            Ok(RateBoundCell {
                eps: row.eps,
                n,
                rate: row.rate,
                integral,
                lhs,
                rhs,
                covering_exact: cov.exact,
                iterations: row.iterations,
                check,
            })
        })
        .collect()
}

/// Single-cell form of [`verify_rate_bound_cells`].
pub fn verify_rate_bound(
    sys: &FiniteSystem,
    mu: &ProbMeasure,
    phi: &Potential,
    eps: f64,
    n: usize,
    opts: &HarnessOptions,
) -> Result<RateBoundCell> {
    let repro = |e: f64| format!("meandim rd --N {n} --eps {e} --codebook orbit");
    Ok(verify_rate_bound_cells(sys, mu, phi, &[eps], n, opts, &repro)?.remove(0))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureCell {
    pub name: String,
    pub integral: f64,
    pub rate: f64,
    /// `rate / log2(1/eps) + integral`.
    pub rdim_plus_integral: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainCell {
    pub n: usize,
    pub eps: f64,
    /// `log2 # / (N log2(1/eps))`.
    pub pressure_ratio: Option<f64>,
    pub pressure_exact: bool,
    /// Hausdorff dimension at scale of `(d_N, S_N phi)`, divided by `N`.
    pub hausdorff: Option<f64>,
    pub hausdorff_exact: bool,
    /// Nerve-based width dimension bounds, divided by `N`.
    pub widim_small: Option<f64>,
    pub widim_standard: Option<f64>,
    pub variation: Option<f64>,
    pub measures: Vec<MeasureCell>,
    pub checks: Vec<InequalityCheck>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RdimSummary {
    pub measure: String,
    pub n: usize,
    pub integral: f64,
    pub estimate: Option<SlopeEstimate>,
    pub curve: RDCurve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub scenario: String,
    pub seed: u64,
    pub system: String,
    pub points: usize,
    pub cells: Vec<ChainCell>,
    /// `(eps, inf_N log2 #/N / log2(1/eps))`.
    pub pressure_inf: Vec<(f64, f64)>,
    pub rdim: Vec<RdimSummary>,
}

impl ChainReport {
    pub fn checks(&self) -> impl Iterator<Item = &InequalityCheck> {
        self.cells.iter().flat_map(|c| &c.checks)
    }

    pub fn failures(&self) -> usize {
        self.checks().filter(|c| c.status == CheckStatus::Failure).count()
    }

    pub fn slack(&self) -> usize {
        self.checks().filter(|c| c.status == CheckStatus::Slack).count()
    }

    pub fn all_pass(&self) -> bool {
        self.failures() == 0
    }
}

/// Runs the selected modules on every `(N, eps)` cell and checks the
/// inequalities that hold cell by cell.
pub fn verify_chain(sc: &ResolvedScenario, opts: &HarnessOptions) -> Result<ChainReport> {
    let sys = &sc.loaded.system;
    let phi = &sc.potential;
    let src = sc.source.as_deref().map_or_else(|| "<scenario.json>".to_string(), |p: &Path| p.display().to_string());
    let repro = |n: usize, eps: f64| format!("meandim verify-chain --scenario {src} --N {n} --eps {eps}");
    let want = |m: Module| sc.modules.contains(&m);
    let ns: Vec<usize> = (1..=sc.n_max).collect();

    let per_n: Vec<BlockView> = ns
        .iter()
        .map(|&n| Ok(BlockView { metric: bowen_metric(sys, n)?, sums: birkhoff_sum(sys, phi, n)? }))
        .collect::<Result<_>>()?;

    let measures: Vec<(String, ProbMeasure, f64)> = sc
        .measures
        .iter()
        .map(|(name, mu)| {
            let mu = invariant_version(sys, mu)?;
            let integral = integrate(phi, &mu)?;
            Ok((name.clone(), mu, integral))
        })
        .collect::<Result<_>>()?;

    let rd_eps: Vec<f64> = sc.eps.iter().copied().filter(|e| *e <= 1.0).collect();
    let mut rdim = Vec::new();
    if want(Module::Rd) && !rd_eps.is_empty() {
        for (name, mu, integral) in &measures {
            for &n in &ns {
                let curve = rate_distortion(sys, mu, n, &rd_eps, &Codebook::Orbit, &opts.ba)?;
                if let Some(r) = curve.rows.iter().find(|r| !r.converged) {
                    return Err(Error::Nonconvergence(format!("{name}: N={n}, eps={}", r.eps)));
                }
                let estimate = rdim_estimate(&curve).ok();
                rdim.push(RdimSummary { measure: name.clone(), n, integral: *integral, estimate, curve });
            }
        }
    }

    let keys: Vec<(usize, f64)> = ns.iter().flat_map(|&n| sc.eps.iter().map(move |&e| (n, e))).collect();
    let cells = keys
        .par_iter()
        .map(|&(n, eps)| {
            let view = &per_n[n - 1];
            let nf = n as f64;
            let below_one = eps < 1.0;
            let l = log_inv(eps);
            let mut cell = ChainCell {
                n,
                eps,
                pressure_ratio: None,
                pressure_exact: false,
                hausdorff: None,
                hausdorff_exact: false,
                widim_small: None,
                widim_standard: None,
                variation: None,
                measures: Vec::new(),
                checks: Vec::new(),
            };
            let mut log_cov = None;
            if want(Module::Cover) {
                let cov = covering_with_fallback(&view.metric, &view.sums, eps, &opts.cover)?;
                log_cov = Some((cov.log2_value, cov.exact));
                cell.pressure_exact = cov.exact;
                if below_one {
                    cell.pressure_ratio = Some(cov.log2_value / (nf * l));
                }
            }
            if want(Module::Widim) {
                let chain = widim_chain(&view.metric, &view.sums, eps, opts.exhaustive_sets)?;
                cell.widim_small = Some(chain.small / nf);
                cell.widim_standard = Some(chain.standard / nf);
                cell.variation = Some(chain.variation);
                let (sq, tq) = (chain.small_term.to_rational(), chain.standard_term.to_rational());
                let r = repro(n, eps);
                cell.checks.push(InequalityCheck::decided("widim_small_le_standard", chain.small, chain.standard, sq <= tq, r.clone()));
                cell.checks.push(InequalityCheck::decided(
                    "widim_standard_le_small_plus_var",
                    chain.standard,
                    chain.small + chain.variation,
                    tq <= sq + chain.variation_exact(),
                    r,
                ));
            }
            if want(Module::Hausdorff) && below_one {
                let dim = dim_with_fallback(&view.metric, &view.sums, eps, opts.grain, &opts.content)?;
                cell.hausdorff = Some(dim.dim / nf);
                cell.hausdorff_exact = dim.exact;
                if let Some(w) = cell.widim_standard {
                    cell.checks.push(InequalityCheck::new("widim_le_hausdorff", w, dim.dim / nf, EXACT_TOLERANCE, true, repro(n, eps)));
                }
                if let Some(p) = cell.pressure_ratio {
                    let guaranteed = dim.exact && cell.pressure_exact && opts.grain == 0.0;
                    cell.checks.push(InequalityCheck::new(
                        "hausdorff_le_pressure",
                        dim.dim / nf,
                        p,
                        crate::hausdorff::BISECTION_TOL,
                        guaranteed,
                        repro(n, eps),
                    ));
                }
            }
            if let Some((lc, exact)) = log_cov {
                for s in rdim.iter().filter(|s| s.n == n) {
                    let Some(rate) = s.curve.rate_at(eps) else { continue };
                    let lhs = rate + l * s.integral;
                    let rhs = lc / nf;
                    cell.checks.push(InequalityCheck::new(&format!("rate_bound[{}]", s.measure), lhs, rhs, RATE_BOUND_TOLERANCE, exact, repro(n, eps)));
                    if below_one {
                        cell.measures.push(MeasureCell {
                            name: s.measure.clone(),
                            integral: s.integral,
                            rate,
                            rdim_plus_integral: rate / l + s.integral,
                        });
                    }
                }
            }
            Ok(cell)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut pressure_inf = Vec::new();
    for &eps in sc.eps.iter().filter(|e| **e < 1.0) {
        let best = cells.iter().filter(|c| c.eps == eps).filter_map(|c| c.pressure_ratio).fold(f64::INFINITY, f64::min);
        if best.is_finite() {
            pressure_inf.push((eps, best));
        }
    }
    Ok(ChainReport {
        scenario: sc.name.clone(),
        seed: sc.seed,
        system: sys.label().to_string(),
        points: sys.len(),
        cells,
        pressure_inf,
        rdim,
    })
}

/// `(d_N, S_N phi)` for one block length.
struct BlockView {
    metric: DistMatrix,
    sums: Potential,
}
