//! Fast end-to-end checks of every module against closed forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::corpus::corpus;
use crate::covering::{covering_number, covering_number_brute_force, CoverOptions};
use crate::error::Result;
use crate::info::{binary_entropy, lemma_kl_bound_check, property_checks, rate_distortion_matrix, BaOptions, ProbMeasure};
use crate::measures::{frostman_measure, optimal_coupling, FrostmanFamily};
use crate::nerve::widim_chain;
use crate::spaces::FiniteSystem;
use crate::tiling::{boundary_density, MarkerFunction};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelftestItem {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn item(name: &str, pass: bool, detail: String) -> SelftestItem {
    SelftestItem { name: name.into(), pass, detail }
}

pub fn selftest(seed: u64) -> Result<Vec<SelftestItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    let mut worst = f64::NEG_INFINITY;
    for _ in 0..200 {
        let n = rng.gen_range(1..8);
        let raw: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = raw.iter().sum();
        let p: Vec<f64> = raw.iter().map(|v| v / total).collect();
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let b = lemma_kl_bound_check(&p, &a, rng.gen_range(0.01..0.99))?;
        worst = worst.max(b.lhs - b.rhs);
    }
    out.push(item("kl_bound", worst <= 1e-9, format!("max lhs - rhs = {worst:.3e}")));

    let mu = ProbMeasure::uniform(2)?;
    let curve = rate_distortion_matrix(&mu, &[vec![0.0, 1.0], vec![1.0, 0.0]], &[0.05, 0.11, 0.25, 0.45], 1, &BaOptions::default())?;
    let err = curve.rows.iter().map(|r| (r.rate - (1.0 - binary_entropy(r.eps))).abs()).fold(0.0, f64::max);
    out.push(item("blahut_arimoto_binary", err <= 1e-3, format!("max error {err:.3e} bits")));

    let entries = corpus(8, seed)?;
    let mut mismatches = 0;
    let mut cells = 0;
    for e in &entries {
        for eps in [0.15, 0.4] {
            let exact = covering_number(e.system.dist(), &e.potential, eps, &CoverOptions::default())?.value;
            let brute = covering_number_brute_force(e.system.dist(), &e.potential, eps)?;
            cells += 1;
            if (exact - brute).abs() > 1e-9 * brute {
                mismatches += 1;
            }
        }
    }
    out.push(item("covering_exact", mismatches == 0, format!("{mismatches} mismatches in {cells} cells")));

    let mut lemma_bad = 0;
    for e in &entries {
        let c = widim_chain(e.system.dist(), &e.potential, 0.3, 12)?;
        lemma_bad += usize::from(!(c.holds && c.holds_per_cover));
    }
    out.push(item("widim_lemma", lemma_bad == 0, format!("{lemma_bad} violations in {} spaces", entries.len())));

    let mut gap: f64 = 0.0;
    for e in entries.iter().filter(|e| e.system.len() <= 6) {
        let r = frostman_measure(e.system.dist(), 1.0, 0.5, 0.0, FrostmanFamily::Subsets)?;
        gap = gap.max(r.duality_gap().abs());
    }
    out.push(item("frostman_duality", gap <= 1e-9, format!("max gap {gap:.3e}")));

    let p = ProbMeasure::new(vec![0.5, 0.3, 0.2])?;
    let q = ProbMeasure::new(vec![0.2, 0.2, 0.6])?;
    let cost = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
    let plan = optimal_coupling(&p, &q, &cost)?;
    let marg = plan.row_sums().iter().zip(p.weights()).chain(plan.col_sums().iter().zip(q.weights())).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    out.push(item("transport", marg <= 1e-10 && (plan.cost - 0.7).abs() < 1e-12, format!("cost {}, marginal error {marg:.1e}", plan.cost)));

    let sys = FiniteSystem::cycle(5)?;
    let psi = MarkerFunction::indicator(&sys, &[0])?;
    let d = boundary_density(&sys, &psi, &[100.0], 8)?[0].density;
    out.push(item("tiling_density", (d - 0.2).abs() <= 1e-12, format!("density {d}")));

    let props = property_checks(seed, 50);
    out.push(item("information_lemmas", props.all_pass(), format!("{} instances per property", props.data_processing.instances)));
    Ok(out)
}
