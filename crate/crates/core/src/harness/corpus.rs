//! Small spaces with potentials for exhaustive checks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::spaces::{build_symbolic, DistMatrix, FiniteSystem, Potential, SymbolicModel};

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: String,
    pub system: FiniteSystem,
    pub potential: Potential,
}

/// `n` uniform points in the unit square, Euclidean metric, random permutation as time map.
pub fn random_system(n: usize, seed: u64) -> Result<FiniteSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let dist = DistMatrix::from_fn(n, |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1));
    let mut time_map: Vec<usize> = (0..n).collect();
    time_map.shuffle(&mut rng);
    FiniteSystem::new((0..n).map(|i| format!("r{i}")).collect(), dist, time_map, format!("random{n}s{seed}"))
}

fn random_potential(n: usize, seed: u64) -> Result<Potential> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    Potential::new((0..n).map(|_| rng.gen::<f64>()).collect(), format!("rand{seed}"))
}

/// Every entry has at most `max_n` points; each space appears with the zero
/// potential and with a nonconstant one.
pub fn corpus(max_n: usize, seed: u64) -> Result<Vec<CorpusEntry>> {
    let mut spaces: Vec<(FiniteSystem, Option<SymbolicModel>)> = Vec::new();
    for n in 1..=max_n.min(12) {
        spaces.push((FiniteSystem::cycle(n)?, None));
        if n >= 2 {
            spaces.push((FiniteSystem::grid(n)?, None));
        }
    }
    let lines: [&[f64]; 3] = [&[0.0, 0.01, 0.02, 0.45, 0.85], &[0.0, 0.6, 1.2], &[0.0, 0.1, 0.3, 0.35, 0.7, 0.71, 1.0]];
    for pos in lines {
        spaces.push((FiniteSystem::line(pos, format!("line{}", pos.len()))?, None));
    }
    for n in 3..=max_n.min(12) {
        spaces.push((random_system(n, seed.wrapping_add(n as u64))?, None));
    }
    let models = [
        SymbolicModel::new(vec![0.0, 1.0], 1, 8)?,
        SymbolicModel::new(vec![0.0, 1.0], 2, 8)?,
        SymbolicModel::new(vec![0.0, 1.0], 3, 8)?,
        SymbolicModel::new(vec![0.0, 0.5, 1.0], 2, 8)?,
        SymbolicModel::midpoint_grid(2, 3, 6)?,
    ];
    for model in models {
        spaces.push((build_symbolic(&model, 4096)?, Some(model)));
    }
    let mut out = Vec::new();
    for (k, (system, model)) in spaces.into_iter().enumerate() {
        let n = system.len();
        if n > max_n {
            continue;
        }
        let varied = match &model {
            Some(m) => Potential::new(m.coordinate_values(0)?, "x0")?,
            None => random_potential(n, seed.wrapping_add(k as u64))?,
        };
        let name = system.label().to_string();
        out.push(CorpusEntry { name: format!("{name}/zero"), system: system.clone(), potential: Potential::zero(n) });
        out.push(CorpusEntry { name: format!("{name}/{}", varied.label()), system, potential: varied });
    }
    Ok(out)
}
