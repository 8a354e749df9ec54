//! Finite models of dynamical systems.
//!
//! A [`FiniteSystem`] is a finite point set with a base metric and a bijective
//! time map. Compact systems are approximated by closed, shift-invariant finite
//! subsets; for the bi-infinite shift on `[0,1]^Z` the [`SymbolicModel`] uses
//! the set of all period-`p` sequences over a finite quantization grid, with
//! the weighted metric `sum_{|n| <= W} 2^{-|n|} |x_n - y_n|`. Dropping the
//! terms with `|n| > W` changes any distance by at most `2^{-W+1}` times the
//! largest coordinate gap.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const DEFAULT_WINDOW: usize = 16;
pub const DEFAULT_POINT_BUDGET: usize = 4096;

/// Relative slack allowed when validating user supplied metrics.
const METRIC_TOL: f64 = 1e-9;

/// Dense symmetric distance matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DistMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistMatrix {
    /// Builds a matrix from a function evaluated on `i < j`; the diagonal is zero.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return invalid(format!("distance row {i} has length {}, expected {n}", row.len()));
            }
            data.extend(row);
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Largest pairwise distance inside `set` (0 for sets of size <= 1).
    pub fn diameter(&self, set: &[usize]) -> f64 {
        let mut d: f64 = 0.0;
        for (k, &i) in set.iter().enumerate() {
            for &j in &set[k + 1..] {
                d = d.max(self.get(i, j));
            }
        }
        d
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_positive(&self) -> Option<f64> {
        self.data
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Checks zero diagonal, symmetry, nonnegativity and the triangle inequality.
    pub fn check_metric(&self, tol: f64) -> Result<()> {
        let n = self.n;
        let scale = self.max().max(1.0) * tol;
        for i in 0..n {
            if self.get(i, i) != 0.0 {
                return invalid(format!("nonzero diagonal at {i}"));
            }
            for j in 0..n {
                let v = self.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return invalid(format!("distance ({i},{j}) = {v} is not a nonnegative real"));
                }
                if (v - self.get(j, i)).abs() > scale {
                    return invalid(format!("distance is not symmetric at ({i},{j})"));
                }
                if i != j && v == 0.0 {
                    return invalid(format!("distinct points {i} and {j} at distance 0"));
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                let dij = self.get(i, j);
                for k in 0..n {
                    if dij > self.get(i, k) + self.get(k, j) + scale {
                        return invalid(format!("triangle inequality fails for ({i},{k},{j})"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// A finite metric space with a bijective time map.
#[derive(Clone, Debug)]
pub struct FiniteSystem {
    ids: Vec<String>,
    dist: DistMatrix,
    time_map: Vec<usize>,
    inverse: Vec<usize>,
    label: String,
}

impl FiniteSystem {
    /// Builds a system from user data, validating every metric axiom.
    pub fn new(
        ids: Vec<String>,
        dist: DistMatrix,
        time_map: Vec<usize>,
        label: impl Into<String>,
    ) -> Result<Self> {
        dist.check_metric(METRIC_TOL)?;
        Self::assemble(ids, dist, time_map, label.into())
    }

    /// Skips the cubic triangle-inequality scan; for metrics that hold by construction.
    pub(crate) fn trusted(
        ids: Vec<String>,
        dist: DistMatrix,
        time_map: Vec<usize>,
        label: String,
    ) -> Result<Self> {
        Self::assemble(ids, dist, time_map, label)
    }

    fn assemble(ids: Vec<String>, dist: DistMatrix, time_map: Vec<usize>, label: String) -> Result<Self> {
        let n = ids.len();
        if n == 0 {
            return invalid("a system needs at least one point");
        }
        if dist.len() != n || time_map.len() != n {
            return invalid(format!(
                "size mismatch: {n} ids, {} distance rows, {} time-map entries",
                dist.len(),
                time_map.len()
            ));
        }
        let mut inverse = vec![usize::MAX; n];
        for (i, &t) in time_map.iter().enumerate() {
            if t >= n {
                return invalid(format!("time map sends {i} outside the point set"));
            }
            if inverse[t] != usize::MAX {
                return invalid(format!("time map is not injective: {} and {i} both map to {t}", inverse[t]));
            }
            inverse[t] = i;
        }
        let mut sorted = ids.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("point ids must be unique");
        }
        Ok(Self { ids, dist, time_map, inverse, label })
    }

    /// Points `positions` on the real line with the identity time map.
    pub fn line(positions: &[f64], label: impl Into<String>) -> Result<Self> {
        if positions.iter().any(|p| !p.is_finite()) {
            return invalid("positions must be finite");
        }
        let n = positions.len();
        let dist = DistMatrix::from_fn(n, |i, j| (positions[i] - positions[j]).abs());
        let ids = (0..n).map(|i| format!("p{i}")).collect();
        if (0..n).any(|i| (0..i).any(|j| dist.get(i, j) == 0.0)) {
            return invalid("positions must be distinct");
        }
        Self::trusted(ids, dist, (0..n).collect(), label.into())
    }

    /// `levels` equally spaced points `i/(levels-1)` in `[0,1]` with the identity map.
    pub fn grid(levels: usize) -> Result<Self> {
        if levels == 0 {
            return invalid("grid needs at least one level");
        }
        let pos: Vec<f64> = if levels == 1 {
            vec![0.0]
        } else {
            (0..levels).map(|i| i as f64 / (levels - 1) as f64).collect()
        };
        Self::line(&pos, format!("grid{levels}"))
    }

    /// A single periodic orbit of the given length with normalized circular distance.
    pub fn cycle(length: usize) -> Result<Self> {
        if length == 0 {
            return invalid("cycle length must be positive");
        }
        let dist = DistMatrix::from_fn(length, |i, j| {
            let k = i.abs_diff(j);
            k.min(length - k) as f64 / length as f64
        });
        let ids = (0..length).map(|i| format!("c{i}")).collect();
        let time_map = (0..length).map(|i| (i + 1) % length).collect();
        Self::trusted(ids, dist, time_map, format!("cycle{length}"))
    }

    /// Same points and time map, different metric.
    pub fn with_metric(&self, dist: DistMatrix, label: impl Into<String>) -> Result<Self> {
        dist.check_metric(METRIC_TOL)?;
        Self::assemble(self.ids.clone(), dist, self.time_map.clone(), label.into())
    }

    pub(crate) fn with_metric_trusted(&self, dist: DistMatrix, label: String) -> Result<Self> {
        Self::assemble(self.ids.clone(), dist, self.time_map.clone(), label)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|s| s == id)
    }

    pub fn dist(&self) -> &DistMatrix {
        &self.dist
    }

    pub fn time_map(&self) -> &[usize] {
        &self.time_map
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    #[inline]
    pub fn step(&self, i: usize) -> usize {
        self.time_map[i]
    }

    /// `T^k(i)`; negative `k` walks backwards.
    pub fn iterate(&self, mut i: usize, k: i64) -> usize {
        if k >= 0 {
            for _ in 0..k {
                i = self.time_map[i];
            }
        } else {
            for _ in 0..(-k) {
                i = self.inverse[i];
            }
        }
        i
    }

    /// `table[k][i] = T^k(i)` for `0 <= k < n`.
    pub fn orbit_table(&self, n: usize) -> Vec<Vec<usize>> {
        let mut table = Vec::with_capacity(n);
        let mut cur: Vec<usize> = (0..self.len()).collect();
        for _ in 0..n {
            let next = cur.iter().map(|&i| self.time_map[i]).collect();
            table.push(std::mem::replace(&mut cur, next));
        }
        table
    }

    /// The cycles of the time map, each starting at its smallest index.
    pub fn orbits(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            let mut orbit = vec![start];
            seen[start] = true;
            let mut cur = self.time_map[start];
            while cur != start {
                seen[cur] = true;
                orbit.push(cur);
                cur = self.time_map[cur];
            }
            out.push(orbit);
        }
        out
    }

    /// Least common multiple of all orbit lengths (the period of `T`).
    pub fn period(&self) -> usize {
        self.orbits().iter().map(Vec::len).fold(1, lcm)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub(crate) fn lcm(a: usize, b: usize) -> usize {
    a / gcd(a, b) * b
}

/// Real-valued function on the points of a system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    values: Vec<f64>,
    label: String,
}

impl Potential {
    pub fn new(values: Vec<f64>, label: impl Into<String>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return invalid(format!("potential value at {i} is not finite"));
        }
        if values.is_empty() {
            return invalid("potential needs at least one value");
        }
        Ok(Self { values, label: label.into() })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n], format!("const({c})"))
    }

    pub fn zero(n: usize) -> Self {
        Self { values: vec![0.0; n], label: "zero".into() }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `||phi||_inf`
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum over a nonempty index set.
    pub fn sup_over(&self, set: &[usize]) -> f64 {
        set.iter().map(|&i| self.values[i]).fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.values.len() != n {
            return invalid(format!("potential has {} values for {n} points", self.values.len()));
        }
        Ok(())
    }
}

/// `d_N(x,y) = max_{0<=k<N} d(T^k x, T^k y)`.
pub fn bowen_metric(sys: &FiniteSystem, n: usize) -> Result<DistMatrix> {
    dynamical_metric(sys, n, |acc, d| acc.max(d), |acc, _| acc)
}

/// `dbar_N(x,y) = (1/N) sum_{0<=k<N} d(T^k x, T^k y)`.
pub fn average_metric(sys: &FiniteSystem, n: usize) -> Result<DistMatrix> {
    dynamical_metric(sys, n, |acc, d| acc + d, |acc, n| acc / n as f64)
}

fn dynamical_metric(
    sys: &FiniteSystem,
    n: usize,
    fold: impl Fn(f64, f64) -> f64,
    finish: impl Fn(f64, usize) -> f64,
) -> Result<DistMatrix> {
    if n == 0 {
        return invalid("window N must be at least 1");
    }
    let orbit = sys.orbit_table(n);
    let d = sys.dist();
    Ok(DistMatrix::from_fn(sys.len(), |i, j| {
        let acc = orbit.iter().fold(0.0, |acc, t| fold(acc, d.get(t[i], t[j])));
        finish(acc, n)
    }))
}

/// `S_N phi(x) = sum_{0<=k<N} phi(T^k x)`.
pub fn birkhoff_sum(sys: &FiniteSystem, phi: &Potential, n: usize) -> Result<Potential> {
    if n == 0 {
        return invalid("window N must be at least 1");
    }
    phi.check_len(sys.len())?;
    let orbit = sys.orbit_table(n);
    let values = (0..sys.len())
        .map(|i| orbit.iter().map(|t| phi.get(t[i])).sum())
        .collect();
    Ok(Potential { values, label: format!("S_{n}({})", phi.label) })
}

/// Period-`p` sequences over a quantization grid, with the left shift.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolicModel {
    pub alphabet: Vec<f64>,
    pub period: usize,
    #[serde(default = "default_window")]
    pub window: usize,
}

fn default_window() -> usize {
    DEFAULT_WINDOW
}

impl SymbolicModel {
    pub fn new(alphabet: Vec<f64>, period: usize, window: usize) -> Result<Self> {
        let model = Self { alphabet, period, window };
        model.validate()?;
        Ok(model)
    }

    /// `levels` cell midpoints `(i + 1/2)/levels` of the uniform partition of `[0,1]`.
    pub fn midpoint_grid(levels: usize, period: usize, window: usize) -> Result<Self> {
        let alphabet = (0..levels).map(|i| (i as f64 + 0.5) / levels as f64).collect();
        Self::new(alphabet, period, window)
    }

    pub fn validate(&self) -> Result<()> {
        if self.alphabet.is_empty() {
            return invalid("alphabet must be nonempty");
        }
        if self.period == 0 || self.window == 0 {
            return invalid("period and window must be positive");
        }
        if let Some(v) = self.alphabet.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return invalid(format!("alphabet value {v} outside [0,1]"));
        }
        let mut sorted = self.alphabet.clone();
        sorted.sort_by(f64::total_cmp);
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return invalid("alphabet values must be distinct");
        }
        Ok(())
    }

    pub fn num_symbols(&self) -> usize {
        self.alphabet.len()
    }

    /// `|alphabet|^period`, or `None` on overflow.
    pub fn num_points(&self) -> Option<usize> {
        self.alphabet.len().checked_pow(self.period.try_into().ok()?)
    }

    /// Symbol indices `(x_0, ..., x_{p-1})` of point `index` (x_0 least significant).
    pub fn word(&self, mut index: usize) -> Vec<usize> {
        let m = self.alphabet.len();
        (0..self.period)
            .map(|_| {
                let s = index % m;
                index /= m;
                s
            })
            .collect()
    }

    pub fn index_of(&self, word: &[usize]) -> usize {
        let m = self.alphabet.len();
        word.iter().rev().fold(0, |acc, &s| acc * m + s)
    }

    /// Index of the shifted sequence `(x_{n+1})_n`.
    pub fn shift(&self, index: usize) -> usize {
        let mut w = self.word(index);
        w.rotate_left(1);
        self.index_of(&w)
    }

    pub fn point_id(&self, index: usize) -> String {
        let w = self.word(index);
        if self.alphabet.len() <= 10 {
            w.iter().map(|s| char::from(b'0' + *s as u8)).collect()
        } else {
            w.iter().map(usize::to_string).collect::<Vec<_>>().join(".")
        }
    }

    /// Weight of coordinate class `c`: `sum of 2^{-|n|}` over `|n| <= W`, `n = c (mod p)`.
    pub fn class_weights(&self) -> Vec<f64> {
        let p = self.period as i64;
        let w = self.window as i64;
        let mut weights = vec![0.0; self.period];
        for n in -w..=w {
            weights[n.rem_euclid(p) as usize] += 0.5f64.powi(n.unsigned_abs() as i32);
        }
        weights
    }

    /// `sum_{|n|<=W} 2^{-|n|} = 3 - 2^{1-W}`.
    pub fn total_weight(&self) -> f64 {
        3.0 - 2f64.powi(1 - self.window as i32)
    }

    /// Truncated weighted distance between two points.
    pub fn distance(&self, x: usize, y: usize) -> f64 {
        self.distance_with(&self.class_weights(), &self.word(x), &self.word(y))
    }

    fn distance_with(&self, weights: &[f64], wx: &[usize], wy: &[usize]) -> f64 {
        weights
            .iter()
            .zip(wx.iter().zip(wy))
            .map(|(w, (&a, &b))| w * (self.alphabet[a] - self.alphabet[b]).abs())
            .sum()
    }

    /// Smallest positive `d_N` distance between two points of the model.
    ///
    /// A pair differing only in one coordinate by the smallest symbol gap is
    /// extremal, since every distance is a nonnegative combination of
    /// per-coordinate gaps.
    pub fn min_separation(&self, n: usize) -> Option<f64> {
        let mut sorted = self.alphabet.clone();
        sorted.sort_by(f64::total_cmp);
        let gap = sorted.windows(2).map(|w| w[1] - w[0]).min_by(f64::total_cmp)?;
        let w = self.class_weights();
        let p = self.period;
        (0..p)
            .map(|j| (0..n.max(1)).map(|k| w[(j + p - k % p) % p]).fold(0.0, f64::max))
            .min_by(f64::total_cmp)
            .map(|m| m * gap)
    }

    /// Values of the coordinate potential `x -> x_j` at every point.
    pub fn coordinate_values(&self, j: usize) -> Result<Vec<f64>> {
        let n = self.num_points().ok_or_else(|| Error::InvalidInput("model too large".into()))?;
        Ok((0..n).map(|i| self.alphabet[self.word(i)[j % self.period]]).collect())
    }
}

/// Enumerates every period-`p` word as a dense [`FiniteSystem`].
pub fn build_symbolic(model: &SymbolicModel, point_budget: usize) -> Result<FiniteSystem> {
    model.validate()?;
    let n = match model.num_points() {
        Some(n) if n <= point_budget => n,
        Some(n) => return Err(Error::BudgetExceeded { what: "symbolic model", needed: n, budget: point_budget }),
        None => {
            return Err(Error::BudgetExceeded { what: "symbolic model", needed: usize::MAX, budget: point_budget })
        }
    };
    let weights = model.class_weights();
    let words: Vec<Vec<usize>> = (0..n).map(|i| model.word(i)).collect();
    let dist = DistMatrix::from_fn(n, |i, j| model.distance_with(&weights, &words[i], &words[j]));
    let ids = (0..n).map(|i| model.point_id(i)).collect();
    let time_map = (0..n).map(|i| model.shift(i)).collect();
    let label = format!("shift(m={}, p={}, W={})", model.alphabet.len(), model.period, model.window);
    FiniteSystem::trusted(ids, dist, time_map, label)
}
