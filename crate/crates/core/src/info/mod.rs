//! Discrete information measures in bits.

mod rd;

pub use rd::{
    blahut_arimoto, product_source_rate_distortion, rate_distortion, rate_distortion_matrix, rdim_estimate, BaOptions,
    BaPoint, Codebook, RDCurve, RDRow,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Compensated summation.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Probability vector over a finite index set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbMeasure {
    weights: Vec<f64>,
}

impl ProbMeasure {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return invalid("probability vector is empty");
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w >= 0.0)) {
            return invalid(format!("weight {i} is {} (must be finite and nonnegative)", weights[i]));
        }
        let total = neumaier_sum(weights.iter().copied());
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return invalid(format!("weights sum to {total}, not 1"));
        }
        Ok(Self { weights })
    }

    /// Rescales nonnegative weights with positive total.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return invalid("weights must be finite and nonnegative");
        }
        let total = neumaier_sum(weights.iter().copied());
        if !(total > 0.0) {
            return invalid("weights must have positive total");
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("uniform measure needs at least one point");
        }
        Ok(Self { weights: vec![1.0 / n as f64; n] })
    }

    pub fn point_mass(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return invalid(format!("point {i} outside 0..{n}"));
        }
        let mut weights = vec![0.0; n];
        weights[i] = 1.0;
        Ok(Self { weights })
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.weights.len()).filter(|&i| self.weights[i] > 0.0).collect()
    }

    /// `(1-t) self + t other`
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.len() != other.len() {
            return invalid("mixing measures of different lengths");
        }
        Ok(Self { weights: self.weights.iter().zip(&other.weights).map(|(a, b)| (1.0 - t) * a + t * b).collect() })
    }

    pub(crate) fn from_raw(weights: Vec<f64>) -> Self {
        Self { weights }
    }
}

/// Row-stochastic conditional distribution `nu(y|x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channel {
    rows: Vec<Vec<f64>>,
}

impl Channel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return invalid(format!("channel row {x} has length {}, expected {width}", row.len()));
            }
            ProbMeasure::new(row.clone()).map_err(|e| Error::InvalidInput(format!("channel row {x}: {e}")))?;
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// `(1-t) self + t other`
    pub fn mix(&self, other: &Self, t: f64) -> Result<Self> {
        if self.inputs() != other.inputs() || self.outputs() != other.outputs() {
            return invalid("mixing channels of different shapes");
        }
        Ok(Self {
            rows: self
                .rows
                .iter()
                .zip(&other.rows)
                .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (1.0 - t) * u + t * v).collect())
                .collect(),
        })
    }

    /// Joint matrix `mu(x) nu(y|x)`.
    pub fn joint(&self, mu: &ProbMeasure) -> Result<Vec<Vec<f64>>> {
        if mu.len() != self.inputs() {
            return invalid("measure and channel disagree on the input alphabet");
        }
        Ok(self.rows.iter().enumerate().map(|(x, row)| row.iter().map(|v| mu.get(x) * v).collect()).collect())
    }

    pub(crate) fn from_raw(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }
}

/// `-sum p log2 p` with `0 log 0 = 0`.
pub fn entropy(p: &[f64]) -> f64 {
    -neumaier_sum(p.iter().filter(|&&v| v > 0.0).map(|&v| v * v.log2()))
}

pub fn binary_entropy(p: f64) -> f64 {
    entropy(&[p, 1.0 - p])
}

fn check_joint(joint: &[Vec<f64>]) -> Result<()> {
    let width = joint.first().map_or(0, Vec::len);
    if width == 0 || joint.iter().any(|r| r.len() != width) {
        return invalid("joint distribution must be a nonempty rectangular matrix");
    }
    ProbMeasure::new(joint.iter().flatten().copied().collect()).map(|_| ())
}

pub fn marginals(joint: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let px = joint.iter().map(|r| neumaier_sum(r.iter().copied())).collect();
    let width = joint.first().map_or(0, Vec::len);
    let py = (0..width).map(|j| neumaier_sum(joint.iter().map(|r| r[j]))).collect();
    (px, py)
}

/// `I(X;Y)` in bits for a normalized joint matrix.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<f64> {
    check_joint(joint)?;
    Ok(mutual_information_unchecked(joint))
}

pub(crate) fn mutual_information_unchecked(joint: &[Vec<f64>]) -> f64 {
    let (px, py) = marginals(joint);
    let terms = joint.iter().enumerate().flat_map(|(i, row)| {
        let px = &px;
        let py = &py;
        row.iter().enumerate().filter(|(_, &v)| v > 0.0).map(move |(j, &v)| v * (v / (px[i] * py[j])).log2())
    });
    neumaier_sum(terms).max(0.0)
}

/// `H(X) + H(Y) - H(X,Y)`, the defining form.
pub fn mutual_information_by_entropies(joint: &[Vec<f64>]) -> Result<f64> {
    check_joint(joint)?;
    let (px, py) = marginals(joint);
    let flat: Vec<f64> = joint.iter().flatten().copied().collect();
    Ok(entropy(&px) + entropy(&py) - entropy(&flat))
}

/// `I(mu, nu)` for a source measure and a channel.
pub fn channel_information(mu: &ProbMeasure, nu: &Channel) -> Result<f64> {
    Ok(mutual_information_unchecked(&nu.joint(mu)?))
}

/// `D(p||q) = sum p log2(p/q)`.
pub fn kl_divergence(p: &ProbMeasure, q: &ProbMeasure) -> Result<f64> {
    if p.len() != q.len() {
        return invalid("measures have different lengths");
    }
    for i in 0..p.len() {
        if p.get(i) > 0.0 && q.get(i) == 0.0 {
            return Err(Error::SupportViolation(i));
        }
    }
    let d = neumaier_sum((0..p.len()).filter(|&i| p.get(i) > 0.0).map(|i| p.get(i) * (p.get(i) / q.get(i)).log2()));
    Ok(d.max(0.0))
}

/// `log2 sum 2^{x_i}`
pub fn log2_sum_exp2(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + neumaier_sum(xs.iter().map(|x| (x - m).exp2())).log2()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KlBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `sum(-p_i log p_i + p_i a_i log(1/eps)) <= log sum (1/eps)^{a_i}`.
pub fn lemma_kl_bound_check(p: &[f64], a: &[f64], eps: f64) -> Result<KlBound> {
    if p.len() != a.len() {
        return invalid("p and a have different lengths");
    }
    if !(eps > 0.0 && eps < 1.0) {
        return invalid(format!("eps must lie in (0,1), got {eps}"));
    }
    ProbMeasure::new(p.to_vec())?;
    let l = crate::log_inv(eps);
    let lhs = entropy(p) + l * neumaier_sum(p.iter().zip(a).map(|(pi, ai)| pi * ai));
    let rhs = log2_sum_exp2(&a.iter().map(|ai| ai * l).collect::<Vec<_>>());
    Ok(KlBound { lhs, rhs, ok: lhs <= rhs + 1e-9 })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckTally {
    pub instances: usize,
    pub violations: usize,
    /// Largest amount by which an inequality was exceeded (0 when none).
    pub worst_excess: f64,
}

impl CheckTally {
    fn record(&mut self, excess: f64) {
        self.instances += 1;
        if excess > 1e-9 {
            self.violations += 1;
        }
        self.worst_excess = self.worst_excess.max(excess);
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub data_processing: CheckTally,
    pub subadditivity: CheckTally,
    pub concavity_in_source: CheckTally,
    pub convexity_in_channel: CheckTally,
    pub convergence: CheckTally,
}

impl PropertyReport {
    pub fn all_pass(&self) -> bool {
        [&self.data_processing, &self.subadditivity, &self.concavity_in_source, &self.convexity_in_channel, &self.convergence]
            .iter()
            .all(|t| t.violations == 0)
    }
}

fn random_simplex(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    // Sparse entries exercise the 0 log 0 convention.
    let raw: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.15) { 0.0 } else { -rng.gen::<f64>().max(1e-300).ln() }).collect();
    let total: f64 = raw.iter().sum();
    if total == 0.0 {
        let mut v = vec![0.0; n];
        v[rng.gen_range(0..n)] = 1.0;
        return v;
    }
    raw.into_iter().map(|v| v / total).collect()
}

fn random_channel(rng: &mut ChaCha8Rng, inputs: usize, outputs: usize) -> Channel {
    Channel::from_raw((0..inputs).map(|_| random_simplex(rng, outputs)).collect())
}

/// Randomized checks of data processing, conditional subadditivity,
/// concavity/convexity of mutual information and its continuity in law.
pub fn property_checks(seed: u64, instances: usize) -> PropertyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = PropertyReport { seed, ..Default::default() };
    for _ in 0..instances {
        let nx = rng.gen_range(1..=5);
        let ny = rng.gen_range(1..=5);

        // I(X; f(Y)) <= I(X; Y)
        let joint: Vec<Vec<f64>> = {
            let flat = random_simplex(&mut rng, nx * ny);
            flat.chunks(ny).map(<[f64]>::to_vec).collect()
        };
        let nz = rng.gen_range(1..=ny);
        let f: Vec<usize> = (0..ny).map(|_| rng.gen_range(0..nz)).collect();
        let mut pushed = vec![vec![0.0; nz]; nx];
        for (i, row) in joint.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                pushed[i][f[j]] += v;
            }
        }
        report.data_processing.record(mutual_information_unchecked(&pushed) - mutual_information_unchecked(&joint));

        // X, Y independent given Z: I(X,Y; Z) <= I(X;Z) + I(Y;Z)
        let nzz = rng.gen_range(1..=4);
        let pz = random_simplex(&mut rng, nzz);
        let px_z = random_channel(&mut rng, nzz, nx);
        let py_z = random_channel(&mut rng, nzz, ny);
        let mut xy_z = vec![vec![0.0; nzz]; nx * ny];
        let mut x_z = vec![vec![0.0; nzz]; nx];
        let mut y_z = vec![vec![0.0; nzz]; ny];
        for z in 0..nzz {
            for x in 0..nx {
                for y in 0..ny {
                    let v = pz[z] * px_z.rows()[z][x] * py_z.rows()[z][y];
                    xy_z[x * ny + y][z] += v;
                    x_z[x][z] += v;
                    y_z[y][z] += v;
                }
            }
        }
        report.subadditivity.record(
            mutual_information_unchecked(&xy_z) - mutual_information_unchecked(&x_z) - mutual_information_unchecked(&y_z),
        );

        // concave in the source, convex in the channel
        let mu0 = ProbMeasure::from_raw(random_simplex(&mut rng, nx));
        let mu1 = ProbMeasure::from_raw(random_simplex(&mut rng, nx));
        let nu0 = random_channel(&mut rng, nx, ny);
        let nu1 = random_channel(&mut rng, nx, ny);
        let info = |mu: &ProbMeasure, nu: &Channel| channel_information(mu, nu).expect("shapes agree");
        let mut concave_excess = f64::NEG_INFINITY;
        let mut convex_excess = f64::NEG_INFINITY;
        for t in [0.25, 0.5, 0.75] {
            let mt = mu0.mix(&mu1, t).expect("same length");
            let chord = (1.0 - t) * info(&mu0, &nu0) + t * info(&mu1, &nu0);
            concave_excess = concave_excess.max(chord - info(&mt, &nu0));
            let nt = nu0.mix(&nu1, t).expect("same shape");
            let chord = (1.0 - t) * info(&mu0, &nu0) + t * info(&mu0, &nu1);
            convex_excess = convex_excess.max(info(&mu0, &nt) - chord);
        }
        report.concavity_in_source.record(concave_excess);
        report.convexity_in_channel.record(convex_excess);

        // (X_k, Y_k) -> (X, Y) in law implies I(X_k; Y_k) -> I(X; Y)
        let target = mutual_information_unchecked(&joint);
        let noise: Vec<Vec<f64>> = {
            let flat = random_simplex(&mut rng, nx * ny);
            flat.chunks(ny).map(<[f64]>::to_vec).collect()
        };
        let k_max = 48;
        let mut last = f64::INFINITY;
        for k in 1..=k_max {
            let t = 0.5f64.powi(k);
            let mixed: Vec<Vec<f64>> = joint
                .iter()
                .zip(&noise)
                .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (1.0 - t) * u + t * v).collect())
                .collect();
            last = (mutual_information_unchecked(&mixed) - target).abs();
        }
        report.convergence.record(last);
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_joint_has_zero_information() {
        let p = [0.3, 0.7];
        let q = [0.2, 0.5, 0.3];
        let joint: Vec<Vec<f64>> = p.iter().map(|a| q.iter().map(|b| a * b).collect()).collect();
        assert!(mutual_information(&joint).unwrap().abs() < 1e-12);
    }

    #[test]
    fn uniform_diagonal_has_two_bits() {
        let joint: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 0.25 } else { 0.0 }).collect()).collect();
        assert!((mutual_information(&joint).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn three_cell_joint_matches_term_sum() {
        let t: f64 = 1.0 / 3.0;
        let joint = vec![vec![t, t], vec![0.0, t]];
        // p(x) = (2/3, 1/3), p(y) = (1/3, 2/3)
        let oracle = t * (t / (2.0 / 3.0 * t)).log2() + t * (t / (2.0 / 3.0 * 2.0 / 3.0)).log2()
            + t * (t / (t * 2.0 / 3.0)).log2();
        assert!((mutual_information(&joint).unwrap() - oracle).abs() < 1e-12);
        assert!((mutual_information_by_entropies(&joint).unwrap() - oracle).abs() < 1e-12);
    }

    #[test]
    fn rejects_unnormalized_joint() {
        assert!(mutual_information(&[vec![0.5, 0.4]]).is_err());
    }

    #[test]
    fn kl_examples() {
        let p = ProbMeasure::new(vec![1.0, 0.0]).unwrap();
        let q = ProbMeasure::uniform(2).unwrap();
        assert!((kl_divergence(&p, &q).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(kl_divergence(&q, &q).unwrap(), 0.0);
        assert!(matches!(kl_divergence(&q, &p), Err(Error::SupportViolation(1))));
    }

    #[test]
    fn kl_bound_examples() {
        let r = lemma_kl_bound_check(&[0.5, 0.5], &[1.0, 1.0], 0.5).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-12 && (r.rhs - 2.0).abs() < 1e-12 && r.ok);
        let r = lemma_kl_bound_check(&[1.0, 0.0], &[0.0, 0.0], 0.5).unwrap();
        assert!(r.lhs.abs() < 1e-12 && (r.rhs - 1.0).abs() < 1e-12 && r.ok);
    }

    #[test]
    fn property_suite_passes() {
        let r = property_checks(7, 200);
        assert!(r.all_pass(), "{r:?}");
        assert_eq!(r.convergence.instances, 200);
    }

    #[test]
    fn identity_map_gives_dpi_equality() {
        let joint = vec![vec![0.1, 0.2], vec![0.4, 0.3]];
        let i = mutual_information(&joint).unwrap();
        let same = joint.clone();
        assert_eq!(mutual_information(&same).unwrap(), i);
    }
}
