//! Dynamical Voronoi tilings of the real line.
//!
//! For a point `x` and a marker function `psi`, each `a` with
//! `psi(T^a x) > 0` becomes the plane point `(a, 1/psi(T^a x))`. The Voronoi
//! cell of that point meets the axis in a closed interval `I(x, a)`, which is
//! an intersection of half-lines cut by pairwise bisectors. Markers outside
//! the horizon `|a| <= A` have height at least 1, which bounds how far they can
//! reach; intervals that such markers could alter are flagged uncertified.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spaces::FiniteSystem;

/// Scalar field used for chart arithmetic.
pub trait Coord: Clone + PartialOrd + std::fmt::Debug + Send + Sync {
    fn from_i64(v: i64) -> Self;
    fn from_marker(psi: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn to_f64(&self) -> f64;
}

impl Coord for f64 {
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_marker(psi: f64) -> Self {
        psi
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coord for BigRational {
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    /// Exact value of the binary64 number.
    fn from_marker(psi: f64) -> Self {
        BigRational::from_f64(psi).expect("finite marker value")
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

/// `psi: X -> [0,1]` positive somewhere on every orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarkerFunction {
    values: Vec<f64>,
}

impl MarkerFunction {
    pub fn new(sys: &FiniteSystem, values: Vec<f64>) -> Result<Self> {
        if values.len() != sys.len() {
            return invalid(format!("{} marker values for {} points", values.len(), sys.len()));
        }
        if let Some(i) = values.iter().position(|v| !(0.0..=1.0).contains(v)) {
            return invalid(format!("marker value {} at point {i} outside [0,1]", values[i]));
        }
        for orbit in sys.orbits() {
            if orbit.iter().all(|&i| values[i] == 0.0) {
                return invalid(format!("orbit of point {} carries no marker", sys.ids()[orbit[0]]));
            }
        }
        Ok(Self { values })
    }

    /// `psi = 1` on `set`, 0 elsewhere.
    pub fn indicator(sys: &FiniteSystem, set: &[usize]) -> Result<Self> {
        let mut v = vec![0.0; sys.len()];
        for &i in set {
            if i >= sys.len() {
                return invalid(format!("point {i} outside the space"));
            }
            v[i] = 1.0;
        }
        Self::new(sys, v)
    }

    /// Indicator of the cylinder of words whose first symbols are `prefix`.
    pub fn cylinder(sys: &FiniteSystem, model: &crate::spaces::SymbolicModel, prefix: &[usize]) -> Result<Self> {
        let set: Vec<usize> = (0..sys.len()).filter(|&i| model.word(i).starts_with(prefix)).collect();
        Self::indicator(sys, &set)
    }

    pub fn constant(sys: &FiniteSystem, c: f64) -> Result<Self> {
        Self::new(sys, vec![c; sys.len()])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Axis point equidistant from `(a, h_a)` and `(b, h_b)`.
pub fn bisector_abscissa<T: Coord>(a: &T, h_a: &T, b: &T, h_b: &T) -> Result<T> {
    if a.partial_cmp(b) == Some(Ordering::Equal) {
        return Err(Error::DegenerateMarkers(format!("{a:?}")));
    }
    // Canonical order keeps the float result independent of argument order.
    let (a, h_a, b, h_b) = if a < b { (a, h_a, b, h_b) } else { (b, h_b, a, h_a) };
    let num = b.mul(b).sub(&a.mul(a)).add(&h_b.mul(h_b)).sub(&h_a.mul(h_a));
    let den = T::from_i64(2).mul(&b.sub(a));
    Ok(num.div(&den))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartInterval<T> {
    pub marker: i64,
    pub height: T,
    /// `None` is an unbounded end.
    pub lo: Option<T>,
    pub hi: Option<T>,
    pub certified: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TilingChart<T> {
    pub point: usize,
    pub horizon: i64,
    /// Nonempty intervals, in marker order.
    pub intervals: Vec<ChartInterval<T>>,
    /// Markers whose cell misses the axis.
    pub empty_markers: Vec<i64>,
    /// Shared endpoints of consecutive intervals.
    pub boundary: Vec<T>,
    /// Union of the run of certified intervals around the origin.
    pub certified_window: Option<(T, T)>,
}

impl<T: Coord> TilingChart<T> {
    /// Boundary points inside `[lo, hi]`.
    pub fn boundary_in(&self, lo: &T, hi: &T) -> Vec<T> {
        self.boundary.iter().filter(|t| *t >= lo && *t <= hi).cloned().collect()
    }

    pub fn covers_certified(&self, lo: &T, hi: &T) -> bool {
        matches!(&self.certified_window, Some((a, b)) if a <= lo && hi <= b)
    }
}

fn max_opt<T: Coord>(cur: Option<T>, v: T) -> Option<T> {
    match cur {
        Some(c) if c >= v => Some(c),
        _ => Some(v),
    }
}

fn min_opt<T: Coord>(cur: Option<T>, v: T) -> Option<T> {
    match cur {
        Some(c) if c <= v => Some(c),
        _ => Some(v),
    }
}

/// Chart of `x` from the markers at `|a| <= horizon`.
pub fn tiling_chart<T: Coord>(sys: &FiniteSystem, psi: &MarkerFunction, x: usize, horizon: i64) -> Result<TilingChart<T>> {
    if psi.values.len() != sys.len() {
        return invalid("marker function does not match the system");
    }
    if x >= sys.len() || horizon < 0 {
        return invalid("point out of range or negative horizon");
    }
    let start = sys.iterate(x, -horizon);
    let mut markers: Vec<(i64, T, T)> = Vec::new();
    let mut cur = start;
    for a in -horizon..=horizon {
        let v = psi.values[cur];
        if v > 0.0 {
            let h = T::from_i64(1).div(&T::from_marker(v));
            markers.push((a, T::from_i64(a), h));
        }
        cur = sys.step(cur);
    }
    if markers.is_empty() {
        return Err(Error::NoMarker { point: x, horizon });
    }
    let k = markers.len();
    let mut lows: Vec<Option<T>> = vec![None; k];
    let mut highs: Vec<Option<T>> = vec![None; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let t = bisector_abscissa(&markers[i].1, &markers[i].2, &markers[j].1, &markers[j].2)?;
            highs[i] = min_opt(highs[i].take(), t.clone());
            lows[j] = max_opt(lows[j].take(), t);
        }
    }
    let reach = T::from_i64(horizon + 1);
    let one = T::from_i64(1);
    let zero = T::from_i64(0);
    // Beats every marker beyond the horizon at axis point t.
    let safe = |t: &T, a: &T, h: &T| {
        let own = t.sub(a).mul(&t.sub(a)).add(&h.mul(h));
        let right = reach.sub(t);
        let right = if right > zero { right.mul(&right) } else { zero.clone() };
        let left = reach.add(t);
        let left = if left > zero { left.mul(&left) } else { zero.clone() };
        own < right.add(&one) && own < left.add(&one)
    };
    let mut intervals = Vec::new();
    let mut empty_markers = Vec::new();
    for (i, (a, at, h)) in markers.iter().enumerate() {
        let nonempty = match (&lows[i], &highs[i]) {
            (Some(l), Some(u)) => l <= u,
            _ => true,
        };
        if !nonempty {
            empty_markers.push(*a);
            continue;
        }
        let certified = match (&lows[i], &highs[i]) {
            (Some(l), Some(u)) => safe(l, at, h) && safe(u, at, h),
            _ => false,
        };
        intervals.push(ChartInterval { marker: *a, height: h.clone(), lo: lows[i].clone(), hi: highs[i].clone(), certified });
    }
    let mut boundary: Vec<T> = Vec::new();
    for w in intervals.windows(2) {
        if let Some(t) = &w[0].hi {
            boundary.push(t.clone());
        }
    }
    let home = intervals.iter().position(|iv| {
        iv.lo.as_ref().is_none_or(|l| *l <= zero) && iv.hi.as_ref().is_none_or(|u| zero <= *u)
    });
    let certified_window = home.filter(|&h| intervals[h].certified).map(|h| {
        let mut l = h;
        while l > 0 && intervals[l - 1].certified {
            l -= 1;
        }
        let mut r = h;
        while r + 1 < intervals.len() && intervals[r + 1].certified {
            r += 1;
        }
        (intervals[l].lo.clone().expect("certified"), intervals[r].hi.clone().expect("certified"))
    });
    Ok(TilingChart { point: x, horizon, intervals, empty_markers, boundary, certified_window })
}

/// Floating-point chart.
pub fn tiling_for(sys: &FiniteSystem, psi: &MarkerFunction, x: usize, horizon: i64) -> Result<TilingChart<f64>> {
    tiling_chart(sys, psi, x, horizon)
}

/// Exact rational chart.
pub fn tiling_for_exact(sys: &FiniteSystem, psi: &MarkerFunction, x: usize, horizon: i64) -> Result<TilingChart<BigRational>> {
    tiling_chart(sys, psi, x, horizon)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivarianceReport {
    pub point: usize,
    pub shift: i64,
    pub compared: usize,
    pub max_mismatch: f64,
    pub exact_match: bool,
}

fn compare_boundaries<T: Coord>(
    sys: &FiniteSystem,
    psi: &MarkerFunction,
    x: usize,
    n: i64,
    horizon: i64,
) -> Result<(usize, f64, bool)> {
    let base: TilingChart<T> = tiling_chart(sys, psi, x, horizon)?;
    let moved: TilingChart<T> = tiling_chart(sys, psi, sys.iterate(x, n), horizon)?;
    let (Some((bl, bh)), Some((ml, mh))) = (&base.certified_window, &moved.certified_window) else {
        return Err(Error::UncertifiedWindow(format!("point {x}, horizon {horizon}")));
    };
    let shift = T::from_i64(n);
    // Window in the moved frame covered by both charts.
    let lo = if *ml > bl.sub(&shift) { ml.clone() } else { bl.sub(&shift) };
    let hi = if *mh < bh.sub(&shift) { mh.clone() } else { bh.sub(&shift) };
    if lo > hi {
        return Err(Error::UncertifiedWindow(format!("no common certified window for shift {n}")));
    }
    let a: Vec<T> = base.boundary_in(&lo.add(&shift), &hi.add(&shift)).iter().map(|t| t.sub(&shift)).collect();
    let b = moved.boundary_in(&lo, &hi);
    if a.len() != b.len() {
        return Ok((a.len().max(b.len()), f64::INFINITY, false));
    }
    let mut worst: f64 = 0.0;
    let mut exact = true;
    for (u, v) in a.iter().zip(&b) {
        worst = worst.max(u.sub(v).to_f64().abs());
        exact &= u.partial_cmp(v) == Some(Ordering::Equal);
    }
    Ok((a.len(), worst, exact))
}

/// Compares `∂(T^n x)` with `∂(x) - n` on the common certified window.
pub fn equivariance_check(sys: &FiniteSystem, psi: &MarkerFunction, x: usize, n: i64, horizon: i64) -> Result<EquivarianceReport> {
    let (compared, max_mismatch, exact_match) = compare_boundaries::<f64>(sys, psi, x, n, horizon)?;
    Ok(EquivarianceReport { point: x, shift: n, compared, max_mismatch, exact_match })
}

/// As [`equivariance_check`] in exact rational arithmetic.
pub fn equivariance_check_exact(
    sys: &FiniteSystem,
    psi: &MarkerFunction,
    x: usize,
    n: i64,
    horizon: i64,
) -> Result<EquivarianceReport> {
    let (compared, max_mismatch, exact_match) = compare_boundaries::<BigRational>(sys, psi, x, n, horizon)?;
    Ok(EquivarianceReport { point: x, shift: n, compared, max_mismatch, exact_match })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityRow {
    pub r: f64,
    pub density: f64,
    pub argmax_point: usize,
}

/// `sup_x |∂(x) ∩ [0, R]| / R` for each `R`, from charts of horizon `R + margin`.
pub fn boundary_density(sys: &FiniteSystem, psi: &MarkerFunction, r_list: &[f64], margin: i64) -> Result<Vec<DensityRow>> {
    r_list
        .iter()
        .map(|&r| {
            if !(r > 0.0) {
                return invalid("window lengths must be positive");
            }
            let horizon = r.ceil() as i64 + margin.max(1);
            let counts = (0..sys.len())
                .into_par_iter()
                .map(|x| {
                    let chart = tiling_for(sys, psi, x, horizon)?;
                    if !chart.covers_certified(&0.0, &r) {
                        return Err(Error::UncertifiedWindow(format!("[0, {r}] for point {x} at horizon {horizon}")));
                    }
                    Ok(chart.boundary_in(&0.0, &r).len())
                })
                .collect::<Result<Vec<_>>>()?;
            let (argmax_point, best) =
                counts.iter().enumerate().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0))).expect("nonempty system");
            Ok(DensityRow { r, density: *best as f64 / r, argmax_point })
        })
        .collect()
}

/// True when the exact bisector is equidistant from both markers.
pub fn bisector_is_equidistant(a: i64, h_a: &BigRational, b: i64, h_b: &BigRational) -> Result<bool> {
    let (ar, br) = (<BigRational as Coord>::from_i64(a), <BigRational as Coord>::from_i64(b));
    let t = bisector_abscissa(&ar, h_a, &br, h_b)?;
    let da = (&t - &ar) * (&t - &ar) + h_a * h_a;
    let db = (&t - &br) * (&t - &br) + h_b * h_b;
    Ok((da - db).is_zero())
}
