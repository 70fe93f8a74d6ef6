//! Random walks of mapping classes on the genus-one Teichmuller space.
//!
//! A walk multiplies chosen generators on the right, `M_n = ω_0 ω_1 ⋯ ω_{n−1}`,
//! and visits `y_n = M_n · y`, so the first generator chosen is applied last.
//! Products are kept as exact integer matrices. The points `y_n` leave the
//! range of `f64` after a few hundred steps, so distances are computed from the
//! matrices, and geometry near a far-away point is done in the frame of a walk
//! point close to it, i.e. after applying `M_n⁻¹`.
//!
//! Distances are Teichmuller distances, half the curvature `−1` ones.

use std::f64::consts::LN_2;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::hyperbolic::{self, Boundary, Mobius, Toward};
use crate::metric_core::{self, Bound, TriangleFrame};
use crate::numeric::{asinh_exp, ln_sinh};
use crate::torus_teich::{self, MappingClass, TeichGeodesic, TorusError, TorusPoint};

/// Relative tolerance on the probability sum.
pub const PROB_TOL: f64 = 1e-12;
/// Beyond this distance from the frame's base point a point's `f64`
/// coordinates no longer resolve its systole.
pub const FRAME_REACH: f64 = 15.0;
/// How far to look for a better frame when the natural one is out of reach.
const FRAME_SEARCH: usize = 16;
/// Space tag of frames built from walk triangles.
pub const SPACE_TAG: &str = "teichmuller";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("no generators")]
    NoGenerators,
    #[error("{0} generators but {1} probabilities")]
    LengthMismatch(usize, usize),
    #[error("invalid probability {0}")]
    BadProbability(f64),
    #[error("probabilities sum to {0}, not 1")]
    ProbabilitySum(f64),
    #[error("epsilon must be positive, got {0}")]
    Epsilon(f64),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error("basepoint has systole {0} below epsilon {1}")]
    NotThick(f64, f64),
    #[error("delta {delta} must lie in (0, A) with A = {a}")]
    Delta { delta: f64, a: f64 },
    #[error("drift must be positive, got {0}")]
    NonPositiveDrift(f64),
    #[error("need at least two paths, got {0}")]
    TooFewPaths(usize),
    #[error("step {0} beyond the path length {1}")]
    OutOfRange(usize, usize),
    #[error("point y_{0} is too far out to represent in floating point")]
    Unrepresentable(usize),
}

/// Finitely supported step distribution on mapping classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub generators: Vec<MappingClass>,
    pub probabilities: Vec<f64>,
    pub basepoint: TorusPoint,
    pub epsilon: f64,
    pub steps: usize,
    pub seed: u64,
}

impl WalkConfig {
    pub fn uniform(generators: Vec<MappingClass>, basepoint: TorusPoint, epsilon: f64, steps: usize, seed: u64) -> WalkConfig {
        let p = 1.0 / generators.len().max(1) as f64;
        let probabilities = vec![p; generators.len()];
        WalkConfig { generators, probabilities, basepoint, epsilon, steps, seed }
    }

    /// `T`, `T⁻¹` and `S` with equal weights.
    pub fn modular(basepoint: TorusPoint, epsilon: f64, steps: usize, seed: u64) -> WalkConfig {
        WalkConfig::uniform(vec![MappingClass::T, MappingClass::T_INV, MappingClass::S], basepoint, epsilon, steps, seed)
    }

    pub fn validate(&self) -> Result<(), WalkError> {
        if self.generators.is_empty() {
            return Err(WalkError::NoGenerators);
        }
        if self.generators.len() != self.probabilities.len() {
            return Err(WalkError::LengthMismatch(self.generators.len(), self.probabilities.len()));
        }
        for g in &self.generators {
            MappingClass::new(g.a, g.b, g.c, g.d)?;
        }
        for &p in &self.probabilities {
            if !p.is_finite() || p < 0.0 {
                return Err(WalkError::BadProbability(p));
            }
        }
        let sum: f64 = self.probabilities.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(WalkError::ProbabilitySum(sum));
        }
        if !(self.epsilon > 0.0) {
            return Err(WalkError::Epsilon(self.epsilon));
        }
        TorusPoint::new(self.basepoint.tau())?;
        let sys = torus_teich::systole(&self.basepoint);
        if sys < self.epsilon {
            return Err(WalkError::NotThick(sys, self.epsilon));
        }
        Ok(())
    }

    /// The classes with positive weight.
    pub fn support(&self) -> Vec<MappingClass> {
        self.generators.iter().zip(&self.probabilities).filter(|(_, &p)| p > 0.0).map(|(g, _)| *g).collect()
    }

    /// Whether the support generates a non-elementary group, certified by two
    /// hyperbolic words of length at most four with disjoint fixed points.
    pub fn non_elementary(&self) -> bool {
        non_elementary(&self.support())
    }
}

/// Finds two hyperbolic words of length ≤ 4 in the generators and their
/// inverses whose fixed-point pairs are disjoint.
pub fn non_elementary(generators: &[MappingClass]) -> bool {
    let mut letters: Vec<MappingClass> = Vec::new();
    for g in generators {
        for h in [*g, g.inverse()] {
            if !letters.contains(&h) {
                letters.push(h);
            }
        }
    }
    let mut words = vec![MappingClass::IDENTITY];
    let mut hyperbolic: Vec<MappingClass> = Vec::new();
    for _ in 0..4 {
        let mut next = Vec::new();
        for w in &words {
            for l in &letters {
                let x = w.compose(l);
                if x.trace().abs() > 2 && !hyperbolic.contains(&x) {
                    hyperbolic.push(x);
                }
                next.push(x);
            }
        }
        next.sort_by_key(|m| (m.a, m.b, m.c, m.d));
        next.dedup();
        words = next;
    }
    for (i, x) in hyperbolic.iter().enumerate() {
        for y in &hyperbolic[i + 1..] {
            if fixed_points_disjoint(x, y) {
                return true;
            }
        }
    }
    false
}

/// The fixed points of `[[a,b],[c,d]]` are the roots of `c x² + (d−a) x − b`.
/// Two such quadratics share a root iff their resultant vanishes.
fn fixed_points_disjoint(x: &MappingClass, y: &MappingClass) -> bool {
    let q = |m: &MappingClass| [m.c as i128, (m.d - m.a) as i128, -(m.b as i128)];
    let ([a2, a1, a0], [b2, b1, b0]) = (q(x), q(y));
    let res = (a2 * b0 - a0 * b2).pow(2) - (a2 * b1 - a1 * b2) * (a1 * b0 - a0 * b1);
    res != 0
}

/// Exact product of mapping classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigMat {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
    pub d: BigInt,
}

impl BigMat {
    pub fn identity() -> BigMat {
        BigMat::from_class(&MappingClass::IDENTITY)
    }

    pub fn from_class(m: &MappingClass) -> BigMat {
        BigMat { a: m.a.into(), b: m.b.into(), c: m.c.into(), d: m.d.into() }
    }

    /// `self ← self · g`.
    pub fn mul_right(&mut self, g: &MappingClass) {
        let a = &self.a * g.a + &self.b * g.c;
        let b = &self.a * g.b + &self.b * g.d;
        let c = &self.c * g.a + &self.d * g.c;
        let d = &self.c * g.b + &self.d * g.d;
        *self = BigMat { a, b, c, d };
    }

    /// `self ← g · self`.
    pub fn mul_left(&mut self, g: &MappingClass) {
        let a = &self.a * g.a + &self.c * g.b;
        let b = &self.b * g.a + &self.d * g.b;
        let c = &self.a * g.c + &self.c * g.d;
        let d = &self.b * g.c + &self.d * g.d;
        *self = BigMat { a, b, c, d };
    }

    pub fn mul(&self, o: &BigMat) -> BigMat {
        BigMat {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }

    pub fn inverse(&self) -> BigMat {
        BigMat { a: self.d.clone(), b: -&self.b, c: -&self.c, d: self.a.clone() }
    }

    /// Entries divided by a common power of two.
    pub fn scaled(&self) -> ScaledMat {
        let bits = [&self.a, &self.b, &self.c, &self.d].iter().map(|x| x.bits()).max().unwrap_or(0) as i64;
        let shift = (bits - 60).max(0);
        let f = |x: &BigInt| -> f64 {
            let y: BigInt = if shift > 0 { x >> (shift as usize) } else { x.clone() };
            y.to_f64().unwrap_or(0.0)
        };
        ScaledMat { m: [f(&self.a), f(&self.b), f(&self.c), f(&self.d)], e: shift }
    }

    /// The boundary point `(a p + b q)/(c p + d q)`, `q = 0` meaning `∞`.
    pub fn apply_ratio(&self, p: i64, q: i64) -> Boundary {
        let num = &self.a * p + &self.b * q;
        let den = &self.c * p + &self.d * q;
        if den.is_zero() {
            return Boundary::Infinity;
        }
        let (nb, db) = (num.bits() as i64, den.bits() as i64);
        let shift = (nb.max(db) - 60).max(0) as usize;
        let n = (num >> shift).to_f64().unwrap_or(0.0);
        let d = (den >> shift).to_f64().unwrap_or(0.0);
        if d == 0.0 {
            // The denominator is tiny compared with the numerator.
            return Boundary::Infinity;
        }
        Boundary::Finite(n / d)
    }
}

/// A determinant-one matrix stored as `2^e · m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledMat {
    pub m: [f64; 4],
    pub e: i64,
}

impl ScaledMat {
    pub const IDENTITY: ScaledMat = ScaledMat { m: [1.0, 0.0, 0.0, 1.0], e: 0 };

    pub fn mul_right(&mut self, g: &MappingClass) {
        let [a, b, c, d] = self.m;
        let (ga, gb, gc, gd) = (g.a as f64, g.b as f64, g.c as f64, g.d as f64);
        self.m = [a * ga + b * gc, a * gb + b * gd, c * ga + d * gc, c * gb + d * gd];
        self.renormalize();
    }

    pub fn mul_left(&mut self, g: &MappingClass) {
        let [a, b, c, d] = self.m;
        let (ga, gb, gc, gd) = (g.a as f64, g.b as f64, g.c as f64, g.d as f64);
        self.m = [ga * a + gb * c, ga * b + gb * d, gc * a + gd * c, gc * b + gd * d];
        self.renormalize();
    }

    fn renormalize(&mut self) {
        const BIG: f64 = 1.157_920_892_373_162e77; // 2^256
        if self.m.iter().any(|x| x.abs() > BIG) {
            for x in &mut self.m {
                *x /= BIG;
            }
            self.e += 256;
        }
    }

    pub fn inverse(&self) -> ScaledMat {
        let [a, b, c, d] = self.m;
        ScaledMat { m: [d, -b, -c, a], e: self.e }
    }

    /// Image of an interior point. The imaginary part comes from the
    /// determinant, so it stays positive however far out the point is.
    pub fn apply(&self, tau: Complex64) -> Complex64 {
        let [a, b, c, d] = self.m;
        let den = Complex64::new(c * tau.re + d, c * tau.im);
        let n2 = den.norm_sqr();
        let re = (a * c * tau.norm_sqr() + (a * d + b * c) * tau.re + b * d) / n2;
        let im = (-2.0 * self.e as f64 * LN_2 + tau.im.ln() - n2.ln()).exp();
        Complex64::new(re, im)
    }

    pub fn apply_boundary(&self, x: Boundary) -> Boundary {
        let [a, b, c, d] = self.m;
        Mobius { a, b, c, d }.apply_boundary(x)
    }

    /// Teichmuller distance from `tau` to its image.
    pub fn displacement(&self, tau: Complex64) -> f64 {
        let [a, b, c, d] = self.m;
        let (x, y) = (tau.re, tau.im);
        // Conjugating by the affine map sending tau to i gives a matrix M′ with
        // 2 sinh²(d_hyp/2) · 2 = (a′ − d′)² + (b′ + c′)².
        let u = a - d - 2.0 * x * c;
        let v = (a * x + b - c * x * x - d * x) / y + c * y;
        let s = u * u + v * v;
        if s == 0.0 {
            return 0.0;
        }
        asinh_exp(self.e as f64 * LN_2 + 0.5 * s.ln() - LN_2)
    }
}

/// One realization of the walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    pub seed: u64,
    pub index: u64,
    pub basepoint: TorusPoint,
    pub generators: Vec<MappingClass>,
    /// Indices into `generators`, one per step.
    pub omega: Vec<usize>,
}

impl SamplePath {
    pub fn steps(&self) -> usize {
        self.omega.len()
    }

    pub fn step(&self, n: usize) -> &MappingClass {
        &self.generators[self.omega[n]]
    }

    /// `ω_0 ⋯ ω_{n−1}`.
    pub fn product(&self, n: usize) -> Result<BigMat, WalkError> {
        self.segment(0, n)
    }

    /// `ω_m ⋯ ω_{n−1}`, which carries `y` to `M_m⁻¹ y_n`.
    pub fn segment(&self, m: usize, n: usize) -> Result<BigMat, WalkError> {
        if n > self.steps() || m > n {
            return Err(WalkError::OutOfRange(n, self.steps()));
        }
        let mut p = BigMat::identity();
        for k in m..n {
            p.mul_right(self.step(k));
        }
        Ok(p)
    }

    /// `y_n` in floating point.
    pub fn point(&self, n: usize) -> Result<TorusPoint, WalkError> {
        let z = self.product(n)?.scaled().apply(self.basepoint.tau());
        TorusPoint::new(z).map_err(|_| WalkError::Unrepresentable(n))
    }

    /// `y_0, …, y_n` for as long as they are representable.
    pub fn points(&self, n: usize) -> Result<Vec<TorusPoint>, WalkError> {
        (0..=n).map(|k| self.point(k)).collect()
    }

    /// The same walk seen after applying `g`: generators conjugated, basepoint moved.
    pub fn conjugate(&self, g: &MappingClass) -> Result<SamplePath, WalkError> {
        let generators = self.generators.iter().map(|w| g.compose(w).compose(&g.inverse())).collect();
        let basepoint = torus_teich::apply_mapping_class(g, &self.basepoint)?;
        Ok(SamplePath { generators, basepoint, ..self.clone() })
    }
}

/// The path with index 0 of `config`.
pub fn sample_path(config: &WalkConfig) -> Result<SamplePath, WalkError> {
    sample_path_indexed(config, 0)
}

/// Path number `index`. Each path has its own ChaCha stream under the master
/// seed, so paths can be drawn in any order or in parallel.
pub fn sample_path_indexed(config: &WalkConfig, index: u64) -> Result<SamplePath, WalkError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index);
    let dist = WeightedIndex::new(&config.probabilities).map_err(|_| WalkError::ProbabilitySum(0.0))?;
    let omega = (0..config.steps).map(|_| dist.sample(&mut rng)).collect();
    Ok(SamplePath {
        seed: config.seed,
        index,
        basepoint: config.basepoint,
        generators: config.generators.clone(),
        omega,
    })
}

/// `a(n) = d(y, y_n)` along one path.
#[derive(Debug, Clone, PartialEq)]
pub struct CocycleTable {
    pub a: Vec<f64>,
    basepoint: TorusPoint,
    generators: Vec<MappingClass>,
    omega: Vec<usize>,
    heads: Vec<ScaledMat>,
}

/// Distances along a path, as needed by [`detect_records`].
pub trait DistanceTable {
    /// Largest index `n`.
    fn n_max(&self) -> usize;
    /// `a(n) = d(y, y_n)`.
    fn a(&self, n: usize) -> f64;
    /// `d(y_k, y_n)` for `k = 0, …, n`.
    fn distances_to(&self, n: usize) -> Vec<f64>;
}

pub fn cocycle(path: &SamplePath) -> CocycleTable {
    let tau = path.basepoint.tau();
    let mut m = BigMat::identity();
    let mut heads = Vec::with_capacity(path.steps() + 1);
    let mut a = Vec::with_capacity(path.steps() + 1);
    heads.push(m.scaled());
    a.push(0.0);
    for k in 0..path.steps() {
        m.mul_right(path.step(k));
        let s = m.scaled();
        a.push(s.displacement(tau));
        heads.push(s);
    }
    CocycleTable {
        a,
        basepoint: path.basepoint,
        generators: path.generators.clone(),
        omega: path.omega.clone(),
        heads,
    }
}

impl CocycleTable {
    pub fn steps(&self) -> usize {
        self.a.len() - 1
    }

    /// `d(y_m, y_{m+n})`, the cocycle at the shifted sequence.
    pub fn shifted(&self, m: usize, n: usize) -> Result<f64, WalkError> {
        if m + n > self.steps() {
            return Err(WalkError::OutOfRange(m + n, self.steps()));
        }
        let mut p = BigMat::identity();
        for k in m..m + n {
            p.mul_right(&self.generators[self.omega[k]]);
        }
        Ok(p.scaled().displacement(self.basepoint.tau()))
    }

    /// `M_n`, scaled.
    pub fn head(&self, n: usize) -> &ScaledMat {
        &self.heads[n]
    }

    fn step(&self, k: usize) -> &MappingClass {
        &self.generators[self.omega[k]]
    }
}

impl DistanceTable for CocycleTable {
    fn n_max(&self) -> usize {
        self.steps()
    }

    fn a(&self, n: usize) -> f64 {
        self.a[n]
    }

    fn distances_to(&self, n: usize) -> Vec<f64> {
        let tau = self.basepoint.tau();
        let mut out = vec![0.0; n + 1];
        let mut w = ScaledMat::IDENTITY;
        for k in (0..n).rev() {
            w.mul_left(self.step(k));
            out[k] = w.displacement(tau);
        }
        out
    }
}

/// Drift estimate from independent paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftEstimate {
    #[serde(rename = "A_hat")]
    pub a_hat: f64,
    pub half1: f64,
    pub half2: f64,
    /// `|half1 − half2| / A_hat`.
    pub half_split: f64,
    pub n_used: usize,
    pub steps: usize,
    pub std_error: f64,
    /// `A_hat` is within the `ln n / n` growth of a zero-drift walk.
    pub near_zero: bool,
}

impl DriftEstimate {
    /// From the per-path values `a(steps)/steps`, in path order.
    pub fn from_samples(values: &[f64], steps: usize) -> Result<DriftEstimate, WalkError> {
        let n = values.len();
        if n < 2 {
            return Err(WalkError::TooFewPaths(n));
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        let a_hat = mean(values);
        let (h1, h2) = values.split_at(n / 2);
        let (half1, half2) = (mean(h1), mean(h2));
        let var = values.iter().map(|v| (v - a_hat).powi(2)).sum::<f64>() / (n - 1) as f64;
        let std_error = (var / n as f64).sqrt();
        let floor = 2.0 * (steps.max(2) as f64).ln() / steps.max(1) as f64;
        Ok(DriftEstimate {
            a_hat,
            half1,
            half2,
            half_split: if a_hat > 0.0 { (half1 - half2).abs() / a_hat } else { f64::INFINITY },
            n_used: n,
            steps,
            std_error,
            near_zero: a_hat <= floor,
        })
    }
}

/// `a(steps)/steps` for path `index`.
pub fn path_drift(config: &WalkConfig, index: u64, steps: usize) -> Result<f64, WalkError> {
    let mut cfg = config.clone();
    cfg.steps = steps;
    let path = sample_path_indexed(&cfg, index)?;
    if steps == 0 {
        return Ok(0.0);
    }
    let m = path.product(steps)?;
    Ok(m.scaled().displacement(config.basepoint.tau()) / steps as f64)
}

pub fn estimate_drift(config: &WalkConfig, n_paths: usize, steps: usize) -> Result<DriftEstimate, WalkError> {
    if n_paths < 2 {
        return Err(WalkError::TooFewPaths(n_paths));
    }
    let values = (0..n_paths as u64).map(|i| path_drift(config, i, steps)).collect::<Result<Vec<_>, _>>()?;
    DriftEstimate::from_samples(&values, steps)
}

/// `n` with `a(n) − d(y_k, y_n) ≥ (A−δ)k` for all `N ≤ k ≤ n`, and the least such `N ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub n: usize,
    pub first: usize,
}

fn check_delta(a: f64, delta: f64) -> Result<(), WalkError> {
    if !(a > 0.0) {
        return Err(WalkError::NonPositiveDrift(a));
    }
    if !(delta > 0.0 && delta < a) {
        return Err(WalkError::Delta { delta, a });
    }
    Ok(())
}

/// Cheap record test: the `k = n` condition `a(n) ≥ (A−δ)n` already makes
/// `N = n` valid, so it decides whether `n` is a record at all.
pub fn record_flags(table: &impl DistanceTable, a: f64, delta: f64) -> Result<Vec<bool>, WalkError> {
    check_delta(a, delta)?;
    let rate = a - delta;
    Ok((0..=table.n_max()).map(|n| n >= 1 && table.a(n) >= rate * n as f64).collect())
}

pub fn detect_records(table: &impl DistanceTable, a: f64, delta: f64) -> Result<Vec<Record>, WalkError> {
    let flags = record_flags(table, a, delta)?;
    let rate = a - delta;
    let mut out = Vec::new();
    for n in 1..=table.n_max() {
        if !flags[n] {
            continue;
        }
        let an = table.a(n);
        let d = table.distances_to(n);
        let first = (1..n).rev().find(|&k| an - d[k] < rate * k as f64).map_or(1, |k| k + 1);
        out.push(Record { n, first });
    }
    Ok(out)
}

/// Least `N ≥ 1` with `|a(n) − An| ≤ δn` for every tabulated `n ≥ N`.
pub fn kingman_onset(table: &impl DistanceTable, a: f64, delta: f64) -> usize {
    (1..=table.n_max()).rev().find(|&n| (table.a(n) - a * n as f64).abs() > delta * n as f64).map_or(1, |n| n + 1)
}

/// Estimate of the boundary point the walk converges to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitPoint {
    pub xi: Boundary,
    pub xi_half: Boundary,
    /// Visual angle at the basepoint between `xi` and `xi_half`.
    pub diagnostic: f64,
    pub converged: bool,
    pub steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Angle of `x` seen from `base`, in the disk model centered there.
pub fn visual_angle(base: Complex64, x: Boundary) -> f64 {
    match Mobius::to_i(base).apply_boundary(x) {
        Boundary::Infinity => 0.0,
        Boundary::Finite(t) => {
            let z = Complex64::new(t, 0.0);
            ((z - Complex64::i()) / (z + Complex64::i())).arg()
        }
    }
}

fn angle_gap(t1: f64, t2: f64) -> f64 {
    let d = (t1 - t2).rem_euclid(std::f64::consts::TAU);
    d.min(std::f64::consts::TAU - d)
}

/// `ξ̂_N = M_N(∞)`, with the gap to `ξ̂_{N/2}` as diagnostic.
pub fn limit_point(path: &SamplePath) -> LimitPoint {
    let n = path.steps();
    let xi = path.product(n).expect("in range").apply_ratio(1, 0);
    let xi_half = path.product(n / 2).expect("in range").apply_ratio(1, 0);
    let base = path.basepoint.tau();
    let diagnostic = angle_gap(visual_angle(base, xi), visual_angle(base, xi_half));
    let converged = diagnostic < 1e-3;
    LimitPoint {
        xi,
        xi_half,
        diagnostic,
        converged,
        steps: n,
        note: (!converged).then(|| "no convergence detected".to_string()),
    }
}

/// Geodesic ray from the basepoint toward `M_N(ζ)`, with the forward endpoint
/// known exactly in the frame of every walk point.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitGeodesic {
    pub basepoint: TorusPoint,
    pub endpoint: Boundary,
    pub steps: usize,
    backward: Boundary,
    ahead: Vec<Boundary>,
}

impl LimitGeodesic {
    /// Toward `M_N(∞)`.
    pub fn new(path: &SamplePath) -> LimitGeodesic {
        LimitGeodesic::toward_image_of(path, 1, 0)
    }

    /// Toward `M_N(p/q)`, `q = 0` meaning `∞`.
    pub fn toward_image_of(path: &SamplePath, p: i64, q: i64) -> LimitGeodesic {
        let n = path.steps();
        let mut w = BigMat::identity();
        let mut ahead = vec![Boundary::Infinity; n + 1];
        ahead[n] = w.apply_ratio(p, q);
        for k in (0..n).rev() {
            w.mul_left(path.step(k));
            ahead[k] = w.apply_ratio(p, q);
        }
        let endpoint = ahead[0];
        let base = path.basepoint.tau();
        let backward = hyperbolic::normalizer(base, Toward::Boundary(endpoint)).inverse().apply_boundary(Boundary::Finite(0.0));
        LimitGeodesic { basepoint: path.basepoint, endpoint, steps: n, backward, ahead }
    }

    pub fn teich(&self) -> TeichGeodesic {
        TeichGeodesic::to_boundary(self.basepoint, self.endpoint)
    }

    /// The geodesic in the frame of `y_k`, with its start.
    fn in_frame(&self, table: &CocycleTable, k: usize) -> Option<(LineFrame, f64)> {
        let inv = table.head(k).inverse();
        let base = self.basepoint.tau();
        let frame = LineFrame::new(base, inv.apply_boundary(self.backward), self.ahead[k])?;
        let start = frame.start_offset(inv.apply(base), 2.0 * table.a[k]);
        Some((frame, start))
    }

    /// The point at distance `t` along the ray, seen from `y_k`: its distance to
    /// `y_k` and its coordinates after applying `M_k⁻¹`.
    pub fn point_from(&self, table: &CocycleTable, k: usize, t: f64) -> Option<(f64, Complex64)> {
        let (frame, start) = self.in_frame(table, k)?;
        let sigma = start + 2.0 * t;
        Some((frame.distance(sigma), frame.point(sigma)))
    }

    /// Systole of the point at distance `t`, from the nearest frame around `k`.
    /// `None` when no frame brings the point within [`FRAME_REACH`].
    pub fn systole_near(&self, table: &CocycleTable, k: usize, t: f64) -> Option<f64> {
        let mut best: Option<(f64, Complex64)> = None;
        let lo = k.saturating_sub(FRAME_SEARCH);
        let hi = (k + FRAME_SEARCH).min(table.steps());
        for j in std::iter::once(k).chain(lo..=hi) {
            if let Some((d, z)) = self.point_from(table, j, t) {
                if best.map_or(true, |(b, _)| d < b) {
                    best = Some((d, z));
                }
            }
            if best.is_some_and(|(b, _)| b <= FRAME_REACH) {
                break;
            }
        }
        let (d, z) = best?;
        let p = TorusPoint::new(z).ok()?;
        (d <= FRAME_REACH).then(|| torus_teich::systole(&p))
    }
}

/// A geodesic line normalized by `g`: `minus ↦ 0`, `plus ↦ ∞` and the frame's
/// base point onto the unit circle, so the foot of the perpendicular from the
/// base maps to `i` and points of the line are `i e^σ`.
#[derive(Debug, Clone, Copy)]
struct LineFrame {
    g: Mobius,
    /// Curvature −1 distance from the base point to the line.
    h: f64,
}

impl LineFrame {
    fn new(base: Complex64, minus: Boundary, plus: Boundary) -> Option<LineFrame> {
        let g = match (minus, plus) {
            (Boundary::Finite(xm), Boundary::Finite(xp)) => {
                if xm == xp {
                    return None;
                }
                let lambda = (xm - xp).signum() * (base - xp).norm() / (base - xm).norm();
                Mobius { a: lambda, b: -lambda * xm, c: 1.0, d: -xp }
            }
            (Boundary::Finite(xm), Boundary::Infinity) => {
                let lambda = 1.0 / (base - xm).norm();
                Mobius { a: lambda, b: -lambda * xm, c: 0.0, d: 1.0 }
            }
            (Boundary::Infinity, Boundary::Finite(xp)) => {
                let lambda = (base - xp).norm();
                Mobius { a: 0.0, b: -lambda, c: 1.0, d: -xp }
            }
            (Boundary::Infinity, Boundary::Infinity) => return None,
        };
        if !(g.a.is_finite() && g.b.is_finite() && g.c.is_finite() && g.d.is_finite()) {
            return None;
        }
        let h = hyperbolic::distance_unchecked(g.apply(base), Complex64::i());
        Some(LineFrame { g, h })
    }

    fn offset(&self, z: Complex64) -> f64 {
        self.g.apply(z).norm().ln()
    }

    /// Offset of a point of the line at curvature −1 distance `dist` from the
    /// base. Close points are located directly; far ones from `dist` and `h`,
    /// taking only the side from their coordinates.
    fn start_offset(&self, z: Complex64, dist: f64) -> f64 {
        let direct = self.offset(z);
        if dist < 10.0 && direct.is_finite() {
            return direct;
        }
        let lnx = ln_cosh(dist) - ln_cosh(self.h);
        let mag = if lnx <= 0.0 {
            0.0
        } else if lnx < 20.0 {
            lnx.exp().acosh()
        } else {
            lnx + (1.0 + (1.0 - (-2.0 * lnx).exp()).sqrt()).ln()
        };
        if direct < 0.0 {
            -mag
        } else {
            mag
        }
    }

    fn point(&self, sigma: f64) -> Complex64 {
        self.g.inverse().apply(Complex64::new(0.0, sigma.clamp(-700.0, 700.0).exp()))
    }

    /// Teichmuller distance from the base to the point at offset `sigma`.
    fn distance(&self, sigma: f64) -> f64 {
        // sinh²(d/2) = u + v + 2uv with u = sinh²(h/2), v = sinh²(σ/2).
        let lu = if self.h > 0.0 { 2.0 * ln_sinh(0.5 * self.h) } else { f64::NEG_INFINITY };
        let lv = if sigma != 0.0 { 2.0 * ln_sinh(0.5 * sigma.abs()) } else { f64::NEG_INFINITY };
        let l = log_sum_exp(&[lu, lv, LN_2 + lu + lv]);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            asinh_exp(0.5 * l)
        }
    }
}

fn ln_cosh(x: f64) -> f64 {
    let x = x.abs();
    x + (-2.0 * x).exp().ln_1p() - LN_2
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// The geodesic through two points, oriented from `p` to `q`.
fn line_through(p: Complex64, q: Complex64) -> Option<(Boundary, Boundary)> {
    let dx = p.re - q.re;
    let xc = (p.norm_sqr() - q.norm_sqr()) / (2.0 * dx);
    if dx == 0.0 || !xc.is_finite() {
        let x = 0.5 * (p.re + q.re);
        return Some(if p.im < q.im {
            (Boundary::Finite(x), Boundary::Infinity)
        } else {
            (Boundary::Infinity, Boundary::Finite(x))
        });
    }
    let r = (p - xc).norm();
    // The roots of x² − 2 xc x + (2 Re p · xc − |p|²) without cancellation.
    let far = xc + xc.signum() * r;
    let near = (2.0 * p.re * xc - p.norm_sqr()) / far;
    let (left, right) = if far > near { (near, far) } else { (far, near) };
    let tp = p.im.atan2(p.re - xc);
    let tq = q.im.atan2(q.re - xc);
    if !(left.is_finite() && right.is_finite()) || left == right {
        return None;
    }
    // Angle π is the left endpoint.
    Some(if tp > tq {
        (Boundary::Finite(left), Boundary::Finite(right))
    } else {
        (Boundary::Finite(right), Boundary::Finite(left))
    })
}

/// `s(n) = (1/n)·d(y_n, γ(An))·χ_K(p_n)` with `p_n = γ(d(y, y_n))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingSeries {
    pub s: Vec<f64>,
    pub unmasked: Vec<f64>,
    pub chi: Vec<bool>,
    /// Steps whose `p_n` was out of every frame's reach; `χ` is 0 there.
    pub unresolved: usize,
}

impl TrackingSeries {
    /// Median of `s(n)` over `lo ≤ n ≤ hi`.
    pub fn median(&self, lo: usize, hi: usize) -> Option<f64> {
        window_median(&self.s, lo, hi)
    }

    pub fn median_unmasked(&self, lo: usize, hi: usize) -> Option<f64> {
        window_median(&self.unmasked, lo, hi)
    }
}

fn window_median(v: &[f64], lo: usize, hi: usize) -> Option<f64> {
    let hi = hi.min(v.len().checked_sub(1)?);
    if lo > hi {
        return None;
    }
    median(v[lo..=hi].to_vec())
}

pub fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

pub fn tracking_statistic(
    table: &CocycleTable,
    geodesic: &LimitGeodesic,
    a: f64,
    epsilon: f64,
) -> Result<TrackingSeries, WalkError> {
    if !(a > 0.0) {
        return Err(WalkError::NonPositiveDrift(a));
    }
    let n_max = table.steps().min(geodesic.steps);
    let mut s = vec![0.0; n_max + 1];
    let mut unmasked = vec![0.0; n_max + 1];
    let mut chi = vec![false; n_max + 1];
    let mut unresolved = 0;
    for n in 1..=n_max {
        let d = geodesic.point_from(table, n, a * n as f64).map_or(f64::NAN, |(d, _)| d);
        let thick = match geodesic.systole_near(table, n, table.a[n]) {
            Some(sys) => sys >= epsilon,
            None => {
                unresolved += 1;
                false
            }
        };
        unmasked[n] = d / n as f64;
        chi[n] = thick;
        s[n] = if thick { unmasked[n] } else { 0.0 };
    }
    Ok(TrackingSeries { s, unmasked, chi, unresolved })
}

/// A pair `n < m` whose triangle `(y, y_n, y_m)` is thin-framed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinPair {
    pub n: usize,
    pub m: usize,
    pub defect: f64,
    pub defect_ratio: f64,
    /// Frame with `x = y_n`, `y = y`, `z = y_m`.
    pub frame: TriangleFrame,
    /// Whether the comparison point on `[y, y_m]` is in the thick part; `None`
    /// when it is too far from `y_n` to resolve.
    pub thick: Option<bool>,
    /// `d(γ_∞(a(n)), γ_m(a(n)))` when a limit geodesic was supplied.
    pub proximity: Option<f64>,
}

/// Which pairs `thin_frame_pairs` looks at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairOptions {
    /// Only indices divisible by `stride` are used.
    pub stride: usize,
    pub epsilon: f64,
}

impl Default for PairOptions {
    fn default() -> Self {
        PairOptions { stride: 1, epsilon: 0.5 }
    }
}

/// Pairs `N_δ ≤ n < m` on the stride grid with
/// `d(y,y_n) + d(y_n,y_m) − d(y,y_m) ≤ (2δ/(A−δ))·d(y,y_n)`, where `N_δ` is
/// [`kingman_onset`].
pub fn thin_frame_pairs(
    table: &CocycleTable,
    a: f64,
    delta: f64,
    limit: Option<&LimitGeodesic>,
    opts: &PairOptions,
) -> Result<Vec<ThinPair>, WalkError> {
    check_delta(a, delta)?;
    let bound = 2.0 * delta / (a - delta);
    let onset = kingman_onset(table, a, delta);
    let stride = opts.stride.max(1);
    let base = table.basepoint.tau();
    let n_max = table.steps();
    let mut out = Vec::new();
    let first = onset.div_ceil(stride) * stride;
    for n in (first.max(stride)..=n_max).step_by(stride) {
        let an = table.a[n];
        let inv = table.head(n).inverse();
        let p = inv.apply(base);
        let mut w = ScaledMat::IDENTITY;
        for m in n + 1..=n_max {
            w.mul_right(table.step(m - 1));
            if m % stride != 0 {
                continue;
            }
            let (b, c) = (w.displacement(base), table.a[m]);
            let defect = an + b - c;
            if defect > bound * an || c < an.max(b) {
                continue;
            }
            let d = 0.5 * metric_core::hyp_d_unchecked(2.0 * an, 2.0 * b, 2.0 * c);
            let frame = TriangleFrame::from_distances(SPACE_TAG, an, b, c, d);
            let comparison = line_through(p, w.apply(base))
                .and_then(|(minus, plus)| LineFrame::new(base, minus, plus))
                .map(|lf| {
                    let sigma = lf.start_offset(p, 2.0 * an) + 2.0 * an;
                    (lf.distance(sigma), lf.point(sigma))
                });
            let thick = comparison.and_then(|(dist, z)| {
                let pt = TorusPoint::new(z).ok()?;
                (dist <= FRAME_REACH).then(|| torus_teich::in_thick(&pt, opts.epsilon))
            });
            let proximity = match (limit, comparison) {
                (Some(g), Some((_, z))) => g.point_from(table, n, an).map(|(_, q)| 0.5 * hyperbolic::distance_unchecked(q, z)),
                _ => None,
            };
            out.push(ThinPair { n, m, defect, defect_ratio: defect / an, frame, thick, proximity });
        }
    }
    Ok(out)
}

/// `d(γ_m(a(n)), γ_∞(a(n)))` for each `m`, with `γ_m` the geodesic from `y` to `y_m`.
pub fn geodesic_convergence(table: &CocycleTable, limit: &LimitGeodesic, n: usize, ms: &[usize]) -> Vec<Option<f64>> {
    let base = table.basepoint.tau();
    let an = table.a[n];
    let p = table.head(n).inverse().apply(base);
    let target = limit.point_from(table, n, an).map(|(_, z)| z);
    ms.iter()
        .map(|&m| {
            if m <= n || m > table.steps() {
                return None;
            }
            let mut w = ScaledMat::IDENTITY;
            for k in n..m {
                w.mul_right(table.step(k));
            }
            let (minus, plus) = line_through(p, w.apply(base))?;
            let lf = LineFrame::new(base, minus, plus)?;
            let z = lf.point(lf.start_offset(p, 2.0 * an) + 2.0 * an);
            Some(0.5 * hyperbolic::distance_unchecked(z, target?))
        })
        .collect()
}

/// Smallest `k` with `d ≤ k·(a+b−c)` on every thick-framed pair.
pub fn empirical_slope(pairs: &[ThinPair]) -> Option<f64> {
    pairs
        .iter()
        .filter(|p| p.thick == Some(true) && p.defect > 0.0)
        .map(|p| p.frame.d / p.defect)
        .fold(None, |acc: Option<f64>, k| Some(acc.map_or(k, |a| a.max(k))))
}

/// Runs the thick-framed pairs through the star test with `f(t) = k·t`.
pub fn slope_report(pairs: &[ThinPair], k: f64) -> Result<metric_core::StarReport, metric_core::MetricError> {
    let frames: Vec<TriangleFrame> = pairs.iter().filter(|p| p.thick == Some(true)).map(|p| p.frame.clone()).collect();
    metric_core::check_star(&frames, Bound::LinearK(k))
}

/// Walk config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkFile {
    pub generators: Vec<[i64; 4]>,
    pub probs: Vec<f64>,
    pub basepoint: TorusPoint,
    pub epsilon: f64,
    pub steps: usize,
    pub paths: usize,
    pub seed: u64,
}

impl WalkFile {
    pub fn config(&self) -> Result<WalkConfig, WalkError> {
        let generators =
            self.generators.iter().map(|&[a, b, c, d]| MappingClass::new(a, b, c, d)).collect::<Result<Vec<_>, _>>()?;
        let cfg = WalkConfig {
            generators,
            probabilities: self.probs.clone(),
            basepoint: self.basepoint,
            epsilon: self.epsilon,
            steps: self.steps,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Everything recorded about one path once the drift is known.
#[derive(Debug, Clone, PartialEq)]
pub struct PathReport {
    pub index: u64,
    pub a: Vec<f64>,
    pub tracking: TrackingSeries,
    pub records: Vec<bool>,
    pub limit: LimitPoint,
    pub pairs: Vec<ThinPair>,
}

impl PathReport {
    /// Columns `n, a_n, s_n, chi_K, record_flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,a_n,s_n,chi_K,record_flag\n");
        for n in 0..self.a.len() {
            let s = self.tracking.s.get(n).copied().unwrap_or(0.0);
            let chi = self.tracking.chi.get(n).copied().unwrap_or(false);
            out.push_str(&format!("{n},{},{s},{},{}\n", self.a[n], chi as u8, self.records[n] as u8));
        }
        out
    }

    /// Largest record index.
    pub fn last_record(&self) -> Option<usize> {
        self.records.iter().rposition(|&r| r)
    }
}

/// Analyses path `index` given the drift `a` and `delta`. `pair_stride = 0`
/// skips the thin-frame pairs.
pub fn analyze_path(config: &WalkConfig, index: u64, a: f64, delta: f64, pair_stride: usize) -> Result<PathReport, WalkError> {
    let path = sample_path_indexed(config, index)?;
    let table = cocycle(&path);
    let limit = limit_point(&path);
    let geodesic = LimitGeodesic::new(&path);
    let tracking = tracking_statistic(&table, &geodesic, a, config.epsilon)?;
    let records = record_flags(&table, a, delta)?;
    let pairs = if pair_stride > 0 {
        let opts = PairOptions { stride: pair_stride, epsilon: config.epsilon };
        thin_frame_pairs(&table, a, delta, Some(&geodesic), &opts)?
    } else {
        Vec::new()
    };
    Ok(PathReport { index, a: table.a, tracking, records, limit, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowMedian {
    pub lo: usize,
    pub hi: usize,
    pub masked: f64,
    pub unmasked: f64,
}

/// Pooled summary of a batch of paths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSummary {
    #[serde(rename = "A_hat")]
    pub a_hat: f64,
    pub half_split: f64,
    pub drift: DriftEstimate,
    pub delta: f64,
    pub non_elementary: bool,
    /// Mean fraction of steps that are records.
    pub record_density: f64,
    /// Fraction of paths with a record beyond step 1000.
    pub late_record_fraction: f64,
    pub tracking_medians: Vec<WindowMedian>,
    pub limit_converged_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_slope: Option<f64>,
    pub thick_pairs: usize,
}

/// Pooled medians over `[100, 200]`, `[10⁴, 2·10⁴]` and the dyadic windows.
pub fn tracking_windows(reports: &[PathReport], steps: usize) -> Vec<WindowMedian> {
    let mut windows: Vec<(usize, usize)> = Vec::new();
    let mut lo = 1;
    while 2 * lo <= steps {
        windows.push((lo, 2 * lo));
        lo *= 2;
    }
    for w in [(100, 200), (10_000, 20_000)] {
        if w.1 <= steps && !windows.contains(&w) {
            windows.push(w);
        }
    }
    windows.sort();
    windows
        .into_iter()
        .filter_map(|(lo, hi)| {
            let pool = |f: &dyn Fn(&TrackingSeries) -> &Vec<f64>| {
                median(reports.iter().flat_map(|r| f(&r.tracking)[lo..=hi.min(r.a.len() - 1)].iter().copied()).collect())
            };
            Some(WindowMedian { lo, hi, masked: pool(&|t| &t.s)?, unmasked: pool(&|t| &t.unmasked)? })
        })
        .collect()
}

pub fn summarize(config: &WalkConfig, drift: &DriftEstimate, delta: f64, reports: &[PathReport]) -> WalkSummary {
    let paths = reports.len().max(1) as f64;
    let record_density =
        reports.iter().map(|r| r.records.iter().filter(|&&x| x).count() as f64 / r.records.len().max(1) as f64).sum::<f64>() / paths;
    let late = reports.iter().filter(|r| r.last_record().is_some_and(|n| n > 1000)).count() as f64 / paths;
    let converged = reports.iter().filter(|r| r.limit.converged).count() as f64 / paths;
    let thick: Vec<ThinPair> = reports.iter().flat_map(|r| r.pairs.iter().filter(|p| p.thick == Some(true)).cloned()).collect();
    WalkSummary {
        a_hat: drift.a_hat,
        half_split: drift.half_split,
        drift: drift.clone(),
        delta,
        non_elementary: config.non_elementary(),
        record_density,
        late_record_fraction: late,
        tracking_medians: tracking_windows(reports, config.steps),
        limit_converged_fraction: converged,
        frame_slope: empirical_slope(&thick),
        thick_pairs: thick.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn golden_map() -> MappingClass {
        MappingClass::new(2, 1, 1, 1).unwrap()
    }

    fn single(g: MappingClass, steps: usize) -> WalkConfig {
        WalkConfig { generators: vec![g], probabilities: vec![1.0], basepoint: TorusPoint { re: 0.0, im: 1.0 }, epsilon: 0.5, steps, seed: 1 }
    }

    fn golden_log() -> f64 {
        ((3.0 + 5f64.sqrt()) / 2.0).ln()
    }

    #[test]
    fn parabolic_orbit() {
        let path = sample_path(&single(MappingClass::T, 5)).unwrap();
        let pts = path.points(4).unwrap();
        for (k, p) in pts.iter().enumerate() {
            assert!((p.re - k as f64).abs() < 1e-15 && (p.im - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn parabolic_cocycle_closed_form() {
        let t = cocycle(&sample_path(&single(MappingClass::T, 300)).unwrap());
        assert_eq!(t.a[0], 0.0);
        for n in 1..=300 {
            let want = 0.5 * (1.0 + (n * n) as f64 / 2.0).acosh();
            assert!((t.a[n] - want).abs() < 1e-12 * want.max(1.0), "{n}");
        }
    }

    #[test]
    fn hyperbolic_walk_drift() {
        let t = cocycle(&sample_path(&single(golden_map(), 2000)).unwrap());
        for n in [1, 10, 500, 2000] {
            assert!((t.a[n] / n as f64 - golden_log()).abs() < 1e-12);
        }
        let est = estimate_drift(&single(golden_map(), 1), 2, 1000).unwrap();
        assert!((est.a_hat - golden_log()).abs() < 1e-9);
    }

    #[test]
    fn seeds_reproduce() {
        let cfg = WalkConfig::modular(TorusPoint { re: 0.0, im: 1.0 }, 0.5, 200, 42);
        assert_eq!(sample_path(&cfg).unwrap(), sample_path(&cfg).unwrap());
        let other = WalkConfig { seed: 43, ..cfg.clone() };
        assert_ne!(sample_path(&cfg).unwrap().omega, sample_path(&other).unwrap().omega);
        assert_ne!(sample_path_indexed(&cfg, 0).unwrap().omega, sample_path_indexed(&cfg, 1).unwrap().omega);
    }

    #[test]
    fn config_validation() {
        let mut cfg = WalkConfig::modular(TorusPoint { re: 0.0, im: 1.0 }, 0.5, 10, 0);
        assert!(cfg.validate().is_ok());
        cfg.probabilities[0] = 0.5;
        assert!(matches!(cfg.validate(), Err(WalkError::ProbabilitySum(_))));
        let thin = WalkConfig { basepoint: TorusPoint { re: 0.0, im: 10.0 }, ..WalkConfig::modular(TorusPoint { re: 0.0, im: 1.0 }, 0.5, 10, 0) };
        assert!(matches!(thin.validate(), Err(WalkError::NotThick(..))));
    }

    #[test]
    fn elementarity() {
        assert!(!non_elementary(&[MappingClass::T]));
        assert!(!non_elementary(&[golden_map()]));
        assert!(non_elementary(&[MappingClass::T, MappingClass::T_INV, MappingClass::S]));
        assert!(!non_elementary(&[golden_map(), MappingClass::S]));
        assert!(non_elementary(&[golden_map(), MappingClass::T]));
    }

    #[test]
    fn subadditive_and_shift_consistent() {
        let cfg = WalkConfig::modular(TorusPoint { re: 0.3, im: 1.2 }, 0.5, 400, 5);
        let path = sample_path(&cfg).unwrap();
        let t = cocycle(&path);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        use rand::Rng;
        for _ in 0..1000 {
            let m = rng.gen_range(0..=400);
            let n = rng.gen_range(0..=400 - m);
            let s = t.shifted(m, n).unwrap();
            assert!(t.a[m + n] <= s + t.a[m] + 1e-12 * (1.0 + t.a[m + n]));
        }
        for (m, n) in [(0, 5), (3, 7), (10, 12), (20, 15)] {
            let direct = torus_teich::teich_distance(&path.point(m).unwrap(), &path.point(m + n).unwrap());
            assert!((direct - t.shifted(m, n).unwrap()).abs() < 1e-10);
        }
        let back = t.distances_to(50);
        for k in [0, 13, 49] {
            assert!((back[k] - t.shifted(k, 50 - k).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn limit_points() {
        let lp = limit_point(&sample_path(&single(golden_map(), 60)).unwrap());
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!(matches!(lp.xi, Boundary::Finite(x) if (x - phi).abs() < 1e-15));
        assert!(lp.converged);
        let lp = limit_point(&sample_path(&single(MappingClass::T, 60)).unwrap());
        assert_eq!(lp.xi, Boundary::Infinity);
        assert_eq!(lp.diagnostic, 0.0);
    }

    #[test]
    fn records_equality_case() {
        struct Line(usize);
        impl DistanceTable for Line {
            fn n_max(&self) -> usize {
                self.0
            }
            fn a(&self, n: usize) -> f64 {
                0.5 * n as f64
            }
            fn distances_to(&self, n: usize) -> Vec<f64> {
                (0..=n).map(|k| 0.5 * (n - k) as f64).collect()
            }
        }
        let r = detect_records(&Line(100), 0.5, 0.1).unwrap();
        assert_eq!(r.len(), 100);
        assert!(r.iter().all(|x| x.first == 1));
        assert!(detect_records(&Line(5), 0.5, 0.5).is_err());
    }

    #[test]
    fn axis_walk_tracks_exactly() {
        let path = sample_path(&single(golden_map(), 10_000)).unwrap();
        let t = cocycle(&path);
        let g = LimitGeodesic::new(&path);
        let tr = tracking_statistic(&t, &g, golden_log(), 0.5).unwrap();
        assert!(tr.unmasked[10_000] < 1e-3);
        // The ray aims at the rational point g^N(∞), which leaves the axis only
        // in the last few steps.
        assert!(tr.unmasked[1..9000].iter().all(|&s| s < 1e-12));
    }

    #[test]
    fn axis_walk_frames_are_flat() {
        let t = cocycle(&sample_path(&single(golden_map(), 300)).unwrap());
        let pairs = thin_frame_pairs(&t, golden_log(), 0.2, None, &PairOptions { stride: 10, epsilon: 0.5 }).unwrap();
        assert!(!pairs.is_empty());
        for p in &pairs {
            assert!(p.defect_ratio.abs() < 1e-9 && p.frame.d < 1e-4, "{p:?}");
        }
    }

    #[test]
    fn comparison_distance_matches_frame_geometry() {
        let cfg = WalkConfig::modular(TorusPoint { re: 0.0, im: 1.0 }, 0.5, 600, 3);
        let t = cocycle(&sample_path(&cfg).unwrap());
        let a = t.a[600] / 600.0;
        let pairs = thin_frame_pairs(&t, a, a / 4.0, None, &PairOptions { stride: 20, epsilon: 0.5 }).unwrap();
        assert!(!pairs.is_empty());
        let base = cfg.basepoint.tau();
        for p in pairs.iter().filter(|p| p.thick.is_some()) {
            let inv = t.head(p.n).inverse();
            let pt = inv.apply(base);
            let mut w = ScaledMat::IDENTITY;
            for k in p.n..p.m {
                w.mul_right(t.step(k));
            }
            let (minus, plus) = line_through(pt, w.apply(base)).unwrap();
            let lf = LineFrame::new(base, minus, plus).unwrap();
            let d = lf.distance(lf.start_offset(pt, 2.0 * p.frame.a) + 2.0 * p.frame.a);
            assert!((d - p.frame.d).abs() < 1e-6 * (1.0 + d), "{d} vs {}", p.frame.d);
        }
    }

    #[test]
    fn line_through_orientation() {
        let p = Complex64::new(-1.0, 0.01);
        let q = Complex64::new(1.0, 0.01);
        let (m, pl) = line_through(p, q).unwrap();
        assert!(matches!((m, pl), (Boundary::Finite(a), Boundary::Finite(b)) if a < -1.0 && b > 1.0));
        let (m, pl) = line_through(Complex64::new(0.0, 1.0), Complex64::new(0.0, 2.0)).unwrap();
        assert_eq!((m, pl), (Boundary::Finite(0.0), Boundary::Infinity));
    }
}
