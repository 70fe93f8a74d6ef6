//! Interval exchanges, first returns of suspensions, Keane checks and tall
//! subsections.
//!
//! An exchange on `[0, Σλ)` cuts the domain into intervals `I_1, …, I_k` of
//! lengths `λ_i` and lays them back down in the order given by the
//! permutation: `perm[i]` is the position of `I_i` after the map.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use twofloat::TwoFloat;

use crate::numeric::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IetError {
    #[error("non-positive length at position {0}")]
    NonPositiveLength(usize),
    #[error("invalid permutation")]
    InvalidPermutation,
    #[error("non-positive height at position {0}")]
    NonPositiveHeight(usize),
    #[error("not minimal")]
    NotMinimal,
    #[error("H must be positive")]
    NonPositiveTarget,
    #[error("subsection length must lie in (0, {0}]")]
    SectionOutOfRange(f64),
    #[error("first return did not close after {0} steps")]
    NoReturn(usize),
    #[error("a point of the orbit lies on a discontinuity")]
    DiscontinuityHit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntervalExchange<S = f64> {
    lengths: Vec<S>,
    perm: Vec<usize>,
    starts: Vec<S>,
    shifts: Vec<S>,
    total: S,
    /// Total length before normalization, or 1 when never rescaled.
    pub scale: f64,
}

/// Builds a normalized exchange of total length 1 from lengths and a
/// 1-based permutation.
pub fn build_iet<S: Scalar>(lengths: Vec<S>, permutation: &[usize]) -> Result<IntervalExchange<S>, IetError> {
    let zero_based: Vec<usize> = permutation.iter().map(|&p| p.wrapping_sub(1)).collect();
    let raw = IntervalExchange::new(lengths, zero_based)?;
    let total = raw.total.clone();
    let lengths = raw.lengths.iter().map(|l| l.clone() / total.clone()).collect();
    let mut iet = IntervalExchange::new(lengths, raw.perm)?;
    iet.scale = total.to_f64();
    Ok(iet)
}

impl<S: Scalar> IntervalExchange<S> {
    /// Unnormalized exchange with a 0-based permutation.
    pub fn new(lengths: Vec<S>, perm: Vec<usize>) -> Result<IntervalExchange<S>, IetError> {
        let k = lengths.len();
        if k == 0 || perm.len() != k {
            return Err(IetError::InvalidPermutation);
        }
        let mut seen = vec![false; k];
        for &p in &perm {
            if p >= k || seen[p] {
                return Err(IetError::InvalidPermutation);
            }
            seen[p] = true;
        }
        for (i, l) in lengths.iter().enumerate() {
            if l.sign_tol(0.0) <= 0 {
                return Err(IetError::NonPositiveLength(i));
            }
        }
        let mut starts = Vec::with_capacity(k);
        let mut acc = S::zero();
        for l in &lengths {
            starts.push(acc.clone());
            acc = acc + l.clone();
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by_key(|&i| perm[i]);
        let mut image_start = vec![S::zero(); k];
        let mut acc2 = S::zero();
        for &i in &order {
            image_start[i] = acc2.clone();
            acc2 = acc2 + lengths[i].clone();
        }
        let shifts = (0..k).map(|i| image_start[i].clone() - starts[i].clone()).collect();
        Ok(IntervalExchange { lengths, perm, starts, shifts, total: acc, scale: 1.0 })
    }

    pub fn len(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn lengths(&self) -> &[S] {
        &self.lengths
    }

    /// 1-based permutation.
    pub fn permutation(&self) -> Vec<usize> {
        self.perm.iter().map(|p| p + 1).collect()
    }

    pub fn total(&self) -> &S {
        &self.total
    }

    pub fn starts(&self) -> &[S] {
        &self.starts
    }

    pub fn shifts(&self) -> &[S] {
        &self.shifts
    }

    /// Interior discontinuities `β_2, …, β_k`.
    pub fn discontinuities(&self) -> &[S] {
        &self.starts[1..]
    }

    /// Index of the interval containing `x`.
    pub fn locate(&self, x: &S) -> usize {
        // Last start ≤ x; starts are sorted.
        let mut lo = 0;
        let mut hi = self.starts.len();
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.starts[mid] <= *x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Whether `x` sits on an interior discontinuity (within the scalar's
    /// tolerance).
    pub fn on_discontinuity(&self, x: &S) -> Option<usize> {
        let i = self.locate(x);
        if i > 0 && x.near(&self.starts[i]) {
            return Some(i);
        }
        if i + 1 < self.starts.len() && x.near(&self.starts[i + 1]) {
            return Some(i + 1);
        }
        None
    }

    pub fn apply(&self, x: &S) -> S {
        let i = self.locate(x);
        x.clone() + self.shifts[i].clone()
    }

    /// Image of `x` together with the interval index used.
    pub fn step(&self, x: &S) -> (S, usize) {
        let i = self.locate(x);
        (x.clone() + self.shifts[i].clone(), i)
    }

    pub fn to_f64(&self) -> IntervalExchange<f64> {
        let mut r = IntervalExchange::new(self.lengths.iter().map(|l| l.to_f64()).collect(), self.perm.clone())
            .expect("valid exchange stays valid");
        r.scale = self.scale;
        r
    }

    pub fn to_json(&self) -> IetJson {
        IetJson { lengths: self.lengths.iter().map(|l| l.to_f64()).collect(), permutation: self.permutation() }
    }
}

/// The serialized form `{lengths, permutation}` with a 1-based permutation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IetJson {
    pub lengths: Vec<f64>,
    pub permutation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orbit<S> {
    pub points: Vec<S>,
    /// Steps `m` with `T^m(x)` on a discontinuity.
    pub hits: Vec<usize>,
    /// First `m ≥ 1` with `T^m(x) = x`, if seen.
    pub period: Option<usize>,
}

/// The forward orbit `x, T(x), …, T^n(x)`.
pub fn orbit<S: Scalar>(iet: &IntervalExchange<S>, x: &S, n: usize) -> Orbit<S> {
    let mut points = Vec::with_capacity(n + 1);
    let mut hits = Vec::new();
    let mut period = None;
    let mut y = x.clone();
    for m in 0..=n {
        if iet.on_discontinuity(&y).is_some() {
            hits.push(m);
        }
        if m > 0 && period.is_none() && y.near(x) {
            period = Some(m);
        }
        points.push(y.clone());
        if m < n {
            y = iet.apply(&y);
        }
    }
    Orbit { points, hits, period }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum KeaneResult {
    MinimalUpToDepth { depth: usize },
    Periodic { period: usize },
    /// A discontinuity reaches another discontinuity without closing up.
    Inconclusive { connection_step: usize },
}

/// Follows every interior discontinuity for up to `depth` steps.
pub fn keane_check<S: Scalar>(iet: &IntervalExchange<S>, depth: usize) -> KeaneResult {
    let depth = depth.max(1);
    let mut connection = None;
    let mut best_period: Option<usize> = None;
    for (j, beta) in iet.discontinuities().iter().enumerate() {
        let mut y = beta.clone();
        for m in 1..=depth {
            y = iet.apply(&y);
            if let Some(hit) = iet.on_discontinuity(&y) {
                if hit == j + 1 {
                    best_period = Some(best_period.map_or(m, |p| p.max(m)));
                    break;
                }
                connection.get_or_insert(m);
            }
            // The left end 0 closing up also closes the orbit.
            if y.near(beta) {
                best_period = Some(best_period.map_or(m, |p| p.max(m)));
                break;
            }
        }
    }
    if iet.len() == 1 {
        return KeaneResult::Periodic { period: 1 };
    }
    match (best_period, connection) {
        (Some(period), _) => KeaneResult::Periodic { period },
        (None, Some(connection_step)) => KeaneResult::Inconclusive { connection_step },
        (None, None) => KeaneResult::MinimalUpToDepth { depth },
    }
}

/// A suspension of an exchange: the interval `I_i` carries a rectangle of
/// height `heights[i]` whose top is glued to the image `T(I_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Suspension<S = f64> {
    pub iet: IntervalExchange<S>,
    pub heights: Vec<S>,
}

impl<S: Scalar> Suspension<S> {
    pub fn new(iet: IntervalExchange<S>, heights: Vec<S>) -> Result<Suspension<S>, IetError> {
        if heights.len() != iet.len() {
            return Err(IetError::InvalidPermutation);
        }
        for (i, h) in heights.iter().enumerate() {
            if h.sign_tol(0.0) <= 0 {
                return Err(IetError::NonPositiveHeight(i));
            }
        }
        Ok(Suspension { iet, heights })
    }

    /// Unit heights over every interval.
    pub fn unit(iet: IntervalExchange<S>) -> Suspension<S> {
        let heights = vec![S::one(); iet.len()];
        Suspension { iet, heights }
    }

    pub fn area(&self) -> S {
        self.iet
            .lengths()
            .iter()
            .zip(&self.heights)
            .fold(S::zero(), |acc, (w, h)| acc + w.clone() * h.clone())
    }

    pub fn rectangles(&self) -> ZipperedRectangles {
        ZipperedRectangles::from_parts(&self.iet, &self.heights)
    }

    /// First return of the vertical flow to `[0, l)`.
    pub fn induce(&self, l: &S) -> Result<Suspension<S>, IetError> {
        let (iet, heights) = induce(&self.iet, &self.heights, l)?;
        Ok(Suspension { iet, heights })
    }

    /// Zippered rectangles of the first return to `[0, l)`.
    pub fn first_return(&self, l: &S) -> Result<ZipperedRectangles, IetError> {
        Ok(self.induce(l)?.rectangles())
    }
}

/// Rectangles with bases on a horizontal section, the tops reattached to the
/// section by the induced exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipperedRectangles {
    pub section_length: f64,
    pub rectangles: Vec<Rectangle>,
    /// 1-based order in which the tops land back on the section.
    pub permutation: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rectangle {
    pub base_start: f64,
    pub width: f64,
    pub height: f64,
    /// Where the top of the rectangle lands on the section.
    pub top_start: f64,
}

impl ZipperedRectangles {
    fn from_parts<S: Scalar>(iet: &IntervalExchange<S>, heights: &[S]) -> ZipperedRectangles {
        let rectangles = (0..iet.len())
            .map(|i| Rectangle {
                base_start: iet.starts()[i].to_f64(),
                width: iet.lengths()[i].to_f64(),
                height: heights[i].to_f64(),
                top_start: (iet.starts()[i].clone() + iet.shifts()[i].clone()).to_f64(),
            })
            .collect();
        ZipperedRectangles { section_length: iet.total().to_f64(), rectangles, permutation: iet.permutation() }
    }

    pub fn area(&self) -> f64 {
        self.rectangles.iter().map(|r| r.width * r.height).sum()
    }

    pub fn min_height(&self) -> f64 {
        self.rectangles.iter().map(|r| r.height).fold(f64::INFINITY, f64::min)
    }

    pub fn min_width(&self) -> f64 {
        self.rectangles.iter().map(|r| r.width).fold(f64::INFINITY, f64::min)
    }
}

const INDUCE_LIMIT: usize = 20_000_000;

struct Piece<S> {
    base: S,
    img_lo: S,
    img_hi: S,
    height: S,
}

/// First return map of `iet` (with rectangle heights) to `[0, l)`.
///
/// Each piece of the section is pushed forward interval by interval, split
/// where it straddles a discontinuity or the end of the section, until it is
/// back inside the section.
pub fn induce<S: Scalar>(
    iet: &IntervalExchange<S>,
    heights: &[S],
    l: &S,
) -> Result<(IntervalExchange<S>, Vec<S>), IetError> {
    if l.sign_tol(0.0) <= 0 || (l.clone() - iet.total().clone()).sign() > 0 {
        return Err(IetError::SectionOutOfRange(iet.total().to_f64()));
    }
    let l = if l.near(iet.total()) { iet.total().clone() } else { l.clone() };
    let mut work = vec![Piece { base: S::zero(), img_lo: S::zero(), img_hi: l.clone(), height: S::zero() }];
    let mut done: Vec<Piece<S>> = Vec::new();
    let mut steps = 0usize;
    while let Some(mut p) = work.pop() {
        loop {
            steps += 1;
            if steps > INDUCE_LIMIT {
                return Err(IetError::NoReturn(INDUCE_LIMIT));
            }
            let i = iet.locate(&p.img_lo);
            if i + 1 < iet.len() {
                let end = iet.starts()[i + 1].clone();
                if (p.img_hi.clone() - end.clone()).sign() > 0 {
                    let cut = end.clone() - p.img_lo.clone();
                    work.push(Piece {
                        base: p.base.clone() + cut,
                        img_lo: end.clone(),
                        img_hi: p.img_hi.clone(),
                        height: p.height.clone(),
                    });
                    p.img_hi = end;
                }
            }
            let s = iet.shifts()[i].clone();
            p.img_lo = p.img_lo + s.clone();
            p.img_hi = p.img_hi + s;
            p.height = p.height + heights[i].clone();
            if (p.img_lo.clone() - l.clone()).sign() >= 0 {
                continue;
            }
            if (p.img_hi.clone() - l.clone()).sign() > 0 {
                let cut = l.clone() - p.img_lo.clone();
                work.push(Piece {
                    base: p.base.clone() + cut,
                    img_lo: l.clone(),
                    img_hi: p.img_hi.clone(),
                    height: p.height.clone(),
                });
                p.img_hi = l.clone();
            }
            break;
        }
        done.push(p);
    }
    done.sort_by(|a, b| a.base.partial_cmp(&b.base).expect("comparable"));
    let mut order: Vec<usize> = (0..done.len()).collect();
    order.sort_by(|&a, &b| done[a].img_lo.partial_cmp(&done[b].img_lo).expect("comparable"));
    let mut perm = vec![0; done.len()];
    for (pos, &i) in order.iter().enumerate() {
        perm[i] = pos;
    }
    let lengths = done.iter().map(|p| p.img_hi.clone() - p.img_lo.clone()).collect();
    let hs = done.into_iter().map(|p| p.height).collect();
    Ok((IntervalExchange::new(lengths, perm)?, hs))
}

/// First return of `iet` to `[lo, hi)`, reported in coordinates where the
/// section starts at 0.
pub fn induce_on<S: Scalar>(
    iet: &IntervalExchange<S>,
    heights: &[S],
    lo: &S,
    hi: &S,
) -> Result<(IntervalExchange<S>, Vec<S>), IetError> {
    if lo.sign_tol(0.0) < 0 || (hi.clone() - lo.clone()).sign_tol(0.0) <= 0 {
        return Err(IetError::SectionOutOfRange(iet.total().to_f64()));
    }
    if lo.sign_tol(0.0) == 0 {
        return induce(iet, heights, hi);
    }
    let total = iet.total().clone();
    let wrap = |x: S| {
        if x.sign_tol(0.0) < 0 {
            x + total.clone()
        } else if (x.clone() - total.clone()).sign_tol(0.0) >= 0 {
            x - total.clone()
        } else {
            x
        }
    };
    let mut pieces: Vec<(S, S, S, S)> = Vec::new();
    for i in 0..iet.len() {
        let s = iet.starts()[i].clone();
        let e = s.clone() + iet.lengths()[i].clone();
        let sh = iet.shifts()[i].clone();
        let mut cuts = vec![s.clone(), e.clone()];
        for c in [lo.clone(), lo.clone() - sh.clone()] {
            if c > s && c < e {
                cuts.push(c);
            }
        }
        cuts.sort_by(|a, b| a.partial_cmp(b).expect("comparable"));
        for w in cuts.windows(2) {
            let len = w[1].clone() - w[0].clone();
            if len.sign() <= 0 {
                continue;
            }
            let dom = wrap(w[0].clone() - lo.clone());
            let img = wrap(w[0].clone() + sh.clone() - lo.clone());
            pieces.push((dom, img, len, heights[i].clone()));
        }
    }
    pieces.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable"));
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&a, &b| pieces[a].1.partial_cmp(&pieces[b].1).expect("comparable"));
    let mut perm = vec![0; pieces.len()];
    for (pos, &i) in order.iter().enumerate() {
        perm[i] = pos;
    }
    let lengths = pieces.iter().map(|p| p.2.clone()).collect();
    let hs: Vec<S> = pieces.into_iter().map(|p| p.3).collect();
    let g = IntervalExchange::new(lengths, perm)?;
    let l = hi.clone() - lo.clone();
    induce(&g, &hs, &l)
}

/// Settings of the tall-subsection construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TallOptions {
    pub keane_depth: usize,
    pub samples: usize,
    pub seed: u64,
    /// Factor applied to each strict upper bound.
    pub margin: f64,
}

impl Default for TallOptions {
    fn default() -> Self {
        TallOptions { keane_depth: 10_000, samples: 1000, seed: 0, margin: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallSectionCertificate {
    #[serde(rename = "H")]
    pub h: f64,
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
    #[serde(rename = "K")]
    pub k: usize,
    /// Smallest induced height, or what the flow found if it disagrees below `H`.
    pub verified_min_height: f64,
    /// Smallest rectangle height over the full section.
    pub h1: f64,
    /// Smallest height of the first return to `[0, l2)`.
    pub induced_min_height: f64,
    /// Smallest height reached by direct flow from sampled points, followed
    /// no higher than `H`.
    pub simulated_min_height: f64,
    pub samples: usize,
}

impl TallSectionCertificate {
    pub fn verified(&self) -> bool {
        self.verified_min_height >= self.h
    }
}

/// Shrinks the section so every rectangle of the first return is at least
/// `target` tall.
///
/// `l0` stays below every positive `T^i(0)`, `i ≤ K = ⌈target/h(1)⌉`;
/// `l1` and `l2` stay below the narrowest rectangle over the previous
/// subsection.
pub fn tall_section<S: Scalar>(
    susp: &Suspension<S>,
    target: f64,
    opts: &TallOptions,
) -> Result<TallSectionCertificate, IetError> {
    if !(target > 0.0) {
        return Err(IetError::NonPositiveTarget);
    }
    if matches!(keane_check(&susp.iet, opts.keane_depth), KeaneResult::Periodic { .. }) {
        return Err(IetError::NotMinimal);
    }
    let rect = susp.rectangles();
    let h1 = rect.min_height();
    let k = ((target / h1).ceil() as usize).max(1);
    let mut min_pos: Option<S> = None;
    let mut y = S::zero();
    for _ in 0..k {
        y = susp.iet.apply(&y);
        if y.sign() == 0 {
            return Err(IetError::NotMinimal);
        }
        if min_pos.as_ref().map_or(true, |m| y < *m) {
            min_pos = Some(y.clone());
        }
    }
    let margin = S::from_f64(opts.margin);
    let total = susp.iet.total().clone();
    let bound0 = min_pos.unwrap_or_else(|| total.clone());
    let l0 = {
        let c = margin.clone() * bound0;
        if c > total {
            total.clone()
        } else {
            c
        }
    };
    // Each subsection is induced from the previous first return, which is
    // the first return of the original map to the smaller interval.
    let narrowest = |iet: &IntervalExchange<S>| iet.lengths().iter().cloned().fold(iet.total().clone(), |m, w| if w < m { w } else { m });
    let (iet0, hs0) = induce(&susp.iet, &susp.heights, &l0)?;
    let l1 = margin.clone() * narrowest(&iet0);
    let (iet1, hs1) = induce(&iet0, &hs0, &l1)?;
    let l2 = margin * narrowest(&iet1);
    let (iet2, hs2) = induce(&iet1, &hs1, &l2)?;
    let induced_min = hs2.iter().map(|h| h.to_f64()).fold(f64::INFINITY, f64::min);
    // One point inside each induced interval, then random points.
    let half = S::from_f64(0.5);
    let mids: Vec<S> = iet2.starts().iter().zip(iet2.lengths()).map(|(a, w)| a.clone() + w.clone() * half.clone()).collect();
    let simulated = flow_returns(susp, &l2, target, &mids).min(simulate_returns(susp, &l2, target, opts.samples, opts.seed));
    Ok(TallSectionCertificate {
        h: target,
        l0: l0.to_f64(),
        l1: l1.to_f64(),
        l2: l2.to_f64(),
        k,
        verified_min_height: if simulated >= target { induced_min } else { induced_min.min(simulated) },
        h1,
        induced_min_height: induced_min,
        simulated_min_height: simulated,
        samples: opts.samples + mids.len(),
    })
}

/// Flows sampled points of `[0, l)` upward until they come back to `[0, l)`,
/// hit a singularity or climb to `target`.
///
/// Returns the smallest height reached. Anything at least `target` means no
/// sample came back or hit a singularity below it.
pub fn simulate_returns<S: Scalar>(susp: &Suspension<S>, l: &S, target: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let starts: Vec<S> = (0..samples).map(|_| S::from_f64(rng.gen::<f64>()) * l.clone()).collect();
    flow_returns(susp, l, target, &starts)
}

/// [`simulate_returns`] from the given starting points.
pub fn flow_returns<S: Scalar>(susp: &Suspension<S>, l: &S, target: f64, starts: &[S]) -> f64 {
    let mut min = f64::INFINITY;
    for x in starts {
        let mut y = x.clone();
        let mut h = 0.0;
        for _ in 0..INDUCE_LIMIT {
            if h >= target {
                min = min.min(h);
                break;
            }
            if susp.iet.on_discontinuity(&y).is_some() {
                min = min.min(h);
                break;
            }
            let (next, i) = susp.iet.step(&y);
            h += susp.heights[i].to_f64();
            y = next;
            if y < *l {
                min = min.min(h);
                break;
            }
        }
    }
    min
}

/// `(√5 − 1)/2` to double-double precision.
pub fn golden_twofloat() -> TwoFloat {
    let mut g = TwoFloat::from((5f64.sqrt() - 1.0) / 2.0);
    for _ in 0..2 {
        let f = g * g + g - TwoFloat::from(1.0);
        g -= f / (g * 2.0 + TwoFloat::from(1.0));
    }
    g
}

/// The rotation by `γ` as a two-interval exchange with lengths `(1 − γ, γ)`.
pub fn golden_rotation() -> IntervalExchange<TwoFloat> {
    let g = golden_twofloat();
    build_iet(vec![TwoFloat::from(1.0) - g, g], &[2, 1]).expect("valid lengths")
}

/// Rotation `x ↦ x + α mod 1` for `0 < α < 1`.
pub fn rotation<S: Scalar>(alpha: S) -> Result<IntervalExchange<S>, IetError> {
    build_iet(vec![S::one() - alpha.clone(), alpha], &[2, 1])
}
