use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::{MetricError, TriangleFrame, SLACK};

/// A candidate bounding function `f` for `d ≤ a·f(ρ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    /// `f(t) = t`, sharp for trees.
    Linear,
    /// `f(t) = √(2t)`, sharp for the plane.
    Sqrt2t,
    /// `f(t) = k·t`.
    LinearK(f64),
}

impl Bound {
    pub fn parse(s: &str) -> Result<Bound, MetricError> {
        match s {
            "linear" => Ok(Bound::Linear),
            "sqrt2t" => Ok(Bound::Sqrt2t),
            _ => s
                .strip_prefix("linear-k=")
                .and_then(|k| k.parse::<f64>().ok())
                .filter(|k| k.is_finite() && *k > 0.0)
                .map(Bound::LinearK)
                .ok_or_else(|| MetricError::UnknownBound(s.to_string())),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Bound::Linear => "linear".into(),
            Bound::Sqrt2t => "sqrt2t".into(),
            Bound::LinearK(k) => format!("linear-k={k}"),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Bound::Linear => t,
            Bound::Sqrt2t => (2.0 * t).sqrt(),
            Bound::LinearK(k) => k * t,
        }
    }

    /// Whether `frame` fails `d ≤ a·f(ρ)`. Tripod frames with exact sides are
    /// compared exactly under the linear bound.
    pub fn violated_by(&self, frame: &TriangleFrame) -> bool {
        if let (Bound::Linear, Some(e)) = (self, &frame.exact) {
            if e.a.is_zero() {
                return !e.d.is_zero();
            }
            return e.d > &e.a + &e.b - &e.c;
        }
        let rhs = frame.a * self.eval(frame.rho);
        frame.d > rhs + SLACK * frame.a.max(1.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarBin {
    pub rho_lo: f64,
    pub rho_hi: f64,
    /// `None` while the bin is empty.
    pub sup_d_over_a: Option<f64>,
    pub count: usize,
}

/// Aggregated test of one bounding function over a stream of frames.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StarReport {
    pub space: String,
    pub bound: String,
    pub samples: usize,
    pub bins: Vec<StarBin>,
    pub violations: Vec<TriangleFrame>,
    /// Largest `d − (a + b − c)` seen, reported for hyperbolic samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sup_excess: Option<f64>,
    #[serde(skip)]
    pub(crate) f: Option<Bound>,
}

impl StarReport {
    pub fn new(space: &str, bound: Bound, bins: usize) -> StarReport {
        let bins = bins.max(1);
        StarReport {
            space: space.to_string(),
            bound: bound.name(),
            samples: 0,
            bins: (0..bins)
                .map(|i| StarBin {
                    rho_lo: i as f64 / bins as f64,
                    rho_hi: (i + 1) as f64 / bins as f64,
                    sup_d_over_a: None,
                    count: 0,
                })
                .collect(),
            violations: Vec::new(),
            sup_excess: None,
            f: Some(bound),
        }
    }

    pub fn bound_fn(&self) -> Option<Bound> {
        self.f.or_else(|| Bound::parse(&self.bound).ok())
    }

    /// Adds one frame. Bin sups only ever grow.
    pub fn push(&mut self, frame: &TriangleFrame) -> Result<(), MetricError> {
        if frame.space != self.space {
            return Err(MetricError::MixedSpaces(self.space.clone(), frame.space.clone()));
        }
        self.samples += 1;
        if let Some(b) = self.bound_fn() {
            if b.violated_by(frame) {
                self.violations.push(frame.clone());
            }
        }
        if let Some(r) = frame.d_over_a() {
            let n = self.bins.len();
            let i = ((frame.rho * n as f64).floor() as usize).min(n - 1);
            let bin = &mut self.bins[i];
            bin.count += 1;
            bin.sup_d_over_a = Some(bin.sup_d_over_a.map_or(r, |s| s.max(r)));
        }
        Ok(())
    }

    pub(crate) fn track_excess(&mut self, frame: &TriangleFrame) {
        let e = frame.d - frame.defect();
        self.sup_excess = Some(self.sup_excess.map_or(e, |s| s.max(e)));
    }

    /// Empirical bounding function: `(rho_hi, sup d/a)` of each nonempty bin.
    pub fn empirical_f(&self) -> Vec<(f64, f64)> {
        self.bins.iter().filter_map(|b| b.sup_d_over_a.map(|s| (b.rho_hi, s))).collect()
    }

    /// Plot-ready CSV of the bin table.
    pub fn bins_csv(&self) -> String {
        let mut out = String::from("rho_lo,rho_hi,sup_d_over_a,count\n");
        for b in &self.bins {
            let sup = b.sup_d_over_a.map_or(String::new(), |s| format!("{s}"));
            out.push_str(&format!("{},{},{},{}\n", b.rho_lo, b.rho_hi, sup, b.count));
        }
        out
    }
}

/// Tests `d ≤ a·f(ρ)` on every frame, in input order, with ten ρ-bins.
pub fn check_star(frames: &[TriangleFrame], bound: Bound) -> Result<StarReport, MetricError> {
    check_star_binned(frames, bound, 10)
}

pub fn check_star_binned(frames: &[TriangleFrame], bound: Bound, bins: usize) -> Result<StarReport, MetricError> {
    let space = frames.first().map_or("unknown", |f| f.space.as_str());
    let mut report = StarReport::new(space, bound, bins);
    for f in frames {
        report.push(f)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_core::{euclid_d, sphere_counterexample, tripod_frame};
    use num_rational::BigRational;

    #[test]
    fn parse_bounds() {
        assert_eq!(Bound::parse("linear").unwrap(), Bound::Linear);
        assert_eq!(Bound::parse("linear-k=2.5").unwrap(), Bound::LinearK(2.5));
        assert!(Bound::parse("cubic").is_err());
        assert_eq!(Bound::parse(&Bound::LinearK(3.0).name()).unwrap(), Bound::LinearK(3.0));
    }

    #[test]
    fn mixed_spaces_rejected() {
        let a = tripod_frame(&BigRational::from_integer(3.into()), &BigRational::from_integer(1.into()), &BigRational::from_integer(2.into()))
            .unwrap();
        let b = sphere_counterexample(0.5).unwrap();
        assert!(matches!(check_star(&[a, b], Bound::Linear), Err(MetricError::MixedSpaces(..))));
    }

    #[test]
    fn sphere_violates_everything() {
        let f = sphere_counterexample(0.3).unwrap();
        for b in [Bound::Linear, Bound::Sqrt2t, Bound::LinearK(1e6)] {
            let r = check_star(std::slice::from_ref(&f), b).unwrap();
            assert_eq!(r.violations.len(), 1);
        }
    }

    #[test]
    fn b_to_c_scan_is_sharp() {
        let mut best: f64 = 0.0;
        for i in 1..=1000 {
            let b = 99.0 + i as f64 * 1e-3 * 0.999;
            let d = euclid_d(1.0, b, 100.0).unwrap();
            let rho = 1.0 + b - 100.0;
            best = best.max(d / (2.0 * rho).sqrt());
        }
        assert!(best > 0.99 && best < 1.0);
    }

    #[test]
    fn serializes_with_expected_fields() {
        let r = StarReport::new("tripod", Bound::Linear, 4);
        let v = serde_json::to_value(&r).unwrap();
        for k in ["space", "bound", "samples", "bins", "violations"] {
            assert!(v.get(k).is_some(), "{k}");
        }
        assert!(v["bins"][0].get("rho_lo").is_some());
    }
}
