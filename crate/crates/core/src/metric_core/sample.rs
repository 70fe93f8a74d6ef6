use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    frame_from_sides, frame_triangle, hyp_d_unchecked, hyp_polar_distance, tripod_frame, Bound, MetricError,
    ModelSpace, Point, StarReport, TriangleFrame,
};

/// Random triangle sampler settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub samples: usize,
    pub seed: u64,
    /// Reject triangles with a side shorter than this.
    #[serde(default)]
    pub min_side: f64,
    /// Disk radius in the plane, radial cutoff about `i` in the hyperbolic
    /// plane.
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Draws allowed per accepted sample before giving up.
    #[serde(default = "default_patience")]
    pub patience: usize,
}

fn default_radius() -> f64 {
    30.0
}

fn default_patience() -> usize {
    1000
}

impl SamplerConfig {
    pub fn new(samples: usize, seed: u64) -> SamplerConfig {
        SamplerConfig { samples, seed, min_side: 0.0, radius: default_radius(), patience: default_patience() }
    }
}

fn random_rational(rng: &mut ChaCha8Rng) -> BigRational {
    let n: i64 = rng.gen_range(0..=1000);
    let d: i64 = rng.gen_range(1..=100);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn draw(space: ModelSpace, cfg: &SamplerConfig, rng: &mut ChaCha8Rng) -> Result<TriangleFrame, MetricError> {
    match space {
        ModelSpace::Tripod => {
            let (r, s, t) = (random_rational(rng), random_rational(rng), random_rational(rng));
            tripod_frame(&r, &s, &t)
        }
        ModelSpace::Euclidean => {
            let mut p = || {
                let r = cfg.radius * rng.gen::<f64>().sqrt();
                let th = rng.gen::<f64>() * std::f64::consts::TAU;
                Point::plane(r * th.cos(), r * th.sin())
            };
            let (x, y, z) = (p(), p(), p());
            frame_triangle(x, y, z, space)
        }
        ModelSpace::Hyperbolic => {
            let mut p = || (cfg.radius * rng.gen::<f64>(), rng.gen::<f64>() * std::f64::consts::TAU);
            let (p0, p1, p2) = (p(), p(), p());
            let sides = [
                hyp_polar_distance(p0.0, p0.1, p1.0, p1.1),
                hyp_polar_distance(p0.0, p0.1, p2.0, p2.1),
                hyp_polar_distance(p1.0, p1.1, p2.0, p2.1),
            ];
            frame_from_sides(space.tag(), sides, hyp_d_unchecked)
        }
        ModelSpace::Sphere => {
            let mut p = || loop {
                let v: [f64; 3] = [rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0];
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if n > 1e-3 && n <= 1.0 {
                    break Point::Sphere { x: v[0] / n, y: v[1] / n, z: v[2] / n };
                }
            };
            let (x, y, z) = (p(), p(), p());
            frame_triangle(x, y, z, space)
        }
    }
}

/// Draws `cfg.samples` frames in `space`, deterministically from the seed.
pub fn sample_frames(space: ModelSpace, cfg: &SamplerConfig) -> Result<Vec<TriangleFrame>, MetricError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut out = Vec::with_capacity(cfg.samples);
    let budget = cfg.samples.saturating_mul(cfg.patience.max(1));
    let mut draws = 0usize;
    while out.len() < cfg.samples {
        if draws >= budget {
            return Err(MetricError::EmptySample);
        }
        draws += 1;
        let frame = match draw(space, cfg, &mut rng) {
            Ok(f) => f,
            Err(MetricError::ZeroTriangle | MetricError::AntipodalEndpoints) => continue,
            Err(e) => return Err(e),
        };
        if frame.a.min(frame.b).min(frame.c) < cfg.min_side {
            continue;
        }
        out.push(frame);
    }
    Ok(out)
}

/// Samples frames and records the empirical `f̂(ρ)` as per-bin sups of `d/a`.
pub fn estimate_bounding_function(
    space: ModelSpace,
    cfg: &SamplerConfig,
    bins: usize,
    bound: Bound,
) -> Result<StarReport, MetricError> {
    if cfg.samples == 0 {
        return Err(MetricError::EmptySample);
    }
    let frames = sample_frames(space, cfg)?;
    let mut report = StarReport::new(space.tag(), bound, bins);
    for f in &frames {
        report.push(f)?;
        if space == ModelSpace::Hyperbolic {
            report.track_excess(f);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let cfg = SamplerConfig::new(50, 7);
        for s in [ModelSpace::Tripod, ModelSpace::Euclidean, ModelSpace::Hyperbolic, ModelSpace::Sphere] {
            assert_eq!(sample_frames(s, &cfg).unwrap(), sample_frames(s, &cfg).unwrap());
        }
    }

    #[test]
    fn min_side_filter() {
        let mut cfg = SamplerConfig::new(200, 3);
        cfg.min_side = 10.0;
        for f in sample_frames(ModelSpace::Hyperbolic, &cfg).unwrap() {
            assert!(f.a >= 10.0 && f.b >= 10.0 && f.c >= 10.0);
        }
    }

    #[test]
    fn empty_sample_is_an_error() {
        let cfg = SamplerConfig::new(0, 1);
        assert_eq!(estimate_bounding_function(ModelSpace::Tripod, &cfg, 10, Bound::Linear), Err(MetricError::EmptySample));
    }

    #[test]
    fn tripod_estimate_is_identity() {
        let cfg = SamplerConfig::new(2000, 11);
        let r = estimate_bounding_function(ModelSpace::Tripod, &cfg, 10, Bound::Linear).unwrap();
        assert!(r.violations.is_empty());
        for b in &r.bins {
            if let Some(s) = b.sup_d_over_a {
                assert!(s <= b.rho_hi + 1e-15);
            }
        }
    }
}
