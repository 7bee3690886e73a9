//! Counter-based Brownian increment streams with dyadic bridge refinement.
//!
//! Every increment is a pure function of `(seed, mode, level, index)`, so the
//! same Wiener path can be consumed by solvers running at different step
//! sizes and by workers evaluating steps in any order. Level 0 covers the
//! base grid of width `base_dt`; level `m` halves the width `m` times. The
//! two children of an interval are generated by the Brownian bridge
//!
//! ```text
//! ΔW_left  = ΔW_parent/2 + ξ,   ΔW_right = ΔW_parent/2 − ξ,
//! ξ ~ N(0, dt_child/2),
//! ```
//!
//! so refined increments sum exactly to their parent and partial sums at
//! coarse points are preserved bit for bit.

use crate::error::{Error, Result};
use crate::util::{mix64, unit_open};

/// A seeded family of `K` independent Brownian increment streams on a dyadic
/// time grid.
#[derive(Clone, Copy, Debug)]
pub struct WienerPath {
    seed: u64,
    base_dt: f64,
    modes: usize,
}

impl WienerPath {
    pub fn new(seed: u64, base_dt: f64, modes: usize) -> Result<Self> {
        if !(base_dt.is_finite() && base_dt > 0.0) {
            return Err(Error::Config(format!("base_dt must be positive, got {base_dt}")));
        }
        Ok(Self {
            seed,
            base_dt,
            modes,
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn base_dt(&self) -> f64 {
        self.base_dt
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Step width at refinement `level`.
    pub fn dt_at(&self, level: u32) -> f64 {
        self.base_dt / (1u64 << level) as f64
    }

    /// Standard normal keyed on `(seed, k, tag, index)`.
    fn gauss(&self, k: usize, tag: u64, index: u64) -> f64 {
        let mut h = self.seed;
        h = mix64(h, 0x5743_5052); // stream domain
        h = mix64(h, k as u64);
        h = mix64(h, tag);
        h = mix64(h, index);
        let u1 = unit_open(h);
        let u2 = unit_open(mix64(h, 0x1));
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Brownian increment of mode `k` over the `index`-th interval of the
    /// level-`level` grid, i.e. over
    /// `[index · base_dt/2^level, (index+1) · base_dt/2^level)`.
    pub fn increment(&self, k: usize, level: u32, index: u64) -> f64 {
        assert!(k < self.modes, "mode {k} out of range (path has {})", self.modes);
        if level == 0 {
            return self.base_dt.sqrt() * self.gauss(k, 0, index);
        }
        let parent = self.increment(k, level - 1, index / 2);
        let dt = self.dt_at(level);
        let xi = (dt / 2.0).sqrt() * self.gauss(k, level as u64, index / 2);
        if index % 2 == 0 {
            parent / 2.0 + xi
        } else {
            parent / 2.0 - xi
        }
    }

    /// Increments of every mode over one interval.
    pub fn increments(&self, level: u32, index: u64) -> Vec<f64> {
        (0..self.modes).map(|k| self.increment(k, level, index)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::util::Kahan;

    #[test]
    fn deterministic_and_order_independent() {
        let p = WienerPath::new(42, 0.01, 4).unwrap();
        let a: Vec<f64> = (0..100).map(|i| p.increment(2, 0, i)).collect();
        let b: Vec<f64> = (0..100).rev().map(|i| p.increment(2, 0, i)).collect();
        for (i, x) in a.iter().enumerate() {
            assert_eq!(x.to_bits(), b[99 - i].to_bits());
        }
        let q = WienerPath::new(42, 0.01, 4).unwrap();
        assert_eq!(p.increment(1, 3, 17).to_bits(), q.increment(1, 3, 17).to_bits());
        // Different seeds decorrelate.
        let r = WienerPath::new(43, 0.01, 4).unwrap();
        assert_ne!(p.increment(0, 0, 0).to_bits(), r.increment(0, 0, 0).to_bits());
    }

    #[test]
    fn bridge_children_sum_to_parent() {
        // left = p/2 + ξ and right = p/2 − ξ sum to the parent up to one
        // rounding in each addition.
        let p = WienerPath::new(7, 0.125, 3).unwrap();
        for level in 0..6u32 {
            for index in 0..64u64 {
                let parent = p.increment(1, level, index);
                let left = p.increment(1, level + 1, 2 * index);
                let right = p.increment(1, level + 1, 2 * index + 1);
                let err = (left + right - parent).abs();
                let scale = parent.abs().max(left.abs()).max(right.abs()).max(1e-300);
                assert!(err <= 4.0 * f64::EPSILON * scale, "err={err} scale={scale}");
            }
        }
    }

    #[test]
    fn refined_partial_sums_reproduce_coarse_path() {
        let p = WienerPath::new(99, 0.25, 2).unwrap();
        // Partial sums at coarse points from level 3 increments.
        for coarse in 0..16u64 {
            let direct: f64 = (0..=coarse).map(|i| p.increment(0, 0, i)).sum();
            let mut acc = Kahan::new();
            for j in 0..(coarse + 1) * 8 {
                acc.add(p.increment(0, 3, j));
            }
            assert!((direct - acc.value()).abs() < 1e-12, "coarse={coarse}");
        }
    }

    #[test]
    fn increment_variance_matches_dt() {
        let dt = 0.02;
        let p = WienerPath::new(5, dt, 1).unwrap();
        let n = 100_000u64;
        let mut sum = Kahan::new();
        let mut sq = Kahan::new();
        for i in 0..n {
            let z = p.increment(0, 0, i);
            sum.add(z);
            sq.add(z * z);
        }
        let mean = sum.value() / n as f64;
        let var = sq.value() / n as f64 - mean * mean;
        // Sample variance of N(0, dt): sd ≈ dt·sqrt(2/n).
        let se = dt * (2.0 / n as f64).sqrt();
        assert!((var - dt).abs() <= 3.0 * se, "var={var} dt={dt} se={se}");
        let mean_se = (dt / n as f64).sqrt();
        assert!(mean.abs() <= 3.0 * mean_se, "mean={mean}");
    }

    #[test]
    fn quadratic_variation_over_unit_interval() {
        let steps = 10_000u64;
        let dt = 1.0 / steps as f64;
        let p = WienerPath::new(31, dt, 1).unwrap();
        let mut qv = Kahan::new();
        for i in 0..steps {
            let z = p.increment(0, 0, i);
            qv.add(z * z);
        }
        // QV of Brownian motion over [0,1] is 1; sd ≈ sqrt(2/steps).
        let se = (2.0 / steps as f64).sqrt();
        assert!((qv.value() - 1.0).abs() <= 3.0 * se, "qv={}", qv.value());
    }

    #[test]
    fn bridge_variance_at_fine_level() {
        // Level-2 increments must have variance base_dt/4.
        let base_dt = 0.1;
        let p = WienerPath::new(8, base_dt, 1).unwrap();
        let n = 50_000u64;
        let mut sq = Kahan::new();
        for i in 0..n {
            let z = p.increment(0, 2, i);
            sq.add(z * z);
        }
        let var = sq.value() / n as f64;
        let expect = base_dt / 4.0;
        let se = expect * (2.0 / n as f64).sqrt();
        assert!((var - expect).abs() <= 4.0 * se, "var={var} expect={expect}");
    }

    #[test]
    fn modes_are_uncorrelated() {
        let p = WienerPath::new(12, 0.01, 2).unwrap();
        let n = 100_000u64;
        let mut dot = Kahan::new();
        for i in 0..n {
            dot.add(p.increment(0, 0, i) * p.increment(1, 0, i));
        }
        let corr = dot.value() / (n as f64 * 0.01);
        assert!(corr.abs() < 0.02, "corr={corr}");
    }

    #[test]
    fn rejects_bad_base_dt() {
        assert!(WienerPath::new(1, 0.0, 1).is_err());
        assert!(WienerPath::new(1, f64::NAN, 1).is_err());
    }
}
