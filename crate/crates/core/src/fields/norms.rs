//! Discrete `L²`, `W^{s,2}` and `W^{1,∞}` norms.
//!
//! The Sobolev norm is evaluated in frequency space,
//! `‖v‖_{s,2}² = Σ_ξ (1 + |ξ|²)^s |v̂(ξ)|²`, over the discrete torus
//! frequencies `ξ ∈ (2π/L)·{−N/2, …, N/2−1}^dim`, normalized so that `s = 0`
//! reproduces the Δx-weighted quadrature `L²` norm (Parseval).

use crate::error::Result;
use crate::fields::spectral;
use crate::fields::{Grid, ScalarField, VectorField};
use crate::util::Kahan;

/// Quadrature `L²` norm: `(Δx^dim Σ v²)^{1/2}`.
pub fn l2_norm(field: &ScalarField) -> f64 {
    let mut acc = Kahan::new();
    for &x in field.data() {
        acc.add(x * x);
    }
    (field.grid().cell_volume() * acc.value()).sqrt()
}

pub fn l2_norm_vec(v: &VectorField) -> f64 {
    let mut sq = 0.0;
    for c in v.components() {
        let n = l2_norm(c);
        sq += n * n;
    }
    sq.sqrt()
}

/// Sup norm over the nodes.
pub fn sup_norm(field: &ScalarField) -> f64 {
    field.data().iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn sobolev_sq(field: &ScalarField, s: f64) -> Result<f64> {
    field.ensure_valid()?;
    let grid = field.grid();
    let spec = spectral::forward(grid, field.data());
    // Parseval: Δx^dim Σ_m v_m² = (Δx^dim / N^dim) Σ_j |v̂_j|².
    let weight = grid.cell_volume() / grid.node_count() as f64;
    let mut acc = Kahan::new();
    for (idx, z) in spec.iter().enumerate() {
        let mut k2 = 0.0;
        for axis in 0..grid.dim() {
            let n = grid.points_per_axis();
            let j = match (grid.dim(), axis) {
                (1, _) => idx,
                (_, 0) => idx % n,
                _ => idx / n,
            };
            let xi = grid.wavenumber(j);
            k2 += xi * xi;
        }
        acc.add((1.0 + k2).powf(s) * z.norm_sqr());
    }
    Ok(weight * acc.value())
}

/// Sobolev `W^{s,2}` norm of a scalar field, `s ≥ 0`.
pub fn sobolev_norm(field: &ScalarField, s: f64) -> Result<f64> {
    assert!(s >= 0.0, "Sobolev order must be nonnegative");
    Ok(sobolev_sq(field, s)?.sqrt())
}

/// Sobolev norm of a vector field (root of the component sum of squares).
pub fn sobolev_norm_vec(v: &VectorField, s: f64) -> Result<f64> {
    assert!(s >= 0.0, "Sobolev order must be nonnegative");
    let mut sq = 0.0;
    for c in v.components() {
        sq += sobolev_sq(c, s)?;
    }
    Ok(sq.sqrt())
}

/// Discrete `W^{1,∞}` norm used by the blow-up detector:
/// `max(‖u‖_∞, max_{i,j} ‖∂_j u_i‖_∞)` with spectral derivatives.
pub fn lipschitz_norm(u: &VectorField) -> Result<f64> {
    u.ensure_valid()?;
    let mut m = 0.0f64;
    for c in u.components() {
        m = m.max(sup_norm(c));
    }
    for d in spectral::jacobian(u)? {
        m = m.max(sup_norm(&d));
    }
    Ok(m)
}

/// Norm bundle recorded by the stepper for the pair `(r − r̄, u)`.
#[derive(Clone, Copy, Debug)]
pub struct NormReport {
    /// Quadrature `L²` norm of the pair.
    pub l2: f64,
    /// `W^{s,2}` norm of the pair.
    pub sobolev: f64,
    /// The order `s` the Sobolev entry was evaluated at.
    pub sobolev_order: f64,
    /// `W^{1,∞}` norm of the velocity.
    pub lipschitz: f64,
}

impl NormReport {
    /// Build the report for the sound-variable deviation `r − r̄` paired with
    /// the velocity `u`.
    pub fn for_pair(r_hat: &ScalarField, u: &VectorField, s: f64) -> Result<Self> {
        let l2 = {
            let a = l2_norm(r_hat);
            let b = l2_norm_vec(u);
            (a * a + b * b).sqrt()
        };
        let sob = {
            let a = sobolev_sq(r_hat, s)?;
            let mut sq = a;
            for c in u.components() {
                sq += sobolev_sq(c, s)?;
            }
            sq.sqrt()
        };
        Ok(Self {
            l2,
            sobolev: sob,
            sobolev_order: s,
            lipschitz: lipschitz_norm(u)?,
        })
    }
}

/// Random real band-limited field with modes up to `kmax`; test helper used
/// by the self-test suite as well.
pub fn random_band_limited(grid: Grid, kmax: usize, seed: u64) -> ScalarField {
    let mut rng = crate::util::SmallRng::new(seed);
    let mut f = ScalarField::zeros(grid);
    let tau = std::f64::consts::TAU;
    let l = grid.length();
    match grid.dim() {
        1 => {
            for k in 0..=kmax {
                let (a, b) = (rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
                let kk = tau * k as f64 / l;
                for idx in 0..grid.node_count() {
                    let x = grid.coords(idx)[0];
                    f.data_mut()[idx] += a * (kk * x).cos() + b * (kk * x).sin();
                }
            }
        }
        _ => {
            for kx in 0..=kmax {
                for ky in 0..=kmax {
                    let (a, b) = (rng.range(-1.0, 1.0), rng.range(-1.0, 1.0));
                    let (kkx, kky) = (tau * kx as f64 / l, tau * ky as f64 / l);
                    for idx in 0..grid.node_count() {
                        let p = grid.coords(idx);
                        let phase = kkx * p[0] + kky * p[1];
                        f.data_mut()[idx] += a * phase.cos() + b * phase.sin();
                    }
                }
            }
        }
    }
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn grid1(n: usize) -> Grid {
        Grid::new(1, n, TAU).unwrap()
    }

    #[test]
    fn constant_field_norm_is_c_sqrt_volume() {
        let g = grid1(64);
        let f = ScalarField::constant(g, 2.5);
        for s in [0.0, 1.0, 3.5] {
            let n = sobolev_norm(&f, s).unwrap();
            assert!((n - 2.5 * TAU.sqrt()).abs() < 1e-12, "s={s}, n={n}");
        }
    }

    #[test]
    fn sin_l2_norm_is_sqrt_pi() {
        let g = grid1(64);
        let f = ScalarField::from_fn(g, |x| x[0].sin());
        let n = sobolev_norm(&f, 0.0).unwrap();
        assert!((n - PI.sqrt()).abs() < 1e-12);
        assert!((l2_norm(&f) - PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn sin_h1_norm_matches_quadrature_oracle() {
        // Independent oracle: direct quadrature of ‖v‖² + ‖v'‖² with the
        // analytic derivative.
        let g = grid1(64);
        let f = ScalarField::from_fn(g, |x| x[0].sin());
        let dx = g.spacing();
        let mut oracle = 0.0;
        for idx in 0..g.node_count() {
            let x = g.coords(idx)[0];
            oracle += (x.sin().powi(2) + x.cos().powi(2)) * dx;
        }
        let n = sobolev_norm(&f, 1.0).unwrap();
        assert!((n - oracle.sqrt()).abs() < 1e-8);
        assert!((n - TAU.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn lipschitz_examples() {
        let g = grid1(128);
        let zero = VectorField::zeros(g);
        assert_eq!(lipschitz_norm(&zero).unwrap(), 0.0);

        let u = VectorField::from_fn(g, |_, x| 0.5 * x[0].sin());
        let n = lipschitz_norm(&u).unwrap();
        assert!((n - 0.5).abs() < 1e-10, "n={n}");

        // sup|d/dx sin(3x)| = 3, checked against dense sampling of the
        // analytic derivative.
        let u3 = VectorField::from_fn(g, |_, x| (3.0 * x[0]).sin());
        let dense_max = (0..100_000)
            .map(|i| 3.0 * (3.0 * (i as f64 * TAU / 1e5)).cos())
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let n3 = lipschitz_norm(&u3).unwrap();
        assert!((n3 - dense_max).abs() < 1e-9, "n3={n3} dense={dense_max}");
        assert!((n3 - 3.0).abs() < 1e-9);
    }

    #[test]
    fn norm_report_parseval_consistency() {
        let g = grid1(64);
        let r = random_band_limited(g, 10, 42);
        let u = VectorField::from_components(vec![random_band_limited(g, 10, 43)]).unwrap();
        let rep = NormReport::for_pair(&r, &u, 0.0).unwrap();
        assert!((rep.sobolev - rep.l2).abs() <= 1e-10 * (1.0 + rep.l2));
    }

    #[test]
    fn invalid_field_is_rejected() {
        let g = grid1(16);
        let mut f = ScalarField::zeros(g);
        f.data_mut()[5] = f64::NAN;
        assert!(sobolev_norm(&f, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn parseval_on_random_band_limited(seed in 0u64..500) {
            let g = grid1(64);
            let f = random_band_limited(g, 12, seed);
            let spectral = sobolev_norm(&f, 0.0).unwrap();
            let quad = l2_norm(&f);
            prop_assert!((spectral - quad).abs() <= 1e-10 * (1.0 + quad));
        }

        #[test]
        fn sobolev_monotone_in_order(seed in 0u64..200, s1 in 0.0f64..3.0, ds in 0.0f64..3.0) {
            let g = grid1(32);
            let f = random_band_limited(g, 8, seed);
            let lo = sobolev_norm(&f, s1).unwrap();
            let hi = sobolev_norm(&f, s1 + ds).unwrap();
            prop_assert!(lo <= hi * (1.0 + 1e-12));
        }

        #[test]
        fn lipschitz_scales_homogeneously(seed in 0u64..200, alpha in -4.0f64..4.0) {
            let g = grid1(32);
            let base = random_band_limited(g, 6, seed);
            let u = VectorField::from_components(vec![base.clone()]).unwrap();
            let scaled = VectorField::from_components(vec![base.map(|x| alpha * x)]).unwrap();
            let a = lipschitz_norm(&u).unwrap();
            let b = lipschitz_norm(&scaled).unwrap();
            prop_assert!((b - alpha.abs() * a).abs() <= 1e-10 * (1.0 + b));
        }
    }
}
