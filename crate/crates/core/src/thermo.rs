//! Barotropic pressure law, pressure potentials and the density ↔
//! sound-variable transform.
//!
//! The pressure law is `p(ρ) = a ρ^γ` with adiabatic exponent `γ > 1`. The
//! pressure potential
//!
//! ```text
//! H(ρ, r) = a/(γ−1) · (ρ^γ − γ r^{γ−1}(ρ − r) − r^γ)
//! ```
//!
//! is the Bregman distance generated by `P(ρ) = a/(γ−1) ρ^γ`; it vanishes only
//! at `ρ = r` and is strictly convex in `ρ`. The sound variable
//! `r(ρ) = sqrt(2aγ/(γ−1)) ρ^{(γ−1)/2}` symmetrizes the first-order system.

use crate::error::{Error, Result};
use crate::fields::ScalarField;

/// Relative vacuum threshold: densities at or below `VACUUM_REL * ρ̄` halt a
/// run, since the strong-solution regime requires strictly positive density.
pub const VACUUM_REL: f64 = 1e-8;

/// Physical constants of the Euler / Navier-Stokes systems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysParams {
    /// Adiabatic exponent, `> 1`.
    pub gamma: f64,
    /// Pressure coefficient, `> 0`.
    pub a: f64,
    /// Far-field density, `> 0`.
    pub rho_bar: f64,
    /// Shear viscosity coefficient, `≥ 0`.
    pub nu: f64,
    /// Bulk viscosity coefficient, `≥ 0`.
    pub lambda: f64,
    /// Reynolds-inverse scale multiplying the viscous stress, in `[0, 1]`.
    pub epsilon: f64,
}

impl PhysParams {
    pub fn new(gamma: f64, a: f64, rho_bar: f64, nu: f64, lambda: f64, epsilon: f64) -> Result<Self> {
        let p = Self {
            gamma,
            a,
            rho_bar,
            nu,
            lambda,
            epsilon,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.gamma > 1.0
            && self.a > 0.0
            && self.rho_bar > 0.0
            && self.nu >= 0.0
            && self.lambda >= 0.0
            && (0.0..=1.0).contains(&self.epsilon)
            && [self.gamma, self.a, self.rho_bar, self.nu, self.lambda, self.epsilon]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid physical parameters: {self:?}")))
        }
    }

    /// `p(ρ) = a ρ^γ`.
    pub fn pressure(&self, rho: f64) -> Result<f64> {
        if rho < 0.0 {
            return Err(Error::NegativeDensity);
        }
        Ok(self.a * powg(rho, self.gamma))
    }

    /// `p'(ρ) = a γ ρ^{γ−1}`.
    pub fn pressure_prime(&self, rho: f64) -> Result<f64> {
        if rho < 0.0 {
            return Err(Error::NegativeDensity);
        }
        Ok(self.a * self.gamma * powg(rho, self.gamma - 1.0))
    }

    /// Sound speed `sqrt(p'(ρ))`.
    pub fn sound_speed(&self, rho: f64) -> Result<f64> {
        Ok(self.pressure_prime(rho)?.sqrt())
    }

    /// Pressure potential `P(ρ) = a/(γ−1) ρ^γ`.
    pub fn big_p(&self, rho: f64) -> Result<f64> {
        if rho < 0.0 {
            return Err(Error::NegativeDensity);
        }
        Ok(self.a / (self.gamma - 1.0) * powg(rho, self.gamma))
    }

    /// `P'(ρ) = a γ/(γ−1) ρ^{γ−1}`.
    pub fn big_p_prime(&self, rho: f64) -> Result<f64> {
        if rho < 0.0 {
            return Err(Error::NegativeDensity);
        }
        Ok(self.a * self.gamma / (self.gamma - 1.0) * powg(rho, self.gamma - 1.0))
    }

    /// `P''(ρ) = p'(ρ)/ρ = a γ ρ^{γ−2}`.
    pub fn big_p_second(&self, rho: f64) -> Result<f64> {
        if rho < 0.0 {
            return Err(Error::NegativeDensity);
        }
        Ok(self.a * self.gamma * powg(rho, self.gamma - 2.0))
    }

    /// Pressure potential `H(ρ, r)`; nonnegative, zero only at `ρ = r`.
    pub fn h_potential(&self, rho: f64, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Config(format!("reference density must be positive, got {r}")));
        }
        if rho < 0.0 {
            return Err(Error::NegativeDensity);
        }
        let g = self.gamma;
        let h = self.a / (g - 1.0)
            * (powg(rho, g) - g * powg(r, g - 1.0) * (rho - r) - powg(r, g));
        // Convexity makes H >= 0 exactly; tiny negative round-off is clamped.
        Ok(h.max(0.0))
    }

    /// Sound variable `r(ρ) = sqrt(2aγ/(γ−1)) ρ^{(γ−1)/2}`, `ρ > 0`.
    pub fn rho_to_r(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::Vacuum);
        }
        Ok((2.0 * self.a * self.gamma / (self.gamma - 1.0)).sqrt() * powg(rho, (self.gamma - 1.0) / 2.0))
    }

    /// Inverse transform `ρ(r) = ((γ−1)/(2aγ) r²)^{1/(γ−1)}`, `r > 0`.
    pub fn r_to_rho(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::Vacuum);
        }
        Ok(powg(
            (self.gamma - 1.0) / (2.0 * self.a * self.gamma) * r * r,
            1.0 / (self.gamma - 1.0),
        ))
    }

    /// Derivative `dr/dρ = sqrt(aγ(γ−1)/2) ρ^{(γ−3)/2}`.
    pub fn rho_to_r_prime(&self, rho: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::Vacuum);
        }
        Ok((self.a * self.gamma * (self.gamma - 1.0) / 2.0).sqrt() * powg(rho, (self.gamma - 3.0) / 2.0))
    }

    /// Far-field sound variable `r̄ = r(ρ̄)`.
    pub fn r_bar(&self) -> f64 {
        self.rho_to_r(self.rho_bar).expect("rho_bar > 0 by construction")
    }

    /// Nodewise transform of a density field; errors on vacuum.
    pub fn rho_to_r_field(&self, rho: &ScalarField) -> Result<ScalarField> {
        rho.ensure_valid()?;
        let mut out = rho.clone();
        for x in out.data_mut() {
            *x = self.rho_to_r(*x)?;
        }
        Ok(out)
    }

    /// Nodewise inverse transform of a sound-variable field.
    pub fn r_to_rho_field(&self, r: &ScalarField) -> Result<ScalarField> {
        r.ensure_valid()?;
        let mut out = r.clone();
        for x in out.data_mut() {
            *x = self.r_to_rho(*x)?;
        }
        Ok(out)
    }

    /// True when the density field is at or below the vacuum guard.
    pub fn is_vacuum(&self, rho: &ScalarField) -> bool {
        rho.min() <= VACUUM_REL * self.rho_bar
    }
}

/// `x^g` via exp/log with a guard at `x = 0` (γ need not be rational).
#[inline]
fn powg(x: f64, g: f64) -> f64 {
    if x == 0.0 {
        if g > 0.0 {
            0.0
        } else if g == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        (g * x.ln()).exp()
    }
}

/// Certificate for the coercivity bound on `H(·, r)`:
/// `H(ρ, r) ≥ c_inner |ρ − r|²` on `[r/2, 2r]` and
/// `H(ρ, r) ≥ c_outer (1 + ρ^γ)` outside, both verified pointwise; `c` is the
/// joint constant `min(c_inner, c_outer)`.
#[derive(Clone, Copy, Debug)]
pub struct HBoundCertificate {
    pub c_inner: f64,
    pub c_outer: f64,
    pub c: f64,
}

/// Verify the coercivity bound pointwise on `rho_grid` and return the largest
/// constants. Fails when no positive constant exists, which would indicate an
/// implementation bug: positivity is a theorem for the convex potential.
pub fn h_lower_bound_check(params: &PhysParams, r: f64, rho_grid: &[f64]) -> Result<HBoundCertificate> {
    if !(r > 0.0) {
        return Err(Error::Config(format!("reference density must be positive, got {r}")));
    }
    // The ratio H/(ρ−r)² degenerates to 0/0 at ρ = r; points with
    // |ρ − r| < 1e-3 r are covered by the analytic limit value
    // H''(r)/2 = p'(r)/(2r) = aγ r^{γ−2}/2, which is included in the minimum.
    let mut c_inner = params.a * params.gamma * powg(r, params.gamma - 2.0) / 2.0;
    let mut c_outer = f64::INFINITY;
    for &rho in rho_grid {
        if rho < 0.0 {
            return Err(Error::NegativeDensity);
        }
        let h = params.h_potential(rho, r)?;
        if rho >= r / 2.0 && rho <= 2.0 * r {
            let d = rho - r;
            if d.abs() >= 1e-3 * r {
                c_inner = c_inner.min(h / (d * d));
            }
        } else {
            c_outer = c_outer.min(h / (1.0 + powg(rho, params.gamma)));
        }
    }
    let c = c_inner.min(c_outer);
    if c.is_finite() && c > 0.0 {
        Ok(HBoundCertificate { c_inner, c_outer, c })
    } else {
        Err(Error::Numerical(format!(
            "coercivity bound failed for gamma={}, a={}, r={r}: c={c}",
            params.gamma, params.a
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params(gamma: f64, a: f64) -> PhysParams {
        PhysParams::new(gamma, a, 1.0, 0.0, 0.0, 0.0).unwrap()
    }

    #[test]
    fn pressure_closed_forms() {
        let p = params(2.0, 1.0);
        assert_eq!(p.pressure(0.0).unwrap(), 0.0);
        assert!((p.pressure(3.0).unwrap() - 9.0).abs() < 1e-12);
        assert!((p.pressure_prime(3.0).unwrap() - 6.0).abs() < 1e-12);
        assert!(p.pressure(-0.1).is_err());
    }

    #[test]
    fn euler_pressure_identity() {
        // ρ p'(ρ) = γ p(ρ) for random ρ.
        let mut rng = crate::util::SmallRng::new(1);
        for gamma in [1.4, 5.0 / 3.0, 2.0, 3.0] {
            let p = params(gamma, 0.7);
            for _ in 0..200 {
                let rho = rng.range(1e-3, 10.0);
                let lhs = rho * p.pressure_prime(rho).unwrap();
                let rhs = gamma * p.pressure(rho).unwrap();
                assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0));
            }
        }
    }

    #[test]
    fn h_potential_examples() {
        for gamma in [1.4, 5.0 / 3.0, 2.0] {
            for a in [0.5, 1.0, 2.0] {
                let p = PhysParams::new(gamma, a, 1.0, 0.0, 0.0, 0.0).unwrap();
                assert!(p.h_potential(1.0, 1.0).unwrap().abs() < 1e-15);
                // H(0, r) = a r^γ / ... substitute ρ = 0:
                // a/(γ−1)(γ r^{γ−1} r − r^γ) = a r^γ.
                let h0 = p.h_potential(0.0, 1.0).unwrap();
                assert!((h0 - a).abs() < 1e-12, "gamma={gamma} a={a} h0={h0}");
            }
        }
        // γ = 2, a = 1: H(ρ, r) = (ρ − r)².
        let p = params(2.0, 1.0);
        assert!((p.h_potential(2.0, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(p.h_potential(1.5, -1.0).is_err());
    }

    // Independent oracle for H via its second-derivative integral
    // representation H(ρ, r) = ∫_r^ρ ∫_r^σ p'(τ)/τ dτ dσ (composite Simpson).
    fn h_oracle(p: &PhysParams, rho: f64, r: f64) -> f64 {
        let inner = |s: f64| -> f64 {
            // ∫_r^s p'(τ)/τ dτ = P'(s) − P'(r), but integrate numerically to
            // stay independent of the closed forms.
            simpson(r, s, 2000, |t| p.gamma * p.a * powg(t, p.gamma - 2.0))
        };
        simpson(r, rho, 500, inner)
    }

    fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
        let n = if n % 2 == 0 { n } else { n + 1 };
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            let w = if i % 2 == 0 { 2.0 } else { 4.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn h_matches_integral_oracle() {
        for gamma in [1.4, 5.0 / 3.0, 2.0] {
            let p = params(gamma, 1.3);
            for rho in [0.3, 0.8, 1.7, 4.0] {
                let direct = p.h_potential(rho, 1.0).unwrap();
                let oracle = h_oracle(&p, rho, 1.0);
                assert!(
                    (direct - oracle).abs() < 1e-6 * direct.max(1.0),
                    "gamma={gamma} rho={rho}: {direct} vs {oracle}"
                );
            }
        }
    }

    #[test]
    fn h_lower_bound_quadratic_case() {
        // γ = 2, a = 1: H = (ρ − r)², so the inner-branch constant is 1.
        let p = params(2.0, 1.0);
        let grid: Vec<f64> = (0..=100_000).map(|i| i as f64 * 1e-4).collect();
        let cert = h_lower_bound_check(&p, 1.0, &grid).unwrap();
        assert!((cert.c_inner - 1.0).abs() < 1e-9, "c_inner={}", cert.c_inner);
        assert!(cert.c > 0.0);
    }

    #[test]
    fn h_lower_bound_gamma_53_matches_bruteforce() {
        let p = params(5.0 / 3.0, 1.0);
        let grid: Vec<f64> = (0..=100_000).map(|i| i as f64 * 1e-4).collect();
        let cert = h_lower_bound_check(&p, 1.0, &grid).unwrap();
        assert!(cert.c > 0.0);
        // Brute-force oracle on the same grid, written out independently,
        // with the same near-diagonal handling (analytic curvature limit).
        let g = 5.0 / 3.0;
        let mut c_min = g * powg(1.0, g - 2.0) / 2.0;
        for &rho in &grid {
            let h = p.h_potential(rho, 1.0).unwrap();
            let shape = if (0.5..=2.0).contains(&rho) {
                let d = rho - 1.0;
                if d.abs() < 1e-3 {
                    continue;
                }
                d * d
            } else {
                1.0 + powg(rho, g)
            };
            c_min = c_min.min(h / shape);
        }
        assert!((cert.c - c_min).abs() <= 1e-12 * c_min.max(1.0));
    }

    #[test]
    fn h_lower_bound_full_matrix() {
        for gamma in [1.4, 5.0 / 3.0, 2.0, 3.0] {
            for a in [0.5, 1.0, 2.0] {
                for r in [0.5, 1.0, 2.0] {
                    let p = PhysParams::new(gamma, a, 1.0, 0.0, 0.0, 0.0).unwrap();
                    let grid: Vec<f64> = (0..=20_000).map(|i| i as f64 * 10.0 * r / 2e4).collect();
                    let cert = h_lower_bound_check(&p, r, &grid).unwrap();
                    assert!(cert.c > 0.0, "gamma={gamma} a={a} r={r}");
                }
            }
        }
    }

    #[test]
    fn transform_closed_forms_at_gamma_2() {
        let p = params(2.0, 1.0);
        assert!((p.rho_to_r(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((p.r_to_rho(2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((p.r_bar() - 2.0).abs() < 1e-15);
        let p4 = PhysParams::new(2.0, 1.0, 4.0, 0.0, 0.0, 0.0).unwrap();
        assert!((p4.r_bar() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn transform_gamma_14() {
        let p = params(1.4, 1.0);
        let r = p.rho_to_r(1.0).unwrap();
        assert!((r - 7.0f64.sqrt()).abs() < 1e-12, "r={r}");
    }

    #[test]
    fn transform_rejects_vacuum() {
        let p = params(1.4, 1.0);
        assert!(matches!(p.rho_to_r(0.0), Err(Error::Vacuum)));
        assert!(matches!(p.r_to_rho(-1.0), Err(Error::Vacuum)));
    }

    #[test]
    fn h_strictly_convex_by_finite_differences() {
        for gamma in [1.4, 2.0, 3.0] {
            let p = params(gamma, 1.0);
            let r = 1.0;
            let dh = 1e-4;
            let mut rho = 0.05;
            while rho <= 4.0 * r {
                let second = (p.h_potential(rho + dh, r).unwrap()
                    - 2.0 * p.h_potential(rho, r).unwrap()
                    + p.h_potential(rho - dh, r).unwrap())
                    / (dh * dh);
                assert!(second > 0.0, "gamma={gamma} rho={rho} second={second}");
                rho += 0.05;
            }
        }
    }

    proptest! {
        #[test]
        fn roundtrip_is_identity(
            rho in 1e-6f64..1e3,
            gamma in 1.05f64..4.0,
            a in 0.1f64..5.0,
        ) {
            let p = PhysParams::new(gamma, a, 1.0, 0.0, 0.0, 0.0).unwrap();
            let back = p.r_to_rho(p.rho_to_r(rho).unwrap()).unwrap();
            prop_assert!((back - rho).abs() <= 1e-12 * rho);
        }

        #[test]
        fn rho_to_r_strictly_increasing(
            lo in 1e-6f64..10.0,
            bump in 1e-6f64..10.0,
            gamma in 1.05f64..4.0,
        ) {
            let p = PhysParams::new(gamma, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
            prop_assert!(p.rho_to_r(lo + bump).unwrap() > p.rho_to_r(lo).unwrap());
        }

        #[test]
        fn h_nonnegative(rho in 0.0f64..20.0, r in 1e-3f64..5.0, gamma in 1.05f64..4.0) {
            let p = PhysParams::new(gamma, 1.0, 1.0, 0.0, 0.0, 0.0).unwrap();
            prop_assert!(p.h_potential(rho, r).unwrap() >= 0.0);
        }
    }
}
