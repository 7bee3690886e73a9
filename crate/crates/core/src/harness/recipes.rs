//! Initial-data recipes and the ill-prepared data generator.
//!
//! Every recipe produces smooth data with the far-field values
//! `(ρ̄, 0)` outside a compact region, matching the torus-for-whole-space
//! reading of the far-field condition.

use crate::error::{Error, Result};
use crate::fields::{Grid, ScalarField, VectorField};
use crate::dynamics::{Formulation, State};
use crate::thermo::PhysParams;

/// Recipe id plus shape parameters (not all recipes use all of them).
#[derive(Clone, Debug)]
pub struct RecipeSpec {
    pub id: String,
    pub amp: f64,
    pub u_amp: f64,
    pub width: f64,
    pub center: f64,
    pub mode: usize,
}

impl RecipeSpec {
    pub fn validate(&self) -> Result<()> {
        match self.id.as_str() {
            "constant" | "acoustic" | "bump" | "compression" => {}
            other => {
                return Err(Error::Config(format!(
                    "unknown initial-data recipe `{other}` \
                     (known: constant, acoustic, bump, compression)"
                )))
            }
        }
        if self.mode == 0 {
            return Err(Error::Config("`init.mode` must be at least 1".into()));
        }
        if !(self.amp.is_finite() && self.u_amp.is_finite() && self.width > 0.0) {
            return Err(Error::Config(format!("bad recipe parameters: {self:?}")));
        }
        Ok(())
    }
}

/// `C^∞` bump with unit peak, support radius `w` around `c` (per axis,
/// product form in 2-d).
fn bump1(x: f64, c: f64, w: f64) -> f64 {
    let s = ((x - c) / w).powi(2);
    if s >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - s)).exp()
    }
}

fn bump(grid: Grid, x: [f64; 2], c: f64, w: f64) -> f64 {
    match grid.dim() {
        1 => bump1(x[0], c, w),
        _ => bump1(x[0], c, w) * bump1(x[1], c, w),
    }
}

/// Build the conservative initial state for a validated recipe.
pub fn make_initial_state(grid: Grid, params: PhysParams, recipe: &RecipeSpec) -> Result<State> {
    recipe.validate()?;
    let tau = std::f64::consts::TAU;
    let l = grid.length();
    let kappa = tau * recipe.mode as f64 / l;
    let rb = params.rho_bar;
    let (rho, u): (ScalarField, VectorField) = match recipe.id.as_str() {
        "constant" => (
            ScalarField::constant(grid, rb),
            VectorField::zeros(grid),
        ),
        "acoustic" => (
            ScalarField::from_fn(grid, |x| rb * (1.0 + recipe.amp * (kappa * x[0]).cos())),
            VectorField::from_fn(grid, |c, x| {
                if c == 0 {
                    recipe.u_amp * (kappa * x[0]).sin()
                } else {
                    0.0
                }
            }),
        ),
        "bump" => (
            ScalarField::from_fn(grid, |x| rb + recipe.amp * bump(grid, x, recipe.center, recipe.width)),
            VectorField::from_fn(grid, |c, x| {
                if c == 0 {
                    // Velocity bump shifted a quarter width off the density bump.
                    recipe.u_amp * bump(grid, x, recipe.center + 0.25 * recipe.width, recipe.width)
                } else {
                    0.0
                }
            }),
        ),
        "compression" => (
            ScalarField::constant(grid, rb),
            VectorField::from_fn(grid, |c, x| {
                if c == 0 {
                    -recipe.amp * (kappa * (x[0] - recipe.center)).sin()
                } else {
                    0.0
                }
            }),
        ),
        _ => unreachable!("validated above"),
    };
    if rho.min() <= 0.0 {
        return Err(Error::Config(
            "recipe parameters produce nonpositive density".into(),
        ));
    }
    let mut m = u.clone();
    for c in 0..grid.dim() {
        *m.component_mut(c) = rho.zip_with(u.component(c), |a, b| a * b)?;
    }
    let mut s = State {
        form: Formulation::Conservative { rho, m },
        time: 0.0,
        params,
    };
    s.time = 0.0;
    Ok(s)
}

/// Ill-prepared viscous data connecting to the inviscid base data:
///
/// ```text
/// ρ_{0,ε} = clamp(ϱ₀ (1 + √ε ψ), [ϱ⁻, ϱ⁺]),    v_{0,ε} = u₀ + √ε ζ,
/// ```
///
/// with fixed smooth compactly supported profiles `ψ, ζ`. Both distance
/// functionals `∫ H(ρ_{0,ε}, ϱ₀)` and `∫ |v_{0,ε} − u₀|²` are `O(ε)`, and
/// the density stays inside ε-independent bounds `[ϱ⁻, ϱ⁺]`. At `ε = 0` the
/// base data is returned exactly.
pub fn make_ill_prepared(eps: f64, base: &State, rho_minus: f64, rho_plus: f64) -> Result<State> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Config(format!("epsilon {eps} outside [0,1]")));
    }
    let rho0 = base.density()?;
    let u0 = base.velocity()?;
    if rho0.min() <= 0.0 {
        return Err(Error::Config("base density must be strictly positive".into()));
    }
    if !(rho_minus > 0.0 && rho_plus > rho_minus) {
        return Err(Error::Config(format!(
            "density bounds must satisfy 0 < {rho_minus} < {rho_plus}"
        )));
    }
    if eps == 0.0 {
        let mut out = base.to_conservative()?;
        out.time = 0.0;
        return Ok(out);
    }
    let grid = base.grid();
    let l = grid.length();
    let se = eps.sqrt();
    // Fixed profiles: ψ centered at 0.45 L, ζ at 0.6 L.
    let psi = |x: [f64; 2]| bump(grid, x, 0.45 * l, 0.18 * l);
    let zeta = |x: [f64; 2]| bump(grid, x, 0.6 * l, 0.15 * l);
    let rho = ScalarField::from_fn(grid, |x| {
        (rho0.data()[node_at(grid, x)] * (1.0 + se * psi(x))).clamp(rho_minus, rho_plus)
    });
    let v = VectorField::from_fn(grid, |c, x| {
        u0.at(node_at(grid, x))[c] + if c == 0 { se * zeta(x) } else { 0.0 }
    });
    let mut m = v.clone();
    for c in 0..grid.dim() {
        *m.component_mut(c) = rho.zip_with(v.component(c), |a, b| a * b)?;
    }
    Ok(State {
        form: Formulation::Conservative { rho, m },
        time: 0.0,
        params: base.params,
    })
}

/// Flat node index of the grid point at position `x` (exact for positions
/// produced by `Grid::coords`).
fn node_at(grid: Grid, x: [f64; 2]) -> usize {
    let dx = grid.spacing();
    let i = (x[0] / dx).round() as usize % grid.points_per_axis();
    match grid.dim() {
        1 => i,
        _ => {
            let j = (x[1] / dx).round() as usize % grid.points_per_axis();
            j * grid.points_per_axis() + i
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn setup() -> (Grid, PhysParams) {
        (
            Grid::new(1, 128, TAU).unwrap(),
            PhysParams::new(2.0, 1.0, 1.0, 0.0, 1.0, 0.0).unwrap(),
        )
    }

    #[test]
    fn recipes_produce_valid_states() {
        let (g, p) = setup();
        for id in ["constant", "acoustic", "bump", "compression"] {
            let spec = RecipeSpec {
                id: id.into(),
                amp: 0.1,
                u_amp: 0.05,
                width: 0.8,
                center: 3.0,
                mode: 2,
            };
            let s = make_initial_state(g, p, &spec).unwrap();
            assert!(s.is_valid(), "{id}");
            assert!(s.density().unwrap().min() > 0.0, "{id}");
        }
        let bad = RecipeSpec {
            id: "warp".into(),
            amp: 0.0,
            u_amp: 0.0,
            width: 1.0,
            center: 0.0,
            mode: 1,
        };
        assert!(make_initial_state(g, p, &bad).is_err());
    }

    #[test]
    fn bump_recipe_has_farfield_plateau() {
        let (g, p) = setup();
        let spec = RecipeSpec {
            id: "bump".into(),
            amp: 0.2,
            u_amp: 0.1,
            width: 0.5,
            center: 3.0,
            mode: 1,
        };
        let s = make_initial_state(g, p, &spec).unwrap();
        let rho = s.density().unwrap();
        let u = s.velocity().unwrap();
        // Far from the bump the data equals the far-field constants.
        assert_eq!(rho.data()[0], 1.0);
        assert_eq!(u.at(0)[0], 0.0);
        assert!(rho.max() > 1.1);
    }

    #[test]
    fn ill_prepared_at_zero_eps_is_exact_base() {
        let (g, p) = setup();
        let spec = RecipeSpec {
            id: "bump".into(),
            amp: 0.2,
            u_amp: 0.1,
            width: 0.5,
            center: 3.0,
            mode: 1,
        };
        let base = make_initial_state(g, p, &spec).unwrap();
        let out = make_ill_prepared(0.0, &base, 0.5, 2.0).unwrap();
        let a = base.density().unwrap();
        let b = out.density().unwrap();
        for n in 0..g.node_count() {
            assert_eq!(a.data()[n].to_bits(), b.data()[n].to_bits());
        }
    }

    #[test]
    fn ill_prepared_distances_scale_linearly_in_eps() {
        // γ = 2: ∫H(ρ_{0,ε}, ϱ₀) = a ε ∫ ϱ₀² ψ² + O(ε^{3/2}) and
        // ∫|v − u₀|² = ε ∫ ζ²; log-log slope 1 ± 0.1 over three decades.
        let (g, p) = setup();
        let spec = RecipeSpec {
            id: "constant".into(),
            amp: 0.0,
            u_amp: 0.0,
            width: 1.0,
            center: 3.0,
            mode: 1,
        };
        let base = make_initial_state(g, p, &spec).unwrap();
        let rho0 = base.density().unwrap();
        let u0 = base.velocity().unwrap();
        let mut hs = Vec::new();
        let mut vs = Vec::new();
        let eps_list = [1e-2, 1e-3, 1e-4];
        for &eps in &eps_list {
            let s = make_ill_prepared(eps, &base, 0.5, 2.0).unwrap();
            let rho = s.density().unwrap();
            let v = s.velocity().unwrap();
            let mut h_int = 0.0;
            let mut v_int = 0.0;
            for n in 0..g.node_count() {
                h_int += p.h_potential(rho.data()[n], rho0.data()[n]).unwrap();
                let d = v.at(n)[0] - u0.at(n)[0];
                v_int += d * d;
            }
            hs.push(h_int * g.cell_volume());
            vs.push(v_int * g.cell_volume());
        }
        let slope = |ys: &[f64]| -> f64 {
            // Least-squares slope in log-log against eps_list.
            let xs: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
            let ls: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ls.iter().sum::<f64>() / n;
            let num: f64 = xs.iter().zip(&ls).map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
            num / den
        };
        let sh = slope(&hs);
        let sv = slope(&vs);
        assert!((sh - 1.0).abs() <= 0.1, "H slope {sh}");
        assert!((sv - 1.0).abs() <= 0.1, "v slope {sv}");
    }

    #[test]
    fn ill_prepared_respects_density_bounds() {
        let (g, p) = setup();
        let spec = RecipeSpec {
            id: "acoustic".into(),
            amp: 0.3,
            u_amp: 0.0,
            width: 1.0,
            center: 3.0,
            mode: 1,
        };
        let base = make_initial_state(g, p, &spec).unwrap();
        for eps in [1e-1, 1e-2, 1e-3] {
            let s = make_ill_prepared(eps, &base, 0.8, 1.25).unwrap();
            let rho = s.density().unwrap();
            assert!(rho.min() >= 0.8 - 1e-15);
            assert!(rho.max() <= 1.25 + 1e-15);
        }
    }
}
