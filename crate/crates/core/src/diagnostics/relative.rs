//! Relative energy functional and its remainder decomposition.
//!
//! The relative energy of a (weak) state `(ρ_ε, v_ε)` against a smooth
//! reference `(ϱ, u)` is
//!
//! ```text
//! E(ρ_ε, v_ε | ϱ, u) = ∫ [ ½ ρ_ε |v_ε − u|² + H(ρ_ε, ϱ) ] dx.
//! ```
//!
//! Its growth along the flow is controlled by four remainder blocks:
//! the viscous block `ε ∫ S(∇u):(∇u − ∇v_ε)`, the convective block
//! `∫ ρ_ε (v_ε − u)·∇u·(u − v_ε)`, the pressure-defect block
//! `−∫ [p(ρ_ε) − (ρ_ε − ϱ)p'(ϱ) − p(ϱ)] div u` and the noise mismatch
//! `½ Σ_k ∫ ρ_ε |G_k(ρ_ε, ρ_ε v_ε)/ρ_ε − G_k(ϱ, ϱu)/ϱ|²`.
//!
//! Each block comes with a certified bound that is a theorem in the smooth
//! regime; a violation flags an implementation bug:
//!
//! * convective: `|·| ≤ 2 ‖∇u‖_∞ E` (the kinetic part of `E` bounds
//!   `½ ∫ ρ_ε |v_ε − u|²`),
//! * pressure: `|·| ≤ (γ−1) ‖div u‖_∞ E`, using the identity
//!   `p(ρ_ε) − (ρ_ε − ϱ)p'(ϱ) − p(ϱ) = (γ−1) H(ρ_ε, ϱ)`,
//! * viscous: Young for the bilinear form `S(P):Q`, so
//!   `|·| ≤ ε/2 [∫ S(∇w):∇w + ∫ S(∇u):∇u]` with `w = v_ε − u`,
//! * noise: for the shipped linear family the density parts cancel exactly
//!   and the block equals `½ Σ_k ∫ ρ_ε |A_k (v_ε − u)|² ≤ (Σ_k sup‖A_k‖²) E`.

use crate::error::{Error, Result};
use crate::fields::{divergence, gradient, spectral, sup_norm, ScalarField, VectorField};
use crate::dynamics::{stress_dissipation_density, State};
use crate::noise::NoiseModel;
use crate::thermo::PhysParams;
use crate::util::Kahan;

/// Relative energy by quadrature; errors when the reference density is not
/// strictly positive.
pub fn relative_energy(
    weak_rho: &ScalarField,
    weak_v: &VectorField,
    ref_rho: &ScalarField,
    ref_u: &VectorField,
    params: &PhysParams,
) -> Result<f64> {
    weak_rho.ensure_valid()?;
    weak_v.ensure_valid()?;
    ref_rho.ensure_valid()?;
    ref_u.ensure_valid()?;
    let grid = weak_rho.grid();
    if ref_rho.grid() != grid || weak_v.grid() != grid || ref_u.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if ref_rho.min() <= 0.0 {
        return Err(Error::Vacuum);
    }
    let mut acc = Kahan::new();
    for n in 0..grid.node_count() {
        let rho = weak_rho.data()[n];
        let dv = diff2(weak_v.at(n), ref_u.at(n));
        acc.add(0.5 * rho * dv + params.h_potential(rho, ref_rho.data()[n])?);
    }
    Ok(grid.cell_volume() * acc.value())
}

/// Relative energy between two states sharing grid and parameters.
pub fn relative_energy_states(weak: &State, reference: &State) -> Result<f64> {
    relative_energy(
        &weak.density()?,
        &weak.velocity()?,
        &reference.density()?,
        &reference.velocity()?,
        &weak.params,
    )
}

#[inline]
fn diff2(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d0 = a[0] - b[0];
    let d1 = a[1] - b[1];
    d0 * d0 + d1 * d1
}

/// The four remainder blocks with their certified bounds.
#[derive(Clone, Copy, Debug)]
pub struct RemainderBreakdown {
    pub visc: f64,
    pub convect: f64,
    pub pressure_defect: f64,
    pub noise_mismatch: f64,
    /// Relative energy of the pair the blocks were evaluated at.
    pub rel_energy: f64,
    pub cert_visc: f64,
    pub cert_convect: f64,
    pub cert_pressure: f64,
    /// Available for the shipped linear noise family only.
    pub cert_noise: Option<f64>,
    /// All blocks within their certificates.
    pub within_bounds: bool,
}

impl RemainderBreakdown {
    pub fn total(&self) -> f64 {
        self.visc + self.convect + self.pressure_defect + self.noise_mismatch
    }
}

/// Evaluate the remainder blocks for a weak state against a strictly positive
/// smooth reference. `eps` is the viscosity scale of the weak system.
pub fn remainder_terms(
    weak: &State,
    reference: &State,
    model: &NoiseModel,
    eps: f64,
) -> Result<RemainderBreakdown> {
    let grid = weak.grid();
    if reference.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let params = &weak.params;
    let rho_e = weak.density()?;
    let v_e = weak.velocity()?;
    let rho_ref = reference.density()?;
    let u = reference.velocity()?;
    if rho_ref.min() <= 0.0 {
        return Err(Error::Vacuum);
    }
    let vol = grid.cell_volume();
    let dim = grid.dim();

    let rel = relative_energy(&rho_e, &v_e, &rho_ref, &u, params)?;

    // Viscous block and its Young certificate.
    let (visc, cert_visc) = {
        let s_u = crate::dynamics::stress_tensor(&u, params)?;
        let jac_w = {
            let mut w = v_e.clone();
            w.axpy(-1.0, &u)?;
            spectral::jacobian(&w)?
        };
        let mut acc = Kahan::new();
        for n in 0..grid.node_count() {
            let mut s = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    // S(∇u) : (∇u − ∇v_ε) = −S(∇u) : ∇w.
                    s -= s_u[i * dim + j].data()[n] * jac_w[i * dim + j].data()[n];
                }
            }
            acc.add(s);
        }
        let visc = eps * vol * acc.value();
        let q_u = stress_dissipation_density(&u, params)?.integral();
        let q_w = {
            let mut w = v_e.clone();
            w.axpy(-1.0, &u)?;
            stress_dissipation_density(&w, params)?.integral()
        };
        (visc, eps * 0.5 * (q_u + q_w))
    };

    // Convective block.
    let jac_u = spectral::jacobian(&u)?;
    let mut conv = Kahan::new();
    let mut grad_sup = 0.0f64;
    for n in 0..grid.node_count() {
        let w = [v_e.at(n)[0] - u.at(n)[0], v_e.at(n)[1] - u.at(n)[1]];
        let mut s = 0.0;
        let mut frob = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                let du = jac_u[i * dim + j].data()[n];
                s += w[j] * du * (-w[i]);
                frob += du * du;
            }
        }
        conv.add(rho_e.data()[n] * s);
        grad_sup = grad_sup.max(frob.sqrt());
    }
    let convect = vol * conv.value();
    let cert_convect = 2.0 * grad_sup * rel;

    // Pressure-defect block.
    let div_u = divergence(&u)?;
    let mut press = Kahan::new();
    for n in 0..grid.node_count() {
        let re = rho_e.data()[n];
        let rr = rho_ref.data()[n];
        let defect =
            params.pressure(re.max(0.0))? - (re - rr) * params.pressure_prime(rr)? - params.pressure(rr)?;
        press.add(-defect * div_u.data()[n]);
    }
    let pressure_defect = vol * press.value();
    let cert_pressure = (params.gamma - 1.0) * sup_norm(&div_u) * rel;

    // Noise mismatch block.
    let mut noise = Kahan::new();
    {
        let q_e = weak.momentum()?;
        let q_ref = reference.momentum()?;
        for k in 0..model.mode_count() {
            let g_e = model.apply_g(&rho_e, &q_e, k)?;
            let g_r = model.apply_g(&rho_ref, &q_ref, k)?;
            for n in 0..grid.node_count() {
                let re = rho_e.data()[n];
                if re <= 0.0 {
                    continue; // the integrand carries a factor ρ_ε
                }
                let a = g_e.at(n);
                let b = g_r.at(n);
                let rr = rho_ref.data()[n];
                let d = [a[0] / re - b[0] / rr, a[1] / re - b[1] / rr];
                noise.add(re * (d[0] * d[0] + d[1] * d[1]));
            }
        }
    }
    let noise_mismatch = 0.5 * vol * noise.value();
    let cert_noise = model.mat_sq_sum().map(|s| s * rel);

    let tol = 1e-9;
    let slack = |c: f64| c * (1.0 + tol) + 1e-14;
    let within_bounds = visc.abs() <= slack(cert_visc)
        && convect.abs() <= slack(cert_convect)
        && pressure_defect.abs() <= slack(cert_pressure)
        && cert_noise.map(|c| noise_mismatch <= slack(c)).unwrap_or(true);

    Ok(RemainderBreakdown {
        visc,
        convect,
        pressure_defect,
        noise_mismatch,
        rel_energy: rel,
        cert_visc,
        cert_convect,
        cert_pressure,
        cert_noise,
        within_bounds,
    })
}

/// Drift of the comparison pair `(f, U) = (ϱ, u)` when the reference solves
/// the Euler system strongly: `D f = −div(ϱu)`, `D U = −u·∇u − ∇p(ϱ)/ϱ`.
/// The diffusion of `U` is `G(ϱ, ϱu)/ϱ`, expressed through the model.
#[derive(Clone, Debug)]
pub struct RefTendencies {
    pub drift_density: ScalarField,
    pub drift_velocity: VectorField,
}

pub fn comparison_tendencies(reference: &State) -> Result<RefTendencies> {
    let rho = reference.density()?;
    if rho.min() <= 0.0 {
        return Err(Error::Vacuum);
    }
    let u = reference.velocity()?;
    let grid = reference.grid();
    let dim = grid.dim();
    let params = &reference.params;

    let m = reference.momentum()?;
    let mut drift_density = divergence(&m)?;
    drift_density.scale(-1.0);

    let jac_u = spectral::jacobian(&u)?;
    let p_field = rho.map(|x| params.pressure(x.max(0.0)).unwrap_or(f64::NAN));
    let grad_p = gradient(&p_field)?;
    let mut drift_velocity = VectorField::zeros(grid);
    for i in 0..dim {
        let mut comp = ScalarField::zeros(grid);
        for n in 0..grid.node_count() {
            let mut adv = 0.0;
            for j in 0..dim {
                adv += u.at(n)[j] * jac_u[i * dim + j].data()[n];
            }
            comp.data_mut()[n] = -adv - grad_p.component(i).data()[n] / rho.data()[n];
        }
        *drift_velocity.component_mut(i) = comp;
    }
    Ok(RefTendencies {
        drift_density,
        drift_velocity,
    })
}

/// The five blocks of the general remainder form for an arbitrary comparison
/// pair `(f, U)` with drift `tend` and diffusion `G(f, fU)/f`:
/// viscous, convective (with the full drift), pressure-potential coupling,
/// pressure-divergence, and noise mismatch.
#[derive(Clone, Copy, Debug)]
pub struct GeneralRemainder {
    pub blocks: [f64; 5],
}

impl GeneralRemainder {
    pub fn total(&self) -> f64 {
        self.blocks.iter().sum()
    }
}

pub fn remainder_general(
    weak: &State,
    f: &ScalarField,
    big_u: &VectorField,
    tend: &RefTendencies,
    model: &NoiseModel,
    eps: f64,
) -> Result<GeneralRemainder> {
    let grid = weak.grid();
    if f.grid() != grid || big_u.grid() != grid {
        return Err(Error::GridMismatch);
    }
    if f.min() <= 0.0 {
        return Err(Error::Vacuum);
    }
    let params = &weak.params;
    let rho_e = weak.density()?;
    let v_e = weak.velocity()?;
    let vol = grid.cell_volume();
    let dim = grid.dim();

    // Block 1: ε ∫ S(∇U) : (∇U − ∇v_ε).
    let s_u = crate::dynamics::stress_tensor(big_u, params)?;
    let jac_u = spectral::jacobian(big_u)?;
    let jac_v = spectral::jacobian(&v_e)?;
    let mut b1 = Kahan::new();
    for n in 0..grid.node_count() {
        let mut s = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                s += s_u[i * dim + j].data()[n]
                    * (jac_u[i * dim + j].data()[n] - jac_v[i * dim + j].data()[n]);
            }
        }
        b1.add(s);
    }
    let b1 = eps * vol * b1.value();

    // Block 2: ∫ ρ_ε (DU + v_ε·∇U)·(U − v_ε).
    let mut b2 = Kahan::new();
    for n in 0..grid.node_count() {
        let mut s = 0.0;
        for i in 0..dim {
            let mut adv = 0.0;
            for j in 0..dim {
                adv += v_e.at(n)[j] * jac_u[i * dim + j].data()[n];
            }
            let material = tend.drift_velocity.at(n)[i] + adv;
            s += material * (big_u.at(n)[i] - v_e.at(n)[i]);
        }
        b2.add(rho_e.data()[n] * s);
    }
    let b2 = vol * b2.value();

    // Block 3: ∫ (f − ρ_ε) P''(f) Df + ∇P'(f)·(fU − ρ_ε v_ε).
    let p_prime_field = f.map(|x| params.big_p_prime(x).unwrap_or(f64::NAN));
    let grad_pp = gradient(&p_prime_field)?;
    let mut b3 = Kahan::new();
    for n in 0..grid.node_count() {
        let fr = f.data()[n];
        let re = rho_e.data()[n];
        let mut s = (fr - re) * params.big_p_second(fr)? * tend.drift_density.data()[n];
        for i in 0..dim {
            s += grad_pp.component(i).data()[n] * (fr * big_u.at(n)[i] - re * v_e.at(n)[i]);
        }
        b3.add(s);
    }
    let b3 = vol * b3.value();

    // Block 4: ∫ [p(f) − p(ρ_ε)] div U.
    let div_u = divergence(big_u)?;
    let mut b4 = Kahan::new();
    for n in 0..grid.node_count() {
        b4.add(
            (params.pressure(f.data()[n])? - params.pressure(rho_e.data()[n].max(0.0))?)
                * div_u.data()[n],
        );
    }
    let b4 = vol * b4.value();

    // Block 5: ½ Σ_k ∫ ρ_ε |G_k(ρ_ε, ρ_ε v_ε)/ρ_ε − G_k(f, fU)/f|².
    let q_e = weak.momentum()?;
    let q_f = {
        let mut q = big_u.clone();
        for c in 0..dim {
            *q.component_mut(c) = f.zip_with(big_u.component(c), |a, b| a * b)?;
        }
        q
    };
    let mut b5 = Kahan::new();
    for k in 0..model.mode_count() {
        let g_e = model.apply_g(&rho_e, &q_e, k)?;
        let g_f = model.apply_g(f, &q_f, k)?;
        for n in 0..grid.node_count() {
            let re = rho_e.data()[n];
            if re <= 0.0 {
                continue;
            }
            let fr = f.data()[n];
            let d = [
                g_e.at(n)[0] / re - g_f.at(n)[0] / fr,
                g_e.at(n)[1] / re - g_f.at(n)[1] / fr,
            ];
            b5.add(re * (d[0] * d[0] + d[1] * d[1]));
        }
    }
    let b5 = 0.5 * vol * b5.value();

    Ok(GeneralRemainder {
        blocks: [b1, b2, b3, b4, b5],
    })
}
