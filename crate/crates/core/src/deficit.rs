//! The Choquard residual, its dual norm Θ(u) and the orthogonality functionals.

use serde::{Deserialize, Serialize};

use crate::bubble::{BubbleParams, Profile, Variant};
use crate::error::{Error, Result};
use crate::grid::conv::{LatticeKernel, PowerKernel};
use crate::grid::{BoxField, Field, RadialField};
use crate::par::Exec;
use crate::params::HlsParams;
use crate::riesz::{riesz_convolve, riesz_convolve_pair, RieszOptions};

#[derive(Debug, Clone)]
pub struct ResidualReport {
    /// −Δu − (I_μ ∗ |u|^{p̃+1})|u|^{p̃−1}u.
    pub residual: Field,
    pub theta: f64,
    pub decay_ok: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DualNormReport {
    /// ‖∇φ‖ with −Δφ = f.
    pub value: f64,
    /// The same norm by the second path (Fourier weights on the box, ∫fφ on radial grids).
    pub alternate: f64,
    /// Mean removed before inversion (box only).
    pub mean_correction: f64,
}

#[inline]
fn odd_power(v: f64, q: f64) -> f64 {
    v.signum() * v.abs().powf(q)
}

/// N(u) = (I_μ ∗ |u|^{p̃+1})|u|^{p̃−1}u.
pub fn nonlinearity(params: &HlsParams, u: &Field) -> Result<Field> {
    let pt = params.p_tilde;
    let w = u.map(|v| v.abs().powf(pt + 1.0));
    let pot = riesz_convolve(params, &w, RieszOptions::default())?;
    pot.zip_map(u, |a, v| a * odd_power(v, pt))
}

/// −Δu − N(u).
pub fn residual(params: &HlsParams, u: &Field) -> Result<Field> {
    let nl = nonlinearity(params, u)?;
    let lap = match u {
        Field::Radial(r) => r.grid.laplacian(&r.values),
        Field::Box(b) => b.grid.laplacian(&b.values, Exec::default()),
    };
    Ok(nl.with_values(lap.iter().zip(nl.values()).map(|(l, n)| -l - n).collect()))
}

/// ‖f‖_{(D^{1,2})^{-1}}.
pub fn dual_norm(f: &Field) -> Result<f64> {
    Ok(dual_norm_report(f)?.value)
}

pub fn dual_norm_report(f: &Field) -> Result<DualNormReport> {
    f.check_decay()?;
    match f {
        Field::Radial(r) => radial_dual_norm(r),
        Field::Box(b) => {
            let d = b.grid.dual_norm(&b.values, Exec::default());
            Ok(DualNormReport { value: d.solve, alternate: d.fourier, mean_correction: d.mean })
        }
    }
}

fn radial_dual_norm(f: &RadialField) -> Result<DualNormReport> {
    let g = &f.grid;
    let nf = g.n_dim as f64;
    // φ' = −m(r)/(ω r^{N−1}), m̃ = m/ω
    let mt = g.cumulative_mass(&f.values);
    let w: Vec<f64> = mt.iter().zip(&g.nodes).map(|(m, r)| m * m * r.powf(2.0 - nf)).collect();
    let value = (g.omega() * crate::grid::radial::integrate_log_rates(&w, g.h, nf + 2.0, Some(nf - 2.0))?).max(0.0).sqrt();
    let q: Vec<f64> = mt.iter().zip(&g.nodes).map(|(m, r)| m * r.powf(2.0 - nf)).collect();
    let top = g.cumulative_from_top(&q);
    let big_m = mt[mt.len() - 1];
    let tail = big_m * g.r_max.powf(2.0 - nf) / (nf - 2.0);
    let fphi: Vec<f64> = f.values.iter().zip(&top).map(|(v, t)| v * (t + tail)).collect();
    let gx: Vec<f64> = fphi.iter().zip(&g.nodes).map(|(v, r)| v * r.powf(nf)).collect();
    let alternate = match crate::grid::radial::integrate_log(&gx, g.h, nf) {
        Ok(v) => v,
        Err(Error::Boundary(_)) => crate::grid::radial::integrate_log_rates(&gx, g.h, nf, Some(f64::INFINITY))?,
        Err(e) => return Err(e),
    };
    let alternate = (g.omega() * alternate).max(0.0).sqrt();
    Ok(DualNormReport { value, alternate, mean_correction: 0.0 })
}

/// Θ(u) = ‖−Δu − N(u)‖_{(D^{1,2})^{-1}}.
///
/// On the box the inversion is done in free space: Θ = ‖∇(u − G ∗ N(u))‖ with
/// G the Newton kernel, so the bubble tails outside the box do not pollute it.
pub fn theta(params: &HlsParams, u: &Field) -> Result<f64> {
    theta_with(params, u, Exec::default())
}

pub fn theta_with(params: &HlsParams, u: &Field, exec: Exec) -> Result<f64> {
    u.check_decay()?;
    match u {
        Field::Radial(_) => dual_norm(&residual(params, u)?),
        Field::Box(b) => box_theta(params, b, exec),
    }
}

fn box_theta(params: &HlsParams, u: &BoxField, exec: Exec) -> Result<f64> {
    let g = u.grid;
    let pt = params.p_tilde;
    let w: Vec<f64> = u.values.iter().map(|v| v.abs().powf(pt + 1.0)).collect();
    let riesz = LatticeKernel::get(g.n, g.h(), PowerKernel { coef: params.k_mu, s: params.mu });
    let pot = riesz.apply(&w, exec);
    drop(w);
    let nl: Vec<f64> = pot.iter().zip(&u.values).map(|(a, v)| a * odd_power(*v, pt)).collect();
    drop(pot);
    let newton = LatticeKernel::get(g.n, g.h(), PowerKernel::newton());
    let phi = newton.apply(&nl, exec);
    let diff: Vec<f64> = u.values.iter().zip(&phi).map(|(a, b)| a - b).collect();
    Ok(g.dirichlet_energy(&diff, exec).max(0.0).sqrt())
}

/// Θ on the box with the periodic inverse Laplacian instead of the free-space one.
pub fn theta_periodic(params: &HlsParams, u: &Field) -> Result<DualNormReport> {
    match u {
        Field::Box(_) => dual_norm_report(&residual(params, u)?),
        Field::Radial(_) => Err(Error::Unsupported("periodic deficit needs the box backend".into())),
    }
}

pub fn residual_report(params: &HlsParams, u: &Field) -> Result<ResidualReport> {
    let decay_ok = u.check_decay().is_ok();
    let residual = residual(params, u)?;
    let theta = if decay_ok { theta(params, u)? } else { f64::NAN };
    Ok(ResidualReport { residual, theta, decay_ok })
}

/// The N + 2 Riesz-form orthogonality integrals of ρ against the bubble b.
///
/// Order: the Ũ direction, ∂_λ, then ∂_{z_1..z_N}. Radial grids hold only
/// radial ρ, for which the ∂_z entries vanish identically.
pub fn ortho_functionals(params: &HlsParams, b: &BubbleParams, rho: &Field) -> Result<Vec<f64>> {
    let n = params.n;
    let pt = params.p_tilde;
    let prof = Profile::new(params, b.lambda, Variant::Choquard);
    let mut out = vec![0.0; n + 2];
    match rho {
        Field::Radial(r) => {
            if b.z.iter().any(|&v| v != 0.0) {
                return Err(Error::Unsupported("radial grids only hold bubbles centred at the origin".into()));
            }
            let g = &r.grid;
            let u: Vec<f64> = g.nodes.iter().map(|x| prof.value(x * x)).collect();
            let dl: Vec<f64> = g.nodes.iter().map(|x| prof.dlambda(x * x)).collect();
            let up1 = Field::radial(g.clone(), u.iter().map(|v| v.powf(pt + 1.0)).collect());
            let upd = Field::radial(g.clone(), u.iter().zip(&dl).map(|(v, d)| v.powf(pt) * d).collect());
            let a = riesz_convolve(params, &up1, RieszOptions::default())?;
            let c = riesz_convolve(params, &upd, RieszOptions::default())?;
            let f0: Vec<f64> = a.values().iter().zip(&u).map(|(a, v)| a * v.powf(pt)).collect();
            let f1: Vec<f64> = (0..g.len())
                .map(|i| (pt + 1.0) * c.values()[i] * u[i].powf(pt) + pt * a.values()[i] * u[i].powf(pt - 1.0) * dl[i])
                .collect();
            out[0] = rho.integrate_product(&rho.with_values(f0))?;
            out[1] = rho.integrate_product(&rho.with_values(f1))?;
        }
        Field::Box(bx) => {
            let grid = bx.grid;
            let exec = Exec::default();
            let u = grid.sample(|x| prof.value(dist2(&b.z, &x)), exec);
            let dl = grid.sample(|x| prof.dlambda(dist2(&b.z, &x)), exec);
            let up1 = |k: usize| u[k].powf(pt + 1.0);
            let upp = |k: usize| u[k].powf(pt);
            let a_in: Vec<f64> = (0..u.len()).map(up1).collect();
            let l_in: Vec<f64> = (0..u.len()).map(|k| upp(k) * dl[k]).collect();
            let (a, c) = riesz_convolve_pair(params, &BoxField { grid, values: a_in }, &BoxField { grid, values: l_in }, exec)?;
            let dv = grid.cell_volume();
            let form = |conv: &[f64], d: &[f64]| -> f64 {
                (0..u.len())
                    .map(|k| ((pt + 1.0) * conv[k] * upp(k) + pt * a[k] * u[k].powf(pt - 1.0) * d[k]) * bx.values[k])
                    .sum::<f64>()
                    * dv
            };
            out[0] = (0..u.len()).map(|k| a[k] * upp(k) * bx.values[k]).sum::<f64>() * dv;
            out[1] = form(&c, &dl);
            drop(c);
            let dz: Vec<Vec<f64>> = (0..3)
                .map(|j| grid.sample(|x| prof.dz_factor(dist2(&b.z, &x)) * (x[j] - b.z[j]), exec))
                .collect();
            let inputs: Vec<Vec<f64>> = dz.iter().map(|d| (0..u.len()).map(|k| upp(k) * d[k]).collect()).collect();
            let (c0, c1) = riesz_convolve_pair(
                params,
                &BoxField { grid, values: inputs[0].clone() },
                &BoxField { grid, values: inputs[1].clone() },
                exec,
            )?;
            let k = LatticeKernel::get(grid.n, grid.h(), PowerKernel { coef: params.k_mu, s: params.mu });
            let c2 = k.apply(&inputs[2], exec);
            out[2] = form(&c0, &dz[0]);
            out[3] = form(&c1, &dz[1]);
            out[4] = form(&c2, &dz[2]);
        }
    }
    Ok(out)
}

fn dist2(z: &[f64], x: &[f64; 3]) -> f64 {
    (x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2) + (x[2] - z[2]).powi(2)
}
