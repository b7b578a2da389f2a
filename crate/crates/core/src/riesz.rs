//! Riesz potentials I_μ ∗ f, the HLS pairing and the Choquard energy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::conv::{LatticeKernel, PowerKernel};
use crate::grid::{dirichlet_norm, BoxField, BoxGrid, Field, RadialField, RadialGrid};
use crate::par::Exec;
use crate::params::HlsParams;
use crate::special::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RieszMethod {
    /// Radial closed kernel on radial grids, free-space lattice sums on boxes.
    #[default]
    Auto,
    RadialClosedKernel,
    /// Periodic multiplier |k|^{μ−N} on the box.
    FourierMultiplier,
    /// Zero-padded lattice convolution on the box.
    FreeSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct RieszOptions {
    pub method: RieszMethod,
    /// ε_k ≥ 0: the multiplier becomes (|k|² + ε_k²)^{(μ−N)/2}.
    pub regularization: f64,
}

/// I_μ ∗ f.
pub fn riesz_convolve(params: &HlsParams, f: &Field, opts: RieszOptions) -> Result<Field> {
    riesz_convolve_with(params, f, opts, Exec::default())
}

pub fn riesz_convolve_with(params: &HlsParams, f: &Field, opts: RieszOptions, exec: Exec) -> Result<Field> {
    let nf = params.n as f64;
    if !(params.mu > 0.0 && params.mu < nf) {
        return Err(Error::Domain(format!("mu={} outside (0, N)", params.mu)));
    }
    if opts.regularization < 0.0 {
        return Err(Error::Domain("regularization must be non-negative".into()));
    }
    match (f, opts.method) {
        (Field::Radial(r), RieszMethod::Auto | RieszMethod::RadialClosedKernel) => {
            let vals = radial_riesz(params, &r.grid, &r.values, exec)?;
            Ok(Field::radial(r.grid.clone(), vals))
        }
        (Field::Box(b), RieszMethod::Auto | RieszMethod::FreeSpace) => {
            let k = LatticeKernel::get(b.grid.n, b.grid.h(), PowerKernel { coef: params.k_mu, s: params.mu });
            Ok(Field::cube(b.grid, k.apply(&b.values, exec)))
        }
        (Field::Box(b), RieszMethod::FourierMultiplier) => Ok(Field::cube(b.grid, periodic_riesz(params, b, opts.regularization, exec))),
        _ => Err(Error::Unsupported(format!("method {:?} on this backend", opts.method))),
    }
}

/// Box-backend convolution of two fields at once (free-space method).
pub fn riesz_convolve_pair(params: &HlsParams, f: &BoxField, g: &BoxField, exec: Exec) -> Result<(Vec<f64>, Vec<f64>)> {
    if f.grid != g.grid {
        return Err(Error::GridMismatch("pair convolution needs one grid".into()));
    }
    let k = LatticeKernel::get(f.grid.n, f.grid.h(), PowerKernel { coef: params.k_mu, s: params.mu });
    Ok(k.apply_pair(&f.values, &g.values, exec))
}

/// ∫_{[−L,L]³} K_μ|x|^{−μ} dx.
pub fn box_kernel_mass(params: &HlsParams, grid: &BoxGrid) -> f64 {
    let mu = params.mu;
    let (x, w) = gauss_legendre(24);
    // six pyramids over the faces; panels split at 0 for smoothness
    let mut face = 0.0;
    for (xa, wa) in x.iter().zip(&w) {
        for (xb, wb) in x.iter().zip(&w) {
            let (a, b) = (0.5 * (xa + 1.0), 0.5 * (xb + 1.0));
            face += 0.25 * wa * wb * (1.0 + a * a + b * b).powf(-mu / 2.0);
        }
    }
    face *= 4.0;
    params.k_mu * 6.0 * face * grid.half_width.powf(3.0 - mu) / (3.0 - mu)
}

fn periodic_riesz(params: &HlsParams, f: &BoxField, eps: f64, exec: Exec) -> Vec<f64> {
    let e = params.mu - params.n as f64;
    let m0 = if eps > 0.0 { eps.powf(e) } else { box_kernel_mass(params, &f.grid) };
    f.grid.apply_multiplier(
        &f.values,
        |k| {
            if eps > 0.0 {
                (k * k + eps * eps).powf(e / 2.0)
            } else if k == 0.0 {
                m0
            } else {
                k.powf(e)
            }
        },
        exec,
    )
}

//==============================================================================
// radial closed kernel (N = 3)
//==============================================================================

const NEAR: usize = 6;
const GL_POINTS: usize = 3;
const SERIES_RATIO: f64 = 0.05;

/// Kernel ((r+s)^β − |r−s|^β)/β, stable in every regime (log form at β = 0).
#[inline]
fn kernel(beta: f64, r: f64, s: f64) -> f64 {
    let (a, b) = if r >= s { (r, s) } else { (s, r) };
    let x = b / a;
    let l1 = x.ln_1p();
    let l2 = (-x).ln_1p();
    if beta == 0.0 {
        l1 - l2
    } else {
        (beta * (a.ln() + l2)).exp() * (beta * (l1 - l2)).exp_m1() / beta
    }
}

/// Smooth part (e^{β ln(r+s)} − 1)/β.
#[inline]
fn smooth_part(beta: f64, r: f64, s: f64) -> f64 {
    let l = (r + s).ln();
    if beta == 0.0 {
        l
    } else {
        (beta * l).exp_m1() / beta
    }
}

/// ∫_{t0}^{t1} t^j sing(t) dt where sing = (|t|^β − 1)/β or ln|t|, for j = 0..3.
fn singular_moments(beta: f64, t0: f64, t1: f64, scale: f64) -> [f64; 4] {
    // ∫ w^j sing(w) dw with w = scale·t, returned as moments in t (times scale)
    let mut m = [0.0; 4];
    let pos = t0 >= 0.0 && t1 >= 0.0;
    for (j, mj) in m.iter_mut().enumerate() {
        let jf = j as f64;
        let poly = (t1.powi(j as i32 + 1) - t0.powi(j as i32 + 1)) / (jf + 1.0);
        // ∫ t^j |t|^β dt and ∫ t^j ln|t| dt
        let (pw, lg) = if pos {
            let e = jf + beta + 1.0;
            let pw = (t1.abs().powf(e) - t0.abs().powf(e)) / e;
            let lg = |t: f64| if t == 0.0 { 0.0 } else { t.powi(j as i32 + 1) * (t.ln() / (jf + 1.0) - 1.0 / ((jf + 1.0) * (jf + 1.0))) };
            (pw, lg(t1) - lg(t0))
        } else {
            let (u0, u1) = (t0.abs(), t1.abs());
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            let e = jf + beta + 1.0;
            let pw = sign * (u0.powf(e) - u1.powf(e)) / e;
            let lg = |u: f64| if u == 0.0 { 0.0 } else { u.powi(j as i32 + 1) * (u.ln() / (jf + 1.0) - 1.0 / ((jf + 1.0) * (jf + 1.0))) };
            (pw, sign * (lg(u0) - lg(u1)))
        };
        *mj = if beta == 0.0 {
            scale * (scale.ln() * poly + lg)
        } else {
            (scale.powf(1.0 + beta) * pw - scale * poly) / beta
        };
    }
    m
}

/// Monomial coefficients (in t) of the cubic through (t_a, g_a).
fn cubic_coefficients(t: [f64; 4], g: [f64; 4]) -> [f64; 4] {
    let mut d = g;
    for lvl in 1..4 {
        for i in (lvl..4).rev() {
            d[i] = (d[i] - d[i - 1]) / (t[i] - t[i - lvl]);
        }
    }
    // Horner expansion of the Newton form
    let mut c = [0.0; 4];
    c[0] = d[3];
    let mut deg = 0;
    for k in (0..3).rev() {
        // c ← c·(t − t_k) + d_k
        let mut nc = [0.0; 4];
        for i in 0..=deg {
            nc[i + 1] += c[i];
            nc[i] -= t[k] * c[i];
        }
        nc[0] += d[k];
        c = nc;
        deg += 1;
    }
    c
}

fn lagrange4(u: f64) -> [f64; 4] {
    [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ]
}

fn radial_riesz(params: &HlsParams, grid: &RadialGrid, f: &[f64], exec: Exec) -> Result<Vec<f64>> {
    if params.n != 3 || grid.n_dim != 3 {
        return Err(Error::Unsupported("the radial Riesz kernel is implemented for N = 3".into()));
    }
    let beta = 2.0 - params.mu;
    let m = grid.len();
    let h = grid.h;
    let (fm, fp) = (f[m - 1], f[m - 2]);
    let decays = fm == 0.0 || (fm.signum() == fp.signum() && fm.abs() < fp.abs());
    if !decays {
        return Err(Error::Boundary("density does not decay at r_max".into()));
    }
    let q_rate = if fm == 0.0 { f64::INFINITY } else { (fp / fm).ln() / h };
    if fm != 0.0 && q_rate <= beta + 1.0 {
        return Err(Error::Boundary(format!("density decays too slowly for I_mu (rate {q_rate:.3})")));
    }

    // continue the log grid by a power law out to the series radius of r_max
    let ext = if fm == 0.0 { 0 } else { ((1.0 / SERIES_RATIO).ln() / h).ceil() as usize + 1 };
    let rm = grid.r_max;
    let mut s = grid.nodes.clone();
    let mut fv = f.to_vec();
    for k in 1..=ext {
        let sv = rm * (k as f64 * h).exp();
        s.push(sv);
        fv.push(fm * (-(q_rate * k as f64 * h)).exp());
    }
    let me = s.len();
    let (gx, gw) = gauss_legendre(GL_POINTS);
    let mut ps = Vec::with_capacity((me - 1) * GL_POINTS);
    let mut pw = Vec::with_capacity((me - 1) * GL_POINTS);
    for q in 0..me - 1 {
        let i0 = q.saturating_sub(1).min(me - 4);
        for (x, w) in gx.iter().zip(&gw) {
            let xi = s[q].ln() + 0.5 * h * (1.0 + x);
            let u = (xi - s[i0].ln()) / h - 1.0;
            let l = lagrange4(u);
            let v: f64 = (0..4).map(|a| l[a] * fv[i0 + a]).sum();
            let sv = xi.exp();
            ps.push(sv);
            pw.push(0.5 * h * w * sv * sv * v);
        }
    }

    // ((1+x)^β − (1−x)^β)/β = 2(x + c3 x³ + c5 x⁵ + …)
    let c3 = (beta - 1.0) * (beta - 2.0) / 6.0;
    let c5 = (beta - 1.0) * (beta - 2.0) * (beta - 3.0) * (beta - 4.0) / 120.0;
    let np = ps.len();
    let mut pre = vec![[0.0f64; 3]; np + 1];
    for i in 0..np {
        let (sv, w) = (ps[i], pw[i]);
        pre[i + 1] = [pre[i][0] + w * sv, pre[i][1] + w * sv.powi(3), pre[i][2] + w * sv.powi(5)];
    }
    let mut suf = vec![[0.0f64; 3]; np + 1];
    for i in (0..np).rev() {
        let (sv, w) = (ps[i], pw[i]);
        let sb = sv.powf(beta);
        suf[i] = [suf[i + 1][0] + w * sb / sv, suf[i + 1][1] + w * sb / sv.powi(3), suf[i + 1][2] + w * sb / sv.powi(5)];
    }
    let far_tail = if fm != 0.0 {
        let (se, fe) = (s[me - 1], fv[me - 1]);
        let t = |j: f64| fe * se.powf(2.0 + beta - j) / (q_rate + j - beta - 2.0);
        [t(1.0), t(3.0), t(5.0)]
    } else {
        [0.0; 3]
    };
    let s0 = s[0];
    let f0 = f[0];
    let (ix, iw) = gauss_legendre(8);

    let out = exec.map(m, |i| {
        let r = s[i];
        let mut acc = 0.0;
        let lo = ps.partition_point(|&v| v < SERIES_RATIO * r);
        let hi = ps.partition_point(|&v| v <= r / SERIES_RATIO);
        acc += 2.0 * (r.powf(beta - 1.0) * pre[lo][0] + c3 * r.powf(beta - 3.0) * pre[lo][1] + c5 * r.powf(beta - 5.0) * pre[lo][2]);
        acc += 2.0 * (r * suf[hi][0] + c3 * r.powi(3) * suf[hi][1] + c5 * r.powi(5) * suf[hi][2]);
        let qlo = i.saturating_sub(NEAR);
        let qhi = (i + NEAR).min(me - 1);
        let (nlo, nhi) = (qlo * GL_POINTS, qhi * GL_POINTS);
        for p in (lo..hi).filter(|&p| p < nlo || p >= nhi) {
            acc += pw[p] * kernel(beta, r, ps[p]);
        }
        for q in qlo..qhi {
            for p in q * GL_POINTS..(q + 1) * GL_POINTS {
                acc += pw[p] * smooth_part(beta, r, ps[p]);
            }
            let dq = s[q + 1] - s[q];
            let i0 = q.saturating_sub(1).min(me - 4);
            let mut tt = [0.0; 4];
            let mut gg = [0.0; 4];
            for a in 0..4 {
                tt[a] = (s[i0 + a] - r) / dq;
                gg[a] = s[i0 + a] * fv[i0 + a];
            }
            let coef = cubic_coefficients(tt, gg);
            let mom = singular_moments(beta, (s[q] - r) / dq, (s[q + 1] - r) / dq, dq);
            acc -= (0..4).map(|j| coef[j] * mom[j]).sum::<f64>();
        }
        // inner ball [0, s0] with f ≈ f0
        if r >= s0 / SERIES_RATIO {
            acc += 2.0 * f0 * (r.powf(beta - 1.0) * s0.powi(3) / 3.0 + c3 * r.powf(beta - 3.0) * s0.powi(5) / 5.0 + c5 * r.powf(beta - 5.0) * s0.powi(7) / 7.0);
        } else {
            for (x, w) in ix.iter().zip(&iw) {
                let sv = 0.5 * s0 * (1.0 + x);
                acc += 0.5 * s0 * w * sv * f0 * smooth_part(beta, r, sv);
            }
            // s f0 = f0 (r + s0 t) with t = (s − r)/s0
            let mom = singular_moments(beta, -r / s0, (s0 - r) / s0, s0);
            acc -= f0 * r * mom[0] + f0 * s0 * mom[1];
        }
        acc += 2.0 * (r * far_tail[0] + c3 * r.powi(3) * far_tail[1] + c5 * r.powi(5) * far_tail[2]);
        2.0 * PI * params.k_mu * acc / r
    });
    Ok(out)
}

//==============================================================================
// pairings and energies
//==============================================================================

/// ∫(I_μ ∗ f) g; the radial backend returns the symmetric part.
pub fn hls_pairing(params: &HlsParams, f: &Field, g: &Field) -> Result<f64> {
    f.check_grid(g)?;
    let opts = RieszOptions::default();
    let a = riesz_convolve(params, f, opts)?.integrate_product(g)?;
    match f {
        Field::Radial(_) => {
            let b = riesz_convolve(params, g, opts)?.integrate_product(f)?;
            Ok(0.5 * (a + b))
        }
        Field::Box(_) => Ok(a),
    }
}

/// D(u) = ∫(I_μ ∗ |u|^{2μ*})|u|^{2μ*}.
pub fn hls_self_energy(params: &HlsParams, u: &Field) -> Result<f64> {
    let w = u.map(|v| v.abs().powf(params.two_mu_star));
    let a = riesz_convolve(params, &w, RieszOptions::default())?;
    a.integrate_product(&w)
}

/// J(u) = ½‖∇u‖² − D(u)/(2·2μ*).
pub fn choquard_energy(params: &HlsParams, u: &Field) -> Result<f64> {
    let g = dirichlet_norm(u)?;
    Ok(0.5 * g * g - hls_self_energy(params, u)? / (2.0 * params.two_mu_star))
}

/// ‖∇u‖² / D(u)^{1/(2μ*)}.
pub fn hls_quotient(params: &HlsParams, u: &Field) -> Result<f64> {
    let g = dirichlet_norm(u)?;
    Ok(g * g / hls_self_energy(params, u)?.powf(1.0 / params.two_mu_star))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DoubleIntegralReport {
    pub scalings: Vec<f64>,
    pub integrals: Vec<f64>,
    pub implied_constants: Vec<f64>,
    pub spread: f64,
    pub stable: bool,
}

/// Sweep ∫(I_μ ∗ h₁^{α₁}|tρ|^{β₁}) h₂^{α₂}|tρ|^{β₂} against ‖∇(tρ)‖^{β₁+β₂}.
pub fn double_integral_bound_check(
    params: &HlsParams,
    h1: &Field,
    h2: &Field,
    rho: &Field,
    exps: (f64, f64, f64, f64),
) -> Result<DoubleIntegralReport> {
    let (a1, b1, a2, b2) = exps;
    let top = params.p_tilde + 1.0;
    for (a, b) in [(a1, b1), (a2, b2)] {
        if a < 0.0 || b < 0.0 || (a + b - top).abs() > 1e-12 || !(top > a.max(b)) {
            return Err(Error::Exponent(format!("need α+β = p̃+1 = {top} with both below it (got α={a}, β={b})")));
        }
    }
    h1.check_grid(h2)?;
    h1.check_grid(rho)?;
    let grad = dirichlet_norm(rho)?;
    let scalings = vec![1.0, 0.5, 0.25, 0.125];
    let mut integrals = Vec::new();
    let mut consts = Vec::new();
    for &t in &scalings {
        let left = h1.zip_map(rho, |h, r| h.abs().powf(a1) * (t * r).abs().powf(b1))?;
        let right = h2.zip_map(rho, |h, r| h.abs().powf(a2) * (t * r).abs().powf(b2))?;
        let v = riesz_convolve(params, &left, RieszOptions::default())?.integrate_product(&right)?;
        let shape = (t * grad).powf(b1 + b2);
        integrals.push(v);
        consts.push(if shape > 0.0 { v / shape } else { 0.0 });
    }
    let max = consts.iter().cloned().fold(f64::MIN, f64::max);
    let min = consts.iter().cloned().fold(f64::MAX, f64::min);
    let spread = if min > 0.0 { max / min } else if max == 0.0 { 1.0 } else { f64::INFINITY };
    Ok(DoubleIntegralReport { scalings, integrals, implied_constants: consts, spread, stable: spread < 3.0 })
}

/// Radial convenience: I_μ ∗ f for values on a radial grid.
pub fn radial_potential(params: &HlsParams, f: &RadialField) -> Result<Vec<f64>> {
    radial_riesz(params, &f.grid, &f.values, Exec::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_coefficients_reproduce_polynomial() {
        let t = [-1.3, 0.2, 1.1, 2.5];
        let p = |x: f64| 0.5 - 2.0 * x + 0.25 * x * x + 0.125 * x * x * x;
        let c = cubic_coefficients(t, [p(t[0]), p(t[1]), p(t[2]), p(t[3])]);
        for (a, b) in c.iter().zip([0.5, -2.0, 0.25, 0.125]) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn singular_moments_match_quadrature() {
        for beta in [-0.75, 0.0, 1.0] {
            for (t0, t1) in [(0.0, 1.0), (-2.0, -1.0), (1.5, 2.5)] {
                let m = singular_moments(beta, t0, t1, 0.3);
                let n = 20000;
                for j in 0..4 {
                    // t = t0 + (t1 − t0) v⁴ clusters nodes at t0
                    let mut q = 0.0;
                    for k in 0..n {
                        let v = (k as f64 + 0.5) / n as f64;
                        let t = t0 + (t1 - t0) * v.powi(4);
                        let w = 0.3 * t;
                        let sing = if beta == 0.0 { w.abs().ln() } else { (w.abs().powf(beta) - 1.0) / beta };
                        q += t.powi(j as i32) * sing * 0.3 * (t1 - t0) * 4.0 * v.powi(3) / n as f64;
                    }
                    let tol = 1e-6;
                    assert!((q - m[j]).abs() < tol * q.abs().max(1e-3), "beta={beta} j={j} {q} {}", m[j]);
                }
            }
        }
    }

    #[test]
    fn potential_of_bubble_power_matches_laplacian() {
        use crate::bubble::{eval_neg_laplacian, BubbleParams, Profile, Variant};
        let g = RadialGrid::default_for(3);
        let b = BubbleParams::centered(3, 1.0);
        for mu in [0.5, 1.0, 2.0, 2.75, 2.9] {
            let p = HlsParams::new(3, mu).unwrap();
            let prof = Profile::new(&p, 1.0, Variant::Choquard);
            let u: Vec<f64> = g.nodes.iter().map(|r| prof.value(r * r)).collect();
            let w: Vec<f64> = u.iter().map(|v| v.powf(p.p_tilde + 1.0)).collect();
            let pot = radial_riesz(&p, &g, &w, Exec::default()).unwrap();
            for (i, &r) in g.nodes.iter().enumerate() {
                let exact = eval_neg_laplacian(&p, &b, Variant::Choquard, &[r, 0.0, 0.0]) / u[i].powf(p.p_tilde);
                assert!(((pot[i] - exact) / exact).abs() < 1e-8, "mu={mu} r={r}");
            }
        }
    }

    #[test]
    fn kernel_limits() {
        // β = 1: k = 2 min(r, s)
        assert!((kernel(1.0, 2.0, 0.5) - 1.0).abs() < 1e-14);
        assert!((kernel(1.0, 0.5, 2.0) - 1.0).abs() < 1e-14);
        let v = kernel(1e-9, 2.0, 1.0);
        assert!((v - kernel(0.0, 2.0, 1.0)).abs() < 1e-8);
    }
}
