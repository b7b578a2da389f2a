//! Log-spaced radial grid for radially symmetric fields in R^N.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::special::gamma;

/// Surface area of the unit sphere S^{N-1}.
pub fn sphere_area(n: usize) -> f64 {
    let nf = n as f64;
    2.0 * PI.powf(nf / 2.0) / gamma(nf / 2.0)
}

#[derive(Debug, Clone)]
pub struct RadialGrid {
    pub n_dim: usize,
    pub r_min: f64,
    pub r_max: f64,
    pub nodes: Vec<f64>,
    /// Spacing in ξ = ln r.
    pub h: f64,
}

impl PartialEq for RadialGrid {
    fn eq(&self, o: &Self) -> bool {
        self.n_dim == o.n_dim && self.r_min == o.r_min && self.r_max == o.r_max && self.nodes.len() == o.nodes.len()
    }
}

impl RadialGrid {
    pub fn new(n_dim: usize, r_min: f64, r_max: f64, m: usize) -> Result<Self> {
        if !(r_min > 0.0 && r_max > r_min) || m < 16 {
            return Err(Error::Domain(format!("bad radial grid [{r_min}, {r_max}] with {m} nodes")));
        }
        let (a, b) = (r_min.ln(), r_max.ln());
        let h = (b - a) / (m - 1) as f64;
        let mut nodes: Vec<f64> = (0..m).map(|i| (a + h * i as f64).exp()).collect();
        nodes[0] = r_min;
        nodes[m - 1] = r_max;
        Ok(RadialGrid { n_dim, r_min, r_max, nodes, h })
    }

    /// Default grid: [1e-4, 1e4] with 4096 nodes.
    pub fn default_for(n_dim: usize) -> Self {
        Self::new(n_dim, 1e-4, 1e4, 4096).expect("valid default grid")
    }

    /// Same span with 2M−1 nodes (every old node is kept).
    pub fn refined(&self) -> Self {
        Self::new(self.n_dim, self.r_min, self.r_max, 2 * self.len() - 1).expect("valid refinement")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn omega(&self) -> f64 {
        sphere_area(self.n_dim)
    }

    /// ∫_{R^N} f dx for radial f given at the nodes.
    pub fn integrate(&self, f: &[f64]) -> Result<f64> {
        let nf = self.n_dim as f64;
        let g: Vec<f64> = f.iter().zip(&self.nodes).map(|(f, r)| f * r.powf(nf)).collect();
        Ok(self.omega() * integrate_log(&g, self.h, nf)?)
    }

    /// d f / dξ with fourth-order differences.
    pub fn d_xi(&self, f: &[f64]) -> Vec<f64> {
        diff1(f, self.h)
    }

    /// Radial Laplacian r^{-2}(f_ξξ + (N−2) f_ξ).
    pub fn laplacian(&self, f: &[f64]) -> Vec<f64> {
        let d1 = diff1(f, self.h);
        let d2 = diff2(f, self.h);
        let nf = self.n_dim as f64;
        self.nodes
            .iter()
            .zip(d1.iter().zip(&d2))
            .map(|(r, (a, b))| (b + (nf - 2.0) * a) / (r * r))
            .collect()
    }

    /// ∫∇f·∇g dx.
    pub fn dirichlet_inner(&self, f: &[f64], g: &[f64]) -> Result<f64> {
        let nf = self.n_dim as f64;
        let df = diff1(f, self.h);
        let dg = diff1(g, self.h);
        let w: Vec<f64> = df
            .iter()
            .zip(&dg)
            .zip(&self.nodes)
            .map(|((a, b), r)| a * b * r.powf(nf - 2.0))
            .collect();
        Ok(self.omega() * integrate_log_rates(&w, self.h, nf, Some(nf - 2.0))?)
    }

    /// Cubic interpolation in ξ; constant below r_min and zero above r_max.
    pub fn interpolate(&self, f: &[f64], r: f64) -> f64 {
        if r <= self.r_min {
            return f[0];
        }
        if r > self.r_max {
            return 0.0;
        }
        let t = (r.ln() - self.r_min.ln()) / self.h;
        let m = self.len();
        let i = (t.floor() as isize).clamp(1, m as isize - 3) as usize;
        let u = t - i as f64;
        let (f0, f1, f2, f3) = (f[i - 1], f[i], f[i + 1], f[i + 2]);
        let l0 = -u * (u - 1.0) * (u - 2.0) / 6.0;
        let l1 = (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0;
        let l2 = -(u + 1.0) * u * (u - 2.0) / 2.0;
        let l3 = (u + 1.0) * u * (u - 1.0) / 6.0;
        f0 * l0 + f1 * l1 + f2 * l2 + f3 * l3
    }

    /// Enclosed mass m(r) = ∫_0^r f s^{N−1} ds at every node (fourth order).
    pub fn cumulative_mass(&self, f: &[f64]) -> Vec<f64> {
        let nf = self.n_dim as f64;
        let g: Vec<f64> = f.iter().zip(&self.nodes).map(|(f, r)| f * r.powf(nf)).collect();
        let mut out = vec![0.0; g.len()];
        out[0] = g[0] / nf;
        for i in 0..g.len() - 1 {
            out[i + 1] = out[i] + interval_integral(&g, i, self.h);
        }
        out
    }

    /// Cumulative ∫_r^{r_max} q(s) ds/s at every node (q given at nodes), fourth order.
    pub fn cumulative_from_top(&self, q: &[f64]) -> Vec<f64> {
        let m = q.len();
        let mut out = vec![0.0; m];
        for i in (0..m - 1).rev() {
            out[i] = out[i + 1] + interval_integral(q, i, self.h);
        }
        out
    }
}

/// ∫ g_i dξ over ξ ∈ [ξ_i, ξ_{i+1}] using the local cubic.
fn interval_integral(g: &[f64], i: usize, h: f64) -> f64 {
    let m = g.len();
    if i >= 1 && i + 2 < m {
        h / 24.0 * (-g[i - 1] + 13.0 * g[i] + 13.0 * g[i + 1] - g[i + 2])
    } else if i == 0 && m >= 3 {
        h / 12.0 * (5.0 * g[0] + 8.0 * g[1] - g[2])
    } else if i + 2 >= m && i >= 1 {
        h / 12.0 * (-g[i - 1] + 8.0 * g[i] + 5.0 * g[i + 1])
    } else {
        0.5 * h * (g[i] + g[i + 1])
    }
}

/// Trapezoid in ξ with exponential end tails and end corrections.
///
/// `g` is the ξ-integrand; `lower_rate` is the expected growth rate of g at
/// the lower end when it cannot be read off the data.
pub fn integrate_log(g: &[f64], h: f64, lower_rate: f64) -> Result<f64> {
    integrate_log_rates(g, h, lower_rate, None)
}

/// As [`integrate_log`], with the upper tail rate prescribed instead of read off the data;
/// an infinite rate drops the tail.
pub fn integrate_log_rates(g: &[f64], h: f64, lower_rate: f64, upper_rate: Option<f64>) -> Result<f64> {
    let m = g.len();
    let scale = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return Ok(0.0);
    }
    let mut t: f64 = g.iter().sum::<f64>() - 0.5 * (g[0] + g[m - 1]);
    t *= h;
    // lower tail
    let a0 = if g[0] != 0.0 && g[0].signum() == g[1].signum() && g[1] / g[0] > 1.0 {
        (g[1] / g[0]).ln() / h
    } else {
        lower_rate
    };
    t += g[0] / a0 + h * h / 12.0 * a0 * g[0];
    // upper tail
    let (gm, gp) = (g[m - 1], g[m - 2]);
    if let Some(a1) = upper_rate {
        if a1.is_finite() {
            t += gm / a1 + h * h / 12.0 * a1 * gm;
        }
    } else if gm.abs() > 1e-13 * scale {
        if gm.signum() != gp.signum() || gm.abs() >= gp.abs() {
            return Err(Error::Boundary(format!(
                "integrand does not decay at the outer boundary (last values {gp:.3e}, {gm:.3e})"
            )));
        }
        let a1 = (gp / gm).ln() / h;
        t += gm / a1 + h * h / 12.0 * a1 * gm;
    }
    Ok(t)
}

fn diff1(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    let mut d = vec![0.0; m];
    let c = 1.0 / (12.0 * h);
    for i in 2..m - 2 {
        d[i] = c * (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]);
    }
    d[0] = c * (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]);
    d[1] = c * (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]);
    let e = m - 1;
    d[e] = -c * (-25.0 * f[e] + 48.0 * f[e - 1] - 36.0 * f[e - 2] + 16.0 * f[e - 3] - 3.0 * f[e - 4]);
    d[e - 1] = -c * (-3.0 * f[e] - 10.0 * f[e - 1] + 18.0 * f[e - 2] - 6.0 * f[e - 3] + f[e - 4]);
    d
}

fn diff2(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len();
    let mut d = vec![0.0; m];
    let c = 1.0 / (12.0 * h * h);
    for i in 2..m - 2 {
        d[i] = c * (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]);
    }
    let one = |f0: f64, f1: f64, f2: f64, f3: f64, f4: f64, f5: f64| {
        (45.0 * f0 - 154.0 * f1 + 214.0 * f2 - 156.0 * f3 + 61.0 * f4 - 10.0 * f5) * c
    };
    let two = |f0: f64, f1: f64, f2: f64, f3: f64, f4: f64, f5: f64| {
        (10.0 * f0 - 15.0 * f1 - 4.0 * f2 + 14.0 * f3 - 6.0 * f4 + f5) * c
    };
    d[0] = one(f[0], f[1], f[2], f[3], f[4], f[5]);
    d[1] = two(f[0], f[1], f[2], f[3], f[4], f[5]);
    let e = m - 1;
    d[e] = one(f[e], f[e - 1], f[e - 2], f[e - 3], f[e - 4], f[e - 5]);
    d[e - 1] = two(f[e], f[e - 1], f[e - 2], f[e - 3], f[e - 4], f[e - 5]);
    d
}
