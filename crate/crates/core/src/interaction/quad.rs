//! Axisymmetric quadrature for integrands concentrated at points on one axis.
//!
//! An integrand f(x₁, ρ⊥) on R^N that is symmetric about the x₁ axis is split
//! with a smooth partition of unity centred at each concentration point and
//! every piece is integrated in spherical coordinates (r, θ) about its centre:
//! log-spaced radial panels and angular panels graded towards both poles.

use std::sync::OnceLock;

use crate::grid::radial::sphere_area;
use crate::par::Exec;
use crate::special::gauss_legendre;

const RADIAL_PANEL: f64 = 0.25;
const RADIAL_GL: usize = 8;
const ANGLE_GL: usize = 6;
const ANGLE_FLOOR: f64 = 1e-7;
const ANGLE_RATIO: f64 = 3.0;
const SPAN: f64 = 1e7;

/// A concentration point at axial position `pos` with scale 1/`lambda`.
#[derive(Debug, Clone, Copy)]
pub struct Center {
    pub pos: f64,
    pub lambda: f64,
}

impl Center {
    fn weight(&self, d2: f64) -> f64 {
        let l2 = self.lambda * self.lambda;
        let q = self.lambda / (1.0 + l2 * d2);
        q * q
    }
}

fn rule(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static R8: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    static R6: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    match n {
        RADIAL_GL => R8.get_or_init(|| gauss_legendre(RADIAL_GL)),
        _ => R6.get_or_init(|| gauss_legendre(ANGLE_GL)),
    }
}

fn panel_nodes(edges: &[f64], n: usize, out: &mut Vec<(f64, f64)>) {
    let (x, w) = rule(n);
    for e in edges.windows(2) {
        let (c, hw) = (0.5 * (e[0] + e[1]), 0.5 * (e[1] - e[0]));
        for (xi, wi) in x.iter().zip(w) {
            out.push((c + hw * xi, hw * wi));
        }
    }
}

/// (θ, w·sin^{N−2}θ) nodes on [0, π].
fn angle_nodes(n: usize) -> Vec<(f64, f64)> {
    let mut low = vec![0.0];
    let mut t = ANGLE_FLOOR;
    while t < 0.4 {
        low.push(t);
        t *= ANGLE_RATIO;
    }
    let a = *low.last().unwrap();
    let b = std::f64::consts::PI - a;
    let mid = ((b - a) / 0.15).ceil() as usize;
    let mut edges = low.clone();
    for k in 1..=mid {
        edges.push(a + (b - a) * k as f64 / mid as f64);
    }
    for &v in low.iter().rev().skip(1) {
        edges.push(std::f64::consts::PI - v);
    }
    let mut out = Vec::new();
    panel_nodes(&edges, ANGLE_GL, &mut out);
    out.into_iter()
        .map(|(th, w)| (th, w * th.sin().powi(n as i32 - 2)))
        .collect()
}

/// (r, w·r^{N−1}·dr) nodes on [lo, hi] with log-spaced panels.
fn radial_nodes(n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    let (a, b) = (lo.ln(), hi.ln());
    let m = ((b - a) / RADIAL_PANEL).ceil().max(1.0) as usize;
    let edges: Vec<f64> = (0..=m).map(|k| a + (b - a) * k as f64 / m as f64).collect();
    let mut out = Vec::new();
    panel_nodes(&edges, RADIAL_GL, &mut out);
    out.into_iter()
        .map(|(xi, w)| {
            let r = xi.exp();
            (r, w * r.powi(n as i32))
        })
        .collect()
}

fn scales(centers: &[Center]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for c in centers {
        lo = lo.min(1.0 / c.lambda);
        hi = hi.max(1.0 / c.lambda);
        for d in centers {
            let gap = (c.pos - d.pos).abs();
            if gap > 0.0 {
                lo = lo.min(gap);
                hi = hi.max(gap);
            }
        }
    }
    (lo, hi)
}

/// ∫_{R^N} f(x₁, |x⊥|) dx.
pub fn axis_integral<F>(n: usize, centers: &[Center], f: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    let (lo, hi) = scales(centers);
    let radial = radial_nodes(n, lo / SPAN, hi * SPAN);
    let angles = angle_nodes(n);
    let trig: Vec<(f64, f64, f64)> = angles.iter().map(|&(t, w)| (t.cos(), t.sin(), w)).collect();
    let mut total = 0.0;
    for c in centers {
        let parts = Exec::default().map(radial.len(), |i| {
            let (r, wr) = radial[i];
            let mut acc = 0.0;
            for &(ct, st, wt) in &trig {
                let x = c.pos + r * ct;
                let p = r * st;
                let own = c.weight(r * r);
                let sum: f64 = centers
                    .iter()
                    .map(|d| d.weight((x - d.pos) * (x - d.pos) + p * p))
                    .sum();
                let v = f(x, p);
                if v != 0.0 {
                    acc += wt * v * own / sum;
                }
            }
            acc * wr
        });
        total += parts.into_iter().sum::<f64>();
    }
    total * sphere_area(n - 1)
}

/// ∫_{B(c, radius)} f(x₁, |x⊥|) dx for an integrand resolved on scales ≥ `floor`.
pub fn ball_integral<F>(n: usize, pos: f64, radius: f64, floor: f64, f: F) -> f64
where
    F: Fn(f64, f64) -> f64 + Sync + Send,
{
    let radial = radial_nodes(n, floor.min(radius) / SPAN, radius);
    let angles = angle_nodes(n);
    let parts = Exec::default().map(radial.len(), |i| {
        let (r, wr) = radial[i];
        let acc: f64 = angles
            .iter()
            .map(|&(t, wt)| wt * f(pos + r * t.cos(), r * t.sin()))
            .sum();
        acc * wr
    });
    parts.into_iter().sum::<f64>() * sphere_area(n - 1)
}

/// ∫_{|x|>radius} g(|x|) dx for a radial integrand decaying faster than |x|^{−N}.
pub fn exterior_radial<F: Fn(f64) -> f64>(n: usize, radius: f64, g: F) -> f64 {
    let radial = radial_nodes(n, radius, radius * SPAN);
    radial.iter().map(|&(r, w)| w * g(r)).sum::<f64>() * sphere_area(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_volume_two_centers() {
        for n in [3usize, 4, 5] {
            let c = [Center { pos: 0.0, lambda: 1.0 }, Center { pos: 3.0, lambda: 20.0 }];
            let v = axis_integral(n, &c, |x, p| (-(x * x + p * p)).exp());
            let exact = std::f64::consts::PI.powf(n as f64 / 2.0);
            assert!((v - exact).abs() < 1e-10 * exact, "n={n}: {v} vs {exact}");
        }
    }

    #[test]
    fn ball_volume() {
        let v = ball_integral(3, 0.5, 2.0, 1.0, |_, _| 1.0);
        let exact = 4.0 / 3.0 * std::f64::consts::PI * 8.0;
        assert!((v - exact).abs() < 1e-12 * exact);
    }
}
