//! Field backends: a log-radial grid and a periodic 3D box.

pub mod conv;
pub mod cube;
pub mod fft;
pub mod io;
pub mod radial;

pub use cube::{BoxGrid, PeriodicDualNorm};
pub use radial::RadialGrid;

use crate::bubble::{BubbleFamily, BubbleParams, ConformalMap, Profile, Variant};
use crate::error::{Error, Result};
use crate::par::Exec;
use crate::params::HlsParams;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxField {
    pub grid: BoxGrid,
    pub values: Vec<f64>,
}

/// A sampled scalar field on either backend.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Radial(RadialField),
    Box(BoxField),
}

impl Field {
    pub fn radial(grid: RadialGrid, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "value count must match the grid");
        Field::Radial(RadialField { grid, values })
    }

    pub fn cube(grid: BoxGrid, values: Vec<f64>) -> Self {
        assert_eq!(grid.len(), values.len(), "value count must match the grid");
        Field::Box(BoxField { grid, values })
    }

    pub fn values(&self) -> &[f64] {
        match self {
            Field::Radial(f) => &f.values,
            Field::Box(f) => &f.values,
        }
    }

    pub fn values_mut(&mut self) -> &mut Vec<f64> {
        match self {
            Field::Radial(f) => &mut f.values,
            Field::Box(f) => &mut f.values,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Field::Radial(f) => f.grid.n_dim,
            Field::Box(_) => 3,
        }
    }

    pub fn zeros_like(&self) -> Self {
        self.with_values(vec![0.0; self.values().len()])
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        match self {
            Field::Radial(f) => Field::radial(f.grid.clone(), values),
            Field::Box(f) => Field::cube(f.grid, values),
        }
    }

    pub fn same_grid(&self, o: &Field) -> bool {
        match (self, o) {
            (Field::Radial(a), Field::Radial(b)) => a.grid == b.grid,
            (Field::Box(a), Field::Box(b)) => a.grid == b.grid,
            _ => false,
        }
    }

    pub fn check_grid(&self, o: &Field) -> Result<()> {
        if self.same_grid(o) {
            Ok(())
        } else {
            Err(Error::GridMismatch("fields live on different grids".into()))
        }
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        self.with_values(self.values().iter().map(|&v| f(v)).collect())
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, o: &Field, f: F) -> Result<Self> {
        self.check_grid(o)?;
        Ok(self.with_values(self.values().iter().zip(o.values()).map(|(&a, &b)| f(a, b)).collect()))
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, o: &Field) -> Result<Self> {
        self.zip_map(o, |a, b| a + b)
    }

    pub fn sub(&self, o: &Field) -> Result<Self> {
        self.zip_map(o, |a, b| a - b)
    }

    pub fn axpy(&self, a: f64, o: &Field) -> Result<Self> {
        self.zip_map(o, |x, y| x + a * y)
    }

    /// ∫ f dx.
    pub fn integrate(&self) -> Result<f64> {
        match self {
            Field::Radial(f) => f.grid.integrate(&f.values),
            Field::Box(f) => Ok(f.grid.integrate(&f.values)),
        }
    }

    /// ∫ f g dx.
    pub fn integrate_product(&self, o: &Field) -> Result<f64> {
        self.zip_map(o, |a, b| a * b)?.integrate()
    }

    pub fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Reject fields that are not negligible at the outer boundary.
    pub fn check_decay(&self) -> Result<()> {
        match self {
            Field::Radial(f) => {
                let m = f.values.len();
                let max = self.max_abs();
                let (a, b) = (f.values[m - 2].abs(), f.values[m - 1].abs());
                if max > 0.0 && b > 1e-14 * max && b >= a {
                    return Err(Error::Boundary(format!("radial field does not decay at r_max (ratio {:.3e})", b / max)));
                }
                Ok(())
            }
            Field::Box(f) => f.grid.check_decay(&f.values),
        }
    }
}

/// (∫|f|^q)^{1/q}.
pub fn lp_norm(f: &Field, q: f64) -> Result<f64> {
    if q < 1.0 {
        return Err(Error::Domain(format!("q={q} must be at least 1")));
    }
    let v = f.map(|x| x.abs().powf(q)).integrate()?;
    Ok(v.max(0.0).powf(1.0 / q))
}

/// ‖∇f‖_{L²}.
pub fn dirichlet_norm(f: &Field) -> Result<f64> {
    f.check_decay()?;
    dirichlet_norm_unchecked(f)
}

/// ‖∇f‖_{L²} without the decay check, for fields at roundoff level.
pub fn dirichlet_norm_unchecked(f: &Field) -> Result<f64> {
    Ok(dirichlet_energy(f)?.max(0.0).sqrt())
}

fn dirichlet_energy(f: &Field) -> Result<f64> {
    match f {
        Field::Radial(r) => r.grid.dirichlet_inner(&r.values, &r.values),
        Field::Box(b) => Ok(b.grid.dirichlet_energy(&b.values, Exec::default())),
    }
}

/// ∫∇f·∇g.
pub fn dirichlet_inner(f: &Field, g: &Field) -> Result<f64> {
    f.check_grid(g)?;
    match (f, g) {
        (Field::Radial(a), Field::Radial(b)) => a.grid.dirichlet_inner(&a.values, &b.values),
        (Field::Box(a), Field::Box(b)) => Ok(a.grid.dirichlet_inner(&a.values, &b.values, Exec::default())),
        _ => unreachable!(),
    }
}

/// Grid on which to sample.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSpec {
    Radial(RadialGrid),
    Box(BoxGrid),
}

impl GridSpec {
    pub fn of(f: &Field) -> Self {
        match f {
            Field::Radial(r) => GridSpec::Radial(r.grid.clone()),
            Field::Box(b) => GridSpec::Box(b.grid),
        }
    }
}

/// A bubble whose scale is too fine for the grid spacing.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionWarning {
    pub index: usize,
    pub lambda: f64,
    pub lambda_h: f64,
}

/// Heuristic λ·h ≤ 1 check for box sampling.
pub fn resolution_warnings(grid: &BoxGrid, family: &BubbleFamily) -> Vec<ResolutionWarning> {
    let h = grid.h();
    family
        .members
        .iter()
        .enumerate()
        .filter(|(_, m)| m.params.lambda * h > 1.0)
        .map(|(i, m)| ResolutionWarning { index: i, lambda: m.params.lambda, lambda_h: m.params.lambda * h })
        .collect()
}

pub fn sample_bubble(grid: &GridSpec, params: &HlsParams, b: &BubbleParams, variant: Variant) -> Result<Field> {
    sample_family(grid, params, &BubbleFamily::single(variant, b.clone()))
}

/// σ = Σ α_i Ũ_i sampled on the grid.
pub fn sample_family(grid: &GridSpec, params: &HlsParams, family: &BubbleFamily) -> Result<Field> {
    let profiles: Vec<(f64, Profile, &[f64])> = family
        .members
        .iter()
        .map(|m| (m.alpha, Profile::new(params, m.params.lambda, family.variant), m.params.z.as_slice()))
        .collect();
    match grid {
        GridSpec::Radial(g) => {
            if family.members.iter().any(|m| m.params.z.iter().any(|&v| v != 0.0)) {
                return Err(Error::Unsupported("radial grids only hold bubbles centred at the origin".into()));
            }
            let vals = g
                .nodes
                .iter()
                .map(|r| profiles.iter().map(|(a, p, _)| a * p.value(r * r)).sum())
                .collect();
            Ok(Field::radial(g.clone(), vals))
        }
        GridSpec::Box(g) => {
            if params.n != 3 {
                return Err(Error::Unsupported("box backend is three-dimensional".into()));
            }
            for w in resolution_warnings(g, family) {
                log::warn!("bubble {} under-resolved: lambda*h = {:.3}", w.index, w.lambda_h);
            }
            let vals = g.sample(
                |x| {
                    profiles
                        .iter()
                        .map(|(a, p, z)| {
                            let r2 = (x[0] - z[0]).powi(2) + (x[1] - z[1]).powi(2) + (x[2] - z[2]).powi(2);
                            a * p.value(r2)
                        })
                        .sum()
                },
                Exec::default(),
            );
            Ok(Field::cube(*g, vals))
        }
    }
}

/// Resample T_{z,λ} f = λ^{(N−2)/2} f(λ(x − z)) on f's grid.
pub fn apply_conformal(params: &HlsParams, map: &ConformalMap, f: &Field) -> Result<Field> {
    let nf = params.n as f64;
    let amp = map.lambda.powf((nf - 2.0) / 2.0);
    let out = match f {
        Field::Radial(r) => {
            if map.z.iter().any(|&v| v != 0.0) {
                return Err(Error::Unsupported("radial grids only support centred maps".into()));
            }
            let vals = r.grid.nodes.iter().map(|&x| amp * r.grid.interpolate(&r.values, map.lambda * x)).collect();
            Field::radial(r.grid.clone(), vals)
        }
        Field::Box(b) => {
            let g = b.grid;
            let vals = g.sample(
                |x| {
                    let mut y = [0.0; 3];
                    map.source_point(&x, &mut y);
                    g.interpolate(&b.values, y).map_or(0.0, |v| amp * v)
                },
                Exec::default(),
            );
            Field::cube(g, vals)
        }
    };
    // T preserves the L^{2*} norm; a deficit means mass left the grid
    let q = params.two_star;
    let before = lp_norm(f, q)?.powf(q);
    let after = lp_norm(&out, q)?.powf(q);
    if before > 0.0 && (before - after) / before > 0.01 {
        return Err(Error::Support(format!("{:.2}% of the transformed mass falls outside the grid", 100.0 * (before - after) / before)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_are_homogeneous() {
        let p = HlsParams::new(3, 2.75).unwrap();
        let g = GridSpec::Radial(RadialGrid::default_for(3));
        let u = sample_bubble(&g, &p, &BubbleParams::centered(3, 1.0), Variant::Choquard).unwrap();
        let a = lp_norm(&u, 6.0).unwrap();
        let b = lp_norm(&u.scale(-2.5), 6.0).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-13 * b);
        assert_eq!(lp_norm(&u.zeros_like(), 3.0).unwrap(), 0.0);
        assert_eq!(dirichlet_norm(&u.zeros_like()).unwrap(), 0.0);
    }

    #[test]
    fn l6_norm_matches_beta_integral() {
        // ∫ U⁶ = 3^{3/2} · 4π · π/16 for U = U[0,1], N = 3
        let p = HlsParams::new(3, 2.75).unwrap();
        let g = GridSpec::Radial(RadialGrid::default_for(3));
        let u = sample_bubble(&g, &p, &BubbleParams::centered(3, 1.0), Variant::Sobolev).unwrap();
        let v = lp_norm(&u, 6.0).unwrap().powi(6);
        let exact = 3f64.powf(1.5) * std::f64::consts::PI.powi(2) / 4.0;
        assert!((v - exact).abs() < 1e-10 * exact, "{v} vs {exact}");
    }
}
