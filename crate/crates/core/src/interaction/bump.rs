use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::is_delta_interacting_bubbles;
use super::quad::{ball_integral, exterior_radial};
use crate::bubble::{BubbleFamily, ConformalMap, Profile, Variant};
use crate::error::{Error, Result};
use crate::grid::radial::sphere_area;
use crate::grid::{Field, GridSpec};
use crate::par::Exec;
use crate::params::HlsParams;

/// Exclusion around a concentrated bubble: Φ vanishes within `inner` of
/// `center` and the ramp reaches 1 at `outer` = `inner`/ε.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerRamp {
    pub index: usize,
    pub center: Vec<f64>,
    pub inner: f64,
    pub outer: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub epsilon: f64,
    pub eta: f64,
    pub delta: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub inner_exclusion_radii: Vec<InnerRamp>,
    pub target_index: usize,
}

/// Lipschitz cut-off built from log-linear ramps.
#[derive(Debug, Clone, PartialEq)]
pub struct Bump {
    pub n: usize,
    pub spec: BumpSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpReport {
    pub epsilon: f64,
    /// ∫_{Φ<1} U_i^{p+1}.
    pub tail_mass: f64,
    /// ∫_{Φ<1} |∇U_i|².
    pub tail_gradient: f64,
    /// ‖∇Φ‖_{L^N}; exact when the ramps are disjoint, a Minkowski bound otherwise.
    pub grad_phi_ln: f64,
    pub ramps_disjoint: bool,
    pub lipschitz: f64,
    /// max over samples in {Φ>0} of max_{j≠i} Ũ_j/(εŨ_i).
    pub dominance_max: f64,
    /// max over j≠i with λ_j ≤ λ_i of sup/inf U_j on the samples.
    pub oscillation_max: f64,
    pub samples: usize,
    pub mass_ok: bool,
    pub gradient_ok: bool,
    pub dominance_ok: bool,
    pub oscillation_ok: bool,
}

fn ramp_down(r: f64, lo: f64, hi: f64) -> f64 {
    if r <= lo {
        1.0
    } else if r >= hi {
        0.0
    } else {
        (hi / r).ln() / (hi / lo).ln()
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl Bump {
    pub fn eval(&self, x: &[f64]) -> f64 {
        let eps = self.spec.epsilon;
        let mut v = ramp_down(norm(x), eps * self.spec.r, self.spec.r);
        for ramp in &self.spec.inner_exclusion_radii {
            if v == 0.0 {
                break;
            }
            if ramp.inner > 0.0 {
                v *= 1.0 - ramp_down(dist(x, &ramp.center), ramp.inner, ramp.outer);
            }
        }
        v
    }

    fn ramp_log_width(&self) -> f64 {
        (1.0 / self.spec.epsilon).ln()
    }

    /// Σ over ramps of sup|∇ramp|, a Lipschitz constant for Φ.
    pub fn lipschitz(&self) -> f64 {
        let w = self.ramp_log_width();
        let outer = 1.0 / (self.spec.epsilon * self.spec.r * w);
        outer
            + self
                .spec
                .inner_exclusion_radii
                .iter()
                .filter(|r| r.inner > 0.0)
                .map(|r| 1.0 / (r.inner * w))
                .sum::<f64>()
    }

    /// True when no two ramp annuli overlap.
    pub fn ramps_disjoint(&self) -> bool {
        let eps_r = self.spec.epsilon * self.spec.r;
        let active: Vec<&InnerRamp> = self.spec.inner_exclusion_radii.iter().filter(|r| r.inner > 0.0).collect();
        let clear_of_outer = active.iter().all(|r| {
            let c = norm(&r.center);
            c + r.outer <= eps_r || c - r.outer >= self.spec.r
        });
        let pairwise = active.iter().enumerate().all(|(k, a)| {
            active[k + 1..].iter().all(|b| dist(&a.center, &b.center) >= a.outer + b.outer)
        });
        clear_of_outer && pairwise
    }

    /// ‖∇Φ‖_{L^N}. Each log ramp contributes ω_{N−1}·ln(1/ε)^{1−N} to the N-th power.
    pub fn grad_ln_norm(&self) -> f64 {
        let nf = self.n as f64;
        let one = sphere_area(self.n) * self.ramp_log_width().powf(1.0 - nf);
        let ramps = 1 + self.spec.inner_exclusion_radii.iter().filter(|r| r.inner > 0.0).count();
        if self.ramps_disjoint() {
            (one * ramps as f64).powf(1.0 / nf)
        } else {
            ramps as f64 * one.powf(1.0 / nf)
        }
    }

    /// Φ sampled on a grid; the radial backend only carries the pure outer ramp.
    pub fn sample(&self, grid: &GridSpec) -> Result<Field> {
        match grid {
            GridSpec::Radial(g) => {
                if g.n_dim != self.n {
                    return Err(Error::GridMismatch("bump and grid dimensions differ".into()));
                }
                if self.spec.inner_exclusion_radii.iter().any(|r| r.inner > 0.0) {
                    return Err(Error::Unsupported("inner ramps are not radial".into()));
                }
                let eps = self.spec.epsilon;
                let v = g.nodes.iter().map(|&r| ramp_down(r, eps * self.spec.r, self.spec.r)).collect();
                Ok(Field::radial(g.clone(), v))
            }
            GridSpec::Box(b) => {
                if self.n != 3 {
                    return Err(Error::GridMismatch("box grids are three-dimensional".into()));
                }
                Ok(Field::cube(*b, b.sample(|x| self.eval(&x), Exec::default())))
            }
        }
    }
}

/// The map sending bubble `i` to U[0, 1].
pub fn normalizing_map(family: &BubbleFamily, i: usize) -> ConformalMap {
    let b = &family.members[i].params;
    ConformalMap::new(b.z.iter().map(|z| -z * b.lambda).collect(), 1.0 / b.lambda)
}

/// The family mapped by [`normalizing_map`], with bubble `i` set exactly to U[0, 1].
pub fn normalize_family(family: &BubbleFamily, i: usize) -> BubbleFamily {
    let mut out = normalizing_map(family, i).apply_family(family);
    let n = out.members[i].params.z.len();
    out.members[i].params = crate::bubble::BubbleParams::centered(n, 1.0);
    out
}

/// Localization bump around bubble `i` of a family normalized so that bubble `i` is U[0, 1].
pub fn make_bump(params: &HlsParams, family: &BubbleFamily, i: usize, epsilon: f64, eta: f64) -> Result<(BumpSpec, Bump)> {
    let n = params.n;
    let nf = n as f64;
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain(format!("epsilon={epsilon} must lie in (0, 1)")));
    }
    if !(eta >= 16.0) {
        return Err(Error::Domain(format!("eta={eta} must be at least 16")));
    }
    let target = family
        .members
        .get(i)
        .ok_or_else(|| Error::Domain(format!("index {i} out of range for a family of {}", family.len())))?;
    if (target.params.lambda - 1.0).abs() > 1e-12 || norm(&target.params.z) > 1e-12 {
        return Err(Error::Domain(format!(
            "bubble {i} must be normalized to z=0, lambda=1 (apply normalizing_map first)"
        )));
    }
    let delta = epsilon.powf(eta - 2.0 / (nf - 2.0));
    if !is_delta_interacting_bubbles(family, delta) {
        return Err(Error::Regime(format!("family is not {delta:e}-interacting")));
    }
    let r = epsilon.powi(-2);
    let a = (nf - 2.0) / 2.0;
    let c = epsilon.powf(1.0 / a) / (1.0 + r * r);
    let inner_exclusion_radii = family
        .members
        .iter()
        .enumerate()
        .filter(|(j, m)| *j != i && m.params.lambda > 1.0 && norm(&m.params.z) < 2.0 * r)
        .map(|(j, m)| {
            let l = m.params.lambda;
            let inner = (l / c - 1.0).max(0.0).sqrt() / l;
            InnerRamp { index: j, center: m.params.z.clone(), inner, outer: inner / epsilon }
        })
        .collect();
    let spec = BumpSpec { epsilon, eta, delta, r, inner_exclusion_radii, target_index: i };
    Ok((spec.clone(), Bump { n, spec }))
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi / lo).ln() * rng.random::<f64>()).exp()
}

/// Numerical check of the bump's four properties for a normalized family.
pub fn verify_bump(params: &HlsParams, family: &BubbleFamily, bump: &Bump, samples: usize, seed: u64) -> Result<BumpReport> {
    let n = params.n;
    let spec = &bump.spec;
    let eps = spec.epsilon;
    let u = Profile::new(params, 1.0, Variant::Sobolev);
    let two_star = params.p + 1.0;

    // {Φ<1} ⊂ {|x|>εR} ∪ ⋃_j B(z_j, R_j/ε); the pieces are summed.
    let mut tail_mass = exterior_radial(n, eps * spec.r, |r| u.value(r * r).powf(two_star));
    let mut tail_gradient = exterior_radial(n, eps * spec.r, |r| {
        let g = u.dz_factor(r * r) * r;
        g * g
    });
    for ramp in spec.inner_exclusion_radii.iter().filter(|r| r.inner > 0.0) {
        let c = norm(&ramp.center);
        tail_mass += ball_integral(n, 0.0, ramp.outer, ramp.outer, |x, p| {
            u.value((x - c) * (x - c) + p * p).powf(two_star)
        });
        tail_gradient += ball_integral(n, 0.0, ramp.outer, ramp.outer, |x, p| {
            let r2 = (x - c) * (x - c) + p * p;
            let g = u.dz_factor(r2);
            g * g * r2
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let profiles: Vec<(usize, Profile, &[f64])> = family
        .members
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != spec.target_index)
        .map(|(j, m)| (j, Profile::new(params, m.params.lambda, Variant::Choquard), m.params.z.as_slice()))
        .collect();
    let ui = Profile::new(params, 1.0, Variant::Choquard);
    let active: Vec<&InnerRamp> = spec.inner_exclusion_radii.iter().filter(|r| r.inner > 0.0).collect();
    let mut dominance_max = 0.0f64;
    let mut lo = vec![f64::INFINITY; profiles.len()];
    let mut hi = vec![0.0f64; profiles.len()];
    let mut accepted = 0;
    let mut attempts = 0usize;
    while accepted < samples && attempts < 100 * samples.max(1) {
        attempts += 1;
        let slot = rng.random_range(0..=active.len());
        let x: Vec<f64> = if slot == 0 {
            let r = log_uniform(&mut rng, 1e-3, spec.r);
            random_direction(&mut rng, n).into_iter().map(|d| d * r).collect()
        } else {
            let ramp = active[slot - 1];
            let r = log_uniform(&mut rng, ramp.inner, 10.0 * ramp.outer);
            random_direction(&mut rng, n).iter().zip(&ramp.center).map(|(d, c)| c + d * r).collect()
        };
        if bump.eval(&x) <= 0.0 {
            continue;
        }
        accepted += 1;
        let vi = ui.value(x.iter().map(|v| v * v).sum());
        for (k, (_, p, z)) in profiles.iter().enumerate() {
            let d2: f64 = x.iter().zip(z.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            let vj = p.value(d2);
            dominance_max = dominance_max.max(vj / (eps * vi));
            lo[k] = lo[k].min(vj);
            hi[k] = hi[k].max(vj);
        }
    }
    let oscillation_max = profiles
        .iter()
        .enumerate()
        .filter(|(_, (_, p, _))| p.lambda <= 1.0)
        .map(|(k, _)| if accepted > 0 { hi[k] / lo[k] } else { 1.0 })
        .fold(1.0, f64::max);

    let grad_phi_ln = bump.grad_ln_norm();
    Ok(BumpReport {
        epsilon: eps,
        tail_mass,
        tail_gradient,
        grad_phi_ln,
        ramps_disjoint: bump.ramps_disjoint(),
        lipschitz: bump.lipschitz(),
        dominance_max,
        oscillation_max,
        samples: accepted,
        mass_ok: tail_mass <= eps && tail_gradient <= eps,
        gradient_ok: grad_phi_ln <= eps,
        dominance_ok: dominance_max <= 1.0,
        oscillation_ok: oscillation_max <= 1.0 + eps,
    })
}
