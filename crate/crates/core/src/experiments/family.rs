use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{FamilyMode, FamilySpec, PerturbationMode, PerturbationSpec};
use crate::bubble::{BubbleFamily, BubbleParams, Variant, WeightedBubble};
use crate::error::{Error, Result};
use crate::grid::cube::BOX_DECAY_TOL;
use crate::grid::{dirichlet_norm_unchecked, resolution_warnings, sample_family, Field, GridSpec};
use crate::interaction::{is_delta_interacting, max_interaction_q};
use crate::par::Exec;
use crate::params::HlsParams;
use crate::projection::orthogonalize;

/// Smallest δ for which the family is δ-interacting.
pub fn family_delta(family: &BubbleFamily) -> f64 {
    let a = family.members.iter().map(|m| (m.alpha - 1.0).abs()).fold(0.0, f64::max);
    max_interaction_q(family).max(a)
}

/// A ν-bubble family whose largest pairwise Q is `q`.
///
/// Translation keeps λ fixed and spaces the centres 1/(λ√Q) apart on the
/// first axis, symmetric about the origin. Dilation uses the scales
/// λ·Q^{k−(ν−1)/2} at the origin.
pub fn build_family(n: usize, spec: &FamilySpec, q: f64) -> Result<BubbleFamily> {
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::InfeasibleConfig(format!("Q = {q} must lie in (0, 1]")));
    }
    if spec.nu == 0 {
        return Err(Error::InfeasibleConfig("family needs nu >= 1".into()));
    }
    let nu = spec.nu;
    let mid = (nu as f64 - 1.0) / 2.0;
    let members = (0..nu)
        .map(|k| {
            let alpha = 1.0 + spec.alpha_offsets.get(k).copied().unwrap_or(0.0);
            let params = match spec.mode {
                FamilyMode::Translation => {
                    let gap = 1.0 / (spec.lambda * q.sqrt());
                    let mut z = vec![0.0; n];
                    z[0] = (k as f64 - mid) * gap;
                    BubbleParams::new(z, spec.lambda)
                }
                FamilyMode::Dilation => {
                    let l = spec.lambda * q.powf(k as f64 - mid);
                    if !(l > 0.0 && l.is_finite()) {
                        return Err(Error::InfeasibleConfig(format!("scale {l} is not representable")));
                    }
                    BubbleParams::centered(n, l)
                }
            };
            Ok(WeightedBubble { alpha, params })
        })
        .collect::<Result<Vec<_>>>()?;
    let family = BubbleFamily::new(Variant::Choquard, members);
    let delta = family_delta(&family).max(q);
    if !is_delta_interacting(&family, delta * (1.0 + 1e-12)) || max_interaction_q(&family) > q * (1.0 + 1e-9) {
        return Err(Error::InfeasibleConfig(format!("family does not realize Q = {q}")));
    }
    Ok(family)
}

/// Whether the family can be represented on the grid; returns the reason if not.
pub fn check_realizable(params: &HlsParams, family: &BubbleFamily, grid: &GridSpec) -> Result<()> {
    match grid {
        GridSpec::Radial(g) => {
            if family.members.iter().any(|m| m.params.z.iter().any(|&v| v != 0.0)) {
                return Err(Error::InfeasibleConfig("radial grids only hold concentric families".into()));
            }
            for m in &family.members {
                let l = m.params.lambda;
                if l * g.r_min > 1e-2 || l * g.r_max < 1e2 {
                    return Err(Error::InfeasibleConfig(format!(
                        "scale {l} is not resolved on [{}, {}]",
                        g.r_min, g.r_max
                    )));
                }
            }
        }
        GridSpec::Box(g) => {
            if let Some(w) = resolution_warnings(g, family).first() {
                return Err(Error::InfeasibleConfig(format!("bubble {} has lambda*h = {:.3} > 1", w.index, w.lambda_h)));
            }
            let sigma = sample_family(grid, params, family)?;
            let ratio = g.boundary_ratio(sigma.values());
            if ratio > BOX_DECAY_TOL {
                return Err(Error::InfeasibleConfig(format!(
                    "family is not contained in the box (boundary/peak = {ratio:.3})"
                )));
            }
        }
    }
    Ok(())
}

const PLANE_WAVES: usize = 48;

fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
    let v: f64 = rng.random();
    (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
}

/// Envelope Σ_i exp(−λ_i²|x − z_i|²/(2w²)).
fn envelope(family: &BubbleFamily, width: f64, x: &[f64]) -> f64 {
    family
        .members
        .iter()
        .map(|m| {
            let l = m.params.lambda / width;
            let d2: f64 = m.params.z.iter().zip(x).map(|(z, x)| (x - z) * (x - z)).sum();
            (-0.5 * l * l * d2).exp()
        })
        .sum()
}

/// A smooth random ρ with ‖∇ρ‖ = t, Dirichlet-orthogonal to the tangent
/// space of `family` in tangent-orthogonalized mode.
///
/// The noise is a sum of plane waves with wave vectors drawn from N(0, ℓ^{-2}),
/// i.e. a Gaussian spectrum, times the envelope. It is defined in continuum,
/// so the same seed gives the same ρ on every grid. Radial grids use cos(|k|r).
pub fn make_perturbation(
    params: &HlsParams,
    spec: &PerturbationSpec,
    family: &BubbleFamily,
    grid: &GridSpec,
    t: f64,
    seed: u64,
) -> Result<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ell = spec.correlation;
    let raw = match grid {
        GridSpec::Box(g) => {
            let modes: Vec<([f64; 3], f64, f64)> = (0..PLANE_WAVES)
                .map(|_| {
                    let k = [gaussian(&mut rng) / ell, gaussian(&mut rng) / ell, gaussian(&mut rng) / ell];
                    (k, rng.random_range(0.0..std::f64::consts::TAU), rng.random_range(-1.0..1.0))
                })
                .collect();
            let vals = g.sample(
                |x| {
                    let wave: f64 = modes.iter().map(|(k, ph, a)| a * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos()).sum();
                    wave * envelope(family, spec.envelope, &x)
                },
                Exec::default(),
            );
            Field::cube(*g, vals)
        }
        GridSpec::Radial(g) => {
            let modes: Vec<(f64, f64)> =
                (0..PLANE_WAVES).map(|_| (rng.random_range(-1.0..1.0), gaussian(&mut rng).abs() / ell)).collect();
            let vals = g
                .nodes
                .iter()
                .map(|&r| {
                    let wave: f64 = modes.iter().map(|(a, k)| a * (k * r).cos()).sum();
                    let mut x = vec![0.0; params.n];
                    x[0] = r;
                    wave * envelope(family, spec.envelope, &x)
                })
                .collect();
            Field::radial(g.clone(), vals)
        }
    };
    let rho = match spec.mode {
        PerturbationMode::RandomSmooth => raw,
        PerturbationMode::TangentOrthogonalized => orthogonalize(params, family, &raw)?,
    };
    let norm = dirichlet_norm_unchecked(&rho)?;
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::Domain("perturbation vanished after orthogonalization".into()));
    }
    Ok(rho.scale(t / norm))
}
