//! Projection onto weighted bubble sums: σ = Σα_iŨ[z_i,λ_i] closest to u in
//! the Dirichlet norm, with ρ = u − σ and its orthogonality conditions.
//!
//! Every Dirichlet pairing against a tangent field b is evaluated in weak
//! form as ∫ρ(−Δb) with the closed-form Laplacian of b, which is exact for the
//! bubble manifold and needs no derivative of the sampled data.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bubble::{BubbleFamily, BubbleParams, Profile, Variant, WeightedBubble};
use crate::deficit::theta;
use crate::error::{Error, Result};
use crate::grid::{dirichlet_norm, dirichlet_norm_unchecked, sample_family, Field, GridSpec};
use crate::interaction::{interaction_integral, interaction_q};
use crate::par::Exec;
use crate::params::HlsParams;

/// Fitted members closer than this are treated as collapsed.
pub const COLLAPSE_Q: f64 = 0.5;
pub const ORTHO_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy)]
pub struct ProjectOptions {
    pub max_iter: usize,
    pub exec: Exec,
    pub verbose: bool,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        ProjectOptions { max_iter: 200, exec: Exec::default(), verbose: false }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub merit: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionResult {
    pub fitted: BubbleFamily,
    pub d: f64,
    #[serde(skip)]
    pub rho: Field,
    /// ν rows of N+2 normalized weak-form inner products (Ũ, ∂_λ, ∂_{z_j}).
    pub ortho_residuals: Vec<Vec<f64>>,
    pub iterations: usize,
    pub converged: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub history: Vec<IterationRecord>,
}

impl ProjectionResult {
    pub fn max_ortho_residual(&self) -> f64 {
        self.ortho_residuals.iter().flatten().fold(0.0, |a, &b| a.max(b.abs()))
    }
}

/// Free parameters of one bubble: α, ln λ and (box only) z.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Member {
    alpha: f64,
    log_lambda: f64,
    z: [f64; 3],
}

struct Problem<'a> {
    params: &'a HlsParams,
    u: &'a Field,
    per: usize,
    exec: Exec,
    weights: Vec<f64>,
    /// Treat `u` itself as ρ (no bubble sum subtracted) and keep the full,
    /// slightly non-symmetric discrete Gram matrix.
    bare: bool,
}

struct Moments {
    /// ∫ρ w_k.
    f: Vec<f64>,
    /// ∫e_k w_l.
    g: Vec<f64>,
}

impl<'a> Problem<'a> {
    fn new(params: &'a HlsParams, u: &'a Field, exec: Exec) -> Result<Self> {
        let (per, weights) = match u {
            Field::Radial(r) => {
                let g = &r.grid;
                let nf = params.n as f64;
                let last = g.len() - 1;
                let w = g
                    .nodes
                    .iter()
                    .enumerate()
                    .map(|(i, x)| {
                        let end = if i == 0 || i == last { 0.5 } else { 1.0 };
                        end * g.omega() * x.powf(nf) * g.h
                    })
                    .collect();
                (2, w)
            }
            Field::Box(_) => {
                if params.n != 3 {
                    return Err(Error::Unsupported("box backend is three-dimensional".into()));
                }
                (params.n + 2, Vec::new())
            }
        };
        Ok(Problem { params, u, per, exec, weights, bare: false })
    }

    fn point(&self, i: usize) -> ([f64; 3], f64) {
        match self.u {
            Field::Radial(r) => ([r.grid.nodes[i], 0.0, 0.0], self.weights[i]),
            Field::Box(b) => (b.grid.point(i), b.grid.cell_volume()),
        }
    }

    fn len(&self) -> usize {
        self.u.values().len()
    }

    fn collect(&self, members: &[Member]) -> Moments {
        let k = members.len() * self.per;
        let pr = self.params;
        let cp = pr.c_mu.powf(1.0 - pr.p);
        let p = pr.p;
        let profiles: Vec<Profile> =
            members.iter().map(|m| Profile::new(pr, m.log_lambda.exp(), Variant::Choquard)).collect();
        let per = self.per;
        let n = self.len();
        let blocks = 64.min(n);
        let vals = self.u.values();
        let bare = self.bare;
        let sums = self.exec.map_reduce(
            n,
            blocks,
            |range| {
                let mut acc = vec![0.0; k + k * k];
                let mut e = vec![0.0; k];
                let mut w = vec![0.0; k];
                for i in range {
                    let (x, dv) = self.point(i);
                    let mut sigma = 0.0;
                    for (b, (m, prof)) in members.iter().zip(&profiles).enumerate() {
                        let dx = [x[0] - m.z[0], x[1] - m.z[1], x[2] - m.z[2]];
                        let r2 = dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2];
                        let v = prof.value(r2);
                        let vp1 = v.powf(p - 1.0);
                        let lap = cp * vp1 * v;
                        let o = b * per;
                        sigma += m.alpha * v;
                        e[o] = v;
                        w[o] = lap;
                        let dl = m.alpha * prof.lambda * prof.dlambda(r2);
                        e[o + 1] = dl;
                        w[o + 1] = p * cp * vp1 * dl;
                        if per > 2 {
                            let g = m.alpha * prof.dz_factor(r2);
                            for j in 0..3 {
                                e[o + 2 + j] = g * dx[j];
                                w[o + 2 + j] = p * cp * vp1 * g * dx[j];
                            }
                        }
                    }
                    let rho = if bare { vals[i] } else { vals[i] - sigma };
                    for a in 0..k {
                        acc[a] += rho * w[a] * dv;
                        let ea = e[a] * dv;
                        let lo = if bare { 0 } else { a };
                        let row = &mut acc[k + a * k + lo..k + (a + 1) * k];
                        for (r, wb) in row.iter_mut().zip(&w[lo..]) {
                            *r += ea * wb;
                        }
                    }
                }
                acc
            },
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
            vec![0.0; k + k * k],
        );
        let f = sums[..k].to_vec();
        let mut g = sums[k..].to_vec();
        if !bare {
            for a in 0..k {
                for b in a + 1..k {
                    g[b * k + a] = g[a * k + b];
                }
            }
        }
        Moments { f, g }
    }

    /// Σ c_k e_k on the grid.
    fn combine(&self, members: &[Member], c: &[f64]) -> Vec<f64> {
        let pr = self.params;
        let profiles: Vec<Profile> =
            members.iter().map(|m| Profile::new(pr, m.log_lambda.exp(), Variant::Choquard)).collect();
        let per = self.per;
        let mut out = vec![0.0; self.len()];
        self.exec.chunks_mut(&mut out, 4096, |ci, chunk| {
            for (j, o) in chunk.iter_mut().enumerate() {
                let (x, _) = self.point(ci * 4096 + j);
                let mut acc = 0.0;
                for (b, (m, prof)) in members.iter().zip(&profiles).enumerate() {
                    let dx = [x[0] - m.z[0], x[1] - m.z[1], x[2] - m.z[2]];
                    let r2 = dx[0] * dx[0] + dx[1] * dx[1] + dx[2] * dx[2];
                    let k = b * per;
                    acc += c[k] * prof.value(r2) + c[k + 1] * m.alpha * prof.lambda * prof.dlambda(r2);
                    if per > 2 {
                        let g = m.alpha * prof.dz_factor(r2);
                        acc += g * (c[k + 2] * dx[0] + c[k + 3] * dx[1] + c[k + 4] * dx[2]);
                    }
                }
                *o = acc;
            }
        });
        out
    }

    /// GN direction δ with Gδ = F and the merit FᵀG⁻¹F.
    fn direction(&self, m: &Moments) -> Result<(Vec<f64>, f64)> {
        let k = m.f.len();
        let g = DMatrix::from_row_slice(k, k, &m.g);
        // Jacobi scaling keeps the ill-conditioned z/λ blocks comparable
        let s: Vec<f64> = (0..k).map(|i| 1.0 / g[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
        let gs = DMatrix::from_fn(k, k, |i, j| g[(i, j)] * s[i] * s[j]);
        let fs = DVector::from_fn(k, |i, _| m.f[i] * s[i]);
        let chol = gs
            .cholesky()
            .ok_or_else(|| Error::DegenerateJacobian("tangent Gram matrix is not positive definite".into()))?;
        let y = chol.solve(&fs);
        let merit = fs.dot(&y);
        Ok(((0..k).map(|i| y[i] * s[i]).collect(), merit))
    }

    fn step(&self, members: &[Member], delta: &[f64], t: f64) -> Vec<Member> {
        members
            .iter()
            .enumerate()
            .map(|(b, m)| {
                let o = b * self.per;
                let mut out = *m;
                out.alpha += t * delta[o];
                out.log_lambda += t * delta[o + 1];
                if self.per > 2 {
                    for j in 0..3 {
                        out.z[j] += t * delta[o + 2 + j];
                    }
                }
                out
            })
            .collect()
    }
}

fn members_of(params: &HlsParams, u: &Field, init: &BubbleFamily) -> Result<Vec<Member>> {
    if init.variant != Variant::Choquard {
        return Err(Error::Domain("projection fits Choquard bubbles".into()));
    }
    init.members
        .iter()
        .map(|m| {
            if m.params.z.len() != params.n {
                return Err(Error::Domain(format!("bubble centres must have {} coordinates", params.n)));
            }
            if matches!(u, Field::Radial(_)) && m.params.z.iter().any(|&v| v != 0.0) {
                return Err(Error::Unsupported("radial grids only hold bubbles centred at the origin".into()));
            }
            let mut z = [0.0; 3];
            for (o, v) in z.iter_mut().zip(&m.params.z) {
                *o = *v;
            }
            Ok(Member { alpha: m.alpha, log_lambda: m.params.lambda.ln(), z })
        })
        .collect()
}

fn family_of(params: &HlsParams, members: &[Member]) -> BubbleFamily {
    let mut out: Vec<WeightedBubble> = members
        .iter()
        .map(|m| WeightedBubble {
            alpha: m.alpha,
            params: BubbleParams::new(m.z[..params.n.min(3)].iter().copied().chain(std::iter::repeat(0.0)).take(params.n).collect(), m.log_lambda.exp()),
        })
        .collect();
    out.sort_by(|a, b| {
        b.params
            .lambda
            .total_cmp(&a.params.lambda)
            .then_with(|| a.params.z.iter().zip(&b.params.z).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal))
            .then_with(|| a.alpha.total_cmp(&b.alpha))
    });
    BubbleFamily::new(Variant::Choquard, out)
}

fn check_collapse(params: &HlsParams, members: &[Member]) -> Result<()> {
    let fam = family_of(params, members);
    for i in 0..fam.len() {
        for j in i + 1..fam.len() {
            let q = interaction_q(&fam.members[i].params, &fam.members[j].params);
            if q > COLLAPSE_Q {
                return Err(Error::DegenerateJacobian(format!("fitted bubbles {i} and {j} collapsed (Q = {q:.3})")));
            }
        }
    }
    Ok(())
}

/// Locally minimize ‖∇(u − Σα_iŨ[z_i,λ_i])‖ starting from `init`.
pub fn project(params: &HlsParams, u: &Field, nu: usize, init: &BubbleFamily) -> Result<ProjectionResult> {
    project_with(params, u, nu, init, ProjectOptions::default())
}

pub fn project_with(params: &HlsParams, u: &Field, nu: usize, init: &BubbleFamily, opts: ProjectOptions) -> Result<ProjectionResult> {
    if init.len() != nu {
        return Err(Error::Domain(format!("init has {} members, expected {nu}", init.len())));
    }
    u.check_decay()?;
    let prob = Problem::new(params, u, opts.exec)?;
    let un = dirichlet_norm(u)?;
    let mut members = members_of(params, u, init)?;
    if members.len() > 1 {
        check_collapse(params, &members)?;
    }
    let mut moments = prob.collect(&members);
    let (mut delta, mut merit) = prob.direction(&moments)?;
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut stalled = false;
    while merit > 0.0 && iterations < opts.max_iter {
        let mut t = 1.0;
        let mut accepted = None;
        let halvings = if merit.sqrt() <= 1e-10 * un { 4 } else { 24 };
        for _ in 0..halvings {
            let trial = prob.step(&members, &delta, t);
            if trial.iter().all(|m| m.log_lambda.is_finite() && m.alpha.is_finite()) {
                let mt = prob.collect(&trial);
                if let Ok((dt, meritt)) = prob.direction(&mt) {
                    if meritt <= merit * (1.0 - 2e-4 * t) {
                        accepted = Some((trial, mt, dt, meritt));
                        break;
                    }
                }
            }
            t *= 0.5;
        }
        let Some((trial, mt, dt, meritt)) = accepted else {
            stalled = true;
            break;
        };
        iterations += 1;
        if opts.verbose {
            history.push(IterationRecord { iteration: iterations, merit: meritt, step: t });
            log::debug!("projection iter {iterations}: merit {meritt:.3e} step {t}");
        }
        members = trial;
        moments = mt;
        delta = dt;
        merit = meritt;
        if members.len() > 1 {
            check_collapse(params, &members)?;
        }
        if merit.sqrt() <= 1e-9 * un {
            let d = dirichlet_norm_unchecked(&residual_field(params, u, &members)?)?;
            if merit.sqrt() <= 1e-9 * d.max(1e-6 * un) {
                break;
            }
        }
    }

    let rho = residual_field(params, u, &members)?;
    let d = dirichlet_norm_unchecked(&rho)?;
    let scale = d.max(1e-8 * un);
    let ortho = normalized_rows(&moments, prob.per, members.len(), params.n, scale);
    // rows follow the sorted output order
    let order = sort_order(params, &members);
    let ortho_residuals: Vec<Vec<f64>> = order.iter().map(|&i| ortho[i].clone()).collect();
    let max_res = ortho_residuals.iter().flatten().fold(0.0f64, |a, &b| a.max(b.abs()));
    let converged = max_res <= ORTHO_TOL;
    if !converged && !stalled && iterations >= opts.max_iter {
        return Err(Error::NonConvergence { iterations, residual: max_res });
    }
    Ok(ProjectionResult {
        fitted: family_of(params, &members),
        d,
        rho,
        ortho_residuals,
        iterations,
        converged,
        history,
    })
}

/// Rows of F_k/(scale·√G_kk), N + 2 entries per member.
fn normalized_rows(m: &Moments, per: usize, count: usize, n: usize, scale: f64) -> Vec<Vec<f64>> {
    (0..count)
        .map(|b| {
            let mut row = vec![0.0; n + 2];
            for c in 0..per {
                let idx = b * per + c;
                let gk = m.g[idx * count * per + idx].abs().sqrt();
                row[c] = if gk > 0.0 && scale > 0.0 { m.f[idx] / (scale * gk) } else { 0.0 };
            }
            row
        })
        .collect()
}

fn bare_problem<'a>(params: &'a HlsParams, rho: &'a Field, family: &BubbleFamily) -> Result<(Problem<'a>, Vec<Member>)> {
    let mut prob = Problem::new(params, rho, Exec::default())?;
    prob.bare = true;
    Ok((prob, members_of(params, rho, family)?))
}

/// Normalized weak-form pairings of ρ with the tangent fields of `family`,
/// one row per member in family order.
pub fn tangent_residuals(params: &HlsParams, family: &BubbleFamily, rho: &Field) -> Result<Vec<Vec<f64>>> {
    let (prob, members) = bare_problem(params, rho, family)?;
    let m = prob.collect(&members);
    let scale = dirichlet_norm_unchecked(rho)?;
    Ok(normalized_rows(&m, prob.per, members.len(), params.n, scale))
}

/// Remove the Dirichlet projection of ρ onto the tangent space of `family`
/// (two Gram–Schmidt passes).
pub fn orthogonalize(params: &HlsParams, family: &BubbleFamily, rho: &Field) -> Result<Field> {
    let mut vals = rho.values().to_vec();
    for _ in 0..2 {
        let cur = rho.with_values(vals);
        let (p, members) = bare_problem(params, &cur, family)?;
        let m = p.collect(&members);
        let k = m.f.len();
        // pairing k of the update is Σ_l c_l ∫e_l w_k
        let a = DMatrix::from_fn(k, k, |i, j| m.g[j * k + i]);
        let c = a
            .lu()
            .solve(&DVector::from_column_slice(&m.f))
            .ok_or_else(|| Error::DegenerateJacobian("tangent fields are linearly dependent".into()))?;
        let c: Vec<f64> = c.iter().copied().collect();
        let t = p.combine(&members, &c);
        vals = cur.values().iter().zip(&t).map(|(a, b)| a - b).collect();
    }
    Ok(rho.with_values(vals))
}

fn residual_field(params: &HlsParams, u: &Field, members: &[Member]) -> Result<Field> {
    let sigma = sample_family(&GridSpec::of(u), params, &family_of(params, members))?;
    u.sub(&sigma)
}

fn sort_order(params: &HlsParams, members: &[Member]) -> Vec<usize> {
    let fam = family_of(params, members);
    let mut used = vec![false; members.len()];
    fam.members
        .iter()
        .map(|w| {
            let i = (0..members.len())
                .find(|&i| {
                    !used[i]
                        && members[i].alpha == w.alpha
                        && members[i].log_lambda.exp() == w.params.lambda
                        && members[i].z[..params.n.min(3)] == w.params.z[..params.n.min(3)]
                })
                .expect("sorted member comes from the input");
            used[i] = true;
            i
        })
        .collect()
}

/// Truth seed plus `multistart − 1` copies jittered by 10% in α and λ and by 0.1/λ in z.
pub fn jittered_starts(init: &BubbleFamily, multistart: usize, radial: bool, seed: u64) -> Vec<BubbleFamily> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![init.clone()];
    for _ in 1..multistart {
        let members = init
            .members
            .iter()
            .map(|m| {
                let lambda = m.params.lambda * (1.0 + rng.random_range(-0.1..0.1));
                let z = m
                    .params
                    .z
                    .iter()
                    .map(|z| if radial { *z } else { z + rng.random_range(-0.1..0.1) / m.params.lambda })
                    .collect();
                WeightedBubble { alpha: m.alpha * (1.0 + rng.random_range(-0.1..0.1)), params: BubbleParams::new(z, lambda) }
            })
            .collect();
        out.push(BubbleFamily::new(init.variant, members));
    }
    out
}

/// Best of the multistart projections (smallest d, ties to the first in the
/// sorted parameter order).
pub fn best_projection(params: &HlsParams, u: &Field, init: &BubbleFamily, multistart: usize, seed: u64) -> Result<ProjectionResult> {
    let starts = jittered_starts(init, multistart.max(1), matches!(u, Field::Radial(_)), seed);
    let opts = ProjectOptions { exec: Exec::Sequential, ..Default::default() };
    let results: Vec<Result<ProjectionResult>> =
        Exec::default().map(starts.len(), |i| project_with(params, u, init.len(), &starts[i], opts));
    let mut best: Option<ProjectionResult> = None;
    let mut first_err = None;
    for r in results {
        match r {
            Ok(r) => {
                let better = match &best {
                    None => true,
                    Some(b) => r.d < b.d * (1.0 - 1e-12) || ((r.d - b.d).abs() <= 1e-12 * b.d && lexicographic_less(&r.fitted, &b.fitted)),
                };
                if better {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start"))
}

fn lexicographic_less(a: &BubbleFamily, b: &BubbleFamily) -> bool {
    let key = |f: &BubbleFamily| -> Vec<f64> {
        f.members.iter().flat_map(|m| std::iter::once(-m.params.lambda).chain(m.params.z.iter().copied()).chain(std::iter::once(m.alpha))).collect()
    };
    key(a).iter().zip(key(b).iter()).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()) == Some(std::cmp::Ordering::Less)
}

/// d(u): an upper bound on the distance to ν-bubble sums from multistart projection.
pub fn distance_to_manifold(params: &HlsParams, u: &Field, nu: usize, init: &BubbleFamily, multistart: usize, seed: u64) -> Result<f64> {
    if init.len() != nu {
        return Err(Error::Domain(format!("init has {} members, expected {nu}", init.len())));
    }
    Ok(best_projection(params, u, init, multistart, seed)?.d)
}

#[derive(Debug, Clone, Serialize)]
pub struct PairInteraction {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    pub constant: f64,
}

/// Ingredients of the weight and interaction estimates for a decomposition u = σ + ρ.
#[derive(Debug, Clone, Serialize)]
pub struct DecompositionBounds {
    pub alpha_dev: Vec<f64>,
    pub rho_norm: f64,
    pub rho_power: f64,
    pub theta: f64,
    pub eps_hat: f64,
    pub denominator: f64,
    pub alpha_constants: Vec<f64>,
    pub interactions: Vec<PairInteraction>,
    /// No pairs exist (ν = 1).
    pub pairs_vacuous: bool,
    pub finite: bool,
}

/// |α_i−1| and ∫Ũ_i^pŨ_j against ε̂‖∇ρ‖ + ‖∇ρ‖^{min(p̃,2)} + Θ(u).
pub fn verify_decomposition_bounds(params: &HlsParams, result: &ProjectionResult, u: &Field, eps_hat: f64) -> Result<DecompositionBounds> {
    if !result.converged {
        return Err(Error::Domain("decomposition bounds need a converged projection".into()));
    }
    let th = theta(params, u)?;
    let rho_norm = result.d;
    let rho_power = rho_norm.powf(params.p_tilde.min(2.0));
    let denominator = eps_hat * rho_norm + rho_power + th;
    let fam = &result.fitted;
    let alpha_dev: Vec<f64> = fam.members.iter().map(|m| (m.alpha - 1.0).abs()).collect();
    let alpha_constants = alpha_dev.iter().map(|a| a / denominator).collect();
    let mut interactions = Vec::new();
    for i in 0..fam.len() {
        for j in 0..fam.len() {
            if i != j {
                let value = interaction_integral(params, &fam.members[i].params, &fam.members[j].params, params.p, 1.0)?;
                interactions.push(PairInteraction { i, j, value, constant: value / denominator });
            }
        }
    }
    let mut out = DecompositionBounds {
        alpha_dev,
        rho_norm,
        rho_power,
        theta: th,
        eps_hat,
        denominator,
        alpha_constants,
        pairs_vacuous: fam.len() == 1,
        interactions,
        finite: false,
    };
    out.finite = out.alpha_constants.iter().chain(out.interactions.iter().map(|p| &p.constant)).all(|c| c.is_finite());
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoxGrid, RadialGrid};

    fn params() -> HlsParams {
        HlsParams::new(3, 2.75).unwrap()
    }

    fn fam(members: &[(f64, [f64; 3], f64)]) -> BubbleFamily {
        BubbleFamily::new(
            Variant::Choquard,
            members
                .iter()
                .map(|(a, z, l)| WeightedBubble { alpha: *a, params: BubbleParams::new(z.to_vec(), *l) })
                .collect(),
        )
    }

    #[test]
    fn radial_two_bubble_recovery() {
        let pr = params();
        let truth = fam(&[(1.0, [0.0; 3], 10.0), (0.97, [0.0; 3], 0.1)]);
        let g = GridSpec::Radial(RadialGrid::default_for(3));
        let u = sample_family(&g, &pr, &truth).unwrap();
        let start = fam(&[(1.08, [0.0; 3], 11.0), (0.9, [0.0; 3], 0.092)]);
        let r = project(&pr, &u, 2, &start).unwrap();
        assert!(r.converged);
        let un = dirichlet_norm(&u).unwrap();
        assert!(r.d <= 1e-8 * un, "d={}", r.d);
        for (a, b) in r.fitted.members.iter().zip(&truth.members) {
            assert!((a.alpha - b.alpha).abs() < 1e-8);
            assert!((a.params.lambda / b.params.lambda - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn box_recovery_from_jitter() {
        let pr = params();
        let grid = BoxGrid::new(40.0, 128).unwrap();
        let truth = fam(&[(1.0, [-3.0, 0.0, 0.0], 1.5), (1.0, [3.0, 0.5, 0.0], 1.2)]);
        let u = sample_family(&GridSpec::Box(grid), &pr, &truth).unwrap();
        let start = fam(&[(1.05, [-2.9, 0.1, -0.05], 1.6), (0.92, [3.1, 0.45, 0.05], 1.1)]);
        let r = project(&pr, &u, 2, &start).unwrap();
        assert!(r.converged, "{:?}", r.ortho_residuals);
        for (a, b) in r.fitted.members.iter().zip(&truth.members) {
            assert!((a.alpha - b.alpha).abs() < 1e-8, "{a:?} {b:?}");
            assert!((a.params.lambda - b.params.lambda).abs() < 1e-8);
            for (x, y) in a.params.z.iter().zip(&b.params.z) {
                assert!((x - y).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn collapse_is_degenerate() {
        let pr = params();
        let g = GridSpec::Radial(RadialGrid::default_for(3));
        let truth = fam(&[(1.0, [0.0; 3], 1.0)]);
        let u = sample_family(&g, &pr, &truth).unwrap();
        let start = fam(&[(0.5, [0.0; 3], 1.0), (0.5, [0.0; 3], 1.1)]);
        assert!(matches!(project(&pr, &u, 2, &start), Err(Error::DegenerateJacobian(_))));
    }
}
