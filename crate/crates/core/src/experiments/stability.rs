use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, GridConfig, PerturbationSpec};
use super::family::{build_family, check_realizable, family_delta, make_perturbation};
use crate::bubble::BubbleFamily;
use crate::deficit::theta;
use crate::error::{Error, Result};
use crate::grid::{dirichlet_norm_unchecked, sample_family, GridSpec};
use crate::interaction::{interaction_integral, max_interaction_q};
use crate::params::HlsParams;
use crate::projection::best_projection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityRecord {
    pub grid: String,
    #[serde(rename = "Q_target")]
    pub q_target: f64,
    #[serde(rename = "Q_max")]
    pub q_max: f64,
    pub t: f64,
    pub delta_used: f64,
    /// ‖∇ρ‖ of the constructed perturbation.
    pub rho_norm: f64,
    pub theta: f64,
    pub d: f64,
    pub ratio: f64,
    pub alpha_dev: f64,
    /// max_{i≠j} ∫Ũ_i^pŨ_j / Θ(u) over the fitted bubbles.
    pub interaction_bound_ratio: f64,
    pub converged: bool,
    pub regime_ok: bool,
    /// "theorem", "exploratory" or "outside-delta".
    pub label: String,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySummary {
    pub records: usize,
    pub failed: usize,
    pub max_ratio: f64,
    pub min_ratio: f64,
    /// max/min of d/Θ over all records.
    pub ratio_spread: f64,
    pub max_interaction_bound_ratio: f64,
    pub all_finite: bool,
}

impl StabilitySummary {
    pub fn of(records: &[StabilityRecord]) -> Self {
        let ok: Vec<&StabilityRecord> = records.iter().filter(|r| r.error.is_none()).collect();
        let max_ratio = ok.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
        let min_ratio = ok.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
        let max_ib = ok.iter().map(|r| r.interaction_bound_ratio).fold(f64::NEG_INFINITY, f64::max);
        let all_finite = ok.len() == records.len()
            && ok.iter().all(|r| {
                [r.theta, r.d, r.ratio, r.alpha_dev, r.interaction_bound_ratio].iter().all(|v| v.is_finite() && *v >= 0.0)
            });
        StabilitySummary {
            records: records.len(),
            failed: records.len() - ok.len(),
            max_ratio,
            min_ratio,
            ratio_spread: max_ratio / min_ratio,
            max_interaction_bound_ratio: max_ib,
            all_finite,
        }
    }
}

/// Inputs of a single sweep point.
#[derive(Debug, Clone)]
pub struct StabilityPoint<'a> {
    pub params: &'a HlsParams,
    pub family: &'a BubbleFamily,
    pub grid: &'a GridSpec,
    pub grid_label: &'a str,
    pub perturbation: &'a PerturbationSpec,
    pub q_target: f64,
    /// Zero gives the bare family.
    pub t: f64,
    pub perturbation_seed: u64,
    pub multistart: usize,
    pub projection_seed: u64,
    pub delta: Option<f64>,
}

fn nan_record(pt: &StabilityPoint, err: &Error) -> StabilityRecord {
    StabilityRecord {
        grid: pt.grid_label.to_string(),
        q_target: pt.q_target,
        q_max: max_interaction_q(pt.family),
        t: pt.t,
        delta_used: f64::NAN,
        rho_norm: f64::NAN,
        theta: f64::NAN,
        d: f64::NAN,
        ratio: f64::NAN,
        alpha_dev: f64::NAN,
        interaction_bound_ratio: f64::NAN,
        converged: false,
        regime_ok: false,
        label: "failed".into(),
        error: Some(err.to_string()),
    }
}

/// u = σ + ρ; Θ(u), d(u) and the interaction estimate. Errors are folded into the record.
pub fn stability_point(pt: &StabilityPoint) -> StabilityRecord {
    match try_point(pt) {
        Ok(r) => r,
        Err(e) => {
            log::warn!("stability point Q={} t={} on {}: {e}", pt.q_target, pt.t, pt.grid_label);
            nan_record(pt, &e)
        }
    }
}

fn try_point(pt: &StabilityPoint) -> Result<StabilityRecord> {
    let params = pt.params;
    let sigma = sample_family(pt.grid, params, pt.family)?;
    let u = if pt.t > 0.0 {
        let rho = make_perturbation(params, pt.perturbation, pt.family, pt.grid, pt.t, pt.perturbation_seed)?;
        sigma.add(&rho)?
    } else {
        sigma.clone()
    };
    let rho_norm = dirichlet_norm_unchecked(&u.sub(&sigma)?)?;
    let th = theta(params, &u)?;
    let proj = best_projection(params, &u, pt.family, pt.multistart, pt.projection_seed)?;
    let fitted = &proj.fitted;
    let alpha_dev = fitted.members.iter().map(|m| (m.alpha - 1.0).abs()).fold(0.0, f64::max);
    let mut inter = 0.0f64;
    for i in 0..fitted.len() {
        for j in 0..fitted.len() {
            if i != j {
                let v = interaction_integral(params, &fitted.members[i].params, &fitted.members[j].params, params.p, 1.0)?;
                inter = inter.max(v);
            }
        }
    }
    let needed = family_delta(pt.family).max(rho_norm);
    let delta_used = pt.delta.unwrap_or(needed);
    let regime_ok = needed <= delta_used;
    let label = if !params.in_theorem_regime {
        "exploratory"
    } else if regime_ok {
        "theorem"
    } else {
        "outside-delta"
    };
    Ok(StabilityRecord {
        grid: pt.grid_label.to_string(),
        q_target: pt.q_target,
        q_max: max_interaction_q(pt.family),
        t: pt.t,
        delta_used,
        rho_norm,
        theta: th,
        d: proj.d,
        ratio: proj.d / th,
        alpha_dev,
        interaction_bound_ratio: inter / th,
        converged: proj.converged,
        regime_ok,
        label: label.into(),
        error: None,
    })
}

/// Every (grid, Q, t) point of the sweep, in that nesting order.
///
/// The perturbation shape depends on the seed and Q only, so points that
/// differ in t share ρ up to scale.
pub fn run_stability(config: &ExperimentConfig) -> Result<Vec<StabilityRecord>> {
    let params = &config.params;
    if !params.in_theorem_regime {
        log::warn!("N={}, mu={} is outside the proven regime; records are exploratory", params.n, params.mu);
    }
    let family_spec = config.family.as_ref().ok_or_else(|| Error::ConfigParse("stability needs a family".into()))?;
    let pert = config.perturbation.as_ref().ok_or_else(|| Error::ConfigParse("stability needs a perturbation".into()))?;
    let families: Vec<(f64, BubbleFamily)> = family_spec
        .q
        .iter()
        .map(|&q| build_family(params.n, family_spec, q).map(|f| (q, f)))
        .collect::<Result<_>>()?;
    let grids: Vec<(GridConfig, GridSpec)> =
        config.grid_list().into_iter().map(|g| g.build(params.n).map(|s| (g, s))).collect::<Result<_>>()?;
    for (_, spec) in &grids {
        for (_, fam) in &families {
            check_realizable(params, fam, spec)?;
        }
    }
    let mut jobs = Vec::new();
    for (gc, spec) in &grids {
        for (qi, (q, fam)) in families.iter().enumerate() {
            for &t in &pert.amplitudes {
                jobs.push((gc.label(), spec, qi, *q, fam, t));
            }
        }
    }
    // points run one at a time; each already parallelizes its grid passes
    let out = jobs
        .iter()
        .map(|(label, spec, qi, q, fam, t)| {
        let seed = config.seed.wrapping_add(1_000_003 * *qi as u64);
        stability_point(&StabilityPoint {
            params,
            family: fam,
            grid: spec,
            grid_label: label,
            perturbation: pert,
            q_target: *q,
            t: *t,
            perturbation_seed: seed,
            multistart: config.multistart,
            projection_seed: seed ^ 0x5eed,
            delta: config.delta,
        })
        })
        .collect();
    Ok(out)
}
