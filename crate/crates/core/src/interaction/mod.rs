//! Bubble interaction: the quantity Q, δ-interacting predicates, interaction
//! integrals with their small-Q models, and localization bumps.

mod bump;
pub mod quad;

pub use bump::{make_bump, normalize_family, normalizing_map, verify_bump, Bump, BumpReport, BumpSpec, InnerRamp};

use serde::{Deserialize, Serialize};

use crate::bubble::{BubbleFamily, BubbleParams, Profile, Variant};
use crate::error::{Error, Result};
use crate::params::HlsParams;
use quad::{axis_integral, ball_integral, Center};

/// Empirical bound on full/localized interaction.
pub const C_LOC: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionReport {
    #[serde(rename = "Q")]
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub quadrature_value: f64,
    pub asymptotic_value: f64,
    pub ratio: f64,
}

impl InteractionReport {
    pub const CSV_HEADER: &'static str = "Q,alpha,beta,integral,asymptotic,ratio";

    pub fn csv_row(&self) -> String {
        format!(
            "{:.17e},{},{},{:.17e},{:.17e},{:.17e}",
            self.q, self.alpha, self.beta, self.quadrature_value, self.asymptotic_value, self.ratio
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizedReport {
    pub full: f64,
    pub restricted: f64,
    pub ratio: f64,
    pub c_loc: f64,
    pub within: bool,
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Q = min(λ₁/λ₂, λ₂/λ₁, 1/(λ₁λ₂|z₁−z₂|²)).
pub fn interaction_q(b1: &BubbleParams, b2: &BubbleParams) -> f64 {
    let (l1, l2) = (b1.lambda, b2.lambda);
    let d2 = dist2(&b1.z, &b2.z);
    let sep = if d2 > 0.0 { 1.0 / (l1 * l2 * d2) } else { f64::INFINITY };
    (l1 / l2).min(l2 / l1).min(sep)
}

/// Largest pairwise Q in the family (0 for a single bubble).
pub fn max_interaction_q(family: &BubbleFamily) -> f64 {
    let m = &family.members;
    let mut q = 0.0f64;
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            q = q.max(interaction_q(&m[i].params, &m[j].params));
        }
    }
    q
}

/// Pairwise Q ≤ δ and every weight within δ of 1.
pub fn is_delta_interacting(family: &BubbleFamily, delta: f64) -> bool {
    let alpha_dev = family.members.iter().map(|m| (m.alpha - 1.0).abs()).fold(0.0, f64::max);
    is_delta_interacting_bubbles(family, delta) && alpha_dev <= delta
}

/// Pairwise Q ≤ δ, ignoring weights.
pub fn is_delta_interacting_bubbles(family: &BubbleFamily, delta: f64) -> bool {
    max_interaction_q(family) <= delta
}

fn check_exponents(params: &HlsParams, alpha: f64, beta: f64) -> Result<()> {
    let target = params.p + 1.0;
    if !(alpha >= 0.0 && beta >= 0.0) || (alpha + beta - target).abs() > 1e-9 * target {
        return Err(Error::Exponent(format!(
            "exponents ({alpha}, {beta}) must be non-negative with sum p+1 = {target}"
        )));
    }
    Ok(())
}

fn check_dims(params: &HlsParams, bs: &[&BubbleParams]) -> Result<()> {
    if bs.iter().any(|b| b.z.len() != params.n) {
        return Err(Error::Domain(format!("bubble centres must have {} coordinates", params.n)));
    }
    Ok(())
}

/// ∫ Ũ₁^α Ũ₂^β dx.
pub fn interaction_integral(params: &HlsParams, b1: &BubbleParams, b2: &BubbleParams, alpha: f64, beta: f64) -> Result<f64> {
    check_exponents(params, alpha, beta)?;
    check_dims(params, &[b1, b2])?;
    let p1 = Profile::new(params, b1.lambda, Variant::Choquard);
    let p2 = Profile::new(params, b2.lambda, Variant::Choquard);
    let d = dist2(&b1.z, &b2.z).sqrt();
    let centers = [Center { pos: 0.0, lambda: b1.lambda }, Center { pos: d, lambda: b2.lambda }];
    let f = |x: f64, p: f64| {
        let pp = p * p;
        let u1 = p1.value(x * x + pp);
        let u2 = p2.value((x - d) * (x - d) + pp);
        u1.powf(alpha) * u2.powf(beta)
    };
    Ok(axis_integral(params.n, &centers, f))
}

/// Small-Q model Q^{(N−2)min(α,β)/2}, or Q^{N/2}ln(1/Q) when α = β.
pub fn interaction_asymptotic(params: &HlsParams, alpha: f64, beta: f64, q: f64) -> Result<f64> {
    check_exponents(params, alpha, beta)?;
    if !(q > 0.0 && q <= 1.0) {
        return Err(Error::Domain(format!("Q={q} must lie in (0, 1]")));
    }
    let nf = params.n as f64;
    if (alpha - beta).abs() < 1e-9 {
        Ok(q.powf(nf / 2.0) * (1.0 / q).ln())
    } else {
        Ok(q.powf((nf - 2.0) * alpha.min(beta) / 2.0))
    }
}

pub fn interaction_report(params: &HlsParams, b1: &BubbleParams, b2: &BubbleParams, alpha: f64, beta: f64) -> Result<InteractionReport> {
    let q = interaction_q(b1, b2);
    let quadrature_value = interaction_integral(params, b1, b2, alpha, beta)?;
    let asymptotic_value = interaction_asymptotic(params, alpha, beta, q)?;
    Ok(InteractionReport { q, alpha, beta, quadrature_value, asymptotic_value, ratio: quadrature_value / asymptotic_value })
}

/// Compare ∫Ũ₁^pŨ₂ over R^N with the same integral over B(z₁, 1/λ₁).
pub fn localized_interaction_check(params: &HlsParams, b1: &BubbleParams, b2: &BubbleParams) -> Result<LocalizedReport> {
    check_dims(params, &[b1, b2])?;
    if b1.lambda < b2.lambda {
        return Err(Error::Domain(format!(
            "localization needs lambda1 >= lambda2 (got {} < {})",
            b1.lambda, b2.lambda
        )));
    }
    let p = params.p;
    let full = interaction_integral(params, b1, b2, p, 1.0)?;
    let p1 = Profile::new(params, b1.lambda, Variant::Choquard);
    let p2 = Profile::new(params, b2.lambda, Variant::Choquard);
    let d = dist2(&b1.z, &b2.z).sqrt();
    let radius = 1.0 / b1.lambda;
    let restricted = ball_integral(params.n, 0.0, radius, radius, |x, r| {
        let rr = r * r;
        p1.value(x * x + rr).powf(p) * p2.value((x - d) * (x - d) + rr)
    });
    let ratio = full / restricted;
    Ok(LocalizedReport { full, restricted, ratio, c_loc: C_LOC, within: (1.0 - 1e-9..=C_LOC).contains(&ratio) })
}
