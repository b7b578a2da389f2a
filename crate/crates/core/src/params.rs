//! Dimension, exponents and sharp constants.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bubble::{BubbleParams, Variant};
use crate::error::{Error, Result};
use crate::grid::{dirichlet_norm, lp_norm, sample_bubble, GridSpec, RadialGrid};
use crate::riesz::hls_quotient;
use crate::special::gamma;

/// Validated parameter set (N, μ) with every derived exponent and constant.
#[derive(Debug, Clone, PartialEq)]
pub struct HlsParams {
    pub n: usize,
    pub mu: f64,
    pub two_star: f64,
    pub two_mu_star: f64,
    pub p: f64,
    pub p_tilde: f64,
    pub k_mu: f64,
    pub c_n_mu: f64,
    /// Sharp Sobolev constant ‖∇U‖/‖U‖_{2*}.
    pub s: f64,
    pub s_hls: f64,
    pub c_mu: f64,
    pub in_theorem_regime: bool,
    pub calibrated: bool,
}

/// Riesz normalization K_μ for I_μ(x) = K_μ |x|^{-μ}.
pub fn riesz_constant(n: usize, mu: f64) -> f64 {
    let nf = n as f64;
    gamma(mu / 2.0) / (2f64.powf(nf - mu) * PI.powf(nf / 2.0) * gamma((nf - mu) / 2.0))
}

/// Sharp diagonal HLS constant C(N, μ).
pub fn hls_constant(n: usize, mu: f64) -> f64 {
    let nf = n as f64;
    PI.powf(mu / 2.0) * gamma((nf - mu) / 2.0) / gamma(nf - mu / 2.0)
        * (gamma(nf / 2.0) / gamma(nf)).powf(-1.0 + mu / nf)
}

/// Closed-form Sobolev constant (unsquared).
pub fn sobolev_constant(n: usize) -> f64 {
    let nf = n as f64;
    (PI * nf * (nf - 2.0) * (gamma(nf / 2.0) / gamma(nf)).powf(2.0 / nf)).sqrt()
}

fn rescaling_constant(n: usize, mu: f64, k_mu: f64, c_n_mu: f64, s: f64) -> f64 {
    let nf = n as f64;
    let s2 = s * s;
    (c_n_mu * k_mu * s2.powf((nf - mu) / 2.0)).powf(-(nf - 2.0) / (4.0 + 2.0 * (nf - mu)))
}

impl HlsParams {
    /// Build the parameter set, seeding S and S_HLS with their closed forms.
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::Domain(format!("dimension N={n} must be at least 3")));
        }
        let nf = n as f64;
        if !(mu > 0.0 && mu < nf) {
            return Err(Error::Domain(format!("mu={mu} must lie in (0, {n})")));
        }
        let two_star = 2.0 * nf / (nf - 2.0);
        let two_mu_star = (2.0 * nf - mu) / (nf - 2.0);
        let k_mu = riesz_constant(n, mu);
        let c_n_mu = hls_constant(n, mu);
        let s = sobolev_constant(n);
        let s_hls = s * s / (k_mu * c_n_mu).powf(1.0 / two_mu_star);
        Ok(HlsParams {
            n,
            mu,
            two_star,
            two_mu_star,
            p: two_star - 1.0,
            p_tilde: two_mu_star - 1.0,
            k_mu,
            c_n_mu,
            s,
            s_hls,
            c_mu: rescaling_constant(n, mu, k_mu, c_n_mu, s),
            in_theorem_regime: n == 3 && mu > 2.5 && mu < 3.0,
            calibrated: false,
        })
    }

    /// Copy with S and S_HLS replaced; c(μ) follows S.
    pub fn with_constants(&self, s: f64, s_hls: f64) -> Self {
        let mut out = self.clone();
        out.s = s;
        out.s_hls = s_hls;
        out.c_mu = rescaling_constant(self.n, self.mu, self.k_mu, self.c_n_mu, s);
        out.calibrated = true;
        out
    }

    pub fn exponent_predicates(&self) -> ExponentPredicates {
        let pt = self.p_tilde;
        let nf = self.n as f64;
        ExponentPredicates {
            p_tilde_gt_1: pt > 1.0,
            p_tilde_plus_1_gt_1: pt + 1.0 > 1.0,
            p_tilde_plus_1_gt_0: pt + 1.0 > 0.0,
            p_tilde_gt_2: pt > 2.0,
            mu_gt_half_n_plus_2: self.mu > (nf + 2.0) / 2.0,
            gap_exceeds: self.p - pt > pt - 1.0,
        }
    }
}

/// Replace S and S_HLS by their quadrature values on `grid`.
///
/// The quotients are evaluated on U[0,1] (both are scale invariant, so the
/// Choquard normalization drops out) and compared against the 2× refined grid.
pub fn calibrate_constants(params: &HlsParams, grid: &RadialGrid) -> Result<HlsParams> {
    calibrate_at(params, grid, 1.0)
}

/// Calibration against U[0, λ].
pub fn calibrate_at(params: &HlsParams, grid: &RadialGrid, lambda: f64) -> Result<HlsParams> {
    if grid.n_dim != params.n {
        return Err(Error::GridMismatch(format!("grid dimension {} differs from N={}", grid.n_dim, params.n)));
    }
    if grid.r_min > 1e-3 / lambda || grid.r_max < 1e3 / lambda {
        return Err(Error::Quadrature(format!("grid [{:e}, {:e}] does not resolve the bubble", grid.r_min, grid.r_max)));
    }
    let (s, s_hls) = quotients(params, grid, lambda)?;
    let (s2, s_hls2) = quotients(params, &grid.refined(), lambda)?;
    let drift = ((s - s2) / s2).abs().max(((s_hls - s_hls2) / s_hls2).abs());
    if drift > 1e-4 {
        return Err(Error::Quadrature(format!("constants move by {drift:.2e} under refinement")));
    }
    Ok(params.with_constants(s, s_hls))
}

fn quotients(params: &HlsParams, grid: &RadialGrid, lambda: f64) -> Result<(f64, f64)> {
    let u = sample_bubble(&GridSpec::Radial(grid.clone()), params, &BubbleParams::centered(params.n, lambda), Variant::Sobolev)?;
    let grad = dirichlet_norm(&u)?;
    let s = grad / lp_norm(&u, params.two_star)?;
    let s_hls = hls_quotient(params, &u)?;
    Ok((s, s_hls))
}

/// Exponent-range predicates, evaluated on the exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExponentPredicates {
    pub p_tilde_gt_1: bool,
    pub p_tilde_plus_1_gt_1: bool,
    pub p_tilde_plus_1_gt_0: bool,
    pub p_tilde_gt_2: bool,
    pub mu_gt_half_n_plus_2: bool,
    /// p − p̃ > p̃ − 1.
    pub gap_exceeds: bool,
}

impl ExponentPredicates {
    /// The same predicates stated as thresholds on μ.
    pub fn from_thresholds(n: usize, mu: f64) -> Self {
        let nf = n as f64;
        ExponentPredicates {
            p_tilde_gt_1: mu < 4.0,
            p_tilde_plus_1_gt_1: mu < nf + 2.0,
            p_tilde_plus_1_gt_0: mu < 2.0 * nf,
            p_tilde_gt_2: mu < 6.0 - nf,
            mu_gt_half_n_plus_2: mu > (nf + 2.0) / 2.0,
            gap_exceeds: mu > 2.0,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsJson {
    #[serde(rename = "N")]
    n: usize,
    mu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    calibrated: Option<CalibratedJson>,
}

#[derive(Serialize, Deserialize)]
struct CalibratedJson {
    #[serde(rename = "S")]
    s: f64,
    #[serde(rename = "S_hls")]
    s_hls: f64,
}

impl Serialize for HlsParams {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsJson {
            n: self.n,
            mu: self.mu,
            calibrated: self.calibrated.then_some(CalibratedJson { s: self.s, s_hls: self.s_hls }),
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for HlsParams {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let j = ParamsJson::deserialize(de)?;
        let base = HlsParams::new(j.n, j.mu).map_err(serde::de::Error::custom)?;
        Ok(match j.calibrated {
            Some(c) => base.with_constants(c.s, c.s_hls),
            None => base,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_at_theorem_point() {
        let p = HlsParams::new(3, 2.75).unwrap();
        assert_eq!(p.two_mu_star, 3.25);
        assert_eq!(p.p_tilde, 2.25);
        assert_eq!(p.p, 5.0);
        assert_eq!(p.two_star, 6.0);
        assert!(p.in_theorem_regime);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(HlsParams::new(2, 1.0).is_err());
        assert!(HlsParams::new(3, 0.0).is_err());
        assert!(HlsParams::new(3, 3.0).is_err());
    }

    #[test]
    fn riesz_constant_golden() {
        let golden = [
            (0.5, 0.126_987_271_868_481_94),
            (1.0, 0.079_577_471_545_947_668),
            (2.0, 0.050_660_591_821_168_886),
            (2.75, 0.017_817_836_867_597_402),
        ];
        for (mu, k) in golden {
            let v = riesz_constant(3, mu);
            assert!(((v - k) / k).abs() < 1e-12, "mu={mu}: {v}");
        }
        assert!((riesz_constant(3, 2.0) - 1.0 / (2.0 * PI * PI)).abs() < 1e-15);
    }

    #[test]
    fn hls_constant_golden() {
        let v = hls_constant(3, 2.0);
        let closed = PI.powf(1.5) * (PI.sqrt() / 4.0).powf(-1.0 / 3.0);
        assert!(((v - 7.303_872_119_375_109_4) / v).abs() < 1e-12);
        assert!(((v - closed) / v).abs() < 1e-13);
    }

    #[test]
    fn rescaling_constant_golden() {
        for (mu, c) in [(2.0, 1.024_263_180_740_989_1), (2.75, 1.009_947_236_105_727_7), (1.0, 1.0)] {
            let p = HlsParams::new(3, mu).unwrap();
            assert!((p.c_mu - c).abs() < 1e-12, "mu={mu}: {}", p.c_mu);
        }
    }

    #[test]
    fn predicate_examples() {
        let t = HlsParams::new(3, 2.75).unwrap().exponent_predicates();
        assert!(t.p_tilde_gt_1 && t.p_tilde_gt_2 && t.mu_gt_half_n_plus_2);
        assert!(!HlsParams::new(4, 3.5).unwrap().exponent_predicates().p_tilde_gt_2);
        assert!(!HlsParams::new(5, 3.5).unwrap().exponent_predicates().mu_gt_half_n_plus_2);
    }

    #[test]
    fn json_round_trip() {
        let p = HlsParams::new(3, 2.75).unwrap().with_constants(2.3404, 5.9);
        let s = serde_json::to_string(&p).unwrap();
        let q: HlsParams = serde_json::from_str(&s).unwrap();
        assert_eq!(p, q);
        let r: HlsParams = serde_json::from_str(r#"{"N":3,"mu":2.0}"#).unwrap();
        assert_eq!(r, HlsParams::new(3, 2.0).unwrap());
    }

    #[test]
    fn calibration_matches_closed_forms() {
        let p = HlsParams::new(3, 2.75).unwrap();
        let g = RadialGrid::default_for(3);
        let c = calibrate_constants(&p, &g).unwrap();
        assert!(c.calibrated);
        assert!(((c.s - 2.340_492_275_042_011_7) / c.s).abs() < 1e-8, "{}", c.s);
        assert!(((c.s_hls - 5.928_907_797_909_7) / c.s_hls).abs() < 1e-7, "{}", c.s_hls);
        assert_eq!(calibrate_constants(&c, &g).unwrap(), c);
        let d = calibrate_at(&p, &g, 3.0).unwrap();
        assert!(((d.s - c.s) / c.s).abs() < 1e-6);
    }

    #[test]
    fn calibration_needs_wide_grid() {
        let p = HlsParams::new(3, 2.75).unwrap();
        let g = RadialGrid::new(3, 1e-2, 1e2, 1024).unwrap();
        assert!(matches!(calibrate_constants(&p, &g), Err(Error::Quadrature(_))));
    }
}
