//! Talenti bubbles, their Choquard rescaling, derivatives and the conformal
//! maps T_{z,λ}φ(x) = λ^{(N-2)/2} φ(λ(x - z)).

use serde::{Deserialize, Serialize};

use crate::params::HlsParams;

/// Sobolev bubble U or Choquard bubble Ũ = c(μ)U.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Sobolev,
    #[default]
    Choquard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleParams {
    pub z: Vec<f64>,
    pub lambda: f64,
}

impl BubbleParams {
    pub fn new(z: Vec<f64>, lambda: f64) -> Self {
        assert!(lambda > 0.0 && lambda.is_finite(), "lambda must be positive");
        assert!(z.iter().all(|v| v.is_finite()), "z must be finite");
        BubbleParams { z, lambda }
    }

    pub fn centered(n: usize, lambda: f64) -> Self {
        Self::new(vec![0.0; n], lambda)
    }

    fn dist2(&self, x: &[f64]) -> f64 {
        self.z.iter().zip(x).map(|(z, x)| (x - z) * (x - z)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedBubble {
    pub alpha: f64,
    #[serde(flatten)]
    pub params: BubbleParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BubbleFamily {
    pub variant: Variant,
    pub members: Vec<WeightedBubble>,
}

impl BubbleFamily {
    pub fn new(variant: Variant, members: Vec<WeightedBubble>) -> Self {
        assert!(!members.is_empty(), "a family needs at least one bubble");
        BubbleFamily { variant, members }
    }

    pub fn single(variant: Variant, b: BubbleParams) -> Self {
        Self::new(variant, vec![WeightedBubble { alpha: 1.0, params: b }])
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// σ(x) = Σ α_i Ũ_i(x).
    pub fn eval(&self, params: &HlsParams, x: &[f64]) -> f64 {
        self.members
            .iter()
            .map(|m| m.alpha * eval_bubble(params, &m.params, self.variant, x))
            .sum()
    }
}

/// Amplitude factor for a variant: 1 or c(μ).
pub fn variant_scale(params: &HlsParams, variant: Variant) -> f64 {
    match variant {
        Variant::Sobolev => 1.0,
        Variant::Choquard => params.c_mu,
    }
}

/// Radial profile with precomputed constants; `value(r²)` is the bubble.
#[derive(Debug, Clone, Copy)]
pub struct Profile {
    pub a: f64,
    pub amp: f64,
    pub l2: f64,
    pub lambda: f64,
    half: bool,
}

impl Profile {
    pub fn new(params: &HlsParams, lambda: f64, variant: Variant) -> Self {
        let nf = params.n as f64;
        let a = (nf - 2.0) / 2.0;
        let amp = (nf * (nf - 2.0)).powf(a / 2.0) * lambda.powf(a) * variant_scale(params, variant);
        Profile { a, amp, l2: lambda * lambda, lambda, half: params.n == 3 }
    }

    #[inline]
    pub fn value(&self, r2: f64) -> f64 {
        let q = 1.0 + self.l2 * r2;
        if self.half {
            self.amp / q.sqrt()
        } else {
            self.amp * q.powf(-self.a)
        }
    }

    /// ∂_λ of the bubble at squared distance r².
    #[inline]
    pub fn dlambda(&self, r2: f64) -> f64 {
        let s = self.l2 * r2;
        self.a / self.lambda * self.value(r2) * (1.0 - s) / (1.0 + s)
    }

    /// Radial factor g with ∂_{z_j}Ũ = g · (x − z)_j.
    #[inline]
    pub fn dz_factor(&self, r2: f64) -> f64 {
        2.0 * self.a * self.l2 * self.value(r2) / (1.0 + self.l2 * r2)
    }
}

pub fn eval_bubble(params: &HlsParams, b: &BubbleParams, variant: Variant, x: &[f64]) -> f64 {
    Profile::new(params, b.lambda, variant).value(b.dist2(x))
}

pub fn eval_dlambda(params: &HlsParams, b: &BubbleParams, variant: Variant, x: &[f64]) -> f64 {
    Profile::new(params, b.lambda, variant).dlambda(b.dist2(x))
}

/// ∂_{z_axis}Ũ with `axis` in 0..N.
pub fn eval_dz(params: &HlsParams, b: &BubbleParams, variant: Variant, x: &[f64], axis: usize) -> f64 {
    Profile::new(params, b.lambda, variant).dz_factor(b.dist2(x)) * (x[axis] - b.z[axis])
}

/// Closed-form −ΔŨ computed from the radial profile.
pub fn eval_neg_laplacian(params: &HlsParams, b: &BubbleParams, variant: Variant, x: &[f64]) -> f64 {
    let pr = Profile::new(params, b.lambda, variant);
    let s = pr.l2 * b.dist2(x);
    let nf = params.n as f64;
    2.0 * pr.a * nf * pr.amp * pr.l2 * (1.0 + s).powf(-pr.a - 2.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DlambdaBoundReport {
    pub max_ratio: f64,
    pub max_gradient_ratio: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Pointwise checks |∂_λŨ|/Ũ ≤ (N−2)/2 and |∇∂_λŨ| ≲ |∇Ũ| + Ũ^{(p+1)/2} at λ = 1.
pub fn pointwise_dlambda_bound(params: &HlsParams, b: &BubbleParams, variant: Variant, points: &[Vec<f64>]) -> DlambdaBoundReport {
    let pr = Profile::new(params, b.lambda, variant);
    let nf = params.n as f64;
    let mut max_ratio: f64 = 0.0;
    let mut max_grad: f64 = 0.0;
    for x in points {
        let r2 = b.dist2(x);
        let r = r2.sqrt();
        let u = pr.value(r2);
        max_ratio = max_ratio.max((pr.dlambda(r2) / u).abs());
        // radial derivatives of U and ∂_λU with s = λ²r²
        let s = pr.l2 * r2;
        let du = -2.0 * pr.a * pr.l2 * r * u / (1.0 + s);
        let f = (1.0 - s) / (1.0 + s);
        let df = -4.0 * pr.l2 * r / ((1.0 + s) * (1.0 + s));
        let dd = pr.a / pr.lambda * (du * f + u * df);
        let den = du.abs() + u.powf((params.p + 1.0) / 2.0);
        max_grad = max_grad.max(dd.abs() / den);
    }
    let bound = (nf - 2.0) / 2.0;
    DlambdaBoundReport { max_ratio, max_gradient_ratio: max_grad, bound, holds: max_ratio <= bound + 1e-12 }
}

/// T_{z,λ}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalMap {
    pub z: Vec<f64>,
    pub lambda: f64,
}

impl ConformalMap {
    pub fn new(z: Vec<f64>, lambda: f64) -> Self {
        assert!(lambda > 0.0, "lambda must be positive");
        ConformalMap { z, lambda }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(vec![0.0; n], 1.0)
    }

    /// T^{-1} = T_{−λz, 1/λ}.
    pub fn inverse(&self) -> Self {
        Self::new(self.z.iter().map(|v| -self.lambda * v).collect(), 1.0 / self.lambda)
    }

    /// Exact image of a bubble: T_{z,λ}U[z₀,λ₀] = U[z + z₀/λ, λλ₀].
    pub fn apply_params(&self, b: &BubbleParams) -> BubbleParams {
        BubbleParams::new(
            self.z.iter().zip(&b.z).map(|(z, z0)| z + z0 / self.lambda).collect(),
            self.lambda * b.lambda,
        )
    }

    pub fn apply_family(&self, f: &BubbleFamily) -> BubbleFamily {
        BubbleFamily::new(
            f.variant,
            f.members
                .iter()
                .map(|m| WeightedBubble { alpha: m.alpha, params: self.apply_params(&m.params) })
                .collect(),
        )
    }

    /// Preimage point λ(x − z).
    pub fn source_point(&self, x: &[f64], out: &mut [f64]) {
        for ((o, x), z) in out.iter_mut().zip(x).zip(&self.z) {
            *o = self.lambda * (x - z);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params() -> HlsParams {
        HlsParams::new(3, 2.75).unwrap()
    }

    #[test]
    fn center_values() {
        let p = params();
        let b = BubbleParams::centered(3, 1.0);
        let v = eval_bubble(&p, &b, Variant::Sobolev, &[0.0, 0.0, 0.0]);
        assert!((v - 3f64.powf(0.25)).abs() < 1e-15);
        let v1 = eval_bubble(&p, &b, Variant::Sobolev, &[1.0, 0.0, 0.0]);
        assert!((v1 - 3f64.powf(0.25) / 2f64.sqrt()).abs() < 1e-15);
        assert!((eval_dlambda(&p, &b, Variant::Choquard, &[0.0; 3]) - 0.5 * p.c_mu * 3f64.powf(0.25)).abs() < 1e-15);
        assert_eq!(eval_dlambda(&p, &b, Variant::Choquard, &[0.0, 1.0, 0.0]), 0.0);
        assert_eq!(eval_dz(&p, &b, Variant::Choquard, &[0.0; 3], 1), 0.0);
    }

    #[test]
    fn choquard_is_scalar_multiple() {
        let p = params();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = BubbleParams::new(vec![0.3, -0.2, 1.0], 1.7);
        for _ in 0..100 {
            let x: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
            let s = eval_bubble(&p, &b, Variant::Sobolev, &x);
            assert!((eval_bubble(&p, &b, Variant::Choquard, &x) - p.c_mu * s).abs() <= 1e-15 * s);
        }
    }

    #[test]
    fn dz_antisymmetric() {
        let p = params();
        let b = BubbleParams::new(vec![0.5, 0.5, 0.5], 2.0);
        let x = [1.2, -0.4, 0.9];
        let xr: Vec<f64> = x.iter().zip(&b.z).map(|(x, z)| 2.0 * z - x).collect();
        for j in 0..3 {
            let (a, c) = (eval_dz(&p, &b, Variant::Choquard, &x, j), eval_dz(&p, &b, Variant::Choquard, &xr, j));
            assert!((a + c).abs() <= 1e-15 * a.abs());
        }
    }

    #[test]
    fn conformal_params_compose() {
        let t = ConformalMap::new(vec![1.0, -2.0, 0.5], 3.0);
        let b = BubbleParams::centered(3, 1.0);
        let tb = t.apply_params(&b);
        assert_eq!(tb, BubbleParams::new(vec![1.0, -2.0, 0.5], 3.0));
        let back = t.inverse().apply_params(&tb);
        for (a, b) in back.z.iter().zip(&b.z) {
            assert!((a - b).abs() < 1e-15);
        }
        assert!((back.lambda - 1.0).abs() < 1e-15);
    }

    #[test]
    fn conformal_params_match_pointwise() {
        let p = params();
        let t = ConformalMap::new(vec![0.4, 0.1, -0.3], 2.5);
        let b = BubbleParams::new(vec![0.2, 0.0, 1.0], 0.7);
        let tb = t.apply_params(&b);
        let x = [0.9, -0.3, 0.2];
        let mut y = [0.0; 3];
        t.source_point(&x, &mut y);
        let direct = 2.5f64.sqrt() * eval_bubble(&p, &b, Variant::Sobolev, &y);
        let fast = eval_bubble(&p, &tb, Variant::Sobolev, &x);
        assert!((direct - fast).abs() < 1e-14 * fast);
    }
}
