//! Elementary power inequalities with seeded counterexample search.
//!
//! The constants are only known to exist, so the contract is operational: a
//! finite, stable supremum of LHS/majorant over heavy-tailed samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::Exec;

const BLOCKS: usize = 64;
const BOX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum FuzzOp {
    /// Two-term expansion with exponential weight.
    Expansion { r: f64, l: f64 },
    /// Cross terms of a ν-term sum.
    CrossTerm { r: f64, nu: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub op: FuzzOp,
    pub samples: usize,
    /// Non-finite ratios.
    pub violations: usize,
    /// max LHS/majorant over the random samples.
    pub worst_ratio: f64,
    /// max over the random samples and the deterministic extreme-ratio grid.
    pub searched_constant: f64,
}

fn signed_pow(x: f64, r: f64) -> f64 {
    x * x.abs().powf(r - 1.0)
}

/// (1+t)|1+t|^{r−1} − 1 − rt, by series for small t.
fn remainder(r: f64, t: f64) -> f64 {
    if t.abs() < 1e-3 {
        let mut c = r * (r - 1.0) / 2.0;
        let mut tp = t * t;
        let mut sum = 0.0;
        for k in 2..9 {
            sum += c * tp;
            c *= (r - k as f64) / (k as f64 + 1.0);
            tp *= t;
        }
        sum
    } else {
        signed_pow(1.0 + t, r) - 1.0 - r * t
    }
}

/// |(a+b)|a+b|^{r−1}e^{l(|a|+|b|)} − a|a|^{r−1}e^{l|a|} − (r|a|^{r−1}+la|a|^{r−1})e^{l|a|}b| over
/// {|a|^{r−2}b²e^{l|a|}}_{r>2} + l|a|^r|b|e^{l|a|} + |b|^r e^{l(|a|+|b|)}.
///
/// Both sides are divided by e^{l(|a|+|b|)} before evaluation.
pub fn expansion_ratio(r: f64, l: f64, a: f64, b: f64) -> Result<f64> {
    if !(r >= 1.0 && r.is_finite()) || !(l >= 0.0 && l.is_finite()) {
        return Err(Error::Domain(format!("need r >= 1 and l >= 0 (got r={r}, l={l})")));
    }
    if !(a.is_finite() && b.is_finite()) || (a == 0.0 && b == 0.0) {
        return Err(Error::Domain("(a, b) must be finite and not both zero".into()));
    }
    if b == 0.0 {
        return Ok(0.0);
    }
    if a == 0.0 {
        return Ok(1.0);
    }
    let aa = a.abs();
    let t = b / a;
    let m = l * b.abs();
    let damp = (-m).exp();
    let ar = aa.powf(r);
    // s_a A^r [(1+t)|1+t|^{r−1} e^m − 1 − rt] − l A^{r+1} t, times e^{−m}
    let bracket = remainder(r, t) - (1.0 + r * t) * (-m).exp_m1();
    let lhs = (a.signum() * ar * bracket - l * ar * aa * t * damp).abs();
    let mut rhs = b.abs().powf(r) + l * ar * b.abs() * damp;
    if r > 2.0 {
        rhs += aa.powf(r - 2.0) * b * b * damp;
    }
    Ok(lhs / rhs)
}

/// |(Σa_i)|Σa_i|^{r−1} − Σa_i|a_i|^{r−1}| / Σ_{i≠j}|a_i|^{r−1}|a_j|.
pub fn cross_term_ratio(r: f64, a: &[f64]) -> Result<f64> {
    if !(r >= 1.0 && r.is_finite()) {
        return Err(Error::Domain(format!("need r >= 1 (got {r})")));
    }
    if a.is_empty() || a.iter().any(|v| !v.is_finite()) || a.iter().all(|&v| v == 0.0) {
        return Err(Error::Domain("a must be a finite, non-zero vector".into()));
    }
    if a.len() == 1 {
        return Ok(0.0);
    }
    let s: f64 = a.iter().sum();
    let lhs = (signed_pow(s, r) - a.iter().map(|&v| signed_pow(v, r)).sum::<f64>()).abs();
    let p: Vec<f64> = a.iter().map(|v| v.abs().powf(r - 1.0)).collect();
    let q: f64 = a.iter().map(|v| v.abs()).sum();
    let den: f64 = p.iter().zip(a).map(|(p, v)| p * (q - v.abs())).sum();
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(lhs / den)
}

fn cauchy(rng: &mut ChaCha8Rng) -> f64 {
    (std::f64::consts::PI * (rng.random::<f64>() - 0.5)).tan()
}

/// Half uniform on [−10,10]^k; half a uniform base with the other entries
/// Cauchy multiples of it, rescaled into the box.
fn draw(rng: &mut ChaCha8Rng, k: usize, out: &mut [f64]) {
    if rng.random::<bool>() {
        for v in out.iter_mut().take(k) {
            *v = rng.random_range(-BOX..BOX);
        }
        return;
    }
    let base = rng.random_range(-BOX..BOX);
    let pivot = rng.random_range(0..k);
    for (i, v) in out.iter_mut().take(k).enumerate() {
        *v = if i == pivot { base } else { base * cauchy(rng) };
    }
    let m = out[..k].iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m > BOX {
        for v in out.iter_mut().take(k) {
            *v *= BOX / m;
        }
    }
}

fn eval(op: FuzzOp, x: &[f64]) -> f64 {
    let res = match op {
        FuzzOp::Expansion { r, l } => expansion_ratio(r, l, x[0], x[1]),
        FuzzOp::CrossTerm { r, .. } => cross_term_ratio(r, x),
    };
    res.unwrap_or(0.0)
}

fn arity(op: FuzzOp) -> usize {
    match op {
        FuzzOp::Expansion { .. } => 2,
        FuzzOp::CrossTerm { nu, .. } => nu,
    }
}

/// |b/a| ∈ {1e−8 … 1e8} on a log grid, both signs, magnitudes in the box.
fn regime_points(k: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for e in -32..=32 {
        let ratio = 10f64.powf(e as f64 / 4.0);
        for (sa, sb) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
            let (x, y) = if ratio <= 1.0 { (BOX, BOX * ratio) } else { (BOX / ratio, BOX) };
            let mut v = vec![sa * x; k];
            for item in v.iter_mut().skip(1) {
                *item = sb * y;
            }
            out.push(v);
        }
    }
    out
}

fn check_op(op: FuzzOp) -> Result<()> {
    match op {
        FuzzOp::Expansion { r, l } if r >= 1.0 && l >= 0.0 => Ok(()),
        FuzzOp::CrossTerm { r, nu } if r >= 1.0 && nu >= 1 => Ok(()),
        _ => Err(Error::Domain(format!("invalid fuzz operator {op:?}"))),
    }
}

/// Seeded search for the supremum of LHS/majorant.
pub fn fuzz(op: FuzzOp, samples: usize, seed: u64) -> Result<FuzzReport> {
    fuzz_with(op, samples, seed, Exec::default())
}

pub fn fuzz_with(op: FuzzOp, samples: usize, seed: u64, exec: Exec) -> Result<FuzzReport> {
    if samples == 0 {
        return Err(Error::Domain("fuzz needs at least one sample".into()));
    }
    check_op(op)?;
    let k = arity(op);
    let step = samples.div_ceil(BLOCKS);
    let parts = exec.map(BLOCKS, |blk| {
        let lo = (blk * step).min(samples);
        let hi = ((blk + 1) * step).min(samples);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(blk as u64);
        let mut x = vec![0.0; k];
        let mut worst = 0.0f64;
        let mut bad = 0usize;
        for _ in lo..hi {
            draw(&mut rng, k, &mut x);
            if x.iter().all(|&v| v == 0.0) {
                continue;
            }
            let v = eval(op, &x);
            if v.is_finite() {
                worst = worst.max(v);
            } else {
                bad += 1;
            }
        }
        (worst, bad)
    });
    let worst_ratio = parts.iter().fold(0.0f64, |a, p| a.max(p.0));
    let mut violations: usize = parts.iter().map(|p| p.1).sum();
    let mut searched_constant = worst_ratio;
    for x in regime_points(k) {
        let v = eval(op, &x);
        if v.is_finite() {
            searched_constant = searched_constant.max(v);
        } else {
            violations += 1;
        }
    }
    Ok(FuzzReport { op, samples, violations, worst_ratio, searched_constant })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trivial_cases() {
        assert_eq!(expansion_ratio(3.0, 0.5, 2.0, 0.0).unwrap(), 0.0);
        assert_eq!(expansion_ratio(2.0, 0.0, 0.0, -1.7).unwrap(), 1.0);
        assert_eq!(cross_term_ratio(2.5, &[3.0]).unwrap(), 0.0);
        assert!((cross_term_ratio(2.0, &[1.0, 1.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!(expansion_ratio(0.5, 0.0, 1.0, 1.0).is_err());
        assert!(cross_term_ratio(2.0, &[0.0, 0.0]).is_err());
        assert!(fuzz(FuzzOp::Expansion { r: 2.0, l: 0.0 }, 0, 1).is_err());
    }

    #[test]
    fn r_one_telescopes() {
        let rep = fuzz(FuzzOp::Expansion { r: 1.0, l: 0.0 }, 10_000, 3).unwrap();
        assert!(rep.searched_constant < 1e-12, "{rep:?}");
    }

    #[test]
    fn weighted_form_matches_direct_evaluation() {
        let direct = |r: f64, l: f64, a: f64, b: f64| {
            let e = |x: f64| (l * x).exp();
            let lhs = (signed_pow(a + b, r) * e(a.abs() + b.abs())
                - signed_pow(a, r) * e(a.abs())
                - (r * a.abs().powf(r - 1.0) + l * a * a.abs().powf(r - 1.0)) * e(a.abs()) * b)
                .abs();
            let mut rhs = l * a.abs().powf(r) * b.abs() * e(a.abs()) + b.abs().powf(r) * e(a.abs() + b.abs());
            if r > 2.0 {
                rhs += a.abs().powf(r - 2.0) * b * b * e(a.abs());
            }
            lhs / rhs
        };
        for &(r, l, a, b) in &[(3.25, 0.5, 1.3, -0.7), (2.0, 1.0, -2.0, 3.0), (5.0, 0.5, 0.4, 0.9), (1.5, 1.0, -1.1, -0.2)] {
            let x = expansion_ratio(r, l, a, b).unwrap();
            let y = direct(r, l, a, b);
            assert!((x - y).abs() < 1e-12 * y.max(1.0), "{r} {l} {a} {b}: {x} vs {y}");
        }
    }

    #[test]
    fn series_matches_direct_remainder() {
        for r in [1.5, 2.25, 3.25, 5.0] {
            let t = 9e-4;
            let direct = signed_pow(1.0 + t, r) - 1.0 - r * t;
            assert!((remainder(r, t) - direct).abs() < 1e-9 * direct.abs());
        }
    }

    #[test]
    fn interior_supremum_matches_oracle() {
        let rep = fuzz(FuzzOp::Expansion { r: 3.25, l: 0.0 }, 200_000, 11).unwrap();
        assert_eq!(rep.violations, 0);
        // dense mpmath scan over t = b/a
        let oracle = 3.6600105937;
        assert!(rep.searched_constant <= oracle * (1.0 + 1e-9));
        assert!(rep.searched_constant >= 0.99 * oracle, "{rep:?}");
    }

    #[test]
    fn deterministic() {
        let op = FuzzOp::CrossTerm { r: 2.25, nu: 3 };
        assert_eq!(fuzz(op, 5000, 9).unwrap(), fuzz(op, 5000, 9).unwrap());
        assert_eq!(
            fuzz_with(op, 5000, 9, Exec::Sequential).unwrap(),
            fuzz_with(op, 5000, 9, Exec::Parallel).unwrap()
        );
    }
}
