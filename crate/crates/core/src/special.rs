//! Special functions: Gamma, upper incomplete Gamma, the Epstein zeta
//! function of the cubic lattice, and Gauss–Legendre rules.

use std::f64::consts::PI;

//==============================================================================
// Gamma
//==============================================================================

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function (Lanczos, g = 7, with reflection for x < 1/2).
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS_COEF[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * a
    }
}

/// Reciprocal Gamma, exact zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        0.0
    } else {
        1.0 / gamma(x)
    }
}

/// log Γ(x) for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x)
    } else {
        let x = x - 1.0;
        let mut a = LANCZOS_COEF[0];
        let t = x + LANCZOS_G + 0.5;
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            a += c / (x + i as f64);
        }
        0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
    }
}

/// Upper incomplete Gamma Γ(a, x) by Legendre's continued fraction.
///
/// Valid for any real `a`; intended for x ≳ 1 where the fraction converges fast.
pub fn upper_gamma(a: f64, x: f64) -> f64 {
    assert!(x > 0.0, "upper_gamma needs x > 0");
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x + a * x.ln()).exp() * h
}

//==============================================================================
// Epstein zeta of Z^3
//==============================================================================

/// Analytically continued Z(s) = Σ'_{m∈Z³} |m|^{-s}, for s ≠ 3.
pub fn epstein_zeta_z3(s: f64) -> f64 {
    if s.abs() < 1e-14 {
        return -1.0;
    }
    if s < 0.0 && (s / 2.0) == (s / 2.0).round() {
        return 0.0;
    }
    let sh = 0.5 * s;
    let th = 0.5 * (3.0 - s);
    let mut acc = 0.0;
    let r = 6i32;
    for i in -r..=r {
        for j in -r..=r {
            for k in -r..=r {
                let m2 = i * i + j * j + k * k;
                if m2 == 0 || m2 > 36 {
                    continue;
                }
                let x = PI * m2 as f64;
                acc += x.powf(-sh) * upper_gamma(sh, x) + x.powf(-th) * upper_gamma(th, x);
            }
        }
    }
    let lam = acc - 2.0 / s - 2.0 / (3.0 - s);
    PI.powf(sh) * rgamma(sh) * lam
}

/// Σ' H(m)|m|^{-s} over Z³ with the cubic harmonic H = Σm_i⁴ − (3/5)|m|⁴ (entire in s).
pub fn epstein_cubic_harmonic_z3(s: f64) -> f64 {
    let sh = 0.5 * s;
    let th = 0.5 * (11.0 - s);
    let mut acc = 0.0;
    let r = 6i32;
    for i in -r..=r {
        for j in -r..=r {
            for k in -r..=r {
                let m2 = i * i + j * j + k * k;
                if m2 == 0 || m2 > 36 {
                    continue;
                }
                let hm = (i.pow(4) + j.pow(4) + k.pow(4)) as f64 - 0.6 * (m2 * m2) as f64;
                if hm == 0.0 {
                    continue;
                }
                let x = PI * m2 as f64;
                acc += hm * (x.powf(-sh) * upper_gamma(sh, x) + x.powf(-th) * upper_gamma(th, x));
            }
        }
    }
    PI.powf(sh) * rgamma(sh) * acc
}

//==============================================================================
// truncated power-kernel transform
//==============================================================================

/// F(X) = ∫_0^X t^{1−s} sin t dt for 0 < s < 3.
pub fn sine_moment(s: f64, x: f64) -> f64 {
    assert!(s > 0.0 && s < 3.0 && x >= 0.0, "sine_moment needs 0 < s < 3, X ≥ 0");
    if x <= 6.0 {
        return sine_moment_series(s, x);
    }
    if x >= 36.0 {
        return sine_moment_asymptotic(s, x);
    }
    let mut acc = sine_moment_series(s, 6.0);
    let (gx, gw) = gauss_legendre(24);
    let panels = ((x - 6.0) / 2.0).ceil() as usize;
    let w = (x - 6.0) / panels as f64;
    for p in 0..panels {
        let a = 6.0 + p as f64 * w;
        for (t, wt) in gx.iter().zip(&gw) {
            let u = a + 0.5 * w * (1.0 + t);
            acc += 0.5 * w * wt * u.powf(1.0 - s) * u.sin();
        }
    }
    acc
}

fn sine_moment_series(s: f64, x: f64) -> f64 {
    let mut acc = 0.0;
    let mut term = x; // x^{2j+1}/(2j+1)!
    let x2 = x * x;
    let lead = x.powf(2.0 - s);
    for j in 0..60 {
        let jf = j as f64;
        let c = term / (2.0 * jf + 3.0 - s);
        acc += if j % 2 == 0 { c } else { -c };
        term *= x2 / ((2.0 * jf + 2.0) * (2.0 * jf + 3.0));
        if term < 1e-18 * acc.abs() {
            break;
        }
    }
    acc * lead
}

fn sine_moment_asymptotic(s: f64, x: f64) -> f64 {
    // Abel-regularized ∫_0^∞ t^a e^{it} dt minus the tail i e^{iX} Σ i^k a(a−1)…(a−k+1) X^{a−k}
    let a = 1.0 - s;
    let z = a + 1.0;
    let full = if z.abs() < 0.5 { PI / (2.0 * (0.5 * PI * z).cos() * gamma(1.0 - z)) } else { gamma(z) * (0.5 * PI * z).sin() };
    let (mut re, mut im) = (0.0, 0.0);
    let mut coef = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let mag = coef * x.powf(-(k as f64));
        if mag.abs() > prev || mag.abs() < 1e-18 {
            break;
        }
        prev = mag.abs();
        // i^{k+1}
        match (k + 1) % 4 {
            0 => re += mag,
            1 => im += mag,
            2 => re -= mag,
            _ => im -= mag,
        }
        coef *= a - k as f64;
    }
    let (c, sn) = (x.cos(), x.sin());
    let xa = x.powf(a);
    // Im[(re + i im) e^{iX}] X^a
    full - xa * (re * sn + im * c)
}

//==============================================================================
// Gauss–Legendre
//==============================================================================

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p1 = z;
                p0 = 1.0;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
        assert!((gamma(-0.5) + 2.0 * PI.sqrt()).abs() < 1e-13);
        assert!((ln_gamma(10.5) - gamma(10.5).ln()).abs() < 1e-12);
    }

    #[test]
    fn incomplete_gamma_matches_erfc() {
        // Γ(1/2, x) = √π erfc(√x); erfc(√π) for x = π.
        let v = upper_gamma(0.5, PI);
        assert!((v - PI.sqrt() * 0.012_188_882_184_802_887).abs() < 1e-15);
        assert!((upper_gamma(1.0, 3.0) - (-3.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn epstein_known_values() {
        let cases = [
            (1.0, -2.837_297_479_480_619_5),
            (2.75, -46.483_046_818_132_414),
            (0.75, -2.198_309_941_546_361),
            (-1.0, -0.266_596_278_718_393_47),
            (4.0, 16.532_315_959_761_67),
            (-3.0, 0.041_183_252_544_960_035),
            (-1.25, -0.168_547_447_643_182_49),
        ];
        for (s, z) in cases {
            let v = epstein_zeta_z3(s);
            assert!((v - z).abs() < 1e-12 * z.abs().max(1.0), "s={s}: {v} vs {z}");
        }
        assert_eq!(epstein_zeta_z3(0.0), -1.0);
    }

    #[test]
    fn sine_moment_closed_forms() {
        // s = 1: 1 − cos X; s = 2: Si(X)
        for x in [0.3, 5.9, 6.1, 20.0, 35.9, 36.1, 400.0] {
            assert!((sine_moment(1.0, x) - (1.0 - x.cos())).abs() < 1e-13, "X={x}");
        }
        assert!((sine_moment(2.0, 10.0) - 1.658_347_594_218_874_0).abs() < 1e-13);
        assert!((sine_moment(2.0, 50.0) - 1.551_617_072_485_935_9).abs() < 1e-13);
        for s in [0.5, 1.5, 2.75] {
            for x in [5.99, 35.99] {
                let d = (sine_moment(s, x + 0.02) - sine_moment(s, x)) / 0.02;
                let m = x + 0.01;
                assert!((d - m.powf(1.0 - s) * m.sin()).abs() < 1e-4, "s={s} X={x}");
            }
        }
    }

    #[test]
    fn cubic_harmonic_zeta_values() {
        for (s, z) in [(1.0, 0.173_472_266_477_980_3), (2.0, 0.451_102_859_474_716_83), (2.75, 0.696_977_197_251_655_55)] {
            let v = epstein_cubic_harmonic_z3(s);
            assert!((v - z).abs() < 1e-12, "s={s}: {v} vs {z}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for n in 1..12 {
            let (x, w) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }
}
