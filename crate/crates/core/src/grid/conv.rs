//! Free-space lattice convolution with singular radial kernels K|x|^{-s}.
//!
//! Two ways of building lattice weights are provided. `Spectral` truncates the
//! kernel at the box diameter and synthesizes its weights from the exact
//! Fourier transform of the truncated kernel on an oversampled frequency grid;
//! it is spectrally accurate for resolved densities. `ZetaCorrected` samples
//! the kernel pointwise and repairs the origin with Epstein zeta stencils
//! (fourth order). Either way the weights are applied by zero-padded (2n)³
//! FFTs; the padding is never materialized in full: the passes pad one axis at
//! a time and crop on the way back.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::grid::fft::{line_pass, line_pass_inplace, Plans, C64};
use crate::par::Exec;
use crate::special::{epstein_cubic_harmonic_z3, epstein_zeta_z3, sine_moment};

/// Radially symmetric kernel coef·|x|^{-s}, 0 < s < 3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerKernel {
    pub coef: f64,
    pub s: f64,
}

impl PowerKernel {
    /// Newton kernel 1/(4π|x|) of −Δ in R³.
    pub fn newton() -> Self {
        PowerKernel { coef: 1.0 / (4.0 * std::f64::consts::PI), s: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Scheme {
    #[default]
    Spectral,
    ZetaCorrected,
}

/// Precomputed transform of the padded lattice kernel.
pub struct LatticeKernel {
    pub n: usize,
    pub h: f64,
    pub kernel: PowerKernel,
    pub scheme: Scheme,
    /// Real, even transform on the (n+1)³ octant of the (2n)³ frequency grid.
    hat: Vec<f64>,
}

type Key = (usize, u64, u64, u64, Scheme);

fn cache() -> &'static Mutex<HashMap<Key, Arc<LatticeKernel>>> {
    static CACHE: OnceLock<Mutex<HashMap<Key, Arc<LatticeKernel>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl LatticeKernel {
    /// Cached kernel for an n³ lattice of spacing h.
    pub fn get(n: usize, h: f64, kernel: PowerKernel) -> Arc<LatticeKernel> {
        Self::get_with(n, h, kernel, Scheme::default())
    }

    pub fn get_with(n: usize, h: f64, kernel: PowerKernel, scheme: Scheme) -> Arc<LatticeKernel> {
        let key = (n, h.to_bits(), kernel.coef.to_bits(), kernel.s.to_bits(), scheme);
        if let Some(k) = cache().lock().unwrap().get(&key) {
            return k.clone();
        }
        let k = Arc::new(Self::build(n, h, kernel, scheme, Exec::default()));
        let mut c = cache().lock().unwrap();
        if c.len() >= 8 {
            c.clear();
        }
        c.insert(key, k.clone());
        k
    }

    /// Pointwise kernel samples with zeta-corrected origin stencil, on the octant.
    pub fn zeta_weights(n: usize, h: f64, kernel: PowerKernel) -> Vec<f64> {
        let m1 = n + 1;
        let PowerKernel { coef, s } = kernel;
        let mut w = vec![0.0; m1 * m1 * m1];
        let hs = coef * h.powf(-s);
        for a in 0..m1 {
            for b in 0..m1 {
                for c in 0..m1 {
                    let r2 = (a * a + b * b + c * c) as f64;
                    if r2 > 0.0 {
                        w[(a * m1 + b) * m1 + c] = hs * r2.powf(-0.5 * s);
                    }
                }
            }
        }
        let z0 = epstein_zeta_z3(s);
        let z2 = epstein_zeta_z3(s - 2.0);
        let z4 = epstein_zeta_z3(s - 4.0);
        // Σ' m₁⁴|m|^{-s} and Σ' m₁²m₂²|m|^{-s}
        let a4 = (epstein_cubic_harmonic_z3(s) + 0.6 * z4) / 3.0;
        let b4 = (z4 - 3.0 * a4) / 6.0;
        let ca = a4 / 24.0 - z2 / 72.0;
        let cb = b4 / 4.0;
        let at = |a: usize, b: usize, c: usize| (a * m1 + b) * m1 + c;
        w[0] = -hs * (z0 - z2 + 18.0 * ca + 12.0 * cb);
        for (a, b, c) in [(1, 0, 0), (0, 1, 0), (0, 0, 1)] {
            w[at(a, b, c)] -= hs * (z2 / 6.0 - 4.0 * ca - 4.0 * cb);
            w[at(2 * a, 2 * b, 2 * c)] -= hs * ca;
        }
        for (a, b, c) in [(1, 1, 0), (1, 0, 1), (0, 1, 1)] {
            w[at(a, b, c)] -= hs * cb;
        }
        w
    }

    /// Band-limited weights of the kernel truncated at radius √3·n·h, on the octant.
    pub fn spectral_weights(n: usize, h: f64, kernel: PowerKernel, exec: Exec) -> Vec<f64> {
        let PowerKernel { coef, s } = kernel;
        let p = 3 * n;
        let half = p / 2;
        let m1 = n + 1;
        let q1 = half + 1;
        let dk = 2.0 * std::f64::consts::PI / (p as f64 * h);
        let radius = 3f64.sqrt() * n as f64 * h;
        let four_pi = 4.0 * std::f64::consts::PI;
        let table: Vec<f64> = exec.map(3 * half * half + 1, |q| {
            if q == 0 {
                coef * four_pi * radius.powf(3.0 - s) / (3.0 - s)
            } else {
                let k = dk * (q as f64).sqrt();
                coef * four_pi * k.powf(s - 3.0) * sine_moment(s, k * radius)
            }
        });
        let plans = Plans::new(p);
        let even_dft = |vals: &mut dyn FnMut(usize) -> f64| -> Vec<f64> {
            let mut buf = vec![C64::new(0.0, 0.0); p];
            for j in 0..=half {
                buf[j].re = vals(j);
            }
            for j in 1..half {
                buf[p - j].re = buf[j].re;
            }
            plans.fwd.process(&mut buf);
            (0..m1).map(|j| buf[j].re).collect()
        };
        // frequency octant → real octant one axis at a time
        let a: Vec<Vec<f64>> = exec.map(q1 * q1, |bc| {
            let (b, c) = (bc / q1, bc % q1);
            even_dft(&mut |j| table[j * j + b * b + c * c])
        });
        let bpass: Vec<Vec<f64>> = exec.map(m1 * q1, |cm| {
            let (c, ma) = (cm / m1, cm % m1);
            even_dft(&mut |j| a[j * q1 + c][ma])
        });
        drop(a);
        let cpass: Vec<Vec<f64>> = exec.map(m1 * m1, |ab| {
            let (ma, mb) = (ab / m1, ab % m1);
            even_dft(&mut |j| bpass[j * m1 + ma][mb])
        });
        let scale = 1.0 / (p as f64 * h).powi(3);
        let mut w = vec![0.0; m1 * m1 * m1];
        for (ab, line) in cpass.into_iter().enumerate() {
            for (mc, v) in line.into_iter().enumerate() {
                w[ab * m1 + mc] = v * scale;
            }
        }
        w
    }

    pub fn build(n: usize, h: f64, kernel: PowerKernel, scheme: Scheme, exec: Exec) -> Self {
        let mut hat = match scheme {
            Scheme::Spectral => Self::spectral_weights(n, h, kernel, exec),
            Scheme::ZetaCorrected => Self::zeta_weights(n, h, kernel),
        };
        let m1 = n + 1;
        let plans = Plans::new(2 * n);
        // even DFT of length 2n along each axis of the octant
        for axis in 0..3 {
            let stride = [m1 * m1, m1, 1][axis];
            let lines: Vec<usize> = (0..m1 * m1 * m1).filter(|&i| (i / stride) % m1 == 0).collect();
            let results = exec.map(lines.len(), |l| {
                let base = lines[l];
                let mut buf = vec![C64::new(0.0, 0.0); 2 * n];
                for j in 0..=n {
                    buf[j].re = hat[base + j * stride];
                }
                for j in 1..n {
                    buf[2 * n - j].re = hat[base + j * stride];
                }
                plans.fwd.process(&mut buf);
                (0..=n).map(|j| buf[j].re).collect::<Vec<f64>>()
            });
            for (l, vals) in results.into_iter().enumerate() {
                let base = lines[l];
                for (j, v) in vals.into_iter().enumerate() {
                    hat[base + j * stride] = v;
                }
            }
        }
        LatticeKernel { n, h, kernel, scheme, hat }
    }

    #[inline]
    fn hat_at(&self, kx: usize, ky: usize, kz: usize) -> f64 {
        let n2 = 2 * self.n;
        let f = |k: usize| if k > self.n { n2 - k } else { k };
        let m1 = self.n + 1;
        self.hat[(f(kx) * m1 + f(ky)) * m1 + f(kz)]
    }

    /// Convolve an n³ complex field (two packed real fields) with the kernel.
    pub fn apply_complex(&self, field: Vec<C64>, exec: Exec) -> Vec<C64> {
        let n = self.n;
        let n2 = 2 * n;
        assert_eq!(field.len(), n * n * n, "field size does not match kernel");
        let plans = Plans::new(n2);
        let sl = plans.scratch_len();
        let fwd = |w: &mut [C64], s: &mut [C64], _: (usize, usize)| plans.fwd.process_with_scratch(w, s);
        let inv = |w: &mut [C64], s: &mut [C64], _: (usize, usize)| plans.inv.process_with_scratch(w, s);
        let (a, dims) = line_pass(&field, [n, n, n], 0, n2, n2, sl, fwd, exec);
        drop(field);
        let (mut a, dims) = line_pass(&a, dims, 1, n2, n2, sl, fwd, exec);
        // contiguous z-lines: pad, transform, multiply, invert, crop
        line_pass_inplace(
            &mut a,
            n,
            n2,
            sl,
            |w, s, line| {
                let (kx, ky) = (line / n2, line % n2);
                plans.fwd.process_with_scratch(w, s);
                for (kz, v) in w.iter_mut().enumerate() {
                    *v *= self.hat_at(kx, ky, kz);
                }
                plans.inv.process_with_scratch(w, s);
            },
            exec,
        );
        let (a, dims) = line_pass(&a, dims, 1, n2, n, sl, inv, exec);
        let (mut a, _) = line_pass(&a, dims, 0, n2, n, sl, inv, exec);
        let scale = self.h.powi(3) / (n2 * n2 * n2) as f64;
        for v in a.iter_mut() {
            *v *= scale;
        }
        a
    }

    /// Convolve one real field.
    pub fn apply(&self, f: &[f64], exec: Exec) -> Vec<f64> {
        let data = f.iter().map(|&v| C64::new(v, 0.0)).collect();
        self.apply_complex(data, exec).into_iter().map(|c| c.re).collect()
    }

    /// Convolve two real fields at the cost of one.
    pub fn apply_pair(&self, f: &[f64], g: &[f64], exec: Exec) -> (Vec<f64>, Vec<f64>) {
        let data = f.iter().zip(g).map(|(&a, &b)| C64::new(a, b)).collect();
        let out = self.apply_complex(data, exec);
        (out.iter().map(|c| c.re).collect(), out.iter().map(|c| c.im).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::gamma;
    use std::f64::consts::PI;

    fn gaussian_check(s: f64, n: usize, scheme: Scheme) -> f64 {
        // (|x|^{-s} ∗ e^{-|x|²})(0) = 2π Γ((3−s)/2)
        let l = 6.0;
        let h = 2.0 * l / n as f64;
        let k = LatticeKernel::build(n, h, PowerKernel { coef: 1.0, s }, scheme, Exec::default());
        let mut f = vec![0.0; n * n * n];
        for i in 0..n {
            for j in 0..n {
                for m in 0..n {
                    let x = [-l + i as f64 * h, -l + j as f64 * h, -l + m as f64 * h];
                    f[(i * n + j) * n + m] = (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp();
                }
            }
        }
        let out = k.apply(&f, Exec::default());
        let c = n / 2;
        let exact = 2.0 * PI * gamma((3.0 - s) / 2.0);
        (out[(c * n + c) * n + c] - exact).abs() / exact
    }

    #[test]
    fn corrected_lattice_sum_is_accurate() {
        for s in [1.0, 2.0, 2.75] {
            let e = gaussian_check(s, 32, Scheme::ZetaCorrected);
            let f = gaussian_check(s, 64, Scheme::ZetaCorrected);
            assert!(e < 2e-4 && f < 2e-6, "s={s}: rel err {e} / {f}");
            assert!(e / f > 50.0, "s={s}: no convergence");
        }
    }

    #[test]
    fn spectral_lattice_sum_is_accurate() {
        for s in [1.0, 2.0, 2.75] {
            let e = gaussian_check(s, 32, Scheme::Spectral);
            assert!(e < 1e-10, "s={s}: rel err {e}");
        }
    }
}
