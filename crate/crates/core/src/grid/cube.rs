//! Uniform periodic grid on the cube [−L, L)³ with spectral derivatives.

use crate::error::{Error, Result};
use crate::grid::fft::{fft3, wavenumber, wavenumber_d1, C64};
use crate::par::Exec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid {
    pub half_width: f64,
    pub n: usize,
}

impl BoxGrid {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || n < 32 || n % 2 != 0 {
            return Err(Error::Domain(format!("box grid needs L > 0 and even n ≥ 32 (got L={half_width}, n={n})")));
        }
        Ok(BoxGrid { half_width, n })
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(3)
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h()
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let n = self.n;
        [self.coord(idx / (n * n)), self.coord((idx / n) % n), self.coord(idx % n)]
    }

    /// Evaluate `f` at every lattice site.
    pub fn sample<F>(&self, f: F, exec: Exec) -> Vec<f64>
    where
        F: Fn([f64; 3]) -> f64 + Sync + Send,
    {
        let n = self.n;
        let mut out = vec![0.0; self.len()];
        exec.chunks_mut(&mut out, n * n, |i, slab| {
            let x = self.coord(i);
            for j in 0..n {
                let y = self.coord(j);
                for k in 0..n {
                    slab[j * n + k] = f([x, y, self.coord(k)]);
                }
            }
        });
        out
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().sum::<f64>() * self.cell_volume()
    }

    /// Largest |f| on the boundary planes relative to max |f|.
    pub fn boundary_ratio(&self, f: &[f64]) -> f64 {
        let n = self.n;
        let max = f.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if max == 0.0 {
            return 0.0;
        }
        let mut b: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                b = b
                    .max(f[self.index(0, i, j)].abs())
                    .max(f[self.index(i, 0, j)].abs())
                    .max(f[self.index(i, j, 0)].abs());
            }
        }
        b / max
    }

    pub fn check_decay(&self, f: &[f64]) -> Result<()> {
        let r = self.boundary_ratio(f);
        if r > BOX_DECAY_TOL {
            return Err(Error::Boundary(format!("field has not decayed at the box boundary (ratio {r:.3e})")));
        }
        Ok(())
    }

    pub fn forward(&self, f: &[f64], exec: Exec) -> Vec<C64> {
        fft3(f.iter().map(|&v| C64::new(v, 0.0)).collect(), self.n, false, exec)
    }

    /// Frequency-space visitor: calls `g(index, kx, ky, kz)` with first-derivative wavenumbers.
    fn for_modes<F: FnMut(usize, f64, f64, f64)>(&self, mut g: F) {
        let (n, h) = (self.n, self.h());
        for a in 0..n {
            let kx = wavenumber_d1(a, n, h);
            for b in 0..n {
                let ky = wavenumber_d1(b, n, h);
                for c in 0..n {
                    g(self.index(a, b, c), kx, ky, wavenumber_d1(c, n, h));
                }
            }
        }
    }

    /// ∫∇f·∇g via one packed transform.
    pub fn dirichlet_inner(&self, f: &[f64], g: &[f64], exec: Exec) -> f64 {
        let n = self.n;
        let data: Vec<C64> = f.iter().zip(g).map(|(&a, &b)| C64::new(a, b)).collect();
        let t = fft3(data, n, false, exec);
        let neg = |m: usize| (n - m) % n;
        let mut acc = 0.0;
        self.for_modes(|idx, kx, ky, kz| {
            let k2 = kx * kx + ky * ky + kz * kz;
            if k2 == 0.0 {
                return;
            }
            let (a, b, c) = (idx / (n * n), (idx / n) % n, idx % n);
            let m = t[self.index(neg(a), neg(b), neg(c))].conj();
            let fh = (t[idx] + m) * 0.5;
            let gh = (t[idx] - m) * C64::new(0.0, -0.5);
            acc += k2 * (fh * gh.conj()).re;
        });
        acc * self.cell_volume() / self.len() as f64
    }

    pub fn dirichlet_energy(&self, f: &[f64], exec: Exec) -> f64 {
        let t = self.forward(f, exec);
        let mut acc = 0.0;
        self.for_modes(|idx, kx, ky, kz| acc += (kx * kx + ky * ky + kz * kz) * t[idx].norm_sqr());
        acc * self.cell_volume() / self.len() as f64
    }

    /// Spectral Laplacian.
    pub fn laplacian(&self, f: &[f64], exec: Exec) -> Vec<f64> {
        let mut t = self.forward(f, exec);
        self.for_modes(|idx, kx, ky, kz| t[idx] *= -(kx * kx + ky * ky + kz * kz));
        let inv = fft3(t, self.n, true, exec);
        let s = 1.0 / self.len() as f64;
        inv.into_iter().map(|c| c.re * s).collect()
    }

    /// Spectral gradient components.
    pub fn gradient(&self, f: &[f64], exec: Exec) -> [Vec<f64>; 3] {
        let t = self.forward(f, exec);
        let s = 1.0 / self.len() as f64;
        let comp = |axis: usize| {
            let mut d = t.clone();
            self.for_modes(|idx, kx, ky, kz| d[idx] *= C64::new(0.0, [kx, ky, kz][axis]));
            fft3(d, self.n, true, exec).into_iter().map(|c| c.re * s).collect::<Vec<f64>>()
        };
        [comp(0), comp(1), comp(2)]
    }

    /// Periodic multiplier m(|k|) applied to f; `m` receives |k| (Nyquist kept).
    pub fn apply_multiplier<M: Fn(f64) -> f64>(&self, f: &[f64], m: M, exec: Exec) -> Vec<f64> {
        let (n, h) = (self.n, self.h());
        let mut t = self.forward(f, exec);
        for a in 0..n {
            let kx = wavenumber(a, n, h);
            for b in 0..n {
                let ky = wavenumber(b, n, h);
                for c in 0..n {
                    let kz = wavenumber(c, n, h);
                    t[self.index(a, b, c)] *= m((kx * kx + ky * ky + kz * kz).sqrt());
                }
            }
        }
        let s = 1.0 / self.len() as f64;
        fft3(t, n, true, exec).into_iter().map(|c| c.re * s).collect()
    }

    /// Periodic dual norm ‖f − mean‖_{Ḣ^{-1}} by two paths.
    pub fn dual_norm(&self, f: &[f64], exec: Exec) -> PeriodicDualNorm {
        let mean = f.iter().sum::<f64>() / self.len() as f64;
        let g: Vec<f64> = f.iter().map(|v| v - mean).collect();
        let t = self.forward(&g, exec);
        let mut phi = t.clone();
        let mut fourier = 0.0;
        self.for_modes(|idx, kx, ky, kz| {
            let k2 = kx * kx + ky * ky + kz * kz;
            if k2 == 0.0 {
                phi[idx] = C64::new(0.0, 0.0);
            } else {
                phi[idx] = t[idx] / k2;
                fourier += t[idx].norm_sqr() / k2;
            }
        });
        let fourier = (fourier * self.cell_volume() / self.len() as f64).sqrt();
        let s = 1.0 / self.len() as f64;
        let mut solve = 0.0;
        for axis in 0..3 {
            let mut d = phi.clone();
            self.for_modes(|idx, kx, ky, kz| d[idx] *= C64::new(0.0, [kx, ky, kz][axis]));
            let comp = fft3(d, self.n, true, exec);
            solve += comp.iter().map(|c| (c.re * s).powi(2)).sum::<f64>();
        }
        let solve = (solve * self.cell_volume()).sqrt();
        PeriodicDualNorm { solve, fourier, mean }
    }

    /// Cubic Lagrange interpolation with periodic wrap; `None` outside the box.
    pub fn interpolate(&self, f: &[f64], x: [f64; 3]) -> Option<f64> {
        let (n, h, l) = (self.n as isize, self.h(), self.half_width);
        let mut idx = [0isize; 3];
        let mut wts = [[0.0; 4]; 3];
        for d in 0..3 {
            if x[d] < -l || x[d] > l {
                return None;
            }
            let t = (x[d] + l) / h;
            let i = t.floor();
            let u = t - i;
            idx[d] = i as isize;
            wts[d] = [
                -u * (u - 1.0) * (u - 2.0) / 6.0,
                (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
                -(u + 1.0) * u * (u - 2.0) / 2.0,
                (u + 1.0) * u * (u - 1.0) / 6.0,
            ];
        }
        let wrap = |i: isize| (((i % n) + n) % n) as usize;
        let mut acc = 0.0;
        for a in 0..4 {
            let ia = wrap(idx[0] + a as isize - 1);
            for b in 0..4 {
                let ib = wrap(idx[1] + b as isize - 1);
                let wab = wts[0][a] * wts[1][b];
                for c in 0..4 {
                    let ic = wrap(idx[2] + c as isize - 1);
                    acc += wab * wts[2][c] * f[self.index(ia, ib, ic)];
                }
            }
        }
        Some(acc)
    }
}

/// Largest tolerated boundary/peak ratio on the box.
pub const BOX_DECAY_TOL: f64 = 5e-2;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PeriodicDualNorm {
    /// ‖∇φ‖ with −Δφ = f − mean, computed in real space.
    pub solve: f64,
    /// (Σ |f̂|²/|k|²)^{1/2}.
    pub fourier: f64,
    /// Subtracted mean.
    pub mean: f64,
}
