//! Line-wise FFT passes over row-major 3D arrays.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::par::Exec;

pub type C64 = Complex64;

/// Forward and inverse plans of one length.
#[derive(Clone)]
pub struct Plans {
    pub len: usize,
    pub fwd: Arc<dyn Fft<f64>>,
    pub inv: Arc<dyn Fft<f64>>,
}

impl Plans {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Plans { len, fwd: planner.plan_fft_forward(len), inv: planner.plan_fft_inverse(len) }
    }

    pub fn scratch_len(&self) -> usize {
        self.fwd.get_inplace_scratch_len().max(self.inv.get_inplace_scratch_len())
    }
}

/// Apply `op` to every line of `src` along `axis`.
///
/// Each line is copied into a zero-padded work buffer of `work_len`, handed to
/// `op(buffer, scratch, (a, b))` where (a, b) are the remaining two indices in
/// order, and the first `new_len` entries form the output line.
pub fn line_pass<F>(
    src: &[C64],
    dims: [usize; 3],
    axis: usize,
    work_len: usize,
    new_len: usize,
    scratch_len: usize,
    op: F,
    exec: Exec,
) -> (Vec<C64>, [usize; 3])
where
    F: Fn(&mut [C64], &mut [C64], (usize, usize)) + Sync + Send,
{
    let [d0, d1, d2] = dims;
    let mut out_dims = dims;
    out_dims[axis] = new_len;
    let zero = C64::new(0.0, 0.0);
    match axis {
        2 => {
            let mut out = vec![zero; d0 * d1 * new_len];
            exec.chunks_mut(&mut out, d1 * new_len, |i, block| {
                let mut work = vec![zero; work_len];
                let mut scratch = vec![zero; scratch_len];
                for j in 0..d1 {
                    work.fill(zero);
                    let s = &src[(i * d1 + j) * d2..(i * d1 + j + 1) * d2];
                    work[..d2].copy_from_slice(s);
                    op(&mut work, &mut scratch, (i, j));
                    block[j * new_len..(j + 1) * new_len].copy_from_slice(&work[..new_len]);
                }
            });
            (out, out_dims)
        }
        1 => {
            let mut out = vec![zero; d0 * new_len * d2];
            exec.chunks_mut(&mut out, new_len * d2, |i, block| {
                let mut work = vec![zero; work_len];
                let mut scratch = vec![zero; scratch_len];
                let slab = &src[i * d1 * d2..(i + 1) * d1 * d2];
                for k in 0..d2 {
                    work.fill(zero);
                    for j in 0..d1 {
                        work[j] = slab[j * d2 + k];
                    }
                    op(&mut work, &mut scratch, (i, k));
                    for j in 0..new_len {
                        block[j * d2 + k] = work[j];
                    }
                }
            });
            (out, out_dims)
        }
        _ => {
            // lines along axis 0: compute into [j][k][i] then transpose back
            let mut tmp = vec![zero; d1 * d2 * new_len];
            exec.chunks_mut(&mut tmp, d2 * new_len, |j, block| {
                let mut work = vec![zero; work_len];
                let mut scratch = vec![zero; scratch_len];
                for k in 0..d2 {
                    work.fill(zero);
                    for i in 0..d0 {
                        work[i] = src[(i * d1 + j) * d2 + k];
                    }
                    op(&mut work, &mut scratch, (j, k));
                    block[k * new_len..(k + 1) * new_len].copy_from_slice(&work[..new_len]);
                }
            });
            let mut out = vec![zero; new_len * d1 * d2];
            exec.chunks_mut(&mut out, d1 * d2, |i, block| {
                for j in 0..d1 {
                    for k in 0..d2 {
                        block[j * d2 + k] = tmp[(j * d2 + k) * new_len + i];
                    }
                }
            });
            (out, out_dims)
        }
    }
}

/// In-place pass along the contiguous axis with unchanged length.
pub fn line_pass_inplace<F>(data: &mut [C64], line: usize, work_len: usize, scratch_len: usize, op: F, exec: Exec)
where
    F: Fn(&mut [C64], &mut [C64], usize) + Sync + Send,
{
    let zero = C64::new(0.0, 0.0);
    let lines = data.len() / line;
    let per = (lines / 64).max(1);
    exec.chunks_mut(data, line * per, |c, block| {
        let mut work = vec![zero; work_len];
        let mut scratch = vec![zero; scratch_len];
        for (l, row) in block.chunks_mut(line).enumerate() {
            work.fill(zero);
            work[..line].copy_from_slice(row);
            op(&mut work, &mut scratch, c * per + l);
            row.copy_from_slice(&work[..line]);
        }
    });
}

/// Unnormalized 3D DFT of an n³ array (forward: e^{−ikx}).
pub fn fft3(data: Vec<C64>, n: usize, inverse: bool, exec: Exec) -> Vec<C64> {
    let plans = Plans::new(n);
    let sl = plans.scratch_len();
    let f = |w: &mut [C64], s: &mut [C64]| {
        if inverse {
            plans.inv.process_with_scratch(w, s)
        } else {
            plans.fwd.process_with_scratch(w, s)
        }
    };
    let mut data = data;
    line_pass_inplace(&mut data, n, n, sl, |w, s, _| f(w, s), exec);
    let (data, dims) = line_pass(&data, [n, n, n], 1, n, n, sl, |w, s, _| f(w, s), exec);
    let (data, _) = line_pass(&data, dims, 0, n, n, sl, |w, s, _| f(w, s), exec);
    data
}

/// Periodic angular wavenumber of index m on an n-point grid of spacing h.
#[inline]
pub fn wavenumber(m: usize, n: usize, h: f64) -> f64 {
    let mm = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
    2.0 * std::f64::consts::PI * mm / (n as f64 * h)
}

/// Wavenumber used for first derivatives: the Nyquist mode is dropped.
#[inline]
pub fn wavenumber_d1(m: usize, n: usize, h: f64) -> f64 {
    if n % 2 == 0 && m == n / 2 {
        0.0
    } else {
        wavenumber(m, n, h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fft3_round_trip_and_single_mode() {
        let n = 12;
        let data: Vec<C64> = (0..n * n * n).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let f = fft3(data.clone(), n, false, Exec::default());
        let b = fft3(f, n, true, Exec::Sequential);
        for (a, b) in data.iter().zip(&b) {
            assert!((a - b / (n * n * n) as f64).norm() < 1e-12);
        }
        // e^{2πi(x + 2y + 3z)/n} maps to a single coefficient
        let mut d = vec![C64::new(0.0, 0.0); n * n * n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let ph = 2.0 * std::f64::consts::PI * (i + 2 * j + 3 * k) as f64 / n as f64;
                    d[(i * n + j) * n + k] = C64::new(ph.cos(), ph.sin());
                }
            }
        }
        let f = fft3(d, n, false, Exec::default());
        let idx = (n + 2) * n + 3;
        assert!((f[idx].re - (n * n * n) as f64).abs() < 1e-9);
        let rest: f64 = f.iter().enumerate().filter(|(i, _)| *i != idx).map(|(_, v)| v.norm()).sum();
        assert!(rest < 1e-8);
    }
}
