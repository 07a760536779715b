//! Mixed-radix complex FFT.
//!
//! A self-sorting (Stockham) decimation-in-frequency transform with
//! specialised butterflies for radices 2, 3, 4 and 5 and a generic
//! butterfly for any other prime factor. Sizes with large prime factors
//! work but cost `O(p·n)` per stage.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone)]
struct Stage {
    radix: usize,
    /// Length of each sub-transform entering this stage.
    len: usize,
    /// Number of interleaved sub-transforms.
    stride: usize,
    /// `W_len^(q·t)` for `q < len / radix`, `t < radix`, laid out `q * radix + t`.
    twiddles: Vec<Complex64>,
    /// `W_radix^j` for `j < radix`.
    roots: Vec<Complex64>,
}

/// A planned forward/inverse transform of a fixed length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    stages: Vec<Stage>,
}

fn unit(angle: f64) -> Complex64 {
    Complex64::new(angle.cos(), angle.sin())
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut factors = Vec::new();
    while n % 4 == 0 {
        factors.push(4);
        n /= 4;
    }
    for p in [2usize, 3, 5] {
        while n % p == 0 {
            factors.push(p);
            n /= p;
        }
    }
    let mut p = 7;
    while p * p <= n {
        while n % p == 0 {
            factors.push(p);
            n /= p;
        }
        p += 2;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

impl FftPlan {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "transform length must be positive");
        let mut stages = Vec::new();
        let mut sub = len;
        let mut stride = 1;
        for radix in factorize(len) {
            let m = sub / radix;
            let mut twiddles = Vec::with_capacity(m * radix);
            for q in 0..m {
                for t in 0..radix {
                    twiddles.push(unit(-2.0 * PI * ((q * t) % sub) as f64 / sub as f64));
                }
            }
            let roots = (0..radix)
                .map(|j| unit(-2.0 * PI * j as f64 / radix as f64))
                .collect();
            stages.push(Stage {
                radix,
                len: sub,
                stride,
                twiddles,
                roots,
            });
            sub = m;
            stride *= radix;
        }
        Self { len, stages }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Unnormalized forward transform `X_k = Σ_j x_j e^{-2πi jk/n}`, in place.
    ///
    /// `scratch` must hold at least `len` values.
    pub fn forward(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        assert_eq!(data.len(), self.len);
        let scratch = &mut scratch[..self.len];
        let mut in_data = true;
        for stage in &self.stages {
            if in_data {
                stage.run(data, scratch);
            } else {
                stage.run(scratch, data);
            }
            in_data = !in_data;
        }
        if !in_data {
            data.copy_from_slice(scratch);
        }
    }

    /// Normalized inverse transform, so `inverse(forward(x)) == x`.
    pub fn inverse(&self, data: &mut [Complex64], scratch: &mut [Complex64]) {
        for z in data.iter_mut() {
            *z = z.conj();
        }
        self.forward(data, scratch);
        let scale = 1.0 / self.len as f64;
        for z in data.iter_mut() {
            *z = z.conj() * scale;
        }
    }

    /// Convenience wrapper that allocates its own scratch space.
    pub fn forward_alloc(&self, data: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.len];
        self.forward(data, &mut scratch);
    }

    pub fn inverse_alloc(&self, data: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.len];
        self.inverse(data, &mut scratch);
    }
}

impl Stage {
    fn run(&self, x: &[Complex64], y: &mut [Complex64]) {
        let p = self.radix;
        let m = self.len / p;
        let s = self.stride;
        match p {
            2 => {
                for q in 0..m {
                    let w1 = self.twiddles[q * 2 + 1];
                    for k in 0..s {
                        let a = x[k + s * q];
                        let b = x[k + s * (q + m)];
                        let out = k + s * 2 * q;
                        y[out] = a + b;
                        y[out + s] = (a - b) * w1;
                    }
                }
            }
            3 => {
                let c = -0.5;
                let d = -(3.0f64.sqrt()) * 0.5;
                for q in 0..m {
                    let tw = &self.twiddles[q * 3..q * 3 + 3];
                    for k in 0..s {
                        let a0 = x[k + s * q];
                        let a1 = x[k + s * (q + m)];
                        let a2 = x[k + s * (q + 2 * m)];
                        let sum = a1 + a2;
                        let dif = a1 - a2;
                        let base = a0 + sum * c;
                        let rot = Complex64::new(-dif.im * d, dif.re * d);
                        let out = k + s * 3 * q;
                        y[out] = a0 + sum;
                        y[out + s] = (base + rot) * tw[1];
                        y[out + 2 * s] = (base - rot) * tw[2];
                    }
                }
            }
            4 => {
                for q in 0..m {
                    let tw = &self.twiddles[q * 4..q * 4 + 4];
                    for k in 0..s {
                        let a0 = x[k + s * q];
                        let a1 = x[k + s * (q + m)];
                        let a2 = x[k + s * (q + 2 * m)];
                        let a3 = x[k + s * (q + 3 * m)];
                        let t0 = a0 + a2;
                        let t1 = a0 - a2;
                        let t2 = a1 + a3;
                        // -i * (a1 - a3)
                        let d = a1 - a3;
                        let t3 = Complex64::new(d.im, -d.re);
                        let out = k + s * 4 * q;
                        y[out] = t0 + t2;
                        y[out + s] = (t1 + t3) * tw[1];
                        y[out + 2 * s] = (t0 - t2) * tw[2];
                        y[out + 3 * s] = (t1 - t3) * tw[3];
                    }
                }
            }
            _ => {
                let mut a = vec![Complex64::new(0.0, 0.0); p];
                for q in 0..m {
                    let tw = &self.twiddles[q * p..q * p + p];
                    for k in 0..s {
                        for (r, ar) in a.iter_mut().enumerate() {
                            *ar = x[k + s * (q + r * m)];
                        }
                        let out = k + s * p * q;
                        for t in 0..p {
                            let mut acc = a[0];
                            for (r, ar) in a.iter().enumerate().skip(1) {
                                acc += *ar * self.roots[(r * t) % p];
                            }
                            y[out + s * t] = acc * tw[t];
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .map(|(j, &v)| v * unit(-2.0 * PI * ((j * k) % n) as f64 / n as f64))
                    .sum()
            })
            .collect()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    #[test]
    fn factorization_covers_length() {
        for n in [1usize, 2, 4, 6, 12, 36, 288, 1152, 7 * 11, 2 * 13 * 17] {
            assert_eq!(factorize(n).iter().product::<usize>(), n);
        }
    }

    #[test]
    fn matches_naive_dft() {
        for n in [1usize, 2, 3, 4, 5, 6, 8, 9, 10, 12, 14, 16, 18, 36, 49, 60, 72, 98, 144] {
            let x = pseudo_random(n, n as u64);
            let expected = naive_dft(&x);
            let mut y = x.clone();
            FftPlan::new(n).forward_alloc(&mut y);
            let scale = expected.iter().map(|z| z.norm()).fold(1.0, f64::max);
            for (a, b) in y.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-12 * scale, "n = {n}");
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        for n in [4usize, 36, 288, 1152, 4608] {
            let x = pseudo_random(n, 7);
            let mut y = x.clone();
            let plan = FftPlan::new(n);
            plan.forward_alloc(&mut y);
            plan.inverse_alloc(&mut y);
            let err = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-13, "n = {n}, err = {err}");
        }
    }
}
