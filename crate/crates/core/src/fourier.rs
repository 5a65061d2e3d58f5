//! Discrete Fourier helpers for equispaced samples on ℝ/ℤ.

use alloc::vec::Vec;
use core::f64::consts::TAU;

/// Cosine/sine table for the `m`-th roots of unity.
pub(crate) struct Twiddles {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Twiddles {
    pub(crate) fn new(m: usize) -> Self {
        let mut cos = Vec::with_capacity(m);
        let mut sin = Vec::with_capacity(m);
        for j in 0..m {
            let (s, c) = libm::sincos(TAU * j as f64 / m as f64);
            cos.push(c);
            sin.push(s);
        }
        Self { cos, sin }
    }

    #[inline]
    fn len(&self) -> usize {
        self.cos.len()
    }
}

/// Real Fourier coefficients `(a_0, a_1, b_1, ..., a_K, b_K)` of the trigonometric
/// interpolant of `samples`, taken at `θ_j = j / m`.
///
/// Requires `K < m / 2` so every retained mode is resolved without folding.
pub(crate) fn real_coefficients(samples: &[f64], modes: usize, table: &Twiddles) -> Vec<f64> {
    let m = samples.len();
    debug_assert_eq!(table.len(), m);
    debug_assert!(2 * modes < m);
    let mut out = Vec::with_capacity(2 * modes + 1);
    out.push(samples.iter().sum::<f64>() / m as f64);
    for k in 1..=modes {
        let (mut a, mut b) = (0.0, 0.0);
        let mut idx = 0usize;
        for &x in samples {
            a += x * table.cos[idx];
            b += x * table.sin[idx];
            idx += k;
            if idx >= m {
                idx -= m;
            }
        }
        out.push(2.0 * a / m as f64);
        out.push(2.0 * b / m as f64);
    }
    out
}

/// A real trigonometric series `c_0 + Σ a_k cos 2πkt + b_k sin 2πkt` together
/// with its antiderivative that vanishes at `t = 0`.
pub(crate) struct PeriodicSeries {
    coeffs: Vec<f64>,
}

impl PeriodicSeries {
    pub(crate) fn from_samples(samples: &[f64], table: &Twiddles) -> Self {
        let modes = (samples.len() - 1) / 2;
        let mut coeffs = real_coefficients(samples, modes, table);
        // Drop the tail that sits below rounding relative to the mean.
        let floor = 1e-18 * coeffs[0].abs();
        let mut keep = modes;
        while keep > 0 && coeffs[2 * keep - 1].abs() <= floor && coeffs[2 * keep].abs() <= floor {
            keep -= 1;
        }
        coeffs.truncate(2 * keep + 1);
        Self { coeffs }
    }

    pub(crate) fn mean(&self) -> f64 {
        self.coeffs[0]
    }

    /// Returns `(value, integral from 0 to t)`.
    pub(crate) fn value_and_integral(&self, t: f64) -> (f64, f64) {
        let modes = (self.coeffs.len() - 1) / 2;
        let mut value = self.coeffs[0];
        let mut integral = self.coeffs[0] * t;
        let (s1, c1) = libm::sincos(TAU * t);
        let (mut c, mut s) = (1.0, 0.0);
        for k in 1..=modes {
            if k % 32 == 1 {
                let phase = k as f64 * t;
                let (sk, ck) = libm::sincos(TAU * (phase - libm::floor(phase)));
                c = ck;
                s = sk;
            } else {
                let next_c = c * c1 - s * s1;
                s = s * c1 + c * s1;
                c = next_c;
            }
            let a = self.coeffs[2 * k - 1];
            let b = self.coeffs[2 * k];
            value += a * c + b * s;
            let w = TAU * k as f64;
            integral += (a * s + b * (1.0 - c)) / w;
        }
        (value, integral)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_trigonometric_polynomial() {
        let m = 32;
        let table = Twiddles::new(m);
        let samples: Vec<f64> = (0..m)
            .map(|j| {
                let t = j as f64 / m as f64;
                1.5 + 0.25 * libm::cos(TAU * 3.0 * t) - 2.0 * libm::sin(TAU * 5.0 * t)
            })
            .collect();
        let c = real_coefficients(&samples, 7, &table);
        let expect = [
            1.5, 0., 0., 0., 0., 0.25, 0., 0., 0., 0., -2.0, 0., 0., 0., 0.,
        ];
        for (got, want) in c.iter().zip(expect) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn antiderivative_matches_closed_form() {
        let m = 64;
        let table = Twiddles::new(m);
        let samples: Vec<f64> = (0..m)
            .map(|j| 2.0 + libm::cos(TAU * j as f64 / m as f64))
            .collect();
        let series = PeriodicSeries::from_samples(&samples, &table);
        for t in [0.0, 0.1, 0.37, 0.5, 0.99] {
            let (v, i) = series.value_and_integral(t);
            assert!((v - (2.0 + libm::cos(TAU * t))).abs() < 1e-14);
            assert!((i - (2.0 * t + libm::sin(TAU * t) / TAU)).abs() < 1e-14);
        }
    }
}
