//! Radix-2 complex FFT, just enough for the analytic signal.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

fn transform(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    if n < 2 {
        return;
    }

    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }

    let sign = if inverse { 1.0 } else { -1.0 };
    let twiddles: Vec<Complex64> = (0..n / 2)
        .map(|k| {
            let angle = sign * 2.0 * PI * k as f64 / n as f64;
            Complex64::new(libm::cos(angle), libm::sin(angle))
        })
        .collect();

    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = twiddles[k * stride];
                let u = buf[start + k];
                let v = buf[start + k + half] * w;
                buf[start + k] = u + v;
                buf[start + k + half] = u - v;
            }
        }
        len <<= 1;
    }

    if inverse {
        let scale = 1.0 / n as f64;
        for z in buf.iter_mut() {
            *z *= scale;
        }
    }
}

/// Analytic signal of `x`: the input zero-padded to a power of two, negative
/// frequencies removed and positive ones doubled. Returns `x.len()` values.
pub(crate) fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let m = n.next_power_of_two().max(2);
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for (slot, &v) in buf.iter_mut().zip(x) {
        slot.re = v;
    }

    transform(&mut buf, false);
    let half = m / 2;
    for z in &mut buf[1..half] {
        *z *= 2.0;
    }
    for z in &mut buf[half + 1..] {
        *z = Complex64::new(0.0, 0.0);
    }
    transform(&mut buf, true);

    buf.truncate(n);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (t, &v)| {
                    let angle = -2.0 * PI * (k * t) as f64 / n as f64;
                    acc + v * Complex64::new(angle.cos(), angle.sin())
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        let x: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let expected = naive_dft(&x);
        let mut got = x.clone();
        transform(&mut got, false);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-10);
        }
        transform(&mut got, true);
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn analytic_signal_of_cosine_has_unit_magnitude() {
        // 8 full periods over 256 samples: no leakage.
        let x: Vec<f64> = (0..256).map(|i| (2.0 * PI * 8.0 * i as f64 / 256.0).cos()).collect();
        for z in analytic_signal(&x) {
            assert!((z.norm() - 1.0).abs() < 1e-12);
        }
    }
}
