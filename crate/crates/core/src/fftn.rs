//! Small N-dimensional FFT helper over flat row-major arrays.

use rustfft::num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

/// In-place complex FFT along every axis of a row-major array with the given
/// per-axis lengths. `inverse` selects the unnormalized inverse transform.
pub fn fft_nd(data: &mut [Complex<f64>], dims: &[usize], inverse: bool) {
    let total: usize = dims.iter().product();
    assert_eq!(data.len(), total, "flat length must match dims");
    let dir = if inverse {
        FftDirection::Inverse
    } else {
        FftDirection::Forward
    };
    let mut planner = FftPlanner::new();
    let ndim = dims.len();
    let mut line: Vec<Complex<f64>> = Vec::new();
    for axis in 0..ndim {
        let len = dims[axis];
        let fft = planner.plan_fft(len, dir);
        line.resize(len, Complex::default());
        // stride between consecutive elements along `axis`
        let stride: usize = dims[axis + 1..].iter().product();
        // number of lines = total / len; enumerate their base offsets
        let outer: usize = dims[..axis].iter().product();
        let outer_stride = stride * len;
        for o in 0..outer {
            for i in 0..stride {
                let base = o * outer_stride + i;
                for k in 0..len {
                    line[k] = data[base + k * stride];
                }
                fft.process(&mut line);
                for k in 0..len {
                    data[base + k * stride] = line[k];
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_2d() {
        let dims = [6, 5];
        let n: usize = dims.iter().product();
        let orig: Vec<Complex<f64>> = (0..n)
            .map(|i| Complex::new((i as f64).sin(), (i as f64 * 0.3).cos()))
            .collect();
        let mut data = orig.clone();
        fft_nd(&mut data, &dims, false);
        fft_nd(&mut data, &dims, true);
        for (a, b) in data.iter().zip(&orig) {
            let v = *a / n as f64;
            assert!((v - b).norm() < 1e-12);
        }
    }

    #[test]
    fn single_wave_2d() {
        // x_n = exp(i * (2*n0/6 + 1*n1/5) * 2pi) has one forward coefficient.
        let dims = [6, 5];
        let n: usize = dims.iter().product();
        let mut data = vec![Complex::default(); n];
        for n0 in 0..6 {
            for n1 in 0..5 {
                let phase = 2.0 * std::f64::consts::PI * (2.0 * n0 as f64 / 6.0 + n1 as f64 / 5.0);
                data[n0 * 5 + n1] = Complex::new(phase.cos(), phase.sin());
            }
        }
        fft_nd(&mut data, &dims, false);
        for n0 in 0..6 {
            for n1 in 0..5 {
                let expect = if n0 == 2 && n1 == 1 { n as f64 } else { 0.0 };
                assert!((data[n0 * 5 + n1] - Complex::new(expect, 0.0)).norm() < 1e-9);
            }
        }
    }
}
