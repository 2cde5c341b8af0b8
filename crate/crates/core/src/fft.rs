//! Three-dimensional discrete Fourier transforms over a periodic cube.
//!
//! Arrays hold `n³` values in row-major order with `x` slowest and `z`
//! fastest: flat index `(ix * n + iy) * n + iz`. Both directions are
//! unnormalized:
//!
//! ```text
//! forward: X[j] = Σ_m x[m] exp(-2πi j·m / n)
//! inverse: x[m] = Σ_j X[j] exp(+2πi j·m / n)
//! ```

use alloc::vec::Vec;
use core::f64::consts::TAU;

use crate::C64;

pub trait Fft3 {
    /// In-place forward transform of an `n³` array.
    fn forward(&self, n: usize, data: &mut [C64]);
    /// In-place unnormalized inverse transform of an `n³` array.
    fn inverse(&self, n: usize, data: &mut [C64]);
}

impl<T: Fft3 + ?Sized> Fft3 for &T {
    fn forward(&self, n: usize, data: &mut [C64]) {
        (**self).forward(n, data)
    }
    fn inverse(&self, n: usize, data: &mut [C64]) {
        (**self).inverse(n, data)
    }
}

/// Brute-force O(n⁶) evaluation of the full triple sum.
///
/// No factorization, no separability: every output is the literal sum over
/// all `n³` inputs. Slow, but independent of any FFT algorithm, which is
/// what makes it useful as an oracle.
#[derive(Debug, Default, Clone, Copy)]
pub struct DirectDft;

impl DirectDft {
    fn apply(n: usize, data: &mut [C64], sign: f64) {
        assert_eq!(data.len(), n * n * n, "array is not n³");
        let twiddle: Vec<C64> = (0..n)
            .map(|p| C64::from_polar(1.0, sign * TAU * p as f64 / n as f64))
            .collect();
        let input = data.to_vec();
        for jx in 0..n {
            for jy in 0..n {
                for jz in 0..n {
                    let mut acc = C64::new(0.0, 0.0);
                    let mut idx = 0;
                    for mx in 0..n {
                        for my in 0..n {
                            let pxy = jx * mx + jy * my;
                            for mz in 0..n {
                                acc += input[idx] * twiddle[(pxy + jz * mz) % n];
                                idx += 1;
                            }
                        }
                    }
                    data[(jx * n + jy) * n + jz] = acc;
                }
            }
        }
    }
}

impl Fft3 for DirectDft {
    fn forward(&self, n: usize, data: &mut [C64]) {
        DirectDft::apply(n, data, -1.0)
    }

    fn inverse(&self, n: usize, data: &mut [C64]) {
        DirectDft::apply(n, data, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_round_trip() {
        let n = 4;
        let mut data = alloc::vec![C64::new(0.0, 0.0); n * n * n];
        // mode j = (1, 0, 3)
        data[n * n + 3] = C64::new(1.0, 0.0);
        DirectDft.inverse(n, &mut data);
        for mx in 0..n {
            for my in 0..n {
                for mz in 0..n {
                    let phase = TAU * (mx as f64 + 3.0 * mz as f64) / n as f64;
                    let v = data[(mx * n + my) * n + mz];
                    assert!((v - C64::from_polar(1.0, phase)).norm() < 1e-14);
                }
            }
        }
        DirectDft.forward(n, &mut data);
        let total = (n * n * n) as f64;
        for (i, v) in data.iter().enumerate() {
            let want = if i == 3 + 4 * 4 { total } else { 0.0 };
            assert!((v - C64::new(want, 0.0)).norm() < 1e-12);
        }
    }
}
