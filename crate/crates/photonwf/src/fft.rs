//! rustfft-backed [`Fft3`].

use std::sync::Mutex;

use photonwf_core::{Fft3, C64};
use rustfft::{FftDirection, FftPlanner};

/// Axis-by-axis 3-D transform. Plans are cached by the planner, so one
/// instance can be reused across grids of different sizes.
pub struct RustFft3 {
    planner: Mutex<FftPlanner<f64>>,
}

impl Default for RustFft3 {
    fn default() -> Self {
        Self::new()
    }
}

impl RustFft3 {
    pub fn new() -> Self {
        RustFft3 {
            planner: Mutex::new(FftPlanner::new()),
        }
    }

    fn run(&self, n: usize, data: &mut [C64], dir: FftDirection) {
        assert_eq!(data.len(), n * n * n, "buffer is not n³");
        if n <= 1 {
            return;
        }
        let fft = self.planner.lock().expect("fft planner poisoned").plan_fft(n, dir);
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];

        // z: contiguous lines.
        fft.process_with_scratch(data, &mut scratch);

        let mut plane = vec![C64::new(0.0, 0.0); n * n];
        // y: lines of stride n inside each x-plane.
        for ix in 0..n {
            let base = ix * n * n;
            for iy in 0..n {
                for iz in 0..n {
                    plane[iz * n + iy] = data[base + iy * n + iz];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for iy in 0..n {
                for iz in 0..n {
                    data[base + iy * n + iz] = plane[iz * n + iy];
                }
            }
        }
        // x: lines of stride n² for each y.
        for iy in 0..n {
            for ix in 0..n {
                for iz in 0..n {
                    plane[iz * n + ix] = data[(ix * n + iy) * n + iz];
                }
            }
            fft.process_with_scratch(&mut plane, &mut scratch);
            for ix in 0..n {
                for iz in 0..n {
                    data[(ix * n + iy) * n + iz] = plane[iz * n + ix];
                }
            }
        }
    }
}

impl Fft3 for RustFft3 {
    fn forward(&self, n: usize, data: &mut [C64]) {
        self.run(n, data, FftDirection::Forward);
    }

    fn inverse(&self, n: usize, data: &mut [C64]) {
        self.run(n, data, FftDirection::Inverse);
    }
}
