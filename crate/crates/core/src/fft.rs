//! Multi-dimensional FFT over row-major buffers, one axis at a time.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

pub(crate) fn fft_nd(data: &mut [Complex64], shape: &[usize], direction: FftDirection) {
    let mut planner = FftPlanner::<f64>::new();
    let d = shape.len();
    let total: usize = shape.iter().product();
    debug_assert_eq!(total, data.len());
    for axis in 0..d {
        let len = shape[axis];
        if len == 1 {
            continue;
        }
        let fft = planner.plan_fft(len, direction);
        let stride: usize = shape[axis + 1..].iter().product();
        let outer = total / (len * stride);
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * len * stride + s;
                for k in 0..len {
                    line[k] = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for k in 0..len {
                    data[base + k * stride] = line[k];
                }
            }
        }
    }
}
