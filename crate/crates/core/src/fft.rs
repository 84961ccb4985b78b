//! Separable d-dimensional FFT on row-major cubic arrays.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

type PlanKey = (usize, bool);

fn plan(len: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    static CACHE: OnceLock<Mutex<(FftPlanner<f64>, HashMap<PlanKey, Arc<dyn Fft<f64>>>)>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new((FftPlanner::new(), HashMap::new())));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    let key = (len, direction == FftDirection::Forward);
    if let Some(p) = guard.1.get(&key) {
        return Arc::clone(p);
    }
    let p = guard.0.plan_fft(len, direction);
    guard.1.insert(key, Arc::clone(&p));
    p
}

/// Smallest integer >= `n` whose only prime factors are 2, 3 and 5.
pub fn fast_len(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut r = m;
        for p in [2, 3, 5] {
            while r % p == 0 {
                r /= p;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Unnormalized transform along every axis of a `len^dim` array.
///
/// Forward uses `exp(-2πi kp/len)`, inverse uses `exp(+2πi kp/len)`.
pub fn fft_nd(data: &mut [Complex64], dim: usize, len: usize, direction: FftDirection) {
    let total = len.pow(dim as u32);
    assert_eq!(data.len(), total, "fft_nd: buffer is not len^dim");
    if total == 0 {
        return;
    }
    let p = plan(len, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); p.get_inplace_scratch_len()];
    // last axis is contiguous
    p.process_with_scratch(data, &mut scratch);
    if dim == 1 {
        return;
    }
    let mut lines = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..dim - 1 {
        let stride = len.pow((dim - 1 - axis) as u32);
        let block = stride * len;
        // gather: each line along `axis` becomes contiguous
        let mut line = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let dst = &mut lines[line * len..(line + 1) * len];
                for (t, d) in dst.iter_mut().enumerate() {
                    *d = data[base + t * stride];
                }
                line += 1;
            }
        }
        p.process_with_scratch(&mut lines, &mut scratch);
        let mut line = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let src = &lines[line * len..(line + 1) * len];
                for (t, s) in src.iter().enumerate() {
                    data[base + t * stride] = *s;
                }
                line += 1;
            }
        }
    }
}
