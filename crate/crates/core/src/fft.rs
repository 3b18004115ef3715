//! Unnormalized 3D FFT on `n³` x-fastest buffers, with a process-wide plan cache.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct Plans {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();

pub(crate) fn plans(n: usize) -> Arc<Plans> {
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().expect("fft plan cache poisoned");
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            let forward = planner.plan_fft_forward(n);
            let inverse = planner.plan_fft_inverse(n);
            let scratch_len = forward
                .get_inplace_scratch_len()
                .max(inverse.get_inplace_scratch_len());
            Arc::new(Plans {
                n,
                forward,
                inverse,
                scratch_len,
            })
        })
        .clone()
}

impl Plans {
    /// In-place unnormalized transform of one `n³` block.
    pub(crate) fn transform(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        debug_assert_eq!(data.len(), n * n * n);
        let fft = if inverse { &self.inverse } else { &self.forward };
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len];

        // x lines are contiguous
        fft.process_with_scratch(data, &mut scratch);

        let mut line = vec![Complex64::new(0.0, 0.0); n];
        // y lines: stride n
        for z in 0..n {
            for x in 0..n {
                let base = z * n * n + x;
                for (y, v) in line.iter_mut().enumerate() {
                    *v = data[base + y * n];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (y, v) in line.iter().enumerate() {
                    data[base + y * n] = *v;
                }
            }
        }
        // z lines: stride n²
        let nn = n * n;
        for y in 0..n {
            for x in 0..n {
                let base = y * n + x;
                for (z, v) in line.iter_mut().enumerate() {
                    *v = data[base + z * nn];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (z, v) in line.iter().enumerate() {
                    data[base + z * nn] = *v;
                }
            }
        }
    }
}
