//! Thin wrapper around `rustfft` plans for a fixed length.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub(crate) struct FftPair {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub(crate) fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    /// In place, `x[s] <- sum_t x[t] e^{-2 pi i s t / n}`.
    pub(crate) fn forward(&self, x: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.n);
        self.forward.process(x);
    }

    /// In place, unnormalized inverse.
    pub(crate) fn inverse(&self, x: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.n);
        self.inverse.process(x);
    }

    /// Circular convolution `(kernel * x)[k] = sum_s kernel[(k - s) mod n] x[s]`,
    /// given the forward transform of `kernel`.
    pub(crate) fn circular_convolve(&self, kernel_hat: &[Complex64], x: &mut [Complex64]) {
        self.forward(x);
        for (v, h) in x.iter_mut().zip(kernel_hat) {
            *v *= *h;
        }
        self.inverse(x);
        let scale = 1.0 / self.n as f64;
        for v in x.iter_mut() {
            *v *= scale;
        }
    }
}
