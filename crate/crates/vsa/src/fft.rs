//! Thin wrapper over rustfft fixing the transform convention used by the
//! real-vector algebra: forward transform unnormalized, inverse carrying
//! the 1/d factor. Works for any length, not just powers of two.

use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

thread_local! {
    // The planner caches per-length plans, so repeated transforms of the
    // same size only pay a lookup.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward DFT of a real signal, unnormalized.
pub(crate) fn forward(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|&re| Complex64::new(re, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(&mut buf));
    buf
}

/// Inverse DFT scaled by 1/d, keeping only the real parts. All spectra
/// handed to this function come from real signals (possibly rescaled bin
/// by bin in a conjugate-symmetric way), so the imaginary parts are
/// rounding noise.
pub(crate) fn inverse_real(bins: &[Complex64]) -> Vec<f64> {
    let mut buf = bins.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(&mut buf));
    let scale = 1.0 / buf.len() as f64;
    buf.iter().map(|c| c.re * scale).collect()
}
