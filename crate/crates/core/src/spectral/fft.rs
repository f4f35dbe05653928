use std::cell::RefCell;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

// Plans are cached per thread; rustfft's planner memoizes by length.
thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized forward DFT, `X_k = Σ_j x_j e^{-2πijk/n}`.
pub(crate) fn forward_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()));
    plan.process(buf);
}

/// Unnormalized inverse DFT, `x_j = Σ_k X_k e^{2πijk/n}`.
pub(crate) fn inverse_in_place(buf: &mut [Complex64]) {
    if buf.is_empty() {
        return;
    }
    let plan = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()));
    plan.process(buf);
}
