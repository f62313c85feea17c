use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn forward(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(len))
}

pub(crate) fn inverse(len: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(len))
}

/// In-place unitary DFT of every `len`-sized chunk of `data`.
pub(crate) fn unitary_chunks(data: &mut [Complex64], len: usize, inverse_dir: bool) {
    use rayon::prelude::*;
    let plan = if inverse_dir { inverse(len) } else { forward(len) };
    let scale = 1.0 / (len as f64).sqrt();
    data.par_chunks_mut(len).for_each_init(
        || vec![Complex64::default(); plan.get_inplace_scratch_len()],
        |scratch, chunk| {
            plan.process_with_scratch(chunk, scratch);
            for v in chunk.iter_mut() {
                *v *= scale;
            }
        },
    );
}

/// Position of FFT-ordered bin `i` when the bins are laid out by signed
/// index `k ∈ [-len/2, len/2)`.
#[inline]
pub(crate) fn signed_position(i: usize, len: usize) -> usize {
    (i + len / 2) % len
}
