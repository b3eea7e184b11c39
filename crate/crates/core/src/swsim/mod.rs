//! Swendsen-Wang dynamics, phase diagnostics, exact kernels and conductance.

mod diagnostics;
mod dynamics;
mod kernel;
mod unionfind;

pub use diagnostics::{e_ordered, e_uniform, expected_mono, gap_q_min, sw_gap_check, GapCheck, MonoExpectation};
pub use dynamics::{
    ais_log_partition, color_frequencies, count_mono, nearest_phase, ordered_marginal, ordered_vector, phase_of,
    run_chain, run_chains, sw_step, sw_step_with, PhaseClass, Start, SwState, SwTrace, SwWorkspace, TraceRecord,
    UmtClass, UmtClassifier, FALLBACK_EPS,
};
pub use kernel::{
    conductance, exact_sw_kernel, phase_cut, stationary, SwKernel, KERNEL_STATE_LIMIT, KERNEL_WORK_LIMIT,
};
pub use unionfind::UnionFind;
