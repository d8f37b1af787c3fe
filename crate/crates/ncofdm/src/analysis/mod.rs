//! Closed-form SINR, BER, Eb/N0 and complexity expressions with their
//! simulation and quadrature counterparts.

mod ber;
mod complexity;
mod ebn0;
mod imperfect;
mod interference;

pub use ber::{ber_closed_form, ber_numeric_quadrature, conditional_ber, qam_ber_terms, BerSeriesParams, QamTerm, BER_PRECISION_BUDGET};
pub use complexity::{coefficient_count, complexity_count, complexity_formula, Counted, Scheme};
pub use ebn0::{baseline_distortion_power, ebn0_losses, ebn0_relation, ebn0_scale_db, ebn0_with_distortion, smooth_energy, Ebn0Loss};
pub use imperfect::{
    interference_case1, interference_case2, interference_case3, noise_var_for_ebn0, simulate_case, sinr_case, sinr_case1, sinr_case2,
    sinr_case3, CaseMeasurement, SinrCaseInputs, SyncCase,
};
pub use interference::{
    average_sinr_bin, average_sinr_db, coefficient_covariance, instantaneous_sinr, noise_var_for_bin_snr, simulate_perfect_sync_ber,
    simulate_perfect_sync_sinr, sinr_pdf, smooth_interference_power, tail_offsets, InterferenceModel, LinkMonteCarlo,
};
