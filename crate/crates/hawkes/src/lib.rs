//! Twelve-dimensional non-linear Hawkes process driving the order book.
//!
//! Intensities are λ^(i)(t) = max(0, m_i(s) (μ_i + Σ_j Σ_k φ^{j→i}(t − t_k)))
//! with power-law kernels φ(t) = a (1 + c t)^(−b) truncated at a horizon and
//! m_i(s) = (δ (s − 1) / α)^β for the two in-spread types.

pub mod engine;
pub mod error;
pub mod history;
pub mod kernel;
pub mod spec;

pub use engine::{
    intensities_from_excitation, intensity, kernel_norm_matrix, simulate, spectral_radius, HawkesSimulator,
    NormReport,
};
pub use error::{HawkesError, Result};
pub use history::{excitation_direct, EventHistory, PowerSum};
pub use kernel::{PowerLawKernel, DEFAULT_TRUNCATION_HORIZON};
pub use spec::HawkesSpec;

pub type Kernel = PowerLawKernel<f64>;
pub type Spec = HawkesSpec<f64>;
pub type Simulator = HawkesSimulator<f64>;
pub type History = EventHistory<f64>;
pub type KernelF32 = PowerLawKernel<f32>;
pub type SpecF32 = HawkesSpec<f32>;
