//! Eigendecomposition of the normalized Laplacian, heat-kernel wavelet tensors
//! (exact and Chebyshev) and the spectral recovery probes.

mod chebyshev;
mod eigen;
mod lstsq;
mod recovery;
mod wavelet;

pub use chebyshev::{chebyshev_fit, ChebyshevExpansion};
pub use eigen::{eigh_symmetric, EigenDecomposition};
pub(crate) use lstsq::lstsq;
pub use recovery::{
    normalized_adjacency_power, polynomial_probe_apply, recover_laplacian_powers, separating_epsilon,
    step_hop_recovery, LaplacianPowerEstimate, PolynomialProbe,
};
pub use wavelet::{
    wavelet_chebyshev, wavelet_exact, wavelet_tensor, WaveletConfig, WaveletMethod, WaveletTensor, DEFAULT_SCALES, LAMBDA_MAX,
};
