//! Shared fixtures for the benches.

use mkdv_core::InitialProfile;

/// `tanh x + 0.3 exp(-x^2)` on `[-40, 40]`.
pub fn perturbed_kink(n: usize) -> InitialProfile {
    InitialProfile::from_fn(-40.0, 40.0, n, |x| x.tanh() + 0.3 * (-x * x).exp()).expect("valid profile")
}
