//! Slope-quotient sequences, the asymptotic-equivalence fit, the three
//! observation drivers and the empirical conjecture checks.

mod conjectures;
mod fit;
mod observe;

pub use conjectures::{
    centre_direction, check_h3, check_h4, check_h5, l1_prime, omega_grid, pair_norm, pair_ratio, H3Report, H4Options,
    H4Report, H5Report, PairNorm,
};
pub use fit::{
    alpha_primes, diophantine_gate, slope_quotients, slope_runs, EquivalenceFit, QuotientSequence, MAX_SPREAD,
};
pub use observe::{
    agree_to_digits, eta_family, extrapolate_limit, observation1, observation2, observation3, renormalized_identity,
    EtaRow, IdentityCheck, Observation1Report, Observation2Report, Observation3Report,
};
