//! Inner approximation: two-site reduced states of uniform matrix product states, which
//! extend to infinite translation-invariant chains by construction, and the energy upper
//! bounds obtained by minimizing over them.

mod mps;
mod nelder_mead;
mod optimize;

pub use mps::{FixedPointPair, GAP_TOL, UniformMPS, reduced_state, transfer_fixed_points, two_site_reduced_state};
pub use nelder_mead::{NelderMeadOptions, NelderMeadResult, nelder_mead};
pub use optimize::{MpsBound, MpsOptions, energy_upper_bound_mps, mps_energy, mps_hierarchy, product_state_bound};
