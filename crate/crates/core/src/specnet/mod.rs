//! Spectral Networks, McCulloch–Pitts neurons, and their unitary symmetry.

mod align;
mod forward;
mod weights;

pub use align::{
    align_unitary, irrep_alignment, unitary_symmetry_witness, Alignment, IrrepAlignment, WitnessOutcome,
    WITNESS_ALIGN_TOL, WITNESS_NORM_TOL, WITNESS_OUTPUT_TOL, WITNESS_PROBES,
};
pub use forward::{
    adjunction_check, forward_commutative, forward_nc, mcculloch_forward, output_distance, Activation, Model,
};
pub(crate) use forward::conj_tensor_sum;
pub use weights::{WeightSlot, WeightTensor};
