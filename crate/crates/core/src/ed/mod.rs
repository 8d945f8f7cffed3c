//! Exact diagonalization in the bare Fock basis.

mod block;
mod observables;
mod spectrum;
mod wigner;

pub use block::{
    apply_coupling_derivative, build_parity_block, coupling_derivative, dense_projection, parity_component_norm,
    projector, spin_fock_hamiltonian, ParityBlock, SpinFockState,
};
pub use observables::{
    ed_ground_observables, ground_state, observables_of, photonic_state, qfi_fidelity, qfi_spectral,
    squeezed_vacuum_fidelity, Conditioning, GroundState, GroundStateObservables, PhotonicState, QfiResult,
};
pub use spectrum::{
    block_states, ed_spectrum, ed_spectrum_both, squeezed_frame_matrix, squeezed_frame_spectrum, BlockStates,
    EdOptions, Level, SpectrumResult, SqueezedOptions,
};
pub use wigner::{wigner_grid, wigner_of, GridSpec, WignerGrid};
