//! Exact computation of the H³(G, U(1)) index of 2d bosonic symmetry-protected
//! topological fixed-point models with a finite on-site unitary symmetry G.
//!
//! The index of a model is extracted from its edge alone: restricting the bulk
//! symmetry to a boundary interval gives operators U⁽ᵍ⁾ that compose only up to
//! boundary-localized obstructions. Splitting those obstructions at a cut and
//! comparing the two orders of three group elements yields a scalar phase
//! ω(g,h,k) — a 3-cocycle whose class in H³(G, U(1)) labels the phase of
//! matter. Everything here is computed in exact arithmetic: phases are
//! rationals mod 1, operators are monomial (generalized permutations), and all
//! identities are verified exhaustively.

pub mod chain;
pub mod cocycle;
pub mod cohomology;
pub mod error;
pub mod formats;
pub mod group;
pub mod monomial;
pub mod patch;
pub mod phase;

pub use chain::{
    build_compensators, build_iota, build_upsilon, choice_invariance_suite, extract_index,
    solve_counterterm, split_upsilon, stack_models, ClassReport, CompensatorFamily, IndexPipeline,
    IndexReport,
};
pub use cocycle::{coboundary, identify_cyclic_level, Cochain2, Cochain3};
pub use cohomology::{normalize, same_class};
pub use error::{Error, Result};
pub use formats::{
    load_cocycle, load_group, load_witness, parse_group_shorthand, resolve_cocycle_spec,
    resolve_group_spec, CocycleFile, CocycleSpec, GroupFile, GroupSpec, PatchConfig, WitnessFile,
};
pub use group::{Elem, FiniteGroup};
pub use monomial::{
    random_op, Classification, DiagonalFactors, LocalFactor, MonomialOp, OpKind, RegisterChain,
    ScanStatus,
};
pub use patch::{
    arc_compensator, arc_index_crosscheck, arc_triple_expectation,
    build_boundary_compensator_2d, build_patch_state,
    global_symmetry_overlaps, onsite_symmetry_op, verify_compensation, verify_plaquette_invariance,
    verify_representation, CompensationReport, LinkAssignment, Overlap, PatchFactor, PatchGeometry,
    PatchOp, PlaquetteReport, RepresentationReport, SparsePatchState,
};
pub use phase::Phase;
