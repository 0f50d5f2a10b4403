//! Exact simulator for quantum hidden subgroup algorithms over small finite
//! groups.
//!
//! The crate is organized bottom-up:
//!
//! * [`group`]: cyclic, product and dihedral groups, subgroups, cosets, quotients
//! * [`repr`]: irreducible representations and the unitary Fourier operator
//! * [`oracle`]: hidden-subgroup instances and the two-register oracle
//! * [`engine`]: state-vector execution of the measurement pipeline
//! * [`transversal`]: transversals, approximate functions, period finding
//! * [`recover`]: classical post-processing of outcomes

pub mod engine;
pub mod error;
pub mod group;
pub mod oracle;
pub mod recover;
pub mod repr;
pub mod transversal;

pub use engine::{
    derive_seed, run_oracle_pipeline, run_pipeline, sample, sample_trials, step_trace,
    MeasureGranularity, OutcomeDistribution, OutcomeLabel, PipelineConfig, QuantumState,
    SecondTransform, StepSnapshot,
};
pub use error::{QhsError, Result};
pub use group::{Cosets, ElementForm, FiniteGroup, GroupKind, Quotient, Subgroup};
pub use oracle::{
    apply_oracle, build_instance, build_instance_with_codomain, classical_brute_force_hsp,
    HspInstance, OracleUnitary,
};
pub use recover::{
    character_sieve, continued_fraction_period, period_from_samples, simon_solve,
    subgroup_consistency_rank, PeriodEstimate, RankedCandidate, RecoveryResult, SampleSet,
};
pub use repr::{
    contragredient, fourier_operator, irreps_of, verify_representation_suite, BasisOrdering,
    BlockOrder, FourierOperator, FourierRow, Irrep, IrrepOrder, RepresentationReport, C64,
};
pub use transversal::{
    approximate_function, finite_transversal, offset_transversal, peak_mass, shor_pipeline,
    shor_transversal, ApproximateFunction, PeriodicInstance, RepresentativePolicy, Transversal,
    TransversalKind,
};
