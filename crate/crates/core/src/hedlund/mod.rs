//! Combinatorial geometry of the Hedlund metric: lines, standard paths, tube changes.

pub mod experiments;
pub mod lines;
pub mod standard;
pub mod tubes;

pub use experiments::{
    analyze_segment, connectability_check, heteroclinic_experiment, segment_battery, Connectability, HeteroclinicReport,
    LadderRung, SegmentReport, TubeOracle,
};
pub use lines::{transverse_axes, Line, LineSystem};
pub use standard::{guide_path, standard_path, standard_vertices};
pub use tubes::{
    check_f30, check_l31, count_tube_changes, epsilon_prime, eta, hausdorff, shadowing_check, tube_confinement_check,
    tube_intervals, L31Report, TubeAnalysis, TubeInterval,
};
