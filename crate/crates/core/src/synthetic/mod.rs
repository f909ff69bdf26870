//! Ground-truth benchmark generators and the Monte-Carlo pointwise-MI
//! oracle. All generators are pure functions of (parameters, seed); the
//! oracle runs on its own stream so label checks never share randomness
//! with the data under test.

mod dataset;
mod gaussian;
mod mappings;
mod oracle;
mod smoothed;
mod student;

pub use dataset::{sidecar_path, DatasetMeta, FamilyParams, LabeledDatasetPair};
pub use gaussian::{gen_correlated_gaussian, Allocation, ComponentMiAllocation};
pub use mappings::{apply_mapping, MappingKind};
pub use oracle::{mc_pmi_oracle, OracleFamily};
pub use smoothed::{
    gen_smoothed_uniform, smoothed_uniform_eps, smoothed_uniform_mi, MI_FLOOR,
};
pub use student::{gen_student, student_correction};
