//! Tabular anonymization engine.
//!
//! Enforces k-anonymity, distinct l-diversity, t-closeness and δ-presence on
//! CSV tables through generalization hierarchies and record suppression,
//! reports re-identification risk and information loss, and validates study
//! plans against a privacy knowledge graph.

pub mod anonymizer;
pub mod dataset;
pub mod error;
pub mod hierarchy;
pub mod metrics;
pub mod ontology;
pub mod partition;
pub mod privacy;

pub use dataset::{AttributeRole, AttributeSchema, CsvOptions, DataType, Dataset, Value};
pub use error::{Error, Result};
pub use hierarchy::{GeneralizationScheme, Hierarchy, HierarchySet};
pub use partition::{partition, EquivalenceClass, Partition};
pub use privacy::{ModelVerdict, PopulationIndex, PrivacyConstraint};
