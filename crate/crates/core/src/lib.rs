//! Parsing, validation, expansion, detection and documentation of class
//! models annotated with UML-F tags.
//!
//! The usual pipeline is [`parse_model`], then [`validate_model`] against a
//! [`Registry`], with [`expand_model`] to push pattern-level tags down to
//! principle and template/hook tags, [`detect_candidates`] to propose tags
//! for untagged structure, and [`generate_docs`] for a markdown bundle.

pub mod detector;
pub mod docgen;
pub mod expander;
pub mod model;
pub mod parser;
pub mod registry;
#[cfg(feature = "testkit")]
pub mod testkit;
pub mod validator;

pub use detector::{apply_candidate, detect_candidates, ApplyError, Candidate, DetectKind};
pub use docgen::{generate_docs, DocBundle, DocOptions};
pub use expander::{collect_instances, expand_instance, expand_model, PatternInstance};
pub use model::{ElementId, ElementKind, Model, TagApplication, TagOrigin};
pub use parser::{parse_model, print_model, ParseError};
pub use registry::{Registry, TagSetDefinition};
pub use validator::{validate_model, Diagnostic, RuleId, Severity, ValidateOptions};
