//! Ansible task and play schema validation (the Schema Correct metric).
//!
//! Deliberately more permissive than ansible-lint: historical forms such as
//! free-form arguments, short module names, and `with_*` lookups all pass.
//! Only structure is checked, never module vocabulary.

mod tables;
mod validate;

pub use tables::{SchemaLoadError, SchemaTables, ValueKind};
pub use validate::{
    validate_play, validate_playbook, validate_task, PathSeg, SchemaViolation, ViolationRule,
};
