//! Ansible semantics over parsed YAML: module name catalog, task and play
//! classification, free-form argument normalization.

mod catalog;
mod classify;
mod freeform;

pub use catalog::{CatalogError, ModuleCatalog, DEFAULT_EQUIV_PARTIAL};
pub use classify::{
    classify_play, classify_task, is_keyword, AnsiblePlay, AnsibleTask, ClassifyError,
    ModuleInvocation, BLOCK_KEYS,
};
pub use freeform::{parse_free_form, render_free_form, FreeFormError, RAW_PARAMS_KEY};
