//! Module name catalog: short name to FQCN resolution plus equivalence
//! classes for near-interchangeable modules (`command`/`shell`,
//! `copy`/`template`, `package`/`apt`/`dnf`/`yum`).

use std::collections::HashMap;

use thiserror::Error;

use crate::yaml::{parse_stream, NodeKind, ParseError, YamlNode};

/// Key/value score granted when target and prediction use distinct members
/// of one equivalence class.
pub const DEFAULT_EQUIV_PARTIAL: f64 = 0.5;

const EMBEDDED_CATALOG: &str = include_str!("../../data/catalog.yaml");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("catalog file {0}: {1}")]
    Invalid(String, String),
    #[error("FQCN `{0}` appears in more than one equivalence class")]
    OverlappingClasses(String),
}

/// Immutable module name table. Loaded once, shared freely across threads.
#[derive(Debug, Clone)]
pub struct ModuleCatalog {
    version: String,
    short_to_fqcn: HashMap<String, String>,
    equivalence_classes: Vec<Vec<String>>,
    /// FQCN -> class index, for O(1) similarity checks.
    class_of: HashMap<String, usize>,
    equiv_partial: f64,
}

impl ModuleCatalog {
    /// The catalog shipped with the toolkit (builtin collection).
    pub fn builtin() -> Self {
        Self::from_yaml(EMBEDDED_CATALOG, "<embedded catalog>")
            .expect("embedded catalog is valid")
    }

    /// Parse a catalog (or overlay) file: a mapping `short_name: fqcn` plus
    /// the reserved keys `version` and `equivalence_classes`.
    pub fn from_yaml(text: &str, source_name: &str) -> Result<Self, CatalogError> {
        let doc = parse_stream(text, source_name)?;
        let invalid =
            |msg: &str| CatalogError::Invalid(source_name.to_string(), msg.to_string());
        let root = doc
            .sole_root()
            .ok_or_else(|| invalid("expected a single mapping document"))?;
        let pairs = root
            .as_mapping()
            .ok_or_else(|| invalid("expected a mapping at the root"))?;

        let mut catalog = ModuleCatalog {
            version: String::from("0"),
            short_to_fqcn: HashMap::new(),
            equivalence_classes: Vec::new(),
            class_of: HashMap::new(),
            equiv_partial: DEFAULT_EQUIV_PARTIAL,
        };
        for (key, value) in pairs {
            let name = key
                .key_text()
                .ok_or_else(|| invalid("keys must be scalars"))?;
            match name.as_str() {
                "version" => {
                    catalog.version = scalar_text(value)
                        .ok_or_else(|| invalid("`version` must be a scalar"))?;
                }
                "equivalence_classes" => {
                    catalog.load_classes(value, source_name)?;
                }
                _ => {
                    if name.contains('.') {
                        return Err(invalid(&format!(
                            "short name `{name}` must not contain dots"
                        )));
                    }
                    let fqcn = scalar_text(value)
                        .ok_or_else(|| invalid("FQCN values must be scalars"))?;
                    catalog.short_to_fqcn.insert(name, fqcn);
                }
            }
        }
        Ok(catalog)
    }

    fn load_classes(&mut self, node: &YamlNode, source_name: &str) -> Result<(), CatalogError> {
        let classes = node.as_sequence().ok_or_else(|| {
            CatalogError::Invalid(
                source_name.to_string(),
                "`equivalence_classes` must be a list of lists".to_string(),
            )
        })?;
        for class in classes {
            let members = class.as_sequence().ok_or_else(|| {
                CatalogError::Invalid(
                    source_name.to_string(),
                    "each equivalence class must be a list of FQCNs".to_string(),
                )
            })?;
            let idx = self.equivalence_classes.len();
            let mut names = Vec::with_capacity(members.len());
            for member in members {
                let fqcn = scalar_text(member).ok_or_else(|| {
                    CatalogError::Invalid(
                        source_name.to_string(),
                        "class members must be scalars".to_string(),
                    )
                })?;
                if self.class_of.insert(fqcn.clone(), idx).is_some() {
                    return Err(CatalogError::OverlappingClasses(fqcn));
                }
                names.push(fqcn);
            }
            self.equivalence_classes.push(names);
        }
        Ok(())
    }

    /// Extend this catalog with entries from an overlay file. Overlay short
    /// names override existing ones; overlay equivalence classes replace the
    /// shipped list when present.
    pub fn apply_overlay(&mut self, text: &str, source_name: &str) -> Result<(), CatalogError> {
        let overlay = Self::from_yaml(text, source_name)?;
        self.short_to_fqcn.extend(overlay.short_to_fqcn);
        if !overlay.equivalence_classes.is_empty() {
            self.equivalence_classes = overlay.equivalence_classes;
            self.class_of = overlay.class_of;
        }
        if overlay.version != "0" {
            self.version = overlay.version;
        }
        Ok(())
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn len(&self) -> usize {
        self.short_to_fqcn.len()
    }

    pub fn is_empty(&self) -> bool {
        self.short_to_fqcn.is_empty()
    }

    /// Override the partial score used for equivalent-but-different modules.
    pub fn with_equiv_partial(mut self, partial: f64) -> Self {
        self.equiv_partial = partial;
        self
    }

    pub fn equiv_partial(&self) -> f64 {
        self.equiv_partial
    }

    /// Resolve a module name to its FQCN. Names that are already qualified
    /// (contain a dot) or unknown pass through unchanged, which also makes
    /// resolution idempotent.
    pub fn resolve_fqcn<'a>(&'a self, raw_name: &'a str) -> &'a str {
        if raw_name.contains('.') {
            return raw_name;
        }
        self.short_to_fqcn
            .get(raw_name)
            .map(String::as_str)
            .unwrap_or(raw_name)
    }

    /// Similarity between two FQCN-resolved module names: 1 when equal, the
    /// partial score when they share an equivalence class, 0 otherwise.
    pub fn module_similarity(&self, target_fqcn: &str, predicted_fqcn: &str) -> f64 {
        if target_fqcn == predicted_fqcn {
            return 1.0;
        }
        match (self.class_of.get(target_fqcn), self.class_of.get(predicted_fqcn)) {
            (Some(a), Some(b)) if a == b => self.equiv_partial,
            _ => 0.0,
        }
    }
}

fn scalar_text(node: &YamlNode) -> Option<String> {
    match &node.kind {
        NodeKind::Scalar(_) => node.key_text(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_size() {
        let catalog = ModuleCatalog::builtin();
        assert!(catalog.len() >= 70, "catalog has {} entries", catalog.len());
        assert_eq!(catalog.version(), "1");
    }

    #[test]
    fn short_name_resolution() {
        let catalog = ModuleCatalog::builtin();
        assert_eq!(catalog.resolve_fqcn("copy"), "ansible.builtin.copy");
        assert_eq!(catalog.resolve_fqcn("ansible.builtin.copy"), "ansible.builtin.copy");
        assert_eq!(catalog.resolve_fqcn("community.general.ufw"), "community.general.ufw");
        assert_eq!(catalog.resolve_fqcn("no_such_module"), "no_such_module");
    }

    #[test]
    fn resolution_is_idempotent() {
        let catalog = ModuleCatalog::builtin();
        for name in ["copy", "ansible.builtin.copy", "shell", "unknown", "a.b.c"] {
            let once = catalog.resolve_fqcn(name).to_string();
            let twice = catalog.resolve_fqcn(&once).to_string();
            assert_eq!(once, twice, "{name}");
        }
    }

    #[test]
    fn similarity_scores() {
        let catalog = ModuleCatalog::builtin();
        assert_eq!(
            catalog.module_similarity("ansible.builtin.copy", "ansible.builtin.copy"),
            1.0
        );
        assert_eq!(
            catalog.module_similarity("ansible.builtin.copy", "ansible.builtin.template"),
            0.5
        );
        assert_eq!(
            catalog.module_similarity("ansible.builtin.copy", "ansible.builtin.yum"),
            0.0
        );
        assert_eq!(
            catalog.module_similarity("ansible.builtin.apt", "ansible.builtin.yum"),
            0.5
        );
    }

    #[test]
    fn similarity_is_symmetric_and_reflexive_maximal() {
        let catalog = ModuleCatalog::builtin();
        let names = [
            "ansible.builtin.copy",
            "ansible.builtin.template",
            "ansible.builtin.yum",
            "custom.coll.mod",
        ];
        for a in names {
            assert_eq!(catalog.module_similarity(a, a), 1.0);
            for b in names {
                let ab = catalog.module_similarity(a, b);
                assert_eq!(ab, catalog.module_similarity(b, a));
                assert!(ab <= 1.0);
            }
        }
    }

    #[test]
    fn overlay_extends_and_overrides() {
        let mut catalog = ModuleCatalog::builtin();
        catalog
            .apply_overlay("ufw: community.general.ufw\ncopy: my.fork.copy\n", "overlay")
            .unwrap();
        assert_eq!(catalog.resolve_fqcn("ufw"), "community.general.ufw");
        assert_eq!(catalog.resolve_fqcn("copy"), "my.fork.copy");
        // Equivalence classes untouched by an overlay without them.
        assert_eq!(
            catalog.module_similarity("ansible.builtin.command", "ansible.builtin.shell"),
            0.5
        );
    }

    #[test]
    fn overlapping_classes_rejected() {
        let text = "equivalence_classes:\n  - [a.b.c, a.b.d]\n  - [a.b.c, a.b.e]\n";
        let err = ModuleCatalog::from_yaml(text, "t").unwrap_err();
        assert!(matches!(err, CatalogError::OverlappingClasses(_)));
    }

    #[test]
    fn dotted_short_names_rejected() {
        let err = ModuleCatalog::from_yaml("a.b: c.d.e\n", "t").unwrap_err();
        assert!(matches!(err, CatalogError::Invalid(..)));
    }

    #[test]
    fn configurable_partial_score() {
        let catalog = ModuleCatalog::builtin().with_equiv_partial(0.25);
        assert_eq!(
            catalog.module_similarity("ansible.builtin.copy", "ansible.builtin.template"),
            0.25
        );
    }
}
