//! Invariant checking over documents.
//!
//! `validate` accepts structurally well-formed but possibly
//! invariant-violating data (documents built in code, or loaded through
//! lenient ingestion paths) and reports every violation it finds rather
//! than stopping at the first.

use std::collections::BTreeSet;
use std::fmt;

use crate::model::{
    is_valid_attr_key, is_valid_keyword, is_valid_module_name, DesignElement, DgmlDocument,
    ElementKind, DGML_VERSION,
};

/// One broken invariant. Each violation names the element id or field
/// it applies to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Document version is not the supported one.
    BadVersion { version: String },
    /// Module name does not match `[a-z0-9][a-z0-9-]*`.
    BadModuleName { name: String },
    /// The keyword set is empty; such a module is unreachable by inference.
    EmptyKeywords,
    /// A keyword does not match `[a-z0-9]+`.
    BadKeyword { keyword: String },
    /// Expert score outside `0..=10`.
    ScoreOutOfRange { score: u8 },
    /// `derived_from` does not match the module-name form.
    BadDerivedFrom { name: String },
    /// `derived_from` names a module the repository does not hold.
    /// Never produced by document-level validation; reported by
    /// repository ingestion.
    UnknownDerivedFrom { name: String },
    /// An element has an empty id.
    EmptyId { kind: ElementKind },
    /// The same id appears on more than one element in the module.
    DuplicateId { id: String },
    /// A leaf kind carries children.
    ChildrenOnLeaf { kind: ElementKind, id: String },
    /// An attribute key does not match `[a-z][a-z0-9-]*`, or shadows `id`.
    BadAttributeKey { id: String, key: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::BadVersion { version } => {
                write!(f, "unsupported version {version:?} (expected {DGML_VERSION:?})")
            }
            Violation::BadModuleName { name } => {
                write!(f, "module name {name:?} must match [a-z0-9][a-z0-9-]*")
            }
            Violation::EmptyKeywords => write!(f, "module has no keywords"),
            Violation::BadKeyword { keyword } => {
                write!(f, "keyword {keyword:?} must match [a-z0-9]+")
            }
            Violation::ScoreOutOfRange { score } => {
                write!(f, "expert score {score} is out of range 0..=10")
            }
            Violation::BadDerivedFrom { name } => {
                write!(f, "derived-from {name:?} must match [a-z0-9][a-z0-9-]*")
            }
            Violation::UnknownDerivedFrom { name } => {
                write!(f, "derived-from references unknown module {name:?}")
            }
            Violation::EmptyId { kind } => write!(f, "<{kind}> element has an empty id"),
            Violation::DuplicateId { id } => write!(f, "duplicate element id {id:?}"),
            Violation::ChildrenOnLeaf { kind, id } => {
                write!(f, "<{kind}> (id {id:?}) is a leaf kind and cannot have children")
            }
            Violation::BadAttributeKey { id, key } => {
                write!(f, "attribute key {key:?} on element {id:?} must match [a-z][a-z0-9-]*")
            }
        }
    }
}

/// Check every invariant of `doc` and return the complete list of
/// violations. An empty report means the document is valid.
pub fn validate(doc: &DgmlDocument) -> Vec<Violation> {
    let mut report = Vec::new();

    if doc.version != DGML_VERSION {
        report.push(Violation::BadVersion {
            version: doc.version.clone(),
        });
    }

    let module = &doc.module;
    if !is_valid_module_name(&module.name) {
        report.push(Violation::BadModuleName {
            name: module.name.clone(),
        });
    }
    if module.keywords.is_empty() {
        report.push(Violation::EmptyKeywords);
    }
    for kw in &module.keywords {
        if !is_valid_keyword(kw) {
            report.push(Violation::BadKeyword {
                keyword: kw.clone(),
            });
        }
    }
    if module.expert_score > 10 {
        report.push(Violation::ScoreOutOfRange {
            score: module.expert_score,
        });
    }
    if let Some(parent) = &module.derived_from {
        if !is_valid_module_name(parent) {
            report.push(Violation::BadDerivedFrom {
                name: parent.clone(),
            });
        }
    }

    let mut seen_ids = BTreeSet::new();
    let mut reported_dups = BTreeSet::new();
    for root in &module.design {
        check_element(root, &mut seen_ids, &mut reported_dups, &mut report);
    }

    report
}

fn check_element(
    element: &DesignElement,
    seen_ids: &mut BTreeSet<String>,
    reported_dups: &mut BTreeSet<String>,
    report: &mut Vec<Violation>,
) {
    if element.id.is_empty() {
        report.push(Violation::EmptyId { kind: element.kind });
    } else if !seen_ids.insert(element.id.clone())
        && reported_dups.insert(element.id.clone())
    {
        report.push(Violation::DuplicateId {
            id: element.id.clone(),
        });
    }

    for key in element.attributes.keys() {
        if key == "id" || !is_valid_attr_key(key) {
            report.push(Violation::BadAttributeKey {
                id: element.id.clone(),
                key: key.clone(),
            });
        }
    }

    if !element.kind.is_container() && !element.children.is_empty() {
        report.push(Violation::ChildrenOnLeaf {
            kind: element.kind,
            id: element.id.clone(),
        });
    }

    for child in &element.children {
        check_element(child, seen_ids, reported_dups, report);
    }
}
