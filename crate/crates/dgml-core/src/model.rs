//! Core value types for DGML documents.
//!
//! All types are plain immutable values: cheap to clone, safe to share
//! across threads, and compared structurally.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

/// The fixed DGML format version accepted and emitted by this crate.
pub const DGML_VERSION: &str = "1.0";

/// The closed vocabulary of UI design element tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ElementKind {
    Window,
    Panel,
    Group,
    Label,
    Textbox,
    Textarea,
    Button,
    Checkbox,
    Radiogroup,
    Radio,
    Dropdown,
    Option,
    List,
    Listitem,
    Table,
    Column,
    Menu,
    Menuitem,
    Image,
    Link,
    Separator,
}

impl ElementKind {
    /// Every kind, in tag-name order of the vocabulary.
    pub const ALL: [ElementKind; 21] = [
        ElementKind::Window,
        ElementKind::Panel,
        ElementKind::Group,
        ElementKind::Label,
        ElementKind::Textbox,
        ElementKind::Textarea,
        ElementKind::Button,
        ElementKind::Checkbox,
        ElementKind::Radiogroup,
        ElementKind::Radio,
        ElementKind::Dropdown,
        ElementKind::Option,
        ElementKind::List,
        ElementKind::Listitem,
        ElementKind::Table,
        ElementKind::Column,
        ElementKind::Menu,
        ElementKind::Menuitem,
        ElementKind::Image,
        ElementKind::Link,
        ElementKind::Separator,
    ];

    /// The tag name as it appears in a document.
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Window => "window",
            ElementKind::Panel => "panel",
            ElementKind::Group => "group",
            ElementKind::Label => "label",
            ElementKind::Textbox => "textbox",
            ElementKind::Textarea => "textarea",
            ElementKind::Button => "button",
            ElementKind::Checkbox => "checkbox",
            ElementKind::Radiogroup => "radiogroup",
            ElementKind::Radio => "radio",
            ElementKind::Dropdown => "dropdown",
            ElementKind::Option => "option",
            ElementKind::List => "list",
            ElementKind::Listitem => "listitem",
            ElementKind::Table => "table",
            ElementKind::Column => "column",
            ElementKind::Menu => "menu",
            ElementKind::Menuitem => "menuitem",
            ElementKind::Image => "image",
            ElementKind::Link => "link",
            ElementKind::Separator => "separator",
        }
    }

    /// Container kinds may hold children; every other kind is a leaf.
    pub fn is_container(self) -> bool {
        matches!(
            self,
            ElementKind::Window
                | ElementKind::Panel
                | ElementKind::Group
                | ElementKind::Radiogroup
                | ElementKind::Dropdown
                | ElementKind::List
                | ElementKind::Table
                | ElementKind::Menu
        )
    }
}

impl fmt::Display for ElementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Error returned when a tag name is not in the element vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownKind(pub String);

impl fmt::Display for UnknownKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown element kind {:?}", self.0)
    }
}

impl std::error::Error for UnknownKind {}

impl FromStr for ElementKind {
    type Err = UnknownKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElementKind::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| UnknownKind(s.to_string()))
    }
}

/// One UI widget in a design tree.
///
/// The `id` is held outside the attribute map and must be unique across the
/// whole element tree of a module. Attributes are keyed alphabetically;
/// serialization always writes `id` first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignElement {
    pub kind: ElementKind,
    pub id: String,
    pub attributes: BTreeMap<String, String>,
    pub children: Vec<DesignElement>,
}

impl DesignElement {
    pub fn new(kind: ElementKind, id: impl Into<String>) -> Self {
        DesignElement {
            kind,
            id: id.into(),
            attributes: BTreeMap::new(),
            children: Vec::new(),
        }
    }

    pub fn with_attr(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.attributes.insert(key.into(), value.into());
        self
    }

    pub fn with_child(mut self, child: DesignElement) -> Self {
        self.children.push(child);
        self
    }

    /// Depth-first walk over this element and all descendants.
    pub fn walk(&self) -> impl Iterator<Item = &DesignElement> {
        let mut stack = vec![self];
        std::iter::from_fn(move || {
            let next = stack.pop()?;
            stack.extend(next.children.iter().rev());
            Some(next)
        })
    }

    /// Number of elements in this subtree, including itself.
    pub fn size(&self) -> usize {
        self.walk().count()
    }
}

/// A complete named design unit: keywords, reuse metadata and an element tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignModule {
    pub name: String,
    pub keywords: BTreeSet<String>,
    /// Design reusable factor: how many times this module has been reused.
    pub drf: u64,
    /// Reviewer-assigned quality score in `0..=10`.
    pub expert_score: u8,
    /// Name of the module this one was derived from, if any.
    pub derived_from: Option<String>,
    /// Root elements of the design. May be empty for a pure skeleton.
    pub design: Vec<DesignElement>,
}

impl DesignModule {
    pub fn new<I, S>(name: impl Into<String>, keywords: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        DesignModule {
            name: name.into(),
            keywords: keywords.into_iter().map(Into::into).collect(),
            drf: 0,
            expert_score: 0,
            derived_from: None,
            design: Vec::new(),
        }
    }

    pub fn with_design(mut self, roots: Vec<DesignElement>) -> Self {
        self.design = roots;
        self
    }

    /// Total element count across all design roots.
    pub fn element_count(&self) -> usize {
        self.design.iter().map(DesignElement::size).sum()
    }
}

/// One `.dgml` document: format version plus exactly one module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DgmlDocument {
    pub version: String,
    pub module: DesignModule,
}

impl DgmlDocument {
    pub fn new(module: DesignModule) -> Self {
        DgmlDocument {
            version: DGML_VERSION.to_string(),
            module,
        }
    }
}

/// True when `name` is a well-formed module name: `[a-z0-9][a-z0-9-]*`.
pub fn is_valid_module_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}

/// True when `kw` is a normalized keyword: `[a-z0-9]+`.
pub fn is_valid_keyword(kw: &str) -> bool {
    !kw.is_empty() && kw.chars().all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
}

/// True when `key` is a well-formed attribute key: `[a-z][a-z0-9-]*`.
pub fn is_valid_attr_key(key: &str) -> bool {
    let mut chars = key.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '-')
}
