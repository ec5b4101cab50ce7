//! Canonical text form of a document.
//!
//! The emitter is deterministic: 2-space indentation, LF line endings,
//! keywords ascending, attributes id-first then alphabetical, meta
//! attributes in fixed order. Serializing the same value twice yields
//! byte-identical output, which makes `.dgml` files diff-friendly.

use std::fmt::Write;

use crate::model::{DesignElement, DgmlDocument};

/// Render `doc` in canonical form. The caller is expected to hold a valid
/// document (as produced by `parse_dgml` or checked with `validate`).
pub fn serialize_dgml(doc: &DgmlDocument) -> String {
    let mut out = String::new();
    let module = &doc.module;

    writeln!(out, "<dgml version=\"{}\">", escape(&doc.version)).unwrap();
    writeln!(out, "  <module name=\"{}\">", escape(&module.name)).unwrap();

    writeln!(out, "    <keywords>").unwrap();
    for kw in &module.keywords {
        writeln!(out, "      <kw>{}</kw>", escape_text(kw)).unwrap();
    }
    writeln!(out, "    </keywords>").unwrap();

    writeln!(
        out,
        "    <meta drf=\"{}\" score=\"{}\" derived-from=\"{}\"/>",
        module.drf,
        module.expert_score,
        escape(module.derived_from.as_deref().unwrap_or("")),
    )
    .unwrap();

    if module.design.is_empty() {
        writeln!(out, "    <design/>").unwrap();
    } else {
        writeln!(out, "    <design>").unwrap();
        for root in &module.design {
            write_element(&mut out, root, 3);
        }
        writeln!(out, "    </design>").unwrap();
    }

    writeln!(out, "  </module>").unwrap();
    writeln!(out, "</dgml>").unwrap();
    out
}

fn write_element(out: &mut String, element: &DesignElement, depth: usize) {
    let indent = "  ".repeat(depth);
    write!(out, "{indent}<{} id=\"{}\"", element.kind, escape(&element.id)).unwrap();
    for (key, value) in &element.attributes {
        write!(out, " {key}=\"{}\"", escape(value)).unwrap();
    }
    if element.children.is_empty() {
        writeln!(out, "/>").unwrap();
    } else {
        writeln!(out, ">").unwrap();
        for child in &element.children {
            write_element(out, child, depth + 1);
        }
        writeln!(out, "{indent}</{}>", element.kind).unwrap();
    }
}

/// Escape an attribute value with the five standard markup escapes.
fn escape(value: &str) -> String {
    let mut escaped = String::with_capacity(value.len());
    for c in value.chars() {
        match c {
            '&' => escaped.push_str("&amp;"),
            '<' => escaped.push_str("&lt;"),
            '>' => escaped.push_str("&gt;"),
            '"' => escaped.push_str("&quot;"),
            '\'' => escaped.push_str("&apos;"),
            _ => escaped.push(c),
        }
    }
    escaped
}

/// Escape element text content.
fn escape_text(value: &str) -> String {
    escape(value)
}
