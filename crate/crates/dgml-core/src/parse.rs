//! Text-to-document parsing.
//!
//! The reader accepts the `.dgml` subset only: elements, double-quoted
//! attributes and the five standard entities. Comments, processing
//! instructions, CDATA and doctypes are rejected with a located
//! diagnostic. Every failure names a line; nothing panics on bad input.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::model::{DesignElement, DesignModule, DgmlDocument, ElementKind, DGML_VERSION};
use crate::validate::{validate, Violation};

/// Why a document failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    MalformedMarkup {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown element <{tag}>")]
    UnknownElement { tag: String, line: usize },
    #[error("line {line}: unsupported dgml version {version:?} (expected {DGML_VERSION:?})")]
    UnsupportedVersion { version: String, line: usize },
    #[error("line {line}: <module> is missing a name attribute")]
    MissingName { line: usize },
    #[error("line {line}: module has no keywords")]
    MissingKeywords { line: usize },
    #[error("line {line}: bad meta value {field}={value:?}")]
    BadMetaValue {
        field: String,
        value: String,
        line: usize,
    },
    #[error("duplicate element id {id:?}")]
    DuplicateId { id: String },
    #[error("<{kind}> (id {id:?}) is a leaf kind and cannot have children")]
    ChildrenOnLeaf { kind: ElementKind, id: String },
    #[error("invalid module: {0}")]
    Invalid(Violation),
}

/// Parse canonical or hand-edited DGML text into a fully validated document.
pub fn parse_dgml(text: &str) -> Result<DgmlDocument, ParseError> {
    let root = read_tree(text.strip_prefix('\u{feff}').unwrap_or(text))?;
    let doc = interpret_document(&root)?;

    if let Some(first) = validate(&doc).into_iter().next() {
        return Err(match first {
            Violation::DuplicateId { id } => ParseError::DuplicateId { id },
            Violation::ChildrenOnLeaf { kind, id } => ParseError::ChildrenOnLeaf { kind, id },
            other => ParseError::Invalid(other),
        });
    }
    Ok(doc)
}

// ---------------------------------------------------------------------------
// raw markup layer

#[derive(Debug)]
struct RawElement {
    name: String,
    attrs: Vec<(String, String)>,
    children: Vec<RawElement>,
    /// Concatenated character data, ASCII-trimmed. Only `<kw>` may carry any.
    text: String,
    line: usize,
}

impl RawElement {
    fn attr(&self, key: &str) -> Option<&str> {
        self.attrs
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

struct Scanner<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    column: usize,
}

impl<'a> Scanner<'a> {
    fn new(src: &'a str) -> Self {
        Scanner {
            src,
            pos: 0,
            line: 1,
            column: 1,
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat(&mut self, expected: char) -> bool {
        if self.peek() == Some(expected) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn skip_whitespace(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.bump();
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::MalformedMarkup {
            line: self.line,
            column: self.column,
            message: message.into(),
        })
    }
}

enum Token {
    Open(RawElement),
    SelfClosing(RawElement),
    Close { name: String, line: usize },
    Text { content: String, line: usize },
    Eof,
}

fn read_tree(src: &str) -> Result<RawElement, ParseError> {
    let mut scanner = Scanner::new(src);
    let mut stack: Vec<RawElement> = Vec::new();
    let mut root: Option<RawElement> = None;

    loop {
        match next_token(&mut scanner)? {
            Token::Eof => break,
            Token::Text { content, line } => match stack.last_mut() {
                Some(parent) => {
                    if !parent.text.is_empty() {
                        parent.text.push(' ');
                    }
                    parent.text.push_str(&content);
                }
                None => {
                    return Err(ParseError::MalformedMarkup {
                        line,
                        column: 1,
                        message: format!("unexpected text {content:?} outside the root element"),
                    })
                }
            },
            Token::Open(element) => {
                if root.is_some() && stack.is_empty() {
                    return trailing_content_error(&element);
                }
                stack.push(element);
            }
            Token::SelfClosing(element) => {
                if root.is_some() && stack.is_empty() {
                    return trailing_content_error(&element);
                }
                attach(&mut stack, &mut root, element);
            }
            Token::Close { name, line } => {
                let element = match stack.pop() {
                    Some(e) => e,
                    None => {
                        return Err(ParseError::MalformedMarkup {
                            line,
                            column: 1,
                            message: format!("closing tag </{name}> has no matching open tag"),
                        })
                    }
                };
                if element.name != name {
                    return Err(ParseError::MalformedMarkup {
                        line,
                        column: 1,
                        message: format!(
                            "mismatched closing tag </{name}> (expected </{}> opened on line {})",
                            element.name, element.line
                        ),
                    });
                }
                attach(&mut stack, &mut root, element);
            }
        }
    }

    if let Some(open) = stack.last() {
        return Err(ParseError::MalformedMarkup {
            line: scanner.line,
            column: scanner.column,
            message: format!("unclosed <{}> opened on line {}", open.name, open.line),
        });
    }
    root.ok_or(ParseError::MalformedMarkup {
        line: scanner.line,
        column: scanner.column,
        message: "empty document".to_string(),
    })
}

fn attach(stack: &mut [RawElement], root: &mut Option<RawElement>, element: RawElement) {
    match stack.last_mut() {
        Some(parent) => parent.children.push(element),
        None => *root = Some(element),
    }
}

fn trailing_content_error(element: &RawElement) -> Result<RawElement, ParseError> {
    Err(ParseError::MalformedMarkup {
        line: element.line,
        column: 1,
        message: format!("unexpected <{}> after the root element", element.name),
    })
}

fn next_token(scanner: &mut Scanner) -> Result<Token, ParseError> {
    // character data up to the next tag
    let text_line = scanner.line;
    let mut content = String::new();
    loop {
        match scanner.peek() {
            None => {
                return if content.trim_ascii().is_empty() {
                    Ok(Token::Eof)
                } else {
                    Ok(Token::Text {
                        content: content.trim_ascii().to_string(),
                        line: text_line,
                    })
                };
            }
            Some('<') => {
                if !content.trim_ascii().is_empty() {
                    return Ok(Token::Text {
                        content: content.trim_ascii().to_string(),
                        line: text_line,
                    });
                }
                break;
            }
            Some('&') => content.push_str(&read_entity(scanner)?),
            Some(c) => {
                content.push(c);
                scanner.bump();
            }
        }
    }

    scanner.bump(); // consume '<'
    match scanner.peek() {
        Some('/') => {
            scanner.bump();
            let line = scanner.line;
            let name = read_name(scanner)?;
            scanner.skip_whitespace();
            if !scanner.eat('>') {
                return scanner.fail(format!("expected '>' to close </{name}>"));
            }
            Ok(Token::Close { name, line })
        }
        Some('!') | Some('?') => {
            scanner.fail("comments, doctypes and processing instructions are not supported")
        }
        _ => read_start_tag(scanner),
    }
}

fn read_start_tag(scanner: &mut Scanner) -> Result<Token, ParseError> {
    let line = scanner.line;
    let name = read_name(scanner)?;
    let mut attrs: Vec<(String, String)> = Vec::new();

    loop {
        let before = scanner.pos;
        scanner.skip_whitespace();
        match scanner.peek() {
            Some('>') => {
                scanner.bump();
                return Ok(Token::Open(RawElement {
                    name,
                    attrs,
                    children: Vec::new(),
                    text: String::new(),
                    line,
                }));
            }
            Some('/') => {
                scanner.bump();
                if !scanner.eat('>') {
                    return scanner.fail("expected '>' after '/'");
                }
                return Ok(Token::SelfClosing(RawElement {
                    name,
                    attrs,
                    children: Vec::new(),
                    text: String::new(),
                    line,
                }));
            }
            None => return scanner.fail(format!("unexpected end of input inside <{name}>")),
            Some(_) => {
                if before == scanner.pos {
                    return scanner.fail(format!(
                        "expected whitespace before attribute in <{name}>"
                    ));
                }
                let (key, value) = read_attribute(scanner)?;
                if attrs.iter().any(|(k, _)| *k == key) {
                    return scanner.fail(format!("duplicate attribute {key:?} on <{name}>"));
                }
                attrs.push((key, value));
            }
        }
    }
}

fn read_attribute(scanner: &mut Scanner) -> Result<(String, String), ParseError> {
    let key = read_name(scanner)?;
    scanner.skip_whitespace();
    if !scanner.eat('=') {
        return scanner.fail(format!("expected '=' after attribute key {key:?}"));
    }
    scanner.skip_whitespace();
    if !scanner.eat('"') {
        return scanner.fail(format!("attribute {key:?} value must be double-quoted"));
    }
    let mut value = String::new();
    loop {
        match scanner.peek() {
            None => return scanner.fail("unexpected end of input inside attribute value"),
            Some('"') => {
                scanner.bump();
                return Ok((key, value));
            }
            Some('<') => return scanner.fail("raw '<' is not allowed in attribute values"),
            Some('&') => value.push_str(&read_entity(scanner)?),
            Some(c) => {
                value.push(c);
                scanner.bump();
            }
        }
    }
}

fn read_name(scanner: &mut Scanner) -> Result<String, ParseError> {
    let mut name = String::new();
    match scanner.peek() {
        Some(c) if c.is_ascii_alphabetic() => {
            name.push(c);
            scanner.bump();
        }
        _ => return scanner.fail("expected a name starting with a letter"),
    }
    while let Some(c) = scanner.peek() {
        if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
            name.push(c);
            scanner.bump();
        } else {
            break;
        }
    }
    Ok(name)
}

fn read_entity(scanner: &mut Scanner) -> Result<String, ParseError> {
    let start_line = scanner.line;
    let start_column = scanner.column;
    scanner.bump(); // consume '&'
    let mut entity = String::new();
    loop {
        match scanner.peek() {
            Some(';') => {
                scanner.bump();
                break;
            }
            Some(c) if c.is_ascii_alphanumeric() && entity.len() < 8 => {
                entity.push(c);
                scanner.bump();
            }
            _ => {
                return Err(ParseError::MalformedMarkup {
                    line: start_line,
                    column: start_column,
                    message: "unterminated entity reference (bare '&' must be written '&amp;')"
                        .to_string(),
                })
            }
        }
    }
    let decoded = match entity.as_str() {
        "amp" => "&",
        "lt" => "<",
        "gt" => ">",
        "quot" => "\"",
        "apos" => "'",
        other => {
            return Err(ParseError::MalformedMarkup {
                line: start_line,
                column: start_column,
                message: format!("unknown entity &{other};"),
            })
        }
    };
    Ok(decoded.to_string())
}

// ---------------------------------------------------------------------------
// document layer

const STRUCTURAL_TAGS: [&str; 6] = ["dgml", "module", "keywords", "kw", "meta", "design"];

fn is_known_tag(name: &str) -> bool {
    STRUCTURAL_TAGS.contains(&name) || name.parse::<ElementKind>().is_ok()
}

/// Reject tags that exist in the vocabulary but sit in the wrong place,
/// and name tags that exist nowhere at all.
fn unexpected_child(parent: &str, child: &RawElement) -> ParseError {
    if is_known_tag(&child.name) {
        ParseError::MalformedMarkup {
            line: child.line,
            column: 1,
            message: format!("unexpected <{}> inside <{parent}>", child.name),
        }
    } else {
        ParseError::UnknownElement {
            tag: child.name.clone(),
            line: child.line,
        }
    }
}

fn reject_text(element: &RawElement) -> Result<(), ParseError> {
    if element.text.is_empty() {
        Ok(())
    } else {
        Err(ParseError::MalformedMarkup {
            line: element.line,
            column: 1,
            message: format!(
                "unexpected text {:?} inside <{}>",
                element.text, element.name
            ),
        })
    }
}

fn reject_unknown_attrs(element: &RawElement, allowed: &[&str]) -> Result<(), ParseError> {
    for (key, _) in &element.attrs {
        if !allowed.contains(&key.as_str()) {
            return Err(ParseError::MalformedMarkup {
                line: element.line,
                column: 1,
                message: format!("unexpected attribute {key:?} on <{}>", element.name),
            });
        }
    }
    Ok(())
}

fn interpret_document(root: &RawElement) -> Result<DgmlDocument, ParseError> {
    if root.name != "dgml" {
        return Err(ParseError::MalformedMarkup {
            line: root.line,
            column: 1,
            message: format!("expected <dgml> root element, found <{}>", root.name),
        });
    }
    reject_text(root)?;
    reject_unknown_attrs(root, &["version"])?;
    let version = root.attr("version").ok_or(ParseError::MalformedMarkup {
        line: root.line,
        column: 1,
        message: "<dgml> is missing a version attribute".to_string(),
    })?;
    if version != DGML_VERSION {
        return Err(ParseError::UnsupportedVersion {
            version: version.to_string(),
            line: root.line,
        });
    }

    let mut modules = root.children.iter();
    let module_el = modules.next().ok_or(ParseError::MalformedMarkup {
        line: root.line,
        column: 1,
        message: "<dgml> must contain exactly one <module>".to_string(),
    })?;
    if let Some(extra) = modules.next() {
        return Err(ParseError::MalformedMarkup {
            line: extra.line,
            column: 1,
            message: "a document holds exactly one <module>".to_string(),
        });
    }
    if module_el.name != "module" {
        return Err(unexpected_child("dgml", module_el));
    }
    interpret_module(module_el).map(|module| DgmlDocument {
        version: version.to_string(),
        module,
    })
}

fn interpret_module(module_el: &RawElement) -> Result<DesignModule, ParseError> {
    reject_text(module_el)?;
    reject_unknown_attrs(module_el, &["name"])?;
    let name = module_el
        .attr("name")
        .ok_or(ParseError::MissingName {
            line: module_el.line,
        })?
        .to_string();

    let mut keywords_el: Option<&RawElement> = None;
    let mut meta_el: Option<&RawElement> = None;
    let mut design_el: Option<&RawElement> = None;
    for child in &module_el.children {
        let slot = match child.name.as_str() {
            "keywords" => &mut keywords_el,
            "meta" => &mut meta_el,
            "design" => &mut design_el,
            _ => return Err(unexpected_child("module", child)),
        };
        if slot.is_some() {
            return Err(ParseError::MalformedMarkup {
                line: child.line,
                column: 1,
                message: format!("duplicate <{}> section", child.name),
            });
        }
        *slot = Some(child);
    }

    let keywords = match keywords_el {
        Some(el) => interpret_keywords(el)?,
        None => {
            return Err(ParseError::MissingKeywords {
                line: module_el.line,
            })
        }
    };

    let (drf, expert_score, derived_from) = match meta_el {
        Some(el) => interpret_meta(el)?,
        None => (0, 0, None),
    };

    let design = match design_el {
        Some(el) => {
            reject_text(el)?;
            reject_unknown_attrs(el, &[])?;
            el.children
                .iter()
                .map(|child| interpret_element(child, "design"))
                .collect::<Result<Vec<_>, _>>()?
        }
        None => Vec::new(),
    };

    Ok(DesignModule {
        name,
        keywords,
        drf,
        expert_score,
        derived_from,
        design,
    })
}

fn interpret_keywords(keywords_el: &RawElement) -> Result<BTreeSet<String>, ParseError> {
    reject_text(keywords_el)?;
    reject_unknown_attrs(keywords_el, &[])?;
    let mut keywords = BTreeSet::new();
    for kw in &keywords_el.children {
        if kw.name != "kw" {
            return Err(unexpected_child("keywords", kw));
        }
        reject_unknown_attrs(kw, &[])?;
        if let Some(child) = kw.children.first() {
            return Err(unexpected_child("kw", child));
        }
        keywords.insert(kw.text.clone());
    }
    if keywords.is_empty() {
        return Err(ParseError::MissingKeywords {
            line: keywords_el.line,
        });
    }
    Ok(keywords)
}

#[allow(clippy::type_complexity)]
fn interpret_meta(meta_el: &RawElement) -> Result<(u64, u8, Option<String>), ParseError> {
    reject_text(meta_el)?;
    reject_unknown_attrs(meta_el, &["drf", "score", "derived-from"])?;
    if let Some(child) = meta_el.children.first() {
        return Err(unexpected_child("meta", child));
    }

    let bad = |field: &str, value: &str| ParseError::BadMetaValue {
        field: field.to_string(),
        value: value.to_string(),
        line: meta_el.line,
    };

    let drf = match meta_el.attr("drf") {
        Some(v) => v.parse::<u64>().map_err(|_| bad("drf", v))?,
        None => 0,
    };
    let score = match meta_el.attr("score") {
        Some(v) => {
            let score = v.parse::<u8>().map_err(|_| bad("score", v))?;
            if score > 10 {
                return Err(bad("score", v));
            }
            score
        }
        None => 0,
    };
    let derived_from = match meta_el.attr("derived-from") {
        Some("") | None => None,
        Some(v) => Some(v.to_string()),
    };
    Ok((drf, score, derived_from))
}

fn interpret_element(raw: &RawElement, parent: &str) -> Result<DesignElement, ParseError> {
    let kind: ElementKind = match raw.name.parse() {
        Ok(kind) => kind,
        // a structural tag here is misplaced, not unknown
        Err(_) => return Err(unexpected_child(parent, raw)),
    };
    reject_text(raw)?;

    let mut id = None;
    let mut attributes = BTreeMap::new();
    for (key, value) in &raw.attrs {
        if key == "id" {
            id = Some(value.clone());
        } else {
            attributes.insert(key.clone(), value.clone());
        }
    }
    let id = id.ok_or(ParseError::MalformedMarkup {
        line: raw.line,
        column: 1,
        message: format!("<{kind}> is missing the required id attribute"),
    })?;

    let children = raw
        .children
        .iter()
        .map(|child| interpret_element(child, &raw.name))
        .collect::<Result<Vec<_>, _>>()?;

    Ok(DesignElement {
        kind,
        id,
        attributes,
        children,
    })
}
