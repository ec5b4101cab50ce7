//! Seeded random generators shared by the integration suites.

use rand::rngs::StdRng;
use rand::seq::IndexedRandom;
use rand::Rng;

use dgml_core::model::{DesignElement, DesignModule, DgmlDocument, ElementKind};

pub const KEYWORD_POOL: [&str; 12] = [
    "login", "password", "report", "grid", "billing", "profile", "search", "upload", "menu",
    "chart", "export", "settings",
];

const CONTAINER_KINDS: [ElementKind; 8] = [
    ElementKind::Window,
    ElementKind::Panel,
    ElementKind::Group,
    ElementKind::Radiogroup,
    ElementKind::Dropdown,
    ElementKind::List,
    ElementKind::Table,
    ElementKind::Menu,
];

const LEAF_KINDS: [ElementKind; 13] = [
    ElementKind::Label,
    ElementKind::Textbox,
    ElementKind::Textarea,
    ElementKind::Button,
    ElementKind::Checkbox,
    ElementKind::Radio,
    ElementKind::Option,
    ElementKind::Listitem,
    ElementKind::Column,
    ElementKind::Menuitem,
    ElementKind::Image,
    ElementKind::Link,
    ElementKind::Separator,
];

const ATTR_KEYS: [&str; 6] = ["label", "title", "masked", "width", "tooltip", "align"];

/// Characters that stress escaping and exact round-tripping.
const VALUE_CHARS: [char; 24] = [
    'a', 'b', 'c', 'x', 'y', 'z', '0', '7', ' ', '.', '-', '_', '&', '<', '>', '"', '\'', '\t',
    '\n', 'é', 'ß', '∑', ';', '=',
];

pub fn random_value(rng: &mut StdRng, max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    (0..len).map(|_| *VALUE_CHARS.choose(rng).unwrap()).collect()
}

pub fn random_keyword(rng: &mut StdRng) -> String {
    if rng.random_bool(0.7) {
        KEYWORD_POOL.choose(rng).unwrap().to_string()
    } else {
        let len = rng.random_range(2..=8);
        (0..len)
            .map(|_| {
                let alphabet = "abcdefghijklmnopqrstuvwxyz0123456789";
                alphabet
                    .chars()
                    .nth(rng.random_range(0..alphabet.len()))
                    .unwrap()
            })
            .collect()
    }
}

fn random_element(
    rng: &mut StdRng,
    depth: usize,
    budget: &mut usize,
    next_id: &mut usize,
) -> DesignElement {
    *budget = budget.saturating_sub(1);
    let as_container = depth < 6 && *budget > 0 && rng.random_bool(0.5);
    let kind = if as_container {
        *CONTAINER_KINDS.choose(rng).unwrap()
    } else {
        *LEAF_KINDS.choose(rng).unwrap()
    };

    // the dot terminates the counter, so ids stay unique whatever the
    // random suffix looks like
    let id = format!("e{}.{}", *next_id, random_value(rng, 4));
    *next_id += 1;

    let mut element = DesignElement::new(kind, id);
    for _ in 0..rng.random_range(0..=3) {
        let key = ATTR_KEYS.choose(rng).unwrap().to_string();
        element.attributes.insert(key, random_value(rng, 10));
    }

    if as_container {
        let child_count = rng.random_range(0..=4).min(*budget);
        for _ in 0..child_count {
            let child = random_element(rng, depth + 1, budget, next_id);
            element.children.push(child);
        }
    }
    element
}

/// A random valid module: up to 50 elements, tree depth at most 6,
/// ids unique by construction.
pub fn random_module_doc(rng: &mut StdRng, name: &str) -> DgmlDocument {
    let mut module = DesignModule::new(
        name,
        (0..rng.random_range(1..=5)).map(|_| random_keyword(rng)),
    );
    module.drf = rng.random_range(0..=12);
    module.expert_score = rng.random_range(0..=10);

    let mut budget = rng.random_range(0..=50usize);
    let mut next_id = 0;
    while budget > 0 {
        let root = random_element(rng, 1, &mut budget, &mut next_id);
        module.design.push(root);
    }
    DgmlDocument::new(module)
}
