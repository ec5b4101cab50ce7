//! Requirement-driven retrieval and composition.
//!
//! A requirement specification is reduced to normalized keywords, matched
//! against the repository index, and the hits are ranked with the design
//! reusable factor as the primary key. Composition runs greedy set cover
//! over the query keywords and assembles the picked modules into one
//! skeleton document.
//!
//! `search` and `compose_skeleton` are read-only and may run concurrently
//! against a repository snapshot; `accept_skeleton` needs the writer.

use std::collections::BTreeSet;

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::model::{DesignElement, DesignModule, DgmlDocument};
use crate::repo::{RepoError, Repository};

/// Tokens dropped during keyword extraction.
pub const STOPWORDS: [&str; 26] = [
    "a", "an", "and", "are", "as", "at", "be", "by", "for", "from", "has", "have", "in", "is",
    "it", "of", "on", "or", "that", "the", "this", "to", "want", "wants", "will", "with",
];

const MIN_TOKEN_LEN: usize = 2;

/// Name given to composed skeleton modules.
pub const SKELETON_MODULE_NAME: &str = "skeleton";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferError {
    #[error("no keywords could be extracted from the requirement specification")]
    EmptyQuery,
}

/// Reduce free text to its requirement keywords: lowercase, split on every
/// non-alphanumeric character, drop tokens shorter than two characters and
/// stopwords, deduplicate.
pub fn extract_keywords(text: &str) -> BTreeSet<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|token| token.len() >= MIN_TOKEN_LEN)
        .filter(|token| !STOPWORDS.contains(token))
        .map(str::to_string)
        .collect()
}

/// Normalize one explicitly listed keyword: lowercase and strip everything
/// outside `[a-z0-9]`. Returns `None` when nothing remains.
pub fn normalize_keyword(raw: &str) -> Option<String> {
    let normalized: String = raw
        .to_lowercase()
        .chars()
        .filter(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        .collect();
    if normalized.is_empty() {
        None
    } else {
        Some(normalized)
    }
}

/// A requirement specification plus the keyword set derived from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequirementSpec {
    pub source_text: String,
    pub keywords: BTreeSet<String>,
}

impl RequirementSpec {
    /// Keywords are exactly `extract_keywords(text)`.
    pub fn from_text(text: impl Into<String>) -> Self {
        let source_text = text.into();
        let keywords = extract_keywords(&source_text);
        RequirementSpec {
            source_text,
            keywords,
        }
    }

    /// Build from a UIRS document body. The whole body goes through
    /// extraction; any line beginning `keywords:` additionally contributes
    /// an explicit comma-separated list, unioned in after normalization.
    pub fn from_uirs(text: impl Into<String>) -> Self {
        let source_text = text.into();
        let mut keywords = extract_keywords(&source_text);
        for line in source_text.lines() {
            if let Some(rest) = line.strip_prefix("keywords:") {
                keywords.extend(rest.split(',').filter_map(normalize_keyword));
            }
        }
        RequirementSpec {
            source_text,
            keywords,
        }
    }

    /// Build from an explicit keyword list (e.g. a `--keywords` flag).
    pub fn from_keyword_list<I, S>(raw: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let items: Vec<String> = raw.into_iter().map(|s| s.as_ref().to_string()).collect();
        let keywords = items
            .iter()
            .filter_map(|s| normalize_keyword(s))
            .collect();
        RequirementSpec {
            source_text: items.join(", "),
            keywords,
        }
    }
}

/// One module matching a query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchCandidate {
    pub module_name: String,
    /// Number of query keywords the module carries; always at least 1.
    pub match_score: usize,
    pub drf: u64,
    pub expert_score: u8,
    pub matched_keywords: BTreeSet<String>,
}

/// Every module sharing at least one keyword with the query and passing
/// the `min_score` expert filter, ordered by DRF descending, then match
/// count descending, then name ascending. The first entry is the best
/// reuse candidate.
pub fn search(
    repo: &Repository,
    spec: &RequirementSpec,
    min_score: u8,
) -> Result<Vec<MatchCandidate>, InferError> {
    if spec.keywords.is_empty() {
        return Err(InferError::EmptyQuery);
    }

    let score = |module: &DesignModule| -> Option<MatchCandidate> {
        if module.expert_score < min_score {
            return None;
        }
        let matched: BTreeSet<String> = module
            .keywords
            .intersection(&spec.keywords)
            .cloned()
            .collect();
        if matched.is_empty() {
            return None;
        }
        Some(MatchCandidate {
            module_name: module.name.clone(),
            match_score: matched.len(),
            drf: module.drf,
            expert_score: module.expert_score,
            matched_keywords: matched,
        })
    };

    #[cfg(feature = "parallel")]
    let mut candidates: Vec<MatchCandidate> = repo
        .modules()
        .par_iter()
        .filter_map(|(_, m)| score(m))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let mut candidates: Vec<MatchCandidate> = repo
        .modules()
        .values()
        .filter_map(score)
        .collect();

    candidates.sort_by(|a, b| {
        b.drf
            .cmp(&a.drf)
            .then(b.match_score.cmp(&a.match_score))
            .then(a.module_name.cmp(&b.module_name))
    });
    Ok(candidates)
}

/// A composed first-level design proposal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkeletonDesign {
    /// Module names in selection order.
    pub selected: Vec<String>,
    pub covered: BTreeSet<String>,
    pub uncovered: BTreeSet<String>,
    pub document: DgmlDocument,
}

/// Greedy maximum-coverage composition: repeatedly pick the module that
/// covers the most still-uncovered query keywords (ties: DRF descending,
/// then name ascending) until nothing coverable remains. Keywords no
/// module can supply are reported as uncovered, never dropped.
pub fn compose_skeleton(
    repo: &Repository,
    spec: &RequirementSpec,
    min_score: u8,
) -> Result<SkeletonDesign, InferError> {
    if spec.keywords.is_empty() {
        return Err(InferError::EmptyQuery);
    }

    let mut uncovered = spec.keywords.clone();
    let mut selected: Vec<String> = Vec::new();

    loop {
        #[cfg(feature = "parallel")]
        let best = repo
            .modules()
            .par_iter()
            .filter_map(|(_, m)| coverage_gain(m, &uncovered, min_score))
            .reduce_with(prefer);
        #[cfg(not(feature = "parallel"))]
        let best = repo
            .modules()
            .values()
            .filter_map(|m| coverage_gain(m, &uncovered, min_score))
            .reduce(prefer);

        match best {
            Some((_, _, module)) => {
                uncovered.retain(|kw| !module.keywords.contains(kw));
                selected.push(module.name.clone());
            }
            None => break,
        }
    }

    let covered: BTreeSet<String> = spec.keywords.difference(&uncovered).cloned().collect();
    let document = assemble_document(repo, &selected, &spec.keywords);
    Ok(SkeletonDesign {
        selected,
        covered,
        uncovered,
        document,
    })
}

/// Concatenate the selected modules' design trees, in selection order,
/// into a fresh skeleton module. Element ids get a `<module-name>.`
/// prefix so id uniqueness survives the merge.
fn assemble_document(
    repo: &Repository,
    selected: &[String],
    query: &BTreeSet<String>,
) -> DgmlDocument {
    let mut design: Vec<DesignElement> = Vec::new();
    for name in selected {
        if let Some(module) = repo.get(name) {
            for root in &module.design {
                design.push(prefix_ids(root.clone(), name));
            }
        }
    }
    let mut module = DesignModule::new(SKELETON_MODULE_NAME, query.iter().cloned());
    module.design = design;
    DgmlDocument::new(module)
}

/// How many still-uncovered keywords `module` would cover, if it passes
/// the expert-score filter and contributes at all.
fn coverage_gain<'m>(
    module: &'m DesignModule,
    uncovered: &BTreeSet<String>,
    min_score: u8,
) -> Option<(usize, u64, &'m DesignModule)> {
    if module.expert_score < min_score {
        return None;
    }
    let gain = module
        .keywords
        .iter()
        .filter(|kw| uncovered.contains(*kw))
        .count();
    if gain == 0 {
        return None;
    }
    Some((gain, module.drf, module))
}

/// Pick the better greedy candidate: larger gain wins, then larger drf,
/// then the lesser module name. Total because names are unique.
fn prefer<'m>(
    a: (usize, u64, &'m DesignModule),
    b: (usize, u64, &'m DesignModule),
) -> (usize, u64, &'m DesignModule) {
    match (a.0, a.1).cmp(&(b.0, b.1)) {
        std::cmp::Ordering::Greater => a,
        std::cmp::Ordering::Less => b,
        std::cmp::Ordering::Equal => {
            if a.2.name <= b.2.name {
                a
            } else {
                b
            }
        }
    }
}

fn prefix_ids(mut element: DesignElement, module_name: &str) -> DesignElement {
    element.id = format!("{module_name}.{}", element.id);
    element.children = element
        .children
        .into_iter()
        .map(|child| prefix_ids(child, module_name))
        .collect();
    element
}

/// Commit the proposal: record one reuse per selected module. Call this
/// only after the user confirmed the skeleton; every accept is a distinct
/// reuse event, so accepting twice counts twice.
pub fn accept_skeleton(repo: &mut Repository, skeleton: &SkeletonDesign) -> Result<(), RepoError> {
    for name in &skeleton.selected {
        if repo.get(name).is_none() {
            return Err(RepoError::ModuleNotFound(name.clone()));
        }
    }
    for name in &skeleton.selected {
        repo.record_reuse(name)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ElementKind;
    use tempfile::TempDir;

    fn module(name: &str, keywords: &[&str], drf: u64) -> DgmlDocument {
        let mut m = DesignModule::new(name, keywords.iter().copied());
        m.drf = drf;
        DgmlDocument::new(m)
    }

    fn repo_with(dir: &TempDir, docs: Vec<DgmlDocument>) -> Repository {
        let mut repo = Repository::init(dir.path()).unwrap();
        for doc in docs {
            repo.add_module(doc).unwrap();
        }
        repo
    }

    #[test]
    fn extraction_matches_hand_applied_rules() {
        let got = extract_keywords("Login screen with username and password fields");
        let want: BTreeSet<String> = ["fields", "login", "password", "screen", "username"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(got, want);
    }

    #[test]
    fn extraction_of_empty_input_is_empty() {
        assert!(extract_keywords("").is_empty());
    }

    #[test]
    fn extraction_lowercases_and_dedupes() {
        let got = extract_keywords("Login LOGIN login!");
        assert_eq!(got.iter().collect::<Vec<_>>(), ["login"]);
    }

    #[test]
    fn uirs_keyword_line_is_unioned_after_normalization() {
        let spec = RequirementSpec::from_uirs("Billing report\nkeywords: Multi-Factor, SSO,\n");
        assert!(spec.keywords.contains("billing"));
        assert!(spec.keywords.contains("report"));
        assert!(spec.keywords.contains("multifactor"));
        assert!(spec.keywords.contains("sso"));
    }

    #[test]
    fn search_ranks_by_drf_first() {
        let dir = TempDir::new().unwrap();
        let repo = repo_with(
            &dir,
            vec![module("a", &["login", "form"], 3), module("b", &["login"], 5)],
        );
        let spec = RequirementSpec::from_keyword_list(["login"]);
        let hits = search(&repo, &spec, 0).unwrap();
        let names: Vec<_> = hits.iter().map(|c| c.module_name.as_str()).collect();
        assert_eq!(names, ["b", "a"]);
        assert_eq!(hits[0].drf, 5);
        assert_eq!(hits[0].matched_keywords.iter().collect::<Vec<_>>(), ["login"]);
    }

    #[test]
    fn equal_drf_breaks_on_match_score() {
        let dir = TempDir::new().unwrap();
        let repo = repo_with(
            &dir,
            vec![module("a", &["login"], 2), module("b", &["login", "form"], 2)],
        );
        let spec = RequirementSpec::from_keyword_list(["login", "form"]);
        let names: Vec<_> = search(&repo, &spec, 0)
            .unwrap()
            .into_iter()
            .map(|c| c.module_name)
            .collect();
        assert_eq!(names, ["b", "a"]);
    }

    #[test]
    fn no_match_yields_empty_list() {
        let dir = TempDir::new().unwrap();
        let repo = repo_with(&dir, vec![module("a", &["login"], 1)]);
        let spec = RequirementSpec::from_keyword_list(["payroll"]);
        assert!(search(&repo, &spec, 0).unwrap().is_empty());
    }

    #[test]
    fn empty_query_is_rejected() {
        let dir = TempDir::new().unwrap();
        let repo = repo_with(&dir, vec![module("a", &["login"], 1)]);
        let spec = RequirementSpec::from_text("");
        assert_eq!(search(&repo, &spec, 0), Err(InferError::EmptyQuery));
        assert!(matches!(
            compose_skeleton(&repo, &spec, 0),
            Err(InferError::EmptyQuery)
        ));
    }

    #[test]
    fn min_score_filters_candidates() {
        let dir = TempDir::new().unwrap();
        let mut repo = repo_with(
            &dir,
            vec![module("a", &["login"], 9), module("b", &["login"], 1)],
        );
        repo.set_score("b", 8).unwrap();
        let spec = RequirementSpec::from_keyword_list(["login"]);
        let names: Vec<_> = search(&repo, &spec, 5)
            .unwrap()
            .into_iter()
            .map(|c| c.module_name)
            .collect();
        assert_eq!(names, ["b"]);
    }

    #[test]
    fn greedy_trace_matches_hand_derivation() {
        // B and A both cover 2 uncovered keywords at step 1; B wins on drf.
        let dir = TempDir::new().unwrap();
        let repo = repo_with(
            &dir,
            vec![
                module("a", &["login", "password"], 2),
                module("b", &["password", "submit"], 7),
                module("c", &["logo"], 1),
            ],
        );
        let spec = RequirementSpec::from_keyword_list(["login", "password", "submit", "help"]);
        let skeleton = compose_skeleton(&repo, &spec, 0).unwrap();
        assert_eq!(skeleton.selected, ["b", "a"]);
        assert_eq!(
            skeleton.covered.iter().collect::<Vec<_>>(),
            ["login", "password", "submit"]
        );
        assert_eq!(skeleton.uncovered.iter().collect::<Vec<_>>(), ["help"]);
    }

    #[test]
    fn zero_matches_select_nothing() {
        let dir = TempDir::new().unwrap();
        let repo = repo_with(&dir, vec![module("a", &["grid"], 4)]);
        let spec = RequirementSpec::from_keyword_list(["payroll", "tax"]);
        let skeleton = compose_skeleton(&repo, &spec, 0).unwrap();
        assert!(skeleton.selected.is_empty());
        assert_eq!(skeleton.uncovered, spec.keywords);
        assert!(skeleton.covered.is_empty());
    }

    #[test]
    fn query_subset_of_one_module_selects_it_alone() {
        let dir = TempDir::new().unwrap();
        let repo = repo_with(
            &dir,
            vec![
                module("big", &["login", "password", "submit"], 1),
                module("small", &["login"], 9),
            ],
        );
        let spec = RequirementSpec::from_keyword_list(["login", "password"]);
        let skeleton = compose_skeleton(&repo, &spec, 0).unwrap();
        assert_eq!(skeleton.selected, ["big"]);
        assert!(skeleton.uncovered.is_empty());
    }

    #[test]
    fn skeleton_document_prefixes_ids_and_is_valid() {
        let dir = TempDir::new().unwrap();
        let el_a = DesignElement::new(ElementKind::Window, "w1")
            .with_child(DesignElement::new(ElementKind::Button, "b1"));
        let el_b = DesignElement::new(ElementKind::Window, "w1");
        let mut doc_a = module("alpha", &["login"], 1);
        doc_a.module.design = vec![el_a];
        let mut doc_b = module("beta", &["report"], 1);
        doc_b.module.design = vec![el_b];
        let repo = repo_with(&dir, vec![doc_a, doc_b]);

        let spec = RequirementSpec::from_keyword_list(["login", "report"]);
        let skeleton = compose_skeleton(&repo, &spec, 0).unwrap();
        let ids: Vec<_> = skeleton
            .document
            .module
            .design
            .iter()
            .flat_map(|root| root.walk())
            .map(|e| e.id.clone())
            .collect();
        assert_eq!(ids, ["alpha.w1", "alpha.b1", "beta.w1"]);
        assert!(crate::validate::validate(&skeleton.document).is_empty());
        assert_eq!(skeleton.document.module.keywords, spec.keywords);
    }

    #[test]
    fn accept_increments_each_selected_module_once() {
        let dir = TempDir::new().unwrap();
        let mut repo = repo_with(
            &dir,
            vec![
                module("a", &["login", "password"], 2),
                module("b", &["password", "submit"], 7),
            ],
        );
        let spec = RequirementSpec::from_keyword_list(["login", "password", "submit"]);
        let skeleton = compose_skeleton(&repo, &spec, 0).unwrap();
        assert_eq!(skeleton.selected, ["b", "a"]);

        accept_skeleton(&mut repo, &skeleton).unwrap();
        assert_eq!(repo.get("b").unwrap().drf, 8);
        assert_eq!(repo.get("a").unwrap().drf, 3);

        // accepting again is a second reuse event
        accept_skeleton(&mut repo, &skeleton).unwrap();
        assert_eq!(repo.get("b").unwrap().drf, 9);
        assert_eq!(repo.get("a").unwrap().drf, 4);
    }

    #[test]
    fn accept_of_empty_skeleton_changes_nothing() {
        let dir = TempDir::new().unwrap();
        let mut repo = repo_with(&dir, vec![module("a", &["grid"], 4)]);
        let spec = RequirementSpec::from_keyword_list(["payroll"]);
        let skeleton = compose_skeleton(&repo, &spec, 0).unwrap();
        accept_skeleton(&mut repo, &skeleton).unwrap();
        assert_eq!(repo.get("a").unwrap().drf, 4);
    }
}
