//! File-backed module store with a keyword inverted index.
//!
//! One canonical `.dgml` file per module under `modules/` is the source of
//! truth. `keywords.idx` is a derived cache: it is rewritten on every
//! index-changing commit and can always be rebuilt from the module files.
//! Writes are atomic at file granularity (temp name, then rename), so an
//! interrupted process never leaves a torn module file behind.
//!
//! Concurrency: single writer, multiple readers within one process —
//! readers hold `&Repository`, the writer `&mut Repository`. No
//! cross-process locking is provided.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::model::{DesignModule, DgmlDocument};
use crate::parse::parse_dgml;
use crate::serialize::serialize_dgml;
use crate::validate::{validate, Violation};

const META_FILE: &str = "repo.meta";
const META_CONTENT: &str = "dgml-repo 1\n";
const INDEX_FILE: &str = "keywords.idx";
const MODULES_DIR: &str = "modules";
const MODULE_EXT: &str = "dgml";

#[derive(Debug, Error)]
pub enum RepoError {
    #[error("{0} is already an initialized repository")]
    AlreadyInitialized(PathBuf),
    #[error("{0} is not a dgml repository")]
    NotARepository(PathBuf),
    #[error("module {0:?} already exists in the repository")]
    DuplicateModuleName(String),
    #[error("module {0:?} not found")]
    ModuleNotFound(String),
    #[error("expert score {0} is out of range 0..=10")]
    ScoreOutOfRange(u8),
    #[error("module {name:?} failed validation: {}", format_violations(.violations))]
    ValidationFailed {
        name: String,
        violations: Vec<Violation>,
    },
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RepoError + '_ {
    move |source| RepoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Inverted mapping keyword → sorted set of module names.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KeywordIndex {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl KeywordIndex {
    pub fn from_modules<'a, I>(modules: I) -> Self
    where
        I: IntoIterator<Item = &'a DesignModule>,
    {
        let mut index = KeywordIndex::default();
        for module in modules {
            index.insert_module(module);
        }
        index
    }

    fn insert_module(&mut self, module: &DesignModule) {
        for kw in &module.keywords {
            self.entries
                .entry(kw.clone())
                .or_default()
                .insert(module.name.clone());
        }
    }

    /// Module names carrying `keyword`, ascending.
    pub fn modules_for(&self, keyword: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(keyword)
    }

    pub fn entries(&self) -> &BTreeMap<String, BTreeSet<String>> {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// The `keywords.idx` cache format: one `keyword<TAB>name,name` line
    /// per keyword, sorted by keyword.
    pub fn to_index_file(&self) -> String {
        let mut out = String::new();
        for (keyword, names) in &self.entries {
            out.push_str(keyword);
            out.push('\t');
            let joined: Vec<&str> = names.iter().map(String::as_str).collect();
            out.push_str(&joined.join(","));
            out.push('\n');
        }
        out
    }
}

/// A module file that could not be loaded, and why.
#[derive(Debug, Clone)]
pub struct SkippedFile {
    pub file: String,
    pub reason: String,
}

/// Result of rebuilding the index from module files.
#[derive(Debug)]
pub struct ReindexReport {
    pub index: KeywordIndex,
    pub skipped: Vec<SkippedFile>,
}

/// Non-fatal findings from opening a repository.
#[derive(Debug, Clone)]
pub enum OpenWarning {
    /// A module file was unreadable or invalid and was skipped.
    SkippedFile { file: String, reason: String },
    /// A module's `derived_from` names a module that no longer exists.
    DanglingDerivedFrom { module: String, parent: String },
}

impl std::fmt::Display for OpenWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OpenWarning::SkippedFile { file, reason } => {
                write!(f, "skipped {file}: {reason}")
            }
            OpenWarning::DanglingDerivedFrom { module, parent } => {
                write!(f, "module {module:?} is derived from missing module {parent:?}")
            }
        }
    }
}

/// The centralized design store.
#[derive(Debug)]
pub struct Repository {
    root: PathBuf,
    modules: BTreeMap<String, DesignModule>,
    index: KeywordIndex,
    warnings: Vec<OpenWarning>,
}

impl PartialEq for Repository {
    fn eq(&self, other: &Self) -> bool {
        self.modules == other.modules && self.index == other.index
    }
}

impl Repository {
    /// Create an empty repository layout under `root`.
    pub fn init(root: impl AsRef<Path>) -> Result<Repository, RepoError> {
        let root = root.as_ref();
        if root.join(META_FILE).exists() {
            return Err(RepoError::AlreadyInitialized(root.to_path_buf()));
        }
        fs::create_dir_all(root.join(MODULES_DIR)).map_err(io_err(root))?;
        atomic_write(&root.join(META_FILE), META_CONTENT.as_bytes())?;
        atomic_write(&root.join(INDEX_FILE), b"")?;
        Ok(Repository {
            root: root.to_path_buf(),
            modules: BTreeMap::new(),
            index: KeywordIndex::default(),
            warnings: Vec::new(),
        })
    }

    /// Load an existing repository. The live index is always derived from
    /// the module files; a stale or missing `keywords.idx` is harmless.
    /// Unreadable module files are skipped and reported as warnings.
    pub fn open(root: impl AsRef<Path>) -> Result<Repository, RepoError> {
        let root = root.as_ref();
        let meta_path = root.join(META_FILE);
        let meta = match fs::read_to_string(&meta_path) {
            Ok(content) => content,
            Err(e) if e.kind() == io::ErrorKind::NotFound => {
                return Err(RepoError::NotARepository(root.to_path_buf()))
            }
            Err(e) => return Err(io_err(&meta_path)(e)),
        };
        if meta.trim_ascii_end() != META_CONTENT.trim_ascii_end() {
            return Err(RepoError::NotARepository(root.to_path_buf()));
        }

        let (loaded, skipped) = scan_module_files(&root.join(MODULES_DIR))?;
        let mut warnings: Vec<OpenWarning> = skipped
            .into_iter()
            .map(|s| OpenWarning::SkippedFile {
                file: s.file,
                reason: s.reason,
            })
            .collect();

        let modules: BTreeMap<String, DesignModule> =
            loaded.into_iter().map(|m| (m.name.clone(), m)).collect();
        for module in modules.values() {
            if let Some(parent) = &module.derived_from {
                if !modules.contains_key(parent) {
                    warnings.push(OpenWarning::DanglingDerivedFrom {
                        module: module.name.clone(),
                        parent: parent.clone(),
                    });
                }
            }
        }

        let index = KeywordIndex::from_modules(modules.values());
        Ok(Repository {
            root: root.to_path_buf(),
            modules,
            index,
            warnings,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Modules keyed by name; iteration order is ascending lexicographic.
    pub fn modules(&self) -> &BTreeMap<String, DesignModule> {
        &self.modules
    }

    pub fn module_names(&self) -> impl Iterator<Item = &str> {
        self.modules.keys().map(String::as_str)
    }

    pub fn get(&self, name: &str) -> Option<&DesignModule> {
        self.modules.get(name)
    }

    pub fn len(&self) -> usize {
        self.modules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modules.is_empty()
    }

    /// The live, incrementally maintained index.
    pub fn index(&self) -> &KeywordIndex {
        &self.index
    }

    pub fn warnings(&self) -> &[OpenWarning] {
        &self.warnings
    }

    /// Store a new module. The module file and the index cache are durable
    /// before this returns.
    pub fn add_module(&mut self, doc: DgmlDocument) -> Result<(), RepoError> {
        self.check_addable(&doc)?;
        self.write_module_file(&doc)?;

        let module = doc.module;
        self.index.insert_module(&module);
        self.modules.insert(module.name.clone(), module);
        self.write_index_file()?;
        Ok(())
    }

    /// Count one reuse of `name`: its DRF goes up by exactly one and the
    /// module file is rewritten before the new value is returned.
    pub fn record_reuse(&mut self, name: &str) -> Result<u64, RepoError> {
        let module = self
            .modules
            .get(name)
            .ok_or_else(|| RepoError::ModuleNotFound(name.to_string()))?;

        let mut updated = module.clone();
        updated.drf += 1;
        let new_drf = updated.drf;
        self.write_module_file(&DgmlDocument::new(updated.clone()))?;
        self.modules.insert(name.to_string(), updated);
        Ok(new_drf)
    }

    /// Store `doc` as a child of `parent`. The child records its lineage
    /// and the parent's DRF goes up by one, since a derivation is a reuse.
    pub fn derive_module(&mut self, parent: &str, mut doc: DgmlDocument) -> Result<(), RepoError> {
        if !self.modules.contains_key(parent) {
            return Err(RepoError::ModuleNotFound(parent.to_string()));
        }
        doc.module.derived_from = Some(parent.to_string());
        self.add_module(doc)?;
        self.record_reuse(parent)?;
        Ok(())
    }

    /// Replace (not accumulate) the expert score of `name`.
    pub fn set_score(&mut self, name: &str, score: u8) -> Result<(), RepoError> {
        if score > 10 {
            return Err(RepoError::ScoreOutOfRange(score));
        }
        let module = self
            .modules
            .get(name)
            .ok_or_else(|| RepoError::ModuleNotFound(name.to_string()))?;

        let mut updated = module.clone();
        updated.expert_score = score;
        self.write_module_file(&DgmlDocument::new(updated.clone()))?;
        self.modules.insert(name.to_string(), updated);
        Ok(())
    }

    /// Reconstruct the index solely from the module files on disk.
    /// Corrupt files are reported by name; the healthy ones still index.
    pub fn rebuild_index(&self) -> Result<ReindexReport, RepoError> {
        let (loaded, skipped) = scan_module_files(&self.root.join(MODULES_DIR))?;
        Ok(ReindexReport {
            index: KeywordIndex::from_modules(loaded.iter()),
            skipped,
        })
    }

    /// Rewrite `keywords.idx` from a freshly rebuilt index and return the
    /// report. This is the repair path for manual edits.
    pub fn reindex(&mut self) -> Result<ReindexReport, RepoError> {
        let report = self.rebuild_index()?;
        self.index = report.index.clone();
        self.write_index_file()?;
        Ok(report)
    }

    fn check_addable(&self, doc: &DgmlDocument) -> Result<(), RepoError> {
        let name = &doc.module.name;
        let mut violations = validate(doc);
        if let Some(parent) = &doc.module.derived_from {
            if !self.modules.contains_key(parent) {
                violations.push(Violation::UnknownDerivedFrom {
                    name: parent.clone(),
                });
            }
        }
        if !violations.is_empty() {
            return Err(RepoError::ValidationFailed {
                name: name.clone(),
                violations,
            });
        }
        if self.modules.contains_key(name) {
            return Err(RepoError::DuplicateModuleName(name.clone()));
        }
        Ok(())
    }

    fn module_path(&self, name: &str) -> PathBuf {
        self.root
            .join(MODULES_DIR)
            .join(format!("{name}.{MODULE_EXT}"))
    }

    fn write_module_file(&self, doc: &DgmlDocument) -> Result<(), RepoError> {
        let path = self.module_path(&doc.module.name);
        atomic_write(&path, serialize_dgml(doc).as_bytes())
    }

    fn write_index_file(&self) -> Result<(), RepoError> {
        atomic_write(
            &self.root.join(INDEX_FILE),
            self.index.to_index_file().as_bytes(),
        )
    }
}

/// Parse every `*.dgml` under `dir`, in filename order. Returns the loaded
/// modules plus one entry per file that failed to load.
fn scan_module_files(dir: &Path) -> Result<(Vec<DesignModule>, Vec<SkippedFile>), RepoError> {
    let mut paths: Vec<PathBuf> = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let entry = entry.map_err(io_err(dir))?;
        let path = entry.path();
        if path.extension().and_then(|e| e.to_str()) == Some(MODULE_EXT) {
            paths.push(path);
        }
    }
    paths.sort();

    #[cfg(feature = "parallel")]
    let results: Vec<Result<DesignModule, SkippedFile>> =
        paths.par_iter().map(|p| load_module_file(p)).collect();
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<DesignModule, SkippedFile>> =
        paths.iter().map(|p| load_module_file(p)).collect();

    let mut loaded = Vec::new();
    let mut skipped = Vec::new();
    for result in results {
        match result {
            Ok(module) => loaded.push(module),
            Err(skip) => skipped.push(skip),
        }
    }
    Ok((loaded, skipped))
}

fn load_module_file(path: &Path) -> Result<DesignModule, SkippedFile> {
    let file = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let skip = |reason: String| SkippedFile {
        file: file.clone(),
        reason,
    };

    let text = fs::read_to_string(path).map_err(|e| skip(e.to_string()))?;
    let doc = parse_dgml(&text).map_err(|e| skip(e.to_string()))?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    if doc.module.name != stem {
        return Err(skip(format!(
            "module name {:?} does not match file name",
            doc.module.name
        )));
    }
    Ok(doc.module)
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Write `bytes` to `path` through a temp file in the same directory,
/// fsync, then rename over the destination.
fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), RepoError> {
    let parent = path.parent().unwrap_or_else(|| Path::new("."));
    let base = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = parent.join(format!(
        ".{base}.tmp.{}.{}",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));

    let write_result = (|| -> io::Result<()> {
        let mut f = File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        Ok(())
    })();
    if let Err(e) = write_result {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path)(e));
    }
    if let Err(e) = fs::rename(&tmp, path) {
        let _ = fs::remove_file(&tmp);
        return Err(io_err(path)(e));
    }
    // fsync the directory so the rename itself is durable where supported
    if let Ok(dir) = File::open(parent) {
        let _ = dir.sync_all();
    }
    Ok(())
}
