//! Test and component data model, the line-oriented `.test` file format, and
//! corpus loading with origin tracing.
//!
//! A test file holds one component per line:
//!
//! ```text
//! avl1.insert(int2)           # STEP 4   ;;; quick0.test:15
//! ```
//!
//! The `# STEP <i>` comment is optional on input and always written on
//! output. The part after ` ;;; ` is either a single origin
//! (`<test>:<position>`), an abstract-match origin (`~<test>:<position>`), or
//! a weighted set of contributing tests (`{a.test=1,b.test=3}`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Separator between the action text and its annotation.
pub const ANNOTATION_SEPARATOR: &str = " ;;; ";

const STEP_MARKER: &str = "# STEP";
const ACTION_COLUMN: usize = 27;
const STEP_COLUMN: usize = 3;

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("invalid action text {text:?}: {reason}")]
    InvalidAction { text: String, reason: &'static str },
    #[error("invalid test name {0:?}")]
    InvalidName(String),
    #[error("{test}: line {line}: {reason}")]
    Parse {
        test: String,
        line: usize,
        reason: String,
    },
    #[error("no seeds")]
    NoSeeds,
    #[error("duplicate test name {0}")]
    DuplicateTest(String),
    #[error("dangling reference {origin} in {test}:{position}")]
    Dangling {
        test: String,
        position: usize,
        origin: String,
    },
    #[error(
        "provenance mismatch at {test}:{position}: {origin} holds {found:?}, expected {expected:?}"
    )]
    Mismatch {
        test: String,
        position: usize,
        origin: String,
        expected: String,
        found: String,
    },
    #[error("cyclic provenance: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("unknown test {0}")]
    UnknownTest(String),
    #[error("step {step} out of range for {test} ({len} components)")]
    StepOutOfRange {
        test: String,
        step: usize,
        len: usize,
    },
    #[error("provenance lost at {test}:{position}")]
    ProvenanceLost { test: String, position: usize },
    #[error("ambiguous provenance at {test}:{position}: contributors {}", .contributors.join(", "))]
    AmbiguousProvenance {
        test: String,
        position: usize,
        contributors: Vec<String>,
    },
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

/// A single concrete test action, e.g. `avl1.insert(int2)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ActionText(String);

impl ActionText {
    pub fn new(text: impl Into<String>) -> Result<Self, CorpusError> {
        let text = text.into();
        let reason = if text.is_empty() {
            Some("empty")
        } else if text.contains('\n') || text.contains('\r') {
            Some("contains a line break")
        } else if text.contains(ANNOTATION_SEPARATOR) {
            Some("contains the annotation separator")
        } else if text.contains(STEP_MARKER) {
            Some("contains a step marker")
        } else if text.trim() != text {
            Some("has surrounding whitespace")
        } else {
            None
        };
        match reason {
            Some(reason) => Err(CorpusError::InvalidAction { text, reason }),
            None => Ok(ActionText(text)),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for ActionText {
    type Error = CorpusError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        ActionText::new(value)
    }
}

impl From<ActionText> for String {
    fn from(value: ActionText) -> Self {
        value.0
    }
}

impl fmt::Display for ActionText {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Test names are file names such as `quick3.test`. They must not contain
/// characters that are meaningful inside an annotation.
pub fn validate_test_name(name: &str) -> Result<(), CorpusError> {
    let bad = name.is_empty()
        || name.starts_with('~')
        || name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, ':' | ',' | '=' | '{' | '}' | '/' | '\\'));
    if bad {
        Err(CorpusError::InvalidName(name.to_string()))
    } else {
        Ok(())
    }
}

/// Location of a component: test name plus zero-based component index.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Origin {
    pub test_name: String,
    pub position: usize,
}

impl Origin {
    pub fn new(test_name: impl Into<String>, position: usize) -> Self {
        Origin {
            test_name: test_name.into(),
            position,
        }
    }
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.test_name, self.position)
    }
}

/// Provenance attached to a component.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Annotation {
    #[default]
    None,
    /// Exact origin: the component was copied from this location.
    Single(Origin),
    /// Pseudo-provenance found by matching action kinds rather than text.
    Abstract(Origin),
    /// Contributing tests with their (positive) degree of contribution.
    Weighted(BTreeMap<String, f64>),
}

impl Annotation {
    pub fn is_none(&self) -> bool {
        matches!(self, Annotation::None)
    }

    /// The origin for `Single` and `Abstract` annotations.
    pub fn origin(&self) -> Option<&Origin> {
        match self {
            Annotation::Single(o) | Annotation::Abstract(o) => Some(o),
            _ => None,
        }
    }

    /// Names of every test this annotation refers to.
    pub fn referenced_tests(&self) -> Vec<&str> {
        match self {
            Annotation::None => vec![],
            Annotation::Single(o) | Annotation::Abstract(o) => vec![o.test_name.as_str()],
            Annotation::Weighted(entries) => entries.keys().map(String::as_str).collect(),
        }
    }

    fn render(&self) -> Option<String> {
        match self {
            Annotation::None => None,
            Annotation::Single(o) => Some(o.to_string()),
            Annotation::Abstract(o) => Some(format!("~{o}")),
            Annotation::Weighted(entries) => {
                let body: Vec<String> = entries
                    .iter()
                    .map(|(name, degree)| format!("{name}={degree}"))
                    .collect();
                Some(format!("{{{}}}", body.join(",")))
            }
        }
    }

    fn parse(text: &str) -> Result<Self, String> {
        let text = text.trim();
        if let Some(body) = text.strip_prefix('{') {
            let body = body
                .strip_suffix('}')
                .ok_or_else(|| "unterminated weighted set".to_string())?;
            let mut entries = BTreeMap::new();
            for entry in body.split(',') {
                let (name, degree) = entry
                    .split_once('=')
                    .ok_or_else(|| format!("weighted entry {entry:?} lacks '='"))?;
                validate_test_name(name).map_err(|e| e.to_string())?;
                let degree: f64 = degree
                    .parse()
                    .map_err(|_| format!("bad degree {degree:?}"))?;
                if !(degree.is_finite() && degree > 0.0) {
                    return Err(format!("degree must be positive, got {degree}"));
                }
                if entries.insert(name.to_string(), degree).is_some() {
                    return Err(format!("duplicate contributor {name}"));
                }
            }
            return Ok(Annotation::Weighted(entries));
        }
        let (abstracted, rest) = match text.strip_prefix('~') {
            Some(rest) => (true, rest),
            None => (false, text),
        };
        let (name, position) = rest
            .rsplit_once(':')
            .ok_or_else(|| format!("origin {rest:?} lacks ':'"))?;
        validate_test_name(name).map_err(|e| e.to_string())?;
        if position.is_empty() || !position.bytes().all(|b| b.is_ascii_digit()) {
            return Err(format!("bad position {position:?}"));
        }
        let position: usize = position
            .parse()
            .map_err(|_| format!("bad position {position:?}"))?;
        let origin = Origin::new(name, position);
        Ok(if abstracted {
            Annotation::Abstract(origin)
        } else {
            Annotation::Single(origin)
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub action: ActionText,
    pub annotation: Annotation,
}

impl Component {
    pub fn new(action: ActionText, annotation: Annotation) -> Self {
        Component { action, annotation }
    }

    pub fn bare(action: ActionText) -> Self {
        Component::new(action, Annotation::None)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Test {
    pub name: String,
    pub components: Vec<Component>,
}

impl Test {
    pub fn new(name: impl Into<String>, components: Vec<Component>) -> Self {
        Test {
            name: name.into(),
            components,
        }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn actions(&self) -> impl Iterator<Item = &ActionText> {
        self.components.iter().map(|c| &c.action)
    }

    /// Copy of this test with every annotation removed.
    pub fn stripped(&self) -> Test {
        Test::new(
            self.name.clone(),
            self.components
                .iter()
                .map(|c| Component::bare(c.action.clone()))
                .collect(),
        )
    }
}

/// Parse the text of a `.test` file.
pub fn parse_test(name: &str, text: &str) -> Result<Test, CorpusError> {
    let mut components = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |reason: String| CorpusError::Parse {
            test: name.to_string(),
            line: lineno + 1,
            reason,
        };
        let (head, annotation) = match line.split_once(ANNOTATION_SEPARATOR) {
            Some((head, ann)) => (head, Annotation::parse(ann).map_err(err)?),
            None => (line, Annotation::None),
        };
        let head = head.trim_end();
        let action = match head.find(STEP_MARKER) {
            Some(at) => {
                let index = head[at + STEP_MARKER.len()..].trim();
                let index: usize = index
                    .parse()
                    .map_err(|_| err(format!("bad step index {index:?}")))?;
                if index != components.len() {
                    return Err(err(format!(
                        "step index {index} does not match component index {}",
                        components.len()
                    )));
                }
                head[..at].trim_end()
            }
            None => head,
        };
        let action = ActionText::new(action.trim_start()).map_err(|e| err(e.to_string()))?;
        components.push(Component::new(action, annotation));
    }
    Ok(Test::new(name, components))
}

/// Render a test in the canonical line format.
pub fn serialize_test(t: &Test) -> String {
    let mut out = String::new();
    for (i, c) in t.components.iter().enumerate() {
        let line = match c.annotation.render() {
            Some(ann) => format!(
                "{:<aw$} {STEP_MARKER} {:<sw$}{ANNOTATION_SEPARATOR}{ann}",
                c.action.as_str(),
                i,
                aw = ACTION_COLUMN,
                sw = STEP_COLUMN
            ),
            None => format!(
                "{:<aw$} {STEP_MARKER} {}",
                c.action.as_str(),
                i,
                aw = ACTION_COLUMN
            ),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

/// Seed tests plus generated tests, with origin references verified.
#[derive(Clone, Debug, Default)]
pub struct Corpus {
    tests: BTreeMap<String, Test>,
    seed_names: BTreeSet<String>,
}

impl Corpus {
    /// Build a corpus and check that every reference resolves, that exact
    /// origins point at identical action text, and that the reference graph
    /// between tests is acyclic.
    pub fn from_tests(seeds: Vec<Test>, generated: Vec<Test>) -> Result<Self, CorpusError> {
        if seeds.is_empty() {
            return Err(CorpusError::NoSeeds);
        }
        let mut corpus = Corpus::default();
        for (is_seed, t) in seeds
            .into_iter()
            .map(|t| (true, t))
            .chain(generated.into_iter().map(|t| (false, t)))
        {
            validate_test_name(&t.name)?;
            if corpus.tests.contains_key(&t.name) {
                return Err(CorpusError::DuplicateTest(t.name));
            }
            if is_seed {
                corpus.seed_names.insert(t.name.clone());
            }
            corpus.tests.insert(t.name.clone(), t);
        }
        corpus.check_references()?;
        corpus.check_acyclic()?;
        Ok(corpus)
    }

    fn check_references(&self) -> Result<(), CorpusError> {
        for t in self.tests.values() {
            for (position, c) in t.components.iter().enumerate() {
                let dangling = |origin: String| CorpusError::Dangling {
                    test: t.name.clone(),
                    position,
                    origin,
                };
                match &c.annotation {
                    Annotation::None => {}
                    Annotation::Single(o) | Annotation::Abstract(o) => {
                        let target = self
                            .tests
                            .get(&o.test_name)
                            .and_then(|src| src.components.get(o.position))
                            .ok_or_else(|| dangling(o.to_string()))?;
                        if matches!(c.annotation, Annotation::Single(_))
                            && target.action != c.action
                        {
                            return Err(CorpusError::Mismatch {
                                test: t.name.clone(),
                                position,
                                origin: o.to_string(),
                                expected: c.action.to_string(),
                                found: target.action.to_string(),
                            });
                        }
                    }
                    Annotation::Weighted(entries) => {
                        for name in entries.keys() {
                            if !self.tests.contains_key(name) {
                                return Err(dangling(name.clone()));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), CorpusError> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Fresh,
            Active,
            Done,
        }
        let mut marks: BTreeMap<&str, Mark> = self
            .tests
            .keys()
            .map(|k| (k.as_str(), Mark::Fresh))
            .collect();
        let edges = |name: &str| -> BTreeSet<&str> {
            self.tests[name]
                .components
                .iter()
                .flat_map(|c| c.annotation.referenced_tests())
                .collect()
        };
        for root in self.tests.keys() {
            if marks[root.as_str()] != Mark::Fresh {
                continue;
            }
            // iterative DFS; the path stack doubles as the cycle witness
            let mut path: Vec<(&str, Vec<&str>)> = vec![(root, edges(root).into_iter().collect())];
            marks.insert(root, Mark::Active);
            while let Some((node, pending)) = path.last_mut() {
                match pending.pop() {
                    Some(next) => match marks[next] {
                        Mark::Done => {}
                        Mark::Active => {
                            let start = path.iter().position(|(n, _)| *n == next).unwrap_or(0);
                            let mut cycle: Vec<String> =
                                path[start..].iter().map(|(n, _)| n.to_string()).collect();
                            cycle.push(next.to_string());
                            return Err(CorpusError::Cycle(cycle));
                        }
                        Mark::Fresh => {
                            marks.insert(next, Mark::Active);
                            path.push((next, edges(next).into_iter().collect()));
                        }
                    },
                    None => {
                        marks.insert(node, Mark::Done);
                        path.pop();
                    }
                }
            }
        }
        Ok(())
    }

    pub fn tests(&self) -> impl Iterator<Item = &Test> {
        self.tests.values()
    }

    pub fn get(&self, name: &str) -> Option<&Test> {
        self.tests.get(name)
    }

    pub fn len(&self) -> usize {
        self.tests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tests.is_empty()
    }

    pub fn seed_names(&self) -> &BTreeSet<String> {
        &self.seed_names
    }

    pub fn is_seed(&self, name: &str) -> bool {
        self.seed_names.contains(name)
    }

    pub fn seeds(&self) -> impl Iterator<Item = &Test> {
        self.tests
            .values()
            .filter(|t| self.seed_names.contains(&t.name))
    }

    pub fn generated(&self) -> impl Iterator<Item = &Test> {
        self.tests
            .values()
            .filter(|t| !self.seed_names.contains(&t.name))
    }

    pub fn component(&self, origin: &Origin) -> Option<&Component> {
        self.tests
            .get(&origin.test_name)
            .and_then(|t| t.components.get(origin.position))
    }
}

/// Read every `.test` file directly under `dir`, in file-name order.
pub fn read_dir_tests(dir: &Path) -> Result<Vec<Test>, CorpusError> {
    let io = |e: std::io::Error| CorpusError::Io {
        path: dir.display().to_string(),
        message: e.to_string(),
    };
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(io)?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io)?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "test"))
        .collect();
    paths.sort();
    paths.into_iter().map(|p| read_test_file(&p)).collect()
}

/// Read one `.test` file; the test name is the file name.
pub fn read_test_file(path: &Path) -> Result<Test, CorpusError> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let text = fs::read_to_string(path).map_err(|e| CorpusError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_test(&name, &text)
}

/// Load every `.test` file under `seed_dir` (and optionally `generated_dir`).
pub fn load_corpus(seed_dir: &Path, generated_dir: Option<&Path>) -> Result<Corpus, CorpusError> {
    let seeds = read_dir_tests(seed_dir)?;
    let generated = match generated_dir {
        Some(dir) => read_dir_tests(dir)?,
        None => Vec::new(),
    };
    Corpus::from_tests(seeds, generated)
}

/// Follow exact origins from a component back to a seed. Seeds yield an
/// empty chain; otherwise the last origin names a seed test.
pub fn trace_to_seed(c: &Corpus, test_name: &str, step: usize) -> Result<Vec<Origin>, CorpusError> {
    let test = c
        .get(test_name)
        .ok_or_else(|| CorpusError::UnknownTest(test_name.to_string()))?;
    if step >= test.len() {
        return Err(CorpusError::StepOutOfRange {
            test: test_name.to_string(),
            step,
            len: test.len(),
        });
    }
    let mut chain = Vec::new();
    let mut here = Origin::new(test_name, step);
    // acyclicity bounds the walk by the number of tests
    for _ in 0..=c.len() {
        if c.is_seed(&here.test_name) {
            return Ok(chain);
        }
        let component = c.component(&here).ok_or_else(|| CorpusError::Dangling {
            test: here.test_name.clone(),
            position: here.position,
            origin: here.to_string(),
        })?;
        match &component.annotation {
            Annotation::None => {
                return Err(CorpusError::ProvenanceLost {
                    test: here.test_name.clone(),
                    position: here.position,
                })
            }
            Annotation::Weighted(entries) => {
                return Err(CorpusError::AmbiguousProvenance {
                    test: here.test_name.clone(),
                    position: here.position,
                    contributors: entries.keys().cloned().collect(),
                })
            }
            Annotation::Single(o) | Annotation::Abstract(o) => {
                chain.push(o.clone());
                here = o.clone();
            }
        }
    }
    Err(CorpusError::Cycle(
        chain.iter().map(|o| o.to_string()).collect(),
    ))
}
