//! System-under-test contract plus the two bundled systems.
//!
//! Every SUT has a finite, grid-generated action vocabulary. Tests are plain
//! text, and each action is looked up in the vocabulary before it runs, so an
//! action outside the grammar is an error rather than a silent no-op.

pub mod avl;
pub mod fs;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{parse_test, ActionText, Test};

#[derive(Debug, Error, PartialEq)]
pub enum SutError {
    #[error("unknown sut {0:?} (expected avl or fs)")]
    UnknownSut(String),
    #[error("{sut}: unknown action {action:?}")]
    UnknownAction { sut: &'static str, action: String },
    #[error("contract violation: {action:?} executed while disabled")]
    Disabled { action: String },
    #[error("infeasible test: step {step} ({action}) is not enabled")]
    Infeasible { step: usize, action: String },
}

/// Stable identifier of an instrumented site, `stmt:<site>` or `branch:<site>`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoveragePoint(String);

impl CoveragePoint {
    pub fn new(id: impl Into<String>) -> Self {
        CoveragePoint(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_branch(&self) -> bool {
        self.0.starts_with("branch:")
    }

    pub fn is_stmt(&self) -> bool {
        self.0.starts_with("stmt:")
    }
}

impl fmt::Display for CoveragePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub type Coverage = BTreeSet<CoveragePoint>;

pub fn branch_count(cov: &Coverage) -> usize {
    cov.iter().filter(|p| p.is_branch()).count()
}

pub fn stmt_count(cov: &Coverage) -> usize {
    cov.iter().filter(|p| p.is_stmt()).count()
}

/// An action with identifiers and literals masked, e.g. `avl?.insert(int?)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionKind(String);

impl ActionKind {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Result of executing one enabled action.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepOutcome {
    pub touched: Coverage,
    pub failure: Option<String>,
}

pub trait SutState {
    fn enabled(&self, a: &ActionText) -> Result<bool, SutError>;
    fn execute(&mut self, a: &ActionText) -> Result<StepOutcome, SutError>;
    fn reset(&mut self);
}

pub trait Sut: Send + Sync {
    fn id(&self) -> &'static str;
    /// Full action vocabulary, enabled or not, in a fixed order.
    fn list_actions(&self) -> &[ActionText];
    /// Universe of coverage points, sorted.
    fn coverage_points(&self) -> &[CoveragePoint];
    fn new_state(&self, fault_injection: bool) -> Box<dyn SutState + '_>;
    /// Variable families and how many variables each has, e.g. `("int", 3)`.
    fn variable_families(&self) -> &'static [(&'static str, usize)];
    /// Largest integer constant an assignment can take, if the SUT has any.
    fn max_constant(&self) -> Option<u32>;
    /// The constant of an assignment action such as `int1 = 13`.
    fn assigned_constant(&self, a: &ActionText) -> Option<u32>;
    fn with_constant(&self, a: &ActionText, value: u32) -> Option<ActionText>;
    fn kinds(&self) -> &BTreeSet<ActionKind>;

    fn abstract_action(&self, a: &str) -> Result<ActionKind, SutError> {
        let kind = ActionKind(mask_action(a));
        if self.kinds().contains(&kind) {
            Ok(kind)
        } else {
            Err(SutError::UnknownAction {
                sut: self.id(),
                action: a.to_string(),
            })
        }
    }
}

/// Replace string literals, numbered variables and integer literals by `?`.
pub fn mask_action(a: &str) -> String {
    use std::sync::OnceLock;
    static PATTERNS: OnceLock<(Regex, Regex, Regex)> = OnceLock::new();
    let (strings, vars, ints) = PATTERNS.get_or_init(|| {
        (
            Regex::new(r#""[^"]*""#).unwrap(),
            Regex::new(r"\b([a-z]+)(?:\d+|\?)").unwrap(),
            Regex::new(r"\b\d+\b").unwrap(),
        )
    });
    let a = strings.replace_all(a, "?");
    let a = vars.replace_all(&a, "$1?");
    ints.replace_all(&a, "?").into_owned()
}

/// Vocabulary lookup table shared by the bundled SUTs.
pub(crate) struct Grammar<A> {
    pub actions: Vec<ActionText>,
    pub index: HashMap<String, A>,
    pub kinds: BTreeSet<ActionKind>,
}

impl<A: Clone> Grammar<A> {
    pub fn new(entries: Vec<(String, A)>) -> Self {
        let mut actions = Vec::with_capacity(entries.len());
        let mut index = HashMap::with_capacity(entries.len());
        let mut kinds = BTreeSet::new();
        for (text, action) in entries {
            kinds.insert(ActionKind(mask_action(&text)));
            actions.push(ActionText::new(text.clone()).expect("grammar produced invalid action"));
            index.insert(text, action);
        }
        Grammar {
            actions,
            index,
            kinds,
        }
    }

    pub fn lookup(&self, sut: &'static str, a: &ActionText) -> Result<&A, SutError> {
        self.index
            .get(a.as_str())
            .ok_or_else(|| SutError::UnknownAction {
                sut,
                action: a.to_string(),
            })
    }
}

/// Collects instrumentation hits for a single step.
#[derive(Default)]
pub(crate) struct Hits(BTreeSet<&'static str>);

impl Hits {
    pub fn hit(&mut self, point: &'static str) {
        self.0.insert(point);
    }

    pub fn into_coverage(self) -> Coverage {
        self.0.into_iter().map(CoveragePoint::new).collect()
    }
}

pub fn lookup(sut_id: &str) -> Result<&'static dyn Sut, SutError> {
    match sut_id {
        "avl" => Ok(avl::AvlSut::get()),
        "fs" => Ok(fs::FsSut::get()),
        other => Err(SutError::UnknownSut(other.to_string())),
    }
}

pub fn registered() -> [&'static str; 2] {
    ["avl", "fs"]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub skip_disabled: bool,
    pub fault_injection: bool,
}

impl RunOptions {
    pub fn strict(fault_injection: bool) -> Self {
        RunOptions {
            skip_disabled: false,
            fault_injection,
        }
    }

    pub fn best_effort(fault_injection: bool) -> Self {
        RunOptions {
            skip_disabled: true,
            fault_injection,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutedStep {
    pub index: usize,
    pub action: ActionText,
    pub skipped: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub step: usize,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub executed: Vec<ExecutedStep>,
    pub coverage: Coverage,
    pub failure: Option<Failure>,
}

/// Execute a test on a fresh state. A failure halts execution at that step.
pub fn run(sut: &dyn Sut, t: &Test, opts: RunOptions) -> Result<ExecutionResult, SutError> {
    let mut state = sut.new_state(opts.fault_injection);
    let mut result = ExecutionResult::default();
    for (index, c) in t.components.iter().enumerate() {
        if !state.enabled(&c.action)? {
            if !opts.skip_disabled {
                return Err(SutError::Infeasible {
                    step: index,
                    action: c.action.to_string(),
                });
            }
            result.executed.push(ExecutedStep {
                index,
                action: c.action.clone(),
                skipped: true,
            });
            continue;
        }
        let outcome = state.execute(&c.action)?;
        result.executed.push(ExecutedStep {
            index,
            action: c.action.clone(),
            skipped: false,
        });
        result.coverage.extend(outcome.touched);
        if let Some(message) = outcome.failure {
            result.failure = Some(Failure {
                step: index,
                message,
            });
            break;
        }
    }
    Ok(result)
}

pub fn run_test(sut_id: &str, t: &Test, opts: RunOptions) -> Result<ExecutionResult, SutError> {
    run(lookup(sut_id)?, t, opts)
}

pub fn abstract_action(sut_id: &str, a: &str) -> Result<ActionKind, SutError> {
    lookup(sut_id)?.abstract_action(a)
}

/// Bundled seed corpora, embedded at compile time.
pub mod seeds {
    use super::*;

    macro_rules! fixture {
        ($dir:literal, $name:literal) => {
            (
                $name,
                include_str!(concat!("../../fixtures/", $dir, "/", $name)),
            )
        };
    }

    const AVL: &[(&str, &str)] = &[
        fixture!("avl-seeds", "quick0.test"),
        fixture!("avl-seeds", "quick1.test"),
        fixture!("avl-seeds", "quick2.test"),
        fixture!("avl-seeds", "quick3.test"),
        fixture!("avl-seeds", "quick4.test"),
        fixture!("avl-seeds", "quick5.test"),
    ];

    include!("fs_seed_list.rs");

    fn parse_all(files: &[(&str, &str)]) -> Vec<Test> {
        files
            .iter()
            .map(|(name, text)| parse_test(name, text).expect("bundled fixture parses"))
            .collect()
    }

    /// The six AVL quick tests.
    pub fn avl() -> Vec<Test> {
        parse_all(AVL)
    }

    /// The fifty file-system seeds.
    pub fn fs() -> Vec<Test> {
        parse_all(FS)
    }

    pub fn for_sut(sut_id: &str) -> Result<Vec<Test>, SutError> {
        match sut_id {
            "avl" => Ok(avl()),
            "fs" => Ok(fs()),
            other => Err(SutError::UnknownSut(other.to_string())),
        }
    }
}
