//! Test reduction and normalization.
//!
//! Reduction only deletes components, so whatever survives keeps its
//! annotation. Normalization rewrites components in place; any component
//! whose text changes loses its annotation, because the new text came from a
//! search rather than from a seed.

use std::collections::{BTreeMap, HashMap};

use regex::Regex;
use thiserror::Error;

use crate::corpus::{ActionText, Annotation, Component, Test};
use crate::sut::{self, Coverage, RunOptions, Sut, SutError};

#[derive(Debug, Error, PartialEq)]
pub enum PostprocessError {
    #[error("predicate does not hold on original")]
    PredicateFails,
    #[error(transparent)]
    Sut(#[from] SutError),
}

/// What a reduced or normalized test must keep. Checked by strict replay, so
/// a test with a disabled step never satisfies any predicate.
#[derive(Clone, Debug, PartialEq)]
pub enum Predicate {
    PreservesFailure,
    PreservesCoverage(Coverage),
    PreservesCoverageCount(usize),
}

/// A predicate bound to a SUT and its fault-injection setting.
pub struct Checker<'a> {
    pub sut: &'a dyn Sut,
    pub predicate: Predicate,
    pub fault_injection: bool,
    evaluations: usize,
}

impl<'a> Checker<'a> {
    pub fn new(sut: &'a dyn Sut, predicate: Predicate, fault_injection: bool) -> Self {
        Checker {
            sut,
            predicate,
            fault_injection,
            evaluations: 0,
        }
    }

    pub fn evaluations(&self) -> usize {
        self.evaluations
    }

    pub fn holds_on(&mut self, components: &[Component]) -> Result<bool, SutError> {
        self.evaluations += 1;
        let t = Test::new("check.test", components.to_vec());
        let r = match sut::run(self.sut, &t, RunOptions::strict(self.fault_injection)) {
            Ok(r) => r,
            Err(SutError::Infeasible { .. }) => return Ok(false),
            Err(e) => return Err(e),
        };
        Ok(match &self.predicate {
            Predicate::PreservesFailure => r.failure.is_some(),
            Predicate::PreservesCoverage(target) => target.is_subset(&r.coverage),
            Predicate::PreservesCoverageCount(min) => r.coverage.len() >= *min,
        })
    }

    pub fn holds(&mut self, t: &Test) -> Result<bool, SutError> {
        self.holds_on(&t.components)
    }
}

fn select(t: &Test, keep: &[usize]) -> Vec<Component> {
    keep.iter().map(|&i| t.components[i].clone()).collect()
}

/// Split `items` into `n` nearly equal contiguous chunks.
fn chunks(items: &[usize], n: usize) -> Vec<Vec<usize>> {
    let len = items.len();
    (0..n)
        .map(|i| items[i * len / n..(i + 1) * len / n].to_vec())
        .filter(|c| !c.is_empty())
        .collect()
}

/// Delta debugging over the indices `0..len`, complements tried before
/// subsets and the earliest chunk winning ties. `holds` must accept the full
/// index set. The result is 1-minimal with respect to `holds`.
pub fn ddmin<E>(
    len: usize,
    mut holds: impl FnMut(&[usize]) -> Result<bool, E>,
) -> Result<Vec<usize>, E> {
    let mut cache: HashMap<Vec<usize>, bool> = HashMap::new();
    let mut test = |keep: &[usize]| -> Result<bool, E> {
        if let Some(v) = cache.get(keep) {
            return Ok(*v);
        }
        let v = holds(keep)?;
        cache.insert(keep.to_vec(), v);
        Ok(v)
    };
    if test(&[])? {
        return Ok(vec![]);
    }
    let mut current: Vec<usize> = (0..len).collect();
    let mut n = 2;
    while current.len() >= 2 {
        let parts = chunks(&current, n);
        let mut progressed = false;
        for i in 0..parts.len() {
            let complement: Vec<usize> = parts
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .flat_map(|(_, c)| c.iter().copied())
                .collect();
            if test(&complement)? {
                current = complement;
                n = (n - 1).max(2);
                progressed = true;
                break;
            }
        }
        if !progressed {
            for part in &parts {
                if test(part)? {
                    current = part.clone();
                    n = 2;
                    progressed = true;
                    break;
                }
            }
        }
        if !progressed {
            if n >= current.len() {
                break;
            }
            n = (2 * n).min(current.len());
        }
    }
    Ok(current)
}

/// Reduce `t` while the checker's predicate holds. Retained components keep
/// their annotations.
pub fn ddmin_reduce(t: &Test, checker: &mut Checker) -> Result<Test, PostprocessError> {
    if !checker.holds(t)? {
        return Err(PostprocessError::PredicateFails);
    }
    let keep = ddmin(t.len(), |keep| checker.holds_on(&select(t, keep)))?;
    Ok(Test::new(t.name.clone(), select(t, &keep)))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub test: Test,
    /// Rewrites that were tried and kept.
    pub accepted_rewrites: usize,
    /// Upper bound on accepted rewrites implied by the rewrite order.
    pub rewrite_bound: usize,
}

fn variable_pattern(sut: &dyn Sut) -> Regex {
    let families: Vec<&str> = sut.variable_families().iter().map(|(f, _)| *f).collect();
    Regex::new(&format!(r"\b({})(\d+)\b", families.join("|"))).expect("valid pattern")
}

/// Rename variables of each family to `0, 1, ...` in order of first use.
fn canonical_renaming(t: &[Component], pattern: &Regex) -> Option<Vec<ActionText>> {
    let mut mapping: BTreeMap<(String, usize), usize> = BTreeMap::new();
    let mut next: BTreeMap<String, usize> = BTreeMap::new();
    for c in t {
        for cap in pattern.captures_iter(c.action.as_str()) {
            let family = cap[1].to_string();
            let index: usize = cap[2].parse().expect("digits");
            mapping.entry((family.clone(), index)).or_insert_with(|| {
                let slot = next.entry(family).or_insert(0);
                *slot += 1;
                *slot - 1
            });
        }
    }
    if mapping.iter().all(|((_, old), new)| old == new) {
        return None;
    }
    let renamed = t
        .iter()
        .map(|c| {
            let text = pattern.replace_all(c.action.as_str(), |cap: &regex::Captures| {
                let index: usize = cap[2].parse().expect("digits");
                format!("{}{}", &cap[1], mapping[&(cap[1].to_string(), index)])
            });
            ActionText::new(text.into_owned()).expect("renaming keeps actions valid")
        })
        .collect();
    Some(renamed)
}

fn with_actions(t: &[Component], actions: Vec<ActionText>) -> Vec<Component> {
    t.iter()
        .zip(actions)
        .map(|(c, a)| Component::new(a, c.annotation.clone()))
        .collect()
}

/// Rewrite `t` to a fixpoint of two predicate-preserving rules: canonical
/// variable renumbering by first use, then lowering each assigned constant
/// to the least value that keeps the predicate.
pub fn normalize(t: &Test, checker: &mut Checker) -> Result<Normalized, PostprocessError> {
    if !checker.holds(t)? {
        return Err(PostprocessError::PredicateFails);
    }
    let sut = checker.sut;
    let pattern = variable_pattern(sut);
    let constant_sum: usize = t
        .actions()
        .filter_map(|a| sut.assigned_constant(a))
        .map(|c| c as usize)
        .sum();
    // renaming fires at most once (its result is canonical and lowering
    // never touches names); every accepted lowering reduces the constant sum
    let rewrite_bound = 1 + constant_sum;

    let mut current = t.components.clone();
    let mut accepted = 0;
    loop {
        let mut changed = false;
        if let Some(renamed) = canonical_renaming(&current, &pattern) {
            let candidate = with_actions(&current, renamed);
            if checker.holds_on(&candidate)? {
                current = candidate;
                accepted += 1;
                changed = true;
            }
        }
        for i in 0..current.len() {
            let Some(value) = sut.assigned_constant(&current[i].action) else {
                continue;
            };
            for lower in 0..value {
                let Some(action) = sut.with_constant(&current[i].action, lower) else {
                    continue;
                };
                let mut candidate = current.clone();
                candidate[i].action = action;
                if checker.holds_on(&candidate)? {
                    current = candidate;
                    accepted += 1;
                    changed = true;
                    break;
                }
            }
        }
        if !changed {
            break;
        }
        assert!(accepted <= rewrite_bound, "rewrite order violated");
    }

    let components = t
        .components
        .iter()
        .zip(current)
        .map(|(orig, now)| {
            if orig.action == now.action {
                orig.clone()
            } else {
                Component::new(now.action, Annotation::None)
            }
        })
        .collect();
    Ok(Normalized {
        test: Test::new(t.name.clone(), components),
        accepted_rewrites: accepted,
        rewrite_bound,
    })
}
