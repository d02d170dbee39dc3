//! Tabulating which seeds, and which kinds of action, ended up in tests.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Annotation, Component, Corpus, Origin, Test};
use crate::sut::{Sut, SutError};

/// How deep a weighted annotation may be chased through generated tests.
const MAX_RESOLVE_DEPTH: usize = 64;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("dangling origin {0}")]
    Dangling(String),
    #[error("provenance lost at {0}")]
    ProvenanceLost(Origin),
    #[error("provenance chain deeper than {MAX_RESOLVE_DEPTH} at {0}")]
    TooDeep(String),
    #[error(transparent)]
    Sut(#[from] SutError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ContributionTable {
    pub by_seed: BTreeMap<String, f64>,
    pub by_kind: BTreeMap<String, f64>,
    pub total_annotated: u64,
    pub total_components: u64,
    pub run_length_histogram: BTreeMap<usize, u64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

/// Where a component's mass ends up.
enum Label {
    Unannotated,
    Point(Origin),
    Spread(BTreeMap<String, f64>),
}

struct Resolver<'a> {
    corpus: &'a Corpus,
    transitive: bool,
}

impl Resolver<'_> {
    fn component(&self, o: &Origin) -> Result<&Component, ReportError> {
        self.corpus
            .component(o)
            .ok_or_else(|| ReportError::Dangling(o.to_string()))
    }

    fn label(&self, c: &Component) -> Result<Label, ReportError> {
        match &c.annotation {
            Annotation::None => Ok(Label::Unannotated),
            Annotation::Single(o) | Annotation::Abstract(o) => {
                self.point(o.clone()).map(Label::Point)
            }
            Annotation::Weighted(degrees) => {
                let spread = self.spread(c, degrees, 0)?;
                Ok(if spread.is_empty() {
                    Label::Unannotated
                } else {
                    Label::Spread(spread)
                })
            }
        }
    }

    /// Follow an origin to a seed position when resolving transitively.
    fn point(&self, mut o: Origin) -> Result<Origin, ReportError> {
        self.component(&o)?;
        if !self.transitive {
            return Ok(o);
        }
        for _ in 0..MAX_RESOLVE_DEPTH {
            if self.corpus.is_seed(&o.test_name) {
                return Ok(o);
            }
            let next = self.component(&o)?.annotation.origin().cloned();
            match next {
                Some(n) => {
                    self.component(&n)?;
                    o = n;
                }
                None => return Err(ReportError::ProvenanceLost(o)),
            }
        }
        Err(ReportError::TooDeep(o.to_string()))
    }

    /// Degree-normalized masses per seed; contributors that cannot be
    /// resolved are dropped before normalizing.
    fn spread(
        &self,
        c: &Component,
        degrees: &BTreeMap<String, f64>,
        depth: usize,
    ) -> Result<BTreeMap<String, f64>, ReportError> {
        if depth > MAX_RESOLVE_DEPTH {
            return Err(ReportError::TooDeep(c.action.to_string()));
        }
        let mut parts: Vec<(f64, BTreeMap<String, f64>)> = Vec::new();
        for (name, degree) in degrees {
            let test = self
                .corpus
                .get(name)
                .ok_or_else(|| ReportError::Dangling(name.clone()))?;
            if !self.transitive || self.corpus.is_seed(name) {
                parts.push((*degree, BTreeMap::from([(name.clone(), 1.0)])));
                continue;
            }
            if let Some(dist) = self.resolve_in(test, c, depth)? {
                parts.push((*degree, dist));
            }
        }
        let total: f64 = parts.iter().map(|(d, _)| d).sum();
        let mut out = BTreeMap::new();
        if total <= 0.0 {
            return Ok(out);
        }
        for (degree, dist) in parts {
            for (seed, mass) in dist {
                *out.entry(seed).or_insert(0.0) += degree / total * mass;
            }
        }
        Ok(out)
    }

    /// Resolve the first component of generated test `t` with the same action.
    fn resolve_in(
        &self,
        t: &Test,
        c: &Component,
        depth: usize,
    ) -> Result<Option<BTreeMap<String, f64>>, ReportError> {
        let Some(found) = t.components.iter().find(|x| x.action == c.action) else {
            return Ok(None);
        };
        Ok(match &found.annotation {
            Annotation::None => None,
            Annotation::Single(o) | Annotation::Abstract(o) => match self.point(o.clone()) {
                Ok(seed) => Some(BTreeMap::from([(seed.test_name, 1.0)])),
                Err(ReportError::ProvenanceLost(_)) => None,
                Err(e) => return Err(e),
            },
            Annotation::Weighted(d) => {
                Some(self.spread(found, d, depth + 1)?).filter(|m| !m.is_empty())
            }
        })
    }
}

/// Tabulate the annotations of `tests`. Origins are looked up in `corpus`;
/// with `transitive` they are first followed back to seeds. `by_kind` is
/// filled only when a sut is given.
pub fn contribution_table(
    tests: &[Test],
    corpus: &Corpus,
    sut: Option<&dyn Sut>,
    transitive: bool,
) -> Result<ContributionTable, ReportError> {
    let resolver = Resolver { corpus, transitive };
    let mut table = ContributionTable::default();
    for t in tests {
        let mut run: Option<(usize, Origin)> = None;
        let close = |run: &mut Option<(usize, Origin)>, table: &mut ContributionTable| {
            if let Some((len, _)) = run.take() {
                *table.run_length_histogram.entry(len).or_insert(0) += 1;
            }
        };
        for c in &t.components {
            table.total_components += 1;
            let label = resolver.label(c)?;
            match label {
                Label::Unannotated => close(&mut run, &mut table),
                Label::Point(o) => {
                    table.total_annotated += 1;
                    *table.by_seed.entry(o.test_name.clone()).or_insert(0.0) += 1.0;
                    if let Some(sut) = sut {
                        let origin = resolver.component(&o)?;
                        let kind = sut.abstract_action(origin.action.as_str())?;
                        *table
                            .by_kind
                            .entry(kind.as_str().to_string())
                            .or_insert(0.0) += 1.0;
                    }
                    let extends = run.as_ref().is_some_and(|(_, prev)| {
                        prev.test_name == o.test_name && prev.position + 1 == o.position
                    });
                    if extends {
                        let (len, prev) = run.as_mut().expect("checked above");
                        *len += 1;
                        *prev = o;
                    } else {
                        close(&mut run, &mut table);
                        run = Some((1, o));
                    }
                }
                Label::Spread(masses) => {
                    close(&mut run, &mut table);
                    table.total_annotated += 1;
                    for (seed, mass) in masses {
                        *table.by_seed.entry(seed).or_insert(0.0) += mass;
                    }
                    if let Some(sut) = sut {
                        let kind = sut.abstract_action(c.action.as_str())?;
                        *table
                            .by_kind
                            .entry(kind.as_str().to_string())
                            .or_insert(0.0) += 1.0;
                    }
                    *table.run_length_histogram.entry(1).or_insert(0) += 1;
                }
            }
        }
        close(&mut run, &mut table);
    }
    Ok(table)
}

fn rank(counts: &BTreeMap<String, f64>) -> Vec<(String, f64)> {
    let mut out: Vec<(String, f64)> = counts.iter().map(|(k, v)| (k.clone(), *v)).collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Action kinds by descending count, ties in lexicographic order.
pub fn rank_kinds(table: &ContributionTable) -> Vec<(String, f64)> {
    rank(&table.by_kind)
}

/// Seeds by descending count, ties in lexicographic order.
pub fn rank_seeds(table: &ContributionTable) -> Vec<(String, f64)> {
    rank(&table.by_seed)
}

fn number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x:.4}")
    }
}

fn section(out: &mut String, header: (&str, &str), rows: Vec<(String, String)>) {
    let width = rows
        .iter()
        .map(|(k, _)| k.len())
        .chain([header.0.len()])
        .max()
        .unwrap_or(0);
    let _ = writeln!(out, "{:<width$}  {}", header.0, header.1);
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v:>w$}", w = header.1.len());
    }
}

pub fn render(table: &ContributionTable, format: Format) -> Result<String, ReportError> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(table)? + "\n"),
        Format::Text => {
            let mut out = String::new();
            let _ = writeln!(
                out,
                "annotated {} of {} components",
                table.total_annotated, table.total_components
            );
            let seeds = rank_seeds(table)
                .into_iter()
                .map(|(k, v)| (k, number(v)))
                .collect();
            section(&mut out, ("seed", "components"), seeds);
            let kinds = rank_kinds(table)
                .into_iter()
                .map(|(k, v)| (k, number(v)))
                .collect();
            section(&mut out, ("kind", "components"), kinds);
            let runs = table
                .run_length_histogram
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect();
            section(&mut out, ("run length", "runs"), runs);
            Ok(out)
        }
    }
}

pub fn parse_json(text: &str) -> Result<ContributionTable, ReportError> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_test;
    use crate::sut::{avl::AvlSut, seeds};
    use proptest::prelude::*;

    fn avl_corpus() -> Corpus {
        Corpus::from_tests(seeds::avl(), vec![]).unwrap()
    }

    fn fig1() -> Test {
        parse_test("fig1.test", include_str!("../fixtures/fig1.test")).unwrap()
    }

    #[test]
    fn figure_counts() {
        let table = contribution_table(&[fig1()], &avl_corpus(), None, false).unwrap();
        let expected: BTreeMap<String, f64> = [
            ("quick0.test", 2.0),
            ("quick1.test", 2.0),
            ("quick2.test", 1.0),
            ("quick3.test", 5.0),
            ("quick5.test", 3.0),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        assert_eq!(table.by_seed, expected);
        assert_eq!((table.total_annotated, table.total_components), (13, 13));
        let text = render(&table, Format::Text).unwrap();
        let rows: Vec<&str> = text
            .lines()
            .skip(2)
            .take(5)
            .map(|l| l.split_whitespace().next().unwrap())
            .collect();
        assert_eq!(
            rows,
            [
                "quick3.test",
                "quick5.test",
                "quick0.test",
                "quick1.test",
                "quick2.test"
            ]
        );
    }

    #[test]
    fn figure_histogram_matches_hand_count() {
        let table = contribution_table(&[fig1()], &avl_corpus(), None, false).unwrap();
        // 0-1 quick1 (separate positions), 2 quick2, 3 quick5, 4-5 quick0,
        // 6-10 quick3, 11-12 quick5
        let mass: u64 = table
            .run_length_histogram
            .iter()
            .map(|(l, n)| *l as u64 * n)
            .sum();
        assert_eq!(mass, 13);
        assert_eq!(table.run_length_histogram.get(&5), Some(&1));
    }

    #[test]
    fn by_kind_uses_origin_action() {
        let sut: &dyn Sut = AvlSut::get();
        let table = contribution_table(&[fig1()], &avl_corpus(), Some(sut), false).unwrap();
        let total: f64 = table.by_kind.values().sum();
        assert_eq!(total, 13.0);
        let ranked = rank_kinds(&table);
        for w in ranked.windows(2) {
            assert!(w[0].1 > w[1].1 || (w[0].1 == w[1].1 && w[0].0 < w[1].0));
        }
    }

    #[test]
    fn empty_inputs() {
        let table = contribution_table(&[], &avl_corpus(), None, true).unwrap();
        assert_eq!(table, ContributionTable::default());
        assert!(rank_kinds(&table).is_empty());
        let text = render(&table, Format::Text).unwrap();
        assert_eq!(
            text,
            "annotated 0 of 0 components\nseed  components\nkind  components\nrun length  runs\n"
        );
    }

    #[test]
    fn ties_rank_lexicographically() {
        let table = ContributionTable {
            by_kind: [("b", 2.0), ("a", 2.0), ("c", 3.0)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            ..Default::default()
        };
        let names: Vec<String> = rank_kinds(&table).into_iter().map(|(k, _)| k).collect();
        assert_eq!(names, ["c", "a", "b"]);
    }

    #[test]
    fn weighted_component_is_split_by_degree() {
        let a = parse_test("a.test", "int0 = 1\n").unwrap();
        let b = parse_test("b.test", "int0 = 1\n").unwrap();
        let corpus = Corpus::from_tests(vec![a, b], vec![]).unwrap();
        let t = parse_test("g.test", "int0 = 1 ;;; {a.test=1,b.test=3}\n").unwrap();
        let table = contribution_table(&[t], &corpus, None, false).unwrap();
        assert_eq!(table.by_seed["a.test"], 0.25);
        assert_eq!(table.by_seed["b.test"], 0.75);
        assert_eq!(table.total_annotated, 1);
    }

    #[test]
    fn transitive_weighted_resolution() {
        let a = parse_test("a.test", "int0 = 1\n").unwrap();
        let b = parse_test("b.test", "int0 = 1\n").unwrap();
        let g1 = parse_test("gen000001.test", "int0 = 1 ;;; {a.test=1}\n").unwrap();
        let g2 = parse_test("gen000002.test", "int0 = 1\n").unwrap();
        let corpus = Corpus::from_tests(vec![a, b], vec![g1, g2]).unwrap();
        let t = parse_test(
            "gen000003.test",
            "int0 = 1 ;;; {gen000001.test=2,b.test=2}\nint0 = 1 ;;; {gen000002.test=1}\n",
        )
        .unwrap();
        let table = contribution_table(&[t], &corpus, None, true).unwrap();
        assert_eq!(table.by_seed["a.test"], 0.5);
        assert_eq!(table.by_seed["b.test"], 0.5);
        // the second component's only contributor has no provenance
        assert_eq!((table.total_annotated, table.total_components), (1, 2));
    }

    #[test]
    fn transitive_single_chain_and_errors() {
        let s = parse_test("s.test", "int0 = 1\nint1 = 2\n").unwrap();
        let g1 = parse_test(
            "gen000001.test",
            "int0 = 1 ;;; s.test:0\nint1 = 2 ;;; s.test:1\n",
        )
        .unwrap();
        let g2 = parse_test(
            "gen000002.test",
            "int0 = 1 ;;; gen000001.test:0\nint1 = 2\n",
        )
        .unwrap();
        let corpus = Corpus::from_tests(vec![s], vec![g1.clone(), g2]).unwrap();
        let table = contribution_table(&[g1], &corpus, None, true).unwrap();
        assert_eq!(table.by_seed["s.test"], 2.0);
        assert_eq!(table.run_length_histogram, BTreeMap::from([(2, 1)]));

        let t = parse_test("x.test", "int1 = 2 ;;; gen000002.test:1\n").unwrap();
        assert!(matches!(
            contribution_table(std::slice::from_ref(&t), &corpus, None, true),
            Err(ReportError::ProvenanceLost(_))
        ));
        // without resolution the same annotation is simply counted
        assert!(contribution_table(&[t], &corpus, None, false).is_ok());

        let dangling = parse_test("y.test", "int0 = 1 ;;; s.test:9\n").unwrap();
        assert!(matches!(
            contribution_table(&[dangling], &corpus, None, false),
            Err(ReportError::Dangling(_))
        ));
    }

    fn table_strategy() -> impl Strategy<Value = ContributionTable> {
        let counts = prop::collection::btree_map("[a-z]{1,6}(\\.test)?", 0.0f64..1e6, 0..6);
        (
            counts.clone(),
            counts,
            any::<u32>(),
            any::<u32>(),
            prop::collection::btree_map(1usize..60, any::<u32>(), 0..6),
        )
            .prop_map(|(by_seed, by_kind, a, b, hist)| ContributionTable {
                by_seed,
                by_kind,
                total_annotated: a as u64,
                total_components: b as u64,
                run_length_histogram: hist.into_iter().map(|(k, v)| (k, v as u64)).collect(),
            })
    }

    proptest! {
        #[test]
        fn json_round_trips(table in table_strategy()) {
            let text = render(&table, Format::Json).unwrap();
            prop_assert_eq!(parse_json(&text).unwrap(), table);
        }
    }
}
