//! Pseudo-provenance: a plausible account of how a test could have been
//! assembled from seed fragments, for tests whose real provenance was lost.
//!
//! The greedy pass walks the test once, keeping the set of seed positions
//! that continue the current run. When no position continues it, the run is
//! closed and labelled backwards with the least surviving source, and a new
//! run starts from every position compatible with the current component.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::corpus::{Annotation, Component, Corpus, Origin, Test};
use crate::sut::Sut;

/// Longest test the segmentation oracle accepts.
pub const ORACLE_MAX_LEN: usize = 20;

#[derive(Debug, Error, PartialEq)]
pub enum PseudoError {
    #[error("abstract matching needs a sut")]
    MissingSut,
    #[error("runs undefined for weighted provenance (component {0})")]
    WeightedRuns(usize),
    #[error("oracle limited to tests of length <= {ORACLE_MAX_LEN}, got {0}")]
    TooLong(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchMode {
    Exact,
    /// Compare action kinds instead of action text.
    Abstract,
}

/// A span `start..=end` of a test mapped onto a span of one source test.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProvenanceRun {
    pub start: usize,
    pub end: usize,
    pub source: String,
    pub source_start: usize,
    pub mode: MatchMode,
}

impl ProvenanceRun {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Index from match key to every source position carrying it.
pub struct Aligner<'a> {
    mode: MatchMode,
    sut: Option<&'a dyn Sut>,
    index: HashMap<String, Vec<Origin>>,
    sources: BTreeSet<String>,
}

impl<'a> Aligner<'a> {
    /// Align against the seeds of `corpus`, plus its generated tests when
    /// `include_generated` is set. `exclude` drops one test (normally the
    /// target itself) from the sources.
    pub fn new(
        corpus: &Corpus,
        mode: MatchMode,
        sut: Option<&'a dyn Sut>,
        include_generated: bool,
        exclude: Option<&str>,
    ) -> Result<Self, PseudoError> {
        if mode == MatchMode::Abstract && sut.is_none() {
            return Err(PseudoError::MissingSut);
        }
        let mut aligner = Aligner {
            mode,
            sut,
            index: HashMap::new(),
            sources: BTreeSet::new(),
        };
        let tests = corpus
            .tests()
            .filter(|t| include_generated || corpus.is_seed(&t.name))
            .filter(|t| Some(t.name.as_str()) != exclude);
        for t in tests {
            aligner.sources.insert(t.name.clone());
            for (i, c) in t.components.iter().enumerate() {
                if let Some(key) = aligner.key(c) {
                    aligner
                        .index
                        .entry(key)
                        .or_default()
                        .push(Origin::new(t.name.clone(), i));
                }
            }
        }
        // corpus iteration is name-ordered, so each list is already sorted
        Ok(aligner)
    }

    pub fn mode(&self) -> MatchMode {
        self.mode
    }

    pub fn sources(&self) -> &BTreeSet<String> {
        &self.sources
    }

    fn key(&self, c: &Component) -> Option<String> {
        match self.mode {
            MatchMode::Exact => Some(c.action.as_str().to_string()),
            MatchMode::Abstract => self
                .sut
                .and_then(|s| s.abstract_action(c.action.as_str()).ok())
                .map(|k| k.as_str().to_string()),
        }
    }

    /// Source positions compatible with `c`, sorted. A component that
    /// already carries an origin is compatible only with that origin.
    pub fn compatible_positions(&self, c: &Component) -> Vec<Origin> {
        if let Some(o) = c.annotation.origin() {
            return vec![o.clone()];
        }
        self.unannotated_positions(c)
    }

    fn unannotated_positions(&self, c: &Component) -> Vec<Origin> {
        self.key(c)
            .and_then(|k| self.index.get(&k))
            .cloned()
            .unwrap_or_default()
    }

    fn annotation(&self, o: Origin) -> Annotation {
        match self.mode {
            MatchMode::Exact => Annotation::Single(o),
            MatchMode::Abstract => Annotation::Abstract(o),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PseudoProvenance {
    pub test: Test,
    /// Runs created by the reconstruction, in test order.
    pub runs: Vec<ProvenanceRun>,
}

struct OpenRun {
    start: usize,
    live: BTreeSet<Origin>,
}

/// Greedy reconstruction. Components that already have an annotation keep
/// it and act as run boundaries; components with no compatible position stay
/// unannotated.
pub fn greedy_pseudo_provenance(t: &Test, aligner: &Aligner) -> PseudoProvenance {
    let mut out = t.clone();
    let mut runs = Vec::new();
    let mut open: Option<OpenRun> = None;

    let mut close = |open: &mut Option<OpenRun>, end: usize, out: &mut Test| {
        let Some(run) = open.take() else {
            return;
        };
        let len = end + 1 - run.start;
        // every survivor supports a run of exactly this length
        debug_assert!(run.live.iter().all(|o| o.position + 1 >= len));
        let chosen = run.live.first().expect("open runs are never empty").clone();
        let source_start = chosen.position + 1 - len;
        for (step, pos) in (run.start..=end)
            .rev()
            .zip((source_start..=chosen.position).rev())
        {
            out.components[step].annotation =
                aligner.annotation(Origin::new(chosen.test_name.clone(), pos));
        }
        runs.push(ProvenanceRun {
            start: run.start,
            end,
            source: chosen.test_name,
            source_start,
            mode: aligner.mode,
        });
    };

    for (i, c) in t.components.iter().enumerate() {
        if !c.annotation.is_none() {
            if i > 0 {
                close(&mut open, i - 1, &mut out);
            }
            continue;
        }
        let compatible = aligner.unannotated_positions(c);
        if compatible.is_empty() {
            if i > 0 {
                close(&mut open, i - 1, &mut out);
            }
            continue;
        }
        if let Some(run) = open.as_mut() {
            let extended: BTreeSet<Origin> = compatible
                .iter()
                .filter(|o| {
                    o.position > 0
                        && run
                            .live
                            .contains(&Origin::new(o.test_name.clone(), o.position - 1))
                })
                .cloned()
                .collect();
            if !extended.is_empty() {
                run.live = extended;
                continue;
            }
            close(&mut open, i - 1, &mut out);
        }
        open = Some(OpenRun {
            start: i,
            live: compatible.into_iter().collect(),
        });
    }
    if !t.is_empty() {
        close(&mut open, t.len() - 1, &mut out);
    }
    PseudoProvenance { test: out, runs }
}

/// Maximal spans of consecutive positions in one source, in test order.
pub fn runs_of(t: &Test) -> Result<Vec<ProvenanceRun>, PseudoError> {
    let mut runs: Vec<ProvenanceRun> = Vec::new();
    let mut prev: Option<(usize, &Origin, MatchMode)> = None;
    for (i, c) in t.components.iter().enumerate() {
        let (origin, mode) = match &c.annotation {
            Annotation::None => {
                prev = None;
                continue;
            }
            Annotation::Weighted(_) => return Err(PseudoError::WeightedRuns(i)),
            Annotation::Single(o) => (o, MatchMode::Exact),
            Annotation::Abstract(o) => (o, MatchMode::Abstract),
        };
        let continues = prev.is_some_and(|(j, p, m)| {
            j + 1 == i
                && m == mode
                && p.test_name == origin.test_name
                && p.position + 1 == origin.position
        });
        if continues {
            runs.last_mut().expect("continuing a run").end = i;
        } else {
            runs.push(ProvenanceRun {
                start: i,
                end: i,
                source: origin.test_name.clone(),
                source_start: origin.position,
                mode,
            });
        }
        prev = Some((i, origin, mode));
    }
    Ok(runs)
}

/// Minimum number of runs needed to label every matchable, unannotated
/// component, by dynamic programming over (position, origin). Pre-annotated
/// and unmatchable components separate runs and cost nothing, exactly as in
/// the greedy pass.
pub fn oracle_min_segmentation(t: &Test, aligner: &Aligner) -> Result<usize, PseudoError> {
    if t.len() > ORACLE_MAX_LEN {
        return Err(PseudoError::TooLong(t.len()));
    }
    let mut total = 0usize;
    let mut prev: HashMap<Origin, usize> = HashMap::new();
    for c in &t.components {
        let compatible = if c.annotation.is_none() {
            aligner.unannotated_positions(c)
        } else {
            Vec::new()
        };
        let mut here = HashMap::new();
        for o in compatible {
            let fresh = total + 1;
            let extend = (o.position > 0)
                .then(|| prev.get(&Origin::new(o.test_name.clone(), o.position - 1)))
                .flatten()
                .copied();
            here.insert(o, extend.map_or(fresh, |e| e.min(fresh)));
        }
        if let Some(best) = here.values().min() {
            total = *best;
        }
        prev = here;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_test, ActionText};
    use crate::sut::{avl::AvlSut, seeds};

    fn avl_corpus() -> Corpus {
        Corpus::from_tests(seeds::avl(), vec![]).unwrap()
    }

    fn fig1() -> Test {
        parse_test("fig1.test", include_str!("../fixtures/fig1.test")).unwrap()
    }

    #[test]
    fn constructor_positions_match_a_scan() {
        let corpus = avl_corpus();
        let aligner = Aligner::new(&corpus, MatchMode::Exact, None, false, None).unwrap();
        let c = Component::bare(ActionText::new("avl0 = avl.AVLTree()").unwrap());
        let expected: Vec<Origin> = corpus
            .seeds()
            .flat_map(|t| {
                t.components
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| x.action == c.action)
                    .map(|(i, _)| Origin::new(t.name.clone(), i))
                    .collect::<Vec<_>>()
            })
            .collect();
        assert!(!expected.is_empty());
        assert_eq!(aligner.compatible_positions(&c), expected);

        let absent = Component::bare(ActionText::new("int2 = 18").unwrap());
        assert!(aligner.compatible_positions(&absent).is_empty());

        let pinned = Component::new(
            ActionText::new("avl0 = avl.AVLTree()").unwrap(),
            Annotation::Single(Origin::new("quick3.test", 4)),
        );
        assert_eq!(
            aligner.compatible_positions(&pinned),
            vec![Origin::new("quick3.test", 4)]
        );
    }

    #[test]
    fn self_alignment_is_one_run() {
        let corpus = avl_corpus();
        let aligner = Aligner::new(&corpus, MatchMode::Exact, None, false, None).unwrap();
        let q3 = corpus.get("quick3.test").unwrap().stripped();
        let p = greedy_pseudo_provenance(&q3, &aligner);
        assert_eq!(
            p.runs,
            vec![ProvenanceRun {
                start: 0,
                end: q3.len() - 1,
                source: "quick3.test".into(),
                source_start: 0,
                mode: MatchMode::Exact,
            }]
        );
        assert_eq!(
            oracle_min_segmentation(&q3.components[..20].to_vec().into_test(), &aligner).unwrap(),
            1
        );
    }

    trait IntoTest {
        fn into_test(self) -> Test;
    }

    impl IntoTest for Vec<Component> {
        fn into_test(self) -> Test {
            Test::new("t.test", self)
        }
    }

    #[test]
    fn figure_example_reconstructs_with_a_better_source_for_step_three() {
        let corpus = avl_corpus();
        let aligner = Aligner::new(&corpus, MatchMode::Exact, None, false, None).unwrap();
        let p = greedy_pseudo_provenance(&fig1().stripped(), &aligner);
        assert!(p.test.components.iter().all(|c| !c.annotation.is_none()));
        assert_eq!(
            p.test.components[3].annotation,
            Annotation::Single(Origin::new("quick0.test", 14))
        );
        // steps 6..=10 come back exactly as quick3.test:1..=5
        for (step, pos) in (6..=10).zip(1..=5) {
            assert_eq!(
                p.test.components[step].annotation,
                Annotation::Single(Origin::new("quick3.test", pos))
            );
        }
        assert_eq!(runs_of(&p.test).unwrap(), p.runs);
        assert!(oracle_min_segmentation(&fig1().stripped(), &aligner).unwrap() <= p.runs.len());
    }

    #[test]
    fn unmatched_component_breaks_runs() {
        let corpus = avl_corpus();
        let aligner = Aligner::new(&corpus, MatchMode::Exact, None, false, None).unwrap();
        let t = parse_test(
            "t.test",
            "avl0 = avl.AVLTree()\nint1 = 10\nint2 = 18\navl0.insert(int0)\navl0.insert(int1)\n",
        )
        .unwrap();
        let p = greedy_pseudo_provenance(&t, &aligner);
        let annotated: Vec<bool> = p
            .test
            .components
            .iter()
            .map(|c| !c.annotation.is_none())
            .collect();
        assert_eq!(annotated, vec![true, true, false, true, true]);
        assert_eq!(p.runs.len(), 2);
    }

    #[test]
    fn existing_annotations_survive_and_bound_runs() {
        let corpus = avl_corpus();
        let aligner = Aligner::new(&corpus, MatchMode::Exact, None, false, None).unwrap();
        let mut t = fig1();
        for (i, c) in t.components.iter_mut().enumerate() {
            if i % 3 != 0 {
                c.annotation = Annotation::None;
            }
        }
        let p = greedy_pseudo_provenance(&t, &aligner);
        for i in (0..t.len()).step_by(3) {
            assert_eq!(p.test.components[i].annotation, t.components[i].annotation);
        }
        for r in &p.runs {
            assert!((r.start..=r.end).all(|i| i % 3 != 0));
        }
    }

    #[test]
    fn abstract_mode_matches_renamed_variables() {
        let corpus = avl_corpus();
        let sut: &dyn Sut = AvlSut::get();
        assert_eq!(
            Aligner::new(&corpus, MatchMode::Abstract, None, false, None).err(),
            Some(PseudoError::MissingSut)
        );
        let aligner = Aligner::new(&corpus, MatchMode::Abstract, Some(sut), false, None).unwrap();
        // no seed constructs avl1 and then inserts int0 twice in a row
        let t = parse_test(
            "t.test",
            "int2 = 18\navl1 = avl.AVLTree()\navl1.insert(int2)\navl1.insert(int2)\n",
        )
        .unwrap();
        let p = greedy_pseudo_provenance(&t, &aligner);
        assert!(p
            .test
            .components
            .iter()
            .all(|c| matches!(c.annotation, Annotation::Abstract(_))));
        assert!(crate::corpus::serialize_test(&p.test).contains(";;; ~quick"));
        for r in &p.runs {
            let src = corpus.get(&r.source).unwrap();
            for off in 0..r.len() {
                let a = sut
                    .abstract_action(t.components[r.start + off].action.as_str())
                    .unwrap();
                let b = sut
                    .abstract_action(src.components[r.source_start + off].action.as_str())
                    .unwrap();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn runs_of_examples() {
        let runs = runs_of(&fig1()).unwrap();
        let q3 = runs.iter().find(|r| r.start == 6).unwrap();
        assert_eq!(
            (q3.end, q3.source.as_str(), q3.source_start),
            (10, "quick3.test", 1)
        );
        assert!(runs_of(&fig1().stripped()).unwrap().is_empty());

        let alternating = parse_test(
            "a.test",
            "int0 = 1 ;;; a.test:0\nint0 = 1 ;;; b.test:1\nint0 = 1 ;;; a.test:2\n",
        )
        .unwrap();
        assert_eq!(runs_of(&alternating).unwrap().len(), 3);

        let weighted = parse_test("w.test", "int0 = 1 ;;; {a.test=1}\n").unwrap();
        assert_eq!(runs_of(&weighted), Err(PseudoError::WeightedRuns(0)));
    }

    #[test]
    fn oracle_on_two_fragments_and_guard() {
        let corpus = avl_corpus();
        let aligner = Aligner::new(&corpus, MatchMode::Exact, None, false, None).unwrap();
        let q1 = corpus.get("quick1.test").unwrap();
        let q2 = corpus.get("quick2.test").unwrap();
        let mut comps: Vec<Component> = q1.stripped().components[..4].to_vec();
        comps.extend(q2.stripped().components[6..10].iter().cloned());
        assert_eq!(
            oracle_min_segmentation(&comps.into_test(), &aligner).unwrap(),
            2
        );

        let long = Test::new("l.test", vec![q1.components[0].clone(); 21]);
        assert_eq!(
            oracle_min_segmentation(&long, &aligner),
            Err(PseudoError::TooLong(21))
        );
    }

    fn toy_corpus() -> Corpus {
        let seeds = [
            ("a.test", [0, 1, 2, 3, 1, 2]),
            ("b.test", [2, 3, 4, 0, 1, 4]),
            ("c.test", [4, 4, 3, 2, 1, 0]),
        ]
        .iter()
        .map(|(name, xs)| {
            let text: String = xs.iter().map(|x| format!("int0 = {x}\n")).collect();
            parse_test(name, &text).unwrap()
        })
        .collect();
        Corpus::from_tests(seeds, vec![]).unwrap()
    }

    proptest::proptest! {
        #[test]
        fn oracle_never_beats_greedy_on_toy_corpus(xs in proptest::collection::vec(0u32..6, 10)) {
            let corpus = toy_corpus();
            let aligner = Aligner::new(&corpus, MatchMode::Exact, None, false, None).unwrap();
            // 5 appears in no seed
            let text: String = xs.iter().map(|x| format!("int0 = {x}\n")).collect();
            let t = parse_test("t.test", &text).unwrap();
            let p = greedy_pseudo_provenance(&t, &aligner);
            let optimal = oracle_min_segmentation(&t, &aligner).unwrap();
            proptest::prop_assert!(optimal <= p.runs.len());
            for (x, c) in xs.iter().zip(&p.test.components) {
                proptest::prop_assert_eq!(*x == 5, c.annotation.is_none());
            }
            proptest::prop_assert_eq!(runs_of(&p.test).unwrap(), p.runs);
        }
    }
}
