//! Seeded generation loop.
//!
//! Seed tests are cut into short disjoint chunks that make up the
//! sub-sequence pool. A new test is built by repeatedly drawing a pool entry
//! and replaying it best-effort: disabled steps are skipped, enabled ones are
//! executed and appended with a `Single` origin pointing at the exact source
//! component. Tests that reach coverage nobody has reached before are named,
//! chunked and fed back into the pool.
//!
//! The weighted variant ignores the pool and samples each step among the
//! enabled actions with weight `(1 + count)^alpha`, where `count` is the
//! number of corpus tests containing the action.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{
    serialize_test, ActionText, Annotation, Component, Corpus, CorpusError, Origin, Test,
};
use crate::rng::DetRng;
use crate::sut::{
    self, branch_count, stmt_count, Coverage, ExecutedStep, ExecutionResult, Failure, RunOptions,
    Sut, SutError,
};

/// Pool draws allowed per test, as a multiple of the maximum test length.
/// Bounds generation when most replayed steps are disabled.
pub const DRAWS_PER_STEP: usize = 4;

pub const BEST_TEST_NAME: &str = "best.test";
pub const MANIFEST_NAME: &str = "campaign.json";
const CANDIDATE_NAME: &str = "candidate.test";

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no seeds loaded")]
    NoSeeds,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Sut(#[from] SutError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GenMode {
    Subsequence,
    Weighted,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub k: usize,
    pub max_test_length: usize,
    pub budget_tests: usize,
    pub rng_seed: u64,
    pub mode: GenMode,
    pub weight_exponent: f64,
    pub fault_injection: bool,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            k: 3,
            max_test_length: 50,
            budget_tests: 100,
            rng_seed: 0,
            mode: GenMode::Subsequence,
            weight_exponent: 2.0,
            fault_injection: false,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        if self.k == 0 {
            return Err(EngineError::Config("k must be positive".into()));
        }
        if self.max_test_length == 0 {
            return Err(EngineError::Config(
                "max test length must be positive".into(),
            ));
        }
        if self.k > self.max_test_length {
            return Err(EngineError::Config(format!(
                "k ({}) exceeds max test length ({})",
                self.k, self.max_test_length
            )));
        }
        if !(self.weight_exponent.is_finite() && self.weight_exponent > 0.0) {
            return Err(EngineError::Config(
                "weight exponent must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subsequence {
    pub source: String,
    pub start: usize,
    pub actions: Vec<ActionText>,
}

#[derive(Clone, Debug, Default)]
pub struct SubsequencePool {
    entries: Vec<Subsequence>,
}

impl SubsequencePool {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_tests<'a>(tests: impl IntoIterator<Item = &'a Test>, k: usize) -> Self {
        let mut pool = Self::new();
        for t in tests {
            pool.extend(split_into_subsequences(t, k));
        }
        pool
    }

    pub fn extend(&mut self, subs: impl IntoIterator<Item = Subsequence>) {
        self.entries
            .extend(subs.into_iter().filter(|s| !s.actions.is_empty()));
    }

    pub fn entries(&self) -> &[Subsequence] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Disjoint chunks `[0,k)`, `[k,2k)`, ...; the last one may be shorter.
pub fn split_into_subsequences(t: &Test, k: usize) -> Vec<Subsequence> {
    assert!(k >= 1, "k must be positive");
    t.components
        .chunks(k)
        .enumerate()
        .map(|(i, chunk)| Subsequence {
            source: t.name.clone(),
            start: i * k,
            actions: chunk.iter().map(|c| c.action.clone()).collect(),
        })
        .collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoverageLedger {
    pub seen: Coverage,
    pub per_test: BTreeMap<String, Coverage>,
}

impl CoverageLedger {
    pub fn record(&mut self, name: &str, coverage: &Coverage) {
        self.seen.extend(coverage.iter().cloned());
        self.per_test.insert(name.to_string(), coverage.clone());
    }

    pub fn is_novel(&self, coverage: &Coverage) -> bool {
        !coverage.is_subset(&self.seen)
    }
}

pub fn learned_name(counter: u64) -> String {
    format!("gen{counter:06}.test")
}

/// True for names produced by [`learned_name`].
pub fn is_learned_name(name: &str) -> bool {
    name.len() == "gen000000.test".len()
        && name.starts_with("gen")
        && name.ends_with(".test")
        && name[3..9].bytes().all(|b| b.is_ascii_digit())
}

/// Incrementally builds a test while keeping the execution record that a
/// strict replay of the finished test would produce.
struct Builder<'a> {
    state: Box<dyn sut::SutState + 'a>,
    components: Vec<Component>,
    result: ExecutionResult,
}

impl<'a> Builder<'a> {
    fn new(sut: &'a dyn Sut, fault_injection: bool) -> Self {
        Builder {
            state: sut.new_state(fault_injection),
            components: Vec::new(),
            result: ExecutionResult::default(),
        }
    }

    fn failed(&self) -> bool {
        self.result.failure.is_some()
    }

    fn push(&mut self, action: ActionText, annotation: Annotation) -> Result<(), SutError> {
        let outcome = self.state.execute(&action)?;
        let index = self.components.len();
        self.result.executed.push(ExecutedStep {
            index,
            action: action.clone(),
            skipped: false,
        });
        self.result.coverage.extend(outcome.touched);
        if let Some(message) = outcome.failure {
            self.result.failure = Some(Failure {
                step: index,
                message,
            });
        }
        self.components.push(Component::new(action, annotation));
        Ok(())
    }

    fn finish(self) -> (Test, ExecutionResult) {
        (Test::new(CANDIDATE_NAME, self.components), self.result)
    }
}

/// Build one test by best-effort replay of randomly drawn pool entries.
pub fn generate_test(
    pool: &SubsequencePool,
    sut: &dyn Sut,
    cfg: &GenConfig,
    rng: &mut DetRng,
) -> Result<(Test, ExecutionResult), EngineError> {
    if pool.is_empty() {
        return Err(EngineError::NoSeeds);
    }
    let mut b = Builder::new(sut, cfg.fault_injection);
    let max_draws = cfg.max_test_length * DRAWS_PER_STEP;
    'draws: for _ in 0..max_draws {
        let entry = &pool.entries[rng.below(pool.len())];
        for (offset, action) in entry.actions.iter().enumerate() {
            if b.components.len() >= cfg.max_test_length {
                break 'draws;
            }
            if !b.state.enabled(action)? {
                continue;
            }
            let origin = Origin::new(entry.source.clone(), entry.start + offset);
            b.push(action.clone(), Annotation::Single(origin))?;
            if b.failed() {
                break 'draws;
            }
        }
        if b.components.len() >= cfg.max_test_length {
            break;
        }
    }
    Ok(b.finish())
}

/// Learn from `t` if it reached coverage outside `ledger.seen`: the test is
/// renamed `genNNNNNN.test`, chunked into the pool and recorded.
pub fn learn(
    t: &mut Test,
    r: &ExecutionResult,
    pool: &mut SubsequencePool,
    ledger: &mut CoverageLedger,
    cfg: &GenConfig,
    counter: &mut u64,
) -> bool {
    if !ledger.is_novel(&r.coverage) {
        return false;
    }
    *counter += 1;
    t.name = learned_name(*counter);
    pool.extend(split_into_subsequences(t, cfg.k));
    ledger.record(&t.name, &r.coverage);
    true
}

/// Per-action occurrence counts over a set of tests, for weighted sampling.
#[derive(Clone, Debug, Default)]
pub struct OccurrenceTable {
    by_action: HashMap<ActionText, BTreeMap<String, u32>>,
}

impl OccurrenceTable {
    pub fn from_tests<'a>(tests: impl IntoIterator<Item = &'a Test>) -> Self {
        let mut table = Self::default();
        for t in tests {
            table.add(t);
        }
        table
    }

    pub fn add(&mut self, t: &Test) {
        for c in &t.components {
            *self
                .by_action
                .entry(c.action.clone())
                .or_default()
                .entry(t.name.clone())
                .or_insert(0) += 1;
        }
    }

    /// Number of tests containing `a`.
    pub fn count(&self, a: &ActionText) -> usize {
        self.by_action.get(a).map_or(0, BTreeMap::len)
    }

    pub fn contributors(&self, a: &ActionText) -> Option<&BTreeMap<String, u32>> {
        self.by_action.get(a)
    }
}

/// Sampling weight `(1 + count)^alpha`.
pub fn sampling_weight(count: usize, alpha: f64) -> f64 {
    (1.0 + count as f64).powf(alpha)
}

fn weighted_annotation(table: &OccurrenceTable, a: &ActionText) -> Annotation {
    match table.contributors(a) {
        Some(entries) if !entries.is_empty() => Annotation::Weighted(
            entries
                .iter()
                .map(|(name, n)| (name.clone(), f64::from(*n)))
                .collect(),
        ),
        _ => Annotation::None,
    }
}

/// Pick one of the enabled actions of `state` by weighted sampling; `None`
/// when nothing is enabled.
pub fn sample_enabled(
    state: &dyn sut::SutState,
    actions: &[ActionText],
    table: &OccurrenceTable,
    alpha: f64,
    rng: &mut DetRng,
) -> Result<Option<ActionText>, SutError> {
    let mut candidates = Vec::new();
    let mut weights = Vec::new();
    for a in actions {
        if state.enabled(a)? {
            weights.push(sampling_weight(table.count(a), alpha));
            candidates.push(a);
        }
    }
    if candidates.is_empty() {
        return Ok(None);
    }
    Ok(Some(candidates[rng.weighted(&weights)].clone()))
}

pub(crate) fn weighted_generate_with(
    table: &OccurrenceTable,
    sut: &dyn Sut,
    cfg: &GenConfig,
    rng: &mut DetRng,
) -> Result<(Test, ExecutionResult), EngineError> {
    let mut b = Builder::new(sut, cfg.fault_injection);
    while b.components.len() < cfg.max_test_length && !b.failed() {
        let Some(a) = sample_enabled(
            b.state.as_ref(),
            sut.list_actions(),
            table,
            cfg.weight_exponent,
            rng,
        )?
        else {
            break;
        };
        let annotation = weighted_annotation(table, &a);
        b.push(a, annotation)?;
    }
    Ok(b.finish())
}

/// Frequency-weighted generation over every test in `corpus`. Components get
/// a `Weighted` annotation naming each corpus test that contains the action,
/// with its occurrence count as degree; actions no test contains stay
/// unannotated.
pub fn weighted_generate(
    corpus: &Corpus,
    sut: &dyn Sut,
    cfg: &GenConfig,
    rng: &mut DetRng,
) -> Result<(Test, ExecutionResult), EngineError> {
    if corpus.is_empty() {
        return Err(EngineError::NoSeeds);
    }
    weighted_generate_with(&OccurrenceTable::from_tests(corpus.tests()), sut, cfg, rng)
}

#[derive(Clone, Debug)]
pub struct LearnedTest {
    pub test: Test,
    pub result: ExecutionResult,
}

#[derive(Clone, Debug)]
pub struct BestTest {
    /// Named [`BEST_TEST_NAME`].
    pub test: Test,
    pub result: ExecutionResult,
    /// Learned name of the same test, when it was also learned.
    pub learned_as: Option<String>,
    /// Zero-based index among all generated tests.
    pub iteration: usize,
}

#[derive(Clone, Debug)]
pub struct CampaignResult {
    pub config: GenConfig,
    pub sut: String,
    pub seed_results: BTreeMap<String, ExecutionResult>,
    pub learned: Vec<LearnedTest>,
    pub ledger: CoverageLedger,
    pub best: Option<BestTest>,
    pub generated: usize,
}

impl CampaignResult {
    pub fn tests(&self) -> impl Iterator<Item = &Test> {
        self.learned.iter().map(|l| &l.test)
    }
}

/// Run the full loop: seed the ledger and pool, then generate and learn for
/// `budget_tests` iterations.
pub fn campaign(
    seeds: &Corpus,
    sut: &dyn Sut,
    cfg: &GenConfig,
) -> Result<CampaignResult, EngineError> {
    cfg.validate()?;
    let seed_tests: Vec<&Test> = seeds.seeds().collect();
    if seed_tests.is_empty() {
        return Err(EngineError::NoSeeds);
    }
    let mut ledger = CoverageLedger::default();
    let mut seed_results = BTreeMap::new();
    for t in &seed_tests {
        let r = sut::run(sut, t, RunOptions::strict(cfg.fault_injection))?;
        ledger.record(&t.name, &r.coverage);
        seed_results.insert(t.name.clone(), r);
    }
    let mut pool = SubsequencePool::from_tests(seed_tests.iter().copied(), cfg.k);
    let mut table = OccurrenceTable::from_tests(seed_tests.iter().copied());
    let mut rng = DetRng::seed_from_u64(cfg.rng_seed);
    let mut counter = 0u64;
    let mut learned = Vec::new();
    let mut best: Option<BestTest> = None;

    for iteration in 0..cfg.budget_tests {
        let (mut t, r) = match cfg.mode {
            GenMode::Subsequence => generate_test(&pool, sut, cfg, &mut rng)?,
            GenMode::Weighted => weighted_generate_with(&table, sut, cfg, &mut rng)?,
        };
        let added = learn(&mut t, &r, &mut pool, &mut ledger, cfg, &mut counter);
        if added && cfg.mode == GenMode::Weighted {
            table.add(&t);
        }
        if best
            .as_ref()
            .is_none_or(|b| r.coverage.len() > b.result.coverage.len())
        {
            let mut copy = t.clone();
            copy.name = BEST_TEST_NAME.to_string();
            best = Some(BestTest {
                test: copy,
                result: r.clone(),
                learned_as: added.then(|| t.name.clone()),
                iteration,
            });
        }
        if added {
            learned.push(LearnedTest { test: t, result: r });
        }
    }
    Ok(CampaignResult {
        config: cfg.clone(),
        sut: sut.id().to_string(),
        seed_results,
        learned,
        ledger,
        best,
        generated: cfg.budget_tests,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestSummary {
    pub name: String,
    pub length: usize,
    pub coverage: usize,
    pub branches: usize,
    pub statements: usize,
    pub failed: bool,
}

impl TestSummary {
    fn of(name: &str, length: usize, r: &ExecutionResult) -> Self {
        TestSummary {
            name: name.to_string(),
            length,
            coverage: r.coverage.len(),
            branches: branch_count(&r.coverage),
            statements: stmt_count(&r.coverage),
            failed: r.failure.is_some(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestSummary {
    #[serde(flatten)]
    pub summary: TestSummary,
    pub copy_of: Option<String>,
    pub iteration: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub sut: String,
    pub config: GenConfig,
    pub seeds: Vec<TestSummary>,
    pub generated: usize,
    pub learned: Vec<TestSummary>,
    pub best: Option<BestSummary>,
    pub ledger_size: usize,
}

impl CampaignResult {
    pub fn manifest(&self, seeds: &Corpus) -> Manifest {
        Manifest {
            sut: self.sut.clone(),
            config: self.config.clone(),
            seeds: self
                .seed_results
                .iter()
                .map(|(name, r)| {
                    let len = seeds.get(name).map_or(0, Test::len);
                    TestSummary::of(name, len, r)
                })
                .collect(),
            generated: self.generated,
            learned: self
                .learned
                .iter()
                .map(|l| TestSummary::of(&l.test.name, l.test.len(), &l.result))
                .collect(),
            best: self.best.as_ref().map(|b| BestSummary {
                summary: TestSummary::of(&b.test.name, b.test.len(), &b.result),
                copy_of: b.learned_as.clone(),
                iteration: b.iteration,
            }),
            ledger_size: self.ledger.seen.len(),
        }
    }

    /// Write every learned test, `best.test` and `campaign.json` to `out`.
    pub fn persist(&self, seeds: &Corpus, out: &Path) -> Result<(), EngineError> {
        let io = |path: &Path, e: std::io::Error| EngineError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        };
        fs::create_dir_all(out).map_err(|e| io(out, e))?;
        let write = |name: &str, text: &str| {
            let path = out.join(name);
            fs::write(&path, text).map_err(|e| io(&path, e))
        };
        for l in &self.learned {
            write(&l.test.name, &serialize_test(&l.test))?;
        }
        if let Some(b) = &self.best {
            write(BEST_TEST_NAME, &serialize_test(&b.test))?;
        }
        let mut manifest =
            serde_json::to_string_pretty(&self.manifest(seeds)).expect("manifest serializes");
        manifest.push('\n');
        write(MANIFEST_NAME, &manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::trace_to_seed;
    use crate::sut::{avl::AvlSut, seeds};

    fn act(s: &str) -> ActionText {
        ActionText::new(s).unwrap()
    }

    fn bare_test(name: &str, actions: &[&str]) -> Test {
        Test::new(
            name,
            actions.iter().map(|a| Component::bare(act(a))).collect(),
        )
    }

    fn sizes(t: &Test, k: usize) -> Vec<(usize, usize)> {
        split_into_subsequences(t, k)
            .iter()
            .map(|s| (s.start, s.actions.len()))
            .collect()
    }

    #[test]
    fn chunking() {
        let seven = bare_test("s.test", &["int0 = 1"; 7]);
        assert_eq!(sizes(&seven, 3), vec![(0, 3), (3, 3), (6, 1)]);
        assert_eq!(sizes(&seven, 1).len(), 7);
        let thirteen = bare_test("f.test", &["int0 = 1"; 13]);
        assert_eq!(sizes(&thirteen, 4), vec![(0, 4), (4, 4), (8, 4), (12, 1)]);
        assert!(split_into_subsequences(&bare_test("e.test", &[]), 3).is_empty());
    }

    #[test]
    fn empty_pool_is_an_error() {
        let mut rng = DetRng::seed_from_u64(0);
        let err = generate_test(
            &SubsequencePool::new(),
            AvlSut::get(),
            &GenConfig::default(),
            &mut rng,
        )
        .unwrap_err();
        assert_eq!(err.to_string(), "no seeds loaded");
    }

    #[test]
    fn all_disabled_pool_yields_empty_test() {
        let t = bare_test("s.test", &["avl0.insert(int0)", "avl1.display()"]);
        let pool = SubsequencePool::from_tests([&t], 3);
        let mut rng = DetRng::seed_from_u64(3);
        let (g, r) = generate_test(&pool, AvlSut::get(), &GenConfig::default(), &mut rng).unwrap();
        assert!(g.is_empty());
        assert!(r.coverage.is_empty());
    }

    #[test]
    fn generated_tests_are_annotated_and_replayable() {
        let seeds = seeds::avl();
        let pool = SubsequencePool::from_tests(&seeds, 3);
        let corpus = Corpus::from_tests(seeds.clone(), vec![]).unwrap();
        let cfg = GenConfig::default();
        let mut rng = DetRng::seed_from_u64(11);
        for _ in 0..20 {
            let (t, r) = generate_test(&pool, AvlSut::get(), &cfg, &mut rng).unwrap();
            assert!(t.len() <= cfg.max_test_length);
            for c in &t.components {
                let Annotation::Single(o) = &c.annotation else {
                    panic!("unannotated component");
                };
                assert_eq!(corpus.component(o).unwrap().action, c.action);
            }
            let replay = sut::run(AvlSut::get(), &t, RunOptions::strict(false)).unwrap();
            assert_eq!(replay, r);
        }
        let again = |seed| {
            let mut rng = DetRng::seed_from_u64(seed);
            generate_test(&pool, AvlSut::get(), &cfg, &mut rng)
                .unwrap()
                .0
        };
        assert_eq!(again(5), again(5));
    }

    #[test]
    fn learning_requires_novelty() {
        let seeds = seeds::avl();
        let mut ledger = CoverageLedger::default();
        for t in &seeds[1..] {
            let r = sut::run(AvlSut::get(), t, RunOptions::strict(false)).unwrap();
            ledger.record(&t.name, &r.coverage);
        }
        let cfg = GenConfig::default();
        let mut pool = SubsequencePool::new();
        let mut counter = 0;

        let mut dup = seeds[2].clone();
        let r = sut::run(AvlSut::get(), &dup, RunOptions::strict(false)).unwrap();
        assert!(!learn(
            &mut dup,
            &r,
            &mut pool,
            &mut ledger,
            &cfg,
            &mut counter
        ));
        assert!(pool.is_empty());

        let mut novel = seeds[0].clone();
        let r = sut::run(AvlSut::get(), &novel, RunOptions::strict(false)).unwrap();
        let before = ledger.seen.len();
        assert!(learn(
            &mut novel,
            &r,
            &mut pool,
            &mut ledger,
            &cfg,
            &mut counter
        ));
        assert_eq!(novel.name, "gen000001.test");
        assert_eq!(pool.len(), novel.len().div_ceil(3));
        assert!(ledger.seen.len() > before);
    }

    #[test]
    fn campaign_edges() {
        let corpus = Corpus::from_tests(seeds::avl(), vec![]).unwrap();
        let cfg = GenConfig {
            budget_tests: 0,
            ..GenConfig::default()
        };
        let res = campaign(&corpus, AvlSut::get(), &cfg).unwrap();
        assert!(res.best.is_none() && res.learned.is_empty());

        let cfg = GenConfig {
            budget_tests: 1,
            rng_seed: 9,
            ..GenConfig::default()
        };
        let res = campaign(&corpus, AvlSut::get(), &cfg).unwrap();
        let best = res.best.as_ref().unwrap();
        let novel = !best.result.coverage.is_subset(
            &res.seed_results
                .values()
                .flat_map(|r| r.coverage.iter().cloned())
                .collect(),
        );
        assert_eq!(res.learned.len(), usize::from(novel));

        let bad = GenConfig {
            k: 60,
            ..GenConfig::default()
        };
        assert!(matches!(
            campaign(&corpus, AvlSut::get(), &bad),
            Err(EngineError::Config(_))
        ));
    }

    #[test]
    fn trace_depth_after_one_and_two_generations() {
        // generation 1: learn from the seeds only
        let seeds = seeds::avl();
        let cfg = GenConfig::default();
        let mut ledger = CoverageLedger::default();
        let mut pool = SubsequencePool::from_tests(&seeds, cfg.k);
        let mut rng = DetRng::seed_from_u64(17);
        let mut counter = 0;
        let first = loop {
            let (mut t, r) = generate_test(&pool, AvlSut::get(), &cfg, &mut rng).unwrap();
            if learn(&mut t, &r, &mut pool, &mut ledger, &cfg, &mut counter) {
                break t;
            }
        };
        // generation 2: a pool built from the learned test alone
        let gen_pool = SubsequencePool::from_tests([&first], cfg.k);
        let (mut second, _) = generate_test(&gen_pool, AvlSut::get(), &cfg, &mut rng).unwrap();
        second.name = learned_name(counter + 1);
        let corpus = Corpus::from_tests(seeds, vec![first.clone(), second.clone()]).unwrap();
        for step in 0..first.len() {
            let chain = trace_to_seed(&corpus, &first.name, step).unwrap();
            assert_eq!(chain.len(), 1);
            assert!(corpus.is_seed(&chain[0].test_name));
        }
        assert!(!second.is_empty());
        for step in 0..second.len() {
            let chain = trace_to_seed(&corpus, &second.name, step).unwrap();
            assert_eq!(chain.len(), 2);
            assert_eq!(chain[0].test_name, first.name);
        }
    }

    #[test]
    fn weight_formula() {
        let w5 = sampling_weight(5, 2.0);
        let w1 = sampling_weight(1, 2.0);
        assert_eq!((w5, w1), (36.0, 4.0));
        assert_eq!(w5 / w1, 9.0);
        assert_eq!(sampling_weight(0, 2.0), 1.0);
    }

    #[test]
    fn weighted_annotations_list_exact_contributors() {
        let corpus = Corpus::from_tests(seeds::avl(), vec![]).unwrap();
        let cfg = GenConfig {
            mode: GenMode::Weighted,
            max_test_length: 30,
            ..GenConfig::default()
        };
        let mut rng = DetRng::seed_from_u64(4);
        let (t, r) = weighted_generate(&corpus, AvlSut::get(), &cfg, &mut rng).unwrap();
        assert_eq!(t.len(), 30);
        for c in &t.components {
            let containing: BTreeMap<String, f64> = corpus
                .tests()
                .filter_map(|s| {
                    let n = s.actions().filter(|a| **a == c.action).count();
                    (n > 0).then(|| (s.name.clone(), n as f64))
                })
                .collect();
            match &c.annotation {
                Annotation::Weighted(entries) => assert_eq!(entries, &containing),
                Annotation::None => assert!(containing.is_empty()),
                other => panic!("{other:?}"),
            }
        }
        assert_eq!(
            sut::run(AvlSut::get(), &t, RunOptions::strict(false)).unwrap(),
            r
        );
    }

    #[test]
    fn learned_names() {
        assert_eq!(learned_name(7), "gen000007.test");
        assert!(is_learned_name("gen000007.test"));
        assert!(!is_learned_name("best.test"));
        assert!(!is_learned_name("genabcdef.test"));
    }
}
