#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use provtrail::corpus::{Annotation, Corpus, Test};
use provtrail::pseudoprov::{Aligner, ProvenanceRun};

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(rel)
}

pub fn provtrail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_provtrail"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Every file under `dir` with its contents, for byte-level comparisons.
pub fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (
                p.file_name().unwrap().to_string_lossy().into_owned(),
                std::fs::read(&p).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

/// Checks a run against its source directly: each position must match the
/// source verbatim, and the annotations must name exactly those positions.
pub fn run_is_verbatim(
    run: &ProvenanceRun,
    annotated: &Test,
    corpus: &Corpus,
) -> Result<(), String> {
    let src = corpus
        .get(&run.source)
        .ok_or_else(|| format!("unknown source {}", run.source))?;
    for off in 0..run.len() {
        let here = &annotated.components[run.start + off];
        let there = src
            .components
            .get(run.source_start + off)
            .ok_or_else(|| format!("{} runs past the end of {}", run.start + off, run.source))?;
        if here.action != there.action {
            return Err(format!(
                "step {}: {:?} vs {}:{} {:?}",
                run.start + off,
                here.action.as_str(),
                run.source,
                run.source_start + off,
                there.action.as_str()
            ));
        }
        match &here.annotation {
            Annotation::Single(o)
                if o.test_name == run.source && o.position == run.source_start + off => {}
            other => return Err(format!("step {}: annotation {other:?}", run.start + off)),
        }
    }
    Ok(())
}

/// Greedy maximality: a run cannot be continued by any source that could
/// have carried the whole run one more step, unless the next step was
/// already annotated before reconstruction.
pub fn run_is_greedy_maximal(
    run: &ProvenanceRun,
    original: &Test,
    aligner: &Aligner,
    corpus: &Corpus,
) -> Result<(), String> {
    let next = run.end + 1;
    let Some(c) = original.components.get(next) else {
        return Ok(());
    };
    if !c.annotation.is_none() {
        return Ok(());
    }
    for s in aligner.sources() {
        let src = corpus.get(s).unwrap();
        for start in 0..src.len() {
            let fits = (0..=run.len()).all(|off| {
                src.components
                    .get(start + off)
                    .is_some_and(|x| x.action == original.components[run.start + off].action)
            });
            if fits {
                return Err(format!(
                    "run {}..={} could continue in {s} from {start}",
                    run.start, run.end
                ));
            }
        }
    }
    Ok(())
}
