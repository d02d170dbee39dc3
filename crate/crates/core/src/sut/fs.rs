//! In-memory filesystem SUT.
//!
//! Paths come from a fixed vocabulary: every strictly increasing sequence of
//! the segment names `a`..`d`, so depth is at most four and every parent of
//! a vocabulary path is itself in the vocabulary. OS-level errors such as
//! "file exists" are ordinary outcomes here and only show up as coverage.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;

use super::{ActionKind, CoveragePoint, Grammar, Hits, StepOutcome, Sut, SutError, SutState};
use crate::corpus::ActionText;

pub const SEGMENTS: [&str; 4] = ["a", "b", "c", "d"];
pub const FD_VARS: usize = 2;
const MAX_SYMLINK_HOPS: u32 = 8;
const WRITE_CHUNK: usize = 4;

pub const POINTS: &[&str] = &[
    "branch:close_ok",
    "branch:close_twice",
    "branch:makedirs_create_intermediate",
    "branch:makedirs_create_leaf",
    "branch:makedirs_exists",
    "branch:makedirs_exists_intermediate",
    "branch:makedirs_through_file",
    "branch:mkdir_exists",
    "branch:mkdir_no_parent",
    "branch:mkdir_ok",
    "branch:mkdir_parent_not_dir",
    "branch:open_append",
    "branch:open_create",
    "branch:open_is_dir",
    "branch:open_missing",
    "branch:open_no_parent",
    "branch:open_read",
    "branch:open_rebind_open_fd",
    "branch:open_truncate",
    "branch:remove_file",
    "branch:remove_is_dir",
    "branch:remove_missing",
    "branch:remove_open_file",
    "branch:remove_symlink",
    "branch:rename_dest_not_empty",
    "branch:rename_dir",
    "branch:rename_dir_onto_file",
    "branch:rename_file",
    "branch:rename_file_onto_dir",
    "branch:rename_into_self",
    "branch:rename_missing_src",
    "branch:rename_moves_open_fd",
    "branch:rename_no_parent",
    "branch:rename_replace_dir",
    "branch:rename_replace_file",
    "branch:rename_same",
    "branch:rename_symlink",
    "branch:resolve_loop",
    "branch:resolve_symlink",
    "branch:rmdir_missing",
    "branch:rmdir_not_dir",
    "branch:rmdir_not_empty",
    "branch:rmdir_ok",
    "branch:symlink_dangling",
    "branch:symlink_exists",
    "branch:symlink_no_parent",
    "branch:symlink_ok",
    "branch:write_closed",
    "branch:write_ok",
    "branch:write_readonly",
    "branch:write_unlinked",
    "stmt:close_entry",
    "stmt:makedirs_entry",
    "stmt:mkdir_entry",
    "stmt:open_entry",
    "stmt:remove_entry",
    "stmt:rename_entry",
    "stmt:resolve_entry",
    "stmt:rmdir_entry",
    "stmt:symlink_entry",
    "stmt:write_entry",
];

/// The fixed path vocabulary, in canonical order (`/a`, `/a/b`, ...).
pub fn path_vocabulary() -> Vec<String> {
    fn extend(prefix: &str, from: usize, out: &mut Vec<String>) {
        for (i, seg) in SEGMENTS.iter().enumerate().skip(from) {
            let p = format!("{prefix}/{seg}");
            out.push(p.clone());
            extend(&p, i + 1, out);
        }
    }
    let mut out = Vec::new();
    extend("", 0, &mut out);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Read,
    Write,
    Append,
}

impl Mode {
    const ALL: [Mode; 3] = [Mode::Read, Mode::Write, Mode::Append];

    fn letter(self) -> &'static str {
        match self {
            Mode::Read => "r",
            Mode::Write => "w",
            Mode::Append => "a",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathOp {
    Mkdir,
    Makedirs,
    Rmdir,
    Remove,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairOp {
    Rename,
    Symlink,
}

/// Actions refer to paths by their index in the vocabulary.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FsAction {
    Path { op: PathOp, path: usize },
    Pair { op: PairOp, from: usize, to: usize },
    Open { fd: usize, path: usize, mode: Mode },
    Close { fd: usize },
    Write { fd: usize },
}

fn grammar_entries(paths: &[String]) -> Vec<(String, FsAction)> {
    let mut out = Vec::new();
    for (op, name) in [
        (PathOp::Mkdir, "mkdir"),
        (PathOp::Makedirs, "makedirs"),
        (PathOp::Rmdir, "rmdir"),
        (PathOp::Remove, "remove"),
    ] {
        for (i, p) in paths.iter().enumerate() {
            out.push((
                format!("fs.{name}(\"{p}\")"),
                FsAction::Path { op, path: i },
            ));
        }
    }
    for (op, name) in [(PairOp::Rename, "rename"), (PairOp::Symlink, "symlink")] {
        for (i, p) in paths.iter().enumerate() {
            for (j, q) in paths.iter().enumerate() {
                out.push((
                    format!("fs.{name}(\"{p}\",\"{q}\")"),
                    FsAction::Pair { op, from: i, to: j },
                ));
            }
        }
    }
    for fd in 0..FD_VARS {
        for (i, p) in paths.iter().enumerate() {
            for mode in Mode::ALL {
                out.push((
                    format!("fd{fd} = fs.open(\"{p}\",\"{}\")", mode.letter()),
                    FsAction::Open { fd, path: i, mode },
                ));
            }
        }
    }
    for fd in 0..FD_VARS {
        out.push((format!("fs.close(fd{fd})"), FsAction::Close { fd }));
        out.push((format!("fs.write(fd{fd})"), FsAction::Write { fd }));
    }
    out
}

pub struct FsSut {
    grammar: Grammar<FsAction>,
    paths: Vec<String>,
    points: Vec<CoveragePoint>,
}

impl FsSut {
    pub fn get() -> &'static FsSut {
        static INSTANCE: OnceLock<FsSut> = OnceLock::new();
        INSTANCE.get_or_init(|| {
            let paths = path_vocabulary();
            FsSut {
                grammar: Grammar::new(grammar_entries(&paths)),
                paths,
                points: POINTS.iter().map(|p| CoveragePoint::new(*p)).collect(),
            }
        })
    }
}

impl Sut for FsSut {
    fn id(&self) -> &'static str {
        "fs"
    }

    fn list_actions(&self) -> &[ActionText] {
        &self.grammar.actions
    }

    fn coverage_points(&self) -> &[CoveragePoint] {
        &self.points
    }

    fn new_state(&self, _fault_injection: bool) -> Box<dyn SutState + '_> {
        Box::new(FsState {
            sut: self,
            model: Model::default(),
            fds: Default::default(),
        })
    }

    fn variable_families(&self) -> &'static [(&'static str, usize)] {
        &[("fd", FD_VARS)]
    }

    fn max_constant(&self) -> Option<u32> {
        None
    }

    fn assigned_constant(&self, _a: &ActionText) -> Option<u32> {
        None
    }

    fn with_constant(&self, _a: &ActionText, _value: u32) -> Option<ActionText> {
        None
    }

    fn kinds(&self) -> &BTreeSet<ActionKind> {
        &self.grammar.kinds
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Node {
    Dir,
    File { len: usize },
    Symlink { target: String },
}

#[derive(Clone, Debug)]
struct OpenFile {
    path: String,
    mode: Mode,
    open: bool,
}

/// Flat map from absolute path to node; `/` is implicit and always a dir.
#[derive(Clone, Debug, Default)]
struct Model {
    nodes: BTreeMap<String, Node>,
}

fn parent(path: &str) -> &str {
    match path.rfind('/') {
        Some(0) | None => "/",
        Some(i) => &path[..i],
    }
}

fn join(dir: &str, name: &str) -> String {
    if dir == "/" {
        format!("/{name}")
    } else {
        format!("{dir}/{name}")
    }
}

fn is_within(path: &str, dir: &str) -> bool {
    path.len() > dir.len() && path.starts_with(dir) && path.as_bytes()[dir.len()] == b'/'
}

#[derive(Debug)]
struct Loop;

impl Model {
    fn get(&self, path: &str) -> Option<&Node> {
        if path == "/" {
            Some(&Node::Dir)
        } else {
            self.nodes.get(path)
        }
    }

    fn is_dir(&self, path: &str) -> bool {
        matches!(self.get(path), Some(Node::Dir))
    }

    fn has_children(&self, dir: &str) -> bool {
        self.nodes.keys().any(|k| parent(k) == dir)
    }

    /// Resolve symlinks in every component except possibly the last.
    fn resolve(&self, path: &str, follow_last: bool, hits: &mut Hits) -> Result<String, Loop> {
        hits.hit("stmt:resolve_entry");
        let mut hops = 0;
        self.resolve_inner(path, follow_last, &mut hops, hits)
    }

    fn resolve_inner(
        &self,
        path: &str,
        follow_last: bool,
        hops: &mut u32,
        hits: &mut Hits,
    ) -> Result<String, Loop> {
        let parts: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
        let mut cur = "/".to_string();
        for (i, part) in parts.iter().enumerate() {
            let candidate = join(&cur, part);
            let last = i + 1 == parts.len();
            match self.nodes.get(&candidate) {
                Some(Node::Symlink { target }) if !last || follow_last => {
                    *hops += 1;
                    if *hops > MAX_SYMLINK_HOPS {
                        hits.hit("branch:resolve_loop");
                        return Err(Loop);
                    }
                    hits.hit("branch:resolve_symlink");
                    cur = self.resolve_inner(target, true, hops, hits)?;
                }
                _ => cur = candidate,
            }
        }
        Ok(cur)
    }

    fn move_subtree(&mut self, from: &str, to: &str) {
        let moved: Vec<(String, Node)> = self
            .nodes
            .iter()
            .filter(|(k, _)| k.as_str() == from || is_within(k, from))
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect();
        for (k, _) in &moved {
            self.nodes.remove(k);
        }
        for (k, v) in moved {
            let rest = &k[from.len()..];
            self.nodes.insert(format!("{to}{rest}"), v);
        }
    }
}

struct FsState<'a> {
    sut: &'a FsSut,
    model: Model,
    fds: [Option<OpenFile>; FD_VARS],
}

impl FsState<'_> {
    fn mkdir(&mut self, path: &str, hits: &mut Hits) {
        hits.hit("stmt:mkdir_entry");
        let Ok(r) = self.model.resolve(path, false, hits) else {
            return;
        };
        if self.model.get(&r).is_some() {
            hits.hit("branch:mkdir_exists");
        } else if self.model.get(parent(&r)).is_none() {
            hits.hit("branch:mkdir_no_parent");
        } else if !self.model.is_dir(parent(&r)) {
            hits.hit("branch:mkdir_parent_not_dir");
        } else {
            hits.hit("branch:mkdir_ok");
            self.model.nodes.insert(r, Node::Dir);
        }
    }

    fn makedirs(&mut self, path: &str, hits: &mut Hits) {
        hits.hit("stmt:makedirs_entry");
        let parts: Vec<&str> = path.split('/').filter(|s| !s.is_empty()).collect();
        let mut prefix = String::new();
        for (i, part) in parts.iter().enumerate() {
            prefix.push('/');
            prefix.push_str(part);
            let last = i + 1 == parts.len();
            let Ok(r) = self.model.resolve(&prefix, true, hits) else {
                return;
            };
            match self.model.get(&r) {
                None => {
                    if !self.model.is_dir(parent(&r)) {
                        // parent resolved through a dangling symlink
                        hits.hit("branch:makedirs_through_file");
                        return;
                    }
                    hits.hit(if last {
                        "branch:makedirs_create_leaf"
                    } else {
                        "branch:makedirs_create_intermediate"
                    });
                    self.model.nodes.insert(r, Node::Dir);
                }
                Some(Node::Dir) if last => {
                    hits.hit("branch:makedirs_exists");
                }
                Some(Node::Dir) => {
                    hits.hit("branch:makedirs_exists_intermediate");
                }
                Some(_) => {
                    hits.hit("branch:makedirs_through_file");
                    return;
                }
            }
        }
    }

    fn rmdir(&mut self, path: &str, hits: &mut Hits) {
        hits.hit("stmt:rmdir_entry");
        let Ok(r) = self.model.resolve(path, false, hits) else {
            return;
        };
        match self.model.get(&r) {
            None => hits.hit("branch:rmdir_missing"),
            Some(Node::Dir) if self.model.has_children(&r) => hits.hit("branch:rmdir_not_empty"),
            Some(Node::Dir) => {
                hits.hit("branch:rmdir_ok");
                self.model.nodes.remove(&r);
            }
            Some(_) => hits.hit("branch:rmdir_not_dir"),
        }
    }

    fn remove(&mut self, path: &str, hits: &mut Hits) {
        hits.hit("stmt:remove_entry");
        let Ok(r) = self.model.resolve(path, false, hits) else {
            return;
        };
        match self.model.get(&r) {
            None => hits.hit("branch:remove_missing"),
            Some(Node::Dir) => hits.hit("branch:remove_is_dir"),
            Some(Node::Symlink { .. }) => {
                hits.hit("branch:remove_symlink");
                self.model.nodes.remove(&r);
            }
            Some(Node::File { .. }) => {
                hits.hit("branch:remove_file");
                if self.fds.iter().flatten().any(|f| f.open && f.path == r) {
                    hits.hit("branch:remove_open_file");
                }
                self.model.nodes.remove(&r);
            }
        }
    }

    fn rename(&mut self, from: &str, to: &str, hits: &mut Hits) {
        hits.hit("stmt:rename_entry");
        let (Ok(src), Ok(dst)) = (
            self.model.resolve(from, false, hits),
            self.model.resolve(to, false, hits),
        ) else {
            return;
        };
        let Some(src_node) = self.model.get(&src).cloned() else {
            hits.hit("branch:rename_missing_src");
            return;
        };
        if src == dst {
            hits.hit("branch:rename_same");
            return;
        }
        if is_within(&dst, &src) {
            hits.hit("branch:rename_into_self");
            return;
        }
        if !self.model.is_dir(parent(&dst)) {
            hits.hit("branch:rename_no_parent");
            return;
        }
        match (self.model.get(&dst), &src_node) {
            (None, _) => {}
            (Some(Node::Dir), Node::Dir) => {
                if self.model.has_children(&dst) {
                    hits.hit("branch:rename_dest_not_empty");
                    return;
                }
                hits.hit("branch:rename_replace_dir");
                self.model.nodes.remove(&dst);
            }
            (Some(Node::Dir), _) => {
                hits.hit("branch:rename_file_onto_dir");
                return;
            }
            (Some(_), Node::Dir) => {
                hits.hit("branch:rename_dir_onto_file");
                return;
            }
            (Some(_), _) => {
                hits.hit("branch:rename_replace_file");
                self.model.nodes.remove(&dst);
            }
        }
        hits.hit(match src_node {
            Node::Dir => "branch:rename_dir",
            Node::File { .. } => "branch:rename_file",
            Node::Symlink { .. } => "branch:rename_symlink",
        });
        self.model.move_subtree(&src, &dst);
        for f in self.fds.iter_mut().flatten() {
            if f.path == src || is_within(&f.path, &src) {
                hits.hit("branch:rename_moves_open_fd");
                f.path = format!("{dst}{}", &f.path[src.len()..]);
            }
        }
    }

    fn symlink(&mut self, target: &str, link: &str, hits: &mut Hits) {
        hits.hit("stmt:symlink_entry");
        let Ok(at) = self.model.resolve(link, false, hits) else {
            return;
        };
        if self.model.get(&at).is_some() {
            hits.hit("branch:symlink_exists");
            return;
        }
        if !self.model.is_dir(parent(&at)) {
            hits.hit("branch:symlink_no_parent");
            return;
        }
        self.model.nodes.insert(
            at,
            Node::Symlink {
                target: target.to_string(),
            },
        );
        let dangling = match self.model.resolve(target, true, hits) {
            Ok(r) => self.model.get(&r).is_none(),
            Err(Loop) => true,
        };
        hits.hit(if dangling {
            "branch:symlink_dangling"
        } else {
            "branch:symlink_ok"
        });
    }

    fn open(&mut self, fd: usize, path: &str, mode: Mode, hits: &mut Hits) {
        hits.hit("stmt:open_entry");
        let Ok(r) = self.model.resolve(path, true, hits) else {
            return;
        };
        let opened = match (self.model.get(&r).cloned(), mode) {
            (Some(Node::Dir), _) => {
                hits.hit("branch:open_is_dir");
                false
            }
            (None, Mode::Read) => {
                hits.hit("branch:open_missing");
                false
            }
            (None, _) if !self.model.is_dir(parent(&r)) => {
                hits.hit("branch:open_no_parent");
                false
            }
            (None, _) => {
                hits.hit("branch:open_create");
                self.model.nodes.insert(r.clone(), Node::File { len: 0 });
                true
            }
            (Some(_), Mode::Read) => {
                hits.hit("branch:open_read");
                true
            }
            (Some(_), Mode::Write) => {
                hits.hit("branch:open_truncate");
                self.model.nodes.insert(r.clone(), Node::File { len: 0 });
                true
            }
            (Some(_), Mode::Append) => {
                hits.hit("branch:open_append");
                true
            }
        };
        if opened {
            if self.fds[fd].as_ref().is_some_and(|f| f.open) {
                hits.hit("branch:open_rebind_open_fd");
            }
            self.fds[fd] = Some(OpenFile {
                path: r,
                mode,
                open: true,
            });
        }
    }

    fn close(&mut self, fd: usize, hits: &mut Hits) {
        hits.hit("stmt:close_entry");
        let f = self.fds[fd].as_mut().expect("enabled");
        if f.open {
            hits.hit("branch:close_ok");
            f.open = false;
        } else {
            hits.hit("branch:close_twice");
        }
    }

    fn write(&mut self, fd: usize, hits: &mut Hits) {
        hits.hit("stmt:write_entry");
        let f = self.fds[fd].as_ref().expect("enabled");
        if !f.open {
            hits.hit("branch:write_closed");
        } else if f.mode == Mode::Read {
            hits.hit("branch:write_readonly");
        } else {
            match self.model.nodes.get_mut(&f.path) {
                Some(Node::File { len }) => {
                    hits.hit("branch:write_ok");
                    *len += WRITE_CHUNK;
                }
                _ => hits.hit("branch:write_unlinked"),
            }
        }
    }
}

impl SutState for FsState<'_> {
    fn enabled(&self, a: &ActionText) -> Result<bool, SutError> {
        Ok(match *self.sut.grammar.lookup("fs", a)? {
            FsAction::Close { fd } | FsAction::Write { fd } => self.fds[fd].is_some(),
            _ => true,
        })
    }

    fn execute(&mut self, a: &ActionText) -> Result<StepOutcome, SutError> {
        if !self.enabled(a)? {
            return Err(SutError::Disabled {
                action: a.to_string(),
            });
        }
        let action = *self.sut.grammar.lookup("fs", a)?;
        let paths = &self.sut.paths;
        let mut hits = Hits::default();
        match action {
            FsAction::Path { op, path } => {
                let p = paths[path].as_str();
                match op {
                    PathOp::Mkdir => self.mkdir(p, &mut hits),
                    PathOp::Makedirs => self.makedirs(p, &mut hits),
                    PathOp::Rmdir => self.rmdir(p, &mut hits),
                    PathOp::Remove => self.remove(p, &mut hits),
                }
            }
            FsAction::Pair { op, from, to } => {
                let (p, q) = (paths[from].as_str(), paths[to].as_str());
                match op {
                    PairOp::Rename => self.rename(p, q, &mut hits),
                    PairOp::Symlink => self.symlink(p, q, &mut hits),
                }
            }
            FsAction::Open { fd, path, mode } => {
                self.open(fd, paths[path].as_str(), mode, &mut hits)
            }
            FsAction::Close { fd } => self.close(fd, &mut hits),
            FsAction::Write { fd } => self.write(fd, &mut hits),
        }
        Ok(StepOutcome {
            touched: hits.into_coverage(),
            failure: None,
        })
    }

    fn reset(&mut self) {
        self.model = Model::default();
        self.fds = Default::default();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::parse_test;
    use crate::sut::{run, Coverage, RunOptions};

    fn cover(lines: &[&str]) -> Coverage {
        let t = parse_test("t.test", &lines.join("\n")).unwrap();
        run(FsSut::get(), &t, RunOptions::strict(false))
            .unwrap()
            .coverage
    }

    fn has(cov: &Coverage, p: &str) -> bool {
        cov.contains(&CoveragePoint::new(p))
    }

    #[test]
    fn vocabulary() {
        let paths = path_vocabulary();
        assert_eq!(paths.len(), 15);
        assert_eq!(paths[..4], ["/a", "/a/b", "/a/b/c", "/a/b/c/d"]);
        assert!(paths.iter().all(|p| p.matches('/').count() <= 4));
        for p in &paths {
            let par = parent(p);
            assert!(par == "/" || paths.iter().any(|q| q == par), "{p}");
        }
        let sut = FsSut::get();
        assert_eq!(
            sut.list_actions().len(),
            4 * 15 + 2 * 15 * 15 + 2 * 15 * 3 + 2 * 2
        );
        assert!(sut
            .list_actions()
            .iter()
            .any(|a| a.as_str() == "fs.makedirs(\"/a/b/c\")"));
        assert_eq!(
            sut.abstract_action("fs.rename(\"/a\",\"/b\")")
                .unwrap()
                .as_str(),
            "fs.rename(?,?)"
        );
        assert_eq!(
            sut.abstract_action("fd1 = fs.open(\"/a\",\"w\")")
                .unwrap()
                .as_str(),
            "fd? = fs.open(?,?)"
        );
    }

    #[test]
    fn directory_lifecycle() {
        let cov = cover(&[
            "fs.mkdir(\"/a/b\")",
            "fs.makedirs(\"/a/b/c\")",
            "fs.makedirs(\"/a/b/c\")",
            "fs.mkdir(\"/a\")",
            "fs.rmdir(\"/a\")",
            "fs.rmdir(\"/a/b/c\")",
            "fs.rmdir(\"/a/b/c\")",
            "fs.remove(\"/a\")",
        ]);
        for p in [
            "branch:mkdir_no_parent",
            "branch:makedirs_create_intermediate",
            "branch:makedirs_create_leaf",
            "branch:makedirs_exists",
            "branch:makedirs_exists_intermediate",
            "branch:mkdir_exists",
            "branch:rmdir_not_empty",
            "branch:rmdir_ok",
            "branch:rmdir_missing",
            "branch:remove_is_dir",
        ] {
            assert!(has(&cov, p), "{p}");
        }
    }

    #[test]
    fn files_and_descriptors() {
        let cov = cover(&[
            "fd0 = fs.open(\"/a\",\"r\")",
            "fd0 = fs.open(\"/a\",\"w\")",
            "fs.write(fd0)",
            "fd1 = fs.open(\"/a\",\"r\")",
            "fs.write(fd1)",
            "fd1 = fs.open(\"/a\",\"a\")",
            "fs.rename(\"/a\",\"/b\")",
            "fs.write(fd0)",
            "fs.remove(\"/b\")",
            "fs.write(fd0)",
            "fs.close(fd0)",
            "fs.close(fd0)",
            "fs.write(fd0)",
            "fd0 = fs.open(\"/c/d\",\"w\")",
            "fs.mkdir(\"/c\")",
            "fd0 = fs.open(\"/c\",\"w\")",
            "fs.remove(\"/c/d\")",
        ]);
        for p in [
            "branch:open_missing",
            "branch:open_create",
            "branch:write_ok",
            "branch:open_read",
            "branch:write_readonly",
            "branch:open_rebind_open_fd",
            "branch:open_append",
            "branch:rename_file",
            "branch:rename_moves_open_fd",
            "branch:remove_file",
            "branch:remove_open_file",
            "branch:write_unlinked",
            "branch:close_ok",
            "branch:close_twice",
            "branch:write_closed",
            "branch:open_no_parent",
            "branch:open_is_dir",
            "branch:remove_missing",
        ] {
            assert!(has(&cov, p), "{p}");
        }
        let mut st = FsSut::get().new_state(false);
        assert!(!st
            .enabled(&ActionText::new("fs.close(fd1)").unwrap())
            .unwrap());
        st.reset();
    }

    #[test]
    fn renames_and_links() {
        let cov = cover(&[
            "fs.makedirs(\"/a/b\")",
            "fs.rename(\"/a\",\"/a/b/c\")",
            "fs.rename(\"/a\",\"/a\")",
            "fs.rename(\"/d\",\"/c\")",
            "fs.rename(\"/a\",\"/b/c\")",
            "fs.mkdir(\"/c\")",
            "fs.rename(\"/c\",\"/a\")",
            "fs.rename(\"/a/b\",\"/c\")",
            "fd0 = fs.open(\"/d\",\"w\")",
            "fs.rename(\"/d\",\"/c\")",
            "fs.rename(\"/c\",\"/d\")",
            "fs.mkdir(\"/b\")",
            "fs.rename(\"/a\",\"/b\")",
            "fd1 = fs.open(\"/a\",\"w\")",
            "fs.rename(\"/d\",\"/a\")",
            "fs.symlink(\"/a\",\"/a\")",
            "fs.symlink(\"/c\",\"/b/d\")",
            "fs.symlink(\"/c\",\"/a/b\")",
            "fs.symlink(\"/d\",\"/c/d\")",
            "fs.rename(\"/b/d\",\"/d\")",
            "fd0 = fs.open(\"/d\",\"r\")",
            "fs.remove(\"/d\")",
            "fs.rmdir(\"/a\")",
            "fs.symlink(\"/b\",\"/b/c\")",
            "fs.symlink(\"/b/c\",\"/b\")",
            "fs.makedirs(\"/b/c/d\")",
            "fd1 = fs.open(\"/a/b\",\"w\")",
            "fs.mkdir(\"/a/b\")",
            "fs.makedirs(\"/a/b\")",
        ]);
        for p in [
            "branch:rename_into_self",
            "branch:rename_same",
            "branch:rename_missing_src",
            "branch:rename_no_parent",
            "branch:rename_dest_not_empty",
            "branch:rename_dir",
            "branch:rename_dir_onto_file",
            "branch:rename_file_onto_dir",
            "branch:rename_replace_dir",
            "branch:rename_replace_file",
            "branch:symlink_exists",
            "branch:symlink_ok",
            "branch:symlink_dangling",
            "branch:symlink_no_parent",
            "branch:rename_symlink",
            "branch:resolve_symlink",
            "branch:remove_symlink",
            "branch:rmdir_not_dir",
            "branch:mkdir_parent_not_dir",
            "branch:makedirs_through_file",
        ] {
            assert!(has(&cov, p), "{p}");
        }
    }

    #[test]
    fn self_link_loops() {
        let cov = cover(&["fs.symlink(\"/a\",\"/a\")", "fd0 = fs.open(\"/a\",\"r\")"]);
        assert!(has(&cov, "branch:resolve_loop"));
        assert!(has(&cov, "branch:symlink_dangling"));
    }
}
