//! AVL tree SUT: three integer variables over the constants 0..=19 and two
//! tree variables with insert, delete, find and display.
//!
//! Every branch and statement site of the tree is instrumented by hand. With
//! fault injection on, deleting a node that has two children fails instead
//! of splicing in the in-order successor.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use super::{ActionKind, CoveragePoint, Grammar, Hits, StepOutcome, Sut, SutError, SutState};
use crate::corpus::ActionText;

pub const INT_VARS: usize = 3;
pub const TREE_VARS: usize = 2;
pub const MAX_CONSTANT: u32 = 19;

pub const POINTS: &[&str] = &[
    "branch:assign_fresh",
    "branch:assign_rebind",
    "branch:delete_empty",
    "branch:delete_leaf",
    "branch:delete_left",
    "branch:delete_missing",
    "branch:delete_only_left",
    "branch:delete_only_right",
    "branch:delete_right",
    "branch:delete_two_children",
    "branch:display_empty",
    "branch:display_nonempty",
    "branch:find_hit",
    "branch:find_left",
    "branch:find_miss",
    "branch:find_right",
    "branch:insert_duplicate",
    "branch:insert_empty",
    "branch:insert_left",
    "branch:insert_right",
    "branch:new_tree_fresh",
    "branch:new_tree_replace",
    "branch:rebalance_ll",
    "branch:rebalance_ll_even",
    "branch:rebalance_lr",
    "branch:rebalance_rl",
    "branch:rebalance_rr",
    "branch:rebalance_rr_even",
    "branch:successor_descend",
    "branch:successor_immediate",
    "stmt:assign_int",
    "stmt:delete_entry",
    "stmt:display_entry",
    "stmt:display_node",
    "stmt:find_entry",
    "stmt:insert_entry",
    "stmt:new_node",
    "stmt:new_tree",
    "stmt:rotate_left",
    "stmt:rotate_right",
    "stmt:take_min",
    "stmt:unlink_node",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Insert,
    Delete,
    Find,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AvlAction {
    Assign {
        var: usize,
        value: u32,
    },
    NewTree {
        tree: usize,
    },
    Call {
        tree: usize,
        method: Method,
        var: usize,
    },
    Display {
        tree: usize,
    },
}

impl AvlAction {
    fn render(self) -> String {
        match self {
            AvlAction::Assign { var, value } => format!("int{var} = {value}"),
            AvlAction::NewTree { tree } => format!("avl{tree} = avl.AVLTree()"),
            AvlAction::Call { tree, method, var } => {
                let m = match method {
                    Method::Insert => "insert",
                    Method::Delete => "delete",
                    Method::Find => "find",
                };
                format!("avl{tree}.{m}(int{var})")
            }
            AvlAction::Display { tree } => format!("avl{tree}.display()"),
        }
    }
}

fn grammar_entries() -> Vec<(String, AvlAction)> {
    let mut out = Vec::new();
    for var in 0..INT_VARS {
        for value in 0..=MAX_CONSTANT {
            out.push(AvlAction::Assign { var, value });
        }
    }
    for tree in 0..TREE_VARS {
        out.push(AvlAction::NewTree { tree });
    }
    for tree in 0..TREE_VARS {
        for method in [Method::Insert, Method::Delete, Method::Find] {
            for var in 0..INT_VARS {
                out.push(AvlAction::Call { tree, method, var });
            }
        }
        out.push(AvlAction::Display { tree });
    }
    out.into_iter().map(|a| (a.render(), a)).collect()
}

pub struct AvlSut {
    grammar: Grammar<AvlAction>,
    points: Vec<CoveragePoint>,
}

impl AvlSut {
    pub fn get() -> &'static AvlSut {
        static INSTANCE: OnceLock<AvlSut> = OnceLock::new();
        INSTANCE.get_or_init(|| AvlSut {
            grammar: Grammar::new(grammar_entries()),
            points: POINTS.iter().map(|p| CoveragePoint::new(*p)).collect(),
        })
    }
}

impl Sut for AvlSut {
    fn id(&self) -> &'static str {
        "avl"
    }

    fn list_actions(&self) -> &[ActionText] {
        &self.grammar.actions
    }

    fn coverage_points(&self) -> &[CoveragePoint] {
        &self.points
    }

    fn new_state(&self, fault_injection: bool) -> Box<dyn SutState + '_> {
        Box::new(AvlState {
            sut: self,
            ints: [None; INT_VARS],
            trees: Default::default(),
            fault_injection,
        })
    }

    fn variable_families(&self) -> &'static [(&'static str, usize)] {
        &[("int", INT_VARS), ("avl", TREE_VARS)]
    }

    fn max_constant(&self) -> Option<u32> {
        Some(MAX_CONSTANT)
    }

    fn assigned_constant(&self, a: &ActionText) -> Option<u32> {
        match self.grammar.index.get(a.as_str()) {
            Some(AvlAction::Assign { value, .. }) => Some(*value),
            _ => None,
        }
    }

    fn with_constant(&self, a: &ActionText, value: u32) -> Option<ActionText> {
        match self.grammar.index.get(a.as_str()) {
            Some(AvlAction::Assign { var, .. }) if value <= MAX_CONSTANT => {
                ActionText::new(AvlAction::Assign { var: *var, value }.render()).ok()
            }
            _ => None,
        }
    }

    fn kinds(&self) -> &BTreeSet<ActionKind> {
        &self.grammar.kinds
    }
}

type Link = Option<Box<Node>>;

#[derive(Clone, Debug)]
struct Node {
    key: u32,
    height: i32,
    left: Link,
    right: Link,
}

fn height(link: &Link) -> i32 {
    link.as_ref().map_or(0, |n| n.height)
}

fn balance(n: &Node) -> i32 {
    height(&n.left) - height(&n.right)
}

impl Node {
    fn leaf(key: u32) -> Box<Node> {
        Box::new(Node {
            key,
            height: 1,
            left: None,
            right: None,
        })
    }

    fn update(&mut self) {
        self.height = 1 + height(&self.left).max(height(&self.right));
    }
}

fn rotate_right(mut n: Box<Node>, hits: &mut Hits) -> Box<Node> {
    hits.hit("stmt:rotate_right");
    let mut l = n.left.take().expect("rotate_right needs a left child");
    n.left = l.right.take();
    n.update();
    l.right = Some(n);
    l.update();
    l
}

fn rotate_left(mut n: Box<Node>, hits: &mut Hits) -> Box<Node> {
    hits.hit("stmt:rotate_left");
    let mut r = n.right.take().expect("rotate_left needs a right child");
    n.right = r.left.take();
    n.update();
    r.left = Some(n);
    r.update();
    r
}

fn rebalance(mut n: Box<Node>, hits: &mut Hits) -> Box<Node> {
    n.update();
    let bf = balance(&n);
    if bf > 1 {
        let lb = n.left.as_deref().map_or(0, balance);
        if lb > 0 {
            hits.hit("branch:rebalance_ll");
        } else if lb == 0 {
            hits.hit("branch:rebalance_ll_even");
        } else {
            hits.hit("branch:rebalance_lr");
            n.left = n.left.take().map(|l| rotate_left(l, hits));
        }
        rotate_right(n, hits)
    } else if bf < -1 {
        let rb = n.right.as_deref().map_or(0, balance);
        if rb < 0 {
            hits.hit("branch:rebalance_rr");
        } else if rb == 0 {
            hits.hit("branch:rebalance_rr_even");
        } else {
            hits.hit("branch:rebalance_rl");
            n.right = n.right.take().map(|r| rotate_right(r, hits));
        }
        rotate_left(n, hits)
    } else {
        n
    }
}

fn insert(link: Link, key: u32, hits: &mut Hits) -> Box<Node> {
    match link {
        None => {
            hits.hit("stmt:new_node");
            Node::leaf(key)
        }
        Some(mut n) => {
            if key < n.key {
                hits.hit("branch:insert_left");
                n.left = Some(insert(n.left.take(), key, hits));
            } else if key > n.key {
                hits.hit("branch:insert_right");
                n.right = Some(insert(n.right.take(), key, hits));
            } else {
                hits.hit("branch:insert_duplicate");
                return n;
            }
            rebalance(n, hits)
        }
    }
}

/// Detach the minimum of a non-empty subtree, returning (rest, min key).
fn take_min(mut n: Box<Node>, hits: &mut Hits) -> (Link, u32) {
    hits.hit("stmt:take_min");
    match n.left.take() {
        None => (n.right.take(), n.key),
        Some(l) => {
            let (rest, key) = take_min(l, hits);
            n.left = rest;
            (Some(rebalance(n, hits)), key)
        }
    }
}

struct InjectedFault(String);

fn delete(link: Link, key: u32, fault: bool, hits: &mut Hits) -> Result<Link, InjectedFault> {
    let Some(mut n) = link else {
        hits.hit("branch:delete_missing");
        return Ok(None);
    };
    if key < n.key {
        hits.hit("branch:delete_left");
        n.left = delete(n.left.take(), key, fault, hits)?;
    } else if key > n.key {
        hits.hit("branch:delete_right");
        n.right = delete(n.right.take(), key, fault, hits)?;
    } else {
        hits.hit("stmt:unlink_node");
        match (n.left.take(), n.right.take()) {
            (None, None) => {
                hits.hit("branch:delete_leaf");
                return Ok(None);
            }
            (Some(l), None) => {
                hits.hit("branch:delete_only_left");
                return Ok(Some(l));
            }
            (None, Some(r)) => {
                hits.hit("branch:delete_only_right");
                return Ok(Some(r));
            }
            (Some(l), Some(r)) => {
                hits.hit("branch:delete_two_children");
                if fault {
                    return Err(InjectedFault(format!(
                        "AssertionError: lost subtree while deleting {key}"
                    )));
                }
                if r.left.is_some() {
                    hits.hit("branch:successor_descend");
                } else {
                    hits.hit("branch:successor_immediate");
                }
                let (rest, successor) = take_min(r, hits);
                n.key = successor;
                n.left = Some(l);
                n.right = rest;
            }
        }
    }
    Ok(Some(rebalance(n, hits)))
}

fn in_order(link: &Link, out: &mut Vec<u32>, hits: &mut Hits) {
    if let Some(n) = link {
        in_order(&n.left, out, hits);
        hits.hit("stmt:display_node");
        out.push(n.key);
        in_order(&n.right, out, hits);
    }
}

#[derive(Clone, Debug, Default)]
struct Tree {
    root: Link,
}

struct AvlState<'a> {
    sut: &'a AvlSut,
    ints: [Option<u32>; INT_VARS],
    trees: [Option<Tree>; TREE_VARS],
    fault_injection: bool,
}

impl SutState for AvlState<'_> {
    fn enabled(&self, a: &ActionText) -> Result<bool, SutError> {
        Ok(match *self.sut.grammar.lookup("avl", a)? {
            AvlAction::Assign { .. } | AvlAction::NewTree { .. } => true,
            AvlAction::Call { tree, var, .. } => {
                self.trees[tree].is_some() && self.ints[var].is_some()
            }
            AvlAction::Display { tree } => self.trees[tree].is_some(),
        })
    }

    fn execute(&mut self, a: &ActionText) -> Result<StepOutcome, SutError> {
        if !self.enabled(a)? {
            return Err(SutError::Disabled {
                action: a.to_string(),
            });
        }
        let mut hits = Hits::default();
        let mut failure = None;
        match *self.sut.grammar.lookup("avl", a)? {
            AvlAction::Assign { var, value } => {
                hits.hit("stmt:assign_int");
                hits.hit(if self.ints[var].is_some() {
                    "branch:assign_rebind"
                } else {
                    "branch:assign_fresh"
                });
                self.ints[var] = Some(value);
            }
            AvlAction::NewTree { tree } => {
                hits.hit("stmt:new_tree");
                hits.hit(if self.trees[tree].is_some() {
                    "branch:new_tree_replace"
                } else {
                    "branch:new_tree_fresh"
                });
                self.trees[tree] = Some(Tree::default());
            }
            AvlAction::Call { tree, method, var } => {
                let key = self.ints[var].expect("enabled");
                let t = self.trees[tree].as_mut().expect("enabled");
                match method {
                    Method::Insert => {
                        hits.hit("stmt:insert_entry");
                        if t.root.is_none() {
                            hits.hit("branch:insert_empty");
                        }
                        t.root = Some(insert(t.root.take(), key, &mut hits));
                    }
                    Method::Delete => {
                        hits.hit("stmt:delete_entry");
                        if t.root.is_none() {
                            hits.hit("branch:delete_empty");
                        } else {
                            let saved = t.root.clone();
                            match delete(t.root.take(), key, self.fault_injection, &mut hits) {
                                Ok(root) => t.root = root,
                                Err(InjectedFault(msg)) => {
                                    t.root = saved;
                                    failure = Some(msg);
                                }
                            }
                        }
                    }
                    Method::Find => {
                        hits.hit("stmt:find_entry");
                        let mut cur = &t.root;
                        loop {
                            match cur {
                                None => {
                                    hits.hit("branch:find_miss");
                                    break;
                                }
                                Some(n) if key < n.key => {
                                    hits.hit("branch:find_left");
                                    cur = &n.left;
                                }
                                Some(n) if key > n.key => {
                                    hits.hit("branch:find_right");
                                    cur = &n.right;
                                }
                                Some(_) => {
                                    hits.hit("branch:find_hit");
                                    break;
                                }
                            }
                        }
                    }
                }
            }
            AvlAction::Display { tree } => {
                hits.hit("stmt:display_entry");
                let t = self.trees[tree].as_ref().expect("enabled");
                if t.root.is_none() {
                    hits.hit("branch:display_empty");
                } else {
                    hits.hit("branch:display_nonempty");
                    let mut keys = Vec::new();
                    in_order(&t.root, &mut keys, &mut hits);
                }
            }
        }
        Ok(StepOutcome {
            touched: hits.into_coverage(),
            failure,
        })
    }

    fn reset(&mut self) {
        self.ints = [None; INT_VARS];
        self.trees = Default::default();
    }
}
