use std::collections::HashSet;
use std::fmt::Write as _;

use super::PriceMachine;
use crate::error::{Error, Result};

/// Largest depth `price_tree` and `check_consistent` will enumerate.
pub const MAX_TREE_DEPTH: usize = 20;

/// One node of the decision tree generated by a seller machine.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceTreeNode {
    pub id: usize,
    pub price: f64,
    /// Level of the node, root at 1. For [`price_tree`] this is the round
    /// at which the price is offered.
    pub round: usize,
    pub accept_child: Option<usize>,
    pub reject_child: Option<usize>,
    /// `p(accept child) - p(node)`.
    pub delta_right: Option<f64>,
    /// `max over the reject subtree of p(node) - p(n')`.
    pub delta_left: Option<f64>,
    /// Decisions leading from the root to this node.
    pub path: Vec<bool>,
}

/// Full decision tree of a machine, one node per round or per decision
/// node.
#[derive(Clone, Debug)]
pub struct PriceTree {
    nodes: Vec<PriceTreeNode>,
    distinct_states: usize,
}

impl PriceTree {
    pub fn root(&self) -> &PriceTreeNode {
        &self.nodes[0]
    }

    pub fn nodes(&self) -> &[PriceTreeNode] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &PriceTreeNode {
        &self.nodes[id]
    }

    /// Follow `path` from the root.
    pub fn find(&self, path: &[bool]) -> Option<&PriceTreeNode> {
        let mut node = self.root();
        for &accepted in path {
            let next = if accepted {
                node.accept_child
            } else {
                node.reject_child
            };
            node = &self.nodes[next?];
        }
        Some(node)
    }

    /// Number of distinct canonical (state, round) pairs among the nodes.
    pub fn distinct_states(&self) -> usize {
        self.distinct_states
    }

    /// Indented dump, accept branch (`+`) before reject branch (`-`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        self.write_text(0, 0, "", &mut out);
        out
    }

    fn write_text(&self, id: usize, indent: usize, edge: &str, out: &mut String) {
        let n = &self.nodes[id];
        let _ = write!(out, "{:width$}{edge}t={} p={}", "", n.round, n.price, width = indent * 2);
        if let Some(d) = n.delta_right {
            let _ = write!(out, " dr={d}");
        }
        if let Some(d) = n.delta_left {
            let _ = write!(out, " dl={d}");
        }
        out.push('\n');
        if let Some(c) = n.accept_child {
            self.write_text(c, indent + 1, "+ ", out);
        }
        if let Some(c) = n.reject_child {
            self.write_text(c, indent + 1, "- ", out);
        }
    }

    /// Graphviz rendering; accept edges solid, reject edges dashed.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph price_tree {\n  node [shape=circle];\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, n.price);
        }
        for n in &self.nodes {
            if let Some(c) = n.accept_child {
                let _ = writeln!(out, "  n{} -> n{} [label=\"accept\"];", n.id, c);
            }
            if let Some(c) = n.reject_child {
                let _ = writeln!(out, "  n{} -> n{} [label=\"reject\", style=dashed];", n.id, c);
            }
        }
        out.push_str("}\n");
        out
    }
}

fn guard(depth: usize) -> Result<()> {
    if depth > MAX_TREE_DEPTH {
        return Err(Error::TooLarge {
            what: "price tree enumeration",
            requested: depth,
            limit: MAX_TREE_DEPTH,
        });
    }
    if depth == 0 {
        return Err(Error::Parameter("tree depth must be at least 1".into()));
    }
    Ok(())
}

/// Enumerate every accept/reject sequence of length `depth - 1` and record
/// the prices the machine offers along the way.
pub fn price_tree<M: PriceMachine>(seller: &M, depth: usize) -> Result<PriceTree> {
    build_tree(seller, depth, false)
}

/// Tree of decision nodes: the rounds of a penalty are folded into the
/// rejection that triggered them, so each node is a distinct price decision
/// and its reject child is the node reached once the penalty has run out.
/// For machines without penalties this equals [`price_tree`].
pub fn node_tree<M: PriceMachine>(seller: &M, depth: usize) -> Result<PriceTree> {
    build_tree(seller, depth, true)
}

fn settle<M: PriceMachine>(mut machine: M) -> M {
    while !machine.at_fresh_node() && machine.frozen_price().is_none() {
        machine.advance(false);
    }
    machine
}

fn build_tree<M: PriceMachine>(seller: &M, depth: usize, fold_penalties: bool) -> Result<PriceTree> {
    guard(depth)?;
    let mut nodes: Vec<PriceTreeNode> = Vec::with_capacity((1 << depth) - 1);
    let mut seen = HashSet::new();
    // Depth-first, iterative: (machine, parent, is-accept-edge, round, path).
    let mut stack: Vec<(M, Option<(usize, bool)>, usize, Vec<bool>)> =
        vec![(seller.clone(), None, 1, Vec::new())];
    while let Some((machine, parent, round, path)) = stack.pop() {
        let id = nodes.len();
        if let Some(key) = machine.state_key() {
            seen.insert((key, round));
        }
        nodes.push(PriceTreeNode {
            id,
            price: machine.quote(),
            round,
            accept_child: None,
            reject_child: None,
            delta_right: None,
            delta_left: None,
            path: path.clone(),
        });
        if let Some((p, accepted)) = parent {
            if accepted {
                nodes[p].accept_child = Some(id);
            } else {
                nodes[p].reject_child = Some(id);
            }
        }
        if round < depth {
            for accepted in [false, true] {
                let mut child = machine.clone();
                child.advance(accepted);
                if fold_penalties {
                    child = settle(child);
                }
                let mut child_path = path.clone();
                child_path.push(accepted);
                stack.push((child, Some((id, accepted)), round + 1, child_path));
            }
        }
    }

    let (min, _) = subtree_extrema(&nodes);
    for id in 0..nodes.len() {
        let price = nodes[id].price;
        nodes[id].delta_right = nodes[id].accept_child.map(|c| nodes[c].price - price);
        nodes[id].delta_left = nodes[id].reject_child.map(|c| price - min[c]);
    }
    Ok(PriceTree {
        nodes,
        distinct_states: seen.len(),
    })
}

// Min and max price over each node's subtree (node included).
fn subtree_extrema(nodes: &[PriceTreeNode]) -> (Vec<f64>, Vec<f64>) {
    let mut min: Vec<f64> = nodes.iter().map(|n| n.price).collect();
    let mut max = min.clone();
    // Children always have larger ids than their parent.
    for id in (0..nodes.len()).rev() {
        for c in [nodes[id].accept_child, nodes[id].reject_child].into_iter().flatten() {
            min[id] = min[id].min(min[c]);
            max[id] = max[id].max(max[c]);
        }
    }
    (min, max)
}

/// A node whose price is out of order with one of its subtrees.
#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyViolation {
    pub path: Vec<bool>,
    pub price: f64,
    /// `"reject"` when a reject-subtree price exceeds the node price,
    /// `"accept"` when an accept-subtree price is below it.
    pub side: &'static str,
    pub offending_price: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub nodes_checked: usize,
    pub violation: Option<ConsistencyViolation>,
}

/// Check `max over reject subtree <= p(n) <= min over accept subtree` at
/// every node of the depth-limited [`node_tree`].
pub fn check_consistent<M: PriceMachine>(seller: &M, depth: usize) -> Result<ConsistencyReport> {
    let tree = node_tree(seller, depth)?;
    let (min, max) = subtree_extrema(&tree.nodes);
    // Walk in id order, which is a depth-first preorder from the root.
    for n in &tree.nodes {
        if let Some(c) = n.reject_child {
            if max[c] > n.price {
                return Ok(ConsistencyReport {
                    consistent: false,
                    nodes_checked: tree.nodes.len(),
                    violation: Some(ConsistencyViolation {
                        path: n.path.clone(),
                        price: n.price,
                        side: "reject",
                        offending_price: max[c],
                    }),
                });
            }
        }
        if let Some(c) = n.accept_child {
            if min[c] < n.price {
                return Ok(ConsistencyReport {
                    consistent: false,
                    nodes_checked: tree.nodes.len(),
                    violation: Some(ConsistencyViolation {
                        path: n.path.clone(),
                        price: n.price,
                        side: "accept",
                        offending_price: min[c],
                    }),
                });
            }
        }
    }
    Ok(ConsistencyReport {
        consistent: true,
        nodes_checked: tree.nodes.len(),
        violation: None,
    })
}

/// Left increment of the node `seller` is positioned at, over a reject
/// subtree spanning `levels` further rounds.
///
/// For a consistent machine every accept subtree sits above its root, so
/// the minimum over a subtree is reached along its all-reject path; this
/// walks that path instead of enumerating the subtree. Returns `None` when
/// `levels` is zero.
pub fn left_increment<M: PriceMachine>(seller: &M, levels: usize) -> Option<f64> {
    if levels == 0 {
        return None;
    }
    let price = seller.quote();
    let mut m = seller.clone();
    m.advance(false);
    let mut lowest = m.quote();
    for _ in 1..levels {
        if let Some(p) = m.frozen_price() {
            lowest = lowest.min(p);
            break;
        }
        m.advance(false);
        lowest = lowest.min(m.quote());
    }
    Some(price - lowest)
}
