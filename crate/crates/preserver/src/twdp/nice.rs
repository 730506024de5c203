//! Nice tree decompositions: typed nodes with empty root and leaf bags,
//! joins binarized, and every graph edge introduced at exactly one
//! introduce-edge node.

use std::collections::BTreeSet;

use crate::error::Result;
use crate::graph::Graph;
use crate::twdp::TreeDecomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Leaf,
    IntroduceVertex(u32),
    IntroduceEdge(u32, u32),
    Forget(u32),
    Join,
}

#[derive(Debug, Clone)]
pub struct NiceNode {
    pub kind: NodeKind,
    /// Sorted bag of this node.
    pub bag: Vec<u32>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct NiceTreeDecomposition {
    pub nodes: Vec<NiceNode>,
    pub root: usize,
    pub width: usize,
}

impl NiceTreeDecomposition {
    /// Node indices in postorder (children before parents).
    pub fn postorder(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((u, expanded)) = stack.pop() {
            if expanded {
                out.push(u);
            } else {
                stack.push((u, true));
                for &c in &self.nodes[u].children {
                    stack.push((c, false));
                }
            }
        }
        out
    }

    pub fn count_kind(&self, f: impl Fn(&NodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| f(&n.kind)).count()
    }
}

struct Builder {
    nodes: Vec<NiceNode>,
}

impl Builder {
    fn push(&mut self, kind: NodeKind, bag: Vec<u32>, children: Vec<usize>) -> usize {
        self.nodes.push(NiceNode { kind, bag, children });
        self.nodes.len() - 1
    }

    /// Chain from an empty leaf introducing every vertex of `bag`.
    fn leaf_chain(&mut self, bag: &[u32]) -> usize {
        let mut cur = self.push(NodeKind::Leaf, Vec::new(), Vec::new());
        let mut acc: Vec<u32> = Vec::new();
        for &v in bag {
            acc.push(v);
            cur = self.push(NodeKind::IntroduceVertex(v), acc.clone(), vec![cur]);
        }
        cur
    }

    /// Adapts a subtree whose top bag is `from` into the bag `to`:
    /// forgets of `from \ to`, then introduces of `to \ from`.
    fn adapt(&mut self, mut top: usize, from: &[u32], to: &[u32]) -> usize {
        let from_set: BTreeSet<u32> = from.iter().copied().collect();
        let to_set: BTreeSet<u32> = to.iter().copied().collect();
        let mut acc: Vec<u32> = from.to_vec();
        for &v in from_set.difference(&to_set) {
            acc.retain(|&x| x != v);
            top = self.push(NodeKind::Forget(v), acc.clone(), vec![top]);
        }
        for &v in to_set.difference(&from_set) {
            acc.push(v);
            acc.sort_unstable();
            top = self.push(NodeKind::IntroduceVertex(v), acc.clone(), vec![top]);
        }
        debug_assert_eq!(acc, to);
        top
    }
}

/// Converts a rooted tree decomposition into a nice one over `g`.
///
/// Each edge of `g` is assigned to exactly one introduce-edge node: walking
/// bottom-up, the chain sits directly below the forget node of whichever
/// endpoint is forgotten first, where both endpoints are still in the bag.
pub fn make_nice(td: &TreeDecomposition, g: &Graph) -> Result<NiceTreeDecomposition> {
    td.validate(g)?;
    let nb = td.bags.len();
    let mut tree_adj = vec![Vec::new(); nb];
    for &(a, b) in &td.edges {
        tree_adj[a].push(b);
        tree_adj[b].push(a);
    }

    let mut builder = Builder { nodes: Vec::new() };
    // Iterative postorder over the input tree rooted at 0.
    let mut order = Vec::with_capacity(nb);
    let mut parent = vec![usize::MAX; nb];
    let mut stack = vec![0usize];
    let mut seen = vec![false; nb];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        order.push(u);
        for &v in &tree_adj[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = u;
                stack.push(v);
            }
        }
    }

    let mut built: Vec<Option<usize>> = vec![None; nb];
    for &t in order.iter().rev() {
        let bag = &td.bags[t];
        let children: Vec<usize> = tree_adj[t]
            .iter()
            .copied()
            .filter(|&c| parent[c] == t)
            .collect();
        let top = if children.is_empty() {
            builder.leaf_chain(bag)
        } else {
            let mut acc: Option<usize> = None;
            for &c in &children {
                let sub = built[c].expect("postorder");
                let adapted = builder.adapt(sub, &td.bags[c], bag);
                acc = Some(match acc {
                    None => adapted,
                    Some(left) => builder.push(NodeKind::Join, bag.clone(), vec![left, adapted]),
                });
            }
            acc.unwrap()
        };
        built[t] = Some(top);
    }

    // Forget the root bag down to the empty root.
    let mut top = built[0].unwrap();
    let mut acc = td.bags[0].clone();
    for &v in td.bags[0].clone().iter() {
        acc.retain(|&x| x != v);
        top = builder.push(NodeKind::Forget(v), acc.clone(), vec![top]);
    }

    let mut ntd = NiceTreeDecomposition {
        root: top,
        width: td.width(),
        nodes: builder.nodes,
    };
    insert_edge_nodes(&mut ntd, g);
    assert_eq!(
        ntd.count_kind(|k| matches!(k, NodeKind::IntroduceEdge(_, _))),
        g.m(),
        "every edge introduced exactly once"
    );
    Ok(ntd)
}

/// Inserts the introduce-edge chains below forget nodes.
fn insert_edge_nodes(ntd: &mut NiceTreeDecomposition, g: &Graph) {
    let mut assigned: BTreeSet<(u32, u32)> = BTreeSet::new();
    // Process nodes bottom-up so an edge lands at the lowest eligible
    // forget; postorder indices stay valid because we only splice between
    // a node and its child.
    for idx in ntd.postorder() {
        let NodeKind::Forget(v) = ntd.nodes[idx].kind else {
            continue;
        };
        let child = ntd.nodes[idx].children[0];
        let child_bag = ntd.nodes[child].bag.clone();
        let mut cur = child;
        for &u in g.neighbors(v) {
            if child_bag.binary_search(&u).is_err() {
                continue;
            }
            let key = (v.min(u), v.max(u));
            if !assigned.insert(key) {
                continue;
            }
            ntd.nodes.push(NiceNode {
                kind: NodeKind::IntroduceEdge(key.0, key.1),
                bag: child_bag.clone(),
                children: vec![cur],
            });
            cur = ntd.nodes.len() - 1;
        }
        ntd.nodes[idx].children = vec![cur];
    }
}
