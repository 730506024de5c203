//! Shared helpers for the integration suites: an independent DFS
//! enumeration of shortest-path edges and a Demoucron planarity test.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use preserver::{Edge, Graph, UNREACHABLE};

/// Every edge on at least one shortest path of some pair, found by
/// explicit DFS enumeration of all shortest paths. Independent of
/// `shortest_path_edge_union`.
pub fn shortest_path_edges_by_dfs(g: &Graph, pairs: &[Edge]) -> Vec<Edge> {
    let mut out = BTreeSet::new();
    for &(p, q) in pairs {
        let dist = g.bfs(p);
        if dist[q as usize] == UNREACHABLE {
            continue;
        }
        // Walk backwards from q along strictly decreasing levels.
        let mut stack = vec![(q, vec![q])];
        while let Some((v, path)) = stack.pop() {
            if v == p {
                for w in path.windows(2) {
                    out.insert((w[0].min(w[1]), w[0].max(w[1])));
                }
                continue;
            }
            for &u in g.neighbors(v) {
                if dist[u as usize] + 1 == dist[v as usize] {
                    let mut next = path.clone();
                    next.push(u);
                    stack.push((u, next));
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Suppresses degree-2 vertices whenever doing so keeps the graph simple;
/// the result is homeomorphic to the input, so planarity is unchanged.
pub fn smooth(g: &Graph) -> Graph {
    let mut adj: Vec<BTreeSet<u32>> = (0..g.n())
        .map(|v| g.neighbors(v as u32).iter().copied().collect())
        .collect();
    let mut alive: Vec<bool> = vec![true; g.n()];
    loop {
        let mut changed = false;
        for v in 0..g.n() {
            if !alive[v] || adj[v].len() != 2 {
                continue;
            }
            let mut it = adj[v].iter();
            let a = *it.next().unwrap();
            let b = *it.next().unwrap();
            if a == b || adj[a as usize].contains(&b) {
                continue;
            }
            adj[a as usize].remove(&(v as u32));
            adj[b as usize].remove(&(v as u32));
            adj[a as usize].insert(b);
            adj[b as usize].insert(a);
            adj[v].clear();
            alive[v] = false;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    let mut remap = BTreeMap::new();
    for v in 0..g.n() {
        if alive[v] {
            let id = remap.len() as u32;
            remap.insert(v as u32, id);
        }
    }
    let mut out = Graph::new(remap.len());
    for v in 0..g.n() {
        if alive[v] {
            for &u in &adj[v] {
                if (v as u32) < u {
                    out.add_edge(remap[&(v as u32)], remap[&u]).unwrap();
                }
            }
        }
    }
    out
}

/// Planarity by blocks: a graph is planar iff each biconnected component
/// is. Cheap Euler filters first, Demoucron's face-embedding algorithm on
/// each block.
pub fn is_planar(g: &Graph) -> bool {
    if g.m() < 9 {
        return true;
    }
    if g.n() >= 3 && g.m() > 3 * g.n() - 6 {
        return false;
    }
    blocks(g).iter().all(|b| demoucron_planar(b))
}

/// Biconnected components as edge lists (Hopcroft–Tarjan).
fn blocks(g: &Graph) -> Vec<Vec<Edge>> {
    let n = g.n();
    let mut num = vec![0usize; n];
    let mut low = vec![0usize; n];
    let mut counter = 0usize;
    let mut stack: Vec<Edge> = Vec::new();
    let mut out = Vec::new();

    // Iterative DFS with explicit frames.
    for root in 0..n as u32 {
        if num[root as usize] != 0 {
            continue;
        }
        let mut frames: Vec<(u32, u32, usize)> = vec![(root, u32::MAX, 0)];
        counter += 1;
        num[root as usize] = counter;
        low[root as usize] = counter;
        while let Some(&mut (v, parent, ref mut idx)) = frames.last_mut() {
            let nbrs = g.neighbors(v);
            if *idx < nbrs.len() {
                let u = nbrs[*idx];
                *idx += 1;
                if num[u as usize] == 0 {
                    stack.push((v.min(u), v.max(u)));
                    counter += 1;
                    num[u as usize] = counter;
                    low[u as usize] = counter;
                    frames.push((u, v, 0));
                } else if u != parent && num[u as usize] < num[v as usize] {
                    stack.push((v.min(u), v.max(u)));
                    low[v as usize] = low[v as usize].min(num[u as usize]);
                }
            } else {
                frames.pop();
                if let Some(&mut (p, _, _)) = frames.last_mut() {
                    low[p as usize] = low[p as usize].min(low[v as usize]);
                    if low[v as usize] >= num[p as usize] {
                        // p is an articulation point (or root edge); pop
                        // the block.
                        let mut block = Vec::new();
                        while let Some(&e) = stack.last() {
                            block.push(e);
                            stack.pop();
                            if e == (p.min(v), p.max(v)) {
                                break;
                            }
                        }
                        if !block.is_empty() {
                            out.push(block);
                        }
                    }
                }
            }
        }
    }
    out
}

/// Demoucron's planarity algorithm on one biconnected block.
fn demoucron_planar(block_edges: &[Edge]) -> bool {
    // Remap to dense ids.
    let mut ids = BTreeMap::new();
    for &(u, v) in block_edges {
        let next = ids.len() as u32;
        ids.entry(u).or_insert(next);
        let next = ids.len() as u32;
        ids.entry(v).or_insert(next);
    }
    let n = ids.len();
    let m = block_edges.len();
    if n < 5 || m < 9 {
        return true;
    }
    if m > 3 * n - 6 {
        return false;
    }
    let edges: Vec<Edge> = block_edges
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (ids[&u], ids[&v]);
            (a.min(b), a.max(b))
        })
        .collect();
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(u, v) in &edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }

    // Initial cycle by walking until a vertex repeats.
    let cycle = {
        let mut prev = u32::MAX;
        let mut cur = 0u32;
        let mut seen_at: BTreeMap<u32, usize> = BTreeMap::new();
        let mut walk = Vec::new();
        loop {
            if let Some(&at) = seen_at.get(&cur) {
                walk.drain(..at);
                break walk;
            }
            seen_at.insert(cur, walk.len());
            walk.push(cur);
            let next = *adj[cur as usize]
                .iter()
                .find(|&&x| x != prev)
                .expect("min degree 2 in a block");
            prev = cur;
            cur = next;
        }
    };

    let mut emb_v: BTreeSet<u32> = cycle.iter().copied().collect();
    let mut emb_e: BTreeSet<Edge> = BTreeSet::new();
    for w in cycle.windows(2) {
        emb_e.insert((w[0].min(w[1]), w[0].max(w[1])));
    }
    let (a, b) = (cycle[0], *cycle.last().unwrap());
    emb_e.insert((a.min(b), a.max(b)));
    let mut faces: Vec<Vec<u32>> = vec![cycle.clone(), cycle.iter().rev().copied().collect()];

    while emb_e.len() < m {
        // Fragments: chords between embedded vertices, and components of
        // unembedded vertices with their attachment edges.
        struct Fragment {
            attachments: Vec<u32>,
            interior: Vec<u32>,
            chord: Option<Edge>,
        }
        let mut fragments: Vec<Fragment> = Vec::new();
        for &(u, v) in &edges {
            if !emb_e.contains(&(u, v)) && emb_v.contains(&u) && emb_v.contains(&v) {
                fragments.push(Fragment {
                    attachments: vec![u, v],
                    interior: Vec::new(),
                    chord: Some((u, v)),
                });
            }
        }
        let mut assigned: BTreeSet<u32> = BTreeSet::new();
        for v in 0..n as u32 {
            if emb_v.contains(&v) || assigned.contains(&v) {
                continue;
            }
            let mut interior = vec![v];
            let mut attach = BTreeSet::new();
            let mut queue = VecDeque::from([v]);
            assigned.insert(v);
            while let Some(x) = queue.pop_front() {
                for &y in &adj[x as usize] {
                    if emb_v.contains(&y) {
                        attach.insert(y);
                    } else if assigned.insert(y) {
                        interior.push(y);
                        queue.push_back(y);
                    }
                }
            }
            fragments.push(Fragment {
                attachments: attach.into_iter().collect(),
                interior,
                chord: None,
            });
        }
        if fragments.is_empty() {
            return true;
        }

        // Admissible faces must contain all attachments on the boundary.
        let admissible = |f: &Fragment| -> Vec<usize> {
            faces
                .iter()
                .enumerate()
                .filter(|(_, face)| {
                    let set: BTreeSet<u32> = face.iter().copied().collect();
                    f.attachments.iter().all(|a| set.contains(a))
                })
                .map(|(i, _)| i)
                .collect()
        };
        let mut pick = 0usize;
        let mut pick_adm = admissible(&fragments[0]);
        for (i, f) in fragments.iter().enumerate().skip(1) {
            let adm = admissible(f);
            if adm.len() < pick_adm.len() {
                pick = i;
                pick_adm = adm;
            }
        }
        if pick_adm.is_empty() {
            return false;
        }
        let frag = &fragments[pick];
        let face_idx = pick_adm[0];

        // A path through the fragment between two distinct attachments.
        let path: Vec<u32> = if let Some((u, v)) = frag.chord {
            vec![u, v]
        } else {
            let interior: BTreeSet<u32> = frag.interior.iter().copied().collect();
            let start = frag.attachments[0];
            let goal = frag.attachments[1];
            let mut parent: BTreeMap<u32, u32> = BTreeMap::new();
            let mut queue = VecDeque::from([start]);
            let mut found = false;
            'bfs: while let Some(x) = queue.pop_front() {
                for &y in &adj[x as usize] {
                    // The path must pass through the fragment interior; a
                    // direct start-goal edge is a separate chord fragment.
                    if y == goal && x != start && interior.contains(&x) {
                        parent.insert(y, x);
                        found = true;
                        break 'bfs;
                    }
                    if interior.contains(&y) && !parent.contains_key(&y) {
                        parent.insert(y, x);
                        queue.push_back(y);
                    }
                }
            }
            assert!(found, "fragment connects its attachments");
            let mut path = vec![goal];
            let mut cur = goal;
            while cur != start {
                cur = parent[&cur];
                path.push(cur);
            }
            path.reverse();
            path
        };

        // Embed the path, splitting the chosen face.
        for w in path.windows(2) {
            emb_e.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
        for &x in &path {
            emb_v.insert(x);
        }
        let face = faces.swap_remove(face_idx);
        let ia = face.iter().position(|&x| x == path[0]).unwrap();
        let ib = face.iter().position(|&x| x == *path.last().unwrap()).unwrap();
        let len = face.len();
        // Arc from path start to path end along the face, and the
        // complementary arc.
        let mut arc1 = Vec::new();
        let mut i = ia;
        loop {
            arc1.push(face[i]);
            if i == ib {
                break;
            }
            i = (i + 1) % len;
        }
        let mut arc2 = Vec::new();
        let mut i = ib;
        loop {
            arc2.push(face[i]);
            if i == ia {
                break;
            }
            i = (i + 1) % len;
        }
        let interior_fwd: Vec<u32> = path[1..path.len() - 1].to_vec();
        let interior_rev: Vec<u32> = path[1..path.len() - 1].iter().rev().copied().collect();
        let mut f1 = arc1.clone();
        f1.extend(interior_rev);
        let mut f2 = arc2.clone();
        f2.extend(interior_fwd);
        faces.push(f1);
        faces.push(f2);
    }
    true
}

#[allow(dead_code)]
pub fn complete_graph(n: usize) -> Graph {
    let mut g = Graph::new(n);
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

#[allow(dead_code)]
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let mut g = Graph::new(a + b);
    for u in 0..a as u32 {
        for v in 0..b as u32 {
            g.add_edge(u, a as u32 + v).unwrap();
        }
    }
    g
}
