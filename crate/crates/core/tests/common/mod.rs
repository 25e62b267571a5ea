//! Shared test oracles, all implemented independently of the library code
//! they cross-check.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use nbp_core::alignment::SiteColumn;
use nbp_core::alphabet::{resolve_alphabet, GapMode};

// ---------------------------------------------------------------- corpus

/// Random column over dna, protein, or morph; gap letters appear as ordinary
/// characters (as-character mode) in roughly a third of the columns.
pub fn random_column(rng: &mut ChaCha12Rng) -> SiteColumn {
    let n = rng.random_range(3..=30);
    let which = rng.random_range(0..3u8);
    let with_gaps = rng.random_range(0..3u8) == 0;
    let alphabet = match which {
        0 => resolve_alphabet("dna", None, GapMode::AsCharacter).unwrap(),
        1 => resolve_alphabet("protein", None, GapMode::AsCharacter).unwrap(),
        _ => {
            let k = rng.random_range(2..=6);
            let syms: Vec<String> = (1..=k).map(|i| i.to_string()).collect();
            resolve_alphabet("morph", Some(&syms), GapMode::AsCharacter).unwrap()
        }
    };
    let alphabet = Arc::new(alphabet);
    let size = alphabet.size() as u16;
    let gap = alphabet.gap_index().unwrap();
    let values: Vec<u16> = (0..n)
        .map(|_| {
            if with_gaps && rng.random_range(0..4u8) == 0 {
                gap
            } else {
                // draw until a non-gap symbol comes up
                loop {
                    let s = rng.random_range(0..size);
                    if s != gap {
                        break s;
                    }
                }
            }
        })
        .collect();
    SiteColumn {
        site_index: 0,
        values,
        alphabet,
    }
}

pub fn corpus(seed: u64, count: usize) -> Vec<SiteColumn> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..count).map(|_| random_column(&mut rng)).collect()
}

// ------------------------------------------------- pair-counting oracle

/// Rate numerators by brute-force path counting: enumerate every ordered
/// index pair (a,b), a != b, bucket by its letter path, and read entry (i,j)
/// as the count of pairs sharing the path (v_i, v_j). Diagonals balance the
/// row. Returns (numerators, denominator).
pub fn pair_count_numerators(col: &SiteColumn) -> (Vec<i64>, i64) {
    let n = col.values.len();
    let mut buckets: BTreeMap<(u16, u16), i64> = BTreeMap::new();
    for a in 0..n {
        for b in 0..n {
            if a != b {
                *buckets.entry((col.values[a], col.values[b])).or_insert(0) += 1;
            }
        }
    }
    let mut numer = vec![0i64; n * n];
    for i in 0..n {
        let mut row = 0i64;
        for j in 0..n {
            if i == j {
                continue;
            }
            let c = *buckets.get(&(col.values[i], col.values[j])).unwrap_or(&0);
            numer[i * n + j] = c;
            row += c;
        }
        numer[i * n + i] = -row;
    }
    (numer, (n as i64) * (n as i64 - 1))
}

/// Fully literal variant of one entry: scans all ordered pairs for each
/// query instead of bucketing.
pub fn pair_count_entry_literal(col: &SiteColumn, i: usize, j: usize) -> i64 {
    let n = col.values.len();
    let want = (col.values[i], col.values[j]);
    let mut count = 0i64;
    for a in 0..n {
        for b in 0..n {
            if a != b && (col.values[a], col.values[b]) == want {
                count += 1;
            }
        }
    }
    count
}

// ------------------------------------------------------- expm oracle

/// Scaling-and-squaring truncated Taylor series, independent of the library's
/// eigendecomposition route.
pub fn taylor_expm(q: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    let n = q.nrows();
    let a = q * t;
    let norm = a
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let s = if norm > 0.25 {
        (norm / 0.25).log2().ceil() as u32
    } else {
        0
    };
    let scaled = &a / 2f64.powi(s as i32);
    let mut acc = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=24 {
        term = (&term * &scaled) / k as f64;
        acc += &term;
    }
    for _ in 0..s {
        acc = &acc * &acc;
    }
    acc
}

// ----------------------------------------------- stationary oracle

/// Left fixed vector of P by damped power iteration (the damping removes
/// periodicity; the fixed point is unchanged).
pub fn power_iteration_pi(p: &DMatrix<f64>) -> Vec<f64> {
    let n = p.nrows();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..200_000 {
        let mut next = vec![0.0; n];
        for i in 0..n {
            for j in 0..n {
                next[j] += pi[i] * p[(i, j)];
            }
        }
        let mut worst = 0.0f64;
        for j in 0..n {
            next[j] = 0.5 * (next[j] + pi[j]);
        }
        let total: f64 = next.iter().sum();
        for v in next.iter_mut() {
            *v /= total;
        }
        for j in 0..n {
            worst = worst.max((next[j] - pi[j]).abs());
        }
        pi = next;
        if worst < 1e-15 {
            break;
        }
    }
    pi
}

// ------------------------------------------------- newick test parser

/// Minimal rooted Newick reader used only by tests.
#[derive(Debug, Clone, PartialEq)]
pub struct TestNode {
    pub label: Option<String>,
    pub length: Option<f64>,
    pub children: Vec<TestNode>,
}

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.text.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let c = self.peek();
        if c.is_some() {
            self.pos += 1;
        }
        c
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn node(&mut self) -> TestNode {
        self.skip_ws();
        let children = if self.peek() == Some(b'(') {
            self.bump();
            let mut kids = vec![self.node()];
            while self.peek() == Some(b',') {
                self.bump();
                kids.push(self.node());
            }
            assert_eq!(self.bump(), Some(b')'), "unbalanced parentheses");
            kids
        } else {
            Vec::new()
        };
        let label = self.label();
        let length = if self.peek() == Some(b':') {
            self.bump();
            Some(self.number())
        } else {
            None
        };
        TestNode {
            label,
            length,
            children,
        }
    }

    fn label(&mut self) -> Option<String> {
        self.skip_ws();
        if self.peek() == Some(b'\'') {
            self.bump();
            let mut out = String::new();
            loop {
                match self.bump().expect("unterminated quoted label") {
                    b'\'' => {
                        if self.peek() == Some(b'\'') {
                            self.bump();
                            out.push('\'');
                        } else {
                            break;
                        }
                    }
                    c => out.push(c as char),
                }
            }
            return Some(out);
        }
        let start = self.pos;
        while let Some(c) = self.peek() {
            if b"():;,'".contains(&c) || c.is_ascii_whitespace() {
                break;
            }
            self.pos += 1;
        }
        if self.pos == start {
            None
        } else {
            Some(String::from_utf8(self.text[start..self.pos].to_vec()).unwrap())
        }
    }

    fn number(&mut self) -> f64 {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_digit() || b"+-.eE".contains(&c) {
                self.pos += 1;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .expect("bad branch length")
    }
}

pub fn parse_newick(text: &str) -> TestNode {
    let mut p = Parser {
        text: text.trim().as_bytes(),
        pos: 0,
    };
    let root = p.node();
    assert_eq!(p.bump(), Some(b';'), "newick must end with ;");
    root
}

pub fn leaf_set(node: &TestNode) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    collect_leaves(node, &mut out);
    out
}

fn collect_leaves(node: &TestNode, out: &mut BTreeSet<String>) {
    if node.children.is_empty() {
        out.insert(node.label.clone().expect("unlabelled leaf"));
    } else {
        for c in &node.children {
            collect_leaves(c, out);
        }
    }
}

/// Unrooted splits with branch lengths: every edge of the rooted view maps
/// to (smaller side of the bipartition, length). Trivial splits carry the
/// leaf's branch; the root itself is not an edge.
pub fn splits(node: &TestNode) -> BTreeMap<BTreeSet<String>, f64> {
    let all = leaf_set(node);
    let mut out = BTreeMap::new();
    walk_splits(node, &all, true, &mut out);
    out
}

fn walk_splits(
    node: &TestNode,
    all: &BTreeSet<String>,
    is_root: bool,
    out: &mut BTreeMap<BTreeSet<String>, f64>,
) -> BTreeSet<String> {
    let mut below = BTreeSet::new();
    if node.children.is_empty() {
        below.insert(node.label.clone().expect("unlabelled leaf"));
    } else {
        for c in &node.children {
            let sub = walk_splits(c, all, false, out);
            below.extend(sub);
        }
    }
    if !is_root {
        let len = node.length.expect("edge without length");
        let side = canonical_side(&below, all);
        // A degree-2 chain writes the same split twice; merge by summing.
        *out.entry(side).or_insert(0.0) += len;
    }
    below
}

fn canonical_side(side: &BTreeSet<String>, all: &BTreeSet<String>) -> BTreeSet<String> {
    let other: BTreeSet<String> = all.difference(side).cloned().collect();
    if side.len() < other.len() || (side.len() == other.len() && side <= &other) {
        side.clone()
    } else {
        other
    }
}

/// Nontrivial splits only (both sides >= 2): the topology fingerprint.
pub fn topology(node: &TestNode) -> BTreeSet<BTreeSet<String>> {
    let all = leaf_set(node);
    splits(node)
        .into_keys()
        .filter(|s| s.len() >= 2 && s.len() <= all.len() - 2)
        .collect()
}

// ------------------------------------------- random additive trees

/// Unrooted binary tree grown by random edge subdivision, with leaf labels
/// t1..tk and branch lengths in [0.1, 2].
pub struct AdditiveTree {
    /// adjacency: node -> (neighbor, length)
    pub adj: Vec<Vec<(usize, f64)>>,
    /// leaf node ids in label order t1..tk
    pub leaves: Vec<usize>,
    pub labels: Vec<String>,
}

pub fn random_additive_tree(rng: &mut ChaCha12Rng, k: usize) -> AdditiveTree {
    assert!(k >= 3);
    // grow the topology by random edge subdivision, then draw every final
    // branch length fresh so all of them land in [0.1, 2]
    let mut adj: Vec<Vec<(usize, f64)>> = vec![vec![]; 4];
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for leaf in 0..3 {
        attach(&mut adj, leaf, 3, 1.0);
        edges.push((leaf, 3));
    }
    let mut leaves: Vec<usize> = vec![0, 1, 2];
    for _ in 3..k {
        let pick = rng_index(rng, edges.len());
        let (a, b) = edges[pick];
        let split = adj.len();
        adj.push(vec![]);
        detach(&mut adj, a, b);
        attach(&mut adj, a, split, 1.0);
        attach(&mut adj, split, b, 1.0);
        let leaf = adj.len();
        adj.push(vec![]);
        attach(&mut adj, split, leaf, 1.0);
        leaves.push(leaf);
        edges[pick] = (a, split);
        edges.push((split, b));
        edges.push((split, leaf));
    }
    for u in 0..adj.len() {
        for slot in 0..adj[u].len() {
            let (v, _) = adj[u][slot];
            if u < v {
                let l = rng_len(rng);
                adj[u][slot].1 = l;
                let back = adj[v].iter().position(|(x, _)| *x == u).unwrap();
                adj[v][back].1 = l;
            }
        }
    }
    let labels = (1..=k).map(|i| format!("t{i}")).collect();
    AdditiveTree { adj, leaves, labels }
}

fn rng_len(rng: &mut ChaCha12Rng) -> f64 {
    0.1 + 1.9 * rng.random::<f64>()
}

fn rng_index(rng: &mut ChaCha12Rng, n: usize) -> usize {
    rng.random_range(0..n)
}

fn detach(adj: &mut [Vec<(usize, f64)>], a: usize, b: usize) -> f64 {
    let pos = adj[a].iter().position(|(x, _)| *x == b).unwrap();
    let (_, l) = adj[a].remove(pos);
    let pos = adj[b].iter().position(|(x, _)| *x == a).unwrap();
    adj[b].remove(pos);
    l
}

fn attach(adj: &mut [Vec<(usize, f64)>], a: usize, b: usize, l: f64) {
    adj[a].push((b, l));
    adj[b].push((a, l));
}

impl AdditiveTree {
    /// Path-sum distances between leaves, in label order.
    pub fn distances(&self) -> DMatrix<f64> {
        let k = self.leaves.len();
        let mut d = DMatrix::zeros(k, k);
        for (i, &leaf) in self.leaves.iter().enumerate() {
            let dist = self.bfs(leaf);
            for (j, &other) in self.leaves.iter().enumerate() {
                d[(i, j)] = dist[other];
            }
        }
        d
    }

    fn bfs(&self, from: usize) -> Vec<f64> {
        let mut dist = vec![f64::NAN; self.adj.len()];
        dist[from] = 0.0;
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            for &(v, l) in &self.adj[u] {
                if dist[v].is_nan() {
                    dist[v] = dist[u] + l;
                    stack.push(v);
                }
            }
        }
        dist
    }

    /// Splits with lengths, keyed like `splits` on the parsed output.
    pub fn true_splits(&self) -> BTreeMap<BTreeSet<String>, f64> {
        let leaf_label: BTreeMap<usize, String> = self
            .leaves
            .iter()
            .zip(&self.labels)
            .map(|(&n, l)| (n, l.clone()))
            .collect();
        let all: BTreeSet<String> = self.labels.iter().cloned().collect();
        let mut out = BTreeMap::new();
        for u in 0..self.adj.len() {
            for &(v, l) in &self.adj[u] {
                if u < v {
                    let side = self.side_of(u, v, &leaf_label);
                    out.insert(canonical_side(&side, &all), l);
                }
            }
        }
        out
    }

    /// Leaves reachable from `v` when edge (u,v) is cut.
    fn side_of(
        &self,
        u: usize,
        v: usize,
        leaf_label: &BTreeMap<usize, String>,
    ) -> BTreeSet<String> {
        let mut seen = vec![false; self.adj.len()];
        seen[u] = true;
        seen[v] = true;
        let mut out = BTreeSet::new();
        if let Some(l) = leaf_label.get(&v) {
            out.insert(l.clone());
        }
        let mut stack = vec![v];
        while let Some(x) = stack.pop() {
            for &(y, _) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    if let Some(l) = leaf_label.get(&y) {
                        out.insert(l.clone());
                    }
                    stack.push(y);
                }
            }
        }
        out
    }
}

// --------------------------------------------------------- KS statistic

/// One-sample Kolmogorov-Smirnov statistic against U(0,1).
pub fn ks_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.total_cmp(b));
    let n = samples.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in samples.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        d = d.max((x - lo).abs()).max((hi - x).abs());
    }
    d
}

/// Critical value at alpha = 0.001, asymptotic form.
pub fn ks_critical_001(n: usize) -> f64 {
    1.9495 / (n as f64).sqrt()
}
