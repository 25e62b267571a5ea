use crate::combine::DistanceMatrix;
use crate::error::{Error, Result};

/// Unrooted NJ result stored as an adjacency list. `hub` is the center of
/// the final three-way join and anchors Newick serialization.
#[derive(Debug, Clone)]
pub struct PhyloTree {
    labels: Vec<Option<String>>,
    adj: Vec<Vec<(usize, f64)>>,
    hub: usize,
}

impl PhyloTree {
    pub fn n_nodes(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, node: usize) -> Option<&str> {
        self.labels[node].as_deref()
    }

    pub fn neighbors(&self, node: usize) -> &[(usize, f64)] {
        &self.adj[node]
    }

    pub fn hub(&self) -> usize {
        self.hub
    }

    pub fn leaf_count(&self) -> usize {
        self.labels.iter().filter(|l| l.is_some()).count()
    }

    /// Rooted view from the hub, for serialization.
    fn to_rooted(&self) -> NewickNode {
        self.subtree(self.hub, usize::MAX, None)
    }

    fn subtree(&self, node: usize, parent: usize, length: Option<f64>) -> NewickNode {
        let children = self.adj[node]
            .iter()
            .filter(|(next, _)| *next != parent)
            .map(|&(next, len)| self.subtree(next, node, Some(len)))
            .collect();
        NewickNode {
            label: self.labels[node].clone(),
            length,
            children,
        }
    }
}

fn connect(adj: &mut [Vec<(usize, f64)>], a: usize, b: usize, len: f64) {
    adj[a].push((b, len));
    adj[b].push((a, len));
}

/// Saitou-Nei neighbor joining. Ties on the join criterion go to the lowest
/// index pair, so output is deterministic. With `clamp`, negative branch
/// lengths become 0 and the deficit moves to the sibling branch of the join.
pub fn neighbor_joining(dm: &DistanceMatrix, clamp: bool) -> Result<PhyloTree> {
    let n = dm.n();
    if n < 3 {
        return Err(Error::TooFewTaxa { need: 3, found: n });
    }
    let cap = 2 * n - 1;
    let mut d = vec![vec![0.0f64; cap]; cap];
    for i in 0..n {
        for j in 0..n {
            d[i][j] = dm.entry(i, j);
        }
    }
    let mut labels: Vec<Option<String>> = dm.taxa().iter().map(|t| Some(t.clone())).collect();
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut active: Vec<usize> = (0..n).collect();

    while active.len() > 3 {
        let r = active.len();
        let row_sums: Vec<f64> = active
            .iter()
            .map(|&i| active.iter().map(|&k| d[i][k]).sum())
            .collect();
        let mut best = f64::INFINITY;
        let mut best_pair = (0usize, 1usize);
        for ai in 0..r {
            for aj in (ai + 1)..r {
                let q = (r as f64 - 2.0) * d[active[ai]][active[aj]] - row_sums[ai] - row_sums[aj];
                if q < best {
                    best = q;
                    best_pair = (ai, aj);
                }
            }
        }
        let (ai, aj) = best_pair;
        let (i, j) = (active[ai], active[aj]);
        let dij = d[i][j];
        let mut li = 0.5 * dij + (row_sums[ai] - row_sums[aj]) / (2.0 * (r as f64 - 2.0));
        let mut lj = dij - li;
        if clamp {
            if li < 0.0 {
                lj += li;
                li = 0.0;
            } else if lj < 0.0 {
                li += lj;
                lj = 0.0;
            }
            li = li.max(0.0);
            lj = lj.max(0.0);
        }
        let u = labels.len();
        labels.push(None);
        adj.push(Vec::new());
        connect(&mut adj, u, i, li);
        connect(&mut adj, u, j, lj);
        for &k in &active {
            if k != i && k != j {
                let duk = 0.5 * (d[i][k] + d[j][k] - dij);
                d[u][k] = duk;
                d[k][u] = duk;
            }
        }
        active.retain(|&k| k != i && k != j);
        active.push(u);
    }

    let (x, y, z) = (active[0], active[1], active[2]);
    let mut lx = 0.5 * (d[x][y] + d[x][z] - d[y][z]);
    let mut ly = 0.5 * (d[x][y] + d[y][z] - d[x][z]);
    let mut lz = 0.5 * (d[x][z] + d[y][z] - d[x][y]);
    if clamp {
        lx = lx.max(0.0);
        ly = ly.max(0.0);
        lz = lz.max(0.0);
    }
    let hub = labels.len();
    labels.push(None);
    adj.push(Vec::new());
    connect(&mut adj, hub, x, lx);
    connect(&mut adj, hub, y, ly);
    connect(&mut adj, hub, z, lz);

    Ok(PhyloTree { labels, adj, hub })
}

/// Rooted tree node for Newick output; also the simulator's genealogy shape.
#[derive(Debug, Clone)]
pub struct NewickNode {
    pub label: Option<String>,
    /// Branch length to the parent; None at the root.
    pub length: Option<f64>,
    pub children: Vec<NewickNode>,
}

fn needs_quoting(label: &str) -> bool {
    label.is_empty()
        || label
            .chars()
            .any(|c| c.is_whitespace() || "()[]{}':;,".contains(c))
}

fn newick_label(label: &str) -> String {
    if needs_quoting(label) {
        format!("'{}'", label.replace('\'', "''"))
    } else {
        label.to_string()
    }
}

/// Serializes a subtree, returning the smallest descendant label (the child
/// sort key) alongside the text.
fn render(node: &NewickNode) -> (String, String) {
    let own = node.label.as_deref().unwrap_or("");
    if node.children.is_empty() {
        let mut text = newick_label(own);
        if let Some(len) = node.length {
            text.push(':');
            text.push_str(&format!("{len}"));
        }
        return (own.to_string(), text);
    }
    let mut parts: Vec<(String, String)> = node.children.iter().map(render).collect();
    parts.sort_by(|a, b| a.0.cmp(&b.0));
    let min_label = parts
        .iter()
        .map(|(k, _)| k.as_str())
        .filter(|k| !k.is_empty())
        .min()
        .unwrap_or(own)
        .to_string();
    let inner: Vec<String> = parts.into_iter().map(|(_, t)| t).collect();
    let mut text = format!("({})", inner.join(","));
    if node.label.is_some() {
        text.push_str(&newick_label(own));
    }
    if let Some(len) = node.length {
        text.push(':');
        text.push_str(&format!("{len}"));
    }
    (min_label, text)
}

/// Newick text for a rooted node; children ordered by smallest descendant
/// label throughout, so equal trees serialize identically.
pub fn write_newick_rooted(root: &NewickNode) -> String {
    let (_, text) = render(root);
    format!("{text};\n")
}

/// Newick text for an NJ tree, rooted at the final join hub.
pub fn write_newick(tree: &PhyloTree) -> String {
    write_newick_rooted(&tree.to_rooted())
}
