//! Distance-based tree building: neighbor joining for unrooted stemma
//! topologies, UPGMA for rooted ultrametric dendrograms, Newick
//! serialization and Robinson-Foulds comparison.

use std::collections::{BTreeSet, HashMap, HashSet};

use thiserror::Error;

use crate::mapping::DistanceMatrix;

#[derive(Debug, Error)]
pub enum StemmaError {
    #[error("need at least 2 taxa, got {0}")]
    TooFewTaxa(usize),
    #[error("newick parse error: {0}")]
    Parse(String),
    #[error("trees have different leaf sets")]
    LeafSetMismatch,
}

/// A node in a phylogenetic tree; children carry their branch length.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloNode {
    /// Leaf label; `None` for internal nodes.
    pub label: Option<String>,
    pub children: Vec<(PhyloNode, f64)>,
}

impl PhyloNode {
    pub fn leaf(label: &str) -> Self {
        Self {
            label: Some(label.to_string()),
            children: Vec::new(),
        }
    }

    pub fn internal(children: Vec<(PhyloNode, f64)>) -> Self {
        Self {
            label: None,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a str>) {
        if let Some(l) = &self.label {
            if self.is_leaf() {
                out.push(l);
            }
        }
        for (c, _) in &self.children {
            c.collect_leaves(out);
        }
    }

    /// Smallest leaf label in this subtree; drives canonical child ordering.
    fn min_leaf(&self) -> &str {
        if self.is_leaf() {
            return self.label.as_deref().unwrap_or("");
        }
        self.children
            .iter()
            .map(|(c, _)| c.min_leaf())
            .min()
            .unwrap_or("")
    }

    fn sort_canonical(&mut self) {
        for (c, _) in &mut self.children {
            c.sort_canonical();
        }
        self.children
            .sort_by(|(a, _), (b, _)| a.min_leaf().cmp(b.min_leaf()));
    }
}

/// Tree over manuscript witnesses. `rooted` distinguishes UPGMA dendrograms
/// from neighbor-joining topologies, whose root is only a drawing anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct PhyloTree {
    pub root: PhyloNode,
    pub rooted: bool,
}

impl PhyloTree {
    pub fn leaf_labels(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.root.collect_leaves(&mut out);
        out.into_iter().map(|s| s.to_string()).collect()
    }

    pub fn from_newick(text: &str) -> Result<Self, StemmaError> {
        parse_newick(text)
    }
}

struct NjNode {
    node: PhyloNode,
    key: String,
}

/// Neighbor joining after Saitou & Nei: repeatedly join the pair minimizing
/// the Q-criterion, with ties broken by the lexicographically smallest label
/// pair (a node's label for this purpose is the smallest leaf it contains).
/// Negative branch lengths are clamped to zero and the deficit logged.
pub fn neighbor_joining(m: &DistanceMatrix) -> Result<PhyloTree, StemmaError> {
    let n = m.len();
    if n < 2 {
        return Err(StemmaError::TooFewTaxa(n));
    }
    if n == 2 {
        let d = m.get(0, 1);
        let root = PhyloNode::internal(vec![
            (PhyloNode::leaf(&m.labels[0]), d / 2.0),
            (PhyloNode::leaf(&m.labels[1]), d / 2.0),
        ]);
        return Ok(PhyloTree { root, rooted: false });
    }

    // Working distance store; joined nodes get fresh indices.
    let cap = 2 * n;
    let mut dist = vec![vec![0.0f64; cap]; cap];
    for (i, row) in dist.iter_mut().enumerate().take(n) {
        for (j, v) in row.iter_mut().enumerate().take(n) {
            *v = m.get(i, j);
        }
    }
    let mut nodes: Vec<Option<NjNode>> = m
        .labels
        .iter()
        .map(|l| {
            Some(NjNode {
                node: PhyloNode::leaf(l),
                key: l.clone(),
            })
        })
        .collect();
    nodes.resize_with(cap, || None);
    let mut active: Vec<usize> = (0..n).collect();
    let mut next_slot = n;

    while active.len() > 2 {
        let r = active.len();
        let row_sum: HashMap<usize, f64> = active
            .iter()
            .map(|&i| (i, active.iter().map(|&k| dist[i][k]).sum()))
            .collect();

        let mut best: Option<(f64, (String, String), usize, usize)> = None;
        for (ai, &i) in active.iter().enumerate() {
            for &j in &active[ai + 1..] {
                let q = (r as f64 - 2.0) * dist[i][j] - row_sum[&i] - row_sum[&j];
                let ki = &nodes[i].as_ref().expect("active").key;
                let kj = &nodes[j].as_ref().expect("active").key;
                let pair_key = if ki <= kj {
                    (ki.clone(), kj.clone())
                } else {
                    (kj.clone(), ki.clone())
                };
                let take = match &best {
                    None => true,
                    Some((bq, bkey, _, _)) => q < *bq || (q == *bq && pair_key < *bkey),
                };
                if take {
                    best = Some((q, pair_key, i, j));
                }
            }
        }
        let (_, _, i, j) = best.expect("at least one pair");

        let d_ij = dist[i][j];
        let mut li = 0.5 * d_ij + (row_sum[&i] - row_sum[&j]) / (2.0 * (r as f64 - 2.0));
        let mut lj = d_ij - li;
        if li < 0.0 {
            log::warn!("clamping negative branch length {li:.6} to 0");
            lj += li;
            li = 0.0;
        }
        if lj < 0.0 {
            log::warn!("clamping negative branch length {lj:.6} to 0");
            lj = 0.0;
        }

        let node_i = nodes[i].take().expect("active");
        let node_j = nodes[j].take().expect("active");
        let key = node_i.key.clone().min(node_j.key.clone());
        let joined = PhyloNode::internal(vec![(node_i.node, li), (node_j.node, lj)]);

        let u = next_slot;
        next_slot += 1;
        active.retain(|&x| x != i && x != j);
        for &k in &active {
            let d = 0.5 * (dist[i][k] + dist[j][k] - d_ij);
            dist[u][k] = d;
            dist[k][u] = d;
        }
        nodes[u] = Some(NjNode { node: joined, key });
        active.push(u);
    }

    let (p, q) = (active[0], active[1]);
    let d_pq = dist[p][q];
    let np = nodes[p].take().expect("active");
    let nq = nodes[q].take().expect("active");
    // Root at an internal node so the final edge becomes its third child;
    // with two internal candidates pick the smaller key.
    let (mut root_node, other, other_len) = if !np.node.is_leaf() && (nq.node.is_leaf() || np.key <= nq.key)
    {
        (np.node, nq.node, d_pq)
    } else {
        (nq.node, np.node, d_pq)
    };
    let len = if other_len < 0.0 {
        log::warn!("clamping negative branch length {other_len:.6} to 0");
        0.0
    } else {
        other_len
    };
    root_node.children.push((other, len));
    Ok(PhyloTree {
        root: root_node,
        rooted: false,
    })
}

/// UPGMA average-linkage agglomeration. Node heights are half the merge
/// distance; merge ties are broken by the lexicographically smallest label
/// pair. The output is rooted and ultrametric.
pub fn upgma(m: &DistanceMatrix) -> Result<PhyloTree, StemmaError> {
    let n = m.len();
    if n < 2 {
        return Err(StemmaError::TooFewTaxa(n));
    }
    struct Cluster {
        node: PhyloNode,
        size: usize,
        height: f64,
        key: String,
    }
    let cap = 2 * n;
    let mut dist = vec![vec![0.0f64; cap]; cap];
    for (i, row) in dist.iter_mut().enumerate().take(n) {
        for (j, v) in row.iter_mut().enumerate().take(n) {
            *v = m.get(i, j);
        }
    }
    let mut clusters: Vec<Option<Cluster>> = m
        .labels
        .iter()
        .map(|l| {
            Some(Cluster {
                node: PhyloNode::leaf(l),
                size: 1,
                height: 0.0,
                key: l.clone(),
            })
        })
        .collect();
    clusters.resize_with(cap, || None);
    let mut active: Vec<usize> = (0..n).collect();
    let mut next_slot = n;

    while active.len() > 1 {
        let mut best: Option<(f64, (String, String), usize, usize)> = None;
        for (ai, &i) in active.iter().enumerate() {
            for &j in &active[ai + 1..] {
                let d = dist[i][j];
                let ki = &clusters[i].as_ref().expect("active").key;
                let kj = &clusters[j].as_ref().expect("active").key;
                let pair_key = if ki <= kj {
                    (ki.clone(), kj.clone())
                } else {
                    (kj.clone(), ki.clone())
                };
                let take = match &best {
                    None => true,
                    Some((bd, bkey, _, _)) => d < *bd || (d == *bd && pair_key < *bkey),
                };
                if take {
                    best = Some((d, pair_key, i, j));
                }
            }
        }
        let (d, _, i, j) = best.expect("pair");
        let ci = clusters[i].take().expect("active");
        let cj = clusters[j].take().expect("active");
        let height = d / 2.0;
        let key = ci.key.clone().min(cj.key.clone());
        let size = ci.size + cj.size;
        let node = PhyloNode::internal(vec![
            (ci.node, height - ci.height),
            (cj.node, height - cj.height),
        ]);

        let u = next_slot;
        next_slot += 1;
        active.retain(|&x| x != i && x != j);
        for &k in &active {
            let dk = (ci.size as f64 * dist[i][k] + cj.size as f64 * dist[j][k]) / size as f64;
            dist[u][k] = dk;
            dist[k][u] = dk;
        }
        clusters[u] = Some(Cluster {
            node,
            size,
            height,
            key,
        });
        active.push(u);
    }

    let root = clusters[active[0]].take().expect("root").node;
    Ok(PhyloTree { root, rooted: true })
}

/// Standard Newick with branch lengths in fixed six-decimal format; children
/// are ordered by the smallest leaf label they contain, so equal trees
/// serialize identically.
pub fn to_newick(tree: &PhyloTree) -> String {
    let mut root = tree.root.clone();
    root.sort_canonical();
    let mut out = String::new();
    write_newick(&root, &mut out);
    out.push(';');
    out
}

fn write_newick(node: &PhyloNode, out: &mut String) {
    if node.is_leaf() {
        out.push_str(node.label.as_deref().unwrap_or(""));
        return;
    }
    out.push('(');
    for (idx, (child, len)) in node.children.iter().enumerate() {
        if idx > 0 {
            out.push(',');
        }
        write_newick(child, out);
        out.push_str(&format!(":{len:.6}"));
    }
    out.push(')');
}

fn parse_newick(text: &str) -> Result<PhyloTree, StemmaError> {
    let s = text.trim();
    let s = s
        .strip_suffix(';')
        .ok_or_else(|| StemmaError::Parse("missing terminating ';'".into()))?;
    let chars: Vec<char> = s.chars().collect();
    let mut pos = 0usize;
    let root = parse_subtree(&chars, &mut pos)?;
    if pos != chars.len() {
        return Err(StemmaError::Parse(format!(
            "trailing input at position {pos}"
        )));
    }
    let rooted = root.children.len() <= 2;
    Ok(PhyloTree { root, rooted })
}

fn parse_subtree(chars: &[char], pos: &mut usize) -> Result<PhyloNode, StemmaError> {
    if *pos < chars.len() && chars[*pos] == '(' {
        *pos += 1;
        let mut children = Vec::new();
        loop {
            let child = parse_subtree(chars, pos)?;
            let mut len = 0.0;
            if *pos < chars.len() && chars[*pos] == ':' {
                *pos += 1;
                len = parse_number(chars, pos)?;
            }
            children.push((child, len));
            match chars.get(*pos) {
                Some(',') => {
                    *pos += 1;
                }
                Some(')') => {
                    *pos += 1;
                    break;
                }
                other => {
                    return Err(StemmaError::Parse(format!(
                        "expected ',' or ')', found {other:?}"
                    )))
                }
            }
        }
        // Optional internal label, ignored for structure.
        let _ = parse_label(chars, pos);
        Ok(PhyloNode::internal(children))
    } else {
        let label = parse_label(chars, pos);
        if label.is_empty() {
            return Err(StemmaError::Parse(format!(
                "empty label at position {pos}"
            )));
        }
        Ok(PhyloNode::leaf(&label))
    }
}

fn parse_label(chars: &[char], pos: &mut usize) -> String {
    let mut out = String::new();
    while let Some(&c) = chars.get(*pos) {
        if c == ':' || c == ',' || c == ')' || c == '(' {
            break;
        }
        out.push(c);
        *pos += 1;
    }
    out
}

fn parse_number(chars: &[char], pos: &mut usize) -> Result<f64, StemmaError> {
    let start = *pos;
    while let Some(&c) = chars.get(*pos) {
        if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || c == 'e' || c == 'E' {
            *pos += 1;
        } else {
            break;
        }
    }
    let tok: String = chars[start..*pos].iter().collect();
    tok.parse()
        .map_err(|_| StemmaError::Parse(format!("bad branch length '{tok}'")))
}

/// Non-trivial splits of the tree read as unrooted: for every internal edge,
/// the side of the bipartition not containing the overall smallest leaf.
fn nontrivial_splits(tree: &PhyloTree) -> HashSet<BTreeSet<String>> {
    splits_with_lengths(tree)
        .into_keys()
        .filter(|s| s.len() >= 2)
        .collect()
}

/// All splits (including pendant edges) with their branch lengths. Each edge
/// is keyed by the bipartition side not containing the overall smallest leaf,
/// so keys are orientation-independent. When a rooted tree's two root edges
/// describe the same bipartition their lengths are summed, matching the
/// unrooted reading of the tree.
pub fn splits_with_lengths(tree: &PhyloTree) -> HashMap<BTreeSet<String>, f64> {
    let all: BTreeSet<String> = tree.leaf_labels().into_iter().collect();
    let anchor = match all.iter().next() {
        Some(a) => a.clone(),
        None => return HashMap::new(),
    };
    let mut out: HashMap<BTreeSet<String>, f64> = HashMap::new();
    fn walk(
        node: &PhyloNode,
        all: &BTreeSet<String>,
        anchor: &str,
        out: &mut HashMap<BTreeSet<String>, f64>,
    ) -> BTreeSet<String> {
        let mut leaves = BTreeSet::new();
        if node.is_leaf() {
            leaves.insert(node.label.clone().unwrap_or_default());
            return leaves;
        }
        for (child, len) in &node.children {
            let side = walk(child, all, anchor, out);
            let canonical: BTreeSet<String> = if side.contains(anchor) {
                all.difference(&side).cloned().collect()
            } else {
                side.clone()
            };
            if !canonical.is_empty() && canonical.len() < all.len() {
                *out.entry(canonical).or_insert(0.0) += len;
            }
            leaves.extend(side);
        }
        leaves
    }
    walk(&tree.root, &all, &anchor, &mut out);
    out
}

/// Robinson-Foulds distance: size of the symmetric difference of the sets of
/// non-trivial splits, comparing both trees as unrooted.
pub fn robinson_foulds(a: &PhyloTree, b: &PhyloTree) -> Result<usize, StemmaError> {
    let la: BTreeSet<String> = a.leaf_labels().into_iter().collect();
    let lb: BTreeSet<String> = b.leaf_labels().into_iter().collect();
    if la != lb {
        return Err(StemmaError::LeafSetMismatch);
    }
    let sa = nontrivial_splits(a);
    let sb = nontrivial_splits(b);
    Ok(sa.symmetric_difference(&sb).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(labels: &[&str], rows: &[&[f64]]) -> DistanceMatrix {
        let n = labels.len();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                values[i * n + j] = rows[i][j];
            }
        }
        DistanceMatrix::new(labels.iter().map(|s| s.to_string()).collect(), values).unwrap()
    }

    #[test]
    fn nj_two_taxa_single_edge() {
        let m = matrix(&["A", "B"], &[&[0.0, 0.5], &[0.5, 0.0]]);
        let t = neighbor_joining(&m).unwrap();
        assert_eq!(to_newick(&t), "(A:0.250000,B:0.250000);");
        assert!(!t.rooted);
    }

    #[test]
    fn nj_three_taxa_solves_three_point_equations() {
        // a+b = 2, a+c = 4, b+c = 4  =>  a = 1, b = 1, c = 3.
        let m = matrix(
            &["A", "B", "C"],
            &[&[0.0, 2.0, 4.0], &[2.0, 0.0, 4.0], &[4.0, 4.0, 0.0]],
        );
        let t = neighbor_joining(&m).unwrap();
        assert_eq!(to_newick(&t), "(A:1.000000,B:1.000000,C:3.000000);");
        assert_eq!(t.root.children.len(), 3);
    }

    #[test]
    fn nj_additive_five_taxon_recovery() {
        // Source tree ((A:1,B:2):1.5,C:3,(D:2,E:1):0.5); distances are its
        // leaf-to-leaf path lengths, computed by hand.
        let a_b = 3.0;
        let a_c = 5.5;
        let a_d = 5.0;
        let a_e = 4.0;
        let b_c = 6.5;
        let b_d = 6.0;
        let b_e = 5.0;
        let c_d = 5.5;
        let c_e = 4.5;
        let d_e = 3.0;
        let m = matrix(
            &["A", "B", "C", "D", "E"],
            &[
                &[0.0, a_b, a_c, a_d, a_e],
                &[a_b, 0.0, b_c, b_d, b_e],
                &[a_c, b_c, 0.0, c_d, c_e],
                &[a_d, b_d, c_d, 0.0, d_e],
                &[a_e, b_e, c_e, d_e, 0.0],
            ],
        );
        let t = neighbor_joining(&m).unwrap();
        let splits = splits_with_lengths(&t);
        // Pendant edges.
        let leaf = |l: &str| {
            let mut s = BTreeSet::new();
            s.insert(l.to_string());
            s
        };
        // Canonical side never contains A (the smallest label), so A's pendant
        // edge is keyed by the complement.
        let a_side: BTreeSet<String> =
            ["B", "C", "D", "E"].iter().map(|s| s.to_string()).collect();
        assert!((splits[&a_side] - 1.0).abs() < 1e-9);
        assert!((splits[&leaf("B")] - 2.0).abs() < 1e-9);
        assert!((splits[&leaf("C")] - 3.0).abs() < 1e-9);
        assert!((splits[&leaf("D")] - 2.0).abs() < 1e-9);
        assert!((splits[&leaf("E")] - 1.0).abs() < 1e-9);
        // Internal edges.
        let de: BTreeSet<String> = ["D", "E"].iter().map(|s| s.to_string()).collect();
        assert!((splits[&de] - 0.5).abs() < 1e-9);
        let cde: BTreeSet<String> = ["C", "D", "E"].iter().map(|s| s.to_string()).collect();
        assert!((splits[&cde] - 1.5).abs() < 1e-9);
        // The path metric is reproduced.
        assert!((tree_path_distance(&t, "A", "B") - a_b).abs() < 1e-9);
        assert!((tree_path_distance(&t, "C", "E") - c_e).abs() < 1e-9);
    }

    fn tree_path_distance(tree: &PhyloTree, a: &str, b: &str) -> f64 {
        fn depths(node: &PhyloNode, acc: f64, out: &mut HashMap<String, f64>) {
            if node.is_leaf() {
                out.insert(node.label.clone().unwrap(), acc);
            }
            for (c, len) in &node.children {
                depths(c, acc + len, out);
            }
        }
        fn subtree_contains(node: &PhyloNode, l: &str) -> bool {
            if node.is_leaf() {
                return node.label.as_deref() == Some(l);
            }
            node.children.iter().any(|(c, _)| subtree_contains(c, l))
        }
        // Distance via deepest common subtree.
        fn walk(node: &PhyloNode, a: &str, b: &str) -> Option<f64> {
            for (c, _) in &node.children {
                if subtree_contains(c, a) && subtree_contains(c, b) {
                    return walk(c, a, b);
                }
            }
            let mut d = HashMap::new();
            depths(node, 0.0, &mut d);
            Some(d[a] + d[b])
        }
        walk(&tree.root, a, b).unwrap()
    }

    #[test]
    fn upgma_two_taxa_root_at_half() {
        let m = matrix(&["A", "B"], &[&[0.0, 1.0], &[1.0, 0.0]]);
        let t = upgma(&m).unwrap();
        assert!(t.rooted);
        assert_eq!(to_newick(&t), "(A:0.500000,B:0.500000);");
    }

    #[test]
    fn upgma_joins_closest_pair_first() {
        let m = matrix(
            &["A", "B", "C"],
            &[&[0.0, 1.0, 4.0], &[1.0, 0.0, 4.0], &[4.0, 4.0, 0.0]],
        );
        let t = upgma(&m).unwrap();
        assert_eq!(to_newick(&t), "((A:0.500000,B:0.500000):1.500000,C:2.000000);");
    }

    #[test]
    fn upgma_recovers_ultrametric_dendrogram() {
        // Known dendrogram: ((A,B) at h=1, (C,D) at h=1.5) root at h=3.
        let d_ab = 2.0;
        let d_cd = 3.0;
        let other = 6.0;
        let m = matrix(
            &["A", "B", "C", "D"],
            &[
                &[0.0, d_ab, other, other],
                &[d_ab, 0.0, other, other],
                &[other, other, 0.0, d_cd],
                &[other, other, d_cd, 0.0],
            ],
        );
        let t = upgma(&m).unwrap();
        assert_eq!(
            to_newick(&t),
            "((A:1.000000,B:1.000000):2.000000,(C:1.500000,D:1.500000):1.500000);"
        );
    }

    #[test]
    fn upgma_heights_monotone() {
        let m = matrix(
            &["A", "B", "C", "D"],
            &[
                &[0.0, 2.0, 5.0, 9.0],
                &[2.0, 0.0, 4.0, 8.0],
                &[5.0, 4.0, 0.0, 7.0],
                &[9.0, 8.0, 7.0, 0.0],
            ],
        );
        let t = upgma(&m).unwrap();
        fn check(node: &PhyloNode) -> f64 {
            // Returns the height of this node; children heights must not exceed it.
            if node.is_leaf() {
                return 0.0;
            }
            let mut h: Option<f64> = None;
            for (c, len) in &node.children {
                let ch = check(c);
                assert!(*len >= -1e-12, "negative branch {len}");
                let this = ch + len;
                if let Some(prev) = h {
                    assert!((this - prev).abs() < 1e-9, "not ultrametric");
                }
                h = Some(this);
            }
            h.unwrap()
        }
        check(&t.root);
    }

    #[test]
    fn newick_roundtrip_canonical() {
        let m = matrix(
            &["w1", "w2", "w3", "w4"],
            &[
                &[0.0, 0.3, 0.5, 0.6],
                &[0.3, 0.0, 0.4, 0.5],
                &[0.5, 0.4, 0.0, 0.3],
                &[0.6, 0.5, 0.3, 0.0],
            ],
        );
        let t = neighbor_joining(&m).unwrap();
        let nwk = to_newick(&t);
        let parsed = PhyloTree::from_newick(&nwk).unwrap();
        assert_eq!(to_newick(&parsed), nwk);
        assert!(nwk.ends_with(';'));
        let mut labels = parsed.leaf_labels();
        labels.sort();
        assert_eq!(labels, vec!["w1", "w2", "w3", "w4"]);
    }

    #[test]
    fn newick_parser_rejects_garbage() {
        assert!(PhyloTree::from_newick("(A:1,B:2)").is_err()); // no ';'
        assert!(PhyloTree::from_newick("(A:1,:2);").is_err()); // empty label
    }

    #[test]
    fn robinson_foulds_zero_for_same_topology() {
        let m = matrix(
            &["A", "B", "C", "D"],
            &[
                &[0.0, 2.0, 7.0, 7.0],
                &[2.0, 0.0, 7.0, 7.0],
                &[7.0, 7.0, 0.0, 2.0],
                &[7.0, 7.0, 2.0, 0.0],
            ],
        );
        let t1 = neighbor_joining(&m).unwrap();
        let t2 = upgma(&m).unwrap();
        assert_eq!(robinson_foulds(&t1, &t2).unwrap(), 0);
    }

    #[test]
    fn robinson_foulds_detects_different_topologies() {
        let t1 = PhyloTree::from_newick("((A:1,B:1):1,(C:1,D:1):1);").unwrap();
        let t2 = PhyloTree::from_newick("((A:1,C:1):1,(B:1,D:1):1);").unwrap();
        assert_eq!(robinson_foulds(&t1, &t2).unwrap(), 2);
        let t3 = PhyloTree::from_newick("((A:1,B:1):1,(C:1,E:1):1);").unwrap();
        assert!(matches!(
            robinson_foulds(&t1, &t3),
            Err(StemmaError::LeafSetMismatch)
        ));
    }

    #[test]
    fn leaf_set_preserved() {
        let m = matrix(
            &["x", "y", "z"],
            &[&[0.0, 1.0, 2.0], &[1.0, 0.0, 2.0], &[2.0, 2.0, 0.0]],
        );
        for tree in [neighbor_joining(&m).unwrap(), upgma(&m).unwrap()] {
            let mut labels = tree.leaf_labels();
            labels.sort();
            assert_eq!(labels, vec!["x", "y", "z"]);
        }
    }
}
