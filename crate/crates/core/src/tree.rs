//! Pointed labelled bipartite trees and the folding poset `P(𝒥)`.
//!
//! Labels are `0` for `∗` and `1..=n` for the factors. Since labelled
//! vertices are pairwise distinct, an unlabelled vertex is determined by its
//! set of labelled neighbours, so a tree is stored as the sorted list of
//! those neighbour sets ("hyperedges").

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const STAR: u8 = 0;
pub const MAX_TREE_LABELS: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointedTree {
    n: usize,
    edges: Vec<Vec<u8>>,
}

/// `A̲̲(k)`: the partition of the labels other than `k` by components of `T − k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasedPartition {
    pub operative: u8,
    pub petals: Vec<Vec<u8>>,
}

impl BasedPartition {
    pub fn is_trivial(&self) -> bool {
        self.petals.len() <= 1
    }

    pub fn star_petal(&self) -> Option<usize> {
        self.petals.iter().position(|p| p.contains(&STAR))
    }

    pub fn petal_of(&self, label: u8) -> Option<usize> {
        self.petals.iter().position(|p| p.contains(&label))
    }

    /// True if every petal of `self` is a union of petals of `finer`.
    pub fn coarsens(&self, finer: &BasedPartition) -> bool {
        finer.petals.iter().all(|p| {
            let owner = self.petal_of(p[0]);
            owner.is_some() && p.iter().all(|&x| self.petal_of(x) == owner)
        })
    }
}

impl PointedTree {
    pub fn new(n: usize, edges: Vec<Vec<u8>>) -> Result<Self> {
        let mut edges: Vec<Vec<u8>> = edges
            .into_iter()
            .map(|mut e| {
                e.sort_unstable();
                e.dedup();
                e
            })
            .collect();
        edges.sort();
        let t = Self { n, edges };
        t.validate()?;
        Ok(t)
    }

    /// The star with a single unlabelled centre.
    pub fn nuclear(n: usize) -> Self {
        Self {
            n,
            edges: vec![(0..=n as u8).collect()],
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.edges.is_empty() {
            return bad("tree has no unlabelled vertex".into());
        }
        let mut sum = 0;
        for e in &self.edges {
            if e.len() < 2 {
                return bad(format!("unlabelled vertex of valence {}", e.len()));
            }
            if e.iter().any(|&x| x as usize > self.n) {
                return bad(format!("label out of range in {e:?}"));
            }
            sum += e.len();
        }
        if self.edges.windows(2).any(|w| w[0] == w[1]) {
            return bad("repeated unlabelled vertex".into());
        }
        let star_deg = self.edges.iter().filter(|e| e.contains(&STAR)).count();
        if star_deg != 1 {
            return bad(format!("∗ has valence {star_deg}"));
        }
        // vertices: n+1 labels + m unlabelled; edges of the incidence graph: sum
        if sum != self.n + self.edges.len() {
            return bad("incidence graph is not a tree".into());
        }
        let mut uf = UnionFind::new(self.n + 1);
        for e in &self.edges {
            for w in e.windows(2) {
                uf.union(w[0] as usize, w[1] as usize);
            }
        }
        if (0..=self.n).any(|x| uf.find(x) != uf.find(0)) {
            return bad("tree is disconnected".into());
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Labelled neighbour sets of the unlabelled vertices, in canonical order.
    pub fn edges(&self) -> &[Vec<u8>] {
        &self.edges
    }

    pub fn is_nuclear(&self) -> bool {
        self.edges.len() == 1
    }

    pub fn partition(&self, k: u8) -> BasedPartition {
        let mut uf = UnionFind::new(self.n + 1);
        for e in &self.edges {
            let rest: Vec<u8> = e.iter().copied().filter(|&x| x != k).collect();
            for w in rest.windows(2) {
                uf.union(w[0] as usize, w[1] as usize);
            }
        }
        let mut groups: std::collections::BTreeMap<usize, Vec<u8>> = Default::default();
        for x in 0..=self.n as u8 {
            if x != k {
                groups.entry(uf.find(x as usize)).or_default().push(x);
            }
        }
        let mut petals: Vec<Vec<u8>> = groups.into_values().collect();
        petals.sort();
        BasedPartition {
            operative: k,
            petals,
        }
    }

    pub fn partitions(&self) -> Vec<BasedPartition> {
        (0..=self.n as u8).map(|k| self.partition(k)).collect()
    }

    /// Labels adjacent to the unlabelled vertex `edge`, excluding `∗`.
    pub fn labels_at(&self, edge: usize) -> Vec<u8> {
        self.edges[edge].iter().copied().filter(|&x| x != STAR).collect()
    }

    /// Indices of the hyperedges containing `k`.
    pub fn edges_at(&self, k: u8) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].contains(&k))
            .collect()
    }

    /// Identifies the unlabelled endpoints of the given edges at `k`.
    pub fn fold(&self, k: u8, merge: &[usize]) -> Result<Self> {
        let set: BTreeSet<usize> = merge.iter().copied().collect();
        for &i in &set {
            if i >= self.edges.len() || !self.edges[i].contains(&k) {
                return Err(Error::InvalidInput(format!(
                    "edge {i} does not meet label {k}"
                )));
            }
        }
        if set.len() <= 1 {
            return Ok(self.clone());
        }
        let mut merged: BTreeSet<u8> = BTreeSet::new();
        let mut edges = Vec::new();
        for (i, e) in self.edges.iter().enumerate() {
            if set.contains(&i) {
                merged.extend(e.iter().copied());
            } else {
                edges.push(e.clone());
            }
        }
        edges.push(merged.into_iter().collect());
        Self::new(self.n, edges)
    }

    /// The tree whose partition at `k` is coarsened to `target` by folding.
    pub fn fold_to(&self, k: u8, target: &BasedPartition) -> Result<Self> {
        let mut t = self.clone();
        loop {
            let at = t.edges_at(k);
            let mut merged = false;
            'outer: for (x, &i) in at.iter().enumerate() {
                for &j in &at[x + 1..] {
                    let pi = t.edges[i].iter().find(|&&l| l != k).copied().unwrap();
                    let pj = t.edges[j].iter().find(|&&l| l != k).copied().unwrap();
                    if target.petal_of(pi) == target.petal_of(pj) {
                        t = t.fold(k, &[i, j])?;
                        merged = true;
                        break 'outer;
                    }
                }
            }
            if !merged {
                return Ok(t);
            }
        }
    }

    /// `∗-1|1-2`-style code: hyperedges separated by `|`.
    pub fn code(&self) -> String {
        self.edges
            .iter()
            .map(|e| {
                e.iter()
                    .map(|&x| label_name(x))
                    .collect::<Vec<_>>()
                    .join("-")
            })
            .collect::<Vec<_>>()
            .join("|")
    }

    pub fn parse_code(n: usize, code: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for part in code.split('|') {
            let mut e = Vec::new();
            for tok in part.split('-') {
                let tok = tok.trim();
                if tok == "*" {
                    e.push(STAR);
                } else {
                    e.push(tok.parse::<u8>().map_err(|_| {
                        Error::InvalidInput(format!("bad label `{tok}` in tree code"))
                    })?);
                }
            }
            edges.push(e);
        }
        Self::new(n, edges)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph tree {\n");
        for x in 0..=self.n as u8 {
            writeln!(s, "  \"{}\" [shape=box];", label_name(x)).unwrap();
        }
        for (i, e) in self.edges.iter().enumerate() {
            writeln!(s, "  u{i} [shape=circle,label=\"\"];").unwrap();
            for &x in e {
                writeln!(s, "  \"{}\" -- u{i};", label_name(x)).unwrap();
            }
        }
        s.push_str("}\n");
        s
    }

    /// Adjacency as JSON: labelled vertices by name, unlabelled as `u<i>`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut adj = serde_json::Map::new();
        for x in 0..=self.n as u8 {
            let ns: Vec<String> = self
                .edges_at(x)
                .into_iter()
                .map(|i| format!("u{i}"))
                .collect();
            adj.insert(label_name(x), ns.into());
        }
        for (i, e) in self.edges.iter().enumerate() {
            let ns: Vec<String> = e.iter().map(|&x| label_name(x)).collect();
            adj.insert(format!("u{i}"), ns.into());
        }
        serde_json::json!({ "n": self.n, "code": self.code(), "adjacency": adj })
    }
}

pub fn label_name(x: u8) -> String {
    if x == STAR {
        "*".to_string()
    } else {
        x.to_string()
    }
}

/// `A ≤ B` in the folding order: `B̲̲(k)` refines `A̲̲(k)` for every `k`.
pub fn poset_leq(a: &PointedTree, b: &PointedTree) -> bool {
    a.n == b.n && (0..=a.n as u8).all(|k| a.partition(k).coarsens(&b.partition(k)))
}

/// All pointed trees on `{∗, 1, …, n}`, nuclear first.
pub fn enumerate_pointed_trees(n: usize) -> Result<Vec<PointedTree>> {
    if n == 0 || n > MAX_TREE_LABELS {
        return Err(Error::CapExceeded {
            what: "pointed-tree label count",
            cap: MAX_TREE_LABELS,
        });
    }
    let labels: Vec<u8> = (1..=n as u8).collect();
    let mut out = Vec::new();
    for s in nonempty_subsets(&labels) {
        let rest: Vec<u8> = labels.iter().copied().filter(|x| !s.contains(x)).collect();
        let mut top = vec![STAR];
        top.extend(&s);
        for forest in distribute(&s, &rest) {
            let mut edges = vec![top.clone()];
            edges.extend(forest);
            out.push(PointedTree::new(n, edges)?);
        }
    }
    out.sort_by(|a, b| a.edges.len().cmp(&b.edges.len()).then_with(|| a.cmp(b)));
    Ok(out)
}

/// Forests of hyperedges hanging at `r` whose labels are exactly `set`.
fn hang(r: u8, set: &[u8]) -> Vec<Vec<Vec<u8>>> {
    if set.is_empty() {
        return vec![Vec::new()];
    }
    let m = set[0];
    let others: Vec<u8> = set[1..].to_vec();
    let mut out = Vec::new();
    for extra in all_subsets(&others) {
        let mut block = vec![m];
        block.extend(&extra);
        block.sort_unstable();
        let remaining: Vec<u8> = others.iter().copied().filter(|x| !extra.contains(x)).collect();
        let tails = hang(r, &remaining);
        for s in nonempty_subsets(&block) {
            let below: Vec<u8> = block.iter().copied().filter(|x| !s.contains(x)).collect();
            let mut edge = vec![r];
            edge.extend(&s);
            for sub in distribute(&s, &below) {
                for tail in &tails {
                    let mut f = vec![edge.clone()];
                    f.extend(sub.iter().cloned());
                    f.extend(tail.iter().cloned());
                    out.push(f);
                }
            }
        }
    }
    out
}

/// Assigns each label of `below` to an owner in `owners` and hangs the
/// assigned sets beneath their owners.
fn distribute(owners: &[u8], below: &[u8]) -> Vec<Vec<Vec<u8>>> {
    let k = owners.len();
    let mut out = Vec::new();
    let total = k.pow(below.len() as u32);
    for code in 0..total {
        let mut c = code;
        let mut parts: Vec<Vec<u8>> = vec![Vec::new(); k];
        for &x in below {
            parts[c % k].push(x);
            c /= k;
        }
        let mut acc: Vec<Vec<Vec<u8>>> = vec![Vec::new()];
        for (o, part) in owners.iter().zip(&parts) {
            let forests = hang(*o, part);
            let mut next = Vec::new();
            for a in &acc {
                for f in &forests {
                    let mut g = a.clone();
                    g.extend(f.iter().cloned());
                    next.push(g);
                }
            }
            acc = next;
        }
        out.extend(acc);
    }
    out
}

fn all_subsets(xs: &[u8]) -> Vec<Vec<u8>> {
    (0..1u32 << xs.len())
        .map(|mask| {
            xs.iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &x)| x)
                .collect()
        })
        .collect()
}

fn nonempty_subsets(xs: &[u8]) -> Vec<Vec<u8>> {
    all_subsets(xs).into_iter().filter(|s| !s.is_empty()).collect()
}

/// The smallest tree whose partition at `k` is `petals` (one of which
/// contains `∗`) and which is trivial elsewhere.
pub fn carrier_tree(n: usize, k: u8, petals: &[Vec<u8>]) -> Result<PointedTree> {
    let mut edges = Vec::new();
    for p in petals {
        let mut e = p.clone();
        e.push(k);
        edges.push(e);
    }
    PointedTree::new(n, edges)
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    pub(crate) fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: usize, code: &str) -> PointedTree {
        PointedTree::parse_code(n, code).unwrap()
    }

    #[test]
    fn small_counts() {
        assert_eq!(enumerate_pointed_trees(1).unwrap(), vec![t(1, "*-1")]);
        let two = enumerate_pointed_trees(2).unwrap();
        assert_eq!(two.len(), 3);
        assert!(two[0].is_nuclear());
        assert!(two.contains(&t(2, "*-1|1-2")));
        assert!(two.contains(&t(2, "*-2|1-2")));
        assert!(enumerate_pointed_trees(7).is_err());
    }

    #[test]
    fn partitions_examples() {
        let nuc = PointedTree::nuclear(2);
        for k in 1..=2 {
            assert!(nuc.partition(k).is_trivial());
        }
        let path = t(2, "*-1|1-2");
        assert_eq!(path.partition(1).petals, vec![vec![0], vec![2]]);
        assert_eq!(path.partition(2).petals, vec![vec![0, 1]]);
    }

    #[test]
    fn leq_examples() {
        let trees = enumerate_pointed_trees(2).unwrap();
        let nuc = &trees[0];
        for x in &trees {
            assert!(poset_leq(nuc, x));
            assert!(poset_leq(x, x));
        }
        assert!(!poset_leq(&t(2, "*-1|1-2"), &t(2, "*-2|1-2")));
    }

    #[test]
    fn fold_examples() {
        let path = t(2, "*-1|1-2");
        let at1 = path.edges_at(1);
        assert_eq!(path.fold(1, &at1).unwrap(), PointedTree::nuclear(2));
        assert_eq!(path.fold(1, &at1[..1]).unwrap(), path);
        assert!(path.fold(2, &[0]).is_err());
    }

    #[test]
    fn invalid_trees_rejected() {
        assert!(PointedTree::new(2, vec![vec![0, 1], vec![0, 2]]).is_err());
        assert!(PointedTree::new(2, vec![vec![0, 1], vec![1]]).is_err());
        assert!(PointedTree::new(2, vec![vec![0, 1]]).is_err());
        assert!(PointedTree::new(3, vec![vec![0, 1, 2], vec![1, 2, 3]]).is_err());
    }

    #[test]
    fn exports() {
        let path = t(2, "*-1|1-2");
        assert_eq!(path.code(), "*-1|1-2");
        let dot = path.to_dot();
        assert!(dot.contains("\"*\" [shape=box]"));
        assert!(dot.contains("u1 [shape=circle"));
        let j = path.to_json();
        assert_eq!(j["adjacency"]["1"], serde_json::json!(["u0", "u1"]));
    }

    #[test]
    fn carrier_tree_shape() {
        let c = carrier_tree(3, 1, &[vec![0, 3], vec![2]]).unwrap();
        assert_eq!(c.partition(1).petals, vec![vec![0, 3], vec![2]]);
        assert!(c.partition(2).is_trivial());
        assert!(c.partition(3).is_trivial());
    }
}
