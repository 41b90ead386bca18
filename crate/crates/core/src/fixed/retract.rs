//! The retraction chain on the reductive star of a reduced vertex and its
//! identification with a join of local reductive cores.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use super::local::FOrdering;
use super::FixedContext;
use crate::basis::Frame;
use crate::error::Result;
use crate::topology::{certify_contractible, join_natural, order_complex, Poset, Verdict};
use crate::tree::{poset_leq, BasedPartition, PointedTree, STAR};

/// Result of comparing `R₃` with the join of local cores.
#[derive(Debug, Clone, Serialize)]
pub struct JoinCheck {
    pub active_blocks: Vec<usize>,
    pub local_sizes: Vec<usize>,
    pub join_size: usize,
    pub r3_size: usize,
    /// Trees of `R₃` with a nontrivial piece outside the active blocks or a
    /// piece outside the local core.
    pub unmapped: usize,
    pub bijective: bool,
    pub isomorphic: bool,
}

impl JoinCheck {
    pub fn passed(&self) -> bool {
        self.unmapped == 0 && self.bijective && self.isomorphic
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RetractionChain {
    pub r1: Vec<String>,
    pub r2: Vec<String>,
    pub r3: Vec<String>,
    pub f1_ok: bool,
    pub f2_ok: bool,
    /// `None` when `R₁` is empty.
    pub r1_verdict: Option<Verdict>,
    pub join: JoinCheck,
}

impl RetractionChain {
    pub fn passed(&self) -> bool {
        self.f1_ok
            && self.f2_ok
            && self.r1_verdict.as_ref().is_none_or(Verdict::is_acceptable)
            && self.join.passed()
    }
}

fn tree_poset(trees: &[PointedTree]) -> Result<Poset> {
    Poset::new(trees.iter().map(PointedTree::code).collect(), |i, j| {
        poset_leq(&trees[i], &trees[j])
    })
}

/// Merges every petal of `part` meeting `labels` into one petal.
fn merge_petals(part: &BasedPartition, labels: &[u8]) -> BasedPartition {
    let mut merged = Vec::new();
    let mut rest = Vec::new();
    for p in &part.petals {
        if p.iter().any(|x| labels.contains(x)) {
            merged.extend(p.iter().copied());
        } else {
            rest.push(p.clone());
        }
    }
    merged.sort_unstable();
    if !merged.is_empty() {
        rest.push(merged);
    }
    rest.sort();
    BasedPartition {
        operative: part.operative,
        petals: rest,
    }
}

struct Chain<'c, 'a> {
    ctx: &'c FixedContext<'a>,
    frame: Frame,
    base: PointedTree,
    reductive: HashMap<(u8, BasedPartition), bool>,
}

impl<'c, 'a> Chain<'c, 'a> {
    /// Some move at operative `k` carried by `tree` is pair-reductive.
    fn partition_reductive(&mut self, tree: &PointedTree, k: u8) -> Result<bool> {
        let key = (k, tree.partition(k));
        if let Some(&r) = self.reductive.get(&key) {
            return Ok(r);
        }
        let mut found = false;
        for mv in self.ctx.lab.carried_moves(&self.frame, tree) {
            if mv.operative + 1 != k as usize {
                continue;
            }
            let res = mv.apply_to_frame(self.ctx.fp(), &self.frame)?;
            if self.ctx.pair_reductive(&self.frame, &res)? {
                found = true;
                break;
            }
        }
        self.reductive.insert(key, found);
        Ok(found)
    }

    fn nontrivial(&self, tree: &PointedTree) -> Vec<u8> {
        (1..=self.base.n() as u8)
            .filter(|&k| tree.partition(k) != self.base.partition(k))
            .collect()
    }

    fn in_r1(&self, tree: &PointedTree) -> Result<bool> {
        let orbit = self.ctx.lab.orbit(&self.frame, tree)?;
        for f in orbit.members.values() {
            if let Some(r) = self.ctx.nuclear_rep(f)? {
                if self.ctx.compare_f_norm(&r, &self.frame) == FOrdering::Less {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn in_r2(&mut self, tree: &PointedTree) -> Result<bool> {
        for k in self.nontrivial(tree) {
            if !self.partition_reductive(tree, k)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The base tree with block `b` replaced by the hyperedges of `tree` in it.
    fn piece(&self, tree: &PointedTree, b: usize) -> Result<PointedTree> {
        let block_edge = &self.base.edges()[self.ctx.idx.blocks[b].edge];
        let mut edges: Vec<Vec<u8>> = self
            .base
            .edges()
            .iter()
            .filter(|e| *e != block_edge)
            .cloned()
            .collect();
        edges.extend(
            tree.edges()
                .iter()
                .filter(|e| e.iter().all(|x| block_edge.contains(x)))
                .cloned(),
        );
        PointedTree::new(self.base.n(), edges)
    }

    fn in_r3(&mut self, tree: &PointedTree) -> Result<bool> {
        if !self.in_r2(tree)? {
            return Ok(false);
        }
        for k in self.nontrivial(tree) {
            for b in self.ctx.idx.adjacent_blocks(k) {
                let p = self.piece(tree, b)?;
                if p.partition(k) != self.base.partition(k) && !self.partition_reductive(&p, k)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    fn f1(&mut self, tree: &PointedTree) -> Result<PointedTree> {
        let mut out = tree.clone();
        for k in self.nontrivial(tree) {
            if !self.partition_reductive(tree, k)? {
                out = out.fold_to(k, &self.base.partition(k))?;
            }
        }
        Ok(out)
    }

    fn f2(&mut self, tree: &PointedTree) -> Result<PointedTree> {
        let mut out = tree.clone();
        for k in self.nontrivial(tree) {
            let mut target = out.partition(k);
            for b in self.ctx.idx.adjacent_blocks(k) {
                let p = self.piece(tree, b)?;
                if p.partition(k) == self.base.partition(k) || self.partition_reductive(&p, k)? {
                    continue;
                }
                let bl = &self.ctx.idx.blocks[b];
                let mut labels: Vec<u8> = bl.labels.iter().copied().filter(|&x| x != k).collect();
                if bl.stem != k {
                    labels.push(STAR);
                }
                target = merge_petals(&target, &labels);
            }
            if target != out.partition(k) {
                out = out.fold_to(k, &target)?;
            }
        }
        Ok(out)
    }
}

impl<'a> FixedContext<'a> {
    /// Builds `R₁ ⊇ R₂ ⊇ R₃` in the star of the reduced vertex framed by
    /// `frame` (a minimized `F`-standard representative), checks the
    /// retractions `f₁`, `f₂` and compares `R₃` with the join of the local
    /// reductive cores.
    pub fn retraction_chain(&self, frame: &Frame) -> Result<RetractionChain> {
        let mut ch = Chain {
            ctx: self,
            frame: frame.clone(),
            base: self.base_tree().clone(),
            reductive: HashMap::new(),
        };
        let star = self.star_trees();
        let mut r1 = Vec::new();
        for t in &star {
            if ch.in_r1(t)? {
                r1.push(t.clone());
            }
        }
        let mut r2 = Vec::new();
        for t in &r1 {
            if ch.in_r2(t)? {
                r2.push(t.clone());
            }
        }
        let mut r3 = Vec::new();
        for t in &r2 {
            if ch.in_r3(t)? {
                r3.push(t.clone());
            }
        }
        let mut f1_ok = true;
        for t in &r1 {
            let img = ch.f1(t)?;
            f1_ok &= r2.contains(&img) && poset_leq(&img, t) && ch.f1(&img)? == img;
        }
        let mut f2_ok = true;
        for t in &r2 {
            let img = ch.f2(t)?;
            f2_ok &= r3.contains(&img) && poset_leq(&img, t) && ch.f2(&img)? == img;
        }
        let r1_verdict = if r1.is_empty() {
            None
        } else {
            Some(certify_contractible(&order_complex(&tree_poset(&r1)?))?)
        };
        let join = self.join_check(frame, &r3)?;
        let codes = |v: &[PointedTree]| v.iter().map(PointedTree::code).collect();
        Ok(RetractionChain {
            r1: codes(&r1),
            r2: codes(&r2),
            r3: codes(&r3),
            f1_ok,
            f2_ok,
            r1_verdict,
            join,
        })
    }

    /// Local reductive cores per block, in block order.
    pub fn local_cores(&self, frame: &Frame) -> Result<Vec<Vec<PointedTree>>> {
        let mut out = Vec::new();
        for (b, bg) in self.block_groups().iter().enumerate() {
            match self.block_frame(frame, b)? {
                Some(local) => out.push(bg.reductive_core(&local)?),
                None => out.push(Vec::new()),
            }
        }
        Ok(out)
    }

    fn join_check(&self, frame: &Frame, r3: &[PointedTree]) -> Result<JoinCheck> {
        let cores = self.local_cores(frame)?;
        let active: Vec<usize> = (0..cores.len()).filter(|&b| !cores[b].is_empty()).collect();
        let posets = active
            .iter()
            .map(|&b| tree_poset(&cores[b]))
            .collect::<Result<Vec<_>>>()?;
        let (join, elems) = join_natural(&posets);
        let index: BTreeMap<Vec<Option<usize>>, usize> =
            elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let base = self.base_tree();
        let mut map = Vec::new();
        let mut unmapped = 0;
        'trees: for t in r3 {
            let mut tuple = vec![None; active.len()];
            for (b, bg) in self.block_groups().iter().enumerate() {
                let edge = &base.edges()[self.idx.blocks[b].edge];
                let local = bg.local_tree(edge, t)?;
                if local == bg.trivial_tree() {
                    continue;
                }
                let pos = active
                    .iter()
                    .position(|&a| a == b).zip(cores[b].iter().position(|c| *c == local));
                match pos {
                    Some((p, q)) => tuple[p] = Some(q),
                    None => {
                        unmapped += 1;
                        continue 'trees;
                    }
                }
            }
            match index.get(&tuple) {
                Some(&i) => map.push(i),
                None => unmapped += 1,
            }
        }
        let mut hit = vec![0usize; join.len()];
        for &i in &map {
            hit[i] += 1;
        }
        let bijective = unmapped == 0 && hit.iter().all(|&h| h == 1);
        let isomorphic = bijective && tree_poset(r3)?.is_isomorphism(&join, &map);
        Ok(JoinCheck {
            active_blocks: active,
            local_sizes: posets.iter().map(Poset::len).collect(),
            join_size: join.len(),
            r3_size: r3.len(),
            unmapped,
            bijective,
            isomorphic,
        })
    }
}
