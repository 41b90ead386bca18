//! Block-local free products `G_a`, the concatenated block norm and the
//! lift/restrict correspondence between local and global moves.

use std::cmp::Ordering;

use serde::Serialize;

use super::{gamma_of, map_word, CircTables, FixedContext, RepWords, TreeIndices};
use crate::auto::AutPair;
use crate::basis::{canonicalize_basis, Basis, ElementOrder, Frame, DEFAULT_CUTOFF, MAX_CUTOFF};
use crate::complex::{Complex, WhiteheadAuto};
use crate::error::{Error, Result};
use crate::group::{FactorGroup, FactorSource, FreeProduct, Letter, Word};
use crate::tree::{PointedTree, STAR};

/// `G_a = ∗_{j ∈ I(a)} G°°_{j,a}` with its local complex.
pub struct BlockGroup {
    pub block: usize,
    pub stem: u8,
    /// Local factor `t` is the global label `labels[t]`.
    pub labels: Vec<u8>,
    /// Local element index to global element index, per local factor.
    pub elements: Vec<Vec<u8>>,
    /// `G°_{j,a}` trivial, replaced by a formal `ℤ/2`.
    pub formal: Vec<bool>,
    pub lab: Complex,
}

impl BlockGroup {
    pub fn new(lab: &Complex, circ: &CircTables, idx: &TreeIndices, b: usize) -> Result<Self> {
        let fp = lab.fp();
        let block = &idx.blocks[b];
        let first = block.children[0];
        let mut factors = Vec::new();
        let mut elements = Vec::new();
        let mut formal = Vec::new();
        for (t, &j) in block.labels.iter().enumerate() {
            let sub = circ.get(j, first).to_vec();
            for &c in &block.children[1..] {
                if circ.get(j, c) != sub.as_slice() {
                    return Err(Error::Verification(format!(
                        "G° of {j} differs between children {first} and {c}"
                    )));
                }
            }
            if sub.len() == 1 {
                factors.push(FactorGroup::cyclic(t + 1, 2)?);
                elements.push(vec![0, fp.factor(j as usize - 1).lambda()]);
                formal.push(true);
                continue;
            }
            let g = fp.factor(j as usize - 1);
            let pos = |x: u8| sub.binary_search(&x).unwrap() as u8;
            let table = sub
                .iter()
                .map(|&x| sub.iter().map(|&y| pos(g.mul(x, y))).collect())
                .collect();
            factors.push(FactorGroup::from_table(
                t + 1,
                table,
                FactorSource::Table(format!("G°({j})")),
            )?);
            elements.push(sub);
            formal.push(false);
        }
        let local = FreeProduct::new_unchecked_rank(factors)?;
        let mut prefix = Vec::new();
        if let Some(s) = block.labels.iter().position(|&x| x == block.stem) {
            prefix.push(Word::letter(s, 1));
        }
        for t in 0..block.labels.len() {
            if block.labels[t] != block.stem {
                prefix.push(Word::letter(t, 1));
            }
        }
        let order = ElementOrder::with_prefix(&local, &prefix, MAX_CUTOFF);
        let lab = Complex::with_order(local, order, *lab.caps())?;
        Ok(Self {
            block: b,
            stem: block.stem,
            labels: block.labels.clone(),
            elements,
            formal,
            lab,
        })
    }

    pub fn fp(&self) -> &FreeProduct {
        self.lab.fp()
    }

    pub fn rank(&self) -> usize {
        self.labels.len()
    }

    pub fn local_index(&self, label: u8) -> Option<usize> {
        self.labels.iter().position(|&x| x == label)
    }

    /// Local index of the stem, `None` at the root block.
    pub fn stem_index(&self) -> Option<usize> {
        self.local_index(self.stem)
    }

    /// `σ`: local word to global word; formal letters go to `λ_j`.
    pub fn sigma(&self, w: &Word) -> Word {
        
        map_word(w, |l| {
            let t = l.factor as usize;
            Some(Letter::new(
                self.labels[t] as usize - 1,
                self.elements[t][l.elem as usize],
            ))
        })
        .unwrap()
    }

    /// Global word with letters in real `G°` factors to its local word.
    pub fn to_local(&self, w: &Word) -> Option<Word> {
        map_word(w, |l| {
            let t = self.local_index(l.factor + 1)?;
            if self.formal[t] {
                return None;
            }
            let e = self.elements[t].binary_search(&l.elem).ok()?;
            Some(Letter::new(t, e as u8))
        })
    }

    /// `ℋ_a`: relative conjugators in local letters, `ε` at the stem.
    pub fn local_basis(&self, words: &RepWords) -> Option<Basis> {
        let raw = self
            .labels
            .iter()
            .map(|&j| {
                if j == self.stem {
                    Some(Word::empty())
                } else {
                    self.to_local(&words.relative[j as usize])
                }
            })
            .collect::<Option<Vec<_>>>()?;
        Some(canonicalize_basis(self.fp(), &raw))
    }

    /// The bottom of the local star: nuclear at the root block, otherwise
    /// `∗` pendant at the stem.
    pub fn trivial_tree(&self) -> PointedTree {
        let m = self.rank();
        match self.stem_index() {
            None => PointedTree::nuclear(m),
            Some(s) => PointedTree::new(
                m,
                vec![vec![STAR, s as u8 + 1], (1..=m as u8).collect()],
            )
            .expect("pendant tree"),
        }
    }

    /// `B̲̲_a`: hyperedges of a global tree lying in this block, relabelled.
    pub fn local_tree(&self, block_edge: &[u8], tree: &PointedTree) -> Result<PointedTree> {
        let mut edges = Vec::new();
        for e in tree.edges() {
            if e.iter().all(|x| block_edge.contains(x)) {
                edges.push(
                    e.iter()
                        .map(|&x| {
                            if x == STAR {
                                STAR
                            } else {
                                self.local_index(x).unwrap() as u8 + 1
                            }
                        })
                        .collect(),
                );
            }
        }
        if let Some(s) = self.stem_index() {
            edges.push(vec![STAR, s as u8 + 1]);
        }
        PointedTree::new(self.rank(), edges)
    }

    /// Inverse of [`BlockGroup::local_tree`].
    pub fn global_edges(&self, local: &PointedTree) -> Vec<Vec<u8>> {
        let stem = self.stem_index().map(|s| s as u8 + 1);
        local
            .edges()
            .iter()
            .filter(|e| !(e.len() == 2 && e[0] == STAR && Some(e[1]) == stem))
            .map(|e| {
                e.iter()
                    .map(|&x| if x == STAR { STAR } else { self.labels[x as usize - 1] })
                    .collect()
            })
            .collect()
    }

    /// Trees of the local star above the trivial tree, the bottom excluded.
    pub fn star_trees(&self) -> Vec<PointedTree> {
        let bottom = self.trivial_tree();
        self.lab
            .trees()
            .iter()
            .filter(|t| **t != bottom && crate::tree::poset_leq(&bottom, t))
            .cloned()
            .collect()
    }

    /// Some move carried by `tree` at local operative `t` shortens `ℋ_a`.
    pub fn partition_reductive(&self, frame: &Frame, tree: &PointedTree, t: usize) -> Result<bool> {
        for mv in self.lab.carried_moves(frame, tree) {
            if mv.operative != t {
                continue;
            }
            let next = mv.apply_to_frame(self.fp(), frame)?;
            if self.lab.compare(&next, frame) == crate::basis::NormOrdering::Less {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Local `R₂`: star trees whose every nontrivial partition is reductive.
    pub fn reductive_core(&self, frame: &Frame) -> Result<Vec<PointedTree>> {
        let bottom = self.trivial_tree();
        let mut out = Vec::new();
        'trees: for t in self.star_trees() {
            for k in 1..=self.rank() as u8 {
                if t.partition(k) != bottom.partition(k)
                    && !self.partition_reductive(frame, &t, k as usize - 1)?
                {
                    continue 'trees;
                }
            }
            out.push(t);
        }
        Ok(out)
    }

    /// Local moves carried by trees of the local star.
    pub fn star_moves(&self, frame: &Frame) -> Vec<WhiteheadAuto> {
        let mut out: Vec<WhiteheadAuto> = Vec::new();
        for t in self.star_trees() {
            for mv in self.lab.carried_moves(frame, &t) {
                if !out.contains(&mv) {
                    out.push(mv);
                }
            }
        }
        out
    }
}

/// Outcome of a block-wise norm comparison. `Tie` means equal up to the
/// largest cutoff with differing block data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FOrdering {
    Less,
    Equal,
    Tie,
    Greater,
}

/// Split-length comparison for one element.
#[derive(Debug, Clone, Serialize)]
pub struct SplitCheck {
    pub block: usize,
    pub element: String,
    pub total: usize,
    pub outer: usize,
    pub inner: usize,
}

impl SplitCheck {
    pub fn holds(&self) -> bool {
        self.total == self.outer + self.inner
    }
}

/// A local reductive move with its lift.
#[derive(Debug, Clone, Serialize)]
pub struct LocalMoveCheck {
    pub block: usize,
    pub local: String,
    pub lifted: String,
    pub lift_reductive: bool,
}

impl<'a> FixedContext<'a> {
    /// Local frame `ℋ_a` of a representative.
    pub fn block_frame(&self, frame: &Frame, b: usize) -> Result<Option<Frame>> {
        let words = self.rep_words(frame);
        match self.blocks[b].local_basis(&words) {
            Some(basis) => Ok(Some(Frame::from_basis(self.blocks[b].fp(), &basis)?)),
            None => Ok(None),
        }
    }

    fn block_key(&self, words: &RepWords, b: usize) -> Vec<Word> {
        let bl = &self.idx.blocks[b];
        let mut key = vec![if bl.stem == STAR {
            Word::empty()
        } else {
            words.path_word[bl.stem as usize].clone()
        }];
        key.extend(bl.children.iter().map(|&c| words.relative[c as usize].clone()));
        key
    }

    /// Coordinates `|σ(g)|_ℋ` for the first `cutoff` words of the local order.
    pub fn block_vector(&self, frame: &Frame, b: usize, cutoff: usize) -> Vec<u32> {
        let bg = &self.blocks[b];
        let order = bg.lab.order();
        order.words()[..cutoff.min(order.len())]
            .iter()
            .map(|g| frame.length(self.fp(), &bg.sigma(g)) as u32)
            .collect()
    }

    /// Lazy comparison of one block, doubling the cutoff.
    pub fn compare_block(&self, a: &Frame, b: &Frame, blk: usize) -> FOrdering {
        let ka = self.block_key(&self.rep_words(a), blk);
        let kb = self.block_key(&self.rep_words(b), blk);
        if ka == kb {
            return FOrdering::Equal;
        }
        let bg = &self.blocks[blk];
        let total = bg.lab.order().len();
        let cap = self.lab.caps().cutoff.min(total);
        let mut cutoff = DEFAULT_CUTOFF.min(cap);
        loop {
            let va = self.block_vector(a, blk, cutoff);
            let vb = self.block_vector(b, blk, cutoff);
            match va.cmp(&vb) {
                Ordering::Less => return FOrdering::Less,
                Ordering::Greater => return FOrdering::Greater,
                Ordering::Equal => {}
            }
            if cutoff >= cap {
                return if bg.rank() == 1 && cap == total {
                    FOrdering::Equal
                } else {
                    FOrdering::Tie
                };
            }
            cutoff = (cutoff * 2).min(cap);
        }
    }

    /// The concatenated block norm, compared block by block in BFS order.
    pub fn compare_f_norm(&self, a: &Frame, b: &Frame) -> FOrdering {
        let mut tie = false;
        for blk in 0..self.blocks.len() {
            match self.compare_block(a, b, blk) {
                FOrdering::Equal => {}
                FOrdering::Tie => tie = true,
                o => return o,
            }
        }
        if tie {
            FOrdering::Tie
        } else {
            FOrdering::Equal
        }
    }

    /// The move conjugating everything beyond block `b` by
    /// `w(J(i)) γ w(J(i))⁻¹`, `γ ∈ G°_{i,b}`.
    pub fn block_shift(&self, frame: &Frame, b: usize, gamma: u8) -> Result<WhiteheadAuto> {
        let fp = self.fp();
        let bl = &self.idx.blocks[b];
        let i = bl.stem;
        let words = self.rep_words(frame);
        let w = &words.path_word[i as usize];
        let x = fp.conjugate(w, &Word::letter(i as usize - 1, gamma));
        let g = gamma_of(fp, frame.basis(), i as usize - 1, &x)
            .ok_or_else(|| Error::Verification("shift is not in H_i".into()))?;
        let mut gammas = vec![0u8; self.idx.n];
        for &c in &bl.children {
            for j in self.idx.subtree(c) {
                gammas[j as usize - 1] = g;
            }
        }
        WhiteheadAuto::new(frame.basis().clone(), i as usize - 1, gammas)
    }

    /// Minimizes the block norm over the `F`-standard representatives of
    /// one vertex, block by block. Returns the frame and the blocks where
    /// two choices tied.
    pub fn minimize_representative(&self, frame: &Frame) -> Result<(Frame, Vec<usize>)> {
        let mut cur = frame.clone();
        let mut ties = Vec::new();
        for b in 1..self.blocks.len() {
            let bg = &self.blocks[b];
            let s = bg.stem_index().expect("non-root block has a stem");
            if bg.formal[s] {
                continue;
            }
            let start = cur.clone();
            let mut best = start.clone();
            for &g in &bg.elements[s][1..] {
                let mv = self.block_shift(&start, b, g)?;
                let next = mv.apply_to_frame(self.fp(), &start)?;
                match self.compare_block(&next, &best, b) {
                    FOrdering::Less => best = next,
                    FOrdering::Tie
                        if !ties.contains(&b) => {
                            ties.push(b);
                        }
                    _ => {}
                }
            }
            cur = best;
        }
        Ok((cur, ties))
    }

    /// Lifts a local move at `v_a` to a global move at `v`.
    pub fn lift_move(&self, frame: &Frame, b: usize, alpha: &WhiteheadAuto) -> Result<WhiteheadAuto> {
        let fp = self.fp();
        let bg = &self.blocks[b];
        let t = alpha.operative;
        let k = bg.labels[t];
        let n = self.idx.n;
        if alpha.is_identity() {
            return WhiteheadAuto::new(frame.basis().clone(), k as usize - 1, vec![0; n]);
        }
        if bg.formal[t] {
            return Err(Error::Verification(format!("G° of {k} is trivial in block {b}")));
        }
        let stem = bg.stem_index();
        if let Some(s) = stem {
            if alpha.gammas[s] != 0 {
                return Err(Error::Verification("local move conjugates the stem".into()));
            }
            let i = bg.stem as usize - 1;
            if self.f.factored.iter().any(|f| f.y[k as usize - 1][i] != 0) {
                return Err(Error::Verification(format!(
                    "y_{}^{} is nontrivial; no lift",
                    bg.stem, k
                )));
            }
        }
        let words = self.rep_words(frame);
        let w = if bg.stem == STAR {
            Word::empty()
        } else {
            words.path_word[bg.stem as usize].clone()
        };
        let mut gammas = vec![0u8; n];
        for (l, &g) in alpha.gammas.iter().enumerate() {
            if Some(l) == stem || l == t || g == 0 {
                continue;
            }
            let y = bg.sigma(&alpha.base.element(bg.fp(), t, g));
            let x = fp.conjugate(&w, &y);
            let gk = gamma_of(fp, frame.basis(), k as usize - 1, &x)
                .ok_or_else(|| Error::Verification("lifted conjugator is not in H_k".into()))?;
            for j in self.idx.subtree(bg.labels[l]) {
                gammas[j as usize - 1] = gk;
            }
        }
        WhiteheadAuto::new(frame.basis().clone(), k as usize - 1, gammas)
    }

    /// Restricts a global move at operative `k` to an adjacent block.
    pub fn restrict_move(&self, frame: &Frame, alpha: &WhiteheadAuto, b: usize) -> Result<WhiteheadAuto> {
        let fp = self.fp();
        let bg = &self.blocks[b];
        let k = alpha.operative as u8 + 1;
        let t = bg
            .local_index(k)
            .ok_or_else(|| Error::InvalidInput(format!("label {k} is not in block {b}")))?;
        let words = self.rep_words(frame);
        let local = bg
            .local_basis(&words)
            .ok_or_else(|| Error::Verification("representative is not F-standard".into()))?;
        let w = if bg.stem == STAR {
            Word::empty()
        } else {
            words.path_word[bg.stem as usize].clone()
        };
        let wk = if k == bg.stem {
            Word::empty()
        } else {
            words.relative[k as usize].clone()
        };
        let mut gammas = vec![0u8; bg.rank()];
        for (l, &j) in bg.labels.iter().enumerate() {
            let g = alpha.gammas[j as usize - 1];
            if l == t || g == 0 {
                continue;
            }
            if j == bg.stem {
                return Err(Error::Verification("move conjugates the stem".into()));
            }
            let x = frame.basis().element(fp, k as usize - 1, g);
            let u = fp.multiply_all([&fp.invert(&w), &x, &w]);
            let e = fp.multiply_all([&fp.invert(&wk), &u, &wk]);
            let le = match e.letters() {
                [l] if l.factor + 1 == k => *l,
                _ => return Err(Error::Verification("restriction leaves H_k".into())),
            };
            let loc = bg
                .to_local(&Word(vec![le]))
                .ok_or_else(|| Error::Verification(format!("conjugator of {j} is outside G°")))?;
            gammas[l] = loc.letters()[0].elem;
        }
        WhiteheadAuto::new(local, t, gammas)
    }

    /// `α = ∏_a lift(restrict(α, a))` over blocks adjacent to the operative.
    pub fn decomposes(&self, frame: &Frame, alpha: &WhiteheadAuto) -> Result<bool> {
        let fp = self.fp();
        let k = alpha.operative as u8 + 1;
        let mut prod = AutPair::identity(fp);
        for b in self.idx.adjacent_blocks(k) {
            let r = self.restrict_move(frame, alpha, b)?;
            let l = self.lift_move(frame, b, &r)?;
            prod = prod.compose(fp, &l.to_pair(fp, frame));
        }
        Ok(prod == alpha.to_pair(fp, frame))
    }

    /// A restriction is reductive when it shortens the local basis.
    pub fn local_reductive(&self, b: usize, local: &WhiteheadAuto) -> Result<bool> {
        if local.is_identity() {
            return Ok(false);
        }
        let bg = &self.blocks[b];
        let f = Frame::from_basis(bg.fp(), &local.base)?;
        let next = local.apply_to_frame(bg.fp(), &f)?;
        Ok(bg.lab.compare(&next, &f) == crate::basis::NormOrdering::Less)
    }

    /// `|h|_ℋ = 2|w(J(i))|_ℋ + |h|_{ℋ(a)}` for all `h` of inner length at most
    /// `max_inner` in the full block subgroup `∗_{k ∈ I(a)} G_k`.
    pub fn split_length(&self, frame: &Frame, b: usize, max_inner: usize) -> Result<Vec<SplitCheck>> {
        let fp = self.fp();
        let bg = &self.blocks[b];
        let words = self.rep_words(frame);
        let full = FreeProduct::new_unchecked_rank(
            bg.labels
                .iter()
                .map(|&j| fp.factor(j as usize - 1).clone())
                .collect(),
        )?;
        let to_local = |w: &Word| {
            map_word(w, |l| {
                Some(Letter::new(bg.local_index(l.factor + 1)?, l.elem))
            })
        };
        let to_global = |w: &Word| {
            map_word(w, |l| Some(Letter::new(bg.labels[l.factor as usize] as usize - 1, l.elem)))
                .unwrap()
        };
        let raw = bg
            .labels
            .iter()
            .map(|&j| {
                if j == bg.stem {
                    Some(Word::empty())
                } else {
                    to_local(&words.relative[j as usize])
                }
            })
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Verification("relative conjugator leaves the block".into()))?;
        let inner = Frame::from_basis(&full, &canonicalize_basis(&full, &raw))?;
        let w = if bg.stem == STAR {
            Word::empty()
        } else {
            words.path_word[bg.stem as usize].clone()
        };
        let outer = 2 * frame.length(fp, &w);
        let mut out = Vec::new();
        for u in crate::group::WordEnumerator::new(&full) {
            if u.len() > max_inner {
                break;
            }
            if u.is_empty() {
                continue;
            }
            let h_local = inner.pair().apply(&full, &u);
            let h = to_global(&h_local);
            let total = frame.length(fp, &h);
            out.push(SplitCheck {
                block: b,
                element: h.to_code(),
                total,
                outer,
                inner: inner.length(&full, &h_local),
            });
        }
        Ok(out)
    }

    /// `α(ℋ)` is an `F`-standard representative of a reduced vertex and its
    /// pair norm is strictly below that of `ℋ`.
    pub fn pair_reductive(&self, frame: &Frame, result: &Frame) -> Result<bool> {
        if !self.is_f_standard(result, self.base_tree()) {
            return Ok(false);
        }
        if self.nuclear_rep(result)?.is_none() {
            return Ok(false);
        }
        Ok(self.compare_f_norm(result, frame) == FOrdering::Less)
    }

    /// Local star moves at `v_a` that reduce `ℋ_a` and admit a lift, with the
    /// lift's effect on the global norm.
    pub fn lifted_reductions(&self, frame: &Frame) -> Result<Vec<LocalMoveCheck>> {
        let mut out = Vec::new();
        for b in 0..self.blocks.len() {
            let Some(local) = self.block_frame(frame, b)? else {
                continue;
            };
            let bg = &self.blocks[b];
            for mv in bg.star_moves(&local) {
                let next = mv.apply_to_frame(bg.fp(), &local)?;
                if bg.lab.compare(&next, &local) != crate::basis::NormOrdering::Less {
                    continue;
                }
                let Ok(lift) = self.lift_move(frame, b, &mv) else {
                    continue;
                };
                let res = lift.apply_to_frame(self.fp(), frame)?;
                out.push(LocalMoveCheck {
                    block: b,
                    local: mv.describe(),
                    lifted: lift.describe(),
                    lift_reductive: self.pair_reductive(frame, &res)?,
                });
            }
        }
        Ok(out)
    }

    /// Moves carried in the ascending star of `v` that are reductive as
    /// pairs, with their results.
    pub fn reductive_moves_at(&self, frame: &Frame) -> Result<Vec<(WhiteheadAuto, Frame)>> {
        let mut seen: Vec<WhiteheadAuto> = Vec::new();
        let mut out = Vec::new();
        for t in self.star_trees() {
            for mv in self.lab.carried_moves(frame, &t) {
                if seen.contains(&mv) {
                    continue;
                }
                seen.push(mv.clone());
                let res = mv.apply_to_frame(self.fp(), frame)?;
                if self.pair_reductive(frame, &res)? {
                    out.push((mv, res));
                }
            }
        }
        Ok(out)
    }
}
