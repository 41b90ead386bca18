//! Finite subgroups `F` fixing a reduced vertex, the tree index machinery,
//! `G°` tables, `F`-standard representatives and fixed subcomplexes.

mod local;
mod retract;

pub use local::{BlockGroup, FOrdering, LocalMoveCheck, SplitCheck};
pub use retract::{JoinCheck, RetractionChain};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::Serialize;

use crate::auto::AutPair;
use crate::basis::{Basis, Frame};
use crate::complex::{AutElement, Complex, Move, VertexType, WhiteheadAuto};
use crate::error::{Error, Result};
use crate::group::{FactorAuto, FreeProduct, Letter, Word};
use crate::tree::{poset_leq, PointedTree, STAR};

/// Maximal order searched when building cyclic test subgroups.
pub const DEFAULT_F_ORDER_CAP: usize = 12;

/// One unlabelled vertex `a` of the base tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Block {
    /// Index of the hyperedge in the tree.
    pub edge: usize,
    /// `∗` (0) or the first labelled vertex towards `∗`.
    pub stem: u8,
    /// `I(a)`: adjacent labels, `∗` excluded, sorted.
    pub labels: Vec<u8>,
    /// `I(a)` minus the stem.
    pub children: Vec<u8>,
}

/// `I_k`, `J(i)`, stems and blocks of a pointed tree, blocks in breadth-first
/// order from `∗`.
#[derive(Debug, Clone, Serialize)]
pub struct TreeIndices {
    pub n: usize,
    /// `parent[i]` for labels `1..=n` (index 0 unused): previous label on the
    /// path to `∗`, or `∗`.
    pub parent: Vec<u8>,
    /// Distance to `∗` divided by two.
    pub depth: Vec<usize>,
    /// `J(i) = (z_1, …, z_k = i)`.
    pub path: Vec<Vec<u8>>,
    /// Block between `parent[i]` and `i`.
    pub block_of: Vec<usize>,
    pub blocks: Vec<Block>,
}

impl TreeIndices {
    pub fn new(tree: &PointedTree) -> Self {
        let n = tree.n();
        let mut parent = vec![STAR; n + 1];
        let mut depth = vec![0; n + 1];
        let mut path = vec![Vec::new(); n + 1];
        let mut block_of = vec![0; n + 1];
        let mut blocks = Vec::new();
        let mut queue = std::collections::VecDeque::new();
        let root = tree.edges_at(STAR)[0];
        queue.push_back((root, STAR));
        while let Some((edge, stem)) = queue.pop_front() {
            let labels = tree.labels_at(edge);
            let children: Vec<u8> = labels.iter().copied().filter(|&x| x != stem).collect();
            let b = blocks.len();
            for &c in &children {
                parent[c as usize] = stem;
                depth[c as usize] = if stem == STAR { 1 } else { depth[stem as usize] + 1 };
                let mut p = if stem == STAR { Vec::new() } else { path[stem as usize].clone() };
                p.push(c);
                path[c as usize] = p;
                block_of[c as usize] = b;
            }
            blocks.push(Block {
                edge,
                stem,
                labels,
                children: children.clone(),
            });
            for &c in &children {
                for e in tree.edges_at(c) {
                    if e != edge {
                        queue.push_back((e, c));
                    }
                }
            }
        }
        Self {
            n,
            parent,
            depth,
            path,
            block_of,
            blocks,
        }
    }

    /// `I_k` for `k ≥ 1`.
    pub fn level(&self, k: usize) -> Vec<u8> {
        (1..=self.n as u8).filter(|&i| self.depth[i as usize] == k).collect()
    }

    /// `J_{<i}`.
    pub fn j_less(&self, i: u8) -> &[u8] {
        let p = &self.path[i as usize];
        &p[..p.len() - 1]
    }

    /// `I(i)`.
    pub fn i_of(&self, i: u8) -> &[u8] {
        &self.blocks[self.block_of[i as usize]].labels
    }

    /// `r ≤ s` in the poset `I`: `r` lies on the path from `s` to `∗`.
    pub fn below(&self, r: u8, s: u8) -> bool {
        self.path[s as usize].contains(&r)
    }

    /// Labels `j ≥ l`.
    pub fn subtree(&self, l: u8) -> Vec<u8> {
        (1..=self.n as u8).filter(|&j| self.below(l, j)).collect()
    }

    /// Blocks adjacent to label `k`: its parent block first, then blocks with
    /// stem `k`.
    pub fn adjacent_blocks(&self, k: u8) -> Vec<usize> {
        let mut out = vec![self.block_of[k as usize]];
        out.extend((0..self.blocks.len()).filter(|&b| self.blocks[b].stem == k));
        out
    }
}

/// Relative conjugators of a basis with respect to a tree:
/// `H_i = w(J(i)) G_i w(J(i))⁻¹`, `w(J(i)) = w(J(parent)) w_i`, each `w_i`
/// of minimal `ℋ`-length in its coset `w_i G_i` (ties to the smaller word).
#[derive(Debug, Clone)]
pub struct RepWords {
    pub relative: Vec<Word>,
    pub path_word: Vec<Word>,
}

pub fn rep_words(fp: &FreeProduct, idx: &TreeIndices, frame: &Frame) -> RepWords {
    let n = idx.n;
    let basis = frame.basis();
    let mut relative = vec![Word::empty(); n + 1];
    let mut path_word = vec![Word::empty(); n + 1];
    let mut order: Vec<u8> = (1..=n as u8).collect();
    order.sort_by_key(|&i| idx.depth[i as usize]);
    for i in order {
        let f = i as usize - 1;
        let p = idx.parent[i as usize];
        let prefix = if p == STAR {
            Word::empty()
        } else {
            path_word[p as usize].clone()
        };
        let raw = fp.multiply(&fp.invert(&prefix), basis.conjugator(f));
        let stripped = fp.strip_factor(&raw, f);
        let w = (0..fp.factor(f).order() as u8)
            .map(|g| fp.multiply(&stripped, &Word::letter(f, g)))
            .min_by(|a, b| {
                let la = frame.length(fp, &fp.multiply(&prefix, a));
                let lb = frame.length(fp, &fp.multiply(&prefix, b));
                la.cmp(&lb).then_with(|| a.cmp(b))
            })
            .unwrap();
        path_word[i as usize] = fp.multiply(&prefix, &w);
        relative[i as usize] = w;
    }
    RepWords {
        relative,
        path_word,
    }
}

/// `φ = ∏_j (ℋ₀, y^j) ψ_j` with `y[j][k] ∈ G_j` the conjugator of `G_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Factored {
    pub y: Vec<Vec<u8>>,
    pub psi: Vec<FactorAuto>,
}

impl Factored {
    /// `π_j(φ) = (ℋ₀, y^j) ψ_j`.
    pub fn part(&self, fp: &FreeProduct, j: usize) -> AutPair {
        AutPair::standard_move(fp, j, &self.y[j])
            .compose(fp, &AutPair::factor_auto(fp, &self.psi[j]))
    }

    pub fn part_element(&self, fp: &FreeProduct, j: usize) -> AutElement {
        let mut moves = Vec::new();
        if self.y[j].iter().any(|&g| g != 0) {
            moves.push(Move::Whitehead(WhiteheadAuto {
                base: Basis::standard(fp),
                operative: j,
                gammas: self.y[j].clone(),
            }));
        }
        if !self.psi[j].is_identity() {
            moves.push(Move::Factor(self.psi[j].clone()));
        }
        AutElement {
            moves,
            pair: self.part(fp, j),
        }
    }

    /// The product of the parts in label order.
    pub fn compose(&self, fp: &FreeProduct) -> AutElement {
        let mut out = AutElement::identity(fp);
        for j in 0..fp.rank() {
            out = out.compose(fp, &self.part_element(fp, j));
        }
        out
    }

    /// Reads `y^j`, `ψ_j` off the generator images: `φ(γ) = c_k ψ_k(γ) c_k⁻¹`
    /// for `γ ∈ G_k` and `y_k^j = π_j(c_k)`.
    pub fn of(fp: &FreeProduct, phi: &AutPair) -> Result<Self> {
        let n = fp.rank();
        let mut y = vec![vec![0u8; n]; n];
        let mut psi = Vec::with_capacity(n);
        for k in 0..n {
            let (c, tau) = phi.fwd.factor_image(fp, k).ok_or_else(|| {
                Error::Verification(format!("factor {} is not sent to a conjugate", k + 1))
            })?;
            for (j, row) in y.iter_mut().enumerate() {
                if j != k {
                    row[k] = fp.project(&c, j);
                }
            }
            psi.push(tau);
        }
        let f = Self { y, psi };
        let back = f.compose(fp);
        if back.pair.fwd != phi.fwd {
            return Err(Error::Verification(
                "element is not a product of its projections".into(),
            ));
        }
        Ok(f)
    }

    pub fn describe(&self, fp: &FreeProduct) -> String {
        let mut parts = Vec::new();
        for j in 0..fp.rank() {
            for (k, &g) in self.y[j].iter().enumerate() {
                if g != 0 {
                    parts.push(format!("y{}_{}={}", j + 1, k + 1, g));
                }
            }
            if !self.psi[j].is_identity() {
                parts.push(format!("psi{}={:?}", j + 1, self.psi[j].images));
            }
        }
        if parts.is_empty() {
            "id".into()
        } else {
            parts.join(" ")
        }
    }
}

/// A finite subgroup `F` with its closure table and factored elements.
#[derive(Debug, Clone)]
pub struct FSubgroup {
    pub generators: Vec<AutElement>,
    pub elements: Vec<AutElement>,
    pub factored: Vec<Factored>,
    pub base_tree: PointedTree,
}

impl FSubgroup {
    /// Closes the generators and factors every element; `base_tree` is the
    /// tree of the base vertex `[ℋ₀, A̲̲]`, which must be fixed.
    pub fn new(lab: &Complex, generators: Vec<AutElement>, base_tree: PointedTree) -> Result<Self> {
        let fp = lab.fp();
        let elements = lab.closure(&generators)?;
        let factored = elements
            .iter()
            .map(|e| Factored::of(fp, &e.pair))
            .collect::<Result<Vec<_>>>()?;
        let f = Self {
            generators,
            elements,
            factored,
            base_tree,
        };
        let base = f.base_vertex(lab)?;
        if !f.fixes(lab, &base)? {
            return Err(Error::InvalidInput("F does not fix the base vertex".into()));
        }
        Ok(f)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn base_vertex(&self, lab: &Complex) -> Result<VertexType> {
        lab.canonical_vertex(&Frame::standard(lab.fp()), &self.base_tree)
    }

    pub fn fixes(&self, lab: &Complex, v: &VertexType) -> Result<bool> {
        for g in &self.generators {
            if !lab.fixes(&g.pair, v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `F₊`: the subgroup generated by all projections `π_j(φ)`.
    pub fn projections(&self, lab: &Complex) -> Result<FSubgroup> {
        let fp = lab.fp();
        let mut gens: Vec<AutElement> = Vec::new();
        for f in &self.factored {
            for j in 0..fp.rank() {
                let p = f.part_element(fp, j);
                if !p.is_identity() && !gens.contains(&p) {
                    gens.push(p);
                }
            }
        }
        FSubgroup::new(lab, gens, self.base_tree.clone())
    }

    pub fn describe(&self, fp: &FreeProduct) -> Vec<String> {
        self.generators
            .iter()
            .map(|g| match Factored::of(fp, &g.pair) {
                Ok(f) => f.describe(fp),
                Err(_) => "unfactored".into(),
            })
            .collect()
    }
}

/// `G°_{j,k}` for every ordered pair, as sorted element lists containing 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CircTables {
    pub circ: Vec<Vec<Vec<u8>>>,
}

impl CircTables {
    /// `G°_{j,k}` (labels 1-based).
    pub fn get(&self, j: u8, k: u8) -> &[u8] {
        &self.circ[j as usize - 1][k as usize - 1]
    }

    pub fn contains(&self, j: u8, k: u8, g: u8) -> bool {
        self.get(j, k).binary_search(&g).is_ok()
    }

    pub fn is_trivial(&self, j: u8, k: u8) -> bool {
        self.get(j, k).len() == 1
    }
}

/// `G°_{j,k} = ⋂_{φ ∈ F} {g ∈ G_j : y_k^j g (y_k^j)⁻¹ = ψ_j(g)}`.
pub fn compute_circ(fp: &FreeProduct, f: &FSubgroup) -> CircTables {
    let n = fp.rank();
    let mut circ = vec![vec![Vec::new(); n]; n];
    for (j, row) in circ.iter_mut().enumerate() {
        let g = fp.factor(j);
        for (k, cell) in row.iter_mut().enumerate() {
            *cell = (0..g.order() as u8)
                .filter(|&x| {
                    f.factored.iter().all(|ph| {
                        let y = ph.y[j][k];
                        g.mul(g.mul(y, x), g.inv(y)) == ph.psi[j].images[x as usize]
                    })
                })
                .collect();
        }
    }
    CircTables { circ }
}

/// The context shared by every fixed-point computation for one `F`.
pub struct FixedContext<'a> {
    pub lab: &'a Complex,
    pub f: FSubgroup,
    pub circ: CircTables,
    pub idx: TreeIndices,
    blocks: Vec<BlockGroup>,
    norm_cache: std::cell::RefCell<HashMap<VertexType, Option<Frame>>>,
}

/// A reduced-vertex classification for one vertex type.
#[derive(Debug, Clone, Serialize)]
pub struct FixedVertex {
    pub vertex: VertexType,
    pub reduced: bool,
    pub standard: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FixedSubcomplex {
    pub vertices: Vec<FixedVertex>,
}

impl FixedSubcomplex {
    pub fn reduced(&self) -> impl Iterator<Item = &FixedVertex> {
        self.vertices.iter().filter(|v| v.reduced)
    }

    /// Vertices where reducedness and `F`-standardness disagree.
    pub fn discrepancies(&self) -> Vec<&FixedVertex> {
        self.vertices
            .iter()
            .filter(|v| v.reduced != v.standard)
            .collect()
    }
}

/// Failure of a twisting identity, for reports.
#[derive(Debug, Clone, Serialize)]
pub struct TwistingViolation {
    pub element: String,
    pub i: u8,
    pub r: u8,
    pub lhs: u8,
    pub rhs: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct TwistingReport {
    pub checked: usize,
    pub trees_equal: bool,
    pub unfactored: usize,
    pub violations: Vec<TwistingViolation>,
}

impl TwistingReport {
    pub fn passed(&self) -> bool {
        self.trees_equal && self.unfactored == 0 && self.violations.is_empty()
    }
}

impl<'a> FixedContext<'a> {
    pub fn new(lab: &'a Complex, f: FSubgroup) -> Result<Self> {
        let circ = compute_circ(lab.fp(), &f);
        let idx = TreeIndices::new(&f.base_tree);
        let blocks = (0..idx.blocks.len())
            .map(|b| BlockGroup::new(lab, &circ, &idx, b))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lab,
            f,
            circ,
            idx,
            blocks,
            norm_cache: Default::default(),
        })
    }

    pub fn fp(&self) -> &FreeProduct {
        self.lab.fp()
    }

    pub fn base_tree(&self) -> &PointedTree {
        &self.f.base_tree
    }

    pub fn block_groups(&self) -> &[BlockGroup] {
        &self.blocks
    }

    pub fn rep_words(&self, frame: &Frame) -> RepWords {
        rep_words(self.fp(), &self.idx, frame)
    }

    /// `(ℋ, B̲̲)` is `F`-standard: `B̲̲ = A̲̲` and each relative `w_i` uses only
    /// letters of `G°_{j,i}`, `j ∈ I(i)`.
    pub fn is_f_standard(&self, frame: &Frame, tree: &PointedTree) -> bool {
        if tree != self.base_tree() {
            return false;
        }
        let words = self.rep_words(frame);
        (1..=self.idx.n as u8).all(|i| {
            let allowed = self.idx.i_of(i);
            words.relative[i as usize].letters().iter().all(|l| {
                let j = l.factor + 1;
                allowed.contains(&j) && self.circ.contains(j, i, l.elem)
            })
        })
    }

    /// An `F`-standard representative in the carried-move orbit of `v`.
    pub fn standard_representative(&self, v: &VertexType) -> Result<Option<Frame>> {
        if &v.tree != self.base_tree() {
            return Ok(None);
        }
        let orbit = self.lab.vertex_orbit(v)?;
        Ok(orbit
            .members
            .iter()
            .find(|(_, f)| self.is_f_standard(f, &v.tree))
            .map(|(_, f)| f.clone()))
    }

    pub fn is_fixed(&self, v: &VertexType) -> Result<bool> {
        self.f.fixes(self.lab, v)
    }

    /// Fixed, with no fixed vertex strictly below; the down-set is finite and
    /// enumerated exactly.
    pub fn is_reduced(&self, v: &VertexType) -> Result<bool> {
        if !self.is_fixed(v)? {
            return Ok(false);
        }
        let orbit = self.lab.vertex_orbit(v)?;
        let mut seen = BTreeSet::new();
        for t in self.lab.trees() {
            if t == &v.tree || !poset_leq(t, &v.tree) {
                continue;
            }
            for f in orbit.members.values() {
                let u = self.lab.canonical_vertex(f, t)?;
                if seen.insert(u.clone()) && self.is_fixed(&u)? {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// All vertex types with a representative in the ball, fixed by `F`,
    /// flagged for reducedness and `F`-standardness.
    pub fn fixed_subcomplex(&self, candidates: &[VertexType]) -> Result<FixedSubcomplex> {
        let mut vertices = Vec::new();
        for v in candidates {
            if !self.is_fixed(v)? {
                continue;
            }
            let reduced = self.is_reduced(v)?;
            let standard = self.standard_representative(v)?.is_some();
            vertices.push(FixedVertex {
                vertex: v.clone(),
                reduced,
                standard,
            });
        }
        Ok(FixedSubcomplex { vertices })
    }

    /// The minimized `F`-standard representative of `[ℋ, A̲̲]` when that vertex
    /// is fixed and reduced.
    pub fn nuclear_rep(&self, frame: &Frame) -> Result<Option<Frame>> {
        let v = self.lab.canonical_vertex(frame, self.base_tree())?;
        if let Some(r) = self.norm_cache.borrow().get(&v) {
            return Ok(r.clone());
        }
        let out = if self.is_reduced(&v)? {
            match self.standard_representative(&v)? {
                Some(f) => Some(self.minimize_representative(&f)?.0),
                None => None,
            }
        } else {
            None
        };
        self.norm_cache.borrow_mut().insert(v, out.clone());
        Ok(out)
    }

    /// Minimized `F`-standard representatives of reduced vertices reached from
    /// `ℋ₀` by at most `depth` rounds of lifted local moves, in BFS order.
    pub fn reduced_representatives(&self, depth: usize, limit: usize) -> Result<Vec<Frame>> {
        let fp = self.fp();
        let mut out = vec![Frame::standard(fp)];
        let mut seen: BTreeSet<Basis> = out.iter().map(|f| f.basis().clone()).collect();
        let mut frontier = out.clone();
        for _ in 0..depth {
            let mut next = Vec::new();
            for f in &frontier {
                for b in 0..self.blocks.len() {
                    let Some(local) = self.block_frame(f, b)? else {
                        continue;
                    };
                    for mv in self.blocks[b].lab.all_moves(&local) {
                        let Ok(lifted) = self.lift_move(f, b, &mv) else {
                            continue;
                        };
                        let g = lifted.apply_to_frame(fp, f)?;
                        if let Some(r) = self.nuclear_rep(&g)? {
                            if seen.insert(r.basis().clone()) {
                                if out.len() >= limit {
                                    return Ok(out);
                                }
                                out.push(r.clone());
                                next.push(r);
                            }
                        }
                    }
                }
            }
            frontier = next;
        }
        Ok(out)
    }

    /// Trees strictly above the base tree.
    pub fn star_trees(&self) -> Vec<PointedTree> {
        self.lab
            .trees()
            .iter()
            .filter(|t| *t != self.base_tree() && poset_leq(self.base_tree(), t))
            .cloned()
            .collect()
    }

    /// Checks the twisting identities for `v` against every element of `F`:
    /// `π_r(x_i^r) = π_r(φ(w(J(i)))) y_i^r π_r(w(J(i))⁻¹)`.
    pub fn verify_twisting(&self, frame: &Frame, tree: &PointedTree) -> TwistingReport {
        let fp = self.fp();
        let words = self.rep_words(frame);
        let mut report = TwistingReport {
            checked: 0,
            trees_equal: tree == self.base_tree(),
            unfactored: 0,
            violations: Vec::new(),
        };
        let p = frame.pair();
        for (phi, y) in self.f.elements.iter().zip(&self.f.factored) {
            let local = p.inverse().compose(fp, &phi.pair.compose(fp, p));
            let Ok(xs) = Factored::of(fp, &local) else {
                report.unfactored += 1;
                continue;
            };
            for r in 1..=self.idx.n as u8 {
                let rf = r as usize - 1;
                let g = fp.factor(rf);
                let wr = frame.basis().conjugator(rf);
                for i in 1..=self.idx.n as u8 {
                    if i == r {
                        continue;
                    }
                    let xw = fp.conjugate(wr, &Word::letter(rf, xs.y[rf][i as usize - 1]));
                    let lhs = fp.project(&xw, rf);
                    let w = &words.path_word[i as usize];
                    let a = fp.project(&phi.apply(fp, w), rf);
                    let b = y.y[rf][i as usize - 1];
                    let c = fp.project(&fp.invert(w), rf);
                    let rhs = g.mul(g.mul(a, b), c);
                    report.checked += 1;
                    if lhs != rhs {
                        report.violations.push(TwistingViolation {
                            element: y.describe(fp),
                            i,
                            r,
                            lhs,
                            rhs,
                        });
                    }
                }
            }
        }
        report
    }
}

/// Every `∏_j (ℋ₀, y^j) ψ_j` (parts in label order) of order at most `cap`,
/// the identity excluded.
pub fn finite_order_candidates(lab: &Complex, cap: usize) -> Result<Vec<(AutElement, Factored)>> {
    let fp = lab.fp();
    let n = fp.rank();
    let mut per_factor: Vec<Vec<(Vec<u8>, FactorAuto)>> = Vec::new();
    for j in 0..n {
        let order = fp.factor(j).order();
        let autos = fp.factor(j).automorphisms(crate::group::DEFAULT_AUT_CAP)?;
        let total = order.pow(n as u32 - 1);
        let mut opts = Vec::new();
        for code in 0..total {
            let mut c = code;
            let mut y = vec![0u8; n];
            for (k, v) in y.iter_mut().enumerate() {
                if k != j {
                    *v = (c % order) as u8;
                    c /= order;
                }
            }
            for psi in &autos {
                opts.push((y.clone(), psi.clone()));
            }
        }
        per_factor.push(opts);
    }
    let mut out = Vec::new();
    let mut choice = vec![0usize; n];
    loop {
        let f = Factored {
            y: (0..n).map(|j| per_factor[j][choice[j]].0.clone()).collect(),
            psi: (0..n).map(|j| per_factor[j][choice[j]].1.clone()).collect(),
        };
        let e = f.compose(fp);
        if !e.is_identity() && e.pair.order(fp, cap).is_some() {
            out.push((e, f));
        }
        let mut j = 0;
        loop {
            if j == n {
                return Ok(out);
            }
            choice[j] += 1;
            if choice[j] < per_factor[j].len() {
                break;
            }
            choice[j] = 0;
            j += 1;
        }
    }
}

/// Trees `A̲̲` with `[ℋ₀, A̲̲]` fixed by the generators and reduced.
pub fn reduced_base_trees(lab: &Complex, generators: &[AutElement]) -> Result<Vec<PointedTree>> {
    let h0 = Frame::standard(lab.fp());
    let fixed = |v: &VertexType| -> Result<bool> {
        for g in generators {
            if !lab.fixes(&g.pair, v)? {
                return Ok(false);
            }
        }
        Ok(true)
    };
    let mut out = Vec::new();
    for t in lab.trees() {
        let v = lab.canonical_vertex(&h0, t)?;
        if !fixed(&v)? {
            continue;
        }
        let orbit = lab.vertex_orbit(&v)?;
        let mut reduced = true;
        'down: for s in lab.trees() {
            if s == t || !poset_leq(s, t) {
                continue;
            }
            for f in orbit.members.values() {
                if fixed(&lab.canonical_vertex(f, s)?)? {
                    reduced = false;
                    break 'down;
                }
            }
        }
        if reduced {
            out.push(t.clone());
        }
    }
    Ok(out)
}

/// `⟨φ⟩` for each candidate with a unique reduced base tree.
pub fn cyclic_subgroups(lab: &Complex, cap: usize, limit: usize) -> Result<Vec<FSubgroup>> {
    let mut out = Vec::new();
    for (e, _) in finite_order_candidates(lab, cap)? {
        if out.len() >= limit {
            break;
        }
        let trees = reduced_base_trees(lab, std::slice::from_ref(&e))?;
        if let [t] = trees.as_slice() {
            out.push(FSubgroup::new(lab, vec![e], t.clone())?);
        }
    }
    Ok(out)
}

/// The trivial subgroup with the nuclear base vertex.
pub fn trivial_subgroup(lab: &Complex) -> Result<FSubgroup> {
    FSubgroup::new(lab, Vec::new(), PointedTree::nuclear(lab.n()))
}

/// Words with letters mapped through `f` (factor, element) → (factor, element).
pub(crate) fn map_word(w: &Word, mut f: impl FnMut(Letter) -> Option<Letter>) -> Option<Word> {
    let mut out = Vec::with_capacity(w.len());
    for &l in w.letters() {
        out.push(f(l)?);
    }
    Some(Word(out))
}

/// `γ ∈ G_k` with `W_k γ W_k⁻¹ = x`, if `x ∈ H_k`.
pub(crate) fn gamma_of(fp: &FreeProduct, basis: &Basis, k: usize, x: &Word) -> Option<u8> {
    let w = basis.conjugator(k);
    let g = fp.multiply(&fp.multiply(&fp.invert(w), x), w);
    match g.letters() {
        [] => Some(0),
        [l] if l.factor as usize == k => Some(l.elem),
        _ => None,
    }
}

/// Groups subgroup elements for JSON reports.
pub fn circ_json(fp: &FreeProduct, circ: &CircTables) -> BTreeMap<String, Vec<u8>> {
    let n = fp.rank();
    let mut out = BTreeMap::new();
    for j in 1..=n as u8 {
        for k in 1..=n as u8 {
            out.insert(format!("{j},{k}"), circ.get(j, k).to_vec());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(n: usize, code: &str) -> PointedTree {
        PointedTree::parse_code(n, code).unwrap()
    }

    #[test]
    fn tree_index_examples() {
        let idx = TreeIndices::new(&PointedTree::nuclear(3));
        assert_eq!(idx.level(1), vec![1, 2, 3]);
        assert!((1..=3).all(|i| idx.j_less(i).is_empty()));
        assert_eq!(idx.i_of(2), &[1, 2, 3]);
        let t = tree(3, "*-1|1-2|2-3");
        let idx = TreeIndices::new(&t);
        assert_eq!(idx.path[3], vec![1, 2, 3]);
        assert_eq!(idx.j_less(3), &[1, 2]);
        assert_eq!(idx.blocks.len(), 3);
        let c = idx.block_of[3];
        assert_eq!(idx.blocks[c].stem, 2);
        assert_eq!(idx.i_of(1), &[1]);
        assert_eq!(idx.subtree(2), vec![2, 3]);
    }

    #[test]
    fn circ_examples() {
        let lab = Complex::new(FreeProduct::cyclic(&[3, 2]).unwrap()).unwrap();
        let fp = lab.fp();
        let triv = trivial_subgroup(&lab).unwrap();
        let c = compute_circ(fp, &triv);
        assert_eq!(c.get(1, 2), &[0, 1, 2]);
        let inv = FactorAuto {
            factor: 1,
            images: vec![0, 2, 1],
        };
        let g = AutElement::from_moves(fp, vec![Move::Factor(inv)]).unwrap();
        let f = FSubgroup::new(&lab, vec![g], PointedTree::nuclear(2)).unwrap();
        let c = compute_circ(fp, &f);
        assert_eq!(c.get(1, 2), &[0]);
        assert_eq!(c.get(2, 1), &[0, 1]);
    }

    #[test]
    fn factored_round_trip() {
        let lab = Complex::new(FreeProduct::cyclic(&[2, 2, 2]).unwrap()).unwrap();
        let fp = lab.fp();
        for (e, f) in finite_order_candidates(&lab, 12).unwrap() {
            assert_eq!(Factored::of(fp, &e.pair).unwrap(), f);
        }
    }

    #[test]
    fn standard_examples() {
        let lab = Complex::new(FreeProduct::cyclic(&[2, 2, 2]).unwrap()).unwrap();
        let fp = lab.fp();
        let m = WhiteheadAuto::new(Basis::standard(fp), 0, vec![0, 0, 1]).unwrap();
        let g = AutElement::from_moves(fp, vec![Move::Whitehead(m)]).unwrap();
        let trees = reduced_base_trees(&lab, std::slice::from_ref(&g)).unwrap();
        assert_eq!(trees.len(), 1);
        let f = FSubgroup::new(&lab, vec![g], trees[0].clone()).unwrap();
        let ctx = FixedContext::new(&lab, f).unwrap();
        let h0 = Frame::standard(fp);
        assert!(ctx.is_f_standard(&h0, ctx.base_tree()));
        let v0 = lab.canonical_vertex(&h0, ctx.base_tree()).unwrap();
        assert!(ctx.is_reduced(&v0).unwrap());
        assert!(ctx.standard_representative(&v0).unwrap().is_some());
        assert!(ctx.verify_twisting(&h0, ctx.base_tree()).passed());
    }
}
