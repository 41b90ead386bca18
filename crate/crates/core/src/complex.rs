//! Vertex types `[ℋ, A̲̲]` of `L(G)`, symmetric Whitehead moves, stars,
//! balls, peak reduction and stabilizers.

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use crate::auto::AutPair;
use crate::basis::{compare_frames, norm_w, Basis, ElementOrder, Frame, NormOrdering, MAX_CUTOFF};
use crate::error::{Error, Result};
use crate::group::{FactorAuto, FreeProduct, Word, DEFAULT_AUT_CAP};
use crate::tree::{carrier_tree, enumerate_pointed_trees, poset_leq, PointedTree, STAR};

pub const DEFAULT_ORBIT_CAP: usize = 100_000;
pub const DEFAULT_BALL_CAP: usize = 1_000_000;
pub const DEFAULT_ORDER_CAP: usize = 24;
pub const DEFAULT_GROUP_CAP: usize = 100_000;

/// `(ℋ, x)` with operative factor `k`: each `H_j` is conjugated by
/// `x_j = w_k γ_j w_k⁻¹ ∈ H_k`; `γ_k = 0` and `∗` is never conjugated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WhiteheadAuto {
    pub base: Basis,
    pub operative: usize,
    pub gammas: Vec<u8>,
}

impl WhiteheadAuto {
    pub fn new(base: Basis, operative: usize, gammas: Vec<u8>) -> Result<Self> {
        if gammas.len() != base.rank() || operative >= base.rank() {
            return Err(Error::InvalidInput("move does not match basis rank".into()));
        }
        if gammas[operative] != 0 {
            return Err(Error::InvalidInput(
                "a move must not conjugate its operative factor".into(),
            ));
        }
        Ok(Self {
            base,
            operative,
            gammas,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.gammas.iter().all(|&g| g == 0)
    }

    /// The conjugators `x_j` as standard-letter words.
    pub fn conjugators(&self, fp: &FreeProduct) -> Vec<Word> {
        self.gammas
            .iter()
            .map(|&g| self.base.element(fp, self.operative, g))
            .collect()
    }

    /// The standard move `s` with `(ℋ, x) = φ_ℋ ∘ s ∘ φ_ℋ⁻¹`.
    pub fn standard_part(&self, fp: &FreeProduct) -> AutPair {
        AutPair::standard_move(fp, self.operative, &self.gammas)
    }

    /// The move as an automorphism of `G`; `frame` must frame `self.base`.
    pub fn to_pair(&self, fp: &FreeProduct, frame: &Frame) -> AutPair {
        debug_assert_eq!(frame.basis(), &self.base);
        frame
            .pair()
            .compose(fp, &self.standard_part(fp).compose(fp, &frame.pair().inverse()))
    }

    /// The frame of the image basis.
    pub fn apply_to_frame(&self, fp: &FreeProduct, frame: &Frame) -> Result<Frame> {
        frame.then_standard(fp, &self.standard_part(fp))
    }

    /// Minimal carrier: petals grouped by conjugator value, `∗` with the
    /// unconjugated factors.
    pub fn carrier(&self) -> Result<PointedTree> {
        let n = self.gammas.len();
        let k = self.operative as u8 + 1;
        let mut groups: BTreeMap<u8, Vec<u8>> = BTreeMap::new();
        groups.entry(0).or_default().push(STAR);
        for (j, &g) in self.gammas.iter().enumerate() {
            if j != self.operative {
                groups.entry(g).or_default().push(j as u8 + 1);
            }
        }
        let petals: Vec<Vec<u8>> = groups.into_values().collect();
        carrier_tree(n, k, &petals)
    }

    /// Carried by `(ℋ, tree)`: constant on petals of `A̲̲(k)`, trivial on the `∗` petal.
    pub fn is_carried_by(&self, tree: &PointedTree) -> bool {
        let part = tree.partition(self.operative as u8 + 1);
        part.petals.iter().all(|p| {
            let vals: HashSet<u8> = p
                .iter()
                .filter(|&&x| x != STAR)
                .map(|&x| self.gammas[x as usize - 1])
                .collect();
            if p.contains(&STAR) {
                vals.iter().all(|&v| v == 0)
            } else {
                vals.len() <= 1
            }
        })
    }

    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .gammas
            .iter()
            .enumerate()
            .filter(|(_, &g)| g != 0)
            .map(|(j, g)| format!("{}:{}", j + 1, g))
            .collect();
        format!("op {} [{}]", self.operative + 1, parts.join(" "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Move {
    Whitehead(WhiteheadAuto),
    Factor(FactorAuto),
}

/// A product `m_1 m_2 ⋯ m_t` of moves, read as function composition (so
/// `m_t` acts first), with cached generator images.
#[derive(Debug, Clone)]
pub struct AutElement {
    pub moves: Vec<Move>,
    pub pair: AutPair,
}

impl PartialEq for AutElement {
    fn eq(&self, other: &Self) -> bool {
        self.pair.fwd == other.pair.fwd
    }
}

impl Eq for AutElement {}

impl std::hash::Hash for AutElement {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.pair.fwd.hash(state)
    }
}

impl AutElement {
    pub fn identity(fp: &FreeProduct) -> Self {
        Self {
            moves: Vec::new(),
            pair: AutPair::identity(fp),
        }
    }

    pub fn from_pair(pair: AutPair) -> Self {
        Self {
            moves: Vec::new(),
            pair,
        }
    }

    /// Builds the product, framing each Whitehead move at its own base.
    pub fn from_moves(fp: &FreeProduct, moves: Vec<Move>) -> Result<Self> {
        let mut pair = AutPair::identity(fp);
        for m in &moves {
            let p = match m {
                Move::Whitehead(w) => {
                    let frame = Frame::from_basis(fp, &w.base)?;
                    w.to_pair(fp, &frame)
                }
                Move::Factor(psi) => AutPair::factor_auto(fp, psi),
            };
            pair = pair.compose(fp, &p);
        }
        Ok(Self { moves, pair })
    }

    /// `self ∘ other`.
    pub fn compose(&self, fp: &FreeProduct, other: &AutElement) -> AutElement {
        let mut moves = self.moves.clone();
        moves.extend(other.moves.iter().cloned());
        AutElement {
            moves,
            pair: self.pair.compose(fp, &other.pair),
        }
    }

    pub fn apply(&self, fp: &FreeProduct, g: &Word) -> Word {
        self.pair.apply(fp, g)
    }

    pub fn is_identity(&self) -> bool {
        self.pair.fwd.is_identity()
    }
}

pub fn apply_auto(fp: &FreeProduct, phi: &AutPair, g: &Word) -> Word {
    phi.apply(fp, g)
}

/// `[ℋ, A̲̲]` through its canonical representative: the least basis of the
/// carried-move orbit under the global word order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexType {
    pub basis: Basis,
    pub tree: PointedTree,
}

impl VertexType {
    pub fn is_nuclear(&self) -> bool {
        self.tree.is_nuclear()
    }

    pub fn key(&self) -> String {
        format!("{} {}", self.basis.to_code(), self.tree.code())
    }
}

/// The carried-move orbit of a basis at a fixed tree.
#[derive(Debug)]
pub struct Orbit {
    pub tree: PointedTree,
    pub members: BTreeMap<Basis, Frame>,
}

impl Orbit {
    pub fn canonical(&self) -> VertexType {
        VertexType {
            basis: self.members.keys().next().unwrap().clone(),
            tree: self.tree.clone(),
        }
    }

    pub fn contains(&self, b: &Basis) -> bool {
        self.members.contains_key(b)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormKind {
    W0,
    Zg,
}

#[derive(Debug, Clone, Copy)]
pub struct Caps {
    pub orbit: usize,
    pub ball: usize,
    pub order: usize,
    pub group: usize,
    pub cutoff: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            orbit: DEFAULT_ORBIT_CAP,
            ball: DEFAULT_BALL_CAP,
            order: DEFAULT_ORDER_CAP,
            group: DEFAULT_GROUP_CAP,
            cutoff: MAX_CUTOFF,
        }
    }
}

/// Working context for one free product: trees, the element order and an
/// orbit cache. Not `Sync`; build one per thread.
pub struct Complex {
    fp: FreeProduct,
    trees: Vec<PointedTree>,
    order: ElementOrder,
    lambdas: Vec<Word>,
    caps: Caps,
    orbits: RefCell<HashMap<(Basis, PointedTree), Rc<Orbit>>>,
}

#[derive(Debug, Clone)]
pub struct ReductiveMove {
    pub mv: WhiteheadAuto,
    pub carrier: PointedTree,
    pub result: Frame,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReductionStep {
    pub mv: WhiteheadAuto,
    pub basis: Basis,
    pub w0_norm: usize,
}

/// Nuclear vertices within a `𝒲₀`-radius, in BFS order.
#[derive(Debug, Clone)]
pub struct Ball {
    pub radius: usize,
    pub frames: Vec<Frame>,
    pub norms: Vec<usize>,
    pub index: HashMap<Basis, usize>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn contains(&self, b: &Basis) -> bool {
        self.index.contains_key(b)
    }
}

impl Complex {
    pub fn new(fp: FreeProduct) -> Result<Self> {
        Self::with_caps(fp, Caps::default())
    }

    pub fn with_caps(fp: FreeProduct, caps: Caps) -> Result<Self> {
        let trees = enumerate_pointed_trees(fp.rank())?;
        let order = ElementOrder::standard(&fp, caps.cutoff);
        let lambdas = fp.lambdas();
        Ok(Self {
            fp,
            trees,
            order,
            lambdas,
            caps,
            orbits: RefCell::new(HashMap::new()),
        })
    }

    /// Uses a custom element order for `ℤ^G` comparisons.
    pub fn with_order(fp: FreeProduct, order: ElementOrder, caps: Caps) -> Result<Self> {
        let mut c = Self::with_caps(fp, caps)?;
        c.order = order;
        Ok(c)
    }

    pub fn fp(&self) -> &FreeProduct {
        &self.fp
    }

    pub fn trees(&self) -> &[PointedTree] {
        &self.trees
    }

    pub fn order(&self) -> &ElementOrder {
        &self.order
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn n(&self) -> usize {
        self.fp.rank()
    }

    pub fn w0_norm(&self, frame: &Frame) -> usize {
        norm_w(&self.fp, frame, &self.lambdas)
    }

    pub fn compare(&self, a: &Frame, b: &Frame) -> NormOrdering {
        compare_frames(&self.fp, &self.order, a, b)
    }

    /// One carried generator per (operative, non-`∗` petal, element).
    fn carried_generators(&self, tree: &PointedTree) -> Vec<(usize, Vec<u8>)> {
        let n = self.n();
        let mut out = Vec::new();
        for k in 1..=n as u8 {
            let part = tree.partition(k);
            if part.is_trivial() {
                continue;
            }
            let ki = k as usize - 1;
            for p in &part.petals {
                if p.contains(&STAR) {
                    continue;
                }
                for g in 1..self.fp.factor(ki).order() as u8 {
                    let mut gammas = vec![0u8; n];
                    for &x in p {
                        gammas[x as usize - 1] = g;
                    }
                    out.push((ki, gammas));
                }
            }
        }
        out
    }

    /// All carried moves at `(frame, tree)`, one `H_k` element per non-`∗`
    /// petal, identity excluded.
    pub fn carried_moves(&self, frame: &Frame, tree: &PointedTree) -> Vec<WhiteheadAuto> {
        let n = self.n();
        let mut out = Vec::new();
        for k in 1..=n as u8 {
            let part = tree.partition(k);
            if part.is_trivial() {
                continue;
            }
            let ki = k as usize - 1;
            let order = self.fp.factor(ki).order();
            let petals: Vec<&Vec<u8>> = part.petals.iter().filter(|p| !p.contains(&STAR)).collect();
            let total = order.pow(petals.len() as u32);
            for code in 1..total {
                let mut c = code;
                let mut gammas = vec![0u8; n];
                for p in &petals {
                    let g = (c % order) as u8;
                    c /= order;
                    for &x in p.iter() {
                        gammas[x as usize - 1] = g;
                    }
                }
                out.push(WhiteheadAuto {
                    base: frame.basis().clone(),
                    operative: ki,
                    gammas,
                });
            }
        }
        out
    }

    pub fn orbit(&self, frame: &Frame, tree: &PointedTree) -> Result<Rc<Orbit>> {
        let key = (frame.basis().clone(), tree.clone());
        if let Some(o) = self.orbits.borrow().get(&key) {
            return Ok(o.clone());
        }
        let gens = self.carried_generators(tree);
        let mut members: BTreeMap<Basis, Frame> = BTreeMap::new();
        members.insert(frame.basis().clone(), frame.clone());
        let mut queue = VecDeque::from([frame.clone()]);
        while let Some(f) = queue.pop_front() {
            for (k, gammas) in &gens {
                let s = AutPair::standard_move(&self.fp, *k, gammas);
                let next = f.then_standard(&self.fp, &s)?;
                if !members.contains_key(next.basis()) {
                    if members.len() >= self.caps.orbit {
                        return Err(Error::CapExceeded {
                            what: "orbit size",
                            cap: self.caps.orbit,
                        });
                    }
                    members.insert(next.basis().clone(), next.clone());
                    queue.push_back(next);
                }
            }
        }
        let orbit = Rc::new(Orbit {
            tree: tree.clone(),
            members,
        });
        let mut cache = self.orbits.borrow_mut();
        for b in orbit.members.keys() {
            cache.insert((b.clone(), tree.clone()), orbit.clone());
        }
        Ok(orbit)
    }

    pub fn canonical_vertex(&self, frame: &Frame, tree: &PointedTree) -> Result<VertexType> {
        Ok(self.orbit(frame, tree)?.canonical())
    }

    /// A frame for the canonical basis of `v`.
    pub fn frame_of(&self, v: &VertexType) -> Result<Frame> {
        if let Some(o) = self.orbits.borrow().get(&(v.basis.clone(), v.tree.clone())) {
            return Ok(o.members[&v.basis].clone());
        }
        Frame::from_basis(&self.fp, &v.basis)
    }

    pub fn vertex_orbit(&self, v: &VertexType) -> Result<Rc<Orbit>> {
        let f = self.frame_of(v)?;
        self.orbit(&f, &v.tree)
    }

    /// `[ℋ, A̲̲] ≤ [𝒦, B̲̲]`: `A̲̲ ≤ B̲̲` and a common representative basis.
    pub fn vertex_leq(&self, a: &VertexType, b: &VertexType) -> Result<bool> {
        if !poset_leq(&a.tree, &b.tree) {
            return Ok(false);
        }
        Ok(self.vertex_orbit(b)?.contains(&a.basis))
    }

    pub fn apply_to_vertex(&self, phi: &AutPair, v: &VertexType) -> Result<VertexType> {
        let f = self.frame_of(v)?.act(&self.fp, phi)?;
        self.canonical_vertex(&f, &v.tree)
    }

    pub fn fixes(&self, phi: &AutPair, v: &VertexType) -> Result<bool> {
        let f = self.frame_of(v)?.act(&self.fp, phi)?;
        Ok(self.vertex_orbit(v)?.contains(f.basis()))
    }

    /// `{[ℋ_v, A̲̲]}` over all pointed trees, in tree-enumeration order.
    pub fn star_poset(&self, frame: &Frame) -> Result<Vec<VertexType>> {
        self.trees
            .iter()
            .map(|t| self.canonical_vertex(frame, t))
            .collect()
    }

    /// Every symmetric Whitehead move at a nuclear vertex.
    pub fn all_moves(&self, frame: &Frame) -> Vec<WhiteheadAuto> {
        let n = self.n();
        let mut out = Vec::new();
        for k in 0..n {
            let order = self.fp.factor(k).order();
            let total = order.pow(n as u32 - 1);
            for code in 1..total {
                let mut c = code;
                let mut gammas = vec![0u8; n];
                for (j, g) in gammas.iter_mut().enumerate() {
                    if j == k {
                        continue;
                    }
                    *g = (c % order) as u8;
                    c /= order;
                }
                out.push(WhiteheadAuto {
                    base: frame.basis().clone(),
                    operative: k,
                    gammas,
                });
            }
        }
        out
    }

    pub fn enumerate_ball(&self, radius: usize) -> Result<Ball> {
        let n = self.n();
        if radius < n {
            return Err(Error::InvalidInput(format!(
                "radius {radius} is below the minimal norm {n}"
            )));
        }
        let start = Frame::standard(&self.fp);
        let mut ball = Ball {
            radius,
            frames: vec![start.clone()],
            norms: vec![self.w0_norm(&start)],
            index: HashMap::from([(start.basis().clone(), 0)]),
        };
        let mut head = 0;
        while head < ball.frames.len() {
            let f = ball.frames[head].clone();
            head += 1;
            for m in self.all_moves(&f) {
                let next = m.apply_to_frame(&self.fp, &f)?;
                if ball.index.contains_key(next.basis()) {
                    continue;
                }
                let norm = self.w0_norm(&next);
                if norm > radius {
                    continue;
                }
                if ball.frames.len() >= self.caps.ball {
                    return Err(Error::CapExceeded {
                        what: "ball size",
                        cap: self.caps.ball,
                    });
                }
                ball.index.insert(next.basis().clone(), ball.frames.len());
                ball.frames.push(next);
                ball.norms.push(norm);
            }
        }
        Ok(ball)
    }

    /// Pairs of ball members sharing a non-nuclear vertex type.
    pub fn ball_adjacency(&self, ball: &Ball) -> Result<Vec<(usize, usize)>> {
        let mut edges: HashSet<(usize, usize)> = HashSet::new();
        for (i, f) in ball.frames.iter().enumerate() {
            for t in self.trees.iter().filter(|t| !t.is_nuclear()) {
                let o = self.orbit(f, t)?;
                for b in o.members.keys() {
                    if let Some(&j) = ball.index.get(b) {
                        if i < j {
                            edges.insert((i, j));
                        }
                    }
                }
            }
        }
        let mut v: Vec<_> = edges.into_iter().collect();
        v.sort_unstable();
        Ok(v)
    }

    pub fn ball_dot(&self, ball: &Ball) -> Result<String> {
        use std::fmt::Write as _;
        let mut s = String::from("graph ball {\n");
        for (i, f) in ball.frames.iter().enumerate() {
            writeln!(
                s,
                "  v{i} [label=\"{} |{}|\"];",
                f.basis().to_code(),
                ball.norms[i]
            )
            .unwrap();
        }
        for (i, j) in self.ball_adjacency(ball)? {
            writeln!(s, "  v{i} -- v{j};").unwrap();
        }
        s.push_str("}\n");
        Ok(s)
    }

    fn strictly_smaller(&self, norm: NormKind, a: &Frame, b: &Frame) -> bool {
        match norm {
            NormKind::W0 => self.w0_norm(a) < self.w0_norm(b),
            NormKind::Zg => self.compare(a, b) == NormOrdering::Less,
        }
    }

    pub fn reductive_moves(&self, frame: &Frame, norm: NormKind) -> Result<Vec<ReductiveMove>> {
        let mut out = Vec::new();
        for mv in self.all_moves(frame) {
            let result = mv.apply_to_frame(&self.fp, frame)?;
            if self.strictly_smaller(norm, &result, frame) {
                let carrier = mv.carrier()?;
                out.push(ReductiveMove {
                    mv,
                    carrier,
                    result,
                });
            }
        }
        Ok(out)
    }

    /// Strictly norm-decreasing descent to `ℋ₀`, taking the least result at
    /// each step.
    pub fn reduce_to_minimal(&self, frame: &Frame, norm: NormKind) -> Result<Vec<ReductionStep>> {
        let mut cur = frame.clone();
        let mut path = Vec::new();
        while !cur.basis().is_standard() {
            let moves = self.reductive_moves(&cur, norm)?;
            let best = moves.into_iter().reduce(|a, b| {
                let better = match norm {
                    NormKind::W0 => {
                        let (na, nb) = (self.w0_norm(&a.result), self.w0_norm(&b.result));
                        nb < na
                            || (nb == na
                                && self.compare(&b.result, &a.result) == NormOrdering::Less)
                    }
                    NormKind::Zg => self.compare(&b.result, &a.result) == NormOrdering::Less,
                };
                if better {
                    b
                } else {
                    a
                }
            });
            let Some(step) = best else {
                return Err(Error::Verification(format!(
                    "no reductive move at non-minimal vertex {}",
                    cur.basis().to_code()
                )));
            };
            if path.len() >= self.caps.ball {
                return Err(Error::CapExceeded {
                    what: "reduction length",
                    cap: self.caps.ball,
                });
            }
            path.push(ReductionStep {
                mv: step.mv,
                basis: step.result.basis().clone(),
                w0_norm: self.w0_norm(&step.result),
            });
            cur = step.result;
        }
        Ok(path)
    }

    /// Non-nuclear `[ℋ_v, A̲̲]` lying in the star of some `ℤ^G`-smaller
    /// nuclear vertex, as trees.
    pub fn reductive_star(&self, frame: &Frame) -> Result<Vec<PointedTree>> {
        let mut out = Vec::new();
        for t in self.trees.iter().filter(|t| !t.is_nuclear()) {
            let o = self.orbit(frame, t)?;
            let lower = o
                .members
                .values()
                .any(|g| self.compare(g, frame) == NormOrdering::Less);
            if lower {
                out.push(t.clone());
            }
        }
        Ok(out)
    }

    /// All factor automorphisms as automorphisms of `G`, identity first.
    pub fn factor_automorphisms(&self) -> Result<Vec<FactorAuto>> {
        let mut out = Vec::new();
        for f in self.fp.factors() {
            out.extend(f.automorphisms(DEFAULT_AUT_CAP)?);
        }
        Ok(out)
    }

    /// Closure of the generators fixing `v`, drawn from moves carried at
    /// every representative of `v` together with all factor automorphisms.
    pub fn stabilizer(&self, v: &VertexType) -> Result<Vec<AutElement>> {
        let orbit = self.vertex_orbit(v)?;
        let mut gens: Vec<AutElement> = Vec::new();
        let mut seen = HashSet::new();
        for f in orbit.members.values() {
            for mv in self.carried_moves(f, &v.tree) {
                let pair = mv.to_pair(&self.fp, f);
                if seen.insert(pair.fwd.clone()) {
                    gens.push(AutElement {
                        moves: vec![Move::Whitehead(mv)],
                        pair,
                    });
                }
            }
        }
        for psi in self.factor_automorphisms()? {
            if psi.is_identity() {
                continue;
            }
            let pair = AutPair::factor_auto(&self.fp, &psi);
            if seen.insert(pair.fwd.clone()) {
                gens.push(AutElement {
                    moves: vec![Move::Factor(psi)],
                    pair,
                });
            }
        }
        let mut fixing = Vec::new();
        for g in gens {
            if self.fixes(&g.pair, v)? {
                fixing.push(g);
            }
        }
        self.closure(&fixing)
    }

    /// The group generated by `gens`, identity first, in BFS order.
    pub fn closure(&self, gens: &[AutElement]) -> Result<Vec<AutElement>> {
        let id = AutElement::identity(&self.fp);
        let mut seen = HashSet::from([id.pair.fwd.clone()]);
        let mut out = vec![id];
        let mut head = 0;
        while head < out.len() {
            let cur = out[head].clone();
            head += 1;
            for g in gens {
                let next = g.compose(&self.fp, &cur);
                if seen.insert(next.pair.fwd.clone()) {
                    if out.len() >= self.caps.group {
                        return Err(Error::CapExceeded {
                            what: "group closure",
                            cap: self.caps.group,
                        });
                    }
                    out.push(next);
                }
            }
        }
        Ok(out)
    }

    /// Order of `phi` if at most the configured order cap.
    pub fn finite_order(&self, phi: &AutPair) -> Option<usize> {
        phi.order(&self.fp, self.caps.order)
    }

    /// Every vertex type with a representative basis in `ball`.
    pub fn ball_vertex_types(&self, ball: &Ball) -> Result<Vec<VertexType>> {
        let mut set = std::collections::BTreeSet::new();
        for f in &ball.frames {
            for t in &self.trees {
                set.insert(self.canonical_vertex(f, t)?);
            }
        }
        Ok(set.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::canonicalize_basis;
    use crate::group::Letter;

    fn lab(orders: &[usize]) -> Complex {
        Complex::new(FreeProduct::cyclic(orders).unwrap()).unwrap()
    }

    fn tree(n: usize, code: &str) -> PointedTree {
        PointedTree::parse_code(n, code).unwrap()
    }

    fn ea(c: &Complex) -> Frame {
        let b = canonicalize_basis(c.fp(), &[Word::empty(), Word::letter(0, 1)]);
        Frame::from_basis(c.fp(), &b).unwrap()
    }

    #[test]
    fn carried_move_counts() {
        let c = lab(&[2, 2]);
        let h0 = Frame::standard(c.fp());
        assert!(c.carried_moves(&h0, &PointedTree::nuclear(2)).is_empty());
        let t = tree(2, "*-1|1-2");
        let ms = c.carried_moves(&h0, &t);
        assert_eq!(ms.len(), 1);
        assert_eq!(ms[0].operative, 0);
        assert_eq!(ms[0].gammas, vec![0, 1]);
        let c = lab(&[3, 2]);
        let h0 = Frame::standard(c.fp());
        assert_eq!(c.carried_moves(&h0, &t).len(), 2);
    }

    #[test]
    fn apply_auto_examples() {
        let c = lab(&[2, 2]);
        let fp = c.fp();
        let h0 = Frame::standard(fp);
        let id = WhiteheadAuto::new(h0.basis().clone(), 0, vec![0, 0]).unwrap();
        let ab = fp.reduce(&[Letter::new(0, 1), Letter::new(1, 1)]);
        assert_eq!(apply_auto(fp, &id.to_pair(fp, &h0), &ab), ab);
        let m = WhiteheadAuto::new(h0.basis().clone(), 0, vec![0, 1]).unwrap();
        let p = m.to_pair(fp, &h0);
        let aba = fp.reduce(&[Letter::new(0, 1), Letter::new(1, 1), Letter::new(0, 1)]);
        assert_eq!(apply_auto(fp, &p, &Word::letter(1, 1)), aba);
        let ba = fp.reduce(&[Letter::new(1, 1), Letter::new(0, 1)]);
        assert_eq!(apply_auto(fp, &p, &ab), ba);
    }

    #[test]
    fn vertex_action_examples() {
        let c = lab(&[3, 3]);
        let fp = c.fp();
        let h0 = Frame::standard(fp);
        let t = tree(2, "*-1|1-2");
        let v = c.canonical_vertex(&h0, &t).unwrap();
        assert_eq!(c.apply_to_vertex(&AutPair::identity(fp), &v).unwrap(), v);
        for psi in c.factor_automorphisms().unwrap() {
            let p = AutPair::factor_auto(fp, &psi);
            assert_eq!(c.apply_to_vertex(&p, &v).unwrap(), v);
        }
        let c = lab(&[2, 2]);
        let fp = c.fp();
        let h0 = Frame::standard(fp);
        let m = WhiteheadAuto::new(h0.basis().clone(), 0, vec![0, 1]).unwrap();
        let nuc = c.canonical_vertex(&h0, &PointedTree::nuclear(2)).unwrap();
        let img = c.apply_to_vertex(&m.to_pair(fp, &h0), &nuc).unwrap();
        assert_eq!(img.basis, *ea(&c).basis());
        assert!(img.is_nuclear());
    }

    #[test]
    fn canonical_vertex_examples() {
        let c = lab(&[2, 2]);
        let h0 = Frame::standard(c.fp());
        let nuc = PointedTree::nuclear(2);
        assert_eq!(c.orbit(&h0, &nuc).unwrap().len(), 1);
        let t = tree(2, "*-1|1-2");
        let a = c.canonical_vertex(&h0, &t).unwrap();
        let b = c.canonical_vertex(&ea(&c), &t).unwrap();
        assert_eq!(a, b);
        let again = c.canonical_vertex(&c.frame_of(&a).unwrap(), &a.tree).unwrap();
        assert_eq!(again, a);
    }

    #[test]
    fn star_examples() {
        let c = lab(&[2, 2]);
        let h0 = Frame::standard(c.fp());
        let star = c.star_poset(&h0).unwrap();
        assert_eq!(star.len(), 3);
        assert!(star[0].is_nuclear());
        for v in &star {
            assert!(c.vertex_leq(&star[0], v).unwrap());
        }
    }

    #[test]
    fn ball_examples() {
        let c = lab(&[2, 2]);
        assert_eq!(c.enumerate_ball(2).unwrap().len(), 1);
        let b4 = c.enumerate_ball(4).unwrap();
        assert!(b4.contains(ea(&c).basis()));
        let eb = canonicalize_basis(c.fp(), &[Word::letter(1, 1), Word::empty()]);
        assert!(b4.contains(&eb));
        for f in &b4.frames {
            assert!(c.w0_norm(f) <= 4);
        }
        let b6 = c.enumerate_ball(6).unwrap();
        assert!(b4.index.keys().all(|k| b6.contains(k)));
        assert!(c.enumerate_ball(1).is_err());
    }

    #[test]
    fn reduction_examples() {
        let c = lab(&[2, 2]);
        let h0 = Frame::standard(c.fp());
        assert!(c.reductive_moves(&h0, NormKind::W0).unwrap().is_empty());
        assert!(c.reduce_to_minimal(&h0, NormKind::Zg).unwrap().is_empty());
        let f = ea(&c);
        let red = c.reductive_moves(&f, NormKind::W0).unwrap();
        assert!(red
            .iter()
            .any(|r| r.mv.operative == 0 && r.mv.gammas == vec![0, 1] && r.result.basis().is_standard()));
        let path = c.reduce_to_minimal(&f, NormKind::Zg).unwrap();
        assert_eq!(path.len(), 1);
        assert!(path[0].basis.is_standard());
    }

    #[test]
    fn stabilizer_examples() {
        let c = lab(&[2, 2]);
        let h0 = Frame::standard(c.fp());
        let nuc = c.canonical_vertex(&h0, &PointedTree::nuclear(2)).unwrap();
        assert_eq!(c.stabilizer(&nuc).unwrap().len(), 1);
        let c = lab(&[3, 3]);
        let h0 = Frame::standard(c.fp());
        let nuc = c.canonical_vertex(&h0, &PointedTree::nuclear(2)).unwrap();
        let st = c.stabilizer(&nuc).unwrap();
        assert_eq!(st.len(), 4);
        for g in &st {
            assert_eq!(c.apply_to_vertex(&g.pair, &nuc).unwrap(), nuc);
        }
    }
}
