//! Finite posets, order complexes, integral homology and collapsibility.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite poset given by its full order relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    labels: Vec<String>,
    leq: Vec<bool>,
}

impl Poset {
    /// Builds the poset from a relation, checking the partial-order axioms.
    pub fn new(labels: Vec<String>, mut leq: impl FnMut(usize, usize) -> bool) -> Result<Self> {
        let n = labels.len();
        let mut rel = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                rel[i * n + j] = leq(i, j);
            }
        }
        let p = Self { labels, leq: rel };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        let n = self.len();
        for i in 0..n {
            if !self.leq(i, i) {
                return Err(Error::InvalidInput(format!("relation not reflexive at {i}")));
            }
            for j in 0..n {
                if i != j && self.leq(i, j) && self.leq(j, i) {
                    return Err(Error::InvalidInput(format!(
                        "relation not antisymmetric at {i}, {j}"
                    )));
                }
                if !self.leq(i, j) {
                    continue;
                }
                for k in 0..n {
                    if self.leq(j, k) && !self.leq(i, k) {
                        return Err(Error::InvalidInput(format!(
                            "relation not transitive at {i}, {j}, {k}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn chain(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string()).collect(), |i, j| i <= j).unwrap()
    }

    pub fn antichain(n: usize) -> Self {
        Self::new((0..n).map(|i| i.to_string()).collect(), |i, j| i == j).unwrap()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.len() + j]
    }

    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.leq(i, j)
    }

    pub fn opposite(&self) -> Self {
        let n = self.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[i * n + j] = self.leq(j, i);
            }
        }
        Self {
            labels: self.labels.clone(),
            leq,
        }
    }

    /// The full subposet on `keep`, in the given order.
    pub fn subposet(&self, keep: &[usize]) -> Self {
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let m = keep.len();
        let mut leq = vec![false; m * m];
        for (a, &i) in keep.iter().enumerate() {
            for (b, &j) in keep.iter().enumerate() {
                leq[a * m + b] = self.leq(i, j);
            }
        }
        Self { labels, leq }
    }

    pub fn minimal_elements(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| !(0..self.len()).any(|j| self.lt(j, i)))
            .collect()
    }

    /// Whether `f` is an order isomorphism onto `other`.
    pub fn is_isomorphism(&self, other: &Poset, f: &[usize]) -> bool {
        if f.len() != self.len() || self.len() != other.len() {
            return false;
        }
        let image: HashSet<usize> = f.iter().copied().collect();
        if image.len() != f.len() || f.iter().any(|&x| x >= other.len()) {
            return false;
        }
        (0..self.len()).all(|i| (0..self.len()).all(|j| self.leq(i, j) == other.leq(f[i], f[j])))
    }
}

/// A finite abstract simplicial complex on indexed vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    vertices: Vec<String>,
    simplices: BTreeSet<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct ComplexJson {
    vertices: Vec<String>,
    maximal: Vec<Vec<usize>>,
}

impl SimplicialComplex {
    /// The downward closure of `generators`.
    pub fn from_maximal(vertices: Vec<String>, generators: &[Vec<usize>]) -> Result<Self> {
        let mut simplices = BTreeSet::new();
        for g in generators {
            let mut s = g.clone();
            s.sort_unstable();
            s.dedup();
            if s.is_empty() || s.iter().any(|&v| v >= vertices.len()) {
                return Err(Error::InvalidInput("simplex out of range or empty".into()));
            }
            if s.len() > 24 {
                return Err(Error::CapExceeded {
                    what: "simplex dimension",
                    cap: 23,
                });
            }
            for mask in 1u32..(1 << s.len()) {
                let face: Vec<usize> = (0..s.len())
                    .filter(|b| mask & (1 << b) != 0)
                    .map(|b| s[b])
                    .collect();
                simplices.insert(face);
            }
        }
        for v in 0..vertices.len() {
            simplices.insert(vec![v]);
        }
        Ok(Self {
            vertices,
            simplices,
        })
    }

    pub fn simplex(n: usize) -> Self {
        let v: Vec<usize> = (0..n).collect();
        Self::from_maximal((0..n).map(|i| i.to_string()).collect(), &[v]).unwrap()
    }

    /// The boundary of the simplex on `n` vertices.
    pub fn sphere(n: usize) -> Self {
        let faces: Vec<Vec<usize>> = (0..n)
            .map(|skip| (0..n).filter(|&i| i != skip).collect())
            .collect();
        Self::from_maximal((0..n).map(|i| i.to_string()).collect(), &faces).unwrap()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn simplices(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.simplices.iter()
    }

    pub fn num_simplices(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.simplices.iter().map(|s| s.len() - 1).max()
    }

    pub fn contains(&self, s: &[usize]) -> bool {
        self.simplices.contains(s)
    }

    /// Face counts `f_0, f_1, …`.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut f = vec![0; self.dimension().map_or(0, |d| d + 1)];
        for s in &self.simplices {
            f[s.len() - 1] += 1;
        }
        f
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    pub fn maximal_simplices(&self) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        self.simplices
            .iter()
            .filter(|s| {
                (0..n).all(|v| {
                    if s.contains(&v) {
                        return true;
                    }
                    let mut t = (*s).clone();
                    t.push(v);
                    t.sort_unstable();
                    !self.simplices.contains(&t)
                })
            })
            .cloned()
            .collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(ComplexJson {
            vertices: self.vertices.clone(),
            maximal: self.maximal_simplices(),
        })
        .unwrap()
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let c: ComplexJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidInput(format!("complex JSON: {e}")))?;
        Self::from_maximal(c.vertices, &c.maximal)
    }

    /// Simplices of dimension `d`, sorted.
    fn faces(&self, d: usize) -> Vec<&Vec<usize>> {
        self.simplices.iter().filter(|s| s.len() == d + 1).collect()
    }

    /// `∂_d : C_d → C_{d-1}` as dense rows indexed by `(d-1)`-faces.
    pub fn boundary_matrix(&self, d: usize) -> Vec<Vec<BigInt>> {
        let cols = self.faces(d);
        if d == 0 {
            return vec![vec![BigInt::one(); cols.len()]];
        }
        let rows = self.faces(d - 1);
        let index: BTreeMap<&Vec<usize>, usize> =
            rows.iter().enumerate().map(|(i, r)| (*r, i)).collect();
        let mut m = vec![vec![BigInt::zero(); cols.len()]; rows.len()];
        for (c, s) in cols.iter().enumerate() {
            for skip in 0..s.len() {
                let face: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                let sign = if skip % 2 == 0 { 1 } else { -1 };
                m[index[&face]][c] = BigInt::from(sign);
            }
        }
        m
    }
}

/// Chains of `p` as simplices; vertices keep the poset's indices and labels.
pub fn order_complex(p: &Poset) -> SimplicialComplex {
    let n = p.len();
    let mut simplices = BTreeSet::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while let Some(chain) = stack.pop() {
        let top = *chain.last().unwrap();
        for j in 0..n {
            if p.lt(top, j) {
                let mut next = chain.clone();
                next.push(j);
                stack.push(next);
            }
        }
        let mut s = chain;
        s.sort_unstable();
        simplices.insert(s);
    }
    SimplicialComplex {
        vertices: p.labels().to_vec(),
        simplices,
    }
}

/// Nonzero diagonal of the Smith normal form, each positive and dividing the next.
pub fn smith_invariants(mut m: Vec<Vec<BigInt>>) -> Vec<BigInt> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in m.iter().enumerate().skip(t) {
            for (j, x) in row.iter().enumerate().skip(t) {
                if !x.is_zero() && best.is_none_or(|(bi, bj)| x.abs() < m[bi][bj].abs()) {
                    best = Some((i, j));
                    if x.abs().is_one() {
                        break;
                    }
                }
            }
            if best.is_some_and(|(bi, bj)| m[bi][bj].abs().is_one()) {
                break;
            }
        }
        let Some((pi, pj)) = best else { break };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = m[i][t].div_floor(&m[t][t]);
                let support: Vec<usize> = (t..cols).filter(|&j| !m[t][j].is_zero()).collect();
                for j in support {
                    let d = &q * &m[t][j];
                    m[i][j] -= d;
                }
                if !m[i][t].is_zero() {
                    m.swap(t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = m[t][j].div_floor(&m[t][t]);
                for row in m.iter_mut().skip(t) {
                    if !row[t].is_zero() {
                        let d = &q * &row[t];
                        row[j] -= d;
                    }
                }
                if !m[t][j].is_zero() {
                    for row in m.iter_mut() {
                        row.swap(t, j);
                    }
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            let bad = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !(&m[i][j] % &m[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    for j in t..cols {
                        let x = m[i][j].clone();
                        m[t][j] += x;
                    }
                }
                None => break,
            }
        }
        out.push(m[t][t].abs());
        t += 1;
    }
    out
}

/// Reduced integral homology.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomologyProfile {
    pub betti: Vec<usize>,
    pub torsion: Vec<Vec<String>>,
    pub euler_characteristic: i64,
}

impl HomologyProfile {
    pub fn is_trivial(&self) -> bool {
        self.betti.iter().all(|&b| b == 0) && self.torsion.iter().all(|t| t.is_empty())
    }
}

pub fn homology(c: &SimplicialComplex) -> Result<HomologyProfile> {
    if c.is_empty() {
        return Err(Error::InvalidInput("homology of the empty complex".into()));
    }
    let dim = c.dimension().unwrap();
    let f = c.f_vector();
    let mut inv = Vec::with_capacity(dim + 2);
    for d in 0..=dim {
        inv.push(smith_invariants(c.boundary_matrix(d)));
    }
    inv.push(Vec::new());
    let mut betti = Vec::with_capacity(dim + 1);
    let mut torsion = Vec::with_capacity(dim + 1);
    for d in 0..=dim {
        betti.push(f[d] - inv[d].len() - inv[d + 1].len());
        torsion.push(
            inv[d + 1]
                .iter()
                .filter(|x| !x.is_one())
                .map(|x| x.to_string())
                .collect(),
        );
    }
    Ok(HomologyProfile {
        betti,
        torsion,
        euler_characteristic: c.euler_characteristic(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum Verdict {
    CollapsedToPoint,
    HomologyTrivialOnly { remaining: usize },
    NotContractible { homology: HomologyProfile },
}

impl Verdict {
    pub fn is_collapsed(&self) -> bool {
        matches!(self, Verdict::CollapsedToPoint)
    }

    pub fn is_acceptable(&self) -> bool {
        !matches!(self, Verdict::NotContractible { .. })
    }
}

/// Greedy elementary collapses, scanning free faces in lexicographic order.
pub fn greedy_collapse(c: &SimplicialComplex) -> BTreeSet<Vec<usize>> {
    let mut s = c.simplices.clone();
    let mut cofaces: BTreeMap<Vec<usize>, BTreeSet<Vec<usize>>> = BTreeMap::new();
    for t in &s {
        if t.len() < 2 {
            continue;
        }
        for skip in 0..t.len() {
            let mut f = t.clone();
            f.remove(skip);
            cofaces.entry(f).or_default().insert(t.clone());
        }
    }
    let mut candidates: BTreeSet<Vec<usize>> = cofaces
        .iter()
        .filter(|(_, cs)| cs.len() == 1)
        .map(|(f, _)| f.clone())
        .collect();
    while let Some(sigma) = candidates.pop_first() {
        let Some(cs) = cofaces.get(&sigma) else { continue };
        if cs.len() != 1 || !s.contains(&sigma) {
            continue;
        }
        let tau = cs.iter().next().unwrap().clone();
        for removed in [&sigma, &tau] {
            s.remove(removed);
            cofaces.remove(removed);
            if removed.len() < 2 {
                continue;
            }
            for skip in 0..removed.len() {
                let mut f = removed.clone();
                f.remove(skip);
                if let Some(set) = cofaces.get_mut(&f) {
                    set.remove(removed);
                    if set.len() == 1 && s.contains(&f) {
                        candidates.insert(f);
                    }
                }
            }
        }
    }
    s
}

pub fn certify_contractible(c: &SimplicialComplex) -> Result<Verdict> {
    if c.is_empty() {
        return Err(Error::InvalidInput("empty complex".into()));
    }
    let h = homology(c)?;
    if !h.is_trivial() {
        return Ok(Verdict::NotContractible { homology: h });
    }
    let rest = greedy_collapse(c);
    if rest.len() == 1 {
        Ok(Verdict::CollapsedToPoint)
    } else {
        Ok(Verdict::HomologyTrivialOnly {
            remaining: rest.len(),
        })
    }
}

/// Element of a join: a nonempty choice of one element from some factors.
pub type JoinElement = Vec<Option<usize>>;

/// `P₁ ∪ (P₁ × P₂) ∪ P₂` with `(p₁, p₂) ≥ p₁, p₂` and each factor's order
/// reversed, so `p₁ < p₁'` gives `p₁ ≥ p₁'`.
pub fn poset_join(p1: &Poset, p2: &Poset) -> (Poset, Vec<JoinElement>) {
    join_natural(&[p1.opposite(), p2.opposite()])
}

/// Iterated join with each factor's own order kept: partial tuples ordered
/// by support inclusion and coordinatewise comparison.
pub fn join_natural(parts: &[Poset]) -> (Poset, Vec<JoinElement>) {
    let mut elems: Vec<JoinElement> = vec![Vec::new()];
    for p in parts {
        let mut next = Vec::new();
        for e in &elems {
            let mut none = e.clone();
            none.push(None);
            next.push(none);
            for i in 0..p.len() {
                let mut some = e.clone();
                some.push(Some(i));
                next.push(some);
            }
        }
        elems = next;
    }
    elems.retain(|e| e.iter().any(Option::is_some));
    let labels = elems
        .iter()
        .map(|e| {
            e.iter()
                .zip(parts)
                .map(|(x, p)| x.map_or("-".to_string(), |i| p.labels()[i].clone()))
                .collect::<Vec<_>>()
                .join("*")
        })
        .collect();
    let poset = Poset::new(labels, |a, b| {
        elems[a]
            .iter()
            .zip(&elems[b])
            .zip(parts)
            .all(|((x, y), p)| match (x, y) {
                (None, _) => true,
                (Some(_), None) => false,
                (Some(i), Some(j)) => p.leq(*i, *j),
            })
    })
    .expect("join of posets is a poset");
    (poset, elems)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_complex_examples() {
        let c = order_complex(&Poset::chain(3));
        assert_eq!(c.f_vector(), vec![3, 3, 1]);
        let c = order_complex(&Poset::antichain(3));
        assert_eq!(c.f_vector(), vec![3]);
    }

    #[test]
    fn homology_fixtures() {
        let h = homology(&SimplicialComplex::simplex(1)).unwrap();
        assert!(h.is_trivial());
        assert_eq!(h.euler_characteristic, 1);
        let h = homology(&SimplicialComplex::sphere(3)).unwrap();
        assert_eq!(h.betti, vec![0, 1]);
        let h = homology(&SimplicialComplex::sphere(4)).unwrap();
        assert_eq!(h.betti, vec![0, 0, 1]);
        assert_eq!(h.euler_characteristic, 2);
        let h = homology(&SimplicialComplex::from_maximal(vec!["a".into(), "b".into()], &[]).unwrap())
            .unwrap();
        assert_eq!(h.betti, vec![1]);
    }

    #[test]
    fn smith_torsion() {
        let m = vec![
            vec![BigInt::from(2), BigInt::from(4)],
            vec![BigInt::from(6), BigInt::from(8)],
        ];
        assert_eq!(smith_invariants(m), vec![BigInt::from(2), BigInt::from(4)]);
        let m = vec![vec![BigInt::from(4), BigInt::zero()], vec![BigInt::zero(), BigInt::from(6)]];
        assert_eq!(smith_invariants(m), vec![BigInt::from(2), BigInt::from(12)]);
    }

    #[test]
    fn torsion_of_projective_plane() {
        // six-vertex triangulation of RP²
        let faces = [
            [0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 1, 5],
            [1, 2, 4], [2, 3, 5], [1, 3, 4], [1, 3, 5], [2, 4, 5],
        ];
        let faces: Vec<Vec<usize>> = faces.iter().map(|f| f.to_vec()).collect();
        let c = SimplicialComplex::from_maximal((0..6).map(|i| i.to_string()).collect(), &faces)
            .unwrap();
        let h = homology(&c).unwrap();
        assert_eq!(h.betti, vec![0, 0, 0]);
        assert_eq!(h.torsion[1], vec!["2".to_string()]);
        assert!(!certify_contractible(&c).unwrap().is_acceptable());
    }

    #[test]
    fn certify_examples() {
        assert!(certify_contractible(&SimplicialComplex::simplex(4))
            .unwrap()
            .is_collapsed());
        assert!(matches!(
            certify_contractible(&SimplicialComplex::sphere(3)).unwrap(),
            Verdict::NotContractible { .. }
        ));
    }

    #[test]
    fn join_examples() {
        let pt = Poset::chain(1);
        let (j, _) = poset_join(&pt, &pt);
        assert_eq!(j.len(), 3);
        assert!(certify_contractible(&order_complex(&j)).unwrap().is_collapsed());
        let s0 = Poset::antichain(2);
        let (j, _) = poset_join(&s0, &s0);
        assert_eq!(homology(&order_complex(&j)).unwrap().betti, vec![0, 1]);
        let (j, _) = poset_join(&Poset::antichain(3), &pt);
        assert!(certify_contractible(&order_complex(&j)).unwrap().is_collapsed());
    }

    #[test]
    fn json_round_trip() {
        let c = SimplicialComplex::sphere(4);
        assert_eq!(SimplicialComplex::from_json(&c.to_json()).unwrap(), c);
    }
}
