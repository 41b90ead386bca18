//! Finite factor groups and normal-form words in their free product.
//!
//! Elements of a factor are indices `0..order` into its Cayley table, with
//! `0` the identity. A [`Word`] is an alternating sequence of nontrivial
//! letters; every operation here returns words in normal form.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest factor order accepted by the loader.
pub const MAX_TABLE_ORDER: usize = 64;
/// Default cap on factor order for automorphism enumeration.
pub const DEFAULT_AUT_CAP: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum FactorSource {
    Cyclic(usize),
    Sym3,
    Table(String),
}

/// A finite group given by its Cayley table.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FactorGroup {
    /// 1-based position in the free product.
    pub index: usize,
    table: Vec<Vec<u8>>,
    inverses: Vec<u8>,
    lambda: u8,
    source: FactorSource,
}

impl FactorGroup {
    pub fn cyclic(index: usize, k: usize) -> Result<Self> {
        if !(2..=MAX_TABLE_ORDER).contains(&k) {
            return Err(Error::Axiom {
                factor: index,
                axiom: format!("cyclic order {k} outside 2..={MAX_TABLE_ORDER}"),
            });
        }
        let table = (0..k)
            .map(|i| (0..k).map(|j| ((i + j) % k) as u8).collect())
            .collect();
        Self::from_table(index, table, FactorSource::Cyclic(k))
    }

    /// The symmetric group on three letters, elements listed in lexicographic
    /// order of their one-line notation.
    pub fn sym3(index: usize) -> Result<Self> {
        let perms: Vec<[usize; 3]> = vec![
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let pos = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap() as u8;
        let table = perms
            .iter()
            .map(|p| {
                perms
                    .iter()
                    .map(|q| pos([p[q[0]], p[q[1]], p[q[2]]]))
                    .collect()
            })
            .collect();
        Self::from_table(index, table, FactorSource::Sym3)
    }

    pub fn from_table(index: usize, table: Vec<Vec<u8>>, source: FactorSource) -> Result<Self> {
        let axiom = |a: &str| Error::Axiom {
            factor: index,
            axiom: a.to_string(),
        };
        let order = table.len();
        if order < 2 {
            return Err(axiom("order must be at least 2"));
        }
        if order > MAX_TABLE_ORDER {
            return Err(axiom("order exceeds table cap"));
        }
        if table.iter().any(|row| row.len() != order) {
            return Err(axiom("table is not square"));
        }
        if table.iter().flatten().any(|&x| x as usize >= order) {
            return Err(axiom("entry out of range"));
        }
        for x in 0..order {
            if table[0][x] as usize != x || table[x][0] as usize != x {
                return Err(axiom("element 0 is not a two-sided identity"));
            }
        }
        let mut inverses = vec![0u8; order];
        for x in 0..order {
            match (0..order).find(|&y| table[x][y] == 0) {
                Some(y) if table[y][x] == 0 => inverses[x] = y as u8,
                _ => return Err(axiom("missing inverse")),
            }
        }
        for a in 0..order {
            for b in 0..order {
                let ab = table[a][b] as usize;
                for c in 0..order {
                    let bc = table[b][c] as usize;
                    if table[ab][c] != table[a][bc] {
                        return Err(axiom("not associative"));
                    }
                }
            }
        }
        Ok(Self {
            index,
            table,
            inverses,
            lambda: 1,
            source,
        })
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.table[a as usize][b as usize]
    }

    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        self.inverses[a as usize]
    }

    pub fn lambda(&self) -> u8 {
        self.lambda
    }

    pub fn set_lambda(&mut self, e: u8) -> Result<()> {
        if e == 0 || e as usize >= self.order() {
            return Err(Error::Axiom {
                factor: self.index,
                axiom: format!("lambda {e} must be a nontrivial element"),
            });
        }
        self.lambda = e;
        Ok(())
    }

    pub fn source(&self) -> &FactorSource {
        &self.source
    }

    pub fn table(&self) -> &[Vec<u8>] {
        &self.table
    }

    pub fn element_order(&self, a: u8) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order()).all(|a| (0..self.order()).all(|b| self.table[a][b] == self.table[b][a]))
    }

    /// Closure of a subset under multiplication (the generated subgroup), sorted.
    pub fn generated(&self, gens: &[u8]) -> Vec<u8> {
        let mut seen = vec![false; self.order()];
        seen[0] = true;
        let mut stack = vec![0u8];
        while let Some(x) = stack.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    stack.push(y);
                }
            }
        }
        (0..self.order() as u8).filter(|&x| seen[x as usize]).collect()
    }

    /// Complete automorphism group, identity first, sorted by image table.
    pub fn automorphisms(&self, cap: usize) -> Result<Vec<FactorAuto>> {
        if self.order() > cap {
            return Err(Error::CapExceeded {
                what: "factor order for automorphism enumeration",
                cap,
            });
        }
        // greedy generating set
        let mut gens: Vec<u8> = Vec::new();
        let mut span = vec![0u8];
        for x in 1..self.order() as u8 {
            if !span.contains(&x) {
                gens.push(x);
                span = self.generated(&gens);
            }
        }
        // each element as a word in the generators
        let mut spell: Vec<Option<Vec<usize>>> = vec![None; self.order()];
        spell[0] = Some(vec![]);
        let mut queue = std::collections::VecDeque::from([0u8]);
        while let Some(x) = queue.pop_front() {
            for (gi, &g) in gens.iter().enumerate() {
                let y = self.mul(x, g);
                if spell[y as usize].is_none() {
                    let mut w = spell[x as usize].clone().unwrap();
                    w.push(gi);
                    spell[y as usize] = Some(w);
                    queue.push_back(y);
                }
            }
        }
        let orders: Vec<usize> = (0..self.order() as u8).map(|a| self.element_order(a)).collect();
        let mut out = Vec::new();
        let mut choice = vec![0u8; gens.len()];
        self.aut_search(&gens, &spell, &orders, 0, &mut choice, &mut out);
        out.sort_by(|a: &FactorAuto, b| a.images.cmp(&b.images));
        Ok(out)
    }

    fn aut_search(
        &self,
        gens: &[u8],
        spell: &[Option<Vec<usize>>],
        orders: &[usize],
        depth: usize,
        choice: &mut Vec<u8>,
        out: &mut Vec<FactorAuto>,
    ) {
        if depth == gens.len() {
            let images: Vec<u8> = spell
                .iter()
                .map(|w| {
                    w.as_ref()
                        .unwrap()
                        .iter()
                        .fold(0u8, |acc, &gi| self.mul(acc, choice[gi]))
                })
                .collect();
            let mut hit = vec![false; self.order()];
            for &y in &images {
                hit[y as usize] = true;
            }
            if !hit.iter().all(|&h| h) {
                return;
            }
            let n = self.order();
            for a in 0..n {
                for b in 0..n {
                    let ab = self.table[a][b] as usize;
                    if images[ab] != self.mul(images[a], images[b]) {
                        return;
                    }
                }
            }
            out.push(FactorAuto {
                factor: self.index,
                images,
            });
            return;
        }
        let want = orders[gens[depth] as usize];
        for y in 1..self.order() as u8 {
            if orders[y as usize] == want {
                choice[depth] = y;
                self.aut_search(gens, spell, orders, depth + 1, choice, out);
            }
        }
    }
}

/// An automorphism of a single factor, as an image table on element indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FactorAuto {
    /// 1-based factor id.
    pub factor: usize,
    pub images: Vec<u8>,
}

impl FactorAuto {
    pub fn identity(factor: usize, order: usize) -> Self {
        Self {
            factor,
            images: (0..order as u8).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0u8; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u8;
        }
        Self {
            factor: self.factor,
            images,
        }
    }
}

/// A nontrivial element of one factor. `factor` is the 0-based position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub factor: u8,
    pub elem: u8,
}

impl Letter {
    pub fn new(factor: usize, elem: u8) -> Self {
        Self {
            factor: factor as u8,
            elem,
        }
    }
}

/// A normal-form element of the free product.
///
/// The derived order is the global well-order: shorter words first, then
/// lexicographic on `(factor, element)` per letter.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(factor: usize, elem: u8) -> Self {
        if elem == 0 {
            Word::empty()
        } else {
            Word(vec![Letter::new(factor, elem)])
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn last(&self) -> Option<Letter> {
        self.0.last().copied()
    }

    /// Compact text form: letters as `factor.elem` with 1-based factors.
    pub fn to_code(&self) -> String {
        if self.0.is_empty() {
            return "e".to_string();
        }
        self.0
            .iter()
            .map(|l| format!("{}.{}", l.factor + 1, l.elem))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_code())
    }
}

/// `G = G_1 * ... * G_n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FreeProduct {
    factors: Vec<FactorGroup>,
}

impl FreeProduct {
    pub fn new(mut factors: Vec<FactorGroup>) -> Result<Self> {
        if factors.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need n ≥ 2 factors, got {}",
                factors.len()
            )));
        }
        Self::build(std::mem::take(&mut factors))
    }

    /// Like [`FreeProduct::new`] but accepts a single factor. Used for the
    /// local groups attached to tree blocks, which can have one factor.
    pub fn new_unchecked_rank(factors: Vec<FactorGroup>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidInput("empty free product".into()));
        }
        Self::build(factors)
    }

    fn build(mut factors: Vec<FactorGroup>) -> Result<Self> {
        if factors.len() > 250 {
            return Err(Error::InvalidInput("too many factors".into()));
        }
        for (i, f) in factors.iter_mut().enumerate() {
            f.index = i + 1;
        }
        Ok(Self { factors })
    }

    pub fn cyclic(orders: &[usize]) -> Result<Self> {
        let fs = orders
            .iter()
            .enumerate()
            .map(|(i, &k)| FactorGroup::cyclic(i + 1, k))
            .collect::<Result<Vec<_>>>()?;
        Self::new(fs)
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, i: usize) -> &FactorGroup {
        &self.factors[i]
    }

    pub fn factors(&self) -> &[FactorGroup] {
        &self.factors
    }

    /// The designated element of factor `i` as a one-letter word.
    pub fn lambda(&self, i: usize) -> Word {
        Word::letter(i, self.factors[i].lambda())
    }

    /// `{λ_1, …, λ_n}`.
    pub fn lambdas(&self) -> Vec<Word> {
        (0..self.rank()).map(|i| self.lambda(i)).collect()
    }

    /// All nontrivial letters, ordered by (factor, element).
    pub fn all_letters(&self) -> Vec<Letter> {
        let mut out = Vec::new();
        for (i, f) in self.factors.iter().enumerate() {
            for e in 1..f.order() as u8 {
                out.push(Letter::new(i, e));
            }
        }
        out
    }

    pub fn is_normal_form(&self, w: &Word) -> bool {
        w.0.iter().all(|l| {
            (l.factor as usize) < self.rank()
                && l.elem != 0
                && (l.elem as usize) < self.factors[l.factor as usize].order()
        }) && w.0.windows(2).all(|p| p[0].factor != p[1].factor)
    }

    /// Appends a letter to a normal-form buffer, fusing with the last letter.
    #[inline]
    pub fn push_letter(&self, buf: &mut Vec<Letter>, l: Letter) {
        if l.elem == 0 {
            return;
        }
        if let Some(top) = buf.last_mut() {
            if top.factor == l.factor {
                let p = self.factors[l.factor as usize].mul(top.elem, l.elem);
                if p == 0 {
                    buf.pop();
                } else {
                    top.elem = p;
                }
                return;
            }
        }
        buf.push(l);
    }

    pub fn multiply(&self, u: &Word, v: &Word) -> Word {
        let mut buf = u.0.clone();
        for &l in &v.0 {
            self.push_letter(&mut buf, l);
        }
        Word(buf)
    }

    pub fn multiply_all<'a, I: IntoIterator<Item = &'a Word>>(&self, ws: I) -> Word {
        let mut buf = Vec::new();
        for w in ws {
            for &l in &w.0 {
                self.push_letter(&mut buf, l);
            }
        }
        Word(buf)
    }

    /// Reduces an arbitrary letter sequence (identity letters allowed).
    pub fn reduce(&self, letters: &[Letter]) -> Word {
        let mut buf = Vec::with_capacity(letters.len());
        for &l in letters {
            self.push_letter(&mut buf, l);
        }
        Word(buf)
    }

    pub fn invert_letter(&self, l: Letter) -> Letter {
        Letter {
            factor: l.factor,
            elem: self.factors[l.factor as usize].inv(l.elem),
        }
    }

    pub fn invert(&self, u: &Word) -> Word {
        Word(u.0.iter().rev().map(|&l| self.invert_letter(l)).collect())
    }

    /// `u g u⁻¹`.
    pub fn conjugate(&self, u: &Word, g: &Word) -> Word {
        self.multiply_all([u, g, &self.invert(u)])
    }

    /// Strips trailing letters of factor `i` (right coset representative of `G_i`).
    pub fn strip_factor(&self, w: &Word, i: usize) -> Word {
        let mut v = w.0.clone();
        while v.last().map(|l| l.factor as usize == i).unwrap_or(false) {
            v.pop();
        }
        Word(v)
    }

    /// Product of the `G_j` letters of `w` (the retraction `G → G_j`).
    pub fn project(&self, w: &Word, j: usize) -> u8 {
        let f = &self.factors[j];
        w.0.iter()
            .filter(|l| l.factor as usize == j)
            .fold(0u8, |acc, l| f.mul(acc, l.elem))
    }

    /// The first `count` elements of `G` in the global well-order.
    pub fn enumerate_elements(&self, count: usize) -> Vec<Word> {
        WordEnumerator::new(self).take(count).collect()
    }
}

/// Length-lex enumeration of `G`; prefix-stable.
pub struct WordEnumerator {
    letters: Vec<Letter>,
    level: Vec<Word>,
    pos: usize,
    started: bool,
}

impl WordEnumerator {
    pub fn new(fp: &FreeProduct) -> Self {
        Self {
            letters: fp.all_letters(),
            level: Vec::new(),
            pos: 0,
            started: false,
        }
    }
}

impl Iterator for WordEnumerator {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if !self.started {
            self.started = true;
            self.level = vec![Word::empty()];
            self.pos = 1;
            return Some(Word::empty());
        }
        if self.pos >= self.level.len() {
            // lexicographic order of extensions equals lex order of the level
            let mut next = Vec::new();
            for w in &self.level {
                for &l in &self.letters {
                    if w.last().map(|t| t.factor != l.factor).unwrap_or(true) {
                        let mut v = w.0.clone();
                        v.push(l);
                        next.push(Word(v));
                    }
                }
            }
            if next.is_empty() {
                return None;
            }
            self.level = next;
            self.pos = 0;
        }
        let w = self.level[self.pos].clone();
        self.pos += 1;
        Some(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2z2() -> FreeProduct {
        FreeProduct::cyclic(&[2, 2]).unwrap()
    }

    fn w(fp: &FreeProduct, spec: &[(usize, u8)]) -> Word {
        fp.reduce(&spec.iter().map(|&(f, e)| Letter::new(f, e)).collect::<Vec<_>>())
    }

    #[test]
    fn cancellation_and_fusion() {
        let fp = z2z2();
        let ab = w(&fp, &[(0, 1), (1, 1)]);
        let ba = w(&fp, &[(1, 1), (0, 1)]);
        assert!(fp.multiply(&ab, &ba).is_empty());
        let a = w(&fp, &[(0, 1)]);
        let b = w(&fp, &[(1, 1)]);
        assert_eq!(fp.multiply(&a, &b), ab);

        let fp = FreeProduct::cyclic(&[3, 2]).unwrap();
        let gb = w(&fp, &[(0, 1), (1, 1)]);
        let bg = w(&fp, &[(1, 1), (0, 1)]);
        assert_eq!(fp.multiply(&gb, &bg), Word::letter(0, 2));
    }

    #[test]
    fn inversion() {
        let fp = FreeProduct::cyclic(&[3, 2]).unwrap();
        let gb = w(&fp, &[(0, 1), (1, 1)]);
        assert_eq!(fp.invert(&gb), w(&fp, &[(1, 1), (0, 2)]));
        assert!(fp.invert(&Word::empty()).is_empty());
    }

    #[test]
    fn well_order_prefix() {
        let fp = z2z2();
        let e = fp.enumerate_elements(4);
        assert_eq!(
            e,
            vec![
                Word::empty(),
                Word::letter(0, 1),
                Word::letter(1, 1),
                w(&fp, &[(0, 1), (1, 1)])
            ]
        );
        let fp = FreeProduct::cyclic(&[3, 2]).unwrap();
        assert_eq!(
            fp.enumerate_elements(4),
            vec![
                Word::empty(),
                Word::letter(0, 1),
                Word::letter(0, 2),
                Word::letter(1, 1)
            ]
        );
        assert_eq!(fp.enumerate_elements(1), vec![Word::empty()]);
    }

    #[test]
    fn automorphism_counts() {
        let z2 = FactorGroup::cyclic(1, 2).unwrap();
        assert_eq!(z2.automorphisms(16).unwrap().len(), 1);
        let z3 = FactorGroup::cyclic(1, 3).unwrap();
        let auts = z3.automorphisms(16).unwrap();
        assert_eq!(auts.len(), 2);
        assert!(auts[0].is_identity());
        let s3 = FactorGroup::sym3(1).unwrap();
        assert_eq!(s3.automorphisms(16).unwrap().len(), 6);
        let z8 = FactorGroup::cyclic(1, 8).unwrap();
        assert_eq!(z8.automorphisms(16).unwrap().len(), 4);
        let z17 = FactorGroup::cyclic(1, 17).unwrap();
        assert!(matches!(
            z17.automorphisms(16),
            Err(Error::CapExceeded { .. })
        ));
    }

    #[test]
    fn corrupt_table_rejected() {
        let mut t: Vec<Vec<u8>> = (0..3)
            .map(|i| (0..3).map(|j| ((i + j) % 3) as u8).collect())
            .collect();
        t[1] = vec![1, 0, 2];
        t[2] = vec![2, 1, 0];
        let err = FactorGroup::from_table(1, t, FactorSource::Table("bad".into())).unwrap_err();
        assert!(err.to_string().contains("not associative") || err.to_string().contains("inverse"));
    }

    #[test]
    fn projection() {
        let fp = FreeProduct::cyclic(&[3, 2]).unwrap();
        let x = w(&fp, &[(0, 1), (1, 1), (0, 1)]);
        assert_eq!(fp.project(&x, 0), 2);
        assert_eq!(fp.project(&x, 1), 1);
    }
}
