//! Bases of conjugates of the factors, lengths in a basis and the two norms
//! on nuclear vertices.

use std::cmp::Ordering;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::auto::{AutPair, Automorphism};
use crate::error::{Error, Result};
use crate::group::{FreeProduct, Letter, Word};

/// Start and cap of the lexicographic comparison window.
pub const DEFAULT_CUTOFF: usize = 64;
pub const MAX_CUTOFF: usize = 4096;

/// `ℋ = {w_i G_i w_i⁻¹}` stored as canonical conjugators: no `w_i` ends in a
/// letter of `G_i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Basis {
    conjugators: Vec<Word>,
}

impl Basis {
    pub fn standard(fp: &FreeProduct) -> Self {
        Self {
            conjugators: vec![Word::empty(); fp.rank()],
        }
    }

    pub fn conjugators(&self) -> &[Word] {
        &self.conjugators
    }

    pub fn conjugator(&self, i: usize) -> &Word {
        &self.conjugators[i]
    }

    pub fn rank(&self) -> usize {
        self.conjugators.len()
    }

    pub fn is_standard(&self) -> bool {
        self.conjugators.iter().all(Word::is_empty)
    }

    /// `w_i γ w_i⁻¹`.
    pub fn element(&self, fp: &FreeProduct, i: usize, gamma: u8) -> Word {
        fp.conjugate(&self.conjugators[i], &Word::letter(i, gamma))
    }

    /// Sum of conjugator lengths.
    pub fn weight(&self) -> usize {
        self.conjugators.iter().map(Word::len).sum()
    }

    pub fn to_code(&self) -> String {
        let parts: Vec<String> = self.conjugators.iter().map(Word::to_code).collect();
        format!("({})", parts.join(", "))
    }
}

/// Reduces each raw conjugator and strips trailing letters of its own factor.
pub fn canonicalize_basis(fp: &FreeProduct, raw: &[Word]) -> Basis {
    Basis {
        conjugators: raw
            .iter()
            .enumerate()
            .map(|(i, w)| fp.strip_factor(&fp.reduce(w.letters()), i))
            .collect(),
    }
}

impl Serialize for Basis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Vec<[usize; 2]>> = self
            .conjugators
            .iter()
            .map(|w| {
                w.letters()
                    .iter()
                    .map(|l| [l.factor as usize + 1, l.elem as usize])
                    .collect()
            })
            .collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Basis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v: Vec<Vec<[usize; 2]>> = Vec::deserialize(d)?;
        let mut conjugators = Vec::with_capacity(v.len());
        for w in v {
            let mut letters = Vec::with_capacity(w.len());
            for [f, e] in w {
                if f == 0 || f > 255 || e == 0 || e > 255 {
                    return Err(serde::de::Error::custom(format!("bad letter [{f}, {e}]")));
                }
                letters.push(Letter::new(f - 1, e as u8));
            }
            conjugators.push(Word(letters));
        }
        Ok(Basis { conjugators })
    }
}

/// A basis together with an automorphism pair whose forward part sends each
/// `γ ∈ G_i` to `w_i γ w_i⁻¹`.
#[derive(Debug, Clone)]
pub struct Frame {
    basis: Basis,
    pair: AutPair,
}

impl PartialEq for Frame {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis
    }
}

impl Eq for Frame {}

impl Frame {
    pub fn standard(fp: &FreeProduct) -> Self {
        Self {
            basis: Basis::standard(fp),
            pair: AutPair::identity(fp),
        }
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn pair(&self) -> &AutPair {
        &self.pair
    }

    /// Builds the frame of `pair.fwd(ℋ₀)`, removing any factor-automorphism
    /// twist so the forward map is exactly `γ ↦ w_i γ w_i⁻¹`.
    pub fn from_pair(fp: &FreeProduct, pair: AutPair) -> Result<Self> {
        let mut conj = Vec::with_capacity(fp.rank());
        let mut twisted = false;
        let mut untwist = Vec::with_capacity(fp.rank());
        for i in 0..fp.rank() {
            let (w, tau) = pair.fwd.factor_image(fp, i).ok_or_else(|| {
                Error::Verification(format!("image of factor {} is not a conjugate", i + 1))
            })?;
            twisted |= !tau.is_identity();
            conj.push(w);
            untwist.push(tau);
        }
        let basis = canonicalize_basis(fp, &conj);
        if !twisted {
            return Ok(Self { basis, pair });
        }
        let mut tau_images = Vec::with_capacity(fp.rank());
        let mut tau_inv_images = Vec::with_capacity(fp.rank());
        for (i, tau) in untwist.iter().enumerate() {
            tau_images.push(tau.images.iter().map(|&e| Word::letter(i, e)).collect());
            tau_inv_images.push(
                tau.inverse()
                    .images
                    .iter()
                    .map(|&e| Word::letter(i, e))
                    .collect(),
            );
        }
        let tau = AutPair {
            fwd: Automorphism::from_images(tau_images),
            inv: Automorphism::from_images(tau_inv_images),
        };
        let pure = pair.compose(fp, &tau.inverse());
        Ok(Self { basis, pair: pure })
    }

    /// Recovers a frame for a bare basis by greedily shortening conjugators
    /// with single-factor conjugations `H_j ↦ h H_j h⁻¹`, `h ∈ H_k`.
    pub fn from_basis(fp: &FreeProduct, basis: &Basis) -> Result<Self> {
        let n = fp.rank();
        if basis.rank() != n {
            return Err(Error::InvalidInput(format!(
                "basis has {} conjugators for {} factors",
                basis.rank(),
                n
            )));
        }
        let basis = canonicalize_basis(fp, basis.conjugators());
        let mut cur = basis.clone();
        // (j, h) with H_j conjugated by h
        let mut steps: Vec<(usize, Word)> = Vec::new();
        while !cur.is_standard() {
            let mut best: Option<(usize, usize, Word, Word)> = None;
            for j in 0..n {
                let wj = cur.conjugator(j);
                if wj.is_empty() {
                    continue;
                }
                for k in 0..n {
                    if k == j {
                        continue;
                    }
                    for g in 1..fp.factor(k).order() as u8 {
                        let h = cur.element(fp, k, g);
                        let new = fp.strip_factor(&fp.multiply(&h, wj), j);
                        if new.len() < wj.len() {
                            let gain = wj.len() - new.len();
                            let better = match &best {
                                None => true,
                                Some((bj, _, _, bw)) => {
                                    gain > cur.conjugator(*bj).len() - bw.len()
                                }
                            };
                            if better {
                                best = Some((j, k, h, new));
                            }
                        }
                    }
                }
            }
            let (j, _, h, new) = best.ok_or_else(|| {
                Error::InvalidInput(format!(
                    "{} is not a basis reachable by conjugator reduction",
                    basis.to_code()
                ))
            })?;
            cur.conjugators[j] = new;
            steps.push((j, h));
        }
        let mut pair = AutPair::identity(fp);
        for (j, h) in steps.into_iter().rev() {
            let hinv = fp.invert(&h);
            let pre = pair.inv.apply(fp, &hinv);
            if pre.len() != 1 {
                return Err(Error::Verification(format!(
                    "conjugating element {} did not pull back to a letter",
                    h.to_code()
                )));
            }
            let l = pre.letters()[0];
            let mut conj = vec![0u8; n];
            conj[j] = l.elem;
            let step = AutPair::standard_move(fp, l.factor as usize, &conj);
            pair = pair.compose(fp, &step);
        }
        let frame = Self::from_pair(fp, pair)?;
        if frame.basis != basis {
            return Err(Error::Verification(format!(
                "frame recovery produced {} instead of {}",
                frame.basis.to_code(),
                basis.to_code()
            )));
        }
        Ok(frame)
    }

    /// Frame of `φ(ℋ)`.
    pub fn act(&self, fp: &FreeProduct, phi: &AutPair) -> Result<Self> {
        Self::from_pair(fp, phi.compose(fp, &self.pair))
    }

    /// Frame of `ℋ` after precomposing with a standard-coordinate automorphism.
    pub fn then_standard(&self, fp: &FreeProduct, s: &AutPair) -> Result<Self> {
        Self::from_pair(fp, self.pair.compose(fp, s))
    }

    /// `|g|_ℋ`.
    pub fn length(&self, fp: &FreeProduct, g: &Word) -> usize {
        self.pair.inv.apply(fp, g).len()
    }

    /// Normal form of `g` in `G = H_1 * ... * H_n`: pairs of 0-based factor
    /// index and the standard-letter word of the basis element.
    pub fn rewrite(&self, fp: &FreeProduct, g: &Word) -> Vec<(usize, Word)> {
        let pre = self.pair.inv.apply(fp, g);
        pre.letters()
            .iter()
            .map(|l| {
                (
                    l.factor as usize,
                    self.pair.fwd.image(l.factor as usize, l.elem).clone(),
                )
            })
            .collect()
    }
}

pub fn rewrite_in_basis(fp: &FreeProduct, frame: &Frame, g: &Word) -> Vec<(usize, Word)> {
    frame.rewrite(fp, g)
}

/// `‖ℋ‖_𝒲 = Σ_{w ∈ 𝒲} |w|_ℋ`.
pub fn norm_w(fp: &FreeProduct, frame: &Frame, words: &[Word]) -> usize {
    words.iter().map(|w| frame.length(fp, w)).sum()
}

/// A finite prefix of a well-order of `G` (or of a local free product).
#[derive(Debug, Clone)]
pub struct ElementOrder {
    words: Vec<Word>,
}

impl ElementOrder {
    /// The global length-lex order, truncated at `cap` words.
    pub fn standard(fp: &FreeProduct, cap: usize) -> Self {
        Self {
            words: fp.enumerate_elements(cap),
        }
    }

    /// `prefix` first, then the remaining words in length-lex order.
    pub fn with_prefix(fp: &FreeProduct, prefix: &[Word], cap: usize) -> Self {
        let mut words: Vec<Word> = Vec::with_capacity(cap);
        for w in prefix {
            if !words.contains(w) {
                words.push(w.clone());
            }
        }
        for w in crate::group::WordEnumerator::new(fp) {
            if words.len() >= cap {
                break;
            }
            if !prefix.contains(&w) {
                words.push(w);
            }
        }
        words.truncate(cap);
        Self { words }
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Prefix of `‖v‖ ∈ ℤ^G`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NormVector {
    pub cutoff: usize,
    pub lengths: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct NormVectorRepr {
    cutoff: usize,
    lengths: Vec<u32>,
}

impl Serialize for NormVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NormVectorRepr {
            cutoff: self.cutoff,
            lengths: self.lengths.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = NormVectorRepr::deserialize(d)?;
        if r.lengths.len() != r.cutoff {
            return Err(serde::de::Error::custom("cutoff does not match length count"));
        }
        Ok(NormVector {
            cutoff: r.cutoff,
            lengths: r.lengths,
        })
    }
}

pub fn norm_vector(fp: &FreeProduct, frame: &Frame, order: &ElementOrder, cutoff: usize) -> NormVector {
    let lengths = order.words()[..cutoff.min(order.len())]
        .iter()
        .map(|g| frame.length(fp, g) as u32)
        .collect::<Vec<_>>();
    NormVector {
        cutoff: lengths.len(),
        lengths,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormOrdering {
    Less,
    EqualUpToCutoff,
    Greater,
}

impl NormOrdering {
    pub fn from_ordering(o: Ordering) -> Self {
        match o {
            Ordering::Less => NormOrdering::Less,
            Ordering::Equal => NormOrdering::EqualUpToCutoff,
            Ordering::Greater => NormOrdering::Greater,
        }
    }
}

pub fn compare_norms(a: &NormVector, b: &NormVector) -> Result<NormOrdering> {
    if a.cutoff != b.cutoff {
        return Err(Error::InvalidInput(format!(
            "cutoff mismatch: {} vs {}",
            a.cutoff, b.cutoff
        )));
    }
    Ok(NormOrdering::from_ordering(a.lengths.cmp(&b.lengths)))
}

/// Lexicographic `ℤ^G` comparison of two frames, widening the window from
/// [`DEFAULT_CUTOFF`] by doubling until the first differing coordinate or
/// the end of `order`.
pub fn compare_frames(fp: &FreeProduct, order: &ElementOrder, a: &Frame, b: &Frame) -> NormOrdering {
    if a.basis == b.basis {
        return NormOrdering::EqualUpToCutoff;
    }
    let mut start = 0;
    let mut cutoff = DEFAULT_CUTOFF.min(order.len());
    loop {
        for g in &order.words()[start..cutoff] {
            match a.length(fp, g).cmp(&b.length(fp, g)) {
                Ordering::Equal => {}
                o => return NormOrdering::from_ordering(o),
            }
        }
        if cutoff >= order.len() {
            return NormOrdering::EqualUpToCutoff;
        }
        start = cutoff;
        cutoff = (cutoff * 2).min(order.len());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z2z2() -> FreeProduct {
        FreeProduct::cyclic(&[2, 2]).unwrap()
    }

    fn word(fp: &FreeProduct, spec: &[(usize, u8)]) -> Word {
        fp.reduce(
            &spec
                .iter()
                .map(|&(f, e)| Letter::new(f, e))
                .collect::<Vec<_>>(),
        )
    }

    fn ea(fp: &FreeProduct) -> Frame {
        let b = canonicalize_basis(fp, &[Word::empty(), Word::letter(0, 1)]);
        Frame::from_basis(fp, &b).unwrap()
    }

    #[test]
    fn rewrite_examples() {
        let fp = z2z2();
        let std = Frame::standard(&fp);
        let ab = word(&fp, &[(0, 1), (1, 1)]);
        assert_eq!(std.rewrite(&fp, &ab).len(), 2);
        let h = ea(&fp);
        let b = Word::letter(1, 1);
        let parts = h.rewrite(&fp, &b);
        let aba = word(&fp, &[(0, 1), (1, 1), (0, 1)]);
        assert_eq!(
            parts,
            vec![(0, Word::letter(0, 1)), (1, aba), (0, Word::letter(0, 1))]
        );
        let joined = fp.multiply_all(parts.iter().map(|(_, w)| w));
        assert_eq!(joined, b);
        assert!(h.rewrite(&fp, &Word::empty()).is_empty());
    }

    #[test]
    fn norm_w_examples() {
        let fp = z2z2();
        let lam = fp.lambdas();
        assert_eq!(norm_w(&fp, &Frame::standard(&fp), &lam), 2);
        assert_eq!(norm_w(&fp, &Frame::standard(&fp), &[]), 0);
        assert_eq!(norm_w(&fp, &ea(&fp), &lam), 4);
    }

    #[test]
    fn norm_vector_examples() {
        let fp = z2z2();
        let order = ElementOrder::standard(&fp, 4);
        let v = norm_vector(&fp, &Frame::standard(&fp), &order, 4);
        assert_eq!(v.lengths, vec![0, 1, 1, 2]);
        let v = norm_vector(&fp, &ea(&fp), &order, 4);
        assert_eq!(v.lengths, vec![0, 1, 3, 2]);
        assert_eq!(norm_vector(&fp, &ea(&fp), &order, 1).lengths, vec![0]);
    }

    #[test]
    fn compare_examples() {
        let nv = |l: &[u32]| NormVector {
            cutoff: l.len(),
            lengths: l.to_vec(),
        };
        assert_eq!(
            compare_norms(&nv(&[0, 1, 1]), &nv(&[0, 1, 2])).unwrap(),
            NormOrdering::Less
        );
        assert_eq!(
            compare_norms(&nv(&[0, 1, 3]), &nv(&[0, 1, 3])).unwrap(),
            NormOrdering::EqualUpToCutoff
        );
        assert_eq!(
            compare_norms(&nv(&[0, 2, 1]), &nv(&[0, 1, 9])).unwrap(),
            NormOrdering::Greater
        );
        assert!(compare_norms(&nv(&[0]), &nv(&[0, 1])).is_err());
    }

    #[test]
    fn canonicalize_examples() {
        let fp = FreeProduct::cyclic(&[2, 3]).unwrap();
        // w_1 = b·a with a ∈ G_1 strips to b
        let raw = vec![word(&fp, &[(1, 1), (0, 1)]), Word::empty()];
        let b = canonicalize_basis(&fp, &raw);
        assert_eq!(b.conjugator(0), &Word::letter(1, 1));
        assert_eq!(canonicalize_basis(&fp, b.conjugators()), b);
        assert!(canonicalize_basis(&fp, &[Word::empty(), Word::empty()]).is_standard());

        let fp = z2z2();
        let bb = Word(vec![Letter::new(1, 1), Letter::new(1, 1)]);
        let b = canonicalize_basis(&fp, &[Word::empty(), bb.clone()]);
        assert!(b.is_standard());
        // same subgroup: conjugation by the raw word fixes G_2 setwise
        let img = fp.conjugate(&fp.reduce(bb.letters()), &Word::letter(1, 1));
        assert_eq!(img, Word::letter(1, 1));
    }

    #[test]
    fn json_round_trip() {
        let fp = z2z2();
        let b = ea(&fp).basis().clone();
        let s = serde_json::to_string(&b).unwrap();
        assert_eq!(s, "[[],[[1,1]]]");
        let back: Basis = serde_json::from_str(&s).unwrap();
        assert_eq!(back, b);
        let nv = NormVector {
            cutoff: 2,
            lengths: vec![0, 1],
        };
        let s = serde_json::to_string(&nv).unwrap();
        assert_eq!(serde_json::from_str::<NormVector>(&s).unwrap(), nv);
    }

    #[test]
    fn frame_recovery_rejects_non_basis() {
        let fp = z2z2();
        // {b a b, a b a} generates a proper subgroup
        let raw = [Word::letter(1, 1), Word::letter(0, 1)];
        let b = canonicalize_basis(&fp, &raw);
        assert!(Frame::from_basis(&fp, &b).is_err());
    }
}
