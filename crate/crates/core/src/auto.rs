//! Automorphisms of `G` stored as image tables on the standard generators.

use serde::{Deserialize, Serialize};

use crate::group::{FactorAuto, FreeProduct, Word};

/// `images[i][e]` is the image of element `e` of factor `i`; `images[i][0]` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Automorphism {
    images: Vec<Vec<Word>>,
}

impl Automorphism {
    pub fn identity(fp: &FreeProduct) -> Self {
        Self {
            images: (0..fp.rank())
                .map(|i| {
                    (0..fp.factor(i).order() as u8)
                        .map(|e| Word::letter(i, e))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_images(images: Vec<Vec<Word>>) -> Self {
        Self { images }
    }

    pub fn images(&self) -> &[Vec<Word>] {
        &self.images
    }

    pub fn image(&self, factor: usize, elem: u8) -> &Word {
        &self.images[factor][elem as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, row)| {
            row.iter()
                .enumerate()
                .all(|(e, w)| *w == Word::letter(i, e as u8))
        })
    }

    pub fn apply(&self, fp: &FreeProduct, w: &Word) -> Word {
        let mut buf = Vec::new();
        for l in w.letters() {
            for &m in self.images[l.factor as usize][l.elem as usize].letters() {
                fp.push_letter(&mut buf, m);
            }
        }
        Word(buf)
    }

    /// `self ∘ before`: apply `before` first.
    pub fn compose(&self, fp: &FreeProduct, before: &Automorphism) -> Automorphism {
        Automorphism {
            images: before
                .images
                .iter()
                .map(|row| row.iter().map(|w| self.apply(fp, w)).collect())
                .collect(),
        }
    }

    pub fn factor_auto(fp: &FreeProduct, psi: &FactorAuto) -> Self {
        let mut a = Self::identity(fp);
        let i = psi.factor - 1;
        for (e, &img) in psi.images.iter().enumerate() {
            a.images[i][e] = Word::letter(i, img);
        }
        a
    }

    /// The standard Whitehead move `(ℋ₀, x)` with operative `k`: each `G_j`
    /// is conjugated by the `G_k` element `conj[j]`; `conj[k]` must be 0.
    pub fn standard_move(fp: &FreeProduct, k: usize, conj: &[u8]) -> Self {
        debug_assert_eq!(conj[k], 0);
        let mut a = Self::identity(fp);
        for (j, &c) in conj.iter().enumerate() {
            if c == 0 || j == k {
                continue;
            }
            let x = Word::letter(k, c);
            for e in 1..fp.factor(j).order() as u8 {
                a.images[j][e as usize] = fp.conjugate(&x, &Word::letter(j, e));
            }
        }
        a
    }

    /// The image of `G_i` is `w τ(G_i) w⁻¹` with `w` not ending in a `G_i`
    /// letter. Returns `(w, τ)`; `None` if the image is not of that shape.
    pub fn factor_image(&self, fp: &FreeProduct, i: usize) -> Option<(Word, FactorAuto)> {
        let order = fp.factor(i).order();
        let mut conj: Option<Word> = None;
        let mut tau = vec![0u8; order];
        for e in 1..order {
            let img = &self.images[i][e];
            let n = img.len();
            if n.is_multiple_of(2) {
                return None;
            }
            let mid = img.letters()[n / 2];
            if mid.factor as usize != i {
                return None;
            }
            let u = Word(img.letters()[..n / 2].to_vec());
            match &conj {
                None => conj = Some(u),
                Some(c) if *c == u => {}
                Some(_) => return None,
            }
            tau[e] = mid.elem;
        }
        Some((
            conj.unwrap_or_default(),
            FactorAuto {
                factor: i + 1,
                images: tau,
            },
        ))
    }

    /// Conjugators `x_i` with `φ(γ) = x_i τ_i(γ) x_i⁻¹` for `γ ∈ G_i`.
    pub fn conjugators(&self, fp: &FreeProduct) -> Option<Vec<Word>> {
        (0..fp.rank())
            .map(|i| self.factor_image(fp, i).map(|(w, _)| w))
            .collect()
    }
}

/// Image length beyond which a power is treated as being of infinite order.
pub const ORDER_IMAGE_LIMIT: usize = 256;

/// An automorphism together with its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AutPair {
    pub fwd: Automorphism,
    pub inv: Automorphism,
}

impl AutPair {
    pub fn identity(fp: &FreeProduct) -> Self {
        let id = Automorphism::identity(fp);
        Self {
            fwd: id.clone(),
            inv: id,
        }
    }

    /// `self ∘ before`.
    pub fn compose(&self, fp: &FreeProduct, before: &AutPair) -> AutPair {
        AutPair {
            fwd: self.fwd.compose(fp, &before.fwd),
            inv: before.inv.compose(fp, &self.inv),
        }
    }

    pub fn inverse(&self) -> AutPair {
        AutPair {
            fwd: self.inv.clone(),
            inv: self.fwd.clone(),
        }
    }

    pub fn standard_move(fp: &FreeProduct, k: usize, conj: &[u8]) -> Self {
        let inv_conj: Vec<u8> = conj.iter().map(|&c| fp.factor(k).inv(c)).collect();
        Self {
            fwd: Automorphism::standard_move(fp, k, conj),
            inv: Automorphism::standard_move(fp, k, &inv_conj),
        }
    }

    pub fn factor_auto(fp: &FreeProduct, psi: &FactorAuto) -> Self {
        Self {
            fwd: Automorphism::factor_auto(fp, psi),
            inv: Automorphism::factor_auto(fp, &psi.inverse()),
        }
    }

    pub fn apply(&self, fp: &FreeProduct, w: &Word) -> Word {
        self.fwd.apply(fp, w)
    }

    /// Conjugation `self ∘ inner ∘ self⁻¹`.
    pub fn conjugate(&self, fp: &FreeProduct, inner: &AutPair) -> AutPair {
        self.compose(fp, &inner.compose(fp, &self.inverse()))
    }

    /// Order of the automorphism if at most `cap`. Powers with an image longer
    /// than [`ORDER_IMAGE_LIMIT`] letters count as infinite order.
    pub fn order(&self, fp: &FreeProduct, cap: usize) -> Option<usize> {
        let mut p = self.fwd.clone();
        for k in 1..=cap {
            if p.is_identity() {
                return Some(k);
            }
            p = self.fwd.compose(fp, &p);
            if p.images().iter().flatten().any(|w| w.len() > ORDER_IMAGE_LIMIT) {
                return None;
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::Letter;

    #[test]
    fn standard_move_acts_by_conjugation() {
        let fp = FreeProduct::cyclic(&[2, 2]).unwrap();
        let m = Automorphism::standard_move(&fp, 0, &[0, 1]);
        let b = Word::letter(1, 1);
        let aba = fp.reduce(&[Letter::new(0, 1), Letter::new(1, 1), Letter::new(0, 1)]);
        assert_eq!(m.apply(&fp, &b), aba);
        let ab = fp.reduce(&[Letter::new(0, 1), Letter::new(1, 1)]);
        let ba = fp.reduce(&[Letter::new(1, 1), Letter::new(0, 1)]);
        assert_eq!(m.apply(&fp, &ab), ba);
    }

    #[test]
    fn pair_inverse_cancels() {
        let fp = FreeProduct::cyclic(&[3, 2, 3]).unwrap();
        let m = AutPair::standard_move(&fp, 0, &[0, 2, 1]);
        let n = AutPair::standard_move(&fp, 2, &[1, 2, 0]);
        let p = m.compose(&fp, &n);
        let id = p.compose(&fp, &p.inverse());
        assert!(id.fwd.is_identity());
        assert!(id.inv.is_identity());
    }

    #[test]
    fn factor_image_recovers_conjugator() {
        let fp = FreeProduct::cyclic(&[3, 2]).unwrap();
        let m = Automorphism::standard_move(&fp, 0, &[0, 2]);
        let (w, tau) = m.factor_image(&fp, 1).unwrap();
        assert_eq!(w, Word::letter(0, 2));
        assert!(tau.is_identity());
    }
}
