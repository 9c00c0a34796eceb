//! Normal forms in amalgamated products and HNN extensions.
//!
//! The engine only talks to a base group through [`AmalgamBase`] or
//! [`HnnBase`]. Words are built by multiplying letters onto the right of a
//! normal form; each step peels one coset representative off the tail, so
//! the invariant "syllables + tail" is maintained throughout.

pub mod grammar;

use std::fmt::Debug;
use std::hash::Hash;

use crate::error::{Error, Result};

pub use grammar::{invert_word, normalize_perm, parse_word, print_word, Generator, Token};

/// Base-group oracle for `G₀ *_H G₁`.
///
/// Elements carry a side; elements of `H` exist on both sides and
/// [`AmalgamBase::to_side`] moves them across.
pub trait AmalgamBase {
    type Elem: Clone + Eq + Hash + Debug + Send + Sync;

    fn identity(&self, side: u8) -> Self::Elem;
    fn side(&self, a: &Self::Elem) -> u8;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn is_identity(&self, a: &Self::Elem) -> bool;
    fn is_in_h(&self, a: &Self::Elem) -> bool;
    /// `a = rep(side, i) · h` with `h ∈ H`; `None` when `a ∈ H`.
    fn coset_decompose(&self, a: &Self::Elem) -> (Option<u32>, Self::Elem);
    fn rep(&self, side: u8, i: u32) -> Self::Elem;
    fn to_side(&self, h: &Self::Elem, side: u8) -> Result<Self::Elem>;
    /// Non-trivial coset indices on `side`.
    fn coset_labels(&self, side: u8) -> Vec<u32>;
}

/// Base-group oracle for `HNN(G, H₋₁, θ)` with `θ(H₋₁) = H₁`.
pub trait HnnBase {
    type Elem: Clone + Eq + Hash + Debug + Send + Sync;

    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Self::Elem;
    fn is_identity(&self, a: &Self::Elem) -> bool;
    fn is_in_h(&self, a: &Self::Elem, eps: i8) -> bool;
    /// `a = rep(eps, i) · h` with `h ∈ H_eps`; `None` when `a ∈ H_eps`.
    fn coset_decompose(&self, a: &Self::Elem, eps: i8) -> (Option<u32>, Self::Elem);
    fn rep(&self, eps: i8, i: u32) -> Self::Elem;
    /// Number of cosets of `H_eps`, including the trivial one.
    fn index_count(&self, eps: i8) -> u32;
    fn basepoint(&self, eps: i8) -> u32;
    /// `τ^eps · a · τ^{−eps}`, defined for `a ∈ H_eps`.
    fn conjugate_by_tau(&self, a: &Self::Elem, eps: i8) -> Result<Self::Elem>;
}

/// `rep(s₁,i₁) · rep(s₂,i₂) ⋯ rep(sₙ,iₙ) · tail` with alternating sides and
/// the tail in `H`, stored on side 0.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AmalgamWord<E> {
    pub syllables: Vec<(u8, u32)>,
    pub tail: E,
}

impl<E: Clone + Eq + Hash + Debug> AmalgamWord<E> {
    pub fn identity<B: AmalgamBase<Elem = E>>(base: &B) -> Self {
        AmalgamWord {
            syllables: Vec::new(),
            tail: base.identity(0),
        }
    }

    pub fn from_letters<B: AmalgamBase<Elem = E>>(base: &B, letters: &[E]) -> Result<Self> {
        letters
            .iter()
            .try_fold(Self::identity(base), |w, x| w.mul_letter(base, x))
    }

    pub fn syllable_length(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_identity<B: AmalgamBase<Elem = E>>(&self, base: &B) -> bool {
        self.syllables.is_empty() && base.is_identity(&self.tail)
    }

    pub fn mul_letter<B: AmalgamBase<Elem = E>>(&self, base: &B, x: &E) -> Result<Self> {
        let side = base.side(x);
        let mut syllables = self.syllables.clone();
        let h = base.to_side(&self.tail, side)?;
        let y = match syllables.last() {
            Some(&(s, i)) if s == side => {
                syllables.pop();
                base.mul(&base.mul(&base.rep(side, i), &h)?, x)?
            }
            _ => base.mul(&h, x)?,
        };
        let (idx, rest) = base.coset_decompose(&y);
        check_amalgam_split(base, side, idx, &rest, &y)?;
        if let Some(i) = idx {
            syllables.push((side, i));
        }
        Ok(AmalgamWord {
            syllables,
            tail: base.to_side(&rest, 0)?,
        })
    }

    /// The base letters whose product is this word.
    pub fn letters<B: AmalgamBase<Elem = E>>(&self, base: &B) -> Vec<E> {
        let mut out: Vec<E> = self
            .syllables
            .iter()
            .map(|&(s, i)| base.rep(s, i))
            .collect();
        if !base.is_identity(&self.tail) {
            out.push(self.tail.clone());
        }
        out
    }

    pub fn mul<B: AmalgamBase<Elem = E>>(&self, base: &B, rhs: &Self) -> Result<Self> {
        rhs.letters(base)
            .iter()
            .try_fold(self.clone(), |w, x| w.mul_letter(base, x))
    }

    pub fn inv<B: AmalgamBase<Elem = E>>(&self, base: &B) -> Result<Self> {
        let letters: Vec<E> = self
            .letters(base)
            .iter()
            .rev()
            .map(|x| base.inv(x))
            .collect();
        Self::from_letters(base, &letters)
    }

    pub fn conjugate<B: AmalgamBase<Elem = E>>(&self, base: &B, by: &Self) -> Result<Self> {
        by.mul(base, self)?.mul(base, &by.inv(base)?)
    }

    /// The word of the first syllable alone.
    fn head<B: AmalgamBase<Elem = E>>(&self, base: &B) -> Result<Self> {
        let (s, i) = self.syllables[0];
        Self::identity(base).mul_letter(base, &base.rep(s, i))
    }

    /// Conjugates until the syllable length stops dropping. Returns
    /// `(core, conjugator)` with `self = conjugator · core · conjugator⁻¹`.
    pub fn cyclic_reduce<B: AmalgamBase<Elem = E>>(&self, base: &B) -> Result<(Self, Self)> {
        cyclic_reduce_by(
            self.clone(),
            Self::identity(base),
            1,
            |w| w.syllable_length(),
            |w| w.head(base),
            |a, b| a.mul(base, b),
            |a| a.inv(base),
        )
    }

    pub fn classify<B: AmalgamBase<Elem = E>>(&self, base: &B) -> Result<AmalgamClass<E>> {
        let (core, conjugator) = self.cyclic_reduce(base)?;
        Ok(match core.syllables.first() {
            None => AmalgamClass::Elliptic {
                conjugator,
                fixed_side: 0,
            },
            Some(&(side, _)) if core.syllable_length() == 1 => AmalgamClass::Elliptic {
                conjugator,
                fixed_side: side,
            },
            _ => AmalgamClass::Hyperbolic { core, conjugator },
        })
    }
}

fn check_amalgam_split<B: AmalgamBase>(
    base: &B,
    side: u8,
    idx: Option<u32>,
    rest: &B::Elem,
    whole: &B::Elem,
) -> Result<()> {
    let rebuilt = match idx {
        Some(i) => base.mul(&base.rep(side, i), rest)?,
        None => rest.clone(),
    };
    if &rebuilt != whole || !base.is_in_h(rest) {
        return Err(Error::OracleContract(format!(
            "coset decomposition of {whole:?} does not recompose"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AmalgamClass<E> {
    /// `conjugator · G_side` is fixed.
    Elliptic {
        conjugator: AmalgamWord<E>,
        fixed_side: u8,
    },
    Hyperbolic {
        core: AmalgamWord<E>,
        conjugator: AmalgamWord<E>,
    },
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum HnnLetter<E> {
    Base(E),
    Tau(i8),
}

/// `s₁ τ^{ε₁} ⋯ sₙ τ^{εₙ} · tail` with syllables `(i, ε)`, where `i` indexes
/// the coset representative `rep(−ε, i)`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HnnWord<E> {
    pub syllables: Vec<(u32, i8)>,
    pub tail: E,
}

impl<E: Clone + Eq + Hash + Debug> HnnWord<E> {
    pub fn identity<B: HnnBase<Elem = E>>(base: &B) -> Self {
        HnnWord {
            syllables: Vec::new(),
            tail: base.identity(),
        }
    }

    pub fn from_base(g: E) -> Self {
        HnnWord {
            syllables: Vec::new(),
            tail: g,
        }
    }

    pub fn from_letters<B: HnnBase<Elem = E>>(base: &B, letters: &[HnnLetter<E>]) -> Result<Self> {
        letters
            .iter()
            .try_fold(Self::identity(base), |w, x| w.mul_letter(base, x))
    }

    pub fn syllable_length(&self) -> usize {
        self.syllables.len()
    }

    pub fn is_identity<B: HnnBase<Elem = E>>(&self, base: &B) -> bool {
        self.syllables.is_empty() && base.is_identity(&self.tail)
    }

    pub fn mul_letter<B: HnnBase<Elem = E>>(&self, base: &B, x: &HnnLetter<E>) -> Result<Self> {
        match x {
            HnnLetter::Base(g) => Ok(HnnWord {
                syllables: self.syllables.clone(),
                tail: base.mul(&self.tail, g),
            }),
            HnnLetter::Tau(eps) => self.mul_tau(base, *eps),
        }
    }

    fn mul_tau<B: HnnBase<Elem = E>>(&self, base: &B, eps: i8) -> Result<Self> {
        let (idx, h) = base.coset_decompose(&self.tail, -eps);
        let rebuilt = match idx {
            Some(i) => base.mul(&base.rep(-eps, i), &h),
            None => h.clone(),
        };
        if rebuilt != self.tail || !base.is_in_h(&h, -eps) {
            return Err(Error::OracleContract(format!(
                "coset decomposition of {:?} does not recompose",
                self.tail
            )));
        }
        let moved = base.conjugate_by_tau(&h, -eps)?;
        let mut syllables = self.syllables.clone();
        match (idx, syllables.last()) {
            (None, Some(&(i_last, e_last))) if e_last == -eps => {
                syllables.pop();
                let tail = base.mul(&base.rep(-e_last, i_last), &moved);
                Ok(HnnWord { syllables, tail })
            }
            _ => {
                syllables.push((idx.unwrap_or_else(|| base.basepoint(-eps)), eps));
                Ok(HnnWord {
                    syllables,
                    tail: moved,
                })
            }
        }
    }

    pub fn letters<B: HnnBase<Elem = E>>(&self, base: &B) -> Vec<HnnLetter<E>> {
        let mut out = Vec::new();
        for &(i, eps) in &self.syllables {
            if i != base.basepoint(-eps) {
                out.push(HnnLetter::Base(base.rep(-eps, i)));
            }
            out.push(HnnLetter::Tau(eps));
        }
        if !base.is_identity(&self.tail) {
            out.push(HnnLetter::Base(self.tail.clone()));
        }
        out
    }

    pub fn mul<B: HnnBase<Elem = E>>(&self, base: &B, rhs: &Self) -> Result<Self> {
        rhs.letters(base)
            .iter()
            .try_fold(self.clone(), |w, x| w.mul_letter(base, x))
    }

    pub fn inv<B: HnnBase<Elem = E>>(&self, base: &B) -> Result<Self> {
        let letters: Vec<HnnLetter<E>> = self
            .letters(base)
            .into_iter()
            .rev()
            .map(|x| match x {
                HnnLetter::Base(g) => HnnLetter::Base(base.inv(&g)),
                HnnLetter::Tau(e) => HnnLetter::Tau(-e),
            })
            .collect();
        Self::from_letters(base, &letters)
    }

    pub fn conjugate<B: HnnBase<Elem = E>>(&self, base: &B, by: &Self) -> Result<Self> {
        by.mul(base, self)?.mul(base, &by.inv(base)?)
    }

    fn head<B: HnnBase<Elem = E>>(&self, base: &B) -> Result<Self> {
        let (i, eps) = self.syllables[0];
        let mut letters = Vec::new();
        if i != base.basepoint(-eps) {
            letters.push(HnnLetter::Base(base.rep(-eps, i)));
        }
        letters.push(HnnLetter::Tau(eps));
        Self::from_letters(base, &letters)
    }

    pub fn cyclic_reduce<B: HnnBase<Elem = E>>(&self, base: &B) -> Result<(Self, Self)> {
        cyclic_reduce_by(
            self.clone(),
            Self::identity(base),
            0,
            |w| w.syllable_length(),
            |w| w.head(base),
            |a, b| a.mul(base, b),
            |a| a.inv(base),
        )
    }

    pub fn classify<B: HnnBase<Elem = E>>(&self, base: &B) -> Result<HnnClass<E>> {
        let (core, conjugator) = self.cyclic_reduce(base)?;
        Ok(if core.syllables.is_empty() {
            HnnClass::Elliptic { conjugator }
        } else {
            HnnClass::Hyperbolic { core, conjugator }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HnnClass<E> {
    /// `conjugator · G` is fixed.
    Elliptic { conjugator: HnnWord<E> },
    Hyperbolic {
        core: HnnWord<E>,
        conjugator: HnnWord<E>,
    },
}

/// Rotates the first syllable to the end while that shortens the word.
fn cyclic_reduce_by<W: Clone>(
    word: W,
    identity: W,
    floor: usize,
    len: impl Fn(&W) -> usize,
    head: impl Fn(&W) -> Result<W>,
    mul: impl Fn(&W, &W) -> Result<W>,
    inv: impl Fn(&W) -> Result<W>,
) -> Result<(W, W)> {
    let mut core = word;
    let mut conjugator = identity.clone();
    'outer: loop {
        let n = len(&core);
        if n <= floor {
            break;
        }
        let mut rotated = core.clone();
        let mut shift = identity.clone();
        for _ in 0..n {
            let h = head(&rotated)?;
            rotated = mul(&mul(&inv(&h)?, &rotated)?, &h)?;
            shift = mul(&shift, &h)?;
            if len(&rotated) < n {
                core = rotated;
                conjugator = mul(&conjugator, &shift)?;
                continue 'outer;
            }
        }
        break;
    }
    Ok((core, conjugator))
}
