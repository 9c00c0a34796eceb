//! `BS(2,3) = ⟨τ, b | τ⁻¹b²τ = b³⟩` as an HNN extension of `⟨b⟩ ≅ ℤ`.
//!
//! Base elements are exponents of `b`. Cosets of `⟨b²⟩` and `⟨b³⟩` are
//! represented by the smallest nonnegative exponents, so tree vertices
//! print as `τbτ⁻¹⟨b⟩` and so on.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::{Classification, TreeGroup, Vertex};
use crate::words::{parse_word, Generator, HnnBase, HnnClass, HnnLetter, HnnWord, Token};

/// The base group `⟨b⟩`, with `H₋₁ = ⟨b²⟩` and `H₁ = ⟨b³⟩`.
#[derive(Clone, Copy, Debug, Default)]
pub struct IntBase;

fn modulus(eps: i8) -> i64 {
    if eps < 0 {
        2
    } else {
        3
    }
}

impl HnnBase for IntBase {
    type Elem = i64;

    fn identity(&self) -> i64 {
        0
    }

    fn mul(&self, a: &i64, b: &i64) -> i64 {
        a + b
    }

    fn inv(&self, a: &i64) -> i64 {
        -a
    }

    fn is_identity(&self, a: &i64) -> bool {
        *a == 0
    }

    fn is_in_h(&self, a: &i64, eps: i8) -> bool {
        a.rem_euclid(modulus(eps)) == 0
    }

    fn coset_decompose(&self, a: &i64, eps: i8) -> (Option<u32>, i64) {
        let r = a.rem_euclid(modulus(eps));
        ((r != 0).then_some(r as u32), a - r)
    }

    fn rep(&self, _eps: i8, i: u32) -> i64 {
        i as i64
    }

    fn index_count(&self, eps: i8) -> u32 {
        modulus(eps) as u32
    }

    fn basepoint(&self, _eps: i8) -> u32 {
        0
    }

    fn conjugate_by_tau(&self, a: &i64, eps: i8) -> Result<i64> {
        if !self.is_in_h(a, eps) {
            return Err(Error::BrittonPinch(format!("b^{a} is not in H_{eps}")));
        }
        // τ b³ τ⁻¹ = b² and τ⁻¹ b² τ = b³.
        Ok(if eps > 0 { a / 3 * 2 } else { a / 2 * 3 })
    }
}

pub type Bs23Elem = HnnWord<i64>;

/// `BS(2,3)` acting on its Bass-Serre tree rooted at `⟨b⟩`.
///
/// A tree step `(i, +1)` is slot `i ∈ {0,1}`; `(i, −1)` is slot `2 + i`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Bs23;

impl Bs23 {
    pub fn base(&self) -> IntBase {
        IntBase
    }

    pub fn step_slot(i: u32, eps: i8) -> u32 {
        if eps > 0 {
            i
        } else {
            2 + i
        }
    }

    pub fn slot_step(slot: u32) -> (u32, i8) {
        if slot < 2 {
            (slot, 1)
        } else {
            (slot - 2, -1)
        }
    }

    pub fn from_tokens(&self, tokens: &[Token]) -> Result<Bs23Elem> {
        let mut letters = Vec::new();
        for t in tokens {
            match t.gen {
                Generator::B => letters.push(HnnLetter::Base(t.power)),
                Generator::T => {
                    let e = if t.power < 0 { -1 } else { 1 };
                    letters.extend((0..t.power.unsigned_abs()).map(|_| HnnLetter::Tau(e)));
                }
                _ => {
                    return Err(Error::InvalidGenerator(format!(
                        "{} is not a generator of BS(2,3)",
                        t.gen
                    )))
                }
            }
        }
        HnnWord::from_letters(&IntBase, &letters)
    }

    pub fn b(k: i64) -> Bs23Elem {
        HnnWord::from_base(k)
    }

    pub fn tau(e: i8) -> Bs23Elem {
        HnnWord::from_letters(&IntBase, &[HnnLetter::Tau(e)]).expect("τ is a valid letter")
    }

    /// Vertices of the line fixed by `b⁶`, indexed `−n..=n`: the positive
    /// side is `τ⟨b⟩, τbτ⁻¹⟨b⟩, τbτ⁻¹bτ⟨b⟩, …` and the negative side its
    /// mirror starting with `τ⁻¹`.
    pub fn linear_subtree(n: usize) -> Vec<Vertex> {
        let side = |first: i8, len: usize| -> Vertex {
            (0..len)
                .map(|k| {
                    let e = if k % 2 == 0 { first } else { -first };
                    Self::step_slot(if k == 0 { 0 } else { 1 }, e)
                })
                .collect()
        };
        let mut out: Vec<Vertex> = (1..=n).rev().map(|k| side(-1, k)).collect();
        out.push(Vec::new());
        out.extend((1..=n).map(|k| side(1, k)));
        out
    }

    /// Paper-style text for a vertex, e.g. `t b t^-1 <b>`.
    pub fn vertex_tokens(v: &[u32]) -> Vec<String> {
        let mut out = Vec::new();
        for &slot in v {
            let (i, e) = Self::slot_step(slot);
            if i != 0 {
                out.push(b_token(i as i64));
            }
            out.push(tau_token(e));
        }
        out.push("<b>".to_string());
        out
    }

    /// Pushes `b^power` through the vertex word one letter at a time,
    /// recording each intermediate expression as a token list.
    pub fn push_through(power: i64, v: &[u32]) -> Vec<Vec<String>> {
        enum Tok {
            B(i64),
            T(i8),
        }
        let mut suffix: Vec<Tok> = Vec::new();
        for &slot in v {
            let (i, e) = Self::slot_step(slot);
            if i != 0 {
                suffix.push(Tok::B(i as i64));
            }
            suffix.push(Tok::T(e));
        }
        let render = |prefix: &[String], p: i64, rest: &[Tok]| -> Vec<String> {
            let mut out = prefix.to_vec();
            if p != 0 {
                out.push(b_token(p));
            }
            for t in rest {
                out.push(match t {
                    Tok::B(k) => b_token(*k),
                    Tok::T(e) => tau_token(*e),
                });
            }
            out.push("<b>".to_string());
            out
        };
        let mut prefix: Vec<String> = Vec::new();
        let mut p = power;
        let mut states = vec![render(&prefix, p, &suffix)];
        for k in 0..suffix.len() {
            match suffix[k] {
                Tok::B(m) => p += m,
                Tok::T(e) => {
                    let (r, h) = IntBase.coset_decompose(&p, -e);
                    if let Some(r) = r {
                        prefix.push(b_token(r as i64));
                        p = h;
                        states.push(render(&prefix, p, &suffix[k..]));
                    }
                    p = IntBase
                        .conjugate_by_tau(&p, -e)
                        .expect("remainder lies in the edge group");
                    prefix.push(tau_token(e));
                    states.push(render(&prefix, p, &suffix[k + 1..]));
                }
            }
        }
        states.push(render(&prefix, 0, &[]));
        states
    }

    /// Checks that `b⁶` fixes the line of [`Bs23::linear_subtree`] and
    /// moves the outward neighbour of every vertex whose word starts and
    /// ends with the same power of `τ`.
    pub fn verify_b6(&self, n: usize) -> Result<B6Report> {
        if n > 8 {
            return Err(Error::CapExceeded {
                what: "linear subtree index".into(),
                value: n,
                cap: 8,
            });
        }
        let b6 = Self::b(6);
        let mut fixed = Vec::new();
        let mut moved = Vec::new();
        for v in Self::linear_subtree(n) {
            let image = self.act(&b6, &v)?;
            fixed.push(VertexCheck {
                vertex: self.render_vertex(&v),
                image: self.render_vertex(&image),
                holds: image == v,
                trace: Self::push_through(6, &v)
                    .iter()
                    .map(|s| s.join(" "))
                    .collect(),
            });
            if v.len() % 2 == 1 {
                let (_, e) = Self::slot_step(*v.last().expect("odd length is non-empty"));
                let mut w = v.clone();
                w.push(Self::step_slot(0, e));
                let image = self.act(&b6, &w)?;
                moved.push(VertexCheck {
                    vertex: self.render_vertex(&w),
                    image: self.render_vertex(&image),
                    holds: image != w,
                    trace: Self::push_through(6, &w)
                        .iter()
                        .map(|s| s.join(" "))
                        .collect(),
                });
            }
        }
        let passed = fixed.iter().chain(&moved).all(|c| c.holds);
        Ok(B6Report {
            fixed,
            moved,
            passed,
        })
    }
}

fn b_token(k: i64) -> String {
    if k == 1 {
        "b".to_string()
    } else {
        format!("b^{k}")
    }
}

fn tau_token(e: i8) -> String {
    if e > 0 {
        "t".to_string()
    } else {
        "t^-1".to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexCheck {
    pub vertex: String,
    pub image: String,
    pub holds: bool,
    pub trace: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct B6Report {
    pub fixed: Vec<VertexCheck>,
    pub moved: Vec<VertexCheck>,
    pub passed: bool,
}

pub fn render_word(w: &Bs23Elem) -> String {
    let mut parts = Vec::new();
    for &(i, e) in &w.syllables {
        if i != 0 {
            parts.push(b_token(i as i64));
        }
        parts.push(tau_token(e));
    }
    if w.tail != 0 {
        parts.push(b_token(w.tail));
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join(" * ")
    }
}

impl TreeGroup for Bs23 {
    type Elem = Bs23Elem;

    fn identity(&self) -> Bs23Elem {
        HnnWord::identity(&IntBase)
    }

    fn mul(&self, a: &Bs23Elem, b: &Bs23Elem) -> Result<Bs23Elem> {
        a.mul(&IntBase, b)
    }

    fn inv(&self, a: &Bs23Elem) -> Result<Bs23Elem> {
        a.inv(&IntBase)
    }

    fn is_identity(&self, a: &Bs23Elem) -> bool {
        a.is_identity(&IntBase)
    }

    fn syllable_length(&self, a: &Bs23Elem) -> usize {
        a.syllable_length()
    }

    fn classify(&self, a: &Bs23Elem) -> Result<Classification> {
        Ok(match a.classify(&IntBase)? {
            HnnClass::Elliptic { conjugator } => Classification::Elliptic {
                witness: self.coset_vertex(&conjugator, 0),
            },
            HnnClass::Hyperbolic { .. } => Classification::Hyperbolic,
        })
    }

    fn child_steps(&self, v: &[u32]) -> Vec<u32> {
        match v.last() {
            None => (0..5).collect(),
            Some(&slot) => {
                let (_, e) = Self::slot_step(slot);
                let back = Self::step_slot(0, -e);
                (0..5).filter(|&s| s != back).collect()
            }
        }
    }

    fn descend(&self, w: &Bs23Elem, _depth: usize, step: u32) -> Result<Bs23Elem> {
        let (i, e) = Self::slot_step(step);
        let w = if i != 0 {
            w.mul_letter(&IntBase, &HnnLetter::Base(i as i64))?
        } else {
            w.clone()
        };
        w.mul_letter(&IntBase, &HnnLetter::Tau(e))
    }

    fn coset_vertex(&self, w: &Bs23Elem, _depth: usize) -> Vertex {
        w.syllables
            .iter()
            .map(|&(i, e)| Self::step_slot(i, e))
            .collect()
    }

    fn render(&self, a: &Bs23Elem) -> String {
        render_word(a)
    }

    fn render_vertex(&self, v: &[u32]) -> String {
        Self::vertex_tokens(v).join(" ")
    }

    fn parse(&self, text: &str) -> Result<Bs23Elem> {
        self.from_tokens(&parse_word(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reduce(text: &str) -> Bs23Elem {
        Bs23.parse(text).unwrap()
    }

    #[test]
    fn coset_decomposition() {
        assert_eq!(IntBase.coset_decompose(&5, -1), (Some(1), 4));
        assert_eq!(IntBase.coset_decompose(&-4, 1), (Some(2), -6));
        assert_eq!(IntBase.coset_decompose(&6, 1), (None, 6));
    }

    #[test]
    fn defining_relation_and_conjugations() {
        assert_eq!(render_word(&reduce("t^-1 * b^2 * t")), "b^3");
        assert_eq!(render_word(&reduce("t^-1 b^4 t")), "b^6");
        assert_eq!(render_word(&reduce("t b^9 t^-1")), "b^6");
        assert_eq!(
            IntBase.conjugate_by_tau(&1, 1),
            Err(Error::BrittonPinch("b^1 is not in H_1".into()))
        );
    }

    #[test]
    fn no_pinch_without_the_edge_group() {
        let w = reduce("b^6 * t b t^-1");
        assert_eq!(w.syllable_length(), 2);
        assert_eq!(render_word(&w), "t * b * t^-1 * b^6");
        assert_eq!(render_word(&reduce("t^-1 b t")), "t^-1 * b * t");
    }

    #[test]
    fn normal_forms_respect_group_laws() {
        let words = [
            "t b^5 t^-1 b",
            "b^-7 t^2 b t^-1",
            "t^-1 b^3 t^-1 b",
            "b t b t b t^-1",
        ];
        for a in words {
            let a = reduce(a);
            assert!(Bs23.is_identity(&Bs23.mul(&a, &Bs23.inv(&a).unwrap()).unwrap()));
            for b in words {
                let b = reduce(b);
                for c in words {
                    let c = reduce(c);
                    let left = Bs23.mul(&Bs23.mul(&a, &b).unwrap(), &c).unwrap();
                    let right = Bs23.mul(&a, &Bs23.mul(&b, &c).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn classification() {
        assert_eq!(
            Bs23.classify(&reduce("b")).unwrap(),
            Classification::Elliptic { witness: vec![] }
        );
        assert_eq!(
            Bs23.classify(&reduce("t")).unwrap(),
            Classification::Hyperbolic
        );
        let conj = Bs23.classify(&reduce("t^-1 b t")).unwrap();
        assert_eq!(
            conj,
            Classification::Elliptic {
                witness: vec![Bs23::step_slot(0, -1)]
            }
        );
    }

    #[test]
    fn linear_subtree_vertices() {
        let line = Bs23::linear_subtree(3);
        let text: Vec<String> = line.iter().map(|v| Bs23.render_vertex(v)).collect();
        assert_eq!(
            text,
            [
                "t^-1 b t b t^-1 <b>",
                "t^-1 b t <b>",
                "t^-1 <b>",
                "<b>",
                "t <b>",
                "t b t^-1 <b>",
                "t b t^-1 b t <b>"
            ]
        );
    }

    #[test]
    fn b6_fixes_the_base_vertex() {
        assert_eq!(Bs23.act(&Bs23::b(6), &[]).unwrap(), Vec::<u32>::new());
    }
}
