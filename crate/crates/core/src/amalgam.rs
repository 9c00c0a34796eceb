//! The amalgam family `G[Γ₀, Γ₁] = G₀ *_H G₁`.
//!
//! An element of `G_j` is a portrait rooted at a side-`j` node. The root
//! label lies in `Γ_j`; a node at depth `d` has side `(j + d) mod 2` and its
//! label lies in that side's point stabilizer `Γ'`. Below the root, children
//! never sit in the basepoint slot. The root's child in slot `ι_j` is the
//! `Q_{1−j}` factor of an element of `H`, so the same element of `H` seen
//! from the other side is the portrait re-rooted along `(ι_j, ι_{1−j})`.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permgroup::{AbelQuotient, Perm, PermGroup};
use crate::portrait::{Portrait, PortraitJson};
use crate::tree::{Classification, TreeGroup, Vertex};
use crate::words::{
    parse_word, print_word, AmalgamBase, AmalgamClass, AmalgamWord, Generator, Token,
};

/// Longest transversal sequence accepted by [`AmalgamParams::cjn_member`].
pub const MAX_CJN_LENGTH: usize = 6;

/// An element of `G₀` or `G₁`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct GElem {
    side: u8,
    portrait: Portrait,
}

impl GElem {
    pub fn side(&self) -> u8 {
        self.side
    }

    pub fn portrait(&self) -> &Portrait {
        &self.portrait
    }

    pub fn to_json(&self) -> PortraitJson {
        self.portrait.to_json()
    }
}

/// An element of `Q₀` or `Q₁`, rooted at a node of its own side.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct QElem {
    side: u8,
    portrait: Portrait,
}

impl QElem {
    pub fn side(&self) -> u8 {
        self.side
    }

    pub fn portrait(&self) -> &Portrait {
        &self.portrait
    }

    pub fn is_identity(&self) -> bool {
        self.portrait.is_identity()
    }
}

/// Image of `θ` in `Γ₀/[Γ₀,Γ₀] × Γ₁/[Γ₁,Γ₁]`, as class ids of the two quotients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Theta {
    pub gamma0: usize,
    pub gamma1: usize,
}

impl Theta {
    pub const IDENTITY: Theta = Theta {
        gamma0: 0,
        gamma1: 0,
    };

    fn get(&self, side: u8) -> usize {
        if side == 0 {
            self.gamma0
        } else {
            self.gamma1
        }
    }

    fn with(self, side: u8, value: usize) -> Theta {
        if side == 0 {
            Theta {
                gamma0: value,
                ..self
            }
        } else {
            Theta {
                gamma1: value,
                ..self
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CstarReport {
    pub unique_trace: bool,
    pub cstar_simple: bool,
    pub quasi_kernel_amenable: bool,
}

/// Criterion logic for the family, given whether `Γ'₀` and `Γ'₁` are amenable.
pub fn cstar_report(stabilizer_amenable: [bool; 2]) -> CstarReport {
    CstarReport {
        unique_trace: true,
        cstar_simple: !stabilizer_amenable[0] || !stabilizer_amenable[1],
        quasi_kernel_amenable: stabilizer_amenable[0] && stabilizer_amenable[1],
    }
}

/// One instance of a defining relation, read as `lhs = rhs` in `G_side`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelationInstance {
    pub relation: &'static str,
    pub side: u8,
    pub lhs: Vec<Token>,
    pub rhs: Vec<Token>,
}

#[derive(Clone, Debug)]
pub struct AmalgamParams {
    gamma: [PermGroup; 2],
    stab: [PermGroup; 2],
    transversal: [Vec<Perm>; 2],
    abel: [AbelQuotient; 2],
}

fn other(side: u8) -> u8 {
    1 - side
}

impl AmalgamParams {
    pub fn new(gamma0: PermGroup, gamma1: PermGroup) -> Result<Self> {
        for (j, g) in [&gamma0, &gamma1].into_iter().enumerate() {
            if g.degree() < 2 {
                return Err(Error::Config(format!("Γ{j} acts on fewer than two points")));
            }
            if !g.is_transitive() {
                return Err(Error::Config(format!(
                    "Γ{j} ({}) is not transitive",
                    g.name
                )));
            }
        }
        let stab = [
            gamma0.stabilizer(gamma0.basepoint()),
            gamma1.stabilizer(gamma1.basepoint()),
        ];
        if stab[0].order() == 1 && stab[1].order() == 1 {
            return Err(Error::Config("both point stabilizers are trivial".into()));
        }
        let transversal = [gamma0.transversal()?, gamma1.transversal()?];
        let abel = [gamma0.abelianization(), gamma1.abelianization()];
        Ok(AmalgamParams {
            gamma: [gamma0, gamma1],
            stab,
            transversal,
            abel,
        })
    }

    pub fn symmetric(n0: usize, n1: usize) -> Result<Self> {
        Self::new(PermGroup::symmetric(n0), PermGroup::symmetric(n1))
    }

    pub fn gamma(&self, side: u8) -> &PermGroup {
        &self.gamma[side as usize]
    }

    pub fn stabilizer(&self, side: u8) -> &PermGroup {
        &self.stab[side as usize]
    }

    pub fn abelianization(&self, side: u8) -> &AbelQuotient {
        &self.abel[side as usize]
    }

    pub fn basepoint(&self, side: u8) -> u32 {
        self.gamma(side).basepoint()
    }

    pub fn degree(&self, side: u8) -> usize {
        self.gamma(side).degree()
    }

    /// The points of the domain other than the basepoint.
    pub fn points_prime(&self, side: u8) -> Vec<u32> {
        let b = self.basepoint(side);
        (0..self.degree(side) as u32).filter(|&i| i != b).collect()
    }

    pub fn transversal_rep(&self, side: u8, i: u32) -> &Perm {
        &self.transversal[side as usize][i as usize]
    }

    /// Label degree at depth `d` below a side-`root` node.
    pub fn degree_at(&self, root: u8) -> impl Fn(usize) -> usize + '_ {
        move |d| self.degree(((root as usize + d) % 2) as u8)
    }

    fn elem(&self, side: u8, portrait: Portrait) -> GElem {
        GElem { side, portrait }
    }

    pub fn identity_g(&self, side: u8) -> GElem {
        self.elem(side, Portrait::identity(self.degree(side)))
    }

    pub fn parse_perm(&self, side: u8, text: &str) -> Result<Perm> {
        Perm::parse(text, self.degree(side))
    }

    /// `g_side(σ)` for `σ ∈ Γ_side`.
    pub fn gen_g(&self, side: u8, sigma: &Perm) -> Result<GElem> {
        if !self.gamma(side).contains(sigma) {
            return Err(Error::InvalidGenerator(format!(
                "{sigma} is not in Γ{side}"
            )));
        }
        Ok(self.elem(side, Portrait::top(sigma.clone())))
    }

    /// Checks that `path[t]` avoids the basepoint of side `side + t`.
    pub fn check_path(&self, side: u8, path: &[u32]) -> Result<()> {
        for (t, &i) in path.iter().enumerate() {
            let s = ((side as usize + t) % 2) as u8;
            if i as usize >= self.degree(s) || i == self.basepoint(s) {
                return Err(Error::InvalidPath(format!(
                    "index {i} at position {t} is not in I'{s} for a path from side {side}"
                )));
            }
        }
        Ok(())
    }

    /// `h_side(path; σ)`, with `σ` in the stabilizer of side `side + |path|`.
    pub fn gen_h(&self, side: u8, path: &[u32], sigma: &Perm) -> Result<GElem> {
        if path.is_empty() {
            return Err(Error::InvalidPath(
                "h-generators need a nonempty path".into(),
            ));
        }
        self.check_path(side, path)?;
        let end = ((side as usize + path.len()) % 2) as u8;
        if !self.stabilizer(end).contains(sigma) {
            return Err(Error::InvalidGenerator(format!(
                "{sigma} is not in Γ'{end}"
            )));
        }
        Ok(self.elem(
            side,
            Portrait::nested(path, sigma.clone(), self.degree_at(side)),
        ))
    }

    pub fn mul(&self, a: &GElem, b: &GElem) -> Result<GElem> {
        if a.side != b.side {
            return Err(Error::SideMismatch(format!(
                "cannot multiply an element of G{} by one of G{}",
                a.side, b.side
            )));
        }
        Ok(self.elem(a.side, a.portrait.mul(&b.portrait)))
    }

    pub fn inv(&self, a: &GElem) -> GElem {
        self.elem(a.side, a.portrait.inverse())
    }

    pub fn is_in_h(&self, a: &GElem) -> bool {
        a.portrait.label().fixes(self.basepoint(a.side))
    }

    /// `a = g_j(τ_j^i) · h` with `h ∈ H`, where `i` is the image of the basepoint.
    pub fn coset_decompose(&self, a: &GElem) -> (Option<u32>, GElem) {
        let j = a.side;
        let i = a.portrait.label().apply(self.basepoint(j));
        if i == self.basepoint(j) {
            return (None, a.clone());
        }
        let rep = Portrait::top(self.transversal_rep(j, i).inverse());
        (Some(i), self.elem(j, rep.mul(&a.portrait)))
    }

    /// Reads an element of `H` from the other side.
    pub fn transfer(&self, h: &GElem, side: u8) -> Result<GElem> {
        if h.side == side {
            return Ok(h.clone());
        }
        if !self.is_in_h(h) {
            return Err(Error::Domain(format!("{:?} is not in H", h.portrait)));
        }
        let p = h.portrait.reroot(
            self.basepoint(h.side),
            self.basepoint(side),
            self.degree(side),
        );
        Ok(self.elem(side, p))
    }

    /// The element of `G_side` given by `q`.
    pub fn q_into_g(&self, q: &QElem, side: u8) -> GElem {
        if q.side == side {
            return self.elem(side, q.portrait.clone());
        }
        let p = Portrait::from_parts(
            Perm::identity(self.degree(side)),
            [(self.basepoint(side), q.portrait.clone())],
        );
        self.elem(side, p)
    }

    /// Splits `h ∈ H` as `q₀ · q₁` with `q_k ∈ Q_k`.
    pub fn h_factor(&self, h: &GElem) -> Result<(QElem, QElem)> {
        if !self.is_in_h(h) {
            return Err(Error::Domain(format!("{:?} is not in H", h.portrait)));
        }
        let j = h.side;
        let (across, own) = h.portrait.split_child(self.basepoint(j));
        let across = across.unwrap_or_else(|| Portrait::identity(self.degree(other(j))));
        let own = QElem {
            side: j,
            portrait: own,
        };
        let across = QElem {
            side: other(j),
            portrait: across,
        };
        Ok(if j == 0 { (own, across) } else { (across, own) })
    }

    /// Membership in `K_j`, which is the factor `Q_{1−j}` of `H`.
    pub fn quasi_kernel_member(&self, h: &GElem, j: u8) -> Result<bool> {
        let (q0, q1) = self.h_factor(h)?;
        Ok(if j == 0 {
            q0.is_identity()
        } else {
            q1.is_identity()
        })
    }

    /// Whether `g⁻¹ h g ∈ H` for every alternating product `g` of `n`
    /// nontrivial transversal elements starting on side `j`.
    pub fn cjn_member(&self, h: &GElem, j: u8, n: usize) -> Result<bool> {
        if n > MAX_CJN_LENGTH {
            return Err(Error::EnumerationLimit {
                what: "transversal sequence length".into(),
                limit: MAX_CJN_LENGTH,
            });
        }
        if !self.is_in_h(h) {
            return Err(Error::Domain(format!("{:?} is not in H", h.portrait)));
        }
        let mut sequences: Vec<Vec<GElem>> = vec![Vec::new()];
        for t in 0..n {
            let s = ((j as usize + t) % 2) as u8;
            sequences = sequences
                .into_iter()
                .flat_map(|seq| {
                    self.points_prime(s).into_iter().map(move |i| {
                        let mut next = seq.clone();
                        next.push(self.rep(s, i));
                        next
                    })
                })
                .collect();
        }
        for seq in sequences {
            let mut letters: Vec<GElem> = seq.iter().rev().map(|x| self.inv(x)).collect();
            letters.push(h.clone());
            letters.extend(seq.iter().cloned());
            if AmalgamWord::from_letters(self, &letters)?.syllable_length() > 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// `h ∈ C_{j,1} ∩ ⋯ ∩ C_{j,n}`.
    pub fn cjn_member_upto(&self, h: &GElem, j: u8, n: usize) -> Result<bool> {
        for k in 1..=n {
            if !self.cjn_member(h, j, k)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Finite groups are amenable, so both flags are always set.
    pub fn stabilizer_amenability(&self) -> [bool; 2] {
        [true, true]
    }

    pub fn cstar_report(&self) -> CstarReport {
        cstar_report(self.stabilizer_amenability())
    }

    /// Checks every label and slot of a side-`side` portrait.
    pub fn validate(&self, side: u8, p: &Portrait) -> Result<()> {
        if !self.gamma(side).contains(p.label()) {
            return Err(Error::InvalidGenerator(format!(
                "root label {} is not in Γ{side}",
                p.label()
            )));
        }
        for (slot, c) in p.children() {
            if *slot as usize >= self.degree(side) {
                return Err(Error::InvalidPath(format!("slot {slot} outside I{side}")));
            }
            self.validate_q(other(side), c)?;
        }
        Ok(())
    }

    fn validate_q(&self, side: u8, p: &Portrait) -> Result<()> {
        if !self.stabilizer(side).contains(p.label()) {
            return Err(Error::InvalidGenerator(format!(
                "label {} is not in Γ'{side}",
                p.label()
            )));
        }
        for (slot, c) in p.children() {
            if *slot as usize >= self.degree(side) || *slot == self.basepoint(side) {
                return Err(Error::InvalidPath(format!(
                    "slot {slot} is not in I'{side}"
                )));
            }
            self.validate_q(other(side), c)?;
        }
        Ok(())
    }

    pub fn g_from_json(&self, side: u8, json: &PortraitJson) -> Result<GElem> {
        let p = Portrait::from_json(json, &self.degree_at(side))?;
        self.validate(side, &p)?;
        Ok(self.elem(side, p))
    }
}

impl AmalgamParams {
    pub fn g_token(&self, side: u8, sigma: &Perm) -> Token {
        Token::new(
            Generator::G {
                side,
                perm: sigma.to_string(),
            },
            1,
        )
    }

    pub fn h_token(&self, side: u8, path: &[u32], sigma: &Perm) -> Token {
        Token::new(
            Generator::H {
                side,
                path: path.to_vec(),
                perm: sigma.to_string(),
            },
            1,
        )
    }

    /// The element named by a token, on its own side.
    pub fn token_elem(&self, token: &Token) -> Result<GElem> {
        match &token.gen {
            Generator::G { side, perm } => {
                let side = self.check_side(*side)?;
                self.gen_g(side, &self.parse_perm(side, perm)?.pow(token.power))
            }
            Generator::H { side, path, perm } => {
                let side = self.check_side(*side)?;
                let end = ((side as usize + path.len()) % 2) as u8;
                self.gen_h(side, path, &self.parse_perm(end, perm)?.pow(token.power))
            }
            other => Err(Error::InvalidGenerator(format!(
                "{other} is not an amalgam generator"
            ))),
        }
    }

    fn check_side(&self, side: u8) -> Result<u8> {
        if side > 1 {
            return Err(Error::InvalidGenerator(format!(
                "side {side} is neither 0 nor 1"
            )));
        }
        Ok(side)
    }

    /// Multiplies the tokens as portraits of `G_side`, moving `H`-elements across.
    pub fn eval_on_side(&self, tokens: &[Token], side: u8) -> Result<GElem> {
        tokens.iter().try_fold(self.identity_g(side), |acc, t| {
            let x = self.transfer(&self.token_elem(t)?, side)?;
            self.mul(&acc, &x)
        })
    }

    /// The normal form of a generator word.
    pub fn reduce(&self, tokens: &[Token]) -> Result<AmalgamWord<GElem>> {
        let letters = tokens
            .iter()
            .map(|t| self.token_elem(t))
            .collect::<Result<Vec<_>>>()?;
        AmalgamWord::from_letters(self, &letters)
    }

    /// Writes a portrait as a product of generators, deepest nodes first.
    pub fn expand(&self, g: &GElem) -> Vec<Token> {
        let j = g.side;
        let mut nodes = g.portrait.nodes();
        nodes.reverse();
        nodes
            .into_iter()
            .map(|(path, label)| match path.split_first() {
                None => self.g_token(j, label),
                Some((&first, rest)) if first == self.basepoint(j) => {
                    if rest.is_empty() {
                        self.g_token(other(j), label)
                    } else {
                        self.h_token(other(j), rest, label)
                    }
                }
                Some(_) => self.h_token(j, &path, label),
            })
            .collect()
    }

    pub fn expand_word(&self, w: &AmalgamWord<GElem>) -> Vec<Token> {
        w.letters(self)
            .iter()
            .flat_map(|x| self.expand(x))
            .collect()
    }

    pub fn render(&self, w: &AmalgamWord<GElem>) -> String {
        print_word(&self.expand_word(w))
    }

    /// `θ` evaluated generator by generator.
    pub fn theta(&self, tokens: &[Token]) -> Result<Theta> {
        tokens.iter().try_fold(Theta::IDENTITY, |acc, t| {
            let (side, perm) = match &t.gen {
                Generator::G { side, perm } => (self.check_side(*side)?, perm),
                Generator::H { side, path, perm } => {
                    let side = self.check_side(*side)?;
                    ((side as usize + path.len()) as u8 % 2, perm)
                }
                other => {
                    return Err(Error::InvalidGenerator(format!(
                        "{other} is not an amalgam generator"
                    )))
                }
            };
            let quotient = self.abelianization(side);
            let class = quotient
                .try_project(&self.parse_perm(side, perm)?)
                .ok_or_else(|| Error::InvalidGenerator(format!("{perm} is not in Γ{side}")))?;
            let value = quotient.op(acc.get(side), quotient.pow(class, t.power));
            Ok(acc.with(side, value))
        })
    }

    pub fn theta_op(&self, a: Theta, b: Theta) -> Theta {
        Theta {
            gamma0: self.abel[0].op(a.gamma0, b.gamma0),
            gamma1: self.abel[1].op(a.gamma1, b.gamma1),
        }
    }

    /// Membership in the kernel `N` of `θ`.
    pub fn n_member(&self, tokens: &[Token]) -> Result<bool> {
        Ok(self.theta(tokens)? == Theta::IDENTITY)
    }

    /// All paths from side `side` of the given length.
    pub fn paths(&self, side: u8, len: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        for t in 0..len {
            let s = ((side as usize + t) % 2) as u8;
            out = out
                .into_iter()
                .flat_map(|p: Vec<u32>| {
                    self.points_prime(s).into_iter().map(move |i| {
                        let mut q = p.clone();
                        q.push(i);
                        q
                    })
                })
                .collect();
        }
        out
    }

    fn random_path<R: Rng>(&self, rng: &mut R, side: u8, len: usize) -> Vec<u32> {
        (0..len)
            .map(|t| {
                let s = ((side as usize + t) % 2) as u8;
                *self.points_prime(s).choose(rng).expect("I' is nonempty")
            })
            .collect()
    }

    fn random_perm<R: Rng>(&self, rng: &mut R, group: &PermGroup) -> Perm {
        group
            .elements()
            .choose(rng)
            .expect("groups are nonempty")
            .clone()
    }

    /// A random `g`- or `h`-generator with paths of length at most `max_path`.
    pub fn random_token<R: Rng>(&self, rng: &mut R, max_path: usize) -> Token {
        let side = rng.gen_range(0..2u8);
        let len = rng.gen_range(0..=max_path);
        let mut t = if len == 0 {
            let sigma = self.random_perm(rng, self.gamma(side));
            self.g_token(side, &sigma)
        } else {
            let path = self.random_path(rng, side, len);
            let end = ((side as usize + len) % 2) as u8;
            let sigma = self.random_perm(rng, self.stabilizer(end));
            self.h_token(side, &path, &sigma)
        };
        t.power = *[-1i64, 1, 2].choose(rng).expect("nonempty");
        t
    }

    pub fn random_word<R: Rng>(&self, rng: &mut R, max_len: usize, max_path: usize) -> Vec<Token> {
        let len = rng.gen_range(1..=max_len);
        (0..len).map(|_| self.random_token(rng, max_path)).collect()
    }

    /// A sample from the generating set of `N`: one draw from each of its
    /// four families, with paths of length at most `max_path`.
    pub fn sample_n_generators<R: Rng>(&self, rng: &mut R, max_path: usize) -> Vec<Vec<Token>> {
        let mut out = Vec::new();
        for k in 0..2u8 {
            let perfect: Vec<&Perm> = self
                .gamma(k)
                .elements()
                .iter()
                .filter(|s| self.abelianization(k).project(s) == 0)
                .collect();
            out.push(vec![
                self.g_token(k, perfect.choose(rng).expect("identity is perfect"))
            ]);
            let sigma = self.random_perm(rng, self.stabilizer(k));
            let i = self.random_path(rng, other(k), 1);
            out.push(vec![
                self.g_token(k, &sigma),
                self.h_token(other(k), &i, &sigma.inverse()),
            ]);
        }
        let n = rng.gen_range(1..max_path.max(2));
        let sigma = self.random_perm(rng, self.stabilizer(((n + 1) % 2) as u8));
        out.push(vec![
            self.h_token(0, &self.random_path(rng, 0, n + 1), &sigma),
            self.h_token(1, &self.random_path(rng, 1, n), &sigma.inverse()),
        ]);
        let n = rng.gen_range(1..max_path.max(2));
        let sigma = self.random_perm(rng, self.stabilizer((n % 2) as u8));
        out.push(vec![
            self.h_token(0, &self.random_path(rng, 0, n), &sigma),
            self.h_token(1, &self.random_path(rng, 1, n + 1), &sigma.inverse()),
        ]);
        out
    }

    /// All elements of `Q_side` whose portraits have depth at most `depth`.
    pub fn enumerate_q(&self, side: u8, depth: usize) -> Vec<Portrait> {
        let below = match depth {
            0 => vec![Portrait::identity(self.degree(other(side)))],
            d => self.enumerate_q(other(side), d - 1),
        };
        self.assemble(self.stabilizer(side), &self.points_prime(side), &below)
    }

    /// All elements of `H` on side `side` with portraits of depth at most `depth`.
    pub fn enumerate_h(&self, side: u8, depth: usize) -> Vec<GElem> {
        let below = match depth {
            0 => vec![Portrait::identity(self.degree(other(side)))],
            d => self.enumerate_q(other(side), d - 1),
        };
        let slots: Vec<u32> = (0..self.degree(side) as u32).collect();
        self.assemble(self.stabilizer(side), &slots, &below)
            .into_iter()
            .map(|p| self.elem(side, p))
            .collect()
    }

    fn assemble(&self, labels: &PermGroup, slots: &[u32], below: &[Portrait]) -> Vec<Portrait> {
        let mut fillings: Vec<Vec<(u32, Portrait)>> = vec![Vec::new()];
        for &slot in slots {
            fillings = fillings
                .into_iter()
                .flat_map(|f| {
                    below.iter().map(move |c| {
                        let mut g = f.clone();
                        g.push((slot, c.clone()));
                        g
                    })
                })
                .collect();
        }
        labels
            .elements()
            .iter()
            .flat_map(|l| {
                fillings
                    .iter()
                    .map(move |f| Portrait::from_parts(l.clone(), f.clone()))
            })
            .collect()
    }

    fn random_q<R: Rng>(&self, rng: &mut R, side: u8, depth: usize) -> Portrait {
        let label = self.random_perm(rng, self.stabilizer(side));
        let children: Vec<(u32, Portrait)> = if depth == 0 {
            Vec::new()
        } else {
            let mut children = Vec::new();
            for i in self.points_prime(side) {
                if rng.gen_bool(0.5) {
                    children.push((i, self.random_q(rng, other(side), depth - 1)));
                }
            }
            children
        };
        Portrait::from_parts(label, children)
    }

    /// A random element of `G_side` of depth at most `depth`; inside `H`
    /// when `in_h` is set.
    pub fn random_g<R: Rng>(&self, rng: &mut R, side: u8, depth: usize, in_h: bool) -> GElem {
        let group = if in_h {
            self.stabilizer(side)
        } else {
            self.gamma(side)
        };
        let label = self.random_perm(rng, group);
        let children: Vec<(u32, Portrait)> = if depth == 0 {
            Vec::new()
        } else {
            let mut children = Vec::new();
            for i in 0..self.degree(side) as u32 {
                if rng.gen_bool(0.5) {
                    children.push((i, self.random_q(rng, other(side), depth - 1)));
                }
            }
            children
        };
        self.elem(side, Portrait::from_parts(label, children))
    }
}

impl AmalgamParams {
    fn paths_upto(&self, side: u8, max_len: usize) -> Vec<Vec<u32>> {
        (1..=max_len)
            .flat_map(|len| self.paths(side, len))
            .collect()
    }

    fn stab_at(&self, side: u8, len: usize) -> &PermGroup {
        self.stabilizer(((side as usize + len) % 2) as u8)
    }

    /// Every instance of R1–R6 with paths of length at most `max_path`.
    pub fn relation_instances(&self, max_path: usize) -> Vec<RelationInstance> {
        let mut out = Vec::new();
        let inst = |relation, side, lhs: Vec<Token>, rhs: Vec<Token>| RelationInstance {
            relation,
            side,
            lhs,
            rhs,
        };
        // Q_j generators, for R1.
        let q_gens = |j: u8| -> Vec<Token> {
            let mut gens: Vec<Token> = self
                .stabilizer(j)
                .elements()
                .iter()
                .map(|s| self.g_token(j, s))
                .collect();
            for path in self.paths_upto(j, max_path) {
                for s in self.stab_at(j, path.len()).elements() {
                    gens.push(self.h_token(j, &path, s));
                }
            }
            gens
        };
        let (q0, q1) = (q_gens(0), q_gens(1));
        for a in &q0 {
            for b in &q1 {
                out.push(inst(
                    "R1",
                    0,
                    vec![a.clone(), b.clone()],
                    vec![b.clone(), a.clone()],
                ));
            }
        }
        for j in 0..2u8 {
            let paths = self.paths_upto(j, max_path);
            for long in &paths {
                for short in paths.iter().filter(|p| p.len() <= long.len()) {
                    let m = short.len();
                    if short[..] == long[..m] {
                        continue;
                    }
                    for s in self.stab_at(j, m).elements() {
                        for t in self.stab_at(j, long.len()).elements() {
                            let a = self.h_token(j, short, s);
                            let b = self.h_token(j, long, t);
                            out.push(inst("R2", j, vec![a.clone(), b.clone()], vec![b, a]));
                        }
                    }
                }
                for m in 1..long.len() {
                    let prefix = &long[..m];
                    for s in self.stab_at(j, m).elements() {
                        for t in self.stab_at(j, long.len()).elements() {
                            let a = self.h_token(j, prefix, s);
                            let mut moved = long.clone();
                            moved[m] = s.apply(long[m]);
                            out.push(inst(
                                "R3",
                                j,
                                vec![a.clone(), self.h_token(j, long, t), a.inverse()],
                                vec![self.h_token(j, &moved, t)],
                            ));
                        }
                    }
                }
                let stab = self.stab_at(j, long.len());
                let id = stab.identity();
                out.push(inst("R4", j, vec![self.h_token(j, long, &id)], vec![]));
                for s in stab.elements() {
                    for t in stab.elements() {
                        out.push(inst(
                            "R4",
                            j,
                            vec![self.h_token(j, long, t), self.h_token(j, long, s)],
                            vec![self.h_token(j, long, &(t * s))],
                        ));
                    }
                    out.push(inst(
                        "R4",
                        j,
                        vec![self.h_token(j, long, s).inverse()],
                        vec![self.h_token(j, long, &s.inverse())],
                    ));
                }
            }
            let gamma = self.gamma(j);
            out.push(inst(
                "R5",
                j,
                vec![self.g_token(j, &gamma.identity())],
                vec![],
            ));
            for s in gamma.elements() {
                for t in gamma.elements() {
                    out.push(inst(
                        "R5",
                        j,
                        vec![self.g_token(j, s), self.g_token(j, t)],
                        vec![self.g_token(j, &(s * t))],
                    ));
                }
                out.push(inst(
                    "R5",
                    j,
                    vec![self.g_token(j, s).inverse()],
                    vec![self.g_token(j, &s.inverse())],
                ));
            }
            for path in &paths {
                for s in gamma.elements() {
                    for t in self.stab_at(j, path.len()).elements() {
                        let g = self.g_token(j, s);
                        let lhs = vec![g.clone(), self.h_token(j, path, t), g.inverse()];
                        let image = s.apply(path[0]);
                        let rhs = if image == self.basepoint(j) {
                            if path.len() == 1 {
                                self.g_token(other(j), t)
                            } else {
                                self.h_token(other(j), &path[1..], t)
                            }
                        } else {
                            let mut moved = path.clone();
                            moved[0] = image;
                            self.h_token(j, &moved, t)
                        };
                        out.push(inst("R6", j, lhs, vec![rhs]));
                    }
                }
            }
        }
        out
    }

    /// Checks an instance both as portraits on its side and as normal forms.
    pub fn relation_holds(&self, r: &RelationInstance) -> Result<bool> {
        let portraits = self.eval_on_side(&r.lhs, r.side)? == self.eval_on_side(&r.rhs, r.side)?;
        let words = self.reduce(&r.lhs)? == self.reduce(&r.rhs)?;
        Ok(portraits && words)
    }
}

impl AmalgamBase for AmalgamParams {
    type Elem = GElem;

    fn identity(&self, side: u8) -> GElem {
        self.identity_g(side)
    }

    fn side(&self, a: &GElem) -> u8 {
        a.side
    }

    fn mul(&self, a: &GElem, b: &GElem) -> Result<GElem> {
        AmalgamParams::mul(self, a, b)
    }

    fn inv(&self, a: &GElem) -> GElem {
        AmalgamParams::inv(self, a)
    }

    fn is_identity(&self, a: &GElem) -> bool {
        a.portrait.is_identity()
    }

    fn is_in_h(&self, a: &GElem) -> bool {
        AmalgamParams::is_in_h(self, a)
    }

    fn coset_decompose(&self, a: &GElem) -> (Option<u32>, GElem) {
        AmalgamParams::coset_decompose(self, a)
    }

    fn rep(&self, side: u8, i: u32) -> GElem {
        self.elem(side, Portrait::top(self.transversal_rep(side, i).clone()))
    }

    fn to_side(&self, h: &GElem, side: u8) -> Result<GElem> {
        self.transfer(h, side)
    }

    fn coset_labels(&self, side: u8) -> Vec<u32> {
        self.points_prime(side)
    }
}

pub type AmalgamElem = AmalgamWord<GElem>;

/// `G[Γ₀, Γ₁]` acting on its Bass-Serre tree.
///
/// A vertex at depth `d` is the coset `γ₀^{x₀} γ₁^{x₁} ⋯ G_{d mod 2}` of its
/// path `x`; the root is `G₀`. The first step ranges over all of `I₀`
/// (`x₀ = ι₀` gives `G₁`), later steps over `I'` of their side.
#[derive(Clone, Debug)]
pub struct Amalgam {
    params: AmalgamParams,
}

impl Amalgam {
    pub fn new(params: AmalgamParams) -> Self {
        Amalgam { params }
    }

    pub fn params(&self) -> &AmalgamParams {
        &self.params
    }

    pub fn from_tokens(&self, tokens: &[Token]) -> Result<AmalgamElem> {
        self.params.reduce(tokens)
    }

    pub fn from_g(&self, g: &GElem) -> Result<AmalgamElem> {
        AmalgamWord::from_letters(&self.params, std::slice::from_ref(g))
    }

    /// The vertex written `v(ι_j, i_j, …)`: the path itself from `G₀` when
    /// `j = 0`, and behind the first step `ι₀` when `j = 1`.
    pub fn v_path(&self, j: u8, rest: &[u32]) -> Vertex {
        let mut v = Vec::with_capacity(rest.len() + 1);
        if j == 1 {
            v.push(self.params.basepoint(0));
        }
        v.extend_from_slice(rest);
        v
    }
}

impl TreeGroup for Amalgam {
    type Elem = AmalgamElem;

    fn identity(&self) -> AmalgamElem {
        AmalgamWord::identity(&self.params)
    }

    fn mul(&self, a: &AmalgamElem, b: &AmalgamElem) -> Result<AmalgamElem> {
        a.mul(&self.params, b)
    }

    fn inv(&self, a: &AmalgamElem) -> Result<AmalgamElem> {
        a.inv(&self.params)
    }

    fn is_identity(&self, a: &AmalgamElem) -> bool {
        a.is_identity(&self.params)
    }

    fn syllable_length(&self, a: &AmalgamElem) -> usize {
        a.syllable_length()
    }

    fn classify(&self, a: &AmalgamElem) -> Result<Classification> {
        Ok(match a.classify(&self.params)? {
            AmalgamClass::Elliptic {
                conjugator,
                fixed_side,
            } => Classification::Elliptic {
                witness: self.coset_vertex(&conjugator, fixed_side as usize),
            },
            AmalgamClass::Hyperbolic { .. } => Classification::Hyperbolic,
        })
    }

    fn child_steps(&self, v: &[u32]) -> Vec<u32> {
        if v.is_empty() {
            (0..self.params.degree(0) as u32).collect()
        } else {
            self.params.points_prime((v.len() % 2) as u8)
        }
    }

    fn descend(&self, w: &AmalgamElem, depth: usize, step: u32) -> Result<AmalgamElem> {
        let side = (depth % 2) as u8;
        if step == self.params.basepoint(side) {
            return Ok(w.clone());
        }
        w.mul_letter(&self.params, &self.params.rep(side, step))
    }

    fn coset_vertex(&self, w: &AmalgamElem, depth: usize) -> Vertex {
        let side = (depth % 2) as u8;
        let mut syllables = w.syllables.as_slice();
        if let Some((&(s, _), rest)) = syllables.split_last() {
            if s == side {
                syllables = rest;
            }
        }
        let mut v = Vec::with_capacity(syllables.len() + 1);
        if let Some(&(1, _)) = syllables.first() {
            v.push(self.params.basepoint(0));
        } else if syllables.is_empty() && side == 1 {
            v.push(self.params.basepoint(0));
        }
        v.extend(syllables.iter().map(|&(_, i)| i));
        v
    }

    fn render(&self, a: &AmalgamElem) -> String {
        self.params.render(a)
    }

    fn render_vertex(&self, v: &[u32]) -> String {
        let mut parts = Vec::new();
        for (d, &x) in v.iter().enumerate() {
            let side = (d % 2) as u8;
            if x != self.params.basepoint(side) {
                parts.push(
                    self.params
                        .g_token(side, self.params.transversal_rep(side, x))
                        .to_string(),
                );
            }
        }
        parts.push(format!("<G{}>", v.len() % 2));
        parts.join(" ")
    }

    fn parse(&self, text: &str) -> Result<AmalgamElem> {
        self.from_tokens(&parse_word(text)?)
    }
}
