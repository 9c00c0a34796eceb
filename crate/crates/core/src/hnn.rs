//! The HNN family `Λ[Σ₋₁, Σ₁] = HNN(G, H, θ)`.
//!
//! `Γ = Σ₋₁ · Σ₁` acts on the disjoint union `I₋₁ ⊔ I₁`, stored as one
//! domain with `I₋₁` first. A step `(i, +1)` has `i ∈ I₋₁` and a step
//! `(i, −1)` has `i ∈ I₁`, so steps and points of the union are the same
//! thing. Elements of `G` are portraits whose nodes carry labels in `Γ`.
//! A node entered by a step of sign `ε` has its label in `Γ_ε`, the
//! stabilizer of `p_ε` (the point `ι_ε`), and it has no child at `p_ε`.
//!
//! Conjugation by `τ^ε` re-roots a portrait from `p_ε` to `p_{−ε}`.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permgroup::{AbelQuotient, Perm, PermGroup};
use crate::portrait::{Portrait, PortraitJson};
use crate::tree::{Classification, TreeGroup, Vertex};
use crate::words::{
    parse_word, print_word, Generator, HnnBase, HnnClass, HnnLetter, HnnWord, Token,
};

/// Longest conjugator accepted by [`HnnParams::k_eps_oracle`].
pub const MAX_ORACLE_SYLLABLES: usize = 4;

/// An element of the base group `G`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HnnNode {
    portrait: Portrait,
}

impl HnnNode {
    pub fn portrait(&self) -> &Portrait {
        &self.portrait
    }

    pub fn is_identity(&self) -> bool {
        self.portrait.is_identity()
    }

    pub fn to_json(&self) -> PortraitJson {
        self.portrait.to_json()
    }
}

/// An element of `(Γ/[Γ,Γ]) ≀ ℤ`: finitely many nonzero labels and a shift.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WreathZElem {
    pub shift: i64,
    pub labels: BTreeMap<i64, usize>,
}

impl WreathZElem {
    pub fn is_identity(&self) -> bool {
        self.shift == 0 && self.labels.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HnnCstarReport {
    pub unique_trace: bool,
    pub cstar_simple: bool,
    pub quasi_kernel_amenable: bool,
}

/// Criterion logic for the family, given whether `Σ₋₁` and `Σ₁` are amenable.
pub fn cstar_report_hnn(sigma_amenable: [bool; 2]) -> HnnCstarReport {
    HnnCstarReport {
        unique_trace: true,
        cstar_simple: !sigma_amenable[0] || !sigma_amenable[1],
        quasi_kernel_amenable: sigma_amenable[0] && sigma_amenable[1],
    }
}

/// One relation instance: `τ^conj · lhs · τ^{−conj} = rhs` in `G`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnnRelation {
    pub relation: &'static str,
    pub conj: i8,
    pub lhs: Vec<Token>,
    pub rhs: Vec<Token>,
}

impl HnnRelation {
    /// The left side with the conjugating `τ` letters written out.
    pub fn lhs_word(&self) -> Vec<Token> {
        if self.conj == 0 {
            return self.lhs.clone();
        }
        let mut w = vec![Token::new(Generator::T, self.conj as i64)];
        w.extend(self.lhs.iter().cloned());
        w.push(Token::new(Generator::T, -self.conj as i64));
        w
    }
}

fn slot(eps: i8) -> usize {
    if eps < 0 {
        0
    } else {
        1
    }
}

#[derive(Clone, Debug)]
pub struct HnnParams {
    sigma: [PermGroup; 2],
    gamma: PermGroup,
    gamma_eps: [PermGroup; 2],
    transversal: [Vec<Perm>; 2],
    abel: AbelQuotient,
}

impl HnnParams {
    /// Builds the family from `Σ₋₁` and `Σ₁`.
    pub fn new(sigma_m: PermGroup, sigma_p: PermGroup) -> Result<Self> {
        for (name, g) in [("Σ₋₁", &sigma_m), ("Σ₁", &sigma_p)] {
            if g.degree() < 2 {
                return Err(Error::Config(format!(
                    "{name} acts on fewer than two points"
                )));
            }
            if !g.is_transitive() {
                return Err(Error::Config(format!(
                    "{name} ({}) is not transitive",
                    g.name
                )));
            }
        }
        let (nm, np) = (sigma_m.degree(), sigma_p.degree());
        let total = nm + np;
        let gens: Vec<Perm> = sigma_m
            .generators()
            .iter()
            .map(|g| g.embed(0, total))
            .chain(sigma_p.generators().iter().map(|g| g.embed(nm, total)))
            .collect();
        let mut gamma = PermGroup::closure(&gens, total)?;
        gamma.name = format!("{}·{}", sigma_m.name, sigma_p.name);
        let pm = sigma_m.basepoint();
        let pp = nm as u32 + sigma_p.basepoint();
        let gamma_eps = [gamma.stabilizer(pm), gamma.stabilizer(pp)];
        let transversal = [
            sigma_m
                .transversal()?
                .iter()
                .map(|t| t.embed(0, total))
                .collect(),
            sigma_p
                .transversal()?
                .iter()
                .map(|t| t.embed(nm, total))
                .collect(),
        ];
        let abel = gamma.abelianization();
        Ok(HnnParams {
            sigma: [sigma_m, sigma_p],
            gamma,
            gamma_eps,
            transversal,
            abel,
        })
    }

    pub fn symmetric(nm: usize, np: usize) -> Result<Self> {
        Self::new(PermGroup::symmetric(nm), PermGroup::symmetric(np))
    }

    pub fn sigma(&self, eps: i8) -> &PermGroup {
        &self.sigma[slot(eps)]
    }

    pub fn gamma(&self) -> &PermGroup {
        &self.gamma
    }

    /// `Γ_ε`, the stabilizer of `p_ε` in `Γ`.
    pub fn gamma_eps(&self, eps: i8) -> &PermGroup {
        &self.gamma_eps[slot(eps)]
    }

    pub fn abelianization(&self) -> &AbelQuotient {
        &self.abel
    }

    pub fn degree(&self) -> usize {
        self.gamma.degree()
    }

    /// `#I_ε`.
    pub fn index_count(&self, eps: i8) -> u32 {
        self.sigma(eps).degree() as u32
    }

    /// `ι_ε` as an index of `I_ε`.
    pub fn iota(&self, eps: i8) -> u32 {
        self.sigma(eps).basepoint()
    }

    fn offset(&self, eps: i8) -> u32 {
        if eps < 0 {
            0
        } else {
            self.index_count(-1)
        }
    }

    /// The union point of the step `(i, eps)`, where `i ∈ I_{−eps}`.
    pub fn step_point(&self, i: u32, eps: i8) -> u32 {
        self.offset(-eps) + i
    }

    pub fn point_step(&self, u: u32) -> (u32, i8) {
        let nm = self.index_count(-1);
        if u < nm {
            (u, 1)
        } else {
            (u - nm, -1)
        }
    }

    /// `p_ε`, the union point of `ι_ε`; it is the step `(ι_ε, −ε)`.
    pub fn p(&self, eps: i8) -> u32 {
        self.offset(eps) + self.iota(eps)
    }

    /// Union points a node entered with sign `eps` may have children at;
    /// `None` for the root.
    pub fn child_points(&self, context: Option<i8>) -> Vec<u32> {
        (0..self.degree() as u32)
            .filter(|&u| context.is_none_or(|e| u != self.p(e)))
            .collect()
    }

    fn node(&self, portrait: Portrait) -> HnnNode {
        HnnNode { portrait }
    }

    pub fn identity_node(&self) -> HnnNode {
        self.node(Portrait::identity(self.degree()))
    }

    pub fn parse_perm(&self, text: &str) -> Result<Perm> {
        Perm::parse(text, self.degree())
    }

    /// `h(σ)` for `σ ∈ Γ`.
    pub fn gen_top(&self, sigma: &Perm) -> Result<HnnNode> {
        if !self.gamma.contains(sigma) {
            return Err(Error::InvalidGenerator(format!("{sigma} is not in Γ")));
        }
        Ok(self.node(Portrait::top(sigma.clone())))
    }

    /// Union points of a step sequence, checking the step constraint.
    pub fn path_points(&self, steps: &[(u32, i8)]) -> Result<Vec<u32>> {
        let mut prev: Option<i8> = None;
        let mut out = Vec::with_capacity(steps.len());
        for (t, &(i, eps)) in steps.iter().enumerate() {
            if eps != 1 && eps != -1 {
                return Err(Error::InvalidPath(format!(
                    "sign {eps} at step {t} is not ±1"
                )));
            }
            if i >= self.index_count(-eps) {
                return Err(Error::InvalidPath(format!(
                    "index {i} at step {t} is outside I_{}",
                    -eps
                )));
            }
            if prev == Some(-eps) && i == self.iota(-eps) {
                return Err(Error::InvalidPath(format!(
                    "step {t} turns back through ι_{} after a step of sign {}",
                    -eps, -eps
                )));
            }
            out.push(self.step_point(i, eps));
            prev = Some(eps);
        }
        Ok(out)
    }

    /// `h(i₁, ε₁, …, iₙ, εₙ; σ)` with `σ ∈ Γ_{εₙ}`.
    pub fn gen_path(&self, steps: &[(u32, i8)], sigma: &Perm) -> Result<HnnNode> {
        let Some(&(_, last)) = steps.last() else {
            return Err(Error::InvalidPath(
                "path generators need at least one step".into(),
            ));
        };
        let points = self.path_points(steps)?;
        if !self.gamma_eps(last).contains(sigma) {
            return Err(Error::InvalidGenerator(format!(
                "{sigma} is not in Γ_{last}"
            )));
        }
        let degree = self.degree();
        Ok(self.node(Portrait::nested(&points, sigma.clone(), |_| degree)))
    }

    pub fn mul(&self, a: &HnnNode, b: &HnnNode) -> HnnNode {
        self.node(a.portrait.mul(&b.portrait))
    }

    pub fn inv(&self, a: &HnnNode) -> HnnNode {
        self.node(a.portrait.inverse())
    }

    pub fn is_in_h_eps(&self, g: &HnnNode, eps: i8) -> bool {
        g.portrait.label().fixes(self.p(eps))
    }

    /// `λ_ε^i = h(μ_ε^i)`, the transversal element moving `ι_ε` to `i`.
    pub fn rep_node(&self, eps: i8, i: u32) -> HnnNode {
        self.node(Portrait::top(
            self.transversal[slot(eps)][i as usize].clone(),
        ))
    }

    /// `g = λ_ε^i · h` with `h ∈ H_ε`.
    pub fn coset_decompose_eps(&self, g: &HnnNode, eps: i8) -> (Option<u32>, HnnNode) {
        let i = g.portrait.label().apply(self.p(eps)) - self.offset(eps);
        if i == self.iota(eps) {
            return (None, g.clone());
        }
        let rep = self.inv(&self.rep_node(eps, i));
        (Some(i), self.mul(&rep, g))
    }

    /// `τ^ε g τ^{−ε}` for `g ∈ H_ε`.
    pub fn conjugate_by_tau(&self, g: &HnnNode, eps: i8) -> Result<HnnNode> {
        if !self.is_in_h_eps(g, eps) {
            return Err(Error::BrittonPinch(format!(
                "{:?} is not in H_{eps}",
                g.portrait
            )));
        }
        Ok(self.node(g.portrait.reroot(self.p(eps), self.p(-eps), self.degree())))
    }

    /// Membership in `K_ε`: the portrait lives entirely below the step
    /// `(ι_{−ε}, ε)`, the branch through `τ^ε G`.
    pub fn k_eps_member(&self, g: &HnnNode, eps: i8) -> bool {
        let branch = self.p(-eps);
        g.portrait.label().is_identity() && g.portrait.children().iter().all(|(k, _)| *k == branch)
    }

    /// Membership in the pointwise stabilizer of `Θ̄_ε`, the half-tree
    /// through `τ^ε G`: the root fixes `p_{−ε}` and has no child there.
    pub fn lambda_bar_member(&self, g: &HnnNode, eps: i8) -> bool {
        let branch = self.p(-eps);
        g.portrait.label().fixes(branch) && g.portrait.child(branch).is_none()
    }

    /// Checks every label and slot of a portrait.
    pub fn validate(&self, p: &Portrait) -> Result<()> {
        if !self.gamma.contains(p.label()) {
            return Err(Error::InvalidGenerator(format!(
                "root label {} is not in Γ",
                p.label()
            )));
        }
        for (u, c) in p.children() {
            if *u as usize >= self.degree() {
                return Err(Error::InvalidPath(format!("slot {u} outside the union")));
            }
            self.validate_below(self.point_step(*u).1, c)?;
        }
        Ok(())
    }

    fn validate_below(&self, context: i8, p: &Portrait) -> Result<()> {
        if !self.gamma_eps(context).contains(p.label()) {
            return Err(Error::InvalidGenerator(format!(
                "label {} is not in Γ_{context}",
                p.label()
            )));
        }
        for (u, c) in p.children() {
            if *u as usize >= self.degree() || *u == self.p(context) {
                return Err(Error::InvalidPath(format!(
                    "slot {u} is not allowed below a step of sign {context}"
                )));
            }
            self.validate_below(self.point_step(*u).1, c)?;
        }
        Ok(())
    }

    pub fn node_from_json(&self, json: &PortraitJson) -> Result<HnnNode> {
        let degree = self.degree();
        let p = Portrait::from_json(json, &|_| degree)?;
        self.validate(&p)?;
        Ok(self.node(p))
    }

    /// `Σ₋₁` and `Σ₁` are finite, hence amenable.
    pub fn sigma_amenability(&self) -> [bool; 2] {
        [true, true]
    }

    pub fn cstar_report(&self) -> HnnCstarReport {
        cstar_report_hnn(self.sigma_amenability())
    }
}

impl HnnParams {
    pub fn top_token(&self, sigma: &Perm) -> Token {
        Token::new(
            Generator::Top {
                perm: sigma.to_string(),
            },
            1,
        )
    }

    pub fn path_token(&self, steps: &[(u32, i8)], sigma: &Perm) -> Token {
        if steps.is_empty() {
            return self.top_token(sigma);
        }
        Token::new(
            Generator::Path {
                steps: steps.to_vec(),
                perm: sigma.to_string(),
            },
            1,
        )
    }

    pub fn tau_token(&self, power: i64) -> Token {
        Token::new(Generator::T, power)
    }

    /// The letters a token stands for: one base element or `|k|` copies of `τ^{±1}`.
    pub fn token_letters(&self, token: &Token) -> Result<Vec<HnnLetter<HnnNode>>> {
        Ok(match &token.gen {
            Generator::Top { perm } => {
                vec![HnnLetter::Base(
                    self.gen_top(&self.parse_perm(perm)?.pow(token.power))?,
                )]
            }
            Generator::Path { steps, perm } => vec![HnnLetter::Base(
                self.gen_path(steps, &self.parse_perm(perm)?.pow(token.power))?,
            )],
            Generator::T => {
                let e = if token.power < 0 { -1 } else { 1 };
                vec![HnnLetter::Tau(e); token.power.unsigned_abs() as usize]
            }
            other => {
                return Err(Error::InvalidGenerator(format!(
                    "{other} is not an HNN generator"
                )))
            }
        })
    }

    /// Multiplies `τ`-free tokens as portraits.
    pub fn eval_base(&self, tokens: &[Token]) -> Result<HnnNode> {
        tokens.iter().try_fold(self.identity_node(), |acc, t| {
            match self.token_letters(t)?.as_slice() {
                [HnnLetter::Base(x)] => Ok(self.mul(&acc, x)),
                [] => Ok(acc),
                _ => Err(Error::InvalidGenerator(format!(
                    "{t} is not in the base group"
                ))),
            }
        })
    }

    pub fn reduce(&self, tokens: &[Token]) -> Result<HnnWord<HnnNode>> {
        let mut w = HnnWord::identity(self);
        for t in tokens {
            for x in self.token_letters(t)? {
                w = w.mul_letter(self, &x)?;
            }
        }
        Ok(w)
    }

    /// Writes a portrait as a product of generators, deepest nodes first.
    pub fn expand(&self, g: &HnnNode) -> Vec<Token> {
        let mut nodes = g.portrait.nodes();
        nodes.reverse();
        nodes
            .into_iter()
            .map(|(path, label)| {
                let steps: Vec<(u32, i8)> = path.iter().map(|&u| self.point_step(u)).collect();
                self.path_token(&steps, label)
            })
            .collect()
    }

    pub fn expand_word(&self, w: &HnnWord<HnnNode>) -> Vec<Token> {
        let mut out: Vec<Token> = Vec::new();
        for x in w.letters(self) {
            match x {
                HnnLetter::Base(g) => out.extend(self.expand(&g)),
                HnnLetter::Tau(e) => match out.last_mut() {
                    Some(t) if t.gen == Generator::T && t.power.signum() == e as i64 => {
                        t.power += e as i64
                    }
                    _ => out.push(self.tau_token(e as i64)),
                },
            }
        }
        out
    }

    pub fn render(&self, w: &HnnWord<HnnNode>) -> String {
        print_word(&self.expand_word(w))
    }

    /// Product in `(Γ/[Γ,Γ]) ≀ ℤ`.
    pub fn eta_op(&self, a: &WreathZElem, b: &WreathZElem) -> WreathZElem {
        let mut labels = a.labels.clone();
        for (&k, &c) in &b.labels {
            let slot = labels.entry(k + a.shift).or_insert(0);
            *slot = self.abel.op(*slot, c);
            if *slot == 0 {
                labels.remove(&(k + a.shift));
            }
        }
        WreathZElem {
            shift: a.shift + b.shift,
            labels,
        }
    }

    fn eta_label(&self, position: i64, perm: &str, power: i64) -> Result<WreathZElem> {
        let sigma = self.parse_perm(perm)?;
        let class = self
            .abel
            .try_project(&sigma)
            .ok_or_else(|| Error::InvalidGenerator(format!("{perm} is not in Γ")))?;
        let class = self.abel.pow(class, power);
        let labels = if class == 0 {
            BTreeMap::new()
        } else {
            BTreeMap::from([(position, class)])
        };
        Ok(WreathZElem { shift: 0, labels })
    }

    /// `η` evaluated generator by generator.
    pub fn eta(&self, tokens: &[Token]) -> Result<WreathZElem> {
        tokens.iter().try_fold(WreathZElem::default(), |acc, t| {
            let value = match &t.gen {
                Generator::Top { perm } => self.eta_label(0, perm, t.power)?,
                Generator::Path { steps, perm } => {
                    self.path_points(steps)?;
                    let position = steps.iter().map(|&(_, e)| e as i64).sum();
                    self.eta_label(position, perm, t.power)?
                }
                Generator::T => WreathZElem {
                    shift: t.power,
                    labels: BTreeMap::new(),
                },
                other => {
                    return Err(Error::InvalidGenerator(format!(
                        "{other} is not an HNN generator"
                    )))
                }
            };
            Ok(self.eta_op(&acc, &value))
        })
    }

    /// Membership in the kernel `Ξ` of `η`.
    pub fn xi_member(&self, tokens: &[Token]) -> Result<bool> {
        Ok(self.eta(tokens)?.is_identity())
    }

    /// Normal-form prefixes `s₁τ^{ε₁}⋯sₙτ^{εₙ}` with `n ≤ max_len`, as step paths.
    pub fn prefixes(&self, max_len: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new()];
        let mut frontier = vec![Vec::new()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for v in &frontier {
                let context = v.last().map(|&u: &u32| self.point_step(u).1);
                for u in self.child_points(context) {
                    let mut w = v.clone();
                    w.push(u);
                    next.push(w);
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }

    /// The word `s₁τ^{ε₁}⋯sₙτ^{εₙ}` of a step path.
    pub fn prefix_word(&self, path: &[u32]) -> Result<HnnWord<HnnNode>> {
        let mut letters = Vec::new();
        for &u in path {
            let (i, e) = self.point_step(u);
            if i != self.iota(-e) {
                letters.push(HnnLetter::Base(self.rep_node(-e, i)));
            }
            letters.push(HnnLetter::Tau(e));
        }
        HnnWord::from_letters(self, &letters)
    }

    /// Whether `r⁻¹ g r ∈ H` for every `r ∉ T_ε†` of at most `max_len`
    /// syllables. Such `r` are normal-form prefixes that do not open with
    /// `τ^ε`, followed by a transversal element of `H = H₋₁`.
    pub fn k_eps_oracle(&self, g: &HnnNode, eps: i8, max_len: usize) -> Result<bool> {
        if max_len > MAX_ORACLE_SYLLABLES {
            return Err(Error::EnumerationLimit {
                what: "conjugator syllable length".into(),
                limit: MAX_ORACLE_SYLLABLES,
            });
        }
        let forbidden = self.p(-eps);
        let g = HnnWord::from_base(g.clone());
        for prefix in self.prefixes(max_len) {
            if prefix.first() == Some(&forbidden) {
                continue;
            }
            let word = self.prefix_word(&prefix)?;
            for i in 0..self.index_count(-1) {
                let r = word.mul_letter(self, &HnnLetter::Base(self.rep_node(-1, i)))?;
                let conj = r.inv(self)?.mul(self, &g)?.mul(self, &r)?;
                if !conj.syllables.is_empty() || !self.is_in_h_eps(&conj.tail, -1) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Cap on [`HnnParams::enumerate_nodes`].
pub const MAX_ENUMERATED_NODES: usize = 1 << 21;

impl HnnParams {
    /// Every admissible step path of length `1..=max_len`.
    pub fn paths_upto(&self, max_len: usize) -> Vec<Vec<(u32, i8)>> {
        self.prefixes(max_len)
            .into_iter()
            .skip(1)
            .map(|v| v.into_iter().map(|u| self.point_step(u)).collect())
            .collect()
    }

    fn map_step(&self, sigma: &Perm, (i, e): (u32, i8)) -> (u32, i8) {
        self.point_step(sigma.apply(self.step_point(i, e)))
    }

    /// R1, R5 and R7: the instances that involve no path.
    pub fn global_relation_instances(&self) -> Vec<HnnRelation> {
        let mut out = Vec::new();
        let inst = |relation, conj, lhs, rhs| HnnRelation {
            relation,
            conj,
            lhs,
            rhs,
        };
        let nm = self.index_count(-1) as usize;
        let total = self.degree();
        let embedded = |eps: i8| -> Vec<Perm> {
            let offset = if eps < 0 { 0 } else { nm };
            self.sigma(eps)
                .elements()
                .iter()
                .map(|s| s.embed(offset, total))
                .collect()
        };
        for a in embedded(-1) {
            for b in embedded(1) {
                let (a, b) = (self.top_token(&a), self.top_token(&b));
                out.push(inst("R1", 0, vec![a.clone(), b.clone()], vec![b, a]));
            }
        }
        for s in self.gamma.elements() {
            for t in self.gamma.elements() {
                let lhs = vec![self.top_token(s), self.top_token(t)];
                out.push(inst("R5", 0, lhs, vec![self.top_token(&(s * t))]));
            }
        }
        for eps in [-1i8, 1] {
            for s in self.gamma_eps(eps).elements() {
                let rhs = self.path_token(&[(self.iota(-eps), eps)], s);
                out.push(inst("R7", eps, vec![self.top_token(s)], vec![rhs]));
            }
        }
        out
    }

    /// R2, R3, R4, R6, R8 and R9 for one path, which plays the longest path
    /// of each relation. `all_paths` supplies the unrelated paths of R2.
    pub fn path_relation_instances(
        &self,
        path: &[(u32, i8)],
        all_paths: &[Vec<(u32, i8)>],
    ) -> Vec<HnnRelation> {
        let mut out = Vec::new();
        let inst = |relation, conj, lhs, rhs| HnnRelation {
            relation,
            conj,
            lhs,
            rhs,
        };
        let n = path.len();
        let last = path[n - 1].1;
        let stab_n = self.gamma_eps(last).elements();
        for other in all_paths
            .iter()
            .filter(|q| q.len() < n && q[..] != path[..q.len()])
        {
            for s in self.gamma_eps(other[other.len() - 1].1).elements() {
                for t in stab_n {
                    let a = self.path_token(other, s);
                    let b = self.path_token(path, t);
                    out.push(inst("R2", 0, vec![a.clone(), b.clone()], vec![b, a]));
                }
            }
        }
        for m in 1..n {
            let prefix = &path[..m];
            for s in self.gamma_eps(prefix[m - 1].1).elements() {
                let mut moved = path.to_vec();
                moved[m] = self.map_step(s, path[m]);
                for t in stab_n {
                    let a = self.path_token(prefix, s);
                    let lhs = vec![a.clone(), self.path_token(path, t), a.inverse()];
                    out.push(inst("R3", 0, lhs, vec![self.path_token(&moved, t)]));
                }
            }
        }
        for s in stab_n {
            for t in stab_n {
                let lhs = vec![self.path_token(path, s), self.path_token(path, t)];
                out.push(inst("R4", 0, lhs, vec![self.path_token(path, &(s * t))]));
            }
        }
        for g in self.gamma.elements() {
            let mut moved = path.to_vec();
            moved[0] = self.map_step(g, path[0]);
            for t in stab_n {
                let a = self.top_token(g);
                let lhs = vec![a.clone(), self.path_token(path, t), a.inverse()];
                out.push(inst("R6", 0, lhs, vec![self.path_token(&moved, t)]));
            }
        }
        let eps = path[0].1;
        for t in stab_n {
            let lhs = vec![self.path_token(path, t)];
            let mut longer = vec![(self.iota(-eps), eps)];
            longer.extend_from_slice(path);
            out.push(inst(
                "R8",
                eps,
                lhs.clone(),
                vec![self.path_token(&longer, t)],
            ));
            let rhs = if path[0].0 == self.iota(-eps) {
                self.path_token(&path[1..], t)
            } else {
                let mut longer = vec![(self.iota(eps), -eps)];
                longer.extend_from_slice(path);
                self.path_token(&longer, t)
            };
            out.push(inst("R9", -eps, lhs, vec![rhs]));
        }
        out
    }

    /// Every instance of R1–R9 with longest path of length at most `max_path`.
    pub fn relation_instances(&self, max_path: usize) -> Vec<HnnRelation> {
        let paths = self.paths_upto(max_path);
        let mut out = self.global_relation_instances();
        for p in &paths {
            out.extend(self.path_relation_instances(p, &paths));
        }
        out
    }

    /// Checks one instance twice: by portrait arithmetic with an explicit
    /// re-rooting, and by reducing both sides as words in `Λ`.
    pub fn relation_holds(&self, r: &HnnRelation) -> Result<bool> {
        let lhs = self.eval_base(&r.lhs)?;
        let lhs = if r.conj == 0 {
            lhs
        } else {
            self.conjugate_by_tau(&lhs, r.conj)?
        };
        let portraits = lhs == self.eval_base(&r.rhs)?;
        let words = self.reduce(&r.lhs_word())? == self.reduce(&r.rhs)?;
        Ok(portraits && words)
    }

    /// Runs the whole suite in parallel, one path at a time, returning the
    /// number of instances checked and the failures.
    pub fn check_relations(&self, max_path: usize) -> Result<(usize, Vec<HnnRelation>)> {
        use rayon::prelude::*;
        let paths = self.paths_upto(max_path);
        let check = |batch: Vec<HnnRelation>| -> Result<(usize, Vec<HnnRelation>)> {
            let mut failed = Vec::new();
            let n = batch.len();
            for r in batch {
                if !self.relation_holds(&r)? {
                    failed.push(r);
                }
            }
            Ok((n, failed))
        };
        let (mut count, mut failed) = check(self.global_relation_instances())?;
        let parts: Vec<(usize, Vec<HnnRelation>)> = paths
            .par_iter()
            .map(|p| check(self.path_relation_instances(p, &paths)))
            .collect::<Result<_>>()?;
        for (n, f) in parts {
            count += n;
            failed.extend(f);
        }
        Ok((count, failed))
    }

    pub fn random_perm_in(&self, rng: &mut impl Rng, group: &PermGroup) -> Perm {
        group
            .elements()
            .choose(rng)
            .expect("groups are nonempty")
            .clone()
    }

    /// A uniformly random admissible continuation of `len` steps.
    pub fn random_steps(
        &self,
        rng: &mut impl Rng,
        len: usize,
        context: Option<i8>,
    ) -> Vec<(u32, i8)> {
        let mut context = context;
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let u = *self
                .child_points(context)
                .choose(rng)
                .expect("at least one child");
            let step = self.point_step(u);
            context = Some(step.1);
            out.push(step);
        }
        out
    }

    pub fn random_token(&self, rng: &mut impl Rng, max_path: usize) -> Token {
        let power = *[-1i64, 1, 2].choose(rng).expect("nonempty");
        match rng.gen_range(0..3) {
            0 => self.tau_token(if rng.gen_bool(0.5) { 1 } else { -1 }),
            1 => Token {
                power,
                ..self.top_token(&self.random_perm_in(rng, &self.gamma))
            },
            _ => {
                let steps = {
                    let len = rng.gen_range(1..=max_path.max(1));
                    self.random_steps(rng, len, None)
                };
                let sigma = self.random_perm_in(rng, self.gamma_eps(steps[steps.len() - 1].1));
                Token {
                    power,
                    ..self.path_token(&steps, &sigma)
                }
            }
        }
    }

    pub fn random_word(&self, rng: &mut impl Rng, max_len: usize, max_path: usize) -> Vec<Token> {
        (0..rng.gen_range(0..=max_len))
            .map(|_| self.random_token(rng, max_path))
            .collect()
    }

    /// A random portrait of depth at most `depth`; each child is present
    /// with probability one half.
    pub fn random_node(&self, rng: &mut impl Rng, depth: usize) -> HnnNode {
        self.node(self.random_below(rng, depth, None))
    }

    fn random_below(&self, rng: &mut impl Rng, depth: usize, context: Option<i8>) -> Portrait {
        let group = context.map_or(&self.gamma, |e| self.gamma_eps(e));
        let label = self.random_perm_in(rng, group);
        let mut children = Vec::new();
        if depth > 0 {
            for u in self.child_points(context) {
                if rng.gen_bool(0.5) {
                    let c = self.random_below(rng, depth - 1, Some(self.point_step(u).1));
                    children.push((u, c));
                }
            }
        }
        Portrait::from_parts(label, children)
    }

    /// Every portrait of depth at most `depth`.
    pub fn enumerate_nodes(&self, depth: usize) -> Result<Vec<HnnNode>> {
        Ok(self
            .enumerate_below(depth, None)?
            .into_iter()
            .map(|p| self.node(p))
            .collect())
    }

    fn enumerate_below(&self, depth: usize, context: Option<i8>) -> Result<Vec<Portrait>> {
        let group = context.map_or(&self.gamma, |e| self.gamma_eps(e));
        let mut partial: Vec<Vec<(u32, Portrait)>> = vec![Vec::new()];
        if depth > 0 {
            for u in self.child_points(context) {
                let below = self.enumerate_below(depth - 1, Some(self.point_step(u).1))?;
                let options = below.len() + 1;
                if partial
                    .len()
                    .saturating_mul(options)
                    .saturating_mul(group.order())
                    > MAX_ENUMERATED_NODES
                {
                    return Err(Error::EnumerationLimit {
                        what: "portraits".into(),
                        limit: MAX_ENUMERATED_NODES,
                    });
                }
                let mut next = Vec::with_capacity(partial.len() * options);
                for children in &partial {
                    next.push(children.clone());
                    for c in below.iter().filter(|c| !c.is_identity()) {
                        let mut grown = children.clone();
                        grown.push((u, c.clone()));
                        next.push(grown);
                    }
                }
                partial = next;
            }
        }
        let mut out = Vec::with_capacity(partial.len() * group.order());
        for children in partial {
            for s in group.elements() {
                out.push(Portrait::from_parts(s.clone(), children.iter().cloned()));
            }
        }
        Ok(out)
    }
}

impl HnnParams {
    /// Random indices for a fixed sign sequence, continuing from `context`.
    pub fn random_indices(
        &self,
        rng: &mut impl Rng,
        signs: &[i8],
        context: Option<i8>,
    ) -> Vec<(u32, i8)> {
        let mut context = context;
        signs
            .iter()
            .map(|&e| {
                let points: Vec<u32> = self
                    .child_points(context)
                    .into_iter()
                    .filter(|&u| self.point_step(u).1 == e)
                    .collect();
                context = Some(e);
                self.point_step(
                    *points
                        .choose(rng)
                        .expect("every sign has an admissible index"),
                )
            })
            .collect()
    }

    fn random_sign(rng: &mut impl Rng) -> i8 {
        if rng.gen_bool(0.5) {
            1
        } else {
            -1
        }
    }

    fn concat(parts: &[&[(u32, i8)]]) -> Vec<(u32, i8)> {
        parts.iter().flat_map(|p| p.iter().copied()).collect()
    }

    /// One random member of each of the seven generating sets of `Ξ`,
    /// tagged with the set's number.
    pub fn sample_xi_generators(
        &self,
        rng: &mut impl Rng,
        max_path: usize,
    ) -> Vec<(u8, Vec<Token>)> {
        let max_path = max_path.max(2);
        let commutators: Vec<Perm> = self.gamma.commutator_subgroup().elements().to_vec();
        let mut out = Vec::new();

        let first = {
            let len = rng.gen_range(1..=max_path);
            self.random_steps(rng, len, None)
        };
        let signs: Vec<i8> = first.iter().map(|s| s.1).collect();
        let second = self.random_indices(rng, &signs, None);
        let s = self.random_perm_in(rng, self.gamma_eps(signs[signs.len() - 1]));
        out.push((
            1,
            vec![
                self.path_token(&first, &s),
                self.path_token(&second, &s.inverse()),
            ],
        ));

        let eps = Self::random_sign(rng);
        let head = self.random_indices(rng, &[eps, -eps, eps], None);
        let tail = {
            let len = rng.gen_range(1..=max_path - 1);
            self.random_steps(rng, len, Some(eps))
        };
        let tail_signs: Vec<i8> = tail.iter().map(|s| s.1).collect();
        let mut other = self.random_indices(rng, &[eps], None);
        other.extend(self.random_indices(rng, &tail_signs[..1], Some(eps)));
        other.extend_from_slice(&tail[1..]);
        let s = self.random_perm_in(rng, self.gamma_eps(tail_signs[tail_signs.len() - 1]));
        out.push((
            2,
            vec![
                self.path_token(&Self::concat(&[&head, &tail]), &s),
                self.path_token(&other, &s.inverse()),
            ],
        ));

        let eps = Self::random_sign(rng);
        let s = self.random_perm_in(rng, self.gamma_eps(eps));
        let path = self.random_indices(rng, &[-eps, eps], None);
        out.push((
            3,
            vec![self.top_token(&s), self.path_token(&path, &s.inverse())],
        ));

        let eps = Self::random_sign(rng);
        let prefix = {
            let len = rng.gen_range(0..max_path);
            self.random_steps(rng, len, None)
        };
        let context = prefix.last().map(|s| s.1);
        let mid = self.random_indices(rng, &[eps, -eps], context);
        let swapped = self.random_indices(rng, &[-eps, eps], context);
        let suffix: Vec<(u32, i8)> = if rng.gen_bool(0.5) {
            let open: Vec<u32> = (0..self.degree() as u32)
                .filter(|&u| u != self.p(eps) && u != self.p(-eps))
                .collect();
            match open.choose(rng) {
                Some(&u) => {
                    let step = self.point_step(u);
                    let mut s = vec![step];
                    s.extend({
                        let len = rng.gen_range(0..max_path);
                        self.random_steps(rng, len, Some(step.1))
                    });
                    s
                }
                None => Vec::new(),
            }
        } else {
            Vec::new()
        };
        let group = match suffix.last() {
            Some(&(_, e)) => self.gamma_eps(e).elements().to_vec(),
            None => self
                .gamma_eps(eps)
                .elements()
                .iter()
                .filter(|s| s.fixes(self.p(-eps)))
                .cloned()
                .collect(),
        };
        let s = group
            .choose(rng)
            .expect("the identity is always there")
            .clone();
        out.push((
            4,
            vec![
                self.path_token(&Self::concat(&[&prefix, &mid, &suffix]), &s),
                self.path_token(&Self::concat(&[&prefix, &swapped, &suffix]), &s.inverse()),
            ],
        ));

        let eps = Self::random_sign(rng);
        let n = rng.gen_range(1..=max_path) as i64;
        let s = self.random_perm_in(rng, self.gamma_eps(eps));
        let chain = vec![(self.iota(-eps), eps); n as usize];
        out.push((
            5,
            vec![
                self.tau_token(eps as i64 * n),
                self.top_token(&s),
                self.tau_token(-eps as i64 * n),
                self.path_token(&chain, &s.inverse()),
            ],
        ));

        let eps = Self::random_sign(rng);
        let n = rng.gen_range(1..=max_path) as i64;
        let inside: Vec<&Perm> = commutators
            .iter()
            .filter(|c| self.gamma_eps(-eps).contains(c))
            .collect();
        let s = (*inside.choose(rng).expect("the identity is always there")).clone();
        out.push((
            6,
            vec![
                self.tau_token(eps as i64 * n),
                self.top_token(&s),
                self.tau_token(-eps as i64 * n),
            ],
        ));

        let s = commutators
            .choose(rng)
            .expect("the identity is always there")
            .clone();
        out.push((7, vec![self.top_token(&s)]));
        out
    }
}

impl HnnBase for HnnParams {
    type Elem = HnnNode;

    fn identity(&self) -> HnnNode {
        self.identity_node()
    }

    fn mul(&self, a: &HnnNode, b: &HnnNode) -> HnnNode {
        HnnParams::mul(self, a, b)
    }

    fn inv(&self, a: &HnnNode) -> HnnNode {
        HnnParams::inv(self, a)
    }

    fn is_identity(&self, a: &HnnNode) -> bool {
        a.is_identity()
    }

    fn is_in_h(&self, a: &HnnNode, eps: i8) -> bool {
        self.is_in_h_eps(a, eps)
    }

    fn coset_decompose(&self, a: &HnnNode, eps: i8) -> (Option<u32>, HnnNode) {
        self.coset_decompose_eps(a, eps)
    }

    fn rep(&self, eps: i8, i: u32) -> HnnNode {
        self.rep_node(eps, i)
    }

    fn index_count(&self, eps: i8) -> u32 {
        HnnParams::index_count(self, eps)
    }

    fn basepoint(&self, eps: i8) -> u32 {
        self.iota(eps)
    }

    fn conjugate_by_tau(&self, a: &HnnNode, eps: i8) -> Result<HnnNode> {
        HnnParams::conjugate_by_tau(self, a, eps)
    }
}

pub type HnnElem = HnnWord<HnnNode>;

/// `Λ[Σ₋₁, Σ₁]` acting on its Bass-Serre tree. A vertex is the list of
/// union points of the syllables of its coset representative.
#[derive(Clone, Debug)]
pub struct Hnn {
    params: HnnParams,
}

impl Hnn {
    pub fn new(params: HnnParams) -> Self {
        Hnn { params }
    }

    pub fn params(&self) -> &HnnParams {
        &self.params
    }

    pub fn from_tokens(&self, tokens: &[Token]) -> Result<HnnElem> {
        self.params.reduce(tokens)
    }

    pub fn from_node(&self, g: HnnNode) -> HnnElem {
        HnnWord::from_base(g)
    }
}

impl TreeGroup for Hnn {
    type Elem = HnnElem;

    fn identity(&self) -> HnnElem {
        HnnWord::identity(&self.params)
    }

    fn mul(&self, a: &HnnElem, b: &HnnElem) -> Result<HnnElem> {
        a.mul(&self.params, b)
    }

    fn inv(&self, a: &HnnElem) -> Result<HnnElem> {
        a.inv(&self.params)
    }

    fn is_identity(&self, a: &HnnElem) -> bool {
        a.is_identity(&self.params)
    }

    fn syllable_length(&self, a: &HnnElem) -> usize {
        a.syllable_length()
    }

    fn classify(&self, a: &HnnElem) -> Result<Classification> {
        Ok(match a.classify(&self.params)? {
            HnnClass::Elliptic { conjugator } => Classification::Elliptic {
                witness: self.coset_vertex(&conjugator, 0),
            },
            HnnClass::Hyperbolic { .. } => Classification::Hyperbolic,
        })
    }

    fn child_steps(&self, v: &[u32]) -> Vec<u32> {
        self.params
            .child_points(v.last().map(|&u| self.params.point_step(u).1))
    }

    fn descend(&self, w: &HnnElem, _depth: usize, step: u32) -> Result<HnnElem> {
        let (i, e) = self.params.point_step(step);
        let w = if i == self.params.iota(-e) {
            w.clone()
        } else {
            w.mul_letter(&self.params, &HnnLetter::Base(self.params.rep_node(-e, i)))?
        };
        w.mul_letter(&self.params, &HnnLetter::Tau(e))
    }

    fn coset_vertex(&self, w: &HnnElem, _depth: usize) -> Vertex {
        w.syllables
            .iter()
            .map(|&(i, e)| self.params.step_point(i, e))
            .collect()
    }

    fn render(&self, a: &HnnElem) -> String {
        self.params.render(a)
    }

    fn render_vertex(&self, v: &[u32]) -> String {
        let mut parts = Vec::new();
        for &u in v {
            let (i, e) = self.params.point_step(u);
            if i != self.params.iota(-e) {
                let rep = self.params.rep_node(-e, i);
                parts.push(self.params.top_token(rep.portrait.label()).to_string());
            }
            parts.push(self.params.tau_token(e as i64).to_string());
        }
        parts.push("<G>".into());
        parts.join(" ")
    }

    fn parse(&self, text: &str) -> Result<HnnElem> {
        self.from_tokens(&parse_word(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sym2() -> HnnParams {
        HnnParams::symmetric(2, 2).unwrap()
    }

    fn sym3() -> HnnParams {
        HnnParams::symmetric(3, 3).unwrap()
    }

    fn node(p: &HnnParams, text: &str) -> HnnNode {
        p.eval_base(&parse_word(text).unwrap()).unwrap()
    }

    fn word(p: &HnnParams, text: &str) -> HnnElem {
        p.reduce(&parse_word(text).unwrap()).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        let intransitive = PermGroup::closure(&[Perm::parse("(0 1)", 3).unwrap()], 3).unwrap();
        assert!(matches!(
            HnnParams::new(intransitive, PermGroup::symmetric(2)),
            Err(Error::Config(_))
        ));
        assert!(HnnParams::new(PermGroup::cyclic(3), PermGroup::symmetric(2)).is_ok());
    }

    #[test]
    fn union_layout() {
        let p = HnnParams::symmetric(2, 3).unwrap();
        assert_eq!(p.degree(), 5);
        assert_eq!((p.p(-1), p.p(1)), (0, 2));
        assert_eq!(p.step_point(1, 1), 1);
        assert_eq!(p.step_point(2, -1), 4);
        for u in 0..5 {
            let (i, e) = p.point_step(u);
            assert_eq!(p.step_point(i, e), u);
        }
        assert_eq!(p.gamma().order(), 12);
        assert_eq!(p.gamma_eps(-1).order(), 6);
        assert_eq!(p.gamma_eps(1).order(), 4);
    }

    #[test]
    fn generator_validation() {
        let p = sym3();
        let id = Perm::identity(6);
        assert!(p.gen_path(&[(0, 1), (0, 1)], &id).unwrap().is_identity());
        // After a step of sign +1, a step of sign −1 may not use ι₁.
        assert!(matches!(
            p.gen_path(&[(1, 1), (0, -1)], &id),
            Err(Error::InvalidPath(_))
        ));
        assert!(p.gen_path(&[(1, 1), (1, -1)], &id).is_ok());
        assert!(matches!(
            p.gen_path(&[(3, 1)], &id),
            Err(Error::InvalidPath(_))
        ));
        assert!(matches!(p.gen_path(&[], &id), Err(Error::InvalidPath(_))));
        let moves_p1 = p.parse_perm("(3 4)").unwrap();
        assert!(matches!(
            p.gen_path(&[(1, 1)], &moves_p1),
            Err(Error::InvalidGenerator(_))
        ));
        assert!(p.gen_path(&[(1, -1)], &moves_p1).is_ok());
    }

    #[test]
    fn spec_examples_for_products() {
        let p = sym3();
        assert_eq!(node(&p, "h[(0 1)] h[(3 5)]"), node(&p, "h[(3 5)] h[(0 1)]"));
        assert_eq!(
            node(&p, "h[(0 2 1)] h[(0,1),(2,-1);(1 2)] h[(0 2 1)]^-1"),
            node(&p, "h[(2,1),(2,-1);(1 2)]")
        );
    }

    #[test]
    fn coset_decomposition_examples() {
        let p = sym3();
        let g = node(&p, "h[(3 4)]");
        let (i, h) = p.coset_decompose_eps(&g, 1);
        assert_eq!(i, Some(1));
        assert!(p.is_in_h_eps(&h, 1));
        assert_eq!(p.mul(&p.rep_node(1, 1), &h), g);
        assert_eq!(p.coset_decompose_eps(&g, -1), (None, g.clone()));
        let id = p.identity_node();
        assert_eq!(p.coset_decompose_eps(&id, 1), (None, id.clone()));
        let h = node(&p, "h[(1,1),(2,1);(1 2)]");
        for eps in [-1, 1] {
            assert_eq!(p.coset_decompose_eps(&h, eps), (None, h.clone()));
        }
    }

    #[test]
    fn tau_conjugation_examples() {
        let p = sym3();
        let s = node(&p, "h[(0 1)(4 5)]");
        assert_eq!(
            p.conjugate_by_tau(&s, 1).unwrap(),
            node(&p, "h[(0,1);(0 1)(4 5)]")
        );
        let g = node(&p, "h[(0,1),(2,1);(1 2)] h[(1 2)]");
        let there = p.conjugate_by_tau(&g, -1).unwrap();
        assert_eq!(p.conjugate_by_tau(&there, 1).unwrap(), g);
        assert_eq!(
            p.conjugate_by_tau(&node(&p, "h[(0,1),(2,-1);(1 2)]"), -1)
                .unwrap(),
            node(&p, "h[(2,-1);(1 2)]")
        );
        assert!(matches!(
            p.conjugate_by_tau(&node(&p, "h[(0 1)]"), -1),
            Err(Error::BrittonPinch(_))
        ));
    }

    #[test]
    fn relation_suite_for_sym2() {
        let p = sym2();
        let instances = p.relation_instances(3);
        for name in ["R1", "R2", "R3", "R4", "R5", "R6", "R7", "R8", "R9"] {
            assert!(
                instances.iter().any(|r| r.relation == name),
                "{name} has no instances"
            );
        }
        for r in &instances {
            assert!(p.relation_holds(r).unwrap(), "{r:?}");
        }
    }

    #[test]
    fn relation_suite_for_mixed_degrees() {
        let p = HnnParams::new(PermGroup::symmetric(2), PermGroup::cyclic(3)).unwrap();
        let (count, failed) = p.check_relations(2).unwrap();
        assert!(count > 0);
        assert!(failed.is_empty(), "{failed:?}");
    }

    #[test]
    fn quasi_kernel_examples() {
        let p = sym3();
        let id = p.identity_node();
        for eps in [-1, 1] {
            assert!(p.k_eps_member(&id, eps));
            assert!(p.k_eps_oracle(&id, eps, 2).unwrap());
        }
        // h(ι₁, −1; σ) lives below τ⁻¹G, so it lies in K₋₁.
        let k = node(&p, "h[(0,-1);(1 2)(3 4)]");
        assert!(p.k_eps_member(&k, -1));
        assert!(!p.k_eps_member(&k, 1));
        for len in 0..=2 {
            assert!(p.k_eps_oracle(&k, -1, len).unwrap());
        }
        assert!(!p.k_eps_oracle(&k, 1, 1).unwrap());
        let top = node(&p, "h[(1 2)]");
        for eps in [-1, 1] {
            assert!(!p.k_eps_member(&top, eps));
            assert!(!p.k_eps_oracle(&top, eps, 1).unwrap());
        }
        assert!(matches!(
            p.k_eps_oracle(&id, 1, MAX_ORACLE_SYLLABLES + 1),
            Err(Error::EnumerationLimit { .. })
        ));
    }

    #[test]
    fn quasi_kernels_match_half_tree_stabilizers() {
        let p = sym3();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut members = 0;
        for _ in 0..400 {
            let mut g = p.random_node(&mut rng, 3);
            if rng.gen_bool(0.5) {
                // Bias toward K: keep only the branch below one step.
                let branch = p.p(if rng.gen_bool(0.5) { 1 } else { -1 });
                let child = g.portrait.child(branch).cloned();
                g = p.node(Portrait::from_parts(
                    Perm::identity(6),
                    child.map(|c| (branch, c)),
                ));
            }
            for eps in [-1, 1] {
                let k = p.k_eps_member(&g, eps);
                members += k as usize;
                match p.conjugate_by_tau(&g, -eps) {
                    Ok(moved) => assert_eq!(k, p.lambda_bar_member(&moved, -eps)),
                    Err(_) => assert!(!k),
                }
            }
        }
        assert!(members > 20);
    }

    #[test]
    fn opposite_quasi_kernels_commute() {
        let p = sym2();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pick = |rng: &mut ChaCha8Rng, eps: i8| {
            let branch = p.p(-eps);
            let c = p.random_node(rng, 2).portrait.child(branch).cloned();
            p.node(Portrait::from_parts(
                Perm::identity(4),
                c.map(|c| (branch, c)),
            ))
        };
        for _ in 0..200 {
            let (a, b) = (pick(&mut rng, -1), pick(&mut rng, 1));
            assert!(p.k_eps_member(&a, -1) && p.k_eps_member(&b, 1));
            assert_eq!(p.mul(&a, &b), p.mul(&b, &a));
            if !a.is_identity() {
                assert!(!p.k_eps_member(&a, 1));
            }
        }
    }

    #[test]
    fn expansion_round_trips() {
        let p = sym3();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let g = p.random_node(&mut rng, 3);
            assert_eq!(p.eval_base(&p.expand(&g)).unwrap(), g);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..200 {
            let w = p.reduce(&p.random_word(&mut rng, 6, 3)).unwrap();
            assert_eq!(p.reduce(&p.expand_word(&w)).unwrap(), w);
            assert_eq!(p.reduce(&parse_word(&p.render(&w)).unwrap()).unwrap(), w);
        }
    }

    #[test]
    fn enumeration_counts() {
        let p = sym2();
        assert_eq!(p.enumerate_nodes(0).unwrap().len(), 4);
        // Four optional leaf children, each with a single nontrivial label.
        assert_eq!(p.enumerate_nodes(1).unwrap().len(), 4 * 2usize.pow(4));
        assert!(sym3().enumerate_nodes(2).is_err());
    }

    #[test]
    fn eta_examples() {
        let p = sym3();
        let eta = |t: &str| p.eta(&parse_word(t).unwrap()).unwrap();
        assert_eq!(
            eta("t"),
            WreathZElem {
                shift: 1,
                labels: BTreeMap::new()
            }
        );
        assert!(eta("h[(0 1)] h[(0 1)]^-1").is_identity());
        let v = eta("h[(0,1),(1,1),(1,-1);(0 1)]");
        assert_eq!(v.shift, 0);
        assert_eq!(v.labels.keys().copied().collect::<Vec<_>>(), vec![1]);
        let v = eta("t h[(0 1)] t^-1");
        assert_eq!(v.labels.keys().copied().collect::<Vec<_>>(), vec![1]);
        assert!(eta("h[(0 1 2)]").is_identity());
        assert!(matches!(
            p.eta(&parse_word("g0[(0 1)]").unwrap()),
            Err(Error::InvalidGenerator(_))
        ));
    }

    #[test]
    fn eta_is_a_homomorphism_on_normal_forms() {
        let p = sym3();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..500 {
            let a = p.random_word(&mut rng, 5, 3);
            let b = p.random_word(&mut rng, 5, 3);
            let ab = p
                .reduce(&a)
                .unwrap()
                .mul(&p, &p.reduce(&b).unwrap())
                .unwrap();
            let expected = p.eta_op(&p.eta(&a).unwrap(), &p.eta(&b).unwrap());
            assert_eq!(p.eta(&p.expand_word(&ab)).unwrap(), expected);
        }
    }

    #[test]
    fn xi_generators_lie_in_the_kernel() {
        for p in [
            sym2(),
            sym3(),
            HnnParams::new(PermGroup::cyclic(3), PermGroup::symmetric(2)).unwrap(),
        ] {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            for _ in 0..100 {
                for (set, gen) in p.sample_xi_generators(&mut rng, 3) {
                    p.reduce(&gen).unwrap_or_else(|e| panic!("set {set}: {e}"));
                    assert!(
                        p.xi_member(&gen).unwrap(),
                        "set {set}: {}",
                        print_word(&gen)
                    );
                }
            }
        }
    }

    #[test]
    fn tree_actions() {
        let p = sym2();
        let hnn = Hnn::new(p.clone());
        let t = word(&p, "t");
        assert_eq!(hnn.act(&t, &[]).unwrap(), vec![p.p(-1)]);
        assert_eq!(hnn.classify(&t).unwrap(), Classification::Hyperbolic);
        assert_eq!(
            hnn.classify(&word(&p, "t h[(2 3)] t^-1")).unwrap(),
            Classification::Elliptic {
                witness: vec![p.p(-1)]
            }
        );
        assert_eq!(hnn.child_steps(&[]).len(), 4);
        assert_eq!(hnn.child_steps(&[p.p(-1)]), vec![0, 1, 3]);
        assert_eq!(hnn.render_vertex(&[1, 3]), "h[(0 1)] t h[(2 3)] t^-1 <G>");
        for v in [vec![], vec![1], vec![0, 1], vec![3, 2, 1]] {
            let w = hnn.vertex_element(&v).unwrap();
            assert_eq!(hnn.coset_vertex(&w, v.len()), v);
        }
    }

    #[test]
    fn criterion_report() {
        let p = sym2();
        let r = p.cstar_report();
        assert!(r.unique_trace && !r.cstar_simple && r.quasi_kernel_amenable);
        let r = cstar_report_hnn([false, true]);
        assert!(r.unique_trace && r.cstar_simple && !r.quasi_kernel_amenable);
    }

    #[test]
    fn json_round_trip() {
        let p = sym3();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let g = p.random_node(&mut rng, 3);
            assert_eq!(p.node_from_json(&g.to_json()).unwrap(), g);
        }
        let bad = Portrait::from_parts(
            Perm::identity(6),
            [(0, Portrait::top(p.parse_perm("(3 4)").unwrap()))],
        );
        assert!(p.node_from_json(&bad.to_json()).is_err());
    }
}
