//! Bounded verification suites shared by the CLI and the acceptance tests.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amalgam::{cstar_report, Amalgam, Theta};
use crate::bs23::Bs23;
use crate::error::{Error, Result};
use crate::hnn::{cstar_report_hnn, Hnn, WreathZElem};
use crate::instance::{Caps, Family, Group, Instance};
use crate::portrait::Portrait;
use crate::tree::{
    delta, fledge_report, has_fixed_vertex, rays_agree, transverse_witness, Ball, Classification,
    Delta, TreeGroup, Verdict,
};
use crate::words::{print_word, Generator, Token};

/// Failures kept verbatim in a report; the rest are only counted.
const MAX_LISTED_FAILURES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Relations,
    Quasikernels,
    Homomorphisms,
    Faithfulness,
    Bs23,
    Fledge,
    Classification,
    Equivariance,
    Criteria,
}

#[derive(Clone, Copy, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Conjugator length for the HNN quasi-kernel oracle.
    pub oracle_len: usize,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            seed: 0,
            oracle_len: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub checked: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl Check {
    fn new(name: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed: true,
            checked: 0,
            failed: 0,
            failures: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.passed = false;
            self.failed += 1;
            if self.failures.len() < MAX_LISTED_FAILURES {
                self.failures.push(describe());
            }
        }
    }

    /// Fails the check outright, for properties that need at least one case.
    fn require_cases(mut self, minimum: usize) -> Self {
        if self.checked < minimum {
            self.passed = false;
            self.failures.push(format!(
                "only {} cases, expected at least {minimum}",
                self.checked
            ));
        }
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteReport {
    pub suite: Suite,
    pub family: Family,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: Suite, family: Family, checks: Vec<Check>) -> Self {
        let passed = checks.iter().all(|c| c.passed);
        SuiteReport {
            suite,
            family,
            passed,
            checks,
        }
    }

    pub fn render(&self) -> String {
        let mut out = format!(
            "{:?} on {:?}: {}\n",
            self.suite,
            self.family,
            if self.passed { "pass" } else { "FAIL" }
        );
        for c in &self.checks {
            out.push_str(&format!(
                "  {} {}: {} checked, {} failed\n",
                if c.passed { "ok  " } else { "FAIL" },
                c.name,
                c.checked,
                c.failed
            ));
            for f in &c.failures {
                out.push_str(&format!("      {f}\n"));
            }
        }
        out
    }
}

pub fn run_suite(instance: &Instance, suite: Suite, opts: SuiteOptions) -> Result<SuiteReport> {
    let family = match &instance.group {
        Group::Amalgam(_) => Family::Amalgam,
        Group::Hnn(_) => Family::Hnn,
        Group::Bs23(_) => Family::Bs23,
    };
    let caps = instance.caps;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let unavailable = || {
        Err(Error::Config(format!(
            "suite {suite:?} is not defined for {family:?}"
        )))
    };
    let checks = match (suite, &instance.group) {
        (Suite::Relations, Group::Amalgam(a)) => vec![amalgam_relations(a, caps)?],
        (Suite::Relations, Group::Hnn(h)) => vec![hnn_relations(h, caps)?],
        (Suite::Relations, Group::Bs23(b)) => vec![bs23_relations(b, &mut rng)?],
        (Suite::Quasikernels, Group::Amalgam(a)) => {
            amalgam_quasikernels(a, quasikernel_depth(caps))?
        }
        (Suite::Quasikernels, Group::Hnn(h)) => {
            hnn_quasikernels(h, quasikernel_depth(caps), opts.oracle_len, &mut rng)?
        }
        (Suite::Homomorphisms, Group::Amalgam(a)) => amalgam_homomorphisms(a, caps, &mut rng)?,
        (Suite::Homomorphisms, Group::Hnn(h)) => hnn_homomorphisms(h, caps, &mut rng)?,
        (Suite::Faithfulness, Group::Amalgam(a)) => amalgam_faithfulness(a, &mut rng)?,
        (Suite::Faithfulness, Group::Hnn(h)) => hnn_faithfulness(h, &mut rng)?,
        (Suite::Bs23, Group::Bs23(b)) => bs23_golden(b, caps)?,
        (Suite::Fledge, Group::Amalgam(a)) => {
            let samples = amalgam_elliptic_samples(a, &mut rng)?;
            vec![fledge_constancy(a, &samples, caps)?]
        }
        (Suite::Fledge, Group::Hnn(h)) => {
            let samples = hnn_elliptic_samples(h, &mut rng)?;
            vec![fledge_constancy(h, &samples, caps)?]
        }
        (Suite::Classification, Group::Amalgam(a)) => {
            let words = sample_words(
                &mut rng,
                |r| a.params().random_word(r, 6, 2),
                |w| a.from_tokens(w),
            )?;
            classification_checks(a, &words)?
        }
        (Suite::Classification, Group::Hnn(h)) => {
            let words = sample_words(
                &mut rng,
                |r| h.params().random_word(r, 6, 2),
                |w| h.from_tokens(w),
            )?;
            classification_checks(h, &words)?
        }
        (Suite::Classification, Group::Bs23(b)) => {
            let words = sample_words(&mut rng, bs23_random_word, |w| b.from_tokens(w))?;
            classification_checks(b, &words)?
        }
        (Suite::Equivariance, Group::Amalgam(a)) => {
            let words = sample_words(
                &mut rng,
                |r| a.params().random_word(r, 4, 2),
                |w| a.from_tokens(w),
            )?;
            vec![delta_equivariance(a, &words, caps, &mut rng)?]
        }
        (Suite::Equivariance, Group::Hnn(h)) => {
            let words = sample_words(
                &mut rng,
                |r| h.params().random_word(r, 4, 2),
                |w| h.from_tokens(w),
            )?;
            vec![delta_equivariance(h, &words, caps, &mut rng)?]
        }
        (Suite::Criteria, Group::Amalgam(a)) => criteria_table(
            |f| serde_json::to_value(cstar_report(f)),
            a.params().cstar_report().cstar_simple,
        ),
        (Suite::Criteria, Group::Hnn(h)) => criteria_table(
            |f| serde_json::to_value(cstar_report_hnn(f)),
            h.params().cstar_report().cstar_simple,
        ),
        _ => return unavailable(),
    };
    Ok(SuiteReport::new(suite, family, checks))
}

fn amalgam_relations(a: &Amalgam, caps: Caps) -> Result<Check> {
    let p = a.params();
    let instances = p.relation_instances(caps.path_depth);
    let results: Vec<bool> = instances
        .par_iter()
        .map(|r| p.relation_holds(r))
        .collect::<Result<_>>()?;
    let mut check = Check::new(format!("R1-R6, paths <= {}", caps.path_depth));
    for (r, ok) in instances.iter().zip(results) {
        check.record(ok, || {
            format!(
                "{} on side {}: {:?} = {:?}",
                r.relation, r.side, r.lhs, r.rhs
            )
        });
    }
    Ok(check.require_cases(1))
}

fn hnn_relations(h: &Hnn, caps: Caps) -> Result<Check> {
    let (count, failed) = h.params().check_relations(caps.path_depth)?;
    let mut check = Check::new(format!("R1-R9, paths <= {}", caps.path_depth));
    check.checked = count;
    check.failed = failed.len();
    check.passed = failed.is_empty() && count > 0;
    check.failures = failed
        .iter()
        .take(MAX_LISTED_FAILURES)
        .map(|r| {
            format!(
                "{} (conj {}): {:?} = {:?}",
                r.relation, r.conj, r.lhs, r.rhs
            )
        })
        .collect();
    Ok(check)
}

fn bs23_random_word(rng: &mut ChaCha8Rng) -> Vec<Token> {
    (0..rng.gen_range(0..=6))
        .map(|_| {
            if rng.gen_bool(0.5) {
                Token::new(Generator::T, if rng.gen_bool(0.5) { 1 } else { -1 })
            } else {
                Token::new(Generator::B, rng.gen_range(-6..=6))
            }
        })
        .collect()
}

fn bs23_relations(b: &Bs23, rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut check = Check::new("t^-1 b^2k t = b^3k inside random words");
    for _ in 0..200 {
        let k = rng.gen_range(-5i64..=5);
        let (u, v) = (bs23_random_word(rng), bs23_random_word(rng));
        let mut lhs = u.clone();
        lhs.extend([
            Token::new(Generator::T, -1),
            Token::new(Generator::B, 2 * k),
            Token::new(Generator::T, 1),
        ]);
        lhs.extend(v.iter().cloned());
        let mut rhs = u.clone();
        rhs.push(Token::new(Generator::B, 3 * k));
        rhs.extend(v.iter().cloned());
        check.record(b.from_tokens(&lhs)? == b.from_tokens(&rhs)?, || {
            format!("k = {k}, {u:?} | {v:?}")
        });
    }
    Ok(check)
}

/// Portrait depth enumerated by the quasi-kernel suites.
pub fn quasikernel_depth(caps: Caps) -> usize {
    caps.path_depth.min(2)
}

fn amalgam_quasikernels(a: &Amalgam, depth: usize) -> Result<Vec<Check>> {
    let p = a.params();
    let mut check = Check::new(format!(
        "quasiKernelMember = cJnMember for n <= 3, all H-portraits of depth <= {depth}"
    ));
    for side in 0..2u8 {
        let elems = p.enumerate_h(side, depth);
        let results: Vec<(bool, bool)> = elems
            .par_iter()
            .map(|h| {
                let mut pair = (false, false);
                for j in 0..2u8 {
                    let ok = p.quasi_kernel_member(h, j)? == p.cjn_member_upto(h, j, 3)?;
                    if j == 0 {
                        pair.0 = ok
                    } else {
                        pair.1 = ok
                    }
                }
                Ok(pair)
            })
            .collect::<Result<_>>()?;
        for (h, (ok0, ok1)) in elems.iter().zip(results) {
            check.record(ok0, || {
                format!("side {side}, K_0: {}", print_word(&p.expand(h)))
            });
            check.record(ok1, || {
                format!("side {side}, K_1: {}", print_word(&p.expand(h)))
            });
        }
    }
    Ok(vec![check.require_cases(1)])
}

fn hnn_quasikernels(
    h: &Hnn,
    depth: usize,
    oracle_len: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Check>> {
    let p = h.params();
    let (nodes, scope) = match p.enumerate_nodes(depth) {
        Ok(nodes) => (nodes, "all portraits"),
        Err(Error::EnumerationLimit { .. }) => (
            (0..2000).map(|_| p.random_node(rng, depth)).collect(),
            "2000 random portraits",
        ),
        Err(e) => return Err(e),
    };
    let results: Vec<[bool; 4]> = nodes
        .par_iter()
        .map(|g| {
            let mut out = [true; 4];
            for (k, eps) in [-1i8, 1].into_iter().enumerate() {
                let member = p.k_eps_member(g, eps);
                out[k] = member == p.k_eps_oracle(g, eps, oracle_len)?;
                out[2 + k] = match p.conjugate_by_tau(g, -eps) {
                    Ok(moved) => member == p.lambda_bar_member(&moved, -eps),
                    Err(_) => !member,
                };
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut oracle = Check::new(format!(
        "kEpsMember = kEpsOracle(L = {oracle_len}), {scope} of depth <= {depth}"
    ));
    let mut bar = Check::new(format!(
        "K_eps = conjugate of the half-tree stabilizer, {scope} of depth <= {depth}"
    ));
    for (g, r) in nodes.iter().zip(results) {
        for k in 0..2 {
            let eps = if k == 0 { -1 } else { 1 };
            oracle.record(r[k], || format!("eps {eps}: {}", print_word(&p.expand(g))));
            bar.record(r[2 + k], || {
                format!("eps {eps}: {}", print_word(&p.expand(g)))
            });
        }
    }
    Ok(vec![oracle.require_cases(1), bar.require_cases(1)])
}

fn amalgam_homomorphisms(a: &Amalgam, caps: Caps, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let p = a.params();
    let depth = caps.path_depth;
    let mut hom = Check::new("theta(ab) = theta(a) + theta(b) on normal forms, 500 pairs");
    for _ in 0..500 {
        let (u, v) = (p.random_word(rng, 5, depth), p.random_word(rng, 5, depth));
        let ab = p.reduce(&u)?.mul(p, &p.reduce(&v)?)?;
        let expected = p.theta_op(p.theta(&u)?, p.theta(&v)?);
        let got = p.theta(&p.expand_word(&ab))?;
        hom.record(got == expected, || {
            format!("{u:?} * {v:?}: {got:?} != {expected:?}")
        });
    }
    let mut gens = Check::new("sampled N-generators lie in ker theta");
    for _ in 0..100 {
        for w in p.sample_n_generators(rng, depth) {
            let value = p.theta(&w)?;
            gens.record(value == Theta::IDENTITY, || format!("{w:?} -> {value:?}"));
        }
    }
    Ok(vec![hom, gens.require_cases(1)])
}

fn hnn_homomorphisms(h: &Hnn, caps: Caps, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let p = h.params();
    let depth = caps.path_depth;
    let mut hom = Check::new("eta(ab) = eta(a) eta(b) on normal forms, 500 pairs");
    for _ in 0..500 {
        let (u, v) = (p.random_word(rng, 5, depth), p.random_word(rng, 5, depth));
        let ab = p.reduce(&u)?.mul(p, &p.reduce(&v)?)?;
        let expected = p.eta_op(&p.eta(&u)?, &p.eta(&v)?);
        let got = p.eta(&p.expand_word(&ab))?;
        hom.record(got == expected, || {
            format!("{u:?} * {v:?}: {got:?} != {expected:?}")
        });
    }
    let mut gens = Check::new("sampled Xi-generators lie in ker eta");
    for _ in 0..100 {
        for (set, w) in p.sample_xi_generators(rng, depth) {
            p.reduce(&w)?;
            let value = p.eta(&w)?;
            gens.record(value.is_identity(), || {
                format!("set {set}: {w:?} -> {value:?}")
            });
        }
    }
    let mut tau = Check::new("eta(t) has shift 1 and no labels");
    let value = p.eta(&[p.tau_token(1)])?;
    tau.record(
        value
            == WreathZElem {
                shift: 1,
                ..Default::default()
            },
        || format!("{value:?}"),
    );
    Ok(vec![hom, gens.require_cases(1), tau])
}

/// Structural equality against equality of the actions on a ball, over
/// random pairs and pairs differing by one deep generator.
fn faithfulness_check<G: TreeGroup>(
    group: &G,
    pairs: &[(G::Elem, G::Elem, bool)],
    radius: usize,
    name: &str,
) -> Result<Check> {
    let ball = Ball::new(group, radius, radius)?;
    let results: Vec<bool> = pairs
        .par_iter()
        .map(|(a, b, same)| Ok(*same == (ball.images(group, a)? == ball.images(group, b)?)))
        .collect::<Result<_>>()?;
    let mut check = Check::new(name);
    for ((a, b, same), ok) in pairs.iter().zip(results) {
        check.record(ok, || {
            format!(
                "{} vs {} (structurally equal: {same})",
                group.render(a),
                group.render(b)
            )
        });
    }
    Ok(check)
}

fn amalgam_faithfulness(a: &Amalgam, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let p = a.params();
    let mut random = Vec::new();
    for _ in 0..200 {
        let x = p.random_g(rng, 0, 3, false);
        let y = if rng.gen_bool(0.25) {
            p.eval_on_side(&p.expand(&x), 0)?
        } else {
            p.random_g(rng, 0, 3, false)
        };
        let same = x.portrait() == y.portrait();
        random.push((a.from_g(&x)?, a.from_g(&y)?, same));
    }
    let mut near = Vec::new();
    for _ in 0..50 {
        let x = p.random_g(rng, 0, 3, false);
        let path = p
            .paths(0, 3)
            .choose(rng)
            .expect("paths of length 3 exist")
            .clone();
        let stab = p.stabilizer(((path.len()) % 2) as u8).elements();
        let sigma = stab.iter().filter(|s| !s.is_identity()).collect::<Vec<_>>();
        let sigma = match sigma.choose(rng) {
            Some(s) => (*s).clone(),
            None => stab[0].clone(),
        };
        let y = p.mul(&x, &p.gen_h(0, &path, &sigma)?)?;
        near.push((a.from_g(&x)?, a.from_g(&y)?, x.portrait() == y.portrait()));
    }
    Ok(vec![
        faithfulness_check(
            a,
            &random,
            5,
            "200 random pairs of depth <= 3, radius-5 ball",
        )?,
        faithfulness_check(a, &near, 5, "50 pairs differing by one depth-3 generator")?,
    ])
}

fn hnn_faithfulness(h: &Hnn, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let p = h.params();
    let mut random = Vec::new();
    for _ in 0..200 {
        let x = p.random_node(rng, 3);
        let y = if rng.gen_bool(0.25) {
            p.eval_base(&p.expand(&x))?
        } else {
            p.random_node(rng, 3)
        };
        let same = x == y;
        random.push((h.from_node(x), h.from_node(y), same));
    }
    let mut near = Vec::new();
    for _ in 0..50 {
        let x = p.random_node(rng, 3);
        let steps = p.random_steps(rng, 3, None);
        let stab = p.gamma_eps(steps[2].1).elements();
        let nontrivial: Vec<_> = stab.iter().filter(|s| !s.is_identity()).collect();
        let sigma = nontrivial
            .choose(rng)
            .map_or(stab[0].clone(), |s| (*s).clone());
        let y = p.mul(&x, &p.gen_path(&steps, &sigma)?);
        let same = x == y;
        near.push((h.from_node(x), h.from_node(y), same));
    }
    Ok(vec![
        faithfulness_check(
            h,
            &random,
            5,
            "200 random pairs of depth <= 3, radius-5 ball",
        )?,
        faithfulness_check(h, &near, 5, "50 pairs differing by one depth-3 generator")?,
    ])
}

fn bs23_golden(b: &Bs23, caps: Caps) -> Result<Vec<Check>> {
    let report = b.verify_b6(6)?;
    let mut golden =
        Check::new("b^6 fixes the linear subtree up to v6 and moves each outward neighbour");
    for c in report.fixed.iter().chain(&report.moved) {
        golden.record(c.holds, || format!("{} -> {}", c.vertex, c.image));
    }
    let radii = [4, 6, 8];
    let fledge = fledge_report(b, &Bs23::b(6), &radii, caps.ball_radius.max(8))?;
    let mut growth = Check::new("Upsilon diameter of b^6 grows strictly over radii 4, 6, 8");
    growth.record(fledge.verdict == Verdict::GrowingWitness, || {
        format!("diameters {:?}", fledge.diameters)
    });
    Ok(vec![golden, growth])
}

/// Depth of an elliptic element for the fledge test: the syllable length
/// of its normal form plus the depth of its base-group tail.
pub fn elliptic_depth(syllables: usize, tail: &Portrait) -> usize {
    syllables + tail.depth().unwrap_or(0)
}

fn amalgam_elliptic_samples(
    a: &Amalgam,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(crate::amalgam::AmalgamElem, usize)>> {
    let p = a.params();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < 150 && attempts < 5000 {
        attempts += 1;
        let mut w = p.random_word(rng, 3, 2);
        if rng.gen_bool(0.5) {
            // Conjugate by one transversal element to leave the base vertex.
            let c = p.random_word(rng, 1, 0);
            let inverse: Vec<Token> = c.iter().rev().map(Token::inverse).collect();
            w = c.into_iter().chain(w).chain(inverse).collect();
        }
        let g = a.from_tokens(&w)?;
        if a.is_identity(&g) || g.syllable_length() > 2 {
            continue;
        }
        if let Classification::Elliptic { .. } = a.classify(&g)? {
            let d = elliptic_depth(g.syllable_length(), g.tail.portrait());
            out.push((g, d));
        }
    }
    Ok(out)
}

fn hnn_elliptic_samples(
    h: &Hnn,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(crate::hnn::HnnElem, usize)>> {
    let p = h.params();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < 150 && attempts < 5000 {
        attempts += 1;
        let core: Vec<Token> = (0..rng.gen_range(1..=3))
            .map(|_| p.random_token(rng, 2))
            .filter(|t| t.gen != Generator::T)
            .collect();
        let w = if rng.gen_bool(0.5) {
            let e = if rng.gen_bool(0.5) { 1 } else { -1 };
            let mut w = vec![p.tau_token(e)];
            w.extend(core);
            w.push(p.tau_token(-e));
            w
        } else {
            core
        };
        let g = h.from_tokens(&w)?;
        if h.is_identity(&g) || g.syllable_length() > 2 {
            continue;
        }
        if let Classification::Elliptic { .. } = h.classify(&g)? {
            let d = elliptic_depth(g.syllable_length(), g.tail.portrait());
            out.push((g, d));
        }
    }
    Ok(out)
}

/// Every sampled elliptic element has the same fledge diameter at every
/// radius from `d + 2` up to the ball cap.
fn fledge_constancy<G: TreeGroup>(
    group: &G,
    samples: &[(G::Elem, usize)],
    caps: Caps,
) -> Result<Check> {
    let top = caps.ball_radius;
    let results: Vec<Option<(bool, Vec<usize>)>> = samples
        .par_iter()
        .map(|(g, d)| {
            if d + 2 > top {
                return Ok(None);
            }
            let radii: Vec<usize> = (d + 2..=top).collect();
            let report = fledge_report(group, g, &radii, top)?;
            let constant = report.diameters.iter().all(|&x| x == report.diameters[0]);
            Ok(Some((constant, report.diameters)))
        })
        .collect::<Result<_>>()?;
    let mut check = Check::new(format!(
        "elliptic words of syllable length <= 2: constant diameter over radii d+2..={top}"
    ));
    for ((g, d), r) in samples.iter().zip(results) {
        if let Some((ok, diameters)) = r {
            check.record(ok, || {
                format!("{} (d = {d}): {diameters:?}", group.render(g))
            });
        }
    }
    Ok(check.require_cases(20))
}

/// Reduces sampled words, keeping one per normal form of syllable length
/// at most 3.
fn sample_words<E: Clone + Eq + std::hash::Hash>(
    rng: &mut ChaCha8Rng,
    mut sample: impl FnMut(&mut ChaCha8Rng) -> Vec<Token>,
    reduce: impl Fn(&[Token]) -> Result<E>,
) -> Result<Vec<E>> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for _ in 0..600 {
        let e = reduce(&sample(rng))?;
        if seen.insert(e.clone()) {
            out.push(e);
        }
    }
    Ok(out)
}

fn classification_checks<G: TreeGroup>(group: &G, words: &[G::Elem]) -> Result<Vec<Check>> {
    let ball = Ball::new(group, 6, 6)?;
    let words: Vec<&G::Elem> = words
        .iter()
        .filter(|w| group.syllable_length(w) <= 3)
        .collect();
    let results: Vec<(bool, bool)> = words
        .par_iter()
        .map(|w| {
            let elliptic = matches!(group.classify(w)?, Classification::Elliptic { .. });
            Ok((elliptic, has_fixed_vertex(group, w, &ball)?))
        })
        .collect::<Result<_>>()?;
    let mut check = Check::new("classify agrees with fixed-vertex search on the radius-6 ball");
    let mut hyperbolic = Vec::new();
    for (w, (elliptic, fixes)) in words.iter().zip(results) {
        check.record(elliptic == fixes, || {
            format!("{}: classified elliptic = {elliptic}", group.render(w))
        });
        if !elliptic {
            hyperbolic.push((*w).clone());
        }
    }
    // Translates of a few sampled axes away from the base vertex.
    let mut candidates = hyperbolic.clone();
    for v in ball.vertices.iter().filter(|v| v.len() == 2) {
        let c = group.vertex_element(v)?;
        for x in hyperbolic.iter().take(3) {
            candidates.push(group.mul(&group.mul(&c, x)?, &group.inv(&c)?)?);
        }
    }
    let mut transverse = Check::new("a transverse pair of hyperbolic elements exists");
    let pair = transverse_witness(group, &candidates, 4, 4)?;
    transverse.record(pair.is_some(), || {
        format!("none among {} hyperbolic samples", hyperbolic.len())
    });
    Ok(vec![check.require_cases(50), transverse])
}

/// `δ(h g h⁻¹) = h · δ(g)` whenever both sides are determined.
fn delta_equivariance<G: TreeGroup>(
    group: &G,
    words: &[G::Elem],
    caps: Caps,
    rng: &mut ChaCha8Rng,
) -> Result<Check> {
    let radii = [4, 6, caps.ball_radius.max(6)];
    let short: Vec<&G::Elem> = words
        .iter()
        .filter(|w| group.syllable_length(w) <= 1)
        .collect();
    let mut cases = Vec::new();
    while cases.len() < 100 {
        let g = words.choose(rng).expect("samples are nonempty");
        let h = short.choose(rng).expect("short samples are nonempty");
        if !group.is_identity(g) {
            cases.push((g.clone(), (*h).clone()));
        }
    }
    let results: Vec<Option<bool>> = cases
        .par_iter()
        .map(|(g, h)| {
            let conj = group.mul(&group.mul(h, g)?, &group.inv(h)?)?;
            let determined = |r: Result<Delta>| match r {
                Ok(d) => Ok(Some(d)),
                Err(Error::Inconclusive { .. }) => Ok(None),
                Err(e) => Err(e),
            };
            let (Some(lhs), Some(rhs)) = (
                determined(delta(group, &conj, &radii, radii[2]))?,
                determined(delta(group, g, &radii, radii[2]))?,
            ) else {
                return Ok(None);
            };
            Ok(match (lhs, rhs) {
                (Delta::Point(p), Delta::Point(q)) => Some(p == q.act(group, h)?),
                (Delta::Ray(a), Delta::Ray(b)) => {
                    let moved: Vec<_> = b.iter().map(|v| group.act(h, v)).collect::<Result<_>>()?;
                    rays_agree(&a, &moved)
                }
                _ => Some(false),
            })
        })
        .collect::<Result<_>>()?;
    let mut check = Check::new("delta(h g h^-1) = h delta(g) on 100 pairs, where determined");
    for ((g, h), r) in cases.iter().zip(results) {
        if let Some(ok) = r {
            check.record(ok, || {
                format!("g = {}, h = {}", group.render(g), group.render(h))
            });
        }
    }
    Ok(check.require_cases(50))
}

fn criteria_table(
    report: impl Fn([bool; 2]) -> serde_json::Result<serde_json::Value>,
    instance_simple: bool,
) -> Vec<Check> {
    let mut check = Check::new("criterion truth table over amenability flags");
    for flags in [[true, true], [false, true], [true, false], [false, false]] {
        let value = report(flags).expect("reports serialize");
        let simple = !(flags[0] && flags[1]);
        let ok = value["uniqueTrace"] == true
            && value["cstarSimple"] == simple
            && value["quasiKernelAmenable"] == !simple;
        check.record(ok, || format!("{flags:?} -> {value}"));
    }
    let mut finite = Check::new("finite instance is not C*-simple");
    finite.record(!instance_simple, || {
        "finite instance reported C*-simple".into()
    });
    vec![check, finite]
}
