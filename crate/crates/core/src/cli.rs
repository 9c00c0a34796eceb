//! Command-line front end.
//!
//! Every command prints a human-readable report, or with `--json` a pretty
//! JSON document whose keys are sorted so that re-serializing it is stable.

use std::io::Read;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::instance::{Group, Instance, InstanceConfig};
use crate::tree::{fledge_report, hull, psi_set, Ball, BallMarks, Classification, TreeGroup};
use crate::verify::{run_suite, Suite, SuiteOptions};
use crate::words::parse_word;

#[derive(Debug, Parser)]
#[command(
    name = "bsl",
    version,
    about = "Amalgams and HNN extensions acting on their Bass-Serre trees"
)]
pub struct Cli {
    /// Instance configuration; read from stdin when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for randomized suites.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the report (or DOT graph) to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normal form of a word.
    Reduce { word: String },
    /// Normal form of a product.
    Mul { left: String, right: String },
    /// Image of a vertex, given as a word naming its coset.
    Act { word: String, vertex: String },
    /// Vertices of the ball of the given radius around the base vertex.
    Ball { radius: usize },
    /// Elliptic or hyperbolic, with a fixed vertex or translation length.
    Classify { word: String },
    /// Hull diameters of the fledge set at several radii.
    Fledge {
        word: String,
        #[arg(long, value_delimiter = ',', default_value = "4,6,8")]
        radii: Vec<usize>,
    },
    /// Abelianization homomorphism of the family.
    Hom { kind: HomKind, word: String },
    /// Run a bounded verification suite.
    Verify {
        suite: Suite,
        /// Conjugator length for the HNN quasi-kernel oracle.
        #[arg(long, default_value_t = 2)]
        oracle_len: usize,
    },
    /// Graphviz rendering of a ball, optionally coloured by the fixed set of a word.
    ExportDot {
        radius: usize,
        #[arg(long)]
        mark: Option<String>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HomKind {
    Theta,
    Eta,
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::OracleContract(_) | Error::MissingCoset { .. } | Error::BrittonPinch(_) => 3,
        _ => 2,
    }
}

/// Output of a successful command.
pub struct Report {
    pub text: String,
    pub json: Value,
    /// False when a verification suite failed.
    pub passed: bool,
}

impl Report {
    fn plain(text: String, json: Value) -> Self {
        Report {
            text,
            json,
            passed: true,
        }
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("values serialize");
            s.push('\n');
            s
        } else {
            self.text.clone()
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

pub fn load_config(path: Option<&PathBuf>) -> Result<InstanceConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?,
        None => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| Error::Config(format!("cannot read stdin: {e}")))?;
            s
        }
    };
    InstanceConfig::from_json(&text)
}

/// Runs one command against an instance.
pub fn execute(instance: &Instance, command: &Command, seed: u64) -> Result<Report> {
    match command {
        Command::Verify { suite, oracle_len } => {
            let report = run_suite(
                instance,
                *suite,
                SuiteOptions {
                    seed,
                    oracle_len: *oracle_len,
                },
            )?;
            Ok(Report {
                text: report.render(),
                json: to_json(&report),
                passed: report.passed,
            })
        }
        Command::Hom { kind, word } => hom(instance, *kind, word),
        _ => match &instance.group {
            Group::Amalgam(g) => generic(g, instance, command),
            Group::Hnn(g) => generic(g, instance, command),
            Group::Bs23(g) => generic(g, instance, command),
        },
    }
}

fn hom(instance: &Instance, kind: HomKind, word: &str) -> Result<Report> {
    let tokens = parse_word(word)?;
    match (kind, &instance.group) {
        (HomKind::Theta, Group::Amalgam(a)) => {
            let value = a.params().theta(&tokens)?;
            let text = format!(
                "theta = ({}, {}) in Gamma0^ab x Gamma1^ab\n",
                value.gamma0, value.gamma1
            );
            Ok(Report::plain(text, to_json(&value)))
        }
        (HomKind::Eta, Group::Hnn(h)) => {
            let value = h.params().eta(&tokens)?;
            let labels: Vec<String> = value
                .labels
                .iter()
                .map(|(k, c)| format!("{k}: {c}"))
                .collect();
            let text = format!("shift {}, labels {{{}}}\n", value.shift, labels.join(", "));
            Ok(Report::plain(text, to_json(&value)))
        }
        (HomKind::Theta, _) => Err(Error::Config(
            "theta is defined on amalgam instances".into(),
        )),
        (HomKind::Eta, _) => Err(Error::Config("eta is defined on hnn instances".into())),
    }
}

fn generic<G: TreeGroup>(group: &G, instance: &Instance, command: &Command) -> Result<Report> {
    let cap = instance.caps.ball_radius;
    let element = |text: &str| group.parse(text);
    Ok(match command {
        Command::Reduce { word } => {
            let g = element(word)?;
            let nf = group.render(&g);
            Report::plain(
                format!("{nf}\n"),
                json!({ "normalForm": nf, "syllableLength": group.syllable_length(&g) }),
            )
        }
        Command::Mul { left, right } => {
            let g = group.mul(&element(left)?, &element(right)?)?;
            let nf = group.render(&g);
            Report::plain(
                format!("{nf}\n"),
                json!({ "normalForm": nf, "syllableLength": group.syllable_length(&g) }),
            )
        }
        Command::Act { word, vertex } => {
            let g = element(word)?;
            let v = group.act(&element(vertex)?, &[])?;
            let image = group.act(&g, &v)?;
            let (from, to) = (group.render_vertex(&v), group.render_vertex(&image));
            Report::plain(
                format!("{from} -> {to}\n"),
                json!({ "vertex": from, "image": to, "path": v, "imagePath": image }),
            )
        }
        Command::Ball { radius } => {
            let ball = Ball::new(group, *radius, cap)?;
            let mut per_level = vec![0usize; radius + 1];
            for v in &ball.vertices {
                per_level[v.len()] += 1;
            }
            let text = format!(
                "radius {radius}: {} vertices, {} edges, per level {per_level:?}\n",
                ball.len(),
                ball.edge_count()
            );
            Report::plain(
                text,
                json!({
                    "radius": radius,
                    "vertices": ball.len(),
                    "edges": ball.edge_count(),
                    "perLevel": per_level,
                }),
            )
        }
        Command::Classify { word } => {
            let g = element(word)?;
            match group.classify(&g)? {
                Classification::Elliptic { witness } => {
                    let v = group.render_vertex(&witness);
                    Report::plain(
                        format!("elliptic, fixes {v}\n"),
                        json!({ "kind": "elliptic", "witness": v, "witnessPath": witness }),
                    )
                }
                Classification::Hyperbolic => {
                    let (_, length) = crate::tree::translation(group, &g)?;
                    Report::plain(
                        format!("hyperbolic, translation length {length}\n"),
                        json!({ "kind": "hyperbolic", "translationLength": length }),
                    )
                }
            }
        }
        Command::Fledge { word, radii } => {
            let report = fledge_report(group, &element(word)?, radii, cap)?;
            let text = format!(
                "radii {:?}\nhull diameters (half-edges) {:?}\npsi sizes {:?}\nverdict {:?}\n",
                report.radii, report.diameters, report.psi_sizes, report.verdict
            );
            Report::plain(text, to_json(&report))
        }
        Command::ExportDot { radius, mark } => {
            let ball = Ball::new(group, *radius, cap)?;
            let marks = match mark {
                Some(word) => {
                    let fixed = ball.fixed(group, &element(word)?)?;
                    let psi = psi_set(&ball, &fixed, *radius).determined;
                    let hull = hull(&ball, &psi).into_iter().collect();
                    Some(BallMarks {
                        fixed,
                        psi: psi.into_iter().collect(),
                        hull,
                    })
                }
                None => None,
            };
            let dot = ball.to_dot(&|v| group.render_vertex(v), marks.as_ref());
            Report::plain(dot.clone(), json!({ "dot": dot }))
        }
        Command::Verify { .. } | Command::Hom { .. } => unreachable!("handled by execute"),
    })
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = load_config(cli.config.as_ref())
        .and_then(|c| c.build())
        .and_then(|instance| execute(&instance, &cli.command, cli.seed));
    let report = match outcome {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let output = report.render(cli.json);
    match &cli.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, output) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{output}"),
    }
    if report.passed {
        0
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::permgroup::GroupSpec;

    fn bs23() -> Instance {
        InstanceConfig::bs23().build().unwrap()
    }

    fn hnn_sym2() -> Instance {
        InstanceConfig::hnn(GroupSpec::symmetric(2), GroupSpec::symmetric(2))
            .build()
            .unwrap()
    }

    #[test]
    fn reduces_the_presentation_relation() {
        let r = execute(
            &bs23(),
            &Command::Reduce {
                word: "t^-1 * b^2 * t".into(),
            },
            0,
        )
        .unwrap();
        assert_eq!(r.text, "b^3\n");
    }

    #[test]
    fn eta_of_the_stable_letter() {
        let r = execute(
            &hnn_sym2(),
            &Command::Hom {
                kind: HomKind::Eta,
                word: "t".into(),
            },
            0,
        )
        .unwrap();
        assert_eq!(r.text, "shift 1, labels {}\n");
        assert_eq!(r.json, json!({ "shift": 1, "labels": {} }));
    }

    #[test]
    fn homomorphisms_need_their_family() {
        let err = execute(
            &bs23(),
            &Command::Hom {
                kind: HomKind::Theta,
                word: "b".into(),
            },
            0,
        );
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn json_reports_round_trip() {
        let r = execute(
            &hnn_sym2(),
            &Command::Fledge {
                word: "h[(0 1)]".into(),
                radii: vec![3, 4],
            },
            0,
        )
        .unwrap();
        let printed = r.render(true);
        let reparsed: Value = serde_json::from_str(&printed).unwrap();
        assert_eq!(
            serde_json::to_string_pretty(&reparsed).unwrap() + "\n",
            printed
        );
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::parse(0, "x")), 2);
        assert_eq!(exit_code(&Error::Config("x".into())), 2);
        assert_eq!(exit_code(&Error::OracleContract("x".into())), 3);
        assert_eq!(run(["bsl", "frobnicate"]), 2);
    }
}
