//! `instgov` command-line front end.
//!
//! Exit codes: 0 on success or compliance, 1 when violations, a failed
//! verification or a rejected vote are found, 2 on usage or parse errors.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use instgov::audit::{verify_bytes, AuditKind, AuditLog};
use instgov::game::{min_dominating_sanction, parse_game, pure_nash, transform, SanctionProfile};
use instgov::manifest::{compile_to_shapes, materialize_conditions, parse_manifest};
use instgov::ratio::parse_rational;
use instgov::rdf::parse_turtle;
use instgov::shacl::{parse_shapes, validate};
use instgov::sim::{run, vote_on, Scenario};

#[derive(Parser)]
#[command(name = "instgov", version, about = "Ex-ante institutional compliance engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a data graph against a shapes graph.
    Validate {
        data: PathBuf,
        shapes: PathBuf,
        /// Also enforce a manifest: adds its shapes and condition classes.
        #[arg(long)]
        manifest: Option<PathBuf>,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Print the compliance verdict of every scripted decision.
    Comply { scenario: PathBuf },
    /// Run a scenario and write the report directory.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the logged explanation of a violation.
    Explain {
        violation_id: String,
        #[arg(long)]
        log: PathBuf,
    },
    /// Solve a game fixture, optionally under a uniform sanction.
    Game {
        fixture: PathBuf,
        /// Sanction applied to every violating action of every player.
        #[arg(long)]
        sanction: Option<String>,
    },
    /// Audit log utilities.
    Audit {
        #[command(subcommand)]
        command: AuditCommand,
    },
    /// Put a proposed outcome to a vote among the scenario's agents.
    Vote { scenario: PathBuf, outcome: PathBuf },
}

#[derive(Subcommand)]
enum AuditCommand {
    /// Verify the hash chain and print the head hash.
    Verify { file: PathBuf },
}

type Outcome = Result<bool, String>;

fn read(p: &Path) -> Result<String, String> {
    std::fs::read_to_string(p).map_err(|e| format!("cannot read {}: {e}", p.display()))
}

fn cmd_validate(data: &Path, shapes: &Path, manifest: Option<&Path>, json: bool) -> Outcome {
    let mut g = parse_turtle(&read(data)?).map_err(|e| format!("{}: {e}", data.display()))?;
    let shapes_graph = parse_turtle(&read(shapes)?).map_err(|e| format!("{}: {e}", shapes.display()))?;
    let mut shapes = parse_shapes(&shapes_graph).map_err(|e| e.to_string())?;
    if let Some(m) = manifest {
        let m = parse_manifest(&read(m)?).map_err(|e| format!("{}: {e}", m.display()))?;
        shapes.extend(compile_to_shapes(&m).map_err(|e| e.to_string())?);
        g = materialize_conditions(&m, &g).map_err(|e| e.to_string())?;
    }
    let report = validate(&g, &shapes).map_err(|e| e.to_string())?;
    if json {
        println!("{}", serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?);
    } else {
        println!("conforms: {}", report.conforms);
        for r in &report.results {
            println!("{:?} {} {} {} [{}] {}", r.severity, r.kind, r.focus, r.path, r.norm_id, r.message);
        }
    }
    Ok(report.conforms)
}

fn scenario(p: &Path) -> Result<Scenario, String> {
    Scenario::load(p).map_err(|e| format!("{}: {e}", p.display()))
}

fn cmd_comply(p: &Path) -> Outcome {
    let out = run(&scenario(p)?).map_err(|e| e.to_string())?;
    for t in &out.ticks {
        for a in &t.agents {
            match (&a.verdict, a.blocked, &a.failure) {
                (Some(v), _, _) => print!("{}", v.to_record()),
                (None, true, _) => println!("blocked agent={} step={}", a.agent, t.tick),
                (None, _, Some(f)) => println!("failure agent={} step={} {f}", a.agent, t.tick),
                _ => {}
            }
        }
    }
    Ok(out.noncompliant_count() == 0)
}

fn cmd_run(p: &Path, dir: &Path) -> Outcome {
    let out = run(&scenario(p)?).map_err(|e| e.to_string())?;
    out.write_to(dir).map_err(|e| e.to_string())?;
    print!("{}", out.summary());
    for e in &out.explanations {
        println!("{}: {}", e.violation_id, e.text.trim_end());
    }
    Ok(out.clean())
}

fn cmd_explain(id: &str, log: &Path) -> Outcome {
    let log = AuditLog::read_from(log).map_err(|e| format!("{}: {e}", log.display()))?;
    for e in log.entries().iter().filter(|e| e.kind == AuditKind::Explanation) {
        let v: serde_json::Value = serde_json::from_slice(&e.payload).map_err(|e| e.to_string())?;
        if v["violation_id"] == id {
            print!("{}", v["text"].as_str().unwrap_or_default());
            println!("{}", serde_json::to_string_pretty(&v["counterfactual"]).map_err(|e| e.to_string())?);
            return Ok(true);
        }
    }
    Err(format!("no explanation for {id}"))
}

fn cmd_game(p: &Path, sanction: Option<&str>) -> Outcome {
    let fx = parse_game(&read(p)?).map_err(|e| format!("{}: {e}", p.display()))?;
    let g = &fx.game;
    print!("{}", pure_nash(g).describe(g));
    for i in 0..g.players.len() {
        match min_dominating_sanction(g, i) {
            Ok(s) => println!("min-dominating-sanction {} {s}", g.players[i]),
            Err(e) => println!("min-dominating-sanction {} - ({e})", g.players[i]),
        }
    }
    let s = match sanction {
        Some(text) => {
            let sigma = parse_rational(text).ok_or_else(|| format!("bad sanction `{text}`"))?;
            if sigma < num_rational::BigRational::from_integer(0.into()) {
                return Err(format!("sanction `{text}` is negative"));
            }
            let mut s = SanctionProfile::zero(g);
            for i in 0..g.players.len() {
                s.add_uniform(g, i, &sigma);
            }
            Some(s)
        }
        None => (fx.sanctions != SanctionProfile::zero(g)).then(|| fx.sanctions.clone()),
    };
    if let Some(s) = s {
        let g2 = transform(g, &s).map_err(|e| e.to_string())?;
        print!("{}", pure_nash(&g2).describe(&g2));
    }
    Ok(true)
}

fn cmd_audit_verify(p: &Path) -> Outcome {
    let bytes = std::fs::read(p).map_err(|e| format!("cannot read {}: {e}", p.display()))?;
    let v = verify_bytes(&bytes);
    println!("valid: {}", v.valid);
    println!("entries: {}", v.verified);
    if let Some(k) = v.first_broken {
        println!("first-broken: {k}");
    }
    println!("head: {}", hex::encode(v.head));
    Ok(v.valid)
}

fn cmd_vote(p: &Path, outcome: &Path) -> Outcome {
    let sc = scenario(p)?;
    let g = parse_turtle(&read(outcome)?).map_err(|e| format!("{}: {e}", outcome.display()))?;
    let label = outcome.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
    let v = vote_on(&sc, &label, &g).map_err(|e| e.to_string())?;
    for b in &v.ballots {
        println!("ballot {} {}", b.agent, if b.yes { "yes" } else { "no" });
    }
    for (a, why) in &v.excluded {
        println!("excluded {a} ({why})");
    }
    println!("tally {} quorum {} accepted {}", v.tally(), v.quorum, v.accepted);
    Ok(v.accepted)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Validate { data, shapes, manifest, json } => cmd_validate(data, shapes, manifest.as_deref(), *json),
        Command::Comply { scenario } => cmd_comply(scenario),
        Command::Run { scenario, out } => cmd_run(scenario, out),
        Command::Explain { violation_id, log } => cmd_explain(violation_id, log),
        Command::Game { fixture, sanction } => cmd_game(fixture, sanction.as_deref()),
        Command::Audit { command: AuditCommand::Verify { file } } => cmd_audit_verify(file),
        Command::Vote { scenario, outcome } => cmd_vote(scenario, outcome),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
