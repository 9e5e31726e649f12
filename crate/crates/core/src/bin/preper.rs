use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use preper::benedetto::partition;
use preper::census::run_census;
use preper::families::{
    ap3_primes_in_interval, inputs_at, make_instance, verify_instance, FamilyTag,
};
use preper::{compute_preper, Rational};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFICATION: u8 = 2;
const EXIT_ANOMALY: u8 = 3;

/// Rational preperiodic points of z^2 + c.
#[derive(Parser)]
#[command(name = "preper", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the graph of rational preperiodic points for one parameter.
    Compute {
        /// Parameter c as M/D or an integer.
        #[arg(long, allow_hyphen_values = true)]
        c: Rational,
        /// Write the graph in DOT format to this file.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Verify instances of one of the infinite families.
    Family {
        /// 4(1,1), 4(2), 6(1,1), 6(2), 6(3), 8(2,1,1) or empty.
        #[arg(long)]
        graph: FamilyTag,
        #[arg(long, default_value_t = 1)]
        count: usize,
        /// 1-based index of the first instance.
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
        start: u64,
        #[arg(long)]
        json: bool,
    },
    /// Print the place partition, local radii and the point-count bound.
    Bound {
        #[arg(long, allow_hyphen_values = true)]
        c: Rational,
        #[arg(long)]
        json: bool,
    },
    /// Scan c = m/d^2 for d <= D and |m| <= M into a JSONL file.
    Census {
        #[arg(long = "max-den", value_parser = clap::value_parser!(u64).range(1..))]
        max_den: u64,
        #[arg(long = "max-num")]
        max_num: u64,
        #[arg(long)]
        out: PathBuf,
        /// Continue after the last complete record in the output file.
        #[arg(long)]
        resume: bool,
        /// Exit with status 3 when anomalies are found.
        #[arg(long)]
        strict: bool,
    },
    /// First progression p, p+k, p+2k of primes inside (N, 2N).
    Ap3 {
        #[arg(long)]
        n: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let usage = err.use_stderr();
            let _ = err.print();
            return if usage {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, String> {
    match command {
        Command::Compute { c, dot, json } => {
            let graph = compute_preper(&c);
            let label = graph.label();
            if let Some(path) = dot {
                std::fs::write(&path, graph.to_dot())
                    .map_err(|e| format!("{}: {e}", path.display()))?;
            }
            let points: Vec<&Rational> = graph.vertices().collect();
            if json {
                let edges: Vec<[&Rational; 2]> = graph.edges().map(|(a, b)| [a, b]).collect();
                let out = json!({
                    "c": c,
                    "label": label.to_string(),
                    "n_points": graph.len(),
                    "cycles": label.cycles,
                    "certificate": label.certificate,
                    "points": points,
                    "edges": edges,
                });
                println!("{out}");
            } else {
                println!("c = {c}");
                println!("label: {label}");
                println!("certificate: {}", label.certificate);
                for (x, y) in graph.edges() {
                    println!("  {x} -> {y}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Family {
            graph,
            count,
            start,
            json,
        } => {
            let mut failed = false;
            for index in start as usize..start as usize + count {
                let inst =
                    make_instance(graph, inputs_at(graph, index)).map_err(|e| e.to_string())?;
                let report = verify_instance(&inst);
                failed |= !report.containment;
                if json {
                    println!(
                        "{}",
                        serde_json::to_string(&report).expect("reports serialize")
                    );
                } else {
                    let bound = report.bound.map_or("n/a".to_string(), |b| b.to_string());
                    println!(
                        "{} {} c = {}: label {} ({} points, bound {}), containment {}, exact {}",
                        report.family,
                        report.inputs,
                        report.c,
                        report.label,
                        report.n_points,
                        bound,
                        if report.containment { "ok" } else { "FAILED" },
                        if report.exact { "yes" } else { "no" },
                    );
                    for x in &report.missing {
                        println!("  missing {x}");
                    }
                }
            }
            Ok(if failed {
                ExitCode::from(EXIT_VERIFICATION)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Bound { c, json } => {
            let part = partition(&c);
            if json {
                println!(
                    "{}",
                    serde_json::to_string(&part).expect("partitions serialize")
                );
            } else {
                println!("c = {c}");
                for b in &part.bounded {
                    println!("bounded {}: R = {}", b.place, b.radius);
                }
                for u in &part.uncontrolled {
                    println!("uncontrolled {}: r = {}^{}", u.prime, u.prime, u.radius_exp);
                }
                match part.bound.value() {
                    Some(b) => println!("bound: {b}"),
                    None => println!("bound: not applicable (no uncontrolled prime)"),
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Census {
            max_den,
            max_num,
            out,
            resume,
            strict,
        } => {
            let summary = run_census(&out, max_den, max_num, resume).map_err(|e| e.to_string())?;
            println!(
                "{} records written, {} resumed, {} anomalies",
                summary.written,
                summary.resumed,
                summary.anomalies.len()
            );
            for a in &summary.anomalies {
                eprintln!(
                    "anomaly: {}",
                    serde_json::to_string(a).expect("anomalies serialize")
                );
            }
            Ok(if strict && !summary.anomalies.is_empty() {
                ExitCode::from(EXIT_ANOMALY)
            } else {
                ExitCode::SUCCESS
            })
        }
        Command::Ap3 { n } => {
            match ap3_primes_in_interval(n) {
                Some((p, q, r)) => println!("{p} {q} {r}"),
                None => println!("none"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
