//! `rado`: decide partition regularity of rational matrices from the shell.
//!
//! Exit codes: 0 the property holds, 1 it fails, 2 usage or input error,
//! 3 undecided within the node budget.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use rado::columns::{
    first_entries_from_certificate, first_entries_shape, verify_certificate, Certificate,
};
use rado::decide::{self, Decision, IntegerBReport, Verdict};
use rado::feasibility::{feasible_scalars_all_partitions, BlockScale, ScalingTemplate};
use rado::json::{
    certificate_from_json, decision_to_json, integer_b_to_json, matrix_to_json, scalar_set_to_json,
    to_line,
};
use rado::oracle::{self, Colouring};
use rado::rational::to_canonical;
use rado::search::{SearchLimits, DEFAULT_MAX_NODES};
use rado::QMatrix;

const HOLDS: u8 = 0;
const FAILS: u8 = 1;
const INPUT_ERROR: u8 = 2;
const UNDECIDED: u8 = 3;

#[derive(Parser)]
#[command(
    name = "rado",
    version,
    about = "Partition regularity of rational matrices"
)]
struct Cli {
    /// Search budget: candidate blocks for decisions, partitions for `scalars`.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_NODES)]
    cap: u64,
    /// Print a single JSON line instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for the partition search.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel partition regularity (the columns condition).
    Kpr { file: PathBuf },
    /// Image partition regularity.
    Ipr { file: PathBuf },
    /// Doubly image partition regularity; reports the scalar b.
    DoublyIpr { file: PathBuf },
    /// Doubly kernel partition regularity of a pair.
    DoublyKpr { a: PathBuf, b: PathBuf },
    /// Multiply kernel partition regularity of two or more matrices.
    MultiplyKpr {
        #[arg(num_args = 2.., required = true)]
        files: Vec<PathBuf>,
    },
    /// Check a columns-condition certificate against a matrix.
    Certify { file: PathBuf, cert: PathBuf },
    /// Build the first-entries matrix G with AG = 0 from a certificate.
    FirstEntries { file: PathBuf, cert: PathBuf },
    /// All values of b for which (A -bI) meets the columns condition.
    Scalars { file: PathBuf },
    /// Integrality of b for an integer doubly IPR matrix.
    IntegerB { file: PathBuf },
    /// Finite colouring checks.
    #[command(subcommand)]
    Oracle(OracleCommand),
}

#[derive(Args)]
struct SystemArgs {
    /// Matrices A_1 ... A_k of the system A_1 x_1 + ... + A_k x_k = 0.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Append -I as a last matrix, giving the pair (A, -I) for x and Ax.
    #[arg(long)]
    image: bool,
    /// Entries range over 1..=N.
    #[arg(long)]
    bound: u64,
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Search for a monochromatic solution under a colouring.
    Solve {
        #[command(flatten)]
        system: SystemArgs,
        /// mod:M, gamma:P, startparity:B or table:FILE.
        #[arg(long)]
        colouring: String,
    },
    /// Check that every colouring of 1..=N has a monochromatic solution.
    Sweep {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        colours: u64,
    },
    /// Search for a colouring of 1..=N with no monochromatic solution.
    Falsify {
        #[command(flatten)]
        system: SystemArgs,
        #[arg(long)]
        colours: u64,
    },
}

struct Output {
    code: u8,
    json: Value,
    text: String,
}

fn read_matrix(path: &Path) -> Result<QMatrix> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    rado::io::parse_matrix(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_certificate(path: &Path) -> Result<Certificate> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    certificate_from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_colouring(spec: &str) -> Result<Colouring> {
    let Some((kind, arg)) = spec.split_once(':') else {
        bail!("colouring `{spec}` should look like mod:M, gamma:P, startparity:B or table:FILE");
    };
    let number = || -> Result<u64> {
        arg.parse()
            .with_context(|| format!("`{arg}` is not a non-negative integer"))
    };
    Ok(match kind {
        "mod" => Colouring::modulo(number()?)?,
        "gamma" => Colouring::base_start(number()?)?,
        "startparity" => Colouring::start_parity(number()?)?,
        "table" => {
            let text = std::fs::read_to_string(arg).with_context(|| format!("reading {arg}"))?;
            Colouring::table_from_text(&text).with_context(|| format!("parsing {arg}"))?
        }
        other => bail!("unknown colouring kind `{other}`"),
    })
}

fn verdict_code(v: &Verdict) -> u8 {
    match v {
        Verdict::Yes => HOLDS,
        Verdict::No => FAILS,
        Verdict::Undecided { .. } => UNDECIDED,
    }
}

fn certificate_text(cert: &Certificate) -> String {
    let mut s = format!("partition: {}\n", cert.partition);
    for (t, w) in cert.witnesses.iter().enumerate() {
        let terms: Vec<String> = w
            .iter()
            .map(|(i, c)| format!("{} * c{}", to_canonical(c), i + 1))
            .collect();
        let rhs = if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        };
        let _ = writeln!(s, "block {} sum = {rhs}", t + 2);
    }
    s
}

fn decision_text(d: &Decision) -> String {
    let mut s = String::new();
    match d.verdict {
        Verdict::Yes => s.push_str("YES\n"),
        Verdict::No => s.push_str("NO (exhaustive)\n"),
        Verdict::Undecided { cap } => {
            let _ = writeln!(s, "UNDECIDED (budget of {cap} nodes exhausted)");
        }
    }
    if !d.scalars.is_empty() {
        let parts: Vec<String> = d
            .scalars
            .iter()
            .map(|(n, q)| format!("{n} = {}", to_canonical(q)))
            .collect();
        let note = match d.unique {
            Some(false) => " (one of many for this partition)",
            _ => "",
        };
        let _ = writeln!(s, "{}{note}", parts.join(", "));
    }
    if let Some(c) = &d.certificate {
        s.push_str(&certificate_text(c));
    }
    if let Some(m) = &d.assembled {
        if !d.scalars.is_empty() {
            s.push_str("assembled matrix:\n");
            s.push_str(&m.to_string());
        }
    }
    let _ = writeln!(s, "nodes: {}", d.nodes);
    s
}

fn decision_output(d: Decision) -> Output {
    Output {
        code: verdict_code(&d.verdict),
        json: decision_to_json(&d),
        text: decision_text(&d),
    }
}

fn system(args: &SystemArgs) -> Result<Vec<QMatrix>> {
    let mut mats = args
        .files
        .iter()
        .map(|p| read_matrix(p))
        .collect::<Result<Vec<_>>>()?;
    if args.image {
        let u = mats[0].rows();
        mats.push(QMatrix::identity(u).negated());
    }
    Ok(mats)
}

fn run(cli: &Cli) -> Result<Output> {
    let limits = SearchLimits {
        max_nodes: cli.cap,
        threads: cli.threads,
    };
    Ok(match &cli.command {
        Command::Kpr { file } => decision_output(decide::is_kpr(&read_matrix(file)?, &limits)?),
        Command::Ipr { file } => decision_output(decide::is_ipr(&read_matrix(file)?, &limits)?),
        Command::DoublyIpr { file } => {
            decision_output(decide::doubly_ipr(&read_matrix(file)?, &limits)?)
        }
        Command::DoublyKpr { a, b } => decision_output(decide::doubly_kpr(
            &read_matrix(a)?,
            &read_matrix(b)?,
            &limits,
        )?),
        Command::MultiplyKpr { files } => {
            let mats = files
                .iter()
                .map(|p| read_matrix(p))
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&QMatrix> = mats.iter().collect();
            decision_output(decide::multiply_kpr(&refs, &limits)?)
        }
        Command::Certify { file, cert } => {
            let a = read_matrix(file)?;
            let c = read_certificate(cert)?;
            let ok = verify_certificate(&a, &c);
            Output {
                code: if ok { HOLDS } else { FAILS },
                json: json!({ "verified": ok }),
                text: if ok {
                    "verified\n".into()
                } else {
                    "certificate does not verify\n".into()
                },
            }
        }
        Command::FirstEntries { file, cert } => {
            let a = read_matrix(file)?;
            let c = read_certificate(cert)?;
            if !verify_certificate(&a, &c) {
                return Ok(Output {
                    code: FAILS,
                    json: json!({ "verified": false }),
                    text: "certificate does not verify\n".into(),
                });
            }
            let g = first_entries_from_certificate(&a, &c)?.into_matrix();
            let unital = first_entries_shape(&g) == Some(true);
            Output {
                code: HOLDS,
                json: json!({ "verified": true, "unital": unital, "g": matrix_to_json(&g) }),
                text: g.to_string(),
            }
        }
        Command::Scalars { file } => {
            let a = read_matrix(file)?;
            let neg_i = QMatrix::identity(a.rows()).negated();
            let t = ScalingTemplate::from_blocks(&[
                (&a, BlockScale::Fixed),
                (&neg_i, BlockScale::Shared),
            ])?;
            match feasible_scalars_all_partitions(&t, Some(cli.cap))? {
                Ok(set) => Output {
                    code: HOLDS,
                    json: json!({ "complete": true, "b": scalar_set_to_json(&set) }),
                    text: format!("b in {set}\n"),
                },
                Err(cap) => Output {
                    code: UNDECIDED,
                    json: json!({ "complete": false, "cap": cap.cap }),
                    text: format!("UNDECIDED ({cap})\n"),
                },
            }
        }
        Command::IntegerB { file } => {
            let report = decide::integer_b_analysis(&read_matrix(file)?, &limits)?;
            let (code, text) = match &report {
                IntegerBReport::NotDoublyIpr { .. } => (FAILS, "not doubly IPR\n".to_string()),
                IntegerBReport::Undecided { decision } => (UNDECIDED, decision_text(decision)),
                IntegerBReport::HypothesisFails {
                    zero_subset,
                    decision,
                } => {
                    let cols: Vec<String> =
                        zero_subset.iter().map(|i| (i + 1).to_string()).collect();
                    let b = decision.scalar("b").map(to_canonical).unwrap_or_default();
                    (
                        FAILS,
                        format!(
                            "columns {{{}}} sum to zero; b = {b} need not be an integer\n",
                            cols.join(",")
                        ),
                    )
                }
                IntegerBReport::Holds {
                    b,
                    b_is_positive_integer,
                    row,
                    row_sum,
                    identity_holds,
                    ..
                } => {
                    let ok = *b_is_positive_integer && *identity_holds;
                    let mut s = format!("b = {}\n", to_canonical(b));
                    if let (Some(t), Some(sum)) = (row, row_sum) {
                        let _ = writeln!(
                            s,
                            "row {}: first-block entries sum to {}",
                            t + 1,
                            to_canonical(sum)
                        );
                    }
                    let _ = writeln!(
                        s,
                        "positive integer: {b_is_positive_integer}, identity: {identity_holds}"
                    );
                    (if ok { HOLDS } else { FAILS }, s)
                }
            };
            Output {
                code,
                json: integer_b_to_json(&report),
                text,
            }
        }
        Command::Oracle(cmd) => run_oracle(cmd)?,
    })
}

fn run_oracle(cmd: &OracleCommand) -> Result<Output> {
    Ok(match cmd {
        OracleCommand::Solve {
            system: args,
            colouring,
        } => {
            let colouring = parse_colouring(colouring)?;
            let mats = system(args)?;
            let refs: Vec<&QMatrix> = mats.iter().collect();
            match oracle::find_monochromatic_solution(&refs, &colouring, args.bound)? {
                Some(w) => {
                    if !w.verify(&refs, &colouring) {
                        bail!("internal error: witness fails re-verification");
                    }
                    let mut text = String::from("found\n");
                    for (t, (x, c)) in w.vectors.iter().zip(&w.colours).enumerate() {
                        let xs: Vec<String> = x.iter().map(u64::to_string).collect();
                        let _ = writeln!(text, "x{} = ({}) colour {c}", t + 1, xs.join(", "));
                    }
                    Output {
                        code: HOLDS,
                        json: json!({ "found": true, "bound": args.bound, "witness": w }),
                        text,
                    }
                }
                None => Output {
                    code: FAILS,
                    json: json!({ "found": false, "bound": args.bound }),
                    text: format!("no monochromatic solution with entries <= {}\n", args.bound),
                },
            }
        }
        OracleCommand::Sweep {
            system: args,
            colours,
        } => {
            let mats = system(args)?;
            let refs: Vec<&QMatrix> = mats.iter().collect();
            let all = oracle::verify_all_colourings(&refs, *colours, args.bound)?;
            Output {
                code: if all { HOLDS } else { FAILS },
                json: json!({ "all_colourings_solved": all, "colours": colours, "bound": args.bound }),
                text: if all {
                    format!(
                        "every {colours}-colouring of 1..={} has a monochromatic solution\n",
                        args.bound
                    )
                } else {
                    format!("some {colours}-colouring of 1..={} has none\n", args.bound)
                },
            }
        }
        OracleCommand::Falsify {
            system: args,
            colours,
        } => {
            let mats = system(args)?;
            let refs: Vec<&QMatrix> = mats.iter().collect();
            match oracle::search_witness_colouring(&refs, *colours, args.bound)? {
                Some(w) => Output {
                    code: FAILS,
                    json: json!({ "witness": w }),
                    text: w.to_text(),
                },
                None => Output {
                    code: HOLDS,
                    json: json!({ "witness": null, "colours": colours, "bound": args.bound }),
                    text: format!(
                        "no witness colouring with {colours} colours up to {}\n",
                        args.bound
                    ),
                },
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", to_line(&out.json));
            } else {
                print!("{}", out.text);
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}
