use std::fs;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use index_coding::bounds::{gain_bounds, mds_solution};
use index_coding::exact::{opt_multi, opt_q, verify_solution, SolutionJson, SolveOptions, DEFAULT_BUDGET, DEFAULT_FIELDS};
use index_coding::experiments::{run_gain_experiment, write_report, ExperimentConfig, Format};
use index_coding::field::Field;
use index_coding::graph::Graph;
use index_coding::heuristic::{
    build_compatibility_graph, clique_cover_exact, clique_cover_greedy, transmissions_from_partition,
};
use index_coding::instance::{HasSpec, Instance};
use index_coding::linalg::{MatrixJson, MatrixQ};
use index_coding::reductions::{check_coloring_equivalence, check_vc_identity, from_coloring, from_vertex_cover};
use index_coding::Error;

#[derive(Parser)]
#[command(name = "index-coding", version, about = "Linear index coding toolkit over small finite fields")]
struct Cli {
    /// Worker threads for parallel experiments (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress diagnostics on stderr other than errors.
    #[arg(long, global = true)]
    quiet: bool,
    /// Print a short human-readable summary instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct InputArg {
    /// Instance JSON file, or "-" for stdin.
    #[arg(long, default_value = "-")]
    input: String,
}

#[derive(Args)]
struct OutArg {
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Exact minimum number of transmissions over GF(q).
    Solve {
        #[command(flatten)]
        input: InputArg,
        #[arg(long)]
        field: u32,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Exact minimum over several fields.
    SolveMulti {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_FIELDS)]
        fields: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Memoryless transmissions from a clique cover of the compatibility graph.
    Heuristic {
        #[command(flatten)]
        input: InputArg,
        #[arg(long, conflicts_with = "greedy")]
        exact: bool,
        #[arg(long)]
        greedy: bool,
        #[arg(long, default_value_t = 2)]
        field: u32,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Coding-gain bounds.
    Bounds {
        #[command(flatten)]
        input: InputArg,
    },
    /// Check a solution against an instance.
    Verify {
        #[command(flatten)]
        input: InputArg,
        /// Solution JSON or matrix JSON (`{"q": .., "rows": [[..]]}`).
        #[arg(long)]
        solution: PathBuf,
    },
    /// Explicit solution with n minus (smallest has set) transmissions.
    Mds {
        #[command(flatten)]
        input: InputArg,
    },
    /// Instance from a graph's vertex cover problem.
    ReduceVc {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Instance from a graph's coloring problem.
    ReduceColor {
        #[arg(long)]
        graph: String,
        #[arg(long)]
        field: u32,
        #[arg(long)]
        check: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Random instance: client i wants packet i.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, required_unless_present = "has_prob", conflicts_with = "has_prob")]
        has_card: Option<usize>,
        #[arg(long)]
        has_prob: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        out: OutArg,
    },
    /// Built-in example instance.
    Builtin {
        #[arg(long, value_parser = ["table1", "table2"])]
        name: String,
        #[command(flatten)]
        out: OutArg,
    },
    /// Seeded random gain experiment.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

enum Failure {
    Lib(Error),
    /// Exit code with a message.
    Code(u8, String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::UnsupportedOrder(_) | Error::InvalidParam(_) | Error::UnknownBuiltin(_) => 2,
        Error::BudgetExceeded { .. } | Error::SearchBudgetExceeded(_) => 4,
        Error::DivideByZero => 5,
        _ => 3,
    }
}

struct Ctx {
    quiet: bool,
    human: bool,
}

impl Ctx {
    fn note(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }
}

fn read_text(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn read_instance(arg: &InputArg) -> Result<Instance, Failure> {
    Ok(Instance::parse(&read_text(&arg.input)?)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, format!("{text}\n"))?,
        None => {
            let mut so = io::stdout().lock();
            writeln!(so, "{text}")?;
        }
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let value = serde_json::to_value(v).expect("serializable");
    serde_json::to_string(&value).expect("serializable")
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SolutionFile {
    Solution(SolutionJson),
    Matrix(MatrixJson),
}

#[derive(Serialize)]
struct HeuristicOutput {
    method: &'static str,
    q: u32,
    transmissions: usize,
    blocks: Vec<Vec<usize>>,
    vectors: Vec<Vec<u32>>,
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = Ctx {
        quiet: cli.quiet,
        human: cli.human,
    };
    match cli.command {
        Command::Solve { input, field, budget, out } => {
            Field::new(field)?;
            let inst = read_instance(&input)?;
            match opt_q(&inst, field, SolveOptions::with_budget(budget)) {
                Ok(r) => {
                    let text = if ctx.human {
                        format!("OPT({field}) = {}", r.opt)
                    } else {
                        json(&r.to_json())
                    };
                    emit(&out.out, &text)
                }
                Err(Error::SearchBudgetExceeded(partial)) => {
                    emit(&out.out, &json(&partial.to_json()))?;
                    Err(Failure::Lib(Error::SearchBudgetExceeded(partial)))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::SolveMulti { input, fields, budget, out } => {
            for &q in &fields {
                Field::new(q)?;
            }
            let inst = read_instance(&input)?;
            let m = opt_multi(&inst, &fields, SolveOptions::with_budget(budget))?;
            let text = if ctx.human {
                match m.best {
                    Some((q, opt)) => format!("minimum over tested fields: {opt} (GF({q}))"),
                    None => "no field solved within budget".to_string(),
                }
            } else {
                json(&m.to_json())
            };
            emit(&out.out, &text)?;
            if m.any_budget_exceeded() {
                return Err(Failure::Code(4, "budget exceeded for at least one field".into()));
            }
            Ok(())
        }
        Command::Heuristic {
            input,
            exact,
            greedy,
            field,
            budget,
            out,
        } => {
            let f = Field::new(field)?;
            let inst = read_instance(&input)?;
            let (norm, map) = inst.normalize()?;
            let g = build_compatibility_graph(&norm)?;
            let use_greedy = greedy && !exact;
            let part = if use_greedy {
                clique_cover_greedy(&g)
            } else {
                clique_cover_exact(&g, budget)?
            };
            let phi = map.lift(&transmissions_from_partition(&norm, &part, &f)?);
            if !verify_solution(&inst, &phi)?.satisfied {
                return Err(Failure::Code(5, "heuristic transmissions failed verification".into()));
            }
            let report = HeuristicOutput {
                method: if use_greedy { "greedy" } else { "memoryless_exact" },
                q: field,
                transmissions: phi.rows(),
                blocks: part.blocks,
                vectors: phi.row_vecs(),
            };
            let text = if ctx.human {
                format!("{}: {} transmissions", report.method, report.transmissions)
            } else {
                json(&report)
            };
            emit(&out.out, &text)
        }
        Command::Bounds { input } => {
            let b = gain_bounds(&read_instance(&input)?)?;
            let text = if ctx.human {
                format!(
                    "gain in [{}/{}, {}], OPT in [{}, {}]",
                    b.gamma_lower.num, b.gamma_lower.den, b.gamma_upper, b.opt_lower, b.opt_upper
                )
            } else {
                json(&b)
            };
            emit(&None, &text)
        }
        Command::Verify { input, solution } => {
            let inst = read_instance(&input)?;
            let sol: SolutionFile = serde_json::from_str(&fs::read_to_string(&solution)?).map_err(Error::from)?;
            let (q, rows) = match sol {
                SolutionFile::Solution(s) => (s.q, s.vectors),
                SolutionFile::Matrix(m) => (m.q, m.rows),
            };
            let phi = MatrixQ::from_rows(&Field::new(q)?, inst.num_packets, &rows)?;
            let report = verify_solution(&inst, &phi)?;
            let text = if ctx.human {
                if report.satisfied {
                    "all clients satisfied".to_string()
                } else {
                    format!("unsatisfied clients: {:?}", report.unsatisfied())
                }
            } else {
                json(&report)
            };
            emit(&None, &text)?;
            if !report.satisfied {
                return Err(Failure::Code(3, "solution does not satisfy every client".into()));
            }
            Ok(())
        }
        Command::Mds { input } => {
            let (_, m) = mds_solution(&read_instance(&input)?)?;
            emit(&None, &json(&m.to_json()))
        }
        Command::ReduceVc { graph, check, budget } => {
            let g = Graph::parse(&read_text(&graph)?)?;
            if check {
                let c = check_vc_identity(&g, budget)?;
                let text = if ctx.human {
                    format!("opt2={} vc={} edges={} holds={}", c.opt2, c.vc, c.num_edges, c.holds)
                } else {
                    json(&c)
                };
                emit(&None, &text)?;
                if !c.holds {
                    return Err(Failure::Code(5, "vertex cover identity does not hold".into()));
                }
                Ok(())
            } else {
                emit(&None, &from_vertex_cover(&g)?.serialize())
            }
        }
        Command::ReduceColor {
            graph,
            field,
            check,
            budget,
        } => {
            let g = Graph::parse(&read_text(&graph)?)?;
            Field::new(field)?;
            if check {
                let c = check_coloring_equivalence(&g, field, budget)?;
                let text = if ctx.human {
                    format!("opt_is_2={} chi={} holds={}", c.opt_is_2, c.chi, c.holds)
                } else {
                    json(&c)
                };
                emit(&None, &text)?;
                if !c.holds {
                    return Err(Failure::Code(5, "coloring equivalence does not hold".into()));
                }
                Ok(())
            } else {
                emit(&None, &from_coloring(&g)?.serialize())
            }
        }
        Command::Gen {
            n,
            has_card,
            has_prob,
            seed,
            out,
        } => {
            let spec = match (has_card, has_prob) {
                (Some(d), _) => HasSpec::FixedCard(d),
                (None, Some(p)) => HasSpec::IncludeProb(p),
                (None, None) => unreachable!("clap requires one of the two"),
            };
            emit(&out.out, &Instance::gen_random(n, spec, seed)?.serialize())
        }
        Command::Builtin { name, out } => emit(&out.out, &Instance::builtin(&name)?.serialize()),
        Command::Experiment { config, out, format } => {
            let cfg: ExperimentConfig = serde_json::from_str(&fs::read_to_string(&config)?).map_err(Error::from)?;
            let report = run_gain_experiment(&cfg)?;
            let format = match format {
                ReportFormat::Json => Format::Json,
                ReportFormat::Csv => Format::Csv,
            };
            write_report(&report, format, &out)?;
            let unsolved: usize = report.aggregates.iter().map(|a| a.budget_exceeded).sum();
            if unsolved > 0 {
                ctx.note(&format!("{unsolved} method runs exceeded the budget"));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Code(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}
