//! `ucqa`: repairs and consistent query answers from the command line.
//!
//! Exit codes: 0 yes (is a repair, consistently true, done), 1 no,
//! 2 unreadable or malformed input, 3 constraint class not supported by the
//! subcommand, 4 enumeration or CNF cap exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use ucqa::cqa::{CqaContext, CqaError, CqaOptions};
use ucqa::grounding::Grounding;
use ucqa::oracle::{
    brute_cqa, enumerate_repairs, gen_random, reduce_3col, reduce_qbf, repairs_by_kept_facts, OracleError, Profile, Qbf,
    Scenario,
};
use ucqa::parser::{parse_constraints, parse_fact_list, parse_instance, parse_query, parse_schema, ParseError};
use ucqa::repair::{check_repair, construct_repair_traced, BChooser, Discard, FactOrder, RepairError, RepairStrategy};
use ucqa::{eval_query, Instance, Schema, UniversalConstraint};

#[derive(Parser)]
#[command(name = "ucqa", version, about = "Repairs and consistent query answers under universal constraints")]
struct Cli {
    /// Print JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Inputs {
    #[arg(short, long)]
    schema: PathBuf,
    #[arg(short, long)]
    constraints: PathBuf,
    #[arg(short, long)]
    instance: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Facts and negated facts reachable through conflicts.
    Hull(Inputs),
    /// Ground rules of the constraints over the hull.
    Rules(Inputs),
    /// The extended conflict hypergraph.
    Graph {
        #[command(flatten)]
        inputs: Inputs,
        /// Graphviz output (default is JSON).
        #[arg(long)]
        dot: bool,
    },
    /// Decide whether a candidate instance is a repair.
    CheckRepair {
        #[command(flatten)]
        inputs: Inputs,
        /// Candidate repair, in instance format.
        #[arg(long)]
        candidate: PathBuf,
    },
    /// Build one repair with the banned-set algorithm.
    Repair {
        #[command(flatten)]
        inputs: Inputs,
        /// Visiting order, an instance-format file listing every fact once.
        #[arg(long, conflicts_with = "seed")]
        order: Option<PathBuf>,
        /// Choices for `b`, one `0`/`1` per visited fact; missing ones are 0.
        #[arg(long, conflicts_with = "seed")]
        b_script: Option<PathBuf>,
        /// Shuffle the order and draw the choices from this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Print every step.
        #[arg(long)]
        trace: bool,
    },
    /// Enumerate all repairs by exhaustive search.
    Repairs {
        #[command(flatten)]
        inputs: Inputs,
        #[command(flatten)]
        search: Search,
    },
    /// Consistent answer to a closed query.
    Cqa {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        query: PathBuf,
        /// Dump supports, blocks and the witness combination as JSON.
        #[arg(long)]
        explain: bool,
        /// Largest CNF accepted, in clauses.
        #[arg(long, default_value_t = CqaOptions::default().cnf_cap)]
        cnf_cap: usize,
    },
    /// Consistent answer by checking every repair.
    OracleCqa {
        #[command(flatten)]
        inputs: Inputs,
        #[arg(short, long)]
        query: PathBuf,
        #[command(flatten)]
        search: Search,
    },
    /// Write a generated scenario as schema/constraints/instance/query files.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Output directory; the files are printed when omitted.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Search {
    /// Largest hull searched by the subset method.
    #[arg(long, default_value_t = ucqa::oracle::DEFAULT_CAP)]
    cap: usize,
    #[arg(long, value_enum, default_value_t = Method::Subset)]
    method: Method,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    /// Subsets of the hull; any constraint class, bounded by --cap.
    Subset,
    /// Subsets of the instance that are kept; full TGDs and denials only.
    Kept,
}

impl Search {
    fn repairs(&self, l: &Loaded) -> Result<Vec<Instance>, Failure> {
        Ok(match self.method {
            Method::Subset => enumerate_repairs(&l.instance, &l.constraints, self.cap)?,
            Method::Kept => repairs_by_kept_facts(&l.instance, &l.constraints)?,
        })
    }
}

#[derive(Subcommand)]
enum GenKind {
    /// Repairs drop the query fact iff the graph is 3-colourable.
    #[command(name = "3col")]
    ThreeCol {
        /// Number of vertices, named 0..n.
        #[arg(long)]
        vertices: usize,
        /// Edges as `a-b`, comma separated.
        #[arg(long, value_delimiter = ',')]
        edges: Vec<String>,
    },
    /// The query is consistently true iff the formula is valid.
    Qbf {
        /// Universally quantified variables 1..=n.
        #[arg(long)]
        universal: usize,
        /// Existentially quantified variables after them.
        #[arg(long)]
        existential: usize,
        /// Clauses of three signed variable numbers, e.g. `-1 4 2,-2 -5 3`.
        #[arg(long, value_delimiter = ',')]
        clauses: Vec<String>,
    },
    /// A random small scenario.
    Random {
        #[arg(long, value_enum)]
        profile: ProfileArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 12)]
        max_hull: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileArg {
    Denial,
    AcyclicTgd,
    Jd,
    CyclicTgd,
    Universal,
}

impl From<ProfileArg> for Profile {
    fn from(p: ProfileArg) -> Profile {
        match p {
            ProfileArg::Denial => Profile::Denial,
            ProfileArg::AcyclicTgd => Profile::AcyclicTgd,
            ProfileArg::Jd => Profile::Jd,
            ProfileArg::CyclicTgd => Profile::CyclicTgd,
            ProfileArg::Universal => Profile::Universal,
        }
    }
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<RepairError> for Failure {
    fn from(e: RepairError) -> Self {
        let code = match e {
            RepairError::UnsupportedClass { .. } | RepairError::NotDenial { .. } => 3,
            RepairError::BadOrder(_) | RepairError::NotARepair(_) => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<CqaError> for Failure {
    fn from(e: CqaError) -> Self {
        let code = match e {
            CqaError::UnsupportedClass(_) | CqaError::MixedRelations(..) => 3,
            CqaError::CnfCap(_) => 4,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        let code = match e {
            OracleError::Cap { .. } => 4,
            OracleError::Unsupported(_) => 3,
            _ => 2,
        };
        Failure { code, message: e.to_string() }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

struct Loaded {
    schema: Schema,
    constraints: Vec<UniversalConstraint>,
    instance: Instance,
}

/// Reads `path` and parses it, prefixing errors with the file name.
fn parsed<T>(path: &Path, parse: impl FnOnce(&str) -> Result<T, ParseError>) -> Result<T, Failure> {
    parse(&read(path)?).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

impl Inputs {
    fn load(&self) -> Result<Loaded, Failure> {
        let schema = parsed(&self.schema, parse_schema)?;
        let constraints = parsed(&self.constraints, |t| parse_constraints(t, &schema))?;
        let instance = parsed(&self.instance, |t| parse_instance(t, &schema))?;
        Ok(Loaded { schema, constraints, instance })
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let json = cli.json;
    match cli.command {
        Command::Hull(inputs) => {
            let l = inputs.load()?;
            let hull = Grounding::new(&l.instance, &l.constraints).hull;
            if json {
                println!("{}", pretty(&hull));
            } else {
                print!("{hull}");
            }
            Ok(0)
        }
        Command::Rules(inputs) => {
            let l = inputs.load()?;
            let g = Grounding::new(&l.instance, &l.constraints);
            if json {
                println!("{}", pretty(&g.rules));
            } else {
                for r in &g.rules {
                    println!("{r}");
                }
            }
            Ok(0)
        }
        Command::Graph { inputs, dot } => {
            let l = inputs.load()?;
            let hg = Grounding::new(&l.instance, &l.constraints).hypergraph();
            if dot {
                print!("{}", hg.to_dot());
            } else {
                println!("{}", hg.to_json());
            }
            Ok(0)
        }
        Command::CheckRepair { inputs, candidate } => {
            let l = inputs.load()?;
            let cand = parsed(&candidate, |t| parse_instance(t, &l.schema))?;
            let report = check_repair(&l.instance, &cand, &l.constraints)?;
            if json {
                println!("{}", pretty(&report));
            } else {
                println!("{report}");
            }
            Ok(u8::from(!report.verdict))
        }
        Command::Repair { inputs, order, b_script, seed, trace } => {
            let l = inputs.load()?;
            let strategy = match seed {
                Some(s) => RepairStrategy::seeded(s),
                None => {
                    let fact_order = match &order {
                        Some(p) => FactOrder::Explicit(parsed(p, |t| parse_fact_list(t, &l.schema))?),
                        None => FactOrder::Canonical,
                    };
                    let b_chooser = match &b_script {
                        Some(p) => BChooser::Scripted(b_file(p)?),
                        None => BChooser::AlwaysFalse,
                    };
                    RepairStrategy { fact_order, b_chooser }
                }
            };
            let t = construct_repair_traced(&l.instance, &l.constraints, &strategy)?;
            if json {
                let v = if trace { json!(t) } else { json!({ "repair": t.result }) };
                println!("{}", pretty(&v));
            } else {
                if trace {
                    for s in &t.steps {
                        let verdict = match s.discarded {
                            Some(Discard::Inconsistent) => "discard, inconsistent",
                            Some(Discard::Fresh) => "discard, brings new facts",
                            Some(Discard::Banned) => "discard, contains a banned set",
                            None => "keep",
                        };
                        print!("{} b={} closure {} -> {verdict}", s.fact, u8::from(s.b), s.closure);
                        match &s.new_banned {
                            Some(b) => println!(", banned {b}"),
                            None => println!(),
                        }
                    }
                }
                println!("{}", t.result);
            }
            Ok(0)
        }
        Command::Repairs { inputs, search } => {
            let l = inputs.load()?;
            let reps = search.repairs(&l)?;
            if json {
                println!("{}", pretty(&reps));
            } else {
                for r in &reps {
                    println!("{}", r);
                }
            }
            Ok(0)
        }
        Command::Cqa { inputs, query, explain, cnf_cap } => {
            let l = inputs.load()?;
            let q = parsed(&query, |t| parse_query(t, &l.schema))?;
            let ctx = CqaContext::new(&l.instance, &l.constraints, CqaOptions { cnf_cap, ..CqaOptions::default() })?;
            let a = ctx.answer(&q)?;
            if explain {
                println!("{}", ctx.explain_json(&a));
            } else if json {
                let witness = a.witness.as_ref().map(|w| &w.repair);
                println!("{}", pretty(&json!({ "consistent": a.consistent, "witness": witness })));
            } else if a.consistent {
                println!("consistently true");
            } else {
                println!("not consistently true");
                if let Some(w) = &a.witness {
                    println!("witness repair {}", w.repair);
                }
            }
            Ok(u8::from(!a.consistent))
        }
        Command::OracleCqa { inputs, query, search } => {
            let l = inputs.load()?;
            let q = parsed(&query, |t| parse_query(t, &l.schema))?;
            let yes = match search.method {
                Method::Subset => brute_cqa(&q, &l.instance, &l.constraints, search.cap)?,
                Method::Kept => search.repairs(&l)?.iter().all(|r| eval_query(&q, r)),
            };
            if json {
                println!("{}", pretty(&json!({ "consistent": yes })));
            } else {
                println!("{}", if yes { "consistently true" } else { "not consistently true" });
            }
            Ok(u8::from(!yes))
        }
        Command::Gen { kind, out } => {
            let sc = match kind {
                GenKind::ThreeCol { vertices, edges } => {
                    let es = edges.iter().filter(|e| !e.is_empty()).map(|e| parse_edge(e)).collect::<Result<Vec<_>, _>>()?;
                    reduce_3col(vertices, &es)?
                }
                GenKind::Qbf { universal, existential, clauses } => {
                    let clauses = clauses.iter().map(|c| parse_clause(c)).collect::<Result<Vec<_>, _>>()?;
                    reduce_qbf(&Qbf { universal, existential, clauses })?
                }
                GenKind::Random { profile, seed, max_hull } => gen_random(seed, profile.into(), max_hull),
            };
            write_scenario(&sc, out.as_deref(), json)?;
            Ok(0)
        }
    }
}

fn b_file(path: &Path) -> Result<Vec<bool>, Failure> {
    read(path)?
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .map(|tok| match tok {
            "1" | "true" => Ok(true),
            "0" | "false" => Ok(false),
            other => Err(Failure::input(format!("{}: expected 0 or 1, found {other}", path.display()))),
        })
        .collect()
}

fn parse_edge(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || Failure::input(format!("edge {s:?} is not of the form a-b"));
    let (a, b) = s.trim().split_once('-').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn parse_clause(s: &str) -> Result<[i32; 3], Failure> {
    let lits: Vec<i32> = s
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Failure::input(format!("clause {s:?}: {t} is not a literal"))))
        .collect::<Result<_, _>>()?;
    <[i32; 3]>::try_from(lits).map_err(|_| Failure::input(format!("clause {s:?} needs exactly three literals")))
}

fn write_scenario(sc: &Scenario, out: Option<&Path>, json: bool) -> Result<(), Failure> {
    let t = sc.texts();
    let files = [("schema.txt", &t.schema), ("constraints.txt", &t.constraints), ("instance.txt", &t.instance), ("query.txt", &t.query)];
    match out {
        Some(dir) => {
            let io = |e: std::io::Error| Failure::input(format!("{}: {e}", dir.display()));
            fs::create_dir_all(dir).map_err(io)?;
            for (name, body) in files {
                fs::write(dir.join(name), body).map_err(io)?;
            }
        }
        None if json => println!("{}", pretty(&json!({
            "schema": t.schema, "constraints": t.constraints, "instance": t.instance, "query": t.query, "marked": sc.marked,
        }))),
        None => {
            for (name, body) in files {
                println!("# {name}\n{}", body.trim_end());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
