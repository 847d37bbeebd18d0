use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ccancel::io::{parse_map, parse_witness, to_pretty, witness_to_string};
use ccancel::*;
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "ccancel", version, about = "Choice-free cancellation constructions on piecewise progression maps")]
struct Cli {
    /// Step budget for every walk.
    #[arg(long, global = true, env = "CCANCEL_FUEL", default_value_t = 1_000_000)]
    fuel: u64,
    /// Seed for generated instances and relabellings.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the result here instead of standard output.
    #[arg(short = 'o', global = true)]
    output: Option<PathBuf>,
    /// Elements per countable slot to sample or draw.
    #[arg(long, global = true)]
    prefix: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a map or a witness file.
    Verify { file: PathBuf },
    /// Cantor-Schroder-Bernstein: a bijection from injections f : A -> B and g : B -> A.
    Csb {
        #[arg(long)]
        f: PathBuf,
        #[arg(long)]
        g: PathBuf,
    },
    /// From a bijection A + C -> B + C with C finite, a bijection A -> B.
    Subtract {
        #[arg(long)]
        f: PathBuf,
        /// Slot counts of A and B as `NA,NB`; the remaining slots form C.
        #[arg(long)]
        split: String,
    },
    /// From injections s : B -> A and t : n x A -> n x B, a bijection A -> B.
    Tarski {
        #[arg(long)]
        s: PathBuf,
        #[arg(long)]
        t: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// From a bijection f : n x A -> n x B, a bijection A -> B.
    Divide {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        f: PathBuf,
        /// `greedy` for any n; `parens` or `two-omega` for n = 2.
        #[arg(long, default_value = "greedy")]
        scheme: String,
    },
    /// From an injection t : n x A -> n x B, an injection A -> B.
    DivideIneq {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        t: PathBuf,
    },
    /// Generate an instance, run a construction on it and check the result.
    Harness {
        /// Instance spec as inline JSON or a path to a JSON file.
        #[arg(long)]
        spec: String,
        /// divide, divide2, divide2-2omega, divide-ineq, csb or mutant.
        #[arg(long)]
        construction: Option<String>,
        /// Relabellings for the equivariance check (finite instances).
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Also write the generated instance here.
        #[arg(long)]
        instance_out: Option<PathBuf>,
    },
    /// Graphviz picture of an instance.
    Dot {
        #[arg(long)]
        f: PathBuf,
        /// arrows, triangles or csb.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        g: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        n: usize,
    },
}

const DEFAULT_SAMPLE: u64 = 1000;
const DEFAULT_DOT_PREFIX: u64 = 16;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn load_map(path: &Path) -> Result<PamMap> {
    parse_map(&read(path)?).map_err(|e| match e {
        Error::Parse(m) => Error::Parse(format!("{}: {m}", path.display())),
        e => e,
    })
}

fn parse_split(spec: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("--split expects NA,NB, got {spec:?}"));
    let (a, b) = spec.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn witness_out(cli: &Cli, w: &Witness) -> Result<String> {
    witness_to_string(w, cli.prefix.unwrap_or(DEFAULT_SAMPLE), cli.fuel)
}

fn verify_mode(w: &Witness, prefix: Option<u64>) -> VerifyMode {
    if w.source().cardinality().is_some() && w.target().cardinality().is_some() {
        VerifyMode::Exhaustive
    } else {
        VerifyMode::Prefix(prefix.unwrap_or(DEFAULT_SAMPLE))
    }
}

fn verify_file(cli: &Cli, path: &Path) -> Result<String> {
    let text = read(path)?;
    if text.contains("\"representation\"") {
        let w = parse_witness(&text)?;
        let r = verify_witness(&w, verify_mode(&w, cli.prefix))?;
        if !r.ok {
            return Err(Error::CheckFailed(r.to_string()));
        }
        return Ok(format!("{r}\n"));
    }
    let m = load_map(path)?;
    let inj = m.injectivity();
    let yes = |b: bool| if b { "yes" } else { "no" };
    let mut out = format!(
        "source: {}\ntarget: {}\ninjective: {}\ntotal: {}\nsurjective: {}\n",
        m.source(),
        m.target(),
        yes(inj.injective),
        yes(inj.total),
        yes(inj.surjective)
    );
    if let Some((a, b)) = inj.collision {
        out.push_str(&format!("collision: {a} and {b}\n"));
    }
    Ok(out)
}

fn default_construction(kind: InstanceKind) -> Option<Construction> {
    match kind {
        InstanceKind::Bijection => Some(Construction::DivideByN),
        InstanceKind::Injection => Some(Construction::DivideInequality),
        InstanceKind::CsbPair => Some(Construction::Csb),
        InstanceKind::Swallow | InstanceKind::Tarski => None,
    }
}

fn harness(cli: &Cli, spec: &str, construction: Option<&str>, trials: usize, instance_out: Option<&Path>) -> Result<(String, bool)> {
    let text = if spec.trim_start().starts_with('{') { spec.to_string() } else { read(Path::new(spec))? };
    let mut spec: InstanceSpec =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("spec: line {} column {}: {e}", e.line(), e.column())))?;
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let inst = generate_instance(&spec)?;
    if let Some(p) = instance_out {
        fs::write(p, to_pretty(&inst.to_json())).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?;
    }
    let fuel = FuelPolicy::new(cli.fuel);
    let mut out = format!("instance: {} n={} A={} B={} seed={}\n", serde_json::to_string(&spec.kind).unwrap(), spec.n, inst.a, inst.b, spec.seed);
    let construction = match construction {
        Some(c) => Some(c.parse::<Construction>()?),
        None => default_construction(spec.kind),
    };
    let witness = match (construction, spec.kind) {
        (Some(c), _) => run_construction(c, &inst, fuel)?,
        (None, InstanceKind::Tarski) => tarski_cancel(inst.map("s")?, inst.map("t")?, spec.n, fuel)?,
        (None, _) => make_swallow(inst.map("u")?, &inst.b, &inst.a, fuel)?.h,
    };
    let report = verify_witness(&witness, verify_mode(&witness, cli.prefix))?;
    out.push_str(&format!("{report}\n"));
    let mut ok = report.ok;
    let mut summary = serde_json::json!({ "spec": spec, "verify": report });
    if let (Some(c), true, true) = (construction, inst.a.cardinality().is_some(), trials > 0) {
        let eq = equivariance_check(c, &inst, trials, spec.seed, fuel)?;
        out.push_str(&format!("{eq}\n"));
        ok &= eq.ok();
        summary["equivariance"] = serde_json::to_value(&eq).unwrap();
    }
    summary["ok"] = ok.into();
    out.push_str(&format!("summary {summary}\n"));
    Ok((out, ok))
}

fn run(cli: &Cli) -> Result<String> {
    let fuel = FuelPolicy::new(cli.fuel);
    match &cli.command {
        Command::Verify { file } => verify_file(cli, file),
        Command::Csb { f, g } => witness_out(cli, &csb_bijection(&load_map(f)?, &load_map(g)?, fuel)?),
        Command::Subtract { f, split } => {
            let f = load_map(f)?;
            let (na, nb) = parse_split(split)?;
            let (src, tgt) = (f.source().slots(), f.target().slots());
            if na > src.len() || nb > tgt.len() || src[na..] != tgt[nb..] {
                return Err(Error::SpaceMismatch(format!("cannot read {} -> {} as A + C -> B + C with split {na},{nb}", f.source(), f.target())));
            }
            let (a, b, c) = (Space::new(src[..na].to_vec()), Space::new(tgt[..nb].to_vec()), Space::new(src[na..].to_vec()));
            witness_out(cli, &subtract_finite_map(&f, &a, &b, &c)?)
        }
        Command::Tarski { s, t, n } => witness_out(cli, &tarski_cancel(&load_map(s)?, &load_map(t)?, *n, fuel)?),
        Command::Divide { n, f, scheme } => {
            let f = load_map(f)?;
            let w = match scheme.as_str() {
                "greedy" => divide_by_n(*n, &f, fuel)?,
                "parens" | "two-omega" if *n != 2 => {
                    return Err(Error::Precondition(format!("the {scheme} scheme divides by two, not {n}")))
                }
                "parens" => divide_by_two(&f, fuel)?,
                "two-omega" => divide_by_two_2omega(&f, fuel)?.0,
                other => return Err(Error::Parse(format!("unknown scheme {other:?}"))),
            };
            witness_out(cli, &w)
        }
        Command::DivideIneq { n, t } => witness_out(cli, &divide_inequality_by_n(*n, &load_map(t)?, fuel)?),
        Command::Harness { spec, construction, trials, instance_out } => {
            let (out, ok) = harness(cli, spec, construction.as_deref(), *trials, instance_out.as_deref())?;
            if ok {
                Ok(out)
            } else {
                emit(cli, out)?;
                Err(Error::CheckFailed("harness".into()))
            }
        }
        Command::Dot { f, kind, g, n } => {
            let kind: DotKind = kind.parse()?;
            let g = g.as_deref().map(load_map).transpose()?;
            emit_dot(kind, *n, &load_map(f)?, g.as_ref(), cli.prefix.unwrap_or(DEFAULT_DOT_PREFIX))
        }
    }
}

fn emit(cli: &Cli, text: String) -> Result<()> {
    match &cli.output {
        Some(path) => fs::write(path, text).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli).and_then(|text| emit(&cli, text));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
