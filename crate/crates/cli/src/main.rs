use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use besovlab::catalog::catalog_family;
use besovlab::lab::{classify, LabConfig, Space};
use besovlab::runner::{
    csv_row, default_suite, map_record, norm_records, run_suite, split_record, MapSpec, NormMethod, RunConfig,
    CSV_HEADER,
};
use besovlab::{FunctionSpec, IntervalFamily, LabError, LineMap, SpaceParams};
use clap::{Parser, Subcommand, ValueEnum};

/// Norms, map functionals and boundedness checks for composition operators
/// on Besov and Sobolev spaces of the line.
#[derive(Debug, Parser)]
#[command(name = "besovlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate norms of catalog functions.
    Norm {
        /// Function descriptor, e.g. `gaussian` or `bump:center=1,radius=2`;
        /// `catalog` expands to the ten-function family. Repeatable.
        #[arg(long = "fn", required = true)]
        functions: Vec<String>,
        /// `s=..,p=..,q=..,m=..`
        #[arg(long)]
        space: String,
        /// Comma-separated: diff, lp, sobolev_fourier, sobolev_diff.
        #[arg(long, default_value = "diff")]
        method: String,
        /// `lo,hi`
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Map functionals: U, M, Lipschitz constant, preimage counts.
    Map {
        /// Built-in map name or path to a JSON map (recipe or explicit pieces).
        #[arg(long)]
        map: String,
        /// Target interval `a,b` for a preimage decomposition. Repeatable.
        #[arg(long = "target", allow_hyphen_values = true)]
        targets: Vec<String>,
        /// Integer range `lo,hi`: split the preimages of `[z, z+1]`.
        #[arg(long, allow_hyphen_values = true)]
        cover: Option<String>,
    },
    /// Greedy disjoint partition of an interval family.
    Split {
        /// JSON file holding `[[l, r], ...]`.
        #[arg(long, conflicts_with = "intervals")]
        family: Option<PathBuf>,
        /// Inline family `l,r;l,r;...`.
        #[arg(long, allow_hyphen_values = true)]
        intervals: Option<String>,
    },
    /// Classify one map against one space.
    Check {
        #[arg(long)]
        map: String,
        /// `s=..,p=..,q=..[,m=..]`
        #[arg(long)]
        space: String,
        /// Use `H^s_p` instead of `B^s_{p,q}` (q is ignored).
        #[arg(long)]
        sobolev: bool,
        /// Run configuration JSON; its `lab` block and seed are used.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Directory for `<map>.json` and `<map>.csv`; stdout otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Run the regression suite.
    Suite {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for `suite.json` and `suite.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Outcome codes: 0 pass, 2 a check failed, 3 refused range, 4 bad config.
enum Outcome {
    Ok,
    CheckFailed,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<LabError>() {
        Some(LabError::RangeRefused(_)) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return ExitCode::from(4);
    }
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::CheckFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("BESOVLAB_THREADS") {
        let n: usize = v.trim().parse().with_context(|| format!("BESOVLAB_THREADS = `{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn config_err(msg: String) -> anyhow::Error {
    LabError::Config(msg).into()
}

fn parse_pair(text: &str, what: &str) -> anyhow::Result<(f64, f64)> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(config_err(format!("{what}: expected `a,b`, got `{text}`")));
    }
    let num = |s: &str| s.parse::<f64>().map_err(|e| config_err(format!("{what}: `{s}`: {e}")));
    Ok((num(parts[0])?, num(parts[1])?))
}

fn load_map(name: &str) -> anyhow::Result<LineMap> {
    let path = Path::new(name);
    if path.exists() {
        let text = fs::read_to_string(path).with_context(|| format!("reading {name}"))?;
        if let Ok(spec) = serde_json::from_str::<MapSpec>(&text) {
            return Ok(spec.build()?);
        }
        return serde_json::from_str::<LineMap>(&text).map_err(|e| {
            config_err(format!("{name}: invalid map schema at line {} column {}: {e}", e.line(), e.column()))
        });
    }
    if name == "sine_fold" {
        return Ok(MapSpec::sine_fold().build()?);
    }
    match default_suite().into_iter().find(|e| e.label == name) {
        Some(e) => Ok(e.map.build()?),
        None => Err(config_err(format!("no map file or built-in map named `{name}`"))),
    }
}

fn load_config(path: Option<&Path>) -> anyhow::Result<RunConfig> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| config_err(format!("{}: {e}", p.display())))?;
            Ok(RunConfig::from_json(&text).map_err(|e| config_err(format!("{}: {e}", p.display())))?)
        }
    }
}

fn print_json_lines<T: serde::Serialize>(items: &[T]) -> anyhow::Result<()> {
    for item in items {
        println!("{}", serde_json::to_string(item)?);
    }
    Ok(())
}

fn run(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Norm { functions, space, method, window, count, format } => {
            let sp = SpaceParams::parse(&space)?;
            let mut specs = Vec::new();
            for f in &functions {
                if f == "catalog" {
                    specs.extend(catalog_family());
                } else {
                    specs.push(FunctionSpec::parse(f)?);
                }
            }
            let methods = method.split(',').map(NormMethod::parse).collect::<besovlab::Result<Vec<_>>>()?;
            let window = window.map(|w| parse_pair(&w, "window")).transpose()?;
            let records = norm_records(&specs, &sp, &methods, window, count)?;
            if methods.len() >= 2 {
                for pair in records.chunks(methods.len()) {
                    if pair[1].value != 0.0 {
                        log::info!(
                            "{}: {:?}/{:?} = {}",
                            pair[0].function,
                            pair[0].method,
                            pair[1].method,
                            pair[0].value / pair[1].value
                        );
                    }
                }
            }
            match format {
                Format::Json => print_json_lines(&records)?,
                Format::Csv => {
                    println!("schema_version,function,space,method,window_lo,window_hi,count,value");
                    for r in &records {
                        println!(
                            "{},\"{}\",\"s={},p={},q={},m={}\",{:?},{},{},{},{:e}",
                            r.schema_version,
                            r.function,
                            r.space.s,
                            r.space.p,
                            r.space.q,
                            r.space.m,
                            r.method,
                            r.window.0,
                            r.window.1,
                            r.count,
                            r.value
                        );
                    }
                }
            }
            Ok(Outcome::Ok)
        }
        Command::Map { map, targets, cover } => {
            let phi = load_map(&map)?;
            let targets = targets.iter().map(|t| parse_pair(t, "target")).collect::<anyhow::Result<Vec<_>>>()?;
            let cover = match cover {
                Some(c) => {
                    let (lo, hi) = parse_pair(&c, "cover")?;
                    Some((lo as i64, hi as i64))
                }
                None => None,
            };
            let record = map_record(&phi, &targets, cover)?;
            println!("{}", serde_json::to_string(&record)?);
            Ok(Outcome::Ok)
        }
        Command::Split { family, intervals } => {
            let fam = match (family, intervals) {
                (Some(path), _) => {
                    let text = fs::read_to_string(&path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
                    serde_json::from_str::<IntervalFamily>(&text)
                        .map_err(|e| config_err(format!("{}: {e}", path.display())))?
                }
                (None, Some(inline)) => {
                    let items = inline
                        .split(';')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| parse_pair(s, "interval").map(|(a, b)| [a, b]))
                        .collect::<anyhow::Result<Vec<_>>>()?;
                    IntervalFamily::new(items)?
                }
                (None, None) => return Err(config_err("split needs --family or --intervals".into())),
            };
            let fam = IntervalFamily::new(fam.items().to_vec())?;
            let record = split_record(&fam, &fam.split_partition());
            println!("{}", serde_json::to_string(&record)?);
            Ok(if record.bound_ok && record.disjoint { Outcome::Ok } else { Outcome::CheckFailed })
        }
        Command::Check { map, space, sobolev, config, out, format } => {
            let cfg = load_config(config.as_deref())?;
            let lab: LabConfig = cfg.lab_config();
            let sp = SpaceParams::parse(&space)?;
            let space = if sobolev { Space::Sobolev { s: sp.s, p: sp.p, m: sp.m } } else { Space::Besov(sp) };
            let phi = load_map(&map)?;
            let label = Path::new(&map).file_stem().and_then(|s| s.to_str()).unwrap_or(&map).to_string();
            let report = classify(&label, &phi, &space, &lab)?;
            let json = serde_json::to_string_pretty(&report)?;
            let csv = format!("{CSV_HEADER}\n{}\n", csv_row(&report));
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join(format!("{label}.json")), &json)?;
                    fs::write(dir.join(format!("{label}.csv")), &csv)?;
                    eprintln!("{label}: {:?}", report.verdict);
                }
                None => match format {
                    Format::Json => println!("{json}"),
                    Format::Csv => print!("{csv}"),
                },
            }
            Ok(if report.any_failed() { Outcome::CheckFailed } else { Outcome::Ok })
        }
        Command::Suite { config, seed, out } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let output = run_suite(&cfg)?;
            let json = serde_json::to_string_pretty(&output)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("suite.json"), &json)?;
                    fs::write(dir.join("suite.csv"), output.to_csv())?;
                }
                None => print!("{}", output.to_csv()),
            }
            let s = &output.summary;
            eprintln!(
                "records {}: bounded {}, unbounded {}, inconclusive {}, refused {}, failed checks {}",
                s.records, s.consistent_bounded, s.consistent_unbounded, s.inconclusive, s.refused, s.failed_checks
            );
            Ok(if s.failed_checks > 0 { Outcome::CheckFailed } else { Outcome::Ok })
        }
    }
}
