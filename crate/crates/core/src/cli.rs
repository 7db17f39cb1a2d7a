//! Command-line front end.
//!
//! Exit status: `0` success, `1` output could not be written, `2` invalid
//! input (including usage errors), `3` capacity guard exceeded. Nothing is
//! written to the output on a nonzero exit.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::algebra::{AlgebraConfig, AlgebraSpec, Preset};
use crate::bose_einstein as be;
use crate::error::{Error, Result};
use crate::fermi_dirac as fd;
use crate::grouping::GroupingScheme;
use crate::identities::{self, IdentityId};
use crate::io::{self, RunInfo};
use crate::pmf::{ClosedFormCheck, PmfTable};
use crate::sampler;
use crate::scalar::{is_decimal_literal, Approx, Exact, Field, Mode};

/// Environment variable naming the directory for relative `--output` paths.
pub const OUTPUT_DIR_ENV: &str = "RPQ_URN_OUTPUT_DIR";

pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "rpq-urn", version, about = "R(p,q)-deformed urn distributions with an exact enumeration oracle")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Joint probability table.
    Tabulate(TableArgs),
    /// Law of the first `r` coordinates, with its closed form.
    Marginal {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long)]
        r: u32,
    },
    /// Law of coordinates `r+1..m` given the first `r`.
    Conditional {
        #[command(flatten)]
        table: TableArgs,
        /// Values of the first `r` coordinates, e.g. `1,0`.
        #[arg(long, value_delimiter = ',', required = true)]
        given: Vec<u32>,
        #[arg(long)]
        m: u32,
    },
    /// Law of group totals for consecutive blocks of urns.
    Grouped {
        #[command(flatten)]
        table: TableArgs,
        /// Group sizes summing to `k`, e.g. `2,1`.
        #[arg(long)]
        groups: String,
        /// Restrict to the first `nu` groups.
        #[arg(long, conflicts_with = "given")]
        nu: Option<u32>,
        /// Condition on the first groups' totals.
        #[arg(long, value_delimiter = ',', requires = "m")]
        given: Option<Vec<u32>>,
        /// Last group of the conditional law.
        #[arg(long, requires = "given")]
        m: Option<u32>,
    },
    /// Closed-form moments against oracle expectations.
    Moments {
        #[command(flatten)]
        table: TableArgs,
        /// Highest order for single-coordinate moments.
        #[arg(long, default_value_t = 1)]
        order: u32,
        /// Order of the mixed second-coordinate moment (second kind).
        #[arg(long, default_value_t = 1)]
        order2: u32,
    },
    /// Identity sweep over `1 <= k <= kmax`, `n <= nmax`.
    Verify {
        #[command(flatten)]
        algebra: AlgebraArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Identity name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        kmax: u32,
        /// Defaults to `kmax + 1`.
        #[arg(long)]
        nmax: Option<u32>,
    },
    /// Inverse-CDF draws from a joint table.
    Sample {
        #[command(flatten)]
        table: TableArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        count: u64,
        /// Draw coordinate by coordinate from conditionals (first kind).
        #[arg(long)]
        sequential: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    First,
    Second,
}

impl KindArg {
    fn name(self) -> &'static str {
        match self {
            KindArg::First => "first",
            KindArg::Second => "second",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct AlgebraArgs {
    /// q, js, quesne, cj, ac or a full preset name.
    #[arg(long, default_value = "q")]
    pub preset: String,
    /// `a/b` or integer; a decimal switches to approximate mode.
    #[arg(long, default_value = "1")]
    pub p: String,
    #[arg(long, default_value = "1/2")]
    pub q: String,
    /// TOML file with `name`, `p`, `q`, `mode`; overrides the flags above.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// File to write; relative paths resolve under `$RPQ_URN_OUTPUT_DIR` when set.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TableArgs {
    #[arg(long, value_enum, default_value = "first")]
    pub kind: KindArg,
    #[arg(long)]
    pub k: u32,
    #[arg(long)]
    pub n: u32,
    #[command(flatten)]
    pub algebra: AlgebraArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Failure of a run, with its exit status.
#[derive(Debug)]
pub enum Failure {
    Lib(Error),
    Io(std::io::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Lib(e) => exit_code(e),
            Failure::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Lib(e) => write!(f, "{e}"),
            Failure::Io(e) => write!(f, "cannot write output: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        _ => EXIT_INVALID,
    }
}

/// Rendered output and its destination (`None` for standard output).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rendered {
    pub text: String,
    pub path: Option<PathBuf>,
}

impl Cli {
    fn output_args(&self) -> &OutputArgs {
        match &self.command {
            Command::Tabulate(t)
            | Command::Marginal { table: t, .. }
            | Command::Conditional { table: t, .. }
            | Command::Grouped { table: t, .. }
            | Command::Moments { table: t, .. }
            | Command::Sample { table: t, .. } => &t.output,
            Command::Verify { output, .. } => output,
        }
    }

    fn algebra_args(&self) -> &AlgebraArgs {
        match &self.command {
            Command::Tabulate(t)
            | Command::Marginal { table: t, .. }
            | Command::Conditional { table: t, .. }
            | Command::Grouped { table: t, .. }
            | Command::Moments { table: t, .. }
            | Command::Sample { table: t, .. } => &t.algebra,
            Command::Verify { algebra, .. } => algebra,
        }
    }
}

fn read_config(path: &Path) -> Result<AlgebraConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::invalid("config", format!("{}: {e}", path.display())))?;
    AlgebraConfig::from_toml(&text)
}

/// The algebra configuration after applying `--config`.
pub fn resolve_algebra(args: &AlgebraArgs) -> Result<AlgebraConfig> {
    if let Some(path) = &args.config {
        return read_config(path);
    }
    let preset: Preset = args.preset.parse()?;
    let approximate = is_decimal_literal(&args.p) || is_decimal_literal(&args.q);
    Ok(AlgebraConfig {
        name: preset.name().to_string(),
        p: args.p.trim().to_string(),
        q: args.q.trim().to_string(),
        mode: if approximate { Mode::Approximate } else { Mode::Exact },
    })
}

/// Render the report for `cli` without writing it anywhere.
pub fn render(cli: &Cli) -> Result<Rendered> {
    let cfg = resolve_algebra(cli.algebra_args())?;
    let text = match cfg.mode {
        Mode::Exact => execute::<Exact>(cli, &cfg)?,
        Mode::Approximate => execute::<Approx>(cli, &cfg)?,
    };
    let path = cli.output_args().output.as_ref().map(|p| resolve_output(p, std::env::var_os(OUTPUT_DIR_ENV)));
    Ok(Rendered { text, path })
}

/// Relative paths are placed under `dir` when it is given.
pub fn resolve_output(path: &Path, dir: Option<std::ffi::OsString>) -> PathBuf {
    match dir {
        Some(d) if path.is_relative() && !d.is_empty() => PathBuf::from(d).join(path),
        _ => path.to_path_buf(),
    }
}

/// Render and write; returns the exit status.
pub fn run(cli: &Cli, stdout: &mut dyn std::io::Write) -> std::result::Result<(), Failure> {
    let out = render(cli)?;
    match &out.path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(Failure::Io)?;
            }
            std::fs::write(p, out.text).map_err(Failure::Io)
        }
        None => stdout.write_all(out.text.as_bytes()).map_err(Failure::Io),
    }
}

fn base_info(command: &str, cfg: &AlgebraConfig) -> RunInfo {
    RunInfo::new(command, cfg.mode)
        .field("preset", &cfg.name)
        .field("p", &cfg.p)
        .field("q", &cfg.q)
}

fn table_info(command: &str, cfg: &AlgebraConfig, t: &TableArgs) -> RunInfo {
    base_info(command, cfg)
        .field("kind", t.kind.name())
        .field("k", t.k)
        .field("n", t.n)
}

fn join(v: &[u32]) -> String {
    v.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
}

fn emit_table<N: Field>(info: &RunInfo, fmt: Format, t: &PmfTable<N>, check: Option<&ClosedFormCheck<N>>) -> Result<String> {
    match fmt {
        Format::Csv => io::table_csv(info, t),
        Format::Json => Ok(io::to_json_string(&io::table_json(info, t, check))),
    }
}

/// Table of the requested law for either kind, plus its closed-form check.
enum Params<N> {
    First(fd::FirstKindParams<N>),
    Second(be::SecondKindParams<N>),
}

impl<N: Field> Params<N> {
    fn new(alg: AlgebraSpec<N>, t: &TableArgs) -> Result<Self> {
        Ok(match t.kind {
            KindArg::First => Params::First(fd::FirstKindParams::new(alg, t.k, t.n)?),
            KindArg::Second => Params::Second(be::SecondKindParams::new(alg, t.k, t.n)?),
        })
    }

    fn joint(&self) -> Result<PmfTable<N>> {
        match self {
            Params::First(p) => fd::joint_pmf(p),
            Params::Second(p) => be::joint_pmf2(p),
        }
    }
}

fn execute<N: Field>(cli: &Cli, cfg: &AlgebraConfig) -> Result<String> {
    let alg: AlgebraSpec<N> = cfg.build()?;
    match &cli.command {
        Command::Tabulate(t) => {
            let info = table_info("tabulate", cfg, t);
            emit_table(&info, t.output.format, &Params::new(alg, t)?.joint()?, None)
        }
        Command::Marginal { table: t, r } => {
            let info = table_info("marginal", cfg, t).field("r", r);
            let (tab, check) = match Params::new(alg, t)? {
                Params::First(p) => (fd::marginal_pmf(&p, *r)?, fd::check_marginal(&p, *r)?),
                Params::Second(p) => (be::marginal_pmf2(&p, *r)?, be::check_marginal2(&p, *r)?),
            };
            emit_table(&info, t.output.format, &tab, Some(&check))
        }
        Command::Conditional { table: t, given, m } => {
            let info = table_info("conditional", cfg, t).field("given", join(given)).field("m", m);
            let (tab, check) = match Params::new(alg, t)? {
                Params::First(p) => (fd::conditional_pmf(&p, given, *m)?, fd::check_conditional(&p, given, *m)?),
                Params::Second(p) => (be::conditional_pmf2(&p, given, *m)?, be::check_conditional2(&p, given, *m)?),
            };
            emit_table(&info, t.output.format, &tab, Some(&check))
        }
        Command::Grouped { table: t, groups, nu, given, m } => {
            let scheme: GroupingScheme = groups.parse()?;
            let mut info = table_info("grouped", cfg, t).field("groups", scheme.label());
            let params = Params::new(alg, t)?;
            let (tab, check) = match (given, m, nu) {
                (Some(g), Some(m), _) => {
                    info = info.field("given", join(g)).field("m", m);
                    match &params {
                        Params::First(p) => (
                            fd::grouped_conditional_pmf(p, &scheme, g, *m)?,
                            fd::check_grouped_conditional(p, &scheme, g, *m)?,
                        ),
                        Params::Second(p) => (
                            be::grouped_conditional_pmf2(p, &scheme, g, *m)?,
                            be::check_grouped_conditional2(p, &scheme, g, *m)?,
                        ),
                    }
                }
                (_, _, Some(nu)) => {
                    info = info.field("nu", nu);
                    match &params {
                        Params::First(p) => (fd::grouped_marginal_pmf(p, &scheme, *nu)?, fd::check_grouped_marginal(p, &scheme, *nu)?),
                        Params::Second(p) => (be::grouped_marginal_pmf2(p, &scheme, *nu)?, be::check_grouped_marginal2(p, &scheme, *nu)?),
                    }
                }
                _ => match &params {
                    Params::First(p) => (fd::grouped_pmf(p, &scheme)?, fd::check_grouped(p, &scheme)?),
                    Params::Second(p) => (be::grouped_pmf2(p, &scheme)?, be::check_grouped2(p, &scheme)?),
                },
            };
            emit_table(&info, t.output.format, &tab, Some(&check))
        }
        Command::Moments { table: t, order, order2 } => {
            if *order < 1 {
                return Err(Error::invalid("order", "order must be at least 1"));
            }
            let info = table_info("moments", cfg, t).field("order", order).field("order2", order2);
            let mut reports = Vec::new();
            match Params::new(alg, t)? {
                Params::First(p) => {
                    for i in 1..=*order {
                        reports.push(fd::mean_report(&p, i)?);
                    }
                    if p.k >= 2 {
                        reports.extend(fd::bivariate_moments(&p, *order)?);
                    }
                }
                Params::Second(p) => {
                    for i in 1..=*order {
                        reports.push(be::factorial_moment_report(&p, i)?);
                    }
                    if p.k >= 2 {
                        reports.extend(be::bivariate_moments2(&p, *order, *order2)?.into_iter().skip(1));
                    }
                }
            }
            match t.output.format {
                Format::Csv => io::moments_csv(&info, &reports),
                Format::Json => Ok(io::to_json_string(&io::moments_json(&info, &reports))),
            }
        }
        Command::Verify { output, suite, kmax, nmax, .. } => {
            let nmax = nmax.unwrap_or(kmax + 1);
            let ids: Vec<IdentityId> = if suite == "all" {
                IdentityId::ALL.to_vec()
            } else {
                suite.split(',').map(str::parse).collect::<Result<_>>()?
            };
            let info = base_info("verify", cfg).field("suite", suite).field("kmax", kmax).field("nmax", nmax);
            let mut reports = Vec::new();
            for id in ids {
                reports.extend(identities::verify_identity(id, &alg, *kmax, nmax)?);
            }
            match output.format {
                Format::Csv => io::identities_csv(&info, &reports),
                Format::Json => Ok(io::to_json_string(&io::identities_json(&info, &reports))),
            }
        }
        Command::Sample { table: t, seed, count, sequential } => {
            let info = table_info("sample", cfg, t)
                .field("seed", seed)
                .field("count", count)
                .field("sequential", sequential);
            let batch = match (Params::new(alg, t)?, sequential) {
                (Params::First(p), true) => sampler::sequential_sample_fd(&p, *seed, *count)?,
                (Params::Second(_), true) => {
                    return Err(Error::invalid("sequential", "sequential sampling is defined for the first kind"))
                }
                (p, false) => sampler::sample(&p.joint()?, *seed, *count)?,
            };
            match t.output.format {
                Format::Csv => io::sample_csv(&info, &batch),
                Format::Json => Ok(io::to_json_string(&io::sample_json(&info, &batch))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("rpq-urn").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn tabulate_rows() {
        let out = render(&cli(&["tabulate", "--kind", "first", "--preset", "q", "--q", "1/2", "--k", "2", "--n", "1"])).unwrap();
        let probs: Vec<_> = out.text.lines().skip(2).map(|l| l.rsplit(',').next().unwrap()).collect();
        assert_eq!(probs, vec!["4/7", "2/7", "1/7"]);
    }

    #[test]
    fn exit_codes() {
        let e = render(&cli(&["tabulate", "--kind", "first", "--k", "2", "--n", "4"])).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_INVALID);
        assert!(e.to_string().contains("n <= k+1"));
        let e = render(&cli(&["tabulate", "--kind", "second", "--k", "20", "--n", "20"])).unwrap_err();
        assert_eq!(exit_code(&e), EXIT_CAPACITY);
        let e = render(&cli(&["tabulate", "--k", "2", "--n", "1", "--preset", "nope"])).unwrap_err();
        assert!(matches!(e, Error::InvalidParameter { field: "preset", .. }));
        let e = render(&cli(&["tabulate", "--k", "2", "--n", "1", "--q", "1/0"])).unwrap_err();
        assert!(matches!(e, Error::Parse { field: "q", .. }));
    }

    #[test]
    fn decimal_input_is_approximate() {
        let out = render(&cli(&["tabulate", "--k", "1", "--n", "1", "--q", "0.5"])).unwrap();
        assert!(out.text.contains("mode=approximate"));
        assert!(out.text.lines().nth(1).unwrap().starts_with("# APPROXIMATE"));
    }

    #[test]
    fn output_dir() {
        let dir = Some("/tmp/out".into());
        assert_eq!(resolve_output(Path::new("a.csv"), dir.clone()), PathBuf::from("/tmp/out/a.csv"));
        assert_eq!(resolve_output(Path::new("/x/a.csv"), dir), PathBuf::from("/x/a.csv"));
        assert_eq!(resolve_output(Path::new("a.csv"), None), PathBuf::from("a.csv"));
    }
}
