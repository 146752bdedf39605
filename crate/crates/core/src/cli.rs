//! The `bh` command line: constants tables, verification suites and the
//! extremal search.
//!
//! Exit codes: 0 success, 1 an inequality failed, 2 usage or budget error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::constants::{format_rational, table, ConstantsTable, TableColumn};
use crate::error::{Error, Result};
use crate::forms::Budget;
use crate::verify::{
    blei_suite, check_multiple_summing, kcc_suite, khinchine_suite, run_bh_trials, search_extremal,
    tensor_suite, Certification, VerificationReport,
};
use crate::SchemeId;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "bh",
    version,
    about = "Bohnenblust-Hille constants and inequality checks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Khinchine,
    Kcc,
    Blei,
    Tensor,
    Bh,
    Summing,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print constants for a range of m, one column per scheme.
    Table {
        #[arg(long, default_value_t = 3)]
        m_min: u32,
        #[arg(long, default_value_t = 14)]
        m_max: u32,
        /// Comma-separated: new, cor52, classic, cor52c, dsp, new-closed,
        /// cor52-closed, cor52c-closed.
        #[arg(long, value_delimiter = ',', default_value = "new,cor52,classic")]
        schemes: Vec<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = 3)]
        precision: usize,
    },
    /// Run verification suites; exits 1 if any inequality fails.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::All)]
        suite: Suite,
        /// Arity for the bh and summing suites.
        #[arg(long)]
        m: Option<usize>,
        /// Dimension for the bh and summing suites.
        #[arg(long)]
        n: Option<usize>,
        /// Vectors per summing family.
        #[arg(long)]
        j: Option<usize>,
        /// Trial count, applied to every selected suite.
        #[arg(long)]
        count: Option<u64>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "new")]
        scheme: String,
        /// Estimate norms by sign ascent (reports are marked uncertified).
        #[arg(long)]
        heuristic: bool,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Directory receiving failing instances.
        #[arg(long, default_value = ".")]
        dump_dir: PathBuf,
    },
    /// Hill-climb over sign tensors for a large certified ratio.
    Search {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 8)]
        restarts: u64,
        #[arg(long, default_value_t = 200)]
        iterations: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the best tensor here in the interchange format.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

/// Parses `args` (including the program name) and runs the command,
/// writing results to `out` and diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    let budget = Budget::from_env();
    let result = match cli.command {
        Command::Table {
            m_min,
            m_max,
            schemes,
            format,
            precision,
        } => cmd_table(m_min, m_max, &schemes, format, precision, out),
        Command::Verify {
            suite,
            m,
            n,
            j,
            count,
            seed,
            scheme,
            heuristic,
            format,
            dump_dir,
        } => {
            let plan = VerifyPlan {
                suite,
                m,
                n,
                j,
                count,
                seed,
                scheme: &scheme,
                heuristic,
                budget,
            };
            cmd_verify(&plan, format, &dump_dir, out)
        }
        Command::Search {
            m,
            n,
            restarts,
            iterations,
            seed,
            out: path,
            format,
        } => cmd_search(
            m,
            n,
            restarts,
            iterations,
            seed,
            budget,
            path.as_deref(),
            format,
            out,
        ),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_USAGE
        }
    }
}

#[derive(Serialize)]
struct JsonEntry<'a> {
    scheme: &'a str,
    value: f64,
    display: String,
    exact_exponent: Option<String>,
    prefactor: Option<f64>,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    m: u32,
    entries: Vec<JsonEntry<'a>>,
}

#[derive(Serialize)]
struct JsonTable<'a> {
    precision: usize,
    columns: Vec<&'a str>,
    rows: Vec<JsonRow<'a>>,
}

pub fn render_table(t: &ConstantsTable, format: Format) -> Result<String> {
    let prec = t.precision;
    let names: Vec<&str> = t.columns.iter().map(|c| c.name()).collect();
    let mut s = String::new();
    match format {
        Format::Text => {
            let widths: Vec<usize> = names.iter().map(|n| n.len().max(10)).collect();
            s.push_str(&format!("{:>3}", "m"));
            for (n, w) in names.iter().zip(&widths) {
                s.push_str(&format!("  {n:>w$}"));
            }
            s.push('\n');
            for row in &t.rows {
                s.push_str(&format!("{:>3}", row.m));
                for (e, w) in row.entries.iter().zip(&widths) {
                    s.push_str(&format!("  {:>w$.prec$}", e.value));
                }
                s.push('\n');
            }
        }
        Format::Csv => {
            s.push('m');
            for n in &names {
                s.push(',');
                s.push_str(n);
            }
            s.push('\n');
            for row in &t.rows {
                s.push_str(&row.m.to_string());
                for e in &row.entries {
                    s.push_str(&format!(",{:.prec$}", e.value));
                }
                s.push('\n');
            }
        }
        Format::Json => {
            let doc = JsonTable {
                precision: prec,
                columns: names.clone(),
                rows: t
                    .rows
                    .iter()
                    .map(|row| JsonRow {
                        m: row.m,
                        entries: row
                            .entries
                            .iter()
                            .zip(&names)
                            .map(|(e, n)| JsonEntry {
                                scheme: n,
                                value: e.value,
                                display: format!("{:.prec$}", e.value),
                                exact_exponent: e.exact_exponent.map(format_rational),
                                prefactor: e.prefactor,
                            })
                            .collect(),
                    })
                    .collect(),
            };
            s.push_str(&serde_json::to_string(&doc)?);
            s.push('\n');
        }
    }
    Ok(s)
}

fn cmd_table(
    m_min: u32,
    m_max: u32,
    schemes: &[String],
    format: Format,
    precision: usize,
    out: &mut dyn Write,
) -> Result<i32> {
    let columns = schemes
        .iter()
        .map(|s| s.trim().parse::<TableColumn>())
        .collect::<Result<Vec<_>>>()?;
    let t = table(m_min..=m_max, &columns, precision)?;
    out.write_all(render_table(&t, format)?.as_bytes())?;
    Ok(EXIT_OK)
}

struct VerifyPlan<'a> {
    suite: Suite,
    m: Option<usize>,
    n: Option<usize>,
    j: Option<usize>,
    count: Option<u64>,
    seed: u64,
    scheme: &'a str,
    heuristic: bool,
    budget: Budget,
}

impl VerifyPlan<'_> {
    fn selected(&self, suite: Suite) -> bool {
        self.suite == suite || self.suite == Suite::All
    }

    fn run(&self) -> Result<Vec<VerificationReport>> {
        let scheme: SchemeId = self.scheme.parse()?;
        let seed = self.seed;
        let count = |default: u64| self.count.unwrap_or(default);
        let cert = if self.heuristic {
            Certification::Heuristic(20)
        } else {
            Certification::Exact(self.budget)
        };
        // Validate every configuration before spending time on any of them.
        let bh_configs: Vec<(usize, usize, u64)> = match (self.m, self.n) {
            (None, None) => vec![
                (2, 2, count(10_000)),
                (3, 3, count(1_000)),
                (4, 2, count(100)),
            ],
            (m, n) => vec![(m.unwrap_or(2), n.unwrap_or(2), count(1_000))],
        };
        let summing = (
            self.m.unwrap_or(2),
            self.n.unwrap_or(2),
            self.j.unwrap_or(3),
            count(1_000),
        );
        for &(m, n, _) in &bh_configs {
            if self.selected(Suite::Bh) {
                check_shape(m, n)?;
                if !self.heuristic {
                    self.budget.check(((m - 1) * n) as u64)?;
                }
            }
        }
        if self.selected(Suite::Summing) {
            check_shape(summing.0, summing.1)?;
            self.budget.check(((summing.0 - 1) * summing.1) as u64)?;
        }

        let mut reports = Vec::new();
        if self.selected(Suite::Khinchine) {
            reports.push(khinchine_suite(count(100), seed)?);
        }
        if self.selected(Suite::Kcc) {
            reports.push(kcc_suite(count(100), seed)?);
        }
        if self.selected(Suite::Blei) {
            reports.push(blei_suite(count(1_000), seed)?);
        }
        if self.selected(Suite::Tensor) {
            reports.push(tensor_suite(count(200), seed)?);
        }
        if self.selected(Suite::Bh) {
            for (m, n, c) in bh_configs {
                reports.push(run_bh_trials(m, n, c, seed, scheme, cert)?);
            }
        }
        if self.selected(Suite::Summing) {
            let (m, n, j, c) = summing;
            reports.push(check_multiple_summing(
                m,
                n,
                j,
                c,
                seed,
                scheme,
                self.budget,
            )?);
        }
        Ok(reports)
    }
}

fn check_shape(m: usize, n: usize) -> Result<()> {
    if m < 2 || n < 1 {
        return Err(Error::InvalidRange(format!(
            "need m >= 2 and n >= 1, got m = {m}, n = {n}"
        )));
    }
    Ok(())
}

pub fn render_reports(reports: &[VerificationReport], format: Format) -> Result<String> {
    let mut s = String::new();
    match format {
        Format::Text => {
            for r in reports {
                s.push_str(&format!(
                    "{:<28} trials={} failures={} worst_margin={} max_ratio={} seed={} {}\n",
                    r.suite,
                    r.trials,
                    r.failures,
                    r.worst_margin,
                    r.max_ratio,
                    r.seed,
                    if r.uncertified {
                        "uncertified"
                    } else {
                        "certified"
                    }
                ));
            }
        }
        Format::Csv => {
            s.push_str("suite,trials,failures,worst_margin,max_ratio,seed,uncertified\n");
            for r in reports {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    r.suite,
                    r.trials,
                    r.failures,
                    r.worst_margin,
                    r.max_ratio,
                    r.seed,
                    r.uncertified
                ));
            }
        }
        Format::Json => {
            for r in reports {
                s.push_str(&serde_json::to_string(r)?);
                s.push('\n');
            }
        }
    }
    Ok(s)
}

fn cmd_verify(
    plan: &VerifyPlan,
    format: Format,
    dump_dir: &Path,
    out: &mut dyn Write,
) -> Result<i32> {
    let reports = plan.run()?;
    out.write_all(render_reports(&reports, format)?.as_bytes())?;
    let mut failed = false;
    for r in &reports {
        let stem: String = r
            .suite
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
            .collect();
        for (k, instance) in r.failing_instances.iter().enumerate() {
            failed = true;
            let path = dump_dir.join(format!("failure-{stem}-{k}.json"));
            std::fs::write(&path, serde_json::to_string(instance)? + "\n")?;
        }
        failed |= r.failures > 0;
    }
    Ok(if failed { EXIT_FAILURE } else { EXIT_OK })
}

#[derive(Serialize)]
struct SearchSummary {
    m: usize,
    #[serde(rename = "N")]
    n: usize,
    ratio: f64,
    bound: f64,
    restarts: u64,
    iterations: u64,
    seed: u64,
}

#[allow(clippy::too_many_arguments)]
fn cmd_search(
    m: usize,
    n: usize,
    restarts: u64,
    iterations: u64,
    seed: u64,
    budget: Budget,
    path: Option<&Path>,
    format: Format,
    out: &mut dyn Write,
) -> Result<i32> {
    check_shape(m, n)?;
    let state = search_extremal(m, n, restarts, iterations, seed, budget)?;
    let summary = SearchSummary {
        m,
        n,
        ratio: state.ratio,
        bound: state.bound,
        restarts: state.restarts,
        iterations: state.iterations,
        seed,
    };
    let text = match format {
        Format::Text => format!(
            "m={m} N={n} restarts={} iterations={} seed={seed}\nratio {}\nbound {}\n",
            summary.restarts, summary.iterations, summary.ratio, summary.bound
        ),
        Format::Csv => format!(
            "m,N,ratio,bound,restarts,iterations,seed\n{m},{n},{},{},{},{},{seed}\n",
            summary.ratio, summary.bound, summary.restarts, summary.iterations
        ),
        Format::Json => serde_json::to_string(&summary)? + "\n",
    };
    out.write_all(text.as_bytes())?;
    if let Some(path) = path {
        state.tensor.write(path, Some(seed))?;
    }
    Ok(EXIT_OK)
}
