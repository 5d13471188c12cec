use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use cfem_bench::experiments::{bvp1d_point, grid};
use cfem_bench::report::{format_comparison, split_records, write_csv};
use cfem_bench::{
    compare_baseline, emit_csv, run_experiment, threshold_checks, BenchError, ConfigOverrides,
    ExperimentConfig, ExperimentId, Ordering,
};
use cfem_core::pade_grid::validate_against_table;
use cfem_core::Complex64;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "cfem",
    version,
    about = "Complex-length finite element convergence studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Element lengths of the n-element grid on [0, length].
    Grid {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
        #[arg(long, default_value = "phase")]
        order: Ordering,
        /// Compare against the tabulated lengths (unit interval, n <= 16).
        #[arg(long)]
        check_table: bool,
    },
    /// Two-point problem u'' = k^2 u; `--k 40i` gives the Helmholtz case.
    Bvp1d {
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        #[arg(long)]
        n: Option<usize>,
        /// Inclusive range `n1:n2`.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long, default_value = "phase")]
        order: Ordering,
        #[arg(long, default_value_t = 1.0)]
        length: f64,
    },
    /// Scalar sweep of a config file (any of the six experiments).
    Run(Common),
    Laplace2d(Layered),
    Helmholtz2d(Layered),
    Multidomain(Layered),
    Elastic(ElasticArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the full record CSV here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 2 if an acceptance threshold is missed.
    #[arg(long)]
    assert: bool,
    /// Print the 1% / 0.1% / 0.01% comparison with the regular baseline.
    #[arg(long)]
    compare: bool,
    /// Report zero seconds so reruns give identical bytes.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct Layered {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    nz: Option<usize>,
    /// Element count per subdomain; repeatable, or `n1:n2`.
    #[arg(long)]
    n: Vec<String>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    gre: Option<f64>,
    #[arg(long)]
    gim: Option<f64>,
    /// Regular-FEM element count per subdomain; repeatable.
    #[arg(long)]
    baseline: Vec<usize>,
    #[arg(long = "ref")]
    reference: Option<usize>,
    #[arg(long)]
    order: Option<Ordering>,
}

#[derive(Args)]
struct ElasticArgs {
    #[command(flatten)]
    layered: Layered,
    #[arg(long)]
    nu: Option<f64>,
    /// Add one row per interface.
    #[arg(long)]
    per_interface: bool,
}

fn parse_counts(items: &[String]) -> Result<Option<Vec<usize>>, BenchError> {
    if items.is_empty() {
        return Ok(None);
    }
    let bad = |s: &str| BenchError::Config(format!("bad element count '{s}'"));
    let mut out = Vec::new();
    for s in items {
        match s.split_once(':') {
            Some((a, b)) => {
                let (a, b): (usize, usize) = (
                    a.parse().map_err(|_| bad(s))?,
                    b.parse().map_err(|_| bad(s))?,
                );
                out.extend(a..=b);
            }
            None => out.push(s.parse().map_err(|_| bad(s))?),
        }
    }
    Ok(Some(out))
}

/// `200`, `40i`, `i40` or `3+4i`.
fn parse_k(s: &str) -> Result<Complex64, BenchError> {
    let t = s.trim().replace(' ', "");
    let bad = || BenchError::Config(format!("cannot parse k = '{s}'"));
    if let Some(rest) = t.strip_prefix('i') {
        return Ok(Complex64::new(0.0, rest.parse().map_err(|_| bad())?));
    }
    if let Some(body) = t.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .last()
            .map(|(i, _)| i);
        return match split {
            Some(i) => Ok(Complex64::new(
                body[..i].parse().map_err(|_| bad())?,
                body[i..].parse().map_err(|_| bad())?,
            )),
            None => Ok(Complex64::new(
                0.0,
                if body.is_empty() {
                    1.0
                } else {
                    body.parse().map_err(|_| bad())?
                },
            )),
        };
    }
    Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0))
}

fn load_config(
    common: &Common,
    id: Option<ExperimentId>,
    mut o: ConfigOverrides,
) -> Result<ExperimentConfig, BenchError> {
    if let Some(path) = &common.config {
        let text = std::fs::read_to_string(path)?;
        let file: ConfigOverrides =
            serde_json::from_str(&text).map_err(|e| BenchError::Config(e.to_string()))?;
        // command-line flags win over the file
        macro_rules! merge {
            ($($f:ident),*) => { $( if o.$f.is_none() { o.$f = file.$f; } )* };
        }
        merge!(
            experiment,
            params,
            n,
            ordering,
            length,
            height,
            nz,
            omega,
            modulus,
            subdomains,
            nu,
            rho,
            baseline,
            reference_nx,
            timing
        );
    }
    if common.no_timing {
        o.timing = Some(false);
    }
    ExperimentConfig::from_overrides(o, id)
}

fn layered_overrides(a: &Layered) -> Result<ConfigOverrides, BenchError> {
    let modulus = match (a.gre, a.gim) {
        (None, None) => None,
        (re, im) => Some([re.unwrap_or(1.0), im.unwrap_or(0.0)]),
    };
    Ok(ConfigOverrides {
        nz: a.nz,
        n: parse_counts(&a.n)?,
        omega: a.omega,
        modulus,
        baseline: (!a.baseline.is_empty()).then(|| a.baseline.clone()),
        reference_nx: a.reference,
        ordering: a.order,
        ..Default::default()
    })
}

fn run_sweep(
    common: &Common,
    config: &ExperimentConfig,
    table: impl Fn(&[cfem_bench::ConvergenceRecord]) -> String,
) -> Result<ExitCode, BenchError> {
    let records = run_experiment(config)?;
    if let Some(path) = &common.out {
        emit_csv(&records, path)?;
    }
    let mut stdout = std::io::stdout().lock();
    write!(stdout, "{}", table(&records))?;
    if common.compare {
        let (cfem, fem) = split_records(config.experiment, &records);
        write!(
            stdout,
            "{}",
            format_comparison(&compare_baseline(&cfem, &fem))
        )?;
    }
    let mut code = ExitCode::SUCCESS;
    if common.assert {
        for c in threshold_checks(config, &records) {
            eprintln!(
                "{} {} ({})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
            if !c.passed {
                code = ExitCode::from(2);
            }
        }
    }
    Ok(code)
}

fn sig(v: f64) -> String {
    cfem_bench::report::fmt_sig(v)
}

fn short_table(records: &[cfem_bench::ConvergenceRecord], id: &str, with_kind: bool) -> String {
    let mut s = String::from(if with_kind {
        "n,error,seconds,kind\n"
    } else {
        "n,error,seconds\n"
    });
    for r in records.iter().filter(|r| r.experiment.starts_with(id)) {
        if with_kind {
            s += &format!(
                "{},{},{},{}\n",
                r.n,
                sig(r.error),
                sig(r.seconds),
                r.ordering
            );
        } else if r.ordering != "fem" {
            s += &format!("{},{},{}\n", r.n, sig(r.error), sig(r.seconds));
        }
    }
    s
}

fn run(cli: Cli) -> Result<ExitCode, BenchError> {
    match cli.command {
        Command::Grid {
            n,
            length,
            order,
            check_table,
        } => {
            let g = grid(n, length, order).map_err(|source| BenchError::Solver {
                point: format!("grid n={n}"),
                source,
            })?;
            let mut out = std::io::stdout().lock();
            writeln!(out, "index,re,im")?;
            for (i, l) in g.lengths.iter().enumerate() {
                writeln!(out, "{},{},{}", i + 1, sig(l.re), sig(l.im))?;
            }
            if check_table {
                let rep = validate_against_table(n).map_err(|source| BenchError::Solver {
                    point: format!("table n={n}"),
                    source,
                })?;
                eprintln!(
                    "max relative deviation from table: {:.3e}",
                    rep.max_deviation
                );
                if !rep.passed {
                    return Ok(ExitCode::from(2));
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bvp1d {
            k,
            n,
            sweep,
            order,
            length,
        } => {
            let k = parse_k(&k)?;
            let ns = match (n, sweep) {
                (_, Some(s)) => parse_counts(&[s])?.unwrap_or_default(),
                (Some(n), None) => vec![n],
                (None, None) => return Err(BenchError::Config("give --n or --sweep".into())),
            };
            let mut out = std::io::stdout().lock();
            writeln!(out, "n,u0_re,u0_im,rel_error")?;
            for n in ns {
                let (u0, e) =
                    bvp1d_point(k * k, n, length, order).map_err(|source| BenchError::Solver {
                        point: format!("bvp1d n={n}"),
                        source,
                    })?;
                writeln!(out, "{n},{},{},{}", sig(u0.re), sig(u0.im), sig(e))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run(common) => {
            let c = load_config(&common, None, ConfigOverrides::default())?;
            run_sweep(&common, &c, |r| {
                let mut buf = Vec::new();
                write_csv(r, &mut buf).expect("in-memory write");
                String::from_utf8(buf).expect("ascii")
            })
        }
        Command::Laplace2d(a) => run_layered(a, ExperimentId::E3Laplace2d),
        Command::Helmholtz2d(a) => run_layered(a, ExperimentId::E4Helmholtz2d),
        Command::Multidomain(a) => run_layered(a, ExperimentId::E5Multidomain),
        Command::Elastic(a) => {
            let mut o = layered_overrides(&a.layered)?;
            o.nu = a.nu;
            let c = load_config(&a.layered.common, Some(ExperimentId::E6Elastic), o)?;
            let per = a.per_interface;
            run_sweep(&a.layered.common, &c, |r| {
                let mut s = String::from("n,error_combined,seconds\n");
                for r in r
                    .iter()
                    .filter(|r| r.experiment == "e6_elastic" && r.ordering != "fem")
                {
                    s += &format!("{},{},{}\n", r.n, sig(r.error), sig(r.seconds));
                }
                if per {
                    s += "interface,n,error,seconds,kind\n";
                    for r in r.iter().filter(|r| r.experiment.starts_with("e6_elastic@")) {
                        let x = r.experiment.trim_start_matches("e6_elastic@x=");
                        s += &format!(
                            "{x},{},{},{},{}\n",
                            r.n,
                            sig(r.error),
                            sig(r.seconds),
                            r.ordering
                        );
                    }
                }
                s
            })
        }
    }
}

fn run_layered(a: Layered, id: ExperimentId) -> Result<ExitCode, BenchError> {
    let c = load_config(&a.common, Some(id), layered_overrides(&a)?)?;
    let with_fem = !c.baseline.is_empty();
    run_sweep(&a.common, &c, |r| short_table(r, id.as_str(), with_fem))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
