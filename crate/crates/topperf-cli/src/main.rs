//! Batch front door for the topperf pipeline.
//!
//! Exit codes: 0 success, 1 input/validation failure, 2 numeric failure
//! (non-convergence, separation, singular systems), 64 usage error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use topperf::config::{Measure, RunConfig};
use topperf::error::Error;
use topperf::exec;
use topperf::felogit::{self, GlmSpec};
use topperf::metrics::{self, Dim};
use topperf::report::{self, OutputMeta};

#[derive(Parser, Debug)]
#[command(
    name = "topperf",
    version,
    about = "Author-period productivity panels, top-performer classes, concentration metrics, and fixed-effects logit models",
    propagate_version = true
)]
struct Cli {
    /// Path to the run configuration (TOML).
    #[arg(long, global = true, default_value = "config.toml")]
    config: PathBuf,
    /// Worker-thread cap; 0 uses the library default. Overrides the config.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override for pipeline tie-breaking and the generator.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct ClassMeasureArgs {
    /// Class threshold in percent (must be one of classes.thresholds).
    #[arg(long, default_value_t = 10.0)]
    class: f64,
    /// Productivity measure: p1, p2, p3, or p4.
    #[arg(long, default_value = "p1")]
    measure: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load the input tables, run schema and referential checks, and report.
    Validate,
    /// Build the author-period panel and write panel.csv (unit fields only).
    Panel,
    /// Panel plus measures and covariates; writes the full panel.csv.
    Productivity,
    /// Rank cohorts and write assignments.csv.
    Classify,
    /// Aggregate tables: shares, rpi, tables, correlations.
    Metrics {
        #[command(subcommand)]
        table: MetricsCommand,
    },
    /// Fit one fixed-effects logit and write coefficients, fixed effects,
    /// and fit statistics.
    Regress {
        #[command(flatten)]
        target: ClassMeasureArgs,
    },
    /// Generate a synthetic closed-world corpus plus ground_truth.json.
    Simulate,
    /// Run the full pipeline and emit every output.
    Report,
}

#[derive(Subcommand, Debug)]
enum MetricsCommand {
    /// Concentration shares of output held by a top class.
    Shares {
        #[command(flatten)]
        target: ClassMeasureArgs,
        /// Comma-separated grouping dims (period, gender, affiliation,
        /// age_group, discipline).
        #[arg(long, default_value = "period")]
        by: String,
    },
    /// Relative Presence Index for men and women.
    Rpi {
        #[command(flatten)]
        target: ClassMeasureArgs,
        #[arg(long, default_value = "period")]
        by: String,
    },
    /// Frequency distribution tables.
    Tables {
        /// Row dimension.
        #[arg(long, default_value = "gender")]
        rows: String,
        /// Column dimension.
        #[arg(long, default_value = "period")]
        cols: String,
        /// Restrict to members of this class (requires --measure).
        #[arg(long)]
        class: Option<f64>,
        #[arg(long, default_value = "p1")]
        measure: String,
    },
    /// Pairwise Pearson correlations between the four measures.
    Correlations {
        #[arg(long, default_value = "period")]
        by: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let kind = e.kind();
            if kind == ErrorKind::DisplayHelp || kind == ErrorKind::DisplayVersion {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(64);
        }
    };

    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numeric() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut config = RunConfig::from_path(&cli.config)?;
    if let Some(threads) = cli.threads {
        config.run.threads = threads;
    }
    if let Some(out) = &cli.out {
        config.paths.output_dir = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.run.seed = seed;
        config.sim.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn parse_dims(spec: &str) -> Result<Vec<Dim>, Error> {
    spec.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| Dim::from_str(s.trim()))
        .collect()
}

fn threshold_index(pipeline: &report::Pipeline, class: f64) -> Result<usize, Error> {
    pipeline.assignments.threshold_index(class).ok_or_else(|| {
        Error::Config(format!(
            "class {class} is not among classes.thresholds {:?}",
            pipeline.assignments.thresholds
        ))
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    let config = load_config(&cli)?;
    let threads = config.run.threads;
    exec::with_thread_cap(threads, || dispatch(&cli.command, &config))
}

fn dispatch(command: &Command, config: &RunConfig) -> Result<(), Error> {
    let meta = OutputMeta::from_config(config);
    let out_dir = &config.paths.output_dir;

    match command {
        Command::Validate => {
            let mut corpus = topperf::ingest::load_corpus(config)?;
            topperf::ingest::derive_first_pub_year(&mut corpus)?;
            let r = &corpus.report;
            println!(
                "ok: {} publications ({} dropped by doc_type, {} outside window)",
                r.kept_publications, r.dropped_doc_type, r.dropped_out_of_window
            );
            println!(
                "authors: {} known, {} synthesized; first-pub years derived: {}",
                corpus.authors.len() - r.synthesized_profiles,
                r.synthesized_profiles,
                r.derived_first_years
            );
            if !r.unranked_journals.is_empty() {
                println!(
                    "warning: {} unranked venues ({} publications at floor weight)",
                    r.unranked_journals.len(),
                    r.floor_defaulted_publications
                );
            }
            Ok(())
        }
        Command::Panel => {
            let pipeline = report::build_pipeline(config)?;
            ensure_out(out_dir)?;
            let path = out_dir.join("panel.csv");
            report::write_panel_csv(&path, &meta, &pipeline, false)?;
            println!("wrote {} ({} units)", path.display(), pipeline.records.len());
            Ok(())
        }
        Command::Productivity => {
            let pipeline = report::build_pipeline(config)?;
            ensure_out(out_dir)?;
            let path = out_dir.join("panel.csv");
            report::write_panel_csv(&path, &meta, &pipeline, true)?;
            println!("wrote {} ({} units)", path.display(), pipeline.records.len());
            Ok(())
        }
        Command::Classify => {
            let pipeline = report::build_pipeline(config)?;
            ensure_out(out_dir)?;
            let path = out_dir.join("assignments.csv");
            report::write_assignments_csv(&path, &meta, &pipeline)?;
            println!("wrote {}", path.display());
            Ok(())
        }
        Command::Metrics { table } => run_metrics(table, config, &meta),
        Command::Regress { target } => {
            let measure = Measure::from_str(&target.measure)?;
            let pipeline = report::build_pipeline(config)?;
            let t_idx = threshold_index(&pipeline, target.class)?;
            let spec = GlmSpec::from_config(&config.glm);
            let dataset = felogit::build_dataset(
                &pipeline.records,
                &pipeline.assignments,
                measure,
                t_idx,
                &spec,
                &pipeline.periods,
                config.gender.unknown_policy,
            )?;
            let fit = felogit::fit(&dataset, &spec)?;
            ensure_out(out_dir)?;
            report::write_coefficients_csv(&out_dir.join("coefficients.csv"), &meta, &fit)?;
            report::write_fixed_effects_csv(&out_dir.join("fixed_effects.csv"), &meta, &fit)?;
            report::write_fitstats_json(&out_dir.join("fitstats.json"), &meta, &fit)?;
            println!(
                "fit {} x {}: n={} iterations={} mcfadden={:.4}",
                report::class_label(target.class),
                measure,
                fit.n_obs,
                fit.iterations,
                fit.mcfadden_r2
            );
            Ok(())
        }
        Command::Simulate => {
            let written = report::run_simulate(config)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Report => {
            let written = report::run_report(config)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            Ok(())
        }
    }
}

fn run_metrics(
    table: &MetricsCommand,
    config: &RunConfig,
    meta: &OutputMeta,
) -> Result<(), Error> {
    let pipeline = report::build_pipeline(config)?;
    let out_dir = &config.paths.output_dir;
    ensure_out(out_dir)?;
    let label = pipeline.period_label();

    match table {
        MetricsCommand::Shares { target, by } => {
            let measure = Measure::from_str(&target.measure)?;
            let dims = parse_dims(by)?;
            let t_idx = threshold_index(&pipeline, target.class)?;
            let shares = metrics::concentration_share(
                &pipeline.records,
                &pipeline.assignments,
                measure,
                t_idx,
                config.shares.basis,
                &dims,
                config.gender.unknown_policy,
                &label,
            );
            for w in &shares.warnings {
                eprintln!("warning: {w}");
            }
            let path = out_dir.join("shares.csv");
            report::write_shares_csv(&path, meta, std::slice::from_ref(&shares), &dims)?;
            println!("wrote {}", path.display());
        }
        MetricsCommand::Rpi { target, by } => {
            let measure = Measure::from_str(&target.measure)?;
            let dims = parse_dims(by)?;
            let t_idx = threshold_index(&pipeline, target.class)?;
            let rows = metrics::rpi_table(
                &pipeline.records,
                &pipeline.assignments,
                measure,
                t_idx,
                &dims,
                &label,
            );
            let path = out_dir.join("rpi.csv");
            report::write_rpi_csv(&path, meta, &[(target.class, measure, rows)], &dims)?;
            println!("wrote {}", path.display());
        }
        MetricsCommand::Tables {
            rows,
            cols,
            class,
            measure,
        } => {
            let row_dims = parse_dims(rows)?;
            let col_dims = parse_dims(cols)?;
            if col_dims.len() != 1 {
                return Err(Error::Config("--cols takes exactly one dimension".into()));
            }
            let member_filter = match class {
                Some(c) => {
                    let m = Measure::from_str(measure)?;
                    let t_idx = threshold_index(&pipeline, *c)?;
                    Some((&pipeline.assignments, m, t_idx))
                }
                None => None,
            };
            let table = metrics::distribution_table(
                &pipeline.records,
                &row_dims,
                Some(col_dims[0]),
                member_filter,
                config.gender.unknown_policy,
                &label,
            );
            let path = out_dir.join("tables.csv");
            report::write_distribution_csv(&path, meta, &table, &row_dims, Some(col_dims[0]))?;
            println!("wrote {}", path.display());
        }
        MetricsCommand::Correlations { by } => {
            let dims = parse_dims(by)?;
            let rows = metrics::measure_correlations(&pipeline.records, &dims, &label);
            let path = out_dir.join("correlations.csv");
            report::write_correlations_csv(&path, meta, &rows, &dims)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn ensure_out(dir: &PathBuf) -> Result<(), Error> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.clone(),
        source,
    })
}
