//! Pipeline orchestration and deterministic report emission. Every output
//! file starts with a metadata line carrying the effective config hash, the
//! seed, and the crate version; identical inputs always produce identical
//! bytes.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::classify::Assignments;
use crate::config::{Measure, Periods, RunConfig};
use crate::error::{Error, Result};
use crate::felogit::{self, GlmFit, GlmSpec};
use crate::ingest::{self, Corpus};
use crate::metrics::{self, CorrRow, Dim, DistRow, RpiRow, ShareTable};
use crate::panel;
use crate::productivity::{self, UnitRecord};
use crate::simgen;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct OutputMeta {
    pub config_hash: String,
    pub seed: u64,
}

impl OutputMeta {
    pub fn from_config(config: &RunConfig) -> Self {
        OutputMeta {
            config_hash: config.config_hash(),
            seed: config.run.seed,
        }
    }

    fn header_line(&self) -> String {
        format!(
            "# config_hash={} seed={} version={}",
            self.config_hash, self.seed, VERSION
        )
    }
}

/// Human-readable label for a class threshold ("top10", "top2p5").
pub fn class_label(threshold: f64) -> String {
    if threshold.fract() == 0.0 {
        format!("top{}", threshold as i64)
    } else {
        format!("top{threshold}").replace('.', "p")
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

struct TableWriter {
    inner: csv::Writer<BufWriter<File>>,
    path: PathBuf,
}

impl TableWriter {
    fn create(path: &Path, meta: &OutputMeta) -> Result<Self> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut file = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(file, "{}", meta.header_line()).map_err(io)?;
        Ok(TableWriter {
            inner: csv::Writer::from_writer(file),
            path: path.to_path_buf(),
        })
    }

    fn record<I, S>(&mut self, fields: I) -> Result<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.inner
            .write_record(fields)
            .map_err(|e| Error::Validation(format!("{}: {e}", self.path.display())))
    }

    fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|source| Error::Io {
            path: self.path.clone(),
            source,
        })
    }
}

/// Everything the analysis subcommands share: corpus, enriched panel, and
/// classifications for the configured measures and thresholds.
pub struct Pipeline {
    pub corpus: Corpus,
    pub records: Vec<UnitRecord>,
    pub assignments: Assignments,
    pub periods: Periods,
    pub dropped_no_discipline: usize,
    pub dropped_no_first_year: usize,
}

impl Pipeline {
    pub fn period_label(&self) -> impl Fn(usize) -> String + '_ {
        |i| self.periods.label(i)
    }
}

pub fn build_pipeline(config: &RunConfig) -> Result<Pipeline> {
    let mut corpus = ingest::load_corpus(config)?;
    ingest::derive_first_pub_year(&mut corpus)?;
    build_pipeline_from_corpus(corpus, config)
}

pub fn build_pipeline_from_corpus(corpus: Corpus, config: &RunConfig) -> Result<Pipeline> {
    let panel = panel::build_panel(&corpus, config)?;
    let dropped_no_discipline = panel.dropped_no_discipline;
    let dropped_no_first_year = panel.dropped_no_first_year;
    let records = productivity::compute_panel_metrics(&corpus, panel.units, config);
    let assignments = crate::classify::classify_all(
        &records,
        &config.classes.measures,
        &config.classes.thresholds,
    );
    Ok(Pipeline {
        corpus,
        records,
        assignments,
        periods: config.periods(),
        dropped_no_discipline,
        dropped_no_first_year,
    })
}

pub fn write_panel_csv(
    path: &Path,
    meta: &OutputMeta,
    pipeline: &Pipeline,
    with_metrics: bool,
) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    let mut header = vec![
        "author_id",
        "period",
        "discipline",
        "academic_age",
        "age_group",
        "gender",
        "research_intensive",
        "tie_broken",
        "n_pubs",
    ];
    if with_metrics {
        header.extend(["p1", "p2", "p3", "p4", "team", "collab", "intl", "medperc"]);
    }
    w.record(&header)?;
    for record in &pipeline.records {
        let u = &record.unit;
        let mut row = vec![
            u.author_id.clone(),
            pipeline.periods.label(u.period_index),
            u.discipline.clone(),
            u.academic_age.to_string(),
            u.age_group.label().to_string(),
            u.gender.as_str().to_string(),
            if u.research_intensive { "1" } else { "0" }.to_string(),
            if u.tie_broken { "1" } else { "0" }.to_string(),
            u.pub_indices.len().to_string(),
        ];
        if with_metrics {
            let m = &record.measures;
            let c = &record.covariates;
            row.extend([
                fmt(m.p1),
                fmt(m.p2),
                fmt(m.p3),
                fmt(m.p4),
                fmt(c.avg_team_size),
                fmt(c.collaboration_rate),
                fmt(c.intl_collaboration_rate),
                fmt(c.median_journal_percentile),
            ]);
        }
        w.record(&row)?;
    }
    w.finish()
}

pub fn write_assignments_csv(path: &Path, meta: &OutputMeta, pipeline: &Pipeline) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    let mut thresholds: Vec<f64> = pipeline.assignments.thresholds.clone();
    thresholds.reverse(); // descending: top10 before top1
    let mut header = vec![
        "author_id".to_string(),
        "period".to_string(),
        "measure".to_string(),
        "rank".to_string(),
        "cohort_size".to_string(),
    ];
    header.extend(thresholds.iter().map(|&t| class_label(t)));
    w.record(&header)?;
    for (&measure, per_unit) in &pipeline.assignments.by_measure {
        for (record, a) in pipeline.records.iter().zip(per_unit) {
            let mut row = vec![
                record.unit.author_id.clone(),
                pipeline.periods.label(record.unit.period_index),
                measure.as_str().to_string(),
                a.rank.to_string(),
                a.cohort_size.to_string(),
            ];
            for i in (0..a.memberships.len()).rev() {
                row.push(if a.memberships[i] { "1" } else { "0" }.to_string());
            }
            w.record(&row)?;
        }
    }
    w.finish()
}

pub fn write_shares_csv(
    path: &Path,
    meta: &OutputMeta,
    tables: &[ShareTable],
    dims: &[Dim],
) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    let mut header: Vec<String> = dims.iter().map(|d| d.name().to_string()).collect();
    header.extend(
        ["class", "measure", "segment", "numerator", "denominator", "share_percent"]
            .map(String::from),
    );
    w.record(&header)?;
    for table in tables {
        for row in &table.rows {
            let mut fields = row.key.clone();
            fields.extend([
                class_label(row.class_percent),
                row.measure.as_str().to_string(),
                row.segment.as_str().to_string(),
                fmt(row.numerator),
                fmt(row.denominator),
                fmt(row.share_percent),
            ]);
            w.record(&fields)?;
        }
    }
    w.finish()
}

pub fn write_rpi_csv(
    path: &Path,
    meta: &OutputMeta,
    rows: &[(f64, Measure, Vec<RpiRow>)],
    dims: &[Dim],
) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    let mut header: Vec<String> = dims.iter().map(|d| d.name().to_string()).collect();
    header.extend(
        [
            "class", "measure", "rpi_men", "rpi_women", "tp_men", "all_men", "tp_women",
            "all_women",
        ]
        .map(String::from),
    );
    w.record(&header)?;
    let undef = "-".to_string();
    for (threshold, measure, table) in rows {
        for row in table {
            let mut fields = row.key.clone();
            fields.extend([
                class_label(*threshold),
                measure.as_str().to_string(),
                row.rpi_men.map(fmt).unwrap_or_else(|| undef.clone()),
                row.rpi_women.map(fmt).unwrap_or_else(|| undef.clone()),
                row.tp_men.to_string(),
                row.all_men.to_string(),
                row.tp_women.to_string(),
                row.all_women.to_string(),
            ]);
            w.record(&fields)?;
        }
    }
    w.finish()
}

pub fn write_distribution_csv(
    path: &Path,
    meta: &OutputMeta,
    rows: &[DistRow],
    row_dims: &[Dim],
    col_dim: Option<Dim>,
) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    let mut header: Vec<String> = row_dims.iter().map(|d| d.name().to_string()).collect();
    header.push(col_dim.map(|d| d.name().to_string()).unwrap_or_else(|| "column".into()));
    header.extend(["count", "col_percent"].map(String::from));
    w.record(&header)?;
    for row in rows {
        let mut fields = row.row_key.clone();
        fields.push(row.col_key.clone());
        fields.push(row.count.to_string());
        fields.push(fmt(row.col_percent));
        w.record(&fields)?;
    }
    w.finish()
}

pub fn write_correlations_csv(
    path: &Path,
    meta: &OutputMeta,
    rows: &[CorrRow],
    dims: &[Dim],
) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    let mut header: Vec<String> = dims.iter().map(|d| d.name().to_string()).collect();
    header.extend(["measure_a", "measure_b", "n", "pearson_r"].map(String::from));
    w.record(&header)?;
    for row in rows {
        let mut fields = row.key.clone();
        fields.extend([
            row.measure_a.as_str().to_string(),
            row.measure_b.as_str().to_string(),
            row.n.to_string(),
            row.r.map(fmt).unwrap_or_else(|| "-".to_string()),
        ]);
        w.record(&fields)?;
    }
    w.finish()
}

pub fn write_coefficients_csv(path: &Path, meta: &OutputMeta, fit: &GlmFit) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    w.record(["name", "beta", "se", "exp_b", "ci_low", "ci_high", "p"])?;
    for c in &fit.coefficients {
        w.record([
            c.name.clone(),
            fmt(c.beta),
            fmt(c.se),
            fmt(c.exp_b),
            fmt(c.ci_low),
            fmt(c.ci_high),
            fmt(c.p_value),
        ])?;
    }
    w.finish()
}

pub fn write_fixed_effects_csv(path: &Path, meta: &OutputMeta, fit: &GlmFit) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    w.record(["effect", "level", "shift"])?;
    for e in &fit.period_effects {
        w.record(["period".to_string(), e.level.clone(), fmt(e.shift)])?;
    }
    for e in &fit.discipline_effects {
        w.record(["discipline".to_string(), e.level.clone(), fmt(e.shift)])?;
    }
    w.finish()
}

#[derive(Serialize)]
struct FitStats<'a> {
    config_hash: &'a str,
    seed: u64,
    version: &'a str,
    loglik_full: f64,
    loglik_null: f64,
    mcfadden: f64,
    n: usize,
    iterations: usize,
    converged: bool,
    score_max: f64,
}

pub fn write_fitstats_json(path: &Path, meta: &OutputMeta, fit: &GlmFit) -> Result<()> {
    let stats = FitStats {
        config_hash: &meta.config_hash,
        seed: meta.seed,
        version: VERSION,
        loglik_full: fit.loglik_full,
        loglik_null: fit.loglik_null,
        mcfadden: fit.mcfadden_r2,
        n: fit.n_obs,
        iterations: fit.iterations,
        converged: fit.converged,
        score_max: fit.score_max,
    };
    let json = serde_json::to_string_pretty(&stats).expect("fit stats serialize");
    std::fs::write(path, json + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_collinearity_csv(
    path: &Path,
    meta: &OutputMeta,
    rows: &[(String, String, f64)],
) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    w.record(["period", "covariate", "inverse_corr_diag"])?;
    for (period, covariate, value) in rows {
        w.record([period.clone(), covariate.clone(), fmt(*value)])?;
    }
    w.finish()
}

pub fn write_ci_overlaps_csv(
    path: &Path,
    meta: &OutputMeta,
    rows: &[felogit::OverlapRow],
) -> Result<()> {
    let mut w = TableWriter::create(path, meta)?;
    w.record(["covariate", "fit", "overlaps_with"])?;
    for row in rows {
        w.record([row.covariate.clone(), row.fit.clone(), row.overlaps.join(";")])?;
    }
    w.finish()
}

/// Collinearity diagnostic over the seven covariate columns, per period plus
/// pooled. Periods whose columns degenerate (zero variance) are skipped with
/// a warning so small fixtures still produce a table.
pub fn collinearity_rows(
    pipeline: &Pipeline,
) -> (Vec<(String, String, f64)>, Vec<String>) {
    use crate::felogit::Covariate;
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    let mut groups: Vec<(String, Vec<&UnitRecord>)> = Vec::new();
    groups.push(("all".to_string(), pipeline.records.iter().collect()));
    for period in pipeline.periods.iter() {
        let subset: Vec<&UnitRecord> = pipeline
            .records
            .iter()
            .filter(|r| r.unit.period_index == period.index)
            .collect();
        if !subset.is_empty() {
            groups.push((period.label(), subset));
        }
    }
    for (label, subset) in groups {
        let columns: Vec<(String, Vec<f64>)> = Covariate::ALL
            .iter()
            .map(|c| {
                (
                    c.name().to_string(),
                    subset.iter().map(|r| c.value(r)).collect(),
                )
            })
            .collect();
        match felogit::collinearity_diagnostic(&columns) {
            Ok(diag) => {
                for (name, value) in diag {
                    rows.push((label.clone(), name, value));
                }
            }
            Err(e) => warnings.push(format!("collinearity[{label}]: {e}")),
        }
    }
    (rows, warnings)
}

#[derive(Serialize)]
struct Policies {
    share_basis: &'static str,
    affiliation_tie: &'static str,
    discipline_tie: &'static str,
    gender_unknown: &'static str,
}

#[derive(Serialize)]
struct Summary<'a> {
    config_hash: &'a str,
    seed: u64,
    version: &'a str,
    policies: Policies,
    ingest: &'a ingest::IngestReport,
    panel_units: usize,
    dropped_no_discipline: usize,
    dropped_no_first_year: usize,
    members_per_class: BTreeMap<String, usize>,
    glm_fits: BTreeMap<String, bool>,
    warnings: Vec<String>,
}

/// Run the full pipeline and write the complete output set.
pub fn run_report(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let pipeline = build_pipeline(config)?;
    write_report_outputs(config, &pipeline)
}

/// Emit every analysis output for an already-built pipeline into
/// `paths.output_dir`. Returns the paths written.
pub fn write_report_outputs(config: &RunConfig, pipeline: &Pipeline) -> Result<Vec<PathBuf>> {
    let out = &config.paths.output_dir;
    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.clone(),
        source,
    })?;
    let meta = OutputMeta::from_config(config);
    let label = pipeline.period_label();
    let mut written = Vec::new();
    let mut warnings: Vec<String> = Vec::new();

    let panel_path = out.join("panel.csv");
    write_panel_csv(&panel_path, &meta, pipeline, true)?;
    written.push(panel_path);

    let assignments_path = out.join("assignments.csv");
    write_assignments_csv(&assignments_path, &meta, pipeline)?;
    written.push(assignments_path);

    // shares: per (class, measure), grouped by period
    let share_dims = [Dim::Period];
    let mut share_tables = Vec::new();
    for (t_idx, _) in config.classes.thresholds.iter().enumerate() {
        for &measure in &config.classes.measures {
            let table = metrics::concentration_share(
                &pipeline.records,
                &pipeline.assignments,
                measure,
                t_idx,
                config.shares.basis,
                &share_dims,
                config.gender.unknown_policy,
                &label,
            );
            warnings.extend(table.warnings.iter().cloned());
            share_tables.push(table);
        }
    }
    let shares_path = out.join("shares.csv");
    write_shares_csv(&shares_path, &meta, &share_tables, &share_dims)?;
    written.push(shares_path);

    // RPI: per (class, measure), grouped by period
    let rpi_dims = [Dim::Period];
    let mut rpi_rows = Vec::new();
    for (t_idx, &threshold) in config.classes.thresholds.iter().enumerate() {
        for &measure in &config.classes.measures {
            let table = metrics::rpi_table(
                &pipeline.records,
                &pipeline.assignments,
                measure,
                t_idx,
                &rpi_dims,
                &label,
            );
            rpi_rows.push((threshold, measure, table));
        }
    }
    let rpi_path = out.join("rpi.csv");
    write_rpi_csv(&rpi_path, &meta, &rpi_rows, &rpi_dims)?;
    written.push(rpi_path);

    // distribution of the total sample by each dimension, per period
    let tables_path = out.join("tables.csv");
    {
        let mut w = TableWriter::create(&tables_path, &meta)?;
        w.record(["dimension", "value", "period", "count", "col_percent"])?;
        for (dim, rows) in [Dim::Gender, Dim::Affiliation, Dim::AgeGroup, Dim::Discipline]
            .iter()
            .map(|&dim| {
                (
                    dim,
                    metrics::distribution_table(
                        &pipeline.records,
                        &[dim],
                        Some(Dim::Period),
                        None,
                        config.gender.unknown_policy,
                        &label,
                    ),
                )
            })
        {
            for row in rows {
                w.record([
                    dim.name().to_string(),
                    row.row_key.join("|"),
                    row.col_key.clone(),
                    row.count.to_string(),
                    fmt(row.col_percent),
                ])?;
            }
        }
        w.finish()?;
    }
    written.push(tables_path);

    // measure correlations by period
    let corr_dims = [Dim::Period];
    let corr_rows = metrics::measure_correlations(&pipeline.records, &corr_dims, &label);
    let corr_path = out.join("correlations.csv");
    write_correlations_csv(&corr_path, &meta, &corr_rows, &corr_dims)?;
    written.push(corr_path);

    // collinearity diagnostics
    let (coll_rows, coll_warnings) = collinearity_rows(pipeline);
    warnings.extend(coll_warnings);
    let coll_path = out.join("collinearity.csv");
    write_collinearity_csv(&coll_path, &meta, &coll_rows)?;
    written.push(coll_path);

    // regressions for the configured class x measure grid
    let spec = GlmSpec::from_config(&config.glm);
    let mut fits: Vec<(String, f64, Measure, GlmFit)> = Vec::new();
    let mut fit_status: BTreeMap<String, bool> = BTreeMap::new();
    for &class in &config.glm.classes {
        let t_idx = pipeline
            .assignments
            .threshold_index(class)
            .ok_or_else(|| Error::Config(format!("glm class {class} not classified")))?;
        for &measure in &config.glm.measures {
            let tag = format!("{}_{}", class_label(class), measure.as_str());
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
            fit_status.insert(tag.clone(), fit.converged);

            let coeff_path = out.join(format!("coefficients_{tag}.csv"));
            write_coefficients_csv(&coeff_path, &meta, &fit)?;
            written.push(coeff_path);
            let fe_path = out.join(format!("fixed_effects_{tag}.csv"));
            write_fixed_effects_csv(&fe_path, &meta, &fit)?;
            written.push(fe_path);
            let stats_path = out.join(format!("fitstats_{tag}.json"));
            write_fitstats_json(&stats_path, &meta, &fit)?;
            written.push(stats_path);

            fits.push((tag, class, measure, fit));
        }
    }

    // CI overlaps across measures, per class with >= 2 fitted measures
    for &class in &config.glm.classes {
        let class_fits: Vec<(String, &GlmFit)> = fits
            .iter()
            .filter(|(_, c, _, _)| *c == class)
            .map(|(tag, _, _, fit)| (tag.clone(), fit))
            .collect();
        if class_fits.len() >= 2 {
            let rows = felogit::ci_overlap_report(&class_fits)?;
            let overlap_path = out.join(format!("ci_overlaps_{}.csv", class_label(class)));
            write_ci_overlaps_csv(&overlap_path, &meta, &rows)?;
            written.push(overlap_path);
        }
    }

    // summary
    let mut members_per_class = BTreeMap::new();
    for (t_idx, &threshold) in config.classes.thresholds.iter().enumerate() {
        for &measure in &config.classes.measures {
            let count = pipeline
                .assignments
                .for_measure(measure)
                .iter()
                .filter(|a| a.memberships[t_idx])
                .count();
            members_per_class.insert(
                format!("{}_{}", class_label(threshold), measure.as_str()),
                count,
            );
        }
    }
    let summary = Summary {
        config_hash: &meta.config_hash,
        seed: meta.seed,
        version: VERSION,
        policies: Policies {
            share_basis: config.shares.basis.as_str(),
            affiliation_tie: "research_intensive",
            discipline_tie: "seeded_uniform_choice",
            gender_unknown: match config.gender.unknown_policy {
                crate::config::GenderPolicy::Exclude => "excluded_from_gender_splits",
                crate::config::GenderPolicy::Include => "included",
            },
        },
        ingest: &pipeline.corpus.report,
        panel_units: pipeline.records.len(),
        dropped_no_discipline: pipeline.dropped_no_discipline,
        dropped_no_first_year: pipeline.dropped_no_first_year,
        members_per_class,
        glm_fits: fit_status,
        warnings,
    };
    let summary_path = out.join("summary.json");
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes");
    std::fs::write(&summary_path, json + "\n").map_err(|source| Error::Io {
        path: summary_path.clone(),
        source,
    })?;
    written.push(summary_path);

    Ok(written)
}

/// Write the generated corpus and ground truth for the `simulate` command.
pub fn run_simulate(config: &RunConfig) -> Result<Vec<PathBuf>> {
    let (generated, truth) = simgen::generate(&config.sim, config)?;
    let dir = &config.paths.output_dir;
    simgen::write_corpus(&generated, &truth, dir)?;
    Ok(vec![
        dir.join("publications.jsonl"),
        dir.join("authors.csv"),
        dir.join("journals.csv"),
        dir.join("institutions.csv"),
        dir.join("ground_truth.json"),
    ])
}
