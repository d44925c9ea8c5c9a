//! Acceptance gate: one test per criterion, each printing a PASS line with
//! the measured quantity. Expected values come from independent oracles:
//! generator bookkeeping, brute-force sort-and-scan, closed-form algebra,
//! and the naive dense reference solver in `reference_glm`.

mod reference_glm;

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use topperf::classify::classify_cohort;
use topperf::config::{GenderPolicy, Measure, RunConfig, ShareBasis};
use topperf::felogit::{
    self, ci_overlap_report, collinearity_diagnostic, GlmCoefficient, GlmFit, GlmSpec,
};
use topperf::ingest::{derive_first_pub_year, Gender};
use topperf::metrics::{self, rpi_from_counts};
use topperf::panel::{AgeGroup, AuthorPeriodUnit};
use topperf::productivity::{prestige_weight, CovariateSet, ProductivityVector, UnitRecord};
use topperf::report::Pipeline;
use topperf::simgen::{self, CountDistribution, GroundTruth, InjectedEffects, SimConfig};

/// Generator-backed pipeline: corpus and classifications built entirely in
/// memory from a sim config.
fn pipeline_from_sim(sim: &SimConfig, run: &RunConfig) -> (Pipeline, GroundTruth) {
    let (generated, truth) = simgen::generate(sim, run).expect("generation succeeds");
    let mut corpus = generated.into_corpus(run).expect("closed-world corpus ingests");
    derive_first_pub_year(&mut corpus).expect("declared years precede observed output");
    let pipeline =
        topperf::report::build_pipeline_from_corpus(corpus, run).expect("pipeline builds");
    (pipeline, truth)
}

// ---------------------------------------------------------------------------
// Criterion 1: venue weight anchors, exact.
#[test]
fn c01_weight_rule() {
    assert_eq!(prestige_weight(Some(90)), 0.90);
    for r in 0..=10u8 {
        assert_eq!(prestige_weight(Some(r)), 0.10);
    }
    assert_eq!(prestige_weight(None), 0.10);
    assert_eq!(prestige_weight(Some(99)), 0.99);
    println!("[PASS] c01 weight rule: w(90)=0.90, w(r<=10)=0.10, w(99)=0.99 exactly");
}

// ---------------------------------------------------------------------------
// Criterion 2: fractional closure on a 1,000-author closed-world corpus.
#[test]
fn c02_fractional_closure() {
    let run = RunConfig::default();
    let sim = SimConfig {
        n_authors: 1000,
        ..SimConfig::default()
    };
    let (pipeline, truth) = pipeline_from_sim(&sim, &run);

    // independent per-period publication counts, straight off the corpus
    let mut pub_count = vec![0usize; pipeline.periods.len()];
    for publication in &pipeline.corpus.publications {
        pub_count[pipeline.periods.index_of(publication.year).unwrap()] += 1;
    }
    assert_eq!(pub_count, truth.per_period_pub_count);

    let mut p4_sum = vec![0.0f64; pipeline.periods.len()];
    for record in &pipeline.records {
        p4_sum[record.unit.period_index] += record.measures.p4;
    }
    for (period, (&sum, &count)) in p4_sum.iter().zip(&pub_count).enumerate() {
        let diff = (sum - count as f64).abs();
        assert!(
            diff < 1e-9,
            "period {period}: sum p4 {sum} vs {count} publications (diff {diff:.3e})"
        );
    }
    println!(
        "[PASS] c02 fractional closure: sum(p4) equals publication count in all {} periods ({} units)",
        pub_count.len(),
        pipeline.records.len()
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: tie-inclusive classification equals a brute-force oracle on
// 200 random cohorts; classes nest.
fn oracle_members(values: &[f64], percent: f64) -> Vec<bool> {
    let n = values.len();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let k = (((percent * n as f64) / 100.0).floor() as usize).clamp(1, n);
    let cutoff = sorted[k - 1];
    values.iter().map(|&v| v >= cutoff).collect()
}

#[test]
fn c03_classification_oracle() {
    let thresholds = [1.0, 3.0, 5.0, 10.0];
    let mut rng = ChaCha8Rng::seed_from_u64(0xC3);
    for case in 0..200 {
        let n = rng.random_range(5..=5000);
        let with_ties = case % 2 == 0;
        let values: Vec<f64> = (0..n)
            .map(|_| {
                if with_ties {
                    rng.random_range(0..12) as f64
                } else {
                    rng.random_range(0.0..1e6)
                }
            })
            .collect();
        let ids: Vec<String> = (0..n).map(|i| format!("A{i:05}")).collect();
        let items: Vec<(&str, f64)> = ids
            .iter()
            .map(|s| s.as_str())
            .zip(values.iter().copied())
            .collect();
        let assignments = classify_cohort(&items, &thresholds);
        for (t, &percent) in thresholds.iter().enumerate() {
            let expected = oracle_members(&values, percent);
            for i in 0..n {
                assert_eq!(
                    assignments[i].memberships[t], expected[i],
                    "case {case} n {n} threshold {percent} unit {i}"
                );
            }
        }
        for a in &assignments {
            assert!(!a.memberships[0] || a.memberships[1]);
            assert!(!a.memberships[1] || a.memberships[2]);
            assert!(!a.memberships[2] || a.memberships[3]);
        }
    }
    println!("[PASS] c03 classification: 200 random cohorts match the sort-and-scan oracle exactly; classes nest");
}

// ---------------------------------------------------------------------------
// Criterion 4: measure-consistent share bound and monotonicity, 100 seeds.
#[test]
fn c04_share_bound_and_monotonicity() {
    let run = RunConfig::default();
    let label = |i: usize| format!("{i}");
    for seed in 0..100u64 {
        let sim = SimConfig {
            seed,
            n_authors: 150,
            ..SimConfig::default()
        };
        let (pipeline, _) = pipeline_from_sim(&sim, &run);
        for measure in Measure::ALL {
            let mut previous = 0.0f64;
            for (t_idx, &percent) in pipeline.assignments.thresholds.iter().enumerate() {
                let table = metrics::concentration_share(
                    &pipeline.records,
                    &pipeline.assignments,
                    measure,
                    t_idx,
                    ShareBasis::Measure,
                    &[],
                    GenderPolicy::Exclude,
                    &label,
                );
                let top = &table.rows[0];
                // tie-inclusive classes hold at least their headcount share;
                // on skewed measures this clears the nominal percentage
                let members = pipeline
                    .assignments
                    .for_measure(measure)
                    .iter()
                    .filter(|a| a.memberships[t_idx])
                    .count();
                let headcount = 100.0 * members as f64 / pipeline.records.len() as f64;
                assert!(
                    top.share_percent >= headcount - 1e-9,
                    "seed {seed} {measure} top{percent}: share {} under headcount {headcount}",
                    top.share_percent
                );
                assert!(
                    top.share_percent >= percent - 1e-9,
                    "seed {seed} {measure} top{percent}: share {} under nominal bound",
                    top.share_percent
                );
                assert!(
                    top.share_percent >= previous - 1e-9,
                    "seed {seed} {measure}: share not monotone over nested classes"
                );
                previous = top.share_percent;
            }
        }
    }
    println!("[PASS] c04 share bound: share(top p%) >= p and monotone over nested classes, 100 seeds x 4 measures");
}

// ---------------------------------------------------------------------------
// Criterion 5: RPI harmonic identity plus the exact hand case.
#[test]
fn c05_rpi_identity() {
    let (men, women) = rpi_from_counts(3, 30, 1, 20);
    assert_eq!(men.unwrap(), 2.0);
    assert_eq!(women.unwrap(), 0.5);

    let mut rng = ChaCha8Rng::seed_from_u64(0xC5);
    let mut defined = 0usize;
    for _ in 0..2000 {
        let tp_m = rng.random_range(0..50usize);
        let all_m = tp_m + rng.random_range(0..500usize);
        let tp_w = rng.random_range(0..50usize);
        let all_w = tp_w + rng.random_range(0..500usize);
        let (rpi_m, rpi_w) = rpi_from_counts(tp_m, all_m, tp_w, all_w);
        match (rpi_m, rpi_w) {
            (Some(m), Some(w)) => {
                defined += 1;
                assert!(
                    (m * w - 1.0).abs() < 1e-12,
                    "rpi product {m} * {w} off unity"
                );
                assert!(m > 0.0 && w > 0.0);
            }
            (None, None) => {
                assert!(tp_m == 0 || tp_w == 0 || all_m == 0 || all_w == 0);
            }
            other => panic!("one-sided definition {other:?}"),
        }
    }
    assert!(defined > 1000, "property test barely exercised defined cases");
    println!("[PASS] c05 RPI: hand case (3/30)/(1/20) = 2.0 exactly; harmonic identity within 1e-12 on {defined} cases");
}

// ---------------------------------------------------------------------------
// Criterion 6: production fit equals the naive dense reference to 1e-6 per
// coordinate on 20 fixtures; converged gradients below 1e-8.
fn synth_units(n: usize, seed: u64, n_disciplines: usize) -> (Vec<UnitRecord>, Vec<bool>) {
    let disciplines = ["CHEM", "MATH", "PHYS", "MED", "BIO", "ENER"];
    let n_disciplines = n_disciplines.min(disciplines.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::with_capacity(n);
    let mut response = Vec::with_capacity(n);
    for i in 0..n {
        let age = rng.random_range(0..35);
        let gender = if rng.random_bool(0.5) { Gender::M } else { Gender::F };
        let discipline = disciplines[rng.random_range(0..n_disciplines)];
        let team = 1.0 + rng.random_range(0.0..6.0);
        let collab = rng.random_range(0.0..100.0);
        let intl = rng.random_range(0.0..100.0);
        let medp = rng.random_range(0.0..99.0);
        let period = rng.random_range(0..5);
        let research_intensive = rng.random_bool(0.25);
        let disc_effect = 0.15 * (discipline.len() as f64 - 4.0);
        let eta = -2.2
            + 0.5 * f64::from(gender == Gender::M)
            + 0.04 * age as f64
            + 0.012 * medp
            + 0.05 * (period as f64)
            + disc_effect;
        let pr = 1.0 / (1.0 + (-eta).exp());
        response.push(rng.random_bool(pr));
        records.push(UnitRecord {
            unit: AuthorPeriodUnit {
                author_id: format!("A{i:06}"),
                period_index: period,
                discipline: discipline.to_string(),
                tie_broken: false,
                seed_used: 0,
                academic_age: age,
                age_group: AgeGroup::from_age(age),
                gender,
                research_intensive,
                pub_indices: vec![],
            },
            measures: ProductivityVector {
                p1: 1.0,
                p2: 1.0,
                p3: 1.0,
                p4: 1.0,
            },
            covariates: CovariateSet {
                avg_team_size: team,
                collaboration_rate: collab,
                intl_collaboration_rate: intl,
                median_journal_percentile: medp,
            },
        });
    }
    (records, response)
}

#[test]
fn c06_glm_reference_equivalence() {
    let run = RunConfig::default();
    let periods = run.periods();
    let spec = GlmSpec::default();
    let covariate_names: Vec<&str> = spec.covariates.iter().map(|c| c.name()).collect();
    let mut max_diff = 0.0f64;
    for fixture in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + fixture);
        let n = rng.random_range(300..=5000);
        let n_disciplines = rng.random_range(1..=6);
        let (records, response) = synth_units(n, 2000 + fixture, n_disciplines);

        let dataset = felogit::build_dataset_with_response(
            &records,
            &response,
            &spec,
            &periods,
            GenderPolicy::Exclude,
        )
        .expect("dataset builds");
        let fit = felogit::fit(&dataset, &spec).expect("production fit converges");
        assert!(
            fit.score_max < 1e-8,
            "fixture {fixture}: gradient {:.3e} above tolerance",
            fit.score_max
        );

        let ref_rows: Vec<reference_glm::RefRow> = records
            .iter()
            .zip(&response)
            .map(|(r, &y)| reference_glm::RefRow {
                y: f64::from(y),
                period: r.unit.period_index,
                discipline: r.unit.discipline.clone(),
                covariates: spec.covariates.iter().map(|c| c.value(r)).collect(),
            })
            .collect();
        let reference =
            reference_glm::fit_reference(&ref_rows, &covariate_names).expect("reference converges");
        assert!(reference.score_max < 1e-9);

        assert_eq!(
            fit.full_beta.len(),
            reference.beta.len(),
            "fixture {fixture}: column count"
        );
        // covariate blocks align by construction in both implementations
        let tail = reference.names.len() - covariate_names.len();
        assert_eq!(&reference.names[tail..], covariate_names);
        for (j, (a, b)) in fit.full_beta.iter().zip(&reference.beta).enumerate() {
            let diff = (a - b).abs();
            max_diff = max_diff.max(diff);
            assert!(
                diff < 1e-6,
                "fixture {fixture} column {j} ({}): {a} vs {b} (diff {diff:.3e})",
                fit.column_names[j]
            );
        }
    }
    println!("[PASS] c06 GLM oracle: 20 fixtures match the dense reference (max coordinate diff {max_diff:.3e}); gradients < 1e-8");
}

// ---------------------------------------------------------------------------
// Criterion 7: injected gender odds ratio 2.0 recovered within [1.8, 2.2] in
// at least 38 of 40 seeds at ~50,000 units; null effect stays in [0.9, 1.1].
const C07_N_AUTHORS: usize = 13_500;

fn recovery_config(seed: u64, gender_log_odds: f64) -> SimConfig {
    SimConfig {
        seed,
        n_authors: C07_N_AUTHORS,
        male_share: 0.5,
        unknown_gender_share: 0.0,
        entry_year_min: 1980,
        entry_year_max: 2018,
        activity_rate: 0.65,
        counts: CountDistribution::Lotka {
            alpha: 2.0,
            max_count: 40,
        },
        mean_coauthors: 2.0,
        effects: InjectedEffects {
            gender_log_odds,
            age_slope: 0.05,
            base_rate: 0.10,
        },
        ..SimConfig::default()
    }
}

fn recovered_gender_or(sim: &SimConfig, run: &RunConfig) -> (f64, usize) {
    let (pipeline, truth) = pipeline_from_sim(sim, run);
    let mut labels: BTreeMap<(&str, usize), bool> = BTreeMap::new();
    for unit in &truth.units {
        labels.insert((unit.author_id.as_str(), unit.period_index), unit.label);
    }
    let response: Vec<bool> = pipeline
        .records
        .iter()
        .map(|r| labels[&(r.unit.author_id.as_str(), r.unit.period_index)])
        .collect();
    let spec = GlmSpec::default();
    let dataset = felogit::build_dataset_with_response(
        &pipeline.records,
        &response,
        &spec,
        &pipeline.periods,
        GenderPolicy::Exclude,
    )
    .expect("dataset builds");
    let n_obs = dataset.n_obs();
    let fit = felogit::fit(&dataset, &spec).expect("fit converges");
    assert!(fit.score_max < 1e-8);
    let exp_b = fit.coefficient("gender_male").expect("gender fitted").exp_b;
    (exp_b, n_obs)
}

#[test]
fn c07_effect_recovery() {
    let run = RunConfig::default();

    // null model sanity: no injected effect leaves the odds ratio near 1
    let (null_or, n0) = recovered_gender_or(&recovery_config(4242, 0.0), &run);
    assert!(
        (0.9..=1.1).contains(&null_or),
        "null gender odds ratio {null_or} outside [0.9, 1.1]"
    );

    let truth_or = 2.0f64;
    let mut inside = 0usize;
    let mut n_units = 0usize;
    let mut estimates = Vec::with_capacity(40);
    for seed in 0..40u64 {
        let (exp_b, n) = recovered_gender_or(&recovery_config(seed, truth_or.ln()), &run);
        n_units = n;
        if (1.8..=2.2).contains(&exp_b) {
            inside += 1;
        }
        estimates.push(exp_b);
    }
    // panels of this size carry ~50k usable units
    assert!(
        (45_000..=60_000).contains(&n_units),
        "unit count {n_units} off the calibrated scale"
    );
    assert!(
        inside >= 38,
        "only {inside}/40 seeds inside [1.8, 2.2]: {estimates:?}"
    );
    println!(
        "[PASS] c07 effect recovery: {inside}/40 seeds inside [1.8, 2.2] at n={n_units} units; null OR {null_or:.3} (n={n0})"
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: diagnostics against closed forms and brute force.
#[test]
fn c08_diagnostics() {
    // (a) two-variable inverse-correlation diagonal = 1/(1-r^2)
    let n = 20_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    let r = 0.6f64;
    let mut x1 = Vec::with_capacity(n);
    let mut x2 = Vec::with_capacity(n);
    for _ in 0..n {
        let a: f64 = rng.random_range(-1.0..1.0);
        let e: f64 = rng.random_range(-1.0..1.0);
        x1.push(a);
        x2.push(r * a + (1.0 - r * r).sqrt() * e);
    }
    let diag = collinearity_diagnostic(&[("x1".into(), x1), ("x2".into(), x2)]).unwrap();
    let expected = 1.0 / (1.0 - r * r);
    for (name, value) in &diag {
        assert!(
            (value - expected).abs() < 0.08,
            "{name}: diagonal {value} vs closed form {expected}"
        );
    }

    // (b) McFadden: zero when the full model is the null model; in [0,1)
    let run = RunConfig::default();
    let periods = run.periods();
    let (records, response) = synth_units(800, 0x1CE, 3);
    let null_spec = GlmSpec {
        covariates: vec![],
        fe_period: false,
        fe_discipline: false,
        ..GlmSpec::default()
    };
    let ds = felogit::build_dataset_with_response(
        &records,
        &response,
        &null_spec,
        &periods,
        GenderPolicy::Exclude,
    )
    .unwrap();
    let null_fit = felogit::fit(&ds, &null_spec).unwrap();
    assert_eq!(null_fit.mcfadden_r2, 0.0);

    let full_spec = GlmSpec::default();
    let ds = felogit::build_dataset_with_response(
        &records,
        &response,
        &full_spec,
        &periods,
        GenderPolicy::Exclude,
    )
    .unwrap();
    let full_fit = felogit::fit(&ds, &full_spec).unwrap();
    assert!(full_fit.mcfadden_r2 >= 0.0 && full_fit.mcfadden_r2 < 1.0);
    assert!(
        (full_fit.mcfadden_r2 - (1.0 - full_fit.loglik_full / full_fit.loglik_null)).abs() < 1e-10
    );

    // (c) CI-overlap table equals brute-force interval intersection,
    // with closed endpoints (touching intervals overlap)
    let synth_fit = |cis: &[(f64, f64)]| -> GlmFit {
        GlmFit {
            coefficients: cis
                .iter()
                .enumerate()
                .map(|(i, &(lo, hi))| GlmCoefficient {
                    name: format!("x{i}"),
                    beta: ((lo + hi) / 2.0).ln(),
                    se: 0.1,
                    exp_b: (lo + hi) / 2.0,
                    ci_low: lo,
                    ci_high: hi,
                    p_value: 0.5,
                })
                .collect(),
            period_effects: vec![],
            discipline_effects: vec![],
            loglik_full: -1.0,
            loglik_null: -2.0,
            mcfadden_r2: 0.5,
            n_obs: 10,
            converged: true,
            iterations: 1,
            score_max: 0.0,
            full_beta: vec![],
            column_names: vec![],
        }
    };
    let fit_a = synth_fit(&[(1.0, 1.1), (0.8, 1.2)]);
    let fit_b = synth_fit(&[(1.1, 1.2), (0.9, 1.0)]);
    let fit_c = synth_fit(&[(1.3, 1.4), (2.0, 3.0)]);
    let fits = vec![
        ("a".to_string(), &fit_a),
        ("b".to_string(), &fit_b),
        ("c".to_string(), &fit_c),
    ];
    let rows = ci_overlap_report(&fits).unwrap();
    for row in &rows {
        let ci = row.covariate[1..].parse::<usize>().unwrap();
        let own = fits
            .iter()
            .find(|(l, _)| *l == row.fit)
            .map(|(_, f)| &f.coefficients[ci])
            .unwrap();
        let expected_overlaps: Vec<String> = fits
            .iter()
            .filter(|(l, _)| *l != row.fit)
            .filter(|(_, f)| {
                let other = &f.coefficients[ci];
                own.ci_low <= other.ci_high && other.ci_low <= own.ci_high
            })
            .map(|(l, _)| l.clone())
            .collect();
        assert_eq!(row.overlaps, expected_overlaps, "{} {}", row.covariate, row.fit);
    }
    // touching endpoints count (a.x0 = [1.0,1.1] vs b.x0 = [1.1,1.2])
    let touching = rows
        .iter()
        .find(|r| r.covariate == "x0" && r.fit == "a")
        .unwrap();
    assert!(touching.overlaps.contains(&"b".to_string()));
    // disjoint intervals do not (c.x0 = [1.3,1.4])
    assert!(!touching.overlaps.contains(&"c".to_string()));

    // identical fits overlap everywhere
    let twin = vec![("l".to_string(), &fit_a), ("r".to_string(), &fit_a)];
    for row in ci_overlap_report(&twin).unwrap() {
        assert_eq!(row.overlaps.len(), 1);
    }

    println!("[PASS] c08 diagnostics: VIF diagonal ~ {expected:.4}, McFadden 0 at null, CI overlaps match brute force");
}

// ---------------------------------------------------------------------------
// Criterion 9: report on the bundled fixture is byte-identical across reruns
// and across thread caps.
#[test]
fn c09_report_determinism() {
    let fixture = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let tmp = tempfile::tempdir().unwrap();
    let run = |out: &Path, threads: &str| {
        let status = Command::new(env!("CARGO_BIN_EXE_topperf"))
            .current_dir(&fixture)
            .args([
                "--config",
                "config.toml",
                "--threads",
                threads,
                "--out",
                out.to_str().unwrap(),
                "report",
            ])
            .output()
            .expect("report runs");
        assert!(
            status.status.success(),
            "report failed: {}",
            String::from_utf8_lossy(&status.stderr)
        );
    };
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    let threaded = tmp.path().join("threaded");
    run(&first, "1");
    run(&second, "1");
    run(&threaded, "8");

    let mut names: Vec<String> = std::fs::read_dir(&first)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert!(names.len() >= 10, "report wrote only {names:?}");
    for name in &names {
        let a = std::fs::read(first.join(name)).unwrap();
        let b = std::fs::read(second.join(name)).unwrap();
        let c = std::fs::read(threaded.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical reruns");
        assert_eq!(a, c, "{name} differs between --threads 1 and --threads 8");
    }
    println!(
        "[PASS] c09 determinism: {} report files byte-identical across reruns and thread caps",
        names.len()
    );
}

// ---------------------------------------------------------------------------
// Criterion 10: with the Lotka alpha=2 generator the pooled top-10% share of
// output lands in the band precomputed by the brute-force simulation oracle
// (see `derive_c10_band`). A demonstration of skewed-productivity
// concentration, not a reproduction of any empirical figure.
const C10_BAND: (f64, f64) = (44.0, 55.0);

fn skewness_config(seed: u64) -> SimConfig {
    SimConfig {
        seed,
        n_authors: 1000,
        unknown_gender_share: 0.0,
        entry_year_min: 1980,
        entry_year_max: 2018,
        activity_rate: 0.65,
        counts: CountDistribution::Lotka {
            alpha: 2.0,
            max_count: 40,
        },
        mean_coauthors: 0.0,
        own_discipline_bias: 1.0,
        discipline_weights: [("CHEM".to_string(), 1.0)].into_iter().collect(),
        ..SimConfig::default()
    }
}

fn pooled_top10_share(pipeline: &Pipeline) -> f64 {
    let t_idx = pipeline.assignments.threshold_index(10.0).unwrap();
    let table = metrics::concentration_share(
        &pipeline.records,
        &pipeline.assignments,
        Measure::P3,
        t_idx,
        ShareBasis::Measure,
        &[],
        GenderPolicy::Exclude,
        &|i| format!("{i}"),
    );
    table.rows[0].share_percent
}

#[test]
fn c10_skewness_demonstration() {
    let run = RunConfig::default();
    let mut shares = Vec::new();
    for seed in [11u64, 12, 13] {
        let (pipeline, _) = pipeline_from_sim(&skewness_config(seed), &run);
        let share = pooled_top10_share(&pipeline);
        assert!(
            share >= C10_BAND.0 && share <= C10_BAND.1,
            "seed {seed}: top-10% share {share:.2}% outside oracle band [{}, {}]",
            C10_BAND.0,
            C10_BAND.1
        );
        shares.push(share);
    }
    println!(
        "[PASS] c10 skewness: top-10% share of output {:.2}% / {:.2}% / {:.2}% inside oracle band [{}, {}]",
        shares[0], shares[1], shares[2], C10_BAND.0, C10_BAND.1
    );
}

/// Brute-force oracle behind C10_BAND: simulates the same count process
/// directly (no corpus, no pipeline) and prints the share envelope over 300
/// seeds. Run with `--ignored --nocapture` to re-derive the frozen band.
#[test]
#[ignore]
fn derive_c10_band() {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for seed in 0..300u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // truncated power-law weights, alpha = 2, support 1..=40
        let weights: Vec<f64> = (1..=40).map(|k| (k as f64).powf(-2.0)).collect();
        let total: f64 = weights.iter().sum();
        let entries: Vec<i32> = (0..1000).map(|_| rng.random_range(1980..=2018)).collect();
        let period_ends = [1997, 2003, 2009, 2015, 2021];
        let mut top_sum = 0.0;
        let mut all_sum = 0.0;
        for &end in &period_ends {
            let mut counts: Vec<f64> = Vec::new();
            for &entry in &entries {
                if entry > end || !rng.random_bool(0.65) {
                    continue;
                }
                let mut u = rng.random_range(0.0..total);
                let mut k = 40usize;
                for (i, w) in weights.iter().enumerate() {
                    if u < *w {
                        k = i + 1;
                        break;
                    }
                    u -= w;
                }
                counts.push(k as f64);
            }
            let mut sorted = counts.clone();
            sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let n = sorted.len();
            let cut = sorted[((10.0 * n as f64 / 100.0).floor() as usize).clamp(1, n) - 1];
            top_sum += counts.iter().filter(|&&c| c >= cut).sum::<f64>();
            all_sum += counts.iter().sum::<f64>();
        }
        let share = 100.0 * top_sum / all_sum;
        lo = lo.min(share);
        hi = hi.max(share);
    }
    println!("c10 oracle band over 300 seeds: [{lo:.2}, {hi:.2}] (frozen as {C10_BAND:?})");
}

/// Sizing probe for c07: prints the unit count at candidate author counts.
/// Run with `--ignored --nocapture`.
#[test]
#[ignore]
fn calibrate_c07_units() {
    let run = RunConfig::default();
    for n_authors in [10_000usize, 12_500, 15_000] {
        let sim = SimConfig {
            n_authors,
            ..recovery_config(1, 2.0f64.ln())
        };
        let (pipeline, _) = pipeline_from_sim(&sim, &run);
        println!("n_authors {n_authors} -> {} units", pipeline.records.len());
    }
}
