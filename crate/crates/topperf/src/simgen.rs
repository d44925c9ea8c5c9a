//! Deterministic closed-world synthetic cohort generator. Every byline
//! author exists in the emitted author table, so fractional credit sums
//! exactly and every pipeline stage has a bookkeeping oracle.
//!
//! Per-author randomness comes from streams keyed by (seed, author index);
//! per-unit response labels from streams keyed by (seed, author id, period).
//! Generation is therefore independent of thread count.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Poisson};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::exec;
use crate::ingest::{
    AuthorByline, AuthorProfile, Corpus, DocType, Gender, JournalRank, PublicationRecord,
};
use crate::rng::{self, PURPOSE_AUTHOR_GEN, PURPOSE_LABEL, PURPOSE_POOL, PURPOSE_PUBS};

const FOREIGN_COUNTRIES: [&str; 8] = ["DE", "GB", "US", "FR", "CZ", "IT", "NL", "SE"];

/// Per-period publication-count model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CountDistribution {
    /// ceil of a lognormal draw, clamped to [1, 1000].
    Lognormal { mu: f64, sigma: f64 },
    /// Power-law pmf P(k) proportional to k^-alpha on 1..=max_count.
    Lotka { alpha: f64, max_count: u32 },
}

impl Default for CountDistribution {
    fn default() -> Self {
        CountDistribution::Lotka {
            alpha: 2.0,
            max_count: 50,
        }
    }
}

/// Effect sizes injected into the synthetic membership response recorded in
/// the ground truth: P(y=1) = sigmoid(logit(base_rate)
///   + gender_log_odds * [male] + age_slope * academic_age).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct InjectedEffects {
    pub gender_log_odds: f64,
    pub age_slope: f64,
    pub base_rate: f64,
}

impl Default for InjectedEffects {
    fn default() -> Self {
        InjectedEffects {
            gender_log_odds: 0.0,
            age_slope: 0.0,
            base_rate: 0.10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub n_authors: usize,
    /// Share of known-gender authors who are male.
    pub male_share: f64,
    /// Share of authors with undetermined gender.
    pub unknown_gender_share: f64,
    pub entry_year_min: i32,
    pub entry_year_max: i32,
    /// Probability an author publishes at all in a given period.
    pub activity_rate: f64,
    pub counts: CountDistribution,
    /// Mean number of sampled coauthors per publication (Poisson).
    pub mean_coauthors: f64,
    pub max_team_size: usize,
    pub n_journals: usize,
    pub n_institutions: usize,
    pub research_intensive_share: f64,
    /// Discipline label -> mixture weight; empty = uniform over whitelist.
    pub discipline_weights: BTreeMap<String, f64>,
    pub refs_per_pub: usize,
    /// Probability a cited reference falls in the author's own discipline.
    pub own_discipline_bias: f64,
    /// Share of pool authors affiliated abroad.
    pub foreign_author_share: f64,
    pub effects: InjectedEffects,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 42,
            n_authors: 1000,
            male_share: 0.55,
            unknown_gender_share: 0.02,
            entry_year_min: 1975,
            entry_year_max: 2021,
            activity_rate: 0.6,
            counts: CountDistribution::default(),
            mean_coauthors: 2.0,
            max_team_size: 20,
            n_journals: 200,
            n_institutions: 40,
            research_intensive_share: 0.25,
            discipline_weights: BTreeMap::new(),
            refs_per_pub: 8,
            own_discipline_bias: 0.7,
            foreign_author_share: 0.10,
            effects: InjectedEffects::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let probabilities = [
            ("male_share", self.male_share),
            ("unknown_gender_share", self.unknown_gender_share),
            ("activity_rate", self.activity_rate),
            ("research_intensive_share", self.research_intensive_share),
            ("own_discipline_bias", self.own_discipline_bias),
            ("foreign_author_share", self.foreign_author_share),
            ("effects.base_rate", self.effects.base_rate),
        ];
        for (name, p) in probabilities {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::SimConfig(format!("{name} = {p} outside [0, 1]")));
            }
        }
        if self.effects.base_rate == 0.0 || self.effects.base_rate == 1.0 {
            return Err(Error::SimConfig("effects.base_rate must be strictly inside (0, 1)".into()));
        }
        if self.n_authors == 0 {
            return Err(Error::SimConfig("n_authors must be positive".into()));
        }
        if self.entry_year_max < self.entry_year_min {
            return Err(Error::SimConfig("entry_year_max < entry_year_min".into()));
        }
        if self.max_team_size < 1 {
            return Err(Error::SimConfig("max_team_size must be >= 1".into()));
        }
        if self.refs_per_pub < 1 {
            return Err(Error::SimConfig("refs_per_pub must be >= 1".into()));
        }
        if self.n_journals < 1 || self.n_institutions < 1 {
            return Err(Error::SimConfig("journal and institution pools must be non-empty".into()));
        }
        match &self.counts {
            CountDistribution::Lognormal { sigma, .. } => {
                if *sigma < 0.0 {
                    return Err(Error::SimConfig("lognormal sigma must be >= 0".into()));
                }
            }
            CountDistribution::Lotka { alpha, max_count } => {
                if *alpha <= 0.0 || *max_count < 1 {
                    return Err(Error::SimConfig("lotka needs alpha > 0 and max_count >= 1".into()));
                }
            }
        }
        for (label, w) in &self.discipline_weights {
            if *w < 0.0 {
                return Err(Error::SimConfig(format!("weight for {label} is negative")));
            }
        }
        Ok(())
    }
}

/// Generated corpus tables, ready to write or ingest directly.
#[derive(Debug, Clone)]
pub struct GeneratedCorpus {
    pub publications: Vec<PublicationRecord>,
    pub authors: Vec<AuthorProfile>,
    pub journals: Vec<JournalRank>,
    pub institutions: Vec<(String, bool)>,
}

impl GeneratedCorpus {
    pub fn into_corpus(self, config: &RunConfig) -> Result<Corpus> {
        Corpus::from_parts(
            self.publications,
            self.authors,
            self.journals,
            self.institutions,
            config,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrueUnit {
    pub author_id: String,
    pub period_index: usize,
    /// Publications the author originated in this period.
    pub own_pubs: u32,
    /// Byline appearances (own plus sampled-coauthor), i.e. the panel's
    /// publication count for this unit.
    pub appearances: u32,
    pub team_sizes: Vec<u32>,
    /// Synthetic membership label drawn from the injected-effect model.
    pub label: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroundTruth {
    pub seed: u64,
    pub n_authors: usize,
    pub effects: InjectedEffects,
    pub per_period_pub_count: Vec<usize>,
    pub units: Vec<TrueUnit>,
}

struct AuthorMeta {
    id: String,
    gender: Gender,
    entry_year: i32,
    country: String,
    institution: usize,
    discipline: String,
}

enum CountSampler {
    Lognormal(LogNormal<f64>),
    Lotka { cumulative: Vec<f64> },
}

impl CountSampler {
    fn new(dist: &CountDistribution) -> Result<Self> {
        match dist {
            CountDistribution::Lognormal { mu, sigma } => Ok(CountSampler::Lognormal(
                LogNormal::new(*mu, *sigma)
                    .map_err(|e| Error::SimConfig(format!("lognormal: {e}")))?,
            )),
            CountDistribution::Lotka { alpha, max_count } => {
                let mut cumulative = Vec::with_capacity(*max_count as usize);
                let mut total = 0.0;
                for k in 1..=*max_count {
                    total += (k as f64).powf(-alpha);
                    cumulative.push(total);
                }
                Ok(CountSampler::Lotka { cumulative })
            }
        }
    }

    fn sample(&self, rng: &mut impl Rng) -> u32 {
        match self {
            CountSampler::Lognormal(dist) => {
                let draw = dist.sample(rng);
                draw.ceil().clamp(1.0, 1000.0) as u32
            }
            CountSampler::Lotka { cumulative } => {
                let total = *cumulative.last().expect("non-empty");
                let u = rng.random_range(0.0..total);
                let idx = cumulative.partition_point(|&c| c <= u);
                idx as u32 + 1
            }
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Generate the corpus tables and the ground-truth record.
pub fn generate(sim: &SimConfig, run: &RunConfig) -> Result<(GeneratedCorpus, GroundTruth)> {
    sim.validate()?;
    let periods = run.periods();
    let whitelist = run.whitelist();

    // label -> representative ASJC code (smallest when several map to one)
    let mut label_code: BTreeMap<&str, u32> = BTreeMap::new();
    for (&code, label) in &whitelist {
        label_code.entry(label.as_str()).or_insert(code);
    }
    let all_codes: Vec<u32> = whitelist.keys().copied().collect();

    let weights: Vec<(&str, f64)> = if sim.discipline_weights.is_empty() {
        label_code.keys().map(|&l| (l, 1.0)).collect()
    } else {
        for label in sim.discipline_weights.keys() {
            if !label_code.contains_key(label.as_str()) {
                return Err(Error::SimConfig(format!(
                    "discipline weight for '{label}' has no whitelist entry"
                )));
            }
        }
        sim.discipline_weights
            .iter()
            .map(|(l, &w)| (l.as_str(), w))
            .collect()
    };
    let weight_total: f64 = weights.iter().map(|(_, w)| w).sum();
    if weight_total <= 0.0 {
        return Err(Error::SimConfig("discipline weights sum to zero".into()));
    }

    // institution and journal pools from a single pool stream
    let mut pool_rng = rng::stream(sim.seed, "pool", 0, PURPOSE_POOL);
    let institutions: Vec<(String, bool)> = (0..sim.n_institutions)
        .map(|i| {
            (
                format!("I{i:04}"),
                pool_rng.random_bool(sim.research_intensive_share),
            )
        })
        .collect();
    let journals: Vec<JournalRank> = (0..sim.n_journals)
        .map(|i| JournalRank {
            journal_id: format!("J{i:04}"),
            citescore_percentile: pool_rng.random_range(0..=99u8),
        })
        .collect();

    // pass 1: author attributes
    let entry_span = sim.entry_year_min..=sim.entry_year_max;
    let author_indices: Vec<usize> = (0..sim.n_authors).collect();
    let metas: Vec<AuthorMeta> = exec::map_slice(&author_indices, |&i| {
        let mut rng = rng::indexed_stream(sim.seed, i as u64, PURPOSE_AUTHOR_GEN);
        let gender = if rng.random_bool(sim.unknown_gender_share) {
            Gender::U
        } else if rng.random_bool(sim.male_share) {
            Gender::M
        } else {
            Gender::F
        };
        let entry_year = rng.random_range(entry_span.clone());
        let country = if rng.random_bool(sim.foreign_author_share) {
            FOREIGN_COUNTRIES[rng.random_range(0..FOREIGN_COUNTRIES.len())].to_string()
        } else {
            run.run.home_country.clone()
        };
        let institution = rng.random_range(0..sim.n_institutions);
        let mut pick = rng.random_range(0.0..weight_total);
        let mut discipline = weights[weights.len() - 1].0;
        for (label, w) in &weights {
            if pick < *w {
                discipline = label;
                break;
            }
            pick -= w;
        }
        AuthorMeta {
            id: format!("A{i:06}"),
            gender,
            entry_year,
            country,
            institution,
            discipline: discipline.to_string(),
        }
    });

    // pass 2: publications (focal-author major order)
    let counts = CountSampler::new(&sim.counts)?;
    let poisson = if sim.mean_coauthors > 0.0 {
        Some(
            Poisson::new(sim.mean_coauthors)
                .map_err(|e| Error::SimConfig(format!("coauthor poisson: {e}")))?,
        )
    } else {
        None
    };

    let per_author_pubs: Vec<Vec<PublicationRecord>> = exec::map_slice(&author_indices, |&i| {
        let meta = &metas[i];
        let mut rng = rng::indexed_stream(sim.seed, i as u64, PURPOSE_PUBS);
        let own_code = label_code[meta.discipline.as_str()];
        let mut pubs = Vec::new();
        for period in periods.iter() {
            if period.end_year < meta.entry_year {
                continue;
            }
            if !rng.random_bool(sim.activity_rate) {
                continue;
            }
            let n_pubs = counts.sample(&mut rng);
            for j in 0..n_pubs {
                let year_lo = period.start_year.max(meta.entry_year);
                let year = rng.random_range(year_lo..=period.end_year);
                let journal = rng.random_range(0..sim.n_journals);
                let extra = match &poisson {
                    Some(p) => (p.sample(&mut rng) as usize)
                        .min(sim.max_team_size - 1)
                        .min(sim.n_authors - 1),
                    None => 0,
                };
                // coauthors must already be active by the publication year,
                // or their declared first year would postdate this byline
                let mut coauthors: Vec<usize> = Vec::with_capacity(extra);
                let mut attempts = 0usize;
                while coauthors.len() < extra && attempts < 50 * (extra + 1) {
                    attempts += 1;
                    let c = rng.random_range(0..sim.n_authors);
                    if c != i && metas[c].entry_year <= year && !coauthors.contains(&c) {
                        coauthors.push(c);
                    }
                }
                let mut byline = Vec::with_capacity(1 + coauthors.len());
                byline.push(AuthorByline {
                    author_id: meta.id.clone(),
                    affiliation_ids: vec![institutions[meta.institution].0.clone()],
                    country: meta.country.clone(),
                });
                for &c in &coauthors {
                    let cm = &metas[c];
                    byline.push(AuthorByline {
                        author_id: cm.id.clone(),
                        affiliation_ids: vec![institutions[cm.institution].0.clone()],
                        country: cm.country.clone(),
                    });
                }
                let cited_asjc: Vec<u32> = (0..sim.refs_per_pub)
                    .map(|_| {
                        if rng.random_bool(sim.own_discipline_bias) {
                            own_code
                        } else {
                            all_codes[rng.random_range(0..all_codes.len())]
                        }
                    })
                    .collect();
                pubs.push(PublicationRecord {
                    pub_id: format!("P{i:06}_{}_{j:04}", period.index),
                    year,
                    doc_type: DocType::Article,
                    journal_id: journals[journal].journal_id.clone(),
                    authors: byline,
                    cited_asjc,
                });
            }
        }
        pubs
    });

    let mut publications: Vec<PublicationRecord> = per_author_pubs.into_iter().flatten().collect();
    publications.sort_by(|a, b| a.pub_id.cmp(&b.pub_id));
    if publications.is_empty() {
        return Err(Error::SimConfig(
            "configuration generated zero publications".into(),
        ));
    }

    // bookkeeping: per-period totals, per-(author, period) appearances
    let mut per_period_pub_count = vec![0usize; periods.len()];
    let mut appearances: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut own: BTreeMap<(usize, usize), (u32, Vec<u32>)> = BTreeMap::new();
    let id_index: BTreeMap<&str, usize> = metas
        .iter()
        .enumerate()
        .map(|(i, m)| (m.id.as_str(), i))
        .collect();
    for publication in &publications {
        let period_index = periods.index_of(publication.year).expect("generated in window");
        per_period_pub_count[period_index] += 1;
        for (pos, byline) in publication.authors.iter().enumerate() {
            let ai = id_index[byline.author_id.as_str()];
            *appearances.entry((ai, period_index)).or_insert(0) += 1;
            if pos == 0 {
                let entry = own.entry((ai, period_index)).or_insert((0, Vec::new()));
                entry.0 += 1;
                entry.1.push(publication.authors.len() as u32);
            }
        }
    }

    // ground truth units with synthetic membership labels
    let intercept = (sim.effects.base_rate / (1.0 - sim.effects.base_rate)).ln();
    let units: Vec<TrueUnit> = appearances
        .iter()
        .map(|(&(ai, period_index), &count)| {
            let meta = &metas[ai];
            let age = (periods.get(period_index).end_year - meta.entry_year) as f64;
            let eta = intercept
                + sim.effects.gender_log_odds * f64::from(meta.gender == Gender::M)
                + sim.effects.age_slope * age;
            let mut label_rng = rng::stream(sim.seed, &meta.id, period_index, PURPOSE_LABEL);
            let (own_pubs, team_sizes) = own
                .get(&(ai, period_index))
                .map(|(c, t)| (*c, t.clone()))
                .unwrap_or((0, Vec::new()));
            TrueUnit {
                author_id: meta.id.clone(),
                period_index,
                own_pubs,
                appearances: count,
                team_sizes,
                label: label_rng.random_bool(sigmoid(eta)),
            }
        })
        .collect();

    let authors: Vec<AuthorProfile> = metas
        .iter()
        .map(|m| AuthorProfile {
            author_id: m.id.clone(),
            gender: m.gender,
            first_pub_year: Some(m.entry_year),
            first_year_approximate: false,
        })
        .collect();

    Ok((
        GeneratedCorpus {
            publications,
            authors,
            journals,
            institutions,
        },
        GroundTruth {
            seed: sim.seed,
            n_authors: sim.n_authors,
            effects: sim.effects,
            per_period_pub_count,
            units,
        },
    ))
}

/// Write the generated tables in the documented input formats, plus
/// ground_truth.json. Output bytes depend only on the generated content.
pub fn write_corpus(
    generated: &GeneratedCorpus,
    truth: &GroundTruth,
    dir: &Path,
) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source: std::io::Error| Error::Io { path, source }
    };

    let pubs_path = dir.join("publications.jsonl");
    let mut w = BufWriter::new(File::create(&pubs_path).map_err(io(&pubs_path))?);
    for publication in &generated.publications {
        let line = serde_json::to_string(publication).expect("publication serializes");
        writeln!(w, "{line}").map_err(io(&pubs_path))?;
    }
    w.flush().map_err(io(&pubs_path))?;

    let csv_err = |path: &Path| {
        let path = path.display().to_string();
        move |e: csv::Error| Error::Validation(format!("{path}: {e}"))
    };

    let authors_path = dir.join("authors.csv");
    let file = File::create(&authors_path).map_err(io(&authors_path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["author_id", "gender", "first_pub_year"])
        .map_err(csv_err(&authors_path))?;
    for a in &generated.authors {
        let year = a.first_pub_year.map(|y| y.to_string()).unwrap_or_default();
        w.write_record([a.author_id.as_str(), a.gender.as_str(), year.as_str()])
            .map_err(csv_err(&authors_path))?;
    }
    w.flush().map_err(io(&authors_path))?;

    let journals_path = dir.join("journals.csv");
    let file = File::create(&journals_path).map_err(io(&journals_path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["journal_id", "citescore_percentile"])
        .map_err(csv_err(&journals_path))?;
    for j in &generated.journals {
        w.write_record([j.journal_id.as_str(), &j.citescore_percentile.to_string()])
            .map_err(csv_err(&journals_path))?;
    }
    w.flush().map_err(io(&journals_path))?;

    let inst_path = dir.join("institutions.csv");
    let file = File::create(&inst_path).map_err(io(&inst_path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(["affiliation_id", "research_intensive"])
        .map_err(csv_err(&inst_path))?;
    for (id, flag) in &generated.institutions {
        w.write_record([id.as_str(), if *flag { "1" } else { "0" }])
            .map_err(csv_err(&inst_path))?;
    }
    w.flush().map_err(io(&inst_path))?;

    let truth_path = dir.join("ground_truth.json");
    let json = serde_json::to_string_pretty(truth).expect("ground truth serializes");
    std::fs::write(&truth_path, json + "\n").map_err(io(&truth_path))?;
    Ok(())
}
