//! Corpus loading: publications (JSONL), author profiles, journal ranks, and
//! institution flags (CSV). Validation is strict and fatal on schema errors;
//! referential gaps degrade gracefully (unranked venues keep a floor marker,
//! unknown byline authors get a synthesized profile).

use std::collections::btree_map::Entry;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DocType {
    Article,
    ConferencePaper,
    Other,
}

impl DocType {
    pub fn is_counted(&self) -> bool {
        matches!(self, DocType::Article | DocType::ConferencePaper)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuthorByline {
    pub author_id: String,
    #[serde(default)]
    pub affiliation_ids: Vec<String>,
    pub country: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PublicationRecord {
    pub pub_id: String,
    pub year: i32,
    pub doc_type: DocType,
    pub journal_id: String,
    pub authors: Vec<AuthorByline>,
    #[serde(default)]
    pub cited_asjc: Vec<u32>,
}

impl PublicationRecord {
    pub fn n_authors(&self) -> usize {
        self.authors.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Gender {
    M,
    F,
    U,
}

impl Gender {
    pub fn as_str(&self) -> &'static str {
        match self {
            Gender::M => "M",
            Gender::F => "F",
            Gender::U => "U",
        }
    }
}

impl fmt::Display for Gender {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AuthorProfile {
    pub author_id: String,
    pub gender: Gender,
    pub first_pub_year: Option<i32>,
    /// True when first_pub_year was filled in from the earliest corpus
    /// publication rather than declared in the author table.
    #[serde(default)]
    pub first_year_approximate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JournalRank {
    pub journal_id: String,
    /// CiteScore percentile in [0, 99].
    pub citescore_percentile: u8,
}

/// Per-run ingest bookkeeping, surfaced in reports and warnings.
#[derive(Debug, Clone, Default, Serialize)]
pub struct IngestReport {
    pub kept_publications: usize,
    pub dropped_doc_type: usize,
    pub dropped_out_of_window: usize,
    /// Distinct venues with no rank row; their papers get the floor weight.
    pub unranked_journals: Vec<String>,
    /// Publications whose venue has no rank row.
    pub floor_defaulted_publications: usize,
    /// Byline authors absent from the author table, given gender-U profiles.
    pub synthesized_profiles: usize,
    /// Profiles whose first publication year was derived from the corpus.
    pub derived_first_years: usize,
}

/// Immutable in-memory corpus. Publications are kept in canonical order
/// (sorted by pub_id) so loading is independent of input file ordering.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub publications: Vec<PublicationRecord>,
    pub authors: BTreeMap<String, AuthorProfile>,
    pub journals: BTreeMap<String, JournalRank>,
    /// affiliation_id -> research_intensive
    pub institutions: BTreeMap<String, bool>,
    pub report: IngestReport,
}

impl Corpus {
    pub fn journal_percentile(&self, journal_id: &str) -> Option<u8> {
        self.journals.get(journal_id).map(|j| j.citescore_percentile)
    }

    /// Assemble and validate a corpus from already-parsed tables. File-based
    /// loading funnels through here; generators can call it directly.
    pub fn from_parts(
        publications: Vec<PublicationRecord>,
        authors: Vec<AuthorProfile>,
        journals: Vec<JournalRank>,
        institutions: Vec<(String, bool)>,
        config: &RunConfig,
    ) -> Result<Corpus> {
        let periods = config.periods();
        let (window_start, window_end) = periods.window();

        let mut author_map: BTreeMap<String, AuthorProfile> = BTreeMap::new();
        for profile in authors {
            if profile.author_id.is_empty() {
                return Err(Error::Validation("author profile with empty author_id".into()));
            }
            if author_map
                .insert(profile.author_id.clone(), profile)
                .is_some()
            {
                return Err(Error::Validation("duplicate author_id in author table".into()));
            }
        }

        let mut journal_map: BTreeMap<String, JournalRank> = BTreeMap::new();
        for rank in journals {
            if rank.citescore_percentile > 99 {
                return Err(Error::Validation(format!(
                    "journal {} percentile {} outside [0, 99]",
                    rank.journal_id, rank.citescore_percentile
                )));
            }
            journal_map.insert(rank.journal_id.clone(), rank);
        }

        let mut institution_map: BTreeMap<String, bool> = BTreeMap::new();
        for (affiliation_id, flag) in institutions {
            match institution_map.entry(affiliation_id) {
                Entry::Vacant(v) => {
                    v.insert(flag);
                }
                Entry::Occupied(o) => {
                    return Err(Error::Validation(format!(
                        "duplicate affiliation_id '{}' in institution table",
                        o.key()
                    )));
                }
            }
        }

        let mut report = IngestReport::default();
        let mut seen_ids: BTreeSet<String> = BTreeSet::new();
        let mut unranked: BTreeSet<String> = BTreeSet::new();
        let mut kept: Vec<PublicationRecord> = Vec::with_capacity(publications.len());

        for publication in publications {
            if publication.pub_id.is_empty() {
                return Err(Error::Validation("publication with empty pub_id".into()));
            }
            if !seen_ids.insert(publication.pub_id.clone()) {
                return Err(Error::DuplicatePubId(publication.pub_id));
            }
            if publication.authors.is_empty() {
                return Err(Error::Validation(format!(
                    "publication {} has an empty byline",
                    publication.pub_id
                )));
            }
            let mut byline_ids = BTreeSet::new();
            for byline in &publication.authors {
                if byline.author_id.is_empty() {
                    return Err(Error::Validation(format!(
                        "publication {} has a byline with empty author_id",
                        publication.pub_id
                    )));
                }
                if !byline_ids.insert(byline.author_id.as_str()) {
                    return Err(Error::Validation(format!(
                        "publication {} lists author {} twice",
                        publication.pub_id, byline.author_id
                    )));
                }
            }
            if !publication.doc_type.is_counted() {
                report.dropped_doc_type += 1;
                continue;
            }
            if publication.year < window_start || publication.year > window_end {
                report.dropped_out_of_window += 1;
                continue;
            }
            if !journal_map.contains_key(&publication.journal_id) {
                unranked.insert(publication.journal_id.clone());
                report.floor_defaulted_publications += 1;
            }
            kept.push(publication);
        }

        kept.sort_by(|a, b| a.pub_id.cmp(&b.pub_id));

        // Referential integrity on authors: synthesize a gender-U profile for
        // every byline author missing from the table.
        for publication in &kept {
            for byline in &publication.authors {
                if !author_map.contains_key(&byline.author_id) {
                    author_map.insert(
                        byline.author_id.clone(),
                        AuthorProfile {
                            author_id: byline.author_id.clone(),
                            gender: Gender::U,
                            first_pub_year: None,
                            first_year_approximate: false,
                        },
                    );
                    report.synthesized_profiles += 1;
                }
            }
        }

        report.kept_publications = kept.len();
        report.unranked_journals = unranked.into_iter().collect();

        Ok(Corpus {
            publications: kept,
            authors: author_map,
            journals: journal_map,
            institutions: institution_map,
            report,
        })
    }
}

/// Load and validate the full corpus from the configured input files.
pub fn load_corpus(config: &RunConfig) -> Result<Corpus> {
    let publications = read_publications(&config.paths.publications)?;
    let authors = read_authors(&config.paths.authors)?;
    let journals = read_journals(&config.paths.journals)?;
    let institutions = read_institutions(&config.paths.institutions)?;
    Corpus::from_parts(publications, authors, journals, institutions, config)
}

/// Fill missing first-publication years with the earliest observed corpus
/// year per author, and reject declared years that postdate observed output.
pub fn derive_first_pub_year(corpus: &mut Corpus) -> Result<()> {
    let mut observed_min: BTreeMap<&str, i32> = BTreeMap::new();
    for publication in &corpus.publications {
        for byline in &publication.authors {
            observed_min
                .entry(byline.author_id.as_str())
                .and_modify(|y| *y = (*y).min(publication.year))
                .or_insert(publication.year);
        }
    }

    let mut derived = 0usize;
    for (author_id, profile) in corpus.authors.iter_mut() {
        let observed = observed_min.get(author_id.as_str()).copied();
        match (profile.first_pub_year, observed) {
            (Some(declared), Some(min_year)) if declared > min_year => {
                return Err(Error::Validation(format!(
                    "author {author_id}: declared first_pub_year {declared} postdates \
                     observed publication year {min_year}"
                )));
            }
            (Some(_), _) => {}
            (None, Some(min_year)) => {
                profile.first_pub_year = Some(min_year);
                profile.first_year_approximate = true;
                derived += 1;
            }
            // No declared year and no publications: the profile stays, the
            // author simply never yields a panel unit.
            (None, None) => {}
        }
    }
    corpus.report.derived_first_years = derived;
    Ok(())
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_publications(path: &Path) -> Result<Vec<PublicationRecord>> {
    let file = File::open(path).map_err(io_err(path))?;
    let reader = BufReader::new(file);
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: PublicationRecord =
            serde_json::from_str(&line).map_err(|e| Error::Schema {
                path: path.to_path_buf(),
                line: idx as u64 + 1,
                message: e.to_string(),
            })?;
        for byline in &record.authors {
            validate_country(&byline.country).map_err(|message| Error::Schema {
                path: path.to_path_buf(),
                line: idx as u64 + 1,
                message,
            })?;
        }
        out.push(record);
    }
    Ok(out)
}

fn validate_country(country: &str) -> std::result::Result<(), String> {
    if country.len() == 2 && country.chars().all(|c| c.is_ascii_uppercase()) {
        Ok(())
    } else {
        Err(format!("country '{country}' is not an ISO-3166 alpha-2 code"))
    }
}

fn csv_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(io_err(path))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn schema_err(path: &Path, record: &csv::StringRecord, message: String) -> Error {
    Error::Schema {
        path: path.to_path_buf(),
        line: record.position().map(|p| p.line()).unwrap_or(0),
        message,
    }
}

fn read_authors(path: &Path) -> Result<Vec<AuthorProfile>> {
    let mut reader = csv_reader(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        if record.len() != 3 {
            return Err(schema_err(path, &record, "expected 3 columns".into()));
        }
        let gender = match &record[1] {
            "M" => Gender::M,
            "F" => Gender::F,
            "U" => Gender::U,
            other => {
                return Err(schema_err(
                    path,
                    &record,
                    format!("gender '{other}' is not one of M, F, U"),
                ))
            }
        };
        let first_pub_year = if record[2].is_empty() {
            None
        } else {
            Some(record[2].parse::<i32>().map_err(|_| {
                schema_err(path, &record, format!("bad first_pub_year '{}'", &record[2]))
            })?)
        };
        out.push(AuthorProfile {
            author_id: record[0].to_string(),
            gender,
            first_pub_year,
            first_year_approximate: false,
        });
    }
    Ok(out)
}

fn read_journals(path: &Path) -> Result<Vec<JournalRank>> {
    let mut reader = csv_reader(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(schema_err(path, &record, "expected 2 columns".into()));
        }
        let pct: u8 = record[1].parse().map_err(|_| {
            schema_err(path, &record, format!("bad citescore_percentile '{}'", &record[1]))
        })?;
        if pct > 99 {
            return Err(schema_err(
                path,
                &record,
                format!("citescore_percentile {pct} outside [0, 99]"),
            ));
        }
        out.push(JournalRank {
            journal_id: record[0].to_string(),
            citescore_percentile: pct,
        });
    }
    Ok(out)
}

fn read_institutions(path: &Path) -> Result<Vec<(String, bool)>> {
    let mut reader = csv_reader(path)?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Schema {
            path: path.to_path_buf(),
            line: 0,
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(schema_err(path, &record, "expected 2 columns".into()));
        }
        let flag = match &record[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(schema_err(
                    path,
                    &record,
                    format!("research_intensive '{other}' is not 0 or 1"),
                ))
            }
        };
        out.push((record[0].to_string(), flag));
    }
    Ok(out)
}
