//! Run configuration: study window, period grid, discipline whitelist,
//! class thresholds, and solver tolerances. Loaded from a TOML file whose
//! keys mirror this struct 1:1; command-line flags may override single
//! fields afterwards.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::fnv1a64;
use crate::simgen::SimConfig;

/// One of the four productivity measurements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    P1,
    P2,
    P3,
    P4,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::P1, Measure::P2, Measure::P3, Measure::P4];

    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::P1 => "p1",
            Measure::P2 => "p2",
            Measure::P3 => "p3",
            Measure::P4 => "p4",
        }
    }

    pub fn description(&self) -> &'static str {
        match self {
            Measure::P1 => "prestige-normalized, full counting",
            Measure::P2 => "prestige-normalized, fractional counting",
            Measure::P3 => "non-normalized, full counting",
            Measure::P4 => "non-normalized, fractional counting",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(Measure::P1),
            "p2" => Ok(Measure::P2),
            "p3" => Ok(Measure::P3),
            "p4" => Ok(Measure::P4),
            other => Err(Error::Config(format!(
                "unknown measure '{other}' (expected p1, p2, p3, or p4)"
            ))),
        }
    }
}

/// Denominator/numerator basis for concentration shares.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShareBasis {
    /// Sum the same measure the class was ranked by (default).
    Measure,
    /// Sum full article counts (p3) regardless of the ranking measure.
    FullCount,
    /// Count distinct publications; one publication counts once if at least
    /// one class member in the group appears on its byline.
    DistinctPubs,
}

impl ShareBasis {
    pub fn as_str(&self) -> &'static str {
        match self {
            ShareBasis::Measure => "measure",
            ShareBasis::FullCount => "full_count",
            ShareBasis::DistinctPubs => "distinct_pubs",
        }
    }
}

impl FromStr for ShareBasis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "measure" => Ok(ShareBasis::Measure),
            "full_count" | "fullcount" => Ok(ShareBasis::FullCount),
            "distinct_pubs" | "pubs" => Ok(ShareBasis::DistinctPubs),
            other => Err(Error::Config(format!("unknown share basis '{other}'"))),
        }
    }
}

/// How to treat authors whose gender is unknown in gender-split analyses
/// and regression rows. They are always kept in the corpus and in ungrouped
/// totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GenderPolicy {
    Exclude,
    Include,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    /// Worker-thread cap; 0 uses the library default.
    pub threads: usize,
    pub home_country: String,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seed: 42,
            threads: 0,
            home_country: "PL".to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowSection {
    pub start_year: i32,
    pub end_year: i32,
    pub period_length: i32,
}

impl Default for WindowSection {
    fn default() -> Self {
        WindowSection {
            start_year: 1992,
            end_year: 2021,
            period_length: 6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassSection {
    /// Top-class thresholds in percent, strictly increasing.
    pub thresholds: Vec<f64>,
    pub measures: Vec<Measure>,
}

impl Default for ClassSection {
    fn default() -> Self {
        ClassSection {
            thresholds: vec![1.0, 3.0, 5.0, 10.0],
            measures: Measure::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShareSection {
    pub basis: ShareBasis,
}

impl Default for ShareSection {
    fn default() -> Self {
        ShareSection {
            basis: ShareBasis::Measure,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenderSection {
    pub unknown_policy: GenderPolicy,
}

impl Default for GenderSection {
    fn default() -> Self {
        GenderSection {
            unknown_policy: GenderPolicy::Exclude,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GlmSection {
    pub max_iterations: usize,
    pub gradient_tol: f64,
    pub loglik_tol: f64,
    pub beta_cap: f64,
    /// Class thresholds to regress on (must appear in `classes.thresholds`).
    pub classes: Vec<f64>,
    pub measures: Vec<Measure>,
}

impl Default for GlmSection {
    fn default() -> Self {
        GlmSection {
            max_iterations: 100,
            gradient_tol: 1e-8,
            loglik_tol: 1e-10,
            beta_cap: 30.0,
            classes: vec![10.0],
            measures: vec![Measure::P1],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsSection {
    pub publications: PathBuf,
    pub authors: PathBuf,
    pub journals: PathBuf,
    pub institutions: PathBuf,
    pub output_dir: PathBuf,
}

impl Default for PathsSection {
    fn default() -> Self {
        PathsSection {
            publications: PathBuf::from("publications.jsonl"),
            authors: PathBuf::from("authors.csv"),
            journals: PathBuf::from("journals.csv"),
            institutions: PathBuf::from("institutions.csv"),
            output_dir: PathBuf::from("out"),
        }
    }
}

/// Default ASJC top-level code -> discipline label map (15 STEMM fields).
/// Fully overridable through the `[disciplines]` table.
fn default_disciplines() -> BTreeMap<String, String> {
    [
        (1100, "AGRI"),
        (1300, "BIO"),
        (1500, "CHEMENG"),
        (1600, "CHEM"),
        (1700, "COMP"),
        (1900, "EARTH"),
        (2100, "ENER"),
        (2200, "ENG"),
        (2300, "ENVIR"),
        (2500, "MATER"),
        (2600, "MATH"),
        (2700, "MED"),
        (2800, "NEURO"),
        (3000, "PHARM"),
        (3100, "PHYS"),
    ]
    .into_iter()
    .map(|(code, label)| (code.to_string(), label.to_string()))
    .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub window: WindowSection,
    pub classes: ClassSection,
    pub shares: ShareSection,
    pub gender: GenderSection,
    /// ASJC code (as string key) -> discipline label whitelist.
    pub disciplines: BTreeMap<String, String>,
    pub glm: GlmSection,
    pub paths: PathsSection,
    pub sim: SimConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            run: RunSection::default(),
            window: WindowSection::default(),
            classes: ClassSection::default(),
            shares: ShareSection::default(),
            gender: GenderSection::default(),
            disciplines: default_disciplines(),
            glm: GlmSection::default(),
            paths: PathsSection::default(),
            sim: SimConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let w = &self.window;
        if w.period_length < 1 {
            return Err(Error::Config("period_length must be >= 1".into()));
        }
        if w.end_year < w.start_year {
            return Err(Error::Config("end_year must be >= start_year".into()));
        }
        let span = w.end_year - w.start_year + 1;
        if span % w.period_length != 0 {
            return Err(Error::Config(format!(
                "window of {span} years is not divisible into {}-year periods",
                w.period_length
            )));
        }
        let th = &self.classes.thresholds;
        if th.is_empty() {
            return Err(Error::Config("at least one class threshold required".into()));
        }
        if !th.iter().all(|&t| t > 0.0 && t < 100.0) {
            return Err(Error::Config("class thresholds must lie in (0, 100)".into()));
        }
        if !th.windows(2).all(|p| p[0] < p[1]) {
            return Err(Error::Config("class thresholds must be strictly increasing".into()));
        }
        if self.classes.measures.is_empty() {
            return Err(Error::Config("at least one measure required".into()));
        }
        for c in &self.glm.classes {
            if !th.contains(c) {
                return Err(Error::Config(format!(
                    "glm class {c} is not among classes.thresholds"
                )));
            }
        }
        if self.disciplines.is_empty() {
            return Err(Error::Config("discipline whitelist must not be empty".into()));
        }
        for code in self.disciplines.keys() {
            code.parse::<u32>().map_err(|_| {
                Error::Config(format!("discipline key '{code}' is not an ASJC integer code"))
            })?;
        }
        if self.run.home_country.len() != 2
            || !self.run.home_country.chars().all(|c| c.is_ascii_uppercase())
        {
            return Err(Error::Config(
                "home_country must be an ISO-3166 alpha-2 code".into(),
            ));
        }
        self.sim.validate()?;
        Ok(())
    }

    /// Whitelist parsed to integer ASJC codes.
    pub fn whitelist(&self) -> BTreeMap<u32, String> {
        self.disciplines
            .iter()
            .map(|(code, label)| (code.parse::<u32>().expect("validated"), label.clone()))
            .collect()
    }

    pub fn periods(&self) -> Periods {
        Periods::from_window(
            self.window.start_year,
            self.window.end_year,
            self.window.period_length,
        )
        .expect("validated window")
    }

    /// Stable hash of the effective analytical configuration, recorded in
    /// every output. Execution details (thread cap) and I/O locations are
    /// excluded: they cannot change results, and outputs must stay
    /// byte-identical across `--threads` settings and output directories.
    pub fn config_hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("config serializes");
        let map = value.as_object_mut().expect("config is a table");
        map.remove("paths");
        if let Some(run) = map.get_mut("run").and_then(|r| r.as_object_mut()) {
            run.remove("threads");
        }
        let canonical = value.to_string();
        format!("{:016x}", fnv1a64(canonical.as_bytes()))
    }
}

/// One analysis period, inclusive on both ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Period {
    pub index: usize,
    pub start_year: i32,
    pub end_year: i32,
}

impl Period {
    pub fn label(&self) -> String {
        format!("{}-{}", self.start_year, self.end_year)
    }

    pub fn contains(&self, year: i32) -> bool {
        year >= self.start_year && year <= self.end_year
    }
}

/// Disjoint, contiguous periods covering the study window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Periods(Vec<Period>);

impl Periods {
    pub fn from_window(start_year: i32, end_year: i32, period_length: i32) -> Result<Self> {
        if period_length < 1 || end_year < start_year {
            return Err(Error::Config("invalid window".into()));
        }
        let span = end_year - start_year + 1;
        if span % period_length != 0 {
            return Err(Error::Config(format!(
                "window of {span} years is not divisible into {period_length}-year periods"
            )));
        }
        let n = (span / period_length) as usize;
        let periods = (0..n)
            .map(|i| {
                let s = start_year + i as i32 * period_length;
                Period {
                    index: i,
                    start_year: s,
                    end_year: s + period_length - 1,
                }
            })
            .collect();
        Ok(Periods(periods))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Period> {
        self.0.iter()
    }

    pub fn get(&self, index: usize) -> &Period {
        &self.0[index]
    }

    pub fn window(&self) -> (i32, i32) {
        (self.0[0].start_year, self.0[self.0.len() - 1].end_year)
    }

    /// Index of the unique period containing `year`, if inside the window.
    pub fn index_of(&self, year: i32) -> Option<usize> {
        let (start, end) = self.window();
        if year < start || year > end {
            return None;
        }
        let len = self.0[0].end_year - self.0[0].start_year + 1;
        Some(((year - start) / len) as usize)
    }

    pub fn label(&self, index: usize) -> String {
        self.0[index].label()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_is_valid() {
        let config = RunConfig::default();
        config.validate().unwrap();
        assert_eq!(config.periods().len(), 5);
        assert_eq!(config.whitelist().len(), 15);
    }

    #[test]
    fn default_periods_match_study_grid() {
        let periods = Periods::from_window(1992, 2021, 6).unwrap();
        assert_eq!(periods.len(), 5);
        assert_eq!(periods.get(0).label(), "1992-1997");
        assert_eq!(periods.get(4).label(), "2016-2021");
        assert_eq!(periods.index_of(1992), Some(0));
        assert_eq!(periods.index_of(1997), Some(0));
        assert_eq!(periods.index_of(1998), Some(1));
        assert_eq!(periods.index_of(2021), Some(4));
        assert_eq!(periods.index_of(1991), None);
        assert_eq!(periods.index_of(2022), None);
    }

    #[test]
    fn rejects_non_partitioning_window() {
        assert!(Periods::from_window(1992, 2020, 6).is_err());
        let mut config = RunConfig::default();
        config.window.end_year = 2020;
        assert!(config.validate().is_err());
    }

    #[test]
    fn rejects_bad_thresholds() {
        let mut config = RunConfig::default();
        config.classes.thresholds = vec![10.0, 5.0];
        assert!(config.validate().is_err());
        config.classes.thresholds = vec![0.0, 10.0];
        assert!(config.validate().is_err());
        config.classes.thresholds = vec![5.0, 100.0];
        assert!(config.validate().is_err());
    }

    #[test]
    fn config_hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.config_hash(), b.config_hash());
        b.run.seed = 43;
        assert_ne!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn config_hash_ignores_threads_and_paths() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        b.run.threads = 8;
        b.paths.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.config_hash(), b.config_hash());
    }

    #[test]
    fn toml_round_trip() {
        let text = r#"
            [run]
            seed = 7
            home_country = "PL"

            [window]
            start_year = 1992
            end_year = 2021
            period_length = 6

            [disciplines]
            1600 = "CHEM"
            3100 = "PHYS"
        "#;
        let config = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(config.run.seed, 7);
        assert_eq!(config.whitelist().get(&1600).unwrap(), "CHEM");
        assert_eq!(config.whitelist().len(), 2);
    }
}
