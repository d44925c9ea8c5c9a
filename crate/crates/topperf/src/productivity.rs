//! The four productivity measurements and the regression covariates,
//! computed per author-period unit.

use crate::config::{Measure, RunConfig};
use crate::exec;
use crate::ingest::{Corpus, PublicationRecord};
use crate::panel::AuthorPeriodUnit;

/// Floor weight applied to low-ranked and unranked venues.
pub const FLOOR_WEIGHT: f64 = 0.10;

/// Venue weight for prestige-normalized counting: percentile/100, floored at
/// 0.10. Unranked venues take the floor.
pub fn prestige_weight(citescore_percentile: Option<u8>) -> f64 {
    match citescore_percentile {
        Some(pct) => (pct as f64).max(10.0) / 100.0,
        None => FLOOR_WEIGHT,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductivityVector {
    /// Prestige-normalized, full counting.
    pub p1: f64,
    /// Prestige-normalized, fractional counting.
    pub p2: f64,
    /// Non-normalized, full counting (article count).
    pub p3: f64,
    /// Non-normalized, fractional counting.
    pub p4: f64,
}

impl ProductivityVector {
    pub fn get(&self, measure: Measure) -> f64 {
        match measure {
            Measure::P1 => self.p1,
            Measure::P2 => self.p2,
            Measure::P3 => self.p3,
            Measure::P4 => self.p4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovariateSet {
    /// Mean byline size over the unit's publications (>= 1).
    pub avg_team_size: f64,
    /// Percent of publications with two or more authors, 0-100.
    pub collaboration_rate: f64,
    /// Percent of publications with at least one non-home byline country.
    pub intl_collaboration_rate: f64,
    /// Median venue percentile; unranked venues contribute the floor rank 10.
    pub median_journal_percentile: f64,
}

pub fn compute_measures(pubs: &[&PublicationRecord], corpus: &Corpus) -> ProductivityVector {
    let mut v = ProductivityVector {
        p1: 0.0,
        p2: 0.0,
        p3: 0.0,
        p4: 0.0,
    };
    for publication in pubs {
        let n = publication.n_authors() as f64;
        let w = prestige_weight(corpus.journal_percentile(&publication.journal_id));
        v.p1 += w;
        v.p2 += w / n;
        v.p3 += 1.0;
        v.p4 += 1.0 / n;
    }
    v
}

pub fn compute_covariates(
    pubs: &[&PublicationRecord],
    home_country: &str,
    corpus: &Corpus,
) -> CovariateSet {
    let n = pubs.len() as f64;
    let mut team_total = 0usize;
    let mut collaborative = 0usize;
    let mut international = 0usize;
    let mut percentiles: Vec<f64> = Vec::with_capacity(pubs.len());
    for publication in pubs {
        team_total += publication.n_authors();
        if publication.n_authors() >= 2 {
            collaborative += 1;
        }
        if publication.authors.iter().any(|b| b.country != home_country) {
            international += 1;
        }
        percentiles.push(
            corpus
                .journal_percentile(&publication.journal_id)
                .map(|p| p as f64)
                .unwrap_or(10.0),
        );
    }
    CovariateSet {
        avg_team_size: team_total as f64 / n,
        collaboration_rate: 100.0 * collaborative as f64 / n,
        intl_collaboration_rate: 100.0 * international as f64 / n,
        median_journal_percentile: median(&mut percentiles),
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("percentiles are finite"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// One panel row: the unit plus its measures and covariates.
#[derive(Debug, Clone)]
pub struct UnitRecord {
    pub unit: AuthorPeriodUnit,
    pub measures: ProductivityVector,
    pub covariates: CovariateSet,
}

impl UnitRecord {
    pub fn measure(&self, measure: Measure) -> f64 {
        self.measures.get(measure)
    }
}

/// Attach measures and covariates to every unit. Pure per-unit math, fanned
/// out in panel order.
pub fn compute_panel_metrics(
    corpus: &Corpus,
    units: Vec<AuthorPeriodUnit>,
    config: &RunConfig,
) -> Vec<UnitRecord> {
    let home = config.run.home_country.clone();
    exec::map_into(units, move |unit| {
        let pubs: Vec<&PublicationRecord> = unit
            .pub_indices
            .iter()
            .map(|&i| &corpus.publications[i])
            .collect();
        let measures = compute_measures(&pubs, corpus);
        let covariates = compute_covariates(&pubs, &home, corpus);
        UnitRecord {
            unit,
            measures,
            covariates,
        }
    })
}
