//! Aggregate tables behind the concentration, presence, and correlation
//! analyses: class shares of output, the Relative Presence Index, frequency
//! distributions, and pairwise measure correlations.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use crate::classify::Assignments;
use crate::config::{GenderPolicy, Measure, ShareBasis};
use crate::error::Error;
use crate::ingest::Gender;
use crate::productivity::UnitRecord;

/// Grouping dimension for aggregate tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Period,
    Gender,
    Affiliation,
    AgeGroup,
    Discipline,
}

impl Dim {
    pub fn name(&self) -> &'static str {
        match self {
            Dim::Period => "period",
            Dim::Gender => "gender",
            Dim::Affiliation => "affiliation",
            Dim::AgeGroup => "age_group",
            Dim::Discipline => "discipline",
        }
    }

    pub fn value(&self, record: &UnitRecord, period_label: &dyn Fn(usize) -> String) -> String {
        match self {
            Dim::Period => period_label(record.unit.period_index),
            Dim::Gender => record.unit.gender.as_str().to_string(),
            Dim::Affiliation => if record.unit.research_intensive {
                "research_intensive"
            } else {
                "rest"
            }
            .to_string(),
            Dim::AgeGroup => record.unit.age_group.label().to_string(),
            Dim::Discipline => record.unit.discipline.clone(),
        }
    }
}

impl FromStr for Dim {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "period" => Ok(Dim::Period),
            "gender" => Ok(Dim::Gender),
            "affiliation" => Ok(Dim::Affiliation),
            "age_group" | "age" => Ok(Dim::AgeGroup),
            "discipline" => Ok(Dim::Discipline),
            other => Err(Error::Config(format!("unknown dimension '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    Top,
    Rest,
}

impl Segment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Segment::Top => "top",
            Segment::Rest => "rest",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ShareRow {
    pub key: Vec<String>,
    pub class_percent: f64,
    pub measure: Measure,
    pub segment: Segment,
    pub numerator: f64,
    pub denominator: f64,
    pub share_percent: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ShareTable {
    pub rows: Vec<ShareRow>,
    pub warnings: Vec<String>,
}

/// Share of group output held by class members, per group cell. Every cell
/// yields a top row and a rest row that sum to 100%.
///
/// Bases: `Measure` sums the ranking measure itself, `FullCount` sums article
/// counts, `DistinctPubs` counts a publication as covered when at least one
/// class member of the cell sits on its byline (rest = uncovered).
#[allow(clippy::too_many_arguments)]
pub fn concentration_share(
    records: &[UnitRecord],
    assignments: &Assignments,
    measure: Measure,
    threshold_idx: usize,
    basis: ShareBasis,
    dims: &[Dim],
    gender_policy: GenderPolicy,
    period_label: &dyn Fn(usize) -> String,
) -> ShareTable {
    let split_by_gender = dims.contains(&Dim::Gender);
    let per_unit = assignments.for_measure(measure);

    struct Cell {
        top_sum: f64,
        rest_sum: f64,
        top_pubs: BTreeSet<usize>,
        all_pubs: BTreeSet<usize>,
    }
    let mut cells: BTreeMap<Vec<String>, Cell> = BTreeMap::new();

    for (idx, record) in records.iter().enumerate() {
        if split_by_gender
            && gender_policy == GenderPolicy::Exclude
            && record.unit.gender == Gender::U
        {
            continue;
        }
        let key: Vec<String> = dims.iter().map(|d| d.value(record, period_label)).collect();
        let cell = cells.entry(key).or_insert_with(|| Cell {
            top_sum: 0.0,
            rest_sum: 0.0,
            top_pubs: BTreeSet::new(),
            all_pubs: BTreeSet::new(),
        });
        let member = per_unit[idx].memberships[threshold_idx];
        let value = match basis {
            ShareBasis::Measure => record.measure(measure),
            ShareBasis::FullCount => record.measures.p3,
            ShareBasis::DistinctPubs => 0.0,
        };
        match basis {
            ShareBasis::DistinctPubs => {
                cell.all_pubs.extend(record.unit.pub_indices.iter().copied());
                if member {
                    cell.top_pubs.extend(record.unit.pub_indices.iter().copied());
                }
            }
            _ => {
                if member {
                    cell.top_sum += value;
                } else {
                    cell.rest_sum += value;
                }
            }
        }
    }

    let mut table = ShareTable::default();
    let class_percent = assignments.thresholds[threshold_idx];
    for (key, cell) in cells {
        let (top, rest, denominator) = match basis {
            ShareBasis::DistinctPubs => {
                let all = cell.all_pubs.len() as f64;
                let covered = cell.top_pubs.len() as f64;
                (covered, all - covered, all)
            }
            _ => (cell.top_sum, cell.rest_sum, cell.top_sum + cell.rest_sum),
        };
        if denominator == 0.0 {
            table
                .warnings
                .push(format!("cell [{}] has zero denominator; row omitted", key.join(", ")));
            continue;
        }
        for (segment, numerator) in [(Segment::Top, top), (Segment::Rest, rest)] {
            table.rows.push(ShareRow {
                key: key.clone(),
                class_percent,
                measure,
                segment,
                numerator,
                denominator,
                share_percent: 100.0 * numerator / denominator,
            });
        }
    }
    table
}

#[derive(Debug, Clone)]
pub struct RpiRow {
    pub key: Vec<String>,
    pub rpi_men: Option<f64>,
    pub rpi_women: Option<f64>,
    pub tp_men: usize,
    pub all_men: usize,
    pub tp_women: usize,
    pub all_women: usize,
}

/// RPI for men = (tp_men/all_men) / (tp_women/all_women); the value for
/// women is its reciprocal. Both are undefined unless all four counts are
/// positive (a zero class or population on either side leaves no meaningful
/// ratio; output prints a marker instead).
pub fn rpi_from_counts(
    tp_men: usize,
    all_men: usize,
    tp_women: usize,
    all_women: usize,
) -> (Option<f64>, Option<f64>) {
    if tp_men == 0 || all_men == 0 || tp_women == 0 || all_women == 0 {
        return (None, None);
    }
    let men_rate = tp_men as f64 / all_men as f64;
    let women_rate = tp_women as f64 / all_women as f64;
    let rpi_men = men_rate / women_rate;
    (Some(rpi_men), Some(1.0 / rpi_men))
}

/// RPI per group cell. Gender-U units are excluded throughout.
pub fn rpi_table(
    records: &[UnitRecord],
    assignments: &Assignments,
    measure: Measure,
    threshold_idx: usize,
    dims: &[Dim],
    period_label: &dyn Fn(usize) -> String,
) -> Vec<RpiRow> {
    let per_unit = assignments.for_measure(measure);
    let mut cells: BTreeMap<Vec<String>, [usize; 4]> = BTreeMap::new();
    for (idx, record) in records.iter().enumerate() {
        let gender = record.unit.gender;
        if gender == Gender::U {
            continue;
        }
        let key: Vec<String> = dims.iter().map(|d| d.value(record, period_label)).collect();
        let counts = cells.entry(key).or_insert([0; 4]);
        let member = per_unit[idx].memberships[threshold_idx];
        match gender {
            Gender::M => {
                counts[1] += 1;
                if member {
                    counts[0] += 1;
                }
            }
            Gender::F => {
                counts[3] += 1;
                if member {
                    counts[2] += 1;
                }
            }
            Gender::U => unreachable!(),
        }
    }
    cells
        .into_iter()
        .map(|(key, [tp_men, all_men, tp_women, all_women])| {
            let (rpi_men, rpi_women) = rpi_from_counts(tp_men, all_men, tp_women, all_women);
            RpiRow {
                key,
                rpi_men,
                rpi_women,
                tp_men,
                all_men,
                tp_women,
                all_women,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistRow {
    pub row_key: Vec<String>,
    pub col_key: String,
    pub count: usize,
    pub col_percent: f64,
}

/// Frequency table over row dimensions split by an optional column dimension;
/// percentages are within each column and sum to 100.
pub fn distribution_table(
    records: &[UnitRecord],
    row_dims: &[Dim],
    col_dim: Option<Dim>,
    member_filter: Option<(&Assignments, Measure, usize)>,
    gender_policy: GenderPolicy,
    period_label: &dyn Fn(usize) -> String,
) -> Vec<DistRow> {
    let uses_gender =
        row_dims.contains(&Dim::Gender) || col_dim.map(|d| d == Dim::Gender).unwrap_or(false);
    let mut counts: BTreeMap<(Vec<String>, String), usize> = BTreeMap::new();
    let mut col_totals: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, record) in records.iter().enumerate() {
        if let Some((assignments, measure, threshold_idx)) = member_filter {
            if !assignments.for_measure(measure)[idx].memberships[threshold_idx] {
                continue;
            }
        }
        if uses_gender && gender_policy == GenderPolicy::Exclude && record.unit.gender == Gender::U
        {
            continue;
        }
        let row_key: Vec<String> = row_dims
            .iter()
            .map(|d| d.value(record, period_label))
            .collect();
        let col_key = col_dim
            .map(|d| d.value(record, period_label))
            .unwrap_or_else(|| "all".to_string());
        *counts.entry((row_key, col_key.clone())).or_insert(0) += 1;
        *col_totals.entry(col_key).or_insert(0) += 1;
    }
    counts
        .into_iter()
        .map(|((row_key, col_key), count)| {
            let total = col_totals[&col_key];
            DistRow {
                row_key,
                col_key,
                count,
                col_percent: 100.0 * count as f64 / total as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct CorrRow {
    pub key: Vec<String>,
    pub measure_a: Measure,
    pub measure_b: Measure,
    pub n: usize,
    /// None when either column has zero variance in the cell.
    pub r: Option<f64>,
}

pub const MEASURE_PAIRS: [(Measure, Measure); 6] = [
    (Measure::P1, Measure::P2),
    (Measure::P1, Measure::P3),
    (Measure::P1, Measure::P4),
    (Measure::P2, Measure::P3),
    (Measure::P2, Measure::P4),
    (Measure::P3, Measure::P4),
];

/// Pearson correlation between each pair of measures within each domain
/// cell. Cells with fewer than 3 units are skipped.
pub fn measure_correlations(
    records: &[UnitRecord],
    dims: &[Dim],
    period_label: &dyn Fn(usize) -> String,
) -> Vec<CorrRow> {
    let mut cells: BTreeMap<Vec<String>, Vec<usize>> = BTreeMap::new();
    for (idx, record) in records.iter().enumerate() {
        let key: Vec<String> = dims.iter().map(|d| d.value(record, period_label)).collect();
        cells.entry(key).or_default().push(idx);
    }
    let mut out = Vec::new();
    for (key, indices) in cells {
        if indices.len() < 3 {
            continue;
        }
        for (a, b) in MEASURE_PAIRS {
            let xs = indices.iter().map(|&i| records[i].measure(a));
            let ys = indices.iter().map(|&i| records[i].measure(b));
            out.push(CorrRow {
                key: key.clone(),
                measure_a: a,
                measure_b: b,
                n: indices.len(),
                r: pearson(xs, ys),
            });
        }
    }
    out
}

/// One-pass Pearson correlation via running co-moments. Returns None when
/// either series has zero variance.
pub fn pearson(
    xs: impl Iterator<Item = f64>,
    ys: impl Iterator<Item = f64>,
) -> Option<f64> {
    let mut n = 0.0f64;
    let mut mean_x = 0.0;
    let mut mean_y = 0.0;
    let mut m2x = 0.0;
    let mut m2y = 0.0;
    let mut cxy = 0.0;
    for (x, y) in xs.zip(ys) {
        n += 1.0;
        let dx = x - mean_x;
        mean_x += dx / n;
        m2x += dx * (x - mean_x);
        let dy = y - mean_y;
        mean_y += dy / n;
        m2y += dy * (y - mean_y);
        cxy += dx * (y - mean_y);
    }
    if n < 2.0 || m2x <= 0.0 || m2y <= 0.0 {
        return None;
    }
    Some(cxy / (m2x * m2y).sqrt())
}
