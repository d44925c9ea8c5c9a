//! Top-performer classification: rank units within each discipline x period
//! cohort per measure and assign tie-inclusive class membership at each
//! configured threshold.

use std::collections::BTreeMap;

use crate::config::Measure;
use crate::exec;
use crate::metrics::Dim;
use crate::productivity::UnitRecord;

/// Membership flags for one unit under one measure. `memberships` is aligned
/// with the ascending threshold list.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitAssignment {
    pub rank: usize,
    pub cohort_size: usize,
    pub memberships: Vec<bool>,
}

/// Classification results for all measures, aligned with the unit-record
/// vector they were computed from.
#[derive(Debug, Clone)]
pub struct Assignments {
    pub thresholds: Vec<f64>,
    pub by_measure: BTreeMap<Measure, Vec<UnitAssignment>>,
}

impl Assignments {
    pub fn threshold_index(&self, class_percent: f64) -> Option<usize> {
        self.thresholds.iter().position(|&t| t == class_percent)
    }

    pub fn is_member(&self, measure: Measure, unit_idx: usize, threshold_idx: usize) -> bool {
        self.by_measure[&measure][unit_idx].memberships[threshold_idx]
    }

    pub fn for_measure(&self, measure: Measure) -> &[UnitAssignment] {
        &self.by_measure[&measure]
    }
}

/// Classify one cohort. `items` pairs a stable tiebreak key (unique within
/// the cohort) with the measure value; the result is aligned with `items`.
///
/// Ranking sorts descending by value (key ascending among equal values, so
/// input order never matters). For threshold p the cutoff index is
/// k = max(1, floor(p*N/100)) and every unit whose value equals or exceeds
/// the k-th value is in the class, so ties at the cutoff are included.
pub fn classify_cohort<K: Ord>(items: &[(K, f64)], thresholds: &[f64]) -> Vec<UnitAssignment> {
    let n = items.len();
    assert!(n > 0, "cohort must be non-empty");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        items[b].1
            .partial_cmp(&items[a].1)
            .expect("measure values are finite")
            .then_with(|| items[a].0.cmp(&items[b].0))
    });

    let cutoffs: Vec<f64> = thresholds
        .iter()
        .map(|&p| {
            let k = ((p * n as f64) / 100.0).floor() as usize;
            let k = k.max(1).min(n);
            items[order[k - 1]].1
        })
        .collect();

    let mut out: Vec<UnitAssignment> = (0..n)
        .map(|_| UnitAssignment {
            rank: 0,
            cohort_size: n,
            memberships: vec![false; thresholds.len()],
        })
        .collect();
    for (pos, &idx) in order.iter().enumerate() {
        out[idx].rank = pos + 1;
        for (t, &cutoff) in cutoffs.iter().enumerate() {
            out[idx].memberships[t] = items[idx].1 >= cutoff;
        }
    }
    out
}

/// Classify every discipline x period cohort for every requested measure.
/// Cohorts are independent and processed in parallel; output order is fixed
/// by the input record order.
pub fn classify_all(
    records: &[UnitRecord],
    measures: &[Measure],
    thresholds: &[f64],
) -> Assignments {
    let mut cohorts: BTreeMap<(&str, usize), Vec<usize>> = BTreeMap::new();
    for (idx, record) in records.iter().enumerate() {
        cohorts
            .entry((record.unit.discipline.as_str(), record.unit.period_index))
            .or_default()
            .push(idx);
    }
    let cohort_list: Vec<Vec<usize>> = cohorts.into_values().collect();

    let mut by_measure = BTreeMap::new();
    for &measure in measures {
        let per_cohort = exec::map_slice(&cohort_list, |indices| {
            let items: Vec<(&str, f64)> = indices
                .iter()
                .map(|&i| (records[i].unit.author_id.as_str(), records[i].measure(measure)))
                .collect();
            classify_cohort(&items, thresholds)
        });
        let mut aligned: Vec<Option<UnitAssignment>> = vec![None; records.len()];
        for (indices, assignments) in cohort_list.iter().zip(per_cohort) {
            for (&idx, assignment) in indices.iter().zip(assignments) {
                aligned[idx] = Some(assignment);
            }
        }
        by_measure.insert(
            measure,
            aligned
                .into_iter()
                .map(|a| a.expect("every unit belongs to exactly one cohort"))
                .collect(),
        );
    }
    Assignments {
        thresholds: thresholds.to_vec(),
        by_measure,
    }
}

/// One row of a class-count table.
#[derive(Debug, Clone, PartialEq)]
pub struct CountRow {
    pub key: Vec<String>,
    pub count: usize,
    pub percent: f64,
}

/// Counts of class members grouped by the given dimensions, with the share
/// of all members each cell holds. No dimensions collapses to a single row.
pub fn class_counts(
    records: &[UnitRecord],
    assignments: &Assignments,
    measure: Measure,
    threshold_idx: usize,
    dims: &[Dim],
    period_labels: &dyn Fn(usize) -> String,
) -> Vec<CountRow> {
    let per_unit = assignments.for_measure(measure);
    let mut cells: BTreeMap<Vec<String>, usize> = BTreeMap::new();
    let mut total = 0usize;
    for (record, assignment) in records.iter().zip(per_unit) {
        if !assignment.memberships[threshold_idx] {
            continue;
        }
        total += 1;
        let key: Vec<String> = dims.iter().map(|d| d.value(record, period_labels)).collect();
        *cells.entry(key).or_insert(0) += 1;
    }
    if total == 0 {
        return Vec::new();
    }
    cells
        .into_iter()
        .map(|(key, count)| CountRow {
            key,
            count,
            percent: 100.0 * count as f64 / total as f64,
        })
        .collect()
}
