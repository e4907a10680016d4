//! Extended machine-vs-expert confusion matrix and the quality metrics
//! derived from it.
//!
//! Multiplicity 0 means "1..0" (nothing found), 1 means "1..1" and m ≥ 2
//! means "1..m". Rows are expert multiplicities, columns machine ones.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::matching::{MatchDecision, Outcome};

#[derive(Debug, thiserror::Error)]
pub enum MetricsError {
    #[error("machine and expert sets disagree on source ids (machine only: {machine_only:?}, expert only: {expert_only:?})")]
    KeyMismatch {
        machine_only: Vec<String>,
        expert_only: Vec<String>,
    },
    #[error("matrix has no records")]
    EmptyMatrix,
    #[error("{0} has a zero denominator")]
    ZeroDenominator(&'static str),
    #[error("cells sum to {cells} which exceeds the population {population}")]
    CellsExceedPopulation { cells: u64, population: u64 },
    #[error("expert labels line {line}: {reason}")]
    BadLabels { line: usize, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Verified destination ids per source id. An empty set means the expert
/// found no match.
pub type ExpertLabels = BTreeMap<String, BTreeSet<String>>;

/// Reads `source_id,dest_ids` CSV with `;`-separated destination ids.
/// A header row whose first field is `source_id` is skipped.
pub fn parse_expert_labels(text: &str) -> Result<ExpertLabels, MetricsError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut labels = ExpertLabels::new();
    for (n, row) in reader.records().enumerate() {
        let row = row?;
        let line = n + 1;
        let id = row.get(0).unwrap_or("").trim();
        if n == 0 && id == "source_id" {
            continue;
        }
        if id.is_empty() {
            return Err(MetricsError::BadLabels {
                line,
                reason: "missing source id".into(),
            });
        }
        if row.len() > 2 {
            return Err(MetricsError::BadLabels {
                line,
                reason: format!("expected 2 fields, found {}", row.len()),
            });
        }
        let dests = row
            .get(1)
            .unwrap_or("")
            .split(';')
            .map(str::trim)
            .filter(|d| !d.is_empty())
            .map(String::from)
            .collect();
        if labels.insert(id.to_string(), dests).is_some() {
            return Err(MetricsError::BadLabels {
                line,
                reason: format!("duplicate source id {id:?}"),
            });
        }
    }
    Ok(labels)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "MatrixRepr", into = "MatrixRepr")]
pub struct ExtendedConfusionMatrix {
    cells: BTreeMap<(usize, usize), u64>,
    population: u64,
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    population: u64,
    /// `[expert, machine, count]` triples.
    cells: Vec<(usize, usize, u64)>,
}

impl From<ExtendedConfusionMatrix> for MatrixRepr {
    fn from(m: ExtendedConfusionMatrix) -> Self {
        MatrixRepr {
            population: m.population,
            cells: m.cells.into_iter().map(|((i, k), c)| (i, k, c)).collect(),
        }
    }
}

impl TryFrom<MatrixRepr> for ExtendedConfusionMatrix {
    type Error = MetricsError;

    fn try_from(r: MatrixRepr) -> Result<Self, Self::Error> {
        let mut cells = BTreeMap::new();
        for (i, k, c) in r.cells {
            *cells.entry((i, k)).or_insert(0) += c;
        }
        Self::with_population(cells, r.population)
    }
}

/// Ratio guarded against an empty denominator.
fn ratio(num: f64, den: f64, what: &'static str) -> Result<f64, MetricsError> {
    if den == 0.0 {
        Err(MetricsError::ZeroDenominator(what))
    } else {
        Ok(num / den)
    }
}

impl ExtendedConfusionMatrix {
    /// A matrix whose population is the sum of its cells.
    pub fn from_cells(cells: BTreeMap<(usize, usize), u64>) -> Self {
        let population = cells.values().sum();
        let cells = cells.into_iter().filter(|&(_, c)| c > 0).collect();
        Self { cells, population }
    }

    /// A matrix with an explicit population, for published grids whose
    /// cells do not account for every source record.
    pub fn with_population(
        cells: BTreeMap<(usize, usize), u64>,
        population: u64,
    ) -> Result<Self, MetricsError> {
        let mut m = Self::from_cells(cells);
        if m.population > population {
            return Err(MetricsError::CellsExceedPopulation {
                cells: m.population,
                population,
            });
        }
        m.population = population;
        Ok(m)
    }

    pub fn get(&self, expert: usize, machine: usize) -> u64 {
        self.cells.get(&(expert, machine)).copied().unwrap_or(0)
    }

    pub fn cells(&self) -> impl Iterator<Item = ((usize, usize), u64)> + '_ {
        self.cells.iter().map(|(&k, &v)| (k, v))
    }

    /// Total source records, N.
    pub fn population(&self) -> u64 {
        self.population
    }

    pub fn cell_total(&self) -> u64 {
        self.cells.values().sum()
    }

    pub fn max_expert(&self) -> usize {
        self.cells.keys().map(|&(i, _)| i).max().unwrap_or(0)
    }

    pub fn max_machine(&self) -> usize {
        self.cells.keys().map(|&(_, k)| k).max().unwrap_or(0)
    }

    /// Every cell multiplied by `factor`.
    pub fn scaled(&self, factor: u64) -> Self {
        Self {
            cells: self.cells.iter().map(|(&k, &v)| (k, v * factor)).collect(),
            population: self.population * factor,
        }
    }

    fn n(&self) -> Result<f64, MetricsError> {
        if self.population == 0 {
            Err(MetricsError::EmptyMatrix)
        } else {
            Ok(self.population as f64)
        }
    }

    fn sum_where(&self, pred: impl Fn(usize, usize) -> bool, weight: impl Fn(usize, usize) -> f64) -> f64 {
        self.cells
            .iter()
            .filter(|&(&(i, k), _)| pred(i, k))
            .map(|(&(i, k), &c)| weight(i, k) * c as f64)
            .sum()
    }

    /// Block C: expert found one, machine offered several.
    pub fn region_c(&self) -> u64 {
        self.sum_where(|i, k| i == 1 && k >= 2, |_, _| 1.0) as u64
    }

    /// Block D: expert found none, machine offered several.
    pub fn region_d(&self) -> u64 {
        self.sum_where(|i, k| i == 0 && k >= 2, |_, _| 1.0) as u64
    }

    /// Block A: machine found one, expert several.
    pub fn region_a(&self) -> u64 {
        self.sum_where(|i, k| k == 1 && i >= 2, |_, _| 1.0) as u64
    }

    /// Block B: machine found none, expert several.
    pub fn region_b(&self) -> u64 {
        self.sum_where(|i, k| k == 0 && i >= 2, |_, _| 1.0) as u64
    }

    pub fn tpp(&self) -> Result<f64, MetricsError> {
        Ok(self.get(1, 1) as f64 / self.n()?)
    }

    pub fn vtnp(&self) -> Result<f64, MetricsError> {
        Ok(self.get(0, 0) as f64 / self.n()?)
    }

    pub fn fpp(&self) -> Result<f64, MetricsError> {
        Ok(self.get(0, 1) as f64 / self.n()?)
    }

    pub fn fnp(&self) -> Result<f64, MetricsError> {
        Ok(self.get(1, 0) as f64 / self.n()?)
    }

    /// Diagonal mass against the distance-weighted off-diagonal mass.
    pub fn effectiveness(&self) -> Result<f64, MetricsError> {
        self.n()?;
        let diagonal = self.sum_where(|i, k| i == k, |_, _| 1.0);
        let off = self.sum_where(|i, k| i != k, |i, k| i.abs_diff(k) as f64);
        ratio(diagonal, diagonal + off, "effectiveness")
    }

    /// Block C credited at 1/k per record.
    pub fn etpap(&self) -> Result<f64, MetricsError> {
        let n = self.n()?;
        Ok(self.sum_where(|i, k| i == 1 && k >= 2, |_, k| 1.0 / k as f64) / n)
    }

    pub fn otpa(&self) -> Result<f64, MetricsError> {
        let n = self.n()?;
        Ok(self.sum_where(|i, k| i == 1 && k >= 1, |_, k| 1.0 / k as f64) / n)
    }

    pub fn emfi(&self) -> Result<f64, MetricsError> {
        let n = self.n()?;
        Ok(self.sum_where(|i, k| i == 1 && k >= 2, |_, k| (k - 1) as f64 / k as f64) / n)
    }

    pub fn emfp(&self) -> f64 {
        let nd = self.region_d();
        if nd == 0 {
            return 0.0;
        }
        self.sum_where(|i, k| i == 0 && k >= 2, |_, k| k as f64) / nd as f64
    }

    pub fn emttp(&self) -> f64 {
        let na = self.region_a();
        if na == 0 {
            return 0.0;
        }
        self.sum_where(|i, k| k == 1 && i >= 2, |i, _| (i - 1) as f64 / i as f64) / na as f64
    }

    pub fn emfn(&self) -> f64 {
        let nb = self.region_b();
        if nb == 0 {
            return 0.0;
        }
        self.sum_where(|i, k| k == 0 && i >= 2, |i, _| i as f64) / nb as f64
    }

    /// Accuracy, precision and recall crediting block C. Recall uses the
    /// same expression as precision.
    pub fn proposed(&self) -> Result<(f64, f64, f64), MetricsError> {
        let (tpp, vtnp, fpp, fnp) = (self.tpp()?, self.vtnp()?, self.fpp()?, self.fnp()?);
        let (etpap, emfi) = (self.etpap()?, self.emfi()?);
        let accuracy = ratio(
            tpp + vtnp + etpap,
            tpp + vtnp + etpap + fpp + emfi + fnp,
            "proposed accuracy",
        )?;
        let precision = ratio(tpp + etpap, tpp + etpap + fpp + emfi + fnp, "proposed precision")?;
        let recall = ratio(tpp + etpap, tpp + etpap + fpp + emfi + fnp, "proposed recall")?;
        Ok((accuracy, precision, recall))
    }

    pub fn classic(&self) -> Result<(f64, f64, f64), MetricsError> {
        classic_metrics(self.get(1, 1), self.get(0, 0), self.get(0, 1), self.get(1, 0))
    }

    pub fn report(&self) -> Result<MetricsReport, MetricsError> {
        let optional = |r: Result<f64, MetricsError>| r.ok();
        let proposed = self.proposed().ok();
        let classic = self.classic().ok();
        Ok(MetricsReport {
            population: self.population,
            tpp: self.tpp()?,
            fpp: self.fpp()?,
            vtnp: self.vtnp()?,
            fnp: self.fnp()?,
            effectiveness: optional(self.effectiveness()),
            etpap: self.etpap()?,
            otpa: self.otpa()?,
            emfi: self.emfi()?,
            emfp: self.emfp(),
            emttp: self.emttp(),
            emfn: self.emfn(),
            proposed_accuracy: proposed.map(|p| p.0),
            proposed_precision: proposed.map(|p| p.1),
            proposed_recall: proposed.map(|p| p.2),
            classic_accuracy: classic.map(|c| c.0),
            classic_precision: classic.map(|c| c.1),
            classic_recall: classic.map(|c| c.2),
            notes: vec![
                "Proposed recall is computed with the same expression as proposed precision.".into(),
                "A single machine match that the expert assigned elsewhere counts as a false positive.".into(),
            ],
            matrix: self.clone(),
        })
    }
}

/// Textbook accuracy, precision and recall.
pub fn classic_metrics(tp: u64, tn: u64, fp: u64, fn_: u64) -> Result<(f64, f64, f64), MetricsError> {
    let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
    Ok((
        ratio(tp + tn, tp + tn + fp + fn_, "classic accuracy")?,
        ratio(tp, tp + fp, "classic precision")?,
        ratio(tp, tp + fn_, "classic recall")?,
    ))
}

/// Destination set the machine proposed for one source.
fn machine_set(d: &MatchDecision) -> BTreeSet<&str> {
    match d.outcome {
        Outcome::NonMatch => BTreeSet::new(),
        Outcome::Match => d.candidates.iter().take(1).map(|c| c.dest_id.as_str()).collect(),
        Outcome::Possible => d.candidates.iter().map(|c| c.dest_id.as_str()).collect(),
    }
}

/// Matrix cell for one source record. When both sides name destinations
/// but share none, every machine suggestion was wrong and the record is
/// treated as an expert "1..0".
pub fn cell_for(machine: &BTreeSet<&str>, expert: &BTreeSet<String>) -> (usize, usize) {
    let k = machine.len();
    let i = expert.len();
    if i > 0 && k > 0 && !expert.iter().any(|e| machine.contains(e.as_str())) {
        (0, k)
    } else {
        (i, k)
    }
}

/// Places every source record in exactly one cell.
pub fn build_matrix(
    machine: &[MatchDecision],
    expert: &ExpertLabels,
) -> Result<ExtendedConfusionMatrix, MetricsError> {
    let machine_ids: BTreeSet<&str> = machine.iter().map(|d| d.source_id.as_str()).collect();
    let expert_ids: BTreeSet<&str> = expert.keys().map(String::as_str).collect();
    if machine_ids != expert_ids || machine_ids.len() != machine.len() {
        return Err(MetricsError::KeyMismatch {
            machine_only: machine_ids.difference(&expert_ids).map(|s| s.to_string()).collect(),
            expert_only: expert_ids.difference(&machine_ids).map(|s| s.to_string()).collect(),
        });
    }
    let mut cells = BTreeMap::new();
    for d in machine {
        *cells.entry(cell_for(&machine_set(d), &expert[&d.source_id])).or_insert(0) += 1;
    }
    Ok(ExtendedConfusionMatrix::from_cells(cells))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub population: u64,
    pub tpp: f64,
    pub fpp: f64,
    pub vtnp: f64,
    pub fnp: f64,
    pub effectiveness: Option<f64>,
    pub etpap: f64,
    pub otpa: f64,
    pub emfi: f64,
    pub emfp: f64,
    pub emttp: f64,
    pub emfn: f64,
    pub proposed_accuracy: Option<f64>,
    pub proposed_precision: Option<f64>,
    pub proposed_recall: Option<f64>,
    pub classic_accuracy: Option<f64>,
    pub classic_precision: Option<f64>,
    pub classic_recall: Option<f64>,
    pub notes: Vec<String>,
    pub matrix: ExtendedConfusionMatrix,
}

impl MetricsReport {
    /// Human-readable table, proportions as percentages to two decimals.
    pub fn percent_table(&self) -> String {
        let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{:.2}%", v * 100.0));
        let plain = |v: f64| format!("{v:.2}");
        let rows = [
            ("True Positives Percent", pct(Some(self.tpp))),
            ("False Positives Percent", pct(Some(self.fpp))),
            ("Verified True Negatives Percent", pct(Some(self.vtnp))),
            ("False Negatives Percent", pct(Some(self.fnp))),
            ("Extended True Positive Accuracy Percentage", pct(Some(self.etpap))),
            ("Overall True Positive Accuracy Percentage", pct(Some(self.otpa))),
            ("Effectiveness", pct(self.effectiveness)),
            ("EMFI", pct(Some(self.emfi))),
            ("EMFP", plain(self.emfp)),
            ("EMTTP", plain(self.emttp)),
            ("EMFN", plain(self.emfn)),
            ("Proposed Accuracy", pct(self.proposed_accuracy)),
            ("Proposed Precision", pct(self.proposed_precision)),
            ("Proposed Recall*", pct(self.proposed_recall)),
            ("Original Accuracy", pct(self.classic_accuracy)),
            ("Original Precision", pct(self.classic_precision)),
            ("Original Recall", pct(self.classic_recall)),
        ];
        let mut out = String::new();
        for (name, value) in rows {
            let _ = writeln!(out, "{name:<44}{value:>10}");
        }
        for note in &self.notes {
            let _ = writeln!(out, "* {note}");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matching::CandidatePair;
    use proptest::prelude::*;

    fn grid(cells: &[((usize, usize), u64)]) -> ExtendedConfusionMatrix {
        ExtendedConfusionMatrix::from_cells(cells.iter().copied().collect())
    }

    /// Published experiment grid: 1000 source records.
    fn experiment() -> ExtendedConfusionMatrix {
        let cells = [
            ((1, 1), 615), ((1, 0), 46), ((1, 2), 38), ((1, 3), 15), ((1, 4), 4), ((1, 8), 1), ((1, 11), 1),
            ((0, 1), 25), ((0, 0), 176), ((0, 3), 2), ((0, 4), 2), ((0, 5), 2), ((0, 6), 1), ((0, 7), 1),
            ((0, 8), 1), ((0, 9), 2),
            ((2, 2), 16), ((3, 3), 11), ((4, 4), 3), ((5, 6), 2), ((6, 7), 1), ((7, 8), 3), ((8, 9), 2), ((9, 10), 3),
        ];
        ExtendedConfusionMatrix::with_population(cells.into_iter().collect(), 1000).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn experiment_grid_by_hand() {
        let m = experiment();
        assert_eq!(m.cell_total(), 973);
        let etpap = (38.0 / 2.0 + 15.0 / 3.0 + 4.0 / 4.0 + 1.0 / 8.0 + 1.0 / 11.0) / 1000.0;
        assert!(close(m.etpap().unwrap(), etpap));
        assert!((etpap - 0.0252).abs() < 5e-5);
        assert!(close(m.otpa().unwrap(), 0.615 + etpap));
        let emfi = (38.0 / 2.0 + 2.0 * 15.0 / 3.0 + 3.0 * 4.0 / 4.0 + 7.0 / 8.0 + 10.0 / 11.0) / 1000.0;
        assert!(close(m.emfi().unwrap(), emfi));

        let diagonal = 615.0 + 176.0 + 16.0 + 11.0 + 3.0;
        let off = 46.0 + 38.0 + 15.0 * 2.0 + 4.0 * 3.0 + 7.0 + 10.0
            + 25.0 + 2.0 * 3.0 + 2.0 * 4.0 + 2.0 * 5.0 + 6.0 + 7.0 + 8.0 + 2.0 * 9.0
            + 2.0 + 1.0 + 3.0 + 2.0 + 3.0;
        assert!(close(m.effectiveness().unwrap(), diagonal / (diagonal + off)));

        let emfp = (2.0 * 3.0 + 2.0 * 4.0 + 2.0 * 5.0 + 6.0 + 7.0 + 8.0 + 2.0 * 9.0) / 11.0;
        assert!(close(m.emfp(), emfp));
        assert!(m.emfp() > 1.0);
        assert_eq!(m.emttp(), 0.0);
        assert_eq!(m.emfn(), 0.0);

        let (_, p, r) = m.classic().unwrap();
        assert!(close(p, 615.0 / 640.0));
        assert!(close(r, 615.0 / 661.0));

        let (tpp, vtnp, fpp, fnp) = (0.615, 0.176, 0.025, 0.046);
        let (acc, prec, rec) = m.proposed().unwrap();
        assert!(close(acc, (tpp + vtnp + etpap) / (tpp + vtnp + etpap + fpp + emfi + fnp)));
        assert!(close(prec, (tpp + etpap) / (tpp + etpap + fpp + emfi + fnp)));
        assert_eq!(prec, rec);
    }

    #[test]
    fn table_nine_precision_recall() {
        // Published percentages scaled to counts out of 10000.
        let (p, r) = {
            let (_, p, r) = classic_metrics(8955, 537, 149, 358).unwrap();
            (p, r)
        };
        assert!((p * 100.0 - 98.36).abs() < 0.01);
        assert!((r * 100.0 - 96.16).abs() < 0.01);
    }

    #[test]
    fn small_formulas() {
        assert_eq!(grid(&[((1, 1), 5), ((0, 0), 3), ((2, 2), 1)]).effectiveness().unwrap(), 1.0);
        assert!(close(grid(&[((1, 1), 1), ((1, 3), 1)]).effectiveness().unwrap(), 1.0 / 3.0));
        let c = ExtendedConfusionMatrix::with_population([((1, 2), 10)].into_iter().collect(), 100).unwrap();
        assert!(close(c.emfi().unwrap(), 0.05));
        assert_eq!(grid(&[((1, 1), 1)]).etpap().unwrap(), 0.0);
        assert_eq!(grid(&[((1, 1), 1)]).emfi().unwrap(), 0.0);
        assert!(close(grid(&[((0, 3), 2)]).emfp(), 3.0));
        assert!(close(grid(&[((4, 1), 1)]).emttp(), 0.75));
        assert!(close(grid(&[((3, 0), 1), ((2, 0), 1)]).emfn(), 2.5));
        assert_eq!(grid(&[((1, 1), 4), ((0, 0), 2)]).proposed().unwrap().0, 1.0);
        assert_eq!(grid(&[((0, 1), 4)]).proposed().unwrap().0, 0.0);
        assert_eq!(classic_metrics(1, 0, 0, 0).unwrap(), (1.0, 1.0, 1.0));
        assert!(matches!(classic_metrics(0, 0, 0, 0), Err(MetricsError::ZeroDenominator(_))));
        assert!(matches!(grid(&[]).etpap(), Err(MetricsError::EmptyMatrix)));
        assert!(ExtendedConfusionMatrix::with_population([((1, 1), 5)].into_iter().collect(), 4).is_err());
    }

    fn decision(id: &str, outcome: Outcome, dests: &[&str]) -> MatchDecision {
        MatchDecision {
            source_id: id.into(),
            outcome,
            candidates: dests
                .iter()
                .map(|d| CandidatePair {
                    source_id: id.into(),
                    dest_id: d.to_string(),
                    wat: 0.9,
                    at: 0.9,
                    edit_distance: 0,
                    relax_level: 0,
                    verified: true,
                })
                .collect(),
        }
    }

    fn labels(rows: &[(&str, &[&str])]) -> ExpertLabels {
        rows.iter()
            .map(|(id, ds)| (id.to_string(), ds.iter().map(|d| d.to_string()).collect()))
            .collect()
    }

    #[test]
    fn ingest_example_rows() {
        let machine = vec![
            decision("A1", Outcome::Possible, &["B1", "B2", "B3"]),
            decision("A2", Outcome::NonMatch, &[]),
            decision("A3", Outcome::Match, &["B6"]),
            decision("A4", Outcome::Possible, &["B7", "B8", "B9"]),
            decision("A9", Outcome::Match, &["B12"]),
            decision("A10", Outcome::Possible, &["B15", "B16"]),
            decision("A11", Outcome::Match, &["B40"]),
        ];
        let expert = labels(&[
            ("A1", &["B1"]),
            ("A2", &[]),
            ("A3", &["B6"]),
            ("A4", &[]),
            ("A9", &["B12", "B13", "B14"]),
            ("A10", &["B15", "B16", "B17", "B18"]),
            ("A11", &["B41"]),
        ]);
        let m = build_matrix(&machine, &expert).unwrap();
        assert_eq!(m.get(1, 3), 1);
        assert_eq!(m.get(0, 0), 1);
        assert_eq!(m.get(1, 1), 1);
        assert_eq!(m.get(0, 3), 1);
        assert_eq!(m.get(3, 1), 1);
        assert_eq!(m.get(4, 2), 1);
        // mismatched single match
        assert_eq!(m.get(0, 1), 1);
        assert_eq!(m.population(), 7);

        let err = build_matrix(&machine[..2], &expert).unwrap_err();
        assert!(matches!(err, MetricsError::KeyMismatch { .. }));
    }

    #[test]
    fn labels_csv() {
        let l = parse_expert_labels("source_id,dest_ids\ns1,d1;d2\ns2,\ns3\n").unwrap();
        assert_eq!(l["s1"].len(), 2);
        assert!(l["s2"].is_empty() && l["s3"].is_empty());
        assert!(parse_expert_labels("s1,d1\ns1,d2\n").is_err());
    }

    #[test]
    fn matrix_json_round_trip() {
        let m = experiment();
        let json = serde_json::to_string(&m).unwrap();
        assert!(json.contains("[1,11,1]"));
        let back: ExtendedConfusionMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
        let report = m.report().unwrap();
        assert!(report.percent_table().contains("61.50%"));
    }

    fn matrices() -> impl Strategy<Value = ExtendedConfusionMatrix> {
        proptest::collection::btree_map((0usize..6, 0usize..6), 0u64..50, 1..12)
            .prop_filter("non-empty", |c| c.values().sum::<u64>() > 0)
            .prop_map(ExtendedConfusionMatrix::from_cells)
    }

    proptest! {
        #[test]
        fn identities(m in matrices(), factor in 1u64..20) {
            prop_assert!((m.otpa().unwrap() - (m.tpp().unwrap() + m.etpap().unwrap())).abs() < 1e-12);
            let c = m.region_c() as f64 / m.population() as f64;
            prop_assert!((m.etpap().unwrap() + m.emfi().unwrap() - c).abs() < 1e-12);
            let off = m.cells().any(|((i, k), c)| i != k && c > 0);
            prop_assert_eq!(m.effectiveness().unwrap() == 1.0, !off);
            let s = m.scaled(factor);
            let a = m.report().unwrap();
            let b = s.report().unwrap();
            for (x, y) in [
                (a.tpp, b.tpp), (a.etpap, b.etpap), (a.otpa, b.otpa), (a.emfi, b.emfi),
                (a.emfp, b.emfp), (a.emttp, b.emttp), (a.emfn, b.emfn),
            ] {
                prop_assert!((x - y).abs() < 1e-9);
            }
            prop_assert_eq!(a.effectiveness.is_some(), b.effectiveness.is_some());
            for v in [a.emfp, a.emfn] {
                prop_assert!(v == 0.0 || v > 1.0);
            }
        }
    }
}
