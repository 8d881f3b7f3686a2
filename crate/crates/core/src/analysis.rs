//! Benchmark auditing on top of overlap matrices: balance reports,
//! coverage checks, the admission rule, and partitioned CE comparisons.

use crate::corruptions::CorruptionId;
use crate::error::{Error, Result};
use crate::pipeline::{run_pair, RunPlan};
use crate::rng::SeededRng;
use crate::scalar::Scalar;
use crate::scores::{ce_score, mean_overlap_per_corruption, AccuracyTable, CellValidity, MeanOverlap, OverlapMatrix};
use serde::{Deserialize, Serialize};

pub const DEFAULT_BALANCE_THRESHOLD: f64 = 0.2;
pub const DEFAULT_COVERAGE_TAU: f64 = 0.1;
pub const DEFAULT_COVERAGE_SEEDS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BalanceVerdict {
    Balanced,
    Unbalanced,
    /// Too few valid cells to judge.
    Inconclusive,
}

/// Mean overlap per corruption, ranked, with an unbalance verdict: the
/// benchmark is flagged when the spread between the most- and
/// least-overlapping corruption exceeds the threshold.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BalanceReport {
    /// Descending by mean; corruptions without valid cells sort last.
    pub ranked: Vec<MeanOverlap>,
    /// `max(mean) - min(mean)` over corruptions with valid means.
    pub dispersion: Option<f64>,
    pub threshold: f64,
    pub verdict: BalanceVerdict,
    pub excluded_cells_total: usize,
}

impl BalanceReport {
    pub fn to_text(&self) -> String {
        let mut out = String::from("corruption                mean_overlap  valid  excluded\n");
        for m in &self.ranked {
            let mean = m
                .mean
                .map_or("     n/a".to_string(), |v| format!("{v:8.4}"));
            out.push_str(&format!(
                "{:<24}  {mean:>12}  {:>5}  {:>8}\n",
                m.corruption_id, m.valid_cells, m.excluded_cells
            ));
        }
        match self.dispersion {
            Some(d) => out.push_str(&format!(
                "dispersion (max-min): {d:.4}  threshold: {:.4}  verdict: {:?}\n",
                self.threshold, self.verdict
            )),
            None => out.push_str(&format!("verdict: {:?}\n", self.verdict)),
        }
        out
    }
}

/// Ranks corruptions by mean overlap and flags unbalance when the
/// dispersion of means exceeds `threshold`.
pub fn balance_report(matrix: &OverlapMatrix, threshold: f64) -> Result<BalanceReport> {
    if matrix.n() < 3 {
        return Err(Error::validation("balance report needs at least 3 corruptions"));
    }
    let mut ranked = mean_overlap_per_corruption(matrix)?;
    ranked.sort_by(|a, b| match (a.mean, b.mean) {
        (Some(x), Some(y)) => y.partial_cmp(&x).expect("means are finite"),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.corruption_id.cmp(&b.corruption_id),
    });
    let excluded_cells_total = ranked.iter().map(|m| m.excluded_cells).sum();
    let means: Vec<f64> = ranked.iter().filter_map(|m| m.mean).collect();
    // need at least two measurable corruptions to speak about spread
    let (dispersion, verdict) = if means.len() < 2 {
        (None, BalanceVerdict::Inconclusive)
    } else {
        let max = means.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = means.iter().cloned().fold(f64::INFINITY, f64::min);
        let d = max - min;
        let verdict = if d > threshold {
            BalanceVerdict::Unbalanced
        } else {
            BalanceVerdict::Balanced
        };
        (Some(d), verdict)
    };
    Ok(BalanceReport { ranked, dispersion, threshold, verdict, excluded_cells_total })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageVerdict {
    Covered,
    NotCovered,
    Inconclusive,
}

/// One candidate-vs-benchmark-corruption overlap measurement.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairScore {
    pub benchmark_id: String,
    /// Median over the valid per-seed scores.
    pub score: Option<f64>,
    pub per_seed: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    pub candidate: String,
    pub tau: f64,
    pub seeds: Vec<u64>,
    pub pairs: Vec<PairScore>,
    pub verdict: CoverageVerdict,
    /// Benchmark corruptions whose pair score stayed undefined.
    pub undefined_pairs: Vec<String>,
}

impl CoverageReport {
    pub fn to_text(&self) -> String {
        let mut out = format!("candidate: {}  tau: {}\n", self.candidate, self.tau);
        for p in &self.pairs {
            match p.score {
                Some(s) => out.push_str(&format!("  vs {:<24} {s:.4}\n", p.benchmark_id)),
                None => out.push_str(&format!("  vs {:<24} undefined\n", p.benchmark_id)),
            }
        }
        out.push_str(&format!("verdict: {:?}\n", self.verdict));
        out
    }
}

/// The coverage rule on a finished score row: undefined anywhere means
/// inconclusive; otherwise not covered iff every score is <= tau.
pub fn coverage_verdict_from_scores(scores: &[Option<f64>], tau: f64) -> CoverageVerdict {
    if scores.iter().any(|s| s.is_none()) {
        return CoverageVerdict::Inconclusive;
    }
    if scores.iter().all(|s| s.expect("checked") <= tau) {
        CoverageVerdict::NotCovered
    } else {
        CoverageVerdict::Covered
    }
}

fn median(values: &mut Vec<f64>) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(|a, b| a.partial_cmp(b).expect("scores are finite"));
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

/// Checks whether `candidate` is covered by `benchmark`: runs the pipeline
/// pair `(candidate, b)` for every benchmark corruption over `n_seeds`
/// independent master seeds (derived from the plan's), takes the median of
/// the valid per-seed scores, and applies the all-below-tau rule. Pair
/// scores that stay undefined across every seed make the report
/// inconclusive. Benchmark models are reused through the plan's cache.
pub fn coverage_check<T: Scalar>(
    plan: &RunPlan,
    candidate: CorruptionId,
    benchmark: &[CorruptionId],
    tau: f64,
    n_seeds: usize,
) -> Result<CoverageReport> {
    if benchmark.is_empty() {
        return Err(Error::validation("benchmark must be nonempty"));
    }
    if n_seeds == 0 {
        return Err(Error::validation("need at least one seed"));
    }
    let seeds: Vec<u64> = (0..n_seeds)
        .map(|k| {
            SeededRng::new(plan.master_seed)
                .derive_str("coverage")
                .derive(k as u64)
                .seed()
        })
        .collect();
    let mut pairs = Vec::with_capacity(benchmark.len());
    for &bench in benchmark {
        let mut per_seed = Vec::with_capacity(seeds.len());
        for &seed in &seeds {
            let mut seeded = plan.clone();
            seeded.master_seed = seed;
            let (cell, _) = run_pair::<T>(&seeded, candidate, bench)?;
            per_seed.push(cell.score);
        }
        let mut valid: Vec<f64> = per_seed.iter().flatten().copied().collect();
        pairs.push(PairScore {
            benchmark_id: bench.to_string(),
            score: median(&mut valid),
            per_seed,
        });
    }
    let scores: Vec<Option<f64>> = pairs.iter().map(|p| p.score).collect();
    let verdict = coverage_verdict_from_scores(&scores, tau);
    let undefined_pairs = pairs
        .iter()
        .filter(|p| p.score.is_none())
        .map(|p| p.benchmark_id.clone())
        .collect();
    Ok(CoverageReport {
        candidate: candidate.to_string(),
        tau,
        seeds,
        pairs,
        verdict,
        undefined_pairs,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AdmissionOutcome {
    /// The candidate overlaps nothing: safe to add.
    Admit,
    /// Overlapping partners with their median scores.
    Reject { partners: Vec<(String, f64)> },
    Inconclusive { undefined_pairs: Vec<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AdmissionReport {
    pub coverage: CoverageReport,
    pub outcome: AdmissionOutcome,
}

/// The construction rule: admit a new corruption only if it overlaps no
/// benchmark corruption (coverage verdict `NotCovered`).
pub fn admission_check<T: Scalar>(
    plan: &RunPlan,
    candidate: CorruptionId,
    benchmark: &[CorruptionId],
    tau: f64,
    n_seeds: usize,
) -> Result<AdmissionReport> {
    let coverage = coverage_check::<T>(plan, candidate, benchmark, tau, n_seeds)?;
    let outcome = admission_from_coverage(&coverage, tau);
    Ok(AdmissionReport { coverage, outcome })
}

/// Pure admission rule over a finished coverage report.
pub fn admission_from_coverage(coverage: &CoverageReport, tau: f64) -> AdmissionOutcome {
    match coverage.verdict {
        CoverageVerdict::NotCovered => AdmissionOutcome::Admit,
        CoverageVerdict::Covered => AdmissionOutcome::Reject {
            partners: coverage
                .pairs
                .iter()
                .filter_map(|p| p.score.filter(|&s| s > tau).map(|s| (p.benchmark_id.clone(), s)))
                .collect(),
        },
        CoverageVerdict::Inconclusive => AdmissionOutcome::Inconclusive {
            undefined_pairs: coverage.undefined_pairs.clone(),
        },
    }
}

/// Models-by-conditions error-rate table for CE comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorTable {
    pub model_ids: Vec<String>,
    pub condition_ids: Vec<String>,
    /// Row-major error rates in [0, 1].
    pub errors: Vec<f64>,
}

impl ErrorTable {
    pub fn new(model_ids: Vec<String>, condition_ids: Vec<String>, errors: Vec<f64>) -> Result<Self> {
        if errors.len() != model_ids.len() * condition_ids.len() {
            return Err(Error::validation("error table shape mismatch"));
        }
        Ok(ErrorTable { model_ids, condition_ids, errors })
    }

    /// `1 - accuracy` over a pipeline accuracy table.
    pub fn from_accuracy_table(table: &AccuracyTable) -> Self {
        ErrorTable {
            model_ids: table.model_ids.clone(),
            condition_ids: table.condition_ids.clone(),
            errors: table.accuracies.iter().map(|a| 1.0 - a).collect(),
        }
    }

    pub fn error(&self, model: &str, condition: &str) -> Option<f64> {
        let m = self.model_ids.iter().position(|x| x == model)?;
        let c = self.condition_ids.iter().position(|x| x == condition)?;
        Some(self.errors[m * self.condition_ids.len() + c])
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionRow {
    pub model_id: String,
    pub ce_set1: f64,
    pub ce_set2: f64,
    /// CE minus the standard model's CE, the bracketed gain format.
    pub delta_set1: f64,
    pub delta_set2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionReport {
    pub reference: String,
    pub set1: Vec<String>,
    pub set2: Vec<String>,
    pub rows: Vec<PartitionRow>,
}

impl PartitionReport {
    /// Text table in the `score (delta)` style, values rounded to whole
    /// CE points.
    pub fn to_text(&self) -> String {
        fn cell(ce: f64, delta: f64) -> String {
            let d = delta.round();
            let delta_str = if d == 0.0 {
                "(0)".to_string()
            } else if d < 0.0 {
                format!("({})", d as i64)
            } else {
                format!("(+{})", d as i64)
            };
            format!("{:.0} {delta_str}", ce.round())
        }
        let mut out = String::from("model           mean_CE_set1   mean_CE_set2\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{:<14}  {:>12}   {:>12}\n",
                row.model_id,
                cell(row.ce_set1, row.delta_set1),
                cell(row.ce_set2, row.delta_set2),
            ));
        }
        out
    }
}

/// Mean CE per model over two disjoint corruption sets, normalized by the
/// `reference` model's errors, with deltas against the `standard` row.
/// The set CE is the arithmetic mean of the per-corruption CE scores.
pub fn partition_compare(
    errors: &ErrorTable,
    set1: &[String],
    set2: &[String],
    reference: &str,
) -> Result<PartitionReport> {
    if set1.is_empty() || set2.is_empty() {
        return Err(Error::validation("both sets must be nonempty"));
    }
    if set1.iter().any(|c| set2.contains(c)) {
        return Err(Error::validation("sets must be disjoint"));
    }
    for c in set1.iter().chain(set2) {
        if !errors.condition_ids.contains(c) {
            return Err(Error::validation(format!("missing column {c}")));
        }
    }
    if !errors.model_ids.iter().any(|m| m == reference) {
        return Err(Error::validation(format!("missing reference row {reference}")));
    }
    let baseline = "standard";
    if !errors.model_ids.iter().any(|m| m == baseline) {
        return Err(Error::validation("missing standard row for deltas"));
    }
    for c in set1.iter().chain(set2) {
        let e = errors.error(reference, c).expect("checked above");
        if e <= 0.0 {
            return Err(Error::validation(format!(
                "reference error for {c} must be positive, got {e}"
            )));
        }
    }

    let set_ce = |model: &str, set: &[String]| -> Result<f64> {
        let mut sum = 0.0;
        for c in set {
            let em = errors
                .error(model, c)
                .ok_or_else(|| Error::validation(format!("missing cell ({model}, {c})")))?;
            let er = errors.error(reference, c).expect("checked above");
            sum += ce_score(em, er)?;
        }
        Ok(sum / set.len() as f64)
    };

    let base1 = set_ce(baseline, set1)?;
    let base2 = set_ce(baseline, set2)?;
    let mut rows = Vec::with_capacity(errors.model_ids.len());
    for model in &errors.model_ids {
        let ce1 = set_ce(model, set1)?;
        let ce2 = set_ce(model, set2)?;
        rows.push(PartitionRow {
            model_id: model.clone(),
            ce_set1: ce1,
            ce_set2: ce2,
            delta_set1: ce1 - base1,
            delta_set2: ce2 - base2,
        });
    }
    Ok(PartitionReport {
        reference: reference.to_string(),
        set1: set1.to_vec(),
        set2: set2.to_vec(),
        rows,
    })
}

/// Convenience for tests and the CLI: a synthetic matrix from explicit
/// scores (`None` marks an undefined cell).
pub fn matrix_from_scores(ids: &[&str], scores: &[Option<f64>]) -> Result<OverlapMatrix> {
    use crate::scores::{OverlapCell, TableProvenance};
    if scores.len() != ids.len() * ids.len() {
        return Err(Error::validation("scores must be n x n"));
    }
    Ok(OverlapMatrix {
        corruption_ids: ids.iter().map(|s| s.to_string()).collect(),
        cells: scores
            .iter()
            .map(|s| match s {
                Some(v) => OverlapCell {
                    validity: CellValidity::Ok,
                    score: Some(*v),
                    pre_clamp: Some(*v),
                    ratio_c2: None,
                    ratio_c1: None,
                },
                None => OverlapCell {
                    validity: CellValidity::UndefinedDenominator,
                    score: None,
                    pre_clamp: None,
                    ratio_c2: None,
                    ratio_c1: None,
                },
            })
            .collect(),
        epsilon: crate::scores::DEFAULT_DENOMINATOR_EPSILON,
        provenance: TableProvenance::default(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform_matrix(n: usize, score: f64) -> OverlapMatrix {
        let ids: Vec<String> = (0..n).map(|i| format!("c{i}")).collect();
        let id_refs: Vec<&str> = ids.iter().map(|s| s.as_str()).collect();
        let scores: Vec<Option<f64>> = (0..n * n)
            .map(|k| Some(if k % (n + 1) == 0 { 1.0 } else { score }))
            .collect();
        matrix_from_scores(&id_refs, &scores).unwrap()
    }

    #[test]
    fn all_equal_offdiagonal_is_balanced_with_zero_dispersion() {
        let report = balance_report(&uniform_matrix(4, 0.3), 0.2).unwrap();
        assert_eq!(report.dispersion, Some(0.0));
        assert_eq!(report.verdict, BalanceVerdict::Balanced);
    }

    #[test]
    fn dominant_corruption_flags_unbalance_and_ranks_first() {
        // c0 overlaps 0.9 with everyone, the others 0.0 among themselves
        let ids = ["hot", "a", "b"];
        let scores = vec![
            Some(1.0), Some(0.9), Some(0.9),
            Some(0.9), Some(1.0), Some(0.0),
            Some(0.9), Some(0.0), Some(1.0),
        ];
        let matrix = matrix_from_scores(&ids, &scores).unwrap();
        let report = balance_report(&matrix, 0.2).unwrap();
        assert_eq!(report.ranked[0].corruption_id, "hot");
        assert!((report.ranked[0].mean.unwrap() - 0.9).abs() < 1e-12);
        // a and b means: (0.9 + 0.0)/2 = 0.45; dispersion 0.45
        assert!((report.dispersion.unwrap() - 0.45).abs() < 1e-12);
        assert_eq!(report.verdict, BalanceVerdict::Unbalanced);
    }

    #[test]
    fn balance_invariant_under_reordering() {
        let ids_a = ["x", "y", "z"];
        let ids_b = ["z", "x", "y"];
        let scores_a = vec![
            Some(1.0), Some(0.2), Some(0.6),
            Some(0.2), Some(1.0), Some(0.4),
            Some(0.6), Some(0.4), Some(1.0),
        ];
        // same pairwise structure permuted: z<->pairs preserved
        let scores_b = vec![
            Some(1.0), Some(0.6), Some(0.4),
            Some(0.6), Some(1.0), Some(0.2),
            Some(0.4), Some(0.2), Some(1.0),
        ];
        let ra = balance_report(&matrix_from_scores(&ids_a, &scores_a).unwrap(), 0.2).unwrap();
        let rb = balance_report(&matrix_from_scores(&ids_b, &scores_b).unwrap(), 0.2).unwrap();
        assert_eq!(ra.dispersion, rb.dispersion);
        assert_eq!(ra.verdict, rb.verdict);
        let means_a: Vec<_> = ra.ranked.iter().map(|m| (m.corruption_id.clone(), m.mean)).collect();
        let means_b: Vec<_> = rb.ranked.iter().map(|m| (m.corruption_id.clone(), m.mean)).collect();
        assert_eq!(means_a, means_b);
    }

    #[test]
    fn balance_needs_three_corruptions() {
        assert!(balance_report(&uniform_matrix(2, 0.5), 0.2).is_err());
    }

    #[test]
    fn coverage_rule_on_synthetic_rows() {
        // all zero: not covered, the published rule verbatim
        assert_eq!(
            coverage_verdict_from_scores(&[Some(0.0), Some(0.0)], 0.1),
            CoverageVerdict::NotCovered
        );
        // one live score: covered
        assert_eq!(
            coverage_verdict_from_scores(&[Some(0.0), Some(0.5)], 0.1),
            CoverageVerdict::Covered
        );
        // any undefined: inconclusive
        assert_eq!(
            coverage_verdict_from_scores(&[Some(0.0), None], 0.1),
            CoverageVerdict::Inconclusive
        );
        // tau = 1 makes everything not covered (scores never exceed 1 here)
        assert_eq!(
            coverage_verdict_from_scores(&[Some(1.0), Some(0.9)], 1.0),
            CoverageVerdict::NotCovered
        );
    }

    #[test]
    fn coverage_verdict_monotone_in_tau() {
        let scores = [Some(0.05), Some(0.3), Some(0.12)];
        let mut last_not_covered = false;
        for tau in [0.0, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0] {
            let v = coverage_verdict_from_scores(&scores, tau);
            let not_covered = v == CoverageVerdict::NotCovered;
            // once not_covered, raising tau must keep it not_covered
            assert!(!last_not_covered || not_covered, "regressed at tau {tau}");
            last_not_covered = not_covered;
        }
    }

    #[test]
    fn admission_rule_maps_verdicts() {
        let covered = CoverageReport {
            candidate: "x".into(),
            tau: 0.1,
            seeds: vec![1],
            pairs: vec![PairScore {
                benchmark_id: "x".into(),
                score: Some(0.99),
                per_seed: vec![Some(0.99)],
            }],
            verdict: CoverageVerdict::Covered,
            undefined_pairs: vec![],
        };
        match admission_from_coverage(&covered, 0.1) {
            AdmissionOutcome::Reject { partners } => {
                assert_eq!(partners, vec![("x".to_string(), 0.99)]);
            }
            other => panic!("expected reject, got {other:?}"),
        }
        let not_covered = CoverageReport {
            verdict: CoverageVerdict::NotCovered,
            pairs: vec![PairScore { benchmark_id: "a".into(), score: Some(0.0), per_seed: vec![] }],
            ..covered.clone()
        };
        assert!(matches!(
            admission_from_coverage(&not_covered, 0.1),
            AdmissionOutcome::Admit
        ));
    }

    fn table_from_paper_style_values() -> ErrorTable {
        // reference row with error 0.5 everywhere; other rows scaled to
        // produce exact published CE values
        let models = vec!["alexnet", "standard", "deepaug"];
        let conditions = vec!["set1c", "set2c"];
        let errors = vec![
            0.50, 0.50, // alexnet (reference)
            0.405, 0.365, // standard: CE 81 / 73
            0.295, 0.315, // deepaug: CE 59 / 63
        ];
        ErrorTable::new(
            models.into_iter().map(String::from).collect(),
            conditions.into_iter().map(String::from).collect(),
            errors,
        )
        .unwrap()
    }

    #[test]
    fn partition_reproduces_published_deltas() {
        let table = table_from_paper_style_values();
        let report = partition_compare(
            &table,
            &["set1c".to_string()],
            &["set2c".to_string()],
            "alexnet",
        )
        .unwrap();
        let deepaug = report.rows.iter().find(|r| r.model_id == "deepaug").unwrap();
        assert!((deepaug.ce_set1 - 59.0).abs() < 1e-9);
        assert!((deepaug.delta_set1 - -22.0).abs() < 1e-9);
        let text = report.to_text();
        assert!(text.contains("59 (-22)"), "text was:\n{text}");
        assert!(text.contains("81 (0)"), "text was:\n{text}");
    }

    #[test]
    fn standard_vs_itself_gives_ce_100_delta_0() {
        let table = table_from_paper_style_values();
        let report = partition_compare(
            &table,
            &["set1c".to_string()],
            &["set2c".to_string()],
            "standard",
        )
        .unwrap();
        let std_row = report.rows.iter().find(|r| r.model_id == "standard").unwrap();
        assert_eq!(std_row.ce_set1, 100.0);
        assert_eq!(std_row.delta_set1, 0.0);
    }

    #[test]
    fn model_halving_errors_on_set1_only() {
        let models = vec!["standard".to_string(), "m".to_string()];
        let conditions = vec!["a".to_string(), "b".to_string()];
        let errors = vec![
            0.4, 0.4, // standard
            0.2, 0.4, // m halves set1 errors only
        ];
        let table = ErrorTable::new(models, conditions, errors).unwrap();
        let report =
            partition_compare(&table, &["a".to_string()], &["b".to_string()], "standard").unwrap();
        let m = report.rows.iter().find(|r| r.model_id == "m").unwrap();
        assert_eq!(m.ce_set1, 50.0);
        assert_eq!(m.ce_set2, 100.0);
    }

    #[test]
    fn partition_validates_inputs() {
        let table = table_from_paper_style_values();
        // overlapping sets
        assert!(partition_compare(
            &table,
            &["set1c".to_string()],
            &["set1c".to_string()],
            "alexnet"
        )
        .is_err());
        // missing column
        assert!(partition_compare(
            &table,
            &["nope".to_string()],
            &["set2c".to_string()],
            "alexnet"
        )
        .is_err());
        // zero reference errors
        let zero_ref = ErrorTable::new(
            vec!["standard".to_string()],
            vec!["a".to_string(), "b".to_string()],
            vec![0.0, 0.5],
        )
        .unwrap();
        assert!(partition_compare(
            &zero_ref,
            &["a".to_string()],
            &["b".to_string()],
            "standard"
        )
        .is_err());
    }
}
