//! Robustness, overlap and CE score formulas, and the table types they
//! operate on.
//!
//! For a model `m` and corruption `c`, the robustness score is
//! `R = A_c / A_clean`. The overlap score of a corruption pair `(c1, c2)`
//! combines six robustness scores of the standard model and the two
//! augmented models `m1` (trained with c1) and `m2` (trained with c2):
//!
//! ```text
//! O = max(0, 1/2 * ( (R_m1_c2 - R_std_c2) / (R_m2_c2 - R_std_c2)
//!                  + (R_m2_c1 - R_std_c1) / (R_m1_c1 - R_std_c1) ))
//! ```
//!
//! A self-gain denominator smaller than `epsilon` in magnitude means the
//! augmented model gained nothing on its own corruption and the score is
//! reported as undefined rather than as a blown-up ratio. Scores above 1
//! are kept (cross-gain exceeding self-gain); only the clamp at 0 is part
//! of the formula.

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Default guard for near-zero self-gain denominators.
pub const DEFAULT_DENOMINATOR_EPSILON: f64 = 1e-3;

/// `R = a_c / a_clean`; higher is more robust, 1 is unimpaired.
pub fn robustness_score<T: Scalar>(a_c: T, a_clean: T) -> Result<T> {
    if a_clean <= T::zero() {
        return Err(Error::UndefinedScore(
            "robustness score needs clean accuracy > 0".into(),
        ));
    }
    Ok(a_c / a_clean)
}

/// Unnormalized overlap estimate: the sum of the two cross-gain terms
/// `(R_m2_c1 - R_std_c1) + (R_m1_c2 - R_std_c2)`. Diagnostic only.
pub fn raw_overlap<T: Scalar>(r_m2_c1: T, r_std_c1: T, r_m1_c2: T, r_std_c2: T) -> T {
    (r_m2_c1 - r_std_c1) + (r_m1_c2 - r_std_c2)
}

/// Outcome of one overlap-score evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OverlapOutcome<T> {
    Defined {
        /// `max(0, pre_clamp)`.
        score: T,
        /// The mean of the two ratios before clamping.
        pre_clamp: T,
        /// `(R_m1_c2 - R_std_c2) / (R_m2_c2 - R_std_c2)`.
        ratio_c2: T,
        /// `(R_m2_c1 - R_std_c1) / (R_m1_c1 - R_std_c1)`.
        ratio_c1: T,
    },
    /// A self-gain denominator was smaller than epsilon in magnitude.
    UndefinedDenominator,
}

/// Normalized overlap score of `(c1, c2)`. Argument order follows the
/// formula: the three robustness scores on c2, then the three on c1.
pub fn overlap_score<T: Scalar>(
    r_m1_c2: T,
    r_std_c2: T,
    r_m2_c2: T,
    r_m2_c1: T,
    r_std_c1: T,
    r_m1_c1: T,
    epsilon: T,
) -> OverlapOutcome<T> {
    let denom_c2 = r_m2_c2 - r_std_c2;
    let denom_c1 = r_m1_c1 - r_std_c1;
    if denom_c2.abs() < epsilon || denom_c1.abs() < epsilon {
        return OverlapOutcome::UndefinedDenominator;
    }
    let ratio_c2 = (r_m1_c2 - r_std_c2) / denom_c2;
    let ratio_c1 = (r_m2_c1 - r_std_c1) / denom_c1;
    let pre_clamp = (ratio_c2 + ratio_c1) / (T::one() + T::one());
    let score = if pre_clamp > T::zero() { pre_clamp } else { T::zero() };
    OverlapOutcome::Defined { score, pre_clamp, ratio_c2, ratio_c1 }
}

/// CE score in percent: `100 * err_model / err_ref`.
pub fn ce_score<T: Scalar>(err_model: T, err_ref: T) -> Result<T> {
    if err_ref <= T::zero() {
        return Err(Error::UndefinedScore("CE score needs reference error > 0".into()));
    }
    Ok(T::from_f64_lossy(100.0) * err_model / err_ref)
}

/// Multi-condition CE: `100 * sum(err_model) / sum(err_ref)`.
pub fn ce_score_multi<T: Scalar>(err_model: &[T], err_ref: &[T]) -> Result<T> {
    if err_model.is_empty() || err_model.len() != err_ref.len() {
        return Err(Error::validation("CE inputs must be nonempty and equal length"));
    }
    let sum_model: T = err_model.iter().copied().sum();
    let sum_ref: T = err_ref.iter().copied().sum();
    ce_score(sum_model, sum_ref)
}

/// Provenance carried by serialized tables.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableProvenance {
    pub dataset_digest: String,
    pub arch: String,
    pub master_seed: u64,
    pub severity_policy: String,
    pub tool_version: String,
}

/// Accuracies of every model (rows) under every evaluation condition
/// (columns). Always contains a `standard` row and a `clean` column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub model_ids: Vec<String>,
    pub condition_ids: Vec<String>,
    /// Row-major `model_ids.len() x condition_ids.len()`.
    pub accuracies: Vec<f64>,
    /// Convergence flag per model row.
    pub converged: Vec<bool>,
    pub provenance: TableProvenance,
}

pub const STANDARD_MODEL: &str = "standard";
pub const CLEAN_CONDITION: &str = "clean";

impl AccuracyTable {
    pub fn new(
        model_ids: Vec<String>,
        condition_ids: Vec<String>,
        accuracies: Vec<f64>,
        converged: Vec<bool>,
        provenance: TableProvenance,
    ) -> Result<Self> {
        if !model_ids.iter().any(|m| m == STANDARD_MODEL) {
            return Err(Error::validation("table must contain a standard model row"));
        }
        if !condition_ids.iter().any(|c| c == CLEAN_CONDITION) {
            return Err(Error::validation("table must contain a clean condition column"));
        }
        if accuracies.len() != model_ids.len() * condition_ids.len() {
            return Err(Error::validation("accuracy matrix shape mismatch"));
        }
        if converged.len() != model_ids.len() {
            return Err(Error::validation("converged flags must match model rows"));
        }
        if accuracies.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
            return Err(Error::validation("accuracies must lie in [0, 1]"));
        }
        Ok(AccuracyTable { model_ids, condition_ids, accuracies, converged, provenance })
    }

    pub fn model_index(&self, model: &str) -> Option<usize> {
        self.model_ids.iter().position(|m| m == model)
    }

    pub fn condition_index(&self, condition: &str) -> Option<usize> {
        self.condition_ids.iter().position(|c| c == condition)
    }

    pub fn accuracy(&self, model: &str, condition: &str) -> Option<f64> {
        let m = self.model_index(model)?;
        let c = self.condition_index(condition)?;
        Some(self.accuracies[m * self.condition_ids.len() + c])
    }

    pub fn is_converged(&self, model: &str) -> Option<bool> {
        self.model_index(model).map(|m| self.converged[m])
    }

    /// Robustness score of `model` under `condition`.
    pub fn robustness(&self, model: &str, condition: &str) -> Result<f64> {
        let a_c = self
            .accuracy(model, condition)
            .ok_or_else(|| Error::validation(format!("missing cell ({model}, {condition})")))?;
        let a_clean = self
            .accuracy(model, CLEAN_CONDITION)
            .ok_or_else(|| Error::validation(format!("missing clean cell for {model}")))?;
        robustness_score(a_c, a_clean)
    }

    /// Appends one model row. The row's condition layout and dataset
    /// digest must match the table's.
    pub fn append_row(&mut self, row: &AccuracyRow) -> Result<()> {
        if row.condition_ids != self.condition_ids {
            return Err(Error::validation("row conditions do not match table"));
        }
        if row.dataset_digest != self.provenance.dataset_digest {
            return Err(Error::validation(format!(
                "row dataset digest {} does not match table {}",
                row.dataset_digest, self.provenance.dataset_digest
            )));
        }
        if self.model_index(&row.model_id).is_some() {
            return Err(Error::validation(format!("duplicate model row {}", row.model_id)));
        }
        self.model_ids.push(row.model_id.clone());
        self.accuracies.extend_from_slice(&row.accuracies);
        self.converged.push(row.converged);
        Ok(())
    }

    /// CSV with the model id in the first column, six decimal places.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("model");
        for c in &self.condition_ids {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (m, model) in self.model_ids.iter().enumerate() {
            out.push_str(model);
            for c in 0..self.condition_ids.len() {
                out.push_str(&format!(",{:.6}", self.accuracies[m * self.condition_ids.len() + c]));
            }
            out.push('\n');
        }
        out
    }
}

/// One model's accuracies over a table's conditions, used to audit an
/// externally trained checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub model_id: String,
    pub condition_ids: Vec<String>,
    pub accuracies: Vec<f64>,
    pub converged: bool,
    pub dataset_digest: String,
}

/// Validity of one overlap matrix cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellValidity {
    Ok,
    UndefinedDenominator,
    NonconvergedModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverlapCell {
    pub validity: CellValidity,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    /// Pre-clamp mean of the two ratios, kept for diagnostics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pre_clamp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_c2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_c1: Option<f64>,
}

impl OverlapCell {
    fn invalid(validity: CellValidity) -> Self {
        OverlapCell { validity, score: None, pre_clamp: None, ratio_c2: None, ratio_c1: None }
    }

    pub fn is_valid(&self) -> bool {
        self.validity == CellValidity::Ok
    }
}

/// Symmetric matrix of overlap scores with per-cell validity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapMatrix {
    pub corruption_ids: Vec<String>,
    /// Row-major `n x n`.
    pub cells: Vec<OverlapCell>,
    pub epsilon: f64,
    pub provenance: TableProvenance,
}

impl OverlapMatrix {
    pub fn n(&self) -> usize {
        self.corruption_ids.len()
    }

    pub fn cell(&self, i: usize, j: usize) -> &OverlapCell {
        &self.cells[i * self.n() + j]
    }

    pub fn cell_by_ids(&self, c1: &str, c2: &str) -> Option<&OverlapCell> {
        let i = self.corruption_ids.iter().position(|c| c == c1)?;
        let j = self.corruption_ids.iter().position(|c| c == c2)?;
        Some(self.cell(i, j))
    }

    /// Computes the full matrix from an accuracy table. The table must
    /// have one model row per corruption condition, named after it. Cells
    /// touching a non-converged model (including the standard model) are
    /// flagged rather than computed.
    pub fn from_table(table: &AccuracyTable, epsilon: f64) -> Result<OverlapMatrix> {
        let corruption_ids: Vec<String> = table
            .condition_ids
            .iter()
            .filter(|c| c.as_str() != CLEAN_CONDITION)
            .cloned()
            .collect();
        if corruption_ids.is_empty() {
            return Err(Error::validation("table has no corruption conditions"));
        }
        for c in &corruption_ids {
            if table.model_index(c).is_none() {
                return Err(Error::validation(format!("no model row for corruption {c}")));
            }
        }
        if table.is_converged(STANDARD_MODEL).is_none() {
            return Err(Error::validation("missing standard model"));
        }
        let std_converged = table.is_converged(STANDARD_MODEL).unwrap();
        let n = corruption_ids.len();
        let mut cells = Vec::with_capacity(n * n);
        for c1 in &corruption_ids {
            for c2 in &corruption_ids {
                cells.push(Self::compute_cell(table, c1, c2, std_converged, epsilon)?);
            }
        }
        Ok(OverlapMatrix {
            corruption_ids,
            cells,
            epsilon,
            provenance: table.provenance.clone(),
        })
    }

    fn compute_cell(
        table: &AccuracyTable,
        c1: &str,
        c2: &str,
        std_converged: bool,
        epsilon: f64,
    ) -> Result<OverlapCell> {
        let m1_converged = table.is_converged(c1).expect("model row checked");
        let m2_converged = table.is_converged(c2).expect("model row checked");
        if !(std_converged && m1_converged && m2_converged) {
            return Ok(OverlapCell::invalid(CellValidity::NonconvergedModel));
        }
        // a clean accuracy of zero makes robustness undefined; surface it
        // as an undefined denominator rather than failing the whole matrix
        let robustness = |model: &str, condition: &str| table.robustness(model, condition);
        let scores = (|| -> Result<[f64; 6]> {
            Ok([
                robustness(c1, c2)?,             // R_m1_c2
                robustness(STANDARD_MODEL, c2)?, // R_std_c2
                robustness(c2, c2)?,             // R_m2_c2
                robustness(c2, c1)?,             // R_m2_c1
                robustness(STANDARD_MODEL, c1)?, // R_std_c1
                robustness(c1, c1)?,             // R_m1_c1
            ])
        })();
        let [r_m1_c2, r_std_c2, r_m2_c2, r_m2_c1, r_std_c1, r_m1_c1] = match scores {
            Ok(values) => values,
            Err(Error::UndefinedScore(_)) => {
                return Ok(OverlapCell::invalid(CellValidity::UndefinedDenominator));
            }
            Err(other) => return Err(other),
        };
        Ok(
            match overlap_score(r_m1_c2, r_std_c2, r_m2_c2, r_m2_c1, r_std_c1, r_m1_c1, epsilon) {
                OverlapOutcome::Defined { score, pre_clamp, ratio_c2, ratio_c1 } => OverlapCell {
                    validity: CellValidity::Ok,
                    score: Some(score),
                    pre_clamp: Some(pre_clamp),
                    ratio_c2: Some(ratio_c2),
                    ratio_c1: Some(ratio_c1),
                },
                OverlapOutcome::UndefinedDenominator => {
                    OverlapCell::invalid(CellValidity::UndefinedDenominator)
                }
            },
        )
    }

    /// CSV with corruption ids as header row and column; invalid cells
    /// print as `NA`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("corruption");
        for c in &self.corruption_ids {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (i, c) in self.corruption_ids.iter().enumerate() {
            out.push_str(c);
            for j in 0..self.n() {
                match self.cell(i, j).score {
                    Some(s) => out.push_str(&format!(",{s:.6}")),
                    None => out.push_str(",NA"),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Per-corruption mean of the valid off-diagonal overlap scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanOverlap {
    pub corruption_id: String,
    /// `None` when the corruption has no valid off-diagonal cells.
    pub mean: Option<f64>,
    pub valid_cells: usize,
    pub excluded_cells: usize,
}

/// Means over each corruption's row, excluding the diagonal and any
/// invalid cells (their count is reported, not silently dropped).
pub fn mean_overlap_per_corruption(matrix: &OverlapMatrix) -> Result<Vec<MeanOverlap>> {
    let n = matrix.n();
    if n < 2 {
        return Err(Error::validation("need at least 2 corruptions for mean overlap"));
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut sum = 0.0;
        let mut valid = 0usize;
        let mut excluded = 0usize;
        for j in 0..n {
            if i == j {
                continue;
            }
            match matrix.cell(i, j).score {
                Some(s) => {
                    sum += s;
                    valid += 1;
                }
                None => excluded += 1,
            }
        }
        out.push(MeanOverlap {
            corruption_id: matrix.corruption_ids[i].clone(),
            mean: (valid > 0).then(|| sum / valid as f64),
            valid_cells: valid,
            excluded_cells: excluded,
        });
    }
    Ok(out)
}

/// Parses a models-by-conditions CSV (as produced by [`AccuracyTable::to_csv`]
/// or assembled by hand for external audits). Returns
/// `(model ids, condition ids, row-major values)`.
pub fn parse_csv_table(text: &str) -> Result<(Vec<String>, Vec<String>, Vec<f64>)> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::parse(0, "empty CSV table"))?;
    let mut fields = header.split(',');
    let _corner = fields.next();
    let condition_ids: Vec<String> = fields.map(|f| f.trim().to_string()).collect();
    if condition_ids.is_empty() {
        return Err(Error::parse(0, "CSV header has no condition columns"));
    }
    let mut model_ids = Vec::new();
    let mut values = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let mut fields = line.split(',');
        let model = fields
            .next()
            .ok_or_else(|| Error::parse(lineno as u64 + 1, "missing model id"))?;
        model_ids.push(model.trim().to_string());
        let row: Vec<f64> = fields
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| {
                    Error::parse(lineno as u64 + 1, format!("bad number {f:?} in CSV"))
                })
            })
            .collect::<Result<_>>()?;
        if row.len() != condition_ids.len() {
            return Err(Error::parse(
                lineno as u64 + 1,
                format!("row has {} values, header {}", row.len(), condition_ids.len()),
            ));
        }
        values.extend(row);
    }
    Ok((model_ids, condition_ids, values))
}
