use std::fmt::Write;

use serde_json::Value;

use super::{ConfusionMatrix, MetricsError, K};
use crate::wfdb::BeatClass;

pub const REPORT_SCHEMA: &str = "ecg-beatnet/eval-report/v1";

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class: BeatClass,
    pub support: u64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
}

/// Evaluation summary. Every real-valued metric is rounded to six decimal
/// places, the precision of the serialized form, so a report and its parsed
/// JSON compare equal.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n_total: u64,
    pub overall_accuracy: f64,
    /// Unweighted mean over the classes where the metric is defined.
    pub macro_sensitivity: Option<f64>,
    pub macro_specificity: Option<f64>,
    pub per_class: Vec<ClassReport>,
    pub confusion_matrix: ConfusionMatrix,
}

fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl EvalReport {
    pub fn from_matrix(cm: &ConfusionMatrix) -> Result<Self, MetricsError> {
        let acc = cm.overall_accuracy()?;
        let per_class: Vec<ClassReport> = BeatClass::ALL
            .iter()
            .map(|&c| ClassReport {
                class: c,
                support: cm.row_sum(c),
                sensitivity: cm.sensitivity(c).map(round6),
                specificity: cm.specificity(c).map(round6),
            })
            .collect();
        Ok(Self {
            n_total: cm.total(),
            overall_accuracy: round6(acc),
            macro_sensitivity: mean(BeatClass::ALL.iter().filter_map(|&c| cm.sensitivity(c))).map(round6),
            macro_specificity: mean(BeatClass::ALL.iter().filter_map(|&c| cm.specificity(c))).map(round6),
            per_class,
            confusion_matrix: *cm,
        })
    }

    /// Pretty-printed JSON with a fixed key order and six-decimal metrics.
    pub fn to_json(&self) -> String {
        fn num(v: Option<f64>) -> String {
            v.map_or_else(|| "null".to_string(), |x| format!("{x:.6}"))
        }
        let mut s = String::new();
        s.push_str("{\n");
        writeln!(s, "  \"schema\": \"{REPORT_SCHEMA}\",").unwrap();
        writeln!(s, "  \"n_total\": {},", self.n_total).unwrap();
        writeln!(s, "  \"overall_accuracy\": {:.6},", self.overall_accuracy).unwrap();
        writeln!(s, "  \"macro_sensitivity\": {},", num(self.macro_sensitivity)).unwrap();
        writeln!(s, "  \"macro_specificity\": {},", num(self.macro_specificity)).unwrap();
        s.push_str("  \"per_class\": [\n");
        for (i, c) in self.per_class.iter().enumerate() {
            writeln!(
                s,
                "    {{\"class\": \"{}\", \"support\": {}, \"sensitivity\": {}, \"specificity\": {}}}{}",
                c.class.name(),
                c.support,
                num(c.sensitivity),
                num(c.specificity),
                if i + 1 < self.per_class.len() { "," } else { "" }
            )
            .unwrap();
        }
        s.push_str("  ],\n");
        s.push_str("  \"confusion_matrix\": [\n");
        for (i, row) in self.confusion_matrix.counts.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(s, "    [{}]{}", cells.join(", "), if i + 1 < K { "," } else { "" }).unwrap();
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self, MetricsError> {
        let bad = |m: &str| MetricsError::MalformedReport(m.to_string());
        let v: Value = serde_json::from_str(text).map_err(|e| MetricsError::MalformedReport(e.to_string()))?;
        if v["schema"] != REPORT_SCHEMA {
            return Err(bad("unknown schema"));
        }
        let opt = |x: &Value, k: &str| -> Result<Option<f64>, MetricsError> {
            match &x[k] {
                Value::Null => Ok(None),
                n => n.as_f64().map(Some).ok_or_else(|| bad(k)),
            }
        };
        let mut counts = [[0u64; K]; K];
        let rows = v["confusion_matrix"].as_array().filter(|r| r.len() == K).ok_or_else(|| bad("confusion_matrix"))?;
        for (i, row) in rows.iter().enumerate() {
            let cells = row.as_array().filter(|r| r.len() == K).ok_or_else(|| bad("confusion_matrix row"))?;
            for (j, c) in cells.iter().enumerate() {
                counts[i][j] = c.as_u64().ok_or_else(|| bad("confusion_matrix cell"))?;
            }
        }
        let per_class = v["per_class"]
            .as_array()
            .ok_or_else(|| bad("per_class"))?
            .iter()
            .map(|c| {
                Ok(ClassReport {
                    class: c["class"].as_str().and_then(|s| s.parse().ok()).ok_or_else(|| bad("class"))?,
                    support: c["support"].as_u64().ok_or_else(|| bad("support"))?,
                    sensitivity: opt(c, "sensitivity")?,
                    specificity: opt(c, "specificity")?,
                })
            })
            .collect::<Result<_, MetricsError>>()?;
        Ok(Self {
            n_total: v["n_total"].as_u64().ok_or_else(|| bad("n_total"))?,
            overall_accuracy: v["overall_accuracy"].as_f64().ok_or_else(|| bad("overall_accuracy"))?,
            macro_sensitivity: opt(&v, "macro_sensitivity")?,
            macro_specificity: opt(&v, "macro_specificity")?,
            per_class,
            confusion_matrix: ConfusionMatrix::from_counts(counts),
        })
    }

    /// Plain-text table for terminals.
    pub fn to_text(&self) -> String {
        fn pct(v: Option<f64>) -> String {
            v.map_or_else(|| "n/a".to_string(), |x| format!("{:.2}%", 100.0 * x))
        }
        let mut s = String::new();
        writeln!(s, "beats evaluated   {}", self.n_total).unwrap();
        writeln!(s, "overall accuracy  {}", pct(Some(self.overall_accuracy))).unwrap();
        writeln!(s, "macro sensitivity {}", pct(self.macro_sensitivity)).unwrap();
        writeln!(s, "macro specificity {}", pct(self.macro_specificity)).unwrap();
        writeln!(s, "\nclass    support  sensitivity  specificity").unwrap();
        for c in &self.per_class {
            writeln!(s, "{:<8} {:>7}  {:>11}  {:>11}", c.class.name(), c.support, pct(c.sensitivity), pct(c.specificity)).unwrap();
        }
        writeln!(s, "\nconfusion (rows truth, columns predicted)").unwrap();
        for (c, row) in BeatClass::ALL.iter().zip(&self.confusion_matrix.counts) {
            let cells: Vec<String> = row.iter().map(|n| format!("{n:>7}")).collect();
            writeln!(s, "{:<8}{}", c.name(), cells.join("")).unwrap();
        }
        s
    }
}
