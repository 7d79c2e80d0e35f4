//! JSON score and classification reports.
//!
//! Keys are emitted in a fixed order and every real is printed with six
//! decimals, so reports diff cleanly. A score report looks like:
//!
//! ```text
//! {"dataset_map":0.500000,
//!  "per_image":[{"patient_id":"p1","ap":1.000000},{"patient_id":"p2","ap":null}],
//!  "thresholds":[0.400000,0.450000],
//!  "per_threshold":[{"threshold":0.400000,"tp":1,"fp":0,"fn":0}],
//!  "undefined":[]}
//! ```
//!
//! (shown wrapped; the writer emits a single line followed by `\n`).

use std::fmt::Write;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::metrics::{
    dataset_map, ConfusionCounts, ConfusionMetrics, ImageScore, MatchCounts, ThresholdSet,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ImageEntry {
    pub patient_id: String,
    /// `None` for images with neither predictions nor ground truth.
    pub ap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreReport {
    pub dataset_map: f64,
    pub per_image: Vec<ImageEntry>,
    pub thresholds: Vec<f64>,
    /// Counts summed over images, one entry per threshold.
    pub per_threshold: Vec<MatchCounts>,
    /// Names of quantities that had no defined value (reported as 0).
    pub undefined: Vec<String>,
}

impl ScoreReport {
    /// Assembles a report in the given image order.
    pub fn from_scores(
        thresholds: &ThresholdSet,
        images: impl IntoIterator<Item = (String, ImageScore)>,
    ) -> Self {
        let mut per_threshold = vec![MatchCounts::default(); thresholds.len()];
        let mut per_image = Vec::new();
        for (patient_id, score) in images {
            for (total, c) in per_threshold.iter_mut().zip(score.counts) {
                *total += c;
            }
            per_image.push(ImageEntry {
                patient_id,
                ap: score.ap,
            });
        }
        let aps: Vec<Option<f64>> = per_image.iter().map(|e| e.ap).collect();
        let undefined = if aps.iter().all(Option::is_none) {
            vec!["dataset_map".to_owned()]
        } else {
            Vec::new()
        };
        Self {
            dataset_map: dataset_map(&aps),
            per_image,
            thresholds: thresholds.values().to_vec(),
            per_threshold,
            undefined,
        }
    }
}

fn real(out: &mut String, v: f64) {
    // -0.000000 would not round-trip textually
    let v = if v == 0.0 { 0.0 } else { v };
    write!(out, "{v:.6}").unwrap();
}

fn string(out: &mut String, s: &str) {
    out.push_str(&serde_json::to_string(s).expect("strings always serialize"));
}

fn list<T>(out: &mut String, items: &[T], mut each: impl FnMut(&mut String, &T)) {
    out.push('[');
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        each(out, item);
    }
    out.push(']');
}

pub fn write_report(r: &ScoreReport) -> String {
    let mut out = String::from("{\"dataset_map\":");
    real(&mut out, r.dataset_map);
    out.push_str(",\"per_image\":");
    list(&mut out, &r.per_image, |out, e| {
        out.push_str("{\"patient_id\":");
        string(out, &e.patient_id);
        out.push_str(",\"ap\":");
        match e.ap {
            Some(v) => real(out, v),
            None => out.push_str("null"),
        }
        out.push('}');
    });
    out.push_str(",\"thresholds\":");
    list(&mut out, &r.thresholds, |out, &t| real(out, t));
    out.push_str(",\"per_threshold\":");
    let rows: Vec<(f64, MatchCounts)> = r
        .thresholds
        .iter()
        .copied()
        .zip(r.per_threshold.iter().copied())
        .collect();
    list(&mut out, &rows, |out, (t, c)| {
        out.push_str("{\"threshold\":");
        real(out, *t);
        write!(out, ",\"tp\":{},\"fp\":{},\"fn\":{}}}", c.tp, c.fp, c.fn_).unwrap();
    });
    out.push_str(",\"undefined\":");
    list(&mut out, &r.undefined, |out, s| string(out, s));
    out.push_str("}\n");
    out
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Report(msg.into())
}

fn field<'a>(obj: &'a Value, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| bad(format!("missing `{key}`")))
}

fn as_real(v: &Value, key: &str) -> Result<f64> {
    v.as_f64()
        .ok_or_else(|| bad(format!("`{key}` is not a number")))
}

fn as_count(v: &Value, key: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| bad(format!("`{key}` is not a count")))
}

fn as_array<'a>(v: &'a Value, key: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| bad(format!("`{key}` is not an array")))
}

pub fn read_report(text: &str) -> Result<ScoreReport> {
    let root: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    let dataset_map = as_real(field(&root, "dataset_map")?, "dataset_map")?;
    let per_image = as_array(field(&root, "per_image")?, "per_image")?
        .iter()
        .map(|e| {
            let patient_id = field(e, "patient_id")?
                .as_str()
                .ok_or_else(|| bad("`patient_id` is not a string"))?
                .to_owned();
            let ap = match field(e, "ap")? {
                Value::Null => None,
                v => Some(as_real(v, "ap")?),
            };
            Ok(ImageEntry { patient_id, ap })
        })
        .collect::<Result<_>>()?;
    let thresholds = as_array(field(&root, "thresholds")?, "thresholds")?
        .iter()
        .map(|v| as_real(v, "thresholds"))
        .collect::<Result<_>>()?;
    let per_threshold = as_array(field(&root, "per_threshold")?, "per_threshold")?
        .iter()
        .map(|e| {
            Ok(MatchCounts {
                tp: as_count(field(e, "tp")?, "tp")?,
                fp: as_count(field(e, "fp")?, "fp")?,
                fn_: as_count(field(e, "fn")?, "fn")?,
            })
        })
        .collect::<Result<_>>()?;
    let undefined = as_array(field(&root, "undefined")?, "undefined")?
        .iter()
        .map(|v| {
            v.as_str()
                .map(str::to_owned)
                .ok_or_else(|| bad("`undefined` entries must be strings"))
        })
        .collect::<Result<_>>()?;
    Ok(ScoreReport {
        dataset_map,
        per_image,
        thresholds,
        per_threshold,
        undefined,
    })
}

/// Binary-classification report with the counts and undefined flags.
pub fn write_classification(c: &ConfusionCounts, m: &ConfusionMetrics) -> String {
    let mut out = String::from("{");
    for (i, (name, v)) in [
        ("accuracy", m.accuracy),
        ("specificity", m.specificity),
        ("precision", m.precision),
        ("recall", m.recall),
        ("f1", m.f1),
    ]
    .into_iter()
    .enumerate()
    {
        if i > 0 {
            out.push(',');
        }
        write!(out, "\"{name}\":").unwrap();
        real(&mut out, v);
    }
    write!(
        out,
        ",\"counts\":{{\"tp\":{},\"fp\":{},\"tn\":{},\"fn\":{}}},\"undefined\":",
        c.tp, c.fp, c.tn, c.fn_
    )
    .unwrap();
    list(&mut out, &m.undefined, |out, n| string(out, n.as_str()));
    out.push_str("}\n");
    out
}
