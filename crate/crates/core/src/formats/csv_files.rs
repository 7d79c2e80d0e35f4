use csv::{ReaderBuilder, StringRecord, WriterBuilder};

use super::{extent, fmt_real};
use crate::error::{Error, Result};
use crate::geometry::BBox;
use crate::nms::Detection;

const GT_HEADER: [&str; 6] = ["patientId", "x", "y", "width", "height", "Target"];
const PRED_HEADER: [&str; 2] = ["patientId", "PredictionString"];
const DET_HEADER: [&str; 7] = ["patientId", "x", "y", "width", "height", "score", "classId"];

/// One ground-truth row. `target == true` exactly when a box is present.
#[derive(Debug, Clone, PartialEq)]
pub struct GtRecord {
    pub patient_id: String,
    pub bbox: Option<BBox>,
    pub target: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PredRecord {
    pub patient_id: String,
    pub detections: Vec<Detection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionRecord {
    pub patient_id: String,
    pub detection: Detection,
}

/// Parses a headed CSV and hands each data row, with its 1-based line
/// number, to `row`.
fn parse_rows<T>(
    text: &str,
    header: &[&str],
    mut row: impl FnMut(usize, &StringRecord) -> Result<T>,
) -> Result<Vec<T>> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();

    let first = records
        .next()
        .ok_or_else(|| Error::parse(1, "missing header"))?
        .map_err(|e| Error::parse(1, e.to_string()))?;
    if first.iter().ne(header.iter().copied()) {
        return Err(Error::parse(
            1,
            format!("expected header `{}`", header.join(",")),
        ));
    }

    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != header.len() {
            return Err(Error::parse(
                line,
                format!("expected {} fields, found {}", header.len(), rec.len()),
            ));
        }
        out.push(row(line, &rec)?);
    }
    Ok(out)
}

fn real(line: usize, field: &str, name: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(line, format!("{name}: `{field}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(
            line,
            format!("{name}: `{field}` is not finite"),
        ));
    }
    Ok(v)
}

fn patient(line: usize, field: &str) -> Result<String> {
    if field.is_empty() {
        return Err(Error::parse(line, "empty patientId"));
    }
    Ok(field.to_owned())
}

fn xywh(line: usize, fields: [&str; 4]) -> Result<BBox> {
    let x = real(line, fields[0], "x")?;
    let y = real(line, fields[1], "y")?;
    let w = real(line, fields[2], "width")?;
    let h = real(line, fields[3], "height")?;
    if w < 0.0 || h < 0.0 {
        return Err(Error::parse(line, "negative width or height"));
    }
    BBox::from_xywh(x, y, w, h).map_err(|e| Error::parse(line, e.to_string()))
}

fn xywh_fields(b: &BBox) -> [String; 4] {
    [
        fmt_real(b.x_min()),
        fmt_real(b.y_min()),
        fmt_real(extent(b.x_min(), b.x_max())),
        fmt_real(extent(b.y_min(), b.y_max())),
    ]
}

fn detection(line: usize, score: f64, b: BBox, class_id: Option<u32>) -> Result<Detection> {
    Detection::with_class(b, score, class_id).map_err(|e| Error::parse(line, e.to_string()))
}

pub fn read_ground_truth(text: &str) -> Result<Vec<GtRecord>> {
    parse_rows(text, &GT_HEADER, |line, rec| {
        let patient_id = patient(line, &rec[0])?;
        let target = match &rec[5] {
            "0" => false,
            "1" => true,
            other => {
                return Err(Error::parse(
                    line,
                    format!("Target must be 0 or 1, found `{other}`"),
                ))
            }
        };
        let coords = [&rec[1], &rec[2], &rec[3], &rec[4]];
        let bbox = if coords.iter().all(|f| f.is_empty()) {
            None
        } else {
            Some(xywh(line, coords)?)
        };
        if target != bbox.is_some() {
            return Err(Error::parse(
                line,
                if target {
                    "Target 1 requires a box"
                } else {
                    "Target 0 must not carry a box"
                },
            ));
        }
        Ok(GtRecord {
            patient_id,
            bbox,
            target,
        })
    })
}

fn writer() -> csv::Writer<Vec<u8>> {
    WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new())
}

fn finish(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory writer");
    String::from_utf8(bytes).expect("csv output is utf-8")
}

pub fn write_ground_truth(records: &[GtRecord]) -> String {
    let mut w = writer();
    w.write_record(GT_HEADER).expect("in-memory writer");
    for r in records {
        let coords = match &r.bbox {
            Some(b) => xywh_fields(b),
            None => Default::default(),
        };
        let target = if r.target { "1" } else { "0" };
        w.write_record(
            std::iter::once(r.patient_id.as_str())
                .chain(coords.iter().map(String::as_str))
                .chain(std::iter::once(target)),
        )
        .expect("in-memory writer");
    }
    finish(w)
}

/// Reads the submission layout: `conf x y w h` quintuples separated by
/// whitespace.
pub fn read_predictions(text: &str) -> Result<Vec<PredRecord>> {
    parse_rows(text, &PRED_HEADER, |line, rec| {
        let patient_id = patient(line, &rec[0])?;
        let tokens: Vec<&str> = rec[1].split_whitespace().collect();
        if !tokens.len().is_multiple_of(5) {
            return Err(Error::parse(
                line,
                format!(
                    "prediction string has {} tokens, expected a multiple of 5",
                    tokens.len()
                ),
            ));
        }
        let detections = tokens
            .chunks(5)
            .map(|t| {
                let score = real(line, t[0], "confidence")?;
                let b = xywh(line, [t[1], t[2], t[3], t[4]])?;
                detection(line, score, b, None)
            })
            .collect::<Result<_>>()?;
        Ok(PredRecord {
            patient_id,
            detections,
        })
    })
}

pub fn write_predictions(records: &[PredRecord]) -> String {
    let mut w = writer();
    w.write_record(PRED_HEADER).expect("in-memory writer");
    for r in records {
        let s = r
            .detections
            .iter()
            .map(|d| {
                let [x, y, bw, bh] = xywh_fields(&d.bbox);
                format!("{} {x} {y} {bw} {bh}", fmt_real(d.score()))
            })
            .collect::<Vec<_>>()
            .join(" ");
        w.write_record([r.patient_id.as_str(), s.as_str()])
            .expect("in-memory writer");
    }
    finish(w)
}

pub fn read_detections(text: &str) -> Result<Vec<DetectionRecord>> {
    parse_rows(text, &DET_HEADER, |line, rec| {
        let patient_id = patient(line, &rec[0])?;
        let b = xywh(line, [&rec[1], &rec[2], &rec[3], &rec[4]])?;
        let score = real(line, &rec[5], "score")?;
        let class_id = match &rec[6] {
            "" => None,
            c => Some(
                c.parse::<u32>()
                    .map_err(|_| Error::parse(line, format!("classId: `{c}` is not an integer")))?,
            ),
        };
        Ok(DetectionRecord {
            patient_id,
            detection: detection(line, score, b, class_id)?,
        })
    })
}

pub fn write_detections(records: &[DetectionRecord]) -> String {
    let mut w = writer();
    w.write_record(DET_HEADER).expect("in-memory writer");
    for r in records {
        let d = &r.detection;
        let [x, y, bw, bh] = xywh_fields(&d.bbox);
        let class = d.class_id.map(|c| c.to_string()).unwrap_or_default();
        w.write_record([
            r.patient_id.as_str(),
            &x,
            &y,
            &bw,
            &bh,
            &fmt_real(d.score()),
            &class,
        ])
        .expect("in-memory writer");
    }
    finish(w)
}

/// Groups items by patient id, keeping first-appearance order.
fn group<T, I>(items: I) -> Vec<(String, Vec<T>)>
where
    I: IntoIterator<Item = (String, Option<T>)>,
{
    let mut index = std::collections::HashMap::new();
    let mut out: Vec<(String, Vec<T>)> = Vec::new();
    for (id, item) in items {
        let slot = *index.entry(id.clone()).or_insert_with(|| {
            out.push((id, Vec::new()));
            out.len() - 1
        });
        if let Some(item) = item {
            out[slot].1.push(item);
        }
    }
    out
}

/// Boxes per patient. Patients with only `Target 0` rows get no boxes.
pub fn group_ground_truth(records: &[GtRecord]) -> Vec<(String, Vec<BBox>)> {
    group(records.iter().map(|r| (r.patient_id.clone(), r.bbox)))
}

/// Detections per patient, merging repeated prediction rows.
pub fn group_predictions(records: &[PredRecord]) -> Vec<(String, Vec<Detection>)> {
    group(
        records
            .iter()
            .map(|r| (r.patient_id.clone(), Some(r.detections.clone()))),
    )
    .into_iter()
    .map(|(id, chunks)| (id, chunks.into_iter().flatten().collect()))
    .collect()
}

pub fn group_detections(records: &[DetectionRecord]) -> Vec<(String, Vec<Detection>)> {
    group(
        records
            .iter()
            .map(|r| (r.patient_id.clone(), Some(r.detection))),
    )
}
