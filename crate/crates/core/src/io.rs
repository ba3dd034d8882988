//! CSV and JSON file formats for datasets, tier assignments and beliefs.
//!
//! Datasets are UTF-8 CSV with a header row of label names and `0`/`1`
//! cells; tier files are a JSON object mapping each label name to `"C"`,
//! `"R"` or `"S"`. Row numbers in errors count data rows from 1, excluding
//! the header; column numbers count from 1.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::model::{BeliefVector, BinaryDataset, Label, LabelSchema, Tier};

fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Reads a tier file into name → tier, in file order.
pub fn load_tiers(path: &Path) -> Result<IndexMap<String, Tier>> {
    let text = read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    let raw: IndexMap<String, String> = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.into(),
        message: format!("tier file must be a JSON object of label -> \"C\"|\"R\"|\"S\": {e}"),
    })?;
    raw.into_iter()
        .map(|(label, value)| match value.parse::<Tier>() {
            Ok(tier) => Ok((label, tier)),
            Err(value) => Err(Error::InvalidTier { label, value }),
        })
        .collect()
}

pub fn tiers_to_json(schema: &LabelSchema) -> String {
    let map: IndexMap<&str, &str> = schema
        .labels()
        .iter()
        .map(|l| (l.name.as_str(), l.tier.code()))
        .collect();
    let mut s = serde_json::to_string_pretty(&map).expect("string map serializes");
    s.push('\n');
    s
}

pub fn save_tiers(path: &Path, schema: &LabelSchema) -> Result<()> {
    write_file(path, &tiers_to_json(schema))
}

/// Builds a schema for `header` from a tier map; every header name needs a
/// tier and every tier entry must name a header column.
pub fn schema_from_header(
    header: &[String],
    tiers: &IndexMap<String, Tier>,
) -> Result<LabelSchema> {
    let mut labels = Vec::with_capacity(header.len());
    for (c, name) in header.iter().enumerate() {
        if name.is_empty() {
            return Err(Error::EmptyLabel(c + 1));
        }
        let tier = *tiers
            .get(name)
            .ok_or_else(|| Error::MissingTier(name.clone(), c + 1))?;
        labels.push(Label {
            name: name.clone(),
            tier,
        });
    }
    let schema = LabelSchema::new(labels)?;
    if let Some(extra) = tiers.keys().find(|k| schema.position(k).is_none()) {
        return Err(Error::UnknownLabel(extra.clone()));
    }
    Ok(schema)
}

fn csv_reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn format_err(path: &Path, e: csv::Error) -> Error {
    Error::Format {
        path: path.into(),
        message: e.to_string(),
    }
}

/// Parses a CSV table: returns the header and each data record's cells.
fn read_table(path: &Path) -> Result<(Vec<String>, Vec<csv::StringRecord>)> {
    let text = read_to_string(path)?;
    if text.trim().is_empty() {
        return Err(Error::EmptyFile { path: path.into() });
    }
    let mut reader = csv_reader(&text);
    let mut records = reader.records();
    let header: Vec<String> = match records.next() {
        Some(r) => r
            .map_err(|e| format_err(path, e))?
            .iter()
            .map(|s| s.trim().to_string())
            .collect(),
        None => return Err(Error::EmptyFile { path: path.into() }),
    };
    let mut body = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| format_err(path, e))?;
        if rec.len() == 1 && rec.get(0) == Some("") {
            continue;
        }
        if rec.len() != header.len() {
            return Err(Error::RowWidth {
                path: path.into(),
                row: body.len() + 1,
                expected: header.len(),
                found: rec.len(),
            });
        }
        body.push(rec);
    }
    if body.is_empty() {
        return Err(Error::Format {
            path: path.into(),
            message: "no data rows".into(),
        });
    }
    Ok((header, body))
}

/// Loads a binary dataset; column order is the header order.
pub fn load_dataset(path: &Path, tier_path: &Path) -> Result<BinaryDataset> {
    let tiers = load_tiers(tier_path)?;
    let (header, body) = read_table(path)?;
    let schema = Arc::new(schema_from_header(&header, &tiers)?);
    parse_binary_body(path, schema, &body)
}

/// Loads a dataset whose header must match an existing schema exactly.
pub fn load_dataset_with_schema(path: &Path, schema: Arc<LabelSchema>) -> Result<BinaryDataset> {
    let (header, body) = read_table(path)?;
    check_header(path, &header, &schema)?;
    parse_binary_body(path, schema, &body)
}

fn check_header(path: &Path, header: &[String], schema: &LabelSchema) -> Result<()> {
    let expected: Vec<&str> = schema.labels().iter().map(|l| l.name.as_str()).collect();
    if header
        .iter()
        .map(String::as_str)
        .ne(expected.iter().copied())
    {
        return Err(Error::SchemaMismatch(format!(
            "{}: header does not match the label schema",
            path.display()
        )));
    }
    Ok(())
}

fn parse_binary_body(
    path: &Path,
    schema: Arc<LabelSchema>,
    body: &[csv::StringRecord],
) -> Result<BinaryDataset> {
    let mut columns = vec![Vec::with_capacity(body.len()); schema.len()];
    for (r, rec) in body.iter().enumerate() {
        for (c, cell) in rec.iter().enumerate() {
            let v = match cell.trim() {
                "0" => 0,
                "1" => 1,
                "" => return Err(bad_cell(path, r, c, &schema, "missing value".into())),
                other => {
                    return Err(bad_cell(
                        path,
                        r,
                        c,
                        &schema,
                        format!("value `{other}` is not 0 or 1"),
                    ))
                }
            };
            columns[c].push(v);
        }
    }
    BinaryDataset::from_columns(schema, columns)
}

fn bad_cell(path: &Path, r: usize, c: usize, schema: &LabelSchema, message: String) -> Error {
    Error::BadCell {
        path: path.into(),
        row: r + 1,
        column: c + 1,
        label: schema.name(c).to_string(),
        message,
    }
}

pub fn dataset_to_csv(data: &BinaryDataset) -> String {
    let schema = data.schema();
    let mut out = String::with_capacity((data.n_rows() + 1) * (2 * schema.len() + 1));
    out.push_str(&header_line(schema));
    for r in 0..data.n_rows() {
        for c in 0..data.n_cols() {
            if c > 0 {
                out.push(',');
            }
            out.push(if data.get(r, c) == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

pub fn save_dataset(path: &Path, data: &BinaryDataset) -> Result<()> {
    write_file(path, &dataset_to_csv(data))
}

fn header_line(schema: &LabelSchema) -> String {
    let names: Vec<String> = schema
        .labels()
        .iter()
        .map(|l| quote_field(&l.name))
        .collect();
    let mut s = names.join(",");
    s.push('\n');
    s
}

fn quote_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) || s.trim() != s {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Reads a beliefs CSV (one row per instance, header in canonical label order).
pub fn load_beliefs(path: &Path, schema: Arc<LabelSchema>) -> Result<Vec<BeliefVector>> {
    let (header, body) = read_table(path)?;
    check_header(path, &header, &schema)?;
    let mut out = Vec::with_capacity(body.len());
    for (r, rec) in body.iter().enumerate() {
        let mut p = Vec::with_capacity(schema.len());
        for (c, cell) in rec.iter().enumerate() {
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| bad_cell(path, r, c, &schema, format!("`{cell}` is not a number")))?;
            if !(0.0..=1.0).contains(&v) {
                return Err(bad_cell(
                    path,
                    r,
                    c,
                    &schema,
                    format!("{v} is outside [0, 1]"),
                ));
            }
            p.push(v);
        }
        out.push(BeliefVector::new(schema.clone(), p)?);
    }
    Ok(out)
}

pub fn beliefs_to_csv(schema: &LabelSchema, beliefs: &[BeliefVector]) -> String {
    let mut out = header_line(schema);
    for b in beliefs {
        for (c, v) in b.values().iter().enumerate() {
            if c > 0 {
                out.push(',');
            }
            // `{}` on f64 is the shortest round-tripping representation.
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

pub fn save_beliefs(path: &Path, schema: &LabelSchema, beliefs: &[BeliefVector]) -> Result<()> {
    write_file(path, &beliefs_to_csv(schema, beliefs))
}

/// Loads a tier-file-only schema (no data), in tier-file order.
pub fn load_schema(tier_path: &Path) -> Result<LabelSchema> {
    let tiers = load_tiers(tier_path)?;
    LabelSchema::new(
        tiers
            .into_iter()
            .map(|(name, tier)| Label { name, tier })
            .collect(),
    )
}
