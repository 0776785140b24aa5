//! CSV ingestion and export for the three dataset files.

use std::collections::{HashMap, HashSet};
use std::fs::File;
use std::path::Path;

use csv::StringRecord;

use crate::dist::Distribution;
use crate::error::{Error, Result};

use super::{
    normalize_ratings, Dataset, FeatureVocab, HumanResponseTable, MetaphorClass, MetaphorItem, RawRating,
    RawRatingsTable, TypicalityTable,
};

pub const TYPICALITY_FILE: &str = "typicality.csv";
pub const METAPHORS_FILE: &str = "metaphors.csv";
pub const HUMAN_FILE: &str = "human.csv";

const TYPICALITY_HEADER: [&str; 3] = ["category", "feature", "value"];
const METAPHORS_HEADER: [&str; 5] = ["id", "topic", "vehicle", "class", "familiarity"];
const HUMAN_HEADER: [&str; 3] = ["metaphor_id", "feature", "count"];

/// Significant digits used for every real written to CSV.
pub const CSV_DIGITS: usize = 12;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// `typicality.csv` holds mean Likert ratings to be normalized.
    pub raw_ratings: bool,
}

/// Format `x` with `digits` significant digits in positional notation
/// (scientific for very small or very large magnitudes).
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let digits = digits.max(1);
    // Take the exponent after rounding, so 0.0999...9 counts as 0.1.
    let sci = format!("{:.*e}", digits - 1, x);
    let exponent: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("exponent");
    if exponent < -5 || exponent >= digits as i32 {
        return sci;
    }
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{:.*}", decimals, x)
}

struct CsvFile {
    name: String,
    reader: csv::Reader<File>,
}

impl CsvFile {
    fn open(dir: &Path, name: &str, header: &[&str]) -> Result<Self> {
        let path = dir.join(name);
        if !path.is_file() {
            return Err(Error::MissingFile(path));
        }
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
        let found = reader.headers().map_err(|e| csv_error(name, e))?.clone();
        let found: Vec<&str> = found.iter().collect();
        if found != header {
            return Err(Error::MalformedRow {
                file: name.to_string(),
                row: 1,
                message: format!("expected header '{}', found '{}'", header.join(","), found.join(",")),
            });
        }
        Ok(CsvFile {
            name: name.to_string(),
            reader,
        })
    }

    /// Records paired with their 1-based line numbers.
    fn records(&mut self) -> Result<Vec<(u64, StringRecord)>> {
        let mut out = Vec::new();
        for rec in self.reader.records() {
            let rec = rec.map_err(|e| csv_error(&self.name, e))?;
            let line = rec.position().map(|p| p.line()).unwrap_or(0);
            out.push((line, rec));
        }
        Ok(out)
    }

    fn malformed(&self, row: u64, message: impl Into<String>) -> Error {
        Error::MalformedRow {
            file: self.name.clone(),
            row,
            message: message.into(),
        }
    }

    fn field<'r>(&self, row: u64, rec: &'r StringRecord, i: usize, what: &str) -> Result<&'r str> {
        match rec.get(i) {
            Some(s) if !s.is_empty() => Ok(s),
            _ => Err(self.malformed(row, format!("missing {what}"))),
        }
    }

    fn number(&self, row: u64, rec: &StringRecord, i: usize, what: &str) -> Result<f64> {
        let raw = self.field(row, rec, i, what)?;
        let v: f64 = raw
            .parse()
            .map_err(|_| self.malformed(row, format!("{what} '{raw}' is not a number")))?;
        if !v.is_finite() {
            return Err(self.malformed(row, format!("{what} '{raw}' is not finite")));
        }
        Ok(v)
    }

    fn unknown(&self, row: u64, kind: &'static str, name: &str) -> Error {
        Error::UnknownReference {
            file: self.name.clone(),
            row,
            kind,
            name: name.to_string(),
        }
    }

    fn duplicate(&self, row: u64, key: String) -> Error {
        Error::DuplicateKey {
            file: self.name.clone(),
            row,
            key,
        }
    }
}

fn csv_error(file: &str, e: csv::Error) -> Error {
    let row = e.position().map(|p| p.line()).unwrap_or(0);
    match e.into_kind() {
        csv::ErrorKind::Io(err) => Error::io(file, err),
        kind => Error::MalformedRow {
            file: file.to_string(),
            row,
            message: format!("{kind:?}"),
        },
    }
}

fn read_typicality(dir: &Path, opts: LoadOptions) -> Result<TypicalityTable> {
    let mut csv = CsvFile::open(dir, TYPICALITY_FILE, &TYPICALITY_HEADER)?;
    let mut rows = Vec::new();
    let mut seen = HashSet::new();
    for (line, rec) in csv.records()? {
        let category = csv.field(line, &rec, 0, "category")?.to_string();
        let feature = csv.field(line, &rec, 1, "feature")?.to_string();
        let value = csv.number(line, &rec, 2, "value")?;
        if rec.len() != 3 {
            return Err(csv.malformed(line, format!("expected 3 fields, found {}", rec.len())));
        }
        if !seen.insert((category.clone(), feature.clone())) {
            return Err(csv.duplicate(line, format!("({category}, {feature})")));
        }
        if opts.raw_ratings && !(super::RATING_MIN..=super::RATING_MAX).contains(&value) {
            return Err(csv.malformed(line, format!("rating {value} outside the 1-7 scale")));
        }
        rows.push(RawRating {
            category,
            feature,
            rating: value,
        });
    }
    if opts.raw_ratings {
        return normalize_ratings(&RawRatingsTable::new(rows)?);
    }

    let mut categories: Vec<String> = Vec::new();
    let mut cat_idx: HashMap<String, usize> = HashMap::new();
    let mut features: Vec<String> = Vec::new();
    let mut feat_idx: HashMap<String, usize> = HashMap::new();
    for r in &rows {
        if !cat_idx.contains_key(&r.category) {
            cat_idx.insert(r.category.clone(), categories.len());
            categories.push(r.category.clone());
        }
        if !feat_idx.contains_key(&r.feature) {
            feat_idx.insert(r.feature.clone(), features.len());
            features.push(r.feature.clone());
        }
    }
    let mut cells = vec![vec![None; features.len()]; categories.len()];
    for r in &rows {
        cells[cat_idx[&r.category]][feat_idx[&r.feature]] = Some(r.rating);
    }
    let mut values = Vec::with_capacity(categories.len());
    for (c, row) in cells.into_iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (i, cell) in row.into_iter().enumerate() {
            out.push(cell.ok_or_else(|| Error::MissingCell {
                category: categories[c].clone(),
                feature: features[i].clone(),
            })?);
        }
        values.push(out);
    }
    let vocab = FeatureVocab::new(features)?;
    TypicalityTable::new_unchecked(categories, vocab, values)
}

fn read_metaphors(dir: &Path, table: &TypicalityTable) -> Result<Vec<MetaphorItem>> {
    let mut csv = CsvFile::open(dir, METAPHORS_FILE, &METAPHORS_HEADER)?;
    let mut items: Vec<MetaphorItem> = Vec::new();
    let mut ids = HashSet::new();
    for (line, rec) in csv.records()? {
        if rec.len() != 5 {
            return Err(csv.malformed(line, format!("expected 5 fields, found {}", rec.len())));
        }
        let id = csv.field(line, &rec, 0, "id")?.to_string();
        let topic = csv.field(line, &rec, 1, "topic")?.to_string();
        let vehicle = csv.field(line, &rec, 2, "vehicle")?.to_string();
        let class_raw = csv.field(line, &rec, 3, "class")?;
        let class = MetaphorClass::parse(class_raw)
            .ok_or_else(|| csv.malformed(line, format!("class '{class_raw}' is not 'inherent' or 'non_inherent'")))?;
        let familiarity = match rec.get(4) {
            Some("") | None => None,
            Some(_) => Some(csv.number(line, &rec, 4, "familiarity")?),
        };
        for category in [&topic, &vehicle] {
            if table.category_index(category).is_none() {
                return Err(csv.unknown(line, "category", category));
            }
        }
        if !ids.insert(id.clone()) {
            return Err(csv.duplicate(line, id));
        }
        items.push(MetaphorItem {
            id,
            topic,
            vehicle,
            class,
            familiarity,
        });
    }
    Ok(items)
}

fn read_human(dir: &Path, table: &TypicalityTable, items: &[MetaphorItem]) -> Result<HumanResponseTable> {
    let mut csv = CsvFile::open(dir, HUMAN_FILE, &HUMAN_HEADER)?;
    let n = table.n_features();
    let item_index: HashMap<&str, usize> = items.iter().enumerate().map(|(i, m)| (m.id.as_str(), i)).collect();
    let mut counts: Vec<Option<Vec<f64>>> = vec![None; items.len()];
    let mut first_line = vec![0u64; items.len()];
    let mut seen = HashSet::new();
    for (line, rec) in csv.records()? {
        if rec.len() != 3 {
            return Err(csv.malformed(line, format!("expected 3 fields, found {}", rec.len())));
        }
        let id = csv.field(line, &rec, 0, "metaphor_id")?;
        let feature = csv.field(line, &rec, 1, "feature")?;
        let count = csv.number(line, &rec, 2, "count")?;
        if count < 0.0 {
            return Err(csv.malformed(line, format!("negative count {count}")));
        }
        let &m = item_index.get(id).ok_or_else(|| csv.unknown(line, "metaphor", id))?;
        let f = table
            .vocab()
            .index_of(feature)
            .ok_or_else(|| csv.unknown(line, "feature", feature))?;
        if !seen.insert((m, f)) {
            return Err(csv.duplicate(line, format!("({id}, {feature})")));
        }
        let row = counts[m].get_or_insert_with(|| {
            first_line[m] = line;
            vec![0.0; n]
        });
        row[f] = count;
    }
    let mut human = HumanResponseTable::new();
    for (m, row) in counts.into_iter().enumerate() {
        // Items without rows are left for validation to report as uncovered.
        let Some(row) = row else { continue };
        let dist = Distribution::from_weights(&row).map_err(|_| {
            csv.malformed(first_line[m], format!("counts for metaphor '{}' sum to zero", items[m].id))
        })?;
        human.insert(items[m].id.clone(), dist)?;
    }
    Ok(human)
}

/// Parse the three dataset files with structural checks only (headers,
/// field syntax, references, duplicate keys, missing cells).
pub fn load_raw_dataset(dir: &Path, opts: LoadOptions) -> Result<Dataset> {
    for name in [TYPICALITY_FILE, METAPHORS_FILE, HUMAN_FILE] {
        let path = dir.join(name);
        if !path.is_file() {
            return Err(Error::MissingFile(path));
        }
    }
    let table = read_typicality(dir, opts)?;
    let items = read_metaphors(dir, &table)?;
    let human = read_human(dir, &table, &items)?;
    Ok(Dataset { table, items, human })
}

/// Load and fully validate a dataset directory.
pub fn load_dataset(dir: &Path, opts: LoadOptions) -> Result<Dataset> {
    let dataset = load_raw_dataset(dir, opts)?;
    let report = dataset.validate();
    if !report.is_clean() {
        return Err(Error::Validation(report));
    }
    Ok(dataset)
}

/// Write a dataset as normalized CSVs. Human distributions are written as
/// normalized weights over every feature.
pub fn save_dataset(dir: &Path, dataset: &Dataset) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let fmt = |x: f64| format_significant(x, CSV_DIGITS);
    let vocab = dataset.table.vocab();

    let mut w = writer(dir, TYPICALITY_FILE)?;
    write_row(&mut w, dir, TYPICALITY_HEADER)?;
    for (c, category) in dataset.table.categories().iter().enumerate() {
        for (i, feature) in vocab.features().iter().enumerate() {
            write_row(&mut w, dir, [category.as_str(), feature.as_str(), &fmt(dataset.table.value(c, i))])?;
        }
    }
    w.flush().map_err(|e| Error::io(dir.join(TYPICALITY_FILE), e))?;

    let mut w = writer(dir, METAPHORS_FILE)?;
    write_row(&mut w, dir, METAPHORS_HEADER)?;
    for m in &dataset.items {
        let fam = m.familiarity.map(fmt).unwrap_or_default();
        write_row(&mut w, dir, [m.id.as_str(), &m.topic, &m.vehicle, m.class.as_str(), &fam])?;
    }
    w.flush().map_err(|e| Error::io(dir.join(METAPHORS_FILE), e))?;

    let mut w = writer(dir, HUMAN_FILE)?;
    write_row(&mut w, dir, HUMAN_HEADER)?;
    for (id, dist) in dataset.human.iter() {
        for (i, feature) in vocab.features().iter().enumerate() {
            write_row(&mut w, dir, [id, feature.as_str(), &fmt(dist.prob(i))])?;
        }
    }
    w.flush().map_err(|e| Error::io(dir.join(HUMAN_FILE), e))?;
    Ok(())
}

fn writer(dir: &Path, name: &str) -> Result<csv::Writer<File>> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn write_row<I, T>(w: &mut csv::Writer<File>, dir: &Path, row: I) -> Result<()>
where
    I: IntoIterator<Item = T>,
    T: AsRef<[u8]>,
{
    w.write_record(row).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(err) => Error::io(dir, err),
        kind => Error::InvalidArgument(format!("csv write: {kind:?}")),
    })
}
