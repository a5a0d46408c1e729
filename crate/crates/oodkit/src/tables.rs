//! CSV tables: labels (`id,label`), matrices (`v0,v1,...`), training
//! history (`epoch,loss,lr`) and decisions (`id,score,verdict,class`).

use std::path::Path;

use oodkit_core::ood::Decision;
use oodkit_core::train::EpochRecord;
use oodkit_core::{LabelVector, Matrix};

use crate::error::{read, FileError};

fn reader(bytes: &[u8]) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(bytes)
}

fn csv_err(path: &Path, e: csv::Error) -> FileError {
    let line = e.position().map_or(0, |p| p.line() as usize);
    FileError::parse(path, line, e.to_string())
}

fn render(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn read_labels_csv(path: &Path) -> Result<LabelVector, FileError> {
    let bytes = read(path)?;
    let mut rdr = reader(&bytes);
    let header = rdr.headers().map_err(|e| csv_err(path, e))?.clone();
    if header.iter().collect::<Vec<_>>() != ["id", "label"] {
        return Err(FileError::parse(path, 1, format!("expected header id,label, got {}", header.iter().collect::<Vec<_>>().join(","))));
    }
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = i + 2;
        let raw = rec.get(1).unwrap_or_default();
        let value: i64 = raw
            .parse()
            .map_err(|_| FileError::parse(path, line, format!("label {raw:?} is not an integer")))?;
        if value < 0 {
            return Err(FileError::data(
                path,
                oodkit_core::Error::Domain(format!("line {line}: negative label {value}")),
            ));
        }
        labels.push(value as usize);
    }
    Ok(LabelVector::new(labels))
}

pub fn write_labels_csv(labels: &LabelVector, path: &Path) -> Result<(), FileError> {
    let header = ["id".to_string(), "label".to_string()];
    let rows = labels.as_slice().iter().enumerate().map(|(i, l)| vec![i.to_string(), l.to_string()]);
    crate::write_atomic(path, &render(&header, rows))
}

pub fn read_matrix_csv(path: &Path) -> Result<Matrix, FileError> {
    let bytes = read(path)?;
    let mut rdr = reader(&bytes);
    let cols = rdr.headers().map_err(|e| csv_err(path, e))?.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        for v in rec.iter() {
            data.push(v.parse::<f64>().map_err(|e| FileError::parse(path, i + 2, format!("{v:?}: {e}")))?);
        }
        rows += 1;
    }
    Matrix::new(rows, cols, data).map_err(|e| FileError::data(path, e))
}

pub fn write_matrix_csv(m: &Matrix, path: &Path) -> Result<(), FileError> {
    let header: Vec<String> = (0..m.cols()).map(|j| format!("v{j}")).collect();
    let rows = m.row_iter().map(|r| r.iter().map(f64::to_string).collect());
    crate::write_atomic(path, &render(&header, rows))
}

pub fn write_history_csv(history: &[EpochRecord], path: &Path) -> Result<(), FileError> {
    let header = ["epoch", "loss", "lr"].map(String::from);
    let rows = history.iter().map(|r| vec![r.epoch.to_string(), r.loss.to_string(), r.lr.to_string()]);
    crate::write_atomic(path, &render(&header, rows))
}

pub fn write_decisions_csv(decisions: &[Decision], path: &Path) -> Result<(), FileError> {
    let header = ["id", "score", "verdict", "class"].map(String::from);
    let rows = decisions.iter().enumerate().map(|(i, d)| {
        vec![i.to_string(), d.score.to_string(), d.verdict.to_string(), d.predicted_class.to_string()]
    });
    crate::write_atomic(path, &render(&header, rows))
}
