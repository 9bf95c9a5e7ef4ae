use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Column-major table of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<String>,
    data: Vec<Vec<f64>>,
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn new(columns: Vec<String>, data: Vec<Vec<f64>>) -> Result<Self> {
        if columns.len() != data.len() {
            return Err(Error::InvalidModel(format!(
                "{} column names for {} columns",
                columns.len(),
                data.len()
            )));
        }
        let n = data.first().map_or(0, Vec::len);
        for (name, col) in columns.iter().zip(&data) {
            if col.len() != n {
                return Err(Error::InvalidModel(format!(
                    "column {name} has {} rows, expected {n}",
                    col.len()
                )));
            }
            if col.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "column {name} has a non-finite value"
                )));
            }
        }
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].contains(c) {
                return Err(Error::DuplicateNode(c.clone()));
            }
        }
        Ok(Self {
            columns,
            data,
            seed: None,
        })
    }

    pub fn n(&self) -> usize {
        self.data.first().map_or(0, Vec::len)
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| self.data[i].as_slice())
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns).map_err(csv_err)?;
        let mut rec = Vec::with_capacity(self.columns.len());
        for i in 0..self.n() {
            rec.clear();
            rec.extend(self.data.iter().map(|c| c[i].to_string()));
            out.write_record(&rec).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(r);
        let columns: Vec<String> = rdr
            .headers()
            .map_err(csv_err)?
            .iter()
            .map(str::to_string)
            .collect();
        let mut data = vec![Vec::new(); columns.len()];
        for (i, rec) in rdr.records().enumerate() {
            let line = i + 2;
            let rec = rec.map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
            for (j, cell) in rec.iter().enumerate() {
                let x: f64 = cell.parse().map_err(|_| Error::Parse {
                    line,
                    msg: format!("non-numeric value {cell:?} in column {}", columns[j]),
                })?;
                data[j].push(x);
            }
        }
        Self::new(columns, data)
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.position() {
        Some(p) => Error::Parse {
            line: p.line() as usize,
            msg: e.to_string(),
        },
        None => Error::Io(e.to_string()),
    }
}
