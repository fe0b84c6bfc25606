//! Tidy CSV output: RFC 4180 quoting, UTF-8, LF line ends.

use std::path::Path;

use crate::error::SimResult;

/// Shortest text that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v}")
}

/// Semicolon-joined list for a single CSV cell.
pub fn list(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";")
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_bytes(&self) -> SimResult<Vec<u8>> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?)
    }

    pub fn write(&self, path: &Path) -> SimResult<()> {
        let bytes = self.to_bytes()?;
        std::fs::write(path, bytes).map_err(|source| crate::error::SimError::Write { path: path.into(), source })
    }
}

/// Builds a row from displayable cells.
#[macro_export]
macro_rules! row {
    ($($cell:expr),* $(,)?) => {
        vec![$($cell.to_string()),*]
    };
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quoting_and_line_ends() {
        let mut t = Table::new(&["a", "b"]);
        t.push(row!["x,y", 1.5]);
        t.push(row!["say \"hi\"", num(f64::INFINITY)]);
        assert_eq!(String::from_utf8(t.to_bytes().unwrap()).unwrap(), "a,b\n\"x,y\",1.5\n\"say \"\"hi\"\"\",inf\n");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [0.1, 1.0 / 3.0, 6.4e7, 1e-300, -2.5] {
            assert_eq!(num(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
        assert_eq!(list(&[1.0, 2.5]), "1;2.5");
    }
}
