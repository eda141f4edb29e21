//! Column-oriented CSV reading and writing.
//!
//! Numbers are written with 17 significant digits so every `f64` survives a
//! write/read cycle unchanged.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, Spectrum, Unit};

/// Formats a value with 17 significant digits.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_columns<W: Write>(
    w: W,
    frequencies: &[f64],
    names: &[&str],
    columns: &[&[f64]],
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    let mut header = vec!["frequency_hz"];
    header.extend_from_slice(names);
    writer.write_record(&header)?;
    for (i, f) in frequencies.iter().enumerate() {
        let mut row = Vec::with_capacity(columns.len() + 1);
        row.push(format_f64(*f));
        row.extend(columns.iter().map(|c| format_f64(c[i])));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// A parsed numeric CSV table.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn read_table<R: Read>(r: R) -> Result<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(r);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let v: f64 = field.parse().map_err(|_| Error::Config {
                section: "csv".into(),
                message: format!("row {}: `{field}` is not a number", line + 1),
            })?;
            col.push(v);
        }
    }
    Ok(Table { header, columns })
}

pub fn read_table_file(path: &Path) -> Result<Table> {
    let file = std::fs::File::open(path).map_err(|e| Error::Config {
        section: "csv".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    read_table(file)
}

/// Reads a two-column `frequency_hz,<value_column>` spectrum.
pub fn read_spectrum<R: Read>(r: R, value_column: &str, unit: Unit) -> Result<Spectrum> {
    let table = read_table(r)?;
    let missing = |c: &str| Error::Config {
        section: "csv".into(),
        message: format!("missing column `{c}` (have {:?})", table.header),
    };
    let f = table
        .column("frequency_hz")
        .ok_or_else(|| missing("frequency_hz"))?;
    let v = table
        .column(value_column)
        .ok_or_else(|| missing(value_column))?;
    let grid = FrequencyGrid::new(f.to_vec()).map_err(|e| Error::Config {
        section: "csv".into(),
        message: e.to_string(),
    })?;
    Spectrum::new(grid, v.to_vec(), unit)
}

pub fn read_spectrum_file(path: &Path, value_column: &str, unit: Unit) -> Result<Spectrum> {
    let file = std::fs::File::open(path).map_err(|e| Error::Config {
        section: "csv".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    read_spectrum(file, value_column, unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_column_spectrum_parses() {
        let text = "frequency_hz,asd\n1,1e-7\n10, 1e-9\n";
        let s = read_spectrum(text.as_bytes(), "asd", Unit::Displacement).unwrap();
        assert_eq!(s.grid().values(), &[1.0, 10.0]);
        assert_eq!(s.asd(), &[1e-7, 1e-9]);
        assert!(read_spectrum(text.as_bytes(), "rin_per_rtHz", Unit::Relative).is_err());
        assert!(read_spectrum(
            "frequency_hz,asd\n1,abc\n".as_bytes(),
            "asd",
            Unit::Displacement
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn written_values_read_back_bit_exact(
            vals in proptest::collection::vec(prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), Just(0.0)], 1..40)
        ) {
            let freqs: Vec<f64> = (1..=vals.len()).map(|i| i as f64 * 0.37).collect();
            let mut buf = Vec::new();
            write_columns(&mut buf, &freqs, &["x"], &[&vals]).unwrap();
            let t = read_table(buf.as_slice()).unwrap();
            prop_assert_eq!(t.column("frequency_hz").unwrap(), freqs.as_slice());
            let back = t.column("x").unwrap();
            for (a, b) in vals.iter().zip(back) {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }
}
