use crate::Result;
use std::fs;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

/// Identifies the code that produced a file.
pub fn build_id() -> String {
    format!("cutoff-kpp {} ({})", env!("CARGO_PKG_VERSION"), env!("KPP_BUILD_ID"))
}

/// A CSV body with a comment preamble: the schema line, then `# key=value`
/// lines for provenance and summary results.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub preamble: Vec<(String, String)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            ..Default::default()
        }
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl ToString) -> &mut Self {
        self.preamble.push((key.into(), value.to_string()));
        self
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = format!("# schema={SCHEMA_VERSION}\n");
        for (k, v) in &self.preamble {
            out.push_str(&format!("# {k}={v}\n"));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).map_err(to_io)?;
        for row in &self.rows {
            w.write_record(row).map_err(to_io)?;
        }
        let body = w.into_inner().map_err(|e| to_io(e.into_error()))?;
        out.push_str(&String::from_utf8(body).expect("csv output is utf-8"));
        Ok(out)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_csv()?)?;
        Ok(())
    }
}

fn to_io(e: impl Into<Box<dyn std::error::Error + Send + Sync>>) -> std::io::Error {
    std::io::Error::other(e)
}

/// Full-precision float cell.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}
