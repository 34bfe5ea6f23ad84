//! CSV tables with `#` provenance lines.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(i64::from(v))
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Twelve significant digits, plain decimal for moderate exponents.
pub fn format_real(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let (mant, e) = sci.split_once('e').unwrap();
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{e}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File stem.
    pub name: String,
    /// `name [unit]` headers.
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, columns: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, header: &str) -> Option<Vec<&Cell>> {
        let i = self.columns.iter().position(|c| c == header)?;
        Some(self.rows.iter().map(|r| &r[i]).collect())
    }

    pub fn render(&self, provenance: &[String]) -> String {
        let mut out = String::new();
        for line in provenance {
            let _ = writeln!(out, "# {line}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(i) => i.to_string(),
                    Cell::Real(v) => format_real(*v),
                    Cell::Text(t) => t.clone(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_real(0.5), "0.5");
        assert_eq!(format_real(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_real(-2.0 / 3.0 * 1e3), "-666.666666667");
        assert_eq!(format_real(3933340.3), "3933340.3");
        assert_eq!(format_real(1.0 / 7.0 * 1e-7), "1.42857142857e-8");
        assert_eq!(format_real(6.02214076e23), "6.02214076e23");
        assert_eq!(format_real(0.0), "0");
    }

    #[test]
    fn render_layout() {
        let mut t = Table::new("x", &["beta [1]", "n [photons]"]);
        t.push(vec![0.25.into(), 4usize.into()]);
        let s = t.render(&["seed = 1".into()]);
        assert_eq!(s, "# seed = 1\nbeta [1],n [photons]\n0.25,4\n");
    }
}
