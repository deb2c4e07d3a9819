//! Number formatting and CSV / aligned-table rendering.

use clap::ValueEnum;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Table,
}

/// Nine significant digits, `%g` style: fixed notation for exponents in
/// `[-5, 9)`, scientific otherwise, trailing zeros dropped.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        trim_zeros(format!("{:.*}", (8 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn render(&self, format: Format, out: &mut String) {
        match format {
            Format::Csv => {
                out.push_str(&self.header.join(","));
                out.push('\n');
                for row in &self.rows {
                    out.push_str(&row.join(","));
                    out.push('\n');
                }
            }
            Format::Table => {
                let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
                for row in &self.rows {
                    for (w, cell) in widths.iter_mut().zip(row) {
                        *w = (*w).max(cell.chars().count());
                    }
                }
                let line = |cells: &mut dyn Iterator<Item = &str>, out: &mut String| {
                    let padded: Vec<String> = cells
                        .zip(&widths)
                        .map(|(c, &w)| format!("{c:>w$}"))
                        .collect();
                    out.push_str(padded.join("  ").trim_end());
                    out.push('\n');
                };
                line(&mut self.header.iter().copied(), out);
                for row in &self.rows {
                    line(&mut row.iter().map(String::as_str), out);
                }
            }
        }
    }
}

/// Render tables in order, separated by one blank line.
pub fn render(tables: &[Table], format: Format) -> String {
    let mut out = String::new();
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        t.render(format, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(num(1.0), "1");
        assert_eq!(num(2.5), "2.5");
        assert_eq!(num(-0.0), "0");
        assert_eq!(num(1.0 / 3.0), "0.333333333");
        assert_eq!(num(5.0 / 3.0), "1.66666667");
        assert_eq!(num(123456789.4), "123456789");
        assert_eq!(num(1234567890.0), "1.23456789e9");
        assert_eq!(num(0.000123456789123), "0.000123456789");
        assert_eq!(num(1.5e-7), "1.5e-7");
        assert_eq!(num(9.9999999999), "10");
        assert_eq!(num(-42.125), "-42.125");
        assert_eq!(num(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_and_table_rendering() {
        let mut a = Table::new(&["x", "long_name"]);
        a.push(vec!["1".into(), "2".into()]);
        let mut b = Table::new(&["y"]);
        b.push(vec!["abc".into()]);
        assert_eq!(render(&[a, b], Format::Csv), "x,long_name\n1,2\n\ny\nabc\n");
        let mut t = Table::new(&["x", "long_name"]);
        t.push(vec!["100".into(), "2".into()]);
        assert_eq!(render(&[t], Format::Table), "  x  long_name\n100          2\n");
    }
}
