//! Plain-text helpers shared by the on-disk formats.

use std::path::Path;

use crate::{Error, Result};

/// Line cursor over an in-memory file, tracking 1-based line numbers.
pub(crate) struct Lines<'a> {
    path: &'a Path,
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    pub(crate) line_no: usize,
}

impl<'a> Lines<'a> {
    pub(crate) fn new(path: &'a Path, content: &'a str) -> Self {
        Lines { path, inner: content.lines().enumerate(), line_no: 0 }
    }

    pub(crate) fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.path, self.line_no, message)
    }

    pub(crate) fn next_line(&mut self) -> Result<&'a str> {
        match self.inner.next() {
            Some((i, l)) => {
                self.line_no = i + 1;
                Ok(l)
            }
            None => {
                self.line_no += 1;
                Err(self.err("unexpected end of file"))
            }
        }
    }

    pub(crate) fn expect(&mut self, literal: &str) -> Result<()> {
        let l = self.next_line()?;
        if l != literal {
            return Err(self.err(format!("expected `{literal}`, found `{l}`")));
        }
        Ok(())
    }

    /// Reads `key <usize>`.
    pub(crate) fn header(&mut self, key: &str) -> Result<usize> {
        let l = self.next_line()?;
        let value = l
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected `{key} <count>`")))?;
        value.parse().map_err(|_| self.err(format!("invalid count `{value}`")))
    }

    /// Reads `key <f64>`.
    pub(crate) fn real(&mut self, key: &str) -> Result<f64> {
        let l = self.next_line()?;
        let value = l
            .strip_prefix(key)
            .and_then(|rest| rest.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected `{key} <value>`")))?;
        value.parse().map_err(|_| self.err(format!("invalid number `{value}`")))
    }

    pub(crate) fn floats(&mut self, expected: usize) -> Result<Vec<f64>> {
        let l = self.next_line()?;
        let row = l
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| self.err(format!("invalid number: {e}")))?;
        if row.len() != expected {
            return Err(self.err(format!("expected {expected} values, found {}", row.len())));
        }
        Ok(row)
    }

    pub(crate) fn matrix(&mut self, tag: &str, rows: usize, cols: usize) -> Result<ndarray::Array2<f64>> {
        self.expect(tag)?;
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.floats(cols)?);
        }
        Ok(ndarray::Array2::from_shape_vec((rows, cols), data).expect("shape checked per row"))
    }

    pub(crate) fn finish(&mut self) -> Result<()> {
        for (i, l) in self.inner.by_ref() {
            if !l.trim().is_empty() {
                self.line_no = i + 1;
                return Err(self.err("trailing content"));
            }
        }
        Ok(())
    }
}

pub(crate) fn write_matrix(out: &mut String, tag: &str, m: &ndarray::Array2<f64>) {
    out.push_str(tag);
    out.push('\n');
    for row in m.rows() {
        write_row(out, row.iter().copied());
    }
}

pub(crate) fn write_row(out: &mut String, values: impl Iterator<Item = f64>) {
    use std::fmt::Write;
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        // `{}` on f64 prints the shortest string that round-trips exactly.
        write!(out, "{v}").unwrap();
    }
    out.push('\n');
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}
