//! Plain-text matrix, vector and weights files.
//!
//! ```text
//! matrix <n> <m>        vector <n>        weights <n>
//! <m numbers>  × n      <n numbers>       <n numbers>
//! ```
//!
//! Numbers are decimal with optional exponent. Every value must be finite and
//! non-negative; weights must be strictly positive. Blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::space::{PositiveOperator, WeightedSpace};

/// 17 significant digits; parses back to the identical `f64`.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixData {
    pub rows: usize,
    pub cols: usize,
    /// row-major
    pub data: Vec<f64>,
}

struct Lines<'a> {
    source: &'a str,
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last_line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str, source: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)> + 'a> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty()),
        );
        Self {
            source,
            inner: it.peekable(),
            last_line: 0,
        }
    }

    fn err(&self, line: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            source_name: self.source.to_string(),
            line,
            message: message.into(),
        }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last_line = n;
                Ok((n, l))
            }
            None => Err(self.err(self.last_line + 1, format!("unexpected end of file, expected {what}"))),
        }
    }

    fn finish(&mut self) -> Result<()> {
        match self.inner.next() {
            Some((n, _)) => Err(self.err(n, "unexpected trailing content")),
            None => Ok(()),
        }
    }

    fn numbers(&self, line: usize, text: &str, expected: usize, positive: bool) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(expected);
        for tok in text.split_whitespace() {
            let v: f64 = tok
                .parse()
                .map_err(|_| self.err(line, format!("cannot parse number `{tok}`")))?;
            if !v.is_finite() {
                return Err(self.err(line, format!("value `{tok}` is not finite")));
            }
            if v < 0.0 || (positive && v == 0.0) {
                let bound = if positive { "> 0" } else { ">= 0" };
                return Err(self.err(line, format!("value `{tok}` must be {bound}")));
            }
            out.push(v);
        }
        if out.len() != expected {
            return Err(self.err(
                line,
                format!("expected {expected} numbers, found {}", out.len()),
            ));
        }
        Ok(out)
    }
}

fn parse_header(lines: &mut Lines<'_>, keyword: &str, arity: usize) -> Result<Vec<usize>> {
    let (n, l) = lines.next(&format!("`{keyword}` header"))?;
    let mut toks = l.split_whitespace();
    if toks.next() != Some(keyword) {
        return Err(lines.err(n, format!("expected header `{keyword}`")));
    }
    let dims: Vec<usize> = toks
        .map(|t| t.parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| lines.err(n, "header dimensions must be non-negative integers"))?;
    if dims.len() != arity || dims.contains(&0) {
        return Err(lines.err(n, format!("`{keyword}` header needs {arity} positive dimension(s)")));
    }
    Ok(dims)
}

pub fn parse_matrix(text: &str, source: &str) -> Result<MatrixData> {
    let mut lines = Lines::new(text, source);
    let d = parse_header(&mut lines, "matrix", 2)?;
    let (rows, cols) = (d[0], d[1]);
    let mut data = Vec::with_capacity(rows * cols);
    for _ in 0..rows {
        let (n, l) = lines.next("matrix row")?;
        data.extend(lines.numbers(n, l, cols, false)?);
    }
    lines.finish()?;
    Ok(MatrixData { rows, cols, data })
}

fn parse_vec(text: &str, source: &str, keyword: &str, positive: bool) -> Result<Vec<f64>> {
    let mut lines = Lines::new(text, source);
    let n = parse_header(&mut lines, keyword, 1)?[0];
    let (ln, l) = lines.next("vector entries")?;
    let v = lines.numbers(ln, l, n, positive)?;
    lines.finish()?;
    Ok(v)
}

pub fn parse_vector(text: &str, source: &str) -> Result<Vec<f64>> {
    parse_vec(text, source, "vector", false)
}

pub fn parse_weights(text: &str, source: &str) -> Result<Vec<f64>> {
    parse_vec(text, source, "weights", true)
}

/// Completion file: a matrix block followed by `completion lambda=<value>`.
pub fn parse_completion(text: &str, source: &str) -> Result<(MatrixData, f64)> {
    let (idx, last) = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .last()
        .ok_or_else(|| Error::Parse {
            source_name: source.into(),
            line: 1,
            message: "empty completion file".into(),
        })?;
    let bad = |m: &str| Error::Parse {
        source_name: source.into(),
        line: idx + 1,
        message: m.into(),
    };
    let value = last
        .trim()
        .strip_prefix("completion lambda=")
        .ok_or_else(|| bad("expected `completion lambda=<value>`"))?;
    let lambda: f64 = value.parse().map_err(|_| bad("cannot parse lambda"))?;
    let body: String = text.lines().take(idx).map(|l| format!("{l}\n")).collect();
    Ok((parse_matrix(&body, source)?, lambda))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        source_name: path.display().to_string(),
        line: 0,
        message: e.to_string(),
    })
}

pub fn read_matrix(path: &Path) -> Result<MatrixData> {
    parse_matrix(&read(path)?, &path.display().to_string())
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&read(path)?, &path.display().to_string())
}

pub fn read_weights(path: &Path) -> Result<Vec<f64>> {
    parse_weights(&read(path)?, &path.display().to_string())
}

impl MatrixData {
    /// Binds a square matrix to a space.
    pub fn into_operator(self, space: &WeightedSpace) -> Result<PositiveOperator> {
        if self.rows != self.cols {
            return Err(Error::InvalidInput(format!(
                "operator matrix must be square, got {}x{}",
                self.rows, self.cols
            )));
        }
        PositiveOperator::new(space, self.data)
    }
}

pub fn format_matrix(rows: usize, cols: usize, data: &[f64]) -> String {
    let mut out = format!("matrix {rows} {cols}\n");
    for row in data.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

pub fn format_operator(s: &PositiveOperator) -> String {
    format_matrix(s.dim(), s.dim(), s.entries())
}

pub fn format_vector(values: &[f64]) -> String {
    format_with_header("vector", values)
}

pub fn format_weights(values: &[f64]) -> String {
    format_with_header("weights", values)
}

fn format_with_header(keyword: &str, values: &[f64]) -> String {
    let body: Vec<String> = values.iter().map(|v| fmt_num(*v)).collect();
    format!("{keyword} {}\n{}\n", values.len(), body.join(" "))
}
