//! Instance file parsers: the standard format and the Taillard layout.

use std::str::FromStr;

use thiserror::Error;

use crate::model::{Instance, ModelError};

/// Input layout of an instance file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// `n m` header, then one line per job of `(machine, duration)` pairs,
    /// machines 0-indexed. `#` starts a comment line.
    Std,
    /// `n m` header (extra header fields ignored), then an n×m duration
    /// matrix followed by an n×m machine matrix, machines 1-indexed.
    Ta,
    /// Try [`Format::Std`], fall back to [`Format::Ta`].
    Auto,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "std" => Ok(Format::Std),
            "ta" => Ok(Format::Ta),
            "auto" => Ok(Format::Auto),
            other => Err(format!(
                "unknown format '{other}' (expected std, ta or auto)"
            )),
        }
    }
}

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing header line 'n m'")]
    MissingHeader,
    #[error("line {line}: instance shape {n}x{m} must have positive jobs and machines")]
    BadShape { line: usize, n: i64, m: i64 },
    #[error("line {line}, column {column}: expected an integer, found '{token}'")]
    NotAnInteger {
        line: usize,
        column: usize,
        token: String,
    },
    #[error("line {line}, column {column}: negative duration {value}")]
    NegativeDuration {
        line: usize,
        column: usize,
        value: i64,
    },
    #[error("line {line}, column {column}: machine index {machine} not in 0..{n_machines}")]
    MachineRangeStd {
        line: usize,
        column: usize,
        machine: i64,
        n_machines: usize,
    },
    #[error("line {line}, column {column}: machine index {machine} not in 1..={n_machines}")]
    MachineRangeTa {
        line: usize,
        column: usize,
        machine: i64,
        n_machines: usize,
    },
    #[error("line {line}: expected {expected} integers, found {found}")]
    WrongCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("file ends after {found} of {expected} job lines")]
    Truncated { expected: usize, found: usize },
    #[error("expected {expected} matrix entries (durations, then machines), found {found}")]
    MatrixShape { expected: usize, found: usize },
    #[error("line {line}: unexpected trailing content")]
    Trailing { line: usize },
    #[error("not standard format ({std}); not Taillard format ({ta})")]
    AutoFailed {
        std: Box<ParseError>,
        ta: Box<ParseError>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Lines that carry data: 1-based line numbers, blanks and `#` comments
/// skipped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim_start();
            !t.is_empty() && !t.starts_with('#')
        })
}

/// Whitespace-separated tokens of a line with their 1-based byte columns.
fn tokens(line: &str) -> Vec<(usize, &str)> {
    let bytes = line.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        out.push((start + 1, &line[start..i]));
    }
    out
}

fn int(line: usize, column: usize, token: &str) -> Result<i64, ParseError> {
    token.parse().map_err(|_| ParseError::NotAnInteger {
        line,
        column,
        token: token.to_string(),
    })
}

fn header(line_no: usize, line: &str, exact: bool) -> Result<(usize, usize), ParseError> {
    let toks = tokens(line);
    if toks.len() < 2 || (exact && toks.len() != 2) {
        return Err(ParseError::WrongCount {
            line: line_no,
            expected: 2,
            found: toks.len(),
        });
    }
    let n = int(line_no, toks[0].0, toks[0].1)?;
    let m = int(line_no, toks[1].0, toks[1].1)?;
    if n <= 0 || m <= 0 {
        return Err(ParseError::BadShape {
            line: line_no,
            n,
            m,
        });
    }
    Ok((n as usize, m as usize))
}

pub fn parse_standard(text: &str) -> Result<Instance, ParseError> {
    let mut lines = content_lines(text);
    let (hline, hdr) = lines.next().ok_or(ParseError::MissingHeader)?;
    let (n, m) = header(hline, hdr, true)?;

    let mut routes = Vec::with_capacity(n);
    for _ in 0..n {
        let Some((line_no, line)) = lines.next() else {
            return Err(ParseError::Truncated {
                expected: n,
                found: routes.len(),
            });
        };
        let toks = tokens(line);
        if toks.len() != 2 * m {
            return Err(ParseError::WrongCount {
                line: line_no,
                expected: 2 * m,
                found: toks.len(),
            });
        }
        let mut route = Vec::with_capacity(m);
        for pair in toks.chunks(2) {
            let (mcol, mtok) = pair[0];
            let (dcol, dtok) = pair[1];
            let machine = int(line_no, mcol, mtok)?;
            if machine < 0 || machine >= m as i64 {
                return Err(ParseError::MachineRangeStd {
                    line: line_no,
                    column: mcol,
                    machine,
                    n_machines: m,
                });
            }
            let duration = int(line_no, dcol, dtok)?;
            if duration < 0 {
                return Err(ParseError::NegativeDuration {
                    line: line_no,
                    column: dcol,
                    value: duration,
                });
            }
            route.push((machine as usize, duration as u64));
        }
        routes.push(route);
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(ParseError::Trailing { line: line_no });
    }
    Ok(Instance::new(n, m, &routes)?)
}

pub fn parse_taillard(text: &str) -> Result<Instance, ParseError> {
    let mut lines = content_lines(text);
    let (hline, hdr) = lines.next().ok_or(ParseError::MissingHeader)?;
    let (n, m) = header(hline, hdr, false)?;

    let mut entries = Vec::with_capacity(2 * n * m);
    for (line_no, line) in lines {
        for (col, tok) in tokens(line) {
            entries.push((line_no, col, int(line_no, col, tok)?));
        }
    }
    if entries.len() != 2 * n * m {
        return Err(ParseError::MatrixShape {
            expected: 2 * n * m,
            found: entries.len(),
        });
    }

    let mut routes = Vec::with_capacity(n);
    for j in 0..n {
        let mut route = Vec::with_capacity(m);
        for k in 0..m {
            let (dline, dcol, duration) = entries[j * m + k];
            if duration < 0 {
                return Err(ParseError::NegativeDuration {
                    line: dline,
                    column: dcol,
                    value: duration,
                });
            }
            let (mline, mcol, machine) = entries[n * m + j * m + k];
            if machine < 1 || machine > m as i64 {
                return Err(ParseError::MachineRangeTa {
                    line: mline,
                    column: mcol,
                    machine,
                    n_machines: m,
                });
            }
            route.push((machine as usize - 1, duration as u64));
        }
        routes.push(route);
    }
    Ok(Instance::new(n, m, &routes)?)
}

/// Parses `text` in the given format; [`Format::Auto`] tries standard first,
/// then Taillard.
pub fn parse(text: &str, format: Format) -> Result<Instance, ParseError> {
    match format {
        Format::Std => parse_standard(text),
        Format::Ta => parse_taillard(text),
        Format::Auto => parse_standard(text).or_else(|std_err| {
            parse_taillard(text).map_err(|ta_err| ParseError::AutoFailed {
                std: Box::new(std_err),
                ta: Box::new(ta_err),
            })
        }),
    }
}
