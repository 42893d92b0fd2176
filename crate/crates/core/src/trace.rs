//! Plain-text trace files: a header line describing the item kind and count,
//! then one item per line.  Reals and point coordinates are written with
//! Rust's shortest round-trip float formatting, so reading a trace back
//! reproduces the original values exactly.

use std::fmt;
use std::fs;
use std::io::{self, Write as _};
use std::path::Path;

use crate::placement::{Item, ItemKind};

/// A generated input stream together with where it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSequence {
    pub kind: ItemKind,
    pub items: Vec<Item>,
    /// Generator name, e.g. `iid-uniform`.
    pub source: String,
    /// Seed used, if the generator was randomized.
    pub seed: Option<u64>,
}

impl InputSequence {
    pub fn new(kind: ItemKind, items: Vec<Item>, source: &str, seed: Option<u64>) -> Self {
        debug_assert!(items.iter().all(|it| it.kind() == kind));
        InputSequence {
            kind,
            items,
            source: source.to_string(),
            seed,
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

#[derive(Debug)]
pub enum TraceError {
    Io(io::Error),
    /// Malformed header or item line; carries the 1-based line number.
    Parse { line: usize, message: String },
}

impl fmt::Display for TraceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceError::Io(e) => write!(f, "trace io error: {e}"),
            TraceError::Parse { line, message } => {
                write!(f, "trace parse error at line {line}: {message}")
            }
        }
    }
}

impl std::error::Error for TraceError {}

impl From<io::Error> for TraceError {
    fn from(e: io::Error) -> Self {
        TraceError::Io(e)
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> TraceError {
    TraceError::Parse {
        line,
        message: message.into(),
    }
}

/// Serialize a sequence to the trace text format.
pub fn format_trace(seq: &InputSequence) -> String {
    let mut out = String::new();
    let kind = match seq.kind {
        ItemKind::Real => "real".to_string(),
        ItemKind::Point(d) => format!("point:{d}"),
        ItemKind::Label => "label".to_string(),
    };
    out.push_str(&format!("kind={kind} n={}\n", seq.items.len()));
    for item in &seq.items {
        match item {
            Item::Real(x) => out.push_str(&format!("{x}\n")),
            Item::Point(p) => {
                let coords: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
                out.push_str(&coords.join(","));
                out.push('\n');
            }
            Item::Label(l) => out.push_str(&format!("{l}\n")),
        }
    }
    out
}

pub fn write_trace(path: &Path, seq: &InputSequence) -> Result<(), TraceError> {
    let mut file = fs::File::create(path)?;
    file.write_all(format_trace(seq).as_bytes())?;
    Ok(())
}

/// Parse the trace text format.  The sequence's source is the file stem and
/// its seed is unknown.
pub fn parse_trace(text: &str) -> Result<InputSequence, TraceError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty trace file"))?;
    let mut kind = None;
    let mut count = None;
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("malformed header field `{field}`")))?;
        match key {
            "kind" => {
                kind = Some(match value {
                    "real" => ItemKind::Real,
                    "label" => ItemKind::Label,
                    other => match other.strip_prefix("point:") {
                        Some(d) => ItemKind::Point(d.parse().map_err(|_| {
                            parse_err(1, format!("bad point dimension `{d}`"))
                        })?),
                        None => return Err(parse_err(1, format!("unknown kind `{other}`"))),
                    },
                });
            }
            "n" => {
                count = Some(
                    value
                        .parse::<usize>()
                        .map_err(|_| parse_err(1, format!("bad count `{value}`")))?,
                );
            }
            other => return Err(parse_err(1, format!("unknown header key `{other}`"))),
        }
    }
    let kind = kind.ok_or_else(|| parse_err(1, "header missing kind"))?;
    let count = count.ok_or_else(|| parse_err(1, "header missing n"))?;

    let mut items = Vec::with_capacity(count);
    for (idx, line) in lines {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let item = match kind {
            ItemKind::Real => Item::Real(
                line.parse::<f64>()
                    .map_err(|_| parse_err(lineno, format!("bad real `{line}`")))?,
            ),
            ItemKind::Label => Item::Label(
                line.parse::<u64>()
                    .map_err(|_| parse_err(lineno, format!("bad label `{line}`")))?,
            ),
            ItemKind::Point(d) => {
                let coords: Result<Vec<f64>, _> =
                    line.split(',').map(|c| c.trim().parse::<f64>()).collect();
                let coords = coords
                    .map_err(|_| parse_err(lineno, format!("bad point `{line}`")))?;
                if coords.len() != d {
                    return Err(parse_err(
                        lineno,
                        format!("expected {d} coordinates, got {}", coords.len()),
                    ));
                }
                Item::Point(coords)
            }
        };
        items.push(item);
    }
    if items.len() != count {
        return Err(parse_err(
            1,
            format!("header declared n={count} but found {} items", items.len()),
        ));
    }
    Ok(InputSequence::new(kind, items, "trace", None))
}

pub fn read_trace(path: &Path) -> Result<InputSequence, TraceError> {
    let text = fs::read_to_string(path)?;
    let mut seq = parse_trace(&text)?;
    if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
        seq.source = stem.to_string();
    }
    Ok(seq)
}
