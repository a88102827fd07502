use std::io::Write;

use crate::adaptive::{Diagnostics, StepRecord};
use crate::error::{Error, Result};
use crate::scalar::{self, Rational};

const HEADER: [&str; 6] = ["i", "t_start", "delta_t", "beta", "omega", "y_norm_after"];

/// One CSV data row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRow {
    pub index: usize,
    pub t_start: Rational,
    pub delta_t: Rational,
    pub beta: Rational,
    pub omega: usize,
    pub y_norm_after: Rational,
}

impl From<&StepRecord> for TraceRow {
    fn from(s: &StepRecord) -> Self {
        TraceRow {
            index: s.index,
            t_start: s.t_start.clone(),
            delta_t: s.delta_t.clone(),
            beta: s.beta.clone(),
            omega: s.omega,
            y_norm_after: scalar::infnorm(&s.y_after).expect("state is nonempty"),
        }
    }
}

/// Contents of the trailing comment line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceSummary {
    pub steps: usize,
    pub sum_beta: Rational,
    pub max_rsize: u64,
    pub final_hint: Rational,
}

/// Writes the step table followed by a `# steps=…` summary line.
pub fn write_trace<W: Write>(
    trace: &[StepRecord],
    diagnostics: &Diagnostics,
    final_hint: &Rational,
    sink: W,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(HEADER)?;
    for s in trace {
        let row = TraceRow::from(s);
        w.write_record([
            row.index.to_string(),
            row.t_start.to_string(),
            row.delta_t.to_string(),
            row.beta.to_string(),
            row.omega.to_string(),
            row.y_norm_after.to_string(),
        ])?;
    }
    let mut sink = w.into_inner().map_err(|e| e.into_error())?;
    writeln!(
        sink,
        "# steps={}, sum_beta={}, max_rsize={}, final_hint={}",
        diagnostics.steps, diagnostics.sum_beta, diagnostics.max_rsize, final_hint
    )?;
    sink.flush()
}

/// Parses text produced by [`write_trace`].
pub fn read_trace(text: &str) -> Result<(Vec<TraceRow>, Option<TraceSummary>)> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| Error::parse("line 1", e.to_string()))?;
    if header.iter().ne(HEADER) {
        return Err(Error::parse("line 1", format!("unexpected header {header:?}")));
    }
    let mut rows = Vec::new();
    for (n, rec) in reader.records().enumerate() {
        let loc = format!("row {}", n + 1);
        let rec = rec.map_err(|e| Error::parse(&loc, e.to_string()))?;
        let field = |k: usize| rec.get(k).unwrap_or("");
        let rat = |k: usize| {
            scalar::parse_rational(field(k)).map_err(|e| Error::parse(format!("{loc}.{}", HEADER[k]), e.to_string()))
        };
        let nat = |k: usize| {
            field(k)
                .parse::<usize>()
                .map_err(|e| Error::parse(format!("{loc}.{}", HEADER[k]), e.to_string()))
        };
        rows.push(TraceRow {
            index: nat(0)?,
            t_start: rat(1)?,
            delta_t: rat(2)?,
            beta: rat(3)?,
            omega: nat(4)?,
            y_norm_after: rat(5)?,
        });
    }
    let summary = text
        .lines()
        .rev()
        .find_map(|l| l.strip_prefix("# "))
        .map(parse_summary)
        .transpose()?;
    Ok((rows, summary))
}

fn parse_summary(line: &str) -> Result<TraceSummary> {
    let mut steps = None;
    let mut sum_beta = None;
    let mut max_rsize = None;
    let mut final_hint = None;
    for part in line.split(", ") {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::parse("summary", format!("malformed entry {part:?}")))?;
        let bad = |e: std::num::ParseIntError| Error::parse(format!("summary.{key}"), e.to_string());
        match key {
            "steps" => steps = Some(value.parse().map_err(bad)?),
            "sum_beta" => sum_beta = Some(scalar::parse_rational(value)?),
            "max_rsize" => max_rsize = Some(value.parse().map_err(bad)?),
            "final_hint" => final_hint = Some(scalar::parse_rational(value)?),
            _ => return Err(Error::parse("summary", format!("unknown key {key:?}"))),
        }
    }
    let missing = |k: &str| Error::parse("summary", format!("missing {k}"));
    Ok(TraceSummary {
        steps: steps.ok_or_else(|| missing("steps"))?,
        sum_beta: sum_beta.ok_or_else(|| missing("sum_beta"))?,
        max_rsize: max_rsize.ok_or_else(|| missing("max_rsize"))?,
        final_hint: final_hint.ok_or_else(|| missing("final_hint"))?,
    })
}
