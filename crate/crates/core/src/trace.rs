//! Line-delimited JSON form of a [`Trace`]: a header line, one line per
//! stage, and a closing line with the outcome, extraction and report.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::driver::{Extraction, Outcome, Report, StageRecord, Trace, TraceHeader};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Line {
    Header(TraceHeader),
    Stage(StageRecord),
    Final {
        outcome: Outcome,
        extraction: Option<Extraction>,
        report: Option<Report>,
    },
}

pub fn write_trace<W: Write>(trace: &Trace, mut out: W) -> Result<()> {
    let mut put = |line: &Line| -> Result<()> {
        serde_json::to_writer(&mut out, line)?;
        out.write_all(b"\n")?;
        Ok(())
    };
    put(&Line::Header(trace.header.clone()))?;
    for rec in &trace.stages {
        put(&Line::Stage(rec.clone()))?;
    }
    put(&Line::Final {
        outcome: trace.outcome.clone(),
        extraction: trace.extraction.clone(),
        report: trace.report.clone(),
    })
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Trace> {
    let mut header = None;
    let mut stages = Vec::new();
    let mut closing = None;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let parsed: Line = serde_json::from_str(&line).map_err(|e| err(e.to_string()))?;
        match parsed {
            Line::Header(h) if header.is_none() && i == 0 => header = Some(h),
            Line::Stage(s) if header.is_some() && closing.is_none() => stages.push(s),
            Line::Final {
                outcome,
                extraction,
                report,
            } if header.is_some() && closing.is_none() => closing = Some((outcome, extraction, report)),
            _ => return Err(err("record out of order".into())),
        }
    }
    let header = header.ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let (outcome, extraction, report) = closing.ok_or(Error::Parse {
        line: 0,
        msg: "missing final record".into(),
    })?;
    Ok(Trace {
        header,
        stages,
        outcome,
        extraction,
        report,
    })
}

pub fn trace_to_string(trace: &Trace) -> Result<String> {
    let mut buf = Vec::new();
    write_trace(trace, &mut buf)?;
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}
