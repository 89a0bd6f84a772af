//! Line-delimited trace files.
//!
//! A trace file is UTF-8 JSON records, one per line: a header carrying the
//! parameters and initial configuration, one record per cycle, and a final
//! record with the terminal outcome. All scalars appear in their exact `p/q`
//! text form. Writing is deterministic, so identical runs produce
//! byte-identical files.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{Terminal, Trace, TraceEvent};
use crate::state::{Configuration, SimulationParams};

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum TraceRecord {
    Header {
        params: SimulationParams,
        initial: Configuration,
    },
    Event(TraceEvent),
    Terminal(Terminal),
}

#[derive(Debug, thiserror::Error)]
pub enum TraceIoError {
    #[error("trace io: {0}")]
    Io(#[from] io::Error),
    #[error("trace line {line}: {source}")]
    Parse {
        line: usize,
        source: serde_json::Error,
    },
    #[error("trace file is malformed: {0}")]
    Structure(String),
}

pub fn write_trace<W: Write>(trace: &Trace, mut writer: W) -> Result<(), TraceIoError> {
    let header = TraceRecord::Header {
        params: trace.params.clone(),
        initial: trace.initial.clone(),
    };
    serde_json::to_writer(&mut writer, &header)
        .map_err(|e| TraceIoError::Structure(e.to_string()))?;
    writer.write_all(b"\n")?;
    for event in &trace.events {
        serde_json::to_writer(&mut writer, &TraceRecord::Event(event.clone()))
            .map_err(|e| TraceIoError::Structure(e.to_string()))?;
        writer.write_all(b"\n")?;
    }
    serde_json::to_writer(&mut writer, &TraceRecord::Terminal(trace.terminal.clone()))
        .map_err(|e| TraceIoError::Structure(e.to_string()))?;
    writer.write_all(b"\n")?;
    Ok(())
}

pub fn trace_to_string(trace: &Trace) -> String {
    let mut buffer = Vec::new();
    write_trace(trace, &mut buffer).expect("writing to a Vec cannot fail");
    String::from_utf8(buffer).expect("trace records are UTF-8")
}

pub fn read_trace<R: BufRead>(reader: R) -> Result<Trace, TraceIoError> {
    let mut header: Option<(SimulationParams, Configuration)> = None;
    let mut events = Vec::new();
    let mut terminal: Option<Terminal> = None;
    for (index, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let record: TraceRecord =
            serde_json::from_str(&line).map_err(|source| TraceIoError::Parse {
                line: index + 1,
                source,
            })?;
        match record {
            TraceRecord::Header { params, initial } => {
                if header.is_some() {
                    return Err(TraceIoError::Structure("duplicate header".into()));
                }
                header = Some((params, initial));
            }
            TraceRecord::Event(event) => {
                if header.is_none() {
                    return Err(TraceIoError::Structure("event before header".into()));
                }
                if terminal.is_some() {
                    return Err(TraceIoError::Structure("event after terminal".into()));
                }
                events.push(event);
            }
            TraceRecord::Terminal(t) => {
                if terminal.is_some() {
                    return Err(TraceIoError::Structure("duplicate terminal".into()));
                }
                terminal = Some(t);
            }
        }
    }
    let (params, initial) =
        header.ok_or_else(|| TraceIoError::Structure("missing header".into()))?;
    let terminal =
        terminal.ok_or_else(|| TraceIoError::Structure("missing terminal record".into()))?;
    Ok(Trace {
        params,
        initial,
        events,
        terminal,
    })
}

pub fn trace_from_str(text: &str) -> Result<Trace, TraceIoError> {
    read_trace(text.as_bytes())
}
