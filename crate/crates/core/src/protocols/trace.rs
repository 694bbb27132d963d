//! Event log of a protocol run, exported as one JSON object per line.
//!
//! Every line carries `kind`, `parties` and `payload`. The first line is a
//! header naming the protocol and its configuration.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum Event {
    LocalGate {
        party: usize,
        name: String,
        qubits: Vec<u32>,
    },
    LocalMeasure {
        party: usize,
        qubits: Vec<u32>,
        distribution: BTreeMap<String, f64>,
    },
    /// `supplementary` messages carry measurement records rather than protocol bits.
    ClassicalMessage {
        from: usize,
        to: usize,
        bits: u32,
        #[serde(default)]
        supplementary: bool,
    },
    /// A held ebit is instantiated as a Bell pair in the statevector.
    EbitRealize { pair: [usize; 2] },
    EbitConsume { pair: [usize; 2] },
    EbitCreate { pair: [usize; 2] },
    /// A qubit physically carried from one laboratory to another.
    QubitTransfer { from: usize, to: usize, qubit: u32 },
    /// The operation under study, applied as given. Each move carries one
    /// qubit's content from a slot at the first party to a slot at the second.
    Oracle { name: String, moves: Vec<[usize; 2]> },
    /// Classical bits recovered at `to` that originated at `from`.
    Decode { from: usize, to: usize, bits: u32 },
}

impl Event {
    pub fn parties(&self) -> Vec<usize> {
        let mut p = match self {
            Event::LocalGate { party, .. } | Event::LocalMeasure { party, .. } => vec![*party],
            Event::ClassicalMessage { from, to, .. }
            | Event::QubitTransfer { from, to, .. }
            | Event::Decode { from, to, .. } => vec![*from, *to],
            Event::EbitRealize { pair } | Event::EbitConsume { pair } | Event::EbitCreate { pair } => {
                pair.to_vec()
            }
            Event::Oracle { moves, .. } => moves.iter().flatten().copied().collect(),
        };
        p.sort_unstable();
        p.dedup();
        p
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub protocol: String,
    pub n: usize,
    pub seed: u64,
    pub hub: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTrace {
    pub header: TraceHeader,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

#[derive(Serialize)]
struct LineOut<'a, T: Serialize> {
    kind: &'a str,
    parties: Vec<usize>,
    payload: &'a T,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LineIn {
    kind: String,
    #[serde(default)]
    parties: Vec<usize>,
    payload: serde_json::Value,
}

impl ProtocolTrace {
    pub fn export_jsonl(&self) -> String {
        let mut out = String::new();
        let header = LineOut {
            kind: "header",
            parties: (1..=self.header.n).collect(),
            payload: &self.header,
        };
        out.push_str(&serde_json::to_string(&header).expect("header serialises"));
        out.push('\n');
        for e in &self.events {
            // the adjacently tagged form gives `{"kind": .., "payload": ..}`
            let mut v = serde_json::to_value(e).expect("event serialises");
            let obj = v.as_object_mut().expect("tagged enum is an object");
            let kind = obj["kind"].as_str().expect("tag is a string").to_string();
            let payload = obj.remove("payload").unwrap_or(serde_json::Value::Null);
            let line = LineOut {
                kind: &kind,
                parties: e.parties(),
                payload: &payload,
            };
            out.push_str(&serde_json::to_string(&line).expect("event serialises"));
            out.push('\n');
        }
        out
    }

    pub fn parse_jsonl(text: &str) -> Result<Self, TraceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l))
            .filter(|(_, l)| !l.trim().is_empty());
        let (first, header_line) = lines.next().ok_or(TraceError::Empty)?;
        let err = |line: usize, message: String| TraceError::Line { line, message };
        let raw: LineIn = serde_json::from_str(header_line).map_err(|e| err(first, e.to_string()))?;
        if raw.kind != "header" {
            return Err(err(first, format!("expected a header line, found kind {:?}", raw.kind)));
        }
        let header: TraceHeader =
            serde_json::from_value(raw.payload).map_err(|e| err(first, e.to_string()))?;
        let mut events = Vec::new();
        for (line, text) in lines {
            let raw: LineIn = serde_json::from_str(text).map_err(|e| err(line, e.to_string()))?;
            let tagged = serde_json::json!({ "kind": raw.kind, "payload": raw.payload });
            let event: Event = serde_json::from_value(tagged).map_err(|e| err(line, e.to_string()))?;
            if let Some(&p) = event.parties().iter().find(|&&p| p == 0 || p > header.n) {
                return Err(err(line, format!("party {p} outside 1..={}", header.n)));
            }
            if raw.parties != event.parties() {
                return Err(err(
                    line,
                    format!("parties {:?} do not match the payload {:?}", raw.parties, event.parties()),
                ));
            }
            events.push(event);
        }
        Ok(Self { header, events })
    }
}
