//! Symbolic photon ledger: renders a traced round the way the protocol is
//! usually drawn, e.g. `BA(X)` for a legitimate photon after both forward
//! rotations or `B⁻¹A⁻¹(E)` for a photon Eve injected on the second pass.

use std::fmt::Write as _;

use super::round::RoundTranscript;
use crate::channel::Origin;

/// Row captions, one per traced step.
pub const ROW_NAMES: [&str; 7] = [
    "Alice sends",
    "Photons after Eve's first siphoning",
    "Bob sends back",
    "Photons after Eve's second siphoning",
    "Alice sends to Bob",
    "Photons after Eve's third siphoning",
    "Photons obtained by Bob",
];

#[derive(Clone, Copy, PartialEq, Eq)]
enum Party {
    A,
    B,
}

/// The protocol's rotations in application order: A, B, A⁻¹, B⁻¹.
const SCHEDULE: [(Party, i8); 4] = [(Party::A, 1), (Party::B, 1), (Party::A, -1), (Party::B, -1)];

/// Number of scheduled rotations already applied at each traced row.
const OPS_AT_ROW: [usize; 7] = [1, 1, 2, 2, 3, 3, 4];

/// Symbolic form of a photon with the given origin at `row`.
pub fn label(origin: Origin, row: usize) -> String {
    let (start, base) = match origin {
        Origin::Legitimate => (0, "X"),
        Origin::EveInjected { pass } => (pass as usize, "E"),
    };
    let end = OPS_AT_ROW[row.min(OPS_AT_ROW.len() - 1)];
    let mut ops: Vec<(Party, i8)> = Vec::new();
    for &(party, exp) in SCHEDULE.get(start..end).unwrap_or(&[]) {
        // Rotations commute, so an inverse cancels wherever its partner sits.
        match ops.iter().position(|&(p, e)| p == party && e == -exp) {
            Some(i) => {
                ops.remove(i);
            }
            None => ops.push((party, exp)),
        }
    }
    if ops.is_empty() {
        return base.to_string();
    }
    let mut s = String::new();
    for &(party, exp) in ops.iter().rev() {
        s.push(if party == Party::A { 'A' } else { 'B' });
        if exp < 0 {
            s.push_str("⁻¹");
        }
    }
    format!("{s}({base})")
}

/// Labels for every photon in every traced row.
pub fn ledger_rows(transcript: &RoundTranscript) -> Option<Vec<Vec<String>>> {
    let trace = transcript.trace.as_ref()?;
    Some(
        trace
            .iter()
            .enumerate()
            .map(|(row, origins)| origins.iter().map(|&o| label(o, row)).collect())
            .collect(),
    )
}

/// Plain-text table of a traced round followed by Bob's outcomes and verdict.
pub fn render(transcript: &RoundTranscript) -> String {
    let rows = ledger_rows(transcript).unwrap_or_default();
    let name_w = ROW_NAMES.iter().map(|n| n.chars().count()).max().unwrap_or(0);
    let cell_w = rows
        .iter()
        .flatten()
        .map(|c| c.chars().count())
        .max()
        .unwrap_or(1)
        .max(1);
    let pad = |s: &str, w: usize| format!("{s}{}", " ".repeat(w.saturating_sub(s.chars().count())));

    let mut out = String::new();
    for (name, cells) in ROW_NAMES.iter().zip(&rows) {
        let line: Vec<String> = cells.iter().map(|c| pad(c, cell_w)).collect();
        let _ = writeln!(out, "{}  {}", pad(name, name_w), line.join("  ").trim_end());
    }
    let outcomes: Vec<String> = transcript
        .bob_outcomes
        .iter()
        .map(|b| pad(&b.to_string(), cell_w))
        .collect();
    let _ = writeln!(
        out,
        "{}  {}",
        pad("Bob's measured bits", name_w),
        outcomes.join("  ").trim_end()
    );
    let _ = writeln!(out);
    let legit = transcript.final_beam.iter().filter(|p| p.is_legitimate()).count();
    let _ = writeln!(
        out,
        "X = {}, legitimate photons = {}, contaminated photons = {}",
        transcript.bit,
        legit,
        transcript.final_beam.len() - legit
    );
    let verdict = if transcript.alignment_alarm {
        "ALARM (photons not aligned)"
    } else {
        "pass (all photons aligned)"
    };
    let _ = writeln!(out, "Bob's alignment test: {verdict}");
    out
}
