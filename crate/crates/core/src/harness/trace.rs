//! JSON Lines traces: one object per round, tagged with the trial.
//!
//! Each line holds `trial`, `round`, `circuits`, `beeping_circuits` and an
//! `amoebots` array with `coord`, `received` and `sent` (bit masks over
//! local pins), `wires` (pairs of local pins) and `memory` (the serialized
//! protocol state after the round).

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::engine::RoundTrace;
use crate::error::Result;

#[derive(Serialize, Deserialize)]
struct Line<T> {
    trial: usize,
    #[serde(flatten)]
    round: T,
}

pub fn write_trace<W: Write>(out: &mut W, trial: usize, rounds: &[RoundTrace]) -> Result<()> {
    for r in rounds {
        serde_json::to_writer(&mut *out, &Line { trial, round: r })?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace<R: BufRead>(input: R) -> Result<Vec<(usize, RoundTrace)>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let l: Line<RoundTrace> = serde_json::from_str(&line)?;
        out.push((l.trial, l.round));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Simulation, Structure};
    use crate::harness::generators::gen_random_connected;
    use crate::primitives::SyncBarrier;

    #[test]
    fn round_trip() {
        let s = Structure::uniform(&gen_random_connected(8, 1), 2, 0).unwrap();
        let p = SyncBarrier { period: 3 };
        let mut sim = Simulation::new(s, &p).record_trace(true);
        let trace = sim.run(20).unwrap().trace.unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, 7, &trace).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), trace.len());
        let back = read_trace(&buf[..]).unwrap();
        assert!(back.iter().all(|(t, _)| *t == 7));
        let again: Vec<RoundTrace> = back.into_iter().map(|(_, r)| r).collect();
        assert_eq!(serde_json::to_string(&again).unwrap(), serde_json::to_string(&trace).unwrap());
    }
}
