//! JSON Lines trace files: one header record, then one record per sample.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{EvaderSpec, GameConfig, Moment, Sample, Trace};
use crate::error::{Error, Result};
use crate::metric::{MetricSpace, SpaceDescriptor};
use crate::spaces::make_space;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceHeader {
    pub space: SpaceDescriptor,
    pub config: GameConfig,
    pub evader: EvaderSpec,
    pub seed: u64,
    pub config_hash: String,
}

#[derive(Serialize)]
struct HashInput<'a> {
    space: &'a SpaceDescriptor,
    config: &'a GameConfig,
    evader: &'a EvaderSpec,
}

/// SHA-256 (hex) of the canonical JSON of space, game config, and evader.
pub fn config_hash(space: &SpaceDescriptor, config: &GameConfig, evader: &EvaderSpec) -> String {
    json_hash(&HashInput { space, config, evader })
}

/// SHA-256 (hex) of the compact JSON encoding of `value`.
pub fn json_hash<T: Serialize + ?Sized>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("value serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn write_trace_jsonl<W: Write>(trace: &Trace, mut out: W) -> Result<()> {
    let header = TraceHeader {
        space: trace.space.clone(),
        config: trace.config.clone(),
        evader: trace.evader.clone(),
        seed: trace.seed,
        config_hash: config_hash(&trace.space, &trace.config, &trace.evader),
    };
    serde_json::to_writer(&mut out, &header)?;
    out.write_all(b"\n")?;
    for s in &trace.samples {
        serde_json::to_writer(&mut out, s)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    t: f64,
    #[serde(rename = "L")]
    lion: Vec<f64>,
    #[serde(rename = "M")]
    man: Vec<f64>,
    d: f64,
}

/// Read a trace written by [`write_trace_jsonl`]. Moments are recovered as
/// every `substeps`-th sample.
pub fn read_trace_jsonl<R: BufRead>(input: R) -> Result<Trace> {
    let mut lines = input.lines().enumerate();
    let header_line = loop {
        match lines.next() {
            Some((_, line)) => {
                let line = line?;
                if !line.trim().is_empty() {
                    break line;
                }
            }
            None => return Err(Error::EmptyTrace),
        }
    };
    let header: TraceHeader = serde_json::from_str(&header_line)
        .map_err(|e| Error::TraceFormat(format!("header: {e}")))?;
    let expected = config_hash(&header.space, &header.config, &header.evader);
    if header.config_hash != expected {
        return Err(Error::TraceFormat("header config_hash does not match its contents".into()));
    }
    header.config.validate()?;
    let space = make_space(&header.space)?;
    let mut samples = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r: Record = serde_json::from_str(&line)
            .map_err(|e| Error::TraceFormat(format!("line {}: {e}", idx + 1)))?;
        samples.push(Sample { t: r.t, lion: space.point(r.lion)?, man: space.point(r.man)?, d: r.d });
    }
    if samples.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let n = header.config.substeps as usize;
    let moments = samples
        .iter()
        .step_by(n)
        .map(|s| Moment { t: s.t, lion: s.lion.clone(), man: s.man.clone() })
        .collect();
    Ok(Trace {
        space: header.space,
        config: header.config,
        evader: header.evader,
        seed: header.seed,
        moments,
        samples,
    })
}
