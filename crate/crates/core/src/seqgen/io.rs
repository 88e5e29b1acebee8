use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{DegreeModelParams, ExtendedBiDegreeSequence};
use crate::error::{Error, Result};
use crate::fmt_f64;

/// JSON sidecar written next to a sequence CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceMeta {
    pub n: usize,
    pub total_stubs: u64,
    pub params: Option<DegreeModelParams>,
    pub master_seed: Option<u64>,
    pub rounds: Option<u64>,
}

/// Writes `node_id,N,D,C,Q`; reals use shortest round-trip formatting.
pub fn write_sequence_csv<W: Write>(seq: &ExtendedBiDegreeSequence, out: W) -> Result<()> {
    let mut w = BufWriter::new(out);
    writeln!(w, "node_id,N,D,C,Q")?;
    for i in 0..seq.len() {
        writeln!(
            w,
            "{i},{},{},{},{}",
            seq.in_degrees()[i],
            seq.out_degrees()[i],
            fmt_f64(seq.weights()[i]),
            fmt_f64(seq.personalization()[i])
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sequence_csv(path: &Path) -> Result<ExtendedBiDegreeSequence> {
    let mut rdr = csv::Reader::from_reader(File::open(path)?);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["node_id", "N", "D", "C", "Q"] {
        return Err(Error::Parse(format!("unexpected sequence header {headers:?}")));
    }
    let (mut ins, mut outs, mut cs, mut qs) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse(format!("row {row}: missing column {i}")));
        let id: usize = field(0)?.parse().map_err(|e| Error::Parse(format!("row {row}: {e}")))?;
        if id != row {
            return Err(Error::Parse(format!("row {row}: node ids must be 0..n in order, got {id}")));
        }
        let int = |s: &str| s.parse::<u64>().map_err(|e| Error::Parse(format!("row {row}: {e}")));
        let real = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("row {row}: {e}")));
        ins.push(int(field(1)?)?);
        outs.push(int(field(2)?)?);
        cs.push(real(field(3)?)?);
        qs.push(real(field(4)?)?);
    }
    ExtendedBiDegreeSequence::new(ins, outs, cs, qs)
}
