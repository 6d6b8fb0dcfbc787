//! Binary stream dump.
//!
//! Little-endian layout:
//!
//! ```text
//! "QISTRM1"           7 bytes
//! n                   u64   shots per stream
//! seed                u64
//! flags               u64   bit 0: truth known, bit 1: object present
//! idler               ceil(n/64) x u64
//! signal              ceil(n/64) x u64
//! ```

use std::io::{Read, Write};

use super::bits::BitStream;
use super::streams::{ClickStreams, Target};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 7] = b"QISTRM1";

pub const FLAG_TRUTH_KNOWN: u64 = 1;
pub const FLAG_OBJECT_PRESENT: u64 = 1 << 1;

fn io_err(e: std::io::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_streams<W: Write>(mut w: W, streams: &ClickStreams) -> Result<()> {
    let flags = FLAG_TRUTH_KNOWN
        | match streams.target {
            Target::Absent => 0,
            Target::Present { .. } => FLAG_OBJECT_PRESENT,
        };
    w.write_all(MAGIC).map_err(io_err)?;
    for v in [streams.len(), streams.seed, flags] {
        w.write_all(&v.to_le_bytes()).map_err(io_err)?;
    }
    for bits in [&streams.idler, &streams.signal] {
        for word in bits.words() {
            w.write_all(&word.to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

/// Header fields and payload of a dump.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamDump {
    pub seed: u64,
    pub flags: u64,
    pub idler: BitStream,
    pub signal: BitStream,
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(io_err)?;
    Ok(u64::from_le_bytes(buf))
}

pub fn read_streams<R: Read>(mut r: R) -> Result<StreamDump> {
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let n = read_u64(&mut r)?;
    let seed = read_u64(&mut r)?;
    let flags = read_u64(&mut r)?;
    let words = n.div_ceil(64) as usize;
    let read_bits = |r: &mut R| -> Result<BitStream> {
        let v = (0..words).map(|_| read_u64(r)).collect::<Result<Vec<_>>>()?;
        BitStream::from_words(v, n).ok_or_else(|| Error::Format("word count mismatch".into()))
    };
    let idler = read_bits(&mut r)?;
    let signal = read_bits(&mut r)?;
    Ok(StreamDump {
        seed,
        flags,
        idler,
        signal,
    })
}
