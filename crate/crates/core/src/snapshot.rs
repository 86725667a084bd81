//! Binary run snapshots.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! body:
//!   "SAEC"                      magic
//!   u32                         format version (1)
//!   u64                         step
//!   u64                         seed
//!   u64 x 3                     molecule counts (m13, m7, m3)
//!   u64                         config echo length in bytes
//!   [u8]                        config echo (UTF-8 TOML)
//!   f64 x ...                   values, m13 then m7 then m3, molecule-major
//! trailer:
//!   u32 x nblocks               CRC-32 of each 64 KiB block of the body
//!   u64                         body length
//!   u32                         nblocks
//!   "CEAS"                      end marker
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::engine::RunState;
use crate::error::SnapshotError;
use crate::molecule::MoleculeKind;
use crate::population::{KindPool, Population};

pub const MAGIC: &[u8; 4] = b"SAEC";
pub const END_MARKER: &[u8; 4] = b"CEAS";
pub const FORMAT_VERSION: u32 = 1;
pub const BLOCK_SIZE: usize = 64 * 1024;
const HEADER_LEN: usize = 4 + 4 + 8 + 8 + 3 * 8 + 8;

/// A run state plus the effective configuration that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub state: RunState,
    pub config_toml: String,
}

fn body_len(counts: [u64; 3], config_len: u64) -> Option<usize> {
    let mut values: u64 = 0;
    for kind in MoleculeKind::ALL {
        values = values.checked_add(counts[kind.index()].checked_mul(kind.len() as u64)?)?;
    }
    let total = (HEADER_LEN as u64)
        .checked_add(config_len)?
        .checked_add(values.checked_mul(8)?)?;
    usize::try_from(total).ok()
}

fn trailer_len(body: usize) -> usize {
    body.div_ceil(BLOCK_SIZE) * 4 + 8 + 4 + 4
}

impl Snapshot {
    pub fn to_bytes(&self) -> Vec<u8> {
        let pop = &self.state.population;
        let mut out = Vec::with_capacity(HEADER_LEN + self.config_toml.len() + pop.total() * 13 * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.state.step.to_le_bytes());
        out.extend_from_slice(&self.state.seed.to_le_bytes());
        for n in pop.counts() {
            out.extend_from_slice(&(n as u64).to_le_bytes());
        }
        out.extend_from_slice(&(self.config_toml.len() as u64).to_le_bytes());
        out.extend_from_slice(self.config_toml.as_bytes());
        for kind in MoleculeKind::ALL {
            for v in pop.pool(kind).as_flat() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        let body = out.len();
        let crcs: Vec<u32> = out.chunks(BLOCK_SIZE).map(crc32fast::hash).collect();
        for c in &crcs {
            out.extend_from_slice(&c.to_le_bytes());
        }
        out.extend_from_slice(&(body as u64).to_le_bytes());
        out.extend_from_slice(&(crcs.len() as u32).to_le_bytes());
        out.extend_from_slice(END_MARKER);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SnapshotError> {
        if bytes.len() < 8 {
            return Err(SnapshotError::Truncated {
                needed: HEADER_LEN,
                actual: bytes.len(),
            });
        }
        if &bytes[..4] != MAGIC {
            return Err(SnapshotError::BadMagic);
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(SnapshotError::Version {
                found: version,
                supported: FORMAT_VERSION,
            });
        }
        if bytes.len() < HEADER_LEN + 16 || &bytes[bytes.len() - 4..] != END_MARKER {
            return Err(truncated(bytes));
        }

        let n = bytes.len();
        let nblocks = u32::from_le_bytes(bytes[n - 8..n - 4].try_into().unwrap()) as usize;
        let body = u64::from_le_bytes(bytes[n - 16..n - 8].try_into().unwrap()) as usize;
        if body > n || body < HEADER_LEN || nblocks != body.div_ceil(BLOCK_SIZE) || body + trailer_len(body) != n {
            return Err(SnapshotError::Malformed("inconsistent trailer".into()));
        }
        let crc_bytes = &bytes[body..body + 4 * nblocks];
        for (b, (chunk, stored)) in bytes[..body]
            .chunks(BLOCK_SIZE)
            .zip(crc_bytes.chunks_exact(4))
            .enumerate()
        {
            if crc32fast::hash(chunk) != u32::from_le_bytes(stored.try_into().unwrap()) {
                return Err(SnapshotError::Checksum {
                    start: b * BLOCK_SIZE,
                    end: b * BLOCK_SIZE + chunk.len(),
                });
            }
        }

        let mut r = Reader { buf: &bytes[..body], pos: 8 };
        let step = r.u64();
        let seed = r.u64();
        let counts = [r.u64(), r.u64(), r.u64()];
        let config_len = r.u64();
        if body_len(counts, config_len) != Some(body) {
            return Err(SnapshotError::Malformed("header lengths disagree with body".into()));
        }
        let config_toml = std::str::from_utf8(r.take(config_len as usize))
            .map_err(|_| SnapshotError::Malformed("config echo is not UTF-8".into()))?
            .to_string();
        let mut pools = Vec::with_capacity(3);
        for kind in MoleculeKind::ALL {
            let len = counts[kind.index()] as usize * kind.len();
            let data: Vec<f64> = r
                .take(len * 8)
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect();
            pools.push(
                KindPool::from_flat(kind, data).map_err(|e| SnapshotError::Malformed(e.to_string()))?,
            );
        }
        let m3 = pools.pop().unwrap();
        let m7 = pools.pop().unwrap();
        let m13 = pools.pop().unwrap();
        let population =
            Population::new(m13, m7, m3).map_err(|e| SnapshotError::Malformed(e.to_string()))?;
        Ok(Snapshot {
            state: RunState {
                step,
                seed,
                population,
            },
            config_toml,
        })
    }

    /// Writes atomically: a temporary sibling file is renamed into place.
    pub fn write(&self, path: &Path) -> Result<(), SnapshotError> {
        let io = |source| SnapshotError::Io {
            path: path.to_path_buf(),
            source,
        };
        let tmp = path.with_extension("tmp");
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            f.write_all(&self.to_bytes()).map_err(io)?;
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, path).map_err(io)
    }

    pub fn read(path: &Path) -> Result<Self, SnapshotError> {
        let bytes = fs::read(path).map_err(|source| SnapshotError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_bytes(&bytes)
    }
}

fn truncated(bytes: &[u8]) -> SnapshotError {
    let needed = if bytes.len() >= HEADER_LEN {
        let mut r = Reader { buf: bytes, pos: 24 };
        let counts = [r.u64(), r.u64(), r.u64()];
        let cfg = r.u64();
        body_len(counts, cfg).map(|b| b + trailer_len(b))
    } else {
        None
    };
    SnapshotError::Truncated {
        needed: needed.unwrap_or(HEADER_LEN + 16),
        actual: bytes.len(),
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> &'a [u8] {
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        s
    }

    fn u64(&mut self) -> u64 {
        u64::from_le_bytes(self.take(8).try_into().unwrap())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::init_population;

    fn sample() -> Snapshot {
        Snapshot {
            state: RunState {
                step: 42,
                seed: 7,
                population: init_population([1000, 1000, 1000], 7).unwrap(),
            },
            config_toml: "seed = 7\nsteps = 42\n".into(),
        }
    }

    #[test]
    fn layout_prefix() {
        let bytes = sample().to_bytes();
        assert_eq!(&bytes[..4], b"SAEC");
        assert_eq!(u32::from_le_bytes(bytes[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(bytes[8..16].try_into().unwrap()), 42);
        assert_eq!(&bytes[bytes.len() - 4..], b"CEAS");
    }

    #[test]
    fn roundtrip_is_bitwise() {
        let s = sample();
        let back = Snapshot::from_bytes(&s.to_bytes()).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_bytes(), s.to_bytes());
    }

    #[test]
    fn corruption_names_block() {
        let mut bytes = sample().to_bytes();
        let at = BLOCK_SIZE + 100;
        bytes[at] ^= 0x10;
        match Snapshot::from_bytes(&bytes).unwrap_err() {
            SnapshotError::Checksum { start, end } => {
                assert_eq!(start, BLOCK_SIZE);
                assert!(end > at);
            }
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn newer_version_rejected() {
        let mut bytes = sample().to_bytes();
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert!(matches!(
            Snapshot::from_bytes(&bytes),
            Err(SnapshotError::Version { found: 2, supported: 1 })
        ));
    }

    #[test]
    fn truncation_detected() {
        let bytes = sample().to_bytes();
        let full = bytes.len();
        match Snapshot::from_bytes(&bytes[..full - 100]).unwrap_err() {
            SnapshotError::Truncated { needed, actual } => {
                assert_eq!(needed, full);
                assert_eq!(actual, full - 100);
            }
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(
            Snapshot::from_bytes(&bytes[..3]),
            Err(SnapshotError::Truncated { .. })
        ));
        assert!(matches!(Snapshot::from_bytes(b"NOPE0000"), Err(SnapshotError::BadMagic)));
    }
}
