//! Append-only submission journal.
//!
//! One line per entry: `seq \t sha256 \t json`. The checksum covers
//! `seq \t json`. A final line without its trailing newline was never
//! acknowledged and is discarded on replay; any other damage is corruption.

use std::fs::{File, OpenOptions};
use std::io::{Read, Write};
use std::marker::PhantomData;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const JOURNAL_FILE: &str = "journal.tsv";

fn checksum(seq: u64, json: &str) -> String {
    let mut h = Sha256::new();
    h.update(seq.to_string().as_bytes());
    h.update(b"\t");
    h.update(json.as_bytes());
    hex::encode(h.finalize())
}

/// Decoded journal contents.
#[derive(Debug)]
pub struct Replay<T> {
    pub entries: Vec<(u64, T)>,
    /// Byte length of the acknowledged prefix.
    pub valid_len: u64,
}

pub fn replay<T: DeserializeOwned>(path: &Path) -> Result<Replay<T>> {
    let mut raw = Vec::new();
    match File::open(path) {
        Ok(mut f) => {
            f.read_to_end(&mut raw).map_err(|e| Error::io(path, e))?;
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            return Ok(Replay {
                entries: Vec::new(),
                valid_len: 0,
            })
        }
        Err(e) => return Err(Error::io(path, e)),
    }
    let complete = raw.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    let text = std::str::from_utf8(&raw[..complete]).map_err(|e| Error::StoreCorrupt {
        detail: format!("journal is not UTF-8 near byte {}", e.valid_up_to()),
    })?;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let corrupt = |what: &str| Error::StoreCorrupt {
            detail: format!("journal line {}: {what}", i + 1),
        };
        let mut parts = line.splitn(3, '\t');
        let (Some(seq), Some(sum), Some(json)) = (parts.next(), parts.next(), parts.next()) else {
            return Err(corrupt("malformed"));
        };
        let seq: u64 = seq.parse().map_err(|_| corrupt("bad sequence number"))?;
        let expected = i as u64 + 1;
        if seq != expected {
            return Err(corrupt(&format!("sequence gap: expected {expected}, found {seq}")));
        }
        if checksum(seq, json) != sum {
            return Err(corrupt("checksum mismatch"));
        }
        let value: T = serde_json::from_str(json).map_err(|e| corrupt(&e.to_string()))?;
        entries.push((seq, value));
    }
    Ok(Replay {
        entries,
        valid_len: complete as u64,
    })
}

/// Single-writer handle. Every append is flushed and synced before it
/// returns, which is the acknowledgement point.
#[derive(Debug)]
pub struct Journal<T> {
    path: PathBuf,
    file: File,
    next_seq: u64,
    _entry: PhantomData<fn(T)>,
}

impl<T: Serialize + DeserializeOwned> Journal<T> {
    /// Opens (creating if needed) and replays; a torn tail is truncated.
    pub fn open(dir: &Path) -> Result<(Self, Vec<(u64, T)>)> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let path = dir.join(JOURNAL_FILE);
        let replayed = replay::<T>(&path)?;
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?;
        file.set_len(replayed.valid_len).map_err(|e| Error::io(&path, e))?;
        let next_seq = replayed.entries.len() as u64 + 1;
        Ok((
            Journal {
                path,
                file,
                next_seq,
                _entry: PhantomData,
            },
            replayed.entries,
        ))
    }

    pub fn append(&mut self, entry: &T) -> Result<u64> {
        let json = serde_json::to_string(entry).map_err(|e| Error::Validation { detail: e.to_string() })?;
        let seq = self.next_seq;
        let line = format!("{seq}\t{}\t{json}\n", checksum(seq, &json));
        self.file
            .write_all(line.as_bytes())
            .and_then(|_| self.file.sync_data())
            .map_err(|e| Error::io(&self.path, e))?;
        self.next_seq += 1;
        Ok(seq)
    }

    pub fn len(&self) -> u64 {
        self.next_seq - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}
