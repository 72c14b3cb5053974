//! Append-only on-disk record of the document ids a redactor has processed.
//!
//! One lowercase hex DID per line. The file is held under an exclusive
//! advisory lock for as long as the journal is open, so two processes cannot
//! interleave check-and-append on the same redactor.

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use crate::encoding::DocumentId;

#[derive(Debug)]
pub struct ReplayJournal {
    path: PathBuf,
    file: File,
}

impl ReplayJournal {
    /// Opens (creating if needed) and locks the journal, returning it with
    /// every DID recorded so far. Blocks while another handle holds the lock.
    pub fn open(path: impl AsRef<Path>) -> io::Result<(Self, HashSet<DocumentId>)> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)?;
        file.lock()?;

        let mut seen = HashSet::new();
        for (lineno, line) in BufReader::new(&file).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let did = DocumentId::from_hex(line).map_err(|e| {
                io::Error::new(
                    io::ErrorKind::InvalidData,
                    format!("{}:{}: {e}", path.display(), lineno + 1),
                )
            })?;
            seen.insert(did);
        }
        Ok((Self { path, file }, seen))
    }

    /// Appends one DID and syncs it to disk before returning.
    pub fn append(&mut self, did: &DocumentId) -> io::Result<()> {
        let mut line = did.to_hex();
        line.push('\n');
        self.file.write_all(line.as_bytes())?;
        self.file.sync_data()
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}
