use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use flate2::read::MultiGzDecoder;

use super::IngestError;

/// One data line of an edge list: the two vertex ids plus whatever fields
/// followed them, left unparsed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawRecord {
    pub left_id: u64,
    pub right_id: u64,
    pub extras: Vec<String>,
}

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// Reads a KONECT-style edge list, transparently gunzipping when the file
/// starts with the gzip magic bytes.
pub fn parse_konect(path: &Path) -> Result<Vec<RawRecord>, IngestError> {
    let mut file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    let mut head = [0u8; 2];
    let sniffed = read_prefix(&mut file, &mut head).map_err(|e| IngestError::io(path, e))?;
    let prefix = std::io::Cursor::new(head[..sniffed].to_vec());
    let raw = prefix.chain(file);
    if sniffed == 2 && head == GZIP_MAGIC {
        read_konect(BufReader::new(MultiGzDecoder::new(raw)))
    } else {
        read_konect(BufReader::new(raw))
    }
    .map_err(|e| match e {
        IngestError::Io { source, .. } => IngestError::io(path, source),
        other => other,
    })
}

fn read_prefix(file: &mut File, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match file.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}

/// Parses edge-list lines from any reader. `%` starts a comment line;
/// fields are separated by spaces, tabs or commas.
pub fn read_konect<R: BufRead>(reader: R) -> Result<Vec<RawRecord>, IngestError> {
    let mut out = Vec::new();
    for (index, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| IngestError::io("<input>", e))?;
        let number = index + 1;
        let body = line.trim();
        if body.is_empty() || body.starts_with('%') {
            continue;
        }
        let mut fields = body
            .split(|c: char| c == ',' || c.is_ascii_whitespace())
            .filter(|f| !f.is_empty());
        let left_id = vertex_field(fields.next(), number, "left")?;
        let right_id = vertex_field(fields.next(), number, "right")?;
        out.push(RawRecord {
            left_id,
            right_id,
            extras: fields.map(str::to_owned).collect(),
        });
    }
    Ok(out)
}

fn vertex_field(field: Option<&str>, line: usize, which: &str) -> Result<u64, IngestError> {
    let raw = field.ok_or_else(|| IngestError::Malformed {
        line,
        reason: format!("missing {which} vertex id"),
    })?;
    match raw.parse::<u64>() {
        Ok(0) => Err(IngestError::Malformed {
            line,
            reason: format!("{which} vertex id 0; ids start at 1"),
        }),
        Ok(id) => Ok(id),
        Err(_) => Err(IngestError::Malformed {
            line,
            reason: format!("{which} vertex id {raw:?} is not a positive integer"),
        }),
    }
}
