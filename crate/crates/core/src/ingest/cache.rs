//! Binary stream cache: the 8-byte magic `BFLYSTR1`, a little-endian u64
//! edge count, then one `(left, right, timestamp)` triple of little-endian
//! u64s per edge.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::graph::{Edge, TimedEdge};

use super::{EdgeStream, IngestError, StreamMetadata};

pub const CACHE_MAGIC: &[u8; 8] = b"BFLYSTR1";

pub fn write_cache(stream: &EdgeStream, path: &Path) -> Result<(), IngestError> {
    let io_err = |e| IngestError::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
    out.write_all(CACHE_MAGIC).map_err(io_err)?;
    out.write_all(&(stream.len() as u64).to_le_bytes())
        .map_err(io_err)?;
    for te in &stream.edges {
        for word in [te.edge.left(), te.edge.right(), te.timestamp] {
            out.write_all(&word.to_le_bytes()).map_err(io_err)?;
        }
    }
    out.flush().map_err(io_err)
}

pub fn read_cache(path: &Path) -> Result<EdgeStream, IngestError> {
    let io_err = |e| IngestError::io(path, e);
    let bad = |reason: &str| IngestError::BadCache {
        path: path.to_path_buf(),
        reason: reason.into(),
    };
    let mut input = BufReader::new(File::open(path).map_err(io_err)?);

    let mut magic = [0u8; 8];
    input
        .read_exact(&mut magic)
        .map_err(|_| bad("file shorter than header"))?;
    if &magic != CACHE_MAGIC {
        return Err(bad("wrong magic"));
    }
    let mut word = [0u8; 8];
    let mut next = |input: &mut BufReader<File>| -> Result<u64, IngestError> {
        input.read_exact(&mut word).map_err(|_| bad("truncated"))?;
        Ok(u64::from_le_bytes(word))
    };
    let count = next(&mut input)?;
    let mut edges = Vec::with_capacity(count.min(1 << 24) as usize);
    let mut latest = 0;
    for _ in 0..count {
        let (l, r, t) = (next(&mut input)?, next(&mut input)?, next(&mut input)?);
        if t < latest {
            return Err(bad("timestamps decrease"));
        }
        latest = t;
        edges.push(TimedEdge::new(Edge::new(l, r), t));
    }
    if input.read(&mut [0u8; 1]).map_err(io_err)? != 0 {
        return Err(bad("trailing bytes after last edge"));
    }
    let mut stream = EdgeStream {
        edges,
        meta: StreamMetadata::default(),
    };
    stream.refresh_vertex_counts();
    stream.meta.source = Some(path.to_path_buf());
    Ok(stream)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{synth_stream, SynthSpec};
    use proptest::prelude::*;

    #[test]
    fn exact_byte_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.bin");
        let stream = EdgeStream {
            edges: vec![TimedEdge::new(Edge::new(1, 2), 3)],
            meta: StreamMetadata::default(),
        };
        write_cache(&stream, &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        let mut want = b"BFLYSTR1".to_vec();
        for w in [1u64, 1, 2, 3] {
            want.extend_from_slice(&w.to_le_bytes());
        }
        assert_eq!(bytes, want);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.bin");
        std::fs::write(&path, b"NOTMAGIC\0\0\0\0\0\0\0\0").unwrap();
        assert!(matches!(
            read_cache(&path),
            Err(IngestError::BadCache { .. })
        ));
        let mut short = CACHE_MAGIC.to_vec();
        short.extend_from_slice(&5u64.to_le_bytes());
        std::fs::write(&path, &short).unwrap();
        assert!(matches!(
            read_cache(&path),
            Err(IngestError::BadCache { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip(seed in any::<u64>(), m in 1u64..400) {
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("s.bin");
            let stream = synth_stream(SynthSpec::Random { n_left: 30, n_right: 30, m }, seed).unwrap();
            write_cache(&stream, &path).unwrap();
            let back = read_cache(&path).unwrap();
            prop_assert_eq!(back.edges, stream.edges);
        }
    }
}
