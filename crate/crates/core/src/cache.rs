//! Binary cache files for balls and sphere complexes.
//!
//! Layout: 8-byte magic, `u32` version, 32-byte SHA-256 of the payload, then
//! the payload. All integers are little endian.

use crate::ball::{BallError, CayleyBall};
use crate::complex::{Graph, SphereComplex};
use crate::oracle::{make_oracle, OracleError};
use crate::presentation::{GroupPresentation, PresentationError};
use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use sha2::{Digest, Sha256};
use std::io::{Cursor, Read};
use std::path::Path;
use thiserror::Error;

pub const BALL_MAGIC: &[u8; 8] = b"RBBALL\0\0";
pub const COMPLEX_MAGIC: &[u8; 8] = b"RBCPLX\0\0";
pub const CACHE_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("not a cache file of this kind")]
    BadMagic,
    #[error("cache version {found}, expected {expected}")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("content hash mismatch")]
    HashMismatch,
    #[error("truncated or malformed cache: {0}")]
    Malformed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Ball(#[from] BallError),
}

/// Hex SHA-256 of a byte string.
pub fn hex_digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn wrap(magic: &[u8; 8], payload: Vec<u8>) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 44);
    out.extend_from_slice(magic);
    out.write_u32::<LittleEndian>(CACHE_VERSION).unwrap();
    out.extend_from_slice(&Sha256::digest(&payload));
    out.extend(payload);
    out
}

fn unwrap<'a>(magic: &[u8; 8], bytes: &'a [u8]) -> Result<&'a [u8], CacheError> {
    if bytes.len() < 44 || &bytes[..8] != magic {
        return Err(CacheError::BadMagic);
    }
    let found = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if found != CACHE_VERSION {
        return Err(CacheError::VersionMismatch { found, expected: CACHE_VERSION });
    }
    let payload = &bytes[44..];
    if Sha256::digest(payload).as_slice() != &bytes[12..44] {
        return Err(CacheError::HashMismatch);
    }
    Ok(payload)
}

fn put_u32s(out: &mut Vec<u8>, v: impl ExactSizeIterator<Item = u32>) {
    out.write_u64::<LittleEndian>(v.len() as u64).unwrap();
    for x in v {
        out.write_u32::<LittleEndian>(x).unwrap();
    }
}

fn get_u32s(c: &mut Cursor<&[u8]>) -> Result<Vec<u32>, CacheError> {
    let n = c.read_u64::<LittleEndian>()? as usize;
    let left = c.get_ref().len() - c.position() as usize;
    if n > left / 4 {
        return Err(CacheError::Malformed("array longer than the file".into()));
    }
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        v.push(c.read_u32::<LittleEndian>()?);
    }
    Ok(v)
}

fn get_text(c: &mut Cursor<&[u8]>) -> Result<String, CacheError> {
    let n = c.read_u64::<LittleEndian>()? as usize;
    let left = c.get_ref().len() - c.position() as usize;
    if n > left {
        return Err(CacheError::Malformed("string longer than the file".into()));
    }
    let mut buf = vec![0u8; n];
    c.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|e| CacheError::Malformed(e.to_string()))
}

/// Serialized ball: presentation text, radius, parents, last letters,
/// sphere offsets and the adjacency table.
pub fn ball_to_bytes(ball: &CayleyBall) -> Vec<u8> {
    let mut p = Vec::new();
    let text = ball.presentation().canonical_text();
    p.write_u64::<LittleEndian>(text.len() as u64).unwrap();
    p.extend_from_slice(text.as_bytes());
    p.write_u64::<LittleEndian>(ball.radius() as u64).unwrap();
    put_u32s(&mut p, ball.parents().iter().copied());
    put_u32s(&mut p, ball.last_letters().iter().map(|&l| l as u32));
    put_u32s(&mut p, ball.offsets().iter().map(|&o| o as u32));
    put_u32s(&mut p, ball.adjacency().iter().copied());
    wrap(BALL_MAGIC, p)
}

/// Inverse of [`ball_to_bytes`]; relative table paths resolve against `base`.
pub fn ball_from_bytes(bytes: &[u8], base: Option<&Path>) -> Result<CayleyBall, CacheError> {
    let mut c = Cursor::new(unwrap(BALL_MAGIC, bytes)?);
    let text = get_text(&mut c)?;
    let presentation = GroupPresentation::parse_with_base(&text, base)?;
    let radius = c.read_u64::<LittleEndian>()? as usize;
    let parent = get_u32s(&mut c)?;
    let last = get_u32s(&mut c)?
        .into_iter()
        .map(|l| u8::try_from(l).map_err(|_| CacheError::Malformed("letter out of range".into())))
        .collect::<Result<Vec<_>, _>>()?;
    let offsets = get_u32s(&mut c)?.into_iter().map(|o| o as usize).collect();
    let adj = get_u32s(&mut c)?;
    let oracle = make_oracle(&presentation)?;
    Ok(CayleyBall::from_parts(presentation, oracle, radius, parent, last, offsets, adj)?)
}

/// Content hash of the ball cache payload; stable across runs.
pub fn ball_hash(ball: &CayleyBall) -> String {
    hex_digest(&ball_to_bytes(ball)[44..])
}

pub fn complex_to_bytes(k: &SphereComplex) -> Vec<u8> {
    let mut p = Vec::new();
    p.write_u64::<LittleEndian>(k.n as u64).unwrap();
    p.write_u32::<LittleEndian>(k.d).unwrap();
    p.write_u32::<LittleEndian>(k.first).unwrap();
    p.write_u64::<LittleEndian>(k.vertex_count() as u64).unwrap();
    let edges: Vec<(u32, u32)> = k.graph.edges().collect();
    put_u32s(&mut p, edges.iter().flat_map(|&(a, b)| [a, b]).collect::<Vec<_>>().into_iter());
    wrap(COMPLEX_MAGIC, p)
}

pub fn complex_from_bytes(bytes: &[u8]) -> Result<SphereComplex, CacheError> {
    let mut c = Cursor::new(unwrap(COMPLEX_MAGIC, bytes)?);
    let n = c.read_u64::<LittleEndian>()? as usize;
    let d = c.read_u32::<LittleEndian>()?;
    let first = c.read_u32::<LittleEndian>()?;
    let count = c.read_u64::<LittleEndian>()? as usize;
    let flat = get_u32s(&mut c)?;
    if flat.len() % 2 != 0 || flat.iter().any(|&v| v as usize >= count) {
        return Err(CacheError::Malformed("edge list".into()));
    }
    let edges: Vec<(u32, u32)> = flat.chunks(2).map(|e| (e[0], e[1])).collect();
    Ok(SphereComplex { n, d, first, graph: Graph::from_edges(count, &edges) })
}

/// Writes through a temporary file in the same directory and renames it.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

pub fn save_ball(ball: &CayleyBall, path: &Path) -> Result<(), CacheError> {
    Ok(write_atomic(path, &ball_to_bytes(ball))?)
}

pub fn load_ball(path: &Path, base: Option<&Path>) -> Result<CayleyBall, CacheError> {
    ball_from_bytes(&std::fs::read(path)?, base)
}

pub fn save_complex(k: &SphereComplex, path: &Path) -> Result<(), CacheError> {
    Ok(write_atomic(path, &complex_to_bytes(k))?)
}

pub fn load_complex(path: &Path) -> Result<SphereComplex, CacheError> {
    complex_from_bytes(&std::fs::read(path)?)
}
