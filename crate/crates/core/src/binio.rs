//! Minimal little-endian binary encoding shared by the dictionary cache and
//! the model file. Every file starts with an 8-byte magic and a `u32` version.

use std::io::{self, Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BinError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a {expected} file")]
    BadMagic { expected: &'static str },
    #[error("unsupported format version {found} (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("corrupt file: {0}")]
    Corrupt(String),
}

pub(crate) struct Writer<W: Write> {
    inner: W,
}

impl<W: Write> Writer<W> {
    pub fn new(mut inner: W, magic: &[u8; 8], version: u32) -> io::Result<Self> {
        inner.write_all(magic)?;
        inner.write_all(&version.to_le_bytes())?;
        Ok(Writer { inner })
    }

    pub fn u32(&mut self, v: u32) -> io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn u64(&mut self, v: u64) -> io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn len(&mut self, v: usize) -> io::Result<()> {
        self.u64(v as u64)
    }

    pub fn f64(&mut self, v: f64) -> io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn str(&mut self, s: &str) -> io::Result<()> {
        self.len(s.len())?;
        self.inner.write_all(s.as_bytes())
    }

    pub fn finish(mut self) -> io::Result<W> {
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub(crate) struct Reader<R: Read> {
    inner: R,
}

fn corrupt(e: io::Error) -> BinError {
    if e.kind() == io::ErrorKind::UnexpectedEof {
        BinError::Corrupt("unexpected end of file".into())
    } else {
        BinError::Io(e)
    }
}

impl<R: Read> Reader<R> {
    pub fn new(
        mut inner: R,
        magic: &[u8; 8],
        version: u32,
        what: &'static str,
    ) -> Result<Self, BinError> {
        let mut found = [0u8; 8];
        inner.read_exact(&mut found).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => BinError::BadMagic { expected: what },
            _ => BinError::Io(e),
        })?;
        if &found != magic {
            return Err(BinError::BadMagic { expected: what });
        }
        let mut reader = Reader { inner };
        let found = reader.u32()?;
        if found != version {
            return Err(BinError::VersionMismatch {
                found,
                expected: version,
            });
        }
        Ok(reader)
    }

    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], BinError> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(corrupt)?;
        Ok(buf)
    }

    pub fn u32(&mut self) -> Result<u32, BinError> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    pub fn u64(&mut self) -> Result<u64, BinError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    /// Reads a length, bounded so corrupt input cannot trigger huge allocations.
    pub fn len(&mut self) -> Result<usize, BinError> {
        let v = self.u64()?;
        if v > (1 << 32) {
            return Err(BinError::Corrupt(format!("implausible length {v}")));
        }
        Ok(v as usize)
    }

    pub fn f64(&mut self) -> Result<f64, BinError> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }

    pub fn str(&mut self) -> Result<String, BinError> {
        let len = self.len()?;
        let mut buf = Vec::new();
        (&mut self.inner)
            .take(len as u64)
            .read_to_end(&mut buf)
            .map_err(corrupt)?;
        if buf.len() != len {
            return Err(BinError::Corrupt("unexpected end of file".into()));
        }
        String::from_utf8(buf).map_err(|_| BinError::Corrupt("invalid UTF-8 string".into()))
    }

    /// Fails unless the input is exhausted.
    pub fn finish(mut self) -> Result<(), BinError> {
        let mut probe = [0u8; 1];
        match self.inner.read(&mut probe)? {
            0 => Ok(()),
            _ => Err(BinError::Corrupt("trailing bytes".into())),
        }
    }
}
