use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::Alpha;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"CHW1";

/// A cached parity grid: one signed byte (−1, 0, +1) per point of S ∩ L in
/// row-major order, little-endian header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParityDump {
    pub form: [i64; 4],
    pub alpha: Alpha,
    pub region: String,
    pub coset: String,
    pub values: Vec<i8>,
}

impl ParityDump {
    pub fn write_to(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        for c in self.form {
            w.write_all(&c.to_le_bytes())?;
        }
        w.write_all(&[self.alpha.code()])?;
        for s in [&self.region, &self.coset] {
            w.write_all(&(s.len() as u32).to_le_bytes())?;
            w.write_all(s.as_bytes())?;
        }
        w.write_all(&(self.values.len() as u64).to_le_bytes())?;
        let bytes: Vec<u8> = self.values.iter().map(|&v| v as u8).collect();
        w.write_all(&bytes)?;
        w.flush()?;
        Ok(())
    }

    pub fn read_from(path: &Path) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Parse("not a parity dump (bad magic)".into()));
        }
        let mut form = [0i64; 4];
        for c in form.iter_mut() {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            *c = i64::from_le_bytes(b);
        }
        let mut code = [0u8; 1];
        r.read_exact(&mut code)?;
        let alpha = Alpha::from_code(code[0])?;
        let read_str = |r: &mut BufReader<File>| -> Result<String> {
            let mut len = [0u8; 4];
            r.read_exact(&mut len)?;
            let mut buf = vec![0u8; u32::from_le_bytes(len) as usize];
            r.read_exact(&mut buf)?;
            String::from_utf8(buf).map_err(|_| Error::Parse("descriptor is not UTF-8".into()))
        };
        let region = read_str(&mut r)?;
        let coset = read_str(&mut r)?;
        let mut count = [0u8; 8];
        r.read_exact(&mut count)?;
        let count = u64::from_le_bytes(count) as usize;
        let mut bytes = vec![0u8; count];
        r.read_exact(&mut bytes)?;
        let values: Vec<i8> = bytes.into_iter().map(|b| b as i8).collect();
        if values.iter().any(|v| !(-1..=1).contains(v)) {
            return Err(Error::Parse("parity dump holds values outside {-1, 0, 1}".into()));
        }
        let mut rest = Vec::new();
        r.read_to_end(&mut rest)?;
        if !rest.is_empty() {
            return Err(Error::Parse("trailing bytes after parity dump".into()));
        }
        Ok(ParityDump { form, alpha, region, coset, values })
    }
}
