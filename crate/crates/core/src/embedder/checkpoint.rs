//! Little-endian binary checkpoints: magic, version, config block, then the
//! parameter tensors in layer order (`len: u64` followed by `len` f64s).

use std::fs;
use std::path::Path;

use super::config::EmbedderConfig;
use super::network::EmbedderNetwork;
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"SNRGCKPT";
pub const CHECKPOINT_VERSION: u32 = 1;

fn encode(net: &EmbedderNetwork) -> Vec<u8> {
    let c = net.config();
    let mut out = Vec::with_capacity(128 + net.parameter_count() * 8);
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for v in [
        c.conv_blocks,
        c.dense_layers,
        c.hidden_width,
        c.embedding_dim,
        c.base_channels,
        c.batch_size,
        c.epochs,
        c.input_shape.0,
        c.input_shape.1,
    ] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    out.extend_from_slice(&c.learning_rate.to_le_bytes());
    out.extend_from_slice(&c.margin.to_le_bytes());
    out.extend_from_slice(&c.seed.to_le_bytes());
    out.extend_from_slice(&c.target_val_loss.unwrap_or(f64::NAN).to_le_bytes());
    out.extend_from_slice(&(net.params().len() as u64).to_le_bytes());
    for tensor in net.params() {
        out.extend_from_slice(&(tensor.len() as u64).to_le_bytes());
        for v in tensor {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint("truncated checkpoint".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(
            self.take(8)?.try_into().expect("8 bytes"),
        ))
    }

    fn usize(&mut self) -> Result<usize> {
        usize::try_from(self.u64()?).map_err(|_| Error::Checkpoint("field out of range".into()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(self.u64()?))
    }
}

fn decode(bytes: &[u8]) -> Result<EmbedderNetwork> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let version = u32::from_le_bytes(r.take(4)?.try_into().expect("4 bytes"));
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {version}, expected {CHECKPOINT_VERSION}"
        )));
    }
    let mut config = EmbedderConfig {
        conv_blocks: r.usize()?,
        dense_layers: r.usize()?,
        hidden_width: r.usize()?,
        embedding_dim: r.usize()?,
        base_channels: r.usize()?,
        batch_size: r.usize()?,
        epochs: r.usize()?,
        ..Default::default()
    };
    config.input_shape = (r.usize()?, r.usize()?);
    config.learning_rate = r.f64()?;
    config.margin = r.f64()?;
    config.seed = r.u64()?;
    let target = r.f64()?;
    config.target_val_loss = (!target.is_nan()).then_some(target);

    let count = r.usize()?;
    if count > bytes.len() / 8 {
        return Err(Error::Checkpoint("implausible tensor count".into()));
    }
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.usize()?;
        let raw = r.take(
            len.checked_mul(8)
                .ok_or_else(|| Error::Checkpoint("tensor too large".into()))?,
        )?;
        params.push(
            raw.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect(),
        );
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes after last tensor".into()));
    }
    EmbedderNetwork::from_parts(config, params).map_err(|e| match e {
        Error::Checkpoint(_) => e,
        other => Error::Checkpoint(format!("architecture mismatch: {other}")),
    })
}

pub fn save_checkpoint(net: &EmbedderNetwork, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode(net)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<EmbedderNetwork> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    decode(&fs::read(path).map_err(|e| Error::io(path, e))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> EmbedderConfig {
        EmbedderConfig {
            conv_blocks: 2,
            embedding_dim: 4,
            input_shape: (8, 8),
            target_val_loss: Some(0.1),
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("net.ckpt");
        let net = EmbedderNetwork::new(small()).unwrap();
        save_checkpoint(&net, &path).unwrap();
        let back = load_checkpoint(&path).unwrap();
        assert_eq!(back, net);
        let x: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let a = net.forward(&x).unwrap().embedding;
        let b = back.forward(&x).unwrap().embedding;
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn header_echoes_reference_depth() {
        let net = EmbedderNetwork::new(EmbedderConfig::reference()).unwrap();
        let back = decode(&encode(&net)).unwrap();
        assert_eq!(back.config().conv_blocks, 7);
        assert_eq!(back.config().embedding_dim, 56);
        assert_eq!(back.config().target_val_loss, None);
    }

    #[test]
    fn corrupt_files_rejected() {
        let net = EmbedderNetwork::new(small()).unwrap();
        let good = encode(&net);

        let mut bad_magic = good.clone();
        bad_magic[0] = b'X';
        assert!(matches!(decode(&bad_magic), Err(Error::Checkpoint(_))));

        let mut bad_version = good.clone();
        bad_version[8] = 9;
        assert!(matches!(decode(&bad_version), Err(Error::Checkpoint(_))));

        // claims 3 conv blocks while carrying 2-block tensors
        let mut bad_arch = good.clone();
        bad_arch[12] = 3;
        assert!(matches!(decode(&bad_arch), Err(Error::Checkpoint(_))));

        assert!(decode(&good[..good.len() - 3]).is_err());
        assert!(matches!(
            load_checkpoint("/nonexistent/net.ckpt"),
            Err(Error::MissingFile(_))
        ));
    }
}
