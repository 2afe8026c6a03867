//! Model checkpoint file: little-endian binary, bit-exact round trip.
//!
//! Layout:
//!
//! ```text
//! magic      4 bytes "AMPC"
//! version    u16 = 1
//! dims       u32 hidden, u32 dense, u32 n_features
//! config     f64 lr, u32 epochs, u32 batch, u64 seed, f64 clip
//! blocks     w_i w_f w_g w_o b_i b_f b_g b_o w1 b1 w2, each u32 len + f64s
//! b2         f64
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use thiserror::Error;

use crate::traffic::FEATURE_COUNT;

use super::{ModelConfig, ModelParams};

const MAGIC: &[u8; 4] = b"AMPC";
const VERSION: u16 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("not a model checkpoint (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    BadVersion(u16),
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

pub fn save_checkpoint(
    path: &Path,
    params: &ModelParams,
    cfg: &ModelConfig,
) -> Result<(), CheckpointError> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(params.hidden as u32).to_le_bytes());
    buf.extend_from_slice(&(params.dense as u32).to_le_bytes());
    buf.extend_from_slice(&(FEATURE_COUNT as u32).to_le_bytes());
    buf.extend_from_slice(&cfg.lr.to_bits().to_le_bytes());
    buf.extend_from_slice(&(cfg.epochs as u32).to_le_bytes());
    buf.extend_from_slice(&(cfg.batch as u32).to_le_bytes());
    buf.extend_from_slice(&cfg.seed.to_le_bytes());
    buf.extend_from_slice(&cfg.clip.to_bits().to_le_bytes());

    for block in [
        &params.w_i,
        &params.w_f,
        &params.w_g,
        &params.w_o,
        &params.b_i,
        &params.b_f,
        &params.b_g,
        &params.b_o,
        &params.w1,
        &params.b1,
        &params.w2,
    ] {
        buf.extend_from_slice(&(block.len() as u32).to_le_bytes());
        for &v in block.iter() {
            buf.extend_from_slice(&v.to_bits().to_le_bytes());
        }
    }
    buf.extend_from_slice(&params.b2.to_bits().to_le_bytes());

    let mut f = fs::File::create(path)?;
    f.write_all(&buf)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(ModelParams, ModelConfig), CheckpointError> {
    let data = fs::read(path)?;
    let mut pos = 0usize;
    let mut take = |n: usize| -> Result<&[u8], CheckpointError> {
        if data.len() - pos < n {
            return Err(CheckpointError::Corrupt(format!(
                "unexpected end of checkpoint at byte {pos}"
            )));
        }
        let s = &data[pos..pos + n];
        pos += n;
        Ok(s)
    };

    if take(4)? != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let version = u16::from_le_bytes(take(2)?.try_into().unwrap());
    if version != VERSION {
        return Err(CheckpointError::BadVersion(version));
    }
    let hidden = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let dense = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let n_feats = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    if n_feats != FEATURE_COUNT {
        return Err(CheckpointError::Corrupt(format!(
            "checkpoint built for {n_feats} features, this build uses {FEATURE_COUNT}"
        )));
    }
    let lr = f64::from_bits(u64::from_le_bytes(take(8)?.try_into().unwrap()));
    let epochs = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let batch = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
    let seed = u64::from_le_bytes(take(8)?.try_into().unwrap());
    let clip = f64::from_bits(u64::from_le_bytes(take(8)?.try_into().unwrap()));

    let mut params = ModelParams::zeros(hidden, dense);
    {
        let blocks: [&mut Vec<f64>; 11] = [
            &mut params.w_i,
            &mut params.w_f,
            &mut params.w_g,
            &mut params.w_o,
            &mut params.b_i,
            &mut params.b_f,
            &mut params.b_g,
            &mut params.b_o,
            &mut params.w1,
            &mut params.b1,
            &mut params.w2,
        ];
        for block in blocks {
            let len = u32::from_le_bytes(take(4)?.try_into().unwrap()) as usize;
            if len != block.len() {
                return Err(CheckpointError::Corrupt(format!(
                    "block length {len} does not match dims (expected {})",
                    block.len()
                )));
            }
            for v in block.iter_mut() {
                *v = f64::from_bits(u64::from_le_bytes(take(8)?.try_into().unwrap()));
            }
        }
    }
    params.b2 = f64::from_bits(u64::from_le_bytes(take(8)?.try_into().unwrap()));
    if pos != data.len() {
        return Err(CheckpointError::Corrupt("trailing bytes".into()));
    }

    let cfg = ModelConfig {
        hidden,
        dense,
        lr,
        epochs,
        batch,
        seed,
        clip,
    };
    Ok((params, cfg))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let cfg = ModelConfig {
            hidden: 9,
            dense: 5,
            lr: 0.003,
            epochs: 17,
            batch: 8,
            seed: 0xfeed,
            clip: 2.5,
        };
        let mut params = ModelParams::init(&cfg);
        // Mix in some awkward values.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        params.w_i[0] = f64::MIN_POSITIVE;
        params.w_f[1] = -0.0;
        params.b2 = rng.gen_range(-1.0..1.0);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&path, &params, &cfg).unwrap();
        let (loaded, loaded_cfg) = load_checkpoint(&path).unwrap();
        assert_eq!(loaded_cfg, cfg);
        assert_eq!(loaded.w_i, params.w_i);
        assert_eq!(loaded.w_f[1].to_bits(), params.w_f[1].to_bits());
        assert_eq!(loaded, params);
    }

    #[test]
    fn garbage_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("junk.ckpt");
        std::fs::write(&path, b"not a checkpoint").unwrap();
        match load_checkpoint(&path) {
            Err(CheckpointError::BadMagic) => {}
            other => panic!("expected BadMagic, got {other:?}"),
        }
    }
}
