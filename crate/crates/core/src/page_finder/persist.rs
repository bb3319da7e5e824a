//! Binary encoder file and loss-trace CSV.
//!
//! Layout (little-endian): magic `PWFE`, version `u32`, feature_dim `u64`,
//! embed_dim `u64`, tau `f64`, seed `u64`, max_ngram `u32`, then
//! `feature_dim * embed_dim` projection values as `f64`, row-major.

use std::io::{Read, Write};

use super::encoder::EncoderParams;
use super::FinderError;

pub const MAGIC: [u8; 4] = *b"PWFE";
pub const FORMAT_VERSION: u32 = 1;

pub fn write_params<W: Write>(params: &EncoderParams, mut w: W) -> Result<(), FinderError> {
    params.validate()?;
    let io = |e: std::io::Error| FinderError::Io(e.to_string());
    w.write_all(&MAGIC).map_err(io)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes()).map_err(io)?;
    w.write_all(&(params.feature_dim as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(params.embed_dim as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&params.tau.to_le_bytes()).map_err(io)?;
    w.write_all(&params.seed.to_le_bytes()).map_err(io)?;
    w.write_all(&(params.max_ngram as u32).to_le_bytes()).map_err(io)?;
    let mut buf = Vec::with_capacity(params.projection.len() * 8);
    for v in &params.projection {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf).map_err(io)?;
    w.flush().map_err(io)
}

fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], FinderError> {
    let mut b = [0u8; N];
    r.read_exact(&mut b).map_err(|e| FinderError::Format(format!("truncated header: {e}")))?;
    Ok(b)
}

pub fn read_params<R: Read>(mut r: R) -> Result<EncoderParams, FinderError> {
    if take::<4, _>(&mut r)? != MAGIC {
        return Err(FinderError::Format("bad magic".into()));
    }
    let version = u32::from_le_bytes(take(&mut r)?);
    if version != FORMAT_VERSION {
        return Err(FinderError::Format(format!("unsupported version {version}")));
    }
    let feature_dim = u64::from_le_bytes(take(&mut r)?) as usize;
    let embed_dim = u64::from_le_bytes(take(&mut r)?) as usize;
    let tau = f64::from_le_bytes(take(&mut r)?);
    let seed = u64::from_le_bytes(take(&mut r)?);
    let max_ngram = u32::from_le_bytes(take(&mut r)?) as usize;
    let n = feature_dim
        .checked_mul(embed_dim)
        .filter(|n| *n <= (1 << 31))
        .ok_or_else(|| FinderError::Format("projection too large".into()))?;
    let mut raw = vec![0u8; n * 8];
    r.read_exact(&mut raw).map_err(|e| FinderError::Format(format!("truncated projection: {e}")))?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(|e| FinderError::Io(e.to_string()))?;
    if !rest.is_empty() {
        return Err(FinderError::Format("trailing bytes after projection".into()));
    }
    let projection = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let params = EncoderParams { feature_dim, embed_dim, max_ngram, projection, tau, seed };
    params.validate().map_err(|e| FinderError::Format(e.to_string()))?;
    Ok(params)
}

pub fn loss_trace_csv(epoch_losses: &[f64]) -> String {
    let mut out = String::from("epoch,mean_loss\n");
    for (i, l) in epoch_losses.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, l));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::page_finder::encoder::EncoderShape;
    use proptest::prelude::*;

    #[test]
    fn rejects_corruption() {
        let p = EncoderParams::init(EncoderShape { feature_dim: 8, embed_dim: 4, max_ngram: 2 }, 0.05, 1).unwrap();
        let mut bytes = Vec::new();
        write_params(&p, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 8 + 8 + 8 + 8 + 4 + 8 * 32);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(read_params(&bad[..]).is_err());
        assert!(read_params(&bytes[..bytes.len() - 1]).is_err());
        let mut long = bytes.clone();
        long.push(0);
        assert!(read_params(&long[..]).is_err());
    }

    #[test]
    fn csv_layout() {
        assert_eq!(loss_trace_csv(&[1.5, 0.25]), "epoch,mean_loss\n1,1.5\n2,0.25\n");
    }

    proptest! {
        #[test]
        fn round_trip(seed in any::<u64>(), fd in 1usize..16, ed in 1usize..8, ng in 1usize..4, tau in 0.001f64..10.0) {
            let p = EncoderParams::init(EncoderShape { feature_dim: fd, embed_dim: ed, max_ngram: ng }, tau, seed).unwrap();
            let mut bytes = Vec::new();
            write_params(&p, &mut bytes).unwrap();
            prop_assert_eq!(read_params(&bytes[..]).unwrap(), p);
        }
    }
}
