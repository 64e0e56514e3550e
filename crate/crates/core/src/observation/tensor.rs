//! Raw little-endian f32 tensor files.
//!
//! Layout: a 16-byte header of four little-endian u32 words
//! (`MAGIC`, H, W, C) followed by one or more `H * W * C` frames of
//! little-endian f32 values, channel-last. The frame count is implied by
//! the file length.

use std::path::Path;

use crate::error::{Error, Result};

/// `b"SLTN"` read as a little-endian u32.
pub const MAGIC: u32 = u32::from_le_bytes(*b"SLTN");
pub const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TensorHeader {
    pub height: u32,
    pub width: u32,
    pub channels: u32,
}

impl TensorHeader {
    pub fn frame_len(&self) -> usize {
        self.height as usize * self.width as usize * self.channels as usize
    }
}

pub fn encode_tensor(header: TensorHeader, frames: &[&[f32]]) -> Result<Vec<u8>> {
    let len = header.frame_len();
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * len * frames.len());
    for word in [MAGIC, header.height, header.width, header.channels] {
        out.extend_from_slice(&word.to_le_bytes());
    }
    for frame in frames {
        if frame.len() != len {
            return Err(Error::Config(format!(
                "frame of {} values does not match header {}x{}x{}",
                frame.len(),
                header.height,
                header.width,
                header.channels
            )));
        }
        for v in *frame {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

/// Decodes a tensor file into its header and the concatenated frames.
pub fn decode_tensor(bytes: &[u8]) -> Result<(TensorHeader, Vec<f32>)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::parse("tensor file", "shorter than its header"));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[4 * i..4 * i + 4].try_into().unwrap());
    if word(0) != MAGIC {
        return Err(Error::parse("tensor file", "bad magic"));
    }
    let header = TensorHeader {
        height: word(1),
        width: word(2),
        channels: word(3),
    };
    let body = &bytes[HEADER_LEN..];
    let frame_bytes = 4 * header.frame_len();
    if frame_bytes == 0 || body.len() % frame_bytes != 0 {
        return Err(Error::parse("tensor file", "body is not a whole number of frames"));
    }
    let values = body
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
        .collect();
    Ok((header, values))
}

pub fn write_tensor(path: &Path, header: TensorHeader, frames: &[&[f32]]) -> Result<()> {
    std::fs::write(path, encode_tensor(header, frames)?).map_err(|e| Error::io(path, e))
}

pub fn read_tensor(path: &Path) -> Result<(TensorHeader, Vec<f32>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_tensor(&bytes)
}
