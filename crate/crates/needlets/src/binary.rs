//! Flat little-endian binary records for coefficient vectors and fields.
//!
//! Layout, all integers little-endian:
//!
//! | bytes    | content                                              |
//! |----------|------------------------------------------------------|
//! | `0..6`   | magic `NDLT1\0`                                      |
//! | `6`      | payload kind: `0` coefficients, `1` field            |
//! | `7`      | expansion: `0` Karhunen–Loève, `1` needlet           |
//! | `8..16`  | value count `n` as `u64`                             |
//! | `16..24` | seed as `u64`                                        |
//! | `24..32` | coefficients: truncation (`L` or `J`) as `u64`;      |
//! |          | field: `n_theta` then `n_phi` as `u32`, zero for     |
//! |          | point lists                                          |
//! | `32..`   | `n` IEEE-754 binary64 values                         |

use needlets_core::sampling::{CoefficientVector, Expansion, FieldRealization};
use needlets_core::sphere::GridLayout;

pub const MAGIC: [u8; 6] = *b"NDLT1\0";
pub const HEADER_LEN: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadKind {
    Coefficients = 0,
    Field = 1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionTag {
    KarhunenLoeve = 0,
    Needlet = 1,
}

impl ExpansionTag {
    pub fn name(&self) -> &'static str {
        match self {
            ExpansionTag::KarhunenLoeve => "kl",
            ExpansionTag::Needlet => "needlet",
        }
    }
}

impl From<Expansion> for ExpansionTag {
    fn from(expansion: Expansion) -> Self {
        match expansion {
            Expansion::KarhunenLoeve { .. } => ExpansionTag::KarhunenLoeve,
            Expansion::Needlet { .. } => ExpansionTag::Needlet,
        }
    }
}

/// Bytes `24..32`, interpreted by payload kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aux {
    Truncation(u64),
    Grid { n_theta: u32, n_phi: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub kind: PayloadKind,
    pub expansion: ExpansionTag,
    pub seed: u64,
    pub aux: Aux,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecodeError {
    #[error("{0} bytes is shorter than the {HEADER_LEN}-byte header")]
    Truncated(usize),
    #[error("bad magic {0:02x?}")]
    Magic([u8; 6]),
    #[error("unknown payload kind {0}")]
    Kind(u8),
    #[error("unknown expansion tag {0}")]
    Expansion(u8),
    #[error("header announces {expected} values, payload holds {found} bytes")]
    Length { expected: u64, found: usize },
    #[error("grid {n_theta}x{n_phi} does not match {count} values")]
    Grid { n_theta: u32, n_phi: u32, count: u64 },
}

impl Record {
    pub fn from_coefficients(coefficients: &CoefficientVector) -> Self {
        Self {
            kind: PayloadKind::Coefficients,
            expansion: coefficients.expansion.into(),
            seed: coefficients.seed,
            aux: Aux::Truncation(coefficients.expansion.truncation()),
            values: coefficients.values.clone(),
        }
    }

    /// Grids too large for `u32` dimensions are stored as point lists.
    pub fn from_field(field: &FieldRealization) -> Self {
        let aux = match field.grid.layout() {
            GridLayout::Equirectangular { n_theta, n_phi } => match (u32::try_from(n_theta), u32::try_from(n_phi)) {
                (Ok(n_theta), Ok(n_phi)) => Aux::Grid { n_theta, n_phi },
                _ => Aux::Grid { n_theta: 0, n_phi: 0 },
            },
            GridLayout::List => Aux::Grid { n_theta: 0, n_phi: 0 },
        };
        Self {
            kind: PayloadKind::Field,
            expansion: field.provenance.expansion.into(),
            seed: field.provenance.seed,
            aux,
            values: field.values.clone(),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(&MAGIC);
        out.push(self.kind as u8);
        out.push(self.expansion as u8);
        out.extend_from_slice(&(self.values.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        match self.aux {
            Aux::Truncation(t) => out.extend_from_slice(&t.to_le_bytes()),
            Aux::Grid { n_theta, n_phi } => {
                out.extend_from_slice(&n_theta.to_le_bytes());
                out.extend_from_slice(&n_phi.to_le_bytes());
            }
        }
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        if bytes.len() < HEADER_LEN {
            return Err(DecodeError::Truncated(bytes.len()));
        }
        let word = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"));
        let half = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"));
        let magic: [u8; 6] = bytes[..6].try_into().expect("6-byte slice");
        if magic != MAGIC {
            return Err(DecodeError::Magic(magic));
        }
        let kind = match bytes[6] {
            0 => PayloadKind::Coefficients,
            1 => PayloadKind::Field,
            other => return Err(DecodeError::Kind(other)),
        };
        let expansion = match bytes[7] {
            0 => ExpansionTag::KarhunenLoeve,
            1 => ExpansionTag::Needlet,
            other => return Err(DecodeError::Expansion(other)),
        };
        let count = word(8);
        let payload = &bytes[HEADER_LEN..];
        if count.checked_mul(8) != Some(payload.len() as u64) {
            return Err(DecodeError::Length {
                expected: count,
                found: payload.len(),
            });
        }
        let aux = match kind {
            PayloadKind::Coefficients => Aux::Truncation(word(24)),
            PayloadKind::Field => {
                let (n_theta, n_phi) = (half(24), half(28));
                if (n_theta, n_phi) != (0, 0) && n_theta as u64 * n_phi as u64 != count {
                    return Err(DecodeError::Grid { n_theta, n_phi, count });
                }
                Aux::Grid { n_theta, n_phi }
            }
        };
        let values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect();
        Ok(Self {
            kind,
            expansion,
            seed: word(16),
            aux,
            values,
        })
    }

    /// `(n_theta, n_phi)` for equirectangular fields.
    pub fn grid_dims(&self) -> Option<(usize, usize)> {
        match self.aux {
            Aux::Grid { n_theta, n_phi } if n_theta > 0 => Some((n_theta as usize, n_phi as usize)),
            _ => None,
        }
    }
}
