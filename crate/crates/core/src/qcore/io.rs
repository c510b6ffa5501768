//! JSON and raw little-endian binary forms of operators and states.
//!
//! Binary operator layout: `b"RMTL"`, `u32` dimension `N`, then `N²`
//! row-major entries as `(re, im)` pairs of `f64`, all little-endian.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::{Operator, StateVector, C64};
use crate::{Error, Result};

pub const OPERATOR_MAGIC: &[u8; 4] = b"RMTL";

/// `{"dim": N, "entries": [[re, im], ...]}`, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dim: usize,
    pub entries: Vec<[f64; 2]>,
}

/// `{"n_qubits": n, "amplitudes": [[re, im], ...]}`
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StateVectorJson {
    pub n_qubits: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

fn pairs(values: &[C64]) -> Vec<[f64; 2]> {
    values.iter().map(|z| [z.re, z.im]).collect()
}

fn complexes(pairs: &[[f64; 2]]) -> Vec<C64> {
    pairs.iter().map(|&[re, im]| C64::new(re, im)).collect()
}

impl From<&Operator> for OperatorJson {
    fn from(op: &Operator) -> Self {
        OperatorJson {
            dim: op.dim(),
            entries: pairs(op.entries()),
        }
    }
}

impl TryFrom<OperatorJson> for Operator {
    type Error = Error;

    fn try_from(json: OperatorJson) -> Result<Self> {
        Operator::from_entries(json.dim, complexes(&json.entries))
    }
}

impl From<&StateVector> for StateVectorJson {
    fn from(psi: &StateVector) -> Self {
        StateVectorJson {
            n_qubits: psi.n_qubits(),
            amplitudes: pairs(psi.amplitudes()),
        }
    }
}

impl TryFrom<StateVectorJson> for StateVector {
    type Error = Error;

    fn try_from(json: StateVectorJson) -> Result<Self> {
        StateVector::new(json.n_qubits, complexes(&json.amplitudes))
    }
}

impl Operator {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&OperatorJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<OperatorJson>(text)?.try_into()
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        let dim = u32::try_from(self.dim())
            .map_err(|_| Error::Format(format!("dimension {} does not fit in u32", self.dim())))?;
        w.write_all(OPERATOR_MAGIC)?;
        w.write_all(&dim.to_le_bytes())?;
        for z in self.entries() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 16 * self.entries().len());
        self.write_binary(&mut out)
            .expect("writing to a Vec cannot fail");
        out
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != OPERATOR_MAGIC {
            return Err(Error::Format("bad operator magic".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let dim = u32::from_le_bytes(word) as usize;
        let count = dim
            .checked_mul(dim)
            .ok_or_else(|| Error::Format("dimension overflow".into()))?;
        let mut raw = vec![0u8; count * 16];
        r.read_exact(&mut raw)?;
        let entries = raw
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                C64::new(re, im)
            })
            .collect();
        Operator::from_entries(dim, entries)
    }
}

impl StateVector {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&StateVectorJson::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<StateVectorJson>(text)?.try_into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::dft;

    #[test]
    fn binary_layout() {
        let op = Operator::identity(2);
        let bytes = op.to_binary();
        assert_eq!(&bytes[..4], b"RMTL");
        assert_eq!(&bytes[4..8], &2u32.to_le_bytes());
        assert_eq!(bytes.len(), 8 + 2 * 4 * 8);
        assert_eq!(&bytes[8..16], &1.0f64.to_le_bytes());
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let op = dft(5, true);
        let back = Operator::read_binary(op.to_binary().as_slice()).unwrap();
        for (a, b) in op.entries().iter().zip(back.entries()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn json_round_trip() {
        let op = dft(3, false);
        let text = op.to_json().unwrap();
        assert!(text.starts_with("{\"dim\":3,\"entries\":[["));
        assert_eq!(Operator::from_json(&text).unwrap().entries(), op.entries());

        let psi = StateVector::basis(2, 1).unwrap();
        let text = psi.to_json().unwrap();
        assert_eq!(
            text,
            "{\"n_qubits\":2,\"amplitudes\":[[0.0,0.0],[1.0,0.0],[0.0,0.0],[0.0,0.0]]}"
        );
        assert_eq!(StateVector::from_json(&text).unwrap(), psi);
    }

    #[test]
    fn rejects_truncated_or_foreign_data() {
        let bytes = Operator::identity(3).to_binary();
        assert!(Operator::read_binary(&bytes[..bytes.len() - 1]).is_err());
        assert!(matches!(
            Operator::read_binary(&b"XXXX\x01\0\0\0"[..]),
            Err(Error::Format(_))
        ));
        assert!(Operator::from_json("{\"dim\":2,\"entries\":[[1,0]]}").is_err());
    }
}
