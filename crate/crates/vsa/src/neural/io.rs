//! Binary model checkpoints.
//!
//! Header: magic "VSAM", version u16, head kind u8, feature-normalize
//! flag u8, input dim u32, hidden dim u32, head dim u32 (d for vector
//! heads, L for fc), label count u32, init seed u64, codebook seed u64
//! (0 for fc). The body is every parameter as little-endian f64 in
//! layer order (w1, b1, w2, b2, head stage). Vector heads rebuild their
//! codebook from (algebra, d, L, codebook seed) on load.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::codec::Codebook;
use crate::error::VsaError;
use crate::Result;

use super::{HeadKind, MlpModel};

const MODEL_MAGIC: &[u8; 4] = b"VSAM";
const MODEL_VERSION: u16 = 1;

impl MlpModel {
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let head_dim = match self.head {
            HeadKind::Fc => self.num_labels,
            _ => self.code_dim,
        } as u32;
        let codebook_seed = self.codebook.as_ref().map(|c| c.seed()).unwrap_or(0);

        w.write_all(MODEL_MAGIC)?;
        w.write_all(&MODEL_VERSION.to_le_bytes())?;
        w.write_all(&[self.head.tag()])?;
        w.write_all(&[self.normalize_features as u8])?;
        w.write_all(&(self.input_dim as u32).to_le_bytes())?;
        w.write_all(&(self.hidden_dim as u32).to_le_bytes())?;
        w.write_all(&head_dim.to_le_bytes())?;
        w.write_all(&(self.num_labels as u32).to_le_bytes())?;
        w.write_all(&self.init_seed.to_le_bytes())?;
        w.write_all(&codebook_seed.to_le_bytes())?;
        for p in self.params() {
            w.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MODEL_MAGIC {
            return Err(VsaError::BadFormat("bad model magic".into()));
        }
        let mut u16buf = [0u8; 2];
        r.read_exact(&mut u16buf)?;
        let version = u16::from_le_bytes(u16buf);
        if version != MODEL_VERSION {
            return Err(VsaError::BadFormat(format!(
                "unsupported model version {}",
                version
            )));
        }
        let mut byte = [0u8; 1];
        r.read_exact(&mut byte)?;
        let head = HeadKind::from_tag(byte[0])?;
        r.read_exact(&mut byte)?;
        let normalize = match byte[0] {
            0 => false,
            1 => true,
            other => {
                return Err(VsaError::BadFormat(format!(
                    "bad normalize flag {}",
                    other
                )))
            }
        };
        let mut u32buf = [0u8; 4];
        let mut read_u32 = |r: &mut R| -> Result<u32> {
            r.read_exact(&mut u32buf)?;
            Ok(u32::from_le_bytes(u32buf))
        };
        let input_dim = read_u32(&mut r)? as usize;
        let hidden_dim = read_u32(&mut r)? as usize;
        let head_dim = read_u32(&mut r)? as usize;
        let num_labels = read_u32(&mut r)? as usize;
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u64buf)?;
        let init_seed = u64::from_le_bytes(u64buf);
        r.read_exact(&mut u64buf)?;
        let codebook_seed = u64::from_le_bytes(u64buf);

        let mut model = match head {
            HeadKind::Fc => {
                if head_dim != num_labels {
                    return Err(VsaError::BadFormat(
                        "fc head dim must equal the label count".into(),
                    ));
                }
                MlpModel::new_fc(input_dim, hidden_dim, num_labels, init_seed)?
            }
            _ => {
                let algebra = head.algebra().expect("vector head");
                let codebook = Codebook::generate(algebra, head_dim, num_labels, codebook_seed)?;
                MlpModel::new_with_codebook(head, input_dim, hidden_dim, codebook, init_seed)?
            }
        };
        model.set_feature_normalization(normalize);

        let count = model.param_count();
        let mut params = Vec::with_capacity(count);
        let mut f64buf = [0u8; 8];
        for _ in 0..count {
            r.read_exact(&mut f64buf)?;
            params.push(f64::from_le_bytes(f64buf));
        }
        // Trailing bytes mean the header and body disagree.
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(VsaError::BadFormat("model file has trailing bytes".into()));
        }
        model.set_params(&params)?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::Algebra;

    #[test]
    fn checkpoint_round_trip_is_byte_identical() {
        for head in [
            HeadKind::Fc,
            HeadKind::Hrr,
            HeadKind::Chrr,
            HeadKind::ChrrHalf,
            HeadKind::ChrrSin,
            HeadKind::ChrrTanh,
        ] {
            let model = match head {
                HeadKind::Fc => MlpModel::new_fc(12, 6, 9, 77).unwrap(),
                _ => {
                    let cb =
                        Codebook::generate(head.algebra().unwrap(), 4, 9, 55).unwrap();
                    MlpModel::new_with_codebook(head, 12, 6, cb, 77).unwrap()
                }
            };
            let mut first = Vec::new();
            model.write_to(&mut first).unwrap();
            let reloaded = MlpModel::read_from(first.as_slice()).unwrap();
            let mut second = Vec::new();
            reloaded.write_to(&mut second).unwrap();
            assert_eq!(first, second, "head {}", head);
            assert_eq!(reloaded.params(), model.params());
            assert_eq!(reloaded.head(), head);
        }
    }

    #[test]
    fn reloaded_codebook_matches_the_original() {
        let cb = Codebook::generate(Algebra::Chrr, 8, 5, 123).unwrap();
        let model = MlpModel::new_with_codebook(HeadKind::Chrr, 10, 4, cb, 3).unwrap();
        let mut bytes = Vec::new();
        model.write_to(&mut bytes).unwrap();
        let reloaded = MlpModel::read_from(bytes.as_slice()).unwrap();
        let a = model.codebook().unwrap();
        let b = reloaded.codebook().unwrap();
        assert_eq!(a.seed(), b.seed());
        for id in 0..5 {
            assert_eq!(a.label_vector(id).unwrap(), b.label_vector(id).unwrap());
        }
    }

    #[test]
    fn load_rejects_truncated_or_foreign_files() {
        assert!(MlpModel::read_from(&b"VSAX"[..]).is_err());
        let model = MlpModel::new_fc(4, 3, 2, 0).unwrap();
        let mut bytes = Vec::new();
        model.write_to(&mut bytes).unwrap();
        bytes.truncate(bytes.len() - 4);
        assert!(MlpModel::read_from(bytes.as_slice()).is_err());
        bytes.extend_from_slice(&[0u8; 12]);
        assert!(MlpModel::read_from(bytes.as_slice()).is_err());
    }
}
