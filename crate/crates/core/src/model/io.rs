//! Binary model files: `PSIM`, format version (u32), config block, then the
//! six parameter arrays in declared order, each as a u64 count followed by
//! that many f64 values. Everything little-endian.

use super::{ModelConfig, ModelError, Params, PerceptionModel};
use std::path::Path;

pub const MAGIC: &[u8; 4] = b"PSIM";
pub const FORMAT_VERSION: u32 = 1;

pub fn save_model(model: &PerceptionModel, path: &Path) -> Result<(), ModelError> {
    std::fs::write(path, to_bytes(model)).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))
}

pub fn load_model(path: &Path) -> Result<PerceptionModel, ModelError> {
    let bytes = std::fs::read(path).map_err(|e| ModelError::Io(format!("{}: {e}", path.display())))?;
    from_bytes(&bytes)
}

pub fn to_bytes(model: &PerceptionModel) -> Vec<u8> {
    let c = &model.config;
    let mut out = Vec::with_capacity(64 + 8 * model.params.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for v in [c.input_dim, c.hidden_dim, c.embed_dim, c.n_subreps] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for v in [c.margin, c.aux_weight, c.learning_rate] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&(c.epochs as u64).to_le_bytes());
    out.extend_from_slice(&c.seed.to_le_bytes());
    for array in model.params.arrays() {
        out.extend_from_slice(&(array.len() as u64).to_le_bytes());
        for v in array {
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
    fn take<const N: usize>(&mut self) -> Result<[u8; N], ModelError> {
        let end = self.pos + N;
        let slice = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| ModelError::CorruptFile(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(slice.try_into().expect("slice length is N"))
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        self.take::<8>().map(u64::from_le_bytes)
    }

    fn usize(&mut self) -> Result<usize, ModelError> {
        usize::try_from(self.u64()?).map_err(|_| ModelError::CorruptFile("size out of range".into()))
    }

    fn f64(&mut self) -> Result<f64, ModelError> {
        self.take::<8>().map(f64::from_le_bytes)
    }
}

pub fn from_bytes(bytes: &[u8]) -> Result<PerceptionModel, ModelError> {
    let mut r = Reader { bytes, pos: 0 };
    if &r.take::<4>()? != MAGIC {
        return Err(ModelError::CorruptFile("missing PSIM magic".into()));
    }
    let version = u32::from_le_bytes(r.take::<4>()?);
    if version != FORMAT_VERSION {
        return Err(ModelError::VersionMismatch {
            found: version,
            expected: FORMAT_VERSION,
        });
    }
    let config = ModelConfig {
        input_dim: r.usize()?,
        hidden_dim: r.usize()?,
        embed_dim: r.usize()?,
        n_subreps: r.usize()?,
        margin: r.f64()?,
        aux_weight: r.f64()?,
        learning_rate: r.f64()?,
        epochs: r.usize()?,
        seed: r.u64()?,
    };
    config
        .validate()
        .map_err(|e| ModelError::CorruptFile(e.to_string()))?;
    let mut params = Params::zeros(&config);
    for (k, array) in params.arrays_mut().into_iter().enumerate() {
        let n = r.usize()?;
        if n != array.len() {
            return Err(ModelError::CorruptFile(format!(
                "parameter array {k} has {n} values, config implies {}",
                array.len()
            )));
        }
        for v in array.iter_mut() {
            *v = r.f64()?;
        }
    }
    if r.pos != bytes.len() {
        return Err(ModelError::CorruptFile(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    PerceptionModel::from_parts(config, params).map_err(|e| ModelError::CorruptFile(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model() -> PerceptionModel {
        PerceptionModel::initialize(&ModelConfig {
            seed: 9,
            ..ModelConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn round_trip_is_bit_identical() {
        let m = model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.psim");
        save_model(&m, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, m);
        let x = [0.25; 23];
        let a = m.forward_values(&x).unwrap();
        let b = back.forward_values(&x).unwrap();
        assert_eq!(a.embedding.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.embedding.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let bytes = to_bytes(&model());
        for cut in [0, 3, 10, bytes.len() / 2, bytes.len() - 1] {
            assert!(matches!(from_bytes(&bytes[..cut]), Err(ModelError::CorruptFile(_))), "cut {cut}");
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(from_bytes(&extra), Err(ModelError::CorruptFile(_))));
    }

    #[test]
    fn version_gate() {
        let mut bytes = to_bytes(&model());
        bytes[4..8].copy_from_slice(&2u32.to_le_bytes());
        assert_eq!(
            from_bytes(&bytes).unwrap_err(),
            ModelError::VersionMismatch { found: 2, expected: 1 }
        );
    }
}
