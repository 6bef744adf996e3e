//! Self-describing binary model file.
//!
//! Layout (little-endian): 8-byte magic, format version, trained flag,
//! minority label, dims, per-column kinds/names/scaler, then the four
//! networks as layer shapes followed by parameters in row-major order.
//! Save -> load round-trips bit-exactly.

use std::path::Path;

use super::model::VosModel;
use crate::data::{write_atomic, ColumnScale, FeatureKind, ScalerParams};
use crate::error::{Error, Result};
use crate::nn::{Activation, DenseNet, Layer};

pub const MAGIC: [u8; 8] = *b"VOSMODEL";
pub const FORMAT_VERSION: u32 = 1;

/// Everything needed to generate data from a trained model without the
/// original CSV: the model itself, the scaler fitted on its training split,
/// column names, and which label is the minority.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelArtifact {
    pub model: VosModel,
    pub scaler: ScalerParams,
    pub column_names: Vec<String>,
    pub minority_label: u8,
}

struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    fn new() -> Self {
        Writer { buf: Vec::new() }
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.buf.extend_from_slice(s.as_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(buf: &'a [u8]) -> Self {
        Reader { buf, pos: 0 }
    }
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::ModelFormat("unexpected end of file".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        let bytes = self.take(n)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::ModelFormat("invalid utf-8 in column name".into()))
    }
    fn done(&self) -> bool {
        self.pos == self.buf.len()
    }
}

fn write_net(w: &mut Writer, net: &DenseNet) {
    w.u32(net.layers().len() as u32);
    for layer in net.layers() {
        w.u32(layer.in_dim() as u32);
        w.u32(layer.out_dim() as u32);
        w.u8(layer.activation().tag());
        for &v in layer.weights() {
            w.f64(v);
        }
        for &v in layer.biases() {
            w.f64(v);
        }
    }
}

fn read_net(r: &mut Reader) -> Result<DenseNet> {
    let n_layers = r.u32()? as usize;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let in_dim = r.u32()? as usize;
        let out_dim = r.u32()? as usize;
        let act = Activation::from_tag(r.u8()?)
            .ok_or_else(|| Error::ModelFormat("unknown activation tag".into()))?;
        let mut weights = Vec::with_capacity(in_dim * out_dim);
        for _ in 0..in_dim * out_dim {
            weights.push(r.f64()?);
        }
        let mut biases = Vec::with_capacity(out_dim);
        for _ in 0..out_dim {
            biases.push(r.f64()?);
        }
        layers.push(Layer::from_parts(weights, biases, in_dim, out_dim, act)?);
    }
    DenseNet::from_layers(layers)
}

impl ModelArtifact {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.buf.extend_from_slice(&MAGIC);
        w.u32(FORMAT_VERSION);
        w.u8(u8::from(self.model.is_trained()));
        w.u8(self.minority_label);

        let dims = self.model.dims();
        w.u32(dims.n_features as u32);
        w.u32(dims.latent1 as u32);
        w.u32(dims.latent2 as u32);

        for kind in self.model.kinds() {
            w.u8(match kind {
                FeatureKind::Continuous => 0,
                FeatureKind::Binary => 1,
            });
        }
        for name in &self.column_names {
            w.str(name);
        }
        for col in &self.scaler.columns {
            w.f64(col.mean);
            w.f64(col.std);
            w.u8(u8::from(col.scaled));
        }
        for net in self.model.networks() {
            write_net(&mut w, net);
        }
        w.buf
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        if r.take(8)? != MAGIC {
            return Err(Error::ModelFormat("bad magic header".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::ModelFormat(format!(
                "unsupported format version {version}"
            )));
        }
        let trained = r.u8()? != 0;
        let minority_label = r.u8()?;
        let n_features = r.u32()? as usize;
        let latent1 = r.u32()? as usize;
        let latent2 = r.u32()? as usize;

        let mut kinds = Vec::with_capacity(n_features);
        for _ in 0..n_features {
            kinds.push(match r.u8()? {
                0 => FeatureKind::Continuous,
                1 => FeatureKind::Binary,
                t => return Err(Error::ModelFormat(format!("unknown feature kind {t}"))),
            });
        }
        let mut column_names = Vec::with_capacity(n_features);
        for _ in 0..n_features {
            column_names.push(r.str()?);
        }
        let mut columns = Vec::with_capacity(n_features);
        for _ in 0..n_features {
            let mean = r.f64()?;
            let std = r.f64()?;
            let scaled = r.u8()? != 0;
            columns.push(ColumnScale { mean, std, scaled });
        }

        let obs_encoder = read_net(&mut r)?;
        let latent_encoder = read_net(&mut r)?;
        let latent_decoder = read_net(&mut r)?;
        let obs_decoder = read_net(&mut r)?;
        if !r.done() {
            return Err(Error::ModelFormat("trailing bytes".into()));
        }

        let model = VosModel::from_parts(
            obs_encoder,
            latent_encoder,
            latent_decoder,
            obs_decoder,
            kinds,
            trained,
        )?;
        let dims = model.dims();
        if dims.n_features != n_features || dims.latent1 != latent1 || dims.latent2 != latent2 {
            return Err(Error::ModelFormat("dims disagree with layer shapes".into()));
        }
        Ok(ModelArtifact {
            model,
            scaler: ScalerParams { columns },
            column_names,
            minority_label,
        })
    }

    /// Atomic write (temp file + rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::from_bytes(&bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vos::model::Architecture;

    fn artifact() -> ModelArtifact {
        let kinds = vec![
            FeatureKind::Continuous,
            FeatureKind::Binary,
            FeatureKind::Continuous,
        ];
        let arch = Architecture::symmetric(5, 3, 2);
        let model = VosModel::new(&kinds, &arch, 77).unwrap();
        ModelArtifact {
            model,
            scaler: ScalerParams {
                columns: vec![
                    ColumnScale {
                        mean: 0.25,
                        std: 1.5,
                        scaled: true,
                    },
                    ColumnScale {
                        mean: 0.0,
                        std: 1.0,
                        scaled: false,
                    },
                    ColumnScale {
                        mean: -3.75,
                        std: 0.01,
                        scaled: true,
                    },
                ],
            },
            column_names: vec!["amount".into(), "flag".into(), "v1".into()],
            minority_label: 1,
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let a = artifact();
        let bytes = a.to_bytes();
        let b = ModelArtifact::from_bytes(&bytes).unwrap();
        assert_eq!(a, b);
        assert_eq!(bytes, b.to_bytes());
    }

    #[test]
    fn save_load_file_round_trip() {
        let a = artifact();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.vos");
        a.save(&path).unwrap();
        let b = ModelArtifact::load(&path).unwrap();
        assert_eq!(a, b);
        // Byte-identical on disk when saved twice.
        let path2 = dir.path().join("model2.vos");
        a.save(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
    }

    #[test]
    fn bad_magic_is_rejected() {
        let mut bytes = artifact().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(
            ModelArtifact::from_bytes(&bytes),
            Err(Error::ModelFormat(_))
        ));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let bytes = artifact().to_bytes();
        let cut = &bytes[..bytes.len() - 3];
        assert!(ModelArtifact::from_bytes(cut).is_err());
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let mut bytes = artifact().to_bytes();
        bytes[8] = 99;
        assert!(matches!(
            ModelArtifact::from_bytes(&bytes),
            Err(Error::ModelFormat(_))
        ));
    }
}
