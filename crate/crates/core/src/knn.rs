//! Nearest-neighbor behavior cloning.
//!
//! A [`CloneModel`] memorizes `(features, action)` pairs from demonstrations
//! and answers with the component-wise mean action of the `k` stored states
//! closest to the query in Euclidean distance. Features are the observation
//! average-pooled 8×8, i.e. a 4×16×16 grid flattened to 1024 values.
//!
//! # Model file (`.twknn`)
//!
//! All integers and floats little-endian:
//!
//! ```text
//! offset  size        field
//! 0       6           magic "TWKNN1"
//! 6       2           u16 format version (1)
//! 8       4           u32 k
//! 12      4           u32 feature length F
//! 16      8           u64 pair count N
//! 24      2           u16 extractor id length L
//! 26      L           extractor id, UTF-8 ("avgpool8")
//! 26+L    4·F·N       f32 features, pair-major
//! ...     8·3·N       f64 actions (throttle, steer, fire), pair-major
//! ```

use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::policy::{Policy, PolicyError, PolicyInput};
use crate::raster::{Observation, CHANNELS, GRID};
use crate::rng::SimRng;
use crate::world::Action;

pub const MAGIC: &[u8; 6] = b"TWKNN1";
pub const FORMAT_VERSION: u16 = 1;
pub const EXTRACTOR_ID: &str = "avgpool8";
pub const POOL: usize = 8;
pub const FEATURE_LEN: usize = CHANNELS * (GRID / POOL) * (GRID / POOL);

/// 8×8 average pooling of every channel, flattened channel-major.
pub fn pooled_features(obs: &Observation) -> Vec<f32> {
    let side = GRID / POOL;
    let mut out = vec![0.0f32; FEATURE_LEN];
    for c in 0..CHANNELS {
        let chan = obs.channel(c);
        for r in 0..GRID {
            let row = &chan[r * GRID..(r + 1) * GRID];
            let base = c * side * side + (r / POOL) * side;
            for (bc, block) in row.chunks_exact(POOL).enumerate() {
                out[base + bc] += block.iter().sum::<f32>();
            }
        }
    }
    let scale = 1.0 / (POOL * POOL) as f32;
    out.iter_mut().for_each(|v| *v *= scale);
    out
}

/// One recorded decision.
#[derive(Clone, Debug)]
pub struct DemoStep {
    pub obs: Observation,
    pub action: Action,
}

pub type Demonstration = Vec<DemoStep>;

#[derive(Clone, Debug, PartialEq)]
pub struct CloneModel {
    k: usize,
    extractor: String,
    feature_len: usize,
    features: Vec<f32>,
    actions: Vec<Action>,
}

impl CloneModel {
    /// Build a model from raw pairs.
    pub fn from_pairs(
        k: usize,
        pairs: impl IntoIterator<Item = (Vec<f32>, Action)>,
    ) -> Result<Self, PolicyError> {
        if k == 0 {
            return Err(PolicyError::InvalidK);
        }
        let mut features = Vec::new();
        let mut actions = Vec::new();
        let mut feature_len = None;
        for (f, a) in pairs {
            let expected = *feature_len.get_or_insert(f.len());
            if f.len() != expected || expected == 0 {
                return Err(PolicyError::FeatureLength {
                    expected,
                    got: f.len(),
                });
            }
            features.extend_from_slice(&f);
            actions.push(a.sanitized());
        }
        let feature_len = feature_len.ok_or(PolicyError::NoDemonstrations)?;
        Ok(Self {
            k,
            extractor: EXTRACTOR_ID.to_string(),
            feature_len,
            features,
            actions,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn extractor(&self) -> &str {
        &self.extractor
    }

    pub fn feature(&self, i: usize) -> &[f32] {
        &self.features[i * self.feature_len..(i + 1) * self.feature_len]
    }

    pub fn action(&self, i: usize) -> Action {
        self.actions[i]
    }

    pub fn with_k(mut self, k: usize) -> Result<Self, PolicyError> {
        if k == 0 {
            return Err(PolicyError::InvalidK);
        }
        self.k = k;
        Ok(self)
    }

    /// Indices of the `k` nearest stored pairs, nearest first; equal
    /// distances resolve to the earlier index.
    pub fn neighbors(&self, query: &[f32]) -> Vec<usize> {
        let k = self.k.min(self.len());
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for i in 0..self.len() {
            let d: f64 = self
                .feature(i)
                .iter()
                .zip(query)
                .map(|(a, b)| {
                    let d = (*a - *b) as f64;
                    d * d
                })
                .sum();
            if best.len() == k && d >= best[k - 1].0 {
                continue;
            }
            let at = best.partition_point(|(bd, _)| *bd <= d);
            best.insert(at, (d, i));
            best.truncate(k);
        }
        best.into_iter().map(|(_, i)| i).collect()
    }

    /// Mean action of the `k` nearest neighbors of `query`.
    pub fn predict(&self, query: &[f32]) -> Action {
        let idx = self.neighbors(query);
        let n = idx.len() as f64;
        let mut sum = [0.0; 3];
        for i in &idx {
            for (s, v) in sum.iter_mut().zip(self.actions[*i].components()) {
                *s += v;
            }
        }
        Action::new(sum[0] / n, sum[1] / n, sum[2] / n)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<(), PolicyError> {
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.k as u32).to_le_bytes())?;
        w.write_all(&(self.feature_len as u32).to_le_bytes())?;
        w.write_all(&(self.len() as u64).to_le_bytes())?;
        w.write_all(&(self.extractor.len() as u16).to_le_bytes())?;
        w.write_all(self.extractor.as_bytes())?;
        let mut buf = Vec::with_capacity(self.features.len() * 4 + self.actions.len() * 24);
        for f in &self.features {
            buf.extend_from_slice(&f.to_le_bytes());
        }
        for a in &self.actions {
            for v in a.components() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self, PolicyError> {
        fn take<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N], PolicyError> {
            let mut b = [0u8; N];
            r.read_exact(&mut b)
                .map_err(|e| PolicyError::Format(format!("truncated header: {e}")))?;
            Ok(b)
        }
        if &take::<6, _>(&mut r)? != MAGIC {
            return Err(PolicyError::Format("bad magic".into()));
        }
        let version = u16::from_le_bytes(take(&mut r)?);
        if version != FORMAT_VERSION {
            return Err(PolicyError::Format(format!("unsupported version {version}")));
        }
        let k = u32::from_le_bytes(take(&mut r)?) as usize;
        let feature_len = u32::from_le_bytes(take(&mut r)?) as usize;
        let n = u64::from_le_bytes(take(&mut r)?) as usize;
        let id_len = u16::from_le_bytes(take(&mut r)?) as usize;
        let mut id = vec![0u8; id_len];
        r.read_exact(&mut id)
            .map_err(|e| PolicyError::Format(format!("truncated extractor id: {e}")))?;
        let extractor =
            String::from_utf8(id).map_err(|_| PolicyError::Format("extractor id not UTF-8".into()))?;
        if extractor != EXTRACTOR_ID {
            return Err(PolicyError::Format(format!("unknown feature extractor {extractor:?}")));
        }
        if k == 0 || n == 0 || feature_len == 0 {
            return Err(PolicyError::Format("empty model".into()));
        }
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        let want = n
            .checked_mul(feature_len * 4 + 24)
            .ok_or_else(|| PolicyError::Format("size overflow".into()))?;
        if body.len() != want {
            return Err(PolicyError::Format(format!(
                "payload is {} bytes, expected {want}",
                body.len()
            )));
        }
        let (fbytes, abytes) = body.split_at(n * feature_len * 4);
        let features = fbytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        let actions = abytes
            .chunks_exact(24)
            .map(|c| {
                let v = |i: usize| f64::from_le_bytes(c[i * 8..i * 8 + 8].try_into().expect("8 bytes"));
                Action {
                    throttle: v(0),
                    steer: v(1),
                    fire: v(2),
                }
            })
            .collect();
        Ok(Self {
            k,
            extractor,
            feature_len,
            features,
            actions,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), PolicyError> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, PolicyError> {
        let f = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(f))
    }
}

/// Memorize every step of every demonstration.
pub fn fit_knn_clone(demos: &[Demonstration], k: usize) -> Result<CloneModel, PolicyError> {
    if k == 0 {
        return Err(PolicyError::InvalidK);
    }
    let pairs = demos
        .iter()
        .flatten()
        .map(|step| (pooled_features(&step.obs), step.action));
    CloneModel::from_pairs(k, pairs)
}

/// Acts by looking up the pooled observation in a shared [`CloneModel`].
#[derive(Clone, Debug)]
pub struct KnnClone {
    model: Arc<CloneModel>,
}

impl KnnClone {
    pub fn new(model: Arc<CloneModel>) -> Self {
        Self { model }
    }
}

impl Policy for KnnClone {
    fn act(&mut self, input: &PolicyInput<'_>, _rng: &mut SimRng) -> Action {
        self.model.predict(&pooled_features(input.obs))
    }

    fn name(&self) -> String {
        format!("knn{}", self.model.k())
    }
}
