//! Named parameter storage, the Adam optimizer, and checkpoint I/O.
//!
//! Parameters live in a [`ParamStore`] keyed by path-like strings
//! (`"smu/+/push.w"`). The store also owns the Adam first/second moment
//! tensors and the global step counter, so a checkpoint restores the
//! optimizer exactly and training resumes bit-for-bit.
//!
//! # Checkpoint format
//!
//! Little-endian binary:
//!
//! ```text
//! magic  b"TSMU"
//! u32    format version (currently 1)
//! u64    meta length, then that many bytes of UTF-8 (caller-defined JSON)
//! u64    Adam step counter
//! u64    number of parameters
//! per parameter, sorted by key:
//!   u64 key length, key bytes,
//!   u64 rows, u64 cols,
//!   rows*cols f64 value, rows*cols f64 first moment, rows*cols f64 second moment
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::tensor::Tensor;

/// Gradients keyed like the store; BTreeMap so iteration order (and thus
/// update order) is deterministic.
pub type GradMap = BTreeMap<String, Tensor>;

/// Accumulate `g` into `acc` (sum; callers divide for means).
pub fn accumulate_grads(acc: &mut GradMap, g: &GradMap) {
    for (k, t) in g {
        match acc.get_mut(k) {
            Some(a) => a.add_in_place(t),
            None => {
                acc.insert(k.clone(), t.clone());
            }
        }
    }
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig { lr: 0.001, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 1e-5 }
    }
}

#[derive(Debug)]
pub enum ParamError {
    DuplicateKey(String),
    UnknownKey(String),
    GradShape { key: String, param: (usize, usize), grad: (usize, usize) },
    Io(std::io::Error),
    Format(String),
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::DuplicateKey(k) => write!(f, "duplicate parameter key: {k}"),
            ParamError::UnknownKey(k) => write!(f, "unknown parameter key: {k}"),
            ParamError::GradShape { key, param, grad } => write!(
                f,
                "gradient shape {grad:?} does not match parameter {key} of shape {param:?}"
            ),
            ParamError::Io(e) => write!(f, "checkpoint io error: {e}"),
            ParamError::Format(m) => write!(f, "checkpoint format error: {m}"),
        }
    }
}

impl std::error::Error for ParamError {}

impl From<std::io::Error> for ParamError {
    fn from(e: std::io::Error) -> Self {
        ParamError::Io(e)
    }
}

struct Slot {
    value: Tensor,
    m: Tensor,
    v: Tensor,
}

#[derive(Default)]
pub struct ParamStore {
    slots: BTreeMap<String, Slot>,
    step: u64,
}

impl ParamStore {
    pub fn new() -> Self {
        ParamStore::default()
    }

    /// Insert a parameter with zeroed optimizer moments. Panics on
    /// duplicate keys: those are construction bugs, not runtime conditions.
    pub fn insert(&mut self, key: impl Into<String>, value: Tensor) {
        let key = key.into();
        let (r, c) = value.shape();
        let prev = self.slots.insert(
            key.clone(),
            Slot { value, m: Tensor::zeros(r, c), v: Tensor::zeros(r, c) },
        );
        assert!(prev.is_none(), "duplicate parameter key: {key}");
    }

    pub fn get(&self, key: &str) -> Option<&Tensor> {
        self.slots.get(key).map(|s| &s.value)
    }

    pub fn get_mut(&mut self, key: &str) -> Option<&mut Tensor> {
        self.slots.get_mut(key).map(|s| &mut s.value)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.slots.contains_key(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.slots.keys().map(|s| s.as_str())
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Total number of scalar parameters.
    pub fn scalar_count(&self) -> usize {
        self.slots.values().map(|s| s.value.len()).sum()
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    /// Adam moments for a key (first, second); exposed for tests.
    pub fn moments(&self, key: &str) -> Option<(&Tensor, &Tensor)> {
        self.slots.get(key).map(|s| (&s.m, &s.v))
    }

    /// One Adam step over the keys present in `grads`. Weight decay is
    /// applied as gradient augmentation g ← g + wd·θ before the moment
    /// updates; bias correction uses the incremented step count. Parameters
    /// absent from `grads` (e.g. cells for function types a batch never
    /// used) are left untouched, moments included.
    pub fn adam_step(&mut self, grads: &GradMap, cfg: &AdamConfig) -> Result<(), ParamError> {
        // Validate everything first so a failed call leaves the store unchanged.
        for (key, g) in grads {
            let slot = self
                .slots
                .get(key)
                .ok_or_else(|| ParamError::UnknownKey(key.clone()))?;
            if slot.value.shape() != g.shape() {
                return Err(ParamError::GradShape {
                    key: key.clone(),
                    param: slot.value.shape(),
                    grad: g.shape(),
                });
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - cfg.beta1.powi(t);
        let bc2 = 1.0 - cfg.beta2.powi(t);
        for (key, g) in grads {
            let slot = self.slots.get_mut(key).expect("validated above");
            let theta = slot.value.data_mut();
            let m = slot.m.data_mut();
            let v = slot.v.data_mut();
            for i in 0..theta.len() {
                let gi = g.data()[i] + cfg.weight_decay * theta[i];
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * gi;
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * gi * gi;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                theta[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
            }
        }
        Ok(())
    }

    /// Write the store plus a caller-supplied metadata string.
    pub fn save(&self, path: &Path, meta: &str) -> Result<(), ParamError> {
        let file = File::create(path)?;
        let mut w = BufWriter::new(file);
        w.write_all(b"TSMU")?;
        w.write_all(&1u32.to_le_bytes())?;
        w.write_all(&(meta.len() as u64).to_le_bytes())?;
        w.write_all(meta.as_bytes())?;
        w.write_all(&self.step.to_le_bytes())?;
        w.write_all(&(self.slots.len() as u64).to_le_bytes())?;
        for (key, slot) in &self.slots {
            w.write_all(&(key.len() as u64).to_le_bytes())?;
            w.write_all(key.as_bytes())?;
            w.write_all(&(slot.value.rows() as u64).to_le_bytes())?;
            w.write_all(&(slot.value.cols() as u64).to_le_bytes())?;
            for t in [&slot.value, &slot.m, &slot.v] {
                for x in t.data() {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Read a checkpoint; returns the metadata string and the store.
    pub fn load(path: &Path) -> Result<(String, ParamStore), ParamError> {
        let file = File::open(path)?;
        let mut r = BufReader::new(file);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != b"TSMU" {
            return Err(ParamError::Format(format!("bad magic {magic:?}")));
        }
        let version = read_u32(&mut r)?;
        if version != 1 {
            return Err(ParamError::Format(format!("unsupported version {version}")));
        }
        let meta_len = read_u64(&mut r)? as usize;
        let mut meta = vec![0u8; meta_len];
        r.read_exact(&mut meta)?;
        let meta = String::from_utf8(meta)
            .map_err(|e| ParamError::Format(format!("meta not utf-8: {e}")))?;
        let step = read_u64(&mut r)?;
        let n = read_u64(&mut r)? as usize;
        let mut store = ParamStore { slots: BTreeMap::new(), step };
        for _ in 0..n {
            let key_len = read_u64(&mut r)? as usize;
            let mut key = vec![0u8; key_len];
            r.read_exact(&mut key)?;
            let key = String::from_utf8(key)
                .map_err(|e| ParamError::Format(format!("key not utf-8: {e}")))?;
            let rows = read_u64(&mut r)? as usize;
            let cols = read_u64(&mut r)? as usize;
            if rows == 0 || cols == 0 || rows.saturating_mul(cols) > (1 << 32) {
                return Err(ParamError::Format(format!("implausible shape {rows}x{cols} for {key}")));
            }
            let value = read_tensor(&mut r, rows, cols)?;
            let m = read_tensor(&mut r, rows, cols)?;
            let v = read_tensor(&mut r, rows, cols)?;
            if store.slots.insert(key.clone(), Slot { value, m, v }).is_some() {
                return Err(ParamError::Format(format!("duplicate key {key}")));
            }
        }
        Ok((meta, store))
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32, ParamError> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut impl Read) -> Result<u64, ParamError> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_tensor(r: &mut impl Read, rows: usize, cols: usize) -> Result<Tensor, ParamError> {
    let mut buf = vec![0u8; rows * cols * 8];
    r.read_exact(&mut buf)?;
    let data = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(Tensor::from_vec(rows, cols, data))
}
