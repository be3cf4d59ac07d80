//! Single-file cine container: JSON manifest header + raw binary payload.
//!
//! Layout:
//!
//! ```text
//! [ 8-byte magic "CINEBX01" ][ u64 LE manifest length ][ manifest JSON ][ payload ]
//! ```
//!
//! Complex arrays are stored as interleaved (real, imaginary) little-endian
//! 32-bit IEEE-754; all arrays are row-major with index `(t*ny + y)*nx + x`.
//! Round trips are byte-exact for every dtype.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{CineImage, Geometry, SegmentationMask};

pub const CONTAINER_MAGIC: &[u8; 8] = b"CINEBX01";
pub const CONTAINER_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ArrayEntry {
    /// One of "c64", "f32", "u8".
    pub dtype: String,
    pub shape: Vec<usize>,
    /// Byte offset into the payload region.
    pub offset: u64,
    pub byte_len: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContainerManifest {
    pub format_version: u32,
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub dx_mm: f64,
    pub dy_mm: f64,
    pub thickness_mm: f64,
    pub tr_ms: f64,
    pub arrays: BTreeMap<String, ArrayEntry>,
}

#[derive(Debug, Clone)]
pub struct Container {
    pub manifest: ContainerManifest,
    payload: Vec<u8>,
}

fn dtype_size(dtype: &str) -> Option<usize> {
    match dtype {
        "c64" => Some(8), // two f32
        "f32" => Some(4),
        "u8" => Some(1),
        _ => None,
    }
}

impl Container {
    pub fn new(nx: usize, ny: usize, nt: usize, geometry: Geometry, tr_ms: f64) -> Self {
        Self {
            manifest: ContainerManifest {
                format_version: CONTAINER_VERSION,
                nx,
                ny,
                nt,
                dx_mm: geometry.dx_mm,
                dy_mm: geometry.dy_mm,
                thickness_mm: geometry.thickness_mm,
                tr_ms,
                arrays: BTreeMap::new(),
            },
            payload: Vec::new(),
        }
    }

    pub fn geometry(&self) -> Geometry {
        Geometry {
            dx_mm: self.manifest.dx_mm,
            dy_mm: self.manifest.dy_mm,
            thickness_mm: self.manifest.thickness_mm,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.manifest.nx, self.manifest.ny, self.manifest.nt)
    }

    pub fn has_array(&self, name: &str) -> bool {
        self.manifest.arrays.contains_key(name)
    }

    fn push_entry(&mut self, name: &str, dtype: &str, shape: Vec<usize>, bytes: Vec<u8>) {
        let offset = self.payload.len() as u64;
        let byte_len = bytes.len() as u64;
        self.payload.extend_from_slice(&bytes);
        self.manifest.arrays.insert(
            name.to_string(),
            ArrayEntry {
                dtype: dtype.to_string(),
                shape,
                offset,
                byte_len,
            },
        );
    }

    /// Store a complex array as interleaved f32 pairs.
    pub fn add_c64(&mut self, name: &str, shape: Vec<usize>, data: &[Complex64]) {
        let mut bytes = Vec::with_capacity(data.len() * 8);
        for c in data {
            bytes.extend_from_slice(&(c.re as f32).to_le_bytes());
            bytes.extend_from_slice(&(c.im as f32).to_le_bytes());
        }
        self.push_entry(name, "c64", shape, bytes);
    }

    pub fn add_f32(&mut self, name: &str, shape: Vec<usize>, data: &[f32]) {
        let mut bytes = Vec::with_capacity(data.len() * 4);
        for v in data {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        self.push_entry(name, "f32", shape, bytes);
    }

    pub fn add_f32_from_f64(&mut self, name: &str, shape: Vec<usize>, data: &[f64]) {
        let f32s: Vec<f32> = data.iter().map(|&v| v as f32).collect();
        self.add_f32(name, shape, &f32s);
    }

    pub fn add_u8(&mut self, name: &str, shape: Vec<usize>, data: &[u8]) {
        self.push_entry(name, "u8", shape, data.to_vec());
    }

    fn entry(&self, name: &str) -> Result<&ArrayEntry> {
        self.manifest
            .arrays
            .get(name)
            .ok_or_else(|| Error::UnknownArray(name.to_string()))
    }

    fn raw(&self, name: &str) -> Result<&[u8]> {
        let e = self.entry(name)?;
        let start = e.offset as usize;
        let end = start + e.byte_len as usize;
        Ok(&self.payload[start..end])
    }

    pub fn array_shape(&self, name: &str) -> Result<&[usize]> {
        Ok(&self.entry(name)?.shape)
    }

    pub fn get_c64(&self, name: &str) -> Result<Vec<Complex64>> {
        let bytes = self.raw(name)?;
        let mut out = Vec::with_capacity(bytes.len() / 8);
        for pair in bytes.chunks_exact(8) {
            let re = f32::from_le_bytes([pair[0], pair[1], pair[2], pair[3]]) as f64;
            let im = f32::from_le_bytes([pair[4], pair[5], pair[6], pair[7]]) as f64;
            out.push(Complex64::new(re, im));
        }
        Ok(out)
    }

    pub fn get_f32(&self, name: &str) -> Result<Vec<f32>> {
        let bytes = self.raw(name)?;
        Ok(bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect())
    }

    pub fn get_f64(&self, name: &str) -> Result<Vec<f64>> {
        Ok(self.get_f32(name)?.into_iter().map(|v| v as f64).collect())
    }

    pub fn get_u8(&self, name: &str) -> Result<Vec<u8>> {
        Ok(self.raw(name)?.to_vec())
    }

    /// Load a `[nt, ny, nx]` c64 or f32 array as a cine image.
    pub fn image(&self, name: &str) -> Result<CineImage> {
        let (nx, ny, nt) = self.dims();
        let e = self.entry(name)?;
        if e.shape != [nt, ny, nx] {
            return Err(Error::DimMismatch(format!(
                "array '{}' shape {:?} does not match container dims [{}, {}, {}]",
                name, e.shape, nt, ny, nx
            )));
        }
        let data = match e.dtype.as_str() {
            "c64" => self.get_c64(name)?,
            "f32" => self
                .get_f32(name)?
                .into_iter()
                .map(|v| Complex64::new(v as f64, 0.0))
                .collect(),
            other => {
                return Err(Error::InvalidParam(format!(
                    "array '{}' has dtype {}, expected c64 or f32",
                    name, other
                )))
            }
        };
        CineImage::from_vec(nx, ny, nt, self.geometry(), self.manifest.tr_ms, data)
    }

    pub fn put_image(&mut self, name: &str, image: &CineImage) {
        let (nx, ny, nt) = image.dims();
        self.add_c64(name, vec![nt, ny, nx], image.data());
    }

    /// Load a `[nt, ny, nx]` u8 array as a segmentation mask, validating labels.
    pub fn labels(&self, name: &str) -> Result<SegmentationMask> {
        let (nx, ny, nt) = self.dims();
        let e = self.entry(name)?;
        if e.shape != [nt, ny, nx] {
            return Err(Error::DimMismatch(format!(
                "array '{}' shape {:?} does not match container dims [{}, {}, {}]",
                name, e.shape, nt, ny, nx
            )));
        }
        SegmentationMask::from_labels(nx, ny, nt, self.geometry(), self.get_u8(name)?)
    }

    pub fn put_labels(&mut self, name: &str, mask: &SegmentationMask) {
        let (nx, ny, nt) = mask.dims();
        self.add_u8(name, vec![nt, ny, nx], mask.labels());
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let manifest = serde_json::to_vec(&self.manifest)?;
        let mut out = Vec::with_capacity(16 + manifest.len() + self.payload.len());
        out.extend_from_slice(CONTAINER_MAGIC);
        out.extend_from_slice(&(manifest.len() as u64).to_le_bytes());
        out.extend_from_slice(&manifest);
        out.extend_from_slice(&self.payload);
        Ok(out)
    }

    /// Atomic save: write to a temp file in the same directory, then rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let bytes = self.to_bytes()?;
        write_atomic(path, &bytes)
    }

    pub fn from_bytes(bytes: &[u8], path: &Path) -> Result<Self> {
        let version_err = |detail: &str| Error::ContainerVersion {
            path: path.to_path_buf(),
            detail: detail.to_string(),
        };
        if bytes.len() < 16 {
            return Err(Error::ContainerTruncated {
                path: path.to_path_buf(),
            });
        }
        if &bytes[0..8] != CONTAINER_MAGIC {
            return Err(version_err("bad magic"));
        }
        let mlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        if bytes.len() < 16 + mlen {
            return Err(Error::ContainerTruncated {
                path: path.to_path_buf(),
            });
        }
        let manifest: ContainerManifest = serde_json::from_slice(&bytes[16..16 + mlen])?;
        if manifest.format_version != CONTAINER_VERSION {
            return Err(version_err(&format!(
                "unsupported format version {}",
                manifest.format_version
            )));
        }
        let payload = bytes[16 + mlen..].to_vec();
        for (name, e) in &manifest.arrays {
            let size = dtype_size(&e.dtype)
                .ok_or_else(|| version_err(&format!("unsupported dtype tag '{}'", e.dtype)))?;
            let expected = e.shape.iter().product::<usize>() * size;
            if expected as u64 != e.byte_len {
                return Err(Error::ContainerShape {
                    path: path.to_path_buf(),
                    name: name.clone(),
                });
            }
            if (e.offset + e.byte_len) as usize > payload.len() {
                return Err(Error::ContainerTruncated {
                    path: path.to_path_buf(),
                });
            }
        }
        Ok(Self { manifest, payload })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path)?;
        Self::from_bytes(&bytes, path)
    }
}

/// Write bytes to `path` atomically (temp file + rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp: PathBuf = path.with_extension("tmp-write");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn tmp_path(name: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("cineaq-container-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        dir.join(name)
    }

    #[test]
    fn round_trip_is_byte_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data: Vec<Complex64> = (0..4 * 4 * 2)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        let mut c = Container::new(4, 4, 2, Geometry::default(), 2.6);
        c.add_c64("image", vec![2, 4, 4], &data);
        c.add_u8("labels", vec![2, 4, 4], &vec![3u8; 32]);
        c.add_f32("areas", vec![2], &[1.5, 2.5]);

        let path = tmp_path("rt.cine");
        c.save(&path).unwrap();
        let loaded = Container::load(&path).unwrap();
        let path2 = tmp_path("rt2.cine");
        loaded.save(&path2).unwrap();
        assert_eq!(fs::read(&path).unwrap(), fs::read(&path2).unwrap());

        // f64 -> f32 -> f64 -> f32 is stable, so values survive one more pass
        let back = loaded.get_c64("image").unwrap();
        let expected: Vec<Complex64> = data
            .iter()
            .map(|c| Complex64::new(c.re as f32 as f64, c.im as f32 as f64))
            .collect();
        assert_eq!(back, expected);
        assert_eq!(loaded.get_u8("labels").unwrap(), vec![3u8; 32]);
    }

    #[test]
    fn inflated_shape_is_shape_mismatch() {
        let mut c = Container::new(4, 4, 1, Geometry::default(), 2.6);
        c.add_f32("a", vec![4], &[0.0; 4]);
        let mut bytes = c.to_bytes().unwrap();
        // Inflate the declared shape by editing the manifest in place.
        let json_start = 16;
        let mlen = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let manifest = String::from_utf8(bytes[json_start..json_start + mlen].to_vec()).unwrap();
        let patched = manifest.replace("\"shape\":[4]", "\"shape\":[5]");
        assert_ne!(manifest, patched);
        bytes.splice(json_start..json_start + mlen, patched.bytes());
        let new_len = patched.len() as u64;
        bytes[8..16].copy_from_slice(&new_len.to_le_bytes());
        match Container::from_bytes(&bytes, Path::new("mem")) {
            Err(Error::ContainerShape { name, .. }) => assert_eq!(name, "a"),
            other => panic!("expected shape mismatch, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn unknown_dtype_is_version_error() {
        let mut c = Container::new(4, 4, 1, Geometry::default(), 2.6);
        c.add_f32("a", vec![4], &[0.0; 4]);
        c.manifest.arrays.get_mut("a").unwrap().dtype = "f16".into();
        let bytes = c.to_bytes().unwrap();
        match Container::from_bytes(&bytes, Path::new("mem")) {
            Err(Error::ContainerVersion { detail, .. }) => {
                assert!(detail.contains("f16"));
            }
            other => panic!("expected version error, got {:?}", other.map(|_| ())),
        }
    }

    #[test]
    fn truncated_payload_is_detected() {
        let mut c = Container::new(4, 4, 1, Geometry::default(), 2.6);
        c.add_f32("a", vec![4], &[0.0; 4]);
        let bytes = c.to_bytes().unwrap();
        let cut = &bytes[..bytes.len() - 3];
        match Container::from_bytes(cut, Path::new("mem")) {
            Err(Error::ContainerTruncated { .. }) => {}
            other => panic!("expected truncation error, got {:?}", other.map(|_| ())),
        }
    }
}
