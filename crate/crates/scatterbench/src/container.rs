//! Binary container format: a JSON manifest plus a sibling raw file of
//! little-endian f64 (re, im) pairs in row-major order with x fastest
//! (index = ix + n*(iy + n*iz)). Round-trips are bit-exact.

use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetKind, FarFieldDataset, FarFieldRecord};
use crate::error::{Error, Result};
use crate::grid::{ComplexField3, Grid3, PotentialGrid};
use crate::spectral::SpectralField;

pub const FORMAT_VERSION: u32 = 1;
pub const FOURIER_CONVENTION: &str = "+i xi.x";

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "snake_case")]
pub enum ContainerKind {
    PotentialGrid,
    ComplexField,
    SpectralField,
    FarFieldRecords,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridMeta {
    pub n: usize,
    pub half_width_a: f64,
    pub spacing: f64,
    #[serde(default)]
    pub smoothness_l: u32,
}

/// The JSON manifest written next to the raw payload.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContainerManifest {
    pub format_version: u32,
    pub kind: ContainerKind,
    pub endianness: String,
    pub fourier_convention: String,
    /// Payload file name (sibling of the manifest).
    pub data_file: String,
    /// Number of (re, im) pairs in the payload.
    pub count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridMeta>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset_kind: Option<DatasetKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_schema: Option<Vec<String>>,
}

fn write_pairs(path: &Path, pairs: &[(f64, f64)]) -> Result<()> {
    let mut bytes = Vec::with_capacity(pairs.len() * 16);
    for (re, im) in pairs {
        bytes.extend_from_slice(&re.to_le_bytes());
        bytes.extend_from_slice(&im.to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

fn read_pairs(path: &Path, count: usize) -> Result<Vec<(f64, f64)>> {
    let bytes = fs::read(path)?;
    if bytes.len() != count * 16 {
        return Err(Error::Container(format!(
            "payload {} has {} bytes, expected {}",
            path.display(),
            bytes.len(),
            count * 16
        )));
    }
    let mut out = Vec::with_capacity(count);
    for c in bytes.chunks_exact(16) {
        let re = f64::from_le_bytes(c[..8].try_into().unwrap());
        let im = f64::from_le_bytes(c[8..].try_into().unwrap());
        out.push((re, im));
    }
    Ok(out)
}

fn manifest_path(base: &Path) -> PathBuf {
    base.with_extension("json")
}

fn payload_path(base: &Path) -> PathBuf {
    base.with_extension("bin")
}

fn write_manifest(base: &Path, manifest: &ContainerManifest) -> Result<()> {
    fs::write(
        manifest_path(base),
        serde_json::to_string_pretty(manifest)?,
    )?;
    Ok(())
}

fn read_manifest(base: &Path) -> Result<ContainerManifest> {
    let m: ContainerManifest = serde_json::from_slice(&fs::read(manifest_path(base))?)?;
    if m.format_version != FORMAT_VERSION {
        return Err(Error::Container(format!(
            "unsupported format version {}",
            m.format_version
        )));
    }
    if m.endianness != "little" {
        return Err(Error::Container("payload must be little-endian".into()));
    }
    Ok(m)
}

// x-fastest linear order over an (x, y, z)-indexed array
fn grid_pairs_from<F: Fn(usize, usize, usize) -> (f64, f64)>(n: usize, f: F) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n * n * n);
    for iz in 0..n {
        for iy in 0..n {
            for ix in 0..n {
                out.push(f(ix, iy, iz));
            }
        }
    }
    out
}

/// Write a potential grid as `<base>.json` + `<base>.bin`.
pub fn save_potential(base: &Path, q: &PotentialGrid) -> Result<()> {
    let g = q.grid();
    let manifest = ContainerManifest {
        format_version: FORMAT_VERSION,
        kind: ContainerKind::PotentialGrid,
        endianness: "little".into(),
        fourier_convention: FOURIER_CONVENTION.into(),
        data_file: payload_path(base)
            .file_name()
            .unwrap()
            .to_string_lossy()
            .into_owned(),
        count: g.len(),
        grid: Some(GridMeta {
            n: g.n(),
            half_width_a: g.half_width(),
            spacing: g.spacing(),
            smoothness_l: q.smoothness_l(),
        }),
        dataset_kind: None,
        record_schema: None,
    };
    write_manifest(base, &manifest)?;
    let v = q.values();
    write_pairs(
        &payload_path(base),
        &grid_pairs_from(g.n(), |ix, iy, iz| (v[[ix, iy, iz]], 0.0)),
    )
}

pub fn load_potential(base: &Path) -> Result<PotentialGrid> {
    let m = read_manifest(base)?;
    if m.kind != ContainerKind::PotentialGrid {
        return Err(Error::Container(format!("expected potential_grid, got {:?}", m.kind)));
    }
    let gm = m
        .grid
        .ok_or_else(|| Error::Container("missing grid metadata".into()))?;
    let grid = Grid3::new(gm.half_width_a, gm.n)?;
    let pairs = read_pairs(&base.parent().unwrap_or(Path::new(".")).join(&m.data_file), m.count)?;
    let mut values = Array3::zeros((gm.n, gm.n, gm.n));
    let mut it = pairs.iter();
    for iz in 0..gm.n {
        for iy in 0..gm.n {
            for ix in 0..gm.n {
                let (re, im) = it.next().unwrap();
                if *im != 0.0 {
                    return Err(Error::Container(
                        "potential payload has nonzero imaginary parts".into(),
                    ));
                }
                values[[ix, iy, iz]] = *re;
            }
        }
    }
    PotentialGrid::new(grid, values, gm.smoothness_l)
}

/// Write a complex field (same layout, both components meaningful).
pub fn save_complex_field(base: &Path, f: &ComplexField3) -> Result<()> {
    let g = f.grid();
    let manifest = ContainerManifest {
        format_version: FORMAT_VERSION,
        kind: ContainerKind::ComplexField,
        endianness: "little".into(),
        fourier_convention: FOURIER_CONVENTION.into(),
        data_file: payload_path(base)
            .file_name()
            .unwrap()
            .to_string_lossy()
            .into_owned(),
        count: g.len(),
        grid: Some(GridMeta {
            n: g.n(),
            half_width_a: g.half_width(),
            spacing: g.spacing(),
            smoothness_l: 0,
        }),
        dataset_kind: None,
        record_schema: None,
    };
    write_manifest(base, &manifest)?;
    let v = f.values();
    write_pairs(
        &payload_path(base),
        &grid_pairs_from(g.n(), |ix, iy, iz| {
            (v[[ix, iy, iz]].re, v[[ix, iy, iz]].im)
        }),
    )
}

pub fn load_complex_field(base: &Path) -> Result<ComplexField3> {
    let m = read_manifest(base)?;
    if m.kind != ContainerKind::ComplexField {
        return Err(Error::Container(format!("expected complex_field, got {:?}", m.kind)));
    }
    let gm = m
        .grid
        .ok_or_else(|| Error::Container("missing grid metadata".into()))?;
    let grid = Grid3::new(gm.half_width_a, gm.n)?;
    let pairs = read_pairs(&base.parent().unwrap_or(Path::new(".")).join(&m.data_file), m.count)?;
    let mut values = Array3::zeros((gm.n, gm.n, gm.n));
    let mut it = pairs.iter();
    for iz in 0..gm.n {
        for iy in 0..gm.n {
            for ix in 0..gm.n {
                let (re, im) = it.next().unwrap();
                values[[ix, iy, iz]] = Complex64::new(*re, *im);
            }
        }
    }
    ComplexField3::new(grid, values)
}

/// Write a spectral field with its frequency-grid manifest.
pub fn save_spectral_field(base: &Path, f: &SpectralField) -> Result<()> {
    let g = f.grid();
    let manifest = ContainerManifest {
        format_version: FORMAT_VERSION,
        kind: ContainerKind::SpectralField,
        endianness: "little".into(),
        fourier_convention: FOURIER_CONVENTION.into(),
        data_file: payload_path(base)
            .file_name()
            .unwrap()
            .to_string_lossy()
            .into_owned(),
        count: g.len(),
        grid: Some(GridMeta {
            n: g.n(),
            half_width_a: g.half_width(),
            spacing: g.dual_spacing(),
            smoothness_l: 0,
        }),
        dataset_kind: None,
        record_schema: None,
    };
    write_manifest(base, &manifest)?;
    let v = f.values();
    write_pairs(
        &payload_path(base),
        &grid_pairs_from(g.n(), |ix, iy, iz| {
            (v[[ix, iy, iz]].re, v[[ix, iy, iz]].im)
        }),
    )
}

const RECORD_SCHEMA: [&str; 10] = [
    "bx", "by", "bz", "ax", "ay", "az", "k", "eta", "reA", "imA",
];

/// Write a far-field dataset: each record is five (re, im) pairs
/// following the documented schema.
pub fn save_dataset(base: &Path, ds: &FarFieldDataset) -> Result<()> {
    ds.validate()?;
    let manifest = ContainerManifest {
        format_version: FORMAT_VERSION,
        kind: ContainerKind::FarFieldRecords,
        endianness: "little".into(),
        fourier_convention: FOURIER_CONVENTION.into(),
        data_file: payload_path(base)
            .file_name()
            .unwrap()
            .to_string_lossy()
            .into_owned(),
        count: ds.records.len() * 5,
        grid: None,
        dataset_kind: Some(ds.kind),
        record_schema: Some(RECORD_SCHEMA.iter().map(|s| s.to_string()).collect()),
    };
    write_manifest(base, &manifest)?;
    let mut pairs = Vec::with_capacity(ds.records.len() * 5);
    for r in &ds.records {
        pairs.push((r.beta[0], r.beta[1]));
        pairs.push((r.beta[2], r.alpha[0]));
        pairs.push((r.alpha[1], r.alpha[2]));
        pairs.push((r.k, r.eta));
        pairs.push((r.amplitude_re, r.amplitude_im));
    }
    write_pairs(&payload_path(base), &pairs)
}

pub fn load_dataset(base: &Path) -> Result<FarFieldDataset> {
    let m = read_manifest(base)?;
    if m.kind != ContainerKind::FarFieldRecords {
        return Err(Error::Container(format!(
            "expected far_field_records, got {:?}",
            m.kind
        )));
    }
    let kind = m
        .dataset_kind
        .ok_or_else(|| Error::Container("missing dataset kind".into()))?;
    let pairs = read_pairs(&base.parent().unwrap_or(Path::new(".")).join(&m.data_file), m.count)?;
    if pairs.len() % 5 != 0 {
        return Err(Error::Container("record payload not a multiple of 5 pairs".into()));
    }
    let records = pairs
        .chunks_exact(5)
        .map(|c| FarFieldRecord {
            beta: [c[0].0, c[0].1, c[1].0],
            alpha: [c[1].1, c[2].0, c[2].1],
            k: c[3].0,
            eta: c[3].1,
            amplitude_re: c[4].0,
            amplitude_im: c[4].1,
        })
        .collect();
    FarFieldDataset::new(kind, records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potentials::make_bump_potential;

    #[test]
    fn potential_roundtrip_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("q");
        let g = Grid3::new(3.0, 16).unwrap();
        let q = make_bump_potential(g, [0.1, -0.2, 0.0], 1.0, 0.37, 3).unwrap();
        save_potential(&base, &q).unwrap();
        let back = load_potential(&base).unwrap();
        assert_eq!(q.values(), back.values());
        assert_eq!(q.grid(), back.grid());
        assert_eq!(q.smoothness_l(), back.smoothness_l());
    }

    #[test]
    fn dataset_roundtrip_bit_exact_including_nan() {
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("ds");
        let mut records = vec![FarFieldRecord::new(
            [0.0, 0.0, -1.0],
            [0.0, 0.0, 1.0],
            1.25,
            0.0,
            Complex64::new(0.125, -0.0625),
        )];
        // invalid record encoded as NaN amplitude
        records.push(FarFieldRecord::new(
            [0.0, -1.0, 0.0],
            [0.0, 1.0, 0.0],
            2.5,
            0.0,
            Complex64::new(f64::NAN, f64::NAN),
        ));
        let ds = FarFieldDataset::new(DatasetKind::Backscatter, records).unwrap();
        save_dataset(&base, &ds).unwrap();
        let back = load_dataset(&base).unwrap();
        assert_eq!(back.records.len(), 2);
        assert_eq!(
            ds.records[0].amplitude_re.to_bits(),
            back.records[0].amplitude_re.to_bits()
        );
        assert_eq!(
            ds.records[1].amplitude_re.to_bits(),
            back.records[1].amplitude_re.to_bits()
        );
        assert!(!back.records[1].is_valid());
        // byte-level: saving the loaded dataset reproduces the payload
        let base2 = dir.path().join("ds2");
        save_dataset(&base2, &back).unwrap();
        let b1 = std::fs::read(base.with_extension("bin")).unwrap();
        let b2 = std::fs::read(base2.with_extension("bin")).unwrap();
        assert_eq!(b1, b2);
    }
}
