//! δ-indexed reference distributions from the interpolating ensembles and
//! best-δ fitting against them.
//!
//! File format (`RMTREF1`): the 7-byte magic, a little-endian `u32` header
//! length, the JSON [`ReferenceHeader`], then for each stored kind (eigenvector
//! amplitudes first) and each grid δ in order, a `u64` count followed by that
//! many sorted little-endian `f64` samples.

use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{eigenphase_spacings, eigenvector_amplitudes, ks_two_sample, EmpiricalDistribution};
use crate::ensembles::{hurwitz_sample, RngStream};
use crate::qcore::spectral_decomposition;
use crate::{Error, Result};

pub const REFERENCE_MAGIC: &[u8; 7] = b"RMTREF1";

/// Pooled references are thinned to this many evenly spaced order
/// statistics, which bounds the CDF error by `1/points`.
pub const DEFAULT_MAX_REFERENCE_POINTS: usize = 1 << 17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    EigenvectorAmplitude,
    EigenphaseSpacing,
}

impl ReferenceKind {
    pub const ALL: [ReferenceKind; 2] = [
        ReferenceKind::EigenvectorAmplitude,
        ReferenceKind::EigenphaseSpacing,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ReferenceKind::EigenvectorAmplitude => "eigenvector_amplitude",
            ReferenceKind::EigenphaseSpacing => "eigenphase_spacing",
        }
    }
}

/// How a library was generated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMeta {
    pub dim: usize,
    pub samples_per_delta: usize,
    pub seed: u64,
    pub stream_id: u64,
    pub max_points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct ReferenceHeader {
    format: String,
    meta: ReferenceMeta,
    delta_grid: Vec<f64>,
    kinds: Vec<ReferenceKind>,
    /// Stored sample counts per kind, in grid order.
    points: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceLibrary {
    pub meta: ReferenceMeta,
    pub delta_grid: Vec<f64>,
    eigenvector: Option<Vec<EmpiricalDistribution>>,
    spacing: Option<Vec<EmpiricalDistribution>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaFitResult {
    pub best_delta: f64,
    pub distance: f64,
    pub reference_kind: ReferenceKind,
}

/// `0, 0.02, …, 1`.
pub fn default_delta_grid() -> Vec<f64> {
    (0..=50).map(|k| k as f64 / 50.0).collect()
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty δ grid".into()));
    }
    if grid.iter().any(|d| !(0.0..=1.0).contains(d)) {
        return Err(Error::InvalidParameter("δ grid must lie in [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter(
            "δ grid must be strictly ascending".into(),
        ));
    }
    Ok(())
}

/// Pools eigenvector amplitudes and eigenphase spacings of
/// `samples_per_delta` interpolating-ensemble draws for every grid δ.
pub fn build_reference_library(
    dim: usize,
    grid: &[f64],
    samples_per_delta: usize,
    rng: RngStream,
) -> Result<ReferenceLibrary> {
    build_reference_library_with(
        dim,
        grid,
        samples_per_delta,
        rng,
        DEFAULT_MAX_REFERENCE_POINTS,
    )
}

pub fn build_reference_library_with(
    dim: usize,
    grid: &[f64],
    samples_per_delta: usize,
    rng: RngStream,
    max_points: usize,
) -> Result<ReferenceLibrary> {
    check_grid(grid)?;
    if samples_per_delta == 0 {
        return Err(Error::InvalidParameter(
            "samples_per_delta must be >= 1".into(),
        ));
    }
    if dim < 2 {
        return Err(Error::InvalidParameter(
            "reference dimension must be >= 2".into(),
        ));
    }
    let mut eigenvector = Vec::with_capacity(grid.len());
    let mut spacing = Vec::with_capacity(grid.len());
    for &delta in grid {
        let tag = reference_tag(rng.stream_id, delta);
        let draws: Vec<(EmpiricalDistribution, EmpiricalDistribution)> = (0..samples_per_delta)
            .into_par_iter()
            .map(|k| {
                let mut gen = RngStream::derive(rng.seed, &tag, k as u64).generator();
                let u = hurwitz_sample(dim, delta, &mut gen)?;
                let s = spectral_decomposition(&u)?;
                Ok((eigenvector_amplitudes(&s), eigenphase_spacings(&s)))
            })
            .collect::<Result<_>>()?;
        let vec_pool = EmpiricalDistribution::pooled(draws.iter().map(|d| &d.0));
        let spc_pool = EmpiricalDistribution::pooled(draws.iter().map(|d| &d.1));
        eigenvector.push(vec_pool.thinned(max_points));
        spacing.push(spc_pool.thinned(max_points));
    }
    Ok(ReferenceLibrary {
        meta: ReferenceMeta {
            dim,
            samples_per_delta,
            seed: rng.seed,
            stream_id: rng.stream_id,
            max_points,
        },
        delta_grid: grid.to_vec(),
        eigenvector: Some(eigenvector),
        spacing: Some(spacing),
    })
}

fn reference_tag(stream_id: u64, delta: f64) -> String {
    format!("reference/{stream_id}/{delta:.6}")
}

impl ReferenceLibrary {
    /// Assembles a library from precomputed references; either kind may be
    /// absent.
    pub fn from_parts(
        meta: ReferenceMeta,
        delta_grid: Vec<f64>,
        eigenvector: Option<Vec<EmpiricalDistribution>>,
        spacing: Option<Vec<EmpiricalDistribution>>,
    ) -> Result<Self> {
        check_grid(&delta_grid)?;
        for refs in [&eigenvector, &spacing].into_iter().flatten() {
            if refs.len() != delta_grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: delta_grid.len(),
                    found: refs.len(),
                });
            }
            if refs.iter().any(EmpiricalDistribution::is_empty) {
                return Err(Error::EmptySample);
            }
        }
        Ok(ReferenceLibrary {
            meta,
            delta_grid,
            eigenvector,
            spacing,
        })
    }

    pub fn references(&self, kind: ReferenceKind) -> Option<&[EmpiricalDistribution]> {
        match kind {
            ReferenceKind::EigenvectorAmplitude => self.eigenvector.as_deref(),
            ReferenceKind::EigenphaseSpacing => self.spacing.as_deref(),
        }
    }

    /// Reference for grid point `delta`, if it is on the grid.
    pub fn reference_at(&self, kind: ReferenceKind, delta: f64) -> Option<&EmpiricalDistribution> {
        let idx = self
            .delta_grid
            .iter()
            .position(|&d| (d - delta).abs() < 1e-12)?;
        self.references(kind).map(|r| &r[idx])
    }

    pub fn kinds(&self) -> Vec<ReferenceKind> {
        ReferenceKind::ALL
            .into_iter()
            .filter(|k| self.references(*k).is_some())
            .collect()
    }

    fn header(&self) -> ReferenceHeader {
        let kinds = self.kinds();
        let points = kinds
            .iter()
            .map(|k| {
                self.references(*k)
                    .unwrap()
                    .iter()
                    .map(|d| d.len() as u64)
                    .collect()
            })
            .collect();
        ReferenceHeader {
            format: String::from_utf8_lossy(REFERENCE_MAGIC).into_owned(),
            meta: self.meta.clone(),
            delta_grid: self.delta_grid.clone(),
            kinds,
            points,
        }
    }

    /// JSON manifest describing the binary file.
    pub fn manifest_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.header())?)
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::to_vec(&self.header())?;
        w.write_all(REFERENCE_MAGIC)?;
        w.write_all(&(header.len() as u32).to_le_bytes())?;
        w.write_all(&header)?;
        for kind in self.kinds() {
            for dist in self.references(kind).unwrap() {
                w.write_all(&(dist.len() as u64).to_le_bytes())?;
                for x in dist.samples() {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 7];
        r.read_exact(&mut magic)?;
        if &magic != REFERENCE_MAGIC {
            return Err(Error::Format("not an RMTREF1 reference library".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let mut header = vec![0u8; u32::from_le_bytes(word) as usize];
        r.read_exact(&mut header)?;
        let header: ReferenceHeader = serde_json::from_slice(&header)?;

        let mut eigenvector = None;
        let mut spacing = None;
        for kind in &header.kinds {
            let mut refs = Vec::with_capacity(header.delta_grid.len());
            for _ in &header.delta_grid {
                let mut count = [0u8; 8];
                r.read_exact(&mut count)?;
                let count = u64::from_le_bytes(count) as usize;
                let mut raw = vec![0u8; count * 8];
                r.read_exact(&mut raw)?;
                let samples: Vec<f64> = raw
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect();
                if samples.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::Format("reference block is not sorted".into()));
                }
                refs.push(EmpiricalDistribution::from_sorted_unchecked(samples));
            }
            match kind {
                ReferenceKind::EigenvectorAmplitude => eigenvector = Some(refs),
                ReferenceKind::EigenphaseSpacing => spacing = Some(refs),
            }
        }
        ReferenceLibrary::from_parts(header.meta, header.delta_grid, eigenvector, spacing)
    }

    /// Writes the binary library to `path` and its manifest next to it
    /// (`<path>.json`), each via a temporary file and rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("rmtref.tmp");
        {
            let mut w = BufWriter::new(fs::File::create(&tmp)?);
            self.write_to(&mut w)?;
            w.flush()?;
        }
        fs::rename(&tmp, path)?;
        let manifest = manifest_path(path);
        let tmp = manifest.with_extension("json.tmp");
        fs::write(&tmp, self.manifest_json()?)?;
        fs::rename(&tmp, manifest)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(BufReader::new(fs::File::open(path)?))
    }
}

pub fn manifest_path(path: &Path) -> std::path::PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".json");
    path.with_file_name(name)
}

/// Grid δ whose reference of `kind` is closest to `target` in two-sample KS
/// distance; ties go to the larger δ.
pub fn delta_fit(
    target: &EmpiricalDistribution,
    lib: &ReferenceLibrary,
    kind: ReferenceKind,
) -> Result<DeltaFitResult> {
    if target.is_empty() {
        return Err(Error::EmptySample);
    }
    let refs = lib
        .references(kind)
        .ok_or(Error::MissingReferenceKind(kind.name()))?;
    let distances: Vec<f64> = refs
        .par_iter()
        .map(|r| ks_two_sample(target, r))
        .collect::<Result<_>>()?;
    let mut best = DeltaFitResult {
        best_delta: lib.delta_grid[0],
        distance: f64::INFINITY,
        reference_kind: kind,
    };
    for (&delta, &d) in lib.delta_grid.iter().zip(&distances) {
        if d <= best.distance {
            best.best_delta = delta;
            best.distance = d;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_meta() -> ReferenceMeta {
        ReferenceMeta {
            dim: 4,
            samples_per_delta: 1,
            seed: 0,
            stream_id: 0,
            max_points: 10,
        }
    }

    fn dist(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn fit_picks_closest_and_breaks_ties_upward() {
        let lib = ReferenceLibrary::from_parts(
            tiny_meta(),
            vec![0.0, 0.5, 1.0],
            Some(vec![
                dist(&[0.0, 1.0]),
                dist(&[5.0, 6.0]),
                dist(&[5.0, 6.0]),
            ]),
            None,
        )
        .unwrap();
        let fit = delta_fit(
            &dist(&[5.0, 6.0]),
            &lib,
            ReferenceKind::EigenvectorAmplitude,
        )
        .unwrap();
        assert_eq!(fit.best_delta, 1.0);
        assert_eq!(fit.distance, 0.0);
        let fit = delta_fit(
            &dist(&[0.0, 1.0]),
            &lib,
            ReferenceKind::EigenvectorAmplitude,
        )
        .unwrap();
        assert_eq!(fit.best_delta, 0.0);

        assert!(matches!(
            delta_fit(&dist(&[1.0]), &lib, ReferenceKind::EigenphaseSpacing),
            Err(Error::MissingReferenceKind(_))
        ));
        assert!(matches!(
            delta_fit(&dist(&[]), &lib, ReferenceKind::EigenvectorAmplitude),
            Err(Error::EmptySample)
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(check_grid(&[]).is_err());
        assert!(check_grid(&[0.5, 0.2]).is_err());
        assert!(check_grid(&[0.0, 1.2]).is_err());
        let g = default_delta_grid();
        assert_eq!(g.len(), 51);
        assert_eq!((g[0], g[50]), (0.0, 1.0));
        assert!((g[49] - 0.98).abs() < 1e-15);
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let lib =
            build_reference_library_with(8, &[0.0, 0.5, 1.0], 3, RngStream::new(1, 2), 50).unwrap();
        let mut bytes = Vec::new();
        lib.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..7], b"RMTREF1");
        let back = ReferenceLibrary::read_from(bytes.as_slice()).unwrap();
        assert_eq!(back.meta, lib.meta);
        for kind in ReferenceKind::ALL {
            for (a, b) in back
                .references(kind)
                .unwrap()
                .iter()
                .zip(lib.references(kind).unwrap())
            {
                let bits = |d: &EmpiricalDistribution| {
                    d.samples().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
                };
                assert_eq!(bits(a), bits(b));
            }
        }
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(again, bytes);
        assert!(ReferenceLibrary::read_from(&bytes[..bytes.len() - 3]).is_err());
    }

    #[test]
    fn thinning_caps_stored_points() {
        let lib = build_reference_library_with(8, &[1.0], 4, RngStream::new(1, 2), 50).unwrap();
        let eig = &lib.references(ReferenceKind::EigenvectorAmplitude).unwrap()[0];
        assert_eq!(eig.len(), 50);
        let spc = &lib.references(ReferenceKind::EigenphaseSpacing).unwrap()[0];
        assert_eq!(spc.len(), 32);
    }

    #[test]
    fn manifest_sits_next_to_library() {
        assert_eq!(
            manifest_path(Path::new("/tmp/ref.bin")),
            Path::new("/tmp/ref.bin.json")
        );
    }
}
