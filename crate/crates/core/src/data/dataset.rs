use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::em::{CircuitParams, FrequencyGrid, SResponse, SResponseData, Topology};

use super::extract::{extract_circuit_params, initial_guess};
use super::oracle::oracle_simulate;
use super::sweep::{generate_sweep, topology_for_geometry, Geometry, SweepSpec};
use super::DataError;

pub const DATASET_FORMAT_VERSION: u32 = 1;

/// One training triple: geometry, extracted circuit label, oracle response.
#[derive(Clone, Debug)]
pub struct Sample {
    pub id: u64,
    pub geometry: Geometry,
    pub circuit: CircuitParams,
    pub response: SResponse,
    pub extraction_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Dataset {
    pub sweep: SweepSpec,
    pub grid: FrequencyGrid,
    pub base_topology: Topology,
    pub z0_free: f64,
    pub samples: Vec<Sample>,
}

impl Dataset {
    /// Runs the full generation pipeline: sweep, oracle simulation, and
    /// circuit-parameter extraction for the phase-1 labels.
    pub fn generate(spec: &SweepSpec) -> Result<Self, DataError> {
        spec.validate()?;
        let geometries = generate_sweep(spec)?;
        let mut samples = Vec::with_capacity(geometries.len());
        for (id, g) in geometries.into_iter().enumerate() {
            let response = oracle_simulate(&g, spec)?;
            let topo = topology_for_geometry(&g)?;
            let init = initial_guess(&response, topo.n_screens())?;
            let fit = extract_circuit_params(&response, &topo, &spec.grid, spec.z0_free, &init)?;
            samples.push(Sample {
                id: id as u64,
                geometry: g,
                circuit: fit.params,
                response,
                extraction_residual: fit.residual,
            });
        }
        let base_topology = topology_for_geometry(&samples[0].geometry)?;
        Ok(Dataset {
            sweep: spec.clone(),
            grid: spec.grid,
            base_topology,
            z0_free: spec.z0_free,
            samples,
        })
    }

    pub fn mean_extraction_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.extraction_residual)
            .sum::<f64>()
            / self.samples.len().max(1) as f64
    }
}

/// Seeded shuffle-then-partition split. Train size is floor(n * fraction),
/// clamped so both sides stay nonempty. Disjoint and exhaustive.
pub fn split_indices(
    n: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), DataError> {
    if n < 2 {
        return Err(DataError::Usage("need at least 2 samples to split".into()));
    }
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(DataError::Usage("train fraction must lie in (0, 1)".into()));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    let n_train = ((n as f64 * train_fraction).floor() as usize).clamp(1, n - 1);
    let test = idx.split_off(n_train);
    Ok((idx, test))
}

pub fn select_samples(dataset: &Dataset, indices: &[usize]) -> Vec<Sample> {
    indices
        .iter()
        .map(|&i| dataset.samples[i].clone())
        .collect()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleData {
    id: u64,
    geometry: Geometry,
    circuit: Vec<f64>,
    response: SResponseData,
    extraction_residual: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetFile {
    format_version: u32,
    sweep: SweepSpec,
    grid: FrequencyGrid,
    base_topology: Topology,
    z0_free: f64,
    samples: Vec<SampleData>,
}

pub fn write_dataset(dataset: &Dataset, path: &Path) -> Result<(), DataError> {
    if dataset.samples.is_empty() {
        return Err(DataError::Usage(
            "refusing to write an empty dataset".into(),
        ));
    }
    let file = DatasetFile {
        format_version: DATASET_FORMAT_VERSION,
        sweep: dataset.sweep.clone(),
        grid: dataset.grid,
        base_topology: dataset.base_topology.clone(),
        z0_free: dataset.z0_free,
        samples: dataset
            .samples
            .iter()
            .map(|s| SampleData {
                id: s.id,
                geometry: s.geometry,
                circuit: s.circuit.as_slice().to_vec(),
                response: SResponseData::from(&s.response),
                extraction_residual: s.extraction_residual,
            })
            .collect(),
    };
    let json = serde_json::to_string(&file)?;
    fs::write(path, json)?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<Dataset, DataError> {
    let text = fs::read_to_string(path)?;
    let file: DatasetFile = serde_json::from_str(&text)?;
    if file.format_version != DATASET_FORMAT_VERSION {
        return Err(DataError::Format(format!(
            "dataset format version {} (expected {})",
            file.format_version, DATASET_FORMAT_VERSION
        )));
    }
    let samples = file
        .samples
        .into_iter()
        .map(|s| -> Result<Sample, DataError> {
            Ok(Sample {
                id: s.id,
                geometry: s.geometry,
                circuit: CircuitParams::from_flat(s.circuit)?,
                response: s.response.into_response()?,
                extraction_residual: s.extraction_residual,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dataset {
        sweep: file.sweep,
        grid: file.grid,
        base_topology: file.base_topology,
        z0_free: file.z0_free,
        samples,
    })
}
