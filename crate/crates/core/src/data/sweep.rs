use serde::{Deserialize, Serialize};

use crate::em::{FrequencyGrid, Topology};

use super::DataError;

/// FSS design geometry: the input vector x. Both screens are slot
/// resonators; the separation is the air gap between them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub slot_length_mm: f64,
    pub separation_mm: f64,
    pub slot_length_2_mm: f64,
}

impl Geometry {
    pub fn as_vector(&self) -> [f64; 3] {
        [
            self.slot_length_mm,
            self.separation_mm,
            self.slot_length_2_mm,
        ]
    }

    pub fn from_vector(v: &[f64]) -> Result<Self, DataError> {
        if v.len() != 3 {
            return Err(DataError::Usage(format!(
                "geometry needs 3 values, got {}",
                v.len()
            )));
        }
        if v.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(DataError::Usage("geometry values must be positive".into()));
        }
        Ok(Self {
            slot_length_mm: v[0],
            separation_mm: v[1],
            slot_length_2_mm: v[2],
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepDim {
    pub min: f64,
    pub max: f64,
    pub n_levels: usize,
}

impl SweepDim {
    pub fn level(&self, i: usize) -> f64 {
        if self.n_levels == 1 {
            self.min
        } else {
            self.min + i as f64 * (self.max - self.min) / (self.n_levels - 1) as f64
        }
    }
}

/// Full description of the dataset generator: the geometry grid, the
/// frequency grid, and the surrogate-oracle perturbation settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// slot_length, separation, slot_length_2 (mm).
    pub dims: [SweepDim; 3],
    pub grid: FrequencyGrid,
    pub oracle_seed: u64,
    /// Quadratic capacitance dispersion: C(f) = C (1 + alpha (f/f_stop)²).
    pub dispersion_alpha: f64,
    /// Susceptance scale of the weak second resonance on each screen.
    pub second_resonance_strength: f64,
    /// Second resonance frequency as a multiple of the main one.
    pub second_resonance_ratio: f64,
    /// Deterministic per-sample relative detuning of the true inductances.
    pub inductance_jitter: f64,
    pub z0_free: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            dims: [
                SweepDim {
                    min: 14.75,
                    max: 14.9,
                    n_levels: 9,
                },
                SweepDim {
                    min: 8.79,
                    max: 10.3,
                    n_levels: 9,
                },
                SweepDim {
                    min: 14.75,
                    max: 14.9,
                    n_levels: 9,
                },
            ],
            grid: FrequencyGrid::default_band(),
            oracle_seed: 7,
            dispersion_alpha: 0.05,
            second_resonance_strength: 0.02,
            second_resonance_ratio: 1.45,
            inductance_jitter: 0.01,
            z0_free: crate::em::Z0_FREE_SPACE,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), DataError> {
        for d in &self.dims {
            if d.n_levels == 0 {
                return Err(DataError::Usage("sweep dimension needs >= 1 level".into()));
            }
            if !(d.min > 0.0 && d.max >= d.min) {
                return Err(DataError::Usage(
                    "sweep bounds must satisfy 0 < min <= max".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn n_samples(&self) -> usize {
        self.dims.iter().map(|d| d.n_levels).product()
    }

    pub fn contains(&self, x: &Geometry) -> bool {
        let v = x.as_vector();
        self.dims
            .iter()
            .zip(v)
            .all(|(d, xi)| xi >= d.min && xi <= d.max)
    }
}

/// Full factorial geometry grid in lexicographic order
/// (slot_length outermost, slot_length_2 innermost).
pub fn generate_sweep(spec: &SweepSpec) -> Result<Vec<Geometry>, DataError> {
    spec.validate()?;
    let [d0, d1, d2] = &spec.dims;
    let mut out = Vec::with_capacity(spec.n_samples());
    for i in 0..d0.n_levels {
        for j in 0..d1.n_levels {
            for k in 0..d2.n_levels {
                out.push(Geometry {
                    slot_length_mm: d0.level(i),
                    separation_mm: d1.level(j),
                    slot_length_2_mm: d2.level(k),
                });
            }
        }
    }
    Ok(out)
}

/// Cascade structure implied by a geometry: two slot screens separated by
/// the geometry's air gap. The gap is a known input, not a learned quantity.
pub fn topology_for_geometry(x: &Geometry) -> Result<Topology, DataError> {
    Ok(Topology::two_screen_air(x.separation_mm * 1e-3)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sweep_has_729_samples() {
        let spec = SweepSpec::default();
        let g = generate_sweep(&spec).unwrap();
        assert_eq!(g.len(), 729);
        assert_eq!(spec.n_samples(), 729);
    }

    #[test]
    fn single_level_sweep_sits_at_minima() {
        let mut spec = SweepSpec::default();
        for d in &mut spec.dims {
            d.n_levels = 1;
        }
        let g = generate_sweep(&spec).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].slot_length_mm, 14.75);
        assert_eq!(g[0].separation_mm, 8.79);
        assert_eq!(g[0].slot_length_2_mm, 14.75);
    }

    #[test]
    fn lexicographic_order() {
        let mut spec = SweepSpec::default();
        spec.dims[0].n_levels = 2;
        spec.dims[1].n_levels = 3;
        spec.dims[2].n_levels = 1;
        let g = generate_sweep(&spec).unwrap();
        assert_eq!(g.len(), 6);
        // slot_length outermost
        let d0 = &spec.dims[0];
        let d1 = &spec.dims[1];
        let mut idx = 0;
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(g[idx].slot_length_mm, d0.level(i));
                assert_eq!(g[idx].separation_mm, d1.level(j));
                assert_eq!(g[idx].slot_length_2_mm, 14.75);
                idx += 1;
            }
        }
    }

    #[test]
    fn bounds_check() {
        let spec = SweepSpec::default();
        assert!(spec.contains(&Geometry {
            slot_length_mm: 14.8,
            separation_mm: 9.0,
            slot_length_2_mm: 14.9,
        }));
        assert!(!spec.contains(&Geometry {
            slot_length_mm: 15.5,
            separation_mm: 9.0,
            slot_length_2_mm: 14.9,
        }));
    }
}
