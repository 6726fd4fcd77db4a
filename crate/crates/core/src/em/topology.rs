use serde::{Deserialize, Serialize};

use super::EmError;

/// Lumped resonator placed in shunt across the line.
///
/// Slot-type (aperture) screens behave as bandpass shunt parallel-LC;
/// patch-type screens as bandstop shunt series-LC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResonatorKind {
    ParallelLc,
    SeriesLc,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Screen {
    pub kind: ResonatorKind,
}

/// Dielectric spacer between two screens, modeled as a transmission-line section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spacer {
    pub eps_r: f64,
    pub length_m: f64,
}

/// Cascade order of screens and spacers: screen 1, spacer 1, screen 2, ...
/// Structural rule: n_spacers = n_screens - 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    screens: Vec<Screen>,
    spacers: Vec<Spacer>,
    /// Relative permittivity of the semi-infinite input/output half-spaces.
    port_eps_r: f64,
}

impl Topology {
    pub fn new(
        screens: Vec<Screen>,
        spacers: Vec<Spacer>,
        port_eps_r: f64,
    ) -> Result<Self, EmError> {
        if screens.is_empty() {
            return Err(EmError::InvalidTopology("need at least one screen".into()));
        }
        if spacers.len() + 1 != screens.len() {
            return Err(EmError::InvalidTopology(format!(
                "{} screens require {} spacers, got {}",
                screens.len(),
                screens.len() - 1,
                spacers.len()
            )));
        }
        for sp in &spacers {
            if !(sp.length_m > 0.0 && sp.length_m.is_finite()) {
                return Err(EmError::InvalidTopology(
                    "spacer length must be positive".into(),
                ));
            }
            if !(sp.eps_r >= 1.0 && sp.eps_r.is_finite()) {
                return Err(EmError::InvalidTopology("spacer eps_r must be >= 1".into()));
            }
        }
        if !(port_eps_r >= 1.0 && port_eps_r.is_finite()) {
            return Err(EmError::InvalidTopology("port eps_r must be >= 1".into()));
        }
        Ok(Self {
            screens,
            spacers,
            port_eps_r,
        })
    }

    /// Single shunt screen in free space.
    pub fn single_screen(kind: ResonatorKind) -> Self {
        Self::new(vec![Screen { kind }], vec![], 1.0).unwrap()
    }

    /// Two identical slot screens separated by an air gap. The default
    /// structure for the geometry sweep.
    pub fn two_screen_air(gap_m: f64) -> Result<Self, EmError> {
        Self::new(
            vec![
                Screen {
                    kind: ResonatorKind::ParallelLc,
                },
                Screen {
                    kind: ResonatorKind::ParallelLc,
                },
            ],
            vec![Spacer {
                eps_r: 1.0,
                length_m: gap_m,
            }],
            1.0,
        )
    }

    #[inline]
    pub fn n_screens(&self) -> usize {
        self.screens.len()
    }

    #[inline]
    pub fn screens(&self) -> &[Screen] {
        &self.screens
    }

    #[inline]
    pub fn spacers(&self) -> &[Spacer] {
        &self.spacers
    }

    #[inline]
    pub fn port_eps_r(&self) -> f64 {
        self.port_eps_r
    }

    /// Same screens/spacers with spacer lengths replaced, for sweeps where
    /// the gap is a geometric input rather than a learned quantity.
    pub fn with_spacer_lengths(&self, lengths_m: &[f64]) -> Result<Self, EmError> {
        if lengths_m.len() != self.spacers.len() {
            return Err(EmError::InvalidTopology(format!(
                "expected {} spacer lengths, got {}",
                self.spacers.len(),
                lengths_m.len()
            )));
        }
        let spacers = self
            .spacers
            .iter()
            .zip(lengths_m)
            .map(|(sp, &l)| Spacer {
                eps_r: sp.eps_r,
                length_m: l,
            })
            .collect();
        Self::new(self.screens.clone(), spacers, self.port_eps_r)
    }
}

/// Per-screen inductance/capacitance, flattened as [L1, C1, L2, C2, ...].
/// This is the learned circuit vector; its length is 2 * n_screens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    values: Vec<f64>,
}

impl CircuitParams {
    pub fn from_flat(values: Vec<f64>) -> Result<Self, EmError> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(EmError::InvalidCircuit(
                "circuit vector must hold (L, C) pairs".into(),
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(EmError::InvalidCircuit(
                "all circuit entries must be finite and strictly positive".into(),
            ));
        }
        Ok(Self { values })
    }

    pub fn from_lc_pairs(pairs: &[(f64, f64)]) -> Result<Self, EmError> {
        let mut values = Vec::with_capacity(pairs.len() * 2);
        for &(l, c) in pairs {
            values.push(l);
            values.push(c);
        }
        Self::from_flat(values)
    }

    #[inline]
    pub fn n_screens(&self) -> usize {
        self.values.len() / 2
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn inductance(&self, screen: usize) -> f64 {
        self.values[2 * screen]
    }

    #[inline]
    pub fn capacitance(&self, screen: usize) -> f64 {
        self.values[2 * screen + 1]
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    /// Resonance frequency of screen `k`: 1 / (2π √(L C)).
    pub fn resonance_hz(&self, screen: usize) -> f64 {
        1.0 / (2.0
            * std::f64::consts::PI
            * (self.inductance(screen) * self.capacitance(screen)).sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_structural_rule() {
        let s = Screen {
            kind: ResonatorKind::ParallelLc,
        };
        assert!(Topology::new(vec![s, s], vec![], 1.0).is_err());
        assert!(Topology::new(vec![], vec![], 1.0).is_err());
        let sp = Spacer {
            eps_r: 1.0,
            length_m: 0.01,
        };
        assert!(Topology::new(vec![s, s], vec![sp], 1.0).is_ok());
        assert!(Topology::new(
            vec![s, s],
            vec![Spacer {
                eps_r: 0.5,
                length_m: 0.01
            }],
            1.0
        )
        .is_err());
    }

    #[test]
    fn circuit_params_validation() {
        assert!(CircuitParams::from_flat(vec![1e-9, 1e-12]).is_ok());
        assert!(CircuitParams::from_flat(vec![1e-9]).is_err());
        assert!(CircuitParams::from_flat(vec![1e-9, -1e-12]).is_err());
        assert!(CircuitParams::from_flat(vec![1e-9, f64::NAN]).is_err());
    }

    #[test]
    fn resonance_formula() {
        let c = CircuitParams::from_lc_pairs(&[(1e-9, 1e-12)]).unwrap();
        let f0 = c.resonance_hz(0);
        // 1/(2π·√(1e-21)) ≈ 5.0329 GHz
        assert!((f0 - 5.032921210448703e9).abs() / f0 < 1e-12);
    }
}
