use std::f64::consts::PI;

use crate::em::{
    abcd_line, abcd_shunt, abcd_to_s, cascade, CircuitParams, Complex, ComplexScalar, SPoint,
    SResponse, C0,
};

use super::sweep::{Geometry, SweepSpec};
use super::DataError;
#[cfg(test)]
use crate::em::FrequencyGrid;

/// Reference inductance of a slot screen.
const L_REF_H: f64 = 0.8e-9;
/// Reference slot length the inductance is scaled against.
const SLOT_REF_MM: f64 = 14.825;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Deterministic value in [-1, 1] derived from the seed and a tag.
fn hash_unit(seed: u64, tag: u64) -> f64 {
    let h = splitmix64(seed ^ splitmix64(tag));
    (h >> 11) as f64 / ((1u64 << 53) as f64) * 2.0 - 1.0
}

/// True (generator-side) circuit values behind a geometry: the resonance of
/// each slot scales inversely with its length (half-wave slot), the
/// inductance scales with slot length plus a small deterministic detuning.
pub fn oracle_circuit(x: &Geometry, spec: &SweepSpec) -> CircuitParams {
    let mut pairs = Vec::with_capacity(2);
    for (k, l_mm) in [x.slot_length_mm, x.slot_length_2_mm].iter().enumerate() {
        let bits = l_mm.to_bits() ^ x.separation_mm.to_bits().rotate_left(17);
        let jitter = spec.inductance_jitter * hash_unit(spec.oracle_seed, bits ^ k as u64);
        let f0 = C0 / (2.0 * l_mm * 1e-3);
        let l = L_REF_H * (l_mm / SLOT_REF_MM) * (1.0 + jitter);
        let c = 1.0 / ((2.0 * PI * f0).powi(2) * l);
        pairs.push((l, c));
    }
    CircuitParams::from_lc_pairs(&pairs).expect("generator circuit values are positive")
}

/// Shunt admittance of one oracle screen. Richer than the student circuit:
/// the capacitance carries a quadratic frequency dispersion and a weak
/// second resonance sits above the main one, so a pure parallel-LC model
/// cannot fit the output exactly. Purely imaginary, hence lossless.
fn oracle_screen_admittance(l: f64, c: f64, f_hz: f64, spec: &SweepSpec) -> ComplexScalar {
    let omega = 2.0 * PI * f_hz;
    let c_f = c * (1.0 + spec.dispersion_alpha * (f_hz / spec.grid.f_stop_hz()).powi(2));
    let main = omega * c_f - 1.0 / (omega * l);
    // second resonance at ratio * f0, same inductance
    let c2 = c / spec.second_resonance_ratio.powi(2);
    let second = omega * c2 - 1.0 / (omega * l);
    Complex::imag(main + spec.second_resonance_strength * second)
}

/// Deterministic surrogate for a full-wave solver. Lossless by construction;
/// bitwise-reproducible for equal inputs.
pub fn oracle_simulate(x: &Geometry, spec: &SweepSpec) -> Result<SResponse, DataError> {
    spec.validate()?;
    let truth = oracle_circuit(x, spec);
    let gap_m = x.separation_mm * 1e-3;
    if !gap_m.is_finite() || gap_m <= 0.0 {
        return Err(DataError::Usage("separation must be positive".into()));
    }
    let mut points = Vec::with_capacity(spec.grid.n_points());
    for f in spec.grid.points_hz() {
        let y1 = oracle_screen_admittance(truth.inductance(0), truth.capacitance(0), f, spec);
        let y2 = oracle_screen_admittance(truth.inductance(1), truth.capacitance(1), f, spec);
        let m = cascade(&[
            abcd_shunt(y1)?,
            abcd_line::<f64>(gap_m, 1.0, f, spec.z0_free)?,
            abcd_shunt(y2)?,
        ])?;
        let s: SPoint = abcd_to_s(&m, spec.z0_free)?;
        points.push(s);
    }
    Ok(SResponse::new(spec.grid, points)?)
}
