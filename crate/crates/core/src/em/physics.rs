use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::abcd::Abcd;
use super::complex::{Complex, ComplexScalar};
use super::grid::FrequencyGrid;
use super::scalar::Scalar;
use super::topology::{CircuitParams, ResonatorKind, Topology};
use super::EmError;

/// Free-space wave impedance, ohms.
pub const Z0_FREE_SPACE: f64 = 376.730313668;

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;

/// Admittance magnitude substituted for a series-LC resonator evaluated
/// exactly at its pole; large enough that the resulting S-parameters sit
/// at the analytic short-circuit limit to machine precision.
const POLE_CLAMP_S: f64 = 1e18;

/// S-parameters of a two-port at one frequency, referenced to the port impedance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SPointOf<T> {
    pub s11: Complex<T>,
    pub s21: Complex<T>,
    pub s12: Complex<T>,
    pub s22: Complex<T>,
}

pub type SPoint = SPointOf<f64>;

impl<T: Scalar> SPointOf<T> {
    pub fn value(&self) -> SPoint {
        SPoint {
            s11: self.s11.value(),
            s21: self.s21.value(),
            s12: self.s12.value(),
            s22: self.s22.value(),
        }
    }
}

/// Complex S11/S21 (and S12/S22) over a frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SResponse {
    pub grid: FrequencyGrid,
    pub points: Vec<SPoint>,
}

impl SResponse {
    pub fn new(grid: FrequencyGrid, points: Vec<SPoint>) -> Result<Self, EmError> {
        if points.len() != grid.n_points() {
            return Err(EmError::DimensionMismatch(format!(
                "{} S-points for a {}-point grid",
                points.len(),
                grid.n_points()
            )));
        }
        Ok(Self { grid, points })
    }

    /// Max over points of | |s11|² + |s21|² - 1 |; zero for lossless networks.
    pub fn power_residual(&self) -> f64 {
        self.points
            .iter()
            .map(|p| (p.s11.abs_sq() + p.s21.abs_sq() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Shunt admittance of one screen resonator at frequency `f_hz`.
///
/// Parallel-LC (slot/bandpass): y = j(ωC - 1/(ωL)).
/// Series-LC (patch/bandstop): y = 1 / (j(ωL - 1/(ωC))).
pub fn admittance<T: Scalar>(
    kind: ResonatorKind,
    inductance: T,
    capacitance: T,
    f_hz: f64,
) -> Result<Complex<T>, EmError> {
    if !(f_hz > 0.0 && f_hz.is_finite()) {
        return Err(EmError::Domain("frequency must be positive".into()));
    }
    if !(inductance.value() > 0.0 && inductance.value().is_finite()) {
        return Err(EmError::Domain("inductance must be positive".into()));
    }
    if !(capacitance.value() > 0.0 && capacitance.value().is_finite()) {
        return Err(EmError::Domain("capacitance must be positive".into()));
    }
    let omega = T::constant(2.0 * PI * f_hz);
    let one = T::constant(1.0);
    match kind {
        ResonatorKind::ParallelLc => Ok(Complex::imag(
            omega * capacitance - one / (omega * inductance),
        )),
        ResonatorKind::SeriesLc => {
            let x = omega * inductance - one / (omega * capacitance);
            // treat the last few ulps around resonance as the pole itself
            let scale =
                (omega * inductance).value().abs() + (one / (omega * capacitance)).value().abs();
            if x.value().abs() <= 1e-12 * scale {
                return Err(EmError::AdmittancePole);
            }
            // 1 / (jx) = -j/x
            Ok(Complex::imag(-(one / x)))
        }
    }
}

/// ABCD matrix of a shunt admittance element.
pub fn abcd_shunt<T: Scalar>(y: Complex<T>) -> Result<Abcd<T>, EmError> {
    Abcd::shunt(y)
}

/// ABCD matrix of a lossless transmission-line section (dielectric spacer).
///
/// β = 2πf√eps_r/c0, Z = z0_free/√eps_r:
/// [[cos βl, jZ sin βl], [j sin(βl)/Z, cos βl]].
pub fn abcd_line<T: Scalar>(
    length_m: f64,
    eps_r: f64,
    f_hz: f64,
    z0_free: f64,
) -> Result<Abcd<T>, EmError> {
    if !(length_m > 0.0 && length_m.is_finite()) {
        return Err(EmError::Domain("line length must be positive".into()));
    }
    if !(eps_r >= 1.0 && eps_r.is_finite()) {
        return Err(EmError::Domain("eps_r must be >= 1".into()));
    }
    if !(f_hz > 0.0 && f_hz.is_finite()) {
        return Err(EmError::Domain("frequency must be positive".into()));
    }
    if !(z0_free > 0.0 && z0_free.is_finite()) {
        return Err(EmError::Domain("z0 must be positive".into()));
    }
    let beta_l = 2.0 * PI * f_hz * eps_r.sqrt() / C0 * length_m;
    let z = z0_free / eps_r.sqrt();
    let (sin_bl, cos_bl) = beta_l.sin_cos();
    Ok(Abcd {
        a: Complex::from_re(T::constant(cos_bl)),
        b: Complex::imag(T::constant(z * sin_bl)),
        c: Complex::imag(T::constant(sin_bl / z)),
        d: Complex::from_re(T::constant(cos_bl)),
    })
}

/// Matrix product of a cascade, port-1 element first.
pub fn cascade<T: Scalar>(elements: &[Abcd<T>]) -> Result<Abcd<T>, EmError> {
    Abcd::cascade(elements)
}

/// ABCD to S-parameters, referenced to a real port impedance `z0`.
pub fn abcd_to_s<T: Scalar>(m: &Abcd<T>, z0: f64) -> Result<SPointOf<T>, EmError> {
    if !(z0 > 0.0 && z0.is_finite()) {
        return Err(EmError::Domain("z0 must be positive".into()));
    }
    let inv_z0 = Complex::from_re(T::constant(1.0 / z0));
    let z0c = Complex::from_re(T::constant(z0));
    let b_over_z0 = m.b * inv_z0;
    let c_z0 = m.c * z0c;
    let delta = m.a + b_over_z0 + c_z0 + m.d;
    if delta.value().abs() == 0.0 {
        return Err(EmError::SingularNetwork);
    }
    let two = Complex::from_re(T::constant(2.0));
    Ok(SPointOf {
        s11: (m.a + b_over_z0 - c_z0 - m.d) / delta,
        s21: two / delta,
        s12: (two * m.det()) / delta,
        s22: (-m.a + b_over_z0 - c_z0 + m.d) / delta,
    })
}

/// Evaluates the alternating screen/spacer cascade at one frequency.
/// Generic over the scalar so the dual-number path reuses it unchanged.
pub fn eval_point<T: Scalar>(
    c: &[T],
    topology: &Topology,
    f_hz: f64,
    z0_free: f64,
) -> Result<SPointOf<T>, EmError> {
    let n_screens = topology.n_screens();
    debug_assert_eq!(c.len(), 2 * n_screens);
    let mut total: Option<Abcd<T>> = None;
    for (k, screen) in topology.screens().iter().enumerate() {
        let y = match admittance(screen.kind, c[2 * k], c[2 * k + 1], f_hz) {
            Ok(y) => y,
            // series-LC exactly at resonance: analytic short-circuit limit
            Err(EmError::AdmittancePole) => Complex::imag(T::constant(POLE_CLAMP_S)),
            Err(e) => return Err(e),
        };
        let m = Abcd::shunt(y)?;
        total = Some(match total {
            Some(t) => t.mul(m),
            None => m,
        });
        if k < topology.spacers().len() {
            let sp = topology.spacers()[k];
            let line = abcd_line::<T>(sp.length_m, sp.eps_r, f_hz, z0_free)?;
            total = Some(total.unwrap().mul(line));
        }
    }
    let z0 = z0_free / topology.port_eps_r().sqrt();
    abcd_to_s(&total.expect("topology has at least one screen"), z0)
}

/// The physics map: circuit parameters to S-parameters over a frequency grid.
/// Pure; identical inputs give bit-identical outputs.
pub fn f_phys(
    c: &CircuitParams,
    topology: &Topology,
    grid: &FrequencyGrid,
    z0_free: f64,
) -> Result<SResponse, EmError> {
    if c.n_screens() != topology.n_screens() {
        return Err(EmError::DimensionMismatch(format!(
            "{} circuit entries for {} screens",
            c.len(),
            topology.n_screens()
        )));
    }
    let points = grid
        .points_hz()
        .map(|f| Ok(eval_point(c.as_slice(), topology, f, z0_free)?.value()))
        .collect::<Result<Vec<_>, EmError>>()?;
    SResponse::new(*grid, points)
}

/// Serializable mirror of [`SResponse`] used by the dataset and checkpoint formats.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SResponseData {
    pub grid: FrequencyGrid,
    pub s11_re: Vec<f64>,
    pub s11_im: Vec<f64>,
    pub s21_re: Vec<f64>,
    pub s21_im: Vec<f64>,
    pub s12_re: Vec<f64>,
    pub s12_im: Vec<f64>,
    pub s22_re: Vec<f64>,
    pub s22_im: Vec<f64>,
}

impl From<&SResponse> for SResponseData {
    fn from(r: &SResponse) -> Self {
        let get = |f: fn(&SPoint) -> f64| r.points.iter().map(f).collect::<Vec<_>>();
        SResponseData {
            grid: r.grid,
            s11_re: get(|p| p.s11.re),
            s11_im: get(|p| p.s11.im),
            s21_re: get(|p| p.s21.re),
            s21_im: get(|p| p.s21.im),
            s12_re: get(|p| p.s12.re),
            s12_im: get(|p| p.s12.im),
            s22_re: get(|p| p.s22.re),
            s22_im: get(|p| p.s22.im),
        }
    }
}

impl SResponseData {
    pub fn into_response(self) -> Result<SResponse, EmError> {
        let n = self.grid.n_points();
        let arrays = [
            &self.s11_re,
            &self.s11_im,
            &self.s21_re,
            &self.s21_im,
            &self.s12_re,
            &self.s12_im,
            &self.s22_re,
            &self.s22_im,
        ];
        if arrays.iter().any(|a| a.len() != n) {
            return Err(EmError::DimensionMismatch(
                "S-parameter arrays do not match the grid length".into(),
            ));
        }
        let points = (0..n)
            .map(|j| SPoint {
                s11: ComplexScalar::new(self.s11_re[j], self.s11_im[j]),
                s21: ComplexScalar::new(self.s21_re[j], self.s21_im[j]),
                s12: ComplexScalar::new(self.s12_re[j], self.s12_im[j]),
                s22: ComplexScalar::new(self.s22_re[j], self.s22_im[j]),
            })
            .collect();
        SResponse::new(self.grid, points)
    }
}
