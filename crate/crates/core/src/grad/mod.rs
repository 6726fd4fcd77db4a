//! Forward-mode differentiation of the circuit physics: exact Jacobians of
//! S-parameters and loss functions with respect to circuit parameters.
//!
//! The physics is evaluated over [`Dual`] scalars with one tangent direction
//! per circuit parameter, so values match the plain `f64` path bit for bit
//! while tangents deliver the derivatives. Directions are seeded per-unit
//! (tangent `c_k` on parameter `k`), i.e. Jacobian entries are derivatives
//! with respect to relative parameter changes; gradients are converted back
//! to SI units where the callers need them.

mod dual;

pub use dual::Dual;

use thiserror::Error;

use crate::em::{
    eval_point, f_phys, CircuitParams, Complex, EmError, FrequencyGrid, SPoint, SResponse, Topology,
};

#[derive(Debug, Error)]
pub enum GradError {
    #[error(transparent)]
    Em(#[from] EmError),
    #[error("usage error: {0}")]
    Usage(String),
    #[error("unsupported circuit size {0}: gradients cover up to 8 screens")]
    TooManyDirections(usize),
}

/// Component index within a Jacobian row: Re s11, Im s11, Re s21, Im s21.
pub const JAC_COMPONENTS: usize = 4;

/// Per-frequency gradients of {Re s11, Im s11, Re s21, Im s21} with respect
/// to relative (per-unit) changes of each circuit parameter.
#[derive(Clone, Debug)]
pub struct PhysicsJacobian {
    grid: FrequencyGrid,
    n_c: usize,
    /// Layout: [point][component][parameter].
    entries: Vec<f64>,
}

impl PhysicsJacobian {
    #[inline]
    pub fn n_c(&self) -> usize {
        self.n_c
    }

    #[inline]
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// d(component at point)/d(ln c_k), component ∈ {0: Re s11, 1: Im s11, 2: Re s21, 3: Im s21}.
    #[inline]
    pub fn entry(&self, point: usize, component: usize, k: usize) -> f64 {
        self.entries[(point * JAC_COMPONENTS + component) * self.n_c + k]
    }

    pub fn iter_entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().copied()
    }
}

fn check_inputs(c: &CircuitParams, topology: &Topology) -> Result<(), GradError> {
    if c.n_screens() != topology.n_screens() {
        return Err(GradError::Usage(format!(
            "{} circuit entries for {} screens",
            c.len(),
            topology.n_screens()
        )));
    }
    Ok(())
}

fn seed_params<const N: usize>(c: &CircuitParams) -> Vec<Dual<N>> {
    c.as_slice()
        .iter()
        .enumerate()
        .map(|(k, &v)| Dual::seeded(v, k, v))
        .collect()
}

fn dual_response<const N: usize>(
    c: &CircuitParams,
    topology: &Topology,
    grid: &FrequencyGrid,
    z0_free: f64,
) -> Result<(SResponse, PhysicsJacobian), GradError> {
    let params = seed_params::<N>(c);
    let n_c = c.len();
    let mut points = Vec::with_capacity(grid.n_points());
    let mut entries = Vec::with_capacity(grid.n_points() * JAC_COMPONENTS * n_c);
    for f in grid.points_hz() {
        let s = eval_point(&params, topology, f, z0_free)?;
        points.push(s.value());
        for comp in [s.s11.re, s.s11.im, s.s21.re, s.s21.im] {
            entries.extend_from_slice(&comp.dx[..n_c]);
        }
    }
    Ok((
        SResponse::new(*grid, points)?,
        PhysicsJacobian {
            grid: *grid,
            n_c,
            entries,
        },
    ))
}

macro_rules! dispatch_n_c {
    ($n_c:expr, $fn:ident ( $($arg:expr),* )) => {
        match $n_c {
            2 => $fn::<2>($($arg),*),
            4 => $fn::<4>($($arg),*),
            6 => $fn::<6>($($arg),*),
            8 => $fn::<8>($($arg),*),
            10 => $fn::<10>($($arg),*),
            12 => $fn::<12>($($arg),*),
            14 => $fn::<14>($($arg),*),
            16 => $fn::<16>($($arg),*),
            n => return Err(GradError::TooManyDirections(n)),
        }
    };
}

/// `f_phys` together with its Jacobian. The value part is bit-identical to
/// [`crate::em::f_phys`] on the same inputs.
pub fn f_phys_dual(
    c: &CircuitParams,
    topology: &Topology,
    grid: &FrequencyGrid,
    z0_free: f64,
) -> Result<(SResponse, PhysicsJacobian), GradError> {
    check_inputs(c, topology)?;
    dispatch_n_c!(c.len(), dual_response(c, topology, grid, z0_free))
}

/// Loss functions differentiable through the physics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LossKind {
    /// Mean complex-modulus error on S21; the pre-existing objective kept
    /// for ablation.
    LegacyEq1,
    /// Mean complex-modulus error on S21, applied to the end-to-end
    /// prediction (the phase-2 default).
    S21MaeEq3,
    /// Mean of |Δs21|² + |Δs11|²; constrains S11 phase as well.
    PhaseAwareEq5,
}

fn point_loss<const N: usize>(
    s11: Complex<Dual<N>>,
    s21: Complex<Dual<N>>,
    target: &SPoint,
    kind: LossKind,
) -> Dual<N> {
    let t11 = Complex::new(Dual::constant(target.s11.re), Dual::constant(target.s11.im));
    let t21 = Complex::new(Dual::constant(target.s21.re), Dual::constant(target.s21.im));
    match kind {
        LossKind::LegacyEq1 | LossKind::S21MaeEq3 => (s21 - t21).abs(),
        LossKind::PhaseAwareEq5 => (s21 - t21).abs_sq() + (s11 - t11).abs_sq(),
    }
}

fn loss_grad_worker<const N: usize>(
    c: &CircuitParams,
    target: &SResponse,
    topology: &Topology,
    grid: &FrequencyGrid,
    z0_free: f64,
    kind: LossKind,
) -> Result<(f64, Vec<f64>), GradError> {
    let params = seed_params::<N>(c);
    let mut acc = Dual::<N>::constant(0.0);
    for (j, f) in grid.points_hz().enumerate() {
        let s = eval_point(&params, topology, f, z0_free)?;
        acc = acc + point_loss(s.s11, s.s21, &target.points[j], kind);
    }
    let scale = 1.0 / grid.n_points() as f64;
    let loss = acc.v * scale;
    let grad = (0..c.len())
        .map(|k| acc.dx[k] * scale / c.as_slice()[k])
        .collect();
    Ok((loss, grad))
}

/// Loss and its exact gradient with respect to the circuit parameters (SI
/// units). The loss value matches the corresponding `neural` loss evaluated
/// on `f_phys(c)`.
pub fn loss_grad_circuit(
    c: &CircuitParams,
    target: &SResponse,
    topology: &Topology,
    grid: &FrequencyGrid,
    z0_free: f64,
    kind: LossKind,
) -> Result<(f64, Vec<f64>), GradError> {
    check_inputs(c, topology)?;
    if target.grid != *grid {
        return Err(GradError::Usage(
            "target response is on a different grid".into(),
        ));
    }
    dispatch_n_c!(
        c.len(),
        loss_grad_worker(c, target, topology, grid, z0_free, kind)
    )
}

fn fit_sq_worker<const N: usize>(
    c: &CircuitParams,
    target: &SResponse,
    topology: &Topology,
    grid: &FrequencyGrid,
    z0_free: f64,
) -> Result<(f64, Vec<f64>), GradError> {
    let params = seed_params::<N>(c);
    let mut acc = Dual::<N>::constant(0.0);
    for (j, f) in grid.points_hz().enumerate() {
        let s = eval_point(&params, topology, f, z0_free)?;
        let t21 = target.points[j].s21;
        let t11 = target.points[j].s11;
        let d21 = s.s21 - Complex::new(Dual::constant(t21.re), Dual::constant(t21.im));
        let d11 = s.s11 - Complex::new(Dual::constant(t11.re), Dual::constant(t11.im));
        acc = acc + d21.abs_sq() + d11.abs_sq();
    }
    // gradient with respect to log-parameters, as used by the extractor
    Ok((acc.v, acc.dx[..c.len()].to_vec()))
}

/// Σ_f |s21 - ŝ21|² + |s11 - ŝ11|² and its gradient in log-parameter space;
/// the objective minimized by circuit-parameter extraction. Both parameters
/// enter because a reversed asymmetric cascade shares s21 with the original,
/// so a transmission-only fit cannot tell the two screens apart.
pub fn fit_squared_residual_grad(
    c: &CircuitParams,
    target: &SResponse,
    topology: &Topology,
    grid: &FrequencyGrid,
    z0_free: f64,
) -> Result<(f64, Vec<f64>), GradError> {
    check_inputs(c, topology)?;
    if target.grid != *grid {
        return Err(GradError::Usage(
            "target response is on a different grid".into(),
        ));
    }
    dispatch_n_c!(c.len(), fit_sq_worker(c, target, topology, grid, z0_free))
}

/// Central-difference verification of the physics Jacobian.
///
/// Returns `max |analytic - fd| / max(max |analytic|, floor)` over all
/// entries, comparing per-unit derivatives against central differences of
/// relatively perturbed parameters. `step` is the relative step size.
pub fn finite_diff_check(
    c: &CircuitParams,
    topology: &Topology,
    grid: &FrequencyGrid,
    z0_free: f64,
    step: f64,
) -> Result<f64, GradError> {
    const FLOOR: f64 = 1e-12;
    if !(step > 1e-9 && step < 1e-3) {
        return Err(GradError::Usage("step must lie in (1e-9, 1e-3)".into()));
    }
    let (_, jac) = f_phys_dual(c, topology, grid, z0_free)?;
    let mut max_abs = jac.iter_entries().map(f64::abs).fold(0.0, f64::max);
    if max_abs < FLOOR {
        max_abs = FLOOR;
    }
    let base = c.as_slice();
    let mut max_diff = 0.0f64;
    for k in 0..c.len() {
        let perturbed = |sign: f64| -> Result<SResponse, GradError> {
            let mut v = base.to_vec();
            v[k] *= 1.0 + sign * step;
            let cp = CircuitParams::from_flat(v).map_err(GradError::Em)?;
            Ok(f_phys(&cp, topology, grid, z0_free)?)
        };
        let plus = perturbed(1.0)?;
        let minus = perturbed(-1.0)?;
        for j in 0..grid.n_points() {
            let (p, m) = (&plus.points[j], &minus.points[j]);
            let fd = [
                (p.s11.re - m.s11.re) / (2.0 * step),
                (p.s11.im - m.s11.im) / (2.0 * step),
                (p.s21.re - m.s21.re) / (2.0 * step),
                (p.s21.im - m.s21.im) / (2.0 * step),
            ];
            for (comp, fd_val) in fd.iter().enumerate() {
                max_diff = max_diff.max((jac.entry(j, comp, k) - fd_val).abs());
            }
        }
    }
    Ok(max_diff / max_abs)
}
