//! Linear time-varying ODE machinery: fundamental solutions, variation of
//! constants, restart (no-memory) checks, and the matrix normalization
//! condition that forces a finite stopping time.
//!
//! The state equation is `u'(t) + A(t) u(t) = rhs(t)`. Its fundamental
//! solution solves `G' = -A G` with `G(t0) = Id`, and the unique solution is
//!
//! ```text
//! u(t) = G(t) [ u0 + \int_{t0}^{t} G^{-1}(s) rhs(s) ds ].
//! ```
//!
//! `G^{-1}` is obtained by integrating its own equation `(G^{-1})' = G^{-1} A`
//! rather than by inverting samples, which keeps the conditioning of the two
//! factors independent.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quad::{cumulative_simpson, simpson};

/// Fundamental solution samples `G(t)` and `G^{-1}(t)` on a grid.
pub struct FundamentalSolution {
    grid: TimeGrid,
    dim: usize,
    samples: Vec<DMatrix<f64>>,
    inverse_samples: Vec<DMatrix<f64>>,
}

impl FundamentalSolution {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn g(&self, node: usize) -> &DMatrix<f64> {
        &self.samples[node]
    }

    pub fn g_inv(&self, node: usize) -> &DMatrix<f64> {
        &self.inverse_samples[node]
    }

    /// Largest deviation of `G(t) G^{-1}(t)` from the identity over all nodes.
    pub fn inverse_drift(&self) -> f64 {
        let id = DMatrix::<f64>::identity(self.dim, self.dim);
        self.samples
            .iter()
            .zip(&self.inverse_samples)
            .map(|(g, gi)| (g * gi - &id).abs().max())
            .fold(0.0, f64::max)
    }
}

fn check_matrix(m: &DMatrix<f64>, dim: usize, t: f64) -> Result<()> {
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::InvalidInput(format!(
            "coefficient matrix at t = {t} is {}x{}, expected {dim}x{dim}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(())
}

/// Integrates `G' = -A G`, `(G^{-1})' = G^{-1} A` with the classical one-step
/// 4th-order scheme on the grid nodes.
pub fn fundamental_solution<A>(a: &A, t0: f64, grid: &TimeGrid) -> Result<FundamentalSolution>
where
    A: Fn(f64) -> DMatrix<f64>,
{
    if (grid.t_start() - t0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "grid starts at {}, expected t0 = {t0}",
            grid.t_start()
        )));
    }
    let probe = a(t0);
    let dim = probe.nrows();
    check_matrix(&probe, dim, t0)?;

    let h = grid.step();
    let n = grid.len();
    let mut samples = Vec::with_capacity(n);
    let mut inverse_samples = Vec::with_capacity(n);
    let mut g = DMatrix::<f64>::identity(dim, dim);
    let mut gi = g.clone();
    samples.push(g.clone());
    inverse_samples.push(gi.clone());

    let mut a_left = probe;
    for k in 0..grid.n_intervals() {
        let t = grid.time(k);
        let a_mid = a(t + 0.5 * h);
        let a_right = a(t + h);
        check_matrix(&a_mid, dim, t + 0.5 * h)?;
        check_matrix(&a_right, dim, t + h)?;

        let k1 = -(&a_left * &g);
        let k2 = -(&a_mid * (&g + (0.5 * h) * &k1));
        let k3 = -(&a_mid * (&g + (0.5 * h) * &k2));
        let k4 = -(&a_right * (&g + h * &k3));
        g += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        let m1 = &gi * &a_left;
        let m2 = (&gi + (0.5 * h) * &m1) * &a_mid;
        let m3 = (&gi + (0.5 * h) * &m2) * &a_mid;
        let m4 = (&gi + h * &m3) * &a_right;
        gi += (h / 6.0) * (m1 + 2.0 * m2 + 2.0 * m3 + m4);

        if g.iter().any(|v| !v.is_finite()) || gi.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationBlowup { t: t + h });
        }
        samples.push(g.clone());
        inverse_samples.push(gi.clone());
        a_left = a_right;
    }

    Ok(FundamentalSolution { grid: grid.clone(), dim, samples, inverse_samples })
}

/// Solution samples of `u' + A u = rhs` together with the derivative
/// recovered from the equation itself.
pub struct Trajectory {
    grid: TimeGrid,
    values: Vec<DVector<f64>>,
    derivatives: Vec<DVector<f64>>,
}

impl Trajectory {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn value(&self, node: usize) -> &DVector<f64> {
        &self.values[node]
    }

    pub fn derivative(&self, node: usize) -> &DVector<f64> {
        &self.derivatives[node]
    }

    pub fn value_at(&self, t: f64) -> Option<&DVector<f64>> {
        self.grid.index_of(t).map(|i| &self.values[i])
    }

    /// Glues a continuation onto this trajectory. The continuation must start
    /// at the final node; its first sample replaces nothing (the earlier value
    /// is kept, so a control jump at the seam stays one-sided).
    pub fn extend_with(mut self, tail: Trajectory) -> Result<Trajectory> {
        if (tail.grid.t_start() - self.grid.t_end()).abs() > 1e-9
            || (tail.grid.step() - self.grid.step()).abs() > 1e-12
        {
            return Err(Error::InvalidInput(
                "continuation must start at the end of the trajectory with the same step".into(),
            ));
        }
        let joined = TimeGrid::with_intervals(
            self.grid.t_start(),
            tail.grid.t_end(),
            self.grid.n_intervals() + tail.grid.n_intervals(),
        )?;
        self.values.extend(tail.values.into_iter().skip(1));
        self.derivatives.extend(tail.derivatives.into_iter().skip(1));
        Ok(Trajectory { grid: joined, values: self.values, derivatives: self.derivatives })
    }
}

/// Variation-of-constants solve on the grid: the running integral of
/// `G^{-1} rhs` is accumulated with 4th-order quadrature over the nodes.
pub fn solve_ivp<A, F>(
    a: &A,
    rhs: &F,
    u0: &DVector<f64>,
    t0: f64,
    grid: &TimeGrid,
) -> Result<Trajectory>
where
    A: Fn(f64) -> DMatrix<f64>,
    F: Fn(f64) -> DVector<f64>,
{
    let fs = fundamental_solution(a, t0, grid)?;
    let dim = fs.dim();
    if u0.len() != dim {
        return Err(Error::InvalidInput(format!(
            "initial state has length {}, expected {dim}",
            u0.len()
        )));
    }

    let n = grid.len();
    let mut forcing = Vec::with_capacity(n);
    for (k, t) in grid.times().enumerate() {
        let f = rhs(t);
        if f.len() != dim {
            return Err(Error::InvalidInput(format!(
                "rhs at t = {t} has length {}, expected {dim}",
                f.len()
            )));
        }
        if f.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("rhs is not finite at t = {t}")));
        }
        forcing.push(fs.g_inv(k) * f);
    }

    // componentwise running integral of G^{-1} rhs
    let mut cums = Vec::with_capacity(dim);
    for c in 0..dim {
        let comp: Vec<f64> = forcing.iter().map(|v| v[c]).collect();
        cums.push(cumulative_simpson(&comp, grid.step())?);
    }

    let mut values = Vec::with_capacity(n);
    let mut derivatives = Vec::with_capacity(n);
    for (k, t) in grid.times().enumerate() {
        let w = DVector::from_iterator(dim, (0..dim).map(|c| cums[c][k]));
        let u = fs.g(k) * (u0 + w);
        let du = rhs(t) - a(t) * &u;
        values.push(u);
        derivatives.push(du);
    }
    Ok(Trajectory { grid: grid.clone(), values, derivatives })
}

/// Matrix-valued control supported on `[0, support_end]`.
///
/// Evaluation outside the support returns zero; inside, the stored shape is
/// evaluated with the argument clamped to the support so that node times
/// perturbed by floating-point accumulation stay on the correct side.
pub struct ControlMatrix {
    dim: usize,
    support_end: f64,
    shape: Box<dyn Fn(f64) -> DMatrix<f64> + Send + Sync>,
}

impl ControlMatrix {
    pub fn new<S>(dim: usize, support_end: f64, shape: S) -> Self
    where
        S: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
    {
        Self { dim, support_end, shape: Box::new(shape) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn support_end(&self) -> f64 {
        self.support_end
    }

    pub fn eval(&self, t: f64) -> DMatrix<f64> {
        let eps = 1e-12 * self.support_end.max(1.0);
        if t < -eps || t > self.support_end + eps {
            DMatrix::zeros(self.dim, self.dim)
        } else {
            (self.shape)(t.clamp(0.0, self.support_end))
        }
    }
}

/// `Id - \int_0^T G^{-1}(s) ell(s) ds`; zero exactly when the control forces
/// the solution of `u' + A u = -ell u0` to stop at `T`.
pub fn control_residual(
    fs: &FundamentalSolution,
    ell: &ControlMatrix,
    t_stop: f64,
) -> Result<DMatrix<f64>> {
    if ell.dim() != fs.dim() {
        return Err(Error::InvalidInput(format!(
            "control dimension {} does not match system dimension {}",
            ell.dim(),
            fs.dim()
        )));
    }
    let idx = fs
        .grid()
        .index_of(t_stop)
        .ok_or_else(|| Error::InvalidInput(format!("T = {t_stop} is not a grid node")))?;
    if idx == 0 || idx % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "node index of T must be even and positive for Simpson, got {idx}"
        )));
    }
    let dim = fs.dim();
    let integrand: Vec<DMatrix<f64>> =
        (0..=idx).map(|k| fs.g_inv(k) * ell.eval(fs.grid().time(k))).collect();
    let mut total = DMatrix::<f64>::identity(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let comp: Vec<f64> = integrand.iter().map(|m| m[(i, j)]).collect();
            total[(i, j)] -= simpson(&comp, fs.grid().step())?;
        }
    }
    Ok(total)
}

fn norm_one(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Threshold below which the ansatz normalization matrix counts as singular.
pub const ANSATZ_RCOND_MIN: f64 = 1e-12;

/// Completes a shape function into a control satisfying the stopping
/// normalization: `ell(t) = shape(t) M^{-1}` with `M = \int_0^T G^{-1} shape`.
pub fn scale_control_ansatz<S>(
    fs: &FundamentalSolution,
    shape: S,
    t_stop: f64,
) -> Result<ControlMatrix>
where
    S: Fn(f64) -> DMatrix<f64> + Send + Sync + 'static,
{
    let idx = fs
        .grid()
        .index_of(t_stop)
        .ok_or_else(|| Error::InvalidInput(format!("T = {t_stop} is not a grid node")))?;
    if idx == 0 || idx % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "node index of T must be even and positive for Simpson, got {idx}"
        )));
    }
    let dim = fs.dim();
    let integrand: Vec<DMatrix<f64>> =
        (0..=idx).map(|k| fs.g_inv(k) * shape(fs.grid().time(k))).collect();
    let mut m = DMatrix::<f64>::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            let comp: Vec<f64> = integrand.iter().map(|v| v[(i, j)]).collect();
            m[(i, j)] = simpson(&comp, fs.grid().step())?;
        }
    }
    let m_inv = match m.clone().try_inverse() {
        Some(inv) => inv,
        None => return Err(Error::DegenerateAnsatz { rcond: 0.0 }),
    };
    let rcond = 1.0 / (norm_one(&m) * norm_one(&m_inv));
    if !rcond.is_finite() || rcond < ANSATZ_RCOND_MIN {
        return Err(Error::DegenerateAnsatz { rcond });
    }
    Ok(ControlMatrix::new(dim, t_stop, move |t| shape(t) * &m_inv))
}

/// `\int_0^T G^{-1}(s) [f(s) - ell_f(s)] ds` for a forcing-compensating
/// control. Requires `ell_f = f` on every grid node beyond `T`.
pub fn forcing_control_residual<F, L>(
    fs: &FundamentalSolution,
    f: &F,
    ell_f: &L,
    t_stop: f64,
) -> Result<DVector<f64>>
where
    F: Fn(f64) -> DVector<f64>,
    L: Fn(f64) -> DVector<f64>,
{
    let idx = fs
        .grid()
        .index_of(t_stop)
        .ok_or_else(|| Error::InvalidInput(format!("T = {t_stop} is not a grid node")))?;
    if idx == 0 || idx % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "node index of T must be even and positive for Simpson, got {idx}"
        )));
    }
    // tail condition ell_f = f beyond T
    for k in idx + 1..fs.grid().len() {
        let t = fs.grid().time(k);
        let d = f(t) - ell_f(t);
        let scale = f(t).amax().max(1.0);
        if d.amax() > 1e-9 * scale {
            return Err(Error::ContractViolation(format!(
                "ell_f(t) != f(t) at t = {t} beyond T = {t_stop}"
            )));
        }
    }
    let dim = fs.dim();
    let integrand: Vec<DVector<f64>> = (0..=idx)
        .map(|k| {
            let t = fs.grid().time(k);
            fs.g_inv(k) * (f(t) - ell_f(t))
        })
        .collect();
    let mut out = DVector::<f64>::zeros(dim);
    for c in 0..dim {
        let comp: Vec<f64> = integrand.iter().map(|v| v[c]).collect();
        out[c] = simpson(&comp, fs.grid().step())?;
    }
    Ok(out)
}

/// Solves once from `t0`, restarts from the state at `t1`, and returns the
/// sup-norm deviation of the two solutions on `[t1, t_end]`.
pub fn no_memory_deviation<A, F>(
    a: &A,
    rhs: &F,
    u0: &DVector<f64>,
    t0: f64,
    t1: f64,
    grid: &TimeGrid,
) -> Result<f64>
where
    A: Fn(f64) -> DMatrix<f64>,
    F: Fn(f64) -> DVector<f64>,
{
    let i1 = grid
        .index_of(t1)
        .ok_or_else(|| Error::InvalidInput(format!("t1 = {t1} is not a grid node")))?;
    if i1 == 0 || i1 >= grid.n_intervals() {
        return Err(Error::InvalidInput("t1 must be strictly inside the grid".into()));
    }
    let full = solve_ivp(a, rhs, u0, t0, grid)?;
    let sub = grid.slice(i1, grid.n_intervals())?;
    let restarted = solve_ivp(a, rhs, full.value(i1), t1, &sub)?;
    let mut dev: f64 = 0.0;
    for k in 0..sub.len() {
        dev = dev.max((full.value(i1 + k) - restarted.value(k)).amax());
    }
    Ok(dev)
}

/// Outcome of a stopping-time check on a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StoppingReport {
    /// sup of |u| over grid nodes at and beyond `T`.
    pub max_abs_after: f64,
    /// sup of |u'| over the same nodes.
    pub max_deriv_after: f64,
    pub passes: bool,
}

/// Measures how well the trajectory vanishes at and beyond `T`.
pub fn stopping_check(traj: &Trajectory, t_stop: f64, tol: f64) -> Result<StoppingReport> {
    let grid = traj.grid();
    if t_stop >= grid.t_end() {
        return Err(Error::InvalidInput(format!(
            "grid must extend beyond T = {t_stop}, ends at {}",
            grid.t_end()
        )));
    }
    let first = ((t_stop - grid.t_start()) / grid.step() - 1e-9).ceil().max(0.0) as usize;
    let mut max_abs: f64 = 0.0;
    let mut max_deriv: f64 = 0.0;
    for k in first..grid.len() {
        max_abs = max_abs.max(traj.value(k).amax());
        max_deriv = max_deriv.max(traj.derivative(k).amax());
    }
    Ok(StoppingReport { max_abs_after: max_abs, max_deriv_after: max_deriv, passes: max_abs <= tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_mat(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> impl Fn(f64) -> DMatrix<f64> {
        move |t| DMatrix::from_element(1, 1, f(t))
    }

    #[test]
    fn zero_generator_gives_constant_g() {
        let grid = TimeGrid::new(0.0, 2.0, 1e-2).unwrap();
        let fs = fundamental_solution(&scalar_mat(|_| 0.0), 0.0, &grid).unwrap();
        for k in 0..grid.len() {
            assert!((fs.g(k)[(0, 0)] - 1.0).abs() < 1e-14);
            assert!((fs.g_inv(k)[(0, 0)] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_generator_matches_exponential() {
        let a0 = 0.7;
        let grid = TimeGrid::new(0.0, 2.0, 1e-3).unwrap();
        let fs = fundamental_solution(&scalar_mat(move |_| a0), 0.0, &grid).unwrap();
        for k in (0..grid.len()).step_by(100) {
            let t = grid.time(k);
            assert!((fs.g(k)[(0, 0)] - (-a0 * t).exp()).abs() < 1e-12);
        }
        assert!(fs.inverse_drift() < 1e-12);
    }

    #[test]
    fn noncommuting_system_matches_fine_grid_oracle() {
        // A(t) = [[0, t], [1, 0]] does not commute with itself across times.
        let a = |t: f64| DMatrix::from_row_slice(2, 2, &[0.0, t, 1.0, 0.0]);
        let coarse = TimeGrid::new(0.0, 1.0, 1e-2).unwrap();
        let fine = TimeGrid::new(0.0, 1.0, 1e-3).unwrap();
        let fs_c = fundamental_solution(&a, 0.0, &coarse).unwrap();
        let fs_f = fundamental_solution(&a, 0.0, &fine).unwrap();
        let diff = (fs_c.g(coarse.len() - 1) - fs_f.g(fine.len() - 1)).abs().max();
        assert!(diff < 1e-8, "coarse vs fine endpoint deviation {diff}");
    }

    #[test]
    fn integrator_is_fourth_order() {
        let a = |t: f64| DMatrix::from_row_slice(2, 2, &[0.0, t, 1.0, 0.0]);
        let reference = {
            let g = TimeGrid::new(0.0, 1.0, 1.0 / 8192.0).unwrap();
            fundamental_solution(&a, 0.0, &g).unwrap().g(g.len() - 1).clone()
        };
        let err_at = |h: f64| {
            let g = TimeGrid::new(0.0, 1.0, h).unwrap();
            let fs = fundamental_solution(&a, 0.0, &g).unwrap();
            (fs.g(g.len() - 1) - &reference).abs().max()
        };
        let ratio = err_at(1.0 / 64.0) / err_at(1.0 / 128.0);
        assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
    }

    #[test]
    fn semigroup_property_under_restart() {
        let a = |t: f64| DMatrix::from_row_slice(2, 2, &[0.1, t, (-t).sin(), 0.2]);
        let grid = TimeGrid::new(0.0, 2.0, 1e-3).unwrap();
        let fs = fundamental_solution(&a, 0.0, &grid).unwrap();
        let i1 = 800;
        let sub = grid.slice(i1, grid.n_intervals()).unwrap();
        let fs_mid = fundamental_solution(&a, grid.time(i1), &sub).unwrap();
        // G(t, t1) G(t1, t0) = G(t, t0) at a few sampled t
        for k in [100usize, 600, 1200] {
            let lhs = fs_mid.g(k) * fs.g(i1);
            let diff = (lhs - fs.g(i1 + k)).abs().max();
            assert!(diff < 1e-10, "semigroup deviation {diff}");
        }
    }

    #[test]
    fn constant_solution_and_linear_ramp() {
        let grid = TimeGrid::new(0.0, 2.0, 1e-3).unwrap();
        let traj = solve_ivp(
            &scalar_mat(|_| 0.0),
            &|_| DVector::from_element(1, 0.0),
            &DVector::from_element(1, 1.0),
            0.0,
            &grid,
        )
        .unwrap();
        assert!((traj.value(grid.len() - 1)[0] - 1.0).abs() < 1e-14);

        // u' = -(1/T) on [0, T], u0 = 1 -> u = 1 - t/T, zero afterwards.
        // The forcing jumps at T, so the two smooth legs are integrated
        // separately and glued, exactly like the controlled simulations do.
        let t_stop = 1.0;
        let a = scalar_mat(|_| 0.0);
        let head_grid = grid.slice(0, grid.index_of(t_stop).unwrap()).unwrap();
        let head = solve_ivp(
            &a,
            &|_| DVector::from_element(1, -1.0 / t_stop),
            &DVector::from_element(1, 1.0),
            0.0,
            &head_grid,
        )
        .unwrap();
        let tail_grid = grid.slice(grid.index_of(t_stop).unwrap(), grid.n_intervals()).unwrap();
        let tail = solve_ivp(
            &a,
            &|_| DVector::from_element(1, 0.0),
            head.value(head_grid.len() - 1),
            t_stop,
            &tail_grid,
        )
        .unwrap();
        let traj = head.extend_with(tail).unwrap();
        let at = |t: f64| traj.value(grid.index_of(t).unwrap())[0];
        assert!((at(0.5) - 0.5).abs() < 1e-12);
        let report = stopping_check(&traj, t_stop, 1e-12).unwrap();
        assert!(report.passes, "ramp should stop exactly: {report:?}");
    }

    #[test]
    fn uniform_control_from_ansatz() {
        // G = 1 (A = 0), shape = 1 -> ell = 1/T
        let grid = TimeGrid::new(0.0, 2.0, 1e-2).unwrap();
        let fs = fundamental_solution(&scalar_mat(|_| 0.0), 0.0, &grid).unwrap();
        let ell =
            scale_control_ansatz(&fs, |_| DMatrix::from_element(1, 1, 1.0), 2.0).unwrap();
        assert!((ell.eval(1.0)[(0, 0)] - 0.5).abs() < 1e-12);
        assert_eq!(ell.eval(2.5)[(0, 0)], 0.0);
        let res = control_residual(&fs, &ell, 2.0).unwrap();
        assert!(res.abs().max() < 1e-12);
    }

    #[test]
    fn zero_shape_is_degenerate() {
        let grid = TimeGrid::new(0.0, 1.0, 1e-2).unwrap();
        let fs = fundamental_solution(&scalar_mat(|_| 0.0), 0.0, &grid).unwrap();
        let err = scale_control_ansatz(&fs, |_| DMatrix::from_element(1, 1, 0.0), 1.0);
        assert!(matches!(err, Err(Error::DegenerateAnsatz { .. })));
    }

    #[test]
    fn zero_control_residual_is_identity() {
        let grid = TimeGrid::new(0.0, 1.0, 1e-2).unwrap();
        let fs = fundamental_solution(&scalar_mat(|_| 1.0), 0.0, &grid).unwrap();
        let ell = ControlMatrix::new(1, 1.0, |_| DMatrix::from_element(1, 1, 0.0));
        let res = control_residual(&fs, &ell, 1.0).unwrap();
        assert!((res[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn forcing_residual_cancellation_and_contract() {
        let grid = TimeGrid::new(0.0, 2.0, 1e-2).unwrap();
        let fs = fundamental_solution(&scalar_mat(|_| 1.0), 0.0, &grid).unwrap();
        let f = |_: f64| DVector::from_element(1, 1.0);
        let res = forcing_control_residual(&fs, &f, &f, 1.0).unwrap();
        assert!(res.amax() < 1e-14);

        let bad = |t: f64| DVector::from_element(1, if t > 1.0 { 0.5 } else { 1.0 });
        assert!(matches!(
            forcing_control_residual(&fs, &f, &bad, 1.0),
            Err(Error::ContractViolation(_))
        ));
    }

    #[test]
    fn restart_reproduces_solution() {
        let a = |t: f64| DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 4.0 + t.sin(), 1.0]);
        let rhs = |t: f64| DVector::from_column_slice(&[0.0, (2.0 * t).cos()]);
        let grid = TimeGrid::new(0.0, 4.0, 1e-3).unwrap();
        let dev = no_memory_deviation(
            &a,
            &rhs,
            &DVector::from_column_slice(&[1.0, 0.0]),
            0.0,
            2.0,
            &grid,
        )
        .unwrap();
        assert!(dev < 1e-10, "restart deviation {dev}");
    }

    #[test]
    fn uncontrolled_decay_fails_stopping() {
        let grid = TimeGrid::new(0.0, 8.0, 1e-3).unwrap();
        let traj = solve_ivp(
            &scalar_mat(|_| 1.0),
            &|_| DVector::from_element(1, 0.0),
            &DVector::from_element(1, 1.0),
            0.0,
            &grid,
        )
        .unwrap();
        let report = stopping_check(&traj, 5.0, 1e-8).unwrap();
        assert!(!report.passes);
        assert!((report.max_abs_after - (-5.0_f64).exp()).abs() < 1e-8);
    }
}
