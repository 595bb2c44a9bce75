//! Generalized Gaussian diffusion with a finite front speed.
//!
//! A relaxation kernel `varrho` with support `[0, T]` and an increasing front
//! radius `R(t)` induce the probability density
//!
//! ```text
//! G(x, t) = (N / sqrt(pi)) (sqrt(T) / R(t)) varrho(T x^2 / R(t)^2),   t > 0,
//! ```
//!
//! supported on `|x| <= R(t)`. It solves the heat equation with a control
//! term `-L` assembled from the kernel's own control, and alternatively an
//! uncontrolled heat equation with a space-time diffusivity `D(x, t)` built
//! from the reconstructed relaxation time.
//!
//! Verification is by pointwise finite-difference residuals: second-order
//! central stencils on nodes whose full stencil stays strictly inside the
//! front and away from the front radius' branch seam, where the field has the
//! four derivatives the stencil error bound needs. Residuals on stencils that
//! straddle the front or the seam are reported separately.

use crate::error::{Error, Result};
use crate::quad::adaptive_simpson;
use crate::relaxation::{ControlFunction, RateFunction, RelaxationKernel};

/// Front radius `R(t)`: positive, increasing, with the front speed `R'(t)`.
#[derive(Debug, Clone, Copy)]
pub enum FrontRadius {
    /// `R = sqrt(4 T D0 t / tau0)`; the speed is unbounded as `t -> 0+`.
    Sqrt { d0: f64, tau0: f64, t_scale: f64 },
    /// Polynomial start `sqrt(D0 T / t0^3) (-t^2 + 3 t0 t)` switching to
    /// `sqrt(4 T D0 t)` at `t0`; speed capped by `c0 = 3 sqrt(D0 T / t0)`.
    Capped { d0: f64, t_knee: f64, t_scale: f64, c0: f64 },
}

pub fn front_radius_sqrt(d0: f64, tau0: f64, t_scale: f64) -> Result<FrontRadius> {
    if !(d0 > 0.0 && tau0 > 0.0 && t_scale > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need D0, tau0, T > 0, got {d0}, {tau0}, {t_scale}"
        )));
    }
    Ok(FrontRadius::Sqrt { d0, tau0, t_scale })
}

pub fn front_radius_capped(d0: f64, t_knee: f64, t_scale: f64) -> Result<FrontRadius> {
    if !(d0 > 0.0 && t_knee > 0.0 && t_scale > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need D0, t0, T > 0, got {d0}, {t_knee}, {t_scale}"
        )));
    }
    let c0 = 3.0 * (d0 * t_scale / t_knee).sqrt();
    let front = FrontRadius::Capped { d0, t_knee, t_scale, c0 };
    // C^1 continuity at the knee is structural; guard the arithmetic anyway.
    let left = (d0 * t_scale / t_knee.powi(3)).sqrt() * (2.0 * t_knee * t_knee);
    let right = (4.0 * t_scale * d0 * t_knee).sqrt();
    if (left - right).abs() > 1e-9 * right {
        return Err(Error::InvalidInput(format!(
            "front branches disagree at t0: {left} vs {right}"
        )));
    }
    Ok(front)
}

impl FrontRadius {
    pub fn radius(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match self {
            Self::Sqrt { d0, tau0, t_scale } => (4.0 * t_scale * d0 * t / tau0).sqrt(),
            Self::Capped { d0, t_knee, t_scale, .. } => {
                if t <= *t_knee {
                    (d0 * t_scale / t_knee.powi(3)).sqrt() * (-t * t + 3.0 * t_knee * t)
                } else {
                    (4.0 * t_scale * d0 * t).sqrt()
                }
            }
        }
    }

    pub fn speed(&self, t: f64) -> f64 {
        match self {
            Self::Sqrt { d0, tau0, t_scale } => {
                if t <= 0.0 {
                    f64::INFINITY
                } else {
                    (t_scale * d0 / (tau0 * t)).sqrt()
                }
            }
            Self::Capped { d0, t_knee, t_scale, .. } => {
                let t = t.max(0.0);
                if t <= *t_knee {
                    (d0 * t_scale / t_knee.powi(3)).sqrt() * (-2.0 * t + 3.0 * t_knee)
                } else {
                    (t_scale * d0 / t).sqrt()
                }
            }
        }
    }

    /// Speed bound, where one exists.
    pub fn cap(&self) -> Option<f64> {
        match self {
            Self::Sqrt { .. } => None,
            Self::Capped { c0, .. } => Some(*c0),
        }
    }

    /// Time where the radius switches branches (a `C^1` seam).
    pub fn seam(&self) -> Option<f64> {
        match self {
            Self::Sqrt { .. } => None,
            Self::Capped { t_knee, .. } => Some(*t_knee),
        }
    }

    pub fn speed_unbounded_at_origin(&self) -> bool {
        matches!(self, Self::Sqrt { .. })
    }

    /// The `T` entering the similarity variable `s = sqrt(T) x / R`.
    pub fn t_scale(&self) -> f64 {
        match self {
            Self::Sqrt { t_scale, .. } | Self::Capped { t_scale, .. } => *t_scale,
        }
    }

    pub fn d0(&self) -> f64 {
        match self {
            Self::Sqrt { d0, .. } | Self::Capped { d0, .. } => *d0,
        }
    }
}

/// The kernel-induced probability density with compactly supported profiles.
#[derive(Debug, Clone)]
pub struct GeneralizedGaussian {
    kernel: RelaxationKernel,
    front: FrontRadius,
    normalization: f64,
}

pub fn generalized_gaussian(
    kernel: RelaxationKernel,
    front: FrontRadius,
) -> Result<GeneralizedGaussian> {
    let t_scale = front.t_scale();
    if let Some(ts) = kernel.t_stop() {
        if (ts - t_scale).abs() > 1e-9 * ts.max(1.0) {
            return Err(Error::ContractViolation(format!(
                "kernel stops at {ts} but the front is scaled by T = {t_scale}"
            )));
        }
    }
    // The integrand is even and vanishes beyond sigma^2 = T for finite
    // kernels; the classical kernel needs the bound pushed to where
    // e^{-sigma^2} is below roundoff.
    let bound = match kernel.t_stop() {
        Some(_) => t_scale.sqrt(),
        None => t_scale.sqrt().max(40.0_f64.sqrt()),
    };
    let half = adaptive_simpson(|s| kernel.value(s * s), 0.0, bound, 1e-12)?;
    let integral = 2.0 * half;
    if !(integral.is_finite() && integral > 1e-300) {
        return Err(Error::InvalidKernel(format!(
            "normalization integral {integral} is degenerate"
        )));
    }
    Ok(GeneralizedGaussian {
        kernel,
        front,
        normalization: std::f64::consts::PI.sqrt() / integral,
    })
}

impl GeneralizedGaussian {
    pub fn kernel(&self) -> &RelaxationKernel {
        &self.kernel
    }

    pub fn front(&self) -> &FrontRadius {
        &self.front
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Similarity variable squared, `s^2 = T x^2 / R(t)^2`.
    pub fn s_squared(&self, x: f64, t: f64) -> f64 {
        let r = self.front.radius(t);
        self.front.t_scale() * x * x / (r * r)
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let t_scale = self.front.t_scale();
        let r = self.front.radius(t);
        let v = t_scale * x * x / (r * r);
        self.normalization / std::f64::consts::PI.sqrt() * t_scale.sqrt() / r
            * self.kernel.value(v)
    }

    /// `\int G(., t) dx` by Simpson over the support (or an effective support
    /// in the classical case).
    pub fn mass(&self, t: f64, n_intervals: usize) -> Result<f64> {
        if t <= 0.0 {
            return Err(Error::InvalidInput("mass is defined for t > 0".into()));
        }
        let r = self.front.radius(t);
        let bound = match self.kernel.t_stop() {
            Some(_) => r,
            // e^{-T x^2 / R^2} below 1e-17 past this point
            None => r * (40.0 / self.front.t_scale()).sqrt(),
        };
        let h = 2.0 * bound / n_intervals as f64;
        let values: Vec<f64> =
            (0..=n_intervals).map(|i| self.value(-bound + i as f64 * h, t)).collect();
        crate::quad::simpson(&values, h)
    }

    /// Largest |value| sampled outside the front radius; exactly zero for
    /// compactly supported kernels.
    pub fn max_outside_front(&self, t: f64, n_scan: usize) -> f64 {
        let r = self.front.radius(t);
        let mut worst: f64 = 0.0;
        for i in 0..=n_scan {
            let x = r * (1.0 + 2.0 * i as f64 / n_scan as f64);
            worst = worst.max(self.value(x, t).abs()).max(self.value(-x, t).abs());
        }
        worst
    }

    /// Coefficient fields of the control term for diffusivity `d0`.
    pub fn control_coeffs(&self, d0: f64) -> Result<DiffusionCoeffs> {
        let tau0 = self.kernel.tau0().ok_or_else(|| {
            Error::ContractViolation("kernel has no first-order relaxation form".into())
        })?;
        Ok(DiffusionCoeffs {
            front: self.front,
            norm_over_sqrt_pi: self.normalization / std::f64::consts::PI.sqrt(),
            t_scale: self.front.t_scale(),
            tau0,
            d0,
        })
    }
}

/// The three coefficient fields multiplying `varrho`, `ell`, `ell'` in the
/// control term of the forced heat equation.
#[derive(Debug, Clone, Copy)]
pub struct DiffusionCoeffs {
    front: FrontRadius,
    norm_over_sqrt_pi: f64,
    t_scale: f64,
    tau0: f64,
    d0: f64,
}

impl DiffusionCoeffs {
    fn common(&self, t: f64) -> (f64, f64, f64) {
        let r = self.front.radius(t);
        let dr = self.front.speed(t);
        // R' - 2 T D0 / (tau0 R): identically zero for the sqrt front
        let gap = dr - 2.0 * self.t_scale * self.d0 / (self.tau0 * r);
        (r, dr, gap)
    }

    pub fn a0(&self, x: f64, t: f64) -> f64 {
        let (r, _, gap) = self.common(t);
        let s2 = self.t_scale * x * x / (r * r);
        self.norm_over_sqrt_pi * self.t_scale.sqrt() / (r * r)
            * (2.0 * s2 / self.tau0 - 1.0)
            * gap
    }

    pub fn a1(&self, x: f64, t: f64) -> f64 {
        let (r, _, gap) = self.common(t);
        let s2 = self.t_scale * x * x / (r * r);
        self.norm_over_sqrt_pi * self.t_scale.sqrt() / (r * r)
            * (2.0 * gap * s2 + 2.0 * self.t_scale * self.d0 / r)
    }

    pub fn a2(&self, x: f64, t: f64) -> f64 {
        let r = self.front.radius(t);
        let s2 = self.t_scale * x * x / (r * r);
        self.norm_over_sqrt_pi * 4.0 * self.t_scale.powf(1.5) * self.d0 / (r * r * r) * s2
    }
}

/// Control term `L(x, t) = -a0 varrho(s^2) - a1 ell(s^2) - a2 ell'(s^2)`.
#[derive(Debug, Clone)]
pub struct DiffusionControl {
    coeffs: DiffusionCoeffs,
    kernel: RelaxationKernel,
}

/// Assembles the control term. When `ell` is given it must be the control of
/// the kernel's own defining relaxation; `None` uses the kernel's control
/// directly (zero for the classical kernel).
pub fn diffusion_control_l(
    gg: &GeneralizedGaussian,
    ell: Option<&ControlFunction>,
    d0: f64,
) -> Result<DiffusionControl> {
    let coeffs = gg.control_coeffs(d0)?;
    if let Some(ell) = ell {
        if let Some(ts) = gg.kernel().t_stop() {
            if (ell.t_stop() - ts).abs() > 1e-9 * ts.max(1.0) {
                return Err(Error::ContractViolation(format!(
                    "control stops at {} but the kernel stops at {ts}",
                    ell.t_stop()
                )));
            }
        }
        // spot-check the pair against the kernel's own control
        for i in 0..=16 {
            let v = gg.front().t_scale() * i as f64 / 16.0;
            let own = gg.kernel().control_value(v);
            if (ell.value(v) - own).abs() > 1e-9 * own.abs().max(1.0) {
                return Err(Error::ContractViolation(format!(
                    "control does not match the kernel's defining relaxation at v = {v}"
                )));
            }
        }
    }
    Ok(DiffusionControl { coeffs, kernel: gg.kernel().clone() })
}

impl DiffusionControl {
    pub fn value(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let r = self.coeffs.front.radius(t);
        let s2 = self.coeffs.t_scale * x * x / (r * r);
        if let Some(ts) = self.kernel.t_stop() {
            if s2 >= ts {
                return 0.0;
            }
        }
        -self.coeffs.a0(x, t) * self.kernel.value(s2)
            - self.coeffs.a1(x, t) * self.kernel.control_value(s2)
            - self.coeffs.a2(x, t) * self.kernel.control_deriv(s2)
    }

    pub fn coeffs(&self) -> &DiffusionCoeffs {
        &self.coeffs
    }
}

/// Rectangular space-time scan region.
#[derive(Debug, Clone, Copy)]
pub struct Region {
    pub x_min: f64,
    pub x_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

/// Pointwise residual maxima of the forced heat equation over a scan region.
#[derive(Debug, Clone, Copy)]
pub struct ResidualReport {
    /// max over nodes whose full stencil is strictly inside the front and
    /// clear of the branch seam
    pub interior_max: f64,
    /// max over nodes whose stencil straddles the front or the seam
    pub boundary_band_max: f64,
    /// max over nodes entirely outside the front (identically zero field)
    pub outside_max: f64,
    pub n_interior: usize,
    pub n_band: usize,
    pub hx: f64,
    pub ht: f64,
}

enum NodeClass {
    Interior,
    Band,
    Outside,
}

fn classify(gg: &GeneralizedGaussian, x: f64, t: f64, hx: f64, ht: f64) -> NodeClass {
    let t_stop = match gg.kernel().t_stop() {
        Some(ts) => ts,
        None => {
            // no front; only the seam (if any) can spoil smoothness
            if let Some(seam) = gg.front().seam() {
                if t - ht < seam && t + ht > seam {
                    return NodeClass::Band;
                }
            }
            return NodeClass::Interior;
        }
    };
    let margin = t_stop * 1e-12;
    let inside = |x: f64, t: f64| gg.s_squared(x, t) < t_stop - margin;
    let outside = |x: f64, t: f64| gg.s_squared(x, t) > t_stop + margin;
    let pts = [(x, t), (x + hx, t), (x - hx, t), (x, t + ht), (x, t - ht)];
    if let Some(seam) = gg.front().seam() {
        if t - ht < seam && t + ht > seam {
            return NodeClass::Band;
        }
    }
    if pts.iter().all(|&(px, pt)| inside(px, pt)) {
        NodeClass::Interior
    } else if pts.iter().all(|&(px, pt)| outside(px, pt)) {
        NodeClass::Outside
    } else {
        NodeClass::Band
    }
}

/// Scans `|dG/dt - D0 d2G/dx2 + L|` with second-order central stencils.
pub fn pde_residual(
    gg: &GeneralizedGaussian,
    control: Option<&DiffusionControl>,
    d0: f64,
    region: &Region,
    hx: f64,
    ht: f64,
) -> Result<ResidualReport> {
    if region.t_min - ht <= 0.0 {
        return Err(Error::InvalidInput(
            "time stencil reaches t <= 0 where the field is singular".into(),
        ));
    }
    if gg.kernel().t_stop().is_some() {
        let r = gg.front().radius(region.t_min);
        if 2.0 * r / hx < 5.0 {
            return Err(Error::ResolutionTooCoarse(format!(
                "only {:.1} nodes across the front at t = {}",
                2.0 * r / hx,
                region.t_min
            )));
        }
    }
    let nx = ((region.x_max - region.x_min) / hx).round() as usize;
    let nt = ((region.t_max - region.t_min) / ht).round() as usize;
    let mut report = ResidualReport {
        interior_max: 0.0,
        boundary_band_max: 0.0,
        outside_max: 0.0,
        n_interior: 0,
        n_band: 0,
        hx,
        ht,
    };
    for i in 0..=nx {
        let x = region.x_min + i as f64 * hx;
        for j in 0..=nt {
            let t = region.t_min + j as f64 * ht;
            let gt = (gg.value(x, t + ht) - gg.value(x, t - ht)) / (2.0 * ht);
            let gxx = (gg.value(x + hx, t) - 2.0 * gg.value(x, t) + gg.value(x - hx, t))
                / (hx * hx);
            let l = control.map_or(0.0, |c| c.value(x, t));
            let res = (gt - d0 * gxx + l).abs();
            match classify(gg, x, t, hx, ht) {
                NodeClass::Interior => {
                    report.interior_max = report.interior_max.max(res);
                    report.n_interior += 1;
                }
                NodeClass::Band => {
                    report.boundary_band_max = report.boundary_band_max.max(res);
                    report.n_band += 1;
                }
                NodeClass::Outside => report.outside_max = report.outside_max.max(res),
            }
        }
    }
    if report.n_interior == 0 {
        return Err(Error::ResolutionTooCoarse("no clean interior nodes in the region".into()));
    }
    Ok(report)
}

/// Interior residual maxima over dyadically refined grids, with the measured
/// per-step orders and their least-squares fit.
#[derive(Debug, Clone)]
pub struct RefinementReport {
    pub step_sizes: Vec<f64>,
    pub interior_maxima: Vec<f64>,
    pub stepwise_orders: Vec<f64>,
    pub order_estimate: f64,
}

pub fn refinement_study(
    gg: &GeneralizedGaussian,
    control: Option<&DiffusionControl>,
    d0: f64,
    region: &Region,
    h0: f64,
    levels: usize,
) -> Result<RefinementReport> {
    if levels < 2 {
        return Err(Error::InvalidInput("need at least two refinement levels".into()));
    }
    let mut step_sizes = Vec::with_capacity(levels);
    let mut maxima = Vec::with_capacity(levels);
    for k in 0..levels {
        let h = h0 / (1 << k) as f64;
        let rep = pde_residual(gg, control, d0, region, h, h)?;
        step_sizes.push(h);
        maxima.push(rep.interior_max);
    }
    let stepwise: Vec<f64> =
        maxima.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    // least-squares slope of log2(error) against refinement level
    let n = maxima.len() as f64;
    let mean_k = (0..maxima.len()).map(|k| k as f64).sum::<f64>() / n;
    let logs: Vec<f64> = maxima.iter().map(|e| e.log2()).collect();
    let mean_e = logs.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (k, le) in logs.iter().enumerate() {
        num += (k as f64 - mean_k) * (le - mean_e);
        den += (k as f64 - mean_k) * (k as f64 - mean_k);
    }
    Ok(RefinementReport {
        step_sizes,
        interior_maxima: maxima,
        stepwise_orders: stepwise,
        order_estimate: -num / den,
    })
}

/// Space-time diffusivity reproducing the kernel field without a control
/// term: on the support,
///
/// ```text
/// D = R R' tau(s^2) [tau(s^2) - 2 s^2] / (2 T [tau(s^2) - 2 s^2 (1 + tau'(s^2))]),
/// ```
///
/// zero outside. `tau` is the reconstructed relaxation time of the kernel as
/// a function of the similarity variable.
#[derive(Debug, Clone)]
pub struct DiffusivityField {
    rate: RateFunction,
    front: FrontRadius,
    t_scale: f64,
}

pub fn variable_diffusivity(
    rate: RateFunction,
    front: FrontRadius,
    t_scale: f64,
) -> DiffusivityField {
    DiffusivityField { rate, front, t_scale }
}

impl DiffusivityField {
    fn tau_and_slope(&self, v: f64) -> (f64, f64) {
        let tau = self.rate.tau(v);
        let a = self.rate.a(v);
        let dtau = -self.rate.da(v) / (a * a);
        (tau, dtau)
    }

    /// Denominator of the quotient; singularity reports are based on it.
    pub fn denominator(&self, x: f64, t: f64) -> f64 {
        let r = self.front.radius(t);
        let v = self.t_scale * x * x / (r * r);
        let (tau, dtau) = self.tau_and_slope(v);
        tau - 2.0 * v * (1.0 + dtau)
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let r = self.front.radius(t);
        let v = self.t_scale * x * x / (r * r);
        if v >= self.t_scale {
            return 0.0;
        }
        let (tau, dtau) = self.tau_and_slope(v);
        let den = tau - 2.0 * v * (1.0 + dtau);
        r * self.front.speed(t) * tau * (tau - 2.0 * v) / (2.0 * self.t_scale * den)
    }

    /// Scans the support for negative values and near-singular denominators.
    pub fn nonnegativity_scan(&self, region: &Region, n: usize) -> DiffusivityScan {
        let mut scan = DiffusivityScan {
            min_value: f64::INFINITY,
            n_negative: 0,
            min_abs_denominator: f64::INFINITY,
            argmin: (0.0, 0.0),
        };
        for i in 0..=n {
            let x = region.x_min + (region.x_max - region.x_min) * i as f64 / n as f64;
            for j in 0..=n {
                let t = region.t_min + (region.t_max - region.t_min) * j as f64 / n as f64;
                let r = self.front.radius(t);
                let v = self.t_scale * x * x / (r * r);
                if v >= self.t_scale * (1.0 - 1e-9) {
                    continue;
                }
                let d = self.value(x, t);
                if d < scan.min_value {
                    scan.min_value = d;
                    scan.argmin = (x, t);
                }
                if d < 0.0 {
                    scan.n_negative += 1;
                }
                scan.min_abs_denominator =
                    scan.min_abs_denominator.min(self.denominator(x, t).abs());
            }
        }
        scan
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DiffusivityScan {
    pub min_value: f64,
    pub n_negative: usize,
    pub min_abs_denominator: f64,
    pub argmin: (f64, f64),
}

/// Residual of the uncontrolled equation with space-time diffusivity,
/// `|dG/dt - D(x,t) d2G/dx2|`, restricted to clean interior stencils.
pub fn residual_variable_d(
    gg: &GeneralizedGaussian,
    dfield: &DiffusivityField,
    region: &Region,
    hx: f64,
    ht: f64,
) -> Result<ResidualReport> {
    if region.t_min - ht <= 0.0 {
        return Err(Error::InvalidInput(
            "time stencil reaches t <= 0 where the field is singular".into(),
        ));
    }
    let nx = ((region.x_max - region.x_min) / hx).round() as usize;
    let nt = ((region.t_max - region.t_min) / ht).round() as usize;
    let mut report = ResidualReport {
        interior_max: 0.0,
        boundary_band_max: 0.0,
        outside_max: 0.0,
        n_interior: 0,
        n_band: 0,
        hx,
        ht,
    };
    for i in 0..=nx {
        let x = region.x_min + i as f64 * hx;
        for j in 0..=nt {
            let t = region.t_min + j as f64 * ht;
            let gt = (gg.value(x, t + ht) - gg.value(x, t - ht)) / (2.0 * ht);
            let gxx = (gg.value(x + hx, t) - 2.0 * gg.value(x, t) + gg.value(x - hx, t))
                / (hx * hx);
            let res = (gt - dfield.value(x, t) * gxx).abs();
            match classify(gg, x, t, hx, ht) {
                NodeClass::Interior => {
                    report.interior_max = report.interior_max.max(res);
                    report.n_interior += 1;
                }
                NodeClass::Band => {
                    report.boundary_band_max = report.boundary_band_max.max(res);
                    report.n_band += 1;
                }
                NodeClass::Outside => report.outside_max = report.outside_max.max(res),
            }
        }
    }
    if report.n_interior == 0 {
        return Err(Error::ResolutionTooCoarse("no clean interior nodes in the region".into()));
    }
    Ok(report)
}
