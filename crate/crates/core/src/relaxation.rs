//! Scalar relaxation with finite stopping time.
//!
//! The classical process `rho(t) = exp(-\int_0^t 1/tau)` decays forever. A
//! control `ell` supported on `[0, T]` with the normalization
//! `\int_0^T ell(s)/rho(s) ds = 1` forces the controlled process
//!
//! ```text
//! varrho(t) = rho(t) [ 1 - \int_0^t ell(s)/rho(s) ds ]
//! ```
//!
//! to vanish identically for `t >= T`. Two control families are provided for
//! `tau = 1`: the polynomial one `ell_n ~ (T-t)^n` (the process is then `C^n`)
//! and the flat bump `ell_inf ~ exp(-t^2/(T^2-t^2))` (the process is
//! `C^inf`). The same processes can be written as uncontrolled relaxations
//! with a time-dependent relaxation time `tau_T` that hits zero at `T`; the
//! reconstruction and the energy-monotonicity criterion `a^2 >= a'` for the
//! rate `a = 1/tau_T` live here as well.

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::quad::{adaptive_simpson, expm1_minus_x, expm1_minus_x_minus_half_x2};

/// Relative tolerance used for the internal normalization quadratures.
const QUAD_RTOL: f64 = 1e-13;

/// Relaxation time, constant or time-varying.
pub enum Tau {
    Constant(f64),
    TimeVarying(Box<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Tau {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Self::Constant(v) => *v,
            Self::TimeVarying(f) => f(t),
        }
    }

    /// `\int_0^t 1/tau(s) ds`.
    fn log_decay(&self, t: f64) -> Result<f64> {
        match self {
            Self::Constant(v) => {
                if *v <= 0.0 {
                    return Err(Error::InvalidInput(format!("tau must be positive, got {v}")));
                }
                Ok(t / v)
            }
            Self::TimeVarying(f) => {
                let m = 1000;
                for i in 0..=m {
                    let s = t * i as f64 / m as f64;
                    if f(s) <= 0.0 {
                        return Err(Error::InvalidInput(format!(
                            "tau must be positive on [0, t]; tau({s}) = {}",
                            f(s)
                        )));
                    }
                }
                adaptive_simpson(|s| 1.0 / f(s), 0.0, t, 1e-12)
            }
        }
    }
}

/// `rho(t) = exp(-\int_0^t 1/tau(s) ds)`, the uncontrolled relaxation.
pub fn classical_rho(tau: &Tau, t: f64) -> Result<f64> {
    Ok((-tau.log_decay(t)?).exp())
}

/// Smoothness order of a control family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Smoothness {
    Finite(u32),
    Infinite,
}

impl std::fmt::Display for Smoothness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Finite(n) => write!(f, "C^{n}"),
            Self::Infinite => write!(f, "C^inf"),
        }
    }
}

#[derive(Debug, Clone)]
enum ControlKind {
    /// `(T-t)^n / \int_0^T e^{rate s} (T-s)^n ds`
    Poly { n: u32, rate: f64, denom: f64 },
    /// `exp(-t^2/(T^2-t^2)) / \int_0^T e^s exp(-s^2/(T^2-s^2)) ds`
    Bump { denom: f64, cutoff: f64 },
    /// No control at all (infinite stopping time).
    Zero,
}

/// Scalar control supported on `[0, T]`, normalized against the uncontrolled
/// relaxation of its decay rate.
#[derive(Debug, Clone)]
pub struct ControlFunction {
    t_stop: f64,
    kind: ControlKind,
}

impl ControlFunction {
    /// `ell_n(t) = (T-t)^n / \int_0^T e^s (T-s)^n ds` on `[0, T]`, the control
    /// that makes the `tau = 1` relaxation `C^n` and stop at `T`.
    pub fn ell_poly(n: u32, t_stop: f64) -> Result<Self> {
        Self::ell_poly_with_rate(n, t_stop, 1.0)
    }

    /// Same family normalized against decay rate `a0` (`rho = e^{-a0 t}`).
    pub fn ell_poly_with_rate(n: u32, t_stop: f64, rate: f64) -> Result<Self> {
        if !(t_stop.is_finite() && t_stop > 0.0) {
            return Err(Error::InvalidInput(format!("T must be positive, got {t_stop}")));
        }
        if n == 0 {
            return Err(Error::InvalidInput("polynomial order must be >= 1".into()));
        }
        let denom =
            adaptive_simpson(|s| (rate * s).exp() * (t_stop - s).powi(n as i32), 0.0, t_stop, QUAD_RTOL)?;
        Ok(Self { t_stop, kind: ControlKind::Poly { n, rate, denom } })
    }

    /// `ell_inf(t) = exp(-t^2/(T^2-t^2)) / \int_0^T e^s exp(-s^2/(T^2-s^2)) ds`.
    ///
    /// The integrand is below 1e-16 past `T sqrt(L/(L+1))` with `L = 16 ln 10`;
    /// the quadrature stops there and the function is extended by zero.
    pub fn ell_bump(t_stop: f64) -> Result<Self> {
        if !(t_stop.is_finite() && t_stop > 0.0) {
            return Err(Error::InvalidInput(format!("T must be positive, got {t_stop}")));
        }
        let l = 16.0 * std::f64::consts::LN_10;
        let cutoff = t_stop * (l / (l + 1.0)).sqrt();
        let denom = adaptive_simpson(
            |s| s.exp() * (-s * s / (t_stop * t_stop - s * s)).exp(),
            0.0,
            cutoff,
            QUAD_RTOL,
        )?;
        Ok(Self { t_stop, kind: ControlKind::Bump { denom, cutoff } })
    }

    /// The absent control (infinite stopping time, value identically zero).
    pub fn zero() -> Self {
        Self { t_stop: f64::INFINITY, kind: ControlKind::Zero }
    }

    pub fn t_stop(&self) -> f64 {
        self.t_stop
    }

    pub fn smoothness(&self) -> Smoothness {
        match &self.kind {
            ControlKind::Poly { n, .. } => Smoothness::Finite(*n),
            ControlKind::Bump { .. } | ControlKind::Zero => Smoothness::Infinite,
        }
    }

    /// Decay rate of the relaxation this control is normalized against.
    pub fn rate(&self) -> f64 {
        match &self.kind {
            ControlKind::Poly { rate, .. } => *rate,
            ControlKind::Bump { .. } => 1.0,
            ControlKind::Zero => 1.0,
        }
    }

    fn in_support(&self, t: f64) -> bool {
        let eps = 1e-12 * self.t_stop.max(1.0);
        t >= -eps && t <= self.t_stop + eps
    }

    pub fn value(&self, t: f64) -> f64 {
        if !self.in_support(t) {
            return 0.0;
        }
        let t = t.clamp(0.0, self.t_stop);
        match &self.kind {
            ControlKind::Poly { n, denom, .. } => (self.t_stop - t).powi(*n as i32) / denom,
            ControlKind::Bump { denom, cutoff } => {
                if t >= *cutoff {
                    0.0
                } else {
                    (-t * t / (self.t_stop * self.t_stop - t * t)).exp() / denom
                }
            }
            ControlKind::Zero => 0.0,
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if !self.in_support(t) {
            return 0.0;
        }
        let t = t.clamp(0.0, self.t_stop);
        match &self.kind {
            ControlKind::Poly { n, denom, .. } => {
                -(*n as f64) * (self.t_stop - t).powi(*n as i32 - 1) / denom
            }
            ControlKind::Bump { denom, cutoff } => {
                if t >= *cutoff {
                    0.0
                } else {
                    let t2 = self.t_stop * self.t_stop;
                    let d = t2 - t * t;
                    (-t * t / d).exp() * (-2.0 * t * t2 / (d * d)) / denom
                }
            }
            ControlKind::Zero => 0.0,
        }
    }

    /// `\int_0^T ell(s)/rho_{rate}(s) ds - 1`, recomputed independently of the
    /// stored denominator; zero up to quadrature error by construction.
    pub fn normalization_residual(&self) -> Result<f64> {
        if matches!(self.kind, ControlKind::Zero) {
            return Ok(0.0);
        }
        let rate = self.rate();
        let upper = match &self.kind {
            ControlKind::Bump { cutoff, .. } => *cutoff,
            _ => self.t_stop,
        };
        let integral =
            adaptive_simpson(|s| (rate * s).exp() * self.value(s), 0.0, upper, 1e-12)?;
        Ok(integral - 1.0)
    }
}

/// How the kernel's one-sided derivative at the stopping time behaves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndpointSlope {
    Zero,
    Finite(f64),
    Unbounded,
}

/// A relaxation process: positive, decreasing, causal, optionally stopping at
/// a finite time.
#[derive(Debug, Clone)]
pub enum RelaxationKernel {
    /// `e^{-t/tau0}`, infinite stopping time.
    Classical { tau0: f64 },
    /// `e^{-t} [1 - I(t)/I(T)]` with `I(t) = \int_0^t e^s p(s) ds`, evaluated
    /// by quadrature; `p` is the numerator of the stored control.
    VarrhoQuad { control: ControlFunction, i_total: f64 },
    /// Closed form of the `n = 1` member: `(e^{T-t} + t - (T+1)) / (e^T - (T+1))`.
    Varrho1 { t_stop: f64 },
    /// Closed form of the `n = 2` member.
    Varrho2 { t_stop: f64 },
    /// `(1 - t/T)^{mu T}`, the power-law stopper.
    PowerLaw { mu: f64, t_stop: f64 },
}

/// `varrho_n` via the quadrature route (`n` finite or the bump family).
pub fn varrho_n(order: Smoothness, t_stop: f64) -> Result<RelaxationKernel> {
    if !(t_stop.is_finite() && t_stop > 0.0) {
        return Err(Error::InvalidInput(format!("T must be positive, got {t_stop}")));
    }
    if t_stop < 1.0 {
        eprintln!(
            "warning: varrho kernel with T = {t_stop} < 1; the kernel remains valid but no \
             longer approximates e^(-t)"
        );
    }
    let control = match order {
        Smoothness::Finite(n) => ControlFunction::ell_poly(n, t_stop)?,
        Smoothness::Infinite => ControlFunction::ell_bump(t_stop)?,
    };
    // I(T) equals the control's normalization denominator; recompute the
    // ratio representation from the control itself.
    let i_total = match &control.kind {
        ControlKind::Poly { denom, .. } | ControlKind::Bump { denom, .. } => *denom,
        ControlKind::Zero => unreachable!(),
    };
    Ok(RelaxationKernel::VarrhoQuad { control, i_total })
}

/// Closed forms for `n = 1, 2` (printed formulas, exported as closed-form).
pub fn varrho_closed(n: u32, t_stop: f64) -> Result<RelaxationKernel> {
    if !(t_stop.is_finite() && t_stop > 0.0) {
        return Err(Error::InvalidInput(format!("T must be positive, got {t_stop}")));
    }
    match n {
        1 => Ok(RelaxationKernel::Varrho1 { t_stop }),
        2 => Ok(RelaxationKernel::Varrho2 { t_stop }),
        _ => Err(Error::InvalidInput(format!("closed forms exist for n in {{1, 2}}, got {n}"))),
    }
}

/// `(1 - t/T)^{mu T}` with rate `a(t) = mu T / (T - t)`.
pub fn power_law(mu: f64, t_stop: f64) -> Result<RelaxationKernel> {
    if !(mu > 0.0 && t_stop > 0.0 && mu.is_finite() && t_stop.is_finite()) {
        return Err(Error::InvalidInput(format!("need mu, T > 0, got mu = {mu}, T = {t_stop}")));
    }
    Ok(RelaxationKernel::PowerLaw { mu, t_stop })
}

impl RelaxationKernel {
    pub fn t_stop(&self) -> Option<f64> {
        match self {
            Self::Classical { .. } => None,
            Self::VarrhoQuad { control, .. } => Some(control.t_stop),
            Self::Varrho1 { t_stop } | Self::Varrho2 { t_stop } | Self::PowerLaw { t_stop, .. } => {
                Some(*t_stop)
            }
        }
    }

    pub fn closed_form(&self) -> bool {
        !matches!(self, Self::VarrhoQuad { .. })
    }

    /// Relaxation time of the defining first-order equation, where one exists.
    pub fn tau0(&self) -> Option<f64> {
        match self {
            Self::Classical { tau0 } => Some(*tau0),
            Self::VarrhoQuad { .. } | Self::Varrho1 { .. } | Self::Varrho2 { .. } => Some(1.0),
            Self::PowerLaw { .. } => None,
        }
    }

    fn past_stop(&self, t: f64) -> bool {
        match self.t_stop() {
            Some(ts) => t >= ts,
            None => false,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        if self.past_stop(t) {
            return 0.0;
        }
        match self {
            Self::Classical { tau0 } => (-t / tau0).exp(),
            Self::VarrhoQuad { control, i_total } => {
                let i_t = self.poly_integral(control, t);
                (-t).exp() * (1.0 - i_t / i_total)
            }
            Self::Varrho1 { t_stop } => expm1_minus_x(t_stop - t) / expm1_minus_x(*t_stop),
            Self::Varrho2 { t_stop } => {
                expm1_minus_x_minus_half_x2(t_stop - t) / expm1_minus_x_minus_half_x2(*t_stop)
            }
            Self::PowerLaw { mu, t_stop } => (1.0 - t / t_stop).powf(mu * t_stop),
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if t < 0.0 || self.past_stop(t) {
            return 0.0;
        }
        match self {
            Self::Classical { tau0 } => -(-t / tau0).exp() / tau0,
            Self::VarrhoQuad { control, i_total } => {
                -self.value(t) - control_numerator(control, t) / i_total
            }
            Self::Varrho1 { t_stop } => -(t_stop - t).exp_m1() / expm1_minus_x(*t_stop),
            Self::Varrho2 { t_stop } => {
                -expm1_minus_x(t_stop - t) / expm1_minus_x_minus_half_x2(*t_stop)
            }
            Self::PowerLaw { mu, t_stop } => -mu * (1.0 - t / t_stop).powf(mu * t_stop - 1.0),
        }
    }

    pub fn deriv2(&self, t: f64) -> f64 {
        if t < 0.0 || self.past_stop(t) {
            return 0.0;
        }
        match self {
            Self::Classical { tau0 } => (-t / tau0).exp() / (tau0 * tau0),
            Self::VarrhoQuad { control, i_total } => {
                let p = control_numerator(control, t);
                let dp = control_numerator_deriv(control, t);
                self.value(t) + (p - dp) / i_total
            }
            Self::Varrho1 { t_stop } => (t_stop - t).exp() / expm1_minus_x(*t_stop),
            Self::Varrho2 { t_stop } => {
                (t_stop - t).exp_m1() / expm1_minus_x_minus_half_x2(*t_stop)
            }
            Self::PowerLaw { mu, t_stop } => {
                mu * (mu * t_stop - 1.0) / t_stop * (1.0 - t / t_stop).powf(mu * t_stop - 2.0)
            }
        }
    }

    /// Decay rate `a(t) = -varrho'(t)/varrho(t)`; closed and cancellation-safe
    /// for the closed-form kernels.
    pub fn rate_value(&self, t: f64) -> f64 {
        match self {
            Self::Classical { tau0 } => 1.0 / tau0,
            Self::Varrho1 { t_stop } => {
                let u = t_stop - t;
                u.exp_m1() / expm1_minus_x(u)
            }
            Self::Varrho2 { t_stop } => {
                let u = t_stop - t;
                expm1_minus_x(u) / expm1_minus_x_minus_half_x2(u)
            }
            Self::PowerLaw { mu, t_stop } => mu * t_stop / (t_stop - t),
            Self::VarrhoQuad { .. } => -self.deriv(t) / self.value(t),
        }
    }

    /// The control of the defining equation `varrho' + varrho = -ell`
    /// (value at `v`), where one exists.
    pub fn control_value(&self, v: f64) -> f64 {
        match self {
            Self::Classical { .. } | Self::PowerLaw { .. } => 0.0,
            Self::VarrhoQuad { control, .. } => control.value(v),
            Self::Varrho1 { t_stop } => {
                if v < 0.0 || v > *t_stop {
                    0.0
                } else {
                    (t_stop - v) / expm1_minus_x(*t_stop)
                }
            }
            Self::Varrho2 { t_stop } => {
                if v < 0.0 || v > *t_stop {
                    0.0
                } else {
                    (t_stop - v) * (t_stop - v) / (2.0 * expm1_minus_x_minus_half_x2(*t_stop))
                }
            }
        }
    }

    pub fn control_deriv(&self, v: f64) -> f64 {
        match self {
            Self::Classical { .. } | Self::PowerLaw { .. } => 0.0,
            Self::VarrhoQuad { control, .. } => control.deriv(v),
            Self::Varrho1 { t_stop } => {
                if v < 0.0 || v > *t_stop {
                    0.0
                } else {
                    -1.0 / expm1_minus_x(*t_stop)
                }
            }
            Self::Varrho2 { t_stop } => {
                if v < 0.0 || v > *t_stop {
                    0.0
                } else {
                    -(t_stop - v) / expm1_minus_x_minus_half_x2(*t_stop)
                }
            }
        }
    }

    /// Last time where the quotient `-varrho'/varrho` is numerically
    /// resolvable. The closed forms are safe up to `T`; the quadrature route
    /// loses the quotient to cancellation once `1 - I(t)/I(T)` reaches
    /// roundoff (for the bump family that happens at its quadrature cutoff).
    pub fn rate_domain_end(&self) -> f64 {
        match self {
            Self::Classical { .. } => f64::INFINITY,
            Self::Varrho1 { t_stop } | Self::Varrho2 { t_stop } | Self::PowerLaw { t_stop, .. } => {
                *t_stop
            }
            Self::VarrhoQuad { control, .. } => match &control.kind {
                ControlKind::Bump { cutoff, .. } => cutoff * 0.999,
                _ => control.t_stop * (1.0 - 1e-6),
            },
        }
    }

    /// Classification of `varrho'(T-)` for the power-law kernel.
    pub fn endpoint_slope(&self) -> Option<EndpointSlope> {
        match self {
            Self::PowerLaw { mu, t_stop } => {
                let mt = mu * t_stop;
                Some(if (mt - 1.0).abs() < 1e-12 {
                    EndpointSlope::Finite(-1.0 / t_stop)
                } else if mt > 1.0 {
                    EndpointSlope::Zero
                } else {
                    EndpointSlope::Unbounded
                })
            }
            _ => None,
        }
    }

    fn poly_integral(&self, control: &ControlFunction, t: f64) -> f64 {
        let upper = match &control.kind {
            ControlKind::Bump { cutoff, .. } => t.min(*cutoff),
            _ => t.min(control.t_stop),
        };
        adaptive_simpson(|s| s.exp() * control_numerator(control, s), 0.0, upper, 1e-12)
            .unwrap_or(f64::NAN)
    }
}

/// Un-normalized numerator of a control family member.
fn control_numerator(control: &ControlFunction, t: f64) -> f64 {
    match &control.kind {
        ControlKind::Poly { n, .. } => (control.t_stop - t).powi(*n as i32),
        ControlKind::Bump { cutoff, .. } => {
            if t >= *cutoff {
                0.0
            } else {
                let t2 = control.t_stop * control.t_stop;
                (-t * t / (t2 - t * t)).exp()
            }
        }
        ControlKind::Zero => 0.0,
    }
}

fn control_numerator_deriv(control: &ControlFunction, t: f64) -> f64 {
    match &control.kind {
        ControlKind::Poly { n, .. } => {
            -(*n as f64) * (control.t_stop - t).powi(*n as i32 - 1)
        }
        ControlKind::Bump { cutoff, .. } => {
            if t >= *cutoff {
                0.0
            } else {
                let t2 = control.t_stop * control.t_stop;
                let d = t2 - t * t;
                (-t * t / d).exp() * (-2.0 * t * t2 / (d * d))
            }
        }
        ControlKind::Zero => 0.0,
    }
}

#[derive(Debug, Clone)]
enum RateKind {
    Constant(f64),
    Tan { a0: f64, a1: f64 },
    Kernel(RelaxationKernel),
    /// Relaxation time reconstructed from a control: `tau_T(t) =
    /// tau rho h / (rho h + tau ell)` with `h(t) = 1 - \int_0^t ell/rho`.
    Reconstructed { ell: ControlFunction, tau0: f64 },
}

/// Decay rate `a(t) = 1/tau_T(t)` with its derivative.
#[derive(Debug, Clone)]
pub struct RateFunction {
    kind: RateKind,
    domain_end: f64,
}

/// Fraction of the stopping time before which the reconstructed rate is
/// evaluated directly; past it the formula is 0/0-prone and the value is
/// assigned by continuity.
const RECONSTRUCTED_MARGIN: f64 = 1e-3;

impl RateFunction {
    pub fn constant(a: f64) -> Self {
        Self { kind: RateKind::Constant(a), domain_end: f64::INFINITY }
    }

    pub fn from_kernel(kernel: RelaxationKernel) -> Self {
        let end = kernel.rate_domain_end();
        Self { kind: RateKind::Kernel(kernel), domain_end: end }
    }

    pub fn domain_end(&self) -> f64 {
        self.domain_end
    }

    pub fn a(&self, t: f64) -> f64 {
        match &self.kind {
            RateKind::Constant(a) => *a,
            RateKind::Tan { a0, a1 } => {
                a0 + a1 * (std::f64::consts::FRAC_PI_2 * t / self.domain_end).tan()
            }
            RateKind::Kernel(k) => k.rate_value(t),
            RateKind::Reconstructed { .. } => 1.0 / self.tau(t),
        }
    }

    /// `a'(t)`: closed form where available, otherwise a central difference.
    pub fn da(&self, t: f64) -> f64 {
        match &self.kind {
            RateKind::Constant(_) => 0.0,
            RateKind::Tan { a1, .. } => {
                let b0 = std::f64::consts::FRAC_PI_2 / self.domain_end;
                let c = (b0 * t).cos();
                a1 * b0 / (c * c)
            }
            RateKind::Kernel(RelaxationKernel::PowerLaw { mu, t_stop }) => {
                mu * t_stop / ((t_stop - t) * (t_stop - t))
            }
            _ => {
                let h = 1e-6 * self.domain_end.min(1e6).max(1e-3);
                (self.a(t + h) - self.a(t - h)) / (2.0 * h)
            }
        }
    }

    /// `tau_T(t) = 1/a(t)`, extended by 0 at and beyond the stopping time.
    pub fn tau(&self, t: f64) -> f64 {
        match &self.kind {
            RateKind::Reconstructed { ell, tau0 } => {
                let t_stop = ell.t_stop();
                if t <= 0.0 {
                    return tau0 / (1.0 + tau0 * ell.value(0.0));
                }
                if t_stop.is_finite() {
                    if t >= t_stop {
                        return 0.0;
                    }
                    let edge = t_stop * (1.0 - RECONSTRUCTED_MARGIN);
                    if t > edge {
                        // linear continuation to the proven endpoint value 0
                        let v_edge = self.tau_formula(ell, *tau0, edge);
                        return v_edge * (t_stop - t) / (t_stop - edge);
                    }
                }
                self.tau_formula(ell, *tau0, t)
            }
            _ => {
                if t >= self.domain_end {
                    0.0
                } else {
                    1.0 / self.a(t)
                }
            }
        }
    }

    fn tau_formula(&self, ell: &ControlFunction, tau0: f64, t: f64) -> f64 {
        let rho = (-t / tau0).exp();
        let phi = adaptive_simpson(|s| ell.value(s) * (s / tau0).exp(), 0.0, t, 1e-12)
            .unwrap_or(f64::NAN);
        let h = 1.0 - phi;
        let den = rho * h + tau0 * ell.value(t);
        tau0 * rho * h / den
    }

    /// Reconstruction residual monitor: returns the denominator of the
    /// `tau_T` quotient at `t` (degeneracy when it collapses before `T`).
    pub fn reconstruction_denominator(&self, t: f64) -> Option<f64> {
        match &self.kind {
            RateKind::Reconstructed { ell, tau0 } => {
                let rho = (-t / tau0).exp();
                let phi =
                    adaptive_simpson(|s| ell.value(s) * (s / tau0).exp(), 0.0, t, 1e-12).ok()?;
                Some(rho * (1.0 - phi) + tau0 * ell.value(t))
            }
            _ => None,
        }
    }
}

/// Time-dependent relaxation time reproducing the controlled process without
/// a control term: `tau_T(0+) = tau0/(1 + tau0 ell(0+))` and `tau_T = 0` from
/// the stopping time on.
pub fn tau_t_from(ell: &ControlFunction, tau: &Tau, t_stop: f64) -> Result<RateFunction> {
    let tau0 = match tau {
        Tau::Constant(v) if *v > 0.0 => *v,
        Tau::Constant(v) => {
            return Err(Error::InvalidInput(format!("tau must be positive, got {v}")))
        }
        Tau::TimeVarying(_) => {
            return Err(Error::InvalidInput(
                "reconstruction is implemented for constant tau".into(),
            ))
        }
    };
    if ell.t_stop().is_finite() && (ell.t_stop() - t_stop).abs() > 1e-9 * t_stop.max(1.0) {
        return Err(Error::ContractViolation(format!(
            "control stops at {}, expected T = {t_stop}",
            ell.t_stop()
        )));
    }
    let rate = RateFunction {
        kind: RateKind::Reconstructed { ell: ell.clone(), tau0 },
        domain_end: ell.t_stop().min(t_stop),
    };
    // degeneracy scan on a coarse grid before the stopping margin
    if ell.t_stop().is_finite() {
        let edge = t_stop * (1.0 - RECONSTRUCTED_MARGIN);
        for i in 0..=200 {
            let t = edge * i as f64 / 200.0;
            if let Some(den) = rate.reconstruction_denominator(t) {
                if den < 1e-14 {
                    return Err(Error::NumericalDegeneracy {
                        t,
                        detail: format!("tau_T denominator {den:.3e}"),
                    });
                }
            }
        }
    }
    Ok(rate)
}

/// Rate `a(t) = a0 + a1 tan(pi t / 2T)` with its validity flag: the energy of
/// the induced process is decreasing iff `a1 >= pi/2T` and `a0^2 >= pi a1/2T`.
pub fn tan_rate(a0: f64, a1: f64, t_stop: f64) -> Result<(RateFunction, bool)> {
    if !(t_stop.is_finite() && t_stop > 0.0) {
        return Err(Error::InvalidInput(format!("T must be positive, got {t_stop}")));
    }
    let b0 = std::f64::consts::FRAC_PI_2 / t_stop;
    let slack = 1e-9;
    let valid = a1 >= b0 * (1.0 - slack) && a0 * a0 >= a1 * b0 * (1.0 - slack);
    Ok((RateFunction { kind: RateKind::Tan { a0, a1 }, domain_end: t_stop }, valid))
}

/// Energy-monotonicity report: the kinetic energy `E ~ (varrho')^2/2` of a
/// rate-`a` process is non-increasing exactly when `a^2 >= a'`.
#[derive(Debug, Clone, Copy)]
pub struct EnergyReport {
    /// min over interior nodes of `a^2 - a'`.
    pub min_value: f64,
    pub argmin_t: f64,
    pub passes: bool,
}

pub fn energy_monotone_check(rate: &RateFunction, grid: &TimeGrid) -> Result<EnergyReport> {
    let mut min_value = f64::INFINITY;
    let mut argmin_t = grid.t_start();
    for k in 1..grid.len() - 1 {
        let t = grid.time(k);
        if t >= rate.domain_end() {
            continue;
        }
        let a = rate.a(t);
        let v = a * a - rate.da(t);
        if v < min_value {
            min_value = v;
            argmin_t = t;
        }
    }
    if !min_value.is_finite() {
        return Err(Error::InvalidInput("no interior nodes inside the rate domain".into()));
    }
    Ok(EnergyReport { min_value, argmin_t, passes: min_value >= -1e-10 })
}

#[cfg(test)]
mod tests {
    use super::*;

    const T5: f64 = 5.0;

    #[test]
    fn classical_rho_values() {
        let tau = Tau::Constant(1.0);
        assert!((classical_rho(&tau, 1.0).unwrap() - (-1.0_f64).exp()).abs() < 1e-15);
        assert_eq!(classical_rho(&tau, 0.0).unwrap(), 1.0);
        let varying = Tau::TimeVarying(Box::new(|t| 1.0 + t));
        assert!((classical_rho(&varying, 1.0).unwrap() - 0.5).abs() < 1e-11);
        assert!(classical_rho(&Tau::Constant(-1.0), 1.0).is_err());
    }

    #[test]
    fn ell1_denominator_matches_closed_form() {
        let ell = ControlFunction::ell_poly(1, T5).unwrap();
        // denominator e^T - (T+1); compare through the value at t = 0
        let denom = T5 / ell.value(0.0);
        assert!((denom - (T5.exp() - 6.0)).abs() < 1e-9 * denom);
        assert_eq!(ell.value(T5), 0.0);
        assert_eq!(ell.value(6.0), 0.0);
        assert!(ell.normalization_residual().unwrap().abs() < 1e-11);
    }

    #[test]
    fn ell2_value_matches_printed_integral() {
        let ell = ControlFunction::ell_poly(2, T5).unwrap();
        // I_2(T) = 2 e^T - (T^2 + 2T + 2)
        let expected = 2.5_f64.powi(2) / (2.0 * T5.exp() - 37.0);
        assert!((ell.value(2.5) - expected).abs() < 1e-10 * expected);
    }

    #[test]
    fn bump_control_endpoints() {
        let ell = ControlFunction::ell_bump(T5).unwrap();
        assert!(ell.value(0.0) > 0.0);
        assert_eq!(ell.value(T5), 0.0);
        assert!(ell.normalization_residual().unwrap().abs() < 1e-10);
        // one-sided flatness at T: values vanish faster than any power
        assert_eq!(ell.value(T5 - 1e-9), 0.0);
    }

    #[test]
    fn varrho_quad_basics() {
        let k = varrho_n(Smoothness::Finite(1), T5).unwrap();
        assert!((k.value(0.0) - 1.0).abs() < 1e-12);
        assert_eq!(k.value(T5), 0.0);
        assert_eq!(k.value(7.0), 0.0);
        assert!(!k.closed_form());
    }

    #[test]
    fn closed_forms_match_quadrature_route() {
        for n in 1..=2u32 {
            let quad = varrho_n(Smoothness::Finite(n), T5).unwrap();
            let closed = varrho_closed(n, T5).unwrap();
            assert!(closed.closed_form());
            for i in 0..=50 {
                let t = T5 * i as f64 / 50.0;
                assert!(
                    (quad.value(t) - closed.value(t)).abs() < 1e-12,
                    "n = {n}, t = {t}"
                );
                assert!(
                    (quad.deriv(t) - closed.deriv(t)).abs() < 1e-11,
                    "deriv n = {n}, t = {t}"
                );
            }
        }
    }

    #[test]
    fn varrho1_printed_value() {
        let k = varrho_closed(1, T5).unwrap();
        let expected = (2.5_f64.exp() + 2.5 - 6.0) / (T5.exp() - 6.0);
        assert!((k.value(2.5) - expected).abs() < 1e-14);
        // tau_T = 1/a_1 vanishes at T-
        assert!(1.0 / k.rate_value(T5 - 1e-6) < 1e-5);
        assert!(1.0 / k.rate_value(T5 - 1e-3) < 1e-2);
    }

    #[test]
    fn varrho_derivatives_vanish_at_stop() {
        // k-th derivatives at T- vanish for k <= n
        let k2 = varrho_closed(2, T5).unwrap();
        let eps = 1e-7;
        assert!(k2.value(T5 - eps).abs() < 1e-13);
        assert!(k2.deriv(T5 - eps).abs() < 1e-12);
        assert!(k2.deriv2(T5 - eps).abs() < 1e-6);
        // varrho_1' vanishes linearly: ~ (T - t)/(e^T - (T+1))
        let k1 = varrho_closed(1, T5).unwrap();
        assert!(k1.deriv(T5 - eps).abs() < 1e-8);
        // but the second derivative of varrho_1 does not vanish
        assert!(k1.deriv2(T5 - eps) > 1e-3);
    }

    #[test]
    fn power_law_cases() {
        let k = power_law(1.0, T5).unwrap(); // mu T = 5
        assert!((k.value(2.5) - 0.03125).abs() < 1e-15);
        assert_eq!(k.endpoint_slope().unwrap(), EndpointSlope::Zero);
        let k = power_law(0.2, T5).unwrap(); // mu T = 1
        assert_eq!(k.endpoint_slope().unwrap(), EndpointSlope::Finite(-1.0 / T5));
        assert!((k.deriv(T5 - 1e-9) + 1.0 / T5).abs() < 1e-6);
        let k = power_law(0.1, T5).unwrap(); // mu T = 0.5
        assert_eq!(k.endpoint_slope().unwrap(), EndpointSlope::Unbounded);
    }

    #[test]
    fn energy_criterion_matches_power_law_condition() {
        let grid = TimeGrid::new(0.0, T5 * 0.999, T5 * 0.999 / 1000.0).unwrap();
        let good = RateFunction::from_kernel(power_law(0.4, T5).unwrap()); // mu T = 2
        assert!(energy_monotone_check(&good, &grid).unwrap().passes);
        let bad = RateFunction::from_kernel(power_law(0.1, T5).unwrap()); // mu T = 0.5
        assert!(!energy_monotone_check(&bad, &grid).unwrap().passes);
        let constant = RateFunction::constant(2.0);
        let r = energy_monotone_check(&constant, &grid).unwrap();
        assert!(r.passes && (r.min_value - 4.0).abs() < 1e-12);
    }

    #[test]
    fn tan_rate_flags() {
        let b0 = std::f64::consts::FRAC_PI_2 / T5;
        let (_, flag) = tan_rate((b0 * b0).sqrt(), b0, T5).unwrap();
        assert!(flag, "boundary parameters must validate");
        let (_, flag) = tan_rate(1.0, 0.0, T5).unwrap();
        assert!(!flag);
        let (rate, flag) = tan_rate(1.0, 1.0, T5).unwrap();
        assert!(flag);
        let grid = TimeGrid::new(0.0, T5 * 0.998, T5 * 0.998 / 1000.0).unwrap();
        assert!(energy_monotone_check(&rate, &grid).unwrap().passes);
    }

    #[test]
    fn reconstructed_tau_endpoints() {
        let ell = ControlFunction::ell_poly(1, T5).unwrap();
        let rate = tau_t_from(&ell, &Tau::Constant(1.0), T5).unwrap();
        let expected0 = 1.0 / (1.0 + ell.value(0.0));
        assert!((rate.tau(0.0) - expected0).abs() < 1e-12);
        assert_eq!(rate.tau(T5), 0.0);
        assert!(rate.tau(T5 - 1e-3 * T5) < 0.02);

        // no control: tau_T = tau
        let zero = ControlFunction::zero();
        let rate = tau_t_from(&zero, &Tau::Constant(2.0), f64::INFINITY).unwrap();
        assert!((rate.tau(1.0) - 2.0).abs() < 1e-12);
        assert!((rate.tau(4.0) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn reconstructed_tau_matches_kernel_rate() {
        // tau_T from ell_1 against -varrho_1/varrho_1' away from endpoints
        let ell = ControlFunction::ell_poly(1, T5).unwrap();
        let rate = tau_t_from(&ell, &Tau::Constant(1.0), T5).unwrap();
        let kernel = varrho_closed(1, T5).unwrap();
        for i in 1..=97 {
            let t = T5 * i as f64 / 100.0;
            let direct = 1.0 / kernel.rate_value(t);
            assert!(
                (rate.tau(t) - direct).abs() < 1e-8,
                "t = {t}: {} vs {direct}",
                rate.tau(t)
            );
        }
    }

    #[test]
    fn varrho_is_decreasing_and_convex() {
        let k = varrho_n(Smoothness::Infinite, T5).unwrap();
        let mut prev = k.value(0.0);
        let mut prev_diff: f64 = f64::NEG_INFINITY;
        for i in 1..=100 {
            let t = T5 * i as f64 / 100.0;
            let v = k.value(t);
            let diff = v - prev;
            assert!(diff <= 1e-12, "not decreasing at t = {t}");
            // second differences nonnegative = first differences increasing
            assert!(diff >= prev_diff - 1e-12, "not convex at t = {t}");
            prev = v;
            prev_diff = diff;
        }
    }
}
