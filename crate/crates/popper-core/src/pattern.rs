//! Diffraction-pattern widths, their inversion back to source parameters,
//! and the width-vs-slit-width sweep.
//!
//! A conditioned packet arriving at a detector a distance `D` past its
//! (virtual) waist `x` has intensity `|φ|² ∝ exp(-2y²/W²)` with the physical
//! width `W² = x + Λ²D²/x`. Two reporting conventions coexist:
//!
//! * **reproduction** ([`WidthConvention::Reproduction`]): `W² = x + c·Λ²D²/x`
//!   with an explicit constant `c`, and the nonstandard `FWHM = ln2 · W`.
//!   The published analysis this toolkit reproduces prints `c = 4` in its
//!   width formula but its own worked numbers are only consistent with
//!   `c = 1`, so `c = 1` is pinned ([`PINNED_C`]) and the reconciliation is
//!   retested in the acceptance suite. Pass `c = 4` explicitly to see the
//!   printed variant fail.
//! * **exact** ([`WidthConvention::Exact`]): the literal intensity profile,
//!   `FWHM = sqrt(2 ln 2) · W` with `c = 1` — what a lab would measure.
//!
//! Every [`PatternStats`] carries both FWHMs so no report can mislead.

use rayon::prelude::*;

use crate::error::PhysicsError;
use crate::quantities::{Area, DiffractionScale, GaussianPacket, Length};

/// The convention constant pinned by reconciliation against the published
/// worked numbers (see module docs).
pub const PINNED_C: f64 = 1.0;

/// `FWHM = ln2 · W` (reproduction convention).
pub const FWHM_PER_W_REPRODUCTION: f64 = std::f64::consts::LN_2;

/// `FWHM = sqrt(2 ln 2) · W` (the literal half-max width of
/// `exp(-2y²/W²)`).
pub fn fwhm_per_w_exact() -> f64 {
    (2.0 * std::f64::consts::LN_2).sqrt()
}

/// How widths are reported and inverted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WidthConvention {
    /// `W² = x + c·Λ²D²/x`, `FWHM = ln2·W`, with `c ∈ {1, 4}`.
    Reproduction { c: f64 },
    /// The literal intensity profile: `c = 1`, `FWHM = sqrt(2 ln 2)·W`.
    Exact,
}

impl WidthConvention {
    /// The default reproduction convention with the pinned constant.
    pub fn reproduction() -> Self {
        WidthConvention::Reproduction { c: PINNED_C }
    }

    fn c(self) -> f64 {
        match self {
            WidthConvention::Reproduction { c } => c,
            WidthConvention::Exact => 1.0,
        }
    }

    fn fwhm_per_w(self) -> f64 {
        match self {
            WidthConvention::Reproduction { .. } => FWHM_PER_W_REPRODUCTION,
            WidthConvention::Exact => fwhm_per_w_exact(),
        }
    }
}

impl Default for WidthConvention {
    fn default() -> Self {
        WidthConvention::reproduction()
    }
}

/// Pattern geometry and widths at a detector plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternStats {
    /// Virtual-waist parameter `x` (the `ε² + ℓc²` combination).
    pub x: Area,
    /// Effective propagation distance from the virtual waist.
    pub d_eff: Length,
    /// Width under the active convention (`|φ|² ∝ exp(-2y²/W²)`).
    pub w: Length,
    /// `ln2 · W_c` with the active convention's `c` (reproduction reading).
    pub fwhm_paper: Length,
    /// `sqrt(2 ln 2) · W_phys`, the literal half-max width (`c = 1`).
    pub fwhm_exact: Length,
}

/// Pattern widths for a virtual waist `x` observed a distance `d` downstream.
pub fn pattern_width(
    x: Area,
    d: Length,
    scale: DiffractionScale,
    conv: WidthConvention,
) -> Result<PatternStats, PhysicsError> {
    if !(x.m2().is_finite() && x.m2() > 0.0) {
        return Err(PhysicsError::NonPositive {
            context: "pattern waist parameter x",
            value: x.m2(),
        });
    }
    let d = d.expect_nonnegative("pattern propagation distance")?;
    let lam_d = scale.reduced().m() * d.m();
    let w2_of = |c: f64| x.m2() + c * lam_d * lam_d / x.m2();
    let w_active = w2_of(conv.c()).sqrt();
    let w_phys = w2_of(1.0).sqrt();
    Ok(PatternStats {
        x,
        d_eff: d,
        w: Length::from_m(w_active),
        fwhm_paper: Length::from_m(FWHM_PER_W_REPRODUCTION * w2_of(conv.c()).sqrt()),
        fwhm_exact: Length::from_m(fwhm_per_w_exact() * w_phys),
    })
}

/// Pattern widths of a conditioned packet: `x = Re Γ`, `D = |Im Γ|/Λ`.
pub fn stats_from_packet(
    p: GaussianPacket,
    scale: DiffractionScale,
    conv: WidthConvention,
) -> Result<PatternStats, PhysicsError> {
    let x = p.gamma().re();
    let d_eff = Length::from_m(p.gamma().im().m2().abs() / scale.reduced().m());
    pattern_width(x, d_eff, scale, conv)
}

/// Invert an observed FWHM at distance `d` into the two admissible waist
/// parameters `(x_small, x_large)` — roots of `x² - W²x + cΛ²D² = 0`.
///
/// A negative discriminant means the observed pattern is *narrower than the
/// diffraction limit* permits at this distance; that error is physically
/// meaningful (it rules out the assumed geometry) and is reported as such.
pub fn invert_width(
    fwhm_obs: Length,
    d: Length,
    scale: DiffractionScale,
    conv: WidthConvention,
) -> Result<(Area, Area), PhysicsError> {
    let fwhm_obs = fwhm_obs.expect_positive("observed pattern FWHM")?;
    let d = d.expect_nonnegative("pattern propagation distance")?;
    let w = fwhm_obs.m() / conv.fwhm_per_w();
    let w2 = w * w;
    let lam_d = scale.reduced().m() * d.m();
    let product = conv.c() * lam_d * lam_d;
    let disc = w2 * w2 - 4.0 * product;
    if disc < 0.0 {
        return Err(PhysicsError::DiffractionLimited {
            fwhm_m: fwhm_obs.m(),
            distance_m: d.m(),
            w2_m2: w2,
            limit_m2: 2.0 * conv.c().sqrt() * lam_d,
        });
    }
    let big = 0.5 * (w2 + disc.sqrt());
    // Small root via the product to avoid cancellation when disc ≈ W⁴.
    let small = if big > 0.0 { product / big } else { 0.0 };
    Ok((Area::from_m2(small), Area::from_m2(big)))
}

/// Extract the squared correlation length from a fitted waist parameter:
/// `ℓc² = x - ε²`. Equality (`x = ε²`) is the perfect-EPR limit and returns
/// zero; `x < ε²` is an inconsistent calibration.
pub fn fit_correlation_length(x: Area, epsilon: Length) -> Result<Area, PhysicsError> {
    let eps2 = epsilon.sq();
    if x.m2() < eps2.m2() {
        return Err(PhysicsError::InconsistentCalibration {
            x_m2: x.m2(),
            eps2_m2: eps2.m2(),
        });
    }
    Ok(x - eps2)
}

/// One row of the width-vs-slit-width sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    /// Rectangular full width of the slit.
    pub full_width: Length,
    /// Gaussian-equivalent `ε = conversion × full_width`.
    pub epsilon: Length,
    /// Waist parameter `x = ε² + ℓc²`.
    pub x: Area,
    pub fwhm_paper: Length,
    pub fwhm_exact: Length,
}

/// Pattern FWHM as a function of slit full width at fixed source and
/// geometry. Evaluated in parallel; results are returned in input order.
pub fn width_vs_slit_sweep(
    lc: Length,
    d: Length,
    scale: DiffractionScale,
    slit_full_widths: &[Length],
    conversion: f64,
    conv: WidthConvention,
) -> Result<Vec<SweepPoint>, PhysicsError> {
    let lc = lc.expect_nonnegative("correlation length")?;
    let d = d.expect_nonnegative("pattern propagation distance")?;
    if !(conversion.is_finite() && conversion > 0.0) {
        return Err(PhysicsError::NonPositive {
            context: "slit conversion factor",
            value: conversion,
        });
    }
    slit_full_widths
        .par_iter()
        .map(|&a| {
            let a = a.expect_positive("slit full width")?;
            let epsilon = a * conversion;
            let x = epsilon.sq() + lc.sq();
            let stats = pattern_width(x, d, scale, conv)?;
            Ok(SweepPoint {
                full_width: a,
                epsilon,
                x,
                fwhm_paper: stats.fwhm_paper,
                fwhm_exact: stats.fwhm_exact,
            })
        })
        .collect()
}

/// Closed-form location of the sweep minimum: the FWHM is stationary where
/// `x(a) = sqrt(c)·ΛD`, i.e. `a* = sqrt(sqrt(c)·ΛD - ℓc²)/conversion`.
/// Returns `None` when `ℓc²` already exceeds `sqrt(c)·ΛD` (no interior
/// minimum: the curve is monotone increasing).
pub fn sweep_minimum_width(
    lc: Length,
    d: Length,
    scale: DiffractionScale,
    conversion: f64,
    conv: WidthConvention,
) -> Option<Length> {
    let target = conv.c().sqrt() * scale.reduced().m() * d.m();
    let eps2_star = target - lc.sq().m2();
    (eps2_star > 0.0).then(|| Length::from_m(eps2_star.sqrt() / conversion))
}

/// Widen every FWHM in the curve by a finite detector aperture in Gaussian
/// quadrature: `fwhm' = sqrt(fwhm² + (k·detector_width)²)`.
pub fn detector_convolution(
    curve: &[SweepPoint],
    detector_width: Length,
    k: f64,
) -> Result<Vec<SweepPoint>, PhysicsError> {
    let detector_width = detector_width.expect_nonnegative("detector width")?;
    if !(k.is_finite() && k >= 0.0) {
        return Err(PhysicsError::NonPositive {
            context: "detector convolution factor k",
            value: k,
        });
    }
    let add = (detector_width * k).sq();
    let widen = |fwhm: Length| (fwhm.sq() + add).sqrt();
    Ok(curve
        .iter()
        .map(|p| SweepPoint {
            fwhm_paper: widen(p.fwhm_paper),
            fwhm_exact: widen(p.fwhm_exact),
            ..*p
        })
        .collect())
}
