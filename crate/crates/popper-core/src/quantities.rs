//! Unit-safe scalar types and the complex Gaussian parameter.
//!
//! Everything internal is SI: lengths in meters, areas in meters squared.
//! Report layers render mm/nm; a single base unit prevents silent factor
//! slips between the mm-scale apertures and nm-scale wavelengths that this
//! toolkit mixes constantly.
//!
//! The central object is the complex Gaussian parameter `Γ` (units of area)
//! of an amplitude `exp(-y²/Γ)`. Its real part sets the intensity width, its
//! imaginary part the accumulated propagation chirp:
//!
//! * intensity profile: `|φ(y)|² ∝ exp(-2 Re(1/Γ) y²)`
//! * position spread:   `Δy² = |Γ|² / (4 Re Γ)`
//! * momentum spread:   `Δp  = ħ / sqrt(Re Γ)` (exact, from Fourier moments)
//!
//! Free propagation over a distance `L` maps `Γ → Γ + iΛL` where `Λ = λ/π`
//! is the reduced wavelength. For massive particles the same algebra applies
//! with the de Broglie wavelength and the time↔distance map `2ħt/m = Λ·L`;
//! photon runs never touch an absolute `ħ`.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::PhysicsError;

/// Reduced Planck constant in J·s (CODATA). Only massive-particle
/// kinematics consume it; photon-mode algebra is purely geometric.
pub const HBAR: f64 = 1.054_571_817e-34;

// ---------------------------------------------------------------------------
// Length
// ---------------------------------------------------------------------------

/// A length in meters.
///
/// The type itself is signed so that intermediate optical algebra
/// (`L - 4f`, `2f - b₁`, …) stays expressible; operations that require a
/// nonnegative width or distance validate at their own boundary.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Length(f64);

impl Length {
    pub const ZERO: Length = Length(0.0);
    /// Infinite length, used for the wide-open center-of-mass limit Ω → ∞.
    pub const INFINITY: Length = Length(f64::INFINITY);

    pub fn from_m(m: f64) -> Self {
        Length(m)
    }
    pub fn from_mm(mm: f64) -> Self {
        Length(mm * 1e-3)
    }
    pub fn from_um(um: f64) -> Self {
        Length(um * 1e-6)
    }
    pub fn from_nm(nm: f64) -> Self {
        Length(nm * 1e-9)
    }

    /// Value in meters.
    pub fn m(self) -> f64 {
        self.0
    }
    /// Value in millimeters (reporting convenience).
    pub fn mm(self) -> f64 {
        self.0 * 1e3
    }

    /// Square of the length, as an area.
    pub fn sq(self) -> Area {
        Area(self.0 * self.0)
    }

    pub fn abs(self) -> Length {
        Length(self.0.abs())
    }
    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }

    /// Guard helper: the length must be finite and nonnegative.
    pub fn expect_nonnegative(self, context: &'static str) -> Result<Self, PhysicsError> {
        if self.0.is_finite() && self.0 >= 0.0 {
            Ok(self)
        } else {
            Err(PhysicsError::InvalidLength {
                context,
                value_m: self.0,
            })
        }
    }

    /// Guard helper: the length must be finite and strictly positive.
    pub fn expect_positive(self, context: &'static str) -> Result<Self, PhysicsError> {
        if self.0.is_finite() && self.0 > 0.0 {
            Ok(self)
        } else {
            Err(PhysicsError::NonPositive {
                context,
                value: self.0,
            })
        }
    }
}

impl Add for Length {
    type Output = Length;
    fn add(self, rhs: Length) -> Length {
        Length(self.0 + rhs.0)
    }
}
impl Sub for Length {
    type Output = Length;
    fn sub(self, rhs: Length) -> Length {
        Length(self.0 - rhs.0)
    }
}
impl Neg for Length {
    type Output = Length;
    fn neg(self) -> Length {
        Length(-self.0)
    }
}
impl Mul<f64> for Length {
    type Output = Length;
    fn mul(self, rhs: f64) -> Length {
        Length(self.0 * rhs)
    }
}
impl Mul<Length> for f64 {
    type Output = Length;
    fn mul(self, rhs: Length) -> Length {
        Length(self * rhs.0)
    }
}
impl Div<f64> for Length {
    type Output = Length;
    fn div(self, rhs: f64) -> Length {
        Length(self.0 / rhs)
    }
}
/// Length × Length = Area.
impl Mul<Length> for Length {
    type Output = Area;
    fn mul(self, rhs: Length) -> Area {
        Area(self.0 * rhs.0)
    }
}
/// Dimensionless ratio of two lengths.
impl Div<Length> for Length {
    type Output = f64;
    fn div(self, rhs: Length) -> f64 {
        self.0 / rhs.0
    }
}

impl fmt::Display for Length {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} m", self.0)
    }
}

// ---------------------------------------------------------------------------
// Area
// ---------------------------------------------------------------------------

/// An area in meters squared (signed, for the same reason as [`Length`]).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Area(f64);

impl Area {
    pub const ZERO: Area = Area(0.0);

    pub fn from_m2(m2: f64) -> Self {
        Area(m2)
    }
    pub fn from_mm2(mm2: f64) -> Self {
        Area(mm2 * 1e-6)
    }

    /// Value in meters squared.
    pub fn m2(self) -> f64 {
        self.0
    }
    /// Value in millimeters squared (reporting convenience).
    pub fn mm2(self) -> f64 {
        self.0 * 1e6
    }

    /// Square root as a length. Callers guarantee nonnegativity; the debug
    /// assertion catches contract violations during development.
    pub fn sqrt(self) -> Length {
        debug_assert!(
            self.0 >= 0.0 || self.0.is_nan(),
            "sqrt of negative area {} m^2",
            self.0
        );
        Length(self.0.sqrt())
    }

    pub fn is_finite(self) -> bool {
        self.0.is_finite()
    }
}

impl Add for Area {
    type Output = Area;
    fn add(self, rhs: Area) -> Area {
        Area(self.0 + rhs.0)
    }
}
impl Sub for Area {
    type Output = Area;
    fn sub(self, rhs: Area) -> Area {
        Area(self.0 - rhs.0)
    }
}
impl Neg for Area {
    type Output = Area;
    fn neg(self) -> Area {
        Area(-self.0)
    }
}
impl Mul<f64> for Area {
    type Output = Area;
    fn mul(self, rhs: f64) -> Area {
        Area(self.0 * rhs)
    }
}
impl Mul<Area> for f64 {
    type Output = Area;
    fn mul(self, rhs: Area) -> Area {
        Area(self * rhs.0)
    }
}
impl Div<f64> for Area {
    type Output = Area;
    fn div(self, rhs: f64) -> Area {
        Area(self.0 / rhs)
    }
}
/// Dimensionless ratio of two areas.
impl Div<Area> for Area {
    type Output = f64;
    fn div(self, rhs: Area) -> f64 {
        self.0 / rhs.0
    }
}
/// Area / Length = Length.
impl Div<Length> for Area {
    type Output = Length;
    fn div(self, rhs: Length) -> Length {
        Length(self.0 / rhs.0)
    }
}

impl fmt::Display for Area {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} m^2", self.0)
    }
}

// ---------------------------------------------------------------------------
// ComplexArea
// ---------------------------------------------------------------------------

/// A complex area in meters squared — the natural home of the Gaussian
/// parameter `Γ` and of the pair-state denominators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexArea(Complex64);

impl ComplexArea {
    pub fn new(re: Area, im: Area) -> Self {
        ComplexArea(Complex64::new(re.0, im.0))
    }
    pub fn from_complex_m2(c: Complex64) -> Self {
        ComplexArea(c)
    }
    pub fn from_real(re: Area) -> Self {
        ComplexArea(Complex64::new(re.0, 0.0))
    }

    pub fn re(self) -> Area {
        Area(self.0.re)
    }
    pub fn im(self) -> Area {
        Area(self.0.im)
    }
    /// Raw complex value in meters squared, for dense algebra.
    pub fn c(self) -> Complex64 {
        self.0
    }

    /// Modulus `|Γ|` as an area.
    pub fn norm(self) -> Area {
        Area(self.0.norm())
    }

    /// `|Γ|² / Re Γ`, the combination behind intensity widths.
    ///
    /// Written as `Re Γ · (1 + (Im Γ / Re Γ)²)` so that an infinite real part
    /// (wide-open center-of-mass limit) yields `+∞` instead of `inf/inf = NaN`.
    pub fn abs2_over_re(self) -> Area {
        let re = self.0.re;
        if re.is_infinite() {
            return Area(f64::INFINITY);
        }
        let ratio = self.0.im / re;
        Area(re * (1.0 + ratio * ratio))
    }

    /// `1/Γ` as a raw complex value, with the convention that a denominator
    /// with infinite real part contributes exactly zero. This keeps the
    /// Ω → ∞ limit representable in plain f64 arithmetic.
    pub fn recip_or_zero(self) -> Complex64 {
        if self.0.re.is_infinite() {
            Complex64::new(0.0, 0.0)
        } else {
            self.0.inv()
        }
    }

    /// Shift the imaginary part by an area (free-propagation update).
    pub fn shift_im(self, delta: Area) -> Self {
        ComplexArea(Complex64::new(self.0.re, self.0.im + delta.0))
    }
}

impl Add for ComplexArea {
    type Output = ComplexArea;
    fn add(self, rhs: ComplexArea) -> ComplexArea {
        ComplexArea(self.0 + rhs.0)
    }
}
impl Add<Area> for ComplexArea {
    type Output = ComplexArea;
    fn add(self, rhs: Area) -> ComplexArea {
        ComplexArea(self.0 + rhs.0)
    }
}

impl fmt::Display for ComplexArea {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {:+} i) m^2", self.0.re, self.0.im)
    }
}

// ---------------------------------------------------------------------------
// DiffractionScale
// ---------------------------------------------------------------------------

/// What kind of beam sets the diffraction scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BeamKind {
    /// Photons of a given vacuum wavelength.
    Photon,
    /// Massive particles of mass `m` (kg) moving at speed `v` (m/s); the
    /// associated de Broglie wavelength is `λ = 2πħ/(mv)`.
    Massive { mass_kg: f64, speed_m_per_s: f64 },
}

/// The single length scale that drives all diffraction: the wavelength `λ`
/// and its reduced form `Λ = λ/π`.
///
/// The invariant tying the two beam kinds together: a massive particle
/// propagating for a time `t` accumulates the same quadratic phase as a
/// photon covering the distance `L` with `2ħt/m = Λ·L`. All propagation
/// algebra downstream is written in terms of `Λ·L`, so the two modes are
/// bit-identical once distances are mapped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffractionScale {
    wavelength: Length,
    kind: BeamKind,
}

impl DiffractionScale {
    /// Photon beam of the given vacuum wavelength.
    pub fn photon(wavelength: Length) -> Result<Self, PhysicsError> {
        let wavelength = wavelength.expect_positive("wavelength")?;
        Ok(DiffractionScale {
            wavelength,
            kind: BeamKind::Photon,
        })
    }

    /// Massive-particle beam; the wavelength is the de Broglie value
    /// `2πħ/(mv)`.
    pub fn massive(mass_kg: f64, speed_m_per_s: f64) -> Result<Self, PhysicsError> {
        if !(mass_kg.is_finite() && mass_kg > 0.0) {
            return Err(PhysicsError::NonPositive {
                context: "mass",
                value: mass_kg,
            });
        }
        if !(speed_m_per_s.is_finite() && speed_m_per_s > 0.0) {
            return Err(PhysicsError::NonPositive {
                context: "speed",
                value: speed_m_per_s,
            });
        }
        let wavelength = Length(2.0 * std::f64::consts::PI * HBAR / (mass_kg * speed_m_per_s));
        Ok(DiffractionScale {
            wavelength,
            kind: BeamKind::Massive {
                mass_kg,
                speed_m_per_s,
            },
        })
    }

    pub fn wavelength(self) -> Length {
        self.wavelength
    }

    /// The reduced wavelength `Λ = λ/π`.
    pub fn reduced(self) -> Length {
        Length(self.wavelength.0 / std::f64::consts::PI)
    }

    pub fn kind(self) -> BeamKind {
        self.kind
    }
}

/// Map a propagation time to the equivalent phase distance, `2ħt/m = Λ·L`.
///
/// Only massive beams carry a time scale; photon runs are specified directly
/// in distances and calling this in photon mode is an error.
pub fn time_to_distance(t_s: f64, scale: DiffractionScale) -> Result<Length, PhysicsError> {
    match scale.kind {
        BeamKind::Photon => Err(PhysicsError::InvalidMode(
            "time_to_distance needs a massive beam; photon runs are parameterized by distance",
        )),
        BeamKind::Massive { mass_kg, .. } => {
            if !t_s.is_finite() || t_s < 0.0 {
                return Err(PhysicsError::NonPositive {
                    context: "propagation time",
                    value: t_s,
                });
            }
            Ok(Length(2.0 * HBAR * t_s / (mass_kg * scale.reduced().0)))
        }
    }
}

// ---------------------------------------------------------------------------
// GaussianPacket
// ---------------------------------------------------------------------------

/// Whether a packet's sampled amplitude carries its L² normalization
/// prefactor. The physics lives entirely in the exponent; normalization
/// matters only when amplitudes are evaluated pointwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    Normalized,
    Unnormalized,
}

/// A single-particle Gaussian wave packet `exp(-y²/Γ)`.
///
/// `waist_hint` records the (real) waist the packet had at its last focus —
/// the lens transform needs it to pick the physical root of its quadratic
/// width condition. Free propagation leaves it untouched; the lens updates
/// it to the new waist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacket {
    gamma: ComplexArea,
    waist_hint: Area,
    norm: Normalization,
}

impl GaussianPacket {
    /// Packet at a real waist: `Γ = w` (an area, i.e. the squared waist).
    pub fn at_waist(waist_sq: Area) -> Result<Self, PhysicsError> {
        Self::from_parts(
            ComplexArea::from_real(waist_sq),
            waist_sq,
            Normalization::Normalized,
        )
    }

    /// General constructor; rejects non-normalizable parameters.
    pub fn from_parts(
        gamma: ComplexArea,
        waist_hint: Area,
        norm: Normalization,
    ) -> Result<Self, PhysicsError> {
        let re = gamma.re().m2();
        if !(re.is_finite() && re > 0.0) || !gamma.im().m2().is_finite() {
            return Err(PhysicsError::InvalidPacket { re_gamma_m2: re });
        }
        Ok(GaussianPacket {
            gamma,
            waist_hint,
            norm,
        })
    }

    pub fn gamma(self) -> ComplexArea {
        self.gamma
    }
    pub fn waist_hint(self) -> Area {
        self.waist_hint
    }
    pub fn norm(self) -> Normalization {
        self.norm
    }

    /// Amplitude at a point. Normalized packets carry the L² prefactor
    /// `(2 Re Γ / (π |Γ|²))^{1/4}`.
    pub fn amplitude_at(self, y: Length) -> Complex64 {
        let g = self.gamma.c();
        let prefactor = match self.norm {
            Normalization::Normalized => {
                (2.0 * g.re / (std::f64::consts::PI * g.norm_sqr())).powf(0.25)
            }
            Normalization::Unnormalized => 1.0,
        };
        prefactor * (-(y.0 * y.0) / g).exp()
    }
}

/// A momentum spread, reported as `ħ / length` so that photon runs never
/// need an absolute `ħ`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct MomentumSpread {
    /// `Δp / ħ` in 1/m.
    per_hbar_per_m: f64,
}

impl MomentumSpread {
    pub fn from_per_hbar(per_m: f64) -> Self {
        MomentumSpread {
            per_hbar_per_m: per_m,
        }
    }
    /// `Δp / ħ` in 1/m.
    pub fn per_hbar(self) -> f64 {
        self.per_hbar_per_m
    }
    /// Absolute value in kg·m/s (massive-particle reporting).
    pub fn si(self) -> f64 {
        HBAR * self.per_hbar_per_m
    }
}

/// Standard deviation of the packet's intensity profile,
/// `Δy = |Γ| / (2 sqrt(Re Γ))`.
pub fn packet_intensity_sigma(p: GaussianPacket) -> Length {
    (p.gamma().abs2_over_re() * 0.25).sqrt()
}

/// Full intensity width `W = 2Δy`, the `W` of `|φ|² ∝ exp(-2y²/W²)`.
pub fn packet_intensity_width(p: GaussianPacket) -> Length {
    packet_intensity_sigma(p) * 2.0
}

/// Exact momentum spread `Δp = ħ / sqrt(Re Γ)`, from second moments of the
/// Fourier transform of `exp(-y²/Γ)`.
///
/// For real `Γ` this is the minimum-uncertainty value `ħ/(2Δy)`; it is
/// manifestly invariant under `Γ → Γ + iΛL`, i.e. free evolution conserves
/// the momentum distribution.
pub fn packet_momentum_sigma(p: GaussianPacket) -> MomentumSpread {
    MomentumSpread::from_per_hbar(1.0 / p.gamma().re().m2().sqrt())
}

/// `Δy·Δp` in units of `ħ`; bounded below by 1/2 with equality exactly for
/// chirp-free (real-`Γ`) packets.
pub fn uncertainty_product_hbar(p: GaussianPacket) -> f64 {
    packet_intensity_sigma(p).m() * packet_momentum_sigma(p).per_hbar()
}

// ---------------------------------------------------------------------------
// Quantity parsing
// ---------------------------------------------------------------------------

/// Why a quantity string failed to parse. The configuration layer decorates
/// these with the field path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QuantityError {
    /// No unit suffix present (units are mandatory).
    MissingUnit,
    /// Unit suffix not one of m, mm, um, nm.
    UnknownUnit(String),
    /// The numeric part is not a finite number.
    BadNumber,
}

/// Parse a length with a mandatory unit suffix: `"0.16 mm"`, `"702 nm"`,
/// `"2 m"`, `"5 um"`. The literal `"inf"` (any case) denotes an infinite
/// length, used for the wide-open Ω limit. Whitespace between number and
/// unit is optional.
pub fn parse_length(s: &str) -> Result<Length, QuantityError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        return Ok(Length::INFINITY);
    }
    // Longest prefix that can belong to a float literal.
    let split = s
        .char_indices()
        .find(|&(i, ch)| {
            !(ch.is_ascii_digit()
                || ch == '.'
                || ch == '+'
                || ch == '-'
                || ((ch == 'e' || ch == 'E')
                    && s[i + ch.len_utf8()..]
                        .chars()
                        .next()
                        .is_some_and(|next| next.is_ascii_digit() || next == '+' || next == '-')))
        })
        .map_or(s.len(), |(i, _)| i);
    let (number, unit) = s.split_at(split);
    let unit = unit.trim();
    if number.is_empty() {
        return Err(QuantityError::BadNumber);
    }
    let value: f64 = number.parse().map_err(|_| QuantityError::BadNumber)?;
    if !value.is_finite() {
        return Err(QuantityError::BadNumber);
    }
    match unit {
        "" => Err(QuantityError::MissingUnit),
        "m" => Ok(Length::from_m(value)),
        "mm" => Ok(Length::from_mm(value)),
        "um" | "µm" => Ok(Length::from_um(value)),
        "nm" => Ok(Length::from_nm(value)),
        other => Err(QuantityError::UnknownUnit(other.to_string())),
    }
}
