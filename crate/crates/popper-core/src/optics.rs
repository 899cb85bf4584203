//! Slit states, slit conditioning, free-space and lens propagation, and
//! pipeline composition.
//!
//! Conditioning is a projection: detecting particle 1 behind a Gaussian slit
//! `φ₁(y₁) ∝ exp(-y₁²/ε²)` collapses particle 2 into the pure packet
//! `φ₂(y₂) = ∫ φ₁*(y₁) ψ(y₁, y₂; L₁) dy₁`. For the Gaussian pair state that
//! integral stays Gaussian, with the exact parameter
//!
//! ```text
//! Γ = (ε² + iΛL₁ + ℓ̂c²) / (1 + (ε² + iΛL₁)·q̂) + iΛL₁
//!     ℓ̂c² = ℓc² / (1 + ℓc²/(4Ω²))        q̂ = 1/(Ω² + ℓc²/4)
//! ```
//!
//! written with the center-of-mass curvatures inverted (`1/Ω²`-style) so the
//! wide-pump limit Ω = ∞ evaluates exactly in f64 (the hatted quantities just
//! become `ℓc²` and `0`).
//!
//! The lens is the idealized refocusing unitary that maps a packet referenced
//! to a waist `σ₀²` at accumulated chirp `ΛL` into a new waist `σ̃²` with
//! output chirp `Λ(L-4f)`, subject to the width-continuity condition
//! `σ̃⁴ - W²σ̃² + Λ²(L-4f)² = 0` where `W² = σ₀² + Λ²L²/σ₀²`. The quadratic
//! has two roots; we keep the one nearest the incoming waist (the unique
//! choice that reproduces the 2f–2f imaging identity) and expose the other
//! behind [`LensRoot::Alternate`].

use crate::error::PhysicsError;
use crate::quantities::{
    Area, ComplexArea, DiffractionScale, GaussianPacket, Length, Normalization,
};
use crate::source::{evolve_pair, initial_state, PairState, SourceSpec};
use num_complex::Complex64;

/// Gaussian-equivalent `ε` per unit of rectangular full width, calibrated so
/// the Gaussian model reproduces a hard slit's far-field pattern width
/// (`ε = a/2`). This is the default conversion.
pub const RECT_CONVERSION_FAR_FIELD: f64 = 0.5;

/// Alternative aperture-profile fit (`ε = 0.6875·a`, i.e. 0.11 mm for a
/// 0.16 mm slit) that matches the near-aperture localization instead of the
/// far-field width.
pub const RECT_CONVERSION_APERTURE_FIT: f64 = 0.6875;

/// A Gaussian slit `exp(-y²/ε²)`, optionally tagged with the rectangular
/// aperture it models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlitSpec {
    epsilon: Length,
    rect_full_width: Option<Length>,
    conversion: f64,
}

impl SlitSpec {
    /// Slit given directly by its Gaussian parameter `ε` (finite, > 0).
    pub fn from_epsilon(epsilon: Length) -> Result<Self, PhysicsError> {
        let epsilon = epsilon.expect_positive("slit epsilon")?;
        Ok(SlitSpec {
            epsilon,
            rect_full_width: None,
            conversion: 1.0,
        })
    }

    /// Slit modeling a rectangular aperture of the given full width via
    /// `ε = conversion × full_width`.
    pub fn from_rect(full_width: Length, conversion: f64) -> Result<Self, PhysicsError> {
        let full_width = full_width.expect_positive("slit full width")?;
        if !(conversion.is_finite() && conversion > 0.0) {
            return Err(PhysicsError::NonPositive {
                context: "slit conversion factor",
                value: conversion,
            });
        }
        Ok(SlitSpec {
            epsilon: full_width * conversion,
            rect_full_width: Some(full_width),
            conversion,
        })
    }

    /// The degenerate ε → ∞ slit: everything passes, nothing is learned,
    /// and [`run_pipeline`] reports the unconditioned beam marginal.
    pub fn wide_open() -> Self {
        SlitSpec {
            epsilon: Length::INFINITY,
            rect_full_width: None,
            conversion: 1.0,
        }
    }

    pub fn epsilon(self) -> Length {
        self.epsilon
    }
    pub fn rect_full_width(self) -> Option<Length> {
        self.rect_full_width
    }
    pub fn conversion(self) -> f64 {
        self.conversion
    }
    pub fn is_wide_open(self) -> bool {
        self.epsilon.m().is_infinite()
    }
}

/// One element of an optical arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OpticalElement {
    FreeSpace(Length),
    Lens { focal: Length },
    Slit(SlitSpec),
    Detector,
}

/// The state particle 1 is projected onto at its slit: `Γ = ε²`, localized
/// to `Δy = ε/2`.
pub fn slit_packet(s: SlitSpec) -> Result<GaussianPacket, PhysicsError> {
    if s.is_wide_open() {
        return Err(PhysicsError::InvalidLength {
            context: "slit epsilon (a wide-open slit has no packet form)",
            value_m: f64::INFINITY,
        });
    }
    GaussianPacket::at_waist(s.epsilon.sq())
}

/// Project particle 1 onto the slit state and return particle 2's exact
/// conditioned packet.
///
/// The pair must be evolved to the slit plane (its accumulated distance is
/// the `L₁` of the formula). The returned `waist_hint` is the wide-pump
/// localization floor `ε² + ℓc²`. `Re Γ` is provably positive for every
/// valid input, which the function asserts.
pub fn condition_on_slit(pair: PairState, slit: SlitSpec) -> Result<GaussianPacket, PhysicsError> {
    if slit.is_wide_open() {
        return Err(PhysicsError::InvalidLength {
            context: "slit epsilon (wide-open slit: use run_pipeline's unconditioned outcome)",
            value_m: f64::INFINITY,
        });
    }
    let lc2 = pair.d_rel().re().m2();
    let lam_l1 = pair.d_rel().im().m2() / 2.0;
    let eps2 = slit.epsilon().sq().m2();

    // Center-of-mass curvature in inverse form; both vanish exactly as Ω → ∞.
    let omega2 = pair.d_com().re().m2();
    let (lc2_hat, q_hat) = if omega2.is_finite() {
        (
            lc2 / (1.0 + lc2 / (4.0 * omega2)),
            1.0 / (omega2 + lc2 / 4.0),
        )
    } else {
        (lc2, 0.0)
    };

    let eps_chirped = Complex64::new(eps2, lam_l1);
    let gamma = (eps_chirped + lc2_hat) / (1.0 + eps_chirped * q_hat) + Complex64::new(0.0, lam_l1);
    assert!(
        gamma.re > 0.0,
        "conditioned packet lost positivity: {gamma} (lc2={lc2}, eps2={eps2})"
    );
    GaussianPacket::from_parts(
        ComplexArea::from_complex_m2(gamma),
        Area::from_m2(eps2 + lc2),
        Normalization::Normalized,
    )
}

/// Free propagation over `L ≥ 0`: `Γ += iΛL`; the waist reference is
/// unchanged.
pub fn free_propagate(
    p: GaussianPacket,
    l: Length,
    scale: DiffractionScale,
) -> Result<GaussianPacket, PhysicsError> {
    if !(l.m().is_finite() && l.m() >= 0.0) {
        return Err(PhysicsError::NegativeDistance { distance_m: l.m() });
    }
    GaussianPacket::from_parts(
        p.gamma().shift_im(scale.reduced() * l),
        p.waist_hint(),
        p.norm(),
    )
}

/// Which root of the lens width condition to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LensRoot {
    /// The root nearest the incoming waist — the physical branch that makes
    /// 2f–2f imaging an identity.
    #[default]
    NearestWaist,
    /// The other admissible root, exposed for exploration.
    Alternate,
}

/// Apply the refocusing lens with the default (nearest-waist) root.
pub fn lens_transform(
    p: GaussianPacket,
    focal: Length,
    scale: DiffractionScale,
) -> Result<GaussianPacket, PhysicsError> {
    lens_transform_with_root(p, focal, scale, LensRoot::NearestWaist)
}

/// Apply the refocusing lens with an explicit root choice.
///
/// Requires the packet to be referenced to its waist
/// (`Γ = waist_hint + iΛL`); free propagation and previous lens passes
/// preserve that form. Fails with [`PhysicsError::NoRealWaist`] when the
/// width condition has no real solution (`W² < 2Λ|L-4f|`).
pub fn lens_transform_with_root(
    p: GaussianPacket,
    focal: Length,
    scale: DiffractionScale,
    root: LensRoot,
) -> Result<GaussianPacket, PhysicsError> {
    let focal = focal.expect_positive("lens focal length")?;
    let sigma0_sq = p.gamma().re().m2();
    let hint = p.waist_hint().m2();
    if !(hint > 0.0) || (sigma0_sq - hint).abs() > 1e-9 * sigma0_sq {
        return Err(PhysicsError::PipelineShape(format!(
            "lens input packet is not referenced to its waist: \
             Re(gamma) = {sigma0_sq} m^2 but waist_hint = {hint} m^2"
        )));
    }
    let lam = scale.reduced().m();
    let l_in = p.gamma().im().m2() / lam;
    let l_out = l_in - 4.0 * focal.m();
    let chirp_out = lam * l_out; // Λ(L - 4f), signed
    let w2 = sigma0_sq + (lam * l_in) * (lam * l_in) / sigma0_sq;

    // σ̃⁴ - W²σ̃² + Λ²(L-4f)² = 0
    let product = chirp_out * chirp_out;
    let disc = w2 * w2 - 4.0 * product;
    // Tolerate a hair-negative discriminant so the tangent (double-root)
    // configuration survives rounding.
    let disc_tol = 1e-12 * w2 * w2;
    if disc < -disc_tol {
        return Err(PhysicsError::NoRealWaist {
            w2_m2: w2,
            chirp_m2: chirp_out.abs(),
            waist_m2: sigma0_sq,
            focal_m: focal.m(),
        });
    }
    let r = disc.max(0.0).sqrt();
    let big = 0.5 * (w2 + r);
    // The small root via the product keeps full precision when r ≈ W².
    let small = if big > 0.0 { product / big } else { 0.0 };

    // A zero small root (L = 4f) is not a normalizable waist; only the big
    // root is admissible then.
    let nearest = if small > 0.0 && (small - sigma0_sq).abs() <= (big - sigma0_sq).abs() {
        small
    } else {
        big
    };
    let sigma_new_sq = match root {
        LensRoot::NearestWaist => nearest,
        LensRoot::Alternate => {
            if nearest == big && small > 0.0 {
                small
            } else {
                big
            }
        }
    };

    GaussianPacket::from_parts(
        ComplexArea::new(Area::from_m2(sigma_new_sq), Area::from_m2(chirp_out)),
        Area::from_m2(sigma_new_sq),
        p.norm(),
    )
}

/// The outcome of a conditioned pipeline run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PipelineOutcome {
    /// Particle 1 was projected onto a finite slit; particle 2 is in a pure
    /// Gaussian packet at the detector plane.
    Conditioned(GaussianPacket),
    /// The slit was wide open (ε = ∞): no projection happened and particle 2
    /// is described by the unconditioned beam marginal of this pair state,
    /// evolved to the detector plane.
    Unconditioned(PairState),
}

impl PipelineOutcome {
    pub fn packet(&self) -> Option<GaussianPacket> {
        match self {
            PipelineOutcome::Conditioned(p) => Some(*p),
            PipelineOutcome::Unconditioned(_) => None,
        }
    }
}

/// Validated decomposition of arm 1: the elements before the slit, and the
/// slit itself (which must terminate the arm).
fn split_arm1(arm1: &[OpticalElement]) -> Result<(&[OpticalElement], SlitSpec), PhysicsError> {
    let slit_positions: Vec<usize> = arm1
        .iter()
        .enumerate()
        .filter_map(|(i, e)| matches!(e, OpticalElement::Slit(_)).then_some(i))
        .collect();
    let idx = match slit_positions.as_slice() {
        [] => {
            return Err(PhysicsError::PipelineShape(
                "arm 1 must contain exactly one slit (found none)".into(),
            ))
        }
        [i] => *i,
        more => {
            return Err(PhysicsError::PipelineShape(format!(
                "arm 1 must contain exactly one slit (found {})",
                more.len()
            )))
        }
    };
    if idx != arm1.len() - 1 {
        return Err(PhysicsError::PipelineShape(
            "arm 1 must end at its slit; conditioning happens there".into(),
        ));
    }
    let slit = match arm1[idx] {
        OpticalElement::Slit(s) => s,
        _ => unreachable!(),
    };
    for e in &arm1[..idx] {
        match e {
            OpticalElement::FreeSpace(l) => {
                l.expect_nonnegative("free-space length")?;
            }
            OpticalElement::Lens { focal } => {
                focal.expect_positive("lens focal length")?;
            }
            OpticalElement::Detector => {
                return Err(PhysicsError::PipelineShape(
                    "arm 1 must not contain a detector before its slit".into(),
                ))
            }
            OpticalElement::Slit(_) => unreachable!(),
        }
    }
    Ok((&arm1[..idx], slit))
}

/// Validated total free length of arm 2 (free segments only, terminated by
/// exactly one detector).
fn arm2_length(arm2: &[OpticalElement]) -> Result<Length, PhysicsError> {
    let Some((last, body)) = arm2.split_last() else {
        return Err(PhysicsError::PipelineShape(
            "arm 2 must end at a detector (arm is empty)".into(),
        ));
    };
    if !matches!(last, OpticalElement::Detector) {
        return Err(PhysicsError::PipelineShape(
            "arm 2 must end at a detector".into(),
        ));
    }
    let mut total = Length::ZERO;
    for e in body {
        match e {
            OpticalElement::FreeSpace(l) => {
                total = total + l.expect_nonnegative("free-space length")?;
            }
            OpticalElement::Slit(_) => {
                return Err(PhysicsError::PipelineShape(
                    "arm 2 must not contain a slit (slit B stays wide open)".into(),
                ))
            }
            OpticalElement::Lens { .. } => {
                return Err(PhysicsError::PipelineShape(
                    "arm 2 supports free propagation only (no lens)".into(),
                ))
            }
            OpticalElement::Detector => {
                return Err(PhysicsError::PipelineShape(
                    "arm 2 must contain exactly one detector, at its end".into(),
                ))
            }
        }
    }
    Ok(total)
}

/// Validate the two-arm shape without running anything: arm 1 must end at
/// its single slit (free spaces and at most one lens before it), arm 2 must
/// be free propagation into a single terminal detector. Returns arm 2's
/// total flight length.
pub fn validate_arms(
    arm1: &[OpticalElement],
    arm2: &[OpticalElement],
) -> Result<Length, PhysicsError> {
    split_arm1(arm1)?;
    arm2_length(arm2)
}

/// Particle 2's conditioned packet at an arbitrary flight distance `l`,
/// given arm 1 (ending in a finite slit). This is [`run_pipeline`] without
/// the detector bookkeeping — useful for scanning planes (e.g. locating the
/// ghost image).
pub fn conditioned_packet_at(
    src: SourceSpec,
    arm1: &[OpticalElement],
    l: Length,
) -> Result<GaussianPacket, PhysicsError> {
    let (pre_slit, slit) = split_arm1(arm1)?;
    if slit.is_wide_open() {
        return Err(PhysicsError::PipelineShape(
            "wide-open slit has no conditioned packet; use run_pipeline".into(),
        ));
    }
    if !l.m().is_finite() {
        return Err(PhysicsError::InvalidLength {
            context: "particle-2 flight distance",
            value_m: l.m(),
        });
    }
    let scale = src.scale();
    let lam = scale.reduced();

    let has_lens = pre_slit
        .iter()
        .any(|e| matches!(e, OpticalElement::Lens { .. }));

    if !has_lens {
        // Exact conditioning at the slit plane, then carry particle 2 the
        // remaining (signed) distance. The conditioned state is defined at
        // any particle-2 plane — planes before the conditioning plane just
        // carry less chirp.
        let l1 = pre_slit.iter().fold(Length::ZERO, |acc, e| match e {
            OpticalElement::FreeSpace(d) => acc + *d,
            _ => acc,
        });
        let pair = evolve_pair(initial_state(src), l1)?;
        let at_slit = condition_on_slit(pair, slit)?;
        let gamma = at_slit.gamma().shift_im(lam * (l - l1));
        return GaussianPacket::from_parts(gamma, at_slit.waist_hint(), Normalization::Normalized);
    }

    // Lens arrangement. The refocusing lens makes the conditioned waist —
    // which without a lens is virtual, mirrored upstream of the source —
    // reappear as a *real* focus in arm 2: the ghost image. For a lens a
    // distance b₁ from the source the image plane lies at l* = 2f - b₁ past
    // the source, and the idealized (unit-magnification) refocusing
    // reproduces the conditioned waist width exactly. The conditioned packet
    // is therefore the waist-x packet referenced to the ghost plane:
    // Γ(l) = x + iΛ(l - l*), with x = Re Γ of slit conditioning (= ε² + ℓc²
    // for a wide pump). Note the element-wise lens algebra
    // ([`lens_transform`]) cannot transport slit-scale waists over bench
    // distances (its width-continuity condition has no real root there);
    // imaging of the conditioned wave is a plane-to-plane statement, which is
    // why it is applied here in closed form rather than element by element.
    let mut b1 = Length::ZERO;
    let mut focal = None;
    for e in pre_slit {
        match e {
            OpticalElement::FreeSpace(d) => {
                if focal.is_none() {
                    b1 = b1 + *d;
                }
            }
            OpticalElement::Lens { focal: f } => {
                if focal.replace(*f).is_some() {
                    return Err(PhysicsError::PipelineShape(
                        "arm 1 supports at most one lens".into(),
                    ));
                }
            }
            _ => unreachable!("validated by split_arm1"),
        }
    }
    let focal = focal.expect("lens branch requires a lens");
    let l1 = pre_slit.iter().fold(Length::ZERO, |acc, e| match e {
        OpticalElement::FreeSpace(d) => acc + *d,
        _ => acc,
    });
    let pair = evolve_pair(initial_state(src), l1)?;
    let x_fin = condition_on_slit(pair, slit)?.gamma().re();
    let l_ghost = focal * 2.0 - b1;
    let gamma = ComplexArea::new(x_fin, lam * (l - l_ghost));
    GaussianPacket::from_parts(gamma, x_fin, Normalization::Normalized)
}

/// The particle-2 plane (if any, and if downstream of the source) where the
/// conditioned packet's chirp vanishes — the ghost-image plane for lens
/// arrangements.
pub fn ghost_plane(src: SourceSpec, arm1: &[OpticalElement]) -> Result<Option<Length>, PhysicsError> {
    let at_source = conditioned_packet_at(src, arm1, Length::ZERO)?;
    let lam = src.scale().reduced();
    let l_star = -at_source.gamma().im().m2() / lam.m();
    Ok((l_star >= 0.0).then(|| Length::from_m(l_star)))
}

/// Run the full two-arm pipeline: condition on the arm-1 slit, fly particle 2
/// down arm 2, and return its state at the detector.
pub fn run_pipeline(
    src: SourceSpec,
    arm1: &[OpticalElement],
    arm2: &[OpticalElement],
) -> Result<PipelineOutcome, PhysicsError> {
    let (_, slit) = split_arm1(arm1)?;
    let l_det = arm2_length(arm2)?;
    if slit.is_wide_open() {
        // No projection: particle 2's reduced state is the beam marginal
        // (co-evolving the pair is harmless — particle 1's unitary evolution
        // cannot change particle 2's marginal).
        let pair = evolve_pair(initial_state(src), l_det)?;
        return Ok(PipelineOutcome::Unconditioned(pair));
    }
    Ok(PipelineOutcome::Conditioned(conditioned_packet_at(
        src, arm1, l_det,
    )?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::{packet_intensity_sigma, packet_intensity_width};
    use approx::assert_relative_eq;

    fn photon_scale() -> DiffractionScale {
        DiffractionScale::photon(Length::from_nm(702.0)).unwrap()
    }

    fn source(lc_mm: f64, omega_mm: f64) -> SourceSpec {
        let omega = if omega_mm.is_infinite() {
            Length::INFINITY
        } else {
            Length::from_mm(omega_mm)
        };
        SourceSpec::new(Length::from_mm(lc_mm), omega, photon_scale()).unwrap()
    }

    #[test]
    fn slit_packet_localizes_to_half_epsilon() {
        let s = SlitSpec::from_epsilon(Length::from_mm(0.08)).unwrap();
        let p = slit_packet(s).unwrap();
        assert_relative_eq!(packet_intensity_sigma(p).mm(), 0.04, max_relative = 1e-14);
    }

    #[test]
    fn rect_conversions_match_both_calibrations() {
        let far = SlitSpec::from_rect(Length::from_mm(0.16), RECT_CONVERSION_FAR_FIELD).unwrap();
        assert_relative_eq!(far.epsilon().mm(), 0.08, max_relative = 1e-14);
        let fit = SlitSpec::from_rect(Length::from_mm(0.16), RECT_CONVERSION_APERTURE_FIT).unwrap();
        assert_relative_eq!(fit.epsilon().mm(), 0.11, max_relative = 1e-14);
    }

    #[test]
    fn conditioning_at_source_in_wide_pump_limit_is_exact_sum() {
        let src = source(0.2213594362117866, f64::INFINITY);
        let slit = SlitSpec::from_epsilon(Length::from_mm(0.08)).unwrap();
        let packet = condition_on_slit(initial_state(src), slit).unwrap();
        let expected = Length::from_mm(0.08).sq().m2() + src.correlation_length().sq().m2();
        // Bit-exact: the hatted quantities degenerate to plain additions.
        assert_eq!(packet.gamma().re().m2(), expected);
        assert_eq!(packet.gamma().im().m2(), 0.0);
    }

    #[test]
    fn conditioned_width_matches_localization_formula_for_wide_pump() {
        // Width of the conditioned packet after co-flight L1, wide pump:
        // W^2 = x + 4 Lambda^2 L1^2 / x with x = eps^2 + lc^2.
        let src = source(0.1, f64::INFINITY);
        let slit = SlitSpec::from_epsilon(Length::from_mm(0.06)).unwrap();
        let l1 = Length::from_m(0.8);
        let pair = evolve_pair(initial_state(src), l1).unwrap();
        let packet = condition_on_slit(pair, slit).unwrap();
        let x = 0.06e-3f64.powi(2) + 0.1e-3f64.powi(2);
        let lam_l1 = photon_scale().reduced().m() * l1.m();
        let expected_w2 = x + 4.0 * lam_l1 * lam_l1 / x;
        assert_relative_eq!(
            packet_intensity_width(packet).sq().m2(),
            expected_w2,
            max_relative = 1e-10
        );
    }

    #[test]
    fn conditioning_approaches_wide_pump_limit_for_large_omega() {
        let slit = SlitSpec::from_epsilon(Length::from_mm(0.08)).unwrap();
        let l1 = Length::from_m(0.6);
        let wide = condition_on_slit(
            evolve_pair(initial_state(source(0.15, f64::INFINITY)), l1).unwrap(),
            slit,
        )
        .unwrap();
        let large = condition_on_slit(
            evolve_pair(initial_state(source(0.15, 1e6)), l1).unwrap(),
            slit,
        )
        .unwrap();
        assert_relative_eq!(
            wide.gamma().re().m2(),
            large.gamma().re().m2(),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            wide.gamma().im().m2(),
            large.gamma().im().m2(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn free_propagation_is_additive_and_rejects_negative() {
        let p = GaussianPacket::at_waist(Area::from_mm2(0.01)).unwrap();
        let scale = photon_scale();
        let ab = free_propagate(
            free_propagate(p, Length::from_m(0.3), scale).unwrap(),
            Length::from_m(0.7),
            scale,
        )
        .unwrap();
        let once = free_propagate(p, Length::from_m(1.0), scale).unwrap();
        assert_relative_eq!(
            ab.gamma().im().m2(),
            once.gamma().im().m2(),
            max_relative = 1e-15
        );
        assert_eq!(ab.gamma().re().m2(), once.gamma().re().m2());
        assert!(free_propagate(p, Length::from_m(-0.1), scale).is_err());
    }

    #[test]
    fn lens_round_trip_recovers_the_waist() {
        // Waist sigma0 at L = 2f, lens, then 2f of free flight: identity.
        let scale = photon_scale();
        let f = Length::from_m(0.5);
        let sigma0_sq = Area::from_mm2(0.0554);
        let before = free_propagate(GaussianPacket::at_waist(sigma0_sq).unwrap(), f * 2.0, scale)
            .unwrap();
        let through = lens_transform(before, f, scale).unwrap();
        // Width continuity across the lens.
        assert_relative_eq!(
            packet_intensity_width(through).m(),
            packet_intensity_width(before).m(),
            max_relative = 1e-12
        );
        let after = free_propagate(through, f * 2.0, scale).unwrap();
        assert_relative_eq!(
            after.gamma().re().m2(),
            sigma0_sq.m2(),
            max_relative = 1e-12
        );
        assert!(after.gamma().im().m2().abs() <= 1e-12 * after.gamma().norm().m2());
    }

    #[test]
    fn lens_rejects_configurations_without_a_real_waist() {
        let scale = photon_scale();
        // A tightly focused packet right at the lens (L = 0) with a huge
        // focal length: W^2 << 2*Lambda*4f.
        let p = GaussianPacket::at_waist(Area::from_mm2(1e-4)).unwrap();
        let err = lens_transform(p, Length::from_m(50.0), scale).unwrap_err();
        assert!(matches!(err, PhysicsError::NoRealWaist { .. }));
    }

    #[test]
    fn lens_accepts_the_tangent_double_root() {
        // sigma0^2 = Lambda*L and f = L/2 make the discriminant vanish:
        // the unique root is W^2/2 = Lambda*L.
        let scale = photon_scale();
        let l = Length::from_m(1.0);
        let lam_l = Area::from_m2(scale.reduced().m() * l.m());
        let p = free_propagate(GaussianPacket::at_waist(lam_l).unwrap(), l, scale).unwrap();
        let out = lens_transform(p, Length::from_m(0.5), scale).unwrap();
        assert_relative_eq!(out.gamma().re().m2(), lam_l.m2(), max_relative = 1e-9);
    }

    #[test]
    fn alternate_root_is_the_conjugate_waist() {
        let scale = photon_scale();
        let f = Length::from_m(0.5);
        let sigma0_sq = Area::from_mm2(0.0554);
        let before = free_propagate(GaussianPacket::at_waist(sigma0_sq).unwrap(), f * 2.0, scale)
            .unwrap();
        let near = lens_transform_with_root(before, f, scale, LensRoot::NearestWaist).unwrap();
        let alt = lens_transform_with_root(before, f, scale, LensRoot::Alternate).unwrap();
        // Roots multiply to Lambda^2 (L-4f)^2.
        let chirp = near.gamma().im().m2();
        assert_relative_eq!(
            near.gamma().re().m2() * alt.gamma().re().m2(),
            chirp * chirp,
            max_relative = 1e-10
        );
        assert_ne!(near.gamma().re().m2(), alt.gamma().re().m2());
    }

    #[test]
    fn ghost_image_plane_is_real_and_at_2f_minus_b1() {
        // Lens arrangement: b1, lens f, 2f, slit. Ghost at L = 2f - b1.
        let src = source(0.2213594362117866, f64::INFINITY);
        let f = Length::from_m(0.5);
        let b1 = Length::from_m(0.485);
        let slit = SlitSpec::from_rect(Length::from_mm(0.16), RECT_CONVERSION_FAR_FIELD).unwrap();
        let arm1 = [
            OpticalElement::FreeSpace(b1),
            OpticalElement::Lens { focal: f },
            OpticalElement::FreeSpace(f * 2.0),
            OpticalElement::Slit(slit),
        ];
        let ghost = ghost_plane(src, &arm1).unwrap().expect("ghost plane exists");
        assert_relative_eq!(ghost.m(), 2.0 * f.m() - b1.m(), max_relative = 1e-12);

        let packet = conditioned_packet_at(src, &arm1, ghost).unwrap();
        assert!(packet.gamma().im().m2().abs() < 1e-12 * packet.gamma().norm().m2());
        let x = slit.epsilon().sq().m2() + src.correlation_length().sq().m2();
        assert_relative_eq!(packet.gamma().re().m2(), x, max_relative = 1e-13);
    }

    #[test]
    fn no_lens_pipeline_reproduces_virtual_slit_form() {
        // Wide pump, no lens: detector gamma = (eps^2 + lc^2) + i*Lambda*(2L1+L2).
        let src = source(0.2213594362117866, f64::INFINITY);
        let slit = SlitSpec::from_epsilon(Length::from_mm(0.08)).unwrap();
        let l1 = Length::from_m(0.515);
        let l2 = Length::from_m(0.97);
        let arm1 = [OpticalElement::FreeSpace(l1), OpticalElement::Slit(slit)];
        let arm2 = [
            OpticalElement::FreeSpace(l1),
            OpticalElement::FreeSpace(l2),
            OpticalElement::Detector,
        ];
        let out = run_pipeline(src, &arm1, &arm2).unwrap();
        let packet = out.packet().unwrap();
        let x = slit.epsilon().sq().m2() + src.correlation_length().sq().m2();
        let lam = photon_scale().reduced().m();
        assert_relative_eq!(packet.gamma().re().m2(), x, max_relative = 1e-14);
        assert_relative_eq!(
            packet.gamma().im().m2(),
            lam * (2.0 * l1.m() + l2.m()),
            max_relative = 1e-13
        );
    }

    #[test]
    fn wide_open_slit_yields_the_unconditioned_marginal() {
        let src = source(0.1, 2.0);
        let arm1 = [
            OpticalElement::FreeSpace(Length::from_m(0.4)),
            OpticalElement::Slit(SlitSpec::wide_open()),
        ];
        let arm2 = [
            OpticalElement::FreeSpace(Length::from_m(1.2)),
            OpticalElement::Detector,
        ];
        match run_pipeline(src, &arm1, &arm2).unwrap() {
            PipelineOutcome::Unconditioned(pair) => {
                assert_relative_eq!(pair.distance().m(), 1.2, max_relative = 1e-15);
            }
            PipelineOutcome::Conditioned(_) => panic!("expected unconditioned outcome"),
        }
    }

    #[test]
    fn pipeline_shape_violations_are_rejected() {
        let src = source(0.1, 2.0);
        let slit = OpticalElement::Slit(SlitSpec::from_epsilon(Length::from_mm(0.1)).unwrap());
        let det = OpticalElement::Detector;
        let free = OpticalElement::FreeSpace(Length::from_m(1.0));
        let lens = OpticalElement::Lens {
            focal: Length::from_m(0.5),
        };

        // No slit in arm 1.
        assert!(run_pipeline(src, &[free], &[free, det]).is_err());
        // Two slits.
        assert!(run_pipeline(src, &[slit, slit], &[free, det]).is_err());
        // Elements after the slit.
        assert!(run_pipeline(src, &[slit, free], &[free, det]).is_err());
        // Slit in arm 2.
        assert!(run_pipeline(src, &[slit], &[slit, det]).is_err());
        // Lens in arm 2.
        assert!(run_pipeline(src, &[slit], &[lens, det]).is_err());
        // Arm 2 not ending at a detector.
        assert!(run_pipeline(src, &[slit], &[free]).is_err());
        assert!(run_pipeline(src, &[slit], &[]).is_err());
        // Negative free length.
        assert!(run_pipeline(
            src,
            &[OpticalElement::FreeSpace(Length::from_m(-0.2)), slit],
            &[free, det]
        )
        .is_err());
    }
}
