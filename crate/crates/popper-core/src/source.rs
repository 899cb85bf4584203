//! The two-particle momentum-entangled Gaussian source and its exact free
//! evolution.
//!
//! The state factorizes in relative/center-of-mass coordinates
//! `Δ = y₁ - y₂`, `S = y₁ + y₂`:
//!
//! ```text
//! ψ(y₁, y₂; L) ∝ exp(-Δ²/R) · exp(-S²/(4C))
//!     R = ℓc² + 2iΛL          (relative denominator)
//!     C = Ω²  + iΛL/2         (center-of-mass denominator)
//! ```
//!
//! `ℓc` is the correlation length (relative-coordinate localization; 0 for a
//! perfect EPR pair) and `Ω` the center-of-mass spread (∞ in the wide-pump
//! limit). Free co-evolution of both particles over a distance `L` only
//! *shifts the imaginary parts* of the two denominators — the state stays in
//! this two-parameter family forever, which is why evolution here is exact
//! and O(1) while the grid oracle does the same job the slow way.
//!
//! Because `Re R = ℓc²` and `Re C = Ω²` are evolution invariants, the
//! per-particle momentum marginals are conserved:
//! `Var(p)/ħ² = 1/Re R + 1/(4 Re C)` at every distance.

use num_complex::Complex64;

use crate::error::PhysicsError;
use crate::quantities::{ComplexArea, DiffractionScale, Length, MomentumSpread};

/// The source parameters: correlation length, center-of-mass spread, and the
/// beam's diffraction scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSpec {
    lc: Length,
    omega: Length,
    scale: DiffractionScale,
}

impl SourceSpec {
    /// `lc` must be finite and positive. `omega` must be positive and may be
    /// [`Length::INFINITY`] (wide-open center-of-mass limit); all downstream
    /// algebra treats that limit exactly.
    pub fn new(lc: Length, omega: Length, scale: DiffractionScale) -> Result<Self, PhysicsError> {
        let lc = lc.expect_positive("correlation length")?;
        if !(omega.m() > 0.0) {
            return Err(PhysicsError::NonPositive {
                context: "center-of-mass spread",
                value: omega.m(),
            });
        }
        Ok(SourceSpec { lc, omega, scale })
    }

    pub fn correlation_length(self) -> Length {
        self.lc
    }
    pub fn com_spread(self) -> Length {
        self.omega
    }
    pub fn scale(self) -> DiffractionScale {
        self.scale
    }
}

/// The pair state at some co-propagation distance, stored as the two
/// complex denominators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairState {
    d_rel: ComplexArea,
    d_com: ComplexArea,
    distance: Length,
    scale: DiffractionScale,
}

impl PairState {
    /// Relative-coordinate denominator `R = ℓc² + 2iΛL`.
    pub fn d_rel(self) -> ComplexArea {
        self.d_rel
    }
    /// Center-of-mass denominator `C = Ω² + iΛL/2`.
    pub fn d_com(self) -> ComplexArea {
        self.d_com
    }
    /// Co-propagation distance accumulated so far.
    pub fn distance(self) -> Length {
        self.distance
    }
    pub fn scale(self) -> DiffractionScale {
        self.scale
    }

    /// Unnormalized amplitude at a sample point. The center-of-mass factor
    /// vanishes exactly in the Ω → ∞ limit (its reciprocal is zero).
    pub fn amplitude(self, y1: Length, y2: Length) -> Complex64 {
        let delta = y1.m() - y2.m();
        let s = y1.m() + y2.m();
        let rel = -(delta * delta) * self.d_rel.recip_or_zero();
        let com = -(s * s) * 0.25 * self.d_com.recip_or_zero();
        (rel + com).exp()
    }
}

/// The pair state at the source plane (distance 0).
pub fn initial_state(src: SourceSpec) -> PairState {
    PairState {
        d_rel: ComplexArea::from_real(src.lc.sq()),
        d_com: ComplexArea::from_real(src.omega.sq()),
        distance: Length::ZERO,
        scale: src.scale,
    }
}

/// Co-evolve both particles over a further distance `L ≥ 0`:
/// `R += 2iΛL`, `C += iΛL/2`. Exact and associative:
/// `evolve(L₁)` then `evolve(L₂)` equals `evolve(L₁+L₂)`.
pub fn evolve_pair(s: PairState, l: Length) -> Result<PairState, PhysicsError> {
    if !(l.m().is_finite() && l.m() >= 0.0) {
        return Err(PhysicsError::NegativeDistance { distance_m: l.m() });
    }
    let lam_l = s.scale.reduced() * l;
    Ok(PairState {
        d_rel: s.d_rel.shift_im(lam_l * 2.0),
        d_com: s.d_com.shift_im(lam_l * 0.5),
        distance: s.distance + l,
        scale: s.scale,
    })
}

/// Per-particle momentum spread of the source state,
/// `Δp/ħ = sqrt(1/ℓc² + 1/(4Ω²))` — the wide-pump limit is `ħ/ℓc`.
pub fn initial_momentum_spread(src: SourceSpec) -> MomentumSpread {
    let a = 1.0 / src.lc.m();
    let b = 1.0 / (2.0 * src.omega.m()); // 0 exactly for infinite omega
    MomentumSpread::from_per_hbar((a * a + b * b).sqrt())
}

/// Per-particle position spread at the source plane,
/// `Δy = ½ sqrt(Ω² + ℓc²/4)`.
pub fn initial_position_spread(src: SourceSpec) -> Length {
    ((src.omega.sq() + src.lc.sq() * 0.25) * 0.25).sqrt()
}

/// Exact per-particle marginal position spread at the state's current
/// distance: `Var(y) = |R|²/(16 Re R) + |C|²/(4 Re C)` (infinite for Ω = ∞).
pub fn marginal_position_sigma(s: PairState) -> Length {
    let var = s.d_rel.abs2_over_re() * (1.0 / 16.0) + s.d_com.abs2_over_re() * 0.25;
    var.sqrt()
}

/// Unconditioned beam width of either particle at the current plane, in the
/// same `W` convention as packet intensity widths (`|φ|² ∝ exp(-2y²/W²)`,
/// i.e. `W = 2σ`). This is the ceiling no conditioned pattern can exceed.
pub fn beam_width(s: PairState) -> Length {
    marginal_position_sigma(s) * 2.0
}

/// Exact per-particle marginal momentum spread at the current distance:
/// `Δp/ħ = sqrt(1/Re R + 1/(4 Re C))`. Free evolution never changes the
/// real parts, so this is an evolution invariant.
pub fn marginal_momentum_spread(s: PairState) -> MomentumSpread {
    // The state is a product over the (Δ, S) sectors, so momentum variances
    // add sector by sector: ħ²/Re R from the relative part, ħ²/(4 Re C) from
    // the center-of-mass part.
    let re_r = s.d_rel.re().m2();
    let com_re = s.d_com.re().m2();
    let com_term = if com_re.is_finite() { 0.25 / com_re } else { 0.0 };
    MomentumSpread::from_per_hbar((1.0 / re_r + com_term).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantities::Length;
    use approx::assert_relative_eq;

    fn photon_scale() -> DiffractionScale {
        DiffractionScale::photon(Length::from_nm(702.0)).unwrap()
    }

    fn spec(lc_mm: f64, omega_mm: f64) -> SourceSpec {
        SourceSpec::new(
            Length::from_mm(lc_mm),
            Length::from_mm(omega_mm),
            photon_scale(),
        )
        .unwrap()
    }

    #[test]
    fn initial_relative_denominator_is_lc_squared() {
        let s = initial_state(spec(0.04, 3.0));
        assert_relative_eq!(s.d_rel().re().mm2(), 1.6e-3, max_relative = 1e-14);
        assert_eq!(s.d_rel().im().m2(), 0.0);
        assert_eq!(s.distance().m(), 0.0);
    }

    #[test]
    fn evolution_is_a_semigroup() {
        let s0 = initial_state(spec(0.1, 2.0));
        let once = evolve_pair(evolve_pair(s0, Length::from_m(1.0)).unwrap(), Length::from_m(1.0))
            .unwrap();
        let twice = evolve_pair(s0, Length::from_m(2.0)).unwrap();
        assert_relative_eq!(
            once.d_rel().im().m2(),
            twice.d_rel().im().m2(),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            once.d_com().im().m2(),
            twice.d_com().im().m2(),
            max_relative = 1e-15
        );
        assert_eq!(once.d_rel().re().m2(), twice.d_rel().re().m2());
    }

    #[test]
    fn evolve_rejects_negative_distance() {
        let s0 = initial_state(spec(0.1, 2.0));
        assert!(matches!(
            evolve_pair(s0, Length::from_m(-0.1)),
            Err(PhysicsError::NegativeDistance { .. })
        ));
    }

    #[test]
    fn evolution_shifts_only_imaginary_parts() {
        let s = evolve_pair(initial_state(spec(0.05, 1.5)), Length::from_m(0.8)).unwrap();
        let lam_l = photon_scale().reduced().m() * 0.8;
        assert_relative_eq!(s.d_rel().im().m2(), 2.0 * lam_l, max_relative = 1e-15);
        assert_relative_eq!(s.d_com().im().m2(), 0.5 * lam_l, max_relative = 1e-15);
        assert_relative_eq!(
            s.d_rel().re().m2(),
            Length::from_mm(0.05).sq().m2(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn initial_momentum_spread_limits() {
        // Wide-pump limit: Delta p -> hbar / lc.
        let wide = SourceSpec::new(Length::from_mm(0.04), Length::INFINITY, photon_scale()).unwrap();
        assert_relative_eq!(
            initial_momentum_spread(wide).per_hbar(),
            1.0 / 0.04e-3,
            max_relative = 1e-14
        );
        // lc = 2*Omega doubles the variance: Delta p^2 = 2 (hbar/lc)^2.
        let s = spec(0.2, 0.1);
        assert_relative_eq!(
            initial_momentum_spread(s).per_hbar(),
            (2.0f64).sqrt() / 0.2e-3,
            max_relative = 1e-14
        );
    }

    #[test]
    fn initial_position_spread_limits() {
        // lc -> 0: Delta y -> Omega / 2.
        let s = spec(1e-6, 1.0);
        assert_relative_eq!(initial_position_spread(s).mm(), 0.5, max_relative = 1e-9);
        // Omega = lc/2: Delta y = Omega / sqrt(2).
        let t = spec(0.2, 0.1);
        assert_relative_eq!(
            initial_position_spread(t).mm(),
            0.1 / (2.0f64).sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn marginal_momentum_is_an_evolution_invariant() {
        let src = spec(0.07, 1.3);
        let s0 = initial_state(src);
        let s1 = evolve_pair(s0, Length::from_m(1.7)).unwrap();
        assert_relative_eq!(
            marginal_momentum_spread(s0).per_hbar(),
            marginal_momentum_spread(s1).per_hbar(),
            max_relative = 1e-15
        );
        // And it agrees with the closed-form initial spread.
        assert_relative_eq!(
            marginal_momentum_spread(s0).per_hbar(),
            initial_momentum_spread(src).per_hbar(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn beam_width_matches_sector_sum() {
        let src = spec(0.08, 2.0);
        let l = Length::from_m(1.485);
        let s = evolve_pair(initial_state(src), l).unwrap();
        let lam_l = photon_scale().reduced().m() * l.m();
        let lc2 = 0.08e-3f64.powi(2);
        let om2 = 2.0e-3f64.powi(2);
        // 4 sigma^2 = lc^2/4 + (Lambda L)^2/lc^2 + Omega^2 + (Lambda L)^2/(4 Omega^2)
        let w2 = lc2 / 4.0 + lam_l * lam_l / lc2 + om2 + lam_l * lam_l / (4.0 * om2);
        assert_relative_eq!(beam_width(s).m(), w2.sqrt(), max_relative = 1e-13);
    }

    #[test]
    fn beam_width_is_infinite_in_the_wide_pump_limit() {
        let src = SourceSpec::new(Length::from_mm(0.04), Length::INFINITY, photon_scale()).unwrap();
        let s = evolve_pair(initial_state(src), Length::from_m(1.0)).unwrap();
        assert!(beam_width(s).m().is_infinite());
        // Momentum spread stays finite and equal to hbar/lc.
        assert_relative_eq!(
            marginal_momentum_spread(s).per_hbar(),
            1.0 / 0.04e-3,
            max_relative = 1e-14
        );
    }

    #[test]
    fn amplitude_is_inversion_symmetric() {
        let s = evolve_pair(initial_state(spec(0.1, 1.0)), Length::from_m(0.5)).unwrap();
        let a = s.amplitude(Length::from_mm(0.3), Length::from_mm(-0.1));
        let b = s.amplitude(Length::from_mm(-0.3), Length::from_mm(0.1));
        assert_relative_eq!(a.re, b.re, max_relative = 1e-15);
        assert_relative_eq!(a.im, b.im, max_relative = 1e-15);
    }

    #[test]
    fn wide_pump_amplitude_depends_only_on_separation() {
        let src = SourceSpec::new(Length::from_mm(0.04), Length::INFINITY, photon_scale()).unwrap();
        let s = evolve_pair(initial_state(src), Length::from_m(0.3)).unwrap();
        let a = s.amplitude(Length::from_mm(0.02), Length::from_mm(-0.01));
        let b = s.amplitude(Length::from_mm(0.52), Length::from_mm(0.49));
        assert_relative_eq!(a.re, b.re, max_relative = 1e-12);
        assert_relative_eq!(a.im, b.im, max_relative = 1e-12);
    }
}
