//! The four top-level operations behind the CLI: simulate, fit, sweep, and
//! the numeric cross-check suite. Each returns a plain data struct; rendering
//! lives in [`super::report`].

use crate::error::{ConfigError, OracleError, PhysicsError};
use crate::optics::{
    conditioned_packet_at, ghost_plane, run_pipeline, validate_arms, OpticalElement,
    PipelineOutcome,
};
use crate::oracle::{run_suite, OracleReport};
use crate::pattern::{
    detector_convolution, fit_correlation_length, fwhm_per_w_exact, invert_width, pattern_width,
    stats_from_packet, sweep_minimum_width, width_vs_slit_sweep, PatternStats, SweepPoint,
    WidthConvention, FWHM_PER_W_REPRODUCTION,
};
use crate::quantities::{packet_momentum_sigma, Area, ComplexArea, Length};
use crate::source::{
    beam_width, evolve_pair, initial_state, marginal_momentum_spread, SourceSpec,
};

use super::scenario::Scenario;

/// Relative slack for the invariant verdicts, so exact-equality cases
/// (wide-open slit, perfectly matched widths) never flip on rounding.
const BOUND_SLACK: f64 = 1e-12;

/// Everything `simulate` reports for one scenario.
#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub label: String,
    /// False when the slit was wide open (no projection happened).
    pub conditioned: bool,
    /// Particle 2's packet parameter at the detector (conditioned runs).
    pub gamma: Option<ComplexArea>,
    /// Pattern geometry at the detector (conditioned runs).
    pub stats: Option<PatternStats>,
    /// Pattern width `W` at the detector under either outcome
    /// (`|φ|² ∝ exp(-2y²/W²)`; equals the beam width when unconditioned).
    pub w: Length,
    pub fwhm_paper: Length,
    pub fwhm_exact: Length,
    /// Unconditioned beam width at the detector plane — the ceiling.
    pub beam_width: Length,
    /// Chirp-free plane of the conditioned packet, if it lies downstream.
    pub ghost_plane: Option<Length>,
    /// Marginal momentum spread of either particle at the source, in 1/m
    /// (units of ħ).
    pub dp_initial_per_hbar: f64,
    /// Momentum spread of the conditioned packet, in 1/m (conditioned runs).
    pub dp_conditioned_per_hbar: Option<f64>,
    /// Pattern no wider than the beam at the same plane.
    pub width_bound_ok: bool,
    /// Conditioning never increased the momentum spread.
    pub momentum_bound_ok: bool,
}

/// Run the pipeline and collect widths, spreads, and invariant verdicts.
pub fn cmd_simulate(sc: &Scenario) -> Result<SimulateOutput, PhysicsError> {
    let l_det = validate_arms(&sc.arm1, &sc.arm2)?;
    let scale = sc.source.scale();
    let initial = initial_state(sc.source);
    let dp_initial = marginal_momentum_spread(initial).per_hbar();
    let beam_at_det = beam_width(evolve_pair(initial, l_det)?);

    match run_pipeline(sc.source, &sc.arm1, &sc.arm2)? {
        PipelineOutcome::Conditioned(p) => {
            let stats = stats_from_packet(p, scale, WidthConvention::reproduction())?;
            let dp_cond = packet_momentum_sigma(p).per_hbar();
            Ok(SimulateOutput {
                label: sc.label.clone(),
                conditioned: true,
                gamma: Some(p.gamma()),
                stats: Some(stats),
                w: stats.w,
                fwhm_paper: stats.fwhm_paper,
                fwhm_exact: stats.fwhm_exact,
                beam_width: beam_at_det,
                ghost_plane: ghost_plane(sc.source, &sc.arm1)?,
                dp_initial_per_hbar: dp_initial,
                dp_conditioned_per_hbar: Some(dp_cond),
                width_bound_ok: stats.w.m() <= beam_at_det.m() * (1.0 + BOUND_SLACK),
                momentum_bound_ok: dp_cond <= dp_initial * (1.0 + BOUND_SLACK),
            })
        }
        PipelineOutcome::Unconditioned(state) => {
            let w = beam_width(state);
            Ok(SimulateOutput {
                label: sc.label.clone(),
                conditioned: false,
                gamma: None,
                stats: None,
                w,
                fwhm_paper: w * FWHM_PER_W_REPRODUCTION,
                fwhm_exact: w * fwhm_per_w_exact(),
                beam_width: beam_at_det,
                ghost_plane: None,
                dp_initial_per_hbar: dp_initial,
                dp_conditioned_per_hbar: None,
                // The "pattern" IS the beam here; both bounds hold by
                // construction.
                width_bound_ok: true,
                momentum_bound_ok: true,
            })
        }
    }
}

/// The effective propagation distance a detector reading should be inverted
/// against: detector plane minus the conditioned packet's (possibly virtual)
/// waist plane, computed in the wide-pump idealization so it is pure
/// geometry. For a bare slit at `L₁` with the detector `l` past it this is
/// `L₁ + l` (i.e. `2L₁ + L₂` with `L₂` the slit-plane-to-detector leg); with
/// the refocusing lens it is the detector's distance past the ghost image.
pub fn virtual_propagation_distance(sc: &Scenario) -> Result<Length, PhysicsError> {
    let l_det = validate_arms(&sc.arm1, &sc.arm2)?;
    let ideal = SourceSpec::new(
        sc.source.correlation_length(),
        Length::INFINITY,
        sc.source.scale(),
    )?;
    let at_source = conditioned_packet_at(ideal, &sc.arm1, Length::ZERO)?;
    // Γ(0) = x + iΛ(0 - l*): the signed waist plane is l* = -Im/Λ, so the
    // distance from it to the detector is l_det + Im/Λ.
    let im0 = at_source.gamma().im().m2() / sc.source.scale().reduced().m();
    Ok(l_det + Length::from_m(im0))
}

/// One convention's inversion of an observed width.
#[derive(Debug, Clone)]
pub struct FitBranch {
    /// `W` recovered from the observed FWHM under this convention.
    pub w: Length,
    pub x_small: Area,
    pub x_large: Area,
    /// The root kept: the small one when it clears the slit floor `ε²`,
    /// otherwise the large one.
    pub x_selected: Area,
    /// `ℓc² = x - ε²` from the selected root (an `x < ε²` outcome is itself
    /// reportable: the calibration is inconsistent).
    pub lc2: Result<Area, PhysicsError>,
    /// Relative error of the forward width recomputed from the selected
    /// root — a self-consistency check, ~1e-16 when healthy.
    pub residual_rel: f64,
}

/// `fit` output: the same observation inverted under both width conventions.
#[derive(Debug, Clone)]
pub struct FitOutput {
    pub label: String,
    pub fwhm_obs: Length,
    pub d_eff: Length,
    pub epsilon: Length,
    pub paper: Result<FitBranch, PhysicsError>,
    pub exact: Result<FitBranch, PhysicsError>,
}

impl FitOutput {
    /// At least one convention produced a usable inversion.
    pub fn any_branch_ok(&self) -> bool {
        self.paper.is_ok() || self.exact.is_ok()
    }
}

fn fit_branch(
    fwhm_obs: Length,
    d: Length,
    epsilon: Length,
    scale: crate::quantities::DiffractionScale,
    conv: WidthConvention,
) -> Result<FitBranch, PhysicsError> {
    let (x_small, x_large) = invert_width(fwhm_obs, d, scale, conv)?;
    let x_selected = if x_small.m2() >= epsilon.sq().m2() {
        x_small
    } else {
        x_large
    };
    let lc2 = fit_correlation_length(x_selected, epsilon);
    let stats = pattern_width(x_selected, d, scale, conv)?;
    let fwhm_back = match conv {
        WidthConvention::Reproduction { .. } => stats.fwhm_paper,
        WidthConvention::Exact => stats.fwhm_exact,
    };
    Ok(FitBranch {
        w: stats.w,
        x_small,
        x_large,
        x_selected,
        lc2,
        residual_rel: (fwhm_back.m() - fwhm_obs.m()).abs() / fwhm_obs.m(),
    })
}

/// Invert an observed detector FWHM back to the waist parameter and `ℓc²`,
/// under both conventions, against the scenario's own geometry.
pub fn cmd_fit(sc: &Scenario, fwhm_obs: Length) -> Result<FitOutput, PhysicsError> {
    let fwhm_obs = fwhm_obs.expect_positive("observed pattern FWHM")?;
    let d_eff = virtual_propagation_distance(sc)?;
    let slit = arm1_slit(&sc.arm1)?;
    let epsilon = slit.epsilon();
    let scale = sc.source.scale();
    Ok(FitOutput {
        label: sc.label.clone(),
        fwhm_obs,
        d_eff,
        epsilon,
        paper: fit_branch(fwhm_obs, d_eff, epsilon, scale, WidthConvention::reproduction()),
        exact: fit_branch(fwhm_obs, d_eff, epsilon, scale, WidthConvention::Exact),
    })
}

fn arm1_slit(arm1: &[OpticalElement]) -> Result<crate::optics::SlitSpec, PhysicsError> {
    let slit = arm1
        .iter()
        .find_map(|e| match e {
            OpticalElement::Slit(s) => Some(*s),
            _ => None,
        })
        .ok_or_else(|| PhysicsError::PipelineShape("arm 1 has no slit".into()))?;
    if slit.is_wide_open() {
        return Err(PhysicsError::PipelineShape(
            "a wide-open slit has no width to fit or sweep against".into(),
        ));
    }
    Ok(slit)
}

/// `sweep` output: ideal curve, optionally the detector-convolved curve, and
/// the closed-form minimum location.
#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub label: String,
    pub d_eff: Length,
    pub lc: Length,
    pub conversion: f64,
    pub detector: Option<(Length, f64)>,
    pub points: Vec<SweepPoint>,
    pub convolved: Option<Vec<SweepPoint>>,
    pub minimum_full_width: Option<Length>,
}

/// Sweep the arm-1 slit width over `widths`, holding the rest of the
/// scenario fixed. The conversion factor is taken from the scenario's slit.
pub fn cmd_sweep(sc: &Scenario, widths: &[Length]) -> Result<SweepOutput, PhysicsError> {
    let d_eff = virtual_propagation_distance(sc)?;
    let slit = arm1_slit(&sc.arm1)?;
    let conversion = slit.conversion();
    let lc = sc.source.correlation_length();
    let scale = sc.source.scale();
    let conv = WidthConvention::reproduction();
    let points = width_vs_slit_sweep(lc, d_eff, scale, widths, conversion, conv)?;
    let convolved = sc
        .detector_width
        .map(|w| detector_convolution(&points, w, sc.detector_k))
        .transpose()?;
    Ok(SweepOutput {
        label: sc.label.clone(),
        d_eff,
        lc,
        conversion,
        detector: sc.detector_width.map(|w| (w, sc.detector_k)),
        points,
        convolved,
        minimum_full_width: sweep_minimum_width(lc, d_eff, scale, conversion, conv),
    })
}

/// Parse a sweep width specification: either a comma list (`"0.1,0.2,0.4"`)
/// or an inclusive range (`"start:stop:step"`), in millimeters.
pub fn parse_widths(spec: &str) -> Result<Vec<Length>, ConfigError> {
    let bad = |message: &str| ConfigError::BadWidthSpec {
        spec: spec.to_string(),
        message: message.to_string(),
    };
    let parse_mm = |s: &str| -> Result<f64, ConfigError> {
        let v: f64 = s
            .trim()
            .parse()
            .map_err(|_| bad(&format!("{:?} is not a number", s.trim())))?;
        // The meters check rejects subnormal inputs whose unit conversion
        // underflows to a zero length.
        if !(v.is_finite() && v > 0.0 && Length::from_mm(v).m() > 0.0) {
            return Err(bad(&format!("width {v} mm is not a positive length")));
        }
        Ok(v)
    };

    let spec_trimmed = spec.trim();
    if spec_trimmed.is_empty() {
        return Err(bad("empty width specification"));
    }
    if spec_trimmed.contains(':') {
        let parts: Vec<&str> = spec_trimmed.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("a range takes exactly start:stop:step"));
        }
        let (start, stop, step) = (parse_mm(parts[0])?, parse_mm(parts[1])?, parse_mm(parts[2])?);
        if stop < start {
            return Err(bad("range stop is below start"));
        }
        let count = ((stop - start) / step).floor() as usize + 1;
        if count > 100_000 {
            return Err(bad("range would generate more than 100000 points"));
        }
        // Walk by index (not repeated addition) and keep points that land
        // within half a step of the stop, so `0.1:0.5:0.1` includes 0.5. The
        // index cap makes termination unconditional even when `step` falls
        // below the float resolution of `start`; such steps cannot advance
        // and are rejected rather than emitting stalled duplicate points.
        let mut widths: Vec<Length> = Vec::with_capacity(count + 1);
        for i in 0..=count {
            let v = start + step * i as f64;
            if v > stop * (1.0 + 1e-12) {
                break;
            }
            let w = Length::from_mm(v);
            if widths.last().is_some_and(|prev| w.m() <= prev.m()) {
                return Err(bad("step is below the numeric resolution of the range"));
            }
            widths.push(w);
        }
        Ok(widths)
    } else {
        spec_trimmed
            .split(',')
            .map(|s| parse_mm(s).map(Length::from_mm))
            .collect()
    }
}

/// `oracle` output: the cross-check reports plus the overall verdict.
#[derive(Debug, Clone)]
pub struct OracleOutput {
    pub reports: Vec<OracleReport>,
    pub strict: bool,
    pub all_passed: bool,
}

/// Run the numeric cross-check suite (optionally one named check), judging
/// each report at its stated tolerance, or half of it under `strict`.
pub fn cmd_oracle(
    selector: Option<&str>,
    strict: bool,
    base_n: usize,
) -> Result<OracleOutput, OracleError> {
    let reports = run_suite(selector, base_n)?;
    let all_passed = reports
        .iter()
        .all(|r| if strict { r.passed_strict() } else { r.passed() });
    Ok(OracleOutput {
        reports,
        strict,
        all_passed,
    })
}
