//! Error types, grouped by the exit-code classes the CLI reports:
//! physics-domain errors (exit 1), configuration errors (exit 2), and
//! numerical-oracle errors (exit 3).

use thiserror::Error;

/// Errors raised by the closed-form physics layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    /// A quantity that must be a nonnegative finite length was not.
    #[error("invalid length for {context}: {value_m} m (must be finite and >= 0)")]
    InvalidLength { context: &'static str, value_m: f64 },

    /// A quantity that must be strictly positive was not.
    #[error("invalid value for {context}: {value} (must be finite and > 0)")]
    NonPositive { context: &'static str, value: f64 },

    /// An operation requiring a specific beam kind was called on the other.
    #[error("invalid beam mode: {0}")]
    InvalidMode(&'static str),

    /// A Gaussian parameter lost its strictly positive real part.
    #[error("invalid packet: Re(gamma) = {re_gamma_m2} m^2 must be > 0")]
    InvalidPacket { re_gamma_m2: f64 },

    /// Free propagation over a negative distance was requested.
    #[error("negative propagation distance: {distance_m} m")]
    NegativeDistance { distance_m: f64 },

    /// The lens transform has no real output waist for this configuration.
    #[error(
        "no real waist behind the lens: W^2 = {w2_m2} m^2 against residual chirp \
         Lambda*|L - 4f| = {chirp_m2} m^2 (need W^2 >= 2*Lambda*|L - 4f|); \
         incoming waist {waist_m2} m^2, f = {focal_m} m"
    )]
    NoRealWaist {
        w2_m2: f64,
        chirp_m2: f64,
        waist_m2: f64,
        focal_m: f64,
    },

    /// Width inversion hit a negative discriminant: the observed pattern is
    /// narrower than the diffraction limit allows at this distance. This is a
    /// physically meaningful outcome (it rules out the assumed geometry), not
    /// a numerical failure.
    #[error(
        "observed pattern narrower than diffraction limit for this distance: \
         fwhm = {fwhm_m} m at D = {distance_m} m implies W^2 = {w2_m2} m^2 \
         below the minimum 2*sqrt(c)*Lambda*D = {limit_m2} m^2"
    )]
    DiffractionLimited {
        fwhm_m: f64,
        distance_m: f64,
        w2_m2: f64,
        limit_m2: f64,
    },

    /// Fitted pattern variance does not exceed the slit contribution.
    #[error(
        "inconsistent calibration: fitted x = {x_m2} m^2 is below the slit \
         floor epsilon^2 = {eps2_m2} m^2; no nonnegative correlation length fits"
    )]
    InconsistentCalibration { x_m2: f64, eps2_m2: f64 },

    /// The element lists handed to the pipeline violate its shape contract.
    #[error("invalid pipeline shape: {0}")]
    PipelineShape(String),
}

/// Errors raised while reading, validating, or writing scenario files.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed scenario file: {0}")]
    Syntax(String),

    /// A quantity string was missing its mandatory unit suffix.
    #[error("field {field}: missing unit suffix in {value:?} (write e.g. \"0.16 mm\")")]
    UnitOmission { field: String, value: String },

    /// A quantity string used an unrecognized unit.
    #[error("field {field}: unknown unit {unit:?} in {value:?} (use m, mm, um, or nm)")]
    UnknownUnit {
        field: String,
        unit: String,
        value: String,
    },

    /// A quantity string failed to parse as a number + unit.
    #[error("field {field}: cannot parse quantity {value:?}")]
    BadQuantity { field: String, value: String },

    /// A parsed value violates a scenario invariant.
    #[error("field {field}: {message}")]
    Invariant { field: String, message: String },

    #[error("unknown preset {0:?} (expected popper-nolens, kim-shih, or strekalov)")]
    UnknownPreset(String),

    #[error("bad width list/range spec {spec:?}: {message}")]
    BadWidthSpec { spec: String, message: String },
}

/// Errors raised by the grid-based numerical oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    /// Probability mass is leaking past the sampled window.
    #[error(
        "grid extent too small: {mass_outside:.3e} of the probability mass \
         lies in the outer edge of the window (extent {extent_m} m, n = {n})"
    )]
    ExtentTooSmall {
        extent_m: f64,
        n: usize,
        mass_outside: f64,
    },

    /// A feature is too fine for the grid step to resolve.
    #[error(
        "grid resolution too coarse: feature scale {feature_m} m needs a step \
         below {required_step_m} m but the grid step is {step_m} m"
    )]
    ResolutionTooCoarse {
        feature_m: f64,
        required_step_m: f64,
        step_m: f64,
    },

    /// Two grids that must share geometry do not.
    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    /// Spectral propagation failed its unitarity bound.
    #[error("spectral propagation norm drift {drift:.3e} exceeds the unitarity bound")]
    NormDrift { drift: f64 },

    /// A quadrature failed to converge under refinement.
    #[error("quadrature for {quantity} did not converge: last change {last_change:.3e}")]
    NotConverged { quantity: String, last_change: f64 },
}
