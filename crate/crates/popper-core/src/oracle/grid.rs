//! Sampled fields and the numerical operations on them: closed-form and
//! quadrature construction of the pair state, spectral free propagation,
//! slit conditioning by direct integration, and moment/width extraction.
//!
//! Everything here is deliberately independent of the analytic pipeline's
//! algebra: propagation is a momentum-space quadratic phase applied with
//! FFTs, conditioning is a literal integral over the slit coordinate, and
//! moments come from discrete quadrature. Agreement between this module and
//! the closed forms is the toolkit's ground truth.
//!
//! Conventions: samples live in natural spatial order, index `i` at
//! `y_i = (i - n/2)·step` with `step = 2·extent/n`; 2-D fields are row-major
//! with the particle-1 coordinate as the row index (`values[i1·n + i2]`).

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::OracleError;
use crate::quantities::{DiffractionScale, Length, MomentumSpread};
use crate::source::{initial_state, SourceSpec};

/// Fraction of the window (each side) treated as "edge" by the aliasing and
/// mass-capture guards.
const EDGE_BAND: f64 = 0.05;

/// Maximum probability-mass fraction tolerated in the edge band. Keeping the
/// band this clean bounds the total mass outside the window well below the
/// 1e-8 capture requirement.
const EDGE_MASS_LIMIT: f64 = 1e-9;

/// Narrow features must span at least this many grid steps (measured as the
/// feature's intensity standard deviation).
const MIN_STEPS_PER_SIGMA: f64 = 2.0;

/// Tolerated total-mass drift across one spectral propagation. The exact
/// operation is unitary; with cascade-summed masses the double-precision FFT
/// residue stays below 1e-13 even on the largest grids, so anything past
/// this bound is a real normalization bug.
pub const UNITARITY_DRIFT_BOUND: f64 = 1e-12;

/// Cascade (pairwise) sum of `|v|²`: rounding grows like log n rather than
/// n, keeping mass comparisons meaningful at the 1e-12 scale on multi-
/// million-sample grids.
fn norm_sqr_sum(values: &[Complex64]) -> f64 {
    if values.len() <= 64 {
        return values.iter().map(|v| v.norm_sqr()).sum();
    }
    let mid = values.len() / 2;
    norm_sqr_sum(&values[..mid]) + norm_sqr_sum(&values[mid..])
}

/// Window geometry: half-width and sample count per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridShape {
    pub extent: Length,
    pub n: usize,
}

impl GridShape {
    /// `extent` must be finite and positive; `n` a power of two, at least 64.
    pub fn new(extent: Length, n: usize) -> Result<Self, OracleError> {
        if !(extent.m().is_finite() && extent.m() > 0.0) {
            return Err(OracleError::GridMismatch(format!(
                "window extent must be finite and positive, got {} m",
                extent.m()
            )));
        }
        if n < 64 || !n.is_power_of_two() {
            return Err(OracleError::GridMismatch(format!(
                "sample count must be a power of two >= 64, got {n}"
            )));
        }
        Ok(GridShape { extent, n })
    }

    pub fn step(self) -> Length {
        self.extent * (2.0 / self.n as f64)
    }

    /// Coordinate of sample `i`.
    pub fn y(self, i: usize) -> Length {
        self.step() * (i as f64 - (self.n / 2) as f64)
    }

    /// Angular spatial frequency of FFT bin `j` (fftfreq layout).
    pub fn k(self, j: usize) -> f64 {
        let n = self.n;
        let df = std::f64::consts::TAU / (n as f64 * self.step().m());
        if j <= n / 2 {
            j as f64 * df
        } else {
            (j as f64 - n as f64) * df
        }
    }

    fn doubled_n(self) -> GridShape {
        GridShape {
            extent: self.extent,
            n: self.n * 2,
        }
    }

    fn doubled_both(self) -> GridShape {
        GridShape {
            extent: self.extent * 2.0,
            n: self.n * 2,
        }
    }

    /// The refinement probes used by the convergence harness: same window at
    /// twice the resolution, and twice the window at the same resolution.
    pub fn refinements(self) -> (GridShape, GridShape) {
        (self.doubled_n(), self.doubled_both())
    }

    /// Guard: a feature of intensity std-dev `sigma` must be resolved.
    pub fn require_resolved(self, sigma: Length) -> Result<(), OracleError> {
        let needed = sigma.m() / MIN_STEPS_PER_SIGMA;
        if sigma.m() < MIN_STEPS_PER_SIGMA * self.step().m() {
            return Err(OracleError::ResolutionTooCoarse {
                feature_m: sigma.m(),
                required_step_m: needed,
                step_m: self.step().m(),
            });
        }
        Ok(())
    }
}

/// A sampled one-dimensional complex field.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    shape: GridShape,
    pub values: Vec<Complex64>,
}

/// A sampled two-dimensional complex field over (y₁, y₂), row-major in y₁.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid2D {
    shape: GridShape,
    pub values: Vec<Complex64>,
}

/// Rotate by n/2: converts between natural spatial order and FFT order.
/// Self-inverse for even lengths.
fn swap_halves(v: &mut [Complex64]) {
    let half = v.len() / 2;
    let (a, b) = v.split_at_mut(half);
    a.swap_with_slice(b);
}

/// Apply the free-propagation kernel `exp(-i k² Λ L / 4)` along one line of
/// samples (in natural order; the FFT bookkeeping is internal).
fn propagate_line(
    line: &mut [Complex64],
    shape: GridShape,
    kernel: &[Complex64],
    fwd: &std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: &std::sync::Arc<dyn rustfft::Fft<f64>>,
    scratch: &mut [Complex64],
) {
    debug_assert_eq!(line.len(), shape.n);
    swap_halves(line);
    fwd.process_with_scratch(line, scratch);
    for (v, k) in line.iter_mut().zip(kernel) {
        *v *= k;
    }
    inv.process_with_scratch(line, scratch);
    let norm = 1.0 / shape.n as f64;
    for v in line.iter_mut() {
        *v *= norm;
    }
    swap_halves(line);
}

fn propagation_kernel(shape: GridShape, scale: DiffractionScale, l: Length) -> Vec<Complex64> {
    let lam_l = scale.reduced().m() * l.m();
    (0..shape.n)
        .map(|j| {
            let k = shape.k(j);
            Complex64::from_polar(1.0, -k * k * lam_l / 4.0)
        })
        .collect()
}

fn planner_pair(
    n: usize,
) -> (
    std::sync::Arc<dyn rustfft::Fft<f64>>,
    std::sync::Arc<dyn rustfft::Fft<f64>>,
) {
    let mut planner = FftPlanner::new();
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

impl Grid1D {
    pub fn from_fn(shape: GridShape, f: impl Fn(Length) -> Complex64) -> Grid1D {
        let values = (0..shape.n).map(|i| f(shape.y(i))).collect();
        Grid1D { shape, values }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    /// Discrete `∫|φ|² dy`.
    pub fn mass(&self) -> f64 {
        norm_sqr_sum(&self.values) * self.shape.step().m()
    }

    fn edge_mass_fraction(&self) -> f64 {
        let band = (self.shape.n as f64 * EDGE_BAND).ceil() as usize;
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let edge: f64 = self.values[..band]
            .iter()
            .chain(&self.values[self.shape.n - band..])
            .map(|v| v.norm_sqr())
            .sum();
        edge / total
    }

    /// Guard: the window must capture the field (negligible edge mass).
    pub fn check_window(&self) -> Result<(), OracleError> {
        let frac = self.edge_mass_fraction();
        if frac > EDGE_MASS_LIMIT {
            return Err(OracleError::ExtentTooSmall {
                extent_m: self.shape.extent.m(),
                n: self.shape.n,
                mass_outside: frac,
            });
        }
        Ok(())
    }

    /// Free propagation over `l` as a momentum-space quadratic phase.
    /// Checks window capture before and after (aliasing guard) and unitarity.
    pub fn spectral_propagate(
        &mut self,
        scale: DiffractionScale,
        l: Length,
    ) -> Result<(), OracleError> {
        self.check_window()?;
        let before = self.mass();
        let kernel = propagation_kernel(self.shape, scale, l);
        let (fwd, inv) = planner_pair(self.shape.n);
        let mut scratch = vec![Complex64::default(); fwd.get_inplace_scratch_len()];
        propagate_line(&mut self.values, self.shape, &kernel, &fwd, &inv, &mut scratch);
        let drift = (self.mass() / before - 1.0).abs();
        if drift > UNITARITY_DRIFT_BOUND {
            return Err(OracleError::NormDrift { drift });
        }
        self.check_window()
    }

    /// Position and momentum standard deviations by discrete quadrature and
    /// discrete Fourier moments.
    pub fn grid_moments(&self) -> Result<(Length, MomentumSpread), OracleError> {
        self.check_window()?;
        let step = self.shape.step().m();
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if !(total > 0.0) {
            return Err(OracleError::NotConverged {
                quantity: "grid moments (empty field)".into(),
                last_change: f64::NAN,
            });
        }
        let mean: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.shape.y(i).m() * v.norm_sqr())
            .sum::<f64>()
            / total;
        let var: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let d = self.shape.y(i).m() - mean;
                d * d * v.norm_sqr()
            })
            .sum::<f64>()
            / total;

        // Momentum side: FFT, then the same moments over the k bins.
        let mut spectrum = self.values.clone();
        swap_halves(&mut spectrum);
        let (fwd, _) = planner_pair(self.shape.n);
        let mut scratch = vec![Complex64::default(); fwd.get_inplace_scratch_len()];
        fwd.process_with_scratch(&mut spectrum, &mut scratch);
        let k_total: f64 = spectrum.iter().map(|v| v.norm_sqr()).sum();
        let band = (self.shape.n as f64 * EDGE_BAND).ceil() as usize;
        let k_edge: f64 = (0..self.shape.n)
            .filter(|&j| {
                let centered = (j + self.shape.n / 2) % self.shape.n;
                centered < band || centered >= self.shape.n - band
            })
            .map(|j| spectrum[j].norm_sqr())
            .sum();
        if k_edge / k_total > EDGE_MASS_LIMIT {
            // The spectrum leaks to the highest representable frequencies:
            // the step is too coarse for the field's finest oscillation.
            let sigma_k = (0..self.shape.n)
                .map(|j| self.shape.k(j).powi(2) * spectrum[j].norm_sqr())
                .sum::<f64>()
                / k_total;
            return Err(OracleError::ResolutionTooCoarse {
                feature_m: 1.0 / sigma_k.sqrt(),
                required_step_m: step / 2.0,
                step_m: step,
            });
        }
        let k_mean: f64 = (0..self.shape.n)
            .map(|j| self.shape.k(j) * spectrum[j].norm_sqr())
            .sum::<f64>()
            / k_total;
        let k_var: f64 = (0..self.shape.n)
            .map(|j| {
                let d = self.shape.k(j) - k_mean;
                d * d * spectrum[j].norm_sqr()
            })
            .sum::<f64>()
            / k_total;
        Ok((
            Length::from_m(var.sqrt()),
            MomentumSpread::from_per_hbar(k_var.sqrt()),
        ))
    }

    /// Least-squares fit of `log φ(y) = c₀ - y²/Γ` over the well-resolved
    /// band (`|φ| ≥ 0.2·max`), with the phase unwrapped outward from the
    /// peak. Returns the fitted complex `Γ` in m².
    pub fn gamma_fit(&self) -> Result<Complex64, OracleError> {
        let mags: Vec<f64> = self.values.iter().map(|v| v.norm()).collect();
        let (peak, &peak_mag) = mags
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let floor = 0.2 * peak_mag;
        let mut lo = peak;
        while lo > 0 && mags[lo - 1] >= floor {
            lo -= 1;
        }
        let mut hi = peak;
        while hi + 1 < mags.len() && mags[hi + 1] >= floor {
            hi += 1;
        }
        if hi - lo + 1 < 9 {
            return Err(OracleError::ResolutionTooCoarse {
                feature_m: self.shape.step().m() * (hi - lo + 1) as f64,
                required_step_m: self.shape.step().m() * (hi - lo + 1) as f64 / 9.0,
                step_m: self.shape.step().m(),
            });
        }

        // Unwrapped phase, walking outward from the peak in both directions.
        let mut phases = vec![0.0; self.values.len()];
        phases[peak] = self.values[peak].arg();
        for i in (peak + 1)..=hi {
            let raw = self.values[i].arg();
            let prev = phases[i - 1];
            phases[i] = raw + std::f64::consts::TAU * ((prev - raw) / std::f64::consts::TAU).round();
        }
        for i in (lo..peak).rev() {
            let raw = self.values[i].arg();
            let prev = phases[i + 1];
            phases[i] = raw + std::f64::consts::TAU * ((prev - raw) / std::f64::consts::TAU).round();
        }

        // Normal equations for g_i = c₀ + c₁·y_i² with complex observations.
        let (mut s0, mut s1, mut s2) = (0.0f64, 0.0f64, 0.0f64);
        let (mut b0, mut b1) = (Complex64::default(), Complex64::default());
        for i in lo..=hi {
            let x = self.shape.y(i).m().powi(2);
            let g = Complex64::new(mags[i].ln(), phases[i]);
            s0 += 1.0;
            s1 += x;
            s2 += x * x;
            b0 += g;
            b1 += g * x;
        }
        let det = s0 * s2 - s1 * s1;
        let c1 = (b1 * s0 - b0 * s1) / det;
        let gamma = -c1.inv();
        if !(gamma.re > 0.0 && gamma.re.is_finite() && gamma.im.is_finite()) {
            return Err(OracleError::NotConverged {
                quantity: format!("gamma fit produced a non-physical value {gamma}"),
                last_change: f64::NAN,
            });
        }
        Ok(gamma)
    }

    /// Full width at half maximum of `|φ|²`, by linear interpolation of the
    /// first half-max crossing on each side of the peak.
    pub fn intensity_fwhm(&self) -> Result<Length, OracleError> {
        let intensity: Vec<f64> = self.values.iter().map(|v| v.norm_sqr()).collect();
        let (peak, &peak_val) = intensity
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap();
        let half = peak_val / 2.0;
        let n = intensity.len();
        if peak == 0 || peak == n - 1 {
            return Err(OracleError::ExtentTooSmall {
                extent_m: self.shape.extent.m(),
                n,
                mass_outside: f64::NAN,
            });
        }
        let cross = |i0: usize, i1: usize| -> f64 {
            let (v0, v1) = (intensity[i0], intensity[i1]);
            let (y0, y1) = (self.shape.y(i0).m(), self.shape.y(i1).m());
            y0 + (half - v0) * (y1 - y0) / (v1 - v0)
        };
        let mut right = None;
        for i in peak..n - 1 {
            if intensity[i + 1] < half {
                right = Some(cross(i, i + 1));
                break;
            }
        }
        let mut left = None;
        for i in (1..=peak).rev() {
            if intensity[i - 1] < half {
                left = Some(cross(i, i - 1));
                break;
            }
        }
        match (left, right) {
            (Some(l), Some(r)) => Ok(Length::from_m(r - l)),
            _ => Err(OracleError::ExtentTooSmall {
                extent_m: self.shape.extent.m(),
                n,
                mass_outside: f64::NAN,
            }),
        }
    }
}

/// Which particle axes a 2-D propagation step acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Particles {
    One,
    Two,
    Both,
}

/// The sampled initial pair state together with its construction self-check.
#[derive(Debug, Clone)]
pub struct PairSamples {
    pub field: Grid2D,
    /// Maximum pointwise relative deviation between the direct
    /// momentum-quadrature construction and the closed form, over the
    /// central-mass region. The two agreeing is itself a validation of the
    /// closed-form pair state.
    pub quadrature_deviation: f64,
}

/// Sample the initial pair state on a 2-D grid, twice: by the closed-form
/// expression and by direct quadrature over the relative momentum. The
/// returned field holds the closed-form samples; the deviation between the
/// constructions is reported alongside.
pub fn sample_initial_pair(
    src: SourceSpec,
    shape: GridShape,
) -> Result<PairSamples, OracleError> {
    // Narrowest feature: the relative-coordinate correlation, intensity
    // sigma lc/2.
    shape.require_resolved(src.correlation_length() * 0.5)?;

    let pair = initial_state(src);
    let n = shape.n;
    let mut values = vec![Complex64::default(); n * n];
    for i1 in 0..n {
        let y1 = shape.y(i1);
        for (i2, v) in values[i1 * n..(i1 + 1) * n].iter_mut().enumerate() {
            *v = pair.amplitude(y1, shape.y(i2));
        }
    }
    let field = Grid2D { shape, values };
    field.check_window()?;

    // Independent construction: the relative part as a quadrature over its
    // momentum representation, exp(-Δ²/ℓc²) = (ℓc/2√π)·∫ e^{-k²ℓc²/4} e^{ikΔ} dk.
    // On a uniform grid Δ takes only 2n-1 distinct values.
    let lc = src.correlation_length().m();
    let step = shape.step().m();
    let k_max = 12.2 / lc; // integrand weight below 1e-16 beyond this
    let dk = std::f64::consts::TAU / (8.0 * shape.extent.m()); // periodization images far outside the window
    let nk = ((2.0 * k_max / dk).ceil() as usize).max(16) | 1; // odd, symmetric about 0
    let mut rel_by_delta = vec![Complex64::default(); 2 * n - 1];
    let prefactor = lc / (2.0 * std::f64::consts::PI.sqrt());
    for (d, out) in rel_by_delta.iter_mut().enumerate() {
        let delta = (d as f64 - (n as f64 - 1.0)) * step;
        let mut acc = Complex64::default();
        for jk in 0..nk {
            let k = -k_max + (2.0 * k_max) * jk as f64 / (nk - 1) as f64;
            let w = if jk == 0 || jk == nk - 1 { 0.5 } else { 1.0 };
            acc += w * (-k * k * lc * lc / 4.0).exp() * Complex64::from_polar(1.0, k * delta);
        }
        *out = acc * (2.0 * k_max / (nk - 1) as f64) * prefactor;
    }

    // Compare on the central-mass region (within a factor 1e-3 of the peak
    // intensity, which captures well over 99% of the mass).
    let peak = field
        .values
        .iter()
        .map(|v| v.norm_sqr())
        .fold(0.0f64, f64::max);
    let floor = (1e-3 * peak).sqrt();
    let mut worst = 0.0f64;
    for i1 in 0..n {
        let y1 = shape.y(i1);
        for i2 in 0..n {
            let closed = field.values[i1 * n + i2];
            if closed.norm() < floor {
                continue;
            }
            let com = pair.amplitude(y1, shape.y(i2))
                / pair_rel_factor(pair.d_rel().re().m2(), y1.m() - shape.y(i2).m());
            let quad = rel_by_delta[i1 + (n - 1) - i2] * com;
            let dev = (quad - closed).norm() / closed.norm();
            worst = worst.max(dev);
        }
    }
    Ok(PairSamples {
        field,
        quadrature_deviation: worst,
    })
}

/// The closed-form relative factor exp(-Δ²/ℓc²) at distance zero.
fn pair_rel_factor(lc2: f64, delta: f64) -> Complex64 {
    Complex64::new((-delta * delta / lc2).exp(), 0.0)
}

impl Grid2D {
    pub fn from_fn(shape: GridShape, f: impl Fn(Length, Length) -> Complex64) -> Grid2D {
        let n = shape.n;
        let mut values = vec![Complex64::default(); n * n];
        for i1 in 0..n {
            let y1 = shape.y(i1);
            for (i2, v) in values[i1 * n..(i1 + 1) * n].iter_mut().enumerate() {
                *v = f(y1, shape.y(i2));
            }
        }
        Grid2D { shape, values }
    }

    pub fn shape(&self) -> GridShape {
        self.shape
    }

    /// Discrete `∬|ψ|² dy₁ dy₂`.
    pub fn mass(&self) -> f64 {
        let step = self.shape.step().m();
        norm_sqr_sum(&self.values) * step * step
    }

    fn edge_mass_fraction(&self) -> f64 {
        let n = self.shape.n;
        let band = (n as f64 * EDGE_BAND).ceil() as usize;
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0;
        for i1 in 0..n {
            let row_is_edge = i1 < band || i1 >= n - band;
            let row = &self.values[i1 * n..(i1 + 1) * n];
            if row_is_edge {
                edge += row.iter().map(|v| v.norm_sqr()).sum::<f64>();
            } else {
                edge += row[..band].iter().map(|v| v.norm_sqr()).sum::<f64>();
                edge += row[n - band..].iter().map(|v| v.norm_sqr()).sum::<f64>();
            }
        }
        edge / total
    }

    /// Guard: the window must capture the field (negligible edge mass).
    pub fn check_window(&self) -> Result<(), OracleError> {
        let frac = self.edge_mass_fraction();
        if frac > EDGE_MASS_LIMIT {
            return Err(OracleError::ExtentTooSmall {
                extent_m: self.shape.extent.m(),
                n: self.shape.n,
                mass_outside: frac,
            });
        }
        Ok(())
    }

    fn transpose(&mut self) {
        let n = self.shape.n;
        for i in 0..n {
            for j in (i + 1)..n {
                self.values.swap(i * n + j, j * n + i);
            }
        }
    }

    fn propagate_rows(&mut self, kernel: &[Complex64]) {
        use rayon::prelude::*;
        let shape = self.shape;
        let (fwd, inv) = planner_pair(shape.n);
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        self.values
            .par_chunks_mut(shape.n)
            .for_each_init(
                || vec![Complex64::default(); scratch_len],
                |scratch, row| propagate_line(row, shape, kernel, &fwd, &inv, scratch),
            );
    }

    /// Free propagation of the selected particle axes over `l`, as a
    /// momentum-space quadratic phase per axis. Unitary; guards window
    /// capture before and after.
    pub fn spectral_propagate(
        &mut self,
        scale: DiffractionScale,
        l: Length,
        particles: Particles,
    ) -> Result<(), OracleError> {
        self.check_window()?;
        let before = self.mass();
        let kernel = propagation_kernel(self.shape, scale, l);
        if matches!(particles, Particles::Two | Particles::Both) {
            self.propagate_rows(&kernel);
        }
        if matches!(particles, Particles::One | Particles::Both) {
            self.transpose();
            self.propagate_rows(&kernel);
            self.transpose();
        }
        let drift = (self.mass() / before - 1.0).abs();
        if drift > UNITARITY_DRIFT_BOUND {
            return Err(OracleError::NormDrift { drift });
        }
        self.check_window()
    }

    /// Marginal intensity along the particle-2 axis, `∫ |ψ(y₁, ·)|² dy₁`,
    /// packaged as a real 1-D field (amplitudes are square roots).
    pub fn marginal_particle2(&self) -> Grid1D {
        let n = self.shape.n;
        let step = self.shape.step().m();
        let mut intensity = vec![0.0f64; n];
        for i1 in 0..n {
            for (i2, v) in self.values[i1 * n..(i1 + 1) * n].iter().enumerate() {
                intensity[i2] += v.norm_sqr() * step;
            }
        }
        Grid1D {
            shape: self.shape,
            values: intensity
                .iter()
                .map(|&p| Complex64::new(p.sqrt(), 0.0))
                .collect(),
        }
    }

    /// Momentum standard deviation of particle 2's marginal,
    /// `ρ(k₂) = ∫ dy₁ |ψ̃(y₁, k₂)|²` — tracing out particle 1 in the position
    /// basis is exact because the trace is basis-independent.
    pub fn momentum_sigma_particle2(&self) -> Result<MomentumSpread, OracleError> {
        self.check_window()?;
        let n = self.shape.n;
        let (fwd, _) = planner_pair(n);
        let mut scratch = vec![Complex64::default(); fwd.get_inplace_scratch_len()];
        let mut row = vec![Complex64::default(); n];
        let mut rho = vec![0.0f64; n];
        for i1 in 0..n {
            row.copy_from_slice(&self.values[i1 * n..(i1 + 1) * n]);
            swap_halves(&mut row);
            fwd.process_with_scratch(&mut row, &mut scratch);
            for (acc, v) in rho.iter_mut().zip(&row) {
                *acc += v.norm_sqr();
            }
        }
        let total: f64 = rho.iter().sum();
        let band = (n as f64 * EDGE_BAND).ceil() as usize;
        let edge: f64 = (0..n)
            .filter(|&j| {
                let centered = (j + n / 2) % n;
                centered < band || centered >= n - band
            })
            .map(|j| rho[j])
            .sum();
        if edge / total > EDGE_MASS_LIMIT {
            let step = self.shape.step().m();
            return Err(OracleError::ResolutionTooCoarse {
                feature_m: step * 2.0,
                required_step_m: step / 2.0,
                step_m: step,
            });
        }
        let mean: f64 = (0..n).map(|j| self.shape.k(j) * rho[j]).sum::<f64>() / total;
        let var: f64 = (0..n)
            .map(|j| {
                let d = self.shape.k(j) - mean;
                d * d * rho[j]
            })
            .sum::<f64>()
            / total;
        Ok(MomentumSpread::from_per_hbar(var.sqrt()))
    }

    /// Condition on a sampled slit state: `φ₂(y₂) = ∫ t*(y₁) ψ(y₁,y₂) dy₁`.
    /// The slit samples must share this grid's axis geometry.
    pub fn quadrature_condition(&self, slit: &Grid1D) -> Result<Grid1D, OracleError> {
        if slit.shape != self.shape {
            return Err(OracleError::GridMismatch(format!(
                "slit grid (extent {} m, n = {}) does not match pair grid (extent {} m, n = {})",
                slit.shape.extent.m(),
                slit.shape.n,
                self.shape.extent.m(),
                self.shape.n
            )));
        }
        // δ-like slit guard: the sampled |t|² must itself be resolved.
        let slit_mass: f64 = slit.values.iter().map(|v| v.norm_sqr()).sum();
        if !(slit_mass > 0.0) {
            return Err(OracleError::GridMismatch(
                "slit samples are identically zero".into(),
            ));
        }
        let mean: f64 = slit
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| self.shape.y(i).m() * v.norm_sqr())
            .sum::<f64>()
            / slit_mass;
        let sigma: f64 = (slit
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| (self.shape.y(i).m() - mean).powi(2) * v.norm_sqr())
            .sum::<f64>()
            / slit_mass)
            .sqrt();
        self.shape.require_resolved(Length::from_m(sigma))?;

        let n = self.shape.n;
        let step = self.shape.step().m();
        let mut out = vec![Complex64::default(); n];
        // Fixed row order keeps the summation deterministic.
        for i1 in 0..n {
            let weight = slit.values[i1].conj() * step;
            for (i2, v) in self.values[i1 * n..(i1 + 1) * n].iter().enumerate() {
                out[i2] += weight * v;
            }
        }
        Ok(Grid1D {
            shape: self.shape,
            values: out,
        })
    }

    /// Condition on a hard rectangular aperture of the given full width.
    /// Edge cells carry fractional weights (their overlap with the aperture),
    /// which removes the first-order width-quantization error.
    pub fn rect_slit_condition(&self, full_width: Length) -> Result<Grid1D, OracleError> {
        let step = self.shape.step().m();
        let a = full_width.m();
        if !(a.is_finite() && a > 0.0) {
            return Err(OracleError::GridMismatch(format!(
                "rectangular slit width must be finite and positive, got {a} m"
            )));
        }
        // Resolution guard in the same σ units as the Gaussian slits:
        // a rect of full width a has intensity σ = a/√12.
        self.shape
            .require_resolved(Length::from_m(a / 12.0f64.sqrt()))?;

        let n = self.shape.n;
        let mut out = vec![Complex64::default(); n];
        for i1 in 0..n {
            let y = self.shape.y(i1).m();
            let cell_lo = y - step / 2.0;
            let cell_hi = y + step / 2.0;
            let overlap = (cell_hi.min(a / 2.0) - cell_lo.max(-a / 2.0)).max(0.0);
            if overlap == 0.0 {
                continue;
            }
            let weight = overlap; // fraction × step
            for (i2, v) in self.values[i1 * n..(i1 + 1) * n].iter().enumerate() {
                out[i2] += weight * v;
            }
        }
        Ok(Grid1D {
            shape: self.shape,
            values: out,
        })
    }
}
