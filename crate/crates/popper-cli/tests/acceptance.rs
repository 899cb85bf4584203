//! Acceptance gate: the ten release criteria, one test and one printed
//! verdict line each (run with `--nocapture` to see the lines).
//!
//! Criteria 1–9 drive the library directly; criterion 10 drives the
//! installed binary.

use std::process::Command;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use popper_core::app::{cmd_fit, cmd_sweep, Preset};
use popper_core::optics::{
    condition_on_slit, conditioned_packet_at, free_propagate, lens_transform, OpticalElement,
    SlitSpec,
};
use popper_core::oracle::{sample_initial_pair, Grid1D, Grid2D, GridShape, Particles};
use popper_core::pattern::{
    fit_correlation_length, invert_width, pattern_width, WidthConvention,
};
use popper_core::quantities::{
    packet_intensity_width, packet_momentum_sigma, Area, DiffractionScale, GaussianPacket, Length,
};
use popper_core::source::{
    beam_width, evolve_pair, initial_momentum_spread, initial_state, marginal_momentum_spread,
    marginal_position_sigma, SourceSpec,
};

fn pass(n: usize, detail: &str) {
    println!("PASS criterion {n:02} — {detail}");
}

fn rel(measured: f64, expected: f64) -> f64 {
    (measured - expected).abs() / expected.abs()
}

fn photon_702() -> DiffractionScale {
    DiffractionScale::photon(Length::from_nm(702.0)).unwrap()
}

/// Window sized like the oracle suite sizes its own: eight times the widest
/// analytic feature.
fn window(widths: &[Length], n: usize) -> GridShape {
    let extent = widths.iter().map(|w| w.m()).fold(0.0, f64::max) * 8.0;
    GridShape::new(Length::from_m(extent), n).unwrap()
}

#[test]
fn criterion_01_bare_bench_inversion_recovers_the_published_waist() {
    // Observed 0.657 mm FWHM read back through the no-lens geometry
    // (virtual distance 2 m): the small root must give √x = 0.632 mm ± 2%.
    let (small, _) = invert_width(
        Length::from_mm(0.657),
        Length::from_m(2.0),
        photon_702(),
        WidthConvention::reproduction(),
    )
    .unwrap();
    let sqrt_x = small.sqrt().mm();
    assert!(
        rel(sqrt_x, 0.632) <= 0.02,
        "√x = {sqrt_x} mm, want 0.632 mm ± 2%"
    );
    pass(
        1,
        &format!("0.657 mm at 2 m inverts to √x = {sqrt_x:.4} mm (0.632 mm ± 2%)"),
    );
}

#[test]
fn criterion_02_lens_bench_fit_recovers_the_correlation_area() {
    // On the lens bench the effective distance lands in [0.9, 1.1] m and the
    // small root of the same 0.657 mm observation gives √x = 0.236 mm ± 5%,
    // from which ℓc² = x - ε² = 0.049 mm² ± 20% with ε = 0.08 mm.
    let fit = cmd_fit(&Preset::KimShih.scenario(), Length::from_mm(0.657)).unwrap();
    let d = fit.d_eff.m();
    assert!((0.9..=1.1).contains(&d), "d_eff = {d} m outside [0.9, 1.1]");
    assert!(rel(fit.epsilon.mm(), 0.08) < 1e-12);

    let paper = fit.paper.as_ref().expect("reproduction branch inverts");
    let sqrt_x = paper.x_small.sqrt().mm();
    assert!(
        rel(sqrt_x, 0.236) <= 0.05,
        "√x_small = {sqrt_x} mm, want 0.236 mm ± 5%"
    );
    let lc2 = fit_correlation_length(paper.x_small, fit.epsilon)
        .unwrap()
        .mm2();
    assert!(
        rel(lc2, 0.049) <= 0.20,
        "ℓc² = {lc2} mm², want 0.049 mm² ± 20%"
    );
    pass(
        2,
        &format!(
            "at d_eff = {d:.2} m: √x = {sqrt_x:.4} mm (0.236 ± 5%), ℓc² = {lc2:.4} mm² (0.049 ± 20%)"
        ),
    );
}

#[test]
fn criterion_03_bare_slit_diffraction_matches_the_published_scale() {
    // The slit alone (x = ε², no pair correlation) at the same geometry must
    // produce the published ~2 mm pattern within 10%.
    let stats = pattern_width(
        Length::from_mm(0.08).sq(),
        Length::from_m(0.97),
        photon_702(),
        WidthConvention::reproduction(),
    )
    .unwrap();
    let fwhm = stats.fwhm_paper.mm();
    assert!(rel(fwhm, 2.0) <= 0.10, "fwhm = {fwhm} mm, want 2 mm ± 10%");
    pass(
        3,
        &format!("ε = 0.08 mm alone at 0.97 m gives FWHM = {fwhm:.4} mm (2 mm ± 10%)"),
    );
}

#[test]
fn criterion_04_ghost_plane_is_chirp_free_at_the_slit_floor() {
    // At L = 2f - b₁ the lens-bench conditioned packet must be a real waist
    // (|Im Γ| < 1e-12·|Γ|) of width exactly √(ε² + ℓc²).
    let sc = Preset::KimShih.scenario();
    let l_star = Length::from_m(0.5 * 2.0 - 0.485);
    let packet = conditioned_packet_at(sc.source, &sc.arm1, l_star).unwrap();

    let gamma = packet.gamma();
    assert!(gamma.im().m2().abs() < 1e-12 * gamma.norm().m2());

    let floor = Length::from_mm(0.08).sq().m2() + sc.source.correlation_length().sq().m2();
    assert_eq!(gamma.re().m2(), floor, "waist parameter is the slit floor");
    let width = packet_intensity_width(packet).m();
    assert!(rel(width, floor.sqrt()) < 1e-14);
    pass(
        4,
        &format!(
            "at L = {} m: |Im Γ|/|Γ| = {:.1e}, width = √(ε² + ℓc²) = {:.4} mm",
            l_star.m(),
            gamma.im().m2().abs() / gamma.norm().m2(),
            width * 1e3
        ),
    );
}

#[test]
fn criterion_05_two_f_imaging_round_trip_is_exact() {
    // waist → 2f → lens(f) → 2f must reproduce Γ = σ₀² to 1e-12.
    let scale = photon_702();
    let waist = Length::from_mm(0.3).sq();
    let f = Length::from_m(0.5);
    let p = GaussianPacket::at_waist(waist).unwrap();
    let p = free_propagate(p, f * 2.0, scale).unwrap();
    let p = lens_transform(p, f, scale).unwrap();
    let p = free_propagate(p, f * 2.0, scale).unwrap();

    let dev_re = rel(p.gamma().re().m2(), waist.m2());
    let dev_im = p.gamma().im().m2().abs() / waist.m2();
    assert!(dev_re <= 1e-12, "Re Γ deviates by {dev_re:.3e}");
    assert!(dev_im <= 1e-12, "residual chirp {dev_im:.3e}");
    pass(
        5,
        &format!("2f–2f round trip returns Γ = σ₀² (Re dev {dev_re:.1e}, chirp {dev_im:.1e})"),
    );
}

#[test]
fn criterion_06_wide_pump_detector_packet_is_a_virtual_slit() {
    // No lens, Ω ≫ ε, ℓc: the detector-plane packet must equal a Gaussian
    // slit of width √(ε² + ℓc²) freely propagated over 2L₁ + L₂, to 1e-12.
    let scale = photon_702();
    let lc = Area::from_mm2(0.049).sqrt();
    let eps = Length::from_mm(0.08);
    let src = SourceSpec::new(lc, Length::INFINITY, scale).unwrap();
    let l1 = Length::from_m(0.515);
    let l_det = Length::from_m(1.485);

    let arm1 = [
        OpticalElement::FreeSpace(l1),
        OpticalElement::Slit(SlitSpec::from_epsilon(eps).unwrap()),
    ];
    let pipeline = conditioned_packet_at(src, &arm1, l_det).unwrap().gamma().c();

    let virtual_slit = GaussianPacket::at_waist(eps.sq() + lc.sq()).unwrap();
    let reference = free_propagate(virtual_slit, l1 + l_det, scale)
        .unwrap()
        .gamma()
        .c();

    let dev = (pipeline - reference).norm() / reference.norm();
    assert!(dev <= 1e-12, "Γ deviation {dev:.3e}");
    pass(
        6,
        &format!("virtual-slit theorem holds at the detector to {dev:.1e} (bound 1e-12)"),
    );
}

#[test]
fn criterion_07_conditioning_bounds_hold_over_random_benches() {
    // ≥ 1000 random (ε, ℓc, Ω, L₁) draws: the conditioned momentum spread
    // never exceeds the source's, and the conditioned pattern never exceeds
    // the unconditioned beam at the detector.
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_7007);
    let scale = photon_702();
    let draws = 1200;
    for _ in 0..draws {
        let eps = Length::from_mm(rng.gen_range(0.01..0.5));
        let lc = Length::from_mm(rng.gen_range(0.01..0.5));
        let omega = Length::from_mm(rng.gen_range(0.05..20.0));
        let l1 = Length::from_m(rng.gen_range(0.0..2.0));
        let l_det = Length::from_m(rng.gen_range(0.0..2.0));

        let src = SourceSpec::new(lc, omega, scale).unwrap();
        let arm1 = [
            OpticalElement::FreeSpace(l1),
            OpticalElement::Slit(SlitSpec::from_epsilon(eps).unwrap()),
        ];
        let packet = conditioned_packet_at(src, &arm1, l_det).unwrap();

        let dp_cond = packet_momentum_sigma(packet).per_hbar();
        let dp_init = initial_momentum_spread(src).per_hbar();
        assert!(
            dp_cond <= dp_init * (1.0 + 1e-12),
            "momentum bound violated: {dp_cond} > {dp_init}"
        );

        let beam = beam_width(evolve_pair(initial_state(src), l_det).unwrap()).m();
        let pattern = packet_intensity_width(packet).m();
        assert!(
            pattern <= beam * (1.0 + 1e-12),
            "width bound violated: {pattern} > {beam}"
        );
    }
    pass(
        7,
        &format!("momentum and width bounds held on all {draws} random draws"),
    );
}

#[test]
fn criterion_08_closed_forms_agree_with_the_grid_oracle() {
    let scale = photon_702();

    // (a) Conditioning formula vs literal slit-coordinate quadrature at ten
    //     random parameter points, rel err < 1e-8.
    let mut rng = ChaCha8Rng::seed_from_u64(0xacce_0008);
    let mut worst_gamma = 0.0f64;
    for _ in 0..10 {
        let eps = Length::from_mm(rng.gen_range(0.15..0.3));
        let lc = Length::from_mm(rng.gen_range(0.15..0.3));
        let omega = Length::from_mm(rng.gen_range(0.5..1.2));
        let l1 = Length::from_m(rng.gen_range(0.0..0.6));
        let src = SourceSpec::new(lc, omega, scale).unwrap();
        let slit = SlitSpec::from_epsilon(eps).unwrap();

        let gamma_ref = condition_on_slit(evolve_pair(initial_state(src), l1).unwrap(), slit)
            .unwrap()
            .gamma()
            .c();

        let shape = window(
            &[
                marginal_position_sigma(initial_state(src)),
                marginal_position_sigma(evolve_pair(initial_state(src), l1).unwrap()),
            ],
            1024,
        );
        let mut field = sample_initial_pair(src, shape).unwrap().field;
        field.spectral_propagate(scale, l1, Particles::Both).unwrap();
        let e2 = eps.sq().m2();
        let slit_grid = Grid1D::from_fn(shape, |y| {
            Complex64::new((-y.m() * y.m() / e2).exp(), 0.0)
        });
        let fitted = field
            .quadrature_condition(&slit_grid)
            .unwrap()
            .gamma_fit()
            .unwrap();
        worst_gamma = worst_gamma.max((fitted - gamma_ref).norm() / gamma_ref.norm());
    }
    assert!(worst_gamma < 1e-8, "worst Γ deviation {worst_gamma:.3e}");

    // (b) Closed-form pair evolution vs spectral propagation, pointwise on
    //     the central 90% of the mass, rel err < 1e-6.
    let src = SourceSpec::new(Length::from_mm(0.2), Length::from_mm(0.8), scale).unwrap();
    let l = Length::from_m(0.7);
    let evolved = evolve_pair(initial_state(src), l).unwrap();
    let shape = window(
        &[
            marginal_position_sigma(initial_state(src)),
            marginal_position_sigma(evolved),
        ],
        1024,
    );
    let mut field = sample_initial_pair(src, shape).unwrap().field;
    field.spectral_propagate(scale, l, Particles::Both).unwrap();
    let reference = Grid2D::from_fn(shape, |y1, y2| evolved.amplitude(y1, y2));

    let num: Complex64 = reference
        .values
        .iter()
        .zip(&field.values)
        .map(|(r, v)| r.conj() * v)
        .sum();
    let den: f64 = reference.values.iter().map(|r| r.norm_sqr()).sum();
    let alpha = num / den;
    let peak2 = reference
        .values
        .iter()
        .map(|r| r.norm_sqr())
        .fold(0.0, f64::max);
    // Intensity ≥ 10% of peak: for a Gaussian this region carries exactly
    // 90% of the mass (verified below on the samples themselves).
    let floor2 = 0.1 * peak2;
    let total: f64 = den;
    let mut mask_mass = 0.0f64;
    let mut worst_point = 0.0f64;
    for (r, v) in reference.values.iter().zip(&field.values) {
        if r.norm_sqr() < floor2 {
            continue;
        }
        mask_mass += r.norm_sqr();
        let expected = alpha * r;
        worst_point = worst_point.max((v - expected).norm() / expected.norm());
    }
    assert!(
        mask_mass / total >= 0.89,
        "mask holds only {:.3} of the mass",
        mask_mass / total
    );
    assert!(worst_point < 1e-6, "worst pointwise deviation {worst_point:.3e}");

    // (c) Marginal momentum spread vs discrete Fourier moments of the
    //     sampled pair, before and after evolution, rel err < 1e-8.
    let mut worst_dp = 0.0f64;
    for l in [Length::ZERO, Length::from_m(0.5)] {
        let evolved = evolve_pair(initial_state(src), l).unwrap();
        let sigma = marginal_position_sigma(evolved)
            .m()
            .max(marginal_position_sigma(initial_state(src)).m());
        let shape = GridShape::new(Length::from_m(sigma * 12.0), 2048).unwrap();
        let mut field = sample_initial_pair(src, shape).unwrap().field;
        field.spectral_propagate(scale, l, Particles::Both).unwrap();
        let numeric = field.momentum_sigma_particle2().unwrap().per_hbar();
        let analytic = marginal_momentum_spread(evolved).per_hbar();
        worst_dp = worst_dp.max(rel(numeric, analytic));
    }
    assert!(worst_dp < 1e-8, "worst Δp deviation {worst_dp:.3e}");

    pass(
        8,
        &format!(
            "oracle agreement: Γ {worst_gamma:.1e} (< 1e-8), evolution {worst_point:.1e} \
             (< 1e-6 on ≥ 90% mass), Δp {worst_dp:.1e} (< 1e-8)"
        ),
    );
}

#[test]
fn criterion_09_sweep_dips_once_and_matches_the_closed_form_minimum() {
    // Width-vs-slit sweep on the sweep bench: strictly decreasing then
    // strictly increasing, divergent toward zero width, with the closed-form
    // minimum within 1% of a dense scan's.
    let sc = Preset::Strekalov.scenario();
    let widths: Vec<Length> = (4..=400).map(|i| Length::from_mm(i as f64 * 0.005)).collect();
    let out = cmd_sweep(&sc, &widths).unwrap();
    assert!(rel(out.d_eff.m(), 1.8) < 1e-12);

    let curve: Vec<f64> = out.points.iter().map(|p| p.fwhm_paper.m()).collect();
    let (argmin, _) = curve
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    assert!(argmin > 0 && argmin < curve.len() - 1, "minimum not interior");
    for i in 1..curve.len() {
        if i <= argmin {
            assert!(curve[i] < curve[i - 1], "not strictly decreasing at {i}");
        } else {
            assert!(curve[i] > curve[i - 1], "not strictly increasing at {i}");
        }
    }
    let divergence = curve[0] / curve[argmin];
    assert!(divergence > 10.0, "no divergence toward zero width");

    let dense_min = out.points[argmin].full_width.mm();
    let closed_min = out.minimum_full_width.expect("interior minimum").mm();
    assert!(
        rel(dense_min, closed_min) <= 0.01,
        "dense scan min {dense_min} mm vs closed form {closed_min} mm"
    );
    pass(
        9,
        &format!(
            "single dip at {closed_min:.4} mm (dense scan {dense_min:.4} mm), \
             {divergence:.0}× divergence toward zero width"
        ),
    );
}

#[test]
fn criterion_10_csv_payloads_are_byte_identical_across_runs() {
    let commands: &[&[&str]] = &[
        &["simulate", "kim-shih"],
        &["fit", "popper-nolens", "--fwhm", "0.657"],
        &["sweep", "strekalov", "--widths", "0.05:1.5:0.05"],
    ];
    for args in commands {
        let run = || {
            let out = Command::new(env!("CARGO_BIN_EXE_popper"))
                .args(*args)
                .output()
                .expect("binary spawns");
            assert!(out.status.success(), "{args:?} failed");
            out.stdout
        };
        assert_eq!(run(), run(), "{args:?} output drifted between runs");
    }
    pass(10, "simulate/fit/sweep CSV byte-identical across repeated runs");
}
