//! Rendering: deterministic CSV/JSON payloads (stdout) and human-readable
//! tables (stderr).
//!
//! Every CSV column carries its unit in the header; numbers are printed with
//! `{:.11e}` (12 significant digits) so repeated runs are byte-identical and
//! diffs are meaningful. Inapplicable cells are left empty rather than
//! zeroed.

use std::fmt::Write as _;

use crate::quantities::{Area, Length};

use super::commands::{FitBranch, FitOutput, OracleOutput, SimulateOutput, SweepOutput};

/// Fixed 12-significant-digit scientific form used for all CSV numerics.
pub fn sci12(x: f64) -> String {
    format!("{x:.11e}")
}

fn mm(l: Length) -> String {
    sci12(l.mm())
}

fn mm2(a: Area) -> String {
    sci12(a.mm2())
}

fn pass_fail(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Assemble a CSV payload (trailing newline included).
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        let escaped: Vec<String> = row.iter().map(|f| csv_field(f)).collect();
        out.push_str(&escaped.join(","));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

pub fn simulate_csv(out: &SimulateOutput) -> String {
    let header = [
        "label",
        "mode",
        "re_gamma_mm2",
        "im_gamma_mm2",
        "x_mm2",
        "d_eff_m",
        "w_mm",
        "fwhm_paper_mm",
        "fwhm_exact_mm",
        "beam_width_mm",
        "ghost_plane_m",
        "dp_initial_per_hbar_inv_m",
        "dp_conditioned_per_hbar_inv_m",
        "width_bound",
        "momentum_bound",
    ];
    let row = vec![
        out.label.clone(),
        if out.conditioned {
            "conditioned".to_string()
        } else {
            "unconditioned".to_string()
        },
        out.gamma.map(|g| mm2(g.re())).unwrap_or_default(),
        out.gamma.map(|g| mm2(g.im())).unwrap_or_default(),
        out.stats.map(|s| mm2(s.x)).unwrap_or_default(),
        out.stats.map(|s| sci12(s.d_eff.m())).unwrap_or_default(),
        mm(out.w),
        mm(out.fwhm_paper),
        mm(out.fwhm_exact),
        mm(out.beam_width),
        out.ghost_plane.map(|g| sci12(g.m())).unwrap_or_default(),
        sci12(out.dp_initial_per_hbar),
        out.dp_conditioned_per_hbar.map(sci12).unwrap_or_default(),
        pass_fail(out.width_bound_ok),
        pass_fail(out.momentum_bound_ok),
    ];
    csv(&header, &[row])
}

pub fn simulate_table(out: &SimulateOutput) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "scenario          : {}", out.label);
    let _ = writeln!(
        t,
        "mode              : {}",
        if out.conditioned {
            "conditioned (finite slit)"
        } else {
            "unconditioned (wide-open slit)"
        }
    );
    if let Some(g) = out.gamma {
        let _ = writeln!(
            t,
            "gamma at detector : {:.6e} + {:.6e}i mm^2",
            g.re().mm2(),
            g.im().mm2()
        );
    }
    if let Some(s) = out.stats {
        let _ = writeln!(t, "waist parameter x : {:.6e} mm^2", s.x.mm2());
        let _ = writeln!(t, "effective distance: {:.6e} m", s.d_eff.m());
    }
    let _ = writeln!(t, "width W           : {:.6e} mm", out.w.mm());
    let _ = writeln!(
        t,
        "FWHM              : {:.6e} mm (ln2 convention) | {:.6e} mm (half-max)",
        out.fwhm_paper.mm(),
        out.fwhm_exact.mm()
    );
    let _ = writeln!(t, "beam width        : {:.6e} mm", out.beam_width.mm());
    if let Some(g) = out.ghost_plane {
        let _ = writeln!(t, "ghost plane       : {:.6e} m past the source", g.m());
    }
    let _ = writeln!(
        t,
        "momentum spread   : initial {:.6e} /m | conditioned {} (units of hbar)",
        out.dp_initial_per_hbar,
        out.dp_conditioned_per_hbar
            .map(|v| format!("{v:.6e} /m"))
            .unwrap_or_else(|| "-".to_string()),
    );
    let _ = writeln!(
        t,
        "invariants        : width<=beam {} | momentum not widened {}",
        pass_fail(out.width_bound_ok),
        pass_fail(out.momentum_bound_ok)
    );
    t
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

fn fit_row(
    out: &FitOutput,
    convention: &str,
    branch: &Result<FitBranch, crate::error::PhysicsError>,
) -> Vec<String> {
    let mut row = vec![
        out.label.clone(),
        convention.to_string(),
        mm(out.fwhm_obs),
        sci12(out.d_eff.m()),
        mm(out.epsilon),
    ];
    match branch {
        Ok(b) => {
            let (lc2, lc, lc_err) = match &b.lc2 {
                Ok(a) => (mm2(*a), sci12(a.sqrt().mm()), String::new()),
                Err(e) => (String::new(), String::new(), e.to_string()),
            };
            row.extend([
                mm(b.w),
                mm2(b.x_small),
                mm2(b.x_large),
                mm2(b.x_selected),
                lc2,
                lc,
                sci12(b.residual_rel),
                lc_err,
            ]);
        }
        Err(e) => {
            row.extend(std::iter::repeat_n(String::new(), 7));
            row.push(e.to_string());
        }
    }
    row
}

pub fn fit_csv(out: &FitOutput) -> String {
    let header = [
        "label",
        "convention",
        "fwhm_obs_mm",
        "d_eff_m",
        "epsilon_mm",
        "w_mm",
        "x_small_mm2",
        "x_large_mm2",
        "x_selected_mm2",
        "lc2_mm2",
        "lc_mm",
        "residual_rel",
        "error",
    ];
    let rows = vec![
        fit_row(out, "reproduction", &out.paper),
        fit_row(out, "exact", &out.exact),
    ];
    csv(&header, &rows)
}

pub fn fit_table(out: &FitOutput) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "scenario          : {}", out.label);
    let _ = writeln!(
        t,
        "observed FWHM     : {:.6e} mm at d_eff = {:.6e} m (slit epsilon {:.6e} mm)",
        out.fwhm_obs.mm(),
        out.d_eff.m(),
        out.epsilon.mm()
    );
    for (name, branch) in [("reproduction", &out.paper), ("exact", &out.exact)] {
        match branch {
            Ok(b) => {
                let _ = writeln!(
                    t,
                    "{name:<14}: roots x = {:.6e} / {:.6e} mm^2, selected {:.6e} mm^2",
                    b.x_small.mm2(),
                    b.x_large.mm2(),
                    b.x_selected.mm2()
                );
                match &b.lc2 {
                    Ok(a) => {
                        let _ = writeln!(
                            t,
                            "{:<14}  lc^2 = {:.6e} mm^2 (lc = {:.6e} mm), residual {:.2e}",
                            "", a.mm2(), a.sqrt().mm(), b.residual_rel
                        );
                    }
                    Err(e) => {
                        let _ = writeln!(t, "{:<14}  {e}", "");
                    }
                }
            }
            Err(e) => {
                let _ = writeln!(t, "{name:<14}: {e}");
            }
        }
    }
    t
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

pub fn sweep_csv(out: &SweepOutput) -> String {
    let convolved = out.convolved.as_deref();
    let mut header = vec![
        "label",
        "slit_full_width_mm",
        "epsilon_mm",
        "x_mm2",
        "fwhm_paper_mm",
        "fwhm_exact_mm",
    ];
    if convolved.is_some() {
        header.push("fwhm_paper_detector_mm");
        header.push("fwhm_exact_detector_mm");
    }
    let rows: Vec<Vec<String>> = out
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut row = vec![
                out.label.clone(),
                mm(p.full_width),
                mm(p.epsilon),
                mm2(p.x),
                mm(p.fwhm_paper),
                mm(p.fwhm_exact),
            ];
            if let Some(conv) = convolved {
                row.push(mm(conv[i].fwhm_paper));
                row.push(mm(conv[i].fwhm_exact));
            }
            row
        })
        .collect();
    csv(&header, &rows)
}

pub fn sweep_table(out: &SweepOutput) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "scenario          : {}", out.label);
    let _ = writeln!(
        t,
        "geometry          : d_eff = {:.6e} m, lc = {:.6e} mm, conversion = {}",
        out.d_eff.m(),
        out.lc.mm(),
        out.conversion
    );
    if let Some((w, k)) = out.detector {
        let _ = writeln!(
            t,
            "detector aperture : {:.6e} mm (k = {k}) folded in quadrature",
            w.mm()
        );
    }
    match out.minimum_full_width {
        Some(a) => {
            let _ = writeln!(t, "minimum           : at slit full width {:.6e} mm", a.mm());
        }
        None => {
            let _ = writeln!(
                t,
                "minimum           : none (lc^2 already exceeds the diffraction scale; curve is monotone)"
            );
        }
    }
    let _ = writeln!(t, "points            : {}", out.points.len());
    t
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

pub fn oracle_json(out: &OracleOutput) -> String {
    let reports: Vec<serde_json::Value> = out
        .reports
        .iter()
        .map(|r| {
            serde_json::json!({
                "quantity": r.quantity,
                "analytic": r.analytic,
                "numeric": r.numeric,
                "rel_err": r.rel_err,
                "tolerance": r.tolerance,
                "converged": r.converged,
                "n": r.n,
                "extent_m": r.extent_m,
                "passed": r.passed(),
                "passed_strict": r.passed_strict(),
            })
        })
        .collect();
    let doc = serde_json::json!({
        "strict": out.strict,
        "all_passed": out.all_passed,
        "reports": reports,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("report serialization is infallible");
    s.push('\n');
    s
}

pub fn oracle_table(out: &OracleOutput) -> String {
    let mut t = String::new();
    let name_width = out
        .reports
        .iter()
        .map(|r| r.quantity.len())
        .max()
        .unwrap_or(8)
        .max(8);
    for r in &out.reports {
        let ok = if out.strict { r.passed_strict() } else { r.passed() };
        let _ = writeln!(
            t,
            "{} {:<name_width$} rel_err {:.3e} (tol {:.1e}) n={} extent={:.3e} m{}",
            if ok { "PASS" } else { "FAIL" },
            r.quantity,
            r.rel_err,
            r.tolerance,
            r.n,
            r.extent_m,
            if r.converged { "" } else { "  [unconverged]" }
        );
    }
    let _ = writeln!(
        t,
        "{} of {} checks passed{}",
        out.reports.iter().filter(|r| if out.strict { r.passed_strict() } else { r.passed() }).count(),
        out.reports.len(),
        if out.strict { " (strict: half tolerance)" } else { "" }
    );
    t
}
