//! Scenario files, presets, and canonical serialization.
//!
//! A scenario is the full two-arm bench: the pair source, arm 1 (particle 1,
//! ending at its slit), and arm 2 (particle 2, free flight into a detector).
//! Files are TOML with **mandatory unit suffixes** on every length — the
//! historical failure mode of this analysis is unit and convention slips, so
//! bare numbers are rejected wherever a length is expected.
//!
//! Two serializations exist: [`scenario_to_toml`] (shortest round-trip float
//! form, used by save) and [`canonical_form`] (fixed 12-significant-digit
//! form, used for hashing), so that equivalent scenarios hash identically
//! regardless of how many digits their files spell out.

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::ConfigError;
use crate::optics::{OpticalElement, SlitSpec, RECT_CONVERSION_FAR_FIELD};
use crate::quantities::{parse_length, Area, DiffractionScale, Length, QuantityError};
use crate::source::SourceSpec;

/// A validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub label: String,
    pub source: SourceSpec,
    pub arm1: Vec<OpticalElement>,
    pub arm2: Vec<OpticalElement>,
    /// Finite detector aperture, if the bench models one (used by sweep
    /// convolution only — widths in quadrature).
    pub detector_width: Option<Length>,
    /// Quadrature weight of the detector aperture.
    pub detector_k: f64,
}

/// The built-in benches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Popper's original no-lens arrangement on the photon-pair bench:
    /// slit A at 0.515 m, the (wide-open) slit-B plane mirrored at 0.515 m,
    /// detector 0.97 m further — virtual propagation distance 2 m.
    PopperNoLens,
    /// The lens bench: source → 0.485 m → f = 0.5 m lens → 0.03 m → slit A;
    /// particle 2 passes the ghost-image plane at 0.515 m and is detected
    /// 0.97 m beyond it.
    KimShih,
    /// The sweep bench: slit A at 0.4 m, detector 1.0 m past the slit-B
    /// plane (virtual propagation distance 1.8 m), 0.5 mm detector aperture.
    Strekalov,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::PopperNoLens, Preset::KimShih, Preset::Strekalov];

    pub fn name(self) -> &'static str {
        match self {
            Preset::PopperNoLens => "popper-nolens",
            Preset::KimShih => "kim-shih",
            Preset::Strekalov => "strekalov",
        }
    }

    pub fn from_name(name: &str) -> Result<Preset, ConfigError> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| ConfigError::UnknownPreset(name.to_string()))
    }

    pub fn scenario(self) -> Scenario {
        let wavelength = Length::from_nm(702.0);
        let scale = DiffractionScale::photon(wavelength).expect("positive wavelength");
        let rect_slit = || {
            OpticalElement::Slit(
                SlitSpec::from_rect(Length::from_mm(0.16), RECT_CONVERSION_FAR_FIELD)
                    .expect("valid preset slit"),
            )
        };
        match self {
            Preset::PopperNoLens => Scenario {
                label: "popper-nolens".into(),
                source: SourceSpec::new(
                    Area::from_mm2(0.049).sqrt(),
                    Length::from_mm(2.0),
                    scale,
                )
                .expect("valid preset source"),
                arm1: vec![OpticalElement::FreeSpace(Length::from_m(0.515)), rect_slit()],
                arm2: vec![
                    OpticalElement::FreeSpace(Length::from_m(0.515)),
                    OpticalElement::FreeSpace(Length::from_m(0.97)),
                    OpticalElement::Detector,
                ],
                detector_width: None,
                detector_k: 1.0,
            },
            Preset::KimShih => Scenario {
                label: "kim-shih".into(),
                source: SourceSpec::new(
                    Area::from_mm2(0.049).sqrt(),
                    Length::INFINITY,
                    scale,
                )
                .expect("valid preset source"),
                arm1: vec![
                    OpticalElement::FreeSpace(Length::from_m(0.485)),
                    OpticalElement::Lens {
                        focal: Length::from_m(0.5),
                    },
                    OpticalElement::FreeSpace(Length::from_m(0.03)),
                    rect_slit(),
                ],
                arm2: vec![
                    OpticalElement::FreeSpace(Length::from_m(0.515)),
                    OpticalElement::FreeSpace(Length::from_m(0.97)),
                    OpticalElement::Detector,
                ],
                detector_width: None,
                detector_k: 1.0,
            },
            Preset::Strekalov => Scenario {
                label: "strekalov".into(),
                source: SourceSpec::new(Length::from_mm(0.04), Length::from_mm(2.0), scale)
                    .expect("valid preset source"),
                arm1: vec![OpticalElement::FreeSpace(Length::from_m(0.4)), rect_slit()],
                arm2: vec![
                    OpticalElement::FreeSpace(Length::from_m(0.4)),
                    OpticalElement::FreeSpace(Length::from_m(1.0)),
                    OpticalElement::Detector,
                ],
                detector_width: Some(Length::from_mm(0.5)),
                detector_k: 1.0,
            },
        }
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    label: Option<String>,
    source: RawSource,
    arm1: Vec<RawElement>,
    arm2: Vec<RawElement>,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSource {
    wavelength: String,
    correlation_length: String,
    com_width: String,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct RawElement {
    kind: String,
    length: Option<String>,
    focal: Option<String>,
    epsilon: Option<String>,
    rect_full_width: Option<String>,
    conversion: Option<f64>,
    wide_open: Option<bool>,
    width: Option<String>,
    k: Option<f64>,
}

fn length_field(field: &str, raw: &str) -> Result<Length, ConfigError> {
    parse_length(raw).map_err(|e| match e {
        QuantityError::MissingUnit => ConfigError::UnitOmission {
            field: field.to_string(),
            value: raw.to_string(),
        },
        QuantityError::UnknownUnit(unit) => ConfigError::UnknownUnit {
            field: field.to_string(),
            unit,
            value: raw.to_string(),
        },
        QuantityError::BadNumber => ConfigError::BadQuantity {
            field: field.to_string(),
            value: raw.to_string(),
        },
    })
}

fn invariant(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invariant {
        field: field.to_string(),
        message: message.into(),
    }
}

fn reject_extra(
    field: &str,
    element: &RawElement,
    allowed: &[&str],
) -> Result<(), ConfigError> {
    let present: [(&str, bool); 7] = [
        ("length", element.length.is_some()),
        ("focal", element.focal.is_some()),
        ("epsilon", element.epsilon.is_some()),
        ("rect_full_width", element.rect_full_width.is_some()),
        ("conversion", element.conversion.is_some()),
        ("wide_open", element.wide_open.is_some()),
        ("width", element.width.is_some()),
    ];
    // `k` rides along with `width` and is checked with it.
    for (key, is_present) in present {
        if is_present && !allowed.contains(&key) {
            return Err(invariant(
                field,
                format!("key {key:?} does not apply to kind {:?}", element.kind),
            ));
        }
    }
    if element.k.is_some() && !allowed.contains(&"width") {
        return Err(invariant(
            field,
            format!("key \"k\" does not apply to kind {:?}", element.kind),
        ));
    }
    Ok(())
}

struct ParsedDetector {
    width: Option<Length>,
    k: f64,
}

fn element_from_raw(
    field: &str,
    raw: &RawElement,
    detector: &mut Option<ParsedDetector>,
) -> Result<OpticalElement, ConfigError> {
    match raw.kind.as_str() {
        "free" => {
            reject_extra(field, raw, &["length"])?;
            let value = raw
                .length
                .as_deref()
                .ok_or_else(|| invariant(field, "kind \"free\" requires a length"))?;
            let length = length_field(&format!("{field}.length"), value)?;
            if !(length.m().is_finite() && length.m() >= 0.0) {
                return Err(invariant(
                    &format!("{field}.length"),
                    "free-space length must be finite and nonnegative",
                ));
            }
            Ok(OpticalElement::FreeSpace(length))
        }
        "lens" => {
            reject_extra(field, raw, &["focal"])?;
            let value = raw
                .focal
                .as_deref()
                .ok_or_else(|| invariant(field, "kind \"lens\" requires a focal length"))?;
            let focal = length_field(&format!("{field}.focal"), value)?;
            if !(focal.m().is_finite() && focal.m() > 0.0) {
                return Err(invariant(
                    &format!("{field}.focal"),
                    "focal length must be finite and positive",
                ));
            }
            Ok(OpticalElement::Lens { focal })
        }
        "slit" => {
            reject_extra(
                field,
                raw,
                &["epsilon", "rect_full_width", "conversion", "wide_open"],
            )?;
            let spec = match (
                raw.epsilon.as_deref(),
                raw.rect_full_width.as_deref(),
                raw.wide_open.unwrap_or(false),
            ) {
                (Some(eps), None, false) => {
                    if raw.conversion.is_some() {
                        return Err(invariant(
                            &format!("{field}.conversion"),
                            "conversion applies only to rectangular slits",
                        ));
                    }
                    let eps = length_field(&format!("{field}.epsilon"), eps)?;
                    SlitSpec::from_epsilon(eps)
                        .map_err(|e| invariant(&format!("{field}.epsilon"), e.to_string()))?
                }
                (None, Some(rect), false) => {
                    let rect = length_field(&format!("{field}.rect_full_width"), rect)?;
                    let conversion = raw.conversion.unwrap_or(RECT_CONVERSION_FAR_FIELD);
                    SlitSpec::from_rect(rect, conversion)
                        .map_err(|e| invariant(field, e.to_string()))?
                }
                (None, None, true) => {
                    if raw.conversion.is_some() {
                        return Err(invariant(
                            &format!("{field}.conversion"),
                            "conversion applies only to rectangular slits",
                        ));
                    }
                    SlitSpec::wide_open()
                }
                _ => {
                    return Err(invariant(
                        field,
                        "a slit takes exactly one of: epsilon, rect_full_width, wide_open = true",
                    ))
                }
            };
            Ok(OpticalElement::Slit(spec))
        }
        "detector" => {
            reject_extra(field, raw, &["width"])?;
            let width = raw
                .width
                .as_deref()
                .map(|w| length_field(&format!("{field}.width"), w))
                .transpose()?;
            if let Some(w) = width {
                if !(w.m().is_finite() && w.m() >= 0.0) {
                    return Err(invariant(
                        &format!("{field}.width"),
                        "detector width must be finite and nonnegative",
                    ));
                }
            }
            let k = raw.k.unwrap_or(1.0);
            if !(k.is_finite() && k >= 0.0) {
                return Err(invariant(
                    &format!("{field}.k"),
                    "detector k must be finite and nonnegative",
                ));
            }
            if raw.k.is_some() && width.is_none() {
                return Err(invariant(
                    &format!("{field}.k"),
                    "detector k requires a detector width",
                ));
            }
            *detector = Some(ParsedDetector { width, k });
            Ok(OpticalElement::Detector)
        }
        other => Err(invariant(
            &format!("{field}.kind"),
            format!("unknown element kind {other:?} (free, lens, slit, detector)"),
        )),
    }
}

/// Parse and validate a scenario from TOML text.
pub fn scenario_from_toml(text: &str) -> Result<Scenario, ConfigError> {
    let raw: RawScenario =
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;

    let label = raw.label.unwrap_or_else(|| "scenario".to_string());
    if label.is_empty()
        || !label
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.' | ' '))
    {
        return Err(invariant(
            "label",
            "labels are limited to ASCII letters, digits, '-', '_', '.', and spaces",
        ));
    }

    let wavelength = length_field("source.wavelength", &raw.source.wavelength)?;
    let scale = DiffractionScale::photon(wavelength)
        .map_err(|e| invariant("source.wavelength", e.to_string()))?;
    let lc = length_field("source.correlation_length", &raw.source.correlation_length)?;
    let omega = length_field("source.com_width", &raw.source.com_width)?;
    let source =
        SourceSpec::new(lc, omega, scale).map_err(|e| invariant("source", e.to_string()))?;

    let mut detector = None;
    let arm1 = raw
        .arm1
        .iter()
        .enumerate()
        .map(|(i, e)| element_from_raw(&format!("arm1[{i}]"), e, &mut detector))
        .collect::<Result<Vec<_>, _>>()?;
    if detector.is_some() {
        return Err(invariant("arm1", "arm 1 carries no detector"));
    }
    let arm2 = raw
        .arm2
        .iter()
        .enumerate()
        .map(|(i, e)| element_from_raw(&format!("arm2[{i}]"), e, &mut detector))
        .collect::<Result<Vec<_>, _>>()?;

    let scenario = Scenario {
        label,
        source,
        arm1,
        arm2,
        detector_width: detector.as_ref().and_then(|d| d.width),
        detector_k: detector.as_ref().map_or(1.0, |d| d.k),
    };

    // Shape validation: one terminal slit in arm 1, free flight into one
    // terminal detector in arm 2.
    crate::optics::validate_arms(&scenario.arm1, &scenario.arm2)
        .map_err(|e| invariant("arm1/arm2", e.to_string()))?;
    Ok(scenario)
}

/// Load a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    scenario_from_toml(&text)
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

enum FloatForm {
    /// Shortest representation that round-trips exactly (for files).
    Exact,
    /// Fixed 12-significant-digit scientific form (for hashing).
    Canonical,
}

fn render_length(l: Length, form: &FloatForm) -> String {
    if l.m().is_infinite() {
        return "inf".to_string();
    }
    match form {
        FloatForm::Exact => format!("{:e} m", l.m()),
        FloatForm::Canonical => format!("{:.11e} m", l.m()),
    }
}

fn render_scenario(sc: &Scenario, form: FloatForm) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    writeln!(out, "label = \"{}\"", sc.label).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "[source]").unwrap();
    writeln!(
        out,
        "wavelength = \"{}\"",
        render_length(sc.source.scale().wavelength(), &form)
    )
    .unwrap();
    writeln!(
        out,
        "correlation_length = \"{}\"",
        render_length(sc.source.correlation_length(), &form)
    )
    .unwrap();
    writeln!(
        out,
        "com_width = \"{}\"",
        render_length(sc.source.com_spread(), &form)
    )
    .unwrap();

    let mut write_arm = |name: &str, elements: &[OpticalElement]| {
        for e in elements {
            writeln!(out).unwrap();
            writeln!(out, "[[{name}]]").unwrap();
            match e {
                OpticalElement::FreeSpace(l) => {
                    writeln!(out, "kind = \"free\"").unwrap();
                    writeln!(out, "length = \"{}\"", render_length(*l, &form)).unwrap();
                }
                OpticalElement::Lens { focal } => {
                    writeln!(out, "kind = \"lens\"").unwrap();
                    writeln!(out, "focal = \"{}\"", render_length(*focal, &form)).unwrap();
                }
                OpticalElement::Slit(s) => {
                    writeln!(out, "kind = \"slit\"").unwrap();
                    if s.is_wide_open() {
                        writeln!(out, "wide_open = true").unwrap();
                    } else if let Some(rect) = s.rect_full_width() {
                        writeln!(out, "rect_full_width = \"{}\"", render_length(rect, &form))
                            .unwrap();
                        writeln!(out, "conversion = {}", s.conversion()).unwrap();
                    } else {
                        writeln!(out, "epsilon = \"{}\"", render_length(s.epsilon(), &form))
                            .unwrap();
                    }
                }
                OpticalElement::Detector => {
                    writeln!(out, "kind = \"detector\"").unwrap();
                    if let Some(w) = sc.detector_width {
                        writeln!(out, "width = \"{}\"", render_length(w, &form)).unwrap();
                        writeln!(out, "k = {}", sc.detector_k).unwrap();
                    }
                }
            }
        }
    };
    write_arm("arm1", &sc.arm1);
    write_arm("arm2", &sc.arm2);
    out
}

/// Serialize with shortest exact floats — `load(save(x)) == x`.
pub fn scenario_to_toml(sc: &Scenario) -> String {
    render_scenario(sc, FloatForm::Exact)
}

/// Save a scenario file.
pub fn save_scenario(sc: &Scenario, path: &Path) -> Result<(), ConfigError> {
    std::fs::write(path, scenario_to_toml(sc)).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// The canonical fixed-precision form behind [`canonical_hash`]. Two
/// scenarios that agree to 12 significant digits in SI units canonicalize
/// identically however their files were spelled.
pub fn canonical_form(sc: &Scenario) -> String {
    render_scenario(sc, FloatForm::Canonical)
}

/// SHA-256 of [`canonical_form`], hex-encoded.
pub fn canonical_hash(sc: &Scenario) -> String {
    let digest = Sha256::digest(canonical_form(sc).as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        write!(hex, "{byte:02x}").unwrap();
    }
    hex
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_named() {
        for preset in Preset::ALL {
            let sc = preset.scenario();
            assert_eq!(sc.label, preset.name());
            crate::optics::validate_arms(&sc.arm1, &sc.arm2).unwrap();
        }
        assert!(Preset::from_name("kim-shih").is_ok());
        assert!(matches!(
            Preset::from_name("bogus"),
            Err(ConfigError::UnknownPreset(_))
        ));
    }

    #[test]
    fn presets_round_trip_through_toml() {
        for preset in Preset::ALL {
            let sc = preset.scenario();
            let text = scenario_to_toml(&sc);
            let back = scenario_from_toml(&text).unwrap();
            assert_eq!(back, sc, "round trip failed for {}", preset.name());
            // And a second cycle is byte-stable.
            assert_eq!(scenario_to_toml(&back), text);
        }
    }

    #[test]
    fn canonical_hash_ignores_spelling() {
        let sc = Preset::KimShih.scenario();
        let mut text = scenario_to_toml(&sc);
        // Re-spell a value without changing it: 0.5 m -> 500 mm.
        assert!(text.contains("focal = \"5e-1 m\""));
        text = text.replace("focal = \"5e-1 m\"", "focal = \"500 mm\"");
        let respelled = scenario_from_toml(&text).unwrap();
        assert_eq!(canonical_hash(&respelled), canonical_hash(&sc));
    }

    #[test]
    fn missing_unit_is_a_field_level_error() {
        let text = scenario_to_toml(&Preset::Strekalov.scenario())
            .replace("correlation_length = \"4e-5 m\"", "correlation_length = \"4e-5\"");
        match scenario_from_toml(&text) {
            Err(ConfigError::UnitOmission { field, .. }) => {
                assert_eq!(field, "source.correlation_length");
            }
            other => panic!("expected unit omission, got {other:?}"),
        }
    }

    #[test]
    fn unknown_unit_is_a_field_level_error() {
        let text = scenario_to_toml(&Preset::Strekalov.scenario())
            .replace("length = \"4e-1 m\"", "length = \"4e-1 furlongs\"");
        match scenario_from_toml(&text) {
            Err(ConfigError::UnknownUnit { field, unit, .. }) => {
                assert_eq!(field, "arm1[0].length");
                assert_eq!(unit, "furlongs");
            }
            other => panic!("expected unknown unit, got {other:?}"),
        }
    }

    #[test]
    fn negative_focal_length_is_rejected() {
        let text = scenario_to_toml(&Preset::KimShih.scenario())
            .replace("focal = \"5e-1 m\"", "focal = \"-0.5 m\"");
        assert!(matches!(
            scenario_from_toml(&text),
            Err(ConfigError::Invariant { .. })
        ));
    }

    #[test]
    fn misplaced_keys_are_rejected() {
        let text = scenario_to_toml(&Preset::Strekalov.scenario()).replace(
            "kind = \"lens\"",
            "kind = \"lens\"\nlength = \"1 m\"",
        );
        // Strekalov has no lens; craft one directly instead.
        let bad = "\
label = \"x\"
[source]
wavelength = \"702 nm\"
correlation_length = \"0.04 mm\"
com_width = \"2 mm\"
[[arm1]]
kind = \"free\"
length = \"0.4 m\"
epsilon = \"0.08 mm\"
[[arm1]]
kind = \"slit\"
epsilon = \"0.08 mm\"
[[arm2]]
kind = \"detector\"
";
        assert!(matches!(
            scenario_from_toml(bad),
            Err(ConfigError::Invariant { .. })
        ));
        let _ = text;
    }

    #[test]
    fn unknown_toml_keys_are_syntax_errors() {
        let text = scenario_to_toml(&Preset::Strekalov.scenario())
            .replace("[source]", "[source]\nbandwidth = \"3 nm\"");
        assert!(matches!(
            scenario_from_toml(&text),
            Err(ConfigError::Syntax(_))
        ));
    }

    #[test]
    fn arm_shape_violations_are_invariant_errors() {
        // Slit not terminal in arm 1.
        let bad = "\
label = \"x\"
[source]
wavelength = \"702 nm\"
correlation_length = \"0.04 mm\"
com_width = \"2 mm\"
[[arm1]]
kind = \"slit\"
epsilon = \"0.08 mm\"
[[arm1]]
kind = \"free\"
length = \"0.4 m\"
[[arm2]]
kind = \"detector\"
";
        match scenario_from_toml(bad) {
            Err(ConfigError::Invariant { field, .. }) => assert_eq!(field, "arm1/arm2"),
            other => panic!("expected invariant error, got {other:?}"),
        }
    }

    #[test]
    fn wide_open_slit_parses() {
        let text = "\
label = \"open\"
[source]
wavelength = \"702 nm\"
correlation_length = \"0.04 mm\"
com_width = \"2 mm\"
[[arm1]]
kind = \"slit\"
wide_open = true
[[arm2]]
kind = \"free\"
length = \"1 m\"
[[arm2]]
kind = \"detector\"
";
        let sc = scenario_from_toml(text).unwrap();
        match &sc.arm1[0] {
            OpticalElement::Slit(s) => assert!(s.is_wide_open()),
            other => panic!("expected slit, got {other:?}"),
        }
    }

    #[test]
    fn detector_width_and_k_are_captured() {
        let sc = Preset::Strekalov.scenario();
        let text = scenario_to_toml(&sc);
        assert!(text.contains("width = \"5e-4 m\""));
        let back = scenario_from_toml(&text).unwrap();
        assert_eq!(back.detector_width, Some(Length::from_mm(0.5)));
        assert_eq!(back.detector_k, 1.0);
    }
}
