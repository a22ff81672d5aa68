//! Deterministic text rendering shared by the JSON and CSV emitters.

/// Formats a float with 12 significant digits in scientific notation, a
/// fixed-width representation that is also a valid JSON number. Zero prints
/// as `0` regardless of sign.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.11e}")
}
