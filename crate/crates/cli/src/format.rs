//! Number formatting for CSV and reports.

/// Significant digits kept in CSV cells.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to 12 significant digits, then prints the shortest string that
/// parses back to the rounded value. Plain notation for magnitudes in
/// `[1e-5, 1e15)`, scientific otherwise.
pub fn number(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    let magnitude = rounded.abs();
    if (1e-5..1e15).contains(&magnitude) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

pub fn optional(x: Option<f64>) -> String {
    x.map(number).unwrap_or_default()
}
