//! Deterministic JSON primitives: fixed float formatting (17 significant
//! digits, exponent notation) and string escaping. Used by the result
//! writer so output bytes are stable across runs and thread counts.

/// Format a float with 17 significant digits in exponent notation. This
/// round-trips every finite f64 and never depends on locale or shortest-
/// representation heuristics.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "null".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "1e400".into() } else { "-1e400".into() };
    }
    format!("{x:.16e}")
}

/// Escape a string for JSON output.
pub fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
