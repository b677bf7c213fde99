use std::f64::consts::PI;

/// Parses a radian value: a plain real, or a multiple of π such as `pi`,
/// `pi/4`, `3pi/4`, `3*pi/4` or `-pi/2`.
pub fn parse_angle(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let bad = || format!("invalid angle '{s}': expected a real or a form like pi/4, 3pi/2");
    let lower = s.to_ascii_lowercase();
    let Some(at) = lower.find("pi") else {
        return s
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(bad);
    };
    let coef = lower[..at].trim_end_matches('*').trim();
    let coef = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse::<f64>().map_err(|_| bad())?,
    };
    let rest = lower[at + 2..].trim();
    let den = match rest {
        "" => 1.0,
        r => r
            .strip_prefix('/')
            .and_then(|d| d.trim().parse::<f64>().ok())
            .filter(|d| *d != 0.0)
            .ok_or_else(bad)?,
    };
    let v = coef * PI / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}
