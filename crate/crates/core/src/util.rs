//! Small numeric and text helpers shared across modules.

use chrono::{DateTime, Utc};

/// Median by sort-midpoint; `None` for an empty slice.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// Percentile `p` in `[0, 100]` with linear interpolation between order
/// statistics (position `(n - 1) p / 100` in the sorted values, as R's
/// default `quantile`).
pub fn percentile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * (p / 100.0).clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}

/// Decimal text with six significant digits.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".to_string() } else { x.to_string() };
    }
    let mut decimals = (5 - x.abs().log10().floor() as i32).max(0) as usize;
    let mut s = format!("{:.*}", decimals, x);
    // rounding can carry into a new leading digit (0.9999996 -> 1.000000)
    let carried = s.trim_start_matches('-').trim_start_matches("0.").trim_start_matches('0');
    if carried.chars().filter(|c| c.is_ascii_digit()).count() > 6 && decimals > 0 {
        decimals -= 1;
        s = format!("{:.*}", decimals, x);
    }
    s
}

pub fn format_timestamp(epoch_seconds: i64) -> String {
    DateTime::<Utc>::from_timestamp(epoch_seconds, 0)
        .map(|t| t.format("%Y-%m-%dT%H:%M:%SZ").to_string())
        .unwrap_or_else(|| epoch_seconds.to_string())
}

pub fn parse_timestamp(text: &str) -> Option<i64> {
    let text = text.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(text) {
        return Some(t.timestamp());
    }
    text.parse::<i64>().ok()
}
