use super::{Fix, Track};
use crate::geo::wrap_lon;
use crate::{Error, Result};

/// Resamples a trip onto the epoch-anchored grid of `step_seconds`.
///
/// Grid times are the multiples of `step_seconds` inside the trip span, so
/// any two vessels interpolated with the same step share timestamps. Values
/// are linear in lat/lon between the bracketing raw fixes (longitudes are
/// unwrapped across the antimeridian first); no extrapolation. Grid times that
/// coincide with a raw fix copy it verbatim.
pub fn interpolate_regular(track: &Track, step_seconds: i64) -> Result<Track> {
    if step_seconds <= 0 {
        return Err(Error::config("step_seconds must be positive"));
    }
    let degenerate = |span| Error::DegenerateTrip {
        vessel_id: track.vessel_id.to_string(),
        trip_id: track.trip_id.to_string(),
        span_seconds: span,
        step_seconds,
    };
    let raw = &track.fixes;
    let (Some(first), Some(last)) = (raw.first(), raw.last()) else {
        return Err(degenerate(0));
    };
    let span = last.timestamp - first.timestamp;
    if raw.len() < 2 || span < step_seconds {
        return Err(degenerate(span));
    }

    // unwrap longitudes so that consecutive fixes differ by at most 180°
    let mut unwrapped = Vec::with_capacity(raw.len());
    let mut shift = 0.0;
    for (i, f) in raw.iter().enumerate() {
        if i > 0 {
            let d = f.lon + shift - unwrapped[i - 1];
            if d > 180.0 {
                shift -= 360.0;
            } else if d < -180.0 {
                shift += 360.0;
            }
        }
        unwrapped.push(f.lon + shift);
    }

    let t0 = first.timestamp.div_euclid(step_seconds) * step_seconds;
    let t0 = if t0 < first.timestamp { t0 + step_seconds } else { t0 };
    let t1 = last.timestamp.div_euclid(step_seconds) * step_seconds;

    let mut fixes = Vec::with_capacity(((t1 - t0) / step_seconds + 1).max(0) as usize);
    let mut seg = 0usize;
    let mut t = t0;
    while t <= t1 {
        while seg + 1 < raw.len() && raw[seg + 1].timestamp < t {
            seg += 1;
        }
        let a = &raw[seg];
        let fix = if a.timestamp == t {
            *a
        } else {
            let b = &raw[seg + 1];
            if b.timestamp == t {
                *b
            } else {
                let frac = (t - a.timestamp) as f64 / (b.timestamp - a.timestamp) as f64;
                let lat = a.lat + frac * (b.lat - a.lat);
                let lon = unwrapped[seg] + frac * (unwrapped[seg + 1] - unwrapped[seg]);
                Fix::new(t, lat, wrap_lon(lon))
            }
        };
        fixes.push(Fix { timestamp: t, ..fix });
        t += step_seconds;
    }

    Ok(Track {
        vessel_id: track.vessel_id.clone(),
        trip_id: track.trip_id.clone(),
        fixes,
        regular: true,
        step_seconds: Some(step_seconds),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint_of_off_grid_segment() {
        let t = Track::new(
            "V",
            "T",
            vec![Fix::new(600, 10.0, 20.0), Fix::new(6600, 11.0, 22.0)],
        );
        let r = interpolate_regular(&t, 3600).unwrap();
        assert_eq!(r.fixes.len(), 1);
        let f = r.fixes[0];
        assert_eq!(f.timestamp, 3600);
        assert!((f.lat - 10.5).abs() < 1e-12);
        assert!((f.lon - 21.0).abs() < 1e-12);
        assert!(r.regular);
    }

    #[test]
    fn regular_input_is_identity() {
        let fixes: Vec<Fix> = (0..8)
            .map(|h| Fix::new(1_464_739_200 + h * 3600, -12.0 + 0.013 * h as f64, -77.5 - 0.071 * h as f64))
            .collect();
        let t = Track::new("V", "T", fixes.clone());
        let r = interpolate_regular(&t, 3600).unwrap();
        assert_eq!(r.fixes, fixes);
    }

    #[test]
    fn ten_minute_grid() {
        let t = Track::new(
            "V",
            "T",
            vec![Fix::new(1_464_739_230, -12.0, -77.5), Fix::new(1_464_739_230 + 3 * 3600, -12.2, -77.9)],
        );
        let r = interpolate_regular(&t, 600).unwrap();
        assert!(r.fixes.iter().all(|f| f.timestamp % 600 == 0));
        assert!(r.is_on_grid(600));
        assert_eq!(r.fixes.len(), 18);
    }

    #[test]
    fn short_span_is_degenerate() {
        let t = Track::new("V", "T", vec![Fix::new(600, 0.0, 0.0), Fix::new(3000, 0.0, 0.1)]);
        assert!(matches!(
            interpolate_regular(&t, 3600),
            Err(Error::DegenerateTrip { span_seconds: 2400, .. })
        ));
    }

    #[test]
    fn crosses_antimeridian() {
        let t = Track::new("V", "T", vec![Fix::new(0, 0.0, 179.5), Fix::new(7200, 0.0, -179.5)]);
        let r = interpolate_regular(&t, 3600).unwrap();
        assert_eq!(r.fixes.len(), 3);
        assert!((r.fixes[1].lon.abs() - 180.0).abs() < 1e-9);
        assert_eq!(r.fixes[2].lon, -179.5);
    }

    proptest! {
        #[test]
        fn shared_grid_and_identity(
            start_a in 0i64..20_000, len_a in 4_000i64..40_000,
            start_b in 0i64..20_000, len_b in 4_000i64..40_000,
        ) {
            let step = 3600;
            let mk = |s: i64, l: i64| Track::new("V", "T", vec![
                Fix::new(s, 0.0, 0.0), Fix::new(s + l / 2, 0.3, 0.1), Fix::new(s + l, 0.5, 0.4)]);
            let (a, b) = (mk(start_a, len_a), mk(start_b, len_b));
            let (ra, rb) = (interpolate_regular(&a, step), interpolate_regular(&b, step));
            if let (Ok(ra), Ok(rb)) = (ra, rb) {
                prop_assert!(ra.is_on_grid(step) && rb.is_on_grid(step));
                let lo = ra.start().unwrap().max(rb.start().unwrap());
                let hi = ra.end().unwrap().min(rb.end().unwrap());
                let ta: std::collections::BTreeSet<i64> = ra.fixes.iter().map(|f| f.timestamp).collect();
                let tb: std::collections::BTreeSet<i64> = rb.fixes.iter().map(|f| f.timestamp).collect();
                let both: Vec<i64> = ta.intersection(&tb).copied().collect();
                let expected: Vec<i64> = if lo <= hi { (0..=(hi - lo) / step).map(|k| lo + k * step).collect() } else { vec![] };
                prop_assert_eq!(both, expected);
                // re-interpolating a regular track is the identity
                let again = interpolate_regular(&ra, step);
                if let Ok(again) = again {
                    prop_assert_eq!(again.fixes, ra.fixes);
                }
            }
        }
    }
}
