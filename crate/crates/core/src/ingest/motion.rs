use super::Track;
use crate::geo::{haversine_km, heading_rad};

pub const DEFAULT_STATIONARY_EPS_KM: f64 = 0.001;

/// Motion between grid fix `t_index` and `t_index + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionStep {
    pub t_index: usize,
    pub displacement_km: f64,
    /// `None` exactly when the step is stationary.
    pub heading_rad: Option<f64>,
    pub stationary: bool,
}

/// Displacement (great-circle km) and absolute angle for every consecutive
/// fix pair. Steps shorter than `stationary_eps_km` carry no heading.
pub fn motion_variables(track: &Track, stationary_eps_km: f64) -> Vec<MotionStep> {
    track
        .fixes
        .windows(2)
        .enumerate()
        .map(|(t_index, w)| {
            let (a, b) = (&w[0], &w[1]);
            let displacement_km = haversine_km(a.lat, a.lon, b.lat, b.lon);
            let stationary = displacement_km < stationary_eps_km;
            MotionStep {
                t_index,
                displacement_km,
                heading_rad: (!stationary).then(|| heading_rad(a.lat, a.lon, b.lat, b.lon)),
                stationary,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::Fix;
    use std::f64::consts::FRAC_PI_2;

    fn track(points: &[(f64, f64)]) -> Track {
        let fixes = points
            .iter()
            .enumerate()
            .map(|(i, &(lat, lon))| Fix::new(i as i64 * 3600, lat, lon))
            .collect();
        Track::new("V", "T", fixes)
    }

    #[test]
    fn equatorial_east_step() {
        let steps = motion_variables(&track(&[(0.0, 0.0), (0.0, 0.1)]), DEFAULT_STATIONARY_EPS_KM);
        assert_eq!(steps.len(), 1);
        assert!((steps[0].displacement_km - 11.1195).abs() < 1e-4);
        assert_eq!(steps[0].heading_rad, Some(0.0));
        assert!(!steps[0].stationary);
    }

    #[test]
    fn identical_fixes_are_stationary() {
        let steps = motion_variables(&track(&[(1.0, 1.0), (1.0, 1.0)]), DEFAULT_STATIONARY_EPS_KM);
        assert_eq!(steps[0].displacement_km, 0.0);
        assert!(steps[0].stationary);
        assert_eq!(steps[0].heading_rad, None);
    }

    #[test]
    fn due_north() {
        let steps = motion_variables(&track(&[(45.0, 3.0), (45.2, 3.0)]), DEFAULT_STATIONARY_EPS_KM);
        assert!((steps[0].heading_rad.unwrap() - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn one_step_per_pair() {
        let steps = motion_variables(
            &track(&[(0.0, 0.0), (0.1, 0.0), (0.1, 0.1), (0.1, 0.1)]),
            DEFAULT_STATIONARY_EPS_KM,
        );
        assert_eq!(steps.iter().map(|s| s.t_index).collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(steps[2].stationary);
    }
}
