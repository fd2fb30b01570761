//! Great-circle geometry on a spherical Earth.
//!
//! Headings follow the planar convention used for movement analysis: angle of
//! the step measured counterclockwise from east, in `(-π, π]`. The step is
//! placed in the azimuthal tangent plane of its first point, so
//! `(displacement, heading)` reconstructs the endpoint on the sphere.

use std::f64::consts::PI;

pub const EARTH_RADIUS_KM: f64 = 6371.0;

/// Haversine distance in km. Exactly symmetric in its two points.
pub fn haversine_km(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dphi = (lat2 - lat1).abs().to_radians();
    let dlambda = (lon2 - lon1).abs().to_radians();
    let h = (dphi * 0.5).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda * 0.5).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
}

/// Step heading from east, counterclockwise, in `(-π, π]`.
pub fn heading_rad(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let phi1 = lat1.to_radians();
    let phi2 = lat2.to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let east = dlambda.sin() * phi2.cos();
    let north = phi1.cos() * phi2.sin() - phi1.sin() * phi2.cos() * dlambda.cos();
    let theta = north.atan2(east);
    if theta <= -PI {
        PI
    } else {
        theta
    }
}

/// Point reached from `(lat, lon)` after `dist_km` along `heading` (from east, CCW).
pub fn destination(lat: f64, lon: f64, heading: f64, dist_km: f64) -> (f64, f64) {
    let bearing = PI / 2.0 - heading;
    let delta = dist_km / EARTH_RADIUS_KM;
    let phi1 = lat.to_radians();
    let lambda1 = lon.to_radians();
    let sin_phi2 = phi1.sin() * delta.cos() + phi1.cos() * delta.sin() * bearing.cos();
    let phi2 = sin_phi2.clamp(-1.0, 1.0).asin();
    let lambda2 = lambda1
        + (bearing.sin() * delta.sin() * phi1.cos()).atan2(delta.cos() - phi1.sin() * sin_phi2);
    (phi2.to_degrees(), wrap_lon(lambda2.to_degrees()))
}

/// Shift by small east/north offsets in km using the local scale at `lat`.
pub fn offset_km(lat: f64, lon: f64, east_km: f64, north_km: f64) -> (f64, f64) {
    let dlat = (north_km / EARTH_RADIUS_KM).to_degrees();
    let coslat = lat.to_radians().cos().max(1e-9);
    let dlon = (east_km / (EARTH_RADIUS_KM * coslat)).to_degrees();
    (lat + dlat, wrap_lon(lon + dlon))
}

/// Wrap a longitude into `[-180, 180)`, leaving in-range values untouched.
pub fn wrap_lon(lon: f64) -> f64 {
    if (-180.0..180.0).contains(&lon) {
        lon
    } else {
        (lon + 180.0).rem_euclid(360.0) - 180.0
    }
}

/// Latitude/longitude bounding box of a set of points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
    /// Longitude range cannot be trusted (sequence crosses the antimeridian).
    pub lon_wraps: bool,
}

impl BoundingBox {
    pub fn from_points(points: impl IntoIterator<Item = (f64, f64)>) -> Option<Self> {
        let mut it = points.into_iter();
        let (lat, lon) = it.next()?;
        let mut bb = BoundingBox {
            lat_min: lat,
            lat_max: lat,
            lon_min: lon,
            lon_max: lon,
            lon_wraps: false,
        };
        let mut prev_lon = lon;
        for (lat, lon) in it {
            bb.lat_min = bb.lat_min.min(lat);
            bb.lat_max = bb.lat_max.max(lat);
            bb.lon_min = bb.lon_min.min(lon);
            bb.lon_max = bb.lon_max.max(lon);
            if (lon - prev_lon).abs() > 180.0 {
                bb.lon_wraps = true;
            }
            prev_lon = lon;
        }
        Some(bb)
    }

    /// Lower bound on the great-circle distance between any point of `self`
    /// and any point of `other`, in km.
    pub fn min_distance_km(&self, other: &BoundingBox) -> f64 {
        let dlat = (other.lat_min - self.lat_max).max(self.lat_min - other.lat_max).max(0.0);
        let dlon = if self.lon_wraps || other.lon_wraps {
            0.0
        } else {
            let gap = (other.lon_min - self.lon_max).max(self.lon_min - other.lon_max).max(0.0);
            // the short way round may be across the antimeridian
            gap.min((360.0 - (self.lon_max.max(other.lon_max) - self.lon_min.min(other.lon_min))).max(0.0))
        };
        let max_abs_lat = self
            .lat_min
            .abs()
            .max(self.lat_max.abs())
            .max(other.lat_min.abs())
            .max(other.lat_max.abs())
            .min(90.0);
        let cos_max = max_abs_lat.to_radians().cos();
        let h = (dlat.to_radians() * 0.5).sin().powi(2)
            + cos_max * cos_max * (dlon.min(180.0).to_radians() * 0.5).sin().powi(2);
        2.0 * EARTH_RADIUS_KM * h.sqrt().min(1.0).asin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn equator_tenth_degree() {
        let d = haversine_km(0.0, 0.0, 0.0, 0.1);
        let expected = EARTH_RADIUS_KM * 0.1_f64.to_radians();
        assert!((d - expected).abs() < 1e-9);
        assert!((d - 11.119).abs() < 1e-3);
        assert_eq!(heading_rad(0.0, 0.0, 0.0, 0.1), 0.0);
    }

    #[test]
    fn axis_headings() {
        assert!((heading_rad(10.0, 5.0, 10.1, 5.0) - PI / 2.0).abs() < 1e-12);
        assert!((heading_rad(10.0, 5.0, 9.9, 5.0) + PI / 2.0).abs() < 1e-12);
        assert_eq!(heading_rad(0.0, 5.0, 0.0, 4.9), PI);
    }

    #[test]
    fn wrap() {
        assert_eq!(wrap_lon(190.0), -170.0);
        assert_eq!(wrap_lon(-181.0), 179.0);
        assert_eq!(wrap_lon(179.5), 179.5);
    }

    proptest! {
        #[test]
        fn distance_symmetric_and_zero_iff_equal(
            lat1 in -80.0..80.0f64, lon1 in -180.0..180.0f64,
            lat2 in -80.0..80.0f64, lon2 in -180.0..180.0f64,
        ) {
            let d12 = haversine_km(lat1, lon1, lat2, lon2);
            let d21 = haversine_km(lat2, lon2, lat1, lon1);
            prop_assert_eq!(d12, d21);
            prop_assert_eq!(haversine_km(lat1, lon1, lat1, lon1), 0.0);
            if lat1 != lat2 || lon1 != lon2 {
                prop_assert!(d12 > 0.0);
            }
        }

        #[test]
        fn heading_displacement_reconstructs_endpoint(
            lat in -70.0..70.0f64, lon in -179.0..179.0f64,
            dist in 0.01..50.0f64, heading in -3.1..3.1f64,
        ) {
            let (lat2, lon2) = destination(lat, lon, heading, dist);
            let d = haversine_km(lat, lon, lat2, lon2);
            let h = heading_rad(lat, lon, lat2, lon2);
            let (lat3, lon3) = destination(lat, lon, h, d);
            prop_assert!(haversine_km(lat2, lon2, lat3, lon3) < 1e-3 * d);
        }

        #[test]
        fn bbox_bound_is_a_lower_bound(
            a in proptest::collection::vec((-60.0..60.0f64, -170.0..170.0f64), 1..6),
            b in proptest::collection::vec((-60.0..60.0f64, -170.0..170.0f64), 1..6),
        ) {
            let ba = BoundingBox::from_points(a.iter().copied()).unwrap();
            let bb = BoundingBox::from_points(b.iter().copied()).unwrap();
            let bound = ba.min_distance_km(&bb);
            for &(la, lo) in &a {
                for &(lb, lob) in &b {
                    prop_assert!(haversine_km(la, lo, lb, lob) >= bound - 1e-9);
                }
            }
        }
    }
}
