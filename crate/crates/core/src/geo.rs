//! Spherical distance and the fixed speed constants of the substrate layers.

const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Walking speed, 5 km/h.
pub const WALK_SPEED_MPS: f64 = 5.0 / 3.6;
/// Metro cruising speed, 60 km/h.
pub const METRO_SPEED_MPS: f64 = 60.0 / 3.6;
/// Default speed used by the synthetic generators for road edges, 20 km/h.
pub const DEFAULT_BUS_SPEED_MPS: f64 = 20.0 / 3.6;
/// Maximum straight-line walk between two stops or stations.
pub const MAX_WALK_M: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }

    pub fn distance_m(&self, other: &LatLon) -> f64 {
        haversine_m(self.lat, self.lon, other.lat, other.lon)
    }
}

pub fn haversine_m(lat1: f64, lon1: f64, lat2: f64, lon2: f64) -> f64 {
    let (p1, p2) = (lat1.to_radians(), lat2.to_radians());
    let dp = p2 - p1;
    let dl = (lon2 - lon1).to_radians();
    let a = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * a.sqrt().min(1.0).asin()
}

pub fn walk_time_s(length_m: f64) -> f64 {
    length_m / WALK_SPEED_MPS
}

pub fn metro_time_s(length_m: f64) -> f64 {
    length_m / METRO_SPEED_MPS
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meridian_arc() {
        // 0.009 degrees of latitude is one thousandth of a 9 degree arc.
        let d = haversine_m(38.7, -9.1, 38.709, -9.1);
        let expected = EARTH_RADIUS_M * 0.009_f64.to_radians();
        assert!((d - expected).abs() < 1e-6);
    }

    #[test]
    fn speeds() {
        assert!((walk_time_s(300.0) - 216.0).abs() < 1e-9);
        assert!((metro_time_s(1000.0) - 60.0).abs() < 1e-9);
    }
}
