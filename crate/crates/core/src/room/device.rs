use serde::{Deserialize, Serialize};

use super::rir::{Point, RoomSpec};
use crate::error::{Error, Result};

/// Distance between neighbouring microphones.
pub const ADJACENT_MIC_SPACING: f64 = 0.037;
/// Distance between the two loudspeakers.
pub const LOUDSPEAKER_SPACING: f64 = 0.063;
/// Loudspeakers sit this far below the microphone plane.
pub const LOUDSPEAKER_DROP: f64 = 0.13;
/// Mechanical noise is emitted from below the array centre.
pub const MECH_DROP: f64 = 0.1;

/// Device-frame azimuths of the four microphones (square, corners on the
/// diagonals so that each side is `ADJACENT_MIC_SPACING`).
const MIC_AZIMUTHS: [f64; 4] = [45.0, 135.0, 225.0, 315.0];

/// Robot pose and the derived transducer positions.
///
/// Device azimuth θ points along room angle `θ + heading` (counter-clockwise
/// from +x), so azimuth 90° is straight ahead and a heading of 0 faces +y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceGeometry {
    pub mics: [Point; 4],
    pub loudspeakers: [Point; 2],
    pub origin: Point,
    pub heading: f64,
}

impl DeviceGeometry {
    /// Positions relative to `origin` (array centre) for a pose; no room checks.
    pub fn at(origin: Point, heading: f64) -> Self {
        let radius = ADJACENT_MIC_SPACING / std::f64::consts::SQRT_2;
        let polar = |az: f64, r: f64, dz: f64| {
            let a = (az + heading).to_radians();
            [origin[0] + r * a.cos(), origin[1] + r * a.sin(), origin[2] + dz]
        };
        let mics = MIC_AZIMUTHS.map(|az| polar(az, radius, 0.0));
        // Left and right of the body, along the 0°/180° device axis.
        let half = LOUDSPEAKER_SPACING / 2.0;
        let loudspeakers = [polar(180.0, half, -LOUDSPEAKER_DROP), polar(0.0, half, -LOUDSPEAKER_DROP)];
        Self {
            mics,
            loudspeakers,
            origin,
            heading,
        }
    }

    pub fn mech_position(&self) -> Point {
        [self.origin[0], self.origin[1], self.origin[2] - MECH_DROP]
    }

    fn all_points(&self) -> impl Iterator<Item = Point> + '_ {
        self.mics
            .iter()
            .chain(&self.loudspeakers)
            .copied()
            .chain(std::iter::once(self.mech_position()))
    }

    /// Unit vector toward device azimuth `deg` in the horizontal plane.
    pub fn direction(&self, deg: f64) -> [f64; 3] {
        let a = (deg + self.heading).to_radians();
        [a.cos(), a.sin(), 0.0]
    }

    /// Continuous device-frame azimuth of a point, in [0, 360).
    pub fn azimuth_of(&self, p: Point) -> f64 {
        let room_angle = (p[1] - self.origin[1]).atan2(p[0] - self.origin[0]).to_degrees();
        (room_angle - self.heading).rem_euclid(360.0)
    }

    /// Azimuth rounded onto the 1..=360 alphabet (0 maps to 360).
    pub fn doa_of(&self, p: Point) -> u16 {
        quantize_degrees(self.azimuth_of(p))
    }

    /// Position at device azimuth `deg`, horizontal range `range` and height `z`.
    pub fn point_at(&self, deg: f64, range: f64, z: f64) -> Point {
        let u = self.direction(deg);
        [self.origin[0] + range * u[0], self.origin[1] + range * u[1], z]
    }

    /// Far-field arrival time at each mic relative to the array centre.
    pub fn plane_wave_delays(&self, deg: f64, speed_of_sound: f64) -> [f64; 4] {
        let u = self.direction(deg);
        self.mics.map(|m| {
            let rel = [m[0] - self.origin[0], m[1] - self.origin[1]];
            -(rel[0] * u[0] + rel[1] * u[1]) / speed_of_sound
        })
    }
}

pub(crate) fn quantize_degrees(deg: f64) -> u16 {
    let d = deg.round().rem_euclid(360.0) as u16;
    if d == 0 {
        360
    } else {
        d
    }
}

/// Places the device at `origin` (array centre) with `heading` degrees and
/// checks that every transducer lies strictly inside the room.
pub fn place_device(room: &RoomSpec, origin: Point, heading: f64) -> Result<DeviceGeometry> {
    if !heading.is_finite() {
        return Err(Error::param("heading must be finite"));
    }
    let dev = DeviceGeometry::at(origin, heading);
    if let Some(p) = dev.all_points().find(|&p| !room.contains(p)) {
        return Err(Error::geometry(format!(
            "device at {origin:?} puts a transducer at {p:?}, outside room {:?}",
            room.dims
        )));
    }
    Ok(dev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::room::rir::distance;

    fn room() -> RoomSpec {
        RoomSpec::new([5.0, 4.0, 3.0], 0.3)
    }

    #[test]
    fn spacing_and_drop() {
        for heading in [0.0, 17.0, 90.0, 233.5] {
            let d = place_device(&room(), [2.5, 2.0, 1.0], heading).unwrap();
            for i in 0..4 {
                let j = (i + 1) % 4;
                assert!((distance(d.mics[i], d.mics[j]) - 0.037).abs() < 1e-12);
            }
            assert!((distance(d.loudspeakers[0], d.loudspeakers[1]) - 0.063).abs() < 1e-12);
            for s in d.loudspeakers {
                assert!((d.mics[0][2] - s[2] - 0.13).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn heading_rotates_about_centre() {
        let o = [2.5, 2.0, 1.0];
        let a = place_device(&room(), o, 0.0).unwrap();
        let b = place_device(&room(), o, 90.0).unwrap();
        let rot = |p: Point| [o[0] - (p[1] - o[1]), o[1] + (p[0] - o[0]), p[2]];
        for (pa, pb) in a.mics.iter().zip(&b.mics).chain(a.loudspeakers.iter().zip(&b.loudspeakers)) {
            let r = rot(*pa);
            for k in 0..3 {
                assert!((r[k] - pb[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn straight_ahead_is_90() {
        let d = place_device(&room(), [2.5, 2.0, 1.0], 30.0).unwrap();
        let p = d.point_at(90.0, 1.5, 1.3);
        assert_eq!(d.doa_of(p), 90);
        let behind = d.point_at(0.2, 1.5, 1.3);
        assert_eq!(d.doa_of(behind), 360);
    }

    #[test]
    fn wall_intersection_rejected() {
        assert!(matches!(place_device(&room(), [0.01, 2.0, 1.0], 0.0), Err(Error::Geometry(_))));
        // Loudspeakers below the floor.
        assert!(place_device(&room(), [2.5, 2.0, 0.1], 0.0).is_err());
    }

    #[test]
    fn quantize_wraps_zero() {
        assert_eq!(quantize_degrees(0.4), 360);
        assert_eq!(quantize_degrees(359.6), 360);
        assert_eq!(quantize_degrees(-1.0), 359);
        assert_eq!(quantize_degrees(90.49), 90);
    }
}
