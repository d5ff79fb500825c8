//! Solar position, daylight masks, and the Haurwitz clear-sky model.
//!
//! Declination uses Cooper's day-of-year approximation and the equation of
//! time uses Spencer's Fourier series. Sub-degree accuracy is enough here:
//! the clear-sky signal is only a reference that later normalization
//! rescales away.

use chrono::{Datelike, NaiveDate, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::ingest::SiteMeta;

/// Sun position at one instant, all angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarPosition {
    /// Angle from the local vertical, in [0, 180].
    pub zenith: f64,
    /// Sun declination, in [-23.45, 23.45].
    pub declination: f64,
    /// Hour angle, 0 at solar noon, positive in the afternoon.
    pub hour_angle: f64,
}

/// Hours of one date during which the sun is above the horizon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DaylightMask {
    pub date: NaiveDate,
    /// Strictly increasing, contiguous hour indices in [0, 23].
    pub daylight_hours: Vec<u32>,
}

impl DaylightMask {
    pub fn contains(&self, hour: u32) -> bool {
        self.daylight_hours.binary_search(&hour).is_ok()
    }

    pub fn len(&self) -> usize {
        self.daylight_hours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.daylight_hours.is_empty()
    }
}

fn day_of_year(date: NaiveDate) -> f64 {
    date.ordinal() as f64
}

/// Cooper's declination approximation, degrees.
fn declination_deg(date: NaiveDate) -> f64 {
    let n = day_of_year(date);
    23.45 * ((360.0 / 365.0) * (284.0 + n)).to_radians().sin()
}

/// Spencer's equation of time, minutes.
fn equation_of_time_minutes(date: NaiveDate) -> f64 {
    let b = 2.0 * std::f64::consts::PI * (day_of_year(date) - 1.0) / 365.0;
    229.18
        * (0.000075 + 0.001868 * b.cos() - 0.032077 * b.sin()
            - 0.014615 * (2.0 * b).cos()
            - 0.04089 * (2.0 * b).sin())
}

/// Sun position for a local civil timestamp at `site`.
///
/// Local solar time corrects the civil clock for the site's offset from
/// its standard meridian and for the equation of time; the zenith follows
/// the spherical formula cos z = sin phi sin delta + cos phi cos delta cos H.
pub fn solar_position(site: &SiteMeta, timestamp: NaiveDateTime) -> SolarPosition {
    let date = timestamp.date();
    let declination = declination_deg(date);
    let civil_hours = timestamp.hour() as f64
        + timestamp.minute() as f64 / 60.0
        + timestamp.second() as f64 / 3600.0;
    let standard_meridian = 15.0 * site.utc_offset;
    let solar_hours = civil_hours
        + (site.longitude - standard_meridian) / 15.0
        + equation_of_time_minutes(date) / 60.0;
    let hour_angle = 15.0 * (solar_hours - 12.0);

    let phi = site.latitude.to_radians();
    let delta = declination.to_radians();
    let cos_z = phi.sin() * delta.sin() + phi.cos() * delta.cos() * hour_angle.to_radians().cos();
    let zenith = cos_z.clamp(-1.0, 1.0).acos().to_degrees();

    SolarPosition {
        zenith,
        declination,
        hour_angle,
    }
}

/// Haurwitz clear-sky GHI in W/m² for a given zenith angle in degrees.
pub fn clear_sky_from_zenith(zenith_deg: f64) -> f64 {
    if zenith_deg >= 90.0 {
        return 0.0;
    }
    let cos_z = zenith_deg.to_radians().cos();
    1098.0 * cos_z * (-0.057 / cos_z).exp()
}

/// Clear-sky GHI at one instant.
pub fn clear_sky_ghi(site: &SiteMeta, timestamp: NaiveDateTime) -> f64 {
    clear_sky_from_zenith(solar_position(site, timestamp).zenith)
}

/// Clear-sky GHI for the hourly interval starting at `date` `hour`:00,
/// evaluated at the interval midpoint (hh:30). Hourly archives timestamp
/// the interval start, so the midpoint represents the interval.
pub fn clear_sky_for_hour(site: &SiteMeta, date: NaiveDate, hour: u32) -> f64 {
    let midpoint = date.and_hms_opt(hour, 30, 0).unwrap();
    clear_sky_ghi(site, midpoint)
}

/// Daylight hours of `date`: hour h is daylight iff the solar zenith at
/// the interval midpoint is below 90 degrees. Polar day yields all 24
/// hours, polar night an empty mask.
pub fn daylight_mask(site: &SiteMeta, date: NaiveDate) -> DaylightMask {
    let daylight_hours = (0..24u32)
        .filter(|&h| {
            let midpoint = date.and_hms_opt(h, 30, 0).unwrap();
            solar_position(site, midpoint).zenith < 90.0
        })
        .collect();
    DaylightMask {
        date,
        daylight_hours,
    }
}
