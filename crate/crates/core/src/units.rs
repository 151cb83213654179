//! Unit constants. Everything internal is SI; flow rates cross the public
//! boundary in m³/h.

pub const STANDARD_GRAVITY: f64 = 9.80665; // m/s²
pub const ATMOSPHERE_PA: f64 = 101_325.0;
pub const PA_PER_BAR: f64 = 1.0e5;
pub const PA_PER_PSI: f64 = 6_894.757_293_168;
pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const METERS_PER_INCH: f64 = 0.0254;
pub const METERS_PER_FOOT: f64 = 0.3048;
pub const CUBIC_METERS_PER_CUBIC_INCH: f64 = METERS_PER_INCH * METERS_PER_INCH * METERS_PER_INCH;
pub const JOULES_PER_MWH: f64 = 3.6e9;

#[inline]
pub fn m3h_to_m3s(q_m3_per_h: f64) -> f64 {
    q_m3_per_h / SECONDS_PER_HOUR
}

#[inline]
pub fn inches_to_m(inches: f64) -> f64 {
    inches * METERS_PER_INCH
}

#[inline]
pub fn pa_to_bar(pa: f64) -> f64 {
    pa / PA_PER_BAR
}

#[inline]
pub fn bar_to_pa(bar: f64) -> f64 {
    bar * PA_PER_BAR
}
