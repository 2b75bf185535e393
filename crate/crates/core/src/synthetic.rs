//! Synthetic rooftop-PV cohort: minute-level power driven by a daily
//! clear-sky curve, hourly cloud cover and autocorrelated noise.

use chrono::{DateTime, Duration, Timelike, Utc};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::series::{disaggregate, Resolution, TimeSeries, WeatherFrame};

#[derive(Debug, Clone)]
pub struct SyntheticHouse {
    pub id: String,
    pub location: String,
    /// Minute-resolution power in kW.
    pub power: TimeSeries,
}

#[derive(Debug, Clone)]
pub struct SyntheticCohort {
    pub houses: Vec<SyntheticHouse>,
    /// Hourly weather per location name.
    pub weather: Vec<(String, WeatherFrame)>,
}

impl SyntheticCohort {
    pub fn weather_for(&self, location: &str) -> Option<&WeatherFrame> {
        self.weather.iter().find(|(l, _)| l == location).map(|(_, w)| w)
    }
}

/// Relative clear-sky output at fractional hour of day, zero at night.
fn clear_sky(hour: f64) -> f64 {
    if !(6.0..20.0).contains(&hour) {
        return 0.0;
    }
    (std::f64::consts::PI * (hour - 6.0) / 14.0).sin().powf(1.5)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn hour_of(t: DateTime<Utc>) -> f64 {
    f64::from(t.hour()) + f64::from(t.minute()) / 60.0
}

/// Hourly weather covering `hours` steps from `start`.
pub fn synthetic_weather(start: DateTime<Utc>, hours: usize, seed: u64) -> Result<WeatherFrame> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).expect("unit normal");
    let (mut cloud_state, mut wind, mut pressure) = (0.0f64, 3.0f64, 1013.0f64);
    let mut cols: [Vec<f64>; 7] = Default::default();
    for i in 0..hours {
        let t = start + Duration::hours(i as i64);
        let hour = hour_of(t);
        cloud_state = 0.9 * cloud_state + 0.6 * z.sample(&mut rng);
        let cloud = sigmoid(cloud_state - 0.5);
        wind = (0.95 * wind + 0.05 * 3.0 + 0.4 * z.sample(&mut rng)).max(0.0);
        pressure = 0.98 * pressure + 0.02 * 1013.0 + 0.5 * z.sample(&mut rng);
        let temperature = 18.0 + 7.0 * (std::f64::consts::TAU * (hour - 9.0) / 24.0).sin() - 3.0 * cloud + z.sample(&mut rng);
        let humidity = (45.0 + 35.0 * cloud + 3.0 * z.sample(&mut rng)).clamp(0.0, 100.0);
        let dew_point = temperature - (100.0 - humidity) / 5.0 + 0.8 * z.sample(&mut rng);
        let uv = 10.0 * clear_sky(hour) * (1.0 - 0.8 * cloud);
        for (c, v) in cols.iter_mut().zip([wind, temperature, dew_point, cloud, uv, humidity, pressure]) {
            c.push(v);
        }
    }
    WeatherFrame::new(start, Resolution::HOUR, cols)
}

/// Minute power for one house under `weather` (hourly, starting at `start`).
pub fn synthetic_power(weather: &WeatherFrame, days: usize, capacity: f64, seed: u64) -> Result<TimeSeries> {
    let cloud_hourly = TimeSeries::new(
        weather.start(),
        Resolution::HOUR,
        weather.column("cloud_cover").expect("cloud column").to_vec(),
    );
    let cloud = disaggregate(&cloud_hourly, Resolution::MINUTE)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z = Normal::new(0.0, 1.0).expect("unit normal");
    let n = days * 1440;
    let mut drift = 0.0f64;
    let values = (0..n)
        .map(|i| {
            let t = weather.start() + Duration::minutes(i as i64);
            let sky = clear_sky(hour_of(t));
            drift = 0.98 * drift + 0.04 * z.sample(&mut rng);
            if sky == 0.0 {
                return 0.0;
            }
            let shade = 1.0 - 0.75 * cloud.values()[i];
            (capacity * sky * shade * (1.0 + drift) + 0.03 * capacity * z.sample(&mut rng)).max(0.0)
        })
        .collect();
    Ok(TimeSeries::new(weather.start(), Resolution::MINUTE, values))
}

/// `houses` houses split across two locations, `days` days from `start`.
pub fn synthetic_cohort(houses: usize, start: DateTime<Utc>, days: usize, seed: u64) -> Result<SyntheticCohort> {
    let locations = ["north", "south"];
    let weather = locations
        .iter()
        .enumerate()
        .map(|(i, l)| Ok((l.to_string(), synthetic_weather(start, days * 24, seed.wrapping_add(1000 + i as u64))?)))
        .collect::<Result<Vec<_>>>()?;
    let houses = (0..houses)
        .map(|i| {
            let location = locations[i % 2].to_string();
            let frame = &weather[i % 2].1;
            let capacity = 3.0 + 0.8 * i as f64;
            Ok(SyntheticHouse {
                id: format!("house_{:02}", i + 1),
                location,
                power: synthetic_power(frame, days, capacity, seed.wrapping_add(i as u64))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticCohort { houses, weather })
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::TimeZone;

    #[test]
    fn cohort_shapes() {
        let start = Utc.with_ymd_and_hms(2021, 3, 1, 0, 0, 0).unwrap();
        let c = synthetic_cohort(3, start, 2, 7).unwrap();
        assert_eq!(c.houses.len(), 3);
        assert_eq!(c.houses[0].power.len(), 2880);
        assert_eq!(c.weather_for("south").unwrap().len(), 48);
        let p = c.houses[1].power.values();
        assert_eq!(p[60], 0.0);
        assert!(p[13 * 60] > 0.0);
        assert!(p.iter().all(|v| *v >= 0.0));
        let again = synthetic_cohort(3, start, 2, 7).unwrap();
        assert_eq!(again.houses[2].power, c.houses[2].power);
    }
}
