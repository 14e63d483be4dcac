//! Readers for the three input CSV files.
//!
//! Rows that cannot be interpreted are counted and skipped. A stream in which
//! more than half of the data rows are malformed is rejected as a whole.

use std::io::Read;

use csv::{ReaderBuilder, StringRecord, Trim};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GeoPoint, Venue, VenueId};

pub const CHECKINS_HEADER: [&str; 3] = ["user_id", "venue_id", "timestamp"];
pub const VENUES_HEADER: [&str; 8] = [
    "venue_id", "name", "lat", "lon", "category", "open_min", "close_min", "mean_stay",
];
pub const TRACES_HEADER: [&str; 4] = ["vehicle_id", "timestamp", "lat", "lon"];

/// One LBSN check-in.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckinRecord {
    pub user_id: String,
    pub venue_id: VenueId,
    /// Epoch seconds, UTC.
    pub timestamp: i64,
}

/// One GPS fix of a vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpsPoint {
    pub vehicle_id: String,
    pub timestamp: i64,
    pub location: GeoPoint,
}

/// Parsed rows plus the number of rows that were skipped as malformed.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub records: Vec<T>,
    pub skipped: usize,
}

pub fn parse_checkins<R: Read>(reader: R) -> Result<Parsed<CheckinRecord>> {
    parse_rows(reader, &CHECKINS_HEADER, |row| {
        let [user, venue, ts] = fields::<3>(row)?;
        let timestamp: i64 = ts.parse().ok()?;
        (!user.is_empty() && !venue.is_empty() && timestamp > 0).then(|| CheckinRecord {
            user_id: user.to_owned(),
            venue_id: VenueId::new(venue),
            timestamp,
        })
    })
}

/// Venue metadata rows. Popularity and histogram start empty; they are
/// filled from check-ins later.
pub fn parse_venues<R: Read>(reader: R) -> Result<Parsed<Venue>> {
    parse_rows(reader, &VENUES_HEADER, |row| {
        let [id, name, lat, lon, category, open, close, stay] = fields::<8>(row)?;
        if id.is_empty() || category.is_empty() {
            return None;
        }
        let venue = Venue::from_metadata(
            id,
            name,
            GeoPoint::new(lat.parse().ok()?, lon.parse().ok()?),
            category,
            open.parse().ok()?,
            close.parse().ok()?,
            stay.parse().ok()?,
        );
        venue.validate().is_ok().then_some(venue)
    })
}

pub fn parse_traces<R: Read>(reader: R) -> Result<Parsed<GpsPoint>> {
    parse_rows(reader, &TRACES_HEADER, |row| {
        let [vehicle, ts, lat, lon] = fields::<4>(row)?;
        let location = GeoPoint::new(lat.parse().ok()?, lon.parse().ok()?);
        let timestamp: i64 = ts.parse().ok()?;
        (!vehicle.is_empty() && location.is_valid() && timestamp > 0).then(|| GpsPoint {
            vehicle_id: vehicle.to_owned(),
            timestamp,
            location,
        })
    })
}

fn fields<const N: usize>(row: &StringRecord) -> Option<[&str; N]> {
    if row.len() != N {
        return None;
    }
    let mut out = [""; N];
    for (slot, field) in out.iter_mut().zip(row.iter()) {
        *slot = field;
    }
    Some(out)
}

fn parse_rows<R: Read, T>(
    reader: R,
    header: &[&str],
    mut parse: impl FnMut(&StringRecord) -> Option<T>,
) -> Result<Parsed<T>> {
    let mut rdr = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .quoting(false)
        .trim(Trim::All)
        .from_reader(reader);
    let mut records = Vec::new();
    let mut skipped = 0usize;
    let mut first = true;
    for row in rdr.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) if e.is_io_error() => match e.into_kind() {
                csv::ErrorKind::Io(io) => return Err(Error::Io(io)),
                _ => unreachable!("is_io_error implies an Io kind"),
            },
            Err(_) => {
                first = false;
                skipped += 1;
                continue;
            }
        };
        // The header line is optional; it is recognised only on the first row.
        if std::mem::take(&mut first) && row.iter().eq(header.iter().copied()) {
            continue;
        }
        match parse(&row) {
            Some(rec) => records.push(rec),
            None => skipped += 1,
        }
    }
    let total = records.len() + skipped;
    if skipped * 2 > total {
        return Err(Error::Format(format!(
            "{skipped} of {total} rows are malformed (expected header `{}`)",
            header.join(",")
        )));
    }
    Ok(Parsed { records, skipped })
}
