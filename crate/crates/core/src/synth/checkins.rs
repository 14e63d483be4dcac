use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{regular_categories, CityGroundTruth};
use crate::error::{Error, Result};
use crate::ingest::CHECKINS_HEADER;

/// Weight multiplier on venues of a user's preferred category.
const PREFERENCE_BOOST: f64 = 4.0;

/// Check-ins for `n_users` users over `days` days.
///
/// Each user prefers one regular category. Venues are drawn proportional to
/// prior times preference; the hour of each check-in is drawn from the venue's
/// true histogram, which is zero outside operating hours. Rows are grouped by
/// user in time order.
pub fn generate_checkins(
    city: &CityGroundTruth,
    n_users: usize,
    checkins_per_user: usize,
    days: u32,
    seed: u64,
) -> Result<String> {
    if days == 0 {
        return Err(Error::domain("days must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6368_6563_6b69);
    let categories: Vec<&str> = regular_categories().collect();
    let tables = categories
        .iter()
        .map(|cat| {
            let weights = city
                .venues
                .iter()
                .map(|v| if v.category == *cat { v.prior * PREFERENCE_BOOST } else { v.prior });
            WeightedIndex::new(weights).map_err(|e| Error::domain(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    let hours = city
        .venues
        .iter()
        .map(|v| WeightedIndex::new(v.histogram).map_err(|e| Error::domain(format!("venue {}: {e}", v.id))))
        .collect::<Result<Vec<_>>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CHECKINS_HEADER).expect("in-memory write");
    let width = n_users.to_string().len().max(4);
    for u in 0..n_users {
        let user = format!("u{:0width$}", u + 1);
        let table = &tables[rng.random_range(0..tables.len())];
        let mut rows: Vec<(i64, usize)> = (0..checkins_per_user)
            .map(|_| {
                let v = table.sample(&mut rng);
                let day = i64::from(rng.random_range(0..days));
                let hour = hours[v].sample(&mut rng) as i64;
                let second = rng.random_range(0..3600);
                let local = day * 86_400 + hour * 3600 + second;
                (city.epoch_base + local - i64::from(city.utc_offset_min) * 60, v)
            })
            .collect();
        rows.sort_unstable();
        for (ts, v) in rows {
            w.write_record([user.as_str(), city.venues[v].id.as_str(), &ts.to_string()])
                .expect("in-memory write");
        }
    }
    Ok(String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8"))
}
