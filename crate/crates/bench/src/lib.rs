//! Shared fixtures for the criterion benchmarks.

use tripweaver_core::synth::{generate_city, CityGroundTruth, CityParams};
use tripweaver_core::{GeoPoint, PoiNetwork, Query, UserProfile};

pub struct Fixture {
    pub city: CityGroundTruth,
    pub network: PoiNetwork,
    pub user: UserProfile,
}

/// A ground-truth network of `n_venues` venues and a uniform-preference user.
pub fn fixture(seed: u64, n_venues: usize) -> Fixture {
    let city = generate_city(seed, n_venues, &CityParams::default()).expect("valid city");
    let network = city.truth_network().expect("valid network");
    let user = UserProfile::uniform("bench", network.categories());
    Fixture { city, network, user }
}

/// Round trip from the airport over the given window.
pub fn airport_query(fx: &Fixture, start: u32, end: u32) -> Query {
    let airport: GeoPoint = fx.city.venue(&fx.city.airport_id).expect("airport").location;
    Query::new(airport, airport, start, end).expect("valid query")
}
