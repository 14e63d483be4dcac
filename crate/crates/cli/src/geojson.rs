//! GeoJSON rendering of a planned itinerary: one Point per visit and a
//! LineString from the start location through every visit to the end.

use serde_json::{json, Value};

use crate::PlanReport;

fn coords(p: &tripweaver_core::GeoPoint) -> Value {
    json!([p.lon, p.lat])
}

pub fn feature_collection(report: &PlanReport) -> Value {
    let mut features: Vec<Value> = report
        .visits
        .iter()
        .enumerate()
        .map(|(i, v)| {
            json!({
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": coords(&v.location)},
                "properties": {
                    "order": i + 1,
                    "venue_id": v.venue_id,
                    "name": v.name,
                    "category": v.category,
                    "arrival": v.arrival,
                    "visit_start": v.visit_start,
                    "depart": v.depart,
                },
            })
        })
        .collect();
    let mut line = vec![coords(&report.query.start_location)];
    line.extend(report.visits.iter().map(|v| coords(&v.location)));
    line.push(coords(&report.query.end_location));
    features.push(json!({
        "type": "Feature",
        "geometry": {"type": "LineString", "coordinates": line},
        "properties": {"score": report.score, "feasible": report.feasible},
    }));
    json!({"type": "FeatureCollection", "features": features})
}
