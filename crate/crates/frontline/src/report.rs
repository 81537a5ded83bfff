use merodyn::centers::{enumerate_centers, EnumerateOptions, Itinerary, MarkedValue, Window};
use merodyn::classify::{classify, ClassKind, ClassifierBudget, ParamClass};
use merodyn::dynamics::{iterate, OrbitRecord};
use merodyn::koenigs::{s_partition, SPartition};
use merodyn::{ParamPoint, C64};
use serde::Serialize;

use crate::config::{check_regular, Result};

/// Longest orbit prefix included in a report.
pub const MAX_REPORTED_POINTS: usize = 256;
/// Half-width of the box searched for the nearest virtual center.
const CENTER_SEARCH: f64 = 1.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CenterRef {
    pub marked_av: MarkedValue,
    pub itinerary: Itinerary,
    #[serde(with = "merodyn::wire::complex")]
    pub location: C64,
    pub distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointReport {
    #[serde(with = "merodyn::wire::complex")]
    pub rho: C64,
    #[serde(with = "merodyn::wire::complex")]
    pub lambda: C64,
    #[serde(with = "merodyn::wire::complex")]
    pub mu: C64,
    pub class: ParamClass,
    pub orbit_lambda: OrbitRecord,
    pub orbit_mu: OrbitRecord,
    pub s_partition: Option<SPartition>,
    pub nearest_center: Option<CenterRef>,
}

pub fn point_report(rho: C64, lambda: C64, budget: &ClassifierBudget) -> Result<PointReport> {
    check_regular(rho, lambda)?;
    let p = ParamPoint::new(rho, lambda).expect("checked above");
    let class = classify(&p, budget);
    let orbit = |seed| iterate(&p, seed, budget.max_iter).truncated(MAX_REPORTED_POINTS);
    let s_partition = match class.kind {
        ClassKind::ShiftLocus => s_partition(&p).ok(),
        _ => None,
    };
    Ok(PointReport {
        rho,
        lambda,
        mu: p.mu,
        orbit_lambda: orbit(p.lambda),
        orbit_mu: orbit(p.mu),
        class,
        s_partition,
        nearest_center: nearest_center(rho, lambda),
    })
}

fn nearest_center(rho: C64, lambda: C64) -> Option<CenterRef> {
    let window = Window::new(
        lambda.re - CENTER_SEARCH,
        lambda.re + CENTER_SEARCH,
        lambda.im - CENTER_SEARCH,
        lambda.im + CENTER_SEARCH,
    );
    let opts = EnumerateOptions {
        max_order: 3,
        grid: 6,
        ..EnumerateOptions::default()
    };
    enumerate_centers(rho, &window, &opts)
        .centers
        .into_iter()
        .map(|c| CenterRef {
            distance: (c.location - lambda).norm(),
            marked_av: c.marked_av,
            itinerary: c.itinerary,
            location: c.location,
        })
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
}
