use merodyn::centers::{
    dual_center, enumerate_centers, parse_record, prepole, to_record, virtual_cycle,
    EnumerateOptions, MarkedValue, Window,
};
use merodyn::{inversion, ParamPoint, C64};

fn rho() -> C64 {
    C64::new(2.0 / 3.0, 0.0)
}

fn wide() -> Window {
    Window::new(-20.0, 20.0, -20.0, 20.0)
}

#[test]
fn order_two_centers_pair_up_under_inversion() {
    let opts = EnumerateOptions {
        max_order: 2,
        ..EnumerateOptions::default()
    };
    let found = enumerate_centers(rho(), &wide(), &opts).centers;
    let lambdas: Vec<_> = found
        .iter()
        .filter(|v| v.marked_av == MarkedValue::Lambda)
        .collect();
    let mus: Vec<_> = found
        .iter()
        .filter(|v| v.marked_av == MarkedValue::Mu)
        .collect();
    assert_eq!(lambdas.len(), 10);
    assert_eq!(mus.len(), 10);
    for v in &lambdas {
        let k = v.itinerary.entries()[0];
        assert!(k != 0 && k.abs() <= 5);
        let image = inversion(rho(), v.location).unwrap();
        let twin = mus
            .iter()
            .find(|m| (m.location - image).norm() < 1e-8)
            .expect("dual present");
        assert_eq!(twin.itinerary, v.itinerary.negated());
        assert_eq!(dual_center(rho(), v).unwrap().itinerary, twin.itinerary);
    }
    // conjugate pairs for real ρ
    for v in &lambdas {
        let k = v.itinerary.entries()[0];
        let mirror = lambdas
            .iter()
            .find(|m| m.itinerary.entries()[0] == -k)
            .unwrap();
        assert!((mirror.location - v.location.conj()).norm() < 1e-9);
    }
}

#[test]
fn third_order_centers_extend_their_parent() {
    let found = enumerate_centers(rho(), &wide(), &EnumerateOptions::default()).centers;
    let order3: Vec<_> = found.iter().filter(|v| v.order == 3).collect();
    assert!(order3.len() >= 20);
    for v in &order3 {
        let parent = v.itinerary.parent().unwrap();
        assert!(found
            .iter()
            .any(|u| u.order == 2 && u.itinerary == parent && u.marked_av == v.marked_av));
        assert!(v.residual < 1e-9);
    }
    // sorted by order and then modulus
    assert!(found
        .windows(2)
        .all(|w| (w[0].order, w[0].location.norm()) <= (w[1].order, w[1].location.norm())));
}

#[test]
fn records_survive_a_file_round_trip() {
    let found = enumerate_centers(
        rho(),
        &Window::new(0.0, 3.0, 0.0, 6.0),
        &EnumerateOptions::default(),
    )
    .centers;
    assert!(!found.is_empty());
    let text: String = found.iter().map(|v| to_record(v) + "\n").collect();
    for (line, v) in text.lines().zip(&found) {
        let rec = parse_record(line).unwrap();
        assert_eq!(rec.location, v.location);
        assert_eq!(rec.itinerary, v.itinerary);
        assert_eq!(rec.marked_av, v.marked_av);
        assert!(window_contains(v.location));
    }
}

fn window_contains(z: C64) -> bool {
    Window::new(0.0, 3.0, 0.0, 6.0).contains(z)
}

#[test]
fn empty_window_yields_nothing() {
    let e = enumerate_centers(
        rho(),
        &Window::new(1.0, 1.0, 0.0, 1.0),
        &EnumerateOptions::default(),
    );
    assert!(e.centers.is_empty() && e.failures.is_empty());
}

#[test]
fn virtual_cycles_end_at_a_pole() {
    let found = enumerate_centers(
        rho(),
        &Window::new(0.0, 3.0, 0.0, 6.0),
        &EnumerateOptions::default(),
    )
    .centers;
    for v in found.iter().filter(|v| v.marked_av == MarkedValue::Lambda) {
        let p = ParamPoint::new(rho(), v.location).unwrap();
        let z = prepole(&p, &v.itinerary).unwrap();
        assert!((z - p.lambda).norm() < 1e-8 * (1.0 + z.norm()));
        let cyc = virtual_cycle(rho(), v, 64).unwrap();
        assert!(cyc.closes_at_infinity, "{}", v.itinerary);
        assert_eq!(cyc.points.len(), v.order - 1);
    }
}
