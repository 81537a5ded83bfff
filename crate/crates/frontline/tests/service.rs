use axum::body::Body;
use axum::http::{header, Request, StatusCode};
use axum::Router;
use frontline::service::{router, ServiceConfig};
use http_body_util::BodyExt;
use merodyn::render::{render_tile, RenderSpec, TileKey};
use merodyn::wire::{format_complex, parse_complex};
use merodyn::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tower::ServiceExt;

struct Reply {
    status: StatusCode,
    headers: axum::http::HeaderMap,
    body: Vec<u8>,
}

impl Reply {
    fn json(&self) -> serde_json::Value {
        serde_json::from_slice(&self.body).unwrap()
    }
}

async fn get(app: &Router, uri: &str) -> Reply {
    get_with(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

async fn get_with(app: &Router, req: Request<Body>) -> Reply {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let headers = resp.headers().clone();
    let body = resp
        .into_body()
        .collect()
        .await
        .unwrap()
        .to_bytes()
        .to_vec();
    Reply {
        status,
        headers,
        body,
    }
}

fn app() -> Router {
    router(ServiceConfig::default())
}

fn complex(v: &serde_json::Value) -> C64 {
    parse_complex(v.as_str().unwrap()).unwrap()
}

#[tokio::test]
async fn tangent_point_is_in_the_shift_locus() {
    let r = get(&app(), "/classify?rho=0.6667,0&lambda=0.6667,0").await;
    assert_eq!(r.status, StatusCode::OK);
    let v = r.json();
    assert_eq!(v["class"]["kind"], "ShiftLocus");
    assert_eq!(v["orbit_lambda"]["verdict"]["kind"], "ConvergedToZero");
    assert!(r.headers.contains_key(header::ETAG));
}

#[tokio::test]
async fn fixed_point_example_reports_period_one() {
    let v = get(&app(), "/classify?rho=0.6666666666666666,0&lambda=2,2")
        .await
        .json();
    assert_eq!(v["class"]["kind"], "MLambda");
    assert_eq!(v["class"]["period"], 1);
}

#[tokio::test]
async fn invert_matches_the_closed_form() {
    let v = get(&app(), "/invert?rho=0.6667,0&lambda=2,2").await.json();
    let image = complex(&v["image"]);
    assert!((image - C64::new(0.360656, -0.032787)).norm() < 1e-4);
}

#[tokio::test]
async fn singular_and_malformed_inputs() {
    let app = app();
    let cases = [
        (
            "/classify?rho=0.6667,0&lambda=0.33333,0",
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        (
            "/invert?rho=0.6667,0&lambda=0,0",
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        ("/classify?rho=0.6667,0&lambda=2", StatusCode::BAD_REQUEST),
        ("/classify?rho=abc&lambda=2,2", StatusCode::BAD_REQUEST),
        ("/classify?rho=1.5,0&lambda=2,2", StatusCode::BAD_REQUEST),
        ("/invert?rho=0.6667,0", StatusCode::BAD_REQUEST),
        (
            "/centers?rho=0.6667,0&bbox=0,-1,1,1",
            StatusCode::UNPROCESSABLE_ENTITY,
        ),
        ("/centers?rho=0.6667,0&bbox=1,2,3", StatusCode::BAD_REQUEST),
        ("/sstar?rho=0.6667,0&n=2", StatusCode::BAD_REQUEST),
        ("/render/sideways.png?rho=0.5,0", StatusCode::BAD_REQUEST),
        (
            "/render/parameter.png?rho=0.5,0&px=2048",
            StatusCode::BAD_REQUEST,
        ),
    ];
    for (uri, status) in cases {
        let r = get(&app, uri).await;
        assert_eq!(r.status, status, "{uri}");
        assert!(r.json()["error"].is_string(), "{uri}");
    }
}

#[tokio::test]
async fn involution_over_random_parameters() {
    let app = app();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut checked = 0;
    while checked < 100 {
        let rho = C64::from_polar(rng.gen_range(0.05..0.95), rng.gen_range(-3.1..3.1));
        let lambda = C64::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
        if lambda.norm() < 0.05 || (lambda - rho / 2.0).norm() < 0.05 {
            continue;
        }
        let (r, l) = (format_complex(rho), format_complex(lambda));
        let once = get(&app, &format!("/invert?rho={r}&lambda={l}"))
            .await
            .json();
        let back = get(
            &app,
            &format!("/invert?rho={r}&lambda={}", once["image"].as_str().unwrap()),
        )
        .await
        .json();
        let twice = complex(&back["image"]);
        assert!(
            (twice - lambda).norm() <= 1e-12 * (1.0 + lambda.norm()),
            "{lambda} -> {twice}"
        );
        checked += 1;
    }
}

#[tokio::test]
async fn centers_and_sstar_endpoints() {
    let app = app();
    let v = get(
        &app,
        "/centers?rho=0.6667,0&bbox=0.5,1.5,2,3.8&max_order=2&k_min=-3&k_max=3",
    )
    .await
    .json();
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(v["centers"][0]["itinerary"], serde_json::json!([1]));
    assert_eq!(v["digest"].as_str().unwrap().len(), 64);

    let empty = get(&app, "/centers?rho=0.6667,0&bbox=5,5,5,5").await.json();
    assert_eq!(empty["records"], serde_json::json!([]));

    let v = get(&app, "/sstar?rho=0.6666666666666666,0&n=12")
        .await
        .json();
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 12);
    for p in pts {
        let z = complex(p);
        assert!(((z - C64::new(1.0 / 3.0, 0.0)).norm() - 1.0 / 3.0).abs() < 1e-4);
    }
}

fn tile_query() -> &'static str {
    "rho=0.6667,0&max_iter=200&overlays=c0"
}

#[tokio::test]
async fn tiles_match_the_engine_and_are_cached() {
    let app = app();
    let spec = get(&app, &format!("/spec/parameter?{}", tile_query()))
        .await
        .json();
    let digest = spec["digest"].as_str().unwrap().to_string();
    let uri = format!("/tiles/parameter/{digest}/1/1/0.png?{}", tile_query());
    let first = get(&app, &uri).await;
    assert_eq!(first.status, StatusCode::OK);
    assert_eq!(first.headers[header::CONTENT_TYPE], "image/png");
    let second = get(&app, &uri).await;
    assert_eq!(first.body, second.body);

    let base: RenderSpec = serde_json::from_value(spec["spec"].clone()).unwrap();
    let direct = render_tile(&TileKey::new(&base, 1, 1, 0), &base).unwrap();
    assert_eq!(first.body, direct.encode_png().unwrap());

    let etag = first.headers[header::ETAG].clone();
    let req = Request::get(&uri)
        .header(header::IF_NONE_MATCH, etag)
        .body(Body::empty())
        .unwrap();
    assert_eq!(get_with(&app, req).await.status, StatusCode::NOT_MODIFIED);
}

#[tokio::test]
async fn tile_addressing_errors() {
    let app = app();
    let spec = get(&app, &format!("/spec/parameter?{}", tile_query()))
        .await
        .json();
    let digest = spec["digest"].as_str().unwrap();
    let q = tile_query();
    let wrong = "0".repeat(64);
    assert_eq!(
        get(&app, &format!("/tiles/parameter/{wrong}/0/0/0.png?{q}"))
            .await
            .status,
        StatusCode::NOT_FOUND
    );
    assert_eq!(
        get(&app, &format!("/tiles/dynamic/{digest}/0/0/0.png?{q}"))
            .await
            .status,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, &format!("/tiles/volume/{digest}/0/0/0.png?{q}"))
            .await
            .status,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, &format!("/tiles/parameter/{digest}/1/2/0.png?{q}"))
            .await
            .status,
        StatusCode::BAD_REQUEST
    );
    assert_eq!(
        get(&app, &format!("/tiles/parameter/{digest}/x/0/0.png?{q}"))
            .await
            .status,
        StatusCode::BAD_REQUEST
    );
}

#[tokio::test]
async fn presets_serve_without_a_query() {
    let app = app();
    let presets = get(&app, "/presets").await.json();
    let list = presets.as_array().unwrap();
    assert_eq!(list.len(), 2);
    let digest = list[0]["digest"].as_str().unwrap();
    assert_eq!(
        get(
            &app,
            &format!("/spec/parameter?rho={}", list[0]["rho"].as_str().unwrap())
        )
        .await
        .json()["digest"],
        digest
    );
    let missing = get(
        &app,
        &format!("/tiles/parameter/{}/0/0/0.png", "f".repeat(64)),
    )
    .await;
    assert_eq!(missing.status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn full_queue_answers_503() {
    let app = router(ServiceConfig {
        queue: 0,
        ..ServiceConfig::default()
    });
    let spec = get(&app, &format!("/spec/parameter?{}", tile_query()))
        .await
        .json();
    let digest = spec["digest"].as_str().unwrap();
    let r = get(
        &app,
        &format!("/tiles/parameter/{digest}/0/0/0.png?{}", tile_query()),
    )
    .await;
    assert_eq!(r.status, StatusCode::SERVICE_UNAVAILABLE);
    assert!(r.headers.contains_key(header::RETRY_AFTER));
    // pure lookups never queue
    assert_eq!(
        get(&app, "/invert?rho=0.5,0&lambda=1,1").await.status,
        StatusCode::OK
    );
}

#[tokio::test]
async fn disk_cache_survives_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ServiceConfig {
        cache_dir: Some(dir.path().to_path_buf()),
        ..ServiceConfig::default()
    };
    let app = router(cfg.clone());
    let digest = get(&app, &format!("/spec/parameter?{}", tile_query()))
        .await
        .json()["digest"]
        .as_str()
        .unwrap()
        .to_string();
    let uri = format!("/tiles/parameter/{digest}/0/0/0.png?{}", tile_query());
    let first = get(&app, &uri).await;
    assert!(dir.path().join(&digest).join("0/0/0.png").is_file());
    // a fresh instance with no render slots can only answer from disk
    let restarted = router(ServiceConfig { queue: 0, ..cfg });
    let again = get(&restarted, &uri).await;
    assert_eq!(again.status, StatusCode::OK);
    assert_eq!(again.body, first.body);
}

#[tokio::test]
async fn single_images_and_statelessness() {
    let uris = [
        "/render/dynamic.png?rho=0.6667,0&lambda=2,2&px=32&max_iter=200",
        "/classify?rho=-0.6667,0&lambda=-1.5,0.2",
        "/invert?rho=0.3,0.4&lambda=1,-1",
        "/sstar?rho=0.5,0.1&n=8",
        "/render/parameter.png?rho=-0.6667,0&px=24&max_iter=200",
    ];
    let forward = app();
    let mut a = Vec::new();
    for u in uris {
        let r = get(&forward, u).await;
        assert_eq!(r.status, StatusCode::OK, "{u}");
        a.push(r.body);
    }
    let backward = app();
    let mut b = Vec::new();
    for u in uris.iter().rev() {
        b.push(get(&backward, u).await.body);
    }
    b.reverse();
    assert_eq!(a, b);
    // and once more on the warm instance
    for (u, body) in uris.iter().zip(&a) {
        assert_eq!(&get(&forward, u).await.body, body);
    }
}
