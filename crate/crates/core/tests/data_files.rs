//! The bundled data set and the golden LP files.
//!
//! Both are generated from code. Run with `ELYFCR_BLESS=1` to rewrite them
//! after an intentional change; without it the tests compare byte for byte.

use std::fs;
use std::path::{Path, PathBuf};

use elyfcr::io::{load_params, load_prices, prices_to_csv, ParameterSet};
use elyfcr::milp::{emit_lp, parse_lp};
use elyfcr::model::{build_model, reference, InitialState, Instance, Mode};
use elyfcr::piecewise::{CurveSamples, PiecewiseCurve};

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn bless() -> bool {
    std::env::var_os("ELYFCR_BLESS").is_some_and(|v| v == "1")
}

/// Compares `actual` with the file at `path`, or rewrites it when blessing.
fn check_file(path: &Path, actual: &str) {
    if bless() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, actual).unwrap();
        return;
    }
    let expected = fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("{}: {e} (run with ELYFCR_BLESS=1)", path.display()));
    assert!(
        expected == actual,
        "{} differs from the generated content",
        path.display()
    );
}

fn reference_parameters() -> ParameterSet {
    ParameterSet {
        unit: reference::unit_params(),
        tso_tariff: reference::TSO_TARIFF,
        dso_tariff: reference::DSO_TARIFF,
        h2_price: reference::H2_PRICE,
        hpa_min: reference::HPA_MIN_WEEKLY,
        h_max: reference::H_MAX,
        d_max: reference::D_MAX,
        q_fcr: reference::Q_FCR,
        reserve_cap: None,
    }
}

#[test]
fn bundled_parameter_file() {
    let path = data_dir().join("reference.params");
    let header = "# 10 MW alkaline reference unit. Powers in MW, prices in EUR/MWh,\n\
                  # hydrogen in kg, EUR/kg and kg/h; HPA_min is per 168 h window.\n";
    check_file(
        &path,
        &format!("{header}{}", reference_parameters().to_text()),
    );
    let loaded = load_params(&path).unwrap();
    assert_eq!(loaded.unit.initial_state, InitialState::Off);
    assert_eq!(loaded.hpa_min, 9072.0);
    assert!((loaded.unit.k_c - reference::K_C).abs() < 1e-15);
}

#[test]
fn bundled_curve_files() {
    let samples = reference::curve_samples();
    check_file(&data_dir().join("curve_samples.tab"), &samples.to_table());
    let curve = reference::curve(reference::SEGMENTS);
    check_file(&data_dir().join("curve.pw"), &curve.to_table());

    let text = fs::read_to_string(data_dir().join("curve_samples.tab")).unwrap();
    assert_eq!(text.parse::<CurveSamples>().unwrap(), samples);
    let text = fs::read_to_string(data_dir().join("curve.pw")).unwrap();
    let parsed: PiecewiseCurve = text.parse().unwrap();
    assert_eq!(parsed, curve);
    assert_eq!(parsed.len(), 5);
}

#[test]
fn bundled_price_week() {
    let week = reference::synthetic_week();
    let path = data_dir().join("prices_week.csv");
    check_file(&path, &prices_to_csv(&week));
    let loaded = load_prices(&path).unwrap();
    assert_eq!(loaded.len(), 168);
    assert_eq!(loaded.spot, week.spot);
    assert_eq!(loaded.fcr_d_down, week.fcr_d_down);
}

/// Small instances covering every row family.
fn golden_instances() -> Vec<(&'static str, Instance)> {
    let mut free = reference::instance(2, 2);
    free.prices = reference::flat_prices(2, 35.5, 12.0, 20.25, 7.0);
    free.prices.spot[1] = -3.0;
    free.contract.windows[0].min_delivery = 120.0;

    let mut capped = reference::instance(3, 3);
    capped.prices = reference::flat_prices(3, 60.0, 18.0, 9.0, 30.0);
    capped.contract.reserve_cap = Some(6.0);
    capped.params.initial_state = InitialState::Standby;
    capped.params.initial_storage = 250.0;

    let mut reserves = reference::instance(2, 1);
    reserves.prices = reference::flat_prices(2, 40.0, 10.0, 10.0, 10.0);
    reserves.mode = Mode::FixedReserves {
        fcr_n: vec![1.0, 0.0],
        fcr_d_up: vec![0.0, 2.5],
        fcr_d_down: vec![0.5, 0.0],
    };

    let mut power = reference::instance(2, 2);
    power.prices = reference::flat_prices(2, 40.0, 10.0, 10.0, 10.0);
    power.mode = Mode::FixedPower(vec![6.0, 0.0]);

    vec![
        ("free_t2_s2", free),
        ("capped_t3_s3", capped),
        ("fixed_reserves_t2_s1", reserves),
        ("fixed_power_t2_s2", power),
    ]
}

#[test]
fn golden_lp_files_are_stable() {
    for (name, inst) in golden_instances() {
        let model = build_model(&inst).unwrap();
        let text = emit_lp(&model.milp).unwrap();
        check_file(&golden_dir().join(format!("{name}.lp")), &text);
        for _ in 0..10 {
            assert_eq!(
                emit_lp(&build_model(&inst).unwrap().milp).unwrap(),
                text,
                "{name}"
            );
        }
        let parsed = parse_lp(&text).unwrap();
        assert!(parsed.equivalent(&model.milp), "{name} does not round-trip");
    }
}
