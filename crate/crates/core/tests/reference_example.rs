//! The 40-point military-personnel signals with window 20 and grouping
//! {1,2} {3,4} {5,6} {7..20}.

mod common;

use common::{max_abs_diff, values};
use ssamask_core::anonymity::{
    detect_extremes, generate_replacement_trend, mask_signal, MaskPlan, TrendSpec,
};
use ssamask_core::microdata::QuantitySignal;
use ssamask_core::ssa::{
    advise_grouping, decompose_series, embed, estimate_period, reconstruct, Grouping,
};
use ssamask_core::{Series, Series32, Series64};

const TOL: f64 = 0.005;

fn q_hat() -> Series64 {
    Series::new(values("reference/q_hat.txt"), "q_hat").unwrap()
}

fn grouping() -> Grouping {
    "1,2|3,4|5,6|7-20"
        .parse::<Grouping>()
        .unwrap()
        .with_trend(Some(0))
        .unwrap()
}

fn plan() -> MaskPlan<f64> {
    MaskPlan::new(
        20,
        grouping(),
        TrendSpec::Explicit {
            values: values("reference/q_hat_trend_replacement.txt"),
        },
    )
    .unwrap()
}

#[test]
fn trajectory_endpoints() {
    let x = embed(&q_hat(), 20).unwrap();
    assert_eq!((x.window_length(), x.lag_count()), (20, 21));
    assert_eq!(x.get(0, 0), 2.0);
    assert_eq!(x.get(19, 20), 3.0);
}

#[test]
fn leading_component_values() {
    let dec = decompose_series(&q_hat(), 20).unwrap();
    let set = reconstruct(&dec, &grouping()).unwrap();
    let lead: Vec<f64> = set.components().iter().map(|c| c.values()[0]).collect();
    assert!(max_abs_diff(&lead, &[-10.345, -2.600, 14.835, 0.110]) < TOL);
    // The four leading values add back to q̂[0] = 2.
    assert!((lead.iter().sum::<f64>() - 2.0).abs() < 1e-9);
}

#[test]
fn components_match_printed_vectors() {
    let dec = decompose_series(&q_hat(), 20).unwrap();
    let set = reconstruct(&dec, &grouping()).unwrap();
    for k in 2..=4 {
        let printed = values(&format!("reference/q_hat_component_{k}.txt"));
        let d = max_abs_diff(set.components()[k - 1].values(), &printed);
        assert!(d < TOL, "component {k}: {d}");
    }
    let trend = set.components()[0].values();
    let mut printed = values("reference/q_hat_component_1.txt");
    assert_eq!(printed.len(), 39);
    printed.insert(11, trend[11]);
    assert!(max_abs_diff(trend, &printed) < TOL);
    assert!((trend[11] - 105.856).abs() < TOL);
}

#[test]
fn spectrum_pairs() {
    let dec = decompose_series(&q_hat(), 20).unwrap();
    let sv = dec.singular_values();
    assert_eq!(sv.len(), 20);
    assert!(sv.windows(2).all(|w| w[0] >= w[1]));
    let adv = advise_grouping(&dec, 0.1, 1e-10);
    assert_eq!(adv.pairs, vec![(3, 4), (5, 6)]);
    assert_eq!(adv.trend_candidates, vec![1, 2]);
}

#[test]
fn extremes_of_raw_signal() {
    let q = QuantitySignal::from_values(&values("signals/q.txt"), "q").unwrap();
    let top = detect_extremes(&q, 4);
    assert_eq!(top, vec![(4, 713), (5, 675), (6, 604), (3, 589)]);
}

#[test]
fn masking_reproduces_printed_signal() {
    let q = QuantitySignal::from_values(&values("reference/q_hat.txt"), "q_hat").unwrap();
    let out = mask_signal(&q, &plan(), None).unwrap();
    let printed: Vec<u64> = values("reference/q_tilde.txt")
        .iter()
        .map(|&v| v as u64)
        .collect();
    assert_eq!(out.masked.counts(), printed.as_slice());
    // 223 − 205.501 + 109.656 = 127.155 → 127
    assert!((out.unrounded[2] - 127.155).abs() < 0.001);
    assert!(out.diagnostics.clamped.is_empty());

    let head_before = q.counts()[..10].iter().max().copied().unwrap();
    let head_after = out.masked.counts()[..10].iter().max().copied().unwrap();
    assert_eq!(head_before, 241);
    assert!(head_after <= 133);
}

#[test]
fn redecomposition_matches_printed_components() {
    let qt = Series::new(values("reference/q_tilde.txt"), "q_tilde").unwrap();
    let dec = decompose_series(&qt, 20).unwrap();
    let set = reconstruct(&dec, &grouping()).unwrap();
    for k in 1..=4 {
        let printed = values(&format!("reference/q_tilde_component_{k}.txt"));
        let d = max_abs_diff(set.components()[k - 1].values(), &printed);
        assert!(d < TOL, "component {k}: {d}");
    }
}

#[test]
fn plateau_strategy_on_extracted_trend() {
    let dec = decompose_series(&q_hat(), 20).unwrap();
    let set = reconstruct(&dec, &grouping()).unwrap();
    let trend = &set.components()[0];
    let spec = TrendSpec::PlateauSmooth {
        cap: 124.0,
        half_width: 3,
    };
    let out = generate_replacement_trend(trend, &spec).unwrap();
    let v = out.values();
    assert!(v.iter().copied().fold(f64::MIN, f64::max) <= 124.0);
    for (i, (a, b)) in v.iter().zip(trend.values()).enumerate().skip(12) {
        assert!((a - b).abs() <= 1e-9, "index {}", i + 1);
    }
}

#[test]
fn first_periodic_component_period() {
    let dec = decompose_series(&q_hat(), 20).unwrap();
    let set = reconstruct(&dec, &grouping()).unwrap();
    let p2 = estimate_period(&set.components()[1]).unwrap();
    assert!((18.0..=22.0).contains(&p2), "{p2}");
    let p3 = estimate_period(&set.components()[2]).unwrap();
    assert!(p3 <= 5.0, "{p3}");
}

#[test]
fn single_precision_tracks_double() {
    let q32 = Series32::new(
        values("reference/q_hat.txt")
            .iter()
            .map(|&v| v as f32)
            .collect(),
        "q",
    )
    .unwrap();
    let dec32 = decompose_series(&q32, 20).unwrap();
    let set32 = reconstruct(&dec32, &grouping()).unwrap();
    let dec64 = decompose_series(&q_hat(), 20).unwrap();
    let set64 = reconstruct(&dec64, &grouping()).unwrap();
    for (a, b) in set32.components().iter().zip(set64.components()) {
        let a: Vec<f64> = a.values().iter().map(|&v| v as f64).collect();
        assert!(max_abs_diff(&a, b.values()) < 0.05);
    }
}
