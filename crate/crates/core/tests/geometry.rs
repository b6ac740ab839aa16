use std::f64::consts::PI;

use nspyr::geometry::{
    anomaly_localize, arc_indices, circularity_report, conic_pyramid, perturb_arc, perturb_quadrant,
    perturb_wavy, radial_deviation, refine_curve, sample_circle, AnomalyOptions, PlanarCurve,
};
use nspyr::pyramid::check_reconstruction_stability;
use nspyr::subdivision::{masks, SchemeFamily};

const EPS: f64 = 1e-15;

fn circle(n: usize) -> PlanarCurve {
    sample_circle(n, 1.0, [0.0, 0.0]).unwrap()
}

#[test]
fn circle_verdict_is_invariant_under_rigid_motion() {
    let base = perturb_wavy(&circle(128), 0.02, 5).unwrap();
    let v0 = circularity_report(&base, 3, EPS).unwrap().verdict_scale;
    let moved = circularity_report(&base.translated(3.5, -7.25), 3, EPS)
        .unwrap()
        .verdict_scale;
    assert!((v0 - moved).abs() <= 1e-12, "{v0} vs {moved}");
    for angle in [0.3, 1.0, 2.5] {
        let rot = circularity_report(&base.rotated(angle), 3, EPS)
            .unwrap()
            .verdict_scale;
        assert!((v0 - rot).abs() <= 1e-10, "{v0} vs {rot}");
    }
}

#[test]
fn verdict_grows_with_amplitude() {
    let c = circle(256);
    let scores: Vec<f64> = [0.0, 0.005, 0.01, 0.02, 0.04]
        .iter()
        .map(|&a| {
            circularity_report(&perturb_wavy(&c, a, 8).unwrap(), 4, EPS)
                .unwrap()
                .verdict_scale
        })
        .collect();
    assert!(scores.windows(2).all(|w| w[0] < w[1]), "{scores:?}");
    assert!(scores[0] <= 1e-8);
}

#[test]
fn scaled_circle_scores_as_circle() {
    let c = sample_circle(128, 5.0, [1.0, 2.0]).unwrap();
    assert!(circularity_report(&c, 4, EPS).unwrap().verdict_scale <= 1e-7);
}

#[test]
fn finest_detail_energy_stays_near_the_bump() {
    let n = 256;
    let curve = perturb_quadrant(&circle(n), 0.05, 24).unwrap();
    let p = conic_pyramid(&curve, 4, EPS).unwrap();
    let norms: Vec<f64> = p.detail_norms(4).into_iter().map(|(_, v)| v).collect();
    let inj = arc_indices(n, 1.25 * PI, 1.75 * PI);
    let (lo, hi) = (inj[0] - 3, inj[inj.len() - 1] + 3);
    let total: f64 = norms.iter().map(|v| v * v).sum();
    let inside: f64 = norms[lo..=hi].iter().map(|v| v * v).sum();
    assert!(inside / total >= 0.95, "{}", inside / total);
}

#[test]
fn two_bumps_give_two_ranges() {
    let n = 256;
    let c = perturb_arc(&circle(n), 0.05, 24, 0.2 * PI, 0.6 * PI).unwrap();
    let c = perturb_arc(&c, 0.05, 24, 1.2 * PI, 1.6 * PI).unwrap();
    let r = anomaly_localize(&c, 4, EPS, &AnomalyOptions::default()).unwrap();
    assert_eq!(r.ranges.len(), 2, "{:?}", r.ranges);
    for (range, (lo, hi)) in r.ranges.iter().zip([(0.2 * PI, 0.6 * PI), (1.2 * PI, 1.6 * PI)]) {
        let inj = arc_indices(n, lo, hi);
        let hit = inj.iter().filter(|&&j| range.contains(j)).count();
        assert!(hit as f64 >= 0.9 * inj.len() as f64);
    }
}

#[test]
fn clean_circle_flags_nothing() {
    let r = anomaly_localize(&circle(256), 4, EPS, &AnomalyOptions::default()).unwrap();
    assert!(r.ranges.is_empty());
}

#[test]
fn dropping_details_of_a_circle_keeps_it_round() {
    let p = conic_pyramid(&circle(256), 4, EPS).unwrap();
    let zeroed = p.map_details(|_, d| d.zeros_like());
    let back = PlanarCurve::from_components(&zeroed.synthesize().unwrap()).unwrap();
    assert!(radial_deviation(&back, 1.0, [0.0, 0.0]) <= 1e-8);
}

#[test]
fn scaled_details_obey_reconstruction_bound() {
    let curve = perturb_wavy(&circle(128), 0.03, 6).unwrap();
    let p = conic_pyramid(&curve, 4, EPS).unwrap();
    for s in [0.0, 0.5, 2.0] {
        let q = p.map_details(|_, d| d.scale(s));
        let chk = check_reconstruction_stability(&p, &q).unwrap();
        assert!(chk.holds, "{chk:?}");
    }
}

#[test]
fn conic_refines_nine_points_onto_circle() {
    let nine = circle(9);
    let fam = SchemeFamily::Conic {
        v_init: (2.0 * PI / 9.0).cos(),
    };
    let fine = refine_curve(&nine, &fam, 5).unwrap();
    assert_eq!(fine.len(), 9 * 32);
    assert!(radial_deviation(&fine, 1.0, [0.0, 0.0]) <= 1e-10);
    let spline = refine_curve(
        &nine,
        &SchemeFamily::Stationary {
            taps: masks::cubic_bspline(),
        },
        5,
    )
    .unwrap();
    assert!(radial_deviation(&spline, 1.0, [0.0, 0.0]) >= 1e-3);
}
