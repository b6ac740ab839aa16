use std::f64::consts::PI;

use nspyr::decimation::solve_gamma;
use nspyr::pyramid::{analyze, LevelSchedule, PyramidConfig};
use nspyr::sequences::{FinSeq, PeriodicSeq, Seq};
use nspyr::subdivision::{masks, CurveKind, FamilyId, SchemeFamily};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = SchemeFamily> {
    prop_oneof![
        Just(SchemeFamily::Stationary {
            taps: masks::cubic_bspline()
        }),
        Just(SchemeFamily::Stationary {
            taps: masks::four_point()
        }),
        (0.0f64..1.2).prop_map(|theta| SchemeFamily::Ns4Point { theta }),
        (0.05f64..1.2).prop_map(|t| SchemeFamily::NsCubic { v_init: t.cos() }),
        (0.05f64..0.8).prop_map(|t| SchemeFamily::Conic { v_init: t.cos() }),
        (0.05f64..0.8).prop_map(|t| SchemeFamily::Conic { v_init: t.cosh() }),
    ]
}

fn periodic_data(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0f64..10.0, len)
}

fn periodic(v: Vec<f64>) -> Seq {
    Seq::Periodic(PeriodicSeq::new(v).unwrap())
}

fn max_diff(a: &Seq, b: &Seq) -> f64 {
    a.sub(b).unwrap().norm_inf()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn masks_split_into_unit_parity_sums(fam in family(), k in 0u32..6) {
        let m = fam.mask_at_level(k).unwrap();
        if fam.id() == FamilyId::NsCubic {
            let v = fam.tension_at_level(k).unwrap().unwrap();
            let q = ((v - 1.0) / (v + 1.0)).powi(2);
            let (e, o) = m.parity_sums();
            prop_assert!((e - (1.0 - q)).abs() < 1e-12 || (e - (1.0 + q)).abs() < 1e-12);
            prop_assert!((e + o - 2.0).abs() < 1e-12);
        } else {
            m.check_parity().unwrap();
        }
    }

    #[test]
    fn periodic_round_trip(fam in family(), levels in 1u32..5, seed in periodic_data(128)) {
        let n = 8usize << levels;
        let c = periodic(seed.into_iter().cycle().take(n).collect());
        let cfg = PyramidConfig::new(fam, levels).periodic();
        let p = analyze(std::slice::from_ref(&c), &cfg).unwrap();
        let back = p.synthesize().unwrap();
        prop_assert!(max_diff(&back[0], &c) <= 1e-10 * (1.0 + c.norm_inf()));
    }

    #[test]
    fn finite_round_trip(fam in family(), levels in 1u32..4, offset in -20i64..20, data in prop::collection::vec(-5.0f64..5.0, 1..60)) {
        let c = Seq::Finite(FinSeq::new(offset, data));
        let cfg = PyramidConfig::new(fam, levels);
        let p = analyze(std::slice::from_ref(&c), &cfg).unwrap();
        let back = p.synthesize().unwrap();
        prop_assert!(max_diff(&back[0], &c) <= 1e-10 * (1.0 + c.norm_inf()));
    }

    #[test]
    fn analysis_is_linear(fam in family(), x in periodic_data(64), y in periodic_data(64), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let cfg = PyramidConfig::new(fam, 3).periodic();
        let (sx, sy) = (periodic(x), periodic(y));
        let mix = sx.axpby(a, &sy, b).unwrap();
        let (px, py, pm) = (
            analyze(&[sx], &cfg).unwrap(),
            analyze(&[sy], &cfg).unwrap(),
            analyze(&[mix], &cfg).unwrap(),
        );
        let tol = 1e-9;
        let want = px.coarse[0].axpby(a, &py.coarse[0], b).unwrap();
        prop_assert!(max_diff(&pm.coarse[0], &want) < tol);
        for l in 0..3 {
            let want = px.details[l][0].axpby(a, &py.details[l][0], b).unwrap();
            prop_assert!(max_diff(&pm.details[l][0], &want) < tol);
        }
    }

    #[test]
    fn filters_have_unit_sum(fam in family(), k in 0u32..4) {
        let m = fam.mask_at_level(k).unwrap();
        let f = solve_gamma(&m, 1e-15).unwrap();
        prop_assert!((f.zeta.sum() - 1.0).abs() < 1e-12);
        prop_assert!(f.zeta.norm_l1() >= 1.0 - 1e-12);
    }

    #[test]
    fn residual_shrinks_with_epsilon(fam in family(), i in 0usize..4) {
        let eps = [1e-4, 1e-7, 1e-10, 1e-13, 1e-15];
        let m = fam.mask_at_level(0).unwrap();
        let coarse = solve_gamma(&m, eps[i]).unwrap();
        let fine = solve_gamma(&m, eps[i + 1]).unwrap();
        prop_assert!(fine.residual_l1 <= coarse.residual_l1 + 1e-14);
        prop_assert!(fine.zeta.len() >= coarse.zeta.len());
    }

    #[test]
    fn periodic_refinement_matches_finite(fam in family(), k in 0u32..3, data in periodic_data(16)) {
        let m = fam.mask_at_level(k).unwrap();
        let n = data.len() as i64;
        let p = m.refine(&periodic(data.clone())).unwrap();
        // three copies are enough to cover the support around the middle one
        let tiled: Vec<f64> = data.iter().cycle().take(3 * n as usize).copied().collect();
        let f = m.refine_finite(&FinSeq::new(-n, tiled));
        for j in 0..2 * n {
            prop_assert!((p.get(j) - f.get(j)).abs() < 1e-11);
        }
    }

    #[test]
    fn resample_schedule_matches_advance_on_circles(levels in 1u32..5, extra in 0u32..3) {
        let n = 8usize << (levels + extra);
        let theta = 2.0 * PI / (n >> levels) as f64;
        let advance = PyramidConfig::new(SchemeFamily::Conic { v_init: theta.cos() }, levels).periodic();
        let resample = advance.clone().with_schedule(LevelSchedule::Resample(CurveKind::Trigonometric));
        let x = periodic((0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect());
        let (a, b) = (analyze(std::slice::from_ref(&x), &advance).unwrap(), analyze(&[x], &resample).unwrap());
        for l in 0..levels as usize {
            prop_assert!(max_diff(&a.details[l][0], &b.details[l][0]) < 1e-12);
        }
    }
}

#[test]
fn interpolating_families_keep_even_samples() {
    for fam in [
        SchemeFamily::Ns4Point { theta: 0.7 },
        SchemeFamily::Stationary {
            taps: masks::four_point(),
        },
    ] {
        let data: Vec<f64> = (0..32).map(|i| ((i * 13) % 7) as f64).collect();
        let p = analyze(&[periodic(data)], &PyramidConfig::new(fam, 3).periodic()).unwrap();
        for level in &p.details {
            let d = match &level[0] {
                Seq::Periodic(d) => d.values().to_vec(),
                Seq::Finite(_) => unreachable!(),
            };
            assert!(d.iter().step_by(2).all(|&v| v == 0.0));
        }
    }
}
