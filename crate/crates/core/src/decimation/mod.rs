//! Reverse decimation filters.
//!
//! For a mask `α` the decimation filter `γ` solves `γ * (α↓2) = δ`. The
//! solution has infinite support with geometric decay, so it is computed on
//! a growing window, truncated at `ε` and renormalized to unit sum. The
//! normalized filter `ζ` defines `D_ζ c = ζ * (c↓2)`.

mod banded;

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sequences::{convolve, downsample2, FinSeq, PeriodicSeq, Seq};
use crate::subdivision::Mask;
use banded::BandedMatrix;

/// Number of equispaced frequencies used to test the symbol on the unit circle.
pub const SYMBOL_SAMPLES: usize = 4096;
/// Minimum admissible symbol modulus on the unit circle.
pub const SYMBOL_FLOOR: f64 = 1e-9;
/// Largest half-window tried before giving up.
pub const MAX_WINDOW: usize = 1 << 16;
/// Agreement required between two successive window solutions.
pub const WINDOW_AGREEMENT: f64 = 1e-13;

/// Geometric envelope `|γ_j| <= C λ^{|j|}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c: f64,
    pub lambda: f64,
}

/// Normalized truncated reverse filter and how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecimationFilter {
    pub zeta: FinSeq,
    pub gamma_raw: FinSeq,
    pub epsilon: f64,
    pub residual_l1: f64,
    pub decay: Option<DecayFit>,
    pub source_mask_level: u32,
}

impl DecimationFilter {
    /// Plain downsampling, the reverse of any interpolating scheme.
    pub fn downsampling(epsilon: f64, level: u32) -> Self {
        Self {
            zeta: FinSeq::delta(),
            gamma_raw: FinSeq::delta(),
            epsilon,
            residual_l1: 0.0,
            decay: None,
            source_mask_level: level,
        }
    }

    /// `D_ζ c = ζ * (c↓2)`; a periodic input of period `N` yields period `N/2`.
    pub fn decimate(&self, c: &Seq) -> Result<Seq> {
        match c {
            Seq::Finite(s) => Ok(Seq::Finite(convolve(&self.zeta, &downsample2(s)))),
            Seq::Periodic(s) => Ok(Seq::Periodic(self.decimate_periodic(s)?)),
        }
    }

    pub fn decimate_periodic(&self, c: &PeriodicSeq) -> Result<PeriodicSeq> {
        Ok(c.downsample2()?.filter(&self.zeta))
    }

    /// `||D_ζ||_∞ = ||ζ||_1`.
    pub fn operator_norm_inf(&self) -> f64 {
        self.zeta.norm_l1()
    }

    /// CSV rows `index,zeta,gamma_raw` over the union of both supports.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let supports = [self.zeta.support(), self.gamma_raw.support()];
        let lo = supports.iter().flatten().map(|s| s.0).min();
        let hi = supports.iter().flatten().map(|s| s.1).max();
        if let (Some(lo), Some(hi)) = (lo, hi) {
            for i in lo..=hi {
                let _ = writeln!(out, "{i},{:e},{:e}", self.zeta.get(i), self.gamma_raw.get(i));
            }
        }
        out
    }

    /// Metadata block `{epsilon, residual_l1, decay_C, decay_lambda}`.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "epsilon": self.epsilon,
            "residual_l1": self.residual_l1,
            "decay_C": self.decay.map(|d| d.c),
            "decay_lambda": self.decay.map(|d| d.lambda),
        })
    }
}

/// `α↓2`.
pub fn even_mask(mask: &Mask) -> Result<FinSeq> {
    let even = mask.taps.even_part();
    if even.is_empty() {
        return Err(Error::EmptyEvenPart);
    }
    Ok(even)
}

/// Smallest modulus of the symbol over [`SYMBOL_SAMPLES`] points of the unit
/// circle, together with its winding number around the origin.
fn symbol_scan(a: &FinSeq) -> (f64, i64) {
    let eval = |w: f64| {
        a.iter().fold((0.0, 0.0), |(re, im), (j, v)| {
            let ang = j as f64 * w;
            (re + v * ang.cos(), im + v * ang.sin())
        })
    };
    let mut min_mod = f64::INFINITY;
    let mut total_turn = 0.0;
    let (r0, i0) = eval(0.0);
    let mut prev = i0.atan2(r0);
    for m in 1..=SYMBOL_SAMPLES {
        let (re, im) = eval(2.0 * PI * m as f64 / SYMBOL_SAMPLES as f64);
        min_mod = min_mod.min(re.hypot(im));
        let phase = im.atan2(re);
        let mut step = phase - prev;
        if step > PI {
            step -= 2.0 * PI;
        } else if step < -PI {
            step += 2.0 * PI;
        }
        total_turn += step;
        prev = phase;
    }
    min_mod = min_mod.min(r0.hypot(i0));
    (min_mod, (total_turn / (2.0 * PI)).round() as i64)
}

/// Solves `a * g = δ` for `g` on the index window `center-w ..= center+w`.
fn solve_window(a: &FinSeq, center: i64, w: usize) -> Option<Vec<f64>> {
    let (lo, hi) = a.support()?;
    let n = 2 * w + 1;
    let lower = hi.max(0) as usize;
    let upper = (-lo).max(0) as usize;
    let mut m = BandedMatrix::zeros(n, lower, upper);
    for row in 0..n {
        for (t, v) in a.iter() {
            let col = row as i64 - t;
            if (0..n as i64).contains(&col) {
                m.set(row, col as usize, v);
            }
        }
    }
    let mut rhs = vec![0.0; n];
    let delta_row = -(center - w as i64);
    if !(0..n as i64).contains(&delta_row) {
        return None;
    }
    rhs[delta_row as usize] = 1.0;
    m.solve(rhs)
}

/// Inverse of a finitely supported sequence whose symbol has no zero on the
/// unit circle, accurate well below `epsilon`.
pub fn invert_sequence(a: &FinSeq, epsilon: f64) -> Result<FinSeq> {
    if a.is_empty() {
        return Err(Error::EmptyEvenPart);
    }
    if a.len() == 1 {
        return Ok(FinSeq::new(-a.offset(), vec![1.0 / a.coeffs()[0]]));
    }
    let (min_mod, winding) = symbol_scan(a);
    if min_mod <= SYMBOL_FLOOR {
        return Err(Error::SymbolZeroOnCircle { min_modulus: min_mod });
    }
    // z^{-winding} a(z) has winding number zero, so its finite sections are stable.
    let shifted = a.shift(-winding);
    let (lo, hi) = shifted.support().unwrap();
    let center = -(lo + hi).div_euclid(2);
    let tail_limit = epsilon / 10.0;

    let mut w = (2 * shifted.len()).max(16);
    let mut prev: Option<(usize, Vec<f64>)> = None;
    while w <= MAX_WINDOW {
        let sol = solve_window(&shifted, center, w).ok_or(Error::NoConvergence { window: w })?;
        let tail = sol
            .iter()
            .enumerate()
            .filter(|(k, _)| k.abs_diff(w) > w / 2)
            .fold(0.0f64, |m, (_, v)| m.max(v.abs()));
        let agrees = prev.as_ref().is_some_and(|(pw, p)| {
            p.iter()
                .enumerate()
                .all(|(k, v)| (sol[k + w - pw] - v).abs() <= WINDOW_AGREEMENT)
        });
        if tail < tail_limit && agrees {
            let g = FinSeq::new(center - w as i64, sol);
            return Ok(g.shift(-winding));
        }
        prev = Some((w, sol));
        w *= 2;
    }
    Err(Error::NoConvergence { window: MAX_WINDOW })
}

/// Keeps `γ_j` with `|γ_j| > ε`.
pub fn truncate(gamma: &FinSeq, epsilon: f64) -> FinSeq {
    FinSeq::new(
        gamma.offset(),
        gamma
            .coeffs()
            .iter()
            .map(|&v| if v.abs() > epsilon { v } else { 0.0 })
            .collect(),
    )
}

/// Computes the normalized truncated reverse filter of `mask`.
pub fn solve_gamma(mask: &Mask, epsilon: f64) -> Result<DecimationFilter> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::BadParams(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let even = even_mask(mask)?;
    let gamma = invert_sequence(&even, epsilon)?;
    let gamma_raw = truncate(&gamma, epsilon);
    let total = gamma_raw.sum();
    if total.abs() < 1e-300 {
        return Err(Error::DegenerateParameter {
            what: "sum of truncated filter",
            value: total,
        });
    }
    let zeta = gamma_raw.scale(1.0 / total);
    let residual_l1 = residual_of(&even, &zeta);
    Ok(DecimationFilter {
        decay: decay_fit(&gamma_raw).ok(),
        zeta,
        gamma_raw,
        epsilon,
        residual_l1,
        source_mask_level: mask.level,
    })
}

fn residual_of(even: &FinSeq, zeta: &FinSeq) -> f64 {
    FinSeq::delta().sub(&convolve(even, zeta)).norm_l1()
}

/// `||δ - (α↓2) * ζ||_1`.
pub fn residual_check(filter: &DecimationFilter, mask: &Mask) -> f64 {
    residual_of(&mask.taps.even_part(), &filter.zeta)
}

/// Least-squares fit of `log|γ_j|` against `|j|`; `C` is then raised so that
/// `C λ^{|j|}` bounds every coefficient.
pub fn decay_fit(gamma: &FinSeq) -> Result<DecayFit> {
    let pts: Vec<(f64, f64)> = gamma
        .iter()
        .filter(|(_, v)| *v != 0.0)
        .map(|(j, v)| (j.unsigned_abs() as f64, v.abs().ln()))
        .collect();
    if pts.len() < 5 {
        return Err(Error::FitFailed(format!(
            "need at least 5 nonzero coefficients, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailed("all coefficients share one |j|".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let lambda = (sxy / sxx).exp();
    if !(lambda < 1.0) {
        return Err(Error::FitFailed(format!("fitted ratio {lambda} is not below 1")));
    }
    let log_c = pts
        .iter()
        .map(|(x, y)| y - x * lambda.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        c: log_c.exp(),
        lambda,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subdivision::{masks, FamilyId, SchemeFamily};
    use approx::assert_abs_diff_eq;

    fn stationary(taps: FinSeq) -> Mask {
        Mask::stationary(taps).unwrap()
    }

    #[test]
    fn even_mask_examples() {
        let four = stationary(masks::four_point());
        assert_eq!(even_mask(&four).unwrap(), FinSeq::delta());
        let cubic = stationary(masks::cubic_bspline());
        assert_eq!(
            even_mask(&cubic).unwrap(),
            FinSeq::centered(vec![0.125, 0.75, 0.125])
        );

        let v: f64 = 0.83;
        let m = SchemeFamily::NsCubic {
            v_init: 2.0 * v * v - 1.0,
        }
        .mask_at_level(0)
        .unwrap();
        let d = 2.0 * (v + 1.0).powi(2);
        let want = FinSeq::centered(vec![1.0 / d, (4.0 * v * v + 2.0) / d, 1.0 / d]);
        let got = even_mask(&m).unwrap();
        for i in -1..=1 {
            assert_abs_diff_eq!(got.get(i), want.get(i), epsilon = 1e-15);
        }

        let odd_only = Mask {
            taps: FinSeq::new(1, vec![1.0]),
            level: 0,
            family: FamilyId::Stationary,
        };
        assert_eq!(even_mask(&odd_only), Err(Error::EmptyEvenPart));
    }

    #[test]
    fn interpolating_mask_gives_delta() {
        let f = solve_gamma(&stationary(masks::four_point()), 1e-15).unwrap();
        assert_eq!(f.zeta, FinSeq::delta());
        assert_eq!(f.residual_l1, 0.0);
    }

    #[test]
    fn cubic_bspline_filter_shape() {
        let f = solve_gamma(&stationary(masks::cubic_bspline()), 1e-15).unwrap();
        assert_abs_diff_eq!(f.zeta.get(0), 2f64.sqrt(), epsilon = 1e-13);
        for j in 1..10 {
            assert_abs_diff_eq!(f.zeta.get(j), f.zeta.get(-j), epsilon = 1e-15);
        }
        assert_abs_diff_eq!(
            f.zeta.get(1) / f.zeta.get(0),
            -(3.0 - 2.0 * 2f64.sqrt()),
            epsilon = 1e-13
        );
        assert!(f.residual_l1 <= 1e-13);
        assert_abs_diff_eq!(f.zeta.sum(), 1.0, epsilon = 1e-12);
        assert!(f.gamma_raw.coeffs().iter().all(|v| v.abs() > 1e-15 || *v == 0.0));
    }

    #[test]
    fn coarser_threshold_raises_residual() {
        let m = stationary(masks::cubic_bspline());
        let fine = solve_gamma(&m, 1e-15).unwrap();
        let coarse = solve_gamma(&m, 1e-3).unwrap();
        assert!(coarse.residual_l1 > fine.residual_l1);
        assert_eq!(residual_check(&coarse, &m), coarse.residual_l1);
    }

    #[test]
    fn symbol_zero_is_rejected() {
        // even part {1/2, 1/2} has a zero at z = -1
        let m = Mask {
            taps: FinSeq::new(0, vec![0.5, 0.5, 0.5, 0.5]),
            level: 0,
            family: FamilyId::Stationary,
        };
        assert!(matches!(
            solve_gamma(&m, 1e-15),
            Err(Error::SymbolZeroOnCircle { .. })
        ));
    }

    #[test]
    fn shifted_even_part_is_inverted() {
        // a(z) = z^3 (1 + 0.3 z): winding number 3
        let a = FinSeq::new(3, vec![1.0, 0.3]);
        let g = invert_sequence(&a, 1e-15).unwrap();
        let prod = convolve(&a, &truncate(&g, 1e-17));
        assert!(FinSeq::delta().sub(&prod).norm_l1() < 1e-14);
    }

    #[test]
    fn decimate_examples() {
        let c = PeriodicSeq::new(vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let down = DecimationFilter::downsampling(1e-15, 0);
        assert_eq!(down.decimate_periodic(&c).unwrap().values(), &[1.0, 3.0, 5.0]);

        let f = solve_gamma(&stationary(masks::cubic_bspline()), 1e-15).unwrap();
        let ones = PeriodicSeq::constant(1.0, 64).unwrap();
        let out = f.decimate_periodic(&ones).unwrap();
        assert_eq!(out.period(), 32);
        assert!(out.values().iter().all(|v| (v - 1.0).abs() < 1e-13));

        let odd = PeriodicSeq::constant(1.0, 7).unwrap();
        assert_eq!(f.decimate_periodic(&odd), Err(Error::OddPeriod(7)));
    }

    #[test]
    fn decimation_recovers_refined_data() {
        let m = stationary(masks::cubic_bspline());
        let f = solve_gamma(&m, 1e-15).unwrap();
        let c = FinSeq::new(-4, vec![0.3, -0.8, 0.1, 0.9, -0.2, 0.5, 0.7, -0.6, 0.4]);
        let back = f.decimate(&Seq::Finite(m.refine_finite(&c))).unwrap();
        let Seq::Finite(back) = back else { unreachable!() };
        let tol = f.residual_l1 * c.norm_inf() + 1e-15;
        for i in -4..=4 {
            assert!((back.get(i) - c.get(i)).abs() <= tol);
        }
    }

    #[test]
    fn decay_fit_examples() {
        let lam = 3.0 - 2.0 * 2f64.sqrt();
        let analytic = FinSeq::from_pairs(
            (-19..=19).map(|j: i64| (j, 2f64.sqrt() * (-lam).powi(j.unsigned_abs() as i32))),
        );
        let fit = decay_fit(&analytic).unwrap();
        assert!((fit.lambda - lam).abs() < 1e-3);
        assert!(matches!(decay_fit(&FinSeq::delta()), Err(Error::FitFailed(_))));
        let growing = FinSeq::new(0, vec![1.0, 2.0, 4.0, 8.0, 16.0]);
        assert!(matches!(decay_fit(&growing), Err(Error::FitFailed(_))));
    }

    #[test]
    fn decay_envelope_bounds_solution() {
        let f = solve_gamma(&stationary(masks::cubic_bspline()), 1e-15).unwrap();
        let fit = f.decay.unwrap();
        for (j, g) in f.gamma_raw.iter() {
            assert!(g.abs() / (fit.c * fit.lambda.powi(j.unsigned_abs() as i32)) <= 1.0 + 1e-6);
        }
    }

    #[test]
    fn export_formats() {
        let f = solve_gamma(&stationary(masks::cubic_bspline()), 1e-3).unwrap();
        let csv = f.to_csv();
        assert_eq!(csv.lines().count(), f.zeta.len());
        assert!(csv.lines().all(|l| l.split(',').count() == 3));
        let meta = f.metadata_json();
        for key in ["epsilon", "residual_l1", "decay_C", "decay_lambda"] {
            assert!(meta.get(key).is_some());
        }
    }

    #[test]
    fn rejects_bad_epsilon() {
        let m = stationary(masks::cubic_bspline());
        assert!(matches!(solve_gamma(&m, 0.0), Err(Error::BadParams(_))));
        assert!(matches!(solve_gamma(&m, 1.5), Err(Error::BadParams(_))));
    }
}
