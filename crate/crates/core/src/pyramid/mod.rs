//! Multiscale analysis and synthesis.
//!
//! Analysis runs from the finest level `J` down to `1`:
//! `c^(ℓ-1) = D_ζ^(ℓ) c^(ℓ)` and `d^(ℓ) = c^(ℓ) - S_α^(ℓ) c^(ℓ-1)`.
//! Synthesis inverts it with `c^(ℓ) = S_α^(ℓ) c^(ℓ-1) + d^(ℓ)`.
//! Vector-valued data (planar curves) is handled one component at a time
//! with the same operators; detail magnitudes are Euclidean across components.

mod stability;

pub use stability::{
    check_decomposition_stability, check_reconstruction_stability, detail_bound,
    estimate_residual_operator_norm, reconstruction_stability_bound, DecompositionCheck, DetailLevelCheck,
    ReconstructionCheck,
};

use serde::{Deserialize, Serialize};

use crate::decimation::{solve_gamma, DecimationFilter};
use crate::error::{Error, Result};
use crate::sequences::{FinSeq, Seq};
use crate::subdivision::{CurveKind, Mask, SchemeFamily};

pub const DEFAULT_EPSILON: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Finite,
    Periodic,
}

/// How the mask for each pyramid level is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "curve", rename_all = "lowercase")]
pub enum LevelSchedule {
    /// Level `ℓ` uses the family mask after `ℓ-1` refinement steps.
    #[default]
    Advance,
    /// Level `ℓ` re-seeds the family from the sample count `N_{ℓ-1}` of the
    /// coarser level and uses its first-step mask. Periodic data only.
    Resample(CurveKind),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PyramidConfig {
    pub family: SchemeFamily,
    pub levels: u32,
    pub epsilon: f64,
    pub boundary: Boundary,
    pub schedule: LevelSchedule,
}

impl PyramidConfig {
    pub fn new(family: SchemeFamily, levels: u32) -> Self {
        Self {
            family,
            levels,
            epsilon: DEFAULT_EPSILON,
            boundary: Boundary::Finite,
            schedule: LevelSchedule::Advance,
        }
    }

    pub fn periodic(mut self) -> Self {
        self.boundary = Boundary::Periodic;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_schedule(mut self, schedule: LevelSchedule) -> Self {
        self.schedule = schedule;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::BadParams("number of levels must be at least 1".into()));
        }
        if self.levels > 40 {
            return Err(Error::BadParams(format!("{} levels is too many", self.levels)));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::BadParams(format!(
                "epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        if matches!(self.schedule, LevelSchedule::Resample(_)) && self.boundary != Boundary::Periodic {
            return Err(Error::BadParams(
                "per-level re-seeding needs periodic data to know the sample count".into(),
            ));
        }
        Ok(())
    }
}

/// Provenance of the operators used at one pyramid level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelParams {
    pub level: u32,
    pub mask_level: u32,
    /// Tension `v` or angle `φ` the mask was built from, if any.
    pub parameter: Option<f64>,
    pub mask: FinSeq,
    pub zeta: FinSeq,
    pub residual_l1: f64,
    pub interpolating: bool,
}

/// Masks and filters for every level, computed once per analysis.
#[derive(Clone, Debug)]
pub struct PyramidPlan {
    pub config: PyramidConfig,
    pub masks: Vec<Mask>,
    pub filters: Vec<DecimationFilter>,
}

impl PyramidPlan {
    /// `fine_period` is the sample count at level `J` for periodic data.
    pub fn new(config: &PyramidConfig, fine_period: Option<usize>) -> Result<Self> {
        config.validate()?;
        let j = config.levels;
        if let Some(n) = fine_period {
            let step = 1usize << j;
            if n % step != 0 {
                return Err(Error::PeriodNotDivisible {
                    period: n,
                    levels: j as usize,
                });
            }
        }
        let mut masks = Vec::with_capacity(j as usize);
        let mut filters = Vec::with_capacity(j as usize);
        for level in 1..=j {
            let mask = match config.schedule {
                LevelSchedule::Advance => config.family.mask_at_level(level - 1)?,
                LevelSchedule::Resample(kind) => {
                    let n = fine_period.ok_or_else(|| {
                        Error::BadParams("per-level re-seeding needs the sample count".into())
                    })?;
                    let coarse_count = n >> (j - level + 1);
                    config
                        .family
                        .retuned(kind.for_samples(coarse_count))?
                        .mask_at_level(0)?
                }
            };
            let filter = if mask.is_interpolating() {
                DecimationFilter::downsampling(config.epsilon, mask.level)
            } else {
                solve_gamma(&mask, config.epsilon)?
            };
            masks.push(mask);
            filters.push(filter);
        }
        Ok(Self {
            config: config.clone(),
            masks,
            filters,
        })
    }
}

fn family_parameter(family: &SchemeFamily, k: u32) -> Result<Option<f64>> {
    Ok(match family {
        SchemeFamily::Stationary { .. } => None,
        SchemeFamily::Ns4Point { theta } => Some(theta * 2f64.powi(-(k as i32))),
        SchemeFamily::NsCubic { .. } | SchemeFamily::Conic { .. } => family.tension_at_level(k)?,
    })
}

/// Coarse data plus details for every level, for one or more components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pyramid {
    pub family: SchemeFamily,
    pub epsilon: f64,
    pub boundary: Boundary,
    pub schedule: LevelSchedule,
    /// `c^(0)`, one sequence per component.
    pub coarse: Vec<Seq>,
    /// `details[ℓ-1][component] = d^(ℓ)`.
    pub details: Vec<Vec<Seq>>,
    pub level_params: Vec<LevelParams>,
}

/// Per-level detail statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub level: u32,
    /// `sup_k |d_k|` with `|·|` Euclidean across components.
    pub sup_norm: f64,
    /// `sum_k |d_k|`.
    pub l1_norm: f64,
    /// `l1_norm` divided by the number of coefficients.
    pub avg_l2: f64,
    /// `sup_norm(ℓ) / sup_norm(ℓ+1)`; absent at the finest level.
    pub ratio: Option<f64>,
}

fn check_components(data: &[Seq], boundary: Boundary) -> Result<Option<usize>> {
    let first = data
        .first()
        .ok_or_else(|| Error::ShapeMismatch("no components given".into()))?;
    let period = first.period();
    for c in data {
        let ok = match (c, boundary) {
            (Seq::Finite(_), Boundary::Finite) => true,
            (Seq::Periodic(p), Boundary::Periodic) => Some(p.period()) == period,
            _ => false,
        };
        if !ok {
            return Err(Error::ShapeMismatch(
                "components must share the boundary mode and period".into(),
            ));
        }
    }
    Ok(period)
}

/// Decomposes `components` (all of the same shape) into a pyramid.
pub fn analyze(components: &[Seq], config: &PyramidConfig) -> Result<Pyramid> {
    let period = check_components(components, config.boundary)?;
    let plan = PyramidPlan::new(config, period)?;
    analyze_with_plan(components, &plan)
}

/// Scalar convenience wrapper around [`analyze`].
pub fn analyze_scalar(c: &Seq, config: &PyramidConfig) -> Result<Pyramid> {
    analyze(std::slice::from_ref(c), config)
}

pub fn analyze_with_plan(components: &[Seq], plan: &PyramidPlan) -> Result<Pyramid> {
    let period = check_components(components, plan.config.boundary)?;
    let j = plan.config.levels as usize;
    if plan.masks.len() != j {
        return Err(Error::ShapeMismatch("plan does not match its level count".into()));
    }
    if let Some(n) = period {
        if n % (1usize << j) != 0 {
            return Err(Error::PeriodNotDivisible { period: n, levels: j });
        }
    }
    let mut current: Vec<Seq> = components.to_vec();
    let mut details = vec![Vec::new(); j];
    for level in (1..=j).rev() {
        let mask = &plan.masks[level - 1];
        let filter = &plan.filters[level - 1];
        let mut coarser = Vec::with_capacity(current.len());
        let mut level_details = Vec::with_capacity(current.len());
        for c in &current {
            let down = filter.decimate(c)?;
            let predicted = mask.refine(&down)?;
            level_details.push(c.sub(&predicted)?);
            coarser.push(down);
        }
        details[level - 1] = level_details;
        current = coarser;
    }
    let level_params = level_params(plan, period)?;
    Ok(Pyramid {
        family: plan.config.family.clone(),
        epsilon: plan.config.epsilon,
        boundary: plan.config.boundary,
        schedule: plan.config.schedule,
        coarse: current,
        details,
        level_params,
    })
}

fn level_params(plan: &PyramidPlan, fine_period: Option<usize>) -> Result<Vec<LevelParams>> {
    let j = plan.config.levels;
    let mut out = Vec::with_capacity(plan.masks.len());
    for (i, (mask, filter)) in plan.masks.iter().zip(&plan.filters).enumerate() {
        let level = i as u32 + 1;
        let parameter = match plan.config.schedule {
            LevelSchedule::Advance => family_parameter(&plan.config.family, mask.level)?,
            LevelSchedule::Resample(kind) => {
                let n = fine_period.unwrap_or(0) >> (j - level + 1);
                family_parameter(&plan.config.family.retuned(kind.for_samples(n))?, 0)?
            }
        };
        out.push(LevelParams {
            level,
            mask_level: mask.level,
            parameter,
            mask: mask.taps.clone(),
            zeta: filter.zeta.clone(),
            residual_l1: filter.residual_l1,
            interpolating: mask.is_interpolating(),
        });
    }
    Ok(out)
}

impl Pyramid {
    pub fn levels(&self) -> u32 {
        self.details.len() as u32
    }

    pub fn components(&self) -> usize {
        self.coarse.len()
    }

    /// Mask used to predict level `level` (1-based).
    pub fn mask(&self, level: u32) -> Result<Mask> {
        let p = self
            .level_params
            .get(level as usize - 1)
            .ok_or_else(|| Error::ShapeMismatch(format!("no parameters for level {level}")))?;
        Ok(Mask {
            taps: p.mask.clone(),
            level: p.mask_level,
            family: self.family.id(),
        })
    }

    /// Checks the component counts and, for periodic data, that
    /// `period(d^(ℓ)) = period(c^(0)) 2^ℓ`.
    pub fn validate_shape(&self) -> Result<()> {
        let comps = self.coarse.len();
        check_components(&self.coarse, self.boundary)?;
        if self.level_params.len() != self.details.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} detail levels but {} level parameter records",
                self.details.len(),
                self.level_params.len()
            )));
        }
        for (i, level) in self.details.iter().enumerate() {
            if level.len() != comps {
                return Err(Error::ShapeMismatch(format!(
                    "level {} has {} components, coarse has {comps}",
                    i + 1,
                    level.len()
                )));
            }
            let period = check_components(level, self.boundary)?;
            if let (Some(p), Some(p0)) = (period, self.coarse[0].period()) {
                if p != p0 << (i + 1) {
                    return Err(Error::ShapeMismatch(format!(
                        "level {} has period {p}, expected {}",
                        i + 1,
                        p0 << (i + 1)
                    )));
                }
            }
        }
        Ok(())
    }

    /// Reconstructs the finest level, one sequence per component.
    pub fn synthesize(&self) -> Result<Vec<Seq>> {
        self.validate_shape()?;
        let mut current = self.coarse.clone();
        for level in 1..=self.levels() {
            let mask = self.mask(level)?;
            current = current
                .iter()
                .zip(&self.details[level as usize - 1])
                .map(|(c, d)| mask.refine(c)?.add(d))
                .collect::<Result<_>>()?;
        }
        Ok(current)
    }

    /// Copy with every detail sequence passed through `f(level, seq)`.
    pub fn map_details(&self, mut f: impl FnMut(u32, &Seq) -> Seq) -> Self {
        let mut out = self.clone();
        for (i, level) in out.details.iter_mut().enumerate() {
            for d in level.iter_mut() {
                *d = f(i as u32 + 1, d);
            }
        }
        out
    }

    /// Indices and Euclidean norms `|d^(ℓ)_k|` over the stored range.
    pub fn detail_norms(&self, level: u32) -> Vec<(i64, f64)> {
        let Some(comps) = self.details.get(level as usize - 1) else {
            return Vec::new();
        };
        let ranges: Vec<(i64, i64)> = comps.iter().filter_map(Seq::index_range).collect();
        let (Some(lo), Some(hi)) = (ranges.iter().map(|r| r.0).min(), ranges.iter().map(|r| r.1).max())
        else {
            return Vec::new();
        };
        (lo..=hi)
            .map(|k| {
                let sq: f64 = comps.iter().map(|d| d.get(k).powi(2)).sum();
                (k, sq.sqrt())
            })
            .collect()
    }

    /// `sup_norm`, `l1_norm`, `avg_l2` and consecutive ratios per level.
    pub fn detail_decay_report(&self) -> Vec<LevelStats> {
        let mut stats: Vec<LevelStats> = (1..=self.levels())
            .map(|level| {
                let norms = self.detail_norms(level);
                let sup_norm = norms.iter().fold(0.0f64, |m, n| m.max(n.1));
                let l1_norm: f64 = norms.iter().map(|n| n.1).sum();
                let avg_l2 = if norms.is_empty() {
                    0.0
                } else {
                    l1_norm / norms.len() as f64
                };
                LevelStats {
                    level,
                    sup_norm,
                    l1_norm,
                    avg_l2,
                    ratio: None,
                }
            })
            .collect();
        for i in 0..stats.len().saturating_sub(1) {
            let next = stats[i + 1].sup_norm;
            stats[i].ratio = (next > 0.0).then(|| stats[i].sup_norm / next);
        }
        stats
    }

    /// `sup` over components of `||c^(0)||_∞`.
    pub fn coarse_norm_inf(&self) -> f64 {
        self.coarse.iter().fold(0.0, |m, c| m.max(c.norm_inf()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("pyramid serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        })?;
        p.validate_shape()?;
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequences::PeriodicSeq;
    use crate::subdivision::{masks, FamilyId};
    use std::f64::consts::PI;

    fn periodic(values: Vec<f64>) -> Seq {
        Seq::Periodic(PeriodicSeq::new(values).unwrap())
    }

    fn wiggle(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let x = i as f64;
                (0.37 * x).sin() + 0.2 * (1.3 * x).cos() + 0.01 * x
            })
            .collect()
    }

    fn max_diff(a: &Seq, b: &Seq) -> f64 {
        a.sub(b).unwrap().norm_inf()
    }

    fn families() -> Vec<SchemeFamily> {
        vec![
            SchemeFamily::stationary(masks::cubic_bspline()).unwrap(),
            SchemeFamily::Ns4Point {
                theta: 2.0 * PI / 16.0,
            },
            SchemeFamily::ns_cubic((2.0 * PI / 16.0).cos()).unwrap(),
            SchemeFamily::conic((2.0 * PI / 16.0).cos()).unwrap(),
        ]
    }

    #[test]
    fn round_trip_periodic_and_finite() {
        for family in families() {
            for levels in 1..=3 {
                let c = periodic(wiggle(64));
                let cfg = PyramidConfig::new(family.clone(), levels).periodic();
                let p = analyze_scalar(&c, &cfg).unwrap();
                assert_eq!(p.coarse[0].period(), Some(64 >> levels));
                let back = p.synthesize().unwrap();
                assert!(max_diff(&back[0], &c) <= 1e-12 * 3.0);

                let c = Seq::Finite(FinSeq::new(-5, wiggle(40)));
                let p = analyze_scalar(&c, &PyramidConfig::new(family.clone(), levels)).unwrap();
                let back = p.synthesize().unwrap();
                assert!(max_diff(&back[0], &c) <= 1e-12 * 3.0);
            }
        }
    }

    #[test]
    fn interpolating_details_vanish_on_even_indices() {
        let c = periodic(wiggle(32));
        let cfg = PyramidConfig::new(SchemeFamily::Ns4Point { theta: 0.3 }, 1).periodic();
        let p = analyze_scalar(&c, &cfg).unwrap();
        let Seq::Periodic(d) = &p.details[0][0] else {
            unreachable!()
        };
        assert!(d.values().iter().step_by(2).all(|&v| v == 0.0));
        assert!(d.values().iter().skip(1).step_by(2).any(|&v| v != 0.0));
    }

    #[test]
    fn constants_have_no_details() {
        for family in families().into_iter().filter(|f| f.id() != FamilyId::NsCubic) {
            let cfg = PyramidConfig::new(family, 3).periodic();
            let p = analyze_scalar(&periodic(vec![2.5; 48]), &cfg).unwrap();
            for level in p.detail_decay_report() {
                assert!(level.sup_norm <= 1e-12, "{level:?}");
            }
        }
    }

    #[test]
    fn ns_cubic_does_not_reproduce_constants() {
        // its parity sums are 1 ± ((v-1)/(v+1))^2, so a constant picks up an
        // alternating component of that size on refinement
        let v_init = (2.0 * PI / 16.0).cos();
        let fam = SchemeFamily::ns_cubic(v_init).unwrap();
        let v = fam.tension_at_level(0).unwrap().unwrap();
        let q = ((v - 1.0) / (v + 1.0)).powi(2);
        let mask = fam.mask_at_level(0).unwrap();
        let (even, odd) = mask.parity_sums();
        assert!((even - (1.0 + q)).abs() < 1e-15 && (odd - (1.0 - q)).abs() < 1e-15);
        let p = analyze_scalar(&periodic(vec![1.0; 32]), &PyramidConfig::new(fam, 1).periodic()).unwrap();
        assert!(p.detail_decay_report()[0].sup_norm > 0.1 * q);
    }

    #[test]
    fn period_must_be_divisible() {
        let cfg = PyramidConfig::new(SchemeFamily::Ns4Point { theta: 0.0 }, 3).periodic();
        assert_eq!(
            analyze_scalar(&periodic(wiggle(20)), &cfg).unwrap_err(),
            Error::PeriodNotDivisible {
                period: 20,
                levels: 3
            }
        );
    }

    #[test]
    fn zero_levels_rejected() {
        let cfg = PyramidConfig::new(SchemeFamily::Ns4Point { theta: 0.0 }, 0).periodic();
        assert!(matches!(
            analyze_scalar(&periodic(wiggle(8)), &cfg),
            Err(Error::BadParams(_))
        ));
    }

    #[test]
    fn resample_needs_periodic_data() {
        let cfg = PyramidConfig::new(SchemeFamily::conic(0.5).unwrap(), 2)
            .with_schedule(LevelSchedule::Resample(CurveKind::Trigonometric));
        let c = Seq::Finite(FinSeq::new(0, wiggle(16)));
        assert!(matches!(analyze_scalar(&c, &cfg), Err(Error::BadParams(_))));
    }

    #[test]
    fn resample_records_per_level_seed() {
        let cfg = PyramidConfig::new(SchemeFamily::conic(0.5).unwrap(), 3)
            .periodic()
            .with_schedule(LevelSchedule::Resample(CurveKind::Trigonometric));
        let p = analyze_scalar(&periodic(wiggle(64)), &cfg).unwrap();
        for lp in &p.level_params {
            let coarse = 64usize >> (3 - lp.level + 1);
            let want = (PI / coarse as f64).cos();
            assert!((lp.parameter.unwrap() - want).abs() < 1e-15);
            assert_eq!(lp.mask_level, 0);
        }
    }

    #[test]
    fn synthesis_rejects_bad_shapes() {
        let cfg = PyramidConfig::new(SchemeFamily::Ns4Point { theta: 0.0 }, 2).periodic();
        let mut p = analyze_scalar(&periodic(wiggle(16)), &cfg).unwrap();
        p.details[1][0] = periodic(vec![0.0; 12]);
        assert!(matches!(p.synthesize(), Err(Error::ShapeMismatch(_))));
        p.details.pop();
        assert!(matches!(p.synthesize(), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn json_round_trip_is_exact() {
        let cfg = PyramidConfig::new(SchemeFamily::ns_cubic(0.9).unwrap(), 2).periodic();
        let p = analyze(&[periodic(wiggle(16)), periodic(wiggle(16))], &cfg).unwrap();
        let text = p.to_json();
        let back = Pyramid::from_json(&text).unwrap();
        assert_eq!(back, p);
        let keys: Vec<usize> = [
            "\"family\"",
            "\"epsilon\"",
            "\"boundary\"",
            "\"coarse\"",
            "\"details\"",
            "\"level_params\"",
        ]
        .iter()
        .map(|k| text.find(k).unwrap())
        .collect();
        assert!(keys.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn decay_report_ratios() {
        let cfg = PyramidConfig::new(SchemeFamily::Ns4Point { theta: 0.0 }, 3).periodic();
        let p = analyze_scalar(&periodic(wiggle(64)), &cfg).unwrap();
        let report = p.detail_decay_report();
        assert_eq!(report.len(), 3);
        assert!(report[2].ratio.is_none());
        let r = report[0].sup_norm / report[1].sup_norm;
        assert_eq!(report[0].ratio, Some(r));
        assert!((report[1].avg_l2 - report[1].l1_norm / 32.0).abs() < 1e-15);
    }
}
