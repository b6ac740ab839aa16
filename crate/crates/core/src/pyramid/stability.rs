//! Executable forms of the detail-decay bound and the two stability estimates.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{analyze_with_plan, Pyramid, PyramidConfig, PyramidPlan};
use crate::decimation::DecimationFilter;
use crate::error::{Error, Result};
use crate::sequences::{FinSeq, PeriodicSeq, Seq};
use crate::subdivision::{Mask, SchemeFamily};

/// Relative allowance for round-off when comparing the two sides.
const ROUNDING: f64 = 8.0 * f64::EPSILON;

const ESTIMATE_TRIALS: usize = 200;
const ESTIMATE_SEED: u64 = 0x5eed_0001;
const FINITE_TEST_LEN: usize = 64;

fn sup_over(components: &[Seq]) -> f64 {
    components.iter().fold(0.0, |m, c| m.max(c.norm_inf()))
}

fn diff_sup(a: &[Seq], b: &[Seq]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} components against {}",
            a.len(),
            b.len()
        )));
    }
    let diffs = a
        .iter()
        .zip(b)
        .map(|(x, y)| x.sub(y))
        .collect::<Result<Vec<_>>>()?;
    Ok(sup_over(&diffs))
}

fn l_from_m(m: f64, levels: u32) -> f64 {
    if m > 1.0 {
        m.powi(levels as i32)
    } else {
        1.0
    }
}

/// `L = M^J` when `M = max_ℓ ||S_α^(ℓ)||_∞ > 1`, else `1`.
pub fn reconstruction_stability_bound(family: &SchemeFamily, levels: u32) -> Result<f64> {
    let mut m = 0.0f64;
    for k in 0..levels {
        m = m.max(family.mask_at_level(k)?.operator_norm_inf());
    }
    Ok(l_from_m(m, levels))
}

fn pyramid_l(p: &Pyramid) -> Result<f64> {
    let mut m = 0.0f64;
    for level in 1..=p.levels() {
        m = m.max(p.mask(level)?.operator_norm_inf());
    }
    Ok(l_from_m(m, p.levels()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionCheck {
    pub holds: bool,
    /// `||c^(J) - c̃^(J)||_∞`.
    pub lhs: f64,
    /// `L (||c^(0) - c̃^(0)||_∞ + sum_ℓ ||d^(ℓ) - d̃^(ℓ)||_∞)`.
    pub rhs: f64,
    pub slack: f64,
    pub l: f64,
}

/// Synthesizes both pyramids and compares against the reconstruction bound.
/// The operators recorded in `p` are used for both.
pub fn check_reconstruction_stability(p: &Pyramid, p_tilde: &Pyramid) -> Result<ReconstructionCheck> {
    if p.levels() != p_tilde.levels() {
        return Err(Error::ShapeMismatch("pyramids differ in depth".into()));
    }
    let mut q = p_tilde.clone();
    q.level_params = p.level_params.clone();
    let fine = p.synthesize()?;
    let fine_tilde = q.synthesize()?;
    let lhs = diff_sup(&fine, &fine_tilde)?;
    let mut sum = diff_sup(&p.coarse, &q.coarse)?;
    for (d, dt) in p.details.iter().zip(&q.details) {
        sum += diff_sup(d, dt)?;
    }
    let l = pyramid_l(p)?;
    let rhs = l * sum;
    Ok(ReconstructionCheck {
        holds: lhs <= rhs * (1.0 + ROUNDING),
        lhs,
        rhs,
        slack: rhs - lhs,
        l,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetailLevelCheck {
    pub level: u32,
    /// `||d^(ℓ) - d̃^(ℓ)||_∞`.
    pub lhs: f64,
    /// Bound using `||I - S D||_∞ <= 1 + ||S||_∞ ||ζ||_1`.
    pub rhs_upper: f64,
    /// Same bound with the randomized lower estimate of `||I - S D||_∞`.
    pub rhs_estimate: f64,
    pub residual_norm_upper: f64,
    pub residual_norm_estimate: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecompositionCheck {
    /// `||c^(0) - c̃^(0)||_∞`.
    pub coarse_lhs: f64,
    /// `prod_m ||ζ^(m)||_1 · ||c^(J) - c̃^(J)||_∞`.
    pub coarse_rhs: f64,
    pub coarse_holds: bool,
    pub levels: Vec<DetailLevelCheck>,
    pub holds: bool,
}

impl DecompositionCheck {
    /// Smallest `rhs - lhs` over the coarse and all detail inequalities.
    pub fn min_slack(&self) -> f64 {
        self.levels
            .iter()
            .map(|l| l.rhs_upper - l.lhs)
            .fold(self.coarse_rhs - self.coarse_lhs, f64::min)
    }
}

/// Lower estimate of `||I - S_α D_ζ||_∞` from random test sequences with
/// `||x||_∞ = 1`. For periodic data the test period is `period`.
pub fn estimate_residual_operator_norm(
    mask: &Mask,
    filter: &DecimationFilter,
    period: Option<usize>,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = period.unwrap_or(FINITE_TEST_LEN);
    let mut best = 0.0f64;
    for _ in 0..trials {
        let mut x: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let peak = rng.gen_range(0..len);
        x[peak] = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let x = match period {
            Some(_) => Seq::Periodic(PeriodicSeq::new(x)?),
            None => Seq::Finite(FinSeq::new(0, x)),
        };
        let predicted = mask.refine(&filter.decimate(&x)?)?;
        best = best.max(x.sub(&predicted)?.norm_inf());
    }
    Ok(best)
}

/// Analyzes `c` and `c_tilde` with the same operators and evaluates both
/// decomposition inequalities at every level.
pub fn check_decomposition_stability(
    c: &[Seq],
    c_tilde: &[Seq],
    config: &PyramidConfig,
) -> Result<DecompositionCheck> {
    let period = c.first().and_then(Seq::period);
    let plan = PyramidPlan::new(config, period)?;
    let p = analyze_with_plan(c, &plan)?;
    let q = analyze_with_plan(c_tilde, &plan)?;
    let fine_diff = diff_sup(c, c_tilde)?;
    let zeta_norms: Vec<f64> = plan.filters.iter().map(|f| f.zeta.norm_l1()).collect();
    let prod_from = |l: usize| zeta_norms[l - 1..].iter().product::<f64>();

    let coarse_lhs = diff_sup(&p.coarse, &q.coarse)?;
    let coarse_rhs = prod_from(1) * fine_diff;
    let coarse_holds = coarse_lhs <= coarse_rhs * (1.0 + ROUNDING);

    let j = config.levels as usize;
    let mut levels = Vec::with_capacity(j);
    for l in 1..=j {
        let mask = &plan.masks[l - 1];
        let filter = &plan.filters[l - 1];
        let level_period = period.map(|n| n >> (j - l));
        let upper = 1.0 + mask.operator_norm_inf() * zeta_norms[l - 1];
        let estimate = estimate_residual_operator_norm(
            mask,
            filter,
            level_period,
            ESTIMATE_TRIALS,
            ESTIMATE_SEED + l as u64,
        )?;
        let factor = prod_from(l) / zeta_norms[l - 1] * fine_diff;
        let lhs = diff_sup(&p.details[l - 1], &q.details[l - 1])?;
        let rhs_upper = upper * factor;
        levels.push(DetailLevelCheck {
            level: l as u32,
            lhs,
            rhs_upper,
            rhs_estimate: estimate * factor,
            residual_norm_upper: upper,
            residual_norm_estimate: estimate,
            holds: lhs <= rhs_upper * (1.0 + ROUNDING),
        });
    }
    let holds = coarse_holds && levels.iter().all(|l| l.holds);
    Ok(DecompositionCheck {
        coarse_lhs,
        coarse_rhs,
        coarse_holds,
        levels,
        holds,
    })
}

/// Right-hand side of the detail-decay bound at every level, for data
/// sampled on `2^{-J} Z` from a function with `||f'||_∞ = f_prime_inf`:
/// `K_{α,ζ} ||f'||_∞ ||ζ^(ℓ)||_1^{-1} prod_{m=ℓ}^{J} ||ζ^(m)||_1 2^{-ℓ}`
/// with `K_{α,ζ} = K_ζ ||α||_1 + K_α ||ζ||_1`.
pub fn detail_bound(p: &Pyramid, f_prime_inf: f64) -> Vec<f64> {
    let zeta_norms: Vec<f64> = p.level_params.iter().map(|lp| lp.zeta.norm_l1()).collect();
    p.level_params
        .iter()
        .enumerate()
        .map(|(i, lp)| {
            let k = lp.zeta.k_const() * lp.mask.norm_l1() + lp.mask.k_const() * zeta_norms[i];
            let prod: f64 = zeta_norms[i + 1..].iter().product();
            k * f_prime_inf * prod * 2f64.powi(-(lp.level as i32))
        })
        .collect()
}
