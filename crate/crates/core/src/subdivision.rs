//! Subdivision masks, level-dependent mask families and the refinement
//! operator `S_α c = α * (c↑2)`.
//!
//! Level convention: `mask_at_level(k)` returns the mask applied after `k`
//! refinement steps have already been performed, so `k = 0` is the first
//! step. All masks are stored centered: interpolating masks carry the copy
//! tap at index 0 and symmetric masks are symmetric about 0.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::sequences::{convolve, upsample2, FinSeq, PeriodicSeq, Seq};

/// Smallest admissible magnitude for any denominator in the mask formulas.
pub const DENOMINATOR_GUARD: f64 = 1e-12;

/// Tolerance for the parity-sum check `sum α_{2i} = sum α_{2i+1} = 1`.
pub const PARITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyId {
    Stationary,
    Ns4Point,
    NsCubic,
    Conic,
}

/// One refinement mask with its level and the family that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mask {
    pub taps: FinSeq,
    pub level: u32,
    pub family: FamilyId,
}

impl Mask {
    /// A user supplied stationary mask; rejected unless both parity sums are 1.
    pub fn stationary(taps: FinSeq) -> Result<Self> {
        let mask = Self {
            taps,
            level: 0,
            family: FamilyId::Stationary,
        };
        mask.check_parity()?;
        Ok(mask)
    }

    pub fn parity_sums(&self) -> (f64, f64) {
        self.taps.parity_sums()
    }

    pub fn check_parity(&self) -> Result<()> {
        let (even, odd) = self.parity_sums();
        if (even - 1.0).abs() > PARITY_TOLERANCE || (odd - 1.0).abs() > PARITY_TOLERANCE {
            return Err(Error::ParitySum { even, odd });
        }
        Ok(())
    }

    /// True when the even taps are exactly the unit impulse.
    pub fn is_interpolating(&self) -> bool {
        let even = self.taps.even_part();
        even.offset() == 0 && even.coeffs() == [1.0]
    }

    /// `||S_α||_∞ = max(sum |α_{2k}|, sum |α_{2k+1}|)`.
    pub fn operator_norm_inf(&self) -> f64 {
        self.taps
            .even_part()
            .norm_l1()
            .max(self.taps.odd_part().norm_l1())
    }

    /// Largest number of coarse samples feeding a single refined sample.
    pub fn coarse_reach(&self) -> usize {
        let reach = |part: FinSeq| {
            let nonzero: Vec<i64> = part.iter().filter(|p| p.1 != 0.0).map(|p| p.0).collect();
            match (nonzero.first(), nonzero.last()) {
                (Some(lo), Some(hi)) => (hi - lo + 1) as usize,
                _ => 0,
            }
        };
        reach(self.taps.even_part()).max(reach(self.taps.odd_part()))
    }

    /// `(S_α c)_j = sum_i α_{j-2i} c_i` on a finitely supported sequence.
    pub fn refine_finite(&self, c: &FinSeq) -> FinSeq {
        convolve(&self.taps, &upsample2(c))
    }

    /// Refinement of a periodic sequence; period `N` becomes `2N`.
    pub fn refine_periodic(&self, c: &PeriodicSeq) -> Result<PeriodicSeq> {
        let n = c.period();
        let required = self.coarse_reach();
        if n < required {
            return Err(Error::PeriodTooShort { period: n, required });
        }
        let fine = 2 * n as i64;
        let mut out = vec![0.0; 2 * n];
        for (t, a) in self.taps.iter() {
            if a == 0.0 {
                continue;
            }
            for (i, &v) in c.values().iter().enumerate() {
                out[(2 * i as i64 + t).rem_euclid(fine) as usize] += a * v;
            }
        }
        PeriodicSeq::new(out)
    }

    pub fn refine(&self, c: &Seq) -> Result<Seq> {
        match c {
            Seq::Finite(s) => Ok(Seq::Finite(self.refine_finite(s))),
            Seq::Periodic(s) => Ok(Seq::Periodic(self.refine_periodic(s)?)),
        }
    }
}

/// Standard masks used throughout tests and demos.
pub mod masks {
    use crate::sequences::FinSeq;

    /// Cubic B-spline `{1/8, 1/2, 3/4, 1/2, 1/8}` at `-2..=2`.
    pub fn cubic_bspline() -> FinSeq {
        FinSeq::centered(vec![0.125, 0.5, 0.75, 0.5, 0.125])
    }

    /// Dubuc-Deslauriers 4-point mask at `-3..=3`.
    pub fn four_point() -> FinSeq {
        FinSeq::centered(vec![
            -1.0 / 16.0,
            0.0,
            9.0 / 16.0,
            1.0,
            9.0 / 16.0,
            0.0,
            -1.0 / 16.0,
        ])
    }
}

/// What kind of function the samples are assumed to come from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "sigma", rename_all = "lowercase")]
pub enum CurveClass {
    Polynomial,
    Hyperbolic(f64),
    Trigonometric(f64),
}

/// [`CurveClass`] without the spacing; the spacing is derived per level.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Polynomial,
    Hyperbolic,
    Trigonometric,
}

impl CurveKind {
    pub fn with_sigma(self, sigma: f64) -> CurveClass {
        match self {
            CurveKind::Polynomial => CurveClass::Polynomial,
            CurveKind::Hyperbolic => CurveClass::Hyperbolic(sigma),
            CurveKind::Trigonometric => CurveClass::Trigonometric(sigma),
        }
    }

    /// Class for closed data with `samples` points per period: `σ = 2π/N`.
    pub fn for_samples(self, samples: usize) -> CurveClass {
        self.with_sigma(2.0 * PI / samples as f64)
    }
}

/// Starting tension `v^(-1)`: 1, `cosh σ` or `cos σ`.
pub fn initial_v(class: CurveClass) -> f64 {
    match class {
        CurveClass::Polynomial => 1.0,
        CurveClass::Hyperbolic(sigma) => sigma.cosh(),
        CurveClass::Trigonometric(sigma) => sigma.cos(),
    }
}

/// Tension update `v ↦ sqrt((1+v)/2)`.
pub fn v_next(v: f64) -> Result<f64> {
    if !(v > -1.0) {
        return Err(Error::DomainError(format!("tension must exceed -1, got {v}")));
    }
    Ok(((1.0 + v) / 2.0).sqrt())
}

fn guard(what: &'static str, value: f64) -> Result<f64> {
    if value.abs() < DENOMINATOR_GUARD || !value.is_finite() {
        Err(Error::DegenerateParameter { what, value })
    } else {
        Ok(value)
    }
}

/// The `(a, b)` coefficients of the conic-reproducing scheme at tension `v`.
///
/// Singular at `v = 0` and at `v = 1`, the latter being the polynomial limit.
pub fn conic_params(v: f64) -> Result<(f64, f64)> {
    if !(v > -1.0) {
        return Err(Error::DomainError(format!("tension must exceed -1, got {v}")));
    }
    guard("v", v)?;
    guard("v - 1", v - 1.0)?;
    let s = (2.0 * (v + 1.0)).sqrt();
    let tail = guard("v + 3 + 2 sqrt(2(v+1))", v + 3.0 + 2.0 * s)?;
    let a = (2.0 + s) * (2.0 - v * s) / guard("8v(v-1)sqrt(2(v+1))(...)", 8.0 * v * (v - 1.0) * s * tail)?;
    let b = ((v + 1.0) * (v - 2.0) - 2.0 * s) / guard("2v sqrt(2(v+1))(...)", 2.0 * v * s * tail)?;
    Ok((a, b))
}

/// Level-indexed family of masks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SchemeFamily {
    Stationary {
        taps: FinSeq,
    },
    /// Circle-generating 4-point scheme; `theta` is the angle between
    /// consecutive samples at the coarsest level.
    Ns4Point {
        theta: f64,
    },
    /// Exponential cubic B-spline, tension seeded by `v_init = v^(-1)`.
    NsCubic {
        v_init: f64,
    },
    /// Scheme reproducing `span{1, x, e^{tx}, e^{-tx}}`.
    Conic {
        v_init: f64,
    },
}

impl SchemeFamily {
    pub fn stationary(taps: FinSeq) -> Result<Self> {
        Mask::stationary(taps.clone())?;
        Ok(Self::Stationary { taps })
    }

    pub fn ns_cubic(v_init: f64) -> Result<Self> {
        v_next(v_init)?;
        Ok(Self::NsCubic { v_init })
    }

    pub fn conic(v_init: f64) -> Result<Self> {
        v_next(v_init)?;
        Ok(Self::Conic { v_init })
    }

    pub fn id(&self) -> FamilyId {
        match self {
            Self::Stationary { .. } => FamilyId::Stationary,
            Self::Ns4Point { .. } => FamilyId::Ns4Point,
            Self::NsCubic { .. } => FamilyId::NsCubic,
            Self::Conic { .. } => FamilyId::Conic,
        }
    }

    pub fn is_interpolating(&self) -> bool {
        match self {
            Self::Stationary { taps } => Mask {
                taps: taps.clone(),
                level: 0,
                family: FamilyId::Stationary,
            }
            .is_interpolating(),
            Self::Ns4Point { .. } => true,
            Self::NsCubic { .. } | Self::Conic { .. } => false,
        }
    }

    /// Same family re-seeded for data of the given class.
    pub fn retuned(&self, class: CurveClass) -> Result<Self> {
        Ok(match self {
            Self::Stationary { .. } => self.clone(),
            Self::Ns4Point { .. } => match class {
                CurveClass::Polynomial => Self::Ns4Point { theta: 0.0 },
                CurveClass::Trigonometric(sigma) => Self::Ns4Point { theta: sigma },
                CurveClass::Hyperbolic(_) => {
                    return Err(Error::BadParams(
                        "the 4-point family only has a trigonometric parameterization".into(),
                    ))
                }
            },
            Self::NsCubic { .. } => Self::ns_cubic(initial_v(class))?,
            Self::Conic { .. } => Self::conic(initial_v(class))?,
        })
    }

    /// Tension `v^(k)` used by the mask at level `k`, for the tension families.
    pub fn tension_at_level(&self, k: u32) -> Result<Option<f64>> {
        match self {
            Self::NsCubic { v_init } | Self::Conic { v_init } => {
                let mut v = *v_init;
                for _ in 0..=k {
                    v = v_next(v)?;
                }
                Ok(Some(v))
            }
            _ => Ok(None),
        }
    }

    pub fn mask_at_level(&self, k: u32) -> Result<Mask> {
        let taps = match self {
            Self::Stationary { taps } => taps.clone(),
            Self::Ns4Point { theta } => ns4point_taps(theta * 2f64.powi(-(k as i32)))?,
            Self::NsCubic { .. } => ns_cubic_taps(self.tension_at_level(k)?.unwrap())?,
            Self::Conic { .. } => conic_taps(self.tension_at_level(k)?.unwrap())?,
        };
        Ok(Mask {
            taps,
            level: k,
            family: self.id(),
        })
    }

    /// Applies the masks for levels `0..steps` in turn.
    pub fn refine_n(&self, c: &Seq, steps: u32) -> Result<Seq> {
        let mut out = c.clone();
        for k in 0..steps {
            out = self.mask_at_level(k)?.refine(&out)?;
        }
        Ok(out)
    }
}

/// Insertion weights reproducing `cos`/`sin` sampled `phi` apart.
fn ns4point_taps(phi: f64) -> Result<FinSeq> {
    let c2 = (phi / 2.0).cos();
    let den = guard(
        "16 cos^2(phi/4) cos(phi/2)",
        16.0 * (phi / 4.0).cos().powi(2) * c2,
    )?;
    let outer = -1.0 / den;
    let inner = (1.0 + 2.0 * c2).powi(2) / den;
    Ok(FinSeq::centered(vec![outer, 0.0, inner, 1.0, inner, 0.0, outer]))
}

fn ns_cubic_taps(v: f64) -> Result<FinSeq> {
    let vp = guard("v + 1", v + 1.0)?;
    let den = 2.0 * vp * vp;
    let odd = 2.0 * v / (vp * vp);
    Ok(FinSeq::centered(vec![
        1.0 / den,
        odd,
        (4.0 * v * v + 2.0) / den,
        odd,
        1.0 / den,
    ]))
}

fn conic_taps(v: f64) -> Result<FinSeq> {
    let (a, b) = conic_params(v)?;
    let den = guard("4(v+1)", 4.0 * (v + 1.0))?;
    let e2 = a / den;
    let e1 = (1.0 + 2.0 * v * (b + 2.0 * a)) / den;
    let e0 = (4.0 * v * (1.0 - b - 2.0 * a) - 2.0 * a + 2.0) / den;
    let o3 = (2.0 * a * (v + 1.0) + b) / den;
    let o1 = ((2.0 - 2.0 * a) * (v + 1.0) - b) / den;
    Ok(FinSeq::centered(vec![e2, o3, e1, o1, e0, o1, e1, o3, e2]))
}

/// `k,index,tap` rows for levels `0..levels`.
pub fn mask_dump_csv(family: &SchemeFamily, levels: u32) -> Result<String> {
    let mut out = String::new();
    for k in 0..levels {
        let mask = family.mask_at_level(k)?;
        for (i, tap) in mask.taps.iter() {
            let _ = writeln!(out, "{k},{i},{tap}");
        }
    }
    Ok(out)
}
