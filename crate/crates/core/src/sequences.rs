//! Finitely supported and periodic real sequences.
//!
//! [`FinSeq`] is the carrier for masks, filters and non-periodic signals; it
//! stores an offset plus a coefficient run that is kept canonical (no leading
//! or trailing zeros). [`PeriodicSeq`] stores one period of a bi-infinite
//! periodic sequence and is used for closed curves.

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Magnitudes below this are flushed to zero during canonicalization.
pub const FLUSH_THRESHOLD: f64 = 1e-300;

/// Finitely supported real sequence on the integers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "RawFinSeq", into = "RawFinSeq")]
pub struct FinSeq {
    offset: i64,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawFinSeq {
    offset: i64,
    coeffs: Vec<f64>,
}

impl From<RawFinSeq> for FinSeq {
    fn from(raw: RawFinSeq) -> Self {
        FinSeq::new(raw.offset, raw.coeffs)
    }
}

impl From<FinSeq> for RawFinSeq {
    fn from(s: FinSeq) -> Self {
        RawFinSeq {
            offset: s.offset,
            coeffs: s.coeffs,
        }
    }
}

impl Default for FinSeq {
    fn default() -> Self {
        Self::zero()
    }
}

impl FinSeq {
    /// Builds a canonical sequence whose first stored coefficient sits at `offset`.
    pub fn new(offset: i64, mut coeffs: Vec<f64>) -> Self {
        for c in coeffs.iter_mut() {
            if c.abs() < FLUSH_THRESHOLD {
                *c = 0.0;
            }
        }
        let Some(first) = coeffs.iter().position(|&c| c != 0.0) else {
            return Self::zero();
        };
        let last = coeffs.iter().rposition(|&c| c != 0.0).unwrap();
        coeffs.truncate(last + 1);
        coeffs.drain(..first);
        Self {
            offset: offset + first as i64,
            coeffs,
        }
    }

    pub fn zero() -> Self {
        Self {
            offset: 0,
            coeffs: Vec::new(),
        }
    }

    /// Kronecker delta at index 0.
    pub fn delta() -> Self {
        Self::new(0, vec![1.0])
    }

    /// Sequence centered on index 0: `coeffs[i]` lands at `i - len/2`.
    pub fn centered(coeffs: Vec<f64>) -> Self {
        let half = (coeffs.len() / 2) as i64;
        Self::new(-half, coeffs)
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (i64, f64)>) -> Self {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let Some(lo) = pairs.iter().map(|p| p.0).min() else {
            return Self::zero();
        };
        let hi = pairs.iter().map(|p| p.0).max().unwrap();
        let mut coeffs = vec![0.0; (hi - lo + 1) as usize];
        for (i, v) in pairs {
            coeffs[(i - lo) as usize] += v;
        }
        Self::new(lo, coeffs)
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Inclusive index range of the stored coefficients.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_empty() {
            None
        } else {
            Some((self.offset, self.offset + self.coeffs.len() as i64 - 1))
        }
    }

    pub fn get(&self, index: i64) -> f64 {
        let k = index - self.offset;
        if k < 0 {
            return 0.0;
        }
        self.coeffs.get(k as usize).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, &v)| (self.offset + k as i64, v))
    }

    pub fn sum(&self) -> f64 {
        self.coeffs.iter().sum()
    }

    pub fn norm_l1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `sup_j |c_{j+1} - c_j|` with implicit zeros outside the support.
    pub fn max_abs_diff(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let first = self.coeffs[0].abs();
        let last = self.coeffs[self.coeffs.len() - 1].abs();
        first.max(last).max(self.max_abs_diff_within())
    }

    /// Like [`max_abs_diff`](Self::max_abs_diff) but only over consecutive
    /// stored coefficients, i.e. a window of a longer signal.
    pub fn max_abs_diff_within(&self) -> f64 {
        self.coeffs
            .windows(2)
            .fold(0.0, |m, w| m.max((w[1] - w[0]).abs()))
    }

    /// `K_c = 2 * sum_i |c_i| * |i|` in the sequence's own index frame.
    pub fn k_const(&self) -> f64 {
        2.0 * self
            .iter()
            .map(|(i, v)| v.abs() * i.unsigned_abs() as f64)
            .sum::<f64>()
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self::new(self.offset, self.coeffs.iter().map(|c| c * factor).collect())
    }

    /// Shifts the sequence so that index `i` moves to `i + by`.
    pub fn shift(&self, by: i64) -> Self {
        Self {
            offset: self.offset + by,
            coeffs: self.coeffs.clone(),
        }
    }

    /// `a*self + b*other`.
    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Self {
        let (lo, hi) = match (self.support(), other.support()) {
            (None, None) => return Self::zero(),
            (Some(s), None) => s,
            (None, Some(o)) => o,
            (Some(s), Some(o)) => (s.0.min(o.0), s.1.max(o.1)),
        };
        let mut out = vec![0.0; (hi - lo + 1) as usize];
        for (i, v) in self.iter() {
            out[(i - lo) as usize] += a * v;
        }
        for (i, v) in other.iter() {
            out[(i - lo) as usize] += b * v;
        }
        Self::new(lo, out)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.axpby(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.axpby(1.0, other, -1.0)
    }

    /// Sub-sequence on the even indices, reindexed by `j -> j/2`.
    pub fn even_part(&self) -> Self {
        downsample2(self)
    }

    /// Sub-sequence on the odd indices, reindexed by `j -> (j-1)/2`.
    pub fn odd_part(&self) -> Self {
        downsample2(&self.shift(-1))
    }

    /// Sum of the taps on even and on odd indices.
    pub fn parity_sums(&self) -> (f64, f64) {
        let mut even = 0.0;
        let mut odd = 0.0;
        for (i, v) in self.iter() {
            if i.rem_euclid(2) == 0 {
                even += v;
            } else {
                odd += v;
            }
        }
        (even, odd)
    }
}

/// Linear convolution `(a*b)_j = sum_i a_i b_{j-i}`.
pub fn convolve(a: &FinSeq, b: &FinSeq) -> FinSeq {
    if a.is_empty() || b.is_empty() {
        return FinSeq::zero();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.coeffs.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (k, &y) in b.coeffs.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    FinSeq::new(a.offset + b.offset, out)
}

/// Zero insertion: `(c↑2)_{2k} = c_k`, odd entries zero.
pub fn upsample2(c: &FinSeq) -> FinSeq {
    if c.is_empty() {
        return FinSeq::zero();
    }
    let mut out = vec![0.0; 2 * c.len() - 1];
    for (k, &v) in c.coeffs.iter().enumerate() {
        out[2 * k] = v;
    }
    FinSeq::new(2 * c.offset, out)
}

/// Keeps the even-indexed entries: `(c↓2)_j = c_{2j}`.
pub fn downsample2(c: &FinSeq) -> FinSeq {
    if c.is_empty() {
        return FinSeq::zero();
    }
    let start = if c.offset.rem_euclid(2) == 0 { 0 } else { 1 };
    let coeffs: Vec<f64> = c.coeffs.iter().skip(start).step_by(2).copied().collect();
    FinSeq::new((c.offset + start as i64).div_euclid(2), coeffs)
}

/// One period of a periodic sequence; index `j` reads `values[j mod N]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSeq {
    values: Vec<f64>,
}

impl PeriodicSeq {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::BadParams("periodic sequence needs period >= 1".into()));
        }
        Ok(Self { values })
    }

    pub fn constant(value: f64, period: usize) -> Result<Self> {
        Self::new(vec![value; period])
    }

    pub fn period(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, index: i64) -> f64 {
        self.values[index.rem_euclid(self.values.len() as i64) as usize]
    }

    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|c| c.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.values.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `sup_j |c_{j+1} - c_j|` with wrap-around.
    pub fn max_abs_diff(&self) -> f64 {
        let n = self.values.len();
        (0..n).fold(0.0, |m, j| {
            m.max((self.values[(j + 1) % n] - self.values[j]).abs())
        })
    }

    pub fn upsample2(&self) -> Self {
        let mut out = vec![0.0; 2 * self.period()];
        for (k, &v) in self.values.iter().enumerate() {
            out[2 * k] = v;
        }
        Self { values: out }
    }

    pub fn downsample2(&self) -> Result<Self> {
        if !self.period().is_multiple_of(2) {
            return Err(Error::OddPeriod(self.period()));
        }
        Ok(Self {
            values: self.values.iter().step_by(2).copied().collect(),
        })
    }

    /// Cyclic convolution with a finitely supported filter.
    pub fn filter(&self, taps: &FinSeq) -> Self {
        let n = self.period() as i64;
        let values = (0..n)
            .map(|j| taps.iter().map(|(t, a)| a * self.get(j - t)).sum())
            .collect();
        Self { values }
    }

    pub fn axpby(&self, a: f64, other: &Self, b: f64) -> Result<Self> {
        if self.period() != other.period() {
            return Err(Error::ShapeMismatch(format!(
                "periods {} and {} differ",
                self.period(),
                other.period()
            )));
        }
        Ok(Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        })
    }
}

/// Either boundary mode; pyramid code is written against this.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Seq {
    Finite(FinSeq),
    Periodic(PeriodicSeq),
}

impl Seq {
    pub fn norm_inf(&self) -> f64 {
        match self {
            Seq::Finite(s) => s.norm_inf(),
            Seq::Periodic(s) => s.norm_inf(),
        }
    }

    pub fn norm_l1(&self) -> f64 {
        match self {
            Seq::Finite(s) => s.norm_l1(),
            Seq::Periodic(s) => s.norm_l1(),
        }
    }

    pub fn max_abs_diff(&self) -> f64 {
        match self {
            Seq::Finite(s) => s.max_abs_diff(),
            Seq::Periodic(s) => s.max_abs_diff(),
        }
    }

    pub fn get(&self, index: i64) -> f64 {
        match self {
            Seq::Finite(s) => s.get(index),
            Seq::Periodic(s) => s.get(index),
        }
    }

    pub fn period(&self) -> Option<usize> {
        match self {
            Seq::Finite(_) => None,
            Seq::Periodic(s) => Some(s.period()),
        }
    }

    /// Index range worth iterating: the support (finite) or one period.
    pub fn index_range(&self) -> Option<(i64, i64)> {
        match self {
            Seq::Finite(s) => s.support(),
            Seq::Periodic(s) => Some((0, s.period() as i64 - 1)),
        }
    }

    pub fn axpby(&self, a: f64, other: &Seq, b: f64) -> Result<Seq> {
        match (self, other) {
            (Seq::Finite(x), Seq::Finite(y)) => Ok(Seq::Finite(x.axpby(a, y, b))),
            (Seq::Periodic(x), Seq::Periodic(y)) => Ok(Seq::Periodic(x.axpby(a, y, b)?)),
            _ => Err(Error::ShapeMismatch("mixed boundary modes".into())),
        }
    }

    pub fn add(&self, other: &Seq) -> Result<Seq> {
        self.axpby(1.0, other, 1.0)
    }

    pub fn sub(&self, other: &Seq) -> Result<Seq> {
        self.axpby(1.0, other, -1.0)
    }

    pub fn scale(&self, factor: f64) -> Seq {
        match self {
            Seq::Finite(s) => Seq::Finite(s.scale(factor)),
            Seq::Periodic(s) => Seq::Periodic(PeriodicSeq {
                values: s.values.iter().map(|v| v * factor).collect(),
            }),
        }
    }

    /// Same boundary mode and shape, all zeros.
    pub fn zeros_like(&self) -> Seq {
        match self {
            Seq::Finite(_) => Seq::Finite(FinSeq::zero()),
            Seq::Periodic(s) => Seq::Periodic(PeriodicSeq {
                values: vec![0.0; s.period()],
            }),
        }
    }
}

impl From<FinSeq> for Seq {
    fn from(s: FinSeq) -> Self {
        Seq::Finite(s)
    }
}

impl From<PeriodicSeq> for Seq {
    fn from(s: PeriodicSeq) -> Self {
        Seq::Periodic(s)
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_f64(line: usize, field: &str) -> Result<f64> {
    field.trim().parse().map_err(|_| Error::Parse {
        line,
        msg: format!("not a number: {field:?}"),
    })
}

/// Writes `index,value` rows, one per stored coefficient.
pub fn finseq_to_csv(s: &FinSeq) -> String {
    let mut out = String::new();
    for (i, v) in s.iter() {
        let _ = writeln!(out, "{i},{v}");
    }
    out
}

pub fn finseq_from_csv(text: &str) -> Result<FinSeq> {
    let mut pairs = Vec::new();
    for (line, l) in data_lines(text) {
        if l.replace(' ', "") == "index,value" {
            continue;
        }
        let mut fields = l.split(',');
        let (Some(i), Some(v), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line,
                msg: "expected `index,value`".into(),
            });
        };
        let index: i64 = i.trim().parse().map_err(|_| Error::Parse {
            line,
            msg: format!("not an integer index: {i:?}"),
        })?;
        pairs.push((index, parse_f64(line, v)?));
    }
    Ok(FinSeq::from_pairs(pairs))
}

/// Writes a `# period=N` header followed by one value per line.
pub fn periodic_to_csv(s: &PeriodicSeq) -> String {
    let mut out = format!("# period={}\n", s.period());
    for v in &s.values {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn periodic_from_csv(text: &str) -> Result<PeriodicSeq> {
    let declared = text.lines().find_map(|l| {
        l.trim()
            .strip_prefix('#')
            .and_then(|h| h.trim().strip_prefix("period="))
            .map(|p| p.trim().to_string())
    });
    let values = data_lines(text)
        .map(|(line, l)| parse_f64(line, l))
        .collect::<Result<Vec<_>>>()?;
    if let Some(p) = declared {
        let p: usize = p.parse().map_err(|_| Error::Parse {
            line: 1,
            msg: format!("bad period header {p:?}"),
        })?;
        if p != values.len() {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header declares period {p} but {} values follow", values.len()),
            });
        }
    }
    PeriodicSeq::new(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_trimming() {
        let s = FinSeq::new(-2, vec![0.0, 0.0, 1.0, 0.0, 2.0, 0.0]);
        assert_eq!(s.offset(), 0);
        assert_eq!(s.coeffs(), &[1.0, 0.0, 2.0]);
        assert_eq!(s.support(), Some((0, 2)));
        assert!(FinSeq::new(5, vec![0.0, 1e-310]).is_empty());
    }

    #[test]
    fn convolve_examples() {
        let c = FinSeq::new(-1, vec![0.5, -2.0, 3.0]);
        assert_eq!(convolve(&FinSeq::delta(), &c), c);
        let a = FinSeq::new(0, vec![1.0, 1.0]);
        let b = FinSeq::new(0, vec![1.0, -1.0]);
        let ab = convolve(&a, &b);
        assert_eq!(ab.offset(), 0);
        assert_eq!(ab.coeffs(), &[1.0, 0.0, -1.0]);
        assert!(convolve(&FinSeq::zero(), &c).is_empty());
    }

    #[test]
    fn up_and_down_sampling() {
        assert_eq!(upsample2(&FinSeq::delta()), FinSeq::delta());
        let s = FinSeq::new(0, vec![1.0, 2.0]);
        assert_eq!(upsample2(&s).coeffs(), &[1.0, 0.0, 2.0]);
        let t = upsample2(&FinSeq::new(-1, vec![3.0]));
        assert_eq!((t.offset(), t.coeffs()), (-2, &[3.0][..]));

        let d = downsample2(&FinSeq::new(0, vec![1.0, 2.0, 3.0, 4.0]));
        assert_eq!((d.offset(), d.coeffs()), (0, &[1.0, 3.0][..]));
        assert!(downsample2(&FinSeq::new(1, vec![5.0])).is_empty());
        let odd = FinSeq::new(-3, vec![1.0, 2.0, 3.0, 4.0]);
        let d = downsample2(&odd);
        assert_eq!((d.offset(), d.coeffs()), (-1, &[2.0, 4.0][..]));
    }

    #[test]
    fn norms() {
        let d = FinSeq::delta();
        assert_eq!((d.norm_l1(), d.norm_inf()), (1.0, 1.0));
        let s = FinSeq::new(0, vec![1.0, -2.0, 3.0]);
        assert_eq!((s.norm_l1(), s.norm_inf()), (6.0, 3.0));
    }

    #[test]
    fn max_abs_diff_examples() {
        let p = PeriodicSeq::constant(4.2, 7).unwrap();
        assert_eq!(p.max_abs_diff(), 0.0);
        assert_eq!(FinSeq::new(0, vec![0.0, 1.0]).max_abs_diff(), 1.0);

        // f(x) = x on the grid 2^-J Z, looking at a window of the samples
        let j = 6;
        let h = 2f64.powi(-j);
        let window = FinSeq::new(10, (10..50).map(|k| k as f64 * h).collect());
        assert!((window.max_abs_diff_within() - h).abs() < 1e-15);

        let wrap = PeriodicSeq::new(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(wrap.max_abs_diff(), 2.0);
    }

    #[test]
    fn k_const_examples() {
        assert_eq!(FinSeq::delta().k_const(), 0.0);
        assert_eq!(FinSeq::new(2, vec![1.0]).k_const(), 4.0);
        let cubic = FinSeq::centered(vec![0.125, 0.5, 0.75, 0.5, 0.125]);
        assert!((cubic.k_const() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_filter_and_sampling() {
        let p = PeriodicSeq::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(p.downsample2().unwrap().values(), &[1.0, 3.0]);
        assert_eq!(p.upsample2().downsample2().unwrap(), p);
        assert_eq!(
            PeriodicSeq::new(vec![1.0, 2.0, 3.0]).unwrap().downsample2(),
            Err(Error::OddPeriod(3))
        );
        let shifted = p.filter(&FinSeq::new(1, vec![1.0]));
        assert_eq!(shifted.values(), &[4.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn csv_round_trip() {
        let s = FinSeq::new(-2, vec![0.1, 0.0, -3.5e-17]);
        assert_eq!(finseq_from_csv(&finseq_to_csv(&s)).unwrap(), s);
        let p = PeriodicSeq::new(vec![0.1, 1.0 / 3.0, -2.0]).unwrap();
        assert_eq!(periodic_from_csv(&periodic_to_csv(&p)).unwrap(), p);
        assert!(matches!(
            periodic_from_csv("# period=3\n1\n2\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            finseq_from_csv("1,2,3\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn serde_keeps_canonical_form() {
        let s = FinSeq::new(3, vec![1.5, 0.0, 2.0]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"offset":3,"coeffs":[1.5,0.0,2.0]}"#);
        let raw: FinSeq = serde_json::from_str(r#"{"offset":0,"coeffs":[0.0,2.0,0.0]}"#).unwrap();
        assert_eq!(raw, FinSeq::new(1, vec![2.0]));
    }
}
