//! One-way ANOVA and Tukey HSD with their reference distributions.

mod quadrature;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::erf::erfc;
use statrs::function::gamma::ln_gamma;

pub use quadrature::{integrate, legendre_rule, GL_NODES};

use crate::error::{Error, Result};

/// Absolute accuracy target of the distribution tails.
pub const TAIL_ACCURACY: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSample {
    pub id: String,
    pub observations: Vec<f64>,
}

impl GroupSample {
    pub fn new(id: impl Into<String>, observations: Vec<f64>) -> Self {
        GroupSample {
            id: id.into(),
            observations,
        }
    }

    fn mean(&self) -> f64 {
        self.observations.iter().sum::<f64>() / self.observations.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    pub ms_within: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyEntry {
    pub a: String,
    pub b: String,
    /// mean(a) - mean(b)
    pub difference: f64,
    pub q: f64,
    pub p: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TukeyResult {
    pub alpha: f64,
    pub k: usize,
    pub df_within: usize,
    /// Every ordered pair (a, b) with a != b.
    pub entries: Vec<TukeyEntry>,
}

impl TukeyResult {
    pub fn entry(&self, a: &str, b: &str) -> Option<&TukeyEntry> {
        self.entries.iter().find(|e| e.a == a && e.b == b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    F { d1: usize, d2: usize },
    StudentizedRange { k: usize, df: usize },
}

/// Upper tail probability of `stat` under the given distribution.
pub fn dist_tail(kind: TailKind, stat: f64) -> Result<f64> {
    match kind {
        TailKind::F { d1, d2 } => f_tail(stat, d1, d2),
        TailKind::StudentizedRange { k, df } => ptukey_upper(stat, k, df),
    }
}

/// P(F > f) for F(d1, d2), via I_{d2/(d2 + d1 f)}(d2/2, d1/2).
pub fn f_tail(f: f64, d1: usize, d2: usize) -> Result<f64> {
    if d1 == 0 || d2 == 0 {
        return Err(Error::Config(format!("invalid F degrees of freedom ({d1}, {d2})")));
    }
    if f.is_nan() {
        return Err(Error::InvalidValues("F statistic is NaN".into()));
    }
    if f <= 0.0 {
        return Ok(1.0);
    }
    if f.is_infinite() {
        return Ok(0.0);
    }
    let (a, b) = (d1 as f64, d2 as f64);
    Ok(beta_reg(b / 2.0, a / 2.0, b / (b + a * f)))
}

fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// P(range of k standard normals < w).
fn range_cdf_normal(w: f64, k: usize) -> Result<f64> {
    if w <= 0.0 {
        return Ok(0.0);
    }
    let km1 = (k - 1) as i32;
    let g = |z: f64| norm_pdf(z) * (norm_cdf(z) - norm_cdf(z - w)).powi(km1);
    Ok((k as f64 * integrate(&g, -8.0, 8.0 + w, 1e-10)?).min(1.0))
}

/// P(Q > q) for the studentized range with `k` means and `df` degrees of
/// freedom, from the double integral
/// P(Q < q) = ∫ f_s(s) P(R < q s) ds with s ~ chi_df / sqrt(df).
pub fn ptukey_upper(q: f64, k: usize, df: usize) -> Result<f64> {
    if k < 2 || df == 0 {
        return Err(Error::Config(format!("invalid studentized range parameters k={k}, df={df}")));
    }
    if q.is_nan() {
        return Err(Error::InvalidValues("q statistic is NaN".into()));
    }
    if q <= 0.0 {
        return Ok(1.0);
    }
    if q.is_infinite() {
        return Ok(0.0);
    }
    let nu = df as f64;
    let log_norm = 0.5 * nu * nu.ln() - ln_gamma(nu / 2.0) - (nu / 2.0 - 1.0) * 2f64.ln();
    let density = |s: f64| {
        if s <= 0.0 {
            return 0.0;
        }
        (log_norm + (nu - 1.0) * s.ln() - nu * s * s / 2.0).exp()
    };
    // chi_df / sqrt(df) has sd about 1/sqrt(2 df); 12 sd plus slack covers
    // the tail far below the accuracy target
    let hi = 1.0 + 12.0 / (2.0 * nu).sqrt() + 6.0 / nu.sqrt();
    let inner_err = std::cell::Cell::new(None);
    let h = |s: f64| {
        let d = density(s);
        if d < 1e-300 {
            return 0.0;
        }
        match range_cdf_normal(q * s, k) {
            Ok(c) => d * c,
            Err(e) => {
                inner_err.set(Some(e));
                0.0
            }
        }
    };
    let mode = ((nu - 1.0) / nu).sqrt();
    let cdf = integrate(&h, 0.0, mode, TAIL_ACCURACY / 20.0)? + integrate(&h, mode, hi, TAIL_ACCURACY / 20.0)?;
    if let Some(e) = inner_err.take() {
        return Err(e);
    }
    Ok((1.0 - cdf).clamp(0.0, 1.0))
}

fn check_groups(groups: &[GroupSample]) -> Result<()> {
    if groups.len() < 2 {
        return Err(Error::InsufficientRuns {
            needed: 2,
            got: groups.len(),
        });
    }
    for g in groups {
        if g.observations.len() < 2 {
            return Err(Error::InsufficientRuns {
                needed: 2,
                got: g.observations.len(),
            });
        }
        if g.observations.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidValues(format!("group {} has non-finite values", g.id)));
        }
    }
    Ok(())
}

/// One-way ANOVA.
pub fn anova_oneway(groups: &[GroupSample]) -> Result<AnovaResult> {
    check_groups(groups)?;
    let n: usize = groups.iter().map(|g| g.observations.len()).sum();
    let grand = groups.iter().flat_map(|g| &g.observations).sum::<f64>() / n as f64;
    let mut ssb = 0.0;
    let mut ssw = 0.0;
    for g in groups {
        let m = g.mean();
        ssb += g.observations.len() as f64 * (m - grand) * (m - grand);
        ssw += g.observations.iter().map(|v| (v - m) * (v - m)).sum::<f64>();
    }
    let df_between = groups.len() - 1;
    let df_within = n - groups.len();
    // relative to the data scale so shifted inputs behave alike
    let scale = groups
        .iter()
        .flat_map(|g| &g.observations)
        .map(|v| (v - grand).abs())
        .fold(0.0, f64::max);
    let tiny = |ss: f64| ss <= (scale * 1e-12).powi(2) * n as f64;
    if tiny(ssw) {
        return Err(Error::DegenerateVariance(if tiny(ssb) {
            "all observations identical"
        } else {
            "zero within-group variance, F is infinite"
        }));
    }
    let ms_within = ssw / df_within as f64;
    let f = (ssb / df_between as f64) / ms_within;
    Ok(AnovaResult {
        f,
        df_between,
        df_within,
        p: f_tail(f, df_between, df_within)?,
        ms_within,
    })
}

/// Tukey HSD over all pairs, with the Tukey-Kramer standard error for
/// unequal group sizes.
pub fn tukey_hsd(groups: &[GroupSample], alpha: f64) -> Result<TukeyResult> {
    let anova = anova_oneway(groups)?;
    let k = groups.len();
    let mut entries = Vec::with_capacity(k * (k - 1));
    for (i, a) in groups.iter().enumerate() {
        for (j, b) in groups.iter().enumerate() {
            if i == j {
                continue;
            }
            let difference = a.mean() - b.mean();
            let se = (anova.ms_within / 2.0
                * (1.0 / a.observations.len() as f64 + 1.0 / b.observations.len() as f64))
                .sqrt();
            let q = difference.abs() / se;
            let p = if j < i {
                // already computed for the mirrored pair
                entries
                    .iter()
                    .find(|e: &&TukeyEntry| e.a == b.id && e.b == a.id)
                    .map(|e| e.p)
                    .unwrap_or(f64::NAN)
            } else {
                ptukey_upper(q, k, anova.df_within)?
            };
            entries.push(TukeyEntry {
                a: a.id.clone(),
                b: b.id.clone(),
                difference,
                q,
                p,
                significant: p < alpha,
            });
        }
    }
    Ok(TukeyResult {
        alpha,
        k,
        df_within: anova.df_within,
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(id: &str, v: &[f64]) -> GroupSample {
        GroupSample::new(id, v.to_vec())
    }

    #[test]
    fn hand_anova() {
        let r = anova_oneway(&[g("a", &[1., 2., 3.]), g("b", &[2., 3., 4.])]).unwrap();
        assert_eq!(r.f, 1.5);
        assert_eq!((r.df_between, r.df_within), (1, 4));
        // scipy.stats.f_oneway
        assert!((r.p - 0.287_864_134_726_690_7).abs() < 1e-9, "{}", r.p);
    }

    #[test]
    fn identical_groups() {
        let r = anova_oneway(&[g("a", &[1., 2., 3.]), g("b", &[1., 2., 3.])]).unwrap();
        assert_eq!((r.f, r.p), (0.0, 1.0));
        let t = tukey_hsd(&[g("a", &[1., 2., 3.]), g("b", &[1., 2., 3.])], 0.05).unwrap();
        assert!(t.entries.iter().all(|e| e.q == 0.0 && e.p == 1.0 && !e.significant));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(
            anova_oneway(&[g("a", &[1., 1.]), g("b", &[2., 2.])]),
            Err(Error::DegenerateVariance(_))
        ));
        assert!(matches!(
            anova_oneway(&[g("a", &[3., 3.]), g("b", &[3., 3.])]),
            Err(Error::DegenerateVariance("all observations identical"))
        ));
        assert!(matches!(
            anova_oneway(&[g("a", &[1., 2.])]),
            Err(Error::InsufficientRuns { .. })
        ));
    }

    #[test]
    fn f_tail_points() {
        assert_eq!(f_tail(0.0, 3, 7).unwrap(), 1.0);
        assert!((f_tail(1.5, 1, 4).unwrap() - 0.288).abs() < 1e-3);
    }

    #[test]
    fn ptukey_table_value() {
        // 3.77 is the tabulated 5% critical value for k=3, df=12
        let p = ptukey_upper(3.77, 3, 12).unwrap();
        assert!((p - 0.050_182_361_760_553_57).abs() < 1e-5, "{p}");
    }

    #[test]
    fn legendre_nodes_are_symmetric() {
        let r = legendre_rule(8);
        for i in 0..4 {
            assert!((r[i].0 + r[7 - i].0).abs() < 1e-15);
            assert!((r[i].1 - r[7 - i].1).abs() < 1e-14);
        }
    }
}
