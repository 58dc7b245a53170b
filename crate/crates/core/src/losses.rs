//! The attack loss family and its closed-form logit-space gradients.
//!
//! Every loss here is characterized by its derivative with respect to the
//! logit vector `Z`, with `P = softmax(Z)`, `Y_c` the one-hot vector of
//! class `c`, and `c*` the interest class (ground truth when non-targeted,
//! the target class otherwise):
//!
//! | loss        | value                                  | dL/dZ                  |
//! |-------------|----------------------------------------|------------------------|
//! | `ce`        | `-log p_c*`                            | `P - Y_c*`             |
//! | `ce-ll`     | `log p_LL`                             | `Y_LL - P`             |
//! | `cw`        | `z_j - z_c*`                           | `Y_j - Y_c*`           |
//! | `rce`       | `-log p_c* + (1/K) sum_k log p_k`      | `(1/K) 1 - Y_c*`       |
//! | `rce-ll`    | `log p_LL - (1/K) sum_k log p_k`       | `Y_LL - (1/K) 1`       |
//! | `ce-temp:t` | `-log p_t,c*` (logits scaled by `1/t`) | `(P_t - Y_c*) / t`     |
//! | `wce:w`     | gradient-only                          | `w P - Y_c*`           |
//!
//! `LL` is the least-likely class (argmin of the clean logits, frozen for
//! the duration of an iterative attack) and `j` is the strongest class
//! other than the interest class, re-resolved from the current logits at
//! every evaluation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::logits::{log_softmax, softmax, LogitVector};

/// Which loss drives the attack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum LossKind {
    Ce,
    CeLl,
    Cw,
    Rce,
    RceLl,
    /// Cross-entropy on temperature-scaled logits.
    CeTemp(f64),
    /// Gradient-only probe loss `w*P - Y`; has no scalar value.
    Wce(f64),
}

impl LossKind {
    pub const VALID_NAMES: &'static str =
        "ce, ce-ll, cw, rce, rce-ll, ce-temp:<T>, wce:<w>";

    fn check(&self) -> Result<()> {
        match *self {
            LossKind::CeTemp(t) if !t.is_finite() || t <= 0.0 => Err(Error::InvalidParameter(
                format!("ce-temp temperature must be positive and finite, got {t}"),
            )),
            LossKind::Wce(w) if !w.is_finite() || w <= 0.0 => Err(Error::InvalidParameter(
                format!("wce weight must be positive and finite, got {w}"),
            )),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LossKind::Ce => write!(f, "ce"),
            LossKind::CeLl => write!(f, "ce-ll"),
            LossKind::Cw => write!(f, "cw"),
            LossKind::Rce => write!(f, "rce"),
            LossKind::RceLl => write!(f, "rce-ll"),
            LossKind::CeTemp(t) => write!(f, "ce-temp:{t}"),
            LossKind::Wce(w) => write!(f, "wce:{w}"),
        }
    }
}

impl std::str::FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let kind = match s {
            "ce" => LossKind::Ce,
            "ce-ll" => LossKind::CeLl,
            "cw" => LossKind::Cw,
            "rce" => LossKind::Rce,
            "rce-ll" => LossKind::RceLl,
            other => {
                let parse_param = |prefix: &str| -> Option<f64> {
                    other
                        .strip_prefix(prefix)
                        .and_then(|v| v.parse::<f64>().ok())
                };
                if let Some(t) = parse_param("ce-temp:") {
                    LossKind::CeTemp(t)
                } else if let Some(w) = parse_param("wce:") {
                    LossKind::Wce(w)
                } else {
                    return Err(Error::InvalidParameter(format!(
                        "unknown loss '{other}'; valid losses: {}",
                        LossKind::VALID_NAMES
                    )));
                }
            }
        };
        kind.check()?;
        Ok(kind)
    }
}

impl From<LossKind> for String {
    fn from(kind: LossKind) -> String {
        kind.to_string()
    }
}

impl TryFrom<String> for LossKind {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Which class the attack manipulates, plus the frozen least-likely class
/// when an iterative attack has already committed to one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterestSpec {
    pub gt_class: usize,
    pub target_class: Option<usize>,
    /// Least-likely class pinned from the clean logits; when absent it is
    /// re-derived from the logits being evaluated.
    pub frozen_ll: Option<usize>,
}

impl InterestSpec {
    pub fn non_targeted(gt_class: usize) -> Self {
        Self {
            gt_class,
            target_class: None,
            frozen_ll: None,
        }
    }

    pub fn targeted(gt_class: usize, target_class: usize) -> Self {
        Self {
            gt_class,
            target_class: Some(target_class),
            frozen_ll: None,
        }
    }

    pub fn with_frozen_ll(mut self, ll_class: usize) -> Self {
        self.frozen_ll = Some(ll_class);
        self
    }

    /// Ground-truth class when non-targeted, target class otherwise.
    pub fn interest_class(&self) -> usize {
        self.target_class.unwrap_or(self.gt_class)
    }

    fn resolve_ll(&self, z: &LogitVector) -> usize {
        self.frozen_ll.unwrap_or_else(|| z.argmin())
    }

    /// Strongest class other than the interest class, from the current
    /// logits; ties break to the lower index.
    fn resolve_j(&self, z: &LogitVector) -> usize {
        let skip = self.interest_class();
        let mut best = None;
        for (i, &v) in z.values().iter().enumerate() {
            if i == skip {
                continue;
            }
            match best {
                None => best = Some(i),
                Some(b) if v > z[b] => best = Some(i),
                _ => {}
            }
        }
        best.expect("logit vector has at least two classes")
    }

    fn validate(&self, k: usize) -> Result<()> {
        if self.gt_class >= k {
            return Err(Error::InvalidParameter(format!(
                "ground-truth class {} out of range for K={k}",
                self.gt_class
            )));
        }
        if let Some(t) = self.target_class {
            if t >= k {
                return Err(Error::InvalidParameter(format!(
                    "target class {t} out of range for K={k}"
                )));
            }
        }
        if let Some(ll) = self.frozen_ll {
            if ll >= k {
                return Err(Error::InvalidParameter(format!(
                    "frozen LL class {ll} out of range for K={k}"
                )));
            }
        }
        Ok(())
    }
}

/// Scalar loss value. `wce:<w>` is defined only through its gradient and is
/// rejected here.
pub fn loss_value(kind: LossKind, z: &LogitVector, interest: &InterestSpec) -> Result<f64> {
    kind.check()?;
    interest.validate(z.len())?;
    let c = interest.interest_class();
    let k = z.len() as f64;
    match kind {
        LossKind::Ce => Ok(-log_softmax(z.values())[c]),
        LossKind::CeLl => Ok(log_softmax(z.values())[interest.resolve_ll(z)]),
        LossKind::Cw => Ok(z[interest.resolve_j(z)] - z[c]),
        LossKind::Rce => {
            let log_p = log_softmax(z.values());
            Ok(-log_p[c] + log_p.iter().sum::<f64>() / k)
        }
        LossKind::RceLl => {
            let log_p = log_softmax(z.values());
            Ok(log_p[interest.resolve_ll(z)] - log_p.iter().sum::<f64>() / k)
        }
        LossKind::CeTemp(t) => {
            let scaled: Vec<f64> = z.values().iter().map(|v| v / t).collect();
            Ok(-log_softmax(&scaled)[c])
        }
        LossKind::Wce(_) => Err(Error::GradientOnlyLoss(kind.to_string())),
    }
}

/// Closed-form dL/dZ.
pub fn logit_gradient(
    kind: LossKind,
    z: &LogitVector,
    interest: &InterestSpec,
) -> Result<LogitVector> {
    kind.check()?;
    interest.validate(z.len())?;
    let c = interest.interest_class();
    let k = z.len();
    // `p[c] - 1` cancels catastrophically once p[c] rounds to 1, which
    // happens long before the runner-up probabilities underflow; using
    // -(sum of the other probabilities) keeps the tiny complement and makes
    // the extreme-temperature directions exact down to e^-745 gaps.
    let complement = |p: &[f64], skip: usize| -> f64 {
        p.iter()
            .enumerate()
            .filter(|&(i, _)| i != skip)
            .map(|(_, &v)| v)
            .sum()
    };
    let grad = match kind {
        LossKind::Ce => {
            let p = softmax(z, 1.0)?;
            let mut g: Vec<f64> = p.values().to_vec();
            g[c] = -complement(p.values(), c);
            g
        }
        LossKind::CeLl => {
            let p = softmax(z, 1.0)?;
            let ll = interest.resolve_ll(z);
            let mut g: Vec<f64> = p.values().iter().map(|&v| -v).collect();
            g[ll] = complement(p.values(), ll);
            g
        }
        LossKind::Cw => {
            let mut g = vec![0.0; k];
            g[interest.resolve_j(z)] = 1.0;
            g[c] = -1.0;
            g
        }
        LossKind::Rce => {
            let mut g = vec![1.0 / k as f64; k];
            g[c] -= 1.0;
            g
        }
        LossKind::RceLl => {
            let ll = interest.resolve_ll(z);
            let mut g = vec![-1.0 / k as f64; k];
            g[ll] += 1.0;
            g
        }
        LossKind::CeTemp(t) => {
            let p = softmax(z, t)?;
            let mut g: Vec<f64> = p.values().to_vec();
            g[c] = -complement(p.values(), c);
            for v in &mut g {
                *v /= t;
            }
            g
        }
        LossKind::Wce(w) => {
            // w*p[c] - 1 = -w * (1 - p[c]) + (w - 1), with the same
            // complement treatment for the first term.
            let p = softmax(z, 1.0)?;
            let mut g: Vec<f64> = p.values().iter().map(|&v| w * v).collect();
            g[c] = -w * complement(p.values(), c) + (w - 1.0);
            g
        }
    };
    LogitVector::new(grad)
}

/// Cosine of the angle between two gradient directions. Both vectors are
/// rescaled by their max-abs entry first so that the extreme-temperature
/// gradients (entries proportional to `e^{-gap/T}`) do not underflow when
/// squared.
pub fn gradient_direction_cosine(a: &LogitVector, b: &LogitVector) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch {
            context: "gradient cosine",
            expected: vec![a.len()],
            actual: vec![b.len()],
        });
    }
    let scale = |v: &LogitVector| -> Result<Vec<f64>> {
        let m = v.values().iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
        if m == 0.0 {
            return Err(Error::InvalidParameter(
                "cosine of a zero vector is undefined".into(),
            ));
        }
        Ok(v.values().iter().map(|x| x / m).collect())
    };
    let (sa, sb) = (scale(a)?, scale(b)?);
    let dot: f64 = sa.iter().zip(&sb).map(|(x, y)| x * y).sum();
    let na: f64 = sa.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = sb.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(dot / (na * nb))
}

/// Sum of the gradient entries. Zero (to rounding) for every loss in the
/// family except `wce:<w>` with `w != 1`, where it equals `w - 1`.
pub fn zero_sum_of_gradient(
    kind: LossKind,
    z: &LogitVector,
    interest: &InterestSpec,
) -> Result<f64> {
    Ok(logit_gradient(kind, z, interest)?.values().iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(values: &[f64]) -> LogitVector {
        LogitVector::new(values.to_vec()).unwrap()
    }

    /// Independent probability oracle: plain exp/sum with no stabilization.
    fn naive_probs(values: &[f64]) -> Vec<f64> {
        let exps: Vec<f64> = values.iter().map(|v| v.exp()).collect();
        let total: f64 = exps.iter().sum();
        exps.iter().map(|e| e / total).collect()
    }

    const WORKED: [f64; 3] = [1.0, 0.2, -1.2];

    #[test]
    fn ce_value_on_worked_example() {
        let p = naive_probs(&WORKED);
        let expected = -p[0].ln(); // ~0.4447
        let got = loss_value(LossKind::Ce, &z(&WORKED), &InterestSpec::non_targeted(0)).unwrap();
        assert!((got - expected).abs() < 1e-12);
        assert!((got - 0.445).abs() < 1e-3);
    }

    #[test]
    fn cw_value_reads_off_logits() {
        // j = 1 because 0.2 > -1.2, so the margin is 0.2 - 1.0.
        let got = loss_value(LossKind::Cw, &z(&WORKED), &InterestSpec::non_targeted(0)).unwrap();
        assert!((got - (-0.8)).abs() < 1e-15);
    }

    #[test]
    fn rce_value_matches_per_class_ce_average() {
        // Brute-force oracle: CE(gt) - (1/K) * sum_k CE(k).
        let p = naive_probs(&WORKED);
        let ce: Vec<f64> = p.iter().map(|&v| -v.ln()).collect();
        let expected = ce[0] - ce.iter().sum::<f64>() / 3.0;
        let got = loss_value(LossKind::Rce, &z(&WORKED), &InterestSpec::non_targeted(0)).unwrap();
        assert!((got - expected).abs() < 1e-12);
    }

    #[test]
    fn wce_value_is_rejected() {
        let err =
            loss_value(LossKind::Wce(1.1), &z(&WORKED), &InterestSpec::non_targeted(0)).unwrap_err();
        assert!(matches!(err, Error::GradientOnlyLoss(_)));
    }

    #[test]
    fn gradients_match_published_worked_example() {
        let interest = InterestSpec::non_targeted(0);
        let zv = z(&WORKED);
        let cases: [(LossKind, [f64; 3]); 4] = [
            (LossKind::Ce, [-0.36, 0.29, 0.07]),
            (LossKind::CeLl, [-0.64, -0.29, 0.93]),
            (LossKind::Cw, [-1.0, 1.0, 0.0]),
            (LossKind::Rce, [-0.66, 0.33, 0.33]),
        ];
        for (kind, expected) in cases {
            let g = logit_gradient(kind, &zv, &interest).unwrap();
            for (got, want) in g.values().iter().zip(expected) {
                assert!((got - want).abs() < 0.01, "{kind}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn rce_gradient_ignores_logit_values() {
        let interest = InterestSpec::non_targeted(0);
        let a = logit_gradient(LossKind::Rce, &z(&[5.0, -3.0, 0.4]), &interest).unwrap();
        let b = logit_gradient(LossKind::Rce, &z(&[0.0, 100.0, -2.0]), &interest).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.values(), &[1.0 / 3.0 - 1.0, 1.0 / 3.0, 1.0 / 3.0]);
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        // Central differences of loss_value in logit space, off argmax ties.
        let vectors = [
            vec![1.0, 0.2, -1.2],
            vec![0.3, -0.7, 2.1, 0.9],
            vec![-1.5, 0.4, 0.0, 1.9, -0.3],
        ];
        let kinds = [
            LossKind::Ce,
            LossKind::CeLl,
            LossKind::Cw,
            LossKind::Rce,
            LossKind::RceLl,
            LossKind::CeTemp(0.5),
            LossKind::CeTemp(4.0),
        ];
        let h = 1e-6;
        for values in &vectors {
            let interest = InterestSpec::non_targeted(0);
            for &kind in &kinds {
                let analytic = logit_gradient(kind, &z(values), &interest).unwrap();
                for i in 0..values.len() {
                    let mut plus = values.clone();
                    let mut minus = values.clone();
                    plus[i] += h;
                    minus[i] -= h;
                    let lp = loss_value(kind, &z(&plus), &interest).unwrap();
                    let lm = loss_value(kind, &z(&minus), &interest).unwrap();
                    let numeric = (lp - lm) / (2.0 * h);
                    let denom = analytic[i].abs().max(numeric.abs()).max(1e-6);
                    assert!(
                        (analytic[i] - numeric).abs() / denom <= 1e-6,
                        "{kind} component {i}: analytic {} vs numeric {numeric}",
                        analytic[i]
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_sums_are_zero_except_weighted() {
        let zv = z(&[0.7, -0.2, 1.4, -1.1]);
        let interest = InterestSpec::non_targeted(2);
        for kind in [
            LossKind::Ce,
            LossKind::CeLl,
            LossKind::Cw,
            LossKind::Rce,
            LossKind::RceLl,
            LossKind::CeTemp(0.1),
            LossKind::CeTemp(100.0),
        ] {
            let total = zero_sum_of_gradient(kind, &zv, &interest).unwrap();
            assert!(total.abs() < 1e-12, "{kind} sums to {total}");
        }
        // w*P - Y sums to w - 1.
        let total = zero_sum_of_gradient(LossKind::Wce(1.1), &zv, &interest).unwrap();
        assert!((total - 0.1).abs() < 1e-12);
    }

    #[test]
    fn cosine_basics() {
        let a = z(&[1.0, -2.0, 0.5]);
        let b = z(&[-1.0, 2.0, -0.5]);
        assert!((gradient_direction_cosine(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((gradient_direction_cosine(&a, &b).unwrap() + 1.0).abs() < 1e-12);
        let zero = z(&[0.0, 0.0]);
        assert!(gradient_direction_cosine(&zero, &zero).is_err());
    }

    #[test]
    fn temperature_extremes_recover_rce_and_cw_directions() {
        // The cold temperature keeps e^{-gap/T} above the f64 underflow
        // limit for this logit spread (gap 0.8 at T = 0.01 gives e^{-80}).
        let zv = z(&WORKED);
        let interest = InterestSpec::non_targeted(0);
        let rce = logit_gradient(LossKind::Rce, &zv, &interest).unwrap();
        let cw = logit_gradient(LossKind::Cw, &zv, &interest).unwrap();
        let hot = logit_gradient(LossKind::CeTemp(1000.0), &zv, &interest).unwrap();
        let cold = logit_gradient(LossKind::CeTemp(1e-2), &zv, &interest).unwrap();
        assert!(gradient_direction_cosine(&hot, &rce).unwrap() >= 0.9999);
        assert!(gradient_direction_cosine(&cold, &cw).unwrap() >= 0.9999);
    }

    #[test]
    fn frozen_ll_overrides_current_argmin() {
        let clean = z(&[1.0, 0.2, -1.2]);
        let moved = z(&[1.0, -5.0, -1.2]); // argmin moved to class 1
        let frozen = InterestSpec::non_targeted(0).with_frozen_ll(clean.argmin());
        let g = logit_gradient(LossKind::CeLl, &moved, &frozen).unwrap();
        // +1 still lands on class 2, the frozen least-likely class.
        assert!(g[2] > 0.0);
        let unfrozen = InterestSpec::non_targeted(0);
        let g2 = logit_gradient(LossKind::CeLl, &moved, &unfrozen).unwrap();
        assert!(g2[1] > 0.0);
    }

    #[test]
    fn loss_name_round_trip() {
        for kind in [
            LossKind::Ce,
            LossKind::CeLl,
            LossKind::Cw,
            LossKind::Rce,
            LossKind::RceLl,
            LossKind::CeTemp(0.125),
            LossKind::Wce(1.1),
        ] {
            let parsed: LossKind = kind.to_string().parse().unwrap();
            assert_eq!(parsed, kind);
        }
        assert!("bogus".parse::<LossKind>().is_err());
        assert!("ce-temp:0".parse::<LossKind>().is_err());
        assert!("wce:-1".parse::<LossKind>().is_err());
    }
}
