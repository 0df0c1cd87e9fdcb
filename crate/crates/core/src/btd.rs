//! Count features, the Davidson tie model, absolute-error risks and DRPS.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two risks closer than this are treated as equal by [`bayes_action`].
pub const RISK_TIE_TOLERANCE: f64 = 1e-12;

/// Tolerance on `p_minus + p_tie + p_plus == 1`.
pub const SIMPLEX_TOLERANCE: f64 = 1e-12;

/// One ordinal label: the second response is better (`Minus`), neither is
/// (`Tie`), or the first response is better (`Plus`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i64", into = "i64")]
pub enum Verdict {
    Minus,
    Tie,
    Plus,
}

impl Verdict {
    pub const ALL: [Verdict; 3] = [Verdict::Minus, Verdict::Tie, Verdict::Plus];

    pub fn value(self) -> i8 {
        match self {
            Verdict::Minus => -1,
            Verdict::Tie => 0,
            Verdict::Plus => 1,
        }
    }

    /// Position in `(-1, 0, +1)` order.
    pub fn index(self) -> usize {
        (self.value() + 1) as usize
    }

    pub fn negate(self) -> Verdict {
        match self {
            Verdict::Minus => Verdict::Plus,
            Verdict::Tie => Verdict::Tie,
            Verdict::Plus => Verdict::Minus,
        }
    }

    /// `|self - other|`, the per-item absolute error.
    pub fn distance(self, other: Verdict) -> u8 {
        (self.value() - other.value()).unsigned_abs()
    }
}

impl TryFrom<i64> for Verdict {
    type Error = String;

    fn try_from(value: i64) -> std::result::Result<Self, Self::Error> {
        match value {
            -1 => Ok(Verdict::Minus),
            0 => Ok(Verdict::Tie),
            1 => Ok(Verdict::Plus),
            other => Err(format!("label must be -1, 0 or 1, got {other}")),
        }
    }
}

impl From<Verdict> for i64 {
    fn from(v: Verdict) -> i64 {
        i64::from(v.value())
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Tallied votes for one item. At least one vote is always present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VoteCounts {
    plus: u32,
    minus: u32,
    tie: u32,
}

impl VoteCounts {
    pub fn new(plus: u32, minus: u32, tie: u32) -> Result<Self> {
        let counts = VoteCounts { plus, minus, tie };
        if counts.total() == 0 {
            return Err(Error::invalid("vote counts must contain at least one vote"));
        }
        Ok(counts)
    }

    pub fn from_verdicts<I: IntoIterator<Item = Verdict>>(votes: I) -> Result<Self> {
        let mut counts = VoteCounts {
            plus: 0,
            minus: 0,
            tie: 0,
        };
        for vote in votes {
            match vote {
                Verdict::Minus => counts.minus += 1,
                Verdict::Tie => counts.tie += 1,
                Verdict::Plus => counts.plus += 1,
            }
        }
        VoteCounts::new(counts.plus, counts.minus, counts.tie)
    }

    pub fn plus(&self) -> u32 {
        self.plus
    }

    pub fn minus(&self) -> u32 {
        self.minus
    }

    pub fn tie(&self) -> u32 {
        self.tie
    }

    pub fn total(&self) -> u32 {
        self.plus + self.minus + self.tie
    }

    pub fn get(&self, label: Verdict) -> u32 {
        match label {
            Verdict::Minus => self.minus,
            Verdict::Tie => self.tie,
            Verdict::Plus => self.plus,
        }
    }

    /// The same tally with the two responses exchanged.
    pub fn swapped(&self) -> VoteCounts {
        VoteCounts {
            plus: self.minus,
            minus: self.plus,
            tie: self.tie,
        }
    }
}

/// Additive smoothing for the margin (`alpha`) and tie (`kappa`) features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    pub alpha: f64,
    pub kappa: f64,
}

impl Smoothing {
    pub fn new(alpha: f64, kappa: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0 && kappa.is_finite() && kappa > 0.0) {
            return Err(Error::invalid(format!(
                "smoothing must be positive and finite, got alpha={alpha}, kappa={kappa}"
            )));
        }
        Ok(Smoothing { alpha, kappa })
    }
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing {
            alpha: 1.0,
            kappa: 1.0,
        }
    }
}

/// Count features of one item: `s` is the smoothed half log-odds of `+1` over
/// `-1` votes, `t <= 0` is the smoothed log share of tie votes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeaturePair {
    pub s: f64,
    pub t: f64,
}

pub fn compute_features(counts: &VoteCounts, smoothing: &Smoothing) -> FeaturePair {
    let plus = f64::from(counts.plus());
    let minus = f64::from(counts.minus());
    let tie = f64::from(counts.tie());
    let n = f64::from(counts.total());
    // Difference of logs keeps s exactly antisymmetric under swapping.
    let s = 0.5 * ((plus + smoothing.alpha).ln() - (minus + smoothing.alpha).ln());
    // min() guards the last ulp: c0 + kappa <= n + kappa holds exactly in reals.
    let t = ((tie + smoothing.kappa) / (n + smoothing.kappa)).ln().min(0.0);
    FeaturePair { s, t }
}

/// Closed interval for one parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub lo: f64,
    pub hi: f64,
}

impl Bounds {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::invalid(format!("invalid bounds [{lo}, {hi}]")));
        }
        Ok(Bounds { lo, hi })
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.clamp(self.lo, self.hi)
    }
}

/// Box constraints on `(beta, nu, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub beta: Bounds,
    pub nu: Bounds,
    pub gamma: Bounds,
}

impl ParamBox {
    pub fn new(beta: Bounds, nu: Bounds, gamma: Bounds) -> Result<Self> {
        if beta.lo < 0.0 {
            return Err(Error::invalid("beta lower bound must be non-negative"));
        }
        if nu.lo <= 0.0 {
            return Err(Error::invalid("nu lower bound must be positive"));
        }
        Ok(ParamBox { beta, nu, gamma })
    }

    /// `[beta_lo, beta_hi, nu_lo, nu_hi, gamma_lo, gamma_hi]`
    pub fn from_array(v: [f64; 6]) -> Result<Self> {
        ParamBox::new(
            Bounds::new(v[0], v[1])?,
            Bounds::new(v[2], v[3])?,
            Bounds::new(v[4], v[5])?,
        )
    }

    pub fn to_array(&self) -> [f64; 6] {
        [
            self.beta.lo,
            self.beta.hi,
            self.nu.lo,
            self.nu.hi,
            self.gamma.lo,
            self.gamma.hi,
        ]
    }

    pub fn contains(&self, params: &DavidsonParams) -> bool {
        self.beta.contains(params.beta)
            && self.nu.contains(params.nu)
            && self.gamma.contains(params.gamma)
    }

    pub fn clamp(&self, params: &DavidsonParams) -> DavidsonParams {
        DavidsonParams {
            beta: self.beta.clamp(params.beta),
            nu: self.nu.clamp(params.nu),
            gamma: self.gamma.clamp(params.gamma),
        }
    }
}

impl Default for ParamBox {
    fn default() -> Self {
        ParamBox {
            beta: Bounds { lo: 1e-3, hi: 5.0 },
            nu: Bounds { lo: 1e-4, hi: 1e3 },
            gamma: Bounds {
                lo: -10.0,
                hi: 10.0,
            },
        }
    }
}

/// Model parameters: margin sensitivity `beta`, baseline tie propensity
/// `nu = exp(eta0)` and tie-count sensitivity `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DavidsonParams {
    pub beta: f64,
    pub nu: f64,
    pub gamma: f64,
}

impl DavidsonParams {
    pub fn new(beta: f64, nu: f64, gamma: f64) -> Result<Self> {
        if !(beta.is_finite() && nu.is_finite() && gamma.is_finite()) {
            return Err(Error::invalid("parameters must be finite"));
        }
        if beta < 0.0 || nu <= 0.0 {
            return Err(Error::invalid(format!(
                "need beta >= 0 and nu > 0, got beta={beta}, nu={nu}"
            )));
        }
        Ok(DavidsonParams { beta, nu, gamma })
    }

    pub fn eta0(&self) -> f64 {
        self.nu.ln()
    }
}

/// A forecast over `(-1, 0, +1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TernaryDistribution {
    p_minus: f64,
    p_tie: f64,
    p_plus: f64,
}

impl TernaryDistribution {
    pub fn new(p_minus: f64, p_tie: f64, p_plus: f64) -> Result<Self> {
        let in_unit = |p: f64| (0.0..=1.0).contains(&p);
        if !(in_unit(p_minus) && in_unit(p_tie) && in_unit(p_plus)) {
            return Err(Error::invalid(format!(
                "probabilities must lie in [0, 1]: ({p_minus}, {p_tie}, {p_plus})"
            )));
        }
        let sum = p_minus + p_tie + p_plus;
        if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
            return Err(Error::invalid(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(TernaryDistribution {
            p_minus,
            p_tie,
            p_plus,
        })
    }

    pub fn uniform() -> Self {
        TernaryDistribution {
            p_minus: 1.0 / 3.0,
            p_tie: 1.0 / 3.0,
            p_plus: 1.0 / 3.0,
        }
    }

    pub fn point_mass(label: Verdict) -> Self {
        let mut p = [0.0; 3];
        p[label.index()] = 1.0;
        TernaryDistribution {
            p_minus: p[0],
            p_tie: p[1],
            p_plus: p[2],
        }
    }

    pub fn p_minus(&self) -> f64 {
        self.p_minus
    }

    pub fn p_tie(&self) -> f64 {
        self.p_tie
    }

    pub fn p_plus(&self) -> f64 {
        self.p_plus
    }

    pub fn prob(&self, label: Verdict) -> f64 {
        match label {
            Verdict::Minus => self.p_minus,
            Verdict::Tie => self.p_tie,
            Verdict::Plus => self.p_plus,
        }
    }

    /// `[p(-1), p(0), p(+1)]`
    pub fn as_array(&self) -> [f64; 3] {
        [self.p_minus, self.p_tie, self.p_plus]
    }

    pub fn swapped(&self) -> TernaryDistribution {
        TernaryDistribution {
            p_minus: self.p_plus,
            p_tie: self.p_tie,
            p_plus: self.p_minus,
        }
    }
}

/// Softmax over the logits `(-u, eta, u)` with the maximum subtracted first.
pub(crate) fn softmax3(u: f64, eta: f64) -> [f64; 3] {
    let m = u.abs().max(eta);
    let e_minus = (-u - m).exp();
    let e_tie = (eta - m).exp();
    let e_plus = (u - m).exp();
    let z = (e_minus + e_plus) + e_tie;
    [e_minus / z, e_tie / z, e_plus / z]
}

pub fn davidson_probs(features: &FeaturePair, params: &DavidsonParams) -> TernaryDistribution {
    let u = params.beta * features.s;
    let eta = params.eta0() + params.gamma * features.t;
    let [p_minus, p_tie, p_plus] = softmax3(u, eta);
    TernaryDistribution {
        p_minus,
        p_tie,
        p_plus,
    }
}

/// Expected absolute error of answering each label.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Risks {
    pub minus: f64,
    pub tie: f64,
    pub plus: f64,
}

impl Risks {
    pub fn get(&self, label: Verdict) -> f64 {
        match label {
            Verdict::Minus => self.minus,
            Verdict::Tie => self.tie,
            Verdict::Plus => self.plus,
        }
    }

    pub fn min(&self) -> f64 {
        self.minus.min(self.tie).min(self.plus)
    }
}

pub fn mae_risks(dist: &TernaryDistribution) -> Risks {
    Risks {
        minus: dist.p_tie + 2.0 * dist.p_plus,
        tie: dist.p_plus + dist.p_minus,
        plus: 2.0 * dist.p_minus + dist.p_tie,
    }
}

/// The label with the smallest absolute-error risk.
///
/// Risks within [`RISK_TIE_TOLERANCE`] of the minimum count as tied. Ties go
/// to `0` first, then to the more probable label, then to `+1`.
pub fn bayes_action(dist: &TernaryDistribution) -> Verdict {
    let risks = mae_risks(dist);
    let best = risks.min();
    let minimal = |label| risks.get(label) <= best + RISK_TIE_TOLERANCE;
    if minimal(Verdict::Tie) {
        return Verdict::Tie;
    }
    match (minimal(Verdict::Minus), minimal(Verdict::Plus)) {
        (true, false) => Verdict::Minus,
        (false, true) => Verdict::Plus,
        _ if dist.p_minus > dist.p_plus => Verdict::Minus,
        _ => Verdict::Plus,
    }
}

/// Squared distance between the forecast CDF and the realized step CDF,
/// summed over the two interior cut points. Always in `[0, 2]`.
pub fn drps(dist: &TernaryDistribution, truth: Verdict) -> f64 {
    let (h_minus, h_tie) = cdf_indicators(truth);
    let f_minus = dist.p_minus;
    let f_tie = dist.p_minus + dist.p_tie;
    (f_minus - h_minus).powi(2) + (f_tie - h_tie).powi(2)
}

/// `(1{y <= -1}, 1{y <= 0})`
pub(crate) fn cdf_indicators(truth: Verdict) -> (f64, f64) {
    match truth {
        Verdict::Minus => (1.0, 1.0),
        Verdict::Tie => (0.0, 1.0),
        Verdict::Plus => (0.0, 0.0),
    }
}

/// Features, probabilities and decision bundled for inference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BtdModel {
    pub params: DavidsonParams,
    pub smoothing: Smoothing,
}

impl BtdModel {
    pub fn new(params: DavidsonParams, smoothing: Smoothing) -> Self {
        BtdModel { params, smoothing }
    }

    pub fn distribution(&self, counts: &VoteCounts) -> TernaryDistribution {
        davidson_probs(&compute_features(counts, &self.smoothing), &self.params)
    }

    pub fn predict(&self, counts: &VoteCounts) -> Verdict {
        bayes_action(&self.distribution(counts))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const TOL: f64 = 1e-9;

    fn counts(plus: u32, minus: u32, tie: u32) -> VoteCounts {
        VoteCounts::new(plus, minus, tie).unwrap()
    }

    fn dist(p_minus: f64, p_tie: f64, p_plus: f64) -> TernaryDistribution {
        TernaryDistribution::new(p_minus, p_tie, p_plus).unwrap()
    }

    #[test]
    fn features_of_three_to_one() {
        let f = compute_features(&counts(3, 1, 0), &Smoothing::default());
        // 0.5 * ln(4 / 2) and ln(1 / 5)
        assert!((f.s - 0.346_573_590_279_972_6).abs() < TOL);
        assert!((f.t - -1.609_437_912_434_100_3).abs() < TOL);
    }

    #[test]
    fn all_ties_give_zero_features() {
        for n in [1, 4, 20] {
            for smoothing in [Smoothing::default(), Smoothing::new(0.3, 2.5).unwrap()] {
                let f = compute_features(&counts(0, 0, n), &smoothing);
                assert_eq!(f.s, 0.0);
                assert_eq!(f.t, 0.0);
            }
        }
    }

    #[test]
    fn margin_is_antisymmetric() {
        let a = compute_features(&counts(5, 2, 3), &Smoothing::default());
        let b = compute_features(&counts(2, 5, 3), &Smoothing::default());
        assert_eq!(a.s, -b.s);
        assert_eq!(a.t, b.t);
    }

    #[test]
    fn empty_counts_rejected() {
        assert!(VoteCounts::new(0, 0, 0).is_err());
        assert!(VoteCounts::from_verdicts([]).is_err());
        assert!(Smoothing::new(0.0, 1.0).is_err());
        assert!(Smoothing::new(1.0, -1.0).is_err());
    }

    #[test]
    fn identity_case_is_uniform() {
        let p = davidson_probs(
            &FeaturePair { s: 0.0, t: -1.3 },
            &DavidsonParams::new(2.0, 1.0, 0.0).unwrap(),
        );
        for x in p.as_array() {
            assert!((x - 1.0 / 3.0).abs() < TOL);
        }
    }

    #[test]
    fn probabilities_with_log_two_margin() {
        // u = ln 2, eta = 0: Z = 2 + 1/2 + 1 = 3.5
        let p = davidson_probs(
            &FeaturePair {
                s: 2f64.ln(),
                t: -0.7,
            },
            &DavidsonParams::new(1.0, 1.0, 0.0).unwrap(),
        );
        assert!((p.p_plus() - 2.0 / 3.5).abs() < TOL);
        assert!((p.p_minus() - 0.5 / 3.5).abs() < TOL);
        assert!((p.p_tie() - 1.0 / 3.5).abs() < TOL);
    }

    #[test]
    fn negated_margin_swaps_directional_mass() {
        let params = DavidsonParams::new(1.7, 3.0, 0.4).unwrap();
        let a = davidson_probs(&FeaturePair { s: 0.8, t: -1.0 }, &params);
        let b = davidson_probs(&FeaturePair { s: -0.8, t: -1.0 }, &params);
        assert_eq!(a.p_plus(), b.p_minus());
        assert_eq!(a.p_minus(), b.p_plus());
        assert_eq!(a.p_tie(), b.p_tie());
    }

    #[test]
    fn extreme_logits_stay_finite() {
        let params = DavidsonParams::new(5.0, 1e3, -10.0).unwrap();
        let p = davidson_probs(&FeaturePair { s: 200.0, t: -80.0 }, &params);
        assert!(p.as_array().iter().all(|x| x.is_finite()));
        assert!((p.as_array().iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn risks_examples() {
        let r = mae_risks(&TernaryDistribution::uniform());
        assert!((r.minus - 1.0).abs() < TOL);
        assert!((r.tie - 2.0 / 3.0).abs() < TOL);
        assert!((r.plus - 1.0).abs() < TOL);

        let r = mae_risks(&dist(0.0, 0.2, 0.8));
        assert!((r.minus - 1.8).abs() < TOL);
        assert!((r.tie - 0.8).abs() < TOL);
        assert!((r.plus - 0.2).abs() < TOL);

        let r = mae_risks(&dist(0.0, 1.0, 0.0));
        assert_eq!((r.minus, r.tie, r.plus), (1.0, 0.0, 1.0));
    }

    #[test]
    fn bayes_action_examples() {
        assert_eq!(bayes_action(&TernaryDistribution::uniform()), Verdict::Tie);
        assert_eq!(bayes_action(&dist(0.0, 0.2, 0.8)), Verdict::Plus);
        // R(0) = R(+1) = 0.7 exactly on the boundary
        assert_eq!(bayes_action(&dist(0.2, 0.3, 0.5)), Verdict::Tie);
        assert_eq!(bayes_action(&dist(0.5, 0.3, 0.2)), Verdict::Tie);
        assert_eq!(bayes_action(&dist(0.6, 0.1, 0.3)), Verdict::Minus);
    }

    #[test]
    fn drps_examples() {
        for label in Verdict::ALL {
            assert_eq!(drps(&TernaryDistribution::point_mass(label), label), 0.0);
        }
        let u = TernaryDistribution::uniform();
        assert!((drps(&u, Verdict::Minus) - 5.0 / 9.0).abs() < TOL);
        assert!((drps(&u, Verdict::Tie) - 2.0 / 9.0).abs() < TOL);
        assert!((drps(&u, Verdict::Plus) - 5.0 / 9.0).abs() < TOL);
        // Maximal disagreement.
        assert_eq!(
            drps(&TernaryDistribution::point_mass(Verdict::Plus), Verdict::Minus),
            2.0
        );
    }

    #[test]
    fn distribution_validation() {
        assert!(TernaryDistribution::new(0.5, 0.5, 0.1).is_err());
        assert!(TernaryDistribution::new(-0.1, 0.6, 0.5).is_err());
        assert!(TernaryDistribution::new(0.2, 0.3, 0.5).is_ok());
    }

    #[test]
    fn verdict_wire_format() {
        assert_eq!(serde_json::to_string(&Verdict::Minus).unwrap(), "-1");
        assert_eq!(serde_json::from_str::<Verdict>("1").unwrap(), Verdict::Plus);
        assert!(serde_json::from_str::<Verdict>("2").is_err());
    }

    fn arb_counts() -> impl Strategy<Value = VoteCounts> {
        (0u32..40, 0u32..40, 0u32..40)
            .prop_filter("non-empty", |(a, b, c)| a + b + c > 0)
            .prop_map(|(a, b, c)| VoteCounts::new(a, b, c).unwrap())
    }

    fn arb_params() -> impl Strategy<Value = DavidsonParams> {
        (1e-3f64..5.0, -4.0f64..3.0, -10.0f64..10.0)
            .prop_map(|(b, log_nu, g)| DavidsonParams::new(b, 10f64.powf(log_nu), g).unwrap())
    }

    proptest! {
        #[test]
        fn probabilities_lie_on_simplex(c in arb_counts(), params in arb_params()) {
            let p = davidson_probs(&compute_features(&c, &Smoothing::default()), &params);
            prop_assert!(p.as_array().iter().all(|x| (0.0..=1.0).contains(x)));
            prop_assert!((p.as_array().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn swapping_responses_mirrors_everything(c in arb_counts(), params in arb_params()) {
            let model = BtdModel::new(params, Smoothing::default());
            let f = compute_features(&c, &model.smoothing);
            let g = compute_features(&c.swapped(), &model.smoothing);
            prop_assert_eq!(f.s, -g.s);
            let p = model.distribution(&c);
            let q = model.distribution(&c.swapped());
            prop_assert_eq!(p.swapped(), q);
            let (rp, rq) = (mae_risks(&p), mae_risks(&q));
            prop_assert_eq!(rp.plus, rq.minus);
            prop_assert_eq!(rp.minus, rq.plus);
            prop_assert_eq!(model.predict(&c).negate(), model.predict(&c.swapped()));
        }

        #[test]
        fn tie_votes_never_lower_tie_mass(
            plus in 0u32..30, minus in 0u32..30, tie in 0u32..30,
            beta in 1e-3f64..5.0, nu in 1e-4f64..1e3, gamma in 0.0f64..10.0,
        ) {
            // Hold s fixed and add one more tie vote.
            let params = DavidsonParams::new(beta, nu, gamma).unwrap();
            let model = BtdModel::new(params, Smoothing::default());
            let before = VoteCounts::new(plus, minus, tie + 1).unwrap();
            let after = VoteCounts::new(plus, minus, tie + 2).unwrap();
            prop_assert!(model.distribution(&after).p_tie() >= model.distribution(&before).p_tie());
        }

        #[test]
        fn drps_stays_in_range(a in 0.0f64..1.0, b in 0.0f64..1.0, y in 0usize..3) {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            let d = TernaryDistribution::new(lo, hi - lo, 1.0 - hi);
            prop_assume!(d.is_ok());
            let score = drps(&d.unwrap(), Verdict::ALL[y]);
            prop_assert!((0.0..=2.0).contains(&score));
        }
    }
}
