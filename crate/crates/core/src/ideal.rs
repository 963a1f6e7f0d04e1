//! Ideals and filters on ω with finite descriptions, duality, and the
//! rule-based JNP/BJNP status engine.

use num_integer::Integer;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::citation::citation;
use crate::error::{Error, Result};
use crate::omega::OmegaSet;
use crate::rational::pow2;
use crate::submeasure::{Decision, DensitySpec, MemberReport, SubmeasureSpec, Tallness};

/// Longest stretch of ω a limit-filter membership scan will walk.
pub const LIMIT_SCAN_CAP: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IdealSpec {
    Fin,
    #[serde(rename = "exh")]
    ExhOf {
        submeasure: SubmeasureSpec,
    },
    FinOf {
        submeasure: SubmeasureSpec,
    },
    DualOf {
        filter: Box<FilterSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilterSpec {
    Frechet,
    /// Sets containing all but finitely many points of `set`.
    FrOn {
        #[serde(deserialize_with = "infinite_coinfinite")]
        set: OmegaSet,
    },
    DualOf {
        ideal: Box<IdealSpec>,
    },
    /// F0 ⊕ F1 on ω, with (n, i) coded as 2n + i.
    FreeSum {
        left: Box<FilterSpec>,
        right: Box<FilterSpec>,
    },
    LimitFilter(LimitFilter),
}

fn infinite_coinfinite<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<OmegaSet, D::Error> {
    let s = OmegaSet::deserialize(d)?;
    check_infinite_coinfinite(&s).map_err(serde::de::Error::custom)?;
    Ok(s)
}

fn check_infinite_coinfinite(s: &OmegaSet) -> Result<()> {
    if s.is_finite() || s.is_cofinite() {
        return Err(Error::InvalidInput(format!(
            "{s} must be infinite and co-infinite"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BlockKind {
    /// The principal filter at `start + offset`.
    Principal { offset: u64 },
    /// Only sets containing the whole block count as large.
    FrechetBlock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitBlock {
    pub start: u64,
    pub len: u64,
    #[serde(flatten)]
    pub kind: BlockKind,
}

/// Limit filter over blocks laid out periodically: the pattern `blocks`
/// tiles `[0, period)` and is repeated at `origin + r·period` for r ≥ 0.
/// A set is large when it meets the block filters of all but finitely many
/// blocks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LimitRepr")]
pub struct LimitFilter {
    origin: u64,
    period: u64,
    blocks: Vec<LimitBlock>,
}

#[derive(Deserialize)]
struct LimitRepr {
    origin: u64,
    period: u64,
    blocks: Vec<LimitBlock>,
}

impl TryFrom<LimitRepr> for LimitFilter {
    type Error = Error;
    fn try_from(r: LimitRepr) -> Result<Self> {
        LimitFilter::new(r.origin, r.period, r.blocks)
    }
}

impl LimitFilter {
    pub fn new(origin: u64, period: u64, blocks: Vec<LimitBlock>) -> Result<Self> {
        let mut next = 0;
        for (i, b) in blocks.iter().enumerate() {
            if b.start != next || b.len == 0 {
                return Err(Error::InvalidInput(format!(
                    "limit block {i} must start at {next} and be non-empty"
                )));
            }
            if let BlockKind::Principal { offset } = b.kind {
                if offset >= b.len {
                    return Err(Error::InvalidInput(format!(
                        "limit block {i}: offset outside the block"
                    )));
                }
            }
            next += b.len;
        }
        if period == 0 || next != period {
            return Err(Error::InvalidInput(format!(
                "limit blocks cover [0, {next}) but the period is {period}"
            )));
        }
        Ok(LimitFilter {
            origin,
            period,
            blocks,
        })
    }

    /// Each point of ω as its own principal block, i.e. the Fréchet filter.
    pub fn singletons() -> Self {
        LimitFilter {
            origin: 0,
            period: 1,
            blocks: vec![LimitBlock {
                start: 0,
                len: 1,
                kind: BlockKind::Principal { offset: 0 },
            }],
        }
    }

    fn block_ok(&self, a: &OmegaSet, base: u64, b: &LimitBlock) -> bool {
        let lo = base + b.start;
        match b.kind {
            BlockKind::Principal { offset } => a.contains(lo + offset),
            BlockKind::FrechetBlock => (lo..lo + b.len).all(|x| a.contains(x)),
        }
    }

    /// Block r behaves periodically in r once its base passes the prefix of
    /// A, so one period of repetitions decides the eventual behavior.
    pub fn member(&self, a: &OmegaSet) -> MemberReport {
        let prefix = a.prefix_len();
        let r0 = prefix.saturating_sub(self.origin).div_ceil(self.period);
        let reps = a.period() / a.period().gcd(&self.period);
        if reps.saturating_mul(self.period) > LIMIT_SCAN_CAP {
            return MemberReport::new(Decision::Unknown, "limit-scan-too-long", None);
        }
        let all = (r0..r0 + reps).all(|r| {
            let base = self.origin + r * self.period;
            self.blocks.iter().all(|b| self.block_ok(a, base, b))
        });
        let d = if all { Decision::In } else { Decision::Out };
        MemberReport::new(d, "limit-filter-scan", None)
    }
}

fn both(x: Decision, y: Decision) -> Decision {
    match (x, y) {
        (Decision::Out, _) | (_, Decision::Out) => Decision::Out,
        (Decision::In, Decision::In) => Decision::In,
        _ => Decision::Unknown,
    }
}

impl IdealSpec {
    pub fn exh(submeasure: SubmeasureSpec) -> Self {
        IdealSpec::ExhOf { submeasure }
    }

    pub fn fin_of(submeasure: SubmeasureSpec) -> Self {
        IdealSpec::FinOf { submeasure }
    }

    pub fn member(&self, a: &OmegaSet, precision: u32) -> MemberReport {
        match self {
            IdealSpec::Fin => {
                let d = if a.is_finite() {
                    Decision::In
                } else {
                    Decision::Out
                };
                MemberReport::new(d, "finite-set", None)
            }
            IdealSpec::ExhOf { submeasure } => submeasure.exh_member(a, precision),
            IdealSpec::FinOf { submeasure } => submeasure.fin_member(a, precision),
            IdealSpec::DualOf { filter } => filter.member(&a.complement(), precision),
        }
    }

    pub fn dual(&self) -> FilterSpec {
        match self {
            IdealSpec::Fin => FilterSpec::Frechet,
            IdealSpec::DualOf { filter } => (**filter).clone(),
            other => FilterSpec::DualOf {
                ideal: Box::new(other.clone()),
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum JnpStatus {
    Jnp,
    NoJnp,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BjnpStatus {
    Bjnp,
    NoBjnp,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict<S> {
    pub status: S,
    pub rule: &'static str,
    pub citation: &'static str,
    /// CLI command that synthesizes a witnessing sequence.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recipe: Option<&'static str>,
}

impl<S> Verdict<S> {
    fn new(status: S, rule: &'static str) -> Self {
        Verdict {
            status,
            rule,
            citation: citation(rule),
            recipe: None,
        }
    }

    fn with_recipe(mut self, recipe: &'static str) -> Self {
        self.recipe = Some(recipe);
        self
    }
}

/// The submeasure behind a filter of the form Exh(φ)* or Fin(φ)*, when the
/// two ideals coincide or only Exh is involved.
fn dual_submeasure(f: &FilterSpec) -> Option<(&SubmeasureSpec, bool)> {
    match f {
        FilterSpec::DualOf { ideal } => match &**ideal {
            IdealSpec::ExhOf { submeasure } => Some((submeasure, true)),
            IdealSpec::FinOf { submeasure } => Some((submeasure, false)),
            _ => None,
        },
        _ => None,
    }
}

/// Contracts ε_n ≤ 2^-n on every block.
fn pathological(b: &crate::submeasure::BlockSum) -> bool {
    b.contracts().is_some_and(|eps| {
        !eps.is_empty()
            && eps
                .iter()
                .enumerate()
                .all(|(n, e)| e.is_positive() && *e <= pow2(-(n as i64)))
    })
}

impl FilterSpec {
    pub fn fr_on(set: OmegaSet) -> Result<Self> {
        check_infinite_coinfinite(&set)?;
        Ok(FilterSpec::FrOn { set })
    }

    pub fn dual_of(ideal: IdealSpec) -> Self {
        ideal.dual()
    }

    pub fn free_sum(left: FilterSpec, right: FilterSpec) -> Self {
        FilterSpec::FreeSum {
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// The dual filter of the density ideal.
    pub fn density() -> Self {
        IdealSpec::exh(SubmeasureSpec::density_canonical()).dual()
    }

    pub fn member(&self, a: &OmegaSet, precision: u32) -> MemberReport {
        match self {
            FilterSpec::Frechet => {
                let d = if a.is_cofinite() {
                    Decision::In
                } else {
                    Decision::Out
                };
                MemberReport::new(d, "cofinite", None)
            }
            FilterSpec::FrOn { set } => {
                let d = if set.difference(a).is_finite() {
                    Decision::In
                } else {
                    Decision::Out
                };
                MemberReport::new(d, "almost-contains", None)
            }
            FilterSpec::DualOf { ideal } => {
                let r = ideal.member(&a.complement(), precision);
                MemberReport::new(r.decision, r.rule, r.bounds)
            }
            FilterSpec::FreeSum { left, right } => {
                let l = left.member(&a.decimate(2, 0), precision);
                let r = right.member(&a.decimate(2, 1), precision);
                MemberReport::new(both(l.decision, r.decision), "free-sum-coordinates", None)
            }
            FilterSpec::LimitFilter(lf) => lf.member(a),
        }
    }

    pub fn dual(&self) -> IdealSpec {
        match self {
            FilterSpec::Frechet => IdealSpec::Fin,
            FilterSpec::DualOf { ideal } => (**ideal).clone(),
            other => IdealSpec::DualOf {
                filter: Box::new(other.clone()),
            },
        }
    }

    pub fn jnp_status(&self) -> Verdict<JnpStatus> {
        match self {
            FilterSpec::Frechet | FilterSpec::FrOn { .. } => {
                Verdict::new(JnpStatus::Jnp, "convergent-sequence")
            }
            FilterSpec::LimitFilter(_) => Verdict::new(JnpStatus::Jnp, "limit-filter-selector"),
            FilterSpec::FreeSum { left, right } => {
                let (l, r) = (left.jnp_status().status, right.jnp_status().status);
                let s = match (l, r) {
                    (JnpStatus::Jnp, _) | (_, JnpStatus::Jnp) => JnpStatus::Jnp,
                    (JnpStatus::NoJnp, JnpStatus::NoJnp) => JnpStatus::NoJnp,
                    _ => JnpStatus::Unknown,
                };
                Verdict::new(s, "free-sum")
            }
            FilterSpec::DualOf { ideal } => match &**ideal {
                IdealSpec::Fin => Verdict::new(JnpStatus::Jnp, "convergent-sequence"),
                IdealSpec::DualOf { filter } => filter.jnp_status(),
                IdealSpec::ExhOf { submeasure } => tallness_verdict(submeasure.is_tall()),
                IdealSpec::FinOf { submeasure } => match submeasure {
                    // Fin(φ) = Exh(φ) for summable φ
                    SubmeasureSpec::Summable(_) => tallness_verdict(submeasure.is_tall()),
                    _ => Verdict::new(JnpStatus::Unknown, "none"),
                },
            },
        }
    }

    pub fn bjnp_status(&self) -> Verdict<BjnpStatus> {
        if self.jnp_status().status == JnpStatus::Jnp {
            return Verdict::new(BjnpStatus::Bjnp, "jnp-implies-bjnp");
        }
        if let FilterSpec::FreeSum { left, right } = self {
            let (l, r) = (left.bjnp_status(), right.bjnp_status());
            let s = match (l.status, r.status) {
                (BjnpStatus::Bjnp, _) | (_, BjnpStatus::Bjnp) => BjnpStatus::Bjnp,
                (BjnpStatus::NoBjnp, BjnpStatus::NoBjnp) => BjnpStatus::NoBjnp,
                _ => BjnpStatus::Unknown,
            };
            let v = Verdict::new(s, "free-sum");
            return match [l, r]
                .into_iter()
                .find(|x| x.status == BjnpStatus::Bjnp)
                .and_then(|x| x.recipe)
            {
                Some(recipe) if s == BjnpStatus::Bjnp => v.with_recipe(recipe),
                _ => v,
            };
        }
        if let FilterSpec::DualOf { ideal } = self {
            if let IdealSpec::DualOf { filter } = &**ideal {
                return filter.bjnp_status();
            }
        }
        match dual_submeasure(self) {
            Some((SubmeasureSpec::Summable(_), _)) => {
                Verdict::new(BjnpStatus::Bjnp, "summable-bjnp").with_recipe("bjn synth-nonpath")
            }
            Some((SubmeasureSpec::Density(DensitySpec::Canonical { truncate: None }), true)) => {
                Verdict::new(BjnpStatus::Bjnp, "density-bjnp").with_recipe("bjn synth-density")
            }
            Some((SubmeasureSpec::BlockSum(b), _)) if pathological(b) => {
                Verdict::new(BjnpStatus::NoBjnp, "pathological-blocks")
            }
            _ => Verdict::new(BjnpStatus::Unknown, "none"),
        }
    }
}

fn tallness_verdict(t: Tallness) -> Verdict<JnpStatus> {
    let s = match t {
        Tallness::Tall => JnpStatus::NoJnp,
        Tallness::NotTall => JnpStatus::Jnp,
        Tallness::Unknown => JnpStatus::Unknown,
    };
    Verdict::new(s, "jnp-iff-dual-ideal-not-tall")
}

/// The dual filter of the summable ideal with weights (n+1)^-p.
pub fn summable_filter(p: crate::Q) -> Result<FilterSpec> {
    Ok(IdealSpec::exh(SubmeasureSpec::power(p)?).dual())
}
