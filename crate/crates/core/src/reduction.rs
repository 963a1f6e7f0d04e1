//! Katětov reductions into the density filter: quantized transfer of one
//! probability measure onto another, the block schedule, and assembly and
//! audit of the piecewise witness map.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::citation::citation;
use crate::error::{Error, Result};
use crate::ideal::FilterSpec;
use crate::measure::{FinMeasure, Point};
use crate::omega::OmegaSet;
use crate::rational::{self, q, Q};
use crate::submeasure::{Decision, DensitySpec};

/// A map from the support of the source measure onto the target support.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransferMap {
    pub map: BTreeMap<u64, u64>,
    /// Target receiving every source atom left over after packing.
    pub overflow_target: u64,
    #[serde(with = "crate::rational")]
    pub epsilon: Q,
    /// sup over C ⊆ A of |λ(C) − μ(f⁻¹C)|.
    #[serde(with = "crate::rational")]
    pub guarantee: Q,
}

fn nat_atoms(m: &FinMeasure, what: &str) -> Result<Vec<(u64, Q)>> {
    if m.has_star() || !m.is_probability() {
        return Err(Error::Precondition(format!(
            "{what} must be a probability measure on ω"
        )));
    }
    Ok(m.atoms()
        .iter()
        .filter_map(|(p, w)| p.nat().map(|n| (n, w.clone())))
        .collect())
}

/// Indices sorted by weight, heaviest first, smaller point on ties.
fn heaviest_first(atoms: &[(u64, Q)]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..atoms.len()).collect();
    idx.sort_by(|&x, &y| {
        atoms[y]
            .1
            .cmp(&atoms[x].1)
            .then(atoms[x].0.cmp(&atoms[y].0))
    });
    idx
}

/// Σ_a max(0, λ(a) − ν(a)), which equals sup_C |λ(C) − ν(C)| when both
/// are probability measures on A.
pub fn discrepancy(lambda: &FinMeasure, nu: &FinMeasure) -> Q {
    lambda
        .atoms()
        .iter()
        .map(|(p, w)| {
            let d = w - nu.weight(*p);
            if d.is_positive() {
                d
            } else {
                Q::zero()
            }
        })
        .sum()
}

/// Greedy quantization f: supp μ → supp λ with |λ(C) − μ(f⁻¹C)| < ε for
/// every C. Targets are served heaviest first; each takes the heaviest
/// remaining source atoms while they fit under λ(a).
pub fn measure_transfer(lambda: &FinMeasure, mu: &FinMeasure, epsilon: &Q) -> Result<TransferMap> {
    if !epsilon.is_positive() {
        return Err(Error::Precondition("epsilon must be positive".into()));
    }
    let targets = nat_atoms(lambda, "λ")?;
    let sources = nat_atoms(mu, "μ")?;
    let slack = epsilon / Q::from_integer((2 * targets.len()).into());
    let atom = mu.atom_max();
    if atom >= slack {
        return Err(Error::AtomTooLarge {
            atom: rational::render(&atom),
            bound: rational::render(&slack),
        });
    }
    let order = heaviest_first(&sources);
    let mut next = 0usize;
    let mut map = BTreeMap::new();
    for ti in heaviest_first(&targets) {
        let (a, ref cap) = targets[ti];
        let mut mass = Q::zero();
        while next < order.len() {
            let (b, ref w) = sources[order[next]];
            if &mass + w > *cap {
                break;
            }
            mass += w;
            map.insert(b, a);
            next += 1;
        }
        if mass <= cap - &slack {
            return Err(Error::PackingFailed(format!(
                "target {a} received only {mass} of {cap}"
            )));
        }
    }
    let overflow_target = targets[heaviest_first(&targets)[0]].0;
    for &i in &order[next..] {
        map.insert(sources[i].0, overflow_target);
    }
    let pushed = push(mu, &map)?;
    let guarantee = discrepancy(lambda, &pushed);
    if guarantee >= *epsilon {
        return Err(Error::PackingFailed(format!(
            "discrepancy {guarantee} is not below {epsilon}"
        )));
    }
    Ok(TransferMap {
        map,
        overflow_target,
        epsilon: epsilon.clone(),
        guarantee,
    })
}

fn push(mu: &FinMeasure, map: &BTreeMap<u64, u64>) -> Result<FinMeasure> {
    let f: BTreeMap<Point, Point> = map
        .iter()
        .map(|(&b, &a)| (Point::Nat(b), Point::Nat(a)))
        .collect();
    mu.pushforward(&f)
}

/// i_n = least i such that at(μ_j) < 1/(2(n+1)|A_n|) for every j ≥ i in
/// the horizon. Sizes are replaced by their running maximum so the schedule
/// never decreases. An index equal to the horizon length means "beyond".
pub fn block_schedule(target_sizes: &[usize], source_atom_max: &[Q]) -> Result<Vec<usize>> {
    let horizon = source_atom_max.len();
    let mut schedule = Vec::with_capacity(target_sizes.len());
    let mut size = 0usize;
    for (n, &s) in target_sizes.iter().enumerate() {
        size = size.max(s);
        let bound = Q::new(1.into(), (2 * (n + 1) * size.max(1)).into());
        let mut i = horizon;
        while i > 0 && source_atom_max[i - 1] < bound {
            i -= 1;
        }
        let prev = schedule.last().copied().unwrap_or(0);
        schedule.push(i.max(prev));
    }
    if schedule.first().is_some_and(|&i0| i0 >= horizon) {
        return Err(Error::HorizonTooShort(format!(
            "no block within {horizon} has atoms below the first threshold"
        )));
    }
    Ok(schedule)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessBlock {
    /// Source blocks [j0, j1) mapped onto the support of one λ_n.
    pub range: [usize; 2],
    /// Position of this λ in the caller's sequence.
    pub lambda: usize,
    #[serde(with = "crate::rational")]
    pub epsilon: Q,
    /// Largest per-block discrepancy in the range.
    #[serde(with = "crate::rational")]
    pub guarantee: Q,
    #[serde(with = "crate::rational::vec")]
    pub block_guarantees: Vec<Q>,
    pub map: BTreeMap<u64, u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KatetovWitness {
    pub schedule: Vec<usize>,
    /// permutation[n] is the caller index of the n-th λ after sorting by
    /// support size.
    pub permutation: Vec<usize>,
    pub horizon_blocks: usize,
    pub lambdas: Vec<FinMeasure>,
    pub blocks: Vec<WitnessBlock>,
}

impl KatetovWitness {
    /// f(l); points outside every scheduled block go to 0.
    pub fn apply(&self, l: u64) -> u64 {
        self.blocks
            .iter()
            .find_map(|b| b.map.get(&l).copied())
            .unwrap_or(0)
    }

    fn block_of(&self, j: usize) -> Option<(usize, &WitnessBlock)> {
        self.blocks
            .iter()
            .enumerate()
            .find(|(_, b)| b.range[0] <= j && j < b.range[1])
    }
}

/// Assembles f from per-block transfers λ_n ← μ_j for j ∈ [i_n, i_{n+1}),
/// with ε_n = 1/(n+1). The last λ takes every block up to the horizon.
pub fn build_katetov_witness(
    lambdas: &[FinMeasure],
    source: &DensitySpec,
    horizon_blocks: usize,
) -> Result<KatetovWitness> {
    let mut seen = std::collections::BTreeSet::new();
    for (i, l) in lambdas.iter().enumerate() {
        nat_atoms(l, "λ").map_err(|_| Error::NotProbability(i))?;
        for x in l.nat_support() {
            if !seen.insert(x) {
                return Err(Error::OverlappingSupports(x.to_string()));
            }
        }
    }
    if lambdas.is_empty() {
        return Ok(KatetovWitness {
            schedule: vec![],
            permutation: vec![],
            horizon_blocks,
            lambdas: vec![],
            blocks: vec![],
        });
    }
    let mut permutation: Vec<usize> = (0..lambdas.len()).collect();
    permutation.sort_by_key(|&i| (lambdas[i].atoms().len(), i));
    let sorted: Vec<FinMeasure> = permutation.iter().map(|&i| lambdas[i].clone()).collect();
    let sizes: Vec<usize> = sorted.iter().map(|l| l.atoms().len()).collect();
    let atom_max: Vec<Q> = (0..horizon_blocks)
        .map(|j| source.block_atom_max(j).unwrap_or_else(Q::one))
        .collect();
    let schedule = block_schedule(&sizes, &atom_max)?;

    let mut blocks = Vec::new();
    for (n, lambda) in sorted.iter().enumerate() {
        let j0 = schedule[n];
        let j1 = schedule
            .get(n + 1)
            .copied()
            .unwrap_or(horizon_blocks)
            .min(horizon_blocks);
        if j0 >= j1 {
            continue;
        }
        let epsilon = q(1, n as i64 + 1);
        let mut map = BTreeMap::new();
        let mut block_guarantees = Vec::with_capacity(j1 - j0);
        for j in j0..j1 {
            let mu = source.block(j).ok_or(Error::ZeroMassBlock(j))?;
            let mass = mu.total();
            if !mass.is_positive() {
                return Err(Error::ZeroMassBlock(j));
            }
            let mu = if mass.is_one() {
                mu
            } else {
                mu.scale(&mass.recip())
            };
            let t = measure_transfer(lambda, &mu, &epsilon)?;
            map.extend(t.map);
            block_guarantees.push(t.guarantee);
        }
        let guarantee = block_guarantees.iter().max().cloned().unwrap_or_default();
        blocks.push(WitnessBlock {
            range: [j0, j1],
            lambda: permutation[n],
            epsilon,
            guarantee,
            block_guarantees,
            map,
        });
    }
    Ok(KatetovWitness {
        schedule,
        permutation,
        horizon_blocks,
        lambdas: sorted,
        blocks,
    })
}

/// The instantiated bound: with m ≥ p such that λ_n(X) > 1 − 1/(p+1) for
/// all listed n ≥ m, every scheduled block j ≥ i_m has
/// μ_j(f⁻¹X) > 1 − 2/(p+1).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PreimageBound {
    pub p: usize,
    pub m: Option<usize>,
    pub first_block: Option<usize>,
    #[serde(with = "crate::rational")]
    pub bound: Q,
    #[serde(with = "crate::rational::opt")]
    pub least_ratio: Option<Q>,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SetAudit {
    pub test_set: usize,
    /// (block j, μ_j(f⁻¹X)) for every scheduled block.
    pub ratios: Vec<(usize, String)>,
    pub failures: Vec<usize>,
    pub bounds: Vec<PreimageBound>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KatetovReport {
    pub rule: &'static str,
    pub citation: &'static str,
    pub scope: String,
    #[serde(with = "crate::rational")]
    pub tolerance: Q,
    pub tail_start: usize,
    pub sets: Vec<SetAudit>,
    pub pass: bool,
}

/// μ_j(f⁻¹X) for every scheduled block, checked against 1 − tol from
/// block `tail_start` on, together with the instantiated preimage bound for
/// p = 0..=max_p.
pub fn verify_katetov(
    w: &KatetovWitness,
    source: &DensitySpec,
    test_sets: &[OmegaSet],
    tail_start: usize,
    tol: &Q,
    max_p: usize,
) -> Result<KatetovReport> {
    let scheduled: Vec<usize> = w
        .blocks
        .iter()
        .flat_map(|b| b.range[0]..b.range[1])
        .collect();
    let floor = Q::one() - tol;
    let mut sets = Vec::new();
    for (t, x) in test_sets.iter().enumerate() {
        let mut ratios = Vec::with_capacity(scheduled.len());
        let mut values = BTreeMap::new();
        for &j in &scheduled {
            let (_, b) = w.block_of(j).expect("scheduled block");
            let mu = source.block(j).ok_or(Error::ZeroMassBlock(j))?;
            let total = mu.total();
            let hit: Vec<Q> = mu
                .atoms()
                .iter()
                .filter(|(p, _)| {
                    p.nat()
                        .and_then(|l| b.map.get(&l))
                        .is_some_and(|&a| x.contains(a))
                })
                .map(|(_, wt)| wt.clone())
                .collect();
            let r = rational::sum(&hit) / total;
            ratios.push((j, rational::render(&r)));
            values.insert(j, r);
        }
        let failures: Vec<usize> = values
            .iter()
            .filter(|(&j, r)| j >= tail_start && **r < floor)
            .map(|(&j, _)| j)
            .collect();
        let lam: Vec<Q> = w.lambdas.iter().map(|l| l.mass_of(x)).collect();
        let bounds = (0..=max_p)
            .map(|p| {
                let need = Q::one() - q(1, p as i64 + 1);
                let bound = Q::one() - q(2, p as i64 + 1);
                // least m ≥ p with λ_n(X) > need for all listed n ≥ m
                let m = (p..lam.len()).find(|&m| lam[m..].iter().all(|v| *v > need));
                let first_block = m.map(|m| w.schedule[m]);
                let covered: Vec<&Q> = match first_block {
                    Some(i) => values.range(i..).map(|(_, r)| r).collect(),
                    None => vec![],
                };
                let least_ratio = covered.iter().min().map(|r| (*r).clone());
                let holds = least_ratio.as_ref().is_none_or(|r| *r > bound);
                PreimageBound {
                    p,
                    m,
                    first_block,
                    bound,
                    least_ratio,
                    holds,
                }
            })
            .collect::<Vec<_>>();
        let pass = failures.is_empty() && bounds.iter().all(|b| b.holds);
        sets.push(SetAudit {
            test_set: t,
            ratios,
            failures,
            bounds,
            pass,
        });
    }
    Ok(KatetovReport {
        rule: "katetov-maximal",
        citation: citation("katetov-maximal"),
        scope: format!(
            "ratios computed exactly on the {} scheduled blocks below block {}; larger blocks are not examined",
            scheduled.len(),
            w.horizon_blocks
        ),
        tolerance: tol.clone(),
        tail_start,
        pass: sets.iter().all(|s| s.pass),
        sets,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Piece {
    /// Points of the designated ideal set, sent to their rank in it.
    Rank,
    /// Points handled by the reduction witness.
    Witness,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Surjection {
    pub star: &'static str,
    pub horizon: u64,
    /// (point, image, piece) for every point below the horizon.
    pub entries: Vec<(u64, u64, Piece)>,
    /// Least t such that some target below t is missed, i.e. [0, t) is
    /// covered.
    pub covered_prefix: u64,
    pub pass: bool,
}

/// ⋆ ↦ ⋆, X ∋ l ↦ rank of l in X, and the witness map elsewhere.
pub fn universal_surjection(
    filter: &FilterSpec,
    x: &OmegaSet,
    g: &KatetovWitness,
    horizon: u64,
) -> Result<Surjection> {
    if filter.dual().member(x, 64).decision != Decision::In {
        return Err(Error::XNotInIdeal);
    }
    let mut entries = Vec::with_capacity(horizon as usize);
    let mut rank = 0u64;
    let mut hit = std::collections::BTreeSet::new();
    for l in 0..horizon {
        let (image, piece) = if x.contains(l) {
            rank += 1;
            (rank - 1, Piece::Rank)
        } else {
            (g.apply(l), Piece::Witness)
        };
        hit.insert(image);
        entries.push((l, image, piece));
    }
    let covered_prefix = (0..).find(|t| !hit.contains(t)).unwrap_or(0);
    Ok(Surjection {
        star: "star",
        horizon,
        entries,
        pass: covered_prefix >= rank,
        covered_prefix,
    })
}
