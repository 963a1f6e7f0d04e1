//! Exact maximization of μ(A) over nonnegative measures dominated by a
//! set function given on all subsets of a small ground set.
//!
//! The program is solved on an integer condensed tableau with fraction-free
//! (Bareiss) pivots. Subset constraints are generated lazily: start from the
//! singletons and add the most violated ones until the point is feasible for
//! every subset. All choices are deterministic.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::rational::{common_denominator, Q};

#[derive(Clone, Debug, PartialEq)]
pub struct Optimum {
    pub value: Q,
    /// Weight per ground point; zero outside the target set.
    pub weights: Vec<Q>,
    /// Optimal dual multipliers as (global subset mask, multiplier).
    pub dual: Vec<(usize, Q)>,
    pub pivots: usize,
}

/// Maximizes Σ_{i∈target} w_i subject to w ≥ 0 and w(C) ≤ values[C] for
/// every mask C. `values` must be monotone with `values[0] = 0`.
pub fn max_dominated(n: usize, values: &[Q], target: usize) -> Result<Optimum> {
    if values.len() != 1 << n {
        return Err(Error::Defect("value table has the wrong length".into()));
    }
    let vars: Vec<usize> = (0..n).filter(|i| target >> i & 1 == 1).collect();
    let k = vars.len();
    if k == 0 {
        return Ok(Optimum {
            value: Q::zero(),
            weights: vec![Q::zero(); n],
            dual: Vec::new(),
            pivots: 0,
        });
    }
    let global = |local: usize| -> usize {
        vars.iter()
            .enumerate()
            .filter(|(j, _)| local >> j & 1 == 1)
            .fold(0, |acc, (_, &i)| acc | 1 << i)
    };
    let local_vals: Vec<&Q> = (0..1usize << k).map(|m| &values[global(m)]).collect();
    let scale = common_denominator(local_vals.iter().copied());
    let ints: Vec<BigInt> = local_vals
        .iter()
        .map(|v| (*v * Q::from_integer(scale.clone())).to_integer())
        .collect();
    let candidates = essential_masks(k, &ints);
    let mut rows: Vec<usize> = (0..k).map(|j| 1 << j).collect();
    let mut pivots = 0;
    let t = loop {
        let mut t = Tableau::new(k, &rows, &ints);
        t.solve()?;
        pivots += t.pivots;
        let violated = most_violated(k, &t, &candidates, &ints);
        if violated.is_empty() {
            break t;
        }
        rows.extend(violated.into_iter().take(2 * k));
        rows.sort_unstable();
    };

    let denom = Q::from_integer(&t.d * &scale);
    let mut weights = vec![Q::zero(); n];
    for (i, &label) in t.basic.iter().enumerate() {
        if label < k {
            weights[vars[label]] = Q::from_integer(t.rhs[i].clone()) / &denom;
        }
    }
    let mut dual = Vec::new();
    for (j, &label) in t.nonbasic.iter().enumerate() {
        if label >= k && !t.obj[j].is_zero() {
            let mask = global(rows[label - k]);
            dual.push((mask, Q::new(t.obj[j].clone(), t.d.clone())));
        }
    }
    dual.sort_by_key(|(m, _)| *m);
    Ok(Optimum {
        value: Q::from_integer(t.value.clone()) / denom,
        weights,
        dual,
        pivots,
    })
}

/// Candidate masks whose constraint the current primal point violates,
/// most violated first (smallest mask on ties).
fn most_violated(k: usize, t: &Tableau, candidates: &[usize], ints: &[BigInt]) -> Vec<usize> {
    let mut y = vec![BigInt::zero(); k];
    for (i, &label) in t.basic.iter().enumerate() {
        if label < k {
            y[label] = t.rhs[i].clone();
        }
    }
    let mut sums = vec![BigInt::zero(); 1 << k];
    for m in 1..1usize << k {
        let low = m.trailing_zeros() as usize;
        sums[m] = &sums[m & (m - 1)] + &y[low];
    }
    let mut out: Vec<(BigInt, usize)> = candidates
        .iter()
        .filter_map(|&c| {
            let excess = &sums[c] - &t.d * &ints[c];
            excess.is_positive().then_some((excess, c))
        })
        .collect();
    out.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    out.into_iter().map(|(_, c)| c).collect()
}

/// Local masks whose constraint is not implied by a split C = C1 ⊔ C2 with
/// v(C) ≥ v(C1) + v(C2).
fn essential_masks(k: usize, v: &[BigInt]) -> Vec<usize> {
    let small: Option<Vec<i128>> = v
        .iter()
        .map(|x| x.to_i128().filter(|y| y.abs() < 1 << 120))
        .collect();
    let mut out = Vec::new();
    for c in 1..1usize << k {
        if c.count_ones() == 1 {
            out.push(c);
            continue;
        }
        let low = c & c.wrapping_neg();
        let rest = c ^ low;
        let implied = match &small {
            Some(s) => submasks(rest).any(|sub| {
                let part = sub | low;
                part != c && s[c] >= s[part] + s[c ^ part]
            }),
            None => submasks(rest).any(|sub| {
                let part = sub | low;
                part != c && v[c] >= &v[part] + &v[c ^ part]
            }),
        };
        if !implied {
            out.push(c);
        }
    }
    out
}

fn submasks(m: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(m);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & m) };
        Some(cur)
    })
}

const DEGENERATE_LIMIT: usize = 64;

/// Condensed tableau: row i reads x_{basic[i]} + Σ_j a_ij x_{nonbasic[j]} = b_i,
/// the objective z + Σ_j d_j x_{nonbasic[j]} = ζ; every stored entry is the
/// numerator over the common denominator `d`.
struct Tableau {
    a: Vec<Vec<BigInt>>,
    rhs: Vec<BigInt>,
    obj: Vec<BigInt>,
    value: BigInt,
    d: BigInt,
    basic: Vec<usize>,
    nonbasic: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    fn new(k: usize, rows: &[usize], vals: &[BigInt]) -> Self {
        let a = rows
            .iter()
            .map(|&c| {
                (0..k)
                    .map(|j| {
                        if c >> j & 1 == 1 {
                            BigInt::one()
                        } else {
                            BigInt::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        Tableau {
            a,
            rhs: rows.iter().map(|&c| vals[c].clone()).collect(),
            obj: vec![-BigInt::one(); k],
            value: BigInt::zero(),
            d: BigInt::one(),
            basic: (k..k + rows.len()).collect(),
            nonbasic: (0..k).collect(),
            pivots: 0,
        }
    }

    /// Dantzig's rule (most negative reduced cost, lowest label on ties)
    /// until a long run of degenerate pivots, then Bland's rule for good.
    fn solve(&mut self) -> Result<()> {
        let mut degenerate_run = 0usize;
        let mut bland = false;
        loop {
            let candidates = (0..self.nonbasic.len()).filter(|&j| self.obj[j].is_negative());
            let entering = if bland {
                candidates.min_by_key(|&j| self.nonbasic[j])
            } else {
                candidates.min_by(|&x, &y| {
                    self.obj[x]
                        .cmp(&self.obj[y])
                        .then(self.nonbasic[x].cmp(&self.nonbasic[y]))
                })
            };
            let Some(s) = entering else { return Ok(()) };
            let mut leave: Option<usize> = None;
            for i in 0..self.a.len() {
                if !self.a[i][s].is_positive() {
                    continue;
                }
                leave = Some(match leave {
                    None => i,
                    Some(r) => {
                        let lhs = &self.rhs[i] * &self.a[r][s];
                        let rhs = &self.rhs[r] * &self.a[i][s];
                        if lhs < rhs || (lhs == rhs && self.basic[i] < self.basic[r]) {
                            i
                        } else {
                            r
                        }
                    }
                });
            }
            let r = leave
                .ok_or_else(|| Error::Defect("dominated-measure program is unbounded".into()))?;
            if self.rhs[r].is_zero() {
                degenerate_run += 1;
                if degenerate_run > DEGENERATE_LIMIT {
                    bland = true;
                }
            } else {
                degenerate_run = 0;
            }
            self.pivot(r, s);
        }
    }

    fn pivot(&mut self, r: usize, s: usize) {
        let p = self.a[r][s].clone();
        let d = self.d.clone();
        let row_r = self.a[r].clone();
        let rhs_r = self.rhs[r].clone();
        let update = |x: &BigInt, col_s: &BigInt, row_j: &BigInt| (x * &p - col_s * row_j) / &d;

        for i in 0..self.a.len() {
            if i == r {
                continue;
            }
            let col = self.a[i][s].clone();
            if col.is_zero() {
                for j in 0..row_r.len() {
                    if j != s {
                        self.a[i][j] = &self.a[i][j] * &p / &d;
                    }
                }
                self.rhs[i] = &self.rhs[i] * &p / &d;
            } else {
                for j in 0..row_r.len() {
                    if j != s {
                        self.a[i][j] = update(&self.a[i][j], &col, &row_r[j]);
                    }
                }
                self.rhs[i] = update(&self.rhs[i], &col, &rhs_r);
                self.a[i][s] = -col;
            }
        }
        let col = self.obj[s].clone();
        for j in 0..row_r.len() {
            if j != s {
                self.obj[j] = update(&self.obj[j], &col, &row_r[j]);
            }
        }
        self.value = update(&self.value, &col, &rhs_r);
        self.obj[s] = -col;
        self.a[r][s] = d;
        self.d = p;
        std::mem::swap(&mut self.basic[r], &mut self.nonbasic[s]);
        self.pivots += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, qi};

    fn table(n: usize, f: impl Fn(usize) -> Q) -> Vec<Q> {
        (0..1usize << n).map(f).collect()
    }

    #[test]
    fn triangle_cover() {
        // τ on three points covered by the three pairs
        let v = table(3, |m| match m.count_ones() {
            0 => qi(0),
            1 | 2 => qi(1),
            _ => qi(2),
        });
        let opt = max_dominated(3, &v, 0b111).unwrap();
        assert_eq!(opt.value, q(3, 2));
        assert_eq!(opt.weights, vec![q(1, 2); 3]);
        let dual_total: Q = opt.dual.iter().map(|(m, w)| w * &v[*m]).sum();
        assert_eq!(dual_total, q(3, 2));
    }

    #[test]
    fn additive_values_are_attained() {
        let w = [q(1, 3), q(1, 5), qi(2), q(7, 4)];
        let v = table(4, |m| {
            (0..4)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| w[i].clone())
                .sum()
        });
        let opt = max_dominated(4, &v, 0b1011).unwrap();
        assert_eq!(opt.value, &w[0] + &w[1] + &w[3]);
        assert_eq!(opt.weights[2], qi(0));
    }

    #[test]
    fn empty_target() {
        let v = table(2, |m| qi(m.count_ones().min(1) as i64));
        assert_eq!(max_dominated(2, &v, 0).unwrap().value, qi(0));
    }

    #[test]
    fn capped_cardinality() {
        // v(C) = min(|C|, 1): any dominated measure has total ≤ 1
        let v = table(5, |m| qi(m.count_ones().min(1) as i64));
        let opt = max_dominated(5, &v, 0b11111).unwrap();
        assert_eq!(opt.value, qi(1));
    }

    #[test]
    fn submask_enumeration() {
        let subs: Vec<usize> = submasks(0b101).collect();
        assert_eq!(subs, vec![0b101, 0b100, 0b001, 0]);
    }
}
