//! The domination optimum against vertex enumeration on tiny ground sets.

use ideallab::rational::{q, qi};
use ideallab::submeasure::{Covering, FiniteTable, SubmeasureSpec};
use ideallab::Q;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Solves the square system rows · x = rhs exactly; `None` when singular.
fn solve(mut rows: Vec<Vec<Q>>, mut rhs: Vec<Q>) -> Option<Vec<Q>> {
    let n = rows.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !rows[r][col].is_zero())?;
        rows.swap(col, piv);
        rhs.swap(col, piv);
        for r in 0..n {
            if r != col && !rows[r][col].is_zero() {
                let f = &rows[r][col] / &rows[col][col];
                for c in 0..n {
                    let sub = &f * &rows[col][c];
                    rows[r][c] -= sub;
                }
                let sub = &f * &rhs[col];
                rhs[r] -= sub;
            }
        }
    }
    Some((0..n).map(|i| &rhs[i] / &rows[i][i]).collect())
}

/// max Σ x over x ≥ 0 with x(C) ≤ v(C), by trying every choice of n tight
/// constraints among the 2^n − 1 subset rows and the n sign rows.
fn vertex_max(n: usize, v: &[Q]) -> Q {
    let mut all: Vec<(Vec<Q>, Q)> = Vec::new();
    for m in 1..1usize << n {
        all.push((
            (0..n)
                .map(|i| if m >> i & 1 == 1 { Q::one() } else { Q::zero() })
                .collect(),
            v[m].clone(),
        ));
    }
    for i in 0..n {
        all.push((
            (0..n)
                .map(|j| if i == j { Q::one() } else { Q::zero() })
                .collect(),
            Q::zero(),
        ));
    }
    let mut best: Option<Q> = None;
    let total = all.len();
    let mut pick: Vec<usize> = (0..n).collect();
    loop {
        let rows = pick.iter().map(|&i| all[i].0.clone()).collect();
        let rhs = pick.iter().map(|&i| all[i].1.clone()).collect();
        if let Some(x) = solve(rows, rhs) {
            let feasible = x.iter().all(|xi| !xi.is_negative())
                && (1..1usize << n).all(|m| {
                    (0..n)
                        .filter(|i| m >> i & 1 == 1)
                        .map(|i| x[i].clone())
                        .sum::<Q>()
                        <= v[m]
                });
            if feasible {
                let s: Q = x.iter().cloned().sum();
                if best.as_ref().is_none_or(|b| s > *b) {
                    best = Some(s);
                }
            }
        }
        // next combination
        let mut i = n;
        loop {
            if i == 0 {
                return best.unwrap();
            }
            i -= 1;
            if pick[i] < total - n + i {
                pick[i] += 1;
                for j in i + 1..n {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

#[test]
fn matches_vertex_enumeration_on_random_coverings() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..40 {
        let n = rng.gen_range(1..5usize);
        let mut cover: Vec<Vec<u64>> = (0..rng.gen_range(1..5))
            .map(|_| {
                (0..n as u64)
                    .filter(|_| rng.gen_bool(0.5))
                    .collect::<Vec<_>>()
            })
            .filter(|s: &Vec<u64>| !s.is_empty())
            .collect();
        for i in 0..n as u64 {
            if !cover.iter().any(|s| s.contains(&i)) {
                cover.push(vec![i]);
            }
        }
        let scale = q(rng.gen_range(1..5), rng.gen_range(1..5));
        let c = Covering::new((0..n as u64).collect(), cover, scale).unwrap();
        let table = c.to_table().unwrap();
        let x: Vec<u64> = (0..n as u64).collect();
        let phi = SubmeasureSpec::Covering(c);
        let got = phi.dominated_measure_max(&x, &x, 12).unwrap();
        assert_eq!(got.value, vertex_max(n, table.values()));
    }
}

#[test]
fn matches_vertex_enumeration_on_random_tables() {
    // max of two random measures is a submeasure
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..40 {
        let n = rng.gen_range(1..5usize);
        let w1: Vec<Q> = (0..n).map(|_| q(rng.gen_range(0..6), 4)).collect();
        let w2: Vec<Q> = (0..n).map(|_| q(rng.gen_range(0..6), 3)).collect();
        let mass = |w: &[Q], m: usize| {
            (0..n)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| w[i].clone())
                .sum::<Q>()
        };
        let t = FiniteTable::from_fn((10..10 + n as u64).collect(), |m| {
            mass(&w1, m).max(mass(&w2, m))
        })
        .unwrap();
        let expect = vertex_max(n, t.values());
        let phi = SubmeasureSpec::Table(t.clone());
        let got = phi
            .dominated_measure_max(t.domain(), t.domain(), 12)
            .unwrap();
        assert_eq!(got.value, expect);
        assert!(got.value <= *t.full_value());
        assert!(got.value >= qi(0));
    }
}
