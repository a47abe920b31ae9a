use std::collections::BTreeSet;

use gpfp_core::nc_lattice::{
    cumulants_to_moments, enumerate_nc, has_crossing, mobius_to_top, moments_to_cumulants, NCPartition,
};
use gpfp_core::scalar::ratio;
use gpfp_core::ExactScalar;
use num_traits::{One, Zero};
use proptest::prelude::*;

/// Every set partition of {1..n}, by restricted growth strings.
fn all_set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(i: usize, n: usize, labels: &mut Vec<usize>, max: usize, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            let mut blocks = vec![Vec::new(); max];
            for (pos, &l) in labels.iter().enumerate() {
                blocks[l].push(pos + 1);
            }
            out.push(blocks);
            return;
        }
        for l in 0..=max {
            labels.push(l);
            rec(i + 1, n, labels, max.max(l + 1), out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, &mut Vec::new(), 0, &mut out);
    out
}

fn brute_nc(n: usize) -> BTreeSet<Vec<Vec<usize>>> {
    all_set_partitions(n)
        .into_iter()
        .filter(|b| !has_crossing(b))
        .collect()
}

/// Interval recursion for mu(pi, top) over an explicit element list, using
/// plain block containment for the order.
fn brute_mobius(n: usize) -> Vec<(Vec<Vec<usize>>, i64)> {
    let elems: Vec<Vec<Vec<usize>>> = brute_nc(n).into_iter().collect();
    let leq = |p: &Vec<Vec<usize>>, q: &Vec<Vec<usize>>| {
        p.iter()
            .all(|b| q.iter().any(|c| b.iter().all(|x| c.contains(x))))
    };
    let top = elems.iter().find(|e| e.len() == 1).unwrap().clone();
    elems
        .iter()
        .map(|x| {
            // mu(x, y) for all y >= x, in order of increasing block count
            // reversed (coarser last).
            let mut above: Vec<&Vec<Vec<usize>>> = elems.iter().filter(|y| leq(x, y)).collect();
            above.sort_by_key(|y| std::cmp::Reverse(y.len()));
            let mut mu: Vec<(Vec<Vec<usize>>, i64)> = Vec::new();
            for y in above {
                let v = if y == x {
                    1
                } else {
                    -mu.iter()
                        .filter(|(z, _)| leq(z, y) && z != y)
                        .map(|(_, m)| m)
                        .sum::<i64>()
                };
                mu.push((y.clone(), v));
            }
            let at_top = mu.iter().find(|(y, _)| *y == top).unwrap().1;
            (x.clone(), at_top)
        })
        .collect()
}

#[test]
fn enumeration_matches_filtered_set_partitions() {
    for n in 1..=8 {
        let ours: BTreeSet<Vec<Vec<usize>>> = enumerate_nc(n)
            .unwrap()
            .into_iter()
            .map(|p| p.blocks().to_vec())
            .collect();
        assert_eq!(ours, brute_nc(n), "n = {n}");
        assert_eq!(enumerate_nc(n).unwrap().len(), ours.len());
    }
    assert_eq!(enumerate_nc(4).unwrap().len(), 14);
    assert_eq!(enumerate_nc(5).unwrap().len(), 42);
}

#[test]
fn mobius_matches_brute_recursion() {
    for n in 1..=6 {
        for (blocks, mu) in brute_mobius(n) {
            let p = NCPartition::new(n, blocks).unwrap();
            assert_eq!(mobius_to_top(&p).unwrap(), ratio(mu, 1), "{p}");
        }
    }
    let bottom4 = NCPartition::bottom(4);
    assert_eq!(mobius_to_top(&bottom4).unwrap(), ratio(-5, 1));
    assert_eq!(mobius_to_top(&NCPartition::bottom(2)).unwrap(), ratio(-1, 1));
    assert_eq!(mobius_to_top(&NCPartition::top(7)).unwrap(), ratio(1, 1));
}

#[test]
fn mobius_column_sums_vanish() {
    for n in 2..=10 {
        let sum = enumerate_nc(n)
            .unwrap()
            .iter()
            .map(|p| mobius_to_top(p).unwrap())
            .fold(ExactScalar::zero(), |a, b| a + b);
        assert!(sum.is_zero(), "n = {n}");
    }
}

#[test]
fn refinement_order_examples() {
    let p = NCPartition::new(4, vec![vec![1, 3], vec![2], vec![4]]).unwrap();
    let s = NCPartition::new(4, vec![vec![1, 2], vec![3, 4]]).unwrap();
    assert!(!p.refines(&s).unwrap());
    assert!(p.refines(&p).unwrap());
    assert!(NCPartition::bottom(4).refines(&s).unwrap());
    assert!(p.refines(&NCPartition::bottom(5)).is_err());
}

#[test]
fn crossing_partition_is_rejected() {
    assert!(NCPartition::new(4, vec![vec![1, 3], vec![2, 4]]).is_err());
    assert!(NCPartition::new(3, vec![vec![1, 2]]).is_err());
    assert!(enumerate_nc(0).is_err());
}

#[test]
fn free_poisson_and_semicircle() {
    let fp2: Vec<ExactScalar> = [2, 6, 22, 90, 394].iter().map(|&m| ratio(m, 1)).collect();
    let k = moments_to_cumulants(&fp2).unwrap();
    assert!(k.values().iter().all(|v| *v == ratio(2, 1)));
    assert_eq!(cumulants_to_moments(&vec![ratio(2, 1); 5]).unwrap(), fp2);

    let semi: Vec<ExactScalar> = [0, 1, 0, 2, 0].iter().map(|&m| ratio(m, 1)).collect();
    let k = moments_to_cumulants(&semi).unwrap();
    let expect: Vec<ExactScalar> = [0, 1, 0, 0, 0].iter().map(|&m| ratio(m, 1)).collect();
    assert_eq!(k.values(), &expect[..]);
    assert_eq!(cumulants_to_moments(&expect).unwrap()[3], ratio(2, 1));

    assert_eq!(
        moments_to_cumulants(&[ratio(3, 7)]).unwrap().values(),
        &[ratio(3, 7)]
    );
    assert!(moments_to_cumulants::<f64>(&[]).is_err());
    assert!(cumulants_to_moments::<f64>(&[]).is_err());
}

/// The five explicit low-order moment-cumulant polynomials.
fn explicit_cumulants(m: &[ExactScalar]) -> Vec<ExactScalar> {
    let c = |k: i64| ratio(k, 1);
    let (m1, m2, m3, m4, m5) = (&m[0], &m[1], &m[2], &m[3], &m[4]);
    let p = |a: &ExactScalar, e: i32| num_traits::pow(a.clone(), e as usize);
    vec![
        m1.clone(),
        m2 - p(m1, 2),
        m3 - c(3) * m1 * m2 + c(2) * p(m1, 3),
        m4 - c(4) * m1 * m3 - c(2) * p(m2, 2) + c(10) * p(m1, 2) * m2 - c(5) * p(m1, 4),
        m5 - c(5) * m1 * m4 - c(5) * m2 * m3 + c(15) * p(m1, 2) * m3 + c(15) * m1 * p(m2, 2)
            - c(35) * p(m1, 3) * m2
            + c(14) * p(m1, 5),
    ]
}

fn rational() -> impl Strategy<Value = ExactScalar> {
    (-50i64..=50, 1i64..=12).prop_map(|(n, d)| ratio(n, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn round_trip_is_exact(m in prop::collection::vec(rational(), 1..=6)) {
        let k = moments_to_cumulants(&m).unwrap();
        prop_assert_eq!(cumulants_to_moments(k.values()).unwrap(), m);
    }

    #[test]
    fn matches_explicit_polynomials(m in prop::collection::vec(rational(), 5)) {
        let k = moments_to_cumulants(&m).unwrap();
        prop_assert_eq!(k.values().to_vec(), explicit_cumulants(&m));
    }

    #[test]
    fn constant_cumulants_give_free_poisson_moments(p in 2i64..6) {
        let m = cumulants_to_moments(&vec![ratio(p, 1); 5]).unwrap();
        let pp = ratio(p, 1);
        let one = ExactScalar::one();
        // m_3 = p (p^2 + 3 p + 1)
        prop_assert_eq!(m[2].clone(), &pp * (&pp * &pp + ratio(3, 1) * &pp + one));
    }
}
