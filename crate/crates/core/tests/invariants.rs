//! Global invariants of the degree computation: divisibility constraints
//! that every output must satisfy, the order trichotomy for -ell versus
//! ell, independence of the answer from root labeling and from the chosen
//! model of the curve, and a clean bill from the consistency auditor on
//! every engine output.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use ptord::arith::{is_prime, powmod};
use ptord::curve::CurveModel;
use ptord::engine::{compute_degree, ComputeOptions};
use ptord::error::Error;
use ptord::fields::Fp2;
use ptord::modular::{
    cyclotomic_orders, has_order, pair_is_all_primitive_roots, primitive_root_of_unity,
};
use ptord::oracle::check_consistency;

fn model(a: [i64; 5]) -> CurveModel {
    CurveModel::new(
        BigInt::from(a[0]),
        BigInt::from(a[1]),
        BigInt::from(a[2]),
        BigInt::from(a[3]),
        BigInt::from(a[4]),
    )
    .unwrap()
}

fn random_model(rng: &mut ChaCha20Rng) -> Option<CurveModel> {
    let m = match rng.gen_range(0..4u8) {
        0 => CurveModel::new(
            BigInt::from(rng.gen_range(0..2)),
            BigInt::from(rng.gen_range(-1..2)),
            BigInt::from(rng.gen_range(0..2)),
            BigInt::from(rng.gen_range(-60..61)),
            BigInt::from(rng.gen_range(-60..61)),
        ),
        1 => CurveModel::new(
            BigInt::from(0),
            BigInt::from(0),
            BigInt::from(0),
            BigInt::from(rng.gen_range(-40..41)),
            BigInt::from(rng.gen_range(-40..41)),
        ),
        2 => {
            // additive-leaning family: coefficients carry prime powers
            let q: i64 = [5, 7, 11, 13][rng.gen_range(0..4usize)];
            let i = rng.gen_range(1..3u32);
            let j = rng.gen_range(1..3u32);
            CurveModel::new(
                BigInt::from(0),
                BigInt::from(0),
                BigInt::from(0),
                BigInt::from(rng.gen_range(-9..10) * q.pow(i)),
                BigInt::from(rng.gen_range(-9..10) * q.pow(j)),
            )
        }
        _ => {
            let base = CurveModel::new(
                BigInt::from(0),
                BigInt::from(0),
                BigInt::from(0),
                BigInt::from(rng.gen_range(-20..21)),
                BigInt::from(rng.gen_range(-20..21)),
            );
            let u: i64 = [-1, 2, -2, 3, 5, 6][rng.gen_range(0..6usize)];
            base.and_then(|b| b.quadratic_twist(u))
        }
    };
    m.ok()
}

/// At least a thousand randomized valid queries must satisfy every global
/// divisibility constraint and pass the consistency auditor.
#[test]
fn randomized_queries_satisfy_global_invariants() {
    let ells = [2u64, 3, 5, 7, 11, 13, 17, 19];
    let ps = [3u64, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47];
    let mut rng = ChaCha20Rng::seed_from_u64(20_260_823);
    let mut successes = 0u64;
    let mut table_misses = 0u64;
    for _ in 0..1600 {
        let Some(m) = random_model(&mut rng) else { continue };
        let ell = ells[rng.gen_range(0..ells.len())];
        let p = loop {
            let p = ps[rng.gen_range(0..ps.len())];
            if p != ell {
                break p;
            }
        };
        let opts = ComputeOptions { seed: rng.gen(), ..ComputeOptions::default() };
        let res = match compute_degree(&m, ell, p, opts) {
            Ok(res) => res,
            Err(Error::DefectTableMiss { .. }) => {
                table_misses += 1;
                continue;
            }
            Err(other) => panic!("unexpected failure at ell={ell}, p={p}: {other}"),
        };
        let d = res.d;
        assert!(d > 0);
        assert_eq!(d % res.intermediates.r, 0, "r | d at ell={ell}, p={p}");
        if let Some(e) = res.reduction.e {
            assert_eq!(d % e, 0, "e | d at ell={ell}, p={p}");
        }
        let p128 = p as u128;
        let group = p128 * (p128 - 1) * (p128 - 1) * (p128 + 1);
        assert_eq!(group % d as u128, 0, "d | p(p-1)^2(p+1) at ell={ell}, p={p}");
        if res.intermediates.a == Some(0) {
            assert_eq!(
                res.intermediates.n,
                Some(2 * res.intermediates.delta),
                "zero trace forces n = 2*delta at ell={ell}, p={p}"
            );
        }
        assert!(
            check_consistency(&res).is_empty(),
            "auditor flagged a valid output at ell={ell}, p={p}"
        );
        successes += 1;
    }
    assert!(
        successes >= 1000,
        "only {successes} successful queries ({table_misses} table misses)"
    );
}

/// For every pair of distinct primes ell, p < 200 the orders r of ell and
/// delta of -ell mod p satisfy the trichotomy: delta = 2r when r is odd,
/// delta = r/2 when r = 2 mod 4, delta = r when 4 | r. The delta reported
/// by the library is cross-checked against a literal order search.
#[test]
fn order_trichotomy_for_all_small_prime_pairs() {
    let primes: Vec<u64> = (2..200).filter(|&q| is_prime(q)).collect();
    for &ell in &primes {
        for &p in &primes {
            if p < 3 || p == ell {
                continue;
            }
            let cyc = cyclotomic_orders(ell, p).unwrap();
            let brute = (1..p)
                .find(|&k| powmod((p - ell % p) % p, k, p) == 1)
                .unwrap();
            assert_eq!(cyc.delta, brute, "delta at ell={ell}, p={p}");
            if cyc.r % 2 == 1 {
                assert_eq!(cyc.delta, 2 * cyc.r, "odd r at ell={ell}, p={p}");
            } else if cyc.r % 4 == 2 {
                assert_eq!(cyc.delta, cyc.r / 2, "r = 2 mod 4 at ell={ell}, p={p}");
            } else {
                assert_eq!(cyc.delta, cyc.r, "4 | r at ell={ell}, p={p}");
            }
        }
    }
}

/// The root-of-unity pair conditions consulted by the branch logic are
/// statements about the *set* of primitive e-th roots: they must not
/// depend on which root is called zeta or on the order of the pair.
#[test]
fn root_pair_conditions_independent_of_labeling() {
    for p in [5u64, 7, 11, 13, 17, 19, 23] {
        let f = Fp2::new(p).unwrap();
        for e in [3u64, 4, 6] {
            // enumerate all elements of exact order e in F_{p^2}
            let mut order_e = Vec::new();
            for c0 in 0..p {
                for c1 in 0..p {
                    let x = f.elt(c0, c1);
                    if has_order(&f, x, e) {
                        order_e.push(x);
                    }
                }
            }
            // phi(e) = 2 for e in {3, 4, 6}
            assert_eq!(order_e.len(), 2, "p = {p}, e = {e}");
            let zeta = primitive_root_of_unity(&f, e).unwrap();
            assert!(order_e.contains(&zeta));

            // the pair predicate is exactly "equals that two-element set",
            // which no choice of generator can affect
            let mut candidates = order_e.clone();
            candidates.push(f.one());
            candidates.push(f.minus_one());
            candidates.push(f.elt(2 % p, 1));
            candidates.push(f.elt(p - 1, 2 % p));
            for &x in &candidates {
                for &y in &candidates {
                    let got = pair_is_all_primitive_roots(&f, x, y, e);
                    let expected = x != y
                        && order_e.contains(&x)
                        && order_e.contains(&y);
                    assert_eq!(got, expected, "p={p}, e={e}");
                    // swapping the pair can never change the answer
                    assert_eq!(got, pair_is_all_primitive_roots(&f, y, x, e));
                }
            }
        }
    }
}

/// Replacing the input by a rescaled model (u^2, u^3 coordinate change) or
/// feeding a non-minimal model must leave both the degree and the branch
/// unchanged: the computation depends only on the ell-isomorphism class.
#[test]
fn degree_invariant_under_model_rescaling() {
    let cases: [([i64; 5], u64, u64); 10] = [
        ([0, 0, 0, -432, -864], 2, 3),
        ([0, 0, 0, -432, -864], 3, 5),
        ([0, 0, 0, -432, -864], 5, 3),
        ([0, 0, 0, -432, -864], 7, 5),
        ([0, -1, 1, -10, -20], 11, 5),
        ([0, 0, 0, 0, 25], 5, 7),
        ([0, 0, 0, -25, 0], 5, 3),
        ([0, 3, 0, 0, 54], 3, 11),
        ([0, -5, 0, 0, -64], 2, 7),
        ([0, 0, 0, -27 * 169, -54 * 169], 13, 5),
    ];
    let opts = ComputeOptions::default();
    for (coeffs, ell, p) in cases {
        let base = model(coeffs);
        let reference = compute_degree(&base, ell, p, opts).unwrap();
        assert!(check_consistency(&reference).is_empty());
        for u in [2i64, 3, 10, ell as i64] {
            let ub = BigInt::from(u);
            let scaled = CurveModel::new(
                &base.a1 * &ub,
                &base.a2 * ub.pow(2),
                &base.a3 * ub.pow(3),
                &base.a4 * ub.pow(4),
                &base.a6 * ub.pow(6),
            )
            .unwrap();
            let res = compute_degree(&scaled, ell, p, opts).unwrap();
            assert_eq!(
                (res.d, res.branch),
                (reference.d, reference.branch),
                "rescaling by {u} changed the answer at ell={ell}, p={p}"
            );
            assert!(check_consistency(&res).is_empty());
        }
    }
}
