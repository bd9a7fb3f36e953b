mod common;

use common::{random_case, trace_count};
use halving_lab::forcing::{extend, leq, phase_two_members, restrict, validate, PartialFn};

const CASES: u64 = 1000;

#[test]
fn extend_fuzz() {
    let (mut grew, mut first_fill, mut widest) = (0, 0, 0);
    for seed in 0..CASES {
        let c = random_case(seed, 6);
        let q = extend(&c.p, &c.e, &c.qprime, c.m, &c.target).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(validate(&q).unwrap().is_empty(), "seed {seed}");
        assert!(leq(&q, &c.p).unwrap().holds, "seed {seed}");
        assert!(leq(&q, &c.qprime).unwrap().holds, "seed {seed}");
        assert!(q.n() >= c.m);
        let step = 1u64 << q.ids().len();
        assert_eq!((q.n() - c.qprime.n()) % step, 0, "seed {seed}");
        // q ≤ q' ≤ p↾E gives q ≤ p↾E
        assert!(leq(&q, &restrict(&c.p, &c.e)).unwrap().holds, "seed {seed}");
        if q.n() > c.qprime.n() {
            grew += 1;
        }
        if c.qprime.n() > c.p.n() && c.p.ids().iter().any(|id| !c.e.contains(id)) {
            first_fill += 1;
        }
        widest = widest.max(q.ids().len());
    }
    assert!(grew > CASES / 2);
    assert!(first_fill > CASES / 10);
    assert_eq!(widest, 6);
}

#[test]
fn second_fill_is_exact_in_results() {
    for seed in 0..60 {
        let c = random_case(seed, 5);
        let q = extend(&c.p, &c.e, &c.qprime, c.m, &c.target).unwrap();
        let (lo, hi) = (c.qprime.n(), q.n());
        for f in PartialFn::all_over(q.ids()) {
            let want = (hi - lo) >> f.dom_len();
            assert_eq!(trace_count(&q, &f, lo, hi), want, "seed {seed} f {f}");
        }
    }
}

#[test]
fn restriction_respects_order() {
    for seed in 0..200 {
        let c = random_case(seed, 5);
        let q = extend(&c.p, &c.e, &c.qprime, c.m, &c.target).unwrap();
        assert!(leq(&q, &q).unwrap().holds);
        let ids = q.ids().to_vec();
        for mask in 0..(1u32 << ids.len()) {
            let e: Vec<u64> = ids.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &id)| id).collect();
            let (qe, pe) = (restrict(&q, &e), restrict(&c.p, &e));
            assert!(validate(&qe).unwrap().is_empty());
            assert!(leq(&qe, &pe).unwrap().holds, "seed {seed} E {e:?}");
        }
    }
}

#[test]
fn phase_two_windows_exhaustive() {
    for width in 0..=5usize {
        let ids: Vec<u64> = (0..width as u64).collect();
        for t in 1..=8u64 {
            for start in [0u64, 3, 64] {
                let end = start + (t << width);
                let members: Vec<Vec<u64>> = (0..width).map(|ell| phase_two_members(start, end, ell)).collect();
                for f in PartialFn::all_over(&ids) {
                    let count = (start..end)
                        .filter(|j| f.pairs().iter().all(|&(id, v)| members[id as usize].binary_search(j).is_ok() == v))
                        .count() as u64;
                    assert_eq!(count, (end - start) >> f.dom_len());
                }
            }
        }
    }
}
