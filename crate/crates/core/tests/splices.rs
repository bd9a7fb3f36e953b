use halving_lab::constructions::{union_splice_conclusion, union_splice_instance, prefix_splice_conclusion, prefix_splice_instance};
use halving_lab::sets::seeded::derive_seed;
use num_traits::ToPrimitive;

const SUITE: u64 = 10_000;

/// `|u/t - 1/2| < eps + 1/c` with `eps = en/ed`, `c = cn/cd`, in integers.
fn union_oracle(u: u64, t: u64, en: u64, ed: u64, cn: u64, cd: u64) -> bool {
    // |2u - t| / 2t < (en cn + ed cd) / (ed cn)
    let lhs = (2 * u as i128 - t as i128).unsigned_abs() * (ed * cn) as u128;
    let rhs = 2 * t as u128 * (en * cn + ed * cd) as u128;
    lhs < rhs
}

#[test]
fn union_splice_suite() {
    for i in 0..SUITE {
        let seed = derive_seed(1, i);
        let inst = union_splice_instance(seed);
        assert!((1..=50).contains(&inst.r.len()));
        let c = inst.c.to_integer().to_u64().unwrap();
        assert!((2..=10).contains(&c));
        assert!(union_splice_conclusion(&inst.r, &inst.s, &inst.a, &inst.b, &inst.eps, &inst.c).unwrap(), "seed {seed}");
        let en = inst.eps.numer().to_u64().unwrap();
        let ed = inst.eps.denom().to_u64().unwrap();
        let union = (inst.a.len() + inst.b.len()) as u64;
        let total = (inst.r.len() + inst.s.len()) as u64;
        assert!(union_oracle(union, total, en, ed, c, 1));
    }
}

#[test]
fn prefix_splice_suite() {
    for i in 0..SUITE {
        let seed = derive_seed(2, i);
        let inst = prefix_splice_instance(seed);
        let ok = prefix_splice_conclusion(&inst.big_r, &inst.big_s, &inst.r, &inst.eps, inst.m, inst.n);
        assert!(ok.unwrap(), "seed {seed}");
        let (a, b) = (inst.r.numer().to_i128().unwrap(), inst.r.denom().to_i128().unwrap());
        let (en, ed) = (inst.eps.numer().to_i128().unwrap(), inst.eps.denom().to_i128().unwrap());
        let rb = inst.big_r.indicator(inst.m).unwrap();
        let sb = inst.big_s.indicator(inst.n).unwrap();
        let mut count = rb.iter().filter(|&&x| x).count() as i128;
        for l in inst.m..=inst.n {
            if l > inst.m {
                count += sb[l as usize - 1] as i128;
            }
            // |count/l - a/b| < 3 en/ed
            let l = l as i128;
            assert!((count * b - a * l).abs() * ed < 3 * en * b * l, "seed {seed} l {l}");
        }
    }
}
