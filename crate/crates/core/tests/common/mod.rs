//! Random valid inputs for `extend`, shared by the fuzz tests and the
//! acceptance run.
#![allow(dead_code)]

use std::collections::BTreeMap;

use halving_lab::forcing::{extend, replay, restrict, Condition, PartialFn, Step, FRESH_EPS};
use halving_lab::rational::{int, ratio, Rational};
use halving_lab::sets::seeded::SplitMix;

pub struct ExtendCase {
    pub p: Condition,
    pub e: Vec<u64>,
    pub qprime: Condition,
    pub m: u64,
    pub target: BTreeMap<PartialFn, Rational>,
}

const LEVELS: [(u64, u64); 6] = [(12, 1), (8, 1), (6, 1), (4, 1), (3, 1), (2, 1)];

fn level(rng: &mut SplitMix) -> Rational {
    let (a, b) = LEVELS[rng.below(LEVELS.len() as u64) as usize];
    ratio(a, b)
}

fn capped(map: &BTreeMap<PartialFn, Rational>, cap: &Rational) -> BTreeMap<PartialFn, Rational> {
    map.iter().map(|(f, v)| (f.clone(), v.clone().min(cap.clone()))).collect()
}

/// A condition from a random schedule over ids `0..6`.
pub fn random_condition(rng: &mut SplitMix, max_ids: u64) -> Condition {
    let count = 1 + rng.below(max_ids);
    let mut steps = Vec::new();
    for _ in 0..count {
        steps.push(Step::Add { id: rng.below(6) });
        match rng.below(3) {
            0 => steps.push(Step::Shrink { level: level(rng) }),
            1 => steps.push(Step::Horizon { m: rng.below(300) }),
            _ => {}
        }
    }
    replay(&steps, steps.len(), rng.next_u64(), 0).expect("schedule replays").condition
}

/// One seeded single-id condition below `cur↾{id}`.
fn single(rng: &mut SplitMix, cur: &Condition, id: u64) -> Condition {
    let eps0 = cur.eps0().unwrap().clone();
    let floor: u64 = (int(32) / &eps0).floor().to_integer().try_into().unwrap();
    let n = cur.n().max(floor + 1) + rng.below(40);
    let members: Vec<u64> = (0..n).filter(|_| rng.below(2) == 1).collect();
    let mut eps = Condition::uniform_eps(&[id], &int(FRESH_EPS));
    eps.insert(PartialFn::empty(), eps0);
    Condition::from_members(n, [(id, members)], eps).unwrap()
}

pub fn random_case(seed: u64, max_ids: usize) -> ExtendCase {
    let mut rng = SplitMix::new(seed);
    let p = random_condition(&mut rng, (max_ids as u64).min(4));
    let kept: Vec<u64> = p.ids().iter().copied().filter(|_| rng.below(2) == 1).collect();
    let room = max_ids - p.ids().len();
    let fresh_count = rng.below(room.min(2) as u64 + 1);
    let fresh: Vec<u64> = (0..fresh_count).map(|i| 20 + i).collect();

    let mut cur = restrict(&p, &kept);
    for &id in &fresh {
        let s = single(&mut rng, &cur, id);
        cur = extend(&cur, &[id], &s, 0, cur.eps_map()).expect("fresh id");
    }
    if rng.below(2) == 1 {
        let lvl = level(&mut rng);
        let target = capped(cur.eps_map(), &lvl);
        cur = extend(&cur, &[], &restrict(&cur, &[]), cur.n() + rng.below(500), &target).expect("lengthen");
    }
    let mut e = kept.clone();
    e.extend(&fresh);
    e.sort_unstable();
    let target = if rng.below(2) == 1 { capped(p.eps_map(), &level(&mut rng)) } else { p.eps_map().clone() };
    let m = if rng.below(2) == 1 { cur.n() + rng.below(1000) } else { 0 };
    ExtendCase { p, e, qprime: cur, m, target }
}

/// `|b_f ∩ [lo, hi)|` computed member by member.
pub fn trace_count(q: &Condition, f: &PartialFn, lo: u64, hi: u64) -> u64 {
    (lo..hi)
        .filter(|&j| f.pairs().iter().all(|&(id, v)| q.a(id).unwrap().get(j) == v))
        .count() as u64
}
