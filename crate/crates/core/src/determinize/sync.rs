//! Deciding whether resets are a function of the label sequence.
//!
//! Two runs over the same events that produce the same labels must reset
//! the same clocks. The check explores pairs of runs in lockstep; since the
//! two runs may reset at different moments, their clocks are tracked as two
//! copies in one joint region.

use std::collections::{HashMap, VecDeque};

use serde::Serialize;

use super::region::{Region, RegionSpace};
use crate::cea::{ClockValuation, State, TimedCea};
use crate::predicate::satisfiable_literals;
use crate::rational::Rational;

/// Two runs with equal labels on the same events whose last transitions
/// reset different clocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyncWitness {
    /// Transition indices of the first run.
    pub first: Vec<usize>,
    /// Transition indices of the second run.
    pub second: Vec<usize>,
    /// Time elapsed before each event; the first entry is arbitrary.
    pub delays: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum SyncVerdict {
    Yes,
    No(SyncWitness),
    /// The joint exploration exceeded its budget.
    Unknown,
}

pub const DEFAULT_SYNC_CAP: usize = 1_000_000;

pub fn check_sync(a: &TimedCea) -> SyncVerdict {
    check_sync_with(a, DEFAULT_SYNC_CAP)
}

struct Node {
    q1: State,
    q2: State,
    region: Region,
    /// Parent node, the two transitions taken, and the region they fired in.
    parent: Option<(usize, usize, usize, Region)>,
}

pub fn check_sync_with(a: &TimedCea, cap: usize) -> SyncVerdict {
    let n = a.num_clocks();
    let space = RegionSpace::for_automaton(a).doubled();
    let out_edges = a.outgoing();
    let mut pair_sat: HashMap<(usize, usize), bool> = HashMap::new();
    let mut jointly = |k1: usize, k2: usize| {
        let key = (k1.min(k2), k1.max(k2));
        *pair_sat.entry(key).or_insert_with(|| {
            satisfiable_literals(&[(&a.transitions[k1].pred, true), (&a.transitions[k2].pred, true)])
        })
    };

    let mut nodes = vec![Node { q1: a.initial, q2: a.initial, region: space.empty(), parent: None }];
    let mut index: HashMap<(State, State, Region), usize> =
        HashMap::from([((a.initial, a.initial, space.empty()), 0)]);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        let (q1, q2, r) = (nodes[i].q1, nodes[i].q2, nodes[i].region.clone());
        let succs = space.positive_successors(&r);
        for &k1 in &out_edges[q1] {
            for &k2 in &out_edges[q2] {
                let (t1, t2) = (&a.transitions[k1], &a.transitions[k2]);
                if t1.label != t2.label || !jointly(k1, k2) {
                    continue;
                }
                for rp in &succs {
                    if !space.satisfies(rp, &t1.guard, 0) || !space.satisfies(rp, &t2.guard, n) {
                        continue;
                    }
                    if t1.resets != t2.resets {
                        return SyncVerdict::No(witness(a, &space, &nodes, i, (k1, k2, rp.clone())));
                    }
                    let resets = t1.resets.iter().copied().chain(t2.resets.iter().map(|z| z + n));
                    let next = space.reset(rp, resets);
                    let key = (t1.to, t2.to, next);
                    if index.contains_key(&key) {
                        continue;
                    }
                    if nodes.len() >= cap {
                        return SyncVerdict::Unknown;
                    }
                    index.insert(key.clone(), nodes.len());
                    queue.push_back(nodes.len());
                    nodes.push(Node {
                        q1: key.0,
                        q2: key.1,
                        region: key.2,
                        parent: Some((i, k1, k2, rp.clone())),
                    });
                }
            }
        }
    }
    SyncVerdict::Yes
}

/// Rebuilds the two runs and concrete delays realizing their region path.
fn witness(
    a: &TimedCea,
    space: &RegionSpace,
    nodes: &[Node],
    mut at: usize,
    last: (usize, usize, Region),
) -> SyncWitness {
    let mut steps = vec![last];
    while let Some((p, k1, k2, r)) = &nodes[at].parent {
        steps.push((*k1, *k2, r.clone()));
        at = *p;
    }
    steps.reverse();
    let n = a.num_clocks();
    let scale = Rational::from_integer(space.scale);
    let mut nu = ClockValuation::empty(2 * n);
    let mut w = SyncWitness { first: Vec::new(), second: Vec::new(), delays: Vec::new() };
    for (k1, k2, target) in steps {
        let t = space.delay_into(&nu, &target).expect("region paths are realizable");
        let resets = a.transitions[k1]
            .resets
            .iter()
            .copied()
            .chain(a.transitions[k2].resets.iter().map(|z| z + n))
            .collect();
        nu = nu.advance(t).reset(&resets);
        w.first.push(k1);
        w.second.push(k2);
        w.delays.push(t / scale);
    }
    w
}
