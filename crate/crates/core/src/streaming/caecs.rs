//! The clock-aware enumerable compact set: an append-only DAG encoding sets
//! of open complex events together with the time of their last clock reset.
//!
//! Every node denotes a set of triples `(start, marks, reset time)`. Reset
//! nodes overwrite the reset time, clock-check nodes keep the triples whose
//! reset time passes a threshold. Reset and check nodes are grouped into
//! *gadgets* of at most two nodes, and gadgets are never stacked: adding a
//! reset or check on top of a gadget composes the two into one. Together
//! with time-ordered unions this bounds the number of non-output nodes met
//! before each output, which is what makes enumeration output-linear.
//!
//! Both monotonic directions share one implementation through *ranks*: the
//! rank of reset time `r` is `r` when guards are `z ≤ c` and `−r` when they
//! are `z ≥ c`. A check then always keeps ranks at or above a threshold.

use crate::rational::Rational;

pub type NodeId = u32;

/// Comparison direction of the automaton's guards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Le,
    Ge,
}

impl Direction {
    pub fn rank(self, t: Rational) -> Rational {
        match self {
            Direction::Le => t,
            Direction::Ge => -t,
        }
    }

    /// Smallest rank passing `t0 − r ≤ c` (or `t0 − r ≥ c`).
    pub fn threshold(self, t0: Rational, c: Rational) -> Rational {
        match self {
            Direction::Le => t0 - c,
            Direction::Ge => c - t0,
        }
    }

    /// The bound `c'` with `threshold(t0, c') == thr`.
    fn bound_for(self, t0: Rational, thr: Rational) -> Rational {
        match self {
            Direction::Le => t0 - thr,
            Direction::Ge => thr + t0,
        }
    }

    /// Whether reset time `r` passes the check `(t0, c)`.
    pub fn passes(self, t0: Rational, c: Rational, r: Rational) -> bool {
        self.rank(r) >= self.threshold(t0, c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Bottom { pos: usize, t: Rational },
    Extended { pos: usize, label: u32, left: NodeId },
    Union { left: NodeId, right: NodeId },
    Reset { t: Rational, left: NodeId },
    ClockCheck { t0: Rational, c: Rational, left: NodeId },
    Empty { left: Option<NodeId> },
}

#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub kind: Kind,
    /// Largest rank of a reset time below this node (meaningless for
    /// `Empty`).
    pub max_rank: Rational,
    /// Non-output nodes traversed leftwards before an output node.
    pub odepth: u8,
}

/// A block of zero to two reset/check nodes, described by its effect.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gadget {
    Void,
    Reset(Rational),
    Check { t0: Rational, c: Rational },
    /// A reset above a check.
    Composed { t: Rational, t0: Rational, c: Rational },
    Empty,
}

/// `outer ∘ inner`: the single gadget with the effect of applying `inner`
/// and then `outer`. `exit_max` is the largest rank below `inner`, which
/// decides whether two checks leave anything.
pub fn merge_gadgets(outer: Gadget, inner: Gadget, exit_max: Rational, dir: Direction) -> Gadget {
    use Gadget::*;
    match (outer, inner) {
        (Empty, _) | (_, Empty) => Empty,
        (Void, g) | (g, Void) => g,
        (Reset(t), Reset(_)) => Reset(t),
        (Reset(t), Check { t0, c }) | (Reset(t), Composed { t0, c, .. }) => Composed { t, t0, c },
        (Check { t0, c }, Reset(t2)) => {
            if dir.passes(t0, c, t2) {
                Reset(t2)
            } else {
                Empty
            }
        }
        (Check { t0, c }, composed @ Composed { t: t2, .. }) => {
            if dir.passes(t0, c, t2) {
                composed
            } else {
                Empty
            }
        }
        (Check { t0: t1, c: c1 }, Check { t0: t2, c: c2 }) => {
            let thr = dir.threshold(t1, c1).max(dir.threshold(t2, c2));
            if thr > exit_max {
                Empty
            } else {
                Check { t0: t2, c: dir.bound_for(t2, thr) }
            }
        }
        (Composed { t, t0, c }, g) => {
            let below = merge_gadgets(Check { t0, c }, g, exit_max, dir);
            merge_gadgets(Reset(t), below, exit_max, dir)
        }
    }
}

const CHUNK: usize = 1 << 12;

/// Append-only node storage in fixed-size chunks, so growth never moves
/// existing nodes.
#[derive(Debug)]
pub struct Arena {
    chunks: Vec<Vec<Node>>,
    len: usize,
    pub dir: Direction,
    /// Largest odepth of any node created.
    pub max_odepth: u8,
}

impl Arena {
    pub fn new(dir: Direction) -> Arena {
        Arena { chunks: Vec::new(), len: 0, dir, max_odepth: 0 }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, id: NodeId) -> &Node {
        let i = id as usize;
        &self.chunks[i / CHUNK][i % CHUNK]
    }

    #[inline]
    pub fn max_rank(&self, id: NodeId) -> Rational {
        self.get(id).max_rank
    }

    pub fn is_empty_node(&self, id: NodeId) -> bool {
        matches!(self.get(id).kind, Kind::Empty { .. })
    }

    fn push(&mut self, kind: Kind) -> NodeId {
        let (max_rank, odepth) = match kind {
            Kind::Bottom { t, .. } => (self.dir.rank(t), 0),
            Kind::Extended { left, .. } => (self.max_rank(left), 0),
            Kind::Union { left, right } => {
                debug_assert!(
                    self.max_rank(left) >= self.max_rank(right),
                    "unions are time-ordered"
                );
                (self.max_rank(left), self.get(left).odepth + 1)
            }
            Kind::Reset { t, left } => (self.dir.rank(t), self.get(left).odepth + 1),
            Kind::ClockCheck { t0, c, left } => {
                debug_assert!(
                    self.max_rank(left) >= self.dir.threshold(t0, c),
                    "clock checks keep at least one event"
                );
                (self.max_rank(left), self.get(left).odepth + 1)
            }
            Kind::Empty { left } => {
                (left.map(|l| self.max_rank(l)).unwrap_or(Rational::ZERO), 0)
            }
        };
        debug_assert!(odepth <= 11, "output depth {odepth} exceeds 11");
        self.max_odepth = self.max_odepth.max(odepth);
        if self.len.is_multiple_of(CHUNK) {
            self.chunks.push(Vec::with_capacity(CHUNK));
        }
        self.chunks.last_mut().expect("chunk").push(Node { kind, max_rank, odepth });
        self.len += 1;
        NodeId::try_from(self.len - 1).expect("node count fits in u32")
    }

    pub fn new_bottom(&mut self, pos: usize, t: Rational) -> NodeId {
        self.push(Kind::Bottom { pos, t })
    }

    pub fn extend(&mut self, n: NodeId, pos: usize, label: u32) -> NodeId {
        assert!(!self.is_empty_node(n), "cannot extend an empty node");
        self.push(Kind::Extended { pos, label, left: n })
    }

    /// The largest gadget starting at `n` and the node below it.
    pub fn get_gadget(&self, n: NodeId) -> (Gadget, NodeId) {
        match self.get(n).kind {
            Kind::Reset { t, left } => match self.get(left).kind {
                Kind::ClockCheck { t0, c, left: below } => (Gadget::Composed { t, t0, c }, below),
                _ => (Gadget::Reset(t), left),
            },
            Kind::ClockCheck { t0, c, left } => (Gadget::Check { t0, c }, left),
            Kind::Empty { .. } => (Gadget::Empty, n),
            _ => (Gadget::Void, n),
        }
    }

    /// Materializes `g` on top of `exit` and returns its entry.
    pub fn build_gadget(&mut self, g: Gadget, exit: NodeId) -> NodeId {
        match g {
            Gadget::Void => exit,
            Gadget::Reset(t) => self.push(Kind::Reset { t, left: exit }),
            Gadget::Check { t0, c } => self.push(Kind::ClockCheck { t0, c, left: exit }),
            Gadget::Composed { t, t0, c } => {
                let check = self.push(Kind::ClockCheck { t0, c, left: exit });
                self.push(Kind::Reset { t, left: check })
            }
            Gadget::Empty => self.push(Kind::Empty { left: Some(exit) }),
        }
    }

    /// Composes `g` with the gadget at the root of `n`.
    fn compose_on(&mut self, g: Gadget, n: NodeId) -> NodeId {
        let (inner, exit) = self.get_gadget(n);
        let merged = merge_gadgets(g, inner, self.max_rank(exit), self.dir);
        if merged == inner {
            return n;
        }
        self.build_gadget(merged, exit)
    }

    pub fn add_reset(&mut self, n: NodeId, t: Rational) -> NodeId {
        self.compose_on(Gadget::Reset(t), n)
    }

    /// Keeps the events of `n` passing `(t0, c)`; an `Empty` node when none
    /// does.
    pub fn add_clock_check(&mut self, n: NodeId, t0: Rational, c: Rational) -> NodeId {
        if self.max_rank(n) < self.dir.threshold(t0, c) {
            return self.push(Kind::Empty { left: Some(n) });
        }
        self.compose_on(Gadget::Check { t0, c }, n)
    }

    fn is_output(&self, n: NodeId) -> bool {
        matches!(self.get(n).kind, Kind::Bottom { .. } | Kind::Extended { .. })
    }

    fn children(&self, n: NodeId) -> (NodeId, NodeId) {
        match self.get(n).kind {
            Kind::Union { left, right } => (left, right),
            k => unreachable!("not a union: {k:?}"),
        }
    }

    /// `g` composed onto the gadget of `n`, as a node (or `None` if empty).
    fn pushed_into(&mut self, g: Gadget, n: NodeId) -> Option<NodeId> {
        let (inner, exit) = self.get_gadget(n);
        let merged = merge_gadgets(g, inner, self.max_rank(exit), self.dir);
        match merged {
            Gadget::Empty => None,
            m if m == inner => Some(n),
            m => Some(self.build_gadget(m, exit)),
        }
    }

    /// Right-leaning chain of unions over nodes sorted by decreasing rank.
    fn chain(&mut self, parts: &[NodeId]) -> NodeId {
        let (&last, init) = parts.split_last().expect("non-empty chain");
        init.iter().rev().fold(last, |acc, &p| self.push(Kind::Union { left: p, right: acc }))
    }

    /// Union of two non-empty roots with equal maximum rank.
    pub fn union(&mut self, n1: NodeId, n2: NodeId) -> NodeId {
        assert_eq!(self.max_rank(n1), self.max_rank(n2), "union needs equal max ranks");
        let (g1, e1) = self.get_gadget(n1);
        let (g2, e2) = self.get_gadget(n2);
        match (self.is_output(e1), self.is_output(e2)) {
            (true, true) => self.push(Kind::Union { left: n1, right: n2 }),
            (false, false) => {
                let (l1, r1) = self.children(e1);
                let (l2, r2) = self.children(e2);
                let a = self.pushed_into(g1, l1).expect("left branch holds the maximum");
                let b = self.pushed_into(g2, l2).expect("left branch holds the maximum");
                let mut tail: Vec<NodeId> =
                    [self.pushed_into(g1, r1), self.pushed_into(g2, r2)].into_iter().flatten().collect();
                if tail.len() == 2 && self.max_rank(tail[0]) < self.max_rank(tail[1]) {
                    tail.swap(0, 1);
                }
                let mut parts = vec![a, b];
                parts.extend(tail);
                self.chain(&parts)
            }
            (o1, _) => {
                let (single, (g, e)) = if o1 { (n1, (g2, e2)) } else { (n2, (g1, e1)) };
                let (l, r) = self.children(e);
                let a = self.pushed_into(g, l).expect("left branch holds the maximum");
                let mut parts = vec![single, a];
                parts.extend(self.pushed_into(g, r));
                self.chain(&parts)
            }
        }
    }

    /// Right-leaning union chain over a union-list (which is sorted by
    /// non-increasing rank).
    pub fn merge(&mut self, ul: &[NodeId]) -> NodeId {
        self.chain(ul)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    #[test]
    fn check_check_intersection() {
        let g = merge_gadgets(
            Gadget::Check { t0: r(10), c: r(5) },
            Gadget::Check { t0: r(8), c: r(6) },
            r(8),
            Direction::Le,
        );
        assert_eq!(g, Gadget::Check { t0: r(8), c: r(3) });
    }

    #[test]
    fn check_over_stale_reset_is_empty() {
        let g = merge_gadgets(Gadget::Check { t0: r(10), c: r(1) }, Gadget::Reset(r(8)), r(8), Direction::Le);
        assert_eq!(g, Gadget::Empty);
    }

    #[test]
    fn resets_collapse() {
        let mut a = Arena::new(Direction::Le);
        let b = a.new_bottom(1, r(1));
        let x = a.add_reset(b, r(2));
        let y = a.add_reset(x, r(3));
        assert!(matches!(a.get(y).kind, Kind::Reset { left, .. } if left == b));
    }

    #[test]
    fn clock_checks_on_bottoms() {
        let mut a = Arena::new(Direction::Le);
        let b5 = a.new_bottom(5, Rational::parse_decimal("4.5").unwrap());
        let b1 = a.new_bottom(1, Rational::parse_decimal("1.2").unwrap());
        let t = Rational::parse_decimal("7.2").unwrap();
        let kept = a.add_clock_check(b5, t, r(5));
        assert!(!a.is_empty_node(kept));
        let gone = a.add_clock_check(b1, t, r(5));
        assert!(a.is_empty_node(gone));
    }
}
