//! Clock regions over partial valuations.
//!
//! Guard constants are scaled by the least common denominator so every
//! comparison is against an integer. A region records, per clock, whether it
//! is uninitialized, exactly an integer, strictly between two integers, or
//! beyond the largest constant it is compared with, plus the order of the
//! fractional parts of the clocks strictly between integers.

use std::collections::BTreeSet;

use crate::cea::{Clock, ClockCondition, ClockValuation, TimedCea};
use crate::predicate::Cmp;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Part {
    Uninit,
    /// Exactly `n`.
    Int(i64),
    /// Strictly inside `(n, n + 1)`.
    Open(i64),
    /// Greater than the clock's largest constant.
    Beyond,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub parts: Vec<Part>,
    /// Clocks with an `Open` part, grouped by equal fractional part, in
    /// increasing order of that fraction.
    pub order: Vec<Vec<Clock>>,
}

/// Scaling and per-clock maxima for a family of guards.
#[derive(Debug, Clone)]
pub struct RegionSpace {
    /// Multiplier turning every guard constant into an integer.
    pub scale: i64,
    /// Largest scaled constant per clock.
    pub max: Vec<i64>,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl RegionSpace {
    pub fn for_automaton(a: &TimedCea) -> RegionSpace {
        let guards: Vec<&ClockCondition> = a.transitions.iter().map(|t| &t.guard).collect();
        RegionSpace::for_guards(a.num_clocks(), &guards)
    }

    pub fn for_guards(num_clocks: usize, guards: &[&ClockCondition]) -> RegionSpace {
        let atoms: Vec<_> = guards.iter().flat_map(|g| g.atoms()).collect();
        let mut scale: i64 = 1;
        for a in &atoms {
            let d = a.2.denom();
            scale = scale / gcd(scale, d) * d;
        }
        let mut max = vec![0i64; num_clocks];
        for a in &atoms {
            let k = (a.2 * Rational::from_integer(scale)).numer();
            max[a.0] = max[a.0].max(k);
        }
        RegionSpace { scale, max }
    }

    /// The same maxima for two copies of the clocks (`z` and `z + n`).
    pub fn doubled(&self) -> RegionSpace {
        let mut max = self.max.clone();
        max.extend(self.max.iter().copied());
        RegionSpace { scale: self.scale, max }
    }

    pub fn num_clocks(&self) -> usize {
        self.max.len()
    }

    /// The region with no clock initialized.
    pub fn empty(&self) -> Region {
        Region { parts: vec![Part::Uninit; self.max.len()], order: Vec::new() }
    }

    pub fn scaled(&self, c: Rational) -> Rational {
        c * Rational::from_integer(self.scale)
    }

    /// Region of a valuation given in scaled units.
    pub fn region_of(&self, nu: &ClockValuation) -> Region {
        let mut parts = vec![Part::Uninit; self.max.len()];
        let mut fr: Vec<(Rational, Clock)> = Vec::new();
        for (z, part) in parts.iter_mut().enumerate() {
            let Some(v) = nu.get(z) else { continue };
            let n = v.floor();
            *part = if v > Rational::from_integer(self.max[z]) {
                Part::Beyond
            } else if v.is_integer() {
                Part::Int(n)
            } else {
                fr.push((v.fract(), z));
                Part::Open(n)
            };
        }
        fr.sort();
        let mut order: Vec<Vec<Clock>> = Vec::new();
        let mut last: Option<Rational> = None;
        for (f, z) in fr {
            if last == Some(f) {
                order.last_mut().expect("group").push(z);
            } else {
                order.push(vec![z]);
                last = Some(f);
            }
        }
        Region { parts, order }
    }

    /// The next region reached by letting time pass, if any.
    pub fn succ(&self, r: &Region) -> Option<Region> {
        let mut out = r.clone();
        let exact: Vec<Clock> =
            (0..r.parts.len()).filter(|&z| matches!(r.parts[z], Part::Int(_))).collect();
        if !exact.is_empty() {
            let mut group = Vec::new();
            for z in exact {
                let Part::Int(n) = r.parts[z] else { unreachable!() };
                if n >= self.max[z] {
                    out.parts[z] = Part::Beyond;
                } else {
                    out.parts[z] = Part::Open(n);
                    group.push(z);
                }
            }
            if !group.is_empty() {
                out.order.insert(0, group);
            }
            return Some(out);
        }
        let top = out.order.pop()?;
        for z in top {
            let Part::Open(n) = r.parts[z] else { unreachable!("ordered clocks are open") };
            out.parts[z] = Part::Int(n + 1);
        }
        Some(out)
    }

    /// Regions reachable with a strictly positive delay, in time order.
    pub fn positive_successors(&self, r: &Region) -> Vec<Region> {
        let mut out = Vec::new();
        let stays = !r.parts.iter().any(|p| matches!(p, Part::Int(_)));
        if stays {
            out.push(r.clone());
        }
        let mut cur = r.clone();
        while let Some(next) = self.succ(&cur) {
            out.push(next.clone());
            cur = next;
        }
        out
    }

    /// Region after resetting `zs` to zero.
    pub fn reset(&self, r: &Region, zs: impl IntoIterator<Item = Clock>) -> Region {
        let mut out = r.clone();
        let zs: BTreeSet<Clock> = zs.into_iter().collect();
        if zs.is_empty() {
            return out;
        }
        for &z in &zs {
            out.parts[z] = Part::Int(0);
        }
        for g in &mut out.order {
            g.retain(|z| !zs.contains(z));
        }
        out.order.retain(|g| !g.is_empty());
        out
    }

    /// Whether every valuation of the region satisfies `g` (clock `z` of
    /// `g` is read as clock `z + offset` of the region). Regions decide every
    /// guard whose constants were used to build the space.
    pub fn satisfies(&self, r: &Region, g: &ClockCondition, offset: usize) -> bool {
        if g.clocks().iter().any(|&z| r.parts[z + offset] == Part::Uninit) {
            return false;
        }
        self.eval(r, g, offset)
    }

    fn eval(&self, r: &Region, g: &ClockCondition, offset: usize) -> bool {
        match g {
            ClockCondition::True => true,
            ClockCondition::False => false,
            ClockCondition::Atom { clock, cmp, c } => {
                let k = self.scaled(*c);
                atom_holds(r.parts[clock + offset], *cmp, k)
            }
            ClockCondition::And(a, b) => self.eval(r, a, offset) && self.eval(r, b, offset),
            ClockCondition::Or(a, b) => self.eval(r, a, offset) || self.eval(r, b, offset),
        }
    }

    /// A positive delay (scaled units) taking valuation `nu` into region
    /// `target`, if one exists.
    pub fn delay_into(&self, nu: &ClockValuation, target: &Region) -> Option<Rational> {
        let mut critical: Vec<Rational> = Vec::new();
        for z in 0..self.max.len() {
            if let Some(v) = nu.get(z) {
                let mut n = v.floor() + 1;
                while n <= self.max[z] + 1 {
                    critical.push(Rational::from_integer(n) - v);
                    n += 1;
                }
            }
        }
        critical.sort();
        critical.dedup();
        let mut candidates = Vec::new();
        let mut prev = Rational::ZERO;
        for &c in &critical {
            candidates.push((prev + c) * Rational::new(1, 2));
            candidates.push(c);
            prev = c;
        }
        candidates.push(prev + Rational::ONE);
        candidates.into_iter().find(|&t| self.region_of(&nu.advance(t)) == *target)
    }
}

fn atom_holds(p: Part, cmp: Cmp, k: Rational) -> bool {
    match p {
        Part::Uninit => false,
        Part::Int(n) => cmp.eval(&Rational::from_integer(n), &k),
        Part::Open(n) => {
            let (lo, hi) = (Rational::from_integer(n), Rational::from_integer(n + 1));
            match cmp {
                Cmp::Lt | Cmp::Le => hi <= k,
                Cmp::Gt | Cmp::Ge => lo >= k,
                Cmp::Eq => false,
                Cmp::Ne => true,
            }
        }
        Part::Beyond => matches!(cmp, Cmp::Gt | Cmp::Ge | Cmp::Ne),
    }
}
