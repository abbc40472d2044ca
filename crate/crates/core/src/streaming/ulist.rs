//! Union-lists: per-state node lists sorted by non-increasing maximum rank,
//! where only the first two entries may share a rank.

use super::caecs::{Arena, NodeId};
use crate::rational::Rational;

/// Union-lists of the active states, reusing their buffers between events.
#[derive(Debug)]
pub struct Table {
    lists: Vec<Vec<NodeId>>,
    keys: Vec<usize>,
}

impl Table {
    pub fn new(states: usize) -> Table {
        Table { lists: vec![Vec::new(); states], keys: Vec::new() }
    }

    pub fn clear(&mut self) {
        for k in self.keys.drain(..) {
            self.lists[k].clear();
        }
    }

    pub fn keys(&self) -> &[usize] {
        &self.keys
    }

    pub fn get(&self, q: usize) -> &[NodeId] {
        &self.lists[q]
    }
}

/// Places `n` by rank, joining an entry of equal rank. A node tying with
/// the head goes second, so the head keeps its shape.
pub fn insert(arena: &mut Arena, ul: &mut Vec<NodeId>, n: NodeId) {
    let r = arena.max_rank(n);
    let Some(&head) = ul.first() else {
        ul.push(n);
        return;
    };
    debug_assert!(r <= arena.max_rank(head), "insertions never outrank the head");
    let at = (1..ul.len()).find(|&k| arena.max_rank(ul[k]) <= r).unwrap_or(ul.len());
    if at < ul.len() && arena.max_rank(ul[at]) == r {
        ul[at] = arena.union(n, ul[at]);
    } else {
        ul.insert(at, n);
    }
}

/// Merges `ul` into the list of `q`: it becomes the list if `q` has none,
/// and is otherwise inserted as a single node.
pub fn add(arena: &mut Arena, table: &mut Table, q: usize, ul: Vec<NodeId>) {
    debug_assert!(!ul.is_empty());
    if table.lists[q].is_empty() {
        table.keys.push(q);
        table.lists[q] = ul;
    } else {
        let n = if ul.len() == 1 { ul[0] } else { arena.merge(&ul) };
        let mut list = std::mem::take(&mut table.lists[q]);
        insert(arena, &mut list, n);
        table.lists[q] = list;
    }
}

/// Applies the check to every entry; failing entries form a suffix.
pub fn clock_check(arena: &mut Arena, ul: &mut Vec<NodeId>, t: Rational, c: Rational) {
    for k in 0..ul.len() {
        let n = arena.add_clock_check(ul[k], t, c);
        if arena.is_empty_node(n) {
            ul.truncate(k);
            return;
        }
        ul[k] = n;
    }
}

/// Resets every entry; all get the same rank and the tail collapses into
/// one union.
pub fn reset(arena: &mut Arena, ul: &mut Vec<NodeId>, t: Rational) {
    let head = arena.add_reset(ul[0], t);
    let mut tail: Option<NodeId> = None;
    for k in 1..ul.len() {
        let n = arena.add_reset(ul[k], t);
        tail = Some(match tail {
            None => n,
            Some(acc) => arena.union(acc, n),
        });
    }
    ul.clear();
    ul.push(head);
    ul.extend(tail);
}
