//! Syntactic fragments of timed CEL.

use serde::Serialize;

use super::CelFormula;
use crate::model::Interval;
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Fragment {
    Swg,
    Simple,
    Windowed,
    General,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Classification {
    /// The most specific fragment the formula belongs to.
    pub fragment: Fragment,
    pub simple: bool,
    pub windowed: bool,
    pub swg: bool,
}

/// Classifies a formula. Simple and sequence-with-gaps formulas are both
/// windowed; the reported fragment is the most specific one that applies.
pub fn classify(phi: &CelFormula) -> Classification {
    let simple = is_simple(phi);
    let windowed = is_windowed(phi);
    let swg = is_swg(phi);
    let fragment = if swg {
        Fragment::Swg
    } else if simple {
        Fragment::Simple
    } else if windowed {
        Fragment::Windowed
    } else {
        Fragment::General
    };
    Classification { fragment, simple, windowed, swg }
}

/// No projection and no time window anywhere.
pub(crate) fn is_simple(phi: &CelFormula) -> bool {
    let mut ok = true;
    phi.walk(&mut |f| {
        if matches!(f, CelFormula::Project(..) | CelFormula::Within(..)) {
            ok = false;
        }
    });
    ok
}

/// Two levels: a body that is untimed CEL or simple, under any combination
/// of `AS`, `FILTER`, `OR`, `AND`, projections and time windows.
pub(crate) fn is_windowed(phi: &CelFormula) -> bool {
    use CelFormula as F;
    if !phi.has_time_operator() || is_simple(phi) {
        return true;
    }
    match phi {
        F::As(p, _) | F::Filter(p, _, _) | F::Within(p, _) | F::Project(_, p) => is_windowed(p),
        F::Or(a, b) | F::And(a, b) => is_windowed(a) && is_windowed(b),
        _ => false,
    }
}

/// `(φ_T AS X1 FILTER X1[P1]) ;I1 … ;Ik-1 (φ_T AS Xk FILTER Xk[Pk]) WITHIN ≤w`
/// where `φ_T` is a disjunction of event types.
pub(crate) fn is_swg(phi: &CelFormula) -> bool {
    use CelFormula as F;
    let F::Within(body, window) = phi else {
        return false;
    };
    if !starts_at_zero(window) {
        return false;
    }
    let mut cur: &CelFormula = body;
    loop {
        match cur {
            F::TimedSeq(left, _, right) => {
                if !is_swg_item(right) {
                    return false;
                }
                cur = left;
            }
            other => return is_swg_item(other),
        }
    }
}

fn starts_at_zero(i: &Interval) -> bool {
    i.low == Rational::ZERO && !i.low_open
}

fn is_swg_item(f: &CelFormula) -> bool {
    use CelFormula as F;
    match f {
        F::Filter(inner, x, _) => match &**inner {
            F::As(types, y) => x == y && is_type_disjunction(types),
            _ => false,
        },
        _ => false,
    }
}

fn is_type_disjunction(f: &CelFormula) -> bool {
    match f {
        CelFormula::EventType(_) => true,
        CelFormula::Or(a, b) => is_type_disjunction(a) && is_type_disjunction(b),
        _ => false,
    }
}
