//! Attribute symbols, the equation set and target solving.

mod equations;
pub mod poly;
pub mod solve;
pub mod value;

use std::collections::HashMap;

use thiserror::Error;

pub use equations::{Classified, EquationSet, Known, SolveOptions, SolveOutcome};
pub use poly::Poly;
pub use solve::{rref, select_min_dep, solve_system, Domain, TieBreak, Timeout};
pub use value::Value;

use crate::kb::{Kb, PredicateKind};
use crate::point::{seq_string, Point};

/// Reserved name of the target symbol `g`.
pub const TARGET: &str = "@g";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("undefined value {0}")]
    Undefined(String),
    #[error("attribute term {0} was not resolved to a symbol")]
    Unresolved(String),
    #[error("unsupported expression: {0}")]
    Unsupported(String),
    #[error("unknown attribution {0}")]
    UnknownAttribution(String),
    #[error("{0} does not exist")]
    MissingEntity(String),
}

/// Symbol for an attribute, e.g. `ll_AB` for both `LengthOfLine(AB)` and
/// `LengthOfLine(BA)`. No existence check is made here.
pub fn symbol_for(kb: &Kb, attr: &str, points: &[Point]) -> Result<String, AlgebraError> {
    let def = kb
        .predicate(attr)
        .filter(|d| d.kind == PredicateKind::Attribution)
        .ok_or_else(|| AlgebraError::UnknownAttribution(attr.to_string()))?;
    let sym = def.sym.as_deref().expect("attributions carry sym");
    Ok(format!("{sym}_{}", seq_string(&def.canonical(points))))
}

/// Splits a symbol into attribution name and points.
pub fn parse_symbol<'k>(kb: &'k Kb, symbol: &str) -> Option<(&'k str, Vec<Point>)> {
    let (prefix, pts) = symbol.split_once('_')?;
    let def = kb.attribution_by_sym(prefix)?;
    Some((def.name.as_str(), crate::point::points(pts)?))
}

/// Domains by symbol prefix: angle measures in `[0,180]`, other measures
/// in `[0,360]`, remaining attributions non-negative.
pub fn domain_table(kb: &Kb) -> HashMap<String, Domain> {
    kb.predicates()
        .filter(|p| p.kind == PredicateKind::Attribution)
        .map(|p| {
            let d = if p.name == "MeasureOfAngle" {
                Domain::Range(0.0, 180.0)
            } else if p.name.starts_with("MeasureOf") {
                Domain::Range(0.0, 360.0)
            } else {
                Domain::NonNegative
            };
            (p.sym.clone().expect("sym"), d)
        })
        .collect()
}
