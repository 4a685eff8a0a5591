use serde::Serialize;

/// Outcome of checking one identity or inequality on one instance.
///
/// `lhs`/`rhs` are the two sides in the orientation of `statement`;
/// `deviation` is the quantity compared against `tolerance` (or, for
/// inequalities, the signed margin `rhs - lhs` or `lhs - rhs`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: &'static str,
    pub statement: &'static str,
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
    pub deviation: f64,
    pub tolerance: f64,
}

impl Verdict {
    pub(crate) fn identity(
        check: &'static str,
        statement: &'static str,
        lhs: f64,
        rhs: f64,
        deviation: f64,
        tolerance: f64,
    ) -> Self {
        Verdict {
            check,
            statement,
            holds: deviation <= tolerance,
            lhs,
            rhs,
            deviation,
            tolerance,
        }
    }
}
