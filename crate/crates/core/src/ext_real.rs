use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

/// A value in `[0, ∞]` or `(-∞, ∞]`: either a finite real or `+∞`.
///
/// Relative entropies and rate functions are routinely infinite. Keeping the
/// infinite case as its own variant means it can never leak into a float sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    Infinite,
}

impl ExtReal {
    pub const ZERO: ExtReal = ExtReal::Finite(0.0);

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtReal::Infinite)
    }

    /// The finite value, if any.
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            ExtReal::Infinite => None,
        }
    }

    /// Lossy conversion for reporting; `+∞` becomes `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::Infinite => f64::INFINITY,
        }
    }

    /// True when both are infinite, or both finite and within `tol`.
    pub fn approx_eq(self, other: ExtReal, tol: f64) -> bool {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => true,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => (a - b).abs() <= tol,
            _ => false,
        }
    }

    /// `|self - other|`, infinite when exactly one side is infinite and zero
    /// when both are.
    pub fn gap(self, other: ExtReal) -> ExtReal {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => ExtReal::ZERO,
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite((a - b).abs()),
            _ => ExtReal::Infinite,
        }
    }

    pub fn max(self, other: ExtReal) -> ExtReal {
        if self >= other {
            self
        } else {
            other
        }
    }

    pub fn min(self, other: ExtReal) -> ExtReal {
        if self <= other {
            self
        } else {
            other
        }
    }
}

impl Add for ExtReal {
    type Output = ExtReal;

    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::Infinite,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &ExtReal) -> Option<Ordering> {
        match (self, other) {
            (ExtReal::Infinite, ExtReal::Infinite) => Some(Ordering::Equal),
            (ExtReal::Infinite, ExtReal::Finite(_)) => Some(Ordering::Greater),
            (ExtReal::Finite(_), ExtReal::Infinite) => Some(Ordering::Less),
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::Finite(v) => fmt::Display::fmt(v, f),
            ExtReal::Infinite => f.write_str("inf"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_absorbs_addition() {
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::Infinite, ExtReal::Infinite);
        assert_eq!(ExtReal::Finite(1.0) + ExtReal::Finite(2.0), ExtReal::Finite(3.0));
    }

    #[test]
    fn ordering_puts_infinity_last() {
        assert!(ExtReal::Infinite > ExtReal::Finite(1e300));
        assert!(ExtReal::Finite(-1.0) < ExtReal::ZERO);
        assert_eq!(ExtReal::Infinite.max(ExtReal::ZERO), ExtReal::Infinite);
    }

    #[test]
    fn gap_of_two_infinities_is_zero() {
        assert_eq!(ExtReal::Infinite.gap(ExtReal::Infinite), ExtReal::ZERO);
        assert_eq!(ExtReal::Infinite.gap(ExtReal::ZERO), ExtReal::Infinite);
        assert_eq!(format!("{}", ExtReal::Infinite), "inf");
    }
}
