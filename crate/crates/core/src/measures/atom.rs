use std::cmp::Ordering;
use std::fmt::Debug;

use crate::{Error, Result};

/// Two real coordinates denote the same atom when they differ by at most
/// `REAL_ATOM_TOL · max(1, |a|, |b|)`.
pub const REAL_ATOM_TOL: f64 = 1e-12;

/// A point that can carry probability mass.
///
/// Integers are matched exactly, reals up to [`REAL_ATOM_TOL`], and vectors
/// coordinatewise. Storage is kept sorted by [`Atom::total_cmp`];
/// [`Atom::bucket_cmp`] is a coarser order whose ties form a contiguous run
/// of that sorted storage and contain every atom matching a given one.
pub trait Atom: Clone + Debug + PartialEq + Send + Sync {
    /// Nesting depth, used to pick separators when rendering.
    const DEPTH: usize;

    fn total_cmp(&self, other: &Self) -> Ordering;

    fn bucket_cmp(&self, other: &Self) -> Ordering {
        self.total_cmp(other)
    }

    /// Whether the two values denote the same point.
    fn same_atom(&self, other: &Self) -> bool {
        self.total_cmp(other) == Ordering::Equal
    }

    /// Whether the two values live in the same space (equal dimensions).
    fn compatible(&self, _other: &Self) -> bool {
        true
    }

    fn render(&self) -> String;

    fn parse(text: &str) -> Result<Self>;
}

macro_rules! integer_atom {
    ($($t:ty),*) => {$(
        impl Atom for $t {
            const DEPTH: usize = 0;

            fn total_cmp(&self, other: &Self) -> Ordering {
                self.cmp(other)
            }

            fn render(&self) -> String {
                self.to_string()
            }

            fn parse(text: &str) -> Result<Self> {
                text.trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("atom `{text}`: {e}")))
            }
        }
    )*};
}

integer_atom!(u32, u64, usize, i64);

impl Atom for f64 {
    const DEPTH: usize = 0;

    fn total_cmp(&self, other: &Self) -> Ordering {
        f64::total_cmp(self, other)
    }

    fn bucket_cmp(&self, other: &Self) -> Ordering {
        if self.same_atom(other) {
            Ordering::Equal
        } else {
            f64::total_cmp(self, other)
        }
    }

    fn same_atom(&self, other: &Self) -> bool {
        let scale = 1f64.max(self.abs()).max(other.abs());
        (self - other).abs() <= REAL_ATOM_TOL * scale
    }

    fn render(&self) -> String {
        format!("{self:.16e}")
    }

    fn parse(text: &str) -> Result<Self> {
        text.trim()
            .parse()
            .map_err(|e| Error::Parse(format!("atom `{text}`: {e}")))
    }
}

fn separator(depth: usize) -> char {
    match depth {
        1 => ',',
        2 => ';',
        _ => '|',
    }
}

impl<S: Atom> Atom for Vec<S> {
    const DEPTH: usize = S::DEPTH + 1;

    fn total_cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.iter().zip(other) {
            match a.total_cmp(b) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.len().cmp(&other.len())
    }

    fn bucket_cmp(&self, other: &Self) -> Ordering {
        match (self.first(), other.first()) {
            (Some(a), Some(b)) => a.bucket_cmp(b),
            (None, None) => Ordering::Equal,
            (None, Some(_)) => Ordering::Less,
            (Some(_), None) => Ordering::Greater,
        }
    }

    fn same_atom(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().zip(other).all(|(a, b)| a.same_atom(b))
    }

    fn compatible(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().zip(other).all(|(a, b)| a.compatible(b))
    }

    fn render(&self) -> String {
        let sep = separator(Self::DEPTH).to_string();
        self.iter().map(Atom::render).collect::<Vec<_>>().join(&sep)
    }

    fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text.is_empty() {
            return Ok(Vec::new());
        }
        text.split(separator(Self::DEPTH)).map(S::parse).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_match_within_tolerance() {
        assert!(1.0.same_atom(&(1.0 + 1e-13)));
        assert!(!1.0.same_atom(&(1.0 + 1e-9)));
        assert!(1e6.same_atom(&(1e6 + 1e-7)));
        assert_eq!(1.0.bucket_cmp(&(1.0 + 1e-13)), Ordering::Equal);
    }

    #[test]
    fn vectors_match_coordinatewise() {
        let a = vec![0.1, 0.2];
        assert!(a.same_atom(&vec![0.1 + 1e-14, 0.2]));
        assert!(!a.same_atom(&vec![0.1, 0.2, 0.3]));
        assert!(!a.compatible(&vec![0.1]));
    }

    #[test]
    fn nested_atoms_round_trip() {
        let path: Vec<Vec<f64>> = vec![vec![1.5, -2.0], vec![0.25, 3.0]];
        let text = path.render();
        assert_eq!(text.matches(';').count(), 1);
        assert_eq!(Vec::<Vec<f64>>::parse(&text).unwrap(), path);
        let ids: Vec<usize> = vec![0, 1, 1];
        assert_eq!(ids.render(), "0,1,1");
        assert_eq!(Vec::<usize>::parse("0,1,1").unwrap(), ids);
    }

    #[test]
    fn rendered_reals_keep_full_precision() {
        let x = std::f64::consts::PI / 7.0;
        assert_eq!(f64::parse(&x.render()).unwrap(), x);
    }
}
