//! Arithmetic progressions `{x >= start : x ≡ residue (mod modulus)}` over the naturals.

use std::cmp::Ordering;
use std::fmt;

use num_integer::Integer;

/// A one-sided arithmetic progression of naturals.
///
/// The start is always a member, so `nth(0) == start`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ap {
    residue: u64,
    modulus: u64,
    start: u64,
}

impl Ap {
    /// Builds the progression of `x >= from` with `x ≡ residue (mod modulus)`.
    /// Returns `None` for a zero modulus.
    pub fn new(residue: u64, modulus: u64, from: u64) -> Option<Ap> {
        if modulus == 0 {
            return None;
        }
        let residue = residue % modulus;
        Some(Ap { residue, modulus, start: first_at_least(residue, modulus, from) })
    }

    /// All naturals from `from` on.
    pub fn tail(from: u64) -> Ap {
        Ap { residue: 0, modulus: 1, start: from }
    }

    pub fn residue(&self) -> u64 {
        self.residue
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn start(&self) -> u64 {
        self.start
    }

    pub fn contains(&self, x: u64) -> bool {
        x >= self.start && x % self.modulus == self.residue
    }

    /// The k-th member, counting from zero.
    pub fn nth(&self, k: u64) -> u64 {
        self.start + k * self.modulus
    }

    /// Position of `x` inside the progression.
    pub fn index_of(&self, x: u64) -> Option<u64> {
        self.contains(x).then(|| (x - self.start) / self.modulus)
    }

    /// The same progression cut down to members `>= from`.
    pub fn from(&self, from: u64) -> Ap {
        Ap { start: first_at_least(self.residue, self.modulus, from.max(self.start)), ..*self }
    }

    /// Intersection by the Chinese remainder theorem.
    pub fn intersect(&self, other: &Ap) -> Option<Ap> {
        let (r, m) = crt(self.residue, self.modulus, other.residue, other.modulus)?;
        Ap::new(r, m, self.start.max(other.start))
    }
}

impl Ord for Ap {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.modulus, self.residue, self.start).cmp(&(other.modulus, other.residue, other.start))
    }
}

impl PartialOrd for Ap {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AP({},{},{})", self.residue, self.modulus, self.start)
    }
}

/// Least `x >= from` with `x ≡ residue (mod modulus)`.
pub(crate) fn first_at_least(residue: u64, modulus: u64, from: u64) -> u64 {
    let r = residue % modulus;
    let fr = from % modulus;
    if fr <= r {
        from - fr + r
    } else {
        from - fr + modulus + r
    }
}

/// Solves `x ≡ r1 (m1)`, `x ≡ r2 (m2)`; returns `(x mod lcm, lcm)`.
pub(crate) fn crt(r1: u64, m1: u64, r2: u64, m2: u64) -> Option<(u64, u64)> {
    let (a1, n1, a2, n2) = (r1 as i128, m1 as i128, r2 as i128, m2 as i128);
    let eg = n1.extended_gcd(&n2);
    let g = eg.gcd;
    if (a2 - a1) % g != 0 {
        return None;
    }
    let l = n1 / g * n2;
    let k = ((a2 - a1) / g).rem_euclid(n2 / g) * eg.x.rem_euclid(n2 / g) % (n2 / g);
    let x = (a1 + n1 * k).rem_euclid(l);
    Some((x as u64, l as u64))
}

pub(crate) fn lcm(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub(crate) fn gcd(a: u64, b: u64) -> u64 {
    a.gcd(&b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalises_start() {
        let ap = Ap::new(1, 2, 4).unwrap();
        assert_eq!(ap.start(), 5);
        assert_eq!(ap.nth(2), 9);
        assert_eq!(ap.index_of(9), Some(2));
        assert_eq!(ap.index_of(3), None);
        assert!(Ap::new(0, 0, 0).is_none());
    }

    #[test]
    fn intersections() {
        let evens = Ap::new(0, 2, 0).unwrap();
        let odds = Ap::new(1, 2, 0).unwrap();
        assert!(evens.intersect(&odds).is_none());
        let threes = Ap::new(0, 3, 7).unwrap();
        let both = evens.intersect(&threes).unwrap();
        assert_eq!((both.residue(), both.modulus(), both.start()), (0, 6, 12));
    }

    proptest! {
        #[test]
        fn intersection_matches_membership(
            r1 in 0u64..12, m1 in 1u64..12, s1 in 0u64..30,
            r2 in 0u64..12, m2 in 1u64..12, s2 in 0u64..30,
        ) {
            let a = Ap::new(r1, m1, s1).unwrap();
            let b = Ap::new(r2, m2, s2).unwrap();
            let i = a.intersect(&b);
            for x in 0..400u64 {
                let both = a.contains(x) && b.contains(x);
                prop_assert_eq!(both, i.map_or(false, |ap| ap.contains(x)));
            }
        }
    }
}
