//! The orbit sets P_q(a) (Frobenius orbits of F_{q^a}^x) and O_q(a)
//! (orbits of (j, alpha) -> (qj mod 3, alpha^{1/q}) on {1,2} x F_{q^a}^x).

use crate::error::{Error, Result};
use crate::ffield::{divisors, lcm, ord3, prime_factors, ExtField, FieldElement};
use rug::ops::Pow;
use rug::Integer;
use serde::Serialize;

/// Degree over F_q of the single field holding every orbit of level a.
pub fn ambient_degree(q: u64, a: u32) -> u32 {
    lcm(ord3(q) as u64, a as u64) as u32
}

/// Length of the maximal orbits of level a.
pub fn max_orbit_size(q: u64, a: u32) -> u32 {
    if q % 3 == 2 && a % 2 == 1 {
        2 * a
    } else {
        a
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PlaceOrbit {
    /// minimal element of the orbit in packed order
    pub rep: FieldElement,
    pub size: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FullOrbit {
    /// exponent of the cubic character, 1 or 2
    pub j: u8,
    pub rep: FieldElement,
    pub size: u32,
    /// lift of j to {1, -1}; only meaningful when q = 1 mod 3
    pub pr1: Option<i8>,
    /// index of the place Theta(o)
    pub place: usize,
}

/// Lazily yields the places of level a in order of their representatives.
pub struct PlaceIter<'a> {
    field: &'a ExtField,
    elements: Vec<FieldElement>,
    seen: Vec<bool>,
    pos: usize,
}

impl<'a> PlaceIter<'a> {
    pub fn new(field: &'a ExtField, a: u32) -> Result<Self> {
        if field.degree() % a != 0 {
            return Err(Error::NotSubfield {
                sub: a * field.params().e(),
                ext: field.abs_degree(),
            });
        }
        let elements: Vec<FieldElement> = field
            .subfield_elements(a)?
            .into_iter()
            .filter(|x| !x.is_zero())
            .collect();
        Ok(PlaceIter {
            field,
            seen: vec![false; field.order() as usize],
            elements,
            pos: 0,
        })
    }
}

impl Iterator for PlaceIter<'_> {
    type Item = PlaceOrbit;
    fn next(&mut self) -> Option<PlaceOrbit> {
        while self.pos < self.elements.len() {
            let x = self.elements[self.pos];
            self.pos += 1;
            if self.seen[x.index() as usize] {
                continue;
            }
            let orbit = self.field.frobenius_orbit(x);
            for y in &orbit {
                self.seen[y.index() as usize] = true;
            }
            return Some(PlaceOrbit {
                rep: x,
                size: orbit.len() as u32,
            });
        }
        None
    }
}

pub fn enumerate_places(field: &ExtField, a: u32) -> Result<Vec<PlaceOrbit>> {
    Ok(PlaceIter::new(field, a)?.collect())
}

/// Both orbit families for one level, with the (j, alpha) -> orbit lookup.
#[derive(Clone, Debug)]
pub struct OrbitSet {
    q: u64,
    a: u32,
    pub places: Vec<PlaceOrbit>,
    pub orbits: Vec<FullOrbit>,
    /// Theta^{-1}(v) for each place v
    pub fibers: Vec<Vec<usize>>,
    lookup: Vec<u32>,
}

impl OrbitSet {
    pub fn new(field: &ExtField, a: u32) -> Result<Self> {
        let q = field.q();
        let places = enumerate_places(field, a)?;
        let order = field.order() as usize;
        let mut lookup = vec![u32::MAX; 2 * order];
        let mut orbits = Vec::new();
        let mut fibers = vec![Vec::new(); places.len()];
        let s = ord3(q);
        for (vi, v) in places.iter().enumerate() {
            for j in [1u8, 2] {
                if lookup[(j as usize - 1) * order + v.rep.index() as usize] != u32::MAX {
                    continue;
                }
                // walk (j, alpha) -> (q j mod 3, alpha^{1/q}); the orbit is the
                // same set as walking forward with alpha^q and j q^{-1} = j q
                let idx = orbits.len() as u32;
                let (mut jj, mut x) = (j, v.rep);
                let mut size = 0u32;
                loop {
                    let slot = (jj as usize - 1) * order + x.index() as usize;
                    if lookup[slot] != u32::MAX {
                        break;
                    }
                    lookup[slot] = idx;
                    size += 1;
                    jj = if q % 3 == 1 { jj } else { 3 - jj };
                    x = field.frobenius(x, 1);
                }
                debug_assert_eq!(size, lcm(s as u64, v.size as u64) as u32);
                orbits.push(FullOrbit {
                    j,
                    rep: v.rep,
                    size,
                    pr1: (q % 3 == 1).then_some(if j == 1 { 1 } else { -1 }),
                    place: vi,
                });
                fibers[vi].push(idx as usize);
            }
        }
        Ok(OrbitSet {
            q,
            a,
            places,
            orbits,
            fibers,
            lookup,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }
    pub fn a(&self) -> u32 {
        self.a
    }

    /// Index of the orbit containing (j, alpha).
    pub fn orbit_of(&self, j: u8, alpha: FieldElement) -> Option<usize> {
        let order = self.lookup.len() / 2;
        let i = self.lookup[(j as usize - 1) * order + alpha.index() as usize];
        (i != u32::MAX).then_some(i as usize)
    }

    pub fn max_size(&self) -> u32 {
        max_orbit_size(self.q, self.a)
    }

    pub fn maximal_orbits(&self) -> Vec<usize> {
        let m = self.max_size();
        (0..self.orbits.len()).filter(|&i| self.orbits[i].size == m).collect()
    }

    /// Places of exact degree a: the support of the angle sample.
    pub fn maximal_places(&self) -> Vec<usize> {
        (0..self.places.len()).filter(|&i| self.places[i].size == self.a).collect()
    }

    /// Sum of |o| over non-maximal orbits.
    pub fn non_maximal_mass(&self) -> u64 {
        let m = self.max_size();
        self.orbits.iter().filter(|o| o.size != m).map(|o| o.size as u64).sum()
    }

    /// Least common multiple of the orbit sizes.
    pub fn lcm_sizes(&self) -> u32 {
        self.orbits.iter().fold(1u64, |acc, o| lcm(acc, o.size as u64)) as u32
    }
}

pub fn mobius(n: u64) -> i64 {
    let f = prime_factors(n);
    let mut m = n;
    for &p in &f {
        m /= p;
        if m % p == 0 {
            return 0;
        }
    }
    if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Pi_q(d): closed points of G_m over F_q of degree d.
pub fn count_places_of_degree(q: u64, d: u32) -> Result<Integer> {
    if d == 0 {
        return Err(Error::OutOfRange("degree must be positive".into()));
    }
    let mut s = Integer::new();
    for k in divisors(d as u64) {
        let term = Integer::from(q).pow((d as u64 / k) as u32);
        match mobius(k) {
            1 => s += term,
            -1 => s -= term,
            _ => {}
        }
    }
    s /= d;
    if d == 1 {
        s -= 1;
    }
    Ok(s)
}

/// |Pi_q(d) - q^d/d| <= q^{d/2}/(1 - 1/q).
pub fn place_count_bound_holds(q: u64, d: u32) -> Result<bool> {
    let pi = count_places_of_degree(q, d)?.to_f64();
    let qf = q as f64;
    Ok((pi - qf.powi(d as i32) / d as f64).abs() <= qf.powf(d as f64 / 2.0) / (1.0 - 1.0 / qf))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ffield::FieldParams;

    fn set(q: u64, a: u32) -> OrbitSet {
        let f = ExtField::new(FieldParams::new(q).unwrap(), ambient_degree(q, a)).unwrap();
        OrbitSet::new(&f, a).unwrap()
    }

    #[test]
    fn places_q7() {
        let s = set(7, 1);
        assert_eq!(s.places.len(), 6);
        assert!(s.places.iter().all(|v| v.size == 1));
        let s = set(7, 2);
        let ones = s.places.iter().filter(|v| v.size == 1).count();
        let twos = s.places.iter().filter(|v| v.size == 2).count();
        assert_eq!((ones, twos), (6, 21));
    }

    #[test]
    fn orbits_q7_a1_vertical() {
        let s = set(7, 1);
        assert_eq!(s.orbits.len(), 12);
        assert!(s.orbits.iter().all(|o| o.size == 1 && o.pr1.is_some()));
    }

    #[test]
    fn orbits_q11_zigzag() {
        let s = set(11, 1);
        assert!(s.orbits.iter().all(|o| o.size == 2 && o.pr1.is_none()));
        assert_eq!(s.orbits.len(), 10);
        assert!(s.fibers.iter().all(|f| f.len() == 1));
    }

    #[test]
    fn partition_masses() {
        for (q, a) in [(7, 1), (7, 2), (7, 3), (11, 1), (11, 2), (13, 1)] {
            let s = set(q, a);
            let qa = q.pow(a);
            assert_eq!(s.places.iter().map(|v| v.size as u64).sum::<u64>(), qa - 1);
            assert_eq!(s.orbits.iter().map(|o| o.size as u64).sum::<u64>(), 2 * (qa - 1));
            assert!(s.places.len() <= s.orbits.len() && s.orbits.len() <= 2 * s.places.len());
            for o in &s.orbits {
                let v = &s.places[o.place];
                assert_eq!(o.size as u64, lcm(ord3(q) as u64, v.size as u64));
            }
        }
    }

    #[test]
    fn maximal_sizes() {
        assert_eq!(max_orbit_size(7, 2), 2);
        assert_eq!(max_orbit_size(11, 1), 2);
        let s = set(11, 2);
        assert_eq!(s.max_size(), 2);
        // both size-1 and size-2 places give maximal orbits
        let sizes: std::collections::BTreeSet<u32> = s
            .maximal_orbits()
            .iter()
            .map(|&i| s.places[s.orbits[i].place].size)
            .collect();
        assert_eq!(sizes.into_iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn place_counts() {
        assert_eq!(count_places_of_degree(7, 1).unwrap(), 6);
        assert_eq!(count_places_of_degree(7, 2).unwrap(), 21);
        assert_eq!(count_places_of_degree(7, 3).unwrap(), 112);
        assert!(place_count_bound_holds(7, 3).unwrap());
        assert_eq!(set(7, 3).maximal_places().len(), 112);
    }

    #[test]
    fn lookup_finds_every_pair() {
        let f = ExtField::new(FieldParams::new(7).unwrap(), 2).unwrap();
        let s = OrbitSet::new(&f, 2).unwrap();
        for x in f.elements().skip(1) {
            for j in [1, 2] {
                let o = s.orbit_of(j, x).unwrap();
                assert_eq!(s.orbits[o].j, j);
                assert!(f.frobenius_orbit(x).contains(&s.orbits[o].rep));
            }
        }
    }
}
