//! Linear algebra over a prime field F_p: subspaces in reduced row echelon form.

use std::fmt;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    p: u32,
}

pub fn is_prime(q: u32) -> bool {
    q >= 2 && (2..).take_while(|d| d * d <= q).all(|d| q % d != 0)
}

impl Field {
    pub fn new(p: u32) -> Option<Self> {
        (is_prime(p) && p < 256).then_some(Field { p })
    }

    pub fn order(&self) -> u32 {
        self.p
    }

    pub fn add(&self, a: u8, b: u8) -> u8 {
        ((a as u32 + b as u32) % self.p) as u8
    }

    pub fn sub(&self, a: u8, b: u8) -> u8 {
        ((a as u32 + self.p - b as u32) % self.p) as u8
    }

    pub fn mul(&self, a: u8, b: u8) -> u8 {
        ((a as u32 * b as u32) % self.p) as u8
    }

    pub fn inv(&self, a: u8) -> u8 {
        assert!(a != 0, "inverse of zero");
        // a^(p-2)
        let mut result = 1u32;
        let mut base = a as u32 % self.p;
        let mut e = self.p - 2;
        while e > 0 {
            if e & 1 == 1 {
                result = result * base % self.p;
            }
            base = base * base % self.p;
            e >>= 1;
        }
        result as u8
    }

    /// `row ← row + c·other`
    pub fn axpy(&self, row: &mut [u8], c: u8, other: &[u8]) {
        if c == 0 {
            return;
        }
        for (r, o) in row.iter_mut().zip(other) {
            *r = self.add(*r, self.mul(c, *o));
        }
    }

    /// Reduced row echelon form; zero rows dropped.
    pub fn rref(&self, mut rows: Vec<Vec<u8>>) -> Vec<Vec<u8>> {
        let width = rows.first().map_or(0, |r| r.len());
        let mut rank = 0;
        for col in 0..width {
            let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(rank, piv);
            let inv = self.inv(rows[rank][col]);
            for x in rows[rank].iter_mut() {
                *x = self.mul(*x, inv);
            }
            let pivot_row = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row[col] != 0 {
                    let c = self.sub(0, row[col]);
                    self.axpy(row, c, &pivot_row);
                }
            }
            rank += 1;
        }
        rows.truncate(rank);
        rows
    }

    pub fn span(&self, ambient: usize, rows: Vec<Vec<u8>>) -> Subspace {
        debug_assert!(rows.iter().all(|r| r.len() == ambient));
        Subspace {
            ambient,
            rows: self.rref(rows),
        }
    }

    pub fn sum(&self, a: &Subspace, b: &Subspace) -> Subspace {
        self.span(a.ambient, a.rows.iter().chain(&b.rows).cloned().collect())
    }

    /// Zassenhaus: row-reduce `[[A, A], [B, 0]]`; rows with vanishing left half span `A ∩ B`
    /// in their right half.
    pub fn intersection(&self, a: &Subspace, b: &Subspace) -> Subspace {
        let m = a.ambient;
        let mut rows = Vec::new();
        for r in &a.rows {
            let mut x = r.clone();
            x.extend_from_slice(r);
            rows.push(x);
        }
        for r in &b.rows {
            let mut x = r.clone();
            x.extend(std::iter::repeat(0).take(m));
            rows.push(x);
        }
        let reduced = self.rref(rows);
        let basis = reduced
            .into_iter()
            .filter(|r| r[..m].iter().all(|x| *x == 0))
            .map(|r| r[m..].to_vec())
            .collect();
        self.span(m, basis)
    }

    pub fn contains_vector(&self, s: &Subspace, v: &[u8]) -> bool {
        let mut rows = s.rows.clone();
        rows.push(v.to_vec());
        self.rref(rows).len() == s.dim()
    }

    pub fn is_subspace_of(&self, a: &Subspace, b: &Subspace) -> bool {
        a.rows.iter().all(|r| self.contains_vector(b, r))
    }

    /// All nonzero vectors of `F_p^m` whose first nonzero entry is 1 (one per projective point).
    pub fn projective_points(&self, m: usize) -> Vec<Vec<u8>> {
        let mut out = Vec::new();
        let total = (self.p as u64).pow(m as u32);
        for code in 1..total {
            let mut v = vec![0u8; m];
            let mut c = code;
            for x in v.iter_mut().rev() {
                *x = (c % self.p as u64) as u8;
                c /= self.p as u64;
            }
            if v.iter().find(|x| **x != 0) == Some(&1) {
                out.push(v);
            }
        }
        out
    }

    /// Applies the matrix `g` (rows are images of basis vectors: `v ↦ v·g`) to a subspace.
    pub fn apply(&self, g: &[Vec<u8>], s: &Subspace) -> Subspace {
        let rows = s.rows.iter().map(|r| self.vec_mat(r, g)).collect();
        self.span(s.ambient, rows)
    }

    pub fn vec_mat(&self, v: &[u8], g: &[Vec<u8>]) -> Vec<u8> {
        let mut out = vec![0u8; g.first().map_or(0, |r| r.len())];
        for (c, row) in v.iter().zip(g) {
            self.axpy(&mut out, *c, row);
        }
        out
    }
}

/// A linear subspace of `F_p^ambient` stored by its canonical RREF basis.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subspace {
    ambient: usize,
    rows: Vec<Vec<u8>>,
}

impl fmt::Debug for Subspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            for x in r {
                write!(f, "{x}")?;
            }
        }
        write!(f, ">")
    }
}

impl Subspace {
    pub fn zero(ambient: usize) -> Self {
        Subspace {
            ambient,
            rows: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn label(&self) -> String {
        format!("{self:?}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        assert!(Field::new(2).is_some());
        assert!(Field::new(7).is_some());
        assert!(Field::new(4).is_none());
        assert!(Field::new(1).is_none());
    }

    #[test]
    fn inverses() {
        for p in [2u32, 3, 5, 7, 13] {
            let f = Field::new(p).unwrap();
            for a in 1..p as u8 {
                assert_eq!(f.mul(a, f.inv(a)), 1);
            }
        }
    }

    #[test]
    fn point_counts() {
        let f = Field::new(2).unwrap();
        assert_eq!(f.projective_points(3).len(), 7);
        assert_eq!(f.projective_points(4).len(), 15);
        let f3 = Field::new(3).unwrap();
        assert_eq!(f3.projective_points(2).len(), 4);
        assert_eq!(f3.projective_points(3).len(), 13);
    }

    #[test]
    fn dimension_formula_and_zassenhaus() {
        let f = Field::new(3).unwrap();
        let pts = f.projective_points(3);
        for a in pts.iter().step_by(2) {
            for b in pts.iter().step_by(3) {
                for c in pts.iter().step_by(5) {
                    let u = f.span(3, vec![a.clone(), b.clone()]);
                    let w = f.span(3, vec![c.clone(), b.clone()]);
                    let meet = f.intersection(&u, &w);
                    let join = f.sum(&u, &w);
                    assert_eq!(meet.dim() + join.dim(), u.dim() + w.dim());
                    assert!(f.is_subspace_of(&meet, &u) && f.is_subspace_of(&meet, &w));
                }
            }
        }
    }

    #[test]
    fn canonical_form_is_unique() {
        let f = Field::new(2).unwrap();
        let a = f.span(3, vec![vec![1, 1, 0], vec![0, 1, 1]]);
        let b = f.span(3, vec![vec![1, 0, 1], vec![1, 1, 0]]);
        assert_eq!(a, b);
        assert_eq!(a.dim(), 2);
    }
}
