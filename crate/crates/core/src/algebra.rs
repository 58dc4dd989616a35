//! Prime-field arithmetic and small dense linear algebra over GF(p).
//!
//! Vectors of `GF(p)^d` are enumerated in a fixed order: vector number `i`
//! has coordinates given by the base-`p` digits of `i`, least-significant
//! coordinate first. Linear maps are enumerated the same way, reading the
//! images of the standard basis vectors as successive base-`p^m` digits.

use serde::{Deserialize, Serialize};

use crate::error::{Budget, Error, Result};

const SUPPORTED_PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

/// The prime field GF(p).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Field {
    p: u32,
}

impl Field {
    pub fn new(p: u32) -> Result<Self> {
        if SUPPORTED_PRIMES.contains(&p) {
            Ok(Field { p })
        } else {
            Err(Error::UnsupportedField(p))
        }
    }

    pub fn p(self) -> u32 {
        self.p
    }

    pub fn add(self, a: u32, b: u32) -> u32 {
        (a + b) % self.p
    }

    pub fn sub(self, a: u32, b: u32) -> u32 {
        (a + self.p - b) % self.p
    }

    pub fn neg(self, a: u32) -> u32 {
        (self.p - a) % self.p
    }

    pub fn mul(self, a: u32, b: u32) -> u32 {
        (a * b) % self.p
    }

    /// Multiplicative inverse by Fermat's little theorem.
    pub fn inv(self, a: u32) -> Option<u32> {
        if a.is_multiple_of(self.p) {
            return None;
        }
        let mut acc = 1;
        for _ in 0..self.p - 2 {
            acc = self.mul(acc, a);
        }
        Some(acc)
    }
}

/// The vector space GF(p)^dim with its canonical enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VecSpace {
    pub field: Field,
    pub dim: usize,
}

impl VecSpace {
    pub fn new(p: u32, dim: usize) -> Result<Self> {
        Ok(VecSpace { field: Field::new(p)?, dim })
    }

    pub fn p(&self) -> u32 {
        self.field.p
    }

    /// Number of vectors, `p^dim`, or `None` on `u64` overflow.
    pub fn size(&self) -> Option<u64> {
        (self.p() as u64).checked_pow(self.dim as u32)
    }

    pub fn coords(&self, mut index: u64) -> Vec<u32> {
        let p = self.p() as u64;
        (0..self.dim)
            .map(|_| {
                let c = (index % p) as u32;
                index /= p;
                c
            })
            .collect()
    }

    pub fn index(&self, coords: &[u32]) -> u64 {
        debug_assert_eq!(coords.len(), self.dim);
        coords.iter().rev().fold(0u64, |acc, &c| acc * self.p() as u64 + c as u64)
    }

    pub fn add(&self, a: &[u32], b: &[u32]) -> Vec<u32> {
        a.iter().zip(b).map(|(&x, &y)| self.field.add(x, y)).collect()
    }

    pub fn scale(&self, alpha: u32, a: &[u32]) -> Vec<u32> {
        a.iter().map(|&x| self.field.mul(alpha, x)).collect()
    }

    pub fn zero(&self) -> Vec<u32> {
        vec![0; self.dim]
    }

    pub fn basis_vector(&self, i: usize) -> Vec<u32> {
        let mut v = self.zero();
        v[i] = 1;
        v
    }
}

/// All `p^dim` vectors in canonical order; index 0 is the zero vector.
pub fn enumerate_vectors(space: VecSpace, budget: Budget) -> Result<Vec<Vec<u32>>> {
    let count = budget.check_power(space.p() as u64, space.dim as u64)?;
    Ok((0..count).map(|i| space.coords(i)).collect())
}

/// A linear map stored as a `codomain.dim x domain.dim` matrix.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearMap {
    pub domain: VecSpace,
    pub codomain: VecSpace,
    /// Row-major; `matrix[r][c]` is coordinate `r` of the image of basis vector `c`.
    pub matrix: Vec<Vec<u32>>,
}

impl LinearMap {
    pub fn zero(domain: VecSpace, codomain: VecSpace) -> Self {
        LinearMap { domain, codomain, matrix: vec![vec![0; domain.dim]; codomain.dim] }
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        let f = self.domain.field;
        self.matrix
            .iter()
            .map(|row| row.iter().zip(v).fold(0, |acc, (&m, &x)| f.add(acc, f.mul(m, x))))
            .collect()
    }

    pub fn apply_index(&self, index: u64) -> u64 {
        self.codomain.index(&self.apply(&self.domain.coords(index)))
    }

    /// Images of every domain vector, as codomain symbol indices.
    pub fn value_table(&self) -> Vec<u32> {
        let n = self.domain.size().expect("domain size fits u64");
        (0..n).map(|i| self.apply_index(i) as u32).collect()
    }

    /// Rows `r0..r0+len` of the matrix as a map into `GF(p)^len`.
    pub fn component(&self, r0: usize, len: usize) -> LinearMap {
        LinearMap {
            domain: self.domain,
            codomain: VecSpace { field: self.codomain.field, dim: len },
            matrix: self.matrix[r0..r0 + len].to_vec(),
        }
    }

    /// Columns `c0..c0+len` of the matrix, i.e. the restriction to a block of
    /// domain coordinates.
    pub fn restrict_columns(&self, c0: usize, len: usize) -> LinearMap {
        LinearMap {
            domain: VecSpace { field: self.domain.field, dim: len },
            codomain: self.codomain,
            matrix: self.matrix.iter().map(|row| row[c0..c0 + len].to_vec()).collect(),
        }
    }
}

/// Every linear map `dom -> cod`. The map with index `j` sends basis vector
/// `e_c` to codomain vector number `digit_c(j)` in base `|cod|`.
pub fn enumerate_linear_maps(dom: VecSpace, cod: VecSpace, budget: Budget) -> Result<Vec<LinearMap>> {
    if dom.field != cod.field {
        return Err(Error::FieldMismatch(dom.p(), cod.p()));
    }
    let count = budget.check_power(dom.p() as u64, (dom.dim * cod.dim) as u64)?;
    let cod_size = cod.size().expect("bounded by budget");
    Ok((0..count)
        .map(|mut j| {
            let mut matrix = vec![vec![0; dom.dim]; cod.dim];
            for c in 0..dom.dim {
                let image = cod.coords(j % cod_size);
                j /= cod_size;
                for (r, &x) in image.iter().enumerate() {
                    matrix[r][c] = x;
                }
            }
            LinearMap { domain: dom, codomain: cod, matrix }
        })
        .collect())
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn row_reduce(field: Field, rows: &mut Vec<Vec<u32>>) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        let Some(pr) = (r..rows.len()).find(|&i| rows[i][c] != 0) else { continue };
        rows.swap(r, pr);
        let inv = field.inv(rows[r][c]).unwrap();
        for x in rows[r].iter_mut() {
            *x = field.mul(*x, inv);
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let factor = rows[i][c];
                for j in 0..ncols {
                    let sub = field.mul(factor, rows[r][j]);
                    rows[i][j] = field.sub(rows[i][j], sub);
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    pivots
}

pub fn rank(field: Field, vectors: &[Vec<u32>]) -> usize {
    let mut rows = vectors.to_vec();
    row_reduce(field, &mut rows).len()
}

/// Basis of the span, in reduced echelon form.
pub fn span_basis(field: Field, vectors: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let mut rows = vectors.to_vec();
    row_reduce(field, &mut rows);
    rows
}

/// All vectors in the span of `basis`, as sorted canonical indices of `space`.
pub fn span_indices(space: VecSpace, basis: &[Vec<u32>]) -> Vec<u64> {
    let reduced = span_basis(space.field, basis);
    let choose = VecSpace { field: space.field, dim: reduced.len() };
    let mut out: Vec<u64> = (0..choose.size().expect("span fits u64"))
        .map(|i| {
            let coeffs = choose.coords(i);
            let mut v = space.zero();
            for (alpha, b) in coeffs.iter().zip(&reduced) {
                v = space.add(&v, &space.scale(*alpha, b));
            }
            space.index(&v)
        })
        .collect();
    out.sort_unstable();
    out
}

/// Basis of `{x : Mx = 0}` for a matrix given by rows, each of length `ncols`.
pub fn nullspace(field: Field, rows: &[Vec<u32>], ncols: usize) -> Vec<Vec<u32>> {
    let mut m = rows.to_vec();
    let pivots = row_reduce(field, &mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0; ncols];
            v[fc] = 1;
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = field.neg(m[r][fc]);
            }
            v
        })
        .collect()
}

/// Inverse of a square matrix, if it exists.
pub fn invert(field: Field, m: &[Vec<u32>]) -> Option<Vec<Vec<u32>>> {
    let n = m.len();
    let mut aug: Vec<Vec<u32>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| u32::from(i == j)));
            r
        })
        .collect();
    let pivots = row_reduce(field, &mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// If the set of canonical indices is a subspace of `space`, returns a basis
/// in reduced echelon form.
pub fn subspace_basis(space: VecSpace, members: &[u64]) -> Option<Vec<Vec<u32>>> {
    let vectors: Vec<Vec<u32>> = members.iter().map(|&m| space.coords(m)).collect();
    subspace_basis_of_vectors(space.field, space.dim, &vectors)
}

/// Same as [`subspace_basis`] for explicit coordinate vectors of length `dim`.
/// A finite set `S` is a subspace iff `0 ∈ S` and `|S| = p^rank(S)`.
pub fn subspace_basis_of_vectors(field: Field, dim: usize, members: &[Vec<u32>]) -> Option<Vec<Vec<u32>>> {
    let mut distinct = members.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if !distinct.iter().any(|v| v.iter().all(|&x| x == 0)) {
        return None;
    }
    let basis = span_basis(field, &distinct);
    debug_assert!(basis.iter().all(|b| b.len() == dim));
    let span_size = (field.p() as u128).checked_pow(basis.len() as u32)?;
    (span_size == distinct.len() as u128).then_some(basis)
}

/// A linear map `space -> GF(p)^target_dim` whose kernel is exactly the span
/// of `basis`, requiring only `target_dim >= dim - rank`.
///
/// The basis is extended by the earliest standard vectors outside its span;
/// those complement vectors are sent to the standard basis of the target and
/// the remaining target coordinates are zero.
pub fn quotient_map(space: VecSpace, basis: &[Vec<u32>], target_dim: usize) -> Result<LinearMap> {
    let field = space.field;
    let d = space.dim;
    if rank(field, basis) != basis.len() {
        return Err(Error::DependentBasis);
    }
    let codim = d - basis.len();
    if target_dim < codim {
        return Err(Error::DimensionTooSmall { target: target_dim, required: codim });
    }
    let mut full: Vec<Vec<u32>> = basis.to_vec();
    let mut complement = Vec::new();
    for i in 0..d {
        let e = space.basis_vector(i);
        let mut candidate = full.clone();
        candidate.push(e.clone());
        if rank(field, &candidate) > full.len() {
            full = candidate;
            complement.push(e);
        }
    }
    debug_assert_eq!(full.len(), d);
    // B has the full basis as columns; h = E * B^{-1}.
    let b: Vec<Vec<u32>> = (0..d).map(|r| full.iter().map(|col| col[r]).collect()).collect();
    let b_inv = invert(field, &b).expect("full basis is invertible");
    let codomain = VecSpace { field, dim: target_dim };
    let mut matrix = vec![vec![0; d]; target_dim];
    for t in 0..complement.len() {
        // coordinate of the (basis.len() + t)-th basis vector
        matrix[t] = b_inv[basis.len() + t].clone();
    }
    Ok(LinearMap { domain: space, codomain, matrix })
}

/// A linear map `space -> GF(p)^target_dim` with kernel exactly the span of
/// `basis`. The target must be at least as large as the whole domain.
pub fn kernel_complement_surjection(space: VecSpace, basis: &[Vec<u32>], target_dim: usize) -> Result<LinearMap> {
    if target_dim < space.dim {
        return Err(Error::DimensionTooSmall { target: target_dim, required: space.dim });
    }
    quotient_map(space, basis, target_dim)
}
