//! Perfect difference sets mod q²+q+1 and the vectors and matrices built on
//! them.
//!
//! A [`DifferenceVector`] is an ordering of a difference set; the order fixes
//! the flag labels of the associated plane. A [`DifferenceMatrix`] is three
//! such vectors, one per vertex type. [`AffineMap`]s (elements of
//! AGL(1, ℤ/mℤ)) act on all of them componentwise.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, inv_mod, prime_power, zmod_units, GaloisField};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::permgrp::Permutation;

/// Largest q for [`singer_difference_set`].
pub const MAX_SINGER_Q: u64 = 9;
/// Largest q for the exhaustive [`all_difference_sets`] scan.
pub const MAX_ORACLE_Q: u64 = 4;

/// `q² + q + 1`.
pub fn modulus(q: u64) -> u64 {
    q * q + q + 1
}

fn check_q(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidInput(format!("order q = {q} must be at least 2")));
    }
    if q > 1000 {
        return Err(Error::cap("q", q, 1000));
    }
    Ok(())
}

fn check_residues(elements: &[u64], m: u64) -> Result<()> {
    let mut seen = HashSet::new();
    for &x in elements {
        if x >= m {
            return Err(Error::InvalidInput(format!("residue {x} out of range 0..{m}")));
        }
        if !seen.insert(x) {
            return Err(Error::InvalidInput(format!("residue {x} repeated")));
        }
    }
    Ok(())
}

/// Whether every nonzero residue mod q²+q+1 is exactly one ordered difference
/// of `elements`.
pub fn is_difference_set(elements: &[u64], q: u64) -> Result<bool> {
    check_q(q)?;
    let m = modulus(q);
    check_residues(elements, m)?;
    if elements.len() as u64 != q + 1 {
        return Ok(false);
    }
    let mut hits = vec![0u32; m as usize];
    for &a in elements {
        for &b in elements {
            if a != b {
                hits[((a + m - b) % m) as usize] += 1;
            }
        }
    }
    Ok(hits[1..].iter().all(|&h| h == 1))
}

/// A perfect difference set, elements sorted ascending.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DifferenceSet {
    q: u64,
    elements: Vec<u64>,
}

impl DifferenceSet {
    pub fn new(q: u64, mut elements: Vec<u64>) -> Result<DifferenceSet> {
        if !is_difference_set(&elements, q)? {
            return Err(Error::InvalidInput(format!(
                "{elements:?} is not a difference set mod {}",
                modulus(q)
            )));
        }
        elements.sort_unstable();
        Ok(DifferenceSet { q, elements })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> u64 {
        modulus(self.q)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn contains(&self, x: u64) -> bool {
        self.elements.binary_search(&x).is_ok()
    }

    /// The set in ascending order, as a difference vector.
    pub fn sorted_vector(&self) -> DifferenceVector {
        DifferenceVector {
            q: self.q,
            entries: self.elements.clone(),
        }
    }
}

impl fmt::Display for DifferenceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.elements.iter().map(u64::to_string).collect();
        write!(f, "{{{}}} mod {}", items.join(", "), self.modulus())
    }
}

/// An ordering `(d_1, ..., d_{q+1})` of a difference set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DifferenceVector {
    q: u64,
    entries: Vec<u64>,
}

impl DifferenceVector {
    pub fn new(q: u64, entries: Vec<u64>) -> Result<DifferenceVector> {
        if !is_difference_set(&entries, q)? {
            return Err(Error::InvalidInput(format!(
                "{entries:?} is not a difference vector mod {}",
                modulus(q)
            )));
        }
        Ok(DifferenceVector { q, entries })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> u64 {
        modulus(self.q)
    }

    pub fn entries(&self) -> &[u64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn set(&self) -> DifferenceSet {
        let mut elements = self.entries.clone();
        elements.sort_unstable();
        DifferenceSet { q: self.q, elements }
    }

    /// Zero-based label index of the entry `d`.
    pub fn index_of(&self, d: u64) -> Option<usize> {
        self.entries.iter().position(|&x| x == d)
    }

    /// Reorders rows: entry `i` of the result is entry `sigma(i)` of `self`.
    pub fn permute_rows(&self, sigma: &Permutation) -> DifferenceVector {
        DifferenceVector {
            q: self.q,
            entries: (0..self.len()).map(|i| self.entries[sigma.apply(i)]).collect(),
        }
    }
}

/// An affine map `x ↦ a x + b` of ℤ/mℤ with `a` a unit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AffineMap {
    pub a: u64,
    pub b: u64,
    pub m: u64,
}

impl AffineMap {
    pub fn new(a: u64, b: u64, m: u64) -> Result<AffineMap> {
        if m == 0 || gcd(a % m, m) != 1 {
            return Err(Error::InvalidInput(format!("{a} is not a unit mod {m}")));
        }
        Ok(AffineMap { a: a % m, b: b % m, m })
    }

    pub fn identity(m: u64) -> AffineMap {
        AffineMap { a: 1 % m, b: 0, m }
    }

    pub fn apply(&self, x: u64) -> u64 {
        ((self.a as u128 * x as u128 + self.b as u128) % self.m as u128) as u64
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        assert_eq!(self.m, other.m);
        AffineMap {
            a: self.a * other.a % self.m,
            b: self.apply(other.b),
            m: self.m,
        }
    }

    pub fn inverse(&self) -> AffineMap {
        let a_inv = inv_mod(self.a, self.m).expect("affine maps have unit slope");
        AffineMap {
            a: a_inv,
            b: (self.m - a_inv * self.b % self.m) % self.m,
            m: self.m,
        }
    }

    /// Image of a residue set, sorted.
    pub fn apply_set(&self, xs: &[u64]) -> Vec<u64> {
        let mut out: Vec<u64> = xs.iter().map(|&x| self.apply(x)).collect();
        out.sort_unstable();
        out
    }

    /// For a map stabilizing the set of `v`, the induced permutation `s` of
    /// label indices, `self(v[j]) = v[s(j)]`.
    pub fn label_permutation(&self, v: &DifferenceVector) -> Option<Permutation> {
        let images: Option<Vec<usize>> = v
            .entries()
            .iter()
            .map(|&d| v.index_of(self.apply(d)))
            .collect();
        Permutation::from_images(images?).ok()
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x -> {}x + {} (mod {})", self.a, self.b, self.m)
    }
}

/// Componentwise action of AGL(1, ℤ/mℤ) on a difference vector.
pub fn agl_apply(g: &AffineMap, v: &DifferenceVector) -> Result<DifferenceVector> {
    if g.m != v.modulus() {
        return Err(Error::ModulusMismatch(g.m, v.modulus()));
    }
    Ok(DifferenceVector {
        q: v.q,
        entries: v.entries.iter().map(|&d| g.apply(d)).collect(),
    })
}

/// All of AGL(1, ℤ/mℤ), slopes ascending then offsets ascending.
pub fn agl_group(m: u64) -> Vec<AffineMap> {
    zmod_units(m)
        .into_iter()
        .flat_map(|a| (0..m).map(move |b| AffineMap { a, b, m }))
        .collect()
}

/// Every `g ∈ AGL(1, ℤ/mℤ)` with `g(D) = D`, by a scan over all `m·φ(m)` maps.
pub fn set_stabilizer_in_agl(d: &DifferenceSet) -> Vec<AffineMap> {
    agl_group(d.modulus())
        .into_iter()
        .filter(|g| g.apply_set(d.elements()) == d.elements())
        .collect()
}

/// First map in [`agl_group`] order carrying the residue set `from` onto `to`.
pub fn find_agl_map(from: &[u64], to: &DifferenceSet) -> Option<AffineMap> {
    agl_group(to.modulus())
        .into_iter()
        .find(|g| g.apply_set(from) == to.elements())
}

/// The AGL orbit of `d`, sorted and deduplicated.
pub fn agl_orbit(d: &DifferenceSet) -> Vec<DifferenceSet> {
    let mut orbit: Vec<DifferenceSet> = agl_group(d.modulus())
        .into_iter()
        .map(|g| DifferenceSet {
            q: d.q,
            elements: g.apply_set(d.elements()),
        })
        .collect();
    orbit.sort_unstable();
    orbit.dedup();
    orbit
}

/// Singer's construction: with `w` primitive in GF(q³), the exponents
/// `i mod q²+q+1` for which `w^i` lies in the GF(q)-span of `{1, w}`.
pub fn singer_difference_set(q: u64) -> Result<DifferenceSet> {
    let (p, eta) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
    if q > MAX_SINGER_Q {
        return Err(Error::cap("q", q, MAX_SINGER_Q));
    }
    let big = GaloisField::new(p, 3 * eta)?;
    let w = big.primitive();
    let subfield: Vec<_> = big.elements().filter(|&x| big.pow(x, q) == x).collect();
    debug_assert_eq!(subfield.len() as u64, q);
    let plane: HashSet<_> = subfield
        .iter()
        .flat_map(|&a| subfield.iter().map(move |&b| (a, b)))
        .map(|(a, b)| big.add(a, big.mul(b, w)))
        .collect();
    let m = modulus(q);
    let mut power = big.one();
    let mut elements = Vec::new();
    for i in 0..m {
        if plane.contains(&power) {
            elements.push(i);
        }
        power = big.mul(power, w);
    }
    DifferenceSet::new(q, elements)
}

/// Lexicographically smallest member of the AGL orbit of the Singer set; the
/// fixed reference set used for normalization.
pub fn canonical_singer(q: u64) -> Result<DifferenceSet> {
    let d = singer_difference_set(q)?;
    Ok(agl_orbit(&d).into_iter().next().expect("orbit contains d"))
}

/// Steps `c` (ascending indices into `0..n`) to the next combination in
/// lexicographic order.
fn next_combination(c: &mut [u64], n: u64) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - (k - i) as u64 {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Every (q+1)-subset of ℤ/mℤ that is a difference set, ascending. The scan is
/// partitioned by smallest element.
pub fn all_difference_sets(q: u64, exec: Exec) -> Result<Vec<DifferenceSet>> {
    check_q(q)?;
    if q > MAX_ORACLE_Q {
        return Err(Error::cap("q", q, MAX_ORACLE_Q));
    }
    let m = modulus(q);
    let k = (q + 1) as usize;
    let parts = exec::map_range(exec, (m as usize + 1).saturating_sub(k), |first| {
        let first = first as u64;
        let mut c: Vec<u64> = (first..first + k as u64).collect();
        let mut found = Vec::new();
        loop {
            if c[0] != first {
                break;
            }
            if is_difference_set(&c, q).unwrap_or(false) {
                found.push(DifferenceSet {
                    q,
                    elements: c.clone(),
                });
            }
            if !next_combination(&mut c, m) {
                break;
            }
        }
        found
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Three difference vectors with a common parameter; column `t` is the plane
/// seen at vertices of type `t`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DifferenceMatrix {
    q: u64,
    columns: [DifferenceVector; 3],
}

/// On-disk shape of a difference matrix.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    q: u64,
    modulus: u64,
    columns: Vec<Vec<u64>>,
}

impl DifferenceMatrix {
    pub fn new(columns: [DifferenceVector; 3]) -> Result<DifferenceMatrix> {
        let q = columns[0].q;
        if columns.iter().any(|c| c.q != q) {
            return Err(Error::InvalidInput("columns have different parameters".into()));
        }
        Ok(DifferenceMatrix { q, columns })
    }

    pub fn from_entries(q: u64, columns: [Vec<u64>; 3]) -> Result<DifferenceMatrix> {
        let [a, b, c] = columns;
        DifferenceMatrix::new([
            DifferenceVector::new(q, a)?,
            DifferenceVector::new(q, b)?,
            DifferenceVector::new(q, c)?,
        ])
    }

    /// All three columns equal to `v`.
    pub fn constant(v: &DifferenceVector) -> DifferenceMatrix {
        DifferenceMatrix {
            q: v.q,
            columns: [v.clone(), v.clone(), v.clone()],
        }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn modulus(&self) -> u64 {
        modulus(self.q)
    }

    pub fn column(&self, t: usize) -> &DifferenceVector {
        &self.columns[t]
    }

    pub fn columns(&self) -> &[DifferenceVector; 3] {
        &self.columns
    }

    /// Simultaneous row permutation of all three columns.
    pub fn permute_rows(&self, sigma: &Permutation) -> DifferenceMatrix {
        DifferenceMatrix {
            q: self.q,
            columns: self.columns.clone().map(|c| c.permute_rows(sigma)),
        }
    }

    /// Applies `maps[t]` componentwise to column `t`.
    pub fn apply_agl(&self, maps: [&AffineMap; 3]) -> Result<DifferenceMatrix> {
        Ok(DifferenceMatrix {
            q: self.q,
            columns: [
                agl_apply(maps[0], &self.columns[0])?,
                agl_apply(maps[1], &self.columns[1])?,
                agl_apply(maps[2], &self.columns[2])?,
            ],
        })
    }

    pub fn to_text(&self) -> String {
        let file = MatrixFile {
            q: self.q,
            modulus: self.modulus(),
            columns: self.columns.iter().map(|c| c.entries.clone()).collect(),
        };
        let mut s = serde_json::to_string(&file).expect("matrix serializes");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<DifferenceMatrix> {
        let file: MatrixFile = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("line {} column {}: {e}", e.line(), e.column()))
        })?;
        check_q(file.q).map_err(|e| Error::Parse(format!("field `q`: {e}")))?;
        if file.modulus != modulus(file.q) {
            return Err(Error::Parse(format!(
                "field `modulus`: expected {} for q = {}, got {}",
                modulus(file.q),
                file.q,
                file.modulus
            )));
        }
        let columns: [Vec<u64>; 3] = file.columns.try_into().map_err(|c: Vec<Vec<u64>>| {
            Error::Parse(format!("field `columns`: expected 3 columns, got {}", c.len()))
        })?;
        let mut vectors = Vec::with_capacity(3);
        for (t, col) in columns.into_iter().enumerate() {
            if col.len() as u64 != file.q + 1 {
                return Err(Error::Parse(format!(
                    "field `columns[{t}]`: expected {} entries, got {}",
                    file.q + 1,
                    col.len()
                )));
            }
            vectors.push(
                DifferenceVector::new(file.q, col)
                    .map_err(|e| Error::Parse(format!("field `columns[{t}]`: {e}")))?,
            );
        }
        let [a, b, c]: [DifferenceVector; 3] = vectors.try_into().expect("three columns");
        DifferenceMatrix::new([a, b, c])
    }
}

/// Moves `m` to an equivalent matrix whose three columns equal `d` as sets and
/// whose first column is `d` in ascending order.
///
/// Each column is carried onto `d` by the first AGL map in [`agl_group`]
/// order that does so; the rows are then sorted by the first column.
pub fn normalize_matrix(m: &DifferenceMatrix, d: &DifferenceSet) -> Result<DifferenceMatrix> {
    if m.q != d.q {
        return Err(Error::InvalidInput(format!(
            "matrix has q = {} but reference set has q = {}",
            m.q, d.q
        )));
    }
    let mut maps = Vec::with_capacity(3);
    for (t, col) in m.columns.iter().enumerate() {
        maps.push(find_agl_map(col.entries(), d).ok_or(Error::NotEquivalent { column: t })?);
    }
    let moved = m.apply_agl([&maps[0], &maps[1], &maps[2]])?;
    let first = moved.column(0).entries();
    let mut order: Vec<usize> = (0..first.len()).collect();
    order.sort_by_key(|&i| first[i]);
    let sigma = Permutation::from_images(order).expect("argsort is a permutation");
    Ok(moved.permute_rows(&sigma))
}
