//! Small permutation groups with explicit element sets.
//!
//! Groups here never exceed a few thousand elements (Sym(q+1) for q ≤ 9 is
//! the largest ambient group scanned), so a group is simply its sorted
//! element list plus a hash set of packed images for membership tests.
//! Composition is right-to-left: `a.compose(&b)` maps `i` to `a(b(i))`.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arith::{prime_power, FieldElem, GaloisField};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};

/// Largest degree accepted by [`closure`].
pub const MAX_DEGREE: usize = 12;
/// Largest group order [`closure`] will enumerate.
pub const MAX_ORDER: usize = 1_000_000;
/// Largest degree for the ambient scans over Sym(n).
pub const MAX_SCAN_DEGREE: usize = 10;
/// Largest q for the projective-line models.
pub const MAX_MODEL_Q: u64 = 9;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<u8>);

impl Permutation {
    pub fn identity(n: usize) -> Permutation {
        Permutation((0..n as u8).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Permutation> {
        let n = images.len();
        if n > u8::MAX as usize {
            return Err(Error::cap("permutation degree", n as u64, u8::MAX as u64));
        }
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::InvalidInput(format!(
                    "{images:?} is not a permutation of 0..{n}"
                )));
            }
        }
        Ok(Permutation(images.into_iter().map(|i| i as u8).collect()))
    }

    /// Builds a permutation from disjoint cycles, e.g. `&[&[0, 1], &[2, 3, 4]]`.
    pub fn from_cycles(n: usize, cycles: &[&[usize]]) -> Result<Permutation> {
        let mut images: Vec<usize> = (0..n).collect();
        for cycle in cycles {
            for (k, &i) in cycle.iter().enumerate() {
                if i >= n {
                    return Err(Error::InvalidInput(format!("point {i} out of range")));
                }
                images[i] = cycle[(k + 1) % cycle.len()];
            }
        }
        Permutation::from_images(images)
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn images(&self) -> Vec<usize> {
        self.0.iter().map(|&i| i as usize).collect()
    }

    pub(crate) fn raw(&self) -> &[u8] {
        &self.0
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i == x as usize)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        debug_assert_eq!(self.degree(), other.degree());
        Permutation(other.0.iter().map(|&i| self.0[i as usize]).collect())
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u8; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u8;
        }
        Permutation(inv)
    }

    /// `sigma⁻¹ ∘ self ∘ sigma`.
    pub fn conjugate_by(&self, sigma: &Permutation) -> Permutation {
        sigma.inverse().compose(self).compose(sigma)
    }

    pub fn pow(&self, e: usize) -> Permutation {
        (0..e).fold(Permutation::identity(self.degree()), |acc, _| {
            acc.compose(self)
        })
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut i = self.apply(start);
            while i != start {
                seen[i] = true;
                cycle.push(i);
                i = self.apply(i);
            }
            out.push(cycle);
        }
        out
    }

    /// Cycle lengths, fixed points included, in descending order.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    pub fn order(&self) -> usize {
        self.cycle_type()
            .into_iter()
            .fold(1, |acc, c| acc / crate::arith::gcd(acc as u64, c as u64) as usize * c)
    }

    /// Packs the images four bits apiece; valid for degree ≤ 16.
    pub(crate) fn pack(&self) -> u64 {
        pack(&self.0)
    }
}

pub(crate) fn pack(images: &[u8]) -> u64 {
    images
        .iter()
        .enumerate()
        .fold(0u64, |acc, (i, &x)| acc | (x as u64) << (4 * i))
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Permutation> {
        let inner = s
            .trim()
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("expected [i0 i1 ...], got {s:?}")))?;
        let images = inner
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|e| Error::Parse(format!("bad image {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::from_images(images)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let images = Vec::<usize>::deserialize(d)?;
        Permutation::from_images(images).map_err(serde::de::Error::custom)
    }
}

/// Steps `a` to its lexicographic successor; `false` when `a` was the last.
pub(crate) fn next_permutation(a: &mut [u8]) -> bool {
    let n = a.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

/// Lexicographic rank of a permutation among all of Sym(n).
pub fn rank(p: &Permutation) -> usize {
    let n = p.degree();
    let mut used = vec![false; n];
    let mut r = 0;
    for (k, &x) in p.0.iter().enumerate() {
        let smaller = (0..x as usize).filter(|&y| !used[y]).count();
        r += smaller * factorial(n - 1 - k);
        used[x as usize] = true;
    }
    r
}

/// Inverse of [`rank`].
pub fn unrank(n: usize, mut r: usize) -> Permutation {
    let mut pool: Vec<u8> = (0..n as u8).collect();
    let mut out = Vec::with_capacity(n);
    for k in (0..n).rev() {
        let f = factorial(k);
        out.push(pool.remove(r / f));
        r %= f;
    }
    Permutation(out)
}

/// All of Sym(n) in lexicographic order.
pub fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut cur: Vec<u8> = (0..n as u8).collect();
    let mut out = Vec::with_capacity(factorial(n));
    loop {
        out.push(Permutation(cur.clone()));
        if !next_permutation(&mut cur) {
            return out;
        }
    }
}

/// Finite permutation group stored as its full element list.
#[derive(Clone)]
pub struct PermGroup {
    degree: usize,
    generators: Vec<Permutation>,
    elements: Vec<Permutation>,
    codes: HashSet<u64>,
}

impl fmt::Debug for PermGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermGroup")
            .field("degree", &self.degree)
            .field("order", &self.order())
            .field("generators", &self.generators)
            .finish()
    }
}

impl PartialEq for PermGroup {
    fn eq(&self, other: &PermGroup) -> bool {
        groups_equal(self, other)
    }
}

impl Eq for PermGroup {}

/// Breadth-first product closure of `generators` inside Sym(n).
pub fn closure(generators: &[Permutation], n: usize) -> Result<PermGroup> {
    if n > MAX_DEGREE {
        return Err(Error::cap("degree", n as u64, MAX_DEGREE as u64));
    }
    if let Some(g) = generators.iter().find(|g| g.degree() != n) {
        return Err(Error::InvalidInput(format!(
            "generator {g} does not have degree {n}"
        )));
    }
    let id = Permutation::identity(n);
    let mut codes = HashSet::from([id.pack()]);
    let mut elements = vec![id.clone()];
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = g.compose(&x);
            if codes.insert(y.pack()) {
                if elements.len() >= MAX_ORDER {
                    return Err(Error::cap("group order", elements.len() as u64 + 1, MAX_ORDER as u64));
                }
                elements.push(y.clone());
                queue.push_back(y);
            }
        }
    }
    elements.sort_unstable();
    Ok(PermGroup {
        degree: n,
        generators: generators.to_vec(),
        elements,
        codes,
    })
}

impl PermGroup {
    pub fn trivial(n: usize) -> PermGroup {
        closure(&[], n).expect("trivial group always fits")
    }

    pub fn symmetric(n: usize) -> Result<PermGroup> {
        let mut gens = Vec::new();
        if n >= 2 {
            gens.push(Permutation::from_cycles(n, &[&[0, 1]])?);
            let long: Vec<usize> = (0..n).collect();
            gens.push(Permutation::from_cycles(n, &[&long])?);
        }
        closure(&gens, n)
    }

    /// Group whose elements are exactly `elements`, which must already be
    /// closed under composition. A small generating set is chosen greedily.
    pub fn from_elements(n: usize, elements: &[Permutation]) -> Result<PermGroup> {
        let mut gens: Vec<Permutation> = Vec::new();
        let mut current = PermGroup::trivial(n);
        let mut sorted = elements.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for x in &sorted {
            if !current.contains(x) {
                gens.push(x.clone());
                current = closure(&gens, n)?;
            }
        }
        if current.order() != sorted.len() {
            return Err(Error::InvalidInput(format!(
                "{} permutations do not form a group (closure has order {})",
                sorted.len(),
                current.order()
            )));
        }
        Ok(current)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// Elements in ascending lexicographic order.
    pub fn elements(&self) -> &[Permutation] {
        &self.elements
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        p.degree() == self.degree && self.codes.contains(&p.pack())
    }

    pub(crate) fn contains_raw(&self, images: &[u8]) -> bool {
        self.codes.contains(&pack(images))
    }

    /// Whether `x ∈ sigma⁻¹ G sigma`, without building the conjugate group.
    pub fn conjugate_contains(&self, sigma: &Permutation, x: &Permutation) -> bool {
        self.contains(&sigma.compose(x).compose(&sigma.inverse()))
    }

    /// `sigma⁻¹ G sigma`.
    pub fn conjugate(&self, sigma: &Permutation) -> PermGroup {
        let generators = self.generators.iter().map(|g| g.conjugate_by(sigma)).collect();
        let mut elements: Vec<Permutation> =
            self.elements.iter().map(|g| g.conjugate_by(sigma)).collect();
        elements.sort_unstable();
        let codes = elements.iter().map(Permutation::pack).collect();
        PermGroup {
            degree: self.degree,
            generators,
            elements,
            codes,
        }
    }

    pub fn is_subgroup_of(&self, other: &PermGroup) -> bool {
        self.degree == other.degree && self.generators.iter().all(|g| other.contains(g))
    }

    /// Order together with the sorted multiset of element cycle types; equal
    /// for conjugate groups.
    pub fn fingerprint(&self) -> (usize, Vec<Vec<usize>>) {
        let mut types: Vec<Vec<usize>> = self.elements.iter().map(Permutation::cycle_type).collect();
        types.sort_unstable();
        (self.order(), types)
    }

    /// Whether `sigma⁻¹ g sigma ∈ target` for every generator `g` of `self`.
    fn conjugates_into(&self, sigma: &[u8], sigma_inv: &[u8], target: &PermGroup) -> bool {
        let mut buf = [0u8; 16];
        let n = self.degree;
        self.generators.iter().all(|g| {
            let g = g.raw();
            for i in 0..n {
                buf[i] = sigma_inv[g[sigma[i] as usize] as usize];
            }
            target.contains_raw(&buf[..n])
        })
    }
}

/// Set equality of element lists.
pub fn groups_equal(g: &PermGroup, h: &PermGroup) -> bool {
    g.degree == h.degree && g.order() == h.order() && g.elements == h.elements
}

/// Scans Sym(n) (lexicographically, partitioned by the image of 0) for
/// permutations `sigma` with `sigma⁻¹ G sigma ⊆ target`; returns all of them,
/// ascending, or only the first when `first_only`.
fn scan_conjugators(
    g: &PermGroup,
    target: &PermGroup,
    first_only: bool,
    exec: Exec,
) -> Vec<Permutation> {
    let n = g.degree;
    if n == 0 {
        return vec![Permutation::identity(0)];
    }
    let blocks = exec::map_range(exec, n, |first| {
        let mut cur: Vec<u8> = std::iter::once(first as u8)
            .chain((0..n as u8).filter(|&x| x != first as u8))
            .collect();
        let mut inv = vec![0u8; n];
        let mut found = Vec::new();
        loop {
            for (i, &x) in cur.iter().enumerate() {
                inv[x as usize] = i as u8;
            }
            if g.conjugates_into(&cur, &inv, target) {
                found.push(Permutation(cur.clone()));
                if first_only {
                    break;
                }
            }
            if !next_permutation(&mut cur) || cur[0] != first as u8 {
                break;
            }
        }
        found
    });
    let mut out = Vec::new();
    for block in blocks {
        out.extend(block);
        if first_only && !out.is_empty() {
            out.truncate(1);
            break;
        }
    }
    out
}

/// Searches Sym(n) for `sigma` with `sigma⁻¹ G sigma = H`; the
/// lexicographically first such `sigma` is returned. Groups with different
/// fingerprints are rejected before scanning.
pub fn is_conjugate(g: &PermGroup, h: &PermGroup, exec: Exec) -> Result<Option<Permutation>> {
    if g.degree != h.degree {
        return Ok(None);
    }
    if g.degree > MAX_SCAN_DEGREE {
        return Err(Error::cap("degree", g.degree as u64, MAX_SCAN_DEGREE as u64));
    }
    if g.fingerprint() != h.fingerprint() {
        return Ok(None);
    }
    // equal orders, so inclusion of the conjugate is equality
    Ok(scan_conjugators(g, h, true, exec).into_iter().next())
}

/// `N_{Sym(n)}(G)` by a full scan of Sym(n), rejecting each candidate at the
/// first generator whose conjugate leaves `G`.
pub fn normalizer_in_sym(g: &PermGroup, exec: Exec) -> Result<PermGroup> {
    if g.degree > MAX_SCAN_DEGREE {
        return Err(Error::cap("degree", g.degree as u64, MAX_SCAN_DEGREE as u64));
    }
    let elements = scan_conjugators(g, g, false, exec);
    PermGroup::from_elements(g.degree, &elements)
}

/// The projective line over GF(q): indices `0..q` are field elements in code
/// order, index `q` is ∞.
#[derive(Clone, Debug)]
pub struct ProjectiveLine {
    field: GaloisField,
}

impl ProjectiveLine {
    pub fn new(q: u64) -> Result<ProjectiveLine> {
        if prime_power(q).is_none() {
            return Err(Error::NotPrimePower(q));
        }
        if q > MAX_MODEL_Q {
            return Err(Error::cap("q", q, MAX_MODEL_Q));
        }
        Ok(ProjectiveLine {
            field: GaloisField::of_order(q)?,
        })
    }

    pub fn field(&self) -> &GaloisField {
        &self.field
    }

    pub fn q(&self) -> u64 {
        self.field.order()
    }

    pub fn infinity(&self) -> usize {
        self.q() as usize
    }

    /// Index of the point `[a : b]` (homogeneous coordinates, not both zero),
    /// i.e. `a/b`, or ∞ when `b = 0`.
    pub fn index_of(&self, a: FieldElem, b: FieldElem) -> usize {
        let f = &self.field;
        if b == f.zero() {
            assert_ne!(a, f.zero(), "[0 : 0] is not a projective point");
            self.infinity()
        } else {
            f.mul(a, f.inv(b).unwrap()).code() as usize
        }
    }

    /// `x ↦ (a x + b) / (c x + d)`, requiring `ad − bc ≠ 0`.
    pub fn mobius(&self, a: FieldElem, b: FieldElem, c: FieldElem, d: FieldElem) -> Result<Permutation> {
        let f = &self.field;
        if f.sub(f.mul(a, d), f.mul(b, c)) == f.zero() {
            return Err(Error::InvalidInput("singular fractional-linear map".into()));
        }
        let images = (0..=self.q() as usize)
            .map(|i| {
                let (num, den) = if i == self.infinity() {
                    (a, c)
                } else {
                    let x = FieldElem::from_index(i);
                    (f.add(f.mul(a, x), b), f.add(f.mul(c, x), d))
                };
                self.index_of(num, den)
            })
            .collect();
        Permutation::from_images(images)
    }

    /// The Frobenius `x ↦ x^p`, fixing ∞.
    pub fn frobenius(&self) -> Permutation {
        let f = &self.field;
        let mut images: Vec<usize> = (0..self.q() as usize)
            .map(|i| f.frobenius(FieldElem::from_index(i)).code() as usize)
            .collect();
        images.push(self.infinity());
        Permutation::from_images(images).expect("Frobenius is a bijection")
    }

    pub fn pgl2_generators(&self) -> Vec<Permutation> {
        let f = &self.field;
        let (zero, one, w) = (f.zero(), f.one(), f.primitive());
        vec![
            self.mobius(one, one, zero, one).unwrap(),
            self.mobius(w, zero, zero, one).unwrap(),
            self.mobius(zero, one, one, zero).unwrap(),
        ]
    }
}

/// PGL(2, q) acting on the q+1 points of the projective line.
pub fn pgl2_model(q: u64) -> Result<PermGroup> {
    let line = ProjectiveLine::new(q)?;
    closure(&line.pgl2_generators(), q as usize + 1)
}

/// PΓL(2, q): PGL(2, q) extended by the Frobenius automorphisms.
pub fn pgammal2_model(q: u64) -> Result<PermGroup> {
    let line = ProjectiveLine::new(q)?;
    let mut gens = line.pgl2_generators();
    gens.push(line.frobenius());
    closure(&gens, q as usize + 1)
}
