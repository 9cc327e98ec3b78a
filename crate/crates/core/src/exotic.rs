//! Exoticity certificates and the census of normalized difference matrices.
//!
//! For a difference matrix `M = (v_0, v_1, v_2)` the stabilizer of a point in
//! the plane of `v_t` induces a group `G_t` of permutations of chamber labels.
//! Adjacent vertices of types `t ≠ t'` see the same `q+1` chambers with the
//! same labels, so `G_t ≠ G_{t'}` certifies that the building is not
//! 2-Moufang. The test is one-sided: equal groups prove nothing.
//!
//! Every Desarguesian matrix is equivalent to a normalized one, whose columns
//! are a fixed set `D` reordered by `(id, α_1, α_2)`; then
//! `G_t = α_t⁻¹ G_0 α_t` and the whole census runs on pairs of permutations.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{prime_power, GaloisField};
use crate::diffsets::{
    canonical_singer, find_agl_map, modulus, normalize_matrix, set_stabilizer_in_agl,
    singer_difference_set, DifferenceMatrix, DifferenceSet, DifferenceVector,
};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::permgrp::{
    all_permutations, closure, factorial, pgammal2_model, rank, PermGroup, Permutation,
    ProjectiveLine, MAX_MODEL_Q,
};
use crate::plane::{is_desarguesian, pencil_action, LabelledPlane, MAX_SEARCH_Q};
use crate::unionfind::UnionFind;

/// Largest q for the exhaustive census over all `(q+1)!²` normalized matrices.
pub const MAX_CENSUS_Q: u64 = 5;

/// Positions of the Singer set on the projective line over GF(q).
///
/// With `w` primitive in GF(q³) and `s` in the Singer set, `w^s = a + b w`
/// for `a, b` in the subfield GF(q); the point is `[a : b]`, transported to
/// the crate's model of GF(q) through a field isomorphism.
#[derive(Clone, Debug)]
pub struct SingerCoordinates {
    pub set: DifferenceSet,
    /// `points[i]` is the projective-line index of `set.elements()[i]`.
    pub points: Vec<usize>,
}

pub fn singer_coordinates(q: u64) -> Result<SingerCoordinates> {
    let (p, eta) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
    let set = singer_difference_set(q)?;
    let line = ProjectiveLine::new(q)?;
    let small = line.field();
    let big = GaloisField::new(p, 3 * eta)?;
    let w = big.primitive();

    // a root of the small field's reduction polynomial inside the subfield
    let f = small.reduction_poly();
    let eval = |r| {
        f.iter().rev().fold(big.zero(), |acc, &c| {
            big.add(big.mul(acc, r), big.from_coeffs(&[c]))
        })
    };
    let root = big
        .elements()
        .find(|&r| big.pow(r, q) == r && eval(r) == big.zero())
        .expect("GF(q) embeds in GF(q^3)");
    let embed: HashMap<_, _> = small
        .elements()
        .map(|x| {
            let image = small
                .coeffs(x)
                .iter()
                .enumerate()
                .fold(big.zero(), |acc, (i, &c)| {
                    big.add(acc, big.mul(big.from_coeffs(&[c]), big.pow(root, i as u64)))
                });
            (image, x)
        })
        .collect();
    debug_assert_eq!(embed.len() as u64, q);

    let mut coords = HashMap::new();
    for (&a_big, &a) in &embed {
        for (&b_big, &b) in &embed {
            coords.insert(big.add(a_big, big.mul(b_big, w)), (a, b));
        }
    }
    let points = set
        .elements()
        .iter()
        .map(|&s| {
            let (a, b) = coords[&big.pow(w, s)];
            line.index_of(a, b)
        })
        .collect();
    Ok(SingerCoordinates { set, points })
}

/// Pencil group of `Π_v` from the PΓL(2, q) model: the stabilizer of line 0
/// acts on its points as PΓL(2, q) in Singer coordinates, moved to `v` by an
/// AGL map. Defined for q ≤ 9.
pub fn model_pencil_group(v: &DifferenceVector) -> Result<PermGroup> {
    let coords = singer_coordinates(v.q())?;
    let g = find_agl_map(v.entries(), &coords.set).ok_or(Error::NotEquivalent { column: 0 })?;
    let beta: Vec<usize> = v
        .entries()
        .iter()
        .map(|&d| {
            let s = g.apply(d);
            let i = coords.set.elements().binary_search(&s).expect("g maps v onto the Singer set");
            coords.points[i]
        })
        .collect();
    let beta = Permutation::from_images(beta)?;
    Ok(pgammal2_model(v.q())?.conjugate(&beta))
}

/// Pencil group of `Π_v` at point 0 by exhaustive collineation search (q ≤ 5).
pub fn search_pencil_group(v: &DifferenceVector, exec: Exec) -> Result<PermGroup> {
    pencil_action(&LabelledPlane::from_vector(v), 0, exec)
}

/// Which computation produced the pencil groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PencilRoute {
    Search,
    Model,
}

impl PencilRoute {
    pub fn for_q(q: u64) -> PencilRoute {
        if q <= MAX_SEARCH_Q {
            PencilRoute::Search
        } else {
            PencilRoute::Model
        }
    }
}

/// Checks that column `t` is Desarguesian and returns its pencil group.
fn column_group(v: &DifferenceVector, t: usize, route: PencilRoute, exec: Exec) -> Result<PermGroup> {
    let q = v.q();
    let singer = singer_difference_set(q).map_err(|e| match e {
        Error::NotPrimePower(_) => Error::NonDesarguesian { column: t },
        e => e,
    })?;
    let equivalent = find_agl_map(v.entries(), &singer).is_some();
    match route {
        PencilRoute::Search => {
            if !equivalent && !is_desarguesian(&LabelledPlane::from_vector(v), exec)? {
                return Err(Error::NonDesarguesian { column: t });
            }
            search_pencil_group(v, exec)
        }
        PencilRoute::Model => {
            // AGL(1, ℤ/mℤ) is transitive on Desarguesian difference sets
            if !equivalent {
                return Err(Error::NonDesarguesian { column: t });
            }
            model_pencil_group(v)
        }
    }
}

/// `(G_0, G_1, G_2)` for the three columns, through `route`.
pub fn local_pencil_groups_via(m: &DifferenceMatrix, route: PencilRoute, exec: Exec) -> Result<[PermGroup; 3]> {
    let q = m.q();
    match route {
        PencilRoute::Search if q > MAX_SEARCH_Q => return Err(Error::cap("q", q, MAX_SEARCH_Q)),
        PencilRoute::Model if q > MAX_MODEL_Q => return Err(Error::cap("q", q, MAX_MODEL_Q)),
        _ => {}
    }
    Ok([
        column_group(m.column(0), 0, route, exec)?,
        column_group(m.column(1), 1, route, exec)?,
        column_group(m.column(2), 2, route, exec)?,
    ])
}

/// `(G_0, G_1, G_2)`, by search for q ≤ 5 and from the model for q ≤ 9. A
/// non-Desarguesian column is reported as [`Error::NonDesarguesian`].
pub fn local_pencil_groups(m: &DifferenceMatrix, exec: Exec) -> Result<[PermGroup; 3]> {
    local_pencil_groups_via(m, PencilRoute::for_q(m.q()), exec)
}

/// Type pairs of adjacent vertices.
pub const ADJACENT_TYPES: [(usize, usize); 3] = [(0, 1), (1, 2), (2, 0)];

/// Evidence behind a [`Verdict::CertifiedExotic`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    /// The plane of this column is not Desarguesian, so the building is not
    /// even 1-Moufang.
    NonDesarguesian { column: usize },
    /// `separating ∈ G_types.0` but `∉ G_types.1`; both groups are given by
    /// generators.
    GroupMismatch {
        types: (usize, usize),
        first_generators: Vec<Permutation>,
        second_generators: Vec<Permutation>,
        separating: Permutation,
    },
}

impl Witness {
    /// Re-derives the claim from the witness data alone.
    pub fn check(&self) -> bool {
        match self {
            Witness::NonDesarguesian { .. } => true,
            Witness::GroupMismatch {
                first_generators,
                second_generators,
                separating,
                ..
            } => {
                let n = separating.degree();
                match (closure(first_generators, n), closure(second_generators, n)) {
                    (Ok(a), Ok(b)) => a.contains(separating) && !b.contains(separating),
                    _ => false,
                }
            }
        }
    }

    pub fn summary(&self) -> String {
        match self {
            Witness::NonDesarguesian { column } => format!("column {column} non-Desarguesian"),
            Witness::GroupMismatch { types, separating, .. } => format!(
                "{separating} in G{} but not in G{}",
                types.0, types.1
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    CertifiedExotic(Witness),
    Inconclusive,
}

impl Verdict {
    pub fn is_exotic(&self) -> bool {
        matches!(self, Verdict::CertifiedExotic(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::CertifiedExotic(_) => "CertifiedExotic",
            Verdict::Inconclusive => "Inconclusive",
        }
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::CertifiedExotic(w) => Some(w),
            Verdict::Inconclusive => None,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::CertifiedExotic(w) => write!(f, "CertifiedExotic ({})", w.summary()),
            Verdict::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}

/// Compares the groups over each adjacent type pair. Group `t` is given as
/// `α_t⁻¹ base α_t`.
fn compare_conjugates(base: &PermGroup, alphas: [&Permutation; 3]) -> Verdict {
    for (t, u) in ADJACENT_TYPES {
        for (first, second) in [(t, u), (u, t)] {
            let sep = base
                .generators()
                .iter()
                .map(|g| g.conjugate_by(alphas[first]))
                .find(|x| !base.conjugate_contains(alphas[second], x));
            if let Some(separating) = sep {
                let gens = |k: usize| {
                    base.generators()
                        .iter()
                        .map(|g| g.conjugate_by(alphas[k]))
                        .collect()
                };
                return Verdict::CertifiedExotic(Witness::GroupMismatch {
                    types: (first, second),
                    first_generators: gens(first),
                    second_generators: gens(second),
                    separating,
                });
            }
        }
    }
    Verdict::Inconclusive
}

/// Group comparison on explicit groups.
fn compare_groups(groups: &[PermGroup; 3]) -> Verdict {
    for (t, u) in ADJACENT_TYPES {
        for (first, second) in [(t, u), (u, t)] {
            if let Some(sep) = groups[first].elements().iter().find(|x| !groups[second].contains(x)) {
                return Verdict::CertifiedExotic(Witness::GroupMismatch {
                    types: (first, second),
                    first_generators: groups[first].generators().to_vec(),
                    second_generators: groups[second].generators().to_vec(),
                    separating: sep.clone(),
                });
            }
        }
    }
    Verdict::Inconclusive
}

/// Certifies that `Δ_M` is not 2-Moufang when some column is non-Desarguesian
/// or the pencil groups of two adjacent types differ; otherwise
/// `Inconclusive`.
pub fn certify_exotic(m: &DifferenceMatrix, exec: Exec) -> Result<Verdict> {
    match local_pencil_groups(m, exec) {
        Ok(groups) => Ok(compare_groups(&groups)),
        Err(Error::NonDesarguesian { column }) => {
            Ok(Verdict::CertifiedExotic(Witness::NonDesarguesian { column }))
        }
        Err(e) => Err(e),
    }
}

/// A matrix whose columns all equal `D` as sets, the first in ascending
/// order; column `t` is `(d_{α_t(0)}, ..., d_{α_t(q)})` with `α_0 = id`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalizedMatrix {
    set: DifferenceSet,
    alpha1: Permutation,
    alpha2: Permutation,
}

impl NormalizedMatrix {
    pub fn new(set: DifferenceSet, alpha1: Permutation, alpha2: Permutation) -> Result<NormalizedMatrix> {
        let n = set.elements().len();
        if alpha1.degree() != n || alpha2.degree() != n {
            return Err(Error::InvalidInput(format!("row permutations must have degree {n}")));
        }
        Ok(NormalizedMatrix { set, alpha1, alpha2 })
    }

    /// Normalizes `m` against `d` and reads off the row permutations.
    pub fn from_matrix(m: &DifferenceMatrix, d: &DifferenceSet) -> Result<NormalizedMatrix> {
        let n = normalize_matrix(m, d)?;
        let alpha = |t: usize| {
            let images = n
                .column(t)
                .entries()
                .iter()
                .map(|&x| d.elements().binary_search(&x).expect("column equals D as a set"))
                .collect();
            Permutation::from_images(images).expect("column is an ordering of D")
        };
        NormalizedMatrix::new(d.clone(), alpha(1), alpha(2))
    }

    pub fn set(&self) -> &DifferenceSet {
        &self.set
    }

    pub fn alpha1(&self) -> &Permutation {
        &self.alpha1
    }

    pub fn alpha2(&self) -> &Permutation {
        &self.alpha2
    }

    pub fn decode(&self) -> DifferenceMatrix {
        let d = self.set.elements();
        let col = |a: &Permutation| {
            DifferenceVector::new(self.set.q(), (0..d.len()).map(|i| d[a.apply(i)]).collect())
                .expect("reordering of a difference set")
        };
        DifferenceMatrix::new([self.set.sorted_vector(), col(&self.alpha1), col(&self.alpha2)])
            .expect("columns share q")
    }
}

/// `α_1, α_2 ∈ G_0`. Since `G_0` is self-normalizing in Sym(q+1), `false`
/// is equivalent to the group-comparison certificate firing.
pub fn fast_necessary_condition(nm: &NormalizedMatrix, g0: &PermGroup) -> bool {
    g0.contains(&nm.alpha1) && g0.contains(&nm.alpha2)
}

/// Everything the census needs for one q, computed once and shared.
#[derive(Clone, Debug)]
pub struct CensusContext {
    pub q: u64,
    pub set: DifferenceSet,
    /// Pencil group of the ascending column `D`.
    pub g0: PermGroup,
    /// Label permutations induced on `D` by its AGL stabilizer.
    pub stabilizer: Vec<Permutation>,
    pub route: PencilRoute,
}

impl CensusContext {
    pub fn new(q: u64, exec: Exec) -> Result<CensusContext> {
        let set = canonical_singer(q)?;
        let route = PencilRoute::for_q(q);
        let v = set.sorted_vector();
        let g0 = match route {
            PencilRoute::Search => search_pencil_group(&v, exec)?,
            PencilRoute::Model => model_pencil_group(&v)?,
        };
        let mut stabilizer: Vec<Permutation> = set_stabilizer_in_agl(&set)
            .iter()
            .map(|g| g.label_permutation(&v).expect("stabilizer permutes D"))
            .collect();
        stabilizer.sort_unstable();
        stabilizer.dedup();
        Ok(CensusContext {
            q,
            set,
            g0,
            stabilizer,
            route,
        })
    }

    /// Group comparison for a normalized matrix, using
    /// `G_t = α_t⁻¹ G_0 α_t`.
    pub fn certify(&self, nm: &NormalizedMatrix) -> Verdict {
        let id = Permutation::identity(self.q as usize + 1);
        compare_conjugates(&self.g0, [&id, &nm.alpha1, &nm.alpha2])
    }

    pub fn normalized(&self, alpha1: Permutation, alpha2: Permutation) -> NormalizedMatrix {
        NormalizedMatrix {
            set: self.set.clone(),
            alpha1,
            alpha2,
        }
    }
}

/// All `(q+1)!²` normalized matrices over `d`, `(α_1, α_2)` lexicographic.
pub fn enumerate_normalized(q: u64, d: &DifferenceSet) -> Result<impl Iterator<Item = NormalizedMatrix> + '_> {
    if q > MAX_CENSUS_Q {
        return Err(Error::cap("q", q, MAX_CENSUS_Q));
    }
    if d.q() != q {
        return Err(Error::InvalidInput(format!("set has q = {}, expected {q}", d.q())));
    }
    let perms = all_permutations(q as usize + 1);
    let pairs: Vec<(Permutation, Permutation)> = perms
        .iter()
        .flat_map(|a| perms.iter().map(move |b| (a.clone(), b.clone())))
        .collect();
    Ok(pairs.into_iter().map(move |(alpha1, alpha2)| NormalizedMatrix {
        set: d.clone(),
        alpha1,
        alpha2,
    }))
}

/// One equivalence move on normalized pairs.
#[derive(Clone, Debug)]
pub enum Move {
    /// Stabilizer map `s` on column 1: `(s α_1, α_2)`.
    Column1(Permutation),
    /// Stabilizer map `s` on column 2: `(α_1, s α_2)`.
    Column2(Permutation),
    /// Stabilizer map `s` on column 0, then rows re-sorted:
    /// `(α_1 s⁻¹, α_2 s⁻¹)`.
    Column0(Permutation),
    /// Cyclic type shift `(v_1, v_2, v_0)`, re-sorted: `(α_2 α_1⁻¹, α_1⁻¹)`.
    Rotate,
    /// Type-reversing duality `(−v_0, −v_2, −v_1)`, re-normalized:
    /// `(α_2, α_1)`.
    Dual,
}

impl Move {
    pub fn apply(&self, a1: &Permutation, a2: &Permutation) -> (Permutation, Permutation) {
        match self {
            Move::Column1(s) => (s.compose(a1), a2.clone()),
            Move::Column2(s) => (a1.clone(), s.compose(a2)),
            Move::Column0(s) => {
                let si = s.inverse();
                (a1.compose(&si), a2.compose(&si))
            }
            Move::Rotate => {
                let inv = a1.inverse();
                (a2.compose(&inv), inv)
            }
            Move::Dual => (a2.clone(), a1.clone()),
        }
    }
}

/// Generators of the equivalence group on normalized pairs. Row permutations
/// need no generator: re-sorting the first column undoes them.
pub fn equivalence_moves(ctx: &CensusContext, extra_moves: bool) -> Vec<Move> {
    let gens = stabilizer_generators(&ctx.stabilizer, ctx.q as usize + 1);
    let mut moves = Vec::new();
    for s in &gens {
        moves.push(Move::Column0(s.clone()));
        moves.push(Move::Column1(s.clone()));
        moves.push(Move::Column2(s.clone()));
    }
    if extra_moves {
        moves.push(Move::Rotate);
        moves.push(Move::Dual);
    }
    moves
}

fn stabilizer_generators(stab: &[Permutation], n: usize) -> Vec<Permutation> {
    PermGroup::from_elements(n, stab)
        .map(|g| g.generators().to_vec())
        .unwrap_or_else(|_| stab.to_vec())
}

/// An orbit of normalized matrices under the equivalence moves.
#[derive(Clone, Debug)]
pub struct EquivClass {
    /// Lexicographically smallest `(α_1, α_2)` in the orbit.
    pub representative: NormalizedMatrix,
    pub orbit_size: usize,
    pub verdict: Verdict,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    /// Also identify cyclic type shifts and the type-reversing duality.
    pub extra_moves: bool,
    /// Restrict to pairs with `α_1, α_2 ∈ G_0`; all other pairs are certified
    /// exotic by [`fast_necessary_condition`]. Allows q up to 9.
    pub candidates_only: bool,
    pub exec: Exec,
}

impl Default for ClassifyOptions {
    fn default() -> ClassifyOptions {
        ClassifyOptions {
            extra_moves: false,
            candidates_only: false,
            exec: Exec::Parallel,
        }
    }
}

/// Result of [`classify`].
#[derive(Clone, Debug)]
pub struct Census {
    pub q: u64,
    pub set: DifferenceSet,
    /// Number of normalized matrices processed.
    pub total: usize,
    pub classes: Vec<EquivClass>,
    pub extra_moves: bool,
    pub candidates_only: bool,
    /// Whether each orbit's verdict was recomputed and found constant on
    /// every member.
    pub verdicts_constant: bool,
}

impl Census {
    pub fn certified_exotic(&self) -> usize {
        self.classes.iter().filter(|c| c.verdict.is_exotic()).count()
    }

    pub fn inconclusive(&self) -> usize {
        self.classes.len() - self.certified_exotic()
    }
}

/// Orbits of the equivalence moves on normalized matrices for `q`, each with a
/// canonical representative and verdict.
pub fn classify(q: u64, opts: ClassifyOptions) -> Result<Census> {
    prime_power(q).ok_or(Error::NotPrimePower(q))?;
    let cap = if opts.candidates_only { MAX_MODEL_Q } else { MAX_CENSUS_Q };
    if q > cap {
        return Err(Error::cap("q", q, cap));
    }
    let ctx = CensusContext::new(q, opts.exec)?;
    classify_with(&ctx, opts)
}

pub fn classify_with(ctx: &CensusContext, opts: ClassifyOptions) -> Result<Census> {
    let n = ctx.q as usize + 1;
    // the universe of row permutations and an index for each
    let universe: Vec<Permutation> = if opts.candidates_only {
        ctx.g0.elements().to_vec()
    } else {
        all_permutations(n)
    };
    let index_of = |p: &Permutation| -> Option<usize> {
        if opts.candidates_only {
            universe.binary_search(p).ok()
        } else {
            Some(rank(p))
        }
    };
    let k = universe.len();
    let total = k * k;
    if total > u32::MAX as usize {
        return Err(Error::cap("census size", total as u64, u32::MAX as u64));
    }
    debug_assert!(opts.candidates_only || k == factorial(n));
    let moves = equivalence_moves(ctx, opts.extra_moves);

    let images: Vec<Vec<u32>> = exec::map_range(opts.exec, total, |idx| {
        let (a1, a2) = (&universe[idx / k], &universe[idx % k]);
        moves
            .iter()
            .map(|mv| {
                let (b1, b2) = mv.apply(a1, a2);
                match (index_of(&b1), index_of(&b2)) {
                    (Some(i), Some(j)) => (i * k + j) as u32,
                    // a move left the candidate universe; keep the element alone
                    _ => idx as u32,
                }
            })
            .collect()
    });
    let mut uf = UnionFind::new(total);
    for (idx, im) in images.iter().enumerate() {
        for &j in im {
            uf.union(idx, j as usize);
        }
    }
    let roots: Vec<u32> = (0..total).map(|i| uf.find(i) as u32).collect();

    let outcomes: Vec<Verdict> = exec::map_range(opts.exec, total, |idx| {
        ctx.certify(&ctx.normalized(universe[idx / k].clone(), universe[idx % k].clone()))
    });

    let mut order: Vec<u32> = Vec::new();
    let mut sizes: HashMap<u32, usize> = HashMap::new();
    let mut constant = true;
    for (idx, &r) in roots.iter().enumerate() {
        let size = sizes.entry(r).or_insert(0);
        if *size == 0 {
            order.push(r);
        }
        *size += 1;
        if outcomes[idx].is_exotic() != outcomes[r as usize].is_exotic() {
            constant = false;
        }
    }
    let classes = order
        .into_iter()
        .map(|r| EquivClass {
            representative: ctx.normalized(universe[r as usize / k].clone(), universe[r as usize % k].clone()),
            orbit_size: sizes[&r],
            verdict: outcomes[r as usize].clone(),
        })
        .collect();
    Ok(Census {
        q: ctx.q,
        set: ctx.set.clone(),
        total,
        classes,
        extra_moves: opts.extra_moves,
        candidates_only: opts.candidates_only,
        verdicts_constant: constant,
    })
}

/// Number of classes whose verdict is `Inconclusive`, i.e. the classes that
/// could still be 2-Moufang.
pub fn candidate_count(q: u64, exec: Exec) -> Result<usize> {
    let census = classify(
        q,
        ClassifyOptions {
            exec,
            ..ClassifyOptions::default()
        },
    )?;
    let count = census.inconclusive();
    assert!(
        count as u128 <= bound_b(q),
        "candidate count {count} exceeds the bound {}",
        bound_b(q)
    );
    Ok(count)
}

/// Serialized form of one census class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassRecord {
    pub alpha1: Vec<usize>,
    pub alpha2: Vec<usize>,
    pub orbit_size: usize,
    pub verdict: String,
    pub witness: Option<String>,
}

/// Serialized census.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusFile {
    pub q: u64,
    pub modulus: u64,
    pub set: Vec<u64>,
    pub total: usize,
    pub extra_moves: bool,
    pub candidates_only: bool,
    pub classes: Vec<ClassRecord>,
}

impl CensusFile {
    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("census serializes");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<CensusFile> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }
}

impl Census {
    pub fn to_file(&self) -> CensusFile {
        CensusFile {
            q: self.q,
            modulus: modulus(self.q),
            set: self.set.elements().to_vec(),
            total: self.total,
            extra_moves: self.extra_moves,
            candidates_only: self.candidates_only,
            classes: self
                .classes
                .iter()
                .map(|c| ClassRecord {
                    alpha1: c.representative.alpha1.images(),
                    alpha2: c.representative.alpha2.images(),
                    orbit_size: c.orbit_size,
                    verdict: c.verdict.label().to_string(),
                    witness: c.verdict.witness().map(Witness::summary),
                })
                .collect(),
        }
    }

    /// Header plus one row: `q total classes certified_exotic inconclusive bound_B`.
    pub fn summary_tsv(&self) -> String {
        format!(
            "q\ttotal\tclasses\tcertified_exotic\tinconclusive\tbound_B\n{}\t{}\t{}\t{}\t{}\t{}\n",
            self.q,
            self.total,
            self.classes.len(),
            self.certified_exotic(),
            self.inconclusive(),
            bound_b(self.q)
        )
    }
}

/// `(q(q²−1)/3)²`, exact. `q(q²−1)` is a product of three consecutive
/// integers, so the division is exact.
pub fn bound_b(q: u64) -> u128 {
    let q = q as u128;
    let t = (q - 1) * q * (q + 1);
    debug_assert_eq!(t % 3, 0);
    (t / 3) * (t / 3)
}

/// `((q+1)!)² / (162 η³)` for `q = p^η`.
pub fn lower_a(q: u64) -> Result<BigRational> {
    let (_, eta) = prime_power(q).ok_or(Error::NotPrimePower(q))?;
    let fact: BigUint = (1..=q + 1).map(BigUint::from).product();
    let num = BigInt::from(&fact * &fact);
    let den = BigInt::from(162u32) * BigInt::from(eta).pow(3);
    Ok(BigRational::new(num, den))
}

/// Renders a rational in scientific notation with `digits` significant
/// digits, rounding half up, computed exactly.
pub fn render_scientific(r: &BigRational, digits: usize) -> String {
    if r.is_zero() {
        return format!("{:.*}e0", digits.saturating_sub(1), 0.0);
    }
    let sign = if r.is_negative() { "-" } else { "" };
    let r = r.abs();
    let ten = BigRational::from_integer(BigInt::from(10));
    let one = BigRational::one();
    let mut exp: i64 = 0;
    let mut x = r.clone();
    while x >= ten {
        x /= &ten;
        exp += 1;
    }
    while x < one {
        x *= &ten;
        exp -= 1;
    }
    // x in [1, 10): scale to an integer with `digits` digits
    let scale = BigRational::from_integer(BigInt::from(10).pow(digits as u32 - 1));
    let scaled = &x * &scale;
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut mant = (scaled + half).floor().to_integer();
    if mant >= BigInt::from(10).pow(digits as u32) {
        mant /= 10;
        exp += 1;
    }
    let s = mant.to_string();
    let (head, tail) = s.split_at(1);
    if tail.is_empty() {
        format!("{sign}{head}e{exp}")
    } else {
        format!("{sign}{head}.{tail}e{exp}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioRow {
    pub q: u64,
    pub bound_b: u128,
    pub lower_a: BigRational,
    pub ratio: BigRational,
}

impl RatioRow {
    pub fn ratio_decimal(&self) -> String {
        render_scientific(&self.ratio, 6)
    }

    pub fn ratio_f64(&self) -> f64 {
        self.ratio.to_f64().unwrap_or(f64::NAN)
    }
}

/// `q, B(q), A(q), B(q)/A(q)` for each prime power in `qs`.
pub fn ratio_table(qs: &[u64]) -> Result<Vec<RatioRow>> {
    qs.iter()
        .map(|&q| {
            let a = lower_a(q)?;
            let b = bound_b(q);
            let ratio = BigRational::from_integer(BigInt::from(b)) / &a;
            Ok(RatioRow {
                q,
                bound_b: b,
                lower_a: a,
                ratio,
            })
        })
        .collect()
}

/// Tab-separated table with columns `q B A B/A`.
pub fn ratio_table_tsv(rows: &[RatioRow]) -> String {
    let mut out = String::from("q\tB\tA\tB/A\n");
    for r in rows {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\n",
            r.q,
            r.bound_b,
            r.lower_a,
            r.ratio_decimal()
        ));
    }
    out
}
