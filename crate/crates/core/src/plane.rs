//! Labelled projective planes of cyclic difference vectors.
//!
//! For a difference vector `v = (d_1, ..., d_{q+1})` mod `m = q²+q+1`, the
//! plane has points and lines `0..m`; line `x` carries the points `x + d_j`
//! and the flag `(x, x + d_j)` has label `j`. Labels are stored 1-based as
//! `1..=q+1`; label permutations act on the zero-based indices `0..=q`.
//!
//! Collineations are found by backtracking over point images with join/meet
//! propagation: once two points of a line are mapped the line's image is
//! forced, and dually. Every search here is exhaustive.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::diffsets::DifferenceVector;
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::permgrp::{PermGroup, Permutation};

/// Largest order for the full collineation searches.
pub const MAX_SEARCH_Q: u64 = 5;

const NONE: usize = usize::MAX;

/// A finite point-line incidence structure with optional flag labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncidenceStructure {
    num_points: usize,
    line_points: Vec<Vec<usize>>,
    point_lines: Vec<Vec<usize>>,
    /// `num_lines × num_points`, 0 where not incident, otherwise the label
    /// (or 1 for unlabelled structures).
    table: Vec<u8>,
    labelled: bool,
}

impl IncidenceStructure {
    /// Structure with the given lines, each a list of `(point, label)`.
    pub fn labelled(num_points: usize, lines: Vec<Vec<(usize, u8)>>) -> Result<IncidenceStructure> {
        Self::build(num_points, lines, true)
    }

    pub fn unlabelled(num_points: usize, lines: Vec<Vec<usize>>) -> Result<IncidenceStructure> {
        let lines = lines
            .into_iter()
            .map(|l| l.into_iter().map(|p| (p, 1)).collect())
            .collect();
        Self::build(num_points, lines, false)
    }

    /// Lines `x ↦ {x + d : d ∈ elements}` over ℤ/mℤ, for any residue list.
    pub fn cyclic(elements: &[u64], m: u64) -> Result<IncidenceStructure> {
        let lines = (0..m)
            .map(|x| elements.iter().map(|&d| ((x + d) % m) as usize).collect())
            .collect();
        Self::unlabelled(m as usize, lines)
    }

    fn build(num_points: usize, lines: Vec<Vec<(usize, u8)>>, labelled: bool) -> Result<IncidenceStructure> {
        let num_lines = lines.len();
        let mut table = vec![0u8; num_lines * num_points];
        let mut point_lines = vec![Vec::new(); num_points];
        let mut line_points = Vec::with_capacity(num_lines);
        for (l, pts) in lines.into_iter().enumerate() {
            let mut on = Vec::with_capacity(pts.len());
            for (p, label) in pts {
                if p >= num_points {
                    return Err(Error::InvalidInput(format!("point {p} out of range on line {l}")));
                }
                if label == 0 {
                    return Err(Error::InvalidInput(format!("flag ({l}, {p}) has label 0")));
                }
                if table[l * num_points + p] != 0 {
                    return Err(Error::InvalidInput(format!("point {p} repeated on line {l}")));
                }
                table[l * num_points + p] = label;
                point_lines[p].push(l);
                on.push(p);
            }
            on.sort_unstable();
            line_points.push(on);
        }
        Ok(IncidenceStructure {
            num_points,
            line_points,
            point_lines,
            table,
            labelled,
        })
    }

    pub fn num_points(&self) -> usize {
        self.num_points
    }

    pub fn num_lines(&self) -> usize {
        self.line_points.len()
    }

    pub fn num_flags(&self) -> usize {
        self.line_points.iter().map(Vec::len).sum()
    }

    pub fn is_labelled(&self) -> bool {
        self.labelled
    }

    pub fn incident(&self, line: usize, point: usize) -> bool {
        self.table[line * self.num_points + point] != 0
    }

    /// Label of the flag `(line, point)`, if incident and labelled.
    pub fn label(&self, line: usize, point: usize) -> Option<u8> {
        let l = self.table[line * self.num_points + point];
        (self.labelled && l != 0).then_some(l)
    }

    pub fn points_on(&self, line: usize) -> &[usize] {
        &self.line_points[line]
    }

    pub fn lines_through(&self, point: usize) -> &[usize] {
        &self.point_lines[point]
    }

    /// All flags `(line, point)` in ascending order.
    pub fn flags(&self) -> Vec<(usize, usize)> {
        (0..self.num_lines())
            .flat_map(|l| self.line_points[l].iter().map(move |&p| (l, p)))
            .collect()
    }

    /// Lines through both points.
    pub fn common_lines(&self, p1: usize, p2: usize) -> Vec<usize> {
        self.point_lines[p1]
            .iter()
            .copied()
            .filter(|&l| self.incident(l, p2))
            .collect()
    }

    /// Points on both lines.
    pub fn common_points(&self, l1: usize, l2: usize) -> Vec<usize> {
        self.line_points[l1]
            .iter()
            .copied()
            .filter(|&p| self.incident(l2, p))
            .collect()
    }

    /// One text line per geometric line: `line: point:label ...`, points
    /// ascending.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (l, pts) in self.line_points.iter().enumerate() {
            write!(out, "{l}:").unwrap();
            for &p in pts {
                write!(out, " {p}:{}", self.table[l * self.num_points + p]).unwrap();
            }
            out.push('\n');
        }
        out
    }

    /// Parses [`IncidenceStructure::to_text`] output into a labelled structure.
    pub fn from_text(text: &str) -> Result<IncidenceStructure> {
        let mut lines = Vec::new();
        let mut max_point = 0;
        for (row, raw) in text.lines().enumerate() {
            let err = |msg: String| Error::Parse(format!("line {}: {msg}", row + 1));
            let (head, rest) = raw.split_once(':').ok_or_else(|| err("missing ':'".into()))?;
            let id: usize = head.trim().parse().map_err(|e| err(format!("bad line id: {e}")))?;
            if id != row {
                return Err(err(format!("expected line id {row}, got {id}")));
            }
            let mut pts = Vec::new();
            for tok in rest.split_whitespace() {
                let (p, label) = tok
                    .split_once(':')
                    .ok_or_else(|| err(format!("bad pair {tok:?}")))?;
                let p: usize = p.parse().map_err(|e| err(format!("bad point {p:?}: {e}")))?;
                let label: u8 = label.parse().map_err(|e| err(format!("bad label {label:?}: {e}")))?;
                max_point = max_point.max(p + 1);
                pts.push((p, label));
            }
            lines.push(pts);
        }
        let n = max_point.max(lines.len());
        IncidenceStructure::labelled(n, lines)
    }
}

/// Projective-plane axioms: two points on exactly one line, two lines through
/// exactly one point, and a quadrangle exists.
pub fn verify_plane_axioms(s: &IncidenceStructure) -> bool {
    let (np, nl) = (s.num_points(), s.num_lines());
    let points_ok = (0..np).all(|a| (a + 1..np).all(|b| s.common_lines(a, b).len() == 1));
    let lines_ok = (0..nl).all(|a| (a + 1..nl).all(|b| s.common_points(a, b).len() == 1));
    points_ok && lines_ok && find_quadrangle(s).is_some()
}

/// First four points, in lexicographic order, no three on a line.
pub fn find_quadrangle(s: &IncidenceStructure) -> Option<[usize; 4]> {
    let collinear = |a: usize, b: usize, c: usize| {
        s.common_lines(a, b).iter().any(|&l| s.incident(l, c))
    };
    let n = s.num_points();
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if collinear(a, b, c) {
                    continue;
                }
                for d in c + 1..n {
                    if !collinear(a, b, d) && !collinear(a, c, d) && !collinear(b, c, d) {
                        return Some([a, b, c, d]);
                    }
                }
            }
        }
    }
    None
}

/// The plane `Π_v` of a difference vector with its flag labelling.
#[derive(Clone, Debug)]
pub struct LabelledPlane {
    vector: DifferenceVector,
    inc: IncidenceStructure,
}

impl LabelledPlane {
    pub fn from_vector(v: &DifferenceVector) -> LabelledPlane {
        let m = v.modulus();
        let lines = (0..m)
            .map(|x| {
                v.entries()
                    .iter()
                    .enumerate()
                    .map(|(j, &d)| (((x + d) % m) as usize, (j + 1) as u8))
                    .collect()
            })
            .collect();
        let inc = IncidenceStructure::labelled(m as usize, lines)
            .expect("difference vector entries are distinct residues");
        LabelledPlane {
            vector: v.clone(),
            inc,
        }
    }

    pub fn q(&self) -> u64 {
        self.vector.q()
    }

    pub fn modulus(&self) -> u64 {
        self.vector.modulus()
    }

    pub fn vector(&self) -> &DifferenceVector {
        &self.vector
    }

    pub fn incidence(&self) -> &IncidenceStructure {
        &self.inc
    }

    /// The line through `point` whose flag with it has label `label` (1-based).
    pub fn line_with_label(&self, point: usize, label: usize) -> usize {
        let m = self.modulus();
        ((point as u64 + m - self.vector.entries()[label - 1]) % m) as usize
    }

    /// The point on `line` whose flag with it has label `label` (1-based).
    pub fn point_with_label(&self, line: usize, label: usize) -> usize {
        ((line as u64 + self.vector.entries()[label - 1]) % self.modulus()) as usize
    }
}

/// A pair of point and line permutations preserving incidence.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Collineation {
    pub points: Vec<usize>,
    pub lines: Vec<usize>,
    pub preserves_labels: bool,
}

impl Collineation {
    pub fn identity(np: usize, nl: usize) -> Collineation {
        Collineation {
            points: (0..np).collect(),
            lines: (0..nl).collect(),
            preserves_labels: true,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.points.iter().enumerate().all(|(i, &x)| i == x)
            && self.lines.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Collineation) -> Collineation {
        Collineation {
            points: other.points.iter().map(|&p| self.points[p]).collect(),
            lines: other.lines.iter().map(|&l| self.lines[l]).collect(),
            preserves_labels: self.preserves_labels && other.preserves_labels,
        }
    }

    pub fn inverse(&self) -> Collineation {
        let mut points = vec![0; self.points.len()];
        let mut lines = vec![0; self.lines.len()];
        for (i, &x) in self.points.iter().enumerate() {
            points[x] = i;
        }
        for (i, &x) in self.lines.iter().enumerate() {
            lines[x] = i;
        }
        Collineation {
            points,
            lines,
            preserves_labels: self.preserves_labels,
        }
    }

    /// Checks bijectivity and incidence preservation against `s`, and label
    /// preservation when the flag is set.
    pub fn is_valid_for(&self, s: &IncidenceStructure) -> bool {
        let bij = |v: &[usize], n: usize| {
            let mut seen = vec![false; n];
            v.len() == n && v.iter().all(|&x| x < n && !std::mem::replace(&mut seen[x], true))
        };
        if !bij(&self.points, s.num_points()) || !bij(&self.lines, s.num_lines()) {
            return false;
        }
        s.flags().into_iter().all(|(l, p)| {
            let (l2, p2) = (self.lines[l], self.points[p]);
            s.incident(l2, p2) && (!self.preserves_labels || s.label(l2, p2) == s.label(l, p))
        })
    }

    fn labels_preserved(&self, s: &IncidenceStructure) -> bool {
        s.flags()
            .into_iter()
            .all(|(l, p)| s.label(self.lines[l], self.points[p]) == s.label(l, p))
    }
}

/// Translation `x ↦ x + 1` on points and lines.
pub fn singer_shift(plane: &LabelledPlane) -> Collineation {
    let m = plane.modulus() as usize;
    let shift: Vec<usize> = (0..m).map(|x| (x + 1) % m).collect();
    Collineation {
        points: shift.clone(),
        lines: shift,
        preserves_labels: true,
    }
}

/// A correlation: points go to lines and lines to points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Duality {
    pub point_to_line: Vec<usize>,
    pub line_to_point: Vec<usize>,
}

impl Duality {
    /// Whether incident `(line, point)` always maps to an incident
    /// `(point_to_line[point], line_to_point[line])` with the same label.
    pub fn preserves_labels(&self, s: &IncidenceStructure) -> bool {
        s.flags().into_iter().all(|(l, p)| {
            let (l2, p2) = (self.point_to_line[p], self.line_to_point[l]);
            s.incident(l2, p2) && s.label(l2, p2) == s.label(l, p)
        })
    }
}

/// Negation duality: point `x ↦` line `−x`, line `x ↦` point `−x`.
pub fn dual_map(plane: &LabelledPlane) -> Duality {
    let m = plane.modulus() as usize;
    let neg: Vec<usize> = (0..m).map(|x| (m - x) % m).collect();
    Duality {
        point_to_line: neg.clone(),
        line_to_point: neg,
    }
}

/// Search state for the collineation backtracking. `NONE` marks unmapped.
#[derive(Clone)]
struct State {
    pt: Vec<usize>,
    ln: Vec<usize>,
    pt_used: Vec<bool>,
    ln_used: Vec<bool>,
}

enum Item {
    Point(usize),
    Line(usize),
}

struct Search<'a> {
    s: &'a IncidenceStructure,
    labels_only: bool,
    join: Vec<usize>,
    meet: Vec<usize>,
}

impl<'a> Search<'a> {
    fn new(s: &'a IncidenceStructure, labels_only: bool) -> Search<'a> {
        let (np, nl) = (s.num_points(), s.num_lines());
        let mut join = vec![NONE; np * np];
        for l in 0..nl {
            for &a in s.points_on(l) {
                for &b in s.points_on(l) {
                    join[a * np + b] = l;
                }
            }
        }
        let mut meet = vec![NONE; nl * nl];
        for p in 0..np {
            for &a in s.lines_through(p) {
                for &b in s.lines_through(p) {
                    meet[a * nl + b] = p;
                }
            }
        }
        Search {
            s,
            labels_only,
            join,
            meet,
        }
    }

    fn flag_ok(&self, l: usize, p: usize, l2: usize, p2: usize) -> bool {
        self.s.incident(l2, p2) && (!self.labels_only || self.s.label(l2, p2) == self.s.label(l, p))
    }

    fn set_point(&self, st: &mut State, p: usize, t: usize, queue: &mut Vec<Item>) -> bool {
        if st.pt[p] != NONE {
            return st.pt[p] == t;
        }
        if t == NONE || st.pt_used[t] {
            return false;
        }
        st.pt[p] = t;
        st.pt_used[t] = true;
        queue.push(Item::Point(p));
        true
    }

    fn set_line(&self, st: &mut State, l: usize, t: usize, queue: &mut Vec<Item>) -> bool {
        if st.ln[l] != NONE {
            return st.ln[l] == t;
        }
        if t == NONE || st.ln_used[t] {
            return false;
        }
        st.ln[l] = t;
        st.ln_used[t] = true;
        queue.push(Item::Line(l));
        true
    }

    fn propagate(&self, st: &mut State, mut queue: Vec<Item>) -> bool {
        let (np, nl) = (self.s.num_points(), self.s.num_lines());
        while let Some(item) = queue.pop() {
            match item {
                Item::Point(p) => {
                    let t = st.pt[p];
                    for &l in self.s.lines_through(p) {
                        if st.ln[l] != NONE {
                            if !self.flag_ok(l, p, st.ln[l], t) {
                                return false;
                            }
                            continue;
                        }
                        if let Some(&r) = self.s.points_on(l).iter().find(|&&r| r != p && st.pt[r] != NONE) {
                            let img = self.join[t * np + st.pt[r]];
                            if !self.set_line(st, l, img, &mut queue) {
                                return false;
                            }
                        }
                    }
                }
                Item::Line(l) => {
                    let t = st.ln[l];
                    for &p in self.s.points_on(l) {
                        if st.pt[p] != NONE {
                            if !self.flag_ok(l, p, t, st.pt[p]) {
                                return false;
                            }
                            continue;
                        }
                        if let Some(&k) = self.s.lines_through(p).iter().find(|&&k| k != l && st.ln[k] != NONE) {
                            let img = self.meet[t * nl + st.ln[k]];
                            if !self.set_point(st, p, img, &mut queue) {
                                return false;
                            }
                        }
                    }
                }
            }
        }
        true
    }

    fn initial(&self, fixed_points: &[(usize, usize)], fixed_lines: &[(usize, usize)]) -> Option<State> {
        let (np, nl) = (self.s.num_points(), self.s.num_lines());
        let mut st = State {
            pt: vec![NONE; np],
            ln: vec![NONE; nl],
            pt_used: vec![false; np],
            ln_used: vec![false; nl],
        };
        let mut queue = Vec::new();
        for &(p, t) in fixed_points {
            if !self.set_point(&mut st, p, t, &mut queue) {
                return None;
            }
        }
        for &(l, t) in fixed_lines {
            if !self.set_line(&mut st, l, t, &mut queue) {
                return None;
            }
        }
        self.propagate(&mut st, queue).then_some(st)
    }

    /// Children of `st`: one per unused image of the first unmapped point.
    fn branch(&self, st: &State) -> Option<(usize, Vec<usize>)> {
        let p = st.pt.iter().position(|&x| x == NONE)?;
        let targets = (0..self.s.num_points()).filter(|&t| !st.pt_used[t]).collect();
        Some((p, targets))
    }

    fn extend(&self, st: &State, p: usize, t: usize) -> Option<State> {
        let mut child = st.clone();
        let mut queue = Vec::new();
        (self.set_point(&mut child, p, t, &mut queue) && self.propagate(&mut child, queue)).then_some(child)
    }

    fn finish(&self, st: &State) -> Option<Collineation> {
        // every line holds at least two points, so lines are mapped once points are
        if st.ln.contains(&NONE) {
            return None;
        }
        let mut c = Collineation {
            points: st.pt.clone(),
            lines: st.ln.clone(),
            preserves_labels: false,
        };
        c.preserves_labels = self.s.is_labelled() && c.labels_preserved(self.s);
        Some(c)
    }

    fn run(&self, st: State, out: &mut Vec<Collineation>) {
        match self.branch(&st) {
            None => out.extend(self.finish(&st)),
            Some((p, targets)) => {
                for t in targets {
                    if let Some(child) = self.extend(&st, p, t) {
                        self.run(child, out);
                    }
                }
            }
        }
    }
}

/// All collineations of a projective plane `s` that extend the given point and
/// line assignments, sorted. With `labels_only`, only label-preserving ones.
/// The top-level branch is split across the executor.
pub fn search_collineations(
    s: &IncidenceStructure,
    fixed_points: &[(usize, usize)],
    fixed_lines: &[(usize, usize)],
    labels_only: bool,
    exec: Exec,
) -> Vec<Collineation> {
    let search = Search::new(s, labels_only);
    let Some(root) = search.initial(fixed_points, fixed_lines) else {
        return Vec::new();
    };
    let mut out: Vec<Collineation> = match search.branch(&root) {
        None => search.finish(&root).into_iter().collect(),
        Some((p, targets)) => exec::map_slice(exec, &targets, |&t| {
            let mut found = Vec::new();
            if let Some(child) = search.extend(&root, p, t) {
                search.run(child, &mut found);
            }
            found
        })
        .into_iter()
        .flatten()
        .collect(),
    };
    out.sort_unstable();
    out
}

fn check_search_cap(plane: &LabelledPlane) -> Result<()> {
    if plane.q() > MAX_SEARCH_Q {
        return Err(Error::cap("q", plane.q(), MAX_SEARCH_Q));
    }
    Ok(())
}

/// Collineations fixing the point `x0`, optionally only the label-preserving
/// ones.
pub fn collineations_fixing(
    plane: &LabelledPlane,
    x0: usize,
    labels_only: bool,
    exec: Exec,
) -> Result<Vec<Collineation>> {
    check_search_cap(plane)?;
    Ok(search_collineations(plane.incidence(), &[(x0, x0)], &[], labels_only, exec))
}

/// Label permutation induced on the pencil of `x0` by a collineation fixing
/// it: the flag with label `j` goes to the flag with label `π(j)`.
pub fn pencil_permutation(s: &IncidenceStructure, c: &Collineation, x0: usize) -> Permutation {
    let mut images = vec![0; s.lines_through(x0).len()];
    for &l in s.lines_through(x0) {
        let from = s.label(l, x0).expect("labelled flag") as usize - 1;
        let to = s.label(c.lines[l], c.points[x0]).expect("labelled flag") as usize - 1;
        images[from] = to;
    }
    Permutation::from_images(images).expect("collineations permute a pencil")
}

/// Label permutation induced on the points of `l0` by a collineation fixing it.
pub fn line_pencil_permutation(s: &IncidenceStructure, c: &Collineation, l0: usize) -> Permutation {
    let mut images = vec![0; s.points_on(l0).len()];
    for &p in s.points_on(l0) {
        let from = s.label(l0, p).expect("labelled flag") as usize - 1;
        let to = s.label(c.lines[l0], c.points[p]).expect("labelled flag") as usize - 1;
        images[from] = to;
    }
    Permutation::from_images(images).expect("collineations permute a line")
}

fn group_of(n: usize, perms: Vec<Permutation>) -> Result<PermGroup> {
    let mut perms = perms;
    perms.sort_unstable();
    perms.dedup();
    PermGroup::from_elements(n, &perms)
}

/// The subgroup of Sym(q+1) induced on the labels of the flags through `x0`
/// by the full stabilizer of `x0`.
pub fn pencil_action(plane: &LabelledPlane, x0: usize, exec: Exec) -> Result<PermGroup> {
    let stab = collineations_fixing(plane, x0, false, exec)?;
    let s = plane.incidence();
    group_of(
        plane.q() as usize + 1,
        stab.iter().map(|c| pencil_permutation(s, c, x0)).collect(),
    )
}

/// As [`pencil_action`], for the flags on the line `l0`.
pub fn line_pencil_action(plane: &LabelledPlane, l0: usize, exec: Exec) -> Result<PermGroup> {
    check_search_cap(plane)?;
    let s = plane.incidence();
    let stab = search_collineations(s, &[], &[(l0, l0)], false, exec);
    group_of(
        plane.q() as usize + 1,
        stab.iter().map(|c| line_pencil_permutation(s, c, l0)).collect(),
    )
}

/// A collineation fixing every point of `axis` and every line through `center`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Elation {
    pub collineation: Collineation,
    pub center: usize,
    pub axis: usize,
}

/// Every elation with the given center and axis of a projective plane.
pub fn elations_in(s: &IncidenceStructure, center: usize, axis: usize, exec: Exec) -> Result<Vec<Elation>> {
    if !s.incident(axis, center) {
        return Err(Error::NotIncident {
            point: center,
            line: axis,
        });
    }
    let fixed_points: Vec<(usize, usize)> = s.points_on(axis).iter().map(|&p| (p, p)).collect();
    let fixed_lines: Vec<(usize, usize)> = s.lines_through(center).iter().map(|&l| (l, l)).collect();
    Ok(search_collineations(s, &fixed_points, &fixed_lines, false, exec)
        .into_iter()
        .map(|collineation| Elation {
            collineation,
            center,
            axis,
        })
        .collect())
}

pub fn elations_with(plane: &LabelledPlane, center: usize, axis: usize, exec: Exec) -> Result<Vec<Elation>> {
    check_search_cap(plane)?;
    elations_in(plane.incidence(), center, axis, exec)
}

/// Cycle type of a nontrivial elation on the points of `line` other than the
/// center, as `(number of cycles, common length)`.
pub fn elation_cycle_profile(s: &IncidenceStructure, e: &Elation, line: usize) -> Result<(usize, usize)> {
    if e.collineation.is_identity() {
        return Err(Error::InvalidInput("trivial elation has no cycle profile".into()));
    }
    if line == e.axis || !s.incident(line, e.center) {
        return Err(Error::InvalidInput(format!(
            "line {line} must pass through the center {} and differ from the axis {}",
            e.center, e.axis
        )));
    }
    let pts: Vec<usize> = s.points_on(line).iter().copied().filter(|&p| p != e.center).collect();
    let mut seen = BTreeMap::new();
    let mut lengths = Vec::new();
    for &start in &pts {
        if seen.contains_key(&start) {
            continue;
        }
        let mut len = 0;
        let mut x = start;
        loop {
            seen.insert(x, ());
            len += 1;
            x = e.collineation.points[x];
            if !s.incident(line, x) {
                return Err(Error::InvalidInput(format!("collineation does not fix line {line}")));
            }
            if x == start {
                break;
            }
        }
        lengths.push(len);
    }
    let c = lengths[0];
    if lengths.iter().any(|&l| l != c) {
        return Err(Error::InvalidInput(format!("unequal cycle lengths {lengths:?}")));
    }
    Ok((lengths.len(), c))
}

/// A plane is Desarguesian iff it is Moufang: for every flag the elation group
/// with that center and axis has order q.
pub fn is_desarguesian_structure(s: &IncidenceStructure, exec: Exec) -> Result<bool> {
    if !verify_plane_axioms(s) {
        return Err(Error::InvalidInput("incidence structure is not a projective plane".into()));
    }
    let q = s.points_on(0).len() - 1;
    if q as u64 > MAX_SEARCH_Q {
        return Err(Error::cap("q", q as u64, MAX_SEARCH_Q));
    }
    let flags = s.flags();
    let orders = exec::map_slice(exec, &flags, |&(l, p)| {
        elations_in(s, p, l, Exec::Sequential).map(|e| e.len())
    });
    for o in orders {
        if o? != q {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn is_desarguesian(plane: &LabelledPlane, exec: Exec) -> Result<bool> {
    check_search_cap(plane)?;
    is_desarguesian_structure(plane.incidence(), exec)
}

/// A label-preserving isomorphism `a → b` as `(point map, line map)`, found by
/// fixing the image of line 0 and propagating along labels.
pub fn labelled_isomorphism(a: &IncidenceStructure, b: &IncidenceStructure) -> Option<(Vec<usize>, Vec<usize>)> {
    if a.num_points() != b.num_points() || a.num_lines() != b.num_lines() || a.num_flags() != b.num_flags() {
        return None;
    }
    if a.num_lines() == 0 {
        return Some((Vec::new(), Vec::new()));
    }
    (0..b.num_lines()).find_map(|target| propagate_labels(a, b, target))
}

fn propagate_labels(a: &IncidenceStructure, b: &IncidenceStructure, target: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut pmap = vec![NONE; a.num_points()];
    let mut lmap = vec![NONE; a.num_lines()];
    // (is_line, index)
    let mut queue = vec![(true, 0usize)];
    lmap[0] = target;
    while let Some((is_line, x)) = queue.pop() {
        if is_line {
            let y = lmap[x];
            for &p in a.points_on(x) {
                let label = a.label(x, p);
                let image = *b.points_on(y).iter().find(|&&p2| b.label(y, p2) == label)?;
                if pmap[p] == NONE {
                    pmap[p] = image;
                    queue.push((false, p));
                } else if pmap[p] != image {
                    return None;
                }
            }
        } else {
            let y = pmap[x];
            for &l in a.lines_through(x) {
                let label = a.label(l, x);
                let image = *b.lines_through(y).iter().find(|&&l2| b.label(l2, y) == label)?;
                if lmap[l] == NONE {
                    lmap[l] = image;
                    queue.push((true, l));
                } else if lmap[l] != image {
                    return None;
                }
            }
        }
    }
    let bijective = |m: &[usize], n: usize| {
        let mut seen = vec![false; n];
        m.iter().all(|&x| x != NONE && !std::mem::replace(&mut seen[x], true))
    };
    if !bijective(&pmap, b.num_points()) || !bijective(&lmap, b.num_lines()) {
        return None;
    }
    let preserved = a
        .flags()
        .into_iter()
        .all(|(l, p)| b.incident(lmap[l], pmap[p]) && b.label(lmap[l], pmap[p]) == a.label(l, p));
    preserved.then_some((pmap, lmap))
}
