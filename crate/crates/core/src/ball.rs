//! Balls of radius 1 and 2 in the labelled building of a difference matrix,
//! glued residue by residue, and the Hjelmslev planes at their centre.
//!
//! The centre `O` has type 0. A vertex of type `t` sees vertices of type
//! `t+1` as points and of type `t+2` as lines, and its residue is `Π_{v_t}`.
//! The radius-2 ball is the union of the closed stars of `O` and of its
//! neighbours: each neighbour's residue is completed to a copy of its plane,
//! and the copies meet along the panels of the first sphere, where chambers
//! are identified by label.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::diffsets::{DifferenceMatrix, DifferenceVector, MAX_SINGER_Q};
use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::permgrp::Permutation;
use crate::plane::{labelled_isomorphism, Collineation, IncidenceStructure, LabelledPlane};
use crate::unionfind::UnionFind;

/// Largest q for a radius-2 ball.
pub const MAX_BALL2_Q: u64 = 3;
/// Largest q for a radius-1 ball.
pub const MAX_BALL1_Q: u64 = MAX_SINGER_Q;
/// The collineation search on level-2 Hjelmslev planes runs only for q = 2.
pub const H2_SEARCH_Q: u64 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: usize,
    #[serde(rename = "type")]
    pub kind: u8,
    pub distance: u8,
}

/// A triangle; `vertices[t]` has type `t`. Labels are 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Chamber {
    pub vertices: [usize; 3],
    pub label: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallComplex {
    pub q: u64,
    pub radius: u8,
    pub columns: [Vec<u64>; 3],
    pub center: usize,
    pub vertices: Vec<Vertex>,
    /// Sorted pairs `a < b`, ascending.
    pub edges: Vec<[usize; 2]>,
    /// Ascending by vertex triple.
    pub chambers: Vec<Chamber>,
}

fn next_type(t: usize, k: usize) -> usize {
    (t + k) % 3
}

/// Where the residue of a vertex of type `t` lives: its plane, and for each
/// local point and line the global vertex.
struct Local {
    plane: LabelledPlane,
    points: Vec<usize>,
    lines: Vec<usize>,
}

const UNSET: usize = usize::MAX;

/// Builds the ball of radius `r` about a type-0 vertex of `Δ_M`.
pub fn build_ball(m: &DifferenceMatrix, r: u8) -> Result<BallComplex> {
    let q = m.q();
    match r {
        1 if q > MAX_BALL1_Q => return Err(Error::cap("q", q, MAX_BALL1_Q)),
        2 if q > MAX_BALL2_Q => return Err(Error::cap("q", q, MAX_BALL2_Q)),
        1 | 2 => {}
        0 => return Err(Error::InvalidInput("radius must be 1 or 2".into())),
        _ => return Err(Error::cap("radius", r as u64, 2)),
    }
    let n = m.modulus() as usize;
    let planes: Vec<LabelledPlane> = m.columns().iter().map(LabelledPlane::from_vector).collect();
    let pi0 = &planes[0];
    // O = 0, point p of Π_{v_0} = 1 + p (type 1), line l = 1 + n + l (type 2)
    let pt = |p: usize| 1 + p;
    let ln = |l: usize| 1 + n + l;

    let mut chambers: Vec<Chamber> = Vec::new();
    for (l, p) in pi0.incidence().flags() {
        let label = pi0.incidence().label(l, p).expect("labelled");
        chambers.push(Chamber {
            vertices: [0, pt(p), ln(l)],
            label,
        });
    }
    let mut kinds = vec![0u8; 1 + 2 * n];
    let mut distance = vec![1u8; 1 + 2 * n];
    distance[0] = 0;
    for x in 0..n {
        kinds[pt(x)] = 1;
        kinds[ln(x)] = 2;
    }

    if r == 2 {
        // tentative ids for everything new; type-0 ones get merged by label
        let mut next = 1 + 2 * n;
        let mut fresh = |kinds: &mut Vec<u8>, distance: &mut Vec<u8>, t: u8| {
            kinds.push(t);
            distance.push(2);
            next += 1;
            next - 1
        };
        let mut locals: Vec<Local> = Vec::with_capacity(2 * n);
        // sphere-1 points, type 1: O is line 0 of Π_{v_1}
        for p in 0..n {
            let plane = planes[1].clone();
            let mut points = vec![UNSET; n];
            let mut lines = vec![UNSET; n];
            lines[0] = 0;
            for &l in pi0.incidence().lines_through(p) {
                let j = pi0.incidence().label(l, p).expect("labelled") as usize;
                points[plane.point_with_label(0, j)] = ln(l);
            }
            for slot in lines.iter_mut().skip(1) {
                *slot = fresh(&mut kinds, &mut distance, 0);
            }
            for slot in points.iter_mut().filter(|s| **s == UNSET) {
                *slot = fresh(&mut kinds, &mut distance, 2);
            }
            locals.push(Local { plane, points, lines });
        }
        // sphere-1 lines, type 2: O is point 0 of Π_{v_2}
        for l in 0..n {
            let plane = planes[2].clone();
            let mut points = vec![UNSET; n];
            let mut lines = vec![UNSET; n];
            points[0] = 0;
            for &p in pi0.incidence().points_on(l) {
                let j = pi0.incidence().label(l, p).expect("labelled") as usize;
                lines[plane.line_with_label(0, j)] = pt(p);
            }
            for slot in points.iter_mut().skip(1) {
                *slot = fresh(&mut kinds, &mut distance, 0);
            }
            for slot in lines.iter_mut().filter(|s| **s == UNSET) {
                *slot = fresh(&mut kinds, &mut distance, 1);
            }
            locals.push(Local { plane, points, lines });
        }

        // glue along each sphere-1 panel (p, l)
        let mut uf = UnionFind::new(next);
        for (l, p) in pi0.incidence().flags() {
            let j0 = pi0.incidence().label(l, p).expect("labelled") as usize;
            let (lp, ll) = (&locals[p], &locals[n + l]);
            let a = lp.plane.point_with_label(0, j0);
            let b = ll.plane.line_with_label(0, j0);
            for j in 1..=m.q() as usize + 1 {
                let x = lp.lines[lp.plane.line_with_label(a, j)];
                let y = ll.points[ll.plane.point_with_label(b, j)];
                let (rx, ry) = (uf.find(x), uf.find(y));
                if rx != ry && (rx == 0 || ry == 0) {
                    return Err(Error::Gluing(
                        pt(p),
                        ln(l),
                        format!("label {j} identifies the centre with another vertex"),
                    ));
                }
                uf.union(x, y);
            }
        }
        // renumber: roots in ascending order
        let mut new_id = vec![UNSET; next];
        let mut count = 0;
        for x in 0..next {
            let r = uf.find(x);
            if r == x {
                new_id[x] = count;
                count += 1;
            }
        }
        let id = |uf: &mut UnionFind, x: usize| new_id[uf.find(x)];
        let mut k2 = vec![0u8; count];
        let mut d2 = vec![0u8; count];
        for x in 0..next {
            let i = id(&mut uf, x);
            k2[i] = kinds[x];
            d2[i] = distance[x];
        }
        for (k, local) in locals.iter().enumerate() {
            let x = if k < n { pt(k) } else { ln(k - n) };
            let points: Vec<usize> = local.points.iter().map(|&v| id(&mut uf, v)).collect();
            let lines: Vec<usize> = local.lines.iter().map(|&v| id(&mut uf, v)).collect();
            let distinct = |v: &[usize]| v.iter().collect::<BTreeSet<_>>().len() == v.len();
            if !distinct(&points) || !distinct(&lines) {
                return Err(Error::Gluing(x, x, "residue collapsed by gluing".into()));
            }
            let inc = local.plane.incidence();
            for (y, z) in inc.flags() {
                let label = inc.label(y, z).expect("labelled");
                // type 1 vertex: lines are type 0, points type 2
                let vertices = if k < n {
                    [lines[y], x, points[z]]
                } else {
                    [points[z], lines[y], x]
                };
                chambers.push(Chamber { vertices, label });
            }
        }
        kinds = k2;
        distance = d2;
    }

    let mut seen: HashMap<[usize; 3], u8> = HashMap::new();
    let mut unique = Vec::new();
    for c in chambers {
        match seen.get(&c.vertices) {
            Some(&label) if label != c.label => {
                return Err(Error::Gluing(
                    c.vertices[1],
                    c.vertices[2],
                    format!("chamber {:?} gets labels {label} and {}", c.vertices, c.label),
                ))
            }
            Some(_) => {}
            None => {
                seen.insert(c.vertices, c.label);
                unique.push(c);
            }
        }
    }
    unique.sort_unstable();
    let mut edges: Vec<[usize; 2]> = unique
        .iter()
        .flat_map(|c| {
            let [a, b, d] = c.vertices;
            [[a.min(b), a.max(b)], [a.min(d), a.max(d)], [b.min(d), b.max(d)]]
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    let vertices = kinds
        .iter()
        .zip(&distance)
        .enumerate()
        .map(|(id, (&kind, &distance))| Vertex { id, kind, distance })
        .collect();
    Ok(BallComplex {
        q,
        radius: r,
        columns: [
            m.column(0).entries().to_vec(),
            m.column(1).entries().to_vec(),
            m.column(2).entries().to_vec(),
        ],
        center: 0,
        vertices,
        edges,
        chambers: unique,
    })
}

impl BallComplex {
    pub fn matrix(&self) -> Result<DifferenceMatrix> {
        DifferenceMatrix::from_entries(self.q, self.columns.clone())
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Chamber indices by panel.
    pub fn panel_index(&self) -> HashMap<[usize; 2], Vec<usize>> {
        let mut index: HashMap<[usize; 2], Vec<usize>> = HashMap::new();
        for (i, c) in self.chambers.iter().enumerate() {
            let [a, b, d] = c.vertices;
            for (x, y) in [(a, b), (a, d), (b, d)] {
                index.entry([x.min(y), x.max(y)]).or_default().push(i);
            }
        }
        index
    }

    /// Neighbours of each vertex, ascending.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for &[a, b] in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        adj
    }

    /// The labelled plane seen at `x`: neighbours of type `t+1` as points and
    /// of type `t+2` as lines, both in ascending id order. Returns the
    /// structure with the point and line vertex lists.
    pub fn residue(&self, x: usize) -> (IncidenceStructure, Vec<usize>, Vec<usize>) {
        let t = self.vertices[x].kind as usize;
        let (tp, tl) = (next_type(t, 1), next_type(t, 2));
        let mut flags = Vec::new();
        for c in &self.chambers {
            if c.vertices[t] == x {
                flags.push((c.vertices[tl], c.vertices[tp], c.label));
            }
        }
        let points: Vec<usize> = flags.iter().map(|f| f.1).collect::<BTreeSet<_>>().into_iter().collect();
        let lines: Vec<usize> = flags.iter().map(|f| f.0).collect::<BTreeSet<_>>().into_iter().collect();
        let mut per_line = vec![Vec::new(); lines.len()];
        for (l, p, label) in flags {
            let li = lines.binary_search(&l).expect("collected");
            let pi = points.binary_search(&p).expect("collected");
            per_line[li].push((pi, label));
        }
        let inc = IncidenceStructure::labelled(points.len(), per_line).expect("chambers are distinct");
        (inc, points, lines)
    }

    pub fn to_text(&self) -> String {
        let mut s = serde_json::to_string(self).expect("ball serializes");
        s.push('\n');
        s
    }

    pub fn from_text(text: &str) -> Result<BallComplex> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
    }
}

/// Outcome of [`verify_ball`]; empty failure lists mean the check passed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallReport {
    pub vertices: usize,
    pub edges: usize,
    pub chambers: usize,
    /// Chambers without one vertex of each type.
    pub chamber_type_failures: Vec<usize>,
    /// Panels contained in no chamber.
    pub empty_panels: Vec<[usize; 2]>,
    /// Inner panels with a chamber count other than q+1, with the count.
    pub panel_count_failures: Vec<([usize; 2], usize)>,
    /// Panels whose chamber labels repeat, or, for inner panels, miss a label.
    pub label_failures: Vec<[usize; 2]>,
    /// Inner vertices whose residue is not isomorphic to the plane of their
    /// type.
    pub residue_failures: Vec<usize>,
    pub residues_checked: usize,
    pub inner_panels_checked: usize,
}

impl BallReport {
    pub fn passed(&self) -> bool {
        self.chamber_type_failures.is_empty()
            && self.empty_panels.is_empty()
            && self.panel_count_failures.is_empty()
            && self.label_failures.is_empty()
            && self.residue_failures.is_empty()
    }
}

/// Checks every structural invariant of a ball. Inner vertices and panels are
/// those within distance `radius - 1` of the centre.
pub fn verify_ball(ball: &BallComplex) -> BallReport {
    let q = ball.q as usize;
    let inner = |v: usize| (ball.vertices[v].distance as usize) < ball.radius as usize;
    let mut report = BallReport {
        vertices: ball.vertices.len(),
        edges: ball.edges.len(),
        chambers: ball.chambers.len(),
        ..BallReport::default()
    };
    for (i, c) in ball.chambers.iter().enumerate() {
        let ok = c
            .vertices
            .iter()
            .enumerate()
            .all(|(t, &v)| v < ball.vertices.len() && ball.vertices[v].kind as usize == t);
        if !ok {
            report.chamber_type_failures.push(i);
        }
    }
    let index = ball.panel_index();
    for e in &ball.edges {
        let on = index.get(e).map(Vec::as_slice).unwrap_or(&[]);
        if on.is_empty() {
            report.empty_panels.push(*e);
            continue;
        }
        let labels: BTreeSet<u8> = on.iter().map(|&i| ball.chambers[i].label).collect();
        let repeated = labels.len() != on.len();
        if inner(e[0]) || inner(e[1]) {
            report.inner_panels_checked += 1;
            if on.len() != q + 1 {
                report.panel_count_failures.push((*e, on.len()));
            }
            let full = labels.iter().copied().eq(1..=q as u8 + 1);
            if repeated || !full {
                report.label_failures.push(*e);
            }
        } else if repeated {
            report.label_failures.push(*e);
        }
    }
    if let Ok(m) = ball.matrix() {
        let planes: Vec<LabelledPlane> = m.columns().iter().map(LabelledPlane::from_vector).collect();
        for v in &ball.vertices {
            if !inner(v.id) {
                continue;
            }
            report.residues_checked += 1;
            let (res, _, _) = ball.residue(v.id);
            if labelled_isomorphism(&res, planes[v.kind as usize].incidence()).is_none() {
                report.residue_failures.push(v.id);
            }
        }
    } else {
        report.residue_failures.push(ball.center);
    }
    report
}

/// Whether `map` is a type- and label-preserving automorphism of the ball.
pub fn is_labelled_automorphism(ball: &BallComplex, map: &[usize]) -> bool {
    is_labelled_isomorphism(ball, ball, map, &Permutation::identity(ball.q as usize + 1))
}

/// Whether `map` sends `a` onto `b`, preserving types and sending label `j`
/// (1-based) to `labels(j-1) + 1`.
pub fn is_labelled_isomorphism(a: &BallComplex, b: &BallComplex, map: &[usize], labels: &Permutation) -> bool {
    if map.len() != a.vertices.len() || a.vertices.len() != b.vertices.len() || a.chambers.len() != b.chambers.len() {
        return false;
    }
    let mut seen = vec![false; b.vertices.len()];
    for (v, &w) in map.iter().enumerate() {
        if w >= seen.len() || std::mem::replace(&mut seen[w], true) || a.vertices[v].kind != b.vertices[w].kind {
            return false;
        }
    }
    let target: HashMap<[usize; 3], u8> = b.chambers.iter().map(|c| (c.vertices, c.label)).collect();
    a.chambers.iter().all(|c| {
        let image = c.vertices.map(|v| map[v]);
        target.get(&image).map(|&l| l as usize) == Some(labels.apply(c.label as usize - 1) + 1)
    })
}

/// The Singer shift `x ↦ x + 1` of the centre's residue, as a map on the
/// vertices of a radius-1 ball.
pub fn singer_shift_on_ball(ball: &BallComplex) -> Result<Vec<usize>> {
    if ball.radius != 1 {
        return Err(Error::InvalidInput("the shift is defined on radius-1 balls".into()));
    }
    let n = (ball.vertices.len() - 1) / 2;
    let mut map = vec![0; ball.vertices.len()];
    for x in 0..n {
        map[1 + x] = 1 + (x + 1) % n;
        map[1 + n + x] = 1 + n + (x + 1) % n;
    }
    Ok(map)
}

/// A vertex map `a → b` fixing the centres, sending label `j` to
/// `labels(j)`, found by propagating from one chamber at the centre through
/// shared panels.
pub fn find_ball_isomorphism(a: &BallComplex, b: &BallComplex, labels: &Permutation) -> Option<Vec<usize>> {
    if a.vertices.len() != b.vertices.len() || a.chambers.len() != b.chambers.len() {
        return None;
    }
    let ia = a.panel_index();
    let ib = b.panel_index();
    let start = a.chambers.iter().position(|c| c.vertices[0] == a.center)?;
    let want = labels.apply(a.chambers[start].label as usize - 1) as u8 + 1;
    let image_label = |l: u8| labels.apply(l as usize - 1) as u8 + 1;
    b.chambers
        .iter()
        .filter(|c| c.vertices[0] == b.center && c.label == want)
        .find_map(|c0| {
            let mut map = vec![UNSET; a.vertices.len()];
            for t in 0..3 {
                map[a.chambers[start].vertices[t]] = c0.vertices[t];
            }
            let mut done = vec![false; a.chambers.len()];
            done[start] = true;
            let mut queue = vec![start];
            while let Some(ci) = queue.pop() {
                let c = a.chambers[ci];
                for (s, u) in [(0, 1), (0, 2), (1, 2)] {
                    let (x, y) = (c.vertices[s], c.vertices[u]);
                    let (fx, fy) = (map[x], map[y]);
                    let key = [x.min(y), x.max(y)];
                    let fkey = [fx.min(fy), fx.max(fy)];
                    let theirs = ib.get(&fkey)?;
                    for &di in &ia[&key] {
                        let d = a.chambers[di];
                        let t = 3 - s - u;
                        let e = theirs.iter().map(|&k| b.chambers[k]).find(|e| e.label == image_label(d.label))?;
                        let (z, fz) = (d.vertices[t], e.vertices[t]);
                        if map[z] == UNSET {
                            map[z] = fz;
                        } else if map[z] != fz {
                            return None;
                        }
                        if !done[di] {
                            done[di] = true;
                            queue.push(di);
                        }
                    }
                }
            }
            (map.iter().all(|&v| v != UNSET) && is_labelled_isomorphism(a, b, &map, labels)).then_some(map)
        })
}

/// Level-1 or level-2 Hjelmslev plane at the centre of a ball.
#[derive(Clone, Debug)]
pub struct HjelmslevPlane {
    pub level: usize,
    /// Each point as its vertex sequence `(v_1, ..., v_n)`.
    pub points: Vec<Vec<usize>>,
    pub lines: Vec<Vec<usize>>,
    pub incidence: IncidenceStructure,
    /// Index in the level-1 plane of `π_1` of each point and line.
    pub point_projection: Vec<usize>,
    pub line_projection: Vec<usize>,
    /// Labels of the chambers spanned by each flag `(line, point)`: one for
    /// level 1; for level 2 the chambers `O p_1 ℓ_1`, `p_1 ℓ_1 m`, `p_1 p_2 m`
    /// and `ℓ_1 ℓ_2 m`.
    pub signatures: HashMap<(usize, usize), Vec<u8>>,
}

impl HjelmslevPlane {
    pub fn neighboring_points(&self, a: usize, b: usize) -> bool {
        self.point_projection[a] == self.point_projection[b]
    }

    pub fn neighboring_lines(&self, a: usize, b: usize) -> bool {
        self.line_projection[a] == self.line_projection[b]
    }
}

/// `ℋ^n(O)` for `n ∈ {1, 2}`; the ball must have radius at least `n`.
pub fn extract_hjelmslev(ball: &BallComplex, n: usize) -> Result<HjelmslevPlane> {
    if n == 0 || n > 2 {
        return Err(Error::InvalidInput(format!("level {n} is not supported")));
    }
    if (ball.radius as usize) < n {
        return Err(Error::InvalidInput(format!(
            "radius {} is too small for level {n}",
            ball.radius
        )));
    }
    let o = ball.center;
    let (h1, p1s, l1s) = ball.residue(o);
    if n == 1 {
        let mut signatures = HashMap::new();
        for (l, p) in h1.flags() {
            signatures.insert((l, p), vec![h1.label(l, p).expect("labelled")]);
        }
        return Ok(HjelmslevPlane {
            level: 1,
            points: p1s.iter().map(|&p| vec![p]).collect(),
            lines: l1s.iter().map(|&l| vec![l]).collect(),
            point_projection: (0..p1s.len()).collect(),
            line_projection: (0..l1s.len()).collect(),
            incidence: h1,
            signatures,
        });
    }

    let chamber: HashMap<[usize; 3], u8> = ball.chambers.iter().map(|c| (c.vertices, c.label)).collect();
    let adj = ball.adjacency();
    let adjacent = |x: usize, y: usize| adj[x].binary_search(&y).is_ok();
    let kind = |v: usize| ball.vertices[v].kind;

    // (p1, p2): p2 of type 2 next to p1, opposite O in the residue of p1
    let mut points = Vec::new();
    let mut point_projection = Vec::new();
    for (i, &p1) in p1s.iter().enumerate() {
        for &p2 in &adj[p1] {
            if kind(p2) == 2 && p2 != o && !adjacent(p2, o) {
                points.push(vec![p1, p2]);
                point_projection.push(i);
            }
        }
    }
    let mut lines = Vec::new();
    let mut line_projection = Vec::new();
    for (i, &l1) in l1s.iter().enumerate() {
        for &l2 in &adj[l1] {
            if kind(l2) == 1 && !adjacent(l2, o) {
                lines.push(vec![l1, l2]);
                line_projection.push(i);
            }
        }
    }

    let mut per_line = vec![Vec::new(); lines.len()];
    let mut signatures = HashMap::new();
    for (li, l) in lines.iter().enumerate() {
        let (l1, l2) = (l[0], l[1]);
        for (pi, p) in points.iter().enumerate() {
            let (p1, p2) = (p[0], p[1]);
            let Some(&base) = chamber.get(&[o, p1, l1]) else { continue };
            // the fourth vertex m closes both half-apartment chambers
            let found = adj[p1].iter().find_map(|&m| {
                if kind(m) != 0 || m == o {
                    return None;
                }
                let a = chamber.get(&[m, p1, l1])?;
                let b = chamber.get(&[m, p1, p2])?;
                let c = chamber.get(&[m, l2, l1])?;
                Some(vec![base, *a, *b, *c])
            });
            if let Some(sig) = found {
                per_line[li].push((pi, 1u8));
                signatures.insert((li, pi), sig);
            }
        }
    }
    let incidence = IncidenceStructure::unlabelled(
        points.len(),
        per_line.into_iter().map(|v| v.into_iter().map(|(p, _)| p).collect()).collect(),
    )?;
    Ok(HjelmslevPlane {
        level: 2,
        points,
        lines,
        incidence,
        point_projection,
        line_projection,
        signatures,
    })
}

/// Collineations of a Hjelmslev plane, with their elations.
#[derive(Clone, Debug)]
pub struct H2Summary {
    pub collineations: Vec<Collineation>,
    /// Number of distinct collineations induced on the level-1 plane.
    pub induced_on_h1: usize,
    /// `(center, axis)` flags examined.
    pub flags_checked: usize,
    /// Distinct nontrivial elations over all flags.
    pub nontrivial_elations: usize,
    /// Every elation fixes the points neighbouring its centre and the lines
    /// neighbouring its axis.
    pub neighbor_lemma_holds: bool,
    /// No nontrivial elation fixes a point not near its axis or a line not
    /// near its centre.
    pub no_far_fixed_points: bool,
    /// Each elation group acts freely on the points of an auxiliary line that
    /// do not neighbour the centre.
    pub free_action_holds: bool,
}

impl H2Summary {
    pub fn order(&self) -> usize {
        self.collineations.len()
    }
}

/// Backtracking over point images. Two non-neighbouring points lie on a
/// unique line, so each new point pins the images of its joins with the
/// points already placed; incidence with every placed line is checked.
struct HSearch<'a> {
    h: &'a HjelmslevPlane,
    labels_only: bool,
    /// Join of two non-neighbouring points, else `UNSET`.
    join: Vec<usize>,
    /// Points in the order they are assigned: one per fibre first.
    order: Vec<usize>,
    np: usize,
}

#[derive(Clone)]
struct HState {
    pmap: Vec<usize>,
    lmap: Vec<usize>,
    pinv: Vec<usize>,
    linv: Vec<usize>,
}

impl<'a> HSearch<'a> {
    fn new(h: &'a HjelmslevPlane, labels_only: bool) -> HSearch<'a> {
        let s = &h.incidence;
        let np = s.num_points();
        let mut join = vec![UNSET; np * np];
        for a in 0..np {
            for b in 0..np {
                if a != b && !h.neighboring_points(a, b) {
                    if let [l] = s.common_lines(a, b)[..] {
                        join[a * np + b] = l;
                    }
                }
            }
        }
        let mut rank = vec![0usize; np];
        let mut seen: HashMap<usize, usize> = HashMap::new();
        for p in 0..np {
            let k = seen.entry(h.point_projection[p]).or_insert(0);
            rank[p] = *k;
            *k += 1;
        }
        let mut order: Vec<usize> = (0..np).collect();
        order.sort_by_key(|&p| (rank[p], h.point_projection[p], p));
        HSearch {
            h,
            labels_only,
            join,
            order,
            np,
        }
    }

    fn assign(&self, st: &HState, x: usize, y: usize) -> Option<HState> {
        let s = &self.h.incidence;
        if st.pinv[y] != UNSET {
            return None;
        }
        let mut st = st.clone();
        st.pmap[x] = y;
        st.pinv[y] = x;
        let mut new_lines = Vec::new();
        for a in 0..self.np {
            let b = st.pmap[a];
            if b == UNSET || a == x {
                continue;
            }
            if self.h.neighboring_points(a, x) != self.h.neighboring_points(b, y) {
                return None;
            }
            let l = self.join[a * self.np + x];
            let l2 = self.join[b * self.np + y];
            if (l == UNSET) != (l2 == UNSET) {
                return None;
            }
            if l == UNSET {
                continue;
            }
            if st.lmap[l] == UNSET {
                if st.linv[l2] != UNSET {
                    return None;
                }
                st.lmap[l] = l2;
                st.linv[l2] = l;
                new_lines.push(l);
            } else if st.lmap[l] != l2 {
                return None;
            }
        }
        // x against all placed lines, new lines against all placed points
        for l in 0..s.num_lines() {
            let l2 = st.lmap[l];
            if l2 != UNSET && s.incident(l, x) != s.incident(l2, y) {
                return None;
            }
        }
        for &l in &new_lines {
            let l2 = st.lmap[l];
            for a in 0..self.np {
                let b = st.pmap[a];
                if b != UNSET && s.incident(l, a) != s.incident(l2, b) {
                    return None;
                }
            }
        }
        Some(st)
    }

    fn root(&self) -> HState {
        let nl = self.h.incidence.num_lines();
        HState {
            pmap: vec![UNSET; self.np],
            lmap: vec![UNSET; nl],
            pinv: vec![UNSET; self.np],
            linv: vec![UNSET; nl],
        }
    }

    fn run(&self, st: HState, depth: usize, out: &mut Vec<Collineation>) {
        if depth == self.np {
            if let Some(c) = self.finish(&st) {
                out.push(c);
            }
            return;
        }
        let x = self.order[depth];
        for y in 0..self.np {
            if let Some(child) = self.assign(&st, x, y) {
                self.run(child, depth + 1, out);
            }
        }
    }

    fn finish(&self, st: &HState) -> Option<Collineation> {
        let s = &self.h.incidence;
        let map = &st.pmap;
        let line_of: HashMap<Vec<usize>, usize> =
            (0..s.num_lines()).map(|l| (s.points_on(l).to_vec(), l)).collect();
        let mut lines = Vec::with_capacity(s.num_lines());
        for l in 0..s.num_lines() {
            let mut image: Vec<usize> = s.points_on(l).iter().map(|&p| map[p]).collect();
            image.sort_unstable();
            let target = *line_of.get(&image)?;
            if st.lmap[l] != UNSET && st.lmap[l] != target {
                return None;
            }
            lines.push(target);
        }
        let mut seen = vec![false; lines.len()];
        if lines.iter().any(|&l| std::mem::replace(&mut seen[l], true)) {
            return None;
        }
        let preserves_labels = s
            .flags()
            .into_iter()
            .all(|(l, p)| self.h.signatures.get(&(l, p)) == self.h.signatures.get(&(lines[l], map[p])));
        if self.labels_only && !preserves_labels {
            return None;
        }
        Some(Collineation {
            points: map.to_vec(),
            lines,
            preserves_labels,
        })
    }
}

/// All collineations of a Hjelmslev plane (optionally only those preserving
/// flag signatures), sorted.
pub fn hjelmslev_collineations(h: &HjelmslevPlane, labels_only: bool, exec: Exec) -> Vec<Collineation> {
    let search = HSearch::new(h, labels_only);
    let root = search.root();
    let first = search.order[0];
    let mut out: Vec<Collineation> = exec::map_range(exec, search.np, |y| {
        let mut found = Vec::new();
        if let Some(st) = search.assign(&root, first, y) {
            search.run(st, 1, &mut found);
        }
        found
    })
    .into_iter()
    .flatten()
    .collect();
    out.sort_unstable();
    out
}

/// Collineations of `ℋ²(O)` and the elation laws for every flag. Restricted
/// to q = 2.
pub fn h2_collineations_fixing_center(ball: &BallComplex, labels_only: bool, exec: Exec) -> Result<H2Summary> {
    if ball.q != H2_SEARCH_Q {
        return Err(Error::cap("q", ball.q, H2_SEARCH_Q));
    }
    let h = extract_hjelmslev(ball, 2)?;
    let collineations = hjelmslev_collineations(&h, labels_only, exec);
    let s = &h.incidence;
    let (h1, _, _) = ball.residue(ball.center);

    let induced: BTreeSet<(Vec<usize>, Vec<usize>)> = collineations
        .iter()
        .map(|c| {
            let mut pts = vec![UNSET; h1.num_points()];
            let mut lns = vec![UNSET; h1.num_lines()];
            for (p, &img) in c.points.iter().enumerate() {
                pts[h.point_projection[p]] = h.point_projection[img];
            }
            for (l, &img) in c.lines.iter().enumerate() {
                lns[h.line_projection[l]] = h.line_projection[img];
            }
            (pts, lns)
        })
        .collect();

    let near_point_line = |p: usize, l: usize| h1.incident(h.line_projection[l], h.point_projection[p]);
    let mut neighbor_ok = true;
    let mut far_ok = true;
    let mut free_ok = true;
    let mut elations: BTreeSet<&Collineation> = BTreeSet::new();
    let flags = s.flags();
    for &(axis, center) in &flags {
        let group: Vec<&Collineation> = collineations
            .iter()
            .filter(|c| {
                s.points_on(axis).iter().all(|&p| c.points[p] == p)
                    && s.lines_through(center).iter().all(|&l| c.lines[l] == l)
            })
            .collect();
        for c in &group {
            neighbor_ok &= (0..s.num_points())
                .filter(|&p| h.neighboring_points(p, center))
                .all(|p| c.points[p] == p)
                && (0..s.num_lines())
                    .filter(|&l| h.neighboring_lines(l, axis))
                    .all(|l| c.lines[l] == l);
            if !c.is_identity() {
                elations.insert(c);
                far_ok &= (0..s.num_points())
                    .filter(|&p| !near_point_line(p, axis))
                    .all(|p| c.points[p] != p)
                    && (0..s.num_lines())
                        .filter(|&l| !near_point_line(center, l))
                        .all(|l| c.lines[l] != l);
            }
        }
        for &m in s.lines_through(center) {
            if h.neighboring_lines(m, axis) {
                continue;
            }
            for &x in s.points_on(m) {
                if h.neighboring_points(x, center) {
                    continue;
                }
                let fixing = group.iter().filter(|c| c.points[x] == x).count();
                free_ok &= fixing == 1;
            }
        }
    }
    Ok(H2Summary {
        induced_on_h1: induced.len(),
        flags_checked: flags.len(),
        nontrivial_elations: elations.len(),
        neighbor_lemma_holds: neighbor_ok,
        no_far_fixed_points: far_ok,
        free_action_holds: free_ok,
        collineations,
    })
}

/// The column vectors after a simultaneous row permutation, and the label map
/// it induces: old label `j` becomes `labels(j)`.
pub fn row_permutation_labels(m: &DifferenceMatrix, sigma: &Permutation) -> (DifferenceMatrix, Permutation) {
    let moved = m.permute_rows(sigma);
    let v: &DifferenceVector = m.column(0);
    let w = moved.column(0);
    let images = v.entries().iter().map(|&d| w.index_of(d).expect("same set")).collect();
    (moved, Permutation::from_images(images).expect("bijection on rows"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diffsets::canonical_singer;

    fn classical(q: u64) -> DifferenceMatrix {
        DifferenceMatrix::constant(&canonical_singer(q).unwrap().sorted_vector())
    }

    #[test]
    fn radius_one_counts() {
        let b = build_ball(&classical(2), 1).unwrap();
        assert_eq!((b.vertices.len(), b.edges.len(), b.chambers.len()), (15, 35, 21));
        assert!(verify_ball(&b).passed());
    }

    #[test]
    fn caps() {
        assert!(build_ball(&classical(4), 2).unwrap_err().is_cap());
        assert!(build_ball(&classical(2), 3).unwrap_err().is_cap());
        assert!(build_ball(&classical(2), 0).is_err());
    }

    #[test]
    fn level_too_high() {
        let b = build_ball(&classical(2), 1).unwrap();
        assert!(extract_hjelmslev(&b, 2).is_err());
    }
}
