//! Paths in the incidence graph, replayable homotopy certificates, and the
//! constructions built from them: truncation to point-line paths, residue
//! contraction, reduction to primitive paths, shifts and the line invariant.

use std::collections::HashSet;

use crate::algebra::{AlgElement, AlgebraTag, Scalar, Variant};
use crate::error::{Error, Result};
use crate::geometry::{self, Element, Geometry, Kind, Line, Plane, Point, DEGENERACY_EPS};
use crate::rng::{self, Rng};

pub type GPath = Vec<Element>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    /// `(x, z) → (x, y, z)` for a flag `{x, y, z}`.
    InsertBetween,
    /// `(x, y, z) → (x, z)` for a flag `{x, y, z}`.
    RemoveBetween,
    /// `(x, y, x) → (x)`.
    Backtrack,
    /// `(x) → (x, y, x)`.
    UnBacktrack,
}

impl MoveKind {
    pub fn name(self) -> &'static str {
        match self {
            MoveKind::InsertBetween => "insert",
            MoveKind::RemoveBetween => "remove",
            MoveKind::Backtrack => "backtrack",
            MoveKind::UnBacktrack => "unbacktrack",
        }
    }

    pub fn parse(s: &str) -> Option<MoveKind> {
        [
            MoveKind::InsertBetween,
            MoveKind::RemoveBetween,
            MoveKind::Backtrack,
            MoveKind::UnBacktrack,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }
}

/// One elementary move acting at `pos`; `witness` is the inserted or removed
/// middle element.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementaryMove {
    pub kind: MoveKind,
    pub pos: usize,
    pub witness: Element,
}

impl ElementaryMove {
    pub fn new(kind: MoveKind, pos: usize, witness: Element) -> Self {
        ElementaryMove { kind, pos, witness }
    }

    pub fn inverse(&self) -> ElementaryMove {
        let kind = match self.kind {
            MoveKind::InsertBetween => MoveKind::RemoveBetween,
            MoveKind::RemoveBetween => MoveKind::InsertBetween,
            MoveKind::Backtrack => MoveKind::UnBacktrack,
            MoveKind::UnBacktrack => MoveKind::Backtrack,
        };
        ElementaryMove::new(kind, self.pos, self.witness.clone())
    }

    fn shifted(&self, offset: usize) -> ElementaryMove {
        ElementaryMove::new(self.kind, self.pos + offset, self.witness.clone())
    }

    /// Applies the move in place after checking its side conditions.
    pub fn apply(&self, geo: &Geometry, path: &mut GPath) -> std::result::Result<(), String> {
        let pos = self.pos;
        let w = &self.witness;
        let need = |n: usize| -> std::result::Result<(), String> {
            if pos + n < path.len() {
                Ok(())
            } else {
                Err(format!("position {pos} out of range for length {}", path.len()))
            }
        };
        match self.kind {
            MoveKind::InsertBetween => {
                need(1)?;
                flag(geo, &path[pos], w, &path[pos + 1])?;
                path.insert(pos + 1, w.clone());
            }
            MoveKind::RemoveBetween => {
                need(2)?;
                if !geo.elements_eq(&path[pos + 1], w) {
                    return Err("removed element differs from witness".into());
                }
                flag(geo, &path[pos], &path[pos + 1], &path[pos + 2])?;
                path.remove(pos + 1);
            }
            MoveKind::Backtrack => {
                need(2)?;
                if !geo.elements_eq(&path[pos + 1], w) {
                    return Err("backtrack middle differs from witness".into());
                }
                if !geo.elements_eq(&path[pos], &path[pos + 2]) {
                    return Err("not a backtrack".into());
                }
                path.drain(pos + 1..pos + 3);
            }
            MoveKind::UnBacktrack => {
                need(0)?;
                if !geo.incident(&path[pos], w).unwrap_or(false) {
                    return Err("witness not incident".into());
                }
                let x = path[pos].clone();
                path.insert(pos + 1, w.clone());
                path.insert(pos + 2, x);
            }
        }
        Ok(())
    }
}

fn flag(geo: &Geometry, x: &Element, y: &Element, z: &Element) -> std::result::Result<(), String> {
    let kinds = [x.kind(), y.kind(), z.kind()];
    if kinds[0] == kinds[1] || kinds[1] == kinds[2] || kinds[0] == kinds[2] {
        return Err("not a flag: repeated kind".into());
    }
    for (e, f) in [(x, y), (y, z), (x, z)] {
        if !geo.incident(e, f).unwrap_or(false) {
            return Err(format!("{} and {} not incident", e.kind().name(), f.kind().name()));
        }
    }
    Ok(())
}

/// Consecutive elements must be incident and of distinct kinds.
pub fn validate_path(geo: &Geometry, path: &[Element]) -> std::result::Result<(), String> {
    if path.is_empty() {
        return Err("empty path".into());
    }
    for (n, w) in path.windows(2).enumerate() {
        match geo.incident(&w[0], &w[1]) {
            Ok(true) => {}
            Ok(false) => return Err(format!("elements {n} and {} not incident", n + 1)),
            Err(_) => return Err(format!("elements {n} and {} have the same kind", n + 1)),
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomotopyTrace {
    pub start: GPath,
    pub moves: Vec<ElementaryMove>,
}

impl HomotopyTrace {
    pub fn empty(start: GPath) -> Self {
        HomotopyTrace {
            start,
            moves: Vec::new(),
        }
    }

    /// Appends `next`, whose start must be this trace's end.
    pub fn then(mut self, next: HomotopyTrace) -> Self {
        self.moves.extend(next.moves);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceCheck {
    pub ok: bool,
    pub end: GPath,
    /// Index of the first failing move (`None` with `ok == false` means the
    /// start path itself is invalid) and the reason.
    pub failure: Option<(Option<usize>, String)>,
}

/// Replays `t` from its start, checking every side condition.
pub fn validate_trace(geo: &Geometry, t: &HomotopyTrace) -> TraceCheck {
    let mut path = t.start.clone();
    if let Err(e) = validate_path(geo, &path) {
        return TraceCheck {
            ok: false,
            end: path,
            failure: Some((None, e)),
        };
    }
    for (n, m) in t.moves.iter().enumerate() {
        if let Err(e) = m.apply(geo, &mut path) {
            return TraceCheck {
                ok: false,
                end: path,
                failure: Some((Some(n), e)),
            };
        }
    }
    TraceCheck {
        ok: true,
        end: path,
        failure: None,
    }
}

pub fn paths_eq(geo: &Geometry, a: &[Element], b: &[Element]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| geo.elements_eq(x, y))
}

/// Records moves while applying them to a working copy of the path.
pub struct TraceBuilder<'g> {
    geo: &'g Geometry,
    start: GPath,
    path: GPath,
    moves: Vec<ElementaryMove>,
}

impl<'g> TraceBuilder<'g> {
    pub fn new(geo: &'g Geometry, start: GPath) -> Self {
        TraceBuilder {
            geo,
            path: start.clone(),
            start,
            moves: Vec::new(),
        }
    }

    pub fn path(&self) -> &GPath {
        &self.path
    }

    pub fn push(&mut self, m: ElementaryMove) -> Result<()> {
        m.apply(self.geo, &mut self.path)
            .map_err(|e| Error::InvalidPath(format!("{} at {}: {e}", m.kind.name(), m.pos)))?;
        self.moves.push(m);
        Ok(())
    }

    pub fn insert(&mut self, pos: usize, w: Element) -> Result<()> {
        self.push(ElementaryMove::new(MoveKind::InsertBetween, pos, w))
    }

    pub fn remove(&mut self, pos: usize) -> Result<()> {
        let w = self.path.get(pos + 1).cloned().ok_or_else(|| Error::InvalidPath("remove out of range".into()))?;
        self.push(ElementaryMove::new(MoveKind::RemoveBetween, pos, w))
    }

    pub fn backtrack(&mut self, pos: usize) -> Result<()> {
        let w = self.path.get(pos + 1).cloned().ok_or_else(|| Error::InvalidPath("backtrack out of range".into()))?;
        self.push(ElementaryMove::new(MoveKind::Backtrack, pos, w))
    }

    pub fn unbacktrack(&mut self, pos: usize, w: Element) -> Result<()> {
        self.push(ElementaryMove::new(MoveKind::UnBacktrack, pos, w))
    }

    pub fn extend(&mut self, moves: &[ElementaryMove], offset: usize) -> Result<()> {
        for m in moves {
            self.push(m.shifted(offset))?;
        }
        Ok(())
    }

    /// Removes immediate backtracks until none is left.
    pub fn strip_backtracks(&mut self) -> Result<()> {
        while let Some(n) = (0..self.path.len().saturating_sub(2))
            .find(|&n| self.geo.elements_eq(&self.path[n], &self.path[n + 2]))
        {
            self.backtrack(n)?;
        }
        Ok(())
    }

    /// Replaces `path[from..=to]` by `replacement` (same end points), both
    /// lying in the residue of `u`: contract onto `(v, u, w)`, then expand.
    pub fn replace_in_residue(&mut self, from: usize, to: usize, replacement: GPath, u: &Element) -> Result<()> {
        let segment: GPath = self.path[from..=to].to_vec();
        let contract = residue_contract(self.geo, &segment, u)?;
        self.extend(&contract.moves, from)?;
        if replacement.len() == 1 {
            if !self.geo.elements_eq(&replacement[0], &segment[0]) {
                return Err(Error::InvalidPath("replacement changes the end points".into()));
            }
            return self.backtrack(from);
        }
        let expand = residue_contract(self.geo, &replacement, u)?;
        let inverse: Vec<ElementaryMove> = expand.moves.iter().rev().map(|m| m.inverse()).collect();
        self.extend(&inverse, from)
    }

    pub fn finish(self) -> HomotopyTrace {
        HomotopyTrace {
            start: self.start,
            moves: self.moves,
        }
    }
}

/// Trace from `alpha` to `(v, u, w)` for a path `alpha` from `v` to `w` inside
/// the residue of `u`: insert `u` on every edge, then cancel `(u, x, u)`.
pub fn residue_contract(geo: &Geometry, alpha: &[Element], u: &Element) -> Result<HomotopyTrace> {
    validate_path(geo, alpha).map_err(Error::InvalidPath)?;
    if alpha.len() < 2 {
        return Err(Error::InvalidPath("path needs at least one edge".into()));
    }
    let is_u: Vec<bool> = alpha.iter().map(|x| geo.elements_eq(x, u)).collect();
    for (n, x) in alpha.iter().enumerate() {
        if !is_u[n] && !geo.incident(x, u).unwrap_or(false) {
            return Err(Error::NotInResidue(n));
        }
    }
    if is_u[0] || is_u[alpha.len() - 1] {
        return Err(Error::InvalidPath("end point equals the residue centre".into()));
    }
    let mut b = TraceBuilder::new(geo, alpha.to_vec());
    let mut n = 0;
    while n + 1 < b.path.len() {
        let adjacent = geo.elements_eq(&b.path[n], u) || geo.elements_eq(&b.path[n + 1], u);
        if adjacent {
            n += 1;
        } else {
            b.insert(n, u.clone())?;
            n += 2;
        }
    }
    while let Some(n) = (0..b.path.len().saturating_sub(2))
        .find(|&n| geo.elements_eq(&b.path[n], u) && geo.elements_eq(&b.path[n + 2], u))
    {
        b.backtrack(n)?;
    }
    if b.path.len() != 3 {
        return Err(Error::InvalidPath("residue contraction did not close".into()));
    }
    Ok(b.finish())
}

/// Replaces every plane by a point-line path inside its residue.
pub fn truncate_to_point_line(geo: &Geometry, alpha: &[Element]) -> Result<(GPath, HomotopyTrace)> {
    validate_path(geo, alpha).map_err(Error::InvalidPath)?;
    if alpha[0].kind() == Kind::Plane || alpha[alpha.len() - 1].kind() == Kind::Plane {
        return Err(Error::InvalidPath("end points must be points or lines".into()));
    }
    let mut b = TraceBuilder::new(geo, alpha.to_vec());
    while let Some(n) = b.path.iter().position(|e| e.kind() == Kind::Plane) {
        let phi = b.path[n].as_plane().unwrap().clone();
        let (x, y) = (b.path[n - 1].clone(), b.path[n + 1].clone());
        let repl = residue_bridge(geo, &phi, &x, &y)?;
        b.replace_in_residue(n - 1, n + 1, repl, &Element::Plane(phi))?;
    }
    let end = b.path.clone();
    Ok((end, b.finish()))
}

/// A point-line path from `x` to `y` inside the residue of `phi`.
fn residue_bridge(geo: &Geometry, phi: &Plane, x: &Element, y: &Element) -> Result<GPath> {
    use Element::*;
    if geo.elements_eq(x, y) {
        return Ok(vec![x.clone()]);
    }
    Ok(match (x, y) {
        (Point(p), Point(q)) => vec![x.clone(), geo.line_in_plane_through(phi, p, q)?.into(), y.clone()],
        (Point(p), Line(l)) => point_to_line(geo, phi, p, l)?,
        (Line(l), Point(p)) => {
            let mut v = point_to_line(geo, phi, p, l)?;
            v.reverse();
            v
        }
        (Line(l), Line(m)) => vec![x.clone(), geo.shadow_meet(l, m)?.into(), y.clone()],
        _ => return Err(Error::InvalidPath("plane adjacent to a plane".into())),
    })
}

fn point_to_line(geo: &Geometry, phi: &Plane, p: &Point, l: &Line) -> Result<GPath> {
    if geo.point_on_line(p, l) {
        return Ok(vec![p.clone().into(), l.clone().into()]);
    }
    let r = Point::new(geo.variant, &geo.variant.cross(l.a(), p.rep())?)?;
    let k = geo.line_in_plane_through(phi, p, &r)?;
    Ok(vec![p.clone().into(), k.into(), r.into(), l.clone().into()])
}

/// A closed path `(p, L, q, M, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitivePath {
    pub p: Point,
    pub l: Line,
    pub q: Point,
    pub m: Line,
}

impl PrimitivePath {
    pub fn to_path(&self) -> GPath {
        vec![
            self.p.clone().into(),
            self.l.clone().into(),
            self.q.clone().into(),
            self.m.clone().into(),
            self.p.clone().into(),
        ]
    }

    pub fn from_path(geo: &Geometry, path: &[Element]) -> Result<PrimitivePath> {
        let bad = || Error::InvalidPath("not of the form (p, L, q, M, p)".into());
        if path.len() != 5 || !geo.elements_eq(&path[0], &path[4]) {
            return Err(bad());
        }
        validate_path(geo, path).map_err(Error::InvalidPath)?;
        Ok(PrimitivePath {
            p: path[0].as_point().ok_or_else(bad)?.clone(),
            l: path[1].as_line().ok_or_else(bad)?.clone(),
            q: path[2].as_point().ok_or_else(bad)?.clone(),
            m: path[3].as_line().ok_or_else(bad)?.clone(),
        })
    }

    pub fn is_degenerate(&self, geo: &Geometry) -> bool {
        geo.point_distance(&self.p, &self.q) < DEGENERACY_EPS || line_distance(geo, &self.l, &self.m) < DEGENERACY_EPS
    }

    pub fn is_orthogonal(&self, geo: &Geometry) -> bool {
        geo.variant.inner(self.p.rep(), self.q.rep()).norm() <= geo.tol
    }

    pub fn invariant(&self, geo: &Geometry) -> Result<Scalar> {
        line_invariant(geo, &self.l, &self.m)
    }
}

/// Projective distance between lines, treating `(a, u)` as one vector.
pub fn line_distance(geo: &Geometry, l: &Line, m: &Line) -> f64 {
    let v = geo.variant;
    let s = (v.inner(l.a(), m.a()) + v.inner(l.u(), m.u())) * 0.5;
    (1.0 - s.norm_sqr()).max(0.0).sqrt()
}

fn require_nondegenerate(geo: &Geometry, alpha: &PrimitivePath) -> Result<()> {
    validate_path(geo, &alpha.to_path()).map_err(Error::InvalidPath)?;
    if alpha.is_degenerate(geo) {
        return Err(Error::PreconditionViolated("degenerate primitive path".into()));
    }
    Ok(())
}

/// `(u|v)` after rescaling the representatives to a common pole.
pub fn line_invariant(geo: &Geometry, l: &Line, m: &Line) -> Result<Scalar> {
    if !geo.same_shadow(l, m) {
        return Err(Error::DifferentShadows);
    }
    let v = geo.variant;
    let s = v.inner(m.a(), l.a());
    Ok(v.inner(l.u(), m.u()) * s / (s.norm() * l.u().norm() * m.u().norm()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    pub primitive: PrimitivePath,
    pub trace: HomotopyTrace,
    /// Path length after truncation and after every shortening step.
    pub stages: Vec<usize>,
}

/// Seed of the plane sampler used by [`reduce_to_primitive`].
pub const REDUCE_SEED: u64 = 0x7e57;

/// Homotopy from a closed point-based path to a primitive one.
pub fn reduce_to_primitive(geo: &Geometry, alpha: &[Element]) -> Result<Reduction> {
    reduce_to_primitive_seeded(geo, alpha, REDUCE_SEED)
}

pub fn reduce_to_primitive_seeded(geo: &Geometry, alpha: &[Element], seed: u64) -> Result<Reduction> {
    validate_path(geo, alpha).map_err(Error::InvalidPath)?;
    if alpha[0].kind() != Kind::Point || !geo.elements_eq(&alpha[0], &alpha[alpha.len() - 1]) {
        return Err(Error::InvalidPath("path must be closed and start at a point".into()));
    }
    if alpha.len() == 5 && PrimitivePath::from_path(geo, alpha).is_ok() {
        return Ok(Reduction {
            primitive: PrimitivePath::from_path(geo, alpha)?,
            trace: HomotopyTrace::empty(alpha.to_vec()),
            stages: vec![alpha.len() - 1],
        });
    }
    let mut rng = rng::seeded(seed);
    let (_, truncation) = truncate_to_point_line(geo, alpha)?;
    let mut b = TraceBuilder::new(geo, alpha.to_vec());
    b.extend(&truncation.moves, 0)?;
    let mut stages = vec![b.path.len() - 1];
    b.strip_backtracks()?;
    if b.path.len() - 1 < stages[0] {
        stages.push(b.path.len() - 1);
    }
    while b.path.len() > 5 {
        if !contract_coplanar_pair(geo, &mut b)? {
            replace_three_lines(geo, &mut b, &mut rng)?;
        }
        b.strip_backtracks()?;
        stages.push(b.path.len() - 1);
    }
    if b.path.len() == 1 {
        let p = b.path[0].as_point().unwrap().clone();
        let l = geometry::sample_line_through(&p, &mut rng);
        let q = loop {
            let q = geometry::sample_point_on(&l, &mut rng);
            if geo.point_distance(&p, &q) > 0.1 {
                break q;
            }
        };
        b.unbacktrack(0, l.into())?;
        b.unbacktrack(1, q.into())?;
    }
    let primitive = PrimitivePath::from_path(geo, &b.path)?;
    Ok(Reduction {
        primitive,
        trace: b.finish(),
        stages,
    })
}

/// First pair of consecutive coplanar lines `L_i, L_{i+1}` is replaced by one
/// line of their common plane (or nothing, when the outer points agree).
fn contract_coplanar_pair(geo: &Geometry, b: &mut TraceBuilder) -> Result<bool> {
    let n_lines = (b.path.len() - 1) / 2;
    for i in 1..n_lines {
        let (li, lj) = (b.path[2 * i - 1].as_line().unwrap(), b.path[2 * i + 1].as_line().unwrap());
        if geo.same_shadow(li, lj) || !geo.coplanar(li, lj) {
            continue;
        }
        let xi = geo.common_plane(li, lj)?;
        let (p0, p1) = (b.path[2 * i - 2].as_point().unwrap().clone(), b.path[2 * i + 2].as_point().unwrap().clone());
        let repl: GPath = if geo.points_eq(&p0, &p1) {
            vec![p0.into()]
        } else {
            let k = geo.line_in_plane_through(&xi, &p0, &p1)?;
            vec![p0.into(), k.into(), p1.into()]
        };
        b.replace_in_residue(2 * i - 2, 2 * i + 2, repl, &xi.into())?;
        return Ok(true);
    }
    Ok(false)
}

/// Replaces `(p0, L1, p1, L2, p2, L3, p3)` by `(p0, M0, q, M3, p3)` through
/// three residue homotopies around a plane `ξ2` on `L2`.
fn replace_three_lines(geo: &Geometry, b: &mut TraceBuilder, rng: &mut Rng) -> Result<()> {
    let pt = |n: usize| b.path[n].as_point().unwrap().clone();
    let ln = |n: usize| b.path[n].as_line().unwrap().clone();
    let (p0, p1, p2, p3) = (pt(0), pt(2), pt(4), pt(6));
    let (l1, l2, l3) = (ln(1), ln(3), ln(5));
    const MARGIN: f64 = 1e-3;
    for _ in 0..64 {
        let xi2 = geometry::sample_plane_on(&l2, rng);
        let attempt = (|| -> Result<_> {
            let m1 = geo.coplanar_line_in_plane_through(&xi2, &p1, &l1)?;
            let m2 = geo.coplanar_line_in_plane_through(&xi2, &p2, &l3)?;
            let xi1 = geo.common_plane(&l1, &m1)?;
            let xi3 = geo.common_plane(&m2, &l3)?;
            if geo.point_distance(&Point::new(geo.variant, m1.a())?, &Point::new(geo.variant, m2.a())?) < MARGIN {
                return Err(Error::SameShadow);
            }
            let q = geo.shadow_meet(&m1, &m2)?;
            if geo.point_distance(&q, &p0) < MARGIN || geo.point_distance(&q, &p3) < MARGIN {
                return Err(Error::CoincidentPoints);
            }
            let m0 = geo.line_in_plane_through(&xi1, &p0, &q)?;
            let m3 = geo.line_in_plane_through(&xi3, &q, &p3)?;
            Ok((m0, m1, m2, m3, q, xi1, xi3))
        })();
        let Ok((m0, m1, m2, m3, q, xi1, xi3)) = attempt else {
            continue;
        };
        let snapshot = (b.path.clone(), b.moves.len());
        let done = (|| -> Result<()> {
            b.replace_in_residue(
                0,
                2,
                vec![p0.clone().into(), m0.into(), q.clone().into(), m1.into(), p1.clone().into()],
                &xi1.into(),
            )?;
            b.replace_in_residue(
                6,
                8,
                vec![p2.clone().into(), m2.into(), q.clone().into(), m3.into(), p3.clone().into()],
                &xi3.into(),
            )?;
            b.replace_in_residue(2, 8, vec![q.clone().into()], &xi2.clone().into())
        })();
        match done {
            Ok(()) => return Ok(()),
            Err(_) => {
                b.path = snapshot.0;
                b.moves.truncate(snapshot.1);
            }
        }
    }
    Err(Error::SearchFailed("no usable plane on the middle line".into()))
}

/// Data of a shift: the admissible line, both hinge points and the two
/// planes joining `N` to `L` and `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftData {
    pub n: Line,
    pub q: Point,
    pub r: Point,
    pub xi: Plane,
    pub chi: Plane,
}

/// `N` passes through `q`, is coplanar with `L` and `M` and differs from both.
pub fn check_admissible(geo: &Geometry, alpha: &PrimitivePath, n: &Line) -> Result<()> {
    let fail = |s: &str| Err(Error::NotAdmissible(s.into()));
    if !geo.point_on_line(&alpha.q, n) {
        return fail("N does not pass through q");
    }
    if line_distance(geo, n, &alpha.l) < DEGENERACY_EPS || line_distance(geo, n, &alpha.m) < DEGENERACY_EPS {
        return fail("N coincides with L or M");
    }
    if !geo.coplanar(n, &alpha.l) || !geo.coplanar(n, &alpha.m) {
        return fail("N is not coplanar with both lines");
    }
    Ok(())
}

/// The shift of `alpha` from `q` to `r` along `N`, with the nine-path chain
/// `α ∼ (p, ξ, L, q, M, χ, p) ∼ … ∼ (p, L', r, M', p)` as its trace.
pub fn shift(geo: &Geometry, alpha: &PrimitivePath, n: &Line, r: &Point) -> Result<(PrimitivePath, ShiftData, HomotopyTrace)> {
    require_nondegenerate(geo, alpha)?;
    check_admissible(geo, alpha, n)?;
    if !geo.point_on_line(r, n) {
        return Err(Error::PointOffLine);
    }
    let xi = geo.common_plane(n, &alpha.l)?;
    let chi = geo.common_plane(n, &alpha.m)?;
    let data = ShiftData {
        n: n.clone(),
        q: alpha.q.clone(),
        r: r.clone(),
        xi: xi.clone(),
        chi: chi.clone(),
    };
    if geo.point_distance(r, &alpha.q) < DEGENERACY_EPS {
        return Ok((alpha.clone(), data, HomotopyTrace::empty(alpha.to_path())));
    }
    if geo.point_distance(r, &alpha.p) < DEGENERACY_EPS {
        return Err(Error::CoincidentPoints);
    }
    let l2 = geo.line_in_plane_through(&xi, &alpha.p, r)?;
    let m2 = geo.line_in_plane_through(&chi, &alpha.p, r)?;
    let mut b = TraceBuilder::new(geo, alpha.to_path());
    b.insert(0, xi.into())?;
    b.insert(4, chi.into())?;
    b.remove(1)?;
    b.remove(2)?;
    b.insert(1, n.clone().into())?;
    b.insert(3, n.clone().into())?;
    b.backtrack(2)?;
    b.unbacktrack(2, r.clone().into())?;
    b.remove(1)?;
    b.remove(2)?;
    b.insert(0, l2.clone().into())?;
    b.insert(4, m2.clone().into())?;
    b.remove(1)?;
    b.remove(2)?;
    let out = PrimitivePath {
        p: alpha.p.clone(),
        l: l2,
        q: r.clone(),
        m: m2,
    };
    Ok((out, data, b.finish()))
}

/// Shift to the unique point of the shadow of `N` orthogonal to `p`. An
/// orthogonal path is its own orthogonal shift.
pub fn orthogonal_shift(geo: &Geometry, alpha: &PrimitivePath, n: &Line) -> Result<(PrimitivePath, ShiftData, HomotopyTrace)> {
    if alpha.is_orthogonal(geo) {
        return shift(geo, alpha, n, &alpha.q);
    }
    let r = geo
        .variant
        .cross(alpha.p.rep(), n.a())
        .map_err(|_| Error::NotAdmissible("p lies on the pole of N".into()))?;
    shift(geo, alpha, n, &Point::new(geo.variant, &r)?)
}

/// Random admissible line for `alpha`: `N = [b, x]` with `b ⟂ q` and
/// `(a|b) = (u|x) = (v|x)`.
pub fn admissible_line_sample(geo: &Geometry, alpha: &PrimitivePath, rng: &mut Rng) -> Result<Line> {
    require_nondegenerate(geo, alpha)?;
    let v = geo.variant;
    let a = *alpha.l.a();
    let u = *alpha.l.u();
    let w = alpha.m.fiber_at(&a);
    let g = v.inner(&u, &w);
    let parallel = 1.0 - g.norm_sqr() < 1e-6;
    // |x0|² = 2|c|²(1 − Re g)/(1 − |g|²) for c = (a|b); keep it below 0.9.
    let c_max = (0.45 * (1.0 - g.norm_sqr()) / (1.0 - g.re).max(1e-300)).sqrt().min(0.98);
    let e = geometry::orthonormal_frame(v, &[*alpha.q.rep(), a]).pop().unwrap_or(a);
    let ae = v.inner(&a, &e).norm();
    for _ in 0..128 {
        let (b, x) = if parallel {
            let b = v.cross(alpha.q.rep(), &a)?;
            let x = geometry::random_unit_orthogonal(v, AlgebraTag::O, &[u], rng);
            (b, x)
        } else {
            let f = geometry::random_unit_orthogonal(v, v.algebra(), &[*alpha.q.rep(), a], rng);
            let t = rng::uniform(rng, -1.0, 1.0) * (c_max / ae).min(1.0);
            let t = match v {
                Variant::RH => Scalar::new(t, 0.0),
                Variant::CO => rng::unit_scalar(rng) * t,
            };
            let b = v.scale(&e, t).add(&f.scale_real((1.0 - t.norm_sqr()).sqrt()));
            let c = v.inner(&a, &b);
            let one = Scalar::new(1.0, 0.0);
            let coef = crate::linalg::solve(vec![vec![one, g], vec![g.conj(), one]], vec![c, c])?;
            let x0 = v.scale(&u, coef[0]).add(&v.scale(&w, coef[1]));
            let rest = 1.0 - x0.norm_sqr();
            if rest < 1e-3 {
                continue;
            }
            let y = geometry::random_unit_orthogonal(v, AlgebraTag::O, &[u, w], rng);
            (b, x0.add(&y.scale_real(rest.sqrt())))
        };
        let n = Line::new(v, &b, &x)?;
        if check_admissible(geo, alpha, &n).is_ok()
            && line_distance(geo, &n, &alpha.l) > 1e-3
            && line_distance(geo, &n, &alpha.m) > 1e-3
        {
            return Ok(n);
        }
    }
    Err(Error::SearchFailed("no admissible line found".into()))
}

/// Random point of the shadow of `N` kept away from `q`, from `p` and, when
/// it exists, from the orthogonal target.
pub fn shift_target(geo: &Geometry, alpha: &PrimitivePath, n: &Line, rng: &mut Rng) -> Result<Point> {
    let v = geo.variant;
    let mut avoid = vec![alpha.q.clone(), alpha.p.clone()];
    if let Ok(x) = v.cross(alpha.p.rep(), n.a()) {
        avoid.push(Point::new(v, &x)?);
    }
    for _ in 0..256 {
        let r = geometry::sample_point_on(n, rng);
        if avoid.iter().all(|x| geo.point_distance(&r, x) > 0.3) {
            return Ok(r);
        }
    }
    Err(Error::SearchFailed("no target point away from q and p".into()))
}

/// Lines `L = L_0, …, L_n = M` on the shadow of `L` with
/// `ℓ(L_{i−1}, L_i) = ell`.
///
/// Writing `g = (w|v)` for the current fiber `w` and the target fiber `v`, a
/// step `w' = w ℓ + y s` with `s = sqrt(1 − |ℓ|²)` and unit `y ⟂ w` reaches
/// exactly the `g'` in the disk of centre `ℓ̄ g` and radius
/// `s sqrt(1 − |g|²)`. The walk in the `g`-plane is planned by a breadth-first
/// search on a coarse grid and then realized exactly.
pub fn chain_of_lines(geo: &Geometry, l: &Line, m: &Line, ell: Scalar) -> Result<Vec<Line>> {
    if ell.norm() >= 1.0 {
        return Err(Error::BadInvariant(ell.norm()));
    }
    geo.variant.check_scalar(ell, 0.0)?;
    if !geo.same_shadow(l, m) {
        return Err(Error::DifferentShadows);
    }
    if line_distance(geo, l, m) < DEGENERACY_EPS {
        return Err(Error::PreconditionViolated("L = M".into()));
    }
    let v = geo.variant;
    let a = *l.a();
    let target = m.fiber_at(&a);
    let g0 = v.inner(l.u(), &target);
    let mut out = vec![l.clone()];
    if (g0 - ell).norm() > 1e-12 {
        let plan = plan_gram_walk(v, g0, ell)?;
        let mut w = *l.u();
        for g in plan {
            w = chain_step(v, &w, &target, ell, g);
            out.push(Line::new(v, &a, &w)?);
        }
    }
    out.push(m.clone());
    Ok(out)
}

fn reach(ell: Scalar, g: Scalar) -> (Scalar, f64) {
    let s = (1.0 - ell.norm_sqr()).sqrt();
    (ell.conj() * g, s * (1.0 - g.norm_sqr()).max(0.0).sqrt())
}

fn nearest_in_disk(c: Scalar, r: f64, x: Scalar) -> Scalar {
    let d = x - c;
    if d.norm() <= r {
        x
    } else {
        c + d * (r / d.norm())
    }
}

/// Sequence `g_1, …, g_{n−1} = ℓ` of inner products with the target.
fn plan_gram_walk(variant: Variant, g0: Scalar, ell: Scalar) -> Result<Vec<Scalar>> {
    let goal = |g: Scalar| {
        let (c, r) = reach(ell, g);
        (ell - c).norm() <= r + 1e-12
    };
    if goal(g0) {
        return Ok(vec![ell]);
    }
    let (cell, offsets): (f64, Vec<Scalar>) = match variant {
        Variant::RH => (1e-3, (-4..=4).map(|n| Scalar::new(n as f64 / 4.0, 0.0)).collect()),
        Variant::CO => {
            let mut o = vec![Scalar::new(0.0, 0.0)];
            for (rho, count) in [(1.0, 24), (0.5, 12)] {
                for n in 0..count {
                    o.push(Scalar::from_polar(rho, std::f64::consts::TAU * n as f64 / count as f64));
                }
            }
            (0.02, o)
        }
    };
    let key = |g: Scalar| ((g.re / cell).round() as i64, (g.im / cell).round() as i64);
    let mut seen: HashSet<(i64, i64)> = HashSet::new();
    seen.insert(key(g0));
    let mut layers: Vec<Vec<(Scalar, usize)>> = vec![vec![(g0, usize::MAX)]];
    for _ in 0..64 {
        let mut next = Vec::new();
        for (idx, &(g, _)) in layers.last().unwrap().iter().enumerate() {
            let (c, r) = reach(ell, g);
            let aims = [nearest_in_disk(c, r, ell), nearest_in_disk(c, r, ell * ell)];
            let cands = offsets.iter().map(|o| c + o * r).chain(aims);
            for h in cands {
                if !seen.insert(key(h)) {
                    continue;
                }
                next.push((h, idx));
                if goal(h) {
                    let mut seq = vec![ell, h];
                    let mut parent = idx;
                    for layer in layers.iter().rev() {
                        if layer[parent].1 == usize::MAX {
                            break;
                        }
                        seq.push(layer[parent].0);
                        parent = layer[parent].1;
                    }
                    seq.reverse();
                    return Ok(seq);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        layers.push(next);
    }
    Err(Error::SearchFailed("no chain of lines found".into()))
}

/// Unit `w'` with `(w|w') = ℓ` and `(w'|v)` as close to `g_next` as possible.
fn chain_step(variant: Variant, w: &AlgElement, v: &AlgElement, ell: Scalar, g_next: Scalar) -> AlgElement {
    let s = (1.0 - ell.norm_sqr()).sqrt();
    let g = variant.inner(w, v);
    let vp = v.sub(&variant.scale(w, g));
    let np2 = vp.norm_sqr();
    let d = (g_next - ell.conj() * g) / s;
    let mut t = if np2 < 1e-24 { Scalar::new(0.0, 0.0) } else { d.conj() / np2 };
    let reach = t.norm() * np2.sqrt();
    if reach > 1.0 {
        t /= reach;
    }
    let z = complement_unit(variant, &[*w, vp]);
    let sigma = (1.0 - t.norm_sqr() * np2).max(0.0).sqrt();
    let y = variant.scale(&vp, t).add(&z.scale_real(sigma));
    variant.scale(w, ell).add(&y.scale_real(s))
}

/// First canonical basis vector of `Pu_F(O)` with a large component
/// orthogonal to `vs`, normalized.
fn complement_unit(variant: Variant, vs: &[AlgElement]) -> AlgElement {
    let frame = geometry::orthonormal_frame(variant, vs);
    variant
        .pure_basis(AlgebraTag::O)
        .iter()
        .map(|b| geometry::project_out(variant, b, &frame))
        .find(|r| r.norm() > 0.5)
        .map(|r| r.scale_real(1.0 / r.norm()))
        .expect("complement has dimension at least one")
}

/// Factors `α_i = (p, L_{i−1}, q, L_i, p)` along a chain with invariant `ell`,
/// and the trace from `alpha` to their concatenation.
pub fn decompose_by_invariant(geo: &Geometry, alpha: &PrimitivePath, ell: Scalar) -> Result<(Vec<PrimitivePath>, HomotopyTrace)> {
    require_nondegenerate(geo, alpha)?;
    if (alpha.invariant(geo)? - ell).norm() <= geo.tol {
        return Ok((vec![alpha.clone()], HomotopyTrace::empty(alpha.to_path())));
    }
    let chain = chain_of_lines(geo, &alpha.l, &alpha.m, ell)?;
    let factors: Vec<PrimitivePath> = chain
        .windows(2)
        .map(|w| PrimitivePath {
            p: alpha.p.clone(),
            l: w[0].clone(),
            q: alpha.q.clone(),
            m: w[1].clone(),
        })
        .collect();
    let mut b = TraceBuilder::new(geo, alpha.to_path());
    for (i, li) in chain[1..chain.len() - 1].iter().enumerate() {
        let base = 4 * i;
        b.unbacktrack(base + 2, li.clone().into())?;
        b.unbacktrack(base + 3, alpha.p.clone().into())?;
    }
    Ok((factors, b.finish()))
}

/// Concatenation of closed paths based at the same point.
pub fn concatenate(paths: &[PrimitivePath]) -> GPath {
    let mut out: GPath = vec![paths[0].p.clone().into()];
    for a in paths {
        out.extend(a.to_path().into_iter().skip(1));
    }
    out
}

/// Searches for an orthogonal path with `|ℓ| < 1` homotopic to `alpha`: a
/// shift to a random point, then an orthogonal shift if the result is not
/// orthogonal already.
pub fn search_unimodular_deform(
    geo: &Geometry,
    alpha: &PrimitivePath,
    rng: &mut Rng,
    budget: usize,
) -> Result<Option<(PrimitivePath, HomotopyTrace)>> {
    if geo.variant != Variant::CO {
        return Err(Error::PreconditionViolated("complex configuration only".into()));
    }
    require_nondegenerate(geo, alpha)?;
    if !alpha.is_orthogonal(geo) {
        return Err(Error::PreconditionViolated("path is not orthogonal".into()));
    }
    let ell = alpha.invariant(geo)?;
    if (ell.norm() - 1.0).abs() > geo.tol || (ell + 1.0).norm() <= geo.tol {
        return Err(Error::PreconditionViolated("need |ℓ| = 1 and ℓ ≠ −1".into()));
    }
    for _ in 0..budget {
        let attempt = (|| -> Result<Option<(PrimitivePath, HomotopyTrace)>> {
            let n = admissible_line_sample(geo, alpha, rng)?;
            let r = shift_target(geo, alpha, &n, rng)?;
            let (beta, _, t1) = shift(geo, alpha, &n, &r)?;
            let (gamma, trace) = if beta.is_orthogonal(geo) {
                (beta, t1)
            } else {
                let n2 = admissible_line_sample(geo, &beta, rng)?;
                let (gamma, _, t2) = orthogonal_shift(geo, &beta, &n2)?;
                (gamma, t1.then(t2))
            };
            if gamma.invariant(geo)?.norm() < 1.0 - 1e-9 {
                return Ok(Some((gamma, trace)));
            }
            Ok(None)
        })();
        if let Ok(Some(found)) = attempt {
            return Ok(Some(found));
        }
    }
    Ok(None)
}

/// Random primitive path: `p`, `q` independent, both lines on the shadow
/// `[p × q]` with independent fibers.
pub fn sample_primitive(variant: Variant, rng: &mut Rng) -> PrimitivePath {
    loop {
        let p = geometry::sample_point(variant, rng);
        let q = geometry::sample_point(variant, rng);
        let Ok(a) = variant.cross(p.rep(), q.rep()) else {
            continue;
        };
        let u = rng::unit_pure(rng, variant, AlgebraTag::O);
        let v = rng::unit_pure(rng, variant, AlgebraTag::O);
        let (Ok(l), Ok(m)) = (Line::new(variant, &a, &u), Line::new(variant, &a, &v)) else {
            continue;
        };
        let alpha = PrimitivePath { p, l, q, m };
        let geo = Geometry::with_tol(variant, 1e-9);
        if geo.point_distance(&alpha.p, &alpha.q) > 0.05 && line_distance(&geo, &alpha.l, &alpha.m) > 0.05 {
            return alpha;
        }
    }
}

/// Random closed walk based at a point, alternating through planes, lines
/// and points; `steps` planes are visited.
pub fn sample_closed_walk(variant: Variant, steps: usize, rng: &mut Rng) -> GPath {
    let p0 = geometry::sample_point(variant, rng);
    let mut walk: GPath = vec![p0.clone().into()];
    for n in 0..steps {
        let phi = geometry::sample_plane(variant, rng);
        walk.push(phi.clone().into());
        if n + 1 == steps {
            break;
        }
        if rng::uniform(rng, 0.0, 1.0) < 0.5 {
            walk.push(geometry::sample_point(variant, rng).into());
        } else {
            let a = rng::unit_pure(rng, variant, variant.algebra());
            let l = phi.line(&a).expect("pure vector of the domain");
            walk.push(l.clone().into());
            walk.push(geometry::sample_point_on(&l, rng).into());
        }
    }
    walk.push(p0.into());
    walk
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgElement as E;

    fn c(re: f64, im: f64) -> Scalar {
        Scalar::new(re, im)
    }

    fn pt(v: Variant, x: E) -> Point {
        Point::new(v, &x).unwrap()
    }

    fn ln(v: Variant, a: E, u: E) -> Line {
        Line::new(v, &a, &u).unwrap()
    }

    #[test]
    fn empty_trace_replays_to_start() {
        let geo = Geometry::new(Variant::RH);
        let start: GPath = vec![pt(Variant::RH, E::i()).into(), ln(Variant::RH, E::j(), E::j()).into()];
        let t = validate_trace(&geo, &HomotopyTrace::empty(start.clone()));
        assert!(t.ok);
        assert_eq!(t.end, start);
    }

    #[test]
    fn non_incident_witness_fails() {
        let v = Variant::RH;
        let geo = Geometry::new(v);
        let start: GPath = vec![pt(v, E::i()).into(), Plane::inclusion(v).into()];
        let bad = ElementaryMove::new(MoveKind::InsertBetween, 0, ln(v, E::i(), E::i()).into());
        let t = validate_trace(
            &geo,
            &HomotopyTrace {
                start,
                moves: vec![bad],
            },
        );
        assert!(!t.ok);
        assert_eq!(t.failure.unwrap().0, Some(0));
    }

    #[test]
    fn residue_contract_cases() {
        let v = Variant::RH;
        let geo = Geometry::new(v);
        let phi: Element = Plane::inclusion(v).into();
        let (p, q) = (pt(v, E::i()), pt(v, E::ji()));
        let t = residue_contract(&geo, &[p.clone().into(), phi.clone(), q.clone().into()], &phi).unwrap();
        assert!(t.moves.is_empty());

        // p, [j, j], ... every line [a, a] lies in the inclusion plane.
        let r = pt(v, E::ji());
        let l = ln(v, E::j(), E::j());
        let k = ln(v, E::i(), E::i());
        let walk: GPath = vec![pt(v, E::i()).into(), l.into(), pt(v, E::ji()).into(), k.into(), pt(v, E::j()).into()];
        let t = residue_contract(&geo, &walk, &phi).unwrap();
        let check = validate_trace(&geo, &t);
        assert!(check.ok);
        assert!(paths_eq(&geo, &check.end, &[pt(v, E::i()).into(), phi.clone(), pt(v, E::j()).into()]));

        let off = ln(v, E::j(), E::i());
        let walk: GPath = vec![r.into(), off.into(), pt(v, E::i()).into()];
        assert_eq!(residue_contract(&geo, &walk, &phi), Err(Error::NotInResidue(1)));
    }

    #[test]
    fn truncation_removes_planes() {
        for v in [Variant::RH, Variant::CO] {
            let geo = Geometry::new(v);
            let mut rng = rng::seeded(3);
            let b = v.pure_basis(AlgebraTag::O);
            let trivial: GPath = vec![pt(v, b[0]).into(), ln(v, b[1], b[1]).into()];
            let (out, t) = truncate_to_point_line(&geo, &trivial).unwrap();
            assert_eq!(out, trivial);
            assert!(t.moves.is_empty());
            for _ in 0..10 {
                let walk = sample_closed_walk(v, 3, &mut rng);
                let (out, t) = truncate_to_point_line(&geo, &walk).unwrap();
                assert!(out.iter().all(|e| e.kind() != Kind::Plane));
                let check = validate_trace(&geo, &t);
                assert!(check.ok, "{:?}", check.failure);
                assert!(paths_eq(&geo, &check.end, &out));
            }
        }
    }

    #[test]
    fn reduction_reaches_primitive_paths() {
        for v in [Variant::RH, Variant::CO] {
            let geo = Geometry::new(v);
            let mut rng = rng::seeded(11);
            for _ in 0..8 {
                let walk = sample_closed_walk(v, 4, &mut rng);
                let red = reduce_to_primitive(&geo, &walk).unwrap();
                let check = validate_trace(&geo, &red.trace);
                assert!(check.ok, "{:?}", check.failure);
                assert!(paths_eq(&geo, &check.end, &red.primitive.to_path()));
                assert!(red.stages.windows(2).all(|w| w[1] < w[0]), "{:?}", red.stages);
            }
            let alpha = sample_primitive(v, &mut rng);
            let red = reduce_to_primitive(&geo, &alpha.to_path()).unwrap();
            assert_eq!(red.primitive, alpha);
            assert!(red.trace.moves.is_empty());
        }
    }

    #[test]
    fn line_invariant_of_normal_form() {
        let v = Variant::RH;
        let geo = Geometry::new(v);
        let l = ln(v, E::j(), E::j());
        for m2 in [-0.8, -0.1, 0.3, 0.9] {
            let m1 = (1.0f64 - m2 * m2).sqrt();
            let m = ln(v, E::j(), E::i().scale_real(m1).add(&E::j().scale_real(m2)));
            assert!((line_invariant(&geo, &l, &m).unwrap() - c(m2, 0.0)).norm() < 1e-12);
        }
        assert!((line_invariant(&geo, &l, &l).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        let other = ln(v, E::i(), E::j());
        assert_eq!(line_invariant(&geo, &l, &other), Err(Error::DifferentShadows));
    }

    #[test]
    fn line_invariant_ignores_rescaling() {
        let v = Variant::CO;
        let geo = Geometry::new(v);
        let mut rng = rng::seeded(5);
        for _ in 0..20 {
            let alpha = sample_primitive(v, &mut rng);
            let t = rng::unit_scalar(&mut rng);
            let (a, u) = geo.rescale_line(&alpha.l, t);
            let s = rng::unit_scalar(&mut rng);
            let (b, w) = geo.rescale_line(&alpha.m, s);
            let l2 = ln(v, a, u);
            let m2 = ln(v, b, w);
            let x = line_invariant(&geo, &alpha.l, &alpha.m).unwrap();
            let y = line_invariant(&geo, &l2, &m2).unwrap();
            assert!((x - y).norm() < 1e-10);
            assert!(x.norm() <= 1.0 + 1e-12);
            assert!((x - c(1.0, 0.0)).norm() > 1e-9);
        }
    }

    #[test]
    fn admissible_lines_and_shifts() {
        for v in [Variant::RH, Variant::CO] {
            let geo = Geometry::new(v);
            let mut rng = rng::seeded(21);
            for _ in 0..25 {
                let alpha = sample_primitive(v, &mut rng);
                let n = admissible_line_sample(&geo, &alpha, &mut rng).unwrap();
                assert!(geo.coplanar(&n, &alpha.l) && geo.coplanar(&n, &alpha.m));
                assert!(geo.point_on_line(&alpha.q, &n));

                let (same, _, t0) = shift(&geo, &alpha, &n, &alpha.q).unwrap();
                assert_eq!(same, alpha);
                assert!(t0.moves.is_empty());

                let r = shift_target(&geo, &alpha, &n, &mut rng).unwrap();
                let (beta, data, t) = shift(&geo, &alpha, &n, &r).unwrap();
                assert!(!beta.is_degenerate(&geo));
                let check = validate_trace(&geo, &t);
                assert!(check.ok, "{:?}", check.failure);
                assert!(paths_eq(&geo, &check.end, &beta.to_path()));
                assert_eq!(t.moves.len(), 14);
                check_admissible(&geo, &beta, &data.n).unwrap();

                let (back, _, _) = shift(&geo, &beta, &n, &alpha.q).unwrap();
                assert!(paths_eq(&geo, &back.to_path(), &alpha.to_path()));

                let (gamma, data, t) = orthogonal_shift(&geo, &alpha, &n).unwrap();
                assert!(v.inner(gamma.p.rep(), gamma.q.rep()).norm() < 1e-10);
                assert!(geo.point_on_line(&data.r, &n));
                assert!(validate_trace(&geo, &t).ok);
                let (again, _, t) = orthogonal_shift(&geo, &gamma, &n).unwrap();
                assert_eq!(again, gamma);
                assert!(t.moves.is_empty());
            }
        }
    }

    #[test]
    fn shift_rejects_bad_input() {
        let v = Variant::RH;
        let geo = Geometry::new(v);
        let mut rng = rng::seeded(2);
        let alpha = sample_primitive(v, &mut rng);
        assert!(matches!(shift(&geo, &alpha, &alpha.l, &alpha.q), Err(Error::NotAdmissible(_))));
        let n = admissible_line_sample(&geo, &alpha, &mut rng).unwrap();
        let off = Point::new(v, n.a()).unwrap();
        assert_eq!(shift(&geo, &alpha, &n, &off).map(|x| x.0), Err(Error::PointOffLine));
        let degenerate = PrimitivePath {
            m: alpha.l.clone(),
            ..alpha.clone()
        };
        assert!(matches!(
            admissible_line_sample(&geo, &degenerate, &mut rng),
            Err(Error::PreconditionViolated(_))
        ));
    }

    #[test]
    fn orthogonal_target_is_the_cross_product() {
        let v = Variant::RH;
        let r = v.cross(&E::i(), &E::j()).unwrap();
        assert!(Point::new(v, &r).unwrap() == pt(v, E::ji()) || Point::new(v, &r.neg()).unwrap() == pt(v, E::ji()));
    }

    #[test]
    fn chain_through_orthogonal_fiber() {
        let v = Variant::RH;
        let geo = Geometry::new(v);
        let l = ln(v, E::j(), E::j());
        let m = ln(v, E::j(), E::j().neg());
        let chain = chain_of_lines(&geo, &l, &m, c(0.0, 0.0)).unwrap();
        assert_eq!(chain.len(), 3);
        assert!(geo.lines_eq(&chain[1], &ln(v, E::j(), E::i())));
        for w in chain.windows(2) {
            assert!(line_invariant(&geo, &w[0], &w[1]).unwrap().norm() < 1e-12);
        }
        assert_eq!(chain_of_lines(&geo, &l, &m, c(1.0, 0.0)), Err(Error::BadInvariant(1.0)));
    }

    #[test]
    fn chains_have_the_requested_invariant() {
        for v in [Variant::RH, Variant::CO] {
            let geo = Geometry::new(v);
            let mut rng = rng::seeded(8);
            for n in 0..30 {
                let alpha = sample_primitive(v, &mut rng);
                let ell = match v {
                    Variant::RH => c(rng::uniform(&mut rng, -0.9, 0.9), 0.0),
                    Variant::CO => rng::unit_scalar(&mut rng) * rng::uniform(&mut rng, 0.0, 0.9),
                };
                let chain = chain_of_lines(&geo, &alpha.l, &alpha.m, ell).unwrap_or_else(|e| panic!("{n}: {e}"));
                assert!(geo.lines_eq(&chain[0], &alpha.l));
                assert!(geo.lines_eq(chain.last().unwrap(), &alpha.m));
                for w in chain.windows(2) {
                    assert!((line_invariant(&geo, &w[0], &w[1]).unwrap() - ell).norm() < 1e-9);
                }
                if v == Variant::RH {
                    let g0 = alpha.invariant(&geo).unwrap().re;
                    let bound = (g0.acos() / ell.norm().acos()).ceil() as usize + 2;
                    assert!(chain.len() - 1 <= bound, "{} > {bound}", chain.len() - 1);
                }
            }
        }
    }

    #[test]
    fn decomposition_collapses_to_the_path() {
        for v in [Variant::RH, Variant::CO] {
            let geo = Geometry::new(v);
            let mut rng = rng::seeded(13);
            for _ in 0..10 {
                let alpha = sample_primitive(v, &mut rng);
                let ell = c(0.3, 0.0);
                let (factors, t) = decompose_by_invariant(&geo, &alpha, ell).unwrap();
                for f in &factors {
                    assert!((f.invariant(&geo).unwrap() - ell).norm() < 1e-9);
                }
                let check = validate_trace(&geo, &t);
                assert!(check.ok, "{:?}", check.failure);
                assert!(paths_eq(&geo, &check.end, &concatenate(&factors)));
            }
            let alpha = sample_primitive(v, &mut rng);
            let ell = alpha.invariant(&geo).unwrap();
            let (factors, t) = decompose_by_invariant(&geo, &alpha, ell).unwrap();
            assert_eq!(factors, vec![alpha]);
            assert!(t.moves.is_empty());
        }
    }

    #[test]
    fn unimodular_search() {
        let v = Variant::CO;
        let geo = Geometry::new(v);
        let t = Scalar::from_polar(1.0, 1.0);
        let alpha = PrimitivePath {
            p: pt(v, E::j()),
            l: ln(v, E::k(), E::k()),
            q: pt(v, E::kj()),
            m: ln(v, E::k(), E::k().mul_complex_right(t)),
        };
        assert!((alpha.invariant(&geo).unwrap() - t).norm() < 1e-12);
        let mut rng = rng::seeded(1);
        assert_eq!(search_unimodular_deform(&geo, &alpha, &mut rng, 0), Ok(None));
        let (beta, trace) = search_unimodular_deform(&geo, &alpha, &mut rng, 20).unwrap().unwrap();
        assert!(beta.invariant(&geo).unwrap().norm() < 1.0 - 1e-9);
        let check = validate_trace(&geo, &trace);
        assert!(check.ok);
        assert!(paths_eq(&geo, &check.end, &beta.to_path()));
        assert!(matches!(
            search_unimodular_deform(&Geometry::new(Variant::RH), &alpha, &mut rng, 1),
            Err(Error::PreconditionViolated(_))
        ));
    }
}
