//! The flat C3 geometry: points `[x]`, lines `[x, u]`, planes `φ: A → O`.

use crate::algebra::{AlgElement, AlgebraTag, Scalar, Variant};
use crate::error::{Error, Result};
use crate::morphism::{construct_from_pairs, SharpMorphism};
use crate::rng::{self, Rng};

/// Components at or below this size are skipped when fixing the phase of a
/// projective representative.
pub const PHASE_EPS: f64 = 1e-9;

/// Projective distance below which points or lines count as degenerate.
pub const DEGENERACY_EPS: f64 = 1e-7;

fn unit_phase(z: Scalar) -> Scalar {
    z / z.norm()
}

/// The unit `t` making the first substantial F-coordinate of `x·t` real and
/// positive.
fn canonical_phase(variant: Variant, x: &AlgElement) -> Scalar {
    for z in variant.coords(AlgebraTag::O, x) {
        if z.norm() > PHASE_EPS {
            return unit_phase(z.conj());
        }
    }
    Scalar::new(1.0, 0.0)
}

fn check_pure_in(variant: Variant, tag: AlgebraTag, x: &AlgElement) -> Result<()> {
    let tol = crate::tolerance() * x.norm().max(1.0);
    if !Variant::contains(tag, x, tol) || !variant.is_pure(x, tol) {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    variant: Variant,
    rep: AlgElement,
}

impl Point {
    /// Normalized, phase-fixed representative of `[x]`.
    pub fn new(variant: Variant, x: &AlgElement) -> Result<Point> {
        check_pure_in(variant, variant.algebra(), x)?;
        let x = variant.pure_part(x).normalized()?;
        let rep = variant.scale(&x, canonical_phase(variant, &x));
        Ok(Point { variant, rep })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn rep(&self) -> &AlgElement {
        &self.rep
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Line {
    variant: Variant,
    a: AlgElement,
    u: AlgElement,
}

impl Line {
    /// The class `[a, u]`, stored with unit `a`, `u` and the phase of `a` fixed.
    pub fn new(variant: Variant, a: &AlgElement, u: &AlgElement) -> Result<Line> {
        check_pure_in(variant, variant.algebra(), a)?;
        check_pure_in(variant, AlgebraTag::O, u)?;
        let a = variant.pure_part(a).normalized()?;
        let u = variant.pure_part(u).normalized()?;
        let t = canonical_phase(variant, &a);
        Ok(Line {
            variant,
            a: variant.scale(&a, t),
            u: variant.scale(&u, t),
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn a(&self) -> &AlgElement {
        &self.a
    }

    pub fn u(&self) -> &AlgElement {
        &self.u
    }

    /// Fiber of the representative whose pole is exactly `pole`; `pole` must
    /// span the same F-line as `a`.
    pub fn fiber_at(&self, pole: &AlgElement) -> AlgElement {
        let t = self.variant.inner(&self.a, pole);
        self.variant.scale(&self.u, unit_phase(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plane {
    phi: SharpMorphism,
}

impl Plane {
    pub fn new(phi: SharpMorphism) -> Plane {
        Plane { phi }
    }

    pub fn morphism(&self) -> &SharpMorphism {
        &self.phi
    }

    pub fn variant(&self) -> Variant {
        self.phi.variant()
    }

    pub fn inclusion(variant: Variant) -> Plane {
        Plane::new(SharpMorphism::inclusion(variant))
    }

    /// The line `[a, φ(a)]` of this plane.
    pub fn line(&self, a: &AlgElement) -> Result<Line> {
        Line::new(self.variant(), a, &self.phi.apply(a)?)
    }
}

/// The point set `pole^⊥` of the projective plane on `Pu_F(A)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShadowLine {
    pub pole: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kind {
    Point,
    Line,
    Plane,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Point => "point",
            Kind::Line => "line",
            Kind::Plane => "plane",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Point(Point),
    Line(Line),
    Plane(Plane),
}

impl Element {
    pub fn kind(&self) -> Kind {
        match self {
            Element::Point(_) => Kind::Point,
            Element::Line(_) => Kind::Line,
            Element::Plane(_) => Kind::Plane,
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            Element::Point(p) => p.variant(),
            Element::Line(l) => l.variant(),
            Element::Plane(x) => x.variant(),
        }
    }

    pub fn as_point(&self) -> Option<&Point> {
        match self {
            Element::Point(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_line(&self) -> Option<&Line> {
        match self {
            Element::Line(l) => Some(l),
            _ => None,
        }
    }

    pub fn as_plane(&self) -> Option<&Plane> {
        match self {
            Element::Plane(x) => Some(x),
            _ => None,
        }
    }
}

impl From<Point> for Element {
    fn from(p: Point) -> Self {
        Element::Point(p)
    }
}

impl From<Line> for Element {
    fn from(l: Line) -> Self {
        Element::Line(l)
    }
}

impl From<Plane> for Element {
    fn from(x: Plane) -> Self {
        Element::Plane(x)
    }
}

/// Whether `xs` and `ys` agree up to one common unit scalar, found from the
/// largest-modulus coordinate of `xs`.
fn proj_eq(variant: Variant, xs: &[&AlgElement], ys: &[&AlgElement], tol: f64) -> bool {
    let fx: Vec<Scalar> = xs.iter().flat_map(|x| variant.coords(AlgebraTag::O, x)).collect();
    let fy: Vec<Scalar> = ys.iter().flat_map(|y| variant.coords(AlgebraTag::O, y)).collect();
    let (idx, big) = fx
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(n, z)| (n, *z))
        .unwrap();
    if big.norm() == 0.0 || fy[idx].norm() == 0.0 {
        return false;
    }
    let t = unit_phase(fy[idx] / big);
    fx.iter().zip(&fy).all(|(x, y)| (x * t - y).norm() <= tol)
}

/// F-orthonormal frame spanning `vs` (dependent vectors are skipped).
pub fn orthonormal_frame(variant: Variant, vs: &[AlgElement]) -> Vec<AlgElement> {
    let mut frame: Vec<AlgElement> = Vec::new();
    for v in vs {
        let r = project_out(variant, v, &frame);
        if r.norm() > 1e-9 * v.norm().max(1e-300) {
            frame.push(r.scale_real(1.0 / r.norm()));
        }
    }
    frame
}

/// Removes from `x` its components along an F-orthonormal `frame`.
pub fn project_out(variant: Variant, x: &AlgElement, frame: &[AlgElement]) -> AlgElement {
    frame
        .iter()
        .fold(*x, |acc, f| acc.sub(&variant.scale(f, variant.inner(f, &acc))))
}

/// Uniform unit vector of `Pu_F(tag)` F-orthogonal to every vector of `against`.
pub fn random_unit_orthogonal(variant: Variant, tag: AlgebraTag, against: &[AlgElement], rng: &mut Rng) -> AlgElement {
    let frame = orthonormal_frame(variant, against);
    loop {
        let g = rng::gaussian_pure(rng, variant, tag);
        let r = project_out(variant, &g, &frame);
        if r.norm() > 1e-3 {
            return r.scale_real(1.0 / r.norm());
        }
    }
}

/// Incidence and derived constructions at a fixed variant and tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub variant: Variant,
    pub tol: f64,
}

impl Geometry {
    pub fn new(variant: Variant) -> Self {
        Geometry {
            variant,
            tol: crate::tolerance(),
        }
    }

    pub fn with_tol(variant: Variant, tol: f64) -> Self {
        Geometry { variant, tol }
    }

    fn inner(&self, a: &AlgElement, b: &AlgElement) -> Scalar {
        self.variant.inner(a, b)
    }

    pub fn incident(&self, e: &Element, f: &Element) -> Result<bool> {
        use Element::*;
        match (e, f) {
            (Point(_), Plane(_)) | (Plane(_), Point(_)) => Ok(true),
            (Point(p), Line(l)) | (Line(l), Point(p)) => Ok(self.point_on_line(p, l)),
            (Line(l), Plane(x)) | (Plane(x), Line(l)) => Ok(self.line_in_plane(l, x)),
            _ => Err(Error::KindMismatch),
        }
    }

    pub fn point_on_line(&self, p: &Point, l: &Line) -> bool {
        self.inner(&l.a, &p.rep).norm() <= self.tol
    }

    pub fn line_in_plane(&self, l: &Line, x: &Plane) -> bool {
        match x.phi.apply(&l.a) {
            Ok(img) => img.dist(&l.u) <= self.tol,
            Err(_) => false,
        }
    }

    /// `(a_L|a_M) = (u_L|u_M)`. Both sides change by the same factor under a
    /// rescaling of either class, so no phase alignment is needed.
    pub fn coplanar(&self, l: &Line, m: &Line) -> bool {
        (self.inner(&l.a, &m.a) - self.inner(&l.u, &m.u)).norm() <= self.tol
    }

    pub fn same_shadow(&self, l: &Line, m: &Line) -> bool {
        self.point_distance_raw(&l.a, &m.a) <= DEGENERACY_EPS
    }

    pub fn common_plane(&self, l: &Line, m: &Line) -> Result<Plane> {
        if self.same_shadow(l, m) {
            return Err(Error::SameShadow);
        }
        if !self.coplanar(l, m) {
            return Err(Error::NotCoplanar);
        }
        Ok(Plane::new(construct_from_pairs(self.variant, &l.a, &m.a, &l.u, &m.u)?))
    }

    pub fn shadow(&self, l: &Line) -> ShadowLine {
        ShadowLine {
            pole: Point {
                variant: self.variant,
                rep: l.a,
            },
        }
    }

    pub fn on_shadow(&self, p: &Point, s: &ShadowLine) -> bool {
        self.inner(&s.pole.rep, &p.rep).norm() <= self.tol
    }

    pub fn shadow_meet(&self, l: &Line, m: &Line) -> Result<Point> {
        match self.variant.cross(&l.a, &m.a) {
            Ok(w) => Point::new(self.variant, &w),
            Err(_) => Err(Error::SameShadow),
        }
    }

    /// The line `[a, φ(a)]` with `a ⟂ p, r`.
    pub fn line_in_plane_through(&self, phi: &Plane, p: &Point, r: &Point) -> Result<Line> {
        let a = self
            .variant
            .cross(&p.rep, &r.rep)
            .map_err(|_| Error::CoincidentPoints)?;
        phi.line(&a)
    }

    /// The unique line of `xi` through `p` coplanar with `l` (`p` on `l`, `l`
    /// not in `xi`).
    pub fn coplanar_line_in_plane_through(&self, xi: &Plane, p: &Point, l: &Line) -> Result<Line> {
        let v = self.variant;
        let basis = v.pure_basis(v.algebra());
        let adj = basis
            .iter()
            .zip(xi.phi.images())
            .fold(AlgElement::zero(), |acc, (b, img)| acc.add(&v.scale(b, v.inner(img, &l.u))));
        let w = l.a.sub(&adj);
        let b = v
            .cross(&p.rep, &w)
            .map_err(|_| Error::DegenerateInput("line lies in the plane".into()))?;
        xi.line(&b)
    }

    /// `sqrt(1 − |(x|y)|²)` for unit `x`, `y`.
    fn point_distance_raw(&self, x: &AlgElement, y: &AlgElement) -> f64 {
        (1.0 - self.inner(x, y).norm_sqr()).max(0.0).sqrt()
    }

    pub fn point_distance(&self, p: &Point, q: &Point) -> f64 {
        self.point_distance_raw(&p.rep, &q.rep)
    }

    pub fn points_eq(&self, p: &Point, q: &Point) -> bool {
        proj_eq(self.variant, &[&p.rep], &[&q.rep], self.tol)
    }

    pub fn lines_eq(&self, l: &Line, m: &Line) -> bool {
        proj_eq(self.variant, &[&l.a, &l.u], &[&m.a, &m.u], self.tol)
    }

    pub fn planes_eq(&self, x: &Plane, y: &Plane) -> bool {
        x.phi.approx_eq(&y.phi, self.tol)
    }

    pub fn elements_eq(&self, e: &Element, f: &Element) -> bool {
        match (e, f) {
            (Element::Point(p), Element::Point(q)) => self.points_eq(p, q),
            (Element::Line(l), Element::Line(m)) => self.lines_eq(l, m),
            (Element::Plane(x), Element::Plane(y)) => self.planes_eq(x, y),
            _ => false,
        }
    }

    /// `[a·t, u·t]`; the same line for every unit `t`.
    pub fn rescale_line(&self, l: &Line, t: Scalar) -> (AlgElement, AlgElement) {
        (self.variant.scale(&l.a, t), self.variant.scale(&l.u, t))
    }
}

pub fn sample_point(variant: Variant, rng: &mut Rng) -> Point {
    Point::new(variant, &rng::unit_pure(rng, variant, variant.algebra())).expect("unit pure vector")
}

pub fn sample_line(variant: Variant, rng: &mut Rng) -> Line {
    let a = rng::unit_pure(rng, variant, variant.algebra());
    let u = rng::unit_pure(rng, variant, AlgebraTag::O);
    Line::new(variant, &a, &u).expect("unit pure vectors")
}

/// Plane sending the first two basis vectors of `Pu_F(A)` to a random
/// orthonormal pair of `Pu_F(O)`.
pub fn sample_plane(variant: Variant, rng: &mut Rng) -> Plane {
    let basis = variant.pure_basis(variant.algebra());
    let (b1, b2) = crate::morphism::random_orthonormal_pair(variant, AlgebraTag::O, rng);
    Plane::new(construct_from_pairs(variant, &basis[0], &basis[1], &b1, &b2).expect("orthonormal data"))
}

pub fn sample(kind: Kind, variant: Variant, rng: &mut Rng) -> Element {
    match kind {
        Kind::Point => sample_point(variant, rng).into(),
        Kind::Line => sample_line(variant, rng).into(),
        Kind::Plane => sample_plane(variant, rng).into(),
    }
}

/// Random point on the shadow of `l`.
pub fn sample_point_on(l: &Line, rng: &mut Rng) -> Point {
    let v = l.variant;
    Point::new(v, &random_unit_orthogonal(v, v.algebra(), &[l.a], rng)).expect("unit pure vector")
}

/// Random point orthogonal to all of `against`.
pub fn sample_point_orthogonal(variant: Variant, against: &[&Point], rng: &mut Rng) -> Point {
    let vs: Vec<AlgElement> = against.iter().map(|p| p.rep).collect();
    Point::new(variant, &random_unit_orthogonal(variant, variant.algebra(), &vs, rng)).expect("unit pure vector")
}

/// Random line through `p`.
pub fn sample_line_through(p: &Point, rng: &mut Rng) -> Line {
    let v = p.variant;
    let a = random_unit_orthogonal(v, v.algebra(), &[p.rep], rng);
    let u = rng::unit_pure(rng, v, AlgebraTag::O);
    Line::new(v, &a, &u).expect("unit pure vectors")
}

/// Random line through two distinct points.
pub fn sample_line_through_both(p: &Point, q: &Point, rng: &mut Rng) -> Result<Line> {
    let v = p.variant;
    let a = v.cross(&p.rep, &q.rep).map_err(|_| Error::CoincidentPoints)?;
    Line::new(v, &a, &rng::unit_pure(rng, v, AlgebraTag::O))
}

/// Random plane containing `l`.
pub fn sample_plane_on(l: &Line, rng: &mut Rng) -> Plane {
    let v = l.variant;
    let a2 = random_unit_orthogonal(v, v.algebra(), &[l.a], rng);
    let b2 = random_unit_orthogonal(v, AlgebraTag::O, &[l.u], rng);
    Plane::new(construct_from_pairs(v, &l.a, &a2, &l.u, &b2).expect("orthonormal data"))
}
