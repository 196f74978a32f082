//! Arithmetic in the tower R ⊂ C ⊂ H ⊂ O.
//!
//! Coordinates are taken over the real basis `1, i, j, ji, k, ki, kj, k(ji)`.
//! A quaternion is written `x + j y` with `x, y ∈ C = span{1, i}` and an
//! octonion is written `a + k b` with `a, b ∈ H`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Scalar = Complex64;

/// Coordinates below this (relative to the largest one) are dropped when
/// inferring the minimal algebra of an element.
pub const SNAP_EPS: f64 = 1e-14;

/// Relative size of a cross product below which two vectors count as parallel.
pub const PARALLEL_EPS: f64 = 1e-7;

pub const BASIS_NAMES: [&str; 8] = ["1", "i", "j", "ji", "k", "ki", "kj", "k(ji)"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AlgebraTag {
    R,
    C,
    H,
    O,
}

impl AlgebraTag {
    pub fn dim(self) -> usize {
        match self {
            AlgebraTag::R => 1,
            AlgebraTag::C => 2,
            AlgebraTag::H => 4,
            AlgebraTag::O => 8,
        }
    }

    fn of_dim(d: usize) -> Self {
        match d {
            0 | 1 => AlgebraTag::R,
            2 => AlgebraTag::C,
            3 | 4 => AlgebraTag::H,
            _ => AlgebraTag::O,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Field {
    Real,
    Complex,
}

/// The two admissible configurations: `F = R, A = H` and `F = C, A = O`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    RH,
    CO,
}

impl Variant {
    pub fn field(self) -> Field {
        match self {
            Variant::RH => Field::Real,
            Variant::CO => Field::Complex,
        }
    }

    /// The algebra `A` whose pure part carries the points.
    pub fn algebra(self) -> AlgebraTag {
        match self {
            Variant::RH => AlgebraTag::H,
            Variant::CO => AlgebraTag::O,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::RH => "RH",
            Variant::CO => "CO",
        }
    }

    pub fn parse(s: &str) -> Option<Variant> {
        match s {
            "RH" | "rh" => Some(Variant::RH),
            "CO" | "co" => Some(Variant::CO),
            _ => None,
        }
    }

    /// Inner product `(a|b)_F`; the imaginary part is zero in the real case.
    pub fn inner(self, a: &AlgElement, b: &AlgElement) -> Scalar {
        match self {
            Variant::RH => Scalar::new(inner_r(a, b), 0.0),
            Variant::CO => inner_c(a, b),
        }
    }

    /// `(a|b)_C`, refused in the real configuration.
    pub fn inner_c(self, a: &AlgElement, b: &AlgElement) -> Result<Scalar> {
        match self {
            Variant::RH => Err(Error::FieldMismatch),
            Variant::CO => Ok(inner_c(a, b)),
        }
    }

    /// Right scalar multiplication `a·t`. Only the real part of `t` is used in
    /// the real case.
    pub fn scale(self, a: &AlgElement, t: Scalar) -> AlgElement {
        match self {
            Variant::RH => a.scale_real(t.re),
            Variant::CO => a.mul_complex_right(t),
        }
    }

    /// Rejects scalars with an imaginary part in the real case.
    pub fn check_scalar(self, t: Scalar, tol: f64) -> Result<()> {
        if self == Variant::RH && t.im.abs() > tol {
            return Err(Error::FieldMismatch);
        }
        Ok(())
    }

    pub fn f_part(self, a: &AlgElement) -> Scalar {
        match self {
            Variant::RH => Scalar::new(a.c[0], 0.0),
            Variant::CO => Scalar::new(a.c[0], a.c[1]),
        }
    }

    /// Orthogonal projection onto `Pu_F(O)`.
    pub fn pure_part(self, a: &AlgElement) -> AlgElement {
        let mut c = a.c;
        c[0] = 0.0;
        if self == Variant::CO {
            c[1] = 0.0;
        }
        AlgElement::from_coords(c)
    }

    /// Number of F-coordinates of `Pu_F(tag)`.
    pub fn pure_dim(self, tag: AlgebraTag) -> usize {
        match (self, tag) {
            (Variant::RH, t) => t.dim() - 1,
            (Variant::CO, t) => t.dim() / 2 - 1,
        }
    }

    /// F-basis of `Pu_F(tag)`: `{i, j, ji, ...}` over R, `{j, k, kj}` over C.
    pub fn pure_basis(self, tag: AlgebraTag) -> Vec<AlgElement> {
        match self {
            Variant::RH => (1..tag.dim()).map(AlgElement::basis).collect(),
            Variant::CO => [2usize, 4, 6][..self.pure_dim(tag)]
                .iter()
                .map(|&n| AlgElement::basis(n))
                .collect(),
        }
    }

    /// F-coordinates of the pure part of `a` over `pure_basis(tag)`.
    pub fn coords(self, tag: AlgebraTag, a: &AlgElement) -> Vec<Scalar> {
        let n = self.pure_dim(tag);
        match self {
            Variant::RH => (1..=n).map(|m| Scalar::new(a.c[m], 0.0)).collect(),
            Variant::CO => {
                let z = a.complex_coords();
                z[1..=n].to_vec()
            }
        }
    }

    /// Inverse of [`Variant::coords`].
    pub fn from_coords(self, z: &[Scalar]) -> AlgElement {
        let mut c = [0.0; 8];
        match self {
            Variant::RH => {
                for (m, t) in z.iter().enumerate() {
                    c[m + 1] = t.re;
                }
            }
            Variant::CO => {
                let mut w = [Scalar::new(0.0, 0.0); 4];
                for (m, t) in z.iter().enumerate() {
                    w[m + 1] = *t;
                }
                return AlgElement::from_complex_coords(w);
            }
        }
        AlgElement::from_coords(c)
    }

    pub fn is_pure(self, a: &AlgElement, tol: f64) -> bool {
        self.f_part(a).norm() <= tol
    }

    /// Whether `a` lies in the algebra `tag`, up to `tol`.
    pub fn contains(tag: AlgebraTag, a: &AlgElement, tol: f64) -> bool {
        a.c[tag.dim()..].iter().all(|x| x.abs() <= tol)
    }

    /// F-pure cross product of two elements of `Pu_F(A)`.
    pub fn cross(self, u: &AlgElement, v: &AlgElement) -> Result<AlgElement> {
        let pu = PureVector::from_element(self, u)?;
        let pv = PureVector::from_element(self, v)?;
        Ok(pure_cross(&pu, &pv)?.to_element())
    }
}

/// An element of O together with the smallest algebra of the tower containing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgElement {
    tag: AlgebraTag,
    c: [f64; 8],
}

impl AlgElement {
    /// Builds an element, snapping negligible trailing coordinates so that the
    /// tag is the minimal algebra.
    pub fn from_coords(mut c: [f64; 8]) -> Self {
        let scale = c.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        let mut top = 0;
        for (n, x) in c.iter_mut().enumerate() {
            if x.abs() <= SNAP_EPS * scale {
                if n >= 1 {
                    *x = 0.0;
                }
            } else {
                top = n + 1;
            }
        }
        let tag = AlgebraTag::of_dim(top);
        for x in c.iter_mut().skip(tag.dim()) {
            *x = 0.0;
        }
        debug_assert!(c.iter().all(|x| x.is_finite()));
        AlgElement { tag, c }
    }

    pub fn zero() -> Self {
        Self::from_coords([0.0; 8])
    }

    pub fn one() -> Self {
        Self::basis(0)
    }

    pub fn real(x: f64) -> Self {
        let mut c = [0.0; 8];
        c[0] = x;
        Self::from_coords(c)
    }

    pub fn complex(z: Scalar) -> Self {
        let mut c = [0.0; 8];
        c[0] = z.re;
        c[1] = z.im;
        Self::from_coords(c)
    }

    pub fn quaternion(q: [f64; 4]) -> Self {
        let mut c = [0.0; 8];
        c[..4].copy_from_slice(&q);
        Self::from_coords(c)
    }

    pub fn basis(n: usize) -> Self {
        let mut c = [0.0; 8];
        c[n] = 1.0;
        Self::from_coords(c)
    }

    pub fn i() -> Self {
        Self::basis(1)
    }
    pub fn j() -> Self {
        Self::basis(2)
    }
    pub fn ji() -> Self {
        Self::basis(3)
    }
    pub fn k() -> Self {
        Self::basis(4)
    }
    pub fn ki() -> Self {
        Self::basis(5)
    }
    pub fn kj() -> Self {
        Self::basis(6)
    }
    pub fn kji() -> Self {
        Self::basis(7)
    }

    pub fn tag(&self) -> AlgebraTag {
        self.tag
    }

    pub fn coords(&self) -> &[f64; 8] {
        &self.c
    }

    /// `a + k b` from two quaternions.
    pub fn from_halves(a: &AlgElement, b: &AlgElement) -> Self {
        let mut c = [0.0; 8];
        c[..4].copy_from_slice(&a.c[..4]);
        c[4..].copy_from_slice(&b.c[..4]);
        Self::from_coords(c)
    }

    /// The quaternions `(a, b)` with `self = a + k b`.
    pub fn halves(&self) -> (AlgElement, AlgElement) {
        let mut a = [0.0; 4];
        let mut b = [0.0; 4];
        a.copy_from_slice(&self.c[..4]);
        b.copy_from_slice(&self.c[4..]);
        (AlgElement::quaternion(a), AlgElement::quaternion(b))
    }

    /// Coordinates of O as a right C-space over `{1, j, k, kj}`.
    pub fn complex_coords(&self) -> [Scalar; 4] {
        let c = &self.c;
        [
            Scalar::new(c[0], c[1]),
            Scalar::new(c[2], c[3]),
            Scalar::new(c[4], c[5]),
            Scalar::new(c[6], -c[7]),
        ]
    }

    pub fn from_complex_coords(z: [Scalar; 4]) -> Self {
        Self::from_coords([
            z[0].re, z[0].im, z[1].re, z[1].im, z[2].re, z[2].im, z[3].re, -z[3].im,
        ])
    }

    pub fn add(&self, o: &AlgElement) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c.iter()) {
            *x += y;
        }
        Self::from_coords(c)
    }

    pub fn sub(&self, o: &AlgElement) -> Self {
        let mut c = self.c;
        for (x, y) in c.iter_mut().zip(o.c.iter()) {
            *x -= y;
        }
        Self::from_coords(c)
    }

    pub fn neg(&self) -> Self {
        self.scale_real(-1.0)
    }

    pub fn scale_real(&self, t: f64) -> Self {
        let mut c = self.c;
        for x in c.iter_mut() {
            *x *= t;
        }
        Self::from_coords(c)
    }

    /// `self · t` for `t ∈ C`; agrees with `mul(self, complex(t))`.
    pub fn mul_complex_right(&self, t: Scalar) -> Self {
        let mut z = self.complex_coords();
        for w in z.iter_mut() {
            *w *= t;
        }
        Self::from_complex_coords(z)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c.iter().map(|x| x * x).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= f64::MIN_POSITIVE.sqrt() {
            return Err(Error::DegenerateInput("zero vector".into()));
        }
        Ok(self.scale_real(1.0 / n))
    }

    pub fn max_abs_diff(&self, o: &AlgElement) -> f64 {
        self.c
            .iter()
            .zip(o.c.iter())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
    }

    pub fn dist(&self, o: &AlgElement) -> f64 {
        self.sub(o).norm()
    }
}

// Complex helpers on (re, im) pairs keep the product free of allocations.
type Cx = (f64, f64);

fn cmul(a: Cx, b: Cx) -> Cx {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}
fn cconj(a: Cx) -> Cx {
    (a.0, -a.1)
}
fn csub(a: Cx, b: Cx) -> Cx {
    (a.0 - b.0, a.1 - b.1)
}
fn cadd(a: Cx, b: Cx) -> Cx {
    (a.0 + b.0, a.1 + b.1)
}

/// `(x + j y)(z + j w) = (x z − ȳ w) + j (x̄ w + y z)`.
fn qmul(p: [f64; 4], q: [f64; 4]) -> [f64; 4] {
    let (x, y) = ((p[0], p[1]), (p[2], p[3]));
    let (z, w) = ((q[0], q[1]), (q[2], q[3]));
    let s = csub(cmul(x, z), cmul(cconj(y), w));
    let t = cadd(cmul(cconj(x), w), cmul(y, z));
    [s.0, s.1, t.0, t.1]
}

fn qconj(q: [f64; 4]) -> [f64; 4] {
    [q[0], -q[1], -q[2], -q[3]]
}

/// Octonion product, `(a + k b)(c + k d) = (a c − d b̄) + k (ā d + c b)`.
///
/// This is the unique extension of the quaternion product with `k² = −1`,
/// `u k = k ū` and `(k u)(k v) = −v ū`.
pub fn mul(x: &AlgElement, y: &AlgElement) -> AlgElement {
    let a = [x.c[0], x.c[1], x.c[2], x.c[3]];
    let b = [x.c[4], x.c[5], x.c[6], x.c[7]];
    let c = [y.c[0], y.c[1], y.c[2], y.c[3]];
    let d = [y.c[4], y.c[5], y.c[6], y.c[7]];
    let ac = qmul(a, c);
    let dbb = qmul(d, qconj(b));
    let ad = qmul(qconj(a), d);
    let cb = qmul(c, b);
    let mut out = [0.0; 8];
    for n in 0..4 {
        out[n] = ac[n] - dbb[n];
        out[n + 4] = ad[n] + cb[n];
    }
    AlgElement::from_coords(out)
}

pub fn conj(a: &AlgElement) -> AlgElement {
    let mut c = a.c;
    for x in c.iter_mut().skip(1) {
        *x = -*x;
    }
    AlgElement::from_coords(c)
}

pub fn norm(a: &AlgElement) -> f64 {
    a.norm()
}

/// `Re(ā b)`, the Euclidean product of coordinates.
pub fn inner_r(a: &AlgElement, b: &AlgElement) -> f64 {
    a.c.iter().zip(b.c.iter()).map(|(x, y)| x * y).sum()
}

/// The complex part of `ā b`; conjugate-linear in `a`.
pub fn inner_c(a: &AlgElement, b: &AlgElement) -> Scalar {
    let za = a.complex_coords();
    let zb = b.complex_coords();
    za.iter().zip(zb.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// A vector of `Pu_F(A)` in F-coordinates over `{i, j, ji}` or `{j, k, kj}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureVector {
    pub variant: Variant,
    pub comps: [Scalar; 3],
}

impl PureVector {
    pub fn new(variant: Variant, comps: [Scalar; 3]) -> Self {
        PureVector { variant, comps }
    }

    pub fn real(comps: [f64; 3]) -> Self {
        PureVector {
            variant: Variant::RH,
            comps: comps.map(|x| Scalar::new(x, 0.0)),
        }
    }

    /// Refuses elements that are not pure or lie outside `A`.
    pub fn from_element(variant: Variant, a: &AlgElement) -> Result<Self> {
        let tol = crate::tolerance();
        if !Variant::contains(variant.algebra(), a, tol) {
            return Err(Error::DomainMismatch);
        }
        if !variant.is_pure(a, tol) {
            return Err(Error::DomainMismatch);
        }
        let z = variant.coords(variant.algebra(), a);
        Ok(PureVector {
            variant,
            comps: [z[0], z[1], z[2]],
        })
    }

    pub fn to_element(&self) -> AlgElement {
        self.variant.from_coords(&self.comps)
    }

    pub fn norm(&self) -> f64 {
        self.comps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Splits `a ∈ A` as `fpart·1 + pure` with `pure ⟂ F`.
pub fn pure_decompose(variant: Variant, a: &AlgElement) -> Result<(Scalar, PureVector)> {
    if !Variant::contains(variant.algebra(), a, crate::tolerance()) {
        return Err(Error::DomainMismatch);
    }
    let f = variant.f_part(a);
    let z = variant.coords(variant.algebra(), a);
    Ok((
        f,
        PureVector {
            variant,
            comps: [z[0], z[1], z[2]],
        },
    ))
}

/// Vector orthogonal to both inputs: the pure part of `u v` over R, the
/// conjugated determinant expansion over C.
pub fn pure_cross(u: &PureVector, v: &PureVector) -> Result<PureVector> {
    if u.variant != v.variant {
        return Err(Error::FieldMismatch);
    }
    let out = match u.variant {
        Variant::RH => {
            let p = mul(&u.to_element(), &v.to_element());
            let z = Variant::RH.coords(AlgebraTag::H, &p);
            [z[0], z[1], z[2]]
        }
        Variant::CO => {
            let (a, b) = (u.comps, v.comps);
            [
                (a[1] * b[2] - a[2] * b[1]).conj(),
                (a[2] * b[0] - a[0] * b[2]).conj(),
                (a[0] * b[1] - a[1] * b[0]).conj(),
            ]
        }
    };
    let w = PureVector::new(u.variant, out);
    if w.norm() <= PARALLEL_EPS * u.norm() * v.norm() {
        return Err(Error::DegenerateInput("proportional vectors".into()));
    }
    Ok(w)
}
