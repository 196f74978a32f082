//! Sharp F-morphisms `A → O`: construction from two pure pairs, validation,
//! extension to automorphisms of O, and the action of automorphism pairs on
//! the geometry.

use crate::algebra::{conj, mul, AlgElement, AlgebraTag, Scalar, Variant};
use crate::error::{Error, Result};
use crate::geometry::{Element, Line, Plane, Point};
use crate::linalg;
use crate::rng::{self, Rng};

/// A sharp morphism stored as the images of the F-basis of `Pu_F(domain)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SharpMorphism {
    variant: Variant,
    domain: AlgebraTag,
    images: Vec<AlgElement>,
}

impl SharpMorphism {
    /// Unchecked constructor; see [`is_sharp`].
    pub fn from_images(variant: Variant, domain: AlgebraTag, images: Vec<AlgElement>) -> Self {
        assert_eq!(images.len(), variant.pure_dim(domain));
        SharpMorphism {
            variant,
            domain,
            images,
        }
    }

    /// The identity of `domain`, which is the inclusion `A ⊂ O` when viewed
    /// as a plane.
    pub fn identity(variant: Variant, domain: AlgebraTag) -> Self {
        Self::from_images(variant, domain, variant.pure_basis(domain))
    }

    pub fn inclusion(variant: Variant) -> Self {
        Self::identity(variant, variant.algebra())
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn domain(&self) -> AlgebraTag {
        self.domain
    }

    pub fn images(&self) -> &[AlgElement] {
        &self.images
    }

    /// Row `n` holds the F-coordinates of the image of the n-th basis vector
    /// over the pure basis of O.
    pub fn matrix(&self) -> Vec<Vec<Scalar>> {
        self.images
            .iter()
            .map(|x| self.variant.coords(AlgebraTag::O, x))
            .collect()
    }

    pub fn from_matrix(variant: Variant, domain: AlgebraTag, rows: &[Vec<Scalar>]) -> Result<Self> {
        let n = variant.pure_dim(domain);
        let m = variant.pure_dim(AlgebraTag::O);
        if rows.len() != n || rows.iter().any(|r| r.len() != m) {
            return Err(Error::Parse(format!("expected a {n}x{m} matrix")));
        }
        let images = rows.iter().map(|r| variant.from_coords(r)).collect();
        Ok(Self::from_images(variant, domain, images))
    }

    pub fn apply(&self, x: &AlgElement) -> Result<AlgElement> {
        if !Variant::contains(self.domain, x, crate::tolerance()) {
            return Err(Error::DomainMismatch);
        }
        let v = self.variant;
        let mut out = AlgElement::complex(v.f_part(x));
        for (img, z) in self.images.iter().zip(v.coords(self.domain, x)) {
            out = out.add(&v.scale(img, z));
        }
        Ok(out)
    }

    /// Largest coordinate difference between corresponding images.
    pub fn max_entry_diff(&self, other: &SharpMorphism) -> f64 {
        if self.domain != other.domain || self.variant != other.variant {
            return f64::INFINITY;
        }
        self.images
            .iter()
            .zip(&other.images)
            .fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b)))
    }

    pub fn approx_eq(&self, other: &SharpMorphism, tol: f64) -> bool {
        self.max_entry_diff(other) <= tol
    }

    /// Whether the images stay inside the domain.
    pub fn is_endomorphism(&self, tol: f64) -> bool {
        self.images
            .iter()
            .all(|x| Variant::contains(self.domain, x, tol))
    }

    /// Restriction to the subalgebra `tag`, which must be spanned by a prefix
    /// of the pure basis.
    pub fn restrict(&self, tag: AlgebraTag) -> Result<SharpMorphism> {
        if tag > self.domain {
            return Err(Error::DomainMismatch);
        }
        let n = self.variant.pure_dim(tag);
        Ok(Self::from_images(self.variant, tag, self.images[..n].to_vec()))
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &SharpMorphism) -> Result<SharpMorphism> {
        let images = other
            .images
            .iter()
            .map(|x| self.apply(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_images(self.variant, other.domain, images))
    }

    /// Inverse of an automorphism, computed as the adjoint.
    pub fn inverse(&self) -> Result<SharpMorphism> {
        let tol = crate::tolerance();
        if !self.is_endomorphism(tol) {
            return Err(Error::DomainMismatch);
        }
        let v = self.variant;
        let basis = v.pure_basis(self.domain);
        let images = basis
            .iter()
            .map(|b| {
                basis
                    .iter()
                    .zip(&self.images)
                    .fold(AlgElement::zero(), |acc, (e, img)| {
                        acc.add(&v.scale(e, v.inner(img, b)))
                    })
            })
            .collect();
        Ok(Self::from_images(v, self.domain, images))
    }

    /// Determinant of the complex 3×3 matrix of an automorphism of O over C.
    pub fn det(&self) -> Option<Scalar> {
        if self.variant != Variant::CO || self.images.len() != 3 {
            return None;
        }
        let m = self.matrix();
        let rows = [
            [m[0][0], m[0][1], m[0][2]],
            [m[1][0], m[1][1], m[1][2]],
            [m[2][0], m[2][1], m[2][2]],
        ];
        Some(linalg::det3(&rows))
    }
}

fn check_pure(variant: Variant, tag: AlgebraTag, x: &AlgElement, tol: f64) -> Result<()> {
    if !Variant::contains(tag, x, tol) || !variant.is_pure(x, tol) {
        return Err(Error::DomainMismatch);
    }
    Ok(())
}

fn check_pairs(variant: Variant, a: [&AlgElement; 2], b: [&AlgElement; 2]) -> Result<()> {
    let tol = crate::tolerance();
    for x in a {
        check_pure(variant, variant.algebra(), x, tol)?;
    }
    for x in b {
        check_pure(variant, AlgebraTag::O, x, tol)?;
    }
    for n in 0..2 {
        if (a[n].norm() - b[n].norm()).abs() > tol {
            return Err(Error::IncompatibleData(format!("norms of pair {} differ", n + 1)));
        }
    }
    if (variant.inner(a[0], a[1]) - variant.inner(b[0], b[1])).norm() > tol {
        return Err(Error::IncompatibleData("inner products differ".into()));
    }
    variant.cross(a[0], a[1])?;
    Ok(())
}

/// F-orthonormal pair spanning the same F-plane as `(x, y)`.
pub fn orthonormalize(variant: Variant, x: &AlgElement, y: &AlgElement) -> Result<(AlgElement, AlgElement)> {
    let e1 = x.normalized()?;
    let r = y.sub(&variant.scale(&e1, variant.inner(&e1, y)));
    if r.norm() <= crate::algebra::PARALLEL_EPS * y.norm() {
        return Err(Error::DegenerateInput("proportional vectors".into()));
    }
    Ok((e1, r.normalized()?))
}

/// The unique sharp morphism `A → O` with `a1 ↦ b1`, `a2 ↦ b2`.
///
/// Both pairs are orthonormalized over F and completed by their product;
/// the morphism is the change of frame.
pub fn construct_from_pairs(
    variant: Variant,
    a1: &AlgElement,
    a2: &AlgElement,
    b1: &AlgElement,
    b2: &AlgElement,
) -> Result<SharpMorphism> {
    check_pairs(variant, [a1, a2], [b1, b2])?;
    let (e1, e2) = orthonormalize(variant, a1, a2)?;
    let (f1, f2) = orthonormalize(variant, b1, b2)?;
    let e = [e1, e2, mul(&e1, &e2)];
    let f = [f1, f2, mul(&f1, &f2)];
    let images = variant
        .pure_basis(variant.algebra())
        .iter()
        .map(|b| {
            e.iter().zip(&f).fold(AlgElement::zero(), |acc, (em, fm)| {
                acc.add(&variant.scale(fm, variant.inner(em, b)))
            })
        })
        .collect();
    Ok(SharpMorphism::from_images(variant, variant.algebra(), images))
}

/// Same morphism as [`construct_from_pairs`], obtained by sending the
/// non-orthogonal frame `(a1, a2, Pu(a1 a2))` to `(b1, b2, Pu(b1 b2))` and
/// solving the Gram system for each basis vector.
pub fn construct_from_pairs_gram(
    variant: Variant,
    a1: &AlgElement,
    a2: &AlgElement,
    b1: &AlgElement,
    b2: &AlgElement,
) -> Result<SharpMorphism> {
    check_pairs(variant, [a1, a2], [b1, b2])?;
    let g = [*a1, *a2, variant.pure_part(&mul(a1, a2))];
    let h = [*b1, *b2, variant.pure_part(&mul(b1, b2))];
    let gram: Vec<Vec<Scalar>> = g
        .iter()
        .map(|x| g.iter().map(|y| variant.inner(x, y)).collect())
        .collect();
    let images = variant
        .pure_basis(variant.algebra())
        .iter()
        .map(|b| {
            let rhs = g.iter().map(|x| variant.inner(x, b)).collect();
            let c = linalg::solve(gram.clone(), rhs)?;
            Ok(h.iter()
                .zip(&c)
                .fold(AlgElement::zero(), |acc, (hm, cm)| acc.add(&variant.scale(hm, *cm))))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SharpMorphism::from_images(variant, variant.algebra(), images))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharpnessReport {
    pub max_isometry: f64,
    pub max_multiplicativity: f64,
    /// `|det − 1|` for automorphisms over C.
    pub det_residual: Option<f64>,
    pub passed: bool,
}

impl SharpnessReport {
    pub fn max_residual(&self) -> f64 {
        self.max_isometry
            .max(self.max_multiplicativity)
            .max(self.det_residual.unwrap_or(0.0))
    }
}

/// Samples pairs of unit elements of the domain and measures how far `phi`
/// is from preserving inner products, norms, products and conjugation.
pub fn is_sharp(phi: &SharpMorphism, samples: usize, tol: f64, rng: &mut Rng) -> SharpnessReport {
    let v = phi.variant;
    let mut iso: f64 = 0.0;
    let mut mult: f64 = 0.0;
    for _ in 0..samples {
        let x = rng::unit_element(rng, phi.domain);
        let y = rng::unit_element(rng, phi.domain);
        let (px, py) = match (phi.apply(&x), phi.apply(&y)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                iso = f64::INFINITY;
                continue;
            }
        };
        iso = iso
            .max((v.inner(&px, &py) - v.inner(&x, &y)).norm())
            .max((px.norm() - x.norm()).abs());
        match phi.apply(&mul(&x, &y)) {
            Ok(pxy) => mult = mult.max(pxy.max_abs_diff(&mul(&px, &py))),
            Err(_) => mult = f64::INFINITY,
        }
        if let Ok(pcx) = phi.apply(&conj(&x)) {
            iso = iso.max(pcx.max_abs_diff(&conj(&px)));
        }
    }
    let det_residual = if phi.is_endomorphism(tol) {
        phi.det().map(|d| (d - Scalar::new(1.0, 0.0)).norm())
    } else {
        None
    };
    let passed = iso < tol && mult < tol && det_residual.is_none_or(|d| d < tol);
    SharpnessReport {
        max_isometry: iso,
        max_multiplicativity: mult,
        det_residual,
        passed,
    }
}

/// First canonical basis vector whose component orthogonal to `phi(H)` is
/// substantial, normalized.
fn default_k_prime(phi: &SharpMorphism) -> AlgElement {
    let frame: Vec<AlgElement> = std::iter::once(AlgElement::one())
        .chain(phi.images.iter().copied())
        .collect();
    for n in 0..8 {
        let b = AlgElement::basis(n);
        let r = frame
            .iter()
            .fold(b, |acc, f| acc.sub(&f.scale_real(crate::algebra::inner_r(f, &b))));
        if r.norm() > 0.5 {
            return r.scale_real(1.0 / r.norm());
        }
    }
    unreachable!("a 4-dimensional complement always has a large canonical component")
}

fn check_quaternion_source(phi: &SharpMorphism) -> Result<()> {
    if phi.variant != Variant::RH || phi.domain != AlgebraTag::H {
        return Err(Error::DomainMismatch);
    }
    let report = is_sharp(phi, 8, 1e-9, &mut rng::seeded(0x5eed));
    if !report.passed {
        return Err(Error::NotSharp(report.max_residual()));
    }
    Ok(())
}

/// Extends a sharp `H → O` to an automorphism of O by `u + k v ↦ φ(u) + k' φ(v)`
/// with a canonical unit `k' ⟂ φ(H)`.
pub fn extend_to_automorphism(phi: &SharpMorphism) -> Result<SharpMorphism> {
    check_quaternion_source(phi)?;
    Ok(extend_unchecked(phi, &default_k_prime(phi)))
}

/// As [`extend_to_automorphism`] with a caller-chosen `k'`.
pub fn extend_with(phi: &SharpMorphism, k_prime: &AlgElement) -> Result<SharpMorphism> {
    check_quaternion_source(phi)?;
    let tol = crate::tolerance();
    let frame = std::iter::once(AlgElement::one()).chain(phi.images.iter().copied());
    if (k_prime.norm() - 1.0).abs() > tol
        || frame.into_iter().any(|f| crate::algebra::inner_r(&f, k_prime).abs() > tol)
    {
        return Err(Error::IncompatibleData("k' must be a unit vector orthogonal to φ(H)".into()));
    }
    Ok(extend_unchecked(phi, k_prime))
}

fn extend_unchecked(phi: &SharpMorphism, kp: &AlgElement) -> SharpMorphism {
    let mut images = phi.images.clone();
    images.push(*kp);
    for x in &phi.images {
        images.push(mul(kp, x));
    }
    SharpMorphism::from_images(Variant::RH, AlgebraTag::O, images)
}

/// Random F-orthonormal pair in `Pu_F(tag)`.
pub fn random_orthonormal_pair(variant: Variant, tag: AlgebraTag, rng: &mut Rng) -> (AlgElement, AlgElement) {
    loop {
        let x = rng::unit_pure(rng, variant, tag);
        let y = rng::unit_pure(rng, variant, tag);
        if let Ok(p) = orthonormalize(variant, &x, &y) {
            if variant.inner(&x, &y).norm() < 0.99 {
                return p;
            }
        }
    }
}

/// Haar-like random automorphism of `A` (`SO(3)` or `SU(3)`).
pub fn sample_alpha(variant: Variant, rng: &mut Rng) -> SharpMorphism {
    let basis = variant.pure_basis(variant.algebra());
    let (b1, b2) = random_orthonormal_pair(variant, variant.algebra(), rng);
    construct_from_pairs(variant, &basis[0], &basis[1], &b1, &b2).expect("orthonormal data")
}

/// Random automorphism of O that is F-linear (`G2` or `SU(3)`).
pub fn sample_omega(variant: Variant, rng: &mut Rng) -> SharpMorphism {
    match variant {
        Variant::CO => sample_alpha(variant, rng),
        Variant::RH => {
            let (c1, c2) = random_orthonormal_pair(variant, AlgebraTag::O, rng);
            let phi = construct_from_pairs(variant, &AlgElement::i(), &AlgElement::j(), &c1, &c2)
                .expect("orthonormal data");
            let kp = loop {
                let frame: Vec<AlgElement> = std::iter::once(AlgElement::one())
                    .chain(phi.images.iter().copied())
                    .collect();
                let g = rng::gaussian_element(rng, AlgebraTag::O);
                let r = frame
                    .iter()
                    .fold(g, |acc, f| acc.sub(&f.scale_real(crate::algebra::inner_r(f, &g))));
                if r.norm() > 1e-3 {
                    break r.scale_real(1.0 / r.norm());
                }
            };
            extend_unchecked(&phi, &kp)
        }
    }
}

/// An automorphism `α` of `A` together with an automorphism `ω` of O.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoPair {
    pub alpha: SharpMorphism,
    pub omega: SharpMorphism,
}

impl AutoPair {
    pub fn identity(variant: Variant) -> Self {
        AutoPair {
            alpha: SharpMorphism::identity(variant, variant.algebra()),
            omega: SharpMorphism::identity(variant, AlgebraTag::O),
        }
    }

    pub fn sample(variant: Variant, rng: &mut Rng) -> Self {
        AutoPair {
            alpha: sample_alpha(variant, rng),
            omega: sample_omega(variant, rng),
        }
    }

    /// `self · other`, acting as `other` first.
    pub fn compose(&self, other: &AutoPair) -> Result<AutoPair> {
        Ok(AutoPair {
            alpha: self.alpha.compose(&other.alpha)?,
            omega: self.omega.compose(&other.omega)?,
        })
    }
}

/// `[x] ↦ [α x]`, `[x, u] ↦ [α x, ω u]`, `φ ↦ ω φ α⁻¹`.
pub fn act(g: &AutoPair, e: &Element) -> Result<Element> {
    let v = g.alpha.variant();
    Ok(match e {
        Element::Point(p) => Element::Point(Point::new(v, &g.alpha.apply(p.rep())?)?),
        Element::Line(l) => Element::Line(Line::new(v, &g.alpha.apply(l.a())?, &g.omega.apply(l.u())?)?),
        Element::Plane(pl) => {
            let phi = g.omega.compose(&pl.morphism().compose(&g.alpha.inverse()?)?)?;
            Element::Plane(Plane::new(phi))
        }
    })
}
