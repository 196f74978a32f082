//! Normal-form configurations of primitive paths with an admissible line,
//! closed-form values of the invariant after an orthogonal shift, and the
//! escape from `ℓ = −1`.

use crate::algebra::{AlgElement, AlgebraTag, Scalar, Variant};
use crate::error::{Error, Result};
use crate::geometry::{Geometry, Line, Point};
use crate::homotopy::{self, HomotopyTrace, PrimitivePath};
use crate::morphism::{act, AutoPair};
use crate::rng::{self, Rng};

const CONSTRAINT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormalFormCase {
    /// Real case, `m₂ = −1`.
    C1_1,
    /// Real case, `m₂ ≠ ±1`.
    C1_2,
    /// Complex case, `m₁ = 0`.
    C2_1,
    /// Complex case, `m₁ ≠ 0`.
    C2_2,
}

impl NormalFormCase {
    pub const ALL: [NormalFormCase; 4] = [
        NormalFormCase::C1_1,
        NormalFormCase::C1_2,
        NormalFormCase::C2_1,
        NormalFormCase::C2_2,
    ];

    pub fn variant(self) -> Variant {
        match self {
            NormalFormCase::C1_1 | NormalFormCase::C1_2 => Variant::RH,
            NormalFormCase::C2_1 | NormalFormCase::C2_2 => Variant::CO,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NormalFormCase::C1_1 => "C1_1",
            NormalFormCase::C1_2 => "C1_2",
            NormalFormCase::C2_1 => "C2_1",
            NormalFormCase::C2_2 => "C2_2",
        }
    }
}

/// Parameters of
/// `p = [e₁], L = [e₂, e₂], q = [e₁q₁ + e₃q₃], M = [e₂, e₁m₁ + e₂m₂]` with
/// `(e₁, e₂, e₃) = (i, j, ji)` or `(j, k, kj)`, and of the admissible line
/// `N = [b, x]` whose orthogonal target is determined by `(r₂, r₃)`.
///
/// `phase` is the sign (real case) or unit phase of `b₃`; `fiber` is projected
/// onto the part of `x` that the admissibility equations leave free.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormParams {
    pub q1: Scalar,
    pub q3: Scalar,
    pub m1: Scalar,
    pub m2: Scalar,
    pub r2: Scalar,
    pub r3: Scalar,
    pub phase: Scalar,
    pub fiber: AlgElement,
}

/// The configuration together with the quantities derived for `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub alpha: PrimitivePath,
    pub n: Line,
    pub b: [Scalar; 3],
    pub x: [Scalar; 3],
}

fn c(re: f64) -> Scalar {
    Scalar::new(re, 0.0)
}

fn violated(s: &str) -> Error {
    Error::ConstraintViolated(s.into())
}

/// Units `(e₁, e₂, e₃)` of the normal form.
fn frame(variant: Variant) -> [AlgElement; 3] {
    match variant {
        Variant::RH => [AlgElement::i(), AlgElement::j(), AlgElement::ji()],
        Variant::CO => [AlgElement::j(), AlgElement::k(), AlgElement::kj()],
    }
}

fn combine(variant: Variant, e: &[AlgElement; 3], z: &[Scalar; 3]) -> AlgElement {
    e.iter()
        .zip(z)
        .fold(AlgElement::zero(), |acc, (e, t)| acc.add(&variant.scale(e, *t)))
}

fn check_params(case: NormalFormCase, p: &NormalFormParams) -> Result<()> {
    let variant = case.variant();
    let all = [p.q1, p.q3, p.m1, p.m2, p.r2, p.r3, p.phase];
    if variant == Variant::RH && all.iter().any(|t| t.im != 0.0) {
        return Err(violated("real parameters required"));
    }
    if ((p.q1.norm_sqr() + p.q3.norm_sqr()) - 1.0).abs() > CONSTRAINT_EPS {
        return Err(violated("|q1|² + |q3|² ≠ 1"));
    }
    if p.q1.norm() <= CONSTRAINT_EPS || p.q3.norm() <= CONSTRAINT_EPS {
        return Err(violated("q1 q3 = 0"));
    }
    if ((p.m1.norm_sqr() + p.m2.norm_sqr()) - 1.0).abs() > CONSTRAINT_EPS {
        return Err(violated("|m1|² + |m2|² ≠ 1"));
    }
    if (p.m2 - 1.0).norm() <= CONSTRAINT_EPS {
        return Err(violated("m2 = 1 makes L = M"));
    }
    if (p.phase.norm() - 1.0).abs() > CONSTRAINT_EPS {
        return Err(violated("phase is not a unit"));
    }
    let m1_zero = p.m1.norm() <= CONSTRAINT_EPS;
    match case {
        NormalFormCase::C1_1 if (p.m2 + 1.0).norm() > CONSTRAINT_EPS => return Err(violated("C1_1 needs m2 = −1")),
        NormalFormCase::C1_2 if m1_zero => return Err(violated("C1_2 needs m2 ≠ ±1")),
        NormalFormCase::C2_1 if !m1_zero => return Err(violated("C2_1 needs m1 = 0")),
        NormalFormCase::C2_2 if m1_zero => return Err(violated("C2_2 needs m1 ≠ 0")),
        _ => {}
    }
    if matches!(case, NormalFormCase::C1_2 | NormalFormCase::C2_2) {
        if ((p.r2.norm_sqr() + p.r3.norm_sqr()) - 1.0).abs() > CONSTRAINT_EPS {
            return Err(violated("|r2|² + |r3|² ≠ 1"));
        }
        if p.r2.norm() <= CONSTRAINT_EPS {
            return Err(violated("r2 = 0"));
        }
    }
    Ok(())
}

/// Free part of `x`: the fiber projected onto the coordinates the
/// admissibility equations do not fix, normalized.
fn free_direction(case: NormalFormCase, fiber: &AlgElement) -> Result<AlgElement> {
    let mut f = *fiber.coords();
    let keep: &[usize] = match case {
        NormalFormCase::C1_1 => &[1, 3, 4, 5, 6, 7],
        NormalFormCase::C1_2 => &[3, 4, 5, 6, 7],
        NormalFormCase::C2_1 => &[2, 3, 6, 7],
        NormalFormCase::C2_2 => &[6, 7],
    };
    for (n, x) in f.iter_mut().enumerate() {
        if !keep.contains(&n) {
            *x = 0.0;
        }
    }
    AlgElement::from_coords(f)
        .normalized()
        .map_err(|_| violated("fiber has no free component"))
}

/// `b = e₁b₁ + e₂b₂ + e₃b₃` with `b ⟂ q` and unit norm.
fn line_pole(p: &NormalFormParams) -> [Scalar; 3] {
    let b3 = p.phase * p.q1 * p.r2 / (1.0 - p.q3.norm_sqr() * p.r3.norm_sqr()).sqrt();
    let b1 = -b3 * p.q3.conj() / p.q1.conj();
    let b2 = -b3 * p.r3.conj() / p.r2.conj();
    [b1, b2, b3]
}

pub fn build_configuration(case: NormalFormCase, params: &NormalFormParams) -> Result<Configuration> {
    check_params(case, params)?;
    let variant = case.variant();
    let e = frame(variant);
    let mut p = params.clone();
    if matches!(case, NormalFormCase::C1_1 | NormalFormCase::C2_1) {
        p.r2 = c(1.0);
        p.r3 = c(0.0);
    }
    let b = line_pole(&p);
    let f = free_direction(case, &params.fiber)?;
    let (x, free) = if matches!(case, NormalFormCase::C1_1 | NormalFormCase::C2_1) {
        ([c(0.0); 3], f)
    } else {
        let x1 = (1.0 - p.m2.conj()) * b[1] / p.m1.conj();
        let rest = 1.0 - x1.norm_sqr() - b[1].norm_sqr();
        if rest < 0.0 {
            return Err(violated("no unit x satisfies the admissibility equations"));
        }
        ([x1, b[1], c(0.0)], f.scale_real(rest.sqrt()))
    };
    let x_el = combine(variant, &e, &x).add(&free);
    let x = [
        variant.inner(&e[0], &x_el),
        variant.inner(&e[1], &x_el),
        variant.inner(&e[2], &x_el),
    ];
    let alpha = PrimitivePath {
        p: Point::new(variant, &e[0])?,
        l: Line::new(variant, &e[1], &e[1])?,
        q: Point::new(variant, &combine(variant, &e, &[p.q1, c(0.0), p.q3]))?,
        m: Line::new(variant, &e[1], &combine(variant, &e, &[p.m1, p.m2, c(0.0)]))?,
    };
    let n = Line::new(variant, &combine(variant, &e, &b), &x_el)?;
    Ok(Configuration { alpha, n, b, x })
}

/// Closed form of `ℓ` after the orthogonal shift along `N`. In the complex
/// case with `r₃ ≠ 0` the general expression is used.
pub fn closed_form_invariant(case: NormalFormCase, params: &NormalFormParams) -> Result<Scalar> {
    check_params(case, params)?;
    let p = params;
    let (q1s, q3s) = (p.q1.norm_sqr(), p.q3.norm_sqr());
    Ok(match case {
        NormalFormCase::C1_1 => c(p.q1.re * p.q1.re - p.q3.re * p.q3.re),
        NormalFormCase::C1_2 => {
            let (q1, q3, m2, r3) = (p.q1.re, p.q3.re, p.m2.re, p.r3.re);
            c(-r3 * r3 * q1.powi(4) * m2 * m2 / (1.0 + m2) + q3 * q3 * m2 + q1 * q1)
        }
        NormalFormCase::C2_1 => c(q1s) + p.m2.conj() * q3s,
        NormalFormCase::C2_2 => {
            let base = p.m2.conj() * q3s + q1s;
            if p.r3.norm() <= CONSTRAINT_EPS {
                return Ok(base);
            }
            let conf = build_configuration(case, p)?;
            let (b3, x3) = (conf.b[2], conf.x[2]);
            let (m1, m2) = (p.m1, p.m2);
            let m1s = m1.norm_sqr();
            let one = c(1.0);
            let bb = p.m2.conj() * q1s * ((one - m2).powi(2) * q1s - m2 * (one - m2.conj()).powi(2) * q3s) / m1s;
            let a = bb + m2 - base * (q3s + q1s * (2.0 - m2 - m2.conj()) / m1s);
            let cross = m1 * p.q1.conj() * p.q3 * q3s * p.r2 * p.r3.conj() * x3 / b3;
            base - 2.0 * cross.im + a * p.r3.norm_sqr()
        }
    })
}

/// `ℓ` of the orthogonal shift of the configuration, through the geometry
/// and homotopy modules only.
pub fn numeric_invariant(case: NormalFormCase, params: &NormalFormParams) -> Result<Scalar> {
    let conf = build_configuration(case, params)?;
    let geo = Geometry::new(case.variant());
    let (gamma, _, _) = homotopy::orthogonal_shift(&geo, &conf.alpha, &conf.n)?;
    gamma.invariant(&geo)
}

fn unit_phase(variant: Variant, rng: &mut Rng) -> Scalar {
    match variant {
        Variant::RH => c(if rng::uniform(rng, 0.0, 1.0) < 0.5 { -1.0 } else { 1.0 }),
        Variant::CO => rng::unit_scalar(rng),
    }
}

/// Random parameters away from the singular locus: `|q₁|, |q₃| ≥ 0.05`,
/// `|1 + m₂| ≥ 0.05`, `|1 − m₂| ≥ 0.05`, and for C2_2 the special
/// configuration `r₃ = 0`.
pub fn sample_params(case: NormalFormCase, rng: &mut Rng) -> NormalFormParams {
    sample_with(case, false, rng)
}

/// As [`sample_params`], with `r₃ ≠ 0` in every case that has it.
pub fn sample_params_general(case: NormalFormCase, rng: &mut Rng) -> NormalFormParams {
    sample_with(case, true, rng)
}

fn sample_with(case: NormalFormCase, general: bool, rng: &mut Rng) -> NormalFormParams {
    let v = case.variant();
    let lo = 0.05f64.asin();
    loop {
        let th = rng::uniform(rng, lo, std::f64::consts::FRAC_PI_2 - lo);
        let q1 = unit_phase(v, rng) * th.cos();
        let q3 = unit_phase(v, rng) * th.sin();
        let (m1, m2) = match case {
            NormalFormCase::C1_1 => (c(0.0), c(-1.0)),
            NormalFormCase::C2_1 => (c(0.0), rng::unit_scalar(rng)),
            _ => {
                let ph = rng::uniform(rng, lo, std::f64::consts::FRAC_PI_2);
                (unit_phase(v, rng) * ph.sin(), unit_phase(v, rng) * ph.cos())
            }
        };
        if (m2 + 1.0).norm() < 0.05 && case != NormalFormCase::C1_1 || (m2 - 1.0).norm() < 0.05 {
            continue;
        }
        let (r2, r3) = if case == NormalFormCase::C1_2 || (general && case == NormalFormCase::C2_2) {
            let s = rng::uniform(rng, -0.95, 0.95);
            (unit_phase(v, rng) * (1.0 - s * s).sqrt(), unit_phase(v, rng) * s)
        } else {
            (c(1.0), c(0.0))
        };
        let params = NormalFormParams {
            q1,
            q3,
            m1,
            m2,
            r2,
            r3,
            phase: unit_phase(v, rng),
            fiber: rng::gaussian_pure(rng, Variant::RH, AlgebraTag::O),
        };
        if let Ok(conf) = build_configuration(case, &params) {
            let rest = 1.0 - conf.x[0].norm_sqr() - conf.x[1].norm_sqr();
            if rest > 1e-2 || matches!(case, NormalFormCase::C1_1 | NormalFormCase::C2_1) {
                return params;
            }
        }
    }
}

/// `(p, L, q, M, p)` with `p ⟂ q` and `M = [a, −u]`, moved by `g`.
pub fn orthogonal_minus_one_path(variant: Variant, g: &AutoPair) -> Result<PrimitivePath> {
    let [e1, e2, e3] = frame(variant);
    let alpha = PrimitivePath {
        p: Point::new(variant, &e1)?,
        l: Line::new(variant, &e2, &e2)?,
        q: Point::new(variant, &e3)?,
        m: Line::new(variant, &e2, &e2.neg())?,
    };
    let moved: Vec<_> = alpha.to_path().iter().map(|e| act(g, e)).collect::<Result<_>>()?;
    let geo = Geometry::new(variant);
    PrimitivePath::from_path(&geo, &moved)
}

/// A non-orthogonal shift of an orthogonal path with `ℓ = −1`, followed by an
/// orthogonal shift, retried until `|ℓ + 1| > 1e-6`.
///
/// For such a path every admissible line `N = [b, x]` has `b ∝ p` (the two
/// coplanarity conditions force `(u|x) = (−u|x) = 0`, hence `b ⟂ a, q`), so
/// the shadow of `N` is `p^⊥` and no shift leaves the orthogonal class. The
/// search then ends with `SearchFailed`.
pub fn escape_minus_one(geo: &Geometry, alpha: &PrimitivePath, rng: &mut Rng) -> Result<(PrimitivePath, HomotopyTrace)> {
    if alpha.is_degenerate(geo) {
        return Err(Error::PreconditionViolated("degenerate primitive path".into()));
    }
    if !alpha.is_orthogonal(geo) {
        return Err(Error::PreconditionViolated("path is not orthogonal".into()));
    }
    if (alpha.invariant(geo)? + 1.0).norm() > geo.tol.max(1e-9) {
        return Err(Error::PreconditionViolated("invariant is not −1".into()));
    }
    let mut non_orthogonal = 0;
    for _ in 0..ESCAPE_ATTEMPTS {
        let attempt = (|| -> Result<Option<(PrimitivePath, HomotopyTrace)>> {
            let n = homotopy::admissible_line_sample(geo, alpha, rng)?;
            let r = homotopy::shift_target(geo, alpha, &n, rng)?;
            if geo.variant.inner(alpha.p.rep(), r.rep()).norm() <= geo.tol {
                return Ok(None);
            }
            let (beta, _, t1) = homotopy::shift(geo, alpha, &n, &r)?;
            let n2 = homotopy::admissible_line_sample(geo, &beta, rng)?;
            let (gamma, _, t2) = homotopy::orthogonal_shift(geo, &beta, &n2)?;
            Ok(Some((gamma, t1.then(t2))))
        })();
        if let Ok(Some((gamma, trace))) = attempt {
            non_orthogonal += 1;
            if (gamma.invariant(geo)? + 1.0).norm() > 1e-6 {
                return Ok((gamma, trace));
            }
        }
    }
    Err(Error::SearchFailed(format!(
        "{non_orthogonal} of {ESCAPE_ATTEMPTS} attempts found a non-orthogonal shift; none left ℓ = −1"
    )))
}

pub const ESCAPE_ATTEMPTS: usize = 64;

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q1: f64, q3: f64, m1: Scalar, m2: Scalar) -> NormalFormParams {
        NormalFormParams {
            q1: c(q1),
            q3: c(q3),
            m1,
            m2,
            r2: c(1.0),
            r3: c(0.0),
            phase: c(1.0),
            fiber: AlgElement::from_coords([0.0, 0.3, 0.2, 0.5, 0.1, 0.4, 0.6, 0.2]),
        }
    }

    #[test]
    fn c11_pole_solves_the_constraints() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = params(s, s, c(0.0), c(-1.0));
        let conf = build_configuration(NormalFormCase::C1_1, &p).unwrap();
        // b₁q₁ + b₃q₃ = 0 and |b| = 1, solved by hand.
        let [b1, b2, b3] = conf.b;
        assert!((b1 * p.q1 + b3 * p.q3).norm() < 1e-15);
        assert_eq!(b2, c(0.0));
        assert!((b1.norm_sqr() + b3.norm_sqr() - 1.0).abs() < 1e-15);
        assert!(closed_form_invariant(NormalFormCase::C1_1, &p).unwrap().norm() < 1e-15);
        let num = numeric_invariant(NormalFormCase::C1_1, &p).unwrap();
        assert!(num.norm() < 1e-10, "{num}");
    }

    #[test]
    fn c12_pole_relation_and_m2_zero() {
        let mut rng = rng::seeded(4);
        for _ in 0..20 {
            let p = sample_params(NormalFormCase::C1_2, &mut rng);
            let conf = build_configuration(NormalFormCase::C1_2, &p).unwrap();
            assert!((conf.b[1] + conf.b[2] * p.r3 / p.r2).norm() < 1e-14);
        }
        let p = NormalFormParams {
            q1: c(0.8),
            q3: c(0.6),
            m1: c(1.0),
            m2: c(0.0),
            r2: c(0.6),
            r3: c(0.8),
            phase: c(1.0),
            fiber: AlgElement::kj(),
        };
        assert!((closed_form_invariant(NormalFormCase::C1_2, &p).unwrap() - c(0.64)).norm() < 1e-15);
    }

    #[test]
    fn m2_equal_one_is_rejected() {
        let p = params(0.8, 0.6, c(0.0), c(1.0));
        assert!(matches!(
            build_configuration(NormalFormCase::C1_2, &p),
            Err(Error::ConstraintViolated(_))
        ));
    }

    #[test]
    fn c21_closed_form_value() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let p = params(s, s, c(0.0), Scalar::new(0.0, 1.0));
        let want = Scalar::new(0.5, -0.5);
        assert!((closed_form_invariant(NormalFormCase::C2_1, &p).unwrap() - want).norm() < 1e-15);
    }

    #[test]
    fn closed_forms_match_the_pipeline() {
        let mut rng = rng::seeded(99);
        for case in [NormalFormCase::C1_1, NormalFormCase::C2_1, NormalFormCase::C2_2] {
            for _ in 0..50 {
                let p = sample_params(case, &mut rng);
                let closed = closed_form_invariant(case, &p).unwrap();
                let num = numeric_invariant(case, &p).unwrap();
                assert!((closed - num).norm() < 1e-8, "{case:?}: {closed} vs {num}");
            }
        }
    }

    #[test]
    fn c12_matches_the_pipeline_without_r3() {
        let mut rng = rng::seeded(5);
        for _ in 0..50 {
            let mut p = sample_params(NormalFormCase::C1_2, &mut rng);
            p.r2 = c(p.r2.re.signum());
            p.r3 = c(0.0);
            let closed = closed_form_invariant(NormalFormCase::C1_2, &p).unwrap();
            let num = numeric_invariant(NormalFormCase::C1_2, &p).unwrap();
            assert!((closed - num).norm() < 1e-8, "{closed} vs {num}");
        }
    }

    #[test]
    fn general_complex_expression_depends_on_r3() {
        let mut rng = rng::seeded(6);
        let base = sample_params(NormalFormCase::C2_2, &mut rng);
        let values: Vec<Scalar> = [0.1, 0.3, 0.5]
            .iter()
            .map(|&s: &f64| {
                let mut p = base.clone();
                p.r3 = c(s);
                p.r2 = c((1.0 - s * s).sqrt());
                closed_form_invariant(NormalFormCase::C2_2, &p).unwrap()
            })
            .collect();
        assert!((values[0] - values[1]).norm() > 1e-6 && (values[1] - values[2]).norm() > 1e-6);
    }

    #[test]
    fn orthogonal_minus_one_paths_only_shift_orthogonally() {
        for v in [Variant::RH, Variant::CO] {
            let geo = Geometry::new(v);
            let mut rng = rng::seeded(17);
            for _ in 0..5 {
                let g = AutoPair::sample(v, &mut rng);
                let alpha = orthogonal_minus_one_path(v, &g).unwrap();
                assert!(alpha.is_orthogonal(&geo));
                assert!((alpha.invariant(&geo).unwrap() + 1.0).norm() < 1e-9);
                let n = homotopy::admissible_line_sample(&geo, &alpha, &mut rng).unwrap();
                assert!(geo.points_eq(&Point::new(v, n.a()).unwrap(), &alpha.p));
                let r = homotopy::shift_target(&geo, &alpha, &n, &mut rng).unwrap();
                let (beta, _, _) = homotopy::shift(&geo, &alpha, &n, &r).unwrap();
                assert!(beta.is_orthogonal(&geo));
                assert!((beta.invariant(&geo).unwrap() + 1.0).norm() < 1e-9);
                assert!(matches!(escape_minus_one(&geo, &alpha, &mut rng), Err(Error::SearchFailed(_))));
            }
            let mut rng = rng::seeded(1);
            let generic = homotopy::sample_primitive(v, &mut rng);
            assert!(matches!(
                escape_minus_one(&geo, &generic, &mut rng),
                Err(Error::PreconditionViolated(_))
            ));
        }
    }

    #[test]
    fn non_orthogonal_minus_one_leaves_minus_one() {
        // The second half of the escape on its own: from the C1_1 normal form
        // the orthogonal shift lands on q₁² − q₃².
        let mut rng = rng::seeded(23);
        let geo = Geometry::new(Variant::RH);
        for _ in 0..20 {
            let p = sample_params(NormalFormCase::C1_1, &mut rng);
            let conf = build_configuration(NormalFormCase::C1_1, &p).unwrap();
            assert!((conf.alpha.invariant(&geo).unwrap() + 1.0).norm() < 1e-12);
            let (gamma, _, trace) = homotopy::orthogonal_shift(&geo, &conf.alpha, &conf.n).unwrap();
            let ell = gamma.invariant(&geo).unwrap();
            assert!((ell + 1.0).norm() > 1e-6);
            assert!(homotopy::validate_trace(&geo, &trace).ok);
        }
    }
}
