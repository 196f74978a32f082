//! Seeded verification suites and their JSON reports.
//!
//! Sample `n` of a suite draws from `rng::keyed(seed, suite, n)`, so the
//! report does not depend on the execution mode or the thread count.

use serde_json::{json, Value};

use crate::algebra::{conj, mul, AlgElement, AlgebraTag, Scalar, Variant};
use crate::canonical::{self, NormalFormCase};
use crate::error::{Error, Result};
use crate::geometry::{self, Geometry, Line, Point};
use crate::homotopy::{self, PrimitivePath};
use crate::io::num;
use crate::morphism::{self, AutoPair};
use crate::par::{self, Execution};
use crate::rng::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SuiteName {
    AlgebraIdentities,
    MorphismSharpness,
    GeometryAxioms,
    ShiftLemma,
    ReducePrimitive,
    InvariantFormulas,
    ChainInvariant,
    EscapeMinusOne,
}

impl SuiteName {
    pub const ALL: [SuiteName; 8] = [
        SuiteName::AlgebraIdentities,
        SuiteName::MorphismSharpness,
        SuiteName::GeometryAxioms,
        SuiteName::ShiftLemma,
        SuiteName::ReducePrimitive,
        SuiteName::InvariantFormulas,
        SuiteName::ChainInvariant,
        SuiteName::EscapeMinusOne,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SuiteName::AlgebraIdentities => "algebra-identities",
            SuiteName::MorphismSharpness => "morphism-sharpness",
            SuiteName::GeometryAxioms => "geometry-axioms",
            SuiteName::ShiftLemma => "shift-lemma",
            SuiteName::ReducePrimitive => "reduce-primitive",
            SuiteName::InvariantFormulas => "invariant-formulas",
            SuiteName::ChainInvariant => "chain-invariant",
            SuiteName::EscapeMinusOne => "escape-minus-one",
        }
    }

    pub fn parse(s: &str) -> Result<SuiteName> {
        SuiteName::ALL
            .into_iter()
            .find(|n| n.name() == s)
            .ok_or_else(|| Error::BadConfig(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub suite: SuiteName,
    pub variant: Variant,
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
    /// Where the CLI writes the report; not used by [`run_suite`].
    pub report_path: Option<std::path::PathBuf>,
}

impl SuiteConfig {
    pub fn new(suite: SuiteName, variant: Variant, samples: u64, seed: u64, tol: f64) -> Self {
        SuiteConfig {
            suite,
            variant,
            samples,
            seed,
            tol,
            report_path: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub sample_index: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub suite: SuiteName,
    pub variant: Variant,
    pub samples: u64,
    pub seed: u64,
    pub tol: f64,
    pub passed: bool,
    pub max_residual: f64,
    pub failures: Vec<Failure>,
}

impl Report {
    pub fn to_json(&self) -> Value {
        let failures: Vec<Value> = self
            .failures
            .iter()
            .map(|f| json!({ "sample_index": f.sample_index, "detail": f.detail }))
            .collect();
        json!({
            "suite": self.suite.name(),
            "variant": self.variant.name(),
            "samples": self.samples,
            "seed": self.seed,
            "tol": num(self.tol),
            "passed": self.passed,
            "max_residual": num(self.max_residual),
            "failures": failures,
        })
    }

    pub fn to_json_string(&self) -> String {
        crate::io::to_string(&self.to_json())
    }
}

/// Outcome of one sample: the largest residual seen and the failed checks.
#[derive(Debug, Default)]
struct Check {
    residual: f64,
    failures: Vec<String>,
}

impl Check {
    fn residual(&mut self, what: &str, r: f64, limit: f64) {
        if r.is_finite() {
            self.residual = self.residual.max(r);
        }
        if r.is_nan() || r > limit {
            self.failures.push(format!("{what}: residual {r:.3e} exceeds {limit:.1e}"));
        }
    }

    fn require(&mut self, what: &str, ok: bool) {
        if !ok {
            self.failures.push(what.to_string());
        }
    }

    fn result<T>(&mut self, what: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(x) => Some(x),
            Err(e) => {
                self.failures.push(format!("{what}: {e}"));
                None
            }
        }
    }
}

pub fn run_suite(cfg: &SuiteConfig) -> Result<Report> {
    run_suite_with(cfg, Execution::default())
}

pub fn run_suite_with(cfg: &SuiteConfig, exec: Execution) -> Result<Report> {
    if cfg.samples == 0 {
        return Err(Error::BadConfig("samples must be at least 1".into()));
    }
    if !(cfg.tol > 0.0 && cfg.tol.is_finite()) {
        return Err(Error::BadConfig("tol must be positive".into()));
    }
    let sample: fn(Variant, f64, &mut Rng) -> Check = match cfg.suite {
        SuiteName::AlgebraIdentities => algebra_identities,
        SuiteName::MorphismSharpness => morphism_sharpness,
        SuiteName::GeometryAxioms => geometry_axioms,
        SuiteName::ShiftLemma => shift_lemma,
        SuiteName::ReducePrimitive => reduce_primitive,
        SuiteName::InvariantFormulas => invariant_formulas,
        SuiteName::ChainInvariant => chain_invariant,
        SuiteName::EscapeMinusOne => escape_minus_one,
    };
    let name = cfg.suite.name();
    let outcomes = par::map_indices(cfg.samples, exec, |n| {
        let mut r = rng::keyed(cfg.seed, name, n);
        sample(cfg.variant, cfg.tol, &mut r)
    });
    let max_residual = outcomes.iter().map(|c| c.residual).fold(0.0, f64::max);
    let failures: Vec<Failure> = outcomes
        .into_iter()
        .enumerate()
        .filter(|(_, c)| !c.failures.is_empty())
        .map(|(n, c)| Failure {
            sample_index: n as u64,
            detail: c.failures.join("; "),
        })
        .collect();
    Ok(Report {
        suite: cfg.suite,
        variant: cfg.variant,
        samples: cfg.samples,
        seed: cfg.seed,
        tol: cfg.tol,
        passed: failures.is_empty(),
        max_residual,
        failures,
    })
}

fn unit_quaternion(r: &mut Rng) -> AlgElement {
    rng::unit_element(r, AlgebraTag::H)
}

fn algebra_identities(variant: Variant, tol: f64, r: &mut Rng) -> Check {
    let mut c = Check::default();
    let exact = tol.min(1e-12);
    let k = AlgElement::k();
    let (u, v) = (unit_quaternion(r), unit_quaternion(r));
    let ku = mul(&k, &u);
    c.residual("(ku)(kv) = −v ū", mul(&ku, &mul(&k, &v)).dist(&mul(&v, &conj(&u)).neg()), exact);
    c.residual("u k = k ū", mul(&u, &k).dist(&mul(&k, &conj(&u))), exact);
    c.residual("(ku)v = k(vu)", mul(&ku, &v).dist(&mul(&k, &mul(&v, &u))), exact);
    c.residual("k(vu) = v̄(ku)", mul(&k, &mul(&v, &u)).dist(&mul(&conj(&v), &ku)), exact);

    let (x, y) = (rng::unit_element(r, AlgebraTag::O), rng::unit_element(r, AlgebraTag::O));
    let (sx, sy) = (x.scale_real(rng::uniform(r, 0.5, 2.0)), y.scale_real(rng::uniform(r, 0.5, 2.0)));
    c.residual("|xy| = |x||y|", (mul(&sx, &sy).norm() - sx.norm() * sy.norm()).abs(), tol);
    c.residual("x(xy) = (xx)y", mul(&x, &mul(&x, &y)).dist(&mul(&mul(&x, &x), &y)), exact);
    c.residual("(yx)x = y(xx)", mul(&mul(&y, &x), &x).dist(&mul(&y, &mul(&x, &x))), exact);
    c.residual("conj(xy) = ȳ x̄", conj(&mul(&x, &y)).dist(&mul(&conj(&y), &conj(&x))), exact);
    c.residual("conj conj x = x", conj(&conj(&x)).dist(&x), exact);
    if variant == Variant::CO {
        let (s, t) = (
            AlgElement::complex(rng::unit_scalar(r)),
            AlgElement::complex(rng::unit_scalar(r)),
        );
        c.residual("(ks)t = k(st)", mul(&mul(&k, &s), &t).dist(&mul(&k, &mul(&s, &t))), exact);
    }
    c
}

/// A pair in `Pu_F(O)` with the same Gram matrix as `(a1, a2)`.
fn matching_pair(variant: Variant, a1: &AlgElement, a2: &AlgElement, r: &mut Rng) -> Result<(AlgElement, AlgElement)> {
    let (e1, _) = morphism::orthonormalize(variant, a1, a2)?;
    let s = variant.inner(&e1, a2);
    let d = a2.sub(&variant.scale(&e1, s)).norm();
    let (f1, f2) = morphism::random_orthonormal_pair(variant, AlgebraTag::O, r);
    Ok((f1.scale_real(a1.norm()), variant.scale(&f1, s).add(&f2.scale_real(d))))
}

fn morphism_sharpness(variant: Variant, tol: f64, r: &mut Rng) -> Check {
    let mut c = Check::default();
    let tag = variant.algebra();
    let a1 = rng::unit_pure(r, variant, tag);
    let a2 = rng::unit_pure(r, variant, tag).scale_real(rng::uniform(r, 0.5, 1.5));
    let Some((b1, b2)) = c.result("matching pair", matching_pair(variant, &a1, &a2, r)) else {
        return c;
    };
    let Some(phi) = c.result("construction", morphism::construct_from_pairs(variant, &a1, &a2, &b1, &b2)) else {
        return c;
    };
    let report = morphism::is_sharp(&phi, 4, tol, r);
    c.residual("sharpness", report.max_residual(), tol);
    let hits = |phi: &morphism::SharpMorphism| -> Result<f64> { Ok(phi.apply(&a1)?.dist(&b1).max(phi.apply(&a2)?.dist(&b2))) };
    if let Some(d) = c.result("apply", hits(&phi)) {
        c.residual("φ(a_i) = b_i", d, tol);
    }
    let agree = 10.0 * tol;
    if let Some(psi) = c.result("Gram construction", morphism::construct_from_pairs_gram(variant, &a1, &a2, &b1, &b2)) {
        c.residual("orthonormal vs Gram construction", phi.max_entry_diff(&psi), agree);
    }
    if let Some(psi) = c.result("swapped construction", morphism::construct_from_pairs(variant, &a2, &a1, &b2, &b1)) {
        c.residual("pair order", phi.max_entry_diff(&psi), agree);
    }
    if variant == Variant::RH {
        if let Some(ext) = c.result("extension", morphism::extend_to_automorphism(&phi)) {
            c.residual("extension sharpness", morphism::is_sharp(&ext, 4, tol, r).max_residual(), tol);
            if let Some(d) = c.result("extension restriction", ext.restrict(AlgebraTag::H)) {
                c.residual("extension restricts to φ", d.max_entry_diff(&phi), tol);
            }
        }
    }
    c
}

fn geometry_axioms(variant: Variant, tol: f64, r: &mut Rng) -> Check {
    let mut c = Check::default();
    let geo = Geometry::with_tol(variant, tol);
    let tag = variant.algebra();

    // Lines of one plane: the condition holds and the constructed plane is it.
    let xi = geometry::sample_plane(variant, r);
    let (a, b) = morphism::random_orthonormal_pair(variant, tag, r);
    let Some(l) = c.result("line of ξ", xi.line(&a)) else {
        return c;
    };
    let Some(m) = c.result("line of ξ", xi.line(&b.add(&a.scale_real(0.3)))) else {
        return c;
    };
    c.require("lines of one plane are coplanar", geo.coplanar(&l, &m));
    if let Some(pl) = c.result("common plane", geo.common_plane(&l, &m)) {
        c.require("common plane contains both lines", geo.line_in_plane(&l, &pl) && geo.line_in_plane(&m, &pl));
        c.require("common plane is unique", geo.planes_eq(&pl, &xi));
        c.residual("common plane sharpness", morphism::is_sharp(pl.morphism(), 2, tol, r).max_residual(), tol);
    }
    // Generic pair: the condition fails and no sharp morphism carries both.
    let (l2, m2) = (geometry::sample_line(variant, r), geometry::sample_line(variant, r));
    let gap = (variant.inner(l2.a(), m2.a()) - variant.inner(l2.u(), m2.u())).norm();
    if gap > 1e-6 {
        c.require("generic pair is not coplanar", !geo.coplanar(&l2, &m2));
        c.require(
            "no plane on a generic pair",
            matches!(geo.common_plane(&l2, &m2), Err(Error::NotCoplanar))
                && morphism::construct_from_pairs(variant, l2.a(), m2.a(), l2.u(), m2.u()).is_err(),
        );
    }

    // Shadows form a projective plane.
    let (p, q) = (geometry::sample_point(variant, r), geometry::sample_point(variant, r));
    if let Some(line) = c.result("line through two points", geometry::sample_line_through_both(&p, &q, r)) {
        c.require("both points on the joining line", geo.point_on_line(&p, &line) && geo.point_on_line(&q, &line));
        if let Some(other) = c.result("second line through both", geometry::sample_line_through_both(&p, &q, r)) {
            c.require("joining shadow is unique", geo.same_shadow(&line, &other));
        }
    }
    let (s1, s2) = (geometry::sample_line(variant, r), geometry::sample_line(variant, r));
    if let Some(x) = c.result("meet of shadows", geo.shadow_meet(&s1, &s2)) {
        c.require("meet lies on both shadows", geo.point_on_line(&x, &s1) && geo.point_on_line(&x, &s2));
    }

    // Flatness.
    let any_plane = geometry::sample_plane(variant, r);
    c.require(
        "every point is incident with every plane",
        geo.incident(&p.clone().into(), &any_plane.into()).unwrap_or(false),
    );

    // Plane residue: two lines of a plane meet in one point.
    if let Some(x) = c.result("meet in plane", geo.shadow_meet(&l, &m)) {
        c.require("meet of two lines of ξ lies on both", geo.point_on_line(&x, &l) && geo.point_on_line(&x, &m));
    }

    // Point residue: one line of ξ through p coplanar with L.
    let lp = geometry::sample_line_through(&p, r);
    let chi = geometry::sample_plane(variant, r);
    if !geo.line_in_plane(&lp, &chi) {
        if let Some(mp) = c.result("coplanar line in plane", geo.coplanar_line_in_plane_through(&chi, &p, &lp)) {
            c.require(
                "constructed line is on p, in ξ, coplanar with L",
                geo.point_on_line(&p, &mp) && geo.line_in_plane(&mp, &chi) && geo.coplanar(&mp, &lp),
            );
            let other_pole = geometry::random_unit_orthogonal(variant, tag, &[*p.rep(), *mp.a()], r);
            if let Some(other) = c.result("second line of ξ on p", chi.line(&other_pole)) {
                c.require("the coplanar line is unique", !geo.coplanar(&other, &lp));
            }
        }
    }
    c
}

fn shift_lemma(variant: Variant, tol: f64, r: &mut Rng) -> Check {
    let mut c = Check::default();
    let geo = Geometry::with_tol(variant, tol);
    let alpha = homotopy::sample_primitive(variant, r);
    let Some(n) = c.result("admissible line", homotopy::admissible_line_sample(&geo, &alpha, r)) else {
        return c;
    };
    let Some(target) = c.result("shift target", homotopy::shift_target(&geo, &alpha, &n, r)) else {
        return c;
    };
    if let Some((same, _, _)) = c.result("shift to q", homotopy::shift(&geo, &alpha, &n, &alpha.q)) {
        c.residual("shift to q is the identity", path_distance(&geo, &same, &alpha), tol);
    }
    let Some((beta, data, trace)) = c.result("shift", homotopy::shift(&geo, &alpha, &n, &target)) else {
        return c;
    };
    c.require("shift to r ≠ q moves the path", path_distance(&geo, &beta, &alpha) > 1e-12);
    c.require("shift is non-degenerate", !beta.is_degenerate(&geo));
    c.require("N stays admissible", homotopy::check_admissible(&geo, &beta, &data.n).is_ok());
    if let Some((back, _, _)) = c.result("shift back", homotopy::shift(&geo, &beta, &n, &alpha.q)) {
        c.residual("shifting back returns α", path_distance(&geo, &back, &alpha), tol);
    }
    let check = homotopy::validate_trace(&geo, &trace);
    c.require(
        &format!("nine-path trace replays ({:?})", check.failure),
        check.ok && homotopy::paths_eq(&geo, &check.end, &beta.to_path()),
    );
    c
}

/// Largest squared projective distance between corresponding elements. The
/// distance itself is a square root and only resolves about 1e-8.
fn path_distance(geo: &Geometry, a: &PrimitivePath, b: &PrimitivePath) -> f64 {
    geo.point_distance(&a.p, &b.p)
        .max(geo.point_distance(&a.q, &b.q))
        .max(homotopy::line_distance(geo, &a.l, &b.l))
        .max(homotopy::line_distance(geo, &a.m, &b.m))
        .powi(2)
}

fn reduce_primitive(variant: Variant, tol: f64, r: &mut Rng) -> Check {
    let mut c = Check::default();
    let geo = Geometry::with_tol(variant, tol);
    let walk = homotopy::sample_closed_walk(variant, 4, r);
    c.require("walk has at most 12 elements", walk.len() <= 12);
    let Some(red) = c.result("reduction", homotopy::reduce_to_primitive(&geo, &walk)) else {
        return c;
    };
    let check = homotopy::validate_trace(&geo, &red.trace);
    c.require(&format!("trace replays ({:?})", check.failure), check.ok);
    c.require("trace ends at the primitive path", homotopy::paths_eq(&geo, &check.end, &red.primitive.to_path()));
    c.require(
        &format!("stages strictly decrease {:?}", red.stages),
        red.stages.windows(2).all(|w| w[1] < w[0]),
    );
    c
}

fn invariant_formulas(variant: Variant, tol: f64, r: &mut Rng) -> Check {
    let mut c = Check::default();
    let cases = match variant {
        Variant::RH => [NormalFormCase::C1_1, NormalFormCase::C1_2],
        Variant::CO => [NormalFormCase::C2_1, NormalFormCase::C2_2],
    };
    for case in cases {
        let p = canonical::sample_params(case, r);
        let closed = c.result(case.name(), canonical::closed_form_invariant(case, &p));
        let numeric = c.result(case.name(), canonical::numeric_invariant(case, &p));
        let (Some(closed), Some(numeric)) = (closed, numeric) else {
            continue;
        };
        c.residual(&format!("{} closed form vs pipeline", case.name()), (closed - numeric).norm(), tol);
        match case {
            NormalFormCase::C1_1 => {
                let margin = 2.0 * p.q1.norm_sqr().min(p.q3.norm_sqr());
                c.require(
                    "C1_1 bound −1 < ℓ < 1",
                    closed.re > -1.0 + margin - 1e-12 && closed.re < 1.0 - margin + 1e-12 && closed.re.abs() < 1.0,
                );
            }
            NormalFormCase::C2_1 => c.require("C2_1 bound |ℓ| < 1", closed.norm() < 1.0),
            NormalFormCase::C2_2 => c.require("C2_2 bound ℓ ≠ −1", (closed + 1.0).norm() > 0.0),
            NormalFormCase::C1_2 => {}
        }
    }
    c
}

pub fn chain_grid(variant: Variant) -> Vec<Scalar> {
    let mut g: Vec<Scalar> = [0.0, 0.3, -0.3, 0.6, -0.6].iter().map(|&x| Scalar::new(x, 0.0)).collect();
    if variant == Variant::CO {
        g.push(Scalar::new(0.0, 0.9));
    }
    g
}

fn chain_invariant(variant: Variant, tol: f64, r: &mut Rng) -> Check {
    let mut c = Check::default();
    let geo = Geometry::with_tol(variant, tol);
    let alpha = homotopy::sample_primitive(variant, r);
    for ell in chain_grid(variant) {
        let Some(chain) = c.result(&format!("chain for ℓ = {ell}"), homotopy::chain_of_lines(&geo, &alpha.l, &alpha.m, ell)) else {
            continue;
        };
        for w in chain.windows(2) {
            match homotopy::line_invariant(&geo, &w[0], &w[1]) {
                Ok(x) => c.residual(&format!("consecutive invariant for ℓ = {ell}"), (x - ell).norm(), tol),
                Err(e) => c.require(&format!("consecutive lines share a shadow: {e}"), false),
            }
        }
        c.require(
            "chain endpoints are L and M",
            chain[0] == alpha.l && chain.last() == Some(&alpha.m),
        );
    }
    c
}

fn escape_minus_one(variant: Variant, tol: f64, r: &mut Rng) -> Check {
    let mut c = Check::default();
    let geo = Geometry::with_tol(variant, tol);
    let g = AutoPair::sample(variant, r);
    let Some(alpha) = c.result("orthogonal path with ℓ = −1", canonical::orthogonal_minus_one_path(variant, &g)) else {
        return c;
    };
    let Some((gamma, trace)) = c.result("escape", canonical::escape_minus_one(&geo, &alpha, r)) else {
        return c;
    };
    if let Some(ell) = c.result("invariant", gamma.invariant(&geo)) {
        c.require("|ℓ(γ) + 1| > 1e-6", (ell + 1.0).norm() > 1e-6);
    }
    let check = homotopy::validate_trace(&geo, &trace);
    c.require("escape trace replays", check.ok && homotopy::paths_eq(&geo, &check.end, &gamma.to_path()));
    c
}

/// Points and lines used by the suites, exposed for the property tests.
pub fn sample_point_pair(variant: Variant, r: &mut Rng) -> (Point, Point) {
    (geometry::sample_point(variant, r), geometry::sample_point(variant, r))
}

pub fn sample_line_pair(variant: Variant, r: &mut Rng) -> (Line, Line) {
    (geometry::sample_line(variant, r), geometry::sample_line(variant, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_samples_is_a_bad_config() {
        let cfg = SuiteConfig::new(SuiteName::AlgebraIdentities, Variant::RH, 0, 1, 1e-9);
        assert!(matches!(run_suite(&cfg), Err(Error::BadConfig(_))));
        assert!(SuiteName::parse("nope").is_err());
    }

    #[test]
    fn reports_are_reproducible_and_mode_independent() {
        let cfg = SuiteConfig::new(SuiteName::AlgebraIdentities, Variant::RH, 200, 42, 1e-9);
        let a = run_suite_with(&cfg, Execution::Sequential).unwrap().to_json_string();
        let b = run_suite_with(&cfg, Execution::Parallel).unwrap().to_json_string();
        let c = run_suite(&cfg).unwrap().to_json_string();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn quick_runs_of_every_suite() {
        for suite in SuiteName::ALL {
            for v in [Variant::RH, Variant::CO] {
                let cfg = SuiteConfig::new(suite, v, 5, 3, 1e-9);
                let rep = run_suite(&cfg).unwrap();
                let expect_pass = !matches!(suite, SuiteName::EscapeMinusOne);
                if expect_pass && suite != SuiteName::InvariantFormulas {
                    assert!(rep.passed, "{} {:?}: {:?}", suite.name(), v, rep.failures);
                }
                if suite == SuiteName::InvariantFormulas && v == Variant::CO {
                    assert!(rep.passed, "{:?}", rep.failures);
                }
            }
        }
    }
}
