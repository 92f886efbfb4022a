//! The property suite: every invariant of the library as a seeded,
//! budgeted check, each tied to the statement it tests.

use std::collections::BTreeSet;
use std::time::Instant;

use nclp_core::certify::{certify_l1_norm, classify_l2_isometry, l1_ratio_samples, L1Route, L2Verdict, SampleKind};
use nclp_core::maps::{amplified_map, op_norm, positivity_tests, PositivityLevel, Provenance};
use nclp_core::sequence::{dinq_disjoint_test, l1_norm_bounds, l1_norm_bounds_observed, DisjointVerdict};
use nclp_core::yeadon::{
    central_decompose, certify_separating, certify_separating_with_budget, disjointness_defect, extract_yeadon,
    random_yeadon, yeadon_synthetic, SeparatingVerdict,
};
use nclp_core::{
    disjoint, functional_calculus, lp_norm, polar, AlgebraDescriptor, Element, Interval, LinearMap, Result,
    Sampler, SpectralFunction, ToleranceConfig,
};
use serde_json::{json, Value};

use crate::{acceptance, cli, generate};

/// Counts for one property.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Counts {
    pub instances: usize,
    pub passed: usize,
    pub failed: usize,
    pub undetermined: usize,
    pub max_residual: f64,
    pub note: String,
}

impl Counts {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.instances += 1;
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.failed <= 3 {
                if !self.note.is_empty() {
                    self.note.push_str("; ");
                }
                self.note.push_str(&what());
            }
        }
    }

    fn undetermined(&mut self) {
        self.instances += 1;
        self.undetermined += 1;
    }

    fn residual(&mut self, r: f64) {
        if r > self.max_residual || r.is_nan() {
            self.max_residual = r;
        }
    }
}

type Runner = fn(&ToleranceConfig, usize) -> Result<Counts>;

pub struct Property {
    pub id: &'static str,
    pub module: &'static str,
    /// The mathematical statement the property checks.
    pub anchor: &'static str,
    pub budget: usize,
    run: Runner,
}

#[rustfmt::skip]
pub fn properties() -> Vec<Property> {
    vec![
        Property { id: "algebra.faithful_trace", module: "algebra_core", anchor: "τ(x*x) > 0 for every x ≠ 0", budget: 200, run: faithful_trace },
        Property { id: "algebra.modulus_adjoint_norms", module: "algebra_core", anchor: "‖a*‖_p = ‖a‖_p = ‖ |a| ‖_p", budget: 200, run: modulus_adjoint_norms },
        Property { id: "algebra.spectral_projections", module: "algebra_core", anchor: "χ_I(x)χ_J(x) = 0 for disjoint intervals I, J", budget: 200, run: spectral_projections },
        Property { id: "algebra.polar_roundtrip", module: "algebra_core", anchor: "x = u|x| with u*u = s(|x|)", budget: 1000, run: polar_roundtrip },
        Property { id: "lp.disjoint_moduli", module: "lp_spaces", anchor: "a, b disjoint iff |a|, |b| disjoint and |a*|, |b*| disjoint", budget: 300, run: disjoint_moduli },
        Property { id: "lp.ortho_positive", module: "lp_spaces", anchor: "for positive a, b: τ(ab) = 0 iff ab = 0", budget: 300, run: ortho_positive },
        Property { id: "lp.triangle_homogeneity", module: "lp_spaces", anchor: "‖x + y‖_p ≤ ‖x‖_p + ‖y‖_p and ‖λx‖_p = |λ| ‖x‖_p", budget: 300, run: triangle_homogeneity },
        Property { id: "seq.sandwich", module: "sequence_spaces", anchor: "lower ≤ upper, and ‖(x_n)‖ = ‖Σ x_n‖_p for positive x_n", budget: 100, run: sandwich },
        Property { id: "seq.holder_visited", module: "sequence_spaces", anchor: "‖Σ a_n b_n‖_p ≤ ‖Σ a_n a_n*‖_p^{1/2} ‖Σ b_n* b_n‖_p^{1/2}", budget: 60, run: holder_visited },
        Property { id: "seq.permutation_homogeneity", module: "sequence_spaces", anchor: "‖(x_σ(n))‖ = ‖(x_n)‖ and ‖(λ x_n)‖ = |λ| ‖(x_n)‖", budget: 40, run: permutation_homogeneity },
        Property { id: "seq.dinq_agreement", module: "sequence_spaces", anchor: "at p = 2: a, b disjoint iff ‖(a, b)‖ ≤ (‖a‖² + ‖b‖²)^{1/2}", budget: 500, run: dinq_agreement },
        Property { id: "maps.adjoint_involution", module: "operator_maps", anchor: "T** = T for the trace duality", budget: 100, run: adjoint_involution },
        Property { id: "maps.cp_all_levels", module: "operator_maps", anchor: "completely positive ⟹ 2-positive ⟹ positive", budget: 60, run: cp_all_levels },
        Property { id: "maps.amplification", module: "operator_maps", anchor: "T is 2-positive iff I_{M_2} ⊗ T is positive", budget: 48, run: amplification },
        Property { id: "yeadon.roundtrip", module: "yeadon_engine", anchor: "T = wBJ(·) with w*w = J(1) = s(B), B commuting with J(M), is unique", budget: 100, run: yeadon_roundtrip },
        Property { id: "yeadon.certificate_soundness", module: "yeadon_engine", anchor: "T separating: a, b disjoint ⟹ T(a), T(b) disjoint", budget: 20, run: certificate_soundness },
        Property { id: "yeadon.verdict_consistency", module: "yeadon_engine", anchor: "a map is separating or it is not", budget: 30, run: verdict_consistency },
        Property { id: "yeadon.central_laws", module: "yeadon_engine", anchor: "J = π + σ, π multiplicative on gN, σ anti-multiplicative on fN, g + f = J(1)", budget: 100, run: central_laws },
        Property { id: "ell1.route_soundness", module: "ell1_certify", anchor: "‖(T x_n)‖ ≤ ‖T‖_{ℓ¹} ‖(x_n)‖ with each route's bound on ‖T‖_{ℓ¹}", budget: 200, run: route_soundness },
        Property { id: "ell1.separating_sharpness", module: "ell1_certify", anchor: "T separating: ‖T‖_{ℓ¹} = ‖T‖", budget: 50, run: separating_sharpness },
        Property { id: "ell1.isometry_routes", module: "ell1_certify", anchor: "an L² isometry has a Yeadon factorization iff it preserves disjointness", budget: 40, run: isometry_routes },
        Property { id: "ell1.positive_four", module: "ell1_certify", anchor: "T positive: ‖T‖_{ℓ¹} ≤ 4‖T‖", budget: 40, run: positive_four },
        Property { id: "ell1.dinq_both_directions", module: "ell1_certify", anchor: "disjoint: ‖(a, b)‖ ≤ (‖a‖² + ‖b‖²)^{1/2}; not disjoint: strictly above", budget: 500, run: dinq_both_directions },
        Property { id: "cli.valid_json", module: "cli_and_io", anchor: "CLI output is valid JSON on every exit code except 3", budget: 1, run: cli_valid_json },
        Property { id: "cli.deterministic", module: "cli_and_io", anchor: "identical argv and seed give byte-identical output", budget: 1, run: cli_deterministic },
        Property { id: "cli.anchors", module: "cli_and_io", anchor: "every property id maps to exactly one anchor", budget: 1, run: anchors_unique },
    ]
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub only: Option<String>,
    pub acceptance: bool,
    pub timings: bool,
    pub budget: Option<usize>,
    pub cfg: ToleranceConfig,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { only: None, acceptance: false, timings: false, budget: None, cfg: ToleranceConfig::default() }
    }
}

#[derive(Debug, Clone)]
pub struct PropertyRecord {
    pub id: String,
    pub module: String,
    pub anchor: String,
    pub counts: Counts,
    pub wall_ms: u128,
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub seed: u64,
    pub records: Vec<PropertyRecord>,
    pub passed: bool,
}

impl SuiteReport {
    pub fn to_json(&self, timings: bool) -> Value {
        let records: Vec<Value> = self
            .records
            .iter()
            .map(|r| {
                let mut v = json!({
                    "id": r.id,
                    "module": r.module,
                    "anchor": r.anchor,
                    "instances": r.counts.instances,
                    "passed": r.counts.passed,
                    "failed": r.counts.failed,
                    "undetermined": r.counts.undetermined,
                    "max_residual": serde_json::Number::from_f64(r.counts.max_residual).map(Value::Number).unwrap_or(Value::Null),
                    "note": r.counts.note,
                });
                if timings {
                    v["wall_ms"] = json!(r.wall_ms as u64);
                }
                v
            })
            .collect();
        json!({
            "command": "suite",
            "seed": self.seed,
            "verdict": if self.passed { "pass" } else { "fail" },
            "properties": records,
            "failed_properties": self.records.iter().filter(|r| r.counts.failed > 0).map(|r| r.id.clone()).collect::<Vec<_>>(),
            "undetermined_total": self.records.iter().map(|r| r.counts.undetermined).sum::<usize>(),
        })
    }
}

fn selected(opts: &SuiteOptions) -> Vec<Property> {
    properties()
        .into_iter()
        .filter(|p| opts.only.as_deref().map_or(true, |f| p.id.contains(f) || p.module.contains(f)))
        .collect()
}

pub fn listing(opts: &SuiteOptions) -> Value {
    let props: Vec<Value> = selected(opts)
        .iter()
        .map(|p| json!({ "id": p.id, "module": p.module, "anchor": p.anchor, "budget": opts.budget.unwrap_or(p.budget) }))
        .collect();
    json!({ "command": "suite", "properties": props })
}

/// Runs the selected properties concurrently; records come back in
/// registration order, so the report does not depend on scheduling.
pub fn run_suite(opts: &SuiteOptions) -> SuiteReport {
    let props = selected(opts);
    let cfg = opts.cfg;
    let mut records: Vec<PropertyRecord> = std::thread::scope(|scope| {
        let handles: Vec<_> = props
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let n = opts.budget.unwrap_or(p.budget);
                let cfg_i = cfg.with_seed(cfg.derived_seed(0x5017e + i as u64));
                scope.spawn(move || {
                    let start = Instant::now();
                    let counts = (p.run)(&cfg_i, n).unwrap_or_else(|e| Counts {
                        instances: 1,
                        failed: 1,
                        note: format!("error: {e}"),
                        ..Default::default()
                    });
                    PropertyRecord {
                        id: p.id.to_string(),
                        module: p.module.to_string(),
                        anchor: p.anchor.to_string(),
                        counts,
                        wall_ms: start.elapsed().as_millis(),
                    }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("property thread panicked")).collect()
    });
    if opts.acceptance {
        let ids: Vec<usize> = (1..=acceptance::TITLES.len()).collect();
        for o in acceptance::run_all(&ids, cfg.seed) {
            records.push(PropertyRecord {
                id: format!("acceptance.{}", o.id),
                module: "acceptance".into(),
                anchor: o.title.into(),
                counts: Counts {
                    instances: o.instances,
                    passed: o.instances.saturating_sub(o.failures),
                    failed: if o.passed { 0 } else { o.failures.max(1) },
                    undetermined: o.undetermined,
                    max_residual: o.max_residual,
                    note: o.detail,
                },
                wall_ms: o.elapsed.as_millis(),
            });
        }
    }
    let passed = records.iter().all(|r| r.counts.failed == 0);
    SuiteReport { seed: cfg.seed, records, passed }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(a.abs()).max(1e-300)
}

const PS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 4.0];

fn faithful_trace(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let alg = generate::algebra(&mut s, 3, 4);
        let x = if i % 2 == 0 { s.ginibre(&alg) } else { s.low_rank(&alg, 1) }.scale_real(10f64.powi(-((i % 6) as i32)));
        if x.norm_inf() <= cfg.algebraic_tol {
            continue;
        }
        let t = (&x.adjoint() * &x).trace();
        c.check(t.re > 0.0 && t.im.abs() <= 1e-12 * t.re, || format!("τ(x*x) = {t}"));
    }
    Ok(c)
}

fn modulus_adjoint_norms(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let p = PS[i % PS.len()];
        let alg = generate::algebra(&mut s, 3, 4);
        let x = s.ginibre(&alg);
        let v = lp_norm(&x, p)?;
        let r = rel(lp_norm(&x.adjoint(), p)?, v).max(rel(lp_norm(&x.abs(), p)?, v));
        c.residual(r);
        c.check(r <= cfg.algebraic_tol, || format!("p = {p}: relative mismatch {r:.2e}"));
    }
    Ok(c)
}

fn spectral_projections(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for _ in 0..n {
        let alg = generate::algebra(&mut s, 3, 4);
        let h = s.hermitian(&alg);
        let cut = s.range(-1.0, 1.0);
        let lo = functional_calculus(&h, SpectralFunction::Indicator(Interval::below(cut)), cfg.rank_cutoff)?;
        let hi = functional_calculus(&h, SpectralFunction::Indicator(Interval::at_least(cut)), cfg.rank_cutoff)?;
        let r = (&lo * &hi).norm_inf();
        let sum_defect = (&lo + &hi).distance(&Element::identity(&alg));
        c.residual(r.max(sum_defect));
        c.check(r <= cfg.algebraic_tol && sum_defect <= cfg.algebraic_tol, || format!("χ_I χ_J = {r:.2e}"));
    }
    Ok(c)
}

fn polar_roundtrip(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let alg = generate::algebra(&mut s, 3, 4);
        let x = if i % 3 == 0 { s.low_rank(&alg, 1 + i % 2) } else { s.ginibre(&alg) };
        let pd = polar(&x, cfg.rank_cutoff);
        let scale = x.norm_inf().max(f64::MIN_POSITIVE);
        let recon = (&pd.u * &pd.modulus).distance(&x) / scale;
        let support = (&pd.u.adjoint() * &pd.u).distance(&pd.support);
        let r = recon.max(support);
        c.residual(r);
        c.check(r <= cfg.algebraic_tol, || format!("polar residual {r:.2e}"));
    }
    Ok(c)
}

fn disjoint_moduli(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    let tol = cfg.algebraic_tol;
    for i in 0..n {
        let alg = generate::algebra(&mut s, 3, 4);
        if alg.space_dim() < 2 {
            continue;
        }
        let (a, b) = if i % 2 == 0 { s.disjoint_pair(&alg) } else { generate::nondisjoint_pair(&mut s, &alg) };
        let direct = disjoint(&a, &b, tol)?;
        let moduli = disjoint(&a.abs(), &b.abs(), tol)? && disjoint(&a.adjoint().abs(), &b.adjoint().abs(), tol)?;
        c.check(direct == moduli, || format!("direct {direct} vs moduli {moduli}"));
    }
    Ok(c)
}

fn ortho_positive(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let alg = generate::algebra(&mut s, 3, 4);
        if alg.space_dim() < 2 {
            continue;
        }
        let (a, b) = if i % 2 == 0 {
            let (x, y) = s.disjoint_pair(&alg);
            (x.abs(), y.abs())
        } else {
            (s.positive(&alg), s.positive(&alg))
        };
        let scale = (a.frobenius() * b.frobenius()).max(f64::MIN_POSITIVE);
        let tau = (&a * &b).trace().norm() / scale;
        let prod = (&a * &b).norm_inf() / (a.norm_inf() * b.norm_inf()).max(f64::MIN_POSITIVE);
        let zero_trace = tau <= cfg.algebraic_tol;
        let zero_prod = prod <= cfg.algebraic_tol;
        c.check(zero_trace == zero_prod, || format!("τ(ab) = {tau:.2e}, ‖ab‖ = {prod:.2e}"));
    }
    Ok(c)
}

fn triangle_homogeneity(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let p = PS[i % PS.len()];
        let alg = generate::algebra(&mut s, 3, 4);
        let (x, y) = (s.ginibre(&alg), s.ginibre(&alg));
        let lam = s.complex_normal() * s.range(0.1, 3.0);
        let nx = lp_norm(&x, p)?;
        let tri = lp_norm(&(&x + &y), p)? - (nx + lp_norm(&y, p)?);
        let hom = rel(lp_norm(&x.scale(lam), p)?, lam.norm() * nx);
        c.residual(hom.max(tri.max(0.0) / nx));
        c.check(tri <= 1e-12 * nx && hom <= cfg.algebraic_tol, || format!("p = {p}: triangle excess {tri:.2e}, homogeneity {hom:.2e}"));
    }
    Ok(c)
}

fn sandwich(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let p = PS[i % 4];
        let alg = generate::algebra(&mut s, 2, 4);
        let len = 1 + s.index(5);
        let positive = i % 2 == 0;
        let seq = if positive { generate::positive_sequence(&mut s, &alg, len) } else { generate::general_sequence(&mut s, &alg, len) };
        let iv = l1_norm_bounds(&seq, p, cfg)?;
        let mut ok = iv.lower <= iv.upper;
        if positive {
            let exact = lp_norm(&seq.sum(), p)?;
            let r = rel(iv.upper, exact).max(rel(iv.lower, exact));
            c.residual(r);
            ok &= r <= cfg.opt_tol;
        }
        c.check(ok, || format!("p = {p}: [{}, {}]", iv.lower, iv.upper));
    }
    Ok(c)
}

fn holder_visited(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let p = PS[i % 4];
        let alg = generate::algebra(&mut s, 2, 3);
        let len = 2 + s.index(4);
        let seq = generate::general_sequence(&mut s, &alg, len);
        let mut worst = 0.0f64;
        l1_norm_bounds_observed(&seq, p, cfg, &mut |f| {
            let prods = f.products();
            let total = prods.iter().skip(1).fold(prods[0].clone(), |acc, x| &acc + x);
            let lhs = lp_norm(&total, p).unwrap_or(f64::INFINITY);
            let rhs = f.value(p);
            worst = worst.max((lhs - rhs) / rhs.max(1e-300));
        })?;
        c.residual(worst.max(0.0));
        c.check(worst <= cfg.algebraic_tol, || format!("p = {p}: relative excess {worst:.2e}"));
    }
    Ok(c)
}

fn permutation_homogeneity(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let p = PS[i % 4];
        let alg = generate::algebra(&mut s, 2, 3);
        let len = 2 + s.index(4);
        let seq = generate::general_sequence(&mut s, &alg, len);
        let mut order: Vec<usize> = (0..len).collect();
        for k in (1..len).rev() {
            order.swap(k, s.index(k + 1));
        }
        let lam = s.complex_normal() * s.range(0.2, 3.0);
        let base = l1_norm_bounds(&seq, p, cfg)?;
        let perm = l1_norm_bounds(&seq.permuted(&order)?, p, cfg)?;
        let scaled = l1_norm_bounds(&seq.scale(lam), p, cfg)?;
        // endpoints may differ by the optimization gap; intervals must overlap
        let tol = cfg.opt_tol * base.upper + 1e-12;
        let overlap = |lo: f64, hi: f64| lo <= base.upper + tol && hi >= base.lower - tol;
        let l = lam.norm();
        let ok = overlap(perm.lower, perm.upper) && overlap(scaled.lower / l, scaled.upper / l);
        let r = rel(perm.upper, base.upper).max(rel(scaled.upper / l, base.upper));
        c.residual(r);
        c.check(ok && r <= 10.0 * cfg.opt_tol, || format!("p = {p}: base {:?}, permuted {:?}", (base.lower, base.upper), (perm.lower, perm.upper)));
    }
    Ok(c)
}

fn dinq_agreement(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let alg = generate::algebra(&mut s, 3, 3);
        if alg.space_dim() < 2 {
            continue;
        }
        let (a, b) = if i % 2 == 0 { s.disjoint_pair(&alg) } else { generate::nondisjoint_pair(&mut s, &alg) };
        let r = dinq_disjoint_test(&a, &b, cfg)?;
        if r.verdict == DisjointVerdict::Undetermined {
            c.undetermined();
        } else {
            c.check(r.consistent(), || format!("verdict {:?} but algebraic {}", r.verdict, r.algebraic));
        }
    }
    c.note = format!("{}undetermined rate {:.1}%", if c.note.is_empty() { "" } else { "; " }, 100.0 * c.undetermined as f64 / c.instances.max(1) as f64);
    Ok(c)
}

fn adjoint_involution(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let p = PS[i % PS.len()];
        let alg = generate::algebra(&mut s, 3, 3);
        let cod = generate::algebra(&mut s, 3, 3);
        let (dom, cod) = if i % 2 == 0 {
            let w = s.range(0.5, 2.0);
            let eq = |a: &nclp_core::Algebra| AlgebraDescriptor::new(a.blocks().iter().map(|b| nclp_core::Block::new(b.dim, w)).collect());
            (eq(&alg)?, eq(&cod)?)
        } else {
            (alg, cod)
        };
        let t = generate::arbitrary_map(&mut s, &dom, &cod, p)?;
        let back = t.adjoint_map(p)?.adjoint_map(nclp_core::conjugate_exponent(p))?;
        let amax = |m: &nalgebra::DMatrix<nclp_core::C64>| m.iter().fold(0.0f64, |acc, z| acc.max(z.norm()));
        let r = amax(&(back.action() - t.action())) / amax(t.action());
        c.residual(r);
        c.check(r <= 1e-12 && rel(back.exponent(), p) <= 1e-14, || format!("‖T** − T‖ = {r:.2e}"));
    }
    Ok(c)
}

fn cp_all_levels(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let p = 2.0;
        let map = match i % 4 {
            0 => {
                let (dom, cod) = (generate::algebra(&mut s, 2, 3), generate::algebra(&mut s, 2, 3));
                generate::cp_contraction(&mut s, &dom, &cod, p)?
            }
            1 => {
                let alg = generate::algebra(&mut s, 2, 3);
                let us: Vec<Element> = (0..3).map(|_| s.unitary(&alg)).collect();
                let mut probs: Vec<f64> = (0..3).map(|_| s.range(0.1, 1.0)).collect();
                let tot: f64 = probs.iter().sum();
                probs.iter_mut().for_each(|q| *q /= tot);
                let last = 1.0 - probs[..2].iter().sum::<f64>();
                probs[2] = last;
                LinearMap::mixed_unitary(&us, &probs, p)?
            }
            2 => LinearMap::depolarizing(&generate::algebra(&mut s, 2, 3), s.uniform(), p)?,
            _ => {
                let data = random_yeadon(&mut s, 2, true, p)?;
                let j = data.j.clone();
                let only_hom = central_decompose(&j, cfg)?.f.frobenius() <= 1e-9;
                if !only_hom {
                    continue;
                }
                j
            }
        };
        for stripped in [false, true] {
            let m = if stripped { map.clone().with_provenance(Provenance::NONE) } else { map.clone() };
            let ok = [PositivityLevel::Positive, PositivityLevel::TwoPositive, PositivityLevel::CompletelyPositive]
                .iter()
                .all(|&l| positivity_tests(&m, l, cfg).is_certified());
            c.check(ok, || format!("map #{i} (provenance stripped: {stripped}) not certified at every level"));
        }
    }
    Ok(c)
}

/// The constructor library used for the 2-positivity cross-check.
fn constructor_library(s: &mut Sampler, i: usize, cfg: &ToleranceConfig) -> Result<LinearMap> {
    let p = 2.0;
    Ok(match i % 8 {
        0 => LinearMap::transpose(&generate::noncommutative_algebra(s, 2, 3), p)?,
        1 => LinearMap::reduction(2 + s.index(2), p)?,
        2 => LinearMap::depolarizing(&generate::algebra(s, 2, 3), s.uniform(), p)?,
        3 => {
            let (dom, cod) = (generate::algebra(s, 2, 3), generate::algebra(s, 2, 3));
            generate::cp_contraction(s, &dom, &cod, p)?
        }
        4 => generate::positive_non_two_positive(s, p, cfg)?,
        5 => LinearMap::trace_shift(2 + s.index(2), s.range(-1.0, 2.0), p)?,
        6 => {
            let alg = generate::algebra(s, 2, 2);
            generate::arbitrary_map(s, &alg, &alg, p)?
        }
        _ => {
            let hom = s.coin();
            let data = random_yeadon(s, 2, hom, p)?;
            yeadon_synthetic(&data.w, &data.b, &data.j, cfg)?
        }
    })
}

fn amplification(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let t = constructor_library(&mut s, i, cfg)?.with_provenance(Provenance::NONE);
        let direct = positivity_tests(&t, PositivityLevel::TwoPositive, cfg);
        let amp = amplified_map(&t, 2)?;
        let lifted = positivity_tests(&amp, PositivityLevel::Positive, cfg);
        if !direct.is_falsified() && !direct.is_certified() && !lifted.is_falsified() && !lifted.is_certified() {
            c.undetermined();
            continue;
        }
        c.check(direct.is_falsified() == lifted.is_falsified(), || {
            format!("library map #{i}: 2-positivity falsified {} but amplification falsified {}", direct.is_falsified(), lifted.is_falsified())
        });
    }
    Ok(c)
}

fn yeadon_roundtrip(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let data = random_yeadon(&mut s, 1 + i % 3, i % 3 == 0, 2.0)?;
        let t = yeadon_synthetic(&data.w, &data.b, &data.j, cfg)?;
        match extract_yeadon(&t, cfg) {
            Ok(triple) => {
                let d = triple.distance(&data.w, &data.b, &data.j);
                c.residual(d);
                c.check(d <= 10.0 * cfg.algebraic_tol, || format!("map #{i}: distance {d:.2e}"));
            }
            Err(f) => c.check(false, || format!("map #{i}: extraction failed at {}", f.condition)),
        }
    }
    Ok(c)
}

fn certificate_soundness(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let data = random_yeadon(&mut s, 2 + i % 2, false, 2.0)?;
        let t = yeadon_synthetic(&data.w, &data.b, &data.j, cfg)?;
        if !matches!(certify_separating(&t, cfg), SeparatingVerdict::Certified(_)) {
            c.check(false, || format!("map #{i} not certified"));
            continue;
        }
        let dom = t.domain().clone();
        let dims: usize = dom.blocks().iter().map(|b| b.dim).sum();
        if dims < 2 {
            continue;
        }
        let mut worst = 0.0f64;
        for _ in 0..500 {
            let (a, b) = s.disjoint_pair(&dom);
            worst = worst.max(disjointness_defect(&t, &a, &b));
        }
        c.residual(worst);
        c.check(worst <= cfg.algebraic_tol.sqrt(), || format!("map #{i}: image defect {worst:.2e} on a disjoint pair"));
    }
    c.note = format!("{}500 disjoint pairs per certified map", if c.note.is_empty() { "" } else { "; " });
    Ok(c)
}

fn verdict_consistency(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let t = match i % 4 {
            0 => {
                let data = random_yeadon(&mut s, 2, false, 2.0)?;
                yeadon_synthetic(&data.w, &data.b, &data.j, cfg)?
            }
            1 => LinearMap::rotation_mixing(s.range(-3.0, 3.0), 2.0)?,
            2 => generate::positive_non_two_positive(&mut s, 2.0, cfg)?,
            _ => {
                let alg = generate::algebra(&mut s, 2, 2);
                generate::arbitrary_map(&mut s, &alg, &alg, 2.0)?
            }
        };
        let (mut cert, mut fals) = (false, false);
        for k in 0..3 {
            match certify_separating_with_budget(&t, &cfg.with_seed(cfg.derived_seed(k)), 16) {
                SeparatingVerdict::Certified(_) => cert = true,
                SeparatingVerdict::Falsified { .. } => fals = true,
                SeparatingVerdict::Undetermined { .. } => {}
            }
        }
        c.check(!(cert && fals), || format!("map #{i} both certified and falsified"));
    }
    Ok(c)
}

fn central_laws(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let data = random_yeadon(&mut s, 1 + i % 3, true, 2.0)?;
        let j = &data.j;
        let cd = central_decompose(j, cfg)?;
        let dom = j.domain().clone();
        let one = j.apply(&Element::identity(&dom))?;
        let mut r = (&cd.g * &cd.f).norm_inf();
        r = r.max((&cd.g + &cd.f).distance(&one));
        for _ in 0..3 {
            let (x, y) = (s.ginibre(&dom), s.ginibre(&dom));
            let scale = x.norm_inf() * y.norm_inf();
            let xy = &x * &y;
            let (px, py, pxy) = (cd.pi.apply(&x)?, cd.pi.apply(&y)?, cd.pi.apply(&xy)?);
            let (sx, sy, sxy) = (cd.sigma.apply(&x)?, cd.sigma.apply(&y)?, cd.sigma.apply(&xy)?);
            r = r.max((&px * &py).distance(&pxy) / scale);
            r = r.max((&sy * &sx).distance(&sxy) / scale);
            r = r.max((&px + &sx).distance(&j.apply(&x)?) / x.norm_inf());
        }
        c.residual(r);
        c.check(r <= cfg.algebraic_tol, || format!("J #{i}: residual {r:.2e}"));
    }
    Ok(c)
}

/// Maps of every certified class, with the exponent they are certified at.
fn certified_class_map(s: &mut Sampler, i: usize, cfg: &ToleranceConfig) -> Result<(LinearMap, f64)> {
    let p = PS[i % 4];
    Ok(match i % 5 {
        0 => (generate::commutative_map(s, p)?, p),
        1 => {
            let (dom, cod) = (generate::algebra(s, 2, 3), generate::algebra(s, 2, 3));
            (generate::arbitrary_map(s, &dom, &cod, 1.0)?, 1.0)
        }
        2 => {
            let data = random_yeadon(s, 2, false, 2.0)?;
            (yeadon_synthetic(&data.w, &data.b, &data.j, cfg)?, 2.0)
        }
        3 => {
            let (dom, cod) = (generate::algebra(s, 2, 3), generate::algebra(s, 2, 3));
            (generate::cp_contraction(s, &dom, &cod, p)?.scale(s.range(0.5, 1.0)), p)
        }
        _ => (generate::positive_non_two_positive(s, p, cfg)?, p),
    })
}

fn route_soundness(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    let maps = n.div_ceil(4);
    let mut routes = BTreeSet::new();
    for i in 0..maps {
        let (t, p) = certified_class_map(&mut s, i, cfg)?;
        let cert = certify_l1_norm(&t, p, &cfg.with_seed(cfg.derived_seed(i as u64)))?;
        routes.insert(cert.route.name());
        if cert.route == L1Route::SampledOnly {
            c.undetermined();
            continue;
        }
        let upper = cert.value_interval.upper;
        for k in 0..4 {
            if c.instances >= n {
                break;
            }
            let set = l1_ratio_samples(&t, p, &cfg.with_seed(cfg.derived_seed(1000 * i as u64 + k)), 6)?;
            let best = set.best();
            c.residual((best / upper - 1.0).max(0.0));
            c.check(best <= upper * (1.0 + cfg.opt_tol) && cert.alarm.is_none(), || {
                format!("map #{i} route {}: ratio {best} above {upper}", cert.route.name())
            });
        }
    }
    c.note = format!("{}routes exercised: {}", if c.note.is_empty() { "" } else { "; " }, routes.into_iter().collect::<Vec<_>>().join(", "));
    Ok(c)
}

fn separating_sharpness(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let data = random_yeadon(&mut s, 1 + i % 3, i % 2 == 0, 2.0)?;
        let t = yeadon_synthetic(&data.w, &data.b, &data.j, cfg)?;
        let norm = op_norm(&t, 2.0, cfg)?.upper;
        let set = l1_ratio_samples(&t, 2.0, &cfg.with_seed(cfg.derived_seed(i as u64)), 3)?;
        let r = set.best_of(SampleKind::PositiveSingleton) / norm;
        c.residual(1.0 - r.min(1.0));
        c.check(r >= 0.95, || format!("map #{i}: singleton reaches {r:.4} ‖T‖"));
    }
    Ok(c)
}

fn isometry_routes(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    for i in 0..n {
        let (t, expect) = generate::l2_isometry(&mut s, i % 4, i / 4)?;
        let cls = classify_l2_isometry(&t, cfg)?;
        if matches!(cls.verdict, L2Verdict::Undetermined) {
            c.undetermined();
            continue;
        }
        let got = matches!(cls.verdict, L2Verdict::Ytf(_));
        c.check(cls.consistent && cls.alarm.is_none() && got == expect, || format!("isometry #{i}: {:?}", cls.alarm));
    }
    Ok(c)
}

fn positive_four(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    let mut largest = 0.0f64;
    for i in 0..n {
        let p = PS[i % 4];
        let t = generate::positive_non_two_positive(&mut s, p, cfg)?;
        let upper = op_norm(&t, p, cfg)?.upper;
        let best = l1_ratio_samples(&t, p, &cfg.with_seed(cfg.derived_seed(i as u64)), 6)?.best();
        largest = largest.max(best / upper);
        c.check(best <= 4.0 * upper * (1.0 + cfg.opt_tol), || format!("map #{i}: ratio {best} vs 4 x {upper}"));
    }
    c.note = format!("{}largest ratio / ‖T‖ upper = {largest:.4}", if c.note.is_empty() { "" } else { "; " });
    Ok(c)
}

fn dinq_both_directions(cfg: &ToleranceConfig, n: usize) -> Result<Counts> {
    let mut s = Sampler::new(cfg.seed);
    let mut c = Counts::default();
    let mut disjoint_done = 0;
    while disjoint_done < n {
        let alg = generate::algebra(&mut s, 3, 3);
        if alg.space_dim() < 2 {
            continue;
        }
        let (a, b) = s.disjoint_pair(&alg);
        let r = dinq_disjoint_test(&a, &b, cfg)?;
        c.residual((r.interval.upper / r.threshold - 1.0).max(0.0));
        c.check(r.interval.upper <= r.threshold * (1.0 + cfg.opt_tol), || format!("disjoint pair: upper {} > {}", r.interval.upper, r.threshold));
        disjoint_done += 1;
    }
    let mut undetermined = 0;
    let mut done = 0;
    while done < n {
        let alg = generate::algebra(&mut s, 3, 3);
        let (a, b) = generate::nondisjoint_pair(&mut s, &alg);
        if disjoint(&a, &b, cfg.algebraic_tol)? {
            continue;
        }
        done += 1;
        let r = dinq_disjoint_test(&a, &b, cfg)?;
        if r.verdict == DisjointVerdict::Undetermined {
            undetermined += 1;
            c.undetermined();
        } else {
            c.check(r.interval.lower > r.threshold, || format!("non-disjoint pair: lower {} ≤ {}", r.interval.lower, r.threshold));
        }
    }
    let rate = undetermined as f64 / n.max(1) as f64;
    if rate >= 0.10 {
        c.check(false, || format!("undetermined rate {:.1}% ≥ 10%", 100.0 * rate));
    }
    c.note = format!("{}undetermined rate {:.1}%", if c.note.is_empty() { "" } else { "; " }, 100.0 * rate);
    Ok(c)
}

fn cli_call(args: &[&str], stdin: &str, env_seed: Option<&str>) -> cli::Output {
    let argv = std::iter::once("nclp").chain(args.iter().copied());
    cli::run(argv, &mut stdin.as_bytes(), env_seed)
}

/// Command lines over generated inputs, covering every command and exit code.
fn cli_battery(seed: &str) -> Vec<(Vec<String>, String)> {
    let gen = |kind: &str, extra: &[&str]| -> String {
        let mut args = vec!["gen", "--kind", kind, "--seed", seed];
        args.extend_from_slice(extra);
        cli_call(&args, "", None).stdout
    };
    let example = |name: &str, extra: &[&str]| -> String {
        let mut args = vec!["example", name];
        args.extend_from_slice(extra);
        cli_call(&args, "", None).stdout
    };
    let owned = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    let mut out = Vec::new();
    for kind in ["positive-seq", "seq"] {
        let inst = gen(kind, &["--n", "3", "--blocks", "2"]);
        for p in ["1", "2", "3"] {
            out.push((owned(&["seqnorm", "--p", p]), inst.clone()));
        }
    }
    for kind in ["disjoint-pair", "nondisjoint-pair"] {
        let inst = gen(kind, &["--dim", "3"]);
        out.push((owned(&["disjoint"]), inst.clone()));
        out.push((owned(&["dinq"]), inst.clone()));
        out.push((owned(&["norm", "--element", "a", "--p", "3"]), inst.clone()));
    }
    let yeadon = gen("yeadon", &["--blocks", "2"]);
    for cmd in ["yeadon", "separating", "certify", "classify-l2"] {
        out.push((owned(&[cmd, "--map", "T"]), yeadon.clone()));
    }
    for kind in ["rotation", "commutative-map", "cp-map", "positive-map", "map"] {
        let inst = gen(kind, &[]);
        for cmd in ["certify", "separating", "classify-l2", "yeadon"] {
            out.push((owned(&[cmd]), inst.clone()));
        }
    }
    for name in ["transpose", "rotation", "identity", "depolarizing", "reduction", "direct-sum", "embedding", "unitary"] {
        let inst = example(name, &[]);
        out.push((owned(&["certify"]), inst.clone()));
        out.push((owned(&["classify-l2"]), inst));
    }
    out.push((owned(&["certify", "--p", "1.5"]), gen("map", &["--p", "1.5"])));
    out.push((owned(&["norm"]), "{ not json".to_string()));
    out.push((owned(&["norm"]), r#"{"version": "nclp-instance/1", "algebras": {"A": [{"dim": 1, "weight": 0.0}]}}"#.to_string()));
    out.push((owned(&["gen", "--kind", "seq", "--seed", seed]), String::new()));
    out.push((owned(&["example", "rotation", "--theta", "0.7854"]), String::new()));
    out.push((owned(&["suite", "--list"]), String::new()));
    out
}

fn cli_valid_json(cfg: &ToleranceConfig, _n: usize) -> Result<Counts> {
    let seed = cfg.seed.to_string();
    let mut c = Counts::default();
    let mut codes = BTreeSet::new();
    for (args, input) in cli_battery(&seed) {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = cli_call(&argv, &input, None);
        codes.insert(out.code);
        if out.code == cli::EXIT_INPUT {
            c.check(out.stdout.is_empty() && !out.stderr.is_empty(), || format!("{args:?}: exit 3 without a message"));
            continue;
        }
        let parsed: std::result::Result<Value, _> = serde_json::from_str(&out.stdout);
        c.check(parsed.is_ok(), || format!("{args:?} (exit {}): output is not JSON", out.code));
    }
    c.note = format!("{}exit codes seen: {:?}", if c.note.is_empty() { "" } else { "; " }, codes);
    Ok(c)
}

fn cli_deterministic(cfg: &ToleranceConfig, _n: usize) -> Result<Counts> {
    let seed = cfg.seed.to_string();
    let mut c = Counts::default();
    for (args, input) in cli_battery(&seed).into_iter().step_by(3) {
        let argv: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = cli_call(&argv, &input, Some(&seed));
        let second = cli_call(&argv, &input, Some(&seed));
        c.check(first == second, || format!("{args:?}: outputs differ between runs"));
    }
    // the flag wins over NCLP_SEED
    let a = cli_call(&["gen", "--kind", "seq", "--seed", "5"], "", Some("6"));
    let b = cli_call(&["gen", "--kind", "seq"], "", Some("5"));
    c.check(a == b, || "--seed 5 with NCLP_SEED=6 differs from NCLP_SEED=5".into());
    Ok(c)
}

fn anchors_unique(_cfg: &ToleranceConfig, _n: usize) -> Result<Counts> {
    let mut c = Counts::default();
    let props = properties();
    let mut ids = BTreeSet::new();
    for p in &props {
        c.check(ids.insert(p.id) && !p.anchor.trim().is_empty(), || format!("{}: duplicate id or empty anchor", p.id));
    }
    Ok(c)
}
