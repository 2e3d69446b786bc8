//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use critgerm::classify::{classify, NotWfstReason, Verdict};
use critgerm::crit::{crit_via_covering, critical_locus, critical_tower, CritTower, TowerOptions};
use critgerm::germ::GermMap;
use critgerm::jetlab::{
    determinacy_probe, equivalence_residual, exp_derivation, lift_automorphism, lift_chain, log_automorphism, lr_solver,
    right_solver, JetAutomorphism, JetContext, JetDerivation,
};
use critgerm::report::{run, Command, RunConfig};
use critgerm::{parse_poly, CoefficientField, Fp, LocalIdeal, Monomial, Polynomial, QPoly, Rational, Ring, Scalar};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Q = Rational;
type Outcome = Result<String, String>;

fn ring(names: &[&str]) -> Arc<Ring> {
    Ring::new(names, CoefficientField::Rationals).unwrap()
}

fn p(r: &Arc<Ring>, s: &str) -> QPoly {
    parse_poly(s, r).unwrap()
}

fn ideal(r: &Arc<Ring>, gens: &[&str]) -> LocalIdeal<Q> {
    LocalIdeal::new(r, gens.iter().map(|s| p(r, s)))
}

fn q(n: i64) -> Q {
    Q::from_i64(&CoefficientField::Rationals, n)
}

fn germ(src: &[&str], sid: &[&str], tgt: &[&str], tid: &[&str], comps: &[&str]) -> GermMap<Q> {
    let (s, t) = (ring(src), ring(tgt));
    GermMap::new(ideal(&s, sid), ideal(&t, tid), comps.iter().map(|c| p(&s, c)).collect()).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {:.1}s, limit {}s", t.as_secs_f64(), limit.as_secs()))
}

/// Random polynomial with `terms` monomials of degree in `lo..=hi`, coefficients in `-3..=3` without zero.
fn random_poly(r: &Arc<Ring>, lo: u32, hi: u32, terms: usize, rng: &mut ChaCha8Rng) -> QPoly {
    let n = r.nvars();
    let mut out = Polynomial::zero(r);
    for _ in 0..terms {
        let d = rng.gen_range(lo..=hi);
        let mut e = vec![0u32; n];
        for _ in 0..d {
            e[rng.gen_range(0..n)] += 1;
        }
        let mut c = rng.gen_range(-3i64..=2);
        if c >= 0 {
            c += 1;
        }
        out = &out + &Polynomial::monomial(r, Monomial::from_exponents(e), q(c));
    }
    out
}

/// Determinant by cofactor expansion along the first row.
fn det(m: &[Vec<QPoly>], r: &Arc<Ring>) -> QPoly {
    match m.len() {
        0 => Polynomial::one(r),
        1 => m[0][0].clone(),
        k => {
            let mut acc = Polynomial::zero(r);
            for j in 0..k {
                if m[0][j].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<QPoly>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
                let t = &m[0][j] * &det(&minor, r);
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            acc
        }
    }
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = subsets(n - 1, k);
    for mut s in subsets(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

/// Ideal of maximal minors of the Jacobian, computed from partial derivatives.
fn jacobian_minors(f: &GermMap<Q>) -> LocalIdeal<Q> {
    let r = f.source();
    let jac: Vec<Vec<QPoly>> = f.components().iter().map(|c| (0..f.n()).map(|j| c.diff(j)).collect()).collect();
    let minors = subsets(f.n(), f.m()).into_iter().map(|cols| {
        let sq: Vec<Vec<QPoly>> = jac.iter().map(|row| cols.iter().map(|&c| row[c].clone()).collect()).collect();
        det(&sq, r)
    });
    LocalIdeal::new(r, minors)
}

fn seeded_dominant_suite() -> Vec<GermMap<Q>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let mut out = Vec::new();
    while out.len() < 20 {
        let n = rng.gen_range(1..=3usize);
        let m = rng.gen_range(1..=n);
        let src: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
        let tgt: Vec<String> = (0..m).map(|i| format!("u{i}")).collect();
        let s = ring(&src.iter().map(String::as_str).collect::<Vec<_>>());
        let t = ring(&tgt.iter().map(String::as_str).collect::<Vec<_>>());
        let comps: Vec<QPoly> = (0..m).map(|_| random_poly(&s, 1, 4, rng.gen_range(1..=3), &mut rng)).collect();
        let Ok(f) = GermMap::smooth(&s, &t, comps) else { continue };
        if f.is_dominant(8).dominant {
            out.push(f);
        }
    }
    out
}

fn criterion_1(suite: &[GermMap<Q>]) -> Outcome {
    let start = Instant::now();
    let opts = TowerOptions::default();
    for (i, f) in suite.iter().enumerate() {
        let c = critical_locus(f, &opts).map_err(|e| format!("map {i}: {e}"))?;
        ensure(c.fitting.equal(&jacobian_minors(f)), || format!("map {i} ({f}): Fitting ideal differs from Jacobian minors"))?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{} maps", suite.len()))
}

fn criterion_2() -> Outcome {
    let exps: [&[u32]; 11] =
        [&[2, 3], &[2, 5], &[3, 4], &[3, 5], &[4, 5], &[2, 7], &[3, 7], &[5, 6], &[3, 4, 5], &[4, 5, 6], &[3, 5, 7]];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0002);
    let s = ring(&["t"]);
    let t_var = Polynomial::var(&s, 0);
    for a in exps {
        let m = a.len();
        let tgt: Vec<String> = (0..m).map(|i| format!("u{i}")).collect();
        let t = ring(&tgt.iter().map(String::as_str).collect::<Vec<_>>());
        let monos: Vec<QPoly> = a.iter().map(|&e| t_var.pow(e)).collect();
        let comps: Vec<QPoly> = loop {
            let mat: Vec<Vec<QPoly>> =
                (0..m).map(|_| (0..m).map(|_| Polynomial::constant(&s, q(rng.gen_range(-3..=3)))).collect()).collect();
            if det(&mat, &s).is_zero() {
                continue;
            }
            break mat
                .iter()
                .map(|row| row.iter().zip(&monos).fold(Polynomial::zero(&s), |acc, (c, x)| &acc + &(c * x)))
                .collect();
        };
        let derivs = LocalIdeal::new(&s, comps.iter().map(|c| c.diff(0)));
        let f = GermMap::smooth(&s, &t, comps).unwrap().corestrict();
        for g in f.target_ideal().generators() {
            ensure(f.pullback(g).is_zero(), || format!("{a:?}: image ideal does not vanish on the curve"))?;
        }
        let c = critical_locus(&f, &TowerOptions::default()).map_err(|e| format!("{a:?}: {e}"))?;
        ensure(c.fitting.equal(&derivs), || format!("{a:?}: Fitt_0 = {:?}", c.fitting.generator_strings()))?;
    }
    Ok(format!("{} curves", exps.len()))
}

fn corpus_maps() -> Vec<(&'static str, GermMap<Q>)> {
    vec![
        ("fold", germ(&["x", "y"], &[], &["u", "v"], &[], &["x", "y^2"])),
        ("whitney", germ(&["x", "y"], &[], &["u", "v"], &[], &["x", "y^3 + x*y"])),
        ("cusp curve", germ(&["t"], &[], &["u", "v"], &["u^3 - v^2"], &["t^2", "t^3"])),
        ("pinch", germ(&["x", "y", "z"], &[], &["a", "b", "c"], &[], &["x", "y^2", "y*z"])),
        ("blowdown", germ(&["x", "y"], &[], &["u", "v"], &[], &["x", "x*y"])),
        ("xy", germ(&["x", "y"], &[], &["u"], &[], &["x*y"])),
        ("projection", germ(&["x", "y"], &[], &["u"], &[], &["x"])),
        ("node source", germ(&["x", "y"], &["x*y"], &["u"], &[], &["x + y"])),
    ]
}

fn same_shape(a: &CritTower<Q>, b: &CritTower<Q>) -> bool {
    a.termination == b.termination && a.levels.len() == b.levels.len()
}

fn criterion_3() -> Outcome {
    let opts = TowerOptions::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut checks = 0;
    for (name, f) in corpus_maps() {
        let base = critical_tower(&f, &opts).map_err(|e| format!("{name}: {e}"))?;
        let s = f.source().clone();
        for _ in 0..2 {
            // x_i -> c_i x_i + p_i(x_1, ..., x_{i-1})
            let images: Vec<QPoly> = (0..s.nvars())
                .map(|i| {
                    let c = q([1, -1, 2, 3][rng.gen_range(0..4)]);
                    let lower = if i == 0 {
                        Polynomial::zero(&s)
                    } else {
                        let sub = Ring::new(&s.names()[..i].iter().map(String::as_str).collect::<Vec<_>>(), s.field()).unwrap();
                        let emb: Vec<QPoly> = (0..i).map(|j| Polynomial::var(&s, j)).collect();
                        random_poly(&sub, 1, 3, 2, &mut rng).substitute(&s, &emb, None)
                    };
                    &Polynomial::var(&s, i).scale(&c) + &lower
                })
                .collect();
            let pull = |p: &QPoly| p.substitute(&s, &images, None);
            let pull_ideal = |i: &LocalIdeal<Q>| LocalIdeal::new(&s, i.generators().iter().map(&pull));
            let g = GermMap::new(pull_ideal(f.source_ideal()), f.target_ideal().clone(), f.components().iter().map(&pull).collect())
                .map_err(|e| format!("{name}: {e}"))?;
            let tg = critical_tower(&g, &opts).map_err(|e| format!("{name}: {e}"))?;
            ensure(same_shape(&base, &tg), || format!("{name}: tower shape changed under {images:?}"))?;
            for (a, b) in base.levels.iter().zip(&tg.levels) {
                ensure(pull_ideal(&a.crit).equal(&b.crit), || format!("{name}: Crit_{} not equivariant", a.index))?;
                ensure(a.disc.equal(&b.disc), || format!("{name}: Δ_{} changed", a.index))?;
                checks += 2;
            }
        }
        // Redundant component w = h(y).
        let t = f.target().clone();
        let mut names: Vec<&str> = t.names().iter().map(String::as_str).collect();
        names.push("w");
        let big = Ring::new(&names, t.field()).unwrap();
        let emb: Vec<QPoly> = (0..t.nvars()).map(|j| Polynomial::var(&big, j)).collect();
        let h = random_poly(&t, 1, 2, 2, &mut rng);
        let graph = &Polynomial::var(&big, t.nvars()) - &h.substitute(&big, &emb, None);
        let push = |i: &LocalIdeal<Q>| LocalIdeal::new(&big, i.generators().iter().map(|g| g.substitute(&big, &emb, None))).with_generators([graph.clone()]);
        let mut comps = f.components().to_vec();
        comps.push(f.pullback(&h));
        let e = GermMap::new(f.source_ideal().clone(), push(f.target_ideal()), comps).map_err(|e| format!("{name}: {e}"))?;
        let te = critical_tower(&e, &opts).map_err(|e| format!("{name} extended: {e}"))?;
        ensure(same_shape(&base, &te), || format!("{name}: tower shape changed by a redundant component"))?;
        for (a, b) in base.levels.iter().zip(&te.levels) {
            ensure(a.crit.equal(&b.crit), || format!("{name}: Crit_{} depends on the embedding", a.index))?;
            ensure(push(&a.disc).equal(&b.disc), || format!("{name}: Δ_{} depends on the embedding", a.index))?;
            checks += 2;
        }
    }
    Ok(format!("{checks} ideal comparisons"))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let opts = TowerOptions::default();
    // Verdicts and first critical loci worked out by hand from the Jacobians.
    let table: Vec<(&str, GermMap<Q>, Verdict, Option<Vec<&str>>)> = vec![
        ("identity", germ(&["x", "y"], &[], &["u", "v"], &[], &["x", "y"]), Verdict::Finite, Some(vec!["1"])),
        ("cusp curve", germ(&["t"], &[], &["u", "v"], &["u^3 - v^2"], &["t^2", "t^3"]), Verdict::Finite, Some(vec!["t"])),
        ("xy", germ(&["x", "y"], &[], &["u"], &[], &["x*y"]), Verdict::Fst, Some(vec!["x", "y"])),
        ("projection", germ(&["x", "y"], &[], &["u"], &[], &["x"]), Verdict::Fst, Some(vec!["1"])),
        ("pinch", germ(&["x", "y", "z"], &[], &["a", "b", "c"], &[], &["x", "y^2", "y*z"]), Verdict::Wfst { r: 2 }, Some(vec!["y"])),
        (
            "blowdown",
            germ(&["x", "y"], &[], &["u", "v"], &[], &["x", "x*y"]),
            Verdict::NotWfst { reason: NotWfstReason::PointDiscriminantNonfinite, proven: true },
            Some(vec!["x"]),
        ),
    ];
    for (name, f, verdict, crit1) in &table {
        let r = classify(f, &opts).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.verdict == *verdict, || format!("{name}: got {}, expected {verdict}", r.verdict))?;
        if let Some(gens) = crit1 {
            let lvl = r.tower.levels.get(1).ok_or_else(|| format!("{name}: no level 1"))?;
            ensure(lvl.crit.equal(&ideal(f.source(), gens)), || format!("{name}: Crit_1 = {:?}", lvl.crit.generator_strings()))?;
        }
    }
    for prime in [2u64, 3, 5, 7] {
        let s = Ring::new(&["x"], CoefficientField::Prime(prime)).unwrap();
        let t = Ring::new(&["u"], CoefficientField::Prime(prime)).unwrap();
        let f: GermMap<Fp> = GermMap::smooth(&s, &t, vec![Polynomial::var(&s, 0).pow(prime as u32)]).unwrap();
        let r = classify(&f, &opts).map_err(|e| format!("x^{prime}: {e}"))?;
        let lvl = r.tower.levels.get(1).ok_or_else(|| format!("x^{prime}: no level 1"))?;
        ensure(lvl.crit.equal(&LocalIdeal::zero(&s)), || format!("x^{prime} over F_{prime}: Crit_1 is not X"))?;
        ensure(r.verdict == Verdict::Finite, || format!("x^{prime}: got {}", r.verdict))?;
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("{} maps", table.len() + 4))
}

/// Coefficients of `p` as a polynomial in variable `v`.
fn coeffs_in(p: &QPoly, v: usize) -> Vec<QPoly> {
    let r = p.ring();
    let deg = p.terms().map(|(m, _)| m.exponents()[v]).max().unwrap_or(0) as usize;
    let mut out = vec![Polynomial::zero(r); deg + 1];
    for (m, c) in p.terms() {
        let mut e = m.exponents().to_vec();
        let k = e[v] as usize;
        e[v] = 0;
        out[k] = &out[k] + &Polynomial::monomial(r, Monomial::from_exponents(e), c.clone());
    }
    out
}

/// Sylvester resultant of `a` and `b` with respect to variable `v`.
fn resultant(a: &QPoly, b: &QPoly, v: usize) -> QPoly {
    let r = a.ring();
    let (ca, cb) = (coeffs_in(a, v), coeffs_in(b, v));
    let (da, db) = (ca.len() - 1, cb.len() - 1);
    let size = da + db;
    let mut rows = Vec::new();
    for i in 0..db {
        let mut row = vec![Polynomial::zero(r); size];
        for (k, c) in ca.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    for i in 0..da {
        let mut row = vec![Polynomial::zero(r); size];
        for (k, c) in cb.iter().rev().enumerate() {
            row[i + k] = c.clone();
        }
        rows.push(row);
    }
    det(&rows, r)
}

fn criterion_5() -> Outcome {
    let opts = TowerOptions::default();
    let uvy = ring(&["u", "v", "y"]);
    // (x, g(x, y)): Δ is cut out by Res_y(g(u, y) - v, ∂_y g(u, y)).
    let planar = [("whitney", "y^3 + x*y", "y^3 + u*y", "4*u^3 + 27*v^2"), ("fold", "y^2", "y^2", "v")];
    for (name, g, gu, expected) in planar {
        let f = germ(&["x", "y"], &[], &["u", "v"], &[], &["x", g]);
        let t = f.target().clone();
        let lifted = &p(&uvy, gu) - &p(&uvy, "v");
        let res = resultant(&lifted, &lifted.diff(2), 2);
        let res = res.substitute(&t, &[Polynomial::var(&t, 0), Polynomial::var(&t, 1), Polynomial::zero(&t)], None);
        ensure(LocalIdeal::new(&t, [res.clone()]).equal(&ideal(&t, &[expected])), || format!("{name}: resultant oracle gave {res}"))?;
        let tower = critical_tower(&f, &opts).map_err(|e| format!("{name}: {e}"))?;
        let d = &tower.levels[1].disc;
        ensure(d.equal(&ideal(&t, &[expected])), || format!("{name}: Δ = {:?}", d.generator_strings()))?;
    }
    let cusp = germ(&["t"], &[], &["u", "v"], &["u^3 - v^2"], &["t^2", "t^3"]);
    let tower = critical_tower(&cusp, &opts).map_err(|e| e.to_string())?;
    let d = &tower.levels[1].disc;
    ensure(d.equal(&LocalIdeal::maximal(cusp.target())), || format!("cusp curve: Δ = {:?}", d.generator_strings()))?;
    Ok("whitney, fold, cusp curve".into())
}

fn criterion_6(suite: &[GermMap<Q>]) -> Outcome {
    let opts = TowerOptions::default();
    for (i, f) in suite.iter().enumerate() {
        let c = critical_locus(f, &opts).map_err(|e| format!("map {i}: {e}"))?;
        let rel = f.relative_differentials_fitting(f.n() - f.m(), opts.minor_guard).map_err(|e| format!("map {i}: {e}"))?;
        ensure(rel.equal(&c.fitting), || format!("map {i} ({f}): Fitt_(n-m) of relative differentials differs"))?;
    }
    Ok(format!("{} maps", suite.len()))
}

fn criterion_7() -> Outcome {
    let opts = TowerOptions::default();
    let graph = germ(&["x", "y"], &[], &["u1", "u2", "u3"], &["u3 - u1*u2"], &["x", "y^2", "x*y^2"]);
    let g = crit_via_covering(&graph, &[0, 1], &opts).map_err(|e| e.to_string())?;
    ensure(g.hypothesis_certified && g.ideals_equal, || "graph surface: expected certified and equal".into())?;
    let cusp = germ(&["t"], &[], &["u", "v"], &["u^3 - v^2"], &["t^2", "t^3"]);
    let c = crit_via_covering(&cusp, &[0], &opts).map_err(|e| e.to_string())?;
    ensure(!c.hypothesis_certified && c.ideals_equal, || "cusp curve: expected uncertified and equal".into())?;
    ensure(g.hypothesis_certified != c.hypothesis_certified, || "reports do not distinguish the cases".into())?;
    Ok("graph certified, cusp uncertified".into())
}

fn random_derivation(ctx: &JetContext, r: &Arc<Ring>, rng: &mut ChaCha8Rng) -> JetDerivation<Q> {
    let coeffs = (0..r.nvars()).map(|_| random_poly(r, 2, ctx.order(), rng.gen_range(1..=4), rng).truncate(ctx.order())).collect();
    JetDerivation::new(ctx, coeffs).unwrap()
}

/// Random `x_i ↦ x_i + h_i` with `h_i ∈ ideal · m`, truncated at the jet order.
fn automorphism_in(ctx: &JetContext, ideal: &LocalIdeal<Q>, rng: &mut ChaCha8Rng) -> JetAutomorphism<Q> {
    let r = ctx.ring().clone();
    let images = (0..r.nvars())
        .map(|i| {
            let h = ideal.generators().iter().fold(Polynomial::zero(&r), |acc, g| &acc + &(g * &random_poly(&r, 1, 2, 2, rng)));
            &Polynomial::var(&r, i) + &h.truncate(ctx.order())
        })
        .collect();
    JetAutomorphism::new(ctx, images).unwrap()
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);

    // (a)
    for i in 0..50 {
        let r = if i % 2 == 0 { ring(&["x", "y"]) } else { ring(&["x", "y", "z"]) };
        let ctx = JetContext::new(&r, 10).unwrap();
        let xi = random_derivation(&ctx, &r, &mut rng);
        let phi = exp_derivation(&xi, &ctx).map_err(|e| format!("(a) {i}: {e}"))?;
        let back = log_automorphism(&phi, &ctx).map_err(|e| format!("(a) {i}: {e}"))?;
        ensure(back == xi, || format!("(a) derivation {i}: log(exp ξ) ≠ ξ"))?;
    }

    // (b)
    let f = germ(&["x"], &[], &["u"], &[], &["x^2"]);
    let ft = germ(&["x"], &[], &["u"], &[], &["x^2 + x^3"]);
    let ctx = JetContext::new(f.source(), 10).unwrap();
    let eq = right_solver(&f, &ft, &ctx).map_err(|e| format!("(b): {e}"))?;
    ensure(equivalence_residual(&f, &ft, &eq.source, &eq.target).iter().all(|r| r.is_zero()), || "(b): composition fails".into())?;
    let img = &eq.source.images()[0];
    let expected = [q(1), Q::new(BigInt::from(1), BigInt::from(2)), Q::new(BigInt::from(-1), BigInt::from(8))];
    for (d, c) in expected.iter().enumerate() {
        let got = img.coeff(&Monomial::from_exponents(vec![d as u32 + 1]));
        ensure(got == *c, || format!("(b): coefficient of x^{} is {got}", d + 1))?;
    }

    // (c)
    let ctx12 = JetContext::new(f.source(), 12).unwrap();
    let rows = determinacy_probe(&f, &[3, 4, 5, 6], 100, 0, &ctx12).map_err(|e| format!("(c): {e}"))?;
    for row in &rows {
        ensure(row.successes == row.trials && row.rate == "1", || format!("(c): N={} rate {}", row.n, row.rate))?;
    }

    // (d)
    let r = ring(&["x", "y"]);
    let ctx8 = JetContext::new(&r, 8).unwrap();
    let battery: [(&[&str], &[&str], u32); 6] = [
        (&["x*y"], &["x"], 2),
        (&["x*y"], &["x"], 4),
        (&["x*y"], &["y"], 3),
        (&["y^2 - x^3"], &["x", "y"], 2),
        (&["x^2"], &["x", "y^2"], 2),
        (&["x*y*(x + y)"], &["x"], 3),
    ];
    let mut lifted = 0;
    for (jg, ig, n) in battery {
        let (j, i) = (ideal(&r, jg), ideal(&r, ig));
        let ij = i.sum(&j);
        let base = j.sum(&i.power(n));
        for trial in 0..3 {
            let phi = automorphism_in(&ctx8, &base, &mut rng);
            let out = lift_automorphism(&j, &i, n, &phi, &ctx8).map_err(|e| format!("(d) J={jg:?} I={ig:?} N={n} #{trial}: {e}"))?;
            let m = &out.map;
            ensure(m.preserves(&j) && m.preserves(&ij) && m.agrees_modulo(&phi, &ij), || format!("(d) J={jg:?} I={ig:?} N={n}: lift fails a condition"))?;
            lifted += 1;
        }
    }
    let j = ideal(&r, &["x*y*(x - y)"]);
    let chain = vec![(ideal(&r, &["x"]), 3), (ideal(&r, &["x", "y"]), 2)];
    // J + I_1^3 + I_1·I_2^2 keeps I_1 + J as well as the whole chain.
    let base = j.sum(&chain[0].0.power(3)).sum(&LocalIdeal::new(&r, chain[1].0.power(2).generators().iter().map(|g| g * &p(&r, "x"))));
    let phi = automorphism_in(&ctx8, &base, &mut rng);
    let m = lift_chain(&j, &chain, &phi, &ctx8).map_err(|e| format!("(d) chain: {e}"))?;
    ensure(m.preserves(&j) && chain.iter().all(|(it, _)| m.preserves(&it.sum(&j))), || "(d) chain lift fails a condition".into())?;

    within(start, Duration::from_secs(120))?;
    Ok(format!("50 roundtrips, Φ(x) = x + x²/2 - x³/8 + …, 4 probe rows at rate 1, {} lifts", lifted + 1))
}

fn random_jet(ctx: &JetContext, rng: &mut ChaCha8Rng) -> JetAutomorphism<Q> {
    let r = ctx.ring().clone();
    let images = (0..r.nvars())
        .map(|i| &Polynomial::var(&r, i) + &random_poly(&r, 2, 4, 2, rng).truncate(ctx.order()))
        .collect();
    JetAutomorphism::new(ctx, images).unwrap()
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0009);
    let k = 10;
    let maps = [
        germ(&["x"], &[], &["u"], &[], &["x^2"]),
        germ(&["x", "y"], &[], &["u", "v"], &[], &["x", "y^2"]),
        germ(&["x", "y"], &[], &["u", "v"], &[], &["x", "y^3 + x*y"]),
        germ(&["t"], &[], &["u", "v"], &["u^3 - v^2"], &["t^2", "t^3"]),
        germ(&["x", "y"], &[], &["u"], &[], &["x^2 + y^2"]),
    ];
    for case in 0..20 {
        let f = &maps[case % maps.len()];
        let sctx = JetContext::new(f.source(), k).unwrap();
        let tctx = JetContext::new(f.target(), k).unwrap();
        let phi_x = random_jet(&sctx, &mut rng);
        let phi_y = if f.target_ideal().generators().iter().all(|g| g.is_zero()) {
            random_jet(&tctx, &mut rng)
        } else {
            // (u, v) ↦ (u w², v w³) keeps u³ - v² up to the unit w⁶.
            let t = f.target();
            let w = &Polynomial::one(t) + &random_poly(t, 1, 2, 2, &mut rng);
            let (u, v) = (Polynomial::var(t, 0), Polynomial::var(t, 1));
            let img = vec![u.mul_trunc(&(&w * &w), Some(k)), v.mul_trunc(&(&(&w * &w) * &w), Some(k))];
            JetAutomorphism::new(&tctx, img).unwrap()
        };
        ensure(phi_y.preserves(f.target_ideal()), || format!("case {case}: constructed Φ_Y does not preserve J_Y"))?;
        let pulled: Vec<QPoly> = f.components().iter().map(|c| phi_x.apply(c)).collect();
        let ft_comps: Vec<QPoly> =
            phi_y.images().iter().map(|y| y.substitute(f.source(), &pulled, Some(k))).collect();
        let ft = GermMap::new(f.source_ideal().clone(), f.target_ideal().clone(), ft_comps).map_err(|e| format!("case {case}: {e}"))?;
        let eq = lr_solver(f, &ft, &sctx).map_err(|e| format!("case {case} ({f} vs {ft}): {e}"))?;
        let res = equivalence_residual(f, &ft, &eq.source, &eq.target);
        ensure(res.iter().all(|r| r.is_zero()), || format!("case {case}: reported pair fails the composition"))?;
        ensure(eq.target.preserves(f.target_ideal()), || format!("case {case}: Φ_Y does not preserve J_Y"))?;
    }
    within(start, Duration::from_secs(120))?;
    Ok("20 pairs solved and verified".into())
}

fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn criterion_10() -> Outcome {
    let config = RunConfig { trials: 10, ..RunConfig::default() };
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir()).map_err(|e| e.to_string())?.filter_map(|e| e.ok()).map(|e| e.path()).collect();
    files.sort();
    let render = |cmd: Command, input: &str| match run(cmd, input, &config) {
        Ok(r) => r.to_json(),
        Err(e) => format!("error {}: {e}", e.exit_code()),
    };
    let mut runs = 0;
    for path in &files {
        let input = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        for cmd in Command::ALL {
            let first = render(cmd, &input);
            let second = render(cmd, &input);
            let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| render(cmd, &input));
            ensure(first == second && first == single, || format!("{} {}: reports differ between runs", cmd.name(), path.display()))?;
            runs += 3;
        }
    }
    Ok(format!("{} files, {runs} runs", files.len()))
}

fn main() {
    // Numeric arguments select criteria; other arguments from the test runner are ignored.
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let suite = if only.is_empty() || only.contains(&1) || only.contains(&6) { seeded_dominant_suite() } else { Vec::new() };
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome + Sync>)> = vec![
        ("smooth-case Jacobian agreement", Box::new(|| criterion_1(&suite))),
        ("curve formula", Box::new(criterion_2)),
        ("equivariance and embedding independence", Box::new(criterion_3)),
        ("classification table", Box::new(criterion_4)),
        ("discriminant values", Box::new(criterion_5)),
        ("ramification coincidence", Box::new(|| criterion_6(&suite))),
        ("covering lemma", Box::new(criterion_7)),
        ("jet laboratory", Box::new(criterion_8)),
        ("lr solver soundness", Box::new(criterion_9)),
        ("determinism", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.contains(&(i + 1)) {
            continue;
        }
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail} ({secs:.2}s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why} ({secs:.2}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
