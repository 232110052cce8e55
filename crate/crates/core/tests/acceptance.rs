//! Acceptance suite. Each test covers one criterion and prints a single
//! `[PASS]` or `[FAIL]` line; run with `--nocapture` to see them.

mod common;

use std::f64::consts::PI;
use std::time::Instant;

use common::{family_corpus, PRODUCT_GRID};
use we_kit::conditions::{
    eigenbasis_oracle, einstein_form, equiv_conditions, identity_suite, is_weakly_einstein,
    kahler_spectrum_check,
};
use we_kit::examples::{constant_curvature, eps_space, product_surfaces, random_curvature};
use we_kit::family::{
    curvature_from_connection, family_orientation, frame_point, koszul_check,
    ricci_eigs_potential_path, we_residual, EtaProfile, FamilyParams,
};
use we_kit::lemma_f::{reduce_to_f, round_trip_residual, verify_lemma};
use we_kit::ode_q::{boundary_match, ode_residual, positivity_scan, QSpec, Sign, SQRT_7};
use we_kit::tensor::{
    act_on_form, contraction_bundle, hodge_split, Metric, TwoForm, NORM_FLOOR,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, title: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id}: {title} ({detail})");
}

#[test]
fn criterion_1_identity_suite() {
    let tol = 1e-9;
    let start = Instant::now();
    let mut worst4 = 0.0_f64;
    for seed in 0..1000 {
        let r = random_curvature(seed, 4, 1.0);
        let rep = identity_suite(&r, &Metric::identity(4), tol).unwrap();
        worst4 = worst4
            .max(rep.trf_residual.unwrap())
            .max(rep.trm_residual.unwrap())
            .max(rep.trc_w_multiple_residual.unwrap());
    }
    let mut worst_trw = 0.0_f64;
    for n in [5, 6] {
        for seed in 0..200 {
            let r = random_curvature(10_000 * n as u64 + seed, n, 1.0);
            let rep = identity_suite(&r, &Metric::identity(n), tol).unwrap();
            worst_trw = worst_trw.max(rep.trw1_residual).max(rep.trw2_residual);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst4 <= tol && worst_trw <= tol && secs <= 30.0;
    report(
        1,
        "identity residuals",
        pass,
        format!("n=4 max {worst4:.2e}, n=5/6 trw max {worst_trw:.2e}, {secs:.2} s"),
    );
    assert!(pass);
}

#[test]
fn criterion_2_iff_biconditional() {
    let tol = 1e-9;
    let mut cases = Vec::new();
    for seed in 0..1000 {
        cases.push((random_curvature(seed, 4, 1.0), Metric::identity(4)));
    }
    for kappa in [-1.0, 0.0, 1.0] {
        let ex = constant_curvature(kappa, 4).unwrap();
        cases.push((ex.r, ex.g));
    }
    for &k1 in &PRODUCT_GRID {
        for &k2 in &PRODUCT_GRID {
            let ex = product_surfaces(k1, k2);
            cases.push((ex.r, ex.g));
        }
    }
    for a in [1.0, 2.0] {
        let ex = eps_space(a).unwrap();
        cases.push((ex.r, ex.g));
    }
    for s in family_corpus(20, 10, 5) {
        for &t in &s.ts {
            let fp = frame_point(&s.params, t).unwrap();
            cases.push((fp.r, fp.g));
        }
    }
    let disagreements = cases
        .iter()
        .filter(|(r, g)| identity_suite(r, g, tol).unwrap().iff_consistency != Some(true))
        .count();
    let pass = disagreements == 0;
    report(
        2,
        "weakly Einstein iff 6We = -se",
        pass,
        format!("{} cases, {disagreements} disagreements", cases.len()),
    );
    assert!(pass);
}

#[test]
fn criterion_3_product_grid() {
    let mut count = 0;
    let mut mismatches = 0;
    for &k1 in &PRODUCT_GRID {
        for &k2 in &PRODUCT_GRID {
            let ex = product_surfaces(k1, k2);
            let we = is_weakly_einstein(&ex.r, &ex.g, 1e-9).unwrap().is_multiple;
            if we {
                count += 1;
            }
            if we != (k1 == k2 || k1 == -k2) {
                mismatches += 1;
            }
        }
    }
    let pass = count == 13 && mismatches == 0;
    report(
        3,
        "products weakly Einstein iff K1 = +-K2",
        pass,
        format!("{count}/49 cells, {mismatches} mismatches"),
    );
    assert!(pass);
}

#[test]
fn criterion_4_eps_space() {
    let mut pass = true;
    let mut detail = Vec::new();
    for a in [1.0, 2.0] {
        let ex = eps_space(a).unwrap();
        let b = contraction_bundle(&ex.r, &ex.g).unwrap();
        let (eigs, _) = ex.g.generalized_eigen(b.ricci.matrix());
        let a2 = a * a;
        let mut expected = [-3.0 * a2, a2, -a2, -a2];
        expected.sort_by(f64::total_cmp);
        let eig_err = eigs
            .iter()
            .zip(expected)
            .map(|(x, e)| (x - e).abs())
            .fold(0.0, f64::max);
        let we = is_weakly_einstein(&ex.r, &ex.g, 1e-9).unwrap();
        let spectrum = kahler_spectrum_check(&b.einstein, &ex.g, b.scalar, 1e-9).unwrap();
        let ok = eig_err <= 1e-12
            && we.is_multiple
            && (we.factor - 6.0 * a2 * a2).abs() <= 1e-12 * a2 * a2
            && !spectrum.spectrum_ok;
        pass &= ok;
        detail.push(format!(
            "a={a}: eig err {eig_err:.1e}, trc factor {:.6}, spectrum_ok {}",
            we.factor, spectrum.spectrum_ok
        ));
    }
    report(4, "EPS space", pass, detail.join("; "));
    assert!(pass);
}

fn non_we_eta(t: f64) -> [f64; 3] {
    [1.0 + 0.1 * t * t, 0.2 * t, 0.2]
}

#[test]
fn criterion_5_equivalence() {
    let tol = 1e-8;
    let mut points = 0;
    let mut disagreements = 0;
    let mut oracle_checked = 0;
    let mut oracle_disagreements = 0;
    let mut all_true = 0;
    let mut check = |r: &we_kit::tensor::CurvTensor,
                     g: &Metric,
                     j: &we_kit::tensor::ComplexStructure| {
        let rep = equiv_conditions(r, g, j, tol).unwrap();
        points += 1;
        if !rep.all_agree() {
            disagreements += 1;
        }
        if rep.all_hold() {
            all_true += 1;
        }
        if let Some(o) = eigenbasis_oracle(r, g, j, tol).unwrap() {
            oracle_checked += 1;
            if o.holds != rep.cond_d {
                oracle_disagreements += 1;
            }
        }
    };
    for s in family_corpus(20, 10, 5) {
        for &t in &s.ts {
            let fp = frame_point(&s.params, t).unwrap();
            check(&fp.r, &fp.g, &fp.j);
        }
    }
    let control = FamilyParams::new(1.0, -1.0, -1.0, 0.0, EtaProfile::Custom(non_we_eta)).unwrap();
    for i in 0..10 {
        let fp = frame_point(&control, 0.5 + 0.3 * i as f64).unwrap();
        check(&fp.r, &fp.g, &fp.j);
    }
    for &k1 in &PRODUCT_GRID {
        for &k2 in &PRODUCT_GRID {
            let ex = product_surfaces(k1, k2);
            check(&ex.r, &ex.g, ex.j.as_ref().unwrap());
        }
    }
    let pass = disagreements == 0 && oracle_disagreements == 0 && points >= 200 + 49;
    report(
        5,
        "conditions (a)-(d) agree",
        pass,
        format!(
            "{points} points ({all_true} all-true), {disagreements} disagreements, \
             oracle {oracle_checked} checked / {oracle_disagreements} disagreements"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_family_self_consistency() {
    let corpus = family_corpus(20, 10, 5);
    let (mut koszul, mut curv, mut cross, mut kahler, mut asd) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    for s in &corpus {
        for &t in &s.ts {
            let fp = frame_point(&s.params, t).unwrap();
            koszul = koszul.max(koszul_check(&s.params, t).unwrap());
            curv = curv.max(curvature_from_connection(&s.params, t, 1e-5).unwrap());
            let (mu, lambda) = ricci_eigs_potential_path(&s.spec, t).unwrap();
            cross = cross
                .max((mu - fp.mu).abs() / mu.abs().max(fp.mu.abs()).max(1.0))
                .max((lambda - fp.lambda).abs() / lambda.abs().max(fp.lambda.abs()).max(1.0));

            let b = contraction_bundle(&fp.r, &fp.g).unwrap();
            let omega = fp.j.kahler_form(&fp.g).unwrap();
            let w_omega = act_on_form(&b.weyl, &omega, &fp.g).unwrap();
            let diff = w_omega.matrix() - omega.matrix() * (b.scalar / 6.0);
            let r_norm = fp.r.norm(&fp.g).unwrap().max(NORM_FLOOR);
            kahler = kahler.max(fp.g.norm(&diff) / r_norm);

            let eta: TwoForm = einstein_form(&b.einstein, &fp.j).unwrap();
            let split = hodge_split(&eta, &fp.g, family_orientation()).unwrap();
            let eta_norm = fp.g.norm(eta.matrix()).max(NORM_FLOOR);
            asd = asd.max(fp.g.norm(split.sd.matrix()) / eta_norm);
        }
    }

    let s0 = &corpus[0];
    let t0 = s0.ts[3];
    let errs: Vec<f64> = [4e-2, 2e-2, 1e-2]
        .iter()
        .map(|&h| curvature_from_connection(&s0.params, t0, h).unwrap())
        .collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let second_order = orders.iter().all(|o| (1.8..=2.2).contains(o));

    let flat = FamilyParams::new(1.0, -1.0, -1.0, 0.0, EtaProfile::Constant(0.5)).unwrap();
    let flat_max = [0.25, 0.5, 1.0, 2.0, 7.0]
        .iter()
        .map(|&t| frame_point(&flat, t).unwrap().r.max_abs())
        .fold(0.0, f64::max);

    let pass = koszul <= 1e-10
        && curv <= 1e-6
        && second_order
        && cross <= 1e-9
        && kahler <= 1e-9
        && asd <= 1e-10
        && flat_max <= 1e-12;
    report(
        6,
        "family self-consistency",
        pass,
        format!(
            "koszul {koszul:.1e}, curvature {curv:.1e}, orders {orders:.2?}, cross-path {cross:.1e}, \
             W omega {kahler:.1e}, asd {asd:.1e}, flat {flat_max:.1e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_lemma_constants() {
    let start = Instant::now();
    let rep = verify_lemma(100_000, 1e-3).unwrap();
    let secs = start.elapsed().as_secs_f64();
    for c in &rep.checks {
        println!(
            "    [{}] {}: value {:.10}, expected {}, tol {:e}",
            if c.pass { "ok" } else { "MISMATCH" },
            c.name,
            c.value,
            c.expected,
            c.tol
        );
    }
    let pass = rep.all_pass() && secs <= 10.0;
    report(
        7,
        "quoted constants and max beta' < -1",
        pass,
        format!(
            "max beta' {:.6} at {:.4}, {secs:.2} s",
            rep.max_beta_prime, rep.argmax_beta_prime
        ),
    );
    assert!(pass, "failing checks: {:?}", rep.checks.iter().filter(|c| !c.pass).collect::<Vec<_>>());
}

#[test]
fn criterion_8_nonrealizability_sweep() {
    let s_lo: f64 = 1e-4;
    let s_hi = s_lo * (12.0 * PI / SQRT_7).exp();
    let thetas: Vec<f64> = (0..=200)
        .map(|i| 0.5 * (s_lo.ln() + (s_hi / s_lo).ln() * i as f64 / 200.0))
        .collect();
    let (mut scanned, mut closed, mut counterexamples) = (0usize, 0usize, 0usize);
    let mut min_margin = f64::INFINITY;
    let mut worst_round_trip = 0.0_f64;
    for k in [-1.0, 1.0] {
        for eps in [Sign::Plus, Sign::Minus] {
            for step in 0..360 {
                let phi = 2.0 * PI * step as f64 / 360.0;
                let spec = QSpec::new(k, 0.0, eps, phi.cos(), phi.sin());
                let (lo, hi) = match eps {
                    Sign::Plus => (s_lo, s_hi),
                    Sign::Minus => (-s_hi, -s_lo),
                };
                for iv in positivity_scan(&spec, lo, hi, 20_000).unwrap() {
                    if !iv.both_zero() {
                        continue;
                    }
                    closed += 1;
                    min_margin = min_margin
                        .min((iv.q_lo_slope + iv.q_hi_slope).abs() / iv.q_lo_slope.abs());
                    if boundary_match(&iv, 1e-6).unwrap() {
                        counterexamples += 1;
                    }
                }
                let red = reduce_to_f(&spec).unwrap();
                worst_round_trip = worst_round_trip.max(round_trip_residual(&spec, &red, &thetas).unwrap());
                scanned += 1;
            }
        }
    }
    let pass = counterexamples == 0 && closed > 0 && worst_round_trip <= 1e-10;
    report(
        8,
        "nonrealizability sweep",
        pass,
        format!(
            "{scanned} specs, {closed} closed intervals, {counterexamples} matches, \
             min slope mismatch {min_margin:.3e}, round trip {worst_round_trip:.1e}"
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_9_ode_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut failures = 0;
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let eps = if rng.random_bool(0.5) { Sign::Plus } else { Sign::Minus };
        let spec = QSpec::new(
            rng.random_range(-5.0..5.0),
            rng.random_range(-2.0..2.0),
            eps,
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
        );
        let side = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let t = spec.gamma + side * rng.random_range(-5.0_f64..5.0).exp();
        let r = ode_residual(&spec, t).unwrap();
        worst = worst.max(r);
        if r > 1e-10 {
            failures += 1;
        }
    }
    let pass = failures == 0;
    report(9, "Euler ODE residual", pass, format!("max {worst:.2e}, {failures} failures"));
    assert!(pass);
}

#[test]
fn family_weakly_einstein_residual_matches_conditions() {
    for s in family_corpus(20, 10, 5) {
        for &t in &s.ts {
            let (umq, _) = we_residual(&s.params, &s.spec, t).unwrap();
            let fp = frame_point(&s.params, t).unwrap();
            let rep = equiv_conditions(&fp.r, &fp.g, &fp.j, 1e-8).unwrap();
            assert_eq!(umq <= 1e-8, rep.all_hold());
        }
    }
}
