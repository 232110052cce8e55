use clap::{Args, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{Map, Value};

use we_kit::conditions::{equiv_conditions, identity_suite, is_weakly_einstein, kahler_spectrum_check};
use we_kit::examples::{constant_curvature, eps_space, product_surfaces, random_curvature};
use we_kit::family::{frame_point, koszul_check, ricci_eigs_potential_path, we_residual, FamilyParams};
use we_kit::lemma_f::{reduce_to_f, round_trip_residual, verify_lemma};
use we_kit::ode_q::{
    boundary_match, ode_residual, positivity_scan, q_eval, sign_changes, BoundaryKind,
    QSpec, Sign, SQRT_7,
};
use we_kit::tensor::{contraction_bundle, Metric};
use we_kit::Result;

use crate::report::{num, CheckResult, Report, Table};

pub const RNG_NAME: &str = "ChaCha8Rng";

/// Flags shared by every command.
#[derive(Debug, Clone)]
pub struct Common {
    pub seed: u64,
    pub samples: Option<usize>,
    pub tol: f64,
}

fn config(common: &Common, extra: &[(&str, Value)]) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("seed".into(), Value::from(common.seed));
    m.insert("rng".into(), Value::from(RNG_NAME));
    m.insert("tol".into(), num(common.tol));
    for (k, v) in extra {
        m.insert((*k).into(), v.clone());
    }
    m
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

#[derive(Debug, Clone, Args)]
pub struct IdentityArgs {
    /// Dimension of the random curvature tensors.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
}

pub fn identities(args: &IdentityArgs, common: &Common) -> Result<Report> {
    let samples = common.samples.unwrap_or(1000);
    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let seeds: Vec<u64> = (0..samples).map(|_| rng.random()).collect();
    let g = Metric::identity(args.n.max(2));
    let reports = seeds
        .par_iter()
        .map(|&s| identity_suite(&random_curvature(s, args.n, 1.0), &g, common.tol))
        .collect::<Result<Vec<_>>>()?;
    let tol = common.tol;
    let mut results = vec![
        CheckResult::at_most("max_trw1_residual", max_of(reports.iter().map(|r| r.trw1_residual)), tol),
        CheckResult::at_most("max_trw2_residual", max_of(reports.iter().map(|r| r.trw2_residual)), tol),
    ];
    if args.n == 4 {
        results.push(CheckResult::at_most(
            "max_trf_residual",
            max_of(reports.iter().filter_map(|r| r.trf_residual)),
            tol,
        ));
        results.push(CheckResult::at_most(
            "max_trm_residual",
            max_of(reports.iter().filter_map(|r| r.trm_residual)),
            tol,
        ));
        results.push(CheckResult::at_most(
            "max_trc_w_multiple_residual",
            max_of(reports.iter().filter_map(|r| r.trc_w_multiple_residual)),
            tol,
        ));
        results.push(CheckResult::count(
            "iff_disagreements",
            reports.iter().filter(|r| r.iff_consistency != Some(true)).count(),
            0,
        ));
    }
    Ok(Report {
        command: "identities".into(),
        config: config(
            common,
            &[("n", Value::from(args.n)), ("samples", Value::from(samples))],
        ),
        results,
        table: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleKind {
    Constant,
    Product,
    Eps,
    Random,
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct ExampleArgs {
    #[arg(value_enum)]
    pub kind: ExampleKind,
    /// Sectional curvature of the space form.
    #[arg(long, default_value_t = 1.0)]
    pub kappa: f64,
    /// Dimension for the space form and random tensors.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Gaussian curvature of the first factor.
    #[arg(long, default_value_t = 1.0)]
    pub k1: f64,
    /// Gaussian curvature of the second factor.
    #[arg(long, default_value_t = -1.0)]
    pub k2: f64,
    /// EPS parameter.
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
}

pub fn example(args: &ExampleArgs, common: &Common) -> Result<Report> {
    let tol = common.tol;
    let mut results = Vec::new();
    let extra: Vec<(&str, Value)>;
    match args.kind {
        ExampleKind::Constant => {
            let ex = constant_curvature(args.kappa, args.n)?;
            extra = vec![("kind", "constant".into()), ("kappa", num(args.kappa)), ("n", args.n.into())];
            let we = is_weakly_einstein(&ex.r, &ex.g, tol)?;
            results.push(CheckResult::flag("weakly_einstein", we.is_multiple, true));
            if args.n >= 4 {
                let b = contraction_bundle(&ex.r, &ex.g)?;
                let nf = args.n as f64;
                results.push(CheckResult::close("scalar", b.scalar, nf * (nf - 1.0) * args.kappa, tol * nf * nf));
                results.push(CheckResult::at_most("einstein_norm", ex.g.norm(b.einstein.matrix()), tol));
                results.push(CheckResult::at_most("weyl_max_abs", b.weyl.max_abs(), tol));
            }
        }
        ExampleKind::Product => {
            let ex = product_surfaces(args.k1, args.k2);
            extra = vec![("kind", "product".into()), ("k1", num(args.k1)), ("k2", num(args.k2))];
            let predicted = args.k1 == args.k2 || args.k1 == -args.k2;
            let we = is_weakly_einstein(&ex.r, &ex.g, tol)?;
            let b = contraction_bundle(&ex.r, &ex.g)?;
            let spectrum = kahler_spectrum_check(&b.einstein, &ex.g, b.scalar, tol)?;
            let eq = equiv_conditions(&ex.r, &ex.g, ex.j.as_ref().expect("product carries J"), tol)?;
            results.push(CheckResult::flag("weakly_einstein", we.is_multiple, predicted));
            results.push(CheckResult::info("trc_factor", we.factor));
            results.push(CheckResult::flag("spectrum_ok", spectrum.spectrum_ok, true));
            results.push(CheckResult::info("a_value", spectrum.a_value));
            results.push(CheckResult::flag("cond_a", eq.cond_a, predicted));
            results.push(CheckResult::flag("cond_b", eq.cond_b, predicted));
            results.push(CheckResult::flag("cond_c", eq.cond_c, predicted));
            results.push(CheckResult::flag("cond_d", eq.cond_d, predicted));
        }
        ExampleKind::Eps => {
            let ex = eps_space(args.a)?;
            extra = vec![("kind", "eps".into()), ("a", num(args.a))];
            let b = contraction_bundle(&ex.r, &ex.g)?;
            let a2 = args.a * args.a;
            let (eigs, _) = ex.g.generalized_eigen(b.ricci.matrix());
            let mut expected = [-3.0 * a2, a2, -a2, -a2];
            expected.sort_by(f64::total_cmp);
            let err = max_of(eigs.iter().zip(expected).map(|(x, e)| (x - e).abs()));
            let we = is_weakly_einstein(&ex.r, &ex.g, tol)?;
            let spectrum = kahler_spectrum_check(&b.einstein, &ex.g, b.scalar, tol)?;
            results.push(CheckResult::at_most("ricci_eigenvalue_error", err, 1e-12 * a2.max(1.0)));
            results.push(CheckResult::flag("weakly_einstein", we.is_multiple, true));
            results.push(CheckResult::close("trc_factor", we.factor, 6.0 * a2 * a2, tol * a2 * a2));
            results.push(CheckResult::flag("spectrum_ok", spectrum.spectrum_ok, false));
        }
        ExampleKind::Random => {
            let r = random_curvature(common.seed, args.n, 1.0);
            extra = vec![("kind", "random".into()), ("n", args.n.into())];
            results.push(CheckResult::at_most("symmetry_defect", r.symmetry_defects().max(), 1e-12));
            let rep = identity_suite(&r, &Metric::identity(args.n), tol)?;
            results.push(CheckResult::at_most("max_identity_residual", rep.max_identity_residual(), tol));
            if let Some(c) = rep.iff_consistency {
                results.push(CheckResult::flag("iff_consistency", c, true));
            }
        }
    }
    Ok(Report {
        command: "example".into(),
        config: config(common, &extra),
        results,
        table: None,
    })
}

fn parse_sign(v: f64) -> Result<Sign> {
    Sign::from_value(v)
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct FamilyArgs {
    #[arg(long, default_value_t = 4.0)]
    pub k: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    /// Sign of t - gamma on the working interval (+1 or -1).
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Coefficient A of the cosine solution.
    #[arg(long, default_value_t = 0.3)]
    pub coef_a: f64,
    /// Coefficient B of the sine solution.
    #[arg(long, default_value_t = 0.0)]
    pub coef_b: f64,
    #[arg(long, default_value_t = -1.0)]
    pub theta: f64,
    /// Modulus of the structure constant p; its sign is chosen to make zeta positive.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Working interval; defaults to |t - gamma| in [0.5, 4] on the eps side.
    #[arg(long)]
    pub t_min: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
}

pub fn family(args: &FamilyArgs, common: &Common) -> Result<Report> {
    let eps = parse_sign(args.eps)?;
    let spec = QSpec::new(args.k, args.gamma, eps, args.coef_a, args.coef_b);
    let params = FamilyParams::from_qspec(spec, args.theta, args.p)?;
    let (d0, d1) = (args.gamma + eps.value() * 0.5, args.gamma + eps.value() * 4.0);
    let t_min = args.t_min.unwrap_or(d0.min(d1));
    let t_max = args.t_max.unwrap_or(d0.max(d1));
    params.validate_interval(t_min, t_max)?;
    let grid = args.grid.max(2);
    let tol = common.tol;

    struct Row {
        t: f64,
        q: f64,
        mu: f64,
        lambda: f64,
        cross: f64,
        umq: f64,
        einstein: f64,
        koszul: f64,
        conds: [bool; 4],
    }
    let rows = (0..grid)
        .into_par_iter()
        .map(|i| -> Result<Row> {
            let t = t_min + (t_max - t_min) * i as f64 / (grid - 1) as f64;
            let fp = frame_point(&params, t)?;
            let (mu, lambda) = ricci_eigs_potential_path(&spec, t)?;
            let (umq, einstein) = we_residual(&params, &spec, t)?;
            let eq = equiv_conditions(&fp.r, &fp.g, &fp.j, tol)?;
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
            Ok(Row {
                t,
                q: q_eval(&spec, t)?.q,
                mu: fp.mu,
                lambda: fp.lambda,
                cross: rel(mu, fp.mu).max(rel(lambda, fp.lambda)),
                umq,
                einstein,
                koszul: koszul_check(&params, t)?,
                conds: [eq.cond_a, eq.cond_b, eq.cond_c, eq.cond_d],
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut results = vec![
        CheckResult::at_most("max_umq_residual", max_of(rows.iter().map(|r| r.umq)), tol),
        CheckResult::at_most("max_koszul_deviation", max_of(rows.iter().map(|r| r.koszul)), 1e-10),
        CheckResult::at_most("max_cross_path_deviation", max_of(rows.iter().map(|r| r.cross)), 1e-9),
        CheckResult::count(
            "condition_disagreements",
            rows.iter().filter(|r| r.conds.iter().any(|&c| c != r.conds[0])).count(),
            0,
        ),
        CheckResult::count(
            "weakly_einstein_mismatches",
            rows.iter().filter(|r| (r.umq <= tol) != r.conds.iter().all(|&c| c)).count(),
            0,
        ),
    ];
    let mu_spread = rows.iter().map(|r| r.mu).fold(f64::NEG_INFINITY, f64::max)
        - rows.iter().map(|r| r.mu).fold(f64::INFINITY, f64::min);
    if spec.is_einstein() {
        results.push(CheckResult::at_most("max_einstein_residual", max_of(rows.iter().map(|r| r.einstein)), tol));
        results.push(CheckResult::at_most(
            "max_abs_mu_lambda",
            max_of(rows.iter().map(|r| r.mu.abs().max(r.lambda.abs()))),
            tol,
        ));
    } else {
        results.push(CheckResult::flag(
            "einstein_residual_positive",
            rows.iter().all(|r| r.einstein > 0.0),
            true,
        ));
        results.push(CheckResult::flag("mu_nonconstant", mu_spread > 0.0, true));
    }

    let table = Table {
        columns: vec![
            "t", "Q", "mu", "lambda", "umq_residual", "einstein_residual", "cond_a", "cond_b", "cond_c",
            "cond_d",
        ],
        rows: rows
            .iter()
            .map(|r| {
                let mut row = vec![num(r.t), num(r.q), num(r.mu), num(r.lambda), num(r.umq), num(r.einstein)];
                row.extend(r.conds.iter().map(|&c| Value::Bool(c)));
                row
            })
            .collect(),
    };
    Ok(Report {
        command: "family".into(),
        config: config(
            common,
            &[
                ("k", num(args.k)),
                ("gamma", num(args.gamma)),
                ("eps", num(eps.value())),
                ("coef_a", num(args.coef_a)),
                ("coef_b", num(args.coef_b)),
                ("theta", num(args.theta)),
                ("p", num(params.p)),
                ("q", num(params.q)),
                ("t_min", num(t_min)),
                ("t_max", num(t_max)),
                ("grid", grid.into()),
            ],
        ),
        results,
        table: Some(table),
    })
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct OdeArgs {
    #[arg(long, default_value_t = 4.0)]
    pub k: f64,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.0)]
    pub coef_a: f64,
    #[arg(long, default_value_t = 0.0)]
    pub coef_b: f64,
    #[arg(long, default_value_t = 0.1)]
    pub t_lo: f64,
    #[arg(long, default_value_t = 10.0)]
    pub t_hi: f64,
    #[arg(long, default_value_t = 2000)]
    pub grid: usize,
    /// Relative tolerance for opposite endpoint slopes.
    #[arg(long, default_value_t = 1e-6)]
    pub match_tol: f64,
}

fn kind_name(k: BoundaryKind) -> &'static str {
    match k {
        BoundaryKind::Zero => "zero",
        BoundaryKind::Blowup => "blowup",
        BoundaryKind::DomainEdge => "domain_edge",
    }
}

pub fn ode_q(args: &OdeArgs, common: &Common) -> Result<Report> {
    let spec = QSpec::new(args.k, args.gamma, parse_sign(args.eps)?, args.coef_a, args.coef_b);
    let samples = common.samples.unwrap_or(10_000);
    let tol = common.tol;
    let intervals = positivity_scan(&spec, args.t_lo, args.t_hi, args.grid)?;
    let roots = sign_changes(&spec, args.t_lo, args.t_hi, args.grid)?;

    let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
    let (s0, s1) = ((args.t_lo - spec.gamma).abs().ln(), (args.t_hi - spec.gamma).abs().ln());
    let side = if args.t_lo > spec.gamma { 1.0 } else { -1.0 };
    let ts: Vec<f64> = (0..samples)
        .map(|_| spec.gamma + side * rng.random_range(s0.min(s1)..=s0.max(s1)).exp())
        .collect();
    let residuals = ts.iter().map(|&t| ode_residual(&spec, t)).collect::<Result<Vec<_>>>()?;
    let root_q = roots.iter().map(|&r| q_eval(&spec, r).map(|v| v.q.abs())).collect::<Result<Vec<_>>>()?;

    let mut matches = 0;
    let mut rows = Vec::new();
    for (i, iv) in intervals.iter().enumerate() {
        let verdict = if iv.both_zero() {
            let m = boundary_match(iv, args.match_tol)?;
            matches += m as usize;
            Value::Bool(m)
        } else {
            Value::Null
        };
        rows.push(vec![
            Value::from(i),
            num(iv.lo),
            num(iv.hi),
            Value::from(kind_name(iv.lo_kind)),
            Value::from(kind_name(iv.hi_kind)),
            num(iv.q_lo_slope),
            num(iv.q_hi_slope),
            verdict,
        ]);
    }
    let results = vec![
        CheckResult::at_most("max_ode_residual", max_of(residuals), tol),
        CheckResult::at_most("max_abs_q_at_roots", max_of(root_q), tol),
        CheckResult::count("boundary_matches", matches, 0),
        CheckResult::tally("positivity_intervals", intervals.len()),
    ];
    Ok(Report {
        command: "ode-q".into(),
        config: config(
            common,
            &[
                ("k", num(args.k)),
                ("gamma", num(args.gamma)),
                ("eps", num(args.eps)),
                ("coef_a", num(args.coef_a)),
                ("coef_b", num(args.coef_b)),
                ("t_lo", num(args.t_lo)),
                ("t_hi", num(args.t_hi)),
                ("grid", args.grid.into()),
                ("samples", samples.into()),
                ("match_tol", num(args.match_tol)),
            ],
        ),
        results,
        table: Some(Table {
            columns: vec!["interval", "lo", "hi", "lo_kind", "hi_kind", "q_lo_slope", "q_hi_slope", "boundary_match"],
            rows,
        }),
    })
}

#[derive(Debug, Clone, Args)]
pub struct LemmaArgs {
    #[arg(long, default_value_t = 100_000)]
    pub grid: usize,
    /// Distance from c excluded from the scan of beta'.
    #[arg(long, default_value_t = 1e-3)]
    pub margin: f64,
}

pub fn lemma_f(args: &LemmaArgs, common: &Common) -> Result<Report> {
    let rep = verify_lemma(args.grid, args.margin)?;
    let mut results: Vec<CheckResult> = rep
        .checks
        .iter()
        .map(|c| CheckResult {
            name: c.name.to_string(),
            value: num(c.value),
            expected: num(c.expected),
            tol: num(c.tol),
            pass: c.pass,
        })
        .collect();
    results.push(CheckResult::flag("verdict", rep.verdict, true));
    results.push(CheckResult::info("beta'(0)", rep.beta_prime_at_0));
    results.push(CheckResult::info("argmax beta'", rep.argmax_beta_prime));
    Ok(Report {
        command: "lemma-f".into(),
        config: config(common, &[("grid", args.grid.into()), ("margin", num(args.margin))]),
        results,
        table: None,
    })
}

#[derive(Debug, Clone, Args)]
pub struct NonrealArgs {
    /// Number of phases of (A, B) on the unit circle.
    #[arg(long, default_value_t = 360)]
    pub phases: usize,
    #[arg(long, default_value_t = 20_000)]
    pub grid: usize,
    /// Smallest |t - gamma| scanned.
    #[arg(long, default_value_t = 1e-4)]
    pub t_min: f64,
    /// Number of oscillation periods in log|t - gamma|.
    #[arg(long, default_value_t = 3.0)]
    pub periods: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub match_tol: f64,
}

pub fn nonrealizability(args: &NonrealArgs, common: &Common) -> Result<Report> {
    let s_lo = args.t_min;
    let s_hi = s_lo * (args.periods * 4.0 * std::f64::consts::PI / SQRT_7).exp();
    let thetas: Vec<f64> = (0..=200)
        .map(|i| 0.5 * (s_lo.ln() + (s_hi / s_lo).ln() * i as f64 / 200.0))
        .collect();
    let mut specs = Vec::new();
    for k in [-1.0, 1.0] {
        for eps in [Sign::Plus, Sign::Minus] {
            for step in 0..args.phases {
                specs.push((k, eps, 2.0 * std::f64::consts::PI * step as f64 / args.phases as f64));
            }
        }
    }
    struct Row {
        closed: usize,
        matches: usize,
        min_mismatch: f64,
        round_trip: f64,
    }
    let rows = specs
        .par_iter()
        .map(|&(k, eps, phi)| -> Result<Row> {
            let spec = QSpec::new(k, 0.0, eps, phi.cos(), phi.sin());
            let (lo, hi) = match eps {
                Sign::Plus => (s_lo, s_hi),
                Sign::Minus => (-s_hi, -s_lo),
            };
            let mut row = Row {
                closed: 0,
                matches: 0,
                min_mismatch: f64::INFINITY,
                round_trip: 0.0,
            };
            for iv in positivity_scan(&spec, lo, hi, args.grid)? {
                if iv.both_zero() {
                    row.closed += 1;
                    row.min_mismatch = row
                        .min_mismatch
                        .min((iv.q_lo_slope + iv.q_hi_slope).abs() / iv.q_lo_slope.abs());
                    row.matches += boundary_match(&iv, args.match_tol)? as usize;
                }
            }
            row.round_trip = round_trip_residual(&spec, &reduce_to_f(&spec)?, &thetas)?;
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;

    let closed: usize = rows.iter().map(|r| r.closed).sum();
    let results = vec![
        CheckResult::count("boundary_matches", rows.iter().map(|r| r.matches).sum(), 0),
        CheckResult::flag("closed_intervals_found", closed > 0, true),
        CheckResult::at_most("max_round_trip_residual", max_of(rows.iter().map(|r| r.round_trip)), common.tol),
        CheckResult::tally("closed_intervals", closed),
        CheckResult::info(
            "min_slope_mismatch",
            rows.iter().map(|r| r.min_mismatch).fold(f64::INFINITY, f64::min),
        ),
    ];
    let table = Table {
        columns: vec!["k", "eps", "phase", "closed_intervals", "matches", "min_slope_mismatch", "round_trip_residual"],
        rows: specs
            .iter()
            .zip(&rows)
            .map(|(&(k, eps, phi), r)| {
                vec![
                    num(k),
                    num(eps.value()),
                    num(phi),
                    Value::from(r.closed),
                    Value::from(r.matches),
                    num(r.min_mismatch),
                    num(r.round_trip),
                ]
            })
            .collect(),
    };
    Ok(Report {
        command: "nonrealizability".into(),
        config: config(
            common,
            &[
                ("phases", args.phases.into()),
                ("grid", args.grid.into()),
                ("t_min", num(args.t_min)),
                ("periods", num(args.periods)),
                ("match_tol", num(args.match_tol)),
                ("k_values", Value::Array(vec![num(-1.0), num(1.0)])),
            ],
        ),
        results,
        table: Some(table),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn common() -> Common {
        Common {
            seed: 3,
            samples: Some(8),
            tol: 1e-9,
        }
    }

    #[test]
    fn identities_run_is_seed_deterministic() {
        let args = IdentityArgs { n: 4 };
        let a = identities(&args, &common()).unwrap().to_json();
        let b = identities(&args, &common()).unwrap().to_json();
        assert_eq!(a, b);
        assert_eq!(a["pass"], true);
    }

    #[test]
    fn non_kahler_product_is_flagged_not_weakly_einstein() {
        let args = ExampleArgs {
            kind: ExampleKind::Product,
            kappa: 1.0,
            n: 4,
            k1: 2.0,
            k2: 1.0,
            a: 1.0,
        };
        let rep = example(&args, &common()).unwrap();
        assert!(rep.pass());
        let we = rep.results.iter().find(|r| r.name == "weakly_einstein").unwrap();
        assert_eq!(we.value, Value::Bool(false));
    }

    #[test]
    fn family_rejects_interval_across_gamma() {
        let args = FamilyArgs {
            k: 4.0,
            gamma: 0.0,
            eps: 1.0,
            coef_a: 0.3,
            coef_b: 0.0,
            theta: -1.0,
            p: 1.0,
            t_min: Some(-1.0),
            t_max: Some(1.0),
            grid: 4,
        };
        assert!(family(&args, &common()).is_err());
    }
}
