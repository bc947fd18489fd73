//! Acceptance criteria. Each criterion prints one PASS/FAIL line; the test
//! fails if any criterion fails. Run with `--nocapture` to see the lines.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{FromPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use henon_core::family::{sweep_common_periodic, unit_locus_grid, ParamGrid, ParamStatus};
use henon_core::green::{curve_green_mass, GreenEvaluator, PolyCurve};
use henon_core::height::canonical_height;
use henon_core::measure::{compare_measures, measure_discrepancy, measure_from_periodic, support_check};
use henon_core::padic::{padic_green, relevant_places, PlaceId};
use henon_core::periodic::{exact_periodic_points, fixed_points_exact_resultant, periodic_modp, periodic_numeric, CommonOptions};
use henon_core::rational::{int, is_prime, parse_rational, rat};
use henon_core::spec_file::{load_family, load_map};
use henon_core::{Direction, ExactPoint, HenonMap, Rational};

type Outcome = std::result::Result<String, String>;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn map(name: &str) -> HenonMap {
    load_map(&data(name)).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(elapsed: Duration, limit_s: f64, detail: String) -> Outcome {
    check(
        elapsed.as_secs_f64() <= limit_s,
        format!("{detail}; {:.2}s (limit {limit_s}s)", elapsed.as_secs_f64()),
    )
}

fn c1_functional_equation() -> Outcome {
    let t0 = Instant::now();
    let f = map("dissipative.json");
    let ev = GreenEvaluator::new(&f);
    let lambda = f.dynamical_degree() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let tol = 1e-9;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let (x, y): (f64, f64) = (rng.gen_range(-2.0..=2.0), rng.gen_range(-2.0..=2.0));
        let q = ExactPoint::new(Rational::from_f64(x).unwrap(), Rational::from_f64(y).unwrap());
        let qn = q.to_numeric();
        let gp = ev.green(Direction::Plus, &qn, tol).map_err(|e| e.to_string())?.value;
        let gp1 = ev.green(Direction::Plus, &f.eval_exact(&q).to_numeric(), tol).map_err(|e| e.to_string())?.value;
        let gm = ev.green(Direction::Minus, &qn, tol).map_err(|e| e.to_string())?.value;
        let gm1 = ev.green(Direction::Minus, &f.eval_inverse_exact(&q).to_numeric(), tol).map_err(|e| e.to_string())?.value;
        worst = worst.max((gp1 - lambda * gp).abs() / gp.max(1.0));
        worst = worst.max((gm1 - lambda * gm).abs() / gm.max(1.0));
    }
    if worst > 1e-6 {
        return Err(format!("worst relative defect {worst:.3e} > 1e-6"));
    }
    within(t0.elapsed(), 5.0, format!("worst relative defect {worst:.3e} over 100 points"))
}

fn c2_fixed_point_heights() -> Outcome {
    let t0 = Instant::now();
    let f = map("dissipative.json");
    let mut details = Vec::new();
    for q in [ExactPoint::new(int(1), int(1)), ExactPoint::new(rat(1, 2), rat(1, 2))] {
        let h = canonical_height(&f, &q, 1e-8).map_err(|e| e.to_string())?;
        if h.total() > 1e-8 {
            return Err(format!("h({q}) = {:e}", h.total()));
        }
        for (place, c) in &h.per_place {
            if matches!(place, PlaceId::Prime(_)) && !(c.exact && c.plus == 0.0 && c.minus == 0.0) {
                return Err(format!("place {place} not exactly zero at {q}"));
            }
        }
        details.push(format!("h({q})={:e}", h.total()));
    }
    within(t0.elapsed(), 1.0, details.join(", "))
}

fn c3_height_transformation() -> Outcome {
    let f = map("dissipative.json");
    let mut details = Vec::new();
    for q in [ExactPoint::new(int(0), int(2)), ExactPoint::new(int(1), int(3)), ExactPoint::new(int(0), rat(1, 3))] {
        let a = canonical_height(&f, &q, 1e-9).map_err(|e| e.to_string())?;
        let b = canonical_height(&f, &f.eval_exact(&q), 1e-9).map_err(|e| e.to_string())?;
        let d = (b.h_plus - 2.0 * a.h_plus).abs();
        if d > 1e-6 {
            return Err(format!("{q}: |h+(f q) - 2 h+(q)| = {d:e}"));
        }
        details.push(format!("{q}: {d:.1e}"));
    }
    Ok(details.join(", "))
}

fn box_rationals(bound: i64) -> Vec<Rational> {
    let mut set = BTreeSet::new();
    for den in 1..=bound {
        for num in -bound..=bound {
            if num.gcd(&den) == 1 || num == 0 {
                set.insert(rat(num, den));
            }
        }
    }
    set.into_iter().collect()
}

fn c4_northcott() -> Outcome {
    let t0 = Instant::now();
    let f = map("dissipative.json");
    let coords = box_rationals(20);
    let points: Vec<ExactPoint> = coords
        .iter()
        .flat_map(|x| coords.iter().map(move |y| ExactPoint::new(x.clone(), y.clone())))
        .collect();
    let small: BTreeSet<ExactPoint> = points
        .par_iter()
        .filter_map(|q| match canonical_height(&f, q, 1e-8) {
            Ok(h) if h.total() <= 1e-4 => Some(Ok(q.clone())),
            Ok(_) => None,
            Err(e) => Some(Err(format!("{q}: {e}"))),
        })
        .collect::<std::result::Result<_, _>>()?;
    let in_box = |c: &Rational| c.numer().magnitude() <= &20u32.into() && c.denom() <= &BigInt::from(20);
    let certified: BTreeSet<ExactPoint> = exact_periodic_points(&f, 8, &[101, 103], 1_000_000)
        .map_err(|e| e.to_string())?
        .points()
        .filter(|q| in_box(&q.x) && in_box(&q.y))
        .cloned()
        .collect();
    let detail = format!(
        "{} box points, {} small-height, {} certified periodic",
        points.len(),
        small.len(),
        certified.len()
    );
    if small != certified {
        let only_h: Vec<String> = small.difference(&certified).map(|q| q.to_string()).collect();
        let only_c: Vec<String> = certified.difference(&small).map(|q| q.to_string()).collect();
        return Err(format!("{detail}; height only {only_h:?}; certified only {only_c:?}"));
    }
    within(t0.elapsed(), 120.0, detail)
}

fn c5_modp() -> Outcome {
    let mut details = Vec::new();
    for name in ["dissipative.json", "conservative.json", "composed.json"] {
        let f = map(name);
        for p in [5u64, 7, 11] {
            let s = periodic_modp(&f, p, (p * p) as usize).map_err(|e| e.to_string())?;
            if s.cycle_length_sum != p * p {
                return Err(format!("{name} mod {p}: cycle lengths sum to {}", s.cycle_length_sum));
            }
        }
        details.push(format!("{name} ok"));
    }
    let s = periodic_modp(&map("dissipative.json"), 5, 1).map_err(|e| e.to_string())?;
    let fixed: BTreeSet<(u64, u64)> = s.cycles.iter().map(|c| c.points[0]).collect();
    let want: BTreeSet<(u64, u64)> = [(1, 1), (3, 3)].into_iter().collect();
    if fixed != want {
        return Err(format!("fixed points mod 5: {fixed:?}"));
    }
    details.push("Fix mod 5 = {(1,1),(3,3)}".into());
    Ok(details.join(", "))
}

fn c6_resultant_counts() -> Outcome {
    let f = HenonMap::quadratic(rat(2, 7), rat(3, 5)).unwrap();
    let c = f.to_complex();
    let mut details = Vec::new();
    for (n, want) in [(1u32, 2usize), (2, 4)] {
        let r = fixed_points_exact_resultant(&f, n, 64).map_err(|e| e.to_string())?;
        if r.count != want {
            return Err(format!("#Fix(f^{n}) = {} by resultant, want {want}", r.count));
        }
        let num = periodic_numeric(&c, n as usize, 1e-10, 200, 3).map_err(|e| e.to_string())?;
        let pts: Vec<_> = num.points().copied().collect();
        if pts.len() != r.count {
            return Err(format!("Newton found {} of {} points of period {n}", pts.len(), r.count));
        }
        for p in &pts {
            let e = c.iterate_point(p, n as usize).map(|q| q.dist(p)).unwrap_or(f64::INFINITY);
            if e > 1e-8 {
                return Err(format!("closure error {e:e} at period {n}"));
            }
        }
        details.push(format!("#Fix(f^{n}) = {want}, Newton {}", pts.len()));
    }
    Ok(details.join(", "))
}

fn c7_sweep() -> Outcome {
    let t0 = Instant::now();
    let f = load_family(&data("pair_f_family.json")).unwrap();
    let g = load_family(&data("pair_g_family.json")).unwrap();
    let params: Vec<Rational> = (-12..=12).map(|k| rat(k, 4)).collect();
    let opts = CommonOptions {
        max_period: 2,
        numeric: false,
        ..CommonOptions::default()
    };
    let report = sweep_common_periodic(&f, &g, &params, &opts);
    for o in &report.outcomes {
        let b = parse_rational(&o.param).map_err(|e| e.to_string())?;
        let ok = if b.is_zero() {
            o.status == ParamStatus::SharedIterate
        } else if b == rat(-5, 2) {
            o.status == ParamStatus::Ok && o.count == 1 && o.points == vec!["-1/1,-1/1".to_string()]
        } else {
            o.status != ParamStatus::SharedIterate && o.status != ParamStatus::Failed && o.count == 0
        };
        if !ok {
            return Err(format!("b = {b}: {:?} count {}", o.status, o.count));
        }
    }
    if report.d_observed != 1 {
        return Err(format!("D_observed = {}", report.d_observed));
    }
    within(t0.elapsed(), 120.0, format!("{} parameters, D_observed = 1", report.outcomes.len()))
}

fn c8_unit_locus() -> Outcome {
    let grid = ParamGrid {
        re: (-4.0, 4.0),
        im: (-4.0, 4.0),
        resolution: 32,
    };
    let fam = |n: &str| load_family(&data(n)).unwrap();
    let pair = unit_locus_grid(&fam("pair_f_family.json"), &fam("pair_g_family.json"), &grid).map_err(|e| e.to_string())?;
    let jac = unit_locus_grid(&fam("jac_t_f_family.json"), &fam("jac_t_g_family.json"), &grid).map_err(|e| e.to_string())?;
    check(
        pair.empty && !jac.likely_discrete,
        format!(
            "pair empty={}, (t,t) flagged {:?} likely_discrete={}",
            pair.empty, jac.flagged_counts, jac.likely_discrete
        ),
    )
}

fn c9_curve_mass() -> Outcome {
    let f = map("henon_03.json");
    let v = curve_green_mass(&f, &PolyCurve::vertical(0.0), 1e3, 1e6).map_err(|e| e.to_string())?;
    let h = curve_green_mass(&f, &PolyCurve::horizontal(0.0), 1e3, 1e6).map_err(|e| e.to_string())?;
    check(
        (v.mass - 1.0).abs() <= 0.05 && (h.mass - 0.5).abs() <= 0.05,
        format!("vertical {:.4}, horizontal {:.4}", v.mass, h.mass),
    )
}

fn c10_support() -> Outcome {
    let f = map("henon_03.json");
    let s = measure_from_periodic(&f.to_complex(), 6, 1e-10, 600, 1).map_err(|e| e.to_string())?;
    if s.len() < 32 {
        return Err(format!("only {} saddle points", s.len()));
    }
    let r = support_check(&GreenEvaluator::new(&f), &s, 1e-4).map_err(|e| e.to_string())?;
    check(r.pass, format!("{} saddle points, max G = {:.3e}", s.len(), r.max_green))
}

fn c11_measure_rigidity() -> Outcome {
    let f = map("henon_03.json");
    let f2 = f.iterate(2).unwrap();
    let b = int(1);
    let f1 = load_family(&data("pair_f_family.json")).unwrap().specialize(&b).unwrap();
    let g1 = load_family(&data("pair_g_family.json")).unwrap().specialize(&b).unwrap();
    let sample = |m: &HenonMap, n: usize| measure_from_periodic(&m.to_complex(), n, 1e-10, 600, 1).map_err(|e| e.to_string());
    let (sf, sf2) = (sample(&f, 6)?, sample(&f2, 3)?);
    let (s1, t1) = (sample(&f1, 6)?, sample(&g1, 6)?);
    let same = compare_measures(&f, &f2, &sf, &sf2, 1e-2, 4).map_err(|e| e.to_string())?;
    let diff = compare_measures(&f1, &g1, &s1, &t1, 1e-2, 4).map_err(|e| e.to_string())?;
    let d_same = measure_discrepancy(&sf, &sf2).map_err(|e| e.to_string())?;
    let detail = format!(
        "d(f,f^2) = {:.3e} shared {:?}; d(f1,g1) = {:.3e} shared {:?}",
        d_same, same.shared_iterate, diff.discrepancy, diff.shared_iterate
    );
    check(
        d_same <= 1e-2
            && diff.discrepancy >= 5.0 * d_same
            && same.shared_iterate == Some((2, 1))
            && diff.shared_iterate.is_none(),
        detail,
    )
}

fn c12_padic_exactness() -> Outcome {
    let f = HenonMap::quadratic(int(0), int(1)).unwrap();
    let q = ExactPoint::new(int(0), rat(1, 3));
    let v = padic_green(&f, Direction::Plus, &q, 3).map_err(|e| e.to_string())?;
    if !(v.exact && v.multiple() == int(1)) {
        return Err(format!("3-adic G+ = {} log 3 (exact={})", v.multiple(), v.exact));
    }
    let cases = [
        (f.clone(), q.clone()),
        (map("dissipative.json"), ExactPoint::new(rat(1, 3), int(2))),
        (map("composed.json"), ExactPoint::new(rat(5, 7), rat(-2, 9))),
        (map("henon_03.json"), ExactPoint::new(rat(3, 4), rat(-1, 6))),
    ];
    for (m, pt) in &cases {
        let places = relevant_places(m, pt).map_err(|e| e.to_string())?;
        let extra: Vec<u64> = (2u64..)
            .filter(|&p| is_prime(p) && !places.contains(&PlaceId::Prime(p)))
            .take(20)
            .collect();
        for p in extra {
            for dir in [Direction::Plus, Direction::Minus] {
                let g = padic_green(m, dir, pt, p).map_err(|e| e.to_string())?;
                if !(g.exact && g.multiple().is_zero()) {
                    return Err(format!("{pt}: nonzero G at unlisted prime {p}"));
                }
            }
        }
    }
    Ok(format!("G+ = 1 log 3 exactly; 20 unlisted primes vanish for {} cases", cases.len()))
}

fn run_cli(args: &[String]) -> std::result::Result<Vec<u8>, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = henon_core::cli::run(args.iter().cloned(), &mut out, &mut err);
    if code != 0 {
        return Err(format!("{args:?} exited {code}: {}", String::from_utf8_lossy(&err)));
    }
    Ok(out)
}

fn c13_determinism() -> Outcome {
    let d = |n: &str| data(n).display().to_string();
    let s = |v: &[&str]| -> Vec<String> { std::iter::once("henon").chain(v.iter().copied()).map(String::from).collect() };
    let commands = vec![
        s(&["height", "--map", &d("dissipative.json"), "--point", "1/3,2"]),
        s(&["periodic", "--map", &d("henon_03.json"), "--max-period", "3", "--numeric", "--starts", "40", "--seed", "5"]),
        s(&["common", "--map-f", &d("dissipative.json"), "--map-g", &d("conservative.json"), "--seed", "5"]),
        s(&[
            "sweep",
            "--family-f",
            &d("pair_f_family.json"),
            "--family-g",
            &d("pair_g_family.json"),
            "--params",
            "-3:3:1/4",
            "--seed",
            "5",
        ]),
        s(&["measure", "--map", &d("henon_03.json"), "--period", "5", "--starts", "200", "--seed", "5"]),
        s(&["green", "--map", &d("henon_03.json"), "--point", "0.1,0.2+0.3i"]),
        s(&["unit-locus", "--family-f", &d("jac_t_f_family.json"), "--family-g", &d("jac_t_g_family.json")]),
    ];
    for cmd in &commands {
        let a = run_cli(cmd)?;
        let b = run_cli(cmd)?;
        serde_json::from_slice::<serde_json::Value>(&a).map_err(|e| format!("{}: not JSON: {e}", cmd[1]))?;
        if a != b {
            return Err(format!("`{}` output differs between runs", cmd[1]));
        }
    }
    Ok(format!("{} commands byte-identical across two runs", commands.len()))
}

#[test]
fn acceptance_criteria() {
    let suite = Instant::now();
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 functional equation", c1_functional_equation),
        ("2 fixed-point heights", c2_fixed_point_heights),
        ("3 height transformation", c3_height_transformation),
        ("4 desk-scale Northcott", c4_northcott),
        ("5 mod-p permutation", c5_modp),
        ("6 resultant counts", c6_resultant_counts),
        ("7 family-pair sweep", c7_sweep),
        ("8 unit-Jacobian locus", c8_unit_locus),
        ("9 curve-mass positivity", c9_curve_mass),
        ("10 support containment", c10_support),
        ("11 measure rigidity", c11_measure_rigidity),
        ("12 p-adic exactness", c12_padic_exactness),
        ("13 determinism", c13_determinism),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        let t0 = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {name}: PASS ({d}) [{secs:.2}s]"),
            Err(d) => {
                println!("criterion {name}: FAIL ({d}) [{secs:.2}s]");
                failed.push(name);
            }
        }
    }
    let total = suite.elapsed().as_secs_f64();
    println!("acceptance suite: {total:.1}s (limit 600s)");
    assert!(total <= 600.0, "acceptance suite took {total:.1}s");
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
