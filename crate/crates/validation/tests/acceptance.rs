//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any
//! criterion fails.

use flowtm::beltrami::{lift, rat, Poly2};
use flowtm::curve::{bump, bump_prime, interval_bound_log, BumpProfile};
use flowtm::field::{verify_gradient, ErrorSchedule, FieldParams, FieldSpec};
use flowtm::flow::{
    simulate_bounded, simulate_input, simulate_input_from, FlowState, HaltingSetSpec, IntegratorConfig,
    SimulationVerdict, Unperturbed,
};
use flowtm::logmag::{LogMagnitude, SignedLog};
use flowtm::machine::{
    encoding_soundness, interval_of, presets, run, run_bounded, BoundedVerdict, Configuration, EncodedPoint,
    MachineSpec, RunVerdict, TapeBoundedSpec,
};
use flowtm::robust::{contraction_check, resource_estimate, PerturbationSpec};
use flowtm::sphere::{delta_threshold, discrete_orbit_verdict, DampingProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::f64::consts::LN_10;
use std::sync::OnceLock;
use std::time::Instant;

const LMAX: usize = 20;
const WINDOW: f64 = 25.0;
const INPUTS: usize = 5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

/// One machine of the oracle suite, compiled once.
struct Case {
    machine: MachineSpec,
    tb: TapeBoundedSpec,
    fs: FieldSpec,
    target: HaltingSetSpec,
}

fn suite() -> &'static [Case] {
    static SUITE: OnceLock<Vec<Case>> = OnceLock::new();
    SUITE.get_or_init(|| {
        // the bounded runs need the curves to reach past the window radius
        let heights = LMAX.max(WINDOW.ceil() as usize) + 1;
        let params = FieldParams { inputs: INPUTS, heights, ..Default::default() };
        [(presets::countdown(), -1, 1), (presets::bounce(), -2, 3), (presets::runaway(), -2, 3)]
            .into_par_iter()
            .map(|(m, lo, hi)| Case {
                fs: FieldSpec::compile(&m, &params).expect("compile"),
                tb: TapeBoundedSpec::new(m.clone(), lo, hi).expect("bounds"),
                target: HaltingSetSpec::new(vec![0, 0, 0]).expect("t*"),
                machine: m,
            })
            .collect()
    })
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig { lmax: LMAX, window: WINDOW, ..Default::default() }
}

// (expected hit, expected halting height) from direct execution
fn direct_hit(case: &Case, c: &Configuration) -> (bool, Option<usize>) {
    match run(&case.machine, c, LMAX as u64) {
        RunVerdict::Halted { output, steps } => (case.target.matches(&output), Some((steps as usize).max(1))),
        RunVerdict::Unresolved => (false, None),
    }
}

fn bounded_agrees(direct: &BoundedVerdict, v: &SimulationVerdict) -> bool {
    match (direct, v) {
        (BoundedVerdict::Halted { steps, .. }, SimulationVerdict::Halted { height, .. }) => {
            (*steps).max(1) == *height as u64
        }
        (BoundedVerdict::OutOfMemory { steps }, SimulationVerdict::OutOfMemory { height }) => *steps == *height as u64,
        (BoundedVerdict::Loop { .. }, SimulationVerdict::Loop) => true,
        _ => false,
    }
}

fn verdict_height(v: &SimulationVerdict) -> Option<usize> {
    match v {
        SimulationVerdict::Halted { height, .. } => Some(*height),
        _ => None,
    }
}

fn c1() -> Outcome {
    let t = Instant::now();
    let rep = encoding_soundness(1_000_000);
    let secs = t.elapsed().as_secs_f64();
    // independent exact witness: 1/48 and 1/50 in the same band
    let a = interval_of(&EncodedPoint::of(&Configuration::from_small(4, 1, 0)), 0).unwrap();
    let b = interval_of(&EncodedPoint::of(&Configuration::from_small(1, 0, 2)), 0).unwrap();
    let witness = a.overlaps(&b);
    let pass = rep.disjoint() && rep.width_ok() && rep.gap_ok() && secs < 5.0;
    outcome(
        pass,
        format!(
            "{} points, width exact {}/{}, overlapping pairs {} (e.g. {:?}; exact witness 1/48 vs 1/50 overlaps: {witness}), gap violations {}, {secs:.2}s",
            rep.points,
            rep.width_exact,
            rep.points,
            rep.overlapping_pairs,
            rep.first_overlaps.first(),
            rep.gap_violations
        ),
    )
}

fn c2() -> Outcome {
    let t = Instant::now();
    let p = BumpProfile::new(0.01, 1e-12).unwrap();
    let (z, err) = p.z_full();
    let sup = p.sup_slope();
    let secs = t.elapsed().as_secs_f64();
    // oracle: composite Simpson and a dense grid maximum
    let n = 200_000;
    let h = 1.0 / n as f64;
    let simpson = (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n {
                1.0
            } else if k % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * bump(k as f64 * h)
        })
        .sum::<f64>()
        * h
        / 3.0;
    let grid_sup = (1..1_000_000).map(|k| bump_prime(k as f64 * 1e-6).abs()).fold(0.0, f64::max);
    let agree = (z - simpson).abs() < 1e-10 && (sup - grid_sup).abs() < 1e-6;
    let pass = z > 7e-3 && err <= 1e-8 && sup < 0.1 && agree && secs < 1.0;
    outcome(
        pass,
        format!(
            "integral {z:.12} (err {err:.1e}, Simpson {simpson:.12}), sup {sup:.6} (grid {grid_sup:.6}), {secs:.2}s"
        ),
    )
}

fn c3() -> Outcome {
    let t = Instant::now();
    let params = FieldParams { inputs: 6, heights: LMAX, ..Default::default() };
    let per_seg = 10_000;
    let rows: Vec<(String, f64, f64)> = [presets::countdown(), presets::bounce(), presets::runaway()]
        .into_par_iter()
        .map(|m| {
            let fs = FieldSpec::compile(&m, &params).unwrap();
            let mut worst: f64 = 0.0;
            let mut oracle_gap: f64 = 0.0;
            for chart in fs.charts() {
                let fam = chart.family();
                for l in 0..fam.budget() {
                    for k in 0..per_seg {
                        let u = l as f64 + (k as f64 + 0.5) / per_seg as f64;
                        let kappa = fam.curvature(u).unwrap();
                        worst = worst.max(kappa.abs());
                        if k % 97 == 0 {
                            // oracle: second differences of the plotted curve
                            let h = 1e-4;
                            let x = |v: f64| chart.param_to_plane(v, 0.0).unwrap().0;
                            let (xm, x0, xp) = (x(u - h), x(u), x(u + h));
                            let d1 = (xp - xm) / (2.0 * h);
                            let d2 = (xp - 2.0 * x0 + xm) / (h * h);
                            let fd = -d2 / (1.0 + d1 * d1).powf(1.5);
                            oracle_gap = oracle_gap.max((fd - kappa).abs() / (1.0 + kappa.abs()));
                        }
                    }
                }
            }
            (m.name.clone(), worst, oracle_gap)
        })
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let worst = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let gap = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let pass = worst < 15.0 && gap < 1e-3 && secs < 30.0;
    let per: Vec<String> = rows.iter().map(|r| format!("{} {:.4}", r.0, r.1)).collect();
    outcome(pass, format!("max |kappa| {worst:.4} [{}], finite-difference gap {gap:.1e}, {secs:.1}s", per.join(", ")))
}

fn c4() -> Outcome {
    let fs = &suite()[1].fs;
    let rep = verify_gradient(fs, 1000, 4);
    outcome(rep.max_rel_err < 1e-6, format!("{} points, max relative error {:.2e}", rep.samples, rep.max_rel_err))
}

fn c5() -> Outcome {
    let params = FieldParams { inputs: 21, heights: 21, ..Default::default() };
    let fs = FieldSpec::compile(&presets::countdown(), &params).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let picks: Vec<(usize, usize, u32)> = (0..100)
        .map(|_| {
            let i = rng.gen_range(0..=20usize);
            let l = rng.gen_range(0..=20 - i);
            (i, l, rng.gen_range(1..=20u32))
        })
        .collect();
    let reps: Vec<_> = picks.par_iter().map(|&(i, l, j)| contraction_check(&fs, i, l, j, 5).unwrap()).collect();
    let passed = reps.iter().filter(|r| r.pass).count();
    let first_fail = reps.iter().find(|r| !r.pass).map(|r| (r.band, r.height, r.j, r.worst_margin));
    let neg = contraction_check(&fs.with_lambda_unchecked(100.0 * flowtm::field::lambda0()), 0, 0, 1, 5).unwrap();
    let pass = passed == reps.len() && !neg.pass;
    outcome(
        pass,
        format!(
            "{passed}/100 certificates hold (first failure (i,l,j,margin) = {first_fail:?}); 100 Lambda0 negative test fails as expected: {}",
            !neg.pass
        ),
    )
}

fn c6() -> Outcome {
    let t = Instant::now();
    let rows: Vec<(String, usize, bool, bool)> = suite()
        .par_iter()
        .flat_map(|case| {
            case.fs.inputs().par_iter().map(move |inp| {
                let (hit, h) = direct_hit(case, &inp.config);
                let out = simulate_input(&case.fs, inp.index, &case.target, &Unperturbed, &cfg()).unwrap();
                let free = out.hit == hit && verdict_height(&out.verdict) == h;
                let direct = run_bounded(&case.tb, &inp.config, 100_000).unwrap();
                let b = simulate_bounded(&case.fs, inp.index, &case.tb, &Unperturbed, &cfg()).unwrap();
                (case.machine.name.clone(), inp.index, free, bounded_agrees(&direct, &b.verdict))
            })
        })
        .collect();
    let secs = t.elapsed().as_secs_f64();
    let bad: Vec<_> = rows.iter().filter(|r| !(r.2 && r.3)).map(|r| (r.0.clone(), r.1)).collect();
    outcome(bad.is_empty() && secs < 120.0, format!("{} cases, disagreements {bad:?}, {secs:.1}s", rows.len()))
}

fn c7() -> Outcome {
    let trials = 20u64;
    let rows: Vec<(String, usize, u64, bool, Option<(usize, f64)>)> = suite()
        .par_iter()
        .flat_map(|case| {
            let budget = case.fs.bands() + LMAX + 1;
            let sched = ErrorSchedule::for_field(&case.fs, budget, 0.1);
            let m = case.machine.states();
            case.fs
                .inputs()
                .par_iter()
                .flat_map(move |inp| {
                    let sched = sched.clone();
                    (0..trials).into_par_iter().map(move |seed| {
                        let pert = PerturbationSpec::sample(&sched, case.fs.bands(), 1000 + seed);
                        let (hit, h) = direct_hit(case, &inp.config);
                        let out = simulate_input(&case.fs, inp.index, &case.target, &pert, &cfg()).unwrap();
                        let direct = run_bounded(&case.tb, &inp.config, 100_000).unwrap();
                        let b = simulate_bounded(&case.fs, inp.index, &case.tb, &pert, &cfg()).unwrap();
                        let same =
                            out.hit == hit && verdict_height(&out.verdict) == h && bounded_agrees(&direct, &b.verdict);
                        // A_{i,l}/4 at every crossing, in log space
                        let worst = out
                            .events
                            .iter()
                            .chain(&b.events)
                            .filter(|e| e.height >= 1)
                            .filter_map(|e| {
                                let bound = interval_bound_log(m, e.band, e.height).scale_ln(-(4f64).ln());
                                e.rho.magnitude().map(|r| (e.height, r.ln_minus(&bound)))
                            })
                            .fold(None, |acc: Option<(usize, f64)>, x| match acc {
                                Some(a) if a.1 >= x.1 => Some(a),
                                _ => Some(x),
                            });
                        (case.machine.name.clone(), inp.index, seed, same, worst)
                    })
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let changed = rows.iter().filter(|r| !r.3).count();
    let violations: Vec<_> = rows.iter().filter(|r| r.4.is_some_and(|w| w.1 >= 0.0)).collect();
    let worst = rows.iter().filter_map(|r| r.4).fold(f64::NEG_INFINITY, |a, w| a.max(w.1));
    let first = violations.first().map(|r| (r.0.clone(), r.1, r.2, r.4.unwrap()));
    outcome(
        changed == 0 && violations.is_empty(),
        format!(
            "{} perturbed runs, verdict changes {changed}, confinement violations {} (first (machine,input,seed,(height,ln-margin)) {first:?}), worst ln-margin {worst:.3e}",
            rows.len(),
            violations.len()
        ),
    )
}

fn c8() -> Outcome {
    let rows: Vec<(String, usize, usize)> = suite()
        .par_iter()
        .flat_map(|case| {
            case.fs.inputs().par_iter().map(move |inp| {
                let (hit, _) = direct_hit(case, &inp.config);
                let chart = case.fs.chart(inp.index).unwrap();
                let hw = inp.point.ln_half_width().value();
                let cx = inp.point.center(inp.index);
                let half = 0.5 * case.fs.eps();
                let mut rng = ChaCha8Rng::seed_from_u64(800 + inp.index as u64);
                let mut differ = 0;
                for _ in 0..10 {
                    let x = cx + rng.gen_range(-1.0..1.0) * hw / 4.0;
                    let y = rng.gen_range(-half..half);
                    let (u, rho) = chart.plane_to_param(x, y).unwrap();
                    let st = FlowState::new(u, SignedLog::from_f64(rho));
                    let out = simulate_input_from(&case.fs, inp.index, &case.target, &Unperturbed, &cfg(), st).unwrap();
                    if out.hit != hit {
                        differ += 1;
                    }
                }
                (case.machine.name.clone(), inp.index, differ)
            })
        })
        .collect();
    let bad: Vec<_> = rows.iter().filter(|r| r.2 > 0).collect();
    outcome(bad.is_empty(), format!("{} starts over {} cases, differing: {bad:?}", rows.len() * 10, rows.len()))
}

fn random_quartic(seed: u64) -> Poly2 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Poly2::zero();
    for i in 0..=4u32 {
        for j in 0..=4 - i {
            f.add_term(i, j, rat(rng.gen_range(-9..=9), rng.gen_range(1..=7)));
        }
    }
    f
}

fn c9() -> Outcome {
    let t = Instant::now();
    let data =
        [("0", Poly2::zero()), ("x", Poly2::x()), ("xy", Poly2::x().mul(&Poly2::y())), ("quartic", random_quartic(9))];
    let mut notes = Vec::new();
    let mut pass = true;
    for (name, f) in &data {
        let (_, _, rep) = lift(f, 1.0, 20).unwrap();
        pass &= rep.ok() && rep.checked_through == 18;
        notes.push(format!("{name}: through {} ok={}", rep.checked_through, rep.ok()));
    }
    // closed form for F = x, λ = 1: u = (cos z, -sin z, 0)
    let (_, u, _) = lift(&Poly2::x(), 1.0, 20).unwrap();
    let ev = u.evaluator();
    let grid = ev.grid(1.0, 21);
    let err = grid
        .iter()
        .map(|r| (r[3] - r[2].cos()).abs().max((r[4] + r[2].sin()).abs()).max(r[5].abs()))
        .fold(0.0, f64::max);
    pass &= err <= 1e-12;
    let secs = t.elapsed().as_secs_f64();
    pass &= secs < 30.0;
    outcome(pass, format!("{}; F = x grid max error {err:.1e} on 21^3 points; {secs:.1}s", notes.join(", ")))
}

fn c10() -> Outcome {
    let rows: Vec<(String, usize, bool, bool)> = suite()
        .par_iter()
        .flat_map(|case| {
            let delta = 0.5 * delta_threshold(case.fs.eps(), case.fs.lambda());
            case.fs.inputs().par_iter().map(move |inp| {
                let cont = simulate_input(&case.fs, inp.index, &case.target, &Unperturbed, &cfg()).unwrap();
                let d =
                    discrete_orbit_verdict(&case.fs, inp.index, &case.target, delta, DampingProfile::default(), &cfg())
                        .unwrap();
                (case.machine.name.clone(), inp.index, d.hit == cont.hit, d.no_band_skipped())
            })
        })
        .collect();
    let bad: Vec<_> = rows.iter().filter(|r| !(r.2 && r.3)).collect();
    let delta = 0.5 * delta_threshold(suite()[0].fs.eps(), suite()[0].fs.lambda());
    outcome(bad.is_empty(), format!("delta = {delta:.6}, {} cases, failures {bad:?}", rows.len()))
}

fn c11() -> Outcome {
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for c in [0.5, 1.0, 2.0] {
        let mut prev: Option<LogMagnitude> = None;
        for s_b in 1u32.. {
            let x = c * s_b as f64;
            if x.exp() / LN_10 > 1e9 {
                break;
            }
            let r = resource_estimate(s_b, c).unwrap();
            // oracle: -ln ε + ln C = e^{e^x}, so ln of the levelled part is e^x
            let ln_levelled = r.eps.coeff().ln() + r.eps.level() as f64 * LN_10;
            let rel = (ln_levelled - x.exp()).abs() / x.exp();
            worst = worst.max(rel);
            pass &= rel < 1e-13 && r.eps.offset() == c.ln() && r.inv_h1.offset() == -c.ln();
            pass &= r.inv_h1.coeff() == r.eps.coeff() && r.inv_h1.level() == r.eps.level();
            if x.exp() < 700.0 {
                let direct = c.ln() - x.exp().exp();
                pass &= (r.ln_eps() - direct).abs() <= 1e-13 * direct.abs();
            }
            if let Some(p) = prev {
                pass &= r.eps < p;
            }
            prev = Some(r.eps);
        }
    }
    outcome(
        pass,
        format!("levelled forms reproduced, worst relative deviation {worst:.1e}; strictly decreasing in s_b"),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("C1 encoding soundness", c1),
        ("C2 quadrature facts", c2),
        ("C3 curvature bound", c3),
        ("C4 gradient identity", c4),
        ("C5 contraction certificate", c5),
        ("C6 oracle equivalence", c6),
        ("C7 robustness", c7),
        ("C8 set-to-set starts", c8),
        ("C9 Cauchy-Kovalevskaya lift", c9),
        ("C10 sphere time-delta map", c10),
        ("C11 resource estimator", c11),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let o = f();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        if !o.pass {
            failed += 1;
        }
        println!("{tag} {name}: {} [{:.1}s]", o.detail, t.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failed} failed", 11 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
