use crate::{Cmd, Common};
use flowtm::beltrami::{fit_window_polynomial, lift, Poly2, Window};
use flowtm::curve::interval_bound_log;
use flowtm::field::{ErrorSchedule, FieldSpec};
use flowtm::flow::{
    simulate_bounded, simulate_input, HaltingSetSpec, IntegratorConfig, SimulationOutcome, SimulationVerdict,
    Unperturbed,
};
use flowtm::io::{self, RobustnessRow, RunConfig, RunManifest};
use flowtm::machine::{
    presets, run as run_machine, run_bounded, BoundedVerdict, MachineSpec, RunVerdict, TapeBoundedSpec,
};
use flowtm::robust::{resource_estimate, PerturbationSpec};
use flowtm::sphere::{delta_threshold, discrete_orbit_verdict, DampingProfile};
use rayon::prelude::*;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] flowtm::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

pub enum Status {
    Pass,
    Fail,
}

type Result<T> = std::result::Result<T, CliError>;

fn status(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

pub fn load_config(c: &Common) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(p) = &c.config {
        let text = fs::read_to_string(p).map_err(|source| CliError::Io { path: p.clone(), source })?;
        cfg.apply(&io::parse_kv(&text)?)?;
    }
    if let Some(v) = &c.machine {
        cfg.machine = v.clone();
    }
    macro_rules! take {
        ($($f:ident),*) => { $(if let Some(v) = c.$f { cfg.$f = v; })* };
    }
    take!(inputs, lmax, window, seed, eps0, lambda_frac);
    Ok(cfg)
}

/// A path to a machine file, or a preset name.
pub fn load_machine(name: &str) -> Result<MachineSpec> {
    let p = Path::new(name);
    if p.is_file() {
        let text = fs::read_to_string(p).map_err(|source| CliError::Io { path: p.into(), source })?;
        return MachineSpec::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())));
    }
    presets::by_name(name).ok_or_else(|| CliError::Usage(format!("no machine file or preset named `{name}`")))
}

fn parse_target(s: &str) -> Result<HaltingSetSpec> {
    let digits = s
        .chars()
        .map(|c| c.to_digit(10).map(|d| d as u8))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| CliError::Usage(format!("target `{s}` must be decimal digits")))?;
    HaltingSetSpec::new(digits).map_err(|e| CliError::Usage(e.to_string()))
}

fn parse_bounds(m: &MachineSpec, s: &str) -> Result<TapeBoundedSpec> {
    let bad = || CliError::Usage(format!("bounds `{s}` must look like lo:hi"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo = a.trim().parse().map_err(|_| bad())?;
    let hi = b.trim().parse().map_err(|_| bad())?;
    TapeBoundedSpec::new(m.clone(), lo, hi).map_err(|e| CliError::Usage(e.to_string()))
}

struct Out {
    dir: PathBuf,
    manifest: RunManifest,
}

impl Out {
    fn new(dir: &Path, manifest: RunManifest) -> Result<Self> {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
        Ok(Out { dir: dir.into(), manifest })
    }

    fn write(&mut self, name: &str, body: impl AsRef<[u8]>) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| CliError::Io { path, source })?;
        self.manifest.add_artifact(name);
        Ok(())
    }

    fn table(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> flowtm::Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write(name, buf)
    }

    fn finish(mut self) -> Result<()> {
        let text = self.manifest.to_text();
        let path = self.dir.join("manifest.txt");
        fs::write(&path, text).map_err(|source| CliError::Io { path, source })?;
        self.manifest.artifacts.clear();
        Ok(())
    }
}

fn compile(cfg: &RunConfig) -> Result<(MachineSpec, FieldSpec)> {
    let m = load_machine(&cfg.machine)?;
    let fs = FieldSpec::compile(&m, &cfg.field_params())?;
    Ok((m, fs))
}

pub fn run(common: &Common, cmd: &Cmd) -> Result<Status> {
    let mut cfg = load_config(common)?;
    match cmd {
        Cmd::Estimate { sb, c } => {
            if let Some(v) = sb {
                cfg.sb = *v as f64;
            }
            if let Some(v) = c {
                cfg.c_const = *v;
            }
            return estimate(&cfg);
        }
        Cmd::Perturb { trials: Some(t), .. } => cfg.trials = *t,
        Cmd::Extend3d { order: Some(k), .. } => cfg.order = *k,
        Cmd::Sphere { delta_frac: Some(d), .. } => cfg.delta_frac = *d,
        _ => {}
    }
    let (m, fs) = compile(&cfg)?;
    let icfg = cfg.integrator();
    let out_dir = common.out.as_path();
    match cmd {
        Cmd::Compile { grid } => cmd_compile(&cfg, &fs, out_dir, *grid),
        Cmd::Simulate { target, bounds, fail_on_unresolved } => {
            let t = parse_target(target)?;
            let tb = bounds.as_deref().map(|b| parse_bounds(&m, b)).transpose()?;
            cmd_simulate(&cfg, &fs, &icfg, out_dir, &t, tb.as_ref(), *fail_on_unresolved)
        }
        Cmd::Verify { target, bounds } => {
            let t = parse_target(target)?;
            let tb = bounds.as_deref().map(|b| parse_bounds(&m, b)).transpose()?;
            cmd_verify(&cfg, &fs, &icfg, out_dir, &t, tb.as_ref())
        }
        Cmd::Perturb { target, .. } => cmd_perturb(&cfg, &fs, &icfg, out_dir, &parse_target(target)?),
        Cmd::Extend3d { datum, band, height, beltrami_lambda, grid, .. } => {
            cmd_extend3d(&cfg, &fs, out_dir, datum, *band, *height, *beltrami_lambda, *grid)
        }
        Cmd::Sphere { target, .. } => cmd_sphere(&cfg, &fs, &icfg, out_dir, &parse_target(target)?),
        Cmd::Estimate { .. } => unreachable!("handled above"),
    }
}

fn cmd_compile(cfg: &RunConfig, fs: &FieldSpec, dir: &Path, grid: usize) -> Result<Status> {
    let mut out = Out::new(dir, RunManifest::new(cfg, fs, None))?;
    for i in 0..fs.bands() {
        out.table(&format!("curve_{i}.csv"), |w| io::write_curve(w, fs, i, 200))?;
        let top = fs.chart(i)?.family().budget() as f64;
        let rect = [2.0 * i as f64 - 0.25, 2.0 * i as f64 + 1.25, -0.25, top + 0.5];
        out.table(&format!("field_{i}.csv"), |w| io::write_field_grid(w, fs, rect, grid))?;
    }
    println!("machine {} ({} bands, {} heights)", fs.machine().name, fs.bands(), cfg.field_params().heights);
    println!("lambda {:e} rho0 {:e} c0 {:e} eps {}", fs.lambda(), fs.rho0(), fs.c0(), fs.eps());
    out.finish()?;
    Ok(Status::Pass)
}

fn traced(icfg: &IntegratorConfig) -> IntegratorConfig {
    IntegratorConfig { record_trajectory: true, ..icfg.clone() }
}

fn write_run(out: &mut Out, fs: &FieldSpec, o: &SimulationOutcome, tag: &str, heights: usize) -> Result<()> {
    let i = o.band;
    out.table(&format!("{tag}trajectory_{i}.csv"), |w| io::write_trajectory(w, fs, i, &o.trajectory))?;
    out.table(&format!("{tag}events_{i}.csv"), |w| io::write_events(w, &o.events))?;
    out.write(&format!("{tag}plot_{i}.svg"), io::trajectory_svg(fs, i, &o.trajectory, heights)?)
}

fn cmd_simulate(
    cfg: &RunConfig,
    fs: &FieldSpec,
    icfg: &IntegratorConfig,
    dir: &Path,
    target: &HaltingSetSpec,
    tb: Option<&TapeBoundedSpec>,
    fail_on_unresolved: bool,
) -> Result<Status> {
    let mut out = Out::new(dir, RunManifest::new(cfg, fs, None))?;
    let tcfg = traced(icfg);
    let runs = fs
        .inputs()
        .par_iter()
        .map(|inp| simulate_input(fs, inp.index, target, &Unperturbed, &tcfg))
        .collect::<flowtm::Result<Vec<_>>>()?;
    let mut table = String::new();
    let mut unresolved = false;
    for o in &runs {
        unresolved |= matches!(o.verdict, SimulationVerdict::Unresolved { .. });
        let line = format!("{} hit={}", io::verdict_line(o.band, &o.verdict), o.hit);
        println!("{line}");
        table.push_str(&line);
        table.push('\n');
        let height = match &o.verdict {
            SimulationVerdict::Halted { height, .. } => *height,
            _ => cfg.lmax,
        };
        write_run(&mut out, fs, o, "", height)?;
    }
    out.write("verdicts.txt", table)?;
    if let Some(tb) = tb {
        let runs = fs
            .inputs()
            .par_iter()
            .filter(|inp| tb.fits(&inp.config))
            .map(|inp| simulate_bounded(fs, inp.index, tb, &Unperturbed, &tcfg))
            .collect::<flowtm::Result<Vec<_>>>()?;
        let mut table = String::new();
        for o in &runs {
            let line = format!("{} bounded", io::verdict_line(o.band, &o.verdict));
            println!("{line}");
            table.push_str(&line);
            table.push('\n');
            let heights = o.events.last().map_or(1, |e| e.height.max(1));
            write_run(&mut out, fs, o, "bounded_", heights)?;
        }
        out.write("bounded_verdicts.txt", table)?;
    }
    out.finish()?;
    Ok(status(!(fail_on_unresolved && unresolved)))
}

/// Flow verdict against direct execution, as `(oracle, flow, agrees)` labels.
fn compare_free(
    m: &MachineSpec,
    fs: &FieldSpec,
    icfg: &IntegratorConfig,
    target: &HaltingSetSpec,
    band: usize,
) -> Result<(String, String, bool)> {
    let inp = &fs.inputs()[band];
    let o = simulate_input(fs, band, target, &Unperturbed, icfg)?;
    let (oracle, ok) = match run_machine(m, &inp.config, icfg.lmax as u64) {
        RunVerdict::Halted { output, steps } => {
            let hit = target.matches(&output);
            let h = (steps as usize).max(1);
            let ok = matches!(&o.verdict, SimulationVerdict::Halted { point, height }
                if *height == h && point.r == output.r && point.s == output.s)
                && o.hit == hit;
            (format!("HALTED@{h} hit={hit}"), ok)
        }
        RunVerdict::Unresolved => {
            ("UNRESOLVED".to_string(), matches!(o.verdict, SimulationVerdict::Unresolved { .. }) && !o.hit)
        }
    };
    Ok((oracle, format!("{} hit={}", o.verdict, o.hit), ok))
}

fn compare_bounded(
    fs: &FieldSpec,
    icfg: &IntegratorConfig,
    tb: &TapeBoundedSpec,
    band: usize,
) -> Result<(String, String, bool)> {
    let inp = &fs.inputs()[band];
    let direct = run_bounded(tb, &inp.config, tb.exhaustive_budget().try_into().unwrap_or(u64::MAX))?;
    let o = simulate_bounded(fs, band, tb, &Unperturbed, icfg)?;
    let ok = match (&direct, &o.verdict) {
        (BoundedVerdict::Halted { steps, .. }, SimulationVerdict::Halted { height, .. }) => {
            (*steps).max(1) == *height as u64
        }
        (BoundedVerdict::OutOfMemory { steps }, SimulationVerdict::OutOfMemory { height }) => *steps == *height as u64,
        (BoundedVerdict::Loop { .. }, SimulationVerdict::Loop) => true,
        _ => false,
    };
    Ok((direct.label().to_string(), o.verdict.to_string(), ok))
}

fn cmd_verify(
    cfg: &RunConfig,
    fs: &FieldSpec,
    icfg: &IntegratorConfig,
    dir: &Path,
    target: &HaltingSetSpec,
    tb: Option<&TapeBoundedSpec>,
) -> Result<Status> {
    let mut out = Out::new(dir, RunManifest::new(cfg, fs, None))?;
    let m = fs.machine();
    let rows = (0..fs.bands())
        .into_par_iter()
        .map(|i| {
            let free = compare_free(m, fs, icfg, target, i)?;
            let bounded = match tb {
                Some(tb) if tb.fits(&fs.inputs()[i].config) => Some(compare_bounded(fs, icfg, tb, i)?),
                _ => None,
            };
            Ok((i, free, bounded))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut table = String::from("machine,input,mode,oracle,flow,agrees\n");
    let mut all = true;
    for (i, free, bounded) in &rows {
        for (mode, r) in [("free", Some(free)), ("bounded", bounded.as_ref())] {
            let Some((o, f, ok)) = r else { continue };
            all &= *ok;
            let line = format!("{},{i},{mode},{o},{f},{ok}", m.name);
            println!("{line}");
            table.push_str(&line);
            table.push('\n');
        }
    }
    out.write("verify.csv", table)?;
    out.finish()?;
    println!("{}", if all { "all verdicts agree" } else { "DISAGREEMENT" });
    Ok(status(all))
}

fn cmd_perturb(
    cfg: &RunConfig,
    fs: &FieldSpec,
    icfg: &IntegratorConfig,
    dir: &Path,
    target: &HaltingSetSpec,
) -> Result<Status> {
    let sched = ErrorSchedule::for_field(fs, fs.bands() + cfg.lmax + 1, cfg.eps0);
    let mut out = Out::new(dir, RunManifest::new(cfg, fs, Some(&sched)))?;
    let m = fs.machine();
    let base = fs
        .inputs()
        .par_iter()
        .map(|inp| simulate_input(fs, inp.index, target, &Unperturbed, icfg))
        .collect::<flowtm::Result<Vec<_>>>()?;
    let jobs: Vec<(usize, u64)> =
        (0..fs.bands()).flat_map(|i| (0..cfg.trials as u64).map(move |k| (i, cfg.seed + k))).collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, seed)| {
            let pert = PerturbationSpec::sample(&sched, fs.bands(), seed);
            let o = simulate_input(fs, i, target, &pert, icfg)?;
            let violations = o
                .events
                .iter()
                .filter(|e| e.height >= 1)
                .filter(|e| {
                    let bound = interval_bound_log(m.states(), e.band, e.height).scale_ln(-(4f64).ln());
                    e.rho.magnitude().is_some_and(|r| r >= bound)
                })
                .count();
            let row = RobustnessRow {
                machine: m.name.clone(),
                input: i,
                seed,
                verdict: o.verdict.to_string(),
                hit: o.hit,
                agrees_with_unperturbed: o.hit == base[i].hit && o.verdict == base[i].verdict,
            };
            Ok((row, violations))
        })
        .collect::<flowtm::Result<Vec<_>>>()?;
    let table: Vec<RobustnessRow> = rows.iter().map(|r| r.0.clone()).collect();
    out.table("robustness.csv", |w| io::write_robustness(w, &table))?;
    let changed = table.iter().filter(|r| !r.agrees_with_unperturbed).count();
    let violations: usize = rows.iter().map(|r| r.1).sum();
    println!("{} perturbed runs, {changed} verdict changes", table.len());
    println!("crossings above A_(i,l)/4: {violations}");
    out.finish()?;
    Ok(status(changed == 0))
}

#[allow(clippy::too_many_arguments)]
fn cmd_extend3d(
    cfg: &RunConfig,
    fs: &FieldSpec,
    dir: &Path,
    datum: &str,
    band: usize,
    height: usize,
    lambda: f64,
    grid: usize,
) -> Result<Status> {
    let sched = ErrorSchedule::for_field(fs, fs.bands() + cfg.lmax + 1, cfg.eps0);
    let mut out = Out::new(dir, RunManifest::new(cfg, fs, Some(&sched)))?;
    let f = match datum {
        "0" => Poly2::zero(),
        "x" => Poly2::x(),
        "xy" => Poly2::x().mul(&Poly2::y()),
        "fit" => {
            fs.chart(band)?;
            let b = band as f64;
            let h = height as f64;
            let w = Window::new(2.0 * b, 2.0 * b + 1.0, h - 0.25, h + 1.25)?;
            let rep = fit_window_polynomial(fs, w, cfg.fit_degree, 24, Some(&sched))?;
            let text = format!(
                "window [{}, {}] x [{}, {}]\ndegree {}\nrms_residual {:e}\ngrad_sup_err {:e}\nvalue_sup_err {:e}\nfield_sup {:e}\nthreshold {}\ncertified {}\n",
                w.x0, w.x1, w.y0, w.y1, rep.fit.degree, rep.fit.rms_residual, rep.fit.grad_sup_err,
                rep.fit.value_sup_err, rep.fit.field_sup,
                rep.threshold.map_or("-".to_string(), |t| t.to_string()), rep.certified
            );
            print!("{text}");
            out.write("fit.txt", text)?;
            rep.fit.to_poly()
        }
        other => return Err(CliError::Usage(format!("unknown datum `{other}` (use fit, 0, x or xy)"))),
    };
    let (_, u, rep) = lift(&f, lambda, cfg.order)?;
    let report = format!(
        "order {}\nchecked_through {}\ncurl_residual {}\ndiv_residual {}\nplane_ok {}\nok {}\n",
        cfg.order,
        rep.checked_through,
        rep.curl.as_ref().map_or("none".to_string(), |(k, c, p)| format!("order {k} component {c}: {p}")),
        rep.div.as_ref().map_or("none".to_string(), |(k, c, p)| format!("order {k} component {c}: {p}")),
        rep.plane_ok,
        rep.ok()
    );
    print!("{report}");
    out.write("residuals.txt", report)?;
    out.write("series.txt", u.dump())?;
    out.table("grid.csv", |w| io::write_grid(w, &u.evaluator().grid(1.0, grid)))?;
    out.finish()?;
    Ok(status(rep.ok()))
}

fn cmd_sphere(
    cfg: &RunConfig,
    fs: &FieldSpec,
    icfg: &IntegratorConfig,
    dir: &Path,
    target: &HaltingSetSpec,
) -> Result<Status> {
    let d0 = delta_threshold(fs.eps(), fs.lambda());
    let delta = cfg.delta_frac * d0;
    let damping = DampingProfile::new(cfg.damping_radius)?;
    let mut out = Out::new(dir, RunManifest::new(cfg, fs, None))?;
    let tcfg = traced(icfg);
    let rows = fs
        .inputs()
        .par_iter()
        .map(|inp| {
            let c = simulate_input(fs, inp.index, target, &Unperturbed, icfg)?;
            let d = discrete_orbit_verdict(fs, inp.index, target, delta, damping, &tcfg)?;
            Ok((inp.index, c, d))
        })
        .collect::<flowtm::Result<Vec<_>>>()?;
    let mut table = String::from("input,continuous,discrete,hit_continuous,hit_discrete,no_band_skipped,agrees\n");
    let mut all = true;
    for (i, c, d) in &rows {
        let ok = c.hit == d.hit && d.no_band_skipped();
        all &= ok;
        let line = format!("{i},{},{},{},{},{},{ok}", c.verdict, d.verdict, c.hit, d.hit, d.no_band_skipped());
        println!("{line}");
        table.push_str(&line);
        table.push('\n');
        out.table(&format!("sphere_{i}.csv"), |w| io::write_sphere_orbit(w, &d.iterates))?;
        out.table(&format!("shadow_{i}.csv"), |w| io::write_shadow(w, &d.iterates))?;
    }
    println!("delta {delta:e} (delta0 {d0:e})");
    out.write("sphere.csv", table)?;
    out.finish()?;
    Ok(status(all))
}

fn estimate(cfg: &RunConfig) -> Result<Status> {
    if cfg.sb < 1.0 || cfg.sb.fract() != 0.0 {
        return Err(CliError::Usage(format!("--sb must be a positive integer, got {}", cfg.sb)));
    }
    let r = resource_estimate(cfg.sb as u32, cfg.c_const)?;
    println!("s_b = {}, C = {}", r.s_b, r.c);
    println!("eps = C exp(-exp(exp(C s_b)))");
    println!("ln eps = {} - {} * 10^{}", r.eps.offset(), r.eps.coeff(), r.eps.level());
    println!("log10(-ln eps + ln C) = {}", r.decimal_exponent());
    println!("H1 = C exp(exp(exp(C s_b)))");
    println!("ln ln H1 = {}", r.h1_lnln());
    println!("ln ln ln H1 = {}", r.h1_lnlnln());
    println!("ln M = {}", r.ln_memory());
    Ok(Status::Pass)
}
