//! One function per subcommand. Points are computed on the worker pool and
//! written from the calling thread in a fixed key order.

use std::path::Path;

use qthermo::control::{optimize as run_swarm, Checkpoint, CheckpointPolicy, ControlProblem, RunParams};
use qthermo::heom::uniform_grid;
use qthermo::linalg::{eigh, identity, kron, sigma_x, sigma_y, sigma_z};
use qthermo::metrology::{qsnr_from, steady_qsnr, temperature_derivative_with, thermal_benchmark, QsnrSeries};
use qthermo::nonmarkov::{blp_maximize, builtin_pairs, BlpSummary, StatePair};
use qthermo::redfield::RedfieldOptions;
use qthermo::{Error as CoreError, Op, Scenario, Trajectory};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::{ConfigError, RunConfig, SolverConfig};
use crate::error::CliError;
use crate::output::{num, RunDir, Table};
use crate::plot::{line_chart, Series};

type Result<T> = std::result::Result<T, CliError>;

pub const CHECKPOINT_NAME: &str = "checkpoint.json";

pub struct Ctx<'a> {
    pub cfg: Option<&'a RunConfig>,
    pub run: &'a mut RunDir,
    pub plot: bool,
    pub seed: u64,
    pub resume: Option<&'a Path>,
    pub stop_after: Option<usize>,
    pub fingerprint: String,
}

impl<'a> Ctx<'a> {
    fn cfg(&self) -> &'a RunConfig {
        self.cfg.expect("config checked by the dispatcher")
    }

    fn plot(&mut self, name: &str, title: &str, x: &str, y: &str, series: &[Series]) -> Result<()> {
        if self.plot {
            self.run.write_text(name, &line_chart(title, x, y, series))?;
        }
        Ok(())
    }
}

/// SHA-256 of the config document without its seed.
pub fn fingerprint(snapshot: &serde_json::Value) -> String {
    let mut v = snapshot.clone();
    if let Some(map) = v.as_object_mut() {
        map.remove("seed");
    }
    let digest = Sha256::digest(v.to_string().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy)]
struct Point {
    lambda: f64,
    omega_c: f64,
    temperature: f64,
}

impl Point {
    fn tag(&self) -> String {
        format!("l{}_wc{}_T{}", num(self.lambda), num(self.omega_c), num(self.temperature))
    }
}

fn points(cfg: &RunConfig) -> Result<Vec<Point>> {
    let (ls, ws, ts) = (cfg.lambdas()?, cfg.cutoffs()?, cfg.temperatures()?);
    let mut out = Vec::with_capacity(ls.len() * ws.len() * ts.len());
    for &lambda in &ls {
        for &omega_c in &ws {
            for &temperature in &ts {
                out.push(Point {
                    lambda,
                    omega_c,
                    temperature,
                });
            }
        }
    }
    Ok(out)
}

fn base_table(header: &[&str], command: &str, cfg: &RunConfig) -> Table {
    let mut t = Table::new(header)
        .meta("command", command)
        .meta("units", crate::output::UNITS)
        .meta("solver", cfg.solver_name())
        .meta("omega0", num(cfg.omega0()));
    if let SolverConfig::Heom { depth, .. } = cfg.solver {
        t = t.meta("depth", depth);
    }
    t
}

fn point_table(header: &[&str], command: &str, cfg: &RunConfig, p: &Point, sc: &Scenario) -> Result<Table> {
    let mut t = base_table(header, command, cfg)
        .meta("lambda", num(p.lambda))
        .meta("omega_c", num(p.omega_c))
        .meta("temperature", num(p.temperature));
    if let Some(nk) = sc.n_matsubara(p.temperature)? {
        t = t.meta("n_matsubara", nk);
    }
    Ok(t)
}

/// `Σ_i σ_{x,y,z}^{(i)}` for one or two qubits.
fn collective(dim: usize) -> [Op; 3] {
    let paulis = [sigma_x(), sigma_y(), sigma_z()];
    if dim == 2 {
        return paulis;
    }
    let id = identity(2);
    paulis.map(|s| kron(&s, &id) + kron(&id, &s))
}

fn expectations(ops: &[Op; 3], rho: &Op) -> [f64; 3] {
    [0, 1, 2].map(|i| (rho * &ops[i]).trace().re)
}

/// `Var(H)/T²` of the Gibbs state; the closed form for a qubit.
fn gibbs_qsnr(cfg: &RunConfig, h: &Op, temperature: f64) -> f64 {
    if cfg.is_single_qubit() {
        return thermal_benchmark(temperature, cfg.omega0());
    }
    let (e, _) = eigh(h);
    let w: Vec<f64> = e.iter().map(|x| (-(x - e[0]) / temperature).exp()).collect();
    let z: f64 = w.iter().sum();
    let mean: f64 = e.iter().zip(&w).map(|(x, p)| x * p).sum::<f64>() / z;
    let sq: f64 = e.iter().zip(&w).map(|(x, p)| x * x * p).sum::<f64>() / z;
    (sq - mean * mean) / (temperature * temperature)
}

fn qsnr_run(cfg: &RunConfig, p: &Point, grid: &[f64]) -> Result<(Scenario, Trajectory, QsnrSeries<f64>)> {
    let sc = cfg.scenario(p.lambda, p.omega_c)?.pinned(p.temperature)?;
    let opts = cfg.derivative_options();
    let (traj, drho) = rayon::join(
        || sc.trajectory(p.temperature, grid),
        || temperature_derivative_with(&sc, p.temperature, grid, &opts),
    );
    let traj = traj?;
    let series = qsnr_from(&traj, &drho?, p.temperature)?;
    Ok((sc, traj, series))
}

pub fn dynamics(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg();
    let grid = uniform_grid(cfg.grid.t_max, cfg.grid.n_samples);
    let pts = points(cfg)?;
    let results: Vec<_> = pts.par_iter().map(|p| qsnr_run(cfg, p, &grid)).collect::<Result<_>>()?;
    let ops = collective(cfg.dim());
    let mut curves = Vec::new();
    for (p, (sc, traj, series)) in pts.iter().zip(&results) {
        let mut t = point_table(&["t", "sx", "sy", "sz", "qfi", "qsnr"], "dynamics", cfg, p, sc)?;
        for (rho, pt) in traj.states.iter().zip(&series.points) {
            let s = expectations(&ops, rho);
            t.push(vec![num(pt.time), num(s[0]), num(s[1]), num(s[2]), num(pt.qfi), num(pt.qsnr)]);
        }
        let best = series.max();
        let last = series.last();
        let t = t
            .meta("qsnr_max", num(best.qsnr))
            .meta("t_max_qsnr", num(best.time))
            .meta("qsnr_final", num(last.qsnr));
        let name = format!("dynamics_{}.csv", p.tag());
        ctx.run.write_table(&name, &t)?;
        ctx.run.flag(p.tag(), true, None);
        println!("{name}: max QSNR {:.6e} at t = {}, final {:.6e}", best.qsnr, best.time, last.qsnr);
        curves.push(Series {
            label: p.tag(),
            points: series.points.iter().map(|q| (q.time, q.qsnr)).collect(),
        });
    }
    ctx.plot("dynamics_qsnr.svg", "QSNR dynamics", "t", "Q_T", &curves)
}

pub fn steady(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg();
    let pts = points(cfg)?;
    let (ss, dopts) = (cfg.steady_options(), cfg.derivative_options());
    let rows: Vec<_> = pts
        .par_iter()
        .map(|p| -> Result<_> {
            let sc = cfg.scenario(p.lambda, p.omega_c)?;
            let thermal = gibbs_qsnr(cfg, &sc.model.h_base, p.temperature);
            match steady_qsnr(&sc, p.temperature, &ss, &dopts) {
                Ok(r) => Ok((thermal, Ok((r.point.qsnr, r.convergence_time)))),
                Err(e @ CoreError::SteadyStateNotConverged { .. }) => Ok((thermal, Err(e.to_string()))),
                Err(e) => Err(e.into()),
            }
        })
        .collect::<Result<_>>()?;

    let mut t = base_table(
        &["T", "lambda", "omega_c", "qsnr_steady", "qsnr_thermal", "convergence_time", "converged"],
        "steady",
        cfg,
    )
    .meta("steady_tolerance", num(ss.tolerance))
    .meta("steady_t_max", num(ss.t_max));
    let mut failures = 0;
    for (p, (thermal, r)) in pts.iter().zip(&rows) {
        let (q, tc, ok) = match r {
            Ok((q, tc)) => (*q, *tc, true),
            Err(_) => (f64::NAN, f64::NAN, false),
        };
        failures += usize::from(!ok);
        ctx.run.flag(p.tag(), ok, r.as_ref().err().cloned());
        t.push(vec![
            num(p.temperature),
            num(p.lambda),
            num(p.omega_c),
            num(q),
            num(*thermal),
            num(tc),
            ok.to_string(),
        ]);
    }
    ctx.run.write_table("steady.csv", &t)?;
    println!("steady.csv: {} rows, {failures} not converged", rows.len());
    if ctx.plot {
        let series = |col: &str| t.column(col).unwrap_or_default();
        let ts = series("T");
        let curves = [
            Series { label: "steady".into(), points: ts.iter().copied().zip(series("qsnr_steady")).collect() },
            Series { label: "Gibbs".into(), points: ts.iter().copied().zip(series("qsnr_thermal")).collect() },
        ];
        ctx.plot("steady_qsnr.svg", "Steady-state QSNR", "T", "Q_T", &curves)?;
    }
    if failures > 0 {
        return Err(CliError::Convergence(format!("{failures} steady-state point(s) did not converge")));
    }
    Ok(())
}

fn selected_pairs(cfg: &RunConfig) -> Result<Vec<StatePair<f64>>> {
    if !cfg.is_single_qubit() {
        return Err(ConfigError::new("system.kind", "the state-pair library is defined for a single qubit").into());
    }
    let all = builtin_pairs::<f64>();
    Ok(match &cfg.blp.pairs {
        Some(idx) => idx.iter().map(|&i| all[i - 1].clone()).collect(),
        None => all,
    })
}

pub fn blp(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg();
    let pairs = selected_pairs(cfg)?;
    let grid = uniform_grid(cfg.grid.t_max, cfg.grid.n_samples);
    let pts = points(cfg)?;
    let results: Vec<(Scenario, BlpSummary<f64>)> = pts
        .par_iter()
        .map(|p| -> Result<_> {
            let sc = cfg.scenario(p.lambda, p.omega_c)?.pinned(p.temperature)?;
            let s = blp_maximize(&sc, p.temperature, &grid, &pairs)?;
            Ok((sc, s))
        })
        .collect::<Result<_>>()?;

    for (p, (sc, summary)) in pts.iter().zip(&results) {
        let mut header = vec!["t".to_string()];
        header.extend((1..=pairs.len()).map(|i| format!("pair_{i}")));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut d = point_table(&header, "blp", cfg, p, sc)?;
        for (i, pair) in pairs.iter().enumerate() {
            d = d.meta(&format!("pair_{}", i + 1), &pair.label);
        }
        for (j, t) in grid.iter().enumerate() {
            let mut row = vec![num(*t)];
            row.extend(summary.results.iter().map(|r| num(r.distance[j])));
            d.push(row);
        }
        let tag = p.tag();
        ctx.run.write_table(&format!("blp_distance_{tag}.csv"), &d)?;

        let mut s = point_table(&["pair", "label", "n", "n_refined", "resolution_ok", "winner"], "blp", cfg, p, sc)?
            .meta("winner", &summary.best().pair_label);
        for (i, r) in summary.results.iter().enumerate() {
            s.push(vec![
                (i + 1).to_string(),
                r.pair_label.clone(),
                num(r.measure),
                num(r.refined_measure),
                r.resolution_ok.to_string(),
                (i == summary.winner).to_string(),
            ]);
            ctx.run.flag(
                format!("{tag}/pair_{}", i + 1),
                r.resolution_ok,
                (!r.resolution_ok).then(|| "BLP measure changed by more than 1% under grid refinement".to_string()),
            );
        }
        ctx.run.write_table(&format!("blp_summary_{tag}.csv"), &s)?;
        println!("blp {tag}: winner {} with N = {:.6e}", summary.best().pair_label, summary.best().measure);
        let curves: Vec<Series> = summary
            .results
            .iter()
            .map(|r| Series {
                label: r.pair_label.clone(),
                points: grid.iter().copied().zip(r.distance.iter().copied()).collect(),
            })
            .collect();
        ctx.plot(&format!("blp_distance_{tag}.svg"), "Trace distance", "t", "D", &curves)?;
    }
    Ok(())
}

pub fn sweep(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg();
    let grid = uniform_grid(cfg.grid.t_max, cfg.grid.n_samples);
    let pts = points(cfg)?;
    let pairs = if cfg.sweep.blp { Some(selected_pairs(cfg)?) } else { None };
    type Row = std::result::Result<(f64, f64, f64, Option<f64>), String>;
    let rows: Vec<Row> = pts
        .par_iter()
        .map(|p| {
            let (sc, _, series) = qsnr_run(cfg, p, &grid).map_err(|e| e.to_string())?;
            let best = series.max();
            let n = match &pairs {
                Some(pairs) => Some(
                    blp_maximize(&sc, p.temperature, &grid, pairs)
                        .map_err(|e| e.to_string())?
                        .best()
                        .measure,
                ),
                None => None,
            };
            Ok((best.qsnr, best.time, series.last().qsnr, n))
        })
        .collect();

    let mut t = base_table(
        &["lambda", "omega_c", "T", "qsnr_opt", "t_opt", "qsnr_final", "blp_n", "status"],
        "sweep",
        cfg,
    );
    let mut failures = 0;
    for (p, r) in pts.iter().zip(&rows) {
        let row = match r {
            Ok((opt, t_opt, fin, n)) => {
                ctx.run.flag(p.tag(), true, None);
                vec![
                    num(p.lambda),
                    num(p.omega_c),
                    num(p.temperature),
                    num(*opt),
                    num(*t_opt),
                    num(*fin),
                    n.map_or(String::new(), num),
                    "ok".into(),
                ]
            }
            Err(e) => {
                failures += 1;
                ctx.run.flag(p.tag(), false, Some(e.clone()));
                log::warn!("sweep point {} failed: {e}", p.tag());
                let nan = num(f64::NAN);
                vec![num(p.lambda), num(p.omega_c), num(p.temperature), nan.clone(), nan.clone(), nan, String::new(), format!("error: {e}")]
            }
        };
        t.push(row);
    }
    ctx.run.write_table("sweep.csv", &t)?;
    println!("sweep.csv: {} rows, {failures} failed", rows.len());
    if failures > 0 {
        return Err(CliError::Convergence(format!("{failures} sweep point(s) failed")));
    }
    Ok(())
}

pub fn optimize(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg();
    if !cfg.is_single_qubit() {
        return Err(ConfigError::new("system.kind", "control optimisation is defined for a single qubit").into());
    }
    let p = Point {
        lambda: cfg.scalar("bath.lambda")?,
        omega_c: cfg.scalar("bath.omega_c")?,
        temperature: cfg.scalar("temperature")?,
    };
    let o = &cfg.optimize;
    let problem = ControlProblem {
        scenario: cfg.scenario(p.lambda, p.omega_c)?.pinned(p.temperature)?,
        temperature: p.temperature,
        n_segments: o.n_segments,
        t_max: o.t_max,
        spec: cfg.fitness_spec()?,
        derivative: cfg.derivative_options(),
    };
    let params = RunParams {
        n_particles: o.n_particles,
        iterations: o.iterations,
        bounds: cfg.bounds(),
        seed: ctx.seed,
        algorithm: cfg.algorithm(),
    };
    let resume = ctx.resume.map(Checkpoint::load).transpose()?;
    let policy = CheckpointPolicy {
        path: Some(ctx.run.dir.join(CHECKPOINT_NAME)),
        fingerprint: ctx.fingerprint.clone(),
        stop_after: ctx.stop_after,
    };
    let fitness = |x: &[f64]| problem.fitness(x);
    let out = run_swarm(&fitness, problem.dimension(), &params, &policy, resume)?;
    ctx.run.note_output(CHECKPOINT_NAME);
    let done = out.history.len() - 1;
    let complete = done == params.iterations;

    let baseline = problem.baseline()?;
    let meta = |t: Table| {
        t.meta("lambda", num(p.lambda))
            .meta("omega_c", num(p.omega_c))
            .meta("temperature", num(p.temperature))
            .meta("seed", ctx.seed)
            .meta("algorithm", format!("{:?}", o.algorithm).to_lowercase())
            .meta("iterations_done", done)
            .meta("complete", complete)
    };
    let mut h = meta(base_table(&["iteration", "best_fitness"], "optimize", cfg))
        .meta("baseline_fitness", num(baseline))
        .meta("best_fitness", num(out.best_fitness));
    for (i, f) in out.history.iter().enumerate() {
        h.push(vec![i.to_string(), num(*f)]);
    }
    ctx.run.write_table("history.csv", &h)?;

    let mut c = meta(base_table(&["segment", "dx", "dy", "dz"], "optimize", cfg));
    for (k, seg) in out.best_position.chunks(3).enumerate() {
        c.push(vec![k.to_string(), num(seg[0]), num(seg[1]), num(seg[2])]);
    }
    ctx.run.write_table("best_control.csv", &c)?;

    let (with, without) = rayon::join(
        || problem.series(&out.best_position),
        || problem.series(&vec![0.0; problem.dimension()]),
    );
    let (with, without) = (with?, without?);
    let mut q = meta(base_table(&["t", "qsnr_controlled", "qsnr_uncontrolled"], "optimize", cfg));
    for (a, b) in with.iter().zip(&without) {
        q.push(vec![num(a.time), num(a.qsnr), num(b.qsnr)]);
    }
    ctx.run.write_table("comparison.csv", &q)?;
    ctx.run.flag("optimize", complete, (!complete).then(|| format!("stopped after {done} iterations")));
    println!(
        "optimize: best fitness {:.6e} vs baseline {:.6e} (ratio {:.4}) after {done} iterations",
        out.best_fitness,
        baseline,
        out.best_fitness / baseline
    );
    let hist = [Series {
        label: "best".into(),
        points: out.history.iter().enumerate().map(|(i, f)| (i as f64, *f)).collect(),
    }];
    ctx.plot("history.svg", "Fitness history", "iteration", "fitness", &hist)?;
    let cmp = [
        Series { label: "controlled".into(), points: with.iter().map(|m| (m.time, m.qsnr)).collect() },
        Series { label: "uncontrolled".into(), points: without.iter().map(|m| (m.time, m.qsnr)).collect() },
    ];
    ctx.plot("comparison.svg", "Controlled vs uncontrolled QSNR", "t", "Q_T", &cmp)
}

pub fn benchmark_thermal(ctx: &mut Ctx) -> Result<()> {
    let (temps, omega0) = match ctx.cfg {
        Some(cfg) => (cfg.temperatures()?, cfg.omega0()),
        None => ((0..100).map(|i| 0.05 + 0.95 * i as f64 / 99.0).collect(), 1.0),
    };
    let mut t = Table::new(&["T", "qsnr_thermal"])
        .meta("command", "benchmark-thermal")
        .meta("units", crate::output::UNITS)
        .meta("omega0", num(omega0));
    let mut best = (f64::NAN, f64::NEG_INFINITY);
    for &temp in &temps {
        let q = thermal_benchmark(temp, omega0);
        if q > best.1 {
            best = (temp, q);
        }
        t.push(vec![num(temp), num(q)]);
    }
    ctx.run.write_table("thermal_benchmark.csv", &t)?;
    println!("thermal_benchmark.csv: peak {:.8} at T = {}", best.1, best.0);
    let curve = [Series { label: "Gibbs qubit".into(), points: temps.iter().map(|&x| (x, thermal_benchmark(x, omega0))).collect() }];
    ctx.plot("thermal_benchmark.svg", "Thermal QSNR benchmark", "T", "Q_T", &curve)
}

pub fn compare_brme(ctx: &mut Ctx) -> Result<()> {
    let cfg = ctx.cfg();
    let integrator = match &cfg.solver {
        SolverConfig::Heom { integrator, .. } => *integrator,
        SolverConfig::Brme { .. } => {
            return Err(ConfigError::new("solver.kind", "compare-brme needs the heom solver as reference").into())
        }
    };
    let grid = uniform_grid(cfg.grid.t_max, cfg.grid.n_samples);
    let pts = points(cfg)?;
    let ropts = RedfieldOptions {
        include_lamb_shift: cfg.compare.lamb_shift,
        integrator,
    };
    let runs: Vec<_> = pts
        .par_iter()
        .map(|p| -> Result<_> {
            let heom = cfg.scenario(p.lambda, p.omega_c)?.pinned(p.temperature)?;
            let brme = Scenario {
                solver: qthermo::Solver::Brme(ropts),
                ..heom.clone()
            };
            let (a, b) = rayon::join(|| heom.trajectory(p.temperature, &grid), || brme.trajectory(p.temperature, &grid));
            Ok((heom, a?, b?))
        })
        .collect::<Result<_>>()?;
    let ops = collective(cfg.dim());
    for (p, (sc, a, b)) in pts.iter().zip(&runs) {
        let mut t = point_table(
            &["t", "sx_heom", "sy_heom", "sz_heom", "sx_brme", "sy_brme", "sz_brme", "deviation"],
            "compare-brme",
            cfg,
            p,
            sc,
        )?
        .meta("lamb_shift", cfg.compare.lamb_shift);
        let mut worst = 0.0f64;
        for ((time, x), y) in grid.iter().zip(&a.states).zip(&b.states) {
            let (u, v) = (expectations(&ops, x), expectations(&ops, y));
            let dev = (0..3).fold(0.0f64, |m, i| m.max((u[i] - v[i]).abs()));
            worst = worst.max(dev);
            t.push(vec![num(*time), num(u[0]), num(u[1]), num(u[2]), num(v[0]), num(v[1]), num(v[2]), num(dev)]);
        }
        let t = t.meta("max_deviation", num(worst));
        ctx.run.write_table(&format!("compare_{}.csv", p.tag()), &t)?;
        ctx.run.flag(p.tag(), true, Some(format!("max Bloch deviation {worst:.3e}")));
        println!("compare {}: max Bloch deviation {worst:.3e}", p.tag());
        let z = |tr: &Trajectory| grid.iter().copied().zip(tr.states.iter().map(|r| expectations(&ops, r)[2])).collect();
        let curves = [Series { label: "HEOM".into(), points: z(a) }, Series { label: "BRME".into(), points: z(b) }];
        ctx.plot(&format!("compare_{}.svg", p.tag()), "<sz>: HEOM vs BRME", "t", "sz", &curves)?;
    }
    Ok(())
}
