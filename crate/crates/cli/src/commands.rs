//! One function per subcommand. Each returns the text to print and the
//! report's verdict, which `--expect` compares against.

use std::fs;
use std::path::{Path, PathBuf};

use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use polyham::conservative::{hamiltonian_identity_residual, ConservativeDecomposition, FormalEquilibrium, NotConservativeReason};
use polyham::dynamics::IntegrationMethod;
use polyham::fixtures::{self, ExampleGame};
use polyham::matrix::{max_abs_diff, max_norm};
use polyham::poisson::{proportional, JACOBI_FD_STEP};
use polyham::sampling::{random_chart_point, random_cube_point, random_interior_point, random_rational, rng};
use polyham::scalar::Scalar;
use polyham::*;

use crate::gamefile::{parse_game_file, GameFile};
use crate::report::{self, float, floats, rat, rat_matrix, rats, Report};
use crate::{CliError, OUT_DIR_VAR};

pub struct Output {
    pub text: String,
    pub verdict: String,
}

impl Output {
    fn report(mut r: Report, verdict: &str) -> Self {
        r.insert("verdict".into(), json!(verdict));
        Output {
            text: report::to_text(&r),
            verdict: verdict.to_string(),
        }
    }
}

const EX1_FILE: &str = include_str!("../games/ex1.game");
const EX2_FILE: &str = include_str!("../games/ex2.game");

pub fn builtin_text(name: &str) -> Option<&'static str> {
    match name {
        "ex1" => Some(EX1_FILE),
        "ex2" => Some(EX2_FILE),
        _ => None,
    }
}

/// Reads a game from a path, `-` (stdin) or `builtin:ex1` / `builtin:ex2`.
pub fn load_game(arg: &str) -> Result<GameFile, CliError> {
    let text = if let Some(name) = arg.strip_prefix("builtin:") {
        builtin_text(name)
            .ok_or_else(|| CliError::Semantic(format!("unknown builtin game `{name}` (use ex1 or ex2)")))?
            .to_string()
    } else if arg == "-" {
        std::io::read_to_string(std::io::stdin())?
    } else {
        fs::read_to_string(arg).map_err(|e| CliError::Io(format!("{arg}: {e}")))?
    };
    Ok(parse_game_file(&text)?)
}

/// Relative paths land in `$POLYHAM_OUT_DIR` when it is set.
pub fn output_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn parse_point(text: &str, sig: &Signature) -> Result<Vec<Rational>, CliError> {
    let v = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_rational(s).map_err(|e| CliError::Semantic(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if v.len() != sig.total() {
        return Err(CliError::Semantic(format!("point has {} entries, expected {}", v.len(), sig.total())));
    }
    Ok(v)
}

fn start_point(file: &GameFile, flag: Option<&str>) -> Result<Vec<Rational>, CliError> {
    match (flag, &file.x0) {
        (Some(text), _) => parse_point(text, &file.signature),
        (None, Some(x0)) => Ok(x0.clone()),
        (None, None) => Ok(PrismPoint::<Rational>::center(&file.signature).into_coords()),
    }
}

fn to_f64(v: &[Rational]) -> Vec<f64> {
    v.iter().map(Scalar::to_f64).collect()
}

/// Scales `v` so its last nonzero entry equals `target`.
fn normalize_last(v: &[Rational], target: i64) -> Vec<Rational> {
    match v.iter().rev().find(|x| !x.is_zero()) {
        Some(last) => {
            let f = Rational::from_integer(target.into()) / last;
            v.iter().map(|x| x * &f).collect()
        }
        None => v.to_vec(),
    }
}

fn equilibrium_json(sig: &Signature, fe: &FormalEquilibrium) -> Value {
    let directions: Vec<Value> = fe
        .directions
        .iter()
        .map(|d| {
            let model = sig.model_coordinates(d);
            let f = match model.iter().rev().find(|x| !x.is_zero()) {
                Some(last) => -Rational::from_integer(1.into()) / last,
                None => Rational::from_integer(1.into()),
            };
            json!({
                "full": rats(&d.iter().map(|x| x * &f).collect::<Vec<_>>()),
                "model": rats(&model.iter().map(|x| x * &f).collect::<Vec<_>>()),
            })
        })
        .collect();
    json!({
        "q": rats(&fe.q),
        "q_model": rats(&sig.model_coordinates(&fe.q)),
        "dimension": fe.directions.len(),
        "directions": directions,
        "interior": fe.is_interior(),
        "meets_interior": fe.meets_interior(),
        "meets_prism": fe.meets_prism(),
        "max_min_coordinate": fe.max_min_coordinate.as_ref().map(rat),
    })
}

fn hamiltonian_json(sig: &Signature, d: &ConservativeDecomposition) -> Value {
    let weights: Vec<Rational> = (0..sig.total())
        .map(|j| &d.lambda[sig.group_of(j)] * &d.equilibrium.q[j])
        .collect();
    json!({ "form": "H(x) = sum_j w_j log x_j", "weights": rats(&weights) })
}

fn decomposition_json(sig: &Signature, d: &ConservativeDecomposition) -> Value {
    json!({
        "skew_model": rat_matrix(&d.skew_model),
        "lambda": rats(&d.lambda),
        "adjusters": rat_matrix(&d.adjusters),
        "equilibrium": equilibrium_json(sig, &d.equilibrium),
        "hamiltonian": hamiltonian_json(sig, d),
    })
}

fn reason_text(r: &NotConservativeReason) -> String {
    match r {
        NotConservativeReason::ScalingForcedZero { group } => format!("scaling of group {} is forced to zero", group + 1),
        NotConservativeReason::ModelNotSkew => "reconstructed model is not skew-symmetric".into(),
        NotConservativeReason::NoFormalEquilibrium => "no formal equilibrium".into(),
    }
}

fn verification_json(game: &PolymatrixGame<Rational>, d: &ConservativeDecomposition) -> Value {
    let v = verify_conservative(game, d);
    json!({
        "holds": v.holds(),
        "failure": v.failure.as_ref().map(|f| format!("{f:?}")),
        "skew_defect": float(v.skew_defect),
        "equivalence_defect": float(v.equivalence_defect),
    })
}

/// Skew matrix carrying the Poisson structure: the payoff itself when skew,
/// else the declared or detected skew model.
fn structure_matrix(file: &GameFile, game: &PolymatrixGame<Rational>) -> Option<(&'static str, Matrix<Rational>)> {
    if game.is_skew(0.0) {
        Some(("payoff", file.payoff.clone()))
    } else if let Some(m) = &file.skew_model {
        Some(("skew_model", m.clone()))
    } else {
        detect_conservative(game)
            .decomposition()
            .map(|d| ("detected", d.skew_model.clone()))
    }
}

pub fn info(source: &str, file: &GameFile) -> Output {
    let game = file.game();
    let sig = &file.signature;
    let mut r = report::new_report("info");
    r.insert("game".into(), json!(source));
    r.insert("signature".into(), report::signature(sig));
    r.insert("strategies".into(), json!(sig.total()));
    r.insert("groups".into(), json!(sig.groups()));
    let blocks: Vec<Value> = sig
        .blocks()
        .enumerate()
        .map(|(g, b)| json!({ "group": g + 1, "strategies": report::strategies(&b.collect::<Vec<_>>()) }))
        .collect();
    r.insert("blocks".into(), Value::Array(blocks));
    let mut nonzero = Vec::new();
    for a in 0..sig.groups() {
        for b in 0..sig.groups() {
            if !game.block(a, b).as_slice().iter().all(Zero::is_zero) {
                nonzero.push(json!([a + 1, b + 1]));
            }
        }
    }
    r.insert("nonzero_blocks".into(), Value::Array(nonzero));
    r.insert("payoff".into(), rat_matrix(&file.payoff));
    let n = sig.total();
    let defect = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (&file.payoff[(i, j)] + &file.payoff[(j, i)]).abs())
        .max()
        .unwrap_or_else(Rational::zero);
    let skew = defect.is_zero();
    r.insert("skew".into(), json!(skew));
    r.insert("skew_defect".into(), rat(&defect));
    Output::report(r, if skew { "skew" } else { "not-skew" })
}

pub fn equilibrium(source: &str, file: &GameFile) -> Output {
    let mut r = report::new_report("equilibrium");
    r.insert("game".into(), json!(source));
    let verdict = match formal_equilibria(&file.game()) {
        Ok(fe) => {
            r.insert("equilibrium".into(), equilibrium_json(&file.signature, &fe));
            if fe.meets_interior() == Some(true) {
                "interior"
            } else if fe.meets_prism() == Some(true) {
                "boundary"
            } else {
                "exterior"
            }
        }
        Err(_) => {
            r.insert("equilibrium".into(), Value::Null);
            "none"
        }
    };
    Output::report(r, verdict)
}

pub fn conservative(source: &str, file: &GameFile) -> Output {
    let game = file.game();
    let sig = &file.signature;
    let mut r = report::new_report("conservative");
    r.insert("game".into(), json!(source));
    let verdict = match detect_conservative(&game) {
        Detection::Conservative(d) => {
            r.insert("decomposition".into(), decomposition_json(sig, &d));
            r.insert("verification".into(), verification_json(&game, &d));
            "conservative"
        }
        Detection::NotConservative(reason) => {
            r.insert("reason".into(), json!(reason_text(&reason)));
            "not-conservative"
        }
    };
    if let (Some(a0), Some(qt)) = (&file.skew_model, &file.qtilde) {
        let declared = match make_conservative(a0, sig, qt) {
            Ok((g, d)) => json!({
                "payoff_matches": g.payoff() == &file.payoff,
                "equivalent": games_equivalent(&g, &game).unwrap_or(false),
                "lambda": rats(&d.lambda),
                "scaling_matches": file.scaling.as_ref().map(|s| s == &d.lambda),
            }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        r.insert("declared".into(), declared);
    }
    Output::report(r, verdict)
}

pub struct SweepOptions {
    pub seed: u64,
    pub samples: usize,
    pub fd_step: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            seed: 0,
            samples: 100,
            fd_step: JACOBI_FD_STEP,
        }
    }
}

pub const FD_TOLERANCE: f64 = 1e-6;
pub const MAP_TOLERANCE: f64 = 1e-12;

pub fn poisson_check(source: &str, file: &GameFile, opts: &SweepOptions) -> Result<Output, CliError> {
    let game = file.game();
    let sig = &file.signature;
    let mut r = report::new_report("poisson-check");
    r.insert("game".into(), json!(source));
    let Some((label, m)) = structure_matrix(file, &game) else {
        r.insert("structure".into(), Value::Null);
        r.insert(
            "reason".into(),
            json!("payoff is neither skew nor conservative, so no skew model carries a Poisson structure"),
        );
        return Ok(Output::report(r, "not-poisson"));
    };
    let g = PolymatrixGame::new(sig.clone(), m)?;
    let gf = g.to_f64();
    let n = sig.total();
    let mut r0 = rng(opts.seed);
    let mut points = Vec::with_capacity(opts.samples);
    for _ in 0..opts.samples {
        let exact: Vec<Rational> = (0..n).map(|_| random_rational(&mut r0, 2, 6)).collect();
        let cube = random_cube_point(&mut r0, n, 2.0);
        let chart = random_chart_point(&mut r0, sig, 3.0);
        points.push((exact, cube, chart));
    }
    let results: Vec<Result<(Rational, f64, f64), Error>> = points
        .par_iter()
        .map(|(exact, cube, chart)| {
            let e = jacobi_residual_exact(&g, exact)?.abs();
            let fd = jacobi_residual_fd(&gf, cube, opts.fd_step)?;
            let map = check_poisson_map(&gf, chart)?;
            Ok((e, fd, map))
        })
        .collect();
    let mut exact_max = Rational::zero();
    let mut fd_max = 0.0f64;
    let mut map_max = 0.0f64;
    for res in results {
        let (e, fd, map) = res?;
        exact_max = exact_max.max(e);
        fd_max = fd_max.max(fd);
        map_max = map_max.max(map);
    }
    let ok = exact_max.is_zero() && fd_max <= FD_TOLERANCE && map_max <= MAP_TOLERANCE;
    r.insert("structure".into(), json!(label));
    r.insert("seed".into(), json!(opts.seed));
    r.insert("samples".into(), json!(opts.samples));
    r.insert(
        "jacobi_exact".into(),
        json!({ "max_residual": rat(&exact_max), "zero": exact_max.is_zero() }),
    );
    r.insert(
        "jacobi_fd".into(),
        json!({ "step": opts.fd_step, "max_residual": float(fd_max), "tolerance": FD_TOLERANCE }),
    );
    r.insert(
        "poisson_map".into(),
        json!({ "max_residual": float(map_max), "tolerance": MAP_TOLERANCE }),
    );
    Ok(Output::report(r, if ok { "poisson" } else { "not-poisson" }))
}

fn casimir_residual(game: &PolymatrixGame<f64>, data: &PoissonData, k: usize, seed: u64) -> Result<f64, Error> {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let x = random_interior_point(&mut r, game.signature(), 0.1);
        let pi = bivector(game, x.coords())?.matrix;
        worst = worst.max(max_norm(&pi.mul_vec(&data.casimir_gradient(k, x.coords())?)));
    }
    Ok(worst)
}

fn leaves_json(data: &PoissonData, game: &PolymatrixGame<f64>, x: Option<&[f64]>) -> Result<Value, CliError> {
    let values = x.map(|x| data.leaf_invariant(x)).transpose()?;
    let mut casimirs = Vec::new();
    for (k, w) in data.kernel.iter().enumerate() {
        let w = normalize_last(w, 1);
        let exponents: Vec<Rational> = data.incidence.transpose().mul_vec(&w).iter().map(|c| -c).collect();
        // value uses the normalized vector, so rescale the stored invariant
        let scale = w.iter().zip(&data.kernel[k]).find(|(_, b)| !b.is_zero()).map(|(a, b)| (a / b).to_f64());
        casimirs.push(json!({
            "w": rats(&w),
            "exponents": rats(&exponents),
            "value": values.as_ref().map(|v| float(v[k] * scale.unwrap_or(1.0))),
            "casimir_residual": float(casimir_residual(game, data, k, 17)?),
        }));
    }
    Ok(json!({
        "incidence": rat_matrix(&data.incidence),
        "reduced": rat_matrix(&data.reduced),
        "rank": data.rank,
        "leaf_dimension": data.rank,
        "kernel": Value::Array(casimirs),
    }))
}

pub fn leaves(source: &str, file: &GameFile, point: Option<&str>) -> Result<Output, CliError> {
    let game = file.game();
    let (label, m) = structure_matrix(file, &game)
        .ok_or_else(|| CliError::Semantic("game carries no Poisson structure (neither skew nor conservative)".into()))?;
    let data = PoissonData::new(&file.signature, &m)?;
    let x = start_point(file, point)?;
    let xf = to_f64(&x);
    let g = PolymatrixGame::new(file.signature.clone(), m)?.to_f64();
    let mut r = report::new_report("leaves");
    r.insert("game".into(), json!(source));
    r.insert("structure".into(), json!(label));
    r.insert("point".into(), rats(&x));
    r.insert("leaves".into(), leaves_json(&data, &g, Some(&xf))?);
    Ok(Output::report(r, "ok"))
}

pub struct IntegrateOptions {
    pub x0: Option<String>,
    pub t_end: Option<f64>,
    pub rtol: Option<f64>,
    pub atol: Option<f64>,
    pub max_step: Option<f64>,
    pub method: IntegrationMethod,
    pub mode: CoordinateMode,
    pub stride: usize,
    pub out: Option<PathBuf>,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        IntegrateOptions {
            x0: None,
            t_end: None,
            rtol: None,
            atol: None,
            max_step: None,
            method: IntegrationMethod::Dopri5,
            mode: CoordinateMode::Auto,
            stride: 1,
            out: None,
        }
    }
}

pub const DEFAULT_T_END: f64 = 10.0;

/// Trajectory with its monitors, plus a note when they had to be dropped.
type MonitoredRun = (Trajectory, Option<HamiltonianSpec>, Option<PoissonData>, Option<String>);

fn monitored_run(
    file: &GameFile,
    x0: &[Rational],
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<MonitoredRun, CliError> {
    let game = file.game();
    let sig = &file.signature;
    let start = PrismPoint::new(sig, to_f64(x0))?;
    let mut traj = integrate(&game.to_f64(), &start, (0.0, t_end), cfg)?;
    let spec = detect_conservative(&game).decomposition().map(|d| d.hamiltonian(sig));
    let data = structure_matrix(file, &game)
        .map(|(_, m)| PoissonData::new(sig, &m))
        .transpose()?;
    let note = match traj.attach_monitors(spec.as_ref(), data.as_ref()) {
        Ok(()) => None,
        Err(Error::BoundarySample { index }) => Some(format!("monitors skipped: sample {index} touches the boundary")),
        Err(e) => return Err(e.into()),
    };
    let (spec, data) = if note.is_some() { (None, None) } else { (spec, data) };
    Ok((traj, spec, data, note))
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let n = traj.states.first().map_or(0, Vec::len);
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=n).map(|i| format!("x_{i}")));
    if traj.hamiltonian.is_some() {
        header.push("H".into());
    }
    let k = traj.leaf_invariants.as_ref().and_then(|l| l.first()).map_or(0, Vec::len);
    header.extend((1..=k).map(|i| format!("c_{i}")));
    let mut out = header.join(",");
    out.push('\n');
    for s in 0..traj.len() {
        let mut row = vec![traj.times[s].to_string()];
        row.extend(traj.states[s].iter().map(f64::to_string));
        if let Some(h) = &traj.hamiltonian {
            row.push(h[s].to_string());
        }
        if let Some(l) = &traj.leaf_invariants {
            row.extend(l[s].iter().map(f64::to_string));
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn drift_json(traj: &Trajectory, spec: Option<&HamiltonianSpec>, data: Option<&PoissonData>) -> Result<Value, CliError> {
    let rep = monitor_report(traj, spec, data)?;
    Ok(json!({
        "hamiltonian_drift": rep.hamiltonian_drift.map(float),
        "leaf_drift": floats(&rep.leaf_drift),
        "block_sum_deviation": float(rep.block_sum_deviation),
    }))
}

fn config_for(file: &GameFile, opts: &IntegrateOptions) -> IntegratorConfig {
    let d = &file.integration;
    let base = IntegratorConfig::default();
    IntegratorConfig {
        method: opts.method,
        rtol: opts.rtol.or(d.rtol).unwrap_or(base.rtol),
        atol: opts.atol.or(d.atol).unwrap_or(base.atol),
        max_step: opts.max_step.or(d.max_step).unwrap_or(base.max_step),
        mode: opts.mode,
        sample_stride: opts.stride.max(1),
        ..base
    }
}

pub fn integrate_cmd(source: &str, file: &GameFile, opts: &IntegrateOptions) -> Result<Output, CliError> {
    let x0 = start_point(file, opts.x0.as_deref())?;
    let t_end = opts.t_end.or(file.integration.t_end).unwrap_or(DEFAULT_T_END);
    let cfg = config_for(file, opts);
    let (traj, spec, data, note) = monitored_run(file, &x0, t_end, &cfg)?;
    let csv = trajectory_csv(&traj);
    let Some(out) = &opts.out else {
        return Ok(Output { text: csv, verdict: "ok".into() });
    };
    let path = output_path(out);
    write_file(&path, &csv)?;
    let mut r = report::new_report("integrate");
    r.insert("game".into(), json!(source));
    r.insert("x0".into(), rats(&x0));
    r.insert("t_end".into(), float(t_end));
    r.insert("method".into(), json!(format!("{:?}", cfg.method).to_lowercase()));
    r.insert("mode".into(), json!(format!("{:?}", traj.stats.mode).to_lowercase()));
    r.insert("rtol".into(), float(cfg.rtol));
    r.insert("atol".into(), float(cfg.atol));
    r.insert("steps".into(), json!(traj.stats.steps));
    r.insert("rejected".into(), json!(traj.stats.rejected));
    r.insert("samples".into(), json!(traj.len()));
    r.insert("final_state".into(), floats(traj.final_state()));
    r.insert("drift".into(), drift_json(&traj, spec.as_ref(), data.as_ref())?);
    if let Some(note) = note {
        r.insert("note".into(), json!(note));
    }
    r.insert("csv".into(), json!(path.display().to_string()));
    Ok(Output::report(r, "ok"))
}

fn vertex_json(sig: &Signature, v: &VertexLinearization) -> Value {
    let point = PrismPoint::<Rational>::vertex(sig, &v.support).expect("classified vertices are vertices");
    let rates: Vec<Value> = v
        .rates
        .iter()
        .map(|(j, rate)| json!({ "strategy": j + 1, "rate": rat(rate) }))
        .collect();
    json!({
        "support": report::strategies(&v.support),
        "model_point": rats(&sig.model_coordinates(point.coords())),
        "kind": format!("{:?}", v.kind).to_lowercase(),
        "rates": rates,
    })
}

struct Checks(Vec<(String, bool)>);

impl Checks {
    fn add(&mut self, name: &str, pass: bool) {
        self.0.push((name.to_string(), pass));
    }

    fn all(&self) -> bool {
        self.0.iter().all(|(_, p)| *p)
    }

    fn json(&self) -> Value {
        Value::Array(self.0.iter().map(|(n, p)| json!({ "check": n, "pass": p })).collect())
    }
}

/// Full report for one bundled example; the trajectory CSV comes back too.
pub fn example_report(ex: &ExampleGame) -> Result<(Output, String), CliError> {
    let file = parse_game_file(builtin_text(ex.name).expect("bundled"))?;
    let sig = &ex.signature;
    let mut checks = Checks(Vec::new());
    let mut r = report::new_report("example");
    r.insert("example".into(), json!(ex.name));
    r.insert(
        "game".into(),
        json!({
            "signature": report::signature(sig),
            "payoff": rat_matrix(ex.game.payoff()),
            "skew_model": rat_matrix(&ex.skew_model),
            "qtilde": rats(&ex.qtilde),
        }),
    );

    let (g, d) = make_conservative(&ex.skew_model, sig, &ex.qtilde)?;
    checks.add("A0 D reproduces the reference payoff", g.payoff() == ex.game.payoff());
    checks.add("scaling matches", d.lambda == ex.scaling);
    checks.add("formal equilibrium matches", d.equilibrium.q == ex.equilibrium);
    r.insert(
        "reconstruction".into(),
        json!({
            "payoff_matches": g.payoff() == ex.game.payoff(),
            "skew_model_image": rats(&ex.skew_model.mul_vec(&ex.qtilde)),
            "lambda": rats(&d.lambda),
            "equilibrium": equilibrium_json(sig, &d.equilibrium),
            "hamiltonian": hamiltonian_json(sig, &d),
        }),
    );

    let detected = detect_conservative(&ex.game);
    let det = detected.decomposition().expect("bundled examples are conservative");
    checks.add("detection recovers λ up to gauge", proportional(&det.lambda, &ex.scaling));
    r.insert(
        "detection".into(),
        json!({
            "verdict": "conservative",
            "lambda": rats(&det.lambda),
            "lambda_proportional_to_reference": proportional(&det.lambda, &ex.scaling),
            "verification": verification_json(&ex.game, det),
        }),
    );

    let fe = formal_equilibria(&ex.game)?;
    let dir = sig.model_coordinates(&fe.directions[0]);
    let dir = normalize_last(&dir, -1);
    checks.add("equilibrium line direction", fe.directions.len() == 1 && dir == ex.equilibrium_direction);
    r.insert("equilibria".into(), equilibrium_json(sig, &fe));

    let mf = PolymatrixGame::new(sig.clone(), ex.skew_model.clone())?.to_f64();
    let standard = PoissonData::new(sig, &ex.skew_model)?;
    let reference = PoissonData::with_incidence(sig, &ex.skew_model, ex.reference_incidence.clone())?;
    checks.add("reduced matrix in the reference basis", reference.reduced == ex.reference_reduced);
    checks.add(
        "kernel in the reference basis",
        reference.kernel.len() == 1 && proportional(&reference.kernel[0], &ex.reference_kernel),
    );
    checks.add(
        "chart kernel",
        standard.kernel.len() == 1 && proportional(&standard.kernel[0], &ex.chart_kernel),
    );
    let x0 = file.x0.clone().expect("bundled games declare x0");
    let x0f = to_f64(&x0);
    r.insert("leaves".into(), leaves_json(&standard, &mf, Some(&x0f))?);
    r.insert("reference_basis".into(), leaves_json(&reference, &mf, None)?);

    let spec = d.hamiltonian(sig);
    let mut rr = rng(1);
    let af = ex.game.to_f64();
    let mut identity = 0.0f64;
    for _ in 0..20 {
        let x = random_interior_point(&mut rr, sig, 0.05);
        identity = identity.max(hamiltonian_identity_residual(&af, &mf, &spec, x.coords())?);
    }
    checks.add("Hamiltonian identity", identity <= 1e-11);
    r.insert("hamiltonian_identity_residual".into(), float(identity));

    let vertices = classify_vertices(&ex.game);
    r.insert("vertices".into(), Value::Array(vertices.iter().map(|v| vertex_json(sig, v)).collect()));

    let t_end = file.integration.t_end.expect("bundled games declare t_end");
    let cfg = IntegratorConfig::default();
    let (traj, spec_run, data_run, _) = monitored_run(&file, &x0, t_end, &cfg)?;
    let drift = monitor_report(&traj, spec_run.as_ref(), data_run.as_ref())?;
    let mut dynamics = serde_json::Map::new();
    dynamics.insert("x0".into(), rats(&x0));
    dynamics.insert("t_end".into(), float(t_end));
    dynamics.insert("final_state".into(), floats(traj.final_state()));
    dynamics.insert("drift".into(), drift_json(&traj, spec_run.as_ref(), data_run.as_ref())?);
    checks.add("leaf invariant conserved", drift.max_leaf_drift() <= 1e-8);
    if ex.name == "ex1" {
        checks.add("H conserved", drift.hamiltonian_drift.is_some_and(|h| h <= 1e-8));
        let long = integrate(&af, &PrismPoint::new(sig, x0f.clone())?, (0.0, 500.0), &cfg)?;
        let ret = recurrence_check(&long, &x0f);
        checks.add("orbit returns", ret <= 1e-2);
        dynamics.insert("recurrence_span".into(), float(500.0));
        dynamics.insert("return_distance".into(), float(ret));
    } else {
        let rep = linearize_at_vertex(&ex.game, &fixtures::example2_repeller())?;
        let sink = linearize_at_vertex(&ex.game, &fixtures::example2_sink())?;
        checks.add("repeller rates positive", rep.rates.iter().all(|(_, v)| v.is_positive()));
        checks.add("sink rates negative", sink.rates.iter().all(|(_, v)| v.is_negative()));
        checks.add("formal equilibrium is exterior", fe.meets_prism() == Some(false));
        r.insert("repeller".into(), vertex_json(sig, &rep));
        r.insert("sink".into(), vertex_json(sig, &sink));
        let s = PrismPoint::<Rational>::vertex(sig, &fixtures::example2_sink())?;
        let dist = max_abs_diff(traj.final_state(), &to_f64(s.coords()));
        checks.add("orbit reaches the sink", dist <= 1e-3);
        dynamics.insert("distance_to_sink".into(), float(dist));
    }
    r.insert("dynamics".into(), Value::Object(dynamics));
    r.insert("checks".into(), checks.json());

    let stride = IntegratorConfig { sample_stride: 10, ..cfg };
    let (thin, _, _, _) = monitored_run(&file, &x0, t_end, &stride)?;
    let verdict = if checks.all() { "ok" } else { "mismatch" };
    Ok((Output::report(r, verdict), trajectory_csv(&thin)))
}

pub fn example(name: &str, out_dir: Option<&Path>) -> Result<Output, CliError> {
    let ex = fixtures::by_name(name).ok_or_else(|| CliError::Semantic(format!("unknown example `{name}` (use ex1 or ex2)")))?;
    let (out, csv) = example_report(&ex)?;
    let dir = out_dir.map(Path::to_path_buf).or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from));
    if let Some(dir) = dir {
        write_file(&dir.join(format!("{name}_report.json")), &out.text)?;
        write_file(&dir.join(format!("{name}_trajectory.csv")), &csv)?;
    }
    Ok(out)
}
