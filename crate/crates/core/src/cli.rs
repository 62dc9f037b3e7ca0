//! Command-line interface: `spinmetro <command> [flags]`.
//!
//! Curves and traces are CSV, structured results JSON. Angles on the
//! command line and in tables are degrees.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::descent::{descend, DescentConfig, Direction};
use crate::io::{csv_string, emit, read_state, to_json_string, write_state};
use crate::linalg::hermitian_exp;
use crate::locus::{build_locus, critical_angles, curve_transitions, standard_frame, transform_curve};
use crate::metrology::{avg_fidelity, fidelity_transitions, squeezing_phi, Family};
use crate::states::{
    anticoherence_order, majorana_boost, majorana_constellation, match_constellations, named_state, r_vector,
    random_pure, AnyState, DensityLike, MixedState, NamedState, PureState, ANTICOHERENCE_TOL,
};
use crate::tensorbasis::lambda;
use crate::wigner::{spin_operators, Spin};
use crate::{Error, Result};

/// Exit status when a computation finished but missed its tolerance.
pub const EXIT_TOLERANCE: i32 = 2;
/// Exit status for invalid input or a failed computation.
pub const EXIT_ERROR: i32 = 1;

#[derive(Parser, Debug)]
#[command(name = "spinmetro", version, about = "Orbit-averaged fidelity metrology for spin-s systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// r-vector, r̃ and anticoherence order of a state
    Invariants(InvariantsArgs),
    /// averaged fidelity of one or more states along a transformation family
    FidelityCurve(CurveArgs),
    /// φ-sector table of the locus and the transitions along families
    CriticalAngles(CriticalArgs),
    /// sampled and refined locus of r-vectors, as JSON
    Locus(LocusArgs),
    /// coherence descent (or ascent) trace
    Descend(DescendArgs),
    /// Majorana constellation of a pure state
    Majorana(MajoranaArgs),
    /// quick internal consistency checks
    Selftest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Forward,
    Backward,
}

#[derive(Args, Debug, Clone)]
pub struct StateArgs {
    /// spin as the integer 2s
    #[arg(long)]
    pub spin: Option<u32>,
    /// named state(s), comma separated: coherent, ghz, w, tetrahedron, prism,
    /// bipyramid, psi32, pyramid, maximally-mixed
    #[arg(long, value_delimiter = ',')]
    pub named: Vec<String>,
    /// JSON state file
    #[arg(long)]
    pub state_file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct InvariantsArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// rotation, squeezing or squeezing-k
    #[arg(long, default_value = "squeezing")]
    pub family: String,
    #[arg(long, default_value_t = 0.0)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 180.0)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 181)]
    pub eta_steps: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct LocusOptions {
    /// spin as the integer 2s
    #[arg(long)]
    pub spin: u32,
    /// mixed-state locus (2s = 2 only)
    #[arg(long)]
    pub mixed: bool,
    #[arg(long, default_value_t = 600)]
    pub samples: usize,
    /// number of evenly spaced refinement directions
    #[arg(long, default_value_t = 64)]
    pub refine: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct CriticalArgs {
    #[command(flatten)]
    pub locus: LocusOptions,
    /// families to scan; default rotation and squeezing
    #[arg(long, value_delimiter = ',')]
    pub family: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    pub eta_min: f64,
    #[arg(long, default_value_t = 180.0)]
    pub eta_max: f64,
    #[arg(long, default_value_t = 720)]
    pub eta_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct LocusArgs {
    #[command(flatten)]
    pub locus: LocusOptions,
    /// also write a transformation curve (CSV) for this family
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub curve_out: Option<PathBuf>,
    #[arg(long, default_value_t = 361)]
    pub eta_steps: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DescendArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// cumulative order t of C_t̂
    #[arg(long, default_value_t = 1)]
    pub t: u32,
    /// seed for a random initial state (used when no state is given)
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum, default_value = "forward")]
    pub direction: DirectionArg,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 10)]
    pub sample_every: usize,
    /// trace CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// final state JSON
    #[arg(long)]
    pub final_state: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MajoranaArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// compare the constellation of e^{−η S_z}ψ with the boosted stars
    #[arg(long)]
    pub boost_check: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn spin_arg(spin: Option<u32>) -> Result<Spin> {
    let ts = spin.ok_or_else(|| Error::Parse("--spin is required".into()))?;
    Spin::supported(ts)
}

fn named_any(tag: &str, s: Spin) -> Result<AnyState> {
    let t = tag.trim().to_ascii_lowercase();
    if t == "maximally-mixed" || t == "mm" {
        return Ok(AnyState::Mixed(MixedState::maximally_mixed(s)?));
    }
    Ok(AnyState::Pure(named_state(NamedState::parse(&t)?, s)?))
}

/// All states requested by the flags, with display names.
fn load_states(a: &StateArgs) -> Result<Vec<(String, AnyState)>> {
    let mut out = Vec::new();
    if let Some(p) = &a.state_file {
        let st = read_state(p)?;
        if let Some(ts) = a.spin {
            if ts != st.spin().twice_s() {
                return Err(Error::Dimension {
                    expected: Spin::new(ts).dim(),
                    got: st.spin().dim(),
                });
            }
        }
        let name = p.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_else(|| "state".into());
        out.push((name, st));
    }
    if !a.named.is_empty() {
        let s = spin_arg(a.spin)?;
        for tag in &a.named {
            out.push((tag.trim().to_ascii_lowercase(), named_any(tag, s)?));
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("give --named or --state-file".into()));
    }
    Ok(out)
}

fn one_state(a: &StateArgs) -> Result<(String, AnyState)> {
    let mut v = load_states(a)?;
    if v.len() != 1 {
        return Err(Error::Parse("exactly one state is expected".into()));
    }
    Ok(v.remove(0))
}

fn require_pure(st: AnyState) -> Result<PureState> {
    match st {
        AnyState::Pure(p) => Ok(p),
        AnyState::Mixed(_) => Err(Error::Unsupported("this command needs a pure state".into())),
    }
}

fn cmd_invariants(a: &InvariantsArgs) -> Result<i32> {
    let (name, st) = one_state(&a.state)?;
    let rv = r_vector(&st)?;
    let order = match &st {
        AnyState::Pure(p) => Some(anticoherence_order(p, ANTICOHERENCE_TOL)?),
        AnyState::Mixed(_) => None,
    };
    let text = match a.format {
        Format::Json => to_json_string(&json!({
            "name": name,
            "twice_s": st.spin().twice_s(),
            "purity": st.purity(),
            "r": rv.r,
            "r_tilde": rv.r_tilde,
            "anticoherence_order": order,
        }))?,
        Format::Csv => {
            let rows: Vec<Vec<f64>> = (0..rv.r.len()).map(|l| vec![l as f64, rv.r[l], rv.r_tilde[l]]).collect();
            csv_string(&["l", "r", "r_tilde"], &rows)
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn eta_grid(min_deg: f64, max_deg: f64, steps: usize) -> Vec<f64> {
    let steps = steps.max(2);
    (0..steps)
        .map(|i| (min_deg + (max_deg - min_deg) * i as f64 / (steps - 1) as f64).to_radians())
        .collect()
}

#[derive(Serialize)]
struct TransitionOut {
    eta_deg: f64,
    eta_rad: f64,
    from: String,
    to: String,
}

fn transitions_out(tr: &[crate::metrology::Transition]) -> Vec<TransitionOut> {
    tr.iter()
        .map(|t| TransitionOut {
            eta_deg: t.eta.to_degrees(),
            eta_rad: t.eta,
            from: t.from.clone(),
            to: t.to.clone(),
        })
        .collect()
}

fn cmd_fidelity_curve(a: &CurveArgs) -> Result<i32> {
    let states = load_states(&a.state)?;
    let family = Family::parse(&a.family)?;
    let s = states[0].1.spin();
    if states.iter().any(|(_, st)| st.spin() != s) {
        return Err(Error::Parse("all states must share one spin".into()));
    }
    let etas = eta_grid(a.eta_min, a.eta_max, a.eta_steps);
    let mut rows = Vec::with_capacity(etas.len());
    for &eta in &etas {
        let v = family.transform(s, eta)?;
        let mut row = vec![eta.to_degrees()];
        for (_, st) in &states {
            row.push(avg_fidelity(st, &v)?);
        }
        rows.push(row);
    }
    let text = match a.format {
        Format::Csv => {
            let mut header = vec!["eta".to_string()];
            if states.len() == 1 {
                header.push("fbar".into());
            } else {
                header.extend(states.iter().map(|(n, _)| format!("fbar_{n}")));
            }
            let header: Vec<&str> = header.iter().map(|h| h.as_str()).collect();
            csv_string(&header, &rows)
        }
        Format::Json => {
            let tr = if states.len() > 1 {
                fidelity_transitions(
                    family,
                    &states,
                    a.eta_min.to_radians(),
                    a.eta_max.to_radians(),
                    4 * a.eta_steps.max(2),
                )?
            } else {
                Vec::new()
            };
            let curves: serde_json::Map<String, serde_json::Value> = states
                .iter()
                .enumerate()
                .map(|(i, (n, _))| (n.clone(), json!(rows.iter().map(|r| r[1 + i]).collect::<Vec<f64>>())))
                .collect();
            to_json_string(&json!({
                "twice_s": s.twice_s(),
                "family": family.name(),
                "eta_deg": rows.iter().map(|r| r[0]).collect::<Vec<f64>>(),
                "fidelity": curves,
                "transitions": transitions_out(&tr),
            }))?
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn families(list: &[String]) -> Result<Vec<Family>> {
    if list.is_empty() {
        return Ok(vec![Family::Rotation, Family::Squeezing(2)]);
    }
    list.iter().map(|f| Family::parse(f)).collect()
}

fn cmd_critical(a: &CriticalArgs) -> Result<i32> {
    let o = &a.locus;
    let s = Spin::supported(o.spin)?;
    let locus = build_locus(s, o.mixed, o.samples, o.refine, o.seed)?;
    let frame = standard_frame(s, o.mixed)?;
    let table = critical_angles(&frame, &locus)?;
    let mut tr = serde_json::Map::new();
    for fam in families(&a.family)? {
        let t = curve_transitions(
            fam,
            &frame,
            &locus,
            a.eta_min.to_radians(),
            a.eta_max.to_radians(),
            a.eta_steps,
        )?;
        tr.insert(fam.name(), json!(transitions_out(&t)));
    }
    let text = to_json_string(&json!({
        "twice_s": s.twice_s(),
        "mixed": o.mixed,
        "critical_angles": table.rows,
        "transitions": tr,
    }))?;
    emit(a.out.as_deref(), &text)?;
    Ok(0)
}

fn cmd_locus(a: &LocusArgs) -> Result<i32> {
    let o = &a.locus;
    let s = Spin::supported(o.spin)?;
    let locus = build_locus(s, o.mixed, o.samples, o.refine, o.seed)?;
    let frame = standard_frame(s, o.mixed).ok();
    let table = match &frame {
        Some(f) => Some(critical_angles(f, &locus)?),
        None => None,
    };
    emit(a.out.as_deref(), &to_json_string(&locus.export(table.as_ref()))?)?;
    if let Some(path) = &a.curve_out {
        let fam = Family::parse(a.family.as_deref().unwrap_or("rotation"))?;
        let frame = frame.ok_or_else(|| Error::Unsupported("no standard frame for this spin".into()))?;
        let curve = transform_curve(fam, &frame, 0.0, 2.0 * std::f64::consts::PI, a.eta_steps)?;
        let mut header = vec!["eta_deg", "phi_deg", "rt1", "rt2"];
        if frame.rotation.nrows() > 2 {
            header.push("rt3");
        }
        let rows: Vec<Vec<f64>> = curve
            .iter()
            .map(|p| {
                let mut row = vec![p.eta.to_degrees(), p.phi_deg];
                row.extend(&p.coords);
                row
            })
            .collect();
        emit(Some(path), &csv_string(&header, &rows))?;
    }
    let tol_ok = locus.vertices.iter().all(|v| v.distance < 1e-4);
    Ok(if tol_ok { 0 } else { EXIT_TOLERANCE })
}

fn cmd_descend(a: &DescendArgs) -> Result<i32> {
    let psi = if a.state.state_file.is_some() || !a.state.named.is_empty() {
        require_pure(one_state(&a.state)?.1)?
    } else {
        let seed = a.seed.ok_or_else(|| Error::Parse("give --seed, --named or --state-file".into()))?;
        random_pure(spin_arg(a.state.spin)?, seed)?
    };
    let cfg = DescentConfig {
        t: a.t,
        step: 0.5,
        tol: a.tol,
        max_steps: a.max_steps,
        direction: match a.direction {
            DirectionArg::Forward => Direction::Forward,
            DirectionArg::Backward => Direction::Backward,
        },
        sample_every: a.sample_every,
    };
    let trace = descend(&psi, &cfg)?;
    let mut rows = Vec::with_capacity(trace.samples.len());
    for smp in &trace.samples {
        let mut row = vec![smp.step as f64, smp.coherence];
        row.extend_from_slice(&r_vector(&smp.state)?.r[1..]);
        rows.push(row);
    }
    let mut header = vec!["step".to_string(), format!("C_{}", a.t)];
    header.extend((1..=psi.spin().twice_s()).map(|l| format!("r_{l}")));
    let header: Vec<&str> = header.iter().map(|h| h.as_str()).collect();
    emit(a.out.as_deref(), &csv_string(&header, &rows))?;
    if let Some(p) = &a.final_state {
        write_state(p, &AnyState::Pure(trace.final_state().clone()))?;
    }
    eprintln!(
        "steps {} converged {} final C {} grad {}",
        trace.steps,
        trace.converged,
        crate::io::fmt_sig(trace.final_coherence()),
        crate::io::fmt_sig(trace.grad_norm)
    );
    Ok(if trace.converged { 0 } else { EXIT_TOLERANCE })
}

/// Tolerance on the star mismatch in `majorana --boost-check`.
pub const BOOST_CHECK_TOL: f64 = 1e-8;

fn cmd_majorana(a: &MajoranaArgs) -> Result<i32> {
    let psi = require_pure(one_state(&a.state)?.1)?;
    let c = majorana_constellation(&psi)?;
    let mut code = 0;
    let check = match a.boost_check {
        Some(eta) => {
            let sz = spin_operators(psi.spin())?.sz;
            let boosted = PureState::new(psi.spin(), hermitian_exp(&sz, -eta) * psi.amplitudes())?;
            let direct = majorana_constellation(&boosted)?;
            let mapped = majorana_boost(&c, eta, [0.0, 0.0, 1.0])?;
            let d = match_constellations(&direct, &mapped)?;
            if !(d < BOOST_CHECK_TOL) {
                code = EXIT_TOLERANCE;
            }
            Some(json!({"eta": eta, "max_distance": d, "pass": d < BOOST_CHECK_TOL}))
        }
        None => None,
    };
    let text = to_json_string(&json!({
        "twice_s": psi.spin().twice_s(),
        "stars": c.stars,
        "boost_check": check,
    }))?;
    emit(a.out.as_deref(), &text)?;
    Ok(code)
}

fn check(name: &str, ok: bool, detail: String) -> bool {
    if ok {
        println!("PASS {name}");
    } else {
        println!("FAIL {name}: {detail}");
    }
    ok
}

fn cmd_selftest() -> Result<i32> {
    let mut all = true;

    let mut worst: f64 = 0.0;
    for ts in 1..=8 {
        let lam = lambda(Spin::new(ts))?;
        let sq = &lam.entries * &lam.entries;
        let id = nalgebra::DMatrix::<f64>::identity(sq.nrows(), sq.ncols());
        worst = worst.max((sq - id).amax());
    }
    all &= check("lambda squares to identity (2s <= 8)", worst < 1e-11, format!("{worst:e}"));

    let s2 = Spin::new(4);
    let r = r_vector(&named_state(NamedState::Ghz, s2)?)?.r;
    let want = [0.2, 0.0, 2.0 / 7.0, 0.0, 18.0 / 35.0];
    let err = r.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    all &= check("GHZ r-vector at s = 2", err < 1e-12, format!("{r:?}"));

    let tet = majorana_constellation(&named_state(NamedState::Tetrahedron, s2)?)?;
    let target = (-1.0f64 / 3.0).acos();
    let mut dev: f64 = 0.0;
    for i in 0..tet.stars.len() {
        for j in i + 1..tet.stars.len() {
            dev = dev.max((tet.stars[i].distance(&tet.stars[j]) - target).abs());
        }
    }
    all &= check("tetrahedron constellation", dev < 1e-9, format!("{dev:e}"));

    let s1 = Spin::new(2);
    let cands = vec![
        ("coherent".to_string(), AnyState::Pure(named_state(NamedState::Coherent, s1)?)),
        ("ghz".to_string(), AnyState::Pure(named_state(NamedState::Ghz, s1)?)),
    ];
    let tr = fidelity_transitions(Family::Rotation, &cands, 0.0, std::f64::consts::PI, 200)?;
    let ok = tr.len() == 1 && (tr[0].eta - (-2.0f64 / 3.0).acos()).abs() < 1e-10;
    all &= check("s = 1 rotation transition", ok, format!("{tr:?}"));

    let phi0 = &squeezing_phi(s2)?[0];
    let got: Vec<String> = phi0.coefficients.iter().map(|c| c.to_string()).collect();
    let ok = phi0.frequencies == [0, 1, 3, 4] && got == ["43/105", "4/35", "32/105", "6/35"];
    all &= check("s = 2 squeezing phi_0", ok, format!("{:?} {got:?}", phi0.frequencies));

    Ok(if all { 0 } else { EXIT_TOLERANCE })
}

pub fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Invariants(a) => cmd_invariants(a),
        Command::FidelityCurve(a) => cmd_fidelity_curve(a),
        Command::CriticalAngles(a) => cmd_critical(a),
        Command::Locus(a) => cmd_locus(a),
        Command::Descend(a) => cmd_descend(a),
        Command::Majorana(a) => cmd_majorana(a),
        Command::Selftest => cmd_selftest(),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
