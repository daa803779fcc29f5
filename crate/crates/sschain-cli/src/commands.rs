//! Subcommand bodies: resolve flag/config/default precedence, validate,
//! compute, then write output atomically (temp file + rename in the target
//! directory) so failed runs leave nothing behind.
//!
//! All floats are written with Rust's shortest round-trip formatting and JSON
//! objects serialize with lexicographically ordered keys, which together make
//! output bytes a pure function of the inputs.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use sschain::{
    box_count_dimension, choose_window, constant_c, continuum_laplacian, energy, evolve,
    init_state, omega_sq, oscillator_density, selfsim_laplacian, verlet_reference, ChainParams,
    ContinuumConstants, ContinuumParams, DispersionCurve, DispersionSample, Error,
    EvaluableField, SpectralState, ToleranceBudget, VerletSnapshot,
};

use crate::config::FileConfig;
use crate::{
    CliError, ContinuumArgs, DensityArgs, DispersionArgs, FieldArg, FractalDimArgs,
    IntegratorArg, SimulateArgs, SpacingArg,
};

fn pick<T: Copy>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn require<T>(value: Option<T>, flag: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Config(format!("missing required {flag} (flag or config)")))
}

/// `--tol` sets the relative tolerance; the absolute floor rides three
/// decades below so that near-zero values stay cheap to certify.
fn budget(tol: f64) -> Result<ToleranceBudget<f64>, CliError> {
    Ok(ToleranceBudget::new(tol, tol * 1e-3, 2_000_000, 50_000_000)?)
}

fn parse_spacing(flag: Option<SpacingArg>, file: Option<&str>) -> Result<SpacingArg, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match file {
        None => Err(CliError::Config("missing spacing".into())),
        Some("linear") => Ok(SpacingArg::Linear),
        Some("log") => Ok(SpacingArg::Log),
        Some(other) => Err(CliError::Config(format!(
            "config spacing must be \"linear\" or \"log\", got \"{other}\""
        ))),
    }
}

fn thread_count() -> usize {
    match std::env::var("SSCHAIN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        Some(n) if n >= 1 => n.min(256),
        _ => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    }
}

/// The sampling abscissas, identical to the library's curve sampler: the
/// fractal-dimension path is calibrated on that exact grid.
fn kh_grid(min: f64, max: f64, n: usize, spacing: SpacingArg) -> Result<Vec<f64>, CliError> {
    if !(min >= 0.0) || !(max > min) || !max.is_finite() {
        return Err(Error::BadRange {
            detail: format!("need 0 <= kh_min < kh_max, got [{min}, {max}]"),
        }
        .into());
    }
    if n < 2 {
        return Err(Error::BadRange { detail: format!("need at least 2 samples, got {n}") }.into());
    }
    if spacing == SpacingArg::Log && !(min > 0.0) {
        return Err(Error::BadRange {
            detail: format!("log spacing requires kh_min > 0, got {min}"),
        }
        .into());
    }
    let den = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            let t = i as f64 / den;
            match spacing {
                SpacingArg::Linear => min + (max - min) * t,
                SpacingArg::Log => (min.ln() + (max.ln() - min.ln()) * t).exp(),
            }
        })
        .collect())
}

/// Certify every grid point, splitting the grid into contiguous chunks
/// across up to `SSCHAIN_THREADS` workers. Chunks rejoin in order and each
/// point is evaluated independently, so the result is identical to the
/// sequential loop.
fn sample_grid(
    params: ChainParams<f64>,
    grid: &[f64],
    tol: &ToleranceBudget<f64>,
) -> Result<Vec<DispersionSample<f64>>, CliError> {
    let workers = thread_count().min(grid.len().max(1));
    let raw: Vec<sschain::Result<DispersionSample<f64>>> = if workers <= 1 {
        grid.iter().map(|&kh| omega_sq(params, kh, tol)).collect()
    } else {
        let chunk = grid.len().div_ceil(workers);
        std::thread::scope(|scope| {
            let handles: Vec<_> = grid
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter().map(|&kh| omega_sq(params, kh, tol)).collect::<Vec<_>>()
                    })
                })
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("sampling worker panicked"))
                .collect()
        })
    };
    Ok(raw.into_iter().collect::<sschain::Result<Vec<_>>>()?)
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::Io)?;
    tmp.write_all(bytes).map_err(CliError::Io)?;
    tmp.persist(path).map_err(|e| CliError::Io(e.error))?;
    Ok(())
}

fn emit_json(report: &serde_json::Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = format!("{report:#}\n");
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn dispersion(args: DispersionArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let n = pick(args.n, cfg.n, 1.5);
    let delta = require(args.delta.or(cfg.delta), "--delta")?;
    let h = pick(args.h, cfg.h, 1.0);
    let kh_min = pick(args.kh_min, cfg.kh_min, 0.0);
    let kh_max = pick(args.kh_max, cfg.kh_max, 30.0);
    let samples = pick(args.samples, cfg.samples, 4096);
    let spacing = parse_spacing(
        args.spacing.or_else(|| cfg.spacing.is_none().then_some(SpacingArg::Linear)),
        cfg.spacing.as_deref(),
    )?;
    let tol = budget(pick(args.tol, cfg.tol, 1e-10))?;
    let out = args.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| "dispersion.csv".into());

    let params = ChainParams::physical(n, delta, h)?;
    let grid = kh_grid(kh_min, kh_max, samples, spacing)?;
    let rows = sample_grid(params, &grid, &tol)?;

    let mut text = String::from("kh,omega_sq,err_bound\n");
    for s in &rows {
        writeln!(text, "{},{},{}", s.kh, s.omega_sq, s.err_bound).expect("string write");
    }
    write_atomic(&out, text.as_bytes())
}

pub fn fractal_dim(args: FractalDimArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let scales = pick(args.scales, cfg.scales, 10);
    let out = args.out.or_else(|| cfg.out.clone());

    let (curve, predicted) = if args.selftest || cfg.selftest.unwrap_or(false) {
        // A straight line of known dimension 1: exercises sampling-free
        // counting and the fit end to end.
        let m = 1 << 14;
        let samples = (0..m)
            .map(|i| {
                let x = i as f64 / (m - 1) as f64;
                DispersionSample { kh: x, omega_sq: 0.3 * x + 0.1, err_bound: 0.0 }
            })
            .collect();
        let params = ChainParams::physical(1.5, 0.5, 1.0)?;
        (DispersionCurve { params, samples }, 1.0)
    } else {
        let n = pick(args.n, cfg.n, 1.5);
        let delta = require(args.delta.or(cfg.delta), "--delta")?;
        let h = pick(args.h, cfg.h, 1.0);
        let kh_min = pick(args.kh_min, cfg.kh_min, 0.01);
        let kh_max = pick(args.kh_max, cfg.kh_max, 100.0);
        let samples = pick(args.samples, cfg.samples, 1 << 16);
        let spacing = parse_spacing(
            args.spacing.or_else(|| cfg.spacing.is_none().then_some(SpacingArg::Log)),
            cfg.spacing.as_deref(),
        )?;
        let tol = budget(pick(args.tol, cfg.tol, 1e-6))?;
        let params = ChainParams::physical(n, delta, h)?;
        let grid = kh_grid(kh_min, kh_max, samples, spacing)?;
        let rows = sample_grid(params, &grid, &tol)?;
        (DispersionCurve { params, samples: rows }, 2.0 - delta)
    };

    let est = box_count_dimension(&curve, scales, true)?;
    let report = json!({
        "dimension": est.dimension,
        "predicted": predicted,
        "r2": est.r2,
        "scales": est.scales_used,
        "counts": est.counts,
        "out_of_range": est.out_of_range,
    });
    emit_json(&report, out.as_deref())
}

pub fn density(args: DensityArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let delta = require(args.delta.or(cfg.delta), "--delta")?;
    let h = pick(args.h, cfg.h, 1.0);
    let epsilon = pick(args.epsilon, cfg.epsilon, 1e-3);
    let omega_min = pick(args.omega_min, cfg.omega_min, 0.0);
    let omega_max = pick(args.omega_max, cfg.omega_max, 1.0);
    let samples = pick(args.samples, cfg.samples, 200);
    let tol = budget(pick(args.tol, cfg.tol, 1e-10))?;
    let out = args.out.or_else(|| cfg.out.clone()).unwrap_or_else(|| "density.csv".into());

    let cp = ContinuumParams::new(epsilon, delta, h)?;
    if !(omega_min >= 0.0) || !(omega_max > omega_min) || !omega_max.is_finite() {
        return Err(Error::BadRange {
            detail: format!("need 0 <= omega_min < omega_max, got [{omega_min}, {omega_max}]"),
        }
        .into());
    }
    if samples < 2 {
        return Err(
            Error::BadRange { detail: format!("need at least 2 samples, got {samples}") }.into()
        );
    }
    let c = constant_c(delta, &tol)?;

    let mut text = String::from("omega,rho\n");
    let den = (samples - 1) as f64;
    for i in 0..samples {
        let omega = omega_min + (omega_max - omega_min) * (i as f64 / den);
        writeln!(text, "{},{}", omega, oscillator_density(cp, omega, c)).expect("string write");
    }
    write_atomic(&out, text.as_bytes())
}

fn snapshot_csv(l: f64, m: usize, u: &[f64], v: &[f64]) -> String {
    let mut text = String::from("x,u,v\n");
    for i in 0..m {
        let x = l * i as f64 / m as f64;
        writeln!(text, "{},{},{}", x, u[i], v[i]).expect("string write");
    }
    text
}

fn snapshot_path(dir: &Path, index: usize) -> PathBuf {
    dir.join(format!("snapshot_{index:06}.csv"))
}

fn energy_entry(t: f64, kinetic: f64, elastic: f64, total: f64, drift: f64) -> serde_json::Value {
    json!({
        "t": t,
        "kinetic": kinetic,
        "elastic": elastic,
        "total": total,
        "drift_rel": drift,
    })
}

pub fn simulate(args: SimulateArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let l = pick(args.l, cfg.l, 40.0);
    let m = pick(args.m, cfg.m, 256);
    let n = pick(args.n, cfg.n, 1.5);
    let delta = require(args.delta.or(cfg.delta), "--delta")?;
    let h = pick(args.h, cfg.h, 1.0);
    let center = pick(args.packet_center, cfg.packet_center, l * 0.5);
    let width = pick(args.packet_width, cfg.packet_width, 3.0);
    let amplitude = pick(args.packet_amplitude, cfg.packet_amplitude, 1.0);
    let dt = pick(args.dt, cfg.dt, 0.05);
    let steps = pick(args.steps, cfg.steps, 1000);
    let snap_every = pick(args.snap_every, cfg.snap_every, 100).max(1);
    let tol = budget(pick(args.tol, cfg.tol, 1e-10))?;
    let out_dir = args.out_dir.or_else(|| cfg.out_dir.clone()).unwrap_or_else(|| "sim-out".into());
    let integrator = match (args.integrator, cfg.integrator.as_deref()) {
        (Some(i), _) => i,
        (None, Some("exact")) | (None, None) => IntegratorArg::Exact,
        (None, Some("verlet")) => IntegratorArg::Verlet,
        (None, Some(other)) => {
            return Err(CliError::Config(format!(
                "config integrator must be \"exact\" or \"verlet\", got \"{other}\""
            )))
        }
    };

    let params = ChainParams::physical(n, delta, h)?;
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::OutOfDomain { what: "packet width (must be > 0)", value: width }.into());
    }
    let u0 = if amplitude == 0.0 {
        EvaluableField::constant(0.0)
    } else {
        let packet = EvaluableField::gaussian_packet(center, width);
        let shape = packet.clone();
        EvaluableField::new(packet.decay_beta, packet.smooth_alpha, move |x: f64| {
            amplitude * shape.eval(x)
        })
    };
    let v0 = EvaluableField::constant(0.0);

    std::fs::create_dir_all(&out_dir).map_err(CliError::Io)?;
    let mut entries = Vec::new();
    match integrator {
        IntegratorArg::Exact => {
            let mut state: SpectralState<f64> = init_state(l, m, params, &u0, &v0)?;
            let e = energy(&state, &tol)?;
            write_atomic(
                &snapshot_path(&out_dir, 0),
                snapshot_csv(l, m, &state.field(), &state.velocity_field()).as_bytes(),
            )?;
            entries.push(energy_entry(state.t, e.kinetic, e.elastic, e.total, e.drift_rel));
            let mut done = 0usize;
            let mut index = 1usize;
            while done < steps {
                let group = snap_every.min(steps - done);
                state = evolve(&state, dt, group, &tol)?;
                done += group;
                let e = energy(&state, &tol)?;
                write_atomic(
                    &snapshot_path(&out_dir, index),
                    snapshot_csv(l, m, &state.field(), &state.velocity_field()).as_bytes(),
                )?;
                entries.push(energy_entry(state.t, e.kinetic, e.elastic, e.total, e.drift_rel));
                index += 1;
            }
        }
        IntegratorArg::Verlet => {
            if m < 8 || !m.is_power_of_two() {
                return Err(Error::GridSize { m }.into());
            }
            if !(l > 0.0) || !l.is_finite() {
                return Err(Error::OutOfDomain { what: "domain length (must be > 0)", value: l }
                    .into());
            }
            let step = l / m as f64;
            let u: Vec<f64> = (0..m).map(|i| u0.eval(step * i as f64)).collect();
            let v = vec![0.0f64; m];
            // Force truncation window sized at the highest represented mode;
            // all slower modes converge faster than it does.
            let kh_max = std::f64::consts::PI * m as f64 / l * h;
            let window = choose_window(params, kh_max, &tol)?;
            let traj = verlet_reference(&u, &v, l, params, &window, dt, steps, snap_every)?;
            let energies: Vec<(f64, f64)> =
                traj.iter().map(|s| truncated_energy(s, l, params, &window)).collect();
            let e0 = energies[0].0 + energies[0].1;
            for (index, (snap, &(kin, ela))) in traj.iter().zip(&energies).enumerate() {
                write_atomic(
                    &snapshot_path(&out_dir, index),
                    snapshot_csv(l, m, &snap.u, &snap.v).as_bytes(),
                )?;
                let total = kin + ela;
                let drift =
                    if e0 == 0.0 { total.abs() } else { ((total - e0) / e0).abs() };
                entries.push(energy_entry(snap.t, kin, ela, total, drift));
            }
        }
    }
    let log = json!({
        "integrator": match integrator {
            IntegratorArg::Exact => "exact",
            IntegratorArg::Verlet => "verlet",
        },
        "entries": entries,
    });
    write_atomic(&out_dir.join("energy.json"), format!("{log:#}\n").as_bytes())
}

/// (kinetic, elastic) of a Verlet frame under the truncated force law it was
/// integrated with, via the trapezoid-exact grid quadrature in mode space.
fn truncated_energy(
    snap: &VerletSnapshot<f64>,
    l: f64,
    params: ChainParams<f64>,
    window: &sschain::TruncationWindow<f64>,
) -> (f64, f64) {
    let m = snap.u.len();
    let step = l / m as f64;
    let kinetic = 0.5 * step * snap.v.iter().map(|&vi| vi * vi).sum::<f64>();
    let mut elastic = 0.0;
    for s in window.s_minus..=window.s_plus {
        let shift = params.h() * params.n().powf(s as f64);
        let weight = params.n().powf(-params.delta() * s as f64);
        // Periodic increment u(x + shift) - u(x) by linear interpolation on
        // the grid; the integrand is smooth so this matches the spectral
        // shift to second order, plenty for a drift log.
        let mut acc = 0.0;
        for i in 0..m {
            let pos = (i as f64 + shift / step).rem_euclid(m as f64);
            let i0 = pos.floor() as usize % m;
            let frac = pos - pos.floor();
            let shifted = snap.u[i0] * (1.0 - frac) + snap.u[(i0 + 1) % m] * frac;
            let d = shifted - snap.u[i];
            acc += d * d;
        }
        elastic += 0.5 * weight * acc * step;
    }
    (kinetic, elastic)
}

pub fn continuum(args: ContinuumArgs, cfg: &FileConfig) -> Result<(), CliError> {
    let delta = require(args.delta.or(cfg.delta), "--delta")?;
    let h = pick(args.h, cfg.h, 1.0);
    let epsilon = pick(args.epsilon, cfg.epsilon, 1e-3);
    let x = pick(args.x, cfg.x, 0.0);
    let tol = budget(pick(args.tol, cfg.tol, 1e-6))?;
    let out = args.out.or_else(|| cfg.out.clone());
    let field = match (args.field, cfg.field.as_deref()) {
        (Some(f), _) => f,
        (None, Some("gaussian")) | (None, None) => FieldArg::Gaussian,
        (None, Some("lorentzian")) => FieldArg::Lorentzian,
        (None, Some("constant")) => FieldArg::Constant,
        (None, Some(other)) => {
            return Err(CliError::Config(format!(
                "config field must be \"gaussian\", \"lorentzian\" or \"constant\", got \"{other}\""
            )))
        }
    };

    let cp = ContinuumParams::new(epsilon, delta, h)?;
    let u = match field {
        FieldArg::Gaussian => EvaluableField::gaussian(),
        FieldArg::Lorentzian => EvaluableField::lorentzian(),
        FieldArg::Constant => EvaluableField::constant(1.0),
    };
    let chain = ChainParams::physical(1.0 + epsilon, delta, h)?;
    let series = selfsim_laplacian(&u, chain, x, &tol)?;
    let cont = continuum_laplacian(&u, cp, x, &tol)?;
    let consts = ContinuumConstants::compute(cp, &tol)?;
    let denom = series.value.abs().max(cont.abs());
    let rel_diff = if denom <= f64::EPSILON { 0.0 } else { (series.value - cont).abs() / denom };
    let report = json!({
        "C": consts.c,
        "continuum_value": cont,
        "longwave_coeff": consts.power_coeff,
        "rel_diff": rel_diff,
        "series_value": series.value,
    });
    emit_json(&report, out.as_deref())
}
