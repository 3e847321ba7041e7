//! One pipeline per subcommand. Each writes `summary.json` plus CSVs into
//! the output directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde_json::{json, Value};

use ma_plate_core::discretization::{
    det2, hessian, integrate, laplacian, make_grid, DomainKind, Grid2D, ScalarField,
};
use ma_plate_core::elasticity3d::{compat_check, QuadraticForm3};
use ma_plate_core::families::{hessian_family, potential_from_hessian, saddle_family, FamilyOptions};
use ma_plate_core::harness::{lower_bound_gap, run_scaling, ScalingExperiment};
use ma_plate_core::poly::sym_block;
use ma_plate_core::radial::{
    lambda_multiplier, radial_admissible, radial_el_check, radial_energy, radial_minimizer,
};
use ma_plate_core::solver::{
    default_initial_guess, default_s_eps, el_residual, matching_correct, minimize, radial_initial_guess,
    MatchingOptions,
};

use crate::config::{Command, InitChoice, RunConfig};
use crate::CliError;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn write_summary(dir: &Path, v: &Value) -> Result<(), CliError> {
    let path = dir.join("summary.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| CliError::Invalid(e.to_string()))?;
    writeln!(w).and_then(|_| w.flush()).map_err(io_err(&path))
}

fn write_table(dir: &Path, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut w = create(&path)?;
    let go = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "{header}")?;
        for r in rows {
            let line: Vec<String> = r.iter().map(|x| format!("{x:e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()
    };
    go(&mut w).map_err(io_err(&path))
}

fn write_field(dir: &Path, name: &str, f: &ScalarField) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut w = create(&path)?;
    f.write_csv(&mut w)?;
    w.flush().map_err(io_err(&path))
}

fn grid_of(cfg: &RunConfig) -> Result<Arc<Grid2D>, CliError> {
    Ok(make_grid(cfg.domain, cfg.n)?)
}

fn grid_label(g: &Grid2D) -> String {
    format!("{}:{}", g.kind().name(), g.n())
}

fn bending_energy(v: &ScalarField) -> f64 {
    integrate(&hessian(v).frob2())
}

/// Outcome of a pipeline that ran to completion; `converged = false` maps to
/// exit status 3 after the artifacts are written.
pub struct Outcome {
    pub summary: Value,
    pub converged: bool,
}

pub fn execute(cfg: &RunConfig) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(&cfg.out).map_err(io_err(&cfg.out))?;
    let out = match cfg.command {
        Command::Solve => solve(cfg)?,
        Command::Radial => radial(cfg)?,
        Command::Family => family(cfg)?,
        Command::Scaling => scaling(cfg)?,
        Command::CheckEl => check_el(cfg)?,
        Command::CheckCompat => check_compat(cfg)?,
        Command::Matching => matching(cfg)?,
    };
    write_summary(&cfg.out, &out.summary)?;
    Ok(out)
}

fn initial_guess(cfg: &RunConfig, f: &ScalarField, grid: &Arc<Grid2D>) -> Result<(ScalarField, String), CliError> {
    let radial_ok = || {
        cfg.domain == DomainKind::UnitDisk
            && cfg.f.is_radial()
            && cfg
                .f
                .radial_profile(cfg.file.radial.m)
                .map(|p| p.lower_bound > 0.0 && radial_admissible(&p).admissible)
                .unwrap_or(false)
    };
    let radial_lift = || -> Result<ScalarField, CliError> {
        if cfg.domain != DomainKind::UnitDisk {
            return Err(CliError::Invalid("radial initial guess needs a disk grid".into()));
        }
        Ok(radial_initial_guess(&cfg.f.radial_profile(cfg.file.radial.m)?, grid)?)
    };
    Ok(match &cfg.init {
        InitChoice::Auto if radial_ok() => (radial_lift()?, "radial".into()),
        InitChoice::Auto | InitChoice::Default => (default_initial_guess(f), "default".into()),
        InitChoice::Radial => (radial_lift()?, "radial".into()),
        InitChoice::Saddle(t) => (saddle_family(grid, *t), format!("saddle:{t}")),
    })
}

fn solve(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = grid_of(cfg)?;
    let f = cfg.f.field(&grid)?;
    let (v0, init) = initial_guess(cfg, &f, &grid)?;
    let rep = minimize(&f, &cfg.solver, &v0)?;
    write_field(&cfg.out, "v.csv", &rep.v)?;
    write_field(&cfg.out, "multiplier.csv", &rep.multiplier)?;
    if let Some(psi) = &rep.psi {
        write_field(&cfg.out, "psi.csv", psi)?;
    }
    let trace: Vec<Vec<f64>> = rep
        .trace
        .iter()
        .map(|t| vec![t.outer as f64, t.energy, t.residual, t.mu, t.inner_iters as f64, t.decrement])
        .collect();
    write_table(&cfg.out, "trace.csv", "outer,energy,residual,mu,inner_iters,decrement", &trace)?;
    let psi_gap = rep.psi.as_ref().map(|psi| {
        grid.deep_nodes()
            .map(|k| (psi.values[k] - f.values[k]).abs())
            .fold(0.0, f64::max)
    });
    let summary = json!({
        "command": "solve",
        "f": cfg.f.to_string(),
        "grid": grid_label(&grid),
        "mode": rep.mode.to_string(),
        "init": init,
        "energy": rep.energy,
        "energy_over_2pi": rep.energy / (2.0 * std::f64::consts::PI),
        "constraint_residual": rep.constraint_residual,
        "el_residual": rep.el_residual,
        "outer_iters": rep.outer_iters,
        "converged": rep.converged,
        "psi_minus_f_deep": psi_gap,
        "monotone": rep.trace.iter().all(|t| t.monotone),
        "warnings": rep.warnings,
        "solver": cfg.solver,
    });
    Ok(Outcome {
        summary,
        converged: rep.converged,
    })
}

fn radial(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let p = cfg.f.radial_profile(cfg.file.radial.m)?;
    let adm = radial_admissible(&p);
    let mut summary = json!({
        "command": "radial",
        "f": cfg.f.to_string(),
        "m": p.m(),
        "admissible": adm.admissible,
        "verdict": adm.verdict(),
        "admissibility": adm,
    });
    if !adm.admissible {
        write_table(&cfg.out, "radial.csv", "r,f", &p.r.iter().zip(&p.values).map(|(r, f)| vec![*r, *f]).collect::<Vec<_>>())?;
        return Ok(Outcome {
            summary,
            converged: true,
        });
    }
    let energy = radial_energy(&p)?;
    let v = radial_minimizer(&p)?;
    let lam = lambda_multiplier(&p)?;
    let el = radial_el_check(&v, &lam, cfg.file.radial.el_delta)?;
    let rows: Vec<Vec<f64>> = (0..p.m())
        .map(|i| vec![p.r[i], p.values[i], v.values[i], lam.values[i]])
        .collect();
    write_table(&cfg.out, "radial.csv", "r,f,v,lambda", &rows)?;
    summary["energy"] = json!(energy);
    summary["el_residual"] = json!(el);
    summary["lambda_at_0"] = json!(lam.values[0]);
    summary["lambda_at_1"] = json!(lam.values[p.m() - 1]);
    Ok(Outcome {
        summary,
        converged: true,
    })
}

fn family(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = grid_of(cfg)?;
    let f = cfg.f.field(&grid)?;
    let opts = FamilyOptions {
        seed: cfg.seed,
        ..Default::default()
    };
    let mut rows = Vec::new();
    let mut members = Vec::new();
    for (i, &theta) in cfg.file.family.thetas.iter().enumerate() {
        let h = hessian_family(&f, theta, &opts)?;
        let v = potential_from_hessian(&h, &opts)?;
        let lap = laplacian(&v).max_abs_interior();
        let det_err = det2(&hessian(&v)).sub(&f).max_abs_interior();
        let energy = bending_energy(&v);
        write_field(&cfg.out, &format!("v_theta{i}.csv"), &v)?;
        rows.push(vec![theta, energy, lap, det_err]);
        members.push(json!({"theta": theta, "energy": energy, "max_laplacian": lap, "max_det_error": det_err}));
    }
    write_table(&cfg.out, "family.csv", "theta,energy,max_laplacian,max_det_error", &rows)?;
    let (lo, hi) = rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r[1]), b.max(r[1])));
    let summary = json!({
        "command": "family",
        "f": cfg.f.to_string(),
        "grid": grid_label(&grid),
        "members": members,
        "energy_spread": if lo > 0.0 { (hi - lo) / lo } else { f64::NAN },
        "h2": grid.spacing().powi(2),
    });
    Ok(Outcome {
        summary,
        converged: true,
    })
}

fn scaling(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = grid_of(cfg)?;
    let s = &cfg.file.scaling;
    let q = QuadraticForm3::new(s.lame_lambda, s.lame_mu)?;
    let spec = cfg.growth.spec(cfg.gamma, &grid)?;
    let compat = compat_check(&spec, &grid, cfg.file.compat.tol);
    let exp = ScalingExperiment::new(
        spec,
        cfg.growth.v.clone(),
        cfg.growth.w.clone(),
        q,
        cfg.h_list.clone(),
        grid.clone(),
        s.n_thick,
    )?;
    let res = run_scaling(&exp)?;
    let rows: Vec<Vec<f64>> = res.rows.iter().map(|r| vec![r.h, r.energy, r.ratio]).collect();
    write_table(&cfg.out, "scaling.csv", "h,energy,ratio", &rows)?;
    let summary = json!({
        "command": "scaling",
        "growth": cfg.growth.name,
        "grid": grid_label(&grid),
        "gamma": res.gamma,
        "n_thick": s.n_thick,
        "slope": res.slope,
        "limit": res.limit,
        "expected_limit": res.expected_limit,
        "limit_rel_error": res.limit_rel_error(),
        "min_ratio": res.min_ratio,
        "verdict": res.verdict(0.1, 0.2),
        "compat": compat.verdict(),
        "rows": res.rows,
    });
    Ok(Outcome {
        summary,
        converged: true,
    })
}

fn check_el(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.domain != DomainKind::UnitDisk {
        return Err(CliError::Invalid("check-el lifts radial profiles and needs a disk grid".into()));
    }
    let grid = grid_of(cfg)?;
    let p = cfg.f.radial_profile(cfg.file.radial.m)?;
    let v = radial_minimizer(&p)?;
    let lam = lambda_multiplier(&p)?;
    let radial = radial_el_check(&v, &lam, cfg.file.radial.el_delta)?;
    let el2d = el_residual(&v.lift(&grid), &lam.lift(&grid));
    let summary = json!({
        "command": "check-el",
        "f": cfg.f.to_string(),
        "grid": grid_label(&grid),
        "radial": radial,
        "grid_residual": el2d,
    });
    Ok(Outcome {
        summary,
        converged: true,
    })
}

fn check_compat(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = grid_of(cfg)?;
    let spec = cfg.growth.spec(cfg.gamma, &grid)?;
    let tol = cfg.file.compat.tol;
    let gap = lower_bound_gap(&spec, &cfg.growth.gap_candidates(&grid), &QuadraticForm3::default(), tol)?;
    let summary = json!({
        "command": "check-compat",
        "growth": cfg.growth.name,
        "grid": grid_label(&grid),
        "verdict": gap.compat.verdict(),
        "curl_residual": gap.compat.curl_residual,
        "gauss_residual": gap.compat.gauss_residual,
        "tol": tol,
        "gap": gap.gap,
        "gap_candidate": gap.best,
        "gap_consistent": gap.consistent,
        "candidates": gap.candidates,
    });
    Ok(Outcome {
        summary,
        converged: true,
    })
}

fn matching(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let grid = grid_of(cfg)?;
    let spec = cfg.growth.spec(cfg.gamma, &grid)?;
    let block = sym_block(&spec.s_g);
    let s_g = move |x: [f64; 2]| [block[0].eval(x), block[1].eval(x), block[2].eval(x)];
    let s_eps = default_s_eps(&s_g);
    let pv = cfg.growth.v.clone();
    let v = ScalarField::from_fn(&grid, |x| pv.eval(x));
    let m = &cfg.file.matching;
    let opts = MatchingOptions {
        tol: m.tol,
        max_iter: m.max_iter,
        ..Default::default()
    };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for (i, &eps) in m.eps.iter().enumerate() {
        let r = matching_correct(&v, &s_g, &s_eps, eps, &opts)?;
        write_field(&cfg.out, &format!("z_eps{i}.csv"), &r.z)?;
        let ratio = if eps != 0.0 { r.z_max / eps } else { f64::NAN };
        rows.push(vec![eps, r.residual, r.iterations as f64, r.z_max, ratio, r.curvature]);
        reports.push(r);
    }
    write_table(&cfg.out, "matching.csv", "eps,residual,iterations,z_max,z_over_eps,curvature", &rows)?;
    let reductions: Vec<f64> = rows.windows(2).map(|w| w[0][4] / w[1][4]).collect();
    let summary = json!({
        "command": "matching",
        "growth": cfg.growth.name,
        "grid": grid_label(&grid),
        "runs": reports,
        "z_over_eps_reduction": reductions,
    });
    Ok(Outcome {
        summary,
        converged: true,
    })
}
