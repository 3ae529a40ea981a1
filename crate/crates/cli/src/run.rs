use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use slidebasis::io::{format_float, read_loads_csv, read_supports_csv, write_columns_csv, write_vtk_structured, write_vtk_unstructured};
use slidebasis::mesh::{Domain, QuadGrid, TetMesh};
use slidebasis::optimize::{
    fixed_basis_optimize, slide_optimize, DesignProblem, FieldProblem, HessianMode, ReducedProblem, SlideTrace, SlidingConfig,
};
use slidebasis::rocket::{
    chamber_grid, default_burn_duration, make_target_profile, read_profile_csv, simulate_thrust_profile, uniform_reference_thrust,
    write_profile_csv, RocketDesign,
};
use slidebasis::spectral::{assemble_laplacian, domain_hash, load_basis, save_basis, BasisBuilder, EigenOptions};
use slidebasis::topopt::{cantilever_model, FemModel, TopOptDesign};

use crate::config::{Mode, RocketSection, RunConfig, TopOptSection};
use crate::CliError;

/// Files produced by a run, written only once the whole run succeeded.
#[derive(Debug, Default)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
    /// Eigenbasis to store in the configured cache.
    cache: Option<(PathBuf, [u8; 32], slidebasis::SpectralBasis)>,
}

impl Artifacts {
    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("serializable summary");
        text.push('\n');
        self.add(name, text.into_bytes());
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.files.iter().find(|f| f.0 == name).map(|f| f.1.as_slice())
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for (name, bytes) in &self.files {
            let p = dir.join(name);
            std::fs::write(&p, bytes).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        }
        if let Some((path, hash, basis)) = &self.cache {
            save_basis(path, hash, basis)?;
        }
        Ok(())
    }
}

/// Outcome of one optimization, as stored in `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunSummary {
    pub application: String,
    pub mode: Mode,
    pub k: usize,
    pub slides: usize,
    pub accepted_slides: usize,
    pub objective: f64,
    /// Thrust-profile error in percent (rocket only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_percent: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mass_fraction: Option<f64>,
    pub max_violation: f64,
    pub evaluations: usize,
    pub gradient_evaluations: usize,
    pub stop: String,
    /// Wall time; the only field that differs between repeated runs.
    pub seconds: f64,
}

fn csv<F: FnOnce(&mut Vec<u8>) -> Result<(), CliError>>(f: F) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn builder_for(domain: &impl Domain, cfg: &RunConfig, artifacts: &mut Artifacts) -> Result<BasisBuilder, CliError> {
    let adj = domain.face_adjacency()?;
    let hash = domain_hash(&adj);
    let mut builder = BasisBuilder::new(assemble_laplacian(&adj), EigenOptions::default())?;
    if let Some(path) = &cfg.basis.cache {
        if path.is_file() {
            match load_basis(path, &hash)? {
                Some(b) => {
                    log::info!("loaded {} basis vectors from {}", b.k(), path.display());
                    builder = builder.with_basis(b)?;
                }
                None => log::warn!("basis cache {} belongs to another domain; recomputing", path.display()),
            }
        }
        artifacts.cache = Some((path.clone(), hash, slidebasis::SpectralBasis::identity(0)));
    }
    Ok(builder)
}

fn remember_basis<P: FieldProblem>(problem: &ReducedProblem<P>, artifacts: &mut Artifacts) {
    if let (Some(entry), Some(b)) = (artifacts.cache.as_mut(), problem.basis()) {
        entry.2 = b.clone();
    }
    if artifacts.cache.as_ref().is_some_and(|c| c.2.k() == 0) {
        artifacts.cache = None;
    }
}

/// Runs one mode and returns the trace and the final raw field.
fn optimize<P: FieldProblem>(
    field: P,
    domain: &impl Domain,
    mode: Mode,
    fixed_k: usize,
    cfg: &RunConfig,
    artifacts: &mut Artifacts,
) -> Result<(SlideTrace, Vec<f64>, P), CliError> {
    let sliding = &cfg.sliding;
    match mode {
        Mode::Sliding | Mode::Fixed => {
            let builder = builder_for(domain, cfg, artifacts)?;
            let mut problem = ReducedProblem::spectral(field, builder)?;
            let trace = if mode == Mode::Sliding {
                slide_optimize(&mut problem, sliding)?
            } else {
                fixed_basis_optimize(&mut problem, fixed_k, sliding)?
            };
            let f = problem.synthesize(&trace.weights)?;
            remember_basis(&problem, artifacts);
            Ok((trace, f, problem.into_field_problem()))
        }
        Mode::Conventional => {
            // A Hessian over every element is out of reach; use BFGS.
            let conv = SlidingConfig {
                hessian: HessianMode::Bfgs,
                ..sliding.clone()
            };
            let mut problem = ReducedProblem::identity(field);
            let n = problem.max_weights().unwrap_or(0);
            let trace = fixed_basis_optimize(&mut problem, n, &conv)?;
            let f = problem.synthesize(&trace.weights)?;
            Ok((trace, f, problem.into_field_problem()))
        }
    }
}

fn summary(application: &str, mode: Mode, trace: &SlideTrace, max_violation: f64) -> RunSummary {
    RunSummary {
        application: application.into(),
        mode,
        k: trace.total_basis(),
        slides: trace.records.len(),
        accepted_slides: trace.records.iter().filter(|r| r.accepted).count(),
        objective: trace.objective,
        error_percent: None,
        mass_fraction: None,
        max_violation,
        evaluations: trace.evaluations,
        gradient_evaluations: trace.gradient_evaluations,
        stop: format!("{:?}", trace.stop),
        seconds: trace.seconds,
    }
}

fn trace_csv(trace: &SlideTrace) -> Result<Vec<u8>, CliError> {
    csv(|b| Ok(trace.write_csv(b)?))
}

fn fixed_k(cfg: &RunConfig) -> usize {
    cfg.basis.fixed_k.unwrap_or(cfg.sliding.n_opt)
}

// ---------------------------------------------------------------- rocket

fn rocket_section(cfg: &RunConfig) -> Result<&RocketSection, CliError> {
    cfg.rocket.as_ref().ok_or_else(|| CliError::Config("missing [rocket] section".into()))
}

pub fn rocket_design(r: &RocketSection) -> Result<RocketDesign, CliError> {
    let grid = chamber_grid(&r.params, r.grid[0], r.grid[1])?;
    let bounds = r.bounds.resolve()?;
    let t = &r.target;
    let target = match t.kind()? {
        None => {
            let path = t.csv.as_ref().ok_or_else(|| CliError::Config("custom target needs target.csv".into()))?;
            read_profile_csv(path)?
        }
        Some(kind) => {
            let duration = t.duration.unwrap_or_else(|| default_burn_duration(&r.params, &bounds));
            let scale = match t.scale {
                Some(s) => s,
                None => uniform_reference_thrust(&grid, &r.params, &bounds, duration, t.samples)?,
            };
            make_target_profile(kind, duration, scale, t.ratio, t.samples)?
        }
    };
    let design = RocketDesign::new(grid, r.params.clone(), bounds, target)?;
    Ok(match r.margin {
        Some(m) => design.with_margin(m),
        None => design,
    })
}

fn grid_centers(grid: &QuadGrid) -> (Vec<f64>, Vec<f64>) {
    (0..grid.n_r() * grid.n_z())
        .map(|c| {
            let (i, j) = grid.cell_coords(c);
            grid.cell_center(i, j)
        })
        .unzip()
}

fn rocket_artifacts(
    design: &RocketDesign,
    field: &[f64],
    trace: &SlideTrace,
    mode: Mode,
    artifacts: &mut Artifacts,
    suffix: &str,
) -> Result<RunSummary, CliError> {
    let grid = design.grid();
    let sim = design.simulate(field)?;
    let rate = design.burn_rates(field);
    let unburned: Vec<f64> = design.unburned_mask(&sim).iter().map(|&m| f64::from(u8::from(m))).collect();
    let (r, z) = grid_centers(grid);
    let fields: [(&str, &[f64]); 4] = [("r", &r), ("z", &z), ("burn_rate", &rate), ("unburned", &unburned)];
    artifacts.add(
        &format!("burn_rate{suffix}.vtk"),
        csv(|b| Ok(write_vtk_structured(b, grid, "burn rate", &fields[2..])?))?,
    );
    artifacts.add(&format!("burn_rate{suffix}.csv"), csv(|b| Ok(write_columns_csv(b, "cell", &fields)?))?);
    artifacts.add(
        &format!("profile{suffix}.csv"),
        csv(|b| Ok(write_profile_csv(b, &[("target", design.target()), ("achieved", &sim.profile)])?))?,
    );
    let g = design.constraints(&sim.inner_radii);
    let mut text = String::from("row,z,r_b,g,degenerate\n");
    for (j, (rb, gj)) in sim.inner_radii.iter().zip(&g).enumerate() {
        let zj = grid.node_position(0, j).1;
        let degenerate = u8::from(sim.degenerate_rows.contains(&j));
        text += &format!("{j},{},{},{},{degenerate}\n", format_float(zj), format_float(*rb), format_float(*gj));
    }
    artifacts.add(&format!("constraints{suffix}.csv"), text.into_bytes());
    artifacts.add(&format!("trace{suffix}.csv"), trace_csv(trace)?);
    let mut s = summary("rocket", mode, trace, g.iter().fold(0.0f64, |m, &x| m.max(x)));
    s.error_percent = Some(sim.profile.error_percent(design.target()));
    Ok(s)
}

pub fn run_rocket(cfg: &RunConfig) -> Result<(Artifacts, RunSummary), CliError> {
    let r = rocket_section(cfg)?;
    let design = rocket_design(r)?;
    let grid = design.grid().clone();
    let mut artifacts = Artifacts::default();
    let (trace, field, design) = optimize(design, &grid, cfg.mode, fixed_k(cfg), cfg, &mut artifacts)?;
    let s = rocket_artifacts(&design, &field, &trace, cfg.mode, &mut artifacts, "")?;
    artifacts.add_json("summary.json", &s);
    artifacts.add("config.toml", cfg.to_toml()?.into_bytes());
    Ok((artifacts, s))
}

/// Forward burn of a uniform rate (default: bounds midpoint) or of a
/// per-cell `cell,rate` CSV.
pub fn run_simulate(cfg: &RunConfig, rate: Option<f64>, field: Option<&Path>) -> Result<Artifacts, CliError> {
    let r = rocket_section(cfg)?;
    let grid = chamber_grid(&r.params, r.grid[0], r.grid[1])?;
    let n = grid.n_r() * grid.n_z();
    let speed = match (field, rate) {
        (Some(path), _) => {
            let rows = slidebasis::io::read_numeric_csv(path, 2)?;
            if rows.len() != n {
                return Err(CliError::Config(format!("{}: expected {n} cells, got {}", path.display(), rows.len())));
            }
            rows.iter().map(|row| row[1]).collect()
        }
        (None, Some(v)) => vec![v; n],
        (None, None) => vec![0.5 * (r.bounds.lower + r.bounds.upper); n],
    };
    let sim = simulate_thrust_profile(&grid, &speed, &r.params, r.target.samples, r.target.duration)?;
    let mut artifacts = Artifacts::default();
    let (rr, z) = grid_centers(&grid);
    let mask: Vec<f64> = slidebasis::rocket::burn_mask(&grid, &sim.phi, sim.t_burn).iter().map(|&m| f64::from(u8::from(m))).collect();
    let fields: [(&str, &[f64]); 4] = [("r", &rr), ("z", &z), ("burn_rate", &speed), ("unburned", &mask)];
    artifacts.add("burn_rate.vtk", csv(|b| Ok(write_vtk_structured(b, &grid, "burn rate", &fields[2..])?))?);
    artifacts.add("burn_rate.csv", csv(|b| Ok(write_columns_csv(b, "cell", &fields)?))?);
    artifacts.add("profile.csv", csv(|b| Ok(write_profile_csv(b, &[("thrust", &sim.profile)])?))?);
    #[derive(Serialize)]
    struct Sim {
        t_burn: f64,
        mean_thrust: f64,
        degenerate_rows: Vec<usize>,
    }
    artifacts.add_json(
        "summary.json",
        &Sim {
            t_burn: sim.t_burn,
            mean_thrust: sim.profile.mean(),
            degenerate_rows: sim.degenerate_rows.clone(),
        },
    );
    artifacts.add("config.toml", cfg.to_toml()?.into_bytes());
    Ok(artifacts)
}

// ---------------------------------------------------------------- topopt

pub fn fem_model(t: &TopOptSection) -> Result<FemModel, CliError> {
    let nu = t.design.nu;
    if let Some(c) = &t.cantilever {
        return Ok(cantilever_model(c.cells, c.size, c.load, nu)?);
    }
    let missing = || CliError::Config("topopt needs nodes, elements, bc and loads files".into());
    let mesh = TetMesh::read_files(t.nodes.as_ref().ok_or_else(missing)?, t.elements.as_ref().ok_or_else(missing)?)?;
    let supports = read_supports_csv(t.bc.as_ref().ok_or_else(missing)?)?;
    let loads = read_loads_csv(t.loads.as_ref().ok_or_else(missing)?, mesh.n_vertices())?;
    Ok(FemModel::new(mesh, nu, supports, loads)?)
}

fn topopt_section(cfg: &RunConfig) -> Result<&TopOptSection, CliError> {
    cfg.topopt.as_ref().ok_or_else(|| CliError::Config("missing [topopt] section".into()))
}

fn topopt_artifacts(
    design: &TopOptDesign,
    field: &[f64],
    trace: &SlideTrace,
    mode: Mode,
    artifacts: &mut Artifacts,
    suffix: &str,
) -> Result<RunSummary, CliError> {
    let state = design.forward(field)?;
    let mats = &design.config().materials;
    let ids: Vec<f64> = state.filtered.iter().map(|&r| mats.snap(r) as f64).collect();
    let fields: [(&str, &[f64]); 3] = [("density", &state.filtered), ("material", &ids), ("modulus", &state.moduli)];
    artifacts.add(
        &format!("density{suffix}.vtk"),
        csv(|b| Ok(write_vtk_unstructured(b, design.model().mesh(), "density", &fields)?))?,
    );
    artifacts.add(&format!("density{suffix}.csv"), csv(|b| Ok(write_columns_csv(b, "element", &fields)?))?);
    artifacts.add(&format!("trace{suffix}.csv"), trace_csv(trace)?);
    let mut s = summary("topopt", mode, trace, (state.mass_fraction - design.config().m_frac).max(0.0));
    s.mass_fraction = Some(state.mass_fraction);
    Ok(s)
}

/// Builds the design and solves once at the initial field so a bad
/// support set fails as a solver error before any optimization starts.
fn topopt_design(t: &TopOptSection) -> Result<TopOptDesign, CliError> {
    let design = TopOptDesign::new(fem_model(t)?, t.design.clone())?;
    design.forward(&vec![0.0; design.model().n_elements()])?;
    Ok(design)
}

pub fn run_topopt(cfg: &RunConfig) -> Result<(Artifacts, RunSummary), CliError> {
    let t = topopt_section(cfg)?;
    let design = topopt_design(t)?;
    let mesh = design.model().mesh().clone();
    let mut artifacts = Artifacts::default();
    let (trace, field, design) = optimize(design, &mesh, cfg.mode, fixed_k(cfg), cfg, &mut artifacts)?;
    let s = topopt_artifacts(&design, &field, &trace, cfg.mode, &mut artifacts, "")?;
    artifacts.add_json("summary.json", &s);
    artifacts.add("config.toml", cfg.to_toml()?.into_bytes());
    Ok((artifacts, s))
}

// ---------------------------------------------------------------- compare

/// Sliding first, then the other modes; fixed uses the basis size the
/// sliding run ended with.
pub fn run_compare(cfg: &RunConfig) -> Result<(Artifacts, Vec<RunSummary>), CliError> {
    let mut artifacts = Artifacts::default();
    let mut summaries: Vec<RunSummary> = Vec::new();
    let mut modes = cfg.compare.modes.clone();
    modes.sort_by_key(|m| *m != Mode::Sliding);
    modes.dedup();
    let mut k = fixed_k(cfg);
    for mode in modes {
        let suffix = format!("_{mode}");
        let s = if let Some(r) = &cfg.rocket {
            let design = rocket_design(r)?;
            let grid = design.grid().clone();
            let (trace, field, design) = optimize(design, &grid, mode, k, cfg, &mut artifacts)?;
            rocket_artifacts(&design, &field, &trace, mode, &mut artifacts, &suffix)?
        } else {
            let t = topopt_section(cfg)?;
            let design = topopt_design(t)?;
            let mesh = design.model().mesh().clone();
            let (trace, field, design) = optimize(design, &mesh, mode, k, cfg, &mut artifacts)?;
            topopt_artifacts(&design, &field, &trace, mode, &mut artifacts, &suffix)?
        };
        if mode == Mode::Sliding {
            k = s.k;
        }
        summaries.push(s);
    }
    let mut text = String::from("mode,k,objective,error_percent,mass_fraction,max_violation,evaluations,gradient_evaluations\n");
    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
    for s in &summaries {
        text += &format!(
            "{},{},{},{},{},{},{},{}\n",
            s.mode,
            s.k,
            format_float(s.objective),
            opt(s.error_percent),
            opt(s.mass_fraction),
            format_float(s.max_violation),
            s.evaluations,
            s.gradient_evaluations
        );
    }
    artifacts.add("comparison.csv", text.into_bytes());
    artifacts.add_json("summary.json", &summaries);
    artifacts.add("config.toml", cfg.to_toml()?.into_bytes());
    Ok((artifacts, summaries))
}

// ---------------------------------------------------------------- basis

pub fn run_basis(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    enum Dom {
        Grid(QuadGrid),
        Mesh(TetMesh),
    }
    let count = cfg.basis.count.unwrap_or(cfg.sliding.n_opt);
    let start = Instant::now();
    let mut artifacts = Artifacts::default();
    let dom = match &cfg.rocket {
        Some(r) => Dom::Grid(chamber_grid(&r.params, r.grid[0], r.grid[1])?),
        None => Dom::Mesh(fem_model(topopt_section(cfg)?)?.mesh().clone()),
    };
    let mut builder = match &dom {
        Dom::Grid(g) => builder_for(g, cfg, &mut artifacts)?,
        Dom::Mesh(m) => builder_for(m, cfg, &mut artifacts)?,
    };
    let basis = builder.ensure(count)?.truncated(count);
    let names: Vec<String> = (0..basis.k()).map(|i| format!("mode_{i}")).collect();
    let fields: Vec<(&str, &[f64])> = names.iter().enumerate().map(|(i, n)| (n.as_str(), basis.column(i))).collect();
    let vtk = match &dom {
        Dom::Grid(g) => csv(|b| Ok(write_vtk_structured(b, g, "eigenbasis", &fields)?))?,
        Dom::Mesh(m) => csv(|b| Ok(write_vtk_unstructured(b, m, "eigenbasis", &fields)?))?,
    };
    artifacts.add("basis.vtk", vtk);
    let residuals = basis.residuals(builder.laplacian());
    let mut text = String::from("index,eigenvalue,residual\n");
    for (i, (lambda, res)) in basis.eigenvalues().iter().zip(&residuals).enumerate() {
        text += &format!("{i},{},{}\n", format_float(*lambda), format_float(*res));
    }
    artifacts.add("eigenvalues.csv", text.into_bytes());
    #[derive(Serialize)]
    struct BasisSummary {
        n: usize,
        k: usize,
        orthonormality_error: f64,
        max_residual: f64,
        seconds: f64,
    }
    artifacts.add_json(
        "summary.json",
        &BasisSummary {
            n: basis.n(),
            k: basis.k(),
            orthonormality_error: basis.orthonormality_error(),
            max_residual: residuals.iter().fold(0.0f64, |m, &r| m.max(r)),
            seconds: start.elapsed().as_secs_f64(),
        },
    );
    if let Some(c) = artifacts.cache.as_mut() {
        c.2 = basis;
    }
    Ok(artifacts)
}
