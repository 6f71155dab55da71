use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{compute_gap, sector_specs, single_particle_gap, InteractionMode, ReferenceChoice, Sector, Solver, WorkflowConfig};
use crate::determinant::ExcitationLevels;
use crate::lucj_sim::{build_state, load_samples, sample, SampleSet, DEFAULT_STATE_CAP};
use crate::model::{load_lattice, map_to_electronic, ElectronicIntegrals, LatticeHamiltonian, OnSiteConvention, SectorSpec};
use crate::reference::{lucj_from_t2, mp2_doubles, solve_mean_field, ConnectivityMask, MeanFieldOptions, MeanFieldSolution, T2Amplitudes};
use crate::selci::{fci_ground, hci_ground, SelectionSchedule, DEFAULT_FCI_CAP};
use crate::sqd::{energy_variance, extsqd_expand, filter_samples, solve_subspace, sqd_sweep, DavidsonOptions, GroundStateResult, SweepPoint};
use crate::{Error, ErrorCategory, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub fraction: f64,
    pub dimension: usize,
    pub energy: f64,
    pub residual: f64,
    pub variance: Option<f64>,
    pub converged: bool,
}

impl SweepRow {
    fn from_result(fraction: f64, r: &GroundStateResult) -> Self {
        SweepRow {
            fraction,
            dimension: r.dimension(),
            energy: r.energy,
            residual: r.residual_norm,
            variance: r.variance,
            converged: r.converged,
        }
    }
}

pub const SWEEP_HEADER: &str = "fraction,d,energy,residual,variance,converged";

/// Per-solver, per-sector convergence table.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub solver: Solver,
    pub sector: Sector,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn file_name(&self) -> String {
        format!("{}_{}.csv", self.solver, self.sector)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for r in &self.rows {
            let variance = r.variance.map(|v| format!("{v:e}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:.12},{:e},{},{}",
                r.fraction, r.dimension, r.energy, r.residual, variance, r.converged
            );
        }
        out
    }
}

/// Reads a table written by [`SweepTable::to_csv`].
pub fn parse_sweep_csv(text: &str, origin: &str) -> Result<Vec<SweepRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SWEEP_HEADER => {}
        _ => return Err(Error::parse(format!("{origin}:1"), format!("expected header {SWEEP_HEADER:?}"))),
    }
    let mut rows = Vec::new();
    for (k, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let at = format!("{origin}:{}", k + 1);
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 6 {
            return Err(Error::parse(at, "expected 6 comma-separated fields"));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.trim().parse().map_err(|_| Error::parse(&at, format!("bad {what} {s:?}")))
        };
        rows.push(SweepRow {
            fraction: num(f[0], "fraction")?,
            dimension: f[1].trim().parse().map_err(|_| Error::parse(&at, format!("bad d {:?}", f[1])))?,
            energy: num(f[2], "energy")?,
            residual: num(f[3], "residual")?,
            variance: if f[4].trim().is_empty() { None } else { Some(num(f[4], "variance")?) },
            converged: f[5].trim().parse().map_err(|_| Error::parse(&at, format!("bad flag {:?}", f[5])))?,
        });
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectorReport {
    pub n_alpha: usize,
    pub n_beta: usize,
    pub dimension: u64,
    pub hf_energy: f64,
    pub energies: BTreeMap<Solver, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<SampleSummary>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub source: String,
    pub shots: u64,
    pub distinct: usize,
    pub discarded_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub fractions: Vec<f64>,
    pub extsqd_threshold: f64,
    pub extsqd_levels: Vec<u8>,
    pub hci_epsilons: Vec<f64>,
    pub shots: u64,
    pub seed: u64,
    pub sector_seeds: BTreeMap<Sector, u64>,
    pub layers: usize,
    pub literal_2u: bool,
    pub spin_flip: bool,
    pub reference: ReferenceChoice,
}

/// Energies (eV) per sector and solver, and the gaps they imply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    pub kpoint: String,
    pub mode: InteractionMode,
    pub n_orbitals: usize,
    pub n_electrons: usize,
    pub sectors: BTreeMap<Sector, SectorReport>,
    pub gaps: BTreeMap<Solver, f64>,
    /// Hopping-only HOMO–LUMO gap; absent for odd `N_e`.
    pub tight_binding_gap: Option<f64>,
    /// `gap[a] − gap[b]` keyed `"a-b"`.
    pub gap_deltas: BTreeMap<String, f64>,
    /// Cause of each failed solver run, keyed `"solver/sector"`.
    pub failures: BTreeMap<String, String>,
    pub settings: ReportSettings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct WorkflowOutput {
    pub report: GapReport,
    pub tables: Vec<SweepTable>,
    /// Lattice after interaction-mode zeroing.
    pub lattice: LatticeHamiltonian,
    pub timings: Vec<StageTiming>,
    /// Categories of the recorded failures.
    pub failure_categories: Vec<ErrorCategory>,
}

impl WorkflowOutput {
    pub fn succeeded(&self) -> bool {
        self.report.failures.is_empty()
    }
}

/// Zeroes the interaction terms the mode excludes.
pub fn apply_mode(lat: &LatticeHamiltonian, mode: InteractionMode) -> LatticeHamiltonian {
    let mut out = lat.clone();
    if !mode.keeps_u() {
        out = out.without_u();
    }
    if !mode.keeps_v() {
        out = out.without_v();
    }
    out
}

struct Clock(Vec<StageTiming>);

impl Clock {
    fn time<T>(&mut self, stage: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.0.push(StageTiming {
            stage: stage.into(),
            seconds: t.elapsed().as_secs_f64(),
        });
        out
    }
}

struct SectorContext {
    sector: Sector,
    spec: SectorSpec,
    mf: MeanFieldSolution,
    mo: ElectronicIntegrals,
}

fn simulate_samples(
    t2: &T2Amplitudes,
    ctx: &SectorContext,
    cfg: &WorkflowConfig,
    seed: u64,
) -> Result<SampleSet> {
    let params = lucj_from_t2(t2, cfg.layers, &ConnectivityMask::local(ctx.spec.n_orbitals))?;
    let state = build_state(&params, &ctx.mf.reference, ctx.spec, DEFAULT_STATE_CAP)?;
    sample(&state, cfg.shots, seed)
}

fn require_converged(r: &GroundStateResult, what: &str) -> Result<()> {
    if r.converged {
        Ok(())
    } else {
        Err(Error::NonConvergence(format!(
            "{what}: eigensolver residual {:.3e} above tolerance",
            r.residual_norm
        )))
    }
}

/// Runs the configured solvers on the lattice named in `cfg`.
pub fn run_workflow(cfg: &WorkflowConfig) -> Result<WorkflowOutput> {
    let lattice = load_lattice(&cfg.lattice_path)?;
    run_workflow_on(cfg, &lattice)
}

/// Runs the configured solvers on an in-memory lattice; `cfg.lattice_path`
/// is ignored.
pub fn run_workflow_on(cfg: &WorkflowConfig, lattice: &LatticeHamiltonian) -> Result<WorkflowOutput> {
    cfg.validate()?;
    let mut clock = Clock(Vec::new());
    let lattice = apply_mode(lattice, cfg.mode);
    let conv = if cfg.literal_2u {
        OnSiteConvention::Literal2U
    } else {
        OnSiteConvention::Hamiltonian
    };
    let ints = map_to_electronic(&lattice, conv)?;
    let m = lattice.n_orbitals();
    let specs = sector_specs(m, cfg.n_electrons, cfg.spin_flip)?;
    let dopts = DavidsonOptions {
        tol: cfg.davidson_tol,
        ..Default::default()
    };
    let mf_opts = MeanFieldOptions::default();

    let neutral_mf = clock.time("mean_field/neutral", || solve_mean_field(&ints, specs[1], &mf_opts))?;
    let shared_mo = neutral_mf.mo_integrals(&ints)?;
    let mut contexts = Vec::with_capacity(3);
    for (sector, spec) in Sector::ALL.into_iter().zip(specs) {
        let (mf, mo) = match cfg.reference {
            ReferenceChoice::Shared => (neutral_mf.for_sector(&ints, spec)?, shared_mo.clone()),
            ReferenceChoice::PerSector if sector == Sector::Neutral => (neutral_mf.clone(), shared_mo.clone()),
            ReferenceChoice::PerSector => {
                let mf = clock.time(format!("mean_field/{sector}"), || solve_mean_field(&ints, spec, &mf_opts))?;
                let mo = mf.mo_integrals(&ints)?;
                (mf, mo)
            }
        };
        contexts.push(SectorContext { sector, spec, mf, mo });
    }

    let solvers: BTreeSet<Solver> = cfg.solvers.iter().copied().collect();
    let wants_samples = solvers.contains(&Solver::Sqd) || solvers.contains(&Solver::Extsqd);
    let sample_paths = [&cfg.samples_minus, &cfg.samples_neutral, &cfg.samples_plus];
    let needs_t2 = wants_samples && sample_paths.iter().any(|p| p.is_none());
    let t2: Result<T2Amplitudes> = if needs_t2 {
        clock.time("amplitudes", || Ok(mp2_doubles(&neutral_mf, &shared_mo)?.t2))
    } else {
        Ok(T2Amplitudes::zeros(m, 0))
    };

    let levels = ExcitationLevels::from_ranks(&cfg.extsqd_levels)?;
    let schedule = SelectionSchedule::new(cfg.hci_epsilons.clone(), cfg.hci_max_determinants)?;
    let mut sectors = BTreeMap::new();
    let mut tables = Vec::new();
    let mut failures = BTreeMap::new();
    let mut categories = Vec::new();
    let mut sector_seeds = BTreeMap::new();

    for ctx in &contexts {
        let sector = ctx.sector;
        let seed = cfg.seed.wrapping_add(sector.index() as u64);
        sector_seeds.insert(sector, seed);
        let mut report = SectorReport {
            n_alpha: ctx.spec.n_alpha,
            n_beta: ctx.spec.n_beta,
            dimension: ctx.spec.dimension().min(u64::MAX as u128) as u64,
            hf_energy: ctx.mf.hf_energy,
            energies: BTreeMap::new(),
            samples: None,
        };

        let samples: Option<Result<SampleSet>> = wants_samples.then(|| {
            clock.time(format!("samples/{sector}"), || {
                let (raw, source) = match sample_paths[sector.index()] {
                    Some(path) => (load_samples(path, &ctx.spec)?, path.display().to_string()),
                    None => {
                        let t2 = t2.as_ref().map_err(|e| Error::Numerical(format!("amplitudes unavailable: {e}")))?;
                        (simulate_samples(t2, ctx, cfg, seed)?, "simulated".to_string())
                    }
                };
                let (kept, discarded) = filter_samples(&raw, &ctx.spec)?;
                report.samples = Some(SampleSummary {
                    source,
                    shots: raw.shots,
                    distinct: kept.len(),
                    discarded_fraction: discarded,
                });
                Ok(kept)
            })
        });

        let mut sweep: Option<Result<Vec<SweepPoint>>> = None;
        for &solver in &solvers {
            let outcome: Result<(f64, Vec<SweepRow>)> = clock.time(format!("{solver}/{sector}"), || match solver {
                Solver::Fci => {
                    let mut r = fci_ground(ctx.spec, &ints, DEFAULT_FCI_CAP, &dopts)?;
                    require_converged(&r, "fci")?;
                    r.variance = energy_variance(&r, &ints).ok();
                    Ok((r.energy, vec![SweepRow::from_result(1.0, &r)]))
                }
                Solver::Hci => {
                    let stages = hci_ground(ctx.spec, &ctx.mo, &ctx.mf.reference, &schedule, &dopts)?;
                    let last = stages.last().expect("schedule is nonempty");
                    require_converged(&last.result, "hci")?;
                    let rows = stages.iter().map(|s| SweepRow::from_result(s.fraction, &s.result)).collect();
                    Ok((last.result.energy, rows))
                }
                Solver::Sqd | Solver::Extsqd => {
                    let points = sweep
                        .get_or_insert_with(|| {
                            let s = samples.as_ref().expect("samples requested").as_ref().map_err(clone_err)?;
                            sqd_sweep(s, ctx.spec, &ctx.mo, &cfg.fractions, &ctx.mf.reference, &dopts)
                        })
                        .as_ref()
                        .map_err(clone_err)?;
                    if solver == Solver::Sqd {
                        let last = points.last().expect("fractions nonempty");
                        require_converged(&last.result, "sqd")?;
                        let rows = points.iter().map(|p| SweepRow::from_result(p.fraction(), &p.result)).collect();
                        return Ok((last.result.energy, rows));
                    }
                    let mut rows: Vec<SweepRow> = Vec::with_capacity(points.len());
                    let mut prev: Option<(crate::sqd::SubspaceBasis, GroundStateResult)> = None;
                    for p in points {
                        let basis = extsqd_expand(&p.result, ctx.spec, cfg.extsqd_threshold, levels)?;
                        let result = match &prev {
                            Some((b, r)) if *b == basis => r.clone(),
                            _ => solve_subspace(&basis, &ctx.mo, &dopts)?,
                        };
                        rows.push(SweepRow::from_result(basis.fraction(), &result));
                        prev = Some((basis, result));
                    }
                    let (_, last) = prev.expect("fractions nonempty");
                    require_converged(&last, "extsqd")?;
                    Ok((last.energy, rows))
                }
            });
            match outcome {
                Ok((energy, rows)) => {
                    report.energies.insert(solver, energy);
                    tables.push(SweepTable { solver, sector, rows });
                }
                Err(e) => {
                    log::error!("{solver} failed in sector {sector}: {e}");
                    categories.push(e.category());
                    failures.insert(format!("{solver}/{sector}"), e.to_string());
                }
            }
        }
        sectors.insert(sector, report);
    }

    let mut gaps = BTreeMap::new();
    for &solver in &solvers {
        let e: Option<Vec<f64>> = Sector::ALL
            .iter()
            .map(|s| sectors[s].energies.get(&solver).copied())
            .collect();
        if let Some(e) = e {
            gaps.insert(solver, compute_gap(e[0], e[1], e[2]));
        }
    }
    let mut gap_deltas = BTreeMap::new();
    for (a, ga) in &gaps {
        for (b, gb) in &gaps {
            if a > b {
                gap_deltas.insert(format!("{a}-{b}"), ga - gb);
            }
        }
    }
    let tight_binding_gap = if cfg.n_electrons % 2 == 0 {
        Some(single_particle_gap(&lattice, cfg.n_electrons / 2)?)
    } else {
        None
    };

    let report = GapReport {
        material: cfg.material.clone(),
        kpoint: lattice.kpoint_label().to_string(),
        mode: cfg.mode,
        n_orbitals: m,
        n_electrons: cfg.n_electrons,
        sectors,
        gaps,
        tight_binding_gap,
        gap_deltas,
        failures,
        settings: ReportSettings {
            fractions: cfg.fractions.clone(),
            extsqd_threshold: cfg.extsqd_threshold,
            extsqd_levels: cfg.extsqd_levels.clone(),
            hci_epsilons: cfg.hci_epsilons.clone(),
            shots: cfg.shots,
            seed: cfg.seed,
            sector_seeds,
            layers: cfg.layers,
            literal_2u: cfg.literal_2u,
            spin_flip: cfg.spin_flip,
            reference: cfg.reference,
        },
    };
    Ok(WorkflowOutput {
        report,
        tables,
        lattice,
        timings: clock.0,
        failure_categories: categories,
    })
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::CapExceeded { what, size, cap } => Error::CapExceeded {
            what,
            size: *size,
            cap: *cap,
        },
        Error::NonConvergence(m) => Error::NonConvergence(m.clone()),
        Error::Numerical(m) => Error::Numerical(m.clone()),
        other => Error::InvalidInput(other.to_string()),
    }
}

pub const REPORT_FILE: &str = "report.json";

/// Writes `report.json` and one CSV per table into `dir`; returns the paths.
pub fn write_outputs(output: &WorkflowOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let report_path = dir.join(REPORT_FILE);
    let json = serde_json::to_string_pretty(&output.report)
        .map_err(|e| Error::InvalidInput(format!("cannot serialize report: {e}")))?;
    std::fs::write(&report_path, json + "\n").map_err(|e| Error::io(&report_path, e))?;
    written.push(report_path);
    for table in &output.tables {
        let path = dir.join(table.file_name());
        std::fs::write(&path, table.to_csv()).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
