//! Named figure-data generators.
//!
//! Each id maps to one distribution plot: a fixed scenario family and
//! parameter grid, exported as one CSV per curve plus a JSON sidecar
//! carrying every parameter, the seed, and the emitted file list, so a
//! run is reproducible from the sidecar alone. Closed-form curves have
//! columns `rho,density`; Monte-Carlo and representation-sampled curves
//! have `bin_center,empirical_density` over 100 equal bins on `[0, 1]`.
//!
//! Grid values a caption leaves open (K grids, contamination grids, the
//! loading exponents) are frozen here as documented defaults; `--override
//! N=...` rescales the array size and the grids that track it.

use std::path::PathBuf;

use serde_json::{json, Map, Value};
use snrloss_core::dist::{sample_iid_cgauss, RngStream};
use snrloss_core::filters::{Transform, Weight};
use snrloss_core::hermitian::{eigh, orth_complement, ComplexMatrix, HermitianMatrix};
use snrloss_core::law::{coef_a, pdf_rho, sample_rho, snr_opt, LossLaw};
use snrloss_core::scenario::{
    build_sigma, make_ger, make_mpdr, make_mvdr, make_student, make_surprise,
    make_wishart_mismatch, ula_steering, Interferer, Scenario,
};

use crate::mc::{self, emit_csv, ExperimentConfig, FilterSpec, Histogram, McError};

/// Every known figure id.
pub const FIGURE_IDS: [&str; 13] = [
    "fa_mvdr",
    "mpdr_K32",
    "ger_undernulled",
    "ger_mismatch",
    "general_mismatch",
    "student_vs_nu",
    "student_vs_K",
    "pa_mvdr_grid",
    "a_vs_psi",
    "ec_vs_K",
    "marzetta_R3",
    "marzetta_R4",
    "dl",
];

/// Default Monte-Carlo trial count per curve.
pub const DEFAULT_TRIALS: usize = 10_000;

/// Points in a closed-form density curve, placed at cell midpoints so
/// endpoint singularities of Beta-type densities are never evaluated.
const PDF_GRID: usize = 512;

#[derive(Debug, Clone)]
pub struct FigureRequest {
    pub id: String,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Trials per curve; defaults to [`DEFAULT_TRIALS`] (100 for the
    /// per-trial `a_vs_psi` figure).
    pub trials: Option<usize>,
    pub bins: usize,
    /// Array-size override; grids that track N rescale with it.
    pub n_override: Option<usize>,
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct FigureOutput {
    pub id: String,
    pub files: Vec<String>,
    pub sidecar: PathBuf,
}

pub fn run_figure(req: &FigureRequest) -> Result<FigureOutput, McError> {
    if !FIGURE_IDS.contains(&req.id.as_str()) {
        return Err(McError::Config(format!(
            "unknown figure id '{}'; known ids: {}",
            req.id,
            FIGURE_IDS.join(", ")
        )));
    }
    if req.bins == 0 {
        return Err(McError::Config("bins must be positive".into()));
    }
    std::fs::create_dir_all(&req.out_dir)?;
    let default_trials = if req.id == "a_vs_psi" {
        100
    } else {
        DEFAULT_TRIALS
    };
    let mut ctx = FigCtx {
        req,
        trials: req.trials.unwrap_or(default_trials),
        files: Vec::new(),
        params: Map::new(),
        curve: 0,
    };
    match req.id.as_str() {
        "fa_mvdr" => fig_fa_mvdr(&mut ctx)?,
        "mpdr_K32" => fig_mpdr(&mut ctx)?,
        "ger_undernulled" => fig_ger_undernulled(&mut ctx)?,
        "ger_mismatch" => fig_ger_mismatch(&mut ctx)?,
        "general_mismatch" => fig_general_mismatch(&mut ctx)?,
        "student_vs_nu" => fig_student_vs_nu(&mut ctx)?,
        "student_vs_K" => fig_student_vs_k(&mut ctx)?,
        "pa_mvdr_grid" => fig_pa_mvdr_grid(&mut ctx)?,
        "a_vs_psi" => fig_a_vs_psi(&mut ctx)?,
        "ec_vs_K" => fig_ec_vs_k(&mut ctx)?,
        "marzetta_R3" => fig_marzetta(&mut ctx, 3)?,
        "marzetta_R4" => fig_marzetta(&mut ctx, 4)?,
        "dl" => fig_dl(&mut ctx)?,
        _ => unreachable!("id checked against FIGURE_IDS"),
    }
    let sidecar = json!({
        "id": req.id,
        "version": env!("CARGO_PKG_VERSION"),
        "seed": req.seed,
        "trials": ctx.trials,
        "bins": req.bins,
        "n_override": req.n_override,
        "params": Value::Object(ctx.params),
        "files": ctx.files,
    });
    let sidecar_path = req.out_dir.join(format!("{}.json", req.id));
    let mut text = serde_json::to_string_pretty(&sidecar)?;
    text.push('\n');
    std::fs::write(&sidecar_path, text)?;
    Ok(FigureOutput {
        id: req.id.clone(),
        files: ctx.files,
        sidecar: sidecar_path,
    })
}

// ── Shared scaffolding ──────────────────────────────────────────────────

/// Splitmix-style per-curve seed derivation from the base seed.
fn mix_seed(base: u64, idx: u64) -> u64 {
    base.wrapping_add(idx.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Standard interferer table: two strong sources, a third for arrays
/// large enough to null it comfortably.
pub(crate) fn interferer_table(n: usize) -> Vec<Interferer> {
    let mut t = vec![
        Interferer {
            angle_deg: -12.0,
            power_db: 35.0,
        },
        Interferer {
            angle_deg: 9.0,
            power_db: 25.0,
        },
    ];
    if n >= 16 {
        t.push(Interferer {
            angle_deg: 25.0,
            power_db: 30.0,
        });
    }
    t
}

fn interferer_json(table: &[Interferer]) -> Value {
    Value::Array(
        table
            .iter()
            .map(|i| json!({ "angle_deg": i.angle_deg, "power_db": i.power_db }))
            .collect(),
    )
}

/// Interference covariance (unit noise floor), the interferer steering
/// matrix, and the look-direction signature.
pub(crate) fn array_setup(n: usize) -> Result<(HermitianMatrix, ComplexMatrix, Weight), McError> {
    let table = interferer_table(n);
    let (sigma, g) = build_sigma(n, &table, 1.0)?;
    let v = ula_steering(n, 0.0)?;
    Ok((sigma, g, v))
}

/// Sample-support grid {1.25N, 1.5N, 2N, 3N, 4N}, rounded down.
fn k_grid(n: usize) -> [usize; 5] {
    [(5 * n + 3) / 4, (3 * n + 1) / 2, 2 * n, 3 * n, 4 * n]
}

struct FigCtx<'a> {
    req: &'a FigureRequest,
    trials: usize,
    files: Vec<String>,
    params: Map<String, Value>,
    curve: u64,
}

impl FigCtx<'_> {
    fn n(&self, default: usize) -> usize {
        self.req.n_override.unwrap_or(default)
    }

    fn next_seed(&mut self) -> u64 {
        self.curve += 1;
        mix_seed(self.req.seed, self.curve)
    }

    fn param(&mut self, key: &str, value: Value) {
        self.params.insert(key.to_string(), value);
    }

    fn write_curve(
        &mut self,
        name: String,
        header: &str,
        rows: &[Vec<f64>],
    ) -> Result<(), McError> {
        std::fs::write(self.req.out_dir.join(&name), emit_csv(header, rows))?;
        self.files.push(name);
        Ok(())
    }

    /// Closed-form density curve sampled at [`PDF_GRID`] midpoints of the
    /// law's support.
    fn pdf_curve(&mut self, curve: &str, law: &LossLaw) -> Result<(), McError> {
        let support = law.support_max();
        let mut rows = Vec::with_capacity(PDF_GRID);
        for i in 0..PDF_GRID {
            let rho = support * (i as f64 + 0.5) / PDF_GRID as f64;
            rows.push(vec![rho, pdf_rho(rho, law)?]);
        }
        self.write_curve(
            format!("{}_{curve}_pdf.csv", self.req.id),
            "rho,density",
            &rows,
        )
    }

    fn density_rows(histogram: &Histogram, m: usize) -> Vec<Vec<f64>> {
        histogram
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let (left, right) = histogram.bin_edges(i);
                vec![
                    (left + right) / 2.0,
                    c as f64 * histogram.bins as f64 / m as f64,
                ]
            })
            .collect()
    }

    /// Direct-simulation curve: full training-and-filter Monte-Carlo.
    fn mc_curve(
        &mut self,
        curve: &str,
        scenario: &Scenario,
        filter: FilterSpec,
        k: usize,
    ) -> Result<(), McError> {
        let config = ExperimentConfig {
            scenario: scenario.clone(),
            filter,
            trials: self.trials,
            k,
            seed: self.next_seed(),
            bins: self.req.bins,
            moments: true,
            ks_targets: vec![],
        };
        let result = mc::run_experiment(&config, self.req.threads)?;
        let rows = Self::density_rows(&result.histogram, self.trials);
        self.write_curve(
            format!("{}_{curve}_mc.csv", self.req.id),
            "bin_center,empirical_density",
            &rows,
        )
    }

    /// Stochastic-representation curve: direct draws from the law.
    fn rep_curve(&mut self, curve: &str, law: &LossLaw) -> Result<(), McError> {
        let mut rng = RngStream::new(self.next_seed(), 0);
        let mut losses = Vec::with_capacity(self.trials);
        for _ in 0..self.trials {
            losses.push(sample_rho(&mut rng, law)?);
        }
        let histogram = Histogram::tally(self.req.bins, &losses);
        let rows = Self::density_rows(&histogram, self.trials);
        self.write_curve(
            format!("{}_{curve}_rep.csv", self.req.id),
            "bin_center,empirical_density",
            &rows,
        )
    }
}

// ── Figure builders ─────────────────────────────────────────────────────

/// Matched training at varying sample support: closed density plus
/// simulation for each K.
fn fig_fa_mvdr(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let (sigma, _, v) = array_setup(n)?;
    let grid = k_grid(n);
    for &k in &grid {
        let curve = format!("K{k}");
        ctx.pdf_curve(&curve, &LossLaw::mvdr(n, k)?)?;
        let scenario = make_mvdr(sigma.clone(), v.clone())?;
        ctx.mc_curve(&curve, &scenario, FilterSpec::Smi, k)?;
    }
    ctx.param("N", json!(n));
    ctx.param("K_grid", json!(grid));
    ctx.param("interferers", interferer_json(&interferer_table(n)));
    Ok(())
}

/// Signal-contaminated training at K = 2N over a contamination grid
/// `s = SNR_opt / gamma`.
fn fig_mpdr(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let k = 2 * n;
    let (sigma, _, v) = array_setup(n)?;
    let opt_quad = snr_opt(&sigma, &v, 1.0)?;
    let s_grid = [0.0, 10.0, 100.0];
    for &s in &s_grid {
        let soi_power = s / opt_quad;
        let scenario = make_mpdr(sigma.clone(), v.clone(), soi_power, 1.0)?;
        let curve = format!("s{}", s as u64);
        ctx.pdf_curve(&curve, &LossLaw::mpdr(n, k, s)?)?;
        ctx.mc_curve(&curve, &scenario, FilterSpec::Smi, k)?;
    }
    ctx.param("N", json!(n));
    ctx.param("K", json!(k));
    ctx.param("s_grid", json!(s_grid));
    ctx.param("gamma", json!(1.0));
    ctx.param("interferers", interferer_json(&interferer_table(n)));
    Ok(())
}

/// An interferer the training never saw, at increasing strength. No
/// closed density exists, so both curves are sampled: representation
/// draws against full simulation.
fn fig_ger_undernulled(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let k = 2 * n;
    let (ct, _, v) = array_setup(n)?;
    let q_angle_deg = 17.0;
    let db_grid = [0.0, 10.0, 20.0];
    let mut achieved = Vec::new();
    for &db in &db_grid {
        let scenario = make_surprise(ct.clone(), v.clone(), q_angle_deg, db)?;
        let law = mc::matched_law(&scenario, k)?;
        let curve = format!("q{}db", db as i64);
        ctx.rep_curve(&curve, &law)?;
        ctx.mc_curve(&curve, &scenario, FilterSpec::Smi, k)?;
        achieved.push(json!({ "q_power_db": db, "q_form": scenario.extras.q_form }));
    }
    ctx.param("N", json!(n));
    ctx.param("K", json!(k));
    ctx.param("q_angle_deg", json!(q_angle_deg));
    ctx.param("q_power_db_grid", json!(db_grid));
    ctx.param("achieved", Value::Array(achieved));
    Ok(())
}

/// Five random training covariances tied to the true one by the
/// generalized eigenvalue relation, against the matched-training
/// reference density.
fn fig_ger_mismatch(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let k = 2 * n;
    let (sigma, _, v) = array_setup(n)?;
    ctx.pdf_curve("mvdr", &LossLaw::mvdr(n, k)?)?;
    let strength = 1.0;
    for i in 1..=5 {
        let mut rng = RngStream::new(ctx.next_seed(), 0);
        let scenario = make_ger(sigma.clone(), v.clone(), &mut rng, strength)?;
        let law = mc::matched_law(&scenario, k)?;
        let curve = format!("draw{i}");
        ctx.rep_curve(&curve, &law)?;
        ctx.mc_curve(&curve, &scenario, FilterSpec::Smi, k)?;
    }
    ctx.param("N", json!(n));
    ctx.param("K", json!(k));
    ctx.param("draws", json!(5));
    ctx.param("strength", json!(strength));
    Ok(())
}

/// Five random inverse-Wishart training covariances with mean scale eta
/// drawn uniformly in dB.
fn fig_general_mismatch(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let k = 2 * n;
    let dof = 2 * n;
    let eta_db_range = (-6.0, 6.0);
    let (sigma, _, v) = array_setup(n)?;
    let mut etas = Vec::new();
    for i in 1..=5 {
        let mut rng = RngStream::new(ctx.next_seed(), 0);
        let scenario =
            make_wishart_mismatch(sigma.clone(), v.clone(), &mut rng, eta_db_range, dof)?;
        let law = mc::matched_law(&scenario, k)?;
        let curve = format!("draw{i}");
        ctx.rep_curve(&curve, &law)?;
        ctx.mc_curve(&curve, &scenario, FilterSpec::Smi, k)?;
        etas.push(json!(scenario.extras.eta));
    }
    ctx.param("N", json!(n));
    ctx.param("K", json!(k));
    ctx.param("dof", json!(dof));
    ctx.param("eta_db_range", json!([eta_db_range.0, eta_db_range.1]));
    ctx.param("achieved_eta", Value::Array(etas));
    Ok(())
}

/// Heavy-tailed training at K = 2N as the tail parameter grows toward
/// the Gaussian limit, with the matched-Gaussian reference.
fn fig_student_vs_nu(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let k = 2 * n;
    let (sigma, _, v) = array_setup(n)?;
    ctx.pdf_curve("mvdr", &LossLaw::mvdr(n, k)?)?;
    let nu_grid = [
        (n + 1) as f64,
        (n + 4) as f64,
        (2 * n) as f64,
        (4 * n) as f64,
    ];
    for &nu in &nu_grid {
        let curve = format!("nu{}", nu as u64);
        ctx.pdf_curve(&curve, &LossLaw::student(n, k, nu)?)?;
        let scenario = make_student(sigma.clone(), v.clone(), nu, None)?;
        ctx.mc_curve(&curve, &scenario, FilterSpec::Smi, k)?;
    }
    ctx.param("N", json!(n));
    ctx.param("K", json!(k));
    ctx.param("nu_grid", json!(nu_grid));
    Ok(())
}

/// Heavy-tailed training at fixed tail parameter over the K grid, each
/// with its matched-Gaussian reference.
fn fig_student_vs_k(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let nu = (2 * n) as f64;
    let (sigma, _, v) = array_setup(n)?;
    let grid = k_grid(n);
    for &k in &grid {
        let curve = format!("K{k}");
        ctx.pdf_curve(&curve, &LossLaw::student(n, k, nu)?)?;
        ctx.pdf_curve(&format!("K{k}_mvdr"), &LossLaw::mvdr(n, k)?)?;
        let scenario = make_student(sigma.clone(), v.clone(), nu, None)?;
        ctx.mc_curve(&curve, &scenario, FilterSpec::Smi, k)?;
    }
    ctx.param("N", json!(n));
    ctx.param("nu", json!(nu));
    ctx.param("K_grid", json!(grid));
    Ok(())
}

/// Reduced-rank loss densities over hypothetical energy fractions `a`,
/// on four (N, K, R) panels. Closed form only; the panels are pinned, so
/// the N override does not apply.
fn fig_pa_mvdr_grid(ctx: &mut FigCtx) -> Result<(), McError> {
    let panels = [(16, 16, 4), (16, 32, 4), (64, 64, 16), (64, 128, 16)];
    let a_grid = [0.5, 0.7, 0.9, 1.0];
    for &(n, k, r) in &panels {
        for &a in &a_grid {
            let curve = format!("N{n}K{k}R{r}_a{}", (a * 100.0) as u32);
            ctx.pdf_curve(&curve, &LossLaw::pa_mvdr(k, r, a)?)?;
        }
    }
    ctx.param(
        "panels_nkr",
        json!(panels
            .iter()
            .map(|&(n, k, r)| [n, k, r])
            .collect::<Vec<_>>()),
    );
    ctx.param("a_grid", json!(a_grid));
    Ok(())
}

/// Reachable energy fraction per trial: random blocking-space mixers
/// against one aligned with the interference subspace. Columns are
/// `trial,a` (this figure plots realizations, not a density).
fn fig_a_vs_psi(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let (sigma, g, v) = array_setup(n)?;
    let r = g.cols();
    let vperp = orth_complement(&v).map_err(|e| McError::Config(format!("complement: {e}")))?;
    let aligned_psi = vperp.adjoint().mul(&g);
    let gsc = |psi: &ComplexMatrix| {
        Transform::gsc(&v, psi).map_err(|e| McError::Config(format!("transform: {e}")))
    };
    let a_aligned = coef_a(&gsc(&aligned_psi)?, &sigma, &v)?;
    let mut rng = RngStream::new(ctx.next_seed(), 0);
    let mut random_rows = Vec::with_capacity(ctx.trials);
    let mut aligned_rows = Vec::with_capacity(ctx.trials);
    for trial in 0..ctx.trials {
        let psi = sample_iid_cgauss(&mut rng, n - 1, r);
        let a = coef_a(&gsc(&psi)?, &sigma, &v)?;
        random_rows.push(vec![trial as f64, a]);
        aligned_rows.push(vec![trial as f64, a_aligned]);
    }
    let id = ctx.req.id.clone();
    ctx.write_curve(format!("{id}_random_values.csv"), "trial,a", &random_rows)?;
    ctx.write_curve(format!("{id}_aligned_values.csv"), "trial,a", &aligned_rows)?;
    ctx.param("N", json!(n));
    ctx.param("R", json!(r));
    ctx.param("a_aligned", json!(a_aligned));
    Ok(())
}

/// Eigencanceler losses over K against the reduced-rank Beta
/// approximation.
fn fig_ec_vs_k(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let r = 3;
    let (sigma, _, v) = array_setup(n)?;
    let grid = [6, 16, 32];
    for &k in &grid {
        let curve = format!("K{k}");
        ctx.pdf_curve(&curve, &LossLaw::ec_approx(k, r)?)?;
        let scenario = make_mvdr(sigma.clone(), v.clone())?;
        ctx.mc_curve(&curve, &scenario, FilterSpec::Eigencanceler { r }, k)?;
    }
    ctx.param("N", json!(n));
    ctx.param("R", json!(r));
    ctx.param("K_grid", json!(grid));
    Ok(())
}

/// Random-mixer rank-R filter averaged over L mixers at tiny sample
/// support, against the eigencanceler approximation.
fn fig_marzetta(ctx: &mut FigCtx, r: usize) -> Result<(), McError> {
    let n = ctx.n(16);
    let k = 6;
    let l = 10;
    let (sigma, _, v) = array_setup(n)?;
    ctx.pdf_curve("ec", &LossLaw::ec_approx(k, r)?)?;
    let scenario = make_mvdr(sigma, v)?;
    ctx.mc_curve(
        &format!("L{l}"),
        &scenario,
        FilterSpec::Marzetta { r, l },
        k,
    )?;
    ctx.param("N", json!(n));
    ctx.param("K", json!(k));
    ctx.param("R", json!(r));
    ctx.param("L", json!(l));
    Ok(())
}

/// Diagonal loading at tiny sample support with the loading level swept
/// geometrically between the noise floor and the smallest interference
/// eigenvalue: `K mu = gamma (lambda_R / gamma)^t`.
fn fig_dl(ctx: &mut FigCtx) -> Result<(), McError> {
    let n = ctx.n(16);
    let k = 6;
    let r = 3.min(interferer_table(n).len());
    let (sigma, _, v) = array_setup(n)?;
    let dec = eigh(&sigma).map_err(|e| McError::Config(format!("eigh: {e}")))?;
    let lambda_r = dec.values[r - 1];
    ctx.pdf_curve("ref", &LossLaw::dl_approx(k, r)?)?;
    let t_grid = [0.25, 0.5, 0.75];
    let mut kmu_values = Vec::new();
    for &t in &t_grid {
        let kmu = lambda_r.powf(t);
        let mu = kmu / k as f64;
        let scenario = make_mvdr(sigma.clone(), v.clone())?;
        ctx.mc_curve(
            &format!("t{}", (t * 100.0) as u32),
            &scenario,
            FilterSpec::DiagonalLoading { mu },
            k,
        )?;
        kmu_values.push(json!(kmu));
    }
    ctx.param("N", json!(n));
    ctx.param("K", json!(k));
    ctx.param("R", json!(r));
    ctx.param("lambda_R", json!(lambda_r));
    ctx.param("t_grid", json!(t_grid));
    ctx.param(
        "kmu_rule",
        json!("gamma * (lambda_R / gamma)^t at gamma = 1"),
    );
    ctx.param("kmu_values", Value::Array(kmu_values));
    Ok(())
}

// ── Tests ───────────────────────────────────────────────────────────────
