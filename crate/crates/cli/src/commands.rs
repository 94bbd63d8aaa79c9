use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use nldr::diagnostics::{
    equivalence_hlle_ltsa, interior_bias_scaling, penalty_fidelity, penalty_nullspace_contrast, spectrum_compare,
    DiagnosticsReport, PenaltyCurve, PenaltyFamily, TestFunction,
};
use nldr::experiments::{
    boundary_table_experiment, fig1, fig2, fig3, lattice_ladder, random_ladder, BoundaryTableConfig, SEGMENT_METHODS,
};
use nldr::io::{write_cloud, write_columns, write_embedding, write_json, write_operator};
use nldr::{
    build_graph, build_operator, embed, sample_manifold, BiasOperator, Kernel, ManifoldKind, ManifoldSpec, Method,
    NeighborhoodMode, OperatorParams, Ridge, SampleCloud, SolverOptions,
};

use crate::config::Config;
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

/// A report with the hash of the configuration that produced it.
#[derive(Serialize)]
struct Stamped<'a, T: Serialize> {
    config_hash: &'a str,
    #[serde(flatten)]
    report: &'a T,
}

pub struct Run {
    cfg: Config,
    hash: String,
    out: PathBuf,
}

impl Run {
    pub fn new(command: &str, cfg: Config) -> Result<Self> {
        let hash = cfg.hash(command);
        let out = cfg.out_dir();
        fs::create_dir_all(&out).map_err(|e| CliError::Io(format!("cannot create {}: {e}", out.display())))?;
        let run = Self { cfg, hash, out };
        run.json("config.json", &run.cfg)?;
        Ok(run)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> Result<()> {
        Ok(write_json(&Stamped { config_hash: &self.hash, report: value }, &self.path(name))?)
    }

    fn seed(&self) -> u64 {
        self.cfg.seed.unwrap_or(0)
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions { seed: self.seed(), ..SolverOptions::default() }
    }

    fn method(&self) -> Result<Method> {
        let name = self.cfg.method.as_deref().ok_or_else(|| CliError::Validation("--method is required".into()))?;
        Ok(name.parse()?)
    }

    fn spec(&self, fallback: ManifoldSpec) -> Result<ManifoldSpec> {
        let mut spec = match &self.cfg.manifold {
            Some(name) => ManifoldSpec::default_for(name.parse::<ManifoldKind>()?),
            None => fallback,
        };
        if let Some(r) = self.cfg.hole_radius {
            if spec.kind != ManifoldKind::SwissRollHole {
                return Err(CliError::Validation("--hole-radius applies only to swiss_roll_hole".into()));
            }
            spec = spec.with_param("hole_radius", r);
        }
        spec.validate()?;
        Ok(spec)
    }

    fn sample(&self, fallback: ManifoldSpec, n: usize) -> Result<SampleCloud> {
        Ok(sample_manifold(&self.spec(fallback)?, self.cfg.n.unwrap_or(n), self.seed())?)
    }

    /// The cloud named by `--cloud`, or a fresh sample.
    fn cloud(&self, fallback: ManifoldSpec, n: usize) -> Result<SampleCloud> {
        match &self.cfg.cloud {
            Some(path) => Ok(nldr::io::read_cloud(path)?),
            None => self.sample(fallback, n),
        }
    }

    fn mode(&self, default_h: f64) -> Result<NeighborhoodMode> {
        match (self.cfg.h, self.cfg.k) {
            (Some(_), Some(_)) => Err(CliError::Validation("give either --h or --k, not both".into())),
            (_, Some(k)) => Ok(NeighborhoodMode::Knn { k }),
            (h, None) => Ok(NeighborhoodMode::HBall { h: h.unwrap_or(default_h) }),
        }
    }

    fn h(&self, default: f64) -> Result<f64> {
        if self.cfg.k.is_some() {
            return Err(CliError::Validation("this command uses h-ball neighborhoods; give --h".into()));
        }
        Ok(self.cfg.h.unwrap_or(default))
    }

    fn operator(&self, cloud: &SampleCloud) -> Result<BiasOperator> {
        let graph = build_graph(cloud, self.mode(0.1)?)?;
        let mut params = OperatorParams::new(cloud.intrinsic_dim());
        if let Some(l) = self.cfg.lambda {
            params.ridge = Ridge::Relative(l);
        }
        if let Some(width) = self.cfg.kernel_width {
            params.kernel = Some(Kernel::Gaussian { width });
        }
        Ok(build_operator(self.method()?, cloud, &graph, &params)?)
    }
}

pub fn generate(run: &Run) -> Result<()> {
    let cloud = run.sample(ManifoldSpec::segment(0.0, 1.0), 1000)?;
    write_cloud(&cloud, &run.path("cloud.csv"), Some(&run.hash))?;
    Ok(())
}

pub fn operator(run: &Run) -> Result<()> {
    let cloud = run.cloud(ManifoldSpec::segment(0.0, 1.0), 1000)?;
    let op = run.operator(&cloud)?;
    write_operator(&op, &run.path("coo.csv"), &run.path("meta.json"), Some(&run.hash))?;
    Ok(())
}

pub fn embed_cmd(run: &Run) -> Result<()> {
    let cloud = run.cloud(ManifoldSpec::segment(0.0, 1.0), 1000)?;
    let op = run.operator(&cloud)?;
    let e = embed(&op, run.cfg.p.unwrap_or(2), true, &run.solver())?;
    write_embedding(&e, &run.path("embedding.csv"), &run.path("embedding.json"), Some(&run.hash))?;
    Ok(())
}

pub const CHECKS: [&str; 6] = ["boundary_table", "spectrum", "penalty", "equivalence", "scaling", "nullspace_contrast"];

pub fn diagnose(run: &Run) -> Result<()> {
    let check = run.cfg.check.as_deref().ok_or_else(|| {
        CliError::Validation(format!("--check is required, one of {}", CHECKS.join(", ")))
    })?;
    let report = match check {
        "boundary_table" => DiagnosticsReport::BoundaryTable(boundary_table_experiment(&table_config(run)?, &run.solver())?),
        "spectrum" => {
            let cloud = run.cloud(ManifoldSpec::segment(0.0, 1.0), 1000)?;
            let methods = match run.cfg.method {
                Some(_) => vec![run.method()?],
                None => SEGMENT_METHODS.to_vec(),
            };
            let h = run.h(0.05)?;
            DiagnosticsReport::Spectrum(spectrum_compare(&cloud, &methods, run.cfg.p.unwrap_or(5), h, &run.solver())?)
        }
        "penalty" => {
            let cloud = run.cloud(ManifoldSpec::segment(-1.0, 1.0), 2000)?;
            let h = run.h(0.05)?;
            let pow = penalty_fidelity(&cloud, &SEGMENT_METHODS, PenaltyFamily::SignedPower, h)?;
            run.json("penalty_cosine.json", &penalty_fidelity(&cloud, &SEGMENT_METHODS, PenaltyFamily::Cosine, h)?)?;
            DiagnosticsReport::Penalty(pow)
        }
        "equivalence" => {
            let spec = run.spec(ManifoldSpec::rectangle(1.0, 0.625))?;
            let h = run.h(0.2)?;
            let ladder = random_ladder(&spec, &[h, h / 2.0, h / 4.0], run.cfg.n.unwrap_or(250), run.seed())?;
            DiagnosticsReport::Equivalence(equivalence_hlle_ltsa(&ladder, &TestFunction::default_set(spec.intrinsic_dim))?)
        }
        "scaling" => {
            let spec = run.spec(ManifoldSpec::segment(0.0, 1.0))?;
            let h = run.h(0.1)?;
            let ladder = lattice_ladder(&spec, &[h, h / 2.0, h / 4.0], 20.5)?;
            let method = match run.cfg.method {
                Some(_) => run.method()?,
                None => Method::LaplacianEigenmaps,
            };
            DiagnosticsReport::Scaling(interior_bias_scaling(&ladder, method, |u| u[0] * u[0])?)
        }
        "nullspace_contrast" => {
            let cloud = run.cloud(ManifoldSpec::rectangle(1.0, 0.625), 4000)?;
            DiagnosticsReport::NullspaceContrast(penalty_nullspace_contrast(&cloud, run.h(0.05)?)?)
        }
        other => {
            return Err(CliError::Validation(format!("unknown check '{other}', expected one of {}", CHECKS.join(", "))))
        }
    };
    run.json("report.json", &report)
}

fn table_config(run: &Run) -> Result<BoundaryTableConfig> {
    let mut t = BoundaryTableConfig { seed: run.seed(), ..BoundaryTableConfig::default() };
    if run.cfg.manifold.is_some() {
        let spec = run.spec(ManifoldSpec::rectangle(t.width, t.height))?;
        if spec.kind != ManifoldKind::Rectangle {
            return Err(CliError::Validation("the boundary table needs a rectangle".into()));
        }
        let bounds = spec.chart_bounds()?;
        t.width = bounds[0].1 - bounds[0].0;
        t.height = bounds[1].1 - bounds[1].0;
    }
    t.n = run.cfg.n.unwrap_or(t.n);
    t.h = run.h(t.h)?;
    t.eigenfunctions = run.cfg.p.unwrap_or(t.eigenfunctions);
    if run.cfg.method.is_some() {
        t.method = run.method()?;
    }
    Ok(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    BoundaryTable,
}

pub fn reproduce(run: &Run, figure: Figure) -> Result<()> {
    match figure {
        Figure::Fig1 => {
            let mode = match (run.cfg.h, run.cfg.k) {
                (None, None) => NeighborhoodMode::Knn { k: 10 },
                _ => run.mode(0.1)?,
            };
            let out = fig1(run.cfg.n.unwrap_or(2000), run.seed(), mode, &run.solver())?;
            write_cloud(&out.cloud, &run.path("cloud.csv"), Some(&run.hash))?;
            for e in &out.embeddings {
                let stem = format!("embedding_{}", e.method.name());
                write_embedding(e, &run.path(&format!("{stem}.csv")), &run.path(&format!("{stem}.json")), Some(&run.hash))?;
            }
            run.json("fig1.json", &out.report)
        }
        Figure::Fig2 => {
            let (cloud, report) =
                fig2(run.cfg.n.unwrap_or(1000), run.h(0.05)?, run.cfg.p.unwrap_or(5), run.seed(), &run.solver())?;
            let x: Vec<f64> = (0..cloud.len()).map(|i| cloud.intrinsic[(i, 0)]).collect();
            let mut names = vec!["x".to_string()];
            let mut cols = vec![x];
            for m in &report.methods {
                names.push(m.method.name().to_string());
                cols.push(m.bottom_vector.clone());
            }
            write_columns(&run.path("bottom_vectors.csv"), &names.iter().map(String::as_str).collect::<Vec<_>>(), &cols)?;
            run.json("fig2.json", &report)
        }
        Figure::Fig3 => {
            let (cos, pow) = fig3(run.cfg.n.unwrap_or(2000), run.h(0.05)?, run.seed())?;
            for (name, curve) in [("penalty_cosine", &cos), ("penalty_signed_power", &pow)] {
                penalty_csv(curve, &run.path(&format!("{name}.csv")))?;
                run.json(&format!("{name}.json"), curve)?;
            }
            Ok(())
        }
        Figure::BoundaryTable => {
            let table = boundary_table_experiment(&table_config(run)?, &run.solver())?;
            run.json("boundary_table.json", &table)
        }
    }
}

/// One row per function: index, truth, then the scaled penalty per method.
fn penalty_csv(curve: &PenaltyCurve, path: &Path) -> Result<()> {
    let mut names = vec!["j".to_string(), "truth".to_string()];
    let mut cols = vec![(0..curve.truth.len()).map(|j| j as f64).collect(), curve.truth.clone()];
    for (m, row) in curve.methods.iter().zip(&curve.empirical) {
        names.push(m.name().to_string());
        cols.push(row.clone());
    }
    write_columns(path, &names.iter().map(String::as_str).collect::<Vec<_>>(), &cols)?;
    Ok(())
}
