//! Run configuration: one TOML file with a table per subcommand.
//!
//! Every key has a default, so an empty file is a valid config.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use magspec_core::branches::TraceSettings;
use magspec_core::ids::{Cutoff, CutoffSpec, IdsOptions, OracleSpec, SweepOptions};
use magspec_core::verify::VerifyConfig;
use magspec_core::{ModelParams, Potential};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Worker threads; `None` uses the available parallelism.
    pub workers: Option<usize>,
    pub out: PathBuf,
    /// Seed for randomized property checks. The current subcommands are
    /// deterministic, so it only enters the config hash.
    pub seed: u64,
    pub settings: TraceSettings,
    pub branch: BranchCfg,
    pub fit_kappa: FitKappaCfg,
    pub fit_decay: FitDecayCfg,
    pub zeros: ZerosCfg,
    pub perturb: PerturbCfg,
    pub ids: IdsCfg,
    pub weyl: IdsCfg,
    pub corr: CorrCfg,
    pub sweep: SweepCfg,
    pub oracle2d: Oracle2dCfg,
    pub verify: VerifyCfg,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            workers: None,
            out: PathBuf::from("out"),
            seed: 0,
            settings: TraceSettings::default(),
            branch: BranchCfg::default(),
            fit_kappa: FitKappaCfg::default(),
            fit_decay: FitDecayCfg::default(),
            zeros: ZerosCfg::default(),
            perturb: PerturbCfg::default(),
            ids: IdsCfg::default(),
            weyl: IdsCfg::default(),
            corr: CorrCfg::default(),
            sweep: SweepCfg::default(),
            oracle2d: Oracle2dCfg::default(),
            verify: VerifyCfg::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Uniform,
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EtaGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl EtaGrid {
    pub fn uniform(min: f64, max: f64, points: usize) -> Self {
        EtaGrid {
            min,
            max,
            points,
            spacing: Spacing::Uniform,
        }
    }

    pub fn geometric(min: f64, max: f64, points: usize) -> Self {
        EtaGrid {
            spacing: Spacing::Geometric,
            ..EtaGrid::uniform(min, max, points)
        }
    }

    pub fn points(&self) -> Vec<f64> {
        use magspec_core::branches::{geometric_grid, uniform_grid};
        match self.spacing {
            Spacing::Uniform => uniform_grid(self.min, self.max, self.points),
            Spacing::Geometric => geometric_grid(self.min, self.max, self.points),
        }
    }

    fn check(&self, what: &str) -> Result<()> {
        anyhow::ensure!(
            self.points >= 1,
            "{what}: eta grid needs at least one point"
        );
        anyhow::ensure!(
            self.min.is_finite() && self.max.is_finite() && self.min <= self.max,
            "{what}: eta range [{}, {}] is invalid",
            self.min,
            self.max
        );
        if self.spacing == Spacing::Geometric {
            anyhow::ensure!(self.min > 0.0, "{what}: geometric grid needs min > 0");
        }
        Ok(())
    }
}

impl Default for EtaGrid {
    fn default() -> Self {
        EtaGrid::uniform(-5.0, 5.0, 41)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BranchCfg {
    pub nu: u32,
    pub ell: u32,
    pub eta: EtaGrid,
    pub n_branches: usize,
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
}

impl Default for BranchCfg {
    fn default() -> Self {
        BranchCfg {
            nu: 2,
            ell: 1,
            eta: EtaGrid::default(),
            n_branches: 4,
            alpha: [0.0; 3],
            beta: [0.0; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitKappaCfg {
    pub cases: Vec<(u32, u32)>,
    pub eta: EtaGrid,
}

impl Default for FitKappaCfg {
    fn default() -> Self {
        FitKappaCfg {
            cases: vec![(2, 1), (2, 2), (3, 1), (4, 1)],
            eta: EtaGrid::geometric(1e2, 1e4, 9),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitDecayCfg {
    pub nu: u32,
    pub eta: EtaGrid,
}

impl Default for FitDecayCfg {
    fn default() -> Self {
        FitDecayCfg {
            nu: 2,
            eta: EtaGrid::uniform(4.0, 30.0, 27),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZerosCfg {
    pub nu: u32,
    pub ell: u32,
    pub eta: EtaGrid,
    pub n_branches: usize,
    /// Relative distance below which two crossings count as simultaneous.
    pub simultaneous_tol: f64,
}

impl Default for ZerosCfg {
    fn default() -> Self {
        ZerosCfg {
            nu: 2,
            ell: 2,
            eta: EtaGrid::uniform(-5.0, 40.0, 46),
            n_branches: 6,
            simultaneous_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbCfg {
    pub nu: Vec<u32>,
    pub ell: Vec<u32>,
}

impl Default for PerturbCfg {
    fn default() -> Self {
        PerturbCfg {
            nu: vec![2, 3, 4, 5],
            ell: vec![0, 1, 2, 3],
        }
    }
}

fn default_params() -> ModelParams {
    ModelParams::model(2, 1, 100.0, 0.1, Potential::constant(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdsCfg {
    pub params: ModelParams,
    pub psi: CutoffSpec,
    pub tau: f64,
    pub options: IdsOptions,
}

impl Default for IdsCfg {
    fn default() -> Self {
        IdsCfg {
            params: default_params(),
            psi: CutoffSpec::standard(),
            tau: 0.0,
            options: IdsOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrCfg {
    pub params: ModelParams,
    pub psi2: Cutoff,
    /// Half-width `R` of the `x₁` window.
    pub extent: f64,
    pub tau: f64,
    pub options: IdsOptions,
}

impl Default for CorrCfg {
    fn default() -> Self {
        CorrCfg {
            params: ModelParams::model(3, 0, 3000.0, 0.1, Potential::constant(1.0)),
            psi2: Cutoff::standard(),
            extent: 0.4,
            tau: 0.0,
            options: IdsOptions::default(),
        }
    }
}

/// Points `μ = coupling·h^{−ν}` for every pair of `coupling` and `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepCfg {
    pub nu: u32,
    pub ell: u32,
    pub w: Potential,
    pub coupling: Vec<f64>,
    pub h: Vec<f64>,
    pub tau: f64,
    pub options: SweepOptions,
}

impl Default for SweepCfg {
    fn default() -> Self {
        SweepCfg {
            nu: 2,
            ell: 1,
            w: Potential::constant(1.0),
            coupling: vec![1.0],
            h: vec![0.1, 0.05],
            tau: 0.0,
            options: SweepOptions::default(),
        }
    }
}

impl SweepCfg {
    pub fn params(&self) -> Vec<ModelParams> {
        let mut out = Vec::new();
        for &m in &self.coupling {
            for &h in &self.h {
                let mu = m * h.powi(-(self.nu as i32));
                out.push(ModelParams::model(self.nu, self.ell, mu, h, self.w.clone()));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Oracle2dCfg {
    pub params: ModelParams,
    /// Box in units of the magnetic length.
    pub domain: OracleSpec,
    pub tau: f64,
    /// Half-width of the spectral window used for the count interval.
    pub delta: f64,
}

impl Default for Oracle2dCfg {
    fn default() -> Self {
        Oracle2dCfg {
            params: default_params(),
            domain: OracleSpec::default(),
            tau: 0.0,
            delta: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct VerifyCfg {
    /// Criteria to run; all when empty.
    pub criteria: Vec<u32>,
    pub quick: bool,
    pub suite: VerifyConfig,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("parsing config")?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn check(&self) -> Result<()> {
        if let Some(w) = self.workers {
            anyhow::ensure!(w >= 1, "workers must be at least 1");
        }
        self.branch.eta.check("branch")?;
        self.fit_kappa.eta.check("fit_kappa")?;
        self.fit_decay.eta.check("fit_decay")?;
        self.zeros.eta.check("zeros")?;
        anyhow::ensure!(
            self.branch.n_branches >= 1,
            "branch: n_branches must be positive"
        );
        anyhow::ensure!(
            self.zeros.n_branches >= 1,
            "zeros: n_branches must be positive"
        );
        anyhow::ensure!(
            self.fit_decay.nu.is_multiple_of(2),
            "fit_decay: nu = {} must be even",
            self.fit_decay.nu
        );
        for c in &self.verify.criteria {
            anyhow::ensure!(
                magspec_core::verify::ALL.contains(c),
                "verify: no criterion {c}"
            );
        }
        Ok(())
    }

    /// SHA-256 over the canonical JSON form, without `workers` and `out`,
    /// which do not change results.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = None;
        c.out = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
    }

    #[test]
    fn nested_tables_and_exponents() {
        let c = RunConfig::parse(
            "[ids]\ntau = 2.5e-1\n[ids.params]\nnu = 3\nell = 0\nmu = 3.0e3\nh = 1e-1\nw = { kind = \"constant\", value = 1.0 }\n",
        )
        .unwrap();
        assert_eq!(c.ids.tau, 0.25);
        assert_eq!(c.ids.params.mu, 3000.0);
        assert_eq!(c.ids.params.nu, 3);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("bogus = 1").is_err());
        assert!(RunConfig::parse("[verify]\ncriteria = [12]").is_err());
    }

    #[test]
    fn hash_ignores_workers_and_out() {
        let a = RunConfig::default();
        let mut b = a.clone();
        b.workers = Some(7);
        b.out = "elsewhere".into();
        assert_eq!(a.hash(), b.hash());
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
