//! Run configuration: a TOML file, defaults for everything it omits, and
//! command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bie::MIN_PANELS;
use crate::contours::{MeshSpec, ProblemParams};
use crate::directivity::OeOptions;
use crate::error::{Error, Result};
use crate::linalg::{cx, Cx};
use crate::march::MarchOptions;
use crate::ode1::StepPolicy;
use crate::CaseSelection;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Oe,
    Bie,
    Compare,
}

impl Mode {
    pub fn runs_oe(self) -> bool {
        matches!(self, Mode::Oe | Mode::Compare)
    }

    pub fn runs_bie(self) -> bool {
        matches!(self, Mode::Bie | Mode::Compare)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    /// `Re(k0) a`.
    pub k0a: f64,
    /// `Im(k0) / Re(k0)`.
    pub k0_im_ratio: f64,
    pub a: f64,
    pub eta_re: f64,
    pub eta_im: f64,
    pub theta_inc_deg: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self { k0a: 8.0, k0_im_ratio: 1e-3, a: 1.0, eta_re: 1.0, eta_im: -0.25, theta_inc_deg: 30.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshConfig {
    pub n_gamma: usize,
    /// RK4 steps per contour edge when evaluating the ordered exponential.
    pub rk4_substeps: usize,
    /// RK4 steps per mesh segment inside the Riccati march.
    pub march_substeps: usize,
    pub n_panels: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { n_gamma: 200, rk4_substeps: 4, march_substeps: 1, n_panels: 256 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub n_theta: usize,
    pub delta_theta_deg: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n_theta: 181, delta_theta_deg: 3.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub tol_start: f64,
    /// Shore detour radius for residual diagnostics, relative to `min(|k0|, |b*|)`.
    pub eps_shore: f64,
    pub eps_deg: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_start: 1e-8, eps_shore: 0.05, eps_deg: 1e-10 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), format: Format::Csv }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub case: CaseSelection,
    pub params: ParamsConfig,
    pub mesh: MeshConfig,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Compare,
            case: CaseSelection::Total,
            params: ParamsConfig::default(),
            mesh: MeshConfig::default(),
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Values given on the command line; `None` keeps the file or default value.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub case: Option<CaseSelection>,
    pub k0a: Option<f64>,
    pub eta_re: Option<f64>,
    pub eta_im: Option<f64>,
    pub theta_inc_deg: Option<f64>,
    pub n_gamma: Option<usize>,
    pub n_panels: Option<usize>,
    pub n_theta: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
}

fn check(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(what.to_string()))
    }
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let c: Self = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let s = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&s)
    }

    /// The fully resolved configuration as TOML.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! set {
            ($src:ident => $($dst:tt)+) => {
                if let Some(v) = o.$src.clone() {
                    self.$($dst)+ = v;
                }
            };
        }
        set!(mode => mode);
        set!(case => case);
        set!(k0a => params.k0a);
        set!(eta_re => params.eta_re);
        set!(eta_im => params.eta_im);
        set!(theta_inc_deg => params.theta_inc_deg);
        set!(n_gamma => mesh.n_gamma);
        set!(n_panels => mesh.n_panels);
        set!(n_theta => grid.n_theta);
        set!(out => output.dir);
        set!(format => output.format);
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        check(p.k0a > 0.0 && p.k0a <= 200.0, "params.k0a must lie in (0, 200]")?;
        check((0.0..=1.0).contains(&p.k0_im_ratio), "params.k0_im_ratio must lie in [0, 1]")?;
        check(p.a > 0.0 && p.a.is_finite(), "params.a must be positive")?;
        check(p.eta_re.is_finite() && p.eta_im.is_finite(), "params.eta must be finite")?;
        check(p.eta_im <= 0.0, "params.eta_im must be <= 0")?;
        check(p.theta_inc_deg > 0.0 && p.theta_inc_deg < 180.0, "params.theta_inc_deg must lie in (0, 180)")?;
        if self.mode.runs_oe() {
            check(p.eta_re != 0.0 || p.eta_im != 0.0, "the OE method needs eta != 0")?;
        }
        let m = &self.mesh;
        check((20..=20_000).contains(&m.n_gamma), "mesh.n_gamma must lie in [20, 20000]")?;
        check((1..=1000).contains(&m.rk4_substeps), "mesh.rk4_substeps must lie in [1, 1000]")?;
        check((1..=100).contains(&m.march_substeps), "mesh.march_substeps must lie in [1, 100]")?;
        check((MIN_PANELS..=4096).contains(&m.n_panels), "mesh.n_panels must lie in [16, 4096]")?;
        let g = &self.grid;
        check((2..=100_000).contains(&g.n_theta), "grid.n_theta must lie in [2, 100000]")?;
        check(g.delta_theta_deg > 0.0 && g.delta_theta_deg < 90.0, "grid.delta_theta_deg must lie in (0, 90)")?;
        let t = &self.tolerances;
        check(t.tol_start > 0.0 && t.tol_start <= 1e-2, "tolerances.tol_start must lie in (0, 1e-2]")?;
        check(t.eps_shore > 0.0 && t.eps_shore <= 0.5, "tolerances.eps_shore must lie in (0, 0.5]")?;
        check(t.eps_deg > 0.0 && t.eps_deg <= 1e-2, "tolerances.eps_deg must lie in (0, 1e-2]")?;
        Ok(())
    }

    pub fn k0(&self) -> Cx {
        let re = self.params.k0a / self.params.a;
        cx(re, re * self.params.k0_im_ratio)
    }

    pub fn eta(&self) -> Cx {
        cx(self.params.eta_re, self.params.eta_im)
    }

    /// Physical parameters. The integral-equation route also accepts `eta = 0`.
    pub fn problem(&self) -> Result<ProblemParams> {
        let theta = self.params.theta_inc_deg.to_radians();
        if self.eta() == cx(0.0, 0.0) && !self.mode.runs_oe() {
            let base = ProblemParams::new(self.k0(), self.params.a, cx(1.0, 0.0), theta)?;
            return Ok(ProblemParams { eta: self.eta(), ..base });
        }
        ProblemParams::new(self.k0(), self.params.a, self.eta(), theta)
    }

    pub fn oe_options(&self) -> OeOptions {
        OeOptions {
            mesh: MeshSpec { n: self.mesh.n_gamma, tol_start: self.tolerances.tol_start, ..MeshSpec::default() },
            march: MarchOptions {
                substeps: self.mesh.march_substeps,
                eps_deg: self.tolerances.eps_deg,
                ..MarchOptions::default()
            },
            step: StepPolicy { substeps: self.mesh.rk4_substeps, ..StepPolicy::default() },
            ..OeOptions::default()
        }
    }

    pub fn theta_grid(&self) -> Result<Vec<f64>> {
        crate::directivity::theta_grid(self.grid.n_theta, self.grid.delta_theta_deg.to_radians())
    }
}
