//! Run configuration: a JSON document, optionally overridden by flags, that
//! is resolved (every default filled in) before anything is computed.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use grushinlab_core::constants::{AssumptionParams, FreeConstants};
use grushinlab_core::control_sets::{self, DistributedSet, Placement, SetIndicator};
use grushinlab_core::potential::TabulatedProfile;
use grushinlab_core::{
    make_power_potential, make_table_potential, Assumption, Boundary, EigenRequest, Grid, GrowthParams, PotentialField, PotentialSpec,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandName {
    Constants,
    Eigs,
    Sets,
    Audit,
    Grushin,
    Control,
    ScanR,
    PhaseDiagram,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AuditKind {
    SpectralIneq,
    Localization,
    Weighted,
    Caccioppoli,
    Lift,
    Observability,
    Control,
}

impl AuditKind {
    pub const ALL: [AuditKind; 7] = [
        AuditKind::SpectralIneq,
        AuditKind::Localization,
        AuditKind::Weighted,
        AuditKind::Caccioppoli,
        AuditKind::Lift,
        AuditKind::Observability,
        AuditKind::Control,
    ];

    pub fn parse(s: &str) -> anyhow::Result<Self> {
        Ok(match s {
            "spectral-ineq" => AuditKind::SpectralIneq,
            "localization" => AuditKind::Localization,
            "weighted" => AuditKind::Weighted,
            "caccioppoli" => AuditKind::Caccioppoli,
            "lift" => AuditKind::Lift,
            "observability" => AuditKind::Observability,
            "control" => AuditKind::Control,
            other => bail!("unknown audit `{other}` (expected one of spectral-ineq, localization, weighted, caccioppoli, lift, observability, control)"),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    /// `c|x|^β`.
    Power {
        #[serde(default = "one")]
        c: f64,
        beta: f64,
    },
    /// Two-column CSV `abscissa,value`; `#` starts a comment.
    Table {
        path: PathBuf,
        c1: f64,
        c2: f64,
        beta1: f64,
        beta2: f64,
        assumption: Assumption,
    },
    Zero,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Power { c: 1.0, beta: 2.0 }
    }
}

impl PotentialConfig {
    /// `power:BETA[:C]`, `table:PATH` or `zero`. Table growth parameters come
    /// from the assumption overrides.
    pub fn parse(s: &str, a: &AssumptionConfig) -> anyhow::Result<Self> {
        let mut parts = s.splitn(2, ':');
        let head = parts.next().unwrap_or_default();
        let rest = parts.next();
        match (head, rest) {
            ("zero", None) => Ok(PotentialConfig::Zero),
            ("power", Some(rest)) => {
                let mut it = rest.split(':');
                let beta = it.next().unwrap_or_default().parse::<f64>().with_context(|| format!("bad exponent in `{s}`"))?;
                let c = match it.next() {
                    Some(c) => c.parse::<f64>().with_context(|| format!("bad coefficient in `{s}`"))?,
                    None => 1.0,
                };
                if it.next().is_some() {
                    bail!("expected power:BETA[:C], got `{s}`");
                }
                Ok(PotentialConfig::Power { c, beta })
            }
            ("table", Some(path)) => {
                let need = |v: Option<f64>, name: &str| v.with_context(|| format!("a table potential needs --{name}"));
                let beta1 = need(a.beta1, "beta1")?;
                Ok(PotentialConfig::Table {
                    path: PathBuf::from(path),
                    c1: need(a.c1, "c1")?,
                    c2: need(a.c2, "c2")?,
                    beta1,
                    beta2: a.beta2.unwrap_or(beta1),
                    assumption: a.assumption.context("a table potential needs --assumption")?,
                })
            }
            _ => bail!("expected power:BETA[:C], table:PATH or zero, got `{s}`"),
        }
    }

    pub fn build(&self, dim: usize) -> anyhow::Result<Potential> {
        Ok(match self {
            PotentialConfig::Power { c, beta } => Potential::Spec(make_power_potential(*c, *beta, dim)?),
            PotentialConfig::Table { path, c1, c2, beta1, beta2, assumption } => {
                let profile = TabulatedProfile::new(read_table(path)?)?;
                let growth = GrowthParams::new(*c1, *c2, *beta1, *beta2)?;
                Potential::Spec(make_table_potential(profile, dim, growth, *assumption)?)
            }
            PotentialConfig::Zero => Potential::Zero(dim),
        })
    }

    /// Assumption data implied by the potential, if it has any.
    fn growth(&self) -> Option<(Assumption, GrowthParams)> {
        match self {
            PotentialConfig::Power { c, beta } => make_power_potential(*c, *beta, 1).ok().map(|p| (p.assumption(), p.params())),
            PotentialConfig::Table { c1, c2, beta1, beta2, assumption, .. } => {
                Some((*assumption, GrowthParams { c1: *c1, c2: *c2, beta1: *beta1, beta2: *beta2 }))
            }
            PotentialConfig::Zero => None,
        }
    }
}

fn one() -> f64 {
    1.0
}

pub fn read_table(path: &Path) -> anyhow::Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("cannot read potential table {}", path.display()))?;
    let mut out = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != 2 {
            bail!("{}: row {} has {} columns, expected 2", path.display(), line + 1, rec.len());
        }
        let x: f64 = rec[0].parse().with_context(|| format!("{}: row {}", path.display(), line + 1))?;
        let v: f64 = rec[1].parse().with_context(|| format!("{}: row {}", path.display(), line + 1))?;
        out.push((x, v));
    }
    Ok(out)
}

/// SHA-256 of a file, hex encoded.
pub fn file_digest(path: &Path) -> anyhow::Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}

/// A built potential.
pub enum Potential {
    Spec(PotentialSpec),
    Zero(usize),
}

impl PotentialField for Potential {
    fn dim(&self) -> usize {
        match self {
            Potential::Spec(p) => p.dim(),
            Potential::Zero(d) => *d,
        }
    }
    fn value(&self, x: &[f64]) -> f64 {
        match self {
            Potential::Spec(p) => p.evaluate(x),
            Potential::Zero(_) => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub dim: usize,
    pub halfwidth: f64,
    pub points: usize,
    pub boundary: Boundary,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { dim: 1, halfwidth: 10.0, points: 400, boundary: Boundary::Dirichlet }
    }
}

impl GridConfig {
    pub fn build(&self) -> anyhow::Result<Grid> {
        Ok(Grid::new(self.dim, self.halfwidth, self.points, self.boundary)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SetKind {
    Full,
    Empty,
    Equidistributed,
    Distributed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlacementKind {
    CellCenter,
    SeededRandom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetConfig {
    pub kind: SetKind,
    pub gamma: f64,
    pub sigma: f64,
    pub placement: PlacementKind,
    /// Defaults to the grid halfwidth.
    pub box_halfwidth: Option<f64>,
}

impl Default for SetConfig {
    fn default() -> Self {
        Self { kind: SetKind::Equidistributed, gamma: 0.2, sigma: 0.0, placement: PlacementKind::CellCenter, box_halfwidth: None }
    }
}

/// A control set realized on a grid.
pub struct BuiltSet {
    pub set: Option<DistributedSet>,
    pub indicator: SetIndicator,
}

impl SetConfig {
    pub fn build(&self, grid: &Grid, seed: u64) -> anyhow::Result<BuiltSet> {
        let placement = match self.placement {
            PlacementKind::CellCenter => Placement::CellCenter,
            PlacementKind::SeededRandom => Placement::SeededRandom { seed },
        };
        let bw = self.box_halfwidth.unwrap_or(grid.halfwidth);
        let set = match self.kind {
            SetKind::Full => None,
            SetKind::Empty => None,
            SetKind::Equidistributed => Some(control_sets::make_equidistributed(grid.dim, self.gamma, bw, placement)?),
            SetKind::Distributed => Some(control_sets::make_distributed(grid.dim, self.gamma, self.sigma, bw, placement)?),
        };
        let indicator = match (&set, self.kind) {
            (Some(s), _) => control_sets::indicator(s, grid)?,
            (None, SetKind::Empty) => SetIndicator::from_mask(*grid, vec![false; grid.len()])?,
            (None, _) => SetIndicator::full(*grid),
        };
        Ok(BuiltSet { set, indicator })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    #[serde(rename = "T")]
    pub t: Option<f64>,
    pub s: Option<f64>,
    /// Spectral levels swept by the audits.
    pub lambda: Vec<f64>,
    /// Ball radii swept by the Caccioppoli and lift audits.
    pub rho: Vec<f64>,
    /// Potential scalings for `scan-r`.
    pub r_values: Vec<f64>,
    /// Fourier cutoff `M` of the Grushin mode box.
    pub max_mode: i64,
    pub y_dim: usize,
    /// `y`-points of the direct oracle (and of physical-space round trips).
    pub y_points: usize,
    /// `x`-points of the direct oracle grid.
    pub oracle_points: usize,
    pub oracle_times: Vec<f64>,
    pub oracle_powers: Vec<f64>,
    /// HUM regularization; defaults to `1e-10·tr(M)/m`.
    pub eps: Option<f64>,
    /// Indices of the eigenfunctions summed into the HUM initial state.
    pub u0_modes: Vec<usize>,
    pub time_samples: usize,
    /// Random coefficient vectors per radius in the lift audit.
    pub lift_samples: usize,
    /// Required `‖u(T)‖/‖u0‖` for the control audit.
    pub terminal_tolerance: f64,
    pub thickness_scale: f64,
    /// Localization mass fraction inside `B_ρ(λ)`.
    pub mass_fraction: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        Self {
            t: None,
            s: None,
            lambda: vec![5.0, 10.0, 20.0],
            rho: vec![0.5, 1.0, 2.0],
            r_values: vec![0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0],
            max_mode: grushinlab_core::grushin::DEFAULT_MAX_MODE,
            y_dim: 1,
            y_points: 16,
            oracle_points: 61,
            oracle_times: vec![0.05, 0.2],
            oracle_powers: vec![1.0, 1.5],
            eps: None,
            u0_modes: vec![0, 1],
            time_samples: 21,
            lift_samples: 10,
            terminal_tolerance: 1e-6,
            thickness_scale: 1.0,
            mass_fraction: grushinlab_core::verify::QUARTER_MASS,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssumptionConfig {
    pub assumption: Option<Assumption>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub beta1: Option<f64>,
    pub beta2: Option<f64>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub n: Option<usize>,
}

impl AssumptionConfig {
    pub fn params(&self) -> anyhow::Result<AssumptionParams> {
        let get = |v: Option<f64>, name: &str| v.with_context(|| format!("assumption parameter `{name}` is unresolved"));
        Ok(AssumptionParams::new(
            self.assumption.context("assumption is unresolved")?,
            get(self.c1, "c1")?,
            get(self.c2, "c2")?,
            get(self.beta1, "beta1")?,
            get(self.beta2, "beta2")?,
            get(self.sigma, "sigma")?,
            get(self.gamma, "gamma")?,
            self.n.context("assumption parameter `n` is unresolved")?,
        )?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<CommandName>,
    pub potential: PotentialConfig,
    /// Unscaled additive potential `Ṽ` for the Grushin family and `scan-r`.
    pub additive: Option<PotentialConfig>,
    pub grid: GridConfig,
    pub eigen: EigenRequest,
    pub set: SetConfig,
    pub physics: PhysicsConfig,
    pub assumption: AssumptionConfig,
    pub free_constants: FreeConstants,
    pub audits: Vec<AuditKind>,
    pub oracle: bool,
    /// Largest `β` and number of samples of the phase diagram.
    pub beta_max: f64,
    pub resolution: usize,
    pub out: Option<PathBuf>,
    /// Eigenvector CSV for `eigs`, mask CSV for `sets`.
    pub aux_out: Option<PathBuf>,
    pub seed: u64,
    pub tolerance: f64,
    /// Accepted for forward compatibility; kernels run single-threaded.
    pub threads: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            potential: PotentialConfig::default(),
            additive: None,
            grid: GridConfig::default(),
            eigen: EigenRequest::Count(20),
            set: SetConfig::default(),
            physics: PhysicsConfig::default(),
            assumption: AssumptionConfig::default(),
            free_constants: FreeConstants::default(),
            audits: Vec::new(),
            oracle: false,
            beta_max: 4.0,
            resolution: 40,
            out: None,
            aux_out: None,
            seed: 0,
            tolerance: 1e-6,
            threads: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    /// Fills every default that depends on other fields.
    pub fn resolve(&mut self, command: CommandName) {
        self.command = Some(command);
        let a = &mut self.assumption;
        let implied = self.potential.growth();
        if a.assumption.is_none() {
            a.assumption = Some(implied.map(|g| g.0).unwrap_or(Assumption::A1));
        }
        let g = implied.map(|g| g.1);
        a.c1 = a.c1.or(g.map(|g| g.c1)).or(Some(1.0));
        a.c2 = a.c2.or(g.map(|g| g.c2)).or(Some(1.0));
        let beta1_overridden = a.beta1.is_some();
        a.beta1 = a.beta1.or(g.map(|g| g.beta1)).or(Some(2.0));
        if a.beta2.is_none() {
            a.beta2 = if beta1_overridden { a.beta1 } else { g.map(|g| g.beta2).or(a.beta1) };
        }
        a.sigma = a.sigma.or(Some(self.set.sigma));
        a.gamma = a.gamma.or(Some(self.set.gamma));
        a.n = a.n.or(Some(self.grid.dim));
        if self.set.box_halfwidth.is_none() {
            self.set.box_halfwidth = Some(self.grid.halfwidth);
        }
        let p = &mut self.physics;
        match command {
            CommandName::Constants => {
                if p.s.is_some() && p.t.is_none() {
                    p.t = Some(1.0);
                }
            }
            _ => {
                p.t = p.t.or(Some(1.0));
                p.s = p.s.or(Some(1.0));
            }
        }
        if command == CommandName::Audit && self.audits.is_empty() {
            self.audits = AuditKind::ALL.to_vec();
        }
    }

    pub fn t(&self) -> f64 {
        self.physics.t.unwrap_or(1.0)
    }

    pub fn s(&self) -> f64 {
        self.physics.s.unwrap_or(1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resolved_config_round_trips_through_json() {
        let mut c = RunConfig::default();
        c.additive = Some(PotentialConfig::Zero);
        c.resolve(CommandName::Audit);
        let text = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"grid": {"points": 50}, "free_constants": {"C_hat": 2.0}}"#).unwrap();
        assert_eq!(c.grid.points, 50);
        assert_eq!(c.grid.halfwidth, 10.0);
        assert_eq!(c.free_constants.c_hat, 2.0);
        assert_eq!(c.free_constants.kappa_n, 1.0);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"gird": {}}"#).is_err());
    }

    #[test]
    fn potential_strings() {
        let a = AssumptionConfig::default();
        assert_eq!(PotentialConfig::parse("power:2", &a).unwrap(), PotentialConfig::Power { c: 1.0, beta: 2.0 });
        assert_eq!(PotentialConfig::parse("power:1.5:3", &a).unwrap(), PotentialConfig::Power { c: 3.0, beta: 1.5 });
        assert_eq!(PotentialConfig::parse("zero", &a).unwrap(), PotentialConfig::Zero);
        assert!(PotentialConfig::parse("table:x.csv", &a).is_err());
        assert!(PotentialConfig::parse("cubic", &a).is_err());
    }

    #[test]
    fn assumption_follows_potential_and_overrides() {
        let mut c = RunConfig::default();
        c.resolve(CommandName::Constants);
        let p = c.assumption.params().unwrap();
        assert_eq!((p.assumption, p.beta1, p.beta2), (Assumption::A1, 2.0, 2.0));
        assert_eq!(c.physics.t, None);

        let mut c = RunConfig::default();
        c.assumption.beta1 = Some(1.0);
        c.assumption.assumption = Some(Assumption::A2);
        c.resolve(CommandName::Constants);
        let p = c.assumption.params().unwrap();
        assert_eq!((p.beta1, p.beta2), (1.0, 1.0));

        let mut c = RunConfig::default();
        c.physics.s = Some(2.0);
        c.resolve(CommandName::Constants);
        assert_eq!(c.physics.t, Some(1.0));
    }
}
