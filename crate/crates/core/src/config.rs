//! Scenario files: one TOML document per scenario, with `key=value` overrides.
//!
//! Every section has defaults reproducing the shipped canonical scenarios, so an empty
//! file is a valid scenario. Unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cones::{AngleArc, Cone};
use crate::dbar::{CauchyMethod, SolverConfig};
use crate::error::{Error, Result};
use crate::numerics::{GridSpec, DEFAULT_GRID_BUDGET};
use crate::profiles::Profile;
use crate::weights::WeightSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    VerifyProfiles,
    #[serde(alias = "cone-geometry")]
    Cone,
    #[serde(alias = "psh-bounds")]
    Psh,
    Dbar,
    Decompose,
    Density,
}

impl Pipeline {
    pub const ALL: [Pipeline; 6] = [
        Pipeline::VerifyProfiles,
        Pipeline::Cone,
        Pipeline::Psh,
        Pipeline::Dbar,
        Pipeline::Decompose,
        Pipeline::Density,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::VerifyProfiles => "verify-profiles",
            Pipeline::Cone => "cone",
            Pipeline::Psh => "psh",
            Pipeline::Dbar => "dbar",
            Pipeline::Decompose => "decompose",
            Pipeline::Density => "density",
        }
    }
}

/// Rectangle in the plane of one complex variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneGrid {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

impl PlaneGrid {
    pub fn new(x: [f64; 2], nx: usize, y: [f64; 2], ny: usize) -> Self {
        PlaneGrid { x, y, nx, ny }
    }

    pub fn spec(&self, budget: usize) -> Result<GridSpec> {
        let g = GridSpec::plane((self.x[0], self.x[1]), self.nx, (self.y[0], self.y[1]), self.ny).with_budget(budget);
        g.validate()?;
        Ok(g)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProfilesSection {
    pub alpha: Profile,
    pub beta: Profile,
    /// Log-spaced verification nodes on `[s_min, s_max]`, plus `0`.
    pub s_min: f64,
    pub s_max: f64,
    pub nodes: usize,
}

impl Default for ProfilesSection {
    fn default() -> Self {
        ProfilesSection { alpha: Profile::square(), beta: Profile::square(), s_min: 1e-3, s_max: 1e3, nodes: 400 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapSection {
    pub a: f64,
    pub b: f64,
    pub a_prime: f64,
    pub b_prime: f64,
    /// Cones over which the gap is fitted.
    pub cones: Vec<Cone>,
    pub grid: PlaneGrid,
    /// Polydisc radius of the shift check.
    pub shift_radius: f64,
    pub shift_radial: usize,
    pub shift_angular: usize,
}

impl Default for GapSection {
    fn default() -> Self {
        GapSection {
            a: 1.0,
            b: 1.0,
            a_prime: 2.0,
            b_prime: 2.0,
            cones: vec![Cone::full(1).expect("k = 1"), Cone::origin(1)],
            grid: PlaneGrid::new([-10.0, 10.0], 201, [-10.0, 10.0], 201),
            shift_radius: 1.0,
            shift_radial: 4,
            shift_angular: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConeSection {
    pub k1: Cone,
    pub k2: Cone,
    pub w: Cone,
    pub samples: usize,
}

impl Default for ConeSection {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_2;
        ConeSection {
            k1: Cone::arcs([AngleArc::ray(0.0)]).expect("valid arc"),
            k2: Cone::arcs([AngleArc::ray(FRAC_PI_2)]).expect("valid arc"),
            w: Cone::origin(2),
            samples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PshSection {
    pub theta_samples: usize,
    pub sigma_cones: Vec<Cone>,
    pub sigma_radii: Vec<f64>,
    pub sigma_probes: usize,
    pub seed_samples: usize,
    pub seed_extent: f64,
    /// Parameters of the main construction (`A`, `B`).
    pub a: f64,
    pub b: f64,
    pub rho_radius: f64,
    pub rho_samples: usize,
    pub submean_probes: usize,
    pub tolerance: f64,
}

impl Default for PshSection {
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_2;
        PshSection {
            theta_samples: 10_000,
            sigma_cones: vec![
                Cone::origin(1),
                Cone::positive_ray(),
                Cone::arcs([AngleArc::closed(0.0, FRAC_PI_2)]).expect("valid arc"),
            ],
            sigma_radii: vec![1.0, 10.0],
            sigma_probes: 1000,
            seed_samples: 1000,
            seed_extent: 5.0,
            a: 1.0,
            b: 1.0,
            rho_radius: 3.0,
            rho_samples: 1000,
            submean_probes: 200,
            tolerance: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DbarSection {
    pub method: CauchyMethod,
    /// Square box `[-half_width, half_width]^2` with `n` nodes per axis for the disk test.
    pub half_width: f64,
    pub n: usize,
    /// Grid of the weighted solve against a `rho_R` surrogate.
    pub weighted_grid: PlaneGrid,
    pub a: f64,
    pub b: f64,
}

impl Default for DbarSection {
    fn default() -> Self {
        DbarSection {
            method: CauchyMethod::Convolution,
            half_width: 1.5,
            n: 256,
            weighted_grid: PlaneGrid::new([-2.0, 2.0], 161, [-1.0, 1.0], 81),
            a: 2.0,
            b: 2.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecomposeSection {
    pub k1: Cone,
    pub k2: Cone,
    /// Conic neighborhood of `K1 ∩ K2` carrying `f`.
    pub w: Cone,
    pub a: f64,
    pub b: f64,
    pub grid: PlaneGrid,
    pub tolerance: f64,
}

impl Default for DecomposeSection {
    fn default() -> Self {
        DecomposeSection {
            k1: Cone::positive_ray(),
            k2: Cone::negative_ray(),
            w: Cone::origin(1),
            a: 2.0,
            b: 2.0,
            grid: PlaneGrid::new([-4.0, 4.0], 401, [-1.0, 1.0], 201),
            tolerance: 1e-6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DensitySection {
    pub u: Cone,
    pub w: Cone,
    pub a: f64,
    pub b: f64,
    pub ns: Vec<f64>,
    pub grid: PlaneGrid,
    /// Required ratio of the last error to the first.
    pub final_ratio: f64,
}

impl Default for DensitySection {
    fn default() -> Self {
        DensitySection {
            u: Cone::positive_ray(),
            w: Cone::positive_ray(),
            a: 2.0,
            b: 2.0,
            ns: vec![2.0, 4.0, 8.0],
            grid: PlaneGrid::new([-4.0, 20.0], 481, [-1.0, 1.0], 81),
            final_ratio: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::default();
        SolverSection { tol: d.tol, max_iter: d.max_iter }
    }
}

impl SolverSection {
    pub fn config(&self) -> SolverConfig {
        SolverConfig { tol: self.tol, max_iter: self.max_iter }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    /// Pipeline run when the scenario is executed without an explicit subcommand.
    pub pipeline: Option<Pipeline>,
    pub seed: u64,
    pub grid_budget: usize,
    pub profiles: ProfilesSection,
    pub gap: GapSection,
    pub cone: ConeSection,
    pub psh: PshSection,
    pub dbar: DbarSection,
    pub decompose: DecomposeSection,
    pub density: DensitySection,
    pub solver: SolverSection,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "canonical".into(),
            pipeline: None,
            seed: 20_061_107,
            grid_budget: DEFAULT_GRID_BUDGET,
            profiles: ProfilesSection::default(),
            gap: GapSection::default(),
            cone: ConeSection::default(),
            psh: PshSection::default(),
            dbar: DbarSection::default(),
            decompose: DecomposeSection::default(),
            density: DensitySection::default(),
            solver: SolverSection::default(),
        }
    }
}

impl Scenario {
    pub fn from_toml(text: &str, overrides: &[String]) -> Result<Scenario> {
        let mut doc: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let s: Scenario =
            toml::Value::Table(doc).try_into().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Scenario> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => String::new(),
        };
        Scenario::from_toml(&text, overrides)
    }

    fn validate(&self) -> Result<()> {
        if self.grid_budget == 0 {
            return Err(Error::Config("grid_budget must be positive".into()));
        }
        self.profiles.alpha.validate().map_err(|e| Error::Config(format!("profiles.alpha: {e}")))?;
        self.profiles.beta.validate().map_err(|e| Error::Config(format!("profiles.beta: {e}")))?;
        Ok(())
    }

    /// Canonical TOML text of the scenario.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenarios serialize")
    }

    pub fn weight(&self, cone: Cone, a: f64, b: f64) -> Result<WeightSpec> {
        WeightSpec::new(cone, a, b, self.profiles.alpha.clone(), self.profiles.beta.clone())
    }
}

/// `a.b.c=value`; the value is parsed as a TOML value, falling back to a bare string.
pub fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) =
        spec.split_once('=').ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let key = key.trim();
    if key.is_empty() || key.split('.').any(str::is_empty) {
        return Err(Error::Config(format!("override `{spec}` has an empty key")));
    }
    let value = parse_value(raw.trim());
    let parts: Vec<&str> = key.split('.').collect();
    let mut table = doc;
    for p in &parts[..parts.len() - 1] {
        let entry = table.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table =
            entry.as_table_mut().ok_or_else(|| Error::Config(format!("override `{spec}`: `{p}` is not a table")))?;
    }
    table.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_canonical() {
        assert_eq!(Scenario::from_toml("", &[]).unwrap(), Scenario::default());
    }

    #[test]
    fn round_trip() {
        let s = Scenario::default();
        assert_eq!(Scenario::from_toml(&s.to_toml(), &[]).unwrap(), s);
    }

    #[test]
    fn overrides() {
        let s = Scenario::from_toml(
            "[gap]\na = 1.0\n",
            &["gap.a_prime=1.0".into(), "seed=7".into(), "density.ns=[2.0, 4.0]".into(), "name=demo run".into()],
        )
        .unwrap();
        assert_eq!(s.gap.a_prime, 1.0);
        assert_eq!(s.seed, 7);
        assert_eq!(s.density.ns, vec![2.0, 4.0]);
        assert_eq!(s.name, "demo run");
    }

    #[test]
    fn errors() {
        assert!(matches!(Scenario::from_toml("seed = ", &[]), Err(Error::Config(_))));
        assert!(matches!(Scenario::from_toml("bogus = 1", &[]), Err(Error::Config(_))));
        assert!(matches!(Scenario::from_toml("", &["seed".into()]), Err(Error::Config(_))));
        assert!(matches!(Scenario::from_toml("", &["seed.x=1".into()]), Err(Error::Config(_))));
        assert!(matches!(
            Scenario::from_toml("[decompose]\nk1 = { dim = 1, rays = [\"up\"] }", &[]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn cones_in_toml() {
        let s = Scenario::from_toml(
            "[cone]\nk1 = { dim = 2, arcs = [{ lo = 0.0, hi = 0.5 }] }\nw = { dim = 2, full = true }\n",
            &[],
        )
        .unwrap();
        assert!(s.cone.w.is_full());
        assert!(s.cone.k1.contains(&[1.0, 0.2]).unwrap());
    }
}
