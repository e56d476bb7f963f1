//! Versioned TOML configuration for materials and runs. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::bandshape::{BandshapeOptions, DbScale};
use crate::bragg::{DeviceGeometry, DopplerOrder};
use crate::cascade::CascadeConfig;
use crate::design::DesignSettings;
use crate::error::{Error, Result};
use crate::fom::{FomGrid, FomLimits};
use crate::materials::{DispersionEntry, MaterialConstants, Voigt};
use crate::transducer::TransducerSpec;

pub const SCHEMA_VERSION: u32 = 1;

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::Config(format!("unsupported schema_version {v}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

fn parse<T: serde::de::DeserializeOwned>(text: &str, origin: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Config(format!("{origin}: {e}")))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionFile {
    pub wavelength_nm: f64,
    pub n_o: f64,
    pub n_e: f64,
    pub rotatory_power_rad_per_m: f64,
}

/// On-disk material description. Stiffness in Pa, density in kg/m³, attenuation in dB/µs/GHz².
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialFile {
    pub schema_version: u32,
    pub name: String,
    pub density_kg_per_m3: f64,
    pub stiffness_pa: Voigt,
    pub photoelastic: Voigt,
    pub effective_photoelastic: f64,
    pub attenuation_db_per_us_ghz2: f64,
    pub dispersion: Vec<DispersionFile>,
}

impl MaterialFile {
    pub fn into_material(self) -> Result<MaterialConstants> {
        check_version(self.schema_version)?;
        let mut dispersion: Vec<DispersionEntry> = self
            .dispersion
            .into_iter()
            .map(|d| DispersionEntry {
                wavelength_nm: d.wavelength_nm,
                n_o: d.n_o,
                n_e: d.n_e,
                rotatory_power: d.rotatory_power_rad_per_m,
            })
            .collect();
        dispersion.sort_by(|a, b| a.wavelength_nm.total_cmp(&b.wavelength_nm));
        let m = MaterialConstants {
            name: self.name,
            stiffness: self.stiffness_pa,
            photoelastic: self.photoelastic,
            effective_photoelastic: self.effective_photoelastic,
            density: self.density_kg_per_m3,
            dispersion,
            attenuation_coeff: self.attenuation_db_per_us_ghz2,
        };
        m.validate()?;
        Ok(m)
    }
}

pub fn parse_material(text: &str, origin: &str) -> Result<MaterialConstants> {
    parse::<MaterialFile>(text, origin)?.into_material()
}

pub fn load_material(path: &Path) -> Result<MaterialConstants> {
    parse_material(&read(path)?, &path.display().to_string())
}

/// Serializes a material back to the on-disk schema.
pub fn material_to_toml(m: &MaterialConstants) -> String {
    let row = |r: &[f64; 6]| r.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(", ");
    let mut s = format!("schema_version = {SCHEMA_VERSION}\nname = \"{}\"\n", m.name);
    s += &format!("density_kg_per_m3 = {}\n", m.density);
    s += &format!("effective_photoelastic = {}\n", m.effective_photoelastic);
    s += &format!("attenuation_db_per_us_ghz2 = {}\n", m.attenuation_coeff);
    s += "stiffness_pa = [\n";
    for r in &m.stiffness {
        s += &format!("  [{}],\n", row(r));
    }
    s += "]\nphotoelastic = [\n";
    for r in &m.photoelastic {
        s += &format!("  [{}],\n", row(r));
    }
    s += "]\n";
    for d in &m.dispersion {
        s += &format!(
            "\n[[dispersion]]\nwavelength_nm = {}\nn_o = {}\nn_e = {}\nrotatory_power_rad_per_m = {}\n",
            d.wavelength_nm, d.n_o, d.n_e, d.rotatory_power
        );
    }
    s
}

/// Inclusive start/stop/step range.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl RangeSpec {
    pub fn values(&self) -> Vec<f64> {
        if !(self.step > 0.0) || self.stop < self.start {
            return Vec::new();
        }
        FomGrid::range(self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DopplerKey {
    Up,
    Down,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    pub optical_rotation_deg: f64,
    pub acoustic_rotation_deg: f64,
    #[serde(default = "default_aperture")]
    pub aperture_mm: f64,
    #[serde(default = "default_doppler")]
    pub doppler: DopplerKey,
}

fn default_aperture() -> f64 {
    10.0
}

fn default_doppler() -> DopplerKey {
    DopplerKey::Up
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKey {
    Rectangle,
    Diamond,
    TruncatedDiamond,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransducerSection {
    pub shape: ShapeKey,
    pub length_mm: f64,
    pub height_mm: f64,
    pub truncation: Option<f64>,
    pub center_frequency_hint_mhz: Option<f64>,
}

impl TransducerSection {
    pub fn spec(&self) -> Result<TransducerSpec> {
        let mut s = match self.shape {
            ShapeKey::Rectangle => TransducerSpec::rectangle(self.length_mm, self.height_mm),
            ShapeKey::Diamond => TransducerSpec::diamond(self.length_mm, self.height_mm),
            ShapeKey::TruncatedDiamond => TransducerSpec::truncated_diamond(
                self.length_mm,
                self.height_mm,
                self.truncation.unwrap_or(crate::transducer::TransducerShape::DEFAULT_TRUNCATION),
            ),
        };
        if self.truncation.is_some() && self.shape != ShapeKey::TruncatedDiamond {
            return Err(Error::Config("transducer.truncation applies only to truncated_diamond".into()));
        }
        s.center_frequency_hint = self.center_frequency_hint_mhz;
        s.validate()?;
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DbScaleKey {
    Optical,
    Detected,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub red_nm: f64,
    pub blue_nm: f64,
    pub red_ripple_db: f64,
    pub blue_ripple_db: f64,
    #[serde(default = "default_step")]
    pub step_mhz: f64,
    #[serde(default = "default_true")]
    pub exact_closure: bool,
    #[serde(default = "default_db_scale")]
    pub db_scale: DbScaleKey,
    pub attenuation_path_mm: Option<f64>,
}

fn default_step() -> f64 {
    0.1
}

fn default_true() -> bool {
    true
}

fn default_db_scale() -> DbScaleKey {
    DbScaleKey::Detected
}

impl DesignSection {
    pub fn settings(&self, three_db_edges: bool) -> Result<DesignSettings> {
        if !(self.step_mhz > 0.0) {
            return Err(Error::Config("design.step_mhz must be positive".into()));
        }
        Ok(DesignSettings {
            red_nm: self.red_nm,
            blue_nm: self.blue_nm,
            red_ripple_db: self.red_ripple_db,
            blue_ripple_db: self.blue_ripple_db,
            three_db_edges,
            bandshape: BandshapeOptions {
                step_mhz: self.step_mhz,
                f_range: None,
                attenuation_path_mm: self.attenuation_path_mm,
                exact_closure: self.exact_closure,
                db_scale: match self.db_scale {
                    DbScaleKey::Optical => DbScale::Optical,
                    DbScaleKey::Detected => DbScale::Detected,
                },
            },
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub theta_deg: RangeSpec,
    pub phi_deg: RangeSpec,
    /// Polar angles for the optical-activity curves.
    pub activity_theta_deg: RangeSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FomSection {
    pub phi_o_deg: RangeSpec,
    pub phi_a_deg: RangeSpec,
    #[serde(default = "default_hf")]
    pub hf_limit_mhz: f64,
    #[serde(default = "default_margin")]
    pub margin_mm: f64,
    #[serde(default = "default_true")]
    pub octave_penalty: bool,
    #[serde(default = "default_true")]
    pub degeneracy_gate: bool,
}

fn default_hf() -> f64 {
    230.0
}

fn default_margin() -> f64 {
    2.0
}

impl FomSection {
    pub fn grid(&self) -> FomGrid {
        FomGrid { phi_o: self.phi_o_deg.values(), phi_a: self.phi_a_deg.values() }
    }

    pub fn limits(&self) -> FomLimits {
        FomLimits {
            hf_limit_mhz: self.hf_limit_mhz,
            margin_mm: self.margin_mm,
            octave_penalty: self.octave_penalty,
            degeneracy_gate: self.degeneracy_gate,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CascadeSection {
    pub beam_diameter_mm: f64,
    pub fourier_focal_mm: f64,
    pub collimator_focal_mm: f64,
    pub objective_focal_mm: f64,
    pub trap_pitch_um: f64,
    /// Per-colour (red, blue) cascaded bandwidth override, MHz.
    pub usable_bandwidth_mhz: Option<[f64; 2]>,
    pub switching_time_us: Option<f64>,
    #[serde(default = "default_oversample")]
    pub oversample: f64,
    /// Addressed array (rows, columns).
    pub array: [usize; 2],
}

fn default_oversample() -> f64 {
    3.0
}

impl CascadeSection {
    pub fn config(&self, geometry: &DeviceGeometry) -> Result<CascadeConfig> {
        let mut c = CascadeConfig::new(geometry);
        c.beam_diameter = self.beam_diameter_mm;
        c.fourier_focal = self.fourier_focal_mm;
        c.collimator_focal = self.collimator_focal_mm;
        c.objective_focal = self.objective_focal_mm;
        c.trap_pitch = self.trap_pitch_um;
        c.usable_bandwidth = self.usable_bandwidth_mhz.map(|b| (b[0], b[1]));
        c.switching_time = self.switching_time_us;
        c.oversample = self.oversample;
        c.validate()?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormatKey {
    Csv,
    Png,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<FormatKey>,
}

fn default_formats() -> Vec<FormatKey> {
    vec![FormatKey::Csv]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    /// Material file, relative to the run config; the built-in TeO₂ set when absent.
    pub material: Option<PathBuf>,
    pub geometry: GeometrySection,
    pub transducer: TransducerSection,
    pub design: DesignSection,
    pub sweep: SweepSection,
    pub fom: FomSection,
    pub cascade: CascadeSection,
    pub output: OutputSection,
    /// Directory the config was read from; relative paths resolve against it.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let c: RunConfig = parse(text, origin)?;
        check_version(c.schema_version)?;
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut c = Self::parse(&read(path)?, &path.display().to_string())?;
        c.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn material(&self) -> Result<MaterialConstants> {
        match &self.material {
            Some(p) => load_material(&self.resolve(p)),
            None => Ok(MaterialConstants::tellurium_dioxide()),
        }
    }

    pub fn geometry(&self) -> Result<DeviceGeometry> {
        let g = &self.geometry;
        let mut d = DeviceGeometry::new(g.optical_rotation_deg, g.acoustic_rotation_deg);
        d.aperture_mm = g.aperture_mm;
        d.doppler = match g.doppler {
            DopplerKey::Up => DopplerOrder::Up,
            DopplerKey::Down => DopplerOrder::Down,
        };
        d.transducer = self.transducer.spec()?;
        d.validate()?;
        Ok(d)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.output.dir)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RUN: &str = r#"
schema_version = 1

[geometry]
optical_rotation_deg = 10.0
acoustic_rotation_deg = 3.0

[transducer]
shape = "rectangle"
length_mm = 5.0
height_mm = 3.0

[design]
red_nm = 780.0
blue_nm = 480.0
red_ripple_db = 0.5
blue_ripple_db = 1.0

[sweep]
theta_deg = { start = 80.0, stop = 100.0, step = 1.0 }
phi_deg = { start = 45.0, stop = 45.0, step = 1.0 }
activity_theta_deg = { start = 0.0, stop = 20.0, step = 1.0 }

[fom]
phi_o_deg = { start = 4.0, stop = 14.0, step = 1.0 }
phi_a_deg = { start = 0.0, stop = 5.0, step = 0.5 }

[cascade]
beam_diameter_mm = 3.0
fourier_focal_mm = 42.0
collimator_focal_mm = 400.0
objective_focal_mm = 110.0
trap_pitch_um = 8.0
array = [10, 10]

[output]
dir = "out"
"#;

    #[test]
    fn run_config_parses() {
        let c = RunConfig::parse(RUN, "test").unwrap();
        assert_eq!(c.fom.grid(), FomGrid::default_grid());
        let g = c.geometry().unwrap();
        assert_eq!((g.optical_rotation_deg, g.acoustic_rotation_deg), (10.0, 3.0));
        assert_eq!(c.sweep.theta_deg.values().len(), 21);
        assert_eq!(c.design.settings(false).unwrap().bandshape.db_scale, DbScale::Detected);
    }

    #[test]
    fn unknown_key_is_rejected_with_location() {
        let bad = RUN.replace("length_mm = 5.0", "lenght_mm = 5.0");
        let e = RunConfig::parse(&bad, "run.toml").unwrap_err().to_string();
        assert!(e.contains("lenght_mm"), "{e}");
        assert!(e.contains("line"), "{e}");
    }

    #[test]
    fn wrong_version_is_rejected() {
        let bad = RUN.replace("schema_version = 1", "schema_version = 2");
        assert!(RunConfig::parse(&bad, "run.toml").is_err());
    }

    #[test]
    fn material_round_trip() {
        let m = MaterialConstants::tellurium_dioxide();
        let back = parse_material(&material_to_toml(&m), "rt").unwrap();
        assert_eq!(back.dispersion.len(), m.dispersion.len());
        for i in 0..6 {
            for j in 0..6 {
                assert!((back.stiffness[i][j] - m.stiffness[i][j]).abs() <= 1e-12 * m.stiffness[i][j].abs());
            }
        }
        assert_eq!(back.density, m.density);
    }

    #[test]
    fn empty_range() {
        assert!(RangeSpec { start: 1.0, stop: 0.0, step: 1.0 }.values().is_empty());
        assert!(RangeSpec { start: 0.0, stop: 1.0, step: 0.0 }.values().is_empty());
        assert_eq!(RangeSpec { start: 3.0, stop: 3.0, step: 1.0 }.values(), vec![3.0]);
    }
}
