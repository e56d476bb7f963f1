//! Two-colour device design: tangential match, ripple-designed incidence, bandshapes and prism cut.

use crate::bandshape::{
    bandshape, design_ripple_incidence, dual_band_report, BandCriterion, Bandshape, BandshapeOptions, DualBandReport,
};
use crate::bragg::{prism_cut, AcousticWalkoff, DeviceGeometry, Interaction, MatchSolution, PrismCut};
use crate::error::Result;
use crate::materials::MaterialConstants;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSettings {
    pub red_nm: f64,
    pub blue_nm: f64,
    pub red_ripple_db: f64,
    pub blue_ripple_db: f64,
    /// Report 3 dB edges instead of the design ripple.
    pub three_db_edges: bool,
    pub bandshape: BandshapeOptions,
}

impl Default for DesignSettings {
    fn default() -> Self {
        Self {
            red_nm: 780.0,
            blue_nm: 480.0,
            red_ripple_db: 0.5,
            blue_ripple_db: 1.0,
            three_db_edges: false,
            bandshape: BandshapeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColorDesign {
    pub wavelength_nm: f64,
    pub ripple_db: f64,
    pub matching: MatchSolution,
    /// Internal incidence, radians.
    pub incidence: f64,
    pub bandshape: Bandshape,
}

impl ColorDesign {
    pub fn bandwidth(&self) -> f64 {
        self.bandshape.bandwidth()
    }

    pub fn degeneracy_in_band(&self) -> bool {
        self.bandshape.degeneracy_markers.iter().any(|d| d.in_band)
    }
}

/// Designs one wavelength: tangential match, ripple detuning and the sampled bandshape.
pub fn design_color(
    material: &MaterialConstants,
    geometry: &DeviceGeometry,
    wavelength_nm: f64,
    ripple_db: f64,
    three_db_edges: bool,
    options: &BandshapeOptions,
) -> Result<ColorDesign> {
    let it = Interaction::new(material, geometry, wavelength_nm)?;
    let matching = it.tangential_match()?;
    let incidence = design_ripple_incidence(&it, &geometry.transducer, ripple_db, options)?;
    let criterion = if three_db_edges { BandCriterion::ThreeDb } else { BandCriterion::Ripple(ripple_db) };
    let bandshape = bandshape(&it, &geometry.transducer, incidence, criterion, options)?;
    Ok(ColorDesign { wavelength_nm, ripple_db, matching, incidence, bandshape })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceDesign {
    pub geometry: DeviceGeometry,
    pub red: ColorDesign,
    pub blue: ColorDesign,
    pub dual_band: DualBandReport,
    pub prism: PrismCut,
    pub walkoff: AcousticWalkoff,
}

pub fn design_device(
    material: &MaterialConstants,
    geometry: &DeviceGeometry,
    settings: &DesignSettings,
) -> Result<DeviceDesign> {
    let opts = &settings.bandshape;
    let red = design_color(material, geometry, settings.red_nm, settings.red_ripple_db, settings.three_db_edges, opts)?;
    let blue =
        design_color(material, geometry, settings.blue_nm, settings.blue_ripple_db, settings.three_db_edges, opts)?;
    let dual_band = dual_band_report(red.bandshape.band_edges, blue.bandshape.band_edges);
    let red_it = Interaction::new(material, geometry, settings.red_nm)?;
    let blue_it = Interaction::new(material, geometry, settings.blue_nm)?;
    let prism = prism_cut(
        &red_it.prism_beam(red.incidence, red.bandshape.center)?,
        &blue_it.prism_beam(blue.incidence, blue.bandshape.center)?,
    )?;
    let walkoff = red_it.acoustic_walkoff()?;
    let mut geometry = geometry.clone();
    geometry.prism_front_deg = Some(prism.front_wedge_deg);
    geometry.prism_exit_deg = Some(prism.exit_wedge_deg);
    Ok(DeviceDesign { geometry, red, blue, dual_band, prism, walkoff })
}
