//! Figure-of-merit landscape over optical and acoustic rotation.

use rayon::prelude::*;

use crate::bandshape::{dual_band_report, BandshapeOptions};
use crate::bragg::{DeviceGeometry, Interaction};
use crate::design::{design_color, DesignSettings};
use crate::error::{Error, Result};
use crate::materials::MaterialConstants;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FomLimits {
    /// Highest drivable frequency, MHz.
    pub hf_limit_mhz: f64,
    /// Margin added to every crystal dimension, mm.
    pub margin_mm: f64,
    pub octave_penalty: bool,
    pub degeneracy_gate: bool,
}

impl Default for FomLimits {
    fn default() -> Self {
        Self { hf_limit_mhz: 230.0, margin_mm: 2.0, octave_penalty: true, degeneracy_gate: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellReason {
    Ok,
    HfLimit,
    Degeneracy,
    ZeroBandwidth,
    Infeasible(String),
}

impl CellReason {
    pub fn code(&self) -> &'static str {
        match self {
            CellReason::Ok => "ok",
            CellReason::HfLimit => "hf_limit",
            CellReason::Degeneracy => "degeneracy",
            CellReason::ZeroBandwidth => "zero_bandwidth",
            CellReason::Infeasible(_) => "infeasible",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FomCell {
    pub phi_o: f64,
    pub phi_a: f64,
    pub bw_red: f64,
    pub bw_blue: f64,
    pub bw_over_octave: f64,
    /// mm³.
    pub crystal_volume: f64,
    /// In-plane acoustic walk-off, degrees.
    pub walkoff_deg: f64,
    pub hf_ok: bool,
    pub degeneracy_ok: bool,
    /// MHz/mm³.
    pub fom: f64,
    pub reason: CellReason,
    pub red_band: Option<(f64, f64)>,
    pub blue_band: Option<(f64, f64)>,
}

/// Crystal volume: aperture × (transducer length + walk-off spread) × height, each plus margin.
pub fn crystal_volume(aperture_mm: f64, length_mm: f64, height_mm: f64, walkoff_deg: f64, margin_mm: f64) -> f64 {
    let spread = aperture_mm * walkoff_deg.to_radians().tan().abs();
    (aperture_mm + margin_mm) * (length_mm + spread + margin_mm) * (height_mm + margin_mm)
}

/// Everything a cell evaluation needs besides the two rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct FomInputs {
    pub material: MaterialConstants,
    pub geometry: DeviceGeometry,
    pub settings: DesignSettings,
    pub limits: FomLimits,
}

impl FomInputs {
    pub fn new(material: MaterialConstants, geometry: DeviceGeometry) -> Self {
        let mut settings = DesignSettings::default();
        settings.bandshape.f_range = None;
        Self { material, geometry, settings, limits: FomLimits::default() }
    }
}

fn infeasible(phi_o: f64, phi_a: f64, e: &Error) -> FomCell {
    FomCell {
        phi_o,
        phi_a,
        bw_red: 0.0,
        bw_blue: 0.0,
        bw_over_octave: 0.0,
        crystal_volume: f64::NAN,
        walkoff_deg: f64::NAN,
        hf_ok: false,
        degeneracy_ok: false,
        fom: 0.0,
        reason: CellReason::Infeasible(e.to_string()),
        red_band: None,
        blue_band: None,
    }
}

pub fn evaluate_cell(phi_o: f64, phi_a: f64, inputs: &FomInputs) -> FomCell {
    match try_cell(phi_o, phi_a, inputs) {
        Ok(c) => c,
        Err(e) => infeasible(phi_o, phi_a, &e),
    }
}

fn try_cell(phi_o: f64, phi_a: f64, inputs: &FomInputs) -> Result<FomCell> {
    let mut g = inputs.geometry.clone();
    g.optical_rotation_deg = phi_o;
    g.acoustic_rotation_deg = phi_a;
    let s = &inputs.settings;
    let window =
        |f_t: f64| BandshapeOptions { f_range: s.bandshape.f_range.or(Some((0.7 * f_t, 1.3 * f_t))), ..s.bandshape };
    let m = &inputs.material;
    let red_t = Interaction::new(m, &g, s.red_nm)?.tangential_match()?.f_tangential;
    let blue_t = Interaction::new(m, &g, s.blue_nm)?.tangential_match()?.f_tangential;
    let red = design_color(m, &g, s.red_nm, s.red_ripple_db, s.three_db_edges, &window(red_t))?;
    let blue = design_color(m, &g, s.blue_nm, s.blue_ripple_db, s.three_db_edges, &window(blue_t))?;
    let walkoff = Interaction::new(m, &g, s.red_nm)?.acoustic_walkoff()?;
    let lim = &inputs.limits;
    let volume =
        crystal_volume(g.aperture_mm, g.transducer.length, g.transducer.height, walkoff.in_plane_deg, lim.margin_mm);
    let (rb, bb) = (red.bandshape.band_edges, blue.bandshape.band_edges);
    let report = dual_band_report(rb, bb);
    let bw_over_octave = if lim.octave_penalty { report.bw_over_octave } else { 0.0 };
    let hf_ok = rb.1.max(bb.1) <= lim.hf_limit_mhz;
    let degeneracy_ok = !lim.degeneracy_gate || !(red.degeneracy_in_band() || blue.degeneracy_in_band());
    let (bw_red, bw_blue) = (red.bandwidth(), blue.bandwidth());
    let numerator = (bw_red + bw_blue - bw_over_octave).max(0.0);
    let reason = if !hf_ok {
        CellReason::HfLimit
    } else if !degeneracy_ok {
        CellReason::Degeneracy
    } else if numerator == 0.0 {
        CellReason::ZeroBandwidth
    } else {
        CellReason::Ok
    };
    let fom = if reason == CellReason::Ok { numerator / volume } else { 0.0 };
    Ok(FomCell {
        phi_o,
        phi_a,
        bw_red,
        bw_blue,
        bw_over_octave,
        crystal_volume: volume,
        walkoff_deg: walkoff.in_plane_deg,
        hf_ok,
        degeneracy_ok,
        fom,
        reason,
        red_band: Some(rb),
        blue_band: Some(bb),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FomGrid {
    pub phi_o: Vec<f64>,
    pub phi_a: Vec<f64>,
}

impl FomGrid {
    /// Inclusive range with a fixed step.
    pub fn range(start: f64, stop: f64, step: f64) -> Vec<f64> {
        let n = ((stop - start) / step + 1e-9).floor() as usize;
        (0..=n).map(|i| start + step * i as f64).collect()
    }

    pub fn default_grid() -> Self {
        Self { phi_o: Self::range(4.0, 14.0, 1.0), phi_a: Self::range(0.0, 5.0, 0.5) }
    }

    pub fn is_empty(&self) -> bool {
        self.phi_o.is_empty() || self.phi_a.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FomScan {
    /// Row-major: φ_o outer, φ_a inner.
    pub cells: Vec<FomCell>,
    pub argmax: usize,
}

impl FomScan {
    pub fn best(&self) -> &FomCell {
        &self.cells[self.argmax]
    }
}

/// Index of the best cell; ties prefer smaller |φ_a|, then smaller |φ_o|.
pub fn argmax(cells: &[FomCell]) -> usize {
    let mut best = 0;
    for (i, c) in cells.iter().enumerate().skip(1) {
        let b = &cells[best];
        let better = c.fom > b.fom
            || (c.fom == b.fom
                && (c.phi_a.abs() < b.phi_a.abs()
                    || (c.phi_a.abs() == b.phi_a.abs() && c.phi_o.abs() < b.phi_o.abs())));
        if better {
            best = i;
        }
    }
    best
}

/// Evaluates every cell on up to `jobs` worker threads; results keep grid order.
pub fn scan(grid: &FomGrid, inputs: &FomInputs, jobs: Option<usize>) -> Result<FomScan> {
    if grid.is_empty() {
        return Err(Error::Config("empty figure-of-merit grid".into()));
    }
    let pairs: Vec<(f64, f64)> = grid.phi_o.iter().flat_map(|&o| grid.phi_a.iter().map(move |&a| (o, a))).collect();
    let run = || pairs.par_iter().map(|&(o, a)| evaluate_cell(o, a, inputs)).collect::<Vec<_>>();
    let cells = match jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(run),
        None => run(),
    };
    let argmax = argmax(&cells);
    Ok(FomScan { cells, argmax })
}
