//! Diffraction efficiency against drive frequency, ripple-designed incidence and band reports.

use crate::bragg::{Degeneracy, Interaction};
use crate::error::{Error, Result};
use crate::materials::MaterialConstants;
use crate::numeric::{brent, golden_max};
use crate::optics::OpticalBranch;
use crate::transducer::TransducerSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandCriterion {
    /// Edges where efficiency falls this many dB below the peak.
    Ripple(f64),
    ThreeDb,
}

impl BandCriterion {
    pub fn level_db(self) -> f64 {
        match self {
            BandCriterion::Ripple(r) => r,
            BandCriterion::ThreeDb => 3.0,
        }
    }
}

/// Decibel convention for relative efficiency.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DbScale {
    /// 10·log₁₀ of the optical power ratio.
    Optical,
    /// 20·log₁₀ of the optical power ratio, as read from a square-law detector's RF output.
    Detected,
}

impl DbScale {
    pub fn factor(self) -> f64 {
        match self {
            DbScale::Optical => 10.0,
            DbScale::Detected => 20.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DbScale::Optical => "optical",
            DbScale::Detected => "detected",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandshapeOptions {
    pub step_mhz: f64,
    /// Sampled range; defaults to 0.6–1.4 × the tangential frequency.
    pub f_range: Option<(f64, f64)>,
    /// Average acoustic loss over this optical path along the acoustic column.
    pub attenuation_path_mm: Option<f64>,
    /// Close the momentum triangle on the acoustic slowness surface instead of along the grating axis.
    pub exact_closure: bool,
    pub db_scale: DbScale,
}

impl Default for BandshapeOptions {
    fn default() -> Self {
        Self {
            step_mhz: 0.1,
            f_range: None,
            attenuation_path_mm: None,
            exact_closure: true,
            db_scale: DbScale::Detected,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bandshape {
    pub wavelength_nm: f64,
    /// (MHz, dB relative to peak), sorted by frequency.
    pub samples: Vec<(f64, f64)>,
    pub band_edges: (f64, f64),
    pub ripple: f64,
    pub center: f64,
    pub incidence_angle_deg: f64,
    pub degeneracy_markers: Vec<Degeneracy>,
}

impl Bandshape {
    pub fn bandwidth(&self) -> f64 {
        self.band_edges.1 - self.band_edges.0
    }
}

/// Relative (linear) efficiency at `f_mhz` for incidence `beta_i`.
pub fn relative_efficiency(
    interaction: &Interaction<'_>,
    transducer: &TransducerSpec,
    beta_i: f64,
    f_mhz: f64,
    options: &BandshapeOptions,
) -> Result<f64> {
    let kt = if options.exact_closure {
        interaction.exact_transverse_mismatch(f_mhz, beta_i)?
    } else {
        interaction.mismatch(f_mhz, beta_i)?
    };
    let mut eff = transducer.spectrum(kt, 0.0).powi(2);
    if let Some(path) = options.attenuation_path_mm {
        let v = interaction.velocity;
        let f_ghz = f_mhz * 1e-3;
        let db_per_mm = interaction.material.attenuation_coeff * f_ghz * f_ghz / v;
        // Power loss averaged over a uniform path from 0 to `path`.
        let x = db_per_mm * path * std::f64::consts::LN_10 / 10.0;
        eff *= if x < 1e-12 { 1.0 } else { (1.0 - (-x).exp()) / x };
    }
    Ok(eff)
}

fn to_db(e: f64, scale: DbScale) -> f64 {
    if e > 0.0 {
        (scale.factor() * e.log10()).max(-300.0)
    } else {
        -300.0
    }
}

/// Band edges around the global peak at `-level` dB with linear interpolation.
pub fn band_edges(samples: &[(f64, f64)], level_db: f64) -> Result<(f64, f64)> {
    if samples.is_empty() {
        return Err(Error::EmptyBandshape);
    }
    let threshold = -level_db - 1e-6;
    let peak = samples.iter().enumerate().max_by(|a, b| a.1 .1.total_cmp(&b.1 .1)).map(|(i, _)| i).unwrap_or(0);
    let cross = |i_in: usize, i_out: usize| {
        let (f0, d0) = samples[i_in];
        let (f1, d1) = samples[i_out];
        f0 + (f1 - f0) * (d0 - (-level_db)) / (d0 - d1)
    };
    let mut lo = peak;
    while lo > 0 && samples[lo - 1].1 >= threshold {
        lo -= 1;
    }
    let mut hi = peak;
    while hi + 1 < samples.len() && samples[hi + 1].1 >= threshold {
        hi += 1;
    }
    let f_lo = if lo == 0 { samples[0].0 } else { cross(lo, lo - 1).min(samples[lo].0) };
    let f_hi = if hi + 1 == samples.len() { samples[hi].0 } else { cross(hi, hi + 1).max(samples[hi].0) };
    Ok((f_lo, f_hi))
}

/// Sampled bandshape for incidence `beta_i` (radians), normalized to 0 dB at its peak.
pub fn bandshape(
    interaction: &Interaction<'_>,
    transducer: &TransducerSpec,
    beta_i: f64,
    criterion: BandCriterion,
    options: &BandshapeOptions,
) -> Result<Bandshape> {
    let f_t = interaction.tangential_match()?.f_tangential;
    let (lo, hi) = options.f_range.unwrap_or((0.6 * f_t, 1.4 * f_t));
    let n = ((hi - lo) / options.step_mhz).round() as usize;
    let mut raw = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let f = lo + i as f64 * options.step_mhz;
        let e = relative_efficiency(interaction, transducer, beta_i, f, options).unwrap_or(0.0);
        raw.push((f, e));
    }
    let peak = raw.iter().map(|s| s.1).fold(0.0, f64::max);
    if !(peak > 1e-12) {
        return Err(Error::EmptyBandshape);
    }
    let samples: Vec<(f64, f64)> = raw.iter().map(|&(f, e)| (f, to_db(e / peak, options.db_scale))).collect();
    let band_edges = band_edges(&samples, criterion.level_db())?;
    let degeneracy_markers = interaction.find_degeneracies(beta_i, (lo, hi), Some(band_edges))?;
    Ok(Bandshape {
        wavelength_nm: interaction.wavelength_nm,
        samples,
        band_edges,
        ripple: criterion.level_db(),
        center: 0.5 * (band_edges.0 + band_edges.1),
        incidence_angle_deg: beta_i.to_degrees(),
        degeneracy_markers,
    })
}

/// Depth of the dip between the two Bragg peaks for incidence `beta_i`, dB (≤ 0).
pub fn midband_dip_db(
    interaction: &Interaction<'_>,
    transducer: &TransducerSpec,
    beta_i: f64,
    options: &BandshapeOptions,
) -> Result<f64> {
    let roots = interaction.bragg_frequencies(beta_i)?;
    if roots.len() < 2 {
        return Ok(0.0);
    }
    let opts = BandshapeOptions { attenuation_path_mm: None, ..*options };
    let eff = |f: f64| relative_efficiency(interaction, transducer, beta_i, f, &opts).unwrap_or(0.0);
    let f = golden_max(|f| -eff(f), roots[0], roots[1], 1e-9 * roots[1]);
    Ok(to_db(eff(f), options.db_scale))
}

/// Incidence angle (radians) detuned from tangency so that the dip between the two equal
/// Bragg peaks sits exactly `ripple_db` below them.
pub fn design_ripple_incidence(
    interaction: &Interaction<'_>,
    transducer: &TransducerSpec,
    ripple_db: f64,
    options: &BandshapeOptions,
) -> Result<f64> {
    if !(0.0..=3.0).contains(&ripple_db) {
        return Err(Error::RippleUnachievable(ripple_db));
    }
    let beta_t = interaction.tangential_match()?.incidence_angle_internal.to_radians();
    if ripple_db == 0.0 {
        return Ok(beta_t);
    }
    let h = 1e-6;
    let slope =
        interaction.wave(OpticalBranch::Outer, beta_t + h).0 - interaction.wave(OpticalBranch::Outer, beta_t - h).0;
    let dir = if slope > 0.0 { -1.0 } else { 1.0 };
    let target = |d: f64| -> f64 {
        midband_dip_db(interaction, transducer, beta_t + dir * d, options).unwrap_or(f64::NAN) + ripple_db
    };
    let max_detune = 2f64.to_radians();
    let mut hi = 1e-5;
    while target(hi) > 0.0 {
        hi *= 1.5;
        if hi > max_detune {
            return Err(Error::RippleUnachievable(ripple_db));
        }
    }
    let d = brent(target, 0.0, hi, 1e-13).map_err(|_| Error::RippleUnachievable(ripple_db))?;
    Ok(beta_t + dir * d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualBandReport {
    /// Spacing between the bands, 0 when they overlap.
    pub gap_mhz: f64,
    pub octave_lo: f64,
    pub octave_hi: f64,
    /// Bandwidth lying above twice the lowest drive frequency.
    pub bw_over_octave: f64,
    pub overlap: Option<(f64, f64)>,
}

/// Separation and octave bookkeeping of a low-frequency and a high-frequency band.
pub fn dual_band_report(a: (f64, f64), b: (f64, f64)) -> DualBandReport {
    let (low, high) = if a.0 <= b.0 { (a, b) } else { (b, a) };
    let octave_lo = low.0;
    let octave_hi = 2.0 * low.0;
    let overlap_lo = high.0.max(low.0);
    let overlap_hi = high.1.min(low.1);
    let overlap = (overlap_hi >= overlap_lo).then_some((overlap_lo, overlap_hi));
    let above = |band: (f64, f64)| (band.1 - band.0.max(octave_hi)).max(0.0);
    let bw_over_octave = match overlap {
        Some(_) => above((low.0.min(high.0), low.1.max(high.1))),
        None => above(low) + above(high),
    };
    DualBandReport { gap_mhz: (high.0 - low.1).max(0.0), octave_lo, octave_hi, bw_over_octave, overlap }
}

/// Absolute efficiency model η = sin²√(π²P L M₂ / (2λ²H)).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EfficiencyModel {
    pub wavelength_nm: f64,
    /// Geometric mean of the incident and diffracted indices.
    pub index: f64,
    pub photoelastic: f64,
    /// kg/m³.
    pub density: f64,
    /// mm/µs.
    pub velocity: f64,
    /// mm.
    pub length: f64,
    pub height: f64,
}

impl EfficiencyModel {
    pub fn new(
        material: &MaterialConstants,
        wavelength_nm: f64,
        transducer: &TransducerSpec,
        velocity: f64,
        indices: (f64, f64),
    ) -> Self {
        Self {
            wavelength_nm,
            index: (indices.0 * indices.1).sqrt(),
            photoelastic: material.effective_photoelastic,
            density: material.density,
            velocity,
            length: transducer.length,
            height: transducer.height,
        }
    }

    /// M₂ = n⁶p²/(ρV³), s³/kg.
    pub fn m2(&self) -> f64 {
        let v = self.velocity * 1e3;
        self.index.powi(6) * self.photoelastic.powi(2) / (self.density * v.powi(3))
    }

    fn coefficient(&self) -> f64 {
        let lambda = self.wavelength_nm * 1e-9;
        std::f64::consts::PI.powi(2) * self.length * self.m2() / (2.0 * lambda * lambda * self.height)
    }

    /// Efficiency at acoustic power `p_w` watts.
    pub fn efficiency(&self, p_w: f64) -> f64 {
        (self.coefficient() * p_w).sqrt().sin().powi(2)
    }

    /// Power reaching `eta` on the first rise of the sin² curve.
    pub fn power_for(&self, eta: f64) -> f64 {
        eta.clamp(0.0, 1.0).sqrt().asin().powi(2) / self.coefficient()
    }

    /// Power at full conversion.
    pub fn saturation_power(&self) -> f64 {
        self.power_for(1.0)
    }
}

/// Discrete RF drive tones.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DrivePlan {
    /// (MHz, W).
    pub tones: Vec<(f64, f64)>,
}

impl DrivePlan {
    pub fn new(tones: Vec<(f64, f64)>) -> Result<Self> {
        if tones.iter().any(|t| !(t.1 >= 0.0)) {
            return Err(Error::Config("tone power must be non-negative".into()));
        }
        Ok(Self { tones })
    }

    pub fn total_power(&self) -> f64 {
        self.tones.iter().map(|t| t.1).sum()
    }
}
