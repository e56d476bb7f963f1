//! Cascaded up/down-shifting deflectors: Doppler bookkeeping, two-colour drive, resolvable spots,
//! focal-spot sizing and addressing tables.

use crate::bragg::{refract_out, DeviceGeometry, DopplerOrder, Interaction};
use crate::design::{ColorDesign, DeviceDesign};
use crate::error::{Error, Result};
use crate::materials::MaterialConstants;
use crate::numeric::brent;

/// Drive frequency giving the same isotropic deflection angle λf/V at `lambda_other_nm`.
pub fn proportional_pair(f_ref_mhz: f64, lambda_ref_nm: f64, lambda_other_nm: f64) -> f64 {
    f_ref_mhz * lambda_ref_nm / lambda_other_nm
}

/// RF tone in integer kHz with the Doppler order of the stage it drives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedTone {
    pub khz: i64,
    pub order: DopplerOrder,
}

impl SignedTone {
    pub fn new(mhz: f64, order: DopplerOrder) -> Self {
        Self { khz: mhz_to_khz(mhz), order }
    }

    pub fn shift_khz(&self) -> i64 {
        match self.order {
            DopplerOrder::Up => self.khz,
            DopplerOrder::Down => -self.khz,
        }
    }
}

pub fn mhz_to_khz(mhz: f64) -> i64 {
    (mhz * 1e3).round() as i64
}

pub fn khz_to_mhz(khz: i64) -> f64 {
    khz as f64 * 1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DopplerLedger {
    /// Net optical frequency shift, kHz.
    pub net_khz: i64,
    /// Tone an external shifter applies to cancel the net shift.
    pub precompensation_khz: i64,
    /// First-tone minus second-tone frequency, the crossed-scan residual.
    pub axis_residual_khz: i64,
}

pub fn doppler_ledger(tones: &[SignedTone]) -> DopplerLedger {
    let net_khz = tones.iter().map(SignedTone::shift_khz).sum();
    let axis_residual_khz = match tones {
        [a, b, ..] => a.khz - b.khz,
        _ => 0,
    };
    DopplerLedger { net_khz, precompensation_khz: -net_khz, axis_residual_khz }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanMetrics {
    /// µs.
    pub access_time: f64,
    pub time_bandwidth: f64,
    pub resolvable_spots: u64,
}

/// T = D/V and N = ⌊T·B⌋.
pub fn scan_metrics(beam_mm: f64, bandwidth_mhz: f64, velocity: f64) -> ScanMetrics {
    metrics_from_time(beam_mm / velocity, bandwidth_mhz)
}

pub fn metrics_from_time(access_time_us: f64, bandwidth_mhz: f64) -> ScanMetrics {
    let tb = (access_time_us * bandwidth_mhz).max(0.0);
    ScanMetrics { access_time: access_time_us, time_bandwidth: tb, resolvable_spots: (tb + 1e-9).floor() as u64 }
}

/// Gaussian 1/e² focal spot diameter 4λf/(πD), µm.
pub fn focal_spot_um(wavelength_nm: f64, focal_mm: f64, beam_mm: f64) -> f64 {
    4.0 * wavelength_nm * 1e-3 * focal_mm / (std::f64::consts::PI * beam_mm)
}

/// Ray-transfer matrix [[A, B], [C, D]].
pub type Abcd = [[f64; 2]; 2];

fn mul(a: &Abcd, b: &Abcd) -> Abcd {
    let mut m = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    m
}

pub fn free_space(d: f64) -> Abcd {
    [[1.0, d], [0.0, 1.0]]
}

pub fn thin_lens(f: f64) -> Abcd {
    [[1.0, 0.0], [-1.0 / f, 1.0]]
}

/// Front-focal to back-focal transfer through two lenses separated by f1 + f2.
pub fn relay(f1: f64, f2: f64) -> Abcd {
    let mut m = free_space(f1);
    for e in [thin_lens(f1), free_space(f1 + f2), thin_lens(f2), free_space(f2)] {
        m = mul(&e, &m);
    }
    m
}

/// Lateral magnification of a chain of relays, composed by matrix product.
pub fn chain_magnification(relays: &[(f64, f64)]) -> f64 {
    let mut m = [[1.0, 0.0], [0.0, 1.0]];
    for &(f1, f2) in relays {
        m = mul(&relay(f1, f2), &m);
    }
    m[0][0].abs()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeConfig {
    pub stage1: DeviceGeometry,
    pub stage2: DeviceGeometry,
    /// 1/e² diameter, mm.
    pub beam_diameter: f64,
    pub fourier_focal: f64,
    pub collimator_focal: f64,
    pub objective_focal: f64,
    /// µm.
    pub trap_pitch: f64,
    /// Per-colour (red, blue) cascaded bandwidth override, MHz.
    pub usable_bandwidth: Option<(f64, f64)>,
    /// Switching time override, µs; otherwise D/V.
    pub switching_time: Option<f64>,
    /// Tone spacing in units of the resolvable spot.
    pub oversample: f64,
}

impl CascadeConfig {
    pub fn new(geometry: &DeviceGeometry) -> Self {
        let mut stage1 = geometry.clone();
        stage1.doppler = DopplerOrder::Up;
        let mut stage2 = geometry.clone();
        stage2.doppler = DopplerOrder::Down;
        Self {
            stage1,
            stage2,
            beam_diameter: 3.0,
            fourier_focal: 42.0,
            collimator_focal: 400.0,
            objective_focal: 110.0,
            trap_pitch: 8.0,
            usable_bandwidth: None,
            switching_time: None,
            oversample: 3.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.stage1.doppler == self.stage2.doppler {
            return Err(Error::InvalidCascade("stages must have opposite Doppler orders".into()));
        }
        for (name, v) in [
            ("beam diameter", self.beam_diameter),
            ("fourier focal length", self.fourier_focal),
            ("collimator focal length", self.collimator_focal),
            ("objective focal length", self.objective_focal),
            ("trap pitch", self.trap_pitch),
            ("oversample", self.oversample),
        ] {
            if !(v > 0.0) {
                return Err(Error::InvalidCascade(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Objective over collimator focal length.
    pub fn demagnification(&self) -> f64 {
        chain_magnification(&[(self.collimator_focal, self.objective_focal)])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpotChain {
    /// µm.
    pub fourier_plane: f64,
    pub trap_plane: f64,
    /// Trap pitch over trap-plane spot radius.
    pub crosstalk_margin: f64,
}

pub fn spot_chain(config: &CascadeConfig, wavelength_nm: f64) -> SpotChain {
    let fourier_plane = focal_spot_um(wavelength_nm, config.fourier_focal, config.beam_diameter);
    let trap_plane = fourier_plane * config.demagnification();
    SpotChain { fourier_plane, trap_plane, crosstalk_margin: config.trap_pitch / (0.5 * trap_plane) }
}

/// External deflection of the diffracted beam against drive frequency for one colour.
#[derive(Debug, Clone)]
pub struct DeflectionMap<'a> {
    pub interaction: Interaction<'a>,
    /// Internal incidence, radians.
    pub incidence: f64,
    /// Exit-face tilt, radians.
    pub exit_face: f64,
}

impl<'a> DeflectionMap<'a> {
    pub fn new(
        material: &'a MaterialConstants,
        geometry: &'a DeviceGeometry,
        design: &ColorDesign,
        exit_face_deg: f64,
    ) -> Result<Self> {
        Ok(Self {
            interaction: Interaction::new(material, geometry, design.wavelength_nm)?,
            incidence: design.incidence,
            exit_face: exit_face_deg.to_radians(),
        })
    }

    /// External output angle, radians.
    pub fn angle(&self, f_mhz: f64) -> Result<f64> {
        let p = self.interaction.prism_beam(self.incidence, f_mhz)?;
        Ok(refract_out(p.diffracted_index, p.diffracted, self.exit_face))
    }

    /// Drive frequency reaching `angle` within `[lo, hi]`.
    pub fn frequency_for(&self, angle: f64, lo: f64, hi: f64) -> Result<f64> {
        brent(|f| self.angle(f).unwrap_or(f64::NAN) - angle, lo, hi, 1e-10)
    }
}

/// Blue drive frequency that overlaps the red spot at `f_red`.
pub fn overlap_frequency(
    red: &DeflectionMap<'_>,
    blue: &DeflectionMap<'_>,
    f_red: f64,
    blue_range: (f64, f64),
) -> Result<f64> {
    blue.frequency_for(red.angle(f_red)?, blue_range.0, blue_range.1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AddressRow {
    pub site_i: usize,
    pub site_j: usize,
    pub f_red_x: f64,
    pub f_red_y: f64,
    pub f_blue_x: f64,
    pub f_blue_y: f64,
    pub precomp_red: f64,
    pub precomp_blue: f64,
    /// Net shift after pre-compensation, MHz.
    pub net_doppler: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AddressPlan {
    pub rows: Vec<AddressRow>,
    pub metrics_red: ScanMetrics,
    pub metrics_blue: ScanMetrics,
    /// MHz between neighbouring red tones.
    pub tone_spacing: f64,
}

/// Four drive tones plus pre-compensation per site of an `n_i × n_j` array. Stage 1 scans x with
/// an upshift, stage 2 scans y with a downshift.
pub fn addressing_table(
    n_i: usize,
    n_j: usize,
    red_center: f64,
    access_time_us: f64,
    bandwidth: (f64, f64),
    oversample: f64,
    blue_for_red: &dyn Fn(f64) -> Result<f64>,
) -> Result<AddressPlan> {
    if n_i == 0 || n_j == 0 {
        return Err(Error::Config("array dimensions must be positive".into()));
    }
    let metrics_red = metrics_from_time(access_time_us, bandwidth.0);
    let metrics_blue = metrics_from_time(access_time_us, bandwidth.1);
    let needed = (n_i.max(n_j) as f64 * oversample).ceil() as usize;
    let available = metrics_red.resolvable_spots.min(metrics_blue.resolvable_spots) as usize;
    if needed > available {
        return Err(Error::ResolvableSpotsExceeded { needed, available });
    }
    let spacing = oversample / access_time_us;
    let tone = |k: usize, n: usize| red_center + (k as f64 - 0.5 * (n as f64 - 1.0)) * spacing;
    let mut blue_cache = std::collections::BTreeMap::new();
    let mut blue_khz = |red_khz: i64| -> Result<i64> {
        if let Some(&b) = blue_cache.get(&red_khz) {
            return Ok(b);
        }
        let b = mhz_to_khz(blue_for_red(khz_to_mhz(red_khz))?);
        blue_cache.insert(red_khz, b);
        Ok(b)
    };
    let mut rows = Vec::with_capacity(n_i * n_j);
    for i in 0..n_i {
        for j in 0..n_j {
            let (rx, ry) = (mhz_to_khz(tone(i, n_i)), mhz_to_khz(tone(j, n_j)));
            let (bx, by) = (blue_khz(rx)?, blue_khz(ry)?);
            let red = doppler_ledger(&[
                SignedTone { khz: rx, order: DopplerOrder::Up },
                SignedTone { khz: ry, order: DopplerOrder::Down },
            ]);
            let blue = doppler_ledger(&[
                SignedTone { khz: bx, order: DopplerOrder::Up },
                SignedTone { khz: by, order: DopplerOrder::Down },
            ]);
            let net = red.net_khz + red.precompensation_khz + blue.net_khz + blue.precompensation_khz;
            rows.push(AddressRow {
                site_i: i,
                site_j: j,
                f_red_x: khz_to_mhz(rx),
                f_red_y: khz_to_mhz(ry),
                f_blue_x: khz_to_mhz(bx),
                f_blue_y: khz_to_mhz(by),
                precomp_red: khz_to_mhz(red.precompensation_khz),
                precomp_blue: khz_to_mhz(blue.precompensation_khz),
                net_doppler: khz_to_mhz(net),
            });
        }
    }
    Ok(AddressPlan { rows, metrics_red, metrics_blue, tone_spacing: spacing })
}

/// Overlap of two bands, MHz; zero when disjoint.
pub fn band_intersection(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let lo = a.0.max(b.0);
    let hi = a.1.min(b.1).max(lo);
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CascadeReport {
    /// (red, blue) cascaded bands, MHz.
    pub bands: ((f64, f64), (f64, f64)),
    pub access_time: f64,
    pub resolvable_spots: (u64, u64),
    pub spots_red: SpotChain,
    pub spots_blue: SpotChain,
    /// (f_red, exact blue overlap, proportional blue) at the red band centre, MHz.
    pub drive_pair: (f64, f64, f64),
    /// Net Doppler of a matched up/down tone pair per colour, kHz.
    pub net_doppler_khz: (i64, i64),
}

/// Blue drive frequency overlapping each red tone, from the exact deflection maps of a design.
pub struct OverlapMap<'a> {
    pub red: DeflectionMap<'a>,
    pub blue: DeflectionMap<'a>,
    pub blue_range: (f64, f64),
}

impl<'a> OverlapMap<'a> {
    pub fn new(material: &'a MaterialConstants, design: &'a DeviceDesign) -> Result<Self> {
        let exit = design.prism.exit_wedge_deg;
        let red = DeflectionMap::new(material, &design.geometry, &design.red, exit)?;
        let blue = DeflectionMap::new(material, &design.geometry, &design.blue, exit)?;
        let f_t = design.blue.matching.f_tangential;
        Ok(Self { red, blue, blue_range: (0.5 * f_t, 1.5 * f_t) })
    }

    pub fn blue_for(&self, f_red: f64) -> Result<f64> {
        overlap_frequency(&self.red, &self.blue, f_red, self.blue_range)
    }
}

/// Cascaded bands, timing, spot sizes and the centre drive pair for a designed device.
pub fn cascade_report(
    material: &MaterialConstants,
    design: &DeviceDesign,
    config: &CascadeConfig,
) -> Result<CascadeReport> {
    config.validate()?;
    let band = |c: &ColorDesign| c.bandshape.band_edges;
    let bands = match config.usable_bandwidth {
        Some((r, b)) => {
            let around = |c: &ColorDesign, w: f64| (c.bandshape.center - 0.5 * w, c.bandshape.center + 0.5 * w);
            (around(&design.red, r), around(&design.blue, b))
        }
        // Both stages share one momentum diagram, so each colour's cascaded band is the overlap of
        // identical stage bands.
        None => (
            band_intersection(band(&design.red), band(&design.red)),
            band_intersection(band(&design.blue), band(&design.blue)),
        ),
    };
    let velocity = design.red.matching.velocity;
    let access_time = config.switching_time.unwrap_or(config.beam_diameter / velocity);
    let m_red = metrics_from_time(access_time, bands.0 .1 - bands.0 .0);
    let m_blue = metrics_from_time(access_time, bands.1 .1 - bands.1 .0);
    let overlap = OverlapMap::new(material, design)?;
    let f_red = design.red.bandshape.center;
    let f_blue = overlap.blue_for(f_red)?;
    let f_prop = proportional_pair(f_red, design.red.wavelength_nm, design.blue.wavelength_nm);
    let net = |f: f64| {
        doppler_ledger(&[SignedTone::new(f, config.stage1.doppler), SignedTone::new(f, config.stage2.doppler)]).net_khz
    };
    Ok(CascadeReport {
        bands,
        access_time,
        resolvable_spots: (m_red.resolvable_spots, m_blue.resolvable_spots),
        spots_red: spot_chain(config, design.red.wavelength_nm),
        spots_blue: spot_chain(config, design.blue.wavelength_nm),
        drive_pair: (f_red, f_blue, f_prop),
        net_doppler_khz: (net(f_red), net(f_blue)),
    })
}
