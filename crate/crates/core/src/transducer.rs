//! Transducer apertures, their spectra and paraxial angular-spectrum propagation of the acoustic beam.
//!
//! Aperture coordinates are `u` (in the interaction plane, along the light axis, length `L`) and
//! `v` (normal to the interaction plane, height `H`); the beam propagates along `x`.

use std::sync::OnceLock;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::bragg::Interaction;
use crate::error::{Error, Result};
use crate::numeric::{gauss_legendre, golden_max};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransducerShape {
    Rectangle,
    Diamond,
    /// Diamond clipped to the central `fraction` of its length.
    TruncatedDiamond(f64),
}

impl TransducerShape {
    pub const DEFAULT_TRUNCATION: f64 = 0.75;

    pub fn label(&self) -> String {
        match self {
            TransducerShape::Rectangle => "rectangle".into(),
            TransducerShape::Diamond => "diamond".into(),
            TransducerShape::TruncatedDiamond(f) => format!("truncated-diamond({f})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransducerSpec {
    pub shape: TransducerShape,
    /// mm.
    pub length: f64,
    /// mm.
    pub height: f64,
    pub center_frequency_hint: Option<f64>,
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

impl TransducerSpec {
    pub fn rectangle(length: f64, height: f64) -> Self {
        Self { shape: TransducerShape::Rectangle, length, height, center_frequency_hint: None }
    }

    pub fn diamond(length: f64, height: f64) -> Self {
        Self { shape: TransducerShape::Diamond, length, height, center_frequency_hint: None }
    }

    pub fn truncated_diamond(length: f64, height: f64, fraction: f64) -> Self {
        Self { shape: TransducerShape::TruncatedDiamond(fraction), length, height, center_frequency_hint: None }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length > 0.0 && self.height > 0.0) {
            return Err(Error::InvalidTransducer("length and height must be positive".into()));
        }
        if let TransducerShape::TruncatedDiamond(f) = self.shape {
            if !(f > 0.0 && f <= 1.0) {
                return Err(Error::InvalidTransducer(format!("truncation fraction {f} outside (0, 1]")));
            }
        }
        Ok(())
    }

    /// Aperture function: 1 inside, 0 outside.
    pub fn aperture(&self, u: f64, v: f64) -> f64 {
        let (a, b) = (0.5 * self.length, 0.5 * self.height);
        let inside = match self.shape {
            TransducerShape::Rectangle => u.abs() <= a && v.abs() <= b,
            TransducerShape::Diamond => u.abs() / a + v.abs() / b <= 1.0,
            TransducerShape::TruncatedDiamond(f) => u.abs() <= f * a && u.abs() / a + v.abs() / b <= 1.0,
        };
        if inside {
            1.0
        } else {
            0.0
        }
    }

    /// Active area, mm².
    pub fn area(&self) -> f64 {
        let (l, h) = (self.length, self.height);
        match self.shape {
            TransducerShape::Rectangle => l * h,
            TransducerShape::Diamond => 0.5 * l * h,
            TransducerShape::TruncatedDiamond(f) => l * h * f * (1.0 - 0.5 * f),
        }
    }

    /// Fourier transform of the aperture at (k_u, k_v) rad/mm, normalized to 1 at the origin.
    /// The apertures are centrosymmetric so the transform is real.
    pub fn spectrum(&self, ku: f64, kv: f64) -> f64 {
        let (a, b) = (0.5 * self.length, 0.5 * self.height);
        match self.shape {
            TransducerShape::Rectangle => sinc(ku * a) * sinc(kv * b),
            TransducerShape::Diamond => sinc(0.5 * (ku * a + kv * b)) * sinc(0.5 * (ku * a - kv * b)),
            TransducerShape::TruncatedDiamond(f) => {
                // Integrate over u in closed form along v, numerically along u.
                let top = f * a;
                let (x, w) = gl16();
                let panels = (((ku.abs() + (kv * b / a).abs()) * top / 2.0).ceil() as usize).max(4);
                let h = top / panels as f64;
                let mut s = 0.0;
                for p in 0..panels {
                    let c = (p as f64 + 0.5) * h;
                    for (xi, wi) in x.iter().zip(w) {
                        let u = c + 0.5 * h * xi;
                        let half = b * (1.0 - u / a);
                        s += wi * 0.5 * h * 2.0 * half * sinc(kv * half) * (ku * u).cos();
                    }
                }
                2.0 * s / (self.area())
            }
        }
    }

    /// Power spectrum along the in-plane axis, dB relative to its peak.
    pub fn in_plane_db(&self, ku: f64) -> f64 {
        10.0 * self.spectrum(ku, 0.0).powi(2).log10()
    }

    /// Level of the first in-plane sidelobe, dB.
    pub fn first_sidelobe_db(&self) -> f64 {
        let p = |k: f64| self.spectrum(k, 0.0).powi(2);
        let dk = 2.0 * std::f64::consts::PI / self.length / 400.0;
        let mut k = dk;
        let mut prev = p(0.0);
        // Walk down to the first null, then up to the next maximum.
        loop {
            let cur = p(k);
            if cur > prev {
                break;
            }
            prev = cur;
            k += dk;
        }
        loop {
            let cur = p(k);
            if cur < prev {
                break;
            }
            prev = cur;
            k += dk;
        }
        let peak = golden_max(p, k - 2.0 * dk, k, 1e-12 * k);
        10.0 * p(peak).log10()
    }
}

/// Acoustic wavelength V/f, mm.
pub fn acoustic_wavelength(velocity: f64, f_mhz: f64) -> f64 {
    velocity / f_mhz
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighRange {
    /// mm.
    pub z0: f64,
    /// Whether the aperture stays within the Rayleigh range.
    pub collimated: bool,
}

/// Z₀ = H²/(bΛ) and the A < Z₀ collimation check.
pub fn rayleigh_range(spec: &TransducerSpec, velocity: f64, f_mhz: f64, b: f64, aperture_mm: f64) -> RayleighRange {
    let z0 = spec.height * spec.height / (b * acoustic_wavelength(velocity, f_mhz));
    RayleighRange { z0, collimated: aperture_mm < z0 }
}

/// Paraxial propagation constants of one acoustic beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSetup {
    pub frequency_mhz: f64,
    /// Carrier wavenumber, rad/mm.
    pub wavenumber: f64,
    /// Diffraction coefficients along (u, v).
    pub paraxial: [f64; 2],
    /// Walk-off tangents along (u, v).
    pub tan_walkoff: [f64; 2],
    /// Intensity loss, dB/mm.
    pub attenuation_db_per_mm: f64,
}

impl PropagationSetup {
    /// Isotropic medium with curvature coefficients `b` and no walk-off or loss.
    pub fn isotropic(frequency_mhz: f64, velocity: f64, b: [f64; 2]) -> Self {
        Self {
            frequency_mhz,
            wavenumber: 2.0 * std::f64::consts::PI * frequency_mhz / velocity,
            paraxial: b,
            tan_walkoff: [0.0, 0.0],
            attenuation_db_per_mm: 0.0,
        }
    }

    /// Slow shear launched along the grating axis of an interaction.
    pub fn from_interaction(interaction: &Interaction<'_>, frequency_mhz: f64, attenuation: bool) -> Result<Self> {
        let w = interaction.acoustic_walkoff()?;
        let v = interaction.velocity;
        let loss = if attenuation {
            let f_ghz = frequency_mhz * 1e-3;
            interaction.material.attenuation_coeff * f_ghz * f_ghz / v
        } else {
            0.0
        };
        Ok(Self {
            frequency_mhz,
            wavenumber: interaction.acoustic_wavenumber(frequency_mhz),
            paraxial: w.paraxial,
            tan_walkoff: [w.in_plane_deg.to_radians().tan(), w.out_of_plane_deg.to_radians().tan()],
            attenuation_db_per_mm: loss,
        })
    }

    /// Rayleigh range of an aperture of size `d` along axis `axis`, mm.
    pub fn rayleigh(&self, d: f64, axis: usize) -> f64 {
        d * d * self.wavenumber / (2.0 * std::f64::consts::PI * self.paraxial[axis])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nu: usize,
    pub nv: usize,
    /// mm.
    pub du: f64,
    pub dv: f64,
}

impl Grid {
    pub fn u(&self, i: usize) -> f64 {
        (i as f64 - 0.5 * self.nu as f64) * self.du
    }

    pub fn v(&self, j: usize) -> f64 {
        (j as f64 - 0.5 * self.nv as f64) * self.dv
    }

    /// FFT-ordered angular frequency, rad/mm.
    fn freq(n: usize, d: f64, i: usize) -> f64 {
        let k = if i < n.div_ceil(2) { i as f64 } else { i as f64 - n as f64 };
        2.0 * std::f64::consts::PI * k / (n as f64 * d)
    }

    pub fn ku(&self, i: usize) -> f64 {
        Self::freq(self.nu, self.du, i)
    }

    pub fn kv(&self, j: usize) -> f64 {
        Self::freq(self.nv, self.dv, j)
    }

    /// Power-of-two grid holding the aperture with 25% margins plus the walk-off drift.
    pub fn auto(spec: &TransducerSpec, setup: &PropagationSetup, distance: f64) -> Self {
        let extent = |size: f64, tan: f64| 2.0 * (size + (tan * distance).abs());
        let (eu, ev) = (extent(spec.length, setup.tan_walkoff[0]), extent(spec.height, setup.tan_walkoff[1]));
        let n = |e: f64, size: f64| ((32.0 * e / size).ceil() as usize).next_power_of_two().clamp(64, 1024);
        let (nu, nv) = (n(eu, spec.length), n(ev, spec.height));
        Self { nu, nv, du: eu / nu as f64, dv: ev / nv as f64 }
    }

    pub fn check(&self, spec: &TransducerSpec) -> Result<()> {
        if self.nu > 1 && spec.length / self.du < 8.0 {
            return Err(Error::Resolution(format!("{:.1} samples across the length", spec.length / self.du)));
        }
        if self.nv > 1 && spec.height / self.dv < 8.0 {
            return Err(Error::Resolution(format!("{:.1} samples across the height", spec.height / self.dv)));
        }
        Ok(())
    }
}

/// Complex envelope on a (u, v) grid at one propagation distance.
#[derive(Debug, Clone, PartialEq)]
pub struct AcousticField {
    pub grid: Grid,
    pub frequency_mhz: f64,
    /// mm.
    pub distance: f64,
    /// Row-major in v: index `j * nu + i`.
    pub data: Vec<Complex64>,
}

impl AcousticField {
    pub fn from_aperture(spec: &TransducerSpec, grid: Grid, frequency_mhz: f64) -> Self {
        let mut data = Vec::with_capacity(grid.nu * grid.nv);
        for j in 0..grid.nv {
            for i in 0..grid.nu {
                let u = if grid.nu == 1 { 0.0 } else { grid.u(i) };
                let v = if grid.nv == 1 { 0.0 } else { grid.v(j) };
                data.push(Complex64::new(spec.aperture(u, v), 0.0));
            }
        }
        Self { grid, frequency_mhz, distance: 0.0, data }
    }

    pub fn at(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.grid.nu + i]
    }

    /// ∫|a|² du dv.
    pub fn power(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.grid.du * self.grid.dv
    }

    /// Intensity-weighted mean position (u, v), mm.
    pub fn centroid(&self) -> (f64, f64) {
        let (mut su, mut sv, mut s) = (0.0, 0.0, 0.0);
        for j in 0..self.grid.nv {
            for i in 0..self.grid.nu {
                let p = self.at(i, j).norm_sqr();
                su += p * self.grid.u(i);
                sv += p * self.grid.v(j);
                s += p;
            }
        }
        (su / s, sv / s)
    }

    /// Field accumulated along the light axis, ∫ a du, for each v.
    pub fn projection(&self) -> Vec<Complex64> {
        (0..self.grid.nv).map(|j| (0..self.grid.nu).map(|i| self.at(i, j)).sum::<Complex64>() * self.grid.du).collect()
    }
}

fn fft2(data: &mut [Complex64], nu: usize, nv: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fu = if inverse { planner.plan_fft_inverse(nu) } else { planner.plan_fft_forward(nu) };
    let fv = if inverse { planner.plan_fft_inverse(nv) } else { planner.plan_fft_forward(nv) };
    for row in data.chunks_mut(nu) {
        fu.process(row);
    }
    let mut col = vec![Complex64::new(0.0, 0.0); nv];
    for i in 0..nu {
        for j in 0..nv {
            col[j] = data[j * nu + i];
        }
        fv.process(&mut col);
        for j in 0..nv {
            data[j * nu + i] = col[j];
        }
    }
    if inverse {
        let s = 1.0 / (nu * nv) as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }
}

/// Discrete spectrum of a field, scaled so that Σ|Â|² Δk_u Δk_v /(2π)² = ∫|a|² du dv.
pub fn sampled_spectrum(field: &AcousticField) -> Vec<Complex64> {
    let mut s = field.data.clone();
    fft2(&mut s, field.grid.nu, field.grid.nv, false);
    let scale = field.grid.du * field.grid.dv;
    s.iter_mut().for_each(|c| *c *= scale);
    s
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub steps: usize,
    /// Damp the 25% margins of the grid every step.
    pub absorbing: bool,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { steps: 64, absorbing: true }
    }
}

/// Angular-spectrum propagation; returns the field after every step, starting with the aperture.
pub fn propagate(
    spec: &TransducerSpec,
    setup: &PropagationSetup,
    grid: Grid,
    distance: f64,
    options: PropagationOptions,
) -> Result<Vec<AcousticField>> {
    spec.validate()?;
    grid.check(spec)?;
    if options.steps == 0 || !(distance >= 0.0) {
        return Err(Error::Resolution("need at least one step and a non-negative distance".into()));
    }
    let dx = distance / options.steps as f64;
    let k0 = setup.wavenumber;
    let amp = 10f64.powf(-setup.attenuation_db_per_mm * dx / 20.0);
    let mut kernel = Vec::with_capacity(grid.nu * grid.nv);
    for j in 0..grid.nv {
        let kv = grid.kv(j);
        for i in 0..grid.nu {
            let ku = grid.ku(i);
            let phase = -(setup.tan_walkoff[0] * ku + setup.tan_walkoff[1] * kv)
                - (setup.paraxial[0] * ku * ku + setup.paraxial[1] * kv * kv) / (2.0 * k0);
            kernel.push(Complex64::from_polar(amp, phase * dx));
        }
    }
    let mask = |n: usize, i: usize| -> f64 {
        if n == 1 {
            return 1.0;
        }
        let edge = 0.25 * n as f64;
        let d = (i as f64).min((n - 1 - i) as f64);
        if d >= edge {
            1.0
        } else {
            let s = 1.0 - d / edge;
            (-0.5 * s * s).exp()
        }
    };
    let mut field = AcousticField::from_aperture(spec, grid, setup.frequency_mhz);
    let mut out = vec![field.clone()];
    for step in 1..=options.steps {
        fft2(&mut field.data, grid.nu, grid.nv, false);
        field.data.iter_mut().zip(&kernel).for_each(|(c, k)| *c *= k);
        fft2(&mut field.data, grid.nu, grid.nv, true);
        if options.absorbing {
            for j in 0..grid.nv {
                let mv = mask(grid.nv, j);
                for i in 0..grid.nu {
                    field.data[j * grid.nu + i] *= mv * mask(grid.nu, i);
                }
            }
        }
        field.distance = dx * step as f64;
        out.push(field.clone());
    }
    Ok(out)
}

/// Mean squared departure of the projected intensity from its launch profile over the central
/// half of the height, normalized by the launch intensity squared.
pub fn projection_ripple(snapshots: &[AcousticField], height: f64) -> f64 {
    let first = &snapshots[0];
    let p0: Vec<f64> = first.projection().iter().map(|c| c.norm_sqr()).collect();
    let core: Vec<usize> = (0..first.grid.nv).filter(|&j| first.grid.v(j).abs() <= 0.25 * height).collect();
    let norm: f64 = core.iter().map(|&j| p0[j] * p0[j]).sum::<f64>() / core.len() as f64;
    let mut acc = 0.0;
    let mut count = 0usize;
    for snap in &snapshots[1..] {
        let p: Vec<f64> = snap.projection().iter().map(|c| c.norm_sqr()).collect();
        for &j in &core {
            acc += (p[j] - p0[j]).powi(2);
            count += 1;
        }
    }
    acc / count.max(1) as f64 / norm
}

#[cfg(test)]
mod tests {
    use super::*;

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn sidelobes() {
        let rect = TransducerSpec::rectangle(5.0, 3.0).first_sidelobe_db();
        assert!((rect + 13.26).abs() < 0.05, "{rect}");
        let dia = TransducerSpec::diamond(10.0, 3.0).first_sidelobe_db();
        assert!((dia + 26.52).abs() < 0.1, "{dia}");
    }

    #[test]
    fn diamond_cut_is_sinc_squared_of_double_length() {
        let d = TransducerSpec::diamond(10.0, 4.0);
        let r = TransducerSpec::rectangle(5.0, 4.0);
        for i in 0..200 {
            let k = i as f64 * 0.05;
            assert!((d.spectrum(k, 0.0) - r.spectrum(k, 0.0).powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn full_truncation_is_the_diamond() {
        let d = TransducerSpec::diamond(8.0, 4.0);
        let t = TransducerSpec::truncated_diamond(8.0, 4.0, 1.0);
        let mut worst = 0.0f64;
        for i in 0..60 {
            for j in 0..60 {
                let (ku, kv) = (i as f64 * 0.13 - 3.0, j as f64 * 0.21 - 5.0);
                worst = worst.max((d.spectrum(ku, kv) - t.spectrum(ku, kv)).abs());
            }
        }
        assert!(worst < 1e-9, "{worst}");
    }

    #[test]
    fn rectangle_spectrum_is_separable() {
        let r = TransducerSpec::rectangle(5.0, 3.0);
        for i in 0..40 {
            for j in 0..40 {
                let (ku, kv) = (i as f64 * 0.3 - 6.0, j as f64 * 0.4 - 8.0);
                let outer = r.spectrum(ku, 0.0) * r.spectrum(0.0, kv);
                assert!((r.spectrum(ku, kv) - outer).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn parseval() {
        let spec = TransducerSpec::diamond(8.0, 4.0);
        let grid = Grid { nu: 128, nv: 128, du: 0.125, dv: 0.0625 };
        let field = AcousticField::from_aperture(&spec, grid, 100.0);
        let s = sampled_spectrum(&field);
        let dk = grid.ku(1) * grid.kv(1) / (4.0 * std::f64::consts::PI.powi(2));
        let e_spec: f64 = s.iter().map(|c| c.norm_sqr()).sum::<f64>() * dk;
        assert!((e_spec - field.power()).abs() / field.power() < 1e-9);
    }

    #[test]
    fn zero_distance_is_identity() {
        let spec = TransducerSpec::rectangle(5.0, 3.0);
        let setup = PropagationSetup::isotropic(100.0, 0.62, [11.0, 52.0]);
        let grid = Grid::auto(&spec, &setup, 0.0);
        let out = propagate(&spec, &setup, grid, 0.0, PropagationOptions { steps: 1, absorbing: false }).unwrap();
        let a = AcousticField::from_aperture(&spec, grid, 100.0);
        for (x, y) in out[1].data.iter().zip(&a.data) {
            assert!((x - y).norm() < 1e-12);
        }
        assert_eq!(out[0], a);
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let spec = TransducerSpec::rectangle(5.0, 3.0);
        let setup = PropagationSetup::isotropic(100.0, 0.62, [1.0, 1.0]);
        let grid = Grid { nu: 16, nv: 16, du: 1.0, dv: 1.0 };
        assert!(matches!(
            propagate(&spec, &setup, grid, 1.0, PropagationOptions::default()),
            Err(Error::Resolution(_))
        ));
    }

    #[test]
    fn unitarity_and_walkoff() {
        let spec = TransducerSpec::rectangle(5.0, 3.0);
        let mut setup = PropagationSetup::isotropic(150.0, 0.62, [11.0, 52.0]);
        setup.tan_walkoff = [0.6, 0.0];
        let d = 10.0;
        let grid = Grid::auto(&spec, &setup, d);
        let out = propagate(&spec, &setup, grid, d, PropagationOptions { steps: 20, absorbing: false }).unwrap();
        for w in out.windows(2) {
            assert!((w[1].power() - w[0].power()).abs() / w[0].power() < 1e-6);
        }
        let (u0, _) = out[0].centroid();
        let (u1, _) = out.last().unwrap().centroid();
        assert!((u1 - u0 - d * 0.6).abs() <= grid.du, "{} vs {}", u1 - u0, d * 0.6);
    }

    #[test]
    fn attenuation_drains_power() {
        let spec = TransducerSpec::rectangle(5.0, 3.0);
        let mut setup = PropagationSetup::isotropic(150.0, 0.62, [11.0, 52.0]);
        setup.attenuation_db_per_mm = 0.5;
        let grid = Grid::auto(&spec, &setup, 4.0);
        let out = propagate(&spec, &setup, grid, 4.0, PropagationOptions { steps: 8, absorbing: true }).unwrap();
        for w in out.windows(2) {
            assert!(w[1].power() <= w[0].power());
        }
        assert!(out.last().unwrap().power() <= out[0].power() * 10f64.powf(-0.2) * (1.0 + 1e-9));
    }

    #[test]
    fn rayleigh_range_formula_and_far_field_oracle() {
        let spec = TransducerSpec::rectangle(1.0, 4.0);
        let (v, f, b) = (0.62, 150.0, 52.0);
        let r = rayleigh_range(&spec, v, f, b, 10.0);
        let z0 = 16.0 / (52.0 * (0.62 / 150.0));
        assert!((r.z0 - z0).abs() < 1e-9);
        assert!(r.collimated);
        assert!(!rayleigh_range(&spec, v, f, b, 2.0 * z0).collimated);
        let iso = rayleigh_range(&spec, v, f, 1.0, 10.0);
        assert!((iso.z0 - 16.0 / (v / f)).abs() < 1e-9);
        // Slit in v only; the far-field on-axis intensity falls as Z0/z.
        let setup = PropagationSetup::isotropic(f, v, [1.0, b]);
        let grid = Grid { nu: 1, nv: 8192, du: 1.0, dv: 0.1 };
        let z = 20.0 * z0;
        let out = propagate(&spec, &setup, grid, z, PropagationOptions { steps: 1, absorbing: false }).unwrap();
        let on_axis = out[1].at(0, grid.nv / 2).norm_sqr();
        let z0_num = on_axis * z;
        assert!((z0_num - r.z0).abs() / r.z0 < 0.25, "{z0_num} vs {}", r.z0);
    }

    #[test]
    fn far_field_matches_spectrum() {
        let spec = TransducerSpec::rectangle(1.0, 3.0);
        let (v, f, b) = (0.62, 150.0, 52.0);
        let setup = PropagationSetup::isotropic(f, v, [1.0, b]);
        let z0 = setup.rayleigh(3.0, 1);
        let z = 30.0 * z0;
        let grid = Grid { nu: 1, nv: 16384, du: 1.0, dv: 0.05 };
        let out = propagate(&spec, &setup, grid, z, PropagationOptions { steps: 1, absorbing: false }).unwrap();
        let last = out.last().unwrap();
        let mut num = Vec::new();
        let mut ana = Vec::new();
        for j in 0..grid.nv {
            let y = grid.v(j);
            let kv = setup.wavenumber * y / (b * z);
            if kv.abs() * 1.5 > 4.0 * std::f64::consts::PI {
                continue;
            }
            num.push(last.at(0, j).norm());
            ana.push(spec.spectrum(0.0, kv).abs());
        }
        assert!(correlation(&num, &ana) > 0.99);
    }

    #[test]
    fn diamond_near_field_is_smoother() {
        let setup = PropagationSetup::isotropic(150.0, 0.62, [11.0, 52.0]);
        let rect = TransducerSpec::rectangle(5.0, 3.0);
        let dia = TransducerSpec::diamond(8.0, 4.0);
        let run = |s: &TransducerSpec| {
            let z0 = setup.rayleigh(s.height, 1);
            let grid = Grid::auto(s, &setup, 0.5 * z0);
            let out = propagate(s, &setup, grid, 0.5 * z0, PropagationOptions { steps: 24, absorbing: true }).unwrap();
            projection_ripple(&out, s.height)
        };
        let (r, d) = (run(&rect), run(&dia));
        assert!(d / r < 1.0, "{d} vs {r}");
    }
}
