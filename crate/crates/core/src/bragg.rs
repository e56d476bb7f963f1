//! Device geometry and momentum-space phase matching.
//!
//! The interaction plane is spanned by the light axis `w` and the grating axis `K`. A wavevector
//! making angle β with `w` inside the crystal has coordinates `(k cos β, k sin β)` in that plane.
//! Diffraction always closes as `k_d = k_i + K·K̂`; a downshifting device reverses the acoustic
//! propagation direction and therefore shares the momentum diagram of the upshifting one.

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::materials::{branch_velocity, slowness_geometry, AcousticBranch, MaterialConstants, DEFAULT_STENCIL_DEG};
use crate::numeric::{bracketed_roots, brent, golden_max};
use crate::optics::{OpticalBranch, OpticalSurface};
use crate::transducer::TransducerSpec;

pub const MAX_OPTICAL_ROTATION_DEG: f64 = 20.0;
pub const MAX_ACOUSTIC_ROTATION_DEG: f64 = 10.0;
const F_MIN_MHZ: f64 = 10.0;
const F_MAX_MHZ: f64 = 500.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DopplerOrder {
    Up,
    Down,
}

impl DopplerOrder {
    pub fn sign(self) -> f64 {
        match self {
            DopplerOrder::Up => 1.0,
            DopplerOrder::Down => -1.0,
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            DopplerOrder::Up => DopplerOrder::Down,
            DopplerOrder::Down => DopplerOrder::Up,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeviceGeometry {
    /// Rotation about the transducer-face normal, degrees.
    pub optical_rotation_deg: f64,
    /// Transducer tilt in the interaction plane, degrees.
    pub acoustic_rotation_deg: f64,
    pub doppler: DopplerOrder,
    /// Optical aperture along the acoustic column, mm.
    pub aperture_mm: f64,
    pub transducer: TransducerSpec,
    pub prism_front_deg: Option<f64>,
    pub prism_exit_deg: Option<f64>,
}

impl DeviceGeometry {
    pub fn new(optical_rotation_deg: f64, acoustic_rotation_deg: f64) -> Self {
        Self {
            optical_rotation_deg,
            acoustic_rotation_deg,
            doppler: DopplerOrder::Up,
            aperture_mm: 10.0,
            transducer: TransducerSpec::rectangle(5.0, 3.0),
            prism_front_deg: None,
            prism_exit_deg: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.optical_rotation_deg.abs() <= MAX_OPTICAL_ROTATION_DEG) {
            return Err(Error::InvalidGeometry(format!(
                "optical rotation {} deg outside ±{MAX_OPTICAL_ROTATION_DEG}",
                self.optical_rotation_deg
            )));
        }
        if !(self.acoustic_rotation_deg.abs() <= MAX_ACOUSTIC_ROTATION_DEG) {
            return Err(Error::InvalidGeometry(format!(
                "acoustic rotation {} deg outside ±{MAX_ACOUSTIC_ROTATION_DEG}",
                self.acoustic_rotation_deg
            )));
        }
        if !(self.aperture_mm > 0.0) {
            return Err(Error::InvalidGeometry("aperture length must be positive".into()));
        }
        self.transducer.validate()
    }

    pub fn frame(&self) -> InteractionFrame {
        InteractionFrame::new(self.optical_rotation_deg, self.acoustic_rotation_deg)
    }
}

/// Orthonormal interaction frame in crystal coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionFrame {
    /// Grating axis, the transducer-face normal.
    pub grating: Vector3<f64>,
    /// Light axis.
    pub light: Vector3<f64>,
    /// Normal to the interaction plane.
    pub normal: Vector3<f64>,
}

impl InteractionFrame {
    pub fn new(optical_rotation_deg: f64, acoustic_rotation_deg: f64) -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = Vector3::new(s, s, 0.0);
        let t = Vector3::new(s, -s, 0.0);
        let (so, co) = optical_rotation_deg.to_radians().sin_cos();
        let (sa, ca) = acoustic_rotation_deg.to_radians().sin_cos();
        let zp = Vector3::z() * co + t * so;
        let grating = a * ca - zp * sa;
        let light = a * sa + zp * ca;
        Self { grating, light, normal: grating.cross(&light) }
    }

    /// Unit vector at angle β (radians) from the light axis toward the grating axis.
    pub fn direction(&self, beta: f64) -> Vector3<f64> {
        let (s, c) = beta.sin_cos();
        self.light * c + self.grating * s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchSolution {
    pub f_tangential: f64,
    /// Internal angle from the light axis, degrees.
    pub incidence_angle_internal: f64,
    pub diffraction_angle_internal: f64,
    /// rad/mm.
    pub acoustic_wavenumber: f64,
    pub branch_in: OpticalBranch,
    pub branch_out: OpticalBranch,
    pub doppler_sign: f64,
    /// Slow-shear velocity along the grating axis, mm/µs.
    pub velocity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegeneracyKind {
    Midband,
    Rediffraction,
}

impl DegeneracyKind {
    pub fn label(self) -> &'static str {
        match self {
            DegeneracyKind::Midband => "midband",
            DegeneracyKind::Rediffraction => "rediffraction",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degeneracy {
    pub frequency: f64,
    pub kind: DegeneracyKind,
    pub in_band: bool,
}

/// Acoustic walk-off of the slow shear launched along the grating axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticWalkoff {
    /// Toward the light axis, degrees.
    pub in_plane_deg: f64,
    /// Out of the interaction plane, degrees.
    pub out_of_plane_deg: f64,
    pub total_deg: f64,
    /// Paraxial diffraction coefficients along (light axis, normal).
    pub paraxial: [f64; 2],
}

/// One wavelength interacting with one device.
#[derive(Debug, Clone)]
pub struct Interaction<'a> {
    pub material: &'a MaterialConstants,
    pub geometry: &'a DeviceGeometry,
    pub frame: InteractionFrame,
    pub wavelength_nm: f64,
    pub inner: OpticalSurface,
    pub outer: OpticalSurface,
    /// 2π/λ in rad/mm.
    pub k_vacuum: f64,
    /// Slow-shear velocity along the grating axis, mm/µs.
    pub velocity: f64,
}

impl<'a> Interaction<'a> {
    pub fn new(material: &'a MaterialConstants, geometry: &'a DeviceGeometry, wavelength_nm: f64) -> Result<Self> {
        geometry.validate()?;
        let frame = geometry.frame();
        let inner = OpticalSurface::new(material, wavelength_nm, OpticalBranch::Inner, true)?;
        let outer = OpticalSurface { branch: OpticalBranch::Outer, ..inner };
        let velocity = branch_velocity(material, &frame.grating, AcousticBranch::SlowShear)?;
        Ok(Self {
            material,
            geometry,
            frame,
            wavelength_nm,
            inner,
            outer,
            k_vacuum: 2.0 * std::f64::consts::PI / (wavelength_nm * 1e-6),
            velocity,
        })
    }

    pub fn with_activity(mut self, enabled: bool) -> Self {
        self.inner.activity_enabled = enabled;
        self.outer.activity_enabled = enabled;
        self
    }

    pub fn surface(&self, branch: OpticalBranch) -> &OpticalSurface {
        match branch {
            OpticalBranch::Inner => &self.inner,
            OpticalBranch::Outer => &self.outer,
        }
    }

    /// Refractive index of a branch along internal angle β.
    pub fn index(&self, branch: OpticalBranch, beta: f64) -> f64 {
        self.surface(branch).index_along(&self.frame.direction(beta))
    }

    /// In-plane wavevector (light-axis, grating-axis) components, rad/mm.
    pub fn wave(&self, branch: OpticalBranch, beta: f64) -> (f64, f64) {
        let k = self.k_vacuum * self.index(branch, beta);
        (k * beta.cos(), k * beta.sin())
    }

    /// Full wavevector in crystal coordinates.
    pub fn wavevector(&self, branch: OpticalBranch, beta: f64) -> Vector3<f64> {
        self.frame.direction(beta) * (self.k_vacuum * self.index(branch, beta))
    }

    /// Point of a branch with grating-axis coordinate `x`: returns (light-axis coordinate, β).
    pub fn light_coordinate(&self, branch: OpticalBranch, x: f64) -> Result<(f64, f64)> {
        let beta = brent(|b| self.wave(branch, b).1 - x, -1.2, 1.2, 1e-15)?;
        Ok((self.wave(branch, beta).0, beta))
    }

    /// Angle and light-axis extent of the branch's tangent point, where the surface is parallel
    /// to the grating axis.
    pub fn tangent_point(&self, branch: OpticalBranch) -> (f64, f64) {
        let beta = golden_max(|b| self.wave(branch, b).0, -0.5, 0.5, 1e-11);
        (beta, self.wave(branch, beta).0)
    }

    /// Acoustic wavenumber along the grating axis, rad/mm.
    pub fn acoustic_wavenumber(&self, f_mhz: f64) -> f64 {
        2.0 * std::f64::consts::PI * f_mhz / self.velocity
    }

    pub fn frequency_for_wavenumber(&self, k: f64) -> f64 {
        k * self.velocity / (2.0 * std::f64::consts::PI)
    }

    /// Outer→inner match where the tip of `k_i + K` skims the inner surface.
    pub fn tangential_match(&self) -> Result<MatchSolution> {
        let (beta_d, w_max) = self.tangent_point(OpticalBranch::Inner);
        let (beta_o, w_out_max) = self.tangent_point(OpticalBranch::Outer);
        if w_out_max <= w_max {
            return Err(Error::NoSolution("outer surface does not enclose the inner tangent point".into()));
        }
        let beta_i = brent(|b| self.wave(OpticalBranch::Outer, b).0 - w_max, beta_o - 0.6, beta_o, 1e-15)
            .map_err(|_| Error::NoSolution("no incidence angle reaches the inner tangent point".into()))?;
        let x_i = self.wave(OpticalBranch::Outer, beta_i).1;
        let x_d = self.wave(OpticalBranch::Inner, beta_d).1;
        let k = x_d - x_i;
        let f = self.frequency_for_wavenumber(k);
        if !(F_MIN_MHZ..=F_MAX_MHZ).contains(&f) {
            return Err(Error::NoSolution(format!("tangential frequency {f:.1} MHz")));
        }
        Ok(MatchSolution {
            f_tangential: f,
            incidence_angle_internal: beta_i.to_degrees(),
            diffraction_angle_internal: beta_d.to_degrees(),
            acoustic_wavenumber: k,
            branch_in: OpticalBranch::Outer,
            branch_out: OpticalBranch::Inner,
            doppler_sign: self.geometry.doppler.sign(),
            velocity: self.velocity,
        })
    }

    /// Light-axis mismatch of the tip of `k_i + K(f)·K̂` from the inner surface, rad/mm.
    /// Positive when the tip lies inside the surface.
    pub fn mismatch(&self, f_mhz: f64, beta_i: f64) -> Result<f64> {
        let (w_i, x_i) = self.wave(OpticalBranch::Outer, beta_i);
        let (w_s, _) = self.light_coordinate(OpticalBranch::Inner, x_i + self.acoustic_wavenumber(f_mhz))?;
        Ok(w_s - w_i)
    }

    /// Grating-axis and transverse components of an acoustic wavevector with transverse part `kt`
    /// lying on the slow-shear momentum surface at `f_mhz`.
    pub fn acoustic_on_surface(&self, f_mhz: f64, kt: f64) -> Result<(f64, f64)> {
        let two_pi_f = 2.0 * std::f64::consts::PI * f_mhz;
        let mut kp = two_pi_f / self.velocity;
        for _ in 0..50 {
            let d = (self.frame.grating * kp + self.frame.light * kt).normalize();
            let v = branch_velocity(self.material, &d, AcousticBranch::SlowShear)?;
            let k = two_pi_f / v;
            if k <= kt.abs() {
                return Err(Error::NoConvergence("acoustic surface closure"));
            }
            let next = (k * k - kt * kt).sqrt();
            if (next - kp).abs() <= 1e-13 * k {
                return Ok((next, kt));
            }
            kp = next;
        }
        Err(Error::NoConvergence("acoustic surface closure"))
    }

    /// Transverse acoustic wavenumber (along the light axis) needed to close the triangle exactly
    /// with an acoustic wavevector on its own anisotropic momentum surface.
    pub fn exact_transverse_mismatch(&self, f_mhz: f64, beta_i: f64) -> Result<f64> {
        let (w_i, x_i) = self.wave(OpticalBranch::Outer, beta_i);
        let residual = |kt: f64| -> Result<f64> {
            let (kp, _) = self.acoustic_on_surface(f_mhz, kt)?;
            let (w_s, _) = self.light_coordinate(OpticalBranch::Inner, x_i + kp)?;
            Ok(w_s - w_i - kt)
        };
        let mut k0 = self.mismatch(f_mhz, beta_i)?;
        let mut r0 = residual(k0)?;
        if r0 == 0.0 {
            return Ok(k0);
        }
        let mut k1 = k0 + r0;
        for _ in 0..60 {
            let r1 = residual(k1)?;
            if r1.abs() <= 1e-12 * (1.0 + k1.abs()) || r1 == r0 {
                return Ok(k1);
            }
            let k2 = k1 - r1 * (k1 - k0) / (r1 - r0);
            if (k2 - k1).abs() <= 1e-11 * (1.0 + k1.abs()) {
                return Ok(k2);
            }
            k0 = k1;
            r0 = r1;
            k1 = k2;
        }
        Err(Error::NoConvergence("transverse mismatch"))
    }

    /// Drive frequencies giving exact closure with the acoustic wavevector along the grating axis.
    pub fn bragg_frequencies(&self, beta_i: f64) -> Result<Vec<f64>> {
        let (_, x_i) = self.wave(OpticalBranch::Outer, beta_i);
        let (w_i, _) = self.wave(OpticalBranch::Outer, beta_i);
        let (beta_d, w_max) = self.tangent_point(OpticalBranch::Inner);
        let x_d = self.wave(OpticalBranch::Inner, beta_d).1;
        let f_peak = self.frequency_for_wavenumber(x_d - x_i);
        let excess = w_max - w_i;
        let tol = 1e-10 * w_max;
        if excess < -tol || f_peak <= 0.0 {
            return Ok(Vec::new());
        }
        if excess <= tol {
            return Ok(vec![f_peak]);
        }
        let m = |f: f64| self.mismatch(f, beta_i).unwrap_or(f64::NEG_INFINITY);
        let mut roots = Vec::new();
        let mut lo = f_peak * 0.5;
        while m(lo) > 0.0 && lo > 1e-3 {
            lo *= 0.5;
        }
        if let Ok(r) = brent(m, lo, f_peak, 1e-12) {
            roots.push(r);
        }
        let mut hi = f_peak * 1.5;
        while m(hi) > 0.0 && hi < 1e4 {
            hi *= 1.5;
        }
        if let Ok(r) = brent(m, f_peak, hi, 1e-12) {
            roots.push(r);
        }
        Ok(roots)
    }

    /// Norm of `k_i + s·K_a - k_d` evaluated with full crystal-frame vectors.
    pub fn closure_residual(&self, f_mhz: f64, beta_i: f64) -> Result<f64> {
        let k_i = self.wavevector(OpticalBranch::Outer, beta_i);
        let s = self.geometry.doppler.sign();
        let propagation = self.frame.grating * s;
        let k_a = propagation * self.acoustic_wavenumber(f_mhz);
        let target = k_i + k_a * s;
        let x = target.dot(&self.frame.grating);
        let (_, beta_d) = self.light_coordinate(OpticalBranch::Inner, x)?;
        Ok((target - self.wavevector(OpticalBranch::Inner, beta_d)).norm())
    }

    /// Mismatch for a second diffraction of the once-diffracted beam back onto the outer branch.
    pub fn degeneracy_mismatch(&self, f_mhz: f64, beta_i: f64) -> Result<f64> {
        let k = self.acoustic_wavenumber(f_mhz);
        let (_, x_i) = self.wave(OpticalBranch::Outer, beta_i);
        let x_d = x_i + k;
        let (w_d, _) = self.light_coordinate(OpticalBranch::Inner, x_d)?;
        let (w_dd, _) = self.light_coordinate(OpticalBranch::Outer, x_d + k)?;
        Ok(w_dd - w_d)
    }

    /// Degenerate double-diffraction frequencies within `f_range`, tagged against `usable_band`.
    pub fn find_degeneracies(
        &self,
        beta_i: f64,
        f_range: (f64, f64),
        usable_band: Option<(f64, f64)>,
    ) -> Result<Vec<Degeneracy>> {
        let f_t = self.tangential_match()?.f_tangential;
        let (lo, hi) = f_range;
        let n = (((hi - lo) / 0.5).ceil() as usize).max(1);
        let roots = bracketed_roots(|f| self.degeneracy_mismatch(f, beta_i).unwrap_or(f64::NAN), lo, hi, n, 1e-10);
        Ok(roots
            .into_iter()
            .map(|f| Degeneracy {
                frequency: f,
                kind: if (f - f_t).abs() <= 0.01 * f_t {
                    DegeneracyKind::Midband
                } else {
                    DegeneracyKind::Rediffraction
                },
                in_band: usable_band.is_some_and(|(a, b)| f >= a && f <= b),
            })
            .collect())
    }

    /// Walk-off and diffraction coefficients of the launched slow shear.
    pub fn acoustic_walkoff(&self) -> Result<AcousticWalkoff> {
        let g = slowness_geometry(
            self.material,
            &self.frame.grating,
            AcousticBranch::SlowShear,
            &self.frame.light,
            &self.frame.normal,
            DEFAULT_STENCIL_DEG,
        )?;
        Ok(AcousticWalkoff {
            in_plane_deg: g.tan_walkoff[0].atan().to_degrees(),
            out_of_plane_deg: g.tan_walkoff[1].atan().to_degrees(),
            total_deg: g.walkoff_deg,
            paraxial: g.paraxial,
        })
    }

    /// Internal angle of the beam diffracted at `f_mhz` from incidence `beta_i`.
    pub fn diffracted_angle(&self, f_mhz: f64, beta_i: f64) -> Result<f64> {
        let (_, x_i) = self.wave(OpticalBranch::Outer, beta_i);
        Ok(self.light_coordinate(OpticalBranch::Inner, x_i + self.acoustic_wavenumber(f_mhz))?.1)
    }

    /// Beam description for the prism solver at drive `f_mhz`.
    pub fn prism_beam(&self, beta_i: f64, f_mhz: f64) -> Result<PrismBeam> {
        let beta_d = self.diffracted_angle(f_mhz, beta_i)?;
        Ok(PrismBeam {
            incidence: beta_i,
            incident_index: self.index(OpticalBranch::Outer, beta_i),
            diffracted: beta_d,
            diffracted_index: self.index(OpticalBranch::Inner, beta_d),
        })
    }
}

/// Internal beam angles (radians from the light axis) and indices on both crystal faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrismBeam {
    pub incidence: f64,
    pub incident_index: f64,
    pub diffracted: f64,
    pub diffracted_index: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrismCut {
    /// Tilt of the entrance-face normal from the light axis, degrees.
    pub front_wedge_deg: f64,
    /// Tilt of the exit-face normal from the light axis, degrees.
    pub exit_wedge_deg: f64,
    /// Common external input direction, degrees from the light axis.
    pub input_angle_deg: f64,
    /// Common external output direction of the midband diffracted beams.
    pub output_angle_deg: f64,
}

/// Face tilt that makes two internal rays refract into one external direction.
pub fn common_face(n1: f64, beta1: f64, n2: f64, beta2: f64) -> f64 {
    let num = n1 * beta1.sin() - n2 * beta2.sin();
    let den = n1 * beta1.cos() - n2 * beta2.cos();
    if num.abs() < 1e-14 && den.abs() < 1e-14 {
        return beta1;
    }
    let alpha = num.atan2(den);
    // Pick the branch closest to the light axis.
    let wrap = |a: f64| {
        let mut a = a;
        while a > std::f64::consts::FRAC_PI_2 {
            a -= std::f64::consts::PI;
        }
        while a < -std::f64::consts::FRAC_PI_2 {
            a += std::f64::consts::PI;
        }
        a
    };
    wrap(alpha)
}

/// External direction of an internal ray leaving through a face tilted by `alpha`.
pub fn refract_out(n: f64, beta: f64, alpha: f64) -> f64 {
    alpha + (n * (beta - alpha).sin()).clamp(-1.0, 1.0).asin()
}

/// Internal direction of an external ray entering through a face tilted by `alpha`.
pub fn refract_in(n: f64, gamma: f64, alpha: f64) -> f64 {
    alpha + ((gamma - alpha).sin() / n).asin()
}

/// Entrance face refracting collinear red and blue inputs onto their Bragg angles, and exit face
/// sending both midband diffracted beams out along one common direction.
pub fn prism_cut(red: &PrismBeam, blue: &PrismBeam) -> Result<PrismCut> {
    let front = common_face(red.incident_index, red.incidence, blue.incident_index, blue.incidence);
    let exit = common_face(red.diffracted_index, red.diffracted, blue.diffracted_index, blue.diffracted);
    for a in [front, exit] {
        if a.abs().to_degrees() > 45.0 {
            return Err(Error::InfeasiblePrism(a.abs().to_degrees()));
        }
    }
    Ok(PrismCut {
        front_wedge_deg: front.to_degrees(),
        exit_wedge_deg: exit.to_degrees(),
        input_angle_deg: refract_out(red.incident_index, red.incidence, front).to_degrees(),
        output_angle_deg: refract_out(red.diffracted_index, red.diffracted, exit).to_degrees(),
    })
}
