//! Index surfaces and eigenmodes of a uniaxial, optically active crystal.

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::materials::{DispersionEntry, MaterialConstants};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpticalBranch {
    /// Ordinary-like, lower index.
    Inner,
    /// Extraordinary-like, higher index.
    Outer,
}

impl OpticalBranch {
    pub fn label(self) -> &'static str {
        match self {
            OpticalBranch::Inner => "inner",
            OpticalBranch::Outer => "outer",
        }
    }

    pub fn other(self) -> Self {
        match self {
            OpticalBranch::Inner => OpticalBranch::Outer,
            OpticalBranch::Outer => OpticalBranch::Inner,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Birefringence {
    pub linear: f64,
    pub circular: f64,
    pub total: f64,
}

/// Extraordinary index at polar angle θ (radians) from the optic axis.
pub fn extraordinary_index(n_o: f64, n_e: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    1.0 / (c * c / (n_o * n_o) + s * s / (n_e * n_e)).sqrt()
}

fn check_theta(theta_deg: f64) -> Result<()> {
    if !(-1e-12..=90.0 + 1e-12).contains(&theta_deg) {
        return Err(Error::InvalidGeometry(format!("polar angle {theta_deg} deg outside [0, 90]")));
    }
    Ok(())
}

fn birefringence_of(c: &DispersionEntry, theta: f64) -> Birefringence {
    let linear = extraordinary_index(c.n_o, c.n_e, theta) - c.n_o;
    let cos2 = theta.cos().powi(2);
    let circular = c.rotatory_power * c.wavelength_nm * 1e-9 / std::f64::consts::PI * cos2;
    Birefringence { linear, circular, total: linear.hypot(circular) }
}

/// Linear, circular and total birefringence with the exact extraordinary index.
pub fn birefringences(material: &MaterialConstants, wavelength_nm: f64, theta_deg: f64) -> Result<Birefringence> {
    check_theta(theta_deg)?;
    let c = material.optical_constants(wavelength_nm)?;
    Ok(birefringence_of(&c, theta_deg.to_radians()))
}

/// Small-angle form with Δn_l ≈ (n_e - n_o) sin²θ.
pub fn approximate_birefringences(
    material: &MaterialConstants,
    wavelength_nm: f64,
    theta_deg: f64,
) -> Result<Birefringence> {
    check_theta(theta_deg)?;
    let c = material.optical_constants(wavelength_nm)?;
    let t = theta_deg.to_radians();
    let linear = (c.n_e - c.n_o) * t.sin().powi(2);
    let circular = c.rotatory_power * wavelength_nm * 1e-9 / std::f64::consts::PI * t.cos().powi(2);
    Ok(Birefringence { linear, circular, total: linear.hypot(circular) })
}

/// One branch of the index surface at a fixed wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalSurface {
    pub wavelength_nm: f64,
    pub branch: OpticalBranch,
    pub activity_enabled: bool,
    pub constants: DispersionEntry,
}

impl OpticalSurface {
    pub fn new(
        material: &MaterialConstants,
        wavelength_nm: f64,
        branch: OpticalBranch,
        activity_enabled: bool,
    ) -> Result<Self> {
        let constants = material.optical_constants(wavelength_nm)?;
        Ok(Self { wavelength_nm, branch, activity_enabled, constants })
    }

    /// Index at polar angle θ (radians); the surface is symmetric about the axis and the equator.
    pub fn index(&self, theta: f64) -> f64 {
        let c = &self.constants;
        let ne = extraordinary_index(c.n_o, c.n_e, theta);
        if !self.activity_enabled {
            return match self.branch {
                OpticalBranch::Inner => c.n_o,
                OpticalBranch::Outer => ne,
            };
        }
        let b = birefringence_of(c, theta);
        let mean = 0.5 * (c.n_o + ne);
        match self.branch {
            OpticalBranch::Inner => mean - 0.5 * b.total,
            OpticalBranch::Outer => mean + 0.5 * b.total,
        }
    }

    pub fn index_along(&self, direction: &Vector3<f64>) -> f64 {
        self.index(polar_angle(direction))
    }

    /// Wavevector magnitude 2πn/λ in rad/mm.
    pub fn wavenumber(&self, theta: f64) -> f64 {
        2.0 * std::f64::consts::PI * self.index(theta) / (self.wavelength_nm * 1e-6)
    }

    /// Inverts a wavevector magnitude back to an index.
    pub fn index_from_wavenumber(&self, k: f64) -> f64 {
        k * self.wavelength_nm * 1e-6 / (2.0 * std::f64::consts::PI)
    }
}

/// Polar angle from the crystal z axis, folded into [0, π/2].
pub fn polar_angle(direction: &Vector3<f64>) -> f64 {
    let c = (direction.z.abs() / direction.norm()).min(1.0);
    c.acos()
}

pub fn index_with_activity(
    material: &MaterialConstants,
    wavelength_nm: f64,
    theta_deg: f64,
    branch: OpticalBranch,
    activity_enabled: bool,
) -> Result<f64> {
    check_theta(theta_deg)?;
    Ok(OpticalSurface::new(material, wavelength_nm, branch, activity_enabled)?.index(theta_deg.to_radians()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    /// Minor-to-major axis ratio with handedness sign.
    pub ellipticity: f64,
    pub major_axis: Vector3<f64>,
    /// direction × major_axis.
    pub minor_axis: Vector3<f64>,
    /// Sign of the ellipticity.
    pub handedness: i8,
}

impl PolarizationState {
    /// Normalized complex field vector.
    pub fn jones(&self) -> Vector3<Complex64> {
        let chi = self.ellipticity.abs().atan();
        let s = f64::from(self.handedness);
        self.major_axis.map(|c| Complex64::new(c * chi.cos(), 0.0))
            + self.minor_axis.map(|c| Complex64::new(0.0, s * c * chi.sin()))
    }
}

/// Ellipticity |ξ| = Δn_c/(Δn + Δn_l).
pub fn ellipticity(b: &Birefringence) -> f64 {
    if b.total + b.linear == 0.0 {
        return 1.0;
    }
    b.circular / (b.total + b.linear)
}

/// Eigenmodes (inner, outer): equal and opposite ellipticity, inner major axis circumferential.
pub fn eigen_polarizations(
    material: &MaterialConstants,
    wavelength_nm: f64,
    direction: &Vector3<f64>,
) -> Result<(PolarizationState, PolarizationState)> {
    let n = direction.norm();
    if (n - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDirection(n));
    }
    let c = material.optical_constants(wavelength_nm)?;
    let b = birefringence_of(&c, polar_angle(direction));
    let xi = ellipticity(&b);
    let mut circ = Vector3::z().cross(direction);
    if circ.norm() < 1e-12 {
        circ = Vector3::y().cross(direction);
    }
    let circ = circ.normalize();
    let radial = direction.cross(&circ).normalize();
    let inner = PolarizationState { ellipticity: xi, major_axis: circ, minor_axis: radial, handedness: 1 };
    let outer = PolarizationState { ellipticity: -xi, major_axis: radial, minor_axis: -circ, handedness: -1 };
    Ok((inner, outer))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ActivityRow {
    pub theta_deg: f64,
    pub xi: f64,
    pub dn_l: f64,
    pub dn_c: f64,
    pub n_o_act_minus_n_o: f64,
    pub n_e_act_minus_n_e: f64,
}

/// Ellipticity and activity-induced index changes over a polar-angle sweep.
pub fn activity_curve(
    material: &MaterialConstants,
    wavelength_nm: f64,
    thetas_deg: &[f64],
) -> Result<Vec<ActivityRow>> {
    let inner_on = OpticalSurface::new(material, wavelength_nm, OpticalBranch::Inner, true)?;
    let outer_on = OpticalSurface { branch: OpticalBranch::Outer, ..inner_on };
    let inner_off = OpticalSurface { activity_enabled: false, ..inner_on };
    let outer_off = OpticalSurface { activity_enabled: false, ..outer_on };
    thetas_deg
        .iter()
        .map(|&t| {
            let b = birefringences(material, wavelength_nm, t)?;
            let r = t.to_radians();
            Ok(ActivityRow {
                theta_deg: t,
                xi: ellipticity(&b),
                dn_l: b.linear,
                dn_c: b.circular,
                n_o_act_minus_n_o: inner_on.index(r) - inner_off.index(r),
                n_e_act_minus_n_e: outer_on.index(r) - outer_off.index(r),
            })
        })
        .collect()
}
