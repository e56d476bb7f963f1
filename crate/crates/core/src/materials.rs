//! Crystal acoustics: stiffness storage, the Christoffel eigenproblem and slowness-surface geometry.

use nalgebra::{Cholesky, Matrix3, Matrix6, SymmetricEigen, Vector3};

use crate::error::{Error, Result};

/// Reduced 6×6 tensor in Voigt order (xx, yy, zz, yz, xz, xy).
pub type Voigt = [[f64; 6]; 6];

const VOIGT_INDEX: [[usize; 3]; 3] = [[0, 5, 4], [5, 1, 3], [4, 3, 2]];

/// Expands a reduced tensor to the rank-4 component `T_ijkl`.
pub fn voigt_component(t: &Voigt, i: usize, j: usize, k: usize, l: usize) -> f64 {
    t[VOIGT_INDEX[i][j]][VOIGT_INDEX[k][l]]
}

/// Optical constants at one tabulated wavelength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionEntry {
    pub wavelength_nm: f64,
    pub n_o: f64,
    pub n_e: f64,
    /// Rotatory power along the optic axis, rad/m.
    pub rotatory_power: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialConstants {
    pub name: String,
    /// Stiffness, Pa.
    pub stiffness: Voigt,
    pub photoelastic: Voigt,
    /// Magnitude of the photoelastic coefficient coupling the slow-shear interaction.
    pub effective_photoelastic: f64,
    /// kg/m³.
    pub density: f64,
    /// Sorted by wavelength.
    pub dispersion: Vec<DispersionEntry>,
    /// dB/µs/GHz².
    pub attenuation_coeff: f64,
}

fn uchida_indices(lambda_um: f64) -> (f64, f64) {
    let l = lambda_um * lambda_um;
    let no2 = 1.0 + 2.5844 * l / (l - 0.1342f64.powi(2)) + 1.1557 * l / (l - 0.2638f64.powi(2));
    let ne2 = 1.0 + 2.8525 * l / (l - 0.1342f64.powi(2)) + 1.5141 * l / (l - 0.2631f64.powi(2));
    (no2.sqrt(), ne2.sqrt())
}

fn teo2_rotatory_power(lambda_um: f64) -> f64 {
    let deg_per_mm = 86.9 * (0.6328f64.powi(2) - 0.04) / (lambda_um * lambda_um - 0.04);
    deg_per_mm.to_radians() * 1e3
}

impl MaterialConstants {
    /// Paratellurite with Ohmachi–Uchida elastic constants, Uchida photoelastic constants and
    /// Uchida's Sellmeier fit; rotatory power is 86.9°/mm at 633 nm with one-oscillator dispersion.
    pub fn tellurium_dioxide() -> Self {
        let g = 1e9;
        let (c11, c12, c13, c33, c44, c66) = (55.7 * g, 51.2 * g, 21.8 * g, 105.8 * g, 26.5 * g, 65.9 * g);
        let stiffness = [
            [c11, c12, c13, 0.0, 0.0, 0.0],
            [c12, c11, c13, 0.0, 0.0, 0.0],
            [c13, c13, c33, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, c44, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, c44, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, c66],
        ];
        let (p11, p12, p13, p31, p33, p44, p66) = (0.0074, 0.187, 0.340, 0.0905, 0.240, -0.17, -0.0463);
        let photoelastic = [
            [p11, p12, p13, 0.0, 0.0, 0.0],
            [p12, p11, p13, 0.0, 0.0, 0.0],
            [p31, p31, p33, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, p44, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, p44, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, p66],
        ];
        let dispersion = [476.0, 480.0, 532.0, 633.0, 780.0, 785.0]
            .iter()
            .map(|&nm| {
                let (n_o, n_e) = uchida_indices(nm * 1e-3);
                DispersionEntry { wavelength_nm: nm, n_o, n_e, rotatory_power: teo2_rotatory_power(nm * 1e-3) }
            })
            .collect();
        Self {
            name: "TeO2".into(),
            stiffness,
            photoelastic,
            effective_photoelastic: 0.5 * (p11 - p12).abs(),
            density: 5990.0,
            dispersion,
            attenuation_coeff: 18.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = Matrix6::from_fn(|i, j| self.stiffness[i][j]);
        let scale = c.amax();
        for i in 0..6 {
            for j in 0..i {
                if (c[(i, j)] - c[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidMaterial("stiffness matrix is not symmetric".into()));
                }
            }
        }
        if Cholesky::new(c).is_none() {
            return Err(Error::InvalidMaterial("stiffness matrix is not positive-definite".into()));
        }
        if !(self.density > 0.0) {
            return Err(Error::InvalidMaterial("density must be positive".into()));
        }
        if !(self.attenuation_coeff >= 0.0) {
            return Err(Error::InvalidMaterial("attenuation coefficient must be non-negative".into()));
        }
        if self.dispersion.is_empty() {
            return Err(Error::InvalidMaterial("dispersion table is empty".into()));
        }
        for w in self.dispersion.windows(2) {
            if w[1].wavelength_nm <= w[0].wavelength_nm {
                return Err(Error::InvalidMaterial("dispersion table must be sorted by wavelength".into()));
            }
        }
        for e in &self.dispersion {
            if !(e.n_e > e.n_o && e.n_o > 1.0) {
                return Err(Error::InvalidMaterial(format!("expected n_e > n_o > 1 at {} nm", e.wavelength_nm)));
            }
        }
        Ok(())
    }

    /// Linearly interpolated optical constants.
    pub fn optical_constants(&self, wavelength_nm: f64) -> Result<DispersionEntry> {
        let t = &self.dispersion;
        let lo = t.first().map_or(f64::NAN, |e| e.wavelength_nm);
        let hi = t.last().map_or(f64::NAN, |e| e.wavelength_nm);
        let out = Error::WavelengthOutOfRange { wavelength_nm, lo_nm: lo, hi_nm: hi };
        if !(wavelength_nm >= lo - 1e-9 && wavelength_nm <= hi + 1e-9) {
            return Err(out);
        }
        if t.len() == 1 {
            return Ok(t[0]);
        }
        let i = t.partition_point(|e| e.wavelength_nm <= wavelength_nm).clamp(1, t.len() - 1);
        let (a, b) = (t[i - 1], t[i]);
        let s = (wavelength_nm - a.wavelength_nm) / (b.wavelength_nm - a.wavelength_nm);
        let mix = |x: f64, y: f64| x + s * (y - x);
        Ok(DispersionEntry {
            wavelength_nm,
            n_o: mix(a.n_o, b.n_o),
            n_e: mix(a.n_e, b.n_e),
            rotatory_power: mix(a.rotatory_power, b.rotatory_power),
        })
    }

    /// Christoffel matrix Γ_ik = c_ijkl n_j n_l / ρ in (mm/µs)².
    pub fn christoffel_matrix(&self, n: &Vector3<f64>) -> Matrix3<f64> {
        let mut g = Matrix3::zeros();
        for i in 0..3 {
            for k in 0..3 {
                let mut s = 0.0;
                for j in 0..3 {
                    for l in 0..3 {
                        s += voigt_component(&self.stiffness, i, j, k, l) * n[j] * n[l];
                    }
                }
                g[(i, k)] = s / self.density * 1e-6;
            }
        }
        g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AcousticBranch {
    SlowShear,
    FastShear,
    Longitudinal,
}

impl AcousticBranch {
    pub fn index(self) -> usize {
        match self {
            AcousticBranch::SlowShear => 0,
            AcousticBranch::FastShear => 1,
            AcousticBranch::Longitudinal => 2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            AcousticBranch::SlowShear => "slow_shear",
            AcousticBranch::FastShear => "fast_shear",
            AcousticBranch::Longitudinal => "longitudinal",
        }
    }

    pub const ALL: [AcousticBranch; 3] =
        [AcousticBranch::SlowShear, AcousticBranch::FastShear, AcousticBranch::Longitudinal];
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcousticMode {
    pub direction: Vector3<f64>,
    pub branch: AcousticBranch,
    /// mm/µs.
    pub velocity: f64,
    pub polarization: Vector3<f64>,
}

fn check_unit(n: &Vector3<f64>) -> Result<()> {
    let norm = n.norm();
    if (norm - 1.0).abs() > 1e-9 || !norm.is_finite() {
        return Err(Error::InvalidDirection(norm));
    }
    Ok(())
}

fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    let m = v.amax();
    let lead = v.iter().find(|c| c.abs() > m - 1e-12).copied().unwrap_or(1.0);
    if lead < 0.0 {
        -v
    } else {
        v
    }
}

/// Velocities and polarizations of the three acoustic modes, sorted slowest first.
pub fn solve_christoffel(material: &MaterialConstants, direction: &Vector3<f64>) -> Result<[AcousticMode; 3]> {
    check_unit(direction)?;
    let gamma = material.christoffel_matrix(direction);
    let eig = SymmetricEigen::new(gamma);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs: Vec<Vector3<f64>> = order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    if vals[0] <= 0.0 {
        return Err(Error::InvalidMaterial(format!("Christoffel matrix is not positive-definite along {direction:?}")));
    }
    let scale = vals[2];
    if (vals[1] - vals[0]).abs() <= 1e-9 * scale {
        let t = Vector3::new(-1.0, 1.0, 0.0) / 2f64.sqrt();
        let a = Vector3::new(1.0, 1.0, 0.0) / 2f64.sqrt();
        let project = |v: &Vector3<f64>| vecs[0] * vecs[0].dot(v) + vecs[1] * vecs[1].dot(v);
        let mut slow = project(&t);
        if slow.norm() < 1e-6 {
            slow = project(&a);
        }
        if slow.norm() > 1e-6 {
            let slow = slow.normalize();
            let fast = vecs[2].cross(&slow).normalize();
            vecs[0] = slow;
            vecs[1] = fast;
        }
    }
    let mode = |k: usize| AcousticMode {
        direction: *direction,
        branch: AcousticBranch::ALL[k],
        velocity: vals[k].sqrt(),
        polarization: canonical_sign(vecs[k].normalize()),
    };
    Ok([mode(0), mode(1), mode(2)])
}

/// Phase velocity of one branch, mm/µs.
pub fn branch_velocity(material: &MaterialConstants, direction: &Vector3<f64>, branch: AcousticBranch) -> Result<f64> {
    Ok(solve_christoffel(material, direction)?[branch.index()].velocity)
}

/// Local slowness-surface geometry along two transverse tangent directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlownessGeometry {
    /// µs/mm.
    pub slowness: f64,
    /// Signed tangent of the walk-off toward each tangent direction.
    pub tan_walkoff: [f64; 2],
    /// Total walk-off between phase and group directions, degrees.
    pub walkoff_deg: f64,
    /// Normalized curvature of the slowness curve in each tangent plane (1 for a sphere).
    pub curvature: [f64; 2],
    /// Second-order coefficient of the longitudinal wavenumber in transverse wavenumber,
    /// k_x ≈ k - tanψ·k_u - c·k_u²/(2k); equals the curvature when the walk-off vanishes.
    pub paraxial: [f64; 2],
}

pub const DEFAULT_STENCIL_DEG: f64 = 0.5;

/// Quadratic least-squares fit of the slowness curve over a ±`half_width_deg` stencil in the
/// planes (direction, e1) and (direction, e2).
pub fn slowness_geometry(
    material: &MaterialConstants,
    direction: &Vector3<f64>,
    branch: AcousticBranch,
    e1: &Vector3<f64>,
    e2: &Vector3<f64>,
    half_width_deg: f64,
) -> Result<SlownessGeometry> {
    check_unit(direction)?;
    let h = half_width_deg.to_radians();
    let npts = 9;
    let mut slowness = 0.0;
    let mut tan_walkoff = [0.0; 2];
    let mut curvature = [0.0; 2];
    let mut paraxial = [0.0; 2];
    for (idx, e) in [e1, e2].iter().enumerate() {
        let e = (*e - direction * direction.dot(e)).normalize();
        let mut ata = nalgebra::Matrix3::<f64>::zeros();
        let mut atb = Vector3::<f64>::zeros();
        for m in 0..npts {
            let a = -h + 2.0 * h * m as f64 / (npts - 1) as f64;
            let d = direction * a.cos() + e * a.sin();
            let modes = solve_christoffel(material, &d)?;
            let v = modes[branch.index()].velocity;
            let gap = modes
                .iter()
                .filter(|md| md.branch != branch)
                .map(|md| (md.velocity - v).abs() / v)
                .fold(f64::INFINITY, f64::min);
            if gap < 1e-3 {
                return Err(Error::IllConditionedCurvature(format!(
                    "branch {} is degenerate within the fit stencil (relative gap {gap:.2e})",
                    branch.label()
                )));
            }
            let row = Vector3::new(1.0, a, a * a);
            ata += row * row.transpose();
            atb += row * (1.0 / v);
        }
        let c = ata.cholesky().ok_or_else(|| Error::IllConditionedCurvature("singular fit".into()))?.solve(&atb);
        let (r, p, q) = (c[0], c[1] / c[0], 2.0 * c[2] / c[0]);
        slowness = r;
        tan_walkoff[idx] = -p;
        curvature[idx] = (1.0 + 2.0 * p * p - q) / (1.0 + p * p).powf(1.5);
        paraxial[idx] = 1.0 + 2.0 * p * p - q;
    }
    let walkoff_deg = (tan_walkoff[0].hypot(tan_walkoff[1])).atan().to_degrees();
    Ok(SlownessGeometry { slowness, tan_walkoff, walkoff_deg, curvature, paraxial })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkoffCurvature {
    /// Degrees.
    pub walkoff: f64,
    /// Curvature in the plane containing the crystal z axis.
    pub b_z: f64,
    /// Curvature perpendicular to that plane.
    pub b_t: f64,
}

/// Walk-off and curvatures with tangent directions fixed by the crystal z axis.
pub fn walkoff_and_curvature(
    material: &MaterialConstants,
    direction: &Vector3<f64>,
    branch: AcousticBranch,
) -> Result<WalkoffCurvature> {
    check_unit(direction)?;
    let z = Vector3::z();
    let mut ez = z - direction * direction.dot(&z);
    if ez.norm() < 1e-9 {
        ez = Vector3::x() - direction * direction.x;
    }
    let ez = ez.normalize();
    let et = direction.cross(&ez);
    let g = slowness_geometry(material, direction, branch, &ez, &et, DEFAULT_STENCIL_DEG)?;
    Ok(WalkoffCurvature { walkoff: g.walkoff_deg, b_z: g.curvature[0], b_t: g.curvature[1] })
}

/// Linear amplitude factor after `t_us` of propagation at `f_mhz`.
pub fn acoustic_attenuation(material: &MaterialConstants, f_mhz: f64, t_us: f64) -> f64 {
    let f_ghz = f_mhz * 1e-3;
    10f64.powf(-material.attenuation_coeff * f_ghz * f_ghz * t_us / 20.0)
}

/// Unit vector from polar angle θ (from z) and azimuth φ (from x), degrees.
pub fn spherical_direction(theta_deg: f64, phi_deg: f64) -> Vector3<f64> {
    let (t, p) = (theta_deg.to_radians(), phi_deg.to_radians());
    Vector3::new(t.sin() * p.cos(), t.sin() * p.sin(), t.cos())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub branch: AcousticBranch,
    pub velocity: f64,
    /// NaN where the branch is degenerate and walk-off is undefined.
    pub walkoff_deg: f64,
}

/// Velocities and walk-offs of all branches over a (θ, φ) grid, row-major in θ.
pub fn slowness_sweep(material: &MaterialConstants, thetas_deg: &[f64], phis_deg: &[f64]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(thetas_deg.len() * phis_deg.len() * 3);
    for &theta in thetas_deg {
        for &phi in phis_deg {
            let d = spherical_direction(theta, phi);
            let modes = solve_christoffel(material, &d)?;
            for m in modes.iter() {
                let walkoff = walkoff_and_curvature(material, &d, m.branch).map_or(f64::NAN, |w| w.walkoff);
                rows.push(SweepRow {
                    theta_deg: theta,
                    phi_deg: phi,
                    branch: m.branch,
                    velocity: m.velocity,
                    walkoff_deg: walkoff,
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn teo2() -> MaterialConstants {
        MaterialConstants::tellurium_dioxide()
    }

    fn dir(x: f64, y: f64, z: f64) -> Vector3<f64> {
        Vector3::new(x, y, z).normalize()
    }

    /// Roots of the characteristic cubic det(Γ - λI) by dense bisection, independent of any eigen library.
    fn cubic_roots(g: &Matrix3<f64>) -> Vec<f64> {
        let det = |l: f64| (g - Matrix3::identity() * l).determinant();
        let top = g.norm() * 2.0;
        let n = 20000;
        let mut roots = Vec::new();
        for i in 0..n {
            let (mut a, mut b) = (top * i as f64 / n as f64, top * (i + 1) as f64 / n as f64);
            if det(a).signum() != det(b).signum() {
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    if det(a).signum() == det(m).signum() {
                        a = m;
                    } else {
                        b = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        roots
    }

    #[test]
    fn default_material_is_valid() {
        teo2().validate().unwrap();
    }

    #[test]
    fn slow_shear_along_110() {
        let m = solve_christoffel(&teo2(), &dir(1.0, 1.0, 0.0)).unwrap();
        assert!((m[0].velocity - 0.62).abs() / 0.62 < 0.02, "{}", m[0].velocity);
        let t = dir(1.0, -1.0, 0.0);
        assert!(m[0].polarization.dot(&t).abs() > 1.0 - 1e-12);
    }

    #[test]
    fn shear_degeneracy_along_optic_axis() {
        let m = solve_christoffel(&teo2(), &Vector3::z()).unwrap();
        assert!((m[0].velocity - m[1].velocity).abs() < 1e-12);
        assert!(m[0].polarization.dot(&dir(1.0, -1.0, 0.0)).abs() > 1.0 - 1e-12);
    }

    #[test]
    fn rotated_direction_matches_cubic_oracle() {
        let a = 3f64.to_radians();
        let d = dir(1.0, 1.0, 0.0) * a.cos() + Vector3::z() * a.sin();
        let mat = teo2();
        let modes = solve_christoffel(&mat, &d).unwrap();
        let roots = cubic_roots(&mat.christoffel_matrix(&d));
        assert_eq!(roots.len(), 3);
        for (m, r) in modes.iter().zip(&roots) {
            assert!((m.velocity - r.sqrt()).abs() / m.velocity < 1e-9);
        }
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(matches!(solve_christoffel(&teo2(), &Vector3::new(1.0, 1.0, 0.0)), Err(Error::InvalidDirection(_))));
    }

    #[test]
    fn indefinite_stiffness_rejected() {
        let mut m = teo2();
        m.stiffness[3][3] = -1e9;
        m.stiffness[4][4] = -1e9;
        assert!(matches!(m.validate(), Err(Error::InvalidMaterial(_))));
        assert!(matches!(solve_christoffel(&m, &Vector3::z()), Err(Error::InvalidMaterial(_))));
    }

    #[test]
    fn curvature_at_110() {
        let w = walkoff_and_curvature(&teo2(), &dir(1.0, 1.0, 0.0), AcousticBranch::SlowShear).unwrap();
        assert!((w.b_z - 11.0).abs() / 11.0 < 0.1, "{}", w.b_z);
        assert!((w.b_t - 52.0).abs() / 52.0 < 0.1, "{}", w.b_t);
        assert!(w.walkoff.abs() < 1e-6);
    }

    #[test]
    fn curvature_stencil_convergence() {
        let mat = teo2();
        let d = dir(1.0, 1.0, 0.0);
        let (ez, et) = (Vector3::z(), dir(1.0, -1.0, 0.0));
        let a = slowness_geometry(&mat, &d, AcousticBranch::SlowShear, &ez, &et, 0.5).unwrap();
        let b = slowness_geometry(&mat, &d, AcousticBranch::SlowShear, &ez, &et, 0.25).unwrap();
        for k in 0..2 {
            assert!((a.curvature[k] - b.curvature[k]).abs() / a.curvature[k] < 0.01);
        }
    }

    #[test]
    fn degenerate_axis_is_ill_conditioned() {
        let r = walkoff_and_curvature(&teo2(), &Vector3::z(), AcousticBranch::SlowShear);
        assert!(matches!(r, Err(Error::IllConditionedCurvature(_))));
    }

    #[test]
    fn isotropic_sphere_has_unit_curvature() {
        let mut m = teo2();
        let (l, mu) = (50e9, 20e9);
        m.stiffness = [[0.0; 6]; 6];
        for i in 0..3 {
            for j in 0..3 {
                m.stiffness[i][j] = if i == j { l + 2.0 * mu } else { l };
            }
            m.stiffness[i + 3][i + 3] = mu;
        }
        let d = dir(0.3, 0.5, 0.8);
        let g = slowness_geometry(&m, &d, AcousticBranch::Longitudinal, &dir(1.0, 0.0, 0.0), &dir(0.0, 1.0, 0.0), 0.5)
            .unwrap();
        assert!((g.curvature[0] - 1.0).abs() < 1e-6 && (g.curvature[1] - 1.0).abs() < 1e-6);
        assert!(g.walkoff_deg.abs() < 1e-6);
    }

    #[test]
    fn mirror_axis_has_no_walkoff() {
        let mat = teo2();
        for d in [Vector3::x(), dir(1.0, 1.0, 0.0)] {
            for b in [AcousticBranch::SlowShear, AcousticBranch::Longitudinal] {
                let w = walkoff_and_curvature(&mat, &d, b).unwrap();
                assert!(w.walkoff.abs() < 1e-6, "{b:?} {d:?} {}", w.walkoff);
            }
        }
    }

    #[test]
    fn attenuation_values() {
        let mat = teo2();
        assert_eq!(acoustic_attenuation(&mat, 0.0, 5.0), 1.0);
        let a = acoustic_attenuation(&mat, 1000.0, 1.0);
        assert!((a - 10f64.powf(-0.9)).abs() < 1e-15);
        // Accumulate loss in 1 ns slices.
        let (f_ghz, t_us) = (0.2, 16.0);
        let mut db = 0.0;
        for _ in 0..16000 {
            db += 18.0 * f_ghz * f_ghz * 0.001;
        }
        let oracle = 10f64.powf(-db / 20.0);
        assert!((acoustic_attenuation(&mat, 200.0, t_us) - oracle).abs() < 1e-12);
    }

    #[test]
    fn dispersion_interpolation_and_range() {
        let mat = teo2();
        let e = mat.optical_constants(780.0).unwrap();
        assert!((e.n_o - 2.22895).abs() < 1e-4 && (e.n_e - 2.37655).abs() < 1e-4);
        let mid = mat.optical_constants(782.5).unwrap();
        let hi = mat.optical_constants(785.0).unwrap();
        assert!((mid.n_o - 0.5 * (e.n_o + hi.n_o)).abs() < 1e-12);
        assert!(matches!(mat.optical_constants(1064.0), Err(Error::WavelengthOutOfRange { .. })));
    }

    proptest! {
        #[test]
        fn eigen_residual_and_centrosymmetry(theta in 0.0f64..180.0, phi in 0.0f64..360.0) {
            let mat = teo2();
            let d = spherical_direction(theta, phi);
            let modes = solve_christoffel(&mat, &d).unwrap();
            let g = mat.christoffel_matrix(&d);
            let gn = g.norm();
            for m in &modes {
                let r = g * m.polarization - m.polarization * (m.velocity * m.velocity);
                prop_assert!(r.norm() <= 1e-9 * gn);
                prop_assert!((m.polarization.norm() - 1.0).abs() < 1e-12);
                prop_assert!(m.velocity > 0.0);
            }
            prop_assert!(modes[0].velocity <= modes[1].velocity && modes[1].velocity <= modes[2].velocity);
            for i in 0..3 {
                for j in 0..i {
                    prop_assert!(modes[i].polarization.dot(&modes[j].polarization).abs() < 1e-9);
                }
            }
            let neg = solve_christoffel(&mat, &(-d)).unwrap();
            for k in 0..3 {
                prop_assert!((neg[k].velocity - modes[k].velocity).abs() < 1e-12);
            }
        }

        #[test]
        fn slow_shear_polarization_near_110(a in -5.0f64..5.0, b in -5.0f64..5.0) {
            let d0 = dir(1.0, 1.0, 0.0);
            let t = dir(1.0, -1.0, 0.0);
            let (a, b) = (a.to_radians(), b.to_radians());
            let d = (d0 + Vector3::z() * a.tan() + t * b.tan()).normalize();
            let m = solve_christoffel(&teo2(), &d).unwrap();
            let angle = m[0].polarization.dot(&t).abs().min(1.0).acos().to_degrees();
            prop_assert!(angle < 5.0, "{}", angle);
        }
    }
}
