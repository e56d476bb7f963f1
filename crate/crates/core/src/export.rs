//! Fixed-precision CSV tables, field dumps and the plain-text design report.

use std::fmt::Write as _;

use crate::bandshape::{Bandshape, DualBandReport};
use crate::cascade::{AddressPlan, CascadeReport};
use crate::design::DeviceDesign;
use crate::fom::FomScan;
use crate::materials::SweepRow;
use crate::optics::ActivityRow;
use crate::transducer::AcousticField;

fn num(v: f64, prec: usize) -> String {
    if v.is_finite() {
        let s = format!("{v:.prec$}");
        // Avoid "-0.000".
        if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
            s.trim_start_matches('-').to_string()
        } else {
            s
        }
    } else {
        "nan".to_string()
    }
}

fn table(header: &str, rows: impl Iterator<Item = String>) -> String {
    let mut s = String::from(header);
    s.push('\n');
    for r in rows {
        s.push_str(&r);
        s.push('\n');
    }
    s
}

pub fn slowness_csv(rows: &[SweepRow]) -> String {
    table(
        "theta_deg,phi_deg,branch,velocity_mm_per_us,walkoff_deg",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{}",
                num(r.theta_deg, 4),
                num(r.phi_deg, 4),
                r.branch.label(),
                num(r.velocity, 6),
                num(r.walkoff_deg, 4)
            )
        }),
    )
}

pub fn activity_csv(rows: &[ActivityRow]) -> String {
    table(
        "theta_deg,xi,dn_l,dn_c,n_o_act_minus_n_o,n_e_act_minus_n_e",
        rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{}",
                num(r.theta_deg, 4),
                num(r.xi, 8),
                num(r.dn_l, 10),
                num(r.dn_c, 10),
                num(r.n_o_act_minus_n_o, 10),
                num(r.n_e_act_minus_n_e, 10)
            )
        }),
    )
}

/// `(f, incidence in degrees, mismatch)` rows.
pub fn matching_csv(rows: &[(f64, f64, f64)]) -> String {
    table(
        "f_MHz,theta_in_deg,mismatch_rad_per_mm",
        rows.iter().map(|r| format!("{},{},{}", num(r.0, 4), num(r.1, 6), num(r.2, 8))),
    )
}

pub fn bandshape_csv(b: &Bandshape) -> String {
    table("f_MHz,eff_dB", b.samples.iter().map(|s| format!("{},{}", num(s.0, 4), num(s.1, 6))))
}

pub fn fom_csv(scan: &FomScan) -> String {
    table(
        "phi_o_deg,phi_a_deg,bw_red,bw_blue,bw_over_octave,volume_mm3,fom,reason",
        scan.cells.iter().map(|c| {
            format!(
                "{},{},{},{},{},{},{},{}",
                num(c.phi_o, 3),
                num(c.phi_a, 3),
                num(c.bw_red, 4),
                num(c.bw_blue, 4),
                num(c.bw_over_octave, 4),
                num(c.crystal_volume, 3),
                num(c.fom, 8),
                c.reason.code()
            )
        }),
    )
}

pub fn addressing_csv(plan: &AddressPlan) -> String {
    table(
        "site_i,site_j,f_red_x_MHz,f_red_y_MHz,f_blue_x_MHz,f_blue_y_MHz,precomp_red_MHz,precomp_blue_MHz,net_doppler_MHz",
        plan.rows.iter().map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{}",
                r.site_i,
                r.site_j,
                num(r.f_red_x, 3),
                num(r.f_red_y, 3),
                num(r.f_blue_x, 3),
                num(r.f_blue_y, 3),
                num(r.precomp_red, 3),
                num(r.precomp_blue, 3),
                num(r.net_doppler, 3)
            )
        }),
    )
}

/// Projection of a field along the light axis: `v_mm, intensity`.
pub fn projection_csv(field: &AcousticField) -> String {
    let p = field.projection();
    table(
        "v_mm,intensity",
        p.iter().enumerate().map(|(j, c)| format!("{},{}", num(field.grid.v(j), 6), num(c.norm_sqr(), 10))),
    )
}

/// Text header followed by little-endian f64 (re, im) pairs, row-major in v.
pub fn field_dump(field: &AcousticField) -> Vec<u8> {
    let g = &field.grid;
    let header = format!(
        "aodesign-field 1\nnu {}\nnv {}\ndu_mm {:e}\ndv_mm {:e}\nfrequency_mhz {:e}\ndistance_mm {:e}\nend\n",
        g.nu, g.nv, g.du, g.dv, field.frequency_mhz, field.distance
    );
    let mut out = header.into_bytes();
    for c in &field.data {
        out.extend_from_slice(&c.re.to_le_bytes());
        out.extend_from_slice(&c.im.to_le_bytes());
    }
    out
}

pub fn dual_band_text(r: &DualBandReport) -> String {
    format!(
        "gap_MHz = {}\noctave_lo = {}\noctave_hi = {}\nbw_over_octave_MHz = {}\n",
        num(r.gap_mhz, 3),
        num(r.octave_lo, 3),
        num(r.octave_hi, 3),
        num(r.bw_over_octave, 3)
    )
}

/// Key-value report of a full device design.
pub fn design_report(design: &DeviceDesign, scan: Option<&FomScan>, cascade: Option<&CascadeReport>) -> String {
    let mut s = String::new();
    let g = &design.geometry;
    let _ = writeln!(s, "[geometry]");
    let _ = writeln!(s, "optical_rotation_deg = {}", num(g.optical_rotation_deg, 3));
    let _ = writeln!(s, "acoustic_rotation_deg = {}", num(g.acoustic_rotation_deg, 3));
    let _ = writeln!(s, "aperture_mm = {}", num(g.aperture_mm, 3));
    let _ = writeln!(
        s,
        "transducer = {} {} x {} mm",
        g.transducer.shape.label(),
        num(g.transducer.length, 3),
        num(g.transducer.height, 3)
    );
    if let Some(scan) = scan {
        let b = scan.best();
        let _ = writeln!(s, "\n[optimum]");
        let _ = writeln!(s, "cells = {}", scan.cells.len());
        let _ = writeln!(s, "phi_o_deg = {}", num(b.phi_o, 3));
        let _ = writeln!(s, "phi_a_deg = {}", num(b.phi_a, 3));
        let _ = writeln!(s, "fom = {}", num(b.fom, 8));
        let _ = writeln!(s, "reason = {}", b.reason.code());
    }
    for (name, c) in [("red", &design.red), ("blue", &design.blue)] {
        let _ = writeln!(s, "\n[{name}]");
        let _ = writeln!(s, "wavelength_nm = {}", num(c.wavelength_nm, 1));
        let _ = writeln!(s, "f_tangential_MHz = {}", num(c.matching.f_tangential, 3));
        let _ = writeln!(s, "tangential_incidence_deg = {}", num(c.matching.incidence_angle_internal, 4));
        let _ = writeln!(s, "design_incidence_deg = {}", num(c.bandshape.incidence_angle_deg, 4));
        let _ = writeln!(s, "ripple_dB = {}", num(c.ripple_db, 3));
        let _ = writeln!(s, "band_lo_MHz = {}", num(c.bandshape.band_edges.0, 3));
        let _ = writeln!(s, "band_hi_MHz = {}", num(c.bandshape.band_edges.1, 3));
        let _ = writeln!(s, "bandwidth_MHz = {}", num(c.bandwidth(), 3));
        let _ = writeln!(s, "center_MHz = {}", num(c.bandshape.center, 3));
        for d in &c.bandshape.degeneracy_markers {
            let _ = writeln!(
                s,
                "degeneracy = {} MHz {} {}",
                num(d.frequency, 3),
                d.kind.label(),
                if d.in_band { "in_band" } else { "out_of_band" }
            );
        }
    }
    let _ = writeln!(s, "\n[dual_band]");
    s.push_str(&dual_band_text(&design.dual_band));
    let _ = writeln!(s, "\n[prism]");
    let _ = writeln!(s, "front_wedge_deg = {}", num(design.prism.front_wedge_deg, 3));
    let _ = writeln!(s, "exit_wedge_deg = {}", num(design.prism.exit_wedge_deg, 3));
    let _ = writeln!(s, "input_angle_deg = {}", num(design.prism.input_angle_deg, 3));
    let _ = writeln!(s, "output_angle_deg = {}", num(design.prism.output_angle_deg, 3));
    let w = &design.walkoff;
    let _ = writeln!(s, "\n[acoustic]");
    let _ = writeln!(s, "walkoff_inplane_deg = {}", num(w.in_plane_deg, 3));
    let _ = writeln!(s, "walkoff_out_of_plane_deg = {}", num(w.out_of_plane_deg, 3));
    let _ = writeln!(s, "walkoff_total_deg = {}", num(w.total_deg, 3));
    let _ = writeln!(s, "paraxial_coefficients = {}, {}", num(w.paraxial[0], 3), num(w.paraxial[1], 3));
    if let Some(c) = cascade {
        let _ = writeln!(s, "\n[cascade]");
        let _ = writeln!(s, "band_red_MHz = {} - {}", num(c.bands.0 .0, 3), num(c.bands.0 .1, 3));
        let _ = writeln!(s, "band_blue_MHz = {} - {}", num(c.bands.1 .0, 3), num(c.bands.1 .1, 3));
        let _ = writeln!(s, "access_time_us = {}", num(c.access_time, 4));
        let _ = writeln!(s, "resolvable_spots_red = {}", c.resolvable_spots.0);
        let _ = writeln!(s, "resolvable_spots_blue = {}", c.resolvable_spots.1);
        let _ = writeln!(s, "spot_fourier_red_um = {}", num(c.spots_red.fourier_plane, 3));
        let _ = writeln!(s, "spot_fourier_blue_um = {}", num(c.spots_blue.fourier_plane, 3));
        let _ = writeln!(s, "spot_trap_red_um = {}", num(c.spots_red.trap_plane, 3));
        let _ = writeln!(s, "spot_trap_blue_um = {}", num(c.spots_blue.trap_plane, 3));
        let _ = writeln!(s, "crosstalk_margin_red = {}", num(c.spots_red.crosstalk_margin, 3));
        let _ = writeln!(s, "crosstalk_margin_blue = {}", num(c.spots_blue.crosstalk_margin, 3));
        let _ = writeln!(s, "drive_red_MHz = {}", num(c.drive_pair.0, 3));
        let _ = writeln!(s, "drive_blue_overlap_MHz = {}", num(c.drive_pair.1, 3));
        let _ = writeln!(s, "drive_blue_proportional_MHz = {}", num(c.drive_pair.2, 3));
        let _ = writeln!(s, "net_doppler_red_kHz = {}", c.net_doppler_khz.0);
        let _ = writeln!(s, "net_doppler_blue_kHz = {}", c.net_doppler_khz.1);
    }
    s
}

/// Reads `key = value` lines of a report into pairs; section headers are prefixed to keys.
pub fn parse_report(text: &str) -> Vec<(String, String)> {
    let mut section = String::new();
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.to_string();
        } else if let Some((k, v)) = line.split_once(" = ") {
            out.push((format!("{section}.{k}"), v.to_string()));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_formatting() {
        assert_eq!(num(-0.00001, 3), "0.000");
        assert_eq!(num(1.23456, 2), "1.23");
        assert_eq!(num(f64::NAN, 2), "nan");
    }

    #[test]
    fn tables_have_header_and_newline() {
        let s = matching_csv(&[(100.0, -3.5, 0.01)]);
        assert_eq!(s, "f_MHz,theta_in_deg,mismatch_rad_per_mm\n100.0000,-3.500000,0.01000000\n");
    }

    #[test]
    fn report_parses_back() {
        let r = parse_report("[red]\nband_lo_MHz = 97.1\n\n[prism]\nfront_wedge_deg = -5.8\n");
        assert_eq!(r[0], ("red.band_lo_MHz".to_string(), "97.1".to_string()));
        assert_eq!(r[1].0, "prism.front_wedge_deg");
    }
}
