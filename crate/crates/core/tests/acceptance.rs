//! Acceptance checks for the TeO₂ two-colour deflector design. Runs as a plain binary and prints
//! one PASS/FAIL line per criterion; the process fails if any criterion fails.

use std::time::Instant;

use aodesign::bandshape::BandshapeOptions;
use aodesign::bragg::{DeviceGeometry, DopplerOrder, Interaction};
use aodesign::cascade::{
    addressing_table, cascade_report, doppler_ledger, proportional_pair, scan_metrics, spot_chain, CascadeConfig,
    OverlapMap, SignedTone,
};
use aodesign::design::{design_color, design_device, DesignSettings, DeviceDesign};
use aodesign::fom::{evaluate_cell, scan, CellReason, FomGrid, FomInputs};
use aodesign::materials::{
    solve_christoffel, spherical_direction, walkoff_and_curvature, AcousticBranch, MaterialConstants,
};
use aodesign::optics::{activity_curve, OpticalBranch};
use aodesign::transducer::{
    propagate, sampled_spectrum, AcousticField, Grid, PropagationOptions, PropagationSetup, TransducerSpec,
};

type Check<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn rel(value: f64, target: f64, frac: f64) -> bool {
    within(value, target, frac * target.abs())
}

fn teo2() -> MaterialConstants {
    MaterialConstants::tellurium_dioxide()
}

fn design_at(phi_o: f64, phi_a: f64) -> DeviceDesign {
    design_device(&teo2(), &DeviceGeometry::new(phi_o, phi_a), &DesignSettings::default()).expect("design")
}

fn slow_shear_velocity() -> Outcome {
    let d = spherical_direction(90.0, 45.0);
    let v = solve_christoffel(&teo2(), &d).unwrap()[0].velocity;
    Outcome { pass: rel(v, 0.62, 0.02), detail: format!("V[110] = {v:.4} mm/us (0.62 +/- 2%)") }
}

fn curvature_and_walkoff() -> Outcome {
    let m = teo2();
    let w = walkoff_and_curvature(&m, &spherical_direction(90.0, 45.0), AcousticBranch::SlowShear).unwrap();
    let g = DeviceGeometry::new(10.0, 3.0);
    let walk = Interaction::new(&m, &g, 780.0).unwrap().acoustic_walkoff().unwrap();
    let pass = rel(w.b_z, 11.0, 0.1) && rel(w.b_t, 52.0, 0.1) && within(walk.in_plane_deg.abs(), 32.0, 2.0);
    Outcome {
        pass,
        detail: format!(
            "b_z = {:.2} (11 +/- 10%), b_t = {:.2} (52 +/- 10%), walk-off {:.2} deg (32 +/- 2; total {:.2})",
            w.b_z,
            w.b_t,
            walk.in_plane_deg.abs(),
            walk.total_deg
        ),
    }
}

fn ellipticity() -> Outcome {
    let rows = activity_curve(&teo2(), 780.0, &[0.0, 10.0]).unwrap();
    let (x0, x10) = (rows[0].xi, rows[1].xi.abs());
    Outcome {
        pass: x0.abs() == 1.0 && within(x10, 0.027, 0.005),
        detail: format!("xi(0) = {x0}, |xi(10)| = {x10:.4} (0.027 +/- 0.005)"),
    }
}

fn tangential_frequencies() -> Outcome {
    let m = teo2();
    let g = DeviceGeometry::new(10.0, 3.0);
    let f = |nm: f64| Interaction::new(&m, &g, nm).unwrap().tangential_match().unwrap().f_tangential;
    let (r, b) = (f(780.0), f(480.0));
    Outcome {
        pass: rel(r, 108.0, 0.05) && rel(b, 191.0, 0.05),
        detail: format!("f_t = {r:.2} / {b:.2} MHz (108 / 191 +/- 5%)"),
    }
}

fn bandshapes(d: &DeviceDesign) -> Outcome {
    let (r, b) = (d.red.bandshape.band_edges, d.blue.bandshape.band_edges);
    let edges = rel(r.0, 97.0, 0.05) && rel(r.1, 119.0, 0.05) && rel(b.0, 174.0, 0.05) && rel(b.1, 208.0, 0.05);
    let bws = rel(d.red.bandwidth(), 21.0, 0.15) && rel(d.blue.bandwidth(), 34.0, 0.15);
    let oct = within(d.dual_band.bw_over_octave, 14.0, 5.0);
    Outcome {
        pass: edges && bws && oct,
        detail: format!(
            "red {:.2}-{:.2}, blue {:.2}-{:.2} MHz; BW {:.2} / {:.2}; BW over octave {:.2}",
            r.0,
            r.1,
            b.0,
            b.1,
            d.red.bandwidth(),
            d.blue.bandwidth(),
            d.dual_band.bw_over_octave
        ),
    }
}

fn degeneracy_gating(at_103: &DeviceDesign) -> Outcome {
    let inputs = FomInputs::new(teo2(), DeviceGeometry::new(10.0, 3.0));
    let gated = evaluate_cell(10.0, 2.0, &inputs);
    let open = evaluate_cell(10.0, 3.0, &inputs);
    let at_102 = design_at(10.0, 2.0);
    let in_band_102 = at_102.red.degeneracy_in_band() || at_102.blue.degeneracy_in_band();
    let in_band_103 = at_103.red.degeneracy_in_band() || at_103.blue.degeneracy_in_band();
    let pass =
        in_band_102 && gated.fom == 0.0 && gated.reason == CellReason::Degeneracy && !in_band_103 && open.fom > 0.0;
    Outcome {
        pass,
        detail: format!(
            "(10,2) in band {in_band_102}, fom {} [{}]; (10,3) in band {in_band_103}, fom {:.4}",
            gated.fom,
            gated.reason.code(),
            open.fom
        ),
    }
}

fn fom_argmax() -> Outcome {
    let inputs = FomInputs::new(teo2(), DeviceGeometry::new(10.0, 3.0));
    let s = scan(&FomGrid::default_grid(), &inputs, Some(4)).unwrap();
    let best = s.best();
    Outcome {
        pass: within(best.phi_o, 10.0, 1.0 + 1e-9) && within(best.phi_a, 3.0, 0.5 + 1e-9),
        detail: format!("argmax ({}, {}) fom {:.4} (10, 3 +/- one step)", best.phi_o, best.phi_a, best.fom),
    }
}

fn prism(d: &DeviceDesign) -> Outcome {
    let w = d.prism.front_wedge_deg;
    Outcome { pass: within(w.abs(), 6.14, 0.5), detail: format!("front wedge {w:.3} deg (|6.14| +/- 0.5)") }
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

fn transducer_sidelobes() -> Outcome {
    let rect = TransducerSpec::rectangle(5.0, 3.0).first_sidelobe_db();
    let dia = TransducerSpec::diamond(10.0, 3.0).first_sidelobe_db();

    let spec = TransducerSpec::diamond(8.0, 4.0);
    let grid = Grid { nu: 128, nv: 128, du: 0.125, dv: 0.0625 };
    let field = AcousticField::from_aperture(&spec, grid, 100.0);
    let s = sampled_spectrum(&field);
    let dk = grid.ku(1) * grid.kv(1) / (4.0 * std::f64::consts::PI.powi(2));
    let e_spec: f64 = s.iter().map(|c| c.norm_sqr()).sum::<f64>() * dk;
    let parseval = (e_spec - field.power()).abs() / field.power();

    let slit = TransducerSpec::rectangle(1.0, 3.0);
    let b = 52.0;
    let setup = PropagationSetup::isotropic(150.0, 0.62, [1.0, b]);
    let z = 30.0 * setup.rayleigh(3.0, 1);
    let grid = Grid { nu: 1, nv: 16384, du: 1.0, dv: 0.05 };
    let out = propagate(&slit, &setup, grid, z, PropagationOptions { steps: 1, absorbing: false }).unwrap();
    let last = out.last().unwrap();
    let (mut num, mut ana) = (Vec::new(), Vec::new());
    for j in 0..grid.nv {
        let kv = setup.wavenumber * grid.v(j) / (b * z);
        if kv.abs() * 1.5 < 4.0 * std::f64::consts::PI {
            num.push(last.at(0, j).norm());
            ana.push(slit.spectrum(0.0, kv).abs());
        }
    }
    let far = correlation(&num, &ana);
    Outcome {
        pass: within(rect, -13.3, 0.3) && within(dia, -26.5, 0.5) && parseval < 1e-9 && far > 0.99,
        detail: format!(
            "rectangle {rect:.2} dB, diamond {dia:.2} dB; Parseval error {parseval:.1e}; far-field correlation {far:.4}"
        ),
    }
}

fn scan_metric_values() -> Outcome {
    let a = scan_metrics(10.0, 21.0, 0.62);
    let b = scan_metrics(10.0, 34.0, 0.62);
    let c = scan_metrics(1.2, 15.0, 0.62);
    let pass = rel(a.access_time, 16.0, 0.02)
        && rel(a.resolvable_spots as f64, 336.0, 0.05)
        && rel(b.resolvable_spots as f64, 560.0, 0.05)
        && c.resolvable_spots.abs_diff(30) <= 1;
    Outcome {
        pass,
        detail: format!(
            "T = {:.3} us, N = {} / {}; 1.2 mm at 15 MHz N = {}",
            a.access_time, a.resolvable_spots, b.resolvable_spots, c.resolvable_spots
        ),
    }
}

fn spots() -> Outcome {
    let cfg = CascadeConfig::new(&DeviceGeometry::new(10.0, 3.0));
    let (r, b) = (spot_chain(&cfg, 780.0), spot_chain(&cfg, 480.0));
    let pass = rel(r.fourier_plane, 13.9, 0.02)
        && rel(b.fourier_plane, 8.6, 0.02)
        && rel(r.trap_plane, 3.8, 0.02)
        && rel(b.trap_plane, 2.4, 0.02);
    Outcome {
        pass,
        detail: format!(
            "Fourier plane {:.3} / {:.3} um, trap plane {:.3} / {:.3} um (demagnification {:.2}x)",
            r.fourier_plane,
            b.fourier_plane,
            r.trap_plane,
            b.trap_plane,
            1.0 / cfg.demagnification()
        ),
    }
}

fn doppler(d: &DeviceDesign) -> Outcome {
    let m = teo2();
    let matched = [80.0, 107.9, 123.456, 191.0, 230.0].iter().all(|&f| {
        doppler_ledger(&[SignedTone::new(f, DopplerOrder::Up), SignedTone::new(f, DopplerOrder::Down)]).net_khz == 0
    });
    let mut cfg = CascadeConfig::new(&d.geometry);
    cfg.usable_bandwidth = Some((15.0, 15.0));
    cfg.switching_time = Some(2.0);
    let report = cascade_report(&m, d, &cfg).unwrap();
    let overlap = OverlapMap::new(&m, d).unwrap();
    let widths = (report.bands.0 .1 - report.bands.0 .0, report.bands.1 .1 - report.bands.1 .0);
    let plan = addressing_table(10, 10, report.drive_pair.0, report.access_time, widths, cfg.oversample, &|f| {
        overlap.blue_for(f)
    });
    let (rows, zero) = match &plan {
        Ok(p) => (p.rows.len(), p.rows.iter().all(|r| r.net_doppler == 0.0)),
        Err(_) => (0, false),
    };
    Outcome {
        pass: matched && rows == 100 && zero,
        detail: format!("matched pairs net 0: {matched}; 10x10 table rows {rows}, all net 0: {zero}"),
    }
}

fn eigen_residual() -> f64 {
    let m = teo2();
    let mut worst = 0.0f64;
    for i in 0..=18 {
        for j in 0..=18 {
            let d = spherical_direction(i as f64 * 5.0, j as f64 * 5.0);
            let gamma = m.christoffel_matrix(&d);
            for mode in solve_christoffel(&m, &d).unwrap() {
                let r = gamma * mode.polarization - mode.polarization * mode.velocity.powi(2);
                worst = worst.max(r.norm() / gamma.norm());
            }
        }
    }
    worst
}

fn closure_residual() -> f64 {
    let m = teo2();
    let mut worst = 0.0f64;
    for (o, a) in [(10.0, 3.0), (6.0, 1.0), (14.0, 4.5)] {
        let g = DeviceGeometry::new(o, a);
        for nm in [780.0, 480.0] {
            let it = Interaction::new(&m, &g, nm).unwrap();
            let beta = it.tangential_match().unwrap().incidence_angle_internal.to_radians() - 0.001;
            let k_i = it.wavevector(OpticalBranch::Outer, beta).norm();
            for f in it.bragg_frequencies(beta).unwrap() {
                worst = worst.max(it.closure_residual(f, beta).unwrap() / k_i);
            }
        }
    }
    worst
}

fn f_t(phi_o: f64, phi_a: f64) -> f64 {
    let m = teo2();
    let g = DeviceGeometry::new(phi_o, phi_a);
    Interaction::new(&m, &g, 780.0).unwrap().tangential_match().unwrap().f_tangential
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

fn bandwidth_for_length(length: f64) -> f64 {
    let mut g = DeviceGeometry::new(10.0, 3.0);
    g.transducer = TransducerSpec::rectangle(length, 3.0);
    design_color(&teo2(), &g, 780.0, 0.5, false, &BandshapeOptions::default()).unwrap().bandwidth()
}

fn max_power_drift() -> f64 {
    let spec = TransducerSpec::rectangle(5.0, 3.0);
    let setup = PropagationSetup::isotropic(150.0, 0.62, [11.0, 52.0]);
    let grid = Grid::auto(&spec, &setup, 10.0);
    let out = propagate(&spec, &setup, grid, 10.0, PropagationOptions { steps: 20, absorbing: false }).unwrap();
    out.windows(2).map(|w| (w[1].power() - w[0].power()).abs() / w[0].power()).fold(0.0, f64::max)
}

fn round_trip() -> f64 {
    let mut worst = 0.0f64;
    for i in 0..200 {
        let f = 40.0 + i as f64 * 1.037;
        for (a, b) in [(780.0, 480.0), (785.0, 476.0), (633.0, 532.0)] {
            let back = proportional_pair(proportional_pair(f, a, b), b, a);
            worst = worst.max((back - f).abs() / f);
        }
    }
    worst
}

fn properties() -> Outcome {
    let eig = eigen_residual();
    let clo = closure_residual();
    let vs_o: Vec<f64> = (1..=10).map(|k| f_t(2.0 * k as f64, 3.0)).collect();
    let vs_a_pos: Vec<f64> = (0..=10).map(|k| f_t(10.0, k as f64)).collect();
    let vs_a_neg: Vec<f64> = (0..=10).map(|k| f_t(10.0, -(k as f64))).collect();
    let mono_o = strictly_increasing(&vs_o);
    let mono_a = strictly_increasing(&vs_a_pos) && strictly_increasing(&vs_a_neg);
    let scale = bandwidth_for_length(5.0) / bandwidth_for_length(20.0);
    let drift = max_power_drift();
    let rt = round_trip();
    let checks = [eig <= 1e-9, clo <= 1e-6, mono_o, mono_a, within(scale, 2.0, 0.3), drift <= 1e-6, rt <= 1e-12];
    Outcome {
        pass: checks.iter().all(|&c| c),
        detail: format!(
            "eigen residual {eig:.1e}; closure residual {clo:.1e}; f_t monotone in phi_o {mono_o}, in |phi_a| {mono_a} \
             (phi_a = 0..10: {}); BW(5 mm)/BW(20 mm) = {scale:.3}; power drift {drift:.1e}; round trip {rt:.1e}",
            vs_a_pos.iter().map(|f| format!("{f:.1}")).collect::<Vec<_>>().join(" ")
        ),
    }
}

fn main() {
    let start = Instant::now();
    let design = design_at(10.0, 3.0);
    let design_time = start.elapsed().as_secs_f64();
    let criteria: Vec<(&str, Check)> = vec![
        ("slow-shear velocity", Box::new(slow_shear_velocity)),
        ("curvatures and walk-off", Box::new(curvature_and_walkoff)),
        ("ellipticity", Box::new(ellipticity)),
        ("tangential frequencies", Box::new(tangential_frequencies)),
        ("bandshapes", Box::new(|| bandshapes(&design))),
        ("degeneracy gating", Box::new(|| degeneracy_gating(&design))),
        ("fom argmax", Box::new(fom_argmax)),
        ("prism cut", Box::new(|| prism(&design))),
        ("transducer sidelobes", Box::new(transducer_sidelobes)),
        ("scan metrics", Box::new(scan_metric_values)),
        ("spot chain", Box::new(spots)),
        ("doppler ledger", Box::new(|| doppler(&design))),
        ("property suites", Box::new(properties)),
    ];
    println!("design at (10, 3) built in {design_time:.2} s");
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = check();
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("{verdict} {:2} {name}: {} [{:.2} s]", k + 1, o.detail, t.elapsed().as_secs_f64());
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
