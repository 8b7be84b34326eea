use isoshock::euler2d::{
    cfl_dt, godunov_flux, godunov_flux_with_tracer, step, support_radius_check,
    support_radius_check_radius, Axis, Background, ConeForm, ConservedField, Grid2D,
    PerturbationSpec, Primitive, RunOptions, Simulation, SupportCone,
};
use isoshock::riemann::GasState;

fn totals(f: &ConservedField) -> [f64; 4] {
    let mut s = [0.0; 4];
    for q in &f.cells {
        for k in 0..4 {
            s[k] += q[k];
        }
    }
    s.map(|v| v * f.grid.cell_area())
}

/// Net outflow of each conserved quantity through the domain boundary.
fn boundary_outflow(f: &ConservedField, bg: &Background) -> [f64; 4] {
    let g = f.grid;
    let ghost_l = bg.sample_primitive(f.t, g.x_center(0) - g.dx());
    let ghost_r = bg.sample_primitive(f.t, g.x_center(g.nx - 1) + g.dx());
    let mut out = [0.0; 4];
    for j in 0..g.ny {
        let west = godunov_flux_with_tracer(&ghost_l, &f.primitive(0, j), Axis::X).unwrap();
        let east = godunov_flux_with_tracer(&f.primitive(g.nx - 1, j), &ghost_r, Axis::X).unwrap();
        for k in 0..4 {
            out[k] += (east[k] - west[k]) * g.dy();
        }
    }
    for i in 0..g.nx {
        let bottom = f.primitive(i, 0);
        let top = f.primitive(i, g.ny - 1);
        let south = godunov_flux_with_tracer(&bottom, &bottom, Axis::Y).unwrap();
        let north = godunov_flux_with_tracer(&top, &top, Axis::Y).unwrap();
        for k in 0..4 {
            out[k] += (north[k] - south[k]) * g.dx();
        }
    }
    out
}

#[test]
fn conservation_up_to_boundary_fluxes() {
    let spec = PerturbationSpec::symmetric_default(0.3).unwrap();
    let bg = spec.background;
    let grid = Grid2D::new(1.5, 1.5, 48, 40).unwrap();
    let mut f = isoshock::euler2d::make_initial_data(&spec, grid).unwrap();
    for _ in 0..30 {
        let dt = cfl_dt(&f, 0.45).unwrap();
        let before = totals(&f);
        let flow = boundary_outflow(&f, &bg);
        let next = step(&f, &bg, dt).unwrap();
        let after = totals(&next);
        for k in 0..4 {
            let expected = before[k] - dt * flow[k];
            assert!(
                (after[k] - expected).abs() <= 1e-12 * (1.0 + before[k].abs()),
                "component {k}: {} vs {expected}",
                after[k]
            );
        }
        f = next;
    }
}

#[test]
fn mirror_symmetry_in_y_is_preserved() {
    let spec = PerturbationSpec::symmetric_default(0.4).unwrap();
    let grid = Grid2D::new(4.0, 4.0, 80, 80).unwrap();
    let mut sim = Simulation::new(spec, grid, RunOptions::default()).unwrap();
    sim.advance_to(1.0).unwrap();
    let f = sim.field();
    let ny = f.grid.ny;
    let mut worst: f64 = 0.0;
    for j in 0..ny / 2 {
        for i in 0..f.grid.nx {
            let (a, b) = (f.at(i, j), f.at(i, ny - 1 - j));
            worst = worst
                .max((a[0] - b[0]).abs())
                .max((a[1] - b[1]).abs())
                .max((a[2] + b[2]).abs())
                .max((a[3] - b[3]).abs());
        }
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn y_independent_data_reduces_to_one_dimensional_godunov() {
    let bg = Background::new(1.2, 0.8, 0.7, -0.6).unwrap();
    let grid = Grid2D::new(3.0, 1.0, 60, 6).unwrap();
    let init = |x: f64| {
        let g = bg.sample(0.0, x);
        let bump = 0.3 * (-4.0 * x * x).exp();
        GasState::new(g.rho + bump, g.u - bump, 0.0)
    };
    let mut f = ConservedField::from_fn(grid, 0.0, |x, _| Primitive::from_gas(init(x), 0.0));
    let mut line: Vec<GasState> = (0..grid.nx).map(|i| init(grid.x_center(i))).collect();
    let mut t = 0.0;
    for _ in 0..40 {
        let dt = cfl_dt(&f, 0.4).unwrap();
        let ghost_l = bg.sample(t, grid.x_center(0) - grid.dx());
        let ghost_r = bg.sample(t, grid.x_center(grid.nx - 1) + grid.dx());
        let mut ext = vec![ghost_l];
        ext.extend(line.iter().copied());
        ext.push(ghost_r);
        let fluxes: Vec<[f64; 3]> = ext
            .windows(2)
            .map(|w| godunov_flux(w[0], w[1], Axis::X).unwrap())
            .collect();
        line = (0..grid.nx)
            .map(|i| {
                let s = line[i];
                let m = s.rho * s.u - dt / grid.dx() * (fluxes[i + 1][1] - fluxes[i][1]);
                let rho = s.rho - dt / grid.dx() * (fluxes[i + 1][0] - fluxes[i][0]);
                GasState::new(rho, m / rho, 0.0)
            })
            .collect();
        f = step(&f, &bg, dt).unwrap();
        t += dt;
    }
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let p = f.primitive(i, j);
            assert_eq!(f.at(i, j), f.at(i, 0));
            assert!((p.rho - line[i].rho).abs() < 1e-12, "rho at {i}");
            assert!((p.u - line[i].u).abs() < 1e-12, "u at {i}");
            assert_eq!(p.v, 0.0);
        }
    }
}

#[test]
fn shrunken_cone_is_violated() {
    let spec = PerturbationSpec::symmetric_default(0.2).unwrap();
    let cone = SupportCone::for_background(&spec.background);
    let grid = Grid2D::with_spacing(5.0, 5.0, 0.05).unwrap();
    let mut sim = Simulation::new(spec, grid, RunOptions::default()).unwrap();
    sim.advance_to(1.5).unwrap();
    let f = sim.field();
    let full = support_radius_check(f, &cone, ConeForm::AllTime, 1e-8);
    assert!(full.ok, "{full:?}");
    let half = support_radius_check_radius(f, 0.5 * cone.radius(f.t, ConeForm::AllTime), 1e-8);
    assert!(!half.ok && half.max_violation > 1e-4, "{half:?}");
}

#[test]
fn field_dumps_round_trip() {
    let spec = PerturbationSpec::symmetric_default(0.25).unwrap();
    let grid = Grid2D::new(2.0, 1.5, 48, 36).unwrap();
    let mut sim = Simulation::new(spec, grid, RunOptions::default()).unwrap();
    sim.advance_to(0.3).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (bin, csv) = (dir.path().join("f.bin"), dir.path().join("f.csv"));
    sim.field().write_binary(&bin).unwrap();
    sim.field().write_csv(&csv).unwrap();
    let a = ConservedField::read_binary(&bin).unwrap();
    let b = ConservedField::read_csv(&csv).unwrap();
    assert_eq!(a.cells, sim.field().cells);
    assert_eq!(a.t, sim.field().t);
    assert_eq!(a.grid, grid);
    assert_eq!(b.grid, grid);
    // shortest round-trip decimal text, so CSV is exact too
    assert_eq!(b.cells, sim.field().cells);
    assert_eq!(b.t, sim.field().t);
}

#[test]
fn truncated_binary_dump_is_rejected() {
    let grid = Grid2D::new(1.0, 1.0, 4, 4).unwrap();
    let f = ConservedField::uniform(grid, Primitive::new(1.0, 0.0, 0.0, 0.0));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.bin");
    f.write_binary(&path).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    std::fs::write(&path, &bytes[..bytes.len() - 8]).unwrap();
    assert!(ConservedField::read_binary(&path).is_err());
}
