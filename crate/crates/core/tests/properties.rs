use lwr_junction::kinetic::{bgk_step, kinetic_dissipation_check, psi, xi_grids, KineticState, SpaceGrid, XiGrid};
use lwr_junction::network::{l1_distance, GodunovSolver, RoadProfile};
use lwr_junction::sampling::{random_entropy, random_flux, random_germ_member, random_junction, random_state, rng};
use lwr_junction::scenario::ScenarioConfig;
use lwr_junction::table1::Variant;
use lwr_junction::{
    chi_moment, classify_state, entropy_flux_eval, germ_dissipation, godunov_flux, holden_risebro_convert,
    holden_risebro_inverse, self_similar_eval, solve_max_dissipation, solve_riemann, xi, Direction, FluxProgram,
    Junction, Side, StateClass, Weight,
};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn junction(seed: u64) -> (Junction, ChaCha8Rng) {
    let mut r = rng(seed);
    let j = random_junction(&mut r, 3, 3);
    (j, r)
}

fn cells(r: &mut ChaCha8Rng, j: &Junction, nx: usize) -> Vec<Vec<f64>> {
    j.roads()
        .map(|(_, road)| {
            let (a, b) = road.flux.domain();
            (0..nx).map(|_| r.gen_range(a..=b)).collect()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn godunov_flux_is_monotone(seed in any::<u64>(), u in 0.0..1.0f64, v in 0.0..1.0f64, w in 0.0..1.0f64) {
        let f = random_flux(&mut rng(seed), 0.0, 1.0);
        let (lo, hi) = (u.min(v), u.max(v));
        let tol = 1e-14;
        prop_assert!(godunov_flux(&f, lo, w).unwrap() <= godunov_flux(&f, hi, w).unwrap() + tol);
        prop_assert!(godunov_flux(&f, w, lo).unwrap() + tol >= godunov_flux(&f, w, hi).unwrap());
    }

    #[test]
    fn godunov_flux_is_the_flux_of_the_stationary_trace(seed in any::<u64>(), u in 0.0..1.0f64, v in 0.0..1.0f64) {
        let f = random_flux(&mut rng(seed), 0.0, 1.0);
        // a stationary shock is the only plateau that can straddle speed 0
        prop_assume!(u >= v || (f.eval(u) - f.eval(v)).abs() > 1e-9);
        let g = godunov_flux(&f, u, v).unwrap();
        for side in [Side::FromLeft, Side::FromRight] {
            prop_assert!((f.eval(self_similar_eval(&f, u, v, 0.0, side)) - g).abs() <= 1e-12);
        }
    }

    #[test]
    fn entropy_flux_derivative(seed in any::<u64>(), t in 0.01..0.99f64) {
        let mut r = rng(seed);
        let f = random_flux(&mut r, 0.0, 1.0);
        let e = random_entropy(&mut r, &f);
        let h = 1e-6;
        let kinks: Vec<f64> = f.nodes().iter().chain(e.knots()).copied().collect();
        prop_assume!(kinks.iter().all(|k| (k - t).abs() > 2.0 * h));
        let g = |x: f64| entropy_flux_eval(&e, &f, x).unwrap();
        let numeric = (g(t + h) - g(t - h)) / (2.0 * h);
        prop_assert!((numeric - e.right_limit(t) * f.slope_right(t)).abs() <= 1e-6);
    }

    #[test]
    fn chi_minimizes_the_discrete_entropy_moment(seed in any::<u64>()) {
        let mut r = rng(seed);
        let f = random_flux(&mut r, 0.0, 1.0);
        let e = random_entropy(&mut r, &f);
        let dxi = 1.0 / 200.0;
        let grid = XiGrid::new(&f, Direction::In, dxi).unwrap();
        let g: Vec<f64> = (0..grid.len()).map(|_| r.gen_range(0.0..=1.0)).collect();
        let rho = grid.moment(&g);
        let edges = grid.edges();
        let discrete: f64 = (0..grid.len())
            .map(|k| e.right_limit(0.5 * (edges[k] + edges[k + 1])) * g[k] * grid.widths()[k])
            .sum();
        // the weight η̂' varies by at most its Lipschitz bound over a cell
        let slack = 4.0 * dxi + e.highest_slope().abs().max(e.lowest_slope().abs()) * dxi;
        prop_assert!(discrete >= chi_moment(rho, Weight::EntropyDerivative(&e)) - chi_moment(0.0, Weight::EntropyDerivative(&e)) - slack);
    }

    #[test]
    fn riemann_traces_are_fixed_points(seed in any::<u64>()) {
        let (j, mut r) = junction(seed);
        let rho = random_state(&mut r, &j);
        let sol = solve_riemann(&j, &rho).unwrap();
        prop_assert_ne!(classify_state(&j, &sol.trace_rho).unwrap(), StateClass::NotFixed);
        let again = solve_riemann(&j, &sol.trace_rho).unwrap();
        for (a, b) in sol.trace_flux.iter().zip(&again.trace_flux) {
            prop_assert!((a - b).abs() <= 1e-9 * j.flux_scale());
        }
    }

    #[test]
    fn riemann_balances_the_junction(seed in any::<u64>()) {
        let (j, mut r) = junction(seed);
        let rho = random_state(&mut r, &j);
        let sol = solve_riemann(&j, &rho).unwrap();
        prop_assert!(sol.balance_residual(j.n()) <= 1e-10);
        let at_level = xi(&j, &rho, sol.level, sol.z).unwrap();
        prop_assert!(at_level.abs() <= 1e-10);
        for (h, (dir, road)) in j.roads().enumerate() {
            let expected = match dir {
                Direction::In => road.flux.godunov(rho[h], sol.hat_rho[h]),
                Direction::Out => road.flux.godunov(sol.hat_rho[h], rho[h]),
            };
            prop_assert!((sol.trace_flux[h] - expected).abs() <= 1e-12);
        }
    }

    #[test]
    fn xi_is_nonincreasing(seed in any::<u64>(), m1 in -4.0..4.0f64, m2 in -4.0..4.0f64, z1 in 0.0..=1.0f64, z2 in 0.0..=1.0f64) {
        let (j, mut r) = junction(seed);
        let rho = random_state(&mut r, &j);
        let (ml, mh) = (m1.min(m2), m1.max(m2));
        let (zl, zh) = (z1.min(z2), z1.max(z2));
        let tol = 1e-12;
        prop_assert!(xi(&j, &rho, ml, z1).unwrap() + tol >= xi(&j, &rho, mh, z1).unwrap());
        prop_assert!(xi(&j, &rho, m1, zl).unwrap() + tol >= xi(&j, &rho, m1, zh).unwrap());
    }

    #[test]
    fn priority_is_monotone(seed in any::<u64>(), m1 in -4.0..4.0f64, m2 in -4.0..4.0f64, z1 in 0.0..=1.0f64, z2 in 0.0..=1.0f64) {
        let (j, _) = junction(seed);
        let (ml, mh) = (m1.min(m2), m1.max(m2));
        let (zl, zh) = (z1.min(z2), z1.max(z2));
        for (_, road) in j.roads() {
            prop_assert!(road.hat_state(ml, z1) <= road.hat_state(mh, z1));
            prop_assert!(road.hat_state(m1, zl) <= road.hat_state(m1, zh));
        }
    }

    #[test]
    fn germ_members_dissipate(seed in any::<u64>()) {
        let (j, mut r) = junction(seed);
        for _ in 0..20 {
            let a = random_germ_member(&mut r, &j).unwrap();
            let b = random_germ_member(&mut r, &j).unwrap();
            prop_assert!(germ_dissipation(&j, &a, &b).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn kkt_matches_riemann(seed in any::<u64>()) {
        let (j, mut r) = junction(seed);
        let rho = random_state(&mut r, &j);
        let riemann = solve_riemann(&j, &rho).unwrap();
        let kkt = solve_max_dissipation(&j, &rho).unwrap();
        for (a, b) in riemann.trace_flux.iter().zip(&kkt.solution.trace_flux) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
        let program = FluxProgram::new(&j, &rho).unwrap();
        for (h, (_, road)) in j.roads().enumerate() {
            prop_assert!((0.0..=road.flux.max_flux()).contains(&program.caps[h]));
        }
    }

    #[test]
    fn normalized_objective_round_trips(seed in any::<u64>(), incoming in any::<bool>()) {
        let mut r = rng(seed);
        let f = random_flux(&mut r, 0.0, 1.0);
        let e = random_entropy(&mut r, &f);
        let dir = if incoming { Direction::In } else { Direction::Out };
        let g = holden_risebro_convert(&e, &f, dir);
        prop_assert!(g.concavity_defect(1e-9).is_none());
        let back = holden_risebro_inverse(&g, &f, dir).unwrap();
        let sigma = f.peak();
        for k in 1..200 {
            let x = k as f64 / 200.0;
            let on_out = match dir {
                Direction::In => x > sigma,
                Direction::Out => x < sigma,
            };
            if on_out {
                prop_assert!((back.right_limit(x) - e.right_limit(x)).abs() <= 1e-9, "at {x}");
            }
        }
    }

    #[test]
    fn bgk_keeps_d_xi(seed in any::<u64>()) {
        let (j, mut r) = junction(seed);
        let grids = xi_grids(&j, 1.0 / 40.0).unwrap();
        let space = SpaceGrid::new(1.0 / 20.0, 12).unwrap();
        let rho = cells(&mut r, &j, space.nx);
        let mut state = KineticState::equilibrium(&grids, &rho, 10f64.powf(r.gen_range(-3.0..0.0)));
        let speed = grids.iter().map(XiGrid::max_speed).fold(0.0, f64::max);
        let dt = 0.9 * space.dx / speed;
        for _ in 0..5 {
            let (next, step) = bgk_step(&state, &j, &grids, space, dt).unwrap();
            prop_assert!(step.balance_residual.abs() <= 1e-10);
            state = next;
            for (h, grid) in grids.iter().enumerate() {
                let (a, b) = j.road(h).flux.domain();
                for row in state.g[h].chunks(grid.len()) {
                    prop_assert!(grid.in_d_xi(row, 1e-12));
                    let m = grid.moment(row);
                    prop_assert!(m >= a - 1e-12 && m <= b + 1e-12);
                }
            }
        }
    }

    #[test]
    fn kinetic_coupling_dissipates(seed in any::<u64>()) {
        let (j, mut r) = junction(seed);
        let grids = xi_grids(&j, 1.0 / 50.0).unwrap();
        let mut coupled = || {
            let traces: Vec<Vec<f64>> = grids
                .iter()
                .zip(random_state(&mut r, &j))
                .map(|(g, rho)| g.equilibrium(rho))
                .collect();
            psi(&j, &grids, &traces).unwrap()
        };
        let (p, q) = (coupled(), coupled());
        prop_assert!(p.residual.abs() <= 1e-10 && q.residual.abs() <= 1e-10);
        prop_assert!(kinetic_dissipation_check(&j, &grids, &p.face, &q.face) >= -1e-12);
    }

    #[test]
    fn godunov_contracts_in_l1(seed in any::<u64>()) {
        let (j, mut r) = junction(seed);
        let space = SpaceGrid::new(1.0 / 20.0, 10).unwrap();
        let a = GodunovSolver::from_cells(j.clone(), space, cells(&mut r, &j, space.nx)).unwrap();
        let b = GodunovSolver::from_cells(j.clone(), space, cells(&mut r, &j, space.nx)).unwrap();
        let (mut a, mut b) = (a, b);
        let dt = 0.9 * a.max_dt();
        for _ in 0..5 {
            let mut boundary = 0.0;
            for (h, (dir, road)) in j.roads().enumerate() {
                let i = match dir {
                    Direction::In => 0,
                    Direction::Out => space.nx - 1,
                };
                let (u, v) = (a.state.rho[h][i], b.state.rho[h][i]);
                boundary += dir.sign() * (u - v).signum() * (road.flux.eval(u) - road.flux.eval(v));
            }
            let before = l1_distance(&a.state.rho, &b.state.rho, space.dx);
            let step = a.step(dt).unwrap();
            b.step(dt).unwrap();
            prop_assert!(step.balance_residual <= 1e-10);
            let after = l1_distance(&a.state.rho, &b.state.rho, space.dx);
            prop_assert!(after - before - dt * boundary <= 1e-12, "increase {}", after - before - dt * boundary);
        }
    }

    #[test]
    fn godunov_interior_maximum_principle(seed in any::<u64>()) {
        let (j, mut r) = junction(seed);
        let space = SpaceGrid::new(1.0 / 20.0, 12).unwrap();
        let start = cells(&mut r, &j, space.nx);
        let mut s = GodunovSolver::from_cells(j.clone(), space, start.clone()).unwrap();
        let dt = s.max_dt();
        s.step(dt).unwrap();
        for (old, new) in start.iter().zip(&s.state.rho) {
            for i in 1..space.nx - 1 {
                let lo = old[i - 1].min(old[i]).min(old[i + 1]);
                let hi = old[i - 1].max(old[i]).max(old[i + 1]);
                prop_assert!(new[i] >= lo - 1e-12 && new[i] <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn scenario_toml_round_trips(neg in any::<bool>(), dx in 1e-3..1e-1f64, t_end in 0.01..1.0f64, rho in 0.0..=1.0f64) {
        let mut config = ScenarioConfig::table1(if neg { Variant::NegFlux } else { Variant::Common });
        config.solver.dx = dx;
        config.solver.t_end = t_end;
        config.roads[0].initial = RoadProfile::constant(rho).with_piece(-0.5, -0.25, 1.0 - rho);
        let text = config.to_toml_string();
        let parsed = ScenarioConfig::from_toml_str(&text).unwrap();
        prop_assert_eq!(&parsed, &config);
        prop_assert_eq!(parsed.to_toml_string(), text);
    }
}

#[test]
fn germ_pairs_of_table1_states_dissipate() {
    let j = lwr_junction::table1::junction(Variant::Common);
    let d = germ_dissipation(&j, &[0.25, 0.25, 3.0 / 16.0, 3.0 / 16.0], &[0.0; 4]).unwrap();
    assert_eq!(d, 0.0);
}
