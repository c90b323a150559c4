//! Property tests for the structural invariants of the discretization.

use gcf::diagnostics::{ledger_mass_defect, moment, weighted_difference_norm};
use gcf::grid::{build_pair_allocation, PairTarget};
use gcf::prelude::*;
use proptest::prelude::*;

fn kernels() -> Vec<CoagulationKernel> {
    vec![
        CoagulationKernel::LinearShear,
        CoagulationKernel::NonlinearShear,
        CoagulationKernel::Gravitational,
        CoagulationKernel::modified_smoluchowski(0.7).unwrap(),
        CoagulationKernel::activated_sludge(1.2, 3.0).unwrap(),
        CoagulationKernel::product(0.6).unwrap(),
        CoagulationKernel::constant(1.3).unwrap(),
    ]
}

fn grid_strategy() -> impl Strategy<Value = SizeGrid> {
    prop_oneof![
        (1.0f64..100.0, 2usize..40).prop_map(|(u, n)| build_grid(u, n, GridScheme::Uniform).unwrap()),
        (1.0f64..100.0, 2usize..40, 1.01f64..2.0).prop_map(|(u, n, r)| build_grid(
            u,
            n,
            GridScheme::geometric(r).unwrap()
        )
        .unwrap()),
    ]
}

fn grid_and_state() -> impl Strategy<Value = (SizeGrid, Vec<f64>)> {
    grid_strategy().prop_flat_map(|g| {
        let n = g.len();
        (Just(g), proptest::collection::vec(0.0f64..5.0, n))
    })
}

fn weighted_mass(grid: &SizeGrid, v: &[f64]) -> f64 {
    v.iter()
        .zip(grid.pivots())
        .zip(grid.widths())
        .map(|((v, x), d)| v * x * d)
        .sum()
}

fn number(grid: &SizeGrid, v: &[f64]) -> f64 {
    v.iter().zip(grid.widths()).map(|(v, d)| v * d).sum()
}

proptest! {
    #[test]
    fn pair_allocation_preserves_number_and_mass(grid in grid_strategy()) {
        let x = grid.pivots();
        let alloc = build_pair_allocation(&grid);
        for i in 0..grid.len() {
            for j in i..grid.len() {
                let v = x[i] + x[j];
                match alloc.get(i, j) {
                    PairTarget::Split { k, w_lo, w_hi } => {
                        prop_assert!((0.0..=1.0).contains(&w_lo) && (0.0..=1.0).contains(&w_hi));
                        prop_assert!((w_lo + w_hi - 1.0).abs() < 1e-14);
                        let hi = if w_hi > 0.0 { x[k + 1] } else { 0.0 };
                        prop_assert!((w_lo * x[k] + w_hi * hi - v).abs() <= 1e-12 * v);
                        prop_assert_eq!(alloc.get(j, i), alloc.get(i, j));
                    }
                    PairTarget::Overflow => prop_assert!(v > x[grid.len() - 1]),
                }
            }
        }
    }

    #[test]
    fn kernels_are_symmetric(u in 1e-3f64..1e3, v in 1e-3f64..1e3) {
        for k in kernels() {
            let (a, b) = (k.rate(u, v), k.rate(v, u));
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(b.abs()), "{}: {a} vs {b}", k.name());
        }
    }

    #[test]
    fn coagulation_conserves_mass_with_overflow((grid, xi) in grid_and_state()) {
        for k in kernels() {
            let disc = Discretization::new(&grid, &CoefficientSet::default().with_coagulation(k)).unwrap();
            let t = disc.coagulation(&xi).unwrap();
            let gross = weighted_mass(&grid, &t.coag_loss).abs();
            let net = weighted_mass(&grid, &t.coag_gain) + weighted_mass(&grid, &t.coag_loss) + t.coag_overflow_mass;
            prop_assert!(net.abs() <= 1e-12 * gross.max(f64::MIN_POSITIVE));
        }
    }

    /// Every on-grid merge removes one particle; a merge past the last pivot
    /// removes both partners from the grid.
    #[test]
    fn coagulation_number_rate_counts_merges((grid, xi) in grid_and_state()) {
        let x = grid.pivots();
        let d = grid.widths();
        let last = x[grid.len() - 1];
        for k in kernels() {
            let disc = Discretization::new(&grid, &CoefficientSet::default().with_coagulation(k.clone())).unwrap();
            let t = disc.coagulation(&xi).unwrap();
            let mut expected = 0.0;
            let mut scale = 0.0;
            for i in 0..grid.len() {
                for j in 0..grid.len() {
                    let pair = 0.5 * k.rate(x[i], x[j]) * xi[i] * xi[j] * d[i] * d[j];
                    expected -= if x[i] + x[j] > last { 2.0 * pair } else { pair };
                    scale += pair;
                }
            }
            let got = number(&grid, &t.coag_gain) + number(&grid, &t.coag_loss);
            prop_assert!((got - expected).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE), "{}: {got} vs {expected}", k.name());
        }
    }

    #[test]
    fn fragmentation_conserves_mass(
        (grid, xi) in grid_and_state(),
        nu in -0.99f64..=0.0,
        l0 in 0.0f64..3.0,
        l1 in 0.0f64..=1.0,
    ) {
        let set = CoefficientSet::default().with_fragmentation(
            FragmentationRate::new(l0, l1).unwrap(),
            DaughterDistribution::new(nu).unwrap(),
        );
        let disc = Discretization::new(&grid, &set).unwrap();
        let t = disc.fragmentation(&xi).unwrap();
        prop_assert!(t.frag_gain.iter().all(|g| *g >= 0.0));
        let gross = weighted_mass(&grid, &t.frag_loss).abs();
        let net = weighted_mass(&grid, &t.frag_gain) + weighted_mass(&grid, &t.frag_loss);
        prop_assert!(net.abs() <= 1e-12 * gross.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn rayon_rhs_is_bitwise_serial((grid, xi) in grid_and_state()) {
        let set = CoefficientSet::default()
            .with_coagulation(CoagulationKernel::product(0.5).unwrap())
            .with_fragmentation(FragmentationRate::new(1.0, 0.5).unwrap(), DaughterDistribution::new(-0.3).unwrap())
            .with_growth(RateFunction::affine(0.1, 0.2).unwrap())
            .with_death(RateFunction::constant(0.3).unwrap())
            .with_birth(RateFunction::constant(0.4).unwrap());
        let serial = Discretization::new(&grid, &set).unwrap();
        let parallel = Discretization::new(&grid, &set).unwrap().with_parallelism(Parallelism::Rayon);
        let a = serial.rhs(&xi).unwrap().total();
        let b = parallel.rhs(&xi).unwrap().total();
        prop_assert!(a.iter().zip(&b).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn truncation_cuts_off_beyond_level(n in 0.5f64..50.0, u in 0.0f64..100.0) {
        let set = CoefficientSet::default()
            .with_coagulation(CoagulationKernel::constant(2.0).unwrap())
            .with_fragmentation(FragmentationRate::new(1.0, 1.0).unwrap(), DaughterDistribution::default())
            .with_growth(RateFunction::affine(0.1, 0.2).unwrap())
            .with_death(RateFunction::affine(1.0, 0.5).unwrap());
        let t = truncate_coefficients(&set, TruncationLevel::new(n).unwrap()).unwrap();
        prop_assert!((t.growth.at(u) - set.growth.at(u) - 1.0 / n).abs() < 1e-12);
        if u > n {
            prop_assert_eq!(t.death.at(u), 0.0);
            prop_assert_eq!(t.fragmentation.at(u), 0.0);
            prop_assert_eq!(t.coagulation.rate(u, 0.1), 0.0);
        } else if u > 0.0 {
            prop_assert_eq!(t.death.at(u), set.death.at(u));
            prop_assert_eq!(t.fragmentation.at(u), set.fragmentation.at(u));
        }
        let floorless = truncate_coefficients(&set, TruncationLevel::new(n).unwrap().without_growth_floor()).unwrap();
        prop_assert_eq!(floorless.growth.at(u), set.growth.at(u));
    }

    #[test]
    fn weighted_distance_is_a_metric((grid, a) in grid_and_state(), seed in 0.0f64..3.0) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| (v * seed + i as f64 * 0.1).abs()).collect();
        let c: Vec<f64> = a.iter().map(|v| v * 0.5).collect();
        let (a, b, c) = (
            StateVector::new(&grid, a).unwrap(),
            StateVector::new(&grid, b).unwrap(),
            StateVector::new(&grid, c).unwrap(),
        );
        let ab = weighted_difference_norm(&a, &b).unwrap();
        prop_assert_eq!(ab, weighted_difference_norm(&b, &a).unwrap());
        let ac = weighted_difference_norm(&a, &c).unwrap();
        let cb = weighted_difference_norm(&c, &b).unwrap();
        prop_assert!(ab <= (ac + cb) * (1.0 + 1e-12));
    }

    #[test]
    fn moments_scale_linearly((grid, xi) in grid_and_state(), c in 0.0f64..10.0, gamma in 0.0f64..3.0) {
        let s = StateVector::new(&grid, xi).unwrap();
        let m = moment(&s, gamma).unwrap();
        let ms = moment(&s.scaled(c).unwrap(), gamma).unwrap();
        prop_assert!((ms - c * m).abs() <= 1e-12 * (c * m).max(f64::MIN_POSITIVE));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// The ledger's net boundary flux accounts for every change of mass,
    /// and no step leaves a negative density.
    #[test]
    fn ledger_closes_mass_budget_and_states_stay_nonnegative(
        omega in 0.0f64..0.9,
        l0 in 0.0f64..1.0,
        nu in -0.9f64..=0.0,
        g1 in 0.0f64..0.5,
        g0 in 0.0f64..1.0,
        m in 0.0f64..1.0,
        a in 0.0f64..1.0,
        euler in any::<bool>(),
    ) {
        let set = CoefficientSet::default()
            .with_coagulation(CoagulationKernel::product(omega).unwrap())
            .with_fragmentation(FragmentationRate::new(l0, 1.0).unwrap(), DaughterDistribution::new(nu).unwrap())
            .with_growth(RateFunction::affine(g1, g0).unwrap())
            .with_death(RateFunction::constant(m).unwrap())
            .with_birth(RateFunction::constant(a).unwrap());
        let grid = build_grid(8.0, 40, GridScheme::Uniform).unwrap();
        let disc = Discretization::new(&grid, &set).unwrap();
        let method = if euler { Method::Euler } else { Method::SspRk2 };
        let stepper = StepperConfig::new(1.0).with_output_spacing(0.25).unwrap().with_method(method);
        let traj = run(&disc, StateVector::exp_decay(&grid, 1.0, 1.0).unwrap(), &stepper).unwrap();
        let m1 = traj.moments()[0].m1;
        prop_assert!(ledger_mass_defect(&traj).abs() <= 1e-8 * m1);
        for s in traj.snapshots() {
            prop_assert!(s.xi.iter().all(|v| *v >= 0.0 && v.is_finite()));
        }
    }
}

#[test]
fn repeated_runs_are_bitwise_identical() {
    let set = CoefficientSet::default()
        .with_coagulation(CoagulationKernel::product(0.5).unwrap())
        .with_growth(RateFunction::affine(0.1, 0.3).unwrap())
        .with_birth(RateFunction::constant(0.2).unwrap());
    let grid = build_grid(10.0, 60, GridScheme::Uniform).unwrap();
    let go = |p| {
        let disc = Discretization::new(&grid, &set).unwrap().with_parallelism(p);
        let stepper = StepperConfig::new(1.0).with_output_spacing(0.1).unwrap();
        run(&disc, StateVector::exp_decay(&grid, 1.0, 1.0).unwrap(), &stepper).unwrap()
    };
    let a = go(Parallelism::Serial);
    let b = go(Parallelism::Rayon);
    for (x, y) in a.snapshots().iter().zip(b.snapshots()) {
        assert!(x.xi.iter().zip(&y.xi).all(|(p, q)| p.to_bits() == q.to_bits()));
    }
    assert_eq!(a.moments(), b.moments());
}
