//! Property-based physics invariants over randomly drawn circuits.

use proptest::prelude::*;

use fss_core::em::{
    abcd_line, abcd_shunt, admittance, cascade, f_phys, CircuitParams, FrequencyGrid,
    ResonatorKind, Topology, Z0_FREE_SPACE,
};
use fss_core::grad::{f_phys_dual, finite_diff_check};

fn log_uniform(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo.ln()..hi.ln()).prop_map(f64::exp)
}

/// L in [0.1, 10] nH, C in [0.01, 1] pF — the plausible slot-screen range.
fn circuit_strategy() -> impl Strategy<Value = CircuitParams> {
    proptest::collection::vec((log_uniform(1e-10, 1e-8), log_uniform(1e-14, 1e-12)), 2)
        .prop_map(|pairs| CircuitParams::from_lc_pairs(&pairs).unwrap())
}

fn coarse_grid() -> FrequencyGrid {
    FrequencyGrid::new(6e9, 16e9, 41).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn response_is_lossless(c in circuit_strategy(), gap_mm in 5.0f64..15.0) {
        let topo = Topology::two_screen_air(gap_mm * 1e-3).unwrap();
        let r = f_phys(&c, &topo, &coarse_grid(), Z0_FREE_SPACE).unwrap();
        prop_assert!(r.power_residual() < 1e-10);
    }

    #[test]
    fn response_is_reciprocal(c in circuit_strategy(), gap_mm in 5.0f64..15.0) {
        let topo = Topology::two_screen_air(gap_mm * 1e-3).unwrap();
        let r = f_phys(&c, &topo, &coarse_grid(), Z0_FREE_SPACE).unwrap();
        for p in &r.points {
            prop_assert!((p.s21 - p.s12).abs() < 1e-12);
        }
    }

    #[test]
    fn cascade_is_unimodular(c in circuit_strategy(), gap_mm in 5.0f64..15.0, f_ghz in 6.0f64..16.0) {
        let f = f_ghz * 1e9;
        let y0 = admittance(ResonatorKind::ParallelLc, c.inductance(0), c.capacitance(0), f).unwrap();
        let y1 = admittance(ResonatorKind::ParallelLc, c.inductance(1), c.capacitance(1), f).unwrap();
        let m = cascade(&[
            abcd_shunt(y0).unwrap(),
            abcd_line::<f64>(gap_mm * 1e-3, 1.0, f, Z0_FREE_SPACE).unwrap(),
            abcd_shunt(y1).unwrap(),
        ]).unwrap();
        let det = m.det();
        prop_assert!((det.re - 1.0).abs() < 1e-12 && det.im.abs() < 1e-12);
    }

    #[test]
    fn palindromic_cascade_is_symmetric(l in log_uniform(1e-10, 1e-8),
                                        cc in log_uniform(1e-14, 1e-12),
                                        gap_mm in 5.0f64..15.0) {
        // identical screens around the spacer: s11 must equal s22
        let c = CircuitParams::from_lc_pairs(&[(l, cc), (l, cc)]).unwrap();
        let topo = Topology::two_screen_air(gap_mm * 1e-3).unwrap();
        let r = f_phys(&c, &topo, &coarse_grid(), Z0_FREE_SPACE).unwrap();
        for p in &r.points {
            prop_assert!((p.s11 - p.s22).abs() < 1e-10);
        }
    }

    #[test]
    fn dual_jacobian_matches_finite_differences(c in circuit_strategy(), gap_mm in 5.0f64..15.0) {
        let topo = Topology::two_screen_air(gap_mm * 1e-3).unwrap();
        let worst = finite_diff_check(&c, &topo, &coarse_grid(), Z0_FREE_SPACE, 1e-6).unwrap();
        prop_assert!(worst < 1e-6, "fd deviation {worst}");
    }

    #[test]
    fn dual_value_path_matches_plain(c in circuit_strategy(), gap_mm in 5.0f64..15.0) {
        let topo = Topology::two_screen_air(gap_mm * 1e-3).unwrap();
        let grid = coarse_grid();
        let plain = f_phys(&c, &topo, &grid, Z0_FREE_SPACE).unwrap();
        let (dual, _) = f_phys_dual(&c, &topo, &grid, Z0_FREE_SPACE).unwrap();
        for (a, b) in plain.points.iter().zip(&dual.points) {
            prop_assert!(a.s11 == b.s11 && a.s21 == b.s21);
        }
    }
}

#[test]
fn touchstone_round_trip_random_responses() {
    use fss_core::data::{read_touchstone, write_touchstone};
    let c = CircuitParams::from_lc_pairs(&[(0.9e-9, 0.3e-12), (1.1e-9, 0.25e-12)]).unwrap();
    let topo = Topology::two_screen_air(9.5e-3).unwrap();
    let r = f_phys(&c, &topo, &FrequencyGrid::default_band(), Z0_FREE_SPACE).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("resp.s2p");
    write_touchstone(&r, &path, Z0_FREE_SPACE).unwrap();
    let (back, z0) = read_touchstone(&path).unwrap();
    assert_eq!(z0, Z0_FREE_SPACE);
    assert_eq!(back.grid, r.grid);
    for (a, b) in back.points.iter().zip(&r.points) {
        assert!((a.s11 - b.s11).abs() < 1e-9);
        assert!((a.s21 - b.s21).abs() < 1e-9);
        assert!((a.s12 - b.s12).abs() < 1e-9);
        assert!((a.s22 - b.s22).abs() < 1e-9);
    }
}
