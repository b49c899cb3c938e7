use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ruc_solver::{
    solve_lp, BackendRegistry, DenseBackend, EmbeddedBackend, LpStatus, MipModel, Sense, SolverBackend, SolverConfig,
};

fn cfg() -> SolverConfig {
    SolverConfig::default()
}

#[test]
fn one_variable_max_has_unit_dual() {
    let mut m = MipModel::new();
    let x = m.add_continuous("x", 0.0, f64::INFINITY);
    m.set_objective(x, -1.0);
    m.add_constraint("cap", vec![(x, 1.0)], Sense::Le, 3.0);
    for b in [&EmbeddedBackend as &dyn SolverBackend, &DenseBackend] {
        let s = b.solve_lp(&m, &cfg()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 3.0).abs() < 1e-12);
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        assert!((s.duals[0] - 1.0).abs() < 1e-12, "{} dual {}", b.name(), s.duals[0]);
    }
}

#[test]
fn contradictory_rows_are_infeasible() {
    let mut m = MipModel::new();
    let x = m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY);
    m.add_constraint("lo", vec![(x, 1.0)], Sense::Ge, 1.0);
    m.add_constraint("hi", vec![(x, 1.0)], Sense::Le, 0.0);
    assert_eq!(solve_lp(&m, &cfg()).unwrap().status, LpStatus::Infeasible);
    assert_eq!(DenseBackend.solve_lp(&m, &cfg()).unwrap().status, LpStatus::Infeasible);
}

#[test]
fn free_variable_with_zero_objective() {
    let mut m = MipModel::new();
    m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY);
    let s = solve_lp(&m, &cfg()).unwrap();
    assert_eq!(s.status, LpStatus::Optimal);
    assert_eq!(s.objective, 0.0);
}

#[test]
fn unbounded_direction_detected() {
    let mut m = MipModel::new();
    let x = m.add_continuous("x", 0.0, f64::INFINITY);
    let y = m.add_continuous("y", 0.0, f64::INFINITY);
    m.set_objective(x, -1.0);
    m.add_constraint("r", vec![(x, 1.0), (y, -1.0)], Sense::Le, 2.0);
    assert_eq!(solve_lp(&m, &cfg()).unwrap().status, LpStatus::Unbounded);
    assert_eq!(DenseBackend.solve_lp(&m, &cfg()).unwrap().status, LpStatus::Unbounded);
}

#[test]
fn equality_and_ranged_rows() {
    // min x + 2y  s.t. x + y = 4, x - y >= -2, x <= 3
    let mut m = MipModel::new();
    let x = m.add_continuous("x", 0.0, 3.0);
    let y = m.add_continuous("y", 0.0, f64::INFINITY);
    m.set_objective(x, 1.0);
    m.set_objective(y, 2.0);
    m.add_constraint("bal", vec![(x, 1.0), (y, 1.0)], Sense::Eq, 4.0);
    m.add_constraint("diff", vec![(x, 1.0), (y, -1.0)], Sense::Ge, -2.0);
    let s = solve_lp(&m, &cfg()).unwrap();
    assert!((s.objective - 5.0).abs() < 1e-9, "{}", s.objective);
    assert!((s.x[0] - 3.0).abs() < 1e-9 && (s.x[1] - 1.0).abs() < 1e-9);
    assert!((s.dual_objective(&m) - 5.0).abs() < 1e-9);
    // Balance row price equals the marginal unit (y) cost.
    assert!((s.duals[0] - 2.0).abs() < 1e-9);
}

/// Random LP feasible by construction around a hidden interior point.
pub fn random_lp(rng: &mut ChaCha8Rng) -> MipModel {
    let n = rng.gen_range(1..=8);
    let rows = rng.gen_range(0..=8);
    let mut m = MipModel::new();
    let mut x0 = Vec::new();
    let mut ids = Vec::new();
    for j in 0..n {
        let kind = rng.gen_range(0..4);
        let (lo, hi) = match kind {
            0 => (rng.gen_range(-5.0..0.0), rng.gen_range(0.5..5.0)),
            1 => (0.0, f64::INFINITY),
            2 => (f64::NEG_INFINITY, rng.gen_range(0.0..4.0)),
            _ => (rng.gen_range(-3.0..0.0), rng.gen_range(0.0..3.0)),
        };
        let v = m.add_continuous(format!("x{j}"), lo, hi);
        ids.push(v);
        let p = match kind {
            1 => rng.gen_range(0.0..3.0),
            2 => hi - rng.gen_range(0.0..3.0),
            _ => rng.gen_range(lo..=hi),
        };
        x0.push(p);
        // Costs that keep the problem bounded over half-infinite columns.
        let c = match kind {
            1 => rng.gen_range(0.0..4.0),
            2 => rng.gen_range(-4.0..0.0),
            _ => rng.gen_range(-4.0..4.0),
        };
        m.set_objective(v, (c * 8.0f64).round() / 8.0);
    }
    for i in 0..rows {
        let mut terms = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.6) {
                terms.push((ids[j], rng.gen_range(-3i32..=3) as f64));
            }
        }
        let act: f64 = terms.iter().map(|&(v, a)| a * x0[v.0]).sum();
        let sense = match rng.gen_range(0..5) {
            0 => Sense::Eq,
            1 | 2 => Sense::Le,
            _ => Sense::Ge,
        };
        let rhs = match sense {
            Sense::Eq => act,
            Sense::Le => act + rng.gen_range(0.0..2.0),
            Sense::Ge => act - rng.gen_range(0.0..2.0),
        };
        m.add_constraint(format!("r{i}"), terms, sense, rhs);
    }
    m
}

#[test]
fn random_lps_match_reference_and_close_duality_gap() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut optimal = 0;
    for case in 0..500 {
        let m = random_lp(&mut rng);
        let a = EmbeddedBackend.solve_lp(&m, &cfg()).unwrap();
        let b = DenseBackend.solve_lp(&m, &cfg()).unwrap();
        assert_eq!(a.status, b.status, "case {case}: status mismatch\n{}", m.to_lp_string());
        if a.status == LpStatus::Optimal {
            optimal += 1;
            assert!((a.objective - b.objective).abs() <= 1e-7 * (1.0 + a.objective.abs()), "case {case}");
            assert!((a.objective - a.dual_objective(&m)).abs() <= 1e-6, "case {case}");
            assert!((b.objective - b.dual_objective(&m)).abs() <= 1e-6, "case {case}");
            assert!(m.max_violation(&a.x) <= 1e-7, "case {case}");
            // Inequality multipliers are nonnegative in the >= convention.
            for (c, &nu) in m.constraints().iter().zip(&a.duals) {
                if c.sense != Sense::Eq {
                    assert!(nu >= -1e-9, "case {case}: negative multiplier {nu}");
                }
            }
        }
    }
    assert!(optimal > 300, "only {optimal} optimal cases");
}

#[test]
fn registry_selects_and_rejects() {
    let mut reg = BackendRegistry::new();
    assert!(reg.get("nope").is_err());
    assert!(reg.register("embedded", std::sync::Arc::new(EmbeddedBackend)).is_err());
    reg.register("embedded-copy", std::sync::Arc::new(EmbeddedBackend)).unwrap();
    let mut m = MipModel::new();
    let x = m.add_continuous("x", 0.0, 10.0);
    m.set_objective(x, -2.0);
    let a = reg.get("embedded").unwrap().solve_lp(&m, &cfg()).unwrap();
    let b = reg.default_backend().solve_lp(&m, &cfg()).unwrap();
    let c = reg.get("embedded-copy").unwrap().solve_lp(&m, &cfg()).unwrap();
    assert_eq!(a.x, b.x);
    assert_eq!(a.x, c.x);
}

/// Larger, highly degenerate LPs (integer data, many zero right-hand sides).
#[test]
fn larger_degenerate_lps_match_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(31337);
    for case in 0..60 {
        let n = rng.gen_range(10..40);
        let rows = rng.gen_range(5..35);
        let mut m = MipModel::new();
        let ids: Vec<_> = (0..n)
            .map(|j| {
                let ub = if rng.gen_bool(0.7) { rng.gen_range(1..5) as f64 } else { f64::INFINITY };
                m.add_continuous(format!("x{j}"), 0.0, ub)
            })
            .collect();
        for &v in &ids {
            m.set_objective(v, rng.gen_range(-3i32..=5) as f64);
        }
        for i in 0..rows {
            let mut terms = Vec::new();
            for &v in &ids {
                if rng.gen_bool(0.25) {
                    terms.push((v, rng.gen_range(-2i32..=3) as f64));
                }
            }
            let sense = if rng.gen_bool(0.2) { Sense::Eq } else { Sense::Le };
            let rhs = if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(0..6) as f64 };
            m.add_constraint(format!("r{i}"), terms, sense, rhs);
        }
        let a = EmbeddedBackend.solve_lp(&m, &cfg()).unwrap();
        let b = DenseBackend.solve_lp(&m, &cfg()).unwrap();
        assert_eq!(a.status, b.status, "case {case}");
        if a.status == LpStatus::Optimal {
            assert!((a.objective - b.objective).abs() <= 1e-7 * (1.0 + a.objective.abs()), "case {case}: {} vs {}", a.objective, b.objective);
        }
    }
}
