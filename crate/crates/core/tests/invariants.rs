use proptest::prelude::*;

use prk::decomposition::{CellPartition, CellSplit, FluxSplit, SplitRhs};
use prk::rhs::Rhs;
use prk::spatial::{Advection1D, BurgersLlf, SemiDiscreteProblem};
use prk::tableau::{parse_tableau, write_tableau, BUILTIN_NAMES};
use prk::{builtin_tableau, Stepper64, Tableau};

fn state(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, m)
}

fn labels(m: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..2usize, m)
}

fn parts_of<S: SplitRhs<f64>>(split: &S, v: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; v.len()]; split.parts()];
    split.eval_parts(0.0, v, &vec![true; split.parts()], &mut out);
    out
}

proptest! {
    #[test]
    fn cell_parts_sum_to_full_rhs(v in state(24), lab in labels(24)) {
        let p = BurgersLlf::<f64>::new(24).unwrap();
        let split = CellSplit::new(&p, CellPartition::from_labels(lab, 2).unwrap()).unwrap();
        let parts = parts_of(&split, &v);
        let mut full = vec![0.0; 24];
        p.eval(0.0, &v, &mut full);
        for i in 0..24 {
            prop_assert!((parts[0][i] + parts[1][i] - full[i]).abs() <= 1e-13);
        }
    }

    #[test]
    fn flux_parts_sum_to_full_rhs_and_conserve(v in state(20), lab in labels(20)) {
        let p = Advection1D::<f64>::new(20).unwrap();
        let cells = CellPartition::from_labels(lab, 2).unwrap();
        let split = FluxSplit::from_cells(&p, &cells).unwrap();
        let parts = parts_of(&split, &v);
        let mut full = vec![0.0; 20];
        p.eval(0.0, &v, &mut full);
        let h = p.cell_measures();
        for part in &parts {
            let mass: f64 = part.iter().zip(&h).map(|(a, b)| a * b).sum();
            prop_assert!(mass.abs() <= 1e-12);
        }
        for i in 0..20 {
            prop_assert!((parts[0][i] + parts[1][i] - full[i]).abs() <= 1e-12);
        }
    }

    #[test]
    fn flux_split_steps_conserve_mass(v in state(16), lab in labels(16), k in 0..5usize) {
        let name = ["OS1", "TW1", "TW2", "CS2", "SH2"][k];
        let p = Advection1D::<f64>::new(16).unwrap();
        let split = FluxSplit::from_cells(&p, &CellPartition::from_labels(lab, 2).unwrap()).unwrap();
        let h = p.cell_measures();
        let before: f64 = v.iter().zip(&h).map(|(a, b)| a * b).sum();
        let mut u = v.clone();
        Stepper64::new(&builtin_tableau(name).unwrap()).step(&split, 0.0, 0.02, &mut u).unwrap();
        let after: f64 = u.iter().zip(&h).map(|(a, b)| a * b).sum();
        prop_assert!((after - before).abs() <= 1e-13);
    }
}

#[test]
fn builtin_tableaus_round_trip_through_text() {
    for name in BUILTIN_NAMES {
        let t = builtin_tableau(name).unwrap();
        let back: Tableau = parse_tableau(&write_tableau(&t)).unwrap();
        assert_eq!(back, t, "{name}");
    }
}
