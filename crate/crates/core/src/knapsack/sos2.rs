//! Piecewise-linear model of the knapsack with SOS-2 breakpoint groups.
//!
//! Each item gets breakpoints `0`, `min(x̄_j, u_j)` and `u_j`; the middle one
//! is dropped when the flat piece has zero length. Weights `λ_jk` form a
//! convex combination, and at most two adjacent ones may be nonzero.

use std::path::Path;

use num_traits::Zero;

use super::KnapsackError;
use crate::lpfile::{LpModel, Objective, RowSense, SosSet, VarKind};
use crate::model::CkInstance;
use crate::rational::{to_f64, Rat};

pub fn sos2_model(instance: &CkInstance) -> LpModel {
    let mut model = LpModel::new(Objective::Maximize);
    let mut capacity_terms = Vec::new();
    let mut convexity = Vec::new();
    for (j, item) in instance.items().iter().enumerate() {
        let knee = item.breakpoint();
        let knee = if knee < item.upper { knee } else { item.upper.clone() };
        let mut points = vec![Rat::zero()];
        if !knee.is_zero() {
            points.push(knee);
        }
        points.push(item.upper.clone());

        let mut members = Vec::new();
        let mut row = Vec::new();
        for (k, x) in points.iter().enumerate() {
            let name = format!("l_{}_{}", j + 1, k + 1);
            model.add_variable(name.clone(), VarKind::Continuous);
            let profit = item.profit(x);
            if !profit.is_zero() {
                model.objective_terms.push((name.clone(), to_f64(&profit)));
            }
            if !x.is_zero() {
                capacity_terms.push((name.clone(), to_f64(x)));
            }
            row.push((name.clone(), 1.0));
            members.push((name, (k + 1) as f64));
        }
        convexity.push((format!("convex_{}", j + 1), row));
        model.sos.push(SosSet {
            name: format!("sos_{}", j + 1),
            kind: 2,
            members,
        });
    }
    model.add_row("capacity", capacity_terms, RowSense::Le, to_f64(instance.capacity()));
    for (name, row) in convexity {
        model.add_row(name, row, RowSense::Eq, 1.0);
    }
    model
}

pub fn export_sos2(instance: &CkInstance, path: &Path) -> Result<(), KnapsackError> {
    sos2_model(instance).write_to(path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::CkItem;
    use crate::rational::int;

    fn ck(items: &[(i64, i64, i64)], cap: i64) -> CkInstance {
        CkInstance::new(
            items
                .iter()
                .map(|&(g, b, u)| CkItem::new(int(g), int(b), int(u)))
                .collect(),
            int(cap),
        )
        .unwrap()
    }

    #[test]
    fn counts_with_proper_knees() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (-3, 2, 2)], 5);
        let m = sos2_model(&inst);
        assert_eq!(m.variables.len(), 9);
        assert_eq!(m.sos.len(), 3);
        assert_eq!(m.rows.len(), 4);
        assert!(m.sos.iter().all(|s| s.kind == 2 && s.members.len() == 3));
    }

    #[test]
    fn nonnegative_intercept_collapses_knee() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (0, 1, 2)], 5);
        let m = sos2_model(&inst);
        assert_eq!(m.variables.len(), 8);
        assert_eq!(m.sos[2].members.len(), 2);
        assert_eq!(m.rows.len(), 4);
    }

    #[test]
    fn file_round_trip() {
        let inst = ck(&[(-2, 2, 3), (-1, 1, 4), (0, 1, 2)], 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ck.lp");
        export_sos2(&inst, &path).unwrap();
        let mut parsed = LpModel::parse(&std::fs::read_to_string(&path).unwrap()).unwrap();
        let mut model = sos2_model(&inst);
        // the reader lists variables in order of first appearance
        parsed.variables.sort_by(|a, b| a.name.cmp(&b.name));
        model.variables.sort_by(|a, b| a.name.cmp(&b.name));
        assert_eq!(parsed, model);
    }
}
