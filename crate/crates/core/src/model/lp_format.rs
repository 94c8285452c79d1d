//! CPLEX LP text writer. Sections and rows are emitted in model order so
//! the output is stable across runs.

use std::fmt::Write;

use super::{LinearModel, ObjSense, VarKind};

fn terms(out: &mut String, coeffs: &[(usize, f64)], model: &LinearModel) {
    if coeffs.is_empty() {
        out.push_str(" 0");
        return;
    }
    for (i, c) in coeffs {
        let sign = if *c < 0.0 { '-' } else { '+' };
        let _ = write!(out, " {sign} {} {}", c.abs(), model.variables[*i].name);
    }
}

pub(super) fn write(model: &LinearModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    out.push_str(match model.objective.sense {
        ObjSense::Maximize => "Maximize\n",
        ObjSense::Minimize => "Minimize\n",
    });
    out.push_str(" obj:");
    terms(&mut out, &model.objective.coeffs, model);
    out.push_str("\nSubject To\n");
    for c in &model.constraints {
        let _ = write!(out, " {}:", c.name);
        terms(&mut out, &c.coeffs, model);
        let _ = writeln!(out, " {} {}", c.sense, c.rhs);
    }
    out.push_str("Bounds\n");
    for v in &model.variables {
        if v.kind == VarKind::Binary && v.lower == 0.0 && v.upper == 1.0 {
            continue;
        }
        let line = match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => format!(" {} free", v.name),
            (true, false) => format!(" {} >= {}", v.name, v.lower),
            (false, true) => format!(" -inf <= {} <= {}", v.name, v.upper),
            (true, true) => format!(" {} <= {} <= {}", v.lower, v.name, v.upper),
        };
        out.push_str(&line);
        out.push('\n');
    }
    let binaries: Vec<&str> =
        model.variables.iter().filter(|v| v.kind == VarKind::Binary).map(|v| v.name.as_str()).collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for b in binaries {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    out
}

#[cfg(test)]
mod tests {
    use crate::model::build_full_milp;
    use crate::problem::{ProblemSpec, ScenarioSet};

    #[test]
    fn writes_e1_full_milp() {
        let s = ScenarioSet::new(
            vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![-1.0, 2.0], vec![2.0, -1.0], vec![0.5, 0.5]],
            vec![],
        )
        .unwrap();
        let lp = build_full_milp(&s, &ProblemSpec::new(0.2, 0.5)).unwrap().to_lp_string();
        let expected = "\
\\ Problem: var_full
Maximize
 obj: + 1 nu
Subject To
 bigM_0: + 1 nu - 1 x0 - 5 y0 <= 0
 bigM_1: + 1 nu - 1 x1 - 5 y1 <= 0
 bigM_2: + 1 nu + 1 x0 - 2 x1 - 5 y2 <= 0
 bigM_3: + 1 nu - 2 x0 + 1 x1 - 5 y3 <= 0
 bigM_4: + 1 nu - 0.5 x0 - 0.5 x1 - 5 y4 <= 0
 card: + 1 y0 + 1 y1 + 1 y2 + 1 y3 + 1 y4 = 1
 ret_floor: + 0.5 x0 + 0.5 x1 >= 0.5
 budget: + 1 x0 + 1 x1 = 1
Bounds
 0 <= x0 <= 1
 0 <= x1 <= 1
 nu free
Binaries
 y0
 y1
 y2
 y3
 y4
End
";
        assert_eq!(lp, expected);
    }
}
