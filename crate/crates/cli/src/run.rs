use std::f64::consts::TAU;

use pshardy_core::hardy::{
    canonical_ball_experiment, density_study, dilation_study, norm_boundary, norm_comparison, norm_levels, norm_riesz,
    strict_inclusion_study, weakstar_study, LevelsLimit,
};
use pshardy_core::measures::{monotonicity_table, mu_pair_contour, mu_pair_lj};
use pshardy_core::{ConvergenceTable, NormResult};

use crate::config::{ExperimentKind, Plan};
use crate::error::CliError;

/// Runs the experiment described by a validated plan.
pub fn run(plan: &Plan) -> Result<ConvergenceTable, CliError> {
    let tol = plan.tolerances;
    let s = &plan.schedule;
    let table = match plan.kind {
        ExperimentKind::Norm => norm(plan)?,
        ExperimentKind::Alpha => alpha(plan),
        ExperimentKind::MuPair => mu_pair(plan)?,
        ExperimentKind::Monotone => {
            monotonicity_table(exhaustion(plan), &plan.phi.as_ref().expect("validated").0, levels(plan), tol.area)?
        }
        ExperimentKind::Weakstar => weakstar_study(
            exhaustion(plan),
            function(plan),
            &plan.phi.as_ref().expect("validated").0,
            plan.p.expect("validated"),
            levels(plan),
            tol.grid_n,
            tol.periodic,
        )?,
        ExperimentKind::Dilation => dilation_study(
            function(plan),
            plan.p.expect("validated"),
            exhaustion(plan),
            s.t_seq.as_deref().expect("validated"),
            tol.periodic,
        )?,
        ExperimentKind::Balls => canonical_ball_experiment(
            function(plan),
            plan.p.expect("validated"),
            s.t_seq.as_deref().expect("validated"),
            tol.periodic,
        )?,
        ExperimentKind::Density => {
            let t = s.t_seq.as_deref().expect("validated");
            let n = s.n_seq.as_deref().expect("validated");
            let schedule: Vec<(f64, usize)> = t.iter().copied().zip(n.iter().copied()).collect();
            density_study(function(plan), plan.p.expect("validated"), exhaustion(plan), &schedule, tol.periodic)?
        }
        ExperimentKind::StrictInclusion => strict_inclusion_study(
            function(plan),
            plan.p.expect("validated"),
            s.k_seq.as_deref().expect("validated"),
            tol.periodic,
        )?,
        ExperimentKind::Compare => {
            let cmp = norm_comparison(
                function(plan),
                plan.p.expect("validated"),
                exhaustion(plan),
                plan.compare_with.as_ref().expect("validated"),
                tol.periodic,
            )?;
            let mut table = ConvergenceTable::new("compare");
            push_norm(&mut table, "u", 0.0, &cmp.u, f64::NAN);
            push_norm(&mut table, "v", 1.0, &cmp.v, f64::NAN);
            table.set_flag("ordered", cmp.ordered);
            table
        }
    };
    Ok(table)
}

fn exhaustion(plan: &Plan) -> &pshardy_core::Exhaustion {
    plan.exhaustion.as_ref().expect("validated")
}

fn function(plan: &Plan) -> &pshardy_core::AnalyticFunction {
    plan.function.as_ref().expect("validated")
}

fn levels(plan: &Plan) -> &[f64] {
    plan.schedule.r_seq.as_deref().expect("validated")
}

/// Error of `x^{1/p}` from the error of `x`, to first order.
fn norm_error(n: &NormResult) -> f64 {
    let (power, p) = (n.pth_power(), n.p.value());
    if power > 0.0 {
        n.report.est_error * power.powf(1.0 / p - 1.0) / p
    } else {
        n.report.est_error.powf(1.0 / p)
    }
}

fn push_norm(table: &mut ConvergenceTable, series: &str, parameter: f64, n: &NormResult, reference: f64) {
    table.push(series, parameter, n.value, reference, norm_error(n), n.report.converged());
}

fn norm(plan: &Plan) -> Result<ConvergenceTable, CliError> {
    let (f, u, p, tol) = (function(plan), exhaustion(plan), plan.p.expect("validated"), plan.tolerances);
    let boundary = norm_boundary(f, p, u, tol.periodic);
    let mut table = ConvergenceTable::new("norm");
    if let Some(r_seq) = plan.schedule.r_seq.as_deref() {
        let lv = norm_levels(f, p, u, r_seq, tol.area, LevelsLimit::Linear)?;
        let lt = lv.table.as_ref().expect("levels route has a table");
        table.rows.extend(lt.rows.iter().cloned());
        table.set_flag("monotone", lt.flags["monotone"]);
        push_norm(&mut table, "levels-limit", p.value(), &lv, boundary.value);
    }
    if f.is_boundary_regular() {
        let riesz = norm_riesz(f, p, u, tol.area)?;
        push_norm(&mut table, "riesz", p.value(), &riesz, boundary.value);
    }
    push_norm(&mut table, "boundary", p.value(), &boundary, f64::NAN);
    table.set_flag("finite", boundary.finite);
    Ok(table)
}

fn alpha(plan: &Plan) -> ConvergenceTable {
    let u = exhaustion(plan);
    let density = u.alpha(plan.tolerances.periodic);
    let mut table = ConvergenceTable::new("alpha");
    for j in 0..plan.samples {
        let theta = TAU * j as f64 / plan.samples as f64;
        table.push("alpha", theta, density.eval(theta), f64::NAN, 0.0, true);
    }
    let m = &density.mass_report;
    table.push("mass", 0.0, density.l1_mass, 1.0, m.est_error, m.converged());
    table.set_flag("unit_mass", (density.l1_mass - 1.0).abs() <= m.est_error + plan.tolerances.periodic);
    table.set_metric("lower_bound", density.lower_bound);
    table
}

fn mu_pair(plan: &Plan) -> Result<ConvergenceTable, CliError> {
    let u = exhaustion(plan);
    let phi = &plan.phi.as_ref().expect("validated").0;
    let mut table = ConvergenceTable::new("mu-pair");
    let mut agree = true;
    for &r in levels(plan) {
        let lj = mu_pair_lj(u, r, phi, plan.tolerances.area)?;
        let ct = mu_pair_contour(u, r, |z| phi.value(z), plan.tolerances.grid_n)?;
        table.push("lelong-jensen", r, lj.value, f64::NAN, lj.report.est_error, lj.report.converged());
        table.push("contour", r, ct.value, lj.value, ct.report.est_error, ct.report.converged());
        agree &= (lj.value - ct.value).abs() <= lj.report.est_error + ct.report.est_error;
    }
    table.set_flag("routes_agree", agree);
    Ok(table)
}
