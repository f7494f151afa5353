//! Weak-type profiles of the Bergman projection on normalized tube bumps.

use bergman_core::operators::{weak_type_profile, WeakInput};
use bergman_core::rng::derive_seed;
use bergman_core::{CVec, Complex64, HoloFun, QuadSpec};

use super::{at_most, spread, within_sigma};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{Params, ReportRow};

pub fn run(cfg: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    let n = cfg.n.unwrap_or(2);
    let alpha = cfg.alpha.unwrap_or(0.0);
    let outer_nodes = cfg.trials_or(10_000);
    let inner = cfg.nodes_or(1000);
    let zeta = CVec::basis(n, 0, Complex64::new(1.0, 0.0));
    let outer = QuadSpec::new(outer_nodes, derive_seed(cfg.seed, 0x600));
    let mut rows = Vec::new();
    let mut sups = Vec::new();
    for &r in &cfg.radii {
        let prof = weak_type_profile(&WeakInput::TubeBump { zeta, r }, n, alpha, &outer, inner)?;
        sups.push(prof.sup);
        rows.push(
            ReportRow::new(
                "weak.tube_bump_sup",
                Params::new().with("n", n).with("alpha", alpha).with("r", r).with("outer", outer_nodes).build(),
            )
            .lhs(prof.sup, prof.sup_stderr)
            .rhs(prof.median, 0.0)
            .with_ratio()
            .pass(prof.sup.is_finite() && prof.sup > 0.0),
        );
    }
    let (max, min) = spread(&sups);
    rows.push(
        ReportRow::new(
            "weak.tube_bump_sweep",
            Params::new().with("n", n).with("alpha", alpha).with("radii", cfg.radii.len()).build(),
        )
        .lhs(max, 0.0)
        .rhs(min, 0.0)
        .ratio(max / min)
        .pass(min > 0.0 && max / min <= cfg.windows.sweep),
    );
    if let Some(&r) = cfg.radii.last() {
        let input = WeakInput::TubeBump { zeta, r };
        let a = weak_type_profile(&input, n, alpha, &outer, inner)?;
        let mut twice = outer.reseed(1);
        twice.nodes *= 2;
        let b = weak_type_profile(&input, n, alpha, &twice, inner)?;
        rows.push(within_sigma(
            "weak.node_doubling",
            Params::new().with("n", n).with("alpha", alpha).with("r", r).build(),
            (b.sup, b.sup_stderr),
            (a.sup, a.sup_stderr),
            cfg.windows.sigma,
        ));
    }
    let one = HoloFun::constant(n, Complex64::new(1.0, 0.0))?;
    let prof = weak_type_profile(&WeakInput::Holomorphic(one), n, alpha, &outer, inner)?;
    rows.push(at_most(
        "weak.constant_function",
        Params::new().with("n", n).with("alpha", alpha).build(),
        prof.sup,
        1.0,
    ));
    Ok(rows)
}
