//! Space-index map checks.

use crate::report::{Params, ReportRow};
use crate::spaces::{besov_smoothness, space_index_map, Space};

pub fn run() -> Vec<ReportRow> {
    let mut rows = Vec::new();
    for (alpha, p) in [(0.0, 2.0), (1.0, 1.5), (-2.5, 4.0)] {
        let s = besov_smoothness(alpha, p);
        let got = space_index_map(Space::Besov { s, p });
        rows.push(exact("spaces.besov_round_trip", Params::new().with("alpha", alpha).with("p", p), got, alpha));
    }
    for p in [1.0, 2.0, 4.0] {
        let got = space_index_map(Space::HardySobolev { s: 0.0, p });
        rows.push(exact("spaces.hardy_sobolev_order_zero", Params::new().with("p", p), got, -1.0));
        let hardy = space_index_map(Space::Hardy { p });
        rows.push(exact("spaces.hardy", Params::new().with("p", p), hardy, -1.0));
    }
    let sob = space_index_map(Space::Sobolev { k: 1, beta: 0.0, p: 2.0 });
    rows.push(exact(
        "spaces.sobolev",
        Params::new().with("k", 1).with("beta", 0).with("p", 2),
        sob,
        -3.0,
    ));
    rows
}

fn exact(e: &str, params: Params, got: f64, want: f64) -> ReportRow {
    ReportRow::new(e, params.build())
        .lhs(got, 0.0)
        .rhs(want, 0.0)
        .with_ratio()
        .pass((got - want).abs() <= 1e-12)
}
