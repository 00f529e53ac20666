//! Embedded benchmark corpus.
//!
//! Twelve probabilistic programs with hand-derived affine invariants,
//! grouped by what is bounded:
//!
//! * deviation of an accumulated value (`rdadder`, `robot`),
//! * concentration of running time (`coupon`, `prspeed`, `rdwalk`),
//! * stochastic-invariant style reachability (`1dwalk`, `2dwalk`,
//!   `3dwalk`, `race`),
//! * success of a computation on unreliable hardware (`m1dwalk`,
//!   `newton`, `ref`) — these are lower-bound instances and carry the
//!   `assume_ast` flag (the loops have deterministic or positive-drift
//!   counters, so almost-sure termination holds).
//!
//! Each benchmark family exposes the parameter grid used in the reference
//! results: deviation bounds, time thresholds, initial values, or per-step
//! failure probabilities.

use crate::frontend::{parse, translate, AnnotationSet, FrontError};
use crate::pts::{CheckConfig, Pts};

/// Finite truncation of an otherwise unbounded state space, for the exact
/// oracle: states outside the per-variable box are absorbed.
#[derive(Clone, Debug)]
pub struct Truncation {
    pub var_bounds: Vec<(f64, f64)>,
    /// Absorb out-of-box states as failure (`true`) or termination.
    pub to_fail: bool,
}

/// A concrete benchmark instance (program + parameter value).
#[derive(Clone, Debug)]
pub struct Instance {
    pub bench: &'static str,
    pub param: String,
    /// Lower-bound instance (bound the probability from below).
    pub lower: bool,
    /// Simplified relative to the original description.
    pub reduced: bool,
    pub source: String,
    pub annotations: String,
    pub truncation: Option<Truncation>,
    /// Whether the reachable state space is small enough for the exact
    /// grid oracle.
    pub has_oracle: bool,
}

impl Instance {
    /// Parses, annotates, and translates the instance.
    pub fn build(&self) -> Result<(Pts, CheckConfig, AnnotationSet), FrontError> {
        let prog = parse(&self.source)?;
        let ann = AnnotationSet::parse(&self.annotations)?;
        let (pts, cfg) = translate(&prog, &ann)?;
        Ok((pts, cfg, ann))
    }
}

/// Benchmark names with their reference parameter grids.
pub fn catalog() -> Vec<(&'static str, Vec<&'static str>)> {
    vec![
        ("race", vec!["40,0", "35,0", "45,0"]),
        ("rdadder", vec!["25", "50", "75"]),
        ("robot", vec!["1.8", "2.0", "2.2"]),
        ("coupon", vec!["100", "300", "500"]),
        ("prspeed", vec!["150", "200", "250"]),
        ("rdwalk", vec!["400", "500", "600"]),
        ("1dwalk", vec!["10", "50", "100"]),
        ("2dwalk", vec!["1000,10", "500,40", "400,50"]),
        ("3dwalk", vec!["100,100,100", "100,150,200", "300,100,150"]),
        ("m1dwalk", vec!["1e-7", "1e-5", "1e-4"]),
        ("newton", vec!["5e-4", "1e-3", "1.5e-3"]),
        ("ref", vec!["1e-7", "1e-6", "1e-5"]),
    ]
}

/// Builds the instance for `bench` at parameter `param` (a value from
/// [`catalog`], or any string in the same format).
pub fn instance(bench: &str, param: &str) -> Option<Instance> {
    let nums: Vec<f64> = param.split(',').map(|s| s.trim().parse().ok()).collect::<Option<_>>()?;
    match (bench, nums.as_slice()) {
        ("race", [x0, y0]) => Some(race(*x0, *y0, param)),
        ("rdadder", [k]) => Some(rdadder(*k, param)),
        ("robot", [k]) => Some(robot(*k, param)),
        ("coupon", [t]) => Some(coupon(*t, param)),
        ("prspeed", [t]) => Some(prspeed(*t, param)),
        ("rdwalk", [t]) => Some(rdwalk(*t, param)),
        ("1dwalk", [x0]) => Some(onedwalk(*x0, param)),
        ("2dwalk", [x0, y0]) => Some(twodwalk(*x0, *y0, param)),
        ("3dwalk", [x0, y0, z0]) => Some(threedwalk(*x0, *y0, *z0, param)),
        ("m1dwalk", [p]) => Some(m1dwalk(*p, param)),
        ("newton", [p]) => Some(newton(*p, param)),
        ("ref", [p]) => Some(searchref(*p, param)),
        _ => None,
    }
}

/// All catalog instances.
pub fn all_instances() -> Vec<Instance> {
    catalog()
        .into_iter()
        .flat_map(|(b, ps)| ps.into_iter().map(move |p| instance(b, p).unwrap()))
        .collect()
}

fn race(x0: f64, y0: f64, param: &str) -> Instance {
    let source = format!(
        "\
x := {x0}; y := {y0};
while (x <= 99 && y <= 99) @inv(x >= {x0}, x <= 100, y >= {y0}, y <= 101) {{
    if prob(0.5) @inv(x >= {x0}, x <= 99, y >= {y0}, y <= 99) {{ x, y := x + 1, y + 2; }} else {{ x := x + 1; }}
}}
assert(x >= 100) @inv(x >= {x0}, x <= 100, y >= {y0}, y <= 101);
"
    );
    let annotations =
        format!("inv lf: x >= {x0}, x <= 99, y >= 100, y <= 101\n");
    Instance {
        bench: "race",
        param: param.to_string(),
        lower: false,
        reduced: false,
        source,
        annotations,
        truncation: None,
        has_oracle: true,
    }
}

fn rdadder(k: f64, param: &str) -> Instance {
    let cap = 200.0 + k;
    let source = format!(
        "\
i := 0; x := 0;
while (x <= 99) @inv(x >= 0, x <= 100, i >= x, i <= {cap}) {{
    switch @inv(x >= 0, x <= 99, i >= x, i <= {cap}) {{
        prob(0.5): {{ i, x := i + 1, x + 1; }}
        prob(0.5): {{ i := i + 1; }}
    }}
    assert(i <= {cap}) @inv(x >= 0, x <= 100, i >= x, i <= {hi});
}}
",
        hi = cap + 1.0
    );
    let annotations = format!(
        "inv lf: x >= 0, x <= 100, i >= x, i >= {hi}, i <= {hi}\n",
        hi = cap + 1.0
    );
    Instance {
        bench: "rdadder",
        param: param.to_string(),
        lower: false,
        reduced: false,
        source,
        annotations,
        truncation: None,
        has_oracle: true,
    }
}

fn robot(k: f64, param: &str) -> Instance {
    // Four movement commands (SW, NE, W, E), each with symmetric ±0.05
    // actuation noise on the actual position x; ex tracks the ideal
    // noise-free position.
    let mut cmds = String::new();
    for (ideal, a, b) in [
        (-1.414, -1.464, -1.364),
        (1.414, 1.364, 1.464),
        (-1.0, -1.05, -0.95),
        (1.0, 0.95, 1.05),
    ] {
        cmds.push_str(&format!(
            "        prob(0.25): {{ if prob(0.5) {in_loop} {{ i, x, ex := i + 1, x + {a}, ex + {ideal}; }} \
             else {{ i, x, ex := i + 1, x + {b}, ex + {ideal}; }} }}\n",
            in_loop = IN_LOOP
        ));
    }
    const IN_LOOP: &str = "@inv(i >= 0, i <= 500, x - ex <= 25.05, ex - x <= 25.05)";
    let source = format!(
        "\
i := 0; x := 0; ex := 0;
while (i <= 500) @inv(i >= 0, i <= 501, x - ex <= 25.05, ex - x <= 25.05) {{
    switch {IN_LOOP} {{
{cmds}    }}
}}
assert(x - ex >= -{k}) @inv(i >= 501, x - ex <= 25.05, ex - x <= 25.05);
"
    );
    Instance {
        bench: "robot",
        param: param.to_string(),
        lower: false,
        reduced: true,
        source,
        annotations: format!(
            "inv lf: i >= 501, i <= 501, ex - x >= {k}, ex - x <= 25.05\n"
        ),
        truncation: None,
        has_oracle: false,
    }
}

fn coupon(t: f64, param: &str) -> Instance {
    // Coupon collector with 5 items: from state i, a new coupon arrives
    // with probability (5−i)/5; t counts rounds.
    let source = format!(
        "\
i := 0; t := 0;
while (i <= 4) {{
    if (i == 0) {{ i, t := i + 1, t + 1; }}
    else {{ if (i == 1) {{
        if prob(0.8) {{ i, t := i + 1, t + 1; }} else {{ t := t + 1; }}
    }} else {{ if (i == 2) {{
        if prob(0.6) {{ i, t := i + 1, t + 1; }} else {{ t := t + 1; }}
    }} else {{ if (i == 3) {{
        if prob(0.4) {{ i, t := i + 1, t + 1; }} else {{ t := t + 1; }}
    }} else {{
        if prob(0.2) {{ i, t := i + 1, t + 1; }} else {{ t := t + 1; }}
    }} }} }} }}
    assert(t <= {t});
}}
"
    );
    let annotations = format!(
        "\
inv l0: i >= 0, i <= 5, t >= 0, t <= {t}
inv l1: i >= 1, i <= 1, t >= 0, t <= {t}
inv l2: i >= 2, i <= 2, t >= 0, t <= {t}
inv l3: i >= 3, i <= 3, t >= 0, t <= {t}
inv l4: i >= 4, i <= 4, t >= 0, t <= {t}
inv lf: i >= 0, i <= 5, t >= {hi}, t <= {hi}
",
        hi = t + 1.0
    );
    Instance {
        bench: "coupon",
        param: param.to_string(),
        lower: false,
        reduced: false,
        source,
        annotations,
        truncation: None,
        has_oracle: true,
    }
}

fn prspeed(t: f64, param: &str) -> Instance {
    let source = format!(
        "\
x := 0; y := 0; t := 0;
while (x + 3 <= 50) {{
    if (y <= 49) {{
        if prob(0.5) {{ y, t := y + 1, t + 1; }} else {{ t := t + 1; }}
    }} else {{
        switch {{
            prob(0.25): {{ t := t + 1; }}
            prob(0.25): {{ x, t := x + 1, t + 1; }}
            prob(0.25): {{ x, t := x + 2, t + 1; }}
            prob(0.25): {{ x, t := x + 3, t + 1; }}
        }}
    }}
    assert(t <= {t});
}}
"
    );
    let annotations = format!(
        "\
inv l0: x >= 0, x <= 50, y >= 0, y <= 50, t >= 0, t <= {t}
inv l1: x >= 0, x <= 47, y >= 0, y <= 49, t >= 0, t <= {t}
inv l2: x >= 0, x <= 47, y >= 50, y <= 50, t >= 0, t <= {t}
inv lf: x >= 0, x <= 50, y >= 0, y <= 50, t >= {hi}, t <= {hi}
",
        hi = t + 1.0
    );
    Instance {
        bench: "prspeed",
        param: param.to_string(),
        lower: false,
        reduced: false,
        source,
        annotations,
        truncation: None,
        has_oracle: true,
    }
}

fn rdwalk(t: f64, param: &str) -> Instance {
    let source = format!(
        "\
x := 0; t := 0;
while (x <= 99) @inv(x <= 100, t >= 0, t >= x, x + t >= 0, t <= {t}) {{
    switch @inv(x <= 99, t >= 0, t >= x, x + t >= 0, t <= {t}) {{
        prob(0.75): {{ x, t := x + 1, t + 1; }}
        prob(0.25): {{ x, t := x - 1, t + 1; }}
    }}
    assert(t <= {t}) @inv(x <= 100, t >= 1, t >= x, x + t >= 0, t <= {hi});
}}
",
        hi = t + 1.0
    );
    let annotations = format!(
        "inv lf: x <= 100, x + t >= 0, t >= {hi}, t <= {hi}\n",
        hi = t + 1.0
    );
    Instance {
        bench: "rdwalk",
        param: param.to_string(),
        lower: false,
        reduced: false,
        source,
        annotations,
        truncation: None,
        has_oracle: true,
    }
}

fn onedwalk(x0: f64, param: &str) -> Instance {
    let source = format!(
        "\
x := {x0};
while (x >= 0) @inv(x >= -2, x <= 1001) {{
    assert(x <= 1000) @inv(x >= 0, x <= 1001);
    switch @inv(x >= 0, x <= 1000) {{
        prob(0.5): {{ x := x - 2; }}
        prob(0.5): {{ x := x + 1; }}
    }}
}}
"
    );
    Instance {
        bench: "1dwalk",
        param: param.to_string(),
        lower: false,
        reduced: false,
        source,
        annotations: "inv lf: x >= 1001, x <= 1001\n".to_string(),
        truncation: None,
        has_oracle: true,
    }
}

fn twodwalk(x0: f64, y0: f64, param: &str) -> Instance {
    let source = format!(
        "\
x := {x0}; y := {y0};
while (y >= 1) @inv(x >= 1, y >= 0) {{
    if prob(0.5) @inv(x >= 1, y >= 1) {{
        switch @inv(x >= 1, y >= 1) {{ prob(0.75): {{ x := x + 1; }} prob(0.25): {{ x := x - 1; }} }}
    }} else {{
        switch @inv(x >= 1, y >= 1) {{ prob(0.75): {{ y := y - 1; }} prob(0.25): {{ y := y + 1; }} }}
    }}
    assert(x >= 1) @inv(x >= 0, y >= 0);
}}
"
    );
    Instance {
        bench: "2dwalk",
        param: param.to_string(),
        lower: false,
        reduced: false,
        source,
        annotations: "inv lf: x >= 0, x <= 0, y >= 0\n".to_string(),
        truncation: None,
        has_oracle: false,
    }
}

fn threedwalk(x0: f64, y0: f64, z0: f64, param: &str) -> Instance {
    let source = format!(
        "\
x := {x0}; y := {y0}; z := {z0};
while (x >= 0 && y >= 0 && z >= 0) @inv(x >= -1, y >= -1, z >= -1, x + y + z <= 1000.3) {{
    assert(x + y + z <= 1000) @inv(x >= 0, y >= 0, z >= 0, x + y + z <= 1000.3);
    if prob(0.9) @inv(x >= 0, y >= 0, z >= 0, x + y + z <= 1000) {{
        switch @inv(x >= 0, y >= 0, z >= 0, x + y + z <= 1000) {{ prob(0.5): {{ x, y := x - 1, y - 1; }} prob(0.5): {{ z := z - 1; }} }}
    }} else {{
        switch @inv(x >= 0, y >= 0, z >= 0, x + y + z <= 1000) {{ prob(0.5): {{ x, y := x + 0.1, y + 0.1; }} prob(0.5): {{ z := z + 0.1; }} }}
    }}
}}
"
    );
    Instance {
        bench: "3dwalk",
        param: param.to_string(),
        lower: false,
        reduced: false,
        source,
        annotations: String::new(),
        truncation: None,
        has_oracle: false,
    }
}

fn m1dwalk(p: f64, param: &str) -> Instance {
    let up = 0.75 * (1.0 - p);
    let down = 0.25 * (1.0 - p);
    let source = format!(
        "\
x := 20;
while (x <= 99) @inv(x <= 100) {{
    switch @inv(x <= 99) {{
        prob({p}): {{ exit; }}
        prob({up}): {{ x := x + 1; }}
        prob({down}): {{ x := x - 1; }}
    }}
}}
assert(false);
"
    );
    Instance {
        bench: "m1dwalk",
        param: param.to_string(),
        lower: true,
        reduced: false,
        source,
        annotations: "assume_ast\n".to_string(),
        truncation: Some(Truncation { var_bounds: vec![(-100.0, 100.0)], to_fail: false }),
        has_oracle: true,
    }
}

fn newton(p: f64, param: &str) -> Instance {
    let q5 = (1.0 - p).powi(5);
    let q3 = (1.0 - p).powi(3);
    let q6 = (1.0 - p).powi(6);
    let source = format!(
        "\
i := 0;
while (i <= 43) @inv(i >= 0, i <= 44) {{
    if prob({q5}) @inv(i >= 0, i <= 43) {{ skip; }} else {{ exit; }}
    if prob(0.9999) @inv(i >= 0, i <= 43) {{ skip; }} else {{ exit; }}
    if prob(0.9999) @inv(i >= 0, i <= 43) {{ skip; }} else {{ exit; }}
    if prob({q3}) @inv(i >= 0, i <= 43) {{ skip; }} else {{ exit; }}
    if prob({q6}) @inv(i >= 0, i <= 43) {{ skip; }} else {{ exit; }}
    i := i + 1;
}}
assert(false);
"
    );
    Instance {
        bench: "newton",
        param: param.to_string(),
        lower: true,
        reduced: false,
        source,
        annotations: "assume_ast\n".to_string(),
        truncation: None,
        has_oracle: true,
    }
}

fn searchref(p: f64, param: &str) -> Instance {
    let q3 = (1.0 - p).powi(3);
    let q1 = 1.0 - p;
    let source = format!(
        "\
i := 0; j := 0; k := 0;
while (i <= 19) @inv(i >= 0, i <= 20, j >= 0, j <= 16, k >= 0, k <= 16) {{
    j := 0;
    while (j <= 15) @inv(i >= 0, i <= 19, j >= 0, j <= 16, k >= 0, k <= 16) {{
        k := 0;
        while (k <= 15) @inv(i >= 0, i <= 19, j >= 0, j <= 15, k >= 0, k <= 16) {{
            if prob({q3}) @inv(i >= 0, i <= 19, j >= 0, j <= 15, k >= 0, k <= 15) {{ skip; }} else {{ exit; }}
            k := k + 1;
        }}
        j := j + 1;
    }}
    if prob({q1}) @inv(i >= 0, i <= 19, j >= 16, j <= 16, k >= 0, k <= 16) {{ skip; }} else {{ exit; }}
    i := i + 1;
}}
assert(false);
"
    );
    Instance {
        bench: "ref",
        param: param.to_string(),
        lower: true,
        reduced: false,
        source,
        annotations: "assume_ast\n".to_string(),
        truncation: None,
        has_oracle: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pts::{check_well_formed, Severity};

    #[test]
    fn every_instance_builds_and_is_well_formed() {
        for inst in all_instances() {
            let (pts, cfg, _) = inst
                .build()
                .unwrap_or_else(|e| panic!("{} {}: {e}", inst.bench, inst.param));
            let diags = check_well_formed(&pts, cfg);
            let errors: Vec<_> =
                diags.iter().filter(|d| d.severity == Severity::Error).collect();
            assert!(
                errors.is_empty(),
                "{} {}: {errors:?}\n{}",
                inst.bench,
                inst.param,
                crate::pts::print_pts(&pts)
            );
            // Fork probabilities sum to one on every transition.
            for t in &pts.transitions {
                let s: f64 = t.forks.iter().map(|f| f.prob).sum();
                assert!((s - 1.0).abs() < 1e-9, "{}: fork sum {s}", inst.bench);
            }
        }
    }

    #[test]
    fn expected_location_counts() {
        for (bench, locs) in [
            ("race", 4),
            ("rdadder", 4),
            ("rdwalk", 4),
            ("1dwalk", 4),
            ("2dwalk", 6),
            ("3dwalk", 6),
            ("m1dwalk", 4),
            ("newton", 8),
            ("ref", 7),
            ("coupon", 7),
            ("prspeed", 5),
            ("robot", 8),
        ] {
            let inst = instance(bench, catalog().iter().find(|(b, _)| *b == bench).unwrap().1[0])
                .unwrap();
            let (pts, _, _) = inst.build().unwrap();
            assert_eq!(pts.num_locs(), locs, "{bench}:\n{}", crate::pts::print_pts(&pts));
        }
    }

    #[test]
    fn annotated_labels_exist() {
        // The .inv files for coupon and prspeed reference labels by name;
        // a mismatch would surface as a translate error.
        for bench in ["coupon", "prspeed"] {
            let inst = instance(bench, "100").unwrap();
            let (pts, _, _) = inst.build().unwrap();
            // Every non-terminal location carries a bounded-above t row.
            for l in 0..pts.num_locs() {
                if pts.is_terminal(l) {
                    continue;
                }
                assert!(
                    !pts.invariants[l].rows.is_empty(),
                    "{bench} {} lacks invariant rows",
                    pts.loc_names[l]
                );
            }
        }
    }
}
