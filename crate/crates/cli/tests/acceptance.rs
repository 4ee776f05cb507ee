//! Acceptance suite: one line per criterion, then a single verdict.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssamask_cli::verify;
use ssamask_core::anonymity::{mask_signal, MaskPlan, TrendSpec};
use ssamask_core::microdata::{
    apply_modified_signal, build_quantity_signal, DonorPolicy, GroupDefinition, Microfile,
    QuantitySignal,
};
use ssamask_core::ssa::{
    advise_grouping, decompose_series, diagonal_average, embed, estimate_period, reconstruct,
    Grouping,
};
use ssamask_core::textio::{read_values, Columnar};
use ssamask_core::{ComponentSet64, Series64};

const TOL: f64 = 0.005;
const L: usize = 20;
const GROUPING: &str = "1,2|3,4|5,6|7-20";

fn reference_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/reference")
}

fn fixture(name: &str) -> Columnar<f64> {
    let text = std::fs::read_to_string(reference_dir().join(name)).unwrap();
    read_values(&text).unwrap()
}

fn values(name: &str) -> Vec<f64> {
    fixture(name).values
}

fn components(values: &[f64]) -> ComponentSet64 {
    let dec = decompose_series(&Series64::new(values.to_vec(), "s").unwrap(), L).unwrap();
    reconstruct(&dec, &GROUPING.parse::<Grouping>().unwrap()).unwrap()
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "length mismatch");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// The printed first component with its missing element restored from the siblings.
fn full_first_component() -> (Vec<f64>, f64) {
    let first = fixture("q_hat_component_1.txt");
    let pos: usize = first.headers["missing_position"].parse().unwrap();
    let i = pos - 1;
    let q = values("q_hat.txt");
    let gap = q[i]
        - values("q_hat_component_2.txt")[i]
        - values("q_hat_component_3.txt")[i]
        - values("q_hat_component_4.txt")[i];
    let mut full = first.values;
    full.insert(i, gap);
    (full, gap)
}

type Outcome = Result<String, String>;

fn criterion_1() -> Outcome {
    let computed = components(&values("q_hat.txt"));
    let mut worst = 0.0f64;
    for k in 2..=4 {
        let d = max_dev(
            computed.components()[k - 1].values(),
            &values(&format!("q_hat_component_{k}.txt")),
        );
        if d > TOL {
            return Err(format!("component {k} deviates by {d:.6}"));
        }
        worst = worst.max(d);
    }
    let (full, gap) = full_first_component();
    if (gap - 105.856).abs() > 5e-4 {
        return Err(format!("recovered gap value {gap:.4}, expected 105.856"));
    }
    let d = max_dev(computed.components()[0].values(), &full);
    if d > TOL {
        return Err(format!("component 1 deviates by {d:.6}"));
    }
    Ok(format!(
        "max deviation {:.6}; gap at 12 = {gap:.3}",
        worst.max(d)
    ))
}

fn criterion_2() -> Outcome {
    let q = values("q_hat.txt");
    let trend = values("q_hat_trend_replacement.txt");
    let q_tilde = values("q_tilde.txt");
    let (full, _) = full_first_component();
    let rounded: Vec<f64> = (0..q.len())
        .map(|i| (q[i] - full[i] + trend[i]).round())
        .collect();
    if let Some(i) = (0..q.len()).find(|&i| rounded[i] != q_tilde[i]) {
        return Err(format!(
            "element {} is {} vs printed {}",
            i + 1,
            rounded[i],
            q_tilde[i]
        ));
    }
    if rounded[2] != 127.0 {
        return Err(format!("element 3 is {}", rounded[2]));
    }
    // Same result through the library path.
    let plan = MaskPlan::new(
        L,
        GROUPING
            .parse::<Grouping>()
            .unwrap()
            .with_trend(Some(0))
            .unwrap(),
        TrendSpec::Explicit { values: trend },
    )
    .unwrap();
    let out = mask_signal(
        &QuantitySignal::from_values(&q, "q_hat").unwrap(),
        &plan,
        None,
    )
    .unwrap();
    let masked: Vec<f64> = out.masked.counts().iter().map(|&c| c as f64).collect();
    if masked != q_tilde {
        return Err("library masking differs from the printed result".into());
    }
    Ok("all 40 integers equal (published and computed components)".into())
}

fn criterion_3() -> Outcome {
    let computed = components(&values("q_tilde.txt"));
    let mut worst = 0.0f64;
    for k in 1..=4 {
        let d = max_dev(
            computed.components()[k - 1].values(),
            &values(&format!("q_tilde_component_{k}.txt")),
        );
        if d > TOL {
            return Err(format!("component {k} deviates by {d:.6}"));
        }
        worst = worst.max(d);
    }
    Ok(format!("max deviation {worst:.6}"))
}

fn criterion_4() -> Outcome {
    let dec = decompose_series(&Series64::new(values("q_hat.txt"), "q_hat").unwrap(), L).unwrap();
    let adv = advise_grouping(&dec, 0.1, 1e-10);
    if adv.pairs == [(3, 4), (5, 6)] {
        Ok(format!("pairs {:?}", adv.pairs))
    } else {
        Err(format!("pairs {:?}", adv.pairs))
    }
}

fn criterion_5() -> Outcome {
    let before = components(&values("q_hat.txt"));
    let after = components(&values("q_tilde.txt"));
    let p = |set: &ComponentSet64, k: usize| estimate_period(&set.components()[k]);
    let (b2, a2, b3, a3) = (p(&before, 1), p(&after, 1), p(&before, 2), p(&after, 2));
    let summary = format!("periods: second {b2:?} -> {a2:?}, third {b3:?} -> {a3:?}");
    let main = |v: Option<f64>| v.is_some_and(|v| (18.0..=22.0).contains(&v));
    let short = |v: Option<f64>| v.is_some_and(|v| v <= 5.0);
    if main(b2) && main(a2) && short(b3) && short(a3) {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn random_series(rng: &mut ChaCha8Rng) -> (Vec<f64>, usize) {
    let n = rng.gen_range(10..=200);
    let values = (0..n).map(|_| rng.gen_range(-100.0..100.0)).collect();
    (values, rng.gen_range(2..n))
}

/// Anti-diagonal means computed directly from the definition.
fn hankelize_oracle(cells: &[Vec<f64>]) -> Vec<f64> {
    let (l, k) = (cells.len(), cells[0].len());
    (0..l + k - 1)
        .map(|s| {
            let terms: Vec<f64> = (0..l)
                .filter(|&i| s >= i && s - i < k)
                .map(|i| cells[i][s - i])
                .collect();
            terms.iter().sum::<f64>() / terms.len() as f64
        })
        .collect()
}

fn criterion_6() -> Outcome {
    const CASES: usize = 120;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..CASES {
        let (values, l) = random_series(&mut rng);
        let n = values.len();
        let series = Series64::new(values.clone(), "r").unwrap();
        let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let x = embed(&series, l).unwrap();
        let dec = decompose_series(&series, l).unwrap();

        let all = Grouping::full(dec.rank()).unwrap();
        let sum = reconstruct(&dec, &all).unwrap().sum();
        let d = max_dev(&sum, &values);
        if d > 1e-9 * scale {
            return Err(format!("case {case}: reconstruction off by {d:e}"));
        }

        let rows = x.cells().to_rows();
        let back = diagonal_average(x.cells()).unwrap();
        let oracle = hankelize_oracle(&rows);
        if back.values() != oracle.as_slice() {
            let m = l.min(n + 1 - l) as f64;
            let d = max_dev(back.values(), &values);
            if d > 2.0 * m * f64::EPSILON * scale {
                return Err(format!("case {case}: hankelization off by {d:e}"));
            }
        }

        let other = decompose_series(&series, n + 1 - l).unwrap();
        let lead = dec.eigenvalues()[0];
        let r = dec.rank().min(other.rank());
        for i in 0..r {
            let d = (dec.eigenvalues()[i] - other.eigenvalues()[i]).abs();
            if d > 1e-9 * lead {
                return Err(format!(
                    "case {case}: eigenvalue {} differs across L and K by {d:e}",
                    i + 1
                ));
            }
        }

        let frob: f64 = rows.iter().flatten().map(|v| v * v).sum();
        let energy: f64 = dec.eigenvalues().iter().sum();
        if (frob - energy).abs() > 1e-9 * frob {
            return Err(format!("case {case}: energy {energy} vs ‖X‖² {frob}"));
        }

        let counts: Vec<u64> = (0..n).map(|_| rng.gen_range(0..1000)).collect();
        let signal = QuantitySignal::from_counts(counts.clone(), "c");
        let cdec = decompose_series(&signal.to_series::<f64>().unwrap(), l).unwrap();
        let cut = rng.gen_range(1..=cdec.rank());
        let mut subsets = vec![(1..=cut).collect::<Vec<_>>()];
        if cut < cdec.rank() {
            subsets.push((cut + 1..=cdec.rank()).collect());
        }
        let grouping = Grouping::new(subsets, Some(0)).unwrap();
        let trend = reconstruct(&cdec, &grouping).unwrap().components()[0]
            .values()
            .to_vec();
        let plan = MaskPlan::new(l, grouping, TrendSpec::Explicit { values: trend }).unwrap();
        let out = mask_signal(&signal, &plan, Some(&cdec)).unwrap();
        if out.masked.counts() != counts.as_slice() {
            return Err(format!("case {case}: masking identity failed"));
        }
    }
    Ok(format!("{CASES} random series, N in [10, 200]"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let buckets = 25;
    let group = GroupDefinition::new(
        vec!["sex".into(), "duty".into()],
        vec![
            vec!["m".into(), "mil".into()],
            vec!["f".into(), "mil".into()],
        ],
        "age".into(),
        (0..buckets).map(|a| (17 + a).to_string()).collect(),
    )
    .unwrap();
    let in_group = |r: &[String]| {
        r[1] == "mil"
            && r[2]
                .parse::<usize>()
                .is_ok_and(|a| (17..17 + buckets).contains(&a))
    };
    let mut total_rows = 0;
    for case in 0..20 {
        let rows_n = if case == 0 {
            10_000
        } else {
            rng.gen_range(1..=3_000)
        };
        let rows: Vec<Vec<String>> = (0..rows_n)
            .map(|i| {
                vec![
                    ["m", "f"][rng.gen_range(0..2)].to_string(),
                    ["mil", "civ", "mil"][rng.gen_range(0..3)].to_string(),
                    rng.gen_range(15..45).to_string(),
                    format!("row{i}"),
                ]
            })
            .collect();
        total_rows += rows_n;
        let mf = Microfile::new(
            vec!["sex".into(), "duty".into(), "age".into(), "tag".into()],
            rows,
        )
        .unwrap();
        let current = build_quantity_signal(&mf, &group).unwrap();
        if current.total() == 0 {
            continue;
        }
        let target: Vec<u64> = current
            .counts()
            .iter()
            .map(|&c| (c as i64 + rng.gen_range(-50..50)).max(0) as u64)
            .collect();
        let target = current.with_counts(target).unwrap();
        let out = apply_modified_signal(&mf, &group, &target, case, DonorPolicy::NearestParameter)
            .map_err(|e| format!("case {case}: {e}"))?;
        let recount = build_quantity_signal(&out, &group).unwrap();
        if recount.counts() != target.counts() {
            return Err(format!("case {case}: recount differs from target"));
        }
        let outside = |m: &Microfile| {
            m.rows()
                .iter()
                .filter(|r| !in_group(r))
                .cloned()
                .collect::<Vec<_>>()
        };
        if outside(&mf) != outside(&out) {
            return Err(format!("case {case}: rows outside the group changed"));
        }
    }
    Ok(format!("20 microfiles, {total_rows} rows, largest 10000"))
}

fn copy_fixtures(to: &Path) {
    for name in verify::FIXTURES {
        std::fs::copy(reference_dir().join(name), to.join(name)).unwrap();
    }
}

/// Rewrites the `index`-th value line of a fixture with `delta` added.
fn perturb(path: &Path, index: usize, delta: f64) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut seen = 0;
    let lines: Vec<String> = text
        .lines()
        .map(|line| {
            if line.starts_with('#') {
                return line.to_string();
            }
            seen += 1;
            if seen - 1 == index {
                (line.trim().parse::<f64>().unwrap() + delta).to_string()
            } else {
                line.to_string()
            }
        })
        .collect();
    std::fs::write(path, lines.join("\n") + "\n").unwrap();
}

fn criterion_8() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_ssamask");
    let run = |dir: &Path| {
        let out = Command::new(bin)
            .args(["verify-paper", "--fixtures", dir.to_str().unwrap()])
            .output()
            .unwrap();
        (
            out.status.code().unwrap(),
            String::from_utf8_lossy(&out.stdout).into_owned(),
        )
    };
    let (code, _) = run(&reference_dir());
    if code != 0 {
        return Err(format!("intact fixtures exit {code}"));
    }

    let dir = tempfile::tempdir().unwrap();
    let mut perturbations = 0;
    let mut binary_runs = 0;
    for name in verify::FIXTURES {
        let n = fixture(name).values.len();
        for index in 0..n {
            for delta in [1.0, -1.0] {
                copy_fixtures(dir.path());
                perturb(&dir.path().join(name), index, delta);
                perturbations += 1;
                // Every perturbation in process, a spread of them through the binary.
                if index == 0 || index == n / 2 || index + 1 == n {
                    let (code, stdout) = run(dir.path());
                    binary_runs += 1;
                    if code != 2 || !stdout.contains("FAIL") {
                        return Err(format!(
                            "{name} element {} {delta:+}: exit {code}",
                            index + 1
                        ));
                    }
                } else if verify::verify(dir.path())
                    .map_err(|e| e.to_string())?
                    .passed()
                {
                    return Err(format!(
                        "{name} element {} {delta:+} not detected",
                        index + 1
                    ));
                }
            }
        }
    }
    Ok(format!("intact exit 0; {perturbations} single-element perturbations all rejected ({binary_runs} via the binary with exit 2)"))
}

type Criterion = (u8, &'static str, fn() -> Outcome);

#[test]
fn primary_acceptance_criteria() {
    let criteria: [Criterion; 8] = [
        (1, "decomposition of q_hat", criterion_1),
        (2, "masking of q_hat", criterion_2),
        (3, "re-decomposition of q_tilde", criterion_3),
        (4, "spectrum pairs", criterion_4),
        (5, "period preservation", criterion_5),
        (6, "property suites", criterion_6),
        (7, "microfile round trip", criterion_7),
        (8, "verify-paper exit codes", criterion_8),
    ];
    let mut failed = Vec::new();
    for (number, name, check) in criteria {
        let start = std::time::Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let ms = start.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("criterion {number} PASS  {name}: {detail} [{ms} ms]"),
            Err(detail) => {
                println!("criterion {number} FAIL  {name}: {detail} [{ms} ms]");
                failed.push(number);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
