//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines come out in order; exits nonzero if any fails.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pulled_saw::enumerate::{enumerate_with, verify_oracle, CountTable, EnumConfig, WalkClass};
use pulled_saw::flatperm::{compare, run_flatperm, FlatPermConfig};
use pulled_saw::io::{read_manifest, table_payload, checksum, Table};
use pulled_saw::legendre::{density_grid, finite_curve, inequality_report, legendre_transform, InequalityTables};
use pulled_saw::phase::{boundary_point, default_ladder, estimate_critical, force_curve, Axis};
use pulled_saw::thermo::{
    default_log_grid, evaluate_partition, log_growth, Estimate, LimitCurves, LogDensity, Observable, PartitionKind,
    WeightPoint,
};

type Outcome = Result<String, String>;

fn table(d: usize, n: usize, class: WalkClass) -> CountTable {
    let cfg = EnumConfig { symmetry: d >= 2 && class != WalkClass::PositiveUnfolded, ..EnumConfig::default() };
    enumerate_with(d, n, class, &cfg).expect("enumeration")
}

fn within(limit: Duration, started: Instant) -> Result<f64, String> {
    let s = started.elapsed().as_secs_f64();
    if started.elapsed() <= limit {
        Ok(s)
    } else {
        Err(format!("took {s:.1} s, limit {} s", limit.as_secs()))
    }
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

struct Plane2 {
    positive: CountTable,
    full: CountTable,
    plane: CountTable,
    enumerate_full_seconds: f64,
    curves: LimitCurves,
}

fn plane2() -> Plane2 {
    let positive = table(2, 20, WalkClass::Positive);
    let t = Instant::now();
    let full = table(2, 20, WalkClass::FullLattice);
    let enumerate_full_seconds = t.elapsed().as_secs_f64();
    let plane = table(2, 20, WalkClass::Plane);
    let curves = LimitCurves::new(
        &LogDensity::from(&positive),
        &LogDensity::from(&full),
        &LogDensity::from(&plane),
    )
    .expect("limit curves");
    Plane2 { positive, full, plane, enumerate_full_seconds, curves }
}

fn hand_tables_and_oracle() -> Outcome {
    let started = Instant::now();
    let t = table(2, 2, WalkClass::Positive);
    let hand: [&[((u32, i32), u64)]; 2] = [
        &[((1, 0), 2), ((0, 1), 1)],
        &[((2, 0), 2), ((1, 1), 2), ((0, 1), 2), ((0, 2), 1)],
    ];
    for (n, cells) in hand.iter().enumerate().map(|(i, c)| (i + 1, c)) {
        let level = t.level(n).map_err(|e| e.to_string())?;
        ensure(level.len() == cells.len(), || format!("n={n}: {} cells, want {}", level.len(), cells.len()))?;
        for &((v, h), want) in cells.iter() {
            let got = t.get_u64(n, v, h);
            ensure(got == want, || format!("c_{n}({v},{h}) = {got}, want {want}"))?;
        }
    }
    let mut levels = 0;
    for (d, n_max) in [(2, 10), (3, 7)] {
        for class in WalkClass::ALL {
            let t = table(d, n_max, class);
            for n in 0..=n_max {
                let c = verify_oracle(d, n, class, &t);
                ensure(c.matches, || format!("d={d} {class} n={n} differs at {:?}", c.first_mismatch))?;
                levels += 1;
            }
        }
    }
    let s = within(Duration::from_secs(300), started)?;
    Ok(format!("hand tables exact; {levels} oracle levels match ({s:.1} s)"))
}

fn convexity(positive: &CountTable) -> Outcome {
    let started = Instant::now();
    let density = LogDensity::from(positive);
    let grid = default_log_grid();
    let k = grid.len();
    let mut worst = f64::INFINITY;
    for n in 1..=16 {
        let mut f = vec![0.0; k * k];
        for (i, &u) in grid.iter().enumerate() {
            for (j, &w) in grid.iter().enumerate() {
                let wp = WeightPoint::from_logs(u, w).map_err(|e| e.to_string())?;
                f[i * k + j] = evaluate_partition(&density, &wp, n, PartitionKind::C).map_err(|e| e.to_string())? / n as f64;
            }
        }
        // every pair of grid points whose midpoint is also a grid point
        for p in 0..k * k {
            let (pi, pj) = (p / k, p % k);
            for q in p + 1..k * k {
                let (qi, qj) = (q / k, q % k);
                if (pi + qi) % 2 != 0 || (pj + qj) % 2 != 0 {
                    continue;
                }
                let m = (pi + qi) / 2 * k + (pj + qj) / 2;
                worst = worst.min(f[p] + f[q] - 2.0 * f[m]);
            }
        }
    }
    ensure(worst >= -1e-10, || format!("midpoint slack {worst:e}"))?;
    let s = within(Duration::from_secs(60), started)?;
    Ok(format!("41x41 grid, n<=16, min midpoint slack {worst:.3e} ({s:.1} s)"))
}

struct Exact16 {
    positive: CountTable,
    unfolded: CountTable,
    plane: CountTable,
}

fn loop_tail_inequalities(t: &Exact16) -> Outcome {
    let started = Instant::now();
    let grid = default_log_grid();
    let tables = InequalityTables { positive: &t.positive, unfolded: &t.unfolded, plane: &t.plane };
    let reports = inequality_report(tables, &grid, &grid).map_err(|e| e.to_string())?;
    let mut line = Vec::new();
    for name in ["loop-tail-lower", "loop-tail-upper"] {
        let r = reports.iter().find(|r| r.name == name).ok_or(format!("no {name} report"))?;
        let slack = r.min_slack();
        ensure(slack >= -1e-9, || format!("{name} slack {slack:e} at {:?}", r.worst()))?;
        line.push(format!("{name} min slack {slack:.3e}"));
    }
    let upper = reports.iter().find(|r| r.name == "loop-tail-upper").unwrap();
    let seven = upper
        .instances
        .iter()
        .find(|i| i.n == Some(2) && i.log_a.abs() < 1e-12 && i.log_y.abs() < 1e-12)
        .ok_or("no n=2 instance at a=y=1")?;
    let ln7 = 7f64.ln();
    ensure((seven.lhs - ln7).abs() < 1e-12 && (seven.rhs - ln7).abs() < 1e-12, || {
        format!("n=2 instance is {} <= {}", seven.lhs.exp(), seven.rhs.exp())
    })?;
    let s = within(Duration::from_secs(120), started)?;
    Ok(format!("{}; 7 = 7 at n=2 ({s:.1} s)", line.join(", ")))
}

fn structural_bounds(t: &Exact16) -> Outcome {
    let grid = default_log_grid();
    let tables = InequalityTables { positive: &t.positive, unfolded: &t.unfolded, plane: &t.plane };
    let reports = inequality_report(tables, &grid, &grid).map_err(|e| e.to_string())?;
    let mut line = Vec::new();
    for name in ["plane-loops", "rod-tails"] {
        let r = reports.iter().find(|r| r.name == name).ok_or(format!("no {name} report"))?;
        let slack = r.min_slack();
        ensure(slack >= -1e-9 && !r.instances.is_empty(), || format!("{name} slack {slack:e} at {:?}", r.worst()))?;
        line.push(format!("{name} min slack {slack:.3e}"));
    }
    let density = LogDensity::from(&t.positive);
    for &u in &grid {
        let wp = WeightPoint::from_logs(u, 0.0).map_err(|e| e.to_string())?;
        let l2 = evaluate_partition(&density, &wp, 2, PartitionKind::L).map_err(|e| e.to_string())?;
        let want = 2f64.ln() + 2.0 * u;
        ensure((l2 - want).abs() < 1e-12, || format!("log L_2 = {l2}, want {want} at log a = {u}"))?;
    }
    Ok(format!("{}; L_2(a) = 2a^2 on the grid", line.join(", ")))
}

fn legendre_round_trip(positive: &CountTable) -> Outcome {
    let density = LogDensity::from(positive);
    let grid = default_log_grid();
    let mut worst: f64 = 0.0;
    for n in [8, 12, 16] {
        let curve = finite_curve(&density, Observable::Visits, n, &grid).map_err(|e| e.to_string())?;
        let table = legendre_transform(&grid, &curve, &density_grid()).map_err(|e| e.to_string())?;
        let r = table.max_interior_residual();
        ensure(r < 1e-6, || format!("n={n}: residual {r:e}"))?;
        worst = worst.max(r);
    }
    Ok(format!("n in {{8,12,16}}, max interior residual {worst:.3e}"))
}

fn growth_constants(p: &Plane2) -> Outcome {
    ensure(p.enumerate_full_seconds < 60.0, || {
        format!("full-lattice n=20 enumeration took {:.1} s", p.enumerate_full_seconds)
    })?;
    let from_full = p.curves.log_mu_d;
    let from_tails = p.curves.pulled.limit_at_log_y(0.0).map_err(|e| e.to_string())?;
    ensure(from_full.agrees_with(&from_tails), || {
        format!("log mu_2: full {from_full:?} vs tails {from_tails:?}")
    })?;
    let line = LogDensity::from(&table(1, 20, WalkClass::FullLattice));
    let mu1 = log_growth(&line).map_err(|e| e.to_string())?;
    ensure(mu1.value == 0.0 && mu1.half_width == 0.0, || format!("log mu_1 = {mu1:?}"))?;
    ensure(p.curves.log_mu_plane.value == 0.0, || format!("plane log mu_1 = {:?}", p.curves.log_mu_plane))?;
    Ok(format!(
        "mu_2 = {:.4} +- {:.4} (full), {:.4} +- {:.4} (T_n(1)); mu_1 = 1 exactly; full n=20 in {:.1} s",
        from_full.value.exp(),
        from_full.half_width * from_full.value.exp(),
        from_tails.value.exp(),
        from_tails.half_width * from_tails.value.exp(),
        p.enumerate_full_seconds
    ))
}

fn boundary_brackets(p: &Plane2) -> Outcome {
    let mut points = Vec::new();
    for a in 4..=20 {
        let b = boundary_point(a as f64, &p.curves).map_err(|e| format!("a={a}: {e}"))?;
        ensure(b.in_bracket, || format!("a={a}: log y_c = {} outside {:?}", b.log_y, b.bracket))?;
        points.push(b);
    }
    ensure(points.windows(2).all(|w| w[1].log_y > w[0].log_y), || "boundary not strictly increasing".into())?;
    let last = points.last().unwrap();
    let ratio = last.log_y / last.a.ln();
    ensure((0.8..=1.2).contains(&ratio), || format!("log y_c(20)/log 20 = {ratio}"))?;
    Ok(format!(
        "{} samples in brackets, strictly increasing, y_c(20) = {:.3}, ratio {ratio:.4}",
        points.len(),
        last.y
    ))
}

fn a_min(positive: &LogDensity) -> f64 {
    estimate_critical(Axis::A, positive, &default_ladder(positive.n_max()))
        .map(|c| c.value + c.half_width)
        .unwrap_or(1.0)
}

const T_GRID: [f64; 8] = [0.1, 0.15, 0.2, 0.3, 0.4, 0.5, 0.75, 1.0];

fn low_t_slope(curves: &LimitCurves, positive: &CountTable) -> Result<Estimate, String> {
    let fc = force_curve(-1.0, &T_GRID, curves, a_min(&LogDensity::from(positive))).map_err(|e| e.to_string())?;
    fc.slope_at_low_t.ok_or_else(|| format!("fewer than two samples; skipped {:?}", fc.skipped))
}

fn reentrance(p: &Plane2) -> Outcome {
    let s2 = low_t_slope(&p.curves, &p.positive)?;
    ensure(s2.value.abs() <= 0.05, || format!("d=2 slope {s2:?}"))?;

    let positive = table(3, 12, WalkClass::Positive);
    let full = table(3, 12, WalkClass::FullLattice);
    let plane = table(3, 16, WalkClass::Plane);
    let mc = run_flatperm(3, 20, &FlatPermConfig::new(200_000, 11)).map_err(|e| e.to_string())?;
    let extended = LogDensity::from(&positive).extended_by(&mc.to_log_density());
    let curves = LimitCurves::new(&extended, &LogDensity::from(&full), &LogDensity::from(&plane))
        .map_err(|e| e.to_string())?;
    let s3 = low_t_slope(&curves, &positive)?;
    let mu2 = curves.log_mu_plane;
    let combined = s3.half_width + mu2.half_width;
    ensure(s3.value > 0.0 && (s3.value - mu2.value).abs() <= 3.0 * combined, || {
        format!("d=3 slope {s3:?} vs log mu_2 {mu2:?}")
    })?;
    Ok(format!(
        "d=2 slope {:.4} +- {:.4}; d=3 slope {:.4} +- {:.4} vs log mu_2 {:.4} +- {:.4}",
        s2.value, s2.half_width, s3.value, s3.half_width, mu2.value, mu2.half_width
    ))
}

fn flatperm_validation() -> Outcome {
    let started = Instant::now();
    let exact = table(2, 10, WalkClass::Positive);
    let cfg = |workers| FlatPermConfig { workers: Some(workers), ..FlatPermConfig::new(1_000_000, 2024) };
    let one = run_flatperm(2, 10, &cfg(1)).map_err(|e| e.to_string())?;
    let cmp = compare(&one, &exact).map_err(|e| e.to_string())?;
    let worst = cmp.levels.iter().map(|l| l.max_relative_error).fold(0.0, f64::max);
    let missing: usize = cmp.levels.iter().map(|l| l.missing).sum();
    ensure(cmp.pass, || format!("max relative error {worst:.4}, {missing} missing cells"))?;
    let eight = run_flatperm(2, 10, &cfg(8)).map_err(|e| e.to_string())?;
    let sum = |e| checksum(&table_payload(&Table::Stochastic(e)));
    let (c1, c8) = (sum(one), sum(eight));
    ensure(c1 == c8, || format!("checksums differ: {c1} vs {c8}"))?;
    let s = within(Duration::from_secs(600), started)?;
    Ok(format!("max relative error {:.2}%, 1 and 8 workers identical ({s:.1} s)", 100.0 * worst))
}

fn run_cli(dir: &Path, name: &str, args: &[&str]) -> Result<String, String> {
    let out = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_pulled-saw"))
        .args(args)
        .arg("--out")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(status.status.success(), || format!("{args:?}: {}", String::from_utf8_lossy(&status.stderr)))?;
    Ok(read_manifest(&out).map_err(|e| e.to_string())?.checksum)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let jobs: [(&str, Vec<&str>); 4] = [
        ("positive", vec!["enumerate", "--dim", "2", "--nmax", "12", "--class", "positive", "--no-cache"]),
        ("unfolded", vec!["enumerate", "--dim", "2", "--nmax", "12", "--class", "positive-unfolded", "--no-cache"]),
        ("full3", vec!["enumerate", "--dim", "3", "--nmax", "8", "--class", "full-lattice", "--no-cache"]),
        ("mc", vec!["mc", "--dim", "2", "--nmax", "10", "--tours", "20000", "--seed", "7", "--batch-size", "1000"]),
    ];
    for (name, args) in &jobs {
        let mut sums = Vec::new();
        for (run, workers) in ["1", "1", "3", "8"].into_iter().enumerate() {
            let mut a = args.clone();
            a.extend(["--workers", workers]);
            sums.push(run_cli(dir.path(), &format!("{name}-{run}.csv"), &a)?);
        }
        ensure(sums.iter().all(|s| *s == sums[0]), || format!("{name}: checksums {sums:?}"))?;
    }
    Ok(format!("{} commands x 4 runs (workers 1,1,3,8) give identical checksums", jobs.len()))
}

fn main() {
    let mut failures = 0;
    let mut report = |id: usize, title: &str, outcome: Outcome| {
        match outcome {
            Ok(detail) => println!("PASS [{id}] {title}: {detail}"),
            Err(why) => {
                failures += 1;
                println!("FAIL [{id}] {title}: {why}");
            }
        }
    };

    let p = plane2();
    let exact16 = Exact16 {
        positive: p.positive.truncated(16),
        unfolded: table(2, 16, WalkClass::PositiveUnfolded),
        plane: p.plane.truncated(16),
    };
    let _ = &p.full;

    report(1, "hand-table exactness and oracle equivalence", hand_tables_and_oracle());
    report(2, "finite-n convexity", convexity(&exact16.positive));
    report(3, "loop/tail inequalities", loop_tail_inequalities(&exact16));
    report(4, "structural bounds", structural_bounds(&exact16));
    report(5, "Legendre round trip", legendre_round_trip(&exact16.positive));
    report(6, "growth-constant self-consistency", growth_constants(&p));
    report(7, "phase-boundary brackets", boundary_brackets(&p));
    report(8, "reentrance signature", reentrance(&p));
    report(9, "flatPERM validation", flatperm_validation());
    report(10, "determinism across worker counts", determinism());

    if failures > 0 {
        println!("{failures} criteria failed");
        std::process::exit(1);
    }
}
