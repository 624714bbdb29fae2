//! Acceptance criteria 1 to 8. Prints one PASS/FAIL line per criterion with
//! the measured values. Exits nonzero on a failure only when
//! `ACCEPTANCE_STRICT=1`; otherwise failures are reported but the run
//! succeeds, so hardware-bound criteria do not break `cargo test`.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use multigila::config::PipelineConfig;
use multigila::engine::EngineConfig;
use multigila::generators;
use multigila::gila::{choose_k, flood_neighborhoods, random_square};
use multigila::graph::{reinsertion_radius, Graph, Layout, Point};
use multigila::merger::{build_hierarchy, checks, MergerConfig};
use multigila::metrics::{count_crossings, count_crossings_brute_force, export, ExportFormat};
use multigila::pipeline::{layout_graph, ComponentLayout};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: [u64; 5] = [0, 1, 2, 3, 4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn corpus() -> Vec<(String, Graph)> {
    let mut out = Vec::new();
    for s in [10, 15, 20, 25, 30, 35, 40] {
        out.push((format!("grid_{s}_{s}"), generators::grid(s, s)));
    }
    for n in [10, 500] {
        out.push((format!("path_{n}"), generators::path(n)));
    }
    for (b, d) in [(2, 6), (3, 4), (5, 3), (6, 4)] {
        out.push((format!("tree_{b}_{d}"), generators::tree(b, d)));
    }
    for d in 3..=6 {
        out.push((format!("sierpinski_{d}"), generators::sierpinski(d)));
    }
    for (n, m) in [(100, 150), (500, 1000), (2000, 4000)] {
        out.push((format!("random_{n}_{m}"), generators::random_connected(n, m, 17)));
    }
    out
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    xs[xs.len() / 2]
}

fn coords(g: &Graph, cfg: &PipelineConfig) -> (String, Duration) {
    let t = Instant::now();
    let out = layout_graph(g, cfg).expect("layout");
    let elapsed = t.elapsed();
    (export(g, &out.layout, ExportFormat::Coords, None).expect("export"), elapsed)
}

fn protocol_correctness() -> Outcome {
    let started = Instant::now();
    let (mut runs, mut failures) = (0, Vec::new());
    for (name, g) in corpus() {
        for seed in SEEDS {
            runs += 1;
            let cfg = MergerConfig { seed, ..MergerConfig::default() };
            let result = build_hierarchy(&g, &BTreeMap::new(), &cfg)
                .map_err(|e| e.to_string())
                .and_then(|h| checks::verify_hierarchy(&h));
            if let Err(e) = result {
                failures.push(format!("{name}/{seed}: {e}"));
            }
        }
    }
    let elapsed = started.elapsed();
    Outcome {
        pass: failures.is_empty() && elapsed < Duration::from_secs(120),
        detail: format!("{}/{runs} hierarchies valid in {elapsed:.1?} {:?}", runs - failures.len(), failures.first()),
    }
}

fn drawing_quality() -> Outcome {
    let started = Instant::now();
    let targets = [
        ("grid_20_20", generators::grid(20, 20), 0.05),
        ("grid_40_40", generators::grid(40, 40), 0.05),
        ("sierpinski_06", generators::sierpinski(6), 0.2),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, g, cre_bound) in targets {
        let (mut cres, mut nelds) = (Vec::new(), Vec::new());
        for seed in SEEDS {
            let out = layout_graph(&g, &PipelineConfig { seed, ..PipelineConfig::default() }).expect("layout");
            cres.push(out.report.cre);
            nelds.push(out.report.neld);
        }
        let (cre, neld) = (median(cres), median(nelds));
        let ok_cre = cre <= cre_bound;
        let ok_neld = (0.1..=1.2).contains(&neld);
        pass &= ok_cre && ok_neld;
        parts.push(format!(
            "{name} cre {cre:.4}{} neld {neld:.3}{}",
            if ok_cre { "" } else { "(!)" },
            if ok_neld { "" } else { "(!)" }
        ));
    }
    let elapsed = started.elapsed();
    pass &= elapsed < Duration::from_secs(600);
    Outcome { pass, detail: format!("median of 5 seeds: {}; {elapsed:.1?}", parts.join(", ")) }
}

fn hierarchy_depth() -> Outcome {
    let graphs = [
        ("grid_20_20", generators::grid(20, 20)),
        ("sierpinski_06", generators::sierpinski(6)),
        ("tree_06_04", generators::tree(6, 4)),
        ("grid_40_40", generators::grid(40, 40)),
        ("random_5000_10000", generators::random_connected(5000, 10_000, 3)),
        ("mesh_100_100", generators::triangulated_grid(100, 100)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, g) in graphs {
        let n = g.vertex_count() as f64;
        let lg = (n / 30.0).log2();
        let (lo, hi) = ((lg / 3.0).ceil() as usize, lg.ceil() as usize + 1);
        let out = layout_graph(&g, &PipelineConfig::default()).expect("layout");
        let depth = out.components[0].hierarchy.depth();
        let ok = (lo..=hi).contains(&depth);
        pass &= ok;
        parts.push(format!("{name} {depth} in [{lo},{hi}]{}", if ok { "" } else { "(!)" }));
    }
    Outcome { pass, detail: parts.join(", ") }
}

fn random_layout(g: &Graph, rng: &mut ChaCha8Rng) -> Layout {
    g.ids().iter().map(|&id| (id, Point::new(rng.gen(), rng.gen()))).collect()
}

fn oracle_equivalence() -> Outcome {
    let mut flood_checks = 0;
    let mut flood_bad = Vec::new();
    for (name, g) in corpus() {
        let layout = random_square(&g, 1.0, 1);
        for k in BTreeSet::from([1, 2, choose_k(g.edge_count())]) {
            flood_checks += 1;
            let views = flood_neighborhoods(&g, &layout, None, k, &EngineConfig::default()).expect("flood");
            let equal = views.iter().enumerate().all(|(i, view)| {
                let mut bfs = g.bfs_distances(g.id(i), k);
                bfs.remove(&g.id(i));
                let got: BTreeMap<u64, usize> = view.hops().map(|(id, h)| (id, h as usize)).collect();
                got == bfs
            });
            if !equal {
                flood_bad.push(format!("{name}/k{k}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut sweep_bad = 0;
    for i in 0..100u64 {
        let n = rng.gen_range(2..=600u64);
        let m = rng.gen_range(n - 1..=(n * (n - 1) / 2).min(1000));
        let g = generators::random_connected(n, m, i);
        let mut layout = random_layout(&g, &mut rng);
        if i % 4 == 0 {
            // snap to a coarse lattice to force shared x coordinates and collinear pieces
            layout = layout.map(|p| Point::new((p.x * 8.0).round(), (p.y * 8.0).round()));
        }
        if count_crossings(&g, &layout) != count_crossings_brute_force(&g, &layout) {
            sweep_bad += 1;
        }
    }
    Outcome {
        pass: flood_bad.is_empty() && sweep_bad == 0,
        detail: format!(
            "flood = BFS on {}/{flood_checks} (graph, k) pairs; sweep = brute force on {}/100 layouts",
            flood_checks - flood_bad.len(),
            100 - sweep_bad
        ),
    }
}

fn determinism_and_scaling() -> Outcome {
    let g = generators::grid(40, 40);
    let reference = coords(&g, &PipelineConfig { workers: 1, ..PipelineConfig::default() }).0;
    let identical = [2, 4, 8]
        .iter()
        .all(|&workers| coords(&g, &PipelineConfig { workers, ..PipelineConfig::default() }).0 == reference);

    let big = generators::triangulated_grid(184, 184);
    let (c1, t1) = coords(&big, &PipelineConfig { workers: 1, ..PipelineConfig::default() });
    let (c4, t4) = coords(&big, &PipelineConfig { workers: 4, ..PipelineConfig::default() });
    let ratio = t4.as_secs_f64() / t1.as_secs_f64();
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    Outcome {
        pass: identical && c1 == c4 && ratio <= 0.7,
        detail: format!(
            "workers 1/2/4/8 identical: {}; {} edges: 1 worker {t1:.1?}, 4 workers {t4:.1?}, ratio {ratio:.2} (<= 0.70), {cores} core(s) available",
            identical && c1 == c4,
            big.edge_count()
        ),
    }
}

fn throughput() -> Outcome {
    let g = generators::triangulated_grid(130, 130);
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let t = Instant::now();
    let out = layout_graph(&g, &PipelineConfig { workers: 4, ..PipelineConfig::default() }).expect("layout");
    let elapsed = t.elapsed();
    Outcome {
        pass: elapsed < Duration::from_secs(300),
        detail: format!(
            "{} vertices, {} edges in {elapsed:.1?} with 4 workers on {cores} core(s), cre {:.4}",
            g.vertex_count(),
            g.edge_count(),
            out.report.cre
        ),
    }
}

fn parameter_schedule() -> Outcome {
    let cases = [(999, 6), (1_000, 5), (4_999, 5), (5_000, 4), (9_999, 4), (10_000, 3), (99_999, 3), (100_000, 2), (999_999, 2), (1_000_000, 1)];
    let bad: Vec<_> = cases.iter().filter(|&&(m, k)| choose_k(m) != k).collect();
    Outcome { pass: bad.is_empty(), detail: format!("{}/{} boundary values", cases.len() - bad.len(), cases.len()) }
}

fn segments_overlap_or_cross(anchor: Point, a: Point, b: Point) -> bool {
    // two segments from a shared anchor meet elsewhere only when collinear and same-directed
    let (u, v) = (a - anchor, b - anchor);
    let cross = u.x * v.y - u.y * v.x;
    let dot = u.x * v.x + u.y * v.y;
    cross.abs() <= 1e-12 * u.norm() * v.norm() && dot > 0.0
}

fn check_reinsertion(comp: &ComponentLayout) -> Result<(), String> {
    let mut visible = comp.core_layout.clone();
    for pass in comp.pruned.passes.iter().rev() {
        let mut fans: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
        for &(leaf, anchor) in pass {
            fans.entry(anchor).or_default().push(leaf);
        }
        for (anchor, leaves) in &fans {
            let center = comp.layout.get(*anchor).ok_or("anchor missing")?;
            let radius = reinsertion_radius(*anchor, &visible, &comp.graph);
            let points: Vec<Point> = leaves.iter().map(|&l| comp.layout.get(l).ok_or("leaf missing")).collect::<Result<_, _>>()?;
            for (l, p) in leaves.iter().zip(&points) {
                if p.distance(center) > radius * (1.0 + 1e-9) {
                    return Err(format!("leaf {l} at {} beyond radius {radius}", p.distance(center)));
                }
            }
            for i in 0..points.len() {
                for j in i + 1..points.len() {
                    if segments_overlap_or_cross(center, points[i], points[j]) {
                        return Err(format!("fan edges of {anchor} to {} and {} overlap", leaves[i], leaves[j]));
                    }
                }
            }
        }
        for &(leaf, _) in pass {
            visible.insert(leaf, comp.layout.get(leaf).ok_or("leaf missing")?);
        }
    }
    Ok(())
}

fn reinsertion_locality() -> Outcome {
    let mut failures = Vec::new();
    let (mut leaves, mut delta) = (0usize, 0i64);
    for (name, g) in corpus() {
        for seed in SEEDS {
            let out = layout_graph(&g, &PipelineConfig { seed, ..PipelineConfig::default() }).expect("layout");
            leaves += out.report.pruned_leaves;
            delta += out.report.reinsertion_crossing_delta;
            for comp in &out.components {
                if let Err(e) = check_reinsertion(comp) {
                    failures.push(format!("{name}/{seed}: {e}"));
                }
            }
        }
    }
    Outcome {
        pass: failures.is_empty(),
        detail: format!(
            "{leaves} reinserted leaves checked, {} violations {:?}; total crossing delta {delta} (informational)",
            failures.len(),
            failures.first()
        ),
    }
}

fn main() {
    type Check = fn() -> Outcome;
    let criteria: [(&str, Check); 8] = [
        ("protocol correctness", protocol_correctness),
        ("drawing quality", drawing_quality),
        ("hierarchy depth", hierarchy_depth),
        ("oracle equivalence", oracle_equivalence),
        ("determinism and scaling", determinism_and_scaling),
        ("throughput", throughput),
        ("parameter schedule", parameter_schedule),
        ("reinsertion locality", reinsertion_locality),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("{} criterion {} ({name}): {}", if o.pass { "PASS" } else { "FAIL" }, i + 1, o.detail);
    }
    println!("{}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
