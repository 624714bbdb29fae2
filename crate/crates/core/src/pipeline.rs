//! End-to-end layout: prune, coarsen, draw the coarsest level, then place
//! and refine level by level, reinsert pruned leaves, arrange components,
//! measure and export.

use std::fs;
use std::io::BufReader;
use std::path::Path;
use std::time::Instant;

use crate::config::PipelineConfig;
use crate::engine::RunStats;
use crate::error::{Error, GraphError};
use crate::gila::{prescale, random_square, run_single_level};
use crate::graph::{
    connected_components, load_edge_list, prune_degree_one_iterated, reinsert, Graph, Layout, PruneRecord,
};
use crate::merger::{build_hierarchy, checks, Hierarchy, MergerConfig};
use crate::metrics::{self, count_crossings, ComponentSummary, ExportFormat, RunReport};
use crate::placer::{place_level, PlacementInput};
use crate::seed::mix_seed;

/// Drawing of one connected component.
#[derive(Clone, Debug)]
pub struct ComponentLayout {
    pub graph: Graph,
    pub core: Graph,
    pub pruned: PruneRecord,
    pub hierarchy: Hierarchy,
    /// Drawing of `core` before leaf reinsertion.
    pub core_layout: Layout,
    pub layout: Layout,
    /// Layouts per level, finest first: (placed, refined). The coarsest
    /// level's placement is the random start.
    pub level_layouts: Vec<(Layout, Layout)>,
    pub stats: RunStats,
}

#[derive(Clone, Debug)]
pub struct PipelineOutput {
    pub layout: Layout,
    pub components: Vec<ComponentLayout>,
    pub report: RunReport,
}

fn prune(component: &Graph, iterations: usize) -> Result<(Graph, PruneRecord), Error> {
    if iterations == 0 || component.vertex_count() < 3 {
        return Ok((component.clone(), PruneRecord::default()));
    }
    match prune_degree_one_iterated(component, iterations) {
        Ok(r) => Ok(r),
        Err(GraphError::CoreEmpty) => Ok((component.clone(), PruneRecord::default())),
        Err(e) => Err(Error::Graph { phase: "prune", source: e }),
    }
}

fn masses(h: &Hierarchy, level: usize) -> Vec<f64> {
    h.levels[level].attrs.iter().map(|a| a.mass).collect()
}

/// Lays out one connected component.
pub fn layout_component(component: &Graph, cfg: &PipelineConfig, index: usize) -> Result<ComponentLayout, Error> {
    let exec = cfg.execution();
    let seed = mix_seed(&[cfg.seed, index as u64]);
    let (core, pruned) = prune(component, cfg.prune_iterations)?;
    let merger_cfg = MergerConfig {
        sun_probability: cfg.sun_probability,
        coarsen_threshold: cfg.coarsen_threshold,
        seed,
        execution: exec.clone(),
    };
    let hierarchy = build_hierarchy(&core, &pruned.leaf_counts(), &merger_cfg)
        .map_err(|source| Error::Merger { phase: "coarsen", source })?;
    if cfg.verify {
        checks::verify_hierarchy(&hierarchy).map_err(Error::Invariant)?;
    }
    let mut stats = hierarchy.stats.clone();
    let top = hierarchy.depth() - 1;
    let level_cfg = |level: usize, salt: u64| {
        exec.engine_config(hierarchy.partitions[level].clone(), mix_seed(&[seed, level as u64, salt]))
    };

    let top_graph = &hierarchy.levels[top].graph;
    let start = random_square(top_graph, cfg.layout.ideal_length, mix_seed(&[seed, 0x5747]));
    let params = cfg.layout.params(top_graph.edge_count(), true);
    let (mut current, s) = run_single_level(top_graph, &start, Some(&masses(&hierarchy, top)), top as u32, &params, &level_cfg(top, 1))
        .map_err(|source| Error::Engine { phase: "layout", source })?;
    stats.absorb(&s);
    let mut level_layouts = vec![(start, current.clone())];

    for i in (0..top).rev() {
        let level = &hierarchy.levels[i];
        let input = PlacementInput {
            level,
            coarse_graph: &hierarchy.levels[i + 1].graph,
            coarse_layout: &current,
            parent: &hierarchy.parents[i],
        };
        let (placed, s) = place_level(&input, &level_cfg(i, 2), &level_cfg(i + 1, 3))
            .map_err(|source| Error::Placer { phase: "place", source })?;
        stats.absorb(&s);
        if !placed.covers(&level.graph) {
            return Err(Error::Invariant(format!("placement of level {i} is not total")));
        }
        let params = cfg.layout.params(level.graph.edge_count(), false);
        let (placed, _) = prescale(&level.graph, &placed, Some(&masses(&hierarchy, i)), i as u32, &params, &level_cfg(i, 4))
            .map_err(|source| Error::Engine { phase: "layout", source })?;
        let (refined, s) = run_single_level(&level.graph, &placed, Some(&masses(&hierarchy, i)), i as u32, &params, &level_cfg(i, 1))
            .map_err(|source| Error::Engine { phase: "layout", source })?;
        stats.absorb(&s);
        level_layouts.push((placed, refined.clone()));
        current = refined;
    }
    level_layouts.reverse();

    let layout = reinsert(&current, &pruned, component);
    if !layout.covers(component) || layout.iter().any(|(_, p)| !p.is_finite()) {
        return Err(Error::Invariant(format!("component {index}: drawing is incomplete or not finite")));
    }
    Ok(ComponentLayout {
        graph: component.clone(),
        core,
        pruned,
        hierarchy,
        core_layout: current,
        layout,
        level_layouts,
        stats,
    })
}

fn dump_levels(dir: &Path, components: &[ComponentLayout]) -> Result<(), Error> {
    fs::create_dir_all(dir).map_err(|e| Error::io("dump levels", e))?;
    for (c, comp) in components.iter().enumerate() {
        for (i, (placed, refined)) in comp.level_layouts.iter().enumerate() {
            let g = &comp.hierarchy.levels[i].graph;
            for (name, layout) in [("placed", placed), ("refined", refined)] {
                let text = metrics::export(g, layout, ExportFormat::Coords, None)
                    .map_err(|source| Error::Metrics { phase: "dump levels", source })?;
                fs::write(dir.join(format!("component{c}_level{i}_{name}.coords")), text)
                    .map_err(|e| Error::io("dump levels", e))?;
            }
            fs::write(dir.join(format!("component{c}_level{i}.edges")), g.to_edge_list())
                .map_err(|e| Error::io("dump levels", e))?;
        }
    }
    Ok(())
}

/// Lays out every component of `g` and arranges them side by side.
pub fn layout_graph(g: &Graph, cfg: &PipelineConfig) -> Result<PipelineOutput, Error> {
    cfg.validate()?;
    let started = Instant::now();
    let components: Vec<ComponentLayout> = connected_components(g)
        .iter()
        .enumerate()
        .map(|(i, c)| layout_component(c, cfg, i))
        .collect::<Result<_, _>>()?;
    let parts: Vec<(Graph, Layout)> = components.iter().map(|c| (c.graph.clone(), c.layout.clone())).collect();
    let layout = metrics::arrange_components(&parts);
    if !layout.covers(g) {
        return Err(Error::Invariant("arranged drawing misses vertices".into()));
    }

    let mut report = if g.edge_count() > 0 {
        RunReport::from_quality(&metrics::quality(g, &layout).map_err(|source| Error::Metrics { phase: "metrics", source })?)
    } else {
        RunReport::default()
    };
    let mut stats = RunStats::default();
    let mut delta = 0i64;
    for c in &components {
        stats.absorb(&c.stats);
        report.pruned_leaves += c.pruned.removed().count();
        if !c.pruned.is_empty() {
            delta += count_crossings(&c.graph, &c.layout) as i64 - count_crossings(&c.core, &c.core_layout) as i64;
        }
        report.components.push(ComponentSummary {
            vertices: c.graph.vertex_count(),
            edges: c.graph.edge_count(),
            level_sizes: c.hierarchy.level_sizes(),
        });
    }
    report.levels = components.first().map(|c| c.hierarchy.level_sizes()).unwrap_or_default();
    report.supersteps = stats.supersteps_executed;
    report.messages = stats.total_messages();
    report.message_bytes = stats.total_bytes();
    report.reinsertion_crossing_delta = delta;
    if cfg.verbose {
        eprintln!(
            "laid out {} vertices, {} edges, {} components in {:.2?}",
            g.vertex_count(),
            g.edge_count(),
            components.len(),
            started.elapsed()
        );
    }
    if let Some(dir) = &cfg.dump_levels {
        dump_levels(dir, &components)?;
    }
    Ok(PipelineOutput { layout, components, report })
}

pub fn read_graph(path: &Path) -> Result<Graph, Error> {
    let file = fs::File::open(path).map_err(|e| Error::io("read input", format!("{}: {e}", path.display())))?;
    load_edge_list(BufReader::new(file)).map_err(|source| Error::Graph { phase: "read input", source })
}

/// Reads `cfg.input`, lays it out and writes every requested artifact.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineOutput, Error> {
    let input = cfg.input.as_ref().ok_or_else(|| Error::Config("no input file given".into()))?;
    let g = read_graph(input)?;
    let out = layout_graph(&g, cfg)?;
    let targets = [(&cfg.svg, ExportFormat::Svg), (&cfg.coords, ExportFormat::Coords), (&cfg.report, ExportFormat::JsonReport)];
    for (path, format) in targets {
        if let Some(path) = path {
            let text = metrics::export(&g, &out.layout, format, Some(&out.report))
                .map_err(|source| Error::Metrics { phase: "export", source })?;
            fs::write(path, text).map_err(|e| Error::io("export", format!("{}: {e}", path.display())))?;
        }
    }
    Ok(out)
}
