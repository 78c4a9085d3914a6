//! Browser bindings. Every export takes text and returns a JSON string; the
//! `*_json` functions hold the logic so they can be exercised natively.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use cybertopo::io;
use cybertopo::path::{cyclomatic, path_homology};
use cybertopo::tme::select_bandwidth;
use cybertopo::wireless::{criticality_report, traffic_sim, ComplexKind, WirelessNetwork};
use cybertopo::{Error, SimplicialComplex};

type Result<T> = std::result::Result<T, Error>;

fn facets(k: &SimplicialComplex) -> Vec<Vec<String>> {
    k.facets().iter().map(|f| k.label_simplex(f)).collect()
}

/// Uniform random nodes in a square, as network JSON.
pub fn random_network_json(n: usize, side: f64, radius: f64, seed: u64) -> Result<String> {
    let w = WirelessNetwork::random_geometric(n, side, radius, seed)?;
    Ok(io::write_network_json(&w))
}

/// Complexes, per-vertex `LH_1` and `LH_2`, and forwarding counts.
pub fn network_json(text: &str, kind: &str, packets: u64, seed: u64) -> Result<String> {
    let w = io::parse_network_json(text)?;
    let kind: ComplexKind = kind.parse()?;
    let link = w.link_complex(Some(2))?;
    let inter = w.interference_complex(Some(2))?;
    let report = criticality_report(&w, &[1, 2], kind)?;
    let traffic = traffic_sim(&w, packets, seed);
    let (lh1, lh2) = (report.vertex_values(1), report.vertex_values(2));
    let nodes: Vec<Value> = w
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| {
            json!({
                "id": n.id,
                "x": n.x,
                "y": n.y,
                "radius": n.radius,
                "lh1": lh1[i],
                "lh2": lh2[i],
                "forwards": traffic.forwards[i],
            })
        })
        .collect();
    Ok(json!({
        "nodes": nodes,
        "edges": w.link_edges().iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
        "link_facets": facets(&link),
        "interference_facets": facets(&inter),
        "means": report.means,
        "delivered": traffic.delivered,
        "dropped": traffic.dropped,
    })
    .to_string())
}

/// Bandwidth scan and unimodal decomposition of whitespace-separated samples.
pub fn tme_json(text: &str, bins: usize, bandwidths: usize) -> Result<String> {
    let samples = io::parse_samples(text)?;
    let est = select_bandwidth(&samples, bandwidths, bins)?;
    Ok(json!({
        "samples": samples.len(),
        "xs": est.density.xs,
        "density": est.density.fs,
        "components": est.decomposition.components,
        "weights": est.decomposition.weights,
        "scan": est.scan,
    })
    .to_string())
}

/// Path homology of an edge list or DOT digraph.
pub fn path_homology_json(text: &str, max_p: usize) -> Result<String> {
    let d = io::parse_digraph(text)?;
    let h = path_homology(&d, max_p);
    Ok(json!({
        "vertices": d.vertex_count(),
        "arcs": d.arc_count(),
        "allowed_paths": h.allowed_counts[..=max_p],
        "omega_dims": h.omega_dims[..=max_p],
        "betti": h.betti.betti,
        "reduced_betti": h.betti.reduced,
        "cyclomatic": cyclomatic(&d),
    })
    .to_string())
}

fn js(r: Result<String>) -> std::result::Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = randomNetwork)]
pub fn random_network(n: usize, side: f64, radius: f64, seed: u32) -> std::result::Result<String, JsError> {
    js(random_network_json(n, side, radius, seed.into()))
}

#[wasm_bindgen]
pub fn network(text: &str, kind: &str, packets: u32, seed: u32) -> std::result::Result<String, JsError> {
    js(network_json(text, kind, packets.into(), seed.into()))
}

#[wasm_bindgen]
pub fn tme(text: &str, bins: usize, bandwidths: usize) -> std::result::Result<String, JsError> {
    js(tme_json(text, bins, bandwidths))
}

#[wasm_bindgen(js_name = pathHomology)]
pub fn path_homology_report(text: &str, max_p: usize) -> std::result::Result<String, JsError> {
    js(path_homology_json(text, max_p))
}
