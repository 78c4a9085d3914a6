#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use cybertopo::dowker::{dowker_betti, Relation, Side};
use cybertopo::homology::{betti, simplicial_chain_complex, Field};
use cybertopo::io::{parse_digraph, parse_network_json, parse_relation_csv, read_complex};
use cybertopo::path::{omega, path_betti, path_homology, verify_omega_complex, Digraph};
use cybertopo::tme::{
    is_unimodal, select_bandwidth, sweep_decompose, unimodal_category, DensityGrid, DEFAULT_BANDWIDTHS,
    DEFAULT_BINS,
};
use cybertopo::wireless::{
    criticality_report, traffic_sim, ActivationSheaf, ComplexKind, SheafSection, WirelessNetwork,
};
use cybertopo::{Simplex, SimplicialComplex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !($cond) {
            return Err(format!($($fmt)+));
        }
    };
}

fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn data(name: &str) -> Result<String, String> {
    std::fs::read_to_string(data_path(name)).map_err(|e| format!("{name}: {e}"))
}

fn e<E: std::fmt::Display>(err: E) -> String {
    err.to_string()
}

fn c1_simplicial() -> Outcome {
    let simple = read_complex(&data("simple_asc.facets")?, None).map_err(e)?;
    let b = betti(&simple, Field::Gf2);
    ensure!(b.betti == [2, 1, 0], "simple_asc betti {:?}", b.betti);
    ensure!(b.cycles == [5, 2, 0], "simple_asc Z {:?}", b.cycles);
    ensure!(b.boundaries == [3, 1, 0], "simple_asc B {:?}", b.boundaries);
    let asc = read_complex(&data("asc.facets")?, None).map_err(e)?;
    let b = betti(&asc, Field::Gf2);
    ensure!(b.betti[..3] == [3, 1, 0], "ASC betti {:?}", b.betti);
    Ok("simple_asc β=(2,1,0) Z=(5,2,0) B=(3,1,0); ASC β=(3,1,0)".into())
}

fn c2_boundaries() -> Outcome {
    let k = SimplicialComplex::from_facets(&[vec!["1", "2", "3"]]).map_err(e)?;
    let cc = simplicial_chain_complex(&k, Field::Rational, None);
    let d1 = cc.boundary(1).unwrap().to_dense();
    let d2 = cc.boundary(2).unwrap().to_dense();
    ensure!(d1 == [[-1, -1, 0], [1, 0, -1], [0, 1, 1]], "∂1 = {d1:?}");
    ensure!(d2 == [[1], [-1], [1]], "∂2 = {d2:?}");
    let prod = cc.boundary(1).unwrap().mul(cc.boundary(2).unwrap()).map_err(e)?;
    ensure!(prod.to_dense().iter().flatten().all(|&x| x == 0), "∂1∂2 ≠ 0");
    Ok("∂1, ∂2 entry-for-entry; ∂1∂2 = 0".into())
}

fn c3_dowker() -> Outcome {
    let r = parse_relation_csv(&data("example_relation.csv")?).map_err(e)?;
    let rows = dowker_betti(&r, Side::Rows, 2).map_err(e)?.betti;
    let cols = dowker_betti(&r, Side::Cols, 2).map_err(e)?.betti;
    ensure!(rows == [2, 1, 0], "rows side {rows:?}");
    ensure!(cols == [2, 1, 0], "cols side {cols:?}");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 200 {
        let (nr, nc) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let m: Vec<Vec<u8>> = (0..nr).map(|_| (0..nc).map(|_| rng.random_range(0..=1)).collect()).collect();
        let r = Relation::from_matrix(&m).map_err(e)?;
        if (0..r.rows()).all(|i| r.row_support(i).is_empty()) {
            continue;
        }
        let a = dowker_betti(&r, Side::Rows, 2).map_err(e)?.betti;
        let b = dowker_betti(&r, Side::Cols, 2).map_err(e)?.betti;
        ensure!(a == b, "duality fails on {m:?}: {a:?} vs {b:?}");
        checked += 1;
    }
    Ok("example relation (2,1,0) both sides; duality on 200 random relations".into())
}

fn c4_path() -> Outcome {
    let d1 = parse_digraph(&data("d1.edges")?).map_err(e)?;
    let d2 = parse_digraph(&data("d2.edges")?).map_err(e)?;
    let b1 = path_betti(&d1, 2, false);
    let b2 = path_betti(&d2, 2, false);
    ensure!(b1[1] == 1, "D1 β1 = {}", b1[1]);
    ensure!(b2[1] == 0, "D2 β1 = {}", b2[1]);
    let w = omega(&d2, 2).map_err(e)?;
    ensure!(w.dim() == 1, "dim Ω2(D2) = {}", w.dim());
    let paths: Vec<String> = w
        .allowed
        .iter()
        .map(|p| p.iter().map(|&v| d2.labels()[v].as_str()).collect())
        .collect();
    let v = w.omega_basis.to_dense();
    let coeff = |name: &str| paths.iter().position(|p| p == name).map(|i| v[i][0]);
    let (a, b) = (coeff("wxz"), coeff("wyz"));
    ensure!(
        paths.len() == 2 && a.is_some() && a != Some(0) && a.map(|x| -x) == b,
        "Ω2(D2) spanned by {paths:?} {v:?}"
    );
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..200 {
        let n = rng.random_range(1..=7);
        let arcs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (0..n).map(move |v| (u, v)))
            .filter(|&(u, v)| u != v)
            .filter(|_| rng.random_bool(0.35))
            .collect();
        let d = Digraph::new((0..n).map(|i| i.to_string()).collect(), arcs).map_err(e)?;
        verify_omega_complex(&d, 3).map_err(e)?;
        let h = path_homology(&d, 3);
        if h.omega_dims[4] == 0 {
            let alt = |v: Vec<i64>| v.iter().enumerate().map(|(p, &x)| if p % 2 == 0 { x } else { -x }).sum::<i64>();
            let lhs = alt(h.omega_dims[..4].iter().map(|&x| x as i64).collect());
            let rhs = alt(h.betti.betti.iter().map(|&x| x as i64).collect());
            ensure!(lhs == rhs, "Euler mismatch {lhs} vs {rhs}");
        }
    }
    Ok("D1 β1=1, D2 β1=0, Ω2(D2) = ⟨wxz − wyz⟩; 200 random digraphs".into())
}

fn random_complex(rng: &mut ChaCha8Rng) -> Result<SimplicialComplex, String> {
    let n = rng.random_range(1..=7);
    let m = rng.random_range(1..=8);
    let facets: Vec<Vec<String>> = (0..m)
        .map(|_| {
            let size = rng.random_range(1..=4.min(n));
            let mut f = BTreeSet::new();
            while f.len() < size {
                f.insert(rng.random_range(0..n).to_string());
            }
            f.into_iter().collect()
        })
        .collect();
    SimplicialComplex::from_facets(&facets).map_err(e)
}

fn connected(region: &BTreeSet<Simplex>) -> bool {
    let vs: BTreeSet<usize> = region.iter().flat_map(|s| s.vertices().to_vec()).collect();
    let Some(&start) = vs.iter().next() else {
        return true;
    };
    let mut seen = BTreeSet::from([start]);
    let mut stack = vec![start];
    while let Some(v) = stack.pop() {
        for s in region.iter().filter(|s| s.contains_vertex(v)) {
            for &u in s.vertices() {
                if seen.insert(u) {
                    stack.push(u);
                }
            }
        }
    }
    seen == vs
}

fn lemmas_hold(k: &SimplicialComplex) -> Result<(), String> {
    let sheaf = ActivationSheaf::new(k.clone()).map_err(e)?;
    let mut seen: std::collections::BTreeMap<usize, BTreeSet<Simplex>> = Default::default();
    for s in sheaf.global_sections(None) {
        let tx = s.transmitting();
        for &n in &tx {
            let region = sheaf.active_region(&s, n);
            ensure!(
                region.contains(&Simplex::vertex(n)) && k.is_closed(&region) && connected(&region),
                "active region of {n} is not a connected closed set containing it"
            );
            let star = k.star(region.iter()).map_err(e)?;
            for &m in tx.iter().filter(|&&m| m != n) {
                ensure!(star.is_disjoint(&sheaf.active_region(&s, m)), "stars of active regions overlap");
            }
            if let Some(prev) = seen.insert(n, region.clone()) {
                ensure!(prev == region, "active region of {n} depends on the section");
            }
        }
    }
    Ok(())
}

fn c5_sheaf() -> Outcome {
    let w = parse_network_json(&data("path3.json")?).map_err(e)?;
    let k = w.link_complex(None).map_err(e)?;
    let sheaf = ActivationSheaf::new(k.clone()).map_err(e)?;
    let count = sheaf.global_sections(None).len();
    ensure!(count == 4, "{count} global sections");
    let v = |l: &[&str]| k.simplex_of(l).unwrap();
    let partial = SheafSection {
        assignment: [(v(&["1"]), Some(0)), (v(&["3"]), Some(2))].into(),
    };
    ensure!(!sheaf.extends_globally(&partial), "the {{1,3}} assignment extends");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    lemmas_hold(&k)?;
    for _ in 0..150 {
        lemmas_hold(&random_complex(&mut rng)?)?;
    }
    Ok("4 global sections; {1,3} blocked; lemmas on 151 complexes".into())
}

fn c6_cohomology() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let n = rng.random_range(1..=15);
        let w = WirelessNetwork::random_geometric(n, 10.0, 4.0, rng.random()).map_err(e)?;
        let k = w.link_complex(None).map_err(e)?;
        let dims = ActivationSheaf::new(k).map_err(e)?.vector_cohomology().map_err(e)?;
        ensure!(dims[0] == n && dims[1..].iter().all(|&d| d == 0), "n = {n}: {dims:?}");
    }
    Ok("dims (n, 0, …) on 50 link complexes, δδ = 0".into())
}

fn c7_criticality() -> Outcome {
    let mut top_nodes = 0;
    for seed in 0..20u64 {
        let w = WirelessNetwork::random_geometric(50, 1000.0, 200.0, seed).map_err(e)?;
        let lh = criticality_report(&w, &[1], ComplexKind::Link).map_err(e)?.vertex_values(1);
        let t = traffic_sim(&w, 10_000, seed);
        let mut order: Vec<usize> = (0..w.len()).collect();
        order.sort_by(|&a, &b| t.forwards[b].cmp(&t.forwards[a]).then(a.cmp(&b)));
        for &i in &order[..w.len() / 10] {
            ensure!(lh[i] >= 1, "seed {seed}: node {i} forwards {} but LH_1 = 0", t.forwards[i]);
            top_nodes += 1;
        }
    }
    let w = parse_network_json(&data("dumbbell.json")?).map_err(e)?;
    let lh = criticality_report(&w, &[1], ComplexKind::Link).map_err(e)?.vertex_values(1);
    let m = w.nodes.iter().position(|n| n.id == "m").unwrap();
    ensure!(
        lh.iter().enumerate().all(|(i, &v)| i == m || v < lh[m]),
        "dumbbell LH_1 {lh:?}"
    );
    Ok(format!("{top_nodes} top-decile nodes all LH_1 ≥ 1; dumbbell bridge LH_1 = {}", lh[m]))
}

fn c8_tme() -> Outcome {
    let u = unimodal_category(&DensityGrid::from_values(vec![1.0, 2.0, 1.0, 2.0, 1.0]).map_err(e)?).map_err(e)?;
    ensure!(u == 2, "ucat([1,2,1,2,1]) = {u}");
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (a, b) = (Normal::new(0.0, 1.0).unwrap(), Normal::new(20.0, 1.0).unwrap());
    let mut s: Vec<f64> = (0..500).map(|_| a.sample(&mut rng)).collect();
    s.extend((0..500).map(|_| b.sample(&mut rng)));
    let est = select_bandwidth(&s, DEFAULT_BANDWIDTHS, DEFAULT_BINS).map_err(e)?;
    ensure!(est.scan.modal_ucat == 2, "modal ucat {}", est.scan.modal_ucat);
    ensure!(
        est.decomposition.weights.len() == 2 && est.decomposition.weights.iter().all(|w| (w - 0.5).abs() <= 0.05),
        "weights {:?}",
        est.decomposition.weights
    );
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..100 {
        let n = rng.random_range(1..300);
        let f: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() }).collect();
        let d = sweep_decompose(&DensityGrid::from_values(f.clone()).map_err(e)?).map_err(e)?;
        for (i, &fi) in f.iter().enumerate() {
            let sum: f64 = d.components.iter().map(|c| c[i]).sum();
            ensure!((sum - fi).abs() <= 1e-12, "bin {i} off by {}", (sum - fi).abs());
        }
        ensure!(d.components.iter().all(|c| is_unimodal(c)), "non-unimodal component");
    }
    Ok(format!(
        "ucat 2; bimodal weights {:.4}/{:.4} at h = {:.4}; 100 grids exact",
        est.decomposition.weights[0], est.decomposition.weights[1], est.scan.chosen_bandwidth
    ))
}

fn run_cli(args: &[String]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cybertopo")).args(args).output().map_err(e)?;
    ensure!(out.status.success(), "{args:?} exited {:?}: {}", out.status, String::from_utf8_lossy(&out.stderr));
    Ok(out.stdout)
}

fn c9_determinism() -> Outcome {
    let dir = std::env::temp_dir().join(format!("cybertopo-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(e)?;
    let p = |n: &str| data_path(n).display().to_string();
    let csv = |i: usize| dir.join(format!("tme{i}.csv")).display().to_string();
    let runs: Vec<Vec<String>> = vec![
        vec!["homology".into(), p("asc.facets"), "--field".into(), "q".into()],
        vec!["dowker".into(), p("example_relation.csv")],
        vec!["dowker".into(), p("code/naive3_compiled.sl"), "--window".into(), "8".into()],
        vec!["path-homology".into(), p("d2.dot"), "--max-p".into(), "3".into(), "--reduced".into()],
        vec![
            "network".into(), p("dumbbell.json"), "--lh".into(), "--sections".into(), "--cohomology".into(),
            "--traffic".into(), "10000".into(), "--seed".into(), "7".into(),
        ],
        vec!["network".into(), p("dumbbell.json"), "--complex".into(), "interference".into(), "--sections".into()],
    ];
    for args in &runs {
        ensure!(run_cli(args)? == run_cli(args)?, "{args:?} differs between runs");
    }
    let tme = |i| vec!["tme".to_string(), p("bimodal.csv"), "--csv".into(), csv(i)];
    ensure!(run_cli(&tme(0))? == run_cli(&tme(1))?, "tme JSON differs between runs");
    let (a, b) = (std::fs::read(csv(0)).map_err(e)?, std::fs::read(csv(1)).map_err(e)?);
    ensure!(a == b, "tme CSV differs between runs");
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{} invocations byte-identical", runs.len() + 1))
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        (1, "simplicial homology", Duration::from_secs(1), c1_simplicial),
        (2, "boundary matrices", Duration::from_secs(1), c2_boundaries),
        (3, "Dowker duality", Duration::from_secs(10), c3_dowker),
        (4, "path homology", Duration::from_secs(30), c4_path),
        (5, "activation sheaf", Duration::from_secs(10), c5_sheaf),
        (6, "sheaf cohomology", Duration::from_secs(30), c6_cohomology),
        (7, "local homology criticality", Duration::from_secs(120), c7_criticality),
        (8, "mixture estimation", Duration::from_secs(30), c8_tme),
        (9, "determinism", Duration::from_secs(120), c9_determinism),
    ];
    let mut failed = Vec::new();
    for (n, name, limit, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let verdict = match outcome {
            Ok(_) if took > limit => Err(format!("took {took:.2?}, limit {limit:?}")),
            other => other,
        };
        match verdict {
            Ok(detail) => println!("criterion {n} ({name}): PASS in {took:.2?}: {detail}"),
            Err(why) => {
                println!("criterion {n} ({name}): FAIL in {took:.2?}: {why}");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
