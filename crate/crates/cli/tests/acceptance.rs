//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use visabs::{
    alphabet_compression, bayes_inverse, build_axis, combine_space, kl_divergence, pipeline_cost_benefit,
    potential_distortion, Alphabet, AxisError, Channel, Letters, NodeKind, Pipeline, Recon, RepresentationNode, Stage,
};

const SEED: u64 = 0x5eed_0fab;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_visabs"))
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn succeed(out: Output, what: &str) -> Result<Vec<u8>, String> {
    if out.status.success() {
        Ok(out.stdout)
    } else {
        Err(format!(
            "{what} failed: {}",
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn exemplar_json(name: &str) -> Result<Vec<u8>, String> {
    let out = bin().args(["exemplar", name]).output().map_err(|e| e.to_string())?;
    succeed(out, &format!("exemplar {name}"))
}

/// `analyze - --format json` with `input` on stdin.
fn analyze_stdin(input: &[u8]) -> Result<Vec<u8>, String> {
    let mut child = bin()
        .args(["analyze", "-", "--format", "json"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input)
        .map_err(|e| e.to_string())?;
    succeed(child.wait_with_output().map_err(|e| e.to_string())?, "analyze")
}

fn analyze_file(path: &Path) -> Result<Vec<u8>, String> {
    let out = bin()
        .args(["analyze", "--format", "json"])
        .arg(path)
        .output()
        .map_err(|e| e.to_string())?;
    succeed(out, &format!("analyze {}", path.display()))
}

fn parse(bytes: &[u8]) -> Result<Value, String> {
    serde_json::from_slice(bytes).map_err(|e| format!("bad json: {e}"))
}

fn num(v: &Value, ptr: &str) -> Result<f64, String> {
    v.pointer(ptr)
        .and_then(Value::as_f64)
        .ok_or_else(|| format!("missing number at {ptr}"))
}

fn within(got: f64, want: f64, tol: f64, name: &str) -> Result<(), String> {
    ensure(
        (got - want).abs() <= tol,
        format!("{name} = {got}, want {want} ± {tol}"),
    )
}

fn alphabet(id: &str, masses: Vec<f64>) -> Alphabet {
    Alphabet::new(id, Letters::indexed(masses.len()).unwrap(), masses).unwrap()
}

fn random_pmf(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n)
        .map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

fn uniform(id: &str, n: usize) -> Alphabet {
    alphabet(id, vec![1.0 / n as f64; n])
}

/// Deterministic or stochastic channel between two alphabets.
fn random_channel(rng: &mut ChaCha8Rng, id: &str, from: &Alphabet, to: &Alphabet) -> Channel {
    if rng.gen_bool(0.5) {
        let map = (0..from.len()).map(|_| rng.gen_range(0..to.len())).collect();
        Channel::deterministic(id, from, to, map).unwrap()
    } else {
        let rows = (0..from.len()).map(|_| random_pmf(rng, to.len())).collect();
        Channel::stochastic_dense(id, from, to, rows).unwrap()
    }
}

fn barchart() -> Check {
    let start = Instant::now();
    let out = analyze_stdin(&exemplar_json("barchart")?)?;
    let elapsed = start.elapsed();
    let v = parse(&out)?;
    let hd = num(&v, "/pipelines/0/stages/0/entropy_in")?;
    let hv = num(&v, "/pipelines/0/stages/0/entropy_out")?;
    let ac = num(&v, "/pipelines/0/stages/0/alphabet_compression")?;
    within(hd, 19.9316, 0.001, "H(D)")?;
    within(hv, 9.967, 0.01, "H(V)")?;
    within(ac, 9.965, 0.01, "AC")?;
    ensure(elapsed < Duration::from_secs(1), format!("runtime {elapsed:?}"))?;
    Ok(format!(
        "H(D)={hd:.6} H(V)={hv:.6} AC={ac:.6} in {:.0} ms",
        elapsed.as_secs_f64() * 1e3
    ))
}

fn zero_and_negative() -> Check {
    let int = parse(&analyze_stdin(&exemplar_json("integer-plot")?)?)?;
    let rnd = parse(&analyze_stdin(&exemplar_json("random-plotter")?)?)?;
    let ac_int = num(&int, "/pipelines/0/alphabet_compression")?;
    let ac_rnd = num(&rnd, "/pipelines/0/alphabet_compression")?;
    within(ac_int, 0.0, 1e-12, "integer-plot AC")?;
    ensure(ac_rnd < 0.0, format!("random-plotter AC = {ac_rnd}"))?;
    Ok(format!("integer-plot AC={ac_int:e}, random-plotter AC={ac_rnd:.6}"))
}

fn scores() -> Check {
    let v = parse(&analyze_stdin(&exemplar_json("figure-scores")?)?)?;
    let judgments = v["judgments"].as_array().ok_or("no judgments")?;
    let got: Vec<u64> = judgments.iter().filter_map(|j| j["score"].as_u64()).collect();
    ensure(got.len() == 9, format!("expected 9 scores, got {got:?}"))?;
    ensure(
        got[..8] == [3, 3, 3, 3, 2, 2, 1, 1],
        format!("images a-h scored {:?}", &got[..8]),
    )?;
    ensure(got[8] == 0, format!("spreadsheet scored {}", got[8]))?;
    let baseline = bin()
        .args(["score", "--condition-a", "no", "--condition-b", "na"])
        .output()
        .map_err(|e| e.to_string())?;
    ensure(
        succeed(baseline, "score")? == b"0\n",
        "score command disagrees on the baseline",
    )?;
    Ok(format!("a-h {:?}, spreadsheet {}", &got[..8], got[8]))
}

fn gibbs() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let (mut equal_pairs, mut min) = (0, f64::INFINITY);
    for i in 0..1200 {
        let n = rng.gen_range(2..=64);
        let q = random_pmf(&mut rng, n);
        let p = if i % 4 == 0 { q.clone() } else { random_pmf(&mut rng, n) };
        let (qa, pa) = (alphabet("q", q), alphabet("p", p));
        let d = kl_divergence(qa.pmf(), pa.pmf()).map_err(|e| e.to_string())?;
        ensure(d >= -1e-12, format!("pair {i}: KL = {d}"))?;
        let same = qa.pmf().max_abs_diff(pa.pmf()) <= 1e-12;
        ensure((d < 1e-12) == same, format!("pair {i}: KL = {d} but equal = {same}"))?;
        equal_pairs += usize::from(same);
        min = min.min(d);
    }
    Ok(format!("1200 pairs ({equal_pairs} equal), min KL {min:e}"))
}

fn data_processing() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut min = f64::INFINITY;
    for i in 0..600 {
        let (n, m) = (rng.gen_range(1..=64), rng.gen_range(1..=64));
        let from = alphabet("d", random_pmf(&mut rng, n));
        let map = (0..n).map(|_| rng.gen_range(0..m)).collect();
        let c = Channel::deterministic("f", &from, &uniform("v", m), map).unwrap();
        let ac = alphabet_compression(from.pmf(), &c).map_err(|e| e.to_string())?;
        ensure(ac >= -1e-12, format!("channel {i}: AC = {ac}"))?;
        min = min.min(ac);
    }
    Ok(format!("600 channels, min AC {min:e}"))
}

fn bayes_zero_distortion() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut max = 0.0f64;
    for i in 0..300 {
        let (n, m) = (rng.gen_range(1..=64), rng.gen_range(1..=64));
        let from = alphabet("d", random_pmf(&mut rng, n));
        let c = random_channel(&mut rng, "f", &from, &uniform("v", m));
        let inv = bayes_inverse(&c, from.pmf()).map_err(|e| e.to_string())?;
        let pd = potential_distortion(from.pmf(), &c, &inv).map_err(|e| e.to_string())?;
        ensure(pd <= 1e-9, format!("case {i}: PD = {pd}"))?;
        max = max.max(pd);
    }
    Ok(format!("300 cases, max PD {max:e}"))
}

fn telescoping() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut max = 0.0f64;
    for i in 0..300 {
        let len = rng.gen_range(2..=5);
        let sizes: Vec<usize> = (0..=len).map(|_| rng.gen_range(1..=64)).collect();
        let source = alphabet("z0", random_pmf(&mut rng, sizes[0]));
        let mut from = source.clone();
        let mut stages = Vec::new();
        for (k, &m) in sizes[1..].iter().enumerate() {
            let to = uniform(&format!("z{}", k + 1), m);
            let c = random_channel(&mut rng, &format!("c{k}"), &from, &to);
            stages.push(Stage::new(format!("s{k}"), c, Recon::Bayes, 1.0).map_err(|e| e.to_string())?);
            from = to;
        }
        let p = Pipeline::new("p", stages, source.pmf().clone()).map_err(|e| e.to_string())?;
        let r = pipeline_cost_benefit(&p).map_err(|e| e.to_string())?;
        let sum: f64 = r.stages.iter().map(|s| s.alphabet_compression).sum();
        let residual = (sum - (r.entropy_source - r.entropy_sink)).abs();
        ensure(residual <= 1e-9, format!("pipeline {i}: residual {residual}"))?;
        max = max.max(residual);
    }
    Ok(format!("300 pipelines, max residual {max:e}"))
}

fn routes() -> Check {
    let hold = parse(&analyze_file(&fixture("route-premises-hold.json"))?)?;
    let route = &hold["routes"][0];
    let (via, direct) = (num(route, "/pipeline/ratio")?, num(route, "/direct/ratio")?);
    ensure(route["premises_satisfied"] == true, "premises should hold")?;
    ensure(via > direct, format!("pipeline ratio {via} not above direct {direct}"))?;
    ensure(route["conclusion_holds"] == true, "conclusion should hold")?;

    let broken = parse(&analyze_file(&fixture("route-cost-violated.json"))?)?;
    let route = &broken["routes"][0];
    ensure(route["cost_premise"] == false, "cost premise should fail")?;
    let flags = route["flags"].as_array().ok_or("no flags")?;
    ensure(
        flags
            .iter()
            .any(|f| f.as_str().is_some_and(|s| s.contains("cost premise"))),
        format!("no cost premise flag in {flags:?}"),
    )?;
    let (via2, direct2) = (num(route, "/pipeline/ratio")?, num(route, "/direct/ratio")?);
    Ok(format!(
        "premises hold: {via} > {direct}; cost violated: flagged, ratios {via2} and {direct2} reported"
    ))
}

fn axes() -> Check {
    let out = bin()
        .args(["axis", "--format", "json"])
        .arg(fixture("molecule-axes.json"))
        .output()
        .map_err(|e| e.to_string())?;
    let v = parse(&succeed(out, "axis")?)?;
    let axes = v["axes"].as_array().ok_or("no axes")?;
    let structural = axes
        .iter()
        .find(|a| a["id"] == "structural")
        .ok_or("no structural axis")?;
    let first = &structural["transitions"][0];
    ensure(
        first["from"] == "vdw" && first["to"] == "licorice" && first["kind"] == "removes_and_adds",
        format!("vdw -> licorice classified as {first}"),
    )?;
    let long = axes
        .iter()
        .find(|a| a["id"] == "nanostructure")
        .ok_or("no 10-node axis")?;
    let nodes = long["nodes"].as_array().map_or(0, Vec::len);
    let transitions = long["transitions"].as_array().map_or(0, Vec::len);
    ensure(
        nodes == 10 && transitions == 9,
        format!("{nodes} nodes, {transitions} transitions"),
    )?;

    let color = |axis: &str, a: &str, b: &str| {
        build_axis(
            axis,
            vec![
                RepresentationNode::new(a, NodeKind::Visual, 4.0, ["color"]),
                RepresentationNode::new(b, NodeKind::Visual, 2.0, ["color"]),
            ],
            "",
        )
        .unwrap()
    };
    match combine_space(vec![color("hue", "h0", "h1"), color("tone", "t0", "t1")]) {
        Err(AxisError::OverlappingAttributes { tag, .. }) if tag == "color" => {}
        other => return Err(format!("combining overlapping axes gave {other:?}")),
    }
    let overlap = parse(&analyze_file(&fixture("overlapping-axes.json"))?)?;
    let err = overlap["space"]["error"].as_str().unwrap_or_default();
    ensure(err.contains("'color'"), format!("space error was '{err}'"))?;
    Ok("vdw -> licorice removes_and_adds; 10-node axis with 9 transitions; overlap rejected".into())
}

fn determinism() -> Check {
    let mut inputs: Vec<(String, Vec<u8>)> = Vec::new();
    let mut names: Vec<_> = std::fs::read_dir(fixture(""))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    names.sort();
    for path in names {
        let text = std::fs::read(&path).map_err(|e| e.to_string())?;
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        inputs.push((name, text));
    }
    for name in visabs::EXEMPLARS {
        inputs.push((format!("exemplar {name}"), exemplar_json(name)?));
    }
    let mut compared = 0;
    for (name, text) in &inputs {
        let first = analyze_stdin(text);
        let second = analyze_stdin(text);
        match (first, second) {
            (Ok(a), Ok(b)) => {
                ensure(a == b, format!("{name}: outputs differ"))?;
                compared += 1;
            }
            // Invalid fixtures must fail the same way both times.
            (Err(a), Err(b)) => ensure(a == b, format!("{name}: errors differ"))?,
            _ => return Err(format!("{name}: one run failed and the other did not")),
        }
    }
    Ok(format!("{compared} analyses byte-identical across two runs"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("bar-chart worked example", barchart),
        ("zero and negative compression", zero_and_negative),
        ("scoring table", scores),
        ("Gibbs inequality", gibbs),
        ("deterministic data processing", data_processing),
        ("Bayes inverse zero distortion", bayes_zero_distortion),
        ("telescoping compression", telescoping),
        ("route comparison", routes),
        ("axis semantics", axes),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
