//! Regression fixtures for the hybrid model at resolution scale 0.1, frozen from the
//! first verified run, plus rerun reproducibility of the command outputs.

use spectraldiff::cli::{cmd_hybrid, HybridArgs};
use spectraldiff::inflation::Scheme;
use spectraldiff::io::read_manifest;

#[derive(serde::Deserialize)]
struct Fixture {
    eigenvalues: Vec<f64>,
    overlaps: Vec<f64>,
    unknowns: usize,
    eliminated: usize,
    thresholds: serde_json::Value,
}

fn column(path: &std::path::Path, name: &str) -> Vec<f64> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let idx = r.headers().unwrap().iter().position(|h| h == name).unwrap();
    r.records().map(|rec| rec.unwrap()[idx].parse().unwrap()).collect()
}

#[test]
fn scale_tenth_matches_fixture_and_reruns_identically() {
    let fx: Fixture = serde_json::from_str(include_str!("fixtures/hybrid_scale_0.1.json")).unwrap();
    let tmp = tempfile::tempdir().unwrap();
    let args = |name: &str| HybridArgs {
        model: None,
        scale: 0.1,
        k: 10,
        scheme: Scheme::Weighted,
        mpl: 1.0,
        out_dir: tmp.path().join(name),
    };
    let first = cmd_hybrid(&args("a")).unwrap();
    let dir = tmp.path().join("a");

    let ev = column(&dir.join("eigenvalues.csv"), "lambda_per_efold");
    assert_eq!(ev.len(), fx.eigenvalues.len());
    for (got, want) in ev.iter().zip(&fx.eigenvalues) {
        assert!((got - want).abs() <= 1e-6 * want, "{got} vs {want}");
    }
    assert!(ev.iter().all(|&l| l > 0.0));
    assert!(ev.windows(2).all(|w| w[1] > w[0]));

    let ov = column(&dir.join("overlaps.csv"), "overlap_sq");
    for (got, want) in ov.iter().zip(&fx.overlaps) {
        assert!((got - want).abs() <= 1e-6, "{got} vs {want}");
    }
    assert!(ov[1..].iter().all(|&o| o < ov[0]));

    let t: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.join("thresholds.json")).unwrap()).unwrap();
    assert_eq!(t["unknowns"], fx.unknowns);
    assert_eq!(t["eliminated"], fx.eliminated);
    for key in ["phi_sto_plus", "psi_sto_plus", "psi_max", "phi_max", "phi_min"] {
        let (g, w) = (t["thresholds"][key].as_f64().unwrap(), fx.thresholds[key].as_f64().unwrap());
        assert!((g - w).abs() <= 1e-12 * w.abs(), "{key}: {g} vs {w}");
    }

    let rel = column(&dir.join("eigenvalues.csv"), "relative_residual");
    assert!(rel.iter().all(|&r| r < 1e-10), "{rel:?}");
    let (_, rows) = {
        let mut r = csv::Reader::from_path(dir.join("eigenfunctions.csv")).unwrap();
        let h: Vec<String> = r.headers().unwrap().iter().map(String::from).collect();
        (h.clone(), r.records().count())
    };
    assert_eq!(rows, 198 * 198);

    let second = cmd_hybrid(&args("b")).unwrap();
    assert_eq!(first.outputs, second.outputs);
    assert_eq!(read_manifest(&dir).unwrap().outputs, first.outputs);
}
