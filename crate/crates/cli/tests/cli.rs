use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use qspec::output::{fmt_real, records_file_name, METADATA_FILE};
use qspec::{
    load_csv, read_records_csv, read_records_json, run_pipeline, spectra_records, write_outputs, Bandwidth, DataError,
    InputSource, Metadata, OmegaSelection, OutputFormat, Quantity, RunConfig, Simulation, SimulationModel,
    SpectraRecord,
};
use quantile_spectra::{default_bandwidth, Error, ToyKind};

fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn toy_config(kind: ToyKind, n: usize, out: &Path) -> RunConfig {
    let mut c = RunConfig::new(
        InputSource::Simulated(Simulation {
            model: SimulationModel::Toy(kind),
            n,
            burn_in: 0,
            seed: 17,
        }),
        out,
    );
    c.quantiles = vec![0.25, 0.5, 0.75];
    c
}

#[test]
fn load_small_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "alpha,beta\n1,2.5\n-3,4e1\n0.5, 7\n");
    let x = load_csv(&p, None).unwrap();
    assert_eq!((x.n(), x.d()), (3, 2));
    assert_eq!(x.names(), ["alpha", "beta"]);
    assert_eq!(x.column(1), [2.5, 40.0, 7.0]);
}

#[test]
fn load_selected_column() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "a,b,c,d,e\n1,2,3,4,5\n6,7,8,9,10\n");
    let x = load_csv(&p, Some(&["d".to_string()])).unwrap();
    assert_eq!((x.n(), x.d()), (2, 1));
    assert_eq!(x.names(), ["d"]);
    assert_eq!(x.column(0), [4.0, 9.0]);
}

#[test]
fn load_errors_name_their_location() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(dir.path(), "a.csv", "x,y\n1,2\n3,NaN\n5,6\n");
    match load_csv(&p, None) {
        Err(DataError::Parse { row, column, value }) => {
            assert_eq!((row, column.as_str(), value.as_str()), (2, "y", "NaN"))
        }
        other => panic!("unexpected {other:?}"),
    }
    let p = write(dir.path(), "b.csv", "x,y\n1,\n3,4\n");
    assert!(matches!(load_csv(&p, None), Err(DataError::Parse { row: 1, .. })));
    let p = write(dir.path(), "c.csv", "x,y\n1,2\n3,4\n");
    match load_csv(&p, Some(&["z".to_string()])) {
        Err(DataError::MissingColumn(name)) => assert_eq!(name, "z"),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(
        load_csv(&dir.path().join("missing.csv"), None),
        Err(DataError::Io { .. })
    ));
}

#[test]
fn boundary_quantile_fails_before_reading_input() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = RunConfig::new(
        InputSource::Csv {
            path: dir.path().join("does-not-exist.csv"),
            columns: None,
        },
        dir.path().join("out"),
    );
    c.quantiles = vec![0.0, 0.5];
    let err = run_pipeline(&c).unwrap_err();
    assert_eq!(err.downcast_ref::<Error>(), Some(&Error::BoundaryQuantile(0.0)));
    assert!(format!("{err:#}").starts_with("quantile grid"));
}

#[test]
fn single_component_outputs_only_diagonal_blocks() {
    let dir = tempfile::tempdir().unwrap();
    let csv = write(
        dir.path(),
        "one.csv",
        &std::iter::once("v".to_string())
            .chain((0..128).map(|t| format!("{}", ((t * 73) % 101) as f64 - 50.0)))
            .collect::<Vec<_>>()
            .join("\n"),
    );
    let c = RunConfig::new(
        InputSource::Csv {
            path: csv,
            columns: None,
        },
        dir.path().join("out"),
    );
    let out = run_pipeline(&c).unwrap();
    let records = spectra_records(&out);
    assert_eq!(records.len(), 7 * 25 * 65);
    assert!(records.iter().all(|r| r.j1 == 1 && r.j2 == 1));
    for r in records
        .iter()
        .filter(|r| r.quantity == Quantity::Coherency && r.tau1 == r.tau2)
    {
        assert_eq!((r.re, r.im), (1.0, 0.0));
    }
}

#[test]
fn auto_bandwidth_and_frequency_snapping() {
    assert_eq!(Bandwidth::Auto.resolve(4096), default_bandwidth(4096));
    assert_eq!(Bandwidth::Auto.resolve(10_000), 0.4 * 0.1);
    assert_eq!("0.25".parse::<Bandwidth>().unwrap(), Bandwidth::Value(0.25));
    let sel: OmegaSelection = "3.14159, 0.0, 1.0, 1.001".parse().unwrap();
    assert_eq!(sel.indices(100).unwrap(), vec![0, 16, 50]);
    assert_eq!(OmegaSelection::Fourier.indices(9).unwrap(), vec![0, 1, 2, 3, 4]);
    assert!(OmegaSelection::List(vec![4.0]).indices(16).is_err());
}

#[test]
fn records_are_ordered_and_hermitian() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&toy_config(ToyKind::EpsSquareLag1, 200, dir.path())).unwrap();
    let records = spectra_records(&out);
    let key = |r: &SpectraRecord| {
        let k = |t: f64| [0.25, 0.5, 0.75].iter().position(|&v| v == t).unwrap();
        (r.quantity, r.j1, r.j2, k(r.tau1), k(r.tau2), r.omega.to_bits())
    };
    assert!(records.windows(2).all(|w| key(&w[0]) < key(&w[1])));
    let f: HashMap<_, _> = records
        .iter()
        .filter(|r| r.quantity == Quantity::F)
        .map(|r| ((r.j1, r.j2, r.tau1.to_bits(), r.tau2.to_bits(), r.omega.to_bits()), r))
        .collect();
    for (&(j1, j2, t1, t2, w), r) in &f {
        let mirror = f[&(j2, j1, t2, t1, w)];
        assert_eq!(r.re, mirror.re);
        assert_eq!(r.im, -mirror.im);
        assert!(r.ci_lo_re.unwrap() <= r.re && r.re <= r.ci_hi_re.unwrap());
    }
    assert!(records
        .iter()
        .filter(|r| r.quantity == Quantity::Phase)
        .all(|r| r.ci_lo_re.is_none() && r.im == 0.0));
}

#[test]
fn csv_and_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = toy_config(ToyKind::EpsSquareNow, 64, dir.path());
    let out = run_pipeline(&config).unwrap();
    let records = spectra_records(&out);
    let meta = Metadata::for_analysis(&out, 0.05, Some(17), OutputFormat::Csv);
    let csv_dir = dir.path().join("csv");
    let json_dir = dir.path().join("json");
    write_outputs(&records, OutputFormat::Csv, &csv_dir, &meta).unwrap();
    write_outputs(&records, OutputFormat::Json, &json_dir, &meta).unwrap();
    let from_csv = read_records_csv(&csv_dir.join(records_file_name(OutputFormat::Csv))).unwrap();
    let from_json = read_records_json(&json_dir.join(records_file_name(OutputFormat::Json))).unwrap();
    assert_eq!(from_csv, records);
    assert_eq!(from_json, records);
    let text = fs::read_to_string(csv_dir.join("spectra.csv")).unwrap();
    assert!(!text.contains('\r'));
    assert!(text.starts_with("omega,freq_cycles,tau1,tau2,j1,j2,quantity,re,im,ci_lo_re,ci_hi_re,ci_lo_im,ci_hi_im\n"));
    let meta_back: Metadata = serde_json::from_str(&fs::read_to_string(csv_dir.join(METADATA_FILE)).unwrap()).unwrap();
    assert_eq!(meta_back, meta);
    assert_eq!(meta_back.normalizers.len(), 33);
    assert_eq!(meta_back.bandwidth, Some(default_bandwidth(64)));
}

#[test]
fn seventeen_significant_digits() {
    assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
    assert_eq!(fmt_real(-0.0 + 0.0), "0.0000000000000000e0");
    for v in [std::f64::consts::PI, 1e-300, -123.456, 2.0f64.sqrt()] {
        assert_eq!(fmt_real(v).parse::<f64>().unwrap(), v);
    }
}

#[test]
fn empty_record_set_writes_header_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_pipeline(&toy_config(ToyKind::IndependentNoise, 32, dir.path())).unwrap();
    let meta = Metadata::for_analysis(&out, 0.05, None, OutputFormat::Csv);
    let files = write_outputs(&[], OutputFormat::Csv, dir.path(), &meta).unwrap();
    assert_eq!(files.len(), 2);
    assert_eq!(fs::read_to_string(&files[0]).unwrap().lines().count(), 1);
    assert!(files[1].exists());
}

#[test]
fn unwritable_directory_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "x");
    let out = run_pipeline(&toy_config(ToyKind::IndependentNoise, 32, dir.path())).unwrap();
    let meta = Metadata::for_analysis(&out, 0.05, None, OutputFormat::Csv);
    assert!(write_outputs(&[], OutputFormat::Csv, &blocker.join("sub"), &meta).is_err());
}

#[test]
fn binary_commands() {
    let bin = env!("CARGO_BIN_EXE_qspec");
    let dir = tempfile::tempdir().unwrap();
    let sim = dir.path().join("toy.csv");
    let ok = Command::new(bin)
        .args([
            "simulate",
            "--toy",
            "eps_square_now",
            "--n",
            "64",
            "--seed",
            "3",
            "--out",
        ])
        .arg(&sim)
        .status()
        .unwrap();
    assert!(ok.success());
    let x = load_csv(&sim, None).unwrap();
    assert_eq!((x.n(), x.names()), (64, &["x".to_string(), "y".to_string()][..]));
    for (j, v) in x.column(1).iter().enumerate() {
        assert_eq!(*v, x.get(j, 0).powi(2));
    }

    let out = dir.path().join("oracle");
    let ok = Command::new(bin)
        .args([
            "oracle",
            "--process",
            r#"{"type":"white_noise","rho":0.6}"#,
            "--n",
            "64",
            "--quantiles",
            "0.5",
        ])
        .args(["--omegas", "1.0", "--format", "json", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(ok.success());
    let records = read_records_json(&out.join("spectra.json")).unwrap();
    let r = records
        .iter()
        .find(|r| r.quantity == Quantity::Coherency && r.j1 == 1 && r.j2 == 2)
        .unwrap();
    assert!((r.re - 2.0 * 0.6f64.asin() / std::f64::consts::PI).abs() < 1e-12);

    let bad = Command::new(bin)
        .args([
            "analyze",
            "--toy",
            "independent_noise",
            "--n",
            "64",
            "--alpha",
            "1.5",
            "--out",
        ])
        .arg(dir.path().join("bad"))
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("alpha"));
}
