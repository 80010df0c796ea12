use rda::csv_io::{load_csv, parse_csv, write_csv};
use rda::idx::{load_idx, write_idx};
use rda::report::{first_difference, Report};
use rda::run::{evaluate, load_source};
use rda::{DataSource, RunConfig};
use rda_core::datasets::{synth_gaussian_classes, RawImageSet};
use rda_core::evaluation::{ExperimentConfig, FitMethod};

#[test]
fn csv_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    let ds = synth_gaussian_classes(5, 3, 4, 2.5, 0.7, 11).unwrap();
    write_csv(&path, &ds).unwrap();
    let back = load_csv(&path, None, false).unwrap();
    assert_eq!(back.data(), ds.data());
    assert_eq!(back.labels(), ds.labels());
}

#[test]
fn csv_label_column_and_header() {
    let text = "label,a,b\n7,1.5,2\n3,0,-1\n7,4,4\n";
    let ds = parse_csv(text.as_bytes(), Some(0), true).unwrap();
    assert_eq!(ds.dim(), 2);
    assert_eq!(ds.labels(), &[0, 1, 0]);
    assert_eq!(ds.label_values(), &[7, 3]);
    assert_eq!(ds.data()[(1, 1)], -1.0);
}

#[test]
fn idx_round_trip_through_preprocessing() {
    let dir = tempfile::tempdir().unwrap();
    let (images, labels) = (dir.path().join("i.idx"), dir.path().join("l.idx"));
    let pixels: Vec<u8> = (0..6 * 16).map(|i| (i * 7 % 256) as u8).collect();
    let raw = RawImageSet::new(pixels, 6, 4, 4, vec![3, 1, 3, 1, 2, 2]).unwrap();
    write_idx(&images, &labels, &raw).unwrap();
    assert_eq!(load_idx(&images, &labels).unwrap(), raw);

    let source = DataSource::Idx {
        images,
        labels,
        resize: Some((2, 2)),
    };
    let ds = load_source(&source, 1).unwrap();
    assert_eq!((ds.dim(), ds.len(), ds.num_classes()), (4, 6, 3));
    assert_eq!(ds.label_values(), &[1, 2, 3]);
    assert!(ds.data().iter().all(|&v| (0.0..=1.0).contains(&v)));
    assert_eq!(ds, load_source(&source, 1).unwrap());
}

#[test]
fn report_json_round_trips_and_diffs() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    write_csv(&path, &synth_gaussian_classes(6, 2, 10, 3.0, 1.0, 4).unwrap()).unwrap();
    let config = RunConfig {
        source: DataSource::Csv {
            path,
            label_column: None,
            header: false,
        },
        experiment: ExperimentConfig {
            solver: FitMethod::Cg,
            repeats: 2,
            folds: 2,
            kmeans_restarts: 2,
            ..ExperimentConfig::default()
        },
    };
    let (report, _) = evaluate(&config, 2).unwrap();
    let json = report.to_json();
    let back: Report = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
    assert_eq!(first_difference(&report, &back), None);

    let mut changed = report.clone();
    changed.repeats[1].nmi += 1e-16_f64.max(changed.repeats[1].nmi * f64::EPSILON);
    assert_eq!(first_difference(&report, &changed).as_deref(), Some("/repeats/1/nmi"));
}
