use std::fs;
use std::path::Path;

use proptest::prelude::*;

use eegprint::edf::{
    catalog_dataset, parse_edf, parse_run_name, to_physical_signal, write_edf, EdfError, EdfHeader,
    SignalSpec,
};
use eegprint::synth::encode_edf;
use eegprint::{Condition, Recording};

fn spec_strategy() -> impl Strategy<Value = SignalSpec> {
    (
        "[A-Za-z0-9.]{1,16}",
        -32768i32..32000,
        1i32..700,
        -5000.0f64..0.0,
        1.0f64..5000.0,
        1usize..20,
    )
        .prop_map(|(label, dmin, span, pmin, prange, spr)| SignalSpec {
            label,
            transducer: "AgAgCl electrode".into(),
            physical_dimension: "uV".into(),
            physical_min: (pmin * 4.0).round() / 4.0,
            physical_max: (pmin * 4.0).round() / 4.0 + prange.round(),
            digital_min: dmin,
            digital_max: (dmin + span).min(32767),
            prefiltering: "HP:0.1Hz LP:100Hz".into(),
            samples_per_record: spr,
            reserved: String::new(),
        })
}

fn header(ns: usize, records: usize) -> EdfHeader {
    EdfHeader {
        version: "0".into(),
        patient_id: "X X X X".into(),
        recording_id: "Startdate 12-AUG-2009 X X BCI2000".into(),
        start_date: "12.08.09".into(),
        start_time: "16.15.00".into(),
        header_bytes: 256 * (ns + 1),
        reserved: String::new(),
        n_data_records: records,
        record_duration_s: 1.0,
        n_signals: ns,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_then_parse_is_exact(
        specs in prop::collection::vec(spec_strategy(), 1..5),
        records in 1usize..4,
        seed in any::<u64>(),
    ) {
        let mut rng = eegprint::synth::SplitMix64::new(seed);
        let digital: Vec<Vec<i16>> = specs
            .iter()
            .map(|s| (0..s.samples_per_record * records).map(|_| rng.next_u64() as i16).collect())
            .collect();
        let h = header(specs.len(), records);
        let bytes = write_edf(&h, &specs, &digital).unwrap();
        prop_assert_eq!(bytes.len(), h.header_bytes + 2 * digital.iter().map(Vec::len).sum::<usize>());
        let edf = parse_edf(&bytes).unwrap();
        prop_assert_eq!(&edf.header, &h);
        prop_assert_eq!(&edf.signals, &specs);
        prop_assert_eq!(&edf.digital, &digital);
        prop_assert_eq!(edf.trailing_bytes, 0);
        prop_assert_eq!(write_edf(&edf.header, &edf.signals, &edf.digital).unwrap(), bytes);
    }

    #[test]
    fn scaling_is_monotone_with_exact_endpoints(spec in spec_strategy()) {
        let lo = spec.digital_min as i16;
        let hi = spec.digital_max as i16;
        let (p, clamped) = to_physical_signal(&[lo, hi], &spec).unwrap();
        prop_assert_eq!(clamped, 0);
        prop_assert_eq!(p[0], spec.physical_min);
        prop_assert_eq!(p[1], spec.physical_max);
        let mid = lo + (hi - lo) / 2;
        let (q, _) = to_physical_signal(&[lo, mid, hi], &spec).unwrap();
        prop_assert!(q[0] <= q[1] && q[1] <= q[2]);
    }

    #[test]
    fn arbitrary_bytes_never_panic(bytes in prop::collection::vec(any::<u8>(), 0..1200)) {
        let _ = parse_edf(&bytes);
    }
}

#[test]
fn fields_wider_than_the_header_slot_are_refused() {
    let mut spec = SignalSpec {
        label: "Cz..".into(),
        transducer: String::new(),
        physical_dimension: "uV".into(),
        physical_min: -1221.125,
        physical_max: 100.0,
        digital_min: -2048,
        digital_max: 2047,
        prefiltering: String::new(),
        samples_per_record: 1,
        reserved: String::new(),
    };
    assert!(matches!(
        write_edf(&header(1, 1), &[spec.clone()], &[vec![0]]),
        Err(EdfError::FieldOverflow { .. })
    ));
    spec.physical_min = -1221.25;
    assert!(write_edf(&header(1, 1), &[spec], &[vec![0]]).is_ok());
}

#[test]
fn truncated_files_report_an_offset() {
    let specs = vec![SignalSpec {
        label: "Fc5.".into(),
        transducer: String::new(),
        physical_dimension: "uV".into(),
        physical_min: -8092.0,
        physical_max: 8092.0,
        digital_min: -32768,
        digital_max: 32767,
        prefiltering: String::new(),
        samples_per_record: 160,
        reserved: String::new(),
    }];
    let bytes = write_edf(&header(1, 2), &specs, &[vec![7; 320]]).unwrap();
    for cut in [10, 255, 300] {
        match parse_edf(&bytes[..cut]) {
            Err(EdfError::Truncated { available, .. }) => assert_eq!(available, cut),
            other => panic!("cut {cut}: {other:?}"),
        }
    }
}

fn tone_channels(channels: usize, seconds: usize, rate: usize) -> (Vec<String>, Vec<Vec<f64>>) {
    let labels = (0..channels).map(|c| format!("Ch{c}.")).collect();
    let data = (0..channels)
        .map(|c| {
            (0..seconds * rate)
                .map(|i| 50.0 * (i as f64 * 0.3 + c as f64).sin())
                .collect()
        })
        .collect();
    (labels, data)
}

fn write_run(root: &Path, subject: &str, run: u32, channels: usize, rate: usize) {
    let (labels, data) = tone_channels(channels, 2, rate);
    let dir = root.join(subject);
    fs::create_dir_all(&dir).unwrap();
    let bytes = encode_edf(&labels, &data, rate, true).unwrap();
    fs::write(dir.join(format!("{subject}R{run:02}.edf")), bytes).unwrap();
}

#[test]
fn encoded_recordings_load_back() {
    let (labels, data) = tone_channels(3, 2, 160);
    let bytes = encode_edf(&labels, &data, 160, true).unwrap();
    let edf = parse_edf(&bytes).unwrap();
    assert_eq!(edf.signals.len(), 4);
    let rec = Recording::from_edf(&edf, "S001", Condition::EyesOpen).unwrap();
    assert_eq!(rec.n_channels(), 3);
    assert_eq!(rec.n_samples(), 320);
    assert_eq!(rec.sample_rate, 160.0);
    assert_eq!(rec.channel_labels, vec!["Ch0.", "Ch1.", "Ch2."]);
    for (got, want) in rec.data.iter().zip(&data) {
        for (g, w) in got.iter().zip(want) {
            // 16-bit quantization of a ±50 µV range
            assert!((g - w).abs() < 0.01);
        }
    }
}

#[test]
fn catalog_selects_baseline_runs_and_excludes_bad_rates() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write_run(root, "S001", 1, 64, 160);
    write_run(root, "S001", 2, 64, 160);
    write_run(root, "S001", 4, 64, 160);
    write_run(root, "S002", 1, 64, 160);
    write_run(root, "S003", 1, 64, 128);
    write_run(root, "S004", 2, 32, 160);
    fs::write(root.join("README"), "not a subject").unwrap();

    let cat = catalog_dataset(root).unwrap();
    let got: Vec<(String, Condition)> = cat
        .entries
        .iter()
        .map(|e| (e.subject_id.clone(), e.condition))
        .collect();
    assert_eq!(
        got,
        vec![
            ("S001".into(), Condition::EyesOpen),
            ("S001".into(), Condition::EyesClosed),
            ("S002".into(), Condition::EyesOpen),
        ]
    );
    assert_eq!(cat.subjects(), vec!["S001", "S002"]);
    let reasons: Vec<&str> = cat.excluded.iter().map(|x| x.reason.as_str()).collect();
    assert!(reasons.contains(&"sample_rate != 160 (found 128)"));
    assert!(reasons.contains(&"channel_count != 64 (found 32)"));
    assert_eq!(catalog_dataset(root).unwrap(), cat);
}

#[test]
fn empty_root_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(catalog_dataset(dir.path()).is_err());
    assert!(catalog_dataset(&dir.path().join("missing")).is_err());
}

#[test]
fn run_names() {
    assert_eq!(parse_run_name("S001R01.edf"), Some(("S001".into(), 1)));
    assert_eq!(parse_run_name("S109R02.edf"), Some(("S109".into(), 2)));
    assert_eq!(parse_run_name("S001R01.edf.event"), None);
    assert_eq!(parse_run_name("notes.txt"), None);
}
