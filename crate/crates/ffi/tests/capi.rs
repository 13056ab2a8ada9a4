use std::f64::consts::PI;
use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use eegprint::dsp::wrap_phase;
use eegprint::synth::{encode_edf, SplitMix64};
use eegprint_ffi::*;

fn last_error() -> String {
    let p = eeg_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn edf_image(channels: usize, seconds: usize) -> Vec<u8> {
    let mut rng = SplitMix64::new(5);
    let base: Vec<f64> = (0..seconds * 160).map(|_| rng.normal()).collect();
    let labels: Vec<String> = (0..channels).map(|c| format!("Ch{c}.")).collect();
    let data: Vec<Vec<f64>> = (0..channels)
        .map(|c| {
            (0..seconds * 160)
                .map(|i| {
                    let t = i as f64 / 160.0;
                    20.0 * (2.0 * PI * 37.0 * t - 0.4 * c as f64).cos() + base[i] + rng.normal()
                })
                .collect()
        })
        .collect();
    encode_edf(&labels, &data, 160, true).unwrap()
}

#[test]
fn full_chain_through_handles() {
    let bytes = edf_image(4, 6);
    let subject = CString::new("S001").unwrap();
    let mut rec = ptr::null_mut();
    let st = unsafe {
        eeg_recording_from_bytes(
            bytes.as_ptr(),
            bytes.len(),
            subject.as_ptr(),
            EegCondition::EyesOpen as i32,
            &mut rec,
        )
    };
    assert_eq!(st, EegStatus::Ok);
    unsafe {
        assert_eq!(eeg_recording_n_channels(rec), 4);
        assert_eq!(eeg_recording_n_samples(rec), 960);
        assert_eq!(eeg_recording_sample_rate(rec), 160.0);
    }

    let mut ps = ptr::null_mut();
    assert_eq!(
        unsafe { eeg_band_phase(rec, EegBand::Gamma as i32, &mut ps) },
        EegStatus::Ok
    );
    let n = unsafe { eeg_phase_n_samples(ps) };
    assert_eq!(n, 960);
    let mut ch0 = vec![0.0; n];
    let mut ch1 = vec![0.0; n];
    unsafe {
        assert_eq!(eeg_phase_channel(ps, 0, ch0.as_mut_ptr(), n), EegStatus::Ok);
        assert_eq!(eeg_phase_channel(ps, 1, ch1.as_mut_ptr(), n), EegStatus::Ok);
        assert_eq!(
            eeg_phase_channel(ps, 9, ch1.as_mut_ptr(), n),
            EegStatus::InvalidArgument
        );
        assert_eq!(
            eeg_phase_channel(ps, 0, ch1.as_mut_ptr(), n - 1),
            EegStatus::InvalidArgument
        );
    }
    assert!(ch0.iter().all(|&p| p > -PI && p <= PI));

    let mut feats = ptr::null_mut();
    assert_eq!(
        unsafe { eeg_features(ps, EegMethod::Plv as i32, 2.0, &mut feats) },
        EegStatus::Ok
    );
    unsafe {
        assert_eq!(eeg_features_n_epochs(feats), 3);
        assert_eq!(eeg_features_width(feats), 6);
    }
    let mut row = vec![0.0; 6];
    assert_eq!(
        unsafe { eeg_features_row(feats, 0, row.as_mut_ptr(), 6) },
        EegStatus::Ok
    );

    // first pair of the first epoch equals a direct PLV over the same samples
    let mut direct = 0.0;
    assert_eq!(
        unsafe { eeg_plv(ch0.as_ptr(), ch1.as_ptr(), 320, &mut direct) },
        EegStatus::Ok
    );
    assert!((row[0] - direct).abs() < 1e-12);
    assert!(row[0] > 0.5);

    let mut sim = 0.0;
    assert_eq!(
        unsafe { eeg_similarity(row.as_ptr(), row.as_ptr(), 6, &mut sim) },
        EegStatus::Ok
    );
    assert_eq!(sim, 1.0);

    unsafe {
        eeg_features_free(feats);
        eeg_phase_free(ps);
        eeg_recording_free(rec);
        eeg_features_free(ptr::null_mut());
        eeg_phase_free(ptr::null_mut());
        eeg_recording_free(ptr::null_mut());
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    let subject = CString::new("S001").unwrap();
    let mut rec = ptr::null_mut();
    let junk = [0u8; 100];
    let st = unsafe {
        eeg_recording_from_bytes(junk.as_ptr(), junk.len(), subject.as_ptr(), 0, &mut rec)
    };
    assert_eq!(st, EegStatus::ParseError);
    assert!(rec.is_null());
    assert!(!last_error().is_empty());

    let bytes = edf_image(2, 2);
    let st = unsafe {
        eeg_recording_from_bytes(bytes.as_ptr(), bytes.len(), subject.as_ptr(), 7, &mut rec)
    };
    assert_eq!(st, EegStatus::InvalidArgument);
    assert!(last_error().contains("condition"));

    let missing = CString::new("/definitely/not/here.edf").unwrap();
    let st = unsafe { eeg_recording_load(missing.as_ptr(), subject.as_ptr(), 1, &mut rec) };
    assert_eq!(st, EegStatus::IoError);

    let mut out = 0.0;
    let a = [0.1, 0.2];
    assert_eq!(
        unsafe { eeg_pli(a.as_ptr(), ptr::null(), 2, &mut out) },
        EegStatus::NullPointer
    );
    assert_eq!(
        unsafe { eeg_pli(a.as_ptr(), a.as_ptr(), 0, &mut out) },
        EegStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { eeg_eer(a.as_ptr(), 2, a.as_ptr(), 0, &mut out) },
        EegStatus::InvalidArgument
    );
    let mut ps = ptr::null_mut();
    assert_eq!(
        unsafe { eeg_band_phase(ptr::null(), 1, &mut ps) },
        EegStatus::NullPointer
    );
    assert_eq!(unsafe { eeg_features_n_epochs(ptr::null()) }, 0);
}

#[test]
fn scalar_metrics() {
    let mut rng = SplitMix64::new(3);
    let a: Vec<f64> = (0..400).map(|_| rng.phase()).collect();
    let b: Vec<f64> = a.iter().map(|p| wrap_phase(p - PI / 2.0)).collect();
    let (mut pli, mut plv) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            eeg_pli(a.as_ptr(), b.as_ptr(), 400, &mut pli),
            EegStatus::Ok
        );
        assert_eq!(
            eeg_plv(a.as_ptr(), b.as_ptr(), 400, &mut plv),
            EegStatus::Ok
        );
    }
    assert_eq!(pli, 1.0);
    assert!((plv - 1.0).abs() < 1e-12);

    let g = [0.2, 0.6];
    let i = [0.4, 0.8];
    let (mut eer, mut auc) = (0.0, 0.0);
    unsafe {
        assert_eq!(
            eeg_eer(g.as_ptr(), 2, i.as_ptr(), 2, &mut eer),
            EegStatus::Ok
        );
        assert_eq!(
            eeg_auc(g.as_ptr(), 2, i.as_ptr(), 2, &mut auc),
            EegStatus::Ok
        );
    }
    assert!((eer - 0.5).abs() < 1e-12);
    assert!((auc - 0.25).abs() < 1e-12);
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(crate_dir().join("include/eegprint.h")).unwrap();
    for name in [
        "eeg_recording_from_bytes",
        "eeg_recording_load",
        "eeg_band_phase",
        "eeg_features",
        "eeg_pli",
        "eeg_plv",
        "eeg_similarity",
        "eeg_eer",
        "eeg_auc",
        "eeg_last_error",
        "EEG_STATUS_NULL_POINTER",
        "typedef struct EegRecording EegRecording",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

/// Directory holding the library artifacts of the current profile.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_static_library() {
    let lib = artifact_dir().join("libeegprint_ffi.a");
    assert!(
        lib.is_file(),
        "static library not found at {}",
        lib.display()
    );
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("capi");
    let compile = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir().join("include"))
        .arg(crate_dir().join("tests/capi.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .output()
        .expect("C compiler");
    assert!(
        compile.status.success(),
        "{}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert!(String::from_utf8_lossy(&run.stdout).ends_with("ok\n"));
}
