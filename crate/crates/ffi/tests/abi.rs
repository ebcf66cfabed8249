use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use pulled_saw_ffi::*;

fn enumerate(d: u32, n: u32, class: PsClass) -> *mut PsTable {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ps_enumerate(d, n, class as u32, 1, &mut t) }, PsStatus::Ok);
    assert!(!t.is_null());
    t
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    let n = unsafe { ps_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn hand_table_through_the_abi() {
    let t = enumerate(2, 2, PsClass::Positive);
    let (mut d, mut n, mut class, mut exact) = (0, 0, 9, false);
    assert_eq!(unsafe { ps_table_info(t, &mut d, &mut n, &mut class, &mut exact) }, PsStatus::Ok);
    assert_eq!((d, n, class, exact), (2, 2, PsClass::Positive as u32, true));
    for ((v, h), want) in [((2, 0), 2), ((1, 1), 2), ((0, 1), 2), ((0, 2), 1), ((1, 0), 0)] {
        let mut c = 99;
        assert_eq!(unsafe { ps_table_count_u64(t, 2, v, h, &mut c) }, PsStatus::Ok);
        assert_eq!(c, want);
    }
    let mut lz = 0.0;
    assert_eq!(unsafe { ps_table_log_partition(t, PsKind::C as u32, 2, 1.0, 1.0, &mut lz) }, PsStatus::Ok);
    assert!((lz - 7f64.ln()).abs() < 1e-12);
    assert_eq!(unsafe { ps_table_log_partition(t, PsKind::L as u32, 2, 3.0, 1.0, &mut lz) }, PsStatus::Ok);
    assert!((lz - 18f64.ln()).abs() < 1e-12);
    let (mut mean, mut var) = (0.0, 0.0);
    let st = unsafe { ps_table_moment(t, PsKind::C as u32, PsObservable::Visits as u32, 2, 1.0, 1.0, &mut mean, &mut var) };
    assert_eq!(st, PsStatus::Ok);
    assert!((mean - 6.0 / 7.0).abs() < 1e-12);
    unsafe { ps_table_free(t) };
}

#[test]
fn errors_are_codes_with_messages() {
    let t = enumerate(2, 3, PsClass::Plane);
    let mut c = 0;
    assert_eq!(unsafe { ps_table_count_u64(t, 7, 0, 0, &mut c) }, PsStatus::OutOfRange);
    assert!(last_error().contains("exceeds"));
    assert_eq!(unsafe { ps_table_count_u64(ptr::null(), 1, 0, 0, &mut c) }, PsStatus::NullPointer);
    assert_eq!(unsafe { ps_table_count_u64(t, 1, 0, 0, ptr::null_mut()) }, PsStatus::NullPointer);
    let mut lz = 0.0;
    assert_eq!(unsafe { ps_table_log_partition(t, 7, 1, 1.0, 1.0, &mut lz) }, PsStatus::InvalidArgument);
    assert_eq!(unsafe { ps_table_log_partition(t, 0, 1, -1.0, 1.0, &mut lz) }, PsStatus::InvalidArgument);
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { ps_enumerate(2, 3, 42, 0, &mut out) }, PsStatus::InvalidArgument);
    assert_eq!(unsafe { ps_enumerate(2, 3, 0, 0, ptr::null_mut()) }, PsStatus::NullPointer);
    unsafe { ps_table_free(t) };
    unsafe { ps_table_free(ptr::null_mut()) };
}

#[test]
fn big_counts_need_the_decimal_path() {
    let t = enumerate(3, 16, PsClass::Plane);
    let mut need = 0usize;
    assert_eq!(unsafe { ps_table_count_decimal(t, 16, 16, 0, ptr::null_mut(), 0, &mut need) }, PsStatus::BufferTooSmall);
    let mut buf = vec![0 as c_char; need];
    assert_eq!(unsafe { ps_table_count_decimal(t, 16, 16, 0, buf.as_mut_ptr(), need, &mut need) }, PsStatus::Ok);
    let s = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
    assert_eq!(s, "17245332");
    unsafe { ps_table_free(t) };
}

#[test]
fn write_read_and_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("t.csv").to_str().unwrap()).unwrap();
    let t = enumerate(2, 6, PsClass::PositiveUnfolded);
    assert_eq!(unsafe { ps_table_write(t, path.as_ptr()) }, PsStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(unsafe { ps_table_read(path.as_ptr(), &mut back) }, PsStatus::Ok);
    let sum = |t: *const PsTable| {
        let mut buf = vec![0 as c_char; 65];
        let mut need = 0;
        assert_eq!(unsafe { ps_table_checksum(t, buf.as_mut_ptr(), buf.len(), &mut need) }, PsStatus::Ok);
        assert_eq!(need, 65);
        unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
    };
    assert_eq!(sum(t), sum(back));
    let missing = CString::new(dir.path().join("nope.csv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ps_table_read(missing.as_ptr(), &mut back) }, PsStatus::Io);
    unsafe {
        ps_table_free(t);
        ps_table_free(back);
    }
}

#[test]
fn flatperm_handle() {
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { ps_flatperm(2, 4, 500, 5, 1, &mut t) }, PsStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { ps_table_value(t, 1, 1, 0, &mut v) }, PsStatus::Ok);
    assert_eq!(v, 2.0);
    assert_eq!(unsafe { ps_table_value(t, 2, 2, 2, &mut v) }, PsStatus::Ok);
    assert!(v.is_nan(), "unreachable cell is absent");
    let mut c = 0;
    assert_eq!(unsafe { ps_table_count_u64(t, 1, 1, 0, &mut c) }, PsStatus::InvalidArgument);
    unsafe { ps_table_free(t) };
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(ps_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

/// Compiles the C smoke program against the generated header and the
/// static library produced by this build.
#[test]
fn c_program_links_against_header() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let target_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = target_dir.join("libpulled_saw_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: static library or C compiler unavailable");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let status = Command::new("cc")
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&bin).arg(dir.path().join("c.csv")).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("count=2 logz=1.945910149055"), "{stdout}");
    assert!(dir.path().join("c.csv.manifest.json").exists());
}
