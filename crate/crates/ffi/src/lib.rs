//! C ABI over `pulled-saw`.
//!
//! Tables are opaque `PsTable` handles created by `ps_enumerate`,
//! `ps_flatperm` or `ps_table_read` and released with `ps_table_free`.
//! Every fallible call returns a `PsStatus`; on failure the message is
//! available from `ps_last_error_message` on the same thread. Integer enum
//! arguments (`class`, `kind`, `observable`) take the values of `PsClass`,
//! `PsKind` and `PsObservable`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use num_traits::ToPrimitive;
use pulled_saw::enumerate::{enumerate_with, EnumConfig, WalkClass};
use pulled_saw::error::Error;
use pulled_saw::flatperm::{run_flatperm, FlatPermConfig};
use pulled_saw::io::{checksum, read_table, serialize_table, table_payload, Table};
use pulled_saw::thermo::{evaluate_partition, moment, Observable, PartitionKind, WeightPoint};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Overflow = 4,
    Io = 5,
    Parse = 6,
    Checksum = 7,
    ResourceLimit = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsClass {
    Positive = 0,
    PositiveUnfolded = 1,
    FullLattice = 2,
    Plane = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsKind {
    C = 0,
    L = 1,
    T = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsObservable {
    Visits = 0,
    Height = 1,
}

/// Opaque table handle: exact counts or a flatPERM estimate.
pub struct PsTable {
    inner: Table,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> PsStatus {
    match e {
        Error::LengthOutOfRange { .. } => PsStatus::OutOfRange,
        Error::Overflow { .. } => PsStatus::Overflow,
        Error::Io { .. } => PsStatus::Io,
        Error::Parse { .. } | Error::Json(_) | Error::Schema(_) => PsStatus::Parse,
        Error::Checksum(_) => PsStatus::Checksum,
        Error::ResourceLimit { .. } => PsStatus::ResourceLimit,
        _ => PsStatus::InvalidArgument,
    }
}

struct Fail(PsStatus);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        set_error(e.to_string());
        Fail(status_of(&e))
    }
}

fn fail(status: PsStatus, msg: &str) -> Fail {
    set_error(msg);
    Fail(status)
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsStatus::Ok,
        Ok(Err(Fail(s))) => s,
        Err(_) => {
            set_error("internal panic");
            PsStatus::Panic
        }
    }
}

unsafe fn table<'a>(t: *const PsTable) -> Result<&'a Table, Fail> {
    // SAFETY: the caller passes a handle obtained from this library or null.
    unsafe { t.as_ref() }.map(|t| &t.inner).ok_or_else(|| fail(PsStatus::NullPointer, "null table handle"))
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    // SAFETY: the caller passes a writable pointer or null.
    unsafe { p.as_mut() }.ok_or_else(|| fail(PsStatus::NullPointer, "null output pointer"))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a Path, Fail> {
    if p.is_null() {
        return Err(fail(PsStatus::NullPointer, "null path"));
    }
    // SAFETY: non-null and nul-terminated by contract.
    let s = unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| fail(PsStatus::InvalidArgument, "path is not UTF-8"))?;
    Ok(Path::new(s))
}

/// Copies `s` plus a nul into `buf` when it fits; `needed` receives the
/// full size including the nul.
unsafe fn copy_out(s: &str, buf: *mut c_char, len: usize, needed: *mut usize) -> Result<(), Fail> {
    let size = s.len() + 1;
    if !needed.is_null() {
        // SAFETY: checked non-null; writable by contract.
        unsafe { *needed = size };
    }
    if buf.is_null() || len < size {
        return Err(fail(PsStatus::BufferTooSmall, "buffer too small"));
    }
    // SAFETY: buf holds at least `size` bytes by the check above.
    unsafe {
        ptr::copy_nonoverlapping(s.as_ptr().cast::<c_char>(), buf, s.len());
        *buf.add(s.len()) = 0;
    }
    Ok(())
}

fn class_arg(c: u32) -> Result<WalkClass, Fail> {
    match c {
        0 => Ok(WalkClass::Positive),
        1 => Ok(WalkClass::PositiveUnfolded),
        2 => Ok(WalkClass::FullLattice),
        3 => Ok(WalkClass::Plane),
        _ => Err(fail(PsStatus::InvalidArgument, "unknown class")),
    }
}

fn class_code(c: WalkClass) -> u32 {
    match c {
        WalkClass::Positive => PsClass::Positive as u32,
        WalkClass::PositiveUnfolded => PsClass::PositiveUnfolded as u32,
        WalkClass::FullLattice => PsClass::FullLattice as u32,
        WalkClass::Plane => PsClass::Plane as u32,
    }
}

fn kind_arg(k: u32) -> Result<PartitionKind, Fail> {
    match k {
        0 => Ok(PartitionKind::C),
        1 => Ok(PartitionKind::L),
        2 => Ok(PartitionKind::T),
        _ => Err(fail(PsStatus::InvalidArgument, "unknown partition kind")),
    }
}

fn observable_arg(o: u32) -> Result<Observable, Fail> {
    match o {
        0 => Ok(Observable::Visits),
        1 => Ok(Observable::Height),
        _ => Err(fail(PsStatus::InvalidArgument, "unknown observable")),
    }
}

fn workers_arg(w: u32) -> Option<usize> {
    (w > 0).then_some(w as usize)
}

fn publish(t: Table, out_table: &mut *mut PsTable) {
    *out_table = Box::into_raw(Box::new(PsTable { inner: t }));
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn ps_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf` (truncating
/// if needed) and returns the full size including the nul; 0 when there is
/// no error recorded.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn ps_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes_with_nul();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len);
            // SAFETY: buf holds `len >= n` bytes by contract.
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buf, n);
                *buf.add(n - 1) = 0;
            }
        }
        bytes.len()
    })
}

/// Exact enumeration of one class. `workers = 0` uses the default pool.
///
/// # Safety
/// `out_table` must be a valid pointer to write the new handle to.
#[no_mangle]
pub unsafe extern "C" fn ps_enumerate(
    dimension: u32,
    n_max: u32,
    class: u32,
    workers: u32,
    out_table: *mut *mut PsTable,
) -> PsStatus {
    guard(|| {
        let slot = unsafe { out(out_table) }?;
        let class = class_arg(class)?;
        let d = dimension as usize;
        let cfg = EnumConfig {
            symmetry: d >= 2 && class != WalkClass::PositiveUnfolded,
            workers: workers_arg(workers),
            ..EnumConfig::default()
        };
        let t = enumerate_with(d, n_max as usize, class, &cfg)?;
        publish(Table::Exact(t), slot);
        Ok(())
    })
}

/// flatPERM estimate of positive-walk counts.
///
/// # Safety
/// `out_table` must be a valid pointer to write the new handle to.
#[no_mangle]
pub unsafe extern "C" fn ps_flatperm(
    dimension: u32,
    n_max: u32,
    tours: u64,
    seed: u64,
    workers: u32,
    out_table: *mut *mut PsTable,
) -> PsStatus {
    guard(|| {
        let slot = unsafe { out(out_table) }?;
        let mut cfg = FlatPermConfig::new(tours, seed);
        cfg.workers = workers_arg(workers);
        let e = run_flatperm(dimension as usize, n_max as usize, &cfg)?;
        publish(Table::Stochastic(e), slot);
        Ok(())
    })
}

/// Reads a table and verifies its manifest checksum.
///
/// # Safety
/// `path` must be a nul-terminated string; `out_table` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ps_table_read(path: *const c_char, out_table: *mut *mut PsTable) -> PsStatus {
    guard(|| {
        let slot = unsafe { out(out_table) }?;
        let (t, _) = read_table(unsafe { path_arg(path) }?)?;
        publish(t, slot);
        Ok(())
    })
}

/// Writes the table payload to `path` and its manifest beside it.
///
/// # Safety
/// `t` must be a live handle; `path` a nul-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ps_table_write(t: *const PsTable, path: *const c_char) -> PsStatus {
    guard(|| {
        serialize_table(unsafe { table(t) }?, unsafe { path_arg(path) }?, 0.0)?;
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `t` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_table_free(t: *mut PsTable) {
    if !t.is_null() {
        // SAFETY: created by Box::into_raw in `publish`.
        drop(unsafe { Box::from_raw(t) });
    }
}

/// # Safety
/// `t` must be a live handle and the out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn ps_table_info(
    t: *const PsTable,
    dimension: *mut u32,
    n_max: *mut u32,
    class: *mut u32,
    is_exact: *mut bool,
) -> PsStatus {
    guard(|| {
        let t = unsafe { table(t) }?;
        *unsafe { out(dimension) }? = t.dimension() as u32;
        *unsafe { out(n_max) }? = t.n_max() as u32;
        *unsafe { out(class) }? = class_code(t.class());
        *unsafe { out(is_exact) }? = matches!(t, Table::Exact(_));
        Ok(())
    })
}

fn exact(t: &Table) -> Result<&pulled_saw::enumerate::CountTable, Fail> {
    match t {
        Table::Exact(c) => Ok(c),
        Table::Stochastic(_) => Err(fail(PsStatus::InvalidArgument, "table holds estimates, not exact counts")),
    }
}

fn check_n(t: &Table, n: u32) -> Result<usize, Fail> {
    let n = n as usize;
    if n > t.n_max() {
        return Err(Error::LengthOutOfRange { n, n_max: t.n_max() }.into());
    }
    Ok(n)
}

/// Exact count `c_n(v, h)`; `PS_STATUS_OVERFLOW` if it exceeds 64 bits.
///
/// # Safety
/// `t` must be a live handle and `count` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_table_count_u64(t: *const PsTable, n: u32, v: u32, h: i32, count: *mut u64) -> PsStatus {
    guard(|| {
        let t = unsafe { table(t) }?;
        let slot = unsafe { out(count) }?;
        let n = check_n(t, n)?;
        *slot = exact(t)?
            .get(n, v, h)
            .to_u64()
            .ok_or_else(|| Fail::from(Error::Overflow { n, v, h }))?;
        Ok(())
    })
}

/// Exact count as a decimal string; `needed` receives the required size.
///
/// # Safety
/// `t` must be a live handle, `buf` null or `len` writable bytes, `needed`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_table_count_decimal(
    t: *const PsTable,
    n: u32,
    v: u32,
    h: i32,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> PsStatus {
    guard(|| {
        let t = unsafe { table(t) }?;
        let n = check_n(t, n)?;
        unsafe { copy_out(&exact(t)?.get(n, v, h).to_string(), buf, len, needed) }
    })
}

/// Cell value as a double: the exact count, or the estimate (NaN for a
/// cell the sampler never reached).
///
/// # Safety
/// `t` must be a live handle and `value` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_table_value(t: *const PsTable, n: u32, v: u32, h: i32, value: *mut f64) -> PsStatus {
    guard(|| {
        let t = unsafe { table(t) }?;
        let slot = unsafe { out(value) }?;
        let n = check_n(t, n)?;
        *slot = match t {
            Table::Exact(c) => c.get(n, v, h).to_f64().unwrap_or(f64::INFINITY),
            Table::Stochastic(e) => e.get(n, v, h).map_or(f64::NAN, |c| c.value),
        };
        Ok(())
    })
}

/// `log Z_n(a, y)` for partition kind `kind`; `-inf` for an empty slice.
///
/// # Safety
/// `t` must be a live handle and `log_z` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_table_log_partition(
    t: *const PsTable,
    kind: u32,
    n: u32,
    a: f64,
    y: f64,
    log_z: *mut f64,
) -> PsStatus {
    guard(|| {
        let t = unsafe { table(t) }?;
        let slot = unsafe { out(log_z) }?;
        let w = WeightPoint::new(a, y)?;
        *slot = evaluate_partition(&t.log_density(), &w, n as usize, kind_arg(kind)?)?;
        Ok(())
    })
}

/// Boltzmann mean and variance of visits or endpoint height.
///
/// # Safety
/// `t` must be a live handle; `mean` and `variance` writable.
#[no_mangle]
pub unsafe extern "C" fn ps_table_moment(
    t: *const PsTable,
    kind: u32,
    observable: u32,
    n: u32,
    a: f64,
    y: f64,
    mean: *mut f64,
    variance: *mut f64,
) -> PsStatus {
    guard(|| {
        let t = unsafe { table(t) }?;
        let (m_slot, v_slot) = (unsafe { out(mean) }?, unsafe { out(variance) }?);
        let w = WeightPoint::new(a, y)?;
        let m = moment(&t.log_density(), &w, n as usize, kind_arg(kind)?, observable_arg(observable)?)?;
        *m_slot = m.mean;
        *v_slot = m.variance;
        Ok(())
    })
}

/// SHA-256 of the table payload as 64 hex characters plus a nul.
///
/// # Safety
/// `t` must be a live handle, `buf` null or `len` writable bytes, `needed`
/// null or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_table_checksum(
    t: *const PsTable,
    buf: *mut c_char,
    len: usize,
    needed: *mut usize,
) -> PsStatus {
    guard(|| {
        let t = unsafe { table(t) }?;
        unsafe { copy_out(&checksum(&table_payload(t)), buf, len, needed) }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_mapping() {
        assert_eq!(status_of(&Error::LengthOutOfRange { n: 3, n_max: 2 }), PsStatus::OutOfRange);
        assert_eq!(status_of(&Error::Checksum("x".into())), PsStatus::Checksum);
        assert_eq!(status_of(&Error::DisjointRanges), PsStatus::InvalidArgument);
    }

    #[test]
    fn enum_codes_round_trip() {
        for c in WalkClass::ALL {
            assert_eq!(class_arg(class_code(c)).ok(), Some(c));
        }
        assert!(class_arg(9).is_err());
        assert!(kind_arg(3).is_err());
        assert!(observable_arg(2).is_err());
    }
}
