//! C ABI over `nlm-core`.
//!
//! Images and configurations cross the boundary as opaque handles that the
//! caller releases with the matching `*_free` function. Every fallible call
//! returns an [`NlmStatus`]; on failure a human-readable message is available
//! from [`nlm_last_error_message`] on the same thread. Panics never unwind
//! into the caller; they are reported as [`NlmStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use nlm_core::diagnostics::decompose_eqm;
use nlm_core::{
    add_gaussian_noise, denoise, load_image, mse, psnr, save_image, BorderPolicy, CenterPolicy,
    DenoiseConfig, DistanceSource, Error, GrayImage, NoiseSpec, SelectionRule, SelfWeight,
};

/// Result code of every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    DimensionMismatch = 5,
    MissingOracle = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Grayscale image with double-precision samples in row-major order.
pub struct NlmImage(GrayImage);

/// Estimator configuration.
pub struct NlmConfig(DenoiseConfig);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlmSelection {
    /// Every pixel of the search window.
    All = 0,
    /// The `param` most similar pixels (`param` rounded down, at least 1).
    TopK = 1,
    /// Pixels whose raw affinity is at least `param`, with `0 < param <= 1`.
    Threshold = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlmSource {
    Noisy = 0,
    Oracle = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlmCenter {
    Include = 0,
    Exclude = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlmSelfWeight {
    Literal = 0,
    MaxOther = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlmBorder {
    Mirror = 0,
    Crop = 1,
}

/// Squared-error split of one estimator run, averaged over the domain.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NlmDecomposition {
    pub bias: f64,
    pub variance: f64,
    pub covariance: f64,
    pub eqm: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(NlmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Io { .. } | Error::EmptyCorpus(_) => NlmStatus::Io,
            Error::Format { .. } | Error::Parse(_) => NlmStatus::Format,
            Error::DimensionMismatch(..) => NlmStatus::DimensionMismatch,
            Error::MissingOracle => NlmStatus::MissingOracle,
            Error::InvalidImage(_) | Error::InvalidParameter(_) | Error::OutsideDomain { .. } => {
                NlmStatus::InvalidArgument
            }
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(NlmStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(NlmStatus::InvalidArgument, msg.into())
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NlmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NlmStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            NlmStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn path_arg<'a>(p: *const c_char) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the most recent failure on the calling thread, as a
/// NUL-terminated UTF-8 string. The pointer stays valid until the next
/// failing call on this thread. Empty if nothing has failed yet.
#[no_mangle]
pub extern "C" fn nlm_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Creates an image by copying `width * height` samples from `data`.
///
/// # Safety
/// `data` must point to `width * height` readable doubles; `out` must be a
/// valid pointer to write the new handle to.
#[no_mangle]
pub unsafe extern "C" fn nlm_image_new(
    width: usize,
    height: usize,
    data: *const f64,
    out: *mut *mut NlmImage,
) -> NlmStatus {
    guard(|| {
        if data.is_null() {
            return Err(null("data"));
        }
        let n = width
            .checked_mul(height)
            .ok_or_else(|| invalid("image dimensions overflow"))?;
        let samples = std::slice::from_raw_parts(data, n).to_vec();
        write_out(out, NlmImage(GrayImage::new(width, height, samples)?))
    })
}

/// Loads a binary PGM or 8-bit PNG (color is converted to luma).
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlm_image_load(path: *const c_char, out: *mut *mut NlmImage) -> NlmStatus {
    guard(|| {
        let path = path_arg(path)?;
        write_out(out, NlmImage(load_image(path)?))
    })
}

/// Saves as a binary PGM, rounding and clamping samples to `[0, 255]`.
///
/// # Safety
/// `img` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nlm_image_save(img: *const NlmImage, path: *const c_char) -> NlmStatus {
    guard(|| {
        let img = deref(img, "image")?;
        save_image(&img.0, path_arg(path)?)?;
        Ok(())
    })
}

/// Width in pixels, or 0 for a null handle.
///
/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_image_width(img: *const NlmImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.width())
}

/// Height in pixels, or 0 for a null handle.
///
/// # Safety
/// `img` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_image_height(img: *const NlmImage) -> usize {
    img.as_ref().map_or(0, |i| i.0.height())
}

/// Copies the samples into `buf`, which holds `len` doubles. Fails with
/// `BufferTooSmall` unless `len >= width * height`.
///
/// # Safety
/// `img` must be a live handle; `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn nlm_image_copy_data(
    img: *const NlmImage,
    buf: *mut f64,
    len: usize,
) -> NlmStatus {
    guard(|| {
        let data = deref(img, "image")?.0.data();
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len < data.len() {
            return Err(Failure(
                NlmStatus::BufferTooSmall,
                format!("buffer holds {len} samples, image has {}", data.len()),
            ));
        }
        ptr::copy_nonoverlapping(data.as_ptr(), buf, data.len());
        Ok(())
    })
}

/// Releases an image. Null is ignored.
///
/// # Safety
/// `img` must be null or a handle that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn nlm_image_free(img: *mut NlmImage) {
    if !img.is_null() {
        drop(Box::from_raw(img));
    }
}

/// Adds white Gaussian noise of standard deviation `sigma`. The result is
/// fully determined by `seed`. `out_noise` may be null when the noise field
/// itself is not needed.
///
/// # Safety
/// `img` must be a live handle; `out_noisy` must be writable; `out_noise`
/// must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn nlm_add_gaussian_noise(
    img: *const NlmImage,
    sigma: f64,
    seed: u64,
    out_noisy: *mut *mut NlmImage,
    out_noise: *mut *mut NlmImage,
) -> NlmStatus {
    guard(|| {
        let img = deref(img, "image")?;
        if out_noisy.is_null() {
            return Err(null("output pointer"));
        }
        let (noisy, noise) = add_gaussian_noise(&img.0, &NoiseSpec::new(sigma, seed))?;
        write_out(out_noisy, NlmImage(noisy))?;
        if !out_noise.is_null() {
            write_out(out_noise, NlmImage(noise))?;
        }
        Ok(())
    })
}

/// Default configuration for noise level `sigma` and search radius `d`:
/// `h = sigma`, 7x7 patches with Gaussian kernel `a = 2`, all window pixels,
/// noisy distances with the center included, mirror borders.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_new(
    sigma: f64,
    d: usize,
    out: *mut *mut NlmConfig,
) -> NlmStatus {
    guard(|| {
        let cfg = DenoiseConfig::new(sigma, d);
        cfg.validate()?;
        write_out(out, NlmConfig(cfg))
    })
}

/// Releases a configuration. Null is ignored.
///
/// # Safety
/// `cfg` must be null or a handle that has not been freed yet.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_free(cfg: *mut NlmConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Applies `edit` and keeps it only if the result validates.
unsafe fn edit_config(
    cfg: *mut NlmConfig,
    edit: impl FnOnce(&mut DenoiseConfig) -> Result<(), Failure>,
) -> NlmStatus {
    guard(|| {
        let cfg = deref_mut(cfg, "config")?;
        let mut next = cfg.0.clone();
        edit(&mut next)?;
        next.validate()?;
        cfg.0 = next;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_set_h(cfg: *mut NlmConfig, h: f64) -> NlmStatus {
    edit_config(cfg, |c| {
        c.h = h;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_set_search_radius(cfg: *mut NlmConfig, d: usize) -> NlmStatus {
    edit_config(cfg, |c| {
        c.d = d;
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_set_patch_radius(
    cfg: *mut NlmConfig,
    radius: usize,
) -> NlmStatus {
    edit_config(cfg, |c| {
        c.patch_radius = radius;
        Ok(())
    })
}

/// Standard deviation of the patch kernel; `INFINITY` gives a flat kernel.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_set_kernel_a(cfg: *mut NlmConfig, a: f64) -> NlmStatus {
    edit_config(cfg, |c| {
        c.kernel_a = a;
        Ok(())
    })
}

/// `param` is ignored for `All`.
///
/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_set_selection(
    cfg: *mut NlmConfig,
    kind: NlmSelection,
    param: f64,
) -> NlmStatus {
    edit_config(cfg, |c| {
        c.selection = match kind {
            NlmSelection::All => SelectionRule::All,
            NlmSelection::TopK => {
                if !(param >= 1.0 && param.is_finite()) {
                    return Err(invalid(format!("top-k needs k >= 1, got {param}")));
                }
                SelectionRule::TopK(param as usize)
            }
            NlmSelection::Threshold => SelectionRule::Threshold(param),
        };
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_set_source(
    cfg: *mut NlmConfig,
    source: NlmSource,
) -> NlmStatus {
    edit_config(cfg, |c| {
        c.source = match source {
            NlmSource::Noisy => DistanceSource::Noisy,
            NlmSource::Oracle => DistanceSource::Oracle,
        };
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_set_center(
    cfg: *mut NlmConfig,
    center: NlmCenter,
) -> NlmStatus {
    edit_config(cfg, |c| {
        c.center = match center {
            NlmCenter::Include => CenterPolicy::Include,
            NlmCenter::Exclude => CenterPolicy::Exclude,
        };
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_set_self_weight(
    cfg: *mut NlmConfig,
    policy: NlmSelfWeight,
) -> NlmStatus {
    edit_config(cfg, |c| {
        c.self_weight = match policy {
            NlmSelfWeight::Literal => SelfWeight::Literal,
            NlmSelfWeight::MaxOther => SelfWeight::MaxOther,
        };
        Ok(())
    })
}

/// # Safety
/// `cfg` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nlm_config_set_border(
    cfg: *mut NlmConfig,
    border: NlmBorder,
) -> NlmStatus {
    edit_config(cfg, |c| {
        c.border = match border {
            NlmBorder::Mirror => BorderPolicy::Mirror,
            NlmBorder::Crop => BorderPolicy::Crop,
        };
        Ok(())
    })
}

/// Denoises `noisy`. `oracle` is the clean image, required only when the
/// configuration selects similar pixels on it; otherwise it may be null.
///
/// # Safety
/// `noisy` and `cfg` must be live handles; `oracle` must be null or live;
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlm_denoise(
    noisy: *const NlmImage,
    cfg: *const NlmConfig,
    oracle: *const NlmImage,
    out: *mut *mut NlmImage,
) -> NlmStatus {
    guard(|| {
        let v = deref(noisy, "noisy image")?;
        let cfg = deref(cfg, "config")?;
        let u = oracle.as_ref().map(|o| &o.0);
        write_out(out, NlmImage(denoise(&v.0, &cfg.0, u)?))
    })
}

/// Mean squared difference of two images of equal size.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlm_mse(
    a: *const NlmImage,
    b: *const NlmImage,
    out: *mut f64,
) -> NlmStatus {
    guard(|| {
        let value = mse(&deref(a, "image a")?.0, &deref(b, "image b")?.0)?;
        *deref_mut(out, "output pointer")? = value;
        Ok(())
    })
}

/// Peak signal-to-noise ratio in dB with peak 255; `INFINITY` for equal images.
///
/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlm_psnr(
    a: *const NlmImage,
    b: *const NlmImage,
    out: *mut f64,
) -> NlmStatus {
    guard(|| {
        let value = psnr(&deref(a, "image a")?.0, &deref(b, "image b")?.0)?;
        *deref_mut(out, "output pointer")? = value;
        Ok(())
    })
}

/// Splits the squared error of denoising `clean + noise` into bias,
/// variance and covariance terms.
///
/// # Safety
/// `clean`, `noise` and `cfg` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn nlm_decompose_eqm(
    clean: *const NlmImage,
    noise: *const NlmImage,
    cfg: *const NlmConfig,
    out: *mut NlmDecomposition,
) -> NlmStatus {
    guard(|| {
        let r = decompose_eqm(
            &deref(clean, "clean image")?.0,
            &deref(noise, "noise image")?.0,
            &deref(cfg, "config")?.0,
        )?;
        *deref_mut(out, "output pointer")? = NlmDecomposition {
            bias: r.bias,
            variance: r.variance,
            covariance: r.covariance,
            eqm: r.eqm,
        };
        Ok(())
    })
}
