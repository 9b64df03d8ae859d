//! Diagnostic logging gated by the `MULTIFIT_LOG` environment variable.

use std::sync::OnceLock;

static ENABLED: OnceLock<bool> = OnceLock::new();

/// True when `MULTIFIT_LOG` is set to a non-empty value other than `0`.
pub fn enabled() -> bool {
    *ENABLED.get_or_init(|| {
        std::env::var("MULTIFIT_LOG").map(|v| !v.is_empty() && v != "0").unwrap_or(false)
    })
}

/// Print a diagnostic line to stderr when logging is enabled.
#[macro_export]
macro_rules! diag {
    ($($arg:tt)*) => {
        if $crate::diag::enabled() {
            eprintln!("[multifit] {}", format_args!($($arg)*));
        }
    };
}
