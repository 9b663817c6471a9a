//! Resource guards for dense simulation.
//!
//! Dense operators on `n` qubits take `16 * 4^n` bytes. The defaults keep
//! every matrix under a few hundred megabytes. They can be raised through
//! environment variables, which is unsafe in the sense that nothing stops
//! the process from running out of memory afterwards.

use crate::error::{Error, Result};

/// Default qubit limit for dense operator rendering.
pub const DENSE_QUBIT_LIMIT: usize = 12;

/// Default qubit limit for the explicit Choi matrix (`4^n x 4^n`).
pub const CHOI_QUBIT_LIMIT: usize = 6;

/// Overrides [`DENSE_QUBIT_LIMIT`]. Unsafe: may exhaust memory.
pub const DENSE_LIMIT_ENV: &str = "QECBOUND_UNSAFE_DENSE_LIMIT";

/// Overrides [`CHOI_QUBIT_LIMIT`]. Unsafe: may exhaust memory.
pub const CHOI_LIMIT_ENV: &str = "QECBOUND_UNSAFE_CHOI_LIMIT";

fn from_env(var: &str, default: usize) -> usize {
    std::env::var(var)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(default)
}

pub fn dense_qubit_limit() -> usize {
    from_env(DENSE_LIMIT_ENV, DENSE_QUBIT_LIMIT)
}

pub fn choi_qubit_limit() -> usize {
    from_env(CHOI_LIMIT_ENV, CHOI_QUBIT_LIMIT)
}

pub(crate) fn check_dense(n: usize) -> Result<()> {
    let limit = dense_qubit_limit();
    if n > limit {
        return Err(Error::Guard {
            what: "dense qubit count",
            value: n,
            limit,
        });
    }
    Ok(())
}

/// `dim` is the input dimension of the channel.
pub(crate) fn check_choi(dim: usize) -> Result<()> {
    let limit = 1usize << choi_qubit_limit();
    if dim > limit {
        return Err(Error::Guard {
            what: "Choi input dimension",
            value: dim,
            limit,
        });
    }
    Ok(())
}
