//! Topological interference management as low-rank matrix completion.
//!
//! A network of `K` transmitter-receiver pairs, known only through which
//! links interfere and which messages each receiver already caches, becomes a
//! [`SideInfoMask`]: ones on the diagonal, zeros where interference must be
//! cancelled, free entries elsewhere. Any completion of rank `n` yields a
//! linear scheme over `n` channel uses, i.e. `1/n` degrees of freedom per user.
//!
//! ```
//! use sparse_lowrank::tim::{build_mask, extract_precoders, min_rank_complete, CompletionOptions, NetworkTopology};
//!
//! // Receiver 1 hears transmitter 2 but nothing else interferes.
//! let topo = NetworkTopology::new(3, [(0, 1)])?;
//! let mask = build_mask(&topo);
//! let result = min_rank_complete(&mask, &CompletionOptions::default())?;
//! assert_eq!(result.rank, 2);
//! let scheme = extract_precoders(&result.matrix, result.rank)?;
//! assert!(scheme.mask_error(&mask) < 1e-3);
//! # Ok::<(), sparse_lowrank::Error>(())
//! ```

mod complete;
mod mask;
mod nuclear;
mod precoders;
mod topology;

pub use complete::{complete_at_rank, dof, min_rank_complete, CompletionOptions, CompletionResult, Dof, ManifoldSolver, RankAttempt};
pub use mask::{build_mask, matrix_to_csv, EntryState, SideInfoMask};
pub use nuclear::{
    nuclear_norm_complete, singular_value_threshold, NuclearNormOptions, NuclearNormResult, NuclearNormStatus,
    NUMERICAL_RANK_TOL,
};
pub use precoders::{extract_precoders, PrecoderDecoderSet};
pub use topology::NetworkTopology;
