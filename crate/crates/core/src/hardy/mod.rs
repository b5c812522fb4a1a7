//! Atoms, partitions of unity, heat maximal functions and the resupporting of
//! mean-zero atoms onto a section interval.

mod atom;
mod cutoff;
mod io;
mod maximal;
mod resupport;

pub use atom::{atomic_synthesize, Atom, AtomKind, AtomicCombination, Host, CANCELLATION};
pub use cutoff::{partition_of_unity, smoothstep, Cutoff, PartitionBump, Ramp};
pub use io::{atom_from_csv, atom_to_csv, combination_from_csv, combination_to_csv};
pub use maximal::{
    hardy_norm, hardy_norm_local, maximal_function, HardyNormReport, TimeGrid, LOCAL_T_MIN, PER_OCTAVE,
};
pub use resupport::{resupport_atom, Resupport, ResupportSummary};
