//! Computer capacity of processors.
//!
//! A processor is described by its registers, memory hierarchy, issue width
//! and instruction classes ([`machine`]). Expanding the description gives the
//! number of distinct instructions per execution time, the coefficients of
//! the characteristic equation `sum_t n_t * Y^-t = 1`. The log2 of its
//! largest root is the growth rate of the number of distinct instruction
//! sequences per cycle ([`solver`]), cross-checked by exact sequence
//! counting ([`oracle`]). [`whatif`] runs parameter sweeps on top of that
//! and [`report`] renders the results.

pub mod bundled;
pub mod error;
pub mod format;
pub mod machine;
pub mod oracle;
pub mod report;
pub mod solver;
pub mod whatif;

pub use error::{Error, Result};
pub use machine::{
    class_instances, enumerate_spectrum, operand_domain_size, InstructionClass, LatencySpectrum,
    MachineSpec, MemoryLevel, OperandKind,
};
pub use oracle::{dp_task_count, oracle_rate, TaskCountTable};
pub use report::{
    emit_plot_data, normalize, render_table, ComparisonRow, Format, NormalizedSeries,
};
pub use solver::{capacity, capacity_from_spectrum, solve_root, CapacityResult, DEFAULT_REL_TOL};
pub use whatif::{
    apply_modification, combo_step3, evolution_rank, grow_instruction_set, pair_sweep,
    single_sweep, Candidate, ClassSelector, Modification, SweepConfig, SweepReport, Target,
};
