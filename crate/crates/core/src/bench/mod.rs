//! Benchmark harness: severity ladders over restorers and paired training
//! data emission.

mod ladder;
mod pairs;
mod report;
mod restorer;

pub use ladder::{
    corrupt, corrupted_input, default_ladders, row_stream, run_ladder, run_ladder_with, LadderKind, LadderReport,
    LadderRow, LadderSpec,
};
pub use pairs::{
    draw_record, emit_pair_dataset, pair_stream, replay_pair, DirSink, Pair, PairConfig, PairFailure, PairRecord,
    PairSink, PairSummary, SourceImage, SourceKind,
};
pub use report::{aggregate, sidecar, summarize, write_csv, write_json, LadderSidecar, LevelSummary, MetricSummary, CSV_HEADER};
pub use restorer::{
    ExternalDirRestorer, IdentityRestorer, NllrRestorer, RestoreContext, Restorer, RestorerSpec, WienerRestorer,
    DEFAULT_WIENER_NSR,
};
