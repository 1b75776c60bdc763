//! Test corpus and the checkers that measure each inequality as a ratio.

pub mod corpus;
pub mod lemmas;
pub mod report;
pub mod theorems;

pub use corpus::{corpus_generate, Corpus, CorpusSpec, Member, MemberKind, Mode};
pub use lemmas::{
    check_asum, check_pee_to_hl, check_peetre_bound, check_stinq, corpus_pointwise_checks, corpus_spec_checks,
    default_spec_matrix, peak_cube, smooth_levels, LemmaConfig,
};
pub use report::{Measure, MemberRatio, RatioReport, Status};
pub use theorems::{cross_spec_ratio, report_thm1, report_thm2, IdentityResidual, Thm1Report, Thm2Report};
