//! Downstream harnesses: LLM-choice compositional reasoning and
//! text-to-image reconstruction.

pub mod reasoning;
pub mod svo;
pub mod t2i;

pub use reasoning::{
    build_reasoning_prompt, parse_response, prepare, rotate_answer, rotation_order, run_reasoning,
    score_reasoning, LanguageModel, OverlapModel, PreparedInstance, ReasoningInstance,
    ReasoningRun, ReasoningScore,
};
pub use svo::{svo_negative_caption, SvoTriplet};
pub use t2i::{
    chunk_label, cosine, cumulative_chunks, embed_similarity, mean_rank, mean_similarity, run_t2i,
    similarity_by_chunk, Chunk, EmbedRequest, EmbedResponse, Embedder, ImageGenerator,
    MeanRankTable, RankRecord, T2iInput, T2iSample,
};
