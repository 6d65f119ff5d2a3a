#pragma once

#include "credi/corpus.hpp"
#include "credi/evaluation.hpp"
#include "credi/inference.hpp"
#include "credi/prompting.hpp"
#include "credi/retrieval.hpp"

#include <map>
#include <string>
#include <vector>

namespace credi {

/// Everything a prediction pass needs besides the prompt settings.
struct PipelineContext {
    const Dataset* train = nullptr;  ///< exemplar pool (gold labels required)
    const Dataset* target = nullptr; ///< instances to predict
    const Embedder* embedder = nullptr;
    const Backend* backend = nullptr;
    BatchOptions batch;
    bool exclude_self = true;
    std::size_t embed_parallelism = 1;
};

struct PredictionRun {
    std::vector<PromptItem> prompts;
    std::vector<PredictionRecord> records;
};

/// Builds one prompt per target instance (exemplars retrieved from `index`,
/// which must have been built over ctx.train with cfg.dialogue_variant).
std::vector<PromptItem> build_prompts(const PipelineContext& ctx, const RetrievalIndex& index, const PromptConfig& cfg);

/// Prompts, batch prediction and parsing for one prompt configuration.
PredictionRun predict_dataset(const PipelineContext& ctx, const RetrievalIndex& index, const PromptConfig& cfg);

/// Runs a per-dimension pass for each of the three dimensions and merges
/// the records: `parsed` holds the dimensions that parsed, `parse_error` the
/// first failure. A merged record may therefore carry both.
PredictionRun predict_per_dimension(const PipelineContext& ctx, const RetrievalIndex& index, const PromptConfig& base);

/// Every grid cell is evaluated on ctx.target; a failing cell is recorded
/// with its error instead of aborting the grid.
AblationTable run_ablation(const AblationConfig& grid, const PipelineContext& ctx, const PromptConfig& base);

} // namespace credi
