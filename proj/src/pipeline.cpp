#include "credi/pipeline.hpp"

#include "credi/error.hpp"

#include <fmt/format.h>

namespace credi {

namespace {

void check(const PipelineContext& ctx) {
    if (!ctx.train || !ctx.target || !ctx.embedder || !ctx.backend)
        throw ConfigError("pipeline context is incomplete");
}

} // namespace

std::vector<PromptItem> build_prompts(const PipelineContext& ctx, const RetrievalIndex& index, const PromptConfig& cfg) {
    check(ctx);
    cfg.validate();
    const auto& targets = ctx.target->instances;
    std::vector<PromptItem> items(targets.size());
    std::vector<std::string> texts;
    if (cfg.exemplar_count > 0) {
        texts.reserve(targets.size());
        for (const auto& inst : targets)
            texts.push_back(embedding_text(inst, ctx.target->unit(inst.unit_id), cfg.dialogue_variant, cfg.locale));
    }
    const auto queries = cfg.exemplar_count > 0 ? ctx.embedder->embed_batch(texts) : std::vector<Embedding>{};
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const auto& inst = targets[i];
        std::vector<Exemplar> exemplars;
        if (cfg.exemplar_count > 0)
            exemplars = select_exemplars(index, queries[i], inst.id, static_cast<std::size_t>(cfg.exemplar_count),
                                         *ctx.train, ctx.exclude_self, cfg);
        const PromptSpec spec = build_prompt(inst, ctx.target->unit(inst.unit_id), cfg, exemplars);
        items[i] = PromptItem{inst.id, render_prompt(spec)};
    }
    return items;
}

PredictionRun predict_dataset(const PipelineContext& ctx, const RetrievalIndex& index, const PromptConfig& cfg) {
    PredictionRun run;
    run.prompts = build_prompts(ctx, index, cfg);
    run.records = predict_batch(*ctx.backend, run.prompts, ctx.batch);
    parse_predictions(run.records, cfg.mode);
    return run;
}

PredictionRun predict_per_dimension(const PipelineContext& ctx, const RetrievalIndex& index, const PromptConfig& base) {
    PredictionRun merged;
    for (Dimension d : kDimensions) {
        PromptConfig cfg = base;
        cfg.mode = PromptMode::per_dimension(d);
        PredictionRun pass = predict_dataset(ctx, index, cfg);
        if (merged.records.empty()) {
            merged.records.resize(pass.records.size());
            for (std::size_t i = 0; i < pass.records.size(); ++i) merged.records[i].instance_id = pass.records[i].instance_id;
        }
        for (std::size_t i = 0; i < pass.records.size(); ++i) {
            auto& out = merged.records[i];
            const auto& rec = pass.records[i];
            out.raw_text += (out.raw_text.empty() ? "" : "\n") + rec.raw_text;
            out.attempts += rec.attempts;
            out.latency_ms += rec.latency_ms;
            if (rec.parsed) {
                if (!out.parsed) out.parsed = LabelMap{};
                out.parsed->insert(rec.parsed->begin(), rec.parsed->end());
            }
            if (rec.parse_error && !out.parse_error) out.parse_error = rec.parse_error;
            if (rec.backend_error && !out.backend_error) {
                out.backend_error = rec.backend_error;
                out.backend_error_kind = rec.backend_error_kind;
            }
        }
        for (auto& p : pass.prompts) merged.prompts.push_back(std::move(p));
    }
    return merged;
}

AblationTable run_ablation(const AblationConfig& grid, const PipelineContext& ctx, const PromptConfig& base) {
    check(ctx);
    AblationTable table;
    std::map<DialogueVariant, RetrievalIndex> indexes;
    for (const auto& cell : grid.cells()) {
        AblationRow row;
        row.cell = cell;
        try {
            PromptConfig cfg = base;
            cfg.dialogue_variant = cell.variant;
            cfg.exemplar_count = cell.shots;
            cfg.mode = PromptMode::joint();
            auto it = indexes.find(cell.variant);
            if (it == indexes.end()) {
                IndexBuildOptions opts;
                opts.variant = cell.variant;
                opts.locale = cfg.locale;
                opts.parallelism = ctx.embed_parallelism;
                it = indexes.emplace(cell.variant, build_index(*ctx.train, *ctx.embedder, opts)).first;
            }
            const PredictionRun run = cell.mode == AblationMode::Joint ? predict_dataset(ctx, it->second, cfg)
                                                                       : predict_per_dimension(ctx, it->second, cfg);
            row.report = evaluate(*ctx.target, run.records);
        } catch (const std::exception& e) {
            row.error = e.what();
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace credi
