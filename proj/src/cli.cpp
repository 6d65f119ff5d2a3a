#include "credi/cli.hpp"

#include "credi/config.hpp"
#include "credi/error.hpp"
#include "credi/finetune.hpp"
#include "credi/pipeline.hpp"
#include "credi/text.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>

namespace credi {

namespace fs = std::filesystem;

namespace {

struct Prepared {
    Dataset full;
    DatasetSplit split;
};

struct Io {
    std::ostream& out;
    std::ostream& err;
};

std::set<std::string> read_roster(const std::string& path) {
    const std::string content = text::read_file(path);
    if (auto bad = text::find_invalid_utf8(content)) throw EncodingError(path, *bad);
    std::set<std::string> roster;
    std::size_t start = 0;
    while (start < content.size()) {
        std::size_t nl = content.find('\n', start);
        if (nl == std::string::npos) nl = content.size();
        const std::string name{text::trim(std::string_view(content).substr(start, nl - start))};
        if (!name.empty() && name[0] != '#') roster.insert(name);
        start = nl + 1;
    }
    return roster;
}

Dataset load_corpus(const PipelineConfig& cfg) {
    Dataset ds = load_dataset(cfg.resolve(cfg.paths.corpus));
    validate(ds);
    return ds;
}

Prepared prepare(const PipelineConfig& cfg) {
    Prepared p;
    p.full = load_corpus(cfg);
    if (cfg.balance.enabled) p.full = balance_labels(p.full, cfg.balance.spec);
    p.split = split_dataset(p.full, cfg.split);
    return p;
}

const Dataset& eval_target(const Prepared& p, const std::string& which) {
    if (which == "train") return p.split.train;
    if (which == "val") return p.split.val;
    if (which == "test") return p.split.test;
    return p.full;
}

/// Exemplar pool, anonymized when configured.
Dataset exemplar_pool(const PipelineConfig& cfg, const Prepared& p, NameMap* name_map = nullptr) {
    if (!cfg.anonymize.enabled) return p.split.train;
    AnonymizedDataset anon = anonymize_names(p.split.train, cfg.anonymize.seed);
    if (name_map) *name_map = std::move(anon.name_map);
    return std::move(anon.dataset);
}

IndexBuildOptions index_options(const PipelineConfig& cfg) {
    IndexBuildOptions opts;
    opts.variant = cfg.prompt.dialogue_variant;
    opts.locale = cfg.prompt.locale;
    opts.parallelism = cfg.embedder.parallelism;
    opts.batch_size = cfg.embedder.batch_size;
    return opts;
}

void save_splits(const PipelineConfig& cfg, const DatasetSplit& split) {
    const fs::path dir = cfg.resolve(cfg.paths.splits);
    save_dataset(split.train, (dir / "train.jsonl").string());
    save_dataset(split.val, (dir / "val.jsonl").string());
    save_dataset(split.test, (dir / "test.jsonl").string());
}

std::string report_path(const PipelineConfig& cfg, const std::string& file) {
    return (fs::path(cfg.resolve(cfg.paths.reports)) / file).string();
}

int cmd_ingest(const PipelineConfig& cfg, Io io) {
    const fs::path dir = cfg.resolve(cfg.paths.novels);
    if (!fs::is_directory(dir)) throw FileNotFound(dir.string());
    const auto roster = read_roster(cfg.resolve(cfg.paths.roster));

    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    Dataset ds;
    std::size_t quotes = 0, warnings = 0;
    for (const auto& file : files) {
        const std::string content = text::read_file(file.string());
        if (auto bad = text::find_invalid_utf8(content)) throw EncodingError(file.string(), *bad);
        auto result = segment_dialogue_chains(content, roster, cfg.segmenter, file.stem().string());
        for (const auto& w : result.warnings) {
            ++warnings;
            io.err << fmt::format("warning: {}:{}: {}: {}\n", file.filename().string(), w.position, to_string(w.kind),
                                  w.detail);
        }
        for (auto& unit : result.units) {
            quotes += unit.quotes.size();
            for (auto& inst : propose_instances(unit)) ds.instances.push_back(std::move(inst));
            const std::string id = unit.id;
            ds.units.emplace(id, std::move(unit));
        }
    }
    ds.roster = derive_roster(ds);
    save_dataset(ds, cfg.resolve(cfg.paths.corpus));
    io.out << fmt::format("files: {}\nunits: {}\nquotes: {}\ninstances: {}\nwarnings: {}\n", files.size(),
                          ds.units.size(), quotes, ds.instances.size(), warnings);
    return kExitOk;
}

int cmd_split(const PipelineConfig& cfg, Io io) {
    const Prepared p = prepare(cfg);
    save_splits(cfg, p.split);
    io.out << fmt::format("train: {}\nval: {}\ntest: {}\n", p.split.train.instances.size(),
                          p.split.val.instances.size(), p.split.test.instances.size());
    return kExitOk;
}

int cmd_stats(const PipelineConfig& cfg, Io io) {
    const Dataset ds = load_corpus(cfg);
    const StatsReport s = dataset_stats(ds);
    io.out << fmt::format("units: {}\ninstances: {}\nlabeled instances: {}\ngold labels: {}\ncharacters: {}\nquotes: {}\n",
                          s.unit_count, s.instance_count, s.gold_instance_count, s.gold_label_count,
                          s.character_count, s.quote_count);
    for (const auto& d : s.dimensions) {
        io.out << title(d.dimension) << ":\n";
        const auto labels = labels_of(d.dimension);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (d.percentages)
                io.out << fmt::format("  {:<12} {:>7} {:>7.2f}%\n", token(labels[i]), d.counts[i], (*d.percentages)[i]);
            else
                io.out << fmt::format("  {:<12} {:>7}\n", token(labels[i]), d.counts[i]);
        }
    }
    return kExitOk;
}

int cmd_index(const PipelineConfig& cfg, Io io) {
    const Prepared p = prepare(cfg);
    const Dataset train = exemplar_pool(cfg, p);
    const auto embedder = make_embedder(cfg.embedder);
    const RetrievalIndex index = build_index(train, *embedder, index_options(cfg));
    index.save(cfg.resolve(cfg.paths.index));
    io.out << fmt::format("entries: {}\ndim: {}\nembedder: {}\n", index.size(), index.dim(), index.embedder_name());
    return kExitOk;
}

int cmd_run(const PipelineConfig& cfg, Io io) {
    // Construct a remote backend first so a missing key fails before any work.
    std::unique_ptr<Backend> backend;
    if (cfg.backend.kind == BackendKind::RemoteChat) backend = make_backend(cfg.backend);

    const Prepared p = prepare(cfg);
    save_splits(cfg, p.split);
    NameMap name_map;
    const Dataset train = exemplar_pool(cfg, p, &name_map);
    if (cfg.anonymize.enabled) text::write_file(report_path(cfg, "name_map.json"), nlohmann::ordered_json(name_map).dump(2) + "\n");
    if (!backend) backend = make_backend(cfg.backend, &p.full);

    const auto embedder = make_embedder(cfg.embedder);
    const RetrievalIndex index = build_index(train, *embedder, index_options(cfg));
    index.save(cfg.resolve(cfg.paths.index));

    const Dataset& target = eval_target(p, cfg.run.eval_split);
    PipelineContext ctx;
    ctx.train = &train;
    ctx.target = &target;
    ctx.embedder = embedder.get();
    ctx.backend = backend.get();
    ctx.batch = BatchOptions::from(cfg.backend);
    ctx.exclude_self = cfg.run.exclude_self;
    ctx.embed_parallelism = cfg.embedder.parallelism;

    const PredictionRun run = predict_dataset(ctx, index, cfg.prompt);
    save_predictions(run.records, cfg.resolve(cfg.paths.predictions));

    std::size_t backend_failures = 0;
    for (const auto& r : run.records)
        if (r.backend_error) ++backend_failures;
    if (backend_failures > 0) io.err << fmt::format("warning: {} backend failures\n", backend_failures);

    const EvalReport report = evaluate(target, run.records, cfg.prompt.mode.dimensions());
    text::write_file(report_path(cfg, "eval.json"), eval_report_json(report));
    const std::string table = format_eval_table(report, cfg.prompt.mode.name());
    text::write_file(report_path(cfg, "eval.txt"), table);
    io.out << table;
    return backend_failures == run.records.size() && !run.records.empty() ? kExitBackend : kExitOk;
}

int cmd_eval(const PipelineConfig& cfg, Io io) {
    const Prepared p = prepare(cfg);
    const auto records = load_predictions(cfg.resolve(cfg.paths.predictions));
    const EvalReport report = evaluate(eval_target(p, cfg.run.eval_split), records, cfg.prompt.mode.dimensions());
    text::write_file(report_path(cfg, "eval.json"), eval_report_json(report));
    const std::string table = format_eval_table(report, cfg.prompt.mode.name());
    text::write_file(report_path(cfg, "eval.txt"), table);
    io.out << table;
    return kExitOk;
}

int cmd_ablate(const PipelineConfig& cfg, Io io) {
    std::unique_ptr<Backend> backend;
    if (cfg.backend.kind == BackendKind::RemoteChat) backend = make_backend(cfg.backend);
    const Prepared p = prepare(cfg);
    const Dataset train = exemplar_pool(cfg, p);
    if (!backend) backend = make_backend(cfg.backend, &p.full);
    const auto embedder = make_embedder(cfg.embedder);
    const Dataset& target = eval_target(p, cfg.run.eval_split);

    PipelineContext ctx;
    ctx.train = &train;
    ctx.target = &target;
    ctx.embedder = embedder.get();
    ctx.backend = backend.get();
    ctx.batch = BatchOptions::from(cfg.backend);
    ctx.exclude_self = cfg.run.exclude_self;
    ctx.embed_parallelism = cfg.embedder.parallelism;

    const AblationTable table = run_ablation(cfg.ablation, ctx, cfg.prompt);
    text::write_file(report_path(cfg, "ablation.json"), ablation_json(table));
    const std::string text = format_ablation_table(table);
    text::write_file(report_path(cfg, "ablation.txt"), text);
    io.out << text;
    std::size_t failed = 0;
    for (const auto& row : table.rows)
        if (row.error) {
            ++failed;
            io.err << fmt::format("cell '{}' failed: {}\n", row.cell.name(), *row.error);
        }
    return failed == table.rows.size() ? kExitBackend : kExitOk;
}

int cmd_network(const PipelineConfig& cfg, Io io) {
    const Dataset ds = load_corpus(cfg);
    std::vector<RelationInstance> instances;
    if (cfg.network.source == LabelSource::Predicted) {
        std::map<std::string, const PredictionRecord*> by_id;
        const auto records = load_predictions(cfg.resolve(cfg.paths.predictions));
        for (const auto& r : records) by_id[r.instance_id] = &r;
        for (const auto& inst : ds.instances) {
            auto it = by_id.find(inst.id);
            if (it == by_id.end()) continue;
            RelationInstance copy = inst;
            copy.predicted = it->second->parsed;
            if (!copy.predicted || !copy.predicted->count(Dimension::Polarity)) {
                io.err << fmt::format("warning: no polarity predicted for {}; skipped\n", inst.id);
                continue;
            }
            instances.push_back(std::move(copy));
        }
    } else {
        instances = ds.instances;
    }

    NetworkInputs inputs;
    inputs.quote_counts = count_quotes(ds);
    if (!cfg.paths.roles.empty()) inputs.roles = load_roles(cfg.resolve(cfg.paths.roles));
    if (cfg.network.include_roster) inputs.extra_nodes.assign(ds.roster.begin(), ds.roster.end());
    const CharacterNetwork net = build_network(instances, cfg.network.source, inputs);
    for (const auto& w : net.warnings) io.err << "warning: " << w << "\n";

    io.out << fmt::format("nodes: {}\nedges: {}\n", net.nodes.size(), net.edges.size());
    for (GraphFormat f : cfg.network.formats) {
        const std::string path = cfg.resolve(cfg.paths.network) + std::string(file_extension(f));
        export_network(net, f, path);
        io.out << "wrote " << path << "\n";
    }
    return kExitOk;
}

int cmd_export_finetune(const PipelineConfig& cfg, Io io) {
    const Prepared p = prepare(cfg);
    const Dataset train = exemplar_pool(cfg, p);
    const std::size_t n = export_finetune_file(train, cfg.prompt, cfg.resolve(cfg.paths.finetune));
    io.out << fmt::format("records: {}\n", n);
    return kExitOk;
}

struct Command {
    const char* name;
    const char* help;
    int (*run)(const PipelineConfig&, Io);
};

constexpr Command kCommands[] = {
    {"ingest", "Segment novel chapters into dialogue units and write the corpus", cmd_ingest},
    {"split", "Split the corpus into train/val/test files", cmd_split},
    {"index", "Embed the training split and write the retrieval index", cmd_index},
    {"run", "Split, index, prompt, predict and evaluate", cmd_run},
    {"eval", "Evaluate a predictions file against gold labels", cmd_eval},
    {"ablate", "Run the prompt-mode x dialogue-variant ablation grid", cmd_ablate},
    {"network", "Build and export the character network", cmd_network},
    {"stats", "Print corpus statistics and label distributions", cmd_stats},
    {"export-finetune", "Write instruction-tuning records for the training split", cmd_export_finetune},
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"credi: character relationship extraction from dialogue"};
    app.name("credi");
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    app.add_option("-c,--config", config_path, "Pipeline configuration file (JSON)");

    const auto defaults = flatten_config(config_to_json(PipelineConfig{}));
    const auto keys = config_keys();
    std::map<std::string, std::string> values;
    std::map<std::string, CLI::Option*> options;
    for (const auto& key : keys) {
        const auto& def = defaults.at(key);
        std::string shown = def.is_string() ? def.get<std::string>() : def.dump();
        if (shown.size() > 40) shown = "(built-in)";
        options[key] = app.add_option("--" + key, values[key], fmt::format("Config key {} [default: {}]", key, shown))
                           ->group("Config overrides");
    }

    std::vector<CLI::App*> subs;
    for (const auto& c : kCommands) subs.push_back(app.add_subcommand(c.name, c.help));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << "run 'credi --help' for usage\n";
        return kExitConfig;
    }

    try {
        if (config_path.empty()) throw ConfigError("--config is required");
        std::map<std::string, std::string> overrides;
        for (const auto& [key, opt] : options)
            if (opt->count() > 0) overrides[key] = values[key];
        const PipelineConfig cfg = load_config(config_path, overrides);
        for (std::size_t i = 0; i < subs.size(); ++i)
            if (subs[i]->parsed()) return kCommands[i].run(cfg, Io{out, err});
        throw ConfigError("no subcommand given");
    } catch (const IoError& e) {
        err << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const ValidationError& e) {
        err << "validation error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const nlohmann::json::exception& e) {
        err << "schema error: " << e.what() << "\n";
        return kExitSchema;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BackendFailure& e) {
        err << "backend error: " << e.what() << "\n";
        return kExitBackend;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitInternal;
    }
}

} // namespace credi
