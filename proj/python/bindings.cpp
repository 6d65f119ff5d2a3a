#include "credi/cli.hpp"
#include "credi/corpus.hpp"
#include "credi/error.hpp"
#include "credi/evaluation.hpp"
#include "credi/network.hpp"
#include "credi/prompting.hpp"
#include "credi/retrieval.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

namespace py = pybind11;
using namespace credi;

namespace {

py::dict label_dict(const LabelMap& m) {
    py::dict d;
    for (const auto& [dim, label] : m) d[py::str(std::string(key(dim)))] = std::string(token(label));
    return d;
}

LabelMap label_map(const std::map<std::string, std::string>& d) {
    LabelMap m;
    for (const auto& [k, v] : d) {
        const auto dim = dimension_from_key(k);
        if (!dim) throw ValidationError("unknown dimension '" + k + "'");
        const auto label = label_from_token(*dim, v);
        if (!label) throw ValidationError("unknown label '" + v + "' for " + k);
        m.emplace(*dim, *label);
    }
    return m;
}

py::dict stats_dict(const StatsReport& s) {
    py::dict d;
    d["units"] = s.unit_count;
    d["instances"] = s.instance_count;
    d["gold_instances"] = s.gold_instance_count;
    d["gold_labels"] = s.gold_label_count;
    d["characters"] = s.character_count;
    d["quotes"] = s.quote_count;
    py::dict dims;
    for (const auto& ds : s.dimensions) {
        py::dict counts, pct;
        const auto labels = labels_of(ds.dimension);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            counts[py::str(std::string(token(labels[i])))] = ds.counts[i];
            if (ds.percentages) pct[py::str(std::string(token(labels[i])))] = (*ds.percentages)[i];
        }
        py::dict entry;
        entry["counts"] = counts;
        entry["percentages"] = ds.percentages ? py::object(pct) : py::object(py::none());
        dims[py::str(std::string(key(ds.dimension)))] = entry;
    }
    d["dimensions"] = dims;
    return d;
}

} // namespace

PYBIND11_MODULE(_credi, m) {
    m.doc() = "Character relationship extraction from dialogue";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<BackendFailure>(m, "BackendFailure", PyExc_RuntimeError);

    m.def("corpus_stats", [](const std::string& path) { return stats_dict(dataset_stats(load_dataset(path))); },
          py::arg("path"), "Counts and label distributions for a JSONL corpus.");

    m.def(
        "split_sizes",
        [](std::size_t n) {
            const SplitSizes s = split_sizes(n, SplitSpec{});
            return py::make_tuple(s.train, s.val, s.test);
        },
        py::arg("n"), "Train/val/test sizes for n instances under the default 8:1:1 split.");

    m.def(
        "weighted_f1",
        [](const std::vector<std::string>& gold, const std::vector<std::string>& pred, const std::vector<std::string>& classes) {
            return weighted_f1(gold, pred, classes);
        },
        py::arg("gold"), py::arg("pred"), py::arg("classes"));

    m.def(
        "render_answer",
        [](const std::map<std::string, std::string>& labels, const std::string& mode) {
            return render_answer(label_map(labels), PromptMode::parse(mode));
        },
        py::arg("labels"), py::arg("mode") = "joint");

    m.def(
        "parse_response",
        [](const std::string& text, const std::string& mode) -> py::object {
            const ParseOutcome o = parse_response(text, PromptMode::parse(mode));
            if (o.labels) return label_dict(*o.labels);
            throw ValidationError(o.error ? std::string(to_string(o.error->kind)) + ": " + o.error->detail : "unparsable response");
        },
        py::arg("text"), py::arg("mode") = "joint", "Label dict parsed from a model response; raises ValueError.");

    m.def("edge_color", &edge_color, py::arg("score"));
    m.def("node_size", &node_size, py::arg("quote_count"));

    m.def(
        "network",
        [](const std::string& corpus, const std::string& format, const std::string& source) {
            const Dataset ds = load_dataset(corpus);
            NetworkInputs in;
            for (const auto& [name, n] : count_quotes(ds)) in.quote_counts[name] = n;
            return render_network(build_network(ds.instances, label_source_from_string(source), in),
                                  graph_format_from_string(format));
        },
        py::arg("corpus"), py::arg("format") = "graphml", py::arg("source") = "gold",
        "Character network of a corpus rendered as graphml, dot or json.");

    py::class_<HashEmbedder>(m, "HashEmbedder")
        .def(py::init<std::size_t>(), py::arg("dim") = 256)
        .def_property_readonly("dim", &HashEmbedder::dim)
        .def("embed", &HashEmbedder::embed, py::arg("text"));

    m.def(
        "topk",
        [](const std::vector<std::pair<std::string, Embedding>>& entries, const Embedding& query, std::size_t k) {
            if (entries.empty()) throw ValidationError("topk needs at least one entry");
            RetrievalIndex index(entries.front().second.size(), "python");
            for (const auto& [id, v] : entries) index.add(id, v);
            std::vector<std::pair<std::string, double>> out;
            for (const auto& hit : index.topk(query, k)) out.emplace_back(hit.instance_id, hit.score);
            return out;
        },
        py::arg("entries"), py::arg("query"), py::arg("k"), "Exact cosine top-k over (id, unit vector) pairs.");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = run_cli(args, out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line driver in-process; returns (exit_code, stdout, stderr).");
}
