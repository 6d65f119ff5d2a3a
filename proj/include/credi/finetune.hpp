#pragma once

#include "credi/corpus.hpp"
#include "credi/prompting.hpp"

#include <string>

namespace credi {

/// One supervised example per instance: {"instruction", "input", "output"}.
/// instruction + "\n\n" + input equals the zero-shot rendered prompt and
/// output is the canonical answer line. Throws MissingGold.
std::string finetune_jsonl(const Dataset& ds, const PromptConfig& cfg);

/// Writes finetune_jsonl() to `path`; returns the record count.
std::size_t export_finetune_file(const Dataset& ds, const PromptConfig& cfg, const std::string& path);

} // namespace credi
