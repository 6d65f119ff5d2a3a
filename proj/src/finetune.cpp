#include "credi/finetune.hpp"

#include "credi/error.hpp"
#include "credi/text.hpp"

#include <nlohmann/json.hpp>

namespace credi {

std::string finetune_jsonl(const Dataset& ds, const PromptConfig& cfg) {
    PromptConfig zero_shot = cfg;
    zero_shot.exemplar_count = 0;
    zero_shot.validate();

    std::string out;
    for (const auto& inst : ds.instances) {
        if (!inst.gold) throw MissingGold(inst.id);
        const PromptSpec spec = build_prompt(inst, ds.unit(inst.unit_id), zero_shot, {});
        nlohmann::ordered_json rec;
        rec["instruction"] = render_instruction(spec);
        rec["input"] = render_query(spec);
        rec["output"] = render_answer(*inst.gold, cfg.mode);
        out += rec.dump();
        out += '\n';
    }
    return out;
}

std::size_t export_finetune_file(const Dataset& ds, const PromptConfig& cfg, const std::string& path) {
    text::write_file(path, finetune_jsonl(ds, cfg));
    return ds.instances.size();
}

} // namespace credi
